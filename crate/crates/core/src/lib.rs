//! Finite relational structures, morphism search, (k,l)-consistency and
//! tools for checking when a class of finite structures fails to have a
//! homogeneous expansion by finitely many relations.
//!
//! Structures carry an explicit [`Signature`] and a sorted domain of string
//! identifiers. Every operation is a pure function of its inputs.

pub mod bounds;
pub mod cli;
pub mod consistency;
pub mod error;
pub mod families;
pub mod io;
pub mod morphisms;
pub mod rng;
pub mod structure;
pub mod verifier;

pub use bounds::{atomic_type_count, condition_holds, log_ceil2, minimal_m, BoundsParams, BoundsReport};
pub use consistency::{
    inverse_hom_transfer, is_consistent, kl_family, spoiler_trace, validate_trace,
    ConsistencyFamily, ConsistencyOptions, GameTrace,
};
pub use error::{Error, Result};
pub use families::{
    build_jc, build_template, diagram_fn, diagram_g, diagram_lineq, gen_fn, gen_g, gen_pn,
    io_expansion, marking, tree_instance, AbelianGroup, Coloring, Diagram, GluedStructure, Side,
    TreeShape,
};
pub use morphisms::{
    canonical_embeddings, check_morphism, check_partial_homomorphism, enumerate_embeddings,
    enumerate_homomorphisms, find_homomorphism, is_isomorphic, restriction_set, EmbeddingSet,
    MorphismKind, PreparedTarget,
};
pub use structure::{
    blowup, disjoint_union, free_amalgam, pullback, quotient, union, AmalgamResult, ElementMap,
    Signature, Structure, StructureBuilder, Symbol,
};
pub use verifier::{
    check_confusion, consistency_oracle, fn_family_oracle, forbh_oracle, g_family_oracle,
    witnesses_failure, ClassOracle, ConfusionOptions, ConfusionReport, SweepMode, Verdict,
};
