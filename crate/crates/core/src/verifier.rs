//! Class-membership oracles and the checks built on them: failure of
//! amalgamation, confusing-diagram sweeps over colorings, antichains,
//! random expansions with pullback collisions, and the reachability
//! expansion probe for directed-path-free structures.

use std::collections::BTreeSet;
use std::sync::{Arc, Mutex};

use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::Serialize;

use crate::consistency::is_consistent;
use crate::error::{Error, Result};
use crate::families::{
    build_jc, coloring_string, cplus_check, gen_fn, gen_g, gen_pn, io_expansion, Coloring,
    Diagram, Side, TreeShape,
};
use crate::morphisms::{
    find_embedding, find_homomorphism, has_homomorphism_into, PreparedTarget,
};
use crate::rng::SplitMix64;
use crate::structure::{free_amalgam, pullback, same_signature, ElementMap, Signature, Structure};

/// Outcome of a membership test.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub member: bool,
    /// Why the input is not a member, when known.
    pub evidence: Option<String>,
}

impl Verdict {
    pub fn member() -> Self {
        Verdict {
            member: true,
            evidence: None,
        }
    }

    pub fn excluded(evidence: impl Into<String>) -> Self {
        Verdict {
            member: false,
            evidence: Some(evidence.into()),
        }
    }
}

type Test = dyn Fn(&Structure) -> Result<Verdict> + Send + Sync;

/// A membership test for a class of finite structures.
#[derive(Clone)]
pub struct ClassOracle {
    test: Arc<Test>,
    inverse_hom_closed: bool,
    description: String,
}

impl std::fmt::Debug for ClassOracle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ClassOracle")
            .field("description", &self.description)
            .field("inverse_hom_closed", &self.inverse_hom_closed)
            .finish()
    }
}

impl ClassOracle {
    /// `inverse_hom_closed` is a promise by the caller: a structure mapping
    /// homomorphically into a member is itself a member.
    pub fn new<F>(description: impl Into<String>, inverse_hom_closed: bool, test: F) -> Self
    where
        F: Fn(&Structure) -> Result<Verdict> + Send + Sync + 'static,
    {
        ClassOracle {
            test: Arc::new(test),
            inverse_hom_closed,
            description: description.into(),
        }
    }

    pub fn test(&self, s: &Structure) -> Result<Verdict> {
        (self.test)(s)
    }

    pub fn is_member(&self, s: &Structure) -> Result<bool> {
        Ok(self.test(s)?.member)
    }

    pub fn inverse_hom_closed(&self) -> bool {
        self.inverse_hom_closed
    }

    pub fn description(&self) -> &str {
        &self.description
    }
}

struct MemberCache {
    members: Vec<Arc<(String, Structure)>>,
    exhausted: bool,
}

/// `Forb_h` of an indexed family. Member `i` is `generator(i)`, which must
/// be nondecreasing in size and return `None` past the end. An input `S` is
/// tested against every member with at most `max(size_bound, |S|)`
/// elements.
pub fn forbh_oracle<F>(description: impl Into<String>, generator: F, size_bound: usize) -> ClassOracle
where
    F: Fn(usize) -> Option<(String, Structure)> + Send + Sync + 'static,
{
    let cache = Mutex::new(MemberCache {
        members: Vec::new(),
        exhausted: false,
    });
    ClassOracle::new(description, true, move |s: &Structure| {
        let limit = size_bound.max(s.len());
        let members = {
            let mut c = cache.lock().unwrap();
            while !c.exhausted && c.members.last().is_none_or(|m| m.1.len() <= limit) {
                match generator(c.members.len()) {
                    Some(m) => c.members.push(Arc::new(m)),
                    None => c.exhausted = true,
                }
            }
            c.members.clone()
        };
        excluded_by(members.iter().map(|m| (&m.0, &m.1)).filter(|m| m.1.len() <= limit), s)
    })
}

/// `Forb_h` of an explicit finite family.
pub fn forbh_finite_oracle(description: impl Into<String>, members: Vec<(String, Structure)>) -> ClassOracle {
    let members = Arc::new(members);
    ClassOracle::new(description, true, move |s: &Structure| {
        excluded_by(members.iter().map(|m| (&m.0, &m.1)), s)
    })
}

fn excluded_by<'a>(members: impl Iterator<Item = (&'a String, &'a Structure)>, s: &Structure) -> Result<Verdict> {
    let target = PreparedTarget::new(s);
    for (name, f) in members {
        same_signature(f, s)?;
        if has_homomorphism_into(f, &target) {
            return Ok(Verdict::excluded(format!("{name} maps homomorphically")));
        }
    }
    Ok(Verdict::member())
}

/// `Forb_h({F_1, F_2, …})`.
pub fn fn_family_oracle(size_bound: usize) -> ClassOracle {
    forbh_oracle(
        "Forb_h(F_n)",
        |i| Some((format!("F_{}", i + 1), gen_fn(i + 1).unwrap())),
        size_bound,
    )
}

/// `Forb_h` of the tree structures with 2 to `max_leaves` leaves.
pub fn g_family_oracle(max_leaves: usize) -> ClassOracle {
    let members = (2..=max_leaves)
        .flat_map(TreeShape::all_with_leaves)
        .map(|shape| (format!("G{shape}"), gen_g(&shape).unwrap()))
        .collect();
    forbh_finite_oracle(format!("Forb_h(G, up to {max_leaves} leaves)"), members)
}

/// `Forb_h({P_1, P_2, …})`.
pub fn path_family_oracle(size_bound: usize) -> ClassOracle {
    forbh_oracle(
        "Forb_h(P_n)",
        |i| Some((format!("P_{}", i + 1), gen_pn(i + 1).unwrap())),
        size_bound,
    )
}

/// Structures that are (k,l)-consistent with respect to `template`.
pub fn consistency_oracle(template: Structure, k: usize, l: usize) -> Result<ClassOracle> {
    if k < 1 || l < k {
        return Err(Error::InvalidParameter(format!("invalid (k,l) = ({k},{l})")));
    }
    let description = format!("({k},{l})-consistent instances");
    Ok(ClassOracle::new(description, true, move |s: &Structure| {
        Ok(if is_consistent(s, &template, k, l)? {
            Verdict::member()
        } else {
            Verdict::excluded(format!("not ({k},{l})-consistent"))
        })
    }))
}

fn require_closed(oracle: &ClassOracle) -> Result<()> {
    if !oracle.inverse_hom_closed() {
        return Err(Error::Precondition(format!(
            "{} is not closed under inverse homomorphisms; only the free amalgam would be covered",
            oracle.description()
        )));
    }
    Ok(())
}

/// True iff the free amalgam of the diagram lies outside the class. For an
/// inverse-homomorphism-closed class this rules out every amalgam, since the
/// free amalgam maps homomorphically onto each of them.
pub fn witnesses_failure(d: &Diagram, oracle: &ClassOracle) -> Result<bool> {
    require_closed(oracle)?;
    for (s, name) in [(&d.base, "base"), (&d.left, "left"), (&d.right, "right")] {
        if !oracle.is_member(s)? {
            return Err(Error::InvalidDiagram(format!("{name} structure is not in the class")));
        }
    }
    let am = free_amalgam(&d.base, &d.left, &d.left_emb, &d.right, &d.right_emb)?;
    Ok(!oracle.is_member(&am.amalgam)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum SweepMode {
    Exhaustive,
    Sample { count: usize, seed: u64 },
}

/// Exhaustive sweeps are refused above this many spots.
pub const MAX_EXHAUSTIVE_SPOTS: usize = 20;

#[derive(Clone, Debug)]
pub struct ConfusionOptions {
    pub mode: SweepMode,
    /// Worker threads; `None` uses all available processors.
    pub jobs: Option<usize>,
    /// Keep the verdict of every coloring, not just the failures.
    pub record_outcomes: bool,
}

impl ConfusionOptions {
    pub fn exhaustive() -> Self {
        ConfusionOptions {
            mode: SweepMode::Exhaustive,
            jobs: None,
            record_outcomes: false,
        }
    }

    pub fn sample(count: usize, seed: u64) -> Self {
        ConfusionOptions {
            mode: SweepMode::Sample { count, seed },
            jobs: None,
            record_outcomes: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ColoringOutcome {
    /// One letter per spot, `L` or `R`.
    pub coloring: String,
    pub member: bool,
    pub evidence: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ConfusionReport {
    pub base_size: usize,
    pub left_size: usize,
    pub right_size: usize,
    pub m: usize,
    pub spots: usize,
    pub mode: SweepMode,
    pub oracle: String,
    pub failure_witnessed: bool,
    pub colorings_tested: usize,
    pub failures: Vec<ColoringOutcome>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outcomes: Option<Vec<ColoringOutcome>>,
    pub verdict: bool,
}

/// Coloring number `code`: spot `i` is right iff bit `i` of `code` is set.
pub fn coloring_from_code(code: u64, spots: usize) -> Coloring {
    (0..spots)
        .map(|i| if code >> i & 1 == 1 { Side::Right } else { Side::Left })
        .collect()
}

/// Checks that `J^C` stays in the class for the colorings selected by the
/// mode, after confirming that the diagram witnesses failure of
/// amalgamation.
pub fn check_confusion(d: &Diagram, m: usize, opts: &ConfusionOptions, oracle: &ClassOracle) -> Result<ConfusionReport> {
    if !witnesses_failure(d, oracle)? {
        return Err(Error::Precondition(
            "the free amalgam of the diagram is in the class".into(),
        ));
    }
    let spots = (m as u64)
        .checked_pow(d.base.len() as u32)
        .ok_or_else(|| Error::Budget("too many spots".into()))? as usize;
    let colorings: Vec<Coloring> = match opts.mode {
        SweepMode::Exhaustive => {
            if spots > MAX_EXHAUSTIVE_SPOTS {
                return Err(Error::Budget(format!(
                    "{spots} spots give 2^{spots} colorings; exhaustive sweeps allow at most {MAX_EXHAUSTIVE_SPOTS} spots"
                )));
            }
            (0..1u64 << spots).map(|c| coloring_from_code(c, spots)).collect()
        }
        SweepMode::Sample { count, seed } => {
            let mut rng = SplitMix64::new(seed);
            (0..count)
                .map(|_| {
                    rng.bits(spots)
                        .into_iter()
                        .map(|b| if b { Side::Right } else { Side::Left })
                        .collect()
                })
                .collect()
        }
    };
    if colorings.is_empty() {
        return Err(Error::InvalidParameter("no colorings to test".into()));
    }
    let run = || -> Result<Vec<ColoringOutcome>> {
        colorings
            .par_iter()
            .map(|c| {
                let jc = build_jc(d, m, c)?;
                let v = oracle.test(&jc.structure)?;
                Ok(ColoringOutcome {
                    coloring: coloring_string(c),
                    member: v.member,
                    evidence: v.evidence,
                })
            })
            .collect()
    };
    let outcomes = match opts.jobs {
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j.max(1))
            .build()
            .map_err(|e| Error::InvalidParameter(e.to_string()))?
            .install(run)?,
        None => run()?,
    };
    let mut failures: Vec<ColoringOutcome> = outcomes.iter().filter(|o| !o.member).cloned().collect();
    failures.sort_by(|a, b| a.coloring.cmp(&b.coloring));
    Ok(ConfusionReport {
        base_size: d.base.len(),
        left_size: d.left.len(),
        right_size: d.right.len(),
        m,
        spots,
        mode: opts.mode,
        oracle: oracle.description().to_owned(),
        failure_witnessed: true,
        colorings_tested: colorings.len(),
        verdict: failures.is_empty(),
        failures,
        outcomes: opts.record_outcomes.then_some(outcomes),
    })
}

/// The first ordered pair `(i, j)`, `i ≠ j`, with a homomorphism from
/// `structures[i]` to `structures[j]`.
pub fn antichain_violation(structures: &[Structure]) -> Result<Option<(usize, usize)>> {
    for (i, a) in structures.iter().enumerate() {
        for (j, b) in structures.iter().enumerate() {
            if i != j && find_homomorphism(a, b)?.is_some() {
                return Ok(Some((i, j)));
            }
        }
    }
    Ok(None)
}

pub fn antichain(structures: &[Structure]) -> Result<bool> {
    Ok(antichain_violation(structures)?.is_none())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ExpansionSpec {
    pub t: usize,
    pub r: usize,
    pub seed: u64,
}

/// Largest number of candidate tuples per new predicate.
pub const MAX_EXPANSION_TUPLES: usize = 10_000_000;

pub fn expansion_symbol(j: usize) -> String {
    format!("+P{j}")
}

/// Adds `t` predicates `+P0, +P1, …`; predicate `j` has arity `j % r + 1`
/// and contains each tuple with probability one half. Tuples are visited in
/// lexicographic order of domain positions, consuming one output of the
/// generator each (its lowest bit decides).
pub fn random_expansion(s: &Structure, spec: &ExpansionSpec) -> Result<Structure> {
    if spec.r < 1 {
        return Err(Error::InvalidParameter("r must be at least 1".into()));
    }
    let symbols: Vec<(String, usize)> = (0..spec.t).map(|j| (expansion_symbol(j), j % spec.r + 1)).collect();
    let extra = Signature::new(symbols.iter().map(|(n, a)| (n.clone(), *a)))?;
    let mut out = s.expand(&extra)?;
    let mut rng = SplitMix64::new(spec.seed);
    let n = s.len();
    for (name, arity) in &symbols {
        let total = n
            .checked_pow(*arity as u32)
            .filter(|&c| c <= MAX_EXPANSION_TUPLES)
            .ok_or_else(|| Error::Budget(format!("{n}^{arity} candidate tuples")))?;
        let mut tuples: Vec<Vec<&str>> = Vec::new();
        for code in 0..total {
            if rng.next_u64() & 1 == 1 {
                let mut t = vec![""; *arity];
                let mut c = code;
                for slot in t.iter_mut().rev() {
                    *slot = s.element((c % n) as u32);
                    c /= n;
                }
                tuples.push(t);
            }
        }
        out = out.with_relation(name, &tuples)?;
    }
    Ok(out)
}

/// Two spots with equal pullbacks and different colors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Collision {
    pub first: usize,
    pub second: usize,
    pub pi: ElementMap,
    pub sigma: ElementMap,
}

/// Scans the spots of `J^C` in order and returns the first pair whose lifted
/// embeddings pull `jplus` back to the same structure while having
/// different colors.
pub fn collision_search(d: &Diagram, m: usize, coloring: &[Side], jplus: &Structure) -> Result<Option<Collision>> {
    let jc = build_jc(d, m, coloring)?;
    if jc.structure.domain() != jplus.domain() {
        return Err(Error::InvalidParameter(
            "expansion does not have the domain of J^C".into(),
        ));
    }
    let mut seen: FxHashMap<Structure, [Option<usize>; 2]> = FxHashMap::default();
    for (i, pi) in jc.lifted.iter().enumerate() {
        let pb = pullback(pi, jplus)?;
        let side = coloring[i] as usize;
        let slot = seen.entry(pb).or_insert([None, None]);
        if let Some(j) = slot[1 - side] {
            return Ok(Some(Collision {
                first: j,
                second: i,
                pi: jc.lifted[j].clone(),
                sigma: pi.clone(),
            }));
        }
        slot[side].get_or_insert(i);
    }
    Ok(None)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ProbeReport {
    pub samples: usize,
    pub pairs_tried: usize,
    /// Pairs whose sampled substructure had to be shrunk before it embedded
    /// into the partner.
    pub pairs_shrunk: usize,
    pub amalgams_checked: usize,
    pub passed: bool,
    pub failures: Vec<String>,
}

/// Expands every sample by reachability, checks the expansion, and freely
/// amalgamates seeded random pairs along a random induced substructure of
/// the first, dropping its last element until it embeds into the second.
pub fn homogenization_probe(samples: &[Structure], seed: u64) -> Result<ProbeReport> {
    let mut failures = Vec::new();
    let mut expansions = Vec::with_capacity(samples.len());
    for (i, s) in samples.iter().enumerate() {
        let e = io_expansion(s)?;
        if !cplus_check(&e)? {
            failures.push(format!("expansion of sample {i} violates the I/O conditions"));
        }
        if &e.reduct(s.signature())? != s {
            failures.push(format!("expansion of sample {i} does not reduce to it"));
        }
        expansions.push(e);
    }
    let mut rng = SplitMix64::new(seed);
    let (mut tried, mut shrunk, mut checked) = (0, 0, 0);
    if !samples.is_empty() {
        for _ in 0..samples.len() {
            let i = rng.below(samples.len() as u64) as usize;
            let j = rng.below(samples.len() as u64) as usize;
            tried += 1;
            let (ei, ej) = (&expansions[i], &expansions[j]);
            let mut keep: Vec<&str> = ei
                .domain()
                .iter()
                .map(String::as_str)
                .filter(|_| rng.next_u64() & 1 == 1)
                .collect();
            let mut base = ei.induced_substructure(keep.iter().copied())?;
            let mut embedding = find_embedding(&base, ej)?;
            if embedding.is_none() {
                shrunk += 1;
            }
            while embedding.is_none() {
                keep.pop();
                base = ei.induced_substructure(keep.iter().copied())?;
                embedding = find_embedding(&base, ej)?;
            }
            let g = embedding.unwrap();
            let am = free_amalgam(&base, ei, &ElementMap::identity(&base), ej, &g)?;
            checked += 1;
            if !cplus_check(&am.amalgam)? {
                failures.push(format!("amalgam of samples {i} and {j} violates the I/O conditions"));
                continue;
            }
            let reduct = am.amalgam.reduct(samples[i].signature())?;
            if io_expansion(&reduct).is_err() {
                failures.push(format!("amalgam of samples {i} and {j} contains an S-T path"));
            }
        }
    }
    Ok(ProbeReport {
        samples: samples.len(),
        pairs_tried: tried,
        pairs_shrunk: shrunk,
        amalgams_checked: checked,
        passed: failures.is_empty(),
        failures,
    })
}

/// A random structure over `Edir, S, T` with `size` elements and no directed
/// path from an `S` node to a `T` node: labels and edges are drawn at
/// random, then `T` is removed from every node reachable from `S`.
pub fn random_path_free_sample(size: usize, seed: u64) -> Result<Structure> {
    let mut rng = SplitMix64::new(seed);
    let sig = Signature::new([("Edir", 2), ("S", 1), ("T", 1)])?;
    let ids: Vec<String> = (0..size).map(|i| format!("x{i:02}")).collect();
    let mut b = Structure::builder(sig).elements(ids.iter().cloned());
    for x in &ids {
        if rng.below(4) == 0 {
            b.add_tuple("S", [x.as_str()]);
        }
        if rng.below(4) == 0 {
            b.add_tuple("T", [x.as_str()]);
        }
    }
    for x in &ids {
        for y in &ids {
            if rng.below(size.max(1) as u64) == 0 {
                b.add_tuple("Edir", [x.as_str(), y.as_str()]);
            }
        }
    }
    let s = b.build()?;
    // reachable set from S
    let mut reach: BTreeSet<&str> = s.labeled("S").into_iter().collect();
    let edges = s.tuples("Edir");
    loop {
        let before = reach.len();
        for e in &edges {
            if reach.contains(e[0]) {
                reach.insert(e[1]);
            }
        }
        if reach.len() == before {
            break;
        }
    }
    let t: Vec<Vec<&str>> = s
        .labeled("T")
        .into_iter()
        .filter(|x| !reach.contains(x))
        .map(|x| vec![x])
        .collect();
    s.with_relation("T", &t)
}
