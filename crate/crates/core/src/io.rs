//! Canonical JSON documents for structures and diagrams, and DOT export.
//!
//! A structure document looks like
//!
//! ```json
//! {
//!   "domain": ["a", "b"],
//!   "relations": { "E": [["a", "b"]] },
//!   "signature": [{ "arity": 2, "name": "E" }]
//! }
//! ```
//!
//! Output is pretty-printed with sorted keys, sorted domains and sorted
//! tuples, and ends with a newline, so serializing a parsed canonical
//! document reproduces it byte for byte.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::Diagram;
use crate::structure::{ElementMap, Signature, Structure};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymbolDocument {
    pub arity: usize,
    pub name: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructureDocument {
    pub domain: Vec<String>,
    #[serde(default)]
    pub relations: BTreeMap<String, Vec<Vec<String>>>,
    pub signature: Vec<SymbolDocument>,
}

impl StructureDocument {
    pub fn from_structure(s: &Structure) -> Self {
        let signature = s
            .signature()
            .symbols()
            .iter()
            .map(|sym| SymbolDocument {
                arity: sym.arity,
                name: sym.name.clone(),
            })
            .collect();
        let relations = s
            .signature()
            .symbols()
            .iter()
            .map(|sym| {
                let tuples = s
                    .tuples(&sym.name)
                    .into_iter()
                    .map(|t| t.into_iter().map(str::to_owned).collect())
                    .collect();
                (sym.name.clone(), tuples)
            })
            .collect();
        StructureDocument {
            domain: s.domain().to_vec(),
            relations,
            signature,
        }
    }

    pub fn to_structure(&self) -> Result<Structure> {
        let sig = Signature::new(self.signature.iter().map(|s| (s.name.clone(), s.arity)))?;
        let mut seen = BTreeSet::new();
        for x in &self.domain {
            if x.contains('\n') {
                return Err(Error::Parse(format!("identifier {x:?} contains a newline")));
            }
            if !seen.insert(x) {
                return Err(Error::Parse(format!("duplicate identifier {x:?}")));
            }
        }
        let mut b = Structure::builder(sig).elements(self.domain.iter().cloned());
        for (name, tuples) in &self.relations {
            for t in tuples {
                b.add_tuple(name, t.iter().cloned());
            }
        }
        b.build()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagramDocument {
    pub base: StructureDocument,
    pub left: StructureDocument,
    #[serde(rename = "leftEmb")]
    pub left_emb: ElementMap,
    pub right: StructureDocument,
    #[serde(rename = "rightEmb")]
    pub right_emb: ElementMap,
}

impl DiagramDocument {
    pub fn from_diagram(d: &Diagram) -> Self {
        DiagramDocument {
            base: StructureDocument::from_structure(&d.base),
            left: StructureDocument::from_structure(&d.left),
            left_emb: d.left_emb.clone(),
            right: StructureDocument::from_structure(&d.right),
            right_emb: d.right_emb.clone(),
        }
    }

    /// Rebuilds the diagram, validating both embeddings.
    pub fn to_diagram(&self) -> Result<Diagram> {
        Diagram::new(
            self.base.to_structure()?,
            self.left.to_structure()?,
            self.right.to_structure()?,
            self.left_emb.clone(),
            self.right_emb.clone(),
        )
    }
}

/// Pretty JSON with sorted object keys and a trailing newline.
pub fn to_canonical_json<T: Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value).map_err(|e| Error::Parse(e.to_string()))?;
    let mut s = serde_json::to_string_pretty(&v).map_err(|e| Error::Parse(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn structure_to_json(s: &Structure) -> String {
    to_canonical_json(&StructureDocument::from_structure(s)).unwrap()
}

pub fn structure_from_json(text: &str) -> Result<Structure> {
    let doc: StructureDocument = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    doc.to_structure()
}

pub fn diagram_to_json(d: &Diagram) -> String {
    to_canonical_json(&DiagramDocument::from_diagram(d)).unwrap()
}

pub fn diagram_from_json(text: &str) -> Result<Diagram> {
    let doc: DiagramDocument = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    doc.to_diagram()
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for ch in s.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            _ => out.push(ch),
        }
    }
    out.push('"');
    out
}

/// Graphviz rendering. Unary relations become node labels, binary ones
/// edges (undirected for the names in `symmetric`, one edge per unordered
/// pair), and each tuple of higher arity a small box node wired to its
/// components with port numbers `1..k`.
pub fn to_dot(s: &Structure, symmetric: &[&str]) -> String {
    let mut out = String::from("digraph structure {\n");
    let mut labels: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for sym in s.signature().symbols() {
        if sym.arity == 1 {
            for t in s.tuples(&sym.name) {
                labels.entry(t[0]).or_default().push(&sym.name);
            }
        }
    }
    for x in s.domain() {
        match labels.get(x.as_str()) {
            Some(ls) => {
                let label = format!("{x}\\n{}", ls.join(","));
                let _ = writeln!(out, "  {} [label={}];", quote(x), quote(&label));
            }
            None => {
                let _ = writeln!(out, "  {};", quote(x));
            }
        }
    }
    let mut factor = 0usize;
    for sym in s.signature().symbols() {
        let undirected = symmetric.contains(&sym.name.as_str());
        match sym.arity {
            1 => {}
            2 => {
                for t in s.tuples(&sym.name) {
                    if undirected {
                        if t[0] > t[1] && s.holds(&sym.name, &[t[1], t[0]]) {
                            continue;
                        }
                        let _ = writeln!(
                            out,
                            "  {} -> {} [label={}, dir=none];",
                            quote(t[0]),
                            quote(t[1]),
                            quote(&sym.name)
                        );
                    } else {
                        let _ = writeln!(out, "  {} -> {} [label={}];", quote(t[0]), quote(t[1]), quote(&sym.name));
                    }
                }
            }
            _ => {
                for t in s.tuples(&sym.name) {
                    let node = format!("#{}:{factor}", sym.name);
                    factor += 1;
                    let _ = writeln!(out, "  {} [shape=box, label={}];", quote(&node), quote(&sym.name));
                    for (i, x) in t.iter().enumerate() {
                        let _ = writeln!(out, "  {} -> {} [label=\"{}\"];", quote(&node), quote(x), i + 1);
                    }
                }
            }
        }
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{build_template, diagram_lineq, gen_fn, AbelianGroup};

    #[test]
    fn json_roundtrip_is_byte_stable() {
        let s = gen_fn(3).unwrap();
        let text = structure_to_json(&s);
        assert!(text.ends_with("}\n"));
        let back = structure_from_json(&text).unwrap();
        assert_eq!(back, s);
        assert_eq!(structure_to_json(&back), text);
    }

    #[test]
    fn diagram_roundtrip() {
        let d = diagram_lineq(2, &AbelianGroup::cyclic(2).unwrap(), None).unwrap();
        let text = diagram_to_json(&d);
        let back = diagram_from_json(&text).unwrap();
        assert_eq!(back, d);
        assert_eq!(diagram_to_json(&back), text);
    }

    #[test]
    fn rejects_bad_documents() {
        assert!(structure_from_json("{").is_err());
        let bad = r#"{"domain":["a"],"relations":{"E":[["a","z"]]},"signature":[{"arity":2,"name":"E"}]}"#;
        assert!(structure_from_json(bad).is_err());
        let dup = r#"{"domain":["a","a"],"relations":{},"signature":[]}"#;
        assert!(structure_from_json(dup).is_err());
    }

    #[test]
    fn dot_counts() {
        let dot = to_dot(&gen_fn(3).unwrap(), &["E"]);
        assert_eq!(dot.matches("dir=none").count(), 6);
        assert_eq!(dot.matches("label=\"Edir\"").count(), 2);
        let t2 = to_dot(&build_template(&AbelianGroup::cyclic(2).unwrap()), &[]);
        assert_eq!(t2.matches(" -> ").count(), 12);
        let empty = Structure::empty(Signature::default());
        assert_eq!(to_dot(&empty, &[]), "digraph structure {\n}\n");
    }
}
