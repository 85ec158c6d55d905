//! Finite relational structures over explicit signatures and the
//! structure-building operations used throughout the crate: induced
//! substructures, unions, quotients, free amalgams, blow-ups and pullbacks.
//!
//! A [`Structure`] keeps its domain sorted and stores every tuple as a vector
//! of positions into that domain, so iteration order is canonical and two
//! structures compare equal exactly when they have the same domain and the
//! same relations.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::morphisms::{check_morphism, MorphismKind};

/// A relation symbol with its arity.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Symbol {
    pub name: String,
    pub arity: usize,
}

/// A finite relational signature. Symbols are kept sorted by name, so two
/// signatures are equal iff they contain the same `(name, arity)` pairs.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Signature {
    symbols: Vec<Symbol>,
}

impl Signature {
    pub fn new<I, S>(symbols: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, usize)>,
        S: Into<String>,
    {
        let mut out: Vec<Symbol> = Vec::new();
        for (name, arity) in symbols {
            let name = name.into();
            if arity == 0 {
                return Err(Error::Signature(format!("symbol `{name}` has arity 0")));
            }
            if name.is_empty() {
                return Err(Error::Signature("empty symbol name".into()));
            }
            out.push(Symbol { name, arity });
        }
        out.sort();
        for w in out.windows(2) {
            if w[0].name == w[1].name {
                return Err(Error::Signature(format!("duplicate symbol `{}`", w[0].name)));
            }
        }
        Ok(Signature { symbols: out })
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.symbols
            .binary_search_by(|s| s.name.as_str().cmp(name))
            .ok()
    }

    pub fn arity(&self, name: &str) -> Option<usize> {
        self.position(name).map(|i| self.symbols[i].arity)
    }

    pub fn max_arity(&self) -> usize {
        self.symbols.iter().map(|s| s.arity).max().unwrap_or(0)
    }

    /// Every symbol of `other` occurs here with the same arity.
    pub fn contains(&self, other: &Signature) -> bool {
        other
            .symbols
            .iter()
            .all(|s| self.arity(&s.name) == Some(s.arity))
    }

    pub fn union(&self, other: &Signature) -> Result<Signature> {
        for s in &other.symbols {
            if let Some(a) = self.arity(&s.name) {
                if a != s.arity {
                    return Err(Error::Signature(format!(
                        "symbol `{}` has arities {a} and {}",
                        s.name, s.arity
                    )));
                }
            }
        }
        let mut all: BTreeSet<Symbol> = self.symbols.iter().cloned().collect();
        all.extend(other.symbols.iter().cloned());
        Ok(Signature {
            symbols: all.into_iter().collect(),
        })
    }
}

/// A (partial) map between domains, keyed by element identifiers.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ElementMap(BTreeMap<String, String>);

impl ElementMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn identity(s: &Structure) -> Self {
        s.domain().iter().map(|x| (x.clone(), x.clone())).collect()
    }

    pub fn insert(&mut self, from: impl Into<String>, to: impl Into<String>) -> Option<String> {
        self.0.insert(from.into(), to.into())
    }

    pub fn get(&self, from: &str) -> Option<&str> {
        self.0.get(from).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.0.iter().map(|(a, b)| (a.as_str(), b.as_str()))
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(String::as_str)
    }

    pub fn image(&self) -> BTreeSet<&str> {
        self.0.values().map(String::as_str).collect()
    }

    pub fn is_injective(&self) -> bool {
        self.image().len() == self.0.len()
    }

    /// Total iff the keys are exactly the domain of `source`.
    pub fn is_total_on(&self, source: &Structure) -> bool {
        self.0.len() == source.len() && source.domain().iter().all(|x| self.0.contains_key(x))
    }

    pub fn restrict<'a, I: IntoIterator<Item = &'a str>>(&self, keys: I) -> ElementMap {
        keys.into_iter()
            .filter_map(|k| self.0.get(k).map(|v| (k.to_owned(), v.clone())))
            .collect()
    }

    /// `then ∘ self`: apply `self` first. Keys whose image is not mapped by
    /// `then` are dropped.
    pub fn compose(&self, then: &ElementMap) -> ElementMap {
        self.0
            .iter()
            .filter_map(|(k, v)| then.get(v).map(|w| (k.clone(), w.to_owned())))
            .collect()
    }

    /// `self ⊆ other` as sets of pairs.
    pub fn is_restriction_of(&self, other: &ElementMap) -> bool {
        self.iter().all(|(k, v)| other.get(k) == Some(v))
    }
}

impl<K: Into<String>, V: Into<String>> FromIterator<(K, V)> for ElementMap {
    fn from_iter<T: IntoIterator<Item = (K, V)>>(iter: T) -> Self {
        ElementMap(iter.into_iter().map(|(k, v)| (k.into(), v.into())).collect())
    }
}

impl fmt::Display for ElementMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (k, v)) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{k}->{v}")?;
        }
        write!(f, "}}")
    }
}

/// A finite structure. Immutable once built.
#[derive(Clone)]
pub struct Structure {
    signature: Signature,
    domain: Vec<String>,
    index: FxHashMap<String, u32>,
    relations: Vec<BTreeSet<Vec<u32>>>,
}

impl PartialEq for Structure {
    fn eq(&self, other: &Self) -> bool {
        self.signature == other.signature
            && self.domain == other.domain
            && self.relations == other.relations
    }
}

impl Eq for Structure {}

impl std::hash::Hash for Structure {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.signature.hash(state);
        self.domain.hash(state);
        self.relations.hash(state);
    }
}

impl fmt::Debug for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut m = f.debug_map();
        m.entry(&"domain", &self.domain);
        for (i, sym) in self.signature.symbols().iter().enumerate() {
            let tuples: Vec<Vec<&str>> = self.relations[i]
                .iter()
                .map(|t| t.iter().map(|&e| self.element(e)).collect())
                .collect();
            m.entry(&sym.name, &tuples);
        }
        m.finish()
    }
}

/// Accumulates elements and tuples by identifier, validating on `build`.
#[derive(Clone, Debug)]
pub struct StructureBuilder {
    signature: Signature,
    elements: BTreeSet<String>,
    tuples: Vec<(String, Vec<String>)>,
}

impl StructureBuilder {
    pub fn element(mut self, id: impl Into<String>) -> Self {
        self.add_element(id);
        self
    }

    pub fn add_element(&mut self, id: impl Into<String>) {
        self.elements.insert(id.into());
    }

    pub fn elements<I, S>(mut self, ids: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.elements.extend(ids.into_iter().map(Into::into));
        self
    }

    pub fn tuple<I, S>(mut self, name: &str, ids: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.add_tuple(name, ids);
        self
    }

    pub fn add_tuple<I, S>(&mut self, name: &str, ids: I)
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.tuples
            .push((name.to_owned(), ids.into_iter().map(Into::into).collect()));
    }

    pub fn build(self) -> Result<Structure> {
        let domain: Vec<String> = self.elements.into_iter().collect();
        let index = make_index(&domain);
        let mut relations = vec![BTreeSet::new(); self.signature.len()];
        for (name, ids) in self.tuples {
            let pos = self
                .signature
                .position(&name)
                .ok_or_else(|| Error::InvalidStructure(format!("unknown symbol `{name}`")))?;
            let arity = self.signature.symbols()[pos].arity;
            if ids.len() != arity {
                return Err(Error::InvalidStructure(format!(
                    "tuple of length {} for `{name}` of arity {arity}",
                    ids.len()
                )));
            }
            let mut t = Vec::with_capacity(arity);
            for id in ids {
                match index.get(&id) {
                    Some(&i) => t.push(i),
                    None => return Err(Error::UnknownElement(id)),
                }
            }
            relations[pos].insert(t);
        }
        Ok(Structure {
            signature: self.signature,
            domain,
            index,
            relations,
        })
    }
}

fn make_index(domain: &[String]) -> FxHashMap<String, u32> {
    domain
        .iter()
        .enumerate()
        .map(|(i, x)| (x.clone(), i as u32))
        .collect()
}

impl Structure {
    pub fn builder(signature: Signature) -> StructureBuilder {
        StructureBuilder {
            signature,
            elements: BTreeSet::new(),
            tuples: Vec::new(),
        }
    }

    pub fn empty(signature: Signature) -> Structure {
        let n = signature.len();
        Structure {
            signature,
            domain: Vec::new(),
            index: FxHashMap::default(),
            relations: vec![BTreeSet::new(); n],
        }
    }

    /// Builds from a domain and relations given in terms of string
    /// identifiers; tuples for the same relation are merged.
    fn from_string_tuples(
        signature: Signature,
        domain: BTreeSet<String>,
        tuples: Vec<(usize, Vec<String>)>,
    ) -> Structure {
        let domain: Vec<String> = domain.into_iter().collect();
        let index = make_index(&domain);
        let mut relations = vec![BTreeSet::new(); signature.len()];
        for (pos, ids) in tuples {
            relations[pos].insert(ids.iter().map(|x| index[x]).collect());
        }
        Structure {
            signature,
            domain,
            index,
            relations,
        }
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn domain(&self) -> &[String] {
        &self.domain
    }

    pub fn len(&self) -> usize {
        self.domain.len()
    }

    pub fn is_empty(&self) -> bool {
        self.domain.is_empty()
    }

    pub fn element(&self, i: u32) -> &str {
        &self.domain[i as usize]
    }

    pub fn index_of(&self, id: &str) -> Option<u32> {
        self.index.get(id).copied()
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    /// Tuples of the symbol at position `pos` of the signature, as indices.
    pub fn relation_at(&self, pos: usize) -> &BTreeSet<Vec<u32>> {
        &self.relations[pos]
    }

    pub fn relation(&self, name: &str) -> Option<&BTreeSet<Vec<u32>>> {
        self.signature.position(name).map(|p| &self.relations[p])
    }

    /// Tuples of `name` rendered as identifiers (empty for unknown symbols).
    pub fn tuples(&self, name: &str) -> Vec<Vec<&str>> {
        self.relation(name)
            .map(|r| {
                r.iter()
                    .map(|t| t.iter().map(|&e| self.element(e)).collect())
                    .collect()
            })
            .unwrap_or_default()
    }

    pub fn holds(&self, name: &str, ids: &[&str]) -> bool {
        let Some(rel) = self.relation(name) else {
            return false;
        };
        let mut t = Vec::with_capacity(ids.len());
        for id in ids {
            match self.index_of(id) {
                Some(i) => t.push(i),
                None => return false,
            }
        }
        rel.contains(&t)
    }

    /// Elements carrying the unary predicate `name`.
    pub fn labeled(&self, name: &str) -> Vec<&str> {
        match self.relation(name) {
            Some(r) => r.iter().map(|t| self.element(t[0])).collect(),
            None => Vec::new(),
        }
    }

    pub fn tuple_count(&self) -> usize {
        self.relations.iter().map(BTreeSet::len).sum()
    }

    fn check_ids<'a, I: IntoIterator<Item = &'a str>>(&self, ids: I) -> Result<BTreeSet<u32>> {
        ids.into_iter()
            .map(|x| self.index_of(x).ok_or_else(|| Error::UnknownElement(x.to_owned())))
            .collect()
    }

    /// The substructure induced by `ids`.
    pub fn induced_substructure<'a, I: IntoIterator<Item = &'a str>>(
        &self,
        ids: I,
    ) -> Result<Structure> {
        let keep = self.check_ids(ids)?;
        Ok(self.induced_by_indices(&keep))
    }

    pub(crate) fn induced_by_indices(&self, keep: &BTreeSet<u32>) -> Structure {
        let mut renumber = vec![u32::MAX; self.len()];
        let mut domain = Vec::with_capacity(keep.len());
        for (new, &old) in keep.iter().enumerate() {
            renumber[old as usize] = new as u32;
            domain.push(self.domain[old as usize].clone());
        }
        let relations = self
            .relations
            .iter()
            .map(|rel| {
                rel.iter()
                    .filter(|t| t.iter().all(|&e| renumber[e as usize] != u32::MAX))
                    .map(|t| t.iter().map(|&e| renumber[e as usize]).collect())
                    .collect()
            })
            .collect();
        Structure {
            signature: self.signature.clone(),
            index: make_index(&domain),
            domain,
            relations,
        }
    }

    /// Adds the symbols of `extra` that are missing here, interpreted empty.
    pub fn expand(&self, extra: &Signature) -> Result<Structure> {
        let signature = self.signature.union(extra)?;
        let relations = signature
            .symbols()
            .iter()
            .map(|s| match self.signature.position(&s.name) {
                Some(p) => self.relations[p].clone(),
                None => BTreeSet::new(),
            })
            .collect();
        Ok(Structure {
            signature,
            domain: self.domain.clone(),
            index: self.index.clone(),
            relations,
        })
    }

    /// Forgets every relation not in `keep`.
    pub fn reduct(&self, keep: &Signature) -> Result<Structure> {
        if !self.signature.contains(keep) {
            return Err(Error::SignatureMismatch(
                "reduct signature is not a subsignature".into(),
            ));
        }
        let relations = keep
            .symbols()
            .iter()
            .map(|s| self.relations[self.signature.position(&s.name).unwrap()].clone())
            .collect();
        Ok(Structure {
            signature: keep.clone(),
            domain: self.domain.clone(),
            index: self.index.clone(),
            relations,
        })
    }

    /// Replaces the interpretation of one symbol (which must exist).
    pub fn with_relation(&self, name: &str, tuples: &[Vec<&str>]) -> Result<Structure> {
        let pos = self
            .signature
            .position(name)
            .ok_or_else(|| Error::InvalidStructure(format!("unknown symbol `{name}`")))?;
        let arity = self.signature.symbols()[pos].arity;
        let mut rel = BTreeSet::new();
        for t in tuples {
            if t.len() != arity {
                return Err(Error::InvalidStructure(format!(
                    "tuple of length {} for `{name}` of arity {arity}",
                    t.len()
                )));
            }
            rel.insert(
                t.iter()
                    .map(|x| self.index_of(x).ok_or_else(|| Error::UnknownElement((*x).to_owned())))
                    .collect::<Result<Vec<u32>>>()?,
            );
        }
        let mut out = self.clone();
        out.relations[pos] = rel;
        Ok(out)
    }

    /// Renames elements through an injective map defined on the whole domain.
    pub fn rename(&self, names: &ElementMap) -> Result<Structure> {
        if !names.is_total_on(self) || !names.is_injective() {
            return Err(Error::InvalidParameter(
                "renaming must be total and injective".into(),
            ));
        }
        let domain: BTreeSet<String> = names.image().into_iter().map(str::to_owned).collect();
        let tuples = self.string_tuples(|x| names.get(x).unwrap().to_owned());
        Ok(Structure::from_string_tuples(self.signature.clone(), domain, tuples))
    }

    fn string_tuples(&self, mut name: impl FnMut(&str) -> String) -> Vec<(usize, Vec<String>)> {
        let renamed: Vec<String> = self.domain.iter().map(|x| name(x)).collect();
        let mut out = Vec::new();
        for (pos, rel) in self.relations.iter().enumerate() {
            for t in rel {
                out.push((pos, t.iter().map(|&e| renamed[e as usize].clone()).collect()));
            }
        }
        out
    }

    /// Gaifman-graph connectivity. The empty structure counts as connected.
    pub fn is_connected(&self) -> bool {
        if self.len() <= 1 {
            return true;
        }
        let mut adj: Vec<Vec<u32>> = vec![Vec::new(); self.len()];
        for rel in &self.relations {
            for t in rel {
                for w in t.windows(2) {
                    if w[0] != w[1] {
                        adj[w[0] as usize].push(w[1]);
                        adj[w[1] as usize].push(w[0]);
                    }
                }
            }
        }
        let mut seen = vec![false; self.len()];
        let mut queue = VecDeque::from([0u32]);
        seen[0] = true;
        let mut count = 1;
        while let Some(x) = queue.pop_front() {
            for &y in &adj[x as usize] {
                if !seen[y as usize] {
                    seen[y as usize] = true;
                    count += 1;
                    queue.push_back(y);
                }
            }
        }
        count == self.len()
    }
}

/// `B ∪ C`: overlapping identifiers denote the same element.
pub fn union(b: &Structure, c: &Structure) -> Result<Structure> {
    same_signature(b, c)?;
    let domain: BTreeSet<String> = b.domain.iter().chain(c.domain.iter()).cloned().collect();
    let mut tuples = b.string_tuples(str::to_owned);
    tuples.extend(c.string_tuples(str::to_owned));
    Ok(Structure::from_string_tuples(b.signature.clone(), domain, tuples))
}

pub(crate) fn same_signature(b: &Structure, c: &Structure) -> Result<()> {
    if b.signature != c.signature {
        return Err(Error::SignatureMismatch(
            "structures are over different signatures".into(),
        ));
    }
    Ok(())
}

/// Disjoint union with fresh identifiers `0:x` for `B` and `1:x` for `C`.
pub fn disjoint_union(b: &Structure, c: &Structure) -> Result<(Structure, ElementMap, ElementMap)> {
    same_signature(b, c)?;
    let left: ElementMap = b.domain.iter().map(|x| (x.clone(), format!("0:{x}"))).collect();
    let right: ElementMap = c.domain.iter().map(|x| (x.clone(), format!("1:{x}"))).collect();
    let joined = union(&b.rename(&left)?, &c.rename(&right)?)?;
    Ok((joined, left, right))
}

/// Quotient by a partition of the domain. Each block is represented by its
/// least identifier; a tuple holds in the quotient iff some preimage holds.
pub fn quotient(s: &Structure, partition: &[Vec<String>]) -> Result<(Structure, ElementMap)> {
    let mut projection = ElementMap::new();
    for block in partition {
        let rep = block
            .iter()
            .min()
            .ok_or_else(|| Error::InvalidPartition("empty block".into()))?;
        for x in block {
            if !s.contains(x) {
                return Err(Error::UnknownElement(x.clone()));
            }
            if projection.insert(x.clone(), rep.clone()).is_some() {
                return Err(Error::InvalidPartition(format!("`{x}` occurs in two blocks")));
            }
        }
    }
    if projection.len() != s.len() {
        return Err(Error::InvalidPartition("blocks do not cover the domain".into()));
    }
    let domain: BTreeSet<String> = projection.image().into_iter().map(str::to_owned).collect();
    let tuples = s.string_tuples(|x| projection.get(x).unwrap().to_owned());
    Ok((
        Structure::from_string_tuples(s.signature.clone(), domain, tuples),
        projection,
    ))
}

/// The free amalgam together with its two injections.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AmalgamResult {
    pub amalgam: Structure,
    pub left_injection: ElementMap,
    pub right_injection: ElementMap,
}

/// Free amalgam of `left` and `right` glued along `base` through the
/// embeddings `f: base → left` and `g: base → right`.
///
/// Elements of `left` keep their identifiers. An element of `right` outside
/// `g(base)` keeps its identifier unless that clashes, in which case primes
/// are appended until it is fresh.
pub fn free_amalgam(
    base: &Structure,
    left: &Structure,
    f: &ElementMap,
    right: &Structure,
    g: &ElementMap,
) -> Result<AmalgamResult> {
    same_signature(base, left)?;
    same_signature(base, right)?;
    if !check_morphism(f, base, left, MorphismKind::Embedding)? {
        return Err(Error::NotAMorphism {
            kind: "an embedding".into(),
            detail: "left leg of the amalgam".into(),
        });
    }
    if !check_morphism(g, base, right, MorphismKind::Embedding)? {
        return Err(Error::NotAMorphism {
            kind: "an embedding".into(),
            detail: "right leg of the amalgam".into(),
        });
    }
    let left_injection = ElementMap::identity(left);
    let mut taken: BTreeSet<String> = left.domain.iter().cloned().collect();
    let mut right_injection = ElementMap::new();
    let mut glued: FxHashMap<&str, &str> = FxHashMap::default();
    for (a, ga) in g.iter() {
        glued.insert(ga, f.get(a).unwrap());
    }
    for x in &right.domain {
        let target = match glued.get(x.as_str()) {
            Some(y) => (*y).to_owned(),
            None => {
                let mut candidate = x.clone();
                while taken.contains(&candidate) {
                    candidate.push('\'');
                }
                taken.insert(candidate.clone());
                candidate
            }
        };
        right_injection.insert(x.clone(), target);
    }
    let domain = taken;
    let mut tuples = left.string_tuples(str::to_owned);
    tuples.extend(right.string_tuples(|x| right_injection.get(x).unwrap().to_owned()));
    Ok(AmalgamResult {
        amalgam: Structure::from_string_tuples(left.signature.clone(), domain, tuples),
        left_injection,
        right_injection,
    })
}

/// Identifier of the blow-up element `(a, i)`.
pub fn blowup_id(a: &str, i: usize) -> String {
    format!("({a},{i})")
}

/// `A⊗m`: domain `A × [m]` (indices `1..=m`), a tuple holds iff its
/// projection to `A` holds.
pub fn blowup(a: &Structure, m: usize) -> Result<Structure> {
    if m < 1 {
        return Err(Error::InvalidParameter("blow-up multiplicity must be ≥ 1".into()));
    }
    let domain: BTreeSet<String> = a
        .domain
        .iter()
        .flat_map(|x| (1..=m).map(move |i| blowup_id(x, i)))
        .collect();
    let mut tuples = Vec::new();
    for (pos, rel) in a.relations.iter().enumerate() {
        for t in rel {
            let combos = m.pow(t.len() as u32);
            for mut code in 0..combos {
                let mut ids = Vec::with_capacity(t.len());
                for &e in t.iter().rev() {
                    ids.push(blowup_id(a.element(e), code % m + 1));
                    code /= m;
                }
                ids.reverse();
                tuples.push((pos, ids));
            }
        }
    }
    Ok(Structure::from_string_tuples(a.signature.clone(), domain, tuples))
}

/// `f*(B⁺)`: the structure on the keys of `f` whose relations are the
/// preimages of the relations of `target`.
pub fn pullback(f: &ElementMap, target: &Structure) -> Result<Structure> {
    let mut image = Vec::with_capacity(f.len());
    for (_, y) in f.iter() {
        image.push(
            target
                .index_of(y)
                .ok_or_else(|| Error::UnknownElement(y.to_owned()))?,
        );
    }
    let source: Vec<String> = f.keys().map(str::to_owned).collect();
    let n = source.len();
    let mut relations = Vec::with_capacity(target.signature.len());
    for (pos, sym) in target.signature.symbols().iter().enumerate() {
        let rel = &target.relations[pos];
        let mut out = BTreeSet::new();
        if n > 0 && !rel.is_empty() {
            let mut idx = vec![0u32; sym.arity];
            let mut img = vec![0u32; sym.arity];
            'outer: loop {
                for (slot, &i) in img.iter_mut().zip(&idx) {
                    *slot = image[i as usize];
                }
                if rel.contains(&img) {
                    out.insert(idx.clone());
                }
                let mut j = sym.arity;
                loop {
                    if j == 0 {
                        break 'outer;
                    }
                    j -= 1;
                    if (idx[j] as usize) + 1 < n {
                        idx[j] += 1;
                        break;
                    }
                    idx[j] = 0;
                }
            }
        }
        relations.push(out);
    }
    Ok(Structure {
        signature: target.signature.clone(),
        index: make_index(&source),
        domain: source,
        relations,
    })
}
