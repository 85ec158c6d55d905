//! Homomorphism, embedding and isomorphism checks and searches.
//!
//! The search is a plain backtracking procedure: variables are the source
//! elements in identifier order, values are target elements in identifier
//! order, and the only pruning is forward checking of unary constraints and
//! of tuples that have a single unassigned component left.

use std::collections::{BTreeSet, VecDeque};
use std::ops::ControlFlow;

use rustc_hash::FxHashSet;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::structure::{blowup, blowup_id, same_signature, ElementMap, Structure};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MorphismKind {
    Homomorphism,
    Monomorphism,
    Embedding,
    StrongHomomorphism,
    Isomorphism,
}

impl std::str::FromStr for MorphismKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "hom" | "homomorphism" => MorphismKind::Homomorphism,
            "mono" | "monomorphism" => MorphismKind::Monomorphism,
            "emb" | "embedding" => MorphismKind::Embedding,
            "strong" | "strong-homomorphism" => MorphismKind::StrongHomomorphism,
            "iso" | "isomorphism" => MorphismKind::Isomorphism,
            other => return Err(Error::InvalidParameter(format!("unknown morphism kind `{other}`"))),
        })
    }
}

/// Membership structure for the tuples of one relation.
#[derive(Clone, Debug)]
enum TupleSet {
    Packed { set: FxHashSet<u64>, base: u64 },
    Plain(FxHashSet<Vec<u32>>),
}

impl TupleSet {
    fn new(s: &Structure, pos: usize) -> Self {
        let arity = s.signature().symbols()[pos].arity as u32;
        let base = s.len().max(1) as u128;
        if base.checked_pow(arity).is_some_and(|v| v <= u64::MAX as u128) {
            let base = base as u64;
            let set = s
                .relation_at(pos)
                .iter()
                .map(|t| pack(t, base))
                .collect();
            TupleSet::Packed { set, base }
        } else {
            TupleSet::Plain(s.relation_at(pos).iter().cloned().collect())
        }
    }

    #[inline]
    fn contains(&self, t: &[u32]) -> bool {
        match self {
            TupleSet::Packed { set, base } => set.contains(&pack(t, *base)),
            TupleSet::Plain(set) => set.contains(t),
        }
    }
}

#[inline]
fn pack(t: &[u32], base: u64) -> u64 {
    t.iter().fold(0u64, |acc, &e| acc * base + e as u64)
}

/// A target structure indexed for repeated searches into it.
#[derive(Clone, Debug)]
pub struct PreparedTarget<'a> {
    target: &'a Structure,
    rels: Vec<TupleSet>,
    /// For each element, the tuples (symbol position, tuple) it occurs in.
    incident: Vec<Vec<(usize, Vec<u32>)>>,
    /// Per symbol, the tuples flattened.
    tuples: Vec<Vec<u32>>,
}

impl<'a> PreparedTarget<'a> {
    pub fn new(target: &'a Structure) -> Self {
        let rels = (0..target.signature().len())
            .map(|p| TupleSet::new(target, p))
            .collect();
        let mut incident: Vec<Vec<(usize, Vec<u32>)>> = vec![Vec::new(); target.len()];
        for p in 0..target.signature().len() {
            for t in target.relation_at(p) {
                let mut seen: Vec<u32> = t.clone();
                seen.sort_unstable();
                seen.dedup();
                for e in seen {
                    incident[e as usize].push((p, t.clone()));
                }
            }
        }
        let tuples = (0..target.signature().len())
            .map(|p| target.relation_at(p).iter().flatten().copied().collect())
            .collect();
        PreparedTarget {
            target,
            rels,
            incident,
            tuples,
        }
    }

    pub fn structure(&self) -> &'a Structure {
        self.target
    }
}

#[derive(Clone, Copy, Debug, Default)]
struct SearchMode {
    injective: bool,
    strong: bool,
}

const UNSET: u32 = u32::MAX;

struct Search<'s, 't> {
    target: &'s PreparedTarget<'t>,
    source_rels: Vec<TupleSet>,
    /// Per source element: tuples it occurs in.
    incident: Vec<Vec<(usize, Vec<u32>)>>,
    domains: Vec<Vec<u32>>,
    assignment: Vec<u32>,
    inverse: Vec<u32>,
    trail: Vec<(usize, Vec<u32>)>,
    mode: SearchMode,
    scratch: Vec<u32>,
}

impl<'s, 't> Search<'s, 't> {
    fn new(source: &Structure, target: &'s PreparedTarget<'t>, mode: SearchMode) -> Option<Self> {
        let n = source.len();
        let tn = target.target.len();
        if mode.injective && n > tn {
            return None;
        }
        let mut incident: Vec<Vec<(usize, Vec<u32>)>> = vec![Vec::new(); n];
        let mut domains: Vec<Vec<u32>> = vec![(0..tn as u32).collect(); n];
        for p in 0..source.signature().len() {
            for t in source.relation_at(p) {
                let mut vars = t.clone();
                vars.sort_unstable();
                vars.dedup();
                if vars.len() == 1 {
                    // constraint on a single variable: filter statically
                    let x = vars[0] as usize;
                    let rel = &target.rels[p];
                    let mut probe = vec![0u32; t.len()];
                    domains[x].retain(|&c| {
                        probe.iter_mut().for_each(|e| *e = c);
                        rel.contains(&probe)
                    });
                } else {
                    for v in vars {
                        incident[v as usize].push((p, t.clone()));
                    }
                }
            }
        }
        if domains.iter().any(Vec::is_empty) || !root_arc_consistency(source, target, &mut domains) {
            return None;
        }
        let source_rels = if mode.strong {
            (0..source.signature().len())
                .map(|p| TupleSet::new(source, p))
                .collect()
        } else {
            Vec::new()
        };
        Some(Search {
            target,
            source_rels,
            incident,
            domains,
            assignment: vec![UNSET; n],
            inverse: vec![UNSET; tn],
            trail: Vec::new(),
            mode,
            scratch: Vec::new(),
        })
    }

    fn run<F: FnMut(&[u32]) -> ControlFlow<()>>(&mut self, depth: usize, emit: &mut F) -> ControlFlow<()> {
        if depth == self.assignment.len() {
            return emit(&self.assignment);
        }
        let x = depth;
        let candidates = self.domains[x].clone();
        for v in candidates {
            if self.mode.injective && self.inverse[v as usize] != UNSET {
                continue;
            }
            self.assignment[x] = v;
            if self.mode.injective {
                self.inverse[v as usize] = x as u32;
            }
            let mut flow = ControlFlow::Continue(());
            if !self.mode.strong || self.strong_ok(v) {
                let mark = self.trail.len();
                if self.forward_check(x) {
                    flow = self.run(depth + 1, emit);
                }
                self.undo(mark);
            }
            self.assignment[x] = UNSET;
            if self.mode.injective {
                self.inverse[v as usize] = UNSET;
            }
            flow?;
        }
        ControlFlow::Continue(())
    }

    fn undo(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let (y, dom) = self.trail.pop().unwrap();
            self.domains[y] = dom;
        }
    }

    /// Filters the domain of every variable that is the last unassigned
    /// component of a tuple through `x`.
    fn forward_check(&mut self, x: usize) -> bool {
        for i in 0..self.incident[x].len() {
            let (p, ref t) = self.incident[x][i];
            let mut pending = UNSET;
            let mut several = false;
            for &e in t {
                if self.assignment[e as usize] == UNSET {
                    if pending == UNSET {
                        pending = e;
                    } else if pending != e {
                        several = true;
                        break;
                    }
                }
            }
            if several || pending == UNSET {
                continue;
            }
            let y = pending as usize;
            let rel = &self.target.rels[p];
            let t = t.clone();
            let mut probe = std::mem::take(&mut self.scratch);
            probe.clear();
            probe.extend(t.iter().map(|&e| self.assignment[e as usize]));
            let old = &self.domains[y];
            let filtered: Vec<u32> = old
                .iter()
                .copied()
                .filter(|&c| {
                    for (slot, &e) in probe.iter_mut().zip(&t) {
                        if e as usize == y {
                            *slot = c;
                        }
                    }
                    rel.contains(&probe)
                })
                .collect();
            self.scratch = probe;
            if filtered.len() != old.len() {
                let empty = filtered.is_empty();
                let old = std::mem::replace(&mut self.domains[y], filtered);
                self.trail.push((y, old));
                if empty {
                    return false;
                }
            }
        }
        true
    }

    /// Injective strong check: every target tuple through `v` whose
    /// components all have preimages must have its preimage in the source.
    fn strong_ok(&mut self, v: u32) -> bool {
        for (p, t) in &self.target.incident[v as usize] {
            let mut pre = Vec::with_capacity(t.len());
            for &c in t {
                let x = self.inverse[c as usize];
                if x == UNSET {
                    break;
                }
                pre.push(x);
            }
            if pre.len() == t.len() && !self.source_rels[*p].contains(&pre) {
                return false;
            }
        }
        true
    }
}

/// Generalized arc consistency over the tuples with two or more distinct
/// variables, run once before the search. Only values without support in
/// any target tuple are removed, so the set and order of solutions is
/// unchanged.
fn root_arc_consistency(source: &Structure, target: &PreparedTarget<'_>, domains: &mut [Vec<u32>]) -> bool {
    struct Constraint<'a> {
        pos: usize,
        tuple: &'a [u32],
        /// first position holding the same variable
        first: Vec<usize>,
        vars: Vec<usize>,
    }
    let tn = target.target.len();
    let n = domains.len();
    let mut member = vec![false; n * tn];
    for (x, dom) in domains.iter().enumerate() {
        for &v in dom {
            member[x * tn + v as usize] = true;
        }
    }
    let mut constraints = Vec::new();
    let mut watching: Vec<Vec<usize>> = vec![Vec::new(); n];
    for p in 0..source.signature().len() {
        for t in source.relation_at(p) {
            let first: Vec<usize> = t.iter().map(|e| t.iter().position(|f| f == e).unwrap()).collect();
            let mut vars: Vec<usize> = t.iter().map(|&e| e as usize).collect();
            vars.sort_unstable();
            vars.dedup();
            if vars.len() < 2 {
                continue;
            }
            for &x in &vars {
                watching[x].push(constraints.len());
            }
            constraints.push(Constraint { pos: p, tuple: t, first, vars });
        }
    }
    let mut queue: VecDeque<usize> = (0..constraints.len()).collect();
    let mut queued = vec![true; constraints.len()];
    let mut supported = vec![false; n * tn];
    while let Some(ci) = queue.pop_front() {
        queued[ci] = false;
        let c = &constraints[ci];
        for &x in &c.vars {
            supported[x * tn..(x + 1) * tn].fill(false);
        }
        let arity = c.tuple.len();
        'tuples: for tt in target.tuples[c.pos].chunks_exact(arity) {
            for i in 0..arity {
                if tt[i] != tt[c.first[i]] || !member[c.tuple[i] as usize * tn + tt[i] as usize] {
                    continue 'tuples;
                }
            }
            for i in 0..arity {
                supported[c.tuple[i] as usize * tn + tt[i] as usize] = true;
            }
        }
        for &x in &c.vars {
            let before = domains[x].len();
            domains[x].retain(|&v| supported[x * tn + v as usize]);
            if domains[x].len() == before {
                continue;
            }
            if domains[x].is_empty() {
                return false;
            }
            member[x * tn..(x + 1) * tn].copy_from_slice(&supported[x * tn..(x + 1) * tn]);
            for &cj in &watching[x] {
                if cj != ci && !queued[cj] {
                    queued[cj] = true;
                    queue.push_back(cj);
                }
            }
        }
    }
    true
}

fn to_map(source: &Structure, target: &Structure, assignment: &[u32]) -> ElementMap {
    assignment
        .iter()
        .enumerate()
        .map(|(x, &v)| (source.element(x as u32), target.element(v)))
        .collect()
}

fn search_with<F>(source: &Structure, target: &PreparedTarget<'_>, mode: SearchMode, mut emit: F)
where
    F: FnMut(&[u32]) -> ControlFlow<()>,
{
    if let Some(mut search) = Search::new(source, target, mode) {
        let _ = search.run(0, &mut emit);
    }
}

fn index_map(f: &ElementMap, a: &Structure, b: &Structure) -> Result<Vec<Option<u32>>> {
    let mut out = vec![None; a.len()];
    for (x, y) in f.iter() {
        let i = a
            .index_of(x)
            .ok_or_else(|| Error::UnknownElement(x.to_owned()))?;
        let j = b
            .index_of(y)
            .ok_or_else(|| Error::UnknownElement(y.to_owned()))?;
        out[i as usize] = Some(j);
    }
    Ok(out)
}

fn preserves_tuples(map: &[Option<u32>], a: &Structure, b: &Structure) -> bool {
    for p in 0..a.signature().len() {
        let target = b.relation_at(p);
        for t in a.relation_at(p) {
            let img: Option<Vec<u32>> = t.iter().map(|&e| map[e as usize]).collect();
            if let Some(img) = img {
                if !target.contains(&img) {
                    return false;
                }
            }
        }
    }
    true
}

fn reflects_tuples(map: &[u32], a: &Structure, b: &Structure) -> bool {
    let mut preimages: Vec<Vec<u32>> = vec![Vec::new(); b.len()];
    for (x, &y) in map.iter().enumerate() {
        preimages[y as usize].push(x as u32);
    }
    for p in 0..a.signature().len() {
        let source = a.relation_at(p);
        for t in b.relation_at(p) {
            if t.iter().any(|&c| preimages[c as usize].is_empty()) {
                continue;
            }
            // every combination of preimages must be a source tuple
            let mut idx = vec![0usize; t.len()];
            loop {
                let pre: Vec<u32> = t
                    .iter()
                    .zip(&idx)
                    .map(|(&c, &i)| preimages[c as usize][i])
                    .collect();
                if !source.contains(&pre) {
                    return false;
                }
                let mut j = t.len();
                let mut done = true;
                while j > 0 {
                    j -= 1;
                    if idx[j] + 1 < preimages[t[j] as usize].len() {
                        idx[j] += 1;
                        done = false;
                        break;
                    }
                    idx[j] = 0;
                }
                if done {
                    break;
                }
            }
        }
    }
    true
}

/// Checks a total map against the definition of `kind`.
pub fn check_morphism(f: &ElementMap, a: &Structure, b: &Structure, kind: MorphismKind) -> Result<bool> {
    same_signature(a, b)?;
    if !f.is_total_on(a) {
        return Err(Error::InvalidParameter(
            "map is not total on the source domain".into(),
        ));
    }
    let map = index_map(f, a, b)?;
    let map: Vec<u32> = map.into_iter().map(Option::unwrap).collect();
    let partial: Vec<Option<u32>> = map.iter().copied().map(Some).collect();
    if !preserves_tuples(&partial, a, b) {
        return Ok(false);
    }
    let injective = || {
        let set: BTreeSet<u32> = map.iter().copied().collect();
        set.len() == map.len()
    };
    Ok(match kind {
        MorphismKind::Homomorphism => true,
        MorphismKind::Monomorphism => injective(),
        MorphismKind::StrongHomomorphism => reflects_tuples(&map, a, b),
        MorphismKind::Embedding => injective() && reflects_tuples(&map, a, b),
        MorphismKind::Isomorphism => {
            injective() && map.len() == b.len() && reflects_tuples(&map, a, b)
        }
    })
}

/// `f` is a homomorphism from `A[dom f]` to `B`.
pub fn check_partial_homomorphism(f: &ElementMap, a: &Structure, b: &Structure) -> Result<bool> {
    same_signature(a, b)?;
    let map = index_map(f, a, b)?;
    Ok(preserves_tuples(&map, a, b))
}

pub fn find_homomorphism(a: &Structure, b: &Structure) -> Result<Option<ElementMap>> {
    same_signature(a, b)?;
    Ok(find_homomorphism_into(a, &PreparedTarget::new(b)))
}

/// As [`find_homomorphism`], reusing an indexed target. Signatures must agree.
pub fn find_homomorphism_into(a: &Structure, b: &PreparedTarget<'_>) -> Option<ElementMap> {
    let mut found = None;
    search_with(a, b, SearchMode::default(), |asg| {
        found = Some(to_map(a, b.target, asg));
        ControlFlow::Break(())
    });
    found
}

pub fn has_homomorphism_into(a: &Structure, b: &PreparedTarget<'_>) -> bool {
    let mut found = false;
    search_with(a, b, SearchMode::default(), |_| {
        found = true;
        ControlFlow::Break(())
    });
    found
}

pub fn enumerate_homomorphisms(a: &Structure, b: &Structure, limit: Option<usize>) -> Result<Vec<ElementMap>> {
    same_signature(a, b)?;
    Ok(collect(a, b, SearchMode::default(), limit))
}

/// Counts homomorphisms without materializing them.
pub fn count_homomorphisms(a: &Structure, b: &Structure) -> Result<u64> {
    same_signature(a, b)?;
    let prepared = PreparedTarget::new(b);
    let mut count = 0u64;
    search_with(a, &prepared, SearchMode::default(), |_| {
        count += 1;
        ControlFlow::Continue(())
    });
    Ok(count)
}

fn collect(a: &Structure, b: &Structure, mode: SearchMode, limit: Option<usize>) -> Vec<ElementMap> {
    let prepared = PreparedTarget::new(b);
    let mut out = Vec::new();
    if limit == Some(0) {
        return out;
    }
    search_with(a, &prepared, mode, |asg| {
        out.push(to_map(a, b, asg));
        if limit.is_some_and(|l| out.len() >= l) {
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    });
    out
}

/// Monomorphisms, i.e. injective homomorphisms.
pub fn enumerate_monomorphisms(a: &Structure, b: &Structure, limit: Option<usize>) -> Result<Vec<ElementMap>> {
    same_signature(a, b)?;
    Ok(collect(
        a,
        b,
        SearchMode {
            injective: true,
            strong: false,
        },
        limit,
    ))
}

/// A set of embeddings of `base` into `target`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EmbeddingSet {
    pub base: Structure,
    pub target: Structure,
    pub members: Vec<ElementMap>,
}

impl EmbeddingSet {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

pub fn enumerate_embeddings(a: &Structure, b: &Structure) -> Result<EmbeddingSet> {
    same_signature(a, b)?;
    let members = collect(
        a,
        b,
        SearchMode {
            injective: true,
            strong: true,
        },
        None,
    );
    Ok(EmbeddingSet {
        base: a.clone(),
        target: b.clone(),
        members,
    })
}

/// The first embedding of `a` into `b` in search order, if any.
pub fn find_embedding(a: &Structure, b: &Structure) -> Result<Option<ElementMap>> {
    same_signature(a, b)?;
    let mode = SearchMode {
        injective: true,
        strong: true,
    };
    Ok(collect(a, b, mode, Some(1)).pop())
}

/// The embeddings `π_f(a) = (a, f(a))` of `A` into `A⊗m`, one per
/// `f: A → [m]`, listed with the first domain element varying slowest.
pub fn canonical_embeddings(a: &Structure, m: usize) -> Result<EmbeddingSet> {
    let target = blowup(a, m)?;
    let n = a.len();
    let total = m
        .checked_pow(n as u32)
        .ok_or_else(|| Error::Budget(format!("{m}^{n} canonical embeddings")))?;
    let mut members = Vec::with_capacity(total);
    for mut code in 0..total {
        let mut values = vec![0usize; n];
        for slot in values.iter_mut().rev() {
            *slot = code % m + 1;
            code /= m;
        }
        members.push(
            a.domain()
                .iter()
                .zip(&values)
                .map(|(x, &i)| (x.clone(), blowup_id(x, i)))
                .collect(),
        );
    }
    Ok(EmbeddingSet {
        base: a.clone(),
        target,
        members,
    })
}

/// The distinct restrictions of members of `e` to `r`-element subsets of
/// the base domain.
pub fn restriction_set(e: &EmbeddingSet, r: usize) -> Result<BTreeSet<ElementMap>> {
    let n = e.base.len();
    if r < 1 || r > n {
        return Err(Error::InvalidParameter(format!(
            "restriction size {r} outside 1..={n}"
        )));
    }
    let subsets = combinations(n, r);
    let mut out = BTreeSet::new();
    for pi in &e.members {
        for s in &subsets {
            out.insert(pi.restrict(s.iter().map(|&i| e.base.element(i as u32))));
        }
    }
    Ok(out)
}

/// All `r`-subsets of `0..n` in lexicographic order.
pub(crate) fn combinations(n: usize, r: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if r > n {
        return out;
    }
    let mut c: Vec<usize> = (0..r).collect();
    loop {
        out.push(c.clone());
        let mut i = r;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if c[i] < n - r + i {
                c[i] += 1;
                for j in i + 1..r {
                    c[j] = c[j - 1] + 1;
                }
                break;
            }
        }
    }
}

pub fn is_isomorphic(a: &Structure, b: &Structure) -> Result<bool> {
    same_signature(a, b)?;
    if a.len() != b.len() {
        return Ok(false);
    }
    for p in 0..a.signature().len() {
        if a.relation_at(p).len() != b.relation_at(p).len() {
            return Ok(false);
        }
    }
    Ok(find_embedding(a, b)?.is_some())
}

/// An isomorphism from `a` onto `b`, if any.
pub fn find_isomorphism(a: &Structure, b: &Structure) -> Result<Option<ElementMap>> {
    if !is_isomorphic(a, b)? {
        return Ok(None);
    }
    find_embedding(a, b)
}

/// Morphisms of the given kind from `a` to `b`, in search order.
pub fn enumerate_morphisms(
    a: &Structure,
    b: &Structure,
    kind: MorphismKind,
    limit: Option<usize>,
) -> Result<Vec<ElementMap>> {
    same_signature(a, b)?;
    match kind {
        MorphismKind::Homomorphism => enumerate_homomorphisms(a, b, limit),
        MorphismKind::Monomorphism => enumerate_monomorphisms(a, b, limit),
        MorphismKind::Embedding => {
            let mut all = enumerate_embeddings(a, b)?.members;
            if let Some(l) = limit {
                all.truncate(l);
            }
            Ok(all)
        }
        MorphismKind::Isomorphism => {
            if !is_isomorphic(a, b)? {
                return Ok(Vec::new());
            }
            let mut all = enumerate_embeddings(a, b)?.members;
            if let Some(l) = limit {
                all.truncate(l);
            }
            Ok(all)
        }
        MorphismKind::StrongHomomorphism => {
            let mut out = Vec::new();
            for f in enumerate_homomorphisms(a, b, None)? {
                if check_morphism(&f, a, b, MorphismKind::StrongHomomorphism)? {
                    out.push(f);
                    if limit.is_some_and(|l| out.len() >= l) {
                        break;
                    }
                }
            }
            Ok(out)
        }
    }
}
