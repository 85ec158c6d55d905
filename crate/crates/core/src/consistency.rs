//! (k,l)-consistency as a greatest fixpoint over partial homomorphisms, and
//! the existential pebble game view of it.
//!
//! The table holds, for every subset `X` of the instance with `|X| ≤ l`, a
//! bitset over all assignments `X → B`. An assignment of the sorted subset
//! `x_0 < … < x_{s-1}` is encoded as `Σ b_i · |B|^i`. Subsets are ranked in
//! colex order by the combinatorial number system.
//!
//! Propagation deletes entries until two rules hold: an entry survives only
//! if all its restrictions do, and an entry on at most `k` elements survives
//! only if every superset of the maximal size `min(l, |A|)` carries an
//! extension of it. With closure under restriction in place, extensions to
//! the maximal size give extensions to every intermediate size, so this is
//! exactly the family of all (k,l)-consistent conditions.

use std::collections::{BTreeSet, VecDeque};

use rustc_hash::{FxHashMap, FxHashSet};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::morphisms::check_partial_homomorphism;
use crate::structure::{same_signature, ElementMap, Structure};

/// Default cap on table entries plus support counters.
pub const DEFAULT_BUDGET: usize = 200_000_000;

#[derive(Clone, Copy, Debug)]
pub struct ConsistencyOptions {
    pub budget: usize,
}

impl Default for ConsistencyOptions {
    fn default() -> Self {
        ConsistencyOptions {
            budget: DEFAULT_BUDGET,
        }
    }
}

fn check_params(a: &Structure, b: &Structure, k: usize, l: usize) -> Result<()> {
    same_signature(a, b)?;
    if k < 1 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    if l < k {
        return Err(Error::InvalidParameter(format!("l = {l} is smaller than k = {k}")));
    }
    Ok(())
}

/// Subset ranking and assignment arithmetic shared by the table and the
/// propagation.
#[derive(Clone, Debug)]
struct Layout {
    n: usize,
    d: usize,
    top: usize,
    binom: Vec<Vec<usize>>,
    pow: Vec<usize>,
    /// Per level: words per subset.
    words: Vec<usize>,
}

impl Layout {
    fn new(n: usize, d: usize, l: usize, budget: usize) -> Result<Self> {
        let top = l.min(n);
        let mut binom = vec![vec![0usize; top + 2]; n + 1];
        for i in 0..=n {
            binom[i][0] = 1;
            for j in 1..=top + 1 {
                if i > 0 {
                    binom[i][j] = binom[i - 1][j - 1].saturating_add(binom[i - 1][j]);
                }
            }
        }
        let mut pow = vec![1usize; top + 2];
        for i in 1..pow.len() {
            pow[i] = pow[i - 1]
                .checked_mul(d)
                .ok_or_else(|| Error::Budget(format!("{d}^{i} assignments per subset")))?;
        }
        let words = (0..=top).map(|s| pow[s].div_ceil(64).max(1)).collect();
        let layout = Layout {
            n,
            d,
            top,
            binom,
            pow,
            words,
        };
        let mut entries = 0usize;
        for s in 0..=top {
            entries = entries.saturating_add(layout.subsets(s).saturating_mul(layout.pow[s]));
        }
        if entries > budget {
            return Err(Error::Budget(format!(
                "{entries} table entries exceed the budget of {budget}"
            )));
        }
        Ok(layout)
    }

    fn subsets(&self, s: usize) -> usize {
        self.choose(self.n, s)
    }

    fn choose(&self, a: usize, b: usize) -> usize {
        if b > a {
            0
        } else {
            self.binom[a][b]
        }
    }

    fn rank(&self, set: &[u32]) -> usize {
        set.iter()
            .enumerate()
            .map(|(i, &c)| self.choose(c as usize, i + 1))
            .sum()
    }

    fn unrank(&self, s: usize, mut rank: usize) -> Vec<u32> {
        let mut out = vec![0u32; s];
        let mut hi = self.n;
        for i in (1..=s).rev() {
            // largest c < hi with C(c, i) ≤ rank
            let mut c = i - 1;
            while c + 1 < hi && self.choose(c + 1, i) <= rank {
                c += 1;
            }
            out[i - 1] = c as u32;
            rank -= self.choose(c, i);
            hi = c;
        }
        out
    }

    fn digit(&self, code: usize, i: usize) -> usize {
        (code / self.pow[i]) % self.d
    }

    /// Restricts an assignment of a `size`-subset to the positions in `mask`.
    fn restrict(&self, code: usize, size: usize, mask: u32) -> usize {
        let mut out = 0;
        let mut j = 0;
        for i in 0..size {
            if mask >> i & 1 == 1 {
                out += self.digit(code, i) * self.pow[j];
                j += 1;
            }
        }
        out
    }

    /// Inserts value `c` at position `p` of an assignment.
    fn insert(&self, code: usize, p: usize, c: usize) -> usize {
        let low = code % self.pow[p];
        let high = code / self.pow[p];
        low + c * self.pow[p] + high * self.pow[p + 1]
    }
}

/// Dense bitset table, one block per subset per level.
#[derive(Clone, Debug)]
struct Table {
    levels: Vec<Vec<u64>>,
}

impl Table {
    fn new(layout: &Layout) -> Self {
        let levels = (0..=layout.top)
            .map(|s| vec![0u64; layout.subsets(s) * layout.words[s]])
            .collect();
        Table { levels }
    }

    #[inline]
    fn get(&self, layout: &Layout, s: usize, rank: usize, code: usize) -> bool {
        let w = rank * layout.words[s] + code / 64;
        self.levels[s][w] >> (code % 64) & 1 == 1
    }

    #[inline]
    fn set(&mut self, layout: &Layout, s: usize, rank: usize, code: usize, on: bool) {
        let w = rank * layout.words[s] + code / 64;
        if on {
            self.levels[s][w] |= 1 << (code % 64);
        } else {
            self.levels[s][w] &= !(1 << (code % 64));
        }
    }

    fn count(&self) -> usize {
        self.levels
            .iter()
            .flat_map(|l| l.iter())
            .map(|w| w.count_ones() as usize)
            .sum()
    }
}

/// Why an entry was removed.
#[derive(Clone, Copy, Debug)]
enum Reason {
    /// Its restriction to the given smaller subset was already removed.
    Restriction { level: usize, rank: usize, code: usize },
    /// No surviving extension on the given maximal subset.
    NoExtension { rank: usize },
}

#[derive(Clone, Copy, Debug)]
struct Deletion {
    seq: usize,
    reason: Reason,
}

type Key = (usize, usize, usize);

/// Iterates `s`-subsets of `0..n` in lexicographic order.
fn for_each_subset(n: usize, s: usize, mut f: impl FnMut(&[u32])) {
    if s > n {
        return;
    }
    let mut c: Vec<u32> = (0..s as u32).collect();
    loop {
        f(&c);
        let mut i = s;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if (c[i] as usize) < n - s + i {
                c[i] += 1;
                for j in i + 1..s {
                    c[j] = c[j - 1] + 1;
                }
                break;
            }
        }
    }
}

struct Fixpoint {
    layout: Layout,
    table: Table,
    deleted: FxHashMap<Key, Deletion>,
}

impl Fixpoint {
    fn consistent(&self) -> bool {
        self.table.get(&self.layout, 0, 0, 0)
    }
}

fn propagate(a: &Structure, b: &Structure, k: usize, l: usize, opts: &ConsistencyOptions) -> Result<Fixpoint> {
    check_params(a, b, k, l)?;
    let n = a.len();
    let d = b.len();
    let layout = Layout::new(n, d, l, opts.budget)?;
    let top = layout.top;

    // tuples of A grouped by their exact element set, if small enough
    let mut by_support: FxHashMap<Vec<u32>, Vec<(usize, Vec<u32>)>> = FxHashMap::default();
    for p in 0..a.signature().len() {
        for t in a.relation_at(p) {
            let set: BTreeSet<u32> = t.iter().copied().collect();
            if set.len() <= top {
                by_support
                    .entry(set.into_iter().collect())
                    .or_default()
                    .push((p, t.clone()));
            }
        }
    }
    let target_rels: Vec<FxHashSet<Vec<u32>>> = (0..b.signature().len())
        .map(|p| b.relation_at(p).iter().cloned().collect())
        .collect();

    // initial table: all partial homomorphisms
    let mut table = Table::new(&layout);
    table.set(&layout, 0, 0, 0, true);
    for s in 1..=top {
        for_each_subset(n, s, |x| {
            let rank = layout.rank(x);
            let local = by_support.get(x);
            let subs: Vec<(usize, u32)> = (0..s)
                .map(|skip| {
                    let sub: Vec<u32> = x
                        .iter()
                        .enumerate()
                        .filter(|&(i, _)| i != skip)
                        .map(|(_, &e)| e)
                        .collect();
                    (layout.rank(&sub), ((1u32 << s) - 1) & !(1 << skip))
                })
                .collect();
            let mut image = Vec::new();
            for code in 0..layout.pow[s] {
                let closed = subs
                    .iter()
                    .all(|&(r, mask)| table.get(&layout, s - 1, r, layout.restrict(code, s, mask)));
                if !closed {
                    continue;
                }
                let ok = local.is_none_or(|ts| {
                    ts.iter().all(|(p, t)| {
                        image.clear();
                        image.extend(t.iter().map(|e| {
                            let i = x.binary_search(e).unwrap();
                            layout.digit(code, i) as u32
                        }));
                        target_rels[*p].contains(&image)
                    })
                });
                if ok {
                    table.set(&layout, s, rank, code, true);
                }
            }
        });
    }

    // support counters for pairs X ⊂ Y, |Y| = top, |X| ≤ k
    let masks: Vec<u32> = (0..(1u32 << top))
        .filter(|m| (m.count_ones() as usize) <= k && (m.count_ones() as usize) < top)
        .collect();
    let mut mask_offset = Vec::with_capacity(masks.len());
    let mut per_y = 0usize;
    for &m in &masks {
        mask_offset.push(per_y);
        per_y += layout.pow[m.count_ones() as usize];
    }
    let total_counters = layout.subsets(top).saturating_mul(per_y);
    if total_counters.saturating_add(table.levels.iter().map(Vec::len).sum::<usize>() * 64) > opts.budget {
        return Err(Error::Budget(format!(
            "{total_counters} support counters exceed the budget of {}",
            opts.budget
        )));
    }
    let mut counters = vec![0u32; total_counters];
    for_each_subset(n, top, |y| {
        let ry = layout.rank(y);
        for code in 0..layout.pow[top] {
            if table.get(&layout, top, ry, code) {
                for (mi, &m) in masks.iter().enumerate() {
                    let f = layout.restrict(code, top, m);
                    counters[ry * per_y + mask_offset[mi] + f] += 1;
                }
            }
        }
    });

    let mut deleted: FxHashMap<Key, Deletion> = FxHashMap::default();
    let mut queue: VecDeque<Key> = VecDeque::new();
    let mut seq = 0usize;
    let mut remove = |table: &mut Table, queue: &mut VecDeque<Key>, key: Key, reason: Reason| {
        let (s, r, c) = key;
        if table.get(&layout, s, r, c) {
            table.set(&layout, s, r, c, false);
            deleted.insert(key, Deletion { seq, reason });
            seq += 1;
            queue.push_back(key);
        }
    };

    // seed: entries lacking support from the start
    for_each_subset(n, top, |y| {
        let ry = layout.rank(y);
        for (mi, &m) in masks.iter().enumerate() {
            let s = m.count_ones() as usize;
            let sub: Vec<u32> = (0..top).filter(|i| m >> i & 1 == 1).map(|i| y[i]).collect();
            let rx = layout.rank(&sub);
            for f in 0..layout.pow[s] {
                if counters[ry * per_y + mask_offset[mi] + f] == 0 {
                    remove(&mut table, &mut queue, (s, rx, f), Reason::NoExtension { rank: ry });
                }
            }
        }
    });

    let mut z_buf: Vec<u32> = Vec::new();
    while let Some((s, rank, code)) = queue.pop_front() {
        let x_buf = layout.unrank(s, rank);
        if s < top {
            // extensions by one element lose their restriction
            let mut pos = 0usize;
            for z in 0..n as u32 {
                while pos < s && x_buf[pos] < z {
                    pos += 1;
                }
                if pos < s && x_buf[pos] == z {
                    continue;
                }
                z_buf.clear();
                z_buf.extend_from_slice(&x_buf[..pos]);
                z_buf.push(z);
                z_buf.extend_from_slice(&x_buf[pos..]);
                let rz = layout.rank(&z_buf);
                for c in 0..d {
                    let g = layout.insert(code, pos, c);
                    remove(
                        &mut table,
                        &mut queue,
                        (s + 1, rz, g),
                        Reason::Restriction { level: s, rank, code },
                    );
                }
            }
        } else {
            for (mi, &m) in masks.iter().enumerate() {
                let f = layout.restrict(code, top, m);
                let slot = &mut counters[rank * per_y + mask_offset[mi] + f];
                *slot -= 1;
                if *slot == 0 {
                    let sub: Vec<u32> = (0..top).filter(|i| m >> i & 1 == 1).map(|i| x_buf[i]).collect();
                    let sx = sub.len();
                    let rx = layout.rank(&sub);
                    remove(&mut table, &mut queue, (sx, rx, f), Reason::NoExtension { rank });
                }
            }
        }
    }

    Ok(Fixpoint {
        layout,
        table,
        deleted,
    })
}

/// The maximal (k,l)-consistent family of partial homomorphisms from an
/// instance to a template.
#[derive(Clone, Debug)]
pub struct ConsistencyFamily {
    instance: Structure,
    template: Structure,
    k: usize,
    l: usize,
    layout: Layout,
    table: Table,
}

impl ConsistencyFamily {
    pub fn instance(&self) -> &Structure {
        &self.instance
    }

    pub fn template(&self) -> &Structure {
        &self.template
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn l(&self) -> usize {
        self.l
    }

    /// Total number of stored assignments, the empty one included.
    pub fn entry_count(&self) -> usize {
        self.table.count()
    }

    fn subset_indices(&self, subset: &[&str]) -> Result<Vec<u32>> {
        let mut ids = Vec::with_capacity(subset.len());
        for x in subset {
            ids.push(
                self.instance
                    .index_of(x)
                    .ok_or_else(|| Error::UnknownElement((*x).to_owned()))?,
            );
        }
        ids.sort_unstable();
        ids.dedup();
        if ids.len() > self.layout.top {
            return Err(Error::InvalidParameter(format!(
                "subset of size {} exceeds l = {}",
                ids.len(),
                self.l
            )));
        }
        Ok(ids)
    }

    fn decode(&self, x: &[u32], code: usize) -> ElementMap {
        x.iter()
            .enumerate()
            .map(|(i, &e)| {
                (
                    self.instance.element(e),
                    self.template.element(self.layout.digit(code, i) as u32),
                )
            })
            .collect()
    }

    /// The surviving assignments on a subset of at most `l` elements.
    pub fn assignments(&self, subset: &[&str]) -> Result<Vec<ElementMap>> {
        let x = self.subset_indices(subset)?;
        let s = x.len();
        let rank = self.layout.rank(&x);
        Ok((0..self.layout.pow[s])
            .filter(|&c| self.table.get(&self.layout, s, rank, c))
            .map(|c| self.decode(&x, c))
            .collect())
    }

    pub fn contains(&self, f: &ElementMap) -> bool {
        let keys: Vec<&str> = f.keys().collect();
        let Ok(x) = self.subset_indices(&keys) else {
            return false;
        };
        let mut code = 0;
        for (i, &e) in x.iter().enumerate() {
            let Some(v) = f.get(self.instance.element(e)).and_then(|v| self.template.index_of(v)) else {
                return false;
            };
            code += v as usize * self.layout.pow[i];
        }
        self.table.get(&self.layout, x.len(), self.layout.rank(&x), code)
    }

    /// Every stored assignment as an explicit partial map.
    pub fn members(&self) -> Vec<ElementMap> {
        let mut out = Vec::new();
        for s in 0..=self.layout.top {
            for_each_subset(self.layout.n, s, |x| {
                let rank = self.layout.rank(x);
                for c in 0..self.layout.pow[s] {
                    if self.table.get(&self.layout, s, rank, c) {
                        out.push(self.decode(x, c));
                    }
                }
            });
        }
        out
    }

    /// Checks the defining conditions on the explicit member list: a
    /// nonempty family of partial homomorphisms, closed under restriction,
    /// in which every member on at most `k` elements extends to every
    /// superset of at most `l` elements. Returns the first violation.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let members = self.members();
        if members.is_empty() {
            return Err("family is empty".into());
        }
        let set: FxHashSet<&ElementMap> = members.iter().collect();
        let n = self.instance.len();
        let ids = self.instance.domain();
        for f in &members {
            if !check_partial_homomorphism(f, &self.instance, &self.template).map_err(|e| e.to_string())? {
                return Err(format!("{f} is not a partial homomorphism"));
            }
            let keys: Vec<&str> = f.keys().collect();
            for mask in 0..(1u32 << keys.len()) {
                let sub = f.restrict(keys.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, k)| *k));
                if !set.contains(&sub) {
                    return Err(format!("restriction {sub} of {f} is missing"));
                }
            }
            if keys.len() > self.k {
                continue;
            }
            let outside: Vec<&str> = ids
                .iter()
                .map(String::as_str)
                .filter(|x| f.get(x).is_none())
                .collect();
            for extra in 1..=self.l.saturating_sub(keys.len()).min(n - keys.len()) {
                let mut failure = None;
                for_each_subset(outside.len(), extra, |pick| {
                    if failure.is_some() {
                        return;
                    }
                    let y: Vec<&str> = keys
                        .iter()
                        .copied()
                        .chain(pick.iter().map(|&i| outside[i as usize]))
                        .collect();
                    let extended = members
                        .iter()
                        .any(|g| g.len() == y.len() && y.iter().all(|e| g.get(e).is_some()) && f.is_restriction_of(g));
                    if !extended {
                        failure = Some(format!("{f} has no extension to {{{}}}", y.join(", ")));
                    }
                });
                if let Some(msg) = failure {
                    return Err(msg);
                }
            }
        }
        Ok(())
    }
}

pub fn kl_family(a: &Structure, b: &Structure, k: usize, l: usize) -> Result<Option<ConsistencyFamily>> {
    kl_family_with(a, b, k, l, &ConsistencyOptions::default())
}

pub fn kl_family_with(
    a: &Structure,
    b: &Structure,
    k: usize,
    l: usize,
    opts: &ConsistencyOptions,
) -> Result<Option<ConsistencyFamily>> {
    let fp = propagate(a, b, k, l, opts)?;
    if !fp.consistent() {
        return Ok(None);
    }
    Ok(Some(ConsistencyFamily {
        instance: a.clone(),
        template: b.clone(),
        k,
        l,
        layout: fp.layout,
        table: fp.table,
    }))
}

pub fn is_consistent(a: &Structure, b: &Structure, k: usize, l: usize) -> Result<bool> {
    is_consistent_with(a, b, k, l, &ConsistencyOptions::default())
}

pub fn is_consistent_with(a: &Structure, b: &Structure, k: usize, l: usize, opts: &ConsistencyOptions) -> Result<bool> {
    Ok(propagate(a, b, k, l, opts)?.consistent())
}

/// Spoiler's move at a node of a strategy tree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "move", rename_all = "camelCase")]
pub enum TraceAction {
    /// Pebble the listed elements; one child per legal reply.
    Place { elements: Vec<String>, children: Vec<usize> },
    /// Lift the pebbles from the listed elements.
    Retract { elements: Vec<String>, child: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceNode {
    pub position: ElementMap,
    pub action: TraceAction,
}

/// A winning strategy for spoiler, stored as a DAG of positions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameTrace {
    pub k: usize,
    pub l: usize,
    pub root: usize,
    pub nodes: Vec<TraceNode>,
}

impl GameTrace {
    /// Longest root-to-leaf path, counted in moves.
    pub fn depth(&self) -> usize {
        let mut depth = vec![0usize; self.nodes.len()];
        // children always precede parents
        for (i, node) in self.nodes.iter().enumerate() {
            depth[i] = match &node.action {
                TraceAction::Place { children, .. } => {
                    1 + children.iter().map(|&c| depth[c]).max().unwrap_or(0)
                }
                TraceAction::Retract { child, .. } => 1 + depth[*child],
            };
        }
        depth.get(self.root).copied().unwrap_or(0)
    }
}

/// A spoiler strategy when the instance is inconsistent, read off the
/// deletion log: each removed entry is answered by the reason it was
/// removed for.
pub fn spoiler_trace(a: &Structure, b: &Structure, k: usize, l: usize) -> Result<Option<GameTrace>> {
    spoiler_trace_with(a, b, k, l, &ConsistencyOptions::default())
}

pub fn spoiler_trace_with(
    a: &Structure,
    b: &Structure,
    k: usize,
    l: usize,
    opts: &ConsistencyOptions,
) -> Result<Option<GameTrace>> {
    let fp = propagate(a, b, k, l, opts)?;
    if fp.consistent() {
        return Ok(None);
    }
    let layout = &fp.layout;
    let top = layout.top;

    let extensions = |s: usize, rank: usize, code: usize, ry: usize| -> (Vec<u32>, Vec<Key>) {
        let x = layout.unrank(s, rank);
        let y = layout.unrank(top, ry);
        let mask: u32 = (0..top)
            .filter(|&i| x.binary_search(&y[i]).is_ok())
            .fold(0, |m, i| m | 1 << i);
        let fresh: Vec<u32> = y.iter().copied().filter(|e| x.binary_search(e).is_err()).collect();
        let replies = (0..layout.pow[top])
            .filter(|&g| layout.restrict(g, top, mask) == code)
            .filter(|&g| fp.deleted.contains_key(&(top, ry, g)) || fp.table.get(layout, top, ry, g))
            .map(|g| (top, ry, g))
            .collect();
        (fresh, replies)
    };

    // reachable deleted entries from the empty position
    let root: Key = (0, 0, 0);
    let mut seen: FxHashSet<Key> = FxHashSet::default();
    let mut stack = vec![root];
    seen.insert(root);
    while let Some(key) = stack.pop() {
        let del = fp.deleted[&key];
        let next: Vec<Key> = match del.reason {
            Reason::Restriction { level, rank, code } => vec![(level, rank, code)],
            Reason::NoExtension { rank } => extensions(key.0, key.1, key.2, rank).1,
        };
        for n in next {
            if seen.insert(n) {
                stack.push(n);
            }
        }
    }
    let mut order: Vec<Key> = seen.into_iter().collect();
    order.sort_by_key(|k| fp.deleted[k].seq);

    let position = |s: usize, rank: usize, code: usize| -> ElementMap {
        layout
            .unrank(s, rank)
            .iter()
            .enumerate()
            .map(|(i, &e)| (a.element(e), b.element(layout.digit(code, i) as u32)))
            .collect()
    };
    let mut index: FxHashMap<Key, usize> = FxHashMap::default();
    let mut nodes = Vec::with_capacity(order.len());
    for key in order {
        let (s, rank, code) = key;
        let action = match fp.deleted[&key].reason {
            Reason::Restriction { level, rank: rx, code: cx } => {
                let x = layout.unrank(level, rx);
                let elements = layout
                    .unrank(s, rank)
                    .into_iter()
                    .filter(|e| x.binary_search(e).is_err())
                    .map(|e| a.element(e).to_owned())
                    .collect();
                TraceAction::Retract {
                    elements,
                    child: index[&(level, rx, cx)],
                }
            }
            Reason::NoExtension { rank: ry } => {
                let (fresh, replies) = extensions(s, rank, code, ry);
                TraceAction::Place {
                    elements: fresh.into_iter().map(|e| a.element(e).to_owned()).collect(),
                    children: replies.iter().map(|r| index[r]).collect(),
                }
            }
        };
        index.insert(key, nodes.len());
        nodes.push(TraceNode {
            position: position(s, rank, code),
            action,
        });
    }
    Ok(Some(GameTrace {
        k,
        l,
        root: index[&root],
        nodes,
    }))
}

/// Checks a spoiler strategy against the game rules from scratch: the root
/// is the empty position, every position is a partial homomorphism, placing
/// is allowed only from at most `k` pebbles and up to `l` in total, each
/// placement lists exactly the legal replies, retractions lift a nonempty
/// set of pebbles, and the graph is acyclic.
pub fn validate_trace(trace: &GameTrace, a: &Structure, b: &Structure, k: usize, l: usize) -> Result<bool> {
    check_params(a, b, k, l)?;
    let nodes = &trace.nodes;
    let Some(root) = nodes.get(trace.root) else {
        return Err(Error::InvalidParameter("root index out of range".into()));
    };
    if !root.position.is_empty() {
        return Ok(false);
    }
    for node in nodes {
        let f = &node.position;
        if f.len() > l || !check_partial_homomorphism(f, a, b)? {
            return Ok(false);
        }
        match &node.action {
            TraceAction::Place { elements, children } => {
                if f.len() > k || elements.is_empty() || f.len() + elements.len() > l {
                    return Ok(false);
                }
                let fresh: BTreeSet<&str> = elements.iter().map(String::as_str).collect();
                if fresh.len() != elements.len() || fresh.iter().any(|e| f.get(e).is_some() || !a.contains(e)) {
                    return Ok(false);
                }
                let mut expected: BTreeSet<ElementMap> = BTreeSet::new();
                let total = b.len().checked_pow(elements.len() as u32).unwrap_or(usize::MAX);
                for mut code in 0..total {
                    let mut g = f.clone();
                    for e in elements {
                        g.insert(e.clone(), b.element((code % b.len()) as u32));
                        code /= b.len();
                    }
                    if check_partial_homomorphism(&g, a, b)? {
                        expected.insert(g);
                    }
                }
                let mut got = BTreeSet::new();
                for &c in children {
                    let Some(child) = nodes.get(c) else {
                        return Ok(false);
                    };
                    if !got.insert(child.position.clone()) {
                        return Ok(false);
                    }
                }
                if got != expected {
                    return Ok(false);
                }
            }
            TraceAction::Retract { elements, child } => {
                let Some(child) = nodes.get(*child) else {
                    return Ok(false);
                };
                if elements.is_empty() || elements.iter().any(|e| f.get(e).is_none()) {
                    return Ok(false);
                }
                let keep = f.keys().filter(|x| !elements.iter().any(|e| e == x));
                if child.position != f.restrict(keep) {
                    return Ok(false);
                }
            }
        }
    }
    // acyclicity by iterative colouring
    let mut state = vec![0u8; nodes.len()];
    for start in 0..nodes.len() {
        if state[start] != 0 {
            continue;
        }
        let mut stack = vec![(start, 0usize)];
        state[start] = 1;
        while let Some(&mut (v, ref mut i)) = stack.last_mut() {
            let succ: &[usize] = match &nodes[v].action {
                TraceAction::Place { children, .. } => children,
                TraceAction::Retract { child, .. } => std::slice::from_ref(child),
            };
            if *i < succ.len() {
                let w = succ[*i];
                *i += 1;
                match state[w] {
                    0 => {
                        state[w] = 1;
                        stack.push((w, 0));
                    }
                    1 => return Ok(false),
                    _ => {}
                }
            } else {
                state[v] = 2;
                stack.pop();
            }
        }
    }
    Ok(true)
}

/// Pulls a family on `(A, B)` back along a homomorphism `h: A′ → A`:
/// the new family holds `f ∘ h|X′` for every `f` stored on `h(X′)`.
pub fn inverse_hom_transfer(h: &ElementMap, a_prime: &Structure, family: &ConsistencyFamily) -> Result<ConsistencyFamily> {
    let a = &family.instance;
    if !crate::morphisms::check_morphism(h, a_prime, a, crate::morphisms::MorphismKind::Homomorphism)? {
        return Err(Error::NotAMorphism {
            kind: "homomorphism".into(),
            detail: "transfer map does not preserve relations".into(),
        });
    }
    let n = a_prime.len();
    let layout = Layout::new(n, family.template.len(), family.l, DEFAULT_BUDGET)?;
    let hv: Vec<u32> = a_prime
        .domain()
        .iter()
        .map(|x| a.index_of(h.get(x).unwrap()).unwrap())
        .collect();
    let mut table = Table::new(&layout);
    let src = &family.layout;
    for s in 0..=layout.top {
        for_each_subset(n, s, |x| {
            let rank = layout.rank(x);
            let img: Vec<u32> = x
                .iter()
                .map(|&e| hv[e as usize])
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect();
            let ri = src.rank(&img);
            let pos: Vec<usize> = x
                .iter()
                .map(|&e| img.binary_search(&hv[e as usize]).unwrap())
                .collect();
            for c in 0..src.pow[img.len()] {
                if family.table.get(src, img.len(), ri, c) {
                    let code: usize = pos
                        .iter()
                        .enumerate()
                        .map(|(i, &p)| src.digit(c, p) * layout.pow[i])
                        .sum();
                    table.set(&layout, s, rank, code, true);
                }
            }
        });
    }
    Ok(ConsistencyFamily {
        instance: a_prime.clone(),
        template: family.template.clone(),
        k: family.k,
        l: family.l,
        layout,
        table,
    })
}
