//! Brute-force reference implementations shared by the integration suites.
//! None of them calls into the search or propagation code under test.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use fraisse::families::{
    build_template, diagram_fn, diagram_g, diagram_lineq, gen_fn, gen_g, gen_pn, marking,
    tree_instance, AbelianGroup, Diagram, TreeShape,
};
use fraisse::structure::{blowup, free_amalgam, ElementMap, Signature, Structure};
use fraisse::verifier::random_path_free_sample;

pub fn amalgam_of(d: &Diagram) -> Structure {
    free_amalgam(&d.base, &d.left, &d.left_emb, &d.right, &d.right_emb)
        .unwrap()
        .amalgam
}

fn tuples_by_symbol(s: &Structure) -> Vec<(String, Vec<Vec<usize>>)> {
    s.signature()
        .symbols()
        .iter()
        .map(|sym| {
            let ts = s
                .tuples(&sym.name)
                .into_iter()
                .map(|t| t.iter().map(|x| s.index_of(x).unwrap() as usize).collect())
                .collect();
            (sym.name.clone(), ts)
        })
        .collect()
}

fn tuple_set(s: &Structure) -> HashSet<(String, Vec<usize>)> {
    tuples_by_symbol(s)
        .into_iter()
        .flat_map(|(name, ts)| ts.into_iter().map(move |t| (name.clone(), t)))
        .collect()
}

/// Every map `A → B` as index vectors, in lexicographic order.
fn all_maps(n: usize, d: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = if n == 0 { 1 } else if d == 0 { 0 } else { d.pow(n as u32) };
    (0..total).map(move |mut code| {
        let mut v = vec![0; n];
        for slot in v.iter_mut().rev() {
            *slot = code % d.max(1);
            code /= d.max(1);
        }
        v
    })
}

fn to_element_map(a: &Structure, b: &Structure, v: &[usize]) -> ElementMap {
    v.iter()
        .enumerate()
        .map(|(x, &y)| (a.domain()[x].clone(), b.domain()[y].clone()))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Naive {
    Hom,
    Embedding,
}

/// All maps of the given kind, by exhaustive enumeration of `|B|^|A|` maps.
pub fn naive_maps(a: &Structure, b: &Structure, kind: Naive) -> BTreeSet<ElementMap> {
    let at = tuples_by_symbol(a);
    let bt = tuple_set(b);
    let mut out = BTreeSet::new();
    for v in all_maps(a.len(), b.len()) {
        let preserves = at.iter().all(|(name, ts)| {
            ts.iter()
                .all(|t| bt.contains(&(name.clone(), t.iter().map(|&x| v[x]).collect())))
        });
        if !preserves {
            continue;
        }
        if kind == Naive::Embedding {
            let distinct: HashSet<usize> = v.iter().copied().collect();
            if distinct.len() != v.len() {
                continue;
            }
            let mut inverse = vec![usize::MAX; b.len()];
            for (x, &y) in v.iter().enumerate() {
                inverse[y] = x;
            }
            let source = tuple_set(a);
            let reflects = bt.iter().all(|(name, t)| {
                if t.iter().any(|&y| inverse[y] == usize::MAX) {
                    return true;
                }
                source.contains(&(name.clone(), t.iter().map(|&y| inverse[y]).collect()))
            });
            if !reflects {
                continue;
            }
        }
        out.insert(to_element_map(a, b, &v));
    }
    out
}

/// The existential pebble game with `l` pebbles where spoiler retracts to at
/// most `k` pebbles between rounds. Spoiler's winning positions are
/// computed as a least fixpoint over partial homomorphisms with domain size
/// at most `k`; the instance is consistent iff spoiler does not win from
/// the empty position.
pub fn game_consistent(a: &Structure, b: &Structure, k: usize, l: usize) -> bool {
    let n = a.len();
    let d = b.len();
    let at = tuples_by_symbol(a);
    let bt = tuple_set(b);
    let is_partial_hom = |dom: &[usize], vals: &[usize]| -> bool {
        let pos: HashMap<usize, usize> = dom.iter().copied().zip(vals.iter().copied()).collect();
        at.iter().all(|(name, ts)| {
            ts.iter().all(|t| {
                if !t.iter().all(|x| pos.contains_key(x)) {
                    return true;
                }
                bt.contains(&(name.clone(), t.iter().map(|x| pos[x]).collect()))
            })
        })
    };
    let subsets = |max: usize| -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new()];
        let mut frontier = vec![Vec::new()];
        for _ in 0..max {
            let mut next = Vec::new();
            for s in &frontier {
                let start = s.last().map_or(0, |&x: &usize| x + 1);
                for x in start..n {
                    let mut t: Vec<usize> = s.clone();
                    t.push(x);
                    next.push(t);
                }
            }
            out.extend(next.iter().cloned());
            frontier = next;
        }
        out
    };
    type Position = BTreeMap<usize, usize>;
    let small = subsets(k.min(n));
    let large = subsets(l.min(n));
    let mut positions: Vec<Position> = Vec::new();
    for s in &small {
        for vals in all_maps(s.len(), d) {
            if is_partial_hom(s, &vals) {
                positions.push(s.iter().copied().zip(vals).collect());
            }
        }
    }
    // duplicator's replies: for each position and each spoiler target Y,
    // the extensions of the position to Y
    let mut spoiler_wins: HashSet<Position> = HashSet::new();
    let mut changed = true;
    while changed {
        changed = false;
        for p in &positions {
            if spoiler_wins.contains(p) {
                continue;
            }
            let wins = large.iter().filter(|y| p.keys().all(|x| y.contains(x))).any(|y| {
                let free: Vec<usize> = y.iter().copied().filter(|x| !p.contains_key(x)).collect();
                all_maps(free.len(), d).all(|vals| {
                    let mut g = p.clone();
                    g.extend(free.iter().copied().zip(vals));
                    let dom: Vec<usize> = g.keys().copied().collect();
                    let img: Vec<usize> = g.values().copied().collect();
                    if !is_partial_hom(&dom, &img) {
                        return true;
                    }
                    // spoiler may retract to any subset of size ≤ k
                    small.iter().filter(|x| x.iter().all(|e| g.contains_key(e))).any(|x| {
                        let r: Position = x.iter().map(|e| (*e, g[e])).collect();
                        spoiler_wins.contains(&r)
                    })
                })
            });
            if wins {
                spoiler_wins.insert(p.clone());
                changed = true;
            }
        }
    }
    !spoiler_wins.contains(&Position::new())
}

/// Number of solutions of an equation instance over `T_G`: every value
/// element gets a group element, each triple element must see a zero-sum
/// (father, left, right) and each marker fixes its element.
pub fn brute_force_solutions(instance: &Structure, g: &AbelianGroup) -> usize {
    let values: Vec<&str> = instance.labeled("value");
    let index: HashMap<&str, usize> = values.iter().enumerate().map(|(i, v)| (*v, i)).collect();
    let proj = |sym: &str| -> HashMap<String, usize> {
        instance
            .tuples(sym)
            .into_iter()
            .map(|t| (t[0].to_owned(), index[t[1]]))
            .collect()
    };
    let (p1, p2, p3) = (proj("pi1"), proj("pi2"), proj("pi3"));
    let triples: Vec<(usize, usize, usize)> = instance
        .labeled("triple")
        .into_iter()
        .map(|t| (p1[t], p2[t], p3[t]))
        .collect();
    let elems = g.elements();
    let mut markers: Vec<(usize, usize)> = Vec::new();
    for (ai, a) in elems.iter().enumerate() {
        for t in instance.tuples(&g.marker(a)) {
            markers.push((index[t[0]], ai));
        }
    }
    all_maps(values.len(), elems.len())
        .filter(|v| markers.iter().all(|&(x, a)| v[x] == a))
        .filter(|v| {
            triples.iter().all(|&(x, y, z)| {
                let s = g.add(&g.add(&elems[v[x]], &elems[v[y]]), &elems[v[z]]);
                s == g.zero()
            })
        })
        .count()
}

fn push_diagram(pool: &mut Vec<Structure>, d: Diagram) {
    pool.push(d.base);
    pool.push(d.left);
    pool.push(d.right);
}

/// Small structures from the generators, grouped by signature.
pub fn pools() -> Vec<Vec<Structure>> {
    let mut f = Vec::new();
    for n in 1..=4 {
        f.push(gen_fn(n).unwrap());
    }
    for n in 1..=3 {
        push_diagram(&mut f, diagram_fn(n).unwrap());
    }
    f.push(blowup(&diagram_fn(2).unwrap().base, 2).unwrap());
    let f4 = gen_fn(4).unwrap();
    f.push(f4.induced_substructure(["b", "v01", "v02", "v03"]).unwrap());
    f.push(f4.induced_substructure(["r", "b", "v02"]).unwrap());

    let mut g = Vec::new();
    for shape in TreeShape::all_with_leaves(2).iter().chain(&TreeShape::all_with_leaves(3)) {
        g.push(gen_g(shape).unwrap());
        push_diagram(&mut g, diagram_g(shape).unwrap());
    }

    let z2 = AbelianGroup::cyclic(2).unwrap();
    let mut t = vec![build_template(&z2)];
    for a in [[0usize], [1]] {
        t.push(marking(&tree_instance(2, None).unwrap(), &a, &z2).unwrap());
    }
    let d = diagram_lineq(2, &z2, None).unwrap();
    t.push(blowup(&d.base, 2).unwrap());
    push_diagram(&mut t, d);
    let both = t[0].induced_substructure(["0"]).unwrap();
    let both = both.with_relation("C1", &[vec!["0"]]).unwrap();
    t.push(both);

    let mut p: Vec<Structure> = (1..=5).map(|n| gen_pn(n).unwrap()).collect();
    for seed in 0..6 {
        p.push(random_path_free_sample(4 + seed as usize % 3, seed).unwrap());
    }
    vec![f, g, t, p]
}

pub fn cycle(n: usize) -> Structure {
    let sig = Signature::new([("E", 2)]).unwrap();
    let mut b = Structure::builder(sig).elements((0..n).map(|i| format!("c{i}")));
    for i in 0..n {
        let (x, y) = (format!("c{i}"), format!("c{}", (i + 1) % n));
        b.add_tuple("E", [x.clone(), y.clone()]);
        b.add_tuple("E", [y, x]);
    }
    b.build().unwrap()
}

pub fn consistency_instances() -> Vec<(String, Structure, Structure)> {
    let mut out = Vec::new();
    for n in [3, 4, 5, 6, 7] {
        out.push((format!("C{n} vs K2"), cycle(n), cycle(2)));
    }
    out.push(("C5 vs C3".into(), cycle(5), cycle(3)));
    for (name, group) in [("Z2", 2usize), ("Z3", 3)] {
        let g = AbelianGroup::cyclic(group).unwrap();
        let t = build_template(&g);
        for a in g.elements() {
            out.push((
                format!("m_{a:?} tree 2 over {name}"),
                marking(&tree_instance(2, None).unwrap(), &a, &g).unwrap(),
                t.clone(),
            ));
        }
        let d = diagram_lineq(2, &g, None).unwrap();
        out.push((format!("lineq 2 amalgam over {name}"), amalgam_of(&d), t.clone()));
    }
    let z2 = AbelianGroup::cyclic(2).unwrap();
    let t2 = build_template(&z2);
    for a in [[0usize], [1]] {
        out.push((
            format!("m_{a:?} tree 4 over Z2"),
            marking(&tree_instance(4, None).unwrap(), &a, &z2).unwrap(),
            t2.clone(),
        ));
    }
    let both = t2.induced_substructure(["0"]).unwrap().with_relation("C1", &[vec!["0"]]).unwrap();
    out.push(("doubly marked point".into(), both, t2));
    out
}
