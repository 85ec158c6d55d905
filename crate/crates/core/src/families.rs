//! Generators for the concrete structures: linear-equation templates over
//! finite Abelian groups, binary-tree equation instances and their markings,
//! the path-with-two-apexes family `F_n`, the labelled binary trees `G`,
//! directed `S`–`T` paths with their reachability expansion, diagrams, and
//! the glued structures `J^C`.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::morphisms::{canonical_embeddings, check_morphism, MorphismKind};
use crate::structure::{ElementMap, Signature, Structure, StructureBuilder};

/// A finite Abelian group `Z_{n_1} × … × Z_{n_k}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AbelianGroup {
    orders: Vec<usize>,
}

/// An element of an [`AbelianGroup`], one residue per cyclic factor.
pub type GroupElement = Vec<usize>;

impl AbelianGroup {
    pub fn new(orders: Vec<usize>) -> Result<Self> {
        if orders.is_empty() {
            return Err(Error::InvalidParameter("group needs at least one cyclic factor".into()));
        }
        if orders.contains(&0) {
            return Err(Error::InvalidParameter("cyclic orders must be positive".into()));
        }
        Ok(AbelianGroup { orders })
    }

    pub fn cyclic(n: usize) -> Result<Self> {
        Self::new(vec![n])
    }

    pub fn orders(&self) -> &[usize] {
        &self.orders
    }

    pub fn size(&self) -> usize {
        self.orders.iter().product()
    }

    pub fn is_trivial(&self) -> bool {
        self.orders.iter().all(|&n| n == 1)
    }

    pub fn zero(&self) -> GroupElement {
        vec![0; self.orders.len()]
    }

    pub fn contains(&self, a: &[usize]) -> bool {
        a.len() == self.orders.len() && a.iter().zip(&self.orders).all(|(x, n)| x < n)
    }

    pub fn add(&self, a: &[usize], b: &[usize]) -> GroupElement {
        a.iter()
            .zip(b)
            .zip(&self.orders)
            .map(|((x, y), n)| (x + y) % n)
            .collect()
    }

    pub fn neg(&self, a: &[usize]) -> GroupElement {
        a.iter().zip(&self.orders).map(|(x, n)| (n - x) % n).collect()
    }

    /// All elements, lexicographically.
    pub fn elements(&self) -> Vec<GroupElement> {
        let mut out = vec![Vec::new()];
        for &n in &self.orders {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    (0..n).map(move |x| {
                        let mut e = prefix.clone();
                        e.push(x);
                        e
                    })
                })
                .collect();
        }
        out
    }

    /// `1` in the first cyclic factor of order at least two.
    pub fn default_marking(&self) -> Option<GroupElement> {
        let i = self.orders.iter().position(|&n| n >= 2)?;
        let mut e = self.zero();
        e[i] = 1;
        Some(e)
    }

    /// Residues joined by `_`, e.g. `1` in `Z_2` or `0_1` in `Z_2 × Z_2`.
    pub fn label(&self, a: &[usize]) -> String {
        a.iter().map(usize::to_string).collect::<Vec<_>>().join("_")
    }

    pub fn parse_element(&self, s: &str) -> Result<GroupElement> {
        let parts: std::result::Result<Vec<usize>, _> = s.split(['_', ',']).map(str::parse).collect();
        let e = parts.map_err(|_| Error::Parse(format!("bad group element `{s}`")))?;
        if !self.contains(&e) {
            return Err(Error::InvalidParameter(format!("`{s}` is not an element of {self}")));
        }
        Ok(e)
    }

    /// Name of the unary symbol marking value `a`.
    pub fn marker(&self, a: &[usize]) -> String {
        format!("C{}", self.label(a))
    }
}

impl FromStr for AbelianGroup {
    type Err = Error;

    /// `2`, `3`, `2x2`, …
    fn from_str(s: &str) -> Result<Self> {
        let orders: std::result::Result<Vec<usize>, _> = s.split(['x', 'X']).map(|p| p.trim().parse()).collect();
        Self::new(orders.map_err(|_| Error::Parse(format!("bad group `{s}`")))?)
    }
}

impl fmt::Display for AbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.orders.iter().map(usize::to_string).collect();
        f.write_str(&parts.join("x"))
    }
}

const PI: [&str; 3] = ["pi1", "pi2", "pi3"];

/// Symbols shared by templates and tree instances, without the markers.
pub fn equation_signature() -> Signature {
    Signature::new([("pi1", 2), ("pi2", 2), ("pi3", 2), ("value", 1), ("triple", 1)]).unwrap()
}

pub fn template_signature(g: &AbelianGroup) -> Signature {
    let markers = g.elements().into_iter().map(|a| (g.marker(&a), 1));
    equation_signature()
        .union(&Signature::new(markers).unwrap())
        .unwrap()
}

/// `T_G`: the values of `G`, the zero-sum triples, the three coordinate
/// projections as binary relations, and one marker per value.
pub fn build_template(g: &AbelianGroup) -> Structure {
    let mut b = Structure::builder(template_signature(g));
    let elems = g.elements();
    for a in &elems {
        let id = g.label(a);
        b.add_element(id.clone());
        b.add_tuple("value", [id.clone()]);
        b.add_tuple(&g.marker(a), [id]);
    }
    for x in &elems {
        for y in &elems {
            let z = g.neg(&g.add(x, y));
            let id = format!("({},{},{})", g.label(x), g.label(y), g.label(&z));
            b.add_element(id.clone());
            b.add_tuple("triple", [id.clone()]);
            for (sym, v) in PI.iter().zip([x, y, &z]) {
                b.add_tuple(sym, [id.clone(), g.label(v)]);
            }
        }
    }
    b.build().unwrap()
}

/// A full binary tree shape. Text form: `.` for a leaf, `(LR)` for an
/// inner node with subtrees `L` and `R`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TreeShape {
    Leaf,
    Node(Box<TreeShape>, Box<TreeShape>),
}

impl TreeShape {
    pub fn node(left: TreeShape, right: TreeShape) -> Self {
        TreeShape::Node(Box::new(left), Box::new(right))
    }

    /// The perfect tree with all leaves at `depth`.
    pub fn perfect(depth: u32) -> Self {
        if depth == 0 {
            TreeShape::Leaf
        } else {
            let sub = Self::perfect(depth - 1);
            Self::node(sub.clone(), sub)
        }
    }

    /// The perfect tree with `n` leaves, `n` a power of two.
    pub fn perfect_with_leaves(n: usize) -> Result<Self> {
        if n == 0 || !n.is_power_of_two() {
            return Err(Error::InvalidParameter(format!("{n} is not a power of two")));
        }
        Ok(Self::perfect(n.trailing_zeros()))
    }

    pub fn leaves(&self) -> usize {
        match self {
            TreeShape::Leaf => 1,
            TreeShape::Node(l, r) => l.leaves() + r.leaves(),
        }
    }

    pub fn inner_nodes(&self) -> usize {
        self.leaves() - 1
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeShape::Leaf => 0,
            TreeShape::Node(l, r) => 1 + l.depth().max(r.depth()),
        }
    }

    /// Every shape with exactly `k` leaves, in a fixed order.
    pub fn all_with_leaves(k: usize) -> Vec<TreeShape> {
        let mut table: Vec<Vec<TreeShape>> = vec![Vec::new(), vec![TreeShape::Leaf]];
        for n in 2..=k {
            let mut here = Vec::new();
            for left in 1..n {
                for l in &table[left] {
                    for r in &table[n - left] {
                        here.push(Self::node(l.clone(), r.clone()));
                    }
                }
            }
            table.push(here);
        }
        table.get(k).cloned().unwrap_or_default()
    }

    /// Paths from the root (`0` = left, `1` = right) of every node, preorder.
    fn walk(&self, path: &mut String, visit: &mut impl FnMut(&str, bool)) {
        match self {
            TreeShape::Leaf => visit(path, true),
            TreeShape::Node(l, r) => {
                visit(path, false);
                path.push('0');
                l.walk(path, visit);
                path.pop();
                path.push('1');
                r.walk(path, visit);
                path.pop();
            }
        }
    }

    /// `(path, is_leaf)` for every node in preorder.
    pub fn nodes(&self) -> Vec<(String, bool)> {
        let mut out = Vec::new();
        self.walk(&mut String::new(), &mut |p, leaf| out.push((p.to_owned(), leaf)));
        out
    }
}

impl fmt::Display for TreeShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TreeShape::Leaf => f.write_str("."),
            TreeShape::Node(l, r) => write!(f, "({l}{r})"),
        }
    }
}

impl FromStr for TreeShape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        fn parse(bytes: &[u8], i: &mut usize) -> Result<TreeShape> {
            match bytes.get(*i) {
                Some(b'.') => {
                    *i += 1;
                    Ok(TreeShape::Leaf)
                }
                Some(b'(') => {
                    *i += 1;
                    let l = parse(bytes, i)?;
                    let r = parse(bytes, i)?;
                    if bytes.get(*i) != Some(&b')') {
                        return Err(Error::Parse(format!("expected `)` at offset {i}")));
                    }
                    *i += 1;
                    Ok(TreeShape::node(l, r))
                }
                _ => Err(Error::Parse(format!("unexpected input at offset {i}"))),
            }
        }
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let mut i = 0;
        let shape = parse(compact.as_bytes(), &mut i)?;
        if i != compact.len() {
            return Err(Error::Parse(format!("trailing input after offset {i}")));
        }
        Ok(shape)
    }
}

fn node_id(path: &str) -> String {
    format!("n{path}")
}

fn triple_id(path: &str) -> String {
    format!("t{path}")
}

/// The equation instance of a tree: one `value` element per node, one
/// `triple` element per inner node, linked to father, left and right son by
/// `pi1`, `pi2`, `pi3`. Without a shape, `n` must be a power of two and the
/// tree is perfect.
pub fn tree_instance(n: usize, shape: Option<&TreeShape>) -> Result<Structure> {
    let shape = match shape {
        Some(s) if s.leaves() != n => {
            return Err(Error::InvalidParameter(format!(
                "shape has {} leaves, expected {n}",
                s.leaves()
            )))
        }
        Some(s) => s.clone(),
        None => TreeShape::perfect_with_leaves(n)?,
    };
    let mut b = Structure::builder(equation_signature());
    for (path, leaf) in shape.nodes() {
        let v = node_id(&path);
        b.add_element(v.clone());
        b.add_tuple("value", [v.clone()]);
        if !leaf {
            let t = triple_id(&path);
            b.add_element(t.clone());
            b.add_tuple("triple", [t.clone()]);
            b.add_tuple("pi1", [t.clone(), v]);
            b.add_tuple("pi2", [t.clone(), node_id(&format!("{path}0"))]);
            b.add_tuple("pi3", [t, node_id(&format!("{path}1"))]);
        }
    }
    Ok(b.build().unwrap())
}

/// The value element that is nobody's son.
pub fn tree_root(instance: &Structure) -> Result<String> {
    let sons: BTreeSet<&str> = ["pi2", "pi3"]
        .iter()
        .flat_map(|s| instance.tuples(s))
        .map(|t| t[1])
        .collect();
    let roots: Vec<&str> = instance
        .labeled("value")
        .into_iter()
        .filter(|v| !sons.contains(v))
        .collect();
    match roots.as_slice() {
        [r] => Ok((*r).to_owned()),
        _ => Err(Error::InvalidStructure(format!(
            "expected one root, found {}",
            roots.len()
        ))),
    }
}

/// Value elements that are nobody's father.
pub fn tree_leaves(instance: &Structure) -> Vec<String> {
    let fathers: BTreeSet<&str> = instance.tuples("pi1").into_iter().map(|t| t[1]).collect();
    instance
        .labeled("value")
        .into_iter()
        .filter(|v| !fathers.contains(v))
        .map(str::to_owned)
        .collect()
}

/// `m_a(I)`: the instance over the signature of `T_G` with the root marked
/// by `C_a`.
pub fn marking(instance: &Structure, a: &[usize], g: &AbelianGroup) -> Result<Structure> {
    if !g.contains(a) {
        return Err(Error::InvalidParameter(format!(
            "{a:?} is not an element of {g}"
        )));
    }
    let root = tree_root(instance)?;
    let s = instance.expand(&template_signature(g))?;
    let marker = g.marker(a);
    let mut tuples: Vec<Vec<&str>> = s.tuples(&marker);
    tuples.push(vec![root.as_str()]);
    s.with_relation(&marker, &tuples)
}

/// A span `L ← A → R` of embeddings.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagram {
    pub base: Structure,
    pub left: Structure,
    pub right: Structure,
    pub left_emb: ElementMap,
    pub right_emb: ElementMap,
}

impl Diagram {
    /// Builds a diagram, checking that both legs are embeddings.
    pub fn new(
        base: Structure,
        left: Structure,
        right: Structure,
        left_emb: ElementMap,
        right_emb: ElementMap,
    ) -> Result<Self> {
        for (emb, target, side) in [(&left_emb, &left, "left"), (&right_emb, &right, "right")] {
            if !check_morphism(emb, &base, target, MorphismKind::Embedding)? {
                return Err(Error::InvalidDiagram(format!("{side} leg is not an embedding")));
            }
        }
        Ok(Diagram {
            base,
            left,
            right,
            left_emb,
            right_emb,
        })
    }

    fn inclusions(base: Structure, left: Structure, right: Structure) -> Result<Self> {
        let id = ElementMap::identity(&base);
        Self::new(base, left, right, id.clone(), id)
    }

    pub fn side(&self, side: Side) -> (&Structure, &ElementMap) {
        match side {
            Side::Left => (&self.left, &self.left_emb),
            Side::Right => (&self.right, &self.right_emb),
        }
    }
}

/// `m_0(I)` and `m_a(I)` glued along the leaves of the tree.
pub fn diagram_lineq(n: usize, g: &AbelianGroup, a: Option<&[usize]>) -> Result<Diagram> {
    diagram_lineq_shaped(&TreeShape::perfect_with_leaves(n)?, g, a)
}

/// As [`diagram_lineq`] over an arbitrary tree shape.
pub fn diagram_lineq_shaped(shape: &TreeShape, g: &AbelianGroup, a: Option<&[usize]>) -> Result<Diagram> {
    if g.is_trivial() {
        return Err(Error::InvalidParameter("group is trivial".into()));
    }
    if shape.leaves() < 2 {
        return Err(Error::InvalidParameter("tree needs at least two leaves".into()));
    }
    let a = match a {
        Some(a) => a.to_vec(),
        None => g.default_marking().unwrap(),
    };
    if a == g.zero() {
        return Err(Error::InvalidParameter("marking must be nonzero".into()));
    }
    let tree = tree_instance(shape.leaves(), Some(shape))?;
    let left = marking(&tree, &g.zero(), g)?;
    let right = marking(&tree, &a, g)?;
    let leaves = tree_leaves(&tree);
    let base = left.induced_substructure(leaves.iter().map(String::as_str))?;
    Diagram::inclusions(base, left, right)
}

fn fn_signature() -> Signature {
    Signature::new([("B", 1), ("E", 2), ("Edir", 2), ("R", 1), ("S", 1), ("T", 1)]).unwrap()
}

fn path_ids(n: usize) -> Vec<String> {
    let width = n.to_string().len().max(2);
    (1..=n).map(|i| format!("v{i:0width$}")).collect()
}

fn add_edge(b: &mut StructureBuilder, name: &str, x: &str, y: &str) {
    b.add_tuple(name, [x, y]);
    b.add_tuple(name, [y, x]);
}

/// `F_n`: a directed `Edir`-path `v1 → … → vn` from the `S` vertex to the
/// `T` vertex, a red vertex `r` and a blue vertex `b`, each joined to every
/// path vertex by an undirected `E`-edge.
pub fn gen_fn(n: usize) -> Result<Structure> {
    if n < 1 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    let path = path_ids(n);
    let mut b = Structure::builder(fn_signature());
    b.add_element("r");
    b.add_element("b");
    b.add_tuple("R", ["r"]);
    b.add_tuple("B", ["b"]);
    b.add_tuple("S", [path[0].as_str()]);
    b.add_tuple("T", [path[n - 1].as_str()]);
    for (i, v) in path.iter().enumerate() {
        b.add_element(v.clone());
        add_edge(&mut b, "E", "r", v);
        add_edge(&mut b, "E", "b", v);
        if i + 1 < n {
            b.add_tuple("Edir", [v.as_str(), path[i + 1].as_str()]);
        }
    }
    Ok(b.build().unwrap())
}

/// `F_n` split along its path: `L` drops the blue vertex, `R` the red one.
pub fn diagram_fn(n: usize) -> Result<Diagram> {
    let f = gen_fn(n)?;
    let keep = |drop: &str| -> Result<Structure> {
        f.induced_substructure(f.domain().iter().map(String::as_str).filter(|x| *x != drop))
    };
    let path = path_ids(n);
    let base = f.induced_substructure(path.iter().map(String::as_str))?;
    Diagram::inclusions(base, keep("b")?, keep("r")?)
}

fn g_signature() -> Signature {
    Signature::new([("B", 1), ("E", 2), ("Edir0", 2), ("Edir1", 2), ("R", 1)]).unwrap()
}

fn g_node(path: &str) -> String {
    format!("t{path}")
}

/// The tree structure of a shape: `Edir0` to left sons, `Edir1` to right
/// sons, `R` on the root, and a `B` vertex `b` joined to every leaf by an
/// undirected `E`-edge.
pub fn gen_g(shape: &TreeShape) -> Result<Structure> {
    if shape.leaves() < 2 {
        return Err(Error::InvalidParameter("shape needs an inner node".into()));
    }
    let mut b = Structure::builder(g_signature());
    b.add_element("b");
    b.add_tuple("B", ["b"]);
    b.add_tuple("R", [g_node("")]);
    for (path, leaf) in shape.nodes() {
        let v = g_node(&path);
        b.add_element(v.clone());
        if leaf {
            add_edge(&mut b, "E", "b", &v);
        } else {
            b.add_tuple("Edir0", [v.clone(), g_node(&format!("{path}0"))]);
            b.add_tuple("Edir1", [v, g_node(&format!("{path}1"))]);
        }
    }
    Ok(b.build().unwrap())
}

/// `L` is the tree, `R` the blue vertex with the leaves, `A` the leaves.
pub fn diagram_g(shape: &TreeShape) -> Result<Diagram> {
    let g = gen_g(shape)?;
    let leaves: Vec<String> = shape
        .nodes()
        .into_iter()
        .filter(|(_, leaf)| *leaf)
        .map(|(p, _)| g_node(&p))
        .collect();
    let left = g.induced_substructure(g.domain().iter().map(String::as_str).filter(|x| *x != "b"))?;
    let right = g.induced_substructure(leaves.iter().map(String::as_str).chain(["b"]))?;
    let base = g.induced_substructure(leaves.iter().map(String::as_str))?;
    Diagram::inclusions(base, left, right)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn letter(self) -> char {
        match self {
            Side::Left => 'L',
            Side::Right => 'R',
        }
    }
}

/// A colour per canonical embedding, in the order of
/// [`canonical_embeddings`].
pub type Coloring = Vec<Side>;

/// `LRRL…` rendering of a coloring.
pub fn coloring_string(c: &[Side]) -> String {
    c.iter().map(|s| s.letter()).collect()
}

pub fn parse_coloring(s: &str) -> Result<Coloring> {
    s.chars()
        .map(|ch| match ch {
            'L' | 'l' => Ok(Side::Left),
            'R' | 'r' => Ok(Side::Right),
            _ => Err(Error::Parse(format!("bad coloring letter `{ch}`"))),
        })
        .collect()
}

/// `J^C` together with the spots it was glued along.
#[derive(Clone, Debug)]
pub struct GluedStructure {
    pub structure: Structure,
    /// The canonical embeddings of `A` into `A⊗m`, in coloring order.
    pub spots: Vec<ElementMap>,
    /// Each spot composed with the inclusion of `A⊗m` into `J^C`.
    pub lifted: Vec<ElementMap>,
}

/// Fresh identifier for element `x` of the copy glued at spot `i`.
pub fn jc_copy_id(i: usize, width: usize, x: &str) -> String {
    format!("<{i:0width$},{x}>")
}

/// Glues onto `A⊗m`, along every canonical embedding `π`, a fresh copy of
/// `L` or `R` as chosen by the coloring.
pub fn build_jc(d: &Diagram, m: usize, coloring: &[Side]) -> Result<GluedStructure> {
    let spots = canonical_embeddings(&d.base, m)?;
    if coloring.len() != spots.len() {
        return Err(Error::InvalidParameter(format!(
            "coloring has {} entries for {} spots",
            coloring.len(),
            spots.len()
        )));
    }
    let j = &spots.target;
    let mut b = Structure::builder(j.signature().clone());
    for x in j.domain() {
        b.add_element(x.clone());
    }
    for sym in j.signature().symbols() {
        for t in j.tuples(&sym.name) {
            b.add_tuple(&sym.name, t);
        }
    }
    let width = spots.len().saturating_sub(1).to_string().len();
    for (i, (pi, &side)) in spots.members.iter().zip(coloring).enumerate() {
        let (s, emb) = d.side(side);
        // element of S ↦ its name in J^C
        let inverse: BTreeMap<&str, &str> = emb.iter().map(|(a, x)| (x, a)).collect();
        let name = |x: &str| -> String {
            match inverse.get(x) {
                Some(a) => pi.get(a).unwrap().to_owned(),
                None => jc_copy_id(i, width, x),
            }
        };
        for x in s.domain() {
            if !inverse.contains_key(x.as_str()) {
                b.add_element(name(x));
            }
        }
        for sym in s.signature().symbols() {
            for t in s.tuples(&sym.name) {
                b.add_tuple(&sym.name, t.iter().map(|x| name(x)));
            }
        }
    }
    let structure = b.build()?;
    let lifted = spots.members.clone();
    Ok(GluedStructure {
        structure,
        spots: spots.members,
        lifted,
    })
}

fn p_signature() -> Signature {
    Signature::new([("Edir", 2), ("S", 1), ("T", 1)]).unwrap()
}

/// The directed path on `n` nodes from an `S` node to a `T` node.
pub fn gen_pn(n: usize) -> Result<Structure> {
    if n < 1 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    let path = path_ids(n);
    let mut b = Structure::builder(p_signature()).elements(path.iter().cloned());
    b.add_tuple("S", [path[0].as_str()]);
    b.add_tuple("T", [path[n - 1].as_str()]);
    for w in path.windows(2) {
        b.add_tuple("Edir", [w[0].as_str(), w[1].as_str()]);
    }
    Ok(b.build().unwrap())
}

pub fn io_signature() -> Signature {
    p_signature()
        .union(&Signature::new([("I", 1), ("O", 1)]).unwrap())
        .unwrap()
}

/// Expands a structure with no directed path from an `S` node to a `T`
/// node by `I` (reachable from `S`) and `O` (the rest). A reachable `T` node
/// is reported with the path leading to it.
pub fn io_expansion(s: &Structure) -> Result<Structure> {
    if !s.signature().contains(&p_signature()) {
        return Err(Error::SignatureMismatch("expected symbols Edir, S, T".into()));
    }
    let mut succ: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for t in s.tuples("Edir") {
        succ.entry(t[0]).or_default().push(t[1]);
    }
    let mut parent: BTreeMap<&str, Option<&str>> = BTreeMap::new();
    let mut queue: VecDeque<&str> = VecDeque::new();
    for x in s.labeled("S") {
        parent.insert(x, None);
        queue.push_back(x);
    }
    while let Some(x) = queue.pop_front() {
        if s.holds("T", &[x]) {
            let mut path = vec![x];
            let mut cur = x;
            while let Some(Some(p)) = parent.get(cur) {
                path.push(p);
                cur = p;
            }
            path.reverse();
            return Err(Error::Precondition(format!(
                "T node reachable from S along {}",
                path.join(" -> ")
            )));
        }
        for &y in succ.get(x).map(Vec::as_slice).unwrap_or(&[]) {
            if !parent.contains_key(y) {
                parent.insert(y, Some(x));
                queue.push_back(y);
            }
        }
    }
    let expanded = s.expand(&io_signature())?;
    let inside: Vec<Vec<&str>> = parent.keys().map(|x| vec![*x]).collect();
    let outside: Vec<Vec<&str>> = s
        .domain()
        .iter()
        .map(String::as_str)
        .filter(|x| !parent.contains_key(x))
        .map(|x| vec![x])
        .collect();
    expanded.with_relation("I", &inside)?.with_relation("O", &outside)
}

/// `I` and `O` partition the domain, `S ⊆ I`, `T ⊆ O`, and no `Edir`-edge
/// leaves `I` for `O`.
pub fn cplus_check(s: &Structure) -> Result<bool> {
    if !s.signature().contains(&io_signature()) {
        return Err(Error::SignatureMismatch("expected symbols Edir, I, O, S, T".into()));
    }
    let i: BTreeSet<&str> = s.labeled("I").into_iter().collect();
    let o: BTreeSet<&str> = s.labeled("O").into_iter().collect();
    let partition = i.is_disjoint(&o) && i.len() + o.len() == s.len();
    let labels = s.labeled("S").iter().all(|x| i.contains(x)) && s.labeled("T").iter().all(|x| o.contains(x));
    let edges = s
        .tuples("Edir")
        .iter()
        .all(|t| !(i.contains(t[0]) && o.contains(t[1])));
    Ok(partition && labels && edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::morphisms::{count_homomorphisms, find_homomorphism, is_isomorphic};

    #[test]
    fn template_z2_triples() {
        let z2 = AbelianGroup::cyclic(2).unwrap();
        let t = build_template(&z2);
        assert_eq!(t.len(), 6);
        let triples: BTreeSet<&str> = t.labeled("triple").into_iter().collect();
        let expected: BTreeSet<&str> = ["(0,0,0)", "(0,1,1)", "(1,0,1)", "(1,1,0)"].into_iter().collect();
        assert_eq!(triples, expected);
        assert_eq!(t.labeled("C0"), vec!["0"]);
        assert_eq!(t.labeled("C1"), vec!["1"]);
        assert_eq!(build_template(&AbelianGroup::cyclic(3).unwrap()).len(), 12);
        assert_eq!(build_template(&AbelianGroup::cyclic(1).unwrap()).len(), 2);
        assert!(AbelianGroup::new(vec![]).is_err());
    }

    #[test]
    fn group_parsing_and_labels() {
        let g: AbelianGroup = "2x2".parse().unwrap();
        assert_eq!(g.size(), 4);
        assert_eq!(g.label(&[0, 1]), "0_1");
        assert_eq!(g.parse_element("1_1").unwrap(), vec![1, 1]);
        assert!(g.parse_element("2_0").is_err());
        assert_eq!(g.default_marking(), Some(vec![1, 0]));
        assert_eq!(build_template(&g).len(), 4 + 16);
        assert!("1x0".parse::<AbelianGroup>().is_err());
    }

    #[test]
    fn shapes() {
        let s: TreeShape = "((..)(..))".parse().unwrap();
        assert_eq!(s, TreeShape::perfect(2));
        assert_eq!(s.to_string(), "((..)(..))");
        assert_eq!(TreeShape::all_with_leaves(4).len(), 5);
        assert_eq!(TreeShape::all_with_leaves(5).len(), 14);
        assert!("((..)".parse::<TreeShape>().is_err());
        assert!("(..).".parse::<TreeShape>().is_err());
    }

    #[test]
    fn tree_instance_sizes() {
        assert_eq!(tree_instance(2, None).unwrap().len(), 4);
        assert_eq!(tree_instance(4, None).unwrap().len(), 10);
        assert_eq!(tree_instance(8, None).unwrap().len(), 22);
        assert!(tree_instance(6, None).is_err());
        let odd: TreeShape = "((..).)".parse().unwrap();
        assert_eq!(tree_instance(3, Some(&odd)).unwrap().len(), 5 + 2);
        let i = tree_instance(4, None).unwrap();
        assert_eq!(tree_root(&i).unwrap(), "n");
        assert_eq!(tree_leaves(&i), vec!["n00", "n01", "n10", "n11"]);
    }

    #[test]
    fn marking_solution_counts() {
        let z2 = AbelianGroup::cyclic(2).unwrap();
        let t = build_template(&z2);
        let i = tree_instance(4, None).unwrap();
        let m1 = marking(&i, &[1], &z2).unwrap();
        assert_eq!(count_homomorphisms(&m1, &t).unwrap(), 8);
        assert!(marking(&i, &[2], &z2).is_err());
    }

    #[test]
    fn lineq_diagram_sizes() {
        let z2 = AbelianGroup::cyclic(2).unwrap();
        let d = diagram_lineq(8, &z2, None).unwrap();
        assert_eq!((d.base.len(), d.left.len(), d.right.len()), (8, 22, 22));
        let d = diagram_lineq(2, &z2, None).unwrap();
        assert_eq!((d.base.len(), d.left.len()), (2, 4));
        assert!(diagram_lineq(4, &AbelianGroup::cyclic(1).unwrap(), None).is_err());
        assert!(diagram_lineq(4, &z2, Some(&[0])).is_err());
        assert!(diagram_lineq(6, &z2, None).is_err());
    }

    #[test]
    fn fn_family() {
        let f1 = gen_fn(1).unwrap();
        assert_eq!(f1.len(), 3);
        assert!(f1.holds("S", &["v01"]) && f1.holds("T", &["v01"]));
        let f3 = gen_fn(3).unwrap();
        assert_eq!(f3.len(), 5);
        assert_eq!(f3.tuples("Edir").len(), 2);
        assert_eq!(f3.tuples("E").len(), 12);
        assert!(f3.is_connected());
        assert!(find_homomorphism(&f3, &gen_fn(4).unwrap()).unwrap().is_none());
        let d = diagram_fn(3).unwrap();
        assert_eq!((d.base.len(), d.left.len(), d.right.len()), (3, 4, 4));
        assert!(gen_fn(0).is_err());
    }

    #[test]
    fn g_family() {
        let s = TreeShape::perfect(2);
        let g = gen_g(&s).unwrap();
        assert_eq!(g.len(), 8);
        assert!(g.is_connected());
        assert_eq!(gen_g(&TreeShape::perfect(4)).unwrap().len(), 32);
        let d = diagram_g(&s).unwrap();
        assert_eq!((d.base.len(), d.left.len(), d.right.len()), (4, 7, 5));
        assert!(gen_g(&TreeShape::Leaf).is_err());
    }

    #[test]
    fn jc_sizes() {
        let d = diagram_fn(3).unwrap();
        let jc = build_jc(&d, 2, &[Side::Left; 8]).unwrap();
        assert_eq!(jc.structure.len(), 14);
        let mixed: Vec<Side> = (0..8).map(|i| if i % 3 == 0 { Side::Left } else { Side::Right }).collect();
        assert_eq!(build_jc(&d, 2, &mixed).unwrap().structure.len(), 14);
        let z2 = AbelianGroup::cyclic(2).unwrap();
        let d = diagram_lineq(2, &z2, None).unwrap();
        assert_eq!(build_jc(&d, 2, &[Side::Right; 4]).unwrap().structure.len(), 12);
        assert!(build_jc(&d, 2, &[Side::Right; 3]).is_err());
    }

    #[test]
    fn jc_with_empty_base_is_blowup() {
        let sig = fn_signature();
        let a = Structure::empty(sig.clone());
        let d = Diagram::new(a.clone(), a.clone(), a.clone(), ElementMap::new(), ElementMap::new()).unwrap();
        let jc = build_jc(&d, 3, &[Side::Left]).unwrap();
        assert!(jc.structure.is_empty());
    }

    #[test]
    fn amalgam_rebuilds_fn() {
        let d = diagram_fn(4).unwrap();
        let am = crate::structure::free_amalgam(&d.base, &d.left, &d.left_emb, &d.right, &d.right_emb).unwrap();
        assert!(is_isomorphic(&am.amalgam, &gen_fn(4).unwrap()).unwrap());
    }

    #[test]
    fn paths_and_io() {
        let p3 = gen_pn(3).unwrap();
        assert_eq!(p3.tuples("Edir").len(), 2);
        assert!(io_expansion(&gen_pn(2).unwrap()).is_err());
        let s = Structure::builder(p_signature())
            .elements(["s", "x", "t"])
            .tuple("S", ["s"])
            .tuple("T", ["t"])
            .tuple("Edir", ["s", "x"])
            .build()
            .unwrap();
        let e = io_expansion(&s).unwrap();
        assert_eq!(e.labeled("I"), vec!["s", "x"]);
        assert_eq!(e.labeled("O"), vec!["t"]);
        assert!(cplus_check(&e).unwrap());
        let bad = e.with_relation("Edir", &[vec!["x", "t"]]).unwrap();
        assert!(!cplus_check(&bad).unwrap());
        assert!(cplus_check(&s).is_err());
    }
}
