//! The totally atomic masa-bimodule calculus: support patterns, the
//! label-function characterization, nest generation, rank-one sum
//! decomposition and the diagonal core.
//!
//! Both masas are fixed as the diagonal algebras in the standard bases;
//! atoms are coordinate singletons. Callers with other masas conjugate by a
//! unitary first.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::maps::{self, OpMode, SubspaceMap};
use crate::numkernel::linalg::{self, CMat};
use crate::numkernel::{hs_norm, OperatorSubspace, Projection, ToleranceConfig};

/// A boolean relation `κ ⊆ [m]×[n]`: the finite ω-support of a
/// diagonal-masa bimodule. Pairs are `(x, y)` with `x` an input (column)
/// index and `y` an output (row) index, 0-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportPattern {
    m: usize,
    n: usize,
    pairs: BTreeSet<(usize, usize)>,
}

impl SupportPattern {
    pub fn new(m: usize, n: usize, pairs: BTreeSet<(usize, usize)>) -> Result<Self> {
        for &(x, y) in &pairs {
            if x >= m || y >= n {
                return Err(Error::Precondition(format!(
                    "pair ({x},{y}) out of range for {m}x{n} pattern"
                )));
            }
        }
        Ok(SupportPattern { m, n, pairs })
    }

    pub fn empty(m: usize, n: usize) -> Self {
        SupportPattern {
            m,
            n,
            pairs: BTreeSet::new(),
        }
    }

    pub fn full(m: usize, n: usize) -> Self {
        let pairs = (0..m)
            .flat_map(|x| (0..n).map(move |y| (x, y)))
            .collect();
        SupportPattern { m, n, pairs }
    }

    /// Decodes a bitmask over `[m]×[n]` (bit `x*n + y`); handy for the
    /// exhaustive oracles.
    pub fn from_mask(m: usize, n: usize, mask: u64) -> Self {
        let mut pairs = BTreeSet::new();
        for x in 0..m {
            for y in 0..n {
                if mask >> (x * n + y) & 1 == 1 {
                    pairs.insert((x, y));
                }
            }
        }
        SupportPattern { m, n, pairs }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn pairs(&self) -> &BTreeSet<(usize, usize)> {
        &self.pairs
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        self.pairs.contains(&(x, y))
    }

    pub fn union(&self, other: &SupportPattern) -> Result<SupportPattern> {
        if self.m != other.m || self.n != other.n {
            return Err(Error::dims(
                format!("{}x{}", self.m, self.n),
                format!("{}x{}", other.m, other.n),
            ));
        }
        let pairs = self.pairs.union(&other.pairs).copied().collect();
        Ok(SupportPattern {
            m: self.m,
            n: self.n,
            pairs,
        })
    }

    pub fn is_subset_of(&self, other: &SupportPattern) -> bool {
        self.pairs.is_subset(&other.pairs)
    }
}

/// Component labels `f: [m] → labels ∪ {⊥}`, `g: [n] → labels ∪ {⊥}` with
/// `κ = {(x,y) : f(x) = g(y) ≠ ⊥}`. Labels are integers ordered by the
/// smallest input index of their component; `None` encodes ⊥.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelPair {
    f: Vec<Option<u32>>,
    g: Vec<Option<u32>>,
}

impl LabelPair {
    pub fn f(&self) -> &[Option<u32>] {
        &self.f
    }

    pub fn g(&self) -> &[Option<u32>] {
        &self.g
    }

    pub fn component_count(&self) -> u32 {
        self.f
            .iter()
            .chain(self.g.iter())
            .flatten()
            .copied()
            .max()
            .map_or(0, |v| v + 1)
    }

    /// The pattern `{(x,y) : f(x) = g(y) ≠ ⊥}`.
    pub fn reconstruct(&self) -> SupportPattern {
        let mut pairs = BTreeSet::new();
        for (x, fx) in self.f.iter().enumerate() {
            for (y, gy) in self.g.iter().enumerate() {
                if fx.is_some() && fx == gy {
                    pairs.insert((x, y));
                }
            }
        }
        SupportPattern {
            m: self.f.len(),
            n: self.g.len(),
            pairs,
        }
    }
}

/// Outcome of the biclique check on a pattern.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PatternCheck {
    Normalizing(LabelPair),
    /// A pair inside a connected component that the pattern misses.
    Missing { x: usize, y: usize },
}

impl PatternCheck {
    pub fn is_normalizing(&self) -> bool {
        matches!(self, PatternCheck::Normalizing(_))
    }
}

/// ω-support of the smallest pattern subspace containing `u`: `(x,y) ∈ κ`
/// iff some basis element has `|entry(y,x)| > eq_tol`.
pub fn pattern_of(u: &OperatorSubspace, tol: &ToleranceConfig) -> SupportPattern {
    let mut pairs = BTreeSet::new();
    for b in u.basis() {
        for x in 0..u.cols() {
            for y in 0..u.rows() {
                if b[(y, x)].norm() > tol.eq_tol {
                    pairs.insert((x, y));
                }
            }
        }
    }
    SupportPattern {
        m: u.cols(),
        n: u.rows(),
        pairs,
    }
}

/// Span of the matrix units `{E_{y,x} : (x,y) ∈ κ}`.
pub fn pattern_space(kappa: &SupportPattern) -> OperatorSubspace {
    let units: Vec<CMat> = kappa
        .pairs
        .iter()
        .map(|&(x, y)| {
            let mut e = CMat::zeros(kappa.n, kappa.m);
            e[(y, x)] = linalg::cone();
            e
        })
        .collect();
    OperatorSubspace::from_orthonormal(kappa.n, kappa.m, units)
}

/// Biclique test: the pattern is normalizing iff every connected component
/// of its bipartite graph is a complete bipartite block. On success the
/// labels reproduce the pattern exactly; on failure the lexicographically
/// smallest missing pair inside a component is the witness.
pub fn is_normalizing_pattern(kappa: &SupportPattern) -> PatternCheck {
    let m = kappa.m;
    let n = kappa.n;
    // Union-find over [m] ⊔ [n]: inputs are 0..m, outputs m..m+n.
    let mut parent: Vec<usize> = (0..m + n).collect();
    fn find(parent: &mut Vec<usize>, mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for &(x, y) in &kappa.pairs {
        let rx = find(&mut parent, x);
        let ry = find(&mut parent, m + y);
        if rx != ry {
            parent[rx.max(ry)] = rx.min(ry);
        }
    }
    let root_of_x: Vec<usize> = (0..m).map(|x| find(&mut parent, x)).collect();
    let root_of_y: Vec<usize> = (0..n).map(|y| find(&mut parent, m + y)).collect();

    // Components carrying at least one edge, keyed by root, ordered by
    // smallest input index.
    let mut roots: Vec<usize> = Vec::new();
    for x in 0..m {
        let r = root_of_x[x];
        let has_edge = kappa.pairs.iter().any(|&(px, _)| px == x);
        if has_edge && !roots.contains(&r) {
            roots.push(r);
        }
    }
    let mut f = vec![None; m];
    let mut g = vec![None; n];
    for (label, &r) in roots.iter().enumerate() {
        let xs: Vec<usize> = (0..m)
            .filter(|&x| root_of_x[x] == r && kappa.pairs.iter().any(|&(px, _)| px == x))
            .collect();
        let ys: Vec<usize> = (0..n)
            .filter(|&y| root_of_y[y] == r && kappa.pairs.iter().any(|&(_, py)| py == y))
            .collect();
        let edges = kappa
            .pairs
            .iter()
            .filter(|&&(x, _)| root_of_x[x] == r)
            .count();
        if edges != xs.len() * ys.len() {
            for &x in &xs {
                for &y in &ys {
                    if !kappa.pairs.contains(&(x, y)) {
                        return PatternCheck::Missing { x, y };
                    }
                }
            }
            unreachable!("edge count below product implies a missing pair");
        }
        for &x in &xs {
            f[x] = Some(label as u32);
        }
        for &y in &ys {
            g[y] = Some(label as u32);
        }
    }
    PatternCheck::Normalizing(LabelPair { f, g })
}

/// Labels of a normalizing pattern; errors with the witness otherwise.
pub fn labels_of(kappa: &SupportPattern) -> Result<LabelPair> {
    match is_normalizing_pattern(kappa) {
        PatternCheck::Normalizing(labels) => Ok(labels),
        PatternCheck::Missing { x, y } => Err(Error::PatternNotNormalizing { x, y }),
    }
}

/// Abelian-corner classification of a pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphKind {
    /// Every input appearing in κ has exactly one output: κ is the graph of
    /// a function (the abelian-`[UU*]` case). Bijection-like patterns land
    /// here too.
    Graph,
    /// Every output appearing in κ has exactly one input.
    ReverseGraph,
    Neither,
}

pub fn graph_check(kappa: &SupportPattern) -> GraphKind {
    let is_graph = (0..kappa.m).all(|x| {
        let images = kappa.pairs.iter().filter(|&&(px, _)| px == x).count();
        images <= 1
    });
    if is_graph {
        return GraphKind::Graph;
    }
    let is_reverse = (0..kappa.n).all(|y| {
        let preimages = kappa.pairs.iter().filter(|&&(_, py)| py == y).count();
        preimages <= 1
    });
    if is_reverse {
        GraphKind::ReverseGraph
    } else {
        GraphKind::Neither
    }
}

/// A finite lattice of diagonal projections, stored as subsets of
/// `[dim]` and kept closed under union and intersection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiagonalLattice {
    dim: usize,
    members: Vec<BTreeSet<usize>>,
}

impl DiagonalLattice {
    /// Validates ranges and closure under union/intersection.
    pub fn try_new(dim: usize, members: Vec<BTreeSet<usize>>) -> Result<Self> {
        let mut sorted: Vec<BTreeSet<usize>> = Vec::new();
        for s in members {
            if s.iter().any(|&i| i >= dim) {
                return Err(Error::NotALattice(format!(
                    "member contains an index outside [0,{dim})"
                )));
            }
            if !sorted.contains(&s) {
                sorted.push(s);
            }
        }
        sorted.sort_by(|a, b| (a.len(), a).cmp(&(b.len(), b)));
        let lattice = DiagonalLattice {
            dim,
            members: sorted,
        };
        for a in &lattice.members {
            for b in &lattice.members {
                let cup: BTreeSet<usize> = a.union(b).copied().collect();
                let cap: BTreeSet<usize> = a.intersection(b).copied().collect();
                if !lattice.members.contains(&cup) {
                    return Err(Error::NotALattice(format!(
                        "union of {a:?} and {b:?} is missing"
                    )));
                }
                if !lattice.members.contains(&cap) {
                    return Err(Error::NotALattice(format!(
                        "intersection of {a:?} and {b:?} is missing"
                    )));
                }
            }
        }
        Ok(lattice)
    }

    /// Closes the seed sets under union and intersection.
    pub fn generate(dim: usize, seeds: &[BTreeSet<usize>]) -> Result<Self> {
        for s in seeds {
            if s.iter().any(|&i| i >= dim) {
                return Err(Error::NotALattice(format!(
                    "seed contains an index outside [0,{dim})"
                )));
            }
        }
        let mut members: Vec<BTreeSet<usize>> = Vec::new();
        for s in seeds {
            if !members.contains(s) {
                members.push(s.clone());
            }
        }
        loop {
            let mut added = false;
            let snapshot = members.clone();
            for a in &snapshot {
                for b in &snapshot {
                    let cup: BTreeSet<usize> = a.union(b).copied().collect();
                    if !members.contains(&cup) {
                        members.push(cup);
                        added = true;
                    }
                    let cap: BTreeSet<usize> = a.intersection(b).copied().collect();
                    if !members.contains(&cap) {
                        members.push(cap);
                        added = true;
                    }
                }
            }
            if !added {
                break;
            }
        }
        DiagonalLattice::try_new(dim, members)
    }

    /// The full nest `∅ ⊂ {0} ⊂ {0,1} ⊂ … ⊂ [dim]`.
    pub fn full_nest(dim: usize) -> Self {
        let members = (0..=dim).map(|k| (0..k).collect()).collect();
        DiagonalLattice { dim, members }
    }

    /// The Boolean lattice of all unions of the given blocks (plus ∅).
    pub fn boolean_from_blocks(dim: usize, blocks: &[BTreeSet<usize>]) -> Result<Self> {
        let b = blocks.len();
        if b > 16 {
            return Err(Error::SizeCap(format!(
                "{b} blocks would enumerate 2^{b} members"
            )));
        }
        let mut members = Vec::with_capacity(1 << b);
        for mask in 0..(1u32 << b) {
            let mut s = BTreeSet::new();
            for (i, block) in blocks.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    s.extend(block.iter().copied());
                }
            }
            members.push(s);
        }
        DiagonalLattice::try_new(dim, members)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn members(&self) -> &[BTreeSet<usize>] {
        &self.members
    }

    pub fn contains_zero(&self) -> bool {
        self.members.iter().any(|s| s.is_empty())
    }

    pub fn contains_full(&self) -> bool {
        self.members.iter().any(|s| s.len() == self.dim)
    }

    pub fn contains_member(&self, s: &BTreeSet<usize>) -> bool {
        self.members.contains(s)
    }

    pub fn projections(&self) -> Vec<Projection> {
        self.members
            .iter()
            .map(|s| {
                let coords: Vec<usize> = s.iter().copied().collect();
                Projection::from_coords(self.dim, &coords)
            })
            .collect()
    }

    /// Minimal nonzero members.
    pub fn atoms(&self) -> Vec<BTreeSet<usize>> {
        self.members
            .iter()
            .filter(|s| !s.is_empty())
            .filter(|s| {
                !self
                    .members
                    .iter()
                    .any(|t| !t.is_empty() && t.is_subset(s) && t != *s)
            })
            .cloned()
            .collect()
    }
}

/// Totally ordered chain generating the Boolean lattice spanned by the
/// input members together with the `0₊` block: `0`, then `Q ⊕ I_{0₊}` for
/// `Q` running over the partial unions of the lattice atoms in ascending
/// order (the empty union included whenever `0₊ ≠ 0`).
///
/// The input must be a Boolean sublattice of diagonal projections living on
/// the complement of `zero_plus_atoms`.
pub fn nest_generators(
    lattice: &DiagonalLattice,
    zero_plus_atoms: &BTreeSet<usize>,
    tol: &ToleranceConfig,
) -> Result<Vec<Projection>> {
    let _ = tol;
    let dim = lattice.dim;
    if zero_plus_atoms.iter().any(|&i| i >= dim) {
        return Err(Error::Precondition(format!(
            "zero_plus atom outside [0,{dim})"
        )));
    }
    let unit: BTreeSet<usize> = (0..dim).filter(|i| !zero_plus_atoms.contains(i)).collect();
    for s in &lattice.members {
        if !s.is_subset(&unit) {
            return Err(Error::NotBoolean(format!(
                "member {s:?} meets the zero_plus block"
            )));
        }
    }
    if !lattice.contains_zero() || !lattice.contains_member(&unit) {
        return Err(Error::NotBoolean(
            "lattice must contain 0 and the complement of the zero_plus block".into(),
        ));
    }
    let atoms = lattice.atoms();
    // Boolean means: atoms partition the unit and all their unions appear.
    let mut covered: BTreeSet<usize> = BTreeSet::new();
    for a in &atoms {
        if a.iter().any(|i| covered.contains(i)) {
            return Err(Error::NotBoolean("atoms are not disjoint".into()));
        }
        covered.extend(a.iter().copied());
    }
    if covered != unit {
        return Err(Error::NotBoolean("atoms do not cover the unit".into()));
    }
    if lattice.members.len() != 1usize << atoms.len() {
        return Err(Error::NotBoolean(format!(
            "expected 2^{} members, found {}",
            atoms.len(),
            lattice.members.len()
        )));
    }
    for s in &lattice.members {
        let from_atoms: BTreeSet<usize> = atoms
            .iter()
            .filter(|a| a.is_subset(s))
            .flat_map(|a| a.iter().copied())
            .collect();
        if &from_atoms != s {
            return Err(Error::NotBoolean(format!(
                "member {s:?} is not a union of atoms"
            )));
        }
    }

    let mut chain: Vec<BTreeSet<usize>> = vec![BTreeSet::new()];
    let mut running: BTreeSet<usize> = zero_plus_atoms.clone();
    if !running.is_empty() {
        chain.push(running.clone());
    }
    for atom in &atoms {
        running.extend(atom.iter().copied());
        chain.push(running.clone());
    }
    chain.dedup();
    Ok(chain
        .into_iter()
        .map(|s| {
            let coords: Vec<usize> = s.into_iter().collect();
            Projection::from_coords(dim, &coords)
        })
        .collect())
}

/// Decomposes a κ-supported operator into exactly `rank(T)` rank-one
/// operators, each supported in a single block of the pattern, summing back
/// to `T`.
pub fn rank_one_sum(
    t: &CMat,
    kappa: &SupportPattern,
    tol: &ToleranceConfig,
) -> Result<Vec<CMat>> {
    if t.nrows() != kappa.n || t.ncols() != kappa.m {
        return Err(Error::dims(
            format!("{}x{}", kappa.n, kappa.m),
            format!("{}x{}", t.nrows(), t.ncols()),
        ));
    }
    let labels = labels_of(kappa)?;
    let threshold = tol.eq_tol * hs_norm(t).max(1.0);
    for x in 0..kappa.m {
        for y in 0..kappa.n {
            if !kappa.contains(x, y) && t[(y, x)].norm() > threshold {
                return Err(Error::NotSupported {
                    x,
                    y,
                    value: t[(y, x)].norm(),
                });
            }
        }
    }
    let sigma_max = linalg::singular_values(t).first().copied().unwrap_or(0.0);
    if sigma_max == 0.0 {
        return Ok(Vec::new());
    }
    let mut dyads = Vec::new();
    for label in 0..labels.component_count() {
        let xs: Vec<usize> = (0..kappa.m)
            .filter(|&x| labels.f()[x] == Some(label))
            .collect();
        let ys: Vec<usize> = (0..kappa.n)
            .filter(|&y| labels.g()[y] == Some(label))
            .collect();
        let mut block = CMat::zeros(ys.len(), xs.len());
        for (bi, &y) in ys.iter().enumerate() {
            for (bj, &x) in xs.iter().enumerate() {
                block[(bi, bj)] = t[(y, x)];
            }
        }
        let f = linalg::svd(&block)?;
        for (i, &s) in f.sigma.iter().enumerate() {
            if s <= tol.rank_tol * sigma_max {
                break;
            }
            let mut dyad = CMat::zeros(kappa.n, kappa.m);
            let u_i = f.u.column(i);
            let v_i = f.v.column(i);
            for (bi, &y) in ys.iter().enumerate() {
                for (bj, &x) in xs.iter().enumerate() {
                    dyad[(y, x)] = u_i[bi] * v_i[bj].conj() * s;
                }
            }
            dyads.push(dyad);
        }
    }
    Ok(dyads)
}

/// Minimal masa-bimodule core `Op φ ∩ Op φ⊥` of a diagonally generated map;
/// normalizing by construction.
pub fn diag_core(phi: &SubspaceMap, tol: &ToleranceConfig) -> Result<OperatorSubspace> {
    let m = phi.source_dim();
    let n = phi.target_dim();
    let op = maps::op_space(m, n, phi.generators(), OpMode::Op, tol)?;
    let op_perp = maps::op_space(m, n, phi.generators(), OpMode::OpPerp, tol)?;
    op.intersect(&op_perp, tol)
}

/// The `S₁`-indexed generator pairs `(L_σ, χ(L_σ))` of a normalizing
/// pattern: for every union σ of components, `L_σ` is the corresponding
/// input projection joined with the kernel block, and `χ(L_σ)` the matching
/// output projection. Capped at 16 components.
pub fn pattern_semilattice(kappa: &SupportPattern) -> Result<Vec<(Projection, Projection)>> {
    let labels = labels_of(kappa)?;
    let count = labels.component_count() as usize;
    if count > 16 {
        return Err(Error::SizeCap(format!(
            "{count} components would enumerate 2^{count} semilattice members"
        )));
    }
    let zero_plus: Vec<usize> = (0..kappa.m)
        .filter(|&x| labels.f()[x].is_none())
        .collect();
    let mut out = Vec::with_capacity(1 << count);
    for mask in 0..(1u32 << count) {
        let mut l_coords = zero_plus.clone();
        let mut m_coords = Vec::new();
        for label in 0..count as u32 {
            if mask >> label & 1 == 1 {
                l_coords.extend((0..kappa.m).filter(|&x| labels.f()[x] == Some(label)));
                m_coords.extend((0..kappa.n).filter(|&y| labels.g()[y] == Some(label)));
            }
        }
        out.push((
            Projection::from_coords(kappa.m, &l_coords),
            Projection::from_coords(kappa.n, &m_coords),
        ));
    }
    Ok(out)
}

#[cfg(test)]
#[path = "masa_tests.rs"]
mod tests;
