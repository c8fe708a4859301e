//! Seeded random instances: triple-closed spaces from Gaussian generators,
//! normalizing patterns from random labels, diagonal lattices, CSL pairs and
//! semi-normalizers built through lattice maps.

use std::collections::BTreeSet;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::error::Result;
use crate::maps::{self, OpMode};
use crate::masa::{DiagonalLattice, SupportPattern};
use crate::normalizers::{alg_of_lattice, CslAlgebra};
use crate::numkernel::linalg::CMat;
use crate::numkernel::{gaussian_matrix, OperatorSubspace, Projection, ToleranceConfig};
use crate::tro;

pub fn rng_from(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

/// Gaussian generators and their triple closure.
pub fn random_tro(
    n: usize,
    m: usize,
    gens: usize,
    seed: u64,
    tol: &ToleranceConfig,
) -> Result<(Vec<CMat>, OperatorSubspace)> {
    let mut rng = rng_from(seed);
    let mats: Vec<CMat> = (0..gens.max(1))
        .map(|_| gaussian_matrix(n, m, &mut rng))
        .collect();
    let closure = tro::triple_closure(&mats, tol)?;
    Ok((mats, closure))
}

/// Normalizing pattern from random labels: each input/output draws ⊥ or one
/// of `k` labels, and the pattern is `{(x,y) : f(x) = g(y) ≠ ⊥}`.
pub fn random_normalizing_pattern(m: usize, n: usize, seed: u64) -> SupportPattern {
    let mut rng = rng_from(seed);
    let k = rng.random_range(1..=m.min(n).max(1)) as u32;
    let draw = |rng: &mut ChaCha12Rng| -> Option<u32> {
        if rng.random_range(0.0..1.0) < 0.15 {
            None
        } else {
            Some(rng.random_range(0..k))
        }
    };
    let f: Vec<Option<u32>> = (0..m).map(|_| draw(&mut rng)).collect();
    let g: Vec<Option<u32>> = (0..n).map(|_| draw(&mut rng)).collect();
    let mut pairs = BTreeSet::new();
    for (x, fx) in f.iter().enumerate() {
        for (y, gy) in g.iter().enumerate() {
            if fx.is_some() && fx == gy {
                pairs.insert((x, y));
            }
        }
    }
    SupportPattern::new(m, n, pairs).expect("labels stay in range")
}

/// Arbitrary (not necessarily normalizing) pattern with the given density.
pub fn random_pattern(m: usize, n: usize, density: f64, seed: u64) -> SupportPattern {
    let mut rng = rng_from(seed);
    let mut pairs = BTreeSet::new();
    for x in 0..m {
        for y in 0..n {
            if rng.random_range(0.0..1.0) < density {
                pairs.insert((x, y));
            }
        }
    }
    SupportPattern::new(m, n, pairs).expect("coordinates stay in range")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LatticeKind {
    Nest,
    Boolean,
    General,
}

/// Random diagonal lattice containing 0 and I.
pub fn random_lattice(dim: usize, kind: LatticeKind, seed: u64) -> Result<DiagonalLattice> {
    let mut rng = rng_from(seed);
    match kind {
        LatticeKind::Nest => {
            // Prefixes of a random permutation at random cut points.
            let mut perm: Vec<usize> = (0..dim).collect();
            for i in (1..dim).rev() {
                let j = rng.random_range(0..=i);
                perm.swap(i, j);
            }
            let mut members: Vec<BTreeSet<usize>> = vec![BTreeSet::new()];
            let mut at = 0;
            while at < dim {
                let step = rng.random_range(1..=dim - at);
                at += step;
                members.push(perm[..at].iter().copied().collect());
            }
            DiagonalLattice::try_new(dim, members)
        }
        LatticeKind::Boolean => {
            let blocks = random_partition(dim, &mut rng);
            DiagonalLattice::boolean_from_blocks(dim, &blocks)
        }
        LatticeKind::General => {
            let seeds: Vec<BTreeSet<usize>> = (0..rng.random_range(1..=3))
                .map(|_| {
                    (0..dim)
                        .filter(|_| rng.random_range(0.0..1.0) < 0.5)
                        .collect()
                })
                .chain([BTreeSet::new(), (0..dim).collect()])
                .collect();
            DiagonalLattice::generate(dim, &seeds)
        }
    }
}

fn random_partition<R: Rng>(dim: usize, rng: &mut R) -> Vec<BTreeSet<usize>> {
    let block_count = rng.random_range(1..=dim.min(8));
    let mut blocks: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); block_count];
    for i in 0..dim {
        blocks[rng.random_range(0..block_count)].insert(i);
    }
    blocks.retain(|b| !b.is_empty());
    blocks
}

/// Random CSL pair `(B on C^n, A on C^m)`.
pub fn random_csl_pair(
    n: usize,
    m: usize,
    seed: u64,
    tol: &ToleranceConfig,
) -> Result<(CslAlgebra, CslAlgebra)> {
    let mut rng = rng_from(seed);
    let kinds = [LatticeKind::Nest, LatticeKind::Boolean, LatticeKind::General];
    let kb = kinds[rng.random_range(0..kinds.len())];
    let ka = kinds[rng.random_range(0..kinds.len())];
    let lb = random_lattice(n, kb, rng.random())?;
    let la = random_lattice(m, ka, rng.random())?;
    Ok((alg_of_lattice(&lb, tol)?, alg_of_lattice(&la, tol)?))
}

/// Random join-homomorphism `φ : L₁ → L₂` (0-preserving, monotone,
/// join-continuous), built by assigning random values to the atoms of the
/// join-generated structure and extending by joins.
pub fn random_lattice_map(
    l1: &DiagonalLattice,
    l2: &DiagonalLattice,
    seed: u64,
    tol: &ToleranceConfig,
) -> Result<Vec<(Projection, Projection)>> {
    let mut rng = rng_from(seed);
    // Assign each join-irreducible of L₁ a random member of L₂. In a
    // distributive lattice of sets the irreducibles are join-prime, so
    // extending by joins lands back in L₂ and is join-continuous.
    let irreducibles: Vec<&BTreeSet<usize>> = l1
        .members()
        .iter()
        .filter(|s| {
            if s.is_empty() {
                return false;
            }
            let mut union: BTreeSet<usize> = BTreeSet::new();
            for t in l1.members() {
                if !t.is_empty() && t.is_subset(s) && t != *s {
                    union.extend(t.iter().copied());
                }
            }
            union != **s
        })
        .collect();
    let values: Vec<&BTreeSet<usize>> = irreducibles
        .iter()
        .map(|_| {
            let i = rng.random_range(0..l2.members().len());
            &l2.members()[i]
        })
        .collect();
    let mut pairs = Vec::new();
    for member in l1.members() {
        let mut image: BTreeSet<usize> = BTreeSet::new();
        for (irr, val) in irreducibles.iter().zip(&values) {
            if irr.is_subset(member) {
                image.extend(val.iter().copied());
            }
        }
        // The join of L₂ members is again in L₂ (closure), so the image is a
        // legal value.
        let lp = Projection::from_coords(l1.dim(), &member.iter().copied().collect::<Vec<_>>());
        let mp = Projection::from_coords(l2.dim(), &image.iter().copied().collect::<Vec<_>>());
        pairs.push((lp, mp));
    }
    let _ = tol;
    Ok(pairs)
}

/// A semi-normalizer of `B` into `A = Alg L₁`, constructed as a Gaussian
/// element of the intertwiner space `U_φ` of a random lattice map; the
/// construction is sound by the cover theorem. Resamples a few times when
/// the intertwiner space degenerates to zero.
pub fn random_semi_normalizer(
    b: &CslAlgebra,
    a: &CslAlgebra,
    seed: u64,
    tol: &ToleranceConfig,
) -> Result<CMat> {
    let mut rng = rng_from(seed);
    for _ in 0..8 {
        let pairs = random_lattice_map(a.lattice(), b.lattice(), rng.random(), tol)?;
        let space = maps::op_space(a.dim(), b.dim(), &pairs, OpMode::Intertwiner, tol)?;
        if space.is_zero() {
            continue;
        }
        let mut t = CMat::zeros(b.dim(), a.dim());
        for basis in space.basis() {
            let z = gaussian_matrix(1, 1, &mut rng)[(0, 0)];
            t += basis * z;
        }
        return Ok(t);
    }
    // All sampled maps were degenerate; the zero operator is always a
    // semi-normalizer.
    Ok(CMat::zeros(b.dim(), a.dim()))
}

/// Random operator of prescribed rank supported in a normalizing pattern,
/// built from per-block dyads with singular values in `[1/2, 2]`. Returns
/// the operator and its exact rank (which may be capped by the pattern).
pub fn random_supported_operator(
    kappa: &SupportPattern,
    want_rank: usize,
    seed: u64,
    tol: &ToleranceConfig,
) -> Result<(CMat, usize)> {
    let labels = crate::masa::labels_of(kappa)?;
    let mut rng = rng_from(seed);
    let mut capacity = Vec::new();
    for label in 0..labels.component_count() {
        let xs = labels.f().iter().filter(|&&v| v == Some(label)).count();
        let ys = labels.g().iter().filter(|&&v| v == Some(label)).count();
        capacity.push(xs.min(ys));
    }
    let total_cap: usize = capacity.iter().sum();
    let rank = want_rank.min(total_cap);
    // Spread the rank over blocks.
    let mut alloc = vec![0usize; capacity.len()];
    let mut left = rank;
    while left > 0 {
        let i = rng.random_range(0..capacity.len());
        if alloc[i] < capacity[i] {
            alloc[i] += 1;
            left -= 1;
        }
    }
    let mut t = CMat::zeros(kappa.n(), kappa.m());
    for (label, &r) in alloc.iter().enumerate() {
        if r == 0 {
            continue;
        }
        let xs: Vec<usize> = (0..kappa.m())
            .filter(|&x| labels.f()[x] == Some(label as u32))
            .collect();
        let ys: Vec<usize> = (0..kappa.n())
            .filter(|&y| labels.g()[y] == Some(label as u32))
            .collect();
        let gu = gaussian_matrix(ys.len(), r, &mut rng);
        let gv = gaussian_matrix(xs.len(), r, &mut rng);
        let qu = crate::numkernel::linalg::range_basis(&gu, tol.rank_tol)?;
        let qv = crate::numkernel::linalg::range_basis(&gv, tol.rank_tol)?;
        debug_assert_eq!(qu.ncols(), r);
        debug_assert_eq!(qv.ncols(), r);
        for i in 0..r {
            let sigma = rng.random_range(0.5..=2.0);
            for (bi, &y) in ys.iter().enumerate() {
                for (bj, &x) in xs.iter().enumerate() {
                    t[(y, x)] += qu[(bi, i)] * qv[(bj, i)].conj() * sigma;
                }
            }
        }
    }
    Ok((t, rank))
}
