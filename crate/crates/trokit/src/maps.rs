//! Subspace maps: `Map U`, `Op φ`, `Op φ⊥`, intertwiner spaces, ortho-map
//! testing, the sampled reflexive hull with one-sided certification, and the
//! rank-one membership criterion.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::numkernel::linalg::{self, CMat, CVec};
use crate::numkernel::{
    gaussian_vector, op_norm, range_projection, OperatorSubspace, Projection, ToleranceConfig,
};

/// A 0-preserving join-continuous projection map, realized either through a
/// backing subspace (exact `Map U`) or through a finite list of generating
/// `(L, φ(L))` pairs evaluated by joins.
#[derive(Debug, Clone)]
pub struct SubspaceMap {
    source_dim: usize,
    target_dim: usize,
    carrier: Option<OperatorSubspace>,
    generators: Vec<(Projection, Projection)>,
}

impl SubspaceMap {
    /// Exact map of a subspace; generator pairs may be attached later.
    pub fn from_subspace(u: &OperatorSubspace) -> Self {
        SubspaceMap {
            source_dim: u.cols(),
            target_dim: u.rows(),
            carrier: Some(u.clone()),
            generators: Vec::new(),
        }
    }

    /// Map determined by finitely many generator pairs. Validates
    /// `φ(0) = 0` and monotonicity on the stored pairs.
    pub fn from_generators(
        source_dim: usize,
        target_dim: usize,
        generators: Vec<(Projection, Projection)>,
        tol: &ToleranceConfig,
    ) -> Result<Self> {
        for (l, m) in &generators {
            if l.dim() != source_dim || m.dim() != target_dim {
                return Err(Error::dims(
                    format!("({source_dim},{target_dim})"),
                    format!("({},{})", l.dim(), m.dim()),
                ));
            }
            if l.is_zero(tol) && !m.is_zero(tol) {
                return Err(Error::Precondition("map does not preserve zero".into()));
            }
        }
        for (l1, m1) in &generators {
            for (l2, m2) in &generators {
                if l1.leq(l2, tol) && !m1.leq(m2, tol) {
                    return Err(Error::Precondition(
                        "generator pairs violate monotonicity".into(),
                    ));
                }
            }
        }
        Ok(SubspaceMap {
            source_dim,
            target_dim,
            carrier: None,
            generators,
        })
    }

    pub fn source_dim(&self) -> usize {
        self.source_dim
    }

    pub fn target_dim(&self) -> usize {
        self.target_dim
    }

    pub fn generators(&self) -> &[(Projection, Projection)] {
        &self.generators
    }

    pub fn carrier(&self) -> Option<&OperatorSubspace> {
        self.carrier.as_ref()
    }

    /// Attaches generator pairs (e.g. a pattern semilattice) to a map that
    /// may already carry a backing subspace.
    pub fn with_generators(mut self, generators: Vec<(Projection, Projection)>) -> Self {
        self.generators = generators;
        self
    }

    /// `φ(P)`: exact via the carrier when available, otherwise the join of
    /// the stored values over generators below `P`.
    pub fn evaluate(&self, p: &Projection, tol: &ToleranceConfig) -> Result<Projection> {
        if p.dim() != self.source_dim {
            return Err(Error::dims(
                format!("{}", self.source_dim),
                format!("{}", p.dim()),
            ));
        }
        if let Some(u) = &self.carrier {
            return map_of(u, p, tol);
        }
        let mut acc = Projection::zero(self.target_dim);
        for (l, m) in &self.generators {
            if l.leq(p, tol) {
                acc = acc.join(m, tol)?;
            }
        }
        Ok(acc)
    }
}

/// `(Map U)(P)`: projection onto the closed subspace spanned by
/// `{Bx : B ∈ U, x ∈ ran P}`. The basis is unit-HS and `‖P‖ ≤ 1`, so the
/// rank of the pushed stack is decided against the unit scale; a push that
/// is zero up to rounding yields the zero projection.
pub fn map_of(u: &OperatorSubspace, p: &Projection, tol: &ToleranceConfig) -> Result<Projection> {
    if p.dim() != u.cols() {
        return Err(Error::dims(format!("{}", u.cols()), format!("{}", p.dim())));
    }
    let pushed: Vec<CMat> = u.basis().iter().map(|b| b * p.matrix()).collect();
    crate::numkernel::range_projection_floored(u.rows(), &pushed, tol, 1.0)
}

/// Constraint family selector for [`op_space`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OpMode {
    /// `{T : (I−M) T L = 0}`
    Op,
    /// `{T : M T (I−L) = 0}`
    OpPerp,
    /// `{T : T L = M T}`; equals `Op ∩ OpPerp` pair by pair.
    Intertwiner,
}

/// Solves the stacked linear system cut out by the constraint pairs.
pub fn op_space(
    source_dim: usize,
    target_dim: usize,
    constraints: &[(Projection, Projection)],
    mode: OpMode,
    tol: &ToleranceConfig,
) -> Result<OperatorSubspace> {
    let (m, n) = (source_dim, target_dim);
    let nm = n * m;
    let eye_n = linalg::identity(n);
    let eye_m = linalg::identity(m);
    let mut blocks: Vec<CMat> = Vec::with_capacity(constraints.len());
    for (l, mm) in constraints {
        if l.dim() != m || mm.dim() != n {
            return Err(Error::dims(
                format!("({m},{n})"),
                format!("({},{})", l.dim(), mm.dim()),
            ));
        }
        let block = match mode {
            OpMode::Op => {
                let i_minus_m = &eye_n - mm.matrix();
                linalg::kron(&l.matrix().transpose(), &i_minus_m)
            }
            OpMode::OpPerp => {
                let i_minus_l = &eye_m - l.matrix();
                linalg::kron(&i_minus_l.transpose(), mm.matrix())
            }
            OpMode::Intertwiner => {
                linalg::kron(&l.matrix().transpose(), &eye_n) - linalg::kron(&eye_m, mm.matrix())
            }
        };
        blocks.push(block);
    }
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut stacked = CMat::zeros(rows, nm);
    let mut at = 0;
    for b in &blocks {
        stacked.rows_mut(at, b.nrows()).copy_from(b);
        at += b.nrows();
    }
    let null = linalg::null_space(&stacked, tol.rank_tol, 1.0)?;
    let basis = (0..null.ncols())
        .map(|j| linalg::unvec(&null.column(j).into_owned(), n, m))
        .collect();
    Ok(OperatorSubspace::from_orthonormal(n, m, basis))
}

/// Per-projection ortho-map residuals `‖χ(L) χ(L⊥)‖` for the map of `u`.
#[derive(Debug, Clone)]
pub struct OrthoReport {
    pub tested: Vec<Projection>,
    pub failures: Vec<(Projection, f64)>,
}

impl OrthoReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

pub fn is_ortho_map_on(
    u: &OperatorSubspace,
    ls: &[Projection],
    tol: &ToleranceConfig,
) -> Result<OrthoReport> {
    let mut failures = Vec::new();
    for l in ls {
        let chi_l = map_of(u, l, tol)?;
        let chi_lc = map_of(u, &l.complement(), tol)?;
        let residual = op_norm(&(chi_l.matrix() * chi_lc.matrix()));
        if residual > tol.eq_tol {
            failures.push((l.clone(), residual));
        }
    }
    Ok(OrthoReport {
        tested: ls.to_vec(),
        failures,
    })
}

/// Superset of `Ref U` cut out by sampled vector constraints
/// `{T : (I−Q(x)) T x = 0}`, `Q(x)` the range projection of `{Bx}`.
///
/// Every constraint is sound for any `x`, so the result always contains
/// `Ref U ⊇ U` and shrinking to `dim U` certifies reflexivity exactly. The
/// probe vectors mix three families so that the measure-zero strata where
/// `Q(x)` degenerates actually get hit:
///
/// * plain Gaussians and coordinate vectors;
/// * an orthonormal basis of `ker U` (where the constraint reads `Tx = 0`);
/// * Gaussian combinations of random subsets of the right singular vectors
///   of a random element of `U`, which align with the block strata of a
///   normalizing space.
///
/// Batches (default size `4·m`) are intersected until the dimension is
/// stable for three consecutive batches, with a hard cap of 50.
pub fn ref_hull_sampled(
    u: &OperatorSubspace,
    batch: usize,
    seed: u64,
    tol: &ToleranceConfig,
) -> Result<OperatorSubspace> {
    let m = u.cols();
    let n = u.rows();
    let nm = n * m;
    let batch = if batch == 0 { 4 * m } else { batch };
    let mut rng = ChaCha12Rng::seed_from_u64(seed);

    // Exact kernel directions of the whole space.
    let adjoints: Vec<CMat> = u.basis().iter().map(|b| b.adjoint()).collect();
    let kernel = if u.is_zero() {
        linalg::identity(m)
    } else {
        let mut cols = CMat::zeros(m, adjoints.len() * n);
        for (i, a) in adjoints.iter().enumerate() {
            cols.columns_mut(i * n, n).copy_from(a);
        }
        linalg::null_space(&cols.adjoint(), tol.rank_tol, 0.0)?
    };

    let mut candidates = linalg::identity(nm);
    let mut stable = 0usize;
    let mut last_dim = nm;
    for round in 0..50 {
        if candidates.ncols() <= u.dim() {
            break;
        }
        let mut probes: Vec<CVec> = Vec::with_capacity(batch + m + kernel.ncols());
        if round == 0 {
            for i in 0..m {
                let mut e = CVec::zeros(m);
                e[i] = linalg::cone();
                probes.push(e);
            }
            for j in 0..kernel.ncols() {
                probes.push(kernel.column(j).into_owned());
            }
        }
        // Strata directions of a random element of U. Each singular
        // direction is probed alone every round (the strata are measure
        // zero, so leaving them to chance can miss constraints before the
        // stability window closes), then random subsets fill the batch.
        let mut a = CMat::zeros(n, m);
        for b in u.basis() {
            let z = crate::numkernel::gaussian_matrix(1, 1, &mut rng)[(0, 0)];
            a += b * z;
        }
        let f = linalg::svd(&a)?;
        let r = linalg::rank_at(&f.sigma, tol.rank_tol);
        for i in 0..r {
            probes.push(f.v.column(i).into_owned());
        }
        while probes.len() < batch {
            let x = if r > 0 && rng.random::<bool>() {
                // Gaussian combination of a random nonempty subset of the
                // singular directions plus (sometimes) the kernel.
                let mut x = CVec::zeros(m);
                let mut nonempty = false;
                for i in 0..r {
                    if rng.random::<bool>() {
                        let z = crate::numkernel::gaussian_matrix(1, 1, &mut rng)[(0, 0)];
                        x += f.v.column(i).into_owned() * z;
                        nonempty = true;
                    }
                }
                for j in 0..kernel.ncols() {
                    if rng.random_range(0.0..1.0) < 0.25 {
                        let z = crate::numkernel::gaussian_matrix(1, 1, &mut rng)[(0, 0)];
                        x += kernel.column(j).into_owned() * z;
                        nonempty = true;
                    }
                }
                if !nonempty {
                    gaussian_vector(m, &mut rng)
                } else {
                    x
                }
            } else {
                gaussian_vector(m, &mut rng)
            };
            probes.push(x);
        }

        let mut stacked = CMat::zeros(probes.len() * n, nm);
        for (b, raw) in probes.iter().enumerate() {
            // Constraints are invariant under scaling x; unit norm keeps
            // the stack on the scale the null-space floor expects.
            let nx = raw.norm();
            if nx == 0.0 {
                continue;
            }
            let x = raw.unscale(nx);
            let pushed: Vec<CMat> = u
                .basis()
                .iter()
                .map(|op| CMat::from_column_slice(n, 1, (op * &x).as_slice()))
                .collect();
            let q = crate::numkernel::range_projection_floored(n, &pushed, tol, 1.0)?;
            let iq = linalg::identity(n) - q.matrix();
            let xt = CMat::from_fn(1, m, |_, j| x[j]);
            let constraint = linalg::kron(&xt, &iq);
            stacked.rows_mut(b * n, n).copy_from(&constraint);
        }
        let reduced = &stacked * &candidates;
        let keep = linalg::null_space(&reduced, tol.rank_tol, 1.0)?;
        candidates = &candidates * keep;
        if candidates.ncols() == last_dim {
            stable += 1;
            if stable >= 3 {
                break;
            }
        } else {
            stable = 0;
            last_dim = candidates.ncols();
        }
    }
    let basis = (0..candidates.ncols())
        .map(|j| linalg::unvec(&candidates.column(j).into_owned(), n, m))
        .collect();
    Ok(OperatorSubspace::from_orthonormal(n, m, basis))
}

/// True iff the sampled hull collapses onto `u`. A `true` verdict is an
/// exact reflexivity certificate; `false` only reports that the sampled
/// over-approximation stayed strictly larger.
pub fn is_reflexive_certified(
    u: &OperatorSubspace,
    seed: u64,
    tol: &ToleranceConfig,
) -> Result<bool> {
    let hull = ref_hull_sampled(u, 0, seed, tol)?;
    crate::numkernel::subspace_equal(&hull, u, tol)
}

/// Sampled hull together with the verdict, for callers that report the
/// excess basis.
pub fn reflexivity_excess(
    u: &OperatorSubspace,
    seed: u64,
    tol: &ToleranceConfig,
) -> Result<(bool, OperatorSubspace)> {
    let hull = ref_hull_sampled(u, 0, seed, tol)?;
    let equal = crate::numkernel::subspace_equal(&hull, u, tol)?;
    Ok((equal, hull))
}

/// Rank-one membership criterion: `y⊗x*` belongs to the op-space of `chi`
/// iff for every generator `L` the four conditions `Lx ≠ 0`, `L⊥x = 0`,
/// `χ(L)⊥y = 0`, `χ(L)y ≠ 0` agree, with "zero" meaning norm below
/// `eq_tol` relative to `‖x‖` (resp. `‖y‖`). The zero operator belongs to
/// every subspace.
pub fn rank_one_member(
    x: &CVec,
    y: &CVec,
    chi: &SubspaceMap,
    tol: &ToleranceConfig,
) -> Result<bool> {
    if x.len() != chi.source_dim() || y.len() != chi.target_dim() {
        return Err(Error::dims(
            format!("({},{})", chi.source_dim(), chi.target_dim()),
            format!("({},{})", x.len(), y.len()),
        ));
    }
    let nx = x.norm();
    let ny = y.norm();
    if nx <= tol.eq_tol || ny <= tol.eq_tol {
        return Ok(true);
    }
    for (l, m) in chi.generators() {
        let lx = (l.matrix() * x).norm();
        let lcx = (x - l.matrix() * x).norm();
        let my = (m.matrix() * y).norm();
        let mcy = (y - m.matrix() * y).norm();
        let c1 = lx > tol.eq_tol * nx;
        let c2 = lcx <= tol.eq_tol * nx;
        let c3 = mcy <= tol.eq_tol * ny;
        let c4 = my > tol.eq_tol * ny;
        if !(c1 == c2 && c2 == c3 && c3 == c4) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
#[path = "maps_tests.rs"]
mod tests;
