//! Exact-within-tolerance dense complex linear algebra: operator subspaces
//! under the Hilbert–Schmidt inner product, projections, commutants, polar
//! decomposition and seeded random samplers.
//!
//! Every operation here is a pure function of its inputs plus an explicit
//! 64-bit seed; values can move freely between threads.

pub mod linalg;
mod random;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};

pub use linalg::{hs_inner, hs_norm, op_norm, CMat, CVec, Complex64};
pub use random::{gaussian_matrix, gaussian_vector};

/// Relative and absolute cutoffs used by every rank, equality and clustering
/// decision in the crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToleranceConfig {
    /// Relative singular-value cutoff; all subspace dimensions are defined
    /// through it.
    pub rank_tol: f64,
    /// Subspace / projection equality tolerance on HS and operator norms.
    pub eq_tol: f64,
    /// Minimal eigenvalue separation for spectral clustering.
    pub gap_tol: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        ToleranceConfig {
            rank_tol: 1e-10,
            eq_tol: 1e-8,
            gap_tol: 1e-6,
        }
    }
}

impl ToleranceConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rank_tol > 0.0 && self.rank_tol < 1.0) {
            return Err(Error::InvalidTolerance(format!(
                "rank_tol must lie in (0,1), got {}",
                self.rank_tol
            )));
        }
        if !(self.eq_tol > 0.0) || !(self.gap_tol > 0.0) {
            return Err(Error::InvalidTolerance(
                "eq_tol and gap_tol must be strictly positive".into(),
            ));
        }
        Ok(())
    }
}

/// A complex Hermitian idempotent within tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    matrix: CMat,
}

impl Projection {
    /// Validates `‖P − P*‖ ≤ τ` and `‖P² − P‖ ≤ τ`, which pins the spectrum
    /// to a neighbourhood of {0,1}.
    pub fn try_new(matrix: CMat, tol: &ToleranceConfig) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::dims(
                "square matrix",
                format!("{}x{}", matrix.nrows(), matrix.ncols()),
            ));
        }
        let herm = op_norm(&(&matrix - matrix.adjoint()));
        if herm > tol.eq_tol {
            return Err(Error::NotAProjection(format!(
                "Hermitian defect {herm:.3e}"
            )));
        }
        let idem = op_norm(&(&matrix * &matrix - &matrix));
        if idem > tol.eq_tol {
            return Err(Error::NotAProjection(format!(
                "idempotency defect {idem:.3e}"
            )));
        }
        Ok(Projection { matrix })
    }

    /// Wraps a matrix already known to be a projection (e.g. `B B*` for an
    /// orthonormal `B`); symmetrizes to shed rounding noise.
    pub(crate) fn new_unchecked(matrix: CMat) -> Self {
        let sym = (&matrix + matrix.adjoint()).scale(0.5);
        Projection { matrix: sym }
    }

    pub fn zero(dim: usize) -> Self {
        Projection {
            matrix: CMat::zeros(dim, dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Projection {
            matrix: linalg::identity(dim),
        }
    }

    /// Diagonal 0/1 projection onto the given coordinates (0-based).
    pub fn from_coords(dim: usize, coords: &[usize]) -> Self {
        let mut m = CMat::zeros(dim, dim);
        for &c in coords {
            assert!(c < dim, "coordinate {c} out of range for dim {dim}");
            m[(c, c)] = linalg::cone();
        }
        Projection { matrix: m }
    }

    /// Projection onto the column space of `basis`, whose columns must be
    /// orthonormal.
    pub fn from_orthonormal_columns(basis: &CMat) -> Self {
        Projection::new_unchecked(basis * basis.adjoint())
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn complement(&self) -> Self {
        Projection {
            matrix: linalg::identity(self.dim()) - &self.matrix,
        }
    }

    /// Rank read off the trace (exact for genuine projections).
    pub fn rank(&self) -> usize {
        self.matrix.trace().re.round() as usize
    }

    pub fn is_zero(&self, tol: &ToleranceConfig) -> bool {
        op_norm(&self.matrix) <= tol.eq_tol
    }

    pub fn is_identity(&self, tol: &ToleranceConfig) -> bool {
        op_norm(&(linalg::identity(self.dim()) - &self.matrix)) <= tol.eq_tol
    }

    pub fn approx_eq(&self, other: &Projection, tol: &ToleranceConfig) -> bool {
        self.dim() == other.dim() && op_norm(&(&self.matrix - &other.matrix)) <= tol.eq_tol
    }

    /// `‖P Q‖`; zero means mutually orthogonal ranges.
    pub fn orthogonality_defect(&self, other: &Projection) -> f64 {
        op_norm(&(&self.matrix * &other.matrix))
    }

    /// `P ≤ Q` within tolerance, i.e. `Q P = P`.
    pub fn leq(&self, other: &Projection, tol: &ToleranceConfig) -> bool {
        op_norm(&(&other.matrix * &self.matrix - &self.matrix)) <= tol.eq_tol
    }

    /// `‖[P, A]‖` commutation residual.
    pub fn commutation_residual(&self, a: &CMat) -> f64 {
        op_norm(&(&self.matrix * a - a * &self.matrix))
    }

    /// Join (projection onto the sum of ranges).
    pub fn join(&self, other: &Projection, tol: &ToleranceConfig) -> Result<Projection> {
        let mut cols = CMat::zeros(self.dim(), 2 * self.dim());
        cols.columns_mut(0, self.dim()).copy_from(&self.matrix);
        cols.columns_mut(self.dim(), self.dim()).copy_from(&other.matrix);
        let b = linalg::range_basis(&cols, tol.rank_tol)?;
        Ok(Projection::from_orthonormal_columns(&b))
    }
}

/// A linear subspace of complex `n×m` matrices stored as an HS-orthonormal
/// basis; the universal carrier for the spaces handled by this crate.
#[derive(Debug, Clone)]
pub struct OperatorSubspace {
    rows: usize,
    cols: usize,
    basis: Vec<CMat>,
}

impl OperatorSubspace {
    pub fn zero(rows: usize, cols: usize) -> Self {
        OperatorSubspace {
            rows,
            cols,
            basis: Vec::new(),
        }
    }

    /// The full space `B(C^cols, C^rows)`, spanned by matrix units.
    pub fn full(rows: usize, cols: usize) -> Self {
        let mut basis = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                let mut e = CMat::zeros(rows, cols);
                e[(i, j)] = linalg::cone();
                basis.push(e);
            }
        }
        OperatorSubspace { rows, cols, basis }
    }

    /// Builds a subspace from an orthonormal family without re-factorizing.
    pub(crate) fn from_orthonormal(rows: usize, cols: usize, basis: Vec<CMat>) -> Self {
        OperatorSubspace { rows, cols, basis }
    }

    /// Output dimension `n` (matrix rows).
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Input dimension `m` (matrix columns).
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[CMat] {
        &self.basis
    }

    pub fn is_zero(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn check_shape(&self, t: &CMat) -> Result<()> {
        if t.nrows() != self.rows || t.ncols() != self.cols {
            return Err(Error::dims(
                format!("{}x{}", self.rows, self.cols),
                format!("{}x{}", t.nrows(), t.ncols()),
            ));
        }
        Ok(())
    }

    /// Orthogonal projection of `t` onto the subspace.
    pub fn project(&self, t: &CMat) -> CMat {
        let mut acc = CMat::zeros(self.rows, self.cols);
        for b in &self.basis {
            let c = hs_inner(b, t);
            acc += b.scale(1.0) * c;
        }
        acc
    }

    /// Adjoint space `{T* : T ∈ U}` (again orthonormal).
    pub fn adjoint_space(&self) -> OperatorSubspace {
        OperatorSubspace {
            rows: self.cols,
            cols: self.rows,
            basis: self.basis.iter().map(|b| b.adjoint()).collect(),
        }
    }

    pub fn contains(&self, t: &CMat, tol: &ToleranceConfig) -> Result<(bool, f64)> {
        subspace_contains(self, t, tol)
    }

    pub fn equals(&self, other: &OperatorSubspace, tol: &ToleranceConfig) -> Result<bool> {
        subspace_equal(self, other, tol)
    }

    /// Span of the union of both bases.
    pub fn sum(&self, other: &OperatorSubspace, tol: &ToleranceConfig) -> Result<OperatorSubspace> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::dims(
                format!("{}x{}", self.rows, self.cols),
                format!("{}x{}", other.rows, other.cols),
            ));
        }
        let mut all = self.basis.clone();
        all.extend(other.basis.iter().cloned());
        if all.is_empty() {
            return Ok(OperatorSubspace::zero(self.rows, self.cols));
        }
        hs_orthonormalize(&all, tol)
    }

    /// Intersection, computed as the joint null space of the two orthogonal
    /// complements.
    pub fn intersect(
        &self,
        other: &OperatorSubspace,
        tol: &ToleranceConfig,
    ) -> Result<OperatorSubspace> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::dims(
                format!("{}x{}", self.rows, self.cols),
                format!("{}x{}", other.rows, other.cols),
            ));
        }
        let n = self.rows * self.cols;
        let pu = gram_projector(self, n);
        let pv = gram_projector(other, n);
        let eye = linalg::identity(n);
        let mut stacked = CMat::zeros(2 * n, n);
        stacked.rows_mut(0, n).copy_from(&(&eye - &pu));
        stacked.rows_mut(n, n).copy_from(&(&eye - &pv));
        let null = linalg::null_space(&stacked, tol.rank_tol, 1.0)?;
        let basis = (0..null.ncols())
            .map(|j| linalg::unvec(&null.column(j).into_owned(), self.rows, self.cols))
            .collect();
        Ok(OperatorSubspace {
            rows: self.rows,
            cols: self.cols,
            basis,
        })
    }

    /// Grows the span by `candidate` if its out-of-span part exceeds
    /// `rank_tol` on the scale of the (unit-norm) basis; returns true when
    /// the dimension increased. Callers feed products of orthonormal
    /// elements, so an absolute threshold is the right rank rule here — a
    /// candidate that is itself cancellation noise must not self-normalize
    /// into a new direction. Twice-applied Gram–Schmidt keeps the basis
    /// orthonormal to working precision.
    pub(crate) fn absorb(&mut self, candidate: &CMat, rank_tol: f64) -> bool {
        let mut r = candidate.clone();
        for _ in 0..2 {
            for b in &self.basis {
                let c = hs_inner(b, &r);
                r -= b * c;
            }
        }
        let res = hs_norm(&r);
        if res > rank_tol.max(1e-13) {
            self.basis.push(r.unscale(res));
            true
        } else {
            false
        }
    }
}

fn gram_projector(u: &OperatorSubspace, n: usize) -> CMat {
    let mut p = CMat::zeros(n, n);
    for b in u.basis() {
        let v = linalg::vectorize(b);
        p += &v * v.adjoint();
    }
    p
}

/// HS-orthonormal basis of the span of `mats`; the dimension is the numerical
/// rank of the vectorized stack at `rank_tol` relative to the largest
/// singular value.
pub fn hs_orthonormalize(mats: &[CMat], tol: &ToleranceConfig) -> Result<OperatorSubspace> {
    if mats.is_empty() {
        return Err(Error::dims("at least one matrix", "empty list"));
    }
    let (rows, cols) = mats[0].shape();
    for m in mats {
        if m.shape() != (rows, cols) {
            return Err(Error::dims(
                format!("{rows}x{cols}"),
                format!("{}x{}", m.nrows(), m.ncols()),
            ));
        }
    }
    let stack = linalg::stack_vectorized(mats);
    let basis_cols = linalg::range_basis(&stack, tol.rank_tol)?;
    let basis = (0..basis_cols.ncols())
        .map(|j| linalg::unvec(&basis_cols.column(j).into_owned(), rows, cols))
        .collect();
    Ok(OperatorSubspace { rows, cols, basis })
}

/// Distance from `t` to the subspace, and whether it lies inside at
/// `eq_tol · max(1, ‖t‖__HS)`.
pub fn subspace_contains(
    u: &OperatorSubspace,
    t: &CMat,
    tol: &ToleranceConfig,
) -> Result<(bool, f64)> {
    u.check_shape(t)?;
    let residual = t - u.project(t);
    let distance = hs_norm(&residual);
    let scale = hs_norm(t).max(1.0);
    Ok((distance <= tol.eq_tol * scale, distance))
}

/// Equal iff dimensions agree and each basis lies in the other span.
pub fn subspace_equal(
    u: &OperatorSubspace,
    v: &OperatorSubspace,
    tol: &ToleranceConfig,
) -> Result<bool> {
    if (u.rows, u.cols) != (v.rows, v.cols) {
        return Err(Error::dims(
            format!("{}x{}", u.rows, u.cols),
            format!("{}x{}", v.rows, v.cols),
        ));
    }
    if u.dim() != v.dim() {
        return Ok(false);
    }
    for b in u.basis() {
        if !subspace_contains(v, b, tol)?.0 {
            return Ok(false);
        }
    }
    for b in v.basis() {
        if !subspace_contains(u, b, tol)?.0 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Commutant `{X : XG = GX and XG* = G*X for all G}` of the *-algebra
/// generated by `gens`; always contains the identity. An empty generator
/// list yields the full `d×d` matrix algebra.
pub fn commutant(dim: usize, gens: &[CMat], tol: &ToleranceConfig) -> Result<OperatorSubspace> {
    for g in gens {
        if g.nrows() != dim || g.ncols() != dim {
            return Err(Error::dims(
                format!("{dim}x{dim}"),
                format!("{}x{}", g.nrows(), g.ncols()),
            ));
        }
    }
    if gens.is_empty() {
        return Ok(OperatorSubspace::full(dim, dim));
    }
    // The commutant is invariant under scaling each generator; normalize so
    // the constraint stack sits on the unit scale.
    let normalized: Vec<CMat> = gens
        .iter()
        .filter(|g| hs_norm(g) > 0.0)
        .map(|g| g.unscale(hs_norm(g)))
        .collect();
    if normalized.is_empty() {
        return Ok(OperatorSubspace::full(dim, dim));
    }
    let eye = linalg::identity(dim);
    let n2 = dim * dim;
    let mut constraints = CMat::zeros(2 * normalized.len() * n2, n2);
    for (k, g) in normalized.iter().enumerate() {
        // XG = GX  ⟺  (G^T ⊗ I − I ⊗ G) vec X = 0
        let row0 = 2 * k * n2;
        let c1 = linalg::kron(&g.transpose(), &eye) - linalg::kron(&eye, g);
        constraints.rows_mut(row0, n2).copy_from(&c1);
        let ga = g.adjoint();
        let c2 = linalg::kron(&ga.transpose(), &eye) - linalg::kron(&eye, &ga);
        constraints.rows_mut(row0 + n2, n2).copy_from(&c2);
    }
    let null = linalg::null_space(&constraints, tol.rank_tol, 1.0)?;
    let basis = (0..null.ncols())
        .map(|j| linalg::unvec(&null.column(j).into_owned(), dim, dim))
        .collect();
    Ok(OperatorSubspace {
        rows: dim,
        cols: dim,
        basis,
    })
}

/// Polar decomposition `T = phase · modulus` with `modulus = (T*T)^{1/2}`
/// and `phase` the partial isometry over singular values above
/// `rank_tol · σ_max`. The zero matrix yields `(0, 0)`.
pub fn polar(t: &CMat, tol: &ToleranceConfig) -> Result<(CMat, CMat)> {
    let f = linalg::svd(t)?;
    let r = linalg::rank_at(&f.sigma, tol.rank_tol);
    let ur = f.u.columns(0, r);
    let vr = f.v.columns(0, r);
    let phase = ur * vr.adjoint();
    let mut modulus = CMat::zeros(t.ncols(), t.ncols());
    for (i, &s) in f.sigma.iter().enumerate() {
        let vi = f.v.column(i);
        modulus += (vi * vi.adjoint()).scale(s);
    }
    Ok((phase, modulus))
}

/// Orthogonal projection onto the span of all columns of all `mats`
/// (each `rows × anything`), rank decided at `rank_tol` relative to the
/// largest singular value; empty input yields the zero projection.
pub fn range_projection(rows: usize, mats: &[CMat], tol: &ToleranceConfig) -> Result<Projection> {
    range_projection_floored(rows, mats, tol, 0.0)
}

/// Range projection whose rank rule is `σ > rank_tol · max(σ_max, floor)`.
/// Callers that push unit-scale data through operators (map evaluation,
/// hull constraints) pass `floor = 1` so a stack that is genuinely zero up
/// to rounding collapses to the zero projection instead of full rank.
pub(crate) fn range_projection_floored(
    rows: usize,
    mats: &[CMat],
    tol: &ToleranceConfig,
    floor: f64,
) -> Result<Projection> {
    let total: usize = mats.iter().map(|m| m.ncols()).sum();
    if total == 0 {
        return Ok(Projection::zero(rows));
    }
    let mut stacked = CMat::zeros(rows, total);
    let mut at = 0;
    for m in mats {
        if m.nrows() != rows {
            return Err(Error::dims(format!("{rows} rows"), format!("{} rows", m.nrows())));
        }
        stacked.columns_mut(at, m.ncols()).copy_from(m);
        at += m.ncols();
    }
    let f = linalg::svd(&stacked)?;
    let reference = f.sigma.first().copied().unwrap_or(0.0).max(floor);
    let r = if reference <= 0.0 {
        0
    } else {
        f.sigma
            .iter()
            .take_while(|&&s| s > tol.rank_tol * reference)
            .count()
    };
    let b = f.u.columns(0, r).into_owned();
    Ok(Projection::from_orthonormal_columns(&b))
}

/// Spectral projection of a random Hermitian element of the commutant of
/// `algebra`'s basis, with eigenvalue clusters separated by more than
/// `gap_tol`. Resamples (bounded) when the spectrum fails to split; for a
/// trivial commutant the result is 0 or I.
pub fn sample_commuting_projection(
    algebra: &OperatorSubspace,
    seed: u64,
    tol: &ToleranceConfig,
) -> Result<Projection> {
    let mut sampler = CommutingProjectionSampler::new(algebra, seed, tol)?;
    sampler.sample()
}

/// Repeated-draw version of [`sample_commuting_projection`]: the commutant
/// is factored once and each call costs one eigendecomposition.
pub struct CommutingProjectionSampler {
    dim: usize,
    commutant: OperatorSubspace,
    gap_tol: f64,
    rng: ChaCha12Rng,
}

impl CommutingProjectionSampler {
    pub fn new(algebra: &OperatorSubspace, seed: u64, tol: &ToleranceConfig) -> Result<Self> {
        if algebra.rows() != algebra.cols() {
            return Err(Error::dims(
                "square matrices",
                format!("{}x{}", algebra.rows(), algebra.cols()),
            ));
        }
        let dim = algebra.rows();
        let commutant = commutant(dim, algebra.basis(), tol)?;
        Ok(CommutingProjectionSampler {
            dim,
            commutant,
            gap_tol: tol.gap_tol,
            rng: ChaCha12Rng::seed_from_u64(seed),
        })
    }

    pub fn commutant(&self) -> &OperatorSubspace {
        &self.commutant
    }

    pub fn sample(&mut self) -> Result<Projection> {
        let dim = self.dim;
        let mut clusters: Vec<Vec<usize>> = Vec::new();
        let mut eig = None;
        for _attempt in 0..16 {
            let mut h = CMat::zeros(dim, dim);
            for b in self.commutant.basis() {
                let z = random::gaussian_scalar(&mut self.rng);
                h += b * z;
            }
            let h = (&h + h.adjoint()).scale(0.5);
            let e = linalg::hermitian_eigen(&h)?;
            clusters = cluster_by_gap(&e.values, self.gap_tol);
            let split = clusters.len() > 1;
            eig = Some(e);
            if split || self.commutant.dim() <= 1 {
                break;
            }
        }
        let eig = eig.expect("at least one attempt");
        // Uniformly random union of clusters; 0 and I are admissible.
        let chosen: Vec<&Vec<usize>> = clusters
            .iter()
            .filter(|_| self.rng.random::<bool>())
            .collect();
        let mut p = CMat::zeros(dim, dim);
        for cluster in chosen {
            for &i in cluster {
                let col = eig.vectors.column(i);
                p += col * col.adjoint();
            }
        }
        Ok(Projection::new_unchecked(p))
    }
}

/// Groups sorted values into clusters separated by more than `gap`.
pub(crate) fn cluster_by_gap(sorted: &[f64], gap: f64) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = Vec::new();
    for i in 0..sorted.len() {
        match out.last_mut() {
            Some(last) if sorted[i] - sorted[*last.last().unwrap()] <= gap => last.push(i),
            _ => out.push(vec![i]),
        }
    }
    out
}

/// Deterministic sub-seed derivation for fanning one seed across instances.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    // splitmix64 step
    let mut z = seed
        .wrapping_add(0x9e3779b97f4a7c15u64.wrapping_mul(index.wrapping_add(1)));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}
