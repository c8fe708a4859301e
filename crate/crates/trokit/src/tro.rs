//! Normalizing (triple-product-closed) spaces of operators: closure,
//! membership, kernel/range profile, essential part, linking algebra,
//! partial isometries and block decomposition.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::masa::{self, PatternCheck, SupportPattern};
use crate::numkernel::linalg::{self, CMat};
use crate::numkernel::{
    self, gaussian_matrix, hs_orthonormalize, range_projection, subspace_equal, OperatorSubspace,
    Projection, ToleranceConfig,
};

/// Kernel/range data of a subspace: `zero_plus` projects onto the joint
/// kernel, `i_minus` onto the closed range; the space is essential when the
/// first vanishes and the second is the identity.
#[derive(Debug, Clone)]
pub struct TroProfile {
    pub zero_plus: Projection,
    pub i_minus: Projection,
    pub essential: bool,
    pub k1_dim: usize,
    pub k2_dim: usize,
}

/// The unital *-algebra on `C^n ⊕ C^m` whose corners are `[UU*]+CI`, `U`,
/// `U*` and `[U*U]+CI`.
#[derive(Debug, Clone)]
pub struct LinkingAlgebra {
    target_dim: usize,
    source_dim: usize,
    space: OperatorSubspace,
}

/// Ordered list of pairs `(E_k, F_k)` of mutually orthogonal projections
/// with `U = ⊕_k F_k B(C^m, C^n) E_k`.
#[derive(Debug, Clone)]
pub struct BlockDecomposition {
    pub blocks: Vec<(Projection, Projection)>,
}

/// Smallest linear subspace containing `gens` and closed under
/// `(A,B,C) ↦ AB*C`. Iterates span augmentation over all ordered basis
/// triples per round until the dimension survives a full round.
pub fn triple_closure(gens: &[CMat], tol: &ToleranceConfig) -> Result<OperatorSubspace> {
    let seed = hs_orthonormalize(gens, tol)?;
    triple_closure_space(&seed, tol)
}

/// Triple closure of an already-orthonormalized space.
pub fn triple_closure_space(
    u: &OperatorSubspace,
    tol: &ToleranceConfig,
) -> Result<OperatorSubspace> {
    let mut space = u.clone();
    let cap = space.rows() * space.cols();
    loop {
        if space.dim() == cap {
            break;
        }
        let snapshot = space.basis().to_vec();
        let mut grew = false;
        'round: for a in &snapshot {
            for b in &snapshot {
                let ab = a * b.adjoint();
                for c in &snapshot {
                    let prod = &ab * c;
                    grew |= space.absorb(&prod, tol.rank_tol);
                    if space.dim() == cap {
                        break 'round;
                    }
                }
            }
        }
        if !grew {
            break;
        }
    }
    if space.dim() > 0 {
        space = hs_orthonormalize(space.basis(), tol)?;
    }
    Ok(space)
}

/// True iff `AB*C` stays in the span for all basis triples.
pub fn is_normalizing(u: &OperatorSubspace, tol: &ToleranceConfig) -> bool {
    normalizing_witness(u, tol).is_none()
}

/// First basis triple whose product escapes the span, with its distance.
pub fn normalizing_witness(
    u: &OperatorSubspace,
    tol: &ToleranceConfig,
) -> Option<(usize, usize, usize, f64)> {
    let basis = u.basis();
    for (i, a) in basis.iter().enumerate() {
        for (j, b) in basis.iter().enumerate() {
            let ab = a * b.adjoint();
            for (k, c) in basis.iter().enumerate() {
                let prod = &ab * c;
                let (inside, d) = u
                    .contains(&prod, tol)
                    .expect("triple products share the ambient shape");
                if !inside {
                    return Some((i, j, k, d));
                }
            }
        }
    }
    None
}

pub(crate) fn require_normalizing(u: &OperatorSubspace, tol: &ToleranceConfig) -> Result<()> {
    if let Some((i, j, k, residual)) = normalizing_witness(u, tol) {
        return Err(Error::NotNormalizing { i, j, k, residual });
    }
    Ok(())
}

/// Kernel / range profile per the essential-space definition.
pub fn profile(u: &OperatorSubspace, tol: &ToleranceConfig) -> Result<TroProfile> {
    let adjoints: Vec<CMat> = u.basis().iter().map(|b| b.adjoint()).collect();
    let coker = range_projection(u.cols(), &adjoints, tol)?;
    let zero_plus = coker.complement();
    let i_minus = range_projection(u.rows(), u.basis(), tol)?;
    let essential = zero_plus.is_zero(tol) && i_minus.is_identity(tol);
    let k1_dim = u.cols() - zero_plus.rank();
    let k2_dim = i_minus.rank();
    Ok(TroProfile {
        zero_plus,
        i_minus,
        essential,
        k1_dim,
        k2_dim,
    })
}

/// Compression of `u` to `K₁ = 0₊^⊥H₁` and `K₂ = I₋H₂` expressed in
/// orthonormal bases of those subspaces; returns the space together with the
/// two isometries (`iso1: m×k₁`, `iso2: n×k₂`). The result is essential
/// whenever `u` is nonzero.
pub fn essential_part(
    u: &OperatorSubspace,
    tol: &ToleranceConfig,
) -> Result<(OperatorSubspace, CMat, CMat)> {
    if u.is_zero() {
        return Ok((
            OperatorSubspace::zero(0, 0),
            CMat::zeros(u.cols(), 0),
            CMat::zeros(u.rows(), 0),
        ));
    }
    let adjoints: Vec<CMat> = u.basis().iter().map(|b| b.adjoint()).collect();
    let iso1 = linalg::range_basis(&stack_columns(u.cols(), &adjoints), tol.rank_tol)?;
    let iso2 = linalg::range_basis(&stack_columns(u.rows(), u.basis()), tol.rank_tol)?;
    let compressed: Vec<CMat> = u
        .basis()
        .iter()
        .map(|b| iso2.adjoint() * b * &iso1)
        .collect();
    let space = hs_orthonormalize(&compressed, tol)?;
    Ok((space, iso1, iso2))
}

fn stack_columns(rows: usize, mats: &[CMat]) -> CMat {
    let total: usize = mats.iter().map(|m| m.ncols()).sum();
    let mut out = CMat::zeros(rows, total);
    let mut at = 0;
    for m in mats {
        out.columns_mut(at, m.ncols()).copy_from(m);
        at += m.ncols();
    }
    out
}

impl LinkingAlgebra {
    pub fn ambient_dim(&self) -> usize {
        self.target_dim + self.source_dim
    }

    pub fn space(&self) -> &OperatorSubspace {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    fn corner(&self, row0: usize, rows: usize, col0: usize, cols: usize) -> Vec<CMat> {
        self.space
            .basis()
            .iter()
            .map(|x| x.view((row0, col0), (rows, cols)).into_owned())
            .collect()
    }

    /// Top-left corner `[UU*] + CI` on `C^n`.
    pub fn corner_b(&self, tol: &ToleranceConfig) -> Result<OperatorSubspace> {
        let mats = self.corner(0, self.target_dim, 0, self.target_dim);
        hs_orthonormalize(&mats, tol)
    }

    /// Top-right corner, which recovers `U` itself.
    pub fn corner_u(&self, tol: &ToleranceConfig) -> Result<OperatorSubspace> {
        let mats = self.corner(0, self.target_dim, self.target_dim, self.source_dim);
        nonzero_span(self.target_dim, self.source_dim, &mats, tol)
    }

    /// Bottom-left corner `U*`.
    pub fn corner_u_star(&self, tol: &ToleranceConfig) -> Result<OperatorSubspace> {
        let mats = self.corner(self.target_dim, self.source_dim, 0, self.target_dim);
        nonzero_span(self.source_dim, self.target_dim, &mats, tol)
    }

    /// Bottom-right corner `[U*U] + CI` on `C^m`.
    pub fn corner_a(&self, tol: &ToleranceConfig) -> Result<OperatorSubspace> {
        let mats = self.corner(
            self.target_dim,
            self.source_dim,
            self.target_dim,
            self.source_dim,
        );
        hs_orthonormalize(&mats, tol)
    }
}

fn nonzero_span(
    rows: usize,
    cols: usize,
    mats: &[CMat],
    tol: &ToleranceConfig,
) -> Result<OperatorSubspace> {
    if mats.iter().all(|m| linalg::hs_norm(m) <= tol.rank_tol) {
        return Ok(OperatorSubspace::zero(rows, cols));
    }
    hs_orthonormalize(mats, tol)
}

/// The `(n+m)`-ambient unital *-algebra generated by the corner identities,
/// the block-embedded `U` and `U*`, closed under multiplication.
pub fn linking_algebra(u: &OperatorSubspace, tol: &ToleranceConfig) -> Result<LinkingAlgebra> {
    require_normalizing(u, tol)?;
    let n = u.rows();
    let m = u.cols();
    let d = n + m;
    let mut gens: Vec<CMat> = Vec::with_capacity(2 * u.dim() + 2);
    let mut p_top = CMat::zeros(d, d);
    for i in 0..n {
        p_top[(i, i)] = linalg::cone();
    }
    let mut p_bot = CMat::zeros(d, d);
    for i in n..d {
        p_bot[(i, i)] = linalg::cone();
    }
    gens.push(p_top);
    gens.push(p_bot);
    for b in u.basis() {
        let mut e = CMat::zeros(d, d);
        e.view_mut((0, n), (n, m)).copy_from(b);
        gens.push(e.adjoint());
        gens.push(e);
    }
    // Same stabilization as the triple closure, on pairwise products.
    let mut space = hs_orthonormalize(&gens, tol)?;
    let cap = d * d;
    loop {
        if space.dim() == cap {
            break;
        }
        let snapshot = space.basis().to_vec();
        let mut grew = false;
        for a in &snapshot {
            for b in &snapshot {
                let prod = a * b;
                grew |= space.absorb(&prod, tol.rank_tol);
            }
        }
        if !grew {
            break;
        }
    }
    let space = hs_orthonormalize(space.basis(), tol)?;
    Ok(LinkingAlgebra {
        target_dim: n,
        source_dim: m,
        space,
    })
}

/// Partial isometries harvested from `count` Gaussian elements of `u`: the
/// polar phase of each sample plus the phases restricted to the spectral
/// clusters of its modulus. Every returned `V` satisfies `VV*V = V` and lies
/// in `u`.
pub fn partial_isometries(
    u: &OperatorSubspace,
    count: usize,
    seed: u64,
    tol: &ToleranceConfig,
) -> Result<Vec<CMat>> {
    require_normalizing(u, tol)?;
    if u.is_zero() {
        return Ok(Vec::new());
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for _ in 0..count {
        let mut a = CMat::zeros(u.rows(), u.cols());
        for b in u.basis() {
            let z = gaussian_matrix(1, 1, &mut rng)[(0, 0)];
            a += b * z;
        }
        let f = linalg::svd(&a)?;
        let r = linalg::rank_at(&f.sigma, tol.rank_tol);
        if r == 0 {
            continue;
        }
        let phase = f.u.columns(0, r) * f.v.columns(0, r).adjoint();
        out.push(phase);
        // Cluster pieces of |A|: sigma is descending, cluster the reversal.
        let mut ascending: Vec<f64> = f.sigma[..r].to_vec();
        ascending.reverse();
        let clusters = numkernel::cluster_by_gap(&ascending, tol.gap_tol);
        if clusters.len() > 1 {
            for cluster in clusters {
                let mut v = CMat::zeros(u.rows(), u.cols());
                for idx in cluster {
                    let i = r - 1 - idx;
                    v += f.u.column(i) * f.v.column(i).adjoint();
                }
                out.push(v);
            }
        }
    }
    Ok(out)
}

/// The coordinate partition `{0},…,{dim−1}` used when a masa is the plain
/// diagonal algebra.
pub fn singleton_atoms(dim: usize) -> Vec<Vec<usize>> {
    (0..dim).map(|i| vec![i]).collect()
}

fn validate_partition(dim: usize, atoms: &[Vec<usize>]) -> Result<()> {
    let mut seen = vec![false; dim];
    for atom in atoms {
        if atom.is_empty() {
            return Err(Error::Precondition("empty atom in partition".into()));
        }
        for &c in atom {
            if c >= dim {
                return Err(Error::Precondition(format!(
                    "atom coordinate {c} out of range for dimension {dim}"
                )));
            }
            if seen[c] {
                return Err(Error::Precondition(format!(
                    "coordinate {c} appears in two atoms"
                )));
            }
            seen[c] = true;
        }
    }
    if seen.iter().any(|&s| !s) {
        return Err(Error::Precondition(
            "partition does not cover all coordinates".into(),
        ));
    }
    Ok(())
}

/// Pattern of `u` at the granularity of the given atom partitions.
fn atom_pattern(
    u: &OperatorSubspace,
    d1_atoms: &[Vec<usize>],
    d2_atoms: &[Vec<usize>],
    tol: &ToleranceConfig,
) -> Result<SupportPattern> {
    let kappa = masa::pattern_of(u, tol);
    let mut atom_of_col = vec![0usize; u.cols()];
    for (a, atom) in d1_atoms.iter().enumerate() {
        for &c in atom {
            atom_of_col[c] = a;
        }
    }
    let mut atom_of_row = vec![0usize; u.rows()];
    for (a, atom) in d2_atoms.iter().enumerate() {
        for &c in atom {
            atom_of_row[c] = a;
        }
    }
    let pairs = kappa
        .pairs()
        .iter()
        .map(|&(x, y)| (atom_of_col[x], atom_of_row[y]))
        .collect();
    SupportPattern::new(d1_atoms.len(), d2_atoms.len(), pairs)
}

/// Block decomposition of a normalizing bimodule over the diagonal masas
/// given by the atom partitions: the blocks are the connected components of
/// the support pattern, and the reconstruction `⊕ F_k B E_k` must reproduce
/// `u` exactly.
pub fn block_decompose(
    u: &OperatorSubspace,
    d1_atoms: &[Vec<usize>],
    d2_atoms: &[Vec<usize>],
    tol: &ToleranceConfig,
) -> Result<BlockDecomposition> {
    validate_partition(u.cols(), d1_atoms)?;
    validate_partition(u.rows(), d2_atoms)?;
    let kappa = atom_pattern(u, d1_atoms, d2_atoms, tol)?;
    let labels = match masa::is_normalizing_pattern(&kappa) {
        PatternCheck::Normalizing(labels) => labels,
        PatternCheck::Missing { x, y } => return Err(Error::PatternNotNormalizing { x, y }),
    };
    let mut blocks = Vec::new();
    for label in 0..labels.component_count() {
        let mut e_coords = Vec::new();
        for (a, fx) in labels.f().iter().enumerate() {
            if *fx == Some(label) {
                e_coords.extend(d1_atoms[a].iter().copied());
            }
        }
        let mut f_coords = Vec::new();
        for (a, gy) in labels.g().iter().enumerate() {
            if *gy == Some(label) {
                f_coords.extend(d2_atoms[a].iter().copied());
            }
        }
        blocks.push((
            Projection::from_coords(u.cols(), &e_coords),
            Projection::from_coords(u.rows(), &f_coords),
        ));
    }
    let rebuilt = block_pattern_space(u.rows(), u.cols(), &blocks);
    if !subspace_equal(u, &rebuilt, tol)? {
        return Err(Error::Precondition(
            "subspace is a proper subspace of its block pattern space; \
             not a masa-bimodule pattern subspace"
                .into(),
        ));
    }
    Ok(BlockDecomposition { blocks })
}

/// Span of all matrix units inside the blocks, i.e. `⊕ F_k B(C^m,C^n) E_k`.
pub fn block_pattern_space(
    rows: usize,
    cols: usize,
    blocks: &[(Projection, Projection)],
) -> OperatorSubspace {
    let mut units = Vec::new();
    for (e, f) in blocks {
        let e_coords: Vec<usize> = (0..cols).filter(|&c| e.matrix()[(c, c)].re > 0.5).collect();
        let f_coords: Vec<usize> = (0..rows).filter(|&r| f.matrix()[(r, r)].re > 0.5).collect();
        for &x in &e_coords {
            for &y in &f_coords {
                let mut m = CMat::zeros(rows, cols);
                m[(y, x)] = linalg::cone();
                units.push(m);
            }
        }
    }
    OperatorSubspace::from_orthonormal(rows, cols, units)
}

/// Span of all rank-one operators in a normalizing masa-bimodule; in finite
/// dimension this is the whole pattern subspace, which is computed and
/// asserted.
pub fn rank_one_subspace(
    u: &OperatorSubspace,
    d1_atoms: &[Vec<usize>],
    d2_atoms: &[Vec<usize>],
    tol: &ToleranceConfig,
) -> Result<OperatorSubspace> {
    let bd = block_decompose(u, d1_atoms, d2_atoms, tol)?;
    let rebuilt = block_pattern_space(u.rows(), u.cols(), &bd.blocks);
    debug_assert!(subspace_equal(u, &rebuilt, tol)?);
    Ok(rebuilt)
}

/// Experimental: coarse Wedderburn-style splitting of an arbitrary
/// normalizing space through the minimal central projections of its linking
/// algebra. Returns pairs `(E_k, F_k)` with `U = ⊕ F_k U E_k`; unlike
/// [`block_decompose`] the compressions need not be full corners.
pub fn wedderburn(
    u: &OperatorSubspace,
    seed: u64,
    tol: &ToleranceConfig,
) -> Result<Vec<(Projection, Projection)>> {
    if u.is_zero() {
        return Ok(Vec::new());
    }
    let link = linking_algebra(u, tol)?;
    let basis = link.space().basis();
    let d = link.ambient_dim();
    // Center of the linking algebra, solved inside its coefficient space.
    let k = basis.len();
    let mut constraint = CMat::zeros(d * d * k, k);
    for (i, x) in basis.iter().enumerate() {
        for (j, y) in basis.iter().enumerate() {
            let comm = x * y - y * x;
            constraint
                .view_mut((j * d * d, i), (d * d, 1))
                .copy_from(&linalg::vectorize(&comm));
        }
    }
    let coeffs = linalg::null_space(&constraint, tol.rank_tol, 1.0)?;
    let center: Vec<CMat> = (0..coeffs.ncols())
        .map(|c| {
            let mut z = CMat::zeros(d, d);
            for (i, x) in basis.iter().enumerate() {
                z += x * coeffs[(i, c)];
            }
            z
        })
        .collect();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut h = CMat::zeros(d, d);
    for z in &center {
        let g = gaussian_matrix(1, 1, &mut rng)[(0, 0)];
        h += z * g;
    }
    let h = (&h + h.adjoint()).scale(0.5);
    let eig = linalg::hermitian_eigen(&h)?;
    let clusters = numkernel::cluster_by_gap(&eig.values, tol.gap_tol);
    let n = u.rows();
    let m = u.cols();
    let mut out = Vec::new();
    let mut total = OperatorSubspace::zero(n, m);
    for cluster in clusters {
        let mut z = CMat::zeros(d, d);
        for i in cluster {
            let col = eig.vectors.column(i);
            z += col * col.adjoint();
        }
        let f = Projection::new_unchecked(z.view((0, 0), (n, n)).into_owned());
        let e = Projection::new_unchecked(z.view((n, n), (m, m)).into_owned());
        let compressed: Vec<CMat> = u
            .basis()
            .iter()
            .map(|b| f.matrix() * b * e.matrix())
            .collect();
        let piece = nonzero_span(n, m, &compressed, tol)?;
        if piece.is_zero() {
            continue;
        }
        total = total.sum(&piece, tol)?;
        out.push((e, f));
    }
    if total.dim() != u.dim() || !subspace_equal(&total, u, tol)? {
        return Err(Error::Numerical(
            "central decomposition failed to reassemble the space".into(),
        ));
    }
    Ok(out)
}

#[cfg(test)]
#[path = "tro_tests.rs"]
mod tests;
