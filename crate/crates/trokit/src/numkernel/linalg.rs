//! Dense complex factorizations shared by the whole crate: Jacobi-based SVD
//! and Hermitian eigendecomposition, range bases and null spaces.
//!
//! Both factorizations are one/two-sided Jacobi iterations. They converge
//! quadratically, deliver high relative accuracy on the small dense matrices
//! this crate works with, and keep every rank decision trustworthy down to
//! the configured cutoffs.

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};

pub type Complex64 = Complex<f64>;
pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

const JACOBI_EPS: f64 = 1e-15;
const JACOBI_MAX_SWEEPS: usize = 96;

pub fn czero() -> Complex64 {
    Complex::new(0.0, 0.0)
}

pub fn cone() -> Complex64 {
    Complex::new(1.0, 0.0)
}

/// Hilbert–Schmidt inner product `tr(a* b)`, conjugate-linear in `a`.
pub fn hs_inner(a: &CMat, b: &CMat) -> Complex64 {
    debug_assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// Hilbert–Schmidt (Frobenius) norm.
pub fn hs_norm(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Operator norm (largest singular value).
pub fn op_norm(a: &CMat) -> f64 {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0.0;
    }
    singular_values(a).first().copied().unwrap_or(0.0)
}

/// Largest entry modulus; cheap sanity metric for residuals.
pub fn max_abs(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn identity(d: usize) -> CMat {
    CMat::identity(d, d)
}

/// Column-major vectorization; inverse of [`unvec`].
pub fn vectorize(a: &CMat) -> CVec {
    CVec::from_column_slice(a.as_slice())
}

pub fn unvec(v: &CVec, rows: usize, cols: usize) -> CMat {
    debug_assert_eq!(v.len(), rows * cols);
    CMat::from_column_slice(rows, cols, v.as_slice())
}

/// One-sided Jacobi kernel: rotates the columns of `a` until they are
/// mutually orthogonal, accumulating the rotations in a full unitary `v`.
/// Returns the rotated columns at unit working scale, `v`, and the scale
/// factor; column norms times the factor are the singular values.
fn jacobi_columns(a: &CMat) -> (CMat, CMat, f64) {
    let q = a.ncols();
    // Work at unit scale so Gram products and column norms cannot
    // underflow for uniformly small input.
    let scale = max_abs(a);
    if scale == 0.0 || q < 2 {
        let w = if scale == 0.0 { a.clone() } else { a.unscale(scale) };
        return (w, identity(q), scale.max(if scale == 0.0 { 1.0 } else { scale }));
    }
    let mut w = a.unscale(scale);
    let mut v = identity(q);
    let rows = a.nrows();
    for _sweep in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..q - 1 {
            for j in i + 1..q {
                let mut alpha = 0.0;
                let mut beta = 0.0;
                let mut gamma = czero();
                for r in 0..rows {
                    let x = w[(r, i)];
                    let y = w[(r, j)];
                    alpha += x.norm_sqr();
                    beta += y.norm_sqr();
                    gamma += x.conj() * y;
                }
                // Columns this far below the (unit) working scale carry no
                // direction information; their Gram entries are rounding
                // noise and a denormal-quantized phase would wreck the
                // rotation's unitarity.
                if alpha <= 1e-60 || beta <= 1e-60 {
                    continue;
                }
                let g = gamma.norm();
                if g <= JACOBI_EPS * (alpha * beta).sqrt() || g == 0.0 {
                    continue;
                }
                rotated = true;
                let phi = gamma / g;
                let tau = (beta - alpha) / (2.0 * g);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                // Unitary R = [[c, s],[−s·conj(phi), c·conj(phi)]] acting on
                // columns (i, j) zeroes the cross-Gram entry.
                let phibar = phi.conj();
                for r in 0..w.nrows() {
                    let xi = w[(r, i)];
                    let xj = w[(r, j)];
                    w[(r, i)] = xi * c - xj * phibar * s;
                    w[(r, j)] = xi * s + xj * phibar * c;
                }
                for r in 0..q {
                    let xi = v[(r, i)];
                    let xj = v[(r, j)];
                    v[(r, i)] = xi * c - xj * phibar * s;
                    v[(r, j)] = xi * s + xj * phibar * c;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    (w, v, scale)
}

/// Singular values in descending order.
pub fn singular_values(a: &CMat) -> Vec<f64> {
    // Work on the smaller Gram side.
    let work = if a.nrows() < a.ncols() {
        a.adjoint()
    } else {
        a.clone()
    };
    let (w, _, scale) = jacobi_columns(&work);
    let mut s: Vec<f64> = (0..w.ncols()).map(|j| w.column(j).norm() * scale).collect();
    s.sort_by(|x, y| y.partial_cmp(x).unwrap());
    s
}

pub struct Svd {
    /// Left singular vectors, one column per singular value.
    pub u: CMat,
    /// Singular values, descending.
    pub sigma: Vec<f64>,
    /// Right singular vectors, one column per singular value.
    pub v: CMat,
}

/// Thin SVD (`k = min(rows, cols)` triplets) with columns sorted by
/// descending singular value. Columns of `u`/`v` beyond the numerical rank
/// are completed to orthonormal bases, so the factors are always isometries.
pub fn svd(a: &CMat) -> Result<Svd> {
    let (rows, cols) = a.shape();
    let k = rows.min(cols);
    if rows == 0 || cols == 0 {
        return Ok(Svd {
            u: CMat::zeros(rows, 0),
            sigma: Vec::new(),
            v: CMat::zeros(cols, 0),
        });
    }
    if rows < cols {
        // SVD of the adjoint swaps the factors.
        let f = svd(&a.adjoint())?;
        return Ok(Svd {
            u: f.v,
            sigma: f.sigma,
            v: f.u,
        });
    }
    let (w, v_full, scale) = jacobi_columns(a);
    let mut order: Vec<usize> = (0..cols).collect();
    // Norms are taken at the unit working scale, where they are exact.
    let norms: Vec<f64> = (0..cols).map(|j| w.column(j).norm()).collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap());
    let smax = norms[order[0]];
    // Columns at working-precision noise are not meaningful directions;
    // rebuild them by orthonormal completion instead of normalizing noise.
    let junk = JACOBI_EPS * smax.max(1e-300);
    let mut u = CMat::zeros(rows, k);
    let mut v = CMat::zeros(cols, k);
    let mut sigma = Vec::with_capacity(k);
    for (out, &idx) in order.iter().take(k).enumerate() {
        let s = norms[idx];
        sigma.push(s * scale);
        v.set_column(out, &v_full.column(idx));
        if s > junk {
            u.set_column(out, &(w.column(idx) / Complex::new(s, 0.0)));
        } else {
            complete_column(&mut u, out);
        }
    }
    Ok(Svd { u, sigma, v })
}

/// Fills column `j` with a unit vector orthonormal to columns `0..j`.
fn complete_column(u: &mut CMat, j: usize) {
    let rows = u.nrows();
    for c in 0..rows {
        let mut cand = CVec::zeros(rows);
        cand[c] = cone();
        for _ in 0..2 {
            for prev in 0..j {
                let col = u.column(prev);
                let overlap: Complex64 =
                    col.iter().zip(cand.iter()).map(|(x, y)| x.conj() * y).sum();
                cand -= col.into_owned() * overlap;
            }
        }
        let norm = cand.norm();
        if norm > 0.5 {
            u.set_column(j, &(cand / Complex::new(norm, 0.0)));
            return;
        }
    }
}

/// Numerical rank at a relative cutoff.
pub fn rank_at(sigma: &[f64], rank_tol: f64) -> usize {
    let smax = sigma.first().copied().unwrap_or(0.0);
    if smax <= 0.0 {
        return 0;
    }
    sigma.iter().take_while(|&&s| s > rank_tol * smax).count()
}

/// Orthonormal basis of the column space of `a`.
pub fn range_basis(a: &CMat, rank_tol: f64) -> Result<CMat> {
    let f = svd(a)?;
    let r = rank_at(&f.sigma, rank_tol);
    Ok(f.u.columns(0, r).into_owned())
}

/// Orthonormal basis of the null space of `a` (full, including the part not
/// reachable from a thin factorization).
///
/// The rank cutoff is `rank_tol · max(σ_max, floor)`. Constraint systems
/// assembled from unit-scale data pass `floor = 1` so that an all-noise
/// stack (a constraint that is genuinely zero up to rounding) does not get
/// mistaken for full-rank signal; `floor = 0` gives the plain relative rule.
pub fn null_space(a: &CMat, rank_tol: f64, floor: f64) -> Result<CMat> {
    let cols = a.ncols();
    if a.nrows() == 0 || cols == 0 {
        return Ok(identity(cols));
    }
    // The one-sided Jacobi V is a full unitary on the column space, so the
    // null space is directly readable off the small column norms.
    let (w, v, scale) = jacobi_columns(a);
    let norms: Vec<f64> = (0..cols).map(|j| w.column(j).norm() * scale).collect();
    let smax = norms.iter().copied().fold(0.0, f64::max);
    let reference = smax.max(floor);
    let cutoff = if reference <= 0.0 {
        f64::INFINITY
    } else {
        rank_tol * reference
    };
    let keep: Vec<usize> = (0..cols).filter(|&j| norms[j] <= cutoff).collect();
    let mut out = CMat::zeros(cols, keep.len());
    for (o, &j) in keep.iter().enumerate() {
        out.set_column(o, &v.column(j));
    }
    Ok(out)
}

pub struct HermitianEigen {
    /// Eigenvalues, ascending.
    pub values: Vec<f64>,
    /// Eigenvectors, one column per eigenvalue.
    pub vectors: CMat,
}

/// Two-sided Jacobi eigendecomposition of a Hermitian matrix; the input is
/// symmetrized first to shed accumulated non-Hermitian noise.
pub fn hermitian_eigen(a: &CMat) -> Result<HermitianEigen> {
    let d = a.nrows();
    if d != a.ncols() {
        return Err(Error::dims(
            format!("{d}x{d}"),
            format!("{}x{}", a.nrows(), a.ncols()),
        ));
    }
    if d == 0 {
        return Ok(HermitianEigen {
            values: Vec::new(),
            vectors: CMat::zeros(0, 0),
        });
    }
    let mut m = (a + a.adjoint()).scale(0.5);
    let mut v = identity(d);
    let scale = max_abs(&m).max(1e-300);
    for _sweep in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..d.saturating_sub(1) {
            for j in i + 1..d {
                let gamma = m[(i, j)];
                let g = gamma.norm();
                if g <= JACOBI_EPS * scale {
                    continue;
                }
                rotated = true;
                let alpha = m[(i, i)].re;
                let beta = m[(j, j)].re;
                let phi = gamma / g;
                let tau = (beta - alpha) / (2.0 * g);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                // Columns transform with R = [[c, s·phi],[−s·conj(phi)·…]];
                // apply R^H M R via column then row updates.
                let (cs, sph) = (Complex::new(c, 0.0), phi * s);
                let msph = -sph.conj();
                // M ← M R (columns i, j)
                for r in 0..d {
                    let xi = m[(r, i)];
                    let xj = m[(r, j)];
                    m[(r, i)] = xi * cs + xj * msph;
                    m[(r, j)] = xi * sph + xj * cs;
                }
                // M ← R^H M (rows i, j)
                for col in 0..d {
                    let xi = m[(i, col)];
                    let xj = m[(j, col)];
                    m[(i, col)] = xi * cs + xj * msph.conj();
                    m[(j, col)] = xi * sph.conj() + xj * cs;
                }
                // V ← V R
                for r in 0..d {
                    let xi = v[(r, i)];
                    let xj = v[(r, j)];
                    v[(r, i)] = xi * cs + xj * msph;
                    v[(r, j)] = xi * sph + xj * cs;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| m[(i, i)].re.partial_cmp(&m[(j, j)].re).unwrap());
    let mut vectors = CMat::zeros(d, d);
    let mut values = Vec::with_capacity(d);
    for (out, &i) in order.iter().enumerate() {
        vectors.set_column(out, &v.column(i));
        values.push(m[(i, i)].re);
    }
    Ok(HermitianEigen { values, vectors })
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Stacks `vec(mats[i])` as the columns of one tall matrix.
pub fn stack_vectorized(mats: &[CMat]) -> CMat {
    if mats.is_empty() {
        return CMat::zeros(0, 0);
    }
    let (r, c) = mats[0].shape();
    let mut out = CMat::zeros(r * c, mats.len());
    for (j, m) in mats.iter().enumerate() {
        out.set_column(j, &vectorize(m));
    }
    out
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    fn approx(a: f64, b: f64) {
        assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }

    #[test]
    fn vec_round_trip_matches_kron_identity() {
        // vec(A X B) = (B^T ⊗ A) vec(X) with column-major vectorization.
        let a = CMat::from_fn(2, 3, |i, j| Complex::new((i + 2 * j) as f64, j as f64));
        let x = CMat::from_fn(3, 2, |i, j| Complex::new(1.0 + i as f64, -(j as f64)));
        let b = CMat::from_fn(2, 2, |i, j| Complex::new((i * j) as f64, 0.5));
        let lhs = vectorize(&(&a * &x * &b));
        let rhs = kron(&b.transpose(), &a) * vectorize(&x);
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn null_space_of_wide_matrix_is_complete() {
        // One constraint row on C^4 leaves a 3-dimensional null space.
        let a = CMat::from_row_slice(1, 4, &[cone(), cone(), czero(), cone()]);
        let n = null_space(&a, 1e-12, 1.0).unwrap();
        assert_eq!(n.ncols(), 3);
        assert!(op_norm(&(&a * &n)) < 1e-12);
        let gram = n.adjoint() * &n;
        assert!(op_norm(&(gram - identity(3))) < 1e-12);
    }

    #[test]
    fn hermitian_eigen_sorts_ascending() {
        let a = CMat::from_row_slice(
            2,
            2,
            &[
                Complex::new(2.0, 0.0),
                Complex::new(0.0, -1.0),
                Complex::new(0.0, 1.0),
                Complex::new(2.0, 0.0),
            ],
        );
        let e = hermitian_eigen(&a).unwrap();
        approx(e.values[0], 1.0);
        approx(e.values[1], 3.0);
        let rec = &e.vectors
            * CMat::from_diagonal(&CVec::from_iterator(
                2,
                e.values.iter().map(|&v| Complex::new(v, 0.0)),
            ))
            * e.vectors.adjoint();
        assert!(hs_norm(&(rec - a)) < 1e-12);
    }

    fn entry() -> impl Strategy<Value = Complex64> {
        (
            prop::num::f64::NORMAL.prop_map(|x| x % 4.0),
            prop::num::f64::NORMAL.prop_map(|x| x % 4.0),
        )
            .prop_map(|(re, im)| Complex::new(re, im))
    }

    prop_compose! {
        fn any_matrix()(rows in 1usize..6, cols in 1usize..6)
            (data in prop::collection::vec(entry(), rows * cols),
             rows in Just(rows), cols in Just(cols))
            -> CMat
        {
            CMat::from_vec(rows, cols, data)
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]

        #[test]
        fn svd_reconstructs_and_factors_are_isometric(a in any_matrix()) {
            let f = svd(&a).unwrap();
            let k = f.sigma.len();
            let mut rec = CMat::zeros(a.nrows(), a.ncols());
            for i in 0..k {
                rec += f.u.column(i) * f.v.column(i).adjoint()
                    * Complex::new(f.sigma[i], 0.0);
            }
            let scale = hs_norm(&a).max(1.0);
            prop_assert!(hs_norm(&(rec - &a)) <= 1e-12 * scale);
            let iu = f.u.adjoint() * &f.u;
            let iv = f.v.adjoint() * &f.v;
            prop_assert!(hs_norm(&(iu - identity(k))) <= 1e-12);
            prop_assert!(hs_norm(&(iv - identity(k))) <= 1e-12);
            // descending
            for w in f.sigma.windows(2) {
                prop_assert!(w[0] >= w[1]);
            }
        }

        #[test]
        fn rank_one_stacks_factor_accurately(rows in 2usize..6, seed in 0u64..500) {
            // Near-rank-one matrices with tiny tails exercise the regime
            // where a Golub–Kahan implementation can lose accuracy.
            use rand::SeedableRng;
            use rand::Rng;
            let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
            let mut sample = || Complex::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
            let u0 = CVec::from_fn(rows, |_, _| sample());
            let v0 = CVec::from_fn(rows, |_, _| sample());
            let mut a = &u0 * v0.adjoint();
            a[(0, 0)] += Complex::new(1e-13, 0.0);
            let f = svd(&a).unwrap();
            let mut rec = CMat::zeros(rows, rows);
            for i in 0..f.sigma.len() {
                rec += f.u.column(i) * f.v.column(i).adjoint()
                    * Complex::new(f.sigma[i], 0.0);
            }
            prop_assert!(hs_norm(&(rec - &a)) <= 1e-12 * hs_norm(&a).max(1.0));
        }

        #[test]
        fn hermitian_eigen_reconstructs(a in any_matrix()) {
            let d = a.nrows().min(a.ncols());
            let sq = a.view((0, 0), (d, d)).into_owned();
            let h = (&sq + sq.adjoint()).scale(0.5);
            let e = hermitian_eigen(&h).unwrap();
            let rec = &e.vectors
                * CMat::from_diagonal(&CVec::from_iterator(
                    d,
                    e.values.iter().map(|&v| Complex::new(v, 0.0)),
                ))
                * e.vectors.adjoint();
            let scale = hs_norm(&h).max(1.0);
            prop_assert!(hs_norm(&(rec - &h)) <= 1e-12 * scale);
            let iv = e.vectors.adjoint() * &e.vectors;
            prop_assert!(hs_norm(&(iv - identity(d))) <= 1e-12);
        }
    }
}
