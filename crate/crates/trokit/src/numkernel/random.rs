//! Seeded Gaussian samplers; real and imaginary parts are standard normal.

use rand::Rng;
use rand_distr::StandardNormal;

use super::linalg::{CMat, CVec, Complex64};

pub(crate) fn gaussian_scalar<R: Rng>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im)
}

pub fn gaussian_matrix<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> CMat {
    CMat::from_fn(rows, cols, |_, _| gaussian_scalar(rng))
}

pub fn gaussian_vector<R: Rng>(dim: usize, rng: &mut R) -> CVec {
    CVec::from_fn(dim, |_, _| gaussian_scalar(rng))
}
