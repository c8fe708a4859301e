//! Exact-within-tolerance linear algebra for normalizing spaces of operators
//! (ternary rings of operators), their projection-valued maps, masa-bimodule
//! support patterns, and normalizers of CSL algebras — all over dense complex
//! matrices.
//!
//! The crate is organised around five domains:
//!
//! * [`numkernel`] — operator subspaces under the Hilbert–Schmidt inner
//!   product, projections, commutants, polar decomposition and seeded
//!   samplers;
//! * [`tro`] — triple-product-closed ("normalizing") spaces: closure,
//!   profiles, linking algebras, partial isometries and block decomposition;
//! * [`maps`] — subspace maps, ortho-map testing, sampled reflexive hulls
//!   with one-sided certification, and the rank-one membership criterion;
//! * [`masa`] — the totally atomic masa-bimodule calculus on support
//!   patterns;
//! * [`normalizers`] — semi-normalizers and normalizers between CSL
//!   algebras, covers, module checks and sum analysis.
//!
//! [`suites`] bundles the randomized and exhaustive property suites that the
//! `trokit` command line exposes as `trokit verify`.

pub mod error;
pub mod instances;
pub mod maps;
pub mod masa;
pub mod normalizers;
pub mod numkernel;
pub mod suites;
pub mod tro;

pub use error::{Error, Result};
pub use numkernel::{CMat, CVec, Complex64, OperatorSubspace, Projection, ToleranceConfig};
