//! JSON document model and canonical serialization.
//!
//! Schemas: matrix = `{rows, cols, entries: [[re,im],…] row-major}`;
//! subspace = `{m, n, generators: [matrix]}`; pattern = `{m, n, pairs:
//! [[x,y]]}` (1-based); lattice = `{dim, members: [[indices]]}` (1-based);
//! csl_pair = `{A: lattice, B: lattice}`. Documents wrap a payload with its
//! kind plus optional seed, tolerance overrides and metadata.
//!
//! Canonical output sorts keys and prints floats with 17 significant digits,
//! so every emitted document re-parses to an equal value and re-emits to
//! identical bytes.

use nalgebra::Complex;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::collections::BTreeSet;

use trokit::masa::{DiagonalLattice, SupportPattern};
use trokit::normalizers::{alg_of_lattice, CslAlgebra};
use trokit::numkernel::{hs_orthonormalize, CMat, OperatorSubspace, Projection};
use trokit::{Error as TkError, ToleranceConfig};

#[derive(Debug)]
pub enum DocError {
    Schema(String),
    Io(std::io::Error),
    Lib(TkError),
}

impl std::fmt::Display for DocError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DocError::Schema(msg) => write!(f, "schema violation: {msg}"),
            DocError::Io(e) => write!(f, "io error: {e}"),
            DocError::Lib(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for DocError {}

impl From<TkError> for DocError {
    fn from(e: TkError) -> Self {
        DocError::Lib(e)
    }
}

impl From<std::io::Error> for DocError {
    fn from(e: std::io::Error) -> Self {
        DocError::Io(e)
    }
}

pub type DocResult<T> = Result<T, DocError>;

fn schema(msg: impl Into<String>) -> DocError {
    DocError::Schema(msg.into())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixDoc {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubspaceDoc {
    pub m: usize,
    pub n: usize,
    pub generators: Vec<MatrixDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PatternDoc {
    pub m: usize,
    pub n: usize,
    pub pairs: Vec<[usize; 2]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LatticeDoc {
    pub dim: usize,
    pub members: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CslPairDoc {
    #[serde(rename = "A")]
    pub a: LatticeDoc,
    #[serde(rename = "B")]
    pub b: LatticeDoc,
}

#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct TolOverride {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rank_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eq_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gap_tol: Option<f64>,
}

impl TolOverride {
    pub fn apply(&self, mut tol: ToleranceConfig) -> DocResult<ToleranceConfig> {
        if let Some(r) = self.rank_tol {
            tol.rank_tol = r;
        }
        if let Some(e) = self.eq_tol {
            tol.eq_tol = e;
        }
        if let Some(g) = self.gap_tol {
            tol.gap_tol = g;
        }
        tol.validate()?;
        Ok(tol)
    }
}

/// The envelope every instance file uses.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Document {
    pub kind: String,
    pub payload: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<TolOverride>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub meta: Option<Value>,
}

impl Document {
    pub fn new(kind: &str, payload: Value) -> Self {
        Document {
            kind: kind.into(),
            payload,
            seed: None,
            tol: None,
            meta: None,
        }
    }

    pub fn parse(text: &str) -> DocResult<Document> {
        serde_json::from_str(text).map_err(|e| schema(e.to_string()))
    }

    pub fn expect_kind(&self, kind: &str) -> DocResult<()> {
        if self.kind != kind {
            return Err(schema(format!(
                "expected a '{kind}' document, found '{}'",
                self.kind
            )));
        }
        Ok(())
    }
}

/// Size cap from `TROKIT_MAX_DIM` (default 16).
pub fn max_dim() -> usize {
    std::env::var("TROKIT_MAX_DIM")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(16)
}

pub fn check_dim(label: &str, value: usize) -> DocResult<()> {
    let cap = max_dim();
    if value == 0 {
        return Err(schema(format!("{label} must be positive")));
    }
    if value > cap {
        return Err(schema(format!(
            "{label} = {value} exceeds the size cap {cap} (TROKIT_MAX_DIM)"
        )));
    }
    Ok(())
}

// ---- conversions: documents -> library types ----

pub fn matrix_from_doc(doc: &MatrixDoc) -> DocResult<CMat> {
    check_dim("rows", doc.rows)?;
    check_dim("cols", doc.cols)?;
    if doc.entries.len() != doc.rows * doc.cols {
        return Err(schema(format!(
            "matrix carries {} entries, expected rows*cols = {}",
            doc.entries.len(),
            doc.rows * doc.cols
        )));
    }
    for e in &doc.entries {
        if !e[0].is_finite() || !e[1].is_finite() {
            return Err(schema("matrix entries must be finite".into()));
        }
    }
    // entries are row-major
    Ok(CMat::from_fn(doc.rows, doc.cols, |i, j| {
        let e = doc.entries[i * doc.cols + j];
        Complex::new(e[0], e[1])
    }))
}

pub fn matrix_to_doc(m: &CMat) -> MatrixDoc {
    let mut entries = Vec::with_capacity(m.nrows() * m.ncols());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            entries.push([m[(i, j)].re, m[(i, j)].im]);
        }
    }
    MatrixDoc {
        rows: m.nrows(),
        cols: m.ncols(),
        entries,
    }
}

pub fn subspace_from_doc(doc: &SubspaceDoc, tol: &ToleranceConfig) -> DocResult<OperatorSubspace> {
    check_dim("m", doc.m)?;
    check_dim("n", doc.n)?;
    if doc.generators.is_empty() {
        return Ok(OperatorSubspace::zero(doc.n, doc.m));
    }
    let mats = doc
        .generators
        .iter()
        .map(|g| {
            if g.rows != doc.n || g.cols != doc.m {
                return Err(schema(format!(
                    "generator is {}x{}, expected n x m = {}x{}",
                    g.rows, g.cols, doc.n, doc.m
                )));
            }
            matrix_from_doc(g)
        })
        .collect::<DocResult<Vec<_>>>()?;
    Ok(hs_orthonormalize(&mats, tol)?)
}

pub fn subspace_to_doc(u: &OperatorSubspace) -> SubspaceDoc {
    SubspaceDoc {
        m: u.cols(),
        n: u.rows(),
        generators: u.basis().iter().map(matrix_to_doc).collect(),
    }
}

pub fn pattern_from_doc(doc: &PatternDoc) -> DocResult<SupportPattern> {
    check_dim("m", doc.m)?;
    check_dim("n", doc.n)?;
    let mut pairs = BTreeSet::new();
    for p in &doc.pairs {
        let (x, y) = (p[0], p[1]);
        if x == 0 || y == 0 || x > doc.m || y > doc.n {
            return Err(schema(format!(
                "pair [{x},{y}] out of range for a {}x{} pattern (1-based)",
                doc.m, doc.n
            )));
        }
        pairs.insert((x - 1, y - 1));
    }
    Ok(SupportPattern::new(doc.m, doc.n, pairs)?)
}

pub fn pattern_to_doc(kappa: &SupportPattern) -> PatternDoc {
    PatternDoc {
        m: kappa.m(),
        n: kappa.n(),
        pairs: kappa.pairs().iter().map(|&(x, y)| [x + 1, y + 1]).collect(),
    }
}

pub fn lattice_from_doc(doc: &LatticeDoc) -> DocResult<DiagonalLattice> {
    check_dim("dim", doc.dim)?;
    let members = doc
        .members
        .iter()
        .map(|member| {
            member
                .iter()
                .map(|&i| {
                    if i == 0 || i > doc.dim {
                        Err(schema(format!(
                            "lattice index {i} out of range for dim {} (1-based)",
                            doc.dim
                        )))
                    } else {
                        Ok(i - 1)
                    }
                })
                .collect::<DocResult<BTreeSet<usize>>>()
        })
        .collect::<DocResult<Vec<_>>>()?;
    Ok(DiagonalLattice::try_new(doc.dim, members)?)
}

pub fn lattice_to_doc(lattice: &DiagonalLattice) -> LatticeDoc {
    LatticeDoc {
        dim: lattice.dim(),
        members: lattice
            .members()
            .iter()
            .map(|s| s.iter().map(|&i| i + 1).collect())
            .collect(),
    }
}

/// `(B, A)` pair of CSL algebras from a csl_pair document; `A` acts on the
/// source space, `B` on the target.
pub fn csl_pair_from_doc(
    doc: &CslPairDoc,
    tol: &ToleranceConfig,
) -> DocResult<(CslAlgebra, CslAlgebra)> {
    let lb = lattice_from_doc(&doc.b)?;
    let la = lattice_from_doc(&doc.a)?;
    Ok((alg_of_lattice(&lb, tol)?, alg_of_lattice(&la, tol)?))
}

pub fn projection_to_doc(p: &Projection) -> MatrixDoc {
    matrix_to_doc(p.matrix())
}

// ---- canonical JSON ----

/// Compact canonical form: sorted keys (the default serde_json map is a
/// BTreeMap), floats with 17 significant digits, trailing newline.
pub fn to_canonical_json(v: &Value) -> String {
    let mut out = String::new();
    write_value(v, &mut out);
    out.push('\n');
    out
}

fn write_value(v: &Value, out: &mut String) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(u) = n.as_u64() {
                out.push_str(&u.to_string());
            } else if let Some(i) = n.as_i64() {
                out.push_str(&i.to_string());
            } else {
                let f = n.as_f64().unwrap_or(f64::NAN);
                out.push_str(&format!("{f:.16e}"));
            }
        }
        Value::String(s) => {
            out.push_str(&serde_json::to_string(s).expect("strings always serialize"))
        }
        Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_value(item, out);
            }
            out.push(']');
        }
        Value::Object(map) => {
            out.push('{');
            for (i, (key, val)) in map.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&serde_json::to_string(key).expect("keys always serialize"));
                out.push(':');
                write_value(val, out);
            }
            out.push('}');
        }
    }
}

pub fn value_of<T: Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("document models always serialize")
}

pub fn from_value<T: for<'de> Deserialize<'de>>(v: Value) -> DocResult<T> {
    serde_json::from_value(v).map_err(|e| schema(e.to_string()))
}
