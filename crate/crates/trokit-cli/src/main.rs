//! `trokit` — command-line front end: JSON I/O for matrices, subspaces,
//! patterns and lattices; seeded random instance generation; and the named
//! verification suites.
//!
//! Exit codes: 0 on success (for `verify`: zero failures), 1 when a verify
//! suite records failures, 2 on usage or schema errors.

mod doc;

use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use doc::{DocError, DocResult, Document, TolOverride};
use trokit::instances;
use trokit::masa;
use trokit::normalizers::{self, CheckMode};
use trokit::numkernel::derive_seed;
use trokit::suites::{run_suite, SuiteOptions, DEFAULT_SEED, SUITE_NAMES};
use trokit::tro;
use trokit::ToleranceConfig;

#[derive(Parser)]
#[command(
    name = "trokit",
    about = "Workbench for normalizing operator spaces, masa-bimodule patterns and CSL normalizers",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Sn,
    N,
}

impl Mode {
    fn check_mode(self) -> CheckMode {
        match self {
            Mode::Sn => CheckMode::Sn,
            Mode::N => CheckMode::N,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GenKind {
    Matrix,
    Subspace,
    Tro,
    Pattern,
    Lattice,
    CslPair,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum LatticeShape {
    Nest,
    Boolean,
    General,
}

#[derive(clap::Args)]
struct IoArgs {
    /// Input document path ("-" for stdin).
    #[arg(long, default_value = "-")]
    input: String,
    /// Output path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the subspace/projection equality tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Override the relative rank cutoff.
    #[arg(long)]
    rank_tol: Option<f64>,
    /// Override the eigenvalue clustering gap.
    #[arg(long)]
    gap_tol: Option<f64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Triple-product closure of a subspace document.
    Closure(IoArgs),
    /// Evaluate (Map U)(P) for a subspace and a projection matrix document.
    Map {
        #[command(flatten)]
        io: IoArgs,
        /// Projection as a matrix document.
        #[arg(long)]
        projection: PathBuf,
    },
    /// Biclique check of a support pattern, with labels or a witness.
    PatternCheck(IoArgs),
    /// Block decomposition of a diagonal-masa bimodule subspace.
    Decompose(IoArgs),
    /// Semi-normalizer / normalizer membership of a matrix between a CSL pair.
    Sn {
        #[command(flatten)]
        io: IoArgs,
        /// CSL pair document (lattices A and B).
        #[arg(long)]
        pair: PathBuf,
        #[arg(long, value_enum, default_value = "sn")]
        mode: Mode,
    },
    /// Membership plus the reflexive normalizing cover of a passing operator.
    Cover {
        #[command(flatten)]
        io: IoArgs,
        #[arg(long)]
        pair: PathBuf,
        #[arg(long, value_enum, default_value = "sn")]
        mode: Mode,
    },
    /// Sum analysis of two (semi-)normalizers.
    Sum {
        #[command(flatten)]
        io: IoArgs,
        #[arg(long)]
        pair: PathBuf,
        /// Second summand (the first comes from --input).
        #[arg(long)]
        second: PathBuf,
        #[arg(long, value_enum, default_value = "sn")]
        mode: Mode,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Reproducible random instance documents.
    Gen {
        #[arg(long, value_enum)]
        kind: GenKind,
        /// Input dimension (columns).
        #[arg(long, default_value_t = 3)]
        m: usize,
        /// Output dimension (rows).
        #[arg(long, default_value_t = 3)]
        n: usize,
        /// Generator count for subspace/tro instances.
        #[arg(long, default_value_t = 2)]
        gens: usize,
        /// Lattice dimension.
        #[arg(long, default_value_t = 3)]
        dim: usize,
        #[arg(long, value_enum, default_value = "nest")]
        lattice: LatticeShape,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a named verification suite; nonzero exit on any failure.
    Verify {
        #[arg(long)]
        suite: String,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Override the instance count of randomized suites.
        #[arg(long)]
        instances: Option<usize>,
        /// Extended exhaustive scales (4x4 pattern oracle).
        #[arg(long)]
        extended: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        rank_tol: Option<f64>,
        #[arg(long)]
        gap_tol: Option<f64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn read_input(path: &str) -> DocResult<String> {
    if path == "-" {
        let mut buf = String::new();
        std::io::stdin().read_to_string(&mut buf)?;
        Ok(buf)
    } else {
        Ok(std::fs::read_to_string(path)?)
    }
}

fn read_doc(path: &str) -> DocResult<Document> {
    Document::parse(&read_input(path)?)
}

fn emit(out: &Option<PathBuf>, document: &Document) -> DocResult<()> {
    let text = doc::to_canonical_json(&doc::value_of(document));
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn tolerances(io_tol: Option<f64>, rank: Option<f64>, gap: Option<f64>, from_doc: Option<TolOverride>) -> DocResult<ToleranceConfig> {
    let mut tol = ToleranceConfig::default();
    if let Some(overrides) = from_doc {
        tol = overrides.apply(tol)?;
    }
    let flags = TolOverride {
        rank_tol: rank,
        eq_tol: io_tol,
        gap_tol: gap,
    };
    flags.apply(tol)
}

fn io_tolerances(io: &IoArgs, from_doc: Option<TolOverride>) -> DocResult<ToleranceConfig> {
    tolerances(io.tol, io.rank_tol, io.gap_tol, from_doc)
}

fn witness_values(witnesses: &[(trokit::CMat, f64)]) -> Value {
    Value::Array(
        witnesses
            .iter()
            .map(|(m, residual)| {
                json!({
                    "element": doc::value_of(&doc::matrix_to_doc(m)),
                    "residual": residual,
                })
            })
            .collect(),
    )
}

fn run(cli: Cli) -> DocResult<ExitCode> {
    match cli.cmd {
        Cmd::Closure(io) => {
            let document = read_doc(&io.input)?;
            document.expect_kind("subspace")?;
            let tol = io_tolerances(&io, document.tol)?;
            let sub: doc::SubspaceDoc = doc::from_value(document.payload)?;
            let space = doc::subspace_from_doc(&sub, &tol)?;
            let closure = tro::triple_closure_space(&space, &tol)?;
            let mut out_doc = Document::new("subspace", doc::value_of(&doc::subspace_to_doc(&closure)));
            out_doc.meta = Some(json!({
                "dimension": closure.dim(),
                "normalizing": tro::is_normalizing(&closure, &tol),
            }));
            emit(&io.out, &out_doc)?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Map { io, projection } => {
            let document = read_doc(&io.input)?;
            document.expect_kind("subspace")?;
            let tol = io_tolerances(&io, document.tol)?;
            let sub: doc::SubspaceDoc = doc::from_value(document.payload)?;
            let space = doc::subspace_from_doc(&sub, &tol)?;
            let pdoc = read_doc(&projection.to_string_lossy())?;
            pdoc.expect_kind("matrix")?;
            let pmat: doc::MatrixDoc = doc::from_value(pdoc.payload)?;
            let p = trokit::Projection::try_new(doc::matrix_from_doc(&pmat)?, &tol)?;
            let image = trokit::maps::map_of(&space, &p, &tol)?;
            let mut out_doc = Document::new("matrix", doc::value_of(&doc::projection_to_doc(&image)));
            out_doc.meta = Some(json!({ "rank": image.rank() }));
            emit(&io.out, &out_doc)?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::PatternCheck(io) => {
            let document = read_doc(&io.input)?;
            document.expect_kind("pattern")?;
            let pat: doc::PatternDoc = doc::from_value(document.payload)?;
            let kappa = doc::pattern_from_doc(&pat)?;
            let payload = match masa::is_normalizing_pattern(&kappa) {
                masa::PatternCheck::Normalizing(labels) => json!({
                    "normalizing": true,
                    "f": labels.f(),
                    "g": labels.g(),
                    "components": labels.component_count(),
                }),
                masa::PatternCheck::Missing { x, y } => json!({
                    "normalizing": false,
                    "witness": [x + 1, y + 1],
                }),
            };
            emit(&io.out, &Document::new("report", payload))?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Decompose(io) => {
            let document = read_doc(&io.input)?;
            document.expect_kind("subspace")?;
            let tol = io_tolerances(&io, document.tol)?;
            let sub: doc::SubspaceDoc = doc::from_value(document.payload)?;
            let space = doc::subspace_from_doc(&sub, &tol)?;
            let bd = tro::block_decompose(
                &space,
                &tro::singleton_atoms(space.cols()),
                &tro::singleton_atoms(space.rows()),
                &tol,
            )?;
            let blocks: Vec<Value> = bd
                .blocks
                .iter()
                .map(|(e, f)| {
                    let e_coords: Vec<usize> = (0..e.dim())
                        .filter(|&c| e.matrix()[(c, c)].re > 0.5)
                        .map(|c| c + 1)
                        .collect();
                    let f_coords: Vec<usize> = (0..f.dim())
                        .filter(|&r| f.matrix()[(r, r)].re > 0.5)
                        .map(|r| r + 1)
                        .collect();
                    json!({ "E": e_coords, "F": f_coords })
                })
                .collect();
            let payload = json!({ "blocks": blocks, "count": bd.blocks.len() });
            emit(&io.out, &Document::new("report", payload))?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Sn { io, pair, mode } => {
            let (report, _) = run_membership(&io, &pair, mode)?;
            let payload = json!({
                "mode": if mode == Mode::Sn { "sn" } else { "n" },
                "verdict": report.verdict,
                "witnesses": witness_values(&report.witnesses),
            });
            emit(&io.out, &Document::new("report", payload))?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Cover { io, pair, mode } => {
            let (report, _) = run_cover(&io, &pair, mode)?;
            let mut payload = json!({
                "mode": if mode == Mode::Sn { "sn" } else { "n" },
                "verdict": report.verdict,
                "witnesses": witness_values(&report.witnesses),
            });
            if let Some(cover) = &report.cover {
                payload["cover"] = doc::value_of(&doc::subspace_to_doc(&cover.space));
                payload["cover_dimension"] = json!(cover.space.dim());
            }
            emit(&io.out, &Document::new("report", payload))?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Sum {
            io,
            pair,
            second,
            mode,
            seed,
        } => {
            let first_doc = read_doc(&io.input)?;
            first_doc.expect_kind("matrix")?;
            let tol = io_tolerances(&io, first_doc.tol)?;
            let t mat: doc::MatrixDoc = doc::from_value(first_doc.payload)?;
            let t = doc::matrix_from_doc(&t mat)?;
            let sdoc = read_doc(&second.to_string_lossy())?;
            sdoc.expect_kind("matrix")?;
            let smat: doc::MatrixDoc = doc::from_value(sdoc.payload)?;
            let s = doc::matrix_from_doc(&smat)?;
            let pdoc = read_doc(&pair.to_string_lossy())?;
            pdoc.expect_kind("csl_pair")?;
            let pair_doc: doc::CslPairDoc = doc::from_value(pdoc.payload)?;
            let (b, a) = doc::csl_pair_from_doc(&pair_doc, &tol)?;
            let report = normalizers::sum_check(&t, &s, &b, &a, mode.check_mode(), seed, &tol)?;
            let mut payload = json!({
                "mode": if mode == Mode::Sn { "sn" } else { "n" },
                "verdict": report.verdict,
                "c64_checked": report.c64_checked,
                "c64_failures": report.c64_failures,
            });
            if let Some((w, residual)) = &report.witness {
                payload["witness"] = json!({
                    "element": doc::value_of(&doc::matrix_to_doc(w)),
                    "residual": residual,
                });
            }
            if let Some(lambda) = report.lambda {
                payload["lambda"] = json!(lambda);
            }
            if let Some(cover) = &report.cover {
                payload["cover"] = doc::value_of(&doc::subspace_to_doc(cover));
            }
            emit(&io.out, &Document::new("report", payload))?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Gen {
            kind,
            m,
            n,
            gens,
            dim,
            lattice,
            seed,
            out,
        } => {
            let tol = ToleranceConfig::default();
            let document = generate(kind, m, n, gens, dim, lattice, seed, &tol)?;
            emit(&out, &document)?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Verify {
            suite,
            seed,
            instances,
            extended,
            out,
            tol,
            rank_tol,
            gap_tol,
        } => {
            let tol = tolerances(tol, rank_tol, gap_tol, None)?;
            let opts = SuiteOptions {
                seed,
                tol,
                instances,
                extended,
            };
            if !SUITE_NAMES.contains(&suite.as_str()) {
                return Err(DocError::Schema(format!(
                    "unknown suite '{suite}'; expected one of {SUITE_NAMES:?}"
                )));
            }
            let report = run_suite(&suite, &opts)?;
            let failures: Vec<Value> = report
                .failures
                .iter()
                .map(|f| {
                    json!({
                        "instance": f.instance,
                        "invariant": f.invariant,
                        "residual": f.residual,
                    })
                })
                .collect();
            let payload = json!({
                "suite": report.suite,
                "instances": report.instances,
                "failures": failures,
                "wall_ms": report.wall_ms as u64,
            });
            emit(&out, &Document::new("report", payload))?;
            if report.passed() {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(1))
            }
        }
    }
}

fn run_membership(
    io: &IoArgs,
    pair: &PathBuf,
    mode: Mode,
) -> DocResult<(normalizers::NormalizerReport, ToleranceConfig)> {
    let document = read_doc(&io.input)?;
    document.expect_kind("matrix")?;
    let tol = io_tolerances(io, document.tol)?;
    let mat: doc::MatrixDoc = doc::from_value(document.payload)?;
    let t = doc::matrix_from_doc(&mat)?;
    let pdoc = read_doc(&pair.to_string_lossy())?;
    pdoc.expect_kind("csl_pair")?;
    let pair_doc: doc::CslPairDoc = doc::from_value(pdoc.payload)?;
    let (b, a) = doc::csl_pair_from_doc(&pair_doc, &tol)?;
    let report = match mode {
        Mode::Sn => normalizers::sn_check(&t, &b, &a, &tol)?,
        Mode::N => normalizers::n_check(&t, &b, &a, &tol)?,
    };
    Ok((report, tol))
}

fn run_cover(
    io: &IoArgs,
    pair: &PathBuf,
    mode: Mode,
) -> DocResult<(normalizers::NormalizerReport, ToleranceConfig)> {
    let document = read_doc(&io.input)?;
    document.expect_kind("matrix")?;
    let tol = io_tolerances(io, document.tol)?;
    let mat: doc::MatrixDoc = doc::from_value(document.payload)?;
    let t = doc::matrix_from_doc(&mat)?;
    let pdoc = read_doc(&pair.to_string_lossy())?;
    pdoc.expect_kind("csl_pair")?;
    let pair_doc: doc::CslPairDoc = doc::from_value(pdoc.payload)?;
    let (b, a) = doc::csl_pair_from_doc(&pair_doc, &tol)?;
    let report = match mode {
        Mode::Sn => normalizers::sn_cover(&t, &b, &a, &tol)?,
        Mode::N => normalizers::n_cover(&t, &b, &a, &tol)?,
    };
    Ok((report, tol))
}

#[allow(clippy::too_many_arguments)]
fn generate(
    kind: GenKind,
    m: usize,
    n: usize,
    gens: usize,
    dim: usize,
    lattice: LatticeShape,
    seed: u64,
    tol: &ToleranceConfig,
) -> DocResult<Document> {
    match kind {
        GenKind::Matrix => {
            doc::check_dim("m", m)?;
            doc::check_dim("n", n)?;
            let mut rng = instances::rng_from(seed);
            let mat = trokit::numkernel::gaussian_matrix(n, m, &mut rng);
            let mut document = Document::new("matrix", doc::value_of(&doc::matrix_to_doc(&mat)));
            document.seed = Some(seed);
            Ok(document)
        }
        GenKind::Subspace | GenKind::Tro => {
            doc::check_dim("m", m)?;
            doc::check_dim("n", n)?;
            if gens == 0 {
                return Err(DocError::Schema("gens must be positive".into()));
            }
            let (_, closure) = instances::random_tro(n, m, gens, derive_seed(seed, 0), tol)?;
            let mut document =
                Document::new("subspace", doc::value_of(&doc::subspace_to_doc(&closure)));
            document.seed = Some(seed);
            document.meta = Some(json!({
                "dimension": closure.dim(),
                "normalizing": true,
                "generators_drawn": gens,
            }));
            Ok(document)
        }
        GenKind::Pattern => {
            doc::check_dim("m", m)?;
            doc::check_dim("n", n)?;
            let kappa = instances::random_normalizing_pattern(m, n, seed);
            let mut document =
                Document::new("pattern", doc::value_of(&doc::pattern_to_doc(&kappa)));
            document.seed = Some(seed);
            document.meta = Some(json!({
                "normalizing": masa::is_normalizing_pattern(&kappa).is_normalizing(),
            }));
            Ok(document)
        }
        GenKind::Lattice => {
            doc::check_dim("dim", dim)?;
            let shape = match lattice {
                LatticeShape::Nest => instances::LatticeKind::Nest,
                LatticeShape::Boolean => instances::LatticeKind::Boolean,
                LatticeShape::General => instances::LatticeKind::General,
            };
            let lat = instances::random_lattice(dim, shape, seed)?;
            let mut document =
                Document::new("lattice", doc::value_of(&doc::lattice_to_doc(&lat)));
            document.seed = Some(seed);
            Ok(document)
        }
        GenKind::CslPair => {
            doc::check_dim("m", m)?;
            doc::check_dim("n", n)?;
            let (b, a) = instances::random_csl_pair(n, m, seed, tol)?;
            let pair = doc::CslPairDoc {
                a: doc::lattice_to_doc(a.lattice()),
                b: doc::lattice_to_doc(b.lattice()),
            };
            let mut document = Document::new("csl_pair", doc::value_of(&pair));
            document.seed = Some(seed);
            Ok(document)
        }
    }
}
