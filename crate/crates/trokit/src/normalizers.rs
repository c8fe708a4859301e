//! Semi-normalizers and normalizers between CSL algebras: membership checks,
//! the `U_φ` covers, module-condition reports, module closures, empirical
//! maximality probes and sum analysis.
//!
//! CSL algebras are restricted to diagonal (commutative, atomic) lattices,
//! which keeps every invariant projection list finite and enumerable.

use std::collections::BTreeSet;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::maps::{self, OpMode, SubspaceMap};
use crate::masa::{self, DiagonalLattice};
use crate::numkernel::linalg::{self, CMat};
use crate::numkernel::{
    gaussian_matrix, hs_norm, hs_orthonormalize, op_norm, range_projection, subspace_contains,
    OperatorSubspace, Projection, ToleranceConfig,
};
use crate::tro;

/// `Alg L` for a diagonal lattice, together with its diagonal `A ∩ A*`.
#[derive(Debug, Clone)]
pub struct CslAlgebra {
    lattice: DiagonalLattice,
    algebra: OperatorSubspace,
    diagonal: OperatorSubspace,
}

impl CslAlgebra {
    pub fn dim(&self) -> usize {
        self.lattice.dim()
    }

    pub fn lattice(&self) -> &DiagonalLattice {
        &self.lattice
    }

    pub fn algebra(&self) -> &OperatorSubspace {
        &self.algebra
    }

    pub fn diagonal(&self) -> &OperatorSubspace {
        &self.diagonal
    }

    pub fn lattice_projections(&self) -> Vec<Projection> {
        self.lattice.projections()
    }
}

/// The pattern algebra `{T : T_{y,x} = 0 unless every member containing x
/// also contains y}` of a diagonal lattice containing 0 and I.
pub fn alg_of_lattice(lattice: &DiagonalLattice, _tol: &ToleranceConfig) -> Result<CslAlgebra> {
    if !lattice.contains_zero() || !lattice.contains_full() {
        return Err(Error::NotALattice(
            "lattice must contain 0 and the identity".into(),
        ));
    }
    let d = lattice.dim();
    let mut allowed = BTreeSet::new();
    for x in 0..d {
        for y in 0..d {
            let ok = lattice
                .members()
                .iter()
                .all(|s| !s.contains(&x) || s.contains(&y));
            if ok {
                allowed.insert((x, y));
            }
        }
    }
    let pattern = masa::SupportPattern::new(d, d, allowed.clone())?;
    let algebra = masa::pattern_space(&pattern);
    let sym: BTreeSet<(usize, usize)> = allowed
        .iter()
        .filter(|&&(x, y)| allowed.contains(&(y, x)))
        .copied()
        .collect();
    let diagonal = masa::pattern_space(&masa::SupportPattern::new(d, d, sym)?);
    Ok(CslAlgebra {
        lattice: lattice.clone(),
        algebra,
        diagonal,
    })
}

/// Verdict of a (semi-)normalizer membership test; on failure `witnesses`
/// lists the offending basis elements with the conjugation defect, on
/// success `cover` may carry the reflexive normalizing envelope.
#[derive(Debug, Clone)]
pub struct NormalizerReport {
    pub subject: CMat,
    pub verdict: bool,
    pub witnesses: Vec<(CMat, f64)>,
    pub cover: Option<Cover>,
}

#[derive(Debug, Clone)]
pub struct Cover {
    pub phi: SubspaceMap,
    pub space: OperatorSubspace,
}

/// `T ∈ SN(B,A)` iff `T* Bᵢ T ∈ A` for every basis element `Bᵢ`;
/// linearity makes the basis sufficient.
pub fn sn_check(
    t: &CMat,
    b: &CslAlgebra,
    a: &CslAlgebra,
    tol: &ToleranceConfig,
) -> Result<NormalizerReport> {
    if t.nrows() != b.dim() || t.ncols() != a.dim() {
        return Err(Error::dims(
            format!("{}x{}", b.dim(), a.dim()),
            format!("{}x{}", t.nrows(), t.ncols()),
        ));
    }
    let mut witnesses = Vec::new();
    for bi in b.algebra().basis() {
        let conj = t.adjoint() * bi * t;
        let (inside, distance) = subspace_contains(a.algebra(), &conj, tol)?;
        if !inside {
            witnesses.push((bi.clone(), distance));
        }
    }
    Ok(NormalizerReport {
        subject: t.clone(),
        verdict: witnesses.is_empty(),
        witnesses,
        cover: None,
    })
}

/// Whole-space membership `U ⊆ SN(B,A)`. Conjugation is sesquilinear in the
/// operator, so the basis pair products `Tᵢ* B Tⱼ` decide membership of
/// every linear combination; checking single basis elements would not.
pub fn space_sn_check(
    u: &OperatorSubspace,
    b: &CslAlgebra,
    a: &CslAlgebra,
    tol: &ToleranceConfig,
) -> Result<bool> {
    for ti in u.basis() {
        for tj in u.basis() {
            for bi in b.algebra().basis() {
                let conj = ti.adjoint() * bi * tj;
                if !subspace_contains(a.algebra(), &conj, tol)?.0 {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Whole-space membership `U ⊆ N(B,A)`.
pub fn space_n_check(
    u: &OperatorSubspace,
    b: &CslAlgebra,
    a: &CslAlgebra,
    tol: &ToleranceConfig,
) -> Result<bool> {
    Ok(space_sn_check(u, b, a, tol)? && space_sn_check(&u.adjoint_space(), a, b, tol)?)
}

/// `T ∈ N(B,A)`: a semi-normalizer whose adjoint semi-normalizes the other
/// way. Witnesses from both directions are pooled.
pub fn n_check(
    t: &CMat,
    b: &CslAlgebra,
    a: &CslAlgebra,
    tol: &ToleranceConfig,
) -> Result<NormalizerReport> {
    let forward = sn_check(t, b, a, tol)?;
    let backward = sn_check(&t.adjoint(), a, b, tol)?;
    let mut witnesses = forward.witnesses;
    witnesses.extend(backward.witnesses);
    Ok(NormalizerReport {
        subject: t.clone(),
        verdict: witnesses.is_empty(),
        witnesses,
        cover: None,
    })
}

fn first_witness_error(report: &NormalizerReport) -> Error {
    let residual = report.witnesses.first().map(|w| w.1).unwrap_or(f64::NAN);
    Error::NotSemiNormalizer { index: 0, residual }
}

/// The map `φ(L) = [B T L]` of a semi-normalizer, stored on every member of
/// `l1`. Rejects `T ∉ SN(Alg l1 → checked against B)` with the witness.
pub fn phi_from(
    t: &CMat,
    b: &CslAlgebra,
    l1: &DiagonalLattice,
    tol: &ToleranceConfig,
) -> Result<SubspaceMap> {
    let a = alg_of_lattice(l1, tol)?;
    let report = sn_check(t, b, &a, tol)?;
    if !report.verdict {
        return Err(first_witness_error(&report));
    }
    let n = b.dim();
    // φ is invariant under scaling T; the unit scale makes the rank floor
    // of the pushed stacks sound.
    let t_norm = hs_norm(t);
    let t_unit = if t_norm > 0.0 {
        t.unscale(t_norm)
    } else {
        t.clone()
    };
    let mut generators = Vec::with_capacity(l1.members().len());
    for l in l1.projections() {
        let pushed: Vec<CMat> = b
            .algebra()
            .basis()
            .iter()
            .map(|bi| bi * &t_unit * l.matrix())
            .collect();
        let phi_l = crate::numkernel::range_projection_floored(n, &pushed, tol, 1.0)?;
        // φ(L) is an invariant projection of B by construction; verify.
        for bi in b.algebra().basis() {
            let defect = op_norm(&(phi_l.complement().matrix() * bi * phi_l.matrix()));
            if defect > tol.eq_tol {
                return Err(Error::Numerical(format!(
                    "φ(L) failed Lat B invariance by {defect:.3e}"
                )));
            }
        }
        generators.push((l, phi_l));
    }
    SubspaceMap::from_generators(l1.dim(), n, generators, tol)
}

/// `U_φ = {T : TL = φ(L)T for all L ∈ L₁}`, the reflexive normalizing
/// subspace attached to a lattice map.
pub fn nu_phi(
    phi: &SubspaceMap,
    l1: &DiagonalLattice,
    tol: &ToleranceConfig,
) -> Result<OperatorSubspace> {
    for l in l1.projections() {
        let covered = phi
            .generators()
            .iter()
            .any(|(gl, _)| gl.approx_eq(&l, tol));
        if !covered {
            return Err(Error::Precondition(
                "map generators do not cover the lattice".into(),
            ));
        }
    }
    maps::op_space(
        phi.source_dim(),
        phi.target_dim(),
        phi.generators(),
        OpMode::Intertwiner,
        tol,
    )
}

/// Semi-normalizer check plus the reflexive normalizing cover `U_φ` of a
/// passing operator: certifies `T ∈ U_φ` and that every basis element of
/// `U_φ` passes [`sn_check`].
pub fn sn_cover(
    t: &CMat,
    b: &CslAlgebra,
    a: &CslAlgebra,
    tol: &ToleranceConfig,
) -> Result<NormalizerReport> {
    let mut report = sn_check(t, b, a, tol)?;
    if !report.verdict {
        return Ok(report);
    }
    let phi = phi_from(t, b, a.lattice(), tol)?;
    let space = nu_phi(&phi, a.lattice(), tol)?;
    let (inside, d) = subspace_contains(&space, t, tol)?;
    if !inside {
        return Err(Error::Numerical(format!(
            "cover does not contain its seed operator (distance {d:.3e})"
        )));
    }
    if !space_sn_check(&space, b, a, tol)? {
        return Err(Error::Numerical(
            "cover escapes the semi-normalizer set".into(),
        ));
    }
    report.cover = Some(Cover { phi, space });
    Ok(report)
}

/// Normalizer check plus the two-sided cover `U_φ ∩ (V_ψ)*` of a passing
/// operator; every basis element of the cover passes [`n_check`].
pub fn n_cover(
    t: &CMat,
    b: &CslAlgebra,
    a: &CslAlgebra,
    tol: &ToleranceConfig,
) -> Result<NormalizerReport> {
    let mut report = n_check(t, b, a, tol)?;
    if !report.verdict {
        return Ok(report);
    }
    let phi = phi_from(t, b, a.lattice(), tol)?;
    let u_phi = nu_phi(&phi, a.lattice(), tol)?;
    let psi = phi_from(&t.adjoint(), a, b.lattice(), tol)?;
    let v_psi = nu_phi(&psi, b.lattice(), tol)?;
    let space = u_phi.intersect(&v_psi.adjoint_space(), tol)?;
    let (inside, d) = subspace_contains(&space, t, tol)?;
    if !inside {
        return Err(Error::Numerical(format!(
            "two-sided cover does not contain its seed operator (distance {d:.3e})"
        )));
    }
    if !space_n_check(&space, b, a, tol)? {
        return Err(Error::Numerical("cover escapes the normalizer set".into()));
    }
    report.cover = Some(Cover { phi, space });
    Ok(report)
}

/// Per-lattice-member condition row of [`module_check`].
#[derive(Debug, Clone)]
pub struct ModuleRow {
    pub member: BTreeSet<usize>,
    /// `‖χ(L) χ(L⊥)‖`.
    pub ortho_residual: f64,
    /// Invariance defect of `χₒ(Lₒ)` under the compressed algebra `Bₒ`;
    /// `None` when the orthogonality condition already failed (the
    /// compression is then ill-defined).
    pub invariance_residual: Option<f64>,
    pub pass: bool,
}

/// Detailed report of the module-condition characterization of
/// `U ⊆ SN(B,A)` (and `U ⊆ N(B,A)` when both directions are requested),
/// cross-validated against elementwise membership checks.
#[derive(Debug, Clone)]
pub struct ModuleReport {
    pub rows: Vec<ModuleRow>,
    pub verdict_sn: bool,
    pub elementwise_sn: bool,
    /// Rows for `Map U*` over `Lat B` (both-directions mode).
    pub adjoint_rows: Option<Vec<ModuleRow>>,
    /// `χₒ(Lat Aₒ) = Lat Bₒ` as projection sets (both-directions mode).
    pub bijection: Option<bool>,
    pub verdict_n: Option<bool>,
    pub elementwise_n: Option<bool>,
}

fn condition_rows(
    u: &OperatorSubspace,
    u_o: &OperatorSubspace,
    iso_src: &CMat,
    iso_tgt: &CMat,
    source_alg: &CslAlgebra,
    target_alg: &CslAlgebra,
    tol: &ToleranceConfig,
) -> Result<Vec<ModuleRow>> {
    let mut rows = Vec::new();
    for (member, l) in source_alg
        .lattice()
        .members()
        .iter()
        .zip(source_alg.lattice_projections())
    {
        let chi_l = maps::map_of(u, &l, tol)?;
        let chi_lc = maps::map_of(u, &l.complement(), tol)?;
        let ortho = op_norm(&(chi_l.matrix() * chi_lc.matrix()));
        if ortho > tol.eq_tol || u.is_zero() {
            rows.push(ModuleRow {
                member: member.clone(),
                ortho_residual: ortho,
                invariance_residual: None,
                pass: ortho <= tol.eq_tol,
            });
            continue;
        }
        // L commutes with the kernel block once orthogonality holds, so the
        // compression to K₁ is a projection.
        let compressed = iso_src.adjoint() * l.matrix() * iso_src;
        let idem = op_norm(&(&compressed * &compressed - &compressed));
        if idem > 1e3 * tol.eq_tol {
            rows.push(ModuleRow {
                member: member.clone(),
                ortho_residual: ortho,
                invariance_residual: Some(f64::INFINITY),
                pass: false,
            });
            continue;
        }
        let l_o = Projection::new_unchecked(compressed);
        let chi_o = maps::map_of(u_o, &l_o, tol)?;
        let mut inv: f64 = 0.0;
        for bi in target_alg.algebra().basis() {
            let b_o = iso_tgt.adjoint() * bi * iso_tgt;
            inv = inv.max(op_norm(&(chi_o.complement().matrix() * b_o * chi_o.matrix())));
        }
        rows.push(ModuleRow {
            member: member.clone(),
            ortho_residual: ortho,
            invariance_residual: Some(inv),
            pass: inv <= tol.eq_tol,
        });
    }
    Ok(rows)
}

/// Evaluates the lattice-side characterization of `U ⊆ SN(B,A)`:
/// orthogonality of `χ` on every member of `Lat A` and, on the essential
/// part, invariance of `χₒ(Lₒ)` under `Bₒ`. The derived verdict is
/// cross-validated by [`sn_check`] on every basis element; with
/// `both_directions` the adjoint conditions and the lattice bijection of the
/// normalizer characterization are evaluated as well.
pub fn module_check(
    u: &OperatorSubspace,
    b: &CslAlgebra,
    a: &CslAlgebra,
    both_directions: bool,
    tol: &ToleranceConfig,
) -> Result<ModuleReport> {
    if u.rows() != b.dim() || u.cols() != a.dim() {
        return Err(Error::dims(
            format!("{}x{}", b.dim(), a.dim()),
            format!("{}x{}", u.rows(), u.cols()),
        ));
    }
    tro::require_normalizing(u, tol)?;
    let (u_o, iso1, iso2) = tro::essential_part(u, tol)?;
    let rows = condition_rows(u, &u_o, &iso1, &iso2, a, b, tol)?;
    let verdict_sn = rows.iter().all(|r| r.pass);
    let elementwise_sn = space_sn_check(u, b, a, tol)?;
    let (adjoint_rows, bijection, verdict_n, elementwise_n) = if both_directions {
        let u_star = u.adjoint_space();
        let (us_o, jso1, jso2) = tro::essential_part(&u_star, tol)?;
        let arows = condition_rows(&u_star, &us_o, &jso1, &jso2, b, a, tol)?;
        let averdict = arows.iter().all(|r| r.pass);
        // χₒ(Lat Aₒ) = Lat Bₒ as sets of projections on K₂.
        let mut chi_images = Vec::new();
        for l in a.lattice_projections() {
            let compressed = iso1.adjoint() * l.matrix() * &iso1;
            let idem = op_norm(&(&compressed * &compressed - &compressed));
            if idem > 1e3 * tol.eq_tol {
                chi_images.clear();
                break;
            }
            let l_o = Projection::new_unchecked(compressed);
            chi_images.push(maps::map_of(&u_o, &l_o, tol)?);
        }
        let mut lat_b_o = Vec::new();
        for mmem in b.lattice_projections() {
            let compressed = iso2.adjoint() * mmem.matrix() * &iso2;
            let idem = op_norm(&(&compressed * &compressed - &compressed));
            if idem > 1e3 * tol.eq_tol {
                lat_b_o.clear();
                break;
            }
            lat_b_o.push(Projection::new_unchecked(compressed));
        }
        let onto = !chi_images.is_empty()
            && !lat_b_o.is_empty()
            && chi_images
                .iter()
                .all(|p| lat_b_o.iter().any(|q| p.approx_eq(q, tol)))
            && lat_b_o
                .iter()
                .all(|q| chi_images.iter().any(|p| p.approx_eq(q, tol)));
        let elementwise = space_n_check(u, b, a, tol)?;
        let verdict = verdict_sn && averdict && onto;
        (Some(arows), Some(onto), Some(verdict), Some(elementwise))
    } else {
        (None, None, None, None)
    };
    Ok(ModuleReport {
        rows,
        verdict_sn,
        elementwise_sn,
        adjoint_rows,
        bijection,
        verdict_n,
        elementwise_n,
    })
}

/// Right-module closure `[U · A_d]`, iterated to stability; the result is
/// normalizing and stays inside `SN(B,A)`. Every basis element of the input
/// must already pass [`sn_check`].
pub fn a_module_closure(
    u: &OperatorSubspace,
    b: &CslAlgebra,
    a: &CslAlgebra,
    tol: &ToleranceConfig,
) -> Result<OperatorSubspace> {
    if !space_sn_check(u, b, a, tol)? {
        return Err(Error::Precondition(
            "input is not a linear space of semi-normalizers".into(),
        ));
    }
    if u.is_zero() {
        return Ok(u.clone());
    }
    let mut space = u.clone();
    loop {
        let snapshot = space.basis().to_vec();
        let mut grew = false;
        for t in &snapshot {
            for d in a.diagonal().basis() {
                let prod = t * d;
                grew |= space.absorb(&prod, tol.rank_tol);
            }
        }
        if !grew {
            break;
        }
    }
    let space = hs_orthonormalize(space.basis(), tol)?;
    if let Some((i, j, k, residual)) = tro::normalizing_witness(&space, tol) {
        return Err(Error::NotNormalizing { i, j, k, residual });
    }
    if !space_sn_check(&space, b, a, tol)? {
        return Err(Error::Numerical(
            "module closure escaped the semi-normalizer set".into(),
        ));
    }
    Ok(space)
}

/// Outcome of the empirical maximality probe.
#[derive(Debug, Clone)]
pub struct MaximalityOutcome {
    /// Every trial direction broke the semi-normalizer property; this is a
    /// probabilistic verdict, not a certificate.
    pub maximal: bool,
    /// A direction whose span with `U` survived all probes.
    pub enlargement: Option<CMat>,
    pub trials: usize,
}

/// Probes whether `u` can be enlarged inside `SN(B,A)`: for each random
/// direction `T ∉ U` the span `U + CT` is searched for a non-semi-normalizer
/// through polarization probes. Preconditions (essential, normalizing, right
/// `A_d`-module, `U ⊆ SN`) are enforced and violations rejected.
pub fn maximality_check(
    u: &OperatorSubspace,
    b: &CslAlgebra,
    a: &CslAlgebra,
    trials: usize,
    seed: u64,
    tol: &ToleranceConfig,
) -> Result<MaximalityOutcome> {
    tro::require_normalizing(u, tol)?;
    let prof = tro::profile(u, tol)?;
    if !prof.essential {
        return Err(Error::Precondition(
            "subspace is not essential (kernel or cokernel is nontrivial)".into(),
        ));
    }
    for t in u.basis() {
        for d in a.diagonal().basis() {
            let (inside, _) = subspace_contains(u, &(t * d), tol)?;
            if !inside {
                return Err(Error::Precondition(
                    "subspace is not a right module over the diagonal of A".into(),
                ));
            }
        }
    }
    if !space_sn_check(u, b, a, tol)? {
        return Err(Error::Precondition(
            "subspace is not contained in the semi-normalizer set".into(),
        ));
    }
    if u.dim() == u.rows() * u.cols() {
        // No direction lies outside the full space.
        return Ok(MaximalityOutcome {
            maximal: true,
            enlargement: None,
            trials: 0,
        });
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let raw = gaussian_matrix(u.rows(), u.cols(), &mut rng);
        let t = &raw - u.project(&raw);
        if hs_norm(&t) <= tol.eq_tol {
            continue;
        }
        // span(U ∪ CT) ⊆ SN is decided exactly by the sesquilinear pair
        // products of the extended basis.
        let mut extended = u.basis().to_vec();
        extended.push(t.unscale(hs_norm(&t)));
        let span = hs_orthonormalize(&extended, tol)?;
        if space_sn_check(&span, b, a, tol)? {
            return Ok(MaximalityOutcome {
                maximal: false,
                enlargement: Some(t),
                trials,
            });
        }
    }
    Ok(MaximalityOutcome {
        maximal: true,
        enlargement: None,
        trials,
    })
}

/// Which membership notion a sum analysis runs under.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckMode {
    Sn,
    N,
}

/// Result of the sum analysis of two (semi-)normalizers.
#[derive(Debug, Clone)]
pub struct SumReport {
    /// Whether `T+S` is itself a (semi-)normalizer.
    pub verdict: bool,
    /// Offending algebra element and defect when the sum fails.
    pub witness: Option<(CMat, f64)>,
    /// The generic coefficient used for the common cover.
    pub lambda: Option<f64>,
    /// Reflexive normalizing masa-bimodule containing both summands.
    pub cover: Option<OperatorSubspace>,
    pub c64_checked: usize,
    pub c64_failures: usize,
}

fn single_pattern(t: &CMat, tol: &ToleranceConfig) -> Result<masa::SupportPattern> {
    if hs_norm(t) <= tol.eq_tol {
        return masa::SupportPattern::new(t.ncols(), t.nrows(), BTreeSet::new());
    }
    let span = hs_orthonormalize(std::slice::from_ref(t), tol)?;
    Ok(masa::pattern_of(&span, tol))
}

/// Tests `T+S`; on success constructs the common reflexive normalizing
/// masa-bimodule through a generic combination `T+λS` and verifies the
/// diagonal-conjugation consequence on sampled combinations.
pub fn sum_check(
    t: &CMat,
    s: &CMat,
    b: &CslAlgebra,
    a: &CslAlgebra,
    mode: CheckMode,
    seed: u64,
    tol: &ToleranceConfig,
) -> Result<SumReport> {
    let run_check = |x: &CMat| -> Result<NormalizerReport> {
        match mode {
            CheckMode::Sn => sn_check(x, b, a, tol),
            CheckMode::N => n_check(x, b, a, tol),
        }
    };
    let rt = run_check(t)?;
    if !rt.verdict {
        return Err(first_witness_error(&rt));
    }
    let rs = run_check(s)?;
    if !rs.verdict {
        return Err(first_witness_error(&rs));
    }
    let sum = t + s;
    let rsum = run_check(&sum)?;
    if !rsum.verdict {
        let witness = rsum.witnesses.into_iter().next();
        return Ok(SumReport {
            verdict: false,
            witness,
            lambda: None,
            cover: None,
            c64_checked: 0,
            c64_failures: 0,
        });
    }
    // Generic λ ∈ [1/2, 2]: retried while any jointly nonzero entry cancels.
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut lambda = 1.0;
    let mut ok = false;
    for _ in 0..8 {
        lambda = rng.random_range(0.5..=2.0);
        ok = true;
        'scan: for i in 0..t.nrows() {
            for j in 0..t.ncols() {
                let live = t[(i, j)].norm() > tol.eq_tol || s[(i, j)].norm() > tol.eq_tol;
                if live && (t[(i, j)] + s[(i, j)].scale(lambda)).norm() < tol.eq_tol {
                    ok = false;
                    break 'scan;
                }
            }
        }
        if ok {
            break;
        }
    }
    if !ok {
        return Err(Error::Numerical(
            "no cancellation-free generic coefficient found in 8 draws".into(),
        ));
    }
    let combo = t + s.scale(lambda);
    let cover_report = match mode {
        CheckMode::Sn => sn_cover(&combo, b, a, tol)?,
        CheckMode::N => n_cover(&combo, b, a, tol)?,
    };
    let cover = cover_report
        .cover
        .ok_or_else(|| Error::Numerical("generic combination lost membership".into()))?
        .space;
    let pattern_t = single_pattern(t, tol)?;
    let pattern_s = single_pattern(s, tol)?;
    let cover_pattern = masa::pattern_of(&cover, tol);
    let wanted = pattern_t.union(&pattern_s)?;
    if !wanted.is_subset_of(&cover_pattern) {
        return Err(Error::Numerical(
            "common cover does not dominate the union of supports".into(),
        ));
    }
    for x in [t, s] {
        let (inside, d) = subspace_contains(&cover, x, tol)?;
        if !inside {
            return Err(Error::Numerical(format!(
                "summand escapes the common cover by {d:.3e}"
            )));
        }
    }
    // Diagonal-conjugation consequence on sampled combinations.
    let c64_checked = 20;
    let mut c64_failures = 0;
    for _ in 0..c64_checked {
        let b1 = random_element(b.diagonal(), &mut rng);
        let b2 = random_element(b.diagonal(), &mut rng);
        let a1 = random_element(a.diagonal(), &mut rng);
        let a2 = random_element(a.diagonal(), &mut rng);
        let combo = &b1 * t * &a1 + &b2 * s * &a2;
        if !run_check(&combo)?.verdict {
            c64_failures += 1;
        }
    }
    Ok(SumReport {
        verdict: true,
        witness: None,
        lambda: Some(lambda),
        cover: Some(cover),
        c64_checked,
        c64_failures,
    })
}

fn random_element<R: Rng>(space: &OperatorSubspace, rng: &mut R) -> CMat {
    let mut out = CMat::zeros(space.rows(), space.cols());
    for b in space.basis() {
        let z = gaussian_matrix(1, 1, rng)[(0, 0)];
        out += b * z;
    }
    out
}

#[cfg(test)]
#[path = "normalizers_tests.rs"]
mod tests;
