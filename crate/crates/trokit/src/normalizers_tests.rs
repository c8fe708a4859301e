use rand::Rng;

use super::*;
use crate::instances;
use crate::numkernel::linalg::cone;
use crate::suites::{diagonal_masa_csl, upper_triangular_csl};
use crate::tro::is_normalizing;

fn tol() -> ToleranceConfig {
    ToleranceConfig::default()
}

fn unit(n: usize, m: usize, i: usize, j: usize) -> CMat {
    let mut e = CMat::zeros(n, m);
    e[(i - 1, j - 1)] = cone();
    e
}

fn set(items: &[usize]) -> BTreeSet<usize> {
    items.iter().copied().collect()
}

#[test]
fn alg_of_nest_is_upper_triangular() {
    let ut2 = upper_triangular_csl(2, &tol());
    assert_eq!(ut2.algebra().dim(), 3);
    assert!(subspace_contains(ut2.algebra(), &unit(2, 2, 1, 2), &tol())
        .unwrap()
        .0);
    assert!(!subspace_contains(ut2.algebra(), &unit(2, 2, 2, 1), &tol())
        .unwrap()
        .0);
    assert_eq!(ut2.diagonal().dim(), 2);
}

#[test]
fn alg_of_trivial_lattice_is_full() {
    let lat = DiagonalLattice::try_new(2, vec![set(&[]), set(&[0, 1])]).unwrap();
    let alg = alg_of_lattice(&lat, &tol()).unwrap();
    assert_eq!(alg.algebra().dim(), 4);
}

#[test]
fn alg_of_boolean_atoms_is_diagonal() {
    let d = diagonal_masa_csl(2, &tol());
    assert_eq!(d.algebra().dim(), 2);
    assert_eq!(d.diagonal().dim(), 2);
}

#[test]
fn alg_rejects_lattice_without_extremes() {
    let lat = DiagonalLattice::try_new(2, vec![set(&[0])]).unwrap();
    assert!(matches!(
        alg_of_lattice(&lat, &tol()),
        Err(Error::NotALattice(_))
    ));
}

#[test]
fn csl_algebra_invariants_hold() {
    // algebra contains I, is closed under products, and the lattice members
    // are invariant.
    for seed in 0..6 {
        let lat = instances::random_lattice(4, instances::LatticeKind::General, seed).unwrap();
        let alg = alg_of_lattice(&lat, &tol()).unwrap();
        let eye = linalg::identity(4);
        assert!(subspace_contains(alg.algebra(), &eye, &tol()).unwrap().0);
        for x in alg.algebra().basis() {
            for y in alg.algebra().basis() {
                assert!(subspace_contains(alg.algebra(), &(x * y), &tol()).unwrap().0);
            }
            for l in alg.lattice_projections() {
                let defect = op_norm(&(l.complement().matrix() * x * l.matrix()));
                assert!(defect <= tol().eq_tol);
            }
        }
    }
}

#[test]
fn paper_fixture_e21_between_nest_algebras() {
    let ut2 = upper_triangular_csl(2, &tol());
    let e21 = unit(2, 2, 2, 1);
    assert!(sn_check(&e21, &ut2, &ut2, &tol()).unwrap().verdict);
    assert!(n_check(&e21, &ut2, &ut2, &tol()).unwrap().verdict);

    let t = unit(2, 2, 1, 1) + unit(2, 2, 2, 1);
    assert!(sn_check(&t, &ut2, &ut2, &tol()).unwrap().verdict);

    // identity is always a normalizer of an algebra into itself
    assert!(n_check(&linalg::identity(2), &ut2, &ut2, &tol())
        .unwrap()
        .verdict);
}

#[test]
fn row_vector_breaks_the_diagonal_masa() {
    let d = diagonal_masa_csl(2, &tol());
    let t = unit(2, 2, 1, 1) + unit(2, 2, 1, 2);
    let report = sn_check(&t, &d, &d, &tol()).unwrap();
    assert!(!report.verdict);
    assert!(!report.witnesses.is_empty());
    let n_report = n_check(&t, &d, &d, &tol()).unwrap();
    assert!(!n_report.verdict);
}

#[test]
fn flip_unit_normalizes_diagonal_masas() {
    let d = diagonal_masa_csl(2, &tol());
    assert!(n_check(&unit(2, 2, 1, 2), &d, &d, &tol()).unwrap().verdict);
}

#[test]
fn phi_from_e21_maps_the_nest_to_the_identity() {
    let ut2 = upper_triangular_csl(2, &tol());
    let phi = phi_from(&unit(2, 2, 2, 1), &ut2, ut2.lattice(), &tol()).unwrap();
    for (l, m) in phi.generators() {
        if l.is_zero(&tol()) {
            assert!(m.is_zero(&tol()));
        } else {
            // [UT2 · E21 · L] = I for L ∈ {P{0}, I}
            assert!(m.is_identity(&tol()));
        }
    }
}

#[test]
fn phi_from_zero_and_identity() {
    let ut2 = upper_triangular_csl(2, &tol());
    let phi0 = phi_from(&CMat::zeros(2, 2), &ut2, ut2.lattice(), &tol()).unwrap();
    for (_, m) in phi0.generators() {
        assert!(m.is_zero(&tol()));
    }
    let phi1 = phi_from(&linalg::identity(2), &ut2, ut2.lattice(), &tol()).unwrap();
    for (l, m) in phi1.generators() {
        assert!(l.approx_eq(m, &tol()));
    }
}

#[test]
fn phi_from_rejects_non_semi_normalizer() {
    let d = diagonal_masa_csl(2, &tol());
    let t = unit(2, 2, 1, 1) + unit(2, 2, 1, 2);
    assert!(matches!(
        phi_from(&t, &d, d.lattice(), &tol()),
        Err(Error::NotSemiNormalizer { .. })
    ));
}

#[test]
fn nu_phi_of_e21_cover_kills_the_second_column() {
    let ut2 = upper_triangular_csl(2, &tol());
    let phi = phi_from(&unit(2, 2, 2, 1), &ut2, ut2.lattice(), &tol()).unwrap();
    let space = nu_phi(&phi, ut2.lattice(), &tol()).unwrap();
    assert_eq!(space.dim(), 2);
    assert!(subspace_contains(&space, &unit(2, 2, 2, 1), &tol()).unwrap().0);
    assert!(subspace_contains(&space, &unit(2, 2, 1, 1), &tol()).unwrap().0);
    assert!(!subspace_contains(&space, &unit(2, 2, 1, 2), &tol()).unwrap().0);
}

#[test]
fn nu_phi_identity_map_gives_lattice_commutant() {
    let ut2 = upper_triangular_csl(2, &tol());
    let pairs: Vec<(Projection, Projection)> = ut2
        .lattice_projections()
        .into_iter()
        .map(|l| (l.clone(), l))
        .collect();
    let phi = SubspaceMap::from_generators(2, 2, pairs, &tol()).unwrap();
    let space = nu_phi(&phi, ut2.lattice(), &tol()).unwrap();
    // {T : TL = LT for the nest} = diagonal algebra
    assert_eq!(space.dim(), 2);
}

#[test]
fn nu_phi_zero_map_gives_zero_space() {
    let ut2 = upper_triangular_csl(2, &tol());
    let pairs: Vec<(Projection, Projection)> = ut2
        .lattice_projections()
        .into_iter()
        .map(|l| (l, Projection::zero(2)))
        .collect();
    let phi = SubspaceMap::from_generators(2, 2, pairs, &tol()).unwrap();
    let space = nu_phi(&phi, ut2.lattice(), &tol()).unwrap();
    assert_eq!(space.dim(), 0);
}

#[test]
fn sn_cover_certifies_the_nest_fixture() {
    let ut2 = upper_triangular_csl(2, &tol());
    let report = sn_cover(&unit(2, 2, 2, 1), &ut2, &ut2, &tol()).unwrap();
    assert!(report.verdict);
    let cover = report.cover.expect("cover of a passing operator");
    assert_eq!(cover.space.dim(), 2);
    assert!(is_normalizing(&cover.space, &tol()));

    // the identity's cover is the lattice commutant and contains I
    let report = sn_cover(&linalg::identity(2), &ut2, &ut2, &tol()).unwrap();
    let cover = report.cover.unwrap();
    assert!(subspace_contains(&cover.space, &linalg::identity(2), &tol())
        .unwrap()
        .0);

    // the zero operator's cover is the zero space
    let d = diagonal_masa_csl(2, &tol());
    let report = sn_cover(&CMat::zeros(2, 2), &d, &d, &tol()).unwrap();
    assert_eq!(report.cover.unwrap().space.dim(), 0);
}

#[test]
fn n_cover_intersects_both_directions() {
    let ut2 = upper_triangular_csl(2, &tol());
    let report = n_cover(&unit(2, 2, 2, 1), &ut2, &ut2, &tol()).unwrap();
    assert!(report.verdict);
    let cover = report.cover.expect("cover of a passing operator");
    assert!(subspace_contains(&cover.space, &unit(2, 2, 2, 1), &tol())
        .unwrap()
        .0);
    // failing input propagates the witness in the report
    let d = diagonal_masa_csl(2, &tol());
    let t = unit(2, 2, 1, 1) + unit(2, 2, 1, 2);
    let report = n_cover(&t, &d, &d, &tol()).unwrap();
    assert!(!report.verdict && report.cover.is_none() && !report.witnesses.is_empty());
}

#[test]
fn covers_are_reflexive_normalizing_bimodules() {
    let mut rng = instances::rng_from(31);
    for _ in 0..6 {
        let n = rng.random_range(2..=4);
        let m = rng.random_range(2..=4);
        let (b, a) = instances::random_csl_pair(n, m, rng.random(), &tol()).unwrap();
        let t = instances::random_semi_normalizer(&b, &a, rng.random(), &tol()).unwrap();
        let report = sn_cover(&t, &b, &a, &tol()).unwrap();
        assert!(report.verdict, "constructed operator must pass");
        let cover = report.cover.unwrap().space;
        assert!(is_normalizing(&cover, &tol()));
        assert!(crate::maps::is_reflexive_certified(&cover, rng.random(), &tol()).unwrap());
        // bimodule over the diagonals
        for t in cover.basis() {
            for d in a.diagonal().basis() {
                assert!(subspace_contains(&cover, &(t * d), &tol()).unwrap().0);
            }
            for d in b.diagonal().basis() {
                assert!(subspace_contains(&cover, &(d * t), &tol()).unwrap().0);
            }
        }
    }
}

#[test]
fn module_check_verdict_matches_elementwise_membership() {
    let ut2 = upper_triangular_csl(2, &tol());
    // U = span{E21}: all conditions pass.
    let u = hs_orthonormalize(&[unit(2, 2, 2, 1)], &tol()).unwrap();
    let report = module_check(&u, &ut2, &ut2, false, &tol()).unwrap();
    assert!(report.verdict_sn && report.elementwise_sn);

    // U = full M2 fails: U*U is not upper triangular.
    let full = OperatorSubspace::full(2, 2);
    let report = module_check(&full, &ut2, &ut2, false, &tol()).unwrap();
    assert!(!report.verdict_sn && !report.elementwise_sn);

    // U = {0} passes vacuously.
    let zero = OperatorSubspace::zero(2, 2);
    let report = module_check(&zero, &ut2, &ut2, false, &tol()).unwrap();
    assert!(report.verdict_sn && report.elementwise_sn);
}

#[test]
fn module_check_biconditional_on_random_instances() {
    let mut rng = instances::rng_from(32);
    let mut seen_false = false;
    for _ in 0..10 {
        let n = rng.random_range(2..=4);
        let m = rng.random_range(2..=4);
        let (b, a) = instances::random_csl_pair(n, m, rng.random(), &tol()).unwrap();
        let u = if rng.random::<bool>() {
            // constructed: inside SN by the cover theorem
            let t = instances::random_semi_normalizer(&b, &a, rng.random(), &tol()).unwrap();
            match sn_cover(&t, &b, &a, &tol()).unwrap().cover {
                Some(c) => c.space,
                None => continue,
            }
        } else {
            // arbitrary normalizing space: typically not in SN
            crate::tro::triple_closure(&[gaussian_matrix(n, m, &mut rng)], &tol()).unwrap()
        };
        let report = module_check(&u, &b, &a, true, &tol()).unwrap();
        assert_eq!(
            report.verdict_sn, report.elementwise_sn,
            "lattice conditions must match elementwise membership"
        );
        if let (Some(v), Some(e)) = (report.verdict_n, report.elementwise_n) {
            assert_eq!(v, e);
        }
        seen_false |= !report.verdict_sn;
    }
    assert!(seen_false, "expected at least one non-member instance");
}

#[test]
fn lattice_invariance_shadow_for_bimodules() {
    // When B·U·A ⊆ U, the map values on Lat A members land in Lat B and
    // conversely for the adjoint.
    let mut rng = instances::rng_from(33);
    for _ in 0..6 {
        let n = rng.random_range(2..=4);
        let m = rng.random_range(2..=4);
        let (b, a) = instances::random_csl_pair(n, m, rng.random(), &tol()).unwrap();
        // U = closure of B·T·A under the bimodule action
        let t = gaussian_matrix(n, m, &mut rng);
        let mut gens = Vec::new();
        for bb in b.algebra().basis() {
            for aa in a.algebra().basis() {
                gens.push(bb * &t * aa);
            }
        }
        let u = hs_orthonormalize(&gens, &tol()).unwrap();
        for l in a.lattice_projections() {
            let chi_l = crate::maps::map_of(&u, &l, &tol()).unwrap();
            for bb in b.algebra().basis() {
                let defect = op_norm(&(chi_l.complement().matrix() * bb * chi_l.matrix()));
                assert!(defect <= tol().eq_tol);
            }
        }
        let u_star = u.adjoint_space();
        for mproj in b.lattice_projections() {
            let psi_m = crate::maps::map_of(&u_star, &mproj, &tol()).unwrap();
            for aa in a.algebra().basis() {
                let defect = op_norm(&(psi_m.complement().matrix() * aa * psi_m.matrix()));
                assert!(defect <= tol().eq_tol);
            }
        }
    }
}

#[test]
fn star_product_containment_equals_ortho_and_split_conditions() {
    // Three routes of the kernel lemma: U*U ⊆ A ⟺ no ortho failures on
    // Lat A ⟺ every member splits against the kernel block with an
    // essential-part component.
    let mut rng = instances::rng_from(34);
    for trial in 0..8 {
        let m = rng.random_range(2..=4);
        let (b, a) = instances::random_csl_pair(m, m, rng.random(), &tol()).unwrap();
        let _ = &b;
        let u = if trial % 2 == 0 {
            crate::tro::triple_closure(&[gaussian_matrix(m, m, &mut rng)], &tol()).unwrap()
        } else {
            let t = instances::random_semi_normalizer(&b, &a, rng.random(), &tol()).unwrap();
            match sn_cover(&t, &b, &a, &tol()).unwrap().cover {
                Some(c) => c.space,
                None => continue,
            }
        };
        if u.is_zero() {
            continue;
        }
        // (1) star products inside A
        let mut inside = true;
        'outer: for x in u.basis() {
            for y in u.basis() {
                if !subspace_contains(a.algebra(), &(x.adjoint() * y), &tol())
                    .unwrap()
                    .0
                {
                    inside = false;
                    break 'outer;
                }
            }
        }
        // (2) orthogonality on all lattice members
        let report =
            crate::maps::is_ortho_map_on(&u, &a.lattice_projections(), &tol()).unwrap();
        // (3) split condition L = L₁ ⊕ L₂ against K₁
        let (_, iso1, _) = crate::tro::essential_part(&u, &tol()).unwrap();
        let k1 = &iso1 * iso1.adjoint();
        let mut splits = true;
        for l in a.lattice_projections() {
            let comm = op_norm(&(l.matrix() * &k1 - &k1 * l.matrix()));
            if comm > tol().eq_tol {
                splits = false;
                break;
            }
            // the K₁ component must pass the essential-part orthogonality
            let l1 = iso1.adjoint() * l.matrix() * &iso1;
            let l1p = Projection::new_unchecked(l1);
            let (u_o, _, _) = crate::tro::essential_part(&u, &tol()).unwrap();
            let chi = crate::maps::map_of(&u_o, &l1p, &tol()).unwrap();
            let chic = crate::maps::map_of(&u_o, &l1p.complement(), &tol()).unwrap();
            if chi.orthogonality_defect(&chic) > tol().eq_tol {
                splits = false;
                break;
            }
        }
        assert_eq!(inside, report.passed(), "routes (1) and (2) disagree");
        assert_eq!(inside, splits, "routes (1) and (3) disagree");
    }
}

#[test]
fn a_module_closure_keeps_stable_spans() {
    let ut2 = upper_triangular_csl(2, &tol());
    let u = hs_orthonormalize(&[unit(2, 2, 2, 1)], &tol()).unwrap();
    let closed = a_module_closure(&u, &ut2, &ut2, &tol()).unwrap();
    assert!(closed.equals(&u, &tol()).unwrap());

    let v = hs_orthonormalize(&[unit(2, 2, 1, 1) + unit(2, 2, 2, 1)], &tol()).unwrap();
    let closed = a_module_closure(&v, &ut2, &ut2, &tol()).unwrap();
    assert!(closed.equals(&v, &tol()).unwrap());

    let zero = OperatorSubspace::zero(2, 2);
    assert!(a_module_closure(&zero, &ut2, &ut2, &tol())
        .unwrap()
        .is_zero());
}

#[test]
fn a_module_closure_rejects_non_semi_normalizers() {
    let d = diagonal_masa_csl(2, &tol());
    let u = hs_orthonormalize(&[unit(2, 2, 1, 1) + unit(2, 2, 1, 2)], &tol()).unwrap();
    assert!(a_module_closure(&u, &d, &d, &tol()).is_err());
}

#[test]
fn a_module_closure_outputs_are_normalizing_semi_normalizers() {
    let mut rng = instances::rng_from(35);
    for _ in 0..6 {
        let n = rng.random_range(2..=4);
        let m = rng.random_range(2..=4);
        let (b, a) = instances::random_csl_pair(n, m, rng.random(), &tol()).unwrap();
        let t = instances::random_semi_normalizer(&b, &a, rng.random(), &tol()).unwrap();
        if crate::numkernel::hs_norm(&t) <= tol().eq_tol {
            continue;
        }
        let u = hs_orthonormalize(&[t], &tol()).unwrap();
        let closed = a_module_closure(&u, &b, &a, &tol()).unwrap();
        assert!(is_normalizing(&closed, &tol()));
        for elem in closed.basis() {
            assert!(sn_check(elem, &b, &a, &tol()).unwrap().verdict);
        }
        // right module stability
        for elem in closed.basis() {
            for d in a.diagonal().basis() {
                assert!(subspace_contains(&closed, &(elem * d), &tol()).unwrap().0);
            }
        }
    }
}

#[test]
fn maximality_rejects_non_essential_fixture() {
    // The strictly lower triangular space between nest algebras is the
    // worked counterexample: not essential, so the probe refuses to run.
    let ut2 = upper_triangular_csl(2, &tol());
    let u = hs_orthonormalize(&[unit(2, 2, 2, 1)], &tol()).unwrap();
    assert!(matches!(
        maximality_check(&u, &ut2, &ut2, 4, 5, &tol()),
        Err(Error::Precondition(_))
    ));
    // and indeed span{E11} ∪ U is still inside SN, as a whole space
    let t = unit(2, 2, 1, 1);
    assert!(sn_check(&t, &ut2, &ut2, &tol()).unwrap().verdict);
    let enlarged = hs_orthonormalize(&[unit(2, 2, 2, 1), t], &tol()).unwrap();
    assert!(space_sn_check(&enlarged, &ut2, &ut2, &tol()).unwrap());
}

#[test]
fn maximality_confirms_diagonal_pattern() {
    let d = diagonal_masa_csl(2, &tol());
    let u = hs_orthonormalize(&[unit(2, 2, 1, 1), unit(2, 2, 2, 2)], &tol()).unwrap();
    let outcome = maximality_check(&u, &d, &d, 8, 5, &tol()).unwrap();
    assert!(outcome.maximal);
    assert!(outcome.enlargement.is_none());
}

#[test]
fn maximality_of_full_space_is_vacuous() {
    let lat = DiagonalLattice::try_new(2, vec![set(&[]), set(&[0, 1])]).unwrap();
    let full_alg = alg_of_lattice(&lat, &tol()).unwrap();
    let outcome = maximality_check(
        &OperatorSubspace::full(2, 2),
        &full_alg,
        &full_alg,
        4,
        5,
        &tol(),
    )
    .unwrap();
    assert!(outcome.maximal && outcome.trials == 0);
}

#[test]
fn sum_fixture_row_fails_with_witness() {
    let d = diagonal_masa_csl(2, &tol());
    let report = sum_check(
        &unit(2, 2, 1, 1),
        &unit(2, 2, 1, 2),
        &d,
        &d,
        CheckMode::N,
        77,
        &tol(),
    )
    .unwrap();
    assert!(!report.verdict);
    let (witness, _) = report.witness.expect("failing sum carries a witness");
    // the offending basis element is E11
    assert!(crate::numkernel::hs_norm(&(&witness - &unit(2, 2, 1, 1))) < 1e-12);
}

#[test]
fn sum_fixture_diagonal_passes_with_diagonal_cover() {
    let d = diagonal_masa_csl(2, &tol());
    let report = sum_check(
        &unit(2, 2, 1, 1),
        &unit(2, 2, 2, 2),
        &d,
        &d,
        CheckMode::N,
        78,
        &tol(),
    )
    .unwrap();
    assert!(report.verdict);
    assert_eq!(report.c64_failures, 0);
    let cover = report.cover.unwrap();
    let diag = hs_orthonormalize(&[unit(2, 2, 1, 1), unit(2, 2, 2, 2)], &tol()).unwrap();
    assert!(cover.equals(&diag, &tol()).unwrap());
    let lambda = report.lambda.unwrap();
    assert!((0.5..=2.0).contains(&lambda));
}

#[test]
fn sum_with_zero_reduces_to_single_cover() {
    let ut2 = upper_triangular_csl(2, &tol());
    let report = sum_check(
        &unit(2, 2, 2, 1),
        &CMat::zeros(2, 2),
        &ut2,
        &ut2,
        CheckMode::Sn,
        79,
        &tol(),
    )
    .unwrap();
    assert!(report.verdict);
    let cover = report.cover.unwrap();
    let single = sn_cover(&unit(2, 2, 2, 1), &ut2, &ut2, &tol())
        .unwrap()
        .cover
        .unwrap()
        .space;
    assert!(cover.equals(&single, &tol()).unwrap());
}

#[test]
fn sum_rejects_non_member_inputs_up_front() {
    let d = diagonal_masa_csl(2, &tol());
    let bad = unit(2, 2, 1, 1) + unit(2, 2, 1, 2);
    assert!(sum_check(&bad, &unit(2, 2, 2, 2), &d, &d, CheckMode::Sn, 80, &tol()).is_err());
}

#[test]
fn generic_lambda_preserves_the_union_support() {
    // The set of cancellation coefficients is finite; the drawn λ must give
    // pattern(T+λS) = pattern(T) ∪ pattern(S).
    let mut rng = instances::rng_from(36);
    for _ in 0..6 {
        let n = rng.random_range(2..=4);
        let m = rng.random_range(2..=4);
        let (b, a) = instances::random_csl_pair(n, m, rng.random(), &tol()).unwrap();
        let t = instances::random_semi_normalizer(&b, &a, rng.random(), &tol()).unwrap();
        let s = instances::random_semi_normalizer(&b, &a, rng.random(), &tol()).unwrap();
        let report = match sum_check(&t, &s, &b, &a, CheckMode::Sn, rng.random(), &tol()) {
            Ok(r) => r,
            Err(_) => continue,
        };
        if !report.verdict {
            continue;
        }
        let cover = report.cover.unwrap();
        for x in [&t, &s] {
            assert!(subspace_contains(&cover, x, &tol()).unwrap().0);
        }
    }
}
