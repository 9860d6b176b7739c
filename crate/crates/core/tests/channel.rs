use ftqlab::channel::*;
use ftqlab::codes;
use ftqlab::{BinMatrix, BitVector, CssCode, PauliOp};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn pauli(s: &str) -> PauliOp {
    s.parse().unwrap()
}

fn bit_flip_derived() -> DerivedCode {
    let errs: Vec<PauliOp> = ["III", "XII", "IXI", "IIX"].iter().map(|s| pauli(s)).collect();
    build_derived_code(&codes::bit_flip(), &errs).unwrap()
}

fn ket(d: usize, i: usize) -> CVector {
    let mut v = CVector::zeros(d);
    v[i] = c(1.0);
    v
}

fn proj(v: &CVector) -> CMatrix {
    v * v.adjoint()
}

fn steane() -> CssCode {
    let rows = [[0, 2, 4, 6], [1, 2, 5, 6], [3, 4, 5, 6]];
    let h = BinMatrix::from_rows(7, rows.iter().map(|r| BitVector::from_indices(7, *r)).collect());
    CssCode::new(
        "steane",
        h.clone(),
        h,
        vec![PauliOp::x_type(BitVector::from_bools(&[true; 7]))],
        vec![PauliOp::z_type(BitVector::from_bools(&[true; 7]))],
    )
    .unwrap()
}

fn random_state(rng: &mut ChaCha8Rng, d: usize) -> CVector {
    let v = CVector::from_fn(d, |_, _| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
    let n = v.norm();
    v / c(n)
}

fn random_density(rng: &mut ChaCha8Rng, d: usize) -> CMatrix {
    let a = CMatrix::from_fn(d, d, |_, _| {
        Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
    });
    let rho = &a * a.adjoint();
    let t = rho.trace();
    rho / t
}

#[test]
fn repetition_encoder_columns() {
    let v = build_encoding_isometry(&codes::bit_flip()).unwrap();
    assert_eq!((v.rows(), v.cols()), (8, 2));
    for r in 0..8 {
        let want0 = if r == 0 { 1.0 } else { 0.0 };
        let want1 = if r == 7 { 1.0 } else { 0.0 };
        assert!((v.matrix()[(r, 0)] - c(want0)).norm() < 1e-12);
        assert!((v.matrix()[(r, 1)] - c(want1)).norm() < 1e-12);
    }
    assert!(v.isometry_residual() < 1e-12);
}

#[test]
fn encoded_states_are_stabilized() {
    let code = steane();
    let v = build_encoding_isometry(&code).unwrap();
    assert!(v.is_isometry(1e-10));
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..5 {
        let psi = v.matrix() * random_state(&mut rng, 2);
        for g in code.generators() {
            let s = DenseOperator::pauli(&g).unwrap();
            let e = (psi.adjoint() * s.matrix() * &psi)[(0, 0)];
            assert!((e - c(1.0)).norm() < 1e-10, "{g}");
        }
    }
    // Logical Z has the column index as its eigenvalue label.
    let z = DenseOperator::pauli(&code.logical_z()[0]).unwrap();
    for x in 0..2 {
        let col: CVector = v.matrix().column(x).into_owned();
        let e = (col.adjoint() * z.matrix() * &col)[(0, 0)];
        assert!((e - c(if x == 0 { 1.0 } else { -1.0 })).norm() < 1e-10);
    }
}

#[test]
fn oversized_code_is_rejected() {
    let code = codes::rotated_surface(5);
    assert!(matches!(
        build_encoding_isometry(&code),
        Err(ftqlab::Error::DenseCapExceeded { .. })
    ));
}

#[test]
fn derived_code_shapes() {
    let d = bit_flip_derived();
    assert_eq!(d.f_dim(), 4);
    assert!(d.defining_residual().unwrap() <= 1e-10);
    let trivial = build_derived_code(&codes::bit_flip(), &[pauli("III")]).unwrap();
    assert_eq!(trivial.f_dim(), 1);
    assert!((trivial.u().matrix() - trivial.encoder().matrix()).norm() < 1e-12);
    assert_eq!(
        build_derived_code(&codes::bit_flip(), &[pauli("III"), pauli("ZII")]).unwrap_err(),
        ftqlab::Error::DuplicateSyndrome { first: 0, second: 1 }
    );
    assert_eq!(
        build_derived_code(&codes::bit_flip(), &[pauli("XII")]).unwrap_err(),
        ftqlab::Error::MissingIdentity
    );
}

#[test]
fn steane_single_errors_fill_a_derived_code() {
    let code = steane();
    let mut errs = vec![PauliOp::identity(7)];
    for q in 0..7 {
        for p in ftqlab::Pauli1::NONTRIVIAL {
            errs.push(PauliOp::single(7, q, p));
        }
    }
    let d = build_derived_code(&code, &errs).unwrap();
    assert_eq!(d.l_dim(), 44);
    assert!(d.u().is_isometry(1e-10));
    assert!(d.defining_residual().unwrap() <= 1e-10);
}

#[test]
fn ideal_decoder_recovers_logical_states() {
    let d = bit_flip_derived();
    let mu = ideal_decoder(&d).unwrap();
    let v = d.encoder().matrix();
    let zero = proj(&ket(2, 0));
    let out = mu.apply(&(v * &zero * v.adjoint())).unwrap();
    assert!((out - &zero).norm() < 1e-12);

    let plus = proj(&(CVector::from_vec(vec![c(1.0), c(1.0)]) / c(2f64.sqrt())));
    let x1 = DenseOperator::pauli(&pauli("XII")).unwrap();
    let x1 = x1.matrix();
    let rho = x1 * v * &plus * v.adjoint() * x1.adjoint();
    assert!((mu.apply(&rho).unwrap() - &plus).norm() < 1e-12);

    // Every listed error is undone, for random logical inputs.
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let sigma = random_density(&mut rng, 2);
    for e in d.error_basis() {
        let e = DenseOperator::pauli(e).unwrap();
        let e = e.matrix();
        let rho = e * v * &sigma * v.adjoint() * e.adjoint();
        assert!((mu.apply(&rho).unwrap() - &sigma).norm() < 1e-12);
    }

    let on_l = d.embedding().unwrap().then(&mu).unwrap();
    assert!(on_l.is_channel(CHANNEL_TOL));
}

#[test]
fn decoder_inverts_any_encoding_transformation() {
    let d = bit_flip_derived();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let eta = random_density(&mut rng, d.f_dim());
    let enc = d.encoding_with(&eta).unwrap();
    let round = enc.then(&ideal_decoder(&d).unwrap()).unwrap();
    let id = Superoperator::identity(2).unwrap();
    assert!(choi_distance_bounds(&round, &id).unwrap().upper <= EXACT_TOL);
}

#[test]
fn transversal_x_represents_logical_x() {
    let d = bit_flip_derived();
    let (t, p) = channel_pair(d.base(), "transversal-x").unwrap();
    let rep = check_representation(&t, &p, &d, &d, EXACT_TOL).unwrap();
    for r in [rep.comm1, rep.comm2, rep.comm3] {
        assert!(r.upper <= EXACT_TOL, "{r:?}");
    }
    assert!(rep.passes(EXACT_TOL));
}

#[test]
fn identity_represents_identity() {
    let d = bit_flip_derived();
    let t = Superoperator::identity(8).unwrap();
    let p = Superoperator::identity(2).unwrap();
    let rep = check_representation(&t, &p, &d, &d, EXACT_TOL).unwrap();
    assert_eq!(rep.max_residual(), 0.0);
    assert!(rep.passes(EXACT_TOL));
}

#[test]
fn mismatched_logical_gate_is_detected() {
    let d = bit_flip_derived();
    let (t, p) = channel_pair(d.base(), "transversal-x/logical-z").unwrap();
    let rep = check_representation(&t, &p, &d, &d, EXACT_TOL).unwrap();
    assert!(rep.comm1.upper >= 1.0, "{:?}", rep.comm1);
    assert!(!rep.passes(EXACT_TOL));
}

#[test]
fn dimension_mismatch_is_an_error() {
    let d = bit_flip_derived();
    let t = Superoperator::identity(4).unwrap();
    let p = Superoperator::identity(2).unwrap();
    assert!(matches!(
        check_representation(&t, &p, &d, &d, EXACT_TOL),
        Err(ftqlab::Error::DimensionMismatch { .. })
    ));
}

#[test]
fn golden_cases_give_channels() {
    let cases = golden_cases().unwrap();
    assert!(!cases.is_empty());
    for case in &cases {
        let rep = run_golden_case(case).unwrap();
        assert!(rep.max_residual() <= case.expected_residual_max, "{case:?}");
        assert!(
            rep.r.is_channel(CHANNEL_TOL) && rep.s.is_channel(CHANNEL_TOL),
            "{case:?}"
        );
    }
}

/// Physical map equal to `(1 - eta) T + eta (Z0 ∘ T)`: a logical error with
/// probability `eta`.
fn noisy(t: &Superoperator, eta: f64) -> Superoperator {
    let z0 = Superoperator::pauli(&pauli("ZII")).unwrap();
    t.combine(1.0 - eta, &t.then(&z0).unwrap(), eta).unwrap()
}

#[test]
fn representations_compose() {
    let d = bit_flip_derived();
    let (tx, px) = channel_pair(d.base(), "transversal-x").unwrap();
    let (tz, pz) = channel_pair(d.base(), "transversal-z").unwrap();
    for eta in [0.0, 1e-3, 2e-2] {
        let t1 = noisy(&tx, eta);
        let t2 = noisy(&tz, eta / 2.0);
        let r1 = check_representation(&t1, &px, &d, &d, 1.0).unwrap().max_residual();
        let r2 = check_representation(&t2, &pz, &d, &d, 1.0).unwrap().max_residual();
        let eps = r1.max(r2);
        let both = check_representation(&t1.then(&t2).unwrap(), &px.then(&pz).unwrap(), &d, &d, 1.0).unwrap();
        assert!(
            both.max_residual() <= 2.0 * eps + 1e-9,
            "eta {eta}: {} vs {eps}",
            both.max_residual()
        );
    }
}

#[test]
fn transversal_x_factorizes() {
    let d = bit_flip_derived();
    let (t, p) = channel_pair(d.base(), "transversal-x").unwrap();
    let fac = factor_unitary_rule(&t, &d, &p, EXACT_TOL).unwrap();
    assert!(fac.residual <= EXACT_TOL);
    assert!(fac.f.is_channel(CHANNEL_TOL));
    // Transversal X commutes with every X error: F is the identity.
    let id = Superoperator::identity(4).unwrap();
    assert!(choi_distance_bounds(&fac.f, &id).unwrap().upper <= EXACT_TOL);
}

#[test]
fn transversal_z_factorizes_with_phase_on_syndromes() {
    let d = bit_flip_derived();
    let (t, p) = channel_pair(d.base(), "transversal-z").unwrap();
    let fac = factor_unitary_rule(&t, &d, &p, EXACT_TOL).unwrap();
    // Z on all qubits anticommutes with each single X error, giving the
    // syndrome-space unitary diag(1, -1, -1, -1).
    let diag = DMatrix::from_diagonal(&DVector::from_vec(vec![c(1.0), c(-1.0), c(-1.0), c(-1.0)]));
    let want = Superoperator::conjugation(&DenseOperator::new(diag)).unwrap();
    assert!(choi_distance_bounds(&fac.f, &want).unwrap().upper <= EXACT_TOL);
}

#[test]
fn factorization_round_trips() {
    let d = bit_flip_derived();
    let p = Superoperator::pauli(&pauli("X")).unwrap();
    for f in [
        Superoperator::identity(4).unwrap(),
        Superoperator::depolarizing(4, 0.3).unwrap(),
    ] {
        let r = d.lift(&p.tensor(&f).unwrap()).unwrap();
        let fac = factor_unitary_rule(&r, &d, &p, EXACT_TOL).unwrap();
        assert!(choi_distance_bounds(&fac.f, &f).unwrap().upper <= EXACT_TOL);
        let rebuilt = d.lift(&p.tensor(&fac.f).unwrap()).unwrap();
        assert!(choi_distance_bounds(&rebuilt, &r).unwrap().upper <= EXACT_TOL);
    }
}

#[test]
fn factorization_rejects_bad_inputs() {
    let d = bit_flip_derived();
    let (t, _) = channel_pair(d.base(), "transversal-x").unwrap();
    let dep = Superoperator::depolarizing(2, 0.1).unwrap();
    assert!(matches!(
        factor_unitary_rule(&t, &d, &dep, EXACT_TOL),
        Err(ftqlab::Error::NotUnitary { .. })
    ));
    let z = Superoperator::pauli(&pauli("Z")).unwrap();
    assert!(matches!(
        factor_unitary_rule(&t, &d, &z, EXACT_TOL),
        Err(ftqlab::Error::ResidualExceeded { .. })
    ));
}

#[test]
fn preparation_rule() {
    let d = bit_flip_derived();
    let v = d.encoder().matrix().clone();
    let zero = ket(2, 0);
    let logical0 = &v * &zero;

    let r = Superoperator::preparation(&proj(&logical0)).unwrap();
    let gamma = check_prep_rule(&r, &d, &zero, EXACT_TOL).unwrap();
    assert!((gamma - proj(&d.syndrome_state(0))).norm() < 1e-12);

    let x1 = DenseOperator::pauli(&pauli("XII")).unwrap();
    let r = Superoperator::preparation(&proj(&(x1.matrix() * &logical0))).unwrap();
    let gamma = check_prep_rule(&r, &d, &zero, EXACT_TOL).unwrap();
    assert!((gamma - proj(&d.syndrome_state(1))).norm() < 1e-12);

    let weights = [0.7, 0.1, 0.15, 0.05];
    let mut rho = CMatrix::zeros(8, 8);
    for (e, w) in d.error_basis().iter().zip(weights) {
        let s = DenseOperator::pauli(e).unwrap().matrix() * &logical0;
        rho += proj(&s) * c(w);
    }
    let r = Superoperator::preparation(&rho).unwrap();
    let gamma = check_prep_rule(&r, &d, &zero, EXACT_TOL).unwrap();
    let want = DMatrix::from_diagonal(&DVector::from_vec(weights.iter().map(|&w| c(w)).collect()));
    assert!((&gamma - want).norm() < 1e-12);
    assert!((&gamma * &gamma).trace().re < 1.0);

    // A logical superposition does not factor with |0⟩.
    let plus = (ket(2, 0) + ket(2, 1)) / c(2f64.sqrt());
    let r = Superoperator::preparation(&proj(&(&v * plus))).unwrap();
    assert!(check_prep_rule(&r, &d, &zero, EXACT_TOL).is_err());
}

#[test]
fn measurement_rule() {
    let d = bit_flip_derived();
    let p = Superoperator::basis_measurement(2).unwrap();
    let r = ideal_decoder(&d).unwrap().then(&p).unwrap();
    assert!(check_measurement_rule(&r, &d, &p).unwrap() <= EXACT_TOL);

    let mut kraus = r.kraus().unwrap().to_vec();
    kraus[0][(0, 0)] += c(1e-3);
    let perturbed = Superoperator::from_kraus(8, 2, kraus).unwrap();
    let res = check_measurement_rule(&perturbed, &d, &p).unwrap();
    assert!((1e-4..=1e-2).contains(&res), "{res}");

    let discard = Superoperator::trace(2).unwrap();
    let r = Superoperator::trace(8).unwrap();
    assert!(check_measurement_rule(&r, &d, &discard).unwrap() <= EXACT_TOL);

    let not_classical = Superoperator::identity(2).unwrap();
    assert!(check_measurement_rule(
        &r.then(&Superoperator::preparation(&CMatrix::identity(2, 2)).unwrap())
            .unwrap(),
        &d,
        &not_classical
    )
    .is_err());
}

#[test]
fn distance_bounds() {
    let id = Superoperator::identity(2).unwrap();
    let b = choi_distance_bounds(&id, &id).unwrap();
    assert_eq!((b.lower, b.upper), (0.0, 0.0));

    let x = Superoperator::pauli(&pauli("X")).unwrap();
    let b = choi_distance_bounds(&x, &id).unwrap();
    assert!((b.lower - 2.0).abs() < 1e-12 && (b.upper - 4.0).abs() < 1e-12);

    // Choi difference p(I/2 - |Ω⟩⟨Ω|) has eigenvalues -3p/2 and p/2 (three times).
    for p in [0.01, 0.2, 0.9] {
        let dep = Superoperator::depolarizing(2, p).unwrap();
        let b = choi_distance_bounds(&dep, &id).unwrap();
        assert!((b.upper - 3.0 * p).abs() < 1e-12, "{b:?}");
        assert!((b.lower - 1.5 * p).abs() < 1e-12, "{b:?}");
    }
}

#[test]
fn choi_criteria() {
    let dep = Superoperator::depolarizing(2, 0.4).unwrap();
    assert!(dep.is_channel(CHANNEL_TOL));
    // Transpose is positive but not completely positive.
    let transpose = Superoperator::from_fn(2, 2, |m| m.transpose()).unwrap();
    assert!(transpose.is_trace_preserving(CHANNEL_TOL));
    assert!(!transpose.is_completely_positive(CHANNEL_TOL));
    let half = dep.combine(0.5, &dep, 0.0).unwrap();
    assert!(half.is_completely_positive(CHANNEL_TOL) && !half.is_trace_preserving(CHANNEL_TOL));
}
