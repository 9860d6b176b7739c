use std::sync::Arc;

use ftqlab::codes::rotated_surface;
use ftqlab::decoder::lookup_minweight_decoder;
use ftqlab::ft::{simulate_with_faults, FaultPath, Tableau};
use ftqlab::singleshot::{build_syndrome_extraction, memory_experiment, run_ec_round_with, SyndromeCircuit};
use ftqlab::teleport::encoded_state;
use ftqlab::toric::build_toric;
use ftqlab::{CssCode, Pauli1, PauliOp};

fn toric3() -> SyndromeCircuit {
    build_syndrome_extraction(Arc::new(build_toric(3).unwrap())).unwrap()
}

fn weight_le2(n: usize) -> Vec<PauliOp> {
    let mut out = vec![PauliOp::identity(n)];
    for a in 0..n {
        for pa in Pauli1::NONTRIVIAL {
            out.push(PauliOp::single(n, a, pa));
            for b in a + 1..n {
                for pb in Pauli1::NONTRIVIAL {
                    let mut e = PauliOp::single(n, a, pa);
                    e.set(b, pb);
                    out.push(e);
                }
            }
        }
    }
    out
}

#[test]
fn toric_depth_and_layers() {
    let sc = toric3();
    assert_eq!(sc.depth, 6);
    assert_eq!(sc.schedule.len(), 4);
    assert_eq!(sc.ancillas.len(), 18);
    let surf = build_syndrome_extraction(Arc::new(rotated_surface(3))).unwrap();
    assert_eq!(surf.depth, 6);
}

#[test]
fn frame_extraction_is_faithful() {
    let sc = toric3();
    let code = sc.code().clone();
    for e in weight_le2(code.n()) {
        let (s, end) = sc.extract(&e, &FaultPath::empty()).unwrap();
        assert_eq!(s, code.syndrome(&e).unwrap().bits, "{e}");
        assert!(end.same_bits(&e));
    }
}

/// The same circuit on an actual encoded state: measured -1 outcomes equal
/// the syndrome of a planted error. A schedule whose X and Z measurements
/// did not commute would give random outcomes here.
fn tableau_extraction(code: &CssCode, sc: &SyndromeCircuit, planted: &[PauliOp]) {
    let n = code.n();
    let k = code.k();
    let stabs: Vec<PauliOp> = (0..k).map(|i| PauliOp::single(k, i, Pauli1::Z)).collect();
    let data = encoded_state(code, &stabs).unwrap();
    let anc = Tableau::new(sc.ancillas.len());
    let data_q: Vec<usize> = (0..n).collect();
    for (i, e) in planted.iter().enumerate() {
        let mut input = data.tensor(&anc);
        input.apply_pauli(&data_q, e);
        for stream in 0..3 {
            let (_, rec) = simulate_with_faults(
                &sc.circuit,
                &FaultPath::empty(),
                input.clone(),
                4,
                (i * 3 + stream) as u64,
            )
            .unwrap();
            let s: Vec<bool> = sc.meas.iter().map(|&m| rec.outcomes[m].unwrap()).collect();
            let want = code.syndrome(e).unwrap().bits;
            assert_eq!(s, (0..want.len()).map(|j| want.get(j)).collect::<Vec<_>>(), "{e}");
        }
    }
}

#[test]
fn tableau_extraction_matches_syndromes() {
    let sc = toric3();
    let code = sc.code().clone();
    let planted: Vec<PauliOp> = weight_le2(code.n()).into_iter().step_by(37).collect();
    tableau_extraction(&code, &sc, &planted);
    let surf = Arc::new(rotated_surface(3));
    let ssc = build_syndrome_extraction(surf.clone()).unwrap();
    tableau_extraction(&surf, &ssc, &weight_le2(9).into_iter().step_by(11).collect::<Vec<_>>());
}

#[test]
fn clean_rounds_remove_correctable_and_stabilizer_errors() {
    let sc = toric3();
    let code = sc.code().clone();
    let dec = lookup_minweight_decoder(&code).unwrap();
    for q in 0..code.n() {
        for p in Pauli1::NONTRIVIAL {
            let mut e = PauliOp::single(code.n(), q, p);
            let st = run_ec_round_with(&sc, &dec, &mut e, &FaultPath::empty(), 1).unwrap();
            assert_eq!((st.weight_before, st.weight_after), (1, 0));
            assert!(st.survived);
        }
    }
    let mut s = code.generator(0).multiply(&code.generator(12)).unwrap();
    let st = run_ec_round_with(&sc, &dec, &mut s, &FaultPath::empty(), 1).unwrap();
    assert_eq!((st.weight_before, st.weight_after, st.correction_weight), (0, 0, 0));
}

/// A flipped syndrome bit on clean data: the decoder's response is the
/// whole residual.
#[test]
fn syndrome_flip_accounting() {
    let sc = toric3();
    let code = sc.code().clone();
    let dec = lookup_minweight_decoder(&code).unwrap();
    for g in 0..code.num_generators() {
        let loc = sc
            .circuit
            .locations
            .iter()
            .find(|l| l.meas == Some(sc.meas[g]))
            .unwrap();
        let flip = if loc.kind == ftqlab::ft::GateKind::MeasZ {
            Pauli1::X
        } else {
            Pauli1::Z
        };
        let path = FaultPath::single(loc.id, PauliOp::single(1, 0, flip));
        let mut e = PauliOp::identity(code.n());
        let st = run_ec_round_with(&sc, &dec, &mut e, &path, 1).unwrap();
        assert_eq!(st.syndrome_error_weight, 1);
        assert!(st.weight_after <= st.correction_weight);
    }
}

#[test]
fn memory_limits() {
    let sc = toric3();
    let code = sc.code().clone();
    let dec = lookup_minweight_decoder(&code).unwrap();
    let clean = memory_experiment(&sc, &dec, 0.0, 3, 20, 1, 2).unwrap();
    assert!(clean
        .rows
        .iter()
        .all(|r| r.survival == 1.0 && r.mean_reduced_weight == 0.0));
    let noisy = memory_experiment(&sc, &dec, 0.5, 4, 2000, 1, 2).unwrap();
    let last = noisy.rows.last().unwrap();
    // A uniformly random class on two logical qubits survives with 1/16.
    assert!(last.ci_low <= 1.0 / 16.0 && 1.0 / 16.0 <= last.ci_high, "{last:?}");
    let again = memory_experiment(&sc, &dec, 0.5, 4, 200, 9, 2).unwrap();
    assert_eq!(again, memory_experiment(&sc, &dec, 0.5, 4, 200, 9, 2).unwrap());
}

/// With every check read, no single fault anywhere in the extraction round
/// leaves a logical error behind.
#[test]
fn full_check_decoder_survives_every_single_fault() {
    let sc = toric3();
    let code = sc.code().clone();
    let dec = ftqlab::decoder::LookupDecoder::with_syndrome_errors(&code).unwrap();
    let plain = lookup_minweight_decoder(&code).unwrap();
    for e in weight_le2(code.n()).into_iter().step_by(5) {
        let s = code.syndrome(&e).unwrap();
        assert_eq!(
            dec.decode(&s).unwrap().weight(),
            plain.decode(&s).unwrap().weight(),
            "{e}"
        );
    }
    let mut plain_failures = 0;
    for loc in sc.circuit.quantum_locations() {
        for p in ftqlab::teleport::all_paulis(loc.qubits.len()).into_iter().skip(1) {
            let path = FaultPath::single(loc.id, p);
            let mut e = PauliOp::identity(code.n());
            assert!(
                run_ec_round_with(&sc, &dec, &mut e, &path, 1).unwrap().survived,
                "{path:?}"
            );
            let mut e = PauliOp::identity(code.n());
            plain_failures += !run_ec_round_with(&sc, &plain, &mut e, &path, 1).unwrap().survived as usize;
        }
    }
    assert!(plain_failures > 0);
}
