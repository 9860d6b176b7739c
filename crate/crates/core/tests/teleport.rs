use std::sync::Arc;

use ftqlab::ft::{FaultPath, Tableau};
use ftqlab::stats::stream_rng;
use ftqlab::teleport::{
    basis_inputs, build_ancilla_state, encoded_state, gate_set, logical_operator, random_input, single_fault_locality,
    teleport, verify_logical_action, AncillaSpec, CliffordTableau, CorrectionTable, LogicalGate, Teleporter,
};
use ftqlab::toric::build_toric;
use ftqlab::{CssCode, Error, PauliOp};

fn p(s: &str) -> PauliOp {
    s.parse().unwrap()
}

fn toric() -> Arc<CssCode> {
    Arc::new(build_toric(3).unwrap())
}

fn teleporter(gates: &[LogicalGate]) -> Teleporter {
    let spec = AncillaSpec::new(toric(), CliffordTableau::from_gates(2, gates)).unwrap();
    Teleporter::new(spec).unwrap()
}

fn on_block(code: &CssCode, total: usize, block: usize, l: &PauliOp) -> PauliOp {
    let n = code.n();
    let qs: Vec<usize> = (block * n..(block + 1) * n).collect();
    logical_operator(code, l).embed(total, &qs)
}

#[test]
fn identity_resource_holds_bell_pairs() {
    let code = toric();
    let spec = AncillaSpec::new(code.clone(), CliffordTableau::identity(2)).unwrap();
    let mut t = build_ancilla_state(&spec).unwrap();
    let n = code.n();
    for g in code.generators() {
        for b in 0..2 {
            let qs: Vec<usize> = (b * n..(b + 1) * n).collect();
            assert_eq!(t.expectation(&g.embed(2 * n, &qs)), Some(true));
        }
    }
    for l in ["XI", "IX", "ZI", "IZ"] {
        let pair = on_block(&code, 2 * n, 0, &p(l))
            .multiply(&on_block(&code, 2 * n, 1, &p(l)))
            .unwrap();
        assert_eq!(t.expectation(&pair), Some(true), "{l}");
        assert_eq!(t.expectation(&on_block(&code, 2 * n, 0, &p(l))), None);
    }
    assert_eq!(
        t.expectation(
            &on_block(&code, 2 * n, 0, &p("YI"))
                .multiply(&on_block(&code, 2 * n, 1, &p("YI")))
                .unwrap()
        ),
        Some(false)
    );
}

#[test]
fn hadamard_and_cnot_resources() {
    let code = toric();
    let n = code.n();
    let pair = |a: &str, b: &str| {
        on_block(&code, 2 * n, 0, &p(a))
            .multiply(&on_block(&code, 2 * n, 1, &p(b)))
            .unwrap()
    };
    let h = AncillaSpec::new(code.clone(), CliffordTableau::gate(2, &LogicalGate::H(0))).unwrap();
    let mut t = build_ancilla_state(&h).unwrap();
    assert_eq!(t.expectation(&pair("XI", "ZI")), Some(true));
    assert_eq!(t.expectation(&pair("ZI", "XI")), Some(true));
    let c = AncillaSpec::new(code.clone(), CliffordTableau::gate(2, &LogicalGate::Cnot(0, 1))).unwrap();
    let mut t = build_ancilla_state(&c).unwrap();
    assert_eq!(t.expectation(&pair("XI", "XX")), Some(true));
    assert_eq!(t.expectation(&pair("IZ", "ZZ")), Some(true));
    assert_eq!(t.expectation(&pair("ZI", "ZI")), Some(true));
}

#[test]
fn non_clifford_and_size_errors() {
    assert!(matches!(
        CliffordTableau::new(vec![p("XI"), p("IX")], vec![p("ZI"), p("XZ")]),
        Err(Error::NonClifford(_))
    ));
    let one = CliffordTableau::identity(1);
    assert!(AncillaSpec::new(toric(), one).is_err());
    let tp = teleporter(&[]);
    assert!(tp
        .teleport(&Tableau::new(5), &FaultPath::empty(), 1, 0, CorrectionTable::Standard)
        .is_err());
}

#[test]
fn cnot_truth_table() {
    let tp = teleporter(&[LogicalGate::Cnot(0, 1)]);
    let code = tp.spec.code.clone();
    for (input, out) in [
        (["-ZI", "IZ"], ["-ZI", "-IZ"]),
        (["ZI", "IZ"], ["ZI", "IZ"]),
        (["ZI", "-IZ"], ["ZI", "-IZ"]),
    ] {
        let stabs: Vec<PauliOp> = input.iter().map(|s| p(s)).collect();
        let data = encoded_state(&code, &stabs).unwrap();
        for stream in 0..8 {
            let mut res = teleport(&tp, &data, 5, stream).unwrap();
            let total = res.state.n();
            for o in out {
                assert_eq!(
                    res.state.expectation(&on_block(&code, total, 2, &p(o))),
                    Some(true),
                    "{input:?} -> {o}"
                );
            }
        }
    }
}

/// Random Clifford on a random input: the teleported block against the gate
/// sequence replayed on a bare `m`-qubit tableau.
#[test]
fn random_clifford_matches_direct_simulation() {
    let mut rng = stream_rng(77, 0);
    for trial in 0..6 {
        let (u, gates) = CliffordTableau::random(2, 12, &mut rng);
        let tp = Teleporter::new(AncillaSpec::new(toric(), u).unwrap()).unwrap();
        let code = tp.spec.code.clone();
        let stabs = random_input(2, &mut rng);
        let mut direct = Tableau::from_stabilizers(&stabs).unwrap();
        for g in &gates {
            g.apply(&mut direct);
        }
        let data = encoded_state(&code, &stabs).unwrap();
        let mut res = teleport(&tp, &data, 9, trial).unwrap();
        let total = res.state.n();
        for s in direct.stabilizers() {
            assert_eq!(
                res.state.expectation(&on_block(&code, total, 2, &s)),
                Some(true),
                "trial {trial} {s}"
            );
        }
    }
}

#[test]
fn shipped_gate_sets_pass_on_every_branch() {
    for (name, u) in gate_set("standard", 2).unwrap().into_iter().step_by(4) {
        let tp = Teleporter::new(AncillaSpec::new(toric(), u).unwrap()).unwrap();
        let rep = verify_logical_action(&tp, 2, 3, CorrectionTable::Standard).unwrap();
        assert!(rep.passed, "{name}: {rep:?}");
        assert_eq!(rep.min_branches, 16);
        assert_eq!(rep.inputs, 38);
    }
}

#[test]
fn swapped_table_gives_witness() {
    let tp = teleporter(&[]);
    let rep = verify_logical_action(&tp, 0, 3, CorrectionTable::Swapped).unwrap();
    assert!(!rep.passed);
    let w = rep.witness.expect("witness");
    assert_ne!(w.bell_x, w.bell_z);
}

#[test]
fn single_faults_stay_local() {
    for gates in [vec![], vec![LogicalGate::Cnot(0, 1), LogicalGate::H(1)]] {
        let tp = teleporter(&gates);
        let rep = single_fault_locality(&tp, &basis_inputs(2)[7], 11).unwrap();
        assert_eq!(rep.faults, 18 * 15 + 2 * 18 * 3 + 2 * 18 * 3);
        let w = rep.max_weight.expect("no logical deviation");
        assert!(w <= 2, "weight {w}");
    }
}
