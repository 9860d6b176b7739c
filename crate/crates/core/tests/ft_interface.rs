use ftqlab::codes::{bit_flip, load_shipped};
use ftqlab::ft::circuit::{GateKind, Region};
use ftqlab::ft::encoder::input_tableau;
use ftqlab::ft::{
    build_interface_down, build_interface_up, build_round_trip, simulate_frame, simulate_with_faults, BasisState,
    CssEncoder, FaultPath, PauliFrame,
};
use ftqlab::{CssCode, Pauli1, PauliOp};

fn surface() -> CssCode {
    load_shipped("rotated-surface-5").unwrap()
}

fn signed(label: &str, minus: bool) -> PauliOp {
    let mut p: PauliOp = label.parse().unwrap();
    if minus {
        p.set_phase(p.phase() + 2);
    }
    p
}

fn nontrivial_paulis(k: usize) -> Vec<PauliOp> {
    (1..1usize << (2 * k))
        .map(|v| {
            let x = ftqlab::BitVector::from_u64(k, (v & ((1 << k) - 1)) as u64);
            let z = ftqlab::BitVector::from_u64(k, (v >> k) as u64);
            PauliOp::hermitian(x, z)
        })
        .collect()
}

#[test]
fn encoder_images_match_the_code() {
    for code in [surface(), bit_flip()] {
        let enc = CssEncoder::new(&code).unwrap();
        let ro = enc.readout_code("ro").unwrap();
        for g in code.generators() {
            assert!(ro.is_stabilizer(&g));
        }
        for (a, b) in [
            (&ro.logical_x()[0], &code.logical_x()[0]),
            (&ro.logical_z()[0], &code.logical_z()[0]),
        ] {
            let prod = a.multiply(b).unwrap();
            assert!(code.is_stabilizer(&prod), "{} vs {}", a.to_label(), b.to_label());
        }
    }
}

#[test]
fn noiseless_up_interface_prepares_logical_states() {
    let code = surface();
    let c = build_interface_up(&code, 2).unwrap();
    let n = c.num_qubits;
    let data = &c.outputs[0];
    for (state, logical) in [
        (BasisState::Zero, &code.logical_z()[0]),
        (BasisState::Plus, &code.logical_x()[0]),
    ] {
        let input = input_tableau(n, c.inputs[0][0], state);
        let (mut out, rec) = simulate_with_faults(&c, &FaultPath::empty(), input, 7, 0).unwrap();
        assert_eq!(rec.ecs[0].rounds_run, 3);
        for g in code.generators() {
            assert_eq!(out.expectation(&g.embed(n, data)), Some(true));
        }
        assert_eq!(out.expectation(&logical.embed(n, data)), Some(true));
    }
}

#[test]
fn noiseless_round_trip_is_identity_on_basis_states() {
    for (code, t) in [(surface(), 2), (bit_flip(), 1)] {
        let c = build_round_trip(&code, t).unwrap();
        let n = c.num_qubits;
        let (q_in, q_out) = (c.inputs[0][0], c.outputs[0][0]);
        for (i, state) in BasisState::ALL.into_iter().enumerate() {
            let (mut out, _) =
                simulate_with_faults(&c, &FaultPath::empty(), input_tableau(n, q_in, state), 11, i as u64).unwrap();
            let (label, minus) = state.stabilizer();
            let s = signed(label, minus).embed(n, &[q_out]);
            assert_eq!(out.expectation(&s), Some(true), "{state:?}");
        }
    }
}

#[test]
fn down_interface_reads_logical_flips_and_ignores_single_errors() {
    let code = surface();
    let c = build_interface_down(&code, 2).unwrap();
    let out_q = c.outputs[0][0];
    let decoded = |e: &PauliOp| {
        let mut f = PauliFrame::new(c.num_qubits);
        f.set_block(&c.inputs[0], e);
        let (f, _) = simulate_frame(&c, &FaultPath::empty(), f).unwrap();
        f.restrict(&[out_q])
    };
    assert_eq!(decoded(&code.logical_x()[0]).to_label(), "X");
    assert_eq!(decoded(&code.logical_z()[0]).to_label(), "Z");
    for q in 0..code.n() {
        for p in [Pauli1::X, Pauli1::Y, Pauli1::Z] {
            let e = PauliOp::single(code.n(), q, p);
            assert!(decoded(&e).is_identity_up_to_phase(), "q={q} {p:?}");
        }
    }
}

#[test]
fn round_trip_survives_any_single_fault_outside_encoder_and_decoder() {
    let code = surface();
    let c = build_round_trip(&code, 2).unwrap();
    let out_q = c.outputs[0][0];
    let mut level0 = 0;
    let mut total = 0;
    for loc in c.quantum_locations() {
        for p in nontrivial_paulis(loc.qubits.len()) {
            let (f, _) =
                simulate_frame(&c, &FaultPath::single(loc.id, p.clone()), PauliFrame::new(c.num_qubits)).unwrap();
            let ok = f.restrict(&[out_q]).is_identity_up_to_phase();
            total += 1;
            match loc.region {
                Region::Encoder | Region::Decoder => level0 += (!ok) as usize,
                _ => assert!(ok, "location {} {:?} fault {}", loc.id, loc.kind, p.to_label()),
            }
        }
    }
    println!("{total} single faults, {level0} logical failures in encoder/decoder");
    assert!(c.quantum_locations().any(|l| l.kind == GateKind::MeasX));
}
