//! The acceptance suite. Each test prints one `criterion N ...: PASS|FAIL`
//! line to stderr (bypassing capture) and then asserts the same verdict.
//! Tests hold a shared lock so that runtimes are measured one at a time.

use std::io::Write;
use std::process::Command;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use ftqlab::channel::{
    build_derived_code, channel_pair, check_measurement_rule, check_prep_rule, check_representation,
    factor_unitary_rule, golden_cases, ideal_decoder, run_golden_case, CMatrix, CVector, Superoperator, CHANNEL_TOL,
    EXACT_TOL,
};
use ftqlab::codes::{bit_flip, load_shipped};
use ftqlab::decoder::LookupDecoder;
use ftqlab::ft::encoder::input_tableau;
use ftqlab::ft::rec::sweep_single_faults;
use ftqlab::ft::{build_round_trip, simulate_frame, simulate_with_faults, BasisState, FaultPath};
use ftqlab::ft::{PauliFrame, Rec1, RecGate, Region};
use ftqlab::noise::{adversarial_truncation, compose_parameter, sample_iid_pauli, tail_sum, SupportAudit};
use ftqlab::singleshot::{build_syndrome_extraction, memory_experiment, planted_weight_study};
use ftqlab::stats::stream_rng;
use ftqlab::teleport::{gate_set, verify_logical_action, AncillaSpec, CorrectionTable, Teleporter};
use ftqlab::toric::{bound_zeta, build_toric, estimate_logical_failure, CommExperimentConfig, ToricLattice};
use ftqlab::{BitVector, Pauli1, PauliOp};
use num_complex::Complex64;

static SERIAL: Mutex<()> = Mutex::new(());

/// Runs `body` under the suite lock, prints the verdict line with the
/// elapsed time against `budget`, and fails the test on FAIL.
fn criterion(n: usize, name: &str, budget: Duration, body: impl FnOnce(&mut Vec<String>) -> bool) {
    let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let mut notes = Vec::new();
    let ok = body(&mut notes);
    let elapsed = start.elapsed();
    let in_time = elapsed <= budget;
    if !in_time {
        notes.push(format!("runtime {elapsed:.1?} over budget {budget:?}"));
    }
    let verdict = if ok && in_time { "PASS" } else { "FAIL" };
    let mut err = std::io::stderr().lock();
    writeln!(err, "criterion {n} {name}: {verdict} ({elapsed:.1?})").unwrap();
    for note in &notes {
        writeln!(err, "    {note}").unwrap();
    }
    drop(err);
    assert!(ok && in_time, "criterion {n} {name} failed: {notes:?}");
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

#[test]
fn criterion_01_representation_golden_suite() {
    criterion(1, "representation golden suite", secs(5), |notes| {
        let mut ok = true;
        for case in golden_cases().unwrap() {
            let rep = run_golden_case(&case).unwrap();
            let pass = rep.max_residual() <= case.expected_residual_max
                && rep.r.is_channel(CHANNEL_TOL)
                && rep.s.is_channel(CHANNEL_TOL);
            notes.push(format!(
                "golden {}: max residual {:.2e}",
                format!("{} {}", case.code_id, case.channel_kind),
                rep.max_residual()
            ));
            ok &= pass;
        }

        let errs: Vec<PauliOp> = ["III", "XII", "IXI", "IIX"]
            .iter()
            .map(|s| s.parse().unwrap())
            .collect();
        let d = build_derived_code(&bit_flip(), &errs).unwrap();
        let (t, p) = channel_pair(d.base(), "transversal-x").unwrap();
        let rep = check_representation(&t, &p, &d, &d, EXACT_TOL).unwrap();
        let diagram = [rep.comm1.upper, rep.comm2.upper, rep.comm3.upper];
        notes.push(format!("transversal-x diagram residuals {diagram:?}"));
        ok &= diagram.iter().all(|&r| r <= EXACT_TOL);

        let fac = factor_unitary_rule(&t, &d, &p, EXACT_TOL).unwrap();
        notes.push(format!("unitary rule product residual {:.2e}", fac.residual));
        ok &= fac.residual <= EXACT_TOL && fac.f.is_channel(CHANNEL_TOL);

        let one = Complex64::new(1.0, 0.0);
        let zero = CVector::from_vec(vec![one, Complex64::new(0.0, 0.0)]);
        let logical0 = d.encoder().matrix() * &zero;
        let prep = Superoperator::preparation(&(&logical0 * logical0.adjoint())).unwrap();
        match check_prep_rule(&prep, &d, &zero, EXACT_TOL) {
            Ok(gamma) => {
                let s0 = d.syndrome_state(0);
                let want: CMatrix = &s0 * s0.adjoint();
                let dev = (gamma - want).norm();
                notes.push(format!("prep rule syndrome-state deviation {dev:.2e}"));
                ok &= dev <= EXACT_TOL;
            }
            Err(e) => {
                notes.push(format!("prep rule rejected: {e}"));
                ok = false;
            }
        }

        let meas = Superoperator::basis_measurement(2).unwrap();
        let r = ideal_decoder(&d).unwrap().then(&meas).unwrap();
        let res = check_measurement_rule(&r, &d, &meas).unwrap();
        notes.push(format!("measurement rule residual {res:.2e}"));
        ok &= res <= EXACT_TOL;
        ok
    });
}

/// `⌈5nδ/(1+δ)⌉` for `δ = a/b`, in integers.
fn truncation_oracle(n: u64, a: u64, b: u64) -> usize {
    (5 * n * a).div_ceil(b + a) as usize
}

/// `Σ_{j>t} C(n, j) δ^j` with binomials from the multiplicative recurrence.
fn direct_tail(n: usize, delta: f64, t: usize) -> f64 {
    let mut c = 1.0f64;
    let mut sum = 0.0;
    for j in 1..=n {
        c = c * (n - j + 1) as f64 / j as f64;
        if j > t {
            sum += c * delta.powi(j as i32);
        }
    }
    sum
}

#[test]
fn criterion_02_adversarial_bound_grid() {
    criterion(2, "adversarial bound grid", secs(5), |notes| {
        let mut ok = true;
        let mut cells = 0;
        for n in [50u64, 100, 200, 400] {
            for (a, b) in [(2u64, 100u64), (5, 100), (10, 100)] {
                let delta = a as f64 / b as f64;
                if n * a < b {
                    continue;
                }
                cells += 1;
                let (t, bound) = adversarial_truncation(n as usize, delta);
                let tail = tail_sum(n as usize, delta, t).unwrap();
                let direct = direct_tail(n as usize, delta, t);
                let cell_ok = t == truncation_oracle(n, a, b)
                    && (bound - (-(n as f64) * delta / 3.0).exp()).abs() == 0.0
                    && (tail - direct).abs() <= 1e-10 * direct
                    && tail <= bound;
                if !cell_ok {
                    notes.push(format!("n={n} delta={delta}: t={t} tail={tail:.3e} bound={bound:.3e}"));
                }
                ok &= cell_ok;
            }
        }
        notes.push(format!("{cells} grid cells checked"));
        ok && cells == 12
    });
}

/// Audit over `samples` draws; draw `i` gets stream `i` of `seed`.
fn audit_of(n: usize, samples: u64, seed: u64, sample: impl Fn(u64, u64) -> PauliOp) -> SupportAudit {
    let mut audit = SupportAudit::new(n, 3).unwrap();
    for i in 0..samples {
        audit.add(&sample(seed, i).support());
    }
    audit
}

#[test]
fn criterion_03_local_stochastic_audits() {
    criterion(3, "local-stochastic audits", secs(120), |notes| {
        let n = 20;
        let iid = audit_of(n, 1_000_000, 31, |s, i| {
            sample_iid_pauli(n, 0.05, &mut stream_rng(s, i)).pauli
        });
        let a = iid.check_against(0.05, 4.0);
        notes.push(format!(
            "iid(0.05): {} sets, worst excess {:.2e}",
            iid.entries().count(),
            a.worst_excess
        ));

        let composed = audit_of(n, 1_000_000, 32, |s, i| {
            let rng = &mut stream_rng(s, i);
            let x = sample_iid_pauli(n, 0.01, rng);
            let y = sample_iid_pauli(n, 0.02, rng);
            x.compose(&y).unwrap().pauli
        });
        let param = compose_parameter(0.01, 0.02);
        let c = composed.check_against(param, 4.0);
        notes.push(format!(
            "iid(0.01) then iid(0.02) at {param}: worst excess {:.2e}",
            c.worst_excess
        ));
        a.pass && c.pass && (param - 0.03).abs() < 1e-15
    });
}

#[test]
fn criterion_04_toric_exhaustive_decoding() {
    criterion(4, "toric exhaustive decoding", secs(120), |notes| {
        let corrected = |lat: &ToricLattice, e: &PauliOp| {
            let c = lat.decode_mwpm(&lat.code().syndrome(e).unwrap()).unwrap();
            lat.code().logical_class(&e.multiply(&c).unwrap()).unwrap().is_trivial()
        };
        let mut ok = true;
        let l3 = ToricLattice::new(3).unwrap();
        let mut count = 0;
        for q in 0..l3.n() {
            for p in Pauli1::NONTRIVIAL {
                ok &= corrected(&l3, &PauliOp::single(l3.n(), q, p));
                count += 1;
            }
        }
        notes.push(format!("L=3: {count} weight-1 errors"));
        ok &= count == 54;

        let l5 = ToricLattice::new(5).unwrap();
        let n = l5.n();
        let mut count = 0;
        let mut failures = 0;
        for a in 0..n {
            for pa in Pauli1::NONTRIVIAL {
                let ea = PauliOp::single(n, a, pa);
                failures += !corrected(&l5, &ea) as usize;
                count += 1;
                for b in a + 1..n {
                    for pb in Pauli1::NONTRIVIAL {
                        let e = ea.multiply(&PauliOp::single(n, b, pb)).unwrap();
                        failures += !corrected(&l5, &e) as usize;
                        count += 1;
                    }
                }
            }
        }
        notes.push(format!("L=5: {count} errors of weight 1 or 2, {failures} failures"));
        ok && failures == 0 && count == 150 + 1225 * 9
    });
}

#[test]
fn criterion_05_toric_communication_bound() {
    criterion(5, "toric communication bound", secs(20 * 60), |notes| {
        let (nu, dp) = (1e-3, 1e-3);
        let mut ok = true;
        let mut rows = Vec::new();
        for l in [5, 7] {
            let cfg = CommExperimentConfig::new(l, nu, dp, 100_000, 5);
            assert!((cfg.alpha_eff() - 3e-3).abs() < 1e-15);
            let est = estimate_logical_failure(&cfg).unwrap();
            let zeta = bound_zeta(l, cfg.alpha_eff()).unwrap();
            let applies = zeta < 1.0;
            let row_ok = !applies || est.ci_high <= zeta;
            notes.push(format!(
                "L={l}: {}/{} failures, rate {:.3e} [{:.3e}, {:.3e}], zeta {zeta:.3e}{}",
                est.failures,
                est.trials,
                est.rate,
                est.ci_low,
                est.ci_high,
                if applies { "" } else { " (bound vacuous)" }
            ));
            ok &= row_ok;
            rows.push(est);
        }
        let monotone = rows[1].ci_low <= rows[0].ci_high;
        notes.push(format!("rate nonincreasing in L within CI: {monotone}"));
        ok && monotone
    });
}

#[test]
fn criterion_06_rectangle_correctness_exhaustive() {
    criterion(6, "rectangle correctness exhaustive", secs(30 * 60), |notes| {
        let code = load_shipped("rotated-surface-5").unwrap();
        let mut ok = true;
        for gate in [RecGate::I, RecGate::X, RecGate::Cnot, RecGate::PrepZ, RecGate::MeasZ] {
            let rec = Rec1::build(gate, &code, 2).unwrap();
            let s = sweep_single_faults(&rec).unwrap();
            notes.push(format!(
                "{gate}: {}/{} single-fault paths correct, max rounds {}",
                s.passed, s.paths, s.max_rounds
            ));
            ok &= s.paths > 0 && s.passed == s.paths && s.max_rounds <= 9;
        }
        ok
    });
}

fn nontrivial_paulis(k: usize) -> Vec<PauliOp> {
    (1..1usize << (2 * k))
        .map(|v| {
            let x = BitVector::from_u64(k, (v & ((1 << k) - 1)) as u64);
            let z = BitVector::from_u64(k, (v >> k) as u64);
            PauliOp::hermitian(x, z)
        })
        .collect()
}

#[test]
fn criterion_07_interface_round_trip() {
    criterion(7, "interface round trip", secs(10 * 60), |notes| {
        let code = load_shipped("rotated-surface-5").unwrap();
        let c = build_round_trip(&code, 2).unwrap();
        let n = c.num_qubits;
        let (q_in, q_out) = (c.inputs[0][0], c.outputs[0][0]);
        let mut ok = true;
        for (i, state) in BasisState::ALL.into_iter().enumerate() {
            let (mut out, _) =
                simulate_with_faults(&c, &FaultPath::empty(), input_tableau(n, q_in, state), 11, i as u64).unwrap();
            let (label, minus) = state.stabilizer();
            let mut s: PauliOp = label.parse().unwrap();
            if minus {
                s.set_phase(s.phase() + 2);
            }
            ok &= out.expectation(&s.embed(n, &[q_out])) == Some(true);
        }
        notes.push(format!(
            "noiseless identity on {} basis states: {ok}",
            BasisState::ALL.len()
        ));

        let (mut total, mut outer_fail, mut level0_fail, mut bare_fail) = (0, 0, 0, 0);
        for loc in c.quantum_locations() {
            let bare = loc.qubits.contains(&q_in) || loc.qubits.contains(&q_out);
            for p in nontrivial_paulis(loc.qubits.len()) {
                let (f, _) = simulate_frame(&c, &FaultPath::single(loc.id, p), PauliFrame::new(n)).unwrap();
                let unchanged = f.restrict(&[q_out]).is_identity_up_to_phase();
                total += 1;
                bare_fail += (!unchanged && bare) as usize;
                match (unchanged, loc.region) {
                    (true, _) => {}
                    (false, Region::Encoder | Region::Decoder) => level0_fail += 1,
                    (false, _) => outer_fail += 1,
                }
            }
        }
        notes.push(format!(
            "{total} single faults: {outer_fail} flip the decoded qubit from the encoded part, \
             {level0_fail} from the unencoded encoder and decoder locations \
             ({bare_fail} of them on locations touching the bare qubit)"
        ));
        ok && outer_fail == 0 && level0_fail == 0
    });
}

#[test]
fn criterion_08_teleportation_suite() {
    criterion(8, "teleportation suite", secs(5 * 60), |notes| {
        let code = Arc::new(build_toric(3).unwrap());
        let mut ok = true;
        let gates = gate_set("standard", 2).unwrap();
        for (name, u) in &gates {
            let tp = Teleporter::new(AncillaSpec::new(code.clone(), u.clone()).unwrap()).unwrap();
            let r = verify_logical_action(&tp, 0, 8, CorrectionTable::Standard).unwrap();
            let gate_ok = r.passed && r.inputs == 36 && r.min_branches == r.branches && r.branches == 16;
            if !gate_ok {
                notes.push(format!("{name}: {r:?}"));
            }
            ok &= gate_ok;
        }
        notes.push(format!(
            "{} gates on toric L=3, 36 basis inputs, all 16 Bell branches each",
            gates.len()
        ));
        ok && gates.len() == 19
    });
}

#[test]
fn criterion_09_single_shot_memory() {
    criterion(9, "single-shot memory", secs(15 * 60), |notes| {
        let code = Arc::new(build_toric(3).unwrap());
        let sc = build_syndrome_extraction(code.clone()).unwrap();
        let dec = LookupDecoder::with_syndrome_errors(&code).unwrap();
        let mut finals = Vec::new();
        for delta in [2.5e-3, 5e-3, 1e-2] {
            let curve = memory_experiment(&sc, &dec, delta, 10, 10_000, 17, 2).unwrap();
            let last = curve.rows.last().unwrap().clone();
            notes.push(format!(
                "delta={delta}: survival after 10 rounds {:.4} [{:.4}, {:.4}]",
                last.survival, last.ci_low, last.ci_high
            ));
            finals.push((delta, last));
        }
        let at_5e3 = &finals[1].1;
        let survival_ok = at_5e3.survival >= 0.95;
        notes.push(format!("survival at 5e-3 >= 0.95: {survival_ok}"));

        let planted = planted_weight_study(&sc, &dec, 5e-3, 1, 10_000, 18).unwrap();
        let planted_ok = planted.mean_after + planted.ci_half_width <= 1.0;
        notes.push(format!(
            "planted weight 1: mean reduced weight after one round {:.3} +- {:.3}",
            planted.mean_after, planted.ci_half_width
        ));

        let monotone = finals.windows(2).all(|w| w[1].1.ci_low <= w[0].1.ci_high);
        notes.push(format!("survival nonincreasing in delta within CI: {monotone}"));
        survival_ok && planted_ok && monotone
    });
}

fn run_cli(args: &[&str]) -> Vec<u8> {
    let o = Command::new(env!("CARGO_BIN_EXE_ftqlab"))
        .args(args)
        .env_remove("FTQLAB_SEED")
        .output()
        .unwrap();
    assert!(
        matches!(o.status.code(), Some(0 | 1)),
        "{args:?}: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    o.stdout
}

#[test]
fn criterion_10_determinism() {
    criterion(10, "determinism", Duration::MAX, |notes| {
        let suites: [&[&str]; 7] = [
            &["rep-check", "--seed", "3"],
            &["noise-bounds", "--seed", "3"],
            &[
                "toric-comm",
                "--L",
                "3,5",
                "--nu",
                "1e-2",
                "--delta-prime",
                "5e-3",
                "--trials",
                "5000",
                "--seed",
                "3",
            ],
            &["rec-sim", "--gate", "prep_z,measure_z", "--seed", "3"],
            &[
                "rec-sim",
                "--gate",
                "X",
                "--sweep",
                "monte-carlo",
                "--trials",
                "100",
                "--delta",
                "2e-4",
                "--seed",
                "3",
            ],
            &["teleport-verify", "--gate-set", "cnot", "--trials", "2", "--seed", "3"],
            &["single-shot", "--trials", "1000", "--delta", "5e-3,1e-2", "--seed", "3"],
        ];
        let mut ok = true;
        for args in suites {
            let a = run_cli(args);
            let b = run_cli(args);
            let mut threaded = args.to_vec();
            threaded.extend(["--threads", "2"]);
            let c = run_cli(&threaded);
            let same = !a.is_empty() && a == b && a == c;
            notes.push(format!("{}: {} bytes, identical on rerun: {same}", args[0], a.len()));
            ok &= same;
        }
        ok
    });
}
