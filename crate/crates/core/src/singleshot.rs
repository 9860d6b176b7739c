//! One-round syndrome extraction with circuit noise, and memory experiments
//! built from repeated single-shot correction.
//!
//! Every generator gets one ancilla. X-type generators use a `|+⟩` ancilla
//! as CNOT control, Z-type generators a `|0⟩` ancilla as CNOT target. The
//! entangling order comes from the code layout when one is attached (one
//! layer per direction from generator to qubit) and
//! from a bipartite edge colouring otherwise. An order is accepted only if
//! every X/Z generator pair meets its shared qubits an even number of times
//! with the X ancilla first, which is what makes the interleaved
//! measurements commute.

use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bits::BitVector;
use crate::code::{CssCode, Sector};
use crate::decoder::LookupDecoder;
use crate::error::{check_dim, Error, Result};
use crate::ft::circuit::{Circuit, CircuitBuilder, Cond, FaultPath, GateKind, Region, Register};
use crate::ft::frame::PauliFrame;
use crate::ft::sim::simulate_frame;
use crate::noise::sample_location_fault;
use crate::pauli::{Pauli1, PauliOp};
use crate::stats::{stream_rng, Tally, Z95};

#[derive(Clone, Debug)]
pub struct SyndromeCircuit {
    pub circuit: Circuit,
    /// Initialisation, entangling layers and measurement.
    pub depth: usize,
    /// Ancilla qubit of each generator, in generator order.
    pub ancillas: Vec<usize>,
    /// Entangling layers as (generator, data qubit) pairs.
    pub schedule: Vec<Vec<(usize, usize)>>,
    /// Measurement id of each generator.
    pub meas: Vec<usize>,
    code: Arc<CssCode>,
}

/// Entangling layers of (generator, qubit) edges.
type Slots = Vec<Vec<(usize, usize)>>;

fn layout_slots(code: &CssCode) -> Option<Slots> {
    let layout = code.layout()?;
    let pos = |g: usize| match code.generator_kind(g) {
        (Sector::X, j) => layout.x_generators[j],
        (Sector::Z, j) => layout.z_generators[j],
    };
    // One slot per direction, directions in lexicographic order.
    let mut dirs: Vec<(i64, i64)> = (0..code.num_generators())
        .flat_map(|g| {
            code.generator_support(g)
                .into_iter()
                .map(move |q| layout.offset(pos(g), layout.qubits[q]))
        })
        .collect();
    dirs.sort_unstable();
    dirs.dedup();
    let mut slots: Slots = vec![Vec::new(); dirs.len()];
    for g in 0..code.num_generators() {
        for q in code.generator_support(g) {
            let d = layout.offset(pos(g), layout.qubits[q]);
            slots[dirs.binary_search(&d).ok()?].push((g, q));
        }
    }
    Some(slots)
}

/// Colours the generator/qubit incidence graph with as many colours as its
/// largest degree (alternating-path recolouring).
fn coloring_slots(code: &CssCode) -> Slots {
    let (r, n) = (code.num_generators(), code.n());
    let supports: Vec<Vec<usize>> = (0..r).map(|g| code.generator_support(g)).collect();
    let mut qdeg = vec![0; n];
    for s in &supports {
        for &q in s {
            qdeg[q] += 1;
        }
    }
    let colors = supports.iter().map(Vec::len).chain(qdeg).max().unwrap_or(0);
    let mut at_g: Vec<Vec<Option<usize>>> = vec![vec![None; colors]; r];
    let mut at_q: Vec<Vec<Option<usize>>> = vec![vec![None; colors]; n];
    for (g, s) in supports.iter().enumerate() {
        for &q in s {
            let a = (0..colors)
                .find(|&c| at_g[g][c].is_none())
                .expect("free colour at generator");
            if at_q[q][a].is_some() {
                let b = (0..colors)
                    .find(|&c| at_q[q][c].is_none())
                    .expect("free colour at qubit");
                // Swap a and b along the alternating path that starts at q.
                let mut path = Vec::new();
                let (mut node_q, mut c) = (Some(q), a);
                let mut node_g: Option<usize> = None;
                loop {
                    let next = match (node_q, node_g) {
                        (Some(v), _) => at_q[v][c].map(|gg| (gg, v)),
                        (_, Some(gg)) => at_g[gg][c].map(|v| (gg, v)),
                        _ => None,
                    };
                    let Some((gg, v)) = next else { break };
                    path.push((gg, v, c));
                    if node_q.is_some() {
                        node_q = None;
                        node_g = Some(gg);
                    } else {
                        node_g = None;
                        node_q = Some(v);
                    }
                    c = if c == a { b } else { a };
                }
                for &(gg, v, c) in &path {
                    at_g[gg][c] = None;
                    at_q[v][c] = None;
                }
                for &(gg, v, c) in &path {
                    let d = if c == a { b } else { a };
                    at_g[gg][d] = Some(v);
                    at_q[v][d] = Some(gg);
                }
            }
            at_g[g][a] = Some(q);
            at_q[q][a] = Some(g);
        }
    }
    (0..colors)
        .map(|c| (0..r).filter_map(|g| at_g[g][c].map(|q| (g, q))).collect())
        .collect()
}

fn slots_valid(code: &CssCode, slots: &Slots) -> bool {
    let n = code.n();
    let r = code.num_generators();
    let mut time = vec![vec![None; n]; r];
    for (t, layer) in slots.iter().enumerate() {
        let mut used_q = vec![false; n];
        let mut used_g = vec![false; r];
        for &(g, q) in layer {
            if used_q[q] || used_g[g] {
                return false;
            }
            used_q[q] = true;
            used_g[g] = true;
            time[g][q] = Some(t);
        }
    }
    let xs: Vec<usize> = (0..r).filter(|&g| code.generator_kind(g).0 == Sector::X).collect();
    let zs: Vec<usize> = (0..r).filter(|&g| code.generator_kind(g).0 == Sector::Z).collect();
    for &gx in &xs {
        for &gz in &zs {
            let before = (0..n)
                .filter(|&q| matches!((time[gx][q], time[gz][q]), (Some(a), Some(b)) if a < b))
                .count();
            if before % 2 == 1 {
                return false;
            }
        }
    }
    true
}

/// One ancilla per generator, measured after `max weight` entangling layers.
pub fn build_syndrome_extraction(code: Arc<CssCode>) -> Result<SyndromeCircuit> {
    let (n, r) = (code.n(), code.num_generators());
    let w = code.max_generator_weight();
    let slots = layout_slots(&code)
        .filter(|s| s.len() <= w && slots_valid(&code, s))
        .or_else(|| Some(coloring_slots(&code)).filter(|s| s.len() <= w && slots_valid(&code, s)))
        .ok_or_else(|| Error::Unschedulable(format!("{}: no commuting order within {w} layers", code.name())))?;
    let data: Vec<usize> = (0..n).collect();
    let ancillas: Vec<usize> = (n..n + r).collect();
    let regs = vec![
        Register {
            name: "data".into(),
            qubits: data.clone(),
        },
        Register {
            name: "ancilla".into(),
            qubits: ancillas.clone(),
        },
    ];
    let is_x = |g: usize| code.generator_kind(g).0 == Sector::X;
    let mut b = CircuitBuilder::new(n + r, regs, vec![data.clone()]);
    b.begin_layer();
    for g in 0..r {
        let kind = if is_x(g) { GateKind::PrepX } else { GateKind::PrepZ };
        b.add(kind, &[ancillas[g]], Cond::Always, Region::Gate);
    }
    b.end_layer();
    for layer in &slots {
        b.begin_layer();
        for &(g, q) in layer {
            let pair = if is_x(g) { [ancillas[g], q] } else { [q, ancillas[g]] };
            b.add(GateKind::Cnot, &pair, Cond::Always, Region::Gate);
        }
        b.end_layer();
    }
    b.begin_layer();
    let meas = (0..r)
        .map(|g| {
            let kind = if is_x(g) { GateKind::MeasX } else { GateKind::MeasZ };
            b.add(kind, &[ancillas[g]], Cond::Always, Region::Gate)
                .1
                .expect("measurement")
        })
        .collect();
    b.end_layer();
    let circuit = b.finish(vec![data])?;
    Ok(SyndromeCircuit {
        depth: circuit.depth(),
        circuit,
        ancillas,
        schedule: slots,
        meas,
        code,
    })
}

impl SyndromeCircuit {
    pub fn code(&self) -> &Arc<CssCode> {
        &self.code
    }

    /// Runs the circuit on data error `e` with the faults of `path` and
    /// returns the measured syndrome and the data error at the end.
    pub fn extract(&self, e: &PauliOp, path: &FaultPath) -> Result<(BitVector, PauliOp)> {
        let n = self.code.n();
        check_dim(n, e.n())?;
        let mut frame = PauliFrame::new(self.circuit.num_qubits);
        let data: Vec<usize> = (0..n).collect();
        frame.set_block(&data, e);
        let (frame, rec) = simulate_frame(&self.circuit, path, frame)?;
        let s = BitVector::from_bools(
            &self
                .meas
                .iter()
                .map(|&m| rec.outcomes[m].unwrap_or(false))
                .collect::<Vec<_>>(),
        );
        Ok((s, frame.restrict(&data).to_hermitian()))
    }

    /// Circuit-level noise: each location draws a uniform nontrivial Pauli
    /// with probability `delta`; measurements are flipped instead.
    pub fn sample_faults<R: Rng + ?Sized>(&self, delta: f64, rng: &mut R) -> FaultPath {
        let mut path = FaultPath::empty();
        if delta <= 0.0 {
            return path;
        }
        for loc in self.circuit.quantum_locations() {
            let fault = match loc.kind {
                GateKind::MeasZ => (rng.gen::<f64>() < delta).then(|| PauliOp::single(1, 0, Pauli1::X)),
                GateKind::MeasX => (rng.gen::<f64>() < delta).then(|| PauliOp::single(1, 0, Pauli1::Z)),
                _ => sample_location_fault(loc.qubits.len(), delta, rng),
            };
            if let Some(p) = fault {
                path.insert(loc.id, p);
            }
        }
        path
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RoundStats {
    pub round: usize,
    pub weight_before: usize,
    pub weight_after: usize,
    /// Measured syndrome against the syndrome of the end-of-circuit error.
    pub syndrome_error_weight: usize,
    pub correction_weight: usize,
    /// Ideal decoding of the data error after the round is logically trivial.
    pub survived: bool,
}

/// Logical class of `e` after an ideal (noiseless) decode is trivial.
pub fn ideal_decode_trivial(code: &CssCode, decoder: &LookupDecoder, e: &PauliOp) -> Result<bool> {
    let fix = decoder.decode(&code.syndrome(e)?)?;
    let r = e.multiply(&fix)?;
    Ok(code.logical_action(&r).iter().all(|p| *p == Pauli1::I))
}

/// One extraction round with the given faults followed by the decoder's
/// correction; `e` is updated in place.
pub fn run_ec_round_with(
    sc: &SyndromeCircuit,
    decoder: &LookupDecoder,
    e: &mut PauliOp,
    path: &FaultPath,
    round: usize,
) -> Result<RoundStats> {
    let code = &*sc.code;
    let weight_before = code.reduced_weight(e)?;
    let (measured, end) = sc.extract(e, path)?;
    let truth = code.syndrome(&end)?.bits;
    let mut diff = measured.clone();
    diff.xor_assign(&truth);
    let fix = decoder.decode(&crate::code::Syndrome { bits: measured })?;
    *e = end.multiply(&fix)?.to_hermitian();
    Ok(RoundStats {
        round,
        weight_before,
        weight_after: code.reduced_weight(e)?,
        syndrome_error_weight: diff.count_ones(),
        correction_weight: fix.weight(),
        survived: ideal_decode_trivial(code, decoder, e)?,
    })
}

/// One noisy round at rate `delta`.
pub fn run_ec_round<R: Rng + ?Sized>(
    sc: &SyndromeCircuit,
    decoder: &LookupDecoder,
    e: &mut PauliOp,
    delta: f64,
    round: usize,
    rng: &mut R,
) -> Result<RoundStats> {
    let path = sc.sample_faults(delta, rng);
    run_ec_round_with(sc, decoder, e, &path, round)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SurvivalRow {
    pub round: usize,
    pub survival: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub mean_reduced_weight: f64,
    /// Fraction of trials whose reduced weight reached `⌊L/2⌋+1`, i.e. more
    /// than half the distance, in some round so far.
    pub ever_heavy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MemoryCurve {
    pub delta: f64,
    pub trials: u64,
    pub seed: u64,
    pub rows: Vec<SurvivalRow>,
}

/// Repeated single-shot rounds from a clean codeword; trial `i` uses stream
/// `i` of `seed`.
pub fn memory_experiment(
    sc: &SyndromeCircuit,
    decoder: &LookupDecoder,
    delta: f64,
    rounds: usize,
    trials: u64,
    seed: u64,
    heavy: usize,
) -> Result<MemoryCurve> {
    if !(0.0..=1.0).contains(&delta) {
        return Err(Error::InvalidParameter(format!("delta {delta} outside [0, 1]")));
    }
    let n = sc.code.n();
    let zero = || {
        (
            vec![Tally::default(); rounds],
            vec![Tally::default(); rounds],
            vec![0u64; rounds],
        )
    };
    let (survived, heavy_seen, weight_sum) = (0..trials)
        .into_par_iter()
        .map(|trial| -> Result<_> {
            let mut acc = zero();
            let mut rng = stream_rng(seed, trial);
            let mut e = PauliOp::identity(n);
            let mut was_heavy = false;
            for r in 0..rounds {
                let st = run_ec_round(sc, decoder, &mut e, delta, r + 1, &mut rng)?;
                was_heavy |= st.weight_after >= heavy;
                acc.0[r].record(st.survived);
                acc.1[r].record(was_heavy);
                acc.2[r] += st.weight_after as u64;
            }
            Ok(acc)
        })
        .try_reduce(zero, |mut a, b| {
            for r in 0..rounds {
                a.0[r] = a.0[r].merge(b.0[r]);
                a.1[r] = a.1[r].merge(b.1[r]);
                a.2[r] += b.2[r];
            }
            Ok(a)
        })?;
    let rows = (0..rounds)
        .map(|r| {
            let (lo, hi) = survived[r].wilson95();
            SurvivalRow {
                round: r + 1,
                survival: survived[r].rate(),
                ci_low: lo,
                ci_high: hi,
                mean_reduced_weight: if trials == 0 {
                    0.0
                } else {
                    weight_sum[r] as f64 / trials as f64
                },
                ever_heavy: heavy_seen[r].rate(),
            }
        })
        .collect();
    Ok(MemoryCurve {
        delta,
        trials,
        seed,
        rows,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeightStudy {
    pub trials: u64,
    pub planted_weight: usize,
    pub mean_after: f64,
    /// Half width of the normal 95% interval on `mean_after`.
    pub ci_half_width: f64,
}

/// One noisy round on uniformly random planted errors of reduced weight
/// `weight`; reports the mean reduced weight afterwards.
pub fn planted_weight_study(
    sc: &SyndromeCircuit,
    decoder: &LookupDecoder,
    delta: f64,
    weight: usize,
    trials: u64,
    seed: u64,
) -> Result<WeightStudy> {
    let code = &*sc.code;
    let n = code.n();
    let (mut sum, mut sq) = (0f64, 0f64);
    let mut done = 0u64;
    let mut stream = 0u64;
    while done < trials {
        let mut rng = stream_rng(seed, stream);
        stream += 1;
        let mut e = PauliOp::identity(n);
        let mut qs: Vec<usize> = (0..n).collect();
        for i in 0..weight.min(n) {
            let j = rng.gen_range(i..n);
            qs.swap(i, j);
            e.set(qs[i], Pauli1::NONTRIVIAL[rng.gen_range(0..3)]);
        }
        if code.reduced_weight(&e)? != weight {
            continue;
        }
        let st = run_ec_round(sc, decoder, &mut e, delta, 1, &mut rng)?;
        let w = st.weight_after as f64;
        sum += w;
        sq += w * w;
        done += 1;
    }
    let t = trials.max(1) as f64;
    let mean = sum / t;
    let var = (sq / t - mean * mean).max(0.0);
    Ok(WeightStudy {
        trials,
        planted_weight: weight,
        mean_after: mean,
        ci_half_width: Z95 * (var / t).sqrt(),
    })
}
