//! Rectangles: error correction on every input block followed by a
//! transversal gate, their two-level substitution, fault-path
//! classification and the correctness check against ideal decoding.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::bits::BitVector;
use crate::code::CssCode;
use crate::decoder::LookupDecoder;
use crate::error::{Error, Result};
use crate::ft::circuit::{Circuit, CircuitBuilder, Cond, FaultPath, GateKind, Region};
use crate::ft::encoder::{encode_block, BasisState, CssEncoder};
use crate::ft::frame::PauliFrame;
use crate::ft::shor::{append_parallel_ec, block_layout, ShorTemplate};
use crate::ft::sim::{simulate_with_faults, FrameBackend, RunState};
use crate::ft::tableau::Tableau;
use crate::gf2::{reduce_against, Echelon};
use crate::pauli::{Pauli1, PauliOp};

/// Gates with a transversal implementation on every CSS code.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RecGate {
    I,
    X,
    Z,
    Cnot,
    PrepZ,
    PrepX,
    MeasZ,
    MeasX,
}

impl RecGate {
    pub const ALL: [RecGate; 8] = [
        RecGate::I,
        RecGate::X,
        RecGate::Z,
        RecGate::Cnot,
        RecGate::PrepZ,
        RecGate::PrepX,
        RecGate::MeasZ,
        RecGate::MeasX,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RecGate::I => "I",
            RecGate::X => "X",
            RecGate::Z => "Z",
            RecGate::Cnot => "CNOT",
            RecGate::PrepZ => "prep_z",
            RecGate::PrepX => "prep_x",
            RecGate::MeasZ => "measure_z",
            RecGate::MeasX => "measure_x",
        }
    }

    /// Encoded input blocks.
    pub fn inputs(self) -> usize {
        match self {
            RecGate::Cnot => 2,
            RecGate::PrepZ | RecGate::PrepX => 0,
            _ => 1,
        }
    }

    /// Encoded output blocks.
    pub fn outputs(self) -> usize {
        match self {
            RecGate::Cnot => 2,
            RecGate::MeasZ | RecGate::MeasX => 0,
            _ => 1,
        }
    }

    fn physical(self) -> GateKind {
        match self {
            RecGate::I => GateKind::Idle,
            RecGate::X => GateKind::X,
            RecGate::Z => GateKind::Z,
            RecGate::Cnot => GateKind::Cnot,
            RecGate::PrepZ => GateKind::PrepZ,
            RecGate::PrepX => GateKind::PrepX,
            RecGate::MeasZ => GateKind::MeasZ,
            RecGate::MeasX => GateKind::MeasX,
        }
    }

    /// The rectangle that replaces a physical location of this kind.
    pub fn for_location(kind: GateKind) -> Option<RecGate> {
        Some(match kind {
            GateKind::Idle => RecGate::I,
            GateKind::X => RecGate::X,
            GateKind::Z => RecGate::Z,
            GateKind::Cnot => RecGate::Cnot,
            GateKind::PrepZ => RecGate::PrepZ,
            GateKind::PrepX => RecGate::PrepX,
            GateKind::MeasZ => RecGate::MeasZ,
            GateKind::MeasX => RecGate::MeasX,
            _ => return None,
        })
    }
}

impl fmt::Display for RecGate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RecGate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "i" | "id" | "idle" => RecGate::I,
            "x" => RecGate::X,
            "z" => RecGate::Z,
            "cnot" | "cx" => RecGate::Cnot,
            "prep_z" | "prep0" | "prep_0" => RecGate::PrepZ,
            "prep_x" | "prep+" | "prep_plus" => RecGate::PrepX,
            "measure_z" | "meas_z" | "mz" => RecGate::MeasZ,
            "measure_x" | "meas_x" | "mx" => RecGate::MeasX,
            _ => return Err(Error::UnsupportedGate(s.to_string())),
        })
    }
}

/// Level-one rectangle.
#[derive(Clone, Debug)]
pub struct Rec1 {
    pub gate: RecGate,
    pub code: Arc<CssCode>,
    pub decoder: Arc<LookupDecoder>,
    pub t: usize,
    pub circuit: Circuit,
    /// First layer of the transversal gate.
    pub gate_layer: usize,
    /// Measurement ids of the transversal measurement, per block in data
    /// position order.
    pub meas: Vec<Vec<usize>>,
}

/// Level-two rectangle: each quantum location of the outer level-one
/// rectangle is replaced by the level-one rectangle of its gate. Classical
/// locations stay classical.
#[derive(Clone, Debug)]
pub struct Rec2 {
    pub outer: Rec1,
    pub inner: BTreeMap<RecGate, Rec1>,
    /// Replaced outer locations with their gate.
    pub subs: BTreeMap<usize, RecGate>,
}

#[derive(Clone, Debug)]
pub enum Rec {
    One(Rec1),
    Two(Box<Rec2>),
}

impl Rec {
    pub fn level(&self) -> usize {
        match self {
            Rec::One(_) => 1,
            Rec::Two(_) => 2,
        }
    }

    pub fn gate(&self) -> RecGate {
        match self {
            Rec::One(r) => r.gate,
            Rec::Two(r) => r.outer.gate,
        }
    }

    /// Physical location count.
    pub fn size(&self) -> usize {
        match self {
            Rec::One(r) => r.circuit.size(),
            Rec::Two(r) => {
                let classical = r.outer.circuit.size() - r.subs.len();
                classical + r.subs.values().map(|g| r.inner[g].circuit.size()).sum::<usize>()
            }
        }
    }
}

impl Rec1 {
    pub fn build(gate: RecGate, code: &CssCode, t: usize) -> Result<Self> {
        let tpl = ShorTemplate::new(code)?;
        let n = code.n();
        let blocks = gate.inputs().max(gate.outputs());
        let ancillas = if gate.inputs() > 0 { tpl.ancillas } else { 0 };
        let (nq, places, regs) = block_layout(n, ancillas, blocks);
        let inputs: Vec<Vec<usize>> = places[..gate.inputs()].iter().map(|p| p.data.clone()).collect();
        let arc = Arc::new(code.clone());
        let decoder = Arc::new(LookupDecoder::for_code(code)?);
        let mut b = CircuitBuilder::new(nq, regs, inputs);
        if gate.inputs() > 0 {
            append_parallel_ec(&mut b, &arc, &decoder, &tpl, t, &places);
        }
        let gate_layer = b.current_layer();
        let all_data: Vec<usize> = places.iter().flat_map(|p| p.data.clone()).collect();
        b.set_idle_region(&all_data, Region::Gate);
        let mut meas = vec![Vec::new(); if gate.outputs() == 0 { blocks } else { 0 }];
        // The identity rectangle is error correction alone.
        if gate != RecGate::I {
            b.begin_layer();
            for pos in 0..n {
                let qs: Vec<usize> = if gate == RecGate::Cnot {
                    vec![places[0].data[pos], places[1].data[pos]]
                } else {
                    vec![places[0].data[pos]]
                };
                let (_, m) = b.add(gate.physical(), &qs, Cond::Always, Region::Gate);
                if let Some(m) = m {
                    meas[0].push(m);
                }
            }
            b.end_layer();
        }
        let outputs = if gate.outputs() == 0 {
            Vec::new()
        } else {
            places.iter().map(|p| p.data.clone()).collect()
        };
        let circuit = b.finish(outputs)?;
        Ok(Self {
            gate,
            code: arc,
            decoder,
            t,
            circuit,
            gate_layer,
            meas,
        })
    }

    /// Error-correction gadget feeding input block `b`.
    pub fn ec_of_block(&self, b: usize) -> usize {
        b
    }
}

/// Builds the level-`r` rectangle of `gate`, `r` in {1, 2}.
pub fn build_rec(gate: RecGate, code: &CssCode, t: usize, r: usize) -> Result<Rec> {
    let outer = Rec1::build(gate, code, t)?;
    match r {
        1 => Ok(Rec::One(outer)),
        2 => {
            let mut subs = BTreeMap::new();
            let mut inner = BTreeMap::new();
            for loc in outer.circuit.quantum_locations() {
                let g =
                    RecGate::for_location(loc.kind).ok_or_else(|| Error::UnsupportedGate(loc.kind.name().into()))?;
                if !inner.contains_key(&g) {
                    inner.insert(g, Rec1::build(g, code, t)?);
                }
                subs.insert(loc.id, g);
            }
            Ok(Rec::Two(Box::new(Rec2 { outer, inner, subs })))
        }
        _ => Err(Error::InvalidParameter(format!("rectangle level {r} not supported"))),
    }
}

/// Faults addressed by location paths: `[loc]` at level one,
/// `[outer, inner]` at level two.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RecPath {
    pub faults: BTreeMap<Vec<usize>, PauliOp>,
}

impl RecPath {
    pub fn insert(&mut self, addr: Vec<usize>, p: PauliOp) {
        self.faults.insert(addr, p);
    }

    pub fn from_fault_path(p: &FaultPath) -> Self {
        Self {
            faults: p.faults.iter().map(|(&l, f)| (vec![l], f.clone())).collect(),
        }
    }

    /// The level-one path; errors on longer addresses.
    pub fn to_fault_path(&self) -> Result<FaultPath> {
        let mut out = FaultPath::empty();
        for (a, p) in &self.faults {
            match a.as_slice() {
                [l] => out.insert(*l, p.clone()),
                _ => return Err(Error::ForeignLocation(a.first().copied().unwrap_or(usize::MAX))),
            }
        }
        Ok(out)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Good,
    Bad,
}

fn check_loc(c: &Circuit, id: usize, p: &PauliOp) -> Result<()> {
    let loc = c.location(id)?;
    if loc.kind == GateKind::Classical || p.n() != loc.qubits.len() {
        return Err(Error::ForeignLocation(id));
    }
    Ok(())
}

/// A level-one rectangle is good with at most one faulty location; a
/// level-two rectangle is good with at most one bad level-one rectangle.
pub fn classify_fault_path(rec: &Rec, path: &RecPath) -> Result<Verdict> {
    let good = |b: bool| if b { Verdict::Good } else { Verdict::Bad };
    match rec {
        Rec::One(r) => {
            for (a, p) in &path.faults {
                match a.as_slice() {
                    [l] => check_loc(&r.circuit, *l, p)?,
                    _ => return Err(Error::ForeignLocation(a.first().copied().unwrap_or(usize::MAX))),
                }
            }
            Ok(good(path.faults.len() <= 1))
        }
        Rec::Two(r) => {
            let mut per_sub: BTreeMap<usize, usize> = BTreeMap::new();
            for (a, p) in &path.faults {
                let [outer, inner] = a.as_slice() else {
                    return Err(Error::ForeignLocation(a.first().copied().unwrap_or(usize::MAX)));
                };
                let g = r.subs.get(outer).ok_or(Error::ForeignLocation(*outer))?;
                check_loc(&r.inner[g].circuit, *inner, p)?;
                *per_sub.entry(*outer).or_default() += 1;
            }
            let bad = per_sub.values().filter(|&&k| k > 1).count();
            Ok(good(bad <= 1))
        }
    }
}

/// Identity and every single-qubit Pauli on an `n`-qubit block.
pub fn weight_one_errors(n: usize) -> Vec<PauliOp> {
    let mut v = vec![PauliOp::identity(n)];
    for q in 0..n {
        for p in [Pauli1::X, Pauli1::Y, Pauli1::Z] {
            v.push(PauliOp::single(n, q, p));
        }
    }
    v
}

/// Every non-identity Pauli on `k` wires.
pub fn nontrivial_paulis(k: usize) -> Vec<PauliOp> {
    (1..1u64 << (2 * k))
        .map(|v| {
            let x = BitVector::from_u64(k, v & ((1 << k) - 1));
            let z = BitVector::from_u64(k, v >> k);
            PauliOp::hermitian(x, z)
        })
        .collect()
}

/// Which logical flips matter at an output.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Relevant {
    x: bool,
    z: bool,
}

fn relevant(gate: RecGate) -> Relevant {
    match gate {
        RecGate::PrepZ | RecGate::MeasZ => Relevant { x: true, z: false },
        RecGate::PrepX | RecGate::MeasX => Relevant { x: false, z: true },
        _ => Relevant { x: true, z: true },
    }
}

/// Logical flips left after ideal decoding of a residual: `(X̄, Z̄)`.
fn ideal_flips(code: &CssCode, dec: &LookupDecoder, x: &BitVector, z: &BitVector) -> (bool, bool) {
    let xc = dec.decode_x_errors(&code.hz().mul_vec(x)).xor(x);
    let zc = dec.decode_z_errors(&code.hx().mul_vec(z)).xor(z);
    (
        xc.dot(code.logical_z()[0].z_bits()),
        zc.dot(code.logical_x()[0].x_bits()),
    )
}

/// Residual on a block reduced to what ideal decoding depends on.
fn residual_key(code: &CssCode, r: &PauliOp) -> (BitVector, BitVector, bool, bool) {
    (
        code.hz().mul_vec(r.x_bits()),
        code.hx().mul_vec(r.z_bits()),
        r.x_bits().dot(code.logical_z()[0].z_bits()),
        r.z_bits().dot(code.logical_x()[0].x_bits()),
    )
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Correctness {
    pub correct: bool,
    /// Input-error combinations pushed through the transversal gate.
    pub cases: usize,
    pub first_failure: Option<String>,
    /// Largest per-sector reduced weight of an error-correction output, over
    /// inputs of weight at most one, for blocks holding at most one fault.
    /// Capped at 2, which stands for anything above one.
    pub max_ec_output_weight: usize,
    /// Most rounds any gadget ran.
    pub max_rounds: usize,
}

/// Precomputed fault-free runs of a level-one rectangle, one per input
/// error of weight at most one on each block, with a snapshot at each round
/// start so that a faulty run resumes from the round holding its first
/// fault.
pub struct RecChecker<'a> {
    rec: &'a Rec1,
    errors: Vec<PauliOp>,
    hx: Echelon,
    hz: Echelon,
    /// `[block][error][round]`
    snapshots: Vec<Vec<Vec<RunState<FrameBackend>>>>,
}

impl<'a> RecChecker<'a> {
    pub fn new(rec: &'a Rec1) -> Self {
        let c = &rec.circuit;
        let errors = weight_one_errors(rec.code.n());
        let empty = FaultPath::empty();
        let snapshots = (0..rec.gate.inputs())
            .map(|b| {
                let starts = &c.ecs[rec.ec_of_block(b)].round_starts;
                errors
                    .iter()
                    .map(|e| {
                        let mut f = PauliFrame::new(c.num_qubits);
                        f.set_block(&c.inputs[b], e);
                        let mut st = RunState::new(c, FrameBackend { frame: f });
                        starts
                            .iter()
                            .map(|&l| {
                                st.run_until(c, &empty, l);
                                st.clone()
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Self {
            rec,
            errors,
            hx: rec.code.hx().echelon(),
            hz: rec.code.hz().echelon(),
            snapshots,
        }
    }

    /// Reduced weight of a residual, capped at 2.
    fn capped_weight(&self, r: &PauliOp) -> usize {
        let sector = |ech: &Echelon, v: &BitVector| {
            if reduce_against(ech, v).is_zero() {
                return 0;
            }
            let one = (0..v.len()).any(|q| {
                let mut w = v.clone();
                w.flip(q);
                reduce_against(ech, &w).is_zero()
            });
            if one {
                1
            } else {
                2
            }
        };
        sector(&self.hx, r.x_bits()).max(sector(&self.hz, r.z_bits()))
    }

    /// Checks the rectangle under `path` for every input error of weight at
    /// most one per block. One input error plus one fault stays within what
    /// the gadget corrects only when `t >= 2`. Frames are relative to the fault-free run, so a
    /// trivial logical frame means the decoded output matches the ideal gate
    /// for every encoded input state.
    pub fn check(&self, path: &FaultPath) -> Result<Correctness> {
        path.check(&self.rec.circuit)?;
        let rec = self.rec;
        let c = &rec.circuit;
        let code = &*rec.code;
        let mut out = Correctness {
            correct: true,
            ..Default::default()
        };
        let mut gate_path = FaultPath::empty();
        let mut block_paths = vec![FaultPath::empty(); rec.gate.inputs()];
        for (&id, p) in &path.faults {
            match c.locations[id].region {
                Region::Ec(e) => block_paths[e].insert(id, p.clone()),
                _ => gate_path.insert(id, p.clone()),
            }
        }
        // Residuals each block can hand to the gate, deduplicated by what
        // ideal decoding sees.
        let mut residuals: Vec<Vec<PauliOp>> = Vec::new();
        for (b, bp) in block_paths.iter().enumerate() {
            let ec = rec.ec_of_block(b);
            let starts = &c.ecs[ec].round_starts;
            let first = bp.faults.keys().map(|&id| c.locations[id].layer).min();
            let slot = match first {
                Some(l) => starts.iter().rposition(|&s| s <= l).unwrap_or(0),
                None => starts.len() - 1,
            };
            let mut seen = HashSet::new();
            let mut reps = Vec::new();
            for ei in 0..self.errors.len() {
                let mut st = self.snapshots[b][ei][slot].clone();
                st.run_until(c, bp, rec.gate_layer);
                out.max_rounds = out.max_rounds.max(st.ecs[ec].rounds_run);
                let r = st.backend.frame.restrict(&c.inputs[b]);
                if bp.len() <= 1 {
                    out.max_ec_output_weight = out.max_ec_output_weight.max(self.capped_weight(&r));
                }
                if seen.insert(residual_key(code, &r)) {
                    reps.push(r);
                }
            }
            residuals.push(reps);
        }
        let rel = relevant(rec.gate);
        let mut combo = vec![0usize; residuals.len()];
        loop {
            let mut frame = PauliFrame::new(c.num_qubits);
            for (b, &i) in combo.iter().enumerate() {
                frame.set_block(&c.inputs[b], &residuals[b][i]);
            }
            let mut st = RunState::new(c, FrameBackend { frame });
            st.next_layer = rec.gate_layer;
            st.run(c, &gate_path);
            out.cases += 1;
            let failure = self.judge(&st, rel);
            if let Some(msg) = failure {
                out.correct = false;
                if out.first_failure.is_none() {
                    let labels: Vec<String> = combo
                        .iter()
                        .enumerate()
                        .map(|(b, &i)| residuals[b][i].to_label())
                        .collect();
                    out.first_failure = Some(format!("{msg} (gate inputs {})", labels.join(", ")));
                }
            }
            // Next combination.
            let mut k = 0;
            loop {
                if k == combo.len() {
                    return Ok(out);
                }
                combo[k] += 1;
                if combo[k] < residuals[k].len() {
                    break;
                }
                combo[k] = 0;
                k += 1;
            }
        }
    }

    fn judge(&self, st: &RunState<FrameBackend>, rel: Relevant) -> Option<String> {
        let rec = self.rec;
        let code = &*rec.code;
        let c = &rec.circuit;
        match rec.gate {
            RecGate::MeasZ | RecGate::MeasX => {
                let flips = BitVector::from_bools(
                    &rec.meas[0]
                        .iter()
                        .map(|&m| st.outcomes[m].unwrap_or(false))
                        .collect::<Vec<_>>(),
                );
                let zero = BitVector::zeros(code.n());
                let (fx, fz) = if rec.gate == RecGate::MeasZ {
                    ideal_flips(code, &rec.decoder, &flips, &zero)
                } else {
                    ideal_flips(code, &rec.decoder, &zero, &flips)
                };
                (fx || fz).then(|| "decoded measurement flipped".to_string())
            }
            _ => {
                for (b, block) in c.outputs.iter().enumerate() {
                    let r = st.backend.frame.restrict(block);
                    let (fx, fz) = ideal_flips(code, &rec.decoder, r.x_bits(), r.z_bits());
                    if (fx && rel.x) || (fz && rel.z) {
                        return Some(format!("output block {b} decodes with residual {}", r.to_label()));
                    }
                }
                None
            }
        }
    }
}

/// Correctness of a level-one rectangle under one fault path.
pub fn check_correctness(rec: &Rec1, path: &FaultPath) -> Result<bool> {
    Ok(RecChecker::new(rec).check(path)?.correct)
}

#[derive(Clone, Debug, Default)]
pub struct SweepReport {
    pub paths: usize,
    pub passed: usize,
    pub failures: Vec<(usize, PauliOp)>,
    pub max_rounds: usize,
    pub max_ec_output_weight: usize,
}

/// Every single-location fault with every non-identity Pauli on its wires.
pub fn sweep_single_faults(rec: &Rec1) -> Result<SweepReport> {
    let checker = RecChecker::new(rec);
    let mut rep = SweepReport::default();
    for loc in rec.circuit.quantum_locations() {
        for p in nontrivial_paulis(loc.qubits.len()) {
            let r = checker.check(&FaultPath::single(loc.id, p.clone()))?;
            rep.paths += 1;
            rep.max_rounds = rep.max_rounds.max(r.max_rounds);
            rep.max_ec_output_weight = rep.max_ec_output_weight.max(r.max_ec_output_weight);
            if r.correct {
                rep.passed += 1;
            } else {
                rep.failures.push((loc.id, p));
            }
        }
    }
    Ok(rep)
}

/// Searches pairs of X faults on data idles in the first layer of the
/// identity rectangle for a path that is not correct.
pub fn find_bad_witness(code: &CssCode, t: usize) -> Result<Option<(Rec1, FaultPath)>> {
    let rec = Rec1::build(RecGate::I, code, t)?;
    let checker = RecChecker::new(&rec);
    let data = &rec.circuit.inputs[0];
    let idles: Vec<usize> = rec.circuit.layers[0]
        .iter()
        .copied()
        .filter(|&id| {
            let l = &rec.circuit.locations[id];
            l.kind == GateKind::Idle && data.contains(&l.qubits[0])
        })
        .collect();
    let x = PauliOp::single(1, 0, Pauli1::X);
    for (i, &a) in idles.iter().enumerate() {
        for &b in &idles[i + 1..] {
            let mut path = FaultPath::single(a, x.clone());
            path.insert(b, x.clone());
            if !checker.check(&path)?.correct {
                return Ok(Some((rec, path)));
            }
        }
    }
    Ok(None)
}

fn logical(code: &CssCode, x: bool) -> &PauliOp {
    if x {
        &code.logical_x()[0]
    } else {
        &code.logical_z()[0]
    }
}

/// Stabilizer-state route: encodes basis states into the input blocks,
/// applies `input_errors` (one per block), runs the tableau simulation,
/// ideally decodes each output and compares against the gate's action.
/// Input states must be Z- or X-basis states.
pub fn check_with_tableau(
    rec: &Rec1,
    path: &FaultPath,
    states: &[BasisState],
    input_errors: &[PauliOp],
    seed: u64,
    stream: u64,
) -> Result<bool> {
    let c = &rec.circuit;
    let code = &*rec.code;
    let enc = CssEncoder::new(code)?;
    let nq = c.num_qubits;
    if states.len() != rec.gate.inputs() || input_errors.len() != rec.gate.inputs() {
        return Err(Error::DimensionMismatch {
            expected: rec.gate.inputs(),
            found: states.len(),
        });
    }
    // Logical stabilizers of the input as (per-block basis, sign).
    let mut stabs: Vec<(Vec<Option<bool>>, bool)> = Vec::new();
    let blocks = rec.gate.inputs().max(rec.gate.outputs());
    let mut tab = Tableau::new(nq);
    for (b, (&s, e)) in states.iter().zip(input_errors).enumerate() {
        encode_block(&mut tab, &enc, &c.inputs[b], s);
        tab.apply_pauli(&c.inputs[b], e);
        let (label, minus) = s.stabilizer();
        let x = match label {
            "X" => true,
            "Z" => false,
            _ => return Err(Error::InvalidParameter(format!("{s:?} is not a Z or X basis state"))),
        };
        let mut which = vec![None; blocks];
        which[b] = Some(x);
        stabs.push((which, minus));
    }
    // Ideal action on the logical stabilizers.
    match rec.gate {
        RecGate::I | RecGate::MeasZ | RecGate::MeasX => {}
        RecGate::X | RecGate::Z => {
            for (which, minus) in &mut stabs {
                if which[0] == Some(rec.gate == RecGate::Z) {
                    *minus ^= true;
                }
            }
        }
        RecGate::Cnot => {
            for (which, _) in &mut stabs {
                match (which[0], which[1]) {
                    (Some(true), None) => which[1] = Some(true),
                    (None, Some(false)) => which[0] = Some(false),
                    _ => {}
                }
            }
        }
        RecGate::PrepZ => stabs.push((vec![Some(false)], false)),
        RecGate::PrepX => stabs.push((vec![Some(true)], false)),
    }
    let (mut tab, rec_run) = simulate_with_faults(c, path, tab, seed, stream)?;
    if let RecGate::MeasZ | RecGate::MeasX = rec.gate {
        let raw = BitVector::from_bools(
            &rec.meas[0]
                .iter()
                .map(|&m| rec_run.outcomes[m].unwrap_or(false))
                .collect::<Vec<_>>(),
        );
        let zero = BitVector::zeros(code.n());
        let meas_x = rec.gate == RecGate::MeasX;
        let bit = if meas_x {
            ideal_flips(code, &rec.decoder, &zero, &raw).1
        } else {
            ideal_flips(code, &rec.decoder, &raw, &zero).0
        };
        let (which, minus) = &stabs[0];
        if which[0] != Some(meas_x) {
            return Err(Error::InvalidParameter(
                "measured basis differs from the input basis".into(),
            ));
        }
        return Ok(bit == *minus);
    }
    let rel = relevant(rec.gate);
    for block in &c.outputs {
        let syn = |tab: &mut Tableau, g: &BitVector, x: bool| -> Result<bool> {
            let p = if x {
                PauliOp::x_type(g.clone())
            } else {
                PauliOp::z_type(g.clone())
            };
            tab.expectation(&p.embed(nq, block))
                .map(|v| !v)
                .ok_or_else(|| Error::Internal("check outcome is not determined".into()))
        };
        if rel.x {
            let s: Vec<bool> = code
                .hz()
                .rows()
                .iter()
                .map(|g| syn(&mut tab, g, false))
                .collect::<Result<_>>()?;
            let corr = rec.decoder.decode_x_errors(&BitVector::from_bools(&s)).clone();
            tab.apply_pauli(block, &PauliOp::x_type(corr));
        }
        if rel.z {
            let s: Vec<bool> = code
                .hx()
                .rows()
                .iter()
                .map(|g| syn(&mut tab, g, true))
                .collect::<Result<_>>()?;
            let corr = rec.decoder.decode_z_errors(&BitVector::from_bools(&s)).clone();
            tab.apply_pauli(block, &PauliOp::z_type(corr));
        }
    }
    for (which, minus) in &stabs {
        let mut p = PauliOp::identity(nq);
        for (b, w) in which.iter().enumerate() {
            if let Some(x) = *w {
                p.mul_assign(&logical(code, x).embed(nq, &c.outputs[b]));
            }
        }
        let p = p.to_hermitian();
        let mut signed = p.clone();
        if *minus {
            signed.set_phase(p.phase() + 2);
        }
        if tab.expectation(&signed) != Some(true) {
            return Ok(false);
        }
    }
    Ok(true)
}
