//! Circuit execution with fault injection and the classical control of the
//! error-correction and unencoding steps.
//!
//! Two backends share one executor. The tableau backend runs the actual
//! stabilizer state with random measurement outcomes. The frame backend
//! tracks only the deviation from an ideal run whose classically relevant
//! parities are all zero (codeword inputs), so measurement "outcomes" are the
//! flips relative to that run and every classical decision is exact.

use rand_chacha::ChaCha8Rng;

use crate::bits::BitVector;
use crate::error::Result;
use crate::ft::circuit::{Circuit, ClassicalAction, Cond, FaultPath, GateKind};
use crate::ft::frame::PauliFrame;
use crate::ft::tableau::Tableau;
use crate::pauli::PauliOp;
use crate::stats::stream_rng;

pub trait Backend: Clone {
    fn gate(&mut self, kind: GateKind, qubits: &[usize]);
    fn measure(&mut self, kind: GateKind, q: usize) -> bool;
    fn inject(&mut self, qubits: &[usize], p: &PauliOp);
    /// A classically triggered Pauli correction that fires.
    fn correct(&mut self, q: usize, x: bool);
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrameBackend {
    pub frame: PauliFrame,
}

impl FrameBackend {
    pub fn new(n: usize) -> Self {
        Self {
            frame: PauliFrame::new(n),
        }
    }
}

impl Backend for FrameBackend {
    fn gate(&mut self, kind: GateKind, q: &[usize]) {
        match kind {
            GateKind::H => self.frame.h(q[0]),
            GateKind::S => self.frame.s(q[0]),
            GateKind::Cnot => self.frame.cnot(q[0], q[1]),
            GateKind::Cz => self.frame.cz(q[0], q[1]),
            GateKind::PrepZ | GateKind::PrepX => self.frame.reset(q[0]),
            _ => {}
        }
    }

    fn measure(&mut self, kind: GateKind, q: usize) -> bool {
        let flip = match kind {
            GateKind::MeasZ => self.frame.x.get(q),
            _ => self.frame.z.get(q),
        };
        self.frame.reset(q);
        flip
    }

    fn inject(&mut self, qubits: &[usize], p: &PauliOp) {
        self.frame.apply(qubits, p);
    }

    fn correct(&mut self, q: usize, x: bool) {
        if x {
            self.frame.x.flip(q);
        } else {
            self.frame.z.flip(q);
        }
    }
}

#[derive(Clone, Debug)]
pub struct TableauBackend {
    pub tableau: Tableau,
    pub rng: ChaCha8Rng,
}

impl TableauBackend {
    pub fn new(tableau: Tableau, seed: u64, stream: u64) -> Self {
        Self {
            tableau,
            rng: stream_rng(seed, stream),
        }
    }
}

impl Backend for TableauBackend {
    fn gate(&mut self, kind: GateKind, q: &[usize]) {
        let t = &mut self.tableau;
        match kind {
            GateKind::H => t.h(q[0]),
            GateKind::S => t.s(q[0]),
            GateKind::X => t.x_gate(q[0]),
            GateKind::Z => t.z_gate(q[0]),
            GateKind::Cnot => t.cnot(q[0], q[1]),
            GateKind::Cz => t.cz(q[0], q[1]),
            GateKind::PrepZ => t.prep_z(q[0], &mut self.rng),
            GateKind::PrepX => t.prep_x(q[0], &mut self.rng),
            _ => {}
        }
    }

    fn measure(&mut self, kind: GateKind, q: usize) -> bool {
        match kind {
            GateKind::MeasZ => self.tableau.measure_z(q, &mut self.rng).0,
            _ => self.tableau.measure_x(q, &mut self.rng).0,
        }
    }

    fn inject(&mut self, qubits: &[usize], p: &PauliOp) {
        self.tableau.apply_pauli(qubits, p);
    }

    fn correct(&mut self, q: usize, x: bool) {
        if x {
            self.tableau.x_gate(q);
        } else {
            self.tableau.z_gate(q);
        }
    }
}

/// Classical state of one error-correction gadget.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EcState {
    pub terminated: bool,
    pub window: usize,
    pub last: Option<BitVector>,
    pub flagged: Vec<bool>,
    pub rounds_run: usize,
    pub agreed: Option<BitVector>,
    /// Set when the round cap was hit without agreement.
    pub fallback: bool,
    pub correction: Option<PauliOp>,
}

#[derive(Clone, Debug)]
pub struct RunState<B: Backend> {
    pub backend: B,
    pub outcomes: Vec<Option<bool>>,
    pub ecs: Vec<EcState>,
    pub unencoded: Vec<Option<(bool, bool)>>,
    pub next_layer: usize,
}

impl<B: Backend> RunState<B> {
    pub fn new(c: &Circuit, backend: B) -> Self {
        Self {
            backend,
            outcomes: vec![None; c.num_meas],
            ecs: c
                .ecs
                .iter()
                .map(|e| EcState {
                    terminated: false,
                    window: 0,
                    last: None,
                    flagged: vec![false; e.max_rounds],
                    rounds_run: 0,
                    agreed: None,
                    fallback: false,
                    correction: None,
                })
                .collect(),
            unencoded: vec![None; c.unencoders.len()],
            next_layer: 0,
        }
    }

    fn active(&self, cond: &Cond) -> bool {
        match *cond {
            Cond::Always => true,
            Cond::EcRunning(ec) => !self.ecs[ec].terminated,
            Cond::EcCoupling { ec, round } => !self.ecs[ec].terminated && !self.ecs[ec].flagged[round],
            Cond::EcCorrection { ec, pos, x } => {
                self.ecs[ec].correction.as_ref().is_some_and(
                    |c| {
                        if x {
                            c.x_bits().get(pos)
                        } else {
                            c.z_bits().get(pos)
                        }
                    },
                )
            }
            Cond::Unencoded { dec, x } => self.unencoded[dec].is_some_and(|(bx, bz)| if x { bx } else { bz }),
        }
    }

    fn outcome(&self, m: usize) -> bool {
        self.outcomes[m].unwrap_or(false)
    }

    fn classical(&mut self, c: &Circuit, action: &ClassicalAction) {
        match action {
            ClassicalAction::FlagCheck { ec, round, flags } => {
                if !self.ecs[*ec].terminated {
                    let f = flags.iter().any(|&m| self.outcome(m));
                    self.ecs[*ec].flagged[*round] = f;
                }
            }
            ClassicalAction::Agree { ec, round, parities } => {
                let spec = &c.ecs[*ec];
                if self.ecs[*ec].terminated {
                    return;
                }
                let s = BitVector::from_bools(
                    &parities
                        .iter()
                        .map(|g| g.iter().fold(false, |acc, &m| acc ^ self.outcome(m)))
                        .collect::<Vec<_>>(),
                );
                let st = &mut self.ecs[*ec];
                st.rounds_run += 1;
                if st.flagged[*round] {
                    st.window = 0;
                    st.last = None;
                } else {
                    if st.last.as_ref() == Some(&s) {
                        st.window += 1;
                    } else {
                        st.window = 1;
                    }
                    st.last = Some(s);
                    if st.window > spec.t {
                        st.terminated = true;
                        st.agreed = st.last.clone();
                    }
                }
                if !st.terminated && round + 1 == spec.max_rounds {
                    st.terminated = true;
                    st.fallback = true;
                    st.agreed = st.last.clone();
                }
            }
            ClassicalAction::Decode { ec } => {
                let spec = &c.ecs[*ec];
                let code = &spec.code;
                let mx = code.num_x_generators();
                let s = self.ecs[*ec]
                    .agreed
                    .clone()
                    .unwrap_or_else(|| BitVector::zeros(code.num_generators()));
                let xs: Vec<usize> = (0..mx).collect();
                let zs: Vec<usize> = (mx..code.num_generators()).collect();
                let corr = spec.decoder.decode_parts(&s.gather(&xs), &s.gather(&zs));
                self.ecs[*ec].correction = Some(corr);
            }
            ClassicalAction::Unencode { dec } => {
                let spec = &c.unencoders[*dec];
                let xb = BitVector::from_bools(&spec.x_meas.iter().map(|&m| self.outcome(m)).collect::<Vec<_>>());
                let zb = BitVector::from_bools(&spec.z_meas.iter().map(|&m| self.outcome(m)).collect::<Vec<_>>());
                let corr = spec.decoder.decode_parts(&xb, &zb);
                let (x, z) = spec.code.logical_action(&corr)[0].bits();
                self.unencoded[*dec] = Some((x, z));
            }
        }
    }

    /// Runs layers `next_layer..until`.
    pub fn run_until(&mut self, c: &Circuit, path: &FaultPath, until: usize) {
        let faults: Vec<(usize, usize, &PauliOp)> = path
            .faults
            .iter()
            .map(|(&id, p)| (c.locations[id].layer, id, p))
            .collect();
        while self.next_layer < until.min(c.layers.len()) {
            let li = self.next_layer;
            self.next_layer += 1;
            let here = faults.iter().any(|f| f.0 == li);
            // Rounds after agreement only idle; without faults they are no-ops.
            let cover = &c.ec_cover[li];
            if !here && !cover.is_empty() && cover.iter().all(|&e| self.ecs[e].terminated) {
                continue;
            }
            if here {
                for &(_, id, p) in faults.iter().filter(|f| f.0 == li) {
                    if c.locations[id].kind == GateKind::Idle {
                        self.backend.inject(&c.locations[id].qubits, p);
                    }
                }
            }
            for &id in &c.ops[li] {
                let loc = &c.locations[id];
                if loc.kind == GateKind::Classical {
                    if let Some(a) = &loc.action {
                        self.classical(c, a);
                    }
                    continue;
                }
                let fault = if here { path.faults.get(&id) } else { None };
                let active = self.active(&loc.cond);
                if loc.kind.is_measurement() {
                    if let Some(p) = fault {
                        self.backend.inject(&loc.qubits, p);
                    }
                    if active {
                        let out = self.backend.measure(loc.kind, loc.qubits[0]);
                        self.outcomes[loc.meas.expect("measurement id")] = Some(out);
                    }
                    continue;
                }
                if active {
                    match loc.cond {
                        Cond::EcCorrection { x, .. } | Cond::Unencoded { x, .. } => {
                            self.backend.correct(loc.qubits[0], x)
                        }
                        _ => self.backend.gate(loc.kind, &loc.qubits),
                    }
                }
                if let Some(p) = fault {
                    self.backend.inject(&loc.qubits, p);
                }
            }
        }
    }

    pub fn run(&mut self, c: &Circuit, path: &FaultPath) {
        self.run_until(c, path, c.layers.len());
    }

    pub fn record(&self) -> RunRecord {
        RunRecord {
            outcomes: self.outcomes.clone(),
            ecs: self.ecs.clone(),
            unencoded: self.unencoded.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunRecord {
    pub outcomes: Vec<Option<bool>>,
    pub ecs: Vec<EcState>,
    pub unencoded: Vec<Option<(bool, bool)>>,
}

/// Runs the circuit on a tableau input with faults; measurement randomness
/// comes from stream `stream` of `seed`.
pub fn simulate_with_faults(
    c: &Circuit,
    path: &FaultPath,
    input: Tableau,
    seed: u64,
    stream: u64,
) -> Result<(Tableau, RunRecord)> {
    path.check(c)?;
    let mut st = RunState::new(c, TableauBackend::new(input, seed, stream));
    st.run(c, path);
    let rec = st.record();
    Ok((st.backend.tableau, rec))
}

/// Frame-only run from an input frame (an error on codeword inputs).
pub fn simulate_frame(c: &Circuit, path: &FaultPath, input: PauliFrame) -> Result<(PauliFrame, RunRecord)> {
    path.check(c)?;
    let mut st = RunState::new(c, FrameBackend { frame: input });
    st.run(c, path);
    let rec = st.record();
    Ok((st.backend.frame, rec))
}
