//! Layered circuit representation with explicit idles and classically
//! controlled locations.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::code::CssCode;
use crate::decoder::LookupDecoder;
use crate::error::{Error, Result};
use crate::pauli::PauliOp;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GateKind {
    PrepZ,
    PrepX,
    X,
    Z,
    H,
    S,
    Cnot,
    Cz,
    MeasZ,
    MeasX,
    Idle,
    Classical,
}

impl GateKind {
    pub fn arity(self) -> usize {
        match self {
            GateKind::Cnot | GateKind::Cz => 2,
            GateKind::Classical => 0,
            _ => 1,
        }
    }

    pub fn is_measurement(self) -> bool {
        matches!(self, GateKind::MeasZ | GateKind::MeasX)
    }

    pub fn is_preparation(self) -> bool {
        matches!(self, GateKind::PrepZ | GateKind::PrepX)
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::PrepZ => "prep_z",
            GateKind::PrepX => "prep_x",
            GateKind::X => "x",
            GateKind::Z => "z",
            GateKind::H => "h",
            GateKind::S => "s",
            GateKind::Cnot => "cnot",
            GateKind::Cz => "cz",
            GateKind::MeasZ => "measure_z",
            GateKind::MeasX => "measure_x",
            GateKind::Idle => "idle",
            GateKind::Classical => "classical",
        }
    }
}

/// Classical condition under which a location runs. A location whose
/// condition is false still occupies its wires and behaves as an idle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Cond {
    Always,
    /// The error-correction gadget has not yet reached agreement.
    EcRunning(usize),
    /// As `EcRunning`, and no cat state was flagged in this round.
    EcCoupling {
        ec: usize,
        round: usize,
    },
    /// Correction bit of the gadget on data position `pos`.
    EcCorrection {
        ec: usize,
        pos: usize,
        x: bool,
    },
    /// Pauli correction on the output of an unencoding step.
    Unencoded {
        dec: usize,
        x: bool,
    },
}

/// Classical processing step, run after the quantum locations of its layer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ClassicalAction {
    FlagCheck {
        ec: usize,
        round: usize,
        flags: Vec<usize>,
    },
    /// Parities of the listed measurement groups form the round's syndrome
    /// string, in generator order.
    Agree {
        ec: usize,
        round: usize,
        parities: Vec<Vec<usize>>,
    },
    Decode {
        ec: usize,
    },
    Unencode {
        dec: usize,
    },
}

/// Which gadget a location belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Region {
    Ec(usize),
    Gate,
    Encoder,
    Decoder,
}

#[derive(Clone, Debug)]
pub struct Location {
    pub id: usize,
    pub layer: usize,
    pub kind: GateKind,
    pub qubits: Vec<usize>,
    pub cond: Cond,
    pub meas: Option<usize>,
    pub action: Option<ClassicalAction>,
    pub region: Region,
}

/// Shor error-correction gadget on one block.
#[derive(Clone, Debug)]
pub struct EcSpec {
    pub code: Arc<CssCode>,
    pub decoder: Arc<LookupDecoder>,
    pub data: Vec<usize>,
    pub t: usize,
    pub max_rounds: usize,
    /// First layer of each round slot.
    pub round_starts: Vec<usize>,
    /// First layer after the gadget.
    pub end_layer: usize,
}

/// Unencoding step: measured check outcomes decoded to a Pauli on one qubit.
#[derive(Clone, Debug)]
pub struct UnencodeSpec {
    pub code: Arc<CssCode>,
    /// Decoder over the check set read out by the measurements.
    pub decoder: Arc<LookupDecoder>,
    /// Measurements giving the X-type check bits, in decoder row order.
    pub x_meas: Vec<usize>,
    /// Measurements giving the Z-type check bits.
    pub z_meas: Vec<usize>,
    pub output: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Register {
    pub name: String,
    pub qubits: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct Circuit {
    pub num_qubits: usize,
    pub layers: Vec<Vec<usize>>,
    pub locations: Vec<Location>,
    pub num_meas: usize,
    pub ecs: Vec<EcSpec>,
    pub unencoders: Vec<UnencodeSpec>,
    pub registers: Vec<Register>,
    /// Data qubits of each input block.
    pub inputs: Vec<Vec<usize>>,
    /// Data qubits of each output block.
    pub outputs: Vec<Vec<usize>>,
    /// Per layer, the error-correction gadgets whose non-final rounds make up
    /// all of its non-idle content; empty when the layer has other content.
    pub ec_cover: Vec<Vec<usize>>,
    /// Per layer, the non-idle locations in execution order.
    pub ops: Vec<Vec<usize>>,
}

impl Circuit {
    /// Number of locations, classical ones included.
    pub fn size(&self) -> usize {
        self.locations.len()
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn location(&self, id: usize) -> Result<&Location> {
        self.locations.get(id).ok_or(Error::ForeignLocation(id))
    }

    /// Locations carrying quantum wires, which are the ones that can fail.
    pub fn quantum_locations(&self) -> impl Iterator<Item = &Location> {
        self.locations.iter().filter(|l| l.kind != GateKind::Classical)
    }

    fn cover(&self, li: usize) -> Vec<usize> {
        let ecs: Vec<usize> = (0..self.ecs.len())
            .filter(|&e| {
                let rs = &self.ecs[e].round_starts;
                rs[0] <= li && li < rs[rs.len() - 1]
            })
            .collect();
        let owned = |loc: &Location| match (&loc.cond, &loc.action) {
            (_, Some(ClassicalAction::FlagCheck { ec, .. } | ClassicalAction::Agree { ec, .. })) => ecs.contains(ec),
            (_, Some(_)) => false,
            (Cond::EcRunning(ec) | Cond::EcCoupling { ec, .. }, None) => ecs.contains(ec),
            (Cond::Always, None) => loc.kind == GateKind::Idle,
            _ => false,
        };
        if self.layers[li].iter().all(|&id| owned(&self.locations[id])) {
            ecs
        } else {
            Vec::new()
        }
    }

    pub fn count_kind(&self, kind: GateKind) -> usize {
        self.locations.iter().filter(|l| l.kind == kind).count()
    }

    /// Checks that no wire is used twice in a layer, that every live wire
    /// carries a location in every layer, and that the registers partition
    /// the qubits.
    pub fn validate(&self) -> Result<()> {
        let mut owner = vec![usize::MAX; self.num_qubits];
        for r in &self.registers {
            for &q in &r.qubits {
                if q >= self.num_qubits || owner[q] != usize::MAX {
                    return Err(Error::Internal(format!("register {} overlaps or overflows", r.name)));
                }
                owner[q] = 0;
            }
        }
        if owner.iter().any(|&o| o == usize::MAX) {
            return Err(Error::Internal("registers do not cover every qubit".into()));
        }
        let mut live = vec![false; self.num_qubits];
        for block in &self.inputs {
            for &q in block {
                live[q] = true;
            }
        }
        for (li, layer) in self.layers.iter().enumerate() {
            let mut used = vec![false; self.num_qubits];
            let mut measured = Vec::new();
            for &id in layer {
                let loc = &self.locations[id];
                if loc.layer != li {
                    return Err(Error::Internal(format!("location {id} filed under the wrong layer")));
                }
                if loc.qubits.len() != loc.kind.arity() {
                    return Err(Error::Internal(format!("location {id} has the wrong arity")));
                }
                for &q in &loc.qubits {
                    if used[q] {
                        return Err(Error::Internal(format!("qubit {q} used twice in layer {li}")));
                    }
                    used[q] = true;
                    if loc.kind.is_preparation() {
                        if live[q] {
                            return Err(Error::Internal(format!("qubit {q} prepared while live in layer {li}")));
                        }
                        live[q] = true;
                    } else if !live[q] {
                        return Err(Error::Internal(format!("qubit {q} used while dead in layer {li}")));
                    }
                    if loc.kind.is_measurement() {
                        measured.push(q);
                    }
                }
            }
            if let Some(q) = (0..self.num_qubits).find(|&q| live[q] && !used[q]) {
                return Err(Error::Internal(format!("live qubit {q} has no location in layer {li}")));
            }
            for q in measured {
                live[q] = false;
            }
        }
        for (b, block) in self.outputs.iter().enumerate() {
            if block.iter().any(|&q| !live[q]) {
                return Err(Error::Internal(format!("output block {b} is not live at the end")));
            }
        }
        Ok(())
    }
}

/// A set of faulty locations with the Pauli each applies to its wires
/// (before the measurement for measurement locations, after the gate
/// otherwise).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FaultPath {
    pub faults: BTreeMap<usize, PauliOp>,
}

impl FaultPath {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn single(loc: usize, p: PauliOp) -> Self {
        let mut f = Self::default();
        f.faults.insert(loc, p);
        f
    }

    pub fn insert(&mut self, loc: usize, p: PauliOp) {
        self.faults.insert(loc, p);
    }

    pub fn len(&self) -> usize {
        self.faults.len()
    }

    pub fn is_empty(&self) -> bool {
        self.faults.is_empty()
    }

    /// Checks every fault names a quantum location with a matching wire count.
    pub fn check(&self, c: &Circuit) -> Result<()> {
        for (&id, p) in &self.faults {
            let loc = c.location(id)?;
            if loc.kind == GateKind::Classical || p.n() != loc.qubits.len() {
                return Err(Error::ForeignLocation(id));
            }
        }
        Ok(())
    }
}

/// Incremental construction of a [`Circuit`], one layer at a time. Idles
/// are added automatically for live qubits left untouched by a layer.
pub struct CircuitBuilder {
    c: Circuit,
    live: Vec<bool>,
    used: Vec<bool>,
    measured: Vec<usize>,
    idle_region: Vec<Region>,
    open: bool,
}

impl CircuitBuilder {
    pub fn new(num_qubits: usize, registers: Vec<Register>, inputs: Vec<Vec<usize>>) -> Self {
        let mut live = vec![false; num_qubits];
        for b in &inputs {
            for &q in b {
                live[q] = true;
            }
        }
        Self {
            c: Circuit {
                num_qubits,
                layers: Vec::new(),
                locations: Vec::new(),
                num_meas: 0,
                ecs: Vec::new(),
                unencoders: Vec::new(),
                registers,
                inputs,
                outputs: Vec::new(),
                ec_cover: Vec::new(),
                ops: Vec::new(),
            },
            live,
            used: vec![false; num_qubits],
            measured: Vec::new(),
            idle_region: vec![Region::Gate; num_qubits],
            open: false,
        }
    }

    pub fn num_layers(&self) -> usize {
        self.c.layers.len() + self.open as usize
    }

    /// Index of the layer currently being filled.
    pub fn current_layer(&self) -> usize {
        self.c.layers.len()
    }

    pub fn set_idle_region(&mut self, qubits: &[usize], r: Region) {
        for &q in qubits {
            self.idle_region[q] = r;
        }
    }

    pub fn next_ec_id(&self) -> usize {
        self.c.ecs.len()
    }

    pub fn push_ec(&mut self, spec: EcSpec) -> usize {
        self.c.ecs.push(spec);
        self.c.ecs.len() - 1
    }

    pub fn next_unencoder_id(&self) -> usize {
        self.c.unencoders.len()
    }

    pub fn push_unencoder(&mut self, spec: UnencodeSpec) -> usize {
        self.c.unencoders.push(spec);
        self.c.unencoders.len() - 1
    }

    pub fn begin_layer(&mut self) {
        assert!(!self.open, "layer already open");
        self.open = true;
        self.c.layers.push(Vec::new());
    }

    /// Adds a quantum location; returns `(location id, measurement id)`.
    pub fn add(&mut self, kind: GateKind, qubits: &[usize], cond: Cond, region: Region) -> (usize, Option<usize>) {
        assert!(self.open, "no open layer");
        assert_eq!(qubits.len(), kind.arity(), "{kind:?} arity");
        for &q in qubits {
            assert!(!self.used[q], "qubit {q} used twice in a layer");
            self.used[q] = true;
            if kind.is_preparation() {
                self.live[q] = true;
            }
            if kind.is_measurement() {
                self.measured.push(q);
            }
        }
        let meas = kind.is_measurement().then(|| {
            self.c.num_meas += 1;
            self.c.num_meas - 1
        });
        let id = self.push(kind, qubits.to_vec(), cond, meas, None, region);
        (id, meas)
    }

    pub fn add_classical(&mut self, action: ClassicalAction, region: Region) -> usize {
        assert!(self.open, "no open layer");
        self.push(
            GateKind::Classical,
            Vec::new(),
            Cond::Always,
            None,
            Some(action),
            region,
        )
    }

    fn push(
        &mut self,
        kind: GateKind,
        qubits: Vec<usize>,
        cond: Cond,
        meas: Option<usize>,
        action: Option<ClassicalAction>,
        region: Region,
    ) -> usize {
        let id = self.c.locations.len();
        let layer = self.c.layers.len() - 1;
        self.c.locations.push(Location {
            id,
            layer,
            kind,
            qubits,
            cond,
            meas,
            action,
            region,
        });
        self.c.layers[layer].push(id);
        id
    }

    pub fn end_layer(&mut self) {
        assert!(self.open, "no open layer");
        for q in 0..self.c.num_qubits {
            if self.live[q] && !self.used[q] {
                let r = self.idle_region[q];
                self.push(GateKind::Idle, vec![q], Cond::Always, None, None, r);
            }
        }
        // Keep classical steps after the quantum locations of the layer.
        let layer = self.c.layers.len() - 1;
        let locs = &self.c.locations;
        self.c.layers[layer].sort_by_key(|&id| (locs[id].kind == GateKind::Classical, id));
        for q in self.measured.drain(..) {
            self.live[q] = false;
        }
        self.used.iter_mut().for_each(|u| *u = false);
        self.open = false;
    }

    pub fn is_live(&self, q: usize) -> bool {
        self.live[q]
    }

    pub fn finish(mut self, outputs: Vec<Vec<usize>>) -> Result<Circuit> {
        assert!(!self.open, "layer left open");
        self.c.outputs = outputs;
        self.c.ec_cover = (0..self.c.layers.len()).map(|li| self.c.cover(li)).collect();
        let locs = &self.c.locations;
        self.c.ops = self
            .c
            .layers
            .iter()
            .map(|l| {
                l.iter()
                    .copied()
                    .filter(|&id| locs[id].kind != GateKind::Idle)
                    .collect()
            })
            .collect();
        self.c.validate()?;
        Ok(self.c)
    }
}
