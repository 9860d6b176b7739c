//! Logical Clifford gates by teleportation through an encoded resource state.
//!
//! A block of `m` logical qubits is consumed by a transversal Bell
//! measurement against the first half of the state `(1 ⊗ U)|Φ⟩^{⊗m}`,
//! encoded in two blocks of the same CSS code. The Bell outcomes are read
//! from the physical records through the stored logical representatives,
//! after decoding each record against its own check matrix, and the Pauli
//! `U X^b Z^a U†` on the surviving block finishes the gate.

use std::sync::Arc;

use rand::Rng;
use serde::Serialize;

use crate::bits::BitVector;
use crate::code::CssCode;
use crate::decoder::LookupDecoder;
use crate::error::{check_dim, Error, Result};
use crate::ft::circuit::{Circuit, CircuitBuilder, Cond, FaultPath, GateKind, Region, Register};
use crate::ft::sim::{simulate_with_faults, RunRecord};
use crate::ft::tableau::Tableau;
use crate::pauli::{Pauli1, PauliOp};

/// A Clifford unitary on `m` qubits given by the images `U X_i U†` and
/// `U Z_i U†`, signs included.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CliffordTableau {
    m: usize,
    x_images: Vec<PauliOp>,
    z_images: Vec<PauliOp>,
}

/// Elementary logical gates, used to build and replay Cliffords.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LogicalGate {
    H(usize),
    S(usize),
    Cnot(usize, usize),
    Pauli(PauliOp),
}

impl LogicalGate {
    /// Applies the gate to an `m`-qubit stabilizer state.
    pub fn apply(&self, t: &mut Tableau) {
        match self {
            LogicalGate::H(q) => t.h(*q),
            LogicalGate::S(q) => t.s(*q),
            LogicalGate::Cnot(c, tq) => t.cnot(*c, *tq),
            LogicalGate::Pauli(p) => {
                let qs: Vec<usize> = (0..p.n()).collect();
                t.apply_pauli(&qs, p)
            }
        }
    }
}

fn single(m: usize, q: usize, p: Pauli1) -> PauliOp {
    PauliOp::single(m, q, p)
}

impl CliffordTableau {
    pub fn new(x_images: Vec<PauliOp>, z_images: Vec<PauliOp>) -> Result<Self> {
        let m = x_images.len();
        check_dim(m, z_images.len())?;
        for p in x_images.iter().chain(&z_images) {
            check_dim(m, p.n())?;
            if p.hermitian_exponent() % 2 == 1 {
                return Err(Error::NonClifford(format!("image {p} is not Hermitian")));
            }
        }
        for i in 0..m {
            for j in 0..m {
                if x_images[i].commutes_unchecked(&z_images[j]) != (i != j) {
                    return Err(Error::NonClifford(format!(
                        "images of X{i} and Z{j} break the symplectic form"
                    )));
                }
                if i < j
                    && (!x_images[i].commutes_unchecked(&x_images[j]) || !z_images[i].commutes_unchecked(&z_images[j]))
                {
                    return Err(Error::NonClifford(format!("images on qubits {i} and {j} anticommute")));
                }
            }
        }
        Ok(Self { m, x_images, z_images })
    }

    pub fn identity(m: usize) -> Self {
        Self {
            m,
            x_images: (0..m).map(|q| single(m, q, Pauli1::X)).collect(),
            z_images: (0..m).map(|q| single(m, q, Pauli1::Z)).collect(),
        }
    }

    pub fn gate(m: usize, g: &LogicalGate) -> Self {
        let mut c = Self::identity(m);
        match g {
            LogicalGate::H(q) => {
                c.x_images[*q] = single(m, *q, Pauli1::Z);
                c.z_images[*q] = single(m, *q, Pauli1::X);
            }
            LogicalGate::S(q) => c.x_images[*q] = single(m, *q, Pauli1::Y),
            LogicalGate::Cnot(a, b) => {
                c.x_images[*a] = single(m, *a, Pauli1::X).mul_unchecked(&single(m, *b, Pauli1::X));
                c.z_images[*b] = single(m, *a, Pauli1::Z).mul_unchecked(&single(m, *b, Pauli1::Z));
            }
            LogicalGate::Pauli(p) => {
                for q in 0..m {
                    if p.z_bits().get(q) {
                        c.x_images[q].set_phase(2);
                    }
                    if p.x_bits().get(q) {
                        c.z_images[q].set_phase(2);
                    }
                }
            }
        }
        c
    }

    /// The product of `gates`, first gate applied first.
    pub fn from_gates(m: usize, gates: &[LogicalGate]) -> Self {
        gates
            .iter()
            .fold(Self::identity(m), |acc, g| acc.then(&Self::gate(m, g)))
    }

    /// Random Clifford from `depth` uniformly drawn elementary gates.
    pub fn random<R: Rng + ?Sized>(m: usize, depth: usize, rng: &mut R) -> (Self, Vec<LogicalGate>) {
        let gates: Vec<LogicalGate> = (0..depth)
            .map(|_| match rng.gen_range(0..if m > 1 { 4 } else { 3 }) {
                0 => LogicalGate::H(rng.gen_range(0..m)),
                1 => LogicalGate::S(rng.gen_range(0..m)),
                2 => {
                    let x = BitVector::from_bools(&(0..m).map(|_| rng.gen()).collect::<Vec<_>>());
                    let z = BitVector::from_bools(&(0..m).map(|_| rng.gen()).collect::<Vec<_>>());
                    LogicalGate::Pauli(PauliOp::hermitian(x, z))
                }
                _ => {
                    let a = rng.gen_range(0..m);
                    let b = (a + rng.gen_range(1..m)) % m;
                    LogicalGate::Cnot(a, b)
                }
            })
            .collect();
        (Self::from_gates(m, &gates), gates)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn x_image(&self, q: usize) -> &PauliOp {
        &self.x_images[q]
    }

    pub fn z_image(&self, q: usize) -> &PauliOp {
        &self.z_images[q]
    }

    /// `U p U†`.
    pub fn conjugate(&self, p: &PauliOp) -> PauliOp {
        let mut out = PauliOp::from_parts(BitVector::zeros(self.m), BitVector::zeros(self.m), p.phase());
        for q in p.x_bits().iter_ones() {
            out.mul_assign(&self.x_images[q]);
        }
        for q in p.z_bits().iter_ones() {
            out.mul_assign(&self.z_images[q]);
        }
        out
    }

    /// `next ∘ self`.
    pub fn then(&self, next: &CliffordTableau) -> CliffordTableau {
        CliffordTableau {
            m: self.m,
            x_images: self.x_images.iter().map(|p| next.conjugate(p)).collect(),
            z_images: self.z_images.iter().map(|p| next.conjugate(p)).collect(),
        }
    }
}

/// Logical Paulis on the `m` qubits of a block.
pub fn all_paulis(m: usize) -> Vec<PauliOp> {
    (0..1u64 << (2 * m))
        .map(|v| {
            PauliOp::hermitian(
                BitVector::from_u64(m, v & ((1 << m) - 1)),
                BitVector::from_u64(m, v >> m),
            )
        })
        .collect()
}

/// Named gate families for verification runs.
pub fn gate_set(name: &str, m: usize) -> Result<Vec<(String, CliffordTableau)>> {
    let paulis = || {
        all_paulis(m)
            .into_iter()
            .map(|p| {
                (
                    format!("pauli-{}", p.to_label()),
                    CliffordTableau::gate(m, &LogicalGate::Pauli(p)),
                )
            })
            .collect::<Vec<_>>()
    };
    let cnots = || {
        let mut v = Vec::new();
        for a in 0..m {
            for b in 0..m {
                if a != b {
                    v.push((
                        format!("cnot-{a}-{b}"),
                        CliffordTableau::gate(m, &LogicalGate::Cnot(a, b)),
                    ));
                }
            }
        }
        v
    };
    let singles = || {
        (0..m)
            .flat_map(|q| {
                [
                    (format!("h-{q}"), CliffordTableau::gate(m, &LogicalGate::H(q))),
                    (format!("s-{q}"), CliffordTableau::gate(m, &LogicalGate::S(q))),
                ]
            })
            .collect::<Vec<_>>()
    };
    let identity = || vec![("identity".to_string(), CliffordTableau::identity(m))];
    Ok(match name {
        "identity" => identity(),
        "paulis" => paulis(),
        "cnot" => cnots(),
        "standard" => [identity(), paulis(), cnots()].concat(),
        "clifford" => [identity(), paulis(), cnots(), singles()].concat(),
        other => return Err(Error::InvalidParameter(format!("unknown gate set {other}"))),
    })
}

#[derive(Clone, Debug)]
pub struct AncillaSpec {
    pub code: Arc<CssCode>,
    pub u: CliffordTableau,
}

impl AncillaSpec {
    pub fn new(code: Arc<CssCode>, u: CliffordTableau) -> Result<Self> {
        if u.m() != code.k() {
            return Err(Error::DimensionMismatch {
                expected: code.k(),
                found: u.m(),
            });
        }
        for (i, (lx, lz)) in code.logical_x().iter().zip(code.logical_z()).enumerate() {
            if !lx.z_bits().is_zero() || !lz.x_bits().is_zero() {
                return Err(Error::InvalidCode(format!("logical pair {i} is not CSS-type")));
            }
        }
        Ok(Self { code, u })
    }
}

/// Physical representative of a logical Pauli: `i^phase Π X̄^x Π Z̄^z`.
pub fn logical_operator(code: &CssCode, p: &PauliOp) -> PauliOp {
    let n = code.n();
    let mut out = PauliOp::from_parts(BitVector::zeros(n), BitVector::zeros(n), p.phase());
    for q in p.x_bits().iter_ones() {
        out.mul_assign(&code.logical_x()[q]);
    }
    for q in p.z_bits().iter_ones() {
        out.mul_assign(&code.logical_z()[q]);
    }
    out
}

/// Independent subset of the code generators.
fn independent_generators(code: &CssCode) -> Vec<PauliOp> {
    let mut basis: Vec<(usize, BitVector)> = Vec::new();
    let mut out = Vec::new();
    for g in code.generators() {
        let mut v = g.x_bits().concat(g.z_bits());
        for (p, b) in &basis {
            if v.get(*p) {
                v.xor_assign(b);
            }
        }
        if let Some(p) = v.first_one() {
            basis.push((p, v));
            out.push(g);
        }
    }
    out
}

/// Code generators placed on each of `blocks` consecutive blocks.
fn block_generators(code: &CssCode, blocks: usize) -> Vec<PauliOp> {
    let n = code.n();
    let gens = independent_generators(code);
    (0..blocks)
        .flat_map(|b| {
            let qs: Vec<usize> = (b * n..(b + 1) * n).collect();
            gens.iter().map(move |g| g.embed(blocks * n, &qs)).collect::<Vec<_>>()
        })
        .collect()
}

/// Encoded block whose logical state is stabilized by `logical_stabs`.
pub fn encoded_state(code: &CssCode, logical_stabs: &[PauliOp]) -> Result<Tableau> {
    let mut gens = block_generators(code, 1);
    gens.extend(logical_stabs.iter().map(|s| logical_operator(code, s)));
    Tableau::from_stabilizers(&gens)
}

/// The two-block resource state `(1 ⊗ U)|Φ⟩^{⊗m}`, encoded.
pub fn build_ancilla_state(spec: &AncillaSpec) -> Result<Tableau> {
    let code = &spec.code;
    let (n, m) = (code.n(), code.k());
    let first: Vec<usize> = (0..n).collect();
    let second: Vec<usize> = (n..2 * n).collect();
    let mut gens = block_generators(code, 2);
    for q in 0..m {
        for p in [Pauli1::X, Pauli1::Z] {
            let l = single(m, q, p);
            let a = logical_operator(code, &l).embed(2 * n, &first);
            let b = logical_operator(code, &spec.u.conjugate(&l)).embed(2 * n, &second);
            gens.push(a.mul_unchecked(&b));
        }
    }
    Tableau::from_stabilizers(&gens)
}

/// How Bell outcomes are turned into the output correction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CorrectionTable {
    /// `U X^b Z^a U†` for X-parities `a` and Z-parities `b`.
    Standard,
    /// The roles of `a` and `b` exchanged; a negative control.
    Swapped,
}

#[derive(Clone, Debug)]
pub struct TeleportResult {
    /// State of all three blocks; only `output` is still live.
    pub state: Tableau,
    pub output: Vec<usize>,
    pub record: RunRecord,
    /// Logical `X⊗X` parities of the measured pair.
    pub bell_x: BitVector,
    /// Logical `Z⊗Z` parities of the measured pair.
    pub bell_z: BitVector,
    /// Logical Pauli applied to the output block.
    pub correction: PauliOp,
}

/// Resource state, Bell-measurement circuit and decoder for one spec.
#[derive(Clone, Debug)]
pub struct Teleporter {
    pub spec: AncillaSpec,
    pub decoder: Arc<LookupDecoder>,
    pub circuit: Circuit,
    pub ancilla: Tableau,
    x_meas: Vec<usize>,
    z_meas: Vec<usize>,
}

impl Teleporter {
    pub fn new(spec: AncillaSpec) -> Result<Self> {
        let n = spec.code.n();
        let decoder = Arc::new(LookupDecoder::for_code(&spec.code)?);
        let ancilla = build_ancilla_state(&spec)?;
        let blocks: Vec<Vec<usize>> = (0..3).map(|b| (b * n..(b + 1) * n).collect()).collect();
        let regs = ["data", "ancilla_in", "ancilla_out"]
            .iter()
            .zip(&blocks)
            .map(|(name, qs)| Register {
                name: name.to_string(),
                qubits: qs.clone(),
            })
            .collect();
        let mut b = CircuitBuilder::new(3 * n, regs, blocks.clone());
        b.begin_layer();
        for q in 0..n {
            b.add(
                GateKind::Cnot,
                &[blocks[0][q], blocks[1][q]],
                Cond::Always,
                Region::Gate,
            );
        }
        b.end_layer();
        b.begin_layer();
        let meas =
            |b: &mut CircuitBuilder, kind, q| b.add(kind, &[q], Cond::Always, Region::Gate).1.expect("measurement");
        let x_meas = blocks[0].iter().map(|&q| meas(&mut b, GateKind::MeasX, q)).collect();
        let z_meas = blocks[1].iter().map(|&q| meas(&mut b, GateKind::MeasZ, q)).collect();
        b.end_layer();
        let circuit = b.finish(vec![blocks[2].clone()])?;
        Ok(Self {
            spec,
            decoder,
            circuit,
            ancilla,
            x_meas,
            z_meas,
        })
    }

    fn outcome_bits(rec: &RunRecord, ids: &[usize]) -> BitVector {
        BitVector::from_bools(
            &ids.iter()
                .map(|&i| rec.outcomes[i].unwrap_or(false))
                .collect::<Vec<_>>(),
        )
    }

    /// Teleports the `n`-qubit block `data` through the resource state.
    pub fn teleport(
        &self,
        data: &Tableau,
        path: &FaultPath,
        seed: u64,
        stream: u64,
        table: CorrectionTable,
    ) -> Result<TeleportResult> {
        let code = &self.spec.code;
        let (n, m) = (code.n(), code.k());
        check_dim(n, data.n())?;
        let input = data.tensor(&self.ancilla);
        let (mut state, record) = simulate_with_faults(&self.circuit, path, input, seed, stream)?;
        let mut ox = Self::outcome_bits(&record, &self.x_meas);
        let mut oz = Self::outcome_bits(&record, &self.z_meas);
        ox.xor_assign(self.decoder.decode_z_errors(&code.hx().mul_vec(&ox)));
        oz.xor_assign(self.decoder.decode_x_errors(&code.hz().mul_vec(&oz)));
        let bell_x = BitVector::from_bools(&code.logical_x().iter().map(|l| l.x_bits().dot(&ox)).collect::<Vec<_>>());
        let bell_z = BitVector::from_bools(&code.logical_z().iter().map(|l| l.z_bits().dot(&oz)).collect::<Vec<_>>());
        let (xs, zs) = match table {
            CorrectionTable::Standard => (&bell_z, &bell_x),
            CorrectionTable::Swapped => (&bell_x, &bell_z),
        };
        let frame = PauliOp::hermitian(xs.clone(), zs.clone());
        let correction = self.spec.u.conjugate(&frame).to_hermitian();
        debug_assert_eq!(correction.n(), m);
        let output: Vec<usize> = (2 * n..3 * n).collect();
        state.apply_pauli(&output, &logical_operator(code, &correction));
        Ok(TeleportResult {
            state,
            output,
            record,
            bell_x,
            bell_z,
            correction,
        })
    }

    /// First violated expectation on the output block, or `None` when it is
    /// the code state stabilized by `U s U†` for every input stabilizer `s`.
    pub fn output_violation(&self, res: &mut TeleportResult, input_stabs: &[PauliOp]) -> Option<String> {
        let code = &self.spec.code;
        let total = res.state.n();
        let mut want: Vec<PauliOp> = independent_generators(code);
        want.extend(
            input_stabs
                .iter()
                .map(|s| logical_operator(code, &self.spec.u.conjugate(s))),
        );
        want.into_iter().find_map(|p| {
            let e = res.state.expectation(&p.embed(total, &res.output));
            (e != Some(true)).then(|| format!("{p} has expectation {e:?}"))
        })
    }
}

/// Functional form of [`Teleporter::teleport`] with the standard table.
pub fn teleport(tp: &Teleporter, data: &Tableau, seed: u64, stream: u64) -> Result<TeleportResult> {
    tp.teleport(data, &FaultPath::empty(), seed, stream, CorrectionTable::Standard)
}

/// Logical stabilizers of the `6^m` product basis states.
pub fn basis_inputs(m: usize) -> Vec<Vec<PauliOp>> {
    let choices = [
        (Pauli1::Z, false),
        (Pauli1::Z, true),
        (Pauli1::X, false),
        (Pauli1::X, true),
        (Pauli1::Y, false),
        (Pauli1::Y, true),
    ];
    (0..6usize.pow(m as u32))
        .map(|mut v| {
            (0..m)
                .map(|q| {
                    let (p, minus) = choices[v % 6];
                    v /= 6;
                    let mut s = single(m, q, p);
                    if minus {
                        s.set_phase(s.phase() + 2);
                    }
                    s
                })
                .collect()
        })
        .collect()
}

/// Logical stabilizers of `C|0..0⟩` for a random Clifford `C`.
pub fn random_input<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Vec<PauliOp> {
    let (c, _) = CliffordTableau::random(m, 8 * m + 4, rng);
    (0..m).map(|q| c.conjugate(&single(m, q, Pauli1::Z))).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct Witness {
    pub input: Vec<String>,
    pub bell_x: String,
    pub bell_z: String,
    pub correction: String,
    pub stream: u64,
    pub violation: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub inputs: usize,
    pub runs: u64,
    /// Fewest distinct Bell branches seen for any input.
    pub min_branches: usize,
    pub branches: usize,
    pub witness: Option<Witness>,
}

/// Runs every basis input and `random_inputs` random stabilizer inputs until
/// each has seen all `4^m` Bell branches, checking every output.
pub fn verify_logical_action(
    tp: &Teleporter,
    random_inputs: usize,
    seed: u64,
    table: CorrectionTable,
) -> Result<VerifyReport> {
    let m = tp.spec.code.k();
    let branches = 1usize << (2 * m);
    let cap = 64 * branches as u64;
    let mut rng = crate::stats::stream_rng(seed, u64::MAX);
    let mut inputs = basis_inputs(m);
    inputs.extend((0..random_inputs).map(|_| random_input(m, &mut rng)));
    let mut runs = 0;
    let mut min_branches = branches;
    for (i, stabs) in inputs.iter().enumerate() {
        let data = encoded_state(&tp.spec.code, stabs)?;
        let mut seen = vec![false; branches];
        let mut count = 0;
        for r in 0..cap {
            let stream = i as u64 * cap + r;
            let mut res = tp.teleport(&data, &FaultPath::empty(), seed, stream, table)?;
            runs += 1;
            if let Some(violation) = tp.output_violation(&mut res, stabs) {
                return Ok(VerifyReport {
                    passed: false,
                    inputs: inputs.len(),
                    runs,
                    min_branches: 0,
                    branches,
                    witness: Some(Witness {
                        input: stabs.iter().map(|s| s.to_string()).collect(),
                        bell_x: res.bell_x.to_string(),
                        bell_z: res.bell_z.to_string(),
                        correction: res.correction.to_string(),
                        stream,
                        violation,
                    }),
                });
            }
            let key = (res.bell_x.to_u64() | res.bell_z.to_u64() << m) as usize;
            if !seen[key] {
                seen[key] = true;
                count += 1;
                if count == branches {
                    break;
                }
            }
        }
        min_branches = min_branches.min(count);
    }
    Ok(VerifyReport {
        passed: min_branches == branches,
        inputs: inputs.len(),
        runs,
        min_branches,
        branches,
        witness: None,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct LocalityReport {
    pub faults: usize,
    /// Largest weight of the minimum-weight correction restoring the ideal
    /// output; `None` marks a logical deviation.
    pub max_weight: Option<usize>,
}

/// Injects every single-location Pauli fault into the teleportation circuit
/// and measures how far the output block is from the ideal one.
pub fn single_fault_locality(tp: &Teleporter, input_stabs: &[PauliOp], seed: u64) -> Result<LocalityReport> {
    let code = &tp.spec.code;
    let data = encoded_state(code, input_stabs)?;
    let gens = code.generators();
    let mut faults = 0;
    let mut max_weight = Some(0);
    let mut stream = 0;
    for loc in tp.circuit.quantum_locations() {
        let k = loc.qubits.len();
        for p in all_paulis(k).into_iter().skip(1) {
            let path = FaultPath::single(loc.id, p);
            let mut res = tp.teleport(&data, &path, seed, stream, CorrectionTable::Standard)?;
            stream += 1;
            faults += 1;
            let total = res.state.n();
            let mut syn = BitVector::zeros(gens.len());
            for (i, g) in gens.iter().enumerate() {
                match res.state.expectation(&g.embed(total, &res.output)) {
                    Some(v) => syn.set(i, !v),
                    None => return Err(Error::Internal(format!("generator {i} random after teleport"))),
                }
            }
            let fix = tp.decoder.decode(&code.join_syndrome(
                &syn.gather(&(0..code.num_x_generators()).collect::<Vec<_>>()),
                &syn.gather(&(code.num_x_generators()..gens.len()).collect::<Vec<_>>()),
            ))?;
            res.state.apply_pauli(&res.output, &fix);
            let w = fix.weight();
            if tp.output_violation(&mut res, input_stabs).is_some() {
                max_weight = None;
            }
            max_weight = max_weight.map(|m| m.max(w));
        }
    }
    Ok(LocalityReport { faults, max_weight })
}
