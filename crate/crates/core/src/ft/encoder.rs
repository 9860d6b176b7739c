//! Unencoded-to-encoded interfaces for single-logical-qubit CSS codes.
//!
//! The encoder prepares the pivot qubits of the reduced X-check matrix in
//! `|+⟩` and the remaining qubits, apart from the input qubit, in `|0⟩`. A
//! CNOT fan-out from the input qubit writes the reduced logical X, and a
//! fan-out from each pivot writes its check row. Running the CNOTs in reverse
//! and measuring pivots in the X basis and the rest in the Z basis undoes it;
//! the measured bits are a syndrome for the images of those single-qubit
//! operators, decoded with a lookup table and fed forward as a Pauli on the
//! input qubit.

use std::sync::Arc;

use crate::bits::BitVector;
use crate::code::CssCode;
use crate::decoder::LookupDecoder;
use crate::error::{Error, Result};
use crate::ft::circuit::{Circuit, CircuitBuilder, ClassicalAction, Cond, GateKind, Region, UnencodeSpec};
use crate::ft::frame::PauliFrame;
use crate::ft::shor::{append_parallel_ec, block_layout, EcPlacement, ShorTemplate};
use crate::ft::tableau::Tableau;
use crate::gf2::{reduce_against, BinMatrix};
use crate::pauli::PauliOp;

#[derive(Clone, Debug)]
pub struct CssEncoder {
    n: usize,
    /// Data position carrying the unencoded qubit.
    pub input: usize,
    pub plus: Vec<usize>,
    pub zero: Vec<usize>,
    /// CNOT layers as (control, target) data positions.
    pub layers: Vec<Vec<(usize, usize)>>,
}

fn pack(cnots: Vec<(usize, usize)>) -> Vec<Vec<(usize, usize)>> {
    let mut layers: Vec<Vec<(usize, usize)>> = Vec::new();
    for (c, t) in cnots {
        // A gate may not move ahead of an earlier gate sharing a qubit.
        let mut at = 0;
        for (i, l) in layers.iter().enumerate() {
            if l.iter().any(|&(a, b)| a == c || a == t || b == c || b == t) {
                at = i + 1;
            }
        }
        if at == layers.len() {
            layers.push(Vec::new());
        }
        layers[at].push((c, t));
    }
    layers
}

impl CssEncoder {
    pub fn new(code: &CssCode) -> Result<Self> {
        if code.k() != 1 {
            return Err(Error::InvalidParameter(format!(
                "encoder needs one logical qubit, code has {}",
                code.k()
            )));
        }
        let n = code.n();
        let ech = code.hx().echelon();
        let rank = ech.pivots.len();
        let lx = reduce_against(&ech, code.logical_x()[0].x_bits());
        let input = lx
            .iter_ones()
            .next()
            .ok_or_else(|| Error::InvalidCode("logical X lies in the check space".into()))?;
        let mut cnots: Vec<(usize, usize)> = lx.iter_ones().filter(|&q| q != input).map(|q| (input, q)).collect();
        for (i, &p) in ech.pivots.iter().enumerate() {
            cnots.extend(ech.reduced.row(i).iter_ones().filter(|&q| q != p).map(|q| (p, q)));
        }
        let plus = ech.pivots.clone();
        let zero: Vec<usize> = (0..n).filter(|q| *q != input && !plus.contains(q)).collect();
        debug_assert_eq!(plus.len(), rank);
        Ok(Self {
            n,
            input,
            plus,
            zero,
            layers: pack(cnots),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `U P U†` for the encoding Clifford `U`.
    pub fn image(&self, p: &PauliOp) -> PauliOp {
        let all: Vec<usize> = (0..self.n).collect();
        let mut f = PauliFrame::new(self.n);
        f.set_block(&all, p);
        for l in &self.layers {
            for &(c, t) in l {
                f.cnot(c, t);
            }
        }
        f.restrict(&all)
    }

    /// The stabilizer code whose checks are the images of the measured
    /// single-qubit operators and whose logicals are the images of `X` and
    /// `Z` on the input qubit.
    pub fn readout_code(&self, name: &str) -> Result<CssCode> {
        let n = self.n;
        let single = |q: usize, x: bool| {
            let v = BitVector::from_indices(n, [q]);
            if x {
                PauliOp::x_type(v)
            } else {
                PauliOp::z_type(v)
            }
        };
        let hx = BinMatrix::from_rows(
            n,
            self.plus
                .iter()
                .map(|&q| self.image(&single(q, true)).x_bits().clone())
                .collect(),
        );
        let hz = BinMatrix::from_rows(
            n,
            self.zero
                .iter()
                .map(|&q| self.image(&single(q, false)).z_bits().clone())
                .collect(),
        );
        let lx = self.image(&single(self.input, true));
        let lz = self.image(&single(self.input, false));
        CssCode::new(name, hx, hz, vec![lx], vec![lz])
    }
}

/// Prepares the non-input qubits and runs the encoding CNOTs.
pub fn append_encoder(b: &mut CircuitBuilder, enc: &CssEncoder, data: &[usize]) {
    b.set_idle_region(data, Region::Encoder);
    b.begin_layer();
    for &q in &enc.plus {
        b.add(GateKind::PrepX, &[data[q]], Cond::Always, Region::Encoder);
    }
    for &q in &enc.zero {
        b.add(GateKind::PrepZ, &[data[q]], Cond::Always, Region::Encoder);
    }
    b.end_layer();
    for l in &enc.layers {
        b.begin_layer();
        for &(c, t) in l {
            b.add(GateKind::Cnot, &[data[c], data[t]], Cond::Always, Region::Encoder);
        }
        b.end_layer();
    }
}

/// Runs the encoding CNOTs backwards, measures out the non-input qubits and
/// applies the decoded Pauli to the input qubit.
pub fn append_decoder(b: &mut CircuitBuilder, enc: &CssEncoder, data: &[usize], name: &str) -> Result<usize> {
    let code = Arc::new(enc.readout_code(name)?);
    let decoder = Arc::new(LookupDecoder::for_code(&code)?);
    b.set_idle_region(data, Region::Decoder);
    for l in enc.layers.iter().rev() {
        b.begin_layer();
        for &(c, t) in l {
            b.add(GateKind::Cnot, &[data[c], data[t]], Cond::Always, Region::Decoder);
        }
        b.end_layer();
    }
    let dec = b.next_unencoder_id();
    b.begin_layer();
    let x_meas = enc
        .plus
        .iter()
        .map(|&q| {
            b.add(GateKind::MeasX, &[data[q]], Cond::Always, Region::Decoder)
                .1
                .expect("measurement")
        })
        .collect();
    let z_meas = enc
        .zero
        .iter()
        .map(|&q| {
            b.add(GateKind::MeasZ, &[data[q]], Cond::Always, Region::Decoder)
                .1
                .expect("measurement")
        })
        .collect();
    b.add_classical(ClassicalAction::Unencode { dec }, Region::Decoder);
    b.end_layer();
    let out = data[enc.input];
    for (kind, x) in [(GateKind::X, true), (GateKind::Z, false)] {
        b.begin_layer();
        b.add(kind, &[out], Cond::Unencoded { dec, x }, Region::Decoder);
        b.end_layer();
    }
    b.push_unencoder(UnencodeSpec {
        code,
        decoder,
        x_meas,
        z_meas,
        output: out,
    });
    Ok(dec)
}

struct Setup {
    code: Arc<CssCode>,
    decoder: Arc<LookupDecoder>,
    tpl: ShorTemplate,
    enc: CssEncoder,
    place: EcPlacement,
    b: CircuitBuilder,
}

fn setup(code: &CssCode, encoded_input: bool) -> Result<Setup> {
    let tpl = ShorTemplate::new(code)?;
    let enc = CssEncoder::new(code)?;
    let (nq, places, regs) = block_layout(code.n(), tpl.ancillas, 1);
    let place = places[0].clone();
    let inputs = if encoded_input {
        vec![place.data.clone()]
    } else {
        vec![vec![place.data[enc.input]]]
    };
    Ok(Setup {
        code: Arc::new(code.clone()),
        decoder: Arc::new(LookupDecoder::for_code(code)?),
        tpl,
        enc,
        place,
        b: CircuitBuilder::new(nq, regs, inputs),
    })
}

impl Setup {
    fn ec(&mut self, t: usize) {
        append_parallel_ec(
            &mut self.b,
            &self.code,
            &self.decoder,
            &self.tpl,
            t,
            std::slice::from_ref(&self.place),
        );
    }
}

/// Encoder followed by error correction; input is the single qubit at
/// `circuit.inputs[0][0]`.
pub fn build_interface_up(code: &CssCode, t: usize) -> Result<Circuit> {
    let mut s = setup(code, false)?;
    append_encoder(&mut s.b, &s.enc, &s.place.data);
    s.ec(t);
    let out = s.place.data.clone();
    s.b.finish(vec![out])
}

/// Error correction followed by the unencoding step.
pub fn build_interface_down(code: &CssCode, t: usize) -> Result<Circuit> {
    let mut s = setup(code, true)?;
    s.ec(t);
    append_decoder(&mut s.b, &s.enc, &s.place.data, code.name())?;
    let out = s.place.data[s.enc.input];
    s.b.finish(vec![vec![out]])
}

/// Down interface composed after the up interface.
pub fn build_round_trip(code: &CssCode, t: usize) -> Result<Circuit> {
    let mut s = setup(code, false)?;
    append_encoder(&mut s.b, &s.enc, &s.place.data);
    s.ec(t);
    s.ec(t);
    append_decoder(&mut s.b, &s.enc, &s.place.data, code.name())?;
    let out = s.place.data[s.enc.input];
    s.b.finish(vec![vec![out]])
}

/// Single-qubit stabilizer states used as test inputs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BasisState {
    Zero,
    One,
    Plus,
    Minus,
    PlusI,
    MinusI,
}

impl BasisState {
    pub const ALL: [BasisState; 6] = [
        BasisState::Zero,
        BasisState::One,
        BasisState::Plus,
        BasisState::Minus,
        BasisState::PlusI,
        BasisState::MinusI,
    ];

    /// Hermitian Pauli label with sign that stabilizes the state.
    pub fn stabilizer(self) -> (&'static str, bool) {
        match self {
            BasisState::Zero => ("Z", false),
            BasisState::One => ("Z", true),
            BasisState::Plus => ("X", false),
            BasisState::Minus => ("X", true),
            BasisState::PlusI => ("Y", false),
            BasisState::MinusI => ("Y", true),
        }
    }

    /// Sets qubit `q` of a fresh `|0..0⟩` tableau to this state.
    pub fn prepare(self, t: &mut Tableau, q: usize) {
        match self {
            BasisState::Zero => {}
            BasisState::One => t.x_gate(q),
            BasisState::Plus => t.h(q),
            BasisState::Minus => {
                t.x_gate(q);
                t.h(q)
            }
            BasisState::PlusI => {
                t.h(q);
                t.s(q)
            }
            BasisState::MinusI => {
                t.x_gate(q);
                t.h(q);
                t.s(q)
            }
        }
    }
}

/// Fresh register with `state` on qubit `q`.
pub fn input_tableau(num_qubits: usize, q: usize, state: BasisState) -> Tableau {
    let mut t = Tableau::new(num_qubits);
    state.prepare(&mut t, q);
    t
}

/// Encodes `state` into a block of fresh `|0⟩` qubits of a tableau.
pub fn encode_block(t: &mut Tableau, enc: &CssEncoder, data: &[usize], state: BasisState) {
    state.prepare(t, data[enc.input]);
    for &q in &enc.plus {
        t.h(data[q]);
    }
    for l in &enc.layers {
        for &(c, tq) in l {
            t.cnot(data[c], data[tq]);
        }
    }
}
