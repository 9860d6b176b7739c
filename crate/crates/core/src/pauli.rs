//! Symplectic Pauli operators `i^phase · X^x · Z^z`.
//!
//! The stored form keeps X before Z, so `Y = i·X·Z` has `phase = 1`. The
//! Hermitian sign of an operator is `i^(phase - #Y)`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bits::BitVector;
use crate::error::{check_dim, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli1 {
    I,
    X,
    Y,
    Z,
}

impl Pauli1 {
    pub const NONTRIVIAL: [Pauli1; 3] = [Pauli1::X, Pauli1::Y, Pauli1::Z];

    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli1::I => (false, false),
            Pauli1::X => (true, false),
            Pauli1::Y => (true, true),
            Pauli1::Z => (false, true),
        }
    }

    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli1::I,
            (true, false) => Pauli1::X,
            (true, true) => Pauli1::Y,
            (false, true) => Pauli1::Z,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Pauli1::I => 'I',
            Pauli1::X => 'X',
            Pauli1::Y => 'Y',
            Pauli1::Z => 'Z',
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliOp {
    x: BitVector,
    z: BitVector,
    phase: u8,
}

impl PauliOp {
    pub fn identity(n: usize) -> Self {
        Self {
            x: BitVector::zeros(n),
            z: BitVector::zeros(n),
            phase: 0,
        }
    }

    /// Builds `i^phase X^x Z^z` from raw parts.
    pub fn from_parts(x: BitVector, z: BitVector, phase: u8) -> Self {
        assert_eq!(x.len(), z.len(), "x/z length mismatch");
        Self { x, z, phase: phase & 3 }
    }

    /// Hermitian Pauli with sign +1 for the given bit parts.
    pub fn hermitian(x: BitVector, z: BitVector) -> Self {
        let ys = (x.and_count(&z) % 4) as u8;
        Self::from_parts(x, z, ys)
    }

    pub fn x_type(x: BitVector) -> Self {
        let n = x.len();
        Self::from_parts(x, BitVector::zeros(n), 0)
    }

    pub fn z_type(z: BitVector) -> Self {
        let n = z.len();
        Self::from_parts(BitVector::zeros(n), z, 0)
    }

    pub fn single(n: usize, qubit: usize, p: Pauli1) -> Self {
        let mut op = Self::identity(n);
        op.set(qubit, p);
        op
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.x.len()
    }

    #[inline]
    pub fn x_bits(&self) -> &BitVector {
        &self.x
    }

    #[inline]
    pub fn z_bits(&self) -> &BitVector {
        &self.z
    }

    pub fn x_bits_mut(&mut self) -> &mut BitVector {
        &mut self.x
    }

    pub fn z_bits_mut(&mut self) -> &mut BitVector {
        &mut self.z
    }

    #[inline]
    pub fn phase(&self) -> u8 {
        self.phase
    }

    pub fn set_phase(&mut self, phase: u8) {
        self.phase = phase & 3;
    }

    /// Exponent `k` such that the operator equals `i^k` times the
    /// Hermitian Pauli with the same bit parts.
    pub fn hermitian_exponent(&self) -> u8 {
        (self.phase + 4 - (self.x.and_count(&self.z) % 4) as u8) & 3
    }

    pub fn get(&self, q: usize) -> Pauli1 {
        Pauli1::from_bits(self.x.get(q), self.z.get(q))
    }

    /// Replaces the single-qubit factor on `q`, keeping the Hermitian sign.
    pub fn set(&mut self, q: usize, p: Pauli1) {
        let before = self.hermitian_exponent();
        let (x, z) = p.bits();
        self.x.set(q, x);
        self.z.set(q, z);
        let ys = (self.x.and_count(&self.z) % 4) as u8;
        self.phase = (before + ys) & 3;
    }

    pub fn weight(&self) -> usize {
        self.x.or(&self.z).count_ones()
    }

    pub fn support(&self) -> Vec<usize> {
        self.x.or(&self.z).iter_ones().collect()
    }

    pub fn is_identity_up_to_phase(&self) -> bool {
        self.x.is_zero() && self.z.is_zero()
    }

    pub fn same_bits(&self, other: &PauliOp) -> bool {
        self.x == other.x && self.z == other.z
    }

    pub fn multiply(&self, other: &PauliOp) -> Result<PauliOp> {
        check_dim(self.n(), other.n())?;
        Ok(self.mul_unchecked(other))
    }

    /// In-place right multiplication `self <- self · other`.
    pub fn mul_assign(&mut self, other: &PauliOp) {
        debug_assert_eq!(self.n(), other.n());
        let swaps = (self.z.and_count(&other.x) % 2) as u8;
        self.phase = (self.phase + other.phase + 2 * swaps) & 3;
        self.x.xor_assign(&other.x);
        self.z.xor_assign(&other.z);
    }

    pub(crate) fn mul_unchecked(&self, other: &PauliOp) -> PauliOp {
        let mut out = self.clone();
        out.mul_assign(other);
        out
    }

    pub fn commutes(&self, other: &PauliOp) -> Result<bool> {
        check_dim(self.n(), other.n())?;
        Ok(self.commutes_unchecked(other))
    }

    #[inline]
    pub(crate) fn commutes_unchecked(&self, other: &PauliOp) -> bool {
        self.x.dot(&other.z) == self.z.dot(&other.x)
    }

    /// Tensor product `self ⊗ other`, with `other` on the higher qubit indices.
    pub fn tensor(&self, other: &PauliOp) -> PauliOp {
        PauliOp::from_parts(
            self.x.concat(&other.x),
            self.z.concat(&other.z),
            self.phase + other.phase,
        )
    }

    /// Restriction to `qubits`, keeping the Hermitian sign of the factor.
    pub fn restrict(&self, qubits: &[usize]) -> PauliOp {
        let mut out = PauliOp::hermitian(self.x.gather(qubits), self.z.gather(qubits));
        out.phase = (out.phase + self.hermitian_exponent()) & 3;
        out
    }

    /// Places this operator on the given qubits of an `n`-qubit register.
    pub fn embed(&self, n: usize, qubits: &[usize]) -> PauliOp {
        assert_eq!(qubits.len(), self.n());
        let mut x = BitVector::zeros(n);
        let mut z = BitVector::zeros(n);
        for (k, &q) in qubits.iter().enumerate() {
            x.set(q, self.x.get(k));
            z.set(q, self.z.get(k));
        }
        let mut out = PauliOp::hermitian(x, z);
        out.phase = (out.phase + self.hermitian_exponent()) & 3;
        out
    }

    pub fn to_label(&self) -> String {
        (0..self.n()).map(|q| self.get(q).symbol()).collect()
    }

    /// Hermitian Pauli with the bit parts and sign ±1 taken from `self`,
    /// dropping any imaginary part.
    pub fn to_hermitian(&self) -> PauliOp {
        let e = self.hermitian_exponent() & 2;
        let mut p = PauliOp::hermitian(self.x.clone(), self.z.clone());
        p.phase = (p.phase + e) & 3;
        p
    }
}

impl fmt::Debug for PauliOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for PauliOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = match self.hermitian_exponent() {
            0 => "+",
            1 => "+i",
            2 => "-",
            _ => "-i",
        };
        write!(f, "{sign}{}", self.to_label())
    }
}

impl FromStr for PauliOp {
    type Err = Error;

    /// Parses labels such as `XIZY`, `-XZ`, `+iYY`; qubit 0 first.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (exp, body) = if let Some(r) = s.strip_prefix("+i") {
            (1, r)
        } else if let Some(r) = s.strip_prefix("-i") {
            (3, r)
        } else if let Some(r) = s.strip_prefix('-') {
            (2, r)
        } else if let Some(r) = s.strip_prefix('+') {
            (0, r)
        } else {
            (0, s)
        };
        let n = body.chars().count();
        let mut op = PauliOp::identity(n);
        for (q, c) in body.chars().enumerate() {
            let p = match c {
                'I' | '_' => Pauli1::I,
                'X' => Pauli1::X,
                'Y' => Pauli1::Y,
                'Z' => Pauli1::Z,
                other => return Err(Error::InvalidParameter(format!("bad Pauli symbol {other:?} in {s:?}"))),
            };
            op.set(q, p);
        }
        op.phase = (op.phase + exp) & 3;
        Ok(op)
    }
}
