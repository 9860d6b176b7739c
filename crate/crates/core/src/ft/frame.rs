//! Pauli frame: the deviation of a faulty run from the ideal one.

use crate::bits::BitVector;
use crate::pauli::PauliOp;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliFrame {
    pub x: BitVector,
    pub z: BitVector,
}

impl PauliFrame {
    pub fn new(n: usize) -> Self {
        Self {
            x: BitVector::zeros(n),
            z: BitVector::zeros(n),
        }
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn apply(&mut self, qubits: &[usize], p: &PauliOp) {
        for (k, &q) in qubits.iter().enumerate() {
            if p.x_bits().get(k) {
                self.x.flip(q);
            }
            if p.z_bits().get(k) {
                self.z.flip(q);
            }
        }
    }

    #[inline]
    pub fn h(&mut self, q: usize) {
        let (x, z) = (self.x.get(q), self.z.get(q));
        self.x.set(q, z);
        self.z.set(q, x);
    }

    #[inline]
    pub fn s(&mut self, q: usize) {
        if self.x.get(q) {
            self.z.flip(q);
        }
    }

    #[inline]
    pub fn cnot(&mut self, c: usize, t: usize) {
        if self.x.get(c) {
            self.x.flip(t);
        }
        if self.z.get(t) {
            self.z.flip(c);
        }
    }

    #[inline]
    pub fn cz(&mut self, a: usize, b: usize) {
        if self.x.get(a) {
            self.z.flip(b);
        }
        if self.x.get(b) {
            self.z.flip(a);
        }
    }

    #[inline]
    pub fn reset(&mut self, q: usize) {
        self.x.set(q, false);
        self.z.set(q, false);
    }

    /// Restriction to the listed qubits as a Hermitian Pauli.
    pub fn restrict(&self, qubits: &[usize]) -> PauliOp {
        PauliOp::hermitian(self.x.gather(qubits), self.z.gather(qubits))
    }

    /// Places a Pauli on the listed qubits, replacing what was there.
    pub fn set_block(&mut self, qubits: &[usize], p: &PauliOp) {
        for (k, &q) in qubits.iter().enumerate() {
            self.x.set(q, p.x_bits().get(k));
            self.z.set(q, p.z_bits().get(k));
        }
    }
}
