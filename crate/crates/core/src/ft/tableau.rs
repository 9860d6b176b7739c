//! Stabilizer tableau simulation with destabilizers (Aaronson–Gottesman).

use rand::Rng;

use crate::bits::BitVector;
use crate::error::{check_dim, Error, Result};
use crate::pauli::PauliOp;

/// Rows `0..n` are destabilizers, `n..2n` stabilizers, row `2n` is scratch.
/// A row `(x, z, r)` is `(-1)^r` times the product of single-qubit Paulis
/// with `Y` where both bits are set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tableau {
    n: usize,
    words: usize,
    xs: Vec<u64>,
    zs: Vec<u64>,
    rs: Vec<bool>,
}

#[inline]
fn bit(w: &[u64], q: usize) -> bool {
    w[q / 64] >> (q % 64) & 1 == 1
}

impl Tableau {
    /// `|0...0⟩` on `n` qubits.
    pub fn new(n: usize) -> Self {
        let words = n.div_ceil(64).max(1);
        let rows = 2 * n + 1;
        let mut t = Self {
            n,
            words,
            xs: vec![0; rows * words],
            zs: vec![0; rows * words],
            rs: vec![false; rows],
        };
        for q in 0..n {
            t.xs[q * words + q / 64] |= 1 << (q % 64);
            t.zs[(n + q) * words + q / 64] |= 1 << (q % 64);
        }
        t
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn row_x(&self, r: usize) -> &[u64] {
        &self.xs[r * self.words..(r + 1) * self.words]
    }

    #[inline]
    fn row_z(&self, r: usize) -> &[u64] {
        &self.zs[r * self.words..(r + 1) * self.words]
    }

    #[inline]
    fn x(&self, r: usize, q: usize) -> bool {
        bit(self.row_x(r), q)
    }

    #[inline]
    fn z(&self, r: usize, q: usize) -> bool {
        bit(self.row_z(r), q)
    }

    #[inline]
    fn flip_x(&mut self, r: usize, q: usize) {
        self.xs[r * self.words + q / 64] ^= 1 << (q % 64);
    }

    #[inline]
    fn flip_z(&mut self, r: usize, q: usize) {
        self.zs[r * self.words + q / 64] ^= 1 << (q % 64);
    }

    fn rows(&self) -> usize {
        2 * self.n
    }

    pub fn h(&mut self, q: usize) {
        for r in 0..self.rows() {
            let (x, z) = (self.x(r, q), self.z(r, q));
            if x && z {
                self.rs[r] ^= true;
            }
            if x != z {
                self.flip_x(r, q);
                self.flip_z(r, q);
            }
        }
    }

    pub fn s(&mut self, q: usize) {
        for r in 0..self.rows() {
            let (x, z) = (self.x(r, q), self.z(r, q));
            if x && z {
                self.rs[r] ^= true;
            }
            if x {
                self.flip_z(r, q);
            }
        }
    }

    pub fn cnot(&mut self, c: usize, t: usize) {
        for r in 0..self.rows() {
            let (xc, zc, xt, zt) = (self.x(r, c), self.z(r, c), self.x(r, t), self.z(r, t));
            if xc && zt && (xt == zc) {
                self.rs[r] ^= true;
            }
            if xc {
                self.flip_x(r, t);
            }
            if zt {
                self.flip_z(r, c);
            }
        }
    }

    pub fn cz(&mut self, a: usize, b: usize) {
        self.h(b);
        self.cnot(a, b);
        self.h(b);
    }

    pub fn x_gate(&mut self, q: usize) {
        for r in 0..self.rows() {
            if self.z(r, q) {
                self.rs[r] ^= true;
            }
        }
    }

    pub fn z_gate(&mut self, q: usize) {
        for r in 0..self.rows() {
            if self.x(r, q) {
                self.rs[r] ^= true;
            }
        }
    }

    /// Applies a Pauli operator on the listed qubits.
    pub fn apply_pauli(&mut self, qubits: &[usize], p: &PauliOp) {
        for (k, &q) in qubits.iter().enumerate() {
            if p.x_bits().get(k) {
                self.x_gate(q);
            }
            if p.z_bits().get(k) {
                self.z_gate(q);
            }
        }
    }

    /// Phase exponent (mod 4, in units of `i`) of the product of rows `h`
    /// and `i`, minus their signs.
    fn product_phase(&self, h: usize, i: usize) -> u32 {
        let (hx, hz, ix, iz) = (self.row_x(h), self.row_z(h), self.row_x(i), self.row_z(i));
        let mut plus = 0u32;
        let mut minus = 0u32;
        for w in 0..self.words {
            let (x1, z1, x2, z2) = (ix[w], iz[w], hx[w], hz[w]);
            let y1 = x1 & z1;
            let xo = x1 & !z1;
            let zo = !x1 & z1;
            let p = (y1 & z2 & !x2) | (xo & z2 & x2) | (zo & x2 & !z2);
            let m = (y1 & x2 & !z2) | (xo & z2 & !x2) | (zo & x2 & z2);
            plus += p.count_ones();
            minus += m.count_ones();
        }
        (plus + 4 * self.n as u32 - minus) % 4
    }

    /// Row `h` <- row `i` · row `h`.
    fn rowsum(&mut self, h: usize, i: usize) {
        let g = self.product_phase(h, i);
        let total = (2 * self.rs[h] as u32 + 2 * self.rs[i] as u32 + g) % 4;
        self.rs[h] = total == 2;
        let w = self.words;
        for k in 0..w {
            self.xs[h * w + k] ^= self.xs[i * w + k];
            self.zs[h * w + k] ^= self.zs[i * w + k];
        }
    }

    fn clear_row(&mut self, r: usize) {
        let w = self.words;
        self.xs[r * w..(r + 1) * w].iter_mut().for_each(|v| *v = 0);
        self.zs[r * w..(r + 1) * w].iter_mut().for_each(|v| *v = 0);
        self.rs[r] = false;
    }

    fn copy_row(&mut self, dst: usize, src: usize) {
        let w = self.words;
        for k in 0..w {
            self.xs[dst * w + k] = self.xs[src * w + k];
            self.zs[dst * w + k] = self.zs[src * w + k];
        }
        self.rs[dst] = self.rs[src];
    }

    /// Computational-basis measurement; returns `(outcome, was_random)`.
    pub fn measure_z(&mut self, q: usize, rng: &mut impl Rng) -> (bool, bool) {
        let n = self.n;
        if let Some(p) = (n..2 * n).find(|&r| self.x(r, q)) {
            for r in 0..2 * n {
                if r != p && self.x(r, q) {
                    self.rowsum(r, p);
                }
            }
            self.copy_row(p - n, p);
            self.clear_row(p);
            let outcome: bool = rng.gen();
            self.rs[p] = outcome;
            self.flip_z(p, q);
            (outcome, true)
        } else {
            let s = 2 * n;
            self.clear_row(s);
            for r in 0..n {
                if self.x(r, q) {
                    self.rowsum(s, r + n);
                }
            }
            (self.rs[s], false)
        }
    }

    pub fn measure_x(&mut self, q: usize, rng: &mut impl Rng) -> (bool, bool) {
        self.h(q);
        let out = self.measure_z(q, rng);
        self.h(q);
        out
    }

    pub fn prep_z(&mut self, q: usize, rng: &mut impl Rng) {
        if self.measure_z(q, rng).0 {
            self.x_gate(q);
        }
    }

    pub fn prep_x(&mut self, q: usize, rng: &mut impl Rng) {
        self.prep_z(q, rng);
        self.h(q);
    }

    /// Expectation of a Hermitian Pauli on the full register: `Some(true)`
    /// for +1, `Some(false)` for -1, `None` when the outcome is random.
    pub fn expectation(&mut self, p: &PauliOp) -> Option<bool> {
        assert_eq!(p.n(), self.n);
        let n = self.n;
        let (px, pz) = (p.x_bits().words(), p.z_bits().words());
        let anticommutes = |t: &Tableau, r: usize| {
            let (rx, rz) = (t.row_x(r), t.row_z(r));
            let mut acc = 0u32;
            for w in 0..t.words {
                acc += ((rx[w] & pz[w]) ^ (rz[w] & px[w])).count_ones();
            }
            acc % 2 == 1
        };
        if (n..2 * n).any(|r| anticommutes(self, r)) {
            return None;
        }
        let s = 2 * n;
        self.clear_row(s);
        for r in 0..n {
            if anticommutes(self, r) {
                self.rowsum(s, r + n);
            }
        }
        let w = self.words;
        debug_assert!(self.xs[s * w..(s + 1) * w] == px[..w] && self.zs[s * w..(s + 1) * w] == pz[..w]);
        let sign_minus = p.hermitian_exponent() == 2;
        Some(self.rs[s] == sign_minus)
    }

    fn row_pauli(&self, r: usize) -> PauliOp {
        let x = BitVector::from_indices(self.n, (0..self.n).filter(|&q| self.x(r, q)));
        let z = BitVector::from_indices(self.n, (0..self.n).filter(|&q| self.z(r, q)));
        let mut p = PauliOp::hermitian(x, z);
        if self.rs[r] {
            p.set_phase(p.phase() + 2);
        }
        p
    }

    fn set_row(&mut self, r: usize, p: &PauliOp) {
        self.clear_row(r);
        for q in p.x_bits().iter_ones() {
            self.flip_x(r, q);
        }
        for q in p.z_bits().iter_ones() {
            self.flip_z(r, q);
        }
        self.rs[r] = p.hermitian_exponent() == 2;
    }

    /// The state stabilized by `gens`, which must be `n` independent,
    /// commuting Hermitian Paulis on `n` qubits.
    pub fn from_stabilizers(gens: &[PauliOp]) -> Result<Self> {
        let n = gens.len();
        for g in gens {
            check_dim(n, g.n())?;
            if g.hermitian_exponent() % 2 == 1 {
                return Err(Error::InvalidParameter(format!("generator {g} is not Hermitian")));
            }
        }
        for (i, a) in gens.iter().enumerate() {
            if let Some(b) = gens[i + 1..].iter().find(|b| !a.commutes_unchecked(b)) {
                return Err(Error::InvalidParameter(format!("generators {a} and {b} anticommute")));
            }
        }
        // Row-reduce the check matrix [x|z] while tracking row operations;
        // destabilizer i then has (z|x) bits at the pivot columns given by
        // column i of the accumulated operation matrix.
        let mut rows: Vec<BitVector> = gens.iter().map(|g| g.x_bits().concat(g.z_bits())).collect();
        let mut ops: Vec<BitVector> = (0..n).map(|i| BitVector::from_indices(n, [i])).collect();
        let mut pivots = Vec::with_capacity(n);
        let mut r = 0;
        for col in 0..2 * n {
            let Some(p) = (r..n).find(|&i| rows[i].get(col)) else {
                continue;
            };
            rows.swap(r, p);
            ops.swap(r, p);
            for i in 0..n {
                if i != r && rows[i].get(col) {
                    let (a, b) = (rows[r].clone(), ops[r].clone());
                    rows[i].xor_assign(&a);
                    ops[i].xor_assign(&b);
                }
            }
            pivots.push(col);
            r += 1;
        }
        if r < n {
            return Err(Error::InvalidParameter(format!("generators have rank {r} < {n}")));
        }
        let mut destab: Vec<PauliOp> = (0..n)
            .map(|i| {
                let mut x = BitVector::zeros(n);
                let mut z = BitVector::zeros(n);
                for (k, &c) in pivots.iter().enumerate() {
                    if ops[k].get(i) {
                        // Column c of [x|z] pairs with the opposite part of d.
                        if c < n {
                            z.set(c, true);
                        } else {
                            x.set(c - n, true);
                        }
                    }
                }
                PauliOp::hermitian(x, z)
            })
            .collect();
        for i in 0..n {
            for j in i + 1..n {
                if !destab[i].commutes_unchecked(&destab[j]) {
                    destab[j] = destab[j].mul_unchecked(&gens[i]).to_hermitian();
                }
            }
        }
        let mut t = Tableau::new(n);
        for i in 0..n {
            t.set_row(i, &destab[i]);
            t.set_row(n + i, &gens[i]);
        }
        Ok(t)
    }

    /// Tensor product with `other` on the higher qubit indices.
    pub fn tensor(&self, other: &Tableau) -> Tableau {
        let (a, b) = (self.n, other.n);
        let n = a + b;
        let mut t = Tableau::new(n);
        let ia = PauliOp::identity(a);
        let ib = PauliOp::identity(b);
        for r in 0..a {
            t.set_row(r, &self.row_pauli(r).tensor(&ib));
            t.set_row(n + r, &self.row_pauli(a + r).tensor(&ib));
        }
        for r in 0..b {
            t.set_row(a + r, &ia.tensor(&other.row_pauli(r)));
            t.set_row(n + a + r, &ia.tensor(&other.row_pauli(b + r)));
        }
        t
    }

    /// Stabilizer generators as Pauli operators.
    pub fn stabilizers(&self) -> Vec<PauliOp> {
        (self.n..2 * self.n).map(|r| self.row_pauli(r)).collect()
    }
}
