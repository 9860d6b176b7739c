//! Dense linear algebra over GF(2) on row-packed matrices.

use crate::bits::BitVector;

/// Row-major binary matrix.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BinMatrix {
    cols: usize,
    rows: Vec<BitVector>,
}

/// Reduced row echelon form together with the pivot columns and the
/// transformation recording which original rows were combined.
#[derive(Clone, Debug)]
pub struct Echelon {
    pub reduced: BinMatrix,
    pub pivots: Vec<usize>,
    /// Row `i` of `combination` marks the original rows summed into reduced row `i`.
    pub combination: Vec<BitVector>,
}

impl BinMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            cols,
            rows: (0..rows).map(|_| BitVector::zeros(cols)).collect(),
        }
    }

    pub fn from_rows(cols: usize, rows: Vec<BitVector>) -> Self {
        assert!(rows.iter().all(|r| r.len() == cols), "row length mismatch");
        Self { cols, rows }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.rows[i].set(i, true);
        }
        m
    }

    #[inline]
    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    #[inline]
    pub fn num_cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, i: usize) -> &BitVector {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[BitVector] {
        &self.rows
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.rows[r].get(c)
    }

    pub fn set(&mut self, r: usize, c: usize, v: bool) {
        self.rows[r].set(c, v);
    }

    pub fn push_row(&mut self, row: BitVector) {
        assert_eq!(row.len(), self.cols);
        self.rows.push(row);
    }

    pub fn transpose(&self) -> BinMatrix {
        let mut t = BinMatrix::zeros(self.cols, self.rows.len());
        for (r, row) in self.rows.iter().enumerate() {
            for c in row.iter_ones() {
                t.rows[c].set(r, true);
            }
        }
        t
    }

    /// Matrix-vector product `M v`.
    pub fn mul_vec(&self, v: &BitVector) -> BitVector {
        let mut out = BitVector::zeros(self.rows.len());
        for (i, row) in self.rows.iter().enumerate() {
            if row.dot(v) {
                out.set(i, true);
            }
        }
        out
    }

    /// Product `self * other`.
    pub fn mul(&self, other: &BinMatrix) -> BinMatrix {
        assert_eq!(self.cols, other.num_rows());
        let mut out = BinMatrix::zeros(self.rows.len(), other.cols);
        for (i, row) in self.rows.iter().enumerate() {
            for k in row.iter_ones() {
                out.rows[i].xor_assign(&other.rows[k]);
            }
        }
        out
    }

    pub fn echelon(&self) -> Echelon {
        let m = self.rows.len();
        let mut rows = self.rows.clone();
        let mut comb: Vec<BitVector> = (0..m).map(|i| BitVector::from_indices(m, [i])).collect();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == m {
                break;
            }
            let Some(p) = (r..m).find(|&i| rows[i].get(c)) else {
                continue;
            };
            rows.swap(r, p);
            comb.swap(r, p);
            for i in 0..m {
                if i != r && rows[i].get(c) {
                    let (a, b) = pick_two(&mut rows, i, r);
                    a.xor_assign(b);
                    let (a, b) = pick_two(&mut comb, i, r);
                    a.xor_assign(b);
                }
            }
            pivots.push(c);
            r += 1;
        }
        Echelon {
            reduced: BinMatrix { cols: self.cols, rows },
            pivots,
            combination: comb,
        }
    }

    pub fn rank(&self) -> usize {
        self.echelon().pivots.len()
    }

    /// Basis of the right null space `{v : M v = 0}`.
    pub fn kernel(&self) -> Vec<BitVector> {
        let ech = self.echelon();
        let pivot_set: Vec<bool> = {
            let mut s = vec![false; self.cols];
            for &p in &ech.pivots {
                s[p] = true;
            }
            s
        };
        let mut basis = Vec::new();
        for free in (0..self.cols).filter(|&c| !pivot_set[c]) {
            let mut v = BitVector::zeros(self.cols);
            v.set(free, true);
            for (i, &p) in ech.pivots.iter().enumerate() {
                if ech.reduced.rows[i].get(free) {
                    v.set(p, true);
                }
            }
            basis.push(v);
        }
        basis
    }

    /// Independent rows spanning the row space (nonzero rows of the echelon form).
    pub fn row_basis(&self) -> Vec<BitVector> {
        let ech = self.echelon();
        ech.reduced.rows.into_iter().take(ech.pivots.len()).collect()
    }

    /// Solves `x^T M = v` for a row combination `x`, if one exists.
    pub fn solve_row_combination(&self, v: &BitVector) -> Option<BitVector> {
        let ech = self.echelon();
        let mut rem = v.clone();
        let mut x = BitVector::zeros(self.rows.len());
        for (i, &p) in ech.pivots.iter().enumerate() {
            if rem.get(p) {
                rem.xor_assign(&ech.reduced.rows[i]);
                x.xor_assign(&ech.combination[i]);
            }
        }
        rem.is_zero().then_some(x)
    }

    pub fn in_row_space(&self, v: &BitVector) -> bool {
        self.solve_row_combination(v).is_some()
    }
}

fn pick_two(v: &mut [BitVector], a: usize, b: usize) -> (&mut BitVector, &BitVector) {
    assert_ne!(a, b);
    if a < b {
        let (lo, hi) = v.split_at_mut(b);
        (&mut lo[a], &hi[0])
    } else {
        let (lo, hi) = v.split_at_mut(a);
        (&mut hi[0], &lo[b])
    }
}

/// Reduces `v` against an echelon basis produced by [`BinMatrix::echelon`].
pub fn reduce_against(ech: &Echelon, v: &BitVector) -> BitVector {
    let mut rem = v.clone();
    for (i, &p) in ech.pivots.iter().enumerate() {
        if rem.get(p) {
            rem.xor_assign(ech.reduced.row(i));
        }
    }
    rem
}
