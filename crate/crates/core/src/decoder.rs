//! Minimum-weight lookup decoding for CSS check sets.
//!
//! Each sector is decoded separately: the X-type checks locate Z errors and
//! the Z-type checks locate X errors. Redundant checks are dropped before the
//! table is built, so every bit pattern on the retained checks has an entry
//! and noisy syndromes always decode. Among equal-weight corrections the
//! numerically smallest bit pattern (qubit 0 least significant) wins.

use crate::bits::BitVector;
use crate::code::{CssCode, Syndrome};
use crate::error::{Error, Result};
use crate::gf2::BinMatrix;
use crate::pauli::PauliOp;

/// Largest number of independent checks per sector.
pub const LOOKUP_ROWS_CAP: usize = 24;

const EMPTY: u32 = u32::MAX;

#[derive(Clone, Debug)]
struct SectorTable {
    /// Indices (into the caller's check list) of the independent checks used.
    kept: Vec<usize>,
    checks: Vec<BitVector>,
    table: Vec<u32>,
    reps: Vec<BitVector>,
}

impl SectorTable {
    fn build(n: usize, h: &BinMatrix) -> Result<Self> {
        if n > 63 {
            return Err(Error::InvalidParameter(format!(
                "lookup decoding supports at most 63 qubits, got {n}"
            )));
        }
        let mut kept = Vec::new();
        let mut basis = BinMatrix::zeros(0, n);
        for (i, r) in h.rows().iter().enumerate() {
            let mut trial = basis.clone();
            trial.push_row(r.clone());
            if trial.rank() > basis.num_rows() {
                basis = trial;
                kept.push(i);
            }
        }
        let rows = kept.len();
        if rows > LOOKUP_ROWS_CAP {
            return Err(Error::TableTooLarge {
                rows,
                cap: LOOKUP_ROWS_CAP,
            });
        }
        let checks: Vec<u64> = kept.iter().map(|&i| h.row(i).to_u64()).collect();
        let size = 1usize << rows;
        let mut table = vec![EMPTY; size];
        let mut reps: Vec<BitVector> = Vec::new();
        let key = |e: u64| -> usize {
            checks
                .iter()
                .enumerate()
                .map(|(b, &c)| (((c & e).count_ones() & 1) as usize) << b)
                .sum()
        };
        table[0] = 0;
        reps.push(BitVector::zeros(n));
        let mut filled = 1usize;
        let mut w = 1;
        while filled < size {
            if w > n {
                return Err(Error::Internal("lookup table could not be filled".into()));
            }
            // Gosper's hack visits weight-w patterns in increasing numeric order.
            let mut e: u64 = (1u64 << w) - 1;
            let limit = 1u64 << n;
            while e < limit {
                let k = key(e);
                if table[k] == EMPTY {
                    table[k] = reps.len() as u32;
                    reps.push(BitVector::from_u64(n, e));
                    filled += 1;
                    if filled == size {
                        break;
                    }
                }
                let c = e & e.wrapping_neg();
                let r = e + c;
                e = (((r ^ e) >> 2) / c) | r;
            }
            w += 1;
        }
        Ok(Self {
            kept,
            checks: checks.iter().map(|&c| BitVector::from_u64(n, c)).collect(),
            table,
            reps,
        })
    }

    /// Table on every row of `h`, redundant ones included. Syndromes that
    /// some error produces get a minimum-weight error as usual; any other
    /// pattern gets the error minimising error weight plus the number of
    /// syndrome bits it leaves unexplained, ties going to the lighter error.
    fn build_full(n: usize, h: &BinMatrix) -> Result<Self> {
        let rows = h.num_rows();
        if rows > LOOKUP_ROWS_CAP {
            return Err(Error::TableTooLarge {
                rows,
                cap: LOOKUP_ROWS_CAP,
            });
        }
        let mut kept = SectorTable::build(n, h)?;
        let all: Vec<usize> = (0..rows).collect();
        let key_full = |e: &BitVector| -> usize { all.iter().map(|&r| (h.row(r).dot(e) as usize) << r).sum() };
        let mut table = vec![EMPTY; 1 << rows];
        for (i, rep) in kept.reps.iter().enumerate() {
            table[key_full(rep)] = i as u32;
        }
        let valid: Vec<(usize, u32)> = table
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != EMPTY)
            .map(|(k, &v)| (k, v))
            .collect();
        if valid.len().saturating_mul(table.len()) > 1 << 32 {
            return Err(Error::TableTooLarge {
                rows,
                cap: LOOKUP_ROWS_CAP,
            });
        }
        for k in 0..table.len() {
            if table[k] != EMPTY {
                continue;
            }
            let best = valid
                .iter()
                .map(|&(s, v)| {
                    let w = kept.reps[v as usize].count_ones();
                    ((s ^ k).count_ones() as usize + w, w, v)
                })
                .min_by_key(|&(cost, w, v)| (cost, w, kept.reps[v as usize].to_u64()))
                .expect("zero syndrome is valid");
            table[k] = best.2;
        }
        kept.kept = all;
        kept.checks = h.rows().to_vec();
        kept.table = table;
        Ok(kept)
    }

    fn lookup(&self, bits: &BitVector) -> &BitVector {
        let k: usize = self
            .kept
            .iter()
            .enumerate()
            .map(|(b, &i)| (bits.get(i) as usize) << b)
            .sum();
        &self.reps[self.table[k] as usize]
    }
}

#[derive(Clone, Debug)]
pub struct LookupDecoder {
    n: usize,
    /// Built on the Z-type checks; returns X corrections.
    x_errors: SectorTable,
    /// Built on the X-type checks; returns Z corrections.
    z_errors: SectorTable,
    mx: usize,
    mz: usize,
}

impl LookupDecoder {
    /// Decoder for a check set given as X-type rows `hx` and Z-type rows `hz`.
    pub fn from_checks(hx: &BinMatrix, hz: &BinMatrix) -> Result<Self> {
        let n = hx.num_cols();
        Ok(Self {
            n,
            x_errors: SectorTable::build(n, hz)?,
            z_errors: SectorTable::build(n, hx)?,
            mx: hx.num_rows(),
            mz: hz.num_rows(),
        })
    }

    pub fn for_code(code: &CssCode) -> Result<Self> {
        Self::from_checks(code.hx(), code.hz())
    }

    /// Decoder reading every check, including redundant ones, so that
    /// syndromes inconsistent with any data error are treated as carrying
    /// measurement errors instead of being read through a subset of checks.
    pub fn with_syndrome_errors(code: &CssCode) -> Result<Self> {
        let n = code.n();
        Ok(Self {
            n,
            x_errors: SectorTable::build_full(n, code.hz())?,
            z_errors: SectorTable::build_full(n, code.hx())?,
            mx: code.hx().num_rows(),
            mz: code.hz().num_rows(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of table entries in each sector.
    pub fn table_sizes(&self) -> (usize, usize) {
        (self.x_errors.table.len(), self.z_errors.table.len())
    }

    /// Correction for a syndrome split as (X-check bits, Z-check bits).
    pub fn decode_parts(&self, x_checks: &BitVector, z_checks: &BitVector) -> PauliOp {
        let z = self.z_errors.lookup(x_checks).clone();
        let x = self.x_errors.lookup(z_checks).clone();
        PauliOp::hermitian(x, z)
    }

    /// Correction for a full syndrome in generator order (X checks first).
    pub fn decode(&self, s: &Syndrome) -> Result<PauliOp> {
        if s.len() != self.mx + self.mz {
            return Err(Error::DimensionMismatch {
                expected: self.mx + self.mz,
                found: s.len(),
            });
        }
        let xs: Vec<usize> = (0..self.mx).collect();
        let zs: Vec<usize> = (self.mx..self.mx + self.mz).collect();
        Ok(self.decode_parts(&s.bits.gather(&xs), &s.bits.gather(&zs)))
    }

    /// X correction for Z-check bits only.
    pub fn decode_x_errors(&self, z_checks: &BitVector) -> &BitVector {
        self.x_errors.lookup(z_checks)
    }

    /// Z correction for X-check bits only.
    pub fn decode_z_errors(&self, x_checks: &BitVector) -> &BitVector {
        self.z_errors.lookup(x_checks)
    }

    /// Independent Z-type checks retained for X-error decoding.
    pub fn x_error_checks(&self) -> &[BitVector] {
        &self.x_errors.checks
    }
}

/// Minimum-weight lookup decoder for a CSS code.
pub fn lookup_minweight_decoder(code: &CssCode) -> Result<LookupDecoder> {
    LookupDecoder::for_code(code)
}
