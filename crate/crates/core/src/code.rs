//! CSS stabilizer codes, syndromes, logical classes and reduced weights.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bits::BitVector;
use crate::error::{check_dim, Error, Result};
use crate::gf2::BinMatrix;
use crate::pauli::{Pauli1, PauliOp};

/// Largest stabilizer rank per sector that `reduced_weight` will enumerate.
pub const REDUCED_WEIGHT_RANK_CAP: usize = 20;

/// Which half of a CSS code a generator or error component belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sector {
    /// X-type generators; they detect Z errors.
    X,
    /// Z-type generators; they detect X errors.
    Z,
}

/// Planar positions used to schedule syndrome extraction. Coordinates are
/// in a doubled grid where data qubits and generators sit at distinct points.
#[derive(Clone, Debug, PartialEq)]
pub struct Layout {
    pub qubits: Vec<(i64, i64)>,
    pub x_generators: Vec<(i64, i64)>,
    pub z_generators: Vec<(i64, i64)>,
    /// Periodic identification of coordinates, for codes on a torus.
    pub period: Option<(i64, i64)>,
}

impl Layout {
    /// Offset from `a` to `b`, wrapped into the fundamental domain when periodic.
    pub fn offset(&self, a: (i64, i64), b: (i64, i64)) -> (i64, i64) {
        let mut dr = b.0 - a.0;
        let mut dc = b.1 - a.1;
        if let Some((pr, pc)) = self.period {
            dr = wrap(dr, pr);
            dc = wrap(dc, pc);
        }
        (dr, dc)
    }
}

fn wrap(d: i64, p: i64) -> i64 {
    let m = d.rem_euclid(p);
    if m > p / 2 {
        m - p
    } else {
        m
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Syndrome {
    pub bits: BitVector,
}

impl Syndrome {
    pub fn is_zero(&self) -> bool {
        self.bits.is_zero()
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn weight(&self) -> usize {
        self.bits.count_ones()
    }
}

impl fmt::Debug for Syndrome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Syndrome({})", self.bits)
    }
}

/// Coset label of an error modulo the stabilizer group.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LogicalClass {
    Detectable,
    Logical(Vec<Pauli1>),
}

impl LogicalClass {
    pub fn is_trivial(&self) -> bool {
        matches!(self, LogicalClass::Logical(v) if v.iter().all(|p| *p == Pauli1::I))
    }

    pub fn label(&self) -> String {
        match self {
            LogicalClass::Detectable => "detectable".to_string(),
            LogicalClass::Logical(v) => v.iter().map(|p| p.symbol()).collect(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct CssCode {
    name: String,
    n: usize,
    k: usize,
    hx: BinMatrix,
    hz: BinMatrix,
    logical_x: Vec<PauliOp>,
    logical_z: Vec<PauliOp>,
    layout: Option<Layout>,
}

impl CssCode {
    /// Validates and builds a code. `hx` rows are X-type generators, `hz`
    /// rows Z-type; syndrome bits follow `hx` rows then `hz` rows.
    pub fn new(
        name: impl Into<String>,
        hx: BinMatrix,
        hz: BinMatrix,
        logical_x: Vec<PauliOp>,
        logical_z: Vec<PauliOp>,
    ) -> Result<Self> {
        let n = hx.num_cols();
        check_dim(n, hz.num_cols())?;
        let k = logical_x.len();
        if k == 0 {
            return Err(Error::InvalidCode("code encodes no logical qubits".into()));
        }
        if logical_z.len() != k {
            return Err(Error::InvalidCode(format!(
                "{} X logicals but {} Z logicals",
                k,
                logical_z.len()
            )));
        }
        for l in logical_x.iter().chain(&logical_z) {
            check_dim(n, l.n())?;
        }
        for (i, a) in hx.rows().iter().enumerate() {
            for (j, b) in hz.rows().iter().enumerate() {
                if a.dot(b) {
                    return Err(Error::InvalidCode(format!(
                        "X generator {i} anticommutes with Z generator {j}"
                    )));
                }
            }
        }
        let rank = hx.rank() + hz.rank();
        if rank + k != n {
            return Err(Error::InvalidCode(format!("stabilizer rank {rank} + k {k} != n {n}")));
        }
        let code = Self {
            name: name.into(),
            n,
            k,
            hx,
            hz,
            logical_x,
            logical_z,
            layout: None,
        };
        let gens = code.generators();
        for i in 0..k {
            for g in &gens {
                if !code.logical_x[i].commutes_unchecked(g) || !code.logical_z[i].commutes_unchecked(g) {
                    return Err(Error::InvalidCode(format!(
                        "logical pair {i} does not commute with the stabilizer"
                    )));
                }
            }
            for j in 0..k {
                let xz = code.logical_x[i].commutes_unchecked(&code.logical_z[j]);
                if xz == (i == j) {
                    return Err(Error::InvalidCode(format!("logical X{i} / Z{j} commutation is wrong")));
                }
                if !code.logical_x[i].commutes_unchecked(&code.logical_x[j])
                    || !code.logical_z[i].commutes_unchecked(&code.logical_z[j])
                {
                    return Err(Error::InvalidCode(format!(
                        "logicals {i} and {j} of the same type anticommute"
                    )));
                }
            }
        }
        Ok(code)
    }

    pub fn with_layout(mut self, layout: Layout) -> Result<Self> {
        check_dim(self.n, layout.qubits.len())?;
        check_dim(self.hx.num_rows(), layout.x_generators.len())?;
        check_dim(self.hz.num_rows(), layout.z_generators.len())?;
        self.layout = Some(layout);
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn hx(&self) -> &BinMatrix {
        &self.hx
    }

    pub fn hz(&self) -> &BinMatrix {
        &self.hz
    }

    pub fn logical_x(&self) -> &[PauliOp] {
        &self.logical_x
    }

    pub fn logical_z(&self) -> &[PauliOp] {
        &self.logical_z
    }

    pub fn layout(&self) -> Option<&Layout> {
        self.layout.as_ref()
    }

    pub fn num_x_generators(&self) -> usize {
        self.hx.num_rows()
    }

    pub fn num_z_generators(&self) -> usize {
        self.hz.num_rows()
    }

    pub fn num_generators(&self) -> usize {
        self.hx.num_rows() + self.hz.num_rows()
    }

    /// Sector and row of the generator at position `i` of the syndrome.
    pub fn generator_kind(&self, i: usize) -> (Sector, usize) {
        let mx = self.hx.num_rows();
        if i < mx {
            (Sector::X, i)
        } else {
            (Sector::Z, i - mx)
        }
    }

    pub fn generator(&self, i: usize) -> PauliOp {
        match self.generator_kind(i) {
            (Sector::X, r) => PauliOp::x_type(self.hx.row(r).clone()),
            (Sector::Z, r) => PauliOp::z_type(self.hz.row(r).clone()),
        }
    }

    /// Generators in syndrome order.
    pub fn generators(&self) -> Vec<PauliOp> {
        (0..self.num_generators()).map(|i| self.generator(i)).collect()
    }

    pub fn generator_support(&self, i: usize) -> Vec<usize> {
        match self.generator_kind(i) {
            (Sector::X, r) => self.hx.row(r).iter_ones().collect(),
            (Sector::Z, r) => self.hz.row(r).iter_ones().collect(),
        }
    }

    pub fn max_generator_weight(&self) -> usize {
        (0..self.num_generators())
            .map(|i| self.generator_support(i).len())
            .max()
            .unwrap_or(0)
    }

    pub fn syndrome(&self, e: &PauliOp) -> Result<Syndrome> {
        check_dim(self.n, e.n())?;
        Ok(self.syndrome_of_bits(e.x_bits(), e.z_bits()))
    }

    /// Syndrome from raw X and Z error parts.
    pub fn syndrome_of_bits(&self, ex: &BitVector, ez: &BitVector) -> Syndrome {
        let mx = self.hx.num_rows();
        let mut bits = BitVector::zeros(self.num_generators());
        for (i, row) in self.hx.rows().iter().enumerate() {
            if row.dot(ez) {
                bits.set(i, true);
            }
        }
        for (i, row) in self.hz.rows().iter().enumerate() {
            if row.dot(ex) {
                bits.set(mx + i, true);
            }
        }
        Syndrome { bits }
    }

    /// Splits a full syndrome into its X-generator and Z-generator parts.
    pub fn split_syndrome(&self, s: &Syndrome) -> (BitVector, BitVector) {
        let mx = self.hx.num_rows();
        let xs: Vec<usize> = (0..mx).collect();
        let zs: Vec<usize> = (mx..self.num_generators()).collect();
        (s.bits.gather(&xs), s.bits.gather(&zs))
    }

    pub fn join_syndrome(&self, x_part: &BitVector, z_part: &BitVector) -> Syndrome {
        Syndrome {
            bits: x_part.concat(z_part),
        }
    }

    pub fn logical_class(&self, e: &PauliOp) -> Result<LogicalClass> {
        if !self.syndrome(e)?.is_zero() {
            return Ok(LogicalClass::Detectable);
        }
        Ok(LogicalClass::Logical(self.logical_action(e)))
    }

    /// Logical Pauli read off from commutation with the stored logicals,
    /// ignoring the syndrome.
    pub fn logical_action(&self, e: &PauliOp) -> Vec<Pauli1> {
        (0..self.k)
            .map(|i| {
                let has_x = !e.commutes_unchecked(&self.logical_z[i]);
                let has_z = !e.commutes_unchecked(&self.logical_x[i]);
                Pauli1::from_bits(has_x, has_z)
            })
            .collect()
    }

    /// Is `e` an element of the stabilizer group, up to phase?
    pub fn is_stabilizer(&self, e: &PauliOp) -> bool {
        e.n() == self.n && self.hx.in_row_space(e.x_bits()) && self.hz.in_row_space(e.z_bits())
    }

    /// Minimum weight over the stabilizer coset, taken per sector and combined by max.
    pub fn reduced_weight(&self, e: &PauliOp) -> Result<usize> {
        check_dim(self.n, e.n())?;
        let wx = min_coset_weight(&self.hx, e.x_bits())?;
        let wz = min_coset_weight(&self.hz, e.z_bits())?;
        Ok(wx.max(wz))
    }

    /// Serialises in the plain-text code file format.
    pub fn to_file_string(&self) -> String {
        let mut out = String::new();
        let mut section = |name: &str, rows: Vec<&BitVector>| {
            out.push_str(&format!("[{name}]\n"));
            for r in rows {
                out.push_str(&r.to_bit_string());
                out.push('\n');
            }
        };
        section("HX", self.hx.rows().iter().collect());
        section("HZ", self.hz.rows().iter().collect());
        section("LX", self.logical_x.iter().map(|p| p.x_bits()).collect());
        section("LZ", self.logical_z.iter().map(|p| p.z_bits()).collect());
        out
    }

    /// Parses the code file format: sections `[HX]`, `[HZ]`, `[LX]`, `[LZ]`
    /// holding one 0/1 row per line. Blank lines and `#` comments are ignored.
    pub fn from_file_str(name: &str, text: &str) -> Result<Self> {
        let mut sections: [Vec<BitVector>; 4] = Default::default();
        let mut seen = [false; 4];
        let mut current: Option<usize> = None;
        let mut width: Option<usize> = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| Error::Parse { line: lineno + 1, msg };
            if line.starts_with('[') {
                let idx = match line {
                    "[HX]" => 0,
                    "[HZ]" => 1,
                    "[LX]" => 2,
                    "[LZ]" => 3,
                    other => return Err(err(format!("unknown section {other}"))),
                };
                if seen[idx] {
                    return Err(err(format!("duplicate section {line}")));
                }
                seen[idx] = true;
                current = Some(idx);
                continue;
            }
            let Some(idx) = current else {
                return Err(err("row outside of a section".into()));
            };
            let row =
                BitVector::parse_bit_string(line).ok_or_else(|| err(format!("row {line:?} is not a 0/1 string")))?;
            match width {
                None => width = Some(row.len()),
                Some(w) if w != row.len() => return Err(err(format!("row has {} columns, expected {w}", row.len()))),
                _ => {}
            }
            sections[idx].push(row);
        }
        for (i, name) in ["[HX]", "[HZ]", "[LX]", "[LZ]"].iter().enumerate() {
            if !seen[i] {
                return Err(Error::Parse {
                    line: 0,
                    msg: format!("missing section {name}"),
                });
            }
        }
        let n = width.ok_or(Error::Parse {
            line: 0,
            msg: "no rows".into(),
        })?;
        let [hx, hz, lx, lz] = sections;
        Self::new(
            name,
            BinMatrix::from_rows(n, hx),
            BinMatrix::from_rows(n, hz),
            lx.into_iter().map(PauliOp::x_type).collect(),
            lz.into_iter().map(PauliOp::z_type).collect(),
        )
    }
}

/// Minimum Hamming weight of `v + rowspace(h)` by exhaustive Gray-code walk.
pub fn min_coset_weight(h: &BinMatrix, v: &BitVector) -> Result<usize> {
    let basis = h.row_basis();
    if basis.len() > REDUCED_WEIGHT_RANK_CAP {
        return Err(Error::GroupTooLarge {
            rank: basis.len(),
            cap: REDUCED_WEIGHT_RANK_CAP,
        });
    }
    let mut cur = v.clone();
    let mut best = cur.count_ones();
    let total: u64 = 1 << basis.len();
    for step in 1..total {
        let flip = step.trailing_zeros() as usize;
        cur.xor_assign(&basis[flip]);
        best = best.min(cur.count_ones());
        if best == 0 {
            break;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes;

    #[test]
    fn bit_flip_syndromes() {
        let code = codes::bit_flip();
        let s = code.syndrome(&"XII".parse().unwrap()).unwrap();
        assert_eq!(s.bits.to_bit_string(), "10");
        assert!(code.syndrome(&PauliOp::identity(3)).unwrap().is_zero());
        assert_eq!(code.reduced_weight(&"XII".parse().unwrap()).unwrap(), 1);
    }

    #[test]
    fn logical_labels() {
        let code = codes::bit_flip();
        assert_eq!(code.logical_class(&PauliOp::identity(3)).unwrap().label(), "I");
        assert_eq!(code.logical_class(&"XXX".parse().unwrap()).unwrap().label(), "X");
        assert_eq!(code.logical_class(&"ZII".parse().unwrap()).unwrap().label(), "Z");
        assert_eq!(
            code.logical_class(&"XII".parse().unwrap()).unwrap(),
            LogicalClass::Detectable
        );
    }

    #[test]
    fn rejects_broken_codes() {
        let hx = BinMatrix::from_rows(2, vec![BitVector::parse_bit_string("10").unwrap()]);
        let hz = BinMatrix::from_rows(2, vec![BitVector::parse_bit_string("10").unwrap()]);
        let r = CssCode::new("bad", hx, hz, vec![], vec![]);
        assert!(r.is_err());
        let text = "[HX]\n[HZ]\n11\n[LX]\n11\n";
        assert!(matches!(CssCode::from_file_str("x", text), Err(Error::Parse { .. })));
    }

    #[test]
    fn file_round_trip() {
        let code = codes::bit_flip();
        let back = CssCode::from_file_str("again", &code.to_file_string()).unwrap();
        assert_eq!(back.hx(), code.hx());
        assert_eq!(back.hz(), code.hz());
        assert_eq!(back.logical_x(), code.logical_x());
    }

    #[test]
    fn layout_offsets_wrap() {
        let l = Layout {
            qubits: vec![],
            x_generators: vec![],
            z_generators: vec![],
            period: Some((6, 6)),
        };
        assert_eq!(l.offset((0, 0), (5, 1)), (-1, 1));
        assert_eq!(l.offset((5, 5), (0, 0)), (1, 1));
    }
}
