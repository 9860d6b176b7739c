//! Dense superoperator algebra at tiny dimension.
//!
//! Superoperators are stored as transfer matrices acting on row-major
//! vectorised operators, `vec(ρ)[a * d + b] = ρ[a, b]`. The Choi matrix uses
//! the unnormalised convention `J(Φ) = Σ_ij |i⟩⟨j| ⊗ Φ(|i⟩⟨j|)`.
//!
//! A derived code pairs a stabilizer code with a list of correctable errors.
//! Its unitary `U` maps `C^(2^k) ⊗ F` onto `L = span{E V|ψ⟩}`, with column
//! `ψ * f + s` equal to `E_s V|ψ⟩`. Most checks here work in coordinates of
//! `L`, i.e. on the `2^k * f` dimensional space `M ⊗ F`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bits::BitVector;
use crate::code::CssCode;
use crate::codes;
use crate::error::{check_dim, Error, Result};
use crate::pauli::PauliOp;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Largest Hilbert-space dimension for dense vectors and isometries.
pub const DENSE_CAP: usize = 1 << 12;
/// Largest `in_dim * out_dim` for a dense superoperator.
pub const SUPEROP_CAP: usize = 1 << 10;

pub const EXACT_TOL: f64 = 1e-10;
pub const CHANNEL_TOL: f64 = 1e-9;

const ONE: Complex64 = Complex64::new(1.0, 0.0);

fn i_pow(k: u8) -> Complex64 {
    match k & 3 {
        0 => ONE,
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

fn check_cap(dim: usize, cap: usize) -> Result<()> {
    if dim > cap {
        Err(Error::DenseCapExceeded { dim, cap })
    } else {
        Ok(())
    }
}

/// Sum of singular values.
pub fn trace_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.iter().sum()
}

/// `tr_B` of an operator on `A ⊗ B`.
pub fn partial_trace_second(m: &CMatrix, da: usize, db: usize) -> CMatrix {
    CMatrix::from_fn(da, da, |a, b| (0..db).map(|s| m[(a * db + s, b * db + s)]).sum())
}

/// `tr_A` of an operator on `A ⊗ B`.
pub fn partial_trace_first(m: &CMatrix, da: usize, db: usize) -> CMatrix {
    CMatrix::from_fn(db, db, |s, t| (0..da).map(|a| m[(a * db + s, a * db + t)]).sum())
}

fn basis_op(d: usize, i: usize, j: usize) -> CMatrix {
    let mut m = CMatrix::zeros(d, d);
    m[(i, j)] = ONE;
    m
}

fn ket_bra(v: &CVector) -> CMatrix {
    v * v.adjoint()
}

#[derive(Clone, Debug, PartialEq)]
pub struct DenseOperator {
    m: CMatrix,
}

impl DenseOperator {
    pub fn new(m: CMatrix) -> Self {
        Self { m }
    }

    pub fn identity(d: usize) -> Self {
        Self::new(CMatrix::identity(d, d))
    }

    /// Dense matrix of an `n`-qubit Pauli; qubit `j` is bit `j` of the index.
    pub fn pauli(p: &PauliOp) -> Result<Self> {
        let n = p.n();
        let d = 1usize << n;
        check_cap(d, DENSE_CAP)?;
        let x = p.x_bits().to_u64() as usize;
        let z = p.z_bits().to_u64() as usize;
        let c = i_pow(p.phase());
        let mut m = CMatrix::zeros(d, d);
        for b in 0..d {
            let sign = if (z & b).count_ones() % 2 == 1 { -c } else { c };
            m[(b ^ x, b)] = sign;
        }
        Ok(Self::new(m))
    }

    pub fn rows(&self) -> usize {
        self.m.nrows()
    }

    pub fn cols(&self) -> usize {
        self.m.ncols()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn adjoint(&self) -> Self {
        Self::new(self.m.adjoint())
    }

    pub fn mul(&self, other: &DenseOperator) -> Result<Self> {
        check_dim(self.cols(), other.rows())?;
        Ok(Self::new(&self.m * &other.m))
    }

    pub fn kron(&self, other: &DenseOperator) -> Self {
        Self::new(self.m.kronecker(&other.m))
    }

    /// Frobenius norm of `V†V - I`.
    pub fn isometry_residual(&self) -> f64 {
        (self.m.adjoint() * &self.m - CMatrix::identity(self.cols(), self.cols())).norm()
    }

    pub fn is_isometry(&self, tol: f64) -> bool {
        self.isometry_residual() <= tol
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.rows() == self.cols() && self.is_isometry(tol)
    }
}

/// Linear map on operators, `L(C^in) -> L(C^out)`.
#[derive(Clone, Debug)]
pub struct Superoperator {
    in_dim: usize,
    out_dim: usize,
    kraus: Option<Vec<CMatrix>>,
    transfer: CMatrix,
}

impl Superoperator {
    fn empty(in_dim: usize, out_dim: usize) -> Result<Self> {
        check_cap(in_dim * out_dim, SUPEROP_CAP)?;
        Ok(Self {
            in_dim,
            out_dim,
            kraus: None,
            transfer: CMatrix::zeros(out_dim * out_dim, in_dim * in_dim),
        })
    }

    /// Builds the map from its action on the matrix units `|i⟩⟨j|`.
    pub fn from_fn(in_dim: usize, out_dim: usize, f: impl Fn(&CMatrix) -> CMatrix) -> Result<Self> {
        let mut s = Self::empty(in_dim, out_dim)?;
        for i in 0..in_dim {
            for j in 0..in_dim {
                let out = f(&basis_op(in_dim, i, j));
                check_dim(out_dim, out.nrows())?;
                check_dim(out_dim, out.ncols())?;
                let col = i * in_dim + j;
                for a in 0..out_dim {
                    for b in 0..out_dim {
                        s.transfer[(a * out_dim + b, col)] = out[(a, b)];
                    }
                }
            }
        }
        Ok(s)
    }

    pub fn from_kraus(in_dim: usize, out_dim: usize, kraus: Vec<CMatrix>) -> Result<Self> {
        let mut s = Self::empty(in_dim, out_dim)?;
        for k in &kraus {
            check_dim(out_dim, k.nrows())?;
            check_dim(in_dim, k.ncols())?;
            s.transfer += k.kronecker(&k.conjugate());
        }
        s.kraus = Some(kraus);
        Ok(s)
    }

    pub fn from_choi(in_dim: usize, out_dim: usize, choi: &CMatrix) -> Result<Self> {
        check_dim(in_dim * out_dim, choi.nrows())?;
        let mut s = Self::empty(in_dim, out_dim)?;
        for i in 0..in_dim {
            for j in 0..in_dim {
                for a in 0..out_dim {
                    for b in 0..out_dim {
                        s.transfer[(a * out_dim + b, i * in_dim + j)] = choi[(i * out_dim + a, j * out_dim + b)];
                    }
                }
            }
        }
        Ok(s)
    }

    pub fn identity(d: usize) -> Result<Self> {
        Self::from_kraus(d, d, vec![CMatrix::identity(d, d)])
    }

    /// Conjugation `ρ ↦ AρA†`.
    pub fn conjugation(a: &DenseOperator) -> Result<Self> {
        Self::from_kraus(a.cols(), a.rows(), vec![a.matrix().clone()])
    }

    pub fn pauli(p: &PauliOp) -> Result<Self> {
        Self::conjugation(&DenseOperator::pauli(p)?)
    }

    /// Full trace, `L(C^d) -> C`.
    pub fn trace(d: usize) -> Result<Self> {
        let kraus = (0..d)
            .map(|i| {
                let mut k = CMatrix::zeros(1, d);
                k[(0, i)] = ONE;
                k
            })
            .collect();
        Self::from_kraus(d, 1, kraus)
    }

    /// `tr_B` on `A ⊗ B`.
    pub fn partial_trace_second(da: usize, db: usize) -> Result<Self> {
        let eye = CMatrix::identity(da, da);
        let kraus = (0..db)
            .map(|s| {
                let mut bra = CMatrix::zeros(1, db);
                bra[(0, s)] = ONE;
                eye.kronecker(&bra)
            })
            .collect();
        Self::from_kraus(da * db, da, kraus)
    }

    /// Computational-basis measurement with the outcome kept as a diagonal state.
    pub fn basis_measurement(d: usize) -> Result<Self> {
        let kraus = (0..d).map(|i| basis_op(d, i, i)).collect();
        Self::from_kraus(d, d, kraus)
    }

    /// Preparation of a fixed state, `C -> L(C^d)`.
    pub fn preparation(rho: &CMatrix) -> Result<Self> {
        let d = rho.nrows();
        Self::from_fn(1, d, |m| rho * m[(0, 0)])
    }

    /// `ρ ↦ (1 - p) ρ + p tr(ρ) I / d`.
    pub fn depolarizing(d: usize, p: f64) -> Result<Self> {
        let eye = CMatrix::identity(d, d);
        Self::from_fn(d, d, |m| {
            m * Complex64::from(1.0 - p) + &eye * (m.trace() * (p / d as f64))
        })
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn kraus(&self) -> Option<&[CMatrix]> {
        self.kraus.as_deref()
    }

    pub fn transfer_matrix(&self) -> &CMatrix {
        &self.transfer
    }

    pub fn apply(&self, rho: &CMatrix) -> Result<CMatrix> {
        check_dim(self.in_dim, rho.nrows())?;
        check_dim(self.in_dim, rho.ncols())?;
        let v = CVector::from_iterator(self.in_dim * self.in_dim, rho.transpose().iter().copied());
        let w = &self.transfer * v;
        Ok(CMatrix::from_fn(self.out_dim, self.out_dim, |a, b| {
            w[a * self.out_dim + b]
        }))
    }

    /// `next ∘ self`.
    pub fn then(&self, next: &Superoperator) -> Result<Self> {
        check_dim(self.out_dim, next.in_dim)?;
        check_cap(self.in_dim * next.out_dim, SUPEROP_CAP)?;
        let kraus = match (&self.kraus, &next.kraus) {
            (Some(a), Some(b)) => Some(b.iter().flat_map(|kb| a.iter().map(move |ka| kb * ka)).collect()),
            _ => None,
        };
        Ok(Self {
            in_dim: self.in_dim,
            out_dim: next.out_dim,
            kraus,
            transfer: &next.transfer * &self.transfer,
        })
    }

    /// `self ⊗ other`, with `self` on the more significant factor.
    pub fn tensor(&self, other: &Superoperator) -> Result<Self> {
        if let (Some(a), Some(b)) = (&self.kraus, &other.kraus) {
            let kraus = a
                .iter()
                .flat_map(|ka| b.iter().map(move |kb| ka.kronecker(kb)))
                .collect();
            return Self::from_kraus(self.in_dim * other.in_dim, self.out_dim * other.out_dim, kraus);
        }
        let (ia, ib) = (self.in_dim, other.in_dim);
        let mut s = Self::empty(ia * ib, self.out_dim * other.out_dim)?;
        for i1 in 0..ia {
            for j1 in 0..ia {
                let a = self.apply(&basis_op(ia, i1, j1))?;
                for i2 in 0..ib {
                    for j2 in 0..ib {
                        let b = other.apply(&basis_op(ib, i2, j2))?;
                        let out = a.kronecker(&b);
                        let col = (i1 * ib + i2) * (ia * ib) + (j1 * ib + j2);
                        let od = s.out_dim;
                        for x in 0..od {
                            for y in 0..od {
                                s.transfer[(x * od + y, col)] = out[(x, y)];
                            }
                        }
                    }
                }
            }
        }
        Ok(s)
    }

    /// `a · self + b · other`.
    pub fn combine(&self, a: f64, other: &Superoperator, b: f64) -> Result<Self> {
        check_dim(self.in_dim, other.in_dim)?;
        check_dim(self.out_dim, other.out_dim)?;
        Ok(Self {
            in_dim: self.in_dim,
            out_dim: self.out_dim,
            kraus: None,
            transfer: &self.transfer * Complex64::from(a) + &other.transfer * Complex64::from(b),
        })
    }

    pub fn choi(&self) -> CMatrix {
        let (din, dout) = (self.in_dim, self.out_dim);
        let mut j = CMatrix::zeros(din * dout, din * dout);
        for i in 0..din {
            for jj in 0..din {
                for a in 0..dout {
                    for b in 0..dout {
                        j[(i * dout + a, jj * dout + b)] = self.transfer[(a * dout + b, i * din + jj)];
                    }
                }
            }
        }
        j
    }

    /// Positive semidefiniteness of the Choi matrix up to `tol`, tested by
    /// a Cholesky factorisation of `J + tol·I`. The dense eigensolver is
    /// avoided because it returns NaN on some rank-deficient Choi matrices.
    pub fn is_completely_positive(&self, tol: f64) -> bool {
        let j = self.choi();
        let d = j.nrows();
        // Real symmetric embedding [[Re, -Im], [Im, Re]] of the Hermitian
        // part; the complex Cholesky would take square roots of negative
        // pivots without failing.
        let real = DMatrix::<f64>::from_fn(2 * d, 2 * d, |r, c| {
            let z = (j[(r % d, c % d)] + j[(c % d, r % d)].conj()) * 0.5;
            let v = match (r < d, c < d) {
                (true, true) | (false, false) => z.re,
                (true, false) => -z.im,
                (false, true) => z.im,
            };
            if r == c {
                v + tol
            } else {
                v
            }
        });
        nalgebra::Cholesky::new(real).is_some()
    }

    /// Frobenius norm of `tr_out J - I`.
    pub fn trace_preservation_residual(&self) -> f64 {
        let r = partial_trace_second(&self.choi(), self.in_dim, self.out_dim);
        (r - CMatrix::identity(self.in_dim, self.in_dim)).norm()
    }

    pub fn is_trace_preserving(&self, tol: f64) -> bool {
        self.trace_preservation_residual() <= tol
    }

    pub fn is_channel(&self, tol: f64) -> bool {
        self.is_completely_positive(tol) && self.is_trace_preserving(tol)
    }

    /// Residual of the unitary-channel test: a unitary channel is trace
    /// preserving with a rank-one Choi matrix of trace `in_dim`.
    pub fn unitarity_residual(&self) -> f64 {
        if self.in_dim != self.out_dim {
            return f64::INFINITY;
        }
        let j = self.choi();
        let tr = j.trace().re;
        let purity = (&j * &j).trace().re;
        (tr * tr - purity).abs() + self.trace_preservation_residual()
    }
}

/// Two-sided estimate of the diamond distance from the Choi trace norm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceBounds {
    pub lower: f64,
    pub upper: f64,
}

/// `(‖J(t1 - t2)‖₁ / in_dim, ‖J(t1 - t2)‖₁)`, which sandwich the diamond
/// norm of `t1 - t2`.
pub fn choi_distance_bounds(t1: &Superoperator, t2: &Superoperator) -> Result<DistanceBounds> {
    let diff = t1.combine(1.0, t2, -1.0)?;
    let upper = trace_norm(&diff.choi());
    Ok(DistanceBounds {
        lower: upper / t1.in_dim as f64,
        upper,
    })
}

fn apply_pauli_to_vec(p: &PauliOp, v: &CVector) -> CVector {
    let x = p.x_bits().to_u64() as usize;
    let z = p.z_bits().to_u64() as usize;
    let c = i_pow(p.phase());
    let mut out = CVector::zeros(v.len());
    for b in 0..v.len() {
        let sign = if (z & b).count_ones() % 2 == 1 { -c } else { c };
        out[b ^ x] += sign * v[b];
    }
    out
}

fn project_plus(p: &PauliOp, v: &CVector) -> CVector {
    (v + apply_pauli_to_vec(p, v)) * Complex64::from(0.5)
}

/// Encoding isometry `V` with columns `|x̄⟩ = X̄^x |0̄⟩`, logical qubit `i`
/// being bit `i` of the column index.
pub fn build_encoding_isometry(code: &CssCode) -> Result<DenseOperator> {
    let n = code.n();
    if n >= 63 {
        return Err(Error::DenseCapExceeded {
            dim: usize::MAX,
            cap: DENSE_CAP,
        });
    }
    let d = 1usize << n;
    check_cap(d, DENSE_CAP)?;
    let gens = code.generators();
    let mut zero = None;
    for b in 0..d {
        let mut v = CVector::zeros(d);
        v[b] = ONE;
        for g in &gens {
            v = project_plus(g, &v);
        }
        for lz in code.logical_z() {
            v = project_plus(lz, &v);
        }
        let norm = v.norm();
        if norm > 1e-6 {
            zero = Some(v / Complex64::from(norm));
            break;
        }
    }
    let zero = zero.ok_or_else(|| Error::Internal("code space is empty".into()))?;
    let k = code.k();
    let mut m = CMatrix::zeros(d, 1 << k);
    for x in 0..(1usize << k) {
        let mut v = zero.clone();
        for (i, lx) in code.logical_x().iter().enumerate() {
            if x >> i & 1 == 1 {
                v = apply_pauli_to_vec(lx, &v);
            }
        }
        m.set_column(x, &v);
    }
    Ok(DenseOperator::new(m))
}

/// A stabilizer code together with a list of errors with distinct syndromes.
#[derive(Clone, Debug)]
pub struct DerivedCode {
    base: CssCode,
    error_basis: Vec<PauliOp>,
    v: DenseOperator,
    u: DenseOperator,
}

/// Builds `U` with `U† E_s V|ψ⟩ = |ψ⟩ ⊗ |s⟩`, where `s` is the position of
/// the error in `errors`.
pub fn build_derived_code(code: &CssCode, errors: &[PauliOp]) -> Result<DerivedCode> {
    for e in errors {
        check_dim(code.n(), e.n())?;
    }
    if !errors.iter().any(|e| e.is_identity_up_to_phase()) {
        return Err(Error::MissingIdentity);
    }
    let syndromes = errors.iter().map(|e| code.syndrome(e)).collect::<Result<Vec<_>>>()?;
    for i in 0..errors.len() {
        for j in i + 1..errors.len() {
            if syndromes[i] == syndromes[j] {
                return Err(Error::DuplicateSyndrome { first: i, second: j });
            }
        }
    }
    let v = build_encoding_isometry(code)?;
    let f = errors.len();
    let m = v.cols();
    let d = v.rows();
    let mut u = CMatrix::zeros(d, m * f);
    for psi in 0..m {
        let col: CVector = v.matrix().column(psi).into_owned();
        for (s, e) in errors.iter().enumerate() {
            u.set_column(psi * f + s, &apply_pauli_to_vec(e, &col));
        }
    }
    Ok(DerivedCode {
        base: code.clone(),
        error_basis: errors.to_vec(),
        v,
        u: DenseOperator::new(u),
    })
}

impl DerivedCode {
    pub fn base(&self) -> &CssCode {
        &self.base
    }

    pub fn error_basis(&self) -> &[PauliOp] {
        &self.error_basis
    }

    pub fn encoder(&self) -> &DenseOperator {
        &self.v
    }

    pub fn u(&self) -> &DenseOperator {
        &self.u
    }

    pub fn f_dim(&self) -> usize {
        self.error_basis.len()
    }

    pub fn logical_dim(&self) -> usize {
        self.v.cols()
    }

    pub fn physical_dim(&self) -> usize {
        self.v.rows()
    }

    /// Dimension of `L`, i.e. `logical_dim * f_dim`.
    pub fn l_dim(&self) -> usize {
        self.u.cols()
    }

    /// Basis vector `|s⟩` of the syndrome space.
    pub fn syndrome_state(&self, s: usize) -> CVector {
        let mut v = CVector::zeros(self.f_dim());
        v[s] = ONE;
        v
    }

    /// Largest `‖U† E_s V|ψ⟩ - |ψ⟩ ⊗ |s⟩‖` over the error basis.
    pub fn defining_residual(&self) -> Result<f64> {
        let (m, f) = (self.logical_dim(), self.f_dim());
        let mut worst: f64 = 0.0;
        for (s, e) in self.error_basis.iter().enumerate() {
            let ev = DenseOperator::pauli(e)?.mul(&self.v)?;
            let lhs = self.u.adjoint().mul(&ev)?;
            for psi in 0..m {
                let mut want = CVector::zeros(m * f);
                want[psi * f + s] = ONE;
                worst = worst.max((lhs.matrix().column(psi) - want).norm());
            }
        }
        Ok(worst)
    }

    /// Embedding `J: L(L) -> L(N)`, `ρ ↦ UρU†`, in `L` coordinates.
    pub fn embedding(&self) -> Result<Superoperator> {
        Superoperator::conjugation(&self.u)
    }

    /// Adjoint `J*: L(N) -> L(L)`, `σ ↦ U†σU`.
    pub fn restriction(&self) -> Result<Superoperator> {
        Superoperator::conjugation(&self.u.adjoint())
    }

    /// Ideal decoder in `L` coordinates: `tr_F`.
    pub fn syndrome_trace(&self) -> Result<Superoperator> {
        Superoperator::partial_trace_second(self.logical_dim(), self.f_dim())
    }

    /// Lifts a map on `L` coordinates to the physical space, `J ∘ g ∘ J*`.
    pub fn lift(&self, g: &Superoperator) -> Result<Superoperator> {
        self.restriction()?.then(g)?.then(&self.embedding()?)
    }

    /// Encoding transformation `ρ ↦ U(ρ ⊗ η)U†` for a syndrome state `η`.
    pub fn encoding_with(&self, eta: &CMatrix) -> Result<Superoperator> {
        check_dim(self.f_dim(), eta.nrows())?;
        let u = self.u.matrix().clone();
        Superoperator::from_fn(self.logical_dim(), self.physical_dim(), |m| {
            &u * m.kronecker(eta) * u.adjoint()
        })
    }
}

/// Ideal decoder `σ ↦ tr_F(U†σU)` on the physical space; trace preserving on `L`.
pub fn ideal_decoder(d: &DerivedCode) -> Result<Superoperator> {
    d.restriction()?.then(&d.syndrome_trace()?)
}

#[derive(Clone, Debug)]
pub struct RepresentationReport {
    /// `R = J'* ∘ T ∘ J`, in `L` coordinates on both sides.
    pub r: Superoperator,
    /// `S = J'* ∘ T`.
    pub s: Superoperator,
    /// `(μ')* ∘ R` against `P ∘ μ*`.
    pub comm1: DistanceBounds,
    /// `J' ∘ R` against `T ∘ J`.
    pub comm2: DistanceBounds,
    /// `J' ∘ S` against `T`.
    pub comm3: DistanceBounds,
    pub r_is_channel: bool,
    pub s_is_channel: bool,
}

impl RepresentationReport {
    /// Largest of the three upper bounds.
    pub fn max_residual(&self) -> f64 {
        self.comm1.upper.max(self.comm2.upper).max(self.comm3.upper)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.max_residual() <= tol && self.r_is_channel && self.s_is_channel
    }
}

/// Tests whether `t` (physical, `d -> d2`) represents `p` (logical).
pub fn check_representation(
    t: &Superoperator,
    p: &Superoperator,
    d: &DerivedCode,
    d2: &DerivedCode,
    tol: f64,
) -> Result<RepresentationReport> {
    check_dim(d.physical_dim(), t.in_dim())?;
    check_dim(d2.physical_dim(), t.out_dim())?;
    check_dim(d.logical_dim(), p.in_dim())?;
    check_dim(d2.logical_dim(), p.out_dim())?;
    let j = d.embedding()?;
    let j2 = d2.embedding()?;
    let j2_star = d2.restriction()?;
    let s = t.then(&j2_star)?;
    let r = j.then(&s)?;
    let comm1 = choi_distance_bounds(&r.then(&d2.syndrome_trace()?)?, &d.syndrome_trace()?.then(p)?)?;
    let comm2 = choi_distance_bounds(&r.then(&j2)?, &j.then(t)?)?;
    let comm3 = choi_distance_bounds(&s.then(&j2)?, t)?;
    let slack = CHANNEL_TOL.max(tol);
    Ok(RepresentationReport {
        r_is_channel: r.is_channel(slack),
        s_is_channel: s.is_channel(slack),
        r,
        s,
        comm1,
        comm2,
        comm3,
    })
}

#[derive(Clone, Debug)]
pub struct UnitaryFactorization {
    /// Channel on the syndrome space.
    pub f: Superoperator,
    /// Choi trace norm of `U† ∘ R ∘ U - P ⊗ F`.
    pub residual: f64,
}

/// Splits a physical map `r` whose action on `L` represents the unitary `p`
/// into `P ⊗ F` on `M ⊗ F`, with `F(σ) = tr_M R(|0⟩⟨0| ⊗ σ)`.
pub fn factor_unitary_rule(
    r: &Superoperator,
    d: &DerivedCode,
    p: &Superoperator,
    tol: f64,
) -> Result<UnitaryFactorization> {
    check_dim(d.physical_dim(), r.in_dim())?;
    check_dim(d.physical_dim(), r.out_dim())?;
    check_dim(d.logical_dim(), p.in_dim())?;
    let ur = p.unitarity_residual();
    if ur > CHANNEL_TOL {
        return Err(Error::NotUnitary { residual: ur });
    }
    let rl = d.embedding()?.then(r)?.then(&d.restriction()?)?;
    let tr_f = d.syndrome_trace()?;
    let hyp = choi_distance_bounds(&rl.then(&tr_f)?, &tr_f.then(p)?)?.upper;
    if hyp > CHANNEL_TOL.max(tol) {
        return Err(Error::ResidualExceeded {
            residual: hyp,
            tol: CHANNEL_TOL.max(tol),
        });
    }
    let (m, fd) = (d.logical_dim(), d.f_dim());
    let zero = basis_op(m, 0, 0);
    let f = Superoperator::from_fn(fd, fd, |sigma| {
        let out = rl.apply(&zero.kronecker(sigma)).expect("dimensions checked");
        partial_trace_first(&out, m, fd)
    })?;
    let residual = choi_distance_bounds(&rl, &p.tensor(&f)?)?.upper;
    if residual > tol {
        return Err(Error::ResidualExceeded { residual, tol });
    }
    Ok(UnitaryFactorization { f, residual })
}

/// Checks `U† R(1) U = |ψ⟩⟨ψ| ⊗ γ` for a preparation `r: C -> L(N)` and
/// returns `γ`.
pub fn check_prep_rule(r: &Superoperator, d: &DerivedCode, psi: &CVector, tol: f64) -> Result<CMatrix> {
    check_dim(1, r.in_dim())?;
    check_dim(d.physical_dim(), r.out_dim())?;
    check_dim(d.logical_dim(), psi.len())?;
    let out = r.apply(&CMatrix::identity(1, 1))?;
    let u = d.u().matrix();
    let rho = u.adjoint() * out * u;
    let gamma = partial_trace_first(&rho, d.logical_dim(), d.f_dim());
    let residual = trace_norm(&(rho - ket_bra(psi).kronecker(&gamma)));
    if residual > tol {
        return Err(Error::ResidualExceeded { residual, tol });
    }
    Ok(gamma)
}

/// Choi residual of `R ∘ J = (P ⊗ tr_F)` for a measurement `p` with
/// classical (diagonal) output.
pub fn check_measurement_rule(r: &Superoperator, d: &DerivedCode, p: &Superoperator) -> Result<f64> {
    check_dim(d.physical_dim(), r.in_dim())?;
    check_dim(d.logical_dim(), p.in_dim())?;
    check_dim(p.out_dim(), r.out_dim())?;
    for i in 0..p.in_dim() {
        for j in 0..p.in_dim() {
            let out = p.apply(&basis_op(p.in_dim(), i, j))?;
            let off: f64 = (0..out.nrows())
                .flat_map(|a| (0..out.ncols()).filter(move |&b| b != a).map(move |b| (a, b)))
                .map(|(a, b)| out[(a, b)].norm())
                .sum();
            if off > CHANNEL_TOL {
                return Err(Error::InvalidParameter("measurement output is not classical".into()));
            }
        }
    }
    let lhs = d.embedding()?.then(r)?;
    let rhs = d.syndrome_trace()?.then(p)?;
    Ok(choi_distance_bounds(&lhs, &rhs)?.upper)
}

/// A stored representation check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoldenCase {
    pub code_id: String,
    pub error_basis: Vec<String>,
    pub channel_kind: String,
    pub expected_residual_max: f64,
}

pub fn golden_cases() -> Result<Vec<GoldenCase>> {
    serde_json::from_str(include_str!("../golden/representation.json"))
        .map_err(|e| Error::Internal(format!("golden cases: {e}")))
}

/// Physical channel and logical target for a channel kind such as
/// `transversal-x`, or `transversal-x/logical-z` for a mismatched pair.
pub fn channel_pair(code: &CssCode, kind: &str) -> Result<(Superoperator, Superoperator)> {
    let (phys, logical) = match kind.split_once('/') {
        Some((a, b)) => (a, b.strip_prefix("logical-").unwrap_or(b)),
        None => (kind, kind.strip_prefix("transversal-").unwrap_or(kind)),
    };
    let n = code.n();
    let phys_op = match phys {
        "identity" => PauliOp::identity(n),
        "transversal-x" => PauliOp::x_type(BitVector::from_bools(&vec![true; n])),
        "transversal-z" => PauliOp::z_type(BitVector::from_bools(&vec![true; n])),
        "transversal-y" => PauliOp::hermitian(
            BitVector::from_bools(&vec![true; n]),
            BitVector::from_bools(&vec![true; n]),
        ),
        other => return Err(Error::InvalidParameter(format!("unknown channel kind {other:?}"))),
    };
    if code.k() != 1 {
        return Err(Error::InvalidParameter(
            "channel kinds need a single logical qubit".into(),
        ));
    }
    let logical_op: PauliOp = match logical {
        "identity" => "I",
        "x" => "X",
        "y" => "Y",
        "z" => "Z",
        other => return Err(Error::InvalidParameter(format!("unknown logical gate {other:?}"))),
    }
    .parse()?;
    Ok((Superoperator::pauli(&phys_op)?, Superoperator::pauli(&logical_op)?))
}

/// Runs one golden case end to end.
pub fn run_golden_case(case: &GoldenCase) -> Result<RepresentationReport> {
    let code = codes::load_shipped(&case.code_id)?;
    let errors = case
        .error_basis
        .iter()
        .map(|s| s.parse())
        .collect::<Result<Vec<PauliOp>>>()?;
    let d = build_derived_code(&code, &errors)?;
    let (t, p) = channel_pair(&code, &case.channel_kind)?;
    check_representation(&t, &p, &d, &d, case.expected_residual_max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bit_flip_derived() -> DerivedCode {
        let errs: Vec<PauliOp> = ["III", "XII", "IXI", "IIX"]
            .iter()
            .map(|s| s.parse().unwrap())
            .collect();
        build_derived_code(&codes::bit_flip(), &errs).unwrap()
    }

    #[test]
    fn bit_flip_isometry() {
        let v = build_encoding_isometry(&codes::bit_flip()).unwrap();
        assert!((v.matrix()[(0, 0)] - ONE).norm() < 1e-12);
        assert!((v.matrix()[(7, 1)] - ONE).norm() < 1e-12);
        assert!(v.is_isometry(1e-12));
    }

    #[test]
    fn derived_code_basics() {
        let d = bit_flip_derived();
        assert_eq!(d.f_dim(), 4);
        assert!(d.u().is_unitary(1e-12));
        assert!(d.defining_residual().unwrap() < 1e-12);
        let dup: Vec<PauliOp> = ["III", "ZII"].iter().map(|s| s.parse().unwrap()).collect();
        assert_eq!(
            build_derived_code(&codes::bit_flip(), &dup).unwrap_err(),
            Error::DuplicateSyndrome { first: 0, second: 1 }
        );
    }

    #[test]
    fn x_against_identity_bounds() {
        let x = Superoperator::pauli(&"X".parse().unwrap()).unwrap();
        let id = Superoperator::identity(2).unwrap();
        let b = choi_distance_bounds(&x, &id).unwrap();
        assert!((b.lower - 2.0).abs() < 1e-12 && (b.upper - 4.0).abs() < 1e-12);
    }

    #[test]
    fn transfer_and_kraus_agree_under_composition() {
        let d = bit_flip_derived();
        let a = ideal_decoder(&d).unwrap();
        let via_kraus = Superoperator::from_kraus(8, 2, a.kraus().unwrap().to_vec()).unwrap();
        assert!(choi_distance_bounds(&a, &via_kraus).unwrap().upper < 1e-12);
        let back = Superoperator::from_choi(8, 2, &a.choi()).unwrap();
        assert!(choi_distance_bounds(&a, &back).unwrap().upper < 1e-12);
    }

    #[test]
    fn golden_cases_pass() {
        for case in golden_cases().unwrap() {
            let rep = run_golden_case(&case).unwrap();
            assert!(rep.passes(case.expected_residual_max), "{case:?}");
        }
    }

    #[test]
    fn small_syndrome_space_breaks_third_square() {
        // With F trivial, L is the code space and S cannot absorb the action
        // of T outside it.
        let d = build_derived_code(&codes::bit_flip(), &["III".parse().unwrap()]).unwrap();
        let (t, p) = channel_pair(d.base(), "transversal-x").unwrap();
        let rep = check_representation(&t, &p, &d, &d, EXACT_TOL).unwrap();
        assert!(rep.comm1.upper < EXACT_TOL && rep.comm2.upper < EXACT_TOL);
        assert!(rep.comm3.upper > 1.0);
        assert!(rep.r_is_channel && !rep.s_is_channel);
    }
}
