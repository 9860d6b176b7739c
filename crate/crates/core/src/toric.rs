//! Toric code on an `L x L` torus, matching decoder, the closed-form
//! failure bound and the noisy communication experiment.
//!
//! Edge qubits: horizontal edge `h(i, j)` joins vertices `(i, j)` and
//! `(i, j+1)` and has index `i*L + j`; vertical edge `v(i, j)` joins `(i, j)`
//! and `(i+1, j)` and has index `L² + i*L + j`. Star `(i, j)` is the X check
//! on the four edges at vertex `(i, j)`; plaquette `(i, j)` is the Z check on
//! the face with corner `(i, j)`.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::BitVector;
use crate::code::{CssCode, Layout, LogicalClass, Syndrome};
use crate::error::{Error, Result};
use crate::gf2::BinMatrix;
use crate::matching::min_weight_perfect_matching;
use crate::noise::{sample_cluster_on, sample_iid_pauli, ErrorSample};
use crate::pauli::PauliOp;
use crate::stats::{stream_rng, Tally};

#[derive(Clone, Debug)]
pub struct ToricLattice {
    l: usize,
    code: CssCode,
    /// Sites adjacent to each qubit (sharing a vertex or face), used by the
    /// correlated noise sampler.
    adjacency: Vec<Vec<usize>>,
}

impl ToricLattice {
    pub fn new(l: usize) -> Result<Self> {
        let code = build_toric(l)?;
        let n = 2 * l * l;
        let mut adjacency = vec![Vec::new(); n];
        for rows in [code.hx(), code.hz()] {
            for r in rows.rows() {
                let supp: Vec<usize> = r.iter_ones().collect();
                for &a in &supp {
                    for &b in &supp {
                        if a != b {
                            adjacency[a].push(b);
                        }
                    }
                }
            }
        }
        for a in adjacency.iter_mut() {
            a.sort_unstable();
            a.dedup();
        }
        Ok(Self { l, code, adjacency })
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn n(&self) -> usize {
        2 * self.l * self.l
    }

    pub fn code(&self) -> &CssCode {
        &self.code
    }

    pub fn adjacency(&self) -> &[Vec<usize>] {
        &self.adjacency
    }

    #[inline]
    pub fn h(&self, i: usize, j: usize) -> usize {
        let l = self.l;
        (i % l) * l + (j % l)
    }

    #[inline]
    pub fn v(&self, i: usize, j: usize) -> usize {
        let l = self.l;
        l * l + (i % l) * l + (j % l)
    }

    /// Torus taxicab distance between sites `a = i*L + j` and `b`.
    pub fn distance(&self, a: usize, b: usize) -> i64 {
        let l = self.l as i64;
        let (ai, aj) = ((a / self.l) as i64, (a % self.l) as i64);
        let (bi, bj) = ((b / self.l) as i64, (b % self.l) as i64);
        let di = (ai - bi).rem_euclid(l);
        let dj = (aj - bj).rem_euclid(l);
        di.min(l - di) + dj.min(l - dj)
    }

    /// Signed shortest step count from `a` to `b` along one axis; ties go positive.
    fn steps(&self, from: usize, to: usize) -> i64 {
        let l = self.l as i64;
        let d = (to as i64 - from as i64).rem_euclid(l);
        if 2 * d <= l {
            d
        } else {
            d - l
        }
    }

    /// Edges of a shortest primal path between vertices `a` and `b`:
    /// first along the row, then along the column.
    pub fn primal_path(&self, a: usize, b: usize) -> Vec<usize> {
        let l = self.l;
        let (mut i, mut j) = (a / l, a % l);
        let (bi, bj) = (b / l, b % l);
        let mut out = Vec::new();
        let sj = self.steps(j, bj);
        for _ in 0..sj.unsigned_abs() {
            if sj > 0 {
                out.push(self.h(i, j));
                j = (j + 1) % l;
            } else {
                j = (j + l - 1) % l;
                out.push(self.h(i, j));
            }
        }
        let si = self.steps(i, bi);
        for _ in 0..si.unsigned_abs() {
            if si > 0 {
                out.push(self.v(i, j));
                i = (i + 1) % l;
            } else {
                i = (i + l - 1) % l;
                out.push(self.v(i, j));
            }
        }
        out
    }

    /// Edges crossed by a shortest dual path between plaquettes `a` and `b`.
    pub fn dual_path(&self, a: usize, b: usize) -> Vec<usize> {
        let l = self.l;
        let (mut i, mut j) = (a / l, a % l);
        let (bi, bj) = (b / l, b % l);
        let mut out = Vec::new();
        let sj = self.steps(j, bj);
        for _ in 0..sj.unsigned_abs() {
            if sj > 0 {
                out.push(self.v(i, j + 1));
                j = (j + 1) % l;
            } else {
                out.push(self.v(i, j));
                j = (j + l - 1) % l;
            }
        }
        let si = self.steps(i, bi);
        for _ in 0..si.unsigned_abs() {
            if si > 0 {
                out.push(self.h(i + 1, j));
                i = (i + 1) % l;
            } else {
                out.push(self.h(i, j));
                i = (i + l - 1) % l;
            }
        }
        out
    }

    /// Matching decoder. X-check defects are paired on the primal lattice and
    /// corrected with Z chains; Z-check defects on the dual lattice with X chains.
    pub fn decode_mwpm(&self, s: &Syndrome) -> Result<PauliOp> {
        let n = self.n();
        if s.len() != self.code.num_generators() {
            return Err(Error::DimensionMismatch {
                expected: self.code.num_generators(),
                found: s.len(),
            });
        }
        let (sx, sz) = self.code.split_syndrome(s);
        let star_defects: Vec<usize> = sx.iter_ones().collect();
        let plaq_defects: Vec<usize> = sz.iter_ones().collect();
        for d in [&star_defects, &plaq_defects] {
            if d.len() % 2 == 1 {
                return Err(Error::OddDefects(d.len()));
            }
        }
        let dist = |a: usize, b: usize| self.distance(a, b);
        let mut z = BitVector::zeros(n);
        for (a, b) in min_weight_perfect_matching(&star_defects, &dist) {
            for e in self.primal_path(a, b) {
                z.flip(e);
            }
        }
        let mut x = BitVector::zeros(n);
        for (a, b) in min_weight_perfect_matching(&plaq_defects, &dist) {
            for e in self.dual_path(a, b) {
                x.flip(e);
            }
        }
        Ok(PauliOp::hermitian(x, z))
    }
}

/// Toric code with `2L²` qubits, all `L²` stars as X checks and all `L²`
/// plaquettes as Z checks (one redundant check per sector).
pub fn build_toric(l: usize) -> Result<CssCode> {
    if l < 2 {
        return Err(Error::InvalidParameter(format!("toric size {l} < 2")));
    }
    let n = 2 * l * l;
    let h = |i: usize, j: usize| (i % l) * l + (j % l);
    let v = |i: usize, j: usize| l * l + (i % l) * l + (j % l);
    let mut stars = Vec::new();
    let mut plaqs = Vec::new();
    for i in 0..l {
        for j in 0..l {
            stars.push(BitVector::from_indices(
                n,
                [h(i, j), h(i, j + l - 1), v(i, j), v(i + l - 1, j)],
            ));
            plaqs.push(BitVector::from_indices(n, [h(i, j), h(i + 1, j), v(i, j), v(i, j + 1)]));
        }
    }
    let lx = vec![
        PauliOp::x_type(BitVector::from_indices(n, (0..l).map(|i| h(i, 0)))),
        PauliOp::x_type(BitVector::from_indices(n, (0..l).map(|j| v(0, j)))),
    ];
    let lz = vec![
        PauliOp::z_type(BitVector::from_indices(n, (0..l).map(|j| h(0, j)))),
        PauliOp::z_type(BitVector::from_indices(n, (0..l).map(|i| v(i, 0)))),
    ];
    let li = l as i64;
    let mut qubits = vec![(0, 0); n];
    for i in 0..l {
        for j in 0..l {
            qubits[h(i, j)] = (2 * i as i64, 2 * j as i64 + 1);
            qubits[v(i, j)] = (2 * i as i64 + 1, 2 * j as i64);
        }
    }
    let sites = |off: i64| -> Vec<(i64, i64)> {
        (0..l)
            .flat_map(|i| (0..l).map(move |j| (2 * i as i64 + off, 2 * j as i64 + off)))
            .collect()
    };
    let layout = Layout {
        qubits,
        x_generators: sites(0),
        z_generators: sites(1),
        period: Some((2 * li, 2 * li)),
    };
    CssCode::new(
        format!("toric-{l}"),
        BinMatrix::from_rows(n, stars),
        BinMatrix::from_rows(n, plaqs),
        lx,
        lz,
    )?
    .with_layout(layout)
}

/// Closed-form failure bound `(16/3) L⁴ (36α)^(L/2)`. Errors when `α > 1/36`,
/// outside the range where the bound is claimed.
pub fn bound_zeta(l: usize, alpha: f64) -> Result<f64> {
    if !(0.0..=1.0 / 36.0).contains(&alpha) {
        return Err(Error::InvalidParameter(format!("alpha {alpha} outside [0, 1/36]")));
    }
    let lf = l as f64;
    Ok(16.0 / 3.0 * lf.powi(4) * (36.0 * alpha).powf(lf / 2.0))
}

/// How the noise in a communication trial is produced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum NoiseSource {
    /// Encoder, channel and decoder noise: local stochastic at `δ′`,
    /// i.i.d. at `ν`, local stochastic at `δ′`.
    Sampled,
    /// A fixed error applied every trial.
    Planted(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommExperimentConfig {
    pub l: usize,
    pub nu: f64,
    pub delta_prime: f64,
    /// Probability that a local stochastic fault spreads to a neighbour.
    pub spread: f64,
    pub trials: u64,
    pub seed: u64,
    pub noise: NoiseSource,
}

impl CommExperimentConfig {
    pub fn new(l: usize, nu: f64, delta_prime: f64, trials: u64, seed: u64) -> Self {
        Self {
            l,
            nu,
            delta_prime,
            spread: 0.0,
            trials,
            seed,
            noise: NoiseSource::Sampled,
        }
    }

    /// `ν + 2δ′`, the parameter of the composed noise.
    pub fn alpha_eff(&self) -> f64 {
        self.nu + 2.0 * self.delta_prime
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("nu", self.nu), ("delta_prime", self.delta_prime)] {
            if !(0.0..1.0).contains(&v) {
                return Err(Error::InvalidParameter(format!("{name} = {v} outside [0, 1)")));
            }
        }
        if !(0.0..1.0).contains(&self.spread) {
            return Err(Error::InvalidParameter(format!(
                "spread = {} outside [0, 1)",
                self.spread
            )));
        }
        if self.l < 2 {
            return Err(Error::InvalidParameter(format!("L = {} < 2", self.l)));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CommOutcome {
    Success,
    LogicalFailure,
    DetectedOnly,
}

/// Total noise of one trial: encoder, channel and decoder samples multiplied.
pub fn sample_comm_noise<R: Rng + ?Sized>(
    lat: &ToricLattice,
    cfg: &CommExperimentConfig,
    rng: &mut R,
) -> Result<PauliOp> {
    match &cfg.noise {
        NoiseSource::Planted(label) => {
            let p: PauliOp = label.parse()?;
            if p.n() != lat.n() {
                return Err(Error::DimensionMismatch {
                    expected: lat.n(),
                    found: p.n(),
                });
            }
            Ok(p)
        }
        NoiseSource::Sampled => {
            let n = lat.n();
            let enc = sample_cluster_on(lat.adjacency(), cfg.delta_prime, cfg.spread, rng);
            let chan = sample_iid_pauli(n, cfg.nu, rng);
            let dec = sample_cluster_on(lat.adjacency(), cfg.delta_prime, cfg.spread, rng);
            let total: ErrorSample = enc.compose(&chan)?.compose(&dec)?;
            Ok(total.pauli)
        }
    }
}

/// Decodes one noisy transmission and classifies the residual.
pub fn classify_residual(lat: &ToricLattice, e: &PauliOp) -> Result<CommOutcome> {
    let s = lat.code().syndrome(e)?;
    let c = lat.decode_mwpm(&s)?;
    let residual = e.multiply(&c)?;
    Ok(match lat.code().logical_class(&residual)? {
        LogicalClass::Detectable => CommOutcome::DetectedOnly,
        cls if cls.is_trivial() => CommOutcome::Success,
        _ => CommOutcome::LogicalFailure,
    })
}

pub fn run_comm_trial(lat: &ToricLattice, cfg: &CommExperimentConfig, stream: u64) -> Result<CommOutcome> {
    let mut rng = stream_rng(cfg.seed, stream);
    let e = sample_comm_noise(lat, cfg, &mut rng)?;
    let out = classify_residual(lat, &e)?;
    if out == CommOutcome::DetectedOnly {
        return Err(Error::Internal("matching correction left a nonzero syndrome".into()));
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FailureEstimate {
    pub trials: u64,
    pub failures: u64,
    pub rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Runs `cfg.trials` trials on streams `0..trials` and aggregates failures.
pub fn estimate_logical_failure(cfg: &CommExperimentConfig) -> Result<FailureEstimate> {
    cfg.validate()?;
    if cfg.trials < 100 {
        return Err(Error::InvalidParameter(format!("trials = {} < 100", cfg.trials)));
    }
    let lat = ToricLattice::new(cfg.l)?;
    let tally = (0..cfg.trials)
        .into_par_iter()
        .map(|i| {
            run_comm_trial(&lat, cfg, i).map(|o| Tally {
                hits: (o == CommOutcome::LogicalFailure) as u64,
                trials: 1,
            })
        })
        .try_reduce(Tally::default, |a, b| Ok(a.merge(b)))?;
    let (lo, hi) = tally.wilson95();
    Ok(FailureEstimate {
        trials: tally.trials,
        failures: tally.hits,
        rate: tally.rate(),
        ci_low: lo,
        ci_high: hi,
    })
}
