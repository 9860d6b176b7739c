//! Pauli error samplers for independent and local stochastic noise, a
//! support audit for the local stochastic condition `P(T ⊆ A) <= δ^|T|`,
//! and the adversarial tail bounds.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{Pauli1, PauliOp};
use crate::stats::{wilson_interval, Z95};

/// Minimum number of samples the estimator accepts.
pub const MIN_AUDIT_SAMPLES: u64 = 10_000;
/// Largest subset size the audit enumerates.
pub const MAX_AUDIT_SET: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NoiseKind {
    IidPauli,
    LocalStochasticCluster,
    GateStochastic,
    /// Product of samples from two other sources.
    Composed,
    /// Hand-placed error.
    Planted,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    pub delta: f64,
    /// Neighbour inclusion probability; only used by the cluster sampler.
    pub spread: f64,
}

impl NoiseSpec {
    pub fn iid(delta: f64) -> Result<Self> {
        Self::new(NoiseKind::IidPauli, delta, 0.0)
    }

    pub fn cluster(delta: f64, spread: f64) -> Result<Self> {
        Self::new(NoiseKind::LocalStochasticCluster, delta, spread)
    }

    pub fn new(kind: NoiseKind, delta: f64, spread: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&delta) {
            return Err(Error::InvalidParameter(format!("delta {delta} outside [0, 1]")));
        }
        if !(0.0..1.0).contains(&spread) {
            return Err(Error::InvalidParameter(format!("spread {spread} outside [0, 1)")));
        }
        Ok(Self { kind, delta, spread })
    }

    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> ErrorSample {
        match self.kind {
            NoiseKind::LocalStochasticCluster => sample_local_stochastic_cluster(n, self.delta, self.spread, rng),
            _ => sample_iid_pauli(n, self.delta, rng),
        }
    }
}

/// A sampled Pauli error together with the qubits it may act on.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ErrorSample {
    /// Sorted support set `A`.
    pub support: Vec<usize>,
    pub pauli: PauliOp,
    pub provenance: NoiseKind,
}

impl ErrorSample {
    pub fn empty(n: usize, provenance: NoiseKind) -> Self {
        Self {
            support: Vec::new(),
            pauli: PauliOp::identity(n),
            provenance,
        }
    }

    pub fn planted(pauli: PauliOp) -> Self {
        Self {
            support: pauli.support(),
            pauli,
            provenance: NoiseKind::Planted,
        }
    }

    /// Product of two samples; the support is where the product acts nontrivially.
    pub fn compose(&self, other: &ErrorSample) -> Result<ErrorSample> {
        let pauli = self.pauli.multiply(&other.pauli)?;
        Ok(ErrorSample {
            support: pauli.support(),
            pauli,
            provenance: NoiseKind::Composed,
        })
    }
}

/// Uniformly random non-identity single-qubit Pauli.
#[inline]
pub fn random_nontrivial<R: Rng + ?Sized>(rng: &mut R) -> Pauli1 {
    Pauli1::NONTRIVIAL[rng.gen_range(0..3)]
}

fn fill_random_paulis<R: Rng + ?Sized>(n: usize, support: &[usize], rng: &mut R) -> PauliOp {
    let mut p = PauliOp::identity(n);
    for &q in support {
        let (x, z) = random_nontrivial(rng).bits();
        p.x_bits_mut().set(q, x);
        p.z_bits_mut().set(q, z);
    }
    p.to_hermitian()
}

/// Each qubit independently carries a uniform nontrivial Pauli with probability `delta`.
pub fn sample_iid_pauli<R: Rng + ?Sized>(n: usize, delta: f64, rng: &mut R) -> ErrorSample {
    let support: Vec<usize> = (0..n).filter(|_| rng.gen::<f64>() < delta).collect();
    let pauli = fill_random_paulis(n, &support, rng);
    ErrorSample {
        support,
        pauli,
        provenance: NoiseKind::IidPauli,
    }
}

/// Ring adjacency on `n` sites.
pub fn ring_adjacency(n: usize) -> Vec<Vec<usize>> {
    (0..n)
        .map(|i| {
            let mut v = vec![(i + n - 1) % n, (i + 1) % n];
            v.sort_unstable();
            v.dedup();
            v.retain(|&j| j != i);
            v
        })
        .collect()
}

/// Cluster sampler on a ring: seeds at rate `delta`, each seed grows to each
/// neighbour with probability `spread`.
pub fn sample_local_stochastic_cluster<R: Rng + ?Sized>(n: usize, delta: f64, spread: f64, rng: &mut R) -> ErrorSample {
    sample_cluster_on(&ring_adjacency(n), delta, spread, rng)
}

/// Cluster sampler on an arbitrary adjacency list.
pub fn sample_cluster_on<R: Rng + ?Sized>(
    adjacency: &[Vec<usize>],
    delta: f64,
    spread: f64,
    rng: &mut R,
) -> ErrorSample {
    let n = adjacency.len();
    let mut in_a = vec![false; n];
    for i in 0..n {
        if rng.gen::<f64>() < delta {
            in_a[i] = true;
            for &j in &adjacency[i] {
                if spread > 0.0 && rng.gen::<f64>() < spread {
                    in_a[j] = true;
                }
            }
        }
    }
    let support: Vec<usize> = (0..n).filter(|&i| in_a[i]).collect();
    let pauli = fill_random_paulis(n, &support, rng);
    ErrorSample {
        support,
        pauli,
        provenance: NoiseKind::LocalStochasticCluster,
    }
}

/// Nontrivial Pauli on `arity` wires drawn uniformly from the `4^arity - 1`
/// options with probability `delta`; `None` otherwise.
pub fn sample_location_fault<R: Rng + ?Sized>(arity: usize, delta: f64, rng: &mut R) -> Option<PauliOp> {
    if rng.gen::<f64>() >= delta {
        return None;
    }
    let choices = (1u64 << (2 * arity)) - 1;
    let code = rng.gen_range(0..choices) + 1;
    let mut p = PauliOp::identity(arity);
    for q in 0..arity {
        let two = (code >> (2 * q)) & 3;
        let pq = match two {
            0 => Pauli1::I,
            1 => Pauli1::X,
            2 => Pauli1::Z,
            _ => Pauli1::Y,
        };
        p.set(q, pq);
    }
    Some(p)
}

/// Parameter of the composition of two local stochastic channels.
pub fn compose_parameter(nu_a: f64, nu_b: f64) -> f64 {
    nu_a + nu_b
}

/// Rank of a sorted subset in the combinatorial number system, offset so
/// that all subsets of size `<= max_t` get distinct indices.
struct SubsetIndex {
    n: usize,
    max_t: usize,
    binom: Vec<Vec<u64>>,
    offsets: Vec<u64>,
}

impl SubsetIndex {
    fn new(n: usize, max_t: usize) -> Self {
        let mut binom = vec![vec![0u64; max_t + 2]; n + 1];
        for i in 0..=n {
            binom[i][0] = 1;
            for j in 1..=max_t + 1 {
                binom[i][j] = if i == 0 {
                    0
                } else {
                    binom[i - 1][j - 1] + binom[i - 1][j]
                };
            }
        }
        let mut offsets = vec![0u64; max_t + 2];
        for t in 1..=max_t + 1 {
            offsets[t] = offsets[t - 1] + if t == 1 { 0 } else { binom[n][t - 1] };
        }
        Self {
            n,
            max_t,
            binom,
            offsets,
        }
    }

    fn total(&self) -> usize {
        (self.offsets[self.max_t] + self.binom[self.n][self.max_t]) as usize
    }

    fn index(&self, set: &[usize]) -> usize {
        let t = set.len();
        let rank: u64 = set.iter().enumerate().map(|(i, &c)| self.binom[c][i + 1]).sum();
        (self.offsets[t] + rank) as usize
    }

    fn unrank(&self, idx: usize) -> Vec<usize> {
        let idx = idx as u64;
        let t = (1..=self.max_t).rev().find(|&t| self.offsets[t] <= idx).unwrap();
        let mut rank = idx - self.offsets[t];
        let mut out = vec![0; t];
        for i in (0..t).rev() {
            let mut c = i;
            while c + 1 <= self.n && self.binom[c + 1][i + 1] <= rank {
                c += 1;
            }
            out[i] = c;
            rank -= self.binom[c][i + 1];
        }
        out
    }
}

/// Counts of `T ⊆ A` over samples for every `T` with `1 <= |T| <= max_t`.
/// Merging two audits adds their counts, so partial audits from parallel
/// workers combine in any order.
pub struct SupportAudit {
    index: SubsetIndex,
    counts: Vec<u64>,
    samples: u64,
}

impl SupportAudit {
    pub fn new(n: usize, max_t: usize) -> Result<Self> {
        if max_t == 0 || max_t > MAX_AUDIT_SET {
            return Err(Error::InvalidParameter(format!(
                "audit set size {max_t} outside 1..={MAX_AUDIT_SET}"
            )));
        }
        let max_t = max_t.min(n.max(1));
        let index = SubsetIndex::new(n, max_t);
        let total = index.total();
        Ok(Self {
            index,
            counts: vec![0; total],
            samples: 0,
        })
    }

    pub fn samples(&self) -> u64 {
        self.samples
    }

    pub fn add(&mut self, support: &[usize]) {
        self.samples += 1;
        let a = support;
        let m = a.len();
        let max_t = self.index.max_t;
        let mut buf = [0usize; MAX_AUDIT_SET];
        // Enumerate all subsets of size 1..=max_t of the sorted support.
        fn rec(
            audit: &mut SupportAudit,
            a: &[usize],
            start: usize,
            depth: usize,
            max_t: usize,
            buf: &mut [usize; MAX_AUDIT_SET],
        ) {
            for i in start..a.len() {
                buf[depth] = a[i];
                let idx = audit.index.index(&buf[..=depth]);
                audit.counts[idx] += 1;
                if depth + 1 < max_t {
                    rec(audit, a, i + 1, depth + 1, max_t, buf);
                }
            }
        }
        if m > 0 {
            rec(self, a, 0, 0, max_t, &mut buf);
        }
    }

    pub fn merge(mut self, other: SupportAudit) -> SupportAudit {
        assert_eq!(self.counts.len(), other.counts.len());
        for (a, b) in self.counts.iter_mut().zip(other.counts) {
            *a += b;
        }
        self.samples += other.samples;
        self
    }

    /// Empirical `P(T ⊆ A)` for every audited set, with its Wilson interval.
    pub fn entries(&self) -> impl Iterator<Item = AuditEntry> + '_ {
        self.counts.iter().enumerate().map(move |(i, &c)| {
            let (lo, hi) = wilson_interval(c, self.samples, Z95);
            AuditEntry {
                set: self.index.unrank(i),
                count: c,
                p_hat: c as f64 / self.samples.max(1) as f64,
                ci_low: lo,
                ci_high: hi,
            }
        })
    }

    /// Checks `P(T ⊆ A) <= δ^|T| + slack_widths · (Wilson half-width)` for every audited `T`.
    pub fn check_against(&self, delta: f64, slack_widths: f64) -> AuditReport {
        let mut worst: Option<AuditEntry> = None;
        let mut worst_excess = f64::NEG_INFINITY;
        let mut pass = true;
        for e in self.entries() {
            let bound = delta.powi(e.set.len() as i32);
            let half = (e.ci_high - e.ci_low) / 2.0;
            let excess = e.p_hat - bound - slack_widths * half;
            if excess > 0.0 {
                pass = false;
            }
            if excess > worst_excess {
                worst_excess = excess;
                worst = Some(e);
            }
        }
        AuditReport {
            pass,
            worst,
            worst_excess,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AuditEntry {
    pub set: Vec<usize>,
    pub count: u64,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

#[derive(Clone, Debug)]
pub struct AuditReport {
    pub pass: bool,
    pub worst: Option<AuditEntry>,
    /// Largest `p_hat - bound - slack` over all sets; positive means failure.
    pub worst_excess: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LocalStochasticEstimate {
    /// `max_T P̂(T ⊆ A)^(1/|T|)`.
    pub delta_hat: f64,
    /// Same maximum taken over Wilson upper bounds.
    pub delta_upper: f64,
    pub argmax: Vec<usize>,
}

/// Empirical local stochastic parameter of a set of sampled supports.
pub fn estimate_local_stochastic_parameter(audit: &SupportAudit) -> Result<LocalStochasticEstimate> {
    if audit.samples < MIN_AUDIT_SAMPLES {
        return Err(Error::InsufficientSamples {
            got: audit.samples as usize,
            need: MIN_AUDIT_SAMPLES as usize,
        });
    }
    let mut best = LocalStochasticEstimate {
        delta_hat: 0.0,
        delta_upper: 0.0,
        argmax: Vec::new(),
    };
    for e in audit.entries() {
        let inv = 1.0 / e.set.len() as f64;
        let d = e.p_hat.powf(inv);
        if d > best.delta_hat {
            best.delta_hat = d;
            best.argmax = e.set.clone();
        }
        best.delta_upper = best.delta_upper.max(e.ci_high.powf(inv));
    }
    Ok(best)
}

/// Audits a stream of supports in one call.
pub fn audit_supports<'a>(
    n: usize,
    max_t: usize,
    supports: impl IntoIterator<Item = &'a [usize]>,
) -> Result<SupportAudit> {
    let mut audit = SupportAudit::new(n, max_t)?;
    for s in supports {
        audit.add(s);
    }
    Ok(audit)
}

/// `ln C(n, j)` for all `j in 0..=n`, built incrementally.
fn ln_binomials(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = 0.0f64;
    out.push(0.0);
    for j in 1..=n {
        acc += ((n - j + 1) as f64).ln() - (j as f64).ln();
        out.push(acc);
    }
    out
}

/// `Σ_{j>t}^{n} C(n, j) δ^j`, summed in the log domain.
pub fn tail_sum(n: usize, delta: f64, t: usize) -> Result<f64> {
    if n > 10_000 {
        return Err(Error::InvalidParameter(format!("n = {n} exceeds 10^4")));
    }
    if !(0.0..=1.0).contains(&delta) {
        return Err(Error::InvalidParameter(format!("delta {delta} outside [0, 1]")));
    }
    if t >= n || delta == 0.0 {
        return Ok(0.0);
    }
    let lnb = ln_binomials(n);
    let ld = delta.ln();
    let logs: Vec<f64> = (t + 1..=n).map(|j| lnb[j] + j as f64 * ld).collect();
    let m = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let s: f64 = logs.iter().map(|l| (l - m).exp()).sum();
    Ok(m.exp() * s)
}

/// Truncation weight `t = ⌈5nδ/(1+δ)⌉` and tail bound `exp(-nδ/3)`.
pub fn adversarial_truncation(n: usize, delta: f64) -> (usize, f64) {
    let nf = n as f64;
    let x = 5.0 * nf * delta / (1.0 + delta);
    // Guard against values a rounding error above an integer.
    let t = (x - 1e-9 * x.max(1.0)).ceil().max(0.0) as usize;
    (t, (-nf * delta / 3.0).exp())
}
