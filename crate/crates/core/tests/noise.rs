use proptest::prelude::*;

use ftqlab::noise::{
    adversarial_truncation, audit_supports, compose_parameter, estimate_local_stochastic_parameter, sample_iid_pauli,
    sample_local_stochastic_cluster, tail_sum, NoiseSpec, SupportAudit,
};
use ftqlab::stats::stream_rng;

/// `Σ_{j>t} C(n, j) δ^j` with binomials built by the multiplicative recurrence.
fn direct_tail(n: usize, delta: f64, t: usize) -> f64 {
    let mut c = 1.0f64;
    let mut sum = 0.0;
    for j in 0..=n {
        if j > 0 {
            c = c * (n - j + 1) as f64 / j as f64;
        }
        if j > t {
            sum += c * delta.powi(j as i32);
        }
    }
    sum
}

proptest! {
    #[test]
    fn tail_sum_matches_direct_sum(n in 1usize..120, delta in 0.0f64..1.0, t in 0usize..120) {
        let a = tail_sum(n, delta, t).unwrap();
        let b = direct_tail(n, delta, t);
        prop_assert!((a - b).abs() <= 1e-10 * b.max(1e-300), "{} vs {}", a, b);
    }
}

#[test]
fn tail_sum_examples_and_errors() {
    assert!((tail_sum(4, 0.5, 2).unwrap() - 0.5625).abs() < 1e-15);
    assert_eq!(tail_sum(10, 0.3, 10).unwrap(), 0.0);
    assert!(tail_sum(10, 1.5, 2).is_err());
    assert!(tail_sum(20_000, 0.1, 2).is_err());
}

#[test]
fn truncation_grid_stays_under_exponential() {
    for n in [50, 100, 200, 400] {
        for delta in [0.02, 0.05, 0.1] {
            if (n as f64) * delta < 1.0 {
                continue;
            }
            let (t, bound) = adversarial_truncation(n, delta);
            assert!(tail_sum(n, delta, t).unwrap() <= bound, "n={n} delta={delta}");
        }
    }
    let (t, b) = adversarial_truncation(100, 0.05);
    assert_eq!(t, 24);
    assert!((b - (-5.0f64 / 3.0).exp()).abs() < 1e-15);
}

fn iid_audit(n: usize, delta: f64, samples: u64, seed: u64) -> SupportAudit {
    let mut audit = SupportAudit::new(n, 3).unwrap();
    for i in 0..samples {
        let s = sample_iid_pauli(n, delta, &mut stream_rng(seed, i));
        audit.add(&s.pauli.support());
    }
    audit
}

#[test]
fn iid_sampler_passes_its_own_audit() {
    let audit = iid_audit(20, 0.1, 1_000_000, 3);
    assert!(audit.check_against(0.1, 4.0).pass);
    let est = estimate_local_stochastic_parameter(&audit).unwrap();
    assert!((0.09..=0.11).contains(&est.delta_hat), "{est:?}");
    assert!(!audit.check_against(0.08, 4.0).pass);
}

#[test]
fn merged_audits_equal_one_pass() {
    let whole = iid_audit(10, 0.2, 4000, 8);
    let mut a = SupportAudit::new(10, 3).unwrap();
    let mut b = SupportAudit::new(10, 3).unwrap();
    for i in 0..4000 {
        let s = sample_iid_pauli(10, 0.2, &mut stream_rng(8, i)).pauli.support();
        if i % 3 == 0 {
            a.add(&s)
        } else {
            b.add(&s)
        }
    }
    let merged = b.merge(a);
    assert_eq!(merged.samples(), whole.samples());
    assert!(merged.entries().eq(whole.entries()));
}

#[test]
fn composed_iid_audits_at_summed_parameter() {
    let mut audit = SupportAudit::new(20, 3).unwrap();
    for i in 0..100_000 {
        let mut rng = stream_rng(12, i);
        let a = sample_iid_pauli(20, 0.01, &mut rng);
        let b = sample_iid_pauli(20, 0.02, &mut rng);
        audit.add(&a.compose(&b).unwrap().pauli.support());
    }
    assert!(audit.check_against(compose_parameter(0.01, 0.02), 4.0).pass);
}

/// Exact `P(T ⊆ A)` for the ring cluster sampler: sum over seed patterns on
/// `T` and its neighbours; given the seeds, sites of `T` are covered
/// independently.
fn exact_cluster_inclusion(n: usize, delta: f64, spread: f64, t: &[usize]) -> f64 {
    let nb = |i: usize| [(i + n - 1) % n, (i + 1) % n];
    let mut rel: Vec<usize> = t.iter().flat_map(|&i| [i, nb(i)[0], nb(i)[1]]).collect();
    rel.sort_unstable();
    rel.dedup();
    let mut total = 0.0;
    for mask in 0u32..1 << rel.len() {
        let seeded = |i: usize| rel.iter().position(|&r| r == i).is_some_and(|k| (mask >> k) & 1 == 1);
        let mut p: f64 = (0..rel.len())
            .map(|k| if (mask >> k) & 1 == 1 { delta } else { 1.0 - delta })
            .product();
        for &i in t {
            if !seeded(i) {
                let k = nb(i).iter().filter(|&&j| seeded(j)).count() as i32;
                p *= 1.0 - (1.0 - spread).powi(k);
            }
        }
        total += p;
    }
    total
}

#[test]
fn cluster_sampler_matches_exact_inclusion() {
    let (n, delta, spread) = (20, 0.05, 0.3);
    let supports: Vec<Vec<usize>> = (0..200_000)
        .map(|i| {
            sample_local_stochastic_cluster(n, delta, spread, &mut stream_rng(21, i))
                .pauli
                .support()
        })
        .collect();
    let audit = audit_supports(n, 3, supports.iter().map(|s| s.as_slice())).unwrap();
    let mut sup = 0.0f64;
    for e in audit.entries() {
        let exact = exact_cluster_inclusion(n, delta, spread, &e.set);
        let half = (e.ci_high - e.ci_low) / 2.0;
        assert!(
            (e.p_hat - exact).abs() <= 4.0 * half + 1e-12,
            "{:?}: {} vs {exact}",
            e.set,
            e.p_hat
        );
        sup = sup.max(exact.powf(1.0 / e.set.len() as f64));
    }
    let est = estimate_local_stochastic_parameter(&audit).unwrap();
    assert!((est.delta_hat - sup).abs() < 0.01, "{est:?} vs {sup}");
    assert!(est.delta_upper >= sup);
}

#[test]
fn zero_spread_cluster_is_iid() {
    for i in 0..200 {
        let a = sample_local_stochastic_cluster(15, 0.2, 0.0, &mut stream_rng(2, i));
        assert!(a.support.len() == a.pauli.weight());
    }
    let supports: Vec<Vec<usize>> = (0..20_000)
        .map(|i| sample_local_stochastic_cluster(15, 0.2, 0.0, &mut stream_rng(2, i)).support)
        .collect();
    let audit = audit_supports(15, 2, supports.iter().map(|s| s.as_slice())).unwrap();
    assert!(audit.check_against(0.2, 4.0).pass);
}

#[test]
fn mean_support_size_is_n_delta() {
    let n = 20;
    let trials = 100_000u64;
    let total: usize = (0..trials)
        .map(|i| sample_iid_pauli(n, 0.1, &mut stream_rng(4, i)).pauli.weight())
        .sum();
    let mean = total as f64 / trials as f64;
    let sigma = (n as f64 * 0.1 * 0.9 / trials as f64).sqrt();
    assert!((mean - 2.0).abs() <= 3.0 * sigma, "{mean}");
}

#[test]
fn samplers_are_reproducible() {
    let spec = NoiseSpec::cluster(0.05, 0.3).unwrap();
    for i in 0..50 {
        let a = spec.sample(30, &mut stream_rng(99, i));
        let b = spec.sample(30, &mut stream_rng(99, i));
        assert_eq!(a.pauli, b.pauli);
    }
    assert!(NoiseSpec::iid(1.5).is_err());
}
