//! Subcommand runners. Each returns the artifact text, one summary line per
//! experiment row and whether every acceptance predicate of the run held.

use std::sync::Arc;

use rayon::prelude::*;
use serde_json::{json, Value as Json};
use thiserror::Error;

use ftqlab::channel::{golden_cases, run_golden_case, GoldenCase};
use ftqlab::codes::load_shipped;
use ftqlab::decoder::LookupDecoder;
use ftqlab::ft::rec::{
    build_rec, classify_fault_path, nontrivial_paulis, sweep_single_faults, Rec, RecChecker, RecGate, RecPath, Verdict,
};
use ftqlab::ft::FaultPath;
use ftqlab::noise::{adversarial_truncation, sample_location_fault, tail_sum};
use ftqlab::singleshot::{build_syndrome_extraction, memory_experiment};
use ftqlab::stats::stream_rng;
use ftqlab::teleport::{gate_set, verify_logical_action, AncillaSpec, CorrectionTable, Teleporter};
use ftqlab::toric::{bound_zeta, estimate_logical_failure, CommExperimentConfig};
use ftqlab::{CssCode, Pauli1, PauliOp};

use crate::config::{ConfigError, RunConfig};

pub const VERSION: &str = concat!("ftqlab ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] ftqlab::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl RunError {
    /// 2 for usage and configuration errors, 3 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            _ => 3,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub format: Format,
    pub text: String,
    pub summaries: Vec<String>,
    pub passed: bool,
}

/// Reals in CSV output: 17 significant digits.
pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

fn invalid(key: &str, reason: impl Into<String>) -> RunError {
    ConfigError::Invalid {
        key: key.to_string(),
        reason: reason.into(),
    }
    .into()
}

fn load_code(cfg: &RunConfig) -> Result<CssCode, RunError> {
    load_shipped(cfg.str("code")).map_err(|e| invalid("code", e.to_string()))
}

fn check_rate(key: &str, v: f64) -> Result<(), RunError> {
    if !(0.0..1.0).contains(&v) {
        return Err(invalid(key, format!("{v} outside [0, 1)")));
    }
    Ok(())
}

struct CsvOut {
    w: csv::Writer<Vec<u8>>,
    tail: [String; 2],
}

impl CsvOut {
    fn new(cfg: &RunConfig, header: &[&str]) -> Result<Self, RunError> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        let mut h: Vec<&str> = header.to_vec();
        h.extend(["seed", "streams", "version", "config"]);
        w.write_record(&h)?;
        Ok(Self {
            w,
            tail: [VERSION.to_string(), cfg.to_json().to_string()],
        })
    }

    fn row(&mut self, cfg: &RunConfig, fields: Vec<String>, streams: &str) -> Result<(), RunError> {
        let mut r = fields;
        r.push(cfg.seed.to_string());
        r.push(streams.to_string());
        r.extend(self.tail.iter().cloned());
        self.w.write_record(&r)?;
        Ok(())
    }

    fn finish(self) -> Result<String, RunError> {
        let bytes = self.w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv of utf-8 fields"))
    }
}

fn json_record(cfg: &RunConfig, passed: bool, body: Json) -> Result<String, RunError> {
    let mut rec = json!({
        "version": VERSION,
        "config": cfg.to_json(),
        "passed": passed,
    });
    if let (Json::Object(r), Json::Object(b)) = (&mut rec, body) {
        r.extend(b);
    }
    Ok(serde_json::to_string_pretty(&rec)? + "\n")
}

pub fn run(cfg: &RunConfig) -> Result<Outcome, RunError> {
    match cfg.command {
        "rep-check" => rep_check(cfg),
        "noise-bounds" => noise_bounds(cfg),
        "toric-comm" => toric_comm(cfg),
        "rec-sim" => rec_sim(cfg),
        "teleport-verify" => teleport_verify(cfg),
        "single-shot" => single_shot(cfg),
        other => Err(ConfigError::UnknownCommand(other.to_string()).into()),
    }
}

fn rep_check(cfg: &RunConfig) -> Result<Outcome, RunError> {
    let cases: Vec<GoldenCase> = match cfg.str("golden") {
        "shipped" => golden_cases()?,
        path => {
            let text = std::fs::read_to_string(path).map_err(|e| invalid("golden", format!("{path}: {e}")))?;
            serde_json::from_str(&text).map_err(|e| invalid("golden", format!("{path}: {e}")))?
        }
    };
    let mut records = Vec::new();
    let mut summaries = Vec::new();
    let mut passed = true;
    for case in &cases {
        let rep = run_golden_case(case)?;
        let ok = rep.passes(case.expected_residual_max);
        passed &= ok;
        summaries.push(format!(
            "rep-check {} {}: max residual {:.3e} (tol {:.1e}) {}",
            case.code_id,
            case.channel_kind,
            rep.max_residual(),
            case.expected_residual_max,
            if ok { "pass" } else { "FAIL" }
        ));
        let bounds = |b: &ftqlab::channel::DistanceBounds| json!({"lower": b.lower, "upper": b.upper});
        records.push(json!({
            "code_id": case.code_id,
            "channel_kind": case.channel_kind,
            "error_basis": case.error_basis,
            "expected_residual_max": case.expected_residual_max,
            "comm1": bounds(&rep.comm1),
            "comm2": bounds(&rep.comm2),
            "comm3": bounds(&rep.comm3),
            "r_is_channel": rep.r_is_channel,
            "s_is_channel": rep.s_is_channel,
            "passed": ok,
        }));
    }
    Ok(Outcome {
        format: Format::Json,
        text: json_record(cfg, passed, json!({ "cases": records }))?,
        summaries,
        passed,
    })
}

fn noise_bounds(cfg: &RunConfig) -> Result<Outcome, RunError> {
    let mut ns = cfg.ints("n").to_vec();
    let mut deltas = cfg.reals("delta").to_vec();
    for &d in &deltas {
        check_rate("delta", d)?;
    }
    for &n in &ns {
        if n == 0 || n > 10_000 {
            return Err(invalid("n", format!("{n} outside 1..=10000")));
        }
    }
    ns.sort_unstable();
    ns.dedup();
    deltas.sort_by(f64::total_cmp);
    deltas.dedup();
    let mut out = CsvOut::new(cfg, &["n", "delta", "t", "tail_sum", "chernoff_bound", "pass"])?;
    let mut summaries = Vec::new();
    let mut passed = true;
    for &n in &ns {
        for &delta in &deltas {
            let (t, bound) = adversarial_truncation(n as usize, delta);
            let tail = tail_sum(n as usize, delta, t)?;
            let ok = tail <= bound;
            passed &= ok;
            summaries.push(format!(
                "noise-bounds n={n} delta={delta}: t={t} tail={tail:.3e} bound={bound:.3e} {}",
                if ok { "pass" } else { "FAIL" }
            ));
            out.row(
                cfg,
                vec![
                    n.to_string(),
                    fmt_real(delta),
                    t.to_string(),
                    fmt_real(tail),
                    fmt_real(bound),
                    ok.to_string(),
                ],
                "none",
            )?;
        }
    }
    Ok(Outcome {
        format: Format::Csv,
        text: out.finish()?,
        summaries,
        passed,
    })
}

fn toric_comm(cfg: &RunConfig) -> Result<Outcome, RunError> {
    let trials = cfg.int("trials");
    if trials < 100 {
        return Err(invalid("trials", format!("{trials} < 100")));
    }
    let (nu, dp, spread) = (cfg.real("nu"), cfg.real("delta-prime"), cfg.real("spread"));
    check_rate("nu", nu)?;
    check_rate("delta-prime", dp)?;
    check_rate("spread", spread)?;
    let mut ls = cfg.ints("L").to_vec();
    ls.sort_unstable();
    ls.dedup();
    if let Some(&l) = ls.iter().find(|&&l| l < 2 || l > 64) {
        return Err(invalid("L", format!("{l} outside 2..=64")));
    }
    let mut out = CsvOut::new(
        cfg,
        &[
            "L",
            "nu",
            "delta_prime",
            "alpha_eff",
            "trials",
            "failures",
            "rate",
            "ci_low",
            "ci_high",
            "zeta_bound",
            "pass",
        ],
    )?;
    let mut summaries = Vec::new();
    let mut passed = true;
    let mut prev: Option<(u64, f64)> = None;
    for &l in &ls {
        let mut c = CommExperimentConfig::new(l as usize, nu, dp, trials, cfg.seed);
        c.spread = spread;
        let est = estimate_logical_failure(&c)?;
        // The bound is only claimed for alpha <= 1/36; above that it is vacuous.
        let zeta = bound_zeta(l as usize, c.alpha_eff()).unwrap_or(f64::INFINITY);
        let ok = zeta >= 1.0 || est.ci_high <= zeta;
        passed &= ok;
        summaries.push(format!(
            "toric-comm L={l} alpha={:.3e}: {}/{} failures, rate {:.3e} [{:.3e}, {:.3e}], zeta {:.3e} {}",
            c.alpha_eff(),
            est.failures,
            est.trials,
            est.rate,
            est.ci_low,
            est.ci_high,
            zeta,
            if ok { "pass" } else { "FAIL" }
        ));
        if let Some((pl, hi)) = prev {
            if est.ci_low > hi {
                passed = false;
                summaries.push(format!("toric-comm: rate at L={l} exceeds the interval at L={pl}"));
            }
        }
        prev = Some((l, est.ci_high));
        out.row(
            cfg,
            vec![
                l.to_string(),
                fmt_real(nu),
                fmt_real(dp),
                fmt_real(c.alpha_eff()),
                est.trials.to_string(),
                est.failures.to_string(),
                fmt_real(est.rate),
                fmt_real(est.ci_low),
                fmt_real(est.ci_high),
                fmt_real(zeta),
                ok.to_string(),
            ],
            &format!("0..{trials}"),
        )?;
    }
    Ok(Outcome {
        format: Format::Csv,
        text: out.finish()?,
        summaries,
        passed,
    })
}

fn witness_json(addrs: &[(Vec<usize>, String)], good: bool) -> Json {
    json!({
        "good": good,
        "faults": addrs.iter().map(|(a, p)| json!({"location": a, "pauli": p})).collect::<Vec<_>>(),
    })
}

/// Smallest X-type or Z-type nontrivial logical of weight at most `w`, if
/// one exists. `None` also when the search would exceed `budget` supports.
fn short_logical(code: &CssCode, w: usize, budget: u64) -> Result<Option<PauliOp>, RunError> {
    let n = code.n();
    let mut count = 1u64;
    let mut c = 1u64;
    for k in 1..=w.min(n) {
        c = c.saturating_mul((n - k + 1) as u64) / k as u64;
        count = count.saturating_add(c);
    }
    if count.saturating_mul(2) > budget {
        return Ok(None);
    }
    fn walk(
        code: &CssCode,
        p: Pauli1,
        support: &mut Vec<usize>,
        from: usize,
        left: usize,
    ) -> Result<Option<PauliOp>, RunError> {
        if !support.is_empty() {
            let mut e = PauliOp::identity(code.n());
            for &q in support.iter() {
                e.set(q, p);
            }
            if code.syndrome(&e)?.is_zero() && !code.logical_class(&e)?.is_trivial() {
                return Ok(Some(e));
            }
        }
        if left == 0 {
            return Ok(None);
        }
        for q in from..code.n() {
            support.push(q);
            let hit = walk(code, p, support, q + 1, left - 1)?;
            support.pop();
            if hit.is_some() {
                return Ok(hit);
            }
        }
        Ok(None)
    }
    for p in [Pauli1::X, Pauli1::Z] {
        if let Some(e) = walk(code, p, &mut Vec::new(), 0, w)? {
            return Ok(Some(e));
        }
    }
    Ok(None)
}

fn rec_sim(cfg: &RunConfig) -> Result<Outcome, RunError> {
    let code = load_code(cfg)?;
    let t = cfg.int("t") as usize;
    if let Some(l) = short_logical(&code, 2 * t, 1 << 22)? {
        return Err(invalid(
            "t",
            format!(
                "{} cannot correct weight {t}: logical {l} has weight {}",
                code.name(),
                l.weight()
            ),
        ));
    }
    let level = cfg.int("level") as usize;
    if !(1..=2).contains(&level) {
        return Err(invalid("level", format!("{level} not in {{1, 2}}")));
    }
    let sweep = cfg.str("sweep");
    if !matches!(sweep, "single-fault-exhaustive" | "monte-carlo") {
        return Err(invalid("sweep", format!("unknown sweep {sweep:?}")));
    }
    let delta = cfg.real("delta");
    check_rate("delta", delta)?;
    let trials = cfg.int("trials");
    let keep = cfg.int("witnesses") as usize;
    let gates = cfg
        .strs("gate")
        .iter()
        .map(|g| g.parse::<RecGate>().map_err(|e| invalid("gate", e.to_string())))
        .collect::<Result<Vec<_>, _>>()?;
    let cap = (t + 1) * (t + 1);

    let mut reports = Vec::new();
    let mut summaries = Vec::new();
    let mut passed = true;
    for gate in gates {
        let rec = build_rec(gate, &code, t, level)?;
        let rep = match (&rec, sweep) {
            (Rec::One(r), "single-fault-exhaustive") => {
                let s = sweep_single_faults(r)?;
                let witnesses: Vec<Json> = s
                    .failures
                    .iter()
                    .take(keep)
                    .map(|(loc, p)| witness_json(&[(vec![*loc], p.to_label())], true))
                    .collect();
                let ok = s.passed == s.paths && s.max_rounds <= cap;
                json!({
                    "total_paths": s.paths, "good": s.paths, "bad": 0,
                    "correct_given_good": s.passed, "correctness_checked": true,
                    "max_rounds": s.max_rounds, "round_cap": cap,
                    "max_ec_output_weight": s.max_ec_output_weight,
                    "passed": ok, "witnesses": witnesses,
                })
            }
            (Rec::One(r), _) => {
                let checker = RecChecker::new(r);
                let locs: Vec<(usize, usize)> = r.circuit.quantum_locations().map(|l| (l.id, l.qubits.len())).collect();
                let results = (0..trials)
                    .into_par_iter()
                    .map(|i| -> Result<_, RunError> {
                        let mut rng = stream_rng(cfg.seed, i);
                        let mut path = FaultPath::empty();
                        for &(id, arity) in &locs {
                            if let Some(p) = sample_location_fault(arity, delta, &mut rng) {
                                path.insert(id, p);
                            }
                        }
                        let good = classify_fault_path(&rec, &RecPath::from_fault_path(&path))? == Verdict::Good;
                        let c = checker.check(&path)?;
                        Ok((good, c.correct, c.max_rounds, path))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                let good = results.iter().filter(|r| r.0).count();
                let correct_good = results.iter().filter(|r| r.0 && r.1).count();
                let max_rounds = results.iter().map(|r| r.2).max().unwrap_or(0);
                let witnesses: Vec<Json> = results
                    .iter()
                    .filter(|r| !r.1)
                    .take(keep)
                    .map(|r| {
                        let f: Vec<(Vec<usize>, String)> =
                            r.3.faults.iter().map(|(l, p)| (vec![*l], p.to_label())).collect();
                        witness_json(&f, r.0)
                    })
                    .collect();
                let ok = correct_good == good && max_rounds <= cap;
                json!({
                    "total_paths": trials, "good": good, "bad": trials as usize - good,
                    "correct_given_good": correct_good, "correctness_checked": true,
                    "correct_given_bad": results.iter().filter(|r| !r.0 && r.1).count(),
                    "max_rounds": max_rounds, "round_cap": cap,
                    "passed": ok, "witnesses": witnesses,
                })
            }
            (Rec::Two(r), _) => {
                // Level two is classified but not simulated for correctness.
                let inner_locs = |g: &RecGate| -> Vec<(usize, usize)> {
                    r.inner[g]
                        .circuit
                        .quantum_locations()
                        .map(|l| (l.id, l.qubits.len()))
                        .collect()
                };
                let (total, good) = if sweep == "single-fault-exhaustive" {
                    let total: usize = r
                        .subs
                        .values()
                        .map(|g| {
                            inner_locs(g)
                                .iter()
                                .map(|&(_, a)| nontrivial_paulis(a).len())
                                .sum::<usize>()
                        })
                        .sum();
                    (total, total)
                } else {
                    let goods = (0..trials)
                        .into_par_iter()
                        .map(|i| -> Result<bool, RunError> {
                            let mut rng = stream_rng(cfg.seed, i);
                            let mut path = RecPath::default();
                            for (&outer, g) in &r.subs {
                                for (id, arity) in inner_locs(g) {
                                    if let Some(p) = sample_location_fault(arity, delta, &mut rng) {
                                        path.insert(vec![outer, id], p);
                                    }
                                }
                            }
                            Ok(classify_fault_path(&rec, &path)? == Verdict::Good)
                        })
                        .collect::<Result<Vec<_>, _>>()?;
                    (trials as usize, goods.iter().filter(|&&g| g).count())
                };
                json!({
                    "total_paths": total, "good": good, "bad": total - good,
                    "correct_given_good": Json::Null, "correctness_checked": false,
                    "size": rec.size(), "passed": true, "witnesses": [],
                })
            }
        };
        let ok = rep["passed"].as_bool().unwrap_or(false);
        passed &= ok;
        summaries.push(format!(
            "rec-sim {} level {level} {sweep}: {} paths, {} good, {} correct given good {}",
            gate.name(),
            rep["total_paths"],
            rep["good"],
            rep["correct_given_good"],
            if ok { "pass" } else { "FAIL" }
        ));
        let mut rep = rep;
        rep["gate"] = json!(gate.name());
        rep["level"] = json!(level);
        rep["sweep"] = json!(sweep);
        reports.push(rep);
    }
    Ok(Outcome {
        format: Format::Json,
        text: json_record(cfg, passed, json!({ "reports": reports }))?,
        summaries,
        passed,
    })
}

fn teleport_verify(cfg: &RunConfig) -> Result<Outcome, RunError> {
    let code = Arc::new(load_code(cfg)?);
    if code.k() != 2 {
        return Err(invalid(
            "code",
            format!("needs two logical qubits, {} has {}", code.name(), code.k()),
        ));
    }
    let gates = gate_set(cfg.str("gate-set"), 2).map_err(|e| invalid("gate-set", e.to_string()))?;
    let table = match cfg.str("table") {
        "standard" => CorrectionTable::Standard,
        "swapped" => CorrectionTable::Swapped,
        other => return Err(invalid("table", format!("unknown table {other:?}"))),
    };
    let trials = cfg.int("trials") as usize;
    let reports = gates
        .into_par_iter()
        .map(|(name, u)| -> Result<_, RunError> {
            let tp = Teleporter::new(AncillaSpec::new(code.clone(), u)?)?;
            Ok((name, verify_logical_action(&tp, trials, cfg.seed, table)?))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut passed = true;
    let mut summaries = Vec::new();
    let mut rows = Vec::new();
    let mut witnesses = Vec::new();
    for (name, rep) in reports {
        passed &= rep.passed;
        summaries.push(format!(
            "teleport-verify {name}: {} inputs, {} runs, min branches {}/16 {}",
            rep.inputs,
            rep.runs,
            rep.min_branches,
            if rep.passed { "pass" } else { "FAIL" }
        ));
        if let Some(w) = &rep.witness {
            let mut w = serde_json::to_value(w)?;
            w["gate"] = json!(name);
            witnesses.push(w);
        }
        rows.push(json!({
            "gate": name, "passed": rep.passed, "inputs": rep.inputs, "runs": rep.runs,
            "min_branches": rep.min_branches, "branches": rep.branches,
        }));
    }
    Ok(Outcome {
        format: Format::Json,
        text: json_record(cfg, passed, json!({ "gates": rows, "witnesses": witnesses }))?,
        summaries,
        passed,
    })
}

fn single_shot(cfg: &RunConfig) -> Result<Outcome, RunError> {
    let code = Arc::new(load_code(cfg)?);
    let decoder = match cfg.str("decoder") {
        "full" => LookupDecoder::with_syndrome_errors(&code),
        "reduced" => LookupDecoder::for_code(&code),
        other => return Err(invalid("decoder", format!("unknown decoder {other:?}"))),
    }
    .map_err(|e| invalid("decoder", e.to_string()))?;
    let sc = build_syndrome_extraction(code.clone())?;
    let mut deltas = cfg.reals("delta").to_vec();
    for &d in &deltas {
        if !(0.0..=1.0).contains(&d) {
            return Err(invalid("delta", format!("{d} outside [0, 1]")));
        }
    }
    deltas.sort_by(f64::total_cmp);
    deltas.dedup();
    let (rounds, trials) = (cfg.int("rounds") as usize, cfg.int("trials"));
    if trials == 0 || rounds == 0 {
        return Err(invalid(
            if trials == 0 { "trials" } else { "rounds" },
            "must be positive",
        ));
    }
    let min_survival = cfg.real("min-survival");
    let heavy = cfg.int("heavy-weight") as usize;
    let mut out = CsvOut::new(
        cfg,
        &[
            "delta",
            "round",
            "survival",
            "ci_low",
            "ci_high",
            "mean_reduced_weight",
            "ever_heavy",
            "pass",
        ],
    )?;
    let mut summaries = Vec::new();
    let mut passed = true;
    let mut prev: Option<ftqlab::singleshot::MemoryCurve> = None;
    for &delta in &deltas {
        let curve = memory_experiment(&sc, &decoder, delta, rounds, trials, cfg.seed, heavy)?;
        for row in &curve.rows {
            let ok = row.survival >= min_survival;
            passed &= ok;
            out.row(
                cfg,
                vec![
                    fmt_real(delta),
                    row.round.to_string(),
                    fmt_real(row.survival),
                    fmt_real(row.ci_low),
                    fmt_real(row.ci_high),
                    fmt_real(row.mean_reduced_weight),
                    fmt_real(row.ever_heavy),
                    ok.to_string(),
                ],
                &format!("0..{trials}"),
            )?;
        }
        let last = curve.rows.last().expect("rounds > 0");
        summaries.push(format!(
            "single-shot delta={delta}: survival after {} rounds {:.4} [{:.4}, {:.4}], ever heavy {:.4} {}",
            last.round,
            last.survival,
            last.ci_low,
            last.ci_high,
            last.ever_heavy,
            if last.survival >= min_survival { "pass" } else { "FAIL" }
        ));
        if let Some(p) = &prev {
            let broken = p.rows.iter().zip(&curve.rows).find(|(a, b)| a.ci_high < b.ci_low);
            if let Some((a, _)) = broken {
                passed = false;
                summaries.push(format!(
                    "single-shot: survival at delta={delta} exceeds delta={} at round {}",
                    p.delta, a.round
                ));
            }
        }
        prev = Some(curve);
    }
    Ok(Outcome {
        format: Format::Csv,
        text: out.finish()?,
        summaries,
        passed,
    })
}
