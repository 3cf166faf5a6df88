use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::Path;

use aomsim::dsl::{compile, parse};
use aomsim::{run_ghz_with, run_swap, Convention, GhzConfig, HeraldOutcome};

use crate::fmt::sig12;
use crate::report::{distribution, CircuitId, RunReport, Validity};

/// A failed command: message for stderr plus process exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    /// Bad input: malformed circuit, bad arguments. Exit code 2.
    pub fn input(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into() }
    }

    /// Everything else. Exit code 1.
    pub fn runtime(message: impl Into<String>) -> Self {
        Failure { code: 1, message: message.into() }
    }
}

impl From<aomsim::Error> for Failure {
    fn from(e: aomsim::Error) -> Self {
        Failure::runtime(e.to_string())
    }
}

pub type CmdResult = Result<(), Failure>;

/// Where the JSON report goes, if anywhere.
#[derive(Debug, Clone, Default)]
pub struct JsonOpts {
    pub target: Option<String>,
    pub pretty: bool,
}

fn emit(out: &mut dyn Write, human: &str, report: &RunReport, json: &JsonOpts) -> CmdResult {
    let io = |e: std::io::Error| Failure::runtime(format!("write failed: {e}"));
    match json.target.as_deref() {
        Some("-") => out.write_all(report.to_json(json.pretty).as_bytes()).map_err(io),
        Some(path) => {
            out.write_all(human.as_bytes()).map_err(io)?;
            fs::write(path, report.to_json(json.pretty))
                .map_err(|e| Failure::runtime(format!("cannot write {path}: {e}")))
        }
        None => out.write_all(human.as_bytes()).map_err(io),
    }
}

fn outcome_table(out: &mut String, outcomes: &[HeraldOutcome]) {
    let metric_names: Vec<String> = {
        let mut names: Vec<String> = outcomes.iter().flat_map(|o| o.metrics.keys().cloned()).collect();
        names.sort();
        names.dedup();
        names
    };
    let w = outcomes.iter().map(|o| o.label.len()).max().unwrap_or(0).max("outcome".len());
    write!(out, "{:<w$}  {:>11}", "outcome", "probability").unwrap();
    for m in &metric_names {
        write!(out, "  {m:>13}").unwrap();
    }
    out.push('\n');
    for o in outcomes {
        write!(out, "{:<w$}  {:>11.6}", o.label, o.probability).unwrap();
        for m in &metric_names {
            match o.metrics.get(m) {
                Some(v) => write!(out, "  {v:>13.6}").unwrap(),
                None => write!(out, "  {:>13}", "-").unwrap(),
            }
        }
        out.push('\n');
    }
}

/// `run FILE`: parse, compile and execute a circuit file.
pub fn run_file(out: &mut dyn Write, file: &Path, convention: Option<Convention>, json: &JsonOpts) -> CmdResult {
    let text = fs::read_to_string(file)
        .map_err(|e| Failure::runtime(format!("cannot read {}: {e}", file.display())))?;
    let ast = parse(&text).map_err(|errs| {
        let lines: Vec<String> = errs.iter().map(|e| format!("{}: {e}", file.display())).collect();
        Failure::input(lines.join("\n"))
    })?;
    let mut pipeline = compile(&ast).map_err(|errs| {
        let lines: Vec<String> =
            errs.iter().map(|e| format!("{}: line {}: {}", file.display(), e.line, e.message)).collect();
        Failure::input(lines.join("\n"))
    })?;
    if let Some(c) = convention {
        pipeline = pipeline.with_convention(c)?;
    }
    let conv = match pipeline.conventions().len() {
        0 => "none".to_owned(),
        1 => pipeline.conventions().into_iter().next().unwrap().to_owned(),
        _ => "mixed".to_owned(),
    };
    let result = pipeline.execute()?;
    let ps = &result.post_selection;

    let name = file.file_name().map_or_else(|| file.display().to_string(), |n| n.to_string_lossy().into_owned());
    let mut human = String::new();
    writeln!(human, "circuit     {name}").unwrap();
    writeln!(human, "convention  {conv}").unwrap();
    outcome_table(&mut human, &ps.accepted);
    writeln!(human, "success probability {:.6}", ps.accepted_probability()).unwrap();
    writeln!(human, "discarded probability {:.6}", ps.discarded_probability).unwrap();
    if result.filter_survival < 1.0 {
        writeln!(human, "filter survival {:.6}", result.filter_survival).unwrap();
    }
    for d in &result.distributions {
        let paths: Vec<&str> = d.paths.iter().map(String::as_str).collect();
        writeln!(human, "outcomes over ({})", paths.join(",")).unwrap();
        for (pattern, p) in &d.probabilities {
            let label: Vec<String> = pattern.iter().map(|(k, v)| format!("{k}={v}")).collect();
            writeln!(human, "  {:<30} {p:.6}", label.join(",")).unwrap();
        }
    }
    match result.bandwidth_valid {
        Some(true) => writeln!(human, "bandwidth check: ok").unwrap(),
        Some(false) => writeln!(human, "bandwidth check: VIOLATED (pump narrower than a filter)").unwrap(),
        None => {}
    }
    if result.non_unitary {
        writeln!(human, "note: non-unitary convention, states renormalized").unwrap();
    }

    let mut report = RunReport::new(
        CircuitId { kind: "file".into(), name },
        &conv,
        ps,
        Validity { bandwidth: result.bandwidth_valid, non_unitary: result.non_unitary },
    )
    .metric("success_probability", ps.accepted_probability())
    .metric("filter_survival", result.filter_survival);
    report.distributions = result.distributions.iter().map(distribution).collect();
    emit(out, &human, &report, json)
}

fn check_alpha(alpha: f64) -> CmdResult {
    if alpha.is_finite() {
        Ok(())
    } else {
        Err(Failure::input(format!("alpha must be finite, got {alpha}")))
    }
}

/// `demo swap`.
pub fn demo_swap(out: &mut dyn Write, alpha: f64, convention: Convention, json: &JsonOpts) -> CmdResult {
    check_alpha(alpha)?;
    let r = run_swap(alpha, convention)?;
    let mut human = String::new();
    writeln!(human, "demo swap  alpha={alpha:.6}  convention={convention}").unwrap();
    outcome_table(&mut human, r.resolved());
    writeln!(human, "success probability {:.6}", r.success_probability).unwrap();
    for o in r.resolved() {
        let e = o.metrics.get(aomsim::experiments::SWAP_ENTROPY_METRIC).copied().unwrap_or(0.0);
        writeln!(human, "herald {}: probability {:.6}, entropy {e:.6}", o.label, o.probability).unwrap();
    }
    let mut report = RunReport::new(
        CircuitId { kind: "demo".into(), name: "swap".into() },
        convention.as_str(),
        &r.post_selection,
        Validity { bandwidth: None, non_unitary: r.evolved_state.is_non_unitary() },
    )
    .parameter("alpha", alpha)
    .metric("success_probability", r.success_probability);
    if let Some(f) = &r.unresolved {
        writeln!(
            human,
            "unresolved herald: sources-vs-outputs entropy {:.6}, bell fidelity {:.6}, output purity {:.6}",
            f.sources_vs_outputs_entropy, f.bell_fidelity, f.output_purity
        )
        .unwrap();
        report = report
            .metric("unresolved.sources_vs_outputs_entropy", f.sources_vs_outputs_entropy)
            .metric("unresolved.bell_fidelity", f.bell_fidelity)
            .metric("unresolved.output_purity", f.output_purity)
            .metric("unresolved.swapped_pair_entropy", f.swapped_pair_entropy);
    }
    if r.evolved_state.is_non_unitary() {
        writeln!(human, "note: non-unitary convention, states renormalized").unwrap();
    }
    emit(out, &human, &report, json)
}

/// `demo ghz`.
pub fn demo_ghz(out: &mut dyn Write, alpha: f64, convention: Convention, json: &JsonOpts) -> CmdResult {
    check_alpha(alpha)?;
    let cfg = GhzConfig::new(alpha, convention);
    let r = run_ghz_with(cfg)?;
    let mut human = String::new();
    writeln!(human, "demo ghz  alpha={alpha:.6}  convention={convention}").unwrap();
    outcome_table(&mut human, &r.post_selection.accepted);
    for d in &r.detectors {
        writeln!(human, "detector {}: probability {:.6}, ghz fidelity {:.6}", d.detector, d.probability, d.ghz_fidelity)
            .unwrap();
    }
    writeln!(human, "per-detector {:.6}, total {:.6}", r.per_detector_probability(), r.total_probability).unwrap();
    writeln!(human, "bandwidth check: {}", if r.bandwidth_valid { "ok" } else { "VIOLATED" }).unwrap();

    let mut report = RunReport::new(
        CircuitId { kind: "demo".into(), name: "ghz".into() },
        convention.as_str(),
        &r.post_selection,
        Validity { bandwidth: Some(r.bandwidth_valid), non_unitary: r.evolved_state.is_non_unitary() },
    )
    .parameter("alpha", cfg.alpha)
    .parameter("sigma_pump", cfg.sigma_pump)
    .parameter("sigma_low", cfg.sigma_low)
    .parameter("sigma_high", cfg.sigma_high)
    .metric("per_detector_probability", r.per_detector_probability())
    .metric("total_probability", r.total_probability)
    .metric("filter_survival", r.filter_survival);
    for d in &r.detectors {
        report = report.metric(&format!("probability[{}]", d.detector), d.probability);
    }
    if let Some(f) = r.min_fidelity() {
        report = report.metric("ghz_fidelity_min", f);
    }
    emit(out, &human, &report, json)
}

/// One row of a GHZ sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub alpha: f64,
    pub per_detector: f64,
    pub total: f64,
    pub fidelity: f64,
}

/// Evenly spaced α grid including both endpoints.
pub fn sweep_ghz(from: f64, to: f64, steps: usize, convention: Convention) -> Result<Vec<SweepRow>, Failure> {
    if steps < 2 {
        return Err(Failure::input(format!("--steps must be at least 2, got {steps}")));
    }
    if !(from.is_finite() && to.is_finite() && from < to) {
        return Err(Failure::input(format!("need finite --alpha-from < --alpha-to, got {from} and {to}")));
    }
    (0..steps)
        .map(|i| {
            let alpha = if i == steps - 1 { to } else { from + (to - from) * i as f64 / (steps - 1) as f64 };
            let r = run_ghz_with(GhzConfig::new(alpha, convention))?;
            Ok(SweepRow {
                alpha,
                per_detector: r.per_detector_probability(),
                total: r.total_probability,
                fidelity: r.min_fidelity().unwrap_or(0.0),
            })
        })
        .collect()
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from("alpha,per_detector_prob,total_prob,ghz_fidelity\n");
    for r in rows {
        writeln!(s, "{},{},{},{}", sig12(r.alpha), sig12(r.per_detector), sig12(r.total), sig12(r.fidelity)).unwrap();
    }
    s
}

/// `sweep ghz`: CSV to `csv` or, without a path, to `out`.
pub fn sweep_ghz_cmd(
    out: &mut dyn Write,
    from: f64,
    to: f64,
    steps: usize,
    convention: Convention,
    csv: Option<&Path>,
) -> CmdResult {
    let text = sweep_csv(&sweep_ghz(from, to, steps, convention)?);
    match csv {
        Some(p) => {
            fs::write(p, &text).map_err(|e| Failure::runtime(format!("cannot write {}: {e}", p.display())))?;
            writeln!(out, "wrote {steps} rows to {}", p.display())
        }
        None => out.write_all(text.as_bytes()),
    }
    .map_err(|e| Failure::runtime(format!("write failed: {e}")))
}
