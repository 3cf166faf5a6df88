//! Lowering of a parsed circuit into an executable [`Pipeline`].

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use super::ast::*;
use crate::elements::{
    apply_element, apply_filter, check_bandwidth, make_aom, make_source, AomSpec, BandwidthCheck, Convention,
    ElementOp, FilterSpec, SourceSpec,
};
use crate::error::Result;
use crate::experiments::{apply_survival, enumerate_outcomes, post_select, HeraldClause, HeraldOutcome, HeraldRule,
    OutcomeDistribution, PostSelection, GHZ_FIDELITY_METRIC};
use crate::state::{tensor, FockKet, ModeLabel, StateVector};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompileError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for CompileError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for CompileError {}

#[derive(Debug, Clone)]
pub enum Step {
    Aom { spec: AomSpec, op: ElementOp },
    Filter(FilterSpec),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Report {
    Entropy { split: BTreeSet<String> },
    Ghz { a: FockKet, b: FockKet },
    Outcomes { paths: BTreeSet<String> },
}

impl Report {
    /// Metric key under which the report's value is stored per outcome.
    pub fn metric_name(&self) -> Option<String> {
        match self {
            Report::Entropy { split } => {
                Some(format!("entropy[{}]", split.iter().cloned().collect::<Vec<_>>().join(",")))
            }
            Report::Ghz { .. } => Some(GHZ_FIDELITY_METRIC.to_owned()),
            Report::Outcomes { .. } => None,
        }
    }
}

/// Sources, then elements in file order, then an optional herald.
#[derive(Debug, Clone)]
pub struct Pipeline {
    pub sources: Vec<SourceSpec>,
    pub steps: Vec<Step>,
    pub herald: Option<HeraldRule>,
    pub reports: Vec<Report>,
    pub pump_sigma: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct PipelineRun {
    /// State just before heralding.
    pub state: StateVector,
    pub filter_survival: f64,
    /// Outcome probabilities include filter losses; without a herald there
    /// is a single accepted `unconditioned` outcome.
    pub post_selection: PostSelection,
    pub distributions: Vec<OutcomeDistribution>,
    pub bandwidth_valid: Option<bool>,
    pub non_unitary: bool,
}

impl Pipeline {
    /// Rebuilds every AOM with the given phase convention.
    pub fn with_convention(&self, convention: Convention) -> Result<Pipeline> {
        let mut out = self.clone();
        for step in &mut out.steps {
            if let Step::Aom { spec, op } = step {
                spec.convention = convention;
                *op = make_aom(spec)?;
            }
        }
        Ok(out)
    }

    /// Conventions used by the AOMs, deduplicated.
    pub fn conventions(&self) -> BTreeSet<&'static str> {
        self.steps
            .iter()
            .filter_map(|s| match s {
                Step::Aom { spec, .. } => Some(spec.convention.as_str()),
                Step::Filter(_) => None,
            })
            .collect()
    }

    pub fn execute(&self) -> Result<PipelineRun> {
        let mut state = match self.sources.split_first() {
            None => crate::state::ket([]),
            Some((first, rest)) => {
                let mut s = make_source(first)?;
                for src in rest {
                    s = tensor(&s, &make_source(src)?)?;
                }
                s
            }
        };
        let mut filter_survival = 1.0;
        let mut filter_sigmas = Vec::new();
        for step in &self.steps {
            match step {
                Step::Aom { op, .. } => state = apply_element(&state, op)?,
                Step::Filter(f) => {
                    let (s, p) = apply_filter(&state, f)?;
                    state = s;
                    filter_survival *= p;
                    filter_sigmas.push(f.sigma);
                }
            }
        }
        let bandwidth_valid = self
            .pump_sigma
            .map(|sigma_pump| check_bandwidth(&BandwidthCheck { sigma_pump, filter_sigmas }));

        let mut post_selection = match &self.herald {
            Some(rule) => post_select(&state, rule)?,
            None => PostSelection {
                accepted: vec![HeraldOutcome {
                    label: "unconditioned".into(),
                    pattern: BTreeMap::new(),
                    probability: 1.0,
                    conditional_state: state.normalize()?,
                    herald_ket: None,
                    metrics: BTreeMap::new(),
                }],
                rejected: Vec::new(),
                discarded_probability: 0.0,
            },
        };
        apply_survival(&mut post_selection, filter_survival);

        let mut distributions = Vec::new();
        for report in &self.reports {
            match report {
                Report::Outcomes { paths } => distributions.push(enumerate_outcomes(&state, paths)),
                Report::Entropy { split } => {
                    let key = report.metric_name().expect("entropy has a metric");
                    for o in &mut post_selection.accepted {
                        let e = o.conditional_state.entanglement_entropy(split)?;
                        o.metrics.insert(key.clone(), e);
                    }
                }
                Report::Ghz { a, b } => {
                    for o in &mut post_selection.accepted {
                        o.metrics.insert(GHZ_FIDELITY_METRIC.into(), o.conditional_state.ghz_fidelity(a, b));
                    }
                }
            }
        }

        Ok(PipelineRun {
            non_unitary: state.is_non_unitary(),
            state,
            filter_survival,
            post_selection,
            distributions,
            bandwidth_valid,
        })
    }
}

fn ket_of(modes: &[ModeRef]) -> FockKet {
    FockKet::from_modes(modes.iter().map(|m| ModeLabel::new(m.path.clone(), m.bin)))
}

/// Static knowledge about each path while lowering.
struct PathInfo {
    bin: i64,
    declared_at: usize,
    consumed_at: Option<usize>,
}

/// Validates element semantics and lowers the AST.
pub fn compile(ast: &CircuitAst) -> Result<Pipeline, Vec<CompileError>> {
    let mut errors = Vec::new();
    let mut paths: BTreeMap<String, PathInfo> = BTreeMap::new();
    let mut pipeline =
        Pipeline { sources: Vec::new(), steps: Vec::new(), herald: None, reports: Vec::new(), pump_sigma: None };

    let undeclared = |paths: &BTreeMap<String, PathInfo>, p: &str, line: usize, errors: &mut Vec<CompileError>| {
        if !paths.contains_key(p) {
            errors.push(CompileError { line, message: format!("undeclared path `{p}`") });
        }
    };

    for stmt in &ast.statements {
        let line = stmt.line;
        let mut err = |message: String| errors.push(CompileError { line, message });
        match &stmt.kind {
            StmtKind::Source(s) => {
                let spec = SourceSpec {
                    name: s.name.clone(),
                    arm_1: (s.arms[0].path.clone(), s.arms[0].bin),
                    arm_2: (s.arms[1].path.clone(), s.arms[1].bin),
                    alt_arm_1: (s.alt[0].path.clone(), s.alt[0].bin),
                    alt_arm_2: (s.alt[1].path.clone(), s.alt[1].bin),
                    alpha: s.alpha.unwrap_or(SourceSpec::DEFAULT_ALPHA),
                };
                let mut ok = true;
                for m in s.arms.iter().chain(s.alt.iter()) {
                    if let Some(prev) = paths.get(&m.path) {
                        err(format!("path `{}` already declared on line {}", m.path, prev.declared_at));
                        ok = false;
                    } else {
                        paths.insert(m.path.clone(), PathInfo { bin: m.bin, declared_at: line, consumed_at: None });
                    }
                }
                if ok {
                    pipeline.sources.push(spec);
                }
            }
            StmtKind::Aom(a) => {
                let spec = AomSpec {
                    name: a.name.clone(),
                    input_a: (a.inputs[0].path.clone(), a.inputs[0].bin),
                    input_b: (a.inputs[1].path.clone(), a.inputs[1].bin),
                    output_x: a.outputs[0].clone(),
                    output_y: a.outputs[1].clone(),
                    shift: a.shift.unwrap_or(1),
                    t_amp: a.t.unwrap_or(FRAC_1_SQRT_2),
                    convention: a.convention.unwrap_or_default(),
                };
                let before = errors.len();
                let mut err = |message: String| errors.push(CompileError { line, message });
                if spec.input_a.1 != spec.input_b.1 + spec.shift {
                    err(format!(
                        "AOM `{}`: frequency bins incompatible with shift ({}@{}, {}@{}, shift {})",
                        spec.name, spec.input_a.0, spec.input_a.1, spec.input_b.0, spec.input_b.1, spec.shift
                    ));
                }
                for m in &a.inputs {
                    match paths.get_mut(&m.path) {
                        None => err(format!("undeclared path `{}`", m.path)),
                        Some(info) => {
                            if let Some(prev) = info.consumed_at {
                                err(format!("path `{}` already consumed by an element on line {prev}", m.path));
                            }
                            if info.bin != m.bin {
                                err(format!(
                                    "AOM `{}` expects bin {} on path `{}`, which carries bin {}",
                                    spec.name, m.bin, m.path, info.bin
                                ));
                            }
                            info.consumed_at = Some(line);
                        }
                    }
                }
                let out_bins = [spec.input_a.1, spec.input_b.1];
                for (p, bin) in a.outputs.iter().zip(out_bins) {
                    if let Some(prev) = paths.get(p) {
                        err(format!("path reuse: `{p}` already declared on line {}", prev.declared_at));
                    } else {
                        paths.insert(p.clone(), PathInfo { bin, declared_at: line, consumed_at: None });
                    }
                }
                if errors.len() == before {
                    match make_aom(&spec) {
                        Ok(op) => pipeline.steps.push(Step::Aom { spec, op }),
                        Err(e) => errors.push(CompileError { line, message: e.to_string() }),
                    }
                }
            }
            StmtKind::Filter(f) => {
                let sigma = f.sigma.unwrap_or(1.0);
                if sigma.is_nan() || sigma <= 0.0 {
                    err(format!("filter `{}`: bandwidth must be positive", f.name));
                }
                match paths.get(&f.path) {
                    None => err(format!("undeclared path `{}`", f.path)),
                    Some(info) if info.consumed_at.is_some() => err(format!(
                        "filter `{}` on path `{}`, already consumed on line {}",
                        f.name,
                        f.path,
                        info.consumed_at.unwrap_or_default()
                    )),
                    Some(_) => pipeline.steps.push(Step::Filter(FilterSpec {
                        name: f.name.clone(),
                        path: f.path.clone(),
                        pass_bin: f.pass_bin,
                        sigma,
                    })),
                }
            }
            StmtKind::Herald(h) => {
                for c in &h.clauses {
                    for p in &c.paths {
                        undeclared(&paths, p, line, &mut errors);
                    }
                }
                if pipeline.herald.is_some() {
                    errors.push(CompileError { line, message: "more than one herald".into() });
                }
                let clauses = h.clauses.iter().map(|c| HeraldClause::new(c.paths.iter().cloned(), c.count)).collect();
                match HeraldRule::new(clauses) {
                    Ok(rule) => pipeline.herald = Some(rule),
                    Err(e) => errors.push(CompileError { line, message: e.to_string() }),
                }
            }
            StmtKind::Check(c) => {
                if c.pump.is_nan() || c.pump <= 0.0 {
                    err("pump bandwidth must be positive".into());
                }
                pipeline.pump_sigma = Some(c.pump);
            }
            StmtKind::Report(r) => {
                let used: Vec<&str> = match r {
                    ReportStmt::Entropy { split } => split.iter().map(String::as_str).collect(),
                    ReportStmt::Outcomes { paths } => paths.iter().map(String::as_str).collect(),
                    ReportStmt::Ghz { a, b } => a.iter().chain(b.iter()).map(|m| m.path.as_str()).collect(),
                };
                for p in used {
                    undeclared(&paths, p, line, &mut errors);
                }
                pipeline.reports.push(match r {
                    ReportStmt::Entropy { split } => Report::Entropy { split: split.iter().cloned().collect() },
                    ReportStmt::Outcomes { paths } => Report::Outcomes { paths: paths.iter().cloned().collect() },
                    ReportStmt::Ghz { a, b } => Report::Ghz { a: ket_of(a), b: ket_of(b) },
                });
            }
        }
    }
    if errors.is_empty() {
        Ok(pipeline)
    } else {
        Err(errors)
    }
}
