//! Machine-readable run reports.
//!
//! Every float passes through [`round_sig`] before serialization so that the
//! JSON is byte-stable across platforms and repeated runs.

use std::collections::BTreeMap;

use aomsim::experiments::OutcomeDistribution;
use aomsim::{FockKet, HeraldOutcome, PostSelection, StateVector};
use serde::Serialize;

use crate::fmt::round_sig;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize)]
pub struct CircuitId {
    /// `file` or `demo`.
    pub kind: String,
    pub name: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ModeCount {
    pub path: String,
    pub bin: i64,
    pub count: u32,
}

#[derive(Debug, Clone, Serialize)]
pub struct KetReport {
    pub modes: Vec<ModeCount>,
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct OutcomeReport {
    pub label: String,
    pub pattern: BTreeMap<String, u32>,
    pub probability: f64,
    pub herald: Option<Vec<ModeCount>>,
    pub kets: Vec<KetReport>,
    pub metrics: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PatternReport {
    pub counts: BTreeMap<String, u32>,
    pub probability: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DistributionReport {
    pub paths: Vec<String>,
    pub patterns: Vec<PatternReport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Validity {
    pub bandwidth: Option<bool>,
    pub non_unitary: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub circuit: CircuitId,
    /// `unitary`, `paper`, `mixed` or `none`.
    pub convention: String,
    pub parameters: BTreeMap<String, f64>,
    pub accepted_probability: f64,
    pub discarded_probability: f64,
    pub outcomes: Vec<OutcomeReport>,
    pub distributions: Vec<DistributionReport>,
    pub metrics: BTreeMap<String, f64>,
    pub validity: Validity,
}

fn mode_counts(k: &FockKet) -> Vec<ModeCount> {
    k.occupations()
        .map(|(m, count)| ModeCount { path: m.path.clone(), bin: m.freq_bin, count })
        .collect()
}

fn rounded(m: &BTreeMap<String, f64>) -> BTreeMap<String, f64> {
    m.iter().map(|(k, v)| (k.clone(), round_sig(*v))).collect()
}

pub fn kets(s: &StateVector) -> Vec<KetReport> {
    s.terms()
        .map(|(k, a)| KetReport { modes: mode_counts(k), re: round_sig(a.re), im: round_sig(a.im) })
        .collect()
}

pub fn outcome(o: &HeraldOutcome) -> OutcomeReport {
    OutcomeReport {
        label: o.label.clone(),
        pattern: o.pattern.clone(),
        probability: round_sig(o.probability),
        herald: o.herald_ket.as_ref().map(mode_counts),
        kets: kets(&o.conditional_state),
        metrics: rounded(&o.metrics),
    }
}

pub fn distribution(d: &OutcomeDistribution) -> DistributionReport {
    DistributionReport {
        paths: d.paths.iter().cloned().collect(),
        patterns: d
            .probabilities
            .iter()
            .map(|(c, p)| PatternReport { counts: c.clone(), probability: round_sig(*p) })
            .collect(),
    }
}

impl RunReport {
    pub fn new(circuit: CircuitId, convention: &str, ps: &PostSelection, validity: Validity) -> Self {
        RunReport {
            schema_version: SCHEMA_VERSION,
            circuit,
            convention: convention.to_owned(),
            parameters: BTreeMap::new(),
            accepted_probability: round_sig(ps.accepted_probability()),
            discarded_probability: round_sig(ps.discarded_probability),
            outcomes: ps.accepted.iter().map(outcome).collect(),
            distributions: Vec::new(),
            metrics: BTreeMap::new(),
            validity,
        }
    }

    pub fn parameter(mut self, key: &str, value: f64) -> Self {
        self.parameters.insert(key.to_owned(), round_sig(value));
        self
    }

    pub fn metric(mut self, key: &str, value: f64) -> Self {
        self.metrics.insert(key.to_owned(), round_sig(value));
        self
    }

    pub fn to_json(&self, pretty: bool) -> String {
        let mut s = if pretty {
            serde_json::to_string_pretty(self)
        } else {
            serde_json::to_string(self)
        }
        .expect("report serializes");
        s.push('\n');
        s
    }
}
