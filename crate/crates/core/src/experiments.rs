//! Heralding, post-selection, and the two turnkey schemes: conditional
//! frequency-entanglement swapping with two AOMs and heralded three-photon
//! GHZ generation with one AOM.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::elements::{
    apply_element, apply_filter, check_bandwidth, make_aom, make_source, AomSpec, BandwidthCheck,
    Convention, FilterSpec, SourceSpec,
};
use crate::error::{Error, Result};
use crate::state::{tensor, FockKet, ModeLabel, StateVector};

/// Path names used by the built-in schemes.
pub mod layout {
    pub const P1: &str = "1";
    pub const P1X: &str = "1'";
    pub const P2: &str = "2";
    pub const P2X: &str = "2'";
    pub const P3: &str = "3";
    pub const P3X: &str = "3'";
    pub const P4: &str = "4";
    pub const P4X: &str = "4'";
    pub const T1: &str = "T1";
    pub const T1X: &str = "T1'";
    pub const T2: &str = "T2";
    pub const T2X: &str = "T2'";
    pub const T: &str = "T";
    pub const TX: &str = "T'";
}

use layout::*;

/// Exact photon count required on a set of paths.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeraldClause {
    pub paths: BTreeSet<String>,
    pub count: u32,
}

impl HeraldClause {
    pub fn new<I, S>(paths: I, count: u32) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        HeraldClause { paths: paths.into_iter().map(Into::into).collect(), count }
    }
}

/// Number-resolving herald over disjoint path sets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeraldRule {
    clauses: Vec<HeraldClause>,
    /// When false the rejected patterns are also listed one by one.
    pub discard_complement: bool,
}

impl HeraldRule {
    pub fn new(clauses: Vec<HeraldClause>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for c in &clauses {
            for p in &c.paths {
                if !seen.insert(p.clone()) {
                    return Err(Error::OverlappingClauses(p.clone()));
                }
            }
        }
        Ok(HeraldRule { clauses, discard_complement: true })
    }

    pub fn clauses(&self) -> &[HeraldClause] {
        &self.clauses
    }

    pub fn paths(&self) -> BTreeSet<String> {
        self.clauses.iter().flat_map(|c| c.paths.iter().cloned()).collect()
    }

    fn satisfied_by(&self, ket: &FockKet) -> bool {
        self.clauses.iter().all(|c| ket.count_on_paths(&c.paths) == c.count)
    }
}

/// Photon count per path.
pub type CountPattern = BTreeMap<String, u32>;

fn pattern_of(ket: &FockKet, paths: &BTreeSet<String>) -> CountPattern {
    paths.iter().map(|p| (p.clone(), ket.count_on_path(p))).collect()
}

fn pattern_label(p: &CountPattern) -> String {
    p.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(",")
}

/// One heralded branch.
///
/// `conditional_state` has the herald-path modes removed whenever every
/// surviving ket carries the same sub-ket there (`herald_ket` is then set);
/// otherwise the herald modes are kept in the state.
#[derive(Debug, Clone)]
pub struct HeraldOutcome {
    pub label: String,
    pub pattern: CountPattern,
    pub probability: f64,
    pub conditional_state: StateVector,
    pub herald_ket: Option<FockKet>,
    pub metrics: BTreeMap<String, f64>,
}

#[derive(Debug, Clone)]
pub struct PostSelection {
    pub accepted: Vec<HeraldOutcome>,
    /// Per-pattern breakdown of the discard bucket; empty when the rule
    /// discards its complement wholesale.
    pub rejected: Vec<HeraldOutcome>,
    pub discarded_probability: f64,
}

impl PostSelection {
    pub fn accepted_probability(&self) -> f64 {
        self.accepted.iter().map(|o| o.probability).fold(0.0, |a, p| a + p)
    }

    /// Accepted plus discarded; 1 up to rounding.
    pub fn total_probability(&self) -> f64 {
        self.accepted_probability() + self.discarded_probability
    }
}

fn outcome_from(group: StateVector, total: f64, pattern: CountPattern, herald_paths: &BTreeSet<String>) -> Result<HeraldOutcome> {
    let probability = group.norm_sqr() / total;
    let normalized = group.normalize()?;
    let (conditional_state, herald_ket) = match normalized.strip_paths(herald_paths) {
        Some((h, rest)) => (rest, Some(h)),
        None => (normalized, None),
    };
    Ok(HeraldOutcome {
        label: pattern_label(&pattern),
        pattern,
        probability,
        conditional_state,
        herald_ket,
        metrics: BTreeMap::new(),
    })
}

/// Splits `s` by per-path photon counts on the rule's paths and keeps the
/// patterns satisfying every clause.
pub fn post_select(s: &StateVector, rule: &HeraldRule) -> Result<PostSelection> {
    let total = s.norm_sqr();
    if total == 0.0 {
        return Err(Error::ZeroState);
    }
    let paths = rule.paths();
    let mut groups: BTreeMap<(bool, CountPattern), StateVector> = BTreeMap::new();
    for (k, a) in s.terms() {
        let key = (rule.satisfied_by(k), pattern_of(k, &paths));
        groups.entry(key).or_insert_with(|| s.empty_like()).add_amplitude(k.clone(), *a);
    }

    let mut accepted = Vec::new();
    let mut rejected = Vec::new();
    let mut discarded = 0.0;
    for ((ok, pattern), group) in groups {
        if group.is_empty() {
            continue;
        }
        if ok {
            accepted.push(outcome_from(group, total, pattern, &paths)?);
        } else {
            let p = group.norm_sqr() / total;
            discarded += p;
            if !rule.discard_complement {
                rejected.push(outcome_from(group, total, pattern, &paths)?);
            }
        }
    }
    Ok(PostSelection { accepted, rejected, discarded_probability: discarded })
}

/// Clause-level post-selection: one branch for "rule satisfied", without
/// resolving which path inside each clause fired. Herald modes stay in the
/// conditional state. `None` when the rule is never satisfied.
pub fn post_select_unresolved(s: &StateVector, rule: &HeraldRule) -> Result<Option<HeraldOutcome>> {
    let total = s.norm_sqr();
    if total == 0.0 {
        return Err(Error::ZeroState);
    }
    let mut group = s.empty_like();
    for (k, a) in s.terms() {
        if rule.satisfied_by(k) {
            group.add_amplitude(k.clone(), *a);
        }
    }
    if group.is_empty() {
        return Ok(None);
    }
    let probability = group.norm_sqr() / total;
    let pattern: CountPattern = BTreeMap::new();
    let label = rule
        .clauses()
        .iter()
        .map(|c| {
            let ps: Vec<&str> = c.paths.iter().map(String::as_str).collect();
            format!("count({})=={}", ps.join(","), c.count)
        })
        .collect::<Vec<_>>()
        .join(" and ");
    Ok(Some(HeraldOutcome {
        label,
        pattern,
        probability,
        conditional_state: group.normalize()?,
        herald_ket: None,
        metrics: BTreeMap::new(),
    }))
}

/// Folds an upstream survival probability (e.g. filter losses) into the
/// outcome probabilities; the lost fraction joins the discard bucket.
pub(crate) fn apply_survival(ps: &mut PostSelection, survival: f64) {
    for o in ps.accepted.iter_mut().chain(ps.rejected.iter_mut()) {
        o.probability *= survival;
    }
    ps.discarded_probability = 1.0 - survival + ps.discarded_probability * survival;
}

/// Photon-count pattern distribution on a set of paths.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeDistribution {
    pub paths: BTreeSet<String>,
    pub probabilities: BTreeMap<CountPattern, f64>,
}

impl OutcomeDistribution {
    /// Aggregates to total photon count over the whole path set.
    pub fn totals(&self) -> BTreeMap<u32, f64> {
        let mut out = BTreeMap::new();
        for (pat, p) in &self.probabilities {
            *out.entry(pat.values().sum()).or_insert(0.0) += p;
        }
        out
    }

    pub fn total_probability(&self) -> f64 {
        self.probabilities.values().fold(0.0, |a, p| a + p)
    }
}

pub fn enumerate_outcomes(s: &StateVector, paths: &BTreeSet<String>) -> OutcomeDistribution {
    let total = s.norm_sqr();
    let mut probabilities = BTreeMap::new();
    if total > 0.0 {
        for (k, a) in s.terms() {
            *probabilities.entry(pattern_of(k, paths)).or_insert(0.0) += a.norm_sqr() / total;
        }
    }
    OutcomeDistribution { paths: paths.clone(), probabilities }
}

fn path_set(ps: &[&str]) -> BTreeSet<String> {
    ps.iter().map(|s| s.to_string()).collect()
}

/// The two biphoton sources shared by both schemes.
pub fn paper_sources(alpha: f64) -> [SourceSpec; 2] {
    [
        SourceSpec::new("S1", [(P1, 0), (P2, 1)], [(P1X, 1), (P2X, 0)], alpha),
        SourceSpec::new("S2", [(P3, 0), (P4, 1)], [(P3X, 1), (P4X, 0)], alpha),
    ]
}

pub fn swap_aoms(convention: Convention) -> [AomSpec; 2] {
    [
        AomSpec::balanced("AOM1", (P2, 1), (P3, 0), T1, T1X, convention),
        AomSpec::balanced("AOM2", (P3X, 1), (P2X, 0), T2X, T2, convention),
    ]
}

pub fn swap_herald() -> HeraldRule {
    HeraldRule::new(vec![HeraldClause::new([T1, T1X], 1), HeraldClause::new([T2, T2X], 1)])
        .expect("disjoint clauses")
}

/// Checks on the clause-level swap branch.
#[derive(Debug, Clone)]
pub struct SwapFactorization {
    pub state: HeraldOutcome,
    /// Entropy of {1,1',4,4'} against the AOM outputs.
    pub sources_vs_outputs_entropy: f64,
    /// Fidelity of the photon-1/4 block with (|ω,ω> + |ω+δ,ω+δ>)/√2.
    pub bell_fidelity: f64,
    /// Purity of the reduced state of the AOM-output photons.
    pub output_purity: f64,
    /// Entropy of {1,1'} against {4,4'} after tracing out the outputs.
    pub swapped_pair_entropy: f64,
}

#[derive(Debug, Clone)]
pub struct SwapResult {
    pub alpha: f64,
    pub convention: Convention,
    pub evolved_state: StateVector,
    pub post_selection: PostSelection,
    pub success_probability: f64,
    pub unresolved: Option<SwapFactorization>,
}

impl SwapResult {
    /// Resolved heralds; each carries an `entropy` metric across
    /// {1,1'} | {4,4'}.
    pub fn resolved(&self) -> &[HeraldOutcome] {
        &self.post_selection.accepted
    }
}

pub const SWAP_ENTROPY_METRIC: &str = "entropy";
pub const GHZ_FIDELITY_METRIC: &str = "ghz_fidelity";

/// Entanglement swapping between photons 1 and 4 with two AOMs.
pub fn run_swap(alpha: f64, convention: Convention) -> Result<SwapResult> {
    let [s1, s2] = paper_sources(alpha);
    let mut state = tensor(&make_source(&s1)?, &make_source(&s2)?)?;
    for spec in swap_aoms(convention) {
        state = apply_element(&state, &make_aom(&spec)?)?;
    }
    let rule = swap_herald();
    let mut post_selection = post_select(&state, &rule)?;
    let left = path_set(&[P1, P1X]);
    for o in &mut post_selection.accepted {
        let e = o.conditional_state.entanglement_entropy(&left)?;
        o.metrics.insert(SWAP_ENTROPY_METRIC.into(), e);
    }
    let success_probability = post_selection.accepted_probability();

    let unresolved = match post_select_unresolved(&state, &rule)? {
        None => None,
        Some(branch) => {
            let pair = path_set(&[P1, P1X, P4, P4X]);
            let outputs = path_set(&[T1, T1X, T2, T2X]);
            let cond = &branch.conditional_state;
            let sources_vs_outputs_entropy = cond.entanglement_entropy(&pair)?;
            let bell = StateVector::from_terms([
                (
                    FockKet::from_modes([ModeLabel::new(P1, 0), ModeLabel::new(P4X, 0)]),
                    num_complex::Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
                ),
                (
                    FockKet::from_modes([ModeLabel::new(P1X, 1), ModeLabel::new(P4, 1)]),
                    num_complex::Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
                ),
            ]);
            let rho_pair = cond.reduced_density(&pair)?;
            let bell_fidelity = rho_pair.fidelity_with_pure(&bell);
            let output_purity = cond.reduced_density(&outputs)?.purity();
            // entropy of {1,1'} within the pair block, valid when the block is pure
            let swapped_pair_entropy = cond.entanglement_entropy(&left)?;
            Some(SwapFactorization {
                state: branch,
                sources_vs_outputs_entropy,
                bell_fidelity,
                output_purity,
                swapped_pair_entropy,
            })
        }
    };

    Ok(SwapResult { alpha, convention, evolved_state: state, post_selection, success_probability, unresolved })
}

pub fn ghz_aom(convention: Convention) -> AomSpec {
    AomSpec::balanced("AOM", (P2, 1), (P3, 0), TX, T, convention)
}

pub fn ghz_filters(sigma_low: f64, sigma_high: f64) -> [FilterSpec; 2] {
    [
        FilterSpec { name: "F_low".into(), path: T.into(), pass_bin: 0, sigma: sigma_low },
        FilterSpec { name: "F_high".into(), path: TX.into(), pass_bin: 1, sigma: sigma_high },
    ]
}

pub fn ghz_herald() -> HeraldRule {
    HeraldRule::new(vec![HeraldClause::new([T, TX], 1)]).expect("single clause")
}

/// The two branches |ω>_1 |ω+δ>_3' |ω>_4' and |ω+δ>_1' |ω>_2' |ω+δ>_4.
pub fn ghz_branches() -> (FockKet, FockKet) {
    (
        FockKet::from_modes([ModeLabel::new(P1, 0), ModeLabel::new(P3X, 1), ModeLabel::new(P4X, 0)]),
        FockKet::from_modes([ModeLabel::new(P1X, 1), ModeLabel::new(P2X, 0), ModeLabel::new(P4, 1)]),
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GhzConfig {
    pub alpha: f64,
    pub convention: Convention,
    pub sigma_pump: f64,
    pub sigma_low: f64,
    pub sigma_high: f64,
}

impl GhzConfig {
    pub fn new(alpha: f64, convention: Convention) -> Self {
        GhzConfig { alpha, convention, sigma_pump: 1.0, sigma_low: 1.0, sigma_high: 1.0 }
    }
}

/// One detector firing alone.
#[derive(Debug, Clone)]
pub struct DetectorHerald {
    pub detector: String,
    pub probability: f64,
    /// Three-photon state on the remaining paths; `None` at zero probability.
    pub state: Option<StateVector>,
    pub ghz_fidelity: f64,
}

#[derive(Debug, Clone)]
pub struct GhzResult {
    pub alpha: f64,
    pub convention: Convention,
    pub evolved_state: StateVector,
    pub filter_survival: f64,
    pub post_selection: PostSelection,
    /// D_T (bin ω) first, then D_T' (bin ω+δ).
    pub detectors: Vec<DetectorHerald>,
    pub total_probability: f64,
    pub bandwidth_valid: bool,
}

impl GhzResult {
    /// Probability of one given detector firing alone (D_T).
    pub fn per_detector_probability(&self) -> f64 {
        self.detectors[0].probability
    }

    /// Smallest GHZ fidelity among heralds with non-zero probability, or
    /// `None` if nothing was heralded.
    pub fn min_fidelity(&self) -> Option<f64> {
        self.detectors
            .iter()
            .filter(|d| d.probability > 0.0)
            .map(|d| d.ghz_fidelity)
            .reduce(f64::min)
    }
}

pub fn run_ghz(alpha: f64, convention: Convention) -> Result<GhzResult> {
    run_ghz_with(GhzConfig::new(alpha, convention))
}

/// Heralded three-photon GHZ generation with one AOM.
pub fn run_ghz_with(cfg: GhzConfig) -> Result<GhzResult> {
    let [s1, s2] = paper_sources(cfg.alpha);
    let mut state = tensor(&make_source(&s1)?, &make_source(&s2)?)?;
    state = apply_element(&state, &make_aom(&ghz_aom(cfg.convention))?)?;
    let mut filter_survival = 1.0;
    let filters = ghz_filters(cfg.sigma_low, cfg.sigma_high);
    for f in &filters {
        let (s, p) = apply_filter(&state, f)?;
        state = s;
        filter_survival *= p;
    }
    let bandwidth_valid = check_bandwidth(&BandwidthCheck {
        sigma_pump: cfg.sigma_pump,
        filter_sigmas: filters.iter().map(|f| f.sigma).collect(),
    });

    let mut post_selection = post_select(&state, &ghz_herald())?;
    apply_survival(&mut post_selection, filter_survival);
    let (a, b) = ghz_branches();
    for o in &mut post_selection.accepted {
        o.metrics.insert(GHZ_FIDELITY_METRIC.into(), o.conditional_state.ghz_fidelity(&a, &b));
    }

    let detectors = [T, TX]
        .into_iter()
        .map(|d| {
            let hit = post_selection.accepted.iter().find(|o| o.pattern.get(d) == Some(&1));
            match hit {
                Some(o) => DetectorHerald {
                    detector: d.to_owned(),
                    probability: o.probability,
                    state: Some(o.conditional_state.clone()),
                    ghz_fidelity: o.metrics[GHZ_FIDELITY_METRIC],
                },
                None => DetectorHerald { detector: d.to_owned(), probability: 0.0, state: None, ghz_fidelity: 0.0 },
            }
        })
        .collect();
    let total_probability = post_selection.accepted_probability();

    Ok(GhzResult {
        alpha: cfg.alpha,
        convention: cfg.convention,
        evolved_state: state,
        filter_survival,
        post_selection,
        detectors,
        total_probability,
        bandwidth_valid,
    })
}
