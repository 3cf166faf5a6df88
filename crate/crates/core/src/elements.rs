//! Optical elements as single-photon mode maps lifted to multi-photon states.
//!
//! An [`ElementOp`] stores, for every input mode it acts on, the linear
//! combination of output modes a single photon in that mode is sent to.
//! [`apply_element`] lifts this map to Fock states by replacing each creation
//! operator with its image and re-expanding, so bunching and interference
//! between photons come out of the algebra.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::{FockKet, ModeLabel, StateVector};

/// Phase convention for the diffracted wave of an AOM.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    /// Diffracted amplitude carries a factor `i`; the map is an isometry.
    #[default]
    Unitary,
    /// All-plus amplitudes. Not an isometry when both inputs are populated,
    /// so each lifted input ket is renormalised.
    PaperLiteral,
}

impl Convention {
    pub fn as_str(self) -> &'static str {
        match self {
            Convention::Unitary => "unitary",
            Convention::PaperLiteral => "paper",
        }
    }
}

impl fmt::Display for Convention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Convention {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "unitary" => Ok(Convention::Unitary),
            "paper" | "paper_literal" => Ok(Convention::PaperLiteral),
            other => Err(format!("unknown convention `{other}` (expected unitary|paper)")),
        }
    }
}

/// A port given as `(path, frequency bin)`.
pub type Port = (String, i64);

/// Acousto-optic modulator with two inputs and two outputs.
///
/// `input_a` is the high-frequency input and diffracts down by `shift`;
/// `input_b` diffracts up. `output_x` collects the high bin and `output_y`
/// the low bin, so the output path alone never reveals which input a photon
/// came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AomSpec {
    pub name: String,
    pub input_a: Port,
    pub input_b: Port,
    pub output_x: String,
    pub output_y: String,
    pub shift: i64,
    pub t_amp: f64,
    pub convention: Convention,
}

impl AomSpec {
    /// Balanced AOM with `shift = 1`.
    pub fn balanced(
        name: impl Into<String>,
        input_a: (&str, i64),
        input_b: (&str, i64),
        output_x: &str,
        output_y: &str,
        convention: Convention,
    ) -> Self {
        AomSpec {
            name: name.into(),
            input_a: (input_a.0.to_owned(), input_a.1),
            input_b: (input_b.0.to_owned(), input_b.1),
            output_x: output_x.to_owned(),
            output_y: output_y.to_owned(),
            shift: 1,
            t_amp: FRAC_1_SQRT_2,
            convention,
        }
    }

    pub fn d_amp(&self) -> f64 {
        (1.0 - self.t_amp * self.t_amp).sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |reason: String| Err(Error::SpecInvariant { name: self.name.clone(), reason });
        if self.shift <= 0 {
            return bad(format!("shift must be positive, got {}", self.shift));
        }
        if !(self.t_amp > 0.0 && self.t_amp < 1.0) {
            return bad(format!("transmitted amplitude must lie in (0,1), got {}", self.t_amp));
        }
        if self.input_a.1 != self.input_b.1 + self.shift {
            return bad(format!(
                "frequency bins incompatible with shift: {}@{} and {}@{} with shift {}",
                self.input_a.0, self.input_a.1, self.input_b.0, self.input_b.1, self.shift
            ));
        }
        let all = [&self.input_a.0, &self.input_b.0, &self.output_x, &self.output_y];
        if all.iter().any(|p| p.is_empty()) {
            return bad("empty path identifier".into());
        }
        let distinct: BTreeSet<&String> = all.iter().copied().collect();
        if distinct.len() != 4 {
            return bad("input and output paths must be distinct".into());
        }
        Ok(())
    }
}

/// A two-arm biphoton source emitting `cos α |arm pair> + sin α |alt pair>`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceSpec {
    pub name: String,
    pub arm_1: Port,
    pub arm_2: Port,
    pub alt_arm_1: Port,
    pub alt_arm_2: Port,
    pub alpha: f64,
}

impl SourceSpec {
    pub fn new(
        name: impl Into<String>,
        arms: [(&str, i64); 2],
        alt: [(&str, i64); 2],
        alpha: f64,
    ) -> Self {
        let own = |(p, b): (&str, i64)| (p.to_owned(), b);
        SourceSpec {
            name: name.into(),
            arm_1: own(arms[0]),
            arm_2: own(arms[1]),
            alt_arm_1: own(alt[0]),
            alt_arm_2: own(alt[1]),
            alpha,
        }
    }

    /// Default mixing angle, giving equal `1/√2` amplitudes.
    pub const DEFAULT_ALPHA: f64 = FRAC_PI_4;

    pub fn paths(&self) -> [&str; 4] {
        [&self.arm_1.0, &self.arm_2.0, &self.alt_arm_1.0, &self.alt_arm_2.0]
    }
}

/// Ideal frequency-bin projector on one path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterSpec {
    pub name: String,
    pub path: String,
    pub pass_bin: i64,
    /// Bandwidth, only used by [`check_bandwidth`].
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandwidthCheck {
    pub sigma_pump: f64,
    pub filter_sigmas: Vec<f64>,
}

/// Pump bandwidth must be at least every filter bandwidth.
pub fn check_bandwidth(c: &BandwidthCheck) -> bool {
    c.filter_sigmas.iter().all(|&s| c.sigma_pump >= s)
}

/// Single-photon mode map plus metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementOp {
    name: String,
    map: BTreeMap<ModeLabel, Vec<(ModeLabel, Complex64)>>,
    input_paths: BTreeSet<String>,
    renormalize: bool,
}

impl ElementOp {
    /// Acts on nothing; every state passes unchanged.
    pub fn identity(name: impl Into<String>) -> Self {
        ElementOp {
            name: name.into(),
            map: BTreeMap::new(),
            input_paths: BTreeSet::new(),
            renormalize: false,
        }
    }

    /// Builds an element from an explicit input-mode → image map.
    ///
    /// Any photon on a path that appears among the input modes must sit in
    /// one of those modes. With `renormalize` the lift rescales the image of
    /// every input ket to unit norm (the non-isometric convention).
    pub fn from_map(
        name: impl Into<String>,
        map: BTreeMap<ModeLabel, Vec<(ModeLabel, Complex64)>>,
        renormalize: bool,
    ) -> Self {
        let input_paths = map.keys().map(|m| m.path.clone()).collect();
        ElementOp { name: name.into(), map, input_paths, renormalize }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn is_non_unitary(&self) -> bool {
        self.renormalize
    }

    pub fn input_modes(&self) -> impl Iterator<Item = &ModeLabel> {
        self.map.keys()
    }

    pub fn input_paths(&self) -> &BTreeSet<String> {
        &self.input_paths
    }

    pub fn image(&self, mode: &ModeLabel) -> Option<&[(ModeLabel, Complex64)]> {
        self.map.get(mode).map(Vec::as_slice)
    }

    pub fn output_modes(&self) -> BTreeSet<&ModeLabel> {
        self.map.values().flatten().map(|(m, _)| m).collect()
    }

    /// Gram matrix `<col_i|col_j>` of the single-photon images, in input
    /// mode order. Identity for an isometry.
    pub fn gram_matrix(&self) -> Vec<Vec<Complex64>> {
        let cols: Vec<&Vec<(ModeLabel, Complex64)>> = self.map.values().collect();
        let dot = |a: &Vec<(ModeLabel, Complex64)>, b: &Vec<(ModeLabel, Complex64)>| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (ma, ca) in a {
                for (mb, cb) in b {
                    if ma == mb {
                        acc += ca.conj() * cb;
                    }
                }
            }
            acc
        };
        cols.iter().map(|a| cols.iter().map(|b| dot(a, b)).collect()).collect()
    }

    fn check_ket(&self, ket: &FockKet) -> Result<()> {
        for (mode, _) in ket.occupations() {
            if self.input_paths.contains(&mode.path) && !self.map.contains_key(mode) {
                let expected = self
                    .map
                    .keys()
                    .filter(|m| m.path == mode.path)
                    .map(|m| m.freq_bin)
                    .collect();
                return Err(Error::UnexpectedFrequency {
                    element: self.name.clone(),
                    path: mode.path.clone(),
                    bin: mode.freq_bin,
                    expected,
                });
            }
        }
        Ok(())
    }

    /// Image of one basis ket under the bosonic lift (not renormalised).
    fn lift_ket(&self, ket: &FockKet) -> BTreeMap<FockKet, Complex64> {
        let mut spectators = FockKet::vacuum();
        let mut photons: Vec<&[(ModeLabel, Complex64)]> = Vec::new();
        let mut prefactor = 1.0;
        for (mode, n) in ket.occupations() {
            match self.map.get(mode) {
                Some(image) => {
                    for _ in 0..n {
                        photons.push(image);
                    }
                    prefactor /= factorial(n).sqrt();
                }
                None => spectators.add_photons(mode.clone(), n),
            }
        }

        let mut out = BTreeMap::new();
        if photons.is_empty() {
            out.insert(ket.clone(), Complex64::new(1.0, 0.0));
            return out;
        }

        // Each photon independently picks one term of its image; the
        // resulting monomial of creation operators is then normal-ordered
        // onto the spectator occupation.
        let mut created: BTreeMap<ModeLabel, u32> = BTreeMap::new();
        expand(&photons, 0, Complex64::new(prefactor, 0.0), &mut created, &mut |coef, created| {
            let mut target = spectators.clone();
            let mut weight = 1.0;
            for (mode, &m) in created {
                let p = spectators.count(mode);
                weight *= (factorial(p + m) / factorial(p)).sqrt();
                target.add_photons(mode.clone(), m);
            }
            *out.entry(target).or_insert_with(|| Complex64::new(0.0, 0.0)) += coef * weight;
        });
        out
    }
}

fn expand<F>(
    photons: &[&[(ModeLabel, Complex64)]],
    i: usize,
    coef: Complex64,
    created: &mut BTreeMap<ModeLabel, u32>,
    emit: &mut F,
) where
    F: FnMut(Complex64, &BTreeMap<ModeLabel, u32>),
{
    if i == photons.len() {
        emit(coef, created);
        return;
    }
    for (mode, amp) in photons[i] {
        *created.entry(mode.clone()).or_insert(0) += 1;
        expand(photons, i + 1, coef * amp, created, emit);
        let c = created.get_mut(mode).expect("mode was just inserted");
        *c -= 1;
        if *c == 0 {
            created.remove(mode);
        }
    }
}

pub(crate) fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// Builds the single-photon map of an AOM.
///
/// Unitary: `a@f → t·x@f + i·d·y@(f−shift)`, `b@f' → t·y@f' + i·d·x@(f'+shift)`.
/// PaperLiteral drops the `i`.
pub fn make_aom(spec: &AomSpec) -> Result<ElementOp> {
    spec.validate()?;
    let t = Complex64::new(spec.t_amp, 0.0);
    let d = match spec.convention {
        Convention::Unitary => Complex64::new(0.0, spec.d_amp()),
        Convention::PaperLiteral => Complex64::new(spec.d_amp(), 0.0),
    };
    let (pa, fa) = (&spec.input_a.0, spec.input_a.1);
    let (pb, fb) = (&spec.input_b.0, spec.input_b.1);
    let high = fa;
    let low = fb;
    let mut map = BTreeMap::new();
    map.insert(
        ModeLabel::new(pa.clone(), fa),
        vec![
            (ModeLabel::new(spec.output_x.clone(), high), t),
            (ModeLabel::new(spec.output_y.clone(), fa - spec.shift), d),
        ],
    );
    map.insert(
        ModeLabel::new(pb.clone(), fb),
        vec![
            (ModeLabel::new(spec.output_y.clone(), low), t),
            (ModeLabel::new(spec.output_x.clone(), fb + spec.shift), d),
        ],
    );
    Ok(ElementOp::from_map(
        spec.name.clone(),
        map,
        spec.convention == Convention::PaperLiteral,
    ))
}

/// Applies an element to every photon on its input modes.
///
/// For non-isometric elements the image of each input ket is rescaled to
/// unit norm before weighting by its amplitude, and the sum is normalised.
pub fn apply_element(s: &StateVector, op: &ElementOp) -> Result<StateVector> {
    let mut out = s.empty_like();
    out.mark_non_unitary(op.renormalize);
    for (ket, amp) in s.terms() {
        op.check_ket(ket)?;
        let image = op.lift_ket(ket);
        let scale = if op.renormalize {
            let n: f64 = image.values().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            if n == 0.0 { 0.0 } else { 1.0 / n }
        } else {
            1.0
        };
        for (k, a) in image {
            out.add_amplitude(k, amp * a * scale);
        }
    }
    if op.renormalize && !out.is_empty() {
        let n = out.norm();
        if n != 1.0 {
            out = out.normalize()?;
        }
    }
    Ok(out)
}

/// Emitted biphoton state of a source.
pub fn make_source(spec: &SourceSpec) -> Result<StateVector> {
    let distinct: BTreeSet<&str> = spec.paths().into_iter().collect();
    if distinct.len() != 4 || distinct.contains("") {
        return Err(Error::SpecInvariant {
            name: spec.name.clone(),
            reason: "source needs four distinct non-empty paths".into(),
        });
    }
    let mode = |(p, b): &Port| ModeLabel::new(p.clone(), *b);
    Ok(StateVector::from_terms([
        (
            FockKet::from_modes([mode(&spec.arm_1), mode(&spec.arm_2)]),
            Complex64::new(spec.alpha.cos(), 0.0),
        ),
        (
            FockKet::from_modes([mode(&spec.alt_arm_1), mode(&spec.alt_arm_2)]),
            Complex64::new(spec.alpha.sin(), 0.0),
        ),
    ]))
}

/// Projects onto `pass_bin` on the filter's path; kets without photons on
/// that path pass. Returns the renormalised survivor and its probability.
pub fn apply_filter(s: &StateVector, f: &FilterSpec) -> Result<(StateVector, f64)> {
    let total = s.norm_sqr();
    if total == 0.0 {
        return Err(Error::ZeroState);
    }
    let mut kept = s.empty_like();
    for (k, a) in s.terms() {
        let passes = k.occupations().all(|(m, _)| m.path != f.path || m.freq_bin == f.pass_bin);
        if passes {
            kept.add_amplitude(k.clone(), *a);
        }
    }
    let survival = kept.norm_sqr() / total;
    let kept = kept.normalize()?;
    Ok((kept, survival))
}
