//! Sparse multi-photon states over (path, frequency-bin) modes.
//!
//! A mode is a beam path together with an integer frequency bin `n`, standing
//! for the frequency `ω + n·δ`. Basis states are Fock kets (occupation maps)
//! and a [`StateVector`] is a sparse map from kets to complex amplitudes.
//! Everything is kept in `BTreeMap`s so iteration order is canonical and
//! results are bit-for-bit reproducible.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A single-photon mode: a beam path and a frequency bin.
///
/// Ordering is lexicographic by `(path, freq_bin)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ModeLabel {
    pub path: String,
    pub freq_bin: i64,
}

impl ModeLabel {
    /// Panics if `path` is empty.
    pub fn new(path: impl Into<String>, freq_bin: i64) -> Self {
        let path = path.into();
        assert!(!path.is_empty(), "mode path must be non-empty");
        ModeLabel { path, freq_bin }
    }
}

impl fmt::Display for ModeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.path, self.freq_bin)
    }
}

/// Canonical multi-photon basis state. Zero occupations are never stored.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FockKet {
    occupations: BTreeMap<ModeLabel, u32>,
}

impl FockKet {
    pub fn vacuum() -> Self {
        FockKet::default()
    }

    /// Builds a ket from a list of occupied modes; repeats raise the count.
    pub fn from_modes<I: IntoIterator<Item = ModeLabel>>(modes: I) -> Self {
        let mut ket = FockKet::default();
        for m in modes {
            ket.add_photons(m, 1);
        }
        ket
    }

    pub fn from_counts<I: IntoIterator<Item = (ModeLabel, u32)>>(counts: I) -> Self {
        let mut ket = FockKet::default();
        for (m, n) in counts {
            ket.add_photons(m, n);
        }
        ket
    }

    pub(crate) fn add_photons(&mut self, mode: ModeLabel, n: u32) {
        if n > 0 {
            *self.occupations.entry(mode).or_insert(0) += n;
        }
    }

    pub fn count(&self, mode: &ModeLabel) -> u32 {
        self.occupations.get(mode).copied().unwrap_or(0)
    }

    pub fn occupations(&self) -> impl Iterator<Item = (&ModeLabel, u32)> {
        self.occupations.iter().map(|(m, &n)| (m, n))
    }

    pub fn total_photons(&self) -> u32 {
        self.occupations.values().sum()
    }

    pub fn is_vacuum(&self) -> bool {
        self.occupations.is_empty()
    }

    pub fn paths(&self) -> BTreeSet<&str> {
        self.occupations.keys().map(|m| m.path.as_str()).collect()
    }

    /// Photon count summed over every mode on the given paths.
    pub fn count_on_paths(&self, paths: &BTreeSet<String>) -> u32 {
        self.occupations
            .iter()
            .filter(|(m, _)| paths.contains(&m.path))
            .map(|(_, &n)| n)
            .sum()
    }

    pub fn count_on_path(&self, path: &str) -> u32 {
        self.occupations
            .iter()
            .filter(|(m, _)| m.path == path)
            .map(|(_, &n)| n)
            .sum()
    }

    /// Splits into (modes on `paths`, everything else).
    pub fn split(&self, paths: &BTreeSet<String>) -> (FockKet, FockKet) {
        let mut inside = FockKet::default();
        let mut outside = FockKet::default();
        for (m, &n) in &self.occupations {
            if paths.contains(&m.path) {
                inside.occupations.insert(m.clone(), n);
            } else {
                outside.occupations.insert(m.clone(), n);
            }
        }
        (inside, outside)
    }

    /// Concatenates two kets; counts on shared modes add up.
    pub fn merged(&self, other: &FockKet) -> FockKet {
        let mut out = self.clone();
        for (m, &n) in &other.occupations {
            out.add_photons(m.clone(), n);
        }
        out
    }
}

impl fmt::Display for FockKet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|")?;
        for (i, (m, &n)) in self.occupations.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            if n == 1 {
                write!(f, "{m}")?;
            } else {
                write!(f, "{m}^{n}")?;
            }
        }
        write!(f, ">")
    }
}

/// Sparse superposition of Fock kets.
///
/// `non_unitary` is sticky provenance: it is set once any non-isometric
/// element has touched the state and survives tensor products.
#[derive(Debug, Clone, Default)]
pub struct StateVector {
    terms: BTreeMap<FockKet, Complex64>,
    prune_epsilon: f64,
    non_unitary: bool,
}

impl PartialEq for StateVector {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms
    }
}

impl StateVector {
    /// The empty (zero) vector.
    pub fn zero() -> Self {
        StateVector::default()
    }

    pub fn from_terms<I: IntoIterator<Item = (FockKet, Complex64)>>(terms: I) -> Self {
        let mut s = StateVector::zero();
        for (k, a) in terms {
            s.add_amplitude(k, a);
        }
        s
    }

    /// Sets the pruning threshold and drops every stored term at or below it.
    pub fn with_prune_epsilon(mut self, eps: f64) -> Self {
        assert!(eps >= 0.0, "prune epsilon must be non-negative");
        self.prune_epsilon = eps;
        self.terms.retain(|_, a| a.norm() > eps);
        self
    }

    pub fn prune_epsilon(&self) -> f64 {
        self.prune_epsilon
    }

    pub fn is_non_unitary(&self) -> bool {
        self.non_unitary
    }

    pub(crate) fn mark_non_unitary(&mut self, flag: bool) {
        self.non_unitary |= flag;
    }

    /// Adds `amp` to the amplitude of `ket`, dropping the term if it falls
    /// to or below the prune threshold.
    pub fn add_amplitude(&mut self, ket: FockKet, amp: Complex64) {
        let eps = self.prune_epsilon;
        let entry = self.terms.entry(ket);
        match entry {
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += amp;
                if o.get().norm() <= eps {
                    o.remove();
                }
            }
            std::collections::btree_map::Entry::Vacant(v) => {
                if amp.norm() > eps {
                    v.insert(amp);
                }
            }
        }
    }

    pub fn amplitude(&self, ket: &FockKet) -> Complex64 {
        self.terms.get(ket).copied().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&FockKet, &Complex64)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.terms.values().map(|a| a.norm_sqr()).fold(0.0, |s, x| s + x)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scaled(&self, factor: Complex64) -> StateVector {
        let mut out = self.empty_like();
        for (k, a) in &self.terms {
            out.add_amplitude(k.clone(), a * factor);
        }
        out
    }

    /// A zero vector carrying this state's settings and provenance.
    pub(crate) fn empty_like(&self) -> StateVector {
        StateVector {
            terms: BTreeMap::new(),
            prune_epsilon: self.prune_epsilon,
            non_unitary: self.non_unitary,
        }
    }

    pub fn normalize(&self) -> Result<StateVector> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::ZeroState);
        }
        let mut out = self.empty_like();
        for (k, a) in &self.terms {
            out.add_amplitude(k.clone(), a / n);
        }
        Ok(out)
    }

    /// Every path carrying at least one photon in some term.
    pub fn paths(&self) -> BTreeSet<String> {
        self.terms
            .keys()
            .flat_map(|k| k.paths().into_iter().map(str::to_owned))
            .collect()
    }

    pub fn max_photons(&self) -> u32 {
        self.terms.keys().map(FockKet::total_photons).max().unwrap_or(0)
    }

    /// True when every ket holds the same number of photons.
    pub fn has_fixed_photon_number(&self) -> bool {
        let mut counts = self.terms.keys().map(FockKet::total_photons);
        match counts.next() {
            None => true,
            Some(first) => counts.all(|n| n == first),
        }
    }

    /// Largest amplitude difference over the union of both supports.
    pub fn max_abs_diff(&self, other: &StateVector) -> f64 {
        let kets: BTreeSet<&FockKet> = self.terms.keys().chain(other.terms.keys()).collect();
        kets.into_iter()
            .map(|k| (self.amplitude(k) - other.amplitude(k)).norm())
            .fold(0.0, f64::max)
    }

    /// Removes the modes on `paths` when every term carries the identical
    /// sub-ket there, returning that sub-ket and the remaining state.
    /// Returns `None` when the sub-kets differ between terms.
    pub fn strip_paths(&self, paths: &BTreeSet<String>) -> Option<(FockKet, StateVector)> {
        let mut common: Option<FockKet> = None;
        let mut rest = self.empty_like();
        for (k, a) in &self.terms {
            let (inside, outside) = k.split(paths);
            match &common {
                None => common = Some(inside),
                Some(c) if *c == inside => {}
                Some(_) => return None,
            }
            rest.add_amplitude(outside, *a);
        }
        Some((common.unwrap_or_default(), rest))
    }

    /// Partial trace over every path not in `keep_paths`.
    pub fn reduced_density(&self, keep_paths: &BTreeSet<String>) -> Result<DensityMatrix> {
        let total = self.norm_sqr();
        if total == 0.0 {
            return Err(Error::ZeroState);
        }
        // environment sub-ket -> [(kept sub-ket, amplitude)]
        let mut by_env: BTreeMap<FockKet, Vec<(FockKet, Complex64)>> = BTreeMap::new();
        let mut basis_set: BTreeSet<FockKet> = BTreeSet::new();
        for (k, a) in &self.terms {
            let (kept, env) = k.split(keep_paths);
            basis_set.insert(kept.clone());
            by_env.entry(env).or_default().push((kept, *a));
        }
        let basis: Vec<FockKet> = basis_set.into_iter().collect();
        let index: BTreeMap<&FockKet, usize> = basis.iter().enumerate().map(|(i, k)| (k, i)).collect();
        let dim = basis.len();
        let mut rho = DMatrix::<Complex64>::zeros(dim, dim);
        for group in by_env.values() {
            for (ki, ai) in group {
                for (kj, aj) in group {
                    rho[(index[ki], index[kj])] += ai * aj.conj();
                }
            }
        }
        rho /= Complex64::new(total, 0.0);
        Ok(DensityMatrix { basis, matrix: rho })
    }

    /// Von Neumann entropy, in bits, of the reduced state on `partition`.
    pub fn entanglement_entropy(&self, partition: &BTreeSet<String>) -> Result<f64> {
        Ok(self.reduced_density(partition)?.entropy_bits())
    }

    /// Phase-maximised fidelity with `(|a> + e^{iφ}|b>)/√2`.
    ///
    /// Closed form `(|<a|s>| + |<b|s>|)² / 2`, which lies in `[0, 1]` for a
    /// normalised `s`.
    pub fn ghz_fidelity(&self, branch_a: &FockKet, branch_b: &FockKet) -> f64 {
        let ca = self.amplitude(branch_a).norm();
        let cb = self.amplitude(branch_b).norm();
        (ca + cb).powi(2) / 2.0
    }
}

impl fmt::Display for StateVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (k, a)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({:.6}{:+.6}i){}", a.re, a.im, k)?;
        }
        Ok(())
    }
}

/// Unit-amplitude single-ket state; repeated modes become multi-occupation.
pub fn ket<I: IntoIterator<Item = ModeLabel>>(modes: I) -> StateVector {
    StateVector::from_terms([(FockKet::from_modes(modes), Complex64::new(1.0, 0.0))])
}

/// Tensor product of states on disjoint path sets.
pub fn tensor(a: &StateVector, b: &StateVector) -> Result<StateVector> {
    let pa = a.paths();
    if let Some(p) = b.paths().into_iter().find(|p| pa.contains(p)) {
        return Err(Error::OverlappingPaths(p));
    }
    let mut out = StateVector {
        terms: BTreeMap::new(),
        prune_epsilon: a.prune_epsilon.max(b.prune_epsilon),
        non_unitary: a.non_unitary || b.non_unitary,
    };
    for (ka, aa) in &a.terms {
        for (kb, ab) in &b.terms {
            out.add_amplitude(ka.merged(kb), aa * ab);
        }
    }
    Ok(out)
}

/// `<a|b>`, conjugate-linear in `a`.
pub fn inner(a: &StateVector, b: &StateVector) -> Complex64 {
    let (small, large, conj_small) = if a.len() <= b.len() { (a, b, true) } else { (b, a, false) };
    let mut acc = Complex64::new(0.0, 0.0);
    for (k, x) in &small.terms {
        if let Some(y) = large.terms.get(k) {
            acc += if conj_small { x.conj() * y } else { y.conj() * x };
        }
    }
    acc
}

/// Reduced density matrix on an explicit ket basis.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    pub basis: Vec<FockKet>,
    pub matrix: DMatrix<Complex64>,
}

impl DensityMatrix {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    /// Ascending eigenvalues of the Hermitian matrix.
    pub fn eigenvalues(&self) -> Vec<f64> {
        if self.dim() == 0 {
            return Vec::new();
        }
        let mut ev: Vec<f64> = self.matrix.clone().symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// Base-2 von Neumann entropy with `0·log 0 = 0`.
    pub fn entropy_bits(&self) -> f64 {
        let s: f64 = self
            .eigenvalues()
            .into_iter()
            .filter(|&l| l > 0.0)
            .map(|l| -l * l.log2())
            .sum();
        s.max(0.0)
    }

    /// Largest deviation from Hermiticity.
    pub fn hermiticity_error(&self) -> f64 {
        let d = &self.matrix - self.matrix.adjoint();
        d.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `<ψ|ρ|ψ>` for a pure state expressed on (a subset of) this basis.
    pub fn fidelity_with_pure(&self, psi: &StateVector) -> f64 {
        let n = psi.norm_sqr();
        if n == 0.0 {
            return 0.0;
        }
        let coeffs: Vec<Complex64> = self.basis.iter().map(|k| psi.amplitude(k)).collect();
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, ci) in coeffs.iter().enumerate() {
            for (j, cj) in coeffs.iter().enumerate() {
                acc += ci.conj() * self.matrix[(i, j)] * cj;
            }
        }
        acc.re / n
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};

    fn m(p: &str, b: i64) -> ModeLabel {
        ModeLabel::new(p, b)
    }

    fn paths(ps: &[&str]) -> BTreeSet<String> {
        ps.iter().map(|s| s.to_string()).collect()
    }

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn bell() -> StateVector {
        StateVector::from_terms([
            (FockKet::from_modes([m("a", 0), m("b", 0)]), c(FRAC_1_SQRT_2)),
            (FockKet::from_modes([m("a", 1), m("b", 1)]), c(FRAC_1_SQRT_2)),
        ])
    }

    /// cos α |1@0 2@1> + sin α |1'@1 2'@0>
    fn biphoton(p: [&str; 4], alpha: f64) -> StateVector {
        StateVector::from_terms([
            (FockKet::from_modes([m(p[0], 0), m(p[1], 1)]), c(alpha.cos())),
            (FockKet::from_modes([m(p[2], 1), m(p[3], 0)]), c(alpha.sin())),
        ])
    }

    #[test]
    fn ket_examples() {
        let s = ket([m("p1", 0)]);
        assert_eq!(s.len(), 1);
        assert_eq!(s.amplitude(&FockKet::from_modes([m("p1", 0)])), c(1.0));

        let s = ket([m("p1", 0), m("p1", 0)]);
        let (k, _) = s.terms().next().unwrap();
        assert_eq!(k.count(&m("p1", 0)), 2);
        assert_eq!(k.total_photons(), 2);

        let s = ket([m("1", 0), m("2", 1)]);
        assert_eq!(s.amplitude(&FockKet::from_modes([m("2", 1), m("1", 0)])), c(1.0));
    }

    #[test]
    #[should_panic]
    fn empty_path_rejected() {
        ModeLabel::new("", 0);
    }

    #[test]
    fn mode_ordering_is_path_then_bin() {
        let mut v = vec![m("b", 0), m("a", 5), m("a", -1)];
        v.sort();
        assert_eq!(v, vec![m("a", -1), m("a", 5), m("b", 0)]);
    }

    #[test]
    fn tensor_of_paper_sources() {
        let phi = biphoton(["1", "2", "1'", "2'"], FRAC_PI_4);
        let psi = biphoton(["3", "4", "3'", "4'"], FRAC_PI_4);
        let s = tensor(&phi, &psi).unwrap();
        assert_eq!(s.len(), 4);
        for (_, a) in s.terms() {
            assert!((a - c(0.5)).norm() < 1e-15);
        }
        assert!((s.norm() - phi.norm() * psi.norm()).abs() < 1e-12);
    }

    #[test]
    fn tensor_single_kets() {
        let s = tensor(&ket([m("p", 0)]), &ket([m("q", 0)])).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.amplitude(&FockKet::from_modes([m("p", 0), m("q", 0)])), c(1.0));
    }

    #[test]
    fn tensor_non_maximal_amplitudes() {
        // Hand expansion of (cos α |x> + sin α |y>) ⊗ (cos α |u> + sin α |v>).
        let alpha = 0.3;
        let phi = biphoton(["1", "2", "1'", "2'"], alpha);
        let psi = biphoton(["3", "4", "3'", "4'"], alpha);
        let s = tensor(&phi, &psi).unwrap();
        let (ca, sa) = (alpha.cos(), alpha.sin());
        let expect = [
            ([m("1", 0), m("2", 1), m("3", 0), m("4", 1)], ca * ca),
            ([m("1", 0), m("2", 1), m("3'", 1), m("4'", 0)], ca * sa),
            ([m("1'", 1), m("2'", 0), m("3", 0), m("4", 1)], sa * ca),
            ([m("1'", 1), m("2'", 0), m("3'", 1), m("4'", 0)], sa * sa),
        ];
        assert_eq!(s.len(), 4);
        for (modes, amp) in expect {
            let k = FockKet::from_modes(modes);
            assert!((s.amplitude(&k) - c(amp)).norm() < 1e-15);
        }
    }

    #[test]
    fn tensor_rejects_shared_paths() {
        let err = tensor(&ket([m("p", 0)]), &ket([m("p", 1)])).unwrap_err();
        assert_eq!(err, Error::OverlappingPaths("p".into()));
    }

    #[test]
    fn inner_examples() {
        let b = bell();
        assert!((inner(&b, &b) - c(1.0)).norm() < 1e-15);
        assert_eq!(inner(&ket([m("p", 0)]), &ket([m("p", 1)])), c(0.0));
        let phi = biphoton(["1", "2", "1'", "2'"], FRAC_PI_4);
        let first = ket([m("1", 0), m("2", 1)]);
        assert!((inner(&phi, &first) - c(FRAC_1_SQRT_2)).norm() < 1e-15);
        // conjugate-linear in the first slot
        let z = Complex64::new(0.0, 2.0);
        let lhs = inner(&first.scaled(z), &phi);
        assert!((lhs - z.conj() * inner(&first, &phi)).norm() < 1e-15);
    }

    #[test]
    fn normalize_examples() {
        let k = FockKet::from_modes([m("p", 0)]);
        let s = StateVector::from_terms([(k.clone(), c(2.0))]).normalize().unwrap();
        assert_eq!(s.amplitude(&k), c(1.0));

        // two retained terms of amplitude 1/2: norm² 1/2
        let half = StateVector::from_terms([
            (FockKet::from_modes([m("1", 0), m("2", 1), m("3'", 1), m("4'", 0)]), c(0.5)),
            (FockKet::from_modes([m("1'", 1), m("2'", 0), m("3", 0), m("4", 1)]), c(0.5)),
        ]);
        assert!((half.norm_sqr() - 0.5).abs() < 1e-15);
        let n = half.normalize().unwrap();
        for (_, a) in n.terms() {
            assert!((a - c(FRAC_1_SQRT_2)).norm() < 1e-15);
        }

        let b = bell();
        assert!(b.normalize().unwrap().max_abs_diff(&b) < 1e-15);
        assert_eq!(StateVector::zero().normalize().unwrap_err(), Error::ZeroState);
    }

    #[test]
    fn reduced_density_examples() {
        let rho = bell().reduced_density(&paths(&["a"])).unwrap();
        assert_eq!(rho.dim(), 2);
        assert!((rho.matrix[(0, 0)] - c(0.5)).norm() < 1e-15);
        assert!((rho.matrix[(1, 1)] - c(0.5)).norm() < 1e-15);
        assert!(rho.matrix[(0, 1)].norm() < 1e-15);

        let prod = tensor(&bell(), &ket([m("z", 3)])).unwrap();
        let rho = prod.reduced_density(&paths(&["z"])).unwrap();
        assert_eq!(rho.dim(), 1);
        assert!((rho.purity() - 1.0).abs() < 1e-12);
        let rho = prod.reduced_density(&paths(&["a", "b"])).unwrap();
        assert!((rho.purity() - 1.0).abs() < 1e-12);
        assert!((rho.trace() - c(1.0)).norm() < 1e-12);
        assert!(rho.hermiticity_error() < 1e-12);
    }

    #[test]
    fn entropy_examples() {
        let prod = tensor(&ket([m("a", 0)]), &ket([m("b", 1)])).unwrap();
        assert!(prod.entanglement_entropy(&paths(&["a"])).unwrap().abs() < 1e-12);
        assert!((bell().entanglement_entropy(&paths(&["a"])).unwrap() - 1.0).abs() < 1e-12);

        // (|1@0 3'@1 4'@0> + |1'@1 2'@0 4@1>)/√2, cut {1,1'} | rest
        let ghz = StateVector::from_terms([
            (FockKet::from_modes([m("1", 0), m("3'", 1), m("4'", 0)]), c(FRAC_1_SQRT_2)),
            (FockKet::from_modes([m("1'", 1), m("2'", 0), m("4", 1)]), c(FRAC_1_SQRT_2)),
        ]);
        let e = ghz.entanglement_entropy(&paths(&["1", "1'"])).unwrap();
        assert!((e - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ghz_fidelity_examples() {
        let a = FockKet::from_modes([m("x", 0), m("y", 0)]);
        let b = FockKet::from_modes([m("x", 1), m("y", 1)]);
        let plus = StateVector::from_terms([(a.clone(), c(FRAC_1_SQRT_2)), (b.clone(), c(FRAC_1_SQRT_2))]);
        assert!((plus.ghz_fidelity(&a, &b) - 1.0).abs() < 1e-15);
        let iphase = StateVector::from_terms([
            (a.clone(), c(FRAC_1_SQRT_2)),
            (b.clone(), Complex64::new(0.0, FRAC_1_SQRT_2)),
        ]);
        assert!((iphase.ghz_fidelity(&a, &b) - 1.0).abs() < 1e-15);
        let single = StateVector::from_terms([(a.clone(), c(1.0))]);
        assert!((single.ghz_fidelity(&a, &b) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn strip_paths_factorised_and_not() {
        let s = tensor(&bell(), &ket([m("h", 0)])).unwrap();
        let (herald, rest) = s.strip_paths(&paths(&["h"])).unwrap();
        assert_eq!(herald, FockKet::from_modes([m("h", 0)]));
        assert!(rest.max_abs_diff(&bell()) < 1e-15);
        assert!(bell().strip_paths(&paths(&["a"])).is_none());
    }

    #[test]
    fn pruning_drops_small_terms() {
        let k1 = FockKet::from_modes([m("a", 0)]);
        let k2 = FockKet::from_modes([m("a", 1)]);
        let s = StateVector::from_terms([(k1.clone(), c(1.0)), (k2.clone(), c(1e-9))]).with_prune_epsilon(1e-6);
        assert_eq!(s.len(), 1);
        let mut s = s;
        s.add_amplitude(k1.clone(), c(-1.0));
        assert!(s.is_empty());
        // default epsilon keeps everything non-zero but drops exact cancellations
        let mut t = StateVector::from_terms([(k1.clone(), c(1e-300))]);
        assert_eq!(t.len(), 1);
        t.add_amplitude(k1, c(-1e-300));
        assert!(t.is_empty());
    }
}
