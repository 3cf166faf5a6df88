//! Dense brute-force reference for [`apply_element`](crate::elements::apply_element).
//!
//! Builds the full single-photon matrix over the closed mode set, enumerates
//! every Fock basis state of each photon-number sector, and fills the dense
//! multi-photon matrix entry by entry from permanents:
//!
//! `<out|U_N|in> = perm(U[out rows, in cols]) / sqrt(Π out! Π in!)`
//!
//! The permanent is a plain sum over permutations. Nothing here shares code
//! with the sparse lift.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::elements::{factorial, ElementOp};
use crate::error::{Error, Result};
use crate::state::{FockKet, ModeLabel, StateVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleCaps {
    pub max_modes: usize,
    pub max_photons: u32,
}

impl Default for OracleCaps {
    fn default() -> Self {
        OracleCaps { max_modes: 12, max_photons: 4 }
    }
}

pub fn dense_oracle_apply(s: &StateVector, op: &ElementOp) -> Result<StateVector> {
    dense_oracle_apply_with(s, op, OracleCaps::default())
}

pub fn dense_oracle_apply_with(s: &StateVector, op: &ElementOp, caps: OracleCaps) -> Result<StateVector> {
    let mut closure: BTreeSet<ModeLabel> = BTreeSet::new();
    for (k, _) in s.terms() {
        closure.extend(k.occupations().map(|(m, _)| m.clone()));
    }
    closure.extend(op.input_modes().cloned());
    closure.extend(op.output_modes().into_iter().cloned());
    let modes: Vec<ModeLabel> = closure.into_iter().collect();
    let photons = s.max_photons();
    if modes.len() > caps.max_modes || photons > caps.max_photons {
        return Err(Error::CapExceeded {
            modes: modes.len(),
            max_modes: caps.max_modes,
            photons,
            max_photons: caps.max_photons,
        });
    }

    for (k, _) in s.terms() {
        for (mode, _) in k.occupations() {
            let on_input_path = op.input_modes().any(|i| i.path == mode.path);
            if on_input_path && op.image(mode).is_none() {
                return Err(Error::UnexpectedFrequency {
                    element: op.name().to_owned(),
                    path: mode.path.clone(),
                    bin: mode.freq_bin,
                    expected: op.input_modes().filter(|i| i.path == mode.path).map(|i| i.freq_bin).collect(),
                });
            }
        }
    }

    let index: BTreeMap<&ModeLabel, usize> = modes.iter().enumerate().map(|(i, m)| (m, i)).collect();
    let dim = modes.len();
    let mut single = DMatrix::<Complex64>::identity(dim, dim);
    for (j, mode) in modes.iter().enumerate() {
        if let Some(image) = op.image(mode) {
            for r in 0..dim {
                single[(r, j)] = Complex64::new(0.0, 0.0);
            }
            for (target, amp) in image {
                single[(index[target], j)] += amp;
            }
        }
    }

    let mut sectors: BTreeMap<u32, Vec<(Vec<u32>, Complex64)>> = BTreeMap::new();
    for (k, a) in s.terms() {
        let mut occ = vec![0u32; dim];
        for (mode, n) in k.occupations() {
            occ[index[mode]] = n;
        }
        sectors.entry(k.total_photons()).or_default().push((occ, *a));
    }

    let mut out = StateVector::zero();
    let mut flagged = s.is_non_unitary();
    for (n, entries) in sectors {
        let basis = fock_basis(dim, n);
        let lookup: BTreeMap<&Vec<u32>, usize> = basis.iter().enumerate().map(|(i, o)| (o, i)).collect();
        let mut dense = multi_photon_matrix(&single, &basis);
        if op.is_non_unitary() {
            flagged = true;
            for mut col in dense.column_iter_mut() {
                let norm = col.norm();
                if norm > 0.0 {
                    col /= Complex64::new(norm, 0.0);
                }
            }
        }
        let mut input = DVector::<Complex64>::zeros(basis.len());
        for (occ, a) in entries {
            input[lookup[&occ]] += a;
        }
        let output = dense * input;
        for (i, amp) in output.iter().enumerate() {
            if *amp != Complex64::new(0.0, 0.0) {
                let ket = FockKet::from_counts(
                    basis[i].iter().enumerate().map(|(j, &c)| (modes[j].clone(), c)),
                );
                out.add_amplitude(ket, *amp);
            }
        }
    }
    if op.is_non_unitary() && !out.is_empty() {
        out = out.normalize()?;
    }
    out.mark_non_unitary(flagged);
    Ok(out)
}

/// All occupation vectors of `n` photons in `modes` modes, lexicographic.
fn fock_basis(modes: usize, n: u32) -> Vec<Vec<u32>> {
    fn rec(i: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if i + 1 == cur.len() {
            cur[i] = left;
            out.push(cur.clone());
            return;
        }
        for k in (0..=left).rev() {
            cur[i] = k;
            rec(i + 1, left - k, cur, out);
        }
    }
    let mut out = Vec::new();
    if modes == 0 {
        if n == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    rec(0, n, &mut vec![0; modes], &mut out);
    out
}

fn expand_occupation(occ: &[u32]) -> Vec<usize> {
    occ.iter()
        .enumerate()
        .flat_map(|(i, &c)| std::iter::repeat_n(i, c as usize))
        .collect()
}

fn multi_photon_matrix(single: &DMatrix<Complex64>, basis: &[Vec<u32>]) -> DMatrix<Complex64> {
    let dim = basis.len();
    let rows: Vec<Vec<usize>> = basis.iter().map(|o| expand_occupation(o)).collect();
    let norms: Vec<f64> = basis
        .iter()
        .map(|o| o.iter().map(|&c| factorial(c)).product::<f64>())
        .collect();
    let n = rows.first().map_or(0, Vec::len);
    let perms = permutations(n);
    DMatrix::from_fn(dim, dim, |r, c| {
        let (out_idx, in_idx) = (&rows[r], &rows[c]);
        let mut perm = Complex64::new(0.0, 0.0);
        for p in &perms {
            let mut term = Complex64::new(1.0, 0.0);
            for (k, &pk) in p.iter().enumerate() {
                term *= single[(out_idx[k], in_idx[pk])];
                if term == Complex64::new(0.0, 0.0) {
                    break;
                }
            }
            perm += term;
        }
        perm / (norms[r] * norms[c]).sqrt()
    })
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}
