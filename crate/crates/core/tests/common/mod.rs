//! Seeded random circuits shared by the property and acceptance suites.
#![allow(dead_code)]

use std::f64::consts::FRAC_1_SQRT_2;

use aomsim::{make_aom, AomSpec, Convention, ElementOp, FockKet, ModeLabel, StateVector};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub struct RandomCircuit {
    pub initial: StateVector,
    pub ops: Vec<ElementOp>,
}

#[derive(Clone, Copy)]
pub enum ConventionChoice {
    Random,
    Fixed(Convention),
}

#[derive(Clone, Copy)]
pub struct CircuitOptions {
    pub convention: ConventionChoice,
    /// Allow a photon to sit in an AOM output mode before the AOM acts.
    /// The lifted map is then no longer an isometry.
    pub occupied_outputs: bool,
}

fn random_aom(rng: &mut ChaCha8Rng, j: usize, input_a: Option<(String, i64)>, conv: ConventionChoice) -> AomSpec {
    let shift = rng.gen_range(1..=2);
    let (a_path, fa) = input_a.unwrap_or_else(|| (format!("a{j}"), rng.gen_range(-2..=2)));
    let t_amp = if rng.gen_bool(0.5) { FRAC_1_SQRT_2 } else { rng.gen_range(0.05..0.95) };
    let convention = match conv {
        ConventionChoice::Fixed(c) => c,
        ConventionChoice::Random => {
            if rng.gen_bool(0.5) {
                Convention::Unitary
            } else {
                Convention::PaperLiteral
            }
        }
    };
    AomSpec {
        name: format!("A{j}"),
        input_a: (a_path, fa),
        input_b: (format!("b{j}"), fa - shift),
        output_x: format!("x{j}"),
        output_y: format!("y{j}"),
        shift,
        t_amp,
        convention,
    }
}

/// Up to two AOMs (optionally cascaded), up to four photons, at most
/// twelve modes once outputs are included.
pub fn random_circuit(rng: &mut ChaCha8Rng, opts: CircuitOptions) -> RandomCircuit {
    let conv = opts.convention;
    let n_aoms = rng.gen_range(1..=2);
    let mut specs = vec![random_aom(rng, 0, None, conv)];
    if n_aoms == 2 {
        let chained = rng.gen_bool(0.5).then(|| (specs[0].output_x.clone(), specs[0].input_a.1));
        specs.push(random_aom(rng, 1, chained, conv));
    }

    // modes photons may start in
    let mut start: Vec<ModeLabel> = Vec::new();
    for (j, s) in specs.iter().enumerate() {
        if j == 0 || s.input_a.0 != specs[0].output_x {
            start.push(ModeLabel::new(s.input_a.0.clone(), s.input_a.1));
        }
        start.push(ModeLabel::new(s.input_b.0.clone(), s.input_b.1));
    }
    start.push(ModeLabel::new("s0", rng.gen_range(-1..=1)));
    if opts.occupied_outputs && rng.gen_bool(0.3) {
        // a photon already waiting in an output mode
        start.push(ModeLabel::new(specs[0].output_y.clone(), specs[0].input_b.1));
    } else {
        start.push(ModeLabel::new("s1", rng.gen_range(-1..=1)));
    }

    let photons = rng.gen_range(1..=4);
    let n_terms = rng.gen_range(1..=4);
    let mut initial = StateVector::zero();
    for _ in 0..n_terms {
        let modes: Vec<ModeLabel> = (0..photons).map(|_| start[rng.gen_range(0..start.len())].clone()).collect();
        let amp = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        initial.add_amplitude(FockKet::from_modes(modes), amp);
    }
    if initial.is_empty() {
        initial.add_amplitude(FockKet::from_modes([start[0].clone()]), Complex64::new(1.0, 0.0));
    }
    let initial = initial.normalize().expect("non-zero");
    let ops = specs.iter().map(|s| make_aom(s).expect("valid spec")).collect();
    RandomCircuit { initial, ops }
}
