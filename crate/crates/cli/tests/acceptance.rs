//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Runs without the libtest harness so the lines always print.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::collections::BTreeSet;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::Command;

use aomsim::dsl::{compile, parse};
use aomsim::experiments::{GHZ_FIDELITY_METRIC, SWAP_ENTROPY_METRIC};
use aomsim::{
    apply_element, dense_oracle_apply, post_select, run_ghz, run_swap, Convention, HeraldClause, HeraldOutcome,
    HeraldRule, PostSelection,
};
use aomsim_cli::commands::{demo_ghz, JsonOpts};
use common::{random_circuit, CircuitOptions, ConventionChoice};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PROB_TOL: f64 = 1e-12;
const ENTROPY_TOL: f64 = 1e-9;
const FIDELITY_TOL: f64 = 1e-9;
const ALPHA_LAW_TOL: f64 = 1e-9;
const ORACLE_TOL: f64 = 1e-12;
const NORM_TOL: f64 = 1e-12;
const COMPLETENESS_TOL: f64 = 1e-9;
const DSL_TOL: f64 = 1e-15;

const CONVENTIONS: [Convention; 2] = [Convention::Unitary, Convention::PaperLiteral];

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

fn close(x: f64, target: f64, tol: f64, what: &str) -> Result<(), String> {
    if (x - target).abs() <= tol {
        Ok(())
    } else {
        Err(format!("{what}: got {x:.17}, want {target} +/- {tol:e}"))
    }
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn example(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/examples").join(name)
}

fn c1_swap_success() -> Verdict {
    for conv in CONVENTIONS {
        let r = run_swap(FRAC_PI_4, conv).map_err(|e| e.to_string())?;
        close(r.success_probability, 0.5, PROB_TOL, &format!("success ({conv})"))?;
    }
    Ok("success probability 0.5 in both conventions".into())
}

fn c2_swap_heralds() -> Verdict {
    for conv in CONVENTIONS {
        let r = run_swap(FRAC_PI_4, conv).map_err(|e| e.to_string())?;
        ensure(r.resolved().len() == 4, || format!("{conv}: {} resolved heralds, want 4", r.resolved().len()))?;
        for o in r.resolved() {
            close(o.probability, 0.125, PROB_TOL, &format!("{conv} {} probability", o.label))?;
            close(o.metrics[SWAP_ENTROPY_METRIC], 1.0, ENTROPY_TOL, &format!("{conv} {} entropy", o.label))?;
        }
    }
    Ok("4 heralds x 0.125, entropy 1 ebit each".into())
}

fn c3_factorization() -> Verdict {
    let r = run_swap(FRAC_PI_4, Convention::PaperLiteral).map_err(|e| e.to_string())?;
    let f = r.unresolved.ok_or("no unresolved herald branch")?;
    ensure(f.sources_vs_outputs_entropy <= ENTROPY_TOL, || {
        format!("sources|outputs entropy {:e} > {ENTROPY_TOL:e}", f.sources_vs_outputs_entropy)
    })?;
    ensure(f.bell_fidelity >= 1.0 - FIDELITY_TOL, || format!("bell fidelity {:.17}", f.bell_fidelity))?;
    Ok(format!("entropy {:.1e}, bell fidelity {:.15}", f.sources_vs_outputs_entropy, f.bell_fidelity))
}

fn c4_leftover_purity() -> Verdict {
    let r = run_swap(FRAC_PI_4, Convention::PaperLiteral).map_err(|e| e.to_string())?;
    let f = r.unresolved.ok_or("no unresolved herald branch")?;
    close(f.output_purity, 1.0, ENTROPY_TOL, "output purity")?;
    Ok(format!("output purity {:.15}", f.output_purity))
}

fn c5_ghz_probability() -> Verdict {
    for conv in CONVENTIONS {
        let r = run_ghz(FRAC_PI_4, conv).map_err(|e| e.to_string())?;
        close(r.total_probability, 0.5, PROB_TOL, &format!("{conv} total"))?;
        for d in &r.detectors {
            close(d.probability, 0.25, PROB_TOL, &format!("{conv} detector {}", d.detector))?;
        }
    }
    Ok("total 0.5, per-detector 0.25".into())
}

fn c6_alpha_law() -> Verdict {
    let mut worst: f64 = 0.0;
    for conv in CONVENTIONS {
        for i in 0..33 {
            let alpha = FRAC_PI_2 * i as f64 / 32.0;
            let r = run_ghz(alpha, conv).map_err(|e| e.to_string())?;
            let expect = (alpha.sin() * alpha.cos()).powi(2);
            for d in &r.detectors {
                worst = worst.max((d.probability - expect).abs());
            }
        }
    }
    ensure(worst <= ALPHA_LAW_TOL, || format!("max deviation {worst:e}"))?;
    Ok(format!("33 points x 2 conventions, max deviation {worst:.1e}"))
}

fn c7_ghz_fidelity() -> Verdict {
    let mut checked = 0;
    for conv in CONVENTIONS {
        for i in 0..33 {
            let alpha = FRAC_PI_2 * i as f64 / 32.0;
            let r = run_ghz(alpha, conv).map_err(|e| e.to_string())?;
            for o in r.post_selection.accepted.iter().filter(|o| o.probability > 0.0) {
                close(o.metrics[GHZ_FIDELITY_METRIC], 1.0, FIDELITY_TOL, &format!("{conv} alpha={alpha} {}", o.label))?;
                checked += 1;
            }
        }
    }
    ensure(checked > 0, || "no heralded states".into())?;
    Ok(format!("{checked} heralded states at fidelity 1"))
}

fn c8_oracle() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE_0008);
    let mut worst: f64 = 0.0;
    let mut steps = 0;
    for _ in 0..200 {
        let c = random_circuit(&mut rng, CircuitOptions { convention: ConventionChoice::Random, occupied_outputs: true });
        ensure(c.initial.max_photons() <= 4, || "generator exceeded 4 photons".into())?;
        let mut s = c.initial;
        for op in &c.ops {
            let sparse = apply_element(&s, op).map_err(|e| e.to_string())?;
            let dense = dense_oracle_apply(&s, op).map_err(|e| e.to_string())?;
            worst = worst.max(sparse.max_abs_diff(&dense));
            steps += 1;
            s = sparse;
        }
    }
    ensure(worst <= ORACLE_TOL, || format!("max deviation {worst:e}"))?;
    Ok(format!("200 circuits, {steps} element applications, max deviation {worst:.1e}"))
}

fn c9_isometry() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE_0009);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let c = random_circuit(
            &mut rng,
            CircuitOptions { convention: ConventionChoice::Fixed(Convention::Unitary), occupied_outputs: false },
        );
        let mut s = c.initial;
        for op in &c.ops {
            s = apply_element(&s, op).map_err(|e| e.to_string())?;
            ensure(!s.is_non_unitary(), || "unitary result flagged non_unitary".into())?;
            worst = worst.max((s.norm() - 1.0).abs());
        }
    }
    ensure(worst <= NORM_TOL, || format!("norm deviation {worst:e}"))?;
    for _ in 0..200 {
        let c = random_circuit(
            &mut rng,
            CircuitOptions { convention: ConventionChoice::Fixed(Convention::PaperLiteral), occupied_outputs: true },
        );
        let s = apply_element(&c.initial, &c.ops[0]).map_err(|e| e.to_string())?;
        ensure(s.is_non_unitary(), || "PaperLiteral result not flagged".into())?;
    }
    Ok(format!("1000 unitary runs, norm deviation {worst:.1e}; 200 PaperLiteral runs flagged"))
}

/// Collects every post-selection made while exercising the library.
fn c10_completeness() -> Verdict {
    let mut selections: Vec<PostSelection> = Vec::new();
    for conv in CONVENTIONS {
        for i in 0..33 {
            let alpha = FRAC_PI_2 * i as f64 / 32.0;
            selections.push(run_swap(alpha, conv).map_err(|e| e.to_string())?.post_selection);
            selections.push(run_ghz(alpha, conv).map_err(|e| e.to_string())?.post_selection);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE_0010);
    for _ in 0..200 {
        let c = random_circuit(&mut rng, CircuitOptions { convention: ConventionChoice::Random, occupied_outputs: true });
        let mut s = c.initial;
        for op in &c.ops {
            s = apply_element(&s, op).map_err(|e| e.to_string())?;
        }
        let outputs: Vec<String> = c.ops[0].output_modes().iter().map(|m| m.path.clone()).collect::<BTreeSet<_>>().into_iter().collect();
        let mut rule = HeraldRule::new(vec![HeraldClause::new(outputs, rng.gen_range(0..3))]).map_err(|e| e.to_string())?;
        rule.discard_complement = rng.gen_bool(0.5);
        selections.push(post_select(&s, &rule).map_err(|e| e.to_string())?);
    }
    for name in ["swap.qc", "ghz.qc"] {
        for conv in CONVENTIONS {
            let p = pipeline(name, conv)?;
            selections.push(p.execute().map_err(|e| e.to_string())?.post_selection);
        }
    }
    let mut worst: f64 = 0.0;
    for ps in &selections {
        worst = worst.max((ps.total_probability() - 1.0).abs());
    }
    ensure(worst <= COMPLETENESS_TOL, || format!("max |accepted + discarded - 1| = {worst:e}"))?;
    Ok(format!("{} post-selections, max deviation {worst:.1e}", selections.len()))
}

fn pipeline(name: &str, conv: Convention) -> Result<aomsim::dsl::Pipeline, String> {
    let text = std::fs::read_to_string(example(name)).map_err(|e| e.to_string())?;
    let ast = parse(&text).map_err(|e| format!("{e:?}"))?;
    let p = compile(&ast).map_err(|e| format!("{e:?}"))?;
    p.with_convention(conv).map_err(|e| e.to_string())
}

fn same_outcomes(file: &[HeraldOutcome], lib: &[HeraldOutcome], metric_pairs: &[(&str, &str)]) -> Result<f64, String> {
    ensure(file.len() == lib.len(), || format!("{} outcomes vs {}", file.len(), lib.len()))?;
    let mut worst: f64 = 0.0;
    for (a, b) in file.iter().zip(lib) {
        ensure(a.label == b.label && a.pattern == b.pattern, || format!("outcome {} vs {}", a.label, b.label))?;
        ensure(a.herald_ket == b.herald_ket, || format!("herald ket differs for {}", a.label))?;
        let ka: Vec<_> = a.conditional_state.terms().map(|(k, _)| k).collect();
        let kb: Vec<_> = b.conditional_state.terms().map(|(k, _)| k).collect();
        ensure(ka == kb, || format!("ket sets differ for {}", a.label))?;
        worst = worst.max(a.conditional_state.max_abs_diff(&b.conditional_state));
        worst = worst.max((a.probability - b.probability).abs());
        for (fa, fb) in metric_pairs {
            let (x, y) = (a.metrics.get(*fa), b.metrics.get(*fb));
            match (x, y) {
                (Some(x), Some(y)) => worst = worst.max((x - y).abs()),
                _ => return Err(format!("metric {fa}/{fb} missing for {}", a.label)),
            }
        }
    }
    Ok(worst)
}

fn c11_dsl() -> Verdict {
    let mut worst: f64 = 0.0;
    for conv in CONVENTIONS {
        let run = pipeline("swap.qc", conv)?.execute().map_err(|e| e.to_string())?;
        let lib = run_swap(FRAC_PI_4, conv).map_err(|e| e.to_string())?;
        worst = worst.max(same_outcomes(
            &run.post_selection.accepted,
            &lib.post_selection.accepted,
            &[("entropy[1,1']", SWAP_ENTROPY_METRIC)],
        )?);
        let run = pipeline("ghz.qc", conv)?.execute().map_err(|e| e.to_string())?;
        let lib = run_ghz(FRAC_PI_4, conv).map_err(|e| e.to_string())?;
        worst = worst.max(same_outcomes(
            &run.post_selection.accepted,
            &lib.post_selection.accepted,
            &[(GHZ_FIDELITY_METRIC, GHZ_FIDELITY_METRIC)],
        )?);
    }
    ensure(worst <= DSL_TOL, || format!("max deviation {worst:e}"))?;
    Ok(format!("swap.qc and ghz.qc match the library in both conventions, max deviation {worst:.1e}"))
}

fn c12_determinism() -> Verdict {
    let mut outputs = Vec::new();
    for _ in 0..5 {
        let o = Command::new(env!("CARGO_BIN_EXE_aomsim"))
            .args(["demo", "ghz", "--json", "-"])
            .output()
            .map_err(|e| e.to_string())?;
        ensure(o.status.success(), || String::from_utf8_lossy(&o.stderr).into_owned())?;
        outputs.push(o.stdout);
    }
    for _ in 0..5 {
        let mut buf = Vec::new();
        demo_ghz(&mut buf, FRAC_PI_4, Convention::Unitary, &JsonOpts { target: Some("-".into()), pretty: false })
            .map_err(|f| f.message)?;
        outputs.push(buf);
    }
    ensure(!outputs[0].is_empty(), || "empty output".into())?;
    ensure(outputs.iter().all(|o| *o == outputs[0]), || "outputs differ".into())?;
    Ok(format!("{} runs byte-identical ({} bytes)", outputs.len(), outputs[0].len()))
}

fn main() {
    let criteria: [Criterion; 12] = [
        ("swap success probability", c1_swap_success),
        ("swap herald probabilities and entropy", c2_swap_heralds),
        ("swap state factorization (PaperLiteral)", c3_factorization),
        ("leftover photons are pure (PaperLiteral)", c4_leftover_purity),
        ("GHZ heralding probability", c5_ghz_probability),
        ("GHZ alpha law", c6_alpha_law),
        ("GHZ fidelity", c7_ghz_fidelity),
        ("sparse vs dense oracle", c8_oracle),
        ("isometry and non-unitary flag", c9_isometry),
        ("post-selection completeness", c10_completeness),
        ("circuit file equivalence", c11_dsl),
        ("deterministic JSON", c12_determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let verdict = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        match verdict {
            Ok(detail) => println!("PASS criterion {:>2}: {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {:>2}: {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
