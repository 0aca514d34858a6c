//! Acceptance criteria, one PASS/FAIL line each. Exits non-zero when any fails.

use std::time::Instant;

use fkdv_core::commutators::c_coeff;
use fkdv_core::diagnostics::{ladder_plan, run_propagation_experiment, ExperimentSpec, LadderCase};
use fkdv_core::experiment_io::cli::probe_with_refinement;
use fkdv_core::experiment_io::{operator_suite, SuiteCheck};
use fkdv_core::solver::{conserved, run, SolverConfig};
use fkdv_core::spectral::{make_grid, Field};
use fkdv_core::weights::{family_for, sweep_params, verify_weight_properties, Bump};
use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, ToPrimitive, Zero};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn suite_line(checks: &[&SuiteCheck]) -> Verdict {
    let failed: Vec<_> = checks.iter().filter(|c| c.pass == Some(false)).collect();
    let detail = checks
        .iter()
        .map(|c| format!("{} {:.2e}/{:e}", c.name, c.value, c.tolerance))
        .collect::<Vec<_>>()
        .join(", ");
    verdict(failed.is_empty(), detail)
}

fn operator_exactness(suite: &[SuiteCheck]) -> Verdict {
    let names = ["riesz_pure_modes", "bessel_pure_modes", "hilbert_pure_modes", "hilbert_squared"];
    let picked: Vec<_> = suite.iter().filter(|c| names.contains(&c.name.as_str())).collect();
    assert_eq!(picked.len(), names.len());
    suite_line(&picked)
}

fn c_exact(a: &BigRational, j: usize) -> BigRational {
    let mut num = BigRational::one();
    for k in 0..j {
        let odd = BigRational::from_integer(BigInt::from(2 * k + 1));
        num *= a * a - &odd * &odd;
    }
    let fact: BigInt = (1..=(2 * j + 1)).map(BigInt::from).product();
    num / BigRational::from_integer(fact)
}

fn coefficient_oracle() -> Verdict {
    let mut worst = 0.0f64;
    let mut exact_zero = true;
    for i in 0..=300 {
        let a = 1.0 + 3.0 * i as f64 / 300.0;
        for j in 0..=6 {
            let exact = c_exact(&BigRational::from_float(a).unwrap(), j);
            let got = c_coeff(a, j);
            if exact.is_zero() {
                exact_zero &= got == 0.0;
            } else {
                let want = exact.to_f64().unwrap();
                worst = worst.max(((got - want) / want).abs());
            }
        }
    }
    let unit_zero = (1..=6).all(|j| c_coeff(1.0, j) == 0.0);
    verdict(
        worst <= 1e-14 && exact_zero && unit_zero,
        format!("max relative error {worst:.2e} (tolerance 1e-14), c(1, j >= 1) == 0: {unit_zero}"),
    )
}

fn closed_form(suite: &[SuiteCheck]) -> Verdict {
    let c: Vec<_> = suite.iter().filter(|c| c.name == "remainder_closed_form").collect();
    suite_line(&c)
}

fn remainder_bound(suite: &[SuiteCheck]) -> Verdict {
    let bound: Vec<_> = suite.iter().filter(|c| c.name.starts_with("remainder_bound")).collect();
    let unit: Vec<_> = bound.iter().copied().filter(|c| c.pass.is_some()).collect();
    let recorded = bound.len() - unit.len();
    let worst = unit.iter().map(|c| c.value).fold(0.0, f64::max);
    let worst_recorded = bound.iter().filter(|c| c.pass.is_none()).map(|c| c.value).fold(0.0, f64::max);
    let pass = unit.iter().all(|c| c.pass == Some(true));
    verdict(
        pass,
        format!(
            "{} unit-constant triples, max ratio {worst:.3} (limit 1.05); {recorded} other triples recorded, max {worst_recorded:.3e}",
            unit.len()
        ),
    )
}

fn weight_family() -> Verdict {
    let bump = Bump::default();
    let mut failures = Vec::new();
    let mut partition = 0.0f64;
    for p in sweep_params() {
        let w = match family_for(p, &bump) {
            Ok(w) => w,
            Err(e) => {
                failures.push(format!("(eps {}, b {}): {e}", p.epsilon, p.b));
                continue;
            }
        };
        let r = verify_weight_properties(&w);
        if let Some(c) = r.check("14") {
            partition = partition.max(c.worst_residual);
        }
        for c in r.failed() {
            failures.push(format!("(eps {}, b {}) property {} residual {:.3e}", p.epsilon, p.b, c.id, c.worst_residual));
        }
    }
    let pass = failures.is_empty() && partition < 1e-10;
    let mut detail = format!("partition residual {partition:.2e} (limit 1e-10)");
    if !failures.is_empty() {
        detail.push_str(&format!("; {} failures: {}", failures.len(), failures.join("; ")));
    }
    verdict(pass, detail)
}

fn gaussian(n: usize, l: f64) -> Field {
    let g = make_grid(n, l).unwrap();
    Field::from_fn(&g, |x| 0.5 * (-(x / 3.0).powi(2)).exp()).unwrap()
}

fn max_diff(a: &Field, b: &Field) -> f64 {
    a.values().iter().zip(b.values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn solver_conservation() -> Verdict {
    let alpha = 0.75;
    let u0 = gaussian(2048, 30.0 * std::f64::consts::PI);
    let end = run(u0.clone(), &SolverConfig::new(alpha, 1e-3, 5.0), &mut []).unwrap();
    let (q0, q1) = (conserved(&u0, alpha), conserved(&end.u, alpha));
    let mass = (q1.mass - q0.mass).abs();
    let l2 = ((q1.l2 - q0.l2) / q0.l2).abs();
    let ham = ((q1.hamiltonian - q0.hamiltonian) / q0.hamiltonian).abs();

    // Dyadic dt refinement against a dt/16 reference.
    let u = gaussian(256, 30.0);
    let solve = |dt: f64| run(u.clone(), &SolverConfig::new(alpha, dt, 2.0), &mut []).unwrap().u;
    let dt = 0.1;
    let reference = solve(dt / 16.0);
    let e1 = max_diff(&solve(dt), &reference);
    let e2 = max_diff(&solve(dt / 2.0), &reference);
    let order = (e1 / e2).log2();

    let pass = mass <= 1e-12 && l2 <= 1e-6 && ham <= 1e-5 && (3.5..=4.5).contains(&order);
    verdict(
        pass,
        format!(
            "mass {mass:.2e} (1e-12), l2 {l2:.2e} (1e-6), hamiltonian {ham:.2e} (1e-5), order {order:.3} in [3.5, 4.5]"
        ),
    )
}

fn ladder_rule() -> Verdict {
    let mut bad = Vec::new();
    let mut summary = Vec::new();
    for alpha in [0.30, 0.40, 0.50, 0.66, 0.75, 0.90] {
        let plan = ladder_plan(alpha, 2).unwrap();
        // Smallest n with n alpha >= 2, and the k with 1/(k+1) <= alpha < 1/k.
        let steps = (1..).find(|&n| n as f64 * alpha >= 2.0 - 1e-12).unwrap();
        let k = (1..).find(|&k: &u32| alpha >= 1.0 / (k as f64 + 1.0) - 1e-12).unwrap();
        let case = if alpha >= 2.0 / (2.0 * k as f64 + 1.0) - 1e-12 { LadderCase::A } else { LadderCase::B };
        if plan.fractional_steps() != steps || plan.k != k || plan.case_tag != case || plan.case_step_count() != steps {
            bad.push(format!("alpha {alpha}: plan {} steps case {:?}, expected {steps} case {case:?}", plan.fractional_steps(), plan.case_tag));
        }
        summary.push(format!("{alpha}:{steps}{:?}", plan.case_tag));
    }
    let mut detail = summary.join(" ");
    if !bad.is_empty() {
        detail = bad.join("; ");
    }
    verdict(bad.is_empty(), detail)
}

fn flagship() -> Verdict {
    let spec = ExperimentSpec::flagship().unwrap();
    match run_propagation_experiment(&spec) {
        Ok(out) => {
            let detail = out
                .checks
                .iter()
                .map(|c| format!("{} {:?} {:.3e}/{}", c.name, c.status, c.value, c.threshold))
                .collect::<Vec<_>>()
                .join(", ");
            verdict(out.pass, detail)
        }
        Err(e) => verdict(false, format!("experiment failed: {e}")),
    }
}

fn probes() -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for name in ["calderon", "leibniz", "kato-ponce", "gagliardo-nirenberg", "disjoint-support"] {
        match probe_with_refinement(name, 512, 20, 1) {
            Ok((coarse, fine)) => {
                let (a, b) = (coarse.measured_best_constant, fine.measured_best_constant);
                let change = (a - b).abs() / b.abs();
                let ok = a.is_finite() && b.is_finite() && b > 0.0 && change <= 0.2;
                pass &= ok;
                parts.push(format!("{name} {a:.4e}->{b:.4e} ({:.1}%)", 100.0 * change));
            }
            Err(e) => {
                pass = false;
                parts.push(format!("{name}: {e}"));
            }
        }
    }
    verdict(pass, parts.join(", "))
}

fn main() {
    let suite = operator_suite(1024).expect("operator suite runs");
    type Criterion<'a> = (&'static str, Box<dyn Fn() -> Verdict + 'a>);
    let criteria: Vec<Criterion> = vec![
        ("operator exactness", Box::new(|| operator_exactness(&suite))),
        ("coefficient oracle", Box::new(coefficient_oracle)),
        ("closed-form commutator", Box::new(|| closed_form(&suite))),
        ("remainder bound", Box::new(|| remainder_bound(&suite))),
        ("weight family", Box::new(weight_family)),
        ("solver conservation", Box::new(solver_conservation)),
        ("ladder rule", Box::new(ladder_rule)),
        ("flagship propagation", Box::new(flagship)),
        ("inequality probes", Box::new(probes)),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = f();
        if !v.pass {
            failed += 1;
        }
        println!(
            "{} [{}] {name} ({:.1}s): {}",
            if v.pass { "PASS" } else { "FAIL" },
            i + 1,
            start.elapsed().as_secs_f64(),
            v.detail
        );
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
