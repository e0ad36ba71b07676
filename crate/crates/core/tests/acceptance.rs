//! End-to-end acceptance run: one line per criterion, nonzero exit on failure.

mod common;

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hemi_ns::boundary_law::{eval_envelope, fixture, multivalued_value, rauch_check};
use hemi_ns::check::CheckResult;
use hemi_ns::control::{minimize, objective_j, solution_map, stability_experiment, ControlProblem};
use hemi_ns::directional_growth::{
    check_conditions, sample_grid, solve_with_superpotential, ArcFunction, Condition, GrowthData,
    GrowthFunction, ScalarPotential, SuperPotential,
};
use hemi_ns::evolve::{solve, sweep};
use hemi_ns::fixtures::{f1_config, f1_spec, f2_config, f3_config, f3_exact, f4_problem, smooth_forcing};
use hemi_ns::galerkin::{assemble, build_basis, default_quad_order};
use hemi_ns::verify::{energy_report, kappa_inclusion_check, skew_symmetry_check, uniform_integrability_report};

use common::*;

type Outcome = Result<(bool, String), String>;
type Criterion = (&'static str, fn() -> Outcome, f64);

fn criterion_1() -> Outcome {
    let nu = 0.7;
    let sys = assemble(&build_basis(4).map_err(|e| e.to_string())?, nu, default_quad_order(4)).map_err(|e| e.to_string())?;
    let m = sys.m();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let u: Vec<f64> = (0..m).map(|_| rng.random_range(-2.0..2.0)).collect();
        let v: Vec<f64> = (0..m).map(|_| rng.random_range(-2.0..2.0)).collect();
        let nu_: f64 = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        let nv: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        worst = worst.max(sys.trilinear_form(&u, &v, &v).abs() / (1.0 + nu_ * nv * nv));
    }
    let library = skew_symmetry_check(&sys, 100, 7).map_err(|e| e.to_string())?.passed();
    let (mass, stiff) = mass_stiffness(4, nu, 24);
    let mut op_err: f64 = 0.0;
    for i in 0..m {
        for j in 0..m {
            op_err = op_err.max((sys.mass[(i, j)] - mass[i][j]).abs());
            op_err = op_err.max((sys.stiffness[(i, j)] - stiff[i][j]).abs());
        }
    }
    let a11 = (sys.stiffness[(0, 0)] - nu * PI.powi(4)).abs();
    let m11 = (sys.mass[(0, 0)] - PI * PI / 2.0).abs();
    let ok = worst <= 1e-10 && library && op_err <= 1e-8 && a11 <= 1e-8 && m11 <= 1e-8;
    Ok((
        ok,
        format!("skew {worst:.2e}, operator oracle {op_err:.2e}, A11 {a11:.1e}, M11 {m11:.1e}, library skew check {library}"),
    ))
}

fn criterion_2() -> Outcome {
    let mut errs = Vec::new();
    for dt in [1e-2, 1e-3] {
        let cfg = f3_config(dt).map_err(|e| e.to_string())?;
        let (traj, _) = solve(&cfg).map_err(|e| e.to_string())?;
        let c0 = traj.coeffs[0][0];
        let err = traj
            .times
            .iter()
            .zip(&traj.coeffs)
            .map(|(&t, c)| (c[0] - c0 * f3_exact(t)).abs() / c0.abs())
            .fold(0.0, f64::max);
        errs.push((dt, err));
    }
    let within = errs.iter().all(|&(dt, e)| e <= 5.0 * dt);
    let ratio = errs[0].1 / errs[1].1;
    let ok = within && (3.0..=7.0).contains(&ratio);
    Ok((
        ok,
        format!(
            "err(1e-2) = {:.3e} = {:.2} dt, err(1e-3) = {:.3e} = {:.2} dt, ratio {ratio:.2} (want [3, 7])",
            errs[0].1,
            errs[0].1 / errs[0].0,
            errs[1].1,
            errs[1].1 / errs[1].0
        ),
    ))
}

fn criterion_3() -> Outcome {
    let cube = rauch_check(&fixture("remark-floor-cube").map_err(|e| e.to_string())?);
    let sqrt = rauch_check(&fixture("remark-sqrt").map_err(|e| e.to_string())?);
    let witness = match &sqrt {
        CheckResult::Violated(w) => format!("witness at {:?}: {} vs {}", w.point, w.lhs, w.rhs),
        other => format!("sqrt gave {other:?}"),
    };
    Ok((cube.is_satisfied() && sqrt.is_violated(), format!("floor-cube satisfied {}, {witness}", cube.is_satisfied())))
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut queries: Vec<f64> = (0..997).map(|_| rng.random_range(-2.5..2.5)).collect();
    queries.extend([0.0, 1.0, -1.0]);
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for name in ["sign", "step", "remark-floor-cube"] {
        let law = fixture(name).map_err(|e| e.to_string())?;
        let theta = closed_form(name);
        let breaks = breakpoints(name);
        for eps in [0.0, 0.05] {
            let env = eval_envelope(&law, eps).map_err(|e| e.to_string())?;
            for &t in &queries {
                let (lo, hi) = sampled_envelope(theta, breaks, t, eps, 1e-4);
                let iv = env.at(t).map_err(|e| e.to_string())?;
                worst = worst.max((iv.lo - lo).abs()).max((iv.hi - hi).abs());
                if eps == 0.0 {
                    let hat = multivalued_value(&law, t).map_err(|e| e.to_string())?;
                    worst = worst.max((hat.lo - lo).abs()).max((hat.hi - hi).abs());
                }
                count += 1;
            }
        }
    }
    Ok((worst <= 1e-6, format!("{count} envelope queries, worst deviation {worst:.2e}")))
}

fn criterion_5() -> Outcome {
    let runs = [
        ("F1", f1_config(0.05)),
        ("F2", f2_config(0.05)),
        ("F3", f3_config(1e-3)),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, cfg) in runs {
        let cfg = cfg.map_err(|e| e.to_string())?;
        let (traj, _) = solve(&cfg).map_err(|e| e.to_string())?;
        let rep = energy_report(&traj, &cfg).map_err(|e| e.to_string())?;
        ok &= rep.passed();
        parts.push(format!("{name} {}", if rep.passed() { "ok" } else { "failed" }));
    }
    Ok((ok, parts.join(", ")))
}

fn criterion_6() -> Outcome {
    let law = fixture("sign").map_err(|e| e.to_string())?;
    let mut ok = true;
    let mut parts = Vec::new();
    for eps in [0.1, 0.05, 0.025] {
        let cfg = f1_config(eps).map_err(|e| e.to_string())?;
        let (_, field) = solve(&cfg).map_err(|e| e.to_string())?;
        let rep = kappa_inclusion_check(&field, &law, 1e-6).map_err(|e| e.to_string())?;
        let mut far = 0;
        let mut dev: f64 = 0.0;
        for (us, ks) in field.u_n.iter().zip(&field.kappa) {
            for (&u, &k) in us.iter().zip(ks) {
                if u.abs() > 3.0 * eps {
                    far += 1;
                    dev = dev.max((k - u.signum()).abs());
                }
            }
        }
        ok &= rep.passed() && dev <= 1e-6 && far > 0;
        parts.push(format!("eps {eps}: inclusion {}, {far} far nodes, dev {dev:.1e}", rep.passed()));
    }
    Ok((ok, parts.join("; ")))
}

fn criterion_7() -> Outcome {
    let rep = sweep(&f1_spec().map_err(|e| e.to_string())?, &[1, 4, 9], &[0.1, 0.05, 0.025]).map_err(|e| e.to_string())?;
    let mut fields = Vec::new();
    for e in rep.entries {
        fields.push(e.result.map_err(|e| e.to_string())?.1);
    }
    let ui = uniform_integrability_report(&fields, 3).map_err(|e| e.to_string())?;
    let ratios: Vec<f64> = ui
        .records
        .iter()
        .filter(|r| r.name.starts_with("density_ratio"))
        .map(|r| r.measured)
        .collect();
    let spread = ratios.iter().cloned().fold(0.0, f64::max) / ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let density_ok = ui.records.iter().filter(|r| r.name.starts_with("density_ratio")).all(|r| r.pass);
    Ok((
        density_ok && ratios.len() == 3 && spread <= 10.0,
        format!("S(delta)/delta = {}, spread {spread:.2}", sci(&ratios)),
    ))
}

fn sci(xs: &[f64]) -> String {
    xs.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join(" ")
}

fn norm(w: &[f64]) -> f64 {
    w.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn nonincreasing(js: &[f64]) -> bool {
    js.windows(2).all(|w| w[1] <= w[0])
}

fn criterion_8() -> Outcome {
    let tracking = f4_problem(false).map_err(|e| e.to_string())?;
    let rep = minimize(&tracking, 500).map_err(|e| e.to_string())?;
    let w_norm = norm(&rep.best_w);
    let track_ok = w_norm <= 1e-6 && rep.best_j <= 1e-10 && nonincreasing(&rep.accepted_j());

    let inversion = f4_problem(true).map_err(|e| e.to_string())?;
    let zero = vec![0.0; inversion.dim()];
    let j0 = objective_j(&inversion, &zero, &solution_map(&inversion, &zero).map_err(|e| e.to_string())?.0)
        .map_err(|e| e.to_string())?;
    let inv = minimize(&inversion, 500).map_err(|e| e.to_string())?;
    let inv_ok = inv.best_j < j0 && inv.evaluations <= 500 && nonincreasing(&inv.accepted_j());
    Ok((
        track_ok && inv_ok,
        format!(
            "tracking |w| = {w_norm:.1e}, J = {:.1e}; inversion J(0) = {j0:.3e}, J(best) = {:.3e} in {} evaluations",
            rep.best_j, inv.best_j, inv.evaluations
        ),
    ))
}

fn criterion_9() -> Outcome {
    let base = f1_config(0.05).map_err(|e| e.to_string())?;
    let (target, _) = solve(&base).map_err(|e| e.to_string())?;
    let m = base.system.m();
    let tracking = f4_problem(false).map_err(|e| e.to_string())?;
    let problem = ControlProblem {
        operator_c: ControlProblem::default_operator(m, 2),
        base,
        target,
        ..tracking
    };
    let g = smooth_forcing().scaled(0.1);
    let deltas: Vec<_> = (0..7).map(|j| g.scaled(0.5f64.powi(j))).collect();
    let st = stability_experiment(&problem, &deltas).map_err(|e| e.to_string())?;
    let dists: Vec<f64> = st.rows.iter().map(|r| r.l2_v).collect();
    let strict = st.rows.len() == 7 && dists.windows(2).all(|w| w[1] < w[0]);
    Ok((st.pass && strict, format!("L2(V) distances {}", sci(&dists))))
}

fn criterion_10() -> Outcome {
    let cfg = f1_config(0.05).map_err(|e| e.to_string())?;
    let law = fixture("sign").map_err(|e| e.to_string())?;
    let sp = SuperPotential::from_law(&law, GrowthFunction::constant(2.0));
    let direct = solve(&cfg).map_err(|e| e.to_string())?;
    let reduced = solve_with_superpotential(&sp, &cfg).map_err(|e| e.to_string())?;
    let identical = direct.0 == reduced.0 && direct.1 == reduced.1;

    let samples = sample_grid(&[0.0, 1.3, 2.7], &[1.0], 10.0, 21);
    let no_growth = GrowthData {
        alpha: GrowthFunction::constant(1.0),
        k: ArcFunction::constant(0.0),
    };
    let verdict = |g: ScalarPotential, a: f64| -> Result<CheckResult, String> {
        let sp = SuperPotential::new(vec![(ArcFunction::constant(a), g)], GrowthFunction::constant(1.0), 10.0, 1e-3)
            .map_err(|e| e.to_string())?;
        Ok(check_conditions(&sp, &no_growth, Condition::G2, &samples))
    };
    let abs = verdict(ScalarPotential::Abs, 1.0)?;
    let quad = verdict(ScalarPotential::Quadratic, 1.0)?;
    let neg = verdict(ScalarPotential::Quadratic, -1.0)?;
    let g2_ok = abs.is_satisfied() && quad.is_satisfied() && neg.is_violated();
    let tag = |c: &CheckResult| if c.is_satisfied() { "S" } else if c.is_violated() { "V" } else { "I" };
    Ok((
        identical && g2_ok,
        format!("bit-identical {identical}, G2 verdicts {} {} {}", tag(&abs), tag(&quad), tag(&neg)),
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("operator invariants", criterion_1, 10.0),
        ("analytic decay", criterion_2, 5.0),
        ("rauch classification", criterion_3, 1.0),
        ("envelope oracle", criterion_4, 5.0),
        ("energy estimate", criterion_5, 60.0),
        ("multiplier inclusion", criterion_6, 60.0),
        ("equi-integrability trend", criterion_7, 120.0),
        ("control", criterion_8, 600.0),
        ("stability", criterion_9, 300.0),
        ("superpotential reduction", criterion_10, 30.0),
    ];
    let mut failed = 0;
    for (i, (name, run, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed().as_secs_f64();
        let (ok, detail) = match outcome {
            Ok((ok, d)) => (ok && elapsed < *limit, d),
            Err(e) => (false, format!("error: {e}")),
        };
        if !ok {
            failed += 1;
        }
        println!(
            "criterion {} {name}: {} ({detail}; {elapsed:.2} of {limit} s)",
            i + 1,
            if ok { "PASS" } else { "FAIL" }
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
