//! Catalog of reference runs F1–F5.
//!
//! * F1: sign law, smooth two-mode forcing, 2×2 modes.
//! * F2: the floor-cube law with the F1 data.
//! * F3: single-mode free decay, `ν = 1`, zero law.
//! * F4: control on a 2×2 zero-law run (tracking and plant-inversion variants).
//! * F5: superpotential `a(x)|ξ|` with the F1 data.

use std::f64::consts::PI;

use crate::boundary_law::{fixture, Mollifier};
use crate::control::{Admissible, ControlProblem, CostH};
use crate::directional_growth::{
    ArcFunction, GrowthData, GrowthFunction, ScalarPotential, SuperPotential,
};
use crate::error::{Error, Result};
use crate::evolve::{solve, ProblemSpec, SolveConfig};
use crate::galerkin::{ForcingSpec, ForcingTarget, InitialData, Mode, TimeProfile};

pub const RUN_NAMES: [&str; 5] = ["F1", "F2", "F3", "F4", "F5"];

/// Modes per axis for F1, F2, F4 and F5.
pub const MPA: usize = 2;
pub const DEFAULT_EPSILON: f64 = 0.05;

/// Smooth forcing on modes (1,1) and (1,2).
pub fn smooth_forcing() -> ForcingSpec {
    ForcingSpec::zero()
        .with_term(
            ForcingTarget::Mode(Mode { k: 1, l: 1 }),
            30.0,
            TimeProfile::Sine {
                omega: 2.0 * PI,
                phase: 0.0,
            },
        )
        .with_term(
            ForcingTarget::Mode(Mode { k: 1, l: 2 }),
            15.0,
            TimeProfile::Sine {
                omega: 2.0 * PI,
                phase: 0.5 * PI,
            },
        )
}

fn smooth_spec(law: &str) -> Result<ProblemSpec> {
    Ok(ProblemSpec {
        nu: 0.5,
        t_end: 1.0,
        dt: 1e-3,
        law: fixture(law)?,
        forcing: smooth_forcing(),
        initial: InitialData::Modal(vec![(1, 1, 0.5), (2, 1, -0.25)]),
        quad_order: None,
        mollifier_order: Mollifier::DEFAULT_QUAD_ORDER,
    })
}

pub fn f1_spec() -> Result<ProblemSpec> {
    smooth_spec("sign")
}

pub fn f2_spec() -> Result<ProblemSpec> {
    smooth_spec("remark-floor-cube")
}

pub fn f3_spec() -> Result<ProblemSpec> {
    Ok(ProblemSpec {
        nu: 1.0,
        t_end: 1.0,
        dt: 1e-3,
        law: fixture("zero")?,
        forcing: ForcingSpec::zero(),
        initial: InitialData::Coefficients(vec![1.0]),
        quad_order: None,
        mollifier_order: Mollifier::DEFAULT_QUAD_ORDER,
    })
}

pub fn f1_config(epsilon: f64) -> Result<SolveConfig> {
    f1_spec()?.config(MPA, epsilon)
}

pub fn f2_config(epsilon: f64) -> Result<SolveConfig> {
    f2_spec()?.config(MPA, epsilon)
}

pub fn f3_config(dt: f64) -> Result<SolveConfig> {
    let mut spec = f3_spec()?;
    spec.dt = dt;
    spec.config(1, DEFAULT_EPSILON)
}

/// `c₀ e^{-2π² t}` for F3.
pub fn f3_exact(t: f64) -> f64 {
    (-2.0 * PI * PI * t).exp()
}

/// Control slots in F4.
pub const F4_INTERVALS: usize = 4;
/// Forced coefficients in F4.
pub const F4_CONTROLS: usize = 2;

pub const F4_EPSILON: f64 = 0.1;

/// Uncontrolled F4 state: zero law, no forcing, `dt = 1e-2`.
pub fn f4_spec() -> Result<ProblemSpec> {
    Ok(ProblemSpec {
        nu: 1.0,
        t_end: 1.0,
        dt: 1e-2,
        law: fixture("zero")?,
        forcing: ForcingSpec::zero(),
        initial: InitialData::Modal(vec![(1, 1, 1.0)]),
        quad_order: None,
        mollifier_order: Mollifier::DEFAULT_QUAD_ORDER,
    })
}

/// Control generating the F4 plant-inversion target.
pub fn f4_w_star() -> Vec<f64> {
    vec![2.0, -1.0, 1.5, 0.5, -1.0, 2.0, 0.5, -1.5]
}

/// F4. With `plant_inversion = false` the target is the uncontrolled run and
/// `h = |w|²`; otherwise the target comes from [`f4_w_star`] and
/// `h = 1e-6 |w|²`.
pub fn f4_problem(plant_inversion: bool) -> Result<ControlProblem> {
    let base = f4_spec()?.config(MPA, F4_EPSILON)?;
    let (uncontrolled, _) = solve(&base)?;
    let m = base.system.m();
    let mut problem = ControlProblem {
        base,
        n_intervals: F4_INTERVALS,
        n_controls: F4_CONTROLS,
        operator_c: ControlProblem::default_operator(m, F4_CONTROLS),
        admissible: Admissible::Box { lo: -5.0, hi: 5.0 },
        target: uncontrolled,
        cost_h: CostH::quadratic(1.0),
        seed: 11,
    };
    if plant_inversion {
        let forced = problem.base.with_forcing(problem.forcing_for(&f4_w_star()));
        problem.target = solve(&forced)?.0;
        problem.cost_h = CostH::quadratic(1e-6);
    }
    problem.validate()?;
    Ok(problem)
}

/// `a(x) = 1 + ½ cos(2π x / 4)` on the arc length.
pub fn f5_weight() -> ArcFunction {
    ArcFunction::Cosine {
        mean: 1.0,
        amp: 0.5,
        periods: 1.0,
    }
}

/// `j(x, ξ) = a(x)|ξ|`.
pub fn f5_superpotential() -> Result<SuperPotential> {
    SuperPotential::new(
        vec![(f5_weight(), ScalarPotential::Abs)],
        GrowthFunction {
            kind: crate::directional_growth::GrowthKind::Constant { c: 2.0 },
            scale: f5_weight(),
        },
        10.0,
        1e-3,
    )
}

/// Growth data valid for F5 on every `r ≥ 0`: `α = 1.5 (1 + r)`, `k = 1.5`.
pub fn f5_growth() -> GrowthData {
    GrowthData {
        alpha: GrowthFunction::affine(1.5, 1.5),
        k: ArcFunction::constant(1.5),
    }
}

/// F1 data; its law is unused once the superpotential drives the boundary.
pub fn f5_config(epsilon: f64) -> Result<SolveConfig> {
    smooth_spec("zero")?.config(MPA, epsilon)
}

/// `(spec, modes per axis, ε)` of a catalog run; F4 gives its uncontrolled state.
pub fn run_spec(name: &str) -> Result<(ProblemSpec, usize, f64)> {
    match name {
        "F1" => Ok((f1_spec()?, MPA, DEFAULT_EPSILON)),
        "F2" => Ok((f2_spec()?, MPA, DEFAULT_EPSILON)),
        "F3" => Ok((f3_spec()?, 1, DEFAULT_EPSILON)),
        "F4" => Ok((f4_spec()?, MPA, F4_EPSILON)),
        "F5" => Ok((smooth_spec("zero")?, MPA, DEFAULT_EPSILON)),
        other => Err(Error::Config(format!(
            "unknown fixture run {other:?}; expected one of {}",
            RUN_NAMES.join(", ")
        ))),
    }
}

pub fn run_config(name: &str, epsilon: Option<f64>) -> Result<SolveConfig> {
    let (spec, mpa, eps) = run_spec(name)?;
    spec.config(mpa, epsilon.unwrap_or(eps))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_builds() {
        for name in RUN_NAMES {
            let cfg = run_config(name, None).unwrap();
            assert!(cfg.steps().unwrap() > 0, "{name}");
        }
        assert!(run_config("F9", None).is_err());
        assert_eq!(f1_config(0.1).unwrap().system.m(), 4);
    }

    #[test]
    fn f4_variants() {
        let tracking = f4_problem(false).unwrap();
        let inversion = f4_problem(true).unwrap();
        assert_eq!(tracking.dim(), 8);
        assert_ne!(tracking.target, inversion.target);
        assert!(tracking.admissible.contains(&f4_w_star(), 0.0));
    }
}
