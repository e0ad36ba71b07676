//! Tracking-type optimal control over the regularised state system.
//!
//! Controls are piecewise constant on `n_intervals` equal time slots with
//! `n_controls` components each, and enter the forcing through a matrix
//! `C` (basis size × `n_controls`). The parameter vector stores slot `j`,
//! component `c` at `j * n_controls + c`.

use std::fmt::Write as _;

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::check::{CheckResult, Witness};
use crate::error::{Error, Result};
use crate::evolve::{solve, MultiplierField, SolveConfig, Trajectory};
use crate::galerkin::{ForcingSpec, ForcingTarget, TimeProfile};
use crate::verify::dual_norm_sq;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Admissible {
    /// `lo ≤ w_i ≤ hi` for every parameter.
    Box { lo: f64, hi: f64 },
    /// Euclidean ball of the parameter vector.
    Ball { radius: f64 },
}

impl Admissible {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Admissible::Box { lo, hi } if lo.is_finite() && hi.is_finite() && lo <= hi => Ok(()),
            Admissible::Ball { radius } if radius.is_finite() && radius >= 0.0 => Ok(()),
            other => Err(Error::Config(format!("admissible set {other:?} is empty or unbounded"))),
        }
    }

    pub fn project(&self, w: &[f64]) -> Vec<f64> {
        match *self {
            Admissible::Box { lo, hi } => w.iter().map(|v| v.clamp(lo, hi)).collect(),
            Admissible::Ball { radius } => {
                let n = norm(w);
                if n <= radius {
                    w.to_vec()
                } else {
                    w.iter().map(|v| v * (radius / n)).collect()
                }
            }
        }
    }

    pub fn contains(&self, w: &[f64], tol: f64) -> bool {
        match *self {
            Admissible::Box { lo, hi } => w.iter().all(|&v| v >= lo - tol && v <= hi + tol),
            Admissible::Ball { radius } => norm(w) <= radius + tol,
        }
    }

    /// Initial pattern step.
    fn initial_step(&self) -> f64 {
        match *self {
            Admissible::Box { lo, hi } => 0.25 * (hi - lo),
            Admissible::Ball { radius } => 0.5 * radius,
        }
    }

    fn sample<R: Rng>(&self, dim: usize, rng: &mut R) -> Vec<f64> {
        match *self {
            Admissible::Box { lo, hi } => (0..dim).map(|_| rng.random_range(lo..=hi)).collect(),
            Admissible::Ball { radius } => {
                let w: Vec<f64> = (0..dim).map(|_| rng.random_range(-radius..=radius)).collect();
                self.project(&w)
            }
        }
    }
}

fn norm(w: &[f64]) -> f64 {
    w.iter().map(|v| v * v).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum CostKind {
    /// `weight · |w|²`
    Quadratic { weight: f64 },
    /// `weight · |w|² + offset`
    AffineQuadratic { weight: f64, offset: f64 },
    /// `weight · |w|`
    Norm { weight: f64 },
}

/// Convex control cost `h` on one slot's control value, with its declared
/// coercivity constants `|h(w)| ≥ α|w|² + β`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostH {
    pub kind: CostKind,
    pub alpha: f64,
    pub beta: f64,
}

impl CostH {
    pub fn quadratic(alpha: f64) -> Self {
        CostH {
            kind: CostKind::Quadratic { weight: alpha },
            alpha,
            beta: 0.0,
        }
    }

    pub fn affine_quadratic(alpha: f64, beta: f64) -> Self {
        CostH {
            kind: CostKind::AffineQuadratic {
                weight: alpha,
                offset: beta,
            },
            alpha,
            beta,
        }
    }

    pub fn eval(&self, w: &[f64]) -> f64 {
        let sq: f64 = w.iter().map(|v| v * v).sum();
        match self.kind {
            CostKind::Quadratic { weight } => weight * sq,
            CostKind::AffineQuadratic { weight, offset } => weight * sq + offset,
            CostKind::Norm { weight } => weight * sq.sqrt(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite() && self.beta.is_finite()) {
            return Err(Error::Config(format!(
                "control cost needs alpha > 0 and finite beta, got alpha = {}, beta = {}",
                self.alpha, self.beta
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct ControlProblem {
    /// State configuration; its forcing is the uncontrolled `f`.
    pub base: SolveConfig,
    pub n_intervals: usize,
    pub n_controls: usize,
    pub operator_c: DMatrix<f64>,
    pub admissible: Admissible,
    pub target: Trajectory,
    pub cost_h: CostH,
    pub seed: u64,
}

impl ControlProblem {
    /// Identity onto the lowest `n_controls` forcing coefficients.
    pub fn default_operator(m: usize, n_controls: usize) -> DMatrix<f64> {
        DMatrix::from_fn(m, n_controls, |i, c| if i == c { 1.0 } else { 0.0 })
    }

    pub fn dim(&self) -> usize {
        self.n_intervals * self.n_controls
    }

    pub fn slot_length(&self) -> f64 {
        self.base.t_end / self.n_intervals as f64
    }

    pub fn operator_norm(&self) -> f64 {
        self.operator_c.clone().svd(false, false).singular_values.max()
    }

    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        self.admissible.validate()?;
        self.cost_h.validate()?;
        if self.n_intervals == 0 || self.n_controls == 0 {
            return Err(Error::Config("control needs at least one interval and one component".into()));
        }
        let m = self.base.system.m();
        if self.operator_c.nrows() != m || self.operator_c.ncols() != self.n_controls {
            return Err(Error::Config(format!(
                "control operator is {}x{}, expected {m}x{}",
                self.operator_c.nrows(),
                self.operator_c.ncols(),
                self.n_controls
            )));
        }
        if !self.operator_norm().is_finite() {
            return Err(Error::Config("control operator has non-finite entries".into()));
        }
        if self.target.len() != self.base.steps()? + 1 || self.target.m() != m {
            return Err(Error::Shape {
                expected: self.base.steps()? + 1,
                got: self.target.len(),
            });
        }
        Ok(())
    }

    /// `f + C w` as a forcing specification.
    pub fn forcing_for(&self, w: &[f64]) -> ForcingSpec {
        let step = self.slot_length();
        let mut out = self.base.forcing.clone();
        for c in 0..self.n_controls {
            let values: Vec<f64> = (0..self.n_intervals).map(|j| w[j * self.n_controls + c]).collect();
            if values.iter().all(|&v| v == 0.0) {
                continue;
            }
            for i in 0..self.operator_c.nrows() {
                let coef = self.operator_c[(i, c)];
                if coef != 0.0 {
                    out = out.with_term(
                        ForcingTarget::Index(i),
                        coef,
                        TimeProfile::Steps {
                            step,
                            values: values.clone(),
                        },
                    );
                }
            }
        }
        out
    }

    fn check_admissible(&self, w: &[f64]) -> Result<()> {
        if w.len() != self.dim() {
            return Err(Error::Shape {
                expected: self.dim(),
                got: w.len(),
            });
        }
        if !self.admissible.contains(w, 1e-12) {
            return Err(Error::ConstraintViolation(format!(
                "control outside {:?}",
                self.admissible
            )));
        }
        Ok(())
    }
}

/// One deterministic selection of the state for forcing `f + C w`.
pub fn solution_map(problem: &ControlProblem, w: &[f64]) -> Result<(Trajectory, MultiplierField)> {
    problem.check_admissible(w)?;
    solve(&problem.base.with_forcing(problem.forcing_for(w)))
}

/// `J = ∫₀ᵀ (c - z)ᵀ M (c - z) dt + Σ_j Δt h(w_j)`, trapezoid in time.
pub fn objective_j(problem: &ControlProblem, w: &[f64], traj: &Trajectory) -> Result<f64> {
    let z = &problem.target;
    if traj.len() != z.len() {
        return Err(Error::Shape {
            expected: z.len(),
            got: traj.len(),
        });
    }
    let sys = &problem.base.system;
    let err: Vec<f64> = traj
        .coeffs
        .iter()
        .zip(&z.coeffs)
        .map(|(c, zc)| {
            let d: Vec<f64> = c.iter().zip(zc).map(|(a, b)| a - b).collect();
            sys.h_norm_sq(&d)
        })
        .collect();
    let tracking: f64 = (1..err.len())
        .map(|n| 0.5 * (traj.times[n] - traj.times[n - 1]) * (err[n - 1] + err[n]))
        .sum();
    let dt = problem.slot_length();
    let control: f64 = w
        .chunks(problem.n_controls)
        .map(|slot| dt * problem.cost_h.eval(slot))
        .sum();
    Ok(tracking + control)
}

fn evaluate(problem: &ControlProblem, w: &[f64]) -> Result<f64> {
    let (traj, _) = solution_map(problem, w)?;
    objective_j(problem, w, &traj)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Iterate {
    pub w: Vec<f64>,
    pub j: Option<f64>,
    /// Improved on the best value found so far.
    pub accepted: bool,
    pub start: usize,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopReason {
    BudgetExhausted,
    Converged,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationReport {
    pub history: Vec<Iterate>,
    pub best_w: Vec<f64>,
    pub best_j: f64,
    pub evaluations: usize,
    pub stop_reason: StopReason,
    pub settings: Vec<String>,
}

impl OptimizationReport {
    /// J of accepted iterates in order.
    pub fn accepted_j(&self) -> Vec<f64> {
        self.history.iter().filter(|it| it.accepted).filter_map(|it| it.j).collect()
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# optimization report");
        for line in &self.settings {
            let _ = writeln!(s, "# {line}");
        }
        let _ = writeln!(s, "evaluations = {}", self.evaluations);
        let _ = writeln!(s, "stop_reason = {:?}", format!("{:?}", self.stop_reason));
        let _ = writeln!(s, "best_j = {:e}", self.best_j);
        let ws: Vec<String> = self.best_w.iter().map(|v| format!("{v:e}")).collect();
        let _ = writeln!(s, "best_w = [{}]", ws.join(", "));
        let _ = writeln!(s, "accepted = {}", self.accepted_j().len());
        s
    }
}

/// Pattern tolerance: polling stops once the step falls below this.
pub const PATTERN_TOL: f64 = 1e-7;
/// Number of starts; the first is the projection of `w = 0`.
pub const STARTS: usize = 3;

/// Multi-start projected compass search within `budget` evaluations.
pub fn minimize(problem: &ControlProblem, budget: usize) -> Result<OptimizationReport> {
    if budget == 0 {
        return Err(Error::Usage("minimize needs a budget of at least one evaluation".into()));
    }
    problem.validate()?;
    let dim = problem.dim();
    let adm = problem.admissible;
    let mut rng = ChaCha8Rng::seed_from_u64(problem.seed);
    let mut starts = vec![adm.project(&vec![0.0; dim])];
    for _ in 1..STARTS {
        starts.push(adm.sample(dim, &mut rng));
    }

    let mut history: Vec<Iterate> = Vec::new();
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut used = 0usize;
    let record = |history: &mut Vec<Iterate>, best: &mut Option<(Vec<f64>, f64)>, w: Vec<f64>, r: Result<f64>, start| {
        let (j, error) = match r {
            Ok(j) if j.is_finite() => (Some(j), None),
            Ok(j) => (None, Some(format!("objective evaluated to {j}"))),
            Err(e) => (None, Some(e.to_string())),
        };
        let accepted = match (j, best.as_ref()) {
            (Some(_), None) => true,
            (Some(j), Some((_, b))) => j < *b,
            _ => false,
        };
        if accepted {
            *best = Some((w.clone(), j.expect("accepted has a value")));
        }
        history.push(Iterate {
            w,
            j,
            accepted,
            start,
            error,
        });
    };

    let mut exhausted = false;
    'starts: for (si, start) in starts.into_iter().enumerate() {
        if used >= budget {
            exhausted = true;
            break;
        }
        let j0 = evaluate(problem, &start);
        used += 1;
        let mut current = j0.as_ref().ok().copied().map(|j| (start.clone(), j));
        record(&mut history, &mut best, start, j0, si);
        let Some((mut x, mut jx)) = current.take() else {
            continue;
        };
        let mut step = adm.initial_step();
        while step >= PATTERN_TOL {
            let mut polls: Vec<Vec<f64>> = Vec::with_capacity(2 * dim);
            for d in 0..dim {
                for sgn in [1.0, -1.0] {
                    let mut y = x.clone();
                    y[d] += sgn * step;
                    let y = adm.project(&y);
                    if y != x && !polls.contains(&y) {
                        polls.push(y);
                    }
                }
            }
            if polls.is_empty() {
                step *= 0.5;
                continue;
            }
            let room = budget - used;
            if room == 0 {
                exhausted = true;
                break 'starts;
            }
            polls.truncate(room);
            let results: Vec<Result<f64>> = polls.par_iter().map(|y| evaluate(problem, y)).collect();
            used += polls.len();
            let mut improved: Option<(usize, f64)> = None;
            for (k, r) in results.iter().enumerate() {
                if let Ok(j) = r {
                    if j.is_finite() && *j < jx && improved.is_none_or(|(_, b)| *j < b) {
                        improved = Some((k, *j));
                    }
                }
            }
            for (y, r) in polls.iter().cloned().zip(results) {
                record(&mut history, &mut best, y, r, si);
            }
            match improved {
                Some((k, j)) => {
                    x = polls[k].clone();
                    jx = j;
                }
                None => step *= 0.5,
            }
        }
    }
    let Some((best_w, best_j)) = best else {
        let reasons: Vec<String> = history.iter().filter_map(|it| it.error.clone()).take(3).collect();
        return Err(Error::Optimization(format!(
            "all {used} evaluations failed: {}",
            reasons.join("; ")
        )));
    };
    Ok(OptimizationReport {
        history,
        best_w,
        best_j,
        evaluations: used,
        stop_reason: if exhausted {
            StopReason::BudgetExhausted
        } else {
            StopReason::Converged
        },
        settings: vec![
            format!("budget = {budget}, starts = {STARTS}, seed = {}", problem.seed),
            format!("admissible = {:?}, pattern tolerance = {PATTERN_TOL:e}", problem.admissible),
            format!("dim = {dim} ({} slots x {} components)", problem.n_intervals, problem.n_controls),
            "J is evaluated on the solver's deterministic selection of the state".into(),
        ],
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityRow {
    /// `‖δ‖_{L²(0,T; V*)}`.
    pub delta_norm: f64,
    pub l2_v: f64,
    pub linf_h: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub rows: Vec<StabilityRow>,
    /// Distances strictly decrease along the perturbation list.
    pub pass: bool,
}

/// Distances of the state for `f + δ_j` from the state for `f`.
pub fn stability_experiment(problem: &ControlProblem, perturbations: &[ForcingSpec]) -> Result<StabilityReport> {
    let base = &problem.base;
    let sys = &base.system;
    let (reference, _) = solve(base)?;
    let factor = Cholesky::new(sys.stiffness.clone())
        .ok_or_else(|| Error::Numeric("stiffness matrix is not positive definite".into()))?;
    let runs: Vec<Result<StabilityRow>> = perturbations
        .par_iter()
        .map(|delta| {
            let (traj, _) = solve(&base.with_forcing(base.forcing.plus(delta)))?;
            let mut l2 = 0.0;
            let mut linf: f64 = 0.0;
            let mut dn = 0.0;
            for n in 0..traj.len() {
                let d: Vec<f64> = traj.coeffs[n]
                    .iter()
                    .zip(&reference.coeffs[n])
                    .map(|(a, b)| a - b)
                    .collect();
                linf = linf.max(sys.h_norm_sq(&d).sqrt());
                if n > 0 {
                    let dt = traj.times[n] - traj.times[n - 1];
                    l2 += dt * sys.v_norm_sq(&d);
                    let f: DVector<f64> = delta.eval(&sys.basis, traj.times[n - 1]);
                    dn += dt * dual_norm_sq(sys, &factor, &f);
                }
            }
            Ok(StabilityRow {
                delta_norm: dn.sqrt(),
                l2_v: l2.sqrt(),
                linf_h: linf,
            })
        })
        .collect();
    let rows = runs.into_iter().collect::<Result<Vec<_>>>()?;
    let pass = rows.windows(2).all(|w| w[1].l2_v < w[0].l2_v);
    Ok(StabilityReport { rows, pass })
}

/// `|h(w)| ≥ α|w|² + β` on the samples, plus midpoint convexity on
/// sample pairs.
pub fn coercivity_check(cost_h: &CostH, samples: &[Vec<f64>]) -> CheckResult {
    if samples.is_empty() {
        return CheckResult::Inconclusive("no samples".into());
    }
    for w in samples {
        let lhs = cost_h.eval(w).abs();
        let sq: f64 = w.iter().map(|v| v * v).sum();
        let rhs = cost_h.alpha * sq + cost_h.beta;
        if lhs < rhs - 1e-12 * (1.0 + rhs.abs()) {
            return CheckResult::Violated(Witness {
                point: w.clone(),
                lhs,
                rhs,
                note: "coercivity |h(w)| >= alpha |w|^2 + beta fails".into(),
            });
        }
    }
    let n = samples.len();
    for i in 0..n {
        for &k in &[(i + 1) % n, n - 1 - i] {
            let (a, b) = (&samples[i], &samples[k]);
            if a.len() != b.len() {
                continue;
            }
            let mid: Vec<f64> = a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect();
            let lhs = cost_h.eval(&mid);
            let rhs = 0.5 * (cost_h.eval(a) + cost_h.eval(b));
            if lhs > rhs + 1e-12 * (1.0 + rhs.abs()) {
                return CheckResult::Violated(Witness {
                    point: mid,
                    lhs,
                    rhs,
                    note: "midpoint convexity fails".into(),
                });
            }
        }
    }
    CheckResult::Satisfied
}
