//! Semi-implicit time stepping of the regularised Galerkin system.
//!
//! Each step solves `(M + dt A) c⁺ = M c + dt (f(t) - T[c, c] - G(c))` where
//! `G_i = ∫ κ z_{i,N} dσ` and `κ` is the mollified law evaluated at the
//! normal trace of the current iterate.

use std::sync::Arc;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boundary_law::{mollify_eval, BoundaryLaw, Mollifier};
use crate::error::{Error, Result};
use crate::galerkin::{
    assemble, build_basis, default_quad_order, AssembledSystem, EdgeNode, ForcingSpec, InitialData,
};

/// Norm beyond which a run is declared divergent.
pub const BLOW_UP: f64 = 1e12;

/// Maps the normal trace at a boundary node to the multiplier κ.
pub trait BoundaryResponse: Sync {
    fn response(&self, node: &EdgeNode, u_n: f64) -> Result<f64>;
}

/// `κ = θ_ε(u_N)`.
#[derive(Debug, Clone)]
pub struct MollifiedLaw<'a> {
    pub law: &'a BoundaryLaw,
    pub mollifier: Mollifier,
}

impl BoundaryResponse for MollifiedLaw<'_> {
    fn response(&self, _node: &EdgeNode, u_n: f64) -> Result<f64> {
        mollify_eval(self.law, &self.mollifier, u_n)
    }
}

#[derive(Debug, Clone)]
pub struct SolveConfig {
    pub t_end: f64,
    pub dt: f64,
    pub epsilon: f64,
    /// Gauss points per mollifier panel.
    pub mollifier_order: usize,
    pub law: BoundaryLaw,
    pub forcing: ForcingSpec,
    pub initial: Vec<f64>,
    pub system: Arc<AssembledSystem>,
}

impl SolveConfig {
    pub fn new(
        system: Arc<AssembledSystem>,
        law: BoundaryLaw,
        forcing: ForcingSpec,
        initial: Vec<f64>,
        t_end: f64,
        dt: f64,
        epsilon: f64,
    ) -> Result<Self> {
        let cfg = SolveConfig {
            t_end,
            dt,
            epsilon,
            mollifier_order: Mollifier::DEFAULT_QUAD_ORDER,
            law,
            forcing,
            initial,
            system,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::Config(format!("T must be positive, got {}", self.t_end)));
        }
        if !(self.dt > 0.0 && self.dt < self.t_end) {
            return Err(Error::Config(format!("dt must lie in (0, T), got {}", self.dt)));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::Config(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        self.steps()?;
        self.system.basis.check_len(self.initial.len())?;
        if self.initial.iter().any(|c| !c.is_finite()) {
            return Err(Error::Config("initial coefficients must be finite".into()));
        }
        self.forcing.validate(&self.system.basis)?;
        Mollifier::new(self.epsilon, self.mollifier_order)?;
        Ok(())
    }

    /// Number of steps `N = T / dt`; `T` must be a whole multiple of `dt`.
    pub fn steps(&self) -> Result<usize> {
        let n = (self.t_end / self.dt).round();
        if n < 1.0 || (n * self.dt - self.t_end).abs() > 1e-9 * self.t_end {
            return Err(Error::Config(format!(
                "T = {} is not a whole multiple of dt = {}",
                self.t_end, self.dt
            )));
        }
        Ok(n as usize)
    }

    pub fn time(&self, n: usize) -> f64 {
        n as f64 * self.dt
    }

    pub fn mollifier(&self) -> Result<Mollifier> {
        Mollifier::new(self.epsilon, self.mollifier_order)
    }

    pub fn forcing_at(&self, t: f64) -> DVector<f64> {
        self.forcing.eval(&self.system.basis, t)
    }

    pub fn with_forcing(&self, forcing: ForcingSpec) -> Self {
        SolveConfig {
            forcing,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub coeffs: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn m(&self) -> usize {
        self.coeffs.first().map_or(0, Vec::len)
    }

    pub fn last(&self) -> &[f64] {
        self.coeffs.last().map_or(&[], Vec::as_slice)
    }

    /// `|u(t_n)|_H` for every stored time.
    pub fn h_norms(&self, system: &AssembledSystem) -> Vec<f64> {
        self.coeffs.iter().map(|c| system.h_norm_sq(c).sqrt()).collect()
    }
}

/// `u_N` and `κ` at every (time, edge node).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiplierField {
    pub epsilon: f64,
    pub dt: f64,
    pub times: Vec<f64>,
    pub nodes: Vec<EdgeNode>,
    /// `u_n[n][q]`.
    pub u_n: Vec<Vec<f64>>,
    /// `kappa[n][q]`.
    pub kappa: Vec<Vec<f64>>,
}

impl MultiplierField {
    /// Time slots that enter the scheme (all but the final time).
    pub fn scheme_slots(&self) -> usize {
        self.times.len().saturating_sub(1)
    }

    /// `Σ_n dt Σ_q w_q g(u_N, κ)` over the scheme slots.
    pub fn space_time_sum<F: Fn(f64, f64) -> f64>(&self, g: F) -> f64 {
        (0..self.scheme_slots())
            .map(|n| {
                self.nodes
                    .iter()
                    .enumerate()
                    .map(|(q, node)| node.weight * g(self.u_n[n][q], self.kappa[n][q]))
                    .sum::<f64>()
                    * self.dt
            })
            .sum()
    }

    pub fn l1_norm(&self) -> f64 {
        self.space_time_sum(|_, k| k.abs())
    }
}

/// Normal trace `u_N` at every edge node.
pub fn normal_trace(system: &AssembledSystem, coeffs: &[f64]) -> Result<Vec<f64>> {
    system.basis.check_len(coeffs.len())?;
    Ok(system.normal_trace(coeffs))
}

/// Reusable stepper with the implicit matrix factored once.
pub struct Stepper<'a, R: BoundaryResponse> {
    config: &'a SolveConfig,
    response: &'a R,
    factor: Cholesky<f64, Dyn>,
}

impl<'a, R: BoundaryResponse> Stepper<'a, R> {
    pub fn new(config: &'a SolveConfig, response: &'a R) -> Result<Self> {
        let sys = &config.system;
        let lhs: DMatrix<f64> = &sys.mass + &sys.stiffness * config.dt;
        let factor = Cholesky::new(lhs)
            .ok_or_else(|| Error::Numeric("M + dt A is not positive definite".into()))?;
        Ok(Stepper {
            config,
            response,
            factor,
        })
    }

    /// Normal trace and multiplier at the nodes for coefficients `c`.
    pub fn multiplier(&self, c: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let sys = &self.config.system;
        let u_n = sys.normal_trace(c);
        let kappa = sys
            .nodes
            .iter()
            .zip(&u_n)
            .map(|(node, &u)| {
                let k = self.response.response(node, u).map_err(|e| Error::LawWindow {
                    value: u,
                    reason: e.to_string(),
                })?;
                if k.is_finite() {
                    Ok(k)
                } else {
                    Err(Error::LawWindow {
                        value: u,
                        reason: format!("law evaluated to {k}"),
                    })
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok((u_n, kappa))
    }

    /// One step from `c` at `t`, with the multiplier already evaluated at `c`.
    pub fn advance(&self, c: &[f64], t: f64, kappa: &[f64]) -> Result<Vec<f64>> {
        let sys = &self.config.system;
        let dt = self.config.dt;
        let cv = DVector::from_column_slice(c);
        let mut rhs = self.config.forcing_at(t);
        rhs -= sys.convection(c);
        rhs -= sys.boundary_load(kappa);
        rhs *= dt;
        rhs += &sys.mass * &cv;
        let next = self.factor.solve(&rhs);
        let norm = next.norm();
        if !norm.is_finite() || norm > BLOW_UP {
            return Err(Error::Divergence {
                time: t + dt,
                norm,
            });
        }
        Ok(next.as_slice().to_vec())
    }

    pub fn step(&self, c: &[f64], t: f64) -> Result<Vec<f64>> {
        let (_, kappa) = self.multiplier(c)?;
        self.advance(c, t, &kappa)
    }
}

/// A single step from `c_n` at `t_n` with the mollified law.
pub fn step(config: &SolveConfig, c_n: &[f64], t_n: f64) -> Result<Vec<f64>> {
    config.system.basis.check_len(c_n.len())?;
    if c_n.iter().any(|c| !c.is_finite()) {
        return Err(Error::Numeric("c_n must be finite".into()));
    }
    let response = MollifiedLaw {
        law: &config.law,
        mollifier: config.mollifier()?,
    };
    Stepper::new(config, &response)?.step(c_n, t_n)
}

/// Full run on `[0, T]` with the mollified law.
pub fn solve(config: &SolveConfig) -> Result<(Trajectory, MultiplierField)> {
    config.validate()?;
    let response = MollifiedLaw {
        law: &config.law,
        mollifier: config.mollifier()?,
    };
    solve_with(config, &response)
}

/// Full run with an arbitrary boundary response.
pub fn solve_with<R: BoundaryResponse>(
    config: &SolveConfig,
    response: &R,
) -> Result<(Trajectory, MultiplierField)> {
    config.validate()?;
    let n_steps = config.steps()?;
    let stepper = Stepper::new(config, response)?;
    let mut times = Vec::with_capacity(n_steps + 1);
    let mut coeffs = Vec::with_capacity(n_steps + 1);
    let mut u_ns = Vec::with_capacity(n_steps + 1);
    let mut kappas = Vec::with_capacity(n_steps + 1);
    let mut c = config.initial.clone();
    for n in 0..=n_steps {
        let t = config.time(n);
        let (u_n, kappa) = stepper.multiplier(&c)?;
        let next = if n < n_steps {
            Some(stepper.advance(&c, t, &kappa)?)
        } else {
            None
        };
        times.push(t);
        coeffs.push(std::mem::take(&mut c));
        u_ns.push(u_n);
        kappas.push(kappa);
        if let Some(next) = next {
            c = next;
        }
    }
    let field = MultiplierField {
        epsilon: config.epsilon,
        dt: config.dt,
        times: times.clone(),
        nodes: config.system.nodes.clone(),
        u_n: u_ns,
        kappa: kappas,
    };
    Ok((Trajectory { times, coeffs }, field))
}

/// Basis-independent description of a run, instantiated per `(m, ε)`.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub nu: f64,
    pub t_end: f64,
    pub dt: f64,
    pub law: BoundaryLaw,
    pub forcing: ForcingSpec,
    pub initial: InitialData,
    /// Assembly order; defaults to the order for the largest basis in use.
    pub quad_order: Option<usize>,
    pub mollifier_order: usize,
}

impl ProblemSpec {
    pub fn config(&self, m_per_axis: usize, epsilon: f64) -> Result<SolveConfig> {
        let basis = build_basis(m_per_axis)?;
        let order = self.quad_order.unwrap_or_else(|| default_quad_order(m_per_axis));
        let system = Arc::new(assemble(&basis, self.nu, order)?);
        let initial = self.initial.coefficients(&basis)?;
        let mut cfg = SolveConfig::new(
            system,
            self.law.clone(),
            self.forcing.clone(),
            initial,
            self.t_end,
            self.dt,
            epsilon,
        )?;
        cfg.mollifier_order = self.mollifier_order;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone)]
pub struct SweepEntry {
    /// Basis size `m = m_per_axis²`.
    pub m: usize,
    pub epsilon: f64,
    pub system: Option<Arc<AssembledSystem>>,
    pub result: Result<(Trajectory, MultiplierField)>,
}

/// Pairwise distances between sweep entries; `None` where a run failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CauchyTable {
    /// `L²(0,T; V)` distance on the common coarser basis.
    pub trajectory: Vec<Vec<Option<f64>>>,
    /// `L¹((0,T) × ∂Ω)` distance of the multipliers.
    pub multiplier: Vec<Vec<Option<f64>>>,
}

impl CauchyTable {
    pub fn successive_trajectory(&self) -> Vec<Option<f64>> {
        (1..self.trajectory.len()).map(|j| self.trajectory[j - 1][j]).collect()
    }

    pub fn successive_multiplier(&self) -> Vec<Option<f64>> {
        (1..self.multiplier.len()).map(|j| self.multiplier[j - 1][j]).collect()
    }
}

#[derive(Debug, Clone)]
pub struct SweepReport {
    pub entries: Vec<SweepEntry>,
    pub table: CauchyTable,
}

fn perfect_square_root(m: usize) -> Option<usize> {
    let r = (m as f64).sqrt().round() as usize;
    (r >= 1 && r * r == m).then_some(r)
}

/// Runs every `(m_j, ε_j)` pair concurrently. A sequence of length one is
/// broadcast against the other.
pub fn sweep(base: &ProblemSpec, m_sequence: &[usize], eps_sequence: &[f64]) -> Result<SweepReport> {
    if m_sequence.is_empty() || eps_sequence.is_empty() {
        return Err(Error::Usage("sweep needs nonempty m and epsilon sequences".into()));
    }
    let len = m_sequence.len().max(eps_sequence.len());
    let pick = |v: &[usize], j: usize| if v.len() == 1 { v[0] } else { v[j] };
    if (m_sequence.len() != 1 && m_sequence.len() != len)
        || (eps_sequence.len() != 1 && eps_sequence.len() != len)
    {
        return Err(Error::Usage(format!(
            "sweep sequences have lengths {} and {}",
            m_sequence.len(),
            eps_sequence.len()
        )));
    }
    if m_sequence.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Usage("m sequence must be nondecreasing".into()));
    }
    if eps_sequence.windows(2).any(|w| w[1] > w[0]) {
        return Err(Error::Usage("epsilon sequence must be nonincreasing".into()));
    }
    let mut per_axis = Vec::with_capacity(m_sequence.len());
    for &m in m_sequence {
        per_axis.push(perfect_square_root(m).ok_or_else(|| {
            Error::Usage(format!("basis size {m} is not a square m_per_axis²"))
        })?);
    }
    // one assembly order for all entries so that the edge nodes coincide
    let max_axis = *per_axis.iter().max().expect("nonempty");
    let spec = ProblemSpec {
        quad_order: Some(base.quad_order.unwrap_or_else(|| default_quad_order(max_axis))),
        ..base.clone()
    };
    let entries: Vec<SweepEntry> = (0..len)
        .into_par_iter()
        .map(|j| {
            let axis = pick(&per_axis, j);
            let eps = if eps_sequence.len() == 1 {
                eps_sequence[0]
            } else {
                eps_sequence[j]
            };
            match spec.config(axis, eps) {
                Ok(cfg) => SweepEntry {
                    m: axis * axis,
                    epsilon: eps,
                    system: Some(cfg.system.clone()),
                    result: solve(&cfg),
                },
                Err(e) => SweepEntry {
                    m: axis * axis,
                    epsilon: eps,
                    system: None,
                    result: Err(e),
                },
            }
        })
        .collect();
    let table = cauchy_table(&entries);
    Ok(SweepReport { entries, table })
}

fn cauchy_table(entries: &[SweepEntry]) -> CauchyTable {
    let n = entries.len();
    let mut trajectory = vec![vec![None; n]; n];
    let mut multiplier = vec![vec![None; n]; n];
    for a in 0..n {
        trajectory[a][a] = entries[a].result.as_ref().ok().map(|_| 0.0);
        multiplier[a][a] = trajectory[a][a];
        for b in a + 1..n {
            let (Ok((ta, fa)), Ok((tb, fb))) = (&entries[a].result, &entries[b].result) else {
                continue;
            };
            let coarse = if entries[a].m <= entries[b].m { a } else { b };
            let sys = entries[coarse].system.as_ref().expect("successful entries carry a system");
            let d = trajectory_distance(sys, ta, tb);
            trajectory[a][b] = d;
            trajectory[b][a] = d;
            let d = multiplier_distance(fa, fb);
            multiplier[a][b] = d;
            multiplier[b][a] = d;
        }
    }
    CauchyTable {
        trajectory,
        multiplier,
    }
}

/// `(Σ_{n≥1} dt ‖c_a - c_b‖²_V)^{1/2}` with both restricted to `coarse`.
pub fn trajectory_distance(coarse: &AssembledSystem, a: &Trajectory, b: &Trajectory) -> Option<f64> {
    if a.times.len() != b.times.len() || a.times.len() < 2 {
        return None;
    }
    let dt = a.times[1] - a.times[0];
    let inflate = |c: &[f64]| -> Vec<f64> {
        // modes are identified by (k, l); the coarse basis is contained in the finer one
        let n = (c.len() as f64).sqrt().round() as usize;
        let basis = build_basis(n).expect("square length");
        let mut out = vec![0.0; coarse.m()];
        for (mode, v) in basis.modes().iter().zip(c) {
            if let Some(i) = coarse.basis.index_of(*mode) {
                out[i] = *v;
            }
        }
        out
    };
    let mut total = 0.0;
    for n in 1..a.times.len() {
        let ca = inflate(&a.coeffs[n]);
        let cb = inflate(&b.coeffs[n]);
        let diff: Vec<f64> = ca.iter().zip(&cb).map(|(x, y)| x - y).collect();
        total += dt * coarse.v_norm_sq(&diff);
    }
    Some(total.sqrt())
}

/// `Σ_n dt Σ_q w_q |κ_a - κ_b|` over the scheme slots.
pub fn multiplier_distance(a: &MultiplierField, b: &MultiplierField) -> Option<f64> {
    if a.times.len() != b.times.len() || a.nodes.len() != b.nodes.len() {
        return None;
    }
    if a.nodes.iter().zip(&b.nodes).any(|(p, q)| p.arc != q.arc) {
        return None;
    }
    let mut total = 0.0;
    for n in 0..a.scheme_slots() {
        for (q, node) in a.nodes.iter().enumerate() {
            total += a.dt * node.weight * (a.kappa[n][q] - b.kappa[n][q]).abs();
        }
    }
    Some(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary_law::fixture;
    use crate::galerkin::{ForcingTarget, Mode, TimeProfile};
    use std::f64::consts::PI;

    fn single_mode(dt: f64, law: &str) -> SolveConfig {
        let b = build_basis(1).unwrap();
        let sys = Arc::new(assemble(&b, 1.0, default_quad_order(1)).unwrap());
        SolveConfig::new(sys, fixture(law).unwrap(), ForcingSpec::zero(), vec![1.0], 1.0, dt, 0.1)
            .unwrap()
    }

    #[test]
    fn single_step_factor() {
        let cfg = single_mode(1e-2, "zero");
        let next = step(&cfg, &[1.0], 0.0).unwrap();
        let expected = 1.0 / (1.0 + 2.0 * PI * PI * 1e-2);
        assert!((next[0] - expected).abs() < 1e-12);
        assert_eq!(step(&cfg, &[0.0], 0.0).unwrap(), vec![0.0]);
        assert!(step(&cfg, &[0.0, 1.0], 0.0).is_err());
    }

    #[test]
    fn constant_law_matches_zero_law() {
        let b = build_basis(2).unwrap();
        let sys = Arc::new(assemble(&b, 1.0, default_quad_order(2)).unwrap());
        let c0 = vec![0.5, -0.2, 0.1, 0.3];
        let mk = |law: BoundaryLaw| {
            SolveConfig::new(sys.clone(), law, ForcingSpec::zero(), c0.clone(), 0.1, 1e-2, 0.1).unwrap()
        };
        let konst = crate::boundary_law::BoundaryLaw::new(
            "gamma",
            vec![crate::boundary_law::Piece::new(-10.0, 10.0, crate::boundary_law::Expr::Const(2.5))],
            10.0,
            crate::boundary_law::Tail::Formula,
            crate::boundary_law::Tail::Formula,
            0.1,
            1e-3,
        )
        .unwrap();
        let (ta, _) = solve(&mk(konst)).unwrap();
        let (tb, _) = solve(&mk(fixture("zero").unwrap())).unwrap();
        for (a, b) in ta.coeffs.iter().zip(&tb.coeffs) {
            for (x, y) in a.iter().zip(b) {
                assert!((x - y).abs() < 1e-10, "{x} vs {y}");
            }
        }
    }

    #[test]
    fn zero_data_stays_zero() {
        let mut cfg = single_mode(1e-2, "zero");
        cfg.initial = vec![0.0];
        let (traj, field) = solve(&cfg).unwrap();
        assert_eq!(traj.len(), 101);
        assert!(traj.coeffs.iter().all(|c| c[0] == 0.0));
        assert!(field.kappa.iter().flatten().all(|&k| k == 0.0));
        // odd law at rest: only rounding in the node placement
        cfg.law = fixture("sign").unwrap();
        let (traj, _) = solve(&cfg).unwrap();
        assert!(traj.coeffs.iter().all(|c| c[0].abs() < 1e-14));
    }

    #[test]
    fn trace_sign_and_divergence_free_mean() {
        let b = build_basis(3).unwrap();
        let sys = assemble(&b, 1.0, default_quad_order(3)).unwrap();
        let mut c = vec![0.0; 9];
        c[0] = 1.0;
        let u_n = normal_trace(&sys, &c).unwrap();
        for (node, u) in sys.nodes.iter().zip(&u_n) {
            if node.edge == crate::galerkin::Edge::Left {
                let expected = PI * (PI * node.point[1]).sin();
                assert!((u - expected).abs() < 1e-12);
            }
        }
        let c: Vec<f64> = (0..9).map(|i| (i as f64 * 0.7).sin()).collect();
        let u_n = normal_trace(&sys, &c).unwrap();
        let total: f64 = sys.nodes.iter().zip(&u_n).map(|(n, u)| n.weight * u).sum();
        assert!(total.abs() < 1e-10);
    }

    #[test]
    fn divergence_is_reported_with_time() {
        let b = build_basis(2).unwrap();
        let sys = Arc::new(assemble(&b, 1e-3, default_quad_order(2)).unwrap());
        let forcing = ForcingSpec::zero().with_term(
            ForcingTarget::Mode(Mode { k: 1, l: 2 }),
            1e9,
            TimeProfile::Constant,
        );
        let cfg = SolveConfig::new(sys, fixture("zero").unwrap(), forcing, vec![1e3; 4], 1.0, 0.1, 0.1)
            .unwrap();
        match solve(&cfg) {
            Err(Error::Divergence { time, norm }) => {
                assert!(time > 0.0 && time <= 1.0 && !(norm <= BLOW_UP));
            }
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn law_window_error_surfaces() {
        let law = fixture("sign").unwrap();
        let bounded = crate::boundary_law::BoundaryLaw::new(
            "narrow",
            law.pieces().to_vec(),
            10.0,
            crate::boundary_law::Tail::Bounded(1.0),
            crate::boundary_law::Tail::Bounded(1.0),
            0.1,
            1e-3,
        )
        .unwrap();
        let mut cfg = single_mode(1e-2, "sign");
        cfg.law = bounded;
        cfg.initial = vec![100.0];
        assert!(matches!(solve(&cfg), Err(Error::LawWindow { .. })));
    }

    #[test]
    fn sweep_constant_sequences_are_zero_distance() {
        let spec = ProblemSpec {
            nu: 1.0,
            t_end: 0.1,
            dt: 1e-2,
            law: fixture("sign").unwrap(),
            forcing: ForcingSpec::zero(),
            initial: InitialData::Modal(vec![(1, 1, 0.5), (1, 2, 0.2)]),
            quad_order: None,
            mollifier_order: Mollifier::DEFAULT_QUAD_ORDER,
        };
        let rep = sweep(&spec, &[4, 4, 4], &[0.1]).unwrap();
        for row in &rep.table.trajectory {
            assert!(row.iter().all(|d| *d == Some(0.0)));
        }
        assert!(rep.table.multiplier.iter().flatten().all(|d| *d == Some(0.0)));
        assert!(sweep(&spec, &[4, 1], &[0.1]).is_err());
        assert!(sweep(&spec, &[4], &[0.1, 0.2]).is_err());
        assert!(sweep(&spec, &[3], &[0.1]).is_err());
    }
}
