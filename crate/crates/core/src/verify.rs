//! Numerical pass/fail checks on solver output.

use std::fmt::{self, Write as _};

use nalgebra::{Cholesky, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::boundary_law::{eval_envelope, BoundaryLaw};
use crate::error::{Error, Result};
use crate::evolve::{MultiplierField, SolveConfig, Trajectory};
use crate::galerkin::{AssembledSystem, Domain2D};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    /// `measured ≤ bound`
    AtMost,
    /// `measured ≥ bound`
    AtLeast,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub relation: Relation,
    pub bound: f64,
    pub measured: f64,
    /// Signed slack; negative means the bound is exceeded.
    pub margin: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub detail: String,
}

impl CheckRecord {
    pub fn new(name: impl Into<String>, relation: Relation, bound: f64, measured: f64, tolerance: f64) -> Self {
        let margin = match relation {
            Relation::AtMost => bound - measured,
            Relation::AtLeast => measured - bound,
        };
        CheckRecord {
            name: name.into(),
            relation,
            bound,
            measured,
            margin,
            tolerance,
            pass: margin >= -tolerance,
            detail: String::new(),
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub title: String,
    pub notes: Vec<String>,
    pub records: Vec<CheckRecord>,
}

impl VerificationReport {
    pub fn new(title: impl Into<String>) -> Self {
        VerificationReport {
            title: title.into(),
            ..Default::default()
        }
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    pub fn push(&mut self, record: CheckRecord) {
        self.records.push(record);
    }

    pub fn extend(&mut self, other: VerificationReport) {
        self.notes.extend(other.notes);
        self.records.extend(other.records);
    }

    pub fn passed(&self) -> bool {
        self.records.iter().all(|r| r.pass)
    }

    pub fn record(&self, name: &str) -> Option<&CheckRecord> {
        self.records.iter().find(|r| r.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.records.iter().filter(|r| !r.pass)
    }

    /// One `[[check]]` record per check, preceded by the notes as comments.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# {}", self.title);
        for n in &self.notes {
            let _ = writeln!(s, "# {n}");
        }
        let _ = writeln!(s, "passed = {}", self.passed());
        for r in &self.records {
            let _ = writeln!(s, "\n[[check]]");
            let _ = writeln!(s, "name = {:?}", r.name);
            let rel = match r.relation {
                Relation::AtMost => "<=",
                Relation::AtLeast => ">=",
            };
            let _ = writeln!(s, "relation = \"{rel}\"");
            let _ = writeln!(s, "bound = {:e}", r.bound);
            let _ = writeln!(s, "measured = {:e}", r.measured);
            let _ = writeln!(s, "margin = {:e}", r.margin);
            let _ = writeln!(s, "tolerance = {:e}", r.tolerance);
            let _ = writeln!(s, "pass = {}", r.pass);
            if !r.detail.is_empty() {
                let _ = writeln!(s, "detail = {:?}", r.detail);
            }
        }
        s
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// `‖f‖²_{V*} = ν fᵀ A⁻¹ f`, the Riesz norm on the Galerkin space.
pub fn dual_norm_sq(system: &AssembledSystem, factor: &Cholesky<f64, nalgebra::Dyn>, f: &DVector<f64>) -> f64 {
    system.nu * f.dot(&factor.solve(f))
}

fn stiffness_factor(system: &AssembledSystem) -> Result<Cholesky<f64, nalgebra::Dyn>> {
    Cholesky::new(system.stiffness.clone())
        .ok_or_else(|| Error::Numeric("stiffness matrix is not positive definite".into()))
}

/// Discrete a-priori energy bound at every grid time `s = t_n`:
///
/// `|c_n|²_M + Σ_{k=1..n} dt c_kᵀAc_k ≤ (C/M) Σ_{k<n} dt ‖f(t_k)‖²_{V*} + 2ρ₁ρ₂ s σ + |c_0|²_M`
///
/// with `M = ν`, so that `M ‖c‖²_V = cᵀAc`. The primary record uses `C = 2`;
/// a second record carries `C = 4`.
pub fn energy_report(traj: &Trajectory, config: &SolveConfig) -> Result<VerificationReport> {
    let sys = &config.system;
    let coercivity = sys.nu;
    let (rho1, rho2) = config.law.rho_constants()?;
    let sigma = Domain2D.perimeter();
    let factor = stiffness_factor(sys)?;

    let mut rep = VerificationReport::new("energy estimate");
    rep.note(
        "lhs(s) = |c(s)|_M^2 + sum_{k=1..n} dt c_k^T A c_k; \
         rhs(s) = (C/M) sum_{k<n} dt |f(t_k)|_{V*}^2 + 2 rho1 rho2 s sigma + |c_0|_M^2; M = nu",
    );
    rep.note(format!("rho1 = {rho1:e}, rho2 = {rho2:e}, sigma = {sigma}, M = {coercivity:e}"));

    let c0 = sys.h_norm_sq(&traj.coeffs[0]);
    let n_times = traj.len();
    let mut dissipation = 0.0;
    let mut forcing = 0.0;
    let mut worst = [(f64::INFINITY, 0.0, 0.0, 0.0); 2];
    for n in 0..n_times {
        let s = traj.times[n];
        if n > 0 {
            let dt = traj.times[n] - traj.times[n - 1];
            let c = &traj.coeffs[n];
            dissipation += dt * crate::galerkin::quad_form(&sys.stiffness, c);
            let f = config.forcing_at(traj.times[n - 1]);
            forcing += dt * dual_norm_sq(sys, &factor, &f);
        }
        if n == 0 && n_times > 1 {
            // equality at s = 0
            continue;
        }
        let lhs = sys.h_norm_sq(&traj.coeffs[n]) + dissipation;
        for (slot, constant) in [2.0, 4.0].into_iter().enumerate() {
            let rhs = constant / coercivity * forcing + 2.0 * rho1 * rho2 * s * sigma + c0;
            let margin = rhs - lhs;
            if margin < worst[slot].0 {
                worst[slot] = (margin, s, lhs, rhs);
            }
        }
    }
    for (slot, name) in ["energy_2_over_M", "energy_4_over_M"].into_iter().enumerate() {
        let (_, s, lhs, rhs) = worst[slot];
        let tol = 1e-10 * (1.0 + rhs.abs());
        rep.push(
            CheckRecord::new(name, Relation::AtMost, rhs, lhs, tol)
                .with_detail(format!("worst grid time s = {s}")),
        );
    }
    Ok(rep)
}

/// Random pairs `(u, v)`: `|Σ T_kji u_k v_j v_i| ≤ 1e-10 (1 + ‖u‖‖v‖²)`.
pub fn skew_symmetry_check(system: &AssembledSystem, trials: usize, seed: u64) -> Result<VerificationReport> {
    if trials == 0 {
        return Err(Error::Usage("skew_symmetry_check needs at least one trial".into()));
    }
    let m = system.m();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let u: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
        let v: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
        let nu = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        let nv2 = v.iter().map(|x| x * x).sum::<f64>();
        let b = system.trilinear_form(&u, &v, &v);
        worst = worst.max(b.abs() / (1.0 + nu * nv2));
    }
    let mut rep = VerificationReport::new("convection energy neutrality");
    rep.push(
        CheckRecord::new("skew_symmetry", Relation::AtMost, 1e-10, worst, 0.0)
            .with_detail(format!("{trials} random pairs, m = {m}, seed = {seed}")),
    );
    Ok(rep)
}

/// `∫₀ᵀ∫_{∂Ω} κ u_N ≥ -ρ₁ρ₂ T σ(∂Ω)`.
pub fn lemma1_bound_check(field: &MultiplierField, config: &SolveConfig) -> Result<VerificationReport> {
    let (rho1, rho2) = config.law.rho_constants()?;
    let sigma = Domain2D.perimeter();
    let integral = field.space_time_sum(|u, k| k * u);
    let bound = -rho1 * rho2 * config.t_end * sigma;
    let mut rep = VerificationReport::new("boundary term lower bound");
    rep.push(
        CheckRecord::new("lemma_rho_bound", Relation::AtLeast, bound, integral, 1e-12)
            .with_detail(format!("rho1 = {rho1:e}, rho2 = {rho2:e}")),
    );
    Ok(rep)
}

/// Every recorded κ lies in the ε-envelope of the law at its `u_N`,
/// widened by `tol`. The ε-envelope contains `θ̂`, so this is the finite-ε
/// form of the inclusion `κ ∈ θ̂(u_N)`.
pub fn kappa_inclusion_check(field: &MultiplierField, law: &BoundaryLaw, tol: f64) -> Result<VerificationReport> {
    let env = eval_envelope(law, field.epsilon)?;
    let mut total = 0usize;
    let mut inside = 0usize;
    let mut first_failure: Option<String> = None;
    let mut worst: f64 = 0.0;
    for (n, (us, ks)) in field.u_n.iter().zip(&field.kappa).enumerate() {
        for (q, (&u, &k)) in us.iter().zip(ks).enumerate() {
            total += 1;
            let ok = match env.at(u) {
                Ok(iv) => {
                    let excess = (iv.lo - k).max(k - iv.hi).max(0.0);
                    worst = worst.max(excess);
                    iv.contains(k, tol)
                }
                Err(_) => false,
            };
            if ok {
                inside += 1;
            } else if first_failure.is_none() {
                let node = &field.nodes[q];
                first_failure = Some(format!(
                    "t = {}, edge = {}, s = {:.6}, u_N = {u:e}, kappa = {k:e}",
                    field.times[n],
                    node.edge.name(),
                    node.s_local
                ));
            }
        }
    }
    let fraction = if total == 0 { 1.0 } else { inside as f64 / total as f64 };
    let mut rep = VerificationReport::new("multiplier inclusion");
    rep.note(format!("envelope blur epsilon = {:e}, tol = {tol:e}", field.epsilon));
    let detail = match first_failure {
        Some(f) => format!("first failure: {f}"),
        None => format!("{total} samples, worst excess {worst:e}"),
    };
    rep.push(CheckRecord::new("kappa_inclusion", Relation::AtLeast, 1.0, fraction, 0.0).with_detail(detail));
    Ok(rep)
}

/// Fractions `δ / (T σ)` of the space-time measure used for the ω family.
pub const UI_FRACTIONS: [f64; 3] = [0.1, 0.01, 0.001];
/// Random rectangles per fraction.
pub const UI_SAMPLES: usize = 64;

/// Piecewise-constant view of `|κ|` on (time slot × node cell).
struct CellField<'a> {
    field: &'a MultiplierField,
    /// Arc-length cell boundaries for each node.
    cells: Vec<(f64, f64)>,
}

impl<'a> CellField<'a> {
    fn new(field: &'a MultiplierField) -> Self {
        let mut cells = Vec::with_capacity(field.nodes.len());
        let mut cursor = 0.0;
        let mut edge = None;
        for node in &field.nodes {
            if edge != Some(node.edge) {
                edge = Some(node.edge);
                cursor = node.edge.arc_offset();
            }
            cells.push((cursor, cursor + node.weight));
            cursor += node.weight;
        }
        CellField { field, cells }
    }

    /// `∫_ω |κ|` for `ω = [t0, t1] × [a, b]` in (time, arc length).
    fn mass(&self, t0: f64, t1: f64, a: f64, b: f64) -> f64 {
        let f = self.field;
        let mut total = 0.0;
        for n in 0..f.scheme_slots() {
            let (s0, s1) = (f.times[n], f.times[n] + f.dt);
            let dt = (s1.min(t1) - s0.max(t0)).max(0.0);
            if dt == 0.0 {
                continue;
            }
            for (q, &(c0, c1)) in self.cells.iter().enumerate() {
                let ds = (c1.min(b) - c0.max(a)).max(0.0);
                if ds > 0.0 {
                    total += dt * ds * f.kappa[n][q].abs();
                }
            }
        }
        total
    }

    /// Cell with the largest `|κ|` as (time centre, arc centre).
    fn densest(&self) -> (f64, f64) {
        let f = self.field;
        let mut best = (0.0, 0.0, -1.0);
        for n in 0..f.scheme_slots() {
            for (q, &(c0, c1)) in self.cells.iter().enumerate() {
                let v = f.kappa[n][q].abs();
                if v > best.2 {
                    best = (f.times[n] + 0.5 * f.dt, 0.5 * (c0 + c1), v);
                }
            }
        }
        (best.0, best.1)
    }
}

/// Equi-integrability trend across a family of multiplier fields:
/// `S(δ) = sup_m sup_ω ∫_ω |κ_m|` over square-shaped random ω of measure δ,
/// passing when `S(δ)/δ` never exceeds ten times its value at the largest δ.
pub fn uniform_integrability_report(fields: &[MultiplierField], seed: u64) -> Result<VerificationReport> {
    if fields.len() < 2 {
        return Err(Error::Usage(format!(
            "uniform integrability needs at least 2 fields, got {}",
            fields.len()
        )));
    }
    let sigma = Domain2D.perimeter();
    let t_end = fields
        .iter()
        .map(|f| f.times.last().copied().unwrap_or(0.0))
        .fold(0.0, f64::max);
    if !(t_end > 0.0) {
        return Err(Error::Usage("fields cover no time".into()));
    }
    let views: Vec<CellField> = fields.iter().map(CellField::new).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sups = Vec::with_capacity(UI_FRACTIONS.len());
    for &frac in &UI_FRACTIONS {
        let side = frac.sqrt();
        let (tau, len) = (side * t_end, side * sigma);
        let delta = tau * len;
        let mut sup: f64 = 0.0;
        let mut windows: Vec<(f64, f64)> = (0..UI_SAMPLES)
            .map(|_| (rng.random_range(0.0..=t_end - tau), rng.random_range(0.0..=sigma - len)))
            .collect();
        for view in &views {
            let (tc, ac) = view.densest();
            windows.push((
                (tc - 0.5 * tau).clamp(0.0, t_end - tau),
                (ac - 0.5 * len).clamp(0.0, sigma - len),
            ));
        }
        for view in &views {
            for &(t0, a0) in &windows {
                sup = sup.max(view.mass(t0, t0 + tau, a0, a0 + len));
            }
        }
        sups.push((delta, sup));
    }
    let mut rep = VerificationReport::new("equi-integrability trend");
    rep.note(format!(
        "{} fields, {UI_SAMPLES} random rectangles per measure plus one at the densest cell of each field, seed = {seed}",
        fields.len()
    ));
    let (d0, s0) = sups[0];
    let reference = s0 / d0;
    for &(delta, sup) in &sups {
        rep.push(
            CheckRecord::new(
                format!("density_ratio[delta={:.3e}]", delta),
                Relation::AtMost,
                10.0 * reference,
                sup / delta,
                1e-12 * (1.0 + reference),
            )
            .with_detail(format!("sup mass = {sup:e}")),
        );
    }
    // mass on super-level sets of |u_N|, bounded through ∫|κ u_N| / a
    for a in [1.0, 2.0, 4.0] {
        let worst = fields
            .iter()
            .map(|f| {
                let mass = f.space_time_sum(|u, k| if u.abs() > a { k.abs() } else { 0.0 });
                let bound = f.space_time_sum(|u, k| (k * u).abs()) / a;
                (mass, bound)
            })
            .max_by(|x, y| (x.0 - x.1).total_cmp(&(y.0 - y.1)))
            .expect("at least two fields");
        rep.push(CheckRecord::new(
            format!("level_set_mass[a={a}]"),
            Relation::AtMost,
            worst.1,
            worst.0,
            1e-12,
        ));
    }
    Ok(rep)
}

/// Per-step residual of the discrete weak identity against `v`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeakResidual {
    pub residuals: Vec<f64>,
    /// Largest sum of term magnitudes over the steps.
    pub scale: f64,
}

impl WeakResidual {
    pub fn max_abs(&self) -> f64 {
        self.residuals.iter().fold(0.0, |a, r| a.max(r.abs()))
    }
}

/// `r_n = ⟨(c_{n+1}-c_n)/dt, v⟩_M + ⟨A c_{n+1}, v⟩ + ⟨T[c_n], v⟩ + Σ w κ_n v_N - ⟨f(t_n), v⟩`.
pub fn weak_residual(
    traj: &Trajectory,
    field: &MultiplierField,
    config: &SolveConfig,
    test_vector: &[f64],
) -> Result<WeakResidual> {
    let sys = &config.system;
    sys.basis.check_len(test_vector.len())?;
    if field.kappa.len() < traj.len().saturating_sub(1) {
        return Err(Error::Shape {
            expected: traj.len().saturating_sub(1),
            got: field.kappa.len(),
        });
    }
    let v = DVector::from_column_slice(test_vector);
    let mv = &sys.mass * &v;
    let av = &sys.stiffness * &v;
    let v_n = sys.normal_trace(test_vector);
    let mut residuals = Vec::with_capacity(traj.len());
    let mut scale: f64 = 0.0;
    for n in 0..traj.len().saturating_sub(1) {
        let dt = traj.times[n + 1] - traj.times[n];
        let c0 = DVector::from_column_slice(&traj.coeffs[n]);
        let c1 = DVector::from_column_slice(&traj.coeffs[n + 1]);
        let time_term = (&c1 - &c0).dot(&mv) / dt;
        let visc = c1.dot(&av);
        let conv = sys.convection(&traj.coeffs[n]).dot(&v);
        let bdry: f64 = field
            .nodes
            .iter()
            .zip(&field.kappa[n])
            .zip(&v_n)
            .map(|((node, k), vn)| node.weight * k * vn)
            .sum();
        let force = config.forcing_at(traj.times[n]).dot(&v);
        let terms = [time_term, visc, conv, bdry, -force];
        scale = scale.max(terms.iter().map(|t| t.abs()).sum());
        residuals.push(terms.iter().sum());
    }
    Ok(WeakResidual {
        residuals,
        scale: scale.max(1.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary_law::fixture;
    use crate::evolve::solve;
    use crate::galerkin::{assemble, build_basis, default_quad_order, ForcingSpec};
    use std::sync::Arc;

    fn decay() -> SolveConfig {
        let b = build_basis(1).unwrap();
        let sys = Arc::new(assemble(&b, 1.0, default_quad_order(1)).unwrap());
        SolveConfig::new(sys, fixture("zero").unwrap(), ForcingSpec::zero(), vec![1.0], 0.5, 1e-3, 0.1)
            .unwrap()
    }

    #[test]
    fn decay_passes_energy() {
        let cfg = decay();
        let (traj, field) = solve(&cfg).unwrap();
        let rep = energy_report(&traj, &cfg).unwrap();
        assert!(rep.passed(), "{rep}");
        assert!(lemma1_bound_check(&field, &cfg).unwrap().passed());
        let text = rep.to_text();
        assert!(text.contains("[[check]]") && text.contains("energy_2_over_M"));
    }

    #[test]
    fn zero_data_margin_is_rhs() {
        let mut cfg = decay();
        cfg.initial = vec![0.0];
        let (traj, _) = solve(&cfg).unwrap();
        let rep = energy_report(&traj, &cfg).unwrap();
        assert!(rep.passed());
        assert_eq!(rep.records[0].margin, 0.0);
        let wr = weak_residual(&traj, &solve(&cfg).unwrap().1, &cfg, &[1.0]).unwrap();
        assert!(wr.residuals.iter().all(|&r| r == 0.0));
    }

    #[test]
    fn skew_on_trivial_inputs() {
        let b = build_basis(1).unwrap();
        let sys = assemble(&b, 1.0, default_quad_order(1)).unwrap();
        assert_eq!(sys.trilinear_form(&[1.0], &[1.0], &[1.0]), 0.0);
        assert!(skew_symmetry_check(&sys, 5, 1).unwrap().passed());
        assert!(skew_symmetry_check(&sys, 0, 1).is_err());
    }

    #[test]
    fn injected_kappa_fails_inclusion() {
        let b = build_basis(2).unwrap();
        let sys = Arc::new(assemble(&b, 1.0, default_quad_order(2)).unwrap());
        let cfg = SolveConfig::new(
            sys,
            fixture("sign").unwrap(),
            ForcingSpec::zero(),
            vec![0.3, -0.2, 0.1, 0.05],
            0.05,
            1e-2,
            0.05,
        )
        .unwrap();
        let (_, mut field) = solve(&cfg).unwrap();
        assert!(kappa_inclusion_check(&field, &cfg.law, 0.0).unwrap().passed());
        field.kappa[2][7] = 2.0;
        let rep = kappa_inclusion_check(&field, &cfg.law, 1e-6).unwrap();
        assert!(!rep.passed());
        assert!(rep.records[0].detail.contains("kappa = 2e0"), "{}", rep.records[0].detail);
    }

    #[test]
    fn ui_needs_two_fields() {
        let cfg = decay();
        let (_, field) = solve(&cfg).unwrap();
        assert!(matches!(
            uniform_integrability_report(std::slice::from_ref(&field), 0),
            Err(Error::Usage(_))
        ));
        let rep = uniform_integrability_report(&[field.clone(), field], 0).unwrap();
        assert!(rep.passed(), "{rep}");
    }
}
