//! x-dependent superpotentials `j(x, ξ) = Σ_q a_q(x) g_q(ξ)` on the boundary
//! and their growth hypotheses.
//!
//! Every `g_q` is stored through its derivative, itself a [`BoundaryLaw`], so
//! `g_q = ∫₀^ξ g_q'`. One-sided derivatives, the Clarke derivative and
//! mollification then come straight from the law machinery.

use serde::{Deserialize, Serialize};

use crate::boundary_law::{
    eval_envelope, fixture, mollify_eval, BoundaryLaw, Expr, Interval, Mollifier, Piece, Tail,
};
use crate::check::{CheckResult, Witness};
use crate::error::{Error, Result};
use crate::evolve::{solve_with, BoundaryResponse, MultiplierField, SolveConfig, Trajectory};
use crate::galerkin::EdgeNode;
use crate::verify::{CheckRecord, Relation, VerificationReport};

/// A function of boundary arc length `x ∈ [0, 4)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ArcFunction {
    Constant { value: f64 },
    /// `c0 + c1 x`
    Affine { c0: f64, c1: f64 },
    /// `mean + amp cos(2π periods x / 4)`
    Cosine { mean: f64, amp: f64, periods: f64 },
}

impl ArcFunction {
    pub fn constant(value: f64) -> Self {
        ArcFunction::Constant { value }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            ArcFunction::Constant { value } => value,
            ArcFunction::Affine { c0, c1 } => c0 + c1 * x,
            ArcFunction::Cosine { mean, amp, periods } => {
                mean + amp * (std::f64::consts::TAU * periods * x / 4.0).cos()
            }
        }
    }

    /// Exact bounds over `[0, 4]`.
    pub fn range(&self) -> (f64, f64) {
        match *self {
            ArcFunction::Constant { value } => (value, value),
            ArcFunction::Affine { c0, c1 } => {
                let (a, b) = (c0, c0 + 4.0 * c1);
                (a.min(b), a.max(b))
            }
            ArcFunction::Cosine { mean, amp, periods } => {
                if periods.abs() >= 1.0 {
                    (mean - amp.abs(), mean + amp.abs())
                } else {
                    let samples = (0..=64).map(|k| self.eval(4.0 * k as f64 / 64.0));
                    samples.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GrowthKind {
    Constant { c: f64 },
    /// `c0 + c1 r`
    Affine { c0: f64, c1: f64 },
    /// `c (1 + r)^p`
    Power { c: f64, p: f64 },
}

/// `(x, r) ↦ scale(x) · kind(r)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthFunction {
    pub kind: GrowthKind,
    #[serde(default = "unit_scale")]
    pub scale: ArcFunction,
}

fn unit_scale() -> ArcFunction {
    ArcFunction::constant(1.0)
}

impl GrowthFunction {
    pub fn constant(c: f64) -> Self {
        GrowthFunction {
            kind: GrowthKind::Constant { c },
            scale: ArcFunction::constant(1.0),
        }
    }

    pub fn affine(c0: f64, c1: f64) -> Self {
        GrowthFunction {
            kind: GrowthKind::Affine { c0, c1 },
            scale: ArcFunction::constant(1.0),
        }
    }

    pub fn eval(&self, x: f64, r: f64) -> f64 {
        let base = match self.kind {
            GrowthKind::Constant { c } => c,
            GrowthKind::Affine { c0, c1 } => c0 + c1 * r,
            GrowthKind::Power { c, p } => c * (1.0 + r).powf(p),
        };
        self.scale.eval(x) * base
    }
}

/// Catalog of scalar potentials `g`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScalarPotential {
    /// `|ξ|`
    Abs,
    /// `ξ²`
    Quadratic,
    /// Continuous, `g(0) = 0`, slope `slopes[i]` between consecutive knots
    /// (`slopes.len() = knots.len() + 1`).
    PiecewiseLinear { knots: Vec<f64>, slopes: Vec<f64> },
    /// `∫₀^ξ θ` for a catalog law θ (e.g. the floor-cube law).
    Primitive { law: String },
}

impl ScalarPotential {
    /// The derivative `g'` as a law on `[-window, window]` with formula tails.
    pub fn derivative_law(&self, window: f64, resolution: f64) -> Result<BoundaryLaw> {
        let w = window;
        let pieces = match self {
            ScalarPotential::Abs => vec![
                Piece::new(-w, 0.0, Expr::Const(-1.0)),
                Piece::new(0.0, w, Expr::Const(1.0)),
            ],
            ScalarPotential::Quadratic => vec![Piece::new(-w, w, Expr::linear(2.0, 0.0))],
            ScalarPotential::PiecewiseLinear { knots, slopes } => {
                if slopes.len() != knots.len() + 1 {
                    return Err(Error::Config(format!(
                        "piecewise-linear potential needs {} slopes for {} knots",
                        knots.len() + 1,
                        knots.len()
                    )));
                }
                if knots.windows(2).any(|k| !(k[1] > k[0])) || knots.iter().any(|k| k.abs() >= w) {
                    return Err(Error::Config("knots must increase strictly inside the window".into()));
                }
                let mut edges = vec![-w];
                edges.extend(knots.iter().copied());
                edges.push(w);
                edges
                    .windows(2)
                    .zip(slopes)
                    .map(|(e, &s)| Piece::new(e[0], e[1], Expr::Const(s)))
                    .collect()
            }
            ScalarPotential::Primitive { law } => return fixture(law),
        };
        BoundaryLaw::new(
            format!("d/dxi {}", self.name()),
            pieces,
            w,
            Tail::Formula,
            Tail::Formula,
            1.0,
            resolution,
        )
    }

    pub fn name(&self) -> String {
        match self {
            ScalarPotential::Abs => "abs".into(),
            ScalarPotential::Quadratic => "quadratic".into(),
            ScalarPotential::PiecewiseLinear { .. } => "piecewise_linear".into(),
            ScalarPotential::Primitive { law } => format!("primitive({law})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub a: ArcFunction,
    pub g: ScalarPotential,
    /// `g'`.
    pub derivative: BoundaryLaw,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuperPotential {
    terms: Vec<Term>,
    beta: GrowthFunction,
    window: f64,
    resolution: f64,
}

impl SuperPotential {
    pub fn new(
        terms: Vec<(ArcFunction, ScalarPotential)>,
        beta: GrowthFunction,
        window: f64,
        resolution: f64,
    ) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::Config("superpotential needs at least one term".into()));
        }
        if !(window > 0.0 && resolution > 0.0) {
            return Err(Error::Config("window and resolution must be positive".into()));
        }
        let terms = terms
            .into_iter()
            .map(|(a, g)| {
                let derivative = g.derivative_law(window, resolution)?;
                Ok(Term { a, g, derivative })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SuperPotential {
            terms,
            beta,
            window,
            resolution,
        })
    }

    /// x-independent `j = ∫₀^ξ θ`, whose derivative is the law itself.
    pub fn from_law(law: &BoundaryLaw, beta: GrowthFunction) -> Self {
        SuperPotential {
            terms: vec![Term {
                a: ArcFunction::constant(1.0),
                g: ScalarPotential::Primitive {
                    law: law.name().to_string(),
                },
                derivative: law.clone(),
            }],
            beta,
            window: law.window(),
            resolution: law.resolution(),
        }
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn beta(&self) -> &GrowthFunction {
        &self.beta
    }

    pub fn window(&self) -> f64 {
        self.window
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    fn check_window(&self, xi: f64) -> Result<()> {
        if !(xi.abs() <= self.window) {
            return Err(Error::Inconclusive(format!(
                "argument {xi} outside superpotential window [-{w}, {w}]",
                w = self.window
            )));
        }
        Ok(())
    }

    pub fn value(&self, x: f64, xi: f64) -> Result<f64> {
        self.terms
            .iter()
            .map(|t| Ok(t.a.eval(x) * t.derivative.chang_potential(xi)?))
            .sum()
    }

    /// One-sided derivatives `(∂_ξ j(x, ξ-0), ∂_ξ j(x, ξ+0))`.
    pub fn derivative_limits(&self, x: f64, xi: f64) -> Result<(f64, f64)> {
        let mut out = (0.0, 0.0);
        for t in &self.terms {
            let (l, r) = t.derivative.one_sided_limits(xi)?;
            let a = t.a.eval(x);
            out.0 += a * l;
            out.1 += a * r;
        }
        Ok(out)
    }

    /// Clarke gradient `∂j(x, ξ)`.
    pub fn subdifferential(&self, x: f64, xi: f64) -> Result<Interval> {
        let (l, r) = self.derivative_limits(x, xi)?;
        Ok(Interval::new(l.min(r), l.max(r)))
    }

    /// `(δ₀, sup_x Σ |a_q| ess sup |g_q'|)` on `[-δ₀-1, δ₀+1]`, the analogue
    /// of the law constants.
    pub fn rho_constants(&self, delta0: f64) -> Result<(f64, f64)> {
        let r = delta0 + 1.0;
        let mut rho2 = 0.0;
        for t in &self.terms {
            let (lo, hi) = t.a.range();
            let iv = t.derivative.ess_range(-r, r)?;
            rho2 += lo.abs().max(hi.abs()) * iv.lo.abs().max(iv.hi.abs());
        }
        Ok((delta0, rho2))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthData {
    pub alpha: GrowthFunction,
    pub k: ArcFunction,
}

impl GrowthData {
    /// `ᾱ(x, r) = 2 α(x, r + 1)`.
    pub fn alpha_bar(&self, x: f64, r: f64) -> f64 {
        2.0 * self.alpha.eval(x, r + 1.0)
    }
}

/// Exact `j⁰(x; ξ, v) = max(D₋ v, D₊ v)` from the one-sided derivatives.
pub fn clarke_dd(sp: &SuperPotential, x: f64, xi: f64, direction: f64) -> Result<f64> {
    sp.check_window(xi)?;
    sp.check_window(xi + direction)?;
    let (l, r) = sp.derivative_limits(x, xi)?;
    Ok((l * direction).max(r * direction))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClarkeEstimate {
    pub value: f64,
    /// Grid scale the estimate was taken at.
    pub h: f64,
}

/// Difference-quotient estimate of `j⁰` over base points `ξ + {0, ±h, ±h/2, ±h/4}`
/// and steps `λ ∈ {h, h/2, h/4}`.
pub fn clarke_dd_grid(sp: &SuperPotential, x: f64, xi: f64, direction: f64, h: f64) -> Result<ClarkeEstimate> {
    if !(h > 0.0) {
        return Err(Error::Domain(format!("grid scale must be positive, got {h}")));
    }
    sp.check_window(xi)?;
    sp.check_window(xi + direction)?;
    let scales = [h, h / 2.0, h / 4.0];
    let mut best = f64::NEG_INFINITY;
    let mut bases = vec![xi];
    for s in scales {
        bases.push(xi - s);
        bases.push(xi + s);
    }
    for &y in &bases {
        let jy = sp.value(x, y)?;
        for &lambda in &scales {
            let q = (sp.value(x, y + lambda * direction)? - jy) / lambda;
            best = best.max(q);
        }
    }
    Ok(ClarkeEstimate { value: best, h })
}

/// Which bound the directional growth condition is checked against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundReading {
    /// `α(x, r)(1 + |η|)`
    Eta,
    /// `α(x, r)(1 + |ξ|)`
    Xi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Condition {
    /// Lipschitz bound with rank β.
    Hj,
    /// `j⁰(x; ξ, η - ξ) ≤ α(x, r)(1 + |·|)` for `|η| ≤ r`.
    Hj0(BoundReading),
    /// `j⁰(x; ξ, -ξ) ≤ k(x)|ξ|`.
    G2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthSample {
    pub x: f64,
    pub xi: f64,
    pub eta: f64,
    pub r: f64,
}

/// Tensor grid of samples: every `x`, `r`, `n` values of ξ in `[-xi_max, xi_max]`
/// and `n` values of η in `[-r, r]`.
pub fn sample_grid(xs: &[f64], rs: &[f64], xi_max: f64, n: usize) -> Vec<GrowthSample> {
    let lin = |a: f64, b: f64, k: usize| if n <= 1 { 0.5 * (a + b) } else { a + (b - a) * k as f64 / (n - 1) as f64 };
    let mut out = Vec::new();
    for &x in xs {
        for &r in rs {
            for i in 0..n {
                for k in 0..n {
                    out.push(GrowthSample {
                        x,
                        xi: lin(-xi_max, xi_max, i),
                        eta: lin(-r, r, k),
                        r,
                    });
                }
            }
        }
    }
    out
}

fn exceeds(lhs: f64, rhs: f64) -> bool {
    lhs > rhs + 1e-12 * (1.0 + rhs.abs())
}

/// Checks one hypothesis on all samples. Samples outside the window or
/// outside the condition's quantifier are skipped; if nothing remains the
/// result is inconclusive.
pub fn check_conditions(
    sp: &SuperPotential,
    growth: &GrowthData,
    condition: Condition,
    samples: &[GrowthSample],
) -> CheckResult {
    let mut checked = 0usize;
    let mut worst: Option<(f64, Witness)> = None;
    for s in samples {
        let evaluated = match condition {
            Condition::Hj => {
                if s.xi.abs() > s.r || s.eta.abs() > s.r {
                    continue;
                }
                let lhs = sp.value(s.x, s.xi).and_then(|a| Ok((a - sp.value(s.x, s.eta)?).abs()));
                lhs.map(|l| (l, sp.beta.eval(s.x, s.r) * (s.xi - s.eta).abs(), "H(j) Lipschitz bound"))
            }
            Condition::Hj0(reading) => {
                if s.eta.abs() > s.r {
                    continue;
                }
                let factor = match reading {
                    BoundReading::Eta => 1.0 + s.eta.abs(),
                    BoundReading::Xi => 1.0 + s.xi.abs(),
                };
                clarke_dd(sp, s.x, s.xi, s.eta - s.xi)
                    .map(|l| (l, growth.alpha.eval(s.x, s.r) * factor, "directional growth bound"))
            }
            Condition::G2 => clarke_dd(sp, s.x, s.xi, -s.xi)
                .map(|l| (l, growth.k.eval(s.x).max(0.0) * s.xi.abs(), "G2 bound")),
        };
        let Ok((lhs, rhs, note)) = evaluated else {
            continue;
        };
        checked += 1;
        if exceeds(lhs, rhs) && worst.as_ref().is_none_or(|(gap, _)| lhs - rhs > *gap) {
            worst = Some((
                lhs - rhs,
                Witness {
                    point: vec![s.x, s.xi, s.eta, s.r],
                    lhs,
                    rhs,
                    note: note.into(),
                },
            ));
        }
    }
    if growth.k.range().0 < 0.0 && condition == Condition::G2 {
        return CheckResult::Inconclusive("k takes negative values on the boundary".into());
    }
    match (worst, checked) {
        (Some((_, w)), _) => CheckResult::Violated(w),
        (None, 0) => CheckResult::Inconclusive("no sample inside the window and quantifier range".into()),
        (None, _) => CheckResult::Satisfied,
    }
}

fn sum_terms<F: Fn(&Term) -> Result<f64>>(sp: &SuperPotential, f: F) -> Result<f64> {
    sp.terms
        .iter()
        .map(f)
        .reduce(|a, b| Ok(a? + b?))
        .expect("at least one term")
}

/// `j'_ε(x; ξ)` with an explicit mollifier.
pub fn mollified_derivative_with(sp: &SuperPotential, x: f64, moll: &Mollifier, xi: f64) -> Result<f64> {
    sum_terms(sp, |t| Ok(t.a.eval(x) * mollify_eval(&t.derivative, moll, xi)?))
}

/// `j'_ε(x; ξ) = Σ a_q(x) (h_ε ⋆ g_q')(ξ)` for `0 < ε < 1`.
pub fn mollified_derivative(sp: &SuperPotential, x: f64, epsilon: f64, xi: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Domain(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    sp.check_window(xi)?;
    mollified_derivative_with(sp, x, &Mollifier::with_default_order(epsilon)?, xi)
}

/// `j'_ε(x; ξ)(η - ξ) ≤ ᾱ(x, r)(1 + |ξ|)` for `|η| ≤ r`.
pub fn lemma_estj_check(
    sp: &SuperPotential,
    growth: &GrowthData,
    epsilon: f64,
    samples: &[GrowthSample],
) -> CheckResult {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return CheckResult::Inconclusive(format!("epsilon must lie in (0, 1), got {epsilon}"));
    }
    let mut checked = 0usize;
    let mut worst: Option<(f64, Witness)> = None;
    for s in samples {
        if s.eta.abs() > s.r {
            continue;
        }
        let Ok(d) = mollified_derivative(sp, s.x, epsilon, s.xi) else {
            continue;
        };
        checked += 1;
        let lhs = d * (s.eta - s.xi);
        let rhs = growth.alpha_bar(s.x, s.r) * (1.0 + s.xi.abs());
        if exceeds(lhs, rhs) && worst.as_ref().is_none_or(|(gap, _)| lhs - rhs > *gap) {
            worst = Some((
                lhs - rhs,
                Witness {
                    point: vec![s.x, s.xi, s.eta, s.r],
                    lhs,
                    rhs,
                    note: format!("mollified derivative estimate at epsilon = {epsilon}"),
                },
            ));
        }
    }
    match (worst, checked) {
        (Some((_, w)), _) => CheckResult::Violated(w),
        (None, 0) => CheckResult::Inconclusive("no sample inside the window and quantifier range".into()),
        (None, _) => CheckResult::Satisfied,
    }
}

/// `κ = j'_ε(x, u_N)` with `x` the node's arc length.
pub struct SuperPotentialResponse<'a> {
    pub sp: &'a SuperPotential,
    pub mollifier: Mollifier,
}

impl BoundaryResponse for SuperPotentialResponse<'_> {
    fn response(&self, node: &EdgeNode, u_n: f64) -> Result<f64> {
        mollified_derivative_with(self.sp, node.arc, &self.mollifier, u_n)
    }
}

/// The evolve pipeline with `θ_ε(u_N)` replaced by `j'_ε(x, u_N)`. The law in
/// `config` is not used.
pub fn solve_with_superpotential(sp: &SuperPotential, config: &SolveConfig) -> Result<(Trajectory, MultiplierField)> {
    let response = SuperPotentialResponse {
        sp,
        mollifier: config.mollifier()?,
    };
    solve_with(config, &response)
}

/// Every κ lies in `Σ a_q(x) [ε-envelope of g_q'](u_N)` widened by `tol`,
/// the finite-ε surrogate of `κ ∈ ∂j(x, u_N)`.
pub fn superpotential_inclusion_check(
    field: &MultiplierField,
    sp: &SuperPotential,
    tol: f64,
) -> Result<VerificationReport> {
    let envs = sp
        .terms
        .iter()
        .map(|t| eval_envelope(&t.derivative, field.epsilon))
        .collect::<Result<Vec<_>>>()?;
    let mut total = 0usize;
    let mut inside = 0usize;
    let mut first = None;
    for (n, (us, ks)) in field.u_n.iter().zip(&field.kappa).enumerate() {
        for (q, (&u, &k)) in us.iter().zip(ks).enumerate() {
            total += 1;
            let x = field.nodes[q].arc;
            let mut iv = Interval::new(0.0, 0.0);
            let mut ok = true;
            for (t, env) in sp.terms.iter().zip(&envs) {
                match env.at(u) {
                    Ok(e) => {
                        let a = t.a.eval(x);
                        let (p, r) = (a * e.lo, a * e.hi);
                        iv = Interval::new(iv.lo + p.min(r), iv.hi + p.max(r));
                    }
                    Err(_) => ok = false,
                }
            }
            if ok && iv.contains(k, tol) {
                inside += 1;
            } else if first.is_none() {
                first = Some(format!("t = {}, x = {x:.6}, u_N = {u:e}, kappa = {k:e}", field.times[n]));
            }
        }
    }
    let fraction = if total == 0 { 1.0 } else { inside as f64 / total as f64 };
    let mut rep = VerificationReport::new("superpotential inclusion");
    rep.note(format!("envelope blur epsilon = {:e}, tol = {tol:e}", field.epsilon));
    rep.push(
        CheckRecord::new("kappa_in_clarke_gradient", Relation::AtLeast, 1.0, fraction, 0.0)
            .with_detail(first.map_or_else(|| format!("{total} samples"), |f| format!("first failure: {f}"))),
    );
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(g: ScalarPotential, scale: f64) -> SuperPotential {
        SuperPotential::new(vec![(ArcFunction::constant(scale), g)], GrowthFunction::constant(10.0), 10.0, 1e-3)
            .unwrap()
    }

    fn no_growth(k: f64) -> GrowthData {
        GrowthData {
            alpha: GrowthFunction::constant(1.0),
            k: ArcFunction::constant(k),
        }
    }

    #[test]
    fn clarke_of_kinks() {
        let abs = single(ScalarPotential::Abs, 1.0);
        assert_eq!(clarke_dd(&abs, 0.0, 0.0, 1.0).unwrap(), 1.0);
        let neg = single(ScalarPotential::Abs, -1.0);
        assert_eq!(clarke_dd(&neg, 0.0, 0.0, 1.0).unwrap(), 1.0);
        let est = clarke_dd_grid(&neg, 0.0, 0.0, 1.0, 1e-3).unwrap();
        assert!((est.value - 1.0).abs() < 1e-9);
        let quad = single(ScalarPotential::Quadratic, 1.0);
        assert!((clarke_dd(&quad, 0.0, 1.5, -0.5).unwrap() - (-1.5)).abs() < 1e-12);
        assert!(matches!(clarke_dd(&abs, 0.0, 9.5, 1.0), Err(Error::Inconclusive(_))));
    }

    #[test]
    fn g2_closed_forms() {
        let samples = sample_grid(&[0.0, 1.3], &[1.0], 10.0, 21);
        let abs = single(ScalarPotential::Abs, 1.0);
        assert!(check_conditions(&abs, &no_growth(0.0), Condition::G2, &samples).is_satisfied());
        let quad = single(ScalarPotential::Quadratic, 1.0);
        assert!(check_conditions(&quad, &no_growth(0.0), Condition::G2, &samples).is_satisfied());
        let neg = single(ScalarPotential::Quadratic, -1.0);
        let r = check_conditions(&neg, &no_growth(0.0), Condition::G2, &samples);
        let w = r.witness().expect("violated");
        assert_eq!(w.point[1].abs(), 10.0);
        assert_eq!(w.lhs, 200.0);
    }

    #[test]
    fn values_are_primitives() {
        let pl = single(
            ScalarPotential::PiecewiseLinear {
                knots: vec![-1.0, 2.0],
                slopes: vec![-3.0, 0.5, 1.0],
            },
            2.0,
        );
        assert!((pl.value(0.0, 3.0).unwrap() - 2.0 * (1.0 + 1.0)).abs() < 1e-12);
        assert!((pl.value(0.0, -2.0).unwrap() - 2.0 * (-0.5 + 3.0)).abs() < 1e-12);
        let fl = single(ScalarPotential::Primitive { law: "remark-floor-cube".into() }, 1.0);
        assert!((fl.value(0.0, 0.5).unwrap() + 0.125).abs() < 1e-12);
    }

    #[test]
    fn mollified_derivative_basics() {
        let abs = single(ScalarPotential::Abs, 1.0);
        assert!(mollified_derivative(&abs, 0.0, 0.2, 0.0).unwrap().abs() < 1e-15);
        let v = mollified_derivative(&abs, 0.0, 0.2, 0.1).unwrap();
        assert!(v > 0.0 && v < 1.0);
        let quad = single(ScalarPotential::Quadratic, 1.0);
        assert!((mollified_derivative(&quad, 0.0, 0.3, 1.7).unwrap() - 3.4).abs() < 1e-12);
        assert!(mollified_derivative(&abs, 0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn alpha_bar_identity() {
        let g = GrowthData {
            alpha: GrowthFunction {
                kind: GrowthKind::Power { c: 0.5, p: 1.5 },
                scale: ArcFunction::Cosine {
                    mean: 2.0,
                    amp: 1.0,
                    periods: 1.0,
                },
            },
            k: ArcFunction::constant(0.0),
        };
        for x in [0.0, 0.7, 3.9] {
            for r in [0.0, 1.0, 4.5] {
                assert_eq!(g.alpha_bar(x, r) - 2.0 * g.alpha.eval(x, r + 1.0), 0.0);
            }
        }
    }

    #[test]
    fn zero_growth_breaks_lemma() {
        let abs = single(ScalarPotential::Abs, 1.0);
        let g0 = GrowthData {
            alpha: GrowthFunction::constant(0.0),
            k: ArcFunction::constant(0.0),
        };
        let samples = sample_grid(&[0.0], &[1.0], 2.0, 9);
        assert!(lemma_estj_check(&abs, &g0, 0.1, &samples).is_violated());
        let zero = single(ScalarPotential::Quadratic, 0.0);
        assert!(lemma_estj_check(&zero, &g0, 0.1, &samples).is_satisfied());
    }
}
