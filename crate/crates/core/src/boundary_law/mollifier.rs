use std::sync::OnceLock;

use super::BoundaryLaw;
use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;

/// Unnormalised bump `exp(-1/(1-s²))` on `(-1, 1)`, zero outside.
pub fn bump(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - s * s)).exp()
    }
}

/// `∫ bump`, computed once with a 64-panel, 24-point composite rule.
pub fn bump_normalization() -> f64 {
    static Z: OnceLock<f64> = OnceLock::new();
    *Z.get_or_init(|| GaussLegendre::new(24).integrate_composite(-1.0, 1.0, 64, bump))
}

/// The scaled kernel `h_ε(s) = h(s/ε)/ε` with `∫ h = 1`, together with the
/// quadrature used for convolutions against it.
#[derive(Debug, Clone)]
pub struct Mollifier {
    epsilon: f64,
    quad_order: usize,
    panels: usize,
    rule: GaussLegendre,
}

impl Mollifier {
    pub const DEFAULT_QUAD_ORDER: usize = 16;
    const PANELS: usize = 4;

    pub fn new(epsilon: f64, quad_order: usize) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::Domain(format!("mollifier scale must be > 0, got {epsilon}")));
        }
        if quad_order < 4 {
            return Err(Error::Config(format!(
                "mollifier quad_order must be at least 4, got {quad_order}"
            )));
        }
        Ok(Self {
            epsilon,
            quad_order,
            panels: Self::PANELS,
            rule: GaussLegendre::new(quad_order),
        })
    }

    pub fn with_default_order(epsilon: f64) -> Result<Self> {
        Self::new(epsilon, Self::DEFAULT_QUAD_ORDER)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn quad_order(&self) -> usize {
        self.quad_order
    }

    /// Normalised reference bump `h`.
    pub fn shape(s: f64) -> f64 {
        bump(s) / bump_normalization()
    }

    /// `h_ε(s)`, supported on `[-ε, ε]`.
    pub fn kernel(&self, s: f64) -> f64 {
        Self::shape(s / self.epsilon) / self.epsilon
    }

    /// Quadrature nodes `r` and weights `w·h_ε(t - r)` over `[t-ε, t+ε]`,
    /// with extra cuts at the given discontinuities.
    fn nodes(&self, t: f64, jumps: &[f64]) -> Vec<(f64, f64)> {
        let eps = self.epsilon;
        let mut cuts: Vec<f64> = (0..=self.panels)
            .map(|k| t - eps + 2.0 * eps * k as f64 / self.panels as f64)
            .collect();
        cuts.extend(jumps.iter().copied().filter(|&j| j > t - eps && j < t + eps));
        cuts.sort_by(f64::total_cmp);
        cuts.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * eps);
        let mut out = Vec::with_capacity(cuts.len() * self.quad_order);
        for w in cuts.windows(2) {
            for (r, wq) in self.rule.mapped(w[0], w[1]) {
                out.push((r, wq * self.kernel(t - r)));
            }
        }
        out
    }

    /// Convolution `(h_ε ⋆ g)(t)` of an arbitrary function with known jumps.
    ///
    /// The quadrature weights are renormalised to unit mass, so the result is
    /// a convex combination of sampled values of `g`.
    pub fn convolve<F>(&self, t: f64, jumps: &[f64], mut g: F) -> Result<f64>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        let mut num = 0.0;
        let mut den = 0.0;
        for (r, w) in self.nodes(t, jumps) {
            num += w * g(r)?;
            den += w;
        }
        Ok(num / den)
    }
}

/// `θ_ε(t) = ∫ h_ε(s) θ(t - s) ds`.
pub fn mollify_eval(law: &BoundaryLaw, moll: &Mollifier, t: f64) -> Result<f64> {
    let eps = moll.epsilon();
    let (lo, hi) = law.domain();
    if !(t - eps >= lo && t + eps <= hi) {
        return Err(Error::Inconclusive(format!(
            "mollification of {:?} at {t} with eps = {eps} leaves the known domain",
            law.name()
        )));
    }
    let jumps = law.discontinuities(t - eps, t + eps);
    moll.convolve(t, &jumps, |r| law.value(r))
}

#[cfg(test)]
mod tests {
    use super::super::fixture;
    use super::*;

    #[test]
    fn normalization_matches_independent_trapezoid() {
        // bump is C∞ with all derivatives vanishing at ±1: trapezoid converges fast
        let n = 20_000;
        let h = 2.0 / n as f64;
        let trap: f64 = (1..n).map(|k| bump(-1.0 + k as f64 * h)).sum::<f64>() * h;
        assert!((trap - bump_normalization()).abs() < 1e-12);
        let mass = GaussLegendre::new(20).integrate_composite(-1.0, 1.0, 50, Mollifier::shape);
        assert!((mass - 1.0).abs() < 1e-10);
    }

    #[test]
    fn kernel_support_and_sign() {
        let m = Mollifier::new(0.2, 8).unwrap();
        assert_eq!(m.kernel(0.2), 0.0);
        assert_eq!(m.kernel(-0.25), 0.0);
        assert!(m.kernel(0.19) > 0.0);
        assert!((-100..=100).all(|k| m.kernel(k as f64 * 0.003) >= 0.0));
    }

    #[test]
    fn configuration_errors() {
        assert!(matches!(Mollifier::new(0.1, 3), Err(Error::Config(_))));
        assert!(matches!(Mollifier::new(0.0, 8), Err(Error::Domain(_))));
    }

    #[test]
    fn linear_law_is_reproduced() {
        let law = fixture("linear").unwrap();
        for eps in [0.01, 0.3, 1.0] {
            let m = Mollifier::with_default_order(eps).unwrap();
            for t in [-2.0, 0.0, 0.37, 5.0] {
                assert!((mollify_eval(&law, &m, t).unwrap() - t).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn step_at_jump_is_one_half() {
        let law = fixture("step").unwrap();
        let m = Mollifier::with_default_order(0.1).unwrap();
        assert!((mollify_eval(&law, &m, 0.0).unwrap() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn window_violation_is_inconclusive() {
        let law = BoundaryLaw::new(
            "w",
            vec![super::super::Piece::new(-1.0, 1.0, super::super::Expr::Const(1.0))],
            1.0,
            super::super::Tail::Bounded(1.0),
            super::super::Tail::Bounded(1.0),
            0.5,
            1e-3,
        )
        .unwrap();
        let m = Mollifier::with_default_order(0.1).unwrap();
        assert!(matches!(mollify_eval(&law, &m, 0.95), Err(Error::Inconclusive(_))));
        assert!(mollify_eval(&law, &m, 0.85).is_ok());
    }
}
