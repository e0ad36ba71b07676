//! Closed-form scalar expressions used as pieces of a boundary law.
//!
//! Every variant supports the three operations the law machinery needs:
//! essential range over an interval, one-sided limits, and exact integrals.

use std::fmt;

/// Direction of a one-sided limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    /// Polynomial with ascending coefficients `a0 + a1 s + a2 s² + …`.
    Poly(Vec<f64>),
    /// `⌊p(s)⌋` for a polynomial `p` with ascending coefficients.
    FloorPoly(Vec<f64>),
    /// `scale · |s|^power` with `power > 0`.
    AbsPow { scale: f64, power: f64 },
}

impl Expr {
    pub fn linear(slope: f64, intercept: f64) -> Self {
        Expr::Poly(vec![intercept, slope])
    }

    pub fn eval(&self, s: f64) -> f64 {
        match self {
            Expr::Const(c) => *c,
            Expr::Poly(p) => poly::eval(p, s),
            Expr::FloorPoly(p) => poly::eval(p, s).floor(),
            Expr::AbsPow { scale, power } => scale * s.abs().powf(*power),
        }
    }

    /// Checks that the expression is well formed.
    pub fn validate(&self) -> Result<(), String> {
        let finite = |v: &[f64]| v.iter().all(|c| c.is_finite());
        match self {
            Expr::Const(c) if !c.is_finite() => Err("constant must be finite".into()),
            Expr::Poly(p) | Expr::FloorPoly(p) if p.is_empty() || !finite(p) => {
                Err("polynomial needs at least one finite coefficient".into())
            }
            Expr::AbsPow { scale, power } if !scale.is_finite() || !(*power > 0.0) => {
                Err("abs_pow needs a finite scale and a positive power".into())
            }
            _ => Ok(()),
        }
    }

    /// Essential infimum and supremum over the open interval `(a, b)`.
    ///
    /// `a` may be `-∞` and `b` may be `+∞`; `resolution` is the sampling step
    /// used only when polynomial critical points cannot be found in closed form.
    pub fn ess_range(&self, a: f64, b: f64, resolution: f64) -> (f64, f64) {
        debug_assert!(a < b);
        match self {
            Expr::Const(c) => (*c, *c),
            Expr::Poly(p) => poly::range(p, a, b, resolution),
            Expr::FloorPoly(p) => {
                let p = poly::trim(p);
                if p.len() <= 1 {
                    let v = p.first().copied().unwrap_or(0.0).floor();
                    return (v, v);
                }
                let (lo, hi) = poly::range(&p, a, b, resolution);
                // {p = sup p} is a null set for a nonconstant polynomial
                let sup = if hi.is_finite() { hi.ceil() - 1.0 } else { hi };
                (lo.floor(), sup)
            }
            Expr::AbsPow { .. } => {
                let mut vals = vec![self.eval_ext(a), self.eval_ext(b)];
                if a < 0.0 && b > 0.0 {
                    vals.push(0.0);
                }
                min_max(&vals)
            }
        }
    }

    /// Value with `±∞` arguments mapped to the corresponding limits.
    fn eval_ext(&self, s: f64) -> f64 {
        if s.is_finite() {
            return self.eval(s);
        }
        match self {
            Expr::Const(c) => *c,
            Expr::Poly(p) | Expr::FloorPoly(p) => poly::limit_at_infinity(p, s > 0.0),
            Expr::AbsPow { scale, .. } => {
                if *scale == 0.0 {
                    0.0
                } else {
                    scale.signum() * f64::INFINITY
                }
            }
        }
    }

    /// One-sided limit `lim_{s → t∓}`.
    pub fn limit(&self, t: f64, side: Side) -> f64 {
        match self {
            Expr::FloorPoly(p) => {
                let v = poly::eval(p, t);
                let n = v.round();
                if (v - n).abs() > 1e-12 * v.abs().max(1.0) {
                    return v.floor();
                }
                match poly::local_direction(p, t, side) {
                    d if d < 0.0 => n - 1.0,
                    _ => n,
                }
            }
            _ => self.eval(t),
        }
    }

    /// Exact integral over a finite interval `[a, b]` (orientation respected).
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        if a > b {
            return -self.integral(b, a);
        }
        match self {
            Expr::Const(c) => c * (b - a),
            Expr::Poly(p) => {
                let q = poly::antiderivative(p);
                poly::eval(&q, b) - poly::eval(&q, a)
            }
            Expr::FloorPoly(p) => {
                let mut cuts = vec![a];
                cuts.extend(poly::level_crossings(p, a, b, 1e-3));
                cuts.push(b);
                cuts.windows(2)
                    .map(|w| poly::eval(p, 0.5 * (w[0] + w[1])).floor() * (w[1] - w[0]))
                    .sum()
            }
            Expr::AbsPow { scale, power } => {
                let f = |s: f64| scale * s * s.abs().powf(*power) / (power + 1.0);
                f(b) - f(a)
            }
        }
    }

    /// Points of discontinuity strictly inside `(a, b)` (finite interval).
    pub fn discontinuities(&self, a: f64, b: f64, resolution: f64) -> Vec<f64> {
        match self {
            Expr::FloorPoly(p) => poly::level_crossings(p, a, b, resolution),
            _ => Vec::new(),
        }
    }

    pub fn is_continuous(&self) -> bool {
        !matches!(self, Expr::FloorPoly(p) if poly::trim(p).len() > 1)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |p: &[f64]| {
            p.iter()
                .map(|c| format!("{c}"))
                .collect::<Vec<_>>()
                .join(" ")
        };
        match self {
            Expr::Const(c) => write!(f, "const {c}"),
            Expr::Poly(p) => write!(f, "poly {}", join(p)),
            Expr::FloorPoly(p) => write!(f, "floor_poly {}", join(p)),
            Expr::AbsPow { scale, power } => write!(f, "abs_pow {scale} {power}"),
        }
    }
}

impl std::str::FromStr for Expr {
    type Err = String;

    /// Parses `const c`, `poly a0 a1 …`, `floor_poly a0 a1 …` or `abs_pow scale power`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut words = s.split_whitespace();
        let kind = words.next().ok_or("empty expression")?;
        let nums: Vec<f64> = words
            .map(|w| w.parse::<f64>().map_err(|e| format!("bad number {w:?}: {e}")))
            .collect::<Result<_, _>>()?;
        let expr = match (kind, nums.as_slice()) {
            ("const", [c]) => Expr::Const(*c),
            ("poly", p) if !p.is_empty() => Expr::Poly(p.to_vec()),
            ("floor_poly", p) if !p.is_empty() => Expr::FloorPoly(p.to_vec()),
            ("abs_pow", [scale, power]) => Expr::AbsPow {
                scale: *scale,
                power: *power,
            },
            _ => return Err(format!("cannot parse expression {s:?}")),
        };
        expr.validate()?;
        Ok(expr)
    }
}

fn min_max(vals: &[f64]) -> (f64, f64) {
    vals.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
        (lo.min(v), hi.max(v))
    })
}

pub(crate) mod poly {
    use super::{min_max, Side};

    pub fn trim(p: &[f64]) -> Vec<f64> {
        let mut q = p.to_vec();
        while q.len() > 1 && *q.last().unwrap() == 0.0 {
            q.pop();
        }
        q
    }

    pub fn eval(p: &[f64], s: f64) -> f64 {
        p.iter().rev().fold(0.0, |acc, &c| acc * s + c)
    }

    pub fn derivative(p: &[f64]) -> Vec<f64> {
        if p.len() <= 1 {
            return vec![0.0];
        }
        p.iter()
            .enumerate()
            .skip(1)
            .map(|(i, &c)| i as f64 * c)
            .collect()
    }

    pub fn antiderivative(p: &[f64]) -> Vec<f64> {
        std::iter::once(0.0)
            .chain(p.iter().enumerate().map(|(i, &c)| c / (i as f64 + 1.0)))
            .collect()
    }

    pub fn limit_at_infinity(p: &[f64], positive: bool) -> f64 {
        let q = trim(p);
        let deg = q.len() - 1;
        let lead = q[deg];
        if deg == 0 || lead == 0.0 {
            return lead;
        }
        let sign = if positive || deg.is_multiple_of(2) {
            lead.signum()
        } else {
            -lead.signum()
        };
        sign * f64::INFINITY
    }

    /// Sign of `p(t ± h) - p(t)` for small `h > 0`, read off the first
    /// nonvanishing derivative; zero for constant polynomials.
    pub fn local_direction(p: &[f64], t: f64, side: Side) -> f64 {
        let mut d = trim(p);
        let mut order = 0;
        while d.len() > 1 {
            d = derivative(&d);
            order += 1;
            let v = eval(&d, t);
            if v != 0.0 {
                let flip = side == Side::Left && order % 2 == 1;
                return if flip { -v.signum() } else { v.signum() };
            }
        }
        0.0
    }

    /// Real roots of `p` strictly inside `(a, b)`, sorted.
    pub fn roots(p: &[f64], a: f64, b: f64, resolution: f64) -> Vec<f64> {
        let q = trim(p);
        let mut out: Vec<f64> = match q.len() {
            0 | 1 => Vec::new(),
            2 => vec![-q[0] / q[1]],
            3 => {
                let (c, bq, aq) = (q[0], q[1], q[2]);
                let disc = bq * bq - 4.0 * aq * c;
                if disc < 0.0 {
                    Vec::new()
                } else if disc == 0.0 {
                    vec![-bq / (2.0 * aq)]
                } else {
                    let sq = disc.sqrt();
                    let sgn = if bq >= 0.0 { 1.0 } else { -1.0 };
                    let t = -0.5 * (bq + sgn * sq);
                    let r1 = t / aq;
                    let r2 = if t != 0.0 { c / t } else { -r1 };
                    vec![r1, r2]
                }
            }
            _ => {
                let n = q.len() - 1;
                let bound = 1.0 + q[..n].iter().map(|c| (c / q[n]).abs()).fold(0.0, f64::max);
                let lo = a.max(-bound);
                let hi = b.min(bound);
                if lo >= hi {
                    return Vec::new();
                }
                let steps = (((hi - lo) / resolution).ceil() as usize).clamp(256, 2_000_000);
                let h = (hi - lo) / steps as f64;
                let mut found = Vec::new();
                let mut x0 = lo;
                let mut f0 = eval(&q, x0);
                for k in 1..=steps {
                    let x1 = lo + k as f64 * h;
                    let f1 = eval(&q, x1);
                    if f0 == 0.0 {
                        found.push(x0);
                    } else if f0 * f1 < 0.0 {
                        found.push(bisect(|s| eval(&q, s), x0, x1));
                    }
                    x0 = x1;
                    f0 = f1;
                }
                found
            }
        };
        out.retain(|&r| r > a && r < b);
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
        let flo = f(lo);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let fm = f(mid);
            if fm == 0.0 {
                return mid;
            }
            if (fm < 0.0) == (flo < 0.0) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Infimum and supremum of `p` over the closure of `(a, b)`.
    pub fn range(p: &[f64], a: f64, b: f64, resolution: f64) -> (f64, f64) {
        let at = |s: f64| {
            if s.is_finite() {
                eval(p, s)
            } else {
                limit_at_infinity(p, s > 0.0)
            }
        };
        let mut vals = vec![at(a), at(b)];
        for r in roots(&derivative(p), a, b, resolution) {
            vals.push(eval(p, r));
        }
        min_max(&vals)
    }

    /// Points in `(a, b)` where `p` crosses an integer level.
    pub fn level_crossings(p: &[f64], a: f64, b: f64, resolution: f64) -> Vec<f64> {
        let q = trim(p);
        if q.len() <= 1 || a >= b {
            return Vec::new();
        }
        let mut cuts = vec![a];
        cuts.extend(roots(&derivative(&q), a, b, resolution));
        cuts.push(b);
        let mut out = Vec::new();
        for w in cuts.windows(2) {
            let (c, d) = (w[0], w[1]);
            let (pc, pd) = (eval(&q, c), eval(&q, d));
            let (lo, hi) = if pc < pd { (pc, pd) } else { (pd, pc) };
            let first = lo.floor() as i64 + 1;
            let last = hi.ceil() as i64 - 1;
            for n in first..=last {
                let level = n as f64;
                let r = bisect(|s| eval(&q, s) - level, c, d);
                if r > a && r < b {
                    out.push(r);
                }
            }
            // interior critical points sitting exactly on an integer level
            if d < b && (eval(&q, d) - eval(&q, d).round()).abs() == 0.0 {
                out.push(d);
            }
        }
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }
}
