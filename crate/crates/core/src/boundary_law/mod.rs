//! Scalar boundary laws θ, their filled-in envelopes, mollifications and
//! primitives, plus the tail-sign (Rauch) checker.
//!
//! A law is a finite list of closed-form pieces covering a window `[-W, W]`.
//! What happens beyond the window is never guessed: it is either declared
//! ([`Tail`]) or the query is answered with [`Error::Inconclusive`].

mod catalog;
mod expr;
mod mollifier;

use std::fmt;

pub use catalog::{fixture, fixture_names, LawFile, PieceSpec};
pub use expr::{Expr, Side};
pub use mollifier::{bump, bump_normalization, mollify_eval, Mollifier};

use crate::check::{CheckResult, Witness};
use crate::error::{Error, Result};

/// Declared behaviour of θ outside the sampling window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tail {
    /// θ ≤ 0 a.e. on the tail.
    Nonpositive,
    /// θ ≥ 0 a.e. on the tail.
    Nonnegative,
    /// |θ| ≤ B a.e. on the tail.
    Bounded(f64),
    /// The outermost piece's formula holds all the way to infinity.
    Formula,
    Undeclared,
}

impl fmt::Display for Tail {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tail::Nonpositive => write!(f, "nonpositive"),
            Tail::Nonnegative => write!(f, "nonnegative"),
            Tail::Bounded(b) => write!(f, "bounded({b})"),
            Tail::Formula => write!(f, "formula"),
            Tail::Undeclared => write!(f, "undeclared"),
        }
    }
}

impl std::str::FromStr for Tail {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let s = s.trim();
        match s {
            "nonpositive" => Ok(Tail::Nonpositive),
            "nonnegative" => Ok(Tail::Nonnegative),
            "formula" => Ok(Tail::Formula),
            "undeclared" => Ok(Tail::Undeclared),
            _ => {
                let inner = s
                    .strip_prefix("bounded(")
                    .and_then(|r| r.strip_suffix(')'))
                    .ok_or_else(|| format!("unknown tail declaration {s:?}"))?;
                let b: f64 = inner
                    .trim()
                    .parse()
                    .map_err(|e| format!("bad tail bound {inner:?}: {e}"))?;
                if !(b >= 0.0 && b.is_finite()) {
                    return Err("tail bound must be finite and nonnegative".into());
                }
                Ok(Tail::Bounded(b))
            }
        }
    }
}

/// One piece `θ(s) = expr(s) + offset` on `[start, end)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Piece {
    pub start: f64,
    pub end: f64,
    pub expr: Expr,
    pub offset: f64,
}

impl Piece {
    pub fn new(start: f64, end: f64, expr: Expr) -> Self {
        Self {
            start,
            end,
            expr,
            offset: 0.0,
        }
    }

    fn eval(&self, s: f64) -> f64 {
        self.expr.eval(s) + self.offset
    }

    fn range(&self, a: f64, b: f64, resolution: f64) -> (f64, f64) {
        let (lo, hi) = self.expr.ess_range(a, b, resolution);
        (lo + self.offset, hi + self.offset)
    }

    fn limit(&self, t: f64, side: Side) -> f64 {
        self.expr.limit(t, side) + self.offset
    }

    fn integral(&self, a: f64, b: f64) -> f64 {
        self.expr.integral(a, b) + self.offset * (b - a)
    }
}

/// A closed interval `[lo, hi]` of reals; `lo == hi` at continuity points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn contains(&self, x: f64, tol: f64) -> bool {
        self.lo - tol <= x && x <= self.hi + tol
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn hull(self, other: Interval) -> Interval {
        Interval::new(self.lo.min(other.lo), self.hi.max(other.hi))
    }
}

/// A locally bounded scalar law θ on ℝ.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryLaw {
    name: String,
    pieces: Vec<Piece>,
    window: f64,
    tail_left: Tail,
    tail_right: Tail,
    delta0: f64,
    resolution: f64,
}

impl BoundaryLaw {
    /// Validates and normalises the pieces so that they tile `[-window, window]`.
    pub fn new(
        name: impl Into<String>,
        pieces: Vec<Piece>,
        window: f64,
        tail_left: Tail,
        tail_right: Tail,
        delta0: f64,
        resolution: f64,
    ) -> Result<Self> {
        let name = name.into();
        if !(window > 0.0 && window.is_finite()) {
            return Err(Error::Domain(format!("window_W must be positive, got {window}")));
        }
        if !(resolution > 0.0 && resolution < window) {
            return Err(Error::Domain(format!(
                "resolution must lie in (0, window_W), got {resolution}"
            )));
        }
        if !(delta0 > 0.0 && delta0 <= window) {
            return Err(Error::Domain(format!(
                "delta0 must lie in (0, window_W = {window}], got {delta0}"
            )));
        }
        if pieces.is_empty() {
            return Err(Error::Domain("a law needs at least one piece".into()));
        }
        let mut pieces = pieces;
        for (i, p) in pieces.iter().enumerate() {
            p.expr
                .validate()
                .map_err(|e| Error::Domain(format!("piece {i}: {e}")))?;
            if !(p.start < p.end) || !p.offset.is_finite() {
                return Err(Error::Domain(format!(
                    "piece {i}: empty or malformed interval [{}, {})",
                    p.start, p.end
                )));
            }
        }
        for (i, w) in pieces.windows(2).enumerate() {
            if w[0].end != w[1].start {
                let kind = if w[0].end < w[1].start { "gap" } else { "overlap" };
                return Err(Error::Domain(format!(
                    "{kind} between piece {i} (ends {}) and piece {} (starts {})",
                    w[0].end,
                    i + 1,
                    w[1].start
                )));
            }
        }
        if pieces[0].start > -window || pieces.last().unwrap().end < window {
            return Err(Error::Domain(format!(
                "pieces cover [{}, {}] but the window is [-{window}, {window}]",
                pieces[0].start,
                pieces.last().unwrap().end
            )));
        }
        // drop pieces that lie entirely outside the window, clip the rest
        pieces.retain(|p| p.end > -window && p.start < window);
        pieces[0].start = -window;
        pieces.last_mut().unwrap().end = window;
        for (i, p) in pieces.iter().enumerate() {
            let (lo, hi) = p.range(p.start, p.end, resolution);
            if !lo.is_finite() || !hi.is_finite() {
                return Err(Error::Domain(format!(
                    "piece {i} is unbounded on [{}, {}]",
                    p.start, p.end
                )));
            }
        }
        Ok(Self {
            name,
            pieces,
            window,
            tail_left,
            tail_right,
            delta0,
            resolution,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn window(&self) -> f64 {
        self.window
    }

    pub fn tail_left(&self) -> Tail {
        self.tail_left
    }

    pub fn tail_right(&self) -> Tail {
        self.tail_right
    }

    pub fn delta0(&self) -> f64 {
        self.delta0
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn with_delta0(mut self, delta0: f64) -> Result<Self> {
        if !(delta0 > 0.0 && delta0 <= self.window) {
            return Err(Error::Domain(format!("delta0 must lie in (0, {}]", self.window)));
        }
        self.delta0 = delta0;
        Ok(self)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Interval on which θ is known pointwise.
    pub fn domain(&self) -> (f64, f64) {
        let lo = if self.tail_left == Tail::Formula {
            f64::NEG_INFINITY
        } else {
            -self.window
        };
        let hi = if self.tail_right == Tail::Formula {
            f64::INFINITY
        } else {
            self.window
        };
        (lo, hi)
    }

    fn outside(&self, s: f64) -> Error {
        Error::Inconclusive(format!(
            "law {:?}: argument {s} outside window [-{w}, {w}] and tail not given by formula",
            self.name,
            w = self.window
        ))
    }

    /// Index of the piece owning `s` (pieces own their left endpoint; `W` itself
    /// belongs to the last piece).
    fn piece_at(&self, s: f64) -> Option<usize> {
        let (lo, hi) = self.domain();
        if !(s >= lo && s <= hi) {
            return None;
        }
        if s < -self.window {
            return Some(0);
        }
        let idx = self.pieces.partition_point(|p| p.start <= s);
        Some(idx.saturating_sub(1))
    }

    /// Pointwise value θ(s).
    pub fn value(&self, s: f64) -> Result<f64> {
        let i = self.piece_at(s).ok_or_else(|| self.outside(s))?;
        Ok(self.pieces[i].eval(s))
    }

    /// One-sided limits `(θ(t-0), θ(t+0))`.
    pub fn one_sided_limits(&self, t: f64) -> Result<(f64, f64)> {
        let (lo, hi) = self.domain();
        if !(t >= lo && t <= hi) || (t == lo && lo.is_finite()) || (t == hi && hi.is_finite()) {
            return Err(self.outside(t));
        }
        // left limit: piece with start < t <= end; right: start <= t < end
        let right = self.piece_at(t).ok_or_else(|| self.outside(t))?;
        let left = if right > 0 && self.pieces[right].start == t {
            right - 1
        } else {
            right
        };
        Ok((
            self.pieces[left].limit(t, Side::Left),
            self.pieces[right].limit(t, Side::Right),
        ))
    }

    fn tail_range(&self, tail: Tail, piece: &Piece, a: f64, b: f64) -> Result<(f64, f64)> {
        match tail {
            Tail::Formula => Ok(piece.range(a, b, self.resolution)),
            Tail::Bounded(bound) => Ok((-bound, bound)),
            Tail::Nonpositive => Ok((f64::NEG_INFINITY, 0.0)),
            Tail::Nonnegative => Ok((0.0, f64::INFINITY)),
            Tail::Undeclared => Err(Error::Inconclusive(format!(
                "law {:?}: range over ({a}, {b}) needs a tail declaration",
                self.name
            ))),
        }
    }

    /// Essential infimum and supremum of θ over the open interval `(a, b)`.
    pub fn ess_range(&self, a: f64, b: f64) -> Result<Interval> {
        if !(a < b) {
            return Err(Error::Domain(format!("empty interval ({a}, {b})")));
        }
        let w = self.window;
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let mut absorb = |(l, h): (f64, f64)| {
            lo = lo.min(l);
            hi = hi.max(h);
        };
        if a < -w {
            absorb(self.tail_range(self.tail_left, &self.pieces[0], a, b.min(-w))?);
        }
        if b > w {
            let last = self.pieces.last().unwrap();
            absorb(self.tail_range(self.tail_right, last, a.max(w), b)?);
        }
        for p in &self.pieces {
            let (c, d) = (a.max(p.start), b.min(p.end));
            if c < d {
                absorb(p.range(c, d, self.resolution));
            }
        }
        Ok(Interval::new(lo, hi))
    }

    /// Jump locations of θ strictly inside the finite interval `(a, b)`.
    pub fn discontinuities(&self, a: f64, b: f64) -> Vec<f64> {
        let mut out = Vec::new();
        let n = self.pieces.len();
        for (i, p) in self.pieces.iter().enumerate() {
            if i > 0 && p.start > a && p.start < b {
                out.push(p.start);
            }
            let start = if i == 0 && self.tail_left == Tail::Formula {
                f64::NEG_INFINITY
            } else {
                p.start
            };
            let end = if i + 1 == n && self.tail_right == Tail::Formula {
                f64::INFINITY
            } else {
                p.end
            };
            let (c, d) = (a.max(start), b.min(end));
            if c < d {
                out.extend(p.expr.discontinuities(c, d, self.resolution));
            }
        }
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    /// Exact primitive `j(t) = ∫₀ᵗ θ(s) ds`.
    pub fn chang_potential(&self, t: f64) -> Result<f64> {
        if t == 0.0 {
            return Ok(0.0);
        }
        self.value(t)?;
        let (a, b, sign) = if t > 0.0 { (0.0, t, 1.0) } else { (t, 0.0, -1.0) };
        let mut cuts = vec![a];
        cuts.extend(
            self.pieces
                .iter()
                .map(|p| p.start)
                .filter(|&s| s > a && s < b),
        );
        cuts.push(b);
        let mut total = 0.0;
        for w in cuts.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            let i = self.piece_at(mid).ok_or_else(|| self.outside(mid))?;
            total += self.pieces[i].integral(w[0], w[1]);
        }
        Ok(sign * total)
    }

    /// Returns θ − α with tail declarations carried over where they survive
    /// the shift.
    pub fn alpha_shift(&self, alpha: f64) -> BoundaryLaw {
        let shift_tail = |tail: Tail| match tail {
            Tail::Formula | Tail::Undeclared => tail,
            Tail::Nonpositive if alpha >= 0.0 => Tail::Nonpositive,
            Tail::Nonnegative if alpha <= 0.0 => Tail::Nonnegative,
            Tail::Bounded(b) => Tail::Bounded(b + alpha.abs()),
            _ => Tail::Undeclared,
        };
        let mut out = self.clone();
        for p in &mut out.pieces {
            p.offset -= alpha;
        }
        out.tail_left = shift_tail(self.tail_left);
        out.tail_right = shift_tail(self.tail_right);
        if alpha != 0.0 {
            out.name = format!("{}-shift({alpha})", self.name);
        }
        out
    }

    /// `(ρ₁, ρ₂)` for the boundary-term lower bound: ρ₁ = δ₀ and ρ₂ the
    /// essential sup of |θ| on `[-δ₀-1, δ₀+1]`.
    pub fn rho_constants(&self) -> Result<(f64, f64)> {
        let r = self.delta0 + 1.0;
        let range = self.ess_range(-r, r)?;
        Ok((self.delta0, range.lo.abs().max(range.hi.abs())))
    }

    /// Grid search for the worst sample of `score` over `(a, b)`; used only to
    /// produce witnesses, never to decide a verdict.
    fn grid_witness<F: Fn(f64) -> f64>(&self, a: f64, b: f64, score: F) -> Option<(f64, f64)> {
        let mut best: Option<(f64, f64)> = None;
        let consider = |best: &mut Option<(f64, f64)>, s: f64| {
            if let Ok(v) = self.value(s) {
                let sc = score(v);
                if sc > 0.0 && best.is_none_or(|(_, b)| sc > score(b)) {
                    *best = Some((s, v));
                }
            }
        };
        let (fa, fb) = (a.max(-self.window), b.min(self.window));
        if fa < fb {
            let n = ((fb - fa) / self.resolution).ceil() as usize;
            for k in 1..n {
                consider(&mut best, fa + k as f64 * (fb - fa) / n as f64);
            }
        }
        if best.is_none() {
            // probe tails geometrically
            for k in 0..64 {
                let r = self.window * 2f64.powi(k);
                if -r > a && -r < b {
                    consider(&mut best, -r);
                }
                if r > a && r < b {
                    consider(&mut best, r);
                }
            }
        }
        best
    }
}

/// Sampled envelopes θ̲_ε, θ̄_ε of a law at fixed ε (ε = 0 gives θ̲, θ̄).
#[derive(Debug, Clone, Copy)]
pub struct EnvelopePair<'a> {
    law: &'a BoundaryLaw,
    epsilon: f64,
}

impl<'a> EnvelopePair<'a> {
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn resolution(&self) -> f64 {
        self.law.resolution
    }

    pub fn at(&self, t: f64) -> Result<Interval> {
        if !t.is_finite() {
            return Err(Error::Domain(format!("envelope query at {t}")));
        }
        if self.epsilon > 0.0 {
            return self.law.ess_range(t - self.epsilon, t + self.epsilon);
        }
        match self.law.one_sided_limits(t) {
            Ok((l, r)) => Ok(Interval::new(l.min(r), l.max(r))),
            Err(e) => {
                // outside the formula domain: fall back to the tail declaration
                let w = self.law.window;
                let tail = if t <= -w {
                    self.law.tail_left
                } else if t >= w {
                    self.law.tail_right
                } else {
                    return Err(e);
                };
                match tail {
                    Tail::Bounded(b) => Ok(Interval::new(-b, b)),
                    Tail::Nonpositive => Ok(Interval::new(f64::NEG_INFINITY, 0.0)),
                    Tail::Nonnegative => Ok(Interval::new(0.0, f64::INFINITY)),
                    _ => Err(e),
                }
            }
        }
    }

    pub fn lower(&self, t: f64) -> Result<f64> {
        self.at(t).map(|i| i.lo)
    }

    pub fn upper(&self, t: f64) -> Result<f64> {
        self.at(t).map(|i| i.hi)
    }
}

/// Envelope pair of `law` at scale `epsilon ≥ 0`.
pub fn eval_envelope(law: &BoundaryLaw, epsilon: f64) -> Result<EnvelopePair<'_>> {
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(Error::Domain(format!("epsilon must be >= 0, got {epsilon}")));
    }
    Ok(EnvelopePair { law, epsilon })
}

/// θ̂(t) = [θ̲(t), θ̄(t)].
pub fn multivalued_value(law: &BoundaryLaw, t: f64) -> Result<Interval> {
    eval_envelope(law, 0.0)?.at(t)
}

pub fn chang_potential(law: &BoundaryLaw, t: f64) -> Result<f64> {
    law.chang_potential(t)
}

pub fn alpha_shift(law: &BoundaryLaw, alpha: f64) -> BoundaryLaw {
    law.alpha_shift(alpha)
}

/// `θ̲(ξ) - tol ≤ κ ≤ θ̄(ξ) + tol`.
pub fn inclusion_test(law: &BoundaryLaw, xi: f64, kappa: f64, tol: f64) -> Result<bool> {
    Ok(multivalued_value(law, xi)?.contains(kappa, tol))
}

/// Tail-sign condition: ess sup θ on (-∞, -δ₀) ≤ 0 ≤ ess inf θ on (δ₀, ∞).
pub fn rauch_check(law: &BoundaryLaw) -> CheckResult {
    let d0 = law.delta0;
    let w = law.window;

    // window part first: a sampled violation is decisive whatever the tails say
    let left = law.ess_range(-w, -d0).map(|r| r.hi);
    let right = law.ess_range(d0, w).map(|r| r.lo);
    if let Ok(sup_left) = left {
        if sup_left > 0.0 {
            let (s, v) = law
                .grid_witness(-w, -d0, |v| v)
                .unwrap_or((-0.5 * (w + d0), sup_left));
            return CheckResult::Violated(Witness {
                point: vec![s],
                lhs: v,
                rhs: 0.0,
                note: format!("theta > 0 on (-inf, -delta0) with delta0 = {d0}"),
            });
        }
    }
    if let Ok(inf_right) = right {
        if inf_right < 0.0 {
            let (s, v) = law
                .grid_witness(d0, w, |v| -v)
                .unwrap_or((0.5 * (w + d0), inf_right));
            return CheckResult::Violated(Witness {
                point: vec![s],
                lhs: 0.0,
                rhs: v,
                note: format!("theta < 0 on (delta0, inf) with delta0 = {d0}"),
            });
        }
    }

    let tail_verdict = |tail: Tail, wanted: Tail, a: f64, b: f64, left_side: bool| -> CheckResult {
        match tail {
            t if t == wanted => CheckResult::Satisfied,
            Tail::Formula => {
                let r = law.ess_range(a, b);
                match r {
                    Ok(r) if left_side && r.hi > 0.0 => {
                        let (s, v) = law.grid_witness(a, b, |v| v).unwrap_or((a, r.hi));
                        CheckResult::Violated(Witness {
                            point: vec![s],
                            lhs: v,
                            rhs: 0.0,
                            note: "left tail formula takes positive values".into(),
                        })
                    }
                    Ok(r) if !left_side && r.lo < 0.0 => {
                        let (s, v) = law.grid_witness(a, b, |v| -v).unwrap_or((b, r.lo));
                        CheckResult::Violated(Witness {
                            point: vec![s],
                            lhs: 0.0,
                            rhs: v,
                            note: "right tail formula takes negative values".into(),
                        })
                    }
                    Ok(_) => CheckResult::Satisfied,
                    Err(e) => CheckResult::Inconclusive(e.to_string()),
                }
            }
            other => CheckResult::Inconclusive(format!(
                "tail declared {other}, which does not determine the sign required ({wanted})"
            )),
        }
    };

    let lv = tail_verdict(law.tail_left, Tail::Nonpositive, f64::NEG_INFINITY, -w, true);
    if !lv.is_satisfied() {
        return lv;
    }
    tail_verdict(law.tail_right, Tail::Nonnegative, w, f64::INFINITY, false)
}
