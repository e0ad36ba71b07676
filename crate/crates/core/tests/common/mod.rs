//! Oracles written independently of the library: closed-form basis fields,
//! composite 5-point Gauss-Legendre quadrature and dense-sampling envelopes.
#![allow(dead_code)]

use std::f64::consts::PI;

const GL5_X: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683_1,
    0.0,
    0.538_469_310_105_683_1,
    0.906_179_845_938_664,
];
const GL5_W: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

/// Nodes and weights of composite GL5 on `[a, b]` with `panels` panels.
pub fn composite_rule(a: f64, b: f64, panels: usize) -> Vec<(f64, f64)> {
    let h = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(5 * panels);
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        for (x, w) in GL5_X.iter().zip(GL5_W) {
            out.push((mid + 0.5 * h * x, 0.5 * h * w));
        }
    }
    out
}

pub fn integrate_1d(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    composite_rule(a, b, panels).into_iter().map(|(x, w)| w * f(x)).sum()
}

/// Modes `(k, l)`, `1 ≤ k, l ≤ n`, lexicographic.
pub fn modes(n: usize) -> Vec<(usize, usize)> {
    (1..=n).flat_map(|k| (1..=n).map(move |l| (k, l))).collect()
}

/// `u = (∂_y ψ, -∂_x ψ)` for `ψ = cos(kπx) cos(lπy)`.
pub fn velocity(k: usize, l: usize, x: f64, y: f64) -> [f64; 2] {
    let (a, b) = (k as f64 * PI, l as f64 * PI);
    [-b * (a * x).cos() * (b * y).sin(), a * (a * x).sin() * (b * y).cos()]
}

/// `∂_x u₂ - ∂_y u₁`.
pub fn rot(k: usize, l: usize, x: f64, y: f64) -> f64 {
    let (a, b) = (k as f64 * PI, l as f64 * PI);
    (a * a + b * b) * (a * x).cos() * (b * y).cos()
}

pub fn sign(s: f64) -> f64 {
    if s < 0.0 {
        -1.0
    } else {
        1.0
    }
}

pub fn step(s: f64) -> f64 {
    if s < 0.0 {
        0.0
    } else {
        1.0
    }
}

pub fn floor_cube(s: f64) -> f64 {
    if s.abs() < 1.0 {
        -s
    } else {
        (s * s * s).floor()
    }
}

/// Breakpoints where a closed-form law switches formula.
pub fn breakpoints(name: &str) -> &'static [f64] {
    match name {
        "remark-floor-cube" => &[-1.0, 1.0],
        _ => &[0.0],
    }
}

pub fn closed_form(name: &str) -> fn(f64) -> f64 {
    match name {
        "sign" => sign,
        "step" => step,
        "remark-floor-cube" => floor_cube,
        other => panic!("no oracle for {other}"),
    }
}

/// `(min, max)` of θ on `[t-ε, t+ε]` from samples every `h`, both window ends
/// (nudged inward) and both sides of every breakpoint inside the window.
/// With `ε = 0`, the one-sided values at `t ± 1e-9`.
pub fn sampled_envelope(theta: fn(f64) -> f64, breaks: &[f64], t: f64, eps: f64, h: f64) -> (f64, f64) {
    let mut pts = Vec::new();
    if eps == 0.0 {
        pts.extend([t - 1e-9, t + 1e-9]);
    } else {
        let (a, b) = (t - eps, t + eps);
        let n = ((b - a) / h).ceil() as usize;
        pts.extend((0..=n).map(|i| (a + i as f64 * h).min(b)));
        pts.extend([a + 1e-12, b - 1e-12]);
        for &c in breaks {
            if c > a && c < b {
                pts.extend([c - 1e-12, c + 1e-12]);
            }
        }
    }
    pts.iter()
        .map(|&s| theta(s))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

/// Oracle mass and stiffness on `n × n` modes from tensor GL5 quadrature.
pub fn mass_stiffness(n: usize, nu: f64, panels: usize) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let ms = modes(n);
    let rule = composite_rule(0.0, 1.0, panels);
    let m = ms.len();
    let mut mass = vec![vec![0.0; m]; m];
    let mut stiff = vec![vec![0.0; m]; m];
    for &(x, wx) in &rule {
        for &(y, wy) in &rule {
            let w = wx * wy;
            let us: Vec<[f64; 2]> = ms.iter().map(|&(k, l)| velocity(k, l, x, y)).collect();
            let rs: Vec<f64> = ms.iter().map(|&(k, l)| rot(k, l, x, y)).collect();
            for i in 0..m {
                for j in 0..m {
                    mass[i][j] += w * (us[i][0] * us[j][0] + us[i][1] * us[j][1]);
                    stiff[i][j] += w * nu * rs[i] * rs[j];
                }
            }
        }
    }
    (mass, stiff)
}
