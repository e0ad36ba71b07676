//! Stream-function Galerkin basis on the unit square and assembled operators.
//!
//! Modes are `ψ_kl = cos(kπx)cos(lπy)` with velocity `u = (∂_y ψ, -∂_x ψ)`.
//! These fields are divergence free and have zero tangential trace on all
//! four edges, while the normal trace stays free.

use std::f64::consts::PI;
use std::fmt::Write as _;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Mode {
    pub k: usize,
    pub l: usize,
}

impl Mode {
    /// Eigenvalue of `-Δ` on `ψ`, i.e. `rot z = λ ψ`.
    pub fn lambda(self) -> f64 {
        ((self.k * self.k + self.l * self.l) as f64) * PI * PI
    }

    pub fn psi(self, x: f64, y: f64) -> f64 {
        (self.k as f64 * PI * x).cos() * (self.l as f64 * PI * y).cos()
    }

    pub fn velocity(self, x: f64, y: f64) -> [f64; 2] {
        let (kp, lp) = (self.k as f64 * PI, self.l as f64 * PI);
        [
            -lp * (kp * x).cos() * (lp * y).sin(),
            kp * (kp * x).sin() * (lp * y).cos(),
        ]
    }

    pub fn rot(self, x: f64, y: f64) -> f64 {
        self.lambda() * self.psi(x, y)
    }

    /// `(∂_x u₁, ∂_y u₂)`; their sum is the divergence.
    pub fn divergence_parts(self, x: f64, y: f64) -> (f64, f64) {
        let (kp, lp) = (self.k as f64 * PI, self.l as f64 * PI);
        let s = (kp * x).sin() * (lp * y).sin();
        (kp * lp * s, -kp * lp * s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamBasis {
    m_per_axis: usize,
    modes: Vec<Mode>,
}

/// Modes `(k, l)`, `1 ≤ k, l ≤ m_per_axis`, in lexicographic order.
pub fn build_basis(m_per_axis: usize) -> Result<StreamBasis> {
    if m_per_axis == 0 {
        return Err(Error::Domain("m_per_axis must be at least 1".into()));
    }
    let modes = (1..=m_per_axis)
        .flat_map(|k| (1..=m_per_axis).map(move |l| Mode { k, l }))
        .collect();
    Ok(StreamBasis { m_per_axis, modes })
}

impl StreamBasis {
    pub fn m_per_axis(&self) -> usize {
        self.m_per_axis
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn index_of(&self, mode: Mode) -> Option<usize> {
        let n = self.m_per_axis;
        (mode.k >= 1 && mode.l >= 1 && mode.k <= n && mode.l <= n)
            .then(|| (mode.k - 1) * n + (mode.l - 1))
    }

    pub fn check_len(&self, got: usize) -> Result<()> {
        if got != self.len() {
            return Err(Error::Shape { expected: self.len(), got });
        }
        Ok(())
    }
}

/// `u(p) = Σ c_k z_k(p)`.
pub fn eval_velocity(basis: &StreamBasis, coeffs: &[f64], point: [f64; 2]) -> Result<[f64; 2]> {
    basis.check_len(coeffs.len())?;
    let mut u = [0.0; 2];
    for (mode, c) in basis.modes.iter().zip(coeffs) {
        let z = mode.velocity(point[0], point[1]);
        u[0] += c * z[0];
        u[1] += c * z[1];
    }
    Ok(u)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Edge {
    Bottom,
    Right,
    Top,
    Left,
}

impl Edge {
    /// Counterclockwise from the origin.
    pub const ALL: [Edge; 4] = [Edge::Bottom, Edge::Right, Edge::Top, Edge::Left];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Edge::Bottom => "bottom",
            Edge::Right => "right",
            Edge::Top => "top",
            Edge::Left => "left",
        }
    }

    pub fn normal(self) -> [f64; 2] {
        match self {
            Edge::Bottom => [0.0, -1.0],
            Edge::Right => [1.0, 0.0],
            Edge::Top => [0.0, 1.0],
            Edge::Left => [-1.0, 0.0],
        }
    }

    /// Point at local arc length `s ∈ [0, 1]`.
    pub fn point(self, s: f64) -> [f64; 2] {
        match self {
            Edge::Bottom => [s, 0.0],
            Edge::Right => [1.0, s],
            Edge::Top => [1.0 - s, 1.0],
            Edge::Left => [0.0, 1.0 - s],
        }
    }

    pub fn arc_offset(self) -> f64 {
        self.index() as f64
    }
}

impl std::str::FromStr for Edge {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Edge::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::Parse {
                source_name: "edge".into(),
                message: format!("unknown edge {s:?}"),
            })
    }
}

/// The unit square with its four edges.
#[derive(Debug, Clone, Copy, Default)]
pub struct Domain2D;

impl Domain2D {
    pub fn area(self) -> f64 {
        1.0
    }

    /// σ(∂Ω).
    pub fn perimeter(self) -> f64 {
        4.0
    }

    pub fn edges(self) -> [Edge; 4] {
        Edge::ALL
    }

    /// Gauss nodes of the given order on every edge, in boundary order.
    pub fn edge_nodes(self, order: usize) -> Vec<EdgeNode> {
        let rule = GaussLegendre::new(order);
        Edge::ALL
            .into_iter()
            .flat_map(|edge| {
                rule.mapped(0.0, 1.0)
                    .map(move |(s, weight)| EdgeNode {
                        edge,
                        s_local: s,
                        arc: edge.arc_offset() + s,
                        point: edge.point(s),
                        weight,
                    })
                    .collect::<Vec<_>>()
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeNode {
    pub edge: Edge,
    pub s_local: f64,
    /// Arc length along ∂Ω in `[0, 4)`.
    pub arc: f64,
    pub point: [f64; 2],
    pub weight: f64,
}

pub fn min_quad_order(m_per_axis: usize) -> usize {
    2 * m_per_axis + 2
}

pub fn default_quad_order(m_per_axis: usize) -> usize {
    4 * m_per_axis + 16
}

#[derive(Debug, Clone)]
pub struct AssembledSystem {
    pub basis: StreamBasis,
    pub nu: f64,
    pub quad_order: usize,
    pub mass: DMatrix<f64>,
    pub stiffness: DMatrix<f64>,
    /// `T_kji = b(z_k, z_j, z_i)` stored at `(k·m + j)·m + i`.
    pub trilinear: Vec<f64>,
    pub nodes: Vec<EdgeNode>,
    /// `trace[(q, i)] = z_{i,N}` at edge node `q`.
    pub trace: DMatrix<f64>,
}

/// 1D integrals over `[0,1]` of products of `cos/sin(nπx)` with index in
/// `1..=n`, by Gauss quadrature.
struct Tables {
    n: usize,
    rule: Vec<(f64, f64)>,
}

impl Tables {
    fn trig(&self, sin: bool, k: usize, x: f64) -> f64 {
        let a = k as f64 * PI * x;
        if sin {
            a.sin()
        } else {
            a.cos()
        }
    }

    fn pair(&self, sa: bool, a: usize, sb: bool, b: usize) -> f64 {
        self.rule
            .iter()
            .map(|&(x, w)| w * self.trig(sa, a, x) * self.trig(sb, b, x))
            .sum()
    }

    /// Flat table of triple integrals over index triples.
    fn triple(&self, s: [bool; 3]) -> Vec<f64> {
        let n = self.n;
        let mut out = vec![0.0; n * n * n];
        for a in 1..=n {
            for b in 1..=n {
                for c in 1..=n {
                    out[((a - 1) * n + (b - 1)) * n + (c - 1)] = self
                        .rule
                        .iter()
                        .map(|&(x, w)| {
                            w * self.trig(s[0], a, x) * self.trig(s[1], b, x) * self.trig(s[2], c, x)
                        })
                        .sum();
                }
            }
        }
        out
    }
}

/// Mass, stiffness, trilinear tensor and edge trace data.
pub fn assemble(basis: &StreamBasis, nu: f64, quad_order: usize) -> Result<AssembledSystem> {
    if !(nu > 0.0 && nu.is_finite()) {
        return Err(Error::Domain(format!("viscosity must be positive, got {nu}")));
    }
    let min = min_quad_order(basis.m_per_axis);
    if quad_order < min {
        return Err(Error::Config(format!(
            "quad_order {quad_order} too low for m_per_axis = {}; minimum is {min}",
            basis.m_per_axis
        )));
    }
    let rule = GaussLegendre::new(quad_order);
    let tables = Tables {
        n: basis.m_per_axis,
        rule: rule.mapped(0.0, 1.0).collect(),
    };
    let m = basis.len();
    let modes = &basis.modes;

    let mut mass = DMatrix::zeros(m, m);
    let mut stiffness = DMatrix::zeros(m, m);
    for (i, a) in modes.iter().enumerate() {
        for (k, b) in modes.iter().enumerate() {
            let cc_x = tables.pair(false, a.k, false, b.k);
            let cc_y = tables.pair(false, a.l, false, b.l);
            let ss_x = tables.pair(true, a.k, true, b.k);
            let ss_y = tables.pair(true, a.l, true, b.l);
            let (ak, al, bk, bl) = (a.k as f64, a.l as f64, b.k as f64, b.l as f64);
            mass[(i, k)] = PI * PI * (al * bl * cc_x * ss_y + ak * bk * ss_x * cc_y);
            stiffness[(i, k)] = nu * a.lambda() * b.lambda() * cc_x * cc_y;
        }
    }

    // a(k, j, i) = ∫ rot z_k · z_{j,1} · z_{i,2}; T_kji = a(k,j,i) - a(k,i,j)
    let n = basis.m_per_axis;
    let idx = |a: usize, b: usize, c: usize| ((a - 1) * n + (b - 1)) * n + (c - 1);
    let x_ccs = tables.triple([false, false, true]);
    let y_csc = tables.triple([false, true, false]);
    let mut a_tensor = vec![0.0; m * m * m];
    for (k, zk) in modes.iter().enumerate() {
        for (j, zj) in modes.iter().enumerate() {
            for (i, zi) in modes.iter().enumerate() {
                let coef = -zk.lambda() * (zj.l as f64) * (zi.k as f64) * PI * PI;
                a_tensor[(k * m + j) * m + i] =
                    coef * x_ccs[idx(zk.k, zj.k, zi.k)] * y_csc[idx(zk.l, zj.l, zi.l)];
            }
        }
    }
    let mut trilinear = vec![0.0; m * m * m];
    for k in 0..m {
        for j in 0..m {
            for i in 0..m {
                trilinear[(k * m + j) * m + i] =
                    a_tensor[(k * m + j) * m + i] - a_tensor[(k * m + i) * m + j];
            }
        }
    }

    let nodes = Domain2D.edge_nodes(quad_order);
    let trace = DMatrix::from_fn(nodes.len(), m, |q, i| {
        let node = &nodes[q];
        let u = modes[i].velocity(node.point[0], node.point[1]);
        let n = node.edge.normal();
        u[0] * n[0] + u[1] * n[1]
    });

    Ok(AssembledSystem {
        basis: basis.clone(),
        nu,
        quad_order,
        mass,
        stiffness,
        trilinear,
        nodes,
        trace,
    })
}

impl AssembledSystem {
    pub fn m(&self) -> usize {
        self.basis.len()
    }

    pub fn t(&self, k: usize, j: usize, i: usize) -> f64 {
        let m = self.m();
        self.trilinear[(k * m + j) * m + i]
    }

    /// `Σ T_kji u_k v_j w_i`.
    pub fn trilinear_form(&self, u: &[f64], v: &[f64], w: &[f64]) -> f64 {
        let m = self.m();
        let mut total = 0.0;
        for k in 0..m {
            for j in 0..m {
                let row = &self.trilinear[(k * m + j) * m..(k * m + j + 1) * m];
                let ukvj = u[k] * v[j];
                total += ukvj * row.iter().zip(w).map(|(t, wi)| t * wi).sum::<f64>();
            }
        }
        total
    }

    /// `T[c, c]_i = Σ_{k,j} T_kji c_k c_j`.
    pub fn convection(&self, c: &[f64]) -> DVector<f64> {
        let m = self.m();
        let mut out = DVector::zeros(m);
        for k in 0..m {
            for j in 0..m {
                let ckj = c[k] * c[j];
                if ckj == 0.0 {
                    continue;
                }
                let row = &self.trilinear[(k * m + j) * m..(k * m + j + 1) * m];
                for (o, t) in out.iter_mut().zip(row) {
                    *o += ckj * t;
                }
            }
        }
        out
    }

    /// `u_N` at every edge node.
    pub fn normal_trace(&self, c: &[f64]) -> Vec<f64> {
        (&self.trace * DVector::from_column_slice(c)).as_slice().to_vec()
    }

    /// `G_i = Σ_q w_q g_q z_{i,N}(q)`.
    pub fn boundary_load(&self, values: &[f64]) -> DVector<f64> {
        let weighted = DVector::from_iterator(
            self.nodes.len(),
            self.nodes.iter().zip(values).map(|(n, g)| n.weight * g),
        );
        self.trace.tr_mul(&weighted)
    }

    /// `|u|²_H = cᵀ M c`.
    pub fn h_norm_sq(&self, c: &[f64]) -> f64 {
        quad_form(&self.mass, c)
    }

    /// `‖u‖²_V = cᵀ A c / ν`.
    pub fn v_norm_sq(&self, c: &[f64]) -> f64 {
        quad_form(&self.stiffness, c) / self.nu
    }

    /// Structured text dump, row-major, 17 significant digits.
    pub fn export_text(&self) -> String {
        let m = self.m();
        let mut s = String::new();
        let _ = writeln!(s, "m_per_axis = {}", self.basis.m_per_axis);
        let _ = writeln!(s, "m = {m}");
        let _ = writeln!(s, "nu = {:.16e}", self.nu);
        let _ = writeln!(s, "quad_order = {}", self.quad_order);
        let write_matrix = |s: &mut String, name: &str, a: &DMatrix<f64>| {
            let _ = writeln!(s, "[{name}]");
            for i in 0..a.nrows() {
                let row: Vec<String> = (0..a.ncols()).map(|k| format!("{:.16e}", a[(i, k)])).collect();
                let _ = writeln!(s, "{}", row.join(" "));
            }
        };
        write_matrix(&mut s, "mass", &self.mass);
        write_matrix(&mut s, "stiffness", &self.stiffness);
        let _ = writeln!(s, "[trilinear]");
        for k in 0..m {
            for j in 0..m {
                let row: Vec<String> = (0..m).map(|i| format!("{:.16e}", self.t(k, j, i))).collect();
                let _ = writeln!(s, "{}", row.join(" "));
            }
        }
        let _ = writeln!(s, "[trace]");
        for (q, node) in self.nodes.iter().enumerate() {
            let vals: Vec<String> = (0..m).map(|i| format!("{:.16e}", self.trace[(q, i)])).collect();
            let _ = writeln!(
                s,
                "{} {:.16e} {:.16e} {}",
                node.edge.name(),
                node.s_local,
                node.weight,
                vals.join(" ")
            );
        }
        s
    }
}

pub(crate) fn quad_form(a: &DMatrix<f64>, c: &[f64]) -> f64 {
    let v = DVector::from_column_slice(c);
    v.dot(&(a * &v))
}

/// A velocity field on the closed square.
pub trait VelocityField {
    fn velocity(&self, x: f64, y: f64) -> [f64; 2];
}

impl<F: Fn(f64, f64) -> [f64; 2]> VelocityField for F {
    fn velocity(&self, x: f64, y: f64) -> [f64; 2] {
        self(x, y)
    }
}

/// Velocity samples on a uniform `(nx+1) × (ny+1)` grid, bilinear in between.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    nx: usize,
    ny: usize,
    /// `values[j * (nx + 1) + i]` at `(i/nx, j/ny)`.
    values: Vec<[f64; 2]>,
}

impl GridField {
    pub fn new(nx: usize, ny: usize, values: Vec<[f64; 2]>) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::Domain("grid needs at least one cell per axis".into()));
        }
        if values.len() != (nx + 1) * (ny + 1) {
            return Err(Error::Shape {
                expected: (nx + 1) * (ny + 1),
                got: values.len(),
            });
        }
        if values.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("grid field has non-finite samples".into()));
        }
        Ok(GridField { nx, ny, values })
    }

    pub fn sample<F: VelocityField>(field: &F, nx: usize, ny: usize) -> Result<Self> {
        let values = (0..=ny)
            .flat_map(|j| (0..=nx).map(move |i| (i, j)))
            .map(|(i, j)| field.velocity(i as f64 / nx as f64, j as f64 / ny as f64))
            .collect();
        GridField::new(nx, ny, values)
    }
}

impl VelocityField for GridField {
    fn velocity(&self, x: f64, y: f64) -> [f64; 2] {
        let fx = (x.clamp(0.0, 1.0) * self.nx as f64).min(self.nx as f64 - 1e-12);
        let fy = (y.clamp(0.0, 1.0) * self.ny as f64).min(self.ny as f64 - 1e-12);
        let (i, j) = (fx.floor() as usize, fy.floor() as usize);
        let (tx, ty) = (fx - i as f64, fy - j as f64);
        let at = |i: usize, j: usize| self.values[j * (self.nx + 1) + i];
        let mut out = [0.0; 2];
        for (d, o) in out.iter_mut().enumerate() {
            *o = (1.0 - tx) * (1.0 - ty) * at(i, j)[d]
                + tx * (1.0 - ty) * at(i + 1, j)[d]
                + (1.0 - tx) * ty * at(i, j + 1)[d]
                + tx * ty * at(i + 1, j + 1)[d];
        }
        out
    }
}

/// L² projection of `u0` onto the span of the basis.
pub fn project_initial<F: VelocityField + ?Sized>(system: &AssembledSystem, u0: &F) -> Result<DVector<f64>> {
    let rule = GaussLegendre::new(system.quad_order);
    let pts: Vec<(f64, f64)> = rule.mapped(0.0, 1.0).collect();
    let modes = system.basis.modes();
    let mut rhs = DVector::zeros(modes.len());
    for &(x, wx) in &pts {
        for &(y, wy) in &pts {
            let u = u0.velocity(x, y);
            for (i, mode) in modes.iter().enumerate() {
                let z = mode.velocity(x, y);
                rhs[i] += wx * wy * (u[0] * z[0] + u[1] * z[1]);
            }
        }
    }
    let chol = Cholesky::<f64, Dyn>::new(system.mass.clone())
        .ok_or_else(|| Error::Numeric("mass matrix is not positive definite".into()))?;
    Ok(chol.solve(&rhs))
}

/// Initial data as a coefficient list or as amplitudes on named modes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum InitialData {
    Zero,
    Coefficients(Vec<f64>),
    /// `(k, l, amplitude)`; modes outside the basis project to zero.
    Modal(Vec<(usize, usize, f64)>),
}

impl InitialData {
    pub fn coefficients(&self, basis: &StreamBasis) -> Result<Vec<f64>> {
        let mut c = vec![0.0; basis.len()];
        match self {
            InitialData::Zero => {}
            InitialData::Coefficients(v) => {
                basis.check_len(v.len())?;
                c.copy_from_slice(v);
            }
            InitialData::Modal(terms) => {
                for &(k, l, amp) in terms {
                    if let Some(i) = basis.index_of(Mode { k, l }) {
                        c[i] += amp;
                    }
                }
            }
        }
        if c.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("initial coefficients must be finite".into()));
        }
        Ok(c)
    }
}

/// Scalar time profile multiplying a forcing amplitude.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TimeProfile {
    Constant,
    /// `sin(ω t + φ)`.
    Sine { omega: f64, phase: f64 },
    /// Linear interpolation through `(times, values)`, constant beyond the ends.
    Samples { times: Vec<f64>, values: Vec<f64> },
    /// `values[j]` on `[j·step, (j+1)·step)`; the last value holds afterwards.
    Steps { step: f64, values: Vec<f64> },
}

impl TimeProfile {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            TimeProfile::Constant => 1.0,
            TimeProfile::Sine { omega, phase } => (omega * t + phase).sin(),
            TimeProfile::Samples { times, values } => {
                let i = times.partition_point(|&s| s <= t);
                if i == 0 {
                    values[0]
                } else if i == times.len() {
                    values[i - 1]
                } else {
                    let (t0, t1) = (times[i - 1], times[i]);
                    let r = (t - t0) / (t1 - t0);
                    values[i - 1] + r * (values[i] - values[i - 1])
                }
            }
            TimeProfile::Steps { step, values } => {
                // small slack so grid times t_n = n·dt land in the right slot
                let j = ((t / step) * (1.0 + 1e-12) + 1e-12).floor().max(0.0) as usize;
                values[j.min(values.len() - 1)]
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            TimeProfile::Constant => Ok(()),
            TimeProfile::Sine { omega, phase } => {
                if omega.is_finite() && phase.is_finite() {
                    Ok(())
                } else {
                    Err(Error::Config("sine profile needs finite omega and phase".into()))
                }
            }
            TimeProfile::Samples { times, values } => {
                if times.is_empty() || times.len() != values.len() {
                    return Err(Error::Config(
                        "sampled profile needs equally many (nonzero) times and values".into(),
                    ));
                }
                if times.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(Error::Config("sample times must increase strictly".into()));
                }
                if times.iter().chain(values).any(|v| !v.is_finite()) {
                    return Err(Error::Config("sampled profile must be finite".into()));
                }
                Ok(())
            }
            TimeProfile::Steps { step, values } => {
                if !(*step > 0.0) || values.is_empty() || values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Config("step profile needs step > 0 and finite values".into()));
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ForcingTarget {
    /// Coefficient `⟨f, z⟩` for this mode; ignored when outside the basis.
    Mode(Mode),
    /// Basis index.
    Index(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForcingTerm {
    pub target: ForcingTarget,
    pub amplitude: f64,
    pub profile: TimeProfile,
}

/// Coefficient functions `t ↦ f_i(t) = ⟨f(t), z_i⟩` as a sum of terms.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ForcingSpec {
    pub terms: Vec<ForcingTerm>,
}

impl ForcingSpec {
    pub fn zero() -> Self {
        ForcingSpec::default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.amplitude == 0.0)
    }

    pub fn with_term(mut self, target: ForcingTarget, amplitude: f64, profile: TimeProfile) -> Self {
        self.terms.push(ForcingTerm {
            target,
            amplitude,
            profile,
        });
        self
    }

    pub fn validate(&self, basis: &StreamBasis) -> Result<()> {
        for term in &self.terms {
            if !term.amplitude.is_finite() {
                return Err(Error::Config("forcing amplitude must be finite".into()));
            }
            if let ForcingTarget::Index(i) = term.target {
                if i >= basis.len() {
                    return Err(Error::Shape {
                        expected: basis.len(),
                        got: i + 1,
                    });
                }
            }
            term.profile.validate()?;
        }
        Ok(())
    }

    /// Coefficient vector at time `t`.
    pub fn eval(&self, basis: &StreamBasis, t: f64) -> DVector<f64> {
        let mut f = DVector::zeros(basis.len());
        self.add_to(basis, t, &mut f);
        f
    }

    pub fn add_to(&self, basis: &StreamBasis, t: f64, f: &mut DVector<f64>) {
        for term in &self.terms {
            let i = match term.target {
                ForcingTarget::Index(i) => Some(i),
                ForcingTarget::Mode(mode) => basis.index_of(mode),
            };
            if let Some(i) = i {
                f[i] += term.amplitude * term.profile.eval(t);
            }
        }
    }

    /// Sum of two specs.
    pub fn plus(&self, other: &ForcingSpec) -> ForcingSpec {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        ForcingSpec { terms }
    }

    pub fn scaled(&self, factor: f64) -> ForcingSpec {
        ForcingSpec {
            terms: self
                .terms
                .iter()
                .map(|t| ForcingTerm {
                    amplitude: t.amplitude * factor,
                    ..t.clone()
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_ordering() {
        assert!(build_basis(0).is_err());
        let b = build_basis(1).unwrap();
        assert_eq!(b.modes(), &[Mode { k: 1, l: 1 }]);
        let b = build_basis(2).unwrap();
        let got: Vec<_> = b.modes().iter().map(|m| (m.k, m.l)).collect();
        assert_eq!(got, vec![(1, 1), (1, 2), (2, 1), (2, 2)]);
        for (i, &mode) in b.modes().iter().enumerate() {
            assert_eq!(b.index_of(mode), Some(i));
        }
    }

    #[test]
    fn tangential_trace_vanishes() {
        let b = build_basis(4).unwrap();
        for node in Domain2D.edge_nodes(16) {
            let n = node.edge.normal();
            for mode in b.modes() {
                let u = mode.velocity(node.point[0], node.point[1]);
                let tangential = -u[0] * n[1] + u[1] * n[0];
                assert!(tangential.abs() <= 1e-12, "{mode:?} {node:?}");
            }
        }
    }

    #[test]
    fn point_values() {
        let b = build_basis(1).unwrap();
        let u = eval_velocity(&b, &[1.0], [0.0, 0.5]).unwrap();
        assert!((u[0] + PI).abs() < 1e-14 && u[1].abs() < 1e-14);
        assert_eq!(eval_velocity(&b, &[0.0], [0.3, 0.2]).unwrap(), [0.0, 0.0]);
        assert!(matches!(
            eval_velocity(&b, &[1.0, 2.0], [0.0, 0.0]),
            Err(Error::Shape { expected: 1, got: 2 })
        ));
    }

    #[test]
    fn single_mode_entries() {
        let b = build_basis(1).unwrap();
        let s = assemble(&b, 1.0, default_quad_order(1)).unwrap();
        assert!((s.stiffness[(0, 0)] - PI.powi(4)).abs() < 1e-10);
        assert!((s.mass[(0, 0)] - PI * PI / 2.0).abs() < 1e-12);
        assert_eq!(s.t(0, 0, 0), 0.0);
    }

    #[test]
    fn quad_order_floor() {
        let b = build_basis(3).unwrap();
        let err = assemble(&b, 1.0, 7).unwrap_err();
        assert!(err.to_string().contains("minimum is 8"), "{err}");
        assert!(assemble(&b, 0.0, 20).is_err());
    }

    #[test]
    fn diagonal_and_skew() {
        let b = build_basis(3).unwrap();
        let s = assemble(&b, 0.5, default_quad_order(3)).unwrap();
        let m = s.m();
        for i in 0..m {
            for k in 0..m {
                if i != k {
                    assert!(s.mass[(i, k)].abs() <= 1e-10);
                    assert!(s.stiffness[(i, k)].abs() <= 1e-10);
                }
                for j in 0..m {
                    assert_eq!(s.t(k, j, i), -s.t(k, i, j));
                }
            }
        }
        let mode = b.modes()[5];
        let expected = 0.5 * mode.lambda().powi(2) / 4.0;
        assert!((s.stiffness[(5, 5)] - expected).abs() < 1e-9 * expected);
    }

    #[test]
    fn trace_integrates_to_zero() {
        let b = build_basis(3).unwrap();
        let s = assemble(&b, 1.0, default_quad_order(3)).unwrap();
        for i in 0..s.m() {
            let total: f64 = s.nodes.iter().enumerate().map(|(q, n)| n.weight * s.trace[(q, i)]).sum();
            assert!(total.abs() < 1e-10, "mode {i}: {total}");
        }
        let left_mid = s.basis.modes()[0].velocity(0.0, 0.5);
        assert!((-left_mid[0] - PI).abs() < 1e-14);
    }

    #[test]
    fn projection_reproduces_and_filters() {
        let b = build_basis(2).unwrap();
        let s = assemble(&b, 1.0, default_quad_order(2)).unwrap();
        let m11 = Mode { k: 1, l: 1 };
        let c = project_initial(&s, &|x: f64, y: f64| {
            let u = m11.velocity(x, y);
            [3.0 * u[0], 3.0 * u[1]]
        })
        .unwrap();
        assert!((c[0] - 3.0).abs() < 1e-12);
        assert!(c.iter().skip(1).all(|v| v.abs() < 1e-12));
        let m33 = Mode { k: 3, l: 3 };
        let c = project_initial(&s, &|x: f64, y: f64| m33.velocity(x, y)).unwrap();
        assert!(c.iter().all(|v| v.abs() < 1e-12), "{c}");
        let c = project_initial(&s, &|_: f64, _: f64| [0.0, 0.0]).unwrap();
        assert!(c.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn grid_field_interpolates_linear_fields() {
        let f = |x: f64, y: f64| [2.0 * x - y, x + 3.0 * y];
        let g = GridField::sample(&f, 4, 5).unwrap();
        for &(x, y) in &[(0.0, 0.0), (0.33, 0.71), (1.0, 1.0), (0.5, 0.0)] {
            let (a, b) = (g.velocity(x, y), f(x, y));
            assert!((a[0] - b[0]).abs() < 1e-12 && (a[1] - b[1]).abs() < 1e-12);
        }
        assert!(GridField::new(2, 2, vec![[0.0; 2]; 8]).is_err());
    }

    #[test]
    fn profiles() {
        let s = TimeProfile::Samples {
            times: vec![0.0, 1.0],
            values: vec![0.0, 2.0],
        };
        assert_eq!(s.eval(0.25), 0.5);
        assert_eq!(s.eval(3.0), 2.0);
        let st = TimeProfile::Steps {
            step: 0.1,
            values: vec![1.0, 2.0, 3.0],
        };
        assert_eq!(st.eval(0.0), 1.0);
        assert_eq!(st.eval(0.1 * 1.0), 2.0);
        assert_eq!(st.eval(3.0 * 0.1), 3.0);
        assert_eq!(st.eval(9.0), 3.0);
    }

    #[test]
    fn forcing_targets() {
        let b = build_basis(2).unwrap();
        let f = ForcingSpec::zero()
            .with_term(ForcingTarget::Mode(Mode { k: 2, l: 1 }), 2.0, TimeProfile::Constant)
            .with_term(ForcingTarget::Mode(Mode { k: 5, l: 1 }), 9.0, TimeProfile::Constant)
            .with_term(ForcingTarget::Index(0), 1.0, TimeProfile::Sine { omega: PI, phase: 0.0 });
        f.validate(&b).unwrap();
        let v = f.eval(&b, 0.5);
        assert_eq!(v.as_slice(), &[1.0, 0.0, 2.0, 0.0]);
        let bad = ForcingSpec::zero().with_term(ForcingTarget::Index(4), 1.0, TimeProfile::Constant);
        assert!(bad.validate(&b).is_err());
    }

    #[test]
    fn export_has_all_blocks() {
        let b = build_basis(1).unwrap();
        let s = assemble(&b, 1.0, default_quad_order(1)).unwrap();
        let text = s.export_text();
        for block in ["[mass]", "[stiffness]", "[trilinear]", "[trace]"] {
            assert!(text.contains(block));
        }
        assert!(text.contains("9.740909103400"), "{text}");
    }
}
