//! Config-driven runs: `hemi-ns <command> --config <path> [--out <dir>] [--seed <n>]`.
//!
//! A run config is TOML. Every section is optional; a `fixture = "F1"` key
//! starts from a catalog run and the sections override parts of it.
//!
//! ```toml
//! command = "verify"
//! fixture = "F1"
//!
//! [time]
//! epsilon = 0.025
//!
//! [verify]
//! checks = ["energy", "inclusion"]
//! ```

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use serde::Deserialize;

use crate::boundary_law::{eval_envelope, fixture, rauch_check, BoundaryLaw, LawFile};
use crate::check::CheckResult;
use crate::control::{minimize, stability_experiment, Admissible, ControlProblem, CostH};
use crate::directional_growth::{
    check_conditions, lemma_estj_check, sample_grid, solve_with_superpotential,
    superpotential_inclusion_check, ArcFunction, BoundReading, Condition, GrowthData,
    GrowthFunction, ScalarPotential, SuperPotential,
};
use crate::error::{Error, Result};
use crate::evolve::{solve, sweep, MultiplierField, ProblemSpec, SolveConfig, Trajectory};
use crate::fixtures;
use crate::galerkin::{
    ForcingSpec, ForcingTarget, InitialData, Mode, TimeProfile,
};
use crate::io::{
    export_plot, write_iterates_csv, write_multiplier_csv, write_trajectory_csv, Plot, Series,
};
use crate::verify::{
    energy_report, kappa_inclusion_check, lemma1_bound_check, skew_symmetry_check,
    uniform_integrability_report, CheckRecord, Relation, VerificationReport,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    CheckLaw,
    Solve,
    Sweep,
    Verify,
    Control,
    Dgc,
}

#[derive(Debug, Parser)]
#[command(name = "hemi-ns", version, about = "Galerkin runs and hypothesis checks for flows with a multivalued boundary law")]
pub struct Args {
    pub command: Command,
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<Command>,
    /// Catalog run (`F1`..`F5`) supplying defaults.
    pub fixture: Option<String>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub basis: Option<BasisSection>,
    pub law: Option<LawFile>,
    pub superpotential: Option<SuperPotentialSection>,
    pub time: Option<TimeSection>,
    pub forcing: Option<ForcingSection>,
    pub initial: Option<InitialSection>,
    pub sweep: Option<SweepSection>,
    pub verify: Option<VerifySection>,
    pub control: Option<ControlSection>,
    pub dgc: Option<DgcSection>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisSection {
    pub m_per_axis: Option<usize>,
    pub nu: Option<f64>,
    pub quad_order: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    pub t_end: Option<f64>,
    pub dt: Option<f64>,
    pub epsilon: Option<f64>,
    pub mollifier_order: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileSection {
    #[default]
    Constant,
    Sine {
        omega: f64,
        #[serde(default)]
        phase: f64,
    },
    Samples { times: Vec<f64>, values: Vec<f64> },
    Steps { step: f64, values: Vec<f64> },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForcingTermSection {
    /// `[k, l]`
    pub mode: Option<[usize; 2]>,
    pub index: Option<usize>,
    pub amplitude: f64,
    #[serde(default)]
    pub profile: ProfileSection,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForcingSection {
    #[serde(default)]
    pub terms: Vec<ForcingTermSection>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    /// `[[k, l, amplitude], ...]`
    pub modal: Option<Vec<(usize, usize, f64)>>,
    pub coefficients: Option<Vec<f64>>,
    #[serde(default)]
    pub zero: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub m_per_axis: Vec<usize>,
    pub epsilon: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerifyCheck {
    Energy,
    Inclusion,
    LemmaRho,
    Skew,
    Decay,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySection {
    pub checks: Option<Vec<VerifyCheck>>,
    pub tol: Option<f64>,
    pub trials: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ControlVariant {
    Tracking,
    PlantInversion,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CostSection {
    Quadratic { alpha: f64 },
    AffineQuadratic { alpha: f64, beta: f64 },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StabilitySection {
    #[serde(default = "default_levels")]
    pub levels: usize,
    /// Base perturbation `g`; defaults to a tenth of the catalog smooth forcing.
    #[serde(default)]
    pub terms: Vec<ForcingTermSection>,
}

fn default_levels() -> usize {
    7
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlSection {
    pub variant: Option<ControlVariant>,
    pub n_intervals: Option<usize>,
    pub n_controls: Option<usize>,
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    pub radius: Option<f64>,
    /// Rows of the `m × n_controls` operator.
    pub operator: Option<Vec<Vec<f64>>>,
    /// `"uncontrolled"`, `"w-star"` or a trajectory CSV path.
    pub target: Option<String>,
    pub w_star: Option<Vec<f64>>,
    pub h: Option<CostSection>,
    pub budget: Option<usize>,
    pub stability: Option<StabilitySection>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSection {
    pub a: ArcFunction,
    pub g: ScalarPotential,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuperPotentialSection {
    #[serde(default)]
    pub terms: Vec<TermSection>,
    pub beta: Option<GrowthFunction>,
    pub window: Option<f64>,
    pub resolution: Option<f64>,
    /// Build `j = ∫θ` from the run's law instead of `terms`.
    #[serde(default)]
    pub from_law: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DgcCheck {
    Hj,
    Hj0Eta,
    Hj0Xi,
    G2,
    Lemma,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DgcSection {
    pub conditions: Option<Vec<DgcCheck>>,
    /// Conditions whose expected verdict is Violated.
    #[serde(default)]
    pub expect_violated: Vec<DgcCheck>,
    pub growth: Option<GrowthData>,
    pub xs: Option<Vec<f64>>,
    pub rs: Option<Vec<f64>>,
    pub xi_max: Option<f64>,
    pub samples_per_axis: Option<usize>,
    #[serde(default)]
    pub solve: bool,
    pub tol: Option<f64>,
}

impl RunConfig {
    pub fn parse(text: &str, source_name: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Parse {
            source_name: source_name.to_string(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text, &path.display().to_string())
    }

    fn validate(&self) -> Result<()> {
        if let Some(name) = &self.fixture {
            fixtures::run_spec(name)?;
        }
        if let Some(law) = &self.law {
            law.clone().into_law()?;
        }
        Ok(())
    }

    /// Problem, modes per axis and ε after applying the overrides.
    pub fn problem(&self) -> Result<(ProblemSpec, usize, f64)> {
        let (mut spec, mut mpa, mut eps) = match &self.fixture {
            Some(name) => fixtures::run_spec(name)?,
            None => (
                ProblemSpec {
                    nu: 1.0,
                    t_end: 1.0,
                    dt: 1e-3,
                    law: fixture("zero")?,
                    forcing: ForcingSpec::zero(),
                    initial: InitialData::Zero,
                    quad_order: None,
                    mollifier_order: crate::boundary_law::Mollifier::DEFAULT_QUAD_ORDER,
                },
                fixtures::MPA,
                fixtures::DEFAULT_EPSILON,
            ),
        };
        if let Some(b) = &self.basis {
            mpa = b.m_per_axis.unwrap_or(mpa);
            spec.nu = b.nu.unwrap_or(spec.nu);
            spec.quad_order = b.quad_order.or(spec.quad_order);
        }
        if let Some(t) = &self.time {
            spec.t_end = t.t_end.unwrap_or(spec.t_end);
            spec.dt = t.dt.unwrap_or(spec.dt);
            eps = t.epsilon.unwrap_or(eps);
            spec.mollifier_order = t.mollifier_order.unwrap_or(spec.mollifier_order);
        }
        if let Some(law) = &self.law {
            spec.law = law.clone().into_law()?;
        }
        if let Some(f) = &self.forcing {
            spec.forcing = forcing_from(&f.terms)?;
        }
        if let Some(init) = &self.initial {
            spec.initial = match (init.zero, &init.modal, &init.coefficients) {
                (true, None, None) => InitialData::Zero,
                (false, Some(m), None) => InitialData::Modal(m.clone()),
                (false, None, Some(c)) => InitialData::Coefficients(c.clone()),
                (false, None, None) => spec.initial,
                _ => {
                    return Err(Error::Config(
                        "initial: give exactly one of zero, modal, coefficients".into(),
                    ))
                }
            };
        }
        Ok((spec, mpa, eps))
    }

    pub fn solve_config(&self) -> Result<SolveConfig> {
        let (spec, mpa, eps) = self.problem()?;
        spec.config(mpa, eps)
    }
}

fn forcing_from(terms: &[ForcingTermSection]) -> Result<ForcingSpec> {
    let mut out = ForcingSpec::zero();
    for (i, t) in terms.iter().enumerate() {
        let target = match (t.mode, t.index) {
            (Some([k, l]), None) => ForcingTarget::Mode(Mode { k, l }),
            (None, Some(i)) => ForcingTarget::Index(i),
            _ => {
                return Err(Error::Config(format!(
                    "forcing.terms[{i}]: give exactly one of mode, index"
                )))
            }
        };
        let profile = match &t.profile {
            ProfileSection::Constant => TimeProfile::Constant,
            ProfileSection::Sine { omega, phase } => TimeProfile::Sine {
                omega: *omega,
                phase: *phase,
            },
            ProfileSection::Samples { times, values } => TimeProfile::Samples {
                times: times.clone(),
                values: values.clone(),
            },
            ProfileSection::Steps { step, values } => TimeProfile::Steps {
                step: *step,
                values: values.clone(),
            },
        };
        profile
            .validate()
            .map_err(|e| e.in_check(format!("forcing.terms[{i}]")))?;
        out = out.with_term(target, t.amplitude, profile);
    }
    Ok(out)
}

/// What a run produced.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub passed: bool,
    pub out_dir: PathBuf,
    pub report: String,
    pub files: Vec<PathBuf>,
}

struct Output {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Output {
    fn new(dir: PathBuf) -> Result<Self> {
        fs::create_dir_all(&dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
        Ok(Output { dir, files: Vec::new() })
    }

    fn path(&mut self, name: &str) -> PathBuf {
        let p = self.dir.join(name);
        self.files.push(p.clone());
        p
    }

    fn text(&mut self, name: &str, body: &str) -> Result<()> {
        let p = self.path(name);
        fs::write(&p, body)?;
        Ok(())
    }

    fn solution(&mut self, config: &SolveConfig, traj: &Trajectory, field: &MultiplierField) -> Result<()> {
        write_trajectory_csv(traj, &self.path("trajectory.csv"))?;
        write_multiplier_csv(field, &self.path("multiplier.csv"))?;
        let norms = traj.h_norms(&config.system);
        let h = Plot::new("|u(t)|_H", "t", "|u|_H")
            .with_series(Series::new("|u|_H", traj.times.iter().copied().zip(norms).collect()));
        export_plot(&h, &self.path("h_norm.svg"))?;
        export_plot(&kappa_plot(field), &self.path("kappa.svg"))?;
        Ok(())
    }
}

/// κ against arc length at the first, middle and last recorded time.
fn kappa_plot(field: &MultiplierField) -> Plot {
    let mut order: Vec<usize> = (0..field.nodes.len()).collect();
    order.sort_by(|&a, &b| field.nodes[a].arc.total_cmp(&field.nodes[b].arc));
    let last = field.times.len().saturating_sub(1);
    let mut picks = vec![0, last / 2, last];
    picks.dedup();
    let mut plot = Plot::new("boundary multiplier", "arc length", "kappa");
    for n in picks {
        let pts = order.iter().map(|&q| (field.nodes[q].arc, field.kappa[n][q])).collect();
        plot = plot.with_series(Series::new(format!("t = {:.4}", field.times[n]), pts));
    }
    plot
}

fn verdict_line(out: &mut String, name: &str, r: &CheckResult) {
    let _ = writeln!(out, "{name}: {r}");
}

fn check_law(cfg: &RunConfig, out: &mut Output) -> Result<(bool, String)> {
    let (spec, _, eps) = cfg.problem()?;
    let law = &spec.law;
    let mut text = format!("law: {}\n", law.name());
    let rauch = rauch_check(law);
    verdict_line(&mut text, "rauch", &rauch);
    match law.rho_constants() {
        Ok((r1, r2)) => {
            let _ = writeln!(text, "rho1 = {r1:e}, rho2 = {r2:e}");
        }
        Err(e) => {
            let _ = writeln!(text, "rho constants unavailable: {e}");
        }
    }
    let d0 = law.delta0();
    let span = (d0 + 2.0).min(law.window());
    let jumps = law.discontinuities(-span, span);
    let shown: Vec<String> = jumps.iter().take(6).map(|t| format!("{t:.6}")).collect();
    let more = if jumps.len() > 6 { ", ..." } else { "" };
    let _ = writeln!(
        text,
        "{} discontinuities in [-{span}, {span}]: [{}{more}]",
        jumps.len(),
        shown.join(", ")
    );
    out.text("report.txt", &text)?;
    envelope_plot(law, eps, span, out)?;
    Ok((rauch.is_satisfied(), text))
}

fn envelope_plot(law: &BoundaryLaw, eps: f64, span: f64, out: &mut Output) -> Result<()> {
    let env = eval_envelope(law, eps).map_err(|e| e.in_check("envelope"))?;
    let n = 400;
    let mut lo = Vec::with_capacity(n + 1);
    let mut hi = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let t = -span + 2.0 * span * k as f64 / n as f64;
        let iv = env.at(t).map_err(|e| e.in_check("envelope"))?;
        lo.push((t, iv.lo));
        hi.push((t, iv.hi));
    }
    let plot = Plot::new(format!("{} envelopes, epsilon = {eps}", law.name()), "t", "theta")
        .with_series(Series::new("lower", lo))
        .with_series(Series::new("upper", hi));
    export_plot(&plot, &out.path("envelope.svg"))
}

fn run_solve(cfg: &RunConfig, out: &mut Output) -> Result<(bool, String)> {
    let config = cfg.solve_config()?;
    let (traj, field) = solve(&config).map_err(|e| e.in_check("solve"))?;
    out.solution(&config, &traj, &field)?;
    let text = format!(
        "solve: m = {}, steps = {}, epsilon = {}\nfinal |u|_H = {:e}\n",
        config.system.m(),
        traj.len() - 1,
        config.epsilon,
        config.system.h_norm_sq(traj.last()).sqrt()
    );
    out.text("report.txt", &text)?;
    Ok((true, text))
}

/// Max over grid times of `|c_n - c_0 e^{-νλt}| / |c_0|` for a single free mode.
pub fn decay_error(config: &SolveConfig, traj: &Trajectory) -> Result<f64> {
    if config.system.m() != 1 || !config.forcing.is_zero() {
        return Err(Error::Config("decay check needs one mode and zero forcing".into()));
    }
    let iv = config.law.ess_range(-config.law.window(), config.law.window())?;
    if iv.lo != 0.0 || iv.hi != 0.0 {
        return Err(Error::Config("decay check needs the zero law".into()));
    }
    let c0 = traj.coeffs[0][0];
    if c0 == 0.0 {
        return Ok(0.0);
    }
    let rate = config.system.stiffness[(0, 0)] / config.system.mass[(0, 0)];
    Ok(traj
        .times
        .iter()
        .zip(&traj.coeffs)
        .map(|(t, c)| (c[0] - c0 * (-rate * t).exp()).abs() / c0.abs())
        .fold(0.0, f64::max))
}

fn run_verify(cfg: &RunConfig, seed: u64, out: &mut Output) -> Result<(bool, String)> {
    let config = cfg.solve_config()?;
    let (traj, field) = solve(&config).map_err(|e| e.in_check("solve"))?;
    out.solution(&config, &traj, &field)?;
    let section = cfg.verify.clone().unwrap_or_default();
    let checks = section.checks.unwrap_or_else(|| {
        vec![VerifyCheck::Energy, VerifyCheck::Inclusion, VerifyCheck::LemmaRho, VerifyCheck::Skew]
    });
    let tol = section.tol.unwrap_or(1e-6);
    let mut rep = VerificationReport::new("verify");
    rep.note(format!("m = {}, dt = {}, epsilon = {}", config.system.m(), config.dt, config.epsilon));
    for check in checks {
        let part = match check {
            VerifyCheck::Energy => energy_report(&traj, &config).map_err(|e| e.in_check("energy")),
            VerifyCheck::Inclusion => {
                kappa_inclusion_check(&field, &config.law, tol).map_err(|e| e.in_check("kappa_inclusion"))
            }
            VerifyCheck::LemmaRho => lemma1_bound_check(&field, &config).map_err(|e| e.in_check("lemma_rho_bound")),
            VerifyCheck::Skew => skew_symmetry_check(&config.system, section.trials.unwrap_or(100), seed)
                .map_err(|e| e.in_check("skew_symmetry")),
            VerifyCheck::Decay => decay_error(&config, &traj)
                .map(|err| {
                    let mut r = VerificationReport::new("decay");
                    r.push(CheckRecord::new("decay_error", Relation::AtMost, 5.0 * config.dt, err, 0.0));
                    r
                })
                .map_err(|e| e.in_check("decay")),
        }?;
        rep.extend(part);
    }
    let text = rep.to_text();
    out.text("report.txt", &text)?;
    Ok((rep.passed(), text))
}

fn run_sweep(cfg: &RunConfig, seed: u64, out: &mut Output) -> Result<(bool, String)> {
    let (spec, mpa, eps) = cfg.problem()?;
    let (mpas, epss) = match &cfg.sweep {
        Some(s) => (s.m_per_axis.clone(), s.epsilon.clone()),
        None => (vec![mpa], vec![eps]),
    };
    let sizes: Vec<usize> = mpas.iter().map(|k| k * k).collect();
    let rep = sweep(&spec, &sizes, &epss).map_err(|e| e.in_check("sweep"))?;
    let mut text = String::from("entry  m  epsilon  status\n");
    let mut fields = Vec::new();
    let mut all_ok = true;
    for (j, e) in rep.entries.iter().enumerate() {
        let status = match &e.result {
            Ok((traj, field)) => {
                write_trajectory_csv(traj, &out.path(&format!("trajectory_{j}.csv")))?;
                write_multiplier_csv(field, &out.path(&format!("multiplier_{j}.csv")))?;
                fields.push(field.clone());
                "ok".to_string()
            }
            Err(err) => {
                all_ok = false;
                err.to_string()
            }
        };
        let _ = writeln!(text, "{j}  {}  {}  {status}", e.m, e.epsilon);
    }
    let fmt = |v: &[Option<f64>]| {
        v.iter()
            .map(|d| d.map_or("-".to_string(), |x| format!("{x:.6e}")))
            .collect::<Vec<_>>()
            .join(", ")
    };
    let _ = writeln!(text, "successive L2(0,T;V) distances: {}", fmt(&rep.table.successive_trajectory()));
    let _ = writeln!(text, "successive L1 multiplier distances: {}", fmt(&rep.table.successive_multiplier()));
    let mut passed = all_ok;
    if fields.len() >= 2 {
        let ui = uniform_integrability_report(&fields, seed).map_err(|e| e.in_check("uniform_integrability"))?;
        passed &= ui.passed();
        text.push_str(&ui.to_text());
    }
    out.text("report.txt", &text)?;
    Ok((passed, text))
}

fn control_problem(cfg: &RunConfig, seed: u64) -> Result<ControlProblem> {
    let c = cfg.control.clone().unwrap_or_default();
    let mut problem = match c.variant {
        Some(v) => fixtures::f4_problem(v == ControlVariant::PlantInversion)?,
        None => {
            let base = cfg.solve_config()?;
            let m = base.system.m();
            let n_controls = c.n_controls.unwrap_or(1);
            let target = solve(&base).map_err(|e| e.in_check("target"))?.0;
            ControlProblem {
                base,
                n_intervals: c.n_intervals.unwrap_or(4),
                n_controls,
                operator_c: ControlProblem::default_operator(m, n_controls),
                admissible: Admissible::Box { lo: -1.0, hi: 1.0 },
                target,
                cost_h: CostH::quadratic(1.0),
                seed,
            }
        }
    };
    problem.seed = seed;
    if let Some(n) = c.n_intervals {
        problem.n_intervals = n;
    }
    if let Some(n) = c.n_controls {
        problem.n_controls = n;
        problem.operator_c = ControlProblem::default_operator(problem.base.system.m(), n);
    }
    if let Some(rows) = &c.operator {
        let m = rows.len();
        let nc = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != nc) {
            return Err(Error::Config("control.operator rows differ in length".into()));
        }
        problem.operator_c = nalgebra::DMatrix::from_fn(m, nc, |i, j| rows[i][j]);
    }
    match (c.lo, c.hi, c.radius) {
        (Some(lo), Some(hi), None) => problem.admissible = Admissible::Box { lo, hi },
        (None, None, Some(radius)) => problem.admissible = Admissible::Ball { radius },
        (None, None, None) => {}
        _ => return Err(Error::Config("control: give lo and hi, or radius".into())),
    }
    if let Some(h) = &c.h {
        problem.cost_h = match *h {
            CostSection::Quadratic { alpha } => CostH::quadratic(alpha),
            CostSection::AffineQuadratic { alpha, beta } => CostH::affine_quadratic(alpha, beta),
        };
    }
    match c.target.as_deref() {
        None => {}
        Some("uncontrolled") => problem.target = solve(&problem.base).map_err(|e| e.in_check("target"))?.0,
        Some("w-star") => {
            let w = c
                .w_star
                .as_ref()
                .ok_or_else(|| Error::Config("control.target = \"w-star\" needs control.w_star".into()))?;
            let forced = problem.base.with_forcing(problem.forcing_for(w));
            problem.target = solve(&forced).map_err(|e| e.in_check("target"))?.0;
        }
        Some(path) => problem.target = crate::io::read_trajectory_csv(Path::new(path))?,
    }
    problem.validate()?;
    Ok(problem)
}

fn run_control(cfg: &RunConfig, seed: u64, out: &mut Output) -> Result<(bool, String)> {
    let problem = control_problem(cfg, seed)?;
    let budget = cfg.control.as_ref().and_then(|c| c.budget).unwrap_or(500);
    let report = minimize(&problem, budget).map_err(|e| e.in_check("minimize"))?;
    let mut text = report.to_text();
    write_iterates_csv(&report, &out.path("iterates.csv"))?;
    let accepted = report.accepted_j();
    let monotone = accepted.windows(2).all(|w| w[1] <= w[0]);
    let _ = writeln!(text, "accepted J nonincreasing: {monotone}");
    let pts: Vec<(f64, f64)> = accepted.iter().enumerate().map(|(i, &j)| (i as f64, j)).collect();
    if !pts.is_empty() {
        let plot = Plot::new("objective", "accepted iterate", "J").with_series(Series::new("J", pts));
        export_plot(&plot, &out.path("objective.svg"))?;
    }
    let mut passed = monotone;
    if let Some(st) = cfg.control.as_ref().and_then(|c| c.stability.clone()) {
        let g = if st.terms.is_empty() {
            fixtures::smooth_forcing().scaled(0.1)
        } else {
            forcing_from(&st.terms)?
        };
        let deltas: Vec<ForcingSpec> = (0..st.levels).map(|j| g.scaled(0.5f64.powi(j as i32))).collect();
        let sr = stability_experiment(&problem, &deltas).map_err(|e| e.in_check("stability"))?;
        text.push_str("stability: delta_norm, l2_v, linf_h\n");
        for r in &sr.rows {
            let _ = writeln!(text, "  {:.6e}, {:.6e}, {:.6e}", r.delta_norm, r.l2_v, r.linf_h);
        }
        let _ = writeln!(text, "stability strictly decreasing: {}", sr.pass);
        passed &= sr.pass;
    }
    out.text("report.txt", &text)?;
    Ok((passed, text))
}

fn superpotential(cfg: &RunConfig, law: &BoundaryLaw) -> Result<SuperPotential> {
    let Some(s) = &cfg.superpotential else {
        return match cfg.fixture.as_deref() {
            Some("F5") => fixtures::f5_superpotential(),
            _ => Err(Error::Config("dgc needs a [superpotential] section or fixture = \"F5\"".into())),
        };
    };
    let beta = s.beta.unwrap_or_else(|| GrowthFunction::constant(0.0));
    if s.from_law {
        return Ok(SuperPotential::from_law(law, beta));
    }
    SuperPotential::new(
        s.terms.iter().map(|t| (t.a, t.g.clone())).collect(),
        beta,
        s.window.unwrap_or(10.0),
        s.resolution.unwrap_or(1e-3),
    )
}

fn run_dgc(cfg: &RunConfig, out: &mut Output) -> Result<(bool, String)> {
    let config = cfg.solve_config()?;
    let sp = superpotential(cfg, &config.law)?;
    let d = cfg.dgc.clone().unwrap_or_default();
    let growth = d.growth.unwrap_or_else(fixtures::f5_growth);
    let xs = d.xs.unwrap_or_else(|| vec![0.0, 0.5, 1.0, 2.0, 3.0, 3.5]);
    let rs = d.rs.unwrap_or_else(|| vec![0.5, 1.0, 2.0]);
    let samples = sample_grid(&xs, &rs, d.xi_max.unwrap_or(3.0), d.samples_per_axis.unwrap_or(13));
    let conditions = d
        .conditions
        .unwrap_or_else(|| vec![DgcCheck::Hj, DgcCheck::Hj0Xi, DgcCheck::G2, DgcCheck::Lemma]);
    let mut text = format!("superpotential with {} term(s), {} samples\n", sp.terms().len(), samples.len());
    let mut passed = true;
    for c in conditions {
        let (name, verdict) = match c {
            DgcCheck::Hj => ("H(j)", check_conditions(&sp, &growth, Condition::Hj, &samples)),
            DgcCheck::Hj0Eta => ("H(j0) eta", check_conditions(&sp, &growth, Condition::Hj0(BoundReading::Eta), &samples)),
            DgcCheck::Hj0Xi => ("H(j0) xi", check_conditions(&sp, &growth, Condition::Hj0(BoundReading::Xi), &samples)),
            DgcCheck::G2 => ("G2", check_conditions(&sp, &growth, Condition::G2, &samples)),
            DgcCheck::Lemma => ("mollified estimate", lemma_estj_check(&sp, &growth, config.epsilon, &samples)),
        };
        let expected = if d.expect_violated.contains(&c) {
            verdict.is_violated()
        } else {
            verdict.is_satisfied()
        };
        passed &= expected;
        let mark = if expected { "as expected" } else { "UNEXPECTED" };
        let _ = writeln!(text, "{name}: {verdict} [{mark}]");
    }
    if d.solve {
        let (traj, field) = solve_with_superpotential(&sp, &config).map_err(|e| e.in_check("solve"))?;
        out.solution(&config, &traj, &field)?;
        let rep = superpotential_inclusion_check(&field, &sp, d.tol.unwrap_or(1e-6))
            .map_err(|e| e.in_check("superpotential_inclusion"))?;
        passed &= rep.passed();
        text.push_str(&rep.to_text());
    }
    out.text("report.txt", &text)?;
    Ok((passed, text))
}

/// Runs one config. `out` and `seed` override the config's own values.
pub fn execute(command: Command, cfg: &RunConfig, out: Option<PathBuf>, seed: Option<u64>) -> Result<RunOutcome> {
    if let Some(c) = cfg.command {
        if c != command {
            return Err(Error::Usage(format!(
                "config is for command {c:?} but {command:?} was requested"
            )));
        }
    }
    let seed = seed.or(cfg.seed).unwrap_or(0);
    let dir = out.or_else(|| cfg.out.clone()).unwrap_or_else(|| PathBuf::from("hemi-ns-out"));
    let mut output = Output::new(dir)?;
    let (passed, report) = match command {
        Command::CheckLaw => check_law(cfg, &mut output),
        Command::Solve => run_solve(cfg, &mut output),
        Command::Sweep => run_sweep(cfg, seed, &mut output),
        Command::Verify => run_verify(cfg, seed, &mut output),
        Command::Control => run_control(cfg, seed, &mut output),
        Command::Dgc => run_dgc(cfg, &mut output),
    }?;
    Ok(RunOutcome {
        passed,
        out_dir: output.dir,
        report,
        files: output.files,
    })
}

/// Exit status: 0 when every check passed, 1 when one failed, 2 on errors.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = RunConfig::load(&args.config).and_then(|cfg| execute(args.command, &cfg, args.out, args.seed));
    match result {
        Ok(outcome) => {
            print!("{}", outcome.report);
            println!(
                "{} ({})",
                if outcome.passed { "PASS" } else { "FAIL" },
                outcome.out_dir.display()
            );
            i32::from(!outcome.passed)
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}
