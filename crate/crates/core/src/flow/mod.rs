//! Semigroup flow `∂φ_t/∂t = G(φ_t)` with the variational derivative
//! `v = φ_t'(z0)`, plus the boundary β-point analysis of `φ_t`.
//!
//! Starts close to the circle are integrated in the anchored variable
//! `w = z - x`, so the distance to the boundary keeps full relative precision.
//! The derivative is carried as `log v`, whose equation `d(log v)/dt = G'(z)`
//! stays well scaled while `v` itself shrinks to `O(ε)`.

mod dopri;

pub use dopri::StepStats;

use crate::error::{Error, Result};
use crate::generator::{BoundaryClassification, Generator};
use crate::unitdisc::{radial_grid, BoundaryPoint, DiskPoint, Extrapolator, RadialLimitEstimate, RadialSample};
use dopri::{integrate, Problem, State};
use num_complex::Complex64;
use std::fmt;

/// Starts with `1 - |z0|` below this are integrated relative to the nearest
/// boundary point.
const ANCHOR_GAP: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: usize,
}

impl Default for FlowOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-10,
            max_steps: 200_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowSample {
    pub t: f64,
    pub z: DiskPoint,
    /// `φ_t'(z0)`, present when the variational equation was integrated.
    pub v: Option<Complex64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub z0: DiskPoint,
    /// One sample per accepted step, starting with `(0, z0, 1)`.
    pub samples: Vec<FlowSample>,
    pub stats: StepStats,
}

impl Trajectory {
    pub fn last(&self) -> &FlowSample {
        self.samples.last().expect("trajectory has its initial sample")
    }

    /// The sample taken exactly at checkpoint `t`.
    pub fn at(&self, t: f64) -> Option<&FlowSample> {
        self.samples.iter().find(|s| s.t == t)
    }

    /// `t,re,im,v_re,v_im` rows; `v` columns are empty without the
    /// variational equation.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,re,im,v_re,v_im\n");
        for s in &self.samples {
            let z = s.z.to_complex();
            let (vr, vi) = match s.v {
                Some(v) => (format!("{:.17e}", v.re), format!("{:.17e}", v.im)),
                None => (String::new(), String::new()),
            };
            out.push_str(&format!("{:.17e},{:.17e},{:.17e},{vr},{vi}\n", s.t, z.re, z.im));
        }
        out.push_str(&format!(
            "# steps={} rejected={} max_local_error={:e}\n",
            self.stats.accepted, self.stats.rejected, self.stats.max_error
        ));
        out
    }
}

/// A failed integration together with everything accepted before the failure.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowFailure {
    pub error: Error,
    pub partial: Trajectory,
}

impl fmt::Display for FlowFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (after t = {})", self.error, self.partial.last().t)
    }
}

impl std::error::Error for FlowFailure {}

impl From<FlowFailure> for Error {
    fn from(f: FlowFailure) -> Self {
        f.error
    }
}

/// `φ_t(z0)` for `t ∈ [0, t_end]`.
pub fn flow(g: &Generator, z0: DiskPoint, t_end: f64, with_variational: bool) -> std::result::Result<Trajectory, FlowFailure> {
    flow_with(g, z0, &[t_end], with_variational, &FlowOptions::default())
}

/// Integrate through every checkpoint, landing on each exactly.
pub fn flow_with(
    g: &Generator,
    z0: DiskPoint,
    checkpoints: &[f64],
    with_variational: bool,
    opts: &FlowOptions,
) -> std::result::Result<Trajectory, FlowFailure> {
    let mut traj = Trajectory {
        z0,
        samples: vec![FlowSample {
            t: 0.0,
            z: z0,
            v: with_variational.then_some(Complex64::new(1.0, 0.0)),
        }],
        stats: StepStats::default(),
    };
    if let Err(error) = dopri::check_checkpoints(checkpoints) {
        return Err(FlowFailure { error, partial: traj });
    }
    if !(opts.rel_tol > 0.0 && opts.abs_tol > 0.0) {
        return Err(FlowFailure {
            error: Error::argument("flow tolerances must be positive"),
            partial: traj,
        });
    }

    let anchor = (z0.gap() < ANCHOR_GAP).then(|| BoundaryPoint::new(z0.angle()));
    let point = |y: Complex64| -> Result<DiskPoint> {
        match anchor {
            Some(x) => DiskPoint::from_boundary_offset(x, y),
            None => DiskPoint::from_complex(y),
        }
    };
    let y0 = match anchor {
        Some(x) => -z0.offset_from(x),
        None => z0.to_complex(),
    };

    let rhs = |y: &State| -> Option<State> {
        let z = point(y[0]).ok()?;
        let out = if with_variational {
            let (gz, dg) = g.evaluate_with_derivative(&z).ok()?;
            [gz, dg]
        } else {
            [g.evaluate(&z).ok()?, Complex64::new(0.0, 0.0)]
        };
        (out[0].is_finite() && out[1].is_finite()).then_some(out)
    };
    let (rtol, atol) = (opts.rel_tol, opts.abs_tol);
    let scale = |a: &State, b: &State| -> [f64; 2] {
        let m = a[0].norm().max(b[0].norm());
        // anchored offsets are controlled relative to their own size
        let sy = match anchor {
            Some(_) => (rtol + atol) * m.min(1.0) + rtol * (m - 1.0).max(0.0),
            None => atol + rtol * m,
        };
        let sl = if with_variational {
            atol + rtol * a[1].norm().max(b[1].norm())
        } else {
            f64::INFINITY
        };
        [sy, sl]
    };
    let problem = Problem {
        rhs: &rhs,
        scale: &scale,
        max_steps: opts.max_steps,
        first_step_cap: 0.1 * z0.gap(),
    };

    let mut bad_point = None;
    let mut accept = |t: f64, y: &State| match point(y[0]) {
        Ok(z) => traj.samples.push(FlowSample {
            t,
            z,
            v: with_variational.then(|| y[1].exp()),
        }),
        Err(e) => {
            bad_point.get_or_insert(e);
        }
    };
    let result = integrate(&problem, [y0, Complex64::new(0.0, 0.0)], checkpoints, &mut accept);
    match result {
        Ok(stats) => {
            traj.stats = stats;
            match bad_point {
                None => Ok(traj),
                Some(error) => Err(FlowFailure { error, partial: traj }),
            }
        }
        Err(f) => {
            traj.stats = f.stats;
            Err(FlowFailure {
                error: f.error,
                partial: traj,
            })
        }
    }
}

/// `φ_t(z0)`.
pub fn flow_point(g: &Generator, z0: DiskPoint, t: f64) -> Result<DiskPoint> {
    Ok(flow(g, z0, t, false)?.last().z)
}

/// `(φ_t(z0), φ_t'(z0))`.
pub fn flow_point_with_derivative(g: &Generator, z0: DiskPoint, t: f64, opts: &FlowOptions) -> Result<(DiskPoint, Complex64)> {
    let traj = flow_with(g, z0, &[t], true, opts)?;
    let last = traj.last();
    Ok((last.z, last.v.expect("variational flow")))
}

/// `|φ_{t+s}(z0) - φ_t(φ_s(z0))|`.
pub fn check_semigroup_property(g: &Generator, z0: DiskPoint, t: f64, s: f64) -> Result<f64> {
    if !(t >= 0.0 && s >= 0.0) {
        return Err(Error::argument("semigroup check needs t, s >= 0"));
    }
    let direct = flow_point(g, z0, t + s)?;
    let composed = flow_point(g, flow_point(g, z0, s)?, t)?;
    Ok((direct.to_complex() - composed.to_complex()).norm())
}

/// `|φ_t'(z0) G(z0) - G(φ_t(z0))|`.
pub fn check_diffeq_identity(g: &Generator, z0: DiskPoint, t: f64) -> Result<f64> {
    let (z, v) = flow_point_with_derivative(g, z0, t, &FlowOptions::default())?;
    Ok((v * g.evaluate(&z0)? - g.evaluate(&z)?).norm())
}

/// `(1 - |f((1-ε)x)|)/ε` extrapolated to the boundary.
pub fn dilatation_coefficient<F>(f: F, x: BoundaryPoint, grid: &[f64]) -> Result<RadialLimitEstimate>
where
    F: Fn(&DiskPoint) -> Result<DiskPoint>,
{
    let samples = grid
        .iter()
        .map(|&eps| Ok(RadialSample::new(eps, Complex64::new(f(&x.radial(eps)?)?.gap() / eps, 0.0))))
        .collect::<Result<Vec<_>>>()?;
    Extrapolator::default().estimate(&samples)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BetaVerdict {
    BetaPoint,
    NotBetaPoint,
    Inconclusive,
}

impl BetaVerdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            BetaVerdict::BetaPoint => "beta_point",
            BetaVerdict::NotBetaPoint => "not_beta_point",
            BetaVerdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaOptions {
    pub grid: (u32, u32),
    pub flow: FlowOptions,
    pub extrapolator: Extrapolator,
}

impl Default for BetaOptions {
    fn default() -> Self {
        Self {
            grid: (4, 24),
            flow: FlowOptions::default(),
            extrapolator: Extrapolator::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhiBetaReport {
    pub angle: f64,
    pub t: f64,
    pub verdict: BetaVerdict,
    /// Radial limit of `φ_t`; interior exactly at β-points.
    pub sigma_t: Option<Complex64>,
    /// Radial limit of `|φ_t'(z)|/|x - z|`.
    pub beta_mass: Option<f64>,
    /// Radial limit of `φ_t'(z)/(z - x)`.
    pub second_derivative: Option<Complex64>,
    /// `G(σ_t)/A` with `A = lim G(z)(z - x)`, when `x` is a regular pole.
    pub prediction: Option<Complex64>,
    /// `|second_derivative - prediction| / |prediction|`.
    pub mismatch: Option<f64>,
    pub sigma_limit: RadialLimitEstimate,
    pub derivative_limit: RadialLimitEstimate,
    pub note: Option<String>,
}

/// β-point analysis of `φ_t` at `x`, classifying `x` first.
pub fn phi_beta_point(g: &Generator, x: BoundaryPoint, t: f64) -> Result<PhiBetaReport> {
    let class = g.classify_boundary(x);
    phi_beta_point_with(g, x, t, &class, &BetaOptions::default())
}

/// β-point analysis of `φ_t` at `x`.
///
/// The verdict comes from the flow alone: `φ_t'((1-ε)x)/ε` must have a finite
/// radial limit and `φ_t((1-ε)x)` an interior one. The classification only
/// supplies `A` for the predicted second derivative.
pub fn phi_beta_point_with(
    g: &Generator,
    x: BoundaryPoint,
    t: f64,
    class: &BoundaryClassification,
    opts: &BetaOptions,
) -> Result<PhiBetaReport> {
    Ok(phi_beta_points_with(g, x, &[t], class, opts)?.remove(0))
}

/// β-point analysis at several increasing times; each radial start is
/// integrated once through all of them.
pub fn phi_beta_points_with(
    g: &Generator,
    x: BoundaryPoint,
    times: &[f64],
    class: &BoundaryClassification,
    opts: &BetaOptions,
) -> Result<Vec<PhiBetaReport>> {
    if times.is_empty() || times.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
        return Err(Error::argument("β-point analysis needs t > 0"));
    }
    dopri::check_checkpoints(times)?;
    let grid = radial_grid(opts.grid.0, opts.grid.1)?;
    let xc = x.to_complex();
    let mut sigma = vec![Vec::with_capacity(grid.len()); times.len()];
    let mut second = vec![Vec::with_capacity(grid.len()); times.len()];
    let mut note = None;
    for &eps in &grid {
        match flow_with(g, x.radial(eps)?, times, true, &opts.flow) {
            Ok(traj) => {
                for (i, &t) in times.iter().enumerate() {
                    let s = traj.at(t).expect("checkpoints are sampled");
                    let v = s.v.expect("variational flow");
                    sigma[i].push(RadialSample::new(eps, s.z.to_complex()));
                    second[i].push(RadialSample::new(eps, -v / (eps * xc)));
                }
            }
            Err(e) => {
                note = Some(format!("flow failed at eps = {eps:e}: {e}"));
                break;
            }
        }
    }
    times
        .iter()
        .zip(sigma.iter().zip(&second))
        .map(|(&t, (s, d))| beta_verdict(g, x, t, class, opts, s, d, note.clone()))
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn beta_verdict(
    g: &Generator,
    x: BoundaryPoint,
    t: f64,
    class: &BoundaryClassification,
    opts: &BetaOptions,
    sigma: &[RadialSample],
    second: &[RadialSample],
    note: Option<String>,
) -> Result<PhiBetaReport> {
    let mut report = PhiBetaReport {
        angle: x.angle(),
        t,
        verdict: BetaVerdict::Inconclusive,
        sigma_t: None,
        beta_mass: None,
        second_derivative: None,
        prediction: None,
        mismatch: None,
        sigma_limit: blank_estimate(),
        derivative_limit: blank_estimate(),
        note,
    };
    if sigma.len() < 4 {
        return Ok(report);
    }
    let s = opts.extrapolator.estimate(sigma)?;
    let d = opts.extrapolator.estimate(second)?;
    report.sigma_limit = s;
    report.derivative_limit = d;
    if d.diverges() {
        report.verdict = BetaVerdict::NotBetaPoint;
        return Ok(report);
    }
    if !(s.converged && d.converged) {
        return Ok(report);
    }
    if s.value.norm() >= 1.0 - 1e-9 {
        report.verdict = BetaVerdict::NotBetaPoint;
        report.note = Some("radial limit of φ_t lies on the circle".into());
        return Ok(report);
    }
    report.verdict = BetaVerdict::BetaPoint;
    report.sigma_t = Some(s.value);
    report.beta_mass = Some(d.value.norm());
    report.second_derivative = Some(d.value);
    if class.is_pole() {
        let sigma_pt = DiskPoint::from_complex(s.value)?;
        let pred = g.evaluate(&sigma_pt)? / class.a_inward();
        report.prediction = Some(pred);
        report.mismatch = Some((d.value - pred).norm() / pred.norm());
    }
    Ok(report)
}

fn blank_estimate() -> RadialLimitEstimate {
    RadialLimitEstimate {
        value: Complex64::new(f64::NAN, f64::NAN),
        residual: f64::INFINITY,
        converged: false,
        divergence_exponent: f64::NAN,
        depth: 0,
    }
}
