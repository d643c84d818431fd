use super::{Focus, HerglotzMeasure};
use crate::error::Result;
use crate::quadrature::QuadOptions;
use crate::unitdisc::{
    angle_diff, radial_grid, CircleAngle, BoundaryPoint, Extrapolator, RadialLimitEstimate, RadialSample,
    QUADRATURE_GRID,
};
use num_complex::Complex64;

/// Outcome of the measure-side regular-pole test at a boundary point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoleCriterion {
    pub is_pole: bool,
    /// Limit of `∫ dμ(t) / |e^{it} - r e^{iθ}|^2`.
    pub energy: RadialLimitEstimate,
    /// Limit of `(1/(1-r)) ∫ sin(t - θ) / |e^{it} - r e^{iθ}|^2 dμ(t)`.
    pub sine_term: RadialLimitEstimate,
}

/// Default tolerance on the extrapolated sine term.
pub const TOL_SINE: f64 = 1e-4;

/// Samples of `∫ dμ(t) / |e^{it} - (1-ε) e^{iθ}|^2` and of the sine term.
pub fn radial_energy(
    mu: &HerglotzMeasure,
    theta: BoundaryPoint,
    grid: &[f64],
) -> Result<(Vec<RadialSample>, Vec<RadialSample>)> {
    let opts = QuadOptions::default();
    let mut energy = Vec::with_capacity(grid.len());
    let mut sine = Vec::with_capacity(grid.len());
    for &eps in grid {
        let z = theta.radial(eps)?;
        let focus = Focus::for_point(&z);
        let e = mu.integrate(|t| Complex64::new(1.0 / z.dist_sq_to(t), 0.0), focus, &opts)?;
        let s = mu.integrate(
            |t| Complex64::new(t.diff_from(theta.angle()).sin() / z.dist_sq_to(t), 0.0),
            focus,
            &opts,
        )?;
        energy.push(RadialSample::new(eps, e.value));
        // below quadrature resolution the sine integral is indistinguishable from zero
        let resolution = 4.0 * (s.error + 64.0 * f64::EPSILON * s.abs_value);
        let sv = if s.value.norm() <= resolution { Complex64::new(0.0, 0.0) } else { s.value };
        sine.push(RadialSample::new(eps, sv / eps));
    }
    Ok((energy, sine))
}

pub fn pole_criterion(mu: &HerglotzMeasure, theta: BoundaryPoint) -> Result<PoleCriterion> {
    let grid = radial_grid(QUADRATURE_GRID.0, QUADRATURE_GRID.1)?;
    pole_criterion_with(mu, theta, &grid, &Extrapolator::default(), TOL_SINE)
}

pub fn pole_criterion_with(
    mu: &HerglotzMeasure,
    theta: BoundaryPoint,
    grid: &[f64],
    extrapolator: &Extrapolator,
    tol_sine: f64,
) -> Result<PoleCriterion> {
    let (e, s) = radial_energy(mu, theta, grid)?;
    let energy = extrapolator.estimate(&e)?;
    let sine_term = extrapolator.estimate(&s)?;
    let is_pole = energy.converged && sine_term.converged && sine_term.value.norm() <= tol_sine;
    Ok(PoleCriterion {
        is_pole,
        energy,
        sine_term,
    })
}

/// Boundary integral `∫ dμ(t) / |e^{it} - e^{iθ}|^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct FatouTest {
    pub finite: bool,
    /// Extrapolated value when finite.
    pub value: Option<f64>,
    /// Integrals over `{|t - θ| ≥ δ}` for shrinking `δ`; each is a lower
    /// bound for the full integral.
    pub lower_bounds: Vec<f64>,
}

pub fn fatou_l2_test(mu: &HerglotzMeasure, theta: BoundaryPoint) -> Result<FatouTest> {
    let th = theta.angle();
    if mu.atoms.iter().any(|a| angle_diff(a.angle, th).abs() < 1e-14) {
        return Ok(FatouTest {
            finite: false,
            value: None,
            lower_bounds: vec![f64::INFINITY],
        });
    }
    let opts = QuadOptions::default();
    let deltas: Vec<f64> = (2..=30).map(|k| (-(k as f64)).exp2()).collect();
    let mut bounds = Vec::with_capacity(deltas.len());
    let kernel = |t: CircleAngle| {
        let s = (0.5 * t.diff_from(th)).sin();
        Complex64::new(1.0 / (4.0 * s * s), 0.0)
    };
    for &delta in &deltas {
        bounds.push(mu.integrate_outside(kernel, th, delta, &opts)?.value.re);
    }
    let samples: Vec<(f64, f64)> = deltas.iter().copied().zip(bounds.iter().copied()).collect();
    let est = Extrapolator::default().estimate_real(&samples)?;
    Ok(FatouTest {
        finite: est.converged,
        value: est.converged.then_some(est.value.re),
        lower_bounds: bounds,
    })
}
