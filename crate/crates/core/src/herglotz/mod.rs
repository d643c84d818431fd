//! Positive finite measures on the unit circle and their Herglotz transform
//!
//! `T(z) = (1/2π) ∫ (e^{it} + z)/(e^{it} - z) dμ(t)`.
//!
//! A measure is a finite list of atoms plus at most one absolutely
//! continuous part (uniform, piecewise constant, or a power cusp).

mod criteria;

pub use criteria::{fatou_l2_test, pole_criterion, pole_criterion_with, radial_energy, FatouTest, PoleCriterion};

use crate::error::{Error, Result};
use crate::quadrature::{integrate, integrate_scaled, ladder, Integral, QuadOptions};
use crate::unitdisc::{angle_diff, normalize_angle, CircleAngle, DiskPoint};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub angle: f64,
    pub mass: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepPiece {
    pub start: f64,
    pub end: f64,
    /// Constant density on `[start, end]`, i.e. the slope of `υ` there.
    pub slope: f64,
}

/// Density `α · scale · d(t, t0)^{α-1}` where `d` is the circular distance to
/// the center; its cumulative function is `±scale·|t - t0|^α`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CuspProfile {
    pub center: f64,
    pub exponent: f64,
    #[serde(default)]
    pub scale: Option<f64>,
}

impl CuspProfile {
    /// Cusp with the default scale `π^{1-α}`, which gives total mass `2π`.
    pub fn new(center: f64, exponent: f64) -> Self {
        Self {
            center,
            exponent,
            scale: None,
        }
    }

    pub fn scale(&self) -> f64 {
        self.scale.unwrap_or_else(|| PI.powf(1.0 - self.exponent))
    }

    pub fn density(&self, t: f64) -> f64 {
        let d = angle_diff(t, self.center).abs();
        self.exponent * self.scale() * d.powf(self.exponent - 1.0)
    }

    pub fn mass(&self) -> f64 {
        2.0 * self.scale() * PI.powf(self.exponent)
    }

    /// Antiderivative of the density on the real line, zero at the center.
    fn primitive(&self, u: f64) -> f64 {
        let k = ((u - self.center) / TAU).round();
        let delta = u - self.center - TAU * k;
        k * self.mass() + self.scale() * delta.signum() * delta.abs().powf(self.exponent)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Density {
    Uniform { c: f64 },
    Step { pieces: Vec<StepPiece> },
    PowerCusp(CuspProfile),
}

/// A positive finite Borel measure on the circle.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct HerglotzMeasure {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub atoms: Vec<Atom>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<Density>,
}

/// A region where the integrand of a measure integral is sharply peaked.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Focus {
    pub angle: f64,
    pub width: f64,
}

impl Focus {
    /// Focus for a kernel evaluated at `z`, present when `z` is close to the circle.
    pub fn for_point(z: &DiskPoint) -> Option<Focus> {
        (z.gap() < 0.5).then(|| Focus {
            angle: z.angle(),
            width: z.gap(),
        })
    }
}

impl HerglotzMeasure {
    pub fn new(atoms: Vec<Atom>, density: Option<Density>) -> Result<Self> {
        let m = Self { atoms, density };
        m.validate()?;
        Ok(m)
    }

    pub fn uniform(c: f64) -> Result<Self> {
        Self::new(vec![], Some(Density::Uniform { c }))
    }

    pub fn atoms(atoms: &[(f64, f64)]) -> Result<Self> {
        Self::new(
            atoms.iter().map(|&(angle, mass)| Atom { angle, mass }).collect(),
            None,
        )
    }

    pub fn step(pieces: &[(f64, f64, f64)]) -> Result<Self> {
        Self::new(
            vec![],
            Some(Density::Step {
                pieces: pieces
                    .iter()
                    .map(|&(start, end, slope)| StepPiece { start, end, slope })
                    .collect(),
            }),
        )
    }

    pub fn cusp(center: f64, exponent: f64) -> Result<Self> {
        Self::new(vec![], Some(Density::PowerCusp(CuspProfile::new(center, exponent))))
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        let m: HerglotzMeasure = serde_json::from_value(value.clone())
            .map_err(|e| Error::argument(format!("measure spec: {e}")))?;
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        for (i, a) in self.atoms.iter().enumerate() {
            if !a.angle.is_finite() {
                return Err(Error::argument(format!("atoms[{i}].angle is not finite")));
            }
            if !(a.mass > 0.0 && a.mass.is_finite()) {
                return Err(Error::argument(format!("atoms[{i}].mass must be positive")));
            }
        }
        match &self.density {
            None => {}
            Some(Density::Uniform { c }) => {
                if !(*c >= 0.0 && c.is_finite()) {
                    return Err(Error::argument("density.c must be nonnegative"));
                }
            }
            Some(Density::Step { pieces }) => {
                for (i, p) in pieces.iter().enumerate() {
                    if !(0.0 <= p.start && p.start < p.end && p.end <= TAU) {
                        return Err(Error::argument(format!(
                            "density.pieces[{i}] must satisfy 0 <= start < end <= 2π"
                        )));
                    }
                    if !(p.slope >= 0.0 && p.slope.is_finite()) {
                        return Err(Error::argument(format!(
                            "density.pieces[{i}].slope must be nonnegative"
                        )));
                    }
                }
            }
            Some(Density::PowerCusp(c)) => {
                if !(c.exponent > 0.0 && c.exponent.is_finite()) {
                    return Err(Error::argument("density.exponent must be positive"));
                }
                if !c.center.is_finite() {
                    return Err(Error::argument("density.center is not finite"));
                }
                if let Some(s) = c.scale {
                    if !(s > 0.0 && s.is_finite()) {
                        return Err(Error::argument("density.scale must be positive"));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn total_mass(&self) -> f64 {
        let atoms: f64 = self.atoms.iter().map(|a| a.mass).sum();
        atoms + self.density_mass()
    }

    fn density_mass(&self) -> f64 {
        match &self.density {
            None => 0.0,
            Some(Density::Uniform { c }) => TAU * c,
            Some(Density::Step { pieces }) => pieces.iter().map(|p| p.slope * (p.end - p.start)).sum(),
            Some(Density::PowerCusp(c)) => c.mass(),
        }
    }

    /// Density value at `t`, ignoring atoms.
    pub fn density_at(&self, t: f64) -> f64 {
        let t = normalize_angle(t);
        match &self.density {
            None => 0.0,
            Some(Density::Uniform { c }) => *c,
            Some(Density::Step { pieces }) => step_density(pieces, t),
            Some(Density::PowerCusp(c)) => c.density(t),
        }
    }

    /// `μ(e^{is}, s ∈ (0, t])` plus any atom at angle 0, for `t ∈ [0, 2π]`;
    /// nondecreasing with `υ(0)` equal to the atom mass at 0 (zero otherwise).
    pub fn upsilon(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, TAU);
        let atoms: f64 = self
            .atoms
            .iter()
            .filter(|a| normalize_angle(a.angle) <= t)
            .map(|a| a.mass)
            .sum();
        let dens = match &self.density {
            None => 0.0,
            Some(Density::Uniform { c }) => c * t,
            Some(Density::Step { pieces }) => pieces
                .iter()
                .map(|p| p.slope * (t.min(p.end) - p.start).max(0.0))
                .sum(),
            Some(Density::PowerCusp(c)) => c.primitive(t) - c.primitive(0.0),
        };
        atoms + dens
    }

    /// `∫ f dμ` over atoms and density.
    pub fn integrate<F>(&self, f: F, focus: Option<Focus>, opts: &QuadOptions) -> Result<Integral>
    where
        F: Fn(CircleAngle) -> Complex64,
    {
        self.integrate_impl(&f, focus, 0.0, opts)
    }

    /// Integral over the circle with the open arc `|t - center| < half_width`
    /// removed.
    pub fn integrate_outside<F>(&self, f: F, center: f64, half_width: f64, opts: &QuadOptions) -> Result<Integral>
    where
        F: Fn(CircleAngle) -> Complex64,
    {
        if !(half_width >= 0.0 && half_width < PI) {
            return Err(Error::argument("excluded arc needs a half width in [0, π)"));
        }
        let focus = Focus {
            angle: center,
            width: half_width,
        };
        self.integrate_impl(&f, Some(focus), half_width, opts)
    }

    fn integrate_impl<F>(&self, f: &F, focus: Option<Focus>, hole: f64, opts: &QuadOptions) -> Result<Integral>
    where
        F: Fn(CircleAngle) -> Complex64,
    {
        let mut total = Integral::default();
        for a in &self.atoms {
            if let Some(fc) = focus {
                if hole > 0.0 && angle_diff(a.angle, fc.angle).abs() < hole {
                    continue;
                }
            }
            let v = f(CircleAngle::exact(a.angle)) * a.mass;
            total.value += v;
            total.abs_value += v.norm();
        }
        let density = match (&self.density, focus) {
            (None, _) => None,
            (Some(Density::Uniform { c }), _) if *c == 0.0 => None,
            (Some(d), Some(fc)) => Some(self.integrate_paired(d, f, fc, hole, opts)?),
            (Some(d), None) => Some(self.integrate_plain(d, f, opts)?),
        };
        if let Some(d) = density {
            total.add(&d, 1.0);
        }
        if total.error > opts.fail_tol * total.abs_value {
            return Err(Error::numeric("measure integral above error threshold", total.error));
        }
        Ok(total)
    }

    /// Density integral without a preferred angle.
    fn integrate_plain<F>(&self, density: &Density, f: &F, opts: &QuadOptions) -> Result<Integral>
    where
        F: Fn(CircleAngle) -> Complex64,
    {
        let mut acc = Integral::default();
        match density {
            Density::Uniform { c } => {
                let r = integrate(|u| f(CircleAngle::new(0.0, u)), 0.0, TAU, &[], opts)?;
                acc.add(&r, *c);
            }
            Density::Step { pieces } => {
                for p in pieces.iter().filter(|p| p.slope != 0.0) {
                    let r = integrate(|u| f(CircleAngle::new(p.start, u)), 0.0, p.end - p.start, &[], opts)?;
                    acc.add(&r, p.slope);
                }
            }
            Density::PowerCusp(cusp) => {
                let alpha = cusp.exponent;
                let c = cusp.center;
                let bp = geometric_ladder(0.0);
                for side in [1.0, -1.0] {
                    let r = if alpha < 1.0 {
                        // s = d^α turns α d^{α-1} dd into ds
                        let sbp: Vec<f64> = bp.iter().map(|d| d.powf(alpha)).collect();
                        let g = |s: f64| f(CircleAngle::new(c, side * s.powf(1.0 / alpha)));
                        integrate(g, 0.0, PI.powf(alpha), &sbp, opts)?
                    } else {
                        let g = |d: f64| f(CircleAngle::new(c, side * d)) * (alpha * d.powf(alpha - 1.0));
                        integrate(g, 0.0, PI, &bp, opts)?
                    };
                    acc.add(&r, cusp.scale());
                }
            }
        }
        Ok(acc)
    }

    /// Density integral in the distance `u ∈ [hole, π]` from the focus angle,
    /// with both sides `θ ± u` summed at each node. Integrands odd about the
    /// focus then cancel node by node instead of across the quadrature.
    fn integrate_paired<F>(&self, density: &Density, f: &F, focus: Focus, hole: f64, opts: &QuadOptions) -> Result<Integral>
    where
        F: Fn(CircleAngle) -> Complex64,
    {
        let theta = focus.angle;
        let mut bp = ladder(0.0, focus.width, 0.0, PI);
        let mut acc = Integral::default();
        match density {
            Density::Uniform { c } => {
                let g = |u: f64| pair(f(CircleAngle::new(theta, u)), f(CircleAngle::new(theta, -u)));
                let r = integrate_scaled(g, hole, PI, &bp, opts)?;
                acc.add(&r, *c);
            }
            Density::Step { pieces } => {
                for p in pieces {
                    bp.push(angle_diff(p.start, theta).abs());
                    bp.push(angle_diff(p.end, theta).abs());
                }
                let g = |u: f64| {
                    let side = |sign: f64| {
                        let t = CircleAngle::new(theta, sign * u);
                        let rho = step_density(pieces, t.value());
                        if rho != 0.0 {
                            f(t) * rho
                        } else {
                            Complex64::new(0.0, 0.0)
                        }
                    };
                    pair(side(1.0), side(-1.0))
                };
                let r = integrate_scaled(g, hole, PI, &bp, opts)?;
                acc.add(&r, 1.0);
            }
            Density::PowerCusp(cusp) => {
                let alpha = cusp.exponent;
                let u0 = angle_diff(cusp.center, theta).abs();
                if u0 == 0.0 && alpha < 1.0 {
                    // s = u^α removes the singular factor at the cusp
                    bp.extend(geometric_ladder(0.0));
                    let sbp: Vec<f64> = bp.iter().map(|d| d.powf(alpha)).collect();
                    let g = |s: f64| {
                        let u = s.powf(1.0 / alpha);
                        pair(f(CircleAngle::new(theta, u)), f(CircleAngle::new(theta, -u)))
                    };
                    let r = integrate_scaled(g, hole.powf(alpha), PI.powf(alpha), &sbp, opts)?;
                    acc.add(&r, cusp.scale());
                } else if u0 == 0.0 || alpha >= 1.0 {
                    bp.extend(geometric_ladder(u0));
                    let g = |u: f64| {
                        let side = |sign: f64| {
                            let t = CircleAngle::new(theta, sign * u);
                            let d = t.diff_from(cusp.center).abs();
                            f(t) * (alpha * d.powf(alpha - 1.0))
                        };
                        pair(side(1.0), side(-1.0))
                    };
                    let r = integrate_scaled(g, hole, PI, &bp, opts)?;
                    acc.add(&r, cusp.scale());
                } else {
                    // weak singularity away from the focus: integrate the flanks
                    return self.integrate_plain(density, f, opts);
                }
            }
        }
        Ok(acc)
    }

    /// `T(z) = (1/2π) ∫ (e^{it} + z)/(e^{it} - z) dμ(t)`.
    pub fn transform(&self, z: &DiskPoint) -> Result<Complex64> {
        self.transform_with(z, &QuadOptions::default())
    }

    pub fn transform_with(&self, z: &DiskPoint, opts: &QuadOptions) -> Result<Complex64> {
        if z.gap() == 1.0 {
            return Ok(Complex64::new(self.total_mass() / TAU, 0.0));
        }
        let r = z.modulus();
        let one_minus = z.one_minus_abs_sq();
        let theta = z.angle();
        // (e^{it}+z)/(e^{it}-z) = (1 - |z|^2 + 2i r sin(θ - t)) / |e^{it} - z|^2
        let kernel = |t: CircleAngle| {
            let d = z.dist_sq_to(t);
            Complex64::new(one_minus, -2.0 * r * t.diff_from(theta).sin()) / d
        };
        let uniform = match &self.density {
            Some(Density::Uniform { c }) => Some(*c),
            _ => None,
        };
        let value = match uniform {
            // mean value property: the uniform part contributes exactly c
            Some(c) => {
                let atoms_only = HerglotzMeasure {
                    atoms: self.atoms.clone(),
                    density: None,
                };
                atoms_only.integrate(kernel, None, opts)?.value / TAU + c
            }
            None => self.integrate(kernel, Focus::for_point(z), opts)?.value / TAU,
        };
        Ok(value)
    }

    /// `T'(z) = (1/2π) ∫ 2 e^{it}/(e^{it} - z)^2 dμ(t)`.
    pub fn transform_derivative(&self, z: &DiskPoint) -> Result<Complex64> {
        self.transform_derivative_with(z, &QuadOptions::default())
    }

    pub fn transform_derivative_with(&self, z: &DiskPoint, opts: &QuadOptions) -> Result<Complex64> {
        let kernel = |t: CircleAngle| {
            let w = z.offset_from_circle(t);
            Complex64::from_polar(2.0, t.value()) / (w * w)
        };
        let measure = match &self.density {
            Some(Density::Uniform { .. }) => HerglotzMeasure {
                atoms: self.atoms.clone(),
                density: None,
            },
            _ => self.clone(),
        };
        Ok(measure.integrate(kernel, Focus::for_point(z), opts)?.value / TAU)
    }

    /// The measure `ν(E) = μ(E + α)`, whose transform is `T(e^{iα} z)`.
    pub fn rotated(&self, alpha: f64) -> Self {
        let atoms = self
            .atoms
            .iter()
            .map(|a| Atom {
                angle: normalize_angle(a.angle - alpha),
                mass: a.mass,
            })
            .collect();
        let density = self.density.as_ref().map(|d| match d {
            Density::Uniform { c } => Density::Uniform { c: *c },
            Density::Step { pieces } => {
                let mut out = Vec::new();
                for p in pieces {
                    let start = normalize_angle(p.start - alpha);
                    let end = start + (p.end - p.start);
                    if end <= TAU {
                        out.push(StepPiece { start, end, slope: p.slope });
                    } else {
                        out.push(StepPiece { start, end: TAU, slope: p.slope });
                        out.push(StepPiece { start: 0.0, end: end - TAU, slope: p.slope });
                    }
                }
                Density::Step { pieces: out }
            }
            Density::PowerCusp(c) => Density::PowerCusp(CuspProfile {
                center: normalize_angle(c.center - alpha),
                ..*c
            }),
        });
        Self { atoms, density }
    }

    /// Whether the measure is invariant under `t ↦ 2π - t`.
    pub fn is_conjugation_symmetric(&self) -> bool {
        let atoms_ok = self.atoms.iter().all(|a| {
            self.atoms.iter().any(|b| {
                angle_diff(b.angle, -a.angle).abs() < 1e-12 && (b.mass - a.mass).abs() < 1e-12
            })
        });
        let dens_ok = match &self.density {
            None | Some(Density::Uniform { .. }) => true,
            Some(Density::PowerCusp(c)) => {
                let n = normalize_angle(c.center);
                n.abs() < 1e-12 || (n - PI).abs() < 1e-12
            }
            Some(Density::Step { pieces }) => pieces.iter().all(|p| {
                pieces.iter().any(|q| {
                    (q.start - (TAU - p.end)).abs() < 1e-12
                        && (q.end - (TAU - p.start)).abs() < 1e-12
                        && (q.slope - p.slope).abs() < 1e-12
                })
            }),
        };
        atoms_ok && dens_ok
    }
}

fn pair(a: Complex64, b: Complex64) -> (Complex64, f64) {
    (a + b, a.norm() + b.norm())
}

/// Density of a step profile at `t`, pieces taken half open.
fn step_density(pieces: &[StepPiece], t: f64) -> f64 {
    let t = normalize_angle(t);
    pieces
        .iter()
        .filter(|p| p.start <= t && t < p.end)
        .map(|p| p.slope)
        .sum()
}

/// Breakpoints `center ± (π/4)·4^{-j}` inside `[0, π]`, refining towards `center`.
fn geometric_ladder(center: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut w = PI / 4.0;
    while w > 1e-12 {
        out.push(center + w);
        if center > 0.0 {
            out.push(center - w);
        }
        w /= 4.0;
    }
    out.retain(|&p| p > 0.0 && p < PI);
    out
}
