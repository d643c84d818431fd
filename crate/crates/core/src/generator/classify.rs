use super::{DenjoyWolff, Generator};
use crate::error::{Error, Result};
use crate::unitdisc::{angle_diff, radial_grid, BoundaryPoint, Extrapolator, RadialLimitEstimate, RadialSample};
use num_complex::Complex64;
use serde::Serialize;

/// Default threshold on `|lim G(z)(x - z)|` above which a point is a pole.
pub const TOL_POLE: f64 = 1e-4;

/// Largest `|Im ℓ| / (1 + |ℓ|)` accepted for a real dilation.
const TOL_DILATION_IMAG: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryTag {
    #[serde(rename = "pole")]
    RegularPole,
    #[serde(rename = "null_point")]
    RegularNullPoint,
    Other,
    Inconclusive,
}

impl BoundaryTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            BoundaryTag::RegularPole => "pole",
            BoundaryTag::RegularNullPoint => "null_point",
            BoundaryTag::Other => "other",
            BoundaryTag::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryClassification {
    pub angle: f64,
    pub tag: BoundaryTag,
    /// `lim G(z)(x - z)` along the radius.
    pub a: Complex64,
    /// `|a|`, set for poles.
    pub mass: Option<f64>,
    /// `Re lim G(z)/(z - x)`, set for null points.
    pub dilation: Option<f64>,
    /// `Im lim G(z)/(z - x)` when that limit converged.
    pub dilation_imag: Option<f64>,
    pub note: Option<String>,
    /// Extrapolation of `G((1-ε)x)·εx`.
    pub pole_limit: RadialLimitEstimate,
    /// Extrapolation of `-G((1-ε)x)/(εx)`.
    pub null_limit: RadialLimitEstimate,
}

impl BoundaryClassification {
    pub fn is_pole(&self) -> bool {
        self.tag == BoundaryTag::RegularPole
    }

    pub fn is_null_point(&self) -> bool {
        self.tag == BoundaryTag::RegularNullPoint
    }

    /// `lim G(z)(z - x)`, the opposite orientation of [`Self::a`].
    pub fn a_inward(&self) -> Complex64 {
        -self.a
    }

    /// Residual of the estimate that decided the tag.
    pub fn residual(&self) -> f64 {
        match self.tag {
            BoundaryTag::RegularNullPoint => self.null_limit.residual,
            _ => self.pole_limit.residual,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifyOptions {
    /// Radial grid bounds; `None` picks the generator's default.
    pub grid: Option<(u32, u32)>,
    pub tol_pole: f64,
    pub extrapolator: Extrapolator,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self {
            grid: None,
            tol_pole: TOL_POLE,
            extrapolator: Extrapolator::default(),
        }
    }
}

/// Left and right sides of `Σ A_j / (2|x_j - τ|^2) ≤ Re p(0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PoleBudget {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl Generator {
    pub fn grid(&self, bounds: Option<(u32, u32)>) -> Result<Vec<f64>> {
        let (lo, hi) = bounds.unwrap_or_else(|| self.default_grid_bounds());
        radial_grid(lo, hi)
    }

    /// `G((1-ε)x)` on the grid; stops at the first failed evaluation.
    fn radial_values(&self, x: BoundaryPoint, grid: &[f64]) -> (Vec<RadialSample>, Option<Error>) {
        let mut out = Vec::with_capacity(grid.len());
        for &eps in grid {
            let v = x.radial(eps).and_then(|z| self.evaluate(&z));
            match v {
                Ok(v) => out.push(RadialSample::new(eps, v)),
                Err(e) => return (out, Some(e)),
            }
        }
        (out, None)
    }

    pub fn classify_boundary(&self, x: BoundaryPoint) -> BoundaryClassification {
        self.classify_boundary_with(x, &ClassifyOptions::default())
            .expect("default options are valid")
    }

    /// Three-stage radial classification.
    ///
    /// A converged `|lim G(z)(x - z)| > tol_pole` is a regular pole; otherwise a
    /// converged real `lim G(z)/(z - x)` is a regular null point; otherwise the
    /// point is `Other` when `G` stays bounded and `Inconclusive` when nothing
    /// converged.
    pub fn classify_boundary_with(&self, x: BoundaryPoint, opts: &ClassifyOptions) -> Result<BoundaryClassification> {
        if !(opts.tol_pole > 0.0) {
            return Err(Error::argument("tol_pole must be positive"));
        }
        let grid = self.grid(opts.grid)?;
        let blank = RadialLimitEstimate {
            value: Complex64::new(f64::NAN, f64::NAN),
            residual: f64::INFINITY,
            converged: false,
            divergence_exponent: f64::NAN,
            depth: 0,
        };
        let mut out = BoundaryClassification {
            angle: x.angle(),
            tag: BoundaryTag::Other,
            a: Complex64::new(f64::NAN, f64::NAN),
            mass: None,
            dilation: None,
            dilation_imag: None,
            note: None,
            pole_limit: blank,
            null_limit: blank,
        };
        if let DenjoyWolff::Boundary(t) = self.tau {
            if angle_diff(t.angle(), x.angle()).abs() < 1e-12 {
                out.note = Some("denjoy_wolff".into());
                return Ok(out);
            }
        }

        let (values, failure) = self.radial_values(x, &grid);
        if values.len() < 4 {
            out.tag = BoundaryTag::Inconclusive;
            out.note = Some(match failure {
                Some(e) => format!("evaluation failed: {e}"),
                None => "too few radial samples".into(),
            });
            return Ok(out);
        }
        let xc = x.to_complex();
        let scaled = |f: &dyn Fn(Complex64, f64) -> Complex64| -> Vec<RadialSample> {
            values
                .iter()
                .map(|s| RadialSample::new(s.eps, f(s.value, s.eps)))
                .collect()
        };
        let pole = opts
            .extrapolator
            .estimate(&scaled(&|g, eps| g * xc * eps))?;
        let null = opts
            .extrapolator
            .estimate(&scaled(&|g, eps| -g / (xc * eps)))?;
        let bounded = opts.extrapolator.estimate(&values)?;
        out.pole_limit = pole;
        out.null_limit = null;
        out.a = pole.value;
        if let Some(e) = failure {
            out.note = Some(format!("grid truncated at eps = {:e}: {e}", values.last().map_or(0.0, |s| s.eps / 2.0)));
        }

        if pole.converged && pole.value.norm() > opts.tol_pole {
            out.tag = BoundaryTag::RegularPole;
            out.mass = Some(pole.value.norm());
            return Ok(out);
        }
        if null.converged {
            let l = null.value;
            out.dilation_imag = Some(l.im);
            if l.im.abs() <= TOL_DILATION_IMAG * (1.0 + l.norm()) {
                out.tag = BoundaryTag::RegularNullPoint;
                out.dilation = Some(l.re);
            } else {
                out.tag = BoundaryTag::Inconclusive;
                out.note = Some("dilation limit is not real".into());
            }
            return Ok(out);
        }
        out.tag = if bounded.converged || pole.converged {
            BoundaryTag::Other
        } else {
            BoundaryTag::Inconclusive
        };
        Ok(out)
    }

    /// `L = lim ½ p(z)(1 - conj(x) z)` along the radius, where `1 - conj(x) z = ε`.
    pub fn cowen_pommerenke_l(&self, x: BoundaryPoint) -> Result<f64> {
        let grid = self.grid(None)?;
        let samples = grid
            .iter()
            .map(|&eps| Ok(RadialSample::new(eps, 0.5 * eps * self.p(&x.radial(eps)?)?)))
            .collect::<Result<Vec<_>>>()?;
        let est = Extrapolator::default().estimate(&samples)?;
        if !est.converged {
            return Err(Error::numeric("Cowen–Pommerenke limit did not converge", est.residual));
        }
        Ok(est.value.re)
    }

    /// Check `Σ A_j / (2|x_j - τ|^2) ≤ Re p(0)` for poles `(x_j, A_j)`.
    pub fn pole_budget_check(&self, poles: &[(BoundaryPoint, f64)]) -> Result<PoleBudget> {
        let tau = self.tau.to_complex();
        let lhs = poles
            .iter()
            .map(|(x, mass)| mass / (2.0 * (x.to_complex() - tau).norm_sqr()))
            .sum::<f64>();
        let rhs = self.p(&crate::unitdisc::DiskPoint::origin())?.re;
        Ok(PoleBudget {
            lhs,
            rhs,
            holds: lhs <= rhs + 1e-8,
        })
    }
}
