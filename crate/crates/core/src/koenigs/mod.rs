//! Königs linearizer `h` of the semigroup generated by `G`.
//!
//! Interior regime: `h(φ_t) = e^{G'(τ)t} h`, `h(τ) = 0`, `h'(τ) = 1`. With
//! `τ = 0`, `log(h(z)/z) = ∫_0^1 [p(0)/p(uz) - 1] du/u`; other interior `τ`
//! are conjugated to the origin. Boundary regime: `h(φ_t) = h + t`,
//! `h(z) = ∫_0^z dζ/G(ζ)`. Both integrals run along the straight segment from
//! the origin, split at its midpoint so the half near `z` is parametrized by
//! the distance to the circle.

use crate::error::{Error, Result};
use crate::flow::BetaVerdict;
use crate::generator::{BoundaryClassification, DenjoyWolff, Generator};
use crate::quadrature::{integrate, ladder, QuadOptions};
use crate::unitdisc::{
    extrapolate_log_rate, radial_grid, BoundaryPoint, DiskPoint, Extrapolator, Moebius, RadialLimitEstimate,
    RadialSample,
};
use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Interior,
    Boundary,
}

#[derive(Debug, Clone)]
pub struct KoenigsMap {
    g: Generator,
    regime: Regime,
    /// Conjugation `m(z) = (z - τ)/(1 - conj(τ) z)`, absent when `τ = 0` or
    /// `τ` is on the circle.
    moebius: Option<Moebius>,
    /// `1 - |τ|^2`; `h = scale · h̃ ∘ m`.
    scale: f64,
    /// `p(τ)`, interior regime only.
    p_tau: Complex64,
    quad: QuadOptions,
}

/// `∫_0^1 f(ζ(u)) du` along the segment `ζ(u) = u·w`, with the outer half
/// parametrized by `s = 1 - u` and breakpoints clustering where `ζ` meets the
/// circle.
fn segment_integral<F>(w: &DiskPoint, f: F, opts: &QuadOptions) -> Result<Complex64>
where
    F: Fn(&DiskPoint, f64) -> Result<Complex64>,
{
    let failed = std::cell::Cell::new(None);
    let guard = |r: Result<Complex64>| match r {
        Ok(v) => v,
        Err(e) => {
            failed.set(Some(e));
            Complex64::new(f64::NAN, f64::NAN)
        }
    };
    let wc = w.to_complex();
    let inner = integrate(
        |u| guard(DiskPoint::from_complex(wc * u).and_then(|z| f(&z, u))),
        0.0,
        0.5,
        &[],
        opts,
    );
    let eps = w.gap();
    let outer = integrate(
        |s| {
            // |ζ| = (1 - s)(1 - ε)
            let gap = s + eps - s * eps;
            guard(DiskPoint::from_polar_gap(gap, w.angle()).and_then(|z| f(&z, 1.0 - s)))
        },
        0.0,
        0.5,
        &ladder(0.0, eps, 0.0, 0.5),
        opts,
    );
    if let Some(e) = failed.take() {
        return Err(e);
    }
    Ok(inner?.value + outer?.value)
}

impl KoenigsMap {
    pub fn new(g: &Generator) -> Result<Self> {
        let quad = QuadOptions {
            abs_tol: 1e-15,
            ..QuadOptions::default()
        };
        Self::with_options(g, quad)
    }

    pub fn with_options(g: &Generator, quad: QuadOptions) -> Result<Self> {
        let (regime, moebius, scale, p_tau) = match g.tau() {
            DenjoyWolff::Interior(t) => {
                let p_tau = g.p(&t)?;
                if !(p_tau.norm() > 0.0) {
                    return Err(Error::argument("G vanishes identically"));
                }
                let m = (t.modulus() > 0.0).then(|| Moebius::to_origin(&t));
                (Regime::Interior, m, t.one_minus_abs_sq(), p_tau)
            }
            DenjoyWolff::Boundary(_) => {
                let p0 = g.p(&DiskPoint::origin())?;
                if !(p0.norm() > 0.0) {
                    return Err(Error::argument("G vanishes identically"));
                }
                (Regime::Boundary, None, 1.0, Complex64::new(f64::NAN, f64::NAN))
            }
        };
        Ok(Self {
            g: g.clone(),
            regime,
            moebius,
            scale,
            p_tau,
            quad,
        })
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn generator(&self) -> &Generator {
        &self.g
    }

    /// `G'(τ) = -(1 - |τ|^2) p(τ)` in the interior regime.
    pub fn g_prime_tau(&self) -> Option<Complex64> {
        (self.regime == Regime::Interior).then(|| -self.scale * self.p_tau)
    }

    fn to_model(&self, z: &DiskPoint) -> Result<DiskPoint> {
        match &self.moebius {
            Some(m) => m.forward_point(z),
            None => Ok(*z),
        }
    }

    fn from_model(&self, w: &DiskPoint) -> Result<DiskPoint> {
        match &self.moebius {
            Some(m) => m.inverse_point(w),
            None => Ok(*w),
        }
    }

    /// `log(h̃(w)/w)` for the conjugated star-like problem.
    fn log_ratio(&self, w: &DiskPoint) -> Result<Complex64> {
        segment_integral(
            w,
            |zeta, u| {
                let q = self.p_tau / self.g.p(&self.from_model(zeta)?)?;
                Ok((q - 1.0) / u)
            },
            &self.quad,
        )
    }

    /// `h(z)` and `h'(z)`.
    pub fn evaluate(&self, z: &DiskPoint) -> Result<(Complex64, Complex64)> {
        match self.regime {
            Regime::Interior => {
                let w = self.to_model(z)?;
                let e = self.log_ratio(&w)?.exp();
                let wc = w.to_complex();
                let h = self.scale * wc * e;
                // h̃'(w) = (h̃/w)·p̃(0)/p̃(w)
                let dh_model = e * self.p_tau / self.g.p(z)?;
                let dm = match &self.moebius {
                    Some(m) => m.forward_derivative(z.to_complex()),
                    None => Complex64::new(1.0, 0.0),
                };
                Ok((h, self.scale * dh_model * dm))
            }
            Regime::Boundary => {
                let zc = z.to_complex();
                let i = segment_integral(z, |zeta, _| Ok(1.0 / self.g.evaluate(zeta)?), &self.quad)?;
                Ok((zc * i, 1.0 / self.g.evaluate(z)?))
            }
        }
    }

    pub fn value(&self, z: &DiskPoint) -> Result<Complex64> {
        Ok(self.evaluate(z)?.0)
    }

    pub fn derivative(&self, z: &DiskPoint) -> Result<Complex64> {
        Ok(self.evaluate(z)?.1)
    }

    /// Continuous `log h` for `τ = 0`: `log z + ∫_0^1 [p(0)/p(uz) - 1] du/u`,
    /// with `arg z` taken in `[0, 2π)`.
    pub fn log_value(&self, z: &DiskPoint) -> Result<Complex64> {
        self.require_star_like()?;
        let lz = Complex64::new(z.modulus().ln(), z.angle());
        Ok(lz + self.log_ratio(z)?)
    }

    fn require_star_like(&self) -> Result<()> {
        if self.regime != Regime::Interior || self.moebius.is_some() {
            return Err(Error::argument("operation needs an interior Denjoy–Wolff point at the origin"));
        }
        Ok(())
    }

    /// `|h'G - G'(τ)h|/(1 + |h|)` in the interior regime, `|h'G - 1|` on the
    /// boundary.
    pub fn identity_residual(&self, z: &DiskPoint) -> Result<f64> {
        let (h, dh) = self.evaluate(z)?;
        let gz = self.g.evaluate(z)?;
        Ok(match self.g_prime_tau() {
            Some(gp) => (dh * gz - gp * h).norm() / (1.0 + h.norm()),
            None => (dh * gz - 1.0).norm(),
        })
    }

    /// Largest identity residual over `n_r` radii in `(0, 1)` times `n_theta`
    /// angles.
    pub fn max_identity_residual(&self, n_r: usize, n_theta: usize) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for i in 1..=n_r {
            let r = 0.95 * i as f64 / n_r as f64;
            for j in 0..n_theta {
                let a = std::f64::consts::TAU * (j as f64 + 0.5) / n_theta as f64;
                worst = worst.max(self.identity_residual(&DiskPoint::from_polar_gap(1.0 - r, a)?)?);
            }
        }
        Ok(worst)
    }
}

/// Convenience constructor matching the operation name.
pub fn koenigs(g: &Generator) -> Result<KoenigsMap> {
    KoenigsMap::new(g)
}

#[derive(Debug, Clone, PartialEq)]
pub struct HBetaReport {
    pub angle: f64,
    pub verdict: BetaVerdict,
    /// Radial limit of `h`.
    pub h_at_x: Option<Complex64>,
    /// Radial limit of `|h'(z)|/|x - z|`.
    pub beta_mass: Option<f64>,
    /// Radial limit of `h'(z)/(z - x)`.
    pub second_derivative: Option<Complex64>,
    /// `h(x)G'(τ)/A` (interior) or `1/A` (boundary), `A = lim G(z)(z - x)`.
    pub prediction: Option<Complex64>,
    pub mismatch: Option<f64>,
    /// `2|h(x)||A|`, for `τ = 0`.
    pub beta_number: Option<f64>,
    pub h_limit: RadialLimitEstimate,
    pub derivative_limit: RadialLimitEstimate,
}

impl KoenigsMap {
    fn radial<F>(&self, x: BoundaryPoint, grid: &[f64], f: F) -> Result<Vec<RadialSample>>
    where
        F: Fn(f64, Complex64, Complex64) -> Complex64,
    {
        grid.iter()
            .map(|&eps| {
                let (h, dh) = self.evaluate(&x.radial(eps)?)?;
                Ok(RadialSample::new(eps, f(eps, h, dh)))
            })
            .collect()
    }

    /// β-point analysis of `h` at `x`, classifying `x` first.
    pub fn h_beta_point(&self, x: BoundaryPoint) -> Result<HBetaReport> {
        let class = self.g.classify_boundary(x);
        let grid = self.g.default_grid_bounds();
        self.h_beta_point_with(x, &class, grid)
    }

    /// The verdict rests on `h` alone: `h'((1-ε)x)/ε` must have a finite
    /// radial limit. The classification supplies `A` for the predictions.
    pub fn h_beta_point_with(
        &self,
        x: BoundaryPoint,
        class: &BoundaryClassification,
        grid: (u32, u32),
    ) -> Result<HBetaReport> {
        let grid = radial_grid(grid.0, grid.1)?;
        let xc = x.to_complex();
        let mut hs = Vec::with_capacity(grid.len());
        let mut ds = Vec::with_capacity(grid.len());
        for &eps in &grid {
            match self.evaluate(&x.radial(eps)?) {
                Ok((h, dh)) => {
                    hs.push(RadialSample::new(eps, h));
                    ds.push(RadialSample::new(eps, -dh / (eps * xc)));
                }
                Err(_) => break,
            }
        }
        let blank = RadialLimitEstimate {
            value: Complex64::new(f64::NAN, f64::NAN),
            residual: f64::INFINITY,
            converged: false,
            divergence_exponent: f64::NAN,
            depth: 0,
        };
        let mut report = HBetaReport {
            angle: x.angle(),
            verdict: BetaVerdict::Inconclusive,
            h_at_x: None,
            beta_mass: None,
            second_derivative: None,
            prediction: None,
            mismatch: None,
            beta_number: None,
            h_limit: blank,
            derivative_limit: blank,
        };
        if hs.len() < 4 {
            return Ok(report);
        }
        let ex = Extrapolator::default();
        let h = ex.estimate(&hs)?;
        let d = ex.estimate(&ds)?;
        report.h_limit = h;
        report.derivative_limit = d;
        if d.diverges() {
            report.verdict = BetaVerdict::NotBetaPoint;
            return Ok(report);
        }
        if !(h.converged && d.converged) {
            return Ok(report);
        }
        report.verdict = BetaVerdict::BetaPoint;
        report.h_at_x = Some(h.value);
        report.beta_mass = Some(d.value.norm());
        report.second_derivative = Some(d.value);
        if class.is_pole() {
            let a = class.a_inward();
            let pred = match self.g_prime_tau() {
                Some(gp) => h.value * gp / a,
                None => 1.0 / a,
            };
            report.prediction = Some(pred);
            report.mismatch = Some((d.value - pred).norm() / pred.norm());
            if self.require_star_like().is_ok() {
                report.beta_number = Some(2.0 * h.value.norm() * a.norm());
            }
        }
        Ok(report)
    }

    /// `β_Ω(0, h(x)) = 2|h(x)||A|` for `τ = 0` at a β-point `x`.
    pub fn beta_number(&self, x: BoundaryPoint) -> Result<f64> {
        self.require_star_like()?;
        let r = self.h_beta_point(x)?;
        r.beta_number
            .ok_or_else(|| Error::argument(format!("angle {} is not a β-point of h at a regular pole", x.angle())))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NullPointAsymptotics {
    pub dilation: f64,
    /// Limit of `log|h(rx)|/(Re G'(τ) log(1-r))` (interior) or
    /// `Re h(rx)/log(1-r)` (boundary).
    pub rho: RadialLimitEstimate,
    /// `ρ ℓ`, which should be 1.
    pub rho_times_dilation: f64,
    /// Limit of `h'(z)(z - x)/h(z)` (interior) or `h'(z)(z - x)` (boundary).
    pub a_limit: RadialLimitEstimate,
    /// `G'(τ)/ℓ` or `1/ℓ`.
    pub a_predicted: Complex64,
    pub a_mismatch: f64,
    /// Log-log growth rate of `|h|`; positive when `|h| → ∞`.
    pub h_divergence_exponent: f64,
}

impl KoenigsMap {
    /// Logarithmic asymptotics of `h` at a regular null point with `ℓ > 0`.
    pub fn null_point_asymptotics(&self, x: BoundaryPoint) -> Result<NullPointAsymptotics> {
        let class = self.g.classify_boundary(x);
        let ell = match class.dilation {
            Some(l) if class.is_null_point() && l > 0.0 => l,
            _ => {
                return Err(Error::argument(format!(
                    "angle {} is not a regular null point with positive dilation",
                    x.angle()
                )))
            }
        };
        let grid = {
            let (lo, hi) = self.g.default_grid_bounds();
            radial_grid(lo, hi)?
        };
        let xc = x.to_complex();
        let gp = self.g_prime_tau();
        let samples = self.radial(x, &grid, |eps, h, dh| {
            let a = dh * (-eps * xc);
            match gp {
                Some(_) => a / h,
                None => a,
            }
        })?;
        let hs = self.radial(x, &grid, |_, h, _| h)?;
        let quotient: Vec<(f64, f64)> = hs
            .iter()
            .map(|s| {
                let q = match gp {
                    Some(gp) => s.value.norm().ln() / (gp.re * s.eps.ln()),
                    None => s.value.re / s.eps.ln(),
                };
                (s.eps, q)
            })
            .collect();
        let rho = extrapolate_log_rate(&quotient, 1e-4)?;
        let a_limit = Extrapolator::default().estimate(&samples)?;
        let a_predicted = match gp {
            Some(gp) => gp / ell,
            None => Complex64::new(1.0 / ell, 0.0),
        };
        let h_growth = Extrapolator::default().estimate(&hs)?;
        Ok(NullPointAsymptotics {
            dilation: ell,
            rho,
            rho_times_dilation: rho.value.re * ell,
            a_limit,
            a_predicted,
            a_mismatch: (a_limit.value - a_predicted).norm() / a_predicted.norm(),
            h_divergence_exponent: h_growth.divergence_exponent,
        })
    }

    /// `υ(t) = lim arg h((1-ε)e^{it})` on the continuous branch fixed by
    /// `arg h(r) → 0` along the positive radius; needs `τ = 0`.
    pub fn boundary_argument(&self, t: f64) -> Result<RadialLimitEstimate> {
        self.require_star_like()?;
        let x = BoundaryPoint::new(t);
        let grid = {
            let (lo, hi) = self.g.default_grid_bounds();
            radial_grid(lo, hi.min(30))?
        };
        let samples = grid
            .iter()
            .map(|&eps| Ok(RadialSample::new(eps, Complex64::new(self.log_value(&x.radial(eps)?)?.im, 0.0))))
            .collect::<Result<Vec<_>>>()?;
        Extrapolator::default().estimate(&samples)
    }

    /// Radial limit of `|h|` at angle `t`.
    pub fn boundary_modulus(&self, t: f64) -> Result<RadialLimitEstimate> {
        let x = BoundaryPoint::new(t);
        let grid = {
            let (lo, hi) = self.g.default_grid_bounds();
            radial_grid(lo, hi.min(30))?
        };
        let samples = self.radial(x, &grid, |_, h, _| Complex64::new(h.norm(), 0.0))?;
        Extrapolator::default().estimate(&samples)
    }

    /// `theta,upsilon,abs_h` rows for `n` equally spaced angles, with the
    /// largest defining-identity residual in a footer.
    pub fn boundary_csv(&self, n: usize) -> Result<String> {
        let mut out = String::from("theta,upsilon,abs_h\n");
        for x in BoundaryPoint::probes(n) {
            let t = x.angle();
            let ups = self.boundary_argument(t)?;
            let m = self.boundary_modulus(t)?;
            let fmt = |e: &RadialLimitEstimate| {
                if e.converged {
                    format!("{:.12e}", e.value.re)
                } else if e.diverges() {
                    "inf".to_string()
                } else {
                    "nan".to_string()
                }
            };
            out.push_str(&format!("{t:.12e},{},{}\n", fmt(&ups), fmt(&m)));
        }
        out.push_str(&format!("# max_identity_residual={:e}\n", self.max_identity_residual(30, 16)?));
        Ok(out)
    }
}
