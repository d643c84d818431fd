//! Points of the unit disk and its boundary, radial grids and radial-limit
//! extrapolation.
//!
//! Interior points are stored in polar form with the distance to the circle
//! (`gap = 1 - |z|`) kept as a primitive, so points very close to the boundary
//! never lose digits to the cancellation in `1 - r`.

mod extrapolate;

pub use extrapolate::{extrapolate_log_rate, Extrapolator, RadialLimitEstimate};

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::{PI, TAU};

/// Reduce an angle into `[0, 2π)`.
pub fn normalize_angle(theta: f64) -> f64 {
    let r = theta.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Signed angular difference `a - b` reduced into `(-π, π]`.
pub fn angle_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    if d > PI {
        d - TAU
    } else {
        d
    }
}

/// `e^{ia} - e^{ib}` without cancellation when `a ≈ b`.
pub fn chord(a: f64, b: f64) -> Complex64 {
    let half = 0.5 * angle_diff(a, b);
    let mid = b + half;
    Complex64::new(0.0, 2.0 * half.sin()) * Complex64::from_polar(1.0, mid)
}

/// An angle written as `anchor + offset`.
///
/// Differences to a fixed angle are formed as `(anchor - θ) + offset`, so a
/// small offset from an anchor equal to `θ` keeps full relative precision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircleAngle {
    pub anchor: f64,
    pub offset: f64,
}

impl CircleAngle {
    pub fn new(anchor: f64, offset: f64) -> Self {
        Self { anchor, offset }
    }

    pub fn exact(angle: f64) -> Self {
        Self { anchor: angle, offset: 0.0 }
    }

    pub fn value(&self) -> f64 {
        self.anchor + self.offset
    }

    /// `self - θ` reduced into `(-π, π]`.
    pub fn diff_from(&self, theta: f64) -> f64 {
        let d = angle_diff(self.anchor, theta) + self.offset;
        if d > PI || d <= -PI {
            angle_diff(d, 0.0)
        } else {
            d
        }
    }
}

/// A point `x = e^{iθ}` of the unit circle, stored by its angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryPoint {
    angle: f64,
}

impl BoundaryPoint {
    pub fn new(angle: f64) -> Self {
        Self {
            angle: normalize_angle(angle),
        }
    }

    /// Angle in `[0, 2π)`.
    pub fn angle(&self) -> f64 {
        self.angle
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.angle)
    }

    /// The interior point `(1 - eps)·x`.
    pub fn radial(&self, eps: f64) -> Result<DiskPoint> {
        DiskPoint::from_polar_gap(eps, self.angle)
    }

    /// `n` equally spaced probe points starting at angle 0.
    pub fn probes(n: usize) -> Vec<BoundaryPoint> {
        (0..n)
            .map(|k| BoundaryPoint::new(TAU * k as f64 / n as f64))
            .collect()
    }
}

/// A point `z` with `|z| < 1`.
///
/// Stored as `(gap, angle)` with `|z| = 1 - gap`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskPoint {
    gap: f64,
    angle: f64,
}

impl DiskPoint {
    /// Build from Cartesian coordinates; rejects `|z| >= 1`.
    pub fn new(re: f64, im: f64) -> Result<Self> {
        Self::from_complex(Complex64::new(re, im))
    }

    pub fn from_complex(z: Complex64) -> Result<Self> {
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::argument(format!("non-finite disk point {z}")));
        }
        let r = z.norm();
        if r >= 1.0 {
            return Err(Error::argument(format!(
                "point {z} is not in the open unit disk (|z| = {r})"
            )));
        }
        let angle = if r == 0.0 { 0.0 } else { z.arg() };
        Ok(Self {
            gap: 1.0 - r,
            angle: normalize_angle(angle),
        })
    }

    /// Build from the distance to the circle and the angle.
    pub fn from_polar_gap(gap: f64, angle: f64) -> Result<Self> {
        if !(gap > 0.0 && gap <= 1.0) {
            return Err(Error::argument(format!(
                "gap 1-|z| = {gap} outside (0, 1]"
            )));
        }
        Ok(Self {
            gap,
            angle: normalize_angle(angle),
        })
    }

    /// The point `anchor + offset` where `anchor` lies on the circle; the
    /// gap is computed without cancellation even when `offset` is tiny.
    pub fn from_boundary_offset(anchor: BoundaryPoint, offset: Complex64) -> Result<Self> {
        let x = anchor.to_complex();
        let z = x + offset;
        let r = z.norm();
        // 1 - |x + w| = -(2 Re(conj(x) w) + |w|^2) / (1 + |x + w|)
        let gap = -(2.0 * (x.conj() * offset).re + offset.norm_sqr()) / (1.0 + r);
        if !(gap > 0.0) || !r.is_finite() {
            return Err(Error::argument(format!(
                "point {z} is not in the open unit disk"
            )));
        }
        let angle = if r == 0.0 { 0.0 } else { z.arg() };
        Ok(Self {
            gap: gap.min(1.0),
            angle: normalize_angle(angle),
        })
    }

    pub fn origin() -> Self {
        Self {
            gap: 1.0,
            angle: 0.0,
        }
    }

    /// `1 - |z|`.
    pub fn gap(&self) -> f64 {
        self.gap
    }

    pub fn modulus(&self) -> f64 {
        1.0 - self.gap
    }

    pub fn angle(&self) -> f64 {
        self.angle
    }

    /// `1 - |z|^2`, computed from the gap.
    pub fn one_minus_abs_sq(&self) -> f64 {
        self.gap * (2.0 - self.gap)
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::from_polar(1.0 - self.gap, self.angle)
    }

    pub fn re(&self) -> f64 {
        self.to_complex().re
    }

    pub fn im(&self) -> f64 {
        self.to_complex().im
    }

    /// `e^{iφ} - z`, accurate when `z` is close to `e^{iφ}`.
    pub fn offset_from_angle(&self, phi: f64) -> Complex64 {
        self.offset_from_circle(CircleAngle::exact(phi))
    }

    /// `e^{iφ} - z` for `φ` given in anchored form.
    pub fn offset_from_circle(&self, phi: CircleAngle) -> Complex64 {
        let half = 0.5 * phi.diff_from(self.angle);
        let chord = Complex64::new(0.0, 2.0 * half.sin()) * Complex64::from_polar(1.0, self.angle + half);
        chord + Complex64::from_polar(self.gap, self.angle)
    }

    /// `x - z`, accurate when `z` is close to `x`.
    pub fn offset_from(&self, x: BoundaryPoint) -> Complex64 {
        self.offset_from_angle(x.angle)
    }

    /// `|e^{iφ} - z|^2 = gap^2 + 4 (1 - gap) sin^2((φ - θ)/2)`.
    pub fn dist_sq_to_angle(&self, phi: f64) -> f64 {
        self.dist_sq_to(CircleAngle::exact(phi))
    }

    pub fn dist_sq_to(&self, phi: CircleAngle) -> f64 {
        let s = (0.5 * phi.diff_from(self.angle)).sin();
        self.gap * self.gap + 4.0 * (1.0 - self.gap) * s * s
    }

    /// Complex conjugate point.
    pub fn conj(&self) -> Self {
        Self {
            gap: self.gap,
            angle: normalize_angle(-self.angle),
        }
    }

    /// Rotate by `e^{iα}`.
    pub fn rotate(&self, alpha: f64) -> Self {
        Self {
            gap: self.gap,
            angle: normalize_angle(self.angle + alpha),
        }
    }
}

/// One sample `value = f((1 - eps) x)` of a function along a radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialSample {
    pub eps: f64,
    pub value: Complex64,
}

impl RadialSample {
    pub fn new(eps: f64, value: Complex64) -> Self {
        Self { eps, value }
    }

    /// The disk point this sample was taken at.
    pub fn point(&self, x: BoundaryPoint) -> Result<DiskPoint> {
        x.radial(self.eps)
    }
}

/// `eps_k = 2^{-k}` for `k = k_min..=k_max`.
pub fn radial_grid(k_min: u32, k_max: u32) -> Result<Vec<f64>> {
    if !(3 <= k_min && k_min < k_max && k_max <= 48) {
        return Err(Error::argument(format!(
            "radial grid needs 3 <= k_min < k_max <= 48, got ({k_min}, {k_max})"
        )));
    }
    Ok((k_min..=k_max).map(|k| (-(k as f64)).exp2()).collect())
}

/// Default grid bounds for closed-form evaluators.
pub const CLOSED_FORM_GRID: (u32, u32) = (3, 40);
/// Default grid bounds for quadrature-backed evaluators.
pub const QUADRATURE_GRID: (u32, u32) = (3, 24);

/// Sample `f` along the radius to `x` at every `eps` of the grid.
pub fn sample_radius<F>(x: BoundaryPoint, grid: &[f64], mut f: F) -> Result<Vec<RadialSample>>
where
    F: FnMut(&DiskPoint, f64) -> Result<Complex64>,
{
    grid.iter()
        .map(|&eps| {
            let z = x.radial(eps)?;
            Ok(RadialSample::new(eps, f(&z, eps)?))
        })
        .collect()
}

/// The disk automorphism `m(z) = (z - τ)/(1 - conj(τ) z)` sending `τ` to 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moebius {
    tau: Complex64,
}

impl Moebius {
    pub fn to_origin(tau: &DiskPoint) -> Self {
        Self {
            tau: tau.to_complex(),
        }
    }

    pub fn tau(&self) -> Complex64 {
        self.tau
    }

    pub fn forward(&self, z: Complex64) -> Complex64 {
        (z - self.tau) / (Complex64::new(1.0, 0.0) - self.tau.conj() * z)
    }

    pub fn inverse(&self, w: Complex64) -> Complex64 {
        (w + self.tau) / (Complex64::new(1.0, 0.0) + self.tau.conj() * w)
    }

    /// `m'(z) = (1 - |τ|^2) / (1 - conj(τ) z)^2`.
    pub fn forward_derivative(&self, z: Complex64) -> Complex64 {
        let d = Complex64::new(1.0, 0.0) - self.tau.conj() * z;
        (1.0 - self.tau.norm_sqr()) / (d * d)
    }

    fn map_point(&self, z: &DiskPoint, shift: Complex64) -> Result<DiskPoint> {
        let zc = z.to_complex();
        let denom = Complex64::new(1.0, 0.0) + shift.conj() * zc;
        let w = (zc + shift) / denom;
        // 1 - |w|^2 = (1 - |z|^2)(1 - |τ|^2) / |1 + conj(s) z|^2
        let one_minus_sq = z.one_minus_abs_sq() * (1.0 - shift.norm_sqr()) / denom.norm_sqr();
        let r = w.norm();
        let gap = one_minus_sq / (1.0 + r);
        let angle = if r == 0.0 { 0.0 } else { w.arg() };
        DiskPoint::from_polar_gap(gap.min(1.0), angle)
    }

    /// `m(z)` as a disk point with an accurate gap.
    pub fn forward_point(&self, z: &DiskPoint) -> Result<DiskPoint> {
        self.map_point(z, -self.tau)
    }

    /// `m^{-1}(w)` as a disk point with an accurate gap.
    pub fn inverse_point(&self, w: &DiskPoint) -> Result<DiskPoint> {
        self.map_point(w, self.tau)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn grid_examples() {
        assert_eq!(radial_grid(3, 5).unwrap(), vec![0.125, 0.0625, 0.03125]);
        let g = radial_grid(3, 40).unwrap();
        assert_eq!(g.len(), 38);
        assert_eq!(*g.last().unwrap(), 2f64.powi(-40));
        assert!(g.windows(2).all(|w| w[0] > w[1]));
        assert!(radial_grid(5, 3).is_err());
        assert!(radial_grid(2, 5).is_err());
        assert!(radial_grid(3, 49).is_err());
    }

    #[test]
    fn disk_point_rejects_outside() {
        assert!(DiskPoint::new(1.0, 0.0).is_err());
        assert!(DiskPoint::new(0.6, 0.8).is_err());
        assert!(DiskPoint::new(0.0, 0.999).is_ok());
        assert!(DiskPoint::from_polar_gap(0.0, 1.0).is_err());
    }

    #[test]
    fn radial_distance_is_exact_down_to_2_pow_48() {
        for theta in [0.0, 0.3, 1.0, PI, 4.0, 6.2] {
            let x = BoundaryPoint::new(theta);
            for eps in radial_grid(3, 48).unwrap() {
                let z = x.radial(eps).unwrap();
                assert_eq!(z.offset_from(x).norm(), eps);
                assert_eq!(z.dist_sq_to_angle(theta).sqrt(), eps);
            }
        }
    }

    #[test]
    fn offset_matches_plain_subtraction_away_from_boundary() {
        let z = DiskPoint::new(0.3, -0.2).unwrap();
        let x = BoundaryPoint::new(2.0);
        let direct = x.to_complex() - z.to_complex();
        assert!((z.offset_from(x) - direct).norm() < 4e-15);
    }

    #[test]
    fn boundary_offset_gap() {
        let x = BoundaryPoint::new(0.7);
        let w = -x.to_complex() * 1e-9;
        let z = DiskPoint::from_boundary_offset(x, w).unwrap();
        assert!((z.gap() - 1e-9).abs() < 1e-24);
        assert!(DiskPoint::from_boundary_offset(x, x.to_complex() * 1e-9).is_err());
    }

    #[test]
    fn moebius_examples() {
        let id = Moebius::to_origin(&DiskPoint::origin());
        let z = Complex64::new(0.3, 0.4);
        assert!((id.forward(z) - z).norm() < 1e-16);

        let m = Moebius::to_origin(&DiskPoint::new(0.5, 0.0).unwrap());
        assert!(m.forward(Complex64::new(0.5, 0.0)).norm() < 1e-16);
        assert!((m.forward(Complex64::new(0.0, 0.0)) - Complex64::new(-0.5, 0.0)).norm() < 1e-16);
        assert!((m.inverse(Complex64::new(0.0, 0.0)) - Complex64::new(0.5, 0.0)).norm() < 1e-16);
    }

    #[test]
    fn moebius_point_gap_near_boundary() {
        let m = Moebius::to_origin(&DiskPoint::new(0.2, -0.3).unwrap());
        let x = BoundaryPoint::new(1.1);
        let z = x.radial(1e-12).unwrap();
        let w = m.forward_point(&z).unwrap();
        let back = m.inverse_point(&w).unwrap();
        assert!((back.gap() - 1e-12).abs() < 1e-22);
        assert!(angle_diff(back.angle(), 1.1).abs() < 1e-14);
    }

    proptest! {
        #[test]
        fn moebius_round_trip(tr in -0.7f64..0.7, ti in -0.7f64..0.7, r in 0.0f64..0.99, a in 0.0f64..TAU) {
            prop_assume!(tr * tr + ti * ti < 0.9);
            let m = Moebius::to_origin(&DiskPoint::new(tr, ti).unwrap());
            let z = Complex64::from_polar(r, a);
            prop_assert!((m.inverse(m.forward(z)) - z).norm() < 1e-14);
            prop_assert!((m.forward(m.inverse(z)) - z).norm() < 1e-14);
        }

        #[test]
        fn chord_matches_direct(a in 0.0f64..TAU, b in 0.0f64..TAU) {
            let direct = Complex64::from_polar(1.0, a) - Complex64::from_polar(1.0, b);
            prop_assert!((chord(a, b) - direct).norm() < 4e-15);
        }
    }
}
