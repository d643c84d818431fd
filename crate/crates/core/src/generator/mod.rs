//! Infinitesimal generators in Berkson–Porta form
//! `G(z) = (τ - z)(1 - conj(τ) z) p(z)` and the classification of boundary
//! points into regular poles and regular null points.

mod classify;
mod source;

pub use classify::{BoundaryClassification, BoundaryTag, ClassifyOptions, PoleBudget, TOL_POLE};
pub use source::{
    source_json, AtomSum, HerglotzFunction, MeasureTransform, Reciprocal, SourceParser, SourceRegistry,
};

use crate::error::{Error, Result};
use crate::herglotz::HerglotzMeasure;
use crate::unitdisc::{BoundaryPoint, DiskPoint, CLOSED_FORM_GRID, QUADRATURE_GRID};
use num_complex::Complex64;
use serde_json::{json, Value};
use std::sync::Arc;

/// Location of the Denjoy–Wolff point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DenjoyWolff {
    Interior(DiskPoint),
    Boundary(BoundaryPoint),
}

impl DenjoyWolff {
    pub fn origin() -> Self {
        DenjoyWolff::Interior(DiskPoint::origin())
    }

    pub fn to_complex(&self) -> Complex64 {
        match self {
            DenjoyWolff::Interior(p) => p.to_complex(),
            DenjoyWolff::Boundary(x) => x.to_complex(),
        }
    }

    pub fn is_boundary(&self) -> bool {
        matches!(self, DenjoyWolff::Boundary(_))
    }

    /// `{"re", "im"}` for interior points, `{"angle"}` for boundary points.
    pub fn from_json(v: &Value) -> Result<Self> {
        let obj = v
            .as_object()
            .ok_or_else(|| Error::argument("tau must be an object"))?;
        let num = |key: &str| -> Result<Option<f64>> {
            match obj.get(key) {
                None => Ok(None),
                Some(x) => x
                    .as_f64()
                    .map(Some)
                    .ok_or_else(|| Error::argument(format!("tau.{key} must be a number"))),
            }
        };
        match (num("angle")?, num("re")?, num("im")?) {
            (Some(a), None, None) => Ok(DenjoyWolff::Boundary(BoundaryPoint::new(a))),
            (None, re, im) if re.is_some() || im.is_some() => {
                let p = DiskPoint::new(re.unwrap_or(0.0), im.unwrap_or(0.0))
                    .map_err(|e| Error::argument(format!("tau: {e}")))?;
                Ok(DenjoyWolff::Interior(p))
            }
            _ => Err(Error::argument("tau needs either 'angle' or 're'/'im'")),
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            DenjoyWolff::Interior(p) => json!({"re": p.re(), "im": p.im()}),
            DenjoyWolff::Boundary(x) => json!({"angle": x.angle()}),
        }
    }
}

/// `G(z) = (τ - z)(1 - conj(τ) z) p(z)`.
#[derive(Debug, Clone)]
pub struct Generator {
    tau: DenjoyWolff,
    p: Arc<dyn HerglotzFunction>,
    label: String,
}

impl Generator {
    pub fn new(tau: DenjoyWolff, p: Arc<dyn HerglotzFunction>, label: impl Into<String>) -> Self {
        Self {
            tau,
            p,
            label: label.into(),
        }
    }

    /// `p = 1/T_μ`.
    pub fn from_measure(tau: DenjoyWolff, mu: HerglotzMeasure) -> Result<Self> {
        let t = Arc::new(MeasureTransform::new(mu)?);
        Ok(Self::new(tau, t.reciprocal(), "measure"))
    }

    /// `p = Σ μ_j (e^{iφ_j} + z)/(e^{iφ_j} - z)` for `(φ_j, μ_j)` pairs.
    pub fn from_pole_atoms(tau: DenjoyWolff, atoms: &[(f64, f64)]) -> Result<Self> {
        Ok(Self::new(tau, Arc::new(AtomSum::from_pairs(atoms)?), "atoms_p"))
    }

    /// The Koebe generator `-z(1 - z)/(1 + z)`.
    pub fn koebe() -> Self {
        Self::from_pole_atoms(DenjoyWolff::origin(), &[(std::f64::consts::PI, 1.0)])
            .expect("valid atoms")
            .with_label("koebe")
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        Self::from_json_with(v, &SourceRegistry::builtin())
    }

    pub fn from_json_with(v: &Value, registry: &SourceRegistry) -> Result<Self> {
        let obj = v
            .as_object()
            .ok_or_else(|| Error::argument("generator spec must be a JSON object"))?;
        let tau = DenjoyWolff::from_json(
            obj.get("tau")
                .ok_or_else(|| Error::argument("generator spec is missing field 'tau'"))?,
        )?;
        let source = obj
            .get("source")
            .ok_or_else(|| Error::argument("generator spec is missing field 'source'"))?;
        let p = registry.parse(source)?;
        let label = match obj.get("label") {
            None => p.kind().to_string(),
            Some(l) => l
                .as_str()
                .ok_or_else(|| Error::argument("label must be a string"))?
                .to_string(),
        };
        Ok(Self::new(tau, p, label))
    }

    pub fn to_json(&self) -> Value {
        json!({
            "tau": self.tau.to_json(),
            "source": source_json(self.p.as_ref()),
            "label": self.label,
        })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn tau(&self) -> DenjoyWolff {
        self.tau
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn herglotz(&self) -> &Arc<dyn HerglotzFunction> {
        &self.p
    }

    /// Radial grid suited to the evaluator: deep for closed forms, shallower
    /// where quadrature noise dominates.
    pub fn default_grid_bounds(&self) -> (u32, u32) {
        if self.p.is_closed_form() {
            CLOSED_FORM_GRID
        } else {
            QUADRATURE_GRID
        }
    }

    pub fn p(&self, z: &DiskPoint) -> Result<Complex64> {
        self.p.value(z)
    }

    pub fn p_derivative(&self, z: &DiskPoint) -> Result<Complex64> {
        self.p.derivative(z)
    }

    /// `(τ - z)(1 - conj(τ) z)`; for `|τ| = 1` this is `conj(τ)(τ - z)^2`.
    pub fn frame(&self, z: &DiskPoint) -> Complex64 {
        match self.tau {
            DenjoyWolff::Interior(t) => {
                let t = t.to_complex();
                let zc = z.to_complex();
                (t - zc) * (1.0 - t.conj() * zc)
            }
            DenjoyWolff::Boundary(x) => {
                let d = z.offset_from(x);
                x.to_complex().conj() * d * d
            }
        }
    }

    /// `-1 - |τ|^2 + 2 conj(τ) z`.
    pub fn frame_derivative(&self, z: &DiskPoint) -> Complex64 {
        match self.tau {
            DenjoyWolff::Interior(t) => {
                let t = t.to_complex();
                -1.0 - t.norm_sqr() + 2.0 * t.conj() * z.to_complex()
            }
            DenjoyWolff::Boundary(x) => -2.0 * x.to_complex().conj() * z.offset_from(x),
        }
    }

    pub fn evaluate(&self, z: &DiskPoint) -> Result<Complex64> {
        Ok(self.frame(z) * self.p.value(z)?)
    }

    pub fn evaluate_derivative(&self, z: &DiskPoint) -> Result<Complex64> {
        let p = self.p.value(z)?;
        let dp = self.p.derivative(z)?;
        Ok(self.frame_derivative(z) * p + self.frame(z) * dp)
    }

    /// `(G(z), G'(z))` sharing one evaluation of `p`.
    pub fn evaluate_with_derivative(&self, z: &DiskPoint) -> Result<(Complex64, Complex64)> {
        let p = self.p.value(z)?;
        let dp = self.p.derivative(z)?;
        let frame = self.frame(z);
        Ok((frame * p, self.frame_derivative(z) * p + frame * dp))
    }

    /// `G'(τ) = -(1 - |τ|^2) p(τ)`, defined for an interior Denjoy–Wolff point.
    pub fn derivative_at_tau(&self) -> Result<Complex64> {
        match self.tau {
            DenjoyWolff::Interior(t) => Ok(-t.one_minus_abs_sq() * self.p.value(&t)?),
            DenjoyWolff::Boundary(_) => Err(Error::argument(
                "G'(τ) is only defined here for an interior Denjoy–Wolff point",
            )),
        }
    }

    /// Same frame with `p` replaced by `1/p`; an involution.
    pub fn dual(&self) -> Generator {
        let label = match self.label.strip_prefix("dual of ") {
            Some(orig) => orig.to_string(),
            None => format!("dual of {}", self.label),
        };
        Generator::new(self.tau, self.p.clone().reciprocal(), label)
    }

    /// `z ↦ e^{-iα} G(e^{iα} z)`, with Denjoy–Wolff point `e^{-iα} τ`.
    pub fn rotated(&self, alpha: f64) -> Generator {
        let tau = match self.tau {
            DenjoyWolff::Interior(t) => DenjoyWolff::Interior(t.rotate(-alpha)),
            DenjoyWolff::Boundary(x) => DenjoyWolff::Boundary(BoundaryPoint::new(x.angle() - alpha)),
        };
        Generator::new(tau, self.p.rotated(alpha), format!("{} rotated", self.label))
    }

    /// Smallest `Re p` over a polar grid with `n_r` radii in `(0, 1)` and
    /// `n_theta` angles.
    pub fn min_real_part(&self, n_r: usize, n_theta: usize) -> Result<f64> {
        let mut min = f64::INFINITY;
        for i in 0..n_r {
            let gap = 1.0 - i as f64 / n_r as f64;
            for j in 0..n_theta {
                let z = DiskPoint::from_polar_gap(gap.max(1e-3), std::f64::consts::TAU * j as f64 / n_theta as f64)?;
                min = min.min(self.p.value(&z)?.re);
            }
        }
        Ok(min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI, TAU};

    fn pt(re: f64, im: f64) -> DiskPoint {
        DiskPoint::new(re, im).unwrap()
    }

    fn identity_field() -> Generator {
        Generator::from_measure(DenjoyWolff::origin(), HerglotzMeasure::uniform(1.0).unwrap()).unwrap()
    }

    fn half_plane() -> Generator {
        Generator::from_measure(
            DenjoyWolff::Boundary(BoundaryPoint::new(0.0)),
            HerglotzMeasure::uniform(1.0).unwrap(),
        )
        .unwrap()
    }

    fn koebe_rational(z: Complex64) -> Complex64 {
        -z * (1.0 - z) / (1.0 + z)
    }

    pub(crate) fn test_generators() -> Vec<Generator> {
        vec![
            identity_field(),
            Generator::koebe(),
            half_plane(),
            Generator::from_pole_atoms(DenjoyWolff::origin(), &[(0.0, 0.5), (PI, 0.5)]).unwrap(),
            Generator::from_pole_atoms(DenjoyWolff::Interior(pt(0.3, -0.2)), &[(1.0, 0.4), (4.0, 1.1)]).unwrap(),
            Generator::from_pole_atoms(DenjoyWolff::Boundary(BoundaryPoint::new(2.0)), &[(0.5, 0.7)]).unwrap(),
            Generator::from_measure(
                DenjoyWolff::origin(),
                HerglotzMeasure::step(&[(PI, TAU, 2.0)]).unwrap(),
            )
            .unwrap(),
        ]
    }

    #[test]
    fn from_measure_examples() {
        let z = pt(0.3, 0.4);
        let zc = z.to_complex();
        assert!((identity_field().evaluate(&z).unwrap() + zc).norm() < 1e-15);
        let koebe = Generator::from_measure(DenjoyWolff::origin(), HerglotzMeasure::atoms(&[(0.0, TAU)]).unwrap()).unwrap();
        assert!((koebe.evaluate(&z).unwrap() - koebe_rational(zc)).norm() < 1e-14);
        let one = Complex64::new(1.0, 0.0);
        assert!((half_plane().evaluate(&z).unwrap() - (one - zc) * (one - zc)).norm() < 1e-15);
        let empty = HerglotzMeasure::atoms(&[]).unwrap();
        assert!(Generator::from_measure(DenjoyWolff::origin(), empty).is_err());
    }

    #[test]
    fn evaluate_examples() {
        let k = Generator::koebe();
        let o = DiskPoint::origin();
        assert!(k.evaluate(&o).unwrap().norm() < 1e-15);
        assert!((k.evaluate_derivative(&o).unwrap() + 1.0).norm() < 1e-15);
        let g = identity_field();
        assert!((g.evaluate_derivative(&pt(0.5, -0.2)).unwrap() + 1.0).norm() < 1e-15);
        let h = half_plane();
        assert!((h.evaluate(&o).unwrap() - 1.0).norm() < 1e-15);
        assert!((h.evaluate_derivative(&o).unwrap() + 2.0).norm() < 1e-15);
    }

    #[test]
    fn derivative_matches_central_difference() {
        let step = 1e-5;
        for g in test_generators() {
            for &(r, a) in &[(0.0, 0.0), (0.5, 1.0), (0.9, 2.5), (0.85, 4.0)] {
                let z = Complex64::from_polar(r, a);
                let at = |w: Complex64| g.evaluate(&DiskPoint::from_complex(w).unwrap()).unwrap();
                let fd = (at(z + step) - at(z - step)) / (2.0 * step);
                let d = g.evaluate_derivative(&DiskPoint::from_complex(z).unwrap()).unwrap();
                assert!((fd - d).norm() <= 1e-6 * d.norm().max(1.0), "{} at {z}: {fd} vs {d}", g.label());
            }
        }
    }

    #[test]
    fn dual_examples() {
        let z = pt(0.5, 0.0);
        let g = identity_field();
        assert!((g.dual().evaluate(&z).unwrap() + 0.5).norm() < 1e-15);
        let k = Generator::koebe();
        let zc = Complex64::new(0.5, 0.0);
        let expected = -zc * (1.0 + zc) / (1.0 - zc);
        assert!((k.dual().evaluate(&z).unwrap() - expected).norm() < 1e-14);
        let prod = k.evaluate(&z).unwrap() * k.dual().evaluate(&z).unwrap();
        assert!((prod - 0.25).norm() < 1e-15);
    }

    #[test]
    fn product_with_dual_is_squared_frame() {
        for g in test_generators() {
            let d = g.dual();
            let tau = g.tau().to_complex();
            for i in 1..10 {
                for j in 0..16 {
                    let z = DiskPoint::from_polar_gap(1.0 - 0.099 * i as f64, TAU * j as f64 / 16.0).unwrap();
                    let zc = z.to_complex();
                    let b = (tau - zc) * (1.0 - tau.conj() * zc);
                    let lhs = g.evaluate(&z).unwrap() * d.evaluate(&z).unwrap();
                    assert!((lhs - b * b).norm() <= 1e-10 * (1.0 + zc.norm().powi(4)), "{}", g.label());
                }
            }
        }
    }

    #[test]
    fn dual_is_an_exact_involution() {
        for g in test_generators() {
            let dd = g.dual().dual();
            assert_eq!(dd.label(), g.label());
            let z = pt(-0.3, 0.6);
            assert_eq!(dd.evaluate(&z).unwrap(), g.evaluate(&z).unwrap());
        }
    }

    #[test]
    fn real_part_of_p_is_nonnegative() {
        for g in test_generators() {
            assert!(g.min_real_part(12, 24).unwrap() >= -1e-10, "{}", g.label());
            assert!(g.dual().min_real_part(12, 24).unwrap() >= -1e-10, "{}", g.label());
        }
    }

    #[test]
    fn json_round_trip() {
        for g in test_generators() {
            let back = Generator::from_json(&g.to_json()).unwrap();
            let z = pt(0.1, 0.7);
            assert_eq!(back.evaluate(&z).unwrap(), g.evaluate(&z).unwrap());
            assert_eq!(back.label(), g.label());
        }
        let spec = json!({"tau": {"angle": FRAC_PI_2}, "source": {"atoms_p": [{"angle": 0.0, "mass": 1.0}]}});
        let g = Generator::from_json(&spec).unwrap();
        assert!(g.tau().is_boundary());
    }

    #[test]
    fn json_errors_name_the_field() {
        let e = Generator::from_json(&json!({"source": {"atoms_p": []}})).unwrap_err();
        assert!(e.to_string().contains("'tau'"), "{e}");
        let e = Generator::from_json(&json!({"tau": {"re": 0.0}})).unwrap_err();
        assert!(e.to_string().contains("'source'"), "{e}");
        let e = Generator::from_json(&json!({"tau": {"re": 1.5}, "source": {}})).unwrap_err();
        assert!(e.to_string().contains("tau"), "{e}");
        let e = Generator::from_json(&json!({"tau": {"angle": "x"}, "source": {}})).unwrap_err();
        assert!(e.to_string().contains("tau.angle"), "{e}");
    }

    #[test]
    fn derivative_at_interior_tau() {
        let g = &test_generators()[4];
        let tau = match g.tau() {
            DenjoyWolff::Interior(t) => t,
            _ => unreachable!(),
        };
        let direct = g.evaluate_derivative(&tau).unwrap();
        assert!((g.derivative_at_tau().unwrap() - direct).norm() < 1e-13);
        assert!(half_plane().derivative_at_tau().is_err());
    }
}
