use crate::error::{Error, Result};
use crate::herglotz::{Atom, Density, HerglotzMeasure};
use crate::unitdisc::{angle_diff, chord, normalize_angle, DiskPoint};
use num_complex::Complex64;
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::fmt::Debug;
use std::f64::consts::TAU;
use std::sync::Arc;

/// A holomorphic function with nonnegative real part on the disk.
pub trait HerglotzFunction: Debug + Send + Sync {
    /// Registry name of the source kind.
    fn kind(&self) -> &'static str;

    fn value(&self, z: &DiskPoint) -> Result<Complex64>;

    fn derivative(&self, z: &DiskPoint) -> Result<Complex64>;

    /// `1/p`. Taking the reciprocal twice returns the original evaluator.
    fn reciprocal(self: Arc<Self>) -> Arc<dyn HerglotzFunction>;

    /// `z ↦ p(e^{iα} z)`.
    fn rotated(&self, alpha: f64) -> Arc<dyn HerglotzFunction>;

    /// Evaluated in closed form, without quadrature.
    fn is_closed_form(&self) -> bool;

    /// Payload of the `source` object, keyed by [`HerglotzFunction::kind`].
    fn to_json(&self) -> Value;

    /// Atoms of `p = Σ μ_j (a_j + z)/(a_j - z)` when `p` has that form.
    fn pole_atoms(&self) -> Option<&[Atom]> {
        None
    }
}

/// `p(z) = Σ μ_j (e^{iφ_j} + z)/(e^{iφ_j} - z)`.
///
/// `p` is purely imaginary on the circle away from the atoms, so `1/p` is an
/// atom sum too, with one atom at each boundary zero of `p`. Near those zeros
/// `p` is evaluated as the reciprocal of that dual sum, which does not suffer
/// the cancellation of the direct one.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomSum {
    atoms: Vec<Atom>,
    zeros: Vec<Atom>,
}

/// `Im p(e^{iθ}) = -Σ μ_j cot((φ_j - θ)/2)`, negated.
fn boundary_cot_sum(atoms: &[Atom], theta: f64) -> f64 {
    atoms
        .iter()
        .map(|a| {
            let half = 0.5 * angle_diff(a.angle, theta);
            a.mass * half.cos() / half.sin()
        })
        .sum()
}

/// One zero of `p` in each open arc between circularly consecutive atoms,
/// located by bisection on the monotone boundary trace, with the dual masses
/// `σ = -1/(2 b p'(b))`.
fn dual_atoms(atoms: &[Atom]) -> Result<Vec<Atom>> {
    let mut sorted: Vec<f64> = atoms.iter().map(|a| a.angle).collect();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len();
    let mut out = Vec::with_capacity(m);
    for k in 0..m {
        let lo0 = sorted[k];
        let hi0 = if k + 1 < m { sorted[k + 1] } else { sorted[0] + TAU };
        // the trace rises from -∞ just after lo0 to +∞ just before hi0
        let (mut lo, mut hi) = (lo0, hi0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let f = boundary_cot_sum(atoms, mid);
            if f < 0.0 {
                lo = mid;
            } else if f > 0.0 {
                hi = mid;
            } else {
                lo = mid;
                hi = mid;
            }
        }
        let b = 0.5 * (lo + hi);
        if !(b > lo0 && b < hi0) {
            return Err(Error::internal(format!("no zero bracketed in arc ({lo0}, {hi0})")));
        }
        let bc = Complex64::from_polar(1.0, b);
        let dp: Complex64 = atoms
            .iter()
            .map(|a| {
                let w = chord(a.angle, b);
                Complex64::from_polar(2.0 * a.mass, a.angle) / (w * w)
            })
            .sum();
        let sigma = -1.0 / (2.0 * bc * dp);
        if !(sigma.re > 0.0) || sigma.im.abs() > 1e-8 * sigma.re.max(1.0) {
            return Err(Error::internal(format!("defective zero at angle {b}: σ = {sigma}")));
        }
        out.push(Atom {
            angle: normalize_angle(b),
            mass: sigma.re,
        });
    }
    Ok(out)
}

fn atom_sum_value(atoms: &[Atom], z: &DiskPoint) -> Complex64 {
    atoms
        .iter()
        .map(|a| {
            let w = z.offset_from_angle(a.angle);
            // e + z = 2e - (e - z)
            (Complex64::from_polar(2.0, a.angle) - w) / w * a.mass
        })
        .sum()
}

fn nearest(atoms: &[Atom], z: &DiskPoint) -> f64 {
    atoms.iter().map(|a| z.dist_sq_to_angle(a.angle)).fold(f64::INFINITY, f64::min)
}

impl AtomSum {
    pub fn new(atoms: Vec<Atom>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::argument("atom sum needs at least one atom"));
        }
        for (i, a) in atoms.iter().enumerate() {
            if !a.angle.is_finite() {
                return Err(Error::argument(format!("atoms[{i}].angle is not finite")));
            }
            if !(a.mass > 0.0 && a.mass.is_finite()) {
                return Err(Error::argument(format!("atoms[{i}].mass must be positive")));
            }
        }
        let atoms: Vec<Atom> = atoms
            .into_iter()
            .map(|a| Atom {
                angle: normalize_angle(a.angle),
                mass: a.mass,
            })
            .collect();
        for (i, a) in atoms.iter().enumerate() {
            if atoms[..i].iter().any(|b| angle_diff(a.angle, b.angle) == 0.0) {
                return Err(Error::argument(format!("atoms[{i}] coincides with an earlier atom")));
            }
        }
        let zeros = dual_atoms(&atoms)?;
        Ok(Self { atoms, zeros })
    }

    /// Atoms of `1/p`: the boundary zeros of `p` with their masses.
    pub fn zeros(&self) -> &[Atom] {
        &self.zeros
    }

    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        Self::new(pairs.iter().map(|&(angle, mass)| Atom { angle, mass }).collect())
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    fn parse(v: &Value) -> Result<Self> {
        let atoms: Vec<Atom> =
            serde_json::from_value(v.clone()).map_err(|e| Error::argument(format!("atom list: {e}")))?;
        Self::new(atoms)
    }
}

impl HerglotzFunction for AtomSum {
    fn kind(&self) -> &'static str {
        "atoms_p"
    }

    fn value(&self, z: &DiskPoint) -> Result<Complex64> {
        if nearest(&self.zeros, z) < nearest(&self.atoms, z) {
            Ok(1.0 / atom_sum_value(&self.zeros, z))
        } else {
            Ok(atom_sum_value(&self.atoms, z))
        }
    }

    fn derivative(&self, z: &DiskPoint) -> Result<Complex64> {
        Ok(self
            .atoms
            .iter()
            .map(|a| {
                let w = z.offset_from_angle(a.angle);
                Complex64::from_polar(2.0 * a.mass, a.angle) / (w * w)
            })
            .sum())
    }

    fn reciprocal(self: Arc<Self>) -> Arc<dyn HerglotzFunction> {
        Arc::new(Reciprocal { inner: self })
    }

    fn rotated(&self, alpha: f64) -> Arc<dyn HerglotzFunction> {
        let atoms = self
            .atoms
            .iter()
            .map(|a| Atom {
                angle: normalize_angle(a.angle - alpha),
                mass: a.mass,
            })
            .collect();
        let zeros = self
            .zeros
            .iter()
            .map(|a| Atom {
                angle: normalize_angle(a.angle - alpha),
                mass: a.mass,
            })
            .collect();
        Arc::new(AtomSum { atoms, zeros })
    }

    fn is_closed_form(&self) -> bool {
        true
    }

    fn to_json(&self) -> Value {
        json!(self.atoms)
    }

    fn pole_atoms(&self) -> Option<&[Atom]> {
        Some(&self.atoms)
    }
}

/// `p = T_μ`, the normalized Herglotz transform of a measure.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureTransform {
    measure: HerglotzMeasure,
}

impl MeasureTransform {
    pub fn new(measure: HerglotzMeasure) -> Result<Self> {
        measure.validate()?;
        if !(measure.total_mass() > 0.0) {
            return Err(Error::argument("measure has zero total mass"));
        }
        Ok(Self { measure })
    }

    pub fn measure(&self) -> &HerglotzMeasure {
        &self.measure
    }
}

impl HerglotzFunction for MeasureTransform {
    fn kind(&self) -> &'static str {
        "transform_p"
    }

    fn value(&self, z: &DiskPoint) -> Result<Complex64> {
        self.measure.transform(z)
    }

    fn derivative(&self, z: &DiskPoint) -> Result<Complex64> {
        self.measure.transform_derivative(z)
    }

    fn reciprocal(self: Arc<Self>) -> Arc<dyn HerglotzFunction> {
        Arc::new(Reciprocal { inner: self })
    }

    fn rotated(&self, alpha: f64) -> Arc<dyn HerglotzFunction> {
        Arc::new(MeasureTransform {
            measure: self.measure.rotated(alpha),
        })
    }

    fn is_closed_form(&self) -> bool {
        matches!(self.measure.density, None | Some(Density::Uniform { .. }))
    }

    fn to_json(&self) -> Value {
        serde_json::to_value(&self.measure).expect("measure serializes")
    }
}

/// `1/q` for an inner evaluator `q`.
#[derive(Debug, Clone)]
pub struct Reciprocal {
    inner: Arc<dyn HerglotzFunction>,
}

impl Reciprocal {
    pub fn new(inner: Arc<dyn HerglotzFunction>) -> Self {
        Self { inner }
    }

    pub fn inner(&self) -> &Arc<dyn HerglotzFunction> {
        &self.inner
    }
}

impl HerglotzFunction for Reciprocal {
    fn kind(&self) -> &'static str {
        match self.inner.kind() {
            "atoms_p" => "atoms_reciprocal_p",
            "transform_p" => "measure",
            _ => "reciprocal",
        }
    }

    fn value(&self, z: &DiskPoint) -> Result<Complex64> {
        let q = self.inner.value(z)?;
        if q == Complex64::new(0.0, 0.0) {
            return Err(Error::numeric("reciprocal of a vanishing Herglotz function", 0.0));
        }
        Ok(q.inv())
    }

    fn derivative(&self, z: &DiskPoint) -> Result<Complex64> {
        let q = self.inner.value(z)?;
        let dq = self.inner.derivative(z)?;
        Ok(-dq / (q * q))
    }

    fn reciprocal(self: Arc<Self>) -> Arc<dyn HerglotzFunction> {
        self.inner.clone()
    }

    fn rotated(&self, alpha: f64) -> Arc<dyn HerglotzFunction> {
        Arc::new(Reciprocal {
            inner: self.inner.rotated(alpha),
        })
    }

    fn is_closed_form(&self) -> bool {
        self.inner.is_closed_form()
    }

    fn to_json(&self) -> Value {
        match self.kind() {
            "reciprocal" => json!({ self.inner.kind(): self.inner.to_json() }),
            _ => self.inner.to_json(),
        }
    }
}

/// Parses the payload of one source kind.
pub type SourceParser = fn(&Value) -> Result<Arc<dyn HerglotzFunction>>;

/// Source kinds selectable by name in generator specs.
#[derive(Clone)]
pub struct SourceRegistry {
    parsers: BTreeMap<&'static str, SourceParser>,
}

impl SourceRegistry {
    pub fn empty() -> Self {
        Self {
            parsers: BTreeMap::new(),
        }
    }

    /// `atoms_p`, `atoms_reciprocal_p`, `measure` (`p = 1/T_μ`),
    /// `transform_p` (`p = T_μ`) and `reciprocal` (of a nested source).
    pub fn builtin() -> Self {
        let mut r = Self::empty();
        r.register("atoms_p", |v| Ok(Arc::new(AtomSum::parse(v)?)));
        r.register("atoms_reciprocal_p", |v| {
            Ok(Arc::new(Reciprocal::new(Arc::new(AtomSum::parse(v)?))))
        });
        r.register("transform_p", |v| {
            Ok(Arc::new(MeasureTransform::new(HerglotzMeasure::from_json(v)?)?))
        });
        r.register("measure", |v| {
            let t = MeasureTransform::new(HerglotzMeasure::from_json(v)?)?;
            Ok(Arc::new(Reciprocal::new(Arc::new(t))))
        });
        r.register("reciprocal", |v| {
            Ok(Arc::new(Reciprocal::new(SourceRegistry::builtin().parse(v)?)))
        });
        r
    }

    pub fn register(&mut self, name: &'static str, parser: SourceParser) {
        self.parsers.insert(name, parser);
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.parsers.keys().copied().collect()
    }

    /// Parse a `{"<kind>": payload}` object.
    pub fn parse(&self, source: &Value) -> Result<Arc<dyn HerglotzFunction>> {
        let obj = source
            .as_object()
            .filter(|o| o.len() == 1)
            .ok_or_else(|| Error::argument("source must be an object with exactly one key"))?;
        let (name, payload) = obj.iter().next().expect("one entry");
        let parser = self.parsers.get(name.as_str()).ok_or_else(|| {
            Error::argument(format!(
                "source kind '{name}' is unknown; expected one of {}",
                self.names().join(", ")
            ))
        })?;
        parser(payload).map_err(|e| match e {
            Error::Argument(m) => Error::argument(format!("source.{name}: {m}")),
            other => other,
        })
    }
}

impl Default for SourceRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}

/// Serialize an evaluator as a `{"<kind>": payload}` object.
pub fn source_json(p: &dyn HerglotzFunction) -> Value {
    json!({ p.kind(): p.to_json() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn pt(re: f64, im: f64) -> DiskPoint {
        DiskPoint::new(re, im).unwrap()
    }

    #[test]
    fn koebe_atom_sum() {
        let p = AtomSum::from_pairs(&[(PI, 1.0)]).unwrap();
        let z = pt(0.5, 0.0);
        // (1 - z)/(1 + z)
        assert!((p.value(&z).unwrap() - Complex64::new(1.0 / 3.0, 0.0)).norm() < 1e-15);
        // -2/(1 + z)^2
        assert!((p.derivative(&z).unwrap() - Complex64::new(-2.0 / 2.25, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn reciprocal_round_trip_is_identity() {
        let p: Arc<dyn HerglotzFunction> = Arc::new(AtomSum::from_pairs(&[(0.3, 0.5), (2.0, 0.5)]).unwrap());
        let back = p.clone().reciprocal().reciprocal();
        assert!(Arc::ptr_eq(&p, &back));
        let z = pt(0.2, -0.4);
        let q = p.clone().reciprocal();
        assert!((q.value(&z).unwrap() * p.value(&z).unwrap() - 1.0).norm() < 1e-15);
    }

    #[test]
    fn reciprocal_derivative_matches_difference() {
        let p = Arc::new(AtomSum::from_pairs(&[(0.3, 0.5), (2.0, 0.7)]).unwrap()).reciprocal();
        let z = Complex64::new(0.3, 0.4);
        let h = 1e-6;
        let fd = (p.value(&DiskPoint::from_complex(z + h).unwrap()).unwrap()
            - p.value(&DiskPoint::from_complex(z - h).unwrap()).unwrap())
            / (2.0 * h);
        let d = p.derivative(&DiskPoint::from_complex(z).unwrap()).unwrap();
        assert!((fd - d).norm() < 1e-8 * d.norm());
    }

    #[test]
    fn registry_parses_every_builtin() {
        let r = SourceRegistry::builtin();
        assert_eq!(
            r.names(),
            vec!["atoms_p", "atoms_reciprocal_p", "measure", "reciprocal", "transform_p"]
        );
        let specs = [
            json!({"atoms_p": [{"angle": 3.0, "mass": 1.0}]}),
            json!({"atoms_reciprocal_p": [{"angle": 3.0, "mass": 1.0}]}),
            json!({"measure": {"density": {"type": "uniform", "c": 1.0}}}),
            json!({"transform_p": {"atoms": [{"angle": 1.0, "mass": 2.0}]}}),
        ];
        for s in &specs {
            let p = r.parse(s).unwrap();
            assert_eq!(&source_json(p.as_ref()), s);
        }
        let nested = r.parse(&json!({"reciprocal": {"atoms_p": [{"angle": 3.0, "mass": 1.0}]}})).unwrap();
        assert_eq!(nested.kind(), "atoms_reciprocal_p");
    }

    #[test]
    fn registry_errors_name_the_field() {
        let r = SourceRegistry::builtin();
        let e = r.parse(&json!({"bogus": []})).unwrap_err().to_string();
        assert!(e.contains("bogus") && e.contains("atoms_p"), "{e}");
        let e = r
            .parse(&json!({"atoms_p": [{"angle": 1.0, "mass": -1.0}]}))
            .unwrap_err()
            .to_string();
        assert!(e.contains("atoms[0].mass"), "{e}");
        assert!(r.parse(&json!({"atoms_p": []})).is_err());
        assert!(r.parse(&json!({"measure": {"atoms": []}})).is_err());
    }

    #[test]
    fn rotation_moves_atoms() {
        let p = AtomSum::from_pairs(&[(1.0, 1.0)]).unwrap();
        let q = p.rotated(0.4);
        let z = pt(0.3, 0.2);
        let zr = z.rotate(0.4);
        assert!((q.value(&z).unwrap() - p.value(&zr).unwrap()).norm() < 1e-14);
    }
}
