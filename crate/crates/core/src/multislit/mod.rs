//! Radial multi-slit generators `G = -z p` with
//! `p = Σ μ_j (a_j + z)/(a_j - z)` and `1/p = Σ σ_j (b_j + z)/(b_j - z)`.
//!
//! The poles `a_j` and zeros `b_j` of `p` interlace on the circle. Null points
//! have dilation `ℓ_j = 1/(2σ_j)`; the report keeps `2σ_j` alongside for
//! comparison.

mod truncation;

pub use truncation::{example_no_tip, ThetaRule, TruncationRow, TruncationStudy};

use crate::error::{Error, Result};
use crate::flow::{dilatation_coefficient, flow_point};
use crate::generator::{AtomSum, ClassifyOptions, DenjoyWolff, Generator};
use crate::herglotz::Atom;
use crate::unitdisc::{angle_diff, chord, radial_grid, BoundaryPoint, DiskPoint};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};
use std::f64::consts::TAU;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq)]
pub struct SlitSystem {
    /// `(a_j, μ_j)` sorted by angle, `Σ μ_j = 1`.
    pub poles: Vec<Atom>,
    /// `(b_j, σ_j)` sorted by angle, `Σ σ_j = 1`.
    pub zeros: Vec<Atom>,
    p: Arc<AtomSum>,
}

fn sorted(mut atoms: Vec<Atom>) -> Vec<Atom> {
    atoms.sort_by(|a, b| a.angle.total_cmp(&b.angle));
    atoms
}

/// `Σ μ (e + z)/(e - z)` summed term by term.
fn direct_sum(atoms: &[Atom], z: Complex64) -> Complex64 {
    atoms
        .iter()
        .map(|a| {
            let e = Complex64::from_polar(1.0, a.angle);
            a.mass * (e + z) / (e - z)
        })
        .sum()
}

impl SlitSystem {
    /// Build from `(angle, mass)` pairs. Masses must sum to 1 unless
    /// `normalize` rescales them.
    pub fn from_pole_atoms(atoms: &[(f64, f64)], normalize: bool) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::argument("a slit system needs at least one pole"));
        }
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::argument("pole masses must be positive"));
        }
        let scale = if normalize {
            1.0 / total
        } else if (total - 1.0).abs() > 1e-10 {
            return Err(Error::argument(format!("pole masses sum to {total}, not 1 (use normalization)")));
        } else {
            1.0
        };
        let scaled: Vec<(f64, f64)> = atoms.iter().map(|&(a, m)| (a, m * scale)).collect();
        let p = Arc::new(AtomSum::from_pairs(&scaled)?);
        Ok(Self {
            poles: sorted(p.atoms().to_vec()),
            zeros: sorted(p.zeros().to_vec()),
            p,
        })
    }

    pub fn m(&self) -> usize {
        self.poles.len()
    }

    /// `G(z) = -z p(z)`.
    pub fn generator(&self) -> Generator {
        Generator::new(DenjoyWolff::origin(), self.p.clone(), "multislit")
    }

    pub fn mass_sum(&self) -> f64 {
        self.poles.iter().map(|a| a.mass).sum()
    }

    pub fn sigma_sum(&self) -> f64 {
        self.zeros.iter().map(|a| a.mass).sum()
    }

    /// Exactly one zero in each open arc between consecutive poles.
    pub fn interlaces(&self) -> bool {
        let mut all: Vec<(f64, bool)> = self
            .poles
            .iter()
            .map(|a| (a.angle, true))
            .chain(self.zeros.iter().map(|b| (b.angle, false)))
            .collect();
        all.sort_by(|x, y| x.0.total_cmp(&y.0));
        all.windows(2).all(|w| w[0].1 != w[1].1 && w[0].0 < w[1].0) && all.first().map(|f| f.1) != all.last().map(|l| l.1)
    }

    /// Largest `|Σ σ_j (b_j + z)/(b_j - z) - 1/p(z)|` over a polar grid with
    /// radii up to `r_max`, both sides summed directly.
    pub fn reconstruction_error(&self, n_r: usize, n_theta: usize, r_max: f64) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..=n_r {
            let r = r_max * i as f64 / n_r as f64;
            for j in 0..n_theta {
                let z = Complex64::from_polar(r, TAU * (j as f64 + 0.25) / n_theta as f64);
                let err = (direct_sum(&self.zeros, z) - 1.0 / direct_sum(&self.poles, z)).norm();
                worst = worst.max(err);
            }
        }
        worst
    }

    /// `-b p'(b)`, the residue route to the dilation at a zero `b`.
    fn residue_dilation(&self, b: f64) -> f64 {
        let bc = Complex64::from_polar(1.0, b);
        let dp: Complex64 = self
            .poles
            .iter()
            .map(|a| {
                let w = chord(a.angle, b);
                Complex64::from_polar(2.0 * a.mass, a.angle) / (w * w)
            })
            .sum();
        (-bc * dp).re
    }
}

/// Gap fractions `σ_j = (T_{j+1} - T_j)/2π` between circularly consecutive
/// tip angles, in increasing angle order.
pub fn from_tips(tip_angles: &[f64]) -> Result<Vec<f64>> {
    if tip_angles.is_empty() {
        return Err(Error::argument("at least one tip angle is required"));
    }
    if tip_angles.iter().any(|t| !t.is_finite()) {
        return Err(Error::argument("tip angles must be finite"));
    }
    let mut t: Vec<f64> = tip_angles.iter().map(|&a| crate::unitdisc::normalize_angle(a)).collect();
    t.sort_by(f64::total_cmp);
    if t.windows(2).any(|w| angle_diff(w[1], w[0]) == 0.0) {
        return Err(Error::argument("duplicate tip angles"));
    }
    let m = t.len();
    if m == 1 {
        return Ok(vec![1.0]);
    }
    let mut gaps: Vec<f64> = (0..m)
        .map(|j| {
            let next = if j + 1 < m { t[j + 1] } else { t[0] + TAU };
            (next - t[j]) / TAU
        })
        .collect();
    // close the sum exactly
    let rest: f64 = gaps[..m - 1].iter().sum();
    gaps[m - 1] = 1.0 - rest;
    Ok(gaps)
}

/// Angles of the boundary zeros of `p`, one per arc between atoms.
pub fn find_zeros(p: &AtomSum) -> Vec<f64> {
    sorted(p.zeros().to_vec()).iter().map(|a| a.angle).collect()
}

/// `(b_j, σ_j)` with `σ_j = -1/(2 b_j p'(b_j))`.
pub fn dual_atoms(s: &SlitSystem) -> Vec<(f64, f64)> {
    s.zeros.iter().map(|a| (a.angle, a.mass)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PoleCheck {
    pub angle: f64,
    pub expected_mass: f64,
    pub mass: Option<f64>,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NullCheck {
    pub angle: f64,
    pub sigma: f64,
    /// `1/(2σ)`.
    pub expected_dilation: f64,
    /// `2σ`, the alternative constant.
    pub two_sigma: f64,
    pub direct: Option<f64>,
    pub residue: f64,
    pub flow: Option<f64>,
    /// Pole mass of the dual generator at `b`, expected `2σ`.
    pub dual_mass: Option<f64>,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlitVerification {
    pub poles: Vec<PoleCheck>,
    pub nulls: Vec<NullCheck>,
    pub all_ok: bool,
}

/// Dilation tolerance, relative.
const TOL_DILATION: f64 = 1e-6;
/// Mass tolerance, relative.
const TOL_MASS: f64 = 1e-6;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Classify every `a_j` and `b_j` of `s` with `g` and compare with the
/// predicted masses `2μ_j` and dilations `1/(2σ_j)`; dilations are obtained
/// from the radial limit, the residue and the dilatation of `φ_1`.
pub fn verify_slit_classification(s: &SlitSystem, g: &Generator) -> Result<SlitVerification> {
    let poles: Vec<PoleCheck> = s
        .poles
        .iter()
        .map(|a| {
            let c = g.classify_boundary(BoundaryPoint::new(a.angle));
            let expected = 2.0 * a.mass;
            let mass = c.is_pole().then(|| c.mass).flatten();
            PoleCheck {
                angle: a.angle,
                expected_mass: expected,
                mass,
                ok: mass.is_some_and(|m| rel(m, expected) <= TOL_MASS),
            }
        })
        .collect();
    let dual = g.dual();
    let flow_grid = radial_grid(4, 20)?;
    // dual masses 2σ can fall below the default pole threshold
    let dual_opts = ClassifyOptions { tol_pole: 1e-10, ..Default::default() };
    let mut nulls = Vec::with_capacity(s.zeros.len());
    for b in &s.zeros {
        let x = BoundaryPoint::new(b.angle);
        let c = g.classify_boundary(x);
        let direct = c.is_null_point().then_some(c.dilation).flatten();
        let residue = s.residue_dilation(b.angle);
        // the dilatation is e^{ℓt}; keep ℓt of order one so the radial starts
        // stay in the linear regime
        let t = (1.0 / residue).min(1.0);
        let alpha = dilatation_coefficient(|z: &DiskPoint| flow_point(g, *z, t), x, &flow_grid)?;
        let flow = alpha.converged.then(|| alpha.value.re.ln() / t);
        let d = dual.classify_boundary_with(x, &dual_opts)?;
        let dual_mass = d.is_pole().then_some(d.mass).flatten();
        let expected = 1.0 / (2.0 * b.mass);
        let ok = direct.is_some_and(|v| rel(v, expected) <= TOL_DILATION)
            && rel(residue, expected) <= TOL_DILATION
            && flow.is_some_and(|v| rel(v, expected) <= TOL_DILATION)
            && dual_mass.is_some_and(|v| rel(v, 2.0 * b.mass) <= TOL_MASS);
        nulls.push(NullCheck {
            angle: b.angle,
            sigma: b.mass,
            expected_dilation: expected,
            two_sigma: 2.0 * b.mass,
            direct,
            residue,
            flow,
            dual_mass,
            ok,
        });
    }
    let all_ok = poles.iter().all(|p| p.ok) && nulls.iter().all(|n| n.ok);
    Ok(SlitVerification { poles, nulls, all_ok })
}

impl SlitSystem {
    /// Report with arrays `a, mu, b, sigma, masses, dilations`.
    pub fn report(&self, verification: &SlitVerification) -> Value {
        json!({
            "m": self.m(),
            "a": self.poles.iter().map(|a| a.angle).collect::<Vec<_>>(),
            "mu": self.poles.iter().map(|a| a.mass).collect::<Vec<_>>(),
            "b": self.zeros.iter().map(|a| a.angle).collect::<Vec<_>>(),
            "sigma": self.zeros.iter().map(|a| a.mass).collect::<Vec<_>>(),
            "masses": verification.poles.iter().map(|p| p.mass).collect::<Vec<_>>(),
            "dilations": verification.nulls.iter().map(|n| n.direct).collect::<Vec<_>>(),
            "dilation_convention": "1/(2 sigma)",
            "two_sigma": verification.nulls.iter().map(|n| n.two_sigma).collect::<Vec<_>>(),
            "checks": {"poles": verification.poles, "nulls": verification.nulls},
            "all_ok": verification.all_ok,
        })
    }
}

/// Parsed slit spec: `{"tips": [...]}` or `{"pole_atoms": [{"angle", "mass"}]}`.
#[derive(Debug, Clone, PartialEq)]
pub enum SlitSpec {
    Tips(Vec<f64>),
    PoleAtoms(Vec<(f64, f64)>),
}

impl SlitSpec {
    pub fn from_json(v: &Value) -> Result<Self> {
        let obj = v.as_object().ok_or_else(|| Error::argument("slit spec must be a JSON object"))?;
        match (obj.get("tips"), obj.get("pole_atoms")) {
            (Some(t), None) => {
                let tips: Vec<f64> =
                    serde_json::from_value(t.clone()).map_err(|e| Error::argument(format!("tips: {e}")))?;
                Ok(SlitSpec::Tips(tips))
            }
            (None, Some(a)) => {
                let atoms: Vec<Atom> =
                    serde_json::from_value(a.clone()).map_err(|e| Error::argument(format!("pole_atoms: {e}")))?;
                Ok(SlitSpec::PoleAtoms(atoms.iter().map(|a| (a.angle, a.mass)).collect()))
            }
            _ => Err(Error::argument("slit spec needs exactly one of 'tips' or 'pole_atoms'")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn koebe_system() {
        let s = SlitSystem::from_pole_atoms(&[(PI, 1.0)], false).unwrap();
        assert_eq!(find_zeros(&AtomSum::from_pairs(&[(PI, 1.0)]).unwrap()), vec![0.0]);
        assert_eq!(s.zeros.len(), 1);
        assert!(angle_diff(s.zeros[0].angle, 0.0).abs() < 1e-15);
        assert!((s.zeros[0].mass - 1.0).abs() < 1e-14);
        let g = s.generator();
        let z = Complex64::new(0.3, 0.2);
        let koebe = -z * (1.0 - z) / (1.0 + z);
        assert!((g.evaluate(&DiskPoint::from_complex(z).unwrap()).unwrap() - koebe).norm() < 1e-15);
    }

    #[test]
    fn two_slit_system() {
        let s = SlitSystem::from_pole_atoms(&[(0.0, 0.5), (PI, 0.5)], false).unwrap();
        let b = dual_atoms(&s);
        assert!((b[0].0 - FRAC_PI_2).abs() < 1e-15 && (b[1].0 - 3.0 * FRAC_PI_2).abs() < 1e-15);
        assert!((b[0].1 - 0.5).abs() < 1e-14 && (b[1].1 - 0.5).abs() < 1e-14);
        assert!(s.interlaces());
    }

    #[test]
    fn unequal_masses() {
        let s = SlitSystem::from_pole_atoms(&[(0.0, 0.3), (PI, 0.7)], false).unwrap();
        assert!((s.sigma_sum() - 1.0).abs() < 1e-10);
        assert!((s.zeros[0].angle - FRAC_PI_2).abs() > 1e-3);
        assert!(s.reconstruction_error(10, 16, 0.95) < 1e-9);
    }

    #[test]
    fn input_validation() {
        assert!(SlitSystem::from_pole_atoms(&[(0.0, 0.3), (PI, 0.3)], false).is_err());
        let s = SlitSystem::from_pole_atoms(&[(0.0, 0.3), (PI, 0.3)], true).unwrap();
        assert!((s.mass_sum() - 1.0).abs() < 1e-15);
        assert!(SlitSystem::from_pole_atoms(&[(1.0, 0.5), (1.0 + TAU, 0.5)], false).is_err());
        assert!(SlitSystem::from_pole_atoms(&[], true).is_err());
        assert!(SlitSystem::from_pole_atoms(&[(1.0, -1.0), (2.0, 2.0)], false).is_err());
    }

    #[test]
    fn tips() {
        assert_eq!(from_tips(&[0.0, PI]).unwrap(), vec![0.5, 0.5]);
        assert_eq!(from_tips(&[2.0]).unwrap(), vec![1.0]);
        let s = from_tips(&[0.0, FRAC_PI_2, PI]).unwrap();
        assert!((s[0] - 0.25).abs() < 1e-15 && (s[1] - 0.25).abs() < 1e-15 && (s[2] - 0.5).abs() < 1e-15);
        assert!(from_tips(&[1.0, 1.0 + TAU]).is_err());
        assert!(from_tips(&[]).is_err());
    }

    #[test]
    fn verification_examples() {
        for atoms in [vec![(PI, 1.0)], vec![(0.0, 0.5), (PI, 0.5)]] {
            let s = SlitSystem::from_pole_atoms(&atoms, false).unwrap();
            let v = verify_slit_classification(&s, &s.generator()).unwrap();
            assert!(v.all_ok, "{v:?}");
            for n in &v.nulls {
                assert!((n.direct.unwrap() - 1.0 / (2.0 * n.sigma)).abs() < 1e-6);
            }
        }
        let s = SlitSystem::from_pole_atoms(&[(PI, 1.0)], false).unwrap();
        let v = verify_slit_classification(&s, &s.generator()).unwrap();
        assert!((v.poles[0].mass.unwrap() - 2.0).abs() < 1e-6);
        assert!((v.nulls[0].direct.unwrap() - 0.5).abs() < 1e-6);
        assert_eq!(v.nulls[0].two_sigma, 2.0);
        let report = s.report(&v);
        for key in ["a", "mu", "b", "sigma", "masses", "dilations"] {
            assert!(report[key].is_array(), "{key}");
        }
    }

    #[test]
    fn spec_parsing() {
        let v: Value = serde_json::from_str(r#"{"tips": [0, 3.14]}"#).unwrap();
        assert_eq!(SlitSpec::from_json(&v).unwrap(), SlitSpec::Tips(vec![0.0, 3.14]));
        let v: Value = serde_json::from_str(r#"{"pole_atoms": [{"angle": 1, "mass": 1}]}"#).unwrap();
        assert_eq!(SlitSpec::from_json(&v).unwrap(), SlitSpec::PoleAtoms(vec![(1.0, 1.0)]));
        assert!(SlitSpec::from_json(&serde_json::json!({})).is_err());
        assert!(SlitSpec::from_json(&serde_json::json!({"tips": "x"})).is_err());
    }

    fn random_atoms(angles: &[f64], masses: &[f64]) -> Vec<(f64, f64)> {
        let mut a: Vec<f64> = angles.to_vec();
        a.sort_by(f64::total_cmp);
        a.dedup_by(|x, y| (*x - *y).abs() < 0.05);
        a.iter().zip(masses).map(|(&x, &m)| (x, m)).collect()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn random_systems(angles in prop::collection::vec(0.0f64..6.28, 1..8), masses in prop::collection::vec(0.05f64..1.0, 8)) {
            let atoms = random_atoms(&angles, &masses);
            let s = SlitSystem::from_pole_atoms(&atoms, true).unwrap();
            prop_assert_eq!(s.zeros.len(), s.m());
            prop_assert!(s.interlaces());
            prop_assert!((s.mass_sum() - 1.0).abs() < 1e-10);
            prop_assert!((s.sigma_sum() - 1.0).abs() < 1e-10);
            prop_assert!(s.reconstruction_error(8, 16, 0.9) < 1e-9);
        }

        #[test]
        fn conjugation_symmetry(angles in prop::collection::vec(0.1f64..3.0, 1..4), masses in prop::collection::vec(0.05f64..1.0, 8), with_real in 0usize..3) {
            let half = random_atoms(&angles, &masses);
            let mut atoms: Vec<(f64, f64)> = half.iter().flat_map(|&(a, m)| [(a, m), (TAU - a, m)]).collect();
            match with_real {
                1 => atoms.push((0.0, 0.4)),
                2 => atoms.push((PI, 0.4)),
                _ => {}
            }
            let s = SlitSystem::from_pole_atoms(&atoms, true).unwrap();
            for b in &s.zeros {
                prop_assert!(s.zeros.iter().any(|c| angle_diff(c.angle, -b.angle).abs() < 1e-9));
            }
            let g = s.generator();
            let z = DiskPoint::new(0.3, 0.5).unwrap();
            let pz = g.p(&z).unwrap();
            let pc = g.p(&z.conj()).unwrap();
            prop_assert!((pc - pz.conj()).norm() < 1e-12 * pz.norm());
        }
    }
}
