//! Truncations of an infinite slit system whose tips accumulate at `1`.
//!
//! Tips sit at `e^{±2πiθ_j}` with `θ_j` decreasing in `(0, 1/2)`. The `m`-th
//! truncation has
//! `1/p_m = (1 - 2θ_1)/2 · (1-z)/(1+z) + Σ_{j<m} (θ_j - θ_{j+1}) K_j + θ_m K_m`
//! where `K_j = (1 - z²)/((z - b_j)(z - b̄_j))` is a conjugate atom pair of
//! half weight each and `b_j` sits at angle `π(θ_j + θ_{j+1})`.
//! When `S_m = Σ_j 2(θ_j - θ_{j+1})/|1 - b_j|²` grows without bound the pole
//! of `G_m` at `1` loses its mass.

use crate::error::{Error, Result};
use crate::generator::{AtomSum, BoundaryTag, DenjoyWolff, Generator, Reciprocal};
use crate::unitdisc::{BoundaryPoint, DiskPoint};
use serde::Serialize;
use std::f64::consts::PI;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ThetaRule {
    /// `θ_j = 1/(j + 2)`.
    Harmonic,
    /// `θ_j = 2^{-(j+1)}`.
    Geometric,
}

impl ThetaRule {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "harmonic" => Ok(ThetaRule::Harmonic),
            "geometric" => Ok(ThetaRule::Geometric),
            _ => Err(Error::argument(format!("unknown theta rule '{name}' (harmonic, geometric)"))),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            ThetaRule::Harmonic => "harmonic",
            ThetaRule::Geometric => "geometric",
        }
    }

    /// `θ_j` for `j >= 1`; always in `(0, 1/2)` and strictly decreasing.
    pub fn theta(&self, j: usize) -> f64 {
        match self {
            ThetaRule::Harmonic => 1.0 / (j as f64 + 2.0),
            ThetaRule::Geometric => 0.5f64.powi(j as i32 + 1),
        }
    }

    /// Angle of `b_j`.
    pub fn b_angle(&self, j: usize) -> f64 {
        PI * (self.theta(j) + self.theta(j + 1))
    }

    /// `S_m`, nondecreasing in `m`.
    pub fn fatou_sum(&self, m: usize) -> f64 {
        (1..=m)
            .map(|j| {
                let w = self.theta(j) - self.theta(j + 1);
                // |1 - b|² = 4 sin²(angle/2)
                let s = (0.5 * self.b_angle(j)).sin();
                2.0 * w / (4.0 * s * s)
            })
            .sum()
    }

    /// Dual atoms of `1/p_m`.
    pub fn dual_atoms(&self, m: usize) -> Vec<(f64, f64)> {
        let mut atoms = vec![(PI, 0.5 * (1.0 - 2.0 * self.theta(1)))];
        for j in 1..=m {
            let w = if j < m { self.theta(j) - self.theta(j + 1) } else { self.theta(m) };
            let b = self.b_angle(j);
            atoms.push((b, 0.5 * w));
            atoms.push((-b, 0.5 * w));
        }
        atoms
    }

    /// `G_m(z) = -z p_m(z)`.
    pub fn generator(&self, m: usize) -> Result<Generator> {
        if m == 0 {
            return Err(Error::argument("truncation level must be at least 1"));
        }
        let dual = Arc::new(AtomSum::from_pairs(&self.dual_atoms(m))?);
        Ok(Generator::new(
            DenjoyWolff::origin(),
            Arc::new(Reciprocal::new(dual)),
            format!("no_tip_{}_{m}", self.as_str()),
        ))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruncationRow {
    pub m: usize,
    pub fatou_sum: f64,
    /// `D_m(ε) = 1/(ε p_m(1 - ε))` at each probe `ε`.
    pub d_values: Vec<f64>,
    pub tag: BoundaryTag,
    /// Pole mass of `G_m` at `1`, when classified as a pole.
    pub mass: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruncationStudy {
    pub rule: ThetaRule,
    pub probe_eps: Vec<f64>,
    pub rows: Vec<TruncationRow>,
}

impl TruncationStudy {
    pub fn masses_decrease(&self) -> bool {
        self.rows
            .windows(2)
            .all(|w| matches!((w[0].mass, w[1].mass), (Some(a), Some(b)) if b < a))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("m,fatou_sum,mass");
        for e in &self.probe_eps {
            out.push_str(&format!(",d_{e:e}"));
        }
        out.push('\n');
        for r in &self.rows {
            let mass = r.mass.map_or("nan".to_string(), |m| m.to_string());
            out.push_str(&format!("{},{},{}", r.m, r.fatou_sum, mass));
            for d in &r.d_values {
                out.push_str(&format!(",{d}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Fatou sums, `D_m(ε)` and the classifier's pole mass at `1` for each
/// truncation level.
pub fn example_no_tip(rule: ThetaRule, levels: &[usize], probe_eps: &[f64]) -> Result<TruncationStudy> {
    if probe_eps.iter().any(|e| !(*e > 0.0 && *e < 1.0)) {
        return Err(Error::argument("probe radii must lie in (0, 1)"));
    }
    let x = BoundaryPoint::new(0.0);
    let rows = levels
        .iter()
        .map(|&m| {
            let g = rule.generator(m)?;
            let d_values = probe_eps
                .iter()
                .map(|&eps| {
                    let p = g.p(&DiskPoint::from_polar_gap(eps, 0.0)?)?;
                    Ok(1.0 / (eps * p.re))
                })
                .collect::<Result<Vec<_>>>()?;
            let c = g.classify_boundary(x);
            Ok(TruncationRow {
                m,
                fatou_sum: rule.fatou_sum(m),
                d_values,
                tag: c.tag,
                mass: if c.is_pole() { c.mass } else { None },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TruncationStudy { rule, probe_eps: probe_eps.to_vec(), rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::HerglotzFunction;

    #[test]
    fn theta_rules_stay_in_range() {
        for rule in [ThetaRule::Harmonic, ThetaRule::Geometric] {
            for j in 1..200 {
                let t = rule.theta(j);
                assert!(t > 0.0 && t < 0.5 && rule.theta(j + 1) < t);
                assert!(rule.b_angle(j) < 2.0 * PI * t && rule.b_angle(j) > 2.0 * PI * rule.theta(j + 1));
            }
        }
        assert_eq!(ThetaRule::parse("harmonic").unwrap(), ThetaRule::Harmonic);
        assert!(ThetaRule::parse("x").is_err());
    }

    #[test]
    fn pair_kernel_is_two_half_atoms() {
        let b = 0.7f64;
        let bc = num_complex::Complex64::from_polar(1.0, b);
        let atoms = AtomSum::from_pairs(&[(b, 0.5), (-b, 0.5)]).unwrap();
        let z = DiskPoint::new(0.2, -0.4).unwrap();
        let zc = z.to_complex();
        let kernel = (1.0 - zc * zc) / ((zc - bc) * (zc - bc.conj()));
        assert!((atoms.value(&z).unwrap() - kernel).norm() < 1e-14);
    }

    #[test]
    fn dual_weights_sum() {
        for m in [1, 2, 8] {
            let total: f64 = ThetaRule::Harmonic.dual_atoms(m).iter().map(|a| a.1).sum();
            assert!((total - 0.5).abs() < 1e-14);
        }
        // m = 1 is the three-atom system around a single tip pair
        let g = ThetaRule::Harmonic.generator(1).unwrap();
        let c = g.classify_boundary(BoundaryPoint::new(0.0));
        assert!(c.is_pole());
        assert!(ThetaRule::Harmonic.generator(0).is_err());
    }

    #[test]
    fn fatou_sums_grow() {
        for rule in [ThetaRule::Harmonic, ThetaRule::Geometric] {
            let s: Vec<f64> = [8, 16, 32, 64].iter().map(|&m| rule.fatou_sum(m)).collect();
            assert!(s.windows(2).all(|w| w[1] > w[0]));
            assert!(s[3] - s[0] > 1.0, "{rule:?} {s:?}");
        }
    }

    #[test]
    fn pole_mass_fades() {
        let study = example_no_tip(ThetaRule::Harmonic, &[8, 16, 32, 64], &[1e-2, 1e-4]).unwrap();
        assert!(study.masses_decrease(), "{study:?}");
        for r in &study.rows {
            // mass = 2 lim (1 - r) p_m(r) and 1/p_m(r) ≈ (1 - r) S_m-like sum
            let m = r.mass.unwrap();
            assert!(m > 0.0 && m < 2.0);
            assert!(r.d_values[1] > 0.0);
        }
        let last = study.rows.last().unwrap();
        assert!(last.mass.unwrap() < 0.5 * study.rows[0].mass.unwrap());
        let csv = study.to_csv();
        assert_eq!(csv.lines().count(), 5);
    }
}
