use super::RadialSample;
use crate::error::{Error, Result};
use num_complex::Complex64;

/// Extrapolated limit of a radial sequence `f((1 - eps) x)` as `eps -> 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialLimitEstimate {
    /// Extrapolated limit, or the last raw sample when not converged.
    pub value: Complex64,
    /// Relative spread of the last three extrapolates.
    pub residual: f64,
    pub converged: bool,
    /// Local log-log slope `q` of `|f| ≈ c eps^{-q}` over the finest samples.
    /// Positive values mean growth.
    pub divergence_exponent: f64,
    /// Number of leading samples the estimate is based on.
    pub depth: usize,
}

impl RadialLimitEstimate {
    /// True when the sequence was classified as blowing up.
    pub fn diverges(&self) -> bool {
        !self.converged && self.divergence_exponent > 0.0
    }

    /// Converged value, if any.
    pub fn limit(&self) -> Option<Complex64> {
        self.converged.then_some(self.value)
    }
}

/// Power-law extrapolation `f(eps) = L + c eps^q` fitted on successive
/// triples of samples, optionally iterated once.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extrapolator {
    pub rel_tol: f64,
    pub abs_floor: f64,
}

/// Fewest samples a truncated estimate may rest on.
const MIN_DEPTH: usize = 6;

impl Default for Extrapolator {
    fn default() -> Self {
        Self {
            rel_tol: 1e-6,
            abs_floor: 1e-12,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Point {
    eps: f64,
    value: Complex64,
}

#[derive(Debug, Clone, Copy)]
struct TripleFit {
    limit: Complex64,
    growing: bool,
}

/// Solve `(e1^q - e2^q)/(e0^q - e1^q) = ratio` for `q > 0` and return the
/// weight `e2^q / (e1^q - e2^q)`, or `None` when no positive `q` fits.
fn power_weight(e0: f64, e1: f64, e2: f64, ratio: f64) -> Option<f64> {
    let (l0, l1, l2) = (e0.ln(), e1.ln(), e2.ln());
    let g = |q: f64| -> f64 {
        // (e1^q - e2^q)/(e0^q - e1^q) with everything scaled by e0^q
        let a = ((l1 - l0) * q).exp();
        let b = ((l2 - l0) * q).exp();
        (a - b) / (1.0 - a)
    };
    let geometric = ((l0 - l1) - (l1 - l2)).abs() <= 1e-12 * (l0 - l1).abs();
    let q = if geometric {
        if !(ratio > 0.0 && ratio < 1.0) {
            return None;
        }
        ratio.ln() / (l1 - l0)
    } else {
        let g0 = (l1 - l2) / (l0 - l1);
        if !(ratio > 0.0 && ratio < g0) {
            return None;
        }
        let (mut lo, mut hi) = (1e-9, 1.0);
        while g(hi) > ratio {
            hi *= 2.0;
            if hi > 1e4 {
                return Some(0.0);
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g(mid) > ratio {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let a = ((l1 - l2) * q).exp(); // (e1/e2)^q
    Some(1.0 / (a - 1.0))
}

impl Extrapolator {
    pub fn new(rel_tol: f64, abs_floor: f64) -> Self {
        Self { rel_tol, abs_floor }
    }

    /// Spread of the last three extrapolates, relative to the last one.
    fn residual(&self, tail: &[Point]) -> f64 {
        let k = tail.len();
        let last = tail[k - 1].value;
        let spread = tail[k.saturating_sub(3)..k - 1]
            .iter()
            .map(|p| (last - p.value).norm())
            .fold(0.0, f64::max);
        spread / (last.norm() + self.abs_floor / self.rel_tol)
    }

    fn fit(p: &[Point; 3], noise: f64) -> TripleFit {
        let d1 = p[1].value - p[0].value;
        let d2 = p[2].value - p[1].value;
        let (n1, n2) = (d1.norm(), d2.norm());
        if n2 <= noise && n1 <= noise || n2 == 0.0 {
            return TripleFit {
                limit: p[2].value,
                growing: false,
            };
        }
        if n2 >= n1 {
            return TripleFit {
                limit: p[2].value,
                growing: true,
            };
        }
        match power_weight(p[0].eps, p[1].eps, p[2].eps, n2 / n1) {
            Some(w) if w.is_finite() => TripleFit {
                limit: p[2].value + d2 * w,
                growing: false,
            },
            _ => TripleFit {
                limit: p[2].value,
                growing: false,
            },
        }
    }

    fn pass(points: &[Point]) -> Vec<(Point, bool)> {
        let scale = points.iter().map(|p| p.value.norm()).fold(0.0, f64::max);
        let noise = 64.0 * f64::EPSILON * scale;
        points
            .windows(3)
            .map(|w| {
                let fit = Self::fit(&[w[0], w[1], w[2]], noise);
                (
                    Point {
                        eps: w[2].eps,
                        value: fit.limit,
                    },
                    fit.growing,
                )
            })
            .collect()
    }

    /// Extrapolate the limit of `samples` (ordered by strictly decreasing eps).
    pub fn estimate(&self, samples: &[RadialSample]) -> Result<RadialLimitEstimate> {
        if samples.len() < 4 {
            return Err(Error::argument(format!(
                "extrapolation needs at least 4 samples, got {}",
                samples.len()
            )));
        }
        if samples
            .windows(2)
            .any(|w| !(w[0].eps > w[1].eps && w[1].eps > 0.0))
        {
            return Err(Error::argument(
                "extrapolation needs strictly decreasing positive eps",
            ));
        }
        let finite = samples.iter().take_while(|s| s.value.is_finite()).count();
        if finite < 4 {
            let last = samples[finite.min(samples.len() - 1)];
            return Ok(RadialLimitEstimate {
                value: last.value,
                residual: f64::INFINITY,
                converged: false,
                divergence_exponent: f64::INFINITY,
                depth: finite,
            });
        }
        let samples = &samples[..finite];
        let full = self.estimate_prefix(samples);
        if full.diverges() && full.residual.is_infinite() {
            return Ok(full);
        }
        // Roundoff grows towards the circle, so a shorter grid can beat the
        // full one; keep the prefix whose extrapolates agree best.
        let best = (MIN_DEPTH..samples.len())
            .map(|n| self.estimate_prefix(&samples[..n]))
            .filter(|e| e.converged)
            .fold(full, |acc, e| if !acc.converged || e.residual < acc.residual { e } else { acc });
        Ok(best)
    }

    fn estimate_prefix(&self, samples: &[RadialSample]) -> RadialLimitEstimate {
        let n = samples.len();
        let last = samples[n - 1];
        let slope = |i: usize| -> f64 {
            let (a, b) = (samples[i - 1], samples[i]);
            let (fa, fb) = (a.value.norm(), b.value.norm());
            if fa == 0.0 || fb == 0.0 {
                return 0.0;
            }
            (fb / fa).ln() / (a.eps / b.eps).ln()
        };
        let divergence_exponent = 0.5 * (slope(n - 1) + slope(n - 2));

        let points: Vec<Point> = samples
            .iter()
            .map(|s| Point {
                eps: s.eps,
                value: s.value,
            })
            .collect();
        let first = Self::pass(&points);

        let tail_growing = first.iter().rev().take(3).all(|&(_, g)| g);
        let growth = last.value.norm() / samples[n - 4].value.norm();
        if tail_growing && growth >= 1.1 {
            return RadialLimitEstimate {
                value: last.value,
                residual: f64::INFINITY,
                converged: false,
                divergence_exponent,
                depth: n,
            };
        }

        let firsts: Vec<Point> = first.iter().map(|&(p, _)| p).collect();
        let mut best = self.residual(&firsts);
        let mut best_value = firsts[firsts.len() - 1].value;

        if firsts.len() >= 4 {
            let second: Vec<Point> = Self::pass(&firsts).into_iter().map(|(p, _)| p).collect();
            let k = second.len();
            let r = self.residual(&second);
            if r.is_finite() && r < best {
                best = r;
                best_value = second[k - 1].value;
            }
        }

        let converged = best <= self.rel_tol && best_value.is_finite();
        RadialLimitEstimate {
            value: if converged { best_value } else { last.value },
            residual: best,
            converged,
            divergence_exponent,
            depth: n,
        }
    }

    /// Convenience wrapper over real-valued samples.
    pub fn estimate_real(&self, samples: &[(f64, f64)]) -> Result<RadialLimitEstimate> {
        let s: Vec<RadialSample> = samples
            .iter()
            .map(|&(e, v)| RadialSample::new(e, Complex64::new(v, 0.0)))
            .collect();
        self.estimate(&s)
    }
}

/// Limit of a sequence converging like `L + c / ln(1/eps)`, eliminating the
/// logarithmic term between successive pairs of samples.
pub fn extrapolate_log_rate(samples: &[(f64, f64)], rel_tol: f64) -> Result<RadialLimitEstimate> {
    if samples.len() < 3 {
        return Err(Error::argument(
            "logarithmic extrapolation needs at least 3 samples",
        ));
    }
    if samples
        .windows(2)
        .any(|w| !(w[0].0 > w[1].0 && w[1].0 > 0.0 && w[0].0 < 1.0))
    {
        return Err(Error::argument(
            "logarithmic extrapolation needs strictly decreasing eps in (0, 1)",
        ));
    }
    let est: Vec<f64> = samples
        .windows(2)
        .map(|w| {
            let (l1, l2) = (-(w[0].0.ln()), -(w[1].0.ln()));
            (l2 * w[1].1 - l1 * w[0].1) / (l2 - l1)
        })
        .collect();
    let k = est.len();
    let (last, prev) = (est[k - 1], est[k - 2]);
    let residual = (last - prev).abs() / (last.abs() + 1e-12 / rel_tol);
    let converged = residual <= rel_tol && last.is_finite();
    let raw = samples[samples.len() - 1].1;
    Ok(RadialLimitEstimate {
        value: Complex64::new(if converged { last } else { raw }, 0.0),
        residual,
        converged,
        divergence_exponent: 0.0,
        depth: samples.len(),
    })
}
