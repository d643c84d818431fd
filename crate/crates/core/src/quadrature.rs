//! Adaptive Gauss–Kronrod quadrature for complex-valued integrands on real
//! intervals, with caller-supplied forced breakpoints.

use crate::error::{Error, Result};
use num_complex::Complex64;

// 21-point Kronrod extension of the 10-point Gauss rule (QUADPACK qk21).
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.000_000_000_000_000_000_000_000_000_000_000,
];
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Integral {
    pub value: Complex64,
    pub error: f64,
    /// Integral of `|f|`, the scale against which the error is judged.
    pub abs_value: f64,
    pub intervals: usize,
}

impl Integral {
    /// Accumulate `weight · other`.
    pub fn add(&mut self, other: &Integral, weight: f64) {
        self.value += other.value * weight;
        self.error += other.error * weight;
        self.abs_value += other.abs_value * weight;
        self.intervals += other.intervals;
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    /// Target error relative to the integral of `|f|`.
    pub rel_tol: f64,
    /// Failure threshold relative to the integral of `|f|`.
    pub fail_tol: f64,
    /// Absolute error that is always accepted.
    pub abs_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-13,
            fail_tol: 1e-10,
            abs_tol: 0.0,
            max_intervals: 4000,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
    abs_value: f64,
}

fn rescale(err: f64, resasc: f64, resabs: f64) -> f64 {
    let mut e = err;
    if resasc != 0.0 && e != 0.0 {
        e = resasc * (200.0 * e / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        e = e.max(50.0 * f64::EPSILON * resabs);
    }
    e
}

fn gk21<F: Fn(f64) -> (Complex64, f64)>(f: &F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let (fc, mc) = f(center);
    let mut kronrod = fc * WGK[10];
    let mut abs_k = mc * WGK[10];
    let mut gauss = Complex64::new(0.0, 0.0);
    let mut values = [(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)); 10];
    for (j, slot) in values.iter_mut().enumerate() {
        let dx = half * XGK[j];
        let (f1, m1) = f(center - dx);
        let (f2, m2) = f(center + dx);
        *slot = (f1, f2);
        kronrod += (f1 + f2) * WGK[j];
        abs_k += (m1 + m2) * WGK[j];
        if j % 2 == 1 {
            gauss += (f1 + f2) * WG[j / 2];
        }
    }
    let mean = kronrod * 0.5;
    let mut asc = WGK[10] * (fc - mean).norm();
    for (j, (f1, f2)) in values.iter().enumerate() {
        asc += WGK[j] * ((f1 - mean).norm() + (f2 - mean).norm());
    }
    let h = half.abs();
    let value = kronrod * half;
    let abs_value = abs_k * h;
    let err = ((kronrod - gauss) * half).norm();
    Segment {
        a,
        b,
        value,
        error: rescale(err, asc * h, abs_value),
        abs_value,
    }
}

/// Integrate `f` over `[a, b]`, splitting first at every breakpoint inside
/// the interval.
pub fn integrate<F>(f: F, a: f64, b: f64, breakpoints: &[f64], opts: &QuadOptions) -> Result<Integral>
where
    F: Fn(f64) -> Complex64,
{
    integrate_scaled(
        |x| {
            let v = f(x);
            (v, v.norm())
        },
        a,
        b,
        breakpoints,
        opts,
    )
}

/// As [`integrate`], for integrands that return `(value, magnitude)`.
///
/// The magnitude replaces `|value|` in the error scale. Integrands that are
/// sums of cancelling terms report the sum of the term moduli there.
pub fn integrate_scaled<F>(f: F, a: f64, b: f64, breakpoints: &[f64], opts: &QuadOptions) -> Result<Integral>
where
    F: Fn(f64) -> (Complex64, f64),
{
    if !(a.is_finite() && b.is_finite()) || b < a {
        return Err(Error::argument(format!("bad integration interval [{a}, {b}]")));
    }
    if a == b {
        return Ok(Integral {
            value: Complex64::new(0.0, 0.0),
            error: 0.0,
            abs_value: 0.0,
            intervals: 0,
        });
    }
    let mut cuts: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|&p| p > a && p < b && p.is_finite())
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|x, y| (*x - *y).abs() <= 4.0 * f64::EPSILON * x.abs().max(1.0));
    let mut nodes = Vec::with_capacity(cuts.len() + 2);
    nodes.push(a);
    nodes.extend(cuts);
    nodes.push(b);

    let mut segments: Vec<Segment> = nodes
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| gk21(&f, w[0], w[1]))
        .collect();

    loop {
        // fixed summation order keeps results reproducible
        let value: Complex64 = segments.iter().map(|s| s.value).sum();
        let error: f64 = segments.iter().map(|s| s.error).sum();
        let abs_value: f64 = segments.iter().map(|s| s.abs_value).sum();
        if !value.is_finite() {
            return Err(Error::numeric("integrand produced a non-finite value", f64::INFINITY));
        }
        let target = (opts.rel_tol * abs_value).max(opts.abs_tol);
        if error <= target || abs_value == 0.0 {
            return Ok(Integral {
                value,
                error,
                abs_value,
                intervals: segments.len(),
            });
        }
        let (idx, worst) = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, s)| (i, *s))
            .expect("at least one segment");
        let mid = 0.5 * (worst.a + worst.b);
        let too_small = mid <= worst.a || mid >= worst.b;
        if segments.len() >= opts.max_intervals || too_small {
            if error <= (opts.fail_tol * abs_value).max(opts.abs_tol) {
                return Ok(Integral {
                    value,
                    error,
                    abs_value,
                    intervals: segments.len(),
                });
            }
            return Err(Error::numeric(
                format!(
                    "quadrature did not converge after {} subintervals",
                    segments.len()
                ),
                error,
            ));
        }
        let left = gk21(&f, worst.a, mid);
        let right = gk21(&f, mid, worst.b);
        segments[idx] = left;
        segments.insert(idx + 1, right);
    }
}

/// Breakpoints clustering geometrically around `center` on `[a, b]`:
/// `center ± width·4^j` for `j = 0, 1, ...` while inside the interval.
pub fn ladder(center: f64, width: f64, a: f64, b: f64) -> Vec<f64> {
    let mut out = vec![center];
    if !(width > 0.0) {
        return out;
    }
    let mut w = width;
    while w < (b - a) {
        out.push(center - w);
        out.push(center + w);
        w *= 4.0;
    }
    out.retain(|&p| p > a && p < b);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn real(f: impl Fn(f64) -> f64) -> impl Fn(f64) -> Complex64 {
        move |x| Complex64::new(f(x), 0.0)
    }

    #[test]
    fn polynomial_exact() {
        let r = integrate(real(|x| x * x * x - x), 0.0, 2.0, &[], &QuadOptions::default()).unwrap();
        assert!((r.value.re - 2.0).abs() < 1e-14);
    }

    #[test]
    fn sqrt_singularity() {
        let r = integrate(real(|x: f64| 1.0 / x.sqrt()), 0.0, 1.0, &[], &QuadOptions::default()).unwrap();
        assert!((r.value.re - 2.0).abs() < 1e-11, "{r:?}");
    }

    #[test]
    fn lorentzian_peak_with_ladder() {
        let eps = 1e-9;
        let f = real(move |t: f64| eps / (eps * eps + t * t));
        let bp = ladder(0.0, eps, -1.0, 1.0);
        let r = integrate(f, -1.0, 1.0, &bp, &QuadOptions::default()).unwrap();
        let exact = 2.0 * (1.0 / eps).atan();
        assert!((r.value.re - exact).abs() < 1e-12 * exact, "{r:?}");
    }

    #[test]
    fn oscillatory_complex() {
        let r = integrate(|t| Complex64::from_polar(1.0, 3.0 * t), 0.0, 2.0 * PI, &[], &QuadOptions::default())
            .unwrap();
        assert!(r.value.norm() < 1e-13);
    }

    #[test]
    fn reports_failure() {
        let opts = QuadOptions {
            max_intervals: 5,
            ..QuadOptions::default()
        };
        let err = integrate(real(|x: f64| x.abs().powf(-0.9)), -1.0, 1.0, &[], &opts).unwrap_err();
        assert!(matches!(err, Error::Numeric { .. }));
    }
}
