//! Dormand–Prince 5(4) pair with PI step control for a two-component complex
//! autonomous system.

use crate::error::{Error, Result};
use num_complex::Complex64;

pub(crate) type State = [Complex64; 2];

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const ALPHA: f64 = 0.17;
const BETA: f64 = 0.04;

fn axpy(y: &State, terms: &[(f64, &State)], h: f64) -> State {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..2 {
            out[i] += h * c * k[i];
        }
    }
    out
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    /// Largest scaled local error estimate over accepted steps.
    pub max_error: f64,
}

pub(crate) struct Problem<'a> {
    /// Right-hand side; `None` when the stage point is inadmissible.
    pub rhs: &'a dyn Fn(&State) -> Option<State>,
    /// Per-component error scale for the step `old -> new`; infinite scales
    /// exclude a component from control.
    pub scale: &'a dyn Fn(&State, &State) -> [f64; 2],
    pub max_steps: usize,
    /// Cap on the first step.
    pub first_step_cap: f64,
}

pub(crate) struct Failure {
    pub error: Error,
    pub stats: StepStats,
}

fn norm(d: &State, sc: &[f64; 2]) -> f64 {
    let mut sum = 0.0;
    let mut n = 0;
    for i in 0..2 {
        if sc[i].is_finite() {
            let q = d[i].norm() / sc[i];
            sum += q * q;
            n += 1;
        }
    }
    if n == 0 {
        0.0
    } else {
        (sum / n as f64).sqrt()
    }
}

/// Integrate from `t = 0` through every checkpoint (increasing, positive),
/// calling `accept(t, y)` after every accepted step.
pub(crate) fn integrate(
    problem: &Problem,
    y0: State,
    checkpoints: &[f64],
    accept: &mut dyn FnMut(f64, &State),
) -> std::result::Result<StepStats, Failure> {
    let mut stats = StepStats::default();
    let fail = |error: Error, stats: StepStats| Failure { error, stats };
    let Some(end) = checkpoints.last().copied() else {
        return Ok(stats);
    };
    if end == 0.0 {
        return Ok(stats);
    }
    let mut y = y0;
    let mut k1 = (problem.rhs)(&y).ok_or_else(|| fail(Error::argument("flow start point is inadmissible"), stats))?;

    // natural time scale |y|/|f|
    let sc0 = (problem.scale)(&y, &y);
    let (d0, d1) = (norm(&y, &sc0), norm(&k1, &sc0));
    let t_scale = if d0 > 1e-5 && d1 > 1e-5 { d0 / d1 } else { 1.0 };
    let mut h = (0.01 * t_scale).min(problem.first_step_cap).min(end);
    let h_floor = |t: f64| 1e-14 * t.max(t_scale);

    let mut t = 0.0;
    let mut next = 0;
    while next < checkpoints.len() && checkpoints[next] <= 0.0 {
        next += 1;
    }
    let mut err_prev: f64 = 1e-4;
    let mut rejected_last = false;

    while next < checkpoints.len() {
        if stats.accepted + stats.rejected >= problem.max_steps {
            return Err(fail(
                Error::numeric(format!("flow exceeded {} steps at t = {t}", problem.max_steps), h),
                stats,
            ));
        }
        if h < h_floor(t) {
            return Err(fail(Error::numeric(format!("flow step underflow at t = {t}"), h), stats));
        }
        let target = checkpoints[next];
        let lands = t + 1.01 * h >= target;
        let step = if lands { target - t } else { h };

        let stage = |y: State| (problem.rhs)(&y);
        let result = (|| {
            let k2 = stage(axpy(&y, &[(A21, &k1)], step))?;
            let k3 = stage(axpy(&y, &[(A31, &k1), (A32, &k2)], step))?;
            let k4 = stage(axpy(&y, &[(A41, &k1), (A42, &k2), (A43, &k3)], step))?;
            let k5 = stage(axpy(&y, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], step))?;
            let k6 = stage(axpy(
                &y,
                &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
                step,
            ))?;
            let y_new = axpy(&y, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)], step);
            let k7 = stage(y_new)?;
            let mut e = [Complex64::new(0.0, 0.0); 2];
            for i in 0..2 {
                e[i] = step * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            }
            Some((y_new, k7, e))
        })();

        let Some((y_new, k7, e)) = result else {
            stats.rejected += 1;
            rejected_last = true;
            h = 0.25 * step;
            continue;
        };
        let err = norm(&e, &(problem.scale)(&y, &y_new));
        if !err.is_finite() {
            stats.rejected += 1;
            rejected_last = true;
            h = 0.25 * step;
            continue;
        }
        if err <= 1.0 {
            stats.accepted += 1;
            stats.max_error = stats.max_error.max(err);
            t = if lands { target } else { t + step };
            y = y_new;
            k1 = k7;
            accept(t, &y);
            if lands {
                next += 1;
            }
            let mut fac = if err == 0.0 {
                FAC_MAX
            } else {
                SAFETY * err.powf(-ALPHA) * err_prev.powf(BETA)
            };
            fac = fac.clamp(FAC_MIN, FAC_MAX);
            if rejected_last {
                fac = fac.min(1.0);
            }
            // a step clipped to a checkpoint says little about the next one
            h = if lands { h.max(step * fac) } else { step * fac };
            err_prev = err.max(1e-4);
            rejected_last = false;
        } else {
            stats.rejected += 1;
            rejected_last = true;
            h = step * (SAFETY * err.powf(-0.2)).max(FAC_MIN);
        }
    }
    Ok(stats)
}

pub(crate) fn check_checkpoints(checkpoints: &[f64]) -> Result<()> {
    if checkpoints.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(Error::argument("flow times must be finite and nonnegative"));
    }
    if checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::argument("flow checkpoints must be strictly increasing"));
    }
    Ok(())
}
