use diskflow::generator::ClassifyOptions;
use diskflow::unitdisc::BoundaryPoint;
use diskflow::Complex64;
use std::f64::consts::{PI, TAU};
use std::fmt;

pub const MAX_PROBES: usize = 4096;

/// Exit status categories.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok = 0,
    Input = 1,
    Inconclusive = 2,
    Invariant = 3,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub status: Status,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        CliError { status: Status::Input, message: message.into() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<diskflow::Error> for CliError {
    fn from(e: diskflow::Error) -> Self {
        let status = match e {
            diskflow::Error::Argument(_) => Status::Input,
            diskflow::Error::Numeric { .. } => Status::Inconclusive,
            diskflow::Error::Internal(_) => Status::Invariant,
        };
        CliError { status, message: e.to_string() }
    }
}

/// A real number, `pi`, or a rational multiple such as `3pi/2`, `0.5*pi`.
pub fn parse_real(token: &str) -> Result<f64, CliError> {
    let t = token.trim();
    let bad = || CliError::input(format!("cannot parse '{token}' as a number"));
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim().parse::<f64>().map_err(|_| bad())?),
        None => (t, 1.0),
    };
    let value = match num.strip_suffix("pi") {
        Some(coef) => {
            let coef = coef.trim_end_matches('*').trim();
            let c = match coef {
                "" | "+" => 1.0,
                "-" => -1.0,
                c => c.parse::<f64>().map_err(|_| bad())?,
            };
            c * PI
        }
        None => num.parse::<f64>().map_err(|_| bad())?,
    };
    let v = value / den;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(bad())
    }
}

pub fn parse_list(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',').map(parse_real).collect()
}

/// `N` gives `N` equally spaced probes `2πk/N`; anything else is a list of
/// angles.
pub fn parse_angles(s: &str) -> Result<Vec<BoundaryPoint>, CliError> {
    let s = s.trim();
    let angles: Vec<f64> = match s.parse::<usize>() {
        Ok(n) => {
            if n == 0 || n > MAX_PROBES {
                return Err(CliError::input(format!("--angles count must be in 1..={MAX_PROBES}, got {n}")));
            }
            (0..n).map(|k| TAU * k as f64 / n as f64).collect()
        }
        Err(_) => parse_list(s)?,
    };
    if angles.len() > MAX_PROBES {
        return Err(CliError::input(format!("at most {MAX_PROBES} probe angles are allowed")));
    }
    Ok(angles.into_iter().map(BoundaryPoint::new).collect())
}

pub fn parse_point(s: &str) -> Result<Complex64, CliError> {
    let parts = parse_list(s)?;
    match parts.as_slice() {
        [re] => Ok(Complex64::new(*re, 0.0)),
        [re, im] => Ok(Complex64::new(*re, *im)),
        _ => Err(CliError::input(format!("expected 're' or 're,im', got '{s}'"))),
    }
}

pub fn positive(name: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::input(format!("{name} must be positive, got {v}")))
    }
}

/// Classification options from the `--tol-pole`/`--eps-kmin`/`--eps-kmax`
/// overrides.
pub fn classify_options(tol_pole: f64, kmin: Option<u32>, kmax: Option<u32>) -> Result<ClassifyOptions, CliError> {
    let grid = match (kmin, kmax) {
        (None, None) => None,
        (Some(a), Some(b)) => Some((a, b)),
        _ => return Err(CliError::input("--eps-kmin and --eps-kmax must be given together")),
    };
    Ok(ClassifyOptions { grid, tol_pole: positive("--tol-pole", tol_pole)?, ..Default::default() })
}
