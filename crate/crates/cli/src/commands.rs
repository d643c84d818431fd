use crate::config::{classify_options, parse_point, positive, CliError, Status};
use diskflow::flow::{flow_with, FlowOptions};
use diskflow::generator::{BoundaryTag, Generator};
use diskflow::koenigs::koenigs;
use diskflow::multislit::{from_tips, verify_slit_classification, SlitSpec, SlitSystem, ThetaRule};
use diskflow::scenarios::fixtures::{probes, seeded_generators};
use diskflow::scenarios::{ScenarioParams, ScenarioRegistry};
use diskflow::unitdisc::{BoundaryPoint, DiskPoint};
use diskflow::Complex64;
use rayon::prelude::*;
use serde_json::{json, Map, Value};
use std::f64::consts::TAU;
use std::path::Path;

/// Rendered command output and its exit status.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub text: String,
    pub status: Status,
}

impl Output {
    fn json(v: &Value, status: Status) -> Self {
        let mut text = serde_json::to_string_pretty(v).expect("JSON values serialize");
        text.push('\n');
        Output { text, status }
    }
}

pub fn read_json(path: &Path) -> Result<Value, CliError> {
    let raw = std::fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&raw).map_err(|e| CliError::input(format!("{}: invalid JSON: {e}", path.display())))
}

pub fn load_generator(path: &Path) -> Result<Generator, CliError> {
    Ok(Generator::from_json(&read_json(path)?)?)
}

pub struct ClassifyArgs<'a> {
    pub spec: &'a Path,
    pub angles: Vec<BoundaryPoint>,
    pub tol_pole: f64,
    pub eps_kmin: Option<u32>,
    pub eps_kmax: Option<u32>,
}

pub fn classify(args: &ClassifyArgs) -> Result<Output, CliError> {
    let g = load_generator(args.spec)?;
    let opts = classify_options(args.tol_pole, args.eps_kmin, args.eps_kmax)?;
    let rows = args
        .angles
        .par_iter()
        .map(|x| g.classify_boundary_with(*x, &opts))
        .collect::<Result<Vec<_>, _>>()?;
    let inconclusive = rows.iter().any(|c| c.tag == BoundaryTag::Inconclusive);
    let out: Vec<Value> = rows
        .iter()
        .map(|c| {
            let mut m = Map::new();
            m.insert("angle".into(), json!(c.angle));
            m.insert("tag".into(), json!(c.tag.as_str()));
            if let Some(mass) = c.mass {
                m.insert("mass".into(), json!(mass));
            }
            if let Some(d) = c.dilation {
                m.insert("dilation".into(), json!(d));
            }
            m.insert("residual".into(), json!(c.residual()));
            if let Some(note) = &c.note {
                m.insert("note".into(), json!(note));
            }
            Value::Object(m)
        })
        .collect();
    Ok(Output::json(&Value::Array(out), if inconclusive { Status::Inconclusive } else { Status::Ok }))
}

pub struct FlowArgs<'a> {
    pub spec: &'a Path,
    pub z0: &'a str,
    pub t_end: Option<f64>,
    pub times: Vec<f64>,
    pub variational: bool,
    pub rel_tol: f64,
    pub abs_tol: f64,
}

pub fn flow(args: &FlowArgs) -> Result<Output, CliError> {
    let g = load_generator(args.spec)?;
    let z0 = DiskPoint::from_complex(parse_point(args.z0)?)?;
    let mut checkpoints = args.times.clone();
    checkpoints.extend(args.t_end);
    if checkpoints.is_empty() {
        return Err(CliError::input("flow needs --t-end or --t"));
    }
    if let Some(t) = checkpoints.iter().find(|t| !(**t >= 0.0 && t.is_finite())) {
        return Err(CliError::input(format!("flow times must be finite and nonnegative, got {t}")));
    }
    checkpoints.sort_by(f64::total_cmp);
    checkpoints.dedup();
    let opts = FlowOptions {
        rel_tol: positive("--rel-tol", args.rel_tol)?,
        abs_tol: positive("--abs-tol", args.abs_tol)?,
        ..Default::default()
    };
    match flow_with(&g, z0, &checkpoints, args.variational, &opts) {
        Ok(traj) => Ok(Output { text: traj.to_csv(), status: Status::Ok }),
        Err(f) => {
            let status = CliError::from(f.error.clone()).status;
            let mut text = f.partial.to_csv();
            text.push_str(&format!("# error={}\n", f.error));
            Ok(Output { text, status })
        }
    }
}

pub fn koenigs_csv(spec: &Path, n: usize) -> Result<Output, CliError> {
    let g = load_generator(spec)?;
    let k = koenigs(&g)?;
    Ok(Output { text: k.boundary_csv(n)?, status: Status::Ok })
}

pub fn multislit(spec: &Path, normalize: bool) -> Result<Output, CliError> {
    match SlitSpec::from_json(&read_json(spec)?)? {
        SlitSpec::Tips(tips) => {
            let sigma = from_tips(&tips)?;
            let mut sorted: Vec<f64> = tips.iter().map(|t| t.rem_euclid(TAU)).collect();
            sorted.sort_by(f64::total_cmp);
            Ok(Output::json(&json!({"tips": sorted, "sigma": sigma}), Status::Ok))
        }
        SlitSpec::PoleAtoms(atoms) => {
            let s = SlitSystem::from_pole_atoms(&atoms, normalize)?;
            let v = verify_slit_classification(&s, &s.generator())?;
            let status = if v.all_ok { Status::Ok } else { Status::Invariant };
            Ok(Output::json(&s.report(&v), status))
        }
    }
}

pub struct ExampleArgs {
    pub name: String,
    pub alphas: Option<Vec<f64>>,
    pub theta_rule: String,
    pub levels: Option<Vec<usize>>,
    pub probe_eps: Option<Vec<f64>>,
}

pub fn example(args: &ExampleArgs) -> Result<Output, CliError> {
    let registry = ScenarioRegistry::builtin();
    let scenario = registry.get(&args.name)?;
    let defaults = ScenarioParams::default();
    let params = ScenarioParams {
        alphas: args.alphas.clone().unwrap_or(defaults.alphas),
        theta_rule: ThetaRule::parse(&args.theta_rule)?,
        levels: args.levels.clone().unwrap_or(defaults.levels),
        probe_eps: args.probe_eps.clone().unwrap_or(defaults.probe_eps),
    };
    let report = scenario.run(&params)?;
    let status = if report.passed { Status::Ok } else { Status::Inconclusive };
    let value = serde_json::to_value(&report).map_err(|e| CliError::input(e.to_string()))?;
    Ok(Output::json(&value, status))
}

fn check(name: &str, passed: bool, value: f64) -> Value {
    json!({"check": name, "passed": passed, "value": value})
}

/// Structural invariants on seeded generators plus the Koebe scenario.
pub fn selftest(seed: u64, count: usize) -> Result<Output, CliError> {
    if count == 0 || count > 64 {
        return Err(CliError::input("--count must be in 1..=64"));
    }
    let fixtures = seeded_generators(seed, count)?;
    let mut all = true;
    let mut entries = Vec::new();
    for f in &fixtures {
        let g = &f.generator;
        let dual = g.dual();
        let twice = dual.dual();
        let tau = g.tau().to_complex();
        let (mut product, mut involution) = (0.0f64, 0.0f64);
        for i in 0..=8 {
            for j in 0..24 {
                let zc = Complex64::from_polar(0.95 * i as f64 / 8.0, TAU * (j as f64 + 0.3) / 24.0);
                let z = DiskPoint::from_complex(zc)?;
                let frame = (tau - zc) * (1.0 - tau.conj() * zc);
                let gz = g.evaluate(&z)?;
                product = product.max((gz * dual.evaluate(&z)? - frame * frame).norm() / (1.0 + zc.norm().powi(4)));
                involution = involution.max((twice.evaluate(&z)? - gz).norm() / gz.norm().max(1.0));
            }
        }
        let poles: Vec<(BoundaryPoint, f64)> = probes()
            .par_iter()
            .map(|x| (*x, g.classify_boundary(*x)))
            .filter(|(_, c)| c.is_pole())
            .map(|(x, c)| (x, c.mass.expect("poles carry a mass")))
            .collect();
        let budget = g.pole_budget_check(&poles)?;
        let min_re = g.min_real_part(16, 64)?;
        let checks = vec![
            check("re_p_nonnegative", min_re >= -1e-10, min_re),
            check("product_identity", product <= 1e-10, product),
            check("dual_involution", involution <= 1e-12, involution),
            check("pole_count", poles.len() == f.atoms.len(), poles.len() as f64),
            check("pole_budget", budget.holds, budget.rhs - budget.lhs),
        ];
        all &= checks.iter().all(|c| c["passed"] == json!(true));
        entries.push(json!({"label": f.label, "checks": checks}));
    }
    let koebe = ScenarioRegistry::builtin().get("koebe_suite")?.run(&ScenarioParams::default())?;
    all &= koebe.passed;
    let v = json!({
        "seed": seed,
        "generators": entries,
        "koebe_suite": koebe.passed,
        "passed": all,
    });
    Ok(Output::json(&v, if all { Status::Ok } else { Status::Invariant }))
}
