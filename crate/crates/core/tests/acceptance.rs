//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

use diskflow::flow::{flow_point, phi_beta_points_with, BetaOptions, BetaVerdict, FlowOptions};
use diskflow::generator::{AtomSum, BoundaryClassification, ClassifyOptions, DenjoyWolff, Generator};
use diskflow::herglotz::HerglotzMeasure;
use diskflow::koenigs::koenigs;
use diskflow::multislit::{verify_slit_classification, SlitSystem};
use diskflow::scenarios::fixtures::{probes, seeded_generators, Fixture, DEFAULT_SEED, PROBE_COUNT};
use diskflow::scenarios::{ScenarioParams, ScenarioRegistry};
use diskflow::unitdisc::{BoundaryPoint, DiskPoint};
use diskflow::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::time::Instant;

const TIMES: [f64; 3] = [0.5, 1.0, 2.0];

struct Outcome {
    passed: bool,
    summary: String,
    failures: Vec<String>,
}

impl Outcome {
    fn from_failures(summary: String, failures: Vec<String>) -> Self {
        Outcome { passed: failures.is_empty(), summary, failures }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn polar_grid(max_r: f64) -> Vec<DiskPoint> {
    let mut pts = Vec::new();
    for i in 0..=8 {
        for j in 0..24 {
            let r = max_r * i as f64 / 8.0;
            pts.push(DiskPoint::from_complex(Complex64::from_polar(r, TAU * (j as f64 + 0.3) / 24.0)).unwrap());
        }
    }
    pts
}

struct ProbeResult {
    x: BoundaryPoint,
    class: BoundaryClassification,
    phi: Vec<(BetaVerdict, Option<f64>)>,
    h: (BetaVerdict, Option<f64>),
}

struct Sweep {
    fixture: Fixture,
    probes: Vec<ProbeResult>,
}

/// Classification plus flow and Koenigs β-verdicts at every probe. A cheap
/// deep-grid screen settles "not a β-point"; anything else is recomputed with
/// the default grids.
fn sweep(fixture: Fixture) -> Sweep {
    let g = &fixture.generator;
    let k = koenigs(g).expect("Koenigs map");
    let screen_flow = FlowOptions { rel_tol: 1e-7, abs_tol: 1e-7, ..Default::default() };
    let screen = BetaOptions { grid: (13, 16), flow: screen_flow, ..Default::default() };
    let full = BetaOptions::default();
    let h_full = g.default_grid_bounds();
    let results = probes()
        .into_par_iter()
        .map(|x| {
            let class = g.classify_boundary(x);
            let mut phi = phi_beta_points_with(g, x, &TIMES, &class, &screen).expect("screen");
            if phi.iter().any(|r| r.verdict != BetaVerdict::NotBetaPoint) {
                phi = phi_beta_points_with(g, x, &TIMES, &class, &full).expect("full");
            }
            let mut h = k.h_beta_point_with(x, &class, (4, 16)).expect("h screen");
            if h.verdict != BetaVerdict::NotBetaPoint {
                h = k.h_beta_point_with(x, &class, h_full).expect("h full");
            }
            ProbeResult {
                x,
                class,
                phi: phi.iter().map(|r| (r.verdict, r.mismatch)).collect(),
                h: (h.verdict, h.mismatch),
            }
        })
        .collect();
    Sweep { fixture, probes: results }
}

fn criterion_1() -> Outcome {
    let report = ScenarioRegistry::builtin().get("koebe_suite").unwrap().run(&ScenarioParams::default()).unwrap();
    let failures = report
        .checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| format!("{}: {:e} (tol {:e})", c.label, c.value, c.tolerance))
        .collect();
    Outcome::from_failures(format!("koebe oracle suite, {} checks", report.checks.len()), failures)
}

fn criterion_2() -> Outcome {
    let g = Generator::from_measure(DenjoyWolff::Boundary(BoundaryPoint::new(0.0)), HerglotzMeasure::uniform(1.0).unwrap())
        .unwrap();
    let mut failures = Vec::new();
    let (mut flow_err, mut h_err) = (0.0f64, 0.0f64);
    let k = koenigs(&g).unwrap();
    for z in polar_grid(0.9) {
        let zc = z.to_complex();
        for t in [0.25, 0.5, 1.0, 2.0] {
            let oracle = (zc + t * (1.0 - zc)) / (1.0 + t * (1.0 - zc));
            flow_err = flow_err.max((flow_point(&g, z, t).unwrap().to_complex() - oracle).norm());
        }
        h_err = h_err.max((k.value(&z).unwrap() - zc / (1.0 - zc)).norm());
    }
    if flow_err > 1e-9 {
        failures.push(format!("flow error {flow_err:e}"));
    }
    if h_err > 1e-9 {
        failures.push(format!("h error {h_err:e}"));
    }
    let poles = (0..360)
        .filter(|k| g.classify_boundary(BoundaryPoint::new(TAU * *k as f64 / 360.0)).is_pole())
        .count();
    if poles != 0 {
        failures.push(format!("{poles} poles found"));
    }
    Outcome::from_failures(
        format!("half-plane suite, flow err {flow_err:.1e}, h err {h_err:.1e}, {poles} poles in 360 probes"),
        failures,
    )
}

fn criterion_3(sweeps: &[Sweep]) -> Outcome {
    let mut failures = Vec::new();
    let (mut poles, mut worst) = (0usize, 0.0f64);
    for s in sweeps {
        let mut found = 0;
        for p in &s.probes {
            let is_pole = p.class.is_pole();
            found += usize::from(is_pole);
            let beta = |v: BetaVerdict| v == BetaVerdict::BetaPoint;
            let agree = p.phi.iter().all(|(v, _)| beta(*v) == is_pole && *v != BetaVerdict::Inconclusive)
                && beta(p.h.0) == is_pole
                && p.h.0 != BetaVerdict::Inconclusive;
            if !agree {
                failures.push(format!(
                    "{} angle {:.6}: {} / phi {:?} / h {:?}",
                    s.fixture.label,
                    p.x.angle(),
                    p.class.tag.as_str(),
                    p.phi.iter().map(|r| r.0.as_str()).collect::<Vec<_>>(),
                    p.h.0.as_str()
                ));
                continue;
            }
            if is_pole {
                for m in p.phi.iter().map(|r| r.1).chain([p.h.1]) {
                    let m = m.unwrap_or(f64::INFINITY);
                    worst = worst.max(m);
                    if m > 1e-4 {
                        failures.push(format!("{} angle {:.6}: mismatch {m:e}", s.fixture.label, p.x.angle()));
                    }
                }
            }
        }
        poles += found;
        if found != s.fixture.atoms.len() {
            failures.push(format!("{}: {found} poles for {} atoms", s.fixture.label, s.fixture.atoms.len()));
        }
    }
    Outcome::from_failures(
        format!(
            "{} generators x {PROBE_COUNT} probes, {poles} poles, worst relative mismatch {worst:.1e}",
            sweeps.len()
        ),
        failures,
    )
}

fn criterion_4(fixtures: &[Fixture]) -> Outcome {
    let mut failures = Vec::new();
    let (mut nulls, mut worst_mass, mut worst_eq, mut worst_inv) = (0usize, 0.0f64, 0.0f64, 0.0f64);
    for f in fixtures {
        let g = &f.generator;
        let dual = g.dual();
        let twice = dual.dual();
        let tau = g.tau().to_complex();
        let p = AtomSum::from_pairs(&f.atoms).unwrap();
        // dual masses |τ - x|⁴/ℓ fall below the default pole threshold when ℓ is large
        let fine = ClassifyOptions { tol_pole: 1e-10, ..Default::default() };
        let zeros: Vec<f64> = p.zeros().iter().map(|a| a.angle).collect();
        for b in zeros {
            let x = BoundaryPoint::new(b);
            if let DenjoyWolff::Boundary(t) = g.tau() {
                if (t.to_complex() - x.to_complex()).norm() < 1e-9 {
                    continue;
                }
            }
            nulls += 1;
            let c = g.classify_boundary(x);
            let d = dual.classify_boundary_with(x, &fine).unwrap();
            let law = (tau - x.to_complex()).norm().powi(4);
            match (c.dilation.filter(|_| c.is_null_point()), d.mass.filter(|_| d.is_pole())) {
                (Some(ell), Some(mass)) => {
                    let e = rel(mass, law / ell);
                    worst_mass = worst_mass.max(e);
                    if e > 1e-5 {
                        failures.push(format!("{} null {b:.6}: mass {mass} vs {}", f.label, law / ell));
                    }
                }
                _ => failures.push(format!("{} null {b:.6}: {} / dual {}", f.label, c.tag.as_str(), d.tag.as_str())),
            }
        }
        for &(a, _) in &f.atoms {
            let x = BoundaryPoint::new(a);
            let c = g.classify_boundary(x);
            let d = dual.classify_boundary(x);
            let law = (tau - x.to_complex()).norm().powi(4);
            match (c.mass.filter(|_| c.is_pole()), d.dilation.filter(|_| d.is_null_point())) {
                (Some(mass), Some(ell)) => {
                    let e = rel(ell, law / mass);
                    worst_mass = worst_mass.max(e);
                    if e > 1e-5 {
                        failures.push(format!("{} pole {a:.6}: dual dilation {ell} vs {}", f.label, law / mass));
                    }
                }
                _ => failures.push(format!("{} pole {a:.6}: {} / dual {}", f.label, c.tag.as_str(), d.tag.as_str())),
            }
        }
        let tau_conj = tau.conj();
        for z in polar_grid(0.95) {
            let zc = z.to_complex();
            let frame = (tau - zc) * (1.0 - tau_conj * zc);
            let prod = g.evaluate(&z).unwrap() * dual.evaluate(&z).unwrap();
            let e = (prod - frame * frame).norm() / (1.0 + zc.norm().powi(4));
            worst_eq = worst_eq.max(e);
            let gz = g.evaluate(&z).unwrap();
            worst_inv = worst_inv.max((twice.evaluate(&z).unwrap() - gz).norm() / gz.norm().max(1.0));
        }
    }
    if worst_eq > 1e-10 {
        failures.push(format!("product identity residual {worst_eq:e}"));
    }
    if worst_inv > 1e-12 {
        failures.push(format!("dual involution error {worst_inv:e}"));
    }
    Outcome::from_failures(
        format!(
            "{nulls} null points, worst mass-law error {worst_mass:.1e}, product residual {worst_eq:.1e}, involution {worst_inv:.1e}"
        ),
        failures,
    )
}

fn slit_systems(seed: u64) -> Vec<SlitSystem> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![
        SlitSystem::from_pole_atoms(&[(PI, 1.0)], false).unwrap(),
        SlitSystem::from_pole_atoms(&[(0.0, 0.5), (PI, 0.5)], false).unwrap(),
    ];
    for _ in 0..12 {
        let m = rng.gen_range(1..=8);
        let mut slots = rand::seq::index::sample(&mut rng, 360, m).into_vec();
        slots.sort_unstable();
        slots.dedup_by(|a, b| *a - *b < 3);
        let atoms: Vec<(f64, f64)> = slots.iter().map(|&k| (TAU * k as f64 / 360.0, rng.gen_range(0.1..1.0))).collect();
        out.push(SlitSystem::from_pole_atoms(&atoms, true).unwrap());
    }
    out
}

fn criterion_5() -> Outcome {
    let mut failures = Vec::new();
    let systems = slit_systems(DEFAULT_SEED);
    let (mut nulls, mut rejected, mut comparable) = (0usize, 0usize, 0usize);
    let (mut worst_recon, mut worst_dil) = (0.0f64, 0.0f64);
    for (i, s) in systems.iter().enumerate() {
        if (s.mass_sum() - 1.0).abs() > 1e-10 || (s.sigma_sum() - 1.0).abs() > 1e-10 {
            failures.push(format!("system {i}: sums {} {}", s.mass_sum(), s.sigma_sum()));
        }
        let r = s.reconstruction_error(10, 32, 0.95);
        worst_recon = worst_recon.max(r);
        if r > 1e-9 {
            failures.push(format!("system {i}: reconstruction {r:e}"));
        }
        let v = verify_slit_classification(s, &s.generator()).unwrap();
        for p in v.poles.iter().filter(|p| !p.ok) {
            failures.push(format!("system {i} pole {:.6}: mass {:?} vs {}", p.angle, p.mass, p.expected_mass));
        }
        for n in &v.nulls {
            nulls += 1;
            for route in [n.direct, Some(n.residue), n.flow] {
                worst_dil = worst_dil.max(route.map_or(f64::INFINITY, |d| rel(d, n.expected_dilation)));
            }
            if !n.ok {
                failures.push(format!(
                    "system {i} null {:.6}: direct {:?} residue {} flow {:?} dual mass {:?}, expected {}",
                    n.angle, n.direct, n.residue, n.flow, n.dual_mass, n.expected_dilation
                ));
            }
            // 2σ and 1/(2σ) coincide at σ = 1/2
            if (n.sigma - 0.5).abs() > 1e-3 {
                comparable += 1;
                if n.direct.is_some_and(|d| (d - n.two_sigma).abs() > 1e-3) {
                    rejected += 1;
                }
            }
        }
    }
    if rejected != comparable {
        failures.push(format!("2 sigma rejected on only {rejected}/{comparable} null points"));
    }
    Outcome::from_failures(
        format!(
            "{} systems, {nulls} null points, reconstruction {worst_recon:.1e}, dilation error {worst_dil:.1e} over 3 routes; 1/(2 sigma) confirmed, 2 sigma rejected on {rejected}/{comparable}",
            systems.len()
        ),
        failures,
    )
}

fn criterion_6(sweeps: &[Sweep]) -> Outcome {
    let mut failures = Vec::new();
    let mut worst_slack = f64::INFINITY;
    for s in sweeps {
        let poles: Vec<(BoundaryPoint, f64)> = s
            .probes
            .iter()
            .filter(|p| p.class.is_pole())
            .map(|p| (p.x, p.class.mass.unwrap()))
            .collect();
        let b = s.fixture.generator.pole_budget_check(&poles).unwrap();
        worst_slack = worst_slack.min(b.rhs - b.lhs);
        if !b.holds {
            failures.push(format!("{}: lhs {} > rhs {}", s.fixture.label, b.lhs, b.rhs));
        }
    }
    let mut equality = Vec::new();
    for (name, atoms) in [("koebe", vec![(PI, 1.0)]), ("two-slit", vec![(0.0, 0.5), (PI, 0.5)])] {
        let g = Generator::from_pole_atoms(DenjoyWolff::origin(), &atoms).unwrap();
        let poles: Vec<(BoundaryPoint, f64)> = atoms
            .iter()
            .map(|&(a, _)| {
                let c = g.classify_boundary(BoundaryPoint::new(a));
                (BoundaryPoint::new(a), c.mass.unwrap_or(f64::NAN))
            })
            .collect();
        let b = g.pole_budget_check(&poles).unwrap();
        let gap = (b.lhs - b.rhs).abs();
        equality.push(format!("{name} {gap:.1e}"));
        if !(gap <= 1e-6) {
            failures.push(format!("{name}: lhs {} rhs {}", b.lhs, b.rhs));
        }
    }
    Outcome::from_failures(
        format!("{} generators, smallest slack {worst_slack:.2e}; equality gaps {}", sweeps.len(), equality.join(", ")),
        failures,
    )
}

fn criterion_7() -> Outcome {
    let registry = ScenarioRegistry::builtin();
    let params = ScenarioParams::default();
    let mut failures = Vec::new();
    let mut parts = Vec::new();
    for name in ["step_measure", "cusp", "no_tip"] {
        let report = registry.get(name).unwrap().run(&params).unwrap();
        parts.push(format!("{name} {}/{}", report.checks.iter().filter(|c| c.passed).count(), report.checks.len()));
        for c in report.checks.iter().filter(|c| !c.passed) {
            failures.push(format!("{name}: {} ({:e})", c.label, c.value));
        }
    }
    Outcome::from_failures(format!("{} (theta_j = 1/(j+2))", parts.join(", ")), failures)
}

fn criterion_8() -> Outcome {
    let mut failures = Vec::new();
    let mut parts = Vec::new();
    let cases = [
        ("koebe", vec![(PI, 1.0)], vec![0.0]),
        ("two-slit", vec![(0.0, 0.5), (PI, 0.5)], vec![FRAC_PI_2, 3.0 * FRAC_PI_2]),
    ];
    for (name, atoms, nulls) in cases {
        let g = Generator::from_pole_atoms(DenjoyWolff::origin(), &atoms).unwrap();
        let k = koenigs(&g).unwrap();
        for b in nulls {
            let a = k.null_point_asymptotics(BoundaryPoint::new(b)).unwrap();
            parts.push(format!("{name}@{b:.3}: rho*l={:.6} a err {:.1e}", a.rho_times_dilation, a.a_mismatch));
            if (a.rho_times_dilation - 1.0).abs() > 1e-3 {
                failures.push(format!("{name} at {b}: rho*l = {}", a.rho_times_dilation));
            }
            if !(a.a_mismatch <= 1e-5) {
                failures.push(format!("{name} at {b}: a mismatch {}", a.a_mismatch));
            }
        }
    }
    Outcome::from_failures(parts.join("; "), failures)
}

fn main() {
    let start = Instant::now();
    let fixtures = seeded_generators(DEFAULT_SEED, 12).expect("fixtures");
    let sweeps: Vec<Sweep> = fixtures.iter().cloned().map(sweep).collect();
    let outcomes = [
        ("koebe oracle suite", criterion_1()),
        ("half-plane oracle suite", criterion_2()),
        ("pole / flow beta / h beta equivalence", criterion_3(&sweeps)),
        ("duality", criterion_4(&fixtures)),
        ("multi-slit suite", criterion_5()),
        ("pole budget inequality", criterion_6(&sweeps)),
        ("worked examples", criterion_7()),
        ("null point asymptotics", criterion_8()),
    ];
    let mut failed = 0;
    for (i, (name, o)) in outcomes.iter().enumerate() {
        println!("criterion {} {} {name}: {}", i + 1, if o.passed { "PASS" } else { "FAIL" }, o.summary);
        for f in o.failures.iter().take(10) {
            println!("    {f}");
        }
        if o.failures.len() > 10 {
            println!("    ... {} more", o.failures.len() - 10);
        }
        failed += usize::from(!o.passed);
    }
    println!("acceptance: {}/{} criteria passed in {:.1?}", outcomes.len() - failed, outcomes.len(), start.elapsed());
    if failed > 0 {
        std::process::exit(1);
    }
}
