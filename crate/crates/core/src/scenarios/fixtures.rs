//! Seeded rational generators for property and acceptance suites.
//!
//! Atoms sit on the `2π/720` probe grid so every pole is hit by a probe. The
//! Denjoy–Wolff point cycles through the origin, an interior point and a
//! boundary point away from every atom.

use crate::error::Result;
use crate::generator::{DenjoyWolff, Generator};
use crate::unitdisc::{BoundaryPoint, DiskPoint};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;

pub const DEFAULT_SEED: u64 = 20_190_304;
pub const PROBE_COUNT: usize = 720;
pub const MAX_ATOMS: usize = 6;

#[derive(Debug, Clone)]
pub struct Fixture {
    pub label: String,
    /// `(angle, mass)` atoms of `p`.
    pub atoms: Vec<(f64, f64)>,
    pub generator: Generator,
}

pub fn probe_angle(k: usize) -> f64 {
    TAU * k as f64 / PROBE_COUNT as f64
}

pub fn probes() -> Vec<BoundaryPoint> {
    (0..PROBE_COUNT).map(|k| BoundaryPoint::new(probe_angle(k))).collect()
}

/// `count` generators `G = (τ - z)(1 - τ̄z) p` with `p` a sum of at most six
/// atoms; identical seeds give identical fixtures.
pub fn seeded_generators(seed: u64, count: usize) -> Result<Vec<Fixture>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let m = rng.gen_range(1..=MAX_ATOMS);
            // one extra slot reserved for a boundary Denjoy–Wolff point
            let mut slots = sample(&mut rng, PROBE_COUNT, m + 1).into_vec();
            let tau_slot = slots.pop().expect("m + 1 slots");
            slots.sort_unstable();
            // keep atoms at least two probes apart
            slots.dedup_by(|a, b| *a - *b < 2);
            let atoms: Vec<(f64, f64)> = slots
                .iter()
                .map(|&k| (probe_angle(k), rng.gen_range(0.2..1.0)))
                .collect();
            let (tau, kind) = match i % 3 {
                0 => (DenjoyWolff::origin(), "origin"),
                1 => {
                    let r = rng.gen_range(0.1..0.5);
                    let a = rng.gen_range(0.0..TAU);
                    (DenjoyWolff::Interior(DiskPoint::from_polar_gap(1.0 - r, a)?), "interior")
                }
                _ => {
                    let clear = |k: usize| slots.iter().all(|&s| s.abs_diff(k) >= 4 && PROBE_COUNT - s.abs_diff(k) >= 4);
                    let k = (0..PROBE_COUNT)
                        .map(|d| (tau_slot + d) % PROBE_COUNT)
                        .find(|&k| clear(k))
                        .expect("at most six atoms leave room");
                    (DenjoyWolff::Boundary(BoundaryPoint::new(probe_angle(k))), "boundary")
                }
            };
            let label = format!("seed{seed}_{i}_{kind}_m{}", atoms.len());
            let generator = Generator::from_pole_atoms(tau, &atoms)?.with_label(label.clone());
            Ok(Fixture { label, atoms, generator })
        })
        .collect()
}
