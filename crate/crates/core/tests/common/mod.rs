#![allow(dead_code)]

use std::path::PathBuf;

use edgecache::workload::{SpProfile, Workload};
use edgecache::ScenarioConfig;
use rand::Rng;

pub fn config_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
}

/// The shipped desk-scale scenario.
pub fn desk_config() -> ScenarioConfig {
    ScenarioConfig::load(&config_path("desk.json")).expect("configs/desk.json loads")
}

/// A small scenario that runs in well under a second.
pub fn tiny_config() -> ScenarioConfig {
    ScenarioConfig::from_json(
        r#"{
            "profiles": [
                {"catalog_size": 200, "zipf_exponent": 1.0, "cacheability": 0.6, "request_share": 0.6},
                {"catalog_size": 300, "zipf_exponent": 0.5, "cacheability": 0.9, "request_share": 0.3},
                {"catalog_size": 100, "zipf_exponent": 0.2, "cacheability": 1.0, "request_share": 0.1}
            ],
            "capacity": 100,
            "delta": 10,
            "lambda": 200,
            "duration": 50,
            "horizon_seconds": 40,
            "window_seconds": 10,
            "seed": 7
        }"#,
    )
    .unwrap()
}

/// Random small instance: P <= 3, N_p <= 12, beta in [0, 1.5],
/// zeta in {0, 0.4, 0.9, 1}, and a capacity of at most 12 that the
/// catalogs can hold.
pub fn random_instance<R: Rng>(rng: &mut R) -> (Workload<f64>, u64) {
    const ZETAS: [f64; 4] = [0.0, 0.4, 0.9, 1.0];
    let p = rng.random_range(1..=3usize);
    let weights: Vec<f64> = (0..p).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = weights.iter().sum();
    let mut shares: Vec<f64> = weights.iter().map(|w| w / total).collect();
    let head: f64 = shares[..p - 1].iter().sum();
    shares[p - 1] = 1.0 - head;
    let profiles: Vec<SpProfile<f64>> = shares
        .iter()
        .map(|&f| {
            SpProfile::new(
                rng.random_range(1..=12usize),
                rng.random_range(0.0..=1.5),
                ZETAS[rng.random_range(0..ZETAS.len())],
                f,
            )
        })
        .collect();
    let room: u64 = profiles.iter().map(|p| p.catalog_size as u64).sum();
    let capacity = rng.random_range(1..=room.min(12));
    (Workload::new(profiles).unwrap(), capacity)
}

/// Two-provider instance with a single learnable optimum at (10, 0).
pub fn small_mdp_config(seed: u64) -> ScenarioConfig {
    let mut config = ScenarioConfig::from_json(
        r#"{
            "profiles": [
                {"catalog_size": 10, "zipf_exponent": 1.2, "cacheability": 1.0, "request_share": 1.0},
                {"catalog_size": 10, "zipf_exponent": 1.2, "cacheability": 0.0, "request_share": 0.0}
            ],
            "capacity": 10,
            "delta": 1,
            "lambda": 40,
            "tau": 0.25,
            "duration": 2500,
            "horizon_seconds": 1250,
            "window_seconds": 250,
            "arrival_mode": "fixed",
            "initial_allocation": "uniform"
        }"#,
    )
    .unwrap();
    config.seed = seed;
    config
}
