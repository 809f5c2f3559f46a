use rayon::prelude::*;

use super::config::{Config, ConfigError, ScenarioConfig};
use super::metrics::MetricsReport;
use super::world::run_scenario;

/// One axis of configuration values plus a replicate count.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub key: String,
    pub values: Vec<String>,
    pub replicates: u32,
}

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub key: String,
    pub value: String,
    pub replicate: u32,
    pub seed: u64,
    pub report: MetricsReport,
}

/// Derive the replicate seed deterministically from the base seed
/// (splitmix64 over the replicate index).
pub fn replicate_seed(base: u64, replicate: u32) -> u64 {
    if replicate == 0 {
        return base;
    }
    let mut z = base ^ (replicate as u64).wrapping_mul(0x9E3779B97F4A7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Run one scenario per (axis value, replicate), fanned out across worker
/// threads; results come back in axis-then-replicate order. An empty value
/// list degenerates to a single run of the base configuration.
pub fn sweep(base: &Config, spec: &SweepSpec) -> Result<Vec<SweepRow>, ConfigError> {
    let base_cfg = ScenarioConfig::from_config(base)?;
    let base_seed = base_cfg.seed;

    let mut jobs: Vec<(String, u32, Config)> = Vec::new();
    let replicates = spec.replicates.max(1);
    if spec.values.is_empty() {
        for rep in 0..replicates {
            jobs.push((String::new(), rep, base.clone()));
        }
    } else {
        for value in &spec.values {
            for rep in 0..replicates {
                let mut cfg = base.clone();
                cfg.set(&spec.key, value);
                jobs.push((value.clone(), rep, cfg));
            }
        }
    }
    // Validate every point up front so a bad axis value names itself before
    // any simulation time is spent.
    let mut parsed = Vec::with_capacity(jobs.len());
    for (value, rep, mut cfg) in jobs {
        let seed = replicate_seed(base_seed, rep);
        cfg.set("sim.seed", &seed.to_string());
        let sc = ScenarioConfig::from_config(&cfg)?;
        parsed.push((value, rep, seed, sc));
    }

    let rows: Vec<SweepRow> = parsed
        .into_par_iter()
        .map(|(value, rep, seed, sc)| SweepRow {
            key: spec.key.clone(),
            value,
            replicate: rep,
            seed,
            report: run_scenario(&sc),
        })
        .collect();
    Ok(rows)
}
