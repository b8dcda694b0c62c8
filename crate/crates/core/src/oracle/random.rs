use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{gap_report, OracleError};
use crate::model::{CoreSpec, SocSpec};
use crate::wrapper::WrapperConfig;

/// A small SOC drawn from `seed`: 2 to 5 cores, 1 to 64 inputs and outputs
/// each, up to 8 scan chains of length 1 to 200, 1 to 50 patterns.
pub fn random_soc(seed: u64) -> SocSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(2..=5u32);
    let cores = (1..=n)
        .map(|id| {
            let inputs = rng.random_range(1..=64);
            let outputs = rng.random_range(1..=64);
            let chains = rng.random_range(0..=8usize);
            let scan = (0..chains).map(|_| rng.random_range(1..=200)).collect();
            let patterns = rng.random_range(1..=50);
            CoreSpec::new(id, format!("r{id}"), inputs, outputs, 0, patterns, scan)
                .expect("generated core is valid")
        })
        .collect();
    SocSpec::new(format!("random-{seed}"), cores).expect("generated SOC is valid")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapTrial {
    pub seed: u64,
    pub cores: usize,
    pub w_max: u32,
    pub heuristic: u64,
    pub oracle: u64,
    pub ratio: f64,
}

/// Trial `k` uses seed `base_seed + k`. Runs in parallel; results come back
/// in trial order.
pub fn random_gap_trials(
    base_seed: u64,
    trials: u64,
    w_max: u32,
    config: &WrapperConfig,
) -> Result<Vec<GapTrial>, OracleError> {
    (0..trials)
        .into_par_iter()
        .map(|k| {
            let seed = base_seed.wrapping_add(k);
            let soc = random_soc(seed);
            let row = gap_report(&soc, w_max, config)?;
            Ok(GapTrial {
                seed,
                cores: soc.cores.len(),
                w_max,
                heuristic: row.heuristic,
                oracle: row.oracle,
                ratio: row.ratio,
            })
        })
        .collect()
}
