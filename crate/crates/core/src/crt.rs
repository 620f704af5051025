//! Conditional randomization test driven by 1-nearest-neighbor resampling.
//!
//! The data are split into a reference part `U1` and a test part `U2` with
//! `floor(n/3)` rows. Each repetition draws `floor(n/3)` rows of `U1` without
//! replacement, samples `x~` at the `z` of every `U2` row from their nearest
//! neighbor, and scores the resampled column against `y` of `U2`. The
//! observed statistic is computed on `U2` itself and
//!
//! ```text
//! p = (1 + #{m : T_m >= T}) / (1 + M)
//! ```
//!
//! Three statistic pairings are available:
//!
//! | variant | null statistic        | observed statistic |
//! |---------|-----------------------|--------------------|
//! | `eq6`   | k-NN `I(x~; y)`       | classifier `I(x; y \| z)` |
//! | `eq5`   | classifier `I(x~; y \| z)` | classifier `I(x; y \| z)` |
//! | `eq7`   | k-NN `I(x~; y)`       | k-NN `I(x; y)`     |

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ccmi::{estimate_cmi, MIN_CMI_ROWS};
use crate::data::{split, subsample, Dataset, SplitPair, StreamRng};
use crate::error::{Error, Result};
use crate::mi::{estimate_mi, DEFAULT_K};
use crate::mlp::TrainConfig;
use crate::sampler::{build_index, sample_1nn};
use crate::synth::ConditionalSampler;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Eq5,
    Eq6,
    Eq7,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Eq5 => "eq5",
            Variant::Eq6 => "eq6",
            Variant::Eq7 => "eq7",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Variant> {
        match s.to_ascii_lowercase().as_str() {
            "eq5" => Ok(Variant::Eq5),
            "eq6" => Ok(Variant::Eq6),
            "eq7" => Ok(Variant::Eq7),
            _ => Err(Error::InvalidConfig(vec![format!("unknown variant `{s}`")])),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Decision {
    #[serde(rename = "accept-H0")]
    AcceptH0,
    #[serde(rename = "reject-H0")]
    RejectH0,
}

impl Decision {
    pub fn name(self) -> &'static str {
        match self {
            Decision::AcceptH0 => "accept-H0",
            Decision::RejectH0 => "reject-H0",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestConfig {
    /// Number of resampling repetitions.
    pub m: usize,
    /// Neighbor order of the k-NN estimator.
    pub k: usize,
    pub alpha: f64,
    pub seed: u64,
    pub variant: Variant,
    pub classifier: TrainConfig,
}

impl Default for TestConfig {
    fn default() -> Self {
        TestConfig {
            m: 500,
            k: DEFAULT_K,
            alpha: 0.05,
            seed: 0,
            variant: Variant::Eq6,
            classifier: TrainConfig::default(),
        }
    }
}

impl TestConfig {
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.m == 0 {
            problems.push("M must be at least 1".to_string());
        }
        if self.k == 0 {
            problems.push("k must be at least 1".to_string());
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            problems.push("alpha must lie in (0, 1)".to_string());
        }
        if let Err(Error::InvalidConfig(more)) = self.classifier.validate() {
            problems.extend(more);
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(problems))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrtResult {
    pub p_value: f64,
    pub observed_stat: f64,
    pub null_stats: Vec<f64>,
    pub decision: Decision,
    pub variant: Variant,
    pub wall_time: Duration,
}

/// `(1 + #{t in null_stats : t >= observed}) / (1 + M)`.
pub fn p_value(observed: f64, null_stats: &[f64]) -> f64 {
    let hits = null_stats.iter().filter(|&&t| t >= observed).count();
    (1 + hits) as f64 / (1 + null_stats.len()) as f64
}

pub fn decide(p: f64, alpha: f64) -> Decision {
    if p < alpha {
        Decision::RejectH0
    } else {
        Decision::AcceptH0
    }
}

// stream layout under the test seed
const STREAM_SPLIT: u64 = 0;
const STREAM_OBSERVED: u64 = 1;
const STREAM_REPETITION_BASE: u64 = 2;

fn observed_statistic(test: &Dataset, cfg: &TestConfig) -> Result<f64> {
    match cfg.variant {
        Variant::Eq5 | Variant::Eq6 => {
            let seed = StreamRng::child_seed(cfg.seed, STREAM_OBSERVED);
            Ok(estimate_cmi(test, &cfg.classifier.with_seed(seed))?.value)
        }
        Variant::Eq7 => Ok(estimate_mi(test.x(), test.y(), cfg.k)?.value),
    }
}

fn null_statistic(
    test: &Dataset,
    x_tilde: Vec<f64>,
    cfg: &TestConfig,
    rng: &mut StreamRng,
) -> Result<f64> {
    match cfg.variant {
        Variant::Eq6 | Variant::Eq7 => Ok(estimate_mi(&x_tilde, test.y(), cfg.k)?.value),
        Variant::Eq5 => {
            let resampled = test.with_x(x_tilde)?;
            let classifier = cfg.classifier.with_seed(rng.next_u64());
            Ok(estimate_cmi(&resampled, &classifier)?.value)
        }
    }
}

fn run_pipeline<F>(data: &Dataset, cfg: &TestConfig, draw: F) -> Result<CrtResult>
where
    F: Fn(&SplitPair, &mut StreamRng) -> Result<Vec<f64>> + Sync,
{
    let started = Instant::now();
    cfg.validate()?;
    if data.n() < MIN_CMI_ROWS {
        return Err(Error::TooFewSamples {
            needed: MIN_CMI_ROWS,
            got: data.n(),
        });
    }
    let parts = split(data, StreamRng::child_seed(cfg.seed, STREAM_SPLIT))?;
    if cfg.k >= parts.u2.n() {
        return Err(Error::InvalidConfig(vec![format!(
            "k = {} must be below the test fold size {}",
            cfg.k,
            parts.u2.n()
        )]));
    }

    let observed = observed_statistic(&parts.u2, cfg)?;
    let null_stats = (1..=cfg.m)
        .into_par_iter()
        .map(|m| {
            let mut rng = StreamRng::new(cfg.seed, STREAM_REPETITION_BASE + m as u64);
            draw(&parts, &mut rng)
                .and_then(|x_tilde| null_statistic(&parts.u2, x_tilde, cfg, &mut rng))
                .map_err(|e| Error::Repetition {
                    m,
                    source: Box::new(e),
                })
        })
        .collect::<Result<Vec<f64>>>()?;

    let p = p_value(observed, &null_stats);
    Ok(CrtResult {
        p_value: p,
        observed_stat: observed,
        null_stats,
        decision: decide(p, cfg.alpha),
        variant: cfg.variant,
        wall_time: started.elapsed(),
    })
}

/// Nearest-neighbor sampling conditional independence test.
pub fn run_nnscit(data: &Dataset, cfg: &TestConfig) -> Result<CrtResult> {
    run_pipeline(data, cfg, |parts, rng| {
        let reference = subsample(&parts.u1, parts.u2.n(), rng)?;
        let index = build_index(&reference)?;
        sample_1nn(&index, &parts.u2)
    })
}

/// Same pipeline with `x~` drawn from a known conditional law instead of the
/// nearest-neighbor sampler.
pub fn run_crt_with_oracle(
    data: &Dataset,
    oracle: &dyn ConditionalSampler,
    cfg: &TestConfig,
) -> Result<CrtResult> {
    run_pipeline(data, cfg, |parts, rng| {
        let test = &parts.u2;
        Ok((0..test.n()).map(|i| oracle.sample(test.z_row(i), rng)).collect())
    })
}
