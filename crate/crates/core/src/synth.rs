//! Synthetic data models with known conditional-independence structure.
//!
//! Post-nonlinear scenarios:
//!
//! ```text
//! H0: X = f(A_f' Z + e_f),   Y = g(A_g' Z + e_g)
//! H1: X ~ N(0, 1),           Y = h(A_h' Z + b X) + e_h
//! ```
//!
//! `A_f`, `A_g` have Uniform[0, 1] entries rescaled to unit l1 norm, `A_h`
//! has standard normal entries, and the noises are N(0, noise_sd^2). Under
//! H0, X and Y are functions of Z plus independent noises, so X and Y are
//! independent given Z.
//!
//! Structural examples, all noises N(0, 1) and `u = d * A_f`:
//!
//! ```text
//! chain:    X ~ N(0, 1),  Z = u X + eta,         Y = (u / |u|)' Z + nu
//! collider: X, Y ~ N(0, 1),  Z = 2 u (X + Y) + eta
//! ```
//!
//! The chain keeps X and Y dependent but independent given Z; the collider
//! does the reverse.
//!
//! Coefficients are drawn from stream 0 of the scenario seed and samples from
//! stream 1, so [`oracle_conditional_sampler`] sees the same coefficients as
//! [`generate`].

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, StreamRng};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    #[serde(rename = "postnonlinear-I")]
    PostNonlinearI,
    #[serde(rename = "postnonlinear-II")]
    PostNonlinearII,
    #[serde(rename = "postnonlinear-III")]
    PostNonlinearIII,
    #[serde(rename = "postnonlinear-IV")]
    PostNonlinearIV,
    #[serde(rename = "gof-1")]
    Gof1,
    #[serde(rename = "gof-2")]
    Gof2,
    #[serde(rename = "chain-example-1")]
    ChainExample1,
    #[serde(rename = "collider-example-2")]
    ColliderExample2,
    #[serde(rename = "gaussian-oracle")]
    GaussianOracle,
}

impl Family {
    pub const ALL: [Family; 9] = [
        Family::PostNonlinearI,
        Family::PostNonlinearII,
        Family::PostNonlinearIII,
        Family::PostNonlinearIV,
        Family::Gof1,
        Family::Gof2,
        Family::ChainExample1,
        Family::ColliderExample2,
        Family::GaussianOracle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::PostNonlinearI => "postnonlinear-I",
            Family::PostNonlinearII => "postnonlinear-II",
            Family::PostNonlinearIII => "postnonlinear-III",
            Family::PostNonlinearIV => "postnonlinear-IV",
            Family::Gof1 => "gof-1",
            Family::Gof2 => "gof-2",
            Family::ChainExample1 => "chain-example-1",
            Family::ColliderExample2 => "collider-example-2",
            Family::GaussianOracle => "gaussian-oracle",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Family> {
        Family::ALL
            .into_iter()
            .find(|f| f.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidConfig(vec![format!("unknown family `{s}`")]))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Hypothesis {
    H0,
    H1,
}

impl FromStr for Hypothesis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Hypothesis> {
        match s.to_ascii_uppercase().as_str() {
            "H0" => Ok(Hypothesis::H0),
            "H1" => Ok(Hypothesis::H1),
            _ => Err(Error::InvalidConfig(vec![format!("unknown hypothesis `{s}`")])),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub family: Family,
    pub hypothesis: Hypothesis,
    pub n: usize,
    pub d_z: usize,
    /// Strength of the direct X -> Y effect under H1.
    pub b: f64,
    pub noise_sd: f64,
    pub seed: u64,
    /// Partial correlation of X and Y given Z (gaussian-oracle only).
    pub partial_corr: f64,
    /// Loading of X and Y on each Z coordinate, scaled by `1/sqrt(d_z)`
    /// (gaussian-oracle only).
    pub coupling: f64,
}

impl ScenarioSpec {
    pub fn new(family: Family, hypothesis: Hypothesis, n: usize, d_z: usize, seed: u64) -> Self {
        ScenarioSpec {
            family,
            hypothesis,
            n,
            d_z,
            b: 2.0,
            noise_sd: 0.7,
            seed,
            partial_corr: 0.5,
            coupling: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.n == 0 {
            problems.push("n must be positive".to_string());
        }
        if self.d_z == 0 {
            problems.push("d_z must be positive".to_string());
        }
        if !(self.noise_sd > 0.0) || !self.noise_sd.is_finite() {
            problems.push("noise_sd must be positive".to_string());
        }
        if !self.b.is_finite() {
            problems.push("b must be finite".to_string());
        }
        if !(self.partial_corr.abs() < 1.0) {
            problems.push("partial_corr must lie in (-1, 1)".to_string());
        }
        if !self.coupling.is_finite() {
            problems.push("coupling must be finite".to_string());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(problems))
        }
    }
}

/// Closed-form `I(X; Y | Z)` of a Gaussian model with the given partial
/// correlation.
pub fn gaussian_cmi(partial_corr: f64) -> f64 {
    -0.5 * (1.0 - partial_corr * partial_corr).ln()
}

/// Link functions for the fourth post-nonlinear scenario.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Link {
    Identity,
    Square,
    Cube,
    Tanh,
    Cos,
}

impl Link {
    const RANDOM_POOL: [Link; 4] = [Link::Square, Link::Cube, Link::Tanh, Link::Cos];

    pub fn apply(self, v: f64) -> f64 {
        match self {
            Link::Identity => v,
            Link::Square => v * v,
            Link::Cube => v * v * v,
            Link::Tanh => v.tanh(),
            Link::Cos => v.cos(),
        }
    }
}

/// Everything drawn once per replication before sampling rows.
#[derive(Clone, Debug, PartialEq)]
pub struct Coefficients {
    pub a_f: Vec<f64>,
    pub a_g: Vec<f64>,
    pub a_h: Vec<f64>,
    pub f: Link,
    pub g: Link,
    pub h: Link,
}

fn l1_normalized_uniform(rng: &mut StreamRng, d: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
    let norm: f64 = v.iter().sum();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    } else {
        v.iter_mut().for_each(|x| *x = 1.0 / d as f64);
    }
    v
}

pub fn draw_coefficients(spec: &ScenarioSpec) -> Coefficients {
    let mut rng = StreamRng::new(spec.seed, 0);
    let d = spec.d_z;
    let (f, g, h) = if spec.family == Family::PostNonlinearIV {
        let mut pick = || Link::RANDOM_POOL[rng.random_range(0..Link::RANDOM_POOL.len())];
        (pick(), pick(), pick())
    } else {
        (Link::Identity, Link::Identity, Link::Identity)
    };
    let a_f = l1_normalized_uniform(&mut rng, d);
    let a_g = l1_normalized_uniform(&mut rng, d);
    let a_h = (0..d).map(|_| rng.sample(StandardNormal)).collect();
    Coefficients {
        a_f,
        a_g,
        a_h,
        f,
        g,
        h,
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Laplace draw by inversion.
fn laplace(rng: &mut StreamRng, location: f64, scale: f64) -> f64 {
    let u: f64 = rng.random::<f64>() - 0.5;
    location - scale * u.signum() * (1.0 - 2.0 * u.abs()).ln()
}

const MARGINAL_MEAN: f64 = 0.7;

fn draw_z(spec: &ScenarioSpec, rng: &mut StreamRng) -> Vec<f64> {
    let len = spec.n * spec.d_z;
    match spec.family {
        Family::PostNonlinearI | Family::Gof1 | Family::Gof2 => (0..len)
            .map(|_| MARGINAL_MEAN + rng.sample::<f64, _>(StandardNormal))
            .collect(),
        Family::PostNonlinearII => {
            let scale = std::f64::consts::FRAC_1_SQRT_2;
            (0..len).map(|_| laplace(rng, MARGINAL_MEAN, scale)).collect()
        }
        Family::PostNonlinearIII => {
            let u = Uniform::new(-2.5, 2.5).expect("valid bounds");
            (0..len).map(|_| u.sample(rng)).collect()
        }
        _ => (0..len).map(|_| rng.sample(StandardNormal)).collect(),
    }
}

/// Draws one dataset from the scenario.
///
/// The gof families carry a `Y` built like the first post-nonlinear
/// scenario, so they can also feed a full test. The chain, collider and
/// Gaussian-oracle families fix their own dependence structure and ignore
/// `hypothesis`.
pub fn generate(spec: &ScenarioSpec) -> Result<Dataset> {
    spec.validate()?;
    let coef = draw_coefficients(spec);
    let mut rng = StreamRng::new(spec.seed, 1);
    let (n, d) = (spec.n, spec.d_z);
    let noise = Normal::new(0.0, spec.noise_sd).expect("validated sd");
    let z = draw_z(spec, &mut rng);
    let row = |i: usize| &z[i * d..(i + 1) * d];

    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    match spec.family {
        Family::PostNonlinearI
        | Family::PostNonlinearII
        | Family::PostNonlinearIII
        | Family::PostNonlinearIV
        | Family::Gof1
        | Family::Gof2 => {
            for i in 0..n {
                let zi = row(i);
                let xi = match (spec.family, spec.hypothesis) {
                    (Family::Gof1, _) => rng.random::<f64>(),
                    (Family::Gof2, _) | (_, Hypothesis::H0) => {
                        coef.f.apply(dot(&coef.a_f, zi) + noise.sample(&mut rng))
                    }
                    (_, Hypothesis::H1) => rng.sample(StandardNormal),
                };
                let yi = match spec.hypothesis {
                    Hypothesis::H0 => coef.g.apply(dot(&coef.a_g, zi) + noise.sample(&mut rng)),
                    Hypothesis::H1 => {
                        coef.h.apply(dot(&coef.a_h, zi) + spec.b * xi) + noise.sample(&mut rng)
                    }
                };
                x.push(xi);
                y.push(yi);
            }
            Dataset::new(x, y, z, d)
        }
        Family::ChainExample1 => {
            // X -> Z -> Y
            let loadings = chain_loadings(&coef);
            let norm = loadings.iter().map(|a| a * a).sum::<f64>().sqrt();
            let readout: Vec<f64> = loadings.iter().map(|a| a / norm).collect();
            let mut z = Vec::with_capacity(n * d);
            for _ in 0..n {
                let xi: f64 = rng.sample(StandardNormal);
                let start = z.len();
                for a in &loadings {
                    z.push(a * xi + rng.sample::<f64, _>(StandardNormal));
                }
                let yi = dot(&readout, &z[start..]) + rng.sample::<f64, _>(StandardNormal);
                x.push(xi);
                y.push(yi);
            }
            Dataset::new(x, y, z, d)
        }
        Family::ColliderExample2 => {
            // X -> Z <- Y
            let (ax, cy) = collider_loadings(&coef);
            let mut z = Vec::with_capacity(n * d);
            for _ in 0..n {
                let xi: f64 = rng.sample(StandardNormal);
                let yi: f64 = rng.sample(StandardNormal);
                for j in 0..d {
                    z.push(ax[j] * xi + cy[j] * yi + rng.sample::<f64, _>(StandardNormal));
                }
                x.push(xi);
                y.push(yi);
            }
            Dataset::new(x, y, z, d)
        }
        Family::GaussianOracle => {
            let load = gaussian_loading(spec);
            let rho = spec.partial_corr;
            let tail = (1.0 - rho * rho).sqrt();
            for i in 0..n {
                let shared = load * row(i).iter().sum::<f64>();
                let ex: f64 = rng.sample(StandardNormal);
                let ey: f64 = rho * ex + tail * rng.sample::<f64, _>(StandardNormal);
                x.push(shared + ex);
                y.push(shared + ey);
            }
            Dataset::new(x, y, z, d)
        }
    }
}

/// Per-coordinate X -> Z loadings of the chain: `d * A_f`, averaging 1.
fn chain_loadings(coef: &Coefficients) -> Vec<f64> {
    let d = coef.a_f.len() as f64;
    coef.a_f.iter().map(|a| a * d).collect()
}

/// X -> Z and Y -> Z loadings of the collider: both `2 d * A_f`, so `z`
/// carries `x + y` along one direction.
fn collider_loadings(coef: &Coefficients) -> (Vec<f64>, Vec<f64>) {
    let d = coef.a_f.len() as f64;
    let load: Vec<f64> = coef.a_f.iter().map(|a| 2.0 * a * d).collect();
    (load.clone(), load)
}

fn gaussian_loading(spec: &ScenarioSpec) -> f64 {
    spec.coupling / (spec.d_z as f64).sqrt()
}

/// Draws `x` from a model's true conditional law at a given `z`.
pub trait ConditionalSampler: Send + Sync {
    fn sample(&self, z: &[f64], rng: &mut StreamRng) -> f64;
}

/// Closed-form conditional laws of `x | z`.
#[derive(Clone, Debug, PartialEq)]
pub enum OracleSampler {
    /// `N(weights' z + intercept, sd^2)`
    Linear {
        weights: Vec<f64>,
        intercept: f64,
        sd: f64,
    },
    /// `Uniform[0, 1]`, independent of `z`.
    Uniform01,
}

impl ConditionalSampler for OracleSampler {
    fn sample(&self, z: &[f64], rng: &mut StreamRng) -> f64 {
        match self {
            OracleSampler::Linear {
                weights,
                intercept,
                sd,
            } => dot(weights, z) + intercept + sd * rng.sample::<f64, _>(StandardNormal),
            OracleSampler::Uniform01 => rng.random::<f64>(),
        }
    }
}

impl OracleSampler {
    pub fn conditional_mean(&self, z: &[f64]) -> f64 {
        match self {
            OracleSampler::Linear {
                weights, intercept, ..
            } => dot(weights, z) + intercept,
            OracleSampler::Uniform01 => 0.5,
        }
    }
}

/// True `x | z` sampler for families whose conditional has a closed form.
pub fn oracle_conditional_sampler(spec: &ScenarioSpec) -> Result<OracleSampler> {
    spec.validate()?;
    let coef = draw_coefficients(spec);
    match (spec.family, spec.hypothesis) {
        (Family::Gof1, _) => Ok(OracleSampler::Uniform01),
        (Family::Gof2, _)
        | (Family::PostNonlinearI | Family::PostNonlinearII | Family::PostNonlinearIII, Hypothesis::H0) => {
            Ok(OracleSampler::Linear {
                weights: coef.a_f,
                intercept: 0.0,
                sd: spec.noise_sd,
            })
        }
        (Family::PostNonlinearI | Family::PostNonlinearII | Family::PostNonlinearIII, Hypothesis::H1) => {
            Ok(OracleSampler::Linear {
                weights: vec![0.0; spec.d_z],
                intercept: 0.0,
                sd: 1.0,
            })
        }
        (Family::GaussianOracle, _) => Ok(OracleSampler::Linear {
            weights: vec![gaussian_loading(spec); spec.d_z],
            intercept: 0.0,
            sd: 1.0,
        }),
        (family, _) => Err(Error::UnsupportedFamily(family.name().to_string())),
    }
}
