//! Classifier-based KL divergence and conditional mutual information.
//!
//! A classifier trained to tell samples of `f` (label 1) from samples of `g`
//! (label 0) yields the likelihood ratio `L = a / (1 - a)` from its predicted
//! probability `a`. Plugging it into the Donsker-Varadhan form gives
//!
//! ```text
//! KL(f || g) ~ mean_f ln L - ln mean_g L
//! ```
//!
//! evaluated on rows the classifier did not see. Mutual information is the
//! KL divergence between the joint and the product of marginals, and
//! `I(X; Y | Z) = I(X; Y, Z) - I(X; Z)`.

use rand::seq::SliceRandom;

use crate::data::{Dataset, StreamRng};
use crate::error::{Error, Result};
use crate::mlp::{train, Matrix, MlpClassifier, TrainConfig};

/// Probabilities are clipped to `[CLIP_EPS, 1 - CLIP_EPS]`.
pub const CLIP_EPS: f64 = 1e-3;

/// Minimum rows per class for a KL estimate.
pub const MIN_CLASS_ROWS: usize = 30;

/// Minimum dataset size for a CMI estimate.
pub const MIN_CMI_ROWS: usize = 90;

/// Largest magnitude of a single clipped log-ratio, `ln((1 - eps) / eps)`.
pub fn log_ratio_bound(eps: f64) -> f64 {
    ((1.0 - eps) / eps).ln()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KlEstimate {
    pub value: f64,
    /// Evaluation rows drawn from `f`.
    pub n_pos: usize,
    /// Evaluation rows drawn from `g`.
    pub n_neg: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CmiEstimate {
    /// `i_xyz - i_xz`.
    pub value: f64,
    pub i_xyz: f64,
    pub i_xz: f64,
}

fn clipped_log_ratio(p: f64, eps: f64) -> f64 {
    let a = p.clamp(eps, 1.0 - eps);
    (a / (1.0 - a)).ln()
}

/// Donsker-Varadhan plug-in from classifier probabilities on held-out rows of
/// `f` and of `g`.
pub fn dv_estimate(probs_f: &[f64], probs_g: &[f64], eps: f64) -> Result<f64> {
    if probs_f.is_empty() || probs_g.is_empty() {
        return Err(Error::TooFewSamples {
            needed: 1,
            got: probs_f.len().min(probs_g.len()),
        });
    }
    let mean_log_f =
        probs_f.iter().map(|&p| clipped_log_ratio(p, eps)).sum::<f64>() / probs_f.len() as f64;
    let mean_ratio_g =
        probs_g.iter().map(|&p| clipped_log_ratio(p, eps).exp()).sum::<f64>() / probs_g.len() as f64;
    Ok(mean_log_f - mean_ratio_g.ln())
}

/// Rows `0..n` split into (train, eval) with `eval = n / 3`.
fn holdout_split(n: usize, rng: &mut StreamRng) -> (Vec<usize>, Vec<usize>) {
    let mut rows: Vec<usize> = (0..n).collect();
    rows.shuffle(rng);
    let n_eval = n / 3;
    let eval = rows[..n_eval].to_vec();
    let train = rows[n_eval..].to_vec();
    (train, eval)
}

fn check_classes(f: &Matrix, g: &Matrix) -> Result<()> {
    if f.cols() != g.cols() {
        return Err(Error::DimensionMismatch {
            expected: f.cols(),
            got: g.cols(),
        });
    }
    let fewest = f.rows().min(g.rows());
    if fewest < MIN_CLASS_ROWS {
        return Err(Error::TooFewSamples {
            needed: MIN_CLASS_ROWS,
            got: fewest,
        });
    }
    Ok(())
}

/// Trains on the `train` rows of each class and evaluates on the `eval` rows.
fn kl_on_split(
    f: &Matrix,
    g: &Matrix,
    (f_train, f_eval): (&[usize], &[usize]),
    (g_train, g_eval): (&[usize], &[usize]),
    cfg: &TrainConfig,
) -> Result<(KlEstimate, MlpClassifier)> {
    let model = train(&f.select(f_train), &g.select(g_train), cfg)?;
    let probs_f = model.predict_proba(&f.select(f_eval))?;
    let probs_g = model.predict_proba(&g.select(g_eval))?;
    let value = dv_estimate(&probs_f, &probs_g, CLIP_EPS)?;
    Ok((
        KlEstimate {
            value,
            n_pos: f_eval.len(),
            n_neg: g_eval.len(),
        },
        model,
    ))
}

/// KL divergence between the laws of the rows of `f` and of `g`.
///
/// Each class is split 2:1 into classifier-training and evaluation rows.
pub fn estimate_kl(f: &Matrix, g: &Matrix, cfg: &TrainConfig) -> Result<KlEstimate> {
    check_classes(f, g)?;
    let mut rng = StreamRng::new(cfg.seed, 1);
    let (f_train, f_eval) = holdout_split(f.rows(), &mut rng);
    let (g_train, g_eval) = holdout_split(g.rows(), &mut rng);
    let model_cfg = cfg.with_seed(StreamRng::child_seed(cfg.seed, 2));
    kl_on_split(f, g, (&f_train, &f_eval), (&g_train, &g_eval), &model_cfg).map(|(kl, _)| kl)
}

/// Permutation of `0..n` that only moves entries within `train` and within
/// `eval`, so product samples never mix the two folds.
fn fold_permutation(n: usize, train: &[usize], eval: &[usize], rng: &mut StreamRng) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    for fold in [train, eval] {
        let mut shuffled = fold.to_vec();
        shuffled.shuffle(rng);
        for (&dst, &src) in fold.iter().zip(&shuffled) {
            perm[dst] = src;
        }
    }
    perm
}

/// Rows `(x, extra..., z)` for every sample, with `x` read through `x_source`.
fn feature_rows(data: &Dataset, x_source: &[usize], with_y: bool) -> Matrix {
    let d = data.d_z() + 1 + usize::from(with_y);
    let mut out = Vec::with_capacity(data.n() * d);
    for i in 0..data.n() {
        out.push(data.x()[x_source[i]]);
        if with_y {
            out.push(data.y()[i]);
        }
        out.extend_from_slice(data.z_row(i));
    }
    Matrix::new(data.n(), d, out).expect("shape fixed above")
}

/// Classifier-based estimate of `I(X; Y | Z)`.
///
/// `I(X; Y, Z)` compares rows `(x, y, z)` with rows whose `x` was permuted
/// against `(y, z)`; `I(X; Z)` does the same without `y`. Both use the same
/// train/evaluation rows and independent permutations. Negative values are
/// returned as-is.
pub fn estimate_cmi(data: &Dataset, cfg: &TrainConfig) -> Result<CmiEstimate> {
    let n = data.n();
    if n < MIN_CMI_ROWS {
        return Err(Error::TooFewSamples {
            needed: MIN_CMI_ROWS,
            got: n,
        });
    }
    cfg.validate()?;
    let mut rng = StreamRng::new(cfg.seed, 1);
    let (train_rows, eval_rows) = holdout_split(n, &mut rng);
    let perm_xyz = fold_permutation(n, &train_rows, &eval_rows, &mut rng);
    let perm_xz = fold_permutation(n, &train_rows, &eval_rows, &mut rng);
    let identity: Vec<usize> = (0..n).collect();

    let split = (train_rows.as_slice(), eval_rows.as_slice());
    let cfg_xyz = cfg.with_seed(StreamRng::child_seed(cfg.seed, 2));
    let cfg_xz = cfg.with_seed(StreamRng::child_seed(cfg.seed, 3));
    let (xyz, xz) = rayon::join(
        || {
            let f = feature_rows(data, &identity, true);
            let g = feature_rows(data, &perm_xyz, true);
            kl_on_split(&f, &g, split, split, &cfg_xyz)
        },
        || {
            let f = feature_rows(data, &identity, false);
            let g = feature_rows(data, &perm_xz, false);
            kl_on_split(&f, &g, split, split, &cfg_xz)
        },
    );
    let (i_xyz, i_xz) = (xyz?.0.value, xz?.0.value);
    Ok(CmiEstimate {
        value: i_xyz - i_xz,
        i_xyz,
        i_xz,
    })
}
