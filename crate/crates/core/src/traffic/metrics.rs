//! Mean-normalized forecasting errors. The normalizer is the mean of the
//! ground truth over the whole evaluation set, not per frame.

use super::TrafficFrame;
use crate::error::{Error, Result};
use crate::Real;

/// NMAE over paired (predicted, truth) values.
pub fn nmae_values(pairs: &[(Real, Real)]) -> Result<Real> {
    let (mean, n) = truth_mean(pairs)?;
    let abs_sum: Real = pairs.iter().map(|(p, t)| (p - t).abs()).sum();
    Ok(abs_sum / n / mean)
}

/// NRMSE over paired (predicted, truth) values.
pub fn nrmse_values(pairs: &[(Real, Real)]) -> Result<Real> {
    let (mean, n) = truth_mean(pairs)?;
    let sq_sum: Real = pairs.iter().map(|(p, t)| (p - t) * (p - t)).sum();
    Ok((sq_sum / n).sqrt() / mean)
}

fn truth_mean(pairs: &[(Real, Real)]) -> Result<(Real, Real)> {
    if pairs.is_empty() {
        return Err(Error::Metric("no values to score".into()));
    }
    let n = pairs.len() as Real;
    let mean: Real = pairs.iter().map(|(_, t)| t).sum::<Real>() / n;
    if mean <= 0.0 {
        return Err(Error::Metric(format!(
            "truth mean must be positive, got {mean}"
        )));
    }
    Ok((mean, n))
}

pub fn frame_pairs(pred: &TrafficFrame, truth: &TrafficFrame) -> Result<Vec<(Real, Real)>> {
    if pred.dims() != truth.dims() {
        return Err(Error::Argument(format!(
            "frame shapes differ: {:?} vs {:?}",
            pred.dims(),
            truth.dims()
        )));
    }
    Ok(pred
        .values()
        .iter()
        .zip(truth.values().iter())
        .map(|(&p, &t)| (p, t))
        .collect())
}

pub fn nmae(pred: &TrafficFrame, truth: &TrafficFrame) -> Result<Real> {
    nmae_values(&frame_pairs(pred, truth)?)
}

pub fn nrmse(pred: &TrafficFrame, truth: &TrafficFrame) -> Result<Real> {
    nrmse_values(&frame_pairs(pred, truth)?)
}

/// Pool many frame pairs into one evaluation set and score it.
pub fn series_metrics(
    preds: &[TrafficFrame],
    truths: &[TrafficFrame],
) -> Result<(Real, Real)> {
    if preds.len() != truths.len() {
        return Err(Error::Argument(format!(
            "series lengths differ: {} vs {}",
            preds.len(),
            truths.len()
        )));
    }
    let mut pairs = Vec::new();
    for (p, t) in preds.iter().zip(truths) {
        pairs.extend(frame_pairs(p, t)?);
    }
    Ok((nmae_values(&pairs)?, nrmse_values(&pairs)?))
}
