//! Grid traffic series: ingestion, aggregation, synthesis, windowing,
//! normalization and forecasting metrics.

pub mod cdr;
pub mod metrics;
pub mod synthetic;

pub use cdr::{aggregate, load_cdr, AggregateSpec, CdrRecord, CdrSchema, Delimiter};
pub use metrics::{nmae, nmae_values, nrmse, nrmse_values};
pub use synthetic::{gen_synthetic, Hotspot, SemanticPair, SyntheticConfig};

use std::io::Write;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::Real;

/// One grid frame of traffic volume for a single time slot.
#[derive(Clone, Debug, PartialEq)]
pub struct TrafficFrame {
    values: Array2<Real>,
    slot: u64,
}

impl TrafficFrame {
    pub fn new(values: Array2<Real>, slot: u64) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Argument(format!(
                "traffic frame for slot {slot} contains negative or non-finite values"
            )));
        }
        Ok(TrafficFrame { values, slot })
    }

    pub fn zeros(nx: usize, ny: usize, slot: u64) -> Self {
        TrafficFrame {
            values: Array2::zeros((nx, ny)),
            slot,
        }
    }

    pub fn values(&self) -> &Array2<Real> {
        &self.values
    }

    pub fn slot(&self) -> u64 {
        self.slot
    }

    pub fn dims(&self) -> (usize, usize) {
        self.values.dim()
    }

    /// Number of grids.
    pub fn n_grids(&self) -> usize {
        self.values.len()
    }

    /// Row-major flattened copy (grid index = x * ny + y).
    pub fn flat(&self) -> Vec<Real> {
        self.values.iter().copied().collect()
    }

    pub fn total(&self) -> Real {
        self.values.sum()
    }

    pub(crate) fn with_slot(&self, slot: u64) -> TrafficFrame {
        TrafficFrame {
            values: self.values.clone(),
            slot,
        }
    }
}

/// Time-ordered stack of frames with a fixed slot duration.
#[derive(Clone, Debug)]
pub struct TrafficSeries {
    frames: Vec<TrafficFrame>,
    slot_minutes: u32,
}

impl TrafficSeries {
    pub fn new(frames: Vec<TrafficFrame>, slot_minutes: u32) -> Result<Self> {
        if frames.is_empty() {
            return Err(Error::Argument("traffic series must be non-empty".into()));
        }
        let dims = frames[0].dims();
        for pair in frames.windows(2) {
            if pair[1].slot != pair[0].slot + 1 {
                return Err(Error::Argument(format!(
                    "slot indices must be consecutive: {} then {}",
                    pair[0].slot, pair[1].slot
                )));
            }
        }
        if frames.iter().any(|f| f.dims() != dims) {
            return Err(Error::Argument("frames must share one grid shape".into()));
        }
        Ok(TrafficSeries {
            frames,
            slot_minutes,
        })
    }

    pub fn frames(&self) -> &[TrafficFrame] {
        &self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn slot_minutes(&self) -> u32 {
        self.slot_minutes
    }

    pub fn dims(&self) -> (usize, usize) {
        self.frames[0].dims()
    }

    pub fn slots_per_day(&self) -> usize {
        (24 * 60 / self.slot_minutes) as usize
    }

    pub fn total(&self) -> Real {
        self.frames.iter().map(TrafficFrame::total).sum()
    }

    pub fn max_value(&self) -> Real {
        self.frames
            .iter()
            .flat_map(|f| f.values.iter().copied())
            .fold(0.0, Real::max)
    }

    /// Split into `[0, idx)` and `[idx, len)` sub-series.
    pub fn split_at(&self, idx: usize) -> Result<(TrafficSeries, TrafficSeries)> {
        if idx == 0 || idx >= self.len() {
            return Err(Error::Argument(format!(
                "split index {idx} outside (0, {})",
                self.len()
            )));
        }
        let head = TrafficSeries {
            frames: self.frames[..idx].to_vec(),
            slot_minutes: self.slot_minutes,
        };
        let tail = TrafficSeries {
            frames: self.frames[idx..].to_vec(),
            slot_minutes: self.slot_minutes,
        };
        Ok((head, tail))
    }

    /// CSV export with header `slot,gx,gy,value`.
    pub fn export_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "slot,gx,gy,value")?;
        for frame in &self.frames {
            for ((x, y), v) in frame.values.indexed_iter() {
                writeln!(w, "{},{},{},{}", frame.slot, x, y, v)?;
            }
        }
        Ok(())
    }
}

/// Max-normalization fitted on training data; test values above the training
/// max stay above 1 (no clipping).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Scaler {
    max: Real,
}

impl Scaler {
    pub fn fit(series: &TrafficSeries) -> Result<Self> {
        let max = series.max_value();
        if max <= 0.0 {
            return Err(Error::Scaler(
                "cannot fit a max scaler on an all-zero series".into(),
            ));
        }
        Ok(Scaler { max })
    }

    pub fn from_max(max: Real) -> Result<Self> {
        if !(max > 0.0) {
            return Err(Error::Scaler(format!("scaler max must be positive, got {max}")));
        }
        Ok(Scaler { max })
    }

    pub fn max(&self) -> Real {
        self.max
    }

    pub fn normalize_value(&self, v: Real) -> Real {
        v / self.max
    }

    pub fn denormalize_value(&self, v: Real) -> Real {
        v * self.max
    }

    pub fn normalize_frame(&self, frame: &TrafficFrame) -> Array2<Real> {
        frame.values().mapv(|v| v / self.max)
    }

    pub fn denormalize_frame(&self, values: &Array2<Real>, slot: u64) -> Result<TrafficFrame> {
        TrafficFrame::new(values.mapv(|v| (v * self.max).max(0.0)), slot)
    }
}

/// Normalize a series into `[0, 1]` (training data) by its max, or by a
/// previously fitted scaler for test data.
pub fn normalize(series: &TrafficSeries, scaler: Option<Scaler>) -> Result<(Vec<Array2<Real>>, Scaler)> {
    let scaler = match scaler {
        Some(s) => s,
        None => Scaler::fit(series)?,
    };
    let frames = series
        .frames()
        .iter()
        .map(|f| scaler.normalize_frame(f))
        .collect();
    Ok((frames, scaler))
}

/// Sliding input/target pairs: `(length - k)` samples, stride 1, chronological.
pub struct Window<'a> {
    pub input: &'a [TrafficFrame],
    pub target: &'a TrafficFrame,
}

pub fn make_windows(series: &TrafficSeries, k: usize) -> Result<Vec<Window<'_>>> {
    if k == 0 {
        return Err(Error::Argument("window length must be at least 1".into()));
    }
    if series.len() <= k {
        return Err(Error::Argument(format!(
            "series length {} must exceed window length {k}",
            series.len()
        )));
    }
    let frames = series.frames();
    Ok((0..series.len() - k)
        .map(|i| Window {
            input: &frames[i..i + k],
            target: &frames[i + k],
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn series(vals: &[Real]) -> TrafficSeries {
        let frames = vals
            .iter()
            .enumerate()
            .map(|(i, &v)| TrafficFrame::new(array![[v]], i as u64).unwrap())
            .collect();
        TrafficSeries::new(frames, 30).unwrap()
    }

    #[test]
    fn negative_values_are_rejected() {
        assert!(TrafficFrame::new(array![[-1.0]], 0).is_err());
        assert!(TrafficFrame::new(array![[Real::NAN]], 0).is_err());
    }

    #[test]
    fn non_consecutive_slots_are_rejected() {
        let a = TrafficFrame::new(array![[1.0]], 0).unwrap();
        let b = TrafficFrame::new(array![[1.0]], 2).unwrap();
        assert!(TrafficSeries::new(vec![a, b], 30).is_err());
    }

    #[test]
    fn scaler_normalizes_and_roundtrips() {
        let s = Scaler::from_max(4.0).unwrap();
        assert_eq!(s.normalize_value(2.0), 0.5);
        let v = 3.123456789;
        assert!((s.denormalize_value(s.normalize_value(v)) - v).abs() < 1e-12);
    }

    #[test]
    fn test_values_above_train_max_are_not_clipped() {
        let train = series(&[1.0, 4.0]);
        let (_, scaler) = normalize(&train, None).unwrap();
        let test = series(&[8.0, 2.0]);
        let (frames, _) = normalize(&test, Some(scaler)).unwrap();
        assert_eq!(frames[0][[0, 0]], 2.0);
    }

    #[test]
    fn all_zero_series_cannot_be_normalized() {
        let z = series(&[0.0, 0.0]);
        assert!(matches!(normalize(&z, None), Err(Error::Scaler(_))));
    }

    #[test]
    fn window_count_and_first_target() {
        let s = series(&(0..14).map(|v| v as Real).collect::<Vec<_>>());
        let windows = make_windows(&s, 12).unwrap();
        assert_eq!(windows.len(), 2);
        assert_eq!(windows[0].target.slot(), 12);
        assert_eq!(windows[0].input.len(), 12);
    }

    #[test]
    fn windows_reassemble_the_series_chronologically() {
        let s = series(&[5.0, 6.0, 7.0, 8.0, 9.0]);
        let windows = make_windows(&s, 2).unwrap();
        assert_eq!(windows.len(), 3);
        for pair in windows.windows(2) {
            assert!(pair[0].target.slot() < pair[1].target.slot());
        }
        // first window's inputs plus every target reconstruct the series
        let mut rebuilt: Vec<Real> = windows[0].input.iter().map(|f| f.values()[[0, 0]]).collect();
        rebuilt.extend(windows.iter().map(|w| w.target.values()[[0, 0]]));
        assert_eq!(rebuilt, vec![5.0, 6.0, 7.0, 8.0, 9.0]);
    }

    #[test]
    fn too_short_series_cannot_be_windowed() {
        let s = series(&[1.0, 2.0]);
        assert!(make_windows(&s, 2).is_err());
    }
}
