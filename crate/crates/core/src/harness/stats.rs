use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};
use statrs::statistics::Statistics;

use crate::error::{Error, Result};

/// Stored points never exceed this, whatever the horizon.
pub const MAX_TRAJECTORY_POINTS: u64 = 10_000;
pub const MIN_CLASSIFY_SAMPLES: usize = 100;
/// Tail growth above this (packets/slot) counts as unstable.
pub const SLOPE_THRESHOLD: f64 = 0.005;

/// Total backlog sampled every `stride` slots; `values[k]` is the backlog
/// after slot `(k + 1) * stride`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub stride: u64,
    pub values: Vec<f64>,
}

impl Trajectory {
    pub fn stride_for(horizon: u64) -> u64 {
        horizon.div_ceil(MAX_TRAJECTORY_POINTS).max(1)
    }

    /// Slot index of sample `k`.
    pub fn time(&self, k: usize) -> f64 {
        ((k as u64 + 1) * self.stride) as f64
    }

    pub fn horizon(&self) -> u64 {
        self.values.len() as u64 * self.stride
    }

    pub fn last(&self) -> Option<f64> {
        self.values.last().copied()
    }

    /// Pointwise mean of equally strided trajectories.
    pub fn mean(runs: &[&Trajectory]) -> Result<Trajectory> {
        let first = runs.first().ok_or_else(|| Error::Dimension("no trajectories to average".into()))?;
        if runs.iter().any(|r| r.stride != first.stride || r.values.len() != first.values.len()) {
            return Err(Error::Dimension("trajectories differ in shape".into()));
        }
        let n = runs.len() as f64;
        let values = (0..first.values.len())
            .map(|k| runs.iter().map(|r| r.values[k]).sum::<f64>() / n)
            .collect();
        Ok(Trajectory {
            stride: first.stride,
            values,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stability {
    pub stable: bool,
    /// Least-squares growth rate over the second half, packets/slot.
    pub slope: f64,
}

/// Stable iff the tail slope is below [`SLOPE_THRESHOLD`] and the final
/// backlog is at most half of everything that could have arrived.
pub fn classify_stability(trajectory: &Trajectory, lambda_sum: f64) -> Result<Stability> {
    let n = trajectory.values.len();
    if n < MIN_CLASSIFY_SAMPLES {
        return Err(Error::TooFewSamples {
            needed: MIN_CLASSIFY_SAMPLES,
            got: n,
        });
    }
    let start = n / 2;
    let ts: Vec<f64> = (start..n).map(|k| trajectory.time(k)).collect();
    let ys = &trajectory.values[start..];
    let slope = least_squares_slope(&ts, ys);
    let last = trajectory.values[n - 1];
    let bound = 0.5 * trajectory.horizon() as f64 * lambda_sum;
    Ok(Stability {
        stable: slope < SLOPE_THRESHOLD && last <= bound,
        slope,
    })
}

fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let mx = xs.mean();
    let my = ys.mean();
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

/// Student-t confidence interval on per-seed values: `(mean, half-width)`.
pub fn aggregate_ci(values: &[f64], level: f64) -> Result<(f64, f64)> {
    if values.len() < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            got: values.len(),
        });
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidParam {
            name: "level",
            reason: format!("{level} is not in (0, 1)"),
        });
    }
    let n = values.len() as f64;
    let mean = values.mean();
    let sd = values.std_dev();
    let t = StudentsT::new(0.0, 1.0, n - 1.0)
        .expect("positive degrees of freedom")
        .inverse_cdf(0.5 + level / 2.0);
    Ok((mean, t * sd / n.sqrt()))
}
