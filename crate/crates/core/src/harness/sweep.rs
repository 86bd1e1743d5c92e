use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::direction;
use crate::error::{Error, Result};
use crate::scheduling::SchedulerKind;

use super::config::ExperimentConfig;
use super::sim::{run_once, RunResult};
use super::stats::{aggregate_ci, classify_stability, Trajectory};

/// Runs of one configuration over `n_seeds` seeds, in seed order.
pub fn run_seeds(config: &ExperimentConfig) -> Result<Vec<RunResult>> {
    config.validate()?;
    (0..config.n_seeds)
        .into_par_iter()
        .map(|k| run_once(config, config.seed_for(k)))
        .collect()
}

/// Seed-aggregated summary of one configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSummary {
    pub lambda: Vec<f64>,
    pub mean_q_avg: f64,
    /// 90% half-width; zero with a single seed.
    pub q_avg_half_width: f64,
    pub stable_fraction: f64,
    pub mean_final_backlog: f64,
    pub runs: Vec<RunResult>,
}

impl PointSummary {
    pub fn from_runs(lambda: Vec<f64>, runs: Vec<RunResult>) -> Result<Self> {
        let q: Vec<f64> = runs.iter().map(|r| r.q_avg).collect();
        let (mean_q_avg, q_avg_half_width) = if q.len() >= 2 {
            aggregate_ci(&q, 0.90)?
        } else {
            (q.first().copied().unwrap_or(0.0), 0.0)
        };
        let stable = runs.iter().filter(|r| r.stable == Some(true)).count();
        let finals: f64 = runs.iter().map(|r| r.final_backlog as f64).sum();
        Ok(PointSummary {
            lambda,
            mean_q_avg,
            q_avg_half_width,
            stable_fraction: stable as f64 / runs.len().max(1) as f64,
            mean_final_backlog: finals / runs.len().max(1) as f64,
            runs,
        })
    }

    pub fn mean_trajectory(&self) -> Result<Trajectory> {
        Trajectory::mean(&self.runs.iter().map(|r| &r.trajectory).collect::<Vec<_>>())
    }

    /// Classification of the seed-averaged trajectory.
    pub fn mean_stable(&self) -> Result<bool> {
        let lambda_sum: f64 = self.lambda.iter().sum();
        Ok(classify_stability(&self.mean_trajectory()?, lambda_sum)?.stable)
    }
}

pub fn run_point(config: &ExperimentConfig) -> Result<PointSummary> {
    PointSummary::from_runs(config.params.lambda.clone(), run_seeds(config)?)
}

/// Outcome of one grid point; failures stay local to their point.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPoint {
    pub lambda: Vec<f64>,
    pub result: Result<PointSummary>,
}

/// `n × n` points spanning `[0, max0] × [0, max1]` for two-node networks,
/// `λ0` varying slowest.
pub fn grid_2d(max0: f64, max1: f64, n: usize) -> Vec<Vec<f64>> {
    let step = |max: f64, k: usize| if n > 1 { max * k as f64 / (n - 1) as f64 } else { 0.0 };
    (0..n)
        .flat_map(|i| (0..n).map(move |j| vec![step(max0, i), step(max1, j)]))
        .collect()
}

/// Default sweep box of the two-node network: `[0, (1+ρ0)/2 + 0.1] × [0, ρ1 + 0.1]`.
pub fn default_box(rho0: f64, rho1: f64) -> (f64, f64) {
    ((1.0 + rho0) / 2.0 + 0.1, rho1 + 0.1)
}

/// Arrival vectors `base` with `γ` added to the source, for `steps` values of
/// `γ` in `[0, gamma_max]`.
pub fn gamma_grid(base: &[f64], gamma_max: f64, steps: usize) -> Vec<Vec<f64>> {
    (0..steps)
        .map(|k| {
            let g = if steps > 1 { gamma_max * k as f64 / (steps - 1) as f64 } else { 0.0 };
            let mut l = base.to_vec();
            l[0] += g;
            l
        })
        .collect()
}

/// Independent seeded runs at every arrival vector. All (point, seed) tasks
/// run in parallel; results come back in input order.
pub fn sweep_grid(config: &ExperimentConfig, grid: &[Vec<f64>]) -> Result<Vec<GridPoint>> {
    if grid.is_empty() {
        return Err(Error::InvalidParam {
            name: "grid",
            reason: "no points".into(),
        });
    }
    let point_configs: Vec<Result<ExperimentConfig>> = grid
        .iter()
        .map(|lambda| {
            let mut c = config.clone();
            c.params.lambda = lambda.clone();
            c.validate().map(|_| c)
        })
        .collect();
    let tasks: Vec<(usize, usize)> = point_configs
        .iter()
        .enumerate()
        .filter(|(_, c)| c.is_ok())
        .flat_map(|(i, _)| (0..config.n_seeds).map(move |k| (i, k)))
        .collect();
    let mut runs: Vec<((usize, usize), Result<RunResult>)> = tasks
        .into_par_iter()
        .map(|(i, k)| {
            let c = point_configs[i].as_ref().expect("filtered to valid configs");
            ((i, k), run_once(c, c.seed_for(k)))
        })
        .collect();
    runs.sort_by_key(|(key, _)| *key);

    let mut per_point: Vec<Vec<Result<RunResult>>> = (0..grid.len()).map(|_| Vec::new()).collect();
    for ((i, _), r) in runs {
        per_point[i].push(r);
    }
    Ok(grid
        .iter()
        .zip(point_configs)
        .zip(per_point)
        .map(|((lambda, cfg), results)| {
            let result = cfg.and_then(|_| {
                let runs = results.into_iter().collect::<Result<Vec<_>>>()?;
                PointSummary::from_runs(lambda.clone(), runs)
            });
            GridPoint {
                lambda: lambda.clone(),
                result,
            }
        })
        .collect())
}

/// Empirical boundary along one ray.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OraclePoint {
    pub angle_deg: f64,
    pub scale: f64,
    pub lambda0: f64,
    pub lambda1: f64,
    pub horizon: u64,
    /// Classification along the ray stayed non-monotone after widening the horizon.
    pub noisy: bool,
}

pub const ORACLE_RESOLUTION: f64 = 0.01;
pub const ORACLE_MIN_HORIZON: u64 = 50_000;
const MONOTONE_MARGIN: f64 = 0.05;
const MAX_WIDENINGS: u32 = 2;

fn majority_stable(config: &ExperimentConfig, lambda: (f64, f64)) -> Result<bool> {
    let mut c = config.clone();
    c.params.lambda = vec![lambda.0, lambda.1];
    let runs = run_seeds(&c)?;
    let stable = runs.iter().filter(|r| r.stable == Some(true)).count();
    Ok(2 * stable > runs.len())
}

/// Bisection on the scale along the ray at `angle_deg`: a point is inside
/// when most seeds classify stable. The ray ends where the total rate is 1.
///
/// After bisection the points `0.05` either side are re-checked; if they
/// disagree with the result the horizon is doubled and the search repeated.
pub fn boundary_oracle(config: &ExperimentConfig, angle_deg: f64) -> Result<OraclePoint> {
    if config.params.n_relays != 1 {
        return Err(Error::InvalidParam {
            name: "n_relays",
            reason: "the boundary oracle needs a one-relay network".into(),
        });
    }
    if !matches!(config.scheduler, SchedulerKind::Mws | SchedulerKind::Rqcsma) {
        return Err(Error::InvalidParam {
            name: "scheduler",
            reason: "the boundary oracle runs MWS or RQ-CSMA".into(),
        });
    }
    let (dx, dy) = direction(angle_deg.to_radians());
    let cap = 1.0 / (dx + dy);
    let at = |c: f64| (c * dx, c * dy);

    let mut cfg = config.clone();
    cfg.horizon = cfg.horizon.max(ORACLE_MIN_HORIZON);
    let mut widenings = 0;
    loop {
        let inside = |c: f64| majority_stable(&cfg, at(c));
        let scale = if inside(cap)? {
            cap
        } else {
            let (mut lo, mut hi) = (0.0, cap);
            while hi - lo > ORACLE_RESOLUTION {
                let mid = 0.5 * (lo + hi);
                if inside(mid)? {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        };
        let below_ok = scale - MONOTONE_MARGIN <= 0.0 || inside(scale - MONOTONE_MARGIN)?;
        let above_ok = scale + MONOTONE_MARGIN >= cap || !inside(scale + MONOTONE_MARGIN)?;
        let monotone = below_ok && above_ok;
        if monotone || widenings == MAX_WIDENINGS {
            let (lambda0, lambda1) = at(scale);
            return Ok(OraclePoint {
                angle_deg,
                scale,
                lambda0,
                lambda1,
                horizon: cfg.horizon,
                noisy: !monotone,
            });
        }
        widenings += 1;
        cfg.horizon *= 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::NetworkParams;

    fn config() -> ExperimentConfig {
        let mut c = ExperimentConfig::new(
            NetworkParams::new(vec![0.4, 0.7], vec![0.0, 0.0]).unwrap(),
            SchedulerKind::Mws,
        );
        c.horizon = 1_000;
        c.n_seeds = 3;
        c
    }

    #[test]
    fn zero_grid_all_stable() {
        let grid = vec![vec![0.0, 0.0]; 4];
        for p in sweep_grid(&config(), &grid).unwrap() {
            let s = p.result.unwrap();
            assert_eq!(s.stable_fraction, 1.0);
            assert_eq!(s.mean_q_avg, 0.0);
        }
    }

    #[test]
    fn bad_point_does_not_abort_sweep() {
        let grid = vec![vec![0.1, 0.1], vec![-1.0, 0.0], vec![0.2, 0.0]];
        let out = sweep_grid(&config(), &grid).unwrap();
        assert!(out[0].result.is_ok());
        assert!(out[1].result.is_err());
        assert!(out[2].result.is_ok());
    }

    #[test]
    fn sweep_matches_serial_runs() {
        let grid = grid_2d(0.4, 0.4, 2);
        let out = sweep_grid(&config(), &grid).unwrap();
        for p in out {
            let mut c = config();
            c.params.lambda = p.lambda.clone();
            let serial: Vec<RunResult> = (0..c.n_seeds).map(|k| run_once(&c, c.seed_for(k)).unwrap()).collect();
            assert_eq!(p.result.unwrap().runs, serial);
        }
    }

    #[test]
    fn grids() {
        let g = grid_2d(0.8, 0.4, 3);
        assert_eq!(g.len(), 9);
        assert_eq!(g[5], vec![0.4, 0.4]);
        let g = gamma_grid(&[0.4, 0.05], 0.2, 3);
        assert_eq!(g[2], vec![0.4 + 0.2, 0.05]);
        let (a, b) = default_box(0.4, 0.7);
        assert!((a - 0.8).abs() < 1e-12 && (b - 0.8).abs() < 1e-12);
    }

    #[test]
    fn oracle_rejects_multi_relay() {
        let mut c = config();
        c.params = NetworkParams::new(vec![0.4, 0.7, 0.5], vec![0.0; 3]).unwrap();
        assert!(boundary_oracle(&c, 0.0).is_err());
    }
}
