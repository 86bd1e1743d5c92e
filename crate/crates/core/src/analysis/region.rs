//! Achievable rate region of the source-plus-one-relay network.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateRegion2 {
    pub rho0: f64,
    pub rho1: f64,
}

impl RateRegion2 {
    pub fn new(rho0: f64, rho1: f64) -> Result<Self> {
        for (name, r) in [("rho0", rho0), ("rho1", rho1)] {
            if !(0.0..=1.0).contains(&r) {
                return Err(Error::InvalidParam {
                    name,
                    reason: format!("{r} is not a probability"),
                });
            }
        }
        Ok(RateRegion2 { rho0, rho1 })
    }

    /// Total rate the destination can absorb: `ρ0 + ρ1(1 − ρ0)`.
    pub fn sum_cap(&self) -> f64 {
        self.rho0 + self.rho1 * (1.0 - self.rho0)
    }
}

/// Strict membership. For `ρ1 ≥ 0.5` the region is the union of a low-`λ1`
/// clause and a high-`λ1` clause.
pub fn region_contains(region: &RateRegion2, lambda0: f64, lambda1: f64) -> bool {
    let RateRegion2 { rho0, rho1 } = *region;
    if rho1 < 0.5 {
        lambda1 < rho1 && lambda0 + lambda1 < region.sum_cap()
    } else {
        let split = (1.0 - rho0) * (2.0 * rho1 - 1.0);
        let low = lambda1 < split && 2.0 * lambda0 + lambda1 < 1.0 + rho0;
        let high = split <= lambda1 && lambda1 < rho1 && lambda0 + lambda1 < region.sum_cap();
        low || high
    }
}

/// Unit direction at `angle` radians from the `λ0` axis.
pub fn direction(angle: f64) -> (f64, f64) {
    let (s, c) = angle.sin_cos();
    // Snap the axes exactly so axis rays carry no spurious component.
    let snap = |v: f64| if v.abs() < 1e-12 { 0.0 } else { v };
    (snap(c), snap(s))
}

pub const BOUNDARY_TOLERANCE: f64 = 1e-6;

/// Point where the ray at `angle` leaves the region, by bisection on the
/// scale of the unit direction.
pub fn region_boundary(region: &RateRegion2, angle: f64) -> (f64, f64) {
    let (dx, dy) = direction(angle);
    let inside = |c: f64| region_contains(region, c * dx, c * dy);
    // No rate beyond 2 packets/slot is ever achievable here.
    let (mut lo, mut hi) = (0.0, 2.0);
    while hi - lo > BOUNDARY_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if inside(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let c = 0.5 * (lo + hi);
    (c * dx, c * dy)
}

/// Euclidean distance from `(λ0, λ1)` to the outer boundary curve, sampled
/// at `samples` angles. The axes are not part of the curve.
pub fn distance_to_boundary(region: &RateRegion2, lambda0: f64, lambda1: f64, samples: usize) -> f64 {
    boundary_polyline(region, samples)
        .windows(2)
        .map(|w| point_segment_distance((lambda0, lambda1), w[0], w[1]))
        .fold(f64::INFINITY, f64::min)
}

/// Boundary points for `samples` evenly spaced angles over `[0, π/2]`.
pub fn boundary_polyline(region: &RateRegion2, samples: usize) -> Vec<(f64, f64)> {
    let n = samples.max(2);
    (0..n)
        .map(|k| region_boundary(region, std::f64::consts::FRAC_PI_2 * k as f64 / (n - 1) as f64))
        .collect()
}

fn point_segment_distance(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (vx, vy) = (b.0 - a.0, b.1 - a.1);
    let len2 = vx * vx + vy * vy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((p.0 - a.0) * vx + (p.1 - a.1) * vy) / len2).clamp(0.0, 1.0)
    };
    let (cx, cy) = (a.0 + t * vx, a.1 + t * vy);
    ((p.0 - cx).powi(2) + (p.1 - cy).powi(2)).sqrt()
}

/// Hausdorff distance between two point sets.
pub fn hausdorff(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    let directed = |x: &[(f64, f64)], y: &[(f64, f64)]| {
        x.iter()
            .map(|p| {
                y.iter()
                    .map(|q| ((p.0 - q.0).powi(2) + (p.1 - q.1).powi(2)).sqrt())
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    };
    directed(a, b).max(directed(b, a))
}

/// Conditional mean services `(E μ0, E μ01, E μ1)` of the reduced
/// two-queue model, where the relay's forwarded packets share its queue.
pub fn expected_service_rates(q0: u64, q1: u64, rho0: f64, rho1: f64) -> (f64, f64, f64) {
    let ind = |b: bool| f64::from(u8::from(b));
    let diff = q0 as i128 - q1 as i128;
    let mu0 = rho0 * (1.0 - rho1) + rho0 * rho1 * ind(q0 >= q1);
    let mu01 = (1.0 - rho0) * (1.0 - rho1) * ind(diff > 0) + (1.0 - rho0) * rho1 * ind(diff > q1 as i128);
    let mu1 = (1.0 - rho0) * rho1 * ind(diff <= q1 as i128) + rho0 * rho1 * ind(q0 < q1);
    (mu0, mu01, mu1)
}
