//! Per-realization schedule chains and their stationary laws.

use crate::error::{Error, Result};
use crate::model::{ChannelStateVector, Schedule};

/// Row-stochastic matrix over labelled states.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix<S = Schedule> {
    pub states: Vec<S>,
    pub probs: Vec<Vec<f64>>,
}

impl<S> TransitionMatrix<S> {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Largest deviation of a row sum from 1.
    pub fn row_defect(&self) -> f64 {
        self.probs
            .iter()
            .map(|row| (row.iter().sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StationaryDistribution {
    pub pi: Vec<f64>,
}

impl StationaryDistribution {
    /// Sup-norm distance to another distribution of the same length.
    pub fn sup_distance(&self, other: &StationaryDistribution) -> f64 {
        self.pi
            .iter()
            .zip(&other.pi)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// States of the chain for realization `channel`: Idle, node 0, ON relays.
pub fn chain_states(channel: &ChannelStateVector) -> Vec<Schedule> {
    let mut states = vec![Schedule::Idle, Schedule::Node(0)];
    states.extend((1..channel.len()).filter(|&i| channel.is_on(i)).map(Schedule::Node));
    states
}

fn check_probability(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::DegenerateProbability(p))
    }
}

/// Chain of the schedule memory for one realization, observed only in slots
/// where that realization occurs.
///
/// `activation_probs[k]` belongs to the `k`-th non-idle state and `alpha`
/// covers every state, Idle first.
pub fn build_dtmc(
    channel: &ChannelStateVector,
    activation_probs: &[f64],
    alpha: &[f64],
) -> Result<TransitionMatrix> {
    let states = chain_states(channel);
    let n = states.len();
    if activation_probs.len() != n - 1 || alpha.len() != n {
        return Err(Error::Dimension(format!(
            "{n} states need {} activation probabilities and {n} decision weights, got {} and {}",
            n - 1,
            activation_probs.len(),
            alpha.len()
        )));
    }
    for &p in activation_probs {
        check_probability(p)?;
    }
    if alpha[1..].iter().any(|&a| a <= 0.0) || alpha[0] < 0.0 {
        return Err(Error::InvalidParam {
            name: "alpha",
            reason: "decision distribution must give every node positive mass".into(),
        });
    }
    if (alpha.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParam {
            name: "alpha",
            reason: "decision distribution does not sum to 1".into(),
        });
    }

    let mut probs = vec![vec![0.0; n]; n];
    for y in 1..n {
        let (a, p) = (alpha[y], activation_probs[y - 1]);
        probs[0][y] = a * p;
        probs[y][0] = a * (1.0 - p);
        probs[y][y] = 1.0 - probs[y][0];
    }
    probs[0][0] = 1.0 - probs[0][1..].iter().sum::<f64>();
    Ok(TransitionMatrix { states, probs })
}

const DIRECT_SOLVE_LIMIT: usize = 64;
const POWER_ITERATION_CAP: usize = 1_000_000;

/// Fixed point of `πP = π`, normalized.
pub fn solve_stationary<S>(matrix: &TransitionMatrix<S>) -> Result<StationaryDistribution> {
    let n = matrix.len();
    if n == 0 || matrix.probs.iter().any(|r| r.len() != n) {
        return Err(Error::Dimension("transition matrix is not square".into()));
    }
    let pi = if n <= DIRECT_SOLVE_LIMIT {
        direct_solve(&matrix.probs)?
    } else {
        power_iteration(&matrix.probs)?
    };
    Ok(StationaryDistribution { pi })
}

/// Solve `(Pᵀ − I)π = 0` with the last equation replaced by `Σπ = 1`.
fn direct_solve(p: &[Vec<f64>]) -> Result<Vec<f64>> {
    let n = p.len();
    let mut a: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut row: Vec<f64> = (0..n).map(|j| p[j][i] - f64::from(u8::from(i == j))).collect();
            row.push(0.0);
            row
        })
        .collect();
    a[n - 1] = vec![1.0; n + 1];

    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
            .expect("non-empty range");
        if a[pivot][col].abs() < 1e-300 {
            return Err(Error::NoConvergence {
                iterations: 0,
                residual: f64::INFINITY,
            });
        }
        a.swap(col, pivot);
        for r in 0..n {
            if r != col {
                let factor = a[r][col] / a[col][col];
                if factor != 0.0 {
                    let pivot_row = a[col].clone();
                    for (x, p) in a[r][col..].iter_mut().zip(&pivot_row[col..]) {
                        *x -= factor * p;
                    }
                }
            }
        }
    }
    let mut pi: Vec<f64> = (0..n).map(|i| (a[i][n] / a[i][i]).max(0.0)).collect();
    let total: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|x| *x /= total);
    Ok(pi)
}

fn step(p: &[Vec<f64>], pi: &[f64]) -> Vec<f64> {
    let n = pi.len();
    let mut next = vec![0.0; n];
    for (i, row) in p.iter().enumerate() {
        for j in 0..n {
            next[j] += pi[i] * row[j];
        }
    }
    next
}

fn power_iteration(p: &[Vec<f64>]) -> Result<Vec<f64>> {
    let n = p.len();
    let mut pi = vec![1.0 / n as f64; n];
    let mut residual = f64::INFINITY;
    for _ in 0..POWER_ITERATION_CAP {
        // Lazy chain: same fixed point, no periodicity.
        let next: Vec<f64> = step(p, &pi).iter().zip(&pi).map(|(a, b)| 0.5 * (a + b)).collect();
        residual = next.iter().zip(&pi).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        pi = next;
        if residual < 1e-14 {
            let total: f64 = pi.iter().sum();
            return Ok(pi.into_iter().map(|x| x / total).collect());
        }
    }
    Err(Error::NoConvergence {
        iterations: POWER_ITERATION_CAP,
        residual,
    })
}

/// `‖πP − π‖∞`.
pub fn stationary_residual<S>(matrix: &TransitionMatrix<S>, pi: &StationaryDistribution) -> f64 {
    step(&matrix.probs, &pi.pi)
        .iter()
        .zip(&pi.pi)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

/// Closed-form law: Idle has weight 1, state `y` has weight `p_y / (1 − p_y)`.
pub fn product_form(activation_probs: &[f64]) -> Result<StationaryDistribution> {
    for &p in activation_probs {
        check_probability(p)?;
    }
    let odds: Vec<f64> = activation_probs.iter().map(|p| p / (1.0 - p)).collect();
    let z = 1.0 + odds.iter().sum::<f64>();
    let mut pi = Vec::with_capacity(odds.len() + 1);
    pi.push(1.0 / z);
    pi.extend(odds.iter().map(|o| o / z));
    Ok(StationaryDistribution { pi })
}

/// `max |π(a)P(a,b) − π(b)P(b,a)|` over state pairs.
pub fn check_detailed_balance<S>(matrix: &TransitionMatrix<S>, pi: &StationaryDistribution) -> f64 {
    let n = matrix.len();
    let mut worst = 0.0f64;
    for a in 0..n {
        for b in (a + 1)..n {
            let flow = pi.pi[a] * matrix.probs[a][b] - pi.pi[b] * matrix.probs[b][a];
            worst = worst.max(flow.abs());
        }
    }
    worst
}

/// Product of transition probabilities along a closed cycle of state indices.
pub fn cycle_product<S>(matrix: &TransitionMatrix<S>, cycle: &[usize]) -> f64 {
    cycle
        .iter()
        .zip(cycle.iter().cycle().skip(1))
        .map(|(&a, &b)| matrix.probs[a][b])
        .product()
}

/// State of the joint chain over the previous schedule and the source's
/// channel bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct JointState {
    pub x: Schedule,
    pub s0: bool,
}

/// Inputs of the one-relay joint chain. The relay's link is always ON.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointChainParams {
    pub rho0: f64,
    /// Node 0's activation probability when its link is OFF / ON.
    pub p0: [f64; 2],
    pub p1: f64,
    pub alpha0: f64,
    pub alpha1: f64,
}

/// Chain over `(x; s_0)` when carrier sense uses the previous slot regardless
/// of the channel. From `(x; s)` the next bit `s'` is drawn first, then the
/// schedule moves with the kernel of realization `s'`.
pub fn build_joint_chain(jp: &JointChainParams) -> Result<TransitionMatrix<JointState>> {
    for p in [jp.p0[0], jp.p0[1], jp.p1] {
        check_probability(p)?;
    }
    let kernel = |s: usize| -> Result<TransitionMatrix> {
        let bits = [u8::from(s == 1), 1];
        build_dtmc(
            &ChannelStateVector::from_bits(&bits),
            &[jp.p0[s], jp.p1],
            &[1.0 - jp.alpha0 - jp.alpha1, jp.alpha0, jp.alpha1],
        )
    };
    let kernels = [kernel(0)?, kernel(1)?];
    let schedules = [Schedule::Idle, Schedule::Node(0), Schedule::Node(1)];
    let states: Vec<JointState> = [false, true]
        .iter()
        .flat_map(|&s0| schedules.iter().map(move |&x| JointState { x, s0 }))
        .collect();
    let pr = |s: bool| if s { jp.rho0 } else { 1.0 - jp.rho0 };
    let probs = states
        .iter()
        .map(|from| {
            let xi = schedules.iter().position(|&x| x == from.x).expect("known schedule");
            states
                .iter()
                .map(|to| {
                    let xj = schedules.iter().position(|&x| x == to.x).expect("known schedule");
                    pr(to.s0) * kernels[usize::from(to.s0)].probs[xi][xj]
                })
                .collect()
        })
        .collect();
    Ok(TransitionMatrix { states, probs })
}

/// Index of `(x; s0)` in [`build_joint_chain`]'s state order.
pub fn joint_index(x: Schedule, s0: bool) -> usize {
    let xi = match x {
        Schedule::Idle => 0,
        Schedule::Node(0) => 1,
        _ => 2,
    };
    3 * usize::from(s0) + xi
}

/// The two cycle products through `(0;0)`, `(I;0)` and `(I;1)`: clockwise
/// and counter-clockwise.
pub fn kolmogorov_products(matrix: &TransitionMatrix<JointState>) -> (f64, f64) {
    let a = joint_index(Schedule::Node(0), false);
    let b = joint_index(Schedule::Idle, false);
    let c = joint_index(Schedule::Idle, true);
    (cycle_product(matrix, &[a, b, c]), cycle_product(matrix, &[a, c, b]))
}

/// Closed forms of the two cycle products.
///
/// The first is `ρ0(1−ρ0)²α0² p0⁰(1−p0⁰) K_1(I,I)`. The second follows from
/// the chain's own transition rule, `ρ0(1−ρ0)²α0² p0⁰(1−p0¹) K_0(I,I)`.
pub fn kolmogorov_closed_forms(jp: &JointChainParams) -> (f64, f64) {
    let k_idle = |s: usize| 1.0 - jp.alpha0 * jp.p0[s] - jp.alpha1 * jp.p1;
    let common = jp.rho0 * (1.0 - jp.rho0).powi(2) * jp.alpha0.powi(2) * jp.p0[0];
    (
        common * (1.0 - jp.p0[0]) * k_idle(1),
        common * (1.0 - jp.p0[1]) * k_idle(0),
    )
}
