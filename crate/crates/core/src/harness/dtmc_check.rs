use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::{
    build_dtmc, build_joint_chain, chain_states, check_detailed_balance, kolmogorov_closed_forms,
    kolmogorov_products, product_form, solve_stationary, JointChainParams,
};
use crate::error::Result;
use crate::model::ChannelStateVector;

pub const PRODUCT_FORM_TOLERANCE: f64 = 1e-8;
pub const BALANCE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductFormCheck {
    pub n_relays: usize,
    pub realizations: usize,
    pub chains: usize,
    pub max_sup_error: f64,
    pub max_balance_violation: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointChainCheck {
    pub p0_off: f64,
    pub p0_on: f64,
    pub clockwise: f64,
    pub counter_clockwise: f64,
    pub closed_form_error: f64,
    pub balance_violation: f64,
    pub reversible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DtmcReport {
    pub seed: u64,
    pub product_form: Vec<ProductFormCheck>,
    pub joint_chain: Vec<JointChainCheck>,
    pub pass: bool,
}

/// Compare solved chains against the closed form for every realization of an
/// `n_relays` network, with `draws` activation vectors and `alphas` decision
/// laws each.
pub fn check_product_form(n_relays: usize, draws: usize, alphas: usize, rng: &mut impl Rng) -> Result<ProductFormCheck> {
    let mut max_sup: f64 = 0.0;
    let mut max_bal: f64 = 0.0;
    let mut chains = 0;
    let realizations: Vec<ChannelStateVector> = ChannelStateVector::enumerate(n_relays + 1).collect();
    for channel in &realizations {
        let n_states = chain_states(channel).len();
        for _ in 0..draws {
            let p: Vec<f64> = (1..n_states).map(|_| rng.gen_range(0.05..0.95)).collect();
            let closed = product_form(&p)?;
            for _ in 0..alphas {
                let w: Vec<f64> = (0..n_states).map(|_| rng.gen_range(0.05..1.0)).collect();
                let total: f64 = w.iter().sum();
                let alpha: Vec<f64> = w.iter().map(|x| x / total).collect();
                let m = build_dtmc(channel, &p, &alpha)?;
                let pi = solve_stationary(&m)?;
                max_sup = max_sup.max(pi.sup_distance(&closed));
                max_bal = max_bal.max(check_detailed_balance(&m, &pi));
                chains += 1;
            }
        }
    }
    Ok(ProductFormCheck {
        n_relays,
        realizations: realizations.len(),
        chains,
        max_sup_error: max_sup,
        max_balance_violation: max_bal,
        pass: max_sup < PRODUCT_FORM_TOLERANCE && max_bal < BALANCE_TOLERANCE,
    })
}

pub fn check_joint_chain(jp: &JointChainParams) -> Result<JointChainCheck> {
    let m = build_joint_chain(jp)?;
    let (cw, ccw) = kolmogorov_products(&m);
    let (cw_f, ccw_f) = kolmogorov_closed_forms(jp);
    let pi = solve_stationary(&m)?;
    let violation = check_detailed_balance(&m, &pi);
    Ok(JointChainCheck {
        p0_off: jp.p0[0],
        p0_on: jp.p0[1],
        clockwise: cw,
        counter_clockwise: ccw,
        closed_form_error: (cw - cw_f).abs().max((ccw - ccw_f).abs()),
        balance_violation: violation,
        reversible: violation < BALANCE_TOLERANCE,
    })
}

/// Full report: product form for each network size, plus the joint chain
/// with distinct and with equal source activation probabilities.
pub fn dtmc_report(sizes: &[usize], draws: usize, alphas: usize, seed: u64) -> Result<DtmcReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let product_form = sizes
        .iter()
        .map(|&n| check_product_form(n, draws, alphas, &mut rng))
        .collect::<Result<Vec<_>>>()?;
    let base = JointChainParams {
        rho0: 0.4,
        p0: [0.3, 0.8],
        p1: 0.6,
        alpha0: 0.45,
        alpha1: 0.45,
    };
    let distinct = check_joint_chain(&base)?;
    let equal = check_joint_chain(&JointChainParams { p0: [0.55, 0.55], ..base })?;
    let pass = product_form.iter().all(|c| c.pass)
        && !distinct.reversible
        && distinct.clockwise != distinct.counter_clockwise
        && equal.reversible
        && (equal.clockwise - equal.counter_clockwise).abs() < 1e-15;
    Ok(DtmcReport {
        seed,
        product_form,
        joint_chain: vec![distinct, equal],
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_report_passes() {
        let r = dtmc_report(&[1, 2], 3, 2, 7).unwrap();
        assert!(r.pass);
        assert_eq!(r.product_form[0].realizations, 4);
        assert_eq!(r.product_form[1].chains, 8 * 3 * 2);
    }
}
