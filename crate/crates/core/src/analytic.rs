//! Closed-form critical rates, deterministic strategies and sequential-chain feasibility.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matops::{frobenius_inner, HermitianOperator};
use crate::quantum::{build_preparations, complementary_decomposition, ScenarioParams, INCONCLUSIVE};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalRates {
    pub q_crit_bob: f64,
    pub q_crit_charlie: f64,
}

impl CriticalRates {
    /// Whether some Bob rate certifies randomness for both parties.
    pub fn window_nonempty(&self) -> bool {
        self.q_crit_charlie <= self.q_crit_bob
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainFeasibility {
    pub n_parties: usize,
    pub x: f64,
    pub feasible: bool,
    pub rates: Option<Vec<f64>>,
}

/// How the per-party rate conditions of an `n`-party chain are combined.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChainCriterion {
    /// Every party at most `(1 + x²)/2`, the last at the minimal compatible rate.
    #[default]
    PassThrough,
    /// Intermediate rates saturate the recursive bound `½(1 + x²/Π Q_j²)` and
    /// the last rate must dominate all earlier ones.
    Recursive,
}

/// POVM `[M_0, M_1, M_∅]` of the deterministic strategy `lambda` with parameter `c`.
pub fn deterministic_strategy(params: &ScenarioParams, c: f64, lambda: usize) -> Result<[HermitianOperator; 3]> {
    if !(1.0..=2.0).contains(&c) {
        return Err(Error::InvalidParameter(format!("strategy parameter c = {c} outside [1, 2]")));
    }
    if lambda > 1 {
        return Err(Error::InvalidParameter(format!("strategy label {lambda} must be 0 or 1")));
    }
    let phi = if params.r > 0.0 {
        complementary_decomposition(params)?.phi
    } else {
        complementary_decomposition(&ScenarioParams { r: 1.0, delta: 0.0, ..*params })?.phi
    };
    let kept = &phi[lambda];
    let perp = [kept[1].conj(), -kept[0].conj()];
    let conclusive = HermitianOperator::ket_bra(&perp).scale(2.0 - c);
    let inconclusive = HermitianOperator::ket_bra(kept)
        .scale(2.0 - c)
        .add(&HermitianOperator::identity(2).scale(c - 1.0));
    let zero = HermitianOperator::zeros(2);
    Ok(if lambda == 0 {
        [zero, conclusive, inconclusive]
    } else {
        [conclusive, zero, inconclusive]
    })
}

/// Inconclusive rate of the deterministic strategy `lambda`, averaged over preparations.
pub fn deterministic_strategy_rate(params: &ScenarioParams, c: f64, lambda: usize) -> Result<f64> {
    let povm = deterministic_strategy(params, c, lambda)?;
    let ensemble = build_preparations(params)?;
    let mut rate = 0.0;
    for (x, &p) in ensemble.priors().iter().enumerate() {
        rate += p * frobenius_inner(ensemble.state(x), &povm[INCONCLUSIVE])?;
    }
    Ok(rate)
}

pub fn critical_rates(params: &ScenarioParams) -> CriticalRates {
    let x = params.x();
    let x2 = x * x;
    CriticalRates { q_crit_bob: (1.0 + x2) / 2.0, q_crit_charlie: 2.0 * x / (1.0 + x2) }
}

pub fn chain_feasible(n: usize, x: f64) -> Result<ChainFeasibility> {
    chain_feasible_with(n, x, ChainCriterion::default())
}

pub fn chain_feasible_with(n: usize, x: f64, criterion: ChainCriterion) -> Result<ChainFeasibility> {
    if !(2..=12).contains(&n) {
        return Err(Error::InvalidParameter(format!("chain length {n} outside [2, 12]")));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::InvalidParameter(format!("overlap product {x} outside [0, 1]")));
    }
    let rates = match criterion {
        ChainCriterion::PassThrough => {
            let bound = (1.0 + x * x) / 2.0;
            let mut rates = vec![bound; n - 1];
            rates.push(x / bound.powi(n as i32 - 1));
            let feasible = x <= bound.powi(n as i32);
            return Ok(ChainFeasibility { n_parties: n, x, feasible, rates: feasible.then_some(rates) });
        }
        ChainCriterion::Recursive => {
            let mut rates = Vec::with_capacity(n);
            let mut product = 1.0;
            for _ in 0..n - 1 {
                let q = (0.5 * (1.0 + x * x / (product * product))).min(1.0);
                rates.push(q);
                product *= q;
            }
            rates.push(x / product);
            rates
        }
    };
    let last = rates[n - 1];
    let feasible = last <= 1.0 && rates[..n - 1].iter().all(|&q| last >= q);
    Ok(ChainFeasibility { n_parties: n, x, feasible, rates: feasible.then_some(rates) })
}

pub fn delta_threshold(n: usize) -> Result<f64> {
    delta_threshold_with(n, ChainCriterion::default())
}

/// Largest feasible `x`, located by bisection to 1e-10.
pub fn delta_threshold_with(n: usize, criterion: ChainCriterion) -> Result<f64> {
    if criterion == ChainCriterion::Recursive {
        let mut lo = 0.0;
        let mut hi = 1.0;
        if chain_feasible_with(n, hi, criterion)?.feasible {
            return Ok(hi);
        }
        while hi - lo > 1e-10 {
            let mid = 0.5 * (lo + hi);
            if chain_feasible_with(n, mid, criterion)?.feasible {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        return Ok(lo);
    }
    // The pass-through criterion is feasible on [0, Δ] and again only at x = 1.
    let mut lo = 0.0;
    let mut hi = 0.5;
    if !chain_feasible_with(n, lo, criterion)?.feasible {
        return Ok(0.0);
    }
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if chain_feasible_with(n, mid, criterion)?.feasible {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}
