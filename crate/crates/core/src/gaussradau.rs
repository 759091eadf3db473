//! Gauss–Radau quadrature on [0, 1] with the node fixed at 1.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matops::sym_eigen;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadauQuadrature {
    pub m: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// `w_i / (t_i ln 2)` for every node, including the fixed one.
    pub tau: Vec<f64>,
    /// Sum of `tau` over the `m − 1` free nodes.
    pub c_m: f64,
}

impl RadauQuadrature {
    /// Free nodes paired with their weights and `tau`, excluding `t = 1`.
    pub fn interior(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        (0..self.m - 1).map(move |i| (self.nodes[i], self.weights[i], self.tau[i]))
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&t, &w)| w * f(t)).sum()
    }
}

/// Recurrence coefficients of the monic shifted Legendre polynomials on [0, 1].
fn legendre_beta(k: usize) -> f64 {
    let k = k as f64;
    k * k / (4.0 * (4.0 * k * k - 1.0))
}

pub fn radau_quadrature(m: usize) -> Result<RadauQuadrature> {
    if !(2..=64).contains(&m) {
        return Err(Error::InvalidParameter(format!("Radau node count {m} outside [2, 64]")));
    }
    // Monic recurrence evaluated at the fixed node.
    let mut p_prev = 0.0;
    let mut p = 1.0;
    for k in 0..m - 1 {
        let beta = if k == 0 { 0.0 } else { legendre_beta(k) };
        let next = (1.0 - 0.5) * p - beta * p_prev;
        p_prev = p;
        p = next;
    }
    let last_alpha = 1.0 - legendre_beta(m - 1) * p_prev / p;

    let mut jacobi = vec![0.0; m * m];
    for i in 0..m {
        jacobi[i * m + i] = 0.5;
        if i + 1 < m {
            let off = legendre_beta(i + 1).sqrt();
            jacobi[i * m + i + 1] = off;
            jacobi[(i + 1) * m + i] = off;
        }
    }
    jacobi[m * m - 1] = last_alpha;

    let (vals, vecs) = sym_eigen(m, &jacobi);
    let mut nodes = vals;
    nodes[m - 1] = 1.0;
    let mut weights: Vec<f64> = (0..m).map(|k| vecs[k] * vecs[k]).collect();
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    let ln2 = std::f64::consts::LN_2;
    let tau: Vec<f64> = nodes.iter().zip(&weights).map(|(&t, &w)| w / (t * ln2)).collect();
    let c_m = tau[..m - 1].iter().sum();
    Ok(RadauQuadrature { m, nodes, weights, tau, c_m })
}
