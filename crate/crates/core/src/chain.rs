//! Exact computations on the full 2^n state space of the voter chain
//! (n <= 10): fundamental-matrix solves for expected consensus times,
//! absorption probabilities and exponential moments, occupation measures of
//! the transient states, and the stationary distribution of the extended
//! chain that restarts from the initial distribution after absorption.
//!
//! States are indexed by bitmask; masks 0 and 2^n - 1 are the consensus
//! states, all others are transient and indexed consecutively as mask - 1.

use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::{self, Mat};
use crate::model::InteractionMatrix;
use crate::simulate::{DynamicsKind, InitialDistribution, StateVector};
use crate::{Error, Result};

/// Largest n for the 2^n-state machinery.
pub const EXACT_CHAIN_LIMIT: usize = 10;

/// Dense transition structure of the absorbing voter chain.
pub struct ExactChain {
    n: usize,
    p: Mat,
}

impl ExactChain {
    pub fn new(a: &InteractionMatrix, kind: DynamicsKind) -> Result<Self> {
        let n = a.n();
        if n > EXACT_CHAIN_LIMIT {
            return Err(Error::TooLargeForExact {
                n,
                limit: EXACT_CHAIN_LIMIT,
            });
        }
        let states = 1usize << n;
        let mut p = Mat::zeros(states, states);
        match kind {
            DynamicsKind::Sync => {
                for x in 0..states as u64 {
                    let q: Vec<f64> = (0..n).map(|u| a.row_dot_mask(u, x)).collect();
                    // P(x -> y) = prod_u Ber(q_u) evaluated at y, with
                    // zero-probability pruning via depth-first expansion.
                    fn expand(u: usize, y: u64, prob: f64, q: &[f64], row: &mut [f64]) {
                        if prob == 0.0 {
                            return;
                        }
                        if u == q.len() {
                            row[y as usize] += prob;
                            return;
                        }
                        expand(u + 1, y | (1 << u), prob * q[u], q, row);
                        expand(u + 1, y, prob * (1.0 - q[u]), q, row);
                    }
                    expand(0, 0, 1.0, &q, p.row_mut(x as usize));
                }
            }
            DynamicsKind::Async => {
                let inv_n = 1.0 / n as f64;
                for x in 0..states as u64 {
                    for u in 0..n {
                        let q = a.row_dot_mask(u, x);
                        let on = x | (1 << u);
                        let off = x & !(1 << u);
                        p[(x as usize, on as usize)] += inv_n * q;
                        p[(x as usize, off as usize)] += inv_n * (1.0 - q);
                    }
                }
            }
            DynamicsKind::Noisy => {
                return Err(Error::Domain("noisy dynamics have no absorbing chain"));
            }
        }
        Ok(Self { n, p })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn state_count(&self) -> usize {
        1 << self.n
    }

    fn full_mask(&self) -> u64 {
        (1u64 << self.n) - 1
    }

    pub fn is_consensus_mask(&self, mask: u64) -> bool {
        mask == 0 || mask == self.full_mask()
    }

    pub fn transient_count(&self) -> usize {
        self.state_count() - 2
    }

    /// Transient masks are 1 ..= 2^n - 2; their index is mask - 1.
    fn t_index(mask: u64) -> usize {
        mask as usize - 1
    }

    pub fn transition(&self, from: u64, to: u64) -> f64 {
        self.p[(from as usize, to as usize)]
    }

    fn transient_submatrix(&self) -> Mat {
        let tn = self.transient_count();
        let mut t = Mat::zeros(tn, tn);
        for x in 1..=tn as u64 {
            for y in 1..=tn as u64 {
                t[(Self::t_index(x), Self::t_index(y))] = self.transition(x, y);
            }
        }
        t
    }

    /// E_x[tau] for every mask. Consensus starts have tau = 1 by the
    /// min{t >= 1} convention.
    pub fn expected_tau(&self) -> Result<Vec<f64>> {
        let tn = self.transient_count();
        let t = self.transient_submatrix();
        let mut sys = Mat::identity(tn);
        for i in 0..tn {
            for j in 0..tn {
                sys[(i, j)] -= t[(i, j)];
            }
        }
        let sol = linalg::solve(sys, vec![1.0; tn])?;
        let mut out = vec![1.0; self.state_count()];
        for mask in 1..=tn as u64 {
            out[mask as usize] = sol[Self::t_index(mask)];
        }
        Ok(out)
    }

    /// Probability of absorbing at all-ones from every mask.
    pub fn absorb_to_one(&self) -> Result<Vec<f64>> {
        let tn = self.transient_count();
        let t = self.transient_submatrix();
        let mut sys = Mat::identity(tn);
        for i in 0..tn {
            for j in 0..tn {
                sys[(i, j)] -= t[(i, j)];
            }
        }
        let full = self.full_mask();
        let rhs: Vec<f64> = (1..=tn as u64).map(|x| self.transition(x, full)).collect();
        let sol = linalg::solve(sys, rhs)?;
        let mut out = vec![0.0; self.state_count()];
        out[full as usize] = 1.0;
        for mask in 1..=tn as u64 {
            out[mask as usize] = sol[Self::t_index(mask)];
        }
        Ok(out)
    }

    /// E_x[lambda^{-tau}] for every mask, for 0 < lambda <= 1. Solves
    /// (lambda I - T) w = r with r the one-step absorption probabilities.
    /// Fails when lambda is not above the spectral radius of the transient
    /// block (the moment is infinite there).
    pub fn exponential_moment(&self, lambda: f64) -> Result<Vec<f64>> {
        if !(lambda > 0.0 && lambda <= 1.0) {
            return Err(Error::Domain("lambda must be in (0, 1]"));
        }
        let tn = self.transient_count();
        let t = self.transient_submatrix();
        let mut sys = Mat::zeros(tn, tn);
        for i in 0..tn {
            for j in 0..tn {
                sys[(i, j)] = if i == j { lambda } else { 0.0 } - t[(i, j)];
            }
        }
        let full = self.full_mask();
        let rhs: Vec<f64> = (1..=tn as u64)
            .map(|x| self.transition(x, 0) + self.transition(x, full))
            .collect();
        let sol = linalg::solve(sys, rhs)?;
        // lambda^{-tau} >= 1/lambda >= 1; values below that, or astronomically
        // large ones from a numerically singular system (lambda at or under
        // the spectral radius of T), mean the moment diverges.
        if sol
            .iter()
            .any(|&w| !(w >= 1.0 - 1e-9) || !w.is_finite() || w > 1e12)
        {
            return Err(Error::NonConvergence { residual: f64::NAN });
        }
        let mut out = vec![1.0 / lambda; self.state_count()];
        for mask in 1..=tn as u64 {
            out[mask as usize] = sol[Self::t_index(mask)];
        }
        Ok(out)
    }

    fn mu_vector(&self, mu: &InitialDistribution) -> Result<Vec<f64>> {
        mu.validate(self.n)?;
        Ok((0..self.state_count() as u64)
            .map(|mask| mu.prob_mass(&StateVector::from_mask(mask, self.n)))
            .collect())
    }

    /// Expected number of visits to each transient state before absorption,
    /// for a start drawn from `mu` (consensus starts contribute nothing).
    /// Indexed by mask, with zeros at the consensus masks.
    pub fn occupancy(&self, mu: &InitialDistribution) -> Result<Vec<f64>> {
        let tn = self.transient_count();
        let t = self.transient_submatrix();
        // (I - T)^T o = mu restricted to transients.
        let mut sys = Mat::identity(tn);
        for i in 0..tn {
            for j in 0..tn {
                sys[(i, j)] -= t[(j, i)];
            }
        }
        let muv = self.mu_vector(mu)?;
        let rhs: Vec<f64> = (1..=tn as u64).map(|x| muv[x as usize]).collect();
        let sol = linalg::solve(sys, rhs)?;
        let mut out = vec![0.0; self.state_count()];
        for mask in 1..=tn as u64 {
            out[mask as usize] = sol[Self::t_index(mask)];
        }
        Ok(out)
    }

    /// E[tau | X_0 transient] under `mu`; the total transient occupancy
    /// normalized by the transient start mass.
    pub fn e0_tau_transient(&self, mu: &InitialDistribution) -> Result<f64> {
        let occ = self.occupancy(mu)?;
        let total: f64 = occ.iter().sum();
        let transient_mass = 1.0 - mu.mass_consensus(self.n);
        if transient_mass <= 0.0 {
            return Err(Error::Domain("mu places no mass on transient states"));
        }
        Ok(total / transient_mass)
    }

    /// Stationary distribution of the extended chain: transient states step
    /// by the voter dynamics, consensus states restart from `mu`.
    pub fn extended_stationary(&self, mu: &InitialDistribution) -> Result<Vec<f64>> {
        let s = self.state_count();
        let muv = self.mu_vector(mu)?;
        // sigma^T P = sigma^T with sum(sigma) = 1:
        // rows of P at consensus masks are replaced by mu.
        let full = self.full_mask() as usize;
        let mut sys = Mat::zeros(s, s);
        for i in 0..s {
            for j in 0..s {
                let pij = if i == 0 || i == full {
                    muv[j]
                } else {
                    self.p[(i, j)]
                };
                sys[(j, i)] = pij - if i == j { 1.0 } else { 0.0 };
            }
        }
        for j in 0..s {
            sys[(s - 1, j)] = 1.0;
        }
        let mut b = vec![0.0; s];
        b[s - 1] = 1.0;
        let sigma = linalg::solve(sys, b)?;
        if sigma.iter().any(|&x| x < -1e-12) {
            return Err(Error::SingularSystem);
        }
        Ok(sigma.into_iter().map(|x| x.max(0.0)).collect())
    }
}
