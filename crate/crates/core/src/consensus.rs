//! Consensus-time bounds and exact small-instance computations: the
//! expected-time, moment, and tail bounds driven by the partition
//! functional, fundamental-matrix values on the 2^n chain, the drift
//! identity linking expected consensus time to stationary variances, and
//! empirical summaries of simulated consensus times.

use alloc::vec::Vec;

use crate::chain::ExactChain;
use crate::math;
use crate::model::{InteractionMatrix, StationaryDistribution};
use crate::simulate::{DynamicsKind, ExtendedTrace, InitialDistribution, StateVector};
use crate::{Error, Result};

// ---------------------------------------------------------------------------
// Bound report
// ---------------------------------------------------------------------------

/// The consensus-time bounds implied by (phi_A, pi*) for m independent
/// cycles.
#[derive(Clone, Debug)]
pub struct BoundReport {
    pub phi_a: f64,
    pub pi_star: f64,
    /// theta* = -log(1 - phi_A), the largest exponent with a finite
    /// exponential-moment bound.
    pub theta_star: f64,
    /// E0[V_pi(X_0)] / min_{z not in C} V_pi(z).
    pub mu_prefactor: f64,
    /// (1/phi_A) log(1/(2 pi*)).
    pub etau_bound: f64,
    /// k -> (1/2)(k/e)^k phi_A^{-k} / pi*, with 0^0 = 1.
    pub moment_bounds: Vec<(u32, f64)>,
    pub m: u64,
    pub delta: f64,
    /// Conservative ceiling of (1/phi_A)(log(1/(2 pi*)) + log(1/delta)/m).
    pub sum_quantile: f64,
    /// Summary of simulated consensus times, when available.
    pub empirical: Option<TauSummary>,
}

impl BoundReport {
    /// Tail bound for the average of m consensus times exceeding `a`,
    /// clamped to a probability.
    pub fn tail_bound(&self, a: f64) -> f64 {
        let per = self.mu_prefactor * math::powf(1.0 - self.phi_a, a);
        math::powf(per, self.m as f64).min(1.0)
    }
}

/// Evaluates all closed-form bounds.
pub fn bound_report(
    phi_a: f64,
    pi_star: f64,
    mu_prefactor: f64,
    m: u64,
    delta: f64,
    k_list: &[u32],
) -> Result<BoundReport> {
    if !(phi_a > 0.0 && phi_a < 1.0) {
        return Err(Error::Domain("phi_A must be in (0, 1)"));
    }
    if !(pi_star > 0.0 && pi_star <= 0.5) {
        return Err(Error::Domain("pi* must be in (0, 1/2]"));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::Domain("delta must be in (0, 1]"));
    }
    if !(mu_prefactor > 0.0) {
        return Err(Error::Domain("prefactor must be positive"));
    }
    if m == 0 {
        return Err(Error::Domain("m must be >= 1"));
    }
    let log_inv_2pi = math::ln(1.0 / (2.0 * pi_star));
    let etau_bound = log_inv_2pi / phi_a;
    let moment_bounds = k_list
        .iter()
        .map(|&k| {
            let kk = if k == 0 {
                1.0
            } else {
                math::powi(k as f64 / core::f64::consts::E, k)
            };
            (k, 0.5 * kk / (math::powi(phi_a, k) * pi_star))
        })
        .collect();
    let sum_quantile = math::ceil((log_inv_2pi + math::ln(1.0 / delta) / m as f64) / phi_a);
    Ok(BoundReport {
        phi_a,
        pi_star,
        theta_star: -math::ln(1.0 - phi_a),
        mu_prefactor,
        etau_bound,
        moment_bounds,
        m,
        delta,
        sum_quantile,
        empirical: None,
    })
}

/// E0[V_pi(X_0)] / min_{z not in C} V_pi(z) in closed form for the supported
/// initial distributions. The minimum over transient states of V_pi is
/// pi*(1 - pi*), attained at the most extreme singleton.
pub fn mu_prefactor(pi: &StationaryDistribution, mu: &InitialDistribution) -> Result<f64> {
    let n = pi.n();
    mu.validate(n)?;
    let e0_v = match mu {
        InitialDistribution::ProductBernoulli { p } => p * (1.0 - p) * (1.0 - pi.norm_sq()),
        InitialDistribution::ProductBernoulliTransient { p } => {
            let base = InitialDistribution::ProductBernoulli { p: *p };
            p * (1.0 - p) * (1.0 - pi.norm_sq()) / (1.0 - base.mass_consensus(n))
        }
        InitialDistribution::Fixed(x) => {
            if x.is_consensus() {
                return Err(Error::Domain("fixed consensus start has zero variance"));
            }
            pi.v_pi(x)
        }
        InitialDistribution::UniformTransients => {
            let states = math::powi(2.0, n as u32);
            (1.0 - pi.norm_sq()) / 4.0 * states / (states - 2.0)
        }
    };
    Ok(e0_v / pi.min_transient_v_pi())
}

/// Start-independent fallback: V_pi <= 1/4 and min V_pi >= pi*/2.
pub fn mu_prefactor_fallback(pi_star: f64) -> f64 {
    1.0 / (2.0 * pi_star)
}

// ---------------------------------------------------------------------------
// Exact expected consensus time
// ---------------------------------------------------------------------------

/// Start specification for exact computations.
pub enum StartSpec<'a> {
    State(&'a StateVector),
    Mu(&'a InitialDistribution),
}

#[derive(Clone, Copy, Debug)]
pub struct ExactTau {
    pub expected: f64,
    pub absorb_to_one: f64,
}

/// Exact E[tau] and absorption probability from the fundamental matrix of
/// the 2^n chain (n <= 10).
pub fn exact_expected_tau(
    a: &InteractionMatrix,
    kind: DynamicsKind,
    start: StartSpec<'_>,
) -> Result<ExactTau> {
    let chain = ExactChain::new(a, kind)?;
    let tau = chain.expected_tau()?;
    let one = chain.absorb_to_one()?;
    match start {
        StartSpec::State(x) => {
            if x.len() != a.n() {
                return Err(Error::DimensionMismatch {
                    expected: a.n(),
                    got: x.len(),
                });
            }
            let mask = x.to_mask() as usize;
            Ok(ExactTau {
                expected: tau[mask],
                absorb_to_one: one[mask],
            })
        }
        StartSpec::Mu(mu) => {
            mu.validate(a.n())?;
            let mut e = 0.0;
            let mut b = 0.0;
            for mask in 0..chain.state_count() as u64 {
                let w = mu.prob_mass(&StateVector::from_mask(mask, a.n()));
                if w > 0.0 {
                    e += w * tau[mask as usize];
                    b += w * one[mask as usize];
                }
            }
            Ok(ExactTau {
                expected: e,
                absorb_to_one: b,
            })
        }
    }
}

// ---------------------------------------------------------------------------
// Drift identity
// ---------------------------------------------------------------------------

/// Evidence source for the drift-identity check.
pub enum DriftEvidence<'a> {
    /// Exact occupation measure of the 2^n chain (n <= 10).
    Exact,
    /// Monte Carlo over the cycles of a trace (>= 100 cycles).
    Trace(&'a ExtendedTrace),
}

#[derive(Clone, Copy, Debug)]
pub struct DriftResidual {
    /// sum_u pi_u^2 E0[sum_{t<tau} V_{a_u}(X_t)]
    pub lhs: f64,
    /// E0[V_pi(X_0)]
    pub rhs: f64,
    pub absolute: f64,
    pub relative: f64,
}

/// Checks the identity tying the expected consensus time to stationary
/// variances: sum_u pi_u^2 E0[sum_{t<tau} V_{a_u}(X_t)] = E0[V_pi(X_0)],
/// which is the (E0[tau]+1)-weighted stationary form. Requires mu(C) = 0.
pub fn drift_identity_check(
    a: &InteractionMatrix,
    pi: &StationaryDistribution,
    mu: &InitialDistribution,
    evidence: DriftEvidence<'_>,
) -> Result<DriftResidual> {
    let n = a.n();
    mu.validate(n)?;
    if mu.mass_consensus(n) > 0.0 {
        return Err(Error::Domain("drift identity assumes mu(C) = 0"));
    }
    let (lhs, rhs) = match evidence {
        DriftEvidence::Exact => {
            let chain = ExactChain::new(a, DynamicsKind::Sync)?;
            let occ = chain.occupancy(mu)?;
            let mut lhs = 0.0;
            for (mask, &o) in occ.iter().enumerate() {
                if o == 0.0 {
                    continue;
                }
                let mut inner = 0.0;
                for u in 0..n {
                    let q = a.row_dot_mask(u, mask as u64);
                    inner += pi.pi()[u] * pi.pi()[u] * q * (1.0 - q);
                }
                lhs += o * inner;
            }
            let mut rhs = 0.0;
            for mask in 1..(chain.state_count() as u64 - 1) {
                let w = mu.prob_mass(&StateVector::from_mask(mask, n));
                if w > 0.0 {
                    rhs += w * pi.v_pi_mask(mask);
                }
            }
            (lhs, rhs)
        }
        DriftEvidence::Trace(trace) => {
            if trace.len() < 100 {
                return Err(Error::InsufficientData("drift check needs >= 100 cycles"));
            }
            let m = trace.len() as f64;
            let mut lhs = 0.0;
            let mut rhs = 0.0;
            for cycle in trace.cycles() {
                rhs += pi.v_pi(cycle.initial());
                for x in cycle.window(false) {
                    let mut inner = 0.0;
                    for u in 0..n {
                        let q = a.row_dot(u, x);
                        inner += pi.pi()[u] * pi.pi()[u] * q * (1.0 - q);
                    }
                    lhs += inner;
                }
            }
            (lhs / m, rhs / m)
        }
    };
    let absolute = math::abs(lhs - rhs);
    Ok(DriftResidual {
        lhs,
        rhs,
        absolute,
        relative: absolute / math::abs(rhs).max(1e-300),
    })
}

// ---------------------------------------------------------------------------
// Empirical summaries
// ---------------------------------------------------------------------------

/// Summary statistics of the consensus times of a trace.
#[derive(Clone, Debug)]
pub struct TauSummary {
    pub cycles: usize,
    pub mean: f64,
    /// Unbiased sample variance (0 for a single cycle).
    pub variance: f64,
    pub min: u64,
    pub max: u64,
    pub sum: u64,
    pub absorbed_one_fraction: f64,
    sorted: Vec<u64>,
}

impl TauSummary {
    /// Smallest consensus time t with empirical CDF >= q.
    pub fn quantile(&self, q: f64) -> u64 {
        let n = self.sorted.len();
        let rank = (math::ceil(q * n as f64) as usize).clamp(1, n);
        self.sorted[rank - 1]
    }

    /// Empirical k-th moment of tau.
    pub fn moment(&self, k: u32) -> f64 {
        self.sorted
            .iter()
            .map(|&t| math::powi(t as f64, k))
            .sum::<f64>()
            / self.sorted.len() as f64
    }
}

pub fn empirical_tau_stats(trace: &ExtendedTrace) -> Result<TauSummary> {
    if trace.is_empty() {
        return Err(Error::InsufficientData("trace has no cycles"));
    }
    let mut sorted: Vec<u64> = trace.cycles().iter().map(|c| c.tau() as u64).collect();
    sorted.sort_unstable();
    let n = sorted.len();
    let sum: u64 = sorted.iter().sum();
    let mean = sum as f64 / n as f64;
    let variance = if n > 1 {
        sorted
            .iter()
            .map(|&t| (t as f64 - mean) * (t as f64 - mean))
            .sum::<f64>()
            / (n as f64 - 1.0)
    } else {
        0.0
    };
    let absorbed_one_fraction = trace
        .cycles()
        .iter()
        .filter(|c| c.absorbed_to_one())
        .count() as f64
        / n as f64;
    Ok(TauSummary {
        cycles: n,
        mean,
        variance,
        min: sorted[0],
        max: sorted[n - 1],
        sum,
        absorbed_one_fraction,
        sorted,
    })
}

// ---------------------------------------------------------------------------
