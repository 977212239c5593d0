//! Stationary correlation matrices of the extended process, the Lyapunov
//! matrix equation they satisfy, spectral localization of the residual
//! matrix Q, and the fixed-point solve for the linear noisy dynamics.
//!
//! Two window conventions exist: the stationary law of the extended chain
//! includes each cycle's final consensus state; dropping those states gives
//! the exclude-final law used by the inference theory. Both are implemented
//! and every report records which one it used.

use alloc::vec;
use alloc::vec::Vec;

use crate::chain::ExactChain;
use crate::linalg::{self, Mat};
use crate::math;
use crate::model::{InteractionMatrix, StationaryDistribution};
use crate::simulate::{DynamicsKind, ExtendedTrace, InitialDistribution, StateVector};
use crate::{Error, Result};

// ---------------------------------------------------------------------------
// Correlation matrices
// ---------------------------------------------------------------------------

/// A stationary correlation matrix with its spectrum.
#[derive(Clone, Debug)]
pub struct CorrelationAnalysis {
    pub m: Mat,
    pub include_final: bool,
    /// Ascending eigenvalues.
    pub eigenvalues: Vec<f64>,
    pub lambda_min: f64,
    /// Number of cycles behind a Monte Carlo estimate (None when exact).
    pub cycles: Option<usize>,
}

fn analyze(m: Mat, include_final: bool, cycles: Option<usize>) -> Result<CorrelationAnalysis> {
    if m.symmetry_defect() > 1e-10 {
        return Err(Error::Domain("correlation matrix lost symmetry"));
    }
    let eig = linalg::sym_eigen(&m)?;
    let lambda_min = eig.values[0];
    Ok(CorrelationAnalysis {
        m,
        include_final,
        eigenvalues: eig.values,
        lambda_min,
        cycles,
    })
}

/// Palm estimate of the stationary correlation matrix from a trace, using
/// the trace's own window convention.
pub fn palm_correlation(trace: &ExtendedTrace) -> Result<CorrelationAnalysis> {
    palm_correlation_window(trace, trace.include_final())
}

/// Palm estimate with an explicit window convention: the average of
/// X_t X_t^T over all cycle windows.
pub fn palm_correlation_window(
    trace: &ExtendedTrace,
    include_final: bool,
) -> Result<CorrelationAnalysis> {
    if trace.len() < 100 {
        return Err(Error::InsufficientData("palm estimate needs >= 100 cycles"));
    }
    let n = trace.n();
    let mut m = Mat::zeros(n, n);
    let mut steps = 0u64;
    for cycle in trace.cycles() {
        for x in cycle.window(include_final) {
            steps += 1;
            let ones: Vec<usize> = x.ones().collect();
            for &i in &ones {
                for &j in &ones {
                    m[(i, j)] += 1.0;
                }
            }
        }
    }
    if steps == 0 {
        return Err(Error::InsufficientData("trace windows are empty"));
    }
    analyze(
        m.scale(1.0 / steps as f64),
        include_final,
        Some(trace.len()),
    )
}

/// Exact stationary correlation matrix from the 2^n chain (n <= 10). The
/// exclude-final convention requires mu(C) = 0.
pub fn exact_correlation(
    a: &InteractionMatrix,
    mu: &InitialDistribution,
    include_final: bool,
) -> Result<CorrelationAnalysis> {
    let n = a.n();
    let chain = ExactChain::new(a, DynamicsKind::Sync)?;
    let weights = if include_final {
        chain.extended_stationary(mu)?
    } else {
        if mu.mass_consensus(n) > 0.0 {
            return Err(Error::Domain(
                "exclude-final correlation assumes mu(C) = 0; condition the start distribution",
            ));
        }
        let occ = chain.occupancy(mu)?;
        let total: f64 = occ.iter().sum();
        occ.into_iter().map(|o| o / total).collect()
    };
    let mut m = Mat::zeros(n, n);
    for (mask, &w) in weights.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let mask = mask as u64;
        for i in 0..n {
            if (mask >> i) & 1 == 0 {
                continue;
            }
            for j in 0..n {
                if (mask >> j) & 1 == 1 {
                    m[(i, j)] += w;
                }
            }
        }
    }
    analyze(m, include_final, None)
}

/// E0[X_0 X_0^T] under mu itself (the start-distribution moment matrix).
pub fn mu_moment_matrix(mu: &InitialDistribution, n: usize) -> Result<Mat> {
    mu.validate(n)?;
    match mu {
        InitialDistribution::ProductBernoulli { p } => {
            let mut m = Mat::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    m[(i, j)] = if i == j { *p } else { p * p };
                }
            }
            Ok(m)
        }
        InitialDistribution::Fixed(x) => {
            let mut m = Mat::zeros(n, n);
            let ones: Vec<usize> = x.ones().collect();
            for &i in &ones {
                for &j in &ones {
                    m[(i, j)] = 1.0;
                }
            }
            Ok(m)
        }
        _ => {
            if n > crate::chain::EXACT_CHAIN_LIMIT {
                return Err(Error::TooLargeForExact {
                    n,
                    limit: crate::chain::EXACT_CHAIN_LIMIT,
                });
            }
            let mut m = Mat::zeros(n, n);
            for mask in 0..(1u64 << n) {
                let w = mu.prob_mass(&StateVector::from_mask(mask, n));
                if w == 0.0 {
                    continue;
                }
                for i in 0..n {
                    if (mask >> i) & 1 == 0 {
                        continue;
                    }
                    for j in 0..n {
                        if (mask >> j) & 1 == 1 {
                            m[(i, j)] += w;
                        }
                    }
                }
            }
            Ok(m)
        }
    }
}

// ---------------------------------------------------------------------------
// Chain moments and the Q matrix
// ---------------------------------------------------------------------------

/// The chain moments entering the Lyapunov residual matrix.
#[derive(Clone, Debug)]
pub struct ChainMoments {
    /// E[tau | transient start].
    pub e0_tau_transient: f64,
    /// Include-final stationary E[V_{a_u}(X_0)] per vertex.
    pub e_v_au_include: Vec<f64>,
    /// E0[X_0 X_0^T] under mu.
    pub e0_x0x0: Mat,
    /// E0[X_0 | X_0 transient].
    pub e0_x0_transient: Vec<f64>,
    pub mu_c0: f64,
    pub mu_c1: f64,
}

impl ChainMoments {
    /// Exact moments from the 2^n chain (n <= 10).
    pub fn exact(a: &InteractionMatrix, mu: &InitialDistribution) -> Result<Self> {
        let n = a.n();
        let chain = ExactChain::new(a, DynamicsKind::Sync)?;
        let sigma = chain.extended_stationary(mu)?;
        let mut e_v = vec![0.0; n];
        for (mask, &w) in sigma.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            for (u, ev) in e_v.iter_mut().enumerate() {
                let q = a.row_dot_mask(u, mask as u64);
                *ev += w * q * (1.0 - q);
            }
        }
        let e0_x0x0 = mu_moment_matrix(mu, n)?;
        let transient_mass = 1.0 - mu.mass_consensus(n);
        let mut e0_x0_tr = vec![0.0; n];
        for mask in 1..((1u64 << n) - 1) {
            let w = mu.prob_mass(&StateVector::from_mask(mask, n));
            if w == 0.0 {
                continue;
            }
            for (u, e) in e0_x0_tr.iter_mut().enumerate() {
                if (mask >> u) & 1 == 1 {
                    *e += w;
                }
            }
        }
        for e in e0_x0_tr.iter_mut() {
            *e /= transient_mass;
        }
        Ok(Self {
            e0_tau_transient: chain.e0_tau_transient(mu)?,
            e_v_au_include: e_v,
            e0_x0x0,
            e0_x0_transient: e0_x0_tr,
            mu_c0: mu.mass_consensus_zero(n),
            mu_c1: mu.mass_consensus_one(n),
        })
    }

    /// Moments estimated from a simulated trace (the mu masses come from the
    /// distribution itself).
    pub fn from_trace(
        a: &InteractionMatrix,
        trace: &ExtendedTrace,
        mu: &InitialDistribution,
    ) -> Result<Self> {
        if trace.len() < 100 {
            return Err(Error::InsufficientData("chain moments need >= 100 cycles"));
        }
        let n = a.n();
        mu.validate(n)?;
        let mut e_v = vec![0.0; n];
        let mut steps = 0u64;
        let mut e0_x0x0 = Mat::zeros(n, n);
        let mut e0_x0_tr = vec![0.0; n];
        let mut transient_cycles = 0usize;
        let mut tau_sum = 0u64;
        for cycle in trace.cycles() {
            for x in cycle.window(true) {
                steps += 1;
                for (u, ev) in e_v.iter_mut().enumerate() {
                    let q = a.row_dot(u, x);
                    *ev += q * (1.0 - q);
                }
            }
            let x0 = cycle.initial();
            let ones: Vec<usize> = x0.ones().collect();
            for &i in &ones {
                for &j in &ones {
                    e0_x0x0[(i, j)] += 1.0;
                }
            }
            if !x0.is_consensus() {
                transient_cycles += 1;
                tau_sum += cycle.tau() as u64;
                for &i in &ones {
                    e0_x0_tr[i] += 1.0;
                }
            }
        }
        if transient_cycles == 0 {
            return Err(Error::InsufficientData(
                "no transient-start cycles in trace",
            ));
        }
        for ev in e_v.iter_mut() {
            *ev /= steps as f64;
        }
        for e in e0_x0_tr.iter_mut() {
            *e /= transient_cycles as f64;
        }
        Ok(Self {
            e0_tau_transient: tau_sum as f64 / transient_cycles as f64,
            e_v_au_include: e_v,
            e0_x0x0: e0_x0x0.scale(1.0 / trace.len() as f64),
            e0_x0_transient: e0_x0_tr,
            mu_c0: mu.mass_consensus_zero(n),
            mu_c1: mu.mass_consensus_one(n),
        })
    }
}

/// The residual matrix Q of the include-final Lyapunov equation
/// M = A M A^T + Q, with its spectrum.
#[derive(Clone, Debug)]
pub struct QMatrixReport {
    pub q: Mat,
    /// Off-diagonal constant for product-Bernoulli starts.
    pub alpha: Option<f64>,
    /// max |(Q pi)_u|; pi is an eigenvector of Q with eigenvalue 0.
    pub qpi_residual: f64,
    pub eigenvalues: Vec<f64>,
    /// Second smallest eigenvalue (the smallest positive one).
    pub lambda2: f64,
    /// min_u E[V_{a_u}(X_0)] + alpha, for product-Bernoulli starts.
    pub lambda2_lower_bound: Option<f64>,
    pub bound_holds: Option<bool>,
}

/// Builds Q from the chain moments:
/// Q = diag(E[V_{a_u}(X_0)]) +
///     (E0[X_0 X_0^T] - (mu(C_1) + (1 - mu(C)) pi^T E0[X_0 | transient]) J)
///     / ((1 - mu(C)) E0[tau] + 1).
pub fn q_matrix(
    a: &InteractionMatrix,
    pi: &StationaryDistribution,
    mu: &InitialDistribution,
    moments: &ChainMoments,
) -> Result<QMatrixReport> {
    let n = a.n();
    let mu_c = moments.mu_c0 + moments.mu_c1;
    let denom = (1.0 - mu_c) * moments.e0_tau_transient + 1.0;
    let pi_x0: f64 = pi
        .pi()
        .iter()
        .zip(&moments.e0_x0_transient)
        .map(|(p, x)| p * x)
        .sum();
    let shift = moments.mu_c1 + (1.0 - mu_c) * pi_x0;
    let mut q = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            q[(i, j)] = (moments.e0_x0x0[(i, j)] - shift) / denom;
        }
        q[(i, i)] += moments.e_v_au_include[i];
    }

    let alpha = match mu {
        InitialDistribution::ProductBernoulli { p } => Some(p * (1.0 - p) / denom),
        _ => None,
    };
    let qpi = q.mat_vec(pi.pi());
    let qpi_residual = qpi.iter().fold(0.0f64, |m, &x| m.max(math::abs(x)));
    let eig = linalg::sym_eigen(&q)?;
    let lambda2 = eig.values[1];
    let lambda2_lower_bound = alpha.map(|al| {
        moments
            .e_v_au_include
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
            + al
    });
    let bound_holds = lambda2_lower_bound.map(|b| {
        // Every nonzero eigenvalue sits at or above the bound.
        eig.values
            .iter()
            .filter(|&&v| math::abs(v) > 1e-9)
            .all(|&v| v >= b - 1e-9)
    });
    Ok(QMatrixReport {
        q,
        alpha,
        qpi_residual,
        eigenvalues: eig.values,
        lambda2,
        lambda2_lower_bound,
        bound_holds,
    })
}

/// Relative Frobenius residual of M = A M A^T + Q.
pub fn lyapunov_check(m: &Mat, a: &InteractionMatrix, q: &Mat) -> f64 {
    let am = a.to_mat().matmul(m);
    let amat = am.matmul(&a.to_mat().transpose());
    let resid = m.sub(&amat).sub(q);
    resid.frob_norm() / m.frob_norm().max(1e-300)
}

// ---------------------------------------------------------------------------
// Noisy fixed point
// ---------------------------------------------------------------------------

/// Fixed point of the noisy-model Lyapunov map.
#[derive(Clone, Debug)]
pub struct NoisyFixedPoint {
    pub m: Mat,
    /// Stationary mean state, (I - (1-2e)A)^{-1} e 1; equals 1/2 per vertex.
    pub mean_state: Vec<f64>,
    pub iterations: u32,
    /// Last observed contraction ratio; approaches (1-2e)^2.
    pub observed_rate: f64,
    pub lambda_min: f64,
}

/// Iterates M <- A^e M A^e^T + Q^e(M) to its fixed point, where
/// A^e = (1-2e)A and Q^e carries the stationary per-vertex update variances
/// plus the noise terms. The iteration contracts geometrically at rate
/// (1-2e)^2. Diagonal entries of the fixed point are exactly 1/2.
pub fn lyapunov_solve_noisy(a: &InteractionMatrix, epsilon: f64) -> Result<NoisyFixedPoint> {
    if !(epsilon > 0.0 && epsilon <= 0.5) {
        return Err(Error::Domain("noise level must be in (0, 1/2]"));
    }
    let n = a.n();
    let a_eps = a.to_mat().scale(1.0 - 2.0 * epsilon);
    let a_eps_t = a_eps.transpose();
    let off = epsilon * (1.0 - epsilon);

    let mut m = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = if i == j { 0.5 } else { 0.25 };
        }
    }
    let mut prev_diff = f64::INFINITY;
    let mut rate = 0.0;
    let mut iterations = 0u32;
    loop {
        iterations += 1;
        if iterations > 1_000_000 {
            return Err(Error::NonConvergence {
                residual: prev_diff,
            });
        }
        let w = a_eps.matmul(&m).matmul(&a_eps_t);
        let mut next = Mat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                next[(i, j)] = if i == j { 0.5 } else { w[(i, j)] + off };
            }
        }
        let diff = next.sub(&m).frob_norm();
        if prev_diff.is_finite() && prev_diff > 0.0 {
            rate = diff / prev_diff;
        }
        m = next;
        if diff <= 1e-12 * m.frob_norm().max(1.0) {
            break;
        }
        prev_diff = diff;
    }

    // Stationary mean: (I - A^e) mean = e 1.
    let mut sys = Mat::identity(n);
    for i in 0..n {
        for j in 0..n {
            sys[(i, j)] -= a_eps[(i, j)];
        }
    }
    let mean_state = linalg::solve(sys, vec![epsilon; n])?;

    let eig = linalg::sym_eigen(&m)?;
    Ok(NoisyFixedPoint {
        m,
        mean_state,
        iterations,
        observed_rate: rate,
        lambda_min: eig.values[0],
    })
}

// ---------------------------------------------------------------------------
// Eigenvalue bounds
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug)]
pub struct EigBounds {
    /// Rayleigh quotient pi^T M pi / pi^T pi.
    pub rayleigh: f64,
    pub lambda2_q: f64,
    /// min{R(M; pi), lambda_2(Q)}.
    pub bound: f64,
    pub lambda1_m: f64,
    pub holds: bool,
}

/// Lower bound on the smallest eigenvalue of M by splitting along pi and its
/// orthogonal complement.
pub fn eig_bounds(m: &Mat, pi: &StationaryDistribution, q: &Mat) -> Result<EigBounds> {
    let rayleigh = m.quad_form(pi.pi(), pi.pi()) / pi.norm_sq();
    let lambda2_q = linalg::sym_eigen(q)?.values[1];
    let lambda1_m = linalg::sym_eigen(m)?.values[0];
    let bound = rayleigh.min(lambda2_q);
    Ok(EigBounds {
        rayleigh,
        lambda2_q,
        bound,
        lambda1_m,
        holds: bound <= lambda1_m + 1e-9,
    })
}

// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::complete_uniform;
    use crate::model::stationary_distribution;
    use crate::simulate::{run_extended, Dynamics, DEFAULT_STEP_CAP};
    use approx::assert_relative_eq;

    fn fair_two_node() -> InteractionMatrix {
        InteractionMatrix::new(vec![vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap()
    }

    #[test]
    fn exact_exclude_final_matches_hand_solved_occupation() {
        // From (1,0): occupation (3/2, 1/2) over {10, 01}, E0[tau] = 2,
        // so M' = diag(3/4, 1/4).
        let a = fair_two_node();
        let mu = InitialDistribution::Fixed(StateVector::from_bits(vec![true, false]));
        let c = exact_correlation(&a, &mu, false).unwrap();
        assert_relative_eq!(c.m[(0, 0)], 0.75, epsilon = 1e-10);
        assert_relative_eq!(c.m[(1, 1)], 0.25, epsilon = 1e-10);
        assert_relative_eq!(c.m[(0, 1)], 0.0, epsilon = 1e-10);
    }

    #[test]
    fn two_node_q_matches_hand_computation() {
        // Conditioned fair starts on n=2: Q = (1/6) [[1,-1],[-1,1]].
        let a = fair_two_node();
        let pi = stationary_distribution(&a).unwrap();
        let mu = InitialDistribution::ProductBernoulliTransient { p: 0.5 };
        let moments = ChainMoments::exact(&a, &mu).unwrap();
        let rep = q_matrix(&a, &pi, &mu, &moments).unwrap();
        assert_relative_eq!(rep.q[(0, 0)], 1.0 / 6.0, epsilon = 1e-10);
        assert_relative_eq!(rep.q[(0, 1)], -1.0 / 6.0, epsilon = 1e-10);
        assert!(rep.qpi_residual <= 1e-10);
        // And M = A M A^T + Q holds for the include-final M.
        let m = exact_correlation(&a, &mu, true).unwrap();
        assert!(lyapunov_check(&m.m, &a, &rep.q) <= 1e-10);
    }

    #[test]
    fn q_pi_vanishes_on_k4() {
        let a = complete_uniform(4);
        let pi = stationary_distribution(&a).unwrap();
        let mu = InitialDistribution::ProductBernoulli { p: 0.5 };
        let moments = ChainMoments::exact(&a, &mu).unwrap();
        let rep = q_matrix(&a, &pi, &mu, &moments).unwrap();
        assert!(rep.qpi_residual <= 1e-8, "residual {}", rep.qpi_residual);
        assert_eq!(rep.bound_holds, Some(true));
        // Unconditioned product starts admit the off-diagonal-constant form.
        let alpha = rep.alpha.unwrap();
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    assert_relative_eq!(rep.q[(i, j)], -alpha, epsilon = 1e-10);
                }
            }
        }
    }

    #[test]
    fn q_pi_kernel_fails_off_vertex_transitive_graphs() {
        // pi^T Q pi = 0 always holds, but Q is not PSD in general: on the
        // lazy path the residual matrix has a negative eigenvalue and pi is
        // not in its kernel. The kernel property does hold on
        // vertex-transitive instances (see q_pi_vanishes_on_k4).
        let a = crate::model::build_matrix(
            &crate::model::Graph::path(4),
            crate::model::MatrixKind::Lazy,
        )
        .unwrap();
        let pi = stationary_distribution(&a).unwrap();
        let mu = InitialDistribution::ProductBernoulli { p: 0.5 };
        let m = exact_correlation(&a, &mu, true).unwrap();
        let moments = ChainMoments::exact(&a, &mu).unwrap();
        let rep = q_matrix(&a, &pi, &mu, &moments).unwrap();
        // The construction still satisfies the Lyapunov equation exactly...
        assert!(lyapunov_check(&m.m, &a, &rep.q) <= 1e-10);
        // ...and the quadratic form at pi vanishes...
        let qpi = rep.q.mat_vec(pi.pi());
        let quad: f64 = pi.pi().iter().zip(&qpi).map(|(p, x)| p * x).sum();
        assert!(quad.abs() <= 1e-12);
        // ...but pi is not an eigenvector with eigenvalue 0 here.
        assert!(
            rep.qpi_residual > 1e-3,
            "unexpectedly small: {}",
            rep.qpi_residual
        );
        assert!(
            rep.eigenvalues[0] < -1e-3,
            "Q unexpectedly PSD: {:?}",
            rep.eigenvalues
        );
    }

    #[test]
    fn include_exclude_relation_holds_exactly() {
        // M = (E0[tau] M' + pi^T E0[X_0] J) / (E0[tau] + 1) when mu(C) = 0.
        let a = complete_uniform(3);
        let pi = stationary_distribution(&a).unwrap();
        let mu = InitialDistribution::ProductBernoulliTransient { p: 0.4 };
        let m_inc = exact_correlation(&a, &mu, true).unwrap().m;
        let m_exc = exact_correlation(&a, &mu, false).unwrap().m;
        let chain = ExactChain::new(&a, DynamicsKind::Sync).unwrap();
        let e0_tau = chain.e0_tau_transient(&mu).unwrap();
        let mut e0_x0 = vec![0.0; 3];
        for mask in 1u64..7 {
            let w = mu.prob_mass(&StateVector::from_mask(mask, 3));
            for (u, e) in e0_x0.iter_mut().enumerate() {
                if (mask >> u) & 1 == 1 {
                    *e += w;
                }
            }
        }
        let pi_x0: f64 = pi.pi().iter().zip(&e0_x0).map(|(p, x)| p * x).sum();
        for i in 0..3 {
            for j in 0..3 {
                let rhs = (e0_tau * m_exc[(i, j)] + pi_x0) / (e0_tau + 1.0);
                assert_relative_eq!(m_inc[(i, j)], rhs, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn palm_estimate_converges_to_exact() {
        let a = complete_uniform(3);
        let mu = InitialDistribution::ProductBernoulliTransient { p: 0.5 };
        let exact = exact_correlation(&a, &mu, false).unwrap();
        let trace =
            run_extended(Dynamics::Sync(&a), &mu, 20_000, 13, false, DEFAULT_STEP_CAP).unwrap();
        let est = palm_correlation(&trace).unwrap();
        assert!(est.m.sub(&exact.m).max_abs() < 0.02);
        assert!(est.lambda_min >= -1e-10);
    }

    #[test]
    fn product_mu_moment_matrix_spectrum() {
        // E0[X0 X0^T] = p(1-p) I + p^2 J: smallest eigenvalue p(1-p).
        let p = 0.3;
        let m = mu_moment_matrix(&InitialDistribution::ProductBernoulli { p }, 5).unwrap();
        let eig = linalg::sym_eigen(&m).unwrap();
        assert_relative_eq!(eig.values[0], p * (1.0 - p), epsilon = 1e-12);
    }

    #[test]
    fn noisy_fixed_point_properties() {
        let a = complete_uniform(4);
        for eps in [0.05, 0.25, 0.4] {
            let fp = lyapunov_solve_noisy(&a, eps).unwrap();
            for u in 0..4 {
                assert_relative_eq!(fp.mean_state[u], 0.5, epsilon = 1e-10);
                assert_relative_eq!(fp.m[(u, u)], 0.5, epsilon = 1e-12);
            }
            assert!(
                fp.lambda_min >= eps * eps - 1e-10,
                "eps {eps}: {}",
                fp.lambda_min
            );
            assert!(fp.observed_rate <= (1.0 - 2.0 * eps) * (1.0 - 2.0 * eps) + 0.05);
        }
    }

    #[test]
    fn eig_bound_on_scaled_identity() {
        let m = Mat::identity(3).scale(0.7);
        let a = complete_uniform(3);
        let pi = stationary_distribution(&a).unwrap();
        let q = Mat::zeros(3, 3);
        let b = eig_bounds(&m, &pi, &q).unwrap();
        assert_relative_eq!(b.lambda1_m, 0.7, epsilon = 1e-12);
        assert!(b.holds);
    }

    #[test]
    fn eig_bound_on_exact_k4() {
        let a = complete_uniform(4);
        let pi = stationary_distribution(&a).unwrap();
        let mu = InitialDistribution::ProductBernoulli { p: 0.5 };
        let m = exact_correlation(&a, &mu, true).unwrap();
        let moments = ChainMoments::exact(&a, &mu).unwrap();
        let q = q_matrix(&a, &pi, &mu, &moments).unwrap();
        let b = eig_bounds(&m.m, &pi, &q.q).unwrap();
        assert!(b.holds, "{b:?}");
    }

    #[test]
    fn complete_graph_m_is_two_valued_and_lambda1_matches() {
        // Exact include-final M on the complete graph has constant diagonal
        // and constant off-diagonal entries, and lambda_1(M) = a - b.
        let a = complete_uniform(4);
        let mu = InitialDistribution::ProductBernoulli { p: 0.5 };
        let c = exact_correlation(&a, &mu, true).unwrap();
        let diag = c.m[(0, 0)];
        let off = c.m[(0, 1)];
        for i in 0..4 {
            assert_relative_eq!(c.m[(i, i)], diag, epsilon = 1e-10);
            for j in 0..4 {
                if i != j {
                    assert_relative_eq!(c.m[(i, j)], off, epsilon = 1e-10);
                }
            }
        }
        assert_relative_eq!(c.lambda_min, diag - off, epsilon = 1e-9);
    }
}
