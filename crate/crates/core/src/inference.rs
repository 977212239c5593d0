//! Regularized maximum-likelihood estimation of the interaction matrix from
//! extended traces: Bernoulli cross-entropy likelihood, analytic gradient
//! and per-row Hessian blocks, a proximal projected-gradient optimizer over
//! row-substochastic matrices, the theory calculators for the
//! regularization rule and sampling-complexity bounds, and Bernoulli KL
//! utilities.

use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::Mat;
use crate::math;
use crate::simulate::{ExtendedTrace, InitialDistribution, StateVector};
use crate::{Error, Result};

// ---------------------------------------------------------------------------
// Loss configuration
// ---------------------------------------------------------------------------

/// Configuration of the estimator.
#[derive(Clone, Debug)]
pub struct LossConfig {
    /// L1 regularization weight.
    pub lambda: f64,
    /// Probability floor applied only where a degenerate prediction
    /// contradicts an observation.
    pub clip: f64,
    /// Known support mask; None lets every entry move.
    pub support: Option<Vec<Vec<bool>>>,
    pub max_iters: u32,
    /// Relative objective-change stopping tolerance.
    pub tol: f64,
}

impl LossConfig {
    pub fn new(lambda: f64) -> Self {
        Self {
            lambda,
            clip: 1e-6,
            support: None,
            max_iters: 2000,
            tol: 1e-9,
        }
    }

    pub fn with_support(mut self, support: Vec<Vec<bool>>) -> Self {
        self.support = Some(support);
        self
    }

    fn validate(&self, n: usize) -> Result<()> {
        if self.lambda < 0.0 || !self.lambda.is_finite() {
            return Err(Error::Domain("lambda must be finite and >= 0"));
        }
        if !(self.clip > 0.0 && self.clip < 0.5) {
            return Err(Error::Domain("clip must be in (0, 0.5)"));
        }
        if let Some(s) = &self.support {
            if s.len() != n || s.iter().any(|r| r.len() != n) {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: s.len(),
                });
            }
            if s.iter().any(|r| r.iter().all(|&b| !b)) {
                return Err(Error::Domain("every row needs a nonempty support"));
            }
        }
        Ok(())
    }
}

fn check_candidate(a: &Mat, n: usize) -> Result<()> {
    if a.rows() != n || a.cols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: a.rows(),
        });
    }
    for u in 0..n {
        let mut sum = 0.0;
        for v in 0..n {
            let x = a[(u, v)];
            if x < -1e-12 || x > 1.0 + 1e-9 {
                return Err(Error::EntryOutOfRange {
                    row: u,
                    col: v,
                    value: x,
                });
            }
            sum += x;
        }
        if sum > 1.0 + 1e-9 {
            return Err(Error::NotStochastic { row: u, sum });
        }
    }
    Ok(())
}

#[inline]
fn row_dot(a: &Mat, u: usize, x: &StateVector) -> f64 {
    let row = a.row(u);
    let mut s = 0.0;
    for v in x.ones() {
        s += row[v];
    }
    s
}

// ---------------------------------------------------------------------------
// Log-likelihood, gradient, Hessian
// ---------------------------------------------------------------------------

/// Log-likelihood value with the number of clipped degenerate terms.
#[derive(Clone, Copy, Debug)]
pub struct LogLikelihood {
    pub value: f64,
    pub clip_events: usize,
}

/// Log-likelihood of a candidate matrix over the transitions of a trace.
/// Per step and vertex the contribution is the negative Bernoulli
/// cross-entropy -H(X_{t+1,u}, a_u^T X_t); a degenerate prediction that
/// contradicts the observed bit is clipped to `clip` and counted. The
/// initial-state term sum_i log mu(X_0^(i)) is added only when `mu` is
/// supplied (it is constant in A).
pub fn log_likelihood(
    a: &Mat,
    trace: &ExtendedTrace,
    clip: f64,
    mu: Option<&InitialDistribution>,
) -> Result<LogLikelihood> {
    let n = trace.n();
    check_candidate(a, n)?;
    let mut value = 0.0;
    let mut clip_events = 0usize;
    for cycle in trace.cycles() {
        if let Some(mu) = mu {
            value += math::ln(mu.prob_mass(cycle.initial()));
        }
        let states = cycle.states();
        for t in 0..cycle.tau() {
            let x = &states[t];
            let y = &states[t + 1];
            for u in 0..n {
                let q = row_dot(a, u, x);
                let yu = y.get(u);
                if q <= 0.0 {
                    if yu {
                        value += math::ln(clip);
                        clip_events += 1;
                    }
                } else if q >= 1.0 {
                    if !yu {
                        value += math::ln(clip);
                        clip_events += 1;
                    }
                } else {
                    value += if yu { math::ln(q) } else { math::ln(1.0 - q) };
                }
            }
        }
    }
    Ok(LogLikelihood { value, clip_events })
}

/// Analytic gradient of the log-likelihood and per-row Hessian blocks of the
/// negative log-likelihood. Both sums run over the informative steps
/// T_u = {t : 0 < a_u^T X_t < 1}; the Hessian of the likelihood is
/// block-diagonal across rows.
pub fn gradient_hessian(a: &Mat, trace: &ExtendedTrace) -> Result<(Mat, Vec<Mat>)> {
    let n = trace.n();
    check_candidate(a, n)?;
    let mut grad = Mat::zeros(n, n);
    let mut hess: Vec<Mat> = (0..n).map(|_| Mat::zeros(n, n)).collect();
    for cycle in trace.cycles() {
        let states = cycle.states();
        for t in 0..cycle.tau() {
            let x = &states[t];
            let y = &states[t + 1];
            let ones: Vec<usize> = x.ones().collect();
            for u in 0..n {
                let q = row_dot(a, u, x);
                if q <= 0.0 || q >= 1.0 {
                    continue;
                }
                let yu = y.get(u) as u8 as f64;
                let g = yu / q - (1.0 - yu) / (1.0 - q);
                let phi = yu / (q * q) + (1.0 - yu) / ((1.0 - q) * (1.0 - q));
                let grow = grad.row_mut(u);
                for &v in &ones {
                    grow[v] += g;
                }
                let h = &mut hess[u];
                for &v in &ones {
                    for &w in &ones {
                        h[(v, w)] += phi;
                    }
                }
            }
        }
    }
    Ok((grad, hess))
}

/// Full derivative of the implemented (clipped) log-likelihood, used by the
/// optimizer. On the interior steps it equals the informative-step-restricted
/// gradient; steps with a degenerate prediction that AGREES with the
/// observation still vary with A over the substochastic set (log q at q = 1,
/// log(1-q) at q = 0) and contribute their one-sided derivatives, while
/// contradicted degenerate steps are clipped to a constant and contribute
/// nothing.
fn loss_gradient_full(a: &Mat, trace: &ExtendedTrace, skip_row: &[bool]) -> Mat {
    let n = trace.n();
    let mut grad = Mat::zeros(n, n);
    for cycle in trace.cycles() {
        let states = cycle.states();
        for t in 0..cycle.tau() {
            let x = &states[t];
            let y = &states[t + 1];
            let ones: Vec<usize> = x.ones().collect();
            for u in 0..n {
                if skip_row[u] {
                    continue;
                }
                let q = row_dot(a, u, x);
                let yu = y.get(u);
                let g = if q > 0.0 && q < 1.0 {
                    let yf = yu as u8 as f64;
                    yf / q - (1.0 - yf) / (1.0 - q)
                } else if q >= 1.0 && yu {
                    1.0 / q
                } else if q <= 0.0 && !yu {
                    -1.0 / (1.0 - q)
                } else {
                    0.0
                };
                if g != 0.0 {
                    let grow = grad.row_mut(u);
                    for &v in &ones {
                        grow[v] += g;
                    }
                }
            }
        }
    }
    grad
}

/// Per-row informative-step counts |T_u| at the candidate matrix.
pub fn informative_steps(a: &Mat, trace: &ExtendedTrace) -> Result<Vec<usize>> {
    let n = trace.n();
    check_candidate(a, n)?;
    let mut counts = vec![0usize; n];
    for cycle in trace.cycles() {
        for x in cycle.window(false) {
            for (u, c) in counts.iter_mut().enumerate() {
                let q = row_dot(a, u, x);
                if q > 0.0 && q < 1.0 {
                    *c += 1;
                }
            }
        }
    }
    Ok(counts)
}

// ---------------------------------------------------------------------------
// Proximal projected-gradient estimator
// ---------------------------------------------------------------------------

/// Shifts active entries down by `shrink` (the L1 proximal step) and
/// projects onto {x >= 0, sum x <= 1}. Inactive entries are forced to 0.
pub fn prox_row_substochastic(row: &mut [f64], active: &[bool], shrink: f64) {
    let mut vals: Vec<f64> = Vec::with_capacity(row.len());
    for (v, r) in row.iter_mut().enumerate() {
        if active[v] {
            vals.push((*r - shrink).max(0.0));
        } else {
            *r = 0.0;
        }
    }
    let total: f64 = vals.iter().sum();
    if total > 1.0 {
        // Euclidean projection onto the simplex boundary.
        let mut sorted = vals.clone();
        sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let mut cum = 0.0;
        let mut theta = 0.0;
        for (k, &s) in sorted.iter().enumerate() {
            cum += s;
            let cand = (cum - 1.0) / (k + 1) as f64;
            if s - cand > 0.0 {
                theta = cand;
            } else {
                break;
            }
        }
        for v in vals.iter_mut() {
            *v = (*v - theta).max(0.0);
        }
    }
    let mut it = vals.into_iter();
    for (v, r) in row.iter_mut().enumerate() {
        if active[v] {
            *r = it.next().unwrap();
        }
    }
}

/// Result of the estimator.
#[derive(Clone, Debug)]
pub struct EstimationResult {
    pub a_hat: Mat,
    /// Frobenius error against the true matrix when it was supplied.
    pub frob_error: Option<f64>,
    /// Objective value per accepted iteration (including the initial point).
    pub objective: Vec<f64>,
    pub informative_steps: Vec<usize>,
    pub unidentifiable: Vec<bool>,
    pub iterations: u32,
    pub converged: bool,
    pub clip_events: usize,
}

fn l1_norm(a: &Mat) -> f64 {
    let mut s = 0.0;
    for u in 0..a.rows() {
        for v in 0..a.cols() {
            s += math::abs(a[(u, v)]);
        }
    }
    s
}

/// Proximal projected-gradient descent on -loglik(A) + lambda ||A||_{1,1}
/// over row-substochastic nonnegative matrices, with Armijo backtracking on
/// the smooth part. Rows without informative steps are frozen at the
/// uniform distribution over their declared support and flagged.
pub fn estimate(
    trace: &ExtendedTrace,
    config: &LossConfig,
    a_star: Option<&Mat>,
) -> Result<EstimationResult> {
    if trace.is_empty() {
        return Err(Error::InsufficientData("trace has no cycles"));
    }
    let n = trace.n();
    config.validate(n)?;

    let active: Vec<Vec<bool>> = match &config.support {
        Some(s) => s.clone(),
        None => vec![vec![true; n]; n],
    };

    // Initial point: uniform over the declared support, or uniform over the
    // off-diagonal entries when the support is unknown.
    let mut a = Mat::zeros(n, n);
    for u in 0..n {
        match &config.support {
            Some(s) => {
                let k = s[u].iter().filter(|&&b| b).count();
                for v in 0..n {
                    if s[u][v] {
                        a[(u, v)] = 1.0 / k as f64;
                    }
                }
            }
            None => {
                for v in 0..n {
                    if v != u {
                        a[(u, v)] = 1.0 / (n - 1) as f64;
                    }
                }
            }
        }
    }

    let counts = informative_steps(&a, trace)?;
    let unidentifiable: Vec<bool> = counts.iter().map(|&c| c == 0).collect();

    let smooth = |a: &Mat| -> Result<LogLikelihood> { log_likelihood(a, trace, config.clip, None) };

    let ll0 = smooth(&a)?;
    let mut f = -ll0.value;
    let mut clip_events = ll0.clip_events;
    let mut objective = vec![f + config.lambda * l1_norm(&a)];
    let mut step = 1.0 / (1.0 + trace.total_tau() as f64).max(1.0);
    let mut converged = false;
    let mut iterations = 0u32;

    while iterations < config.max_iters {
        iterations += 1;
        let grad_ll = loss_gradient_full(&a, trace, &unidentifiable);

        // Backtracking line search on the smooth part.
        let mut accepted = false;
        while step >= 1e-18 {
            let mut cand = a.clone();
            for u in 0..n {
                if unidentifiable[u] {
                    continue;
                }
                for v in 0..n {
                    cand[(u, v)] += step * grad_ll[(u, v)];
                }
                prox_row_substochastic(cand.row_mut(u), &active[u], step * config.lambda);
            }
            let ll = smooth(&cand)?;
            let f_cand = -ll.value;
            let mut lin = 0.0;
            let mut dist_sq = 0.0;
            for u in 0..n {
                for v in 0..n {
                    let d = cand[(u, v)] - a[(u, v)];
                    lin += -grad_ll[(u, v)] * d;
                    dist_sq += d * d;
                }
            }
            if f_cand <= f + lin + dist_sq / (2.0 * step) + 1e-10 {
                a = cand;
                f = f_cand;
                clip_events = ll.clip_events;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }

        let obj = f + config.lambda * l1_norm(&a);
        let prev = *objective.last().unwrap();
        objective.push(obj);
        if math::abs(prev - obj) <= config.tol * math::abs(prev).max(1.0) {
            converged = true;
            break;
        }
        step = (step * 1.5).min(1e6);
    }

    let frob_error = a_star.map(|t| {
        let mut s = 0.0;
        for u in 0..n {
            for v in 0..n {
                let d = a[(u, v)] - t[(u, v)];
                s += d * d;
            }
        }
        math::sqrt(s)
    });

    Ok(EstimationResult {
        a_hat: a,
        frob_error,
        objective,
        informative_steps: counts,
        unidentifiable,
        iterations,
        converged,
        clip_events,
    })
}

// ---------------------------------------------------------------------------
// First-order Taylor error
// ---------------------------------------------------------------------------

/// h(Delta; X) = sum over cycles, steps t < tau, and vertices u of
/// (Delta_u^T X_t)^2.
pub fn h_delta(delta: &Mat, trace: &ExtendedTrace) -> Result<f64> {
    let n = trace.n();
    if delta.rows() != n || delta.cols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: delta.rows(),
        });
    }
    let mut total = 0.0;
    for cycle in trace.cycles() {
        for x in cycle.window(false) {
            for u in 0..n {
                let d = row_dot(delta, u, x);
                total += d * d;
            }
        }
    }
    Ok(total)
}

// ---------------------------------------------------------------------------
// Theory calculators
// ---------------------------------------------------------------------------

/// Inputs for the theory report; chain quantities may be exact or estimated.
#[derive(Clone, Copy, Debug)]
pub struct TheoryInputs {
    pub n: usize,
    pub m: u64,
    /// Smallest positive entry of the true matrix.
    pub alpha: f64,
    pub pi_star: f64,
    pub phi_a_star: f64,
    /// E0[tau].
    pub e0_tau: f64,
    /// lambda_min of the exclude-final stationary correlation matrix.
    pub lambda_min_corr: f64,
    pub delta: f64,
    /// Target Frobenius error for the sampling-complexity lower bound.
    pub epsilon: f64,
    /// User constants of the two sample-size conditions (the covering
    /// argument fixes them only up to unspecified constants).
    pub c1: f64,
    pub c2: f64,
    /// Support-size bound s.
    pub s: u64,
    /// Observed sup-norm of the likelihood gradient at the true matrix.
    pub grad_infnorm: Option<f64>,
}

#[derive(Clone, Copy, Debug)]
pub struct TheoryReport {
    /// 2 sqrt(2) c_{n,pi*} / (alpha sqrt(phi)) sqrt(m).
    pub lambda_m_default: f64,
    /// c_{n,delta,pi*}(m).
    pub c_n_delta_pi: f64,
    /// c_{n,pi*}.
    pub c_n_pi: f64,
    /// High-probability bound on ||grad loglik(A*)||_inf.
    pub grad_bound: f64,
    pub grad_infnorm: Option<f64>,
    pub grad_bound_holds: Option<bool>,
    /// kappa_1 = m E0[tau] lambda_min.
    pub kappa1: f64,
    /// RSC curvature kappa_1 / 2.
    pub kappa: f64,
    /// RSC tolerance (0 when the support bound is met).
    pub gamma: f64,
    /// c_{delta,pi*}(m).
    pub c_delta_pi: f64,
    /// Sample size needed for the fixed-direction RSC event.
    pub rsc_m_threshold: f64,
    /// (alpha/16)(1/eps^2) log(1/(2.4 delta)).
    pub lower_bound_rhs: f64,
    /// Implied lower bound on m.
    pub m_lower_bound: f64,
    /// Exponent a entering the covering condition.
    pub a_exponent: f64,
    pub m1: f64,
    pub m2: f64,
    pub s: u64,
}

/// Evaluates the regularization rule, curvature constants, sample-size
/// conditions, and the sampling-complexity lower bound.
pub fn theory_report(inp: &TheoryInputs) -> Result<TheoryReport> {
    if inp.alpha <= 0.0
        || !(inp.pi_star > 0.0 && inp.pi_star <= 0.5)
        || !(inp.phi_a_star > 0.0 && inp.phi_a_star <= 1.0)
        || inp.e0_tau <= 0.0
        || inp.lambda_min_corr <= 0.0
        || !(inp.delta > 0.0 && inp.delta < 1.0)
        || inp.epsilon <= 0.0
        || inp.m == 0
    {
        return Err(Error::Domain("theory inputs must be positive and in range"));
    }
    let n = inp.n as f64;
    let m = inp.m as f64;
    let s = inp.s as f64;
    let log_inv_2pi = math::ln(1.0 / (2.0 * inp.pi_star));
    let phi = inp.phi_a_star;

    let c_n_delta_pi = math::sqrt(
        (log_inv_2pi + math::ln(2.0 * n * n / inp.delta) / m) * math::ln(4.0 * n * n / inp.delta),
    );
    let grad_bound = core::f64::consts::SQRT_2 / inp.alpha * math::sqrt(m / phi) * c_n_delta_pi;
    let c_n_pi = math::sqrt((log_inv_2pi + math::ln(2.0 * n * n * n)) * math::ln(4.0 * n * n * n));
    let lambda_m_default =
        2.0 * core::f64::consts::SQRT_2 * c_n_pi / (inp.alpha * math::sqrt(phi)) * math::sqrt(m);

    let kappa1 = m * inp.e0_tau * inp.lambda_min_corr;
    let c_delta_pi =
        8.0 * (log_inv_2pi + math::ln(2.0 / inp.delta) / m) * math::ln(2.0 / inp.delta);
    let rsc_m_threshold = s * s / phi * c_delta_pi
        / (inp.e0_tau * inp.e0_tau * inp.lambda_min_corr * inp.lambda_min_corr);

    let lower_bound_rhs =
        inp.alpha / 16.0 / (inp.epsilon * inp.epsilon) * math::ln(1.0 / (2.4 * inp.delta));
    let m_lower_bound = lower_bound_rhs / (inp.e0_tau * inp.lambda_min_corr);

    let a_exponent =
        s * n * (log_inv_2pi + math::ln(n)) / ((phi * inp.e0_tau) * inp.lambda_min_corr);
    let log_n = math::ln(n);
    let m1 = inp.c1
        * s
        * s
        * (log_inv_2pi * (a_exponent + 1.0) * log_n
            + (a_exponent + 1.0) * (a_exponent + 1.0) * log_n * log_n)
        / (phi * inp.e0_tau * inp.e0_tau * inp.lambda_min_corr * inp.lambda_min_corr);
    let m2 = inp.c2 * n * n * n
        / inp.pi_star
        / ((phi * inp.e0_tau) * (phi * inp.e0_tau) * inp.lambda_min_corr * inp.lambda_min_corr);

    Ok(TheoryReport {
        lambda_m_default,
        c_n_delta_pi,
        c_n_pi,
        grad_bound,
        grad_infnorm: inp.grad_infnorm,
        grad_bound_holds: inp.grad_infnorm.map(|g| g <= grad_bound),
        kappa1,
        kappa: kappa1 / 2.0,
        gamma: 0.0,
        c_delta_pi,
        rsc_m_threshold,
        lower_bound_rhs,
        m_lower_bound,
        a_exponent,
        m1,
        m2,
        s: inp.s,
    })
}

// ---------------------------------------------------------------------------
// Bernoulli KL sandwich
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug)]
pub struct KlSandwich {
    pub kl: f64,
    /// Pinsker lower bound 2 (p - q)^2.
    pub lower: f64,
    /// (2/alpha) (p - q)^2, valid for q in [alpha, 1 - alpha].
    pub upper: f64,
    pub lower_ok: bool,
    pub upper_ok: bool,
}

/// KL(p || q) between Bernoulli distributions with the quadratic sandwich.
pub fn kl_bernoulli(p: f64, q: f64, alpha: f64) -> Result<KlSandwich> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain("p must be in [0, 1]"));
    }
    if !(alpha > 0.0 && alpha <= 0.5) {
        return Err(Error::Domain("alpha must be in (0, 1/2]"));
    }
    if !(q >= alpha && q <= 1.0 - alpha) {
        return Err(Error::Domain("q must lie in [alpha, 1 - alpha]"));
    }
    let term = |a: f64, b: f64| if a == 0.0 { 0.0 } else { a * math::ln(a / b) };
    let kl = term(p, q) + term(1.0 - p, 1.0 - q);
    let d2 = (p - q) * (p - q);
    let lower = 2.0 * d2;
    let upper = 2.0 / alpha * d2;
    Ok(KlSandwich {
        kl,
        lower,
        upper,
        lower_ok: kl >= lower - 1e-12,
        upper_ok: kl <= upper + 1e-12,
    })
}

// ---------------------------------------------------------------------------
// Error metrics
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug)]
pub struct FrobeniusReport {
    pub frob: f64,
    pub frob_sq: f64,
    /// Fraction of predicted-support entries that are truly nonzero.
    pub precision: f64,
    /// Fraction of true-support entries recovered.
    pub recall: f64,
}

/// Frobenius error and support-recovery metrics at the given threshold.
pub fn frobenius_error(a_hat: &Mat, a_star: &Mat, threshold: f64) -> Result<FrobeniusReport> {
    if a_hat.rows() != a_star.rows() || a_hat.cols() != a_star.cols() {
        return Err(Error::DimensionMismatch {
            expected: a_star.rows(),
            got: a_hat.rows(),
        });
    }
    let mut frob_sq = 0.0;
    let mut pred = 0usize;
    let mut truth = 0usize;
    let mut both = 0usize;
    for u in 0..a_hat.rows() {
        for v in 0..a_hat.cols() {
            let d = a_hat[(u, v)] - a_star[(u, v)];
            frob_sq += d * d;
            let p = math::abs(a_hat[(u, v)]) > threshold;
            let t = a_star[(u, v)] > 0.0;
            pred += p as usize;
            truth += t as usize;
            both += (p && t) as usize;
        }
    }
    Ok(FrobeniusReport {
        frob: math::sqrt(frob_sq),
        frob_sq,
        precision: if pred == 0 {
            1.0
        } else {
            both as f64 / pred as f64
        },
        recall: if truth == 0 {
            1.0
        } else {
            both as f64 / truth as f64
        },
    })
}

// ---------------------------------------------------------------------------
