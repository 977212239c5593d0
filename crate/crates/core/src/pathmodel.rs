//! Asynchronous voter model on a path: closed-form probabilities that a
//! vertex performs at least one informative interaction before absorption,
//! expected informative-vertex counts, and simulation cross-checks.
//!
//! Vertices are labeled 1..=n. Vertex u samples its right neighbor with
//! probability p_u and its left neighbor otherwise; the missing side at the
//! two endpoints is a self-sample, so every stored bias stays in (0, 1).
//! The boundary conventions of the hitting-probability recursions (a target
//! vertex's own bias overridden to 0 or 1 depending on the case) are applied
//! inside the formula branches, not to the stored vector.
//!
//! Initial states put the k leftmost vertices at 1; the dynamics then reduce
//! to a birth-death chain in the count of ones.

use alloc::vec;
use alloc::vec::Vec;

use crate::math;
use crate::rng::SplitMix64;
use crate::{Error, Result};

/// Path model with per-vertex right-sampling biases.
#[derive(Clone, Debug)]
pub struct PathModel {
    n: usize,
    p: Vec<f64>,
}

impl PathModel {
    pub fn new(n: usize, p: Vec<f64>) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain("path model needs n >= 2"));
        }
        if p.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: p.len(),
            });
        }
        if p.iter().any(|&x| !(x > 0.0 && x < 1.0)) {
            return Err(Error::Domain("biases must lie strictly inside (0,1)"));
        }
        Ok(Self { n, p })
    }

    /// All biases 1/2 (the case with the closed-form specializations).
    pub fn half_bias(n: usize) -> Result<Self> {
        Self::new(n, vec![0.5; n])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn biases(&self) -> &[f64] {
        &self.p
    }

    /// 1-based access: bias of vertex u.
    fn bias(&self, u: usize) -> f64 {
        self.p[u - 1]
    }
}

fn check_vertex(model: &PathModel, u: usize) -> Result<()> {
    if u < 1 || u > model.n {
        return Err(Error::Domain("vertex label must be in 1..=n"));
    }
    Ok(())
}

fn check_initial_count(model: &PathModel, k: usize) -> Result<()> {
    if k < 1 || k > model.n - 1 {
        return Err(Error::Domain("initial count k must be in 1..=n-1"));
    }
    Ok(())
}

/// log(sum exp(terms)) for stable ratios of large products.
fn log_sum_exp(terms: &[f64]) -> f64 {
    let m = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    m + math::ln(terms.iter().map(|&t| math::exp(t - m)).sum::<f64>())
}

/// Case k < u: ratio of cumulative products over p_1..p_{u-1} with the
/// target's own bias overridden to 0.
fn hitting_below(model: &PathModel, u: usize, k: usize) -> f64 {
    let bias = |j: usize| if j == u { 0.0 } else { model.bias(j) };
    // log rho_z = sum_{j=1..z} ln p_j - sum_{j=2..z+1} ln(1 - p_j)
    let mut log_terms = Vec::with_capacity(u);
    log_terms.push(0.0); // z = 0 term (the leading 1)
    let mut acc = 0.0;
    for z in 1..u {
        acc += math::ln(bias(z)) - math::ln(1.0 - bias(z + 1));
        log_terms.push(acc);
    }
    let num = log_sum_exp(&log_terms[..k]);
    let den = log_sum_exp(&log_terms);
    math::exp(num - den)
}

/// Case k > u: ratio of cumulative products over p_u..p_{n-1} with the
/// target's own bias overridden to 1. Returns 0 at k = n (an absorbed
/// start).
fn hitting_above(model: &PathModel, u: usize, k: usize) -> f64 {
    let n = model.n;
    if k >= n {
        return 0.0;
    }
    let bias = |j: usize| if j == u { 1.0 } else { model.bias(j) };
    // log sigma_z = sum_{j=u..z} ln p_j - sum_{j=u+1..z+1} ln(1 - p_j),
    // for z = u .. n-1; the leading denominator term is sigma_{u-1} = 1.
    let mut log_terms = Vec::with_capacity(n - u);
    let mut acc = 0.0;
    for z in u..n {
        acc += math::ln(bias(z)) - math::ln(1.0 - bias(z + 1));
        log_terms.push(acc);
    }
    let num = log_sum_exp(&log_terms[k - u..]);
    let mut den_terms = vec![0.0];
    den_terms.extend_from_slice(&log_terms);
    let den = log_sum_exp(&den_terms);
    math::exp(num - den)
}

/// Probability that vertex u performs at least one informative interaction
/// before absorption, starting with the k leftmost vertices at 1.
pub fn hitting_prob(model: &PathModel, u: usize, k: usize) -> Result<f64> {
    check_vertex(model, u)?;
    check_initial_count(model, k)?;
    let h = if k < u {
        hitting_below(model, u, k)
    } else if k > u {
        hitting_above(model, u, k)
    } else {
        // First-step recursion at the boundary: the next event is either the
        // target's own activation (a hit) or the right neighbor copying in.
        let p_next = model.bias(k + 1);
        let h_next = hitting_above(model, u, k + 1);
        (1.0 + (1.0 - p_next) * h_next) / (2.0 - p_next)
    };
    Ok(h)
}

/// h_{u,k} for every vertex u = 1..=n.
pub fn hitting_prob_all(model: &PathModel, k: usize) -> Result<Vec<f64>> {
    (1..=model.n).map(|u| hitting_prob(model, u, k)).collect()
}

/// Expected number of vertices with at least one informative interaction.
#[derive(Clone, Copy, Debug)]
pub struct ExpectedInformative {
    /// Exact finite sum of the closed-form hitting probabilities.
    pub exact: f64,
    /// k log(n/k) + (n-k) log(n/(n-k+1)).
    pub asymptotic: f64,
}

/// E[N] for the half-bias model, both as the exact finite sum and in the
/// asymptotic form it approaches up to an additive constant.
pub fn expected_informative(n: usize, k: usize) -> Result<ExpectedInformative> {
    let model = PathModel::half_bias(n)?;
    check_initial_count(&model, k)?;
    let exact = hitting_prob_all(&model, k)?.iter().sum();
    let nf = n as f64;
    let kf = k as f64;
    let asymptotic = kf * math::ln(nf / kf) + (nf - kf) * math::ln(nf / (nf - kf + 1.0));
    Ok(ExpectedInformative { exact, asymptotic })
}

// ---------------------------------------------------------------------------
// Simulation
// ---------------------------------------------------------------------------

/// Monte Carlo estimates of the informative-interaction frequencies.
#[derive(Clone, Debug)]
pub struct PathSimulation {
    pub reps: u64,
    /// Per-vertex frequency of at least one informative interaction
    /// (index 0 is vertex 1).
    pub freq: Vec<f64>,
    /// Binomial standard errors of the frequencies.
    pub stderr: Vec<f64>,
    /// Mean number of informative vertices per realization.
    pub mean_n: f64,
    /// Unbiased sample variance of that count.
    pub var_n: f64,
    /// Absorption time of every realization.
    pub taus: Vec<u64>,
}

/// Simulates the full asynchronous path dynamics: per step one vertex
/// activates uniformly and copies its sampled side. A step is informative
/// for the activated vertex when its sampled neighborhood is mixed.
pub fn simulate_path(
    model: &PathModel,
    k: usize,
    reps: u64,
    seed: u64,
    cap: u64,
) -> Result<PathSimulation> {
    check_initial_count(model, k)?;
    if reps == 0 {
        return Err(Error::Domain("reps must be >= 1"));
    }
    let n = model.n;
    let mut hit_counts = vec![0u64; n];
    let mut taus = Vec::with_capacity(reps as usize);
    let mut total_hits = 0u64;
    let mut total_hits_sq = 0u64;
    for rep in 0..reps {
        let mut rng = SplitMix64::new(crate::rng::mix(seed ^ rep.wrapping_mul(0x9FB2_1C65)));
        let mut x = vec![false; n];
        for xi in x.iter_mut().take(k) {
            *xi = true;
        }
        let mut hit = vec![false; n];
        let mut ones = k;
        let mut absorbed = false;
        for t in 0..cap {
            let i = rng.index(n);
            // Sampled-side states; endpoints self-sample on the missing side.
            let left = if i == 0 { x[0] } else { x[i - 1] };
            let right = if i == n - 1 { x[n - 1] } else { x[i + 1] };
            if left != right {
                hit[i] = true;
            }
            let sampled = if rng.next_f64() < model.p[i] {
                right
            } else {
                left
            };
            if sampled != x[i] {
                ones = if sampled { ones + 1 } else { ones - 1 };
                x[i] = sampled;
            }
            if ones == 0 || ones == n {
                taus.push(t + 1);
                absorbed = true;
                break;
            }
        }
        if !absorbed {
            return Err(Error::Domain("path simulation exceeded the step cap"));
        }
        let mut rep_hits = 0u64;
        for (u, &h) in hit.iter().enumerate() {
            if h {
                hit_counts[u] += 1;
                rep_hits += 1;
            }
        }
        total_hits += rep_hits;
        total_hits_sq += rep_hits * rep_hits;
    }
    let freq: Vec<f64> = hit_counts.iter().map(|&c| c as f64 / reps as f64).collect();
    let stderr = freq
        .iter()
        .map(|&f| math::sqrt(f * (1.0 - f) / reps as f64))
        .collect();
    let mean_n = total_hits as f64 / reps as f64;
    let var_n = if reps > 1 {
        (total_hits_sq as f64 - reps as f64 * mean_n * mean_n) / (reps as f64 - 1.0)
    } else {
        0.0
    };
    Ok(PathSimulation {
        reps,
        freq,
        stderr,
        mean_n,
        var_n,
        taus,
    })
}

/// Simulates the birth-death reduction directly (the count of ones), for
/// checking that the reduction is faithful.
pub fn simulate_count_chain(
    model: &PathModel,
    k: usize,
    reps: u64,
    seed: u64,
    cap: u64,
) -> Result<Vec<u64>> {
    check_initial_count(model, k)?;
    let n = model.n;
    let mut taus = Vec::with_capacity(reps as usize);
    for rep in 0..reps {
        let mut rng = SplitMix64::new(crate::rng::mix(seed ^ rep.wrapping_mul(0xA511_E9B3)));
        let mut y = k;
        let mut absorbed = false;
        for t in 0..cap {
            let u = rng.next_f64();
            let down = model.bias(y) / n as f64;
            let up = (1.0 - model.bias(y + 1)) / n as f64;
            if u < down {
                y -= 1;
            } else if u < down + up {
                y += 1;
            }
            if y == 0 || y == n {
                taus.push(t + 1);
                absorbed = true;
                break;
            }
        }
        if !absorbed {
            return Err(Error::Domain(
                "count-chain simulation exceeded the step cap",
            ));
        }
    }
    Ok(taus)
}

// ---------------------------------------------------------------------------
