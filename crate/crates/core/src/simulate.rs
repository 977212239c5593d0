//! Sampling engine for the synchronous, asynchronous and linear noisy
//! dynamics, and for the extended process made of independent cycles.
//!
//! All randomness is counter-addressed per (cycle, step, vertex), so a trace
//! is a pure function of (model, master seed) no matter how cycles are
//! scheduled across workers.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::model::InteractionMatrix;
use crate::rng::{CycleStream, Lane, SplitMix64};
use crate::{Error, Result};

/// Default cap on steps per cycle; consensus is a.s. finite, the cap guards
/// misconfigured inputs (for example periodic support).
pub const DEFAULT_STEP_CAP: u64 = 100_000_000;

// ---------------------------------------------------------------------------
// States
// ---------------------------------------------------------------------------

/// Binary state of the n nodes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StateVector {
    bits: Vec<bool>,
}

impl StateVector {
    pub fn zeros(n: usize) -> Self {
        Self {
            bits: vec![false; n],
        }
    }

    pub fn ones_vec(n: usize) -> Self {
        Self {
            bits: vec![true; n],
        }
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    pub fn from_fn(n: usize, f: impl FnMut(usize) -> bool) -> Self {
        Self {
            bits: (0..n).map(f).collect(),
        }
    }

    /// Bit u of `mask` becomes the state of vertex u (n <= 63).
    pub fn from_mask(mask: u64, n: usize) -> Self {
        Self::from_fn(n, |u| (mask >> u) & 1 == 1)
    }

    /// Character i of the string is the state of vertex i.
    pub fn from_bitstring(s: &str) -> Result<Self> {
        let mut bits = Vec::with_capacity(s.len());
        for c in s.chars() {
            match c {
                '0' => bits.push(false),
                '1' => bits.push(true),
                _ => return Err(Error::Domain("bitstring must contain only 0 and 1")),
            }
        }
        Ok(Self { bits })
    }

    pub fn to_bitstring(&self) -> String {
        self.bits
            .iter()
            .map(|&b| if b { '1' } else { '0' })
            .collect()
    }

    pub fn to_mask(&self) -> u64 {
        debug_assert!(self.len() <= 63);
        self.bits
            .iter()
            .enumerate()
            .fold(0u64, |m, (u, &b)| if b { m | (1 << u) } else { m })
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn get(&self, u: usize) -> bool {
        self.bits[u]
    }

    pub fn set(&mut self, u: usize, b: bool) {
        self.bits[u] = b;
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(u, _)| u)
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_all_one(&self) -> bool {
        self.bits.iter().all(|&b| b)
    }

    pub fn is_all_zero(&self) -> bool {
        self.bits.iter().all(|&b| !b)
    }

    /// Consensus test: all-zero or all-one.
    pub fn is_consensus(&self) -> bool {
        self.is_all_zero() || self.is_all_one()
    }
}

// ---------------------------------------------------------------------------
// Initial distributions
// ---------------------------------------------------------------------------

/// Initial state distribution of a cycle.
#[derive(Clone, Debug, PartialEq)]
pub enum InitialDistribution {
    /// Independent Bernoulli(p) per vertex.
    ProductBernoulli { p: f64 },
    /// Product Bernoulli(p) conditioned on not starting in consensus
    /// (rejection sampled), for identities that assume mu(C) = 0.
    ProductBernoulliTransient { p: f64 },
    /// Deterministic start.
    Fixed(StateVector),
    /// Uniform over the 2^n - 2 transient states.
    UniformTransients,
}

impl InitialDistribution {
    pub fn validate(&self, n: usize) -> Result<()> {
        match self {
            Self::ProductBernoulli { p } | Self::ProductBernoulliTransient { p } => {
                if !(*p > 0.0 && *p < 1.0) {
                    return Err(Error::Domain("bernoulli parameter must be in (0,1)"));
                }
            }
            Self::Fixed(x) => {
                if x.len() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        got: x.len(),
                    });
                }
            }
            Self::UniformTransients => {
                if n < 2 {
                    return Err(Error::Domain("uniform transient start needs n >= 2"));
                }
            }
        }
        Ok(())
    }

    /// Mass placed on the all-zero consensus state.
    pub fn mass_consensus_zero(&self, n: usize) -> f64 {
        match self {
            Self::ProductBernoulli { p } => crate::math::powi(1.0 - p, n as u32),
            Self::ProductBernoulliTransient { .. } | Self::UniformTransients => 0.0,
            Self::Fixed(x) => {
                if x.is_all_zero() {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Mass placed on the all-one consensus state.
    pub fn mass_consensus_one(&self, n: usize) -> f64 {
        match self {
            Self::ProductBernoulli { p } => crate::math::powi(*p, n as u32),
            Self::ProductBernoulliTransient { .. } | Self::UniformTransients => 0.0,
            Self::Fixed(x) => {
                if x.is_all_one() {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Total mass on the two consensus states.
    pub fn mass_consensus(&self, n: usize) -> f64 {
        self.mass_consensus_zero(n) + self.mass_consensus_one(n)
    }

    /// Probability of one concrete state.
    pub fn prob_mass(&self, x: &StateVector) -> f64 {
        let n = x.len();
        match self {
            Self::ProductBernoulli { p } => {
                let k = x.count_ones() as u32;
                crate::math::powi(*p, k) * crate::math::powi(1.0 - p, (n - k as usize) as u32)
            }
            Self::ProductBernoulliTransient { p } => {
                if x.is_consensus() {
                    0.0
                } else {
                    let base = Self::ProductBernoulli { p: *p };
                    base.prob_mass(x) / (1.0 - base.mass_consensus(n))
                }
            }
            Self::Fixed(y) => {
                if x == y {
                    1.0
                } else {
                    0.0
                }
            }
            Self::UniformTransients => {
                if x.is_consensus() {
                    0.0
                } else {
                    1.0 / (crate::math::powi(2.0, n as u32) - 2.0)
                }
            }
        }
    }

    fn sample_with(&self, n: usize, mut draw: impl FnMut(u64) -> u64) -> StateVector {
        let unit = |x: u64| crate::rng::unit_f64(x);
        match self {
            Self::ProductBernoulli { p } => StateVector::from_fn(n, |u| unit(draw(u as u64)) < *p),
            Self::ProductBernoulliTransient { p } => {
                for attempt in 0u64.. {
                    let x =
                        StateVector::from_fn(n, |u| unit(draw(attempt * n as u64 + u as u64)) < *p);
                    if !x.is_consensus() {
                        return x;
                    }
                }
                unreachable!()
            }
            Self::Fixed(x) => x.clone(),
            Self::UniformTransients => {
                // Rejection from the uniform distribution over all states is
                // exactly uniform over the transient ones.
                for attempt in 0u64.. {
                    let x =
                        StateVector::from_fn(n, |u| draw(attempt * n as u64 + u as u64) & 1 == 1);
                    if !x.is_consensus() {
                        return x;
                    }
                }
                unreachable!()
            }
        }
    }

    /// Samples a start state from the cycle's Init lane.
    pub fn sample(&self, n: usize, stream: &CycleStream) -> StateVector {
        self.sample_with(n, |slot| stream.draw(Lane::Init, 0, slot))
    }

    /// Samples a start state from a sequential generator.
    pub fn sample_seq(&self, n: usize, rng: &mut SplitMix64) -> StateVector {
        self.sample_with(n, |_| rng.next_u64())
    }
}

// ---------------------------------------------------------------------------
// Dynamics
// ---------------------------------------------------------------------------

/// Linear noisy model: updates use probability eps + (1 - 2 eps) a_u^T x.
#[derive(Clone, Debug)]
pub struct NoisyModel {
    a: InteractionMatrix,
    epsilon: f64,
}

impl NoisyModel {
    pub fn new(a: InteractionMatrix, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon <= 0.5) {
            return Err(Error::Domain("noise level must be in (0, 1/2]"));
        }
        Ok(Self { a, epsilon })
    }

    pub fn matrix(&self) -> &InteractionMatrix {
        &self.a
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Update probability for one vertex given the current state.
    pub fn update_prob(&self, u: usize, x: &StateVector) -> f64 {
        self.epsilon + (1.0 - 2.0 * self.epsilon) * self.a.row_dot(u, x)
    }
}

/// One of the three dynamics over a borrowed model.
#[derive(Clone, Copy, Debug)]
pub enum Dynamics<'a> {
    Sync(&'a InteractionMatrix),
    Async(&'a InteractionMatrix),
    Noisy(&'a NoisyModel),
}

/// Tag describing which dynamics produced a trace.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DynamicsKind {
    Sync,
    Async,
    Noisy,
}

impl Dynamics<'_> {
    pub fn n(&self) -> usize {
        match self {
            Dynamics::Sync(a) | Dynamics::Async(a) => a.n(),
            Dynamics::Noisy(m) => m.matrix().n(),
        }
    }

    pub fn kind(&self) -> DynamicsKind {
        match self {
            Dynamics::Sync(_) => DynamicsKind::Sync,
            Dynamics::Async(_) => DynamicsKind::Async,
            Dynamics::Noisy(_) => DynamicsKind::Noisy,
        }
    }

    pub fn epsilon(&self) -> Option<f64> {
        match self {
            Dynamics::Noisy(m) => Some(m.epsilon()),
            _ => None,
        }
    }

    fn is_absorbing(&self) -> bool {
        !matches!(self, Dynamics::Noisy(_))
    }
}

/// Which draw a step is asking for.
enum Draw {
    Activation,
    Update(usize),
}

fn step_with(
    dynamics: Dynamics<'_>,
    x: &StateVector,
    mut draw: impl FnMut(Draw) -> u64,
) -> (StateVector, Option<usize>) {
    let n = dynamics.n();
    debug_assert_eq!(x.len(), n);
    match dynamics {
        Dynamics::Sync(a) => {
            let next = StateVector::from_fn(n, |u| {
                let q = a.row_dot(u, x);
                crate::rng::unit_f64(draw(Draw::Update(u))) < q
            });
            (next, None)
        }
        Dynamics::Async(a) => {
            let i = ((draw(Draw::Activation) as u128 * n as u128) >> 64) as usize;
            let mut next = x.clone();
            let q = a.row_dot(i, x);
            next.set(i, crate::rng::unit_f64(draw(Draw::Update(i))) < q);
            (next, Some(i))
        }
        Dynamics::Noisy(m) => {
            let next = StateVector::from_fn(n, |u| {
                let q = m.update_prob(u, x);
                crate::rng::unit_f64(draw(Draw::Update(u))) < q
            });
            (next, None)
        }
    }
}

/// One transition of the chosen dynamics driven by a sequential generator.
/// Returns the next state and, for the asynchronous dynamics, the activated
/// vertex.
pub fn step(
    dynamics: Dynamics<'_>,
    x: &StateVector,
    rng: &mut SplitMix64,
) -> (StateVector, Option<usize>) {
    step_with(dynamics, x, |_| rng.next_u64())
}

fn step_counter(
    dynamics: Dynamics<'_>,
    x: &StateVector,
    stream: &CycleStream,
    t: u64,
) -> (StateVector, Option<usize>) {
    step_with(dynamics, x, |d| match d {
        Draw::Activation => stream.draw(Lane::Activate, t, 0),
        Draw::Update(u) => stream.draw(Lane::Update, t, u as u64),
    })
}

// ---------------------------------------------------------------------------
// Trajectories and traces
// ---------------------------------------------------------------------------

/// One realization X_0 .. X_tau, ending at the first time t >= 1 with X_t in
/// consensus.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    states: Vec<StateVector>,
    events: Option<Vec<usize>>,
}

impl Trajectory {
    pub fn new(states: Vec<StateVector>, events: Option<Vec<usize>>) -> Self {
        Self { states, events }
    }

    /// All states X_0 ..= X_tau.
    pub fn states(&self) -> &[StateVector] {
        &self.states
    }

    /// Consensus time: number of transitions taken (>= 1 for completed runs).
    pub fn tau(&self) -> usize {
        self.states.len() - 1
    }

    pub fn initial(&self) -> &StateVector {
        &self.states[0]
    }

    pub fn last(&self) -> &StateVector {
        self.states.last().expect("nonempty")
    }

    /// true when absorbed at all-ones.
    pub fn absorbed_to_one(&self) -> bool {
        self.last().is_all_one()
    }

    /// Activated vertex per step (asynchronous runs only).
    pub fn events(&self) -> Option<&[usize]> {
        self.events.as_deref()
    }

    /// States of the observation window: X_0 .. X_{tau-1}, plus the final
    /// consensus state when `include_final` is set.
    pub fn window(&self, include_final: bool) -> &[StateVector] {
        if include_final {
            &self.states
        } else {
            &self.states[..self.states.len() - 1]
        }
    }
}

/// Metadata identifying the model that generated a trace.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceMeta {
    pub kind: DynamicsKind,
    pub n: usize,
    pub epsilon: Option<f64>,
    pub seed: u64,
}

/// m concatenated cycles of the extended process.
#[derive(Clone, Debug)]
pub struct ExtendedTrace {
    cycles: Vec<Trajectory>,
    include_final: bool,
    meta: TraceMeta,
}

impl ExtendedTrace {
    pub fn from_cycles(cycles: Vec<Trajectory>, include_final: bool, meta: TraceMeta) -> Self {
        Self {
            cycles,
            include_final,
            meta,
        }
    }

    pub fn cycles(&self) -> &[Trajectory] {
        &self.cycles
    }

    pub fn len(&self) -> usize {
        self.cycles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cycles.is_empty()
    }

    pub fn include_final(&self) -> bool {
        self.include_final
    }

    pub fn meta(&self) -> &TraceMeta {
        &self.meta
    }

    pub fn n(&self) -> usize {
        self.meta.n
    }

    /// Sum of consensus times over all cycles.
    pub fn total_tau(&self) -> u64 {
        self.cycles.iter().map(|c| c.tau() as u64).sum()
    }
}

// ---------------------------------------------------------------------------
// Runners
// ---------------------------------------------------------------------------

/// Runs one cycle of the extended process: a fresh start from `mu`, stepped
/// until the first t >= 1 with X_t in consensus. Cycle draws depend only on
/// (master_seed, cycle), so cycles can run on any worker in any order.
pub fn run_cycle(
    dynamics: Dynamics<'_>,
    mu: &InitialDistribution,
    master_seed: u64,
    cycle: u64,
    cap: u64,
) -> Result<Trajectory> {
    if !dynamics.is_absorbing() {
        return Err(Error::Domain(
            "noisy dynamics do not absorb; use step directly",
        ));
    }
    let n = dynamics.n();
    mu.validate(n)?;
    let stream = CycleStream::new(master_seed, cycle);
    let mut states = Vec::new();
    let mut events = match dynamics {
        Dynamics::Async(_) => Some(Vec::new()),
        _ => None,
    };
    let mut x = mu.sample(n, &stream);
    states.push(x.clone());
    for t in 0..cap {
        let (next, activated) = step_counter(dynamics, &x, &stream, t);
        if let (Some(ev), Some(i)) = (events.as_mut(), activated) {
            ev.push(i);
        }
        states.push(next.clone());
        x = next;
        if x.is_consensus() {
            return Ok(Trajectory::new(states, events));
        }
    }
    Err(Error::CapExceeded {
        cap,
        partial: Box::new(Trajectory::new(states, events)),
    })
}

/// Runs a single realization to consensus (cycle 0 of the extended process).
pub fn run_to_consensus(
    dynamics: Dynamics<'_>,
    mu: &InitialDistribution,
    seed: u64,
    cap: u64,
) -> Result<Trajectory> {
    run_cycle(dynamics, mu, seed, 0, cap)
}

/// Runs m independent cycles, each freshly started from `mu`.
pub fn run_extended(
    dynamics: Dynamics<'_>,
    mu: &InitialDistribution,
    m: u64,
    master_seed: u64,
    include_final: bool,
    cap: u64,
) -> Result<ExtendedTrace> {
    if m == 0 {
        return Err(Error::Domain("cycle count must be >= 1"));
    }
    let mut cycles = Vec::with_capacity(m as usize);
    for c in 0..m {
        cycles.push(run_cycle(dynamics, mu, master_seed, c, cap)?);
    }
    let meta = TraceMeta {
        kind: dynamics.kind(),
        n: dynamics.n(),
        epsilon: dynamics.epsilon(),
        seed: master_seed,
    };
    Ok(ExtendedTrace::from_cycles(cycles, include_final, meta))
}

// ---------------------------------------------------------------------------
// Diagnostics
// ---------------------------------------------------------------------------

/// Pointwise variance diagnostics at one state.
#[derive(Clone, Debug)]
pub struct VarianceDiagnostics {
    /// V_pi(x) = pi^T x (1 - pi^T x)
    pub v_pi: f64,
    /// V_{a_u}(x) per vertex.
    pub per_vertex: Vec<f64>,
    /// sum_u pi_u^2 V_{a_u}(x)
    pub weighted_sum: f64,
}

pub fn variance_diagnostics(
    a: &InteractionMatrix,
    pi: &crate::model::StationaryDistribution,
    x: &StateVector,
) -> VarianceDiagnostics {
    let per_vertex: Vec<f64> = (0..a.n())
        .map(|u| {
            let q = a.row_dot(u, x);
            q * (1.0 - q)
        })
        .collect();
    let weighted_sum = per_vertex.iter().zip(pi.pi()).map(|(v, p)| p * p * v).sum();
    VarianceDiagnostics {
        v_pi: pi.v_pi(x),
        per_vertex,
        weighted_sum,
    }
}

/// Long-run occupancy of the noisy dynamics with batch-mean standard errors.
#[derive(Clone, Debug)]
pub struct NoisyLongRun {
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    pub steps: u64,
    pub batches: usize,
}

/// Simulates the noisy dynamics for `steps` transitions after `burn_in` and
/// reports per-vertex occupancy with batch-mean standard errors.
pub fn noisy_long_run(
    model: &NoisyModel,
    steps: u64,
    burn_in: u64,
    seed: u64,
) -> Result<NoisyLongRun> {
    if steps == 0 {
        return Err(Error::Domain("need at least one measured step"));
    }
    let n = model.matrix().n();
    let stream = CycleStream::new(seed, 0);
    let mut x = StateVector::zeros(n);
    for t in 0..burn_in {
        x = step_counter(Dynamics::Noisy(model), &x, &stream, t).0;
    }
    let batches = 100usize.min(steps as usize).max(1);
    let batch_len = steps / batches as u64;
    let mut batch_means = vec![vec![0.0f64; n]; batches];
    let mut t = burn_in;
    for (b, means) in batch_means.iter_mut().enumerate() {
        let len = if b + 1 == batches {
            steps - batch_len * (batches as u64 - 1)
        } else {
            batch_len
        };
        for _ in 0..len {
            x = step_counter(Dynamics::Noisy(model), &x, &stream, t).0;
            t += 1;
            for u in x.ones() {
                means[u] += 1.0;
            }
        }
        for m in means.iter_mut() {
            *m /= len as f64;
        }
    }
    let mean: Vec<f64> = (0..n)
        .map(|u| batch_means.iter().map(|b| b[u]).sum::<f64>() / batches as f64)
        .collect();
    let stderr: Vec<f64> = (0..n)
        .map(|u| {
            if batches < 2 {
                return f64::INFINITY;
            }
            let m = mean[u];
            let var = batch_means
                .iter()
                .map(|b| (b[u] - m) * (b[u] - m))
                .sum::<f64>()
                / (batches as f64 - 1.0);
            crate::math::sqrt(var / batches as f64)
        })
        .collect();
    Ok(NoisyLongRun {
        mean,
        stderr,
        steps,
        batches,
    })
}

// ---------------------------------------------------------------------------
