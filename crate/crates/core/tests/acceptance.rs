//! Acceptance suite: one test per criterion, each printing a PASS line (or
//! failing with a table of the offending values). Criteria 1 (cycle part),
//! 2, and 3 encode closed forms and bound constants that exact computation
//! refutes; those tests implement the criteria as stated and are expected to
//! stay red — see the test output for the per-instance evidence.
//!
//! Run with `cargo test -p voterlab-core --test acceptance -- --nocapture`.

use voterlab_core::chain::ExactChain;
use voterlab_core::consensus::{
    bound_report, drift_identity_check, empirical_tau_stats, mu_prefactor, DriftEvidence,
};
use voterlab_core::correlation::{
    exact_correlation, lyapunov_check, lyapunov_solve_noisy, mu_moment_matrix, q_matrix,
    ChainMoments,
};
use voterlab_core::inference::{
    estimate, gradient_hessian, kl_bernoulli, log_likelihood, LossConfig,
};
use voterlab_core::instances::{complete_uniform, cycle_uniform_neighbor, library};
use voterlab_core::linalg::{self, Mat};
use voterlab_core::model::{
    build_matrix, phi_a, stationary_distribution, Graph, InteractionMatrix, MatrixKind, PhiMode,
    PhiVariant,
};
use voterlab_core::pathmodel::{hitting_prob, simulate_path, PathModel};
use voterlab_core::rng::SplitMix64;
use voterlab_core::simulate::{
    noisy_long_run, run_extended, Dynamics, DynamicsKind, ExtendedTrace, InitialDistribution,
    NoisyModel, StateVector, DEFAULT_STEP_CAP,
};

fn phi_exact(a: &InteractionMatrix) -> (f64, voterlab_core::model::StationaryDistribution) {
    let pi = stationary_distribution(a).expect("stationary distribution");
    let phi = phi_a(a, &pi, PhiVariant::Sync, PhiMode::Exact)
        .expect("phi exact")
        .value;
    (phi, pi)
}

// ---------------------------------------------------------------------------
// Criterion 1: closed-form partition functional on K_n and C_n
// ---------------------------------------------------------------------------

#[test]
fn c01_closed_form_phi() {
    let start = std::time::Instant::now();
    let mut failures = Vec::new();
    for n in 3..=12usize {
        let a = complete_uniform(n);
        let (phi, _) = phi_exact(&a);
        let closed = (n as f64 - 2.0) / ((n as f64 - 1.0) * (n as f64 - 1.0));
        let ok = (phi - closed).abs() <= 1e-12;
        println!(
            "  K{n:<2}: enumerated {phi:.12}  closed form {closed:.12}  {}",
            if ok { "ok" } else { "MISMATCH" }
        );
        if !ok {
            failures.push(format!("K{n}"));
        }
    }
    for n in 3..=12usize {
        let a = cycle_uniform_neighbor(n);
        let (phi, _) = phi_exact(&a);
        let closed = if n % 2 == 0 {
            4.0 / (n * n) as f64
        } else {
            4.0 / (n * n - 1) as f64
        };
        let ok = (phi - closed).abs() <= 1e-12;
        println!(
            "  C{n:<2}: enumerated {phi:.12}  stated form {closed:.12}  {}",
            if ok {
                "ok"
            } else {
                "MISMATCH (near-alternating partitions beat arcs)"
            }
        );
        if !ok {
            failures.push(format!("C{n}"));
        }
    }
    println!("  runtime {:.2?}", start.elapsed());
    assert!(
        start.elapsed().as_secs() < 5,
        "criterion 1 runtime budget exceeded"
    );
    assert!(
        failures.is_empty(),
        "criterion 1: FAIL — stated cycle closed forms are not the enumerated minimum \
         (even cycles have bipartite support and a vanishing functional; odd cycles are \
         minimized by near-alternating partitions): {failures:?}"
    );
    println!("criterion 1: PASS — closed forms match enumeration for K_n and C_n, n in [3,12]");
}

// ---------------------------------------------------------------------------
// Criterion 2: expected consensus time bound over the library
// ---------------------------------------------------------------------------

#[test]
fn c02_expected_time_bound() {
    let start = std::time::Instant::now();
    let mut total_violations = 0usize;
    for inst in library() {
        let (phi, pi) = phi_exact(&inst.matrix);
        let bound = (1.0 / (2.0 * pi.pi_star())).ln() / phi;
        let chain = ExactChain::new(&inst.matrix, DynamicsKind::Sync).unwrap();
        let tau = chain.expected_tau().unwrap();
        let mut worst: f64 = 0.0;
        let mut violations = 0usize;
        for mask in 1..(chain.state_count() as u64 - 1) {
            let t = tau[mask as usize];
            if t > bound + 1e-9 {
                violations += 1;
                worst = worst.max(t);
            }
        }
        println!(
            "  {:14} bound {:8.3}  max exact E[tau] {:8.3}  violations {:4}/{}",
            inst.name,
            bound,
            tau.iter().cloned().fold(0.0f64, f64::max),
            violations,
            chain.transient_count()
        );
        total_violations += violations;
    }
    println!("  runtime {:.2?}", start.elapsed());
    assert!(
        start.elapsed().as_secs() < 60,
        "criterion 2 runtime budget exceeded"
    );
    assert_eq!(
        total_violations, 0,
        "criterion 2: FAIL — the stated expected-time bound constant does not hold on every \
         instance (the underlying drift argument needs its Lyapunov function to be >= 1 on the \
         absorbing set); the provable survival decay is verified in the unit suite"
    );
    println!("criterion 2: PASS — exact E[tau] within the stated bound on the whole library");
}

// ---------------------------------------------------------------------------
// Criterion 3: exponential moment bound over the library
// ---------------------------------------------------------------------------

#[test]
fn c03_exponential_moment_bound() {
    let mut total_violations = 0usize;
    for inst in library() {
        let (phi, pi) = phi_exact(&inst.matrix);
        let chain = ExactChain::new(&inst.matrix, DynamicsKind::Sync).unwrap();
        let min_v = pi.min_transient_v_pi();
        match chain.exponential_moment(1.0 - phi) {
            Ok(w) => {
                let mut violations = 0usize;
                let mut worst_ratio: f64 = 0.0;
                for mask in 1..(chain.state_count() as u64 - 1) {
                    let bound = pi.v_pi_mask(mask) / min_v;
                    if w[mask as usize] > bound + 1e-9 {
                        violations += 1;
                        worst_ratio = worst_ratio.max(w[mask as usize] / bound);
                    }
                }
                println!(
                    "  {:14} finite moment; violations {:4}/{} (worst ratio {:.2})",
                    inst.name,
                    violations,
                    chain.transient_count(),
                    worst_ratio
                );
                total_violations += violations;
            }
            Err(_) => {
                println!(
                    "  {:14} moment INFINITE at theta* (transient spectral radius >= 1 - phi)",
                    inst.name
                );
                total_violations += 1;
            }
        }
    }
    assert_eq!(
        total_violations, 0,
        "criterion 3: FAIL — the stated exponential-moment bound fails on every library \
         instance (tau >= 1 alone forces E[e^(theta tau)] > 1 at starts attaining min V_pi, \
         and for complete graphs the moment at theta* is infinite)"
    );
    println!("criterion 3: PASS — exponential moment within the stated prefactor everywhere");
}

// ---------------------------------------------------------------------------
// Criterion 4: drift identity, exact and Monte Carlo
// ---------------------------------------------------------------------------

#[test]
fn c04_drift_identity() {
    // Exact mode on n <= 8 instances.
    let cases: Vec<(String, InteractionMatrix)> = vec![
        ("k3".into(), complete_uniform(3)),
        ("k5".into(), complete_uniform(5)),
        ("k6".into(), complete_uniform(6)),
        (
            "c5_lazy".into(),
            build_matrix(&Graph::cycle(5), MatrixKind::Lazy).unwrap(),
        ),
        (
            "p4_lazy".into(),
            build_matrix(&Graph::path(4), MatrixKind::Lazy).unwrap(),
        ),
        (
            "star6_lazy".into(),
            build_matrix(&Graph::star(5), MatrixKind::Lazy).unwrap(),
        ),
    ];
    for (name, a) in &cases {
        let pi = stationary_distribution(a).unwrap();
        for mu in [
            InitialDistribution::UniformTransients,
            InitialDistribution::ProductBernoulliTransient { p: 0.35 },
        ] {
            let r = drift_identity_check(a, &pi, &mu, DriftEvidence::Exact).unwrap();
            assert!(
                r.absolute <= 1e-10,
                "criterion 4: exact residual {} on {name} with {mu:?}",
                r.absolute
            );
        }
        // Fixed transient start as well.
        let x = StateVector::from_mask(1, a.n());
        let mu = InitialDistribution::Fixed(x);
        let r = drift_identity_check(a, &pi, &mu, DriftEvidence::Exact).unwrap();
        assert!(
            r.absolute <= 1e-10,
            "criterion 4: fixed-start residual {}",
            r.absolute
        );
    }
    // Monte Carlo mode: K3 uniform with 10^4 cycles, relative residual <= 3%.
    let a = complete_uniform(3);
    let pi = stationary_distribution(&a).unwrap();
    let mu = InitialDistribution::ProductBernoulliTransient { p: 0.5 };
    let trace = run_extended(
        Dynamics::Sync(&a),
        &mu,
        10_000,
        404,
        false,
        DEFAULT_STEP_CAP,
    )
    .unwrap();
    let r = drift_identity_check(&a, &pi, &mu, DriftEvidence::Trace(&trace)).unwrap();
    assert!(
        r.relative <= 0.03,
        "criterion 4: Monte Carlo relative residual {} above 3%",
        r.relative
    );
    println!(
        "criterion 4: PASS — exact residual <= 1e-10 on {} instances; MC relative residual {:.4}",
        cases.len(),
        r.relative
    );
}

// ---------------------------------------------------------------------------
// Criterion 5: tail/quantile coverage on K6
// ---------------------------------------------------------------------------

#[test]
fn c05_sum_quantile_coverage() {
    let start = std::time::Instant::now();
    let a = complete_uniform(6);
    let (phi, pi) = phi_exact(&a);
    let mu = InitialDistribution::ProductBernoulliTransient { p: 0.5 };
    let m = 50u64;
    let delta = 0.05;
    let prefactor = mu_prefactor(&pi, &mu).unwrap();
    let rep = bound_report(phi, pi.pi_star(), prefactor, m, delta, &[]).unwrap();
    let experiments = 500u64;
    let mut exceed = 0u64;
    for e in 0..experiments {
        let trace = run_extended(
            Dynamics::Sync(&a),
            &mu,
            m,
            50_000 + e,
            false,
            DEFAULT_STEP_CAP,
        )
        .unwrap();
        let avg = trace.total_tau() as f64 / m as f64;
        if avg >= rep.sum_quantile {
            exceed += 1;
        }
    }
    let freq = exceed as f64 / experiments as f64;
    let sigma = (delta * (1.0 - delta) / experiments as f64).sqrt();
    println!(
        "criterion 5: quantile {} exceeded in {exceed}/{experiments} experiments \
         (freq {freq:.4}, threshold {:.4}); runtime {:.2?}",
        rep.sum_quantile,
        delta + 3.0 * sigma,
        start.elapsed()
    );
    assert!(
        start.elapsed().as_secs() < 120,
        "criterion 5 runtime budget exceeded"
    );
    assert!(
        freq <= delta + 3.0 * sigma,
        "criterion 5: exceedance frequency {freq} above {}",
        delta + 3.0 * sigma
    );
    println!("criterion 5: PASS");
}

// ---------------------------------------------------------------------------
// Criterion 6: gradient and Hessian against finite differences
// ---------------------------------------------------------------------------

fn random_interior_candidate(n: usize, rng: &mut SplitMix64) -> Mat {
    let mut m = Mat::zeros(n, n);
    for u in 0..n {
        let raw: Vec<f64> = (0..n).map(|_| 0.1 + 0.9 * rng.next_f64()).collect();
        let total: f64 = raw.iter().sum();
        let target = 0.5 + 0.4 * rng.next_f64();
        for v in 0..n {
            m[(u, v)] = target * raw[v] / total;
        }
    }
    m
}

#[test]
fn c06_gradient_finite_differences() {
    let a_star = complete_uniform(4);
    let mu = InitialDistribution::ProductBernoulliTransient { p: 0.5 };
    let trace = run_extended(
        Dynamics::Sync(&a_star),
        &mu,
        50,
        606,
        false,
        DEFAULT_STEP_CAP,
    )
    .unwrap();
    let mut rng = SplitMix64::new(2026);
    let n = 4;
    let h = 1e-6;
    let mut worst_rel: f64 = 0.0;
    for _ in 0..20 {
        let a = random_interior_candidate(n, &mut rng);
        let (grad, _) = gradient_hessian(&a, &trace).unwrap();
        for u in 0..n {
            for v in 0..n {
                let mut ap = a.clone();
                ap[(u, v)] += h;
                let mut am = a.clone();
                am[(u, v)] -= h;
                let fp = log_likelihood(&ap, &trace, 1e-9, None).unwrap().value;
                let fm = log_likelihood(&am, &trace, 1e-9, None).unwrap().value;
                let fd = (fp - fm) / (2.0 * h);
                let rel = (fd - grad[(u, v)]).abs() / grad[(u, v)].abs().max(1.0);
                worst_rel = worst_rel.max(rel);
            }
        }
    }
    assert!(
        worst_rel <= 1e-5,
        "criterion 6: worst gradient relative error {worst_rel}"
    );

    // Cross-row second differences vanish: the likelihood is separable
    // across rows, so the mixed partial is identically zero; h can be large
    // since there is no truncation error, which keeps rounding noise small.
    let h2 = 1e-3;
    let a = random_interior_candidate(n, &mut rng);
    let mut worst_cross: f64 = 0.0;
    for (u, v, w, z) in [(0usize, 1usize, 1usize, 2usize), (2, 0, 3, 3), (1, 3, 0, 0)] {
        let f = |d1: f64, d2: f64| {
            let mut b = a.clone();
            b[(u, v)] += d1;
            b[(w, z)] += d2;
            log_likelihood(&b, &trace, 1e-9, None).unwrap().value
        };
        let mixed = (f(h2, h2) - f(h2, -h2) - f(-h2, h2) + f(-h2, -h2)) / (4.0 * h2 * h2);
        worst_cross = worst_cross.max(mixed.abs());
    }
    assert!(
        worst_cross <= 1e-7,
        "criterion 6: cross-row second difference {worst_cross}"
    );
    println!(
        "criterion 6: PASS — worst gradient rel err {worst_rel:.2e}, worst cross-row mixed \
         partial {worst_cross:.2e}"
    );
}

// ---------------------------------------------------------------------------
// Criterion 7: estimation error rate on K5
// ---------------------------------------------------------------------------

#[test]
fn c07_estimation_rate() {
    let start = std::time::Instant::now();
    let a_star = complete_uniform(5);
    let a_star_mat = a_star.to_mat();
    let support: Vec<Vec<bool>> = a_star
        .rows()
        .iter()
        .map(|r| r.iter().map(|&x| x > 0.0).collect())
        .collect();
    let mu = InitialDistribution::ProductBernoulli { p: 0.5 };
    let ms = [250u64, 1000, 4000];
    let seeds = 20u64;
    let mut medians = Vec::new();
    for (mi, &m) in ms.iter().enumerate() {
        let mut errs = Vec::new();
        for s in 0..seeds {
            let seed = 70_000 + 1000 * mi as u64 + s;
            let trace = run_extended(
                Dynamics::Sync(&a_star),
                &mu,
                m,
                seed,
                false,
                DEFAULT_STEP_CAP,
            )
            .unwrap();
            let mut config = LossConfig::new(0.0).with_support(support.clone());
            config.tol = 1e-8;
            config.max_iters = 600;
            let res = estimate(&trace, &config, Some(&a_star_mat)).unwrap();
            let f = res.frob_error.unwrap();
            errs.push(f * f);
        }
        errs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = 0.5 * (errs[9] + errs[10]);
        println!("  m = {m:5}: median ||A^ - A*||_F^2 = {median:.6e}");
        medians.push(median);
    }
    let xs: Vec<f64> = ms.iter().map(|&m| (m as f64).ln()).collect();
    let ys: Vec<f64> = medians.iter().map(|e| e.ln()).collect();
    let xbar = xs.iter().sum::<f64>() / 3.0;
    let ybar = ys.iter().sum::<f64>() / 3.0;
    let slope = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - xbar) * (y - ybar))
        .sum::<f64>()
        / xs.iter().map(|x| (x - xbar) * (x - xbar)).sum::<f64>();
    println!(
        "criterion 7: log-log slope {slope:.3}; runtime {:.2?}",
        start.elapsed()
    );
    assert!(
        start.elapsed().as_secs() < 600,
        "criterion 7 runtime budget exceeded"
    );
    assert!(
        (-1.3..=-0.7).contains(&slope),
        "criterion 7: slope {slope} outside [-1.3, -0.7]"
    );
    println!("criterion 7: PASS");
}

// ---------------------------------------------------------------------------
// Criterion 8: martingale property of the gradient at the true matrix
// ---------------------------------------------------------------------------

#[test]
fn c08_martingale_gradient() {
    let a_star = complete_uniform(5);
    let a_star_mat = a_star.to_mat();
    let mu = InitialDistribution::ProductBernoulliTransient { p: 0.5 };
    let n = 5;
    let reps = 200u64;
    let mut sums = Mat::zeros(n, n);
    let mut sq_sums = Mat::zeros(n, n);
    for r in 0..reps {
        let trace = run_extended(
            Dynamics::Sync(&a_star),
            &mu,
            20,
            80_000 + r,
            false,
            DEFAULT_STEP_CAP,
        )
        .unwrap();
        let (grad, _) = gradient_hessian(&a_star_mat, &trace).unwrap();
        for u in 0..n {
            for v in 0..n {
                sums[(u, v)] += grad[(u, v)];
                sq_sums[(u, v)] += grad[(u, v)] * grad[(u, v)];
            }
        }
    }
    let mut worst_z: f64 = 0.0;
    for u in 0..n {
        for v in 0..n {
            let mean = sums[(u, v)] / reps as f64;
            let var = (sq_sums[(u, v)] / reps as f64 - mean * mean).max(0.0);
            let se = (var / reps as f64).sqrt();
            if se == 0.0 {
                assert_eq!(mean, 0.0, "criterion 8: degenerate coordinate ({u},{v})");
                continue;
            }
            worst_z = worst_z.max(mean.abs() / se);
        }
    }
    assert!(
        worst_z <= 3.0,
        "criterion 8: some gradient coordinate deviates {worst_z:.2} standard errors from 0"
    );
    println!("criterion 8: PASS — worst coordinate z-score {worst_z:.2} over {reps} traces");
}

// ---------------------------------------------------------------------------
// Criterion 9: correlation theory on exact instances
// ---------------------------------------------------------------------------

#[test]
fn c09_correlation_theory() {
    // lambda_min(E0[X0 X0^T]) = p(1-p) exactly for product-Bernoulli starts.
    for p in [0.3, 0.5] {
        for n in [4usize, 6] {
            let m = mu_moment_matrix(&InitialDistribution::ProductBernoulli { p }, n).unwrap();
            let min = linalg::sym_eigen(&m).unwrap().values[0];
            assert!(
                (min - p * (1.0 - p)).abs() <= 1e-12,
                "criterion 9: lambda_min {min} vs p(1-p) {}",
                p * (1.0 - p)
            );
        }
    }

    let cases: Vec<(String, InteractionMatrix)> = vec![
        ("k4".into(), complete_uniform(4)),
        ("k5".into(), complete_uniform(5)),
        (
            "c5_lazy".into(),
            build_matrix(&Graph::cycle(5), MatrixKind::Lazy).unwrap(),
        ),
        (
            "p4_lazy".into(),
            build_matrix(&Graph::path(4), MatrixKind::Lazy).unwrap(),
        ),
    ];
    for (name, a) in &cases {
        let n = a.n();
        let pi = stationary_distribution(a).unwrap();
        for p in [0.3, 0.5] {
            // Eigenvalue lower bound with conditioned starts (mu(C) = 0).
            let mu_t = InitialDistribution::ProductBernoulliTransient { p };
            let m_exc = exact_correlation(a, &mu_t, false).unwrap();
            let chain = ExactChain::new(a, DynamicsKind::Sync).unwrap();
            let e0_tau = chain.e0_tau_transient(&mu_t).unwrap();
            let mu_moment = mu_moment_matrix(&mu_t, n).unwrap();
            let mu_min = linalg::sym_eigen(&mu_moment).unwrap().values[0];
            assert!(
                m_exc.lambda_min >= mu_min / e0_tau - 1e-8,
                "criterion 9 ({name}, p={p}): lambda_min(M') {} below {}",
                m_exc.lambda_min,
                mu_min / e0_tau
            );

            // Include/exclude window relation.
            let m_inc = exact_correlation(a, &mu_t, true).unwrap();
            let mut e0_x0 = vec![0.0; n];
            for mask in 1..((1u64 << n) - 1) {
                let w = mu_t.prob_mass(&StateVector::from_mask(mask, n));
                for (u, e) in e0_x0.iter_mut().enumerate() {
                    if (mask >> u) & 1 == 1 {
                        *e += w;
                    }
                }
            }
            let pi_x0: f64 = pi.pi().iter().zip(&e0_x0).map(|(p, x)| p * x).sum();
            for i in 0..n {
                for j in 0..n {
                    let rhs = (e0_tau * m_exc.m[(i, j)] + pi_x0) / (e0_tau + 1.0);
                    assert!(
                        (m_inc.m[(i, j)] - rhs).abs() <= 1e-8,
                        "criterion 9 ({name}, p={p}): window relation off at ({i},{j})"
                    );
                }
            }

            // Lyapunov residual with unconditioned product starts.
            let mu = InitialDistribution::ProductBernoulli { p };
            let m_full = exact_correlation(a, &mu, true).unwrap();
            let moments = ChainMoments::exact(a, &mu).unwrap();
            let q = q_matrix(a, &pi, &mu, &moments).unwrap();
            let resid = lyapunov_check(&m_full.m, a, &q.q);
            assert!(
                resid <= 1e-8,
                "criterion 9 ({name}, p={p}): Lyapunov residual {resid}"
            );
        }
    }

    // Q pi = 0 holds on vertex-transitive instances (uniform stationary
    // distribution); on paths and stars the residual matrix is genuinely
    // not PSD and pi leaves its kernel (see the unit test documenting the
    // counterexample).
    let transitive: Vec<(String, InteractionMatrix)> = vec![
        ("k4".into(), complete_uniform(4)),
        ("k5".into(), complete_uniform(5)),
        (
            "c4_lazy".into(),
            build_matrix(&Graph::cycle(4), MatrixKind::Lazy).unwrap(),
        ),
        (
            "c5_lazy".into(),
            build_matrix(&Graph::cycle(5), MatrixKind::Lazy).unwrap(),
        ),
    ];
    for (name, a) in &transitive {
        let pi = stationary_distribution(a).unwrap();
        for p in [0.3, 0.5] {
            let mu = InitialDistribution::ProductBernoulli { p };
            let moments = ChainMoments::exact(a, &mu).unwrap();
            let q = q_matrix(a, &pi, &mu, &moments).unwrap();
            assert!(
                q.qpi_residual <= 1e-8,
                "criterion 9 ({name}, p={p}): Q pi residual {}",
                q.qpi_residual
            );
        }
    }
    println!("criterion 9: PASS — correlation identities hold to 1e-8 on exact instances");
}

// ---------------------------------------------------------------------------
// Criterion 10: noisy model
// ---------------------------------------------------------------------------

#[test]
fn c10_noisy_model() {
    // Long-run occupancy 1/2 per vertex within 3 batch-mean standard errors.
    let a = complete_uniform(4);
    for eps in [0.05, 0.25] {
        let model = NoisyModel::new(a.clone(), eps).unwrap();
        let run = noisy_long_run(&model, 1_000_000, 10_000, 1_001).unwrap();
        for u in 0..4 {
            let dev = (run.mean[u] - 0.5).abs();
            assert!(
                dev <= 3.0 * run.stderr[u],
                "criterion 10 (eps={eps}): vertex {u} mean {} +- {}",
                run.mean[u],
                run.stderr[u]
            );
        }
    }
    // Fixed point: rate and spectral floor over a grid of instances.
    let grid: Vec<(String, InteractionMatrix)> = vec![
        ("k4".into(), complete_uniform(4)),
        (
            "c6_lazy".into(),
            build_matrix(&Graph::cycle(6), MatrixKind::Lazy).unwrap(),
        ),
        (
            "p5_lazy".into(),
            build_matrix(&Graph::path(5), MatrixKind::Lazy).unwrap(),
        ),
        (
            "star6_lazy".into(),
            build_matrix(&Graph::star(5), MatrixKind::Lazy).unwrap(),
        ),
    ];
    for (name, a) in &grid {
        for eps in [0.05, 0.1, 0.25, 0.4] {
            let fp = lyapunov_solve_noisy(a, eps).unwrap();
            let rate_bound = (1.0 - 2.0 * eps) * (1.0 - 2.0 * eps) + 0.05;
            assert!(
                fp.observed_rate <= rate_bound,
                "criterion 10 ({name}, eps={eps}): rate {} above {rate_bound}",
                fp.observed_rate
            );
            assert!(
                fp.lambda_min >= eps * eps - 1e-10,
                "criterion 10 ({name}, eps={eps}): lambda_min {} below eps^2",
                fp.lambda_min
            );
        }
    }
    println!("criterion 10: PASS — stationary mean 1/2, contraction rate, and spectral floor");
}

// ---------------------------------------------------------------------------
// Criterion 11: path model
// ---------------------------------------------------------------------------

/// Independent oracle: augmented birth-death chain with an absorbing "hit"
/// state entered when the target vertex activates while its sampled
/// neighborhood is mixed.
fn path_hit_oracle(p: &[f64], u: usize) -> Vec<f64> {
    let n = p.len();
    let nf = n as f64;
    let hit_state = |y: usize| -> bool {
        if u == 1 {
            y == 1
        } else if u == n {
            y == n - 1
        } else {
            y == u - 1 || y == u
        }
    };
    let dim = n - 1;
    let mut sys = Mat::zeros(dim, dim);
    let mut rhs = vec![0.0; dim];
    for y in 1..n {
        let row = y - 1;
        let hit = if hit_state(y) { 1.0 / nf } else { 0.0 };
        let down = if y == u { 0.0 } else { p[y - 1] / nf };
        let up = if y + 1 == u { 0.0 } else { (1.0 - p[y]) / nf };
        sys[(row, row)] = hit + down + up;
        if y > 1 {
            sys[(row, row - 1)] = -down;
        }
        if y + 1 < n {
            sys[(row, row + 1)] = -up;
        }
        rhs[row] = hit;
    }
    linalg::solve(sys, rhs).unwrap()
}

#[test]
fn c11_path_model() {
    // Closed form vs the first-step linear solve, random biases, n <= 30.
    let mut rng = SplitMix64::new(1111);
    for n in [5usize, 12, 30] {
        let p: Vec<f64> = (0..n).map(|_| 0.1 + 0.8 * rng.next_f64()).collect();
        let model = PathModel::new(n, p.clone()).unwrap();
        for u in 1..=n {
            let oracle = path_hit_oracle(&p, u);
            for k in 1..n {
                let closed = hitting_prob(&model, u, k).unwrap();
                assert!(
                    (closed - oracle[k - 1]).abs() <= 1e-10,
                    "criterion 11: n={n} u={u} k={k}: closed {closed} vs oracle {}",
                    oracle[k - 1]
                );
            }
        }
    }
    // Half-bias specializations reproduced exactly.
    let n = 10;
    let m = PathModel::half_bias(n).unwrap();
    for k in 1..n {
        for u in 1..=n {
            if k < u {
                let h = hitting_prob(&m, u, k).unwrap();
                let closed = 2.0 * k as f64 / (2.0 * u as f64 - 1.0);
                assert!(
                    (h - closed).abs() <= 1e-12,
                    "criterion 11: half-bias below: u={u} k={k}"
                );
            }
            if k > u {
                let h = hitting_prob(&m, u, k).unwrap();
                let closed = 2.0 * (n - k) as f64 / (2.0 * (n - u) as f64 + 1.0);
                assert!(
                    (h - closed).abs() <= 1e-12,
                    "criterion 11: half-bias above: u={u} k={k}"
                );
            }
        }
    }
    // Monte Carlo frequencies within 3 sigma at 1e5 reps (n=8, k=3).
    let n = 8;
    let k = 3;
    let model = PathModel::half_bias(n).unwrap();
    let sim = simulate_path(&model, k, 100_000, 727, 100_000_000).unwrap();
    for u in 1..=n {
        let h = hitting_prob(&model, u, k).unwrap();
        let dev = (sim.freq[u - 1] - h).abs();
        assert!(
            dev <= 3.0 * sim.stderr[u - 1],
            "criterion 11: vertex {u} frequency {} vs closed form {h} (3 sigma {})",
            sim.freq[u - 1],
            3.0 * sim.stderr[u - 1]
        );
    }
    println!("criterion 11: PASS — closed forms, specializations, and Monte Carlo agree");
}

// ---------------------------------------------------------------------------
// Criterion 12: Bernoulli KL sandwich
// ---------------------------------------------------------------------------

#[test]
fn c12_kl_sandwich() {
    let alpha = 0.05;
    let grid = 100;
    let mut violations = 0usize;
    for i in 0..grid {
        for j in 0..grid {
            let p = (0.05 + 0.9 * i as f64 / (grid - 1) as f64).clamp(0.05, 0.95);
            let q = (0.05 + 0.9 * j as f64 / (grid - 1) as f64).clamp(0.05, 0.95);
            let k = kl_bernoulli(p, q, alpha).unwrap();
            if !k.lower_ok || !k.upper_ok {
                violations += 1;
            }
        }
    }
    assert_eq!(
        violations, 0,
        "criterion 12: {violations} sandwich violations"
    );
    println!("criterion 12: PASS — KL sandwich holds on the {grid}x{grid} grid");
}

// ---------------------------------------------------------------------------
// Supplementary: regularization-rule concentration and Taylor-error bounds
// ---------------------------------------------------------------------------

#[test]
fn regularization_rule_bound_concentration() {
    // The high-probability bound on ||grad loglik(A*)||_inf holds in at
    // least 95% of 200 independent experiments at delta = 0.05.
    let a_star = complete_uniform(5);
    let a_star_mat = a_star.to_mat();
    let (phi, pi) = phi_exact(&a_star);
    let mu = InitialDistribution::ProductBernoulliTransient { p: 0.5 };
    let m = 1000u64;
    let mut holds = 0usize;
    let reps = 200u64;
    for r in 0..reps {
        let trace = run_extended(
            Dynamics::Sync(&a_star),
            &mu,
            m,
            90_000 + r,
            false,
            DEFAULT_STEP_CAP,
        )
        .unwrap();
        let (grad, _) = gradient_hessian(&a_star_mat, &trace).unwrap();
        let inputs = voterlab_core::inference::TheoryInputs {
            n: 5,
            m,
            alpha: a_star.min_positive_entry(),
            pi_star: pi.pi_star(),
            phi_a_star: phi,
            e0_tau: trace.total_tau() as f64 / m as f64,
            lambda_min_corr: 1.0,
            delta: 0.05,
            epsilon: 0.1,
            c1: 1.0,
            c2: 1.0,
            s: 20,
            grad_infnorm: Some(grad.max_abs()),
        };
        let rep = voterlab_core::inference::theory_report(&inputs).unwrap();
        if rep.grad_bound_holds == Some(true) {
            holds += 1;
        }
    }
    assert!(
        holds as f64 >= 0.95 * reps as f64,
        "gradient bound held in only {holds}/{reps} experiments"
    );
    println!("regularization rule: bound held in {holds}/{reps} experiments");
}

#[test]
fn taylor_error_expectation_dominated_by_curvature() {
    // E0[h(Delta; X)] >= m E0[tau] lambda_min(M') ||Delta||_F^2, checked
    // per-cycle with a 3-sigma band over 50 random sparse directions.
    let a = complete_uniform(4);
    let n = 4;
    let mu = InitialDistribution::ProductBernoulliTransient { p: 0.5 };
    let chain = ExactChain::new(&a, DynamicsKind::Sync).unwrap();
    let e0_tau = chain.e0_tau_transient(&mu).unwrap();
    let lambda_min = exact_correlation(&a, &mu, false).unwrap().lambda_min;
    let m = 2000u64;
    let trace = run_extended(Dynamics::Sync(&a), &mu, m, 91_000, false, DEFAULT_STEP_CAP).unwrap();
    let mut rng = SplitMix64::new(424_242);
    for _ in 0..50 {
        let mut delta = Mat::zeros(n, n);
        let mut frob_sq = 0.0;
        for _ in 0..5 {
            let u = rng.index(n);
            let v = rng.index(n);
            let val = 0.6 * rng.next_f64() - 0.3;
            frob_sq += val * val + 2.0 * val * delta[(u, v)];
            delta[(u, v)] += val;
        }
        if frob_sq <= 1e-12 {
            continue;
        }
        // Per-cycle h values for the CLT band.
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for cycle in trace.cycles() {
            let mut h = 0.0;
            for x in cycle.window(false) {
                for u in 0..n {
                    let mut d = 0.0;
                    for v in x.ones() {
                        d += delta[(u, v)];
                    }
                    h += d * d;
                }
            }
            sum += h;
            sum_sq += h * h;
        }
        let mean = sum / m as f64;
        let var = (sum_sq / m as f64 - mean * mean).max(0.0);
        let se = (var / m as f64).sqrt();
        let bound = e0_tau * lambda_min * frob_sq;
        assert!(
            mean >= bound - 3.0 * se,
            "per-cycle E[h] {mean} below curvature bound {bound} (3 se {})",
            3.0 * se
        );
    }
    println!("Taylor-error curvature bound held for 50 sparse directions");
}

#[test]
fn h_delta_expectation_matches_occupation_measure() {
    // The Monte Carlo mean of h(Delta; X) per cycle equals the exact
    // occupation-measure value sum_y occ(y) sum_u (Delta_u^T y)^2 (n = 3).
    let a = complete_uniform(3);
    let n = 3;
    let mu = InitialDistribution::ProductBernoulliTransient { p: 0.5 };
    let chain = ExactChain::new(&a, DynamicsKind::Sync).unwrap();
    let occ = chain.occupancy(&mu).unwrap();
    let mut delta = Mat::zeros(n, n);
    delta[(0, 1)] = 0.2;
    delta[(1, 2)] = -0.15;
    delta[(2, 0)] = 0.1;
    delta[(2, 2)] = 0.05;
    let mut exact = 0.0;
    for (mask, &o) in occ.iter().enumerate() {
        if o == 0.0 {
            continue;
        }
        for u in 0..n {
            let mut d = 0.0;
            for v in 0..n {
                if (mask >> v) & 1 == 1 {
                    d += delta[(u, v)];
                }
            }
            exact += o * d * d;
        }
    }
    let m = 20_000u64;
    let trace = run_extended(Dynamics::Sync(&a), &mu, m, 92_000, false, DEFAULT_STEP_CAP).unwrap();
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for cycle in trace.cycles() {
        let single = ExtendedTrace::from_cycles(vec![cycle.clone()], false, trace.meta().clone());
        let h = voterlab_core::inference::h_delta(&delta, &single).unwrap();
        sum += h;
        sum_sq += h * h;
    }
    let mean = sum / m as f64;
    let var = (sum_sq / m as f64 - mean * mean).max(0.0);
    let se = (var / m as f64).sqrt();
    assert!(
        (mean - exact).abs() <= 3.0 * se,
        "MC mean {mean} vs exact {exact} (3 se {})",
        3.0 * se
    );
    println!("h expectation: MC {mean:.6} vs exact {exact:.6}");
}

// ---------------------------------------------------------------------------
// Supplementary: empirical tail behavior feeding criterion 5's machinery
// ---------------------------------------------------------------------------

#[test]
fn empirical_moments_and_tail_on_k8() {
    // Reported (not asserted) relations of the moment bounds; the k = 1
    // bound holds on K8 while k = 2 is already violated by the exact second
    // moment — the same constant defect as criteria 2 and 3.
    let a = complete_uniform(8);
    let (phi, pi) = phi_exact(&a);
    let mu = InitialDistribution::ProductBernoulliTransient { p: 0.5 };
    let trace = run_extended(
        Dynamics::Sync(&a),
        &mu,
        10_000,
        888,
        false,
        DEFAULT_STEP_CAP,
    )
    .unwrap();
    let stats = empirical_tau_stats(&trace).unwrap();
    let rep = bound_report(
        phi,
        pi.pi_star(),
        mu_prefactor(&pi, &mu).unwrap(),
        trace.len() as u64,
        0.05,
        &[1, 2, 3],
    )
    .unwrap();
    assert!(
        stats.moment(1) <= rep.moment_bounds[0].1,
        "k=1 moment {} above bound {}",
        stats.moment(1),
        rep.moment_bounds[0].1
    );
    for (k, bound) in &rep.moment_bounds {
        println!(
            "  K8 moment k={k}: empirical {:.3e} vs stated bound {:.3e}",
            stats.moment(*k),
            bound
        );
    }
    // The empirical average of tau over the trace sits below the reported
    // quantile at delta = 0.05.
    let avg = stats.mean;
    assert!(
        avg <= rep.sum_quantile,
        "average {avg} above quantile {}",
        rep.sum_quantile
    );
}
