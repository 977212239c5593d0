//! Built-in verification suite: implementation invariants gate the exit
//! status; comparisons of the closed-form consensus-time bounds against
//! exact fundamental-matrix values are reported as informational lines (the
//! bounds' stated constants do not hold on every small instance — see the
//! project README).

use voterlab_core::chain::ExactChain;
use voterlab_core::consensus::{drift_identity_check, DriftEvidence};
use voterlab_core::correlation::{
    eig_bounds, exact_correlation, lyapunov_check, lyapunov_solve_noisy, q_matrix, ChainMoments,
};
use voterlab_core::inference::{gradient_hessian, kl_bernoulli, log_likelihood};
use voterlab_core::instances;
use voterlab_core::linalg::{self, Mat};
use voterlab_core::model::{
    build_matrix, conductance, phi_a, phi_ratio, psi_tilde, stationary_distribution, Graph,
    MatrixKind, PhiMode, PhiVariant, PsiMode,
};
use voterlab_core::pathmodel::{hitting_prob, PathModel};
use voterlab_core::rng::SplitMix64;
use voterlab_core::simulate::{
    run_cycle, run_extended, Dynamics, DynamicsKind, InitialDistribution, StateVector,
    DEFAULT_STEP_CAP,
};

type CheckResult = Result<(), String>;

struct Check {
    name: &'static str,
    run: Box<dyn Fn(bool) -> CheckResult>,
}

fn fail(msg: String) -> CheckResult {
    Err(msg)
}

fn check_phi_complete_closed_form(full: bool) -> CheckResult {
    let top = if full { 12 } else { 8 };
    for n in 3..=top {
        let a = instances::complete_uniform(n);
        let pi = stationary_distribution(&a).map_err(|e| e.to_string())?;
        let phi = phi_a(&a, &pi, PhiVariant::Sync, PhiMode::Exact)
            .map_err(|e| e.to_string())?
            .value;
        let closed = (n as f64 - 2.0) / ((n as f64 - 1.0) * (n as f64 - 1.0));
        if (phi - closed).abs() > 1e-12 {
            return fail(format!("K{n}: enumerated {phi} vs closed form {closed}"));
        }
    }
    Ok(())
}

fn check_witnesses(_full: bool) -> CheckResult {
    for inst in instances::quick_library() {
        if inst.matrix.n() > 8 {
            continue;
        }
        let pi = stationary_distribution(&inst.matrix).map_err(|e| e.to_string())?;
        let phi = phi_a(&inst.matrix, &pi, PhiVariant::Sync, PhiMode::Exact)
            .map_err(|e| e.to_string())?;
        let re = phi_ratio(&inst.matrix, &pi, PhiVariant::Sync, phi.witness);
        if re != phi.value {
            return fail(format!(
                "{}: witness re-evaluates to {re}, reported {}",
                inst.name, phi.value
            ));
        }
    }
    Ok(())
}

fn check_lazy_stationary(_full: bool) -> CheckResult {
    for g in [
        Graph::path(5),
        Graph::star(4),
        Graph::barbell(3),
        Graph::cycle(7),
    ] {
        let a = build_matrix(&g, MatrixKind::Lazy).map_err(|e| e.to_string())?;
        let pi = stationary_distribution(&a).map_err(|e| e.to_string())?;
        let dv = g.degree_sum() as f64;
        for u in 0..g.n() {
            let expected = g.degree(u) as f64 / dv;
            if (pi.pi()[u] - expected).abs() > 1e-12 {
                return fail(format!(
                    "vertex {u}: pi {} vs d_u/d(V) {expected}",
                    pi.pi()[u]
                ));
            }
        }
    }
    Ok(())
}

fn check_cheeger(full: bool) -> CheckResult {
    let mut graphs = vec![
        Graph::path(4),
        Graph::cycle(6),
        Graph::complete(5),
        Graph::star(5),
        Graph::barbell(3),
        Graph::cycle(3).with_all_self_loops(),
    ];
    if full {
        graphs.push(Graph::cycle(10));
        graphs.push(Graph::complete(8));
        graphs.push(Graph::path(8));
        graphs.push(Graph::barbell(5));
    }
    for g in graphs {
        let c = conductance(&g).map_err(|e| e.to_string())?;
        if !c.cheeger_ok {
            return fail(format!(
                "n={}: lambda2/2={} phi_G={} sqrt(2 lambda2)={}",
                g.n(),
                c.lambda2 / 2.0,
                c.phi_g,
                (2.0 * c.lambda2).sqrt()
            ));
        }
    }
    Ok(())
}

fn check_martingale(_full: bool) -> CheckResult {
    let a = voterlab_core::model::InteractionMatrix::new(vec![
        vec![0.10, 0.30, 0.20, 0.25, 0.15],
        vec![0.05, 0.45, 0.10, 0.20, 0.20],
        vec![0.25, 0.05, 0.30, 0.10, 0.30],
        vec![0.20, 0.20, 0.20, 0.20, 0.20],
        vec![0.15, 0.25, 0.25, 0.15, 0.20],
    ])
    .map_err(|e| e.to_string())?;
    let pi = stationary_distribution(&a).map_err(|e| e.to_string())?;
    for mask in 1u64..31 {
        let x = StateVector::from_mask(mask, 5);
        let one_step: f64 = (0..5).map(|u| pi.pi()[u] * a.row_dot(u, &x)).sum();
        if (one_step - pi.dot(&x)).abs() > 1e-12 {
            return fail(format!(
                "mask {mask}: E[pi^T X'] = {one_step} vs {}",
                pi.dot(&x)
            ));
        }
    }
    Ok(())
}

fn check_drift_identity(_full: bool) -> CheckResult {
    for (a, name) in [
        (instances::complete_uniform(3), "k3"),
        (
            build_matrix(&Graph::path(3), MatrixKind::Lazy).unwrap(),
            "p3lazy",
        ),
    ] {
        let pi = stationary_distribution(&a).map_err(|e| e.to_string())?;
        let mu = InitialDistribution::UniformTransients;
        let r =
            drift_identity_check(&a, &pi, &mu, DriftEvidence::Exact).map_err(|e| e.to_string())?;
        if r.absolute > 1e-10 {
            return fail(format!("{name}: residual {}", r.absolute));
        }
    }
    Ok(())
}

fn check_absorption(_full: bool) -> CheckResult {
    let a = instances::complete_uniform(4);
    let pi = stationary_distribution(&a).map_err(|e| e.to_string())?;
    let chain = ExactChain::new(&a, DynamicsKind::Sync).map_err(|e| e.to_string())?;
    let b = chain.absorb_to_one().map_err(|e| e.to_string())?;
    for mask in 0u64..16 {
        if (b[mask as usize] - pi.dot_mask(mask)).abs() > 1e-10 {
            return fail(format!(
                "mask {mask}: {} vs pi mass {}",
                b[mask as usize],
                pi.dot_mask(mask)
            ));
        }
    }
    Ok(())
}

fn check_correlation_identities(_full: bool) -> CheckResult {
    let a = instances::complete_uniform(4);
    let pi = stationary_distribution(&a).map_err(|e| e.to_string())?;
    // Lyapunov residual and Q pi under unconditioned product starts.
    let mu = InitialDistribution::ProductBernoulli { p: 0.5 };
    let m = exact_correlation(&a, &mu, true).map_err(|e| e.to_string())?;
    let moments = ChainMoments::exact(&a, &mu).map_err(|e| e.to_string())?;
    let q = q_matrix(&a, &pi, &mu, &moments).map_err(|e| e.to_string())?;
    let resid = lyapunov_check(&m.m, &a, &q.q);
    if resid > 1e-8 {
        return fail(format!("lyapunov residual {resid}"));
    }
    if q.qpi_residual > 1e-8 {
        return fail(format!("Q pi residual {}", q.qpi_residual));
    }
    let eb = eig_bounds(&m.m, &pi, &q.q).map_err(|e| e.to_string())?;
    if !eb.holds {
        return fail(format!(
            "eig bound {} above lambda_min {}",
            eb.bound, eb.lambda1_m
        ));
    }
    // Include/exclude window relation under conditioned starts.
    let mu_t = InitialDistribution::ProductBernoulliTransient { p: 0.5 };
    let m_inc = exact_correlation(&a, &mu_t, true).map_err(|e| e.to_string())?;
    let m_exc = exact_correlation(&a, &mu_t, false).map_err(|e| e.to_string())?;
    let chain = ExactChain::new(&a, DynamicsKind::Sync).map_err(|e| e.to_string())?;
    let e0 = chain.e0_tau_transient(&mu_t).map_err(|e| e.to_string())?;
    let mut pi_x0 = 0.0;
    for mask in 1u64..15 {
        pi_x0 += mu_t.prob_mass(&StateVector::from_mask(mask, 4)) * pi.dot_mask(mask);
    }
    for i in 0..4 {
        for j in 0..4 {
            let rhs = (e0 * m_exc.m[(i, j)] + pi_x0) / (e0 + 1.0);
            if (m_inc.m[(i, j)] - rhs).abs() > 1e-10 {
                return fail(format!("window relation off at ({i},{j})"));
            }
        }
    }
    Ok(())
}

fn check_noisy_fixed_point(_full: bool) -> CheckResult {
    let a = instances::complete_uniform(4);
    for eps in [0.05, 0.25] {
        let fp = lyapunov_solve_noisy(&a, eps).map_err(|e| e.to_string())?;
        for u in 0..4 {
            if (fp.mean_state[u] - 0.5).abs() > 1e-10 || (fp.m[(u, u)] - 0.5).abs() > 1e-12 {
                return fail(format!("eps {eps}: mean/diag off at {u}"));
            }
        }
        if fp.lambda_min < eps * eps - 1e-10 {
            return fail(format!(
                "eps {eps}: lambda_min {} below eps^2",
                fp.lambda_min
            ));
        }
        let rb = (1.0 - 2.0 * eps) * (1.0 - 2.0 * eps) + 0.05;
        if fp.observed_rate > rb {
            return fail(format!("eps {eps}: rate {} above {rb}", fp.observed_rate));
        }
    }
    Ok(())
}

fn check_kl(full: bool) -> CheckResult {
    let grid = if full { 100 } else { 20 };
    let alpha = 0.05;
    for i in 0..grid {
        for j in 0..grid {
            let p = (0.05 + 0.9 * i as f64 / (grid - 1) as f64).clamp(0.05, 0.95);
            let q = (0.05 + 0.9 * j as f64 / (grid - 1) as f64).clamp(0.05, 0.95);
            let k = kl_bernoulli(p, q, alpha).map_err(|e| e.to_string())?;
            if !k.lower_ok || !k.upper_ok {
                return fail(format!("sandwich violated at p={p} q={q}: {k:?}"));
            }
        }
    }
    Ok(())
}

/// Independent oracle for the path hitting probabilities: an augmented
/// birth-death chain with an absorbing "hit" state entered whenever the
/// target vertex activates while its sampled neighborhood is mixed.
fn path_hit_oracle(p: &[f64], u: usize) -> Result<Vec<f64>, String> {
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
    // Unknowns h(1..n-1); h(0) = h(n) = 0.
    let dim = n - 1;
    let mut sys = Mat::zeros(dim, dim);
    let mut rhs = vec![0.0; dim];
    for y in 1..n {
        let row = y - 1;
        let hit = if hit_state(y) { 1.0 / nf } else { 0.0 };
        // Down-move driven by vertex y, unless that activation is the hit.
        let down = if y == u { 0.0 } else { p[y - 1] / nf };
        // Up-move driven by vertex y+1, unless that is the hit.
        let up = if y + 1 == u { 0.0 } else { (1.0 - p[y]) / nf };
        let total = hit + down + up;
        sys[(row, row)] = total;
        if y > 1 {
            sys[(row, row - 1)] = -down;
        }
        if y + 1 < n {
            sys[(row, row + 1)] = -up;
        }
        rhs[row] = hit;
    }
    linalg::solve(sys, rhs).map_err(|e| e.to_string())
}

fn check_path_model(full: bool) -> CheckResult {
    // Half-bias specializations.
    let m10 = PathModel::half_bias(10).map_err(|e| e.to_string())?;
    let h = hitting_prob(&m10, 3, 1).map_err(|e| e.to_string())?;
    if (h - 2.0 / 5.0).abs() > 1e-12 {
        return fail(format!("half-bias h(3,1) = {h}, want 2/5"));
    }
    let h = hitting_prob(&m10, 2, 5).map_err(|e| e.to_string())?;
    if (h - 10.0 / 17.0).abs() > 1e-12 {
        return fail(format!("half-bias h(2,5) = {h}, want 10/17"));
    }
    // General biases against the augmented-chain oracle.
    let n = if full { 12 } else { 8 };
    let mut rng = SplitMix64::new(20240);
    let p: Vec<f64> = (0..n).map(|_| 0.1 + 0.8 * rng.next_f64()).collect();
    let model = PathModel::new(n, p.clone()).map_err(|e| e.to_string())?;
    for u in 1..=n {
        let oracle = path_hit_oracle(&p, u)?;
        for k in 1..n {
            let closed = hitting_prob(&model, u, k).map_err(|e| e.to_string())?;
            if (closed - oracle[k - 1]).abs() > 1e-10 {
                return fail(format!(
                    "u={u} k={k}: closed {closed} vs oracle {}",
                    oracle[k - 1]
                ));
            }
        }
    }
    Ok(())
}

fn check_determinism(_full: bool) -> CheckResult {
    let a = instances::complete_uniform(5);
    let mu = InitialDistribution::ProductBernoulliTransient { p: 0.5 };
    let t1 = run_extended(Dynamics::Sync(&a), &mu, 12, 99, false, DEFAULT_STEP_CAP)
        .map_err(|e| e.to_string())?;
    let t2 = run_extended(Dynamics::Sync(&a), &mu, 12, 99, false, DEFAULT_STEP_CAP)
        .map_err(|e| e.to_string())?;
    for (c1, c2) in t1.cycles().iter().zip(t2.cycles()) {
        if c1 != c2 {
            return fail("repeated run differs".into());
        }
    }
    for c in (0..12u64).rev() {
        let t = run_cycle(Dynamics::Sync(&a), &mu, 99, c, DEFAULT_STEP_CAP)
            .map_err(|e| e.to_string())?;
        if t != t1.cycles()[c as usize] {
            return fail(format!("cycle {c} differs when generated out of order"));
        }
    }
    Ok(())
}

fn check_gradient(_full: bool) -> CheckResult {
    let a_star = instances::complete_uniform(3);
    let mu = InitialDistribution::ProductBernoulliTransient { p: 0.5 };
    let trace = run_extended(Dynamics::Sync(&a_star), &mu, 30, 4, false, DEFAULT_STEP_CAP)
        .map_err(|e| e.to_string())?;
    let a = Mat::from_rows(&[
        vec![0.2, 0.3, 0.3],
        vec![0.3, 0.2, 0.3],
        vec![0.3, 0.3, 0.2],
    ]);
    let (grad, _) = gradient_hessian(&a, &trace).map_err(|e| e.to_string())?;
    let h = 1e-6;
    for u in 0..3 {
        for v in 0..3 {
            let mut ap = a.clone();
            ap[(u, v)] += h;
            let mut am = a.clone();
            am[(u, v)] -= h;
            let fp = log_likelihood(&ap, &trace, 1e-9, None)
                .map_err(|e| e.to_string())?
                .value;
            let fm = log_likelihood(&am, &trace, 1e-9, None)
                .map_err(|e| e.to_string())?
                .value;
            let fd = (fp - fm) / (2.0 * h);
            let g = grad[(u, v)];
            if (fd - g).abs() / g.abs().max(1.0) > 1e-5 {
                return fail(format!("({u},{v}): fd {fd} vs analytic {g}"));
            }
        }
    }
    Ok(())
}

fn check_psi_symmetry(_full: bool) -> CheckResult {
    let g = Graph::cycle(5);
    let a = build_matrix(&g, MatrixKind::Lazy).map_err(|e| e.to_string())?;
    let pi = stationary_distribution(&a).map_err(|e| e.to_string())?;
    let psi = psi_tilde(&a, &pi, PsiMode::Exact).map_err(|e| e.to_string())?;
    let c = conductance(&g).map_err(|e| e.to_string())?;
    if psi.value > c.phi_g + 1e-12 {
        return fail(format!("psi~ {} above phi_G {}", psi.value, c.phi_g));
    }
    Ok(())
}

/// Informational comparison of the closed-form consensus-time bounds against
/// exact fundamental-matrix values; does not affect the exit status.
fn report_bound_comparisons(full: bool) {
    let lib = if full {
        instances::library()
    } else {
        instances::quick_library()
    };
    println!("\n  consensus-time bound comparisons (informational):");
    for inst in lib {
        let pi = match stationary_distribution(&inst.matrix) {
            Ok(p) => p,
            Err(e) => {
                println!("    {:14} skipped: {e}", inst.name);
                continue;
            }
        };
        let phi = match phi_a(&inst.matrix, &pi, PhiVariant::Sync, PhiMode::Exact) {
            Ok(r) => r.value,
            Err(e) => {
                println!("    {:14} skipped: {e}", inst.name);
                continue;
            }
        };
        let chain = ExactChain::new(&inst.matrix, DynamicsKind::Sync).unwrap();
        let tau = chain.expected_tau().unwrap();
        let max_tau = tau
            .iter()
            .enumerate()
            .filter(|(m, _)| !chain.is_consensus_mask(*m as u64))
            .map(|(_, &t)| t)
            .fold(0.0f64, f64::max);
        let bound = (1.0 / (2.0 * pi.pi_star())).ln() / phi;
        let c2 = if max_tau <= bound + 1e-9 {
            "BOUND-HOLDS"
        } else {
            "BOUND-VIOLATED"
        };
        let t1 = match chain.exponential_moment(1.0 - phi) {
            Ok(w) => {
                let min_v = pi.min_transient_v_pi();
                let mut ok = true;
                for mask in 1..(chain.state_count() as u64 - 1) {
                    if w[mask as usize] > pi.v_pi_mask(mask) / min_v + 1e-9 {
                        ok = false;
                        break;
                    }
                }
                if ok {
                    "BOUND-HOLDS"
                } else {
                    "BOUND-VIOLATED"
                }
            }
            Err(_) => "MOMENT-INFINITE",
        };
        println!(
            "    {:14} max E[tau]={:8.3} expected-time bound={:8.3} {:15} exp-moment {}",
            inst.name, max_tau, bound, c2, t1
        );
    }
    println!("    (the stated bound constants are not attainable on every instance;");
    println!("     the provable survival decay P[tau>t] <= pf (1-phi)^t is checked in tests)");
}

pub fn run(full: bool) -> bool {
    let checks: Vec<Check> = vec![
        Check {
            name: "phi closed form on complete graphs",
            run: Box::new(check_phi_complete_closed_form),
        },
        Check {
            name: "witness re-evaluation",
            run: Box::new(check_witnesses),
        },
        Check {
            name: "lazy stationary distribution",
            run: Box::new(check_lazy_stationary),
        },
        Check {
            name: "cheeger sandwich",
            run: Box::new(check_cheeger),
        },
        Check {
            name: "martingale one-step expectation",
            run: Box::new(check_martingale),
        },
        Check {
            name: "drift identity (exact)",
            run: Box::new(check_drift_identity),
        },
        Check {
            name: "absorption probabilities",
            run: Box::new(check_absorption),
        },
        Check {
            name: "correlation identities",
            run: Box::new(check_correlation_identities),
        },
        Check {
            name: "noisy fixed point",
            run: Box::new(check_noisy_fixed_point),
        },
        Check {
            name: "bernoulli KL sandwich",
            run: Box::new(check_kl),
        },
        Check {
            name: "path hitting probabilities",
            run: Box::new(check_path_model),
        },
        Check {
            name: "sampled-neighbor functional vs conductance",
            run: Box::new(check_psi_symmetry),
        },
        Check {
            name: "trace determinism",
            run: Box::new(check_determinism),
        },
        Check {
            name: "likelihood gradient vs finite differences",
            run: Box::new(check_gradient),
        },
    ];
    let mut ok = true;
    println!(
        "verification suite ({}):",
        if full { "full" } else { "quick" }
    );
    for check in &checks {
        match (check.run)(full) {
            Ok(()) => println!("  PASS {}", check.name),
            Err(msg) => {
                ok = false;
                println!("  FAIL {} -- {msg}", check.name);
            }
        }
    }
    report_bound_comparisons(full);
    println!(
        "\n{}",
        if ok {
            "all invariant checks passed"
        } else {
            "INVARIANT FAILURES"
        }
    );
    ok
}
