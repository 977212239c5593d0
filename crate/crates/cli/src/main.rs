//! Command-line front end binding the library into reproducible experiments.

mod formats;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use voterlab_core::consensus::{self, bound_report, empirical_tau_stats};
use voterlab_core::correlation::{self, ChainMoments};
use voterlab_core::inference::{self, LossConfig, TheoryInputs};
use voterlab_core::model::{
    self, build_matrix, phi_a, stationary_distribution, MatrixKind, PhiMode, PhiVariant,
    PHI_EXACT_LIMIT, PSI_EXACT_LIMIT,
};
use voterlab_core::pathmodel::{self, PathModel};
use voterlab_core::simulate::{run_cycle, Dynamics, ExtendedTrace, TraceMeta, DEFAULT_STEP_CAP};

#[derive(Parser)]
#[command(
    name = "voterlab",
    version,
    about = "Voter model dynamics and inference"
)]
struct Cli {
    /// Master seed; required by every command that samples.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores, or env VOTERLAB_THREADS).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum KindArg {
    Lazy,
    #[value(alias = "uniform_neighbor")]
    UniformNeighbor,
}

impl From<KindArg> for MatrixKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Lazy => MatrixKind::Lazy,
            KindArg::UniformNeighbor => MatrixKind::UniformNeighbor,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum VariantArg {
    Sync,
    Async,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum LyapunovMode {
    Check,
    Solve,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SuiteArg {
    Quick,
    Full,
}

#[derive(Subcommand)]
enum Command {
    /// Build an interaction matrix from a graph and write it as JSON.
    GenMatrix {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Partition functionals, conductance, and comparison inequalities.
    Spectral {
        #[arg(long, conflicts_with = "graph")]
        matrix: Option<PathBuf>,
        #[arg(long, requires = "kind")]
        graph: Option<PathBuf>,
        #[arg(long, value_enum)]
        kind: Option<KindArg>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample m cycles of the extended process into a JSONL trace.
    Simulate {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        mu: String,
        #[arg(long)]
        m: u64,
        #[arg(long, value_enum, default_value = "sync")]
        variant: VariantArg,
        #[arg(long, default_value_t = false)]
        include_final: bool,
        #[arg(long, default_value_t = DEFAULT_STEP_CAP)]
        cap: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Consensus-time bounds with optional Monte Carlo comparison.
    Bounds {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        mu: String,
        /// Monte Carlo cycles (0 disables simulation).
        #[arg(long, default_value_t = 0)]
        mc: u64,
        #[arg(long, default_value_t = 0.05)]
        delta: f64,
        /// Comma-separated moment orders for the moment bounds.
        #[arg(long, default_value = "1,2,3")]
        moments: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Estimate the interaction matrix from a trace.
    Estimate {
        #[arg(long)]
        trace: PathBuf,
        /// "auto" (needs --astar) or a nonnegative float.
        #[arg(long)]
        lambda: String,
        /// "known" (support taken from --astar) or "unknown".
        #[arg(long, default_value = "unknown")]
        support: String,
        #[arg(long)]
        astar: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-6)]
        clip: f64,
        #[arg(long, default_value_t = 2000)]
        max_iters: u32,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Lyapunov residual check (voter model) or fixed-point solve (noisy).
    Lyapunov {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        mu: Option<String>,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long, value_enum)]
        mode: LyapunovMode,
        #[arg(long)]
        out: PathBuf,
    },
    /// Path-model hitting probabilities: closed form vs Monte Carlo.
    Path {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        reps: u64,
        #[arg(long, default_value_t = 100_000_000)]
        cap: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the built-in invariant suite.
    Verify {
        #[arg(long, value_enum, default_value = "quick")]
        suite: SuiteArg,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads.or_else(|| {
        std::env::var("VOTERLAB_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    }) {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("error: building thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn require_seed(seed: Option<u64>) -> Result<u64> {
    seed.ok_or_else(|| anyhow::anyhow!("--seed is required for stochastic runs"))
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::GenMatrix { graph, kind, out } => {
            let g = formats::load_graph(&graph)?;
            let a = build_matrix(&g, kind.into()).map_err(|e| anyhow::anyhow!("{e}"))?;
            formats::save_matrix(&out, &a)?;
            println!("wrote {} ({} x {})", out.display(), a.n(), a.n());
            Ok(ExitCode::SUCCESS)
        }
        Command::Spectral {
            matrix,
            graph,
            kind,
            out,
        } => spectral_cmd(matrix, graph, kind, out, cli.seed),
        Command::Simulate {
            matrix,
            mu,
            m,
            variant,
            include_final,
            cap,
            out,
        } => {
            let seed = require_seed(cli.seed)?;
            let a = formats::load_matrix(&matrix)?;
            let mu = formats::parse_mu(&mu)?;
            let dynamics = match variant {
                VariantArg::Sync => Dynamics::Sync(&a),
                VariantArg::Async => Dynamics::Async(&a),
            };
            let trace = parallel_extended(dynamics, &mu, m, seed, include_final, cap)?;
            formats::save_trace(&out, &trace)?;
            println!(
                "wrote {} cycles to {} (total steps {})",
                m,
                out.display(),
                trace.total_tau()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Bounds {
            matrix,
            mu,
            mc,
            delta,
            moments,
            out,
        } => bounds_cmd(matrix, &mu, mc, delta, &moments, out, cli.seed),
        Command::Estimate {
            trace,
            lambda,
            support,
            astar,
            clip,
            max_iters,
            tol,
            out,
        } => estimate_cmd(trace, &lambda, &support, astar, clip, max_iters, tol, out),
        Command::Lyapunov {
            matrix,
            mu,
            epsilon,
            mode,
            out,
        } => lyapunov_cmd(matrix, mu, epsilon, mode, out),
        Command::Path {
            n,
            k,
            reps,
            cap,
            out,
        } => {
            let seed = require_seed(cli.seed)?;
            path_cmd(n, k, reps, cap, seed, out)
        }
        Command::Verify { suite } => {
            let ok = verify::run(matches!(suite, SuiteArg::Full));
            Ok(if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
    }
}

/// Cycles are pure functions of (seed, index), so they can be generated on
/// any worker; the assembled trace is identical to a serial run.
fn parallel_extended(
    dynamics: Dynamics<'_>,
    mu: &voterlab_core::simulate::InitialDistribution,
    m: u64,
    seed: u64,
    include_final: bool,
    cap: u64,
) -> Result<ExtendedTrace> {
    if m == 0 {
        bail!("cycle count must be >= 1");
    }
    let cycles = (0..m)
        .into_par_iter()
        .map(|c| run_cycle(dynamics, mu, seed, c, cap))
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| anyhow::anyhow!("{e}"))?;
    let meta = TraceMeta {
        kind: dynamics.kind(),
        n: dynamics.n(),
        epsilon: dynamics.epsilon(),
        seed,
    };
    Ok(ExtendedTrace::from_cycles(cycles, include_final, meta))
}

// ---------------------------------------------------------------------------
// spectral
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct FunctionalOut {
    value: f64,
    witness: String,
    exact: bool,
}

#[derive(Serialize)]
struct ConductanceOut {
    phi_g: f64,
    witness: String,
    lambda2: f64,
    cheeger_ok: bool,
}

#[derive(Serialize)]
struct InequalityOut {
    name: String,
    lhs: f64,
    rhs: f64,
    holds: bool,
    slack: f64,
}

#[derive(Serialize)]
struct SpectralOut {
    n: usize,
    pi_star: f64,
    phi_a: FunctionalOut,
    phi_a_async: FunctionalOut,
    psi_tilde: FunctionalOut,
    psi_a: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    conductance: Option<ConductanceOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    comparison: Option<Vec<InequalityOut>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    comparison_skipped: Option<String>,
}

fn spectral_cmd(
    matrix: Option<PathBuf>,
    graph: Option<PathBuf>,
    kind: Option<KindArg>,
    out: Option<PathBuf>,
    seed: Option<u64>,
) -> Result<ExitCode> {
    let (a, g, used_kind) = match (matrix, graph) {
        (Some(m), None) => (formats::load_matrix(&m)?, None, None),
        (None, Some(gp)) => {
            let g = formats::load_graph(&gp)?;
            let kind = kind.expect("clap enforces --kind with --graph");
            let a = build_matrix(&g, kind.into()).map_err(|e| anyhow::anyhow!("{e}"))?;
            (a, Some(g), Some(kind))
        }
        _ => bail!("pass exactly one of --matrix or --graph (with --kind)"),
    };
    let n = a.n();
    let pi = stationary_distribution(&a).map_err(|e| anyhow::anyhow!("{e}"))?;
    let needs_sampling = n > PHI_EXACT_LIMIT || n > PSI_EXACT_LIMIT;
    let seed = if needs_sampling {
        require_seed(seed)?
    } else {
        seed.unwrap_or(0)
    };
    let opts = model::SpectralOptions::auto(n, seed);
    let rep =
        model::spectral_report(&a, &pi, g.as_ref(), opts).map_err(|e| anyhow::anyhow!("{e}"))?;

    let functional = |r: &model::PhiResult| FunctionalOut {
        value: r.value,
        witness: r.witness.to_state().to_bitstring(),
        exact: r.exact,
    };
    let psi_out = FunctionalOut {
        value: rep.psi_tilde.value,
        witness: rep.psi_tilde.witness.to_state().to_bitstring(),
        exact: rep.psi_tilde.exact,
    };
    let mut comparison = None;
    let mut comparison_skipped = None;
    if let (Some(g), Some(kind)) = (g.as_ref(), used_kind) {
        match model::comparison_report(g, kind.into()) {
            Ok(c) => {
                comparison = Some(
                    c.checks
                        .iter()
                        .map(|c| InequalityOut {
                            name: c.name.to_string(),
                            lhs: c.lhs,
                            rhs: c.rhs,
                            holds: c.holds,
                            slack: c.slack,
                        })
                        .collect(),
                );
            }
            Err(e) => comparison_skipped = Some(e.to_string()),
        }
    }
    let out_value = SpectralOut {
        n,
        pi_star: rep.pi_star,
        phi_a: functional(&rep.phi_a),
        phi_a_async: functional(&rep.phi_a_async),
        psi_tilde: psi_out,
        psi_a: rep.psi_a,
        conductance: rep.conductance.map(|c| ConductanceOut {
            phi_g: c.phi_g,
            witness: c.witness.to_state().to_bitstring(),
            lambda2: c.lambda2,
            cheeger_ok: c.cheeger_ok,
        }),
        comparison,
        comparison_skipped,
    };
    println!(
        "n={} phi_A={:.9} phi_A'={:.9} psi~_A={:.9} pi*={:.9}",
        n,
        out_value.phi_a.value,
        out_value.phi_a_async.value,
        out_value.psi_tilde.value,
        out_value.pi_star
    );
    if let Some(c) = &out_value.conductance {
        println!(
            "phi_G={:.9} lambda2={:.9} cheeger_ok={}",
            c.phi_g, c.lambda2, c.cheeger_ok
        );
    }
    if let Some(path) = out {
        formats::write_json(&path, &out_value)?;
        println!("wrote {}", path.display());
    }
    Ok(ExitCode::SUCCESS)
}

// ---------------------------------------------------------------------------
// bounds
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct TauSummaryOut {
    cycles: usize,
    mean: f64,
    variance: f64,
    min: u64,
    max: u64,
    sum: u64,
    absorbed_one_fraction: f64,
    quantiles: Vec<(f64, u64)>,
}

#[derive(Serialize)]
struct BoundsOut {
    phi_a: f64,
    phi_a_exact: bool,
    pi_star: f64,
    theta_star: f64,
    mu_prefactor: f64,
    etau_bound: f64,
    moment_bounds: Vec<(u32, f64)>,
    m: u64,
    delta: f64,
    sum_quantile: f64,
    tail_curve: Vec<(f64, f64)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    empirical: Option<TauSummaryOut>,
}

fn bounds_cmd(
    matrix: PathBuf,
    mu: &str,
    mc: u64,
    delta: f64,
    moments: &str,
    out: PathBuf,
    seed: Option<u64>,
) -> Result<ExitCode> {
    let a = formats::load_matrix(&matrix)?;
    let mu = formats::parse_mu(mu)?;
    let pi = stationary_distribution(&a).map_err(|e| anyhow::anyhow!("{e}"))?;
    let n = a.n();
    let (phi, phi_exact) = if n <= PHI_EXACT_LIMIT {
        let r =
            phi_a(&a, &pi, PhiVariant::Sync, PhiMode::Exact).map_err(|e| anyhow::anyhow!("{e}"))?;
        (r.value, true)
    } else {
        let s = require_seed(seed)?;
        let r = phi_a(
            &a,
            &pi,
            PhiVariant::Sync,
            PhiMode::Sampled { k: 4096, seed: s },
        )
        .map_err(|e| anyhow::anyhow!("{e}"))?;
        (r.value, false)
    };
    let k_list: Vec<u32> = moments
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse().context("parsing --moments"))
        .collect::<Result<_>>()?;
    let prefactor = consensus::mu_prefactor(&pi, &mu).map_err(|e| anyhow::anyhow!("{e}"))?;
    let m = mc.max(1);
    let mut rep = bound_report(phi, pi.pi_star(), prefactor, m, delta, &k_list)
        .map_err(|e| anyhow::anyhow!("{e}"))?;
    if mc > 0 {
        let s = require_seed(seed)?;
        let trace = parallel_extended(Dynamics::Sync(&a), &mu, mc, s, false, DEFAULT_STEP_CAP)?;
        rep.empirical = Some(empirical_tau_stats(&trace).map_err(|e| anyhow::anyhow!("{e}"))?);
    }
    let grid_max = 2.0 * rep.sum_quantile;
    let tail_curve: Vec<(f64, f64)> = (0..=40)
        .map(|i| {
            let x = grid_max * i as f64 / 40.0;
            (x, rep.tail_bound(x))
        })
        .collect();
    let empirical = rep.empirical.as_ref().map(|s| TauSummaryOut {
        cycles: s.cycles,
        mean: s.mean,
        variance: s.variance,
        min: s.min,
        max: s.max,
        sum: s.sum,
        absorbed_one_fraction: s.absorbed_one_fraction,
        quantiles: [0.5, 0.9, 0.95, 0.99]
            .iter()
            .map(|&q| (q, s.quantile(q)))
            .collect(),
    });
    println!(
        "phi_A={:.9}{} E[tau] bound={:.4} quantile(m={}, delta={})={}",
        rep.phi_a,
        if phi_exact {
            ""
        } else {
            " (sampled upper estimate)"
        },
        rep.etau_bound,
        rep.m,
        rep.delta,
        rep.sum_quantile
    );
    if let Some(e) = &empirical {
        println!(
            "empirical: mean={:.4} max={} over {} cycles",
            e.mean, e.max, e.cycles
        );
    }
    let out_value = BoundsOut {
        phi_a: rep.phi_a,
        phi_a_exact: phi_exact,
        pi_star: rep.pi_star,
        theta_star: rep.theta_star,
        mu_prefactor: rep.mu_prefactor,
        etau_bound: rep.etau_bound,
        moment_bounds: rep.moment_bounds.clone(),
        m: rep.m,
        delta: rep.delta,
        sum_quantile: rep.sum_quantile,
        tail_curve,
        empirical,
    };
    formats::write_json(&out, &out_value)?;
    println!("wrote {}", out.display());
    Ok(ExitCode::SUCCESS)
}

// ---------------------------------------------------------------------------
// estimate
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct EstimateOut {
    n: usize,
    cycles: usize,
    lambda: f64,
    support: String,
    a_hat: Vec<Vec<f64>>,
    informative_steps: Vec<usize>,
    unidentifiable: Vec<bool>,
    iterations: u32,
    converged: bool,
    clip_events: usize,
    objective_initial: f64,
    objective_final: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    frob_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    frob_error_sq: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    support_precision: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    support_recall: Option<f64>,
}

#[allow(clippy::too_many_arguments)]
fn estimate_cmd(
    trace: PathBuf,
    lambda: &str,
    support: &str,
    astar: Option<PathBuf>,
    clip: f64,
    max_iters: u32,
    tol: f64,
    out: PathBuf,
) -> Result<ExitCode> {
    let trace = formats::load_trace(&trace)?;
    let astar = astar.map(|p| formats::load_matrix(&p)).transpose()?;
    let n = trace.n();

    let lambda_value = if lambda == "auto" {
        let a_star = astar
            .as_ref()
            .ok_or_else(|| anyhow::anyhow!("--lambda auto needs --astar for the rate rule"))?;
        let pi = stationary_distribution(a_star).map_err(|e| anyhow::anyhow!("{e}"))?;
        let phi = phi_a(a_star, &pi, PhiVariant::Sync, PhiMode::Exact)
            .map_err(|e| anyhow::anyhow!("--lambda auto needs exact phi_A (n <= 16): {e}"))?;
        let inputs = TheoryInputs {
            n,
            m: trace.len() as u64,
            alpha: a_star.min_positive_entry(),
            pi_star: pi.pi_star(),
            phi_a_star: phi.value,
            e0_tau: trace.total_tau() as f64 / trace.len() as f64,
            lambda_min_corr: 1.0, // unused by the lambda rule
            delta: 0.05,
            epsilon: 0.1,
            c1: 1.0,
            c2: 1.0,
            s: (n * n) as u64,
            grad_infnorm: None,
        };
        inference::theory_report(&inputs)
            .map_err(|e| anyhow::anyhow!("{e}"))?
            .lambda_m_default
    } else {
        lambda
            .parse()
            .context("parsing --lambda (expected 'auto' or a float)")?
    };

    let mut config = LossConfig::new(lambda_value);
    config.clip = clip;
    config.max_iters = max_iters;
    config.tol = tol;
    match support {
        "unknown" => {}
        "known" => {
            let a_star = astar
                .as_ref()
                .ok_or_else(|| anyhow::anyhow!("--support known needs --astar"))?;
            let mask: Vec<Vec<bool>> = a_star
                .rows()
                .iter()
                .map(|row| row.iter().map(|&x| x > 0.0).collect())
                .collect();
            config.support = Some(mask);
        }
        other => bail!("--support must be 'known' or 'unknown', got {other}"),
    }

    let astar_mat = astar.as_ref().map(|a| a.to_mat());
    let result = inference::estimate(&trace, &config, astar_mat.as_ref())
        .map_err(|e| anyhow::anyhow!("{e}"))?;
    let frob = match &astar_mat {
        Some(t) => Some(
            inference::frobenius_error(&result.a_hat, t, 1e-3)
                .map_err(|e| anyhow::anyhow!("{e}"))?,
        ),
        None => None,
    };
    let out_value = EstimateOut {
        n,
        cycles: trace.len(),
        lambda: lambda_value,
        support: support.to_string(),
        a_hat: result.a_hat.to_rows(),
        informative_steps: result.informative_steps.clone(),
        unidentifiable: result.unidentifiable.clone(),
        iterations: result.iterations,
        converged: result.converged,
        clip_events: result.clip_events,
        objective_initial: *result.objective.first().unwrap(),
        objective_final: *result.objective.last().unwrap(),
        frob_error: frob.as_ref().map(|f| f.frob),
        frob_error_sq: frob.as_ref().map(|f| f.frob_sq),
        support_precision: frob.as_ref().map(|f| f.precision),
        support_recall: frob.as_ref().map(|f| f.recall),
    };
    println!(
        "estimated {}x{} matrix: {} iterations, converged={}, clip_events={}{}",
        n,
        n,
        out_value.iterations,
        out_value.converged,
        out_value.clip_events,
        out_value
            .frob_error
            .map(|f| format!(", ||A^-A*||_F={f:.6}"))
            .unwrap_or_default()
    );
    formats::write_json(&out, &out_value)?;
    println!("wrote {}", out.display());
    Ok(ExitCode::SUCCESS)
}

// ---------------------------------------------------------------------------
// lyapunov
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct LyapunovCheckOut {
    n: usize,
    include_final: bool,
    m: Vec<Vec<f64>>,
    q: Vec<Vec<f64>>,
    lyapunov_residual: f64,
    qpi_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
    lambda_min_m: f64,
    lambda2_q: f64,
    rayleigh: f64,
    eig_bound: f64,
    eig_bound_holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda2_lower_bound: Option<f64>,
}

#[derive(Serialize)]
struct LyapunovSolveOut {
    n: usize,
    epsilon: f64,
    m: Vec<Vec<f64>>,
    mean_state: Vec<f64>,
    iterations: u32,
    observed_rate: f64,
    rate_bound: f64,
    lambda_min: f64,
    lambda_min_floor: f64,
}

fn lyapunov_cmd(
    matrix: PathBuf,
    mu: Option<String>,
    epsilon: Option<f64>,
    mode: LyapunovMode,
    out: PathBuf,
) -> Result<ExitCode> {
    let a = formats::load_matrix(&matrix)?;
    match mode {
        LyapunovMode::Solve => {
            let eps = epsilon.ok_or_else(|| anyhow::anyhow!("--mode solve needs --epsilon"))?;
            let fp =
                correlation::lyapunov_solve_noisy(&a, eps).map_err(|e| anyhow::anyhow!("{e}"))?;
            println!(
                "noisy fixed point: {} iterations, rate {:.6} (bound {:.6}), lambda_min {:.6}",
                fp.iterations,
                fp.observed_rate,
                (1.0 - 2.0 * eps) * (1.0 - 2.0 * eps),
                fp.lambda_min
            );
            let out_value = LyapunovSolveOut {
                n: a.n(),
                epsilon: eps,
                m: fp.m.to_rows(),
                mean_state: fp.mean_state.clone(),
                iterations: fp.iterations,
                observed_rate: fp.observed_rate,
                rate_bound: (1.0 - 2.0 * eps) * (1.0 - 2.0 * eps),
                lambda_min: fp.lambda_min,
                lambda_min_floor: eps * eps,
            };
            formats::write_json(&out, &out_value)?;
        }
        LyapunovMode::Check => {
            let mu = formats::parse_mu(
                mu.as_deref()
                    .ok_or_else(|| anyhow::anyhow!("--mode check needs --mu"))?,
            )?;
            let pi = stationary_distribution(&a).map_err(|e| anyhow::anyhow!("{e}"))?;
            let corr = correlation::exact_correlation(&a, &mu, true)
                .map_err(|e| anyhow::anyhow!("exact check needs n <= 10: {e}"))?;
            let moments = ChainMoments::exact(&a, &mu).map_err(|e| anyhow::anyhow!("{e}"))?;
            let q = correlation::q_matrix(&a, &pi, &mu, &moments)
                .map_err(|e| anyhow::anyhow!("{e}"))?;
            let residual = correlation::lyapunov_check(&corr.m, &a, &q.q);
            let bounds =
                correlation::eig_bounds(&corr.m, &pi, &q.q).map_err(|e| anyhow::anyhow!("{e}"))?;
            println!(
                "lyapunov residual {residual:.3e}, Q pi residual {:.3e}, lambda_min(M) {:.6}",
                q.qpi_residual, corr.lambda_min
            );
            let out_value = LyapunovCheckOut {
                n: a.n(),
                include_final: true,
                m: corr.m.to_rows(),
                q: q.q.to_rows(),
                lyapunov_residual: residual,
                qpi_residual: q.qpi_residual,
                alpha: q.alpha,
                lambda_min_m: corr.lambda_min,
                lambda2_q: q.lambda2,
                rayleigh: bounds.rayleigh,
                eig_bound: bounds.bound,
                eig_bound_holds: bounds.holds,
                lambda2_lower_bound: q.lambda2_lower_bound,
            };
            formats::write_json(&out, &out_value)?;
        }
    }
    println!("wrote {}", out.display());
    Ok(ExitCode::SUCCESS)
}

// ---------------------------------------------------------------------------
// path
// ---------------------------------------------------------------------------

fn path_cmd(n: usize, k: usize, reps: u64, cap: u64, seed: u64, out: PathBuf) -> Result<ExitCode> {
    let model = PathModel::half_bias(n).map_err(|e| anyhow::anyhow!("{e}"))?;
    let closed = pathmodel::hitting_prob_all(&model, k).map_err(|e| anyhow::anyhow!("{e}"))?;
    let sim =
        pathmodel::simulate_path(&model, k, reps, seed, cap).map_err(|e| anyhow::anyhow!("{e}"))?;
    let mut csv = String::from("vertex,h_closed_form,h_empirical,stderr\n");
    for u in 1..=n {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            u,
            closed[u - 1],
            sim.freq[u - 1],
            sim.stderr[u - 1]
        ));
    }
    std::fs::write(&out, csv).with_context(|| format!("writing {}", out.display()))?;
    let expected = pathmodel::expected_informative(n, k).map_err(|e| anyhow::anyhow!("{e}"))?;
    println!(
        "E[N] exact {:.4}, asymptotic {:.4}, simulated {:.4} over {} reps",
        expected.exact, expected.asymptotic, sim.mean_n, reps
    );
    println!("wrote {}", out.display());
    Ok(ExitCode::SUCCESS)
}
