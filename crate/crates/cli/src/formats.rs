//! File formats: matrix and graph JSON, the initial-distribution spec, and
//! the JSON-lines trace format. All indices are 0-based; state strings list
//! vertex 0 first.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use voterlab_core::model::{Graph, InteractionMatrix};
use voterlab_core::simulate::{
    DynamicsKind, ExtendedTrace, InitialDistribution, StateVector, TraceMeta, Trajectory,
};

#[derive(Serialize, Deserialize)]
pub struct MatrixFile {
    pub n: usize,
    pub rows: Vec<Vec<f64>>,
}

pub fn load_matrix(path: &Path) -> Result<InteractionMatrix> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let file: MatrixFile = serde_json::from_str(&text).context("parsing matrix JSON")?;
    if file.rows.len() != file.n {
        bail!(
            "matrix file declares n = {} but has {} rows",
            file.n,
            file.rows.len()
        );
    }
    InteractionMatrix::new(file.rows).map_err(|e| anyhow::anyhow!("invalid matrix: {e}"))
}

pub fn save_matrix(path: &Path, a: &InteractionMatrix) -> Result<()> {
    let file = MatrixFile {
        n: a.n(),
        rows: a.rows().to_vec(),
    };
    fs::write(path, serde_json::to_string_pretty(&file)?)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

#[derive(Serialize, Deserialize)]
pub struct GraphFile {
    pub n: usize,
    pub edges: Vec<[usize; 2]>,
    #[serde(default)]
    pub self_loops: Vec<usize>,
}

pub fn load_graph(path: &Path) -> Result<Graph> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let file: GraphFile = serde_json::from_str(&text).context("parsing graph JSON")?;
    Graph::new(
        file.n,
        file.edges.iter().map(|e| (e[0], e[1])),
        file.self_loops,
    )
    .map_err(|e| anyhow::anyhow!("invalid graph: {e}"))
}

/// Initial-distribution spec, e.g. '{"bernoulli":0.5}',
/// '{"bernoulli":0.5,"transient":true}', '{"fixed":"0110"}', or
/// '{"uniform_transients":true}'.
#[derive(Deserialize)]
#[serde(untagged)]
enum MuSpec {
    Bernoulli {
        bernoulli: f64,
        #[serde(default)]
        transient: bool,
    },
    Fixed {
        fixed: String,
    },
    Uniform {
        uniform_transients: bool,
    },
}

pub fn parse_mu(spec: &str) -> Result<InitialDistribution> {
    let spec: MuSpec =
        serde_json::from_str(spec).context("parsing --mu (expected e.g. '{\"bernoulli\":0.5}')")?;
    Ok(match spec {
        MuSpec::Bernoulli {
            bernoulli,
            transient: false,
        } => InitialDistribution::ProductBernoulli { p: bernoulli },
        MuSpec::Bernoulli {
            bernoulli,
            transient: true,
        } => InitialDistribution::ProductBernoulliTransient { p: bernoulli },
        MuSpec::Fixed { fixed } => InitialDistribution::Fixed(
            StateVector::from_bitstring(&fixed)
                .map_err(|e| anyhow::anyhow!("bad fixed state: {e}"))?,
        ),
        MuSpec::Uniform {
            uniform_transients: true,
        } => InitialDistribution::UniformTransients,
        MuSpec::Uniform {
            uniform_transients: false,
        } => {
            bail!("uniform_transients must be true when present")
        }
    })
}

/// One cycle of a trace file.
#[derive(Serialize, Deserialize)]
pub struct TraceLine {
    pub cycle: u64,
    pub tau: u64,
    /// 0 or 1: which consensus state absorbed the cycle.
    pub absorbed: u8,
    /// Full trajectory X_0 ..= X_tau as bitstrings.
    pub states: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub events: Option<Vec<usize>>,
}

pub fn save_trace(path: &Path, trace: &ExtendedTrace) -> Result<()> {
    let mut out = fs::File::create(path).with_context(|| format!("writing {}", path.display()))?;
    for (i, cycle) in trace.cycles().iter().enumerate() {
        let line = TraceLine {
            cycle: i as u64,
            tau: cycle.tau() as u64,
            absorbed: cycle.absorbed_to_one() as u8,
            states: cycle
                .states()
                .iter()
                .map(StateVector::to_bitstring)
                .collect(),
            events: cycle.events().map(|e| e.to_vec()),
        };
        serde_json::to_writer(&mut out, &line)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn load_trace(path: &Path) -> Result<ExtendedTrace> {
    let file = fs::File::open(path).with_context(|| format!("reading {}", path.display()))?;
    let mut cycles = Vec::new();
    let mut n = 0usize;
    let mut any_events = false;
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: TraceLine =
            serde_json::from_str(&line).with_context(|| format!("trace line {}", lineno + 1))?;
        let states: Vec<StateVector> = parsed
            .states
            .iter()
            .map(|s| StateVector::from_bitstring(s))
            .collect::<Result<_, _>>()
            .map_err(|e| anyhow::anyhow!("trace line {}: {e}", lineno + 1))?;
        if states.len() as u64 != parsed.tau + 1 {
            bail!(
                "trace line {}: {} states but tau = {}",
                lineno + 1,
                states.len(),
                parsed.tau
            );
        }
        if n == 0 {
            n = states[0].len();
        } else if states[0].len() != n {
            bail!("trace line {}: inconsistent n", lineno + 1);
        }
        any_events |= parsed.events.is_some();
        cycles.push(Trajectory::new(states, parsed.events));
    }
    if cycles.is_empty() {
        bail!("trace file has no cycles");
    }
    let meta = TraceMeta {
        kind: if any_events {
            DynamicsKind::Async
        } else {
            DynamicsKind::Sync
        },
        n,
        epsilon: None,
        seed: 0,
    };
    Ok(ExtendedTrace::from_cycles(cycles, false, meta))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(value)?)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}
