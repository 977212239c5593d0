//! Built-in instance library shared by the verification suite and tests.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::model::{build_matrix, uniform_neighbor_rows, Graph, InteractionMatrix, MatrixKind};

/// Complete-graph matrix with a_{uu} = 0 and a_{uv} = 1/(n-1).
pub fn complete_uniform(n: usize) -> InteractionMatrix {
    assert!(n >= 3, "needs n >= 3 for aperiodicity");
    let w = 1.0 / (n - 1) as f64;
    let rows = (0..n)
        .map(|u| (0..n).map(|v| if u == v { 0.0 } else { w }).collect())
        .collect();
    InteractionMatrix::new(rows).expect("complete uniform matrix is valid")
}

/// Two-neighbor cycle matrix a_{u,u±1} = 1/2. For even n the support is
/// bipartite, so the relaxed (irreducible-only) constructor is used; the
/// stationary distribution is still the uniform one.
pub fn cycle_uniform_neighbor(n: usize) -> InteractionMatrix {
    assert!(n >= 3);
    let g = Graph::cycle(n);
    InteractionMatrix::new_irreducible(uniform_neighbor_rows(&g)).expect("cycle rows are valid")
}

/// A named matrix with its generating graph when one exists.
pub struct Instance {
    pub name: String,
    pub matrix: InteractionMatrix,
    pub graph: Option<Graph>,
}

fn lazy_instance(name: &str, graph: Graph) -> Instance {
    let matrix = build_matrix(&graph, MatrixKind::Lazy).expect("lazy matrix is valid");
    Instance {
        name: String::from(name),
        matrix,
        graph: Some(graph),
    }
}

/// The library used by the consensus-bound and exponential-moment checks:
/// complete graphs K3..K8, lazy cycles C3..C10, lazy paths P3..P8, a lazy
/// star, and a lazy barbell. All instances have n <= 10 and absorbing
/// dynamics.
pub fn library() -> Vec<Instance> {
    let mut out = Vec::new();
    for n in 3..=8 {
        out.push(Instance {
            name: format!("k{n}_uniform"),
            matrix: complete_uniform(n),
            graph: Some(Graph::complete(n)),
        });
    }
    for n in 3..=10 {
        out.push(lazy_instance(&format!("c{n}_lazy"), Graph::cycle(n)));
    }
    for n in 3..=8 {
        out.push(lazy_instance(&format!("p{n}_lazy"), Graph::path(n)));
    }
    out.push(lazy_instance("star6_lazy", Graph::star(5)));
    out.push(lazy_instance("barbell6_lazy", Graph::barbell(3)));
    out
}

/// Small subset of the library for quick verification runs.
pub fn quick_library() -> Vec<Instance> {
    library()
        .into_iter()
        .filter(|i| {
            matches!(
                i.name.as_str(),
                "k3_uniform" | "k5_uniform" | "c4_lazy" | "c6_lazy" | "p4_lazy" | "star6_lazy"
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::stationary_distribution;

    #[test]
    fn library_members_have_valid_stationary_distributions() {
        for inst in library() {
            let pi = stationary_distribution(&inst.matrix).expect(&inst.name);
            assert!(pi.pi_star() > 0.0, "{}", inst.name);
            assert!(inst.matrix.n() <= 10, "{}", inst.name);
            assert!(inst.matrix.is_aperiodic(), "{}", inst.name);
        }
    }
}
