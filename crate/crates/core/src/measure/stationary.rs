use nalgebra::{DMatrix, DVector};
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use crate::error::{Error, Result};
use crate::ifs::{ProbabilityVector, State};
use crate::measure::DiscreteMeasure;

const ROW_TOLERANCE: f64 = 1e-12;
pub const STATIONARY_RESIDUAL: f64 = 1e-10;

/// Stationary law of a finite chain with transition matrix `kernel`
/// (`kernel[(i, j)] = P(i → j)`), placed on states `0, 1, …, n−1` of the line.
pub fn stationary_distribution_finite(kernel: &DMatrix<f64>) -> Result<DiscreteMeasure> {
    let nu = stationary_weights(kernel)?;
    let support = (0..nu.len()).map(|i| State::from_element(1, i as f64)).collect();
    DiscreteMeasure::new(support, nu)
}

/// Weights `ν` solving `νᵀP = νᵀ`, `Σν = 1`, with `‖νᵀP − νᵀ‖∞` below [`STATIONARY_RESIDUAL`].
pub fn stationary_weights(kernel: &DMatrix<f64>) -> Result<ProbabilityVector> {
    let n = kernel.nrows();
    if n == 0 || kernel.ncols() != n {
        return Err(Error::NotSquare { rows: n, cols: kernel.ncols() });
    }
    if kernel.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("transition matrix"));
    }
    for (i, row) in kernel.row_iter().enumerate() {
        if row.iter().any(|v| *v < 0.0) {
            return Err(Error::Probability(format!("row {i} has a negative entry")));
        }
        let s: f64 = row.iter().sum();
        if (s - 1.0).abs() > ROW_TOLERANCE {
            return Err(Error::Probability(format!("row {i} sums to {s}")));
        }
    }
    let closed = closed_classes(kernel);
    if closed != 1 {
        return Err(Error::NonUnique { closed_classes: closed });
    }

    // (Pᵀ − I)ν = 0 with one equation swapped for Σν = 1.
    let mut a = kernel.transpose() - DMatrix::identity(n, n);
    a.row_mut(n - 1).fill(1.0);
    let mut rhs = DVector::zeros(n);
    rhs[n - 1] = 1.0;
    let nu = a
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Precondition("stationary system is singular".into()))?;
    let nu: Vec<f64> = nu.iter().map(|v| v.max(0.0)).collect();
    let nu = ProbabilityVector::normalized(nu)?;

    let v = DVector::from_column_slice(nu.weights());
    let residual = (kernel.transpose() * &v - &v).amax();
    if residual >= STATIONARY_RESIDUAL {
        return Err(Error::Precondition(format!("stationary residual {residual:e} exceeds {STATIONARY_RESIDUAL:e}")));
    }
    Ok(nu)
}

/// Number of closed communicating classes; the stationary law is unique iff this is 1.
pub fn closed_classes(kernel: &DMatrix<f64>) -> usize {
    let n = kernel.nrows();
    let mut g = DiGraph::<(), ()>::with_capacity(n, n * n);
    let nodes: Vec<_> = (0..n).map(|_| g.add_node(())).collect();
    for i in 0..n {
        for j in 0..n {
            if kernel[(i, j)] > 0.0 {
                g.add_edge(nodes[i], nodes[j], ());
            }
        }
    }
    let sccs = tarjan_scc(&g);
    let mut class = vec![0usize; n];
    for (c, comp) in sccs.iter().enumerate() {
        for v in comp {
            class[v.index()] = c;
        }
    }
    sccs.iter()
        .enumerate()
        .filter(|(c, comp)| {
            comp.iter().all(|v| (0..n).all(|j| kernel[(v.index(), j)] <= 0.0 || class[j] == *c))
        })
        .count()
}
