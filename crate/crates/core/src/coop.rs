//! Communication graphs and the coordination of virtual coordinates.
//!
//! Agents share only their θ. The coordination term acts on the θ slot
//! alone: `θ̇_i += k_c·c_i` with `c = −L·(Θ − Θ*)`. Edge offsets are derived
//! from a reference configuration `Θ*` so the pattern is always consistent
//! around cycles.

use std::collections::{BTreeSet, VecDeque};

use crate::frames::FrameTransform;
use crate::gvf::{chi_mpf, FieldOutput, GainSet, GvfError};
use crate::linalg::{LinalgError, MatN, VecN};
use crate::paths::{ExtendedState, ParametricPath};
use crate::scalar::{Real, Scalar};

/// Undirected, connected graph on agents `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommGraph {
    n: usize,
    /// Each edge stored once as `(i, j)` with `i < j`; the incidence matrix
    /// orients it from `i` to `j`.
    edges: Vec<(usize, usize)>,
}

impl CommGraph {
    /// Zero-based edges. Rejects self-loops, out-of-range indices, repeated
    /// edges and disconnected graphs.
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Self, LinalgError> {
        let invalid = |m: String| Err(LinalgError::InvalidArgument(m));
        if n == 0 {
            return invalid("graph needs at least one agent".into());
        }
        let mut seen = BTreeSet::new();
        let mut stored = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            if a >= n || b >= n {
                return invalid(format!("edge ({a}, {b}) refers to a missing agent"));
            }
            if a == b {
                return invalid(format!("self-loop at agent {a}"));
            }
            let e = (a.min(b), a.max(b));
            if !seen.insert(e) {
                return invalid(format!("edge ({a}, {b}) listed twice"));
            }
            stored.push(e);
        }
        let graph = Self { n, edges: stored };
        if !graph.is_connected() {
            return invalid("communication graph is not connected".into());
        }
        Ok(graph)
    }

    /// The path graph `0 – 1 – … – (n−1)`.
    pub fn chain(n: usize) -> Result<Self, LinalgError> {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Self::new(n, &edges)
    }

    pub fn agents(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges.iter().filter_map(move |&(a, b)| {
            if a == i {
                Some(b)
            } else if b == i {
                Some(a)
            } else {
                None
            }
        })
    }

    fn is_connected(&self) -> bool {
        let mut visited = vec![false; self.n];
        let mut queue = VecDeque::from([0]);
        visited[0] = true;
        while let Some(i) = queue.pop_front() {
            for j in self.neighbors(i) {
                if !visited[j] {
                    visited[j] = true;
                    queue.push_back(j);
                }
            }
        }
        visited.into_iter().all(|v| v)
    }

    pub fn adjacency<T: Scalar>(&self) -> MatN<T> {
        let mut a = MatN::zeros(self.n, self.n);
        for &(i, j) in &self.edges {
            a.set(i, j, T::one());
            a.set(j, i, T::one());
        }
        a
    }

    pub fn laplacian<T: Scalar>(&self) -> MatN<T> {
        let mut l = MatN::zeros(self.n, self.n);
        for &(i, j) in &self.edges {
            l.set(i, i, l.get(i, i) + T::one());
            l.set(j, j, l.get(j, j) + T::one());
            l.set(i, j, l.get(i, j) - T::one());
            l.set(j, i, l.get(j, i) - T::one());
        }
        l
    }

    /// `n × m` incidence matrix: `+1` at the tail `i`, `−1` at the head `j`.
    pub fn incidence<T: Scalar>(&self) -> MatN<T> {
        let mut d = MatN::zeros(self.n, self.edges.len());
        for (e, &(i, j)) in self.edges.iter().enumerate() {
            d.set(i, e, T::one());
            d.set(j, e, -T::one());
        }
        d
    }
}

/// Reference configuration `Θ*`; offsets are `Δ[i, j] = θ*_i − θ*_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct FormationPattern<T> {
    pub theta_star: Vec<T>,
}

impl<T: Real> FormationPattern<T> {
    pub fn new(theta_star: Vec<T>) -> Result<Self, LinalgError> {
        if theta_star.iter().any(|t| !t.is_finite()) {
            return Err(LinalgError::InvalidArgument(
                "reference configuration must be finite".into(),
            ));
        }
        Ok(Self { theta_star })
    }

    pub fn offset(&self, i: usize, j: usize) -> T {
        self.theta_star[i] - self.theta_star[j]
    }

    /// `Δ* = Dᵀ·Θ*`, one entry per graph edge.
    pub fn edge_offsets(&self, graph: &CommGraph) -> Vec<T> {
        graph.edges().iter().map(|&(i, j)| self.offset(i, j)).collect()
    }

    fn check(&self, graph: &CommGraph, theta: &[T]) -> Result<(), LinalgError> {
        for (context, found) in [
            ("reference configuration", self.theta_star.len()),
            ("virtual coordinates", theta.len()),
        ] {
            if found != graph.agents() {
                return Err(LinalgError::DimensionMismatch {
                    context,
                    expected: graph.agents(),
                    found,
                });
            }
        }
        Ok(())
    }
}

/// `c_i = −Σ_{j∈N_i} (θ_i − θ_j − Δ[i, j])`.
pub fn consensus_term<T: Real>(
    theta: &[T],
    graph: &CommGraph,
    pattern: &FormationPattern<T>,
) -> Result<Vec<T>, LinalgError> {
    pattern.check(graph, theta)?;
    let mut c = vec![T::zero(); graph.agents()];
    for &(i, j) in graph.edges() {
        let e = theta[i] - theta[j] - pattern.offset(i, j);
        c[i] = c[i] - e;
        c[j] = c[j] + e;
    }
    Ok(c)
}

/// `θ_i − θ_j − Δ[i, j]` for every edge.
pub fn edge_errors<T: Real>(
    theta: &[T],
    graph: &CommGraph,
    pattern: &FormationPattern<T>,
) -> Result<Vec<T>, LinalgError> {
    pattern.check(graph, theta)?;
    Ok(graph
        .edges()
        .iter()
        .map(|&(i, j)| theta[i] - theta[j] - pattern.offset(i, j))
        .collect())
}

/// `(0, …, 0, k_c·c_i)` in `R^(n+1)`.
pub fn chi_cr<T: Real>(
    agent: usize,
    theta: &[T],
    graph: &CommGraph,
    pattern: &FormationPattern<T>,
    k_c: T,
    n: usize,
) -> Result<VecN<T>, LinalgError> {
    if agent >= graph.agents() {
        return Err(LinalgError::InvalidArgument(format!("no agent {agent}")));
    }
    let c = consensus_term(theta, graph, pattern)?;
    Ok(VecN::zeros(n).extended(k_c * c[agent]))
}

/// Which descent argument applies to a gain set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GainCase {
    /// No coordination term.
    Independent,
    /// `0 < g < 1`: `det M = g(1 − g) > 0`, strict descent.
    Strict { det_m: f64 },
    /// `g = 1`: semidefinite descent, convergence by LaSalle.
    LaSalle,
}

/// Determinant of the cross-term matrix `[[g, −g], [−g, 1]]`.
pub fn det_m<T: Real>(g: T) -> T {
    g * (T::one() - g)
}

/// Validates gains, and in coordination mode requires `0 < g ≤ 1` where `g`
/// is the last entry of `G`.
pub fn gain_gate<T: Real>(gains: &GainSet<T>, coordination: bool) -> Result<GainCase, GvfError> {
    gains.validate(gains.dim())?;
    if !coordination {
        return Ok(GainCase::Independent);
    }
    let g = gains.g();
    if g > T::one() {
        return Err(GvfError::InvalidGains(format!(
            "coordination needs 0 < g <= 1 for the last entry of G, got g = {g}; \
             det M = g(1 - g) = {} < 0 leaves the composite Lyapunov rate indefinite",
            det_m(g)
        )));
    }
    if g == T::one() {
        Ok(GainCase::LaSalle)
    } else {
        Ok(GainCase::Strict {
            det_m: det_m(g).to_f64().unwrap_or(f64::NAN),
        })
    }
}

/// Everything the combined field needs besides the agent's own state.
#[derive(Debug, Clone, Copy)]
pub struct Coordination<'a, T> {
    pub graph: &'a CommGraph,
    pub pattern: &'a FormationPattern<T>,
}

/// `χ_mpf + χ_cr` for agent `agent` given a snapshot of all θ.
pub fn combined_field<T, P, F>(
    agent: usize,
    xi: &ExtendedState<T>,
    theta: &[T],
    path: &P,
    frame: &F,
    gains: &GainSet<T>,
    coordination: Option<Coordination<'_, T>>,
) -> Result<FieldOutput<T>, GvfError>
where
    T: Real,
    P: ParametricPath<T> + ?Sized,
    F: FrameTransform<T> + ?Sized,
{
    let mut out = chi_mpf(xi, path, frame, gains)?;
    if let Some(co) = coordination {
        gain_gate(gains, true)?;
        let cr = chi_cr(agent, theta, co.graph, co.pattern, gains.k_c, path.dim())?;
        out.theta_dot = out.theta_dot + cr[path.dim()];
    }
    Ok(out)
}

/// `𝕍 = Σ V_i + (k_c/2)·Θ̃ᵀ L Θ̃`, evaluated edge-wise as `(k_c/2)·‖DᵀΘ̃‖²`.
pub fn composite_lyapunov<T: Real>(
    agent_v: &[T],
    theta: &[T],
    graph: &CommGraph,
    pattern: &FormationPattern<T>,
    k_c: T,
) -> Result<T, LinalgError> {
    if agent_v.len() != graph.agents() {
        return Err(LinalgError::DimensionMismatch {
            context: "per-agent Lyapunov values",
            expected: graph.agents(),
            found: agent_v.len(),
        });
    }
    let sum_v = agent_v.iter().fold(T::zero(), |a, &b| a + b);
    let quad = edge_errors(theta, graph, pattern)?
        .into_iter()
        .fold(T::zero(), |a, e| a + e * e);
    Ok(sum_v + T::lit(0.5) * k_c * quad)
}

/// Right-hand side of the edge-error dynamics `Dᵀ·dΘ̃/dt = −g·Dᵀα − k_c·DᵀLΘ̃`,
/// where `α_i = ∂V_i/∂θ_i`, valid when every agent uses the same `H`.
pub fn edge_error_rate<T: Real>(
    alpha: &[T],
    theta: &[T],
    graph: &CommGraph,
    pattern: &FormationPattern<T>,
    g: T,
    k_c: T,
) -> Result<Vec<T>, LinalgError> {
    let c = consensus_term(theta, graph, pattern)?;
    if alpha.len() != graph.agents() {
        return Err(LinalgError::DimensionMismatch {
            context: "θ-gradients",
            expected: graph.agents(),
            found: alpha.len(),
        });
    }
    Ok(graph
        .edges()
        .iter()
        .map(|&(i, j)| -g * (alpha[i] - alpha[j]) + k_c * (c[i] - c[j]))
        .collect())
}
