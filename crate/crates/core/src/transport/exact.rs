//! Exact unregularized transport for small instances, as a min-cost flow
//! solved by successive shortest paths (Bellman-Ford on the residual
//! graph). Used to check how close entropic plans get to the true optimum.

use super::{Marginals, TransportPlan};
use crate::error::{Error, Result};

/// Largest `N * P` accepted by [`lp_oracle`].
pub const EXACT_SIZE_LIMIT: usize = 64;

/// Residual capacities below this are treated as saturated.
const CAP_EPS: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq)]
pub struct ExactPlan {
    pub plan: TransportPlan,
    /// `max <T, S>` over the transport polytope.
    pub objective: f64,
}

struct Edge {
    to: usize,
    cap: f64,
    cost: f64,
}

struct FlowGraph {
    edges: Vec<Edge>,
    adj: Vec<Vec<usize>>,
}

impl FlowGraph {
    fn new(nodes: usize) -> Self {
        Self {
            edges: Vec::new(),
            adj: vec![Vec::new(); nodes],
        }
    }

    /// Adds `from -> to` and its zero-capacity reverse; returns the forward index.
    fn add(&mut self, from: usize, to: usize, cap: f64, cost: f64) -> usize {
        let id = self.edges.len();
        self.edges.push(Edge { to, cap, cost });
        self.edges.push(Edge {
            to: from,
            cap: 0.0,
            cost: -cost,
        });
        self.adj[from].push(id);
        self.adj[to].push(id + 1);
        id
    }

    /// Cheapest residual path as a list of edge ids, via Bellman-Ford.
    fn shortest_path(&self, source: usize, sink: usize) -> Option<Vec<usize>> {
        let n = self.adj.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut via = vec![usize::MAX; n];
        dist[source] = 0.0;
        for _ in 0..n {
            let mut changed = false;
            for u in 0..n {
                if dist[u] == f64::INFINITY {
                    continue;
                }
                for &e in &self.adj[u] {
                    let edge = &self.edges[e];
                    if edge.cap > CAP_EPS && dist[u] + edge.cost < dist[edge.to] - 1e-15 {
                        dist[edge.to] = dist[u] + edge.cost;
                        via[edge.to] = e;
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        if dist[sink] == f64::INFINITY {
            return None;
        }
        let mut path = Vec::new();
        let mut v = sink;
        while v != source {
            let e = via[v];
            path.push(e);
            v = self.edges[e ^ 1].to;
        }
        Some(path)
    }
}

/// Solves `max <T, S>` s.t. `T 1 = row`, `T^T 1 = col`, `T >= 0` exactly.
pub fn lp_oracle(similarity: &[f64], marg: &Marginals) -> Result<ExactPlan> {
    let (n, p) = (marg.row().len(), marg.col().len());
    if n * p > EXACT_SIZE_LIMIT {
        return Err(Error::InstanceTooLarge {
            size: n * p,
            limit: EXACT_SIZE_LIMIT,
        });
    }
    if similarity.len() != n * p {
        return Err(Error::DimensionMismatch(format!(
            "similarity has {} entries, marginals imply {n}x{p}",
            similarity.len()
        )));
    }
    let source = 0;
    let sink = n + p + 1;
    let mut g = FlowGraph::new(n + p + 2);
    for (i, &a) in marg.row().iter().enumerate() {
        g.add(source, 1 + i, a, 0.0);
    }
    for (j, &b) in marg.col().iter().enumerate() {
        g.add(1 + n + j, sink, b, 0.0);
    }
    let mut cell = vec![0; n * p];
    for i in 0..n {
        for j in 0..p {
            let cap = marg.row()[i].min(marg.col()[j]);
            cell[i * p + j] = g.add(1 + i, 1 + n + j, cap, -similarity[i * p + j]);
        }
    }

    while let Some(path) = g.shortest_path(source, sink) {
        let push = path
            .iter()
            .map(|&e| g.edges[e].cap)
            .fold(f64::INFINITY, f64::min);
        for &e in &path {
            g.edges[e].cap -= push;
            g.edges[e ^ 1].cap += push;
        }
    }

    // flow on a cell edge equals the capacity accumulated on its reverse
    let data = cell.iter().map(|&e| g.edges[e ^ 1].cap.max(0.0)).collect();
    let mut plan = TransportPlan::from_dense(n, p, data)?;
    let (r, c) = plan.residuals(marg);
    plan.row_residual = r;
    plan.col_residual = c;
    plan.objective = plan.inner(similarity);
    Ok(ExactPlan {
        objective: plan.objective,
        plan,
    })
}
