//! Exact minimum-cost transportation between two histograms.
//!
//! Solved as a min-cost flow on the bipartite network
//! `source → supply_i → demand_j → sink` with successive shortest paths.
//! Shortest paths use Bellman–Ford (queue based) since residual arcs carry
//! negative costs; the networks here have at most a few hundred nodes.

use std::collections::VecDeque;

use crate::error::{Error, Result};

/// Residual capacities at or below this are treated as exhausted.
const FLOW_EPS: f64 = 1e-15;

#[derive(Debug, Clone)]
struct Arc {
    to: usize,
    cap: f64,
    cost: f64,
    rev: usize,
}

struct Network {
    arcs: Vec<Vec<Arc>>,
}

impl Network {
    fn new(nodes: usize) -> Self {
        Network {
            arcs: vec![Vec::new(); nodes],
        }
    }

    fn add_arc(&mut self, from: usize, to: usize, cap: f64, cost: f64) -> (usize, usize) {
        let fwd = self.arcs[from].len();
        let bwd = self.arcs[to].len() + usize::from(from == to);
        self.arcs[from].push(Arc { to, cap, cost, rev: bwd });
        self.arcs[to].push(Arc {
            to: from,
            cap: 0.0,
            cost: -cost,
            rev: fwd,
        });
        (from, fwd)
    }

    /// Shortest path tree from `src` over arcs with residual capacity.
    fn shortest_paths(&self, src: usize) -> (Vec<f64>, Vec<Option<(usize, usize)>>) {
        let n = self.arcs.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut prev = vec![None; n];
        let mut queued = vec![false; n];
        let mut relaxations = vec![0usize; n];
        let mut queue = VecDeque::new();
        dist[src] = 0.0;
        queue.push_back(src);
        queued[src] = true;
        while let Some(u) = queue.pop_front() {
            queued[u] = false;
            for (k, arc) in self.arcs[u].iter().enumerate() {
                if arc.cap <= FLOW_EPS {
                    continue;
                }
                let nd = dist[u] + arc.cost;
                // strict improvement beyond rounding noise
                if nd < dist[arc.to] - 1e-12 {
                    dist[arc.to] = nd;
                    prev[arc.to] = Some((u, k));
                    relaxations[arc.to] += 1;
                    if !queued[arc.to] && relaxations[arc.to] <= n {
                        queued[arc.to] = true;
                        queue.push_back(arc.to);
                    }
                }
            }
        }
        (dist, prev)
    }
}

/// Optimal plan: total cost plus the nonzero flows `(i, j, mass)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan {
    pub cost: f64,
    pub flows: Vec<(usize, usize, f64)>,
}

/// Minimum of `Σ F_ij c_ij` over couplings `F ≥ 0` with row sums `supply`
/// and column sums `demand`. Both sides must carry the same total mass up to
/// `1e-9`.
pub fn solve(supply: &[f64], demand: &[f64], cost: impl Fn(usize, usize) -> f64) -> Result<TransportPlan> {
    if supply.iter().chain(demand).any(|m| !(m.is_finite() && *m >= 0.0)) {
        return Err(Error::arg("transport masses must be finite and nonnegative"));
    }
    let (total_s, total_d): (f64, f64) = (supply.iter().sum(), demand.iter().sum());
    if (total_s - total_d).abs() > 1e-9 {
        return Err(Error::arg(format!(
            "unbalanced transport problem: supply {total_s} vs demand {total_d}"
        )));
    }

    let (ns, nd) = (supply.len(), demand.len());
    let source = 0;
    let sink = ns + nd + 1;
    let mut net = Network::new(ns + nd + 2);
    for (i, &s) in supply.iter().enumerate() {
        net.add_arc(source, 1 + i, s, 0.0);
    }
    for (j, &d) in demand.iter().enumerate() {
        net.add_arc(1 + ns + j, sink, d, 0.0);
    }
    let mut middle = Vec::with_capacity(ns * nd);
    for i in 0..ns {
        for j in 0..nd {
            let c = cost(i, j);
            if !c.is_finite() {
                return Err(Error::arg(format!("ground cost ({i}, {j}) is not finite")));
            }
            middle.push((i, j, net.add_arc(1 + i, 1 + ns + j, f64::INFINITY, c)));
        }
    }

    loop {
        let (dist, prev) = net.shortest_paths(source);
        if !dist[sink].is_finite() {
            break;
        }
        let mut bottleneck = f64::INFINITY;
        let mut v = sink;
        while let Some((u, k)) = prev[v] {
            bottleneck = bottleneck.min(net.arcs[u][k].cap);
            v = u;
        }
        if bottleneck <= FLOW_EPS {
            break;
        }
        let mut v = sink;
        while let Some((u, k)) = prev[v] {
            let rev = net.arcs[u][k].rev;
            net.arcs[u][k].cap -= bottleneck;
            net.arcs[v][rev].cap += bottleneck;
            v = u;
        }
    }

    let mut total = 0.0;
    let mut flows = Vec::new();
    for (i, j, (u, k)) in middle {
        let arc = &net.arcs[u][k];
        let flow = net.arcs[arc.to][arc.rev].cap;
        if flow > 0.0 {
            total += flow * arc.cost;
            flows.push((i, j, flow));
        }
    }
    Ok(TransportPlan { cost: total, flows })
}
