//! Minimum-cost flow via successive shortest paths with node potentials
//! (Dijkstra). Capacities and costs are `f64`; augmentations saturate a
//! source- or sink-side arc each round, so the bipartite dispatch instances
//! terminate after at most (grids + stations + 1) rounds.

use crate::Real;

const EPS: Real = 1e-12;

#[derive(Clone, Debug)]
struct Edge {
    to: usize,
    cap: Real,
    cost: Real,
    flow: Real,
}

pub struct MinCostFlow {
    edges: Vec<Edge>,
    adj: Vec<Vec<usize>>,
}

impl MinCostFlow {
    pub fn new(n_nodes: usize) -> Self {
        MinCostFlow {
            edges: Vec::new(),
            adj: vec![Vec::new(); n_nodes],
        }
    }

    /// Returns the edge id; the reverse edge is `id ^ 1`.
    pub fn add_edge(&mut self, from: usize, to: usize, cap: Real, cost: Real) -> usize {
        let id = self.edges.len();
        self.edges.push(Edge { to, cap, cost, flow: 0.0 });
        self.edges.push(Edge { to: from, cap: 0.0, cost: -cost, flow: 0.0 });
        self.adj[from].push(id);
        self.adj[to].push(id + 1);
        id
    }

    pub fn flow_on(&self, edge_id: usize) -> Real {
        self.edges[edge_id].flow
    }

    fn residual(&self, edge_id: usize) -> Real {
        self.edges[edge_id].cap - self.edges[edge_id].flow
    }

    /// Push as much flow as possible from `source` to `sink` at minimum total
    /// cost. Returns (total flow, total cost). Requires non-negative edge
    /// costs (true for dispatch graphs), which keeps plain Dijkstra valid for
    /// the first round and reduced costs valid afterwards.
    pub fn run(&mut self, source: usize, sink: usize) -> (Real, Real) {
        let n = self.adj.len();
        let mut potential = vec![0.0; n];
        let mut total_flow = 0.0;
        let mut total_cost = 0.0;

        loop {
            // Dijkstra on reduced costs
            let mut dist = vec![Real::INFINITY; n];
            let mut parent_edge = vec![usize::MAX; n];
            let mut visited = vec![false; n];
            dist[source] = 0.0;
            let mut heap = std::collections::BinaryHeap::new();
            heap.push(HeapItem { dist: 0.0, node: source });
            while let Some(HeapItem { dist: d, node: u }) = heap.pop() {
                if visited[u] {
                    continue;
                }
                visited[u] = true;
                if u == sink {
                    break;
                }
                for &eid in &self.adj[u] {
                    if self.residual(eid) <= EPS {
                        continue;
                    }
                    let v = self.edges[eid].to;
                    if visited[v] {
                        continue;
                    }
                    let nd = d + self.edges[eid].cost + potential[u] - potential[v];
                    if nd < dist[v] - EPS {
                        dist[v] = nd;
                        parent_edge[v] = eid;
                        heap.push(HeapItem { dist: nd, node: v });
                    }
                }
            }
            if parent_edge[sink] == usize::MAX {
                break;
            }

            for u in 0..n {
                if dist[u].is_finite() {
                    potential[u] += dist[u];
                }
            }

            // bottleneck along the path
            let mut bottleneck = Real::INFINITY;
            let mut u = sink;
            while u != source {
                let eid = parent_edge[u];
                bottleneck = bottleneck.min(self.residual(eid));
                u = self.edges[eid ^ 1].to;
            }
            if !(bottleneck > EPS) {
                break;
            }

            let mut u = sink;
            while u != source {
                let eid = parent_edge[u];
                self.edges[eid].flow += bottleneck;
                self.edges[eid ^ 1].flow -= bottleneck;
                total_cost += bottleneck * self.edges[eid].cost;
                u = self.edges[eid ^ 1].to;
            }
            total_flow += bottleneck;
        }

        (total_flow, total_cost)
    }
}

struct HeapItem {
    dist: Real,
    node: usize,
}

impl PartialEq for HeapItem {
    fn eq(&self, other: &Self) -> bool {
        self.dist == other.dist && self.node == other.node
    }
}
impl Eq for HeapItem {}
impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // min-heap on dist, ties broken by node id for determinism
        other
            .dist
            .partial_cmp(&self.dist)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| other.node.cmp(&self.node))
    }
}
