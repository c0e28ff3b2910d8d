//! Edmonds-Karp max flow over real capacities (including infinite arcs).
//! Networks here are tiny charging graphs, so shortest augmenting paths in an
//! adjacency list are plenty.

const FLOW_EPS: f64 = 1e-12;

#[derive(Debug, Clone)]
struct Arc {
    to: usize,
    cap: f64,
}

#[derive(Debug, Clone)]
pub struct FlowNetwork {
    // arcs stored in pairs: arc 2e and its reverse 2e+1
    arcs: Vec<Arc>,
    adj: Vec<Vec<usize>>,
}

impl FlowNetwork {
    pub fn new(nodes: usize) -> Self {
        FlowNetwork { arcs: Vec::new(), adj: vec![Vec::new(); nodes] }
    }

    pub fn add_node(&mut self) -> usize {
        self.adj.push(Vec::new());
        self.adj.len() - 1
    }

    /// Returns the arc id, usable to query the routed flow afterwards.
    pub fn add_arc(&mut self, from: usize, to: usize, cap: f64) -> usize {
        debug_assert!(cap >= 0.0);
        let id = self.arcs.len();
        self.arcs.push(Arc { to, cap });
        self.arcs.push(Arc { to: from, cap: 0.0 });
        self.adj[from].push(id);
        self.adj[to].push(id + 1);
        id
    }

    /// Flow routed through a forward arc (reverse residual capacity).
    pub fn flow_on(&self, arc_id: usize) -> f64 {
        self.arcs[arc_id ^ 1].cap
    }

    pub fn max_flow(&mut self, source: usize, sink: usize) -> f64 {
        let mut total = 0.0;
        loop {
            // BFS for a shortest augmenting path.
            let mut pred: Vec<Option<usize>> = vec![None; self.adj.len()];
            let mut queue = std::collections::VecDeque::new();
            queue.push_back(source);
            pred[source] = Some(usize::MAX);
            while let Some(u) = queue.pop_front() {
                if u == sink {
                    break;
                }
                for &aid in &self.adj[u] {
                    let arc = &self.arcs[aid];
                    if arc.cap > FLOW_EPS && pred[arc.to].is_none() {
                        pred[arc.to] = Some(aid);
                        queue.push_back(arc.to);
                    }
                }
            }
            if pred[sink].is_none() {
                return total;
            }
            let mut bottleneck = f64::INFINITY;
            let mut v = sink;
            while v != source {
                let aid = pred[v].unwrap();
                bottleneck = bottleneck.min(self.arcs[aid].cap);
                v = self.arcs[aid ^ 1].to;
            }
            let mut v = sink;
            while v != source {
                let aid = pred[v].unwrap();
                self.arcs[aid].cap -= bottleneck;
                self.arcs[aid ^ 1].cap += bottleneck;
                v = self.arcs[aid ^ 1].to;
            }
            total += bottleneck;
        }
    }

    /// Nodes reachable from `source` in the residual network; the source side
    /// of a minimum cut after `max_flow` has run.
    pub fn residual_reachable(&self, source: usize) -> Vec<bool> {
        let mut seen = vec![false; self.adj.len()];
        let mut stack = vec![source];
        seen[source] = true;
        while let Some(u) = stack.pop() {
            for &aid in &self.adj[u] {
                let arc = &self.arcs[aid];
                if arc.cap > FLOW_EPS && !seen[arc.to] {
                    seen[arc.to] = true;
                    stack.push(arc.to);
                }
            }
        }
        seen
    }
}
