//! Exact solver for the balanced transportation problem.
//!
//! Network simplex specialized to the dense bipartite case: `n` sources with
//! integer supplies, `m` sinks with integer demands, one arc per (source,
//! sink) pair. The basis is kept strongly feasible (every zero-flow tree arc
//! points toward the root), which rules out cycling under degeneracy; the
//! leaving arc is the last blocking arc met when walking the pivot cycle
//! from the apex in the entering arc's direction.

const NO_NODE: usize = usize::MAX;

pub(crate) struct TransportSolution {
    /// Row-major n x m optimal flows, integral.
    pub flows: Vec<i64>,
    /// Objective value: sum of flow * cost.
    pub objective: f64,
}

/// Solve min sum c_ij x_ij subject to row sums = supplies, column sums =
/// demands, x >= 0. Supplies and demands must be positive and balanced.
pub(crate) fn solve_transportation(
    supplies: &[i64],
    demands: &[i64],
    costs: &[f64],
) -> TransportSolution {
    let n = supplies.len();
    let m = demands.len();
    assert_eq!(costs.len(), n * m);
    debug_assert_eq!(
        supplies.iter().sum::<i64>(),
        demands.iter().sum::<i64>(),
        "transportation problem must be balanced"
    );
    debug_assert!(supplies.iter().all(|&s| s > 0) && demands.iter().all(|&d| d > 0));

    let mut solver = Simplex::new(n, m, supplies, demands, costs);
    solver.run();
    solver.extract()
}

struct Simplex<'a> {
    n: usize,
    m: usize,
    costs: &'a [f64],
    big: f64,
    tol: f64,
    /// Flow per arc: real arcs 0..n*m, then one artificial arc per node.
    flow: Vec<i64>,
    in_tree: Vec<bool>,
    /// Spanning-tree adjacency: arcs incident to each node.
    adj: Vec<Vec<usize>>,
    parent: Vec<usize>,
    pred_arc: Vec<usize>,
    depth: Vec<u32>,
    pi: Vec<f64>,
    /// Cursor for the cyclic block pivot search.
    scan_from: usize,
    block: usize,
}

impl<'a> Simplex<'a> {
    fn new(n: usize, m: usize, supplies: &[i64], demands: &[i64], costs: &'a [f64]) -> Self {
        let nodes = n + m + 1;
        let root = n + m;
        let arcs = n * m + n + m;
        let max_cost = costs.iter().cloned().fold(0.0, f64::max);
        let big = (nodes as f64 + 1.0) * (max_cost + 1.0);

        let mut flow = vec![0i64; arcs];
        let mut in_tree = vec![false; arcs];
        let mut adj = vec![Vec::new(); nodes];
        let mut parent = vec![root; nodes];
        let mut pred_arc = vec![usize::MAX; nodes];
        let mut depth = vec![1u32; nodes];
        let mut pi = vec![0.0; nodes];
        parent[root] = NO_NODE;
        depth[root] = 0;

        // Initial star basis through the root: source -> root carrying the
        // supply, root -> sink carrying the demand. All flows positive, so
        // the tree starts strongly feasible.
        for i in 0..n {
            let a = n * m + i;
            flow[a] = supplies[i];
            in_tree[a] = true;
            adj[i].push(a);
            adj[root].push(a);
            pred_arc[i] = a;
            pi[i] = -big;
        }
        for j in 0..m {
            let a = n * m + n + j;
            flow[a] = demands[j];
            in_tree[a] = true;
            adj[n + j].push(a);
            adj[root].push(a);
            pred_arc[n + j] = a;
            pi[n + j] = big;
        }

        let block = ((n * m) as f64).sqrt().ceil() as usize + 16;
        Simplex {
            n,
            m,
            costs,
            big,
            tol: 1e-10 * (max_cost + 1.0),
            flow,
            in_tree,
            adj,
            parent,
            pred_arc,
            depth,
            pi,
            scan_from: 0,
            block,
        }
    }

    fn tail(&self, arc: usize) -> usize {
        let nm = self.n * self.m;
        if arc < nm {
            arc / self.m
        } else if arc < nm + self.n {
            arc - nm // source -> root
        } else {
            self.n + self.m // root -> sink
        }
    }

    fn head(&self, arc: usize) -> usize {
        let nm = self.n * self.m;
        if arc < nm {
            self.n + arc % self.m
        } else if arc < nm + self.n {
            self.n + self.m
        } else {
            arc - nm // root -> sink j at node n + j
        }
    }

    fn cost(&self, arc: usize) -> f64 {
        if arc < self.n * self.m {
            self.costs[arc]
        } else {
            self.big
        }
    }

    fn reduced_cost(&self, arc: usize) -> f64 {
        self.cost(arc) + self.pi[self.tail(arc)] - self.pi[self.head(arc)]
    }

    /// Cyclic block search over real arcs: the most negative reduced cost
    /// within the first block that contains any negative arc.
    fn entering_arc(&mut self) -> Option<usize> {
        let nm = self.n * self.m;
        let mut scanned = 0;
        let mut pos = self.scan_from;
        while scanned < nm {
            let stop = (self.block).min(nm - scanned);
            let mut best = None;
            let mut best_rc = -self.tol;
            for _ in 0..stop {
                let arc = pos;
                pos += 1;
                if pos == nm {
                    pos = 0;
                }
                if self.in_tree[arc] {
                    continue;
                }
                let rc = self.reduced_cost(arc);
                if rc < best_rc {
                    best_rc = rc;
                    best = Some(arc);
                }
            }
            scanned += stop;
            if best.is_some() {
                self.scan_from = pos;
                return best;
            }
        }
        None
    }

    /// Arcs from `node` up to (excluding) `stop`, in walking order.
    fn path_up(&self, mut node: usize, stop: usize) -> Vec<usize> {
        let mut arcs = Vec::new();
        while node != stop {
            arcs.push(self.pred_arc[node]);
            node = self.parent[node];
        }
        arcs
    }

    fn apex(&self, mut u: usize, mut v: usize) -> usize {
        while self.depth[u] > self.depth[v] {
            u = self.parent[u];
        }
        while self.depth[v] > self.depth[u] {
            v = self.parent[v];
        }
        while u != v {
            u = self.parent[u];
            v = self.parent[v];
        }
        u
    }

    /// Whether the tree arc at `node` (connecting it to its parent) gains
    /// flow when the pivot cycle is traversed through it in direction `dir`.
    /// `dir` = true means the traversal runs parent-to-node.
    fn gains(&self, node: usize, downward: bool) -> bool {
        let arc = self.pred_arc[node];
        let arc_points_down = self.tail(arc) == self.parent[node];
        arc_points_down == downward
    }

    fn run(&mut self) {
        while let Some(entering) = self.entering_arc() {
            self.pivot(entering);
        }
    }

    fn pivot(&mut self, entering: usize) {
        let u = self.tail(entering);
        let v = self.head(entering);
        let apex = self.apex(u, v);
        // Cycle orientation follows the entering arc: apex ~> u, (u,v),
        // v ~> apex.
        let up_side = self.path_up(u, apex); // traversed downward in cycle order
        let down_side = self.path_up(v, apex); // traversed upward in cycle order

        // Bottleneck: smallest flow among arcs the cycle pushes against.
        let mut delta = i64::MAX;
        let walk = |this: &Simplex, node: usize, downward: bool, delta: &mut i64| {
            if !this.gains(node, downward) {
                *delta = (*delta).min(this.flow[this.pred_arc[node]]);
            }
        };
        let mut x = u;
        for _ in &up_side {
            walk(self, x, true, &mut delta);
            x = self.parent[x];
        }
        let mut y = v;
        for _ in &down_side {
            walk(self, y, false, &mut delta);
            y = self.parent[y];
        }
        debug_assert!(delta != i64::MAX, "transportation polytope is bounded");

        // Leaving arc: last blocking arc in cycle order, i.e. first found
        // scanning the v-side from the apex end, then the u-side from u.
        let mut leaving = usize::MAX;
        let mut nodes_v = Vec::with_capacity(down_side.len());
        let mut y = v;
        for _ in &down_side {
            nodes_v.push(y);
            y = self.parent[y];
        }
        for &node in nodes_v.iter().rev() {
            if !self.gains(node, false) && self.flow[self.pred_arc[node]] == delta {
                leaving = self.pred_arc[node];
                break;
            }
        }
        if leaving == usize::MAX {
            let mut x = u;
            for _ in &up_side {
                if !self.gains(x, true) && self.flow[self.pred_arc[x]] == delta {
                    leaving = self.pred_arc[x];
                    break;
                }
                x = self.parent[x];
            }
        }
        debug_assert!(leaving != usize::MAX);

        // Push delta around the cycle.
        self.flow[entering] += delta;
        let mut x = u;
        for _ in &up_side {
            let arc = self.pred_arc[x];
            if self.gains(x, true) {
                self.flow[arc] += delta;
            } else {
                self.flow[arc] -= delta;
            }
            x = self.parent[x];
        }
        let mut y = v;
        for _ in &down_side {
            let arc = self.pred_arc[y];
            if self.gains(y, false) {
                self.flow[arc] += delta;
            } else {
                self.flow[arc] -= delta;
            }
            y = self.parent[y];
        }

        // Swap the arcs and rebuild the affected tree labels.
        self.detach(leaving);
        self.attach(entering);
        self.relabel();
    }

    fn detach(&mut self, arc: usize) {
        self.in_tree[arc] = false;
        for node in [self.tail(arc), self.head(arc)] {
            let pos = self.adj[node].iter().position(|&a| a == arc).unwrap();
            self.adj[node].swap_remove(pos);
        }
    }

    fn attach(&mut self, arc: usize) {
        self.in_tree[arc] = true;
        let (t, h) = (self.tail(arc), self.head(arc));
        self.adj[t].push(arc);
        self.adj[h].push(arc);
    }

    /// Recompute parent/pred/depth/potential for the whole tree. O(nodes).
    fn relabel(&mut self) {
        let root = self.n + self.m;
        let mut stack = vec![root];
        self.parent[root] = NO_NODE;
        self.depth[root] = 0;
        self.pi[root] = 0.0;
        let mut visited = vec![false; self.n + self.m + 1];
        visited[root] = true;
        while let Some(node) = stack.pop() {
            for idx in 0..self.adj[node].len() {
                let arc = self.adj[node][idx];
                let (t, h) = (self.tail(arc), self.head(arc));
                let next = if t == node { h } else { t };
                if visited[next] {
                    continue;
                }
                visited[next] = true;
                self.parent[next] = node;
                self.pred_arc[next] = arc;
                self.depth[next] = self.depth[node] + 1;
                self.pi[next] = if t == node {
                    self.pi[node] + self.cost(arc)
                } else {
                    self.pi[node] - self.cost(arc)
                };
                stack.push(next);
            }
        }
        debug_assert!(visited.iter().all(|&v| v), "tree must stay spanning");
    }

    fn extract(&self) -> TransportSolution {
        let nm = self.n * self.m;
        debug_assert!(
            self.flow[nm..].iter().all(|&f| f == 0),
            "artificial arcs must be drained at optimality"
        );
        let flows = self.flow[..nm].to_vec();
        let objective = flows
            .iter()
            .zip(self.costs)
            .map(|(&f, &c)| f as f64 * c)
            .sum();
        TransportSolution { flows, objective }
    }
}
