//! Signed-graph utilities behind the sign-definite checks and rounding.
//!
//! The off-diagonal positions of the lifted data matrices induce a graph;
//! an edge carries `sigma = -1` when every matrix entry there is
//! nonpositive and `+1` when all are nonnegative (all-zero positions are
//! neutral and carry no edge). The cycle condition
//! `prod sigma = (-1)^|cycle|` holds for every cycle exactly when the
//! graph signed by `tau = -sigma` is balanced, which a two-coloring
//! decides in linear time.

use crate::matrixcore::SymMatrix;
use crate::model::{lift_block, QcqpData};

#[derive(Debug, Clone)]
pub struct SignGraph {
    pub nodes: usize,
    /// `(i, j, sigma)` with `i < j`
    pub edges: Vec<(usize, usize, i8)>,
    /// false when some position carries both signs
    pub sign_definite: bool,
}

/// Builds the sign graph of the lifted matrices `A_0..A_m` of a QCQP.
pub fn sign_graph(q: &QcqpData) -> SignGraph {
    let n = q.dim() + 1;
    let mut lifted: Vec<SymMatrix> = vec![lift_block(&q.obj_quad, &q.obj_lin)];
    for c in &q.constraints {
        lifted.push(lift_block(&c.quad, &c.lin));
    }
    let mut edges = Vec::new();
    let mut sign_definite = true;
    for i in 0..n {
        for j in (i + 1)..n {
            let mut pos = false;
            let mut neg = false;
            for a in &lifted {
                let v = a.get(i, j);
                if v > 0.0 {
                    pos = true;
                } else if v < 0.0 {
                    neg = true;
                }
            }
            if pos && neg {
                sign_definite = false;
            } else if pos {
                edges.push((i, j, 1i8));
            } else if neg {
                edges.push((i, j, -1i8));
            }
        }
    }
    SignGraph { nodes: n, edges, sign_definite }
}

/// Two-coloring of the graph signed by `tau = -sigma`: returns node signs
/// `s` with `s_i s_j = tau_ij` on every edge, or `None` when unbalanced.
/// Components are rooted at their smallest node with sign `+1`.
pub fn balance_coloring(g: &SignGraph) -> Option<Vec<i8>> {
    let mut adj: Vec<Vec<(usize, i8)>> = vec![Vec::new(); g.nodes];
    for &(i, j, sigma) in &g.edges {
        let tau = -sigma;
        adj[i].push((j, tau));
        adj[j].push((i, tau));
    }
    let mut sign = vec![0i8; g.nodes];
    for root in 0..g.nodes {
        if sign[root] != 0 {
            continue;
        }
        sign[root] = 1;
        let mut queue = std::collections::VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            for &(v, tau) in &adj[u] {
                let want = sign[u] * tau;
                if sign[v] == 0 {
                    sign[v] = want;
                    queue.push_back(v);
                } else if sign[v] != want {
                    return None;
                }
            }
        }
    }
    Some(sign)
}

/// Exhaustive verdict for tests: enumerates every simple cycle and checks
/// `prod sigma = (-1)^|cycle|` directly. Exponential; for small graphs.
pub fn balanced_by_cycle_enumeration(g: &SignGraph) -> bool {
    let mut adj: Vec<Vec<(usize, i8)>> = vec![Vec::new(); g.nodes];
    for &(i, j, s) in &g.edges {
        adj[i].push((j, s));
        adj[j].push((i, s));
    }
    // DFS over simple paths from each root to itself, roots in increasing
    // order so each cycle is seen from its smallest node
    fn dfs(
        adj: &[Vec<(usize, i8)>],
        root: usize,
        u: usize,
        prod: i32,
        len: usize,
        visited: &mut Vec<bool>,
    ) -> bool {
        for &(v, s) in &adj[u] {
            if v == root && len >= 2 {
                let want = if (len + 1) % 2 == 0 { 1 } else { -1 };
                if prod * s as i32 != want {
                    return false;
                }
            } else if v > root && !visited[v] {
                visited[v] = true;
                let ok = dfs(adj, root, v, prod * s as i32, len + 1, visited);
                visited[v] = false;
                if !ok {
                    return false;
                }
            }
        }
        true
    }
    let mut visited = vec![false; g.nodes];
    for root in 0..g.nodes {
        visited[root] = true;
        if !dfs(&adj, root, root, 1, 0, &mut visited) {
            return false;
        }
        visited[root] = false;
    }
    true
}
