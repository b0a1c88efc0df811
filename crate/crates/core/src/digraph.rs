//! Support digraphs and strongly connected components.
//!
//! Edge convention: a nonzero entry `(i, j)` contributes the edge `j → i`, so a
//! coordinate set is an invariant ideal exactly when it is closed under
//! successors.

use nalgebra::DMatrix;

use crate::lattice::CoordinateIdeal;

#[derive(Debug, Clone)]
pub struct Digraph {
    n: usize,
    succ: Vec<Vec<usize>>,
}

impl Digraph {
    pub fn new(n: usize) -> Self {
        Digraph {
            n,
            succ: vec![Vec::new(); n],
        }
    }

    /// Union support digraph: `j → i` iff some matrix has `|M_ij| > threshold`.
    pub fn from_supports<'a>(
        n: usize,
        matrices: impl IntoIterator<Item = &'a DMatrix<f64>>,
        threshold: f64,
    ) -> Self {
        let mut adj = vec![vec![false; n]; n];
        for m in matrices {
            assert_eq!(m.nrows(), n);
            for j in 0..n {
                for i in 0..n {
                    if m[(i, j)].abs() > threshold {
                        adj[j][i] = true;
                    }
                }
            }
        }
        Self::from_adjacency(&adj)
    }

    /// `adj[u][v]` means `u → v`.
    pub fn from_adjacency(adj: &[Vec<bool>]) -> Self {
        let n = adj.len();
        let succ = adj
            .iter()
            .map(|row| (0..n).filter(|&v| row[v]).collect())
            .collect();
        Digraph { n, succ }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn successors(&self, u: usize) -> &[usize] {
        &self.succ[u]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.succ[u].contains(&v)
    }

    /// Tarjan's algorithm. Components come out in reverse topological order
    /// (sinks first); each component is sorted.
    pub fn strongly_connected_components(&self) -> Vec<Vec<usize>> {
        let mut st = Tarjan {
            counter: 0,
            index: vec![None; self.n],
            low: vec![0; self.n],
            on_stack: vec![false; self.n],
            stack: Vec::new(),
            comps: Vec::new(),
        };
        for v in 0..self.n {
            if st.index[v].is_none() {
                st.visit(self, v);
            }
        }
        for c in &mut st.comps {
            c.sort_unstable();
        }
        st.comps
    }

    pub fn is_strongly_connected(&self) -> bool {
        self.n <= 1 || self.strongly_connected_components().len() == 1
    }

    /// Components ordered so that every component's successors appear before
    /// it; among the available components the one holding the smallest
    /// coordinate goes first.
    pub fn closure_order(&self) -> Vec<Vec<usize>> {
        let comps = self.strongly_connected_components();
        let mut comp_of = vec![0; self.n];
        for (c, members) in comps.iter().enumerate() {
            for &v in members {
                comp_of[v] = c;
            }
        }
        let mut placed = vec![false; comps.len()];
        let mut order = Vec::with_capacity(comps.len());
        while order.len() < comps.len() {
            let next = (0..comps.len())
                .filter(|&c| !placed[c])
                .filter(|&c| {
                    comps[c].iter().all(|&u| {
                        self.succ[u]
                            .iter()
                            .all(|&v| comp_of[v] == c || placed[comp_of[v]])
                    })
                })
                .min_by_key(|&c| comps[c][0])
                .expect("condensation of a digraph is acyclic");
            placed[next] = true;
            order.push(comps[next].clone());
        }
        order
    }

    /// Closed set (no edge leaves it) that is a single sink component,
    /// choosing the sink holding the smallest coordinate.
    pub fn smallest_sink_component(&self) -> Vec<usize> {
        self.closure_order().into_iter().next().unwrap_or_default()
    }

    /// True iff no edge leaves `set`.
    pub fn is_closed(&self, set: &CoordinateIdeal) -> bool {
        set.iter()
            .all(|u| self.succ[u].iter().all(|&v| set.contains(v)))
    }

    /// Vertices reachable from `start` (including it).
    pub fn reachable_from(&self, start: usize) -> Vec<bool> {
        let mut seen = vec![false; self.n];
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(u) = stack.pop() {
            for &v in &self.succ[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen
    }

    pub fn reversed(&self) -> Digraph {
        let mut succ = vec![Vec::new(); self.n];
        for (u, vs) in self.succ.iter().enumerate() {
            for &v in vs {
                succ[v].push(u);
            }
        }
        for s in &mut succ {
            s.sort_unstable();
        }
        Digraph { n: self.n, succ }
    }
}

struct Tarjan {
    counter: usize,
    index: Vec<Option<usize>>,
    low: Vec<usize>,
    on_stack: Vec<bool>,
    stack: Vec<usize>,
    comps: Vec<Vec<usize>>,
}

impl Tarjan {
    fn visit(&mut self, g: &Digraph, v: usize) {
        self.index[v] = Some(self.counter);
        self.low[v] = self.counter;
        self.counter += 1;
        self.stack.push(v);
        self.on_stack[v] = true;

        for &w in &g.succ[v] {
            match self.index[w] {
                None => {
                    self.visit(g, w);
                    self.low[v] = self.low[v].min(self.low[w]);
                }
                Some(iw) if self.on_stack[w] => {
                    self.low[v] = self.low[v].min(iw);
                }
                Some(_) => {}
            }
        }

        if Some(self.low[v]) == self.index[v] {
            let mut comp = Vec::new();
            loop {
                let w = self.stack.pop().expect("tarjan stack underflow");
                self.on_stack[w] = false;
                comp.push(w);
                if w == v {
                    break;
                }
            }
            self.comps.push(comp);
        }
    }
}
