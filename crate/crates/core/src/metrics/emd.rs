//! Earth mover's distance on the pixel lattice, solved exactly as a
//! transportation problem with the primal network simplex method.

use crate::error::{Error, Result};
use crate::imaging::{resize_bicubic, PlanarImage};

/// EMD between two equally sized nonnegative maps.
///
/// Both maps are bicubically shrunk so their longer side is at most
/// `max_side`, clipped at zero, normalized to unit mass, and compared with
/// Euclidean ground distance between pixel centres.
pub fn emd(a: &PlanarImage, b: &PlanarImage, max_side: usize) -> Result<f64> {
    if a.height() != b.height() || a.width() != b.width() {
        return Err(Error::DimensionMismatch(format!(
            "emd: {}x{} vs {}x{}",
            a.height(),
            a.width(),
            b.height(),
            b.width()
        )));
    }
    let (h, w) = (a.height(), a.width());
    let longest = h.max(w);
    let (a, b) = if longest > max_side.max(1) {
        let scale = max_side.max(1) as f64 / longest as f64;
        let nh = ((h as f64 * scale).round() as usize).clamp(1, max_side);
        let nw = ((w as f64 * scale).round() as usize).clamp(1, max_side);
        (resize_bicubic(a, nh, nw), resize_bicubic(b, nh, nw))
    } else {
        (a.clone(), b.clone())
    };
    emd_same_grid(&a, &b)
}

/// EMD without resampling: clip at zero, normalize, solve.
pub fn emd_same_grid(a: &PlanarImage, b: &PlanarImage) -> Result<f64> {
    let w = a.width();
    let supply = unit_mass(a.plane(0))?;
    let demand = unit_mass(b.plane(0))?;
    let coords = |i: usize| ((i / w) as f64, (i % w) as f64);
    transport_cost(&supply, &demand, |i, j| {
        let (ya, xa) = coords(i);
        let (yb, xb) = coords(j);
        ((ya - yb).powi(2) + (xa - xb).powi(2)).sqrt()
    })
}

fn unit_mass(values: &[f64]) -> Result<Vec<f64>> {
    let clipped: Vec<f64> = values.iter().map(|&v| v.max(0.0)).collect();
    let total: f64 = clipped.iter().sum();
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::ZeroMass);
    }
    Ok(clipped.into_iter().map(|v| v / total).collect())
}

/// Minimum cost of moving `supply` onto `demand` (equal totals) with
/// per-unit cost `cost(i, j) >= 0`.
pub fn transport_cost(supply: &[f64], demand: &[f64], cost: impl Fn(usize, usize) -> f64) -> Result<f64> {
    let sources: Vec<usize> = (0..supply.len()).filter(|&i| supply[i] > 0.0).collect();
    let sinks: Vec<usize> = (0..demand.len()).filter(|&j| demand[j] > 0.0).collect();
    if sources.is_empty() || sinks.is_empty() {
        return Err(Error::ZeroMass);
    }
    let mut matrix = Vec::with_capacity(sources.len() * sinks.len());
    for &i in &sources {
        for &j in &sinks {
            matrix.push(cost(i, j));
        }
    }
    let s: Vec<f64> = sources.iter().map(|&i| supply[i]).collect();
    let d: Vec<f64> = sinks.iter().map(|&j| demand[j]).collect();
    Ok(NetworkSimplex::new(&s, &d, matrix).solve())
}

const NONE: usize = usize::MAX;

/// Spanning-tree basis over `n` sources, `m` sinks and an artificial root.
///
/// Real arc `k = i * m + j` runs from source `i` to node `n + j`. Every
/// non-root node stores the arc to its parent (`pred`), whether that arc
/// points upward (`up`), and its flow.
struct NetworkSimplex {
    n: usize,
    m: usize,
    cost: Vec<f64>,
    art_cost: f64,
    parent: Vec<usize>,
    pred: Vec<usize>,
    up: Vec<bool>,
    flow: Vec<f64>,
    depth: Vec<usize>,
    pi: Vec<f64>,
    children: Vec<Vec<usize>>,
    cursor: usize,
    block: usize,
    eps: f64,
}

impl NetworkSimplex {
    fn new(supply: &[f64], demand: &[f64], cost: Vec<f64>) -> Self {
        let (n, m) = (supply.len(), demand.len());
        let nodes = n + m + 1;
        let root = n + m;
        let max_cost = cost.iter().cloned().fold(0.0, f64::max);
        let art_cost = (max_cost + 1.0) * (n + m) as f64;
        let mut s = Self {
            n,
            m,
            cost,
            art_cost,
            parent: vec![root; nodes],
            pred: vec![NONE; nodes],
            up: vec![false; nodes],
            flow: vec![0.0; nodes],
            depth: vec![1; nodes],
            pi: vec![0.0; nodes],
            children: vec![Vec::new(); nodes],
            cursor: 0,
            block: ((n * m) as f64).sqrt().ceil().max(10.0) as usize,
            eps: 1e-12 * (1.0 + max_cost),
        };
        s.parent[root] = NONE;
        s.depth[root] = 0;
        for u in 0..n + m {
            s.pred[u] = n * m + u;
            if u < n {
                s.up[u] = true;
                s.flow[u] = supply[u];
            } else {
                s.flow[u] = demand[u - n];
                s.pi[u] = art_cost;
            }
        }
        s.children[root] = (0..n + m).collect();
        s
    }

    fn arc_cost(&self, k: usize) -> f64 {
        if k < self.n * self.m {
            self.cost[k]
        } else if k - self.n * self.m < self.n {
            0.0
        } else {
            self.art_cost
        }
    }

    #[inline]
    fn reduced(&self, k: usize) -> f64 {
        let (i, j) = (k / self.m, k % self.m);
        self.cost[k] + self.pi[i] - self.pi[self.n + j]
    }

    /// Block search pricing over the real arcs.
    fn entering(&mut self) -> Option<usize> {
        let total = self.n * self.m;
        let mut best = NONE;
        let mut best_rc = -self.eps;
        let mut seen = 0;
        for _ in 0..total {
            let k = self.cursor;
            self.cursor = if k + 1 == total { 0 } else { k + 1 };
            let rc = self.reduced(k);
            if rc < best_rc {
                best_rc = rc;
                best = k;
            }
            seen += 1;
            if seen == self.block {
                if best != NONE {
                    return Some(best);
                }
                seen = 0;
            }
        }
        (best != NONE).then_some(best)
    }

    fn join(&self, mut a: usize, mut b: usize) -> usize {
        while a != b {
            if self.depth[a] >= self.depth[b] {
                a = self.parent[a];
            } else {
                b = self.parent[b];
            }
        }
        a
    }

    fn pivot(&mut self, k: usize) {
        let s = k / self.m;
        let t = self.n + k % self.m;
        let join = self.join(s, t);

        // leaving arc: strict on the source side, non-strict on the sink side
        let mut delta = f64::INFINITY;
        let mut out = NONE;
        let mut out_on_source_side = false;
        let mut u = s;
        while u != join {
            if self.up[u] && self.flow[u] < delta {
                delta = self.flow[u];
                out = u;
                out_on_source_side = true;
            }
            u = self.parent[u];
        }
        let mut u = t;
        while u != join {
            if !self.up[u] && self.flow[u] <= delta {
                delta = self.flow[u];
                out = u;
                out_on_source_side = false;
            }
            u = self.parent[u];
        }
        debug_assert!(out != NONE, "transportation problems have no negative cycles");

        if delta > 0.0 {
            let mut u = s;
            while u != join {
                self.flow[u] += if self.up[u] { -delta } else { delta };
                u = self.parent[u];
            }
            let mut u = t;
            while u != join {
                self.flow[u] += if self.up[u] { delta } else { -delta };
                u = self.parent[u];
            }
        }

        let (inner, outer) = if out_on_source_side { (s, t) } else { (t, s) };

        // reverse the tree path inner -> out and hang it below `outer`
        let mut path = vec![inner];
        while *path.last().unwrap() != out {
            let last = *path.last().unwrap();
            path.push(self.parent[last]);
        }
        let old_parent_of_out = self.parent[out];
        self.children[old_parent_of_out].retain(|&c| c != out);
        for pair in path.windows(2) {
            let (child, parent) = (pair[0], pair[1]);
            self.children[parent].retain(|&c| c != child);
            self.children[child].push(parent);
        }
        for i in (0..path.len() - 1).rev() {
            let (lower, upper) = (path[i], path[i + 1]);
            self.parent[upper] = lower;
            self.pred[upper] = self.pred[lower];
            self.up[upper] = !self.up[lower];
            self.flow[upper] = self.flow[lower];
        }
        self.parent[inner] = outer;
        self.pred[inner] = k;
        self.up[inner] = inner == s;
        self.flow[inner] = delta;
        self.children[outer].push(inner);

        // restore zero reduced cost on the entering arc across the subtree
        let shift = if inner == t {
            self.cost[k] + self.pi[s] - self.pi[t]
        } else {
            self.pi[t] - self.cost[k] - self.pi[s]
        };
        let mut stack = vec![inner];
        while let Some(u) = stack.pop() {
            self.pi[u] += shift;
            self.depth[u] = self.depth[self.parent[u]] + 1;
            stack.extend(self.children[u].iter().copied());
        }
    }

    fn solve(mut self) -> f64 {
        while let Some(k) = self.entering() {
            self.pivot(k);
        }
        let real = self.n * self.m;
        (0..self.n + self.m)
            .filter(|&u| self.pred[u] < real)
            .map(|u| self.flow[u] * self.arc_cost(self.pred[u]))
            .sum()
    }
}
