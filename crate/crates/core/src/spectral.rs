//! Johnson graphs, Laplacian spectral gaps, and checkers for the Cheeger-type
//! boundary inequality and the Lovász form of Kruskal–Katona.

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::setcore::{binomial, k_subsets, Family, SetWord};

pub const MAX_VERTICES: usize = 10_000;

/// Graphs up to this order get a dense eigensolve; larger ones use deflated
/// power iteration.
pub const DENSE_LIMIT: usize = 1_500;

/// Undirected simple graph with sorted neighbour lists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexGraph {
    labels: Vec<SetWord>,
    adj: Vec<Vec<usize>>,
    regular_degree: Option<usize>,
}

impl VertexGraph {
    /// Builds a graph from an edge list; duplicate edges are merged.
    pub fn new(labels: Vec<SetWord>, edges: &[(usize, usize)]) -> Result<Self> {
        let n = labels.len();
        if n > MAX_VERTICES {
            return Err(Error::Budget(format!("{n} vertices exceeds the cap of {MAX_VERTICES}")));
        }
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::InvalidInput(format!("edge ({a}, {b}) leaves the {n} vertices")));
            }
            if a == b {
                return Err(Error::InvalidInput(format!("self-loop at {a}")));
            }
            adj[a].push(b);
            adj[b].push(a);
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        Ok(Self::from_adjacency(labels, adj))
    }

    fn from_adjacency(labels: Vec<SetWord>, adj: Vec<Vec<usize>>) -> Self {
        let regular_degree = match adj.first() {
            Some(first) if adj.iter().all(|l| l.len() == first.len()) => Some(first.len()),
            _ => None,
        };
        VertexGraph { labels, adj, regular_degree }
    }

    /// `K_n` with singleton labels.
    pub fn complete(n: usize) -> Result<Self> {
        johnson(n, 1)
    }

    pub fn order(&self) -> usize {
        self.adj.len()
    }

    pub fn labels(&self) -> &[SetWord] {
        &self.labels
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn regular_degree(&self) -> Option<usize> {
        self.regular_degree
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn is_connected(&self) -> bool {
        let n = self.order();
        if n == 0 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut reached = 1;
        while let Some(v) = queue.pop_front() {
            for &w in &self.adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    reached += 1;
                    queue.push_back(w);
                }
            }
        }
        reached == n
    }

    /// Laplacian `D − A`, which is `d·I − A` for a `d`-regular graph.
    pub fn laplacian(&self) -> DMatrix<f64> {
        let n = self.order();
        let mut l = DMatrix::zeros(n, n);
        for v in 0..n {
            l[(v, v)] = self.degree(v) as f64;
            for &w in &self.adj[v] {
                l[(v, w)] = -1.0;
            }
        }
        l
    }

    fn laplacian_apply(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(
            self.order(),
            (0..self.order()).map(|v| self.degree(v) as f64 * x[v] - self.adj[v].iter().map(|&w| x[w]).sum::<f64>()),
        )
    }
}

/// `J(n, m)`: the `m`-subsets of `[n]`, adjacent when they share `m − 1`
/// elements. Vertices are in colex order.
pub fn johnson(n: usize, m: usize) -> Result<VertexGraph> {
    if m == 0 || m > n {
        return Err(Error::InvalidInput(format!("need 1 ≤ m ≤ n, got n={n} m={m}")));
    }
    let size = binomial(n as u64, m as u64);
    if size > MAX_VERTICES as u128 {
        return Err(Error::Budget(format!("J({n},{m}) has {size} vertices, cap is {MAX_VERTICES}")));
    }
    let labels: Vec<SetWord> = k_subsets(n, m).collect();
    let all = SetWord::full(n);
    let adj = labels
        .iter()
        .map(|&d| {
            let mut list: Vec<usize> = d
                .iter()
                .flat_map(|x| {
                    all.difference(d).iter().map(move |y| d.difference(SetWord::singleton(x)).union(SetWord::singleton(y)))
                })
                .map(|nb| labels.binary_search(&nb).expect("swap stays in C([n],m)"))
                .collect();
            list.sort_unstable();
            list
        })
        .collect();
    Ok(VertexGraph::from_adjacency(labels, adj))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Lambda2 {
    pub value: f64,
    /// False for a disconnected graph, where `value` is reported as 0.
    pub connected: bool,
}

/// Second smallest Laplacian eigenvalue.
pub fn lambda2(g: &VertexGraph) -> Lambda2 {
    let n = g.order();
    if n < 2 || !g.is_connected() {
        return Lambda2 { value: 0.0, connected: n < 2 };
    }
    let value = if n <= DENSE_LIMIT { dense_lambda2(g) } else { power_lambda2(g) };
    Lambda2 { value, connected: true }
}

fn dense_lambda2(g: &VertexGraph) -> f64 {
    let mut eig = SymmetricEigen::new(g.laplacian()).eigenvalues.as_slice().to_vec();
    eig.sort_by(f64::total_cmp);
    eig[1]
}

/// Power iteration on `c·I − L` with the constant vector projected out; the
/// top eigenvalue there is `c − λ₂`.
fn power_lambda2(g: &VertexGraph) -> f64 {
    let n = g.order();
    let c = 2.0 * (0..n).map(|v| g.degree(v)).max().unwrap_or(0) as f64 + 1.0;
    let mut x = DVector::from_iterator(n, (0..n).map(|i| ((i * 7919 + 13) % 1009) as f64 - 504.0));
    let project = |v: &mut DVector<f64>| {
        let mean = v.sum() / n as f64;
        v.add_scalar_mut(-mean);
        let norm = v.norm();
        *v /= norm;
    };
    project(&mut x);
    let mut estimate = 0.0;
    for _ in 0..200_000 {
        let mut y = &x * c - g.laplacian_apply(&x);
        let rayleigh = x.dot(&y);
        project(&mut y);
        let done = (rayleigh - estimate).abs() < 1e-13 * c;
        estimate = rayleigh;
        x = y;
        if done {
            break;
        }
    }
    let lx = g.laplacian_apply(&x);
    x.dot(&lx)
}

fn checked_subset(g: &VertexGraph, subset: &[usize]) -> Result<Vec<bool>> {
    let mut mask = vec![false; g.order()];
    for &v in subset {
        if v >= g.order() {
            return Err(Error::InvalidInput(format!("vertex {v} not in a graph of order {}", g.order())));
        }
        mask[v] = true;
    }
    Ok(mask)
}

/// Number of edges with exactly one end in `subset`.
pub fn boundary_edges(g: &VertexGraph, subset: &[usize]) -> Result<usize> {
    let mask = checked_subset(g, subset)?;
    Ok((0..g.order())
        .filter(|&v| mask[v])
        .map(|v| g.adj[v].iter().filter(|&&w| !mask[w]).count())
        .sum())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CheegerOutcome {
    pub holds: bool,
    pub boundary: usize,
    /// `λ₂ |S| / 2`.
    pub bound: f64,
    pub slack: f64,
}

/// Checks `|∂S| ≥ λ₂ |S| / 2` for `|S| ≤ |V| / 2`.
pub fn cheeger_check(g: &VertexGraph, subset: &[usize]) -> Result<CheegerOutcome> {
    cheeger_check_with(g, subset, lambda2(g).value)
}

/// [`cheeger_check`] with a precomputed `λ₂`.
pub fn cheeger_check_with(g: &VertexGraph, subset: &[usize], lambda2: f64) -> Result<CheegerOutcome> {
    let mask = checked_subset(g, subset)?;
    let size = mask.iter().filter(|&&b| b).count();
    if 2 * size > g.order() {
        return Err(Error::Precondition(format!("|S| = {size} exceeds |V|/2 = {}/2", g.order())));
    }
    let boundary = boundary_edges(g, subset)?;
    let bound = lambda2 * size as f64 / 2.0;
    let slack = boundary as f64 - bound;
    Ok(CheegerOutcome { holds: slack >= -1e-9, boundary, bound, slack })
}

/// Generalised binomial `x(x−1)…(x−h+1)/h!` for real `x`.
pub fn real_binomial(x: f64, h: usize) -> f64 {
    (0..h).fold(1.0, |acc, i| acc * (x - i as f64) / (i + 1) as f64)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KkOutcome {
    pub holds: bool,
    /// Real `x ≥ k − 1` with `C(x, k) = |F|`.
    pub x: f64,
    pub shadow: usize,
    pub bound: f64,
}

/// Checks `|∂_h F| ≥ C(x, h)` where `|F| = C(x, k)`.
pub fn kk_check(f: &Family, h: usize) -> Result<KkOutcome> {
    if f.is_empty() {
        return Ok(KkOutcome { holds: true, x: 0.0, shadow: 0, bound: 0.0 });
    }
    let Some(k) = f.uniformity() else {
        return Err(Error::Precondition("family is not uniform".into()));
    };
    if h == 0 || h > k {
        return Err(Error::Precondition(format!("need 1 ≤ h ≤ k = {k}, got h = {h}")));
    }
    let target = f.len() as f64;
    let mut lo = (k - 1) as f64;
    let mut hi = k as f64;
    while real_binomial(hi, k) < target {
        lo = hi;
        hi *= 2.0;
    }
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if real_binomial(mid, k) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // an exact integer root is taken as is; otherwise the lower end keeps the
    // bound from overshooting
    let x = if real_binomial(hi.round(), k) == target && (hi - hi.round()).abs() < 1e-9 { hi.round() } else { lo };
    let bound = real_binomial(x, h);
    let shadow = f.shadow(h).0.len();
    Ok(KkOutcome { holds: shadow as f64 >= bound - 1e-6, x, shadow, bound })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn johnson_shapes() {
        let k5 = johnson(5, 1).unwrap();
        assert_eq!(k5.edge_count(), 10);
        let j42 = johnson(4, 2).unwrap();
        assert_eq!((j42.order(), j42.regular_degree()), (6, Some(4)));
        let j62 = johnson(6, 2).unwrap();
        assert_eq!((j62.order(), j62.regular_degree()), (15, Some(8)));
        assert!(matches!(johnson(20, 10), Err(Error::Budget(_))));
    }

    #[test]
    fn spectral_gaps() {
        assert!((lambda2(&VertexGraph::complete(7).unwrap()).value - 7.0).abs() < 1e-8);
        assert!((lambda2(&johnson(6, 2).unwrap()).value - 6.0).abs() < 1e-8);
        assert!((lambda2(&johnson(7, 3).unwrap()).value - 7.0).abs() < 1e-8);
        let two = VertexGraph::new(vec![SetWord::EMPTY; 4], &[(0, 1), (2, 3)]).unwrap();
        assert_eq!(lambda2(&two), Lambda2 { value: 0.0, connected: false });
    }

    #[test]
    fn power_iteration_agrees_with_dense() {
        let g = johnson(8, 3).unwrap();
        assert!((power_lambda2(&g) - dense_lambda2(&g)).abs() < 1e-8);
        let path = VertexGraph::new(vec![SetWord::EMPTY; 6], &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5)]).unwrap();
        let exact = 2.0 - 2.0 * (std::f64::consts::PI / 6.0).cos();
        assert!((power_lambda2(&path) - exact).abs() < 1e-8);
    }

    #[test]
    fn boundary_examples() {
        let k4 = VertexGraph::complete(4).unwrap();
        assert_eq!(boundary_edges(&k4, &[0, 1, 2, 3]).unwrap(), 0);
        assert_eq!(boundary_edges(&k4, &[2]).unwrap(), 3);
        let j42 = johnson(4, 2).unwrap();
        let a = j42.labels().iter().position(|&l| l == SetWord::full(2)).unwrap();
        let b = j42.labels().iter().position(|&l| l == SetWord(0b1100)).unwrap();
        assert_eq!(boundary_edges(&j42, &[a, b]).unwrap(), 8);
    }

    #[test]
    fn cheeger_examples() {
        let g = johnson(6, 2).unwrap();
        let star: Vec<usize> = (0..g.order()).filter(|&v| g.labels()[v].contains(0)).collect();
        let out = cheeger_check(&g, &star).unwrap();
        assert!(out.holds);
        assert_eq!(out.boundary, 5 * 4);
        assert!((out.slack - 5.0).abs() < 1e-8);
        assert!(cheeger_check(&g, &[3]).unwrap().holds);
        let too_big: Vec<usize> = (0..8).collect();
        assert!(matches!(cheeger_check(&g, &too_big), Err(Error::Precondition(_))));
    }

    #[test]
    fn kk_examples() {
        let full = Family::complete(7, 3).unwrap();
        let out = kk_check(&full, 2).unwrap();
        assert!(out.holds);
        assert_eq!(out.x, 7.0);
        assert_eq!(out.shadow, 21);

        let one = Family::from_lists(9, &[&[1, 4, 6, 8]]).unwrap();
        let out = kk_check(&one, 2).unwrap();
        assert_eq!((out.x, out.shadow, out.bound), (4.0, 6, 6.0));

        assert!(kk_check(&Family::empty(5), 2).unwrap().holds);
        assert!(kk_check(&full, 4).is_err());
    }

    #[test]
    fn real_binomial_matches_integers() {
        for m in 0..12u64 {
            for a in 0..6usize {
                assert_eq!(real_binomial(m as f64, a), binomial(m, a as u64) as f64);
            }
        }
    }
}
