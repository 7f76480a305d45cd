use ndarray::ArrayView2;

use super::heap::Candidates;
use super::{row, sq_dist};

struct Node {
    start: usize,
    end: usize,
    // child node ids; None for leaves
    children: Option<(usize, usize)>,
}

/// KD-tree with a bounding box per node; bounds are sums of squared
/// per-axis gaps, so they never exceed any contained point's computed
/// squared distance.
pub(super) struct KdTree {
    dim: usize,
    order: Vec<usize>,
    nodes: Vec<Node>,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl KdTree {
    pub(super) fn build(points: ArrayView2<'_, f64>, leaf_size: usize) -> Self {
        let (n, dim) = points.dim();
        let mut tree = KdTree {
            dim,
            order: (0..n).collect(),
            nodes: Vec::new(),
            lo: Vec::new(),
            hi: Vec::new(),
        };
        tree.build_node(&points, 0, n, leaf_size);
        tree
    }

    fn build_node(&mut self, points: &ArrayView2<'_, f64>, start: usize, end: usize, leaf: usize) -> usize {
        let id = self.nodes.len();
        let d = self.dim;
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for &i in &self.order[start..end] {
            for (j, &v) in row(points, i).iter().enumerate() {
                lo[j] = lo[j].min(v);
                hi[j] = hi[j].max(v);
            }
        }
        let (axis, spread) = (0..d)
            .map(|j| (j, hi[j] - lo[j]))
            .fold((0, f64::NEG_INFINITY), |best, c| if c.1 > best.1 { c } else { best });
        self.lo.extend_from_slice(&lo);
        self.hi.extend_from_slice(&hi);
        self.nodes.push(Node {
            start,
            end,
            children: None,
        });
        if end - start <= leaf || spread <= 0.0 {
            return id;
        }
        let mid = start + (end - start) / 2;
        self.order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            points[[a, axis]]
                .total_cmp(&points[[b, axis]])
                .then(a.cmp(&b))
        });
        let left = self.build_node(points, start, mid, leaf);
        let right = self.build_node(points, mid, end, leaf);
        self.nodes[id].children = Some((left, right));
        id
    }

    fn lower_bound(&self, node: usize, q: &[f64]) -> f64 {
        let d = self.dim;
        let lo = &self.lo[node * d..(node + 1) * d];
        let hi = &self.hi[node * d..(node + 1) * d];
        q.iter()
            .zip(lo.iter().zip(hi))
            .map(|(&x, (&l, &h))| {
                let gap = if x < l {
                    l - x
                } else if x > h {
                    x - h
                } else {
                    0.0
                };
                gap * gap
            })
            .sum()
    }

    pub(super) fn search(&self, points: &ArrayView2<'_, f64>, q: &[f64], cand: &mut Candidates) {
        self.visit(0, points, q, cand);
    }

    fn visit(&self, node: usize, points: &ArrayView2<'_, f64>, q: &[f64], cand: &mut Candidates) {
        let n = &self.nodes[node];
        match n.children {
            None => {
                for &i in &self.order[n.start..n.end] {
                    cand.offer(sq_dist(q, row(points, i)), i);
                }
            }
            Some((a, b)) => {
                let (la, lb) = (self.lower_bound(a, q), self.lower_bound(b, q));
                let (first, lf, second, ls) = if la <= lb { (a, la, b, lb) } else { (b, lb, a, la) };
                // equal bounds may still hide a lower-index tie, so prune strictly
                if lf <= cand.bound() {
                    self.visit(first, points, q, cand);
                }
                if ls <= cand.bound() {
                    self.visit(second, points, q, cand);
                }
            }
        }
    }
}
