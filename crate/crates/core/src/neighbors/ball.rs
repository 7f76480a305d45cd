use ndarray::ArrayView2;

use super::heap::Candidates;
use super::{dist, row, sq_dist};

struct Node {
    start: usize,
    end: usize,
    radius: f64,
    children: Option<(usize, usize)>,
}

/// Ball tree: each node stores the centroid of its points and the largest
/// distance from it.
pub(super) struct BallTree {
    dim: usize,
    order: Vec<usize>,
    nodes: Vec<Node>,
    centers: Vec<f64>,
}

impl BallTree {
    pub(super) fn build(points: ArrayView2<'_, f64>, leaf_size: usize) -> Self {
        let (n, dim) = points.dim();
        let mut tree = BallTree {
            dim,
            order: (0..n).collect(),
            nodes: Vec::new(),
            centers: Vec::new(),
        };
        tree.build_node(&points, 0, n, leaf_size);
        tree
    }

    fn build_node(&mut self, points: &ArrayView2<'_, f64>, start: usize, end: usize, leaf: usize) -> usize {
        let id = self.nodes.len();
        let d = self.dim;
        let count = (end - start) as f64;
        let mut center = vec![0.0; d];
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for &i in &self.order[start..end] {
            for (j, &v) in row(points, i).iter().enumerate() {
                center[j] += v;
                lo[j] = lo[j].min(v);
                hi[j] = hi[j].max(v);
            }
        }
        center.iter_mut().for_each(|c| *c /= count);
        let radius = self.order[start..end]
            .iter()
            .map(|&i| dist(&center, row(points, i)))
            .fold(0.0, f64::max);
        let (axis, spread) = (0..d)
            .map(|j| (j, hi[j] - lo[j]))
            .fold((0, f64::NEG_INFINITY), |best, c| if c.1 > best.1 { c } else { best });
        self.centers.extend_from_slice(&center);
        self.nodes.push(Node {
            start,
            end,
            radius,
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

    fn center(&self, node: usize) -> &[f64] {
        &self.centers[node * self.dim..(node + 1) * self.dim]
    }

    /// Whether no point of `node` can enter the candidate set. The bound
    /// goes through a square root and a subtraction, so it carries slack.
    fn prunable(&self, node: usize, center_dist: f64, cand: &Candidates) -> bool {
        let bound = cand.bound();
        if bound.is_infinite() {
            return false;
        }
        let r = self.nodes[node].radius;
        center_dist - r > bound.sqrt() + 1e-9 * (center_dist + r)
    }

    pub(super) fn search(&self, points: &ArrayView2<'_, f64>, q: &[f64], cand: &mut Candidates) {
        let dc = dist(q, self.center(0));
        self.visit(0, dc, points, q, cand);
    }

    fn visit(&self, node: usize, dc: f64, points: &ArrayView2<'_, f64>, q: &[f64], cand: &mut Candidates) {
        if self.prunable(node, dc, cand) {
            return;
        }
        let n = &self.nodes[node];
        match n.children {
            None => {
                for &i in &self.order[n.start..n.end] {
                    cand.offer(sq_dist(q, row(points, i)), i);
                }
            }
            Some((a, b)) => {
                let (da, db) = (dist(q, self.center(a)), dist(q, self.center(b)));
                if da <= db {
                    self.visit(a, da, points, q, cand);
                    self.visit(b, db, points, q, cand);
                } else {
                    self.visit(b, db, points, q, cand);
                    self.visit(a, da, points, q, cand);
                }
            }
        }
    }
}
