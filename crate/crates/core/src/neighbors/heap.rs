use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::NeighborList;

#[derive(Debug, Clone, Copy)]
struct Entry {
    sq: f64,
    // 0 for the query point itself, index + 1 otherwise
    tie: usize,
    index: usize,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.sq.total_cmp(&other.sq).then(self.tie.cmp(&other.tie))
    }
}

/// Bounded max-heap holding the best `k` candidates seen so far.
pub(super) struct Candidates {
    k: usize,
    query: usize,
    include_self: bool,
    heap: BinaryHeap<Entry>,
}

impl Candidates {
    pub(super) fn new(k: usize, query: usize, include_self: bool) -> Self {
        Candidates {
            k,
            query,
            include_self,
            heap: BinaryHeap::with_capacity(k + 1),
        }
    }

    #[inline]
    pub(super) fn offer(&mut self, sq: f64, index: usize) {
        let tie = if index == self.query {
            if !self.include_self {
                return;
            }
            0
        } else {
            index + 1
        };
        let e = Entry { sq, tie, index };
        if self.heap.len() < self.k {
            self.heap.push(e);
        } else if e < *self.heap.peek().expect("k >= 1") {
            self.heap.pop();
            self.heap.push(e);
        }
    }

    /// Squared distance a region must beat to matter, or infinity while
    /// the heap is not yet full.
    #[inline]
    pub(super) fn bound(&self) -> f64 {
        if self.heap.len() < self.k {
            f64::INFINITY
        } else {
            self.heap.peek().map_or(f64::INFINITY, |e| e.sq)
        }
    }

    pub(super) fn into_list(self) -> NeighborList {
        let sorted = self.heap.into_sorted_vec();
        NeighborList {
            indices: sorted.iter().map(|e| e.index).collect(),
            distances: sorted.iter().map(|e| e.sq.sqrt()).collect(),
        }
    }
}
