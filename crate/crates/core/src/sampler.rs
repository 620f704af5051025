//! 1-nearest-neighbor conditional sampling.
//!
//! For every query `z`, the sampler returns the `x` attached to the reference
//! row whose `z` is closest in Euclidean distance. Equal distances resolve to
//! the lowest reference row index. Low-dimensional references are searched
//! with a k-d tree, higher dimensions with a linear scan; both return the same
//! row for every query.

use crate::data::Dataset;
use crate::error::{Error, Result};

/// Dimensions above this use a linear scan instead of the tree.
pub const KD_TREE_MAX_DIM: usize = 15;

const LEAF_SIZE: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SearchStrategy {
    KdTree,
    Linear,
}

/// Nearest neighbor found for one query.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Neighbor {
    pub row: usize,
    /// Squared Euclidean distance.
    pub dist2: f64,
}

impl Neighbor {
    fn improves_on(&self, other: &Neighbor) -> bool {
        self.dist2 < other.dist2 || (self.dist2 == other.dist2 && self.row < other.row)
    }
}

#[derive(Clone, Debug)]
enum Node {
    Leaf {
        start: usize,
        end: usize,
    },
    Split {
        axis: usize,
        value: f64,
        left: usize,
        right: usize,
    },
}

/// Immutable exact nearest-neighbor index over reference `z` rows, each
/// carrying an `x` payload.
#[derive(Clone, Debug)]
pub struct NnIndex {
    points: Vec<f64>,
    payload: Vec<f64>,
    dim: usize,
    strategy: SearchStrategy,
    // tree over a permutation of row ids; empty for the linear strategy
    nodes: Vec<Node>,
    order: Vec<usize>,
}

pub fn build_index(reference: &Dataset) -> Result<NnIndex> {
    let strategy = if reference.d_z() <= KD_TREE_MAX_DIM {
        SearchStrategy::KdTree
    } else {
        SearchStrategy::Linear
    };
    NnIndex::with_strategy(
        reference.z().to_vec(),
        reference.x().to_vec(),
        reference.d_z(),
        strategy,
    )
}

impl NnIndex {
    pub fn with_strategy(
        points: Vec<f64>,
        payload: Vec<f64>,
        dim: usize,
        strategy: SearchStrategy,
    ) -> Result<NnIndex> {
        if dim == 0 {
            return Err(Error::Domain("index dimension must be at least 1".into()));
        }
        if payload.is_empty() {
            return Err(Error::TooFewSamples { needed: 1, got: 0 });
        }
        if points.len() != payload.len() * dim {
            return Err(Error::LengthMismatch(format!(
                "{} coordinates for {} rows of dimension {dim}",
                points.len(),
                payload.len()
            )));
        }
        let mut index = NnIndex {
            points,
            payload,
            dim,
            strategy,
            nodes: Vec::new(),
            order: Vec::new(),
        };
        if strategy == SearchStrategy::KdTree {
            index.order = (0..index.len()).collect();
            let mut order = std::mem::take(&mut index.order);
            index.build_node(&mut order, 0);
            index.order = order;
        }
        Ok(index)
    }

    pub fn len(&self) -> usize {
        self.payload.len()
    }

    pub fn is_empty(&self) -> bool {
        self.payload.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn strategy(&self) -> SearchStrategy {
        self.strategy
    }

    pub fn payload(&self) -> &[f64] {
        &self.payload
    }

    fn point(&self, row: usize) -> &[f64] {
        &self.points[row * self.dim..(row + 1) * self.dim]
    }

    fn dist2(&self, row: usize, query: &[f64]) -> f64 {
        self.point(row)
            .iter()
            .zip(query)
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }

    // Builds the subtree for order[offset..offset + slice.len()] and returns its node id.
    fn build_node(&mut self, order: &mut [usize], offset: usize) -> usize {
        let id = self.nodes.len();
        if order.len() <= LEAF_SIZE {
            self.nodes.push(Node::Leaf {
                start: offset,
                end: offset + order.len(),
            });
            return id;
        }
        let axis = self.widest_axis(order);
        let mid = order.len() / 2;
        order.select_nth_unstable_by(mid, |&a, &b| {
            self.points[a * self.dim + axis].total_cmp(&self.points[b * self.dim + axis])
        });
        let value = self.points[order[mid] * self.dim + axis];
        self.nodes.push(Node::Split {
            axis,
            value,
            left: usize::MAX,
            right: usize::MAX,
        });
        let (lo, hi) = order.split_at_mut(mid);
        let left = self.build_node(lo, offset);
        let right = self.build_node(hi, offset + mid);
        if let Node::Split {
            left: l, right: r, ..
        } = &mut self.nodes[id]
        {
            *l = left;
            *r = right;
        }
        id
    }

    fn widest_axis(&self, rows: &[usize]) -> usize {
        (0..self.dim)
            .map(|a| {
                let (lo, hi) = rows.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &r| {
                    let v = self.points[r * self.dim + a];
                    (lo.min(v), hi.max(v))
                });
                (a, hi - lo)
            })
            .fold((0, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best })
            .0
    }

    /// Exact nearest reference row to `query`.
    pub fn nearest(&self, query: &[f64]) -> Result<Neighbor> {
        if query.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: query.len(),
            });
        }
        Ok(match self.strategy {
            SearchStrategy::Linear => self.nearest_linear(query),
            SearchStrategy::KdTree => {
                let mut best = Neighbor {
                    row: usize::MAX,
                    dist2: f64::INFINITY,
                };
                self.search(0, query, &mut best);
                best
            }
        })
    }

    fn nearest_linear(&self, query: &[f64]) -> Neighbor {
        let mut best = Neighbor {
            row: 0,
            dist2: self.dist2(0, query),
        };
        for row in 1..self.len() {
            let d = self.dist2(row, query);
            if d < best.dist2 {
                best = Neighbor { row, dist2: d };
            }
        }
        best
    }

    fn search(&self, node: usize, query: &[f64], best: &mut Neighbor) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &row in &self.order[start..end] {
                    let cand = Neighbor {
                        row,
                        dist2: self.dist2(row, query),
                    };
                    if cand.improves_on(best) {
                        *best = cand;
                    }
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let diff = query[axis] - value;
                let (near, far) = if diff < 0.0 { (left, right) } else { (right, left) };
                self.search(near, query, best);
                // ties must still be visited: a lower row id may sit on the far side
                if diff * diff <= best.dist2 {
                    self.search(far, query, best);
                }
            }
        }
    }

    /// Payload of the nearest reference row for every query row.
    pub fn sample(&self, queries: &Dataset) -> Result<Vec<f64>> {
        if queries.d_z() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: queries.d_z(),
            });
        }
        (0..queries.n())
            .map(|i| self.nearest(queries.z_row(i)).map(|nb| self.payload[nb.row]))
            .collect()
    }
}

/// Pseudo-samples of `x | z` at each query row, taken from `index`.
pub fn sample_1nn(index: &NnIndex, queries: &Dataset) -> Result<Vec<f64>> {
    index.sample(queries)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ds(x: Vec<f64>, z: Vec<f64>, d: usize) -> Dataset {
        let y = vec![0.0; x.len()];
        Dataset::new(x, y, z, d).unwrap()
    }

    #[test]
    fn nearest_of_two() {
        let idx = build_index(&ds(vec![1.0, 2.0], vec![0.0, 10.0], 1)).unwrap();
        let q = ds(vec![0.0], vec![1.0], 1);
        assert_eq!(sample_1nn(&idx, &q).unwrap(), vec![1.0]);
    }

    #[test]
    fn single_reference_point() {
        let idx = build_index(&ds(vec![7.5], vec![0.0, 0.0], 2)).unwrap();
        let q = ds(vec![0.0; 3], vec![1.0, 2.0, -3.0, 4.0, 100.0, 0.0], 2);
        assert_eq!(sample_1nn(&idx, &q).unwrap(), vec![7.5; 3]);
    }

    #[test]
    fn ties_go_to_lowest_row() {
        let reference = ds(vec![3.0, 4.0, 5.0], vec![1.0, 1.0, 1.0], 1);
        for strategy in [SearchStrategy::KdTree, SearchStrategy::Linear] {
            let idx = NnIndex::with_strategy(
                reference.z().to_vec(),
                reference.x().to_vec(),
                1,
                strategy,
            )
            .unwrap();
            assert_eq!(idx.nearest(&[1.0]).unwrap().row, 0);
            assert_eq!(idx.nearest(&[0.0]).unwrap().row, 0);
        }
        // equidistant points on either side of the query
        let idx = build_index(&ds(vec![1.0, 2.0], vec![2.0, 0.0], 1)).unwrap();
        assert_eq!(idx.nearest(&[1.0]).unwrap().row, 0);
    }

    #[test]
    fn self_query_returns_own_payload() {
        let n = 100;
        let z: Vec<f64> = (0..n * 3).map(|i| ((i * 7919) % 101) as f64 * 0.37).collect();
        let x: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let data = ds(x.clone(), z, 3);
        let idx = build_index(&data).unwrap();
        let out = sample_1nn(&idx, &data).unwrap();
        for (i, v) in out.iter().enumerate() {
            assert_eq!(idx.nearest(data.z_row(i)).unwrap().dist2, 0.0);
            // duplicate z rows map to the first copy
            assert!(*v <= x[i]);
        }
    }

    #[test]
    fn errors() {
        let empty = Dataset::new(vec![], vec![], vec![], 2).unwrap();
        assert!(build_index(&empty).is_err());
        let idx = build_index(&ds(vec![1.0], vec![0.0, 0.0], 2)).unwrap();
        assert!(matches!(
            sample_1nn(&idx, &ds(vec![0.0], vec![0.0], 1)),
            Err(Error::DimensionMismatch { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn strategy_by_dimension() {
        let low = build_index(&ds(vec![0.0], vec![0.0; 15], 15)).unwrap();
        assert_eq!(low.strategy(), SearchStrategy::KdTree);
        let high = build_index(&ds(vec![0.0], vec![0.0; 16], 16)).unwrap();
        assert_eq!(high.strategy(), SearchStrategy::Linear);
    }
}
