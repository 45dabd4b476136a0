use super::point::Point;
use crate::error::{Error, Result};

/// Result of a nearest-neighbor query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    /// Position of the matched point in the slice the index was built from.
    pub ordinal: usize,
    pub distance_squared: f64,
}

impl Neighbor {
    pub fn distance(&self) -> f64 {
        self.distance_squared.sqrt()
    }
}

#[derive(Debug, Clone)]
struct Node {
    ordinal: usize,
    axis: usize,
    left: Option<usize>,
    right: Option<usize>,
}

/// Immutable k-d tree over a point set.
///
/// Queries return exactly what a linear scan would: the point of minimal Euclidean
/// distance, with ties resolved to the smallest ordinal.
#[derive(Debug, Clone)]
pub struct KdIndex<const D: usize> {
    points: Vec<Point<D>>,
    nodes: Vec<Node>,
    root: Option<usize>,
}

impl<const D: usize> KdIndex<D> {
    pub fn build(points: &[Point<D>]) -> Self {
        let mut index = KdIndex {
            points: points.to_vec(),
            nodes: Vec::with_capacity(points.len()),
            root: None,
        };
        let mut ordinals: Vec<usize> = (0..points.len()).collect();
        index.root = index.build_subtree(&mut ordinals);
        index
    }

    fn build_subtree(&mut self, ordinals: &mut [usize]) -> Option<usize> {
        if ordinals.is_empty() {
            return None;
        }
        let axis = self.widest_axis(ordinals);
        let pts = &self.points;
        ordinals.sort_unstable_by(|&a, &b| pts[a][axis].total_cmp(&pts[b][axis]).then(a.cmp(&b)));
        let mid = ordinals.len() / 2;
        let ordinal = ordinals[mid];
        let (lower, rest) = ordinals.split_at_mut(mid);
        let upper = &mut rest[1..];
        let left = self.build_subtree(lower);
        let right = self.build_subtree(upper);
        self.nodes.push(Node {
            ordinal,
            axis,
            left,
            right,
        });
        Some(self.nodes.len() - 1)
    }

    fn widest_axis(&self, ordinals: &[usize]) -> usize {
        let mut best = (0, f64::NEG_INFINITY);
        for axis in 0..D {
            let (lo, hi) = ordinals.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &i| {
                let v = self.points[i][axis];
                (lo.min(v), hi.max(v))
            });
            if hi - lo > best.1 {
                best = (axis, hi - lo);
            }
        }
        best.0
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point<D>] {
        &self.points
    }

    pub fn nearest(&self, query: &Point<D>) -> Result<Neighbor> {
        let root = self.root.ok_or(Error::EmptyCloud)?;
        let mut best = Neighbor {
            ordinal: usize::MAX,
            distance_squared: f64::INFINITY,
        };
        self.search(root, query, &mut best);
        Ok(best)
    }

    fn search(&self, node: usize, query: &Point<D>, best: &mut Neighbor) {
        let n = &self.nodes[node];
        let p = &self.points[n.ordinal];
        let d = query.distance_squared(p);
        if d < best.distance_squared || (d == best.distance_squared && n.ordinal < best.ordinal) {
            *best = Neighbor {
                ordinal: n.ordinal,
                distance_squared: d,
            };
        }
        let diff = query[n.axis] - p[n.axis];
        let (near, far) = if diff < 0.0 {
            (n.left, n.right)
        } else {
            (n.right, n.left)
        };
        if let Some(near) = near {
            self.search(near, query, best);
        }
        // `<=` keeps equal-distance candidates reachable for the ordinal tie-break.
        if let Some(far) = far {
            if diff * diff <= best.distance_squared {
                self.search(far, query, best);
            }
        }
    }
}

/// Nearest indexed point to `query`: `(ordinal, Euclidean distance)`.
pub fn nearest_neighbor<const D: usize>(index: &KdIndex<D>, query: &Point<D>) -> Result<(usize, f64)> {
    let n = index.nearest(query)?;
    Ok((n.ordinal, n.distance()))
}
