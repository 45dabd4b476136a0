//! Points, rigid transforms, closed-form alignment and nearest-neighbor search
//! in three and four dimensions.

mod align;
mod kdtree;
mod point;
mod transform;

pub use align::optimal_rigid_alignment;
pub use kdtree::{nearest_neighbor, KdIndex, Neighbor};
pub use point::{centroid, Point, Point3, Point4};
pub use transform::{apply_transform, RigidTransform, ORTHOGONALITY_TOLERANCE};
