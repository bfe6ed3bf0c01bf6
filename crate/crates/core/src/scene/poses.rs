//! Pose constructors for common block placements.
//!
//! All helpers return world poses of the block center under the crate's
//! coordinate convention (z up, table at z = 0).

use nalgebra::{UnitQuaternion, Vector3};

use super::Pose;

/// Upright block resting on the table: height axis vertical.
pub fn upright(x: f64, y: f64, height: f64) -> Pose {
    Pose::new(
        Vector3::new(x, y, height / 2.0),
        UnitQuaternion::identity(),
    )
}

/// Block lying with its height axis along world x (rolled about y).
/// The width dimension becomes the vertical extent.
pub fn lying_x(x: f64, y: f64, width: f64) -> Pose {
    Pose::new(
        Vector3::new(x, y, width / 2.0),
        UnitQuaternion::from_axis_angle(&Vector3::y_axis(), std::f64::consts::FRAC_PI_2),
    )
}

/// Upright pose stacked centered on a support whose top surface is at
/// `top_z`.
pub fn upright_at_height(x: f64, y: f64, height: f64, top_z: f64) -> Pose {
    Pose::new(
        Vector3::new(x, y, top_z + height / 2.0),
        UnitQuaternion::identity(),
    )
}

/// A block of height `h` and width `w` leaning in the x-z plane: its lower
/// edge rests on the table while its lower long face rests against a
/// supporter's horizontal top edge at world (edge_x, edge_z). `theta` is the
/// tilt from vertical (rad); `dir` = +1 leans the top toward +x (foot on the
/// -x side), -1 the mirror image.
pub fn lean_against_edge(h: f64, w: f64, edge_x: f64, edge_z: f64, theta: f64, dir: f64) -> Pose {
    assert!(theta > 0.0 && theta < std::f64::consts::FRAC_PI_2);
    let dir = dir.signum();
    let (s, c) = (theta.sin(), theta.cos());
    // Foot corner on the table fixes the center height; the face-plane
    // condition (edge point at local |x| = w/2) fixes the center x.
    let cz = (w / 2.0) * s + (h / 2.0) * c;
    let cx = edge_x - dir * (w / 2.0 + (edge_z - cz) * s) / c;
    // The contact must land on the face, between the two ends.
    let along_face = dir * (edge_x - cx) * s + (edge_z - cz) * c;
    assert!(
        along_face.abs() < h / 2.0,
        "edge contact misses the leaning face; adjust theta"
    );
    Pose::new(
        Vector3::new(cx, 0.0, cz),
        UnitQuaternion::from_axis_angle(&Vector3::y_axis(), dir * theta),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::geometry::Obb;
    use crate::scene::BlockSpec;
    use approx::assert_relative_eq;

    #[test]
    fn lean_touches_table_and_edge() {
        let spec = BlockSpec::new("x");
        let (h, w) = (spec.height(), spec.width());
        let theta = 55f64.to_radians();
        for dir in [-1.0, 1.0] {
            let edge_x = 0.05 * dir.signum();
            let edge_z = 0.05;
            let pose = lean_against_edge(h, w, edge_x, edge_z, theta, dir);
            let obb = Obb::from_pose_dims(&pose, spec.dims);
            // Foot exactly on the table.
            assert_relative_eq!(obb.min_z(), 0.0, epsilon = 1e-12);
            // The lower face passes through the supporting edge and rises
            // with slope cot(theta) moving over the supporter.
            let (lo, _) = obb
                .column_interval(edge_x, 0.0)
                .expect("contact column must intersect the block");
            assert_relative_eq!(lo, edge_z, epsilon = 1e-9);
            let delta = 1e-3;
            let (lo2, _) = obb
                .column_interval(edge_x + dir * delta, 0.0)
                .expect("column just past the edge must intersect the block");
            assert_relative_eq!(lo2, edge_z + delta / theta.tan(), epsilon = 1e-9);
        }
    }
}
