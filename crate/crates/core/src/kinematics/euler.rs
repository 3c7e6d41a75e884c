//! Intrinsic Euler rotations in BVH channel order.

use nalgebra::{Rotation3, Vector3};

use crate::mocap::Axis;

pub fn axis_rotation(axis: Axis, degrees: f64) -> Rotation3<f64> {
    Rotation3::from_axis_angle(&nalgebra::Unit::new_unchecked(axis.unit()), degrees.to_radians())
}

/// `R = R_a(α) · R_b(β) · R_c(γ)` for `order = [a, b, c]` and angles in
/// degrees, i.e. rotations applied in declaration order about the moving
/// frame.
pub fn euler_rotation(order: [Axis; 3], degrees: [f64; 3]) -> Rotation3<f64> {
    axis_rotation(order[0], degrees[0])
        * axis_rotation(order[1], degrees[1])
        * axis_rotation(order[2], degrees[2])
}

/// Inverse of [`euler_rotation`] for Tait-Bryan orders. The middle angle is
/// returned in [-90°, 90°].
pub fn euler_angles(order: [Axis; 3], rotation: &Rotation3<f64>) -> [f64; 3] {
    let (i, j, k) = (order[0].index(), order[1].index(), order[2].index());
    let cyclic = matches!((i, j, k), (0, 1, 2) | (1, 2, 0) | (2, 0, 1));
    let s = if cyclic { 1.0 } else { -1.0 };
    let m = rotation.matrix();
    let b = (s * m[(i, k)]).clamp(-1.0, 1.0).asin();
    let a = (-s * m[(j, k)]).atan2(m[(k, k)]);
    let c = (-s * m[(i, j)]).atan2(m[(i, i)]);
    [a.to_degrees(), b.to_degrees(), c.to_degrees()]
}

pub(crate) fn vec3(row: &[f64], cols: &[Option<usize>; 3]) -> Vector3<f64> {
    Vector3::new(
        cols[0].map_or(0.0, |c| row[c]),
        cols[1].map_or(0.0, |c| row[c]),
        cols[2].map_or(0.0, |c| row[c]),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const ORDERS: [[Axis; 3]; 6] = [
        [Axis::X, Axis::Y, Axis::Z],
        [Axis::X, Axis::Z, Axis::Y],
        [Axis::Y, Axis::X, Axis::Z],
        [Axis::Y, Axis::Z, Axis::X],
        [Axis::Z, Axis::X, Axis::Y],
        [Axis::Z, Axis::Y, Axis::X],
    ];

    #[test]
    fn quarter_turn_about_y_maps_z_to_x() {
        let r = axis_rotation(Axis::Y, 90.0);
        let v = r * Vector3::new(0.0, 0.0, 1.0);
        assert!((v - Vector3::new(1.0, 0.0, 0.0)).norm() < 1e-12);
    }

    proptest! {
        #[test]
        fn decomposition_round_trips(
            order in 0usize..6,
            a in -179.0f64..179.0,
            b in -85.0f64..85.0,
            c in -179.0f64..179.0,
        ) {
            let order = ORDERS[order];
            let r = euler_rotation(order, [a, b, c]);
            let back = euler_angles(order, &r);
            prop_assert!((back[0] - a).abs() < 1e-8, "{back:?}");
            prop_assert!((back[1] - b).abs() < 1e-8, "{back:?}");
            prop_assert!((back[2] - c).abs() < 1e-8, "{back:?}");
        }
    }
}
