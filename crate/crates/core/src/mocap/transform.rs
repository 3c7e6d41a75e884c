use nalgebra::{Rotation3, Vector3};
use thiserror::Error;

use super::{Axis, Channel, MotionClip, Skeleton, SpatialUnit};
use crate::kinematics::euler::{euler_angles, euler_rotation};

#[derive(Debug, Error, PartialEq)]
pub enum TransformError {
    #[error("scale factor must be finite and positive, got {0}")]
    Factor(f64),
    #[error("root joint needs three position and three rotation channels for a rigid transform")]
    RootChannels,
    #[error("resampling factor must be at least 1")]
    Resample,
}

fn rebuild(clip: &MotionClip, skeleton: Skeleton, frame_time: f64, data: Vec<f64>) -> MotionClip {
    MotionClip::new(skeleton, frame_time, data)
        .expect("transform preserves clip invariants")
        .with_spatial_unit(clip.spatial_unit().clone())
        .with_source_label(clip.source_label())
}

fn rescaled_unit(unit: &SpatialUnit, factor: f64) -> SpatialUnit {
    match unit {
        _ if factor == 1.0 => unit.clone(),
        SpatialUnit::Meters if factor == 100.0 => SpatialUnit::Centimeters,
        SpatialUnit::Centimeters if factor == 0.01 => SpatialUnit::Meters,
        other => SpatialUnit::DatasetSpecific(format!("{other} x {factor}")),
    }
}

/// Multiplies every length in the clip by `factor`: position channels and
/// all offsets. Rotations are untouched.
pub fn rescale_clip(clip: &MotionClip, factor: f64) -> Result<MotionClip, TransformError> {
    if !(factor.is_finite() && factor > 0.0) {
        return Err(TransformError::Factor(factor));
    }
    let mut specs = clip.skeleton().specs();
    for s in &mut specs {
        s.offset *= factor;
        if let Some(e) = &mut s.end_site {
            *e *= factor;
        }
    }
    let skeleton = Skeleton::new(specs).expect("scaling keeps the skeleton valid");
    let position_columns = columns_where(clip.skeleton(), |_, c| c.is_position());
    let width = clip.width();
    let mut data = clip.data().to_vec();
    for (i, v) in data.iter_mut().enumerate() {
        if position_columns[i % width] {
            *v *= factor;
        }
    }
    Ok(rebuild(clip, skeleton, clip.frame_time(), data)
        .with_spatial_unit(rescaled_unit(clip.spatial_unit(), factor)))
}

fn columns_where(skeleton: &Skeleton, pred: impl Fn(usize, Channel) -> bool) -> Vec<bool> {
    let mut out = vec![false; skeleton.channel_count()];
    for (j, joint) in skeleton.joints().iter().enumerate() {
        for (k, c) in joint.channels.iter().enumerate() {
            out[joint.first_column() + k] = pred(j, *c);
        }
    }
    out
}

fn swap_side(name: &str) -> String {
    const PAIRS: [(&str, &str); 2] = [("Left", "Right"), ("left", "right")];
    for (a, b) in PAIRS {
        if name.contains(a) {
            return name.replace(a, b);
        }
        if name.contains(b) {
            return name.replace(b, a);
        }
    }
    name.to_string()
}

/// Reflects a clip through the plane orthogonal to `lateral` and swaps
/// left/right joint names, producing the mirror-image performance.
pub fn mirror_clip(clip: &MotionClip, lateral: Axis) -> MotionClip {
    let mut specs = clip.skeleton().specs();
    let li = lateral.index();
    for s in &mut specs {
        s.name = swap_side(&s.name);
        s.offset[li] = -s.offset[li];
        if let Some(e) = &mut s.end_site {
            e[li] = -e[li];
        }
    }
    let skeleton = Skeleton::new(specs).expect("mirroring keeps names unique");
    // M R M with M = reflection keeps rotations about the lateral axis and
    // negates rotations about the other two.
    let negate = columns_where(clip.skeleton(), |_, c| match c {
        Channel::Position(a) => a == lateral,
        Channel::Rotation(a) => a != lateral,
    });
    let width = clip.width();
    let data = clip
        .data()
        .iter()
        .enumerate()
        .map(|(i, v)| if negate[i % width] { -v } else { *v })
        .collect();
    rebuild(clip, skeleton, clip.frame_time(), data)
}

/// Applies a global rotation followed by a translation to the whole clip
/// by rewriting the root channels.
pub fn rigid_transform_clip(
    clip: &MotionClip,
    rotation: &Rotation3<f64>,
    translation: &Vector3<f64>,
) -> Result<MotionClip, TransformError> {
    let skeleton = clip.skeleton();
    let root = &skeleton.joints()[skeleton.root()];
    let order = root.rotation_order().ok_or(TransformError::RootChannels)?;
    let mut pos_cols = [None; 3];
    let mut rot_cols = [0usize; 3];
    for (k, c) in root.channels.iter().enumerate() {
        let col = root.first_column() + k;
        match c {
            Channel::Position(a) => pos_cols[a.index()] = Some(col),
            Channel::Rotation(a) => {
                let slot = order.iter().position(|o| o == a).unwrap();
                rot_cols[slot] = col;
            }
        }
    }
    let pos_cols: Vec<usize> = pos_cols.iter().copied().collect::<Option<_>>().ok_or(TransformError::RootChannels)?;

    let width = clip.width();
    let mut data = clip.data().to_vec();
    for row in data.chunks_mut(width) {
        let p = Vector3::new(row[pos_cols[0]], row[pos_cols[1]], row[pos_cols[2]]);
        let angles = [row[rot_cols[0]], row[rot_cols[1]], row[rot_cols[2]]];
        let local = euler_rotation(order, angles);
        let new_p = translation + rotation * (root.offset + p) - root.offset;
        let new_angles = euler_angles(order, &(rotation * local));
        for k in 0..3 {
            row[pos_cols[k]] = new_p[k];
            row[rot_cols[k]] = new_angles[k];
        }
    }
    Ok(rebuild(clip, skeleton.clone(), clip.frame_time(), data))
}

/// Upsamples by an integer factor with linear interpolation of channel
/// values. Rotation channels are interpolated as plain numbers, so clips
/// with angle wrap-around between frames are not handled.
pub fn resample_clip(clip: &MotionClip, factor: usize) -> Result<MotionClip, TransformError> {
    if factor == 0 {
        return Err(TransformError::Resample);
    }
    let n = clip.frame_count();
    let width = clip.width();
    let mut data = Vec::with_capacity(((n - 1) * factor + 1) * width);
    for i in 0..n - 1 {
        let (a, b) = (clip.frame(i), clip.frame(i + 1));
        for step in 0..factor {
            let t = step as f64 / factor as f64;
            data.extend(a.iter().zip(b).map(|(x, y)| x + (y - x) * t));
        }
    }
    data.extend_from_slice(clip.frame(n - 1));
    Ok(rebuild(
        clip,
        clip.skeleton().clone(),
        clip.frame_time() / factor as f64,
        data,
    ))
}

/// Multiplies the frame time by `factor`, slowing the performance down.
pub fn dilate_time(clip: &MotionClip, factor: f64) -> Result<MotionClip, TransformError> {
    if !(factor.is_finite() && factor > 0.0) {
        return Err(TransformError::Factor(factor));
    }
    Ok(rebuild(
        clip,
        clip.skeleton().clone(),
        clip.frame_time() * factor,
        clip.data().to_vec(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mocap::parse_bvh;

    const CLIP: &str = "HIERARCHY
ROOT Hips
{
  OFFSET 0.1 0 0
  CHANNELS 6 Xposition Yposition Zposition Zrotation Xrotation Yrotation
  JOINT LeftLeg
  {
    OFFSET 0.2 -0.5 0
    CHANNELS 3 Zrotation Xrotation Yrotation
    End Site
    {
      OFFSET 0 -0.4 0
    }
  }
}
MOTION
Frames: 2
Frame Time: 0.01
0.5 1 2 10 20 30 1 2 3
0.6 1 2 11 21 31 4 5 6
";

    #[test]
    fn rescale_identity_and_linearity() {
        let clip = parse_bvh(CLIP).unwrap();
        assert_eq!(rescale_clip(&clip, 1.0).unwrap(), clip);
        let big = rescale_clip(&clip, 100.0).unwrap();
        assert_eq!(big.frame(0)[0], 50.0);
        assert_eq!(big.frame(0)[3], 10.0);
        assert_eq!(big.skeleton().joints()[1].offset, Vector3::new(20.0, -50.0, 0.0));
        assert_eq!(big.skeleton().joints()[1].end_site, Some(Vector3::new(0.0, -40.0, 0.0)));
        assert!(matches!(rescale_clip(&clip, 0.0), Err(TransformError::Factor(_))));
        assert!(matches!(rescale_clip(&clip, -2.0), Err(TransformError::Factor(_))));
    }

    #[test]
    fn rescale_updates_unit_tag() {
        let clip = parse_bvh(CLIP).unwrap().with_spatial_unit(SpatialUnit::Meters);
        let cm = rescale_clip(&clip, 100.0).unwrap();
        assert_eq!(cm.spatial_unit(), &SpatialUnit::Centimeters);
        let odd = rescale_clip(&clip, 2.0).unwrap();
        assert_eq!(odd.spatial_unit(), &SpatialUnit::DatasetSpecific("meters x 2".into()));
    }

    #[test]
    fn mirror_swaps_names_and_is_involutive() {
        let clip = parse_bvh(CLIP).unwrap();
        let m = mirror_clip(&clip, Axis::X);
        assert_eq!(m.skeleton().joints()[1].name, "RightLeg");
        assert_eq!(m.frame(0)[0], -0.5);
        assert_eq!(m.frame(0)[4], 20.0);
        assert_eq!(m.frame(0)[3], -10.0);
        assert_eq!(mirror_clip(&m, Axis::X), clip);
    }

    #[test]
    fn resample_doubles_frames() {
        let clip = parse_bvh(CLIP).unwrap();
        let r = resample_clip(&clip, 2).unwrap();
        assert_eq!(r.frame_count(), 3);
        assert!((r.frame(1)[0] - 0.55).abs() < 1e-12);
        assert_eq!(r.frame_time(), 0.005);
    }
}
