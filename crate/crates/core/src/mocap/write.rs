use std::fmt::Write as _;

use nalgebra::Vector3;

use super::MotionClip;

fn vec3(v: &Vector3<f64>) -> String {
    format!("{:.6} {:.6} {:.6}", v.x, v.y, v.z)
}

/// Serializes a clip as BVH text with six decimal digits.
pub fn write_bvh(clip: &MotionClip) -> String {
    let skeleton = clip.skeleton();
    let joints = skeleton.joints();
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); joints.len()];
    for (i, j) in joints.iter().enumerate() {
        if let Some(p) = j.parent {
            children[p].push(i);
        }
    }

    let mut out = String::from("HIERARCHY\n");
    // Joints are written depth-first, which is the order a parser assigns
    // columns in; rows are permuted to match.
    let mut order = Vec::with_capacity(joints.len());
    // Iterative pre-order walk; the flag marks a pending closing brace.
    let mut stack = vec![(skeleton.root(), 0usize, false)];
    while let Some((index, depth, close)) = stack.pop() {
        let pad = "  ".repeat(depth);
        let joint = &joints[index];
        if close {
            if let Some(site) = &joint.end_site {
                let _ = writeln!(out, "{pad}  End Site\n{pad}  {{\n{pad}    OFFSET {}\n{pad}  }}", vec3(site));
            }
            let _ = writeln!(out, "{pad}}}");
            continue;
        }
        order.push(index);
        let kw = if joint.parent.is_none() { "ROOT" } else { "JOINT" };
        let _ = writeln!(out, "{pad}{kw} {}\n{pad}{{", joint.name);
        let _ = writeln!(out, "{pad}  OFFSET {}", vec3(&joint.offset));
        if !joint.channels.is_empty() {
            let names: Vec<&str> = joint.channels.iter().map(|c| c.keyword()).collect();
            let _ = writeln!(out, "{pad}  CHANNELS {} {}", names.len(), names.join(" "));
        }
        stack.push((index, depth, true));
        for &c in children[index].iter().rev() {
            stack.push((c, depth + 1, false));
        }
    }

    // Frame time keeps full precision so timing survives a round trip.
    let _ = writeln!(out, "MOTION\nFrames: {}\nFrame Time: {}", clip.frame_count(), clip.frame_time());
    let columns: Vec<usize> = order
        .iter()
        .flat_map(|&j| {
            let start = joints[j].first_column();
            start..start + joints[j].channels.len()
        })
        .collect();
    for row in clip.frames() {
        let mut first = true;
        for v in columns.iter().map(|&c| row[c]) {
            if !first {
                out.push(' ');
            }
            first = false;
            let _ = write!(out, "{v:.6}");
        }
        out.push('\n');
    }
    out
}
