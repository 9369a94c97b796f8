use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::EvalError;
use crate::geometry::Vec3;

/// Keypoints joined by straight segments.
#[derive(Debug, Clone, PartialEq)]
pub struct LineSet {
    pub names: Vec<String>,
    pub vertices: Vec<Vec3>,
    pub edges: Vec<(usize, usize)>,
}

impl LineSet {
    pub fn segments(&self) -> impl Iterator<Item = (Vec3, Vec3)> + '_ {
        self.edges.iter().map(|&(a, b)| (self.vertices[a], self.vertices[b]))
    }

    /// ASCII PLY with `vertex` and `edge` elements.
    pub fn to_ply(&self) -> String {
        let mut s = String::new();
        let _ = write!(
            s,
            "ply\nformat ascii 1.0\nelement vertex {}\nproperty float x\nproperty float y\n\
             property float z\nelement edge {}\nproperty int vertex1\nproperty int vertex2\n\
             end_header\n",
            self.vertices.len(),
            self.edges.len()
        );
        for v in &self.vertices {
            let _ = writeln!(s, "{} {} {}", v.x as f32, v.y as f32, v.z as f32);
        }
        for (a, b) in &self.edges {
            let _ = writeln!(s, "{a} {b}");
        }
        s
    }
}

/// Connects the named keypoints along `edges`. Vertices keep the order in
/// which keypoints are given.
pub fn build_skeleton(
    keypoints: &[(String, Vec3)],
    edges: &[(String, String)],
) -> Result<LineSet, EvalError> {
    let index: BTreeMap<&str, usize> = keypoints
        .iter()
        .enumerate()
        .map(|(i, (n, _))| (n.as_str(), i))
        .collect();
    let lookup = |name: &String| {
        index
            .get(name.as_str())
            .copied()
            .ok_or_else(|| EvalError::UnknownKeypoint(name.clone()))
    };
    let edges = edges
        .iter()
        .map(|(a, b)| Ok((lookup(a)?, lookup(b)?)))
        .collect::<Result<Vec<_>, EvalError>>()?;
    Ok(LineSet {
        names: keypoints.iter().map(|(n, _)| n.clone()).collect(),
        vertices: keypoints.iter().map(|(_, p)| *p).collect(),
        edges,
    })
}

/// Named keypoints and the edges between them for one object category.
#[derive(Debug, Clone, PartialEq)]
pub struct SkeletonTemplate {
    pub keypoints: Vec<String>,
    pub edges: Vec<(String, String)>,
}

/// Four feet, four seat corners and the two top corners of the backrest.
pub fn chair_template() -> SkeletonTemplate {
    let kp = [
        "foot_fl", "foot_fr", "foot_bl", "foot_br", "seat_fl", "seat_fr", "seat_bl", "seat_br",
        "back_tl", "back_tr",
    ];
    let e = [
        ("foot_fl", "seat_fl"),
        ("foot_fr", "seat_fr"),
        ("foot_bl", "seat_bl"),
        ("foot_br", "seat_br"),
        ("seat_fl", "seat_fr"),
        ("seat_fr", "seat_br"),
        ("seat_br", "seat_bl"),
        ("seat_bl", "seat_fl"),
        ("seat_bl", "back_tl"),
        ("seat_br", "back_tr"),
        ("back_tl", "back_tr"),
    ];
    SkeletonTemplate {
        keypoints: kp.iter().map(|s| s.to_string()).collect(),
        edges: e.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn named(n: &str, p: Vec3) -> (String, Vec3) {
        (n.to_string(), p)
    }

    #[test]
    fn minimal_skeleton() {
        let s = build_skeleton(
            &[named("a", Vec3::zeros()), named("b", Vec3::x())],
            &[("a".into(), "b".into())],
        )
        .unwrap();
        assert_eq!(s.segments().collect::<Vec<_>>(), vec![(Vec3::zeros(), Vec3::x())]);
        let ply = s.to_ply();
        assert!(ply.contains("element edge 1\n"));
        assert!(ply.ends_with("0 1\n"));
    }

    #[test]
    fn chair_edges_pass_through() {
        let t = chair_template();
        let kps: Vec<(String, Vec3)> = t
            .keypoints
            .iter()
            .enumerate()
            .map(|(i, n)| named(n, Vec3::repeat(i as f64)))
            .collect();
        assert_eq!(build_skeleton(&kps, &t.edges).unwrap().edges.len(), t.edges.len());
    }

    #[test]
    fn unknown_name_rejected() {
        let r = build_skeleton(&[named("a", Vec3::zeros())], &[("a".into(), "z".into())]);
        assert!(matches!(r, Err(EvalError::UnknownKeypoint(n)) if n == "z"));
    }
}
