//! PLY (ASCII and binary little-endian) and XYZ text readers and writers.
//!
//! The vertex schema understood here is `x y z` (float), optional
//! `red green blue` (uchar), optional `nx ny nz` (float) and optional
//! `instance_id` (int, negative = unlabeled). Two header comments carry
//! scene metadata: `comment up <x> <y> <z>` and `comment label <id> <name>`.
//! Extra scalar vertex properties are skipped; list properties on the vertex
//! element are rejected.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::{GeometryError, PointCloud, Result, Rgb, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointFileFormat {
    PlyAscii,
    PlyBinaryLe,
    XyzText,
}

impl PointFileFormat {
    /// Guesses the format from a file extension and, for PLY, the header.
    pub fn detect(path: &std::path::Path, bytes: &[u8]) -> Option<Self> {
        let ext = path.extension()?.to_str()?.to_ascii_lowercase();
        match ext.as_str() {
            "xyz" | "txt" => Some(Self::XyzText),
            "ply" => {
                let head = &bytes[..bytes.len().min(256)];
                let head = String::from_utf8_lossy(head);
                if head.contains("format ascii") {
                    Some(Self::PlyAscii)
                } else if head.contains("format binary_little_endian") {
                    Some(Self::PlyBinaryLe)
                } else {
                    None
                }
            }
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Scalar {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl Scalar {
    fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "char" | "int8" => Self::I8,
            "uchar" | "uint8" => Self::U8,
            "short" | "int16" => Self::I16,
            "ushort" | "uint16" => Self::U16,
            "int" | "int32" => Self::I32,
            "uint" | "uint32" => Self::U32,
            "float" | "float32" => Self::F32,
            "double" | "float64" => Self::F64,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            Self::I8 | Self::U8 => 1,
            Self::I16 | Self::U16 => 2,
            Self::I32 | Self::U32 | Self::F32 => 4,
            Self::F64 => 8,
        }
    }

    fn read_le(self, b: &[u8]) -> f64 {
        match self {
            Self::I8 => b[0] as i8 as f64,
            Self::U8 => b[0] as f64,
            Self::I16 => i16::from_le_bytes([b[0], b[1]]) as f64,
            Self::U16 => u16::from_le_bytes([b[0], b[1]]) as f64,
            Self::I32 => i32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            Self::U32 => u32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            Self::F32 => f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            Self::F64 => f64::from_le_bytes(b[..8].try_into().unwrap()),
        }
    }
}

#[derive(Debug)]
struct Element {
    name: String,
    count: usize,
    props: Vec<(String, Scalar)>,
    has_list: bool,
}

impl Element {
    fn row_size(&self) -> usize {
        self.props.iter().map(|(_, t)| t.size()).sum()
    }
}

#[derive(Debug)]
struct Header {
    binary: bool,
    elements: Vec<Element>,
    up: Option<Vec3>,
    labels: BTreeMap<u32, String>,
    body_offset: usize,
}

fn malformed(msg: impl Into<String>) -> GeometryError {
    GeometryError::MalformedFile(msg.into())
}

fn parse_header(bytes: &[u8]) -> Result<Header> {
    let mut offset = 0;
    let mut next_line = || -> Result<String> {
        let rest = &bytes[offset..];
        let end = rest
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| malformed("truncated header"))?;
        offset += end + 1;
        let line = std::str::from_utf8(&rest[..end])
            .map_err(|_| malformed("header is not valid UTF-8"))?;
        Ok(line.trim_end_matches('\r').to_string())
    };

    if next_line()?.trim() != "ply" {
        return Err(malformed("missing 'ply' magic"));
    }
    let mut binary = None;
    let mut elements: Vec<Element> = Vec::new();
    let mut up = None;
    let mut labels = BTreeMap::new();
    loop {
        let line = next_line()?;
        let mut words = line.split_whitespace();
        match words.next() {
            Some("format") => {
                binary = Some(match words.next() {
                    Some("ascii") => false,
                    Some("binary_little_endian") => true,
                    Some(other) => {
                        return Err(GeometryError::UnsupportedProperty(format!(
                            "format {other}"
                        )))
                    }
                    None => return Err(malformed("empty format line")),
                });
            }
            Some("comment") => match words.next() {
                Some("up") => {
                    let v: Vec<f64> = words.filter_map(|w| w.parse().ok()).collect();
                    if v.len() != 3 {
                        return Err(malformed("bad 'comment up' line"));
                    }
                    up = Some(Vec3::new(v[0], v[1], v[2]));
                }
                Some("label") => {
                    let id = words
                        .next()
                        .and_then(|w| w.parse::<u32>().ok())
                        .ok_or_else(|| malformed("bad 'comment label' line"))?;
                    labels.insert(id, words.collect::<Vec<_>>().join(" "));
                }
                _ => {}
            },
            Some("obj_info") => {}
            Some("element") => {
                let name = words.next().ok_or_else(|| malformed("element without name"))?;
                let count = words
                    .next()
                    .and_then(|w| w.parse().ok())
                    .ok_or_else(|| malformed(format!("element {name} without count")))?;
                elements.push(Element {
                    name: name.to_string(),
                    count,
                    props: Vec::new(),
                    has_list: false,
                });
            }
            Some("property") => {
                let element = elements
                    .last_mut()
                    .ok_or_else(|| malformed("property before any element"))?;
                let ty = words.next().ok_or_else(|| malformed("empty property line"))?;
                if ty == "list" {
                    element.has_list = true;
                    continue;
                }
                let ty = Scalar::parse(ty).ok_or_else(|| {
                    GeometryError::UnsupportedProperty(format!("scalar type {ty}"))
                })?;
                let name = words.next().ok_or_else(|| malformed("property without name"))?;
                element.props.push((name.to_string(), ty));
            }
            Some("end_header") => break,
            Some(other) => return Err(malformed(format!("unexpected header keyword {other}"))),
            None => {}
        }
    }
    Ok(Header {
        binary: binary.ok_or_else(|| malformed("missing format line"))?,
        elements,
        up,
        labels,
        body_offset: offset,
    })
}

/// Column positions of the attributes this crate understands.
struct VertexLayout {
    xyz: [usize; 3],
    rgb: Option<[usize; 3]>,
    normal: Option<[usize; 3]>,
    instance: Option<usize>,
}

impl VertexLayout {
    fn new(element: &Element) -> Result<Self> {
        if element.has_list {
            return Err(GeometryError::UnsupportedProperty(
                "list property on vertex element".into(),
            ));
        }
        let find = |name: &str| element.props.iter().position(|(n, _)| n == name);
        let triple = |names: [&str; 3]| -> Result<Option<[usize; 3]>> {
            match names.map(find) {
                [Some(a), Some(b), Some(c)] => Ok(Some([a, b, c])),
                [None, None, None] => Ok(None),
                _ => Err(GeometryError::UnsupportedProperty(format!(
                    "partial attribute group {names:?}"
                ))),
            }
        };
        let xyz = triple(["x", "y", "z"])?
            .ok_or_else(|| GeometryError::UnsupportedProperty("vertex without x/y/z".into()))?;
        Ok(Self {
            xyz,
            rgb: triple(["red", "green", "blue"])?,
            normal: triple(["nx", "ny", "nz"])?,
            instance: find("instance_id"),
        })
    }

    fn push(&self, row: &[f64], cloud: &mut PointCloud) {
        let v = |idx: [usize; 3]| Vec3::new(row[idx[0]], row[idx[1]], row[idx[2]]);
        cloud.positions.push(v(self.xyz));
        if let (Some(idx), Some(colors)) = (self.rgb, cloud.colors.as_mut()) {
            colors.push(idx.map(|i| row[i].round().clamp(0.0, 255.0) as u8));
        }
        if let (Some(idx), Some(normals)) = (self.normal, cloud.normals.as_mut()) {
            normals.push(v(idx));
        }
        if let (Some(i), Some(ids)) = (self.instance, cloud.instance_ids.as_mut()) {
            ids.push((row[i] >= 0.0).then_some(row[i] as u32));
        }
    }
}

fn parse_ply(bytes: &[u8], expect_binary: bool) -> Result<PointCloud> {
    let header = parse_header(bytes)?;
    if header.binary != expect_binary {
        return Err(malformed("declared format does not match the PLY header"));
    }
    let vertex_pos = header
        .elements
        .iter()
        .position(|e| e.name == "vertex")
        .ok_or_else(|| malformed("no vertex element"))?;
    let vertex = &header.elements[vertex_pos];
    let layout = VertexLayout::new(vertex)?;
    let mut cloud = PointCloud {
        positions: Vec::with_capacity(vertex.count),
        colors: layout.rgb.map(|_| Vec::with_capacity(vertex.count)),
        normals: layout.normal.map(|_| Vec::with_capacity(vertex.count)),
        instance_ids: layout.instance.map(|_| Vec::with_capacity(vertex.count)),
        semantic_labels: header.labels.clone(),
        up_axis: header.up,
    };
    let body = &bytes[header.body_offset..];
    let mut row = vec![0.0; vertex.props.len()];

    if header.binary {
        let mut offset = 0;
        for element in &header.elements[..vertex_pos] {
            if element.has_list {
                return Err(GeometryError::UnsupportedProperty(format!(
                    "list property on element {} preceding vertex",
                    element.name
                )));
            }
            offset += element.count * element.row_size();
        }
        let size = vertex.row_size();
        let needed = offset + vertex.count * size;
        if body.len() < needed {
            return Err(malformed(format!(
                "binary body truncated: need {needed} bytes, have {}",
                body.len()
            )));
        }
        for chunk in body[offset..needed].chunks_exact(size) {
            let mut at = 0;
            for (slot, (_, ty)) in row.iter_mut().zip(&vertex.props) {
                *slot = ty.read_le(&chunk[at..]);
                at += ty.size();
            }
            layout.push(&row, &mut cloud);
        }
    } else {
        let text = std::str::from_utf8(body).map_err(|_| malformed("ASCII body is not UTF-8"))?;
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        for element in &header.elements[..vertex_pos] {
            for _ in 0..element.count {
                lines
                    .next()
                    .ok_or_else(|| malformed(format!("truncated element {}", element.name)))?;
            }
        }
        for i in 0..vertex.count {
            let line = lines
                .next()
                .ok_or_else(|| malformed(format!("truncated body at vertex {i}")))?;
            let mut tokens = line.split_whitespace();
            for slot in row.iter_mut() {
                *slot = tokens
                    .next()
                    .and_then(|t| t.parse::<f64>().ok())
                    .ok_or_else(|| malformed(format!("bad value on vertex {i}")))?;
            }
            layout.push(&row, &mut cloud);
        }
    }
    cloud
        .validate()
        .map_err(|e| malformed(format!("inconsistent vertex data: {e}")))?;
    Ok(cloud)
}

fn parse_xyz(bytes: &[u8]) -> Result<PointCloud> {
    let text = std::str::from_utf8(bytes).map_err(|_| malformed("XYZ file is not UTF-8"))?;
    let mut cloud = PointCloud::default();
    let mut colors: Vec<Rgb> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let values: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| malformed(format!("line {}: non-numeric token", lineno + 1)))?;
        match values.len() {
            3 | 6 => {}
            n => {
                return Err(malformed(format!(
                    "line {}: expected 3 or 6 values, found {n}",
                    lineno + 1
                )))
            }
        }
        let has_color = values.len() == 6;
        if cloud.positions.is_empty() {
            if has_color {
                cloud.colors = Some(Vec::new());
            }
        } else if has_color != cloud.colors.is_some() {
            return Err(malformed(format!(
                "line {}: mixed lines with and without colors",
                lineno + 1
            )));
        }
        cloud.positions.push(Vec3::new(values[0], values[1], values[2]));
        if has_color {
            colors.push([3, 4, 5].map(|i| values[i].round().clamp(0.0, 255.0) as u8));
        }
    }
    if let Some(c) = cloud.colors.as_mut() {
        *c = colors;
    }
    Ok(cloud)
}

/// Parses a point file of the declared format.
pub fn parse_point_file(bytes: &[u8], format: PointFileFormat) -> Result<PointCloud> {
    match format {
        PointFileFormat::PlyAscii => parse_ply(bytes, false),
        PointFileFormat::PlyBinaryLe => parse_ply(bytes, true),
        PointFileFormat::XyzText => parse_xyz(bytes),
    }
}

fn ply_header(cloud: &PointCloud, binary: bool) -> String {
    let mut h = String::from("ply\n");
    h.push_str(if binary {
        "format binary_little_endian 1.0\n"
    } else {
        "format ascii 1.0\n"
    });
    if let Some(up) = cloud.up_axis {
        let _ = writeln!(h, "comment up {} {} {}", up.x, up.y, up.z);
    }
    for (id, label) in &cloud.semantic_labels {
        let label = label.replace(['\n', '\r'], " ");
        let _ = writeln!(h, "comment label {id} {label}");
    }
    let _ = writeln!(h, "element vertex {}", cloud.len());
    h.push_str("property float x\nproperty float y\nproperty float z\n");
    if cloud.colors.is_some() {
        h.push_str("property uchar red\nproperty uchar green\nproperty uchar blue\n");
    }
    if cloud.normals.is_some() {
        h.push_str("property float nx\nproperty float ny\nproperty float nz\n");
    }
    if cloud.instance_ids.is_some() {
        h.push_str("property int instance_id\n");
    }
    h.push_str("end_header\n");
    h
}

fn instance_value(id: Option<u32>) -> i32 {
    id.map_or(-1, |v| v as i32)
}

/// Serializes a cloud as PLY. Coordinates and normals are stored as float32.
pub fn write_ply(cloud: &PointCloud, binary: bool) -> Vec<u8> {
    let mut out = ply_header(cloud, binary).into_bytes();
    if binary {
        for i in 0..cloud.len() {
            let p = cloud.positions[i];
            for v in [p.x, p.y, p.z] {
                out.extend_from_slice(&(v as f32).to_le_bytes());
            }
            if let Some(colors) = &cloud.colors {
                out.extend_from_slice(&colors[i]);
            }
            if let Some(normals) = &cloud.normals {
                let n = normals[i];
                for v in [n.x, n.y, n.z] {
                    out.extend_from_slice(&(v as f32).to_le_bytes());
                }
            }
            if let Some(ids) = &cloud.instance_ids {
                out.extend_from_slice(&instance_value(ids[i]).to_le_bytes());
            }
        }
    } else {
        let mut body = String::with_capacity(cloud.len() * 32);
        for i in 0..cloud.len() {
            let p = cloud.positions[i];
            let _ = write!(body, "{} {} {}", p.x as f32, p.y as f32, p.z as f32);
            if let Some(colors) = &cloud.colors {
                let [r, g, b] = colors[i];
                let _ = write!(body, " {r} {g} {b}");
            }
            if let Some(normals) = &cloud.normals {
                let n = normals[i];
                let _ = write!(body, " {} {} {}", n.x as f32, n.y as f32, n.z as f32);
            }
            if let Some(ids) = &cloud.instance_ids {
                let _ = write!(body, " {}", instance_value(ids[i]));
            }
            body.push('\n');
        }
        out.extend_from_slice(body.as_bytes());
    }
    out
}

/// Serializes positions (and colors when present) as `x y z [r g b]` lines.
pub fn write_xyz(cloud: &PointCloud) -> String {
    let mut out = String::with_capacity(cloud.len() * 32);
    for (i, p) in cloud.positions.iter().enumerate() {
        let _ = write!(out, "{} {} {}", p.x, p.y, p.z);
        if let Some(colors) = &cloud.colors {
            let [r, g, b] = colors[i];
            let _ = write!(out, " {r} {g} {b}");
        }
        out.push('\n');
    }
    out
}
