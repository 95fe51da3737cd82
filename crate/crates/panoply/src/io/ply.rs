//! PLY point-cloud and mesh reader/writer.
//!
//! Reads ascii, binary_little_endian, and binary_big_endian 1.0 files,
//! extracting the properties the toolkit needs and skipping the rest.
//! Writes binary_little_endian.

use std::path::Path;

use nalgebra::Vector3;

use crate::classes::ClassTable;
use crate::error::{Error, Result};
use crate::io::write_atomic;
use crate::labeling::{LabeledCloud, PointCloud};
use crate::registration::SurfaceMesh;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Ascii,
    BinaryLittleEndian,
    BinaryBigEndian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ScalarType {
    Char,
    UChar,
    Short,
    UShort,
    Int,
    UInt,
    Float,
    Double,
}

impl ScalarType {
    fn parse(token: &str) -> Option<ScalarType> {
        Some(match token {
            "char" | "int8" => ScalarType::Char,
            "uchar" | "uint8" => ScalarType::UChar,
            "short" | "int16" => ScalarType::Short,
            "ushort" | "uint16" => ScalarType::UShort,
            "int" | "int32" => ScalarType::Int,
            "uint" | "uint32" => ScalarType::UInt,
            "float" | "float32" => ScalarType::Float,
            "double" | "float64" => ScalarType::Double,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            ScalarType::Char | ScalarType::UChar => 1,
            ScalarType::Short | ScalarType::UShort => 2,
            ScalarType::Int | ScalarType::UInt | ScalarType::Float => 4,
            ScalarType::Double => 8,
        }
    }
}

#[derive(Debug, Clone)]
enum PropertyKind {
    Scalar(ScalarType),
    List { count: ScalarType, item: ScalarType },
}

#[derive(Debug, Clone)]
struct Property {
    name: String,
    kind: PropertyKind,
}

#[derive(Debug, Clone)]
struct ElementSpec {
    name: String,
    count: usize,
    properties: Vec<Property>,
}

struct Header {
    format: Format,
    elements: Vec<ElementSpec>,
    body_offset: usize,
}

fn parse_header(bytes: &[u8], path: &Path) -> Result<Header> {
    let mut lines = Vec::new();
    let mut offset = 0usize;
    let mut cursor = 0usize;
    let mut found_end = false;
    while cursor < bytes.len() {
        let end = bytes[cursor..]
            .iter()
            .position(|&b| b == b'\n')
            .map(|p| cursor + p)
            .unwrap_or(bytes.len());
        let line = String::from_utf8_lossy(&bytes[cursor..end])
            .trim_end_matches('\r')
            .trim()
            .to_string();
        cursor = end + 1;
        if line == "end_header" {
            offset = cursor;
            found_end = true;
            break;
        }
        lines.push(line);
    }
    if !found_end {
        return Err(Error::parse(path, 1, "missing end_header"));
    }
    if lines.first().map(String::as_str) != Some("ply") {
        return Err(Error::parse(path, 1, "not a PLY file (missing 'ply' magic)"));
    }

    let mut format = None;
    let mut elements: Vec<ElementSpec> = Vec::new();
    for (i, line) in lines.iter().enumerate().skip(1) {
        let lineno = i + 1;
        let tokens: Vec<&str> = line.split_ascii_whitespace().collect();
        match tokens.as_slice() {
            [] | ["comment", ..] | ["obj_info", ..] => {}
            ["format", kind, "1.0"] => {
                format = Some(match *kind {
                    "ascii" => Format::Ascii,
                    "binary_little_endian" => Format::BinaryLittleEndian,
                    "binary_big_endian" => Format::BinaryBigEndian,
                    other => {
                        return Err(Error::parse(path, lineno, format!("unknown format {other}")))
                    }
                });
            }
            ["element", name, count] => {
                let count: usize = count
                    .parse()
                    .map_err(|_| Error::parse(path, lineno, "bad element count"))?;
                elements.push(ElementSpec {
                    name: (*name).to_string(),
                    count,
                    properties: Vec::new(),
                });
            }
            ["property", "list", count, item, name] => {
                let parent = elements
                    .last_mut()
                    .ok_or_else(|| Error::parse(path, lineno, "property before element"))?;
                let count = ScalarType::parse(count)
                    .ok_or_else(|| Error::parse(path, lineno, "bad list count type"))?;
                let item = ScalarType::parse(item)
                    .ok_or_else(|| Error::parse(path, lineno, "bad list item type"))?;
                parent.properties.push(Property {
                    name: (*name).to_string(),
                    kind: PropertyKind::List { count, item },
                });
            }
            ["property", kind, name] => {
                let parent = elements
                    .last_mut()
                    .ok_or_else(|| Error::parse(path, lineno, "property before element"))?;
                let kind = ScalarType::parse(kind)
                    .ok_or_else(|| Error::parse(path, lineno, format!("bad type {kind}")))?;
                parent.properties.push(Property {
                    name: (*name).to_string(),
                    kind: PropertyKind::Scalar(kind),
                });
            }
            _ => {
                return Err(Error::parse(path, lineno, format!("bad header line: {line}")));
            }
        }
    }
    let format =
        format.ok_or_else(|| Error::parse(path, 1, "header is missing a format line"))?;
    Ok(Header {
        format,
        elements,
        body_offset: offset,
    })
}

/// Sequential scalar reader over the file body, ascii or binary.
enum Body<'a> {
    Ascii(std::str::SplitAsciiWhitespace<'a>),
    Binary {
        data: &'a [u8],
        pos: usize,
        little: bool,
    },
}

impl<'a> Body<'a> {
    fn new(format: Format, body: &'a [u8], path: &Path) -> Result<Body<'a>> {
        Ok(match format {
            Format::Ascii => {
                let text = std::str::from_utf8(body)
                    .map_err(|_| Error::parse(path, 0, "ascii body is not valid UTF-8"))?;
                Body::Ascii(text.split_ascii_whitespace())
            }
            Format::BinaryLittleEndian => Body::Binary {
                data: body,
                pos: 0,
                little: true,
            },
            Format::BinaryBigEndian => Body::Binary {
                data: body,
                pos: 0,
                little: false,
            },
        })
    }

    fn read(&mut self, t: ScalarType, path: &Path) -> Result<f64> {
        match self {
            Body::Ascii(tokens) => {
                let token = tokens
                    .next()
                    .ok_or_else(|| Error::parse(path, 0, "unexpected end of ascii body"))?;
                token
                    .parse::<f64>()
                    .map_err(|_| Error::parse(path, 0, format!("bad numeric token '{token}'")))
            }
            Body::Binary { data, pos, little } => {
                let size = t.size();
                let bytes = data.get(*pos..*pos + size).ok_or_else(|| {
                    Error::parse(path, 0, "unexpected end of binary body")
                })?;
                *pos += size;
                let mut buf = [0u8; 8];
                buf[..size].copy_from_slice(bytes);
                macro_rules! decode {
                    ($ty:ty, $n:expr) => {{
                        let mut b = [0u8; $n];
                        b.copy_from_slice(&buf[..$n]);
                        if *little {
                            <$ty>::from_le_bytes(b) as f64
                        } else {
                            <$ty>::from_be_bytes(b) as f64
                        }
                    }};
                }
                Ok(match t {
                    ScalarType::Char => decode!(i8, 1),
                    ScalarType::UChar => decode!(u8, 1),
                    ScalarType::Short => decode!(i16, 2),
                    ScalarType::UShort => decode!(u16, 2),
                    ScalarType::Int => decode!(i32, 4),
                    ScalarType::UInt => decode!(u32, 4),
                    ScalarType::Float => decode!(f32, 4),
                    ScalarType::Double => decode!(f64, 8),
                })
            }
        }
    }
}

/// Extracted columns of one element: requested scalars per row plus every
/// list property's values per row.
struct ElementData {
    /// scalar column name -> per-row values
    scalars: Vec<(String, Vec<f64>)>,
    /// list column name -> per-row lists
    lists: Vec<(String, Vec<Vec<f64>>)>,
}

fn scan(
    header: &Header,
    body: &mut Body,
    path: &Path,
    wanted: &[(&str, &[&str])],
) -> Result<Vec<ElementData>> {
    let mut out = Vec::new();
    for element in &header.elements {
        let want: Option<&[&str]> = wanted
            .iter()
            .find(|(name, _)| *name == element.name)
            .map(|(_, cols)| *cols);
        let mut data = ElementData {
            scalars: Vec::new(),
            lists: Vec::new(),
        };
        if let Some(cols) = want {
            for p in &element.properties {
                if !cols.contains(&p.name.as_str()) {
                    continue;
                }
                match p.kind {
                    PropertyKind::Scalar(_) => data
                        .scalars
                        .push((p.name.clone(), Vec::with_capacity(element.count))),
                    PropertyKind::List { .. } => data
                        .lists
                        .push((p.name.clone(), Vec::with_capacity(element.count))),
                }
            }
        }
        for _ in 0..element.count {
            for p in &element.properties {
                match p.kind {
                    PropertyKind::Scalar(t) => {
                        let value = body.read(t, path)?;
                        if let Some((_, column)) =
                            data.scalars.iter_mut().find(|(n, _)| *n == p.name)
                        {
                            column.push(value);
                        }
                    }
                    PropertyKind::List { count, item } => {
                        let n = body.read(count, path)? as usize;
                        let keep = data.lists.iter_mut().find(|(c, _)| *c == p.name);
                        let mut values = Vec::new();
                        for _ in 0..n {
                            let v = body.read(item, path)?;
                            if keep.is_some() {
                                values.push(v);
                            }
                        }
                        if let Some((_, rows)) = keep {
                            rows.push(values);
                        }
                    }
                }
            }
        }
        out.push(data);
    }
    Ok(out)
}

fn load(path: &Path, wanted: &[(&str, &[&str])]) -> Result<(Header, Vec<ElementData>)> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let header = parse_header(&bytes, path)?;
    let mut body = Body::new(header.format, &bytes[header.body_offset..], path)?;
    let data = scan(&header, &mut body, path, wanted)?;
    Ok((header, data))
}

fn element_index(header: &Header, name: &str) -> Option<usize> {
    header.elements.iter().position(|e| e.name == name)
}

fn column<'a>(data: &'a ElementData, name: &str) -> Option<&'a Vec<f64>> {
    data.scalars.iter().find(|(n, _)| n == name).map(|(_, v)| v)
}

fn vertex_positions(
    header: &Header,
    data: &[ElementData],
    path: &Path,
) -> Result<Vec<Vector3<f64>>> {
    let vi = element_index(header, "vertex")
        .ok_or_else(|| Error::parse(path, 0, "PLY file has no vertex element"))?;
    let element = &data[vi];
    let (x, y, z) = match (
        column(element, "x"),
        column(element, "y"),
        column(element, "z"),
    ) {
        (Some(x), Some(y), Some(z)) => (x, y, z),
        _ => return Err(Error::parse(path, 0, "vertex element lacks x/y/z")),
    };
    let mut points = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        let p = Vector3::new(x[i], y[i], z[i]);
        if !(p.x.is_finite() && p.y.is_finite() && p.z.is_finite()) {
            return Err(Error::parse(path, 0, format!("non-finite vertex {i}")));
        }
        points.push(p);
    }
    Ok(points)
}

fn vertex_colors(header: &Header, data: &[ElementData]) -> Option<Vec<[u8; 3]>> {
    let vi = element_index(header, "vertex")?;
    let element = &data[vi];
    let r = column(element, "red")?;
    let g = column(element, "green")?;
    let b = column(element, "blue")?;
    Some(
        (0..r.len())
            .map(|i| [r[i] as u8, g[i] as u8, b[i] as u8])
            .collect(),
    )
}

const VERTEX_COLUMNS: &[&str] = &["x", "y", "z", "red", "green", "blue", "class_id"];

/// Reads a point cloud (vertex x/y/z, optional red/green/blue).
pub fn read_point_cloud(path: &Path) -> Result<PointCloud> {
    let (header, data) = load(path, &[("vertex", VERTEX_COLUMNS)])?;
    let points = vertex_positions(&header, &data, path)?;
    let colors = vertex_colors(&header, &data);
    Ok(PointCloud { points, colors })
}

/// Reads a labeled cloud: a point cloud with a per-vertex `class_id`.
pub fn read_labeled_cloud(path: &Path) -> Result<LabeledCloud> {
    let (header, data) = load(path, &[("vertex", VERTEX_COLUMNS)])?;
    let points = vertex_positions(&header, &data, path)?;
    let colors = vertex_colors(&header, &data);
    let vi = element_index(&header, "vertex").expect("vertex exists");
    let classes = column(&data[vi], "class_id")
        .ok_or_else(|| Error::parse(path, 0, "vertex element lacks a class_id property"))?
        .iter()
        .map(|&v| v as u8)
        .collect();
    LabeledCloud::new(PointCloud { points, colors }, classes)
}

/// Reads a triangulated mesh (vertex + face/vertex_indices).
pub fn read_mesh(path: &Path) -> Result<SurfaceMesh> {
    let (header, data) = load(
        path,
        &[
            ("vertex", &["x", "y", "z"]),
            ("face", &["vertex_indices", "vertex_index"]),
        ],
    )?;
    let vertices = vertex_positions(&header, &data, path)?;
    let fi = element_index(&header, "face")
        .ok_or_else(|| Error::parse(path, 0, "PLY file has no face element"))?;
    let lists = data[fi]
        .lists
        .first()
        .ok_or_else(|| Error::parse(path, 0, "face element lacks vertex indices"))?;
    let mut triangles = Vec::with_capacity(lists.1.len());
    for (row, list) in lists.1.iter().enumerate() {
        if list.len() != 3 {
            return Err(Error::parse(
                path,
                0,
                format!(
                    "face {row} has {} vertices; the mesh must be pre-triangulated",
                    list.len()
                ),
            ));
        }
        triangles.push([list[0] as usize, list[1] as usize, list[2] as usize]);
    }
    SurfaceMesh::new(vertices, triangles, vec![])
}

fn push_f64_le(out: &mut Vec<u8>, v: f64) {
    out.extend_from_slice(&v.to_le_bytes());
}

/// Writes a point cloud as binary_little_endian with double coordinates
/// and uchar colors when present.
pub fn write_point_cloud(path: &Path, cloud: &PointCloud) -> Result<()> {
    let mut header = String::from("ply\nformat binary_little_endian 1.0\n");
    header.push_str(&format!("element vertex {}\n", cloud.len()));
    header.push_str("property double x\nproperty double y\nproperty double z\n");
    if cloud.colors.is_some() {
        header.push_str("property uchar red\nproperty uchar green\nproperty uchar blue\n");
    }
    header.push_str("end_header\n");

    let stride = 24 + if cloud.colors.is_some() { 3 } else { 0 };
    let mut out = Vec::with_capacity(header.len() + cloud.len() * stride);
    out.extend_from_slice(header.as_bytes());
    for (i, p) in cloud.points.iter().enumerate() {
        push_f64_le(&mut out, p.x);
        push_f64_le(&mut out, p.y);
        push_f64_le(&mut out, p.z);
        if let Some(colors) = &cloud.colors {
            out.extend_from_slice(&colors[i]);
        }
    }
    write_atomic(path, &out)
}

/// Writes a labeled cloud as binary_little_endian with double coordinates,
/// class-colorized uchar RGB, and a uchar `class_id` per vertex. Background
/// points keep their capture color when the cloud carries one.
pub fn write_labeled_cloud(path: &Path, labeled: &LabeledCloud) -> Result<()> {
    let n = labeled.cloud.len();
    let mut header = String::from("ply\nformat binary_little_endian 1.0\n");
    header.push_str(&format!("element vertex {n}\n"));
    header.push_str("property double x\nproperty double y\nproperty double z\n");
    header.push_str("property uchar red\nproperty uchar green\nproperty uchar blue\n");
    header.push_str("property uchar class_id\n");
    header.push_str("end_header\n");

    let mut out = Vec::with_capacity(header.len() + n * 28);
    out.extend_from_slice(header.as_bytes());
    for i in 0..n {
        let p = labeled.cloud.points[i];
        let class = labeled.classes[i];
        let color = if class == 0 {
            labeled
                .cloud
                .colors
                .as_ref()
                .map(|c| c[i])
                .unwrap_or_else(|| ClassTable::color(0))
        } else {
            ClassTable::color(class)
        };
        push_f64_le(&mut out, p.x);
        push_f64_le(&mut out, p.y);
        push_f64_le(&mut out, p.z);
        out.extend_from_slice(&color);
        out.push(class);
    }
    write_atomic(path, &out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cloud() -> PointCloud {
        PointCloud {
            points: vec![
                Vector3::new(0.5, -1.25, 3.0),
                Vector3::new(10.0, 0.125, -2.5),
            ],
            colors: Some(vec![[255, 0, 0], [0, 255, 0]]),
        }
    }

    #[test]
    fn binary_cloud_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cloud.ply");
        write_point_cloud(&path, &cloud()).unwrap();
        let back = read_point_cloud(&path).unwrap();
        assert_eq!(back, cloud());
    }

    #[test]
    fn labeled_cloud_round_trips_classes() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("labeled.ply");
        let labeled = LabeledCloud::new(cloud(), vec![0, 9]).unwrap();
        write_labeled_cloud(&path, &labeled).unwrap();
        let back = read_labeled_cloud(&path).unwrap();
        assert_eq!(back.classes, vec![0, 9]);
        assert_eq!(back.cloud.points, labeled.cloud.points);
        // Background keeps its capture color; assets get the class color.
        assert_eq!(back.cloud.colors.as_ref().unwrap()[0], [255, 0, 0]);
        assert_eq!(back.cloud.colors.as_ref().unwrap()[1], ClassTable::color(9));
    }

    #[test]
    fn reads_ascii_cloud_with_extra_properties() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ascii.ply");
        let text = "ply\nformat ascii 1.0\ncomment made elsewhere\n\
                    element vertex 2\n\
                    property float x\nproperty float y\nproperty float z\n\
                    property float confidence\n\
                    end_header\n\
                    1 2 3 0.5\n4 5 6 0.25\n";
        std::fs::write(&path, text).unwrap();
        let cloud = read_point_cloud(&path).unwrap();
        assert_eq!(cloud.len(), 2);
        assert_eq!(cloud.points[1], Vector3::new(4.0, 5.0, 6.0));
        assert!(cloud.colors.is_none());
    }

    #[test]
    fn reads_ascii_mesh() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("mesh.ply");
        let text = "ply\nformat ascii 1.0\n\
                    element vertex 4\n\
                    property double x\nproperty double y\nproperty double z\n\
                    element face 2\n\
                    property list uchar int vertex_indices\n\
                    end_header\n\
                    0 0 0\n1 0 0\n1 1 0\n0 1 0\n\
                    3 0 1 2\n3 0 2 3\n";
        std::fs::write(&path, text).unwrap();
        let mesh = read_mesh(&path).unwrap();
        assert_eq!(mesh.vertices.len(), 4);
        assert_eq!(mesh.triangles, vec![[0, 1, 2], [0, 2, 3]]);
        assert!((mesh.total_area() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_quad_faces() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("quads.ply");
        let text = "ply\nformat ascii 1.0\n\
                    element vertex 4\n\
                    property double x\nproperty double y\nproperty double z\n\
                    element face 1\n\
                    property list uchar int vertex_indices\n\
                    end_header\n\
                    0 0 0\n1 0 0\n1 1 0\n0 1 0\n\
                    4 0 1 2 3\n";
        std::fs::write(&path, text).unwrap();
        assert!(read_mesh(&path).is_err());
    }

    #[test]
    fn reads_big_endian() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("be.ply");
        let mut bytes = Vec::new();
        bytes.extend_from_slice(
            b"ply\nformat binary_big_endian 1.0\nelement vertex 1\n\
              property float x\nproperty float y\nproperty float z\nend_header\n",
        );
        for v in [1.0f32, 2.0, 3.0] {
            bytes.extend_from_slice(&v.to_be_bytes());
        }
        std::fs::write(&path, bytes).unwrap();
        let cloud = read_point_cloud(&path).unwrap();
        assert_eq!(cloud.points[0], Vector3::new(1.0, 2.0, 3.0));
    }

    #[test]
    fn rejects_missing_coordinates() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.ply");
        let text = "ply\nformat ascii 1.0\nelement vertex 1\n\
                    property float x\nproperty float y\nend_header\n1 2\n";
        std::fs::write(&path, text).unwrap();
        assert!(read_point_cloud(&path).is_err());
    }
}
