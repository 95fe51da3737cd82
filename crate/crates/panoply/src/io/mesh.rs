//! Mesh loading: OBJ or PLY, dispatched on file extension.
//!
//! Faces must already be triangles; polygon meshes are rejected with a
//! pointer at the offending face. OBJ group names carrying component
//! keywords (floor/ceiling/wall/door/window) become per-triangle tags.

use std::path::Path;

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::io::{data_lines, ply, read_text};
use crate::registration::{SurfaceMesh, SurfaceTag};

/// Loads a triangulated surface mesh from `.obj` or `.ply`.
pub fn read_mesh(path: &Path) -> Result<SurfaceMesh> {
    match path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
        .as_deref()
    {
        Some("obj") => read_obj(path),
        Some("ply") => ply::read_mesh(path),
        other => Err(Error::invalid_input(format!(
            "unsupported mesh extension {:?} for {} (expected .obj or .ply)",
            other.unwrap_or(""),
            path.display()
        ))),
    }
}

fn read_obj(path: &Path) -> Result<SurfaceMesh> {
    let text = read_text(path)?;
    let mut vertices: Vec<Vector3<f64>> = Vec::new();
    let mut triangles: Vec<[usize; 3]> = Vec::new();
    let mut tags: Vec<Option<SurfaceTag>> = Vec::new();
    let mut current_tag: Option<SurfaceTag> = None;

    for (lineno, line) in data_lines(&text) {
        let mut tokens = line.split_ascii_whitespace();
        match tokens.next() {
            Some("v") => {
                let mut coords = [0.0f64; 3];
                for c in &mut coords {
                    *c = tokens
                        .next()
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| Error::parse(path, lineno, "bad vertex line"))?;
                }
                vertices.push(Vector3::new(coords[0], coords[1], coords[2]));
            }
            Some("f") => {
                let refs: Vec<&str> = tokens.collect();
                if refs.len() != 3 {
                    return Err(Error::parse(
                        path,
                        lineno,
                        format!(
                            "face has {} vertices; the mesh must be pre-triangulated",
                            refs.len()
                        ),
                    ));
                }
                let mut tri = [0usize; 3];
                for (slot, r) in tri.iter_mut().zip(&refs) {
                    // "f v", "f v/vt", "f v/vt/vn", "f v//vn" all start with
                    // the 1-based vertex index.
                    let index: i64 = r
                        .split('/')
                        .next()
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| Error::parse(path, lineno, "bad face index"))?;
                    if index < 1 || index as usize > vertices.len() {
                        return Err(Error::parse(
                            path,
                            lineno,
                            format!("face index {index} out of range"),
                        ));
                    }
                    *slot = index as usize - 1;
                }
                triangles.push(tri);
                tags.push(current_tag);
            }
            Some("g") | Some("o") => {
                let name = tokens.collect::<Vec<_>>().join(" ");
                current_tag = SurfaceTag::from_group_name(&name);
            }
            // Normals, texture coordinates, materials: irrelevant here.
            Some("vn") | Some("vt") | Some("usemtl") | Some("mtllib") | Some("s") => {}
            Some(other) => {
                return Err(Error::parse(
                    path,
                    lineno,
                    format!("unsupported OBJ directive '{other}'"),
                ));
            }
            None => {}
        }
    }
    SurfaceMesh::new(vertices, triangles, tags)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_obj(content: &str) -> (tempfile::TempDir, std::path::PathBuf) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.obj");
        std::fs::write(&path, content).unwrap();
        (dir, path)
    }

    #[test]
    fn parses_triangles_and_group_tags() {
        let (_dir, path) = write_obj(
            "g Wall_north\n\
             v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\n\
             f 1 2 3\nf 1/1 3/2 4/3\n\
             g Ceiling-main\n\
             v 0 0 1\nv 1 0 1\nv 1 1 1\n\
             f 5//1 6//1 7//1\n",
        );
        let mesh = read_mesh(&path).unwrap();
        assert_eq!(mesh.vertices.len(), 7);
        assert_eq!(mesh.triangles.len(), 3);
        assert_eq!(mesh.tags[0], Some(SurfaceTag::Wall));
        assert_eq!(mesh.tags[2], Some(SurfaceTag::Ceiling));
    }

    #[test]
    fn rejects_polygon_faces() {
        let (_dir, path) = write_obj("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n");
        let err = read_mesh(&path).unwrap_err();
        assert!(err.to_string().contains("pre-triangulated"));
    }

    #[test]
    fn rejects_out_of_range_indices() {
        let (_dir, path) = write_obj("v 0 0 0\nv 1 0 0\nf 1 2 3\n");
        assert!(read_mesh(&path).is_err());
    }

    #[test]
    fn rejects_unknown_extension() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.stl");
        std::fs::write(&path, "").unwrap();
        assert!(read_mesh(&path).is_err());
    }
}
