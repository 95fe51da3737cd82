//! Synthetic model-cloud sampling and point-pair similarity registration.
//!
//! The building model arrives as a triangulated surface mesh. It is turned
//! into a synthetic point cloud by allocating a point budget across the
//! triangles proportionally to area (largest-remainder rounding, so counts
//! sum exactly) and sampling uniformly inside each triangle. User-picked
//! point pairs between the photogrammetric cloud and the synthetic cloud
//! then yield a closed-form least-squares similarity transform (uniform
//! scale + rotation + translation) that registers the capture into the
//! model frame.

use nalgebra::{Matrix3, Vector3};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::RotationMatrix;
use crate::instances::{Aabb, AssetInstance};
use crate::labeling::PointCloud;

/// Building component kind a mesh triangle belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SurfaceTag {
    Floor,
    Ceiling,
    Wall,
    Door,
    Window,
}

impl SurfaceTag {
    /// Guesses a tag from a mesh group name; substring match, case-insensitive.
    pub fn from_group_name(name: &str) -> Option<SurfaceTag> {
        let lower = name.to_ascii_lowercase();
        if lower.contains("floor") {
            Some(SurfaceTag::Floor)
        } else if lower.contains("ceil") {
            Some(SurfaceTag::Ceiling)
        } else if lower.contains("wall") {
            Some(SurfaceTag::Wall)
        } else if lower.contains("door") {
            Some(SurfaceTag::Door)
        } else if lower.contains("window") {
            Some(SurfaceTag::Window)
        } else {
            None
        }
    }
}

/// A triangulated surface mesh; `tags` is either empty or one per triangle.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceMesh {
    pub vertices: Vec<Vector3<f64>>,
    pub triangles: Vec<[usize; 3]>,
    pub tags: Vec<Option<SurfaceTag>>,
}

impl SurfaceMesh {
    pub fn new(
        vertices: Vec<Vector3<f64>>,
        triangles: Vec<[usize; 3]>,
        tags: Vec<Option<SurfaceTag>>,
    ) -> Result<Self> {
        for (i, tri) in triangles.iter().enumerate() {
            for &v in tri {
                if v >= vertices.len() {
                    return Err(Error::invalid_input(format!(
                        "triangle {i} references vertex {v} but the mesh has {} vertices",
                        vertices.len()
                    )));
                }
            }
        }
        if !tags.is_empty() && tags.len() != triangles.len() {
            return Err(Error::invalid_input(format!(
                "{} tags for {} triangles",
                tags.len(),
                triangles.len()
            )));
        }
        Ok(SurfaceMesh {
            vertices,
            triangles,
            tags,
        })
    }

    pub fn triangle_area(&self, index: usize) -> f64 {
        let [a, b, c] = self.triangles[index];
        let ab = self.vertices[b] - self.vertices[a];
        let ac = self.vertices[c] - self.vertices[a];
        0.5 * ab.cross(&ac).norm()
    }

    pub fn total_area(&self) -> f64 {
        (0..self.triangles.len()).map(|i| self.triangle_area(i)).sum()
    }
}

/// Largest-remainder allocation of `total` samples proportional to `areas`;
/// the returned counts sum to exactly `total`. Remainder ties break toward
/// the lower index.
pub fn allocate_by_area(areas: &[f64], total: usize) -> Result<Vec<usize>> {
    let sum: f64 = areas.iter().sum();
    if !sum.is_finite() || sum <= 0.0 {
        return Err(Error::invalid_input(
            "total surface area must be positive for sampling",
        ));
    }
    if areas.iter().any(|a| *a < 0.0 || !a.is_finite()) {
        return Err(Error::invalid_input("triangle areas must be finite and >= 0"));
    }
    let mut counts: Vec<usize> = Vec::with_capacity(areas.len());
    let mut remainders: Vec<(f64, usize)> = Vec::with_capacity(areas.len());
    let mut allocated = 0usize;
    for (i, &area) in areas.iter().enumerate() {
        let quota = total as f64 * area / sum;
        let base = quota.floor() as usize;
        counts.push(base);
        allocated += base;
        remainders.push((quota - base as f64, i));
    }
    let mut leftover = total - allocated;
    remainders.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
    for &(_, i) in &remainders {
        if leftover == 0 {
            break;
        }
        counts[i] += 1;
        leftover -= 1;
    }
    Ok(counts)
}

/// Samples `total_points` points on the mesh, allocated per triangle by
/// area and drawn uniformly via barycentric folding. Deterministic for a
/// fixed seed regardless of thread scheduling: each triangle consumes its
/// own counter-mode substream.
pub fn sample_surface(mesh: &SurfaceMesh, total_points: usize, seed: u64) -> Result<PointCloud> {
    if total_points == 0 {
        return Err(Error::invalid_input("sampling budget must be positive"));
    }
    if mesh.triangles.is_empty() {
        return Err(Error::invalid_input("mesh has no triangles to sample"));
    }
    let areas: Vec<f64> = (0..mesh.triangles.len())
        .map(|i| mesh.triangle_area(i))
        .collect();
    let counts = allocate_by_area(&areas, total_points)?;

    let chunks: Vec<Vec<Vector3<f64>>> = mesh
        .triangles
        .par_iter()
        .zip(&counts)
        .enumerate()
        .map(|(tri_index, (tri, &count))| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(tri_index as u64);
            let a = mesh.vertices[tri[0]];
            let ab = mesh.vertices[tri[1]] - a;
            let ac = mesh.vertices[tri[2]] - a;
            (0..count)
                .map(|_| {
                    let mut u: f64 = rng.gen();
                    let mut v: f64 = rng.gen();
                    if u + v > 1.0 {
                        u = 1.0 - u;
                        v = 1.0 - v;
                    }
                    a + ab * u + ac * v
                })
                .collect()
        })
        .collect();

    let mut points = Vec::with_capacity(total_points);
    for chunk in chunks {
        points.extend(chunk);
    }
    Ok(PointCloud::new(points))
}

/// Uniform scale + rotation + translation: p ↦ s·R·p + t.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityTransform {
    pub scale: f64,
    pub rotation: RotationMatrix,
    pub translation: Vector3<f64>,
}

impl SimilarityTransform {
    pub fn identity() -> Self {
        SimilarityTransform {
            scale: 1.0,
            rotation: RotationMatrix::identity(),
            translation: Vector3::zeros(),
        }
    }

    pub fn new(scale: f64, rotation: RotationMatrix, translation: Vector3<f64>) -> Result<Self> {
        if !scale.is_finite() || scale <= 0.0 {
            return Err(Error::invalid_input("similarity scale must be positive"));
        }
        Ok(SimilarityTransform {
            scale,
            rotation,
            translation,
        })
    }

    pub fn apply_point(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.scale * self.rotation.apply(p) + self.translation
    }

    pub fn apply_cloud(&self, cloud: &PointCloud) -> PointCloud {
        PointCloud {
            points: cloud.points.iter().map(|p| self.apply_point(p)).collect(),
            colors: cloud.colors.clone(),
        }
    }

    /// Maps instance centroids and extents; class ids and supports are kept.
    pub fn apply_instances(&self, instances: &[AssetInstance]) -> Vec<AssetInstance> {
        instances
            .iter()
            .map(|inst| {
                let corners = [
                    inst.extent.min,
                    Vector3::new(inst.extent.max.x, inst.extent.min.y, inst.extent.min.z),
                    Vector3::new(inst.extent.min.x, inst.extent.max.y, inst.extent.min.z),
                    Vector3::new(inst.extent.min.x, inst.extent.min.y, inst.extent.max.z),
                    Vector3::new(inst.extent.max.x, inst.extent.max.y, inst.extent.min.z),
                    Vector3::new(inst.extent.max.x, inst.extent.min.y, inst.extent.max.z),
                    Vector3::new(inst.extent.min.x, inst.extent.max.y, inst.extent.max.z),
                    inst.extent.max,
                ];
                let mapped: Vec<Vector3<f64>> =
                    corners.iter().map(|c| self.apply_point(c)).collect();
                AssetInstance {
                    class_id: inst.class_id,
                    centroid: self.apply_point(&inst.centroid),
                    support: inst.support,
                    extent: Aabb::from_points(mapped.iter()).expect("eight corners"),
                }
            })
            .collect()
    }

    /// `self ∘ inner`: applies `inner` first.
    pub fn compose(&self, inner: &SimilarityTransform) -> SimilarityTransform {
        SimilarityTransform {
            scale: self.scale * inner.scale,
            rotation: self.rotation.compose(&inner.rotation),
            translation: self.scale * self.rotation.apply(&inner.translation) + self.translation,
        }
    }
}

/// One user-picked correspondence: a point in the capture frame and its
/// match in the model frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointPair {
    pub source: Vector3<f64>,
    pub target: Vector3<f64>,
}

/// A fitted similarity plus its root-mean-square residual over the pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatedSimilarity {
    pub transform: SimilarityTransform,
    pub rms_residual: f64,
}

/// Closed-form least-squares similarity fit (centroid-aligned, SVD-based,
/// with a reflection guard) minimizing Σ‖s·R·p + t − q‖². Needs at least
/// three pairs with non-collinear sources.
pub fn estimate_similarity(pairs: &[PointPair]) -> Result<EstimatedSimilarity> {
    let n = pairs.len();
    if n < 3 {
        return Err(Error::invalid_input(format!(
            "similarity estimation needs at least 3 point pairs, got {n}"
        )));
    }
    let nf = n as f64;
    let mean_src: Vector3<f64> = pairs.iter().map(|p| p.source).sum::<Vector3<f64>>() / nf;
    let mean_dst: Vector3<f64> = pairs.iter().map(|p| p.target).sum::<Vector3<f64>>() / nf;

    let mut src_var = 0.0;
    let mut cross = Matrix3::<f64>::zeros();
    let mut src_scatter = Matrix3::<f64>::zeros();
    for pair in pairs {
        let x = pair.source - mean_src;
        let y = pair.target - mean_dst;
        src_var += x.norm_squared();
        cross += y * x.transpose();
        src_scatter += x * x.transpose();
    }
    src_var /= nf;
    cross /= nf;
    src_scatter /= nf;

    // Collinear (or coincident) sources leave the rotation unconstrained.
    let eigen = nalgebra::SymmetricEigen::new(src_scatter);
    let mut evs: Vec<f64> = eigen.eigenvalues.iter().copied().collect();
    evs.sort_by(|a, b| b.partial_cmp(a).unwrap());
    if evs[0] <= 0.0 || evs[1] <= 1e-18 * evs[0] {
        return Err(Error::invalid_input(
            "source points are collinear; pick pairs spanning at least a plane",
        ));
    }

    let svd = cross.svd(true, true);
    let u = svd.u.ok_or_else(|| Error::invalid_input("SVD failed"))?;
    let v_t = svd.v_t.ok_or_else(|| Error::invalid_input("SVD failed"))?;
    let mut s_diag = Vector3::new(1.0, 1.0, 1.0);
    if u.determinant() * v_t.determinant() < 0.0 {
        // Undo the reflection along the least-significant direction.
        let weakest = svd.singular_values.imin();
        s_diag[weakest] = -1.0;
    }
    let rotation_matrix = u * Matrix3::from_diagonal(&s_diag) * v_t;
    let rotation = RotationMatrix::from_matrix(rotation_matrix)
        .map_err(|_| Error::invalid_input("degenerate pair configuration"))?;

    let scale = (svd.singular_values.component_mul(&s_diag)).sum() / src_var;
    if !scale.is_finite() || scale <= 0.0 {
        return Err(Error::invalid_input(
            "pair configuration produced a non-positive scale",
        ));
    }
    let translation = mean_dst - scale * rotation.apply(&mean_src);
    let transform = SimilarityTransform {
        scale,
        rotation,
        translation,
    };

    let ss: f64 = pairs
        .iter()
        .map(|p| (transform.apply_point(&p.source) - p.target).norm_squared())
        .sum();
    Ok(EstimatedSimilarity {
        transform,
        rms_residual: (ss / nf).sqrt(),
    })
}
