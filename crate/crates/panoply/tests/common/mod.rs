//! Shared fixtures: a synthetic corridor scene with planted assets, poses,
//! analytically synthesized panoramic ground-truth masks, and small helpers
//! for driving the pipeline from tests.
//!
//! The analytic masks are produced by projecting the planted blob points
//! directly with the spherical camera equations and painting small disks —
//! a code path independent of the face-splitting/merging pipeline they are
//! later used to exercise.

// Each test target compiles this module on its own and uses a subset of it.
#![allow(dead_code)]

use std::path::{Path, PathBuf};

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use panoply::config::{
    EvaluationConfig, PanoramaConfig, Paths, PipelineConfig, ProjectionConfig, RunConfig,
    SamplingConfig,
};
use panoply::evaluation::GroundTruthAsset;
use panoply::geometry::RotationMatrix;
use panoply::io::manifest::{face_file_name, write_manifest, FaceEntry};
use panoply::io::masks::{save_image, save_mask};
use panoply::io::poses::{write_poses, PoseRecord};
use panoply::labeling::{project_point_spherical, projection_pixel, CameraPose, PointCloud};
use panoply::panorama::{render_face_mask, FaceSpec};
use panoply::raster::{Equirect, Raster};

pub const BLOB_RADIUS: f64 = 0.06;

/// Corridor extents, world frame with y pointing down: side walls at
/// x = ±1.5, ceiling at y = −1.3, floor level +1.3 (not sampled), ends at
/// z = −1 and z = 13.
const X_WALL: f64 = 1.5;
const Y_CEILING: f64 = -1.3;
const Y_FLOOR: f64 = 1.3;
const Z_MIN: f64 = -1.0;
const Z_MAX: f64 = 13.0;

pub struct CorridorParams {
    pub wall_points: usize,
    pub blob_points: usize,
    pub num_poses: usize,
    pub pano_width: u32,
    pub seed: u64,
    /// (class id, planted center)
    pub blobs: Vec<(u8, Vector3<f64>)>,
}

impl CorridorParams {
    /// The full-size scene used by the end-to-end acceptance runs: ~200k
    /// structure points and six planted assets of distinct classes.
    pub fn full() -> CorridorParams {
        CorridorParams {
            wall_points: 200_000,
            blob_points: 400,
            num_poses: 10,
            pano_width: 1024,
            seed: 2024,
            blobs: vec![
                (1, Vector3::new(1.44, 0.5, 2.5)),    // fire extinguisher, wall
                (2, Vector3::new(-1.44, -0.9, 4.0)),  // fire exit sign, wall
                (4, Vector3::new(1.44, -0.6, 6.0)),   // fire alarm, wall
                (6, Vector3::new(0.3, -1.24, 7.5)),   // smoke detector, ceiling
                (9, Vector3::new(-0.5, -1.24, 3.5)),  // sprinkler, ceiling
                (10, Vector3::new(-1.44, 0.0, 9.0)),  // fire call point, wall
            ],
        }
    }

    /// A small variant for pipeline plumbing tests.
    pub fn mini() -> CorridorParams {
        CorridorParams {
            wall_points: 30_000,
            blob_points: 300,
            num_poses: 3,
            pano_width: 512,
            seed: 7,
            blobs: vec![
                (1, Vector3::new(1.44, 0.4, 2.0)),
                (9, Vector3::new(-0.4, -1.24, 2.8)),
            ],
        }
    }
}

pub struct Corridor {
    pub cloud: PointCloud,
    pub assets: Vec<GroundTruthAsset>,
    pub poses: Vec<PoseRecord>,
    pub pano_width: u32,
    pub pano_height: u32,
    /// Index of the first blob point in the cloud.
    pub first_blob_point: usize,
}

type SurfaceSampler = Box<dyn Fn(&mut ChaCha8Rng) -> Vector3<f64>>;

pub fn build_corridor(params: &CorridorParams) -> Corridor {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let length = Z_MAX - Z_MIN;
    let height = Y_FLOOR - Y_CEILING;
    let width = 2.0 * X_WALL;

    // (area, sampler) per surface: two side walls, two end walls, ceiling.
    let surfaces: Vec<(f64, SurfaceSampler)> = vec![
        (
            height * length,
            Box::new(|r: &mut ChaCha8Rng| {
                Vector3::new(X_WALL, r.gen_range(Y_CEILING..Y_FLOOR), r.gen_range(Z_MIN..Z_MAX))
            }),
        ),
        (
            height * length,
            Box::new(|r: &mut ChaCha8Rng| {
                Vector3::new(-X_WALL, r.gen_range(Y_CEILING..Y_FLOOR), r.gen_range(Z_MIN..Z_MAX))
            }),
        ),
        (
            width * height,
            Box::new(|r: &mut ChaCha8Rng| {
                Vector3::new(r.gen_range(-X_WALL..X_WALL), r.gen_range(Y_CEILING..Y_FLOOR), Z_MIN)
            }),
        ),
        (
            width * height,
            Box::new(|r: &mut ChaCha8Rng| {
                Vector3::new(r.gen_range(-X_WALL..X_WALL), r.gen_range(Y_CEILING..Y_FLOOR), Z_MAX)
            }),
        ),
        (
            width * length,
            Box::new(|r: &mut ChaCha8Rng| {
                Vector3::new(r.gen_range(-X_WALL..X_WALL), Y_CEILING, r.gen_range(Z_MIN..Z_MAX))
            }),
        ),
    ];
    let total_area: f64 = surfaces.iter().map(|(a, _)| a).sum();

    let mut points = Vec::with_capacity(params.wall_points + params.blobs.len() * params.blob_points);
    for (area, sampler) in &surfaces {
        let count = (params.wall_points as f64 * area / total_area) as usize;
        for _ in 0..count {
            points.push(sampler(&mut rng));
        }
    }
    let first_blob_point = points.len();

    let mut assets = Vec::new();
    for (class_id, center) in &params.blobs {
        for _ in 0..params.blob_points {
            points.push(
                center
                    + Vector3::new(
                        rng.gen_range(-BLOB_RADIUS..BLOB_RADIUS),
                        rng.gen_range(-BLOB_RADIUS..BLOB_RADIUS),
                        rng.gen_range(-BLOB_RADIUS..BLOB_RADIUS),
                    ),
            );
        }
        assets.push(GroundTruthAsset {
            class_id: *class_id,
            location: *center,
        });
    }

    let poses = (0..params.num_poses)
        .map(|k| PoseRecord {
            pose: CameraPose {
                frame_id: k as u64,
                position: Vector3::new(0.0, 0.0, 1.0 + k as f64),
                orientation: RotationMatrix::about_y(
                    0.15 * (k as f64 - (params.num_poses as f64 - 1.0) / 2.0),
                ),
            },
            image: format!("{k:06}.png"),
        })
        .collect();

    Corridor {
        cloud: PointCloud::new(points),
        assets,
        poses,
        pano_width: params.pano_width,
        pano_height: params.pano_width / 2,
        first_blob_point,
    }
}

fn paint_disk(mask: &mut Raster<u8>, cx: u32, cy: u32, radius: i64, class: u8) {
    let (w, h) = (mask.width() as i64, mask.height() as i64);
    for dy in -radius..=radius {
        for dx in -radius..=radius {
            if dx * dx + dy * dy > radius * radius {
                continue;
            }
            let x = (cx as i64 + dx).rem_euclid(w) as u32;
            let y = (cy as i64 + dy).clamp(0, h - 1) as u32;
            mask.set(x, y, class);
        }
    }
}

/// Synthesizes the per-frame panoramic ground-truth masks by projecting the
/// blob points directly (no face views involved): every in-radius blob
/// point paints a 2-pixel disk of its class at its projected pixel.
pub fn analytic_masks(
    corridor: &Corridor,
    params: &CorridorParams,
    radius: f64,
) -> Vec<Equirect<u8>> {
    let (w, h) = (corridor.pano_width, corridor.pano_height);
    corridor
        .poses
        .iter()
        .map(|record| {
            let mut raster = Raster::filled(w, h, 0u8);
            for (b, (class_id, _)) in params.blobs.iter().enumerate() {
                let start = corridor.first_blob_point + b * params.blob_points;
                for p in &corridor.cloud.points[start..start + params.blob_points] {
                    if (p - record.pose.position).norm() > radius {
                        continue;
                    }
                    let (u, v) = project_point_spherical(p, &record.pose, w, h).unwrap();
                    let (x, y) = projection_pixel(u, v, w, h);
                    paint_disk(&mut raster, x, y, 2, *class_id);
                }
            }
            Equirect::new(record.pose.frame_id, raster).unwrap()
        })
        .collect()
}

/// Renders every frame's 18 face masks from the analytic panoramic masks
/// into `dir` (the stub segmenter's stock) and returns the manifest rows.
pub fn stage_face_masks(
    masks: &[Equirect<u8>],
    dir: &Path,
    nb_splits: u32,
    resolution: u32,
) -> Vec<FaceEntry> {
    std::fs::create_dir_all(dir).unwrap();
    let specs = FaceSpec::all_faces(nb_splits, resolution).unwrap();
    let mut entries = Vec::new();
    for mask in masks {
        for spec in &specs {
            let face = render_face_mask(mask, spec).unwrap();
            let file = face_file_name(mask.frame_id, spec.ring, spec.index);
            save_mask(&dir.join(&file), &face).unwrap();
            entries.push(FaceEntry {
                file,
                frame_id: mask.frame_id,
                ring: spec.ring,
                index: spec.index,
                resolution: spec.resolution,
            });
        }
    }
    entries
}

/// Writes synthetic equirectangular capture frames (a smooth gradient) so
/// the convert stage has something to chew on.
pub fn write_gradient_frames(dir: &Path, poses: &[PoseRecord], width: u32, height: u32) {
    std::fs::create_dir_all(dir).unwrap();
    for record in poses {
        let mut img = Raster::filled(width, height, [0u8, 0, 0]);
        for y in 0..height {
            for x in 0..width {
                img.set(
                    x,
                    y,
                    [
                        (x * 255 / width) as u8,
                        (y * 255 / height) as u8,
                        ((record.pose.frame_id * 40) % 255) as u8,
                    ],
                );
            }
        }
        save_image(&dir.join(&record.image), &img).unwrap();
    }
}

/// A 2×1×1 m box mesh for the sampling stage.
pub fn write_box_obj(path: &Path) {
    let obj = "g Wall\n\
               v 0 0 0\nv 2 0 0\nv 2 1 0\nv 0 1 0\n\
               v 0 0 1\nv 2 0 1\nv 2 1 1\nv 0 1 1\n\
               f 1 2 3\nf 1 3 4\n\
               f 5 6 7\nf 5 7 8\n\
               f 1 2 6\nf 1 6 5\n\
               g Ceiling\n\
               f 4 3 7\nf 4 7 8\n";
    std::fs::write(path, obj).unwrap();
}

/// Base config over a scratch directory; stages fill in what they need.
pub fn corridor_config(root: &Path, corridor: &Corridor, face_resolution: u32) -> PipelineConfig {
    PipelineConfig {
        paths: Paths {
            output_dir: root.join("out"),
            frames_dir: None,
            face_masks_dir: None,
            suppression_dir: None,
            cloud: Some(root.join("cloud.ply")),
            poses: Some(root.join("poses.txt")),
            mesh: None,
            pairs: None,
            ground_truth: Some(root.join("ground_truth.tsv")),
            class_table: None,
        },
        panorama: PanoramaConfig {
            nb_splits: 6,
            face_resolution,
            width: corridor.pano_width,
        },
        projection: ProjectionConfig { radius: 5.0 },
        evaluation: EvaluationConfig { max_dist: 1.5 },
        sampling: SamplingConfig { total_points: 5000 },
        run: RunConfig {
            seed: 0,
            workers: 0,
            segmenter: None,
        },
    }
}

/// Writes the corridor's cloud, poses, and ground truth under `root`.
pub fn write_corridor_inputs(root: &Path, corridor: &Corridor) {
    panoply::io::ply::write_point_cloud(&root.join("cloud.ply"), &corridor.cloud).unwrap();
    write_poses(&root.join("poses.txt"), &corridor.poses).unwrap();
    panoply::io::inventory::write_ground_truth(
        &root.join("ground_truth.tsv"),
        &corridor.assets,
        &panoply::ClassTable::default(),
    )
    .unwrap();
}

/// Writes the staged-mask manifest where convert would have put it.
pub fn write_faces_manifest(config: &PipelineConfig, entries: &[FaceEntry]) {
    let layout = panoply::pipeline::OutputLayout::new(config);
    write_manifest(&layout.faces_manifest, entries).unwrap();
}

/// Stub segmenter command: copies the staged masks into the output dir.
pub fn stub_segmenter(staging: &Path) -> String {
    format!("cp {}/*.png {{output}}/", staging.display())
}

/// Recursively collects relative path -> content for a tree.
pub fn tree_bytes(root: &Path) -> std::collections::BTreeMap<PathBuf, Vec<u8>> {
    let mut out = std::collections::BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(root).unwrap().to_path_buf();
                out.insert(rel, std::fs::read(&path).unwrap());
            }
        }
    }
    out
}

/// Asserts two output trees are byte-identical.
pub fn assert_trees_identical(a: &Path, b: &Path) {
    let ta = tree_bytes(a);
    let tb = tree_bytes(b);
    let keys_a: Vec<_> = ta.keys().collect();
    let keys_b: Vec<_> = tb.keys().collect();
    assert_eq!(keys_a, keys_b, "output trees list different files");
    for (path, bytes) in &ta {
        assert_eq!(
            bytes,
            &tb[path],
            "{} differs between runs",
            path.display()
        );
    }
}
