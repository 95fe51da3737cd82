//! The whole pipeline on a synthetic corridor, end to end.
//!
//! Builds a corridor point cloud with two planted assets, writes capture
//! frames, poses, a model mesh, registration pairs, and ground truth into a
//! scratch directory, then drives `convert → segment → fuse → project →
//! cluster → sample → register → evaluate` exactly as the CLI would. The
//! segmentation backend is a stub shell command that serves pre-rendered
//! masks, standing in for any real model behind the same contract.
//!
//! ```bash
//! cargo run --example run_pipeline
//! ```

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use panoply::config::{
    EvaluationConfig, PanoramaConfig, Paths, PipelineConfig, ProjectionConfig, RunConfig,
    SamplingConfig,
};
use panoply::evaluation::GroundTruthAsset;
use panoply::geometry::RotationMatrix;
use panoply::io::manifest::face_file_name;
use panoply::io::masks::{save_image, save_mask};
use panoply::io::poses::{write_poses, PoseRecord};
use panoply::labeling::{project_point_spherical, projection_pixel, CameraPose, PointCloud};
use panoply::panorama::{render_face_mask, FaceSpec};
use panoply::raster::{Equirect, Raster};
use panoply::ClassTable;

const PANO_W: u32 = 512;
const PANO_H: u32 = 256;
const FACE_RES: u32 = 192;
const RADIUS: f64 = 5.0;

fn main() -> panoply::Result<()> {
    let root = std::env::temp_dir().join("panoply_run_pipeline");
    let _ = std::fs::remove_dir_all(&root);
    std::fs::create_dir_all(&root).expect("scratch dir");
    let table = ClassTable::default();

    // --- Synthetic corridor: walls/ceiling scatter + two asset blobs.
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut points: Vec<Vector3<f64>> = (0..40_000)
        .map(|_| match rng.gen_range(0..3) {
            0 => Vector3::new(1.5, rng.gen_range(-1.3..1.3), rng.gen_range(-1.0..8.0)),
            1 => Vector3::new(-1.5, rng.gen_range(-1.3..1.3), rng.gen_range(-1.0..8.0)),
            _ => Vector3::new(rng.gen_range(-1.5..1.5), -1.3, rng.gen_range(-1.0..8.0)),
        })
        .collect();
    let assets = [
        (1u8, Vector3::new(1.44, 0.4, 2.0)),   // fire extinguisher on a wall
        (9u8, Vector3::new(-0.4, -1.24, 3.0)), // sprinkler on the ceiling
    ];
    let first_blob = points.len();
    for (_, center) in &assets {
        for _ in 0..300 {
            points.push(
                center
                    + Vector3::new(
                        rng.gen_range(-0.05..0.05),
                        rng.gen_range(-0.05..0.05),
                        rng.gen_range(-0.05..0.05),
                    ),
            );
        }
    }
    let cloud = PointCloud::new(points);

    let poses: Vec<PoseRecord> = (0..4)
        .map(|k| PoseRecord {
            pose: CameraPose {
                frame_id: k,
                position: Vector3::new(0.0, 0.0, 1.0 + k as f64),
                orientation: RotationMatrix::about_y(0.1 * k as f64),
            },
            image: format!("{k:06}.png"),
        })
        .collect();

    // --- Inputs on disk: cloud, poses, frames, mesh, pairs, ground truth.
    panoply::io::ply::write_point_cloud(&root.join("cloud.ply"), &cloud)?;
    write_poses(&root.join("poses.txt"), &poses)?;

    let frames_dir = root.join("frames");
    std::fs::create_dir_all(&frames_dir).expect("frames dir");
    for record in &poses {
        let mut img = Raster::filled(PANO_W, PANO_H, [0u8; 3]);
        for y in 0..PANO_H {
            for x in 0..PANO_W {
                img.set(x, y, [(x % 256) as u8, (y % 256) as u8, 128]);
            }
        }
        save_image(&frames_dir.join(&record.image), &img)?;
    }

    std::fs::write(
        root.join("model.obj"),
        "g Wall\nv 0 0 0\nv 8 0 0\nv 8 2.6 0\nv 0 2.6 0\nf 1 2 3\nf 1 3 4\n",
    )
    .expect("mesh");

    // The capture-to-model alignment we pretend a surveyor picked pairs for.
    let model_map = panoply::SimilarityTransform {
        scale: 1.1,
        rotation: RotationMatrix::about_y(0.25),
        translation: Vector3::new(3.0, 0.0, -2.0),
    };
    let picks = [
        Vector3::new(1.5, 1.3, -1.0),
        Vector3::new(-1.5, 1.3, -1.0),
        Vector3::new(1.5, -1.3, 8.0),
        Vector3::new(-1.5, -1.3, 8.0),
    ];
    let pairs: Vec<panoply::PointPair> = picks
        .iter()
        .map(|s| panoply::PointPair {
            source: *s,
            target: model_map.apply_point(s),
        })
        .collect();
    panoply::io::pairs::write_pairs(&root.join("pairs.txt"), &pairs)?;

    let truths: Vec<GroundTruthAsset> = assets
        .iter()
        .map(|(class_id, center)| GroundTruthAsset {
            class_id: *class_id,
            location: model_map.apply_point(center),
        })
        .collect();
    panoply::io::inventory::write_ground_truth(&root.join("ground_truth.tsv"), &truths, &table)?;

    // --- Stub segmenter stock: masks rendered from analytically projected
    // blobs, one face mask per face image, named by the face contract so
    // they line up with the manifest convert writes.
    let staging = root.join("staged_masks");
    std::fs::create_dir_all(&staging).expect("staging dir");
    let specs = FaceSpec::all_faces(6, FACE_RES)?;
    for record in &poses {
        let mut pano_mask = Raster::filled(PANO_W, PANO_H, 0u8);
        for (b, (class_id, _)) in assets.iter().enumerate() {
            for p in &cloud.points[first_blob + b * 300..first_blob + (b + 1) * 300] {
                if (p - record.pose.position).norm() > RADIUS {
                    continue;
                }
                let (u, v) = project_point_spherical(p, &record.pose, PANO_W, PANO_H)?;
                let (x, y) = projection_pixel(u, v, PANO_W, PANO_H);
                for dy in -2i64..=2 {
                    for dx in -2i64..=2 {
                        let px = (x as i64 + dx).rem_euclid(PANO_W as i64) as u32;
                        let py = (y as i64 + dy).clamp(0, PANO_H as i64 - 1) as u32;
                        pano_mask.set(px, py, *class_id);
                    }
                }
            }
        }
        let pano_mask = Equirect::new(record.pose.frame_id, pano_mask)?;
        for spec in &specs {
            let face = render_face_mask(&pano_mask, spec)?;
            let file = face_file_name(record.pose.frame_id, spec.ring, spec.index);
            save_mask(&staging.join(&file), &face)?;
        }
    }

    // --- Configure and run every stage.
    let config = PipelineConfig {
        paths: Paths {
            output_dir: root.join("out"),
            frames_dir: Some(frames_dir),
            face_masks_dir: None,
            suppression_dir: None,
            cloud: Some(root.join("cloud.ply")),
            poses: Some(root.join("poses.txt")),
            mesh: Some(root.join("model.obj")),
            pairs: Some(root.join("pairs.txt")),
            ground_truth: Some(root.join("ground_truth.tsv")),
            class_table: None,
        },
        panorama: PanoramaConfig {
            nb_splits: 6,
            face_resolution: FACE_RES,
            width: PANO_W,
        },
        projection: ProjectionConfig { radius: RADIUS },
        evaluation: EvaluationConfig { max_dist: 1.5 },
        sampling: SamplingConfig { total_points: 20_000 },
        run: RunConfig {
            seed: 0,
            workers: 0,
            segmenter: Some(format!("cp {}/*.png {{output}}/", staging.display())),
        },
    };
    let summary = panoply::pipeline::convert(&config)?;
    println!("convert:  {} frames -> {} faces", summary.frames, summary.faces);
    println!("segment:  {} masks", panoply::pipeline::segment(&config)?.masks);
    println!("fuse:     {} frames", panoply::pipeline::fuse(&config)?.frames);
    let projected = panoply::pipeline::project(&config)?;
    println!(
        "project:  {} points, {} labeled",
        projected.points, projected.labeled_points
    );
    println!(
        "cluster:  {} instances",
        panoply::pipeline::cluster(&config)?.instances
    );
    println!("sample:   {} points", panoply::pipeline::sample(&config)?.points);
    let registered = panoply::pipeline::register(&config)?;
    println!(
        "register: scale {:.4}, rms {:.2e} m",
        registered.scale, registered.rms_residual
    );
    let report = panoply::pipeline::evaluate(&config)?;
    println!();
    print!("{}", panoply::io::report::render_table(&report));
    println!();
    println!("all outputs under {}", root.join("out").display());
    Ok(())
}
