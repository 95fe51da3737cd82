//! Label a point cloud from per-frame panoramic masks.
//!
//! A small synthetic room is viewed from three camera poses. Each frame's
//! mask labels a sprinkler region on the ceiling; votes accumulate over the
//! frames and the weighted majority assigns final classes. The labeled
//! cloud lands in a PLY you can open in any viewer.
//!
//! ```bash
//! cargo run --example label_point_cloud
//! ```

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use panoply::classes::ClassTable;
use panoply::geometry::RotationMatrix;
use panoply::labeling::{
    accumulate_frame_votes, finalize_weighted_majority, project_point_spherical,
    projection_pixel, CameraPose, LabeledCloud, PointCloud, VoteTable,
};
use panoply::raster::{Equirect, Raster};

fn main() -> panoply::Result<()> {
    let table = ClassTable::default();
    let (width, height) = (512u32, 256u32);
    let mut rng = ChaCha8Rng::seed_from_u64(1);

    // Ceiling plane at y = -1.3 (y points down) plus a dense sprinkler blob.
    let mut points: Vec<Vector3<f64>> = (0..20_000)
        .map(|_| {
            Vector3::new(
                rng.gen_range(-2.0..2.0),
                -1.3,
                rng.gen_range(-1.0..7.0),
            )
        })
        .collect();
    let sprinkler = Vector3::new(0.4, -1.25, 3.0);
    let first_blob = points.len();
    for _ in 0..300 {
        points.push(
            sprinkler
                + Vector3::new(
                    rng.gen_range(-0.05..0.05),
                    rng.gen_range(-0.05..0.05),
                    rng.gen_range(-0.05..0.05),
                ),
        );
    }
    let cloud = PointCloud::new(points);

    let poses: Vec<CameraPose> = (0..3)
        .map(|k| CameraPose {
            frame_id: k,
            position: Vector3::new(0.0, 0.0, 1.0 + k as f64),
            orientation: RotationMatrix::about_y(0.2 * k as f64),
        })
        .collect();

    let radius = 5.0;
    let mut votes = VoteTable::new(cloud.len(), table.num_classes());
    for pose in &poses {
        // Per-frame mask: paint the sprinkler blob's projected pixels.
        let mut mask = Raster::filled(width, height, 0u8);
        for p in &cloud.points[first_blob..] {
            if (p - pose.position).norm() > radius {
                continue;
            }
            let (u, v) = project_point_spherical(p, pose, width, height)?;
            let (x, y) = projection_pixel(u, v, width, height);
            for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    let px = (x as i64 + dx).rem_euclid(width as i64) as u32;
                    let py = (y as i64 + dy).clamp(0, height as i64 - 1) as u32;
                    mask.set(px, py, 9);
                }
            }
        }
        let mask = Equirect::new(pose.frame_id, mask)?;
        accumulate_frame_votes(&cloud, pose, &mask, radius, &mut votes)?;
    }

    let classes = finalize_weighted_majority(&votes, &table)?;
    let labeled = LabeledCloud::new(cloud, classes)?;
    let sprinkler_points = labeled.classes.iter().filter(|&&c| c == 9).count();
    println!(
        "labeled {} of {} points as {} across {} frames",
        sprinkler_points,
        labeled.cloud.len(),
        table.name(9),
        poses.len()
    );

    let out = std::env::temp_dir().join("panoply_label_point_cloud.ply");
    panoply::io::ply::write_labeled_cloud(&out, &labeled)?;
    println!("labeled cloud written to {}", out.display());
    Ok(())
}
