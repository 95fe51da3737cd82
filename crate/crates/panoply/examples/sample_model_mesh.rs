//! Sample a building-model mesh into a synthetic point cloud.
//!
//! The per-triangle point counts are allocated proportionally to area with
//! largest-remainder rounding, so the totals are exact and the density is
//! uniform across surfaces of different sizes.
//!
//! ```bash
//! cargo run --example sample_model_mesh
//! ```

use nalgebra::Vector3;

use panoply::registration::{allocate_by_area, sample_surface, SurfaceMesh};

fn main() -> panoply::Result<()> {
    // An L-shaped floor: a large 4x2 slab and a small 1x1 wing.
    let mesh = SurfaceMesh::new(
        vec![
            Vector3::new(0.0, 0.0, 0.0),
            Vector3::new(4.0, 0.0, 0.0),
            Vector3::new(4.0, 0.0, 2.0),
            Vector3::new(0.0, 0.0, 2.0),
            Vector3::new(0.0, 0.0, 2.0),
            Vector3::new(1.0, 0.0, 2.0),
            Vector3::new(1.0, 0.0, 3.0),
            Vector3::new(0.0, 0.0, 3.0),
        ],
        vec![[0, 1, 2], [0, 2, 3], [4, 5, 6], [4, 6, 7]],
        vec![],
    )?;

    let total = 90_000;
    let areas: Vec<f64> = (0..mesh.triangles.len())
        .map(|i| mesh.triangle_area(i))
        .collect();
    let counts = allocate_by_area(&areas, total)?;
    println!("area-proportional allocation of {total} points:");
    for (i, (area, count)) in areas.iter().zip(&counts).enumerate() {
        println!("  triangle {i}: area {area:.1} m² -> {count} points");
    }

    let cloud = sample_surface(&mesh, total, 42)?;
    assert_eq!(cloud.len(), total);
    let wing = cloud.points.iter().filter(|p| p.z > 2.0).count();
    println!(
        "{} of {} samples landed on the 1 m² wing (expected ~{})",
        wing,
        total,
        total / 9
    );

    let out = std::env::temp_dir().join("panoply_synthetic_model.ply");
    panoply::io::ply::write_point_cloud(&out, &cloud)?;
    println!("synthetic cloud written to {}", out.display());
    Ok(())
}
