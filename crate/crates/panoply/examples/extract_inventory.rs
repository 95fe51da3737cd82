//! Cluster a labeled cloud into an asset inventory.
//!
//! Plants three extinguisher blobs — two of them closer together than the
//! clustering eps — and a sprinkler, then extracts instances per class.
//! The close pair merges into a single instance, which is exactly the
//! undercounting a purely geometric clusterer exhibits on paired assets.
//!
//! ```bash
//! cargo run --example extract_inventory
//! ```

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use panoply::classes::ClassTable;
use panoply::instances::extract_instances;
use panoply::labeling::{LabeledCloud, PointCloud};

fn blob(rng: &mut ChaCha8Rng, center: Vector3<f64>, n: usize) -> Vec<Vector3<f64>> {
    (0..n)
        .map(|_| {
            center
                + Vector3::new(
                    rng.gen_range(-0.05..0.05),
                    rng.gen_range(-0.05..0.05),
                    rng.gen_range(-0.05..0.05),
                )
        })
        .collect()
}

fn main() -> panoply::Result<()> {
    let table = ClassTable::default();
    let mut rng = ChaCha8Rng::seed_from_u64(5);

    let mut points = Vec::new();
    let mut classes = Vec::new();
    let mut plant = |pts: Vec<Vector3<f64>>, class: u8| {
        classes.extend(std::iter::repeat_n(class, pts.len()));
        points.extend(pts);
    };

    // A lone extinguisher, a paired couple 0.25 m apart (eps is 0.3 m),
    // and a sprinkler overhead. Plus background scatter.
    plant(blob(&mut rng, Vector3::new(0.0, 0.5, 1.0), 120), 1);
    plant(blob(&mut rng, Vector3::new(4.0, 0.5, 1.0), 120), 1);
    plant(blob(&mut rng, Vector3::new(4.25, 0.5, 1.0), 120), 1);
    plant(blob(&mut rng, Vector3::new(2.0, -1.25, 3.0), 150), 9);
    plant(
        (0..2000)
            .map(|_| {
                Vector3::new(
                    rng.gen_range(-1.0..6.0),
                    rng.gen_range(-1.3..1.3),
                    rng.gen_range(-1.0..6.0),
                )
            })
            .collect(),
        0,
    );

    let labeled = LabeledCloud::new(PointCloud::new(points), classes)?;
    let instances = extract_instances(&labeled, &table)?;

    println!("planted 3 extinguisher blobs (two of them 0.25 m apart) and 1 sprinkler");
    println!("extracted {} instances:", instances.len());
    for inst in &instances {
        println!(
            "  {:<20} at ({:+.2}, {:+.2}, {:+.2})  support {}",
            table.name(inst.class_id),
            inst.centroid.x,
            inst.centroid.y,
            inst.centroid.z,
            inst.support
        );
    }
    println!("note the paired extinguishers came out as one instance at their midpoint");
    Ok(())
}
