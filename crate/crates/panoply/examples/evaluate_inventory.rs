//! Score a predicted inventory against surveyed ground truth.
//!
//! Class-aware greedy matching within a distance gate produces TP/FP/FN
//! counts, per-class precision/recall/F1, mean localization error, and a
//! macro average — the same report the `evaluate` subcommand writes.
//!
//! ```bash
//! cargo run --example evaluate_inventory
//! ```

use nalgebra::Vector3;

use panoply::classes::ClassTable;
use panoply::evaluation::{compute_metrics, match_instances, GroundTruthAsset};
use panoply::instances::{Aabb, AssetInstance};

fn predicted(class_id: u8, x: f64, y: f64, z: f64) -> AssetInstance {
    let centroid = Vector3::new(x, y, z);
    AssetInstance {
        class_id,
        centroid,
        support: 100,
        extent: Aabb {
            min: centroid - Vector3::repeat(0.05),
            max: centroid + Vector3::repeat(0.05),
        },
    }
}

fn surveyed(class_id: u8, x: f64, y: f64, z: f64) -> GroundTruthAsset {
    GroundTruthAsset {
        class_id,
        location: Vector3::new(x, y, z),
    }
}

fn main() -> panoply::Result<()> {
    let table = ClassTable::default();

    // Two extinguishers (one missed), two exit signs (one off by 40 cm),
    // a sprinkler, and a spurious call-point detection.
    let predictions = vec![
        predicted(1, 0.30, 0.5, 2.0),
        predicted(2, 5.10, -0.9, 4.0),
        predicted(2, 9.42, -0.9, 7.8),
        predicted(9, 3.00, -1.25, 5.0),
        predicted(10, 6.00, 0.0, 1.0),
    ];
    let truths = vec![
        surveyed(1, 0.32, 0.5, 2.0),
        surveyed(1, 8.00, 0.5, 2.0),
        surveyed(2, 5.00, -0.9, 4.0),
        surveyed(2, 9.50, -0.9, 8.2),
        surveyed(9, 3.05, -1.25, 5.0),
    ];

    let matching = match_instances(&predictions, &truths, 1.5)?;
    let report = compute_metrics(&predictions, &truths, &matching, &table);
    print!("{}", panoply::io::report::render_table(&report));
    Ok(())
}
