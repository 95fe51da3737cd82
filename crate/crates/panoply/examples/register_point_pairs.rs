//! Recover a capture-to-model similarity transform from picked point pairs.
//!
//! Photogrammetric clouds come with arbitrary scale, orientation, and
//! origin. Given a handful of hand-picked correspondences, the closed-form
//! least-squares fit recovers uniform scale, rotation, and translation; the
//! RMS residual tells you how consistent the picks were.
//!
//! ```bash
//! cargo run --example register_point_pairs
//! ```

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use panoply::geometry::RotationMatrix;
use panoply::registration::{estimate_similarity, PointPair, SimilarityTransform};

fn main() -> panoply::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(9);

    // The "unknown" alignment between the capture and the model frame.
    let truth = SimilarityTransform {
        scale: 1.37,
        rotation: RotationMatrix::from_axis_angle(Vector3::new(0.2, 1.0, -0.1), 0.8),
        translation: Vector3::new(12.0, -3.5, 40.0),
    };

    // Eight picks, each nudged by ~1 cm of picking error.
    let pairs: Vec<PointPair> = (0..8)
        .map(|_| {
            let source = Vector3::new(
                rng.gen_range(-5.0..5.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-8.0..8.0),
            );
            let jitter = Vector3::new(
                rng.gen_range(-0.01..0.01),
                rng.gen_range(-0.01..0.01),
                rng.gen_range(-0.01..0.01),
            );
            PointPair {
                source,
                target: truth.apply_point(&source) + jitter,
            }
        })
        .collect();

    let est = estimate_similarity(&pairs)?;
    println!("true scale      {:.6}", truth.scale);
    println!("fitted scale    {:.6}", est.transform.scale);
    println!(
        "rotation error  {:.2e}",
        (est.transform.rotation.matrix() - truth.rotation.matrix()).amax()
    );
    println!(
        "translation err {:.4} m",
        (est.transform.translation - truth.translation).norm()
    );
    println!("rms residual    {:.4} m over {} pairs", est.rms_residual, pairs.len());

    let probe = Vector3::new(1.0, 0.5, -2.0);
    println!(
        "capture point ({:.1}, {:.1}, {:.1}) lands at model ({:.3}, {:.3}, {:.3})",
        probe.x,
        probe.y,
        probe.z,
        est.transform.apply_point(&probe).x,
        est.transform.apply_point(&probe).y,
        est.transform.apply_point(&probe).z
    );
    Ok(())
}
