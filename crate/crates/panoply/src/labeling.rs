//! Transfer of panoramic mask labels onto a photogrammetric point cloud.
//!
//! Every frame's merged mask is a spherical camera: cloud points within a
//! radius of the camera center are projected to equirectangular pixels and
//! read one class vote each. Votes accumulate over all frames and the final
//! per-point class is the argmax of count × class weight, which lets asset
//! classes outweigh the background. The radius threshold is the sole guard
//! against labeling points that sit behind walls; there is no z-buffer.

use std::f64::consts::PI;

use nalgebra::Vector3;
use rayon::prelude::*;

use crate::classes::ClassTable;
use crate::error::{Error, Result};
use crate::geometry::RotationMatrix;
use crate::raster::Equirect;

/// A 3-D point cloud in world meters, with optional per-point color.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    pub points: Vec<Vector3<f64>>,
    pub colors: Option<Vec<[u8; 3]>>,
}

impl PointCloud {
    pub fn new(points: Vec<Vector3<f64>>) -> Self {
        PointCloud {
            points,
            colors: None,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Camera pose of one panoramic frame: position and camera-to-world rotation.
#[derive(Debug, Clone, PartialEq)]
pub struct CameraPose {
    pub frame_id: u64,
    pub position: Vector3<f64>,
    pub orientation: RotationMatrix,
}

/// Accumulated per-point class votes (class 0 = background).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VoteTable {
    num_points: usize,
    num_classes: usize,
    counts: Vec<u32>,
}

impl VoteTable {
    pub fn new(num_points: usize, num_classes: usize) -> Self {
        VoteTable {
            num_points,
            num_classes,
            counts: vec![0; num_points * (num_classes + 1)],
        }
    }

    pub fn num_points(&self) -> usize {
        self.num_points
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn count(&self, point: usize, class: u8) -> u32 {
        self.point_counts(point)[class as usize]
    }

    pub fn point_counts(&self, point: usize) -> &[u32] {
        let stride = self.num_classes + 1;
        &self.counts[point * stride..(point + 1) * stride]
    }

    pub fn add(&mut self, point: usize, class: u8) {
        let stride = self.num_classes + 1;
        self.counts[point * stride + class as usize] += 1;
    }

    /// Elementwise addition; partial tables from independent frames merge
    /// into the same totals in any order.
    pub fn merge_from(&mut self, other: &VoteTable) -> Result<()> {
        if self.num_points != other.num_points || self.num_classes != other.num_classes {
            return Err(Error::invalid_input(
                "cannot merge vote tables of different shapes",
            ));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        Ok(())
    }
}

/// A point cloud with a final class id per point.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledCloud {
    pub cloud: PointCloud,
    pub classes: Vec<u8>,
}

impl LabeledCloud {
    pub fn new(cloud: PointCloud, classes: Vec<u8>) -> Result<Self> {
        if cloud.len() != classes.len() {
            return Err(Error::invalid_input(format!(
                "{} points but {} class labels",
                cloud.len(),
                classes.len()
            )));
        }
        Ok(LabeledCloud { cloud, classes })
    }
}

/// Focal length of the spherical camera in pixels: width / 2π.
pub fn spherical_focal(width: u32) -> f64 {
    width as f64 / (2.0 * PI)
}

/// Indices of the points within `radius` meters of the camera center.
pub fn points_in_radius(cloud: &PointCloud, pose: &CameraPose, radius: f64) -> Result<Vec<usize>> {
    if !radius.is_finite() || radius <= 0.0 {
        return Err(Error::invalid_input("projection radius must be positive"));
    }
    let r2 = radius * radius;
    Ok((0..cloud.len())
        .filter(|&i| (cloud.points[i] - pose.position).norm_squared() <= r2)
        .collect())
}

/// Projects a world point into the frame's equirectangular image.
///
/// The point is moved into the camera frame, then
/// u = W/2 + f·atan2(x, z) and v = H/2 + f·atan2(y, √(x²+z²)) with
/// f = W/2π. u wraps modulo the width, v clamps to [0, H−1]. Projecting the
/// camera center itself is rejected.
pub fn project_point_spherical(
    point: &Vector3<f64>,
    pose: &CameraPose,
    width: u32,
    height: u32,
) -> Result<(f64, f64)> {
    let cam = pose.orientation.apply_inverse(&(point - pose.position));
    if cam == Vector3::zeros() {
        return Err(Error::invalid_input(
            "cannot project a point located at the camera center",
        ));
    }
    let f = spherical_focal(width);
    let u = 0.5 * width as f64 + f * cam.x.atan2(cam.z);
    let v = 0.5 * height as f64 + f * cam.y.atan2((cam.x * cam.x + cam.z * cam.z).sqrt());
    let u = u.rem_euclid(width as f64);
    let v = v.clamp(0.0, height as f64 - 1.0);
    Ok((u, v))
}

/// Nearest mask pixel for a projection, wrapping u and clamping v.
pub fn projection_pixel(u: f64, v: f64, width: u32, height: u32) -> (u32, u32) {
    let x = (u.round() as i64).rem_euclid(width as i64) as u32;
    let y = (v.round() as i64).clamp(0, height as i64 - 1) as u32;
    (x, y)
}

/// Adds one vote per in-radius point from a frame's merged mask.
pub fn accumulate_frame_votes(
    cloud: &PointCloud,
    pose: &CameraPose,
    mask: &Equirect<u8>,
    radius: f64,
    votes: &mut VoteTable,
) -> Result<()> {
    if votes.num_points() != cloud.len() {
        return Err(Error::invalid_input(format!(
            "vote table holds {} points but the cloud has {}",
            votes.num_points(),
            cloud.len()
        )));
    }
    let (w, h) = (mask.width(), mask.height());
    for index in points_in_radius(cloud, pose, radius)? {
        let (u, v) = project_point_spherical(&cloud.points[index], pose, w, h)?;
        let (x, y) = projection_pixel(u, v, w, h);
        let label = mask.raster().get(x, y);
        if label as usize > votes.num_classes() {
            return Err(Error::validation(format!(
                "frame {} mask contains class id {label} beyond the class table",
                mask.frame_id
            )));
        }
        votes.add(index, label);
    }
    Ok(())
}

/// Argmax of count × weight over classes, ties resolving to the lowest id.
pub fn weighted_winner(counts: &[u32], weights: &[f64]) -> u8 {
    debug_assert_eq!(counts.len(), weights.len());
    let mut best = 0usize;
    let mut best_score = counts[0] as f64 * weights[0];
    for (c, (&count, &weight)) in counts.iter().zip(weights).enumerate().skip(1) {
        let score = count as f64 * weight;
        if score > best_score {
            best = c;
            best_score = score;
        }
    }
    best as u8
}

/// Final class per point: argmax of count × weight (background weight 1.0),
/// ties resolving to the lowest class id. Unvoted points stay background.
pub fn finalize_weighted_majority(votes: &VoteTable, table: &ClassTable) -> Result<Vec<u8>> {
    if votes.num_classes() != table.num_classes() {
        return Err(Error::invalid_input(format!(
            "vote table has {} classes but the class table has {}",
            votes.num_classes(),
            table.num_classes()
        )));
    }
    let weights: Vec<f64> = (0..=table.num_classes())
        .map(|c| table.weight(c as u8))
        .collect();
    Ok((0..votes.num_points())
        .into_par_iter()
        .map(|i| weighted_winner(votes.point_counts(i), &weights))
        .collect())
}
