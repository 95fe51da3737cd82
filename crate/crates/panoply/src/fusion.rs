//! Rectification and merging of per-face prediction masks.
//!
//! Face masks are first rectified with suppression rasters (e.g. person
//! silhouettes from any segmentation backend), then the faces of one frame
//! are merged into a single equirectangular mask. Each face that covers an
//! equirect pixel contributes one vote; the most-voted class wins, except
//! that any non-background vote beats a background majority — assets are
//! never out-voted by empty space alone.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::panorama::{FaceProjector, FaceSpec};
use crate::raster::{Equirect, Raster};

/// A face view's label raster (0 = background).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FaceMask {
    pub spec: FaceSpec,
    pub labels: Raster<u8>,
}

impl FaceMask {
    pub fn new(spec: FaceSpec, labels: Raster<u8>) -> Result<Self> {
        if labels.width() != spec.resolution || labels.height() != spec.resolution {
            return Err(Error::invalid_input(format!(
                "face mask is {}x{} but the face resolution is {}",
                labels.width(),
                labels.height(),
                spec.resolution
            )));
        }
        Ok(FaceMask { spec, labels })
    }
}

/// Forces every pixel under a nonzero suppression value to background.
pub fn suppress_regions(mask: &FaceMask, suppression: &Raster<u8>) -> Result<FaceMask> {
    if !mask.labels.same_dimensions(suppression) {
        return Err(Error::invalid_input(format!(
            "suppression raster is {}x{} but the mask is {}x{}",
            suppression.width(),
            suppression.height(),
            mask.labels.width(),
            mask.labels.height()
        )));
    }
    let data = mask
        .labels
        .data()
        .iter()
        .zip(suppression.data())
        .map(|(&label, &s)| if s != 0 { 0 } else { label })
        .collect();
    Ok(FaceMask {
        spec: mask.spec,
        labels: Raster::from_vec(mask.labels.width(), mask.labels.height(), data)?,
    })
}

/// Picks the winning class from per-class vote counts (`counts[0]` is the
/// background). Most votes win, ties go to the lowest class id, and a
/// background win is overturned by the strongest non-background vote when
/// one exists.
pub fn vote_winner(counts: &[u32]) -> u8 {
    let mut best = 0usize;
    for c in 1..counts.len() {
        if counts[c] > counts[best] {
            best = c;
        }
    }
    if best == 0 {
        let mut best_asset = 0usize;
        for c in 1..counts.len() {
            if counts[c] > 0 && (best_asset == 0 || counts[c] > counts[best_asset]) {
                best_asset = c;
            }
        }
        if best_asset != 0 {
            best = best_asset;
        }
    }
    best as u8
}

/// Merges the face masks of one frame into an equirectangular mask of
/// `width` × `height` by per-pixel voting across the faces that cover each
/// pixel. Pixels covered by no face are background. Absent faces simply
/// contribute no votes.
pub fn merge_face_masks(
    frame_id: u64,
    faces: &[FaceMask],
    num_classes: usize,
    width: u32,
    height: u32,
) -> Result<Equirect<u8>> {
    if width == 0 || width != height * 2 {
        return Err(Error::invalid_input(format!(
            "merge target must satisfy width = 2 x height, got {width}x{height}"
        )));
    }
    for face in faces {
        for &label in face.labels.data() {
            if label as usize > num_classes {
                return Err(Error::invalid_input(format!(
                    "face mask contains class id {label} but the table has {num_classes} classes"
                )));
            }
        }
    }
    let projectors: Vec<FaceProjector> = faces
        .iter()
        .map(|f| FaceProjector::new(f.spec))
        .collect();

    // Longitude terms depend only on the column and latitude terms only on
    // the row; caching them reproduces equirect_direction bit for bit (the
    // oracle tests pin that) while dropping the per-pixel trigonometry.
    let lon_trig: Vec<(f64, f64)> = (0..width)
        .map(|x| {
            let lon = (x as f64 / width as f64) * 2.0 * std::f64::consts::PI
                - std::f64::consts::PI;
            lon.sin_cos()
        })
        .collect();

    let mut out = Raster::filled(width, height, 0u8);
    out.rows_mut()
        .enumerate()
        .collect::<Vec<_>>()
        .into_par_iter()
        .for_each(|(y, row)| {
            let lat = (y as f64 / height as f64) * std::f64::consts::PI
                - std::f64::consts::PI / 2.0;
            let (sin_lat, cos_lat) = lat.sin_cos();
            let mut counts = vec![0u32; num_classes + 1];
            for (x, cell) in row.iter_mut().enumerate() {
                counts.fill(0);
                let (sin_lon, cos_lon) = lon_trig[x];
                let dir =
                    nalgebra::Vector3::new(cos_lat * sin_lon, sin_lat, cos_lat * cos_lon);
                let mut any = false;
                for (projector, face) in projectors.iter().zip(faces) {
                    if let Some(hit) = projector.project_direction(&dir) {
                        let (fx, fy) = projector.hit_pixel(hit);
                        counts[face.labels.get(fx, fy) as usize] += 1;
                        any = true;
                    }
                }
                if any {
                    *cell = vote_winner(&counts);
                }
            }
        });
    Equirect::new(frame_id, out)
}
