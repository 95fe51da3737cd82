//! Conversion between equirectangular panoramas and rectilinear face views.
//!
//! A full-sphere panorama is split into 18 square views: three rings of
//! `nb_splits` (default 6) faces each, the rings tilted 30° up, 0°, and 30°
//! down. Each face is a 90° pinhole view (focal length = half the face
//! resolution), so adjacent faces of a 6-face ring overlap by 30° of yaw and
//! objects stay intact in at least one view.
//!
//! Conventions: the camera frame is x-right, y-down, z-forward. Equirect
//! row 0 is latitude −π/2 (straight up); longitude −π maps to column 0 and
//! wraps, latitude clamps.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::geometry::RotationMatrix;
use crate::raster::{Equirect, Pixel, Raster};

/// Tilt ring of a face view.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Ring {
    Horizontal,
    /// Tilted 30° upward (images the ceiling side).
    Top,
    /// Tilted 30° downward.
    Bottom,
}

impl Ring {
    pub const ALL: [Ring; 3] = [Ring::Horizontal, Ring::Top, Ring::Bottom];

    pub fn as_str(&self) -> &'static str {
        match self {
            Ring::Horizontal => "horizontal",
            Ring::Top => "top",
            Ring::Bottom => "bottom",
        }
    }

    pub fn parse(s: &str) -> Result<Ring> {
        match s {
            "horizontal" => Ok(Ring::Horizontal),
            "top" => Ok(Ring::Top),
            "bottom" => Ok(Ring::Bottom),
            other => Err(Error::invalid_input(format!("unknown ring '{other}'"))),
        }
    }

    /// Camera pitch for the ring; positive tilts the view upward.
    pub fn pitch(&self) -> f64 {
        match self {
            Ring::Horizontal => 0.0,
            Ring::Top => PI / 6.0,
            Ring::Bottom => -PI / 6.0,
        }
    }
}

impl std::fmt::Display for Ring {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One of the rectilinear views cut from a panorama.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FaceSpec {
    pub ring: Ring,
    pub index: u32,
    pub nb_splits: u32,
    /// Side length of the square face raster, pixels.
    pub resolution: u32,
}

impl FaceSpec {
    pub fn new(ring: Ring, index: u32, nb_splits: u32, resolution: u32) -> Result<Self> {
        if nb_splits == 0 {
            return Err(Error::invalid_input("nb_splits must be positive"));
        }
        if index >= nb_splits {
            return Err(Error::invalid_input(format!(
                "face index {index} out of range for {nb_splits} splits"
            )));
        }
        if resolution == 0 {
            return Err(Error::invalid_input("face resolution must be positive"));
        }
        Ok(FaceSpec {
            ring,
            index,
            nb_splits,
            resolution,
        })
    }

    /// Yaw of the face center: `(index / nb_splits) * 2π − π`.
    pub fn yaw(&self) -> f64 {
        (self.index as f64 / self.nb_splits as f64) * 2.0 * PI - PI
    }

    /// Focal length in pixels: half the face resolution (90° field of view).
    pub fn focal(&self) -> f64 {
        self.resolution as f64 / 2.0
    }

    /// All faces of a frame in (ring, index) order: 3 × nb_splits views.
    pub fn all_faces(nb_splits: u32, resolution: u32) -> Result<Vec<FaceSpec>> {
        let mut faces = Vec::with_capacity(3 * nb_splits as usize);
        for ring in Ring::ALL {
            for index in 0..nb_splits {
                faces.push(FaceSpec::new(ring, index, nb_splits, resolution)?);
            }
        }
        Ok(faces)
    }
}

/// Camera-to-world rotation of a face view: yaw about y composed with the
/// ring's pitch about x.
pub fn rotation_for_face(spec: &FaceSpec) -> RotationMatrix {
    RotationMatrix::about_y(spec.yaw()).compose(&RotationMatrix::about_x(spec.ring.pitch()))
}

/// Unit direction of an equirect pixel (longitude from u, latitude from v).
pub fn equirect_direction(u: f64, v: f64, width: u32, height: u32) -> Vector3<f64> {
    let lon = (u / width as f64) * 2.0 * PI - PI;
    let lat = (v / height as f64) * PI - PI / 2.0;
    let (sin_lon, cos_lon) = lon.sin_cos();
    let (sin_lat, cos_lat) = lat.sin_cos();
    Vector3::new(cos_lat * sin_lon, sin_lat, cos_lat * cos_lon)
}

/// Precomputed per-face mapping between face pixels and panorama directions.
#[derive(Debug, Clone)]
pub struct FaceProjector {
    spec: FaceSpec,
    rotation: Matrix3<f64>,
    inverse: Matrix3<f64>,
    focal: f64,
    half: f64,
}

impl FaceProjector {
    pub fn new(spec: FaceSpec) -> Self {
        let rotation = *rotation_for_face(&spec).matrix();
        FaceProjector {
            spec,
            rotation,
            inverse: rotation.transpose(),
            focal: spec.focal(),
            half: spec.resolution as f64 / 2.0,
        }
    }

    pub fn spec(&self) -> &FaceSpec {
        &self.spec
    }

    /// Equirect source coordinates sampled by face pixel (x, y).
    ///
    /// The returned u is not yet wrapped and v not yet clamped; samplers
    /// apply wrap-modulo-width and clamp-to-height.
    pub fn face_pixel_to_equirect(&self, x: u32, y: u32, width: u32, height: u32) -> (f64, f64) {
        let xn = (x as f64 - self.half) / self.focal;
        let yn = (y as f64 - self.half) / self.focal;
        let rotated = self.rotation * Vector3::new(xn, yn, 1.0);
        let dir = rotated.normalize();
        let lon = dir.x.atan2(dir.z);
        let lat = dir.y.asin();
        let u = (lon + PI) / (2.0 * PI) * width as f64;
        let v = (lat + PI / 2.0) / PI * height as f64;
        (u, v)
    }

    /// Continuous face coordinates hit by a panorama direction, or `None`
    /// when the direction lies outside the face frustum (non-positive
    /// forward component or |x/z| > 1 or |y/z| > 1).
    pub fn project_direction(&self, dir: &Vector3<f64>) -> Option<(f64, f64)> {
        let r = self.inverse * dir;
        if r.z <= 0.0 {
            return None;
        }
        let xn = r.x / r.z;
        let yn = r.y / r.z;
        if xn.abs() > 1.0 || yn.abs() > 1.0 {
            return None;
        }
        Some((self.focal * xn + self.half, self.focal * yn + self.half))
    }

    /// Face pixel indices for a frustum hit, rounding to the nearest pixel.
    pub fn hit_pixel(&self, hit: (f64, f64)) -> (u32, u32) {
        let max = self.spec.resolution - 1;
        let x = (hit.0.round() as i64).clamp(0, max as i64) as u32;
        let y = (hit.1.round() as i64).clamp(0, max as i64) as u32;
        (x, y)
    }
}

/// Continuous face coordinates under `spec` for equirect pixel (u, v), or
/// `None` when the pixel's direction misses the face frustum.
pub fn face_to_equirect_lookup(
    spec: &FaceSpec,
    u: u32,
    v: u32,
    width: u32,
    height: u32,
) -> Option<(f64, f64)> {
    let dir = equirect_direction(u as f64, v as f64, width, height);
    FaceProjector::new(*spec).project_direction(&dir)
}

/// Interpolation used when resampling a panorama into a face view.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sampling {
    /// For color images.
    Bilinear,
    /// For label masks: class ids are categorical and must never be blended.
    Nearest,
}

#[inline]
fn wrap_u(x: i64, width: u32) -> u32 {
    x.rem_euclid(width as i64) as u32
}

#[inline]
fn clamp_v(y: i64, height: u32) -> u32 {
    y.clamp(0, height as i64 - 1) as u32
}

fn sample_nearest<T: Copy>(src: &Raster<T>, u: f64, v: f64) -> T {
    let x = wrap_u(u.round() as i64, src.width());
    let y = clamp_v(v.round() as i64, src.height());
    src.get(x, y)
}

fn sample_bilinear(src: &Raster<Pixel>, u: f64, v: f64) -> Pixel {
    let x0 = u.floor();
    let y0 = v.floor();
    let fx = u - x0;
    let fy = v - y0;
    let x0i = x0 as i64;
    let y0i = y0 as i64;
    let xa = wrap_u(x0i, src.width());
    let xb = wrap_u(x0i + 1, src.width());
    let ya = clamp_v(y0i, src.height());
    let yb = clamp_v(y0i + 1, src.height());
    let p00 = src.get(xa, ya);
    let p10 = src.get(xb, ya);
    let p01 = src.get(xa, yb);
    let p11 = src.get(xb, yb);
    let mut out = [0u8; 3];
    for c in 0..3 {
        let top = p00[c] as f64 * (1.0 - fx) + p10[c] as f64 * fx;
        let bottom = p01[c] as f64 * (1.0 - fx) + p11[c] as f64 * fx;
        out[c] = (top * (1.0 - fy) + bottom * fy).round().clamp(0.0, 255.0) as u8;
    }
    out
}

/// Renders one rectilinear face view from an equirectangular color image.
pub fn render_face_image(
    src: &Equirect<Pixel>,
    spec: &FaceSpec,
    sampling: Sampling,
) -> Result<Raster<Pixel>> {
    let projector = FaceProjector::new(*spec);
    let res = spec.resolution;
    let (w, h) = (src.width(), src.height());
    let mut out = Raster::filled(res, res, [0u8; 3]);
    for y in 0..res {
        for x in 0..res {
            let (u, v) = projector.face_pixel_to_equirect(x, y, w, h);
            let value = match sampling {
                Sampling::Bilinear => sample_bilinear(src.raster(), u, v),
                Sampling::Nearest => sample_nearest(src.raster(), u, v),
            };
            out.set(x, y, value);
        }
    }
    Ok(out)
}

/// Renders one face view from an equirectangular label mask.
///
/// Always nearest-neighbor: interpolating class ids would invent labels.
pub fn render_face_mask(src: &Equirect<u8>, spec: &FaceSpec) -> Result<Raster<u8>> {
    let projector = FaceProjector::new(*spec);
    let res = spec.resolution;
    let (w, h) = (src.width(), src.height());
    let mut out = Raster::filled(res, res, 0u8);
    for y in 0..res {
        for x in 0..res {
            let (u, v) = projector.face_pixel_to_equirect(x, y, w, h);
            out.set(x, y, sample_nearest(src.raster(), u, v));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn spec(ring: Ring, index: u32) -> FaceSpec {
        FaceSpec::new(ring, index, 6, 512).unwrap()
    }

    #[test]
    fn yaw_formula() {
        assert_abs_diff_eq!(spec(Ring::Horizontal, 0).yaw(), -PI, epsilon = 1e-15);
        assert_abs_diff_eq!(spec(Ring::Horizontal, 3).yaw(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn front_horizontal_face_is_identity() {
        let r = rotation_for_face(&spec(Ring::Horizontal, 3));
        assert_abs_diff_eq!(
            (r.matrix() - Matrix3::identity()).amax(),
            0.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn top_front_face_is_pure_x_rotation() {
        // Independent reference: axis-angle construction about x.
        let reference = RotationMatrix::from_axis_angle(Vector3::x(), PI / 6.0);
        let r = rotation_for_face(&spec(Ring::Top, 3));
        assert_abs_diff_eq!(
            (r.matrix() - reference.matrix()).amax(),
            0.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(FaceSpec::new(Ring::Top, 6, 6, 512).is_err());
        assert!(FaceSpec::new(Ring::Top, 0, 0, 512).is_err());
        assert!(FaceSpec::new(Ring::Top, 0, 6, 0).is_err());
    }

    #[test]
    fn eighteen_faces_per_frame() {
        let per_frame = FaceSpec::all_faces(6, 64).unwrap().len();
        assert_eq!(per_frame, 18);
        // A ~4-minute capture at 3 fps: 770 frames -> 13,860 face views.
        assert_eq!(770 * per_frame, 13_860);
        assert_eq!(830 * per_frame, 14_940);
    }

    #[test]
    fn face_center_samples_equirect_center() {
        let s = spec(Ring::Horizontal, 3);
        let projector = FaceProjector::new(s);
        let (u, v) = projector.face_pixel_to_equirect(256, 256, 2048, 1024);
        assert_abs_diff_eq!(u, 1024.0, epsilon = 1e-9);
        assert_abs_diff_eq!(v, 512.0, epsilon = 1e-9);
    }

    #[test]
    fn equirect_center_hits_face_center() {
        let s = spec(Ring::Horizontal, 3);
        let hit = face_to_equirect_lookup(&s, 1024, 512, 2048, 1024).unwrap();
        assert_abs_diff_eq!(hit.0, 256.0, epsilon = 1e-9);
        assert_abs_diff_eq!(hit.1, 256.0, epsilon = 1e-9);
    }

    #[test]
    fn ray_behind_face_misses() {
        // Longitude π is directly behind the front face.
        let s = spec(Ring::Horizontal, 3);
        assert!(face_to_equirect_lookup(&s, 0, 512, 2048, 1024).is_none());
    }

    #[test]
    fn ceiling_point_lands_in_top_ring_only() {
        // A point two meters above a spot one meter ahead of the camera:
        // elevation ≈ 63.4°, outside every horizontal/bottom frustum.
        let dir = Vector3::new(0.0, -2.0, 1.0).normalize();
        let mut top_hits = 0;
        for face in FaceSpec::all_faces(6, 512).unwrap() {
            let hit = FaceProjector::new(face).project_direction(&dir);
            match face.ring {
                Ring::Top => top_hits += usize::from(hit.is_some()),
                _ => assert!(hit.is_none(), "unexpected hit in {:?}", face.ring),
            }
        }
        assert!(top_hits >= 1);
    }

    #[test]
    fn forward_then_inverse_is_identity_within_a_pixel() {
        // Face pixel -> equirect coords -> back through the frustum lookup:
        // identity to within a pixel, for every pixel of every face. Row
        // and column 0 sit exactly on the |x/z| = 1 frustum boundary (the
        // rotate/unrotate round trip may land one ulp outside), so the
        // sweep starts at 1.
        let (w, h) = (1024u32, 512u32);
        let res = 128u32;
        for s in FaceSpec::all_faces(6, res).unwrap() {
            let projector = FaceProjector::new(s);
            for y in 1..res {
                for x in 1..res {
                    let (u, v) = projector.face_pixel_to_equirect(x, y, w, h);
                    let dir = equirect_direction(u, v, w, h);
                    let (fx, fy) = projector.project_direction(&dir).expect("in frustum");
                    assert!((fx - x as f64).abs() <= 1.0, "{s:?} ({x},{y}) -> {fx}");
                    assert!((fy - y as f64).abs() <= 1.0, "{s:?} ({x},{y}) -> {fy}");
                }
            }
        }
    }

    #[test]
    fn equirect_pixel_round_trip_in_equatorial_band() {
        // Equirect pixel -> face pixel -> sampled equirect coords: identity
        // within a pixel wherever the angular sampling densities match
        // (the ±45° band; longitude compression near the poles makes pixel
        // distances there meaningless).
        let (w, h) = (1024u32, 512u32);
        let faces: Vec<FaceProjector> = FaceSpec::all_faces(6, 512)
            .unwrap()
            .into_iter()
            .map(FaceProjector::new)
            .collect();
        for v in (h / 4..3 * h / 4).step_by(7) {
            for u in (0..w).step_by(11) {
                let dir = equirect_direction(u as f64, v as f64, w, h);
                for projector in &faces {
                    if let Some(hit) = projector.project_direction(&dir) {
                        let (fx, fy) = projector.hit_pixel(hit);
                        let (u2, v2) = projector.face_pixel_to_equirect(fx, fy, w, h);
                        let mut du = (u2 - u as f64).abs();
                        du = du.min(w as f64 - du); // longitude wraps
                        assert!(du <= 1.0, "u {u} -> {u2}");
                        assert!((v2 - v as f64).abs() <= 1.0, "v {v} -> {v2}");
                    }
                }
            }
        }
    }

    #[test]
    fn horizontal_overlap_is_thirty_degrees() {
        // Sweep the equator in longitude; each direction must land in one or
        // two horizontal faces, and the two-face arcs must total 6 × 30°.
        let faces: Vec<FaceProjector> = (0..6)
            .map(|i| FaceProjector::new(spec(Ring::Horizontal, i)))
            .collect();
        let steps = 36_000;
        let mut double = 0usize;
        for k in 0..steps {
            let lon = (k as f64 / steps as f64) * 2.0 * PI - PI;
            let dir = Vector3::new(lon.sin(), 0.0, lon.cos());
            let hits = faces
                .iter()
                .filter(|f| f.project_direction(&dir).is_some())
                .count();
            assert!(
                (1..=2).contains(&hits),
                "longitude {lon} hit {hits} horizontal faces"
            );
            double += usize::from(hits == 2);
        }
        let overlap_deg = 360.0 * double as f64 / steps as f64;
        assert!(
            (overlap_deg - 180.0).abs() < 0.5,
            "total overlap {overlap_deg}° (expected 6 seams × 30°)"
        );
    }

    #[test]
    fn uniform_panorama_renders_uniform_face() {
        let src = Equirect::new(0, Raster::filled(256, 128, [9u8, 40, 200])).unwrap();
        let face = render_face_image(&src, &spec(Ring::Bottom, 2), Sampling::Bilinear).unwrap();
        assert!(face.data().iter().all(|p| *p == [9, 40, 200]));
    }

    #[test]
    fn painted_disk_survives_face_round_trip() {
        // Brute-force per-pixel ray check: every equirect pixel inside the
        // disk that any face covers must read back class 7 from that face.
        let (w, h) = (512u32, 256u32);
        let (cx, cy, radius) = (300i64, 128i64, 40i64);
        let mut mask = Raster::filled(w, h, 0u8);
        for y in 0..h as i64 {
            for x in 0..w as i64 {
                if (x - cx).pow(2) + (y - cy).pow(2) <= radius * radius {
                    mask.set(x as u32, y as u32, 7);
                }
            }
        }
        let src = Equirect::new(0, mask).unwrap();
        let faces: Vec<(FaceProjector, Raster<u8>)> = FaceSpec::all_faces(6, 256)
            .unwrap()
            .into_iter()
            .map(|s| {
                let raster = render_face_mask(&src, &s).unwrap();
                (FaceProjector::new(s), raster)
            })
            .collect();

        let mut checked = 0usize;
        let mut agreed = 0usize;
        for y in 0..h as i64 {
            for x in 0..w as i64 {
                // Interior pixels only; the rim is quantization territory.
                if (x - cx).pow(2) + (y - cy).pow(2) > (radius - 2).pow(2) {
                    continue;
                }
                let dir = equirect_direction(x as f64, y as f64, w, h);
                for (projector, raster) in &faces {
                    if let Some(hit) = projector.project_direction(&dir) {
                        let (fx, fy) = projector.hit_pixel(hit);
                        checked += 1;
                        agreed += usize::from(raster.get(fx, fy) == 7);
                    }
                }
            }
        }
        assert!(checked > 0);
        assert_eq!(agreed, checked, "{agreed}/{checked} face reads agreed");
    }

    proptest! {
        #[test]
        fn rotations_are_always_proper(
            ring_idx in 0usize..3,
            index in 0u32..6,
            nb_splits in 1u32..12,
        ) {
            let index = index % nb_splits;
            let s = FaceSpec::new(Ring::ALL[ring_idx], index, nb_splits, 64).unwrap();
            let r = rotation_for_face(&s);
            prop_assert!(RotationMatrix::from_matrix(*r.matrix()).is_ok());
        }

        #[test]
        fn nearest_face_labels_are_subset_of_source(
            labels in proptest::collection::vec(0u8..5, 32 * 16),
            ring_idx in 0usize..3,
            index in 0u32..6,
        ) {
            let raster = Raster::from_vec(32, 16, labels.clone()).unwrap();
            let src = Equirect::new(0, raster).unwrap();
            let s = FaceSpec::new(Ring::ALL[ring_idx], index, 6, 32).unwrap();
            let face = render_face_mask(&src, &s).unwrap();
            for value in face.data() {
                prop_assert!(labels.contains(value));
            }
        }
    }
}
