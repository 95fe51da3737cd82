//! PNG raster loading and saving.
//!
//! Color panoramas and face views are 8-bit RGB; label and suppression
//! masks are single-channel 8-bit where the pixel value is the class id
//! (or nonzero-means-suppress). Saves are atomic and byte-deterministic.

use std::io::Cursor;
use std::path::Path;

use image::{DynamicImage, ImageFormat};

use crate::error::{Error, Result};
use crate::io::write_atomic;
use crate::raster::{Pixel, Raster};

pub fn load_image(path: &Path) -> Result<Raster<Pixel>> {
    let img = image::open(path).map_err(|e| Error::image(path, e))?;
    let rgb = img.to_rgb8();
    let (w, h) = rgb.dimensions();
    let data = rgb.pixels().map(|p| [p[0], p[1], p[2]]).collect();
    Raster::from_vec(w, h, data)
}

pub fn save_image(path: &Path, raster: &Raster<Pixel>) -> Result<()> {
    let mut flat = Vec::with_capacity(raster.data().len() * 3);
    for p in raster.data() {
        flat.extend_from_slice(p);
    }
    let img = image::RgbImage::from_raw(raster.width(), raster.height(), flat)
        .expect("raster dimensions match buffer");
    encode_png(path, DynamicImage::ImageRgb8(img))
}

/// Loads a label/suppression mask. Single-channel PNGs read directly; RGB
/// files are accepted only when the channels agree on every pixel.
pub fn load_mask(path: &Path) -> Result<Raster<u8>> {
    let img = image::open(path).map_err(|e| Error::image(path, e))?;
    match img {
        DynamicImage::ImageLuma8(gray) => {
            let (w, h) = gray.dimensions();
            Raster::from_vec(w, h, gray.into_raw())
        }
        DynamicImage::ImageRgb8(rgb) => {
            let (w, h) = rgb.dimensions();
            let mut data = Vec::with_capacity((w * h) as usize);
            for p in rgb.pixels() {
                if p[0] != p[1] || p[1] != p[2] {
                    return Err(Error::validation(format!(
                        "{}: mask must be single-channel (found differing RGB values)",
                        path.display()
                    )));
                }
                data.push(p[0]);
            }
            Raster::from_vec(w, h, data)
        }
        other => {
            let gray = other.to_luma8();
            let (w, h) = gray.dimensions();
            Raster::from_vec(w, h, gray.into_raw())
        }
    }
}

pub fn save_mask(path: &Path, raster: &Raster<u8>) -> Result<()> {
    let img =
        image::GrayImage::from_raw(raster.width(), raster.height(), raster.data().to_vec())
            .expect("raster dimensions match buffer");
    encode_png(path, DynamicImage::ImageLuma8(img))
}

fn encode_png(path: &Path, img: DynamicImage) -> Result<()> {
    let mut bytes = Cursor::new(Vec::new());
    img.write_to(&mut bytes, ImageFormat::Png)
        .map_err(|e| Error::image(path, e))?;
    write_atomic(path, &bytes.into_inner())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mask_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("mask.png");
        let mut mask = Raster::filled(8, 4, 0u8);
        mask.set(3, 2, 9);
        mask.set(7, 0, 15);
        save_mask(&path, &mask).unwrap();
        assert_eq!(load_mask(&path).unwrap(), mask);
    }

    #[test]
    fn image_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("img.png");
        let mut img = Raster::filled(4, 2, [0u8, 0, 0]);
        img.set(1, 1, [10, 20, 30]);
        save_image(&path, &img).unwrap();
        assert_eq!(load_image(&path).unwrap(), img);
    }

    #[test]
    fn saves_are_byte_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.png");
        let b = dir.path().join("b.png");
        let mask = Raster::filled(16, 8, 5u8);
        save_mask(&a, &mask).unwrap();
        save_mask(&b, &mask).unwrap();
        assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
    }
}
