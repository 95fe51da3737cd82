//! Split an equirectangular panorama into its 18 rectilinear face views.
//!
//! Builds a synthetic panorama (sky/floor gradient with a few wall stripes),
//! renders every face with bilinear sampling, and writes the PNGs using the
//! `<frame>_<ring>_<index>.png` naming contract.
//!
//! ```bash
//! cargo run --example convert_panorama
//! ```

use panoply::io::manifest::face_file_name;
use panoply::panorama::{render_face_image, FaceSpec, Sampling};
use panoply::raster::{Equirect, Raster};

fn main() -> panoply::Result<()> {
    let (width, height) = (1024u32, 512u32);
    let mut image = Raster::filled(width, height, [0u8; 3]);
    for y in 0..height {
        for x in 0..width {
            // Dark floor, light ceiling, and six vertical wall stripes.
            let vertical = (255 - y * 255 / height) as u8;
            let stripe = if (x / (width / 6)) % 2 == 0 { 40 } else { 0 };
            image.set(x, y, [vertical, 90 + stripe, (x * 255 / width) as u8]);
        }
    }
    let panorama = Equirect::new(0, image)?;

    let out = std::env::temp_dir().join("panoply_convert_panorama");
    std::fs::create_dir_all(&out).expect("create output dir");

    let faces = FaceSpec::all_faces(6, 256)?;
    println!("splitting a {width}x{height} panorama into {} views:", faces.len());
    for spec in &faces {
        let raster = render_face_image(&panorama, spec, Sampling::Bilinear)?;
        let name = face_file_name(panorama.frame_id, spec.ring, spec.index);
        panoply::io::masks::save_image(&out.join(&name), &raster)?;
        println!(
            "  {name:<24} yaw {:>7.1}°  pitch {:>5.1}°",
            spec.yaw().to_degrees(),
            spec.ring.pitch().to_degrees()
        );
    }
    println!("face images written to {}", out.display());
    Ok(())
}
