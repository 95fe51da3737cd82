//! Round-trip a label mask through the face views and the voting merge.
//!
//! Paints class disks on an equirectangular mask, renders the 18 face masks
//! with nearest sampling, merges them back by per-pixel voting, and reports
//! how faithfully the panorama is reconstructed.
//!
//! ```bash
//! cargo run --example merge_face_masks
//! ```

use panoply::classes::ClassTable;
use panoply::fusion::{merge_face_masks, FaceMask};
use panoply::panorama::{render_face_mask, FaceSpec};
use panoply::raster::{Equirect, Raster};

fn paint_disk(mask: &mut Raster<u8>, cx: i64, cy: i64, radius: i64, class: u8) {
    let (w, h) = (mask.width() as i64, mask.height() as i64);
    for dy in -radius..=radius {
        for dx in -radius..=radius {
            if dx * dx + dy * dy <= radius * radius {
                let x = (cx + dx).rem_euclid(w) as u32;
                let y = (cy + dy).clamp(0, h - 1) as u32;
                mask.set(x, y, class);
            }
        }
    }
}

fn main() -> panoply::Result<()> {
    let table = ClassTable::default();
    let (width, height) = (1024u32, 512u32);
    let mut source = Raster::filled(width, height, 0u8);
    // A sprinkler overhead, an extinguisher at eye level, an exit sign high
    // on the wall, and a call point across the seam.
    paint_disk(&mut source, 500, 90, 30, 9);
    paint_disk(&mut source, 300, 300, 40, 1);
    paint_disk(&mut source, 700, 180, 25, 2);
    paint_disk(&mut source, 5, 260, 35, 10);
    let panorama = Equirect::new(0, source)?;

    let faces: Vec<FaceMask> = FaceSpec::all_faces(6, 512)?
        .into_iter()
        .map(|spec| {
            let labels = render_face_mask(&panorama, &spec)?;
            FaceMask::new(spec, labels)
        })
        .collect::<panoply::Result<_>>()?;

    let merged = merge_face_masks(0, &faces, table.num_classes(), width, height)?;

    let mut per_class = vec![[0usize; 2]; table.num_classes() + 1];
    let mut agreements = 0usize;
    for (a, b) in panorama.raster().data().iter().zip(merged.raster().data()) {
        per_class[*a as usize][0] += 1;
        per_class[*b as usize][1] += 1;
        agreements += usize::from(a == b);
    }
    let total = (width * height) as usize;
    println!(
        "merged 18 face masks back into the panorama: {}/{} pixels agree ({:.3}%)",
        agreements,
        total,
        100.0 * agreements as f64 / total as f64
    );
    println!("{:<24} {:>8} {:>8}", "class", "source", "merged");
    for (id, counts) in per_class.iter().enumerate() {
        if counts[0] > 0 || counts[1] > 0 {
            println!("{:<24} {:>8} {:>8}", table.name(id as u8), counts[0], counts[1]);
        }
    }
    Ok(())
}
