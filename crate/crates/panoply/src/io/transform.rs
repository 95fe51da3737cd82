//! Similarity transform record: scale, row-major rotation, translation, and
//! the RMS residual of the fit, one keyed line each.

use std::path::Path;

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::geometry::RotationMatrix;
use crate::io::{data_lines, read_text, write_atomic};
use crate::registration::{EstimatedSimilarity, SimilarityTransform};

pub fn write_transform(path: &Path, estimated: &EstimatedSimilarity) -> Result<()> {
    let t = &estimated.transform;
    let mut out = String::from("# panoply/transform v1\n");
    out.push_str(&format!("scale {}\n", t.scale));
    out.push_str("rotation");
    for v in t.rotation.row_major() {
        out.push_str(&format!(" {v}"));
    }
    out.push('\n');
    out.push_str(&format!(
        "translation {} {} {}\n",
        t.translation.x, t.translation.y, t.translation.z
    ));
    out.push_str(&format!("rms {}\n", estimated.rms_residual));
    write_atomic(path, out.as_bytes())
}

pub fn read_transform(path: &Path) -> Result<EstimatedSimilarity> {
    let text = read_text(path)?;
    let mut scale = None;
    let mut rotation = None;
    let mut translation = None;
    let mut rms = None;
    for (lineno, line) in data_lines(&text) {
        let tokens: Vec<&str> = line.split_ascii_whitespace().collect();
        let bad = |what: &str| Error::parse(path, lineno, format!("bad {what} line"));
        match tokens.split_first() {
            Some((&"scale", rest)) if rest.len() == 1 => {
                scale = Some(rest[0].parse::<f64>().map_err(|_| bad("scale"))?);
            }
            Some((&"rotation", rest)) if rest.len() == 9 => {
                let mut r = [0.0f64; 9];
                for (slot, token) in r.iter_mut().zip(rest) {
                    *slot = token.parse().map_err(|_| bad("rotation"))?;
                }
                rotation = Some(
                    RotationMatrix::from_row_major(&r)
                        .map_err(|e| Error::parse(path, lineno, e.to_string()))?,
                );
            }
            Some((&"translation", rest)) if rest.len() == 3 => {
                let mut t = [0.0f64; 3];
                for (slot, token) in t.iter_mut().zip(rest) {
                    *slot = token.parse().map_err(|_| bad("translation"))?;
                }
                translation = Some(Vector3::new(t[0], t[1], t[2]));
            }
            Some((&"rms", rest)) if rest.len() == 1 => {
                rms = Some(rest[0].parse::<f64>().map_err(|_| bad("rms"))?);
            }
            _ => return Err(Error::parse(path, lineno, format!("unknown line: {line}"))),
        }
    }
    let missing = |what: &str| Error::parse(path, 0, format!("missing {what} line"));
    let transform = SimilarityTransform::new(
        scale.ok_or_else(|| missing("scale"))?,
        rotation.ok_or_else(|| missing("rotation"))?,
        translation.ok_or_else(|| missing("translation"))?,
    )
    .map_err(|e| Error::parse(path, 0, e.to_string()))?;
    Ok(EstimatedSimilarity {
        transform,
        rms_residual: rms.ok_or_else(|| missing("rms"))?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transform_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("transform.txt");
        let estimated = EstimatedSimilarity {
            transform: SimilarityTransform {
                scale: 1.25,
                rotation: RotationMatrix::about_y(0.3),
                translation: Vector3::new(-1.0, 2.0, 0.5),
            },
            rms_residual: 0.0125,
        };
        write_transform(&path, &estimated).unwrap();
        assert_eq!(read_transform(&path).unwrap(), estimated);
    }

    #[test]
    fn missing_lines_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("transform.txt");
        std::fs::write(&path, "scale 1.0\n").unwrap();
        assert!(read_transform(&path).is_err());
    }
}
