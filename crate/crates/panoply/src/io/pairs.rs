//! Point-pair file for registration: one `sx sy sz tx ty tz` line per pair,
//! source in the capture frame, target in the model frame. Pairs are picked
//! in any external viewer.

use std::path::Path;

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::io::{data_lines, read_text, write_atomic};
use crate::registration::PointPair;

pub fn read_pairs(path: &Path) -> Result<Vec<PointPair>> {
    let text = read_text(path)?;
    let mut pairs = Vec::new();
    for (lineno, line) in data_lines(&text) {
        let tokens: Vec<&str> = line.split_ascii_whitespace().collect();
        if tokens.len() != 6 {
            return Err(Error::parse(
                path,
                lineno,
                format!("expected 6 fields (sx sy sz tx ty tz), got {}", tokens.len()),
            ));
        }
        let mut reals = [0.0f64; 6];
        for (slot, token) in reals.iter_mut().zip(&tokens) {
            *slot = token
                .parse()
                .map_err(|_| Error::parse(path, lineno, format!("bad number '{token}'")))?;
        }
        pairs.push(PointPair {
            source: Vector3::new(reals[0], reals[1], reals[2]),
            target: Vector3::new(reals[3], reals[4], reals[5]),
        });
    }
    Ok(pairs)
}

pub fn write_pairs(path: &Path, pairs: &[PointPair]) -> Result<()> {
    let mut out = String::from("# panoply/pairs v1\n# sx sy sz tx ty tz\n");
    for p in pairs {
        out.push_str(&format!(
            "{} {} {} {} {} {}\n",
            p.source.x, p.source.y, p.source.z, p.target.x, p.target.y, p.target.z
        ));
    }
    write_atomic(path, out.as_bytes())
}
