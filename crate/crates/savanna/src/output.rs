//! Plain-file outputs: CSV tables, portable graymaps/bitmaps, and run
//! manifests. Formats are documented in FORMATS.md at the repository root.

use crate::error::{Error, Result};
use crate::grid::ScalarField;
use crate::lattice::Snapshot;
use std::io::Write;
use std::path::Path;

/// Line-by-line CSV writer with stable float formatting (Rust's shortest
/// round-trip representation, so reruns are byte-identical).
pub struct Csv {
    out: std::io::BufWriter<std::fs::File>,
}

impl Csv {
    pub fn create(path: &Path, header: &str) -> Result<Self> {
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "{header}")?;
        Ok(Self { out })
    }

    pub fn row(&mut self, fields: &[String]) -> Result<()> {
        writeln!(self.out, "{}", fields.join(","))?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.out.flush()?;
        Ok(())
    }
}

/// Format a float with the shortest representation that round-trips.
pub fn num(v: f64) -> String {
    format!("{v}")
}

/// Binary portable graymap (P5), values scaled from [0,1] to 0..=255.
pub fn write_pgm(path: &Path, field: &ScalarField) -> Result<()> {
    write_pgm_with_overlay(path, field, &[])
}

/// P5 graymap with marked cells: the field is scaled to 0..=220 and the
/// overlay cells are painted 255.
pub fn write_pgm_with_overlay(
    path: &Path,
    field: &ScalarField,
    overlay: &[(usize, usize)],
) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let n = field.cells_per_side();
    let scale = if overlay.is_empty() { 255.0 } else { 220.0 };
    let mut bytes = Vec::with_capacity(n * n);
    // Rows are written top to bottom; flip so y grows upward in the image.
    for j in (0..n).rev() {
        for i in 0..n {
            bytes.push((field.get(i, j).clamp(0.0, 1.0) * scale).round() as u8);
        }
    }
    for &(i, j) in overlay {
        if i < n && j < n {
            bytes[(n - 1 - j) * n + i] = 255;
        }
    }
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    write!(out, "P5\n{n} {n}\n255\n")?;
    out.write_all(&bytes)?;
    out.flush()?;
    Ok(())
}

/// Binary portable bitmap (P4), one bit per site, 1 = occupied.
pub fn write_pbm(path: &Path, snap: &Snapshot) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let n = snap.sites_per_side();
    let row_bytes = n.div_ceil(8);
    let mut bytes = vec![0u8; row_bytes * n];
    for j in (0..n).rev() {
        let row = n - 1 - j;
        for i in 0..n {
            if snap.get(i, j) {
                // PBM packs the leftmost pixel into the most significant bit.
                bytes[row * row_bytes + i / 8] |= 0x80 >> (i % 8);
            }
        }
    }
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    write!(out, "P4\n{n} {n}\n")?;
    out.write_all(&bytes)?;
    out.flush()?;
    Ok(())
}

/// Read a P1 (ascii) or P4 (binary) portable bitmap; returns width,
/// height, and row-major bits with the image's bottom row first (matching
/// the writer's orientation).
pub fn read_pbm(path: &Path) -> Result<(usize, usize, Vec<bool>)> {
    let data = std::fs::read(path)?;
    let header_err = || Error::invalid(format!("{}: not a P1/P4 bitmap", path.display()));
    let mut pos = 0usize;
    let mut token = || -> Result<String> {
        // Skip whitespace and # comments.
        loop {
            while pos < data.len() && data[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < data.len() && data[pos] == b'#' {
                while pos < data.len() && data[pos] != b'\n' {
                    pos += 1;
                }
            } else {
                break;
            }
        }
        let start = pos;
        while pos < data.len() && !data[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(Error::invalid(format!("{}: truncated header", path.display())));
        }
        Ok(String::from_utf8_lossy(&data[start..pos]).into_owned())
    };
    let magic = token()?;
    let w: usize = token()?.parse().map_err(|_| header_err())?;
    let h: usize = token()?.parse().map_err(|_| header_err())?;
    let mut rows: Vec<Vec<bool>> = Vec::with_capacity(h);
    match magic.as_str() {
        "P1" => {
            let mut bits = Vec::with_capacity(w * h);
            for &byte in &data[pos..] {
                match byte {
                    b'0' => bits.push(false),
                    b'1' => bits.push(true),
                    _ => {}
                }
            }
            if bits.len() < w * h {
                return Err(header_err());
            }
            for r in 0..h {
                rows.push(bits[r * w..(r + 1) * w].to_vec());
            }
        }
        "P4" => {
            pos += 1; // single whitespace after the header
            let row_bytes = w.div_ceil(8);
            if data.len() < pos + row_bytes * h {
                return Err(header_err());
            }
            for r in 0..h {
                let mut row = Vec::with_capacity(w);
                for i in 0..w {
                    let byte = data[pos + r * row_bytes + i / 8];
                    row.push(byte & (0x80 >> (i % 8)) != 0);
                }
                rows.push(row);
            }
        }
        _ => return Err(header_err()),
    }
    // Undo the top-to-bottom image order.
    let mut bits = Vec::with_capacity(w * h);
    for row in rows.into_iter().rev() {
        bits.extend(row);
    }
    Ok((w, h, bits))
}

/// Run manifest: everything needed to reproduce the outputs byte for byte.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct Manifest {
    pub command: String,
    pub seed: u64,
    pub config: serde_json::Value,
    pub version: String,
    pub wall_seconds: f64,
    pub outputs: Vec<String>,
}

pub fn write_manifest(dir: &Path, manifest: &Manifest) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let text = serde_json::to_string_pretty(manifest)
        .map_err(|e| Error::runtime(format!("manifest serialization: {e}")))?;
    std::fs::write(dir.join("manifest.json"), text + "\n")?;
    Ok(())
}

/// Parse a config file that is either a bare config object or a manifest
/// wrapper; returns the config value and the manifest seed when present.
pub fn read_config_or_manifest(path: &Path) -> Result<(serde_json::Value, Option<u64>)> {
    let text = std::fs::read_to_string(path)?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| Error::invalid(format!("{}: {e}", path.display())))?;
    if let (Some(config), seed) = (value.get("config"), value.get("seed")) {
        let seed = seed.and_then(|s| s.as_u64());
        return Ok((config.clone(), seed));
    }
    Ok((value, None))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ide::Coefficients;
    use crate::lattice::{InitialCondition, LatticeState};
    use crate::rates::BernsteinRate;

    #[test]
    fn pbm_round_trip() {
        let g = BernsteinRate::new(1.0, vec![0.0, 1.0]).unwrap();
        let h = BernsteinRate::new(1.0, vec![1.0]).unwrap();
        let st = LatticeState::new(
            8,
            2,
            g,
            h,
            &Coefficients::Constant { a: 1.0, b: 1.0 },
            &InitialCondition::Bernoulli(0.4),
            9,
        )
        .unwrap();
        let snap = st.snapshot();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("snap.pbm");
        write_pbm(&path, &snap).unwrap();
        let (w, h2, bits) = read_pbm(&path).unwrap();
        assert_eq!((w, h2), (16, 16));
        for j in 0..16 {
            for i in 0..16 {
                assert_eq!(bits[j * 16 + i], snap.get(i, j), "mismatch at ({i},{j})");
            }
        }
    }

    #[test]
    fn pgm_has_expected_header_and_size() {
        let f = ScalarField::constant(2.0, 0.25, 0.5).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("field.pgm");
        write_pgm(&path, &f).unwrap();
        let data = std::fs::read(&path).unwrap();
        assert!(data.starts_with(b"P5\n8 8\n255\n"));
        assert_eq!(data.len(), b"P5\n8 8\n255\n".len() + 64);
        assert_eq!(data[b"P5\n8 8\n255\n".len()], 128);
    }

    #[test]
    fn manifest_round_trip_exposes_config() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = Manifest {
            command: "simulate".into(),
            seed: 7,
            config: serde_json::json!({"t_end": 2.0}),
            version: "0.0.0".into(),
            wall_seconds: 1.5,
            outputs: vec!["density.csv".into()],
        };
        write_manifest(dir.path(), &manifest).unwrap();
        let (config, seed) =
            read_config_or_manifest(&dir.path().join("manifest.json")).unwrap();
        assert_eq!(seed, Some(7));
        assert_eq!(config["t_end"], 2.0);
    }
}
