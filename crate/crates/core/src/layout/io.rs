//! PGM (P5) images with a JSON sidecar describing the layout.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{BarcodeSpec, GridLayout, ModuleGrid, Role};
use crate::error::{invalid_input, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridMetadata {
    pub spec: BarcodeSpec,
    pub side: usize,
    pub layout_seed: u64,
    /// Role mask, row-major, run-length encoded.
    pub roles_rle: Vec<(Role, usize)>,
}

impl GridMetadata {
    pub fn new(spec: &BarcodeSpec, grid: &ModuleGrid, layout_seed: u64) -> Self {
        let mut rle: Vec<(Role, usize)> = Vec::new();
        for &r in &grid.roles {
            match rle.last_mut() {
                Some((last, n)) if *last == r => *n += 1,
                _ => rle.push((r, 1)),
            }
        }
        Self { spec: spec.clone(), side: grid.side, layout_seed, roles_rle: rle }
    }

    pub fn roles(&self) -> Vec<Role> {
        self.roles_rle.iter().flat_map(|&(r, n)| std::iter::repeat_n(r, n)).collect()
    }
}

pub fn sidecar_path(image: &Path) -> PathBuf {
    image.with_extension("json")
}

/// Write the grid as an 8-bit P5 image, one pixel per module.
pub fn write_pgm(grid: &ModuleGrid, path: &Path) -> Result<()> {
    let mut buf = format!("P5\n{} {}\n255\n", grid.side, grid.side).into_bytes();
    buf.extend(grid.intensities.iter().map(|&v| v.round().clamp(0.0, 255.0) as u8));
    fs::write(path, buf)?;
    Ok(())
}

/// Read a P5 image, returning `(width, height, pixels)`.
pub fn read_pgm(path: &Path) -> Result<(usize, usize, Vec<u8>)> {
    let data = fs::read(path)?;
    let mut fields = Vec::new();
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < data.len() && data[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if pos < data.len() && data[pos] == b'#' {
            while pos < data.len() && data[pos] != b'\n' {
                pos += 1;
            }
            continue;
        }
        let start = pos;
        while pos < data.len() && !data[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(invalid_input("truncated PGM header"));
        }
        fields.push(String::from_utf8_lossy(&data[start..pos]).into_owned());
    }
    pos += 1;
    if fields[0] != "P5" {
        return Err(invalid_input(format!("not a binary PGM (magic {})", fields[0])));
    }
    let parse = |s: &str| s.parse::<usize>().map_err(|_| invalid_input(format!("bad PGM field {s}")));
    let (w, h, maxval) = (parse(&fields[1])?, parse(&fields[2])?, parse(&fields[3])?);
    if maxval != 255 {
        return Err(invalid_input("only 8-bit PGM supported"));
    }
    let pixels = data.get(pos..pos + w * h).ok_or_else(|| invalid_input("truncated PGM data"))?;
    Ok((w, h, pixels.to_vec()))
}

/// Write image plus sidecar metadata.
pub fn write_grid(grid: &ModuleGrid, spec: &BarcodeSpec, layout_seed: u64, path: &Path) -> Result<()> {
    let meta = GridMetadata::new(spec, grid, layout_seed);
    write_pgm(grid, path)?;
    fs::write(sidecar_path(path), serde_json::to_string_pretty(&meta)?)?;
    Ok(())
}

/// Read image plus sidecar; the role mask is checked against the stored `BarcodeSpec`.
pub fn read_grid(path: &Path) -> Result<(ModuleGrid, GridMetadata)> {
    let meta: GridMetadata = serde_json::from_str(&fs::read_to_string(sidecar_path(path))?)?;
    let (w, h, pixels) = read_pgm(path)?;
    if w != meta.side || h != meta.side {
        return Err(invalid_input(format!("image is {w}x{h}, metadata says {}", meta.side)));
    }
    let roles = meta.roles();
    GridLayout::from_roles(&meta.spec, roles.clone())?;
    let grid = ModuleGrid { side: w, intensities: pixels.iter().map(|&p| p as f64).collect(), roles };
    Ok((grid, meta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layout::{assemble_grid, SymbolStream};

    #[test]
    fn pgm_roundtrip() {
        let spec = BarcodeSpec::default();
        let s = SymbolStream { symbols: (0..2040).map(|i| (i % 4) as u8).collect() };
        let g = assemble_grid(&s, &spec, 3).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("code.pgm");
        write_grid(&g, &spec, 3, &p).unwrap();
        let raw = fs::read(&p).unwrap();
        assert!(raw.starts_with(b"P5\n47 47\n255\n"));
        let (back, meta) = read_grid(&p).unwrap();
        assert_eq!(back, g);
        assert_eq!(meta.layout_seed, 3);
    }
}
