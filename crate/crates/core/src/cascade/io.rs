//! CSV slices and JSON manifests for cascade runs.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use super::{CascadeOptions, CascadeResult, CascadeWeights, GridFunction, GridSpec};
use crate::error::Result;

/// Writes `x,y,value` rows, one per node, values at 17 significant digits.
pub fn write_slice_csv<W: Write>(f: &GridFunction, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x", "y", "value"])?;
    let g = f.grid;
    for i in 0..g.nx {
        for j in 0..g.ny {
            w.write_record([
                format!("{:.16e}", g.x(i)),
                format!("{:.16e}", g.y(j)),
                format!("{:.16e}", f.at(i, j)),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_slice_csv_file(f: &GridFunction, path: &Path) -> Result<()> {
    write_slice_csv(f, std::fs::File::create(path)?)
}

/// Reads a file written by [`write_slice_csv`] back onto `grid`.
pub fn read_slice_csv(path: &Path, grid: GridSpec) -> Result<GridFunction> {
    let mut r = csv::Reader::from_path(path)?;
    let mut values = Vec::with_capacity(grid.len());
    for rec in r.records() {
        let rec = rec?;
        let v: f64 = rec
            .get(2)
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| crate::error::Error::InvalidParameter("malformed slice row".into()))?;
        values.push(v);
    }
    if values.len() != grid.len() {
        return Err(crate::error::Error::GridMismatch(format!(
            "expected {} rows, read {}",
            grid.len(),
            values.len()
        )));
    }
    Ok(GridFunction { grid, values })
}

/// Run metadata without the grids themselves.
#[derive(Debug, Clone, Serialize)]
pub struct CascadeManifest {
    pub grid: GridSpec,
    pub nt: usize,
    pub dt: f64,
    pub horizon: f64,
    pub depth: usize,
    pub weights: CascadeWeights,
    pub options: CascadeOptions,
    pub times: Vec<f64>,
    pub level_norms: Vec<f64>,
}

impl From<&CascadeResult> for CascadeManifest {
    fn from(r: &CascadeResult) -> Self {
        Self {
            grid: r.grid,
            nt: r.nt,
            dt: r.dt,
            horizon: r.horizon,
            depth: r.depth(),
            weights: r.weights,
            options: r.options,
            times: r.times.clone(),
            level_norms: r.level_norms.clone(),
        }
    }
}

/// Writes `manifest.json` plus `level{n}_t{k}.csv` for every retained slice.
pub fn write_cascade_dir(r: &CascadeResult, dir: &Path) -> Result<Vec<std::path::PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let manifest = dir.join("cascade.json");
    serde_json::to_writer_pretty(std::fs::File::create(&manifest)?, &CascadeManifest::from(r))?;
    written.push(manifest);
    for (n, slices) in r.levels.iter().enumerate() {
        for (k, s) in slices.iter().enumerate() {
            let p = dir.join(format!("level{n}_t{k}.csv"));
            write_slice_csv_file(s, &p)?;
            written.push(p);
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slice_round_trips_bit_exactly() {
        let g = GridSpec::square(7, 1.5);
        let f = GridFunction::from_fn(g, |x, y| (x * 1.3).sin() / 3.0 + y.exp());
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.csv");
        write_slice_csv_file(&f, &p).unwrap();
        let back = read_slice_csv(&p, g).unwrap();
        assert_eq!(back, f);
    }
}
