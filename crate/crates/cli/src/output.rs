//! Run artifacts and data input under an exclusively locked output directory.

use crate::error::{CliError, CliResult};
use biharm::fractional::TimeSignal;
use biharm::ibvp::BoundaryData;
use biharm::propagator::{Field, GridSpec, SpaceSignal};
use biharm::C64;
use serde::Serialize;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

pub const LOCK_NAME: &str = ".biharm.lock";

/// An output directory held exclusively for the lifetime of the value.
#[derive(Debug)]
pub struct OutputDir {
    path: PathBuf,
    lock: PathBuf,
}

impl OutputDir {
    /// Creates the directory if needed and takes its lockfile; fails if another run holds it.
    pub fn acquire(path: &Path) -> CliResult<Self> {
        fs::create_dir_all(path).map_err(|e| CliError::io(path, e))?;
        let lock = path.join(LOCK_NAME);
        match OpenOptions::new().write(true).create_new(true).open(&lock) {
            Ok(mut f) => {
                writeln!(f, "{}", std::process::id()).map_err(|e| CliError::io(&lock, e))?;
                Ok(Self { path: path.to_path_buf(), lock })
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => Err(CliError::Locked(path.to_path_buf())),
            Err(e) => Err(CliError::io(&lock, e)),
        }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn file(&self, name: &str) -> PathBuf {
        self.path.join(name)
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> CliResult<PathBuf> {
        let p = self.file(name);
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        fs::write(&p, text).map_err(|e| CliError::io(&p, e))?;
        Ok(p)
    }

    /// Removes a file left by an earlier run, if present.
    pub fn remove_stale(&self, name: &str) -> CliResult<()> {
        let p = self.file(name);
        match fs::remove_file(&p) {
            Ok(()) => Ok(()),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(()),
            Err(e) => Err(CliError::io(&p, e)),
        }
    }
}

impl Drop for OutputDir {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.lock);
    }
}

fn record(w: &mut csv::Writer<fs::File>, t: f64, x: f64, v: C64) -> CliResult<()> {
    w.write_record([t.to_string(), x.to_string(), v.re.to_string(), v.im.to_string()])?;
    Ok(())
}

/// The field on x ≥ 0 as rows (t, x, re, im).
pub fn write_field_csv(path: &Path, u: &Field) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["t", "x", "re", "im"])?;
    let g = u.grid;
    for n in 0..g.nt {
        for j in g.origin()..g.nx {
            record(&mut w, g.t(n), g.x(j), u.get(n, j))?;
        }
    }
    w.flush().map_err(|e| CliError::io(path, e))?;
    Ok(())
}

/// A time series at position x as rows (t, x, re, im).
pub fn write_trace_csv(path: &Path, sig: &TimeSignal, x: f64) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["t", "x", "re", "im"])?;
    for (n, v) in sig.samples.iter().enumerate() {
        record(&mut w, sig.time(n), x, *v)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))?;
    Ok(())
}

fn read_rows(path: &Path) -> CliResult<Vec<(f64, f64, C64)>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let headers = r.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["t", "x", "re", "im"] {
        return Err(CliError::Config(format!("{}: expected columns t, x, re, im", path.display())));
    }
    let mut out = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let v: Vec<f64> = rec
            .iter()
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| CliError::Config(format!("{} row {}: {e}", path.display(), line + 1)))?;
        if v.iter().any(|x| !x.is_finite()) {
            return Err(CliError::Config(format!("{} row {}: non-finite value", path.display(), line + 1)));
        }
        out.push((v[0], v[1], C64::new(v[2], v[3])));
    }
    Ok(out)
}

fn read_trace(path: &Path, grid: GridSpec) -> CliResult<TimeSignal> {
    let rows = read_rows(path)?;
    if rows.len() != grid.nt {
        return Err(CliError::Config(format!("{}: expected {} rows, got {}", path.display(), grid.nt, rows.len())));
    }
    for (n, (t, _, _)) in rows.iter().enumerate() {
        if (t - grid.t(n)).abs() > 1e-9 * grid.horizon.max(1.0) {
            return Err(CliError::Config(format!(
                "{}: row {} has t = {t}, expected {}",
                path.display(),
                n + 1,
                grid.t(n)
            )));
        }
    }
    Ok(TimeSignal::new(rows.into_iter().map(|(_, _, v)| v).collect(), 0.0, grid.dt(), true)?)
}

/// Reads f.csv, g.csv and u0.csv from `dir`.
///
/// f and g need one row per time sample. u0 rows must sit on grid nodes with x ≥ 0; nodes
/// without a row are zero.
pub fn read_data_dir(dir: &Path, grid: GridSpec) -> CliResult<BoundaryData> {
    let f = read_trace(&dir.join("f.csv"), grid)?;
    let g = read_trace(&dir.join("g.csv"), grid)?;
    let path = dir.join("u0.csv");
    let mut u0 = SpaceSignal::zeros(grid);
    for (_, x, v) in read_rows(&path)? {
        let k = (x + grid.half_width) / grid.dx();
        let j = k.round();
        if x < 0.0 || (k - j).abs() > 1e-6 || j as usize >= grid.nx {
            return Err(CliError::Config(format!("{}: x = {x} is not a grid node of the half-line", path.display())));
        }
        u0.samples[j as usize] = v;
    }
    Ok(BoundaryData::new(f, g, u0)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lock_is_exclusive_and_released() {
        let dir = tempfile::tempdir().unwrap();
        let a = OutputDir::acquire(dir.path()).unwrap();
        assert!(matches!(OutputDir::acquire(dir.path()), Err(CliError::Locked(_))));
        drop(a);
        assert!(OutputDir::acquire(dir.path()).is_ok());
    }

    #[test]
    fn data_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let grid = GridSpec::new(8.0, 64, 1.0, 9).unwrap();
        let f = TimeSignal::from_fn(grid.nt, grid.dt(), |t| C64::new(t * t, -t));
        let g = TimeSignal::from_fn(grid.nt, grid.dt(), |t| C64::new(0.5 * t, 0.0));
        write_trace_csv(&dir.path().join("f.csv"), &f, 0.0).unwrap();
        write_trace_csv(&dir.path().join("g.csv"), &g, 0.0).unwrap();
        let mut text = String::from("t,x,re,im\n");
        for j in grid.origin()..grid.nx {
            text.push_str(&format!("0,{},{},0\n", grid.x(j), (-grid.x(j)).exp()));
        }
        fs::write(dir.path().join("u0.csv"), text).unwrap();
        let data = read_data_dir(dir.path(), grid).unwrap();
        assert_eq!(data.f.samples, f.samples);
        assert_eq!(data.g.samples, g.samples);
        assert_eq!(data.u0.samples[grid.origin() + 3], C64::new((-grid.x(grid.origin() + 3)).exp(), 0.0));
        assert_eq!(data.u0.samples[grid.origin() - 1], C64::new(0.0, 0.0));
    }

    #[test]
    fn rejects_misaligned_data() {
        let dir = tempfile::tempdir().unwrap();
        let grid = GridSpec::new(8.0, 64, 1.0, 9).unwrap();
        let f = TimeSignal::zeros(5, 0.25);
        write_trace_csv(&dir.path().join("f.csv"), &f, 0.0).unwrap();
        write_trace_csv(&dir.path().join("g.csv"), &f, 0.0).unwrap();
        fs::write(dir.path().join("u0.csv"), "t,x,re,im\n0,0.1,1,0\n").unwrap();
        assert!(matches!(read_data_dir(dir.path(), grid), Err(CliError::Config(_))));
    }
}
