//! CSV and JSON output. All floats are written with 17 significant digits
//! so regression baselines round-trip bit-exactly; CSVs use comma
//! separators, a header row, and LF line endings.

use crate::diagnostics::DiagnosticsSeries;
use crate::error::{Error, Result};
use crate::pde::{Grid1D, SimulationResult, State};
use crate::profile::WaveProfile;
use serde::{Deserialize, Serialize};
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

/// 17 significant digits, enough to reproduce any f64 exactly.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut f = fs::File::create(path)?;
    f.write_all(text.as_bytes())?;
    Ok(())
}

fn write_csv(path: &Path, header: &str, rows: impl Iterator<Item = Vec<f64>>) -> Result<()> {
    let mut text = String::new();
    text.push_str(header);
    text.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|&x| fmt_f64(x)).collect();
        text.push_str(&cells.join(","));
        text.push('\n');
    }
    write_text(path, &text)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Config(format!("serialization failed: {e}")))?;
    write_text(path, &format!("{text}\n"))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text)
        .map_err(|e| Error::Config(format!("failed to parse {}: {e}", path.display())))
}

/// Wave profile table as `z,U,V,W`.
pub fn write_profile_csv(path: &Path, profile: &WaveProfile) -> Result<()> {
    write_csv(
        path,
        "z,U,V,W",
        (0..profile.z.len()).map(|i| vec![profile.z[i], profile.u[i], profile.v[i], profile.w[i]]),
    )
}

/// Snapshot file name with the time embedded at fixed width, so that a
/// lexicographic sort is a chronological sort.
pub fn snapshot_filename(t: f64) -> String {
    format!("snap_t{t:09.4}.csv")
}

/// Parse the time back out of a snapshot file name.
pub fn snapshot_time(name: &str) -> Option<f64> {
    let stem = name.strip_prefix("snap_t")?.strip_suffix(".csv")?;
    stem.parse().ok()
}

/// One snapshot as `x,u,v`.
pub fn write_snapshot_csv(path: &Path, grid: &Grid1D, state: &State) -> Result<()> {
    write_csv(
        path,
        "x,u,v",
        (0..grid.nx).map(|i| vec![grid.node(i), state.u[i], state.v[i]]),
    )
}

pub fn read_snapshot_csv(path: &Path) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    match lines.next() {
        Some("x,u,v") => {}
        other => {
            return Err(Error::Config(format!(
                "{}: expected header 'x,u,v', got {:?}",
                path.display(),
                other
            )))
        }
    }
    let mut x = Vec::new();
    let mut u = Vec::new();
    let mut v = Vec::new();
    for (k, line) in lines.enumerate() {
        let mut cells = line.split(',');
        let mut next = || -> Result<f64> {
            cells
                .next()
                .and_then(|c| c.parse().ok())
                .ok_or_else(|| Error::Config(format!("{}: bad row {}", path.display(), k + 2)))
        };
        x.push(next()?);
        u.push(next()?);
        v.push(next()?);
    }
    Ok((x, u, v))
}

/// Write every stored snapshot of a run into `dir`. Returns the paths.
pub fn write_snapshots(dir: &Path, sim: &SimulationResult) -> Result<Vec<PathBuf>> {
    let mut paths = Vec::new();
    for snap in &sim.snapshots {
        let path = dir.join(snapshot_filename(snap.t));
        write_snapshot_csv(&path, &sim.grid, snap)?;
        paths.push(path);
    }
    Ok(paths)
}

/// Snapshot files in `dir` in chronological order.
pub fn list_snapshots(dir: &Path) -> Result<Vec<(f64, PathBuf)>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir)? {
        let entry = entry?;
        let name = entry.file_name();
        let name = name.to_string_lossy();
        if let Some(t) = snapshot_time(&name) {
            out.push((t, entry.path()));
        }
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(out)
}

/// Run parameters persisted next to the snapshots; `diagnose` validates
/// its own configuration against this record.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RunMetadata {
    pub p: f64,
    pub chi: f64,
    pub u_minus: f64,
    pub w_plus: f64,
    pub x_left: f64,
    pub x_right: f64,
    pub h: f64,
    pub nx: usize,
    pub tau: f64,
    pub t_end: f64,
    pub snapshot_stride: usize,
    pub newton_tol: f64,
    pub max_iter: usize,
}

/// Diagnostics table with one row per snapshot.
pub fn write_diagnostics_csv(path: &Path, d: &DiagnosticsSeries) -> Result<()> {
    let header = "t,sup_u,sup_v,front,s_window,N_t,norm_w1,norm_w2,norm_w3,norm_w4,norm_w5,norm_w6,phi_end,psi_end";
    write_csv(
        path,
        header,
        (0..d.times.len()).map(|i| {
            let mut row = vec![
                d.times[i],
                d.sup_dist_u[i],
                d.sup_dist_v[i],
                d.front_pos[i],
                d.s_window[i],
                d.n_t[i],
            ];
            for k in 0..6 {
                row.push(d.weighted_norms[k][i]);
            }
            row.push(d.phi_end[i]);
            row.push(d.psi_end[i]);
            row
        }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips_exactly() {
        for x in [
            1.0,
            std::f64::consts::PI,
            1e-300,
            -2.2250738585072014e-308,
            0.1 + 0.2,
        ] {
            let s = fmt_f64(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{s}");
        }
    }

    #[test]
    fn snapshot_name_round_trip() {
        for t in [0.0, 5.0, 12.3456, 20.0] {
            let name = snapshot_filename(t);
            assert_eq!(snapshot_time(&name), Some(t));
        }
        let mut names: Vec<String> = [20.0, 0.0, 5.0, 12.5]
            .iter()
            .map(|&t| snapshot_filename(t))
            .collect();
        names.sort();
        assert_eq!(snapshot_time(&names[0]), Some(0.0));
        assert_eq!(snapshot_time(&names[3]), Some(20.0));
    }

    #[test]
    fn snapshot_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let grid = Grid1D::new(-1.0, 1.0, 21).unwrap();
        let state = State::from_fn(&grid, |x| (x.exp(), -x));
        let path = dir.path().join("snap.csv");
        write_snapshot_csv(&path, &grid, &state).unwrap();
        let (x, u, v) = read_snapshot_csv(&path).unwrap();
        for i in 0..grid.nx {
            assert_eq!(x[i].to_bits(), grid.node(i).to_bits());
            assert_eq!(u[i].to_bits(), state.u[i].to_bits());
            assert_eq!(v[i].to_bits(), state.v[i].to_bits());
        }
    }

    #[test]
    fn output_is_byte_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let grid = Grid1D::new(0.0, 1.0, 11).unwrap();
        let state = State::from_fn(&grid, |x| (1.0 / (1.0 + x), x * x));
        let p1 = dir.path().join("a.csv");
        let p2 = dir.path().join("b.csv");
        write_snapshot_csv(&p1, &grid, &state).unwrap();
        write_snapshot_csv(&p2, &grid, &state).unwrap();
        assert_eq!(fs::read(&p1).unwrap(), fs::read(&p2).unwrap());
    }
}
