//! Snapshot files and plot-ready field export.
//!
//! Snapshot file layout (whitespace separated, floats in round-trip
//! precision):
//!
//! ```text
//! # boussinesq snapshots
//! a b N uhat0 vhat0
//! t q_1 … q_2N p_1 … p_2N
//! …
//! ```

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::problems::Trajectory;
use crate::system::{SpectralGrid, SpectralState};

const MAGIC: &str = "# boussinesq snapshots";

pub fn snapshots_to_string(traj: &Trajectory) -> Result<String> {
    let first = traj
        .states
        .first()
        .ok_or_else(|| Error::NoSnapshots("nothing to write".into()))?;
    let g = &first.grid;
    let mut out = format!("{MAGIC}\n");
    writeln!(out, "{:e} {:e} {} {:e} {:e}", g.a(), g.b(), g.n_modes(), first.uhat0, first.vhat0).unwrap();
    for (t, st) in traj.times.iter().zip(&traj.states) {
        write!(out, "{t:e}").unwrap();
        for v in st.q.iter().chain(&st.p) {
            write!(out, " {v:e}").unwrap();
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn write_snapshots(path: &Path, traj: &Trajectory) -> Result<()> {
    std::fs::write(path, snapshots_to_string(traj)?)?;
    Ok(())
}

fn parse_f64(tok: &str) -> Result<f64> {
    tok.parse::<f64>()
        .map_err(|e| Error::Config(format!("bad number '{tok}' in snapshot file: {e}")))
}

pub fn snapshots_from_str(text: &str) -> Result<Trajectory> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    if lines.next() != Some(MAGIC) {
        return Err(Error::Config("not a snapshot file".into()));
    }
    let header: Vec<&str> = lines
        .next()
        .ok_or_else(|| Error::NoSnapshots("snapshot file has no header".into()))?
        .split_whitespace()
        .collect();
    if header.len() != 5 {
        return Err(Error::Config("malformed snapshot header".into()));
    }
    let (a, b) = (parse_f64(header[0])?, parse_f64(header[1])?);
    let n: usize = header[2]
        .parse()
        .map_err(|_| Error::Config("malformed truncation index".into()))?;
    let (uhat0, vhat0) = (parse_f64(header[3])?, parse_f64(header[4])?);
    let grid = SpectralGrid::new(a, b, n)?;
    let mut traj = Trajectory::default();
    for line in lines {
        let vals = line.split_whitespace().map(parse_f64).collect::<Result<Vec<_>>>()?;
        if vals.len() != 1 + 4 * n {
            return Err(Error::Config(format!(
                "snapshot line has {} values, expected {}",
                vals.len(),
                1 + 4 * n
            )));
        }
        let st = SpectralState::new(
            grid.clone(),
            vals[1..1 + 2 * n].to_vec(),
            vals[1 + 2 * n..].to_vec(),
            uhat0,
            vhat0,
        )?;
        traj.push(vals[0], st);
    }
    if traj.is_empty() {
        return Err(Error::NoSnapshots("snapshot file holds no states".into()));
    }
    Ok(traj)
}

pub fn read_snapshots(path: &Path) -> Result<Trajectory> {
    snapshots_from_str(&std::fs::read_to_string(path)?)
}

/// One exported time slice.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSlice {
    pub requested: f64,
    /// Nearest stored time.
    pub t: f64,
    pub xs: Vec<f64>,
    /// `1/2 - u(x, t)`.
    pub values: Vec<f64>,
}

/// `1/2 - u(x, t)` at `points` evenly spaced `x` for each requested time,
/// taken from the nearest stored snapshot.
pub fn export_field(traj: &Trajectory, times: &[f64], points: usize) -> Result<Vec<FieldSlice>> {
    let last = *traj
        .times
        .last()
        .ok_or_else(|| Error::NoSnapshots("run stored no field snapshots".into()))?;
    if points == 0 {
        return Err(Error::InvalidArgument("need at least one export point".into()));
    }
    let grid = traj.states[0].grid.clone();
    let dx = grid.length() / points as f64;
    let xs: Vec<f64> = (0..points).map(|i| grid.a() + i as f64 * dx).collect();
    times
        .iter()
        .map(|&want| {
            if want < 0.0 || want > last + 1e-9 * (1.0 + last.abs()) {
                return Err(Error::InvalidArgument(format!(
                    "time {want} outside the stored range [0, {last}]"
                )));
            }
            let idx = traj
                .times
                .iter()
                .enumerate()
                .min_by(|x, y| (x.1 - want).abs().total_cmp(&(y.1 - want).abs()))
                .map(|(i, _)| i)
                .unwrap();
            let (u, _) = traj.states[idx].reconstruct(&xs);
            Ok(FieldSlice {
                requested: want,
                t: traj.times[idx],
                xs: xs.clone(),
                values: u.iter().map(|v| 0.5 - v).collect(),
            })
        })
        .collect()
}

/// `x t value` triples, one per line, slices separated by a blank line.
pub fn field_to_string(slices: &[FieldSlice]) -> String {
    let mut out = String::from("# x t 1/2-u\n");
    for s in slices {
        writeln!(out, "# requested t = {:e}, stored t = {:e}", s.requested, s.t).unwrap();
        for (x, v) in s.xs.iter().zip(&s.values) {
            writeln!(out, "{x:e} {:e} {v:e}", s.t).unwrap();
        }
        out.push('\n');
    }
    out
}

/// Parses [`field_to_string`] output back into `(x, t, value)` triples.
pub fn parse_field(text: &str) -> Result<Vec<(f64, f64, f64)>> {
    text.lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| {
            let v = l.split_whitespace().map(parse_f64).collect::<Result<Vec<_>>>()?;
            if v.len() != 3 {
                return Err(Error::Config(format!("bad field line '{l}'")));
            }
            Ok((v[0], v[1], v[2]))
        })
        .collect()
}
