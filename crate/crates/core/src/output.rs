//! Snapshot CSV files, run directories and gnuplot script emission.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::integrator::{Snapshot, Trajectory};
use crate::scalar::Real;

/// Column names and values of one snapshot, in output order.
///
/// 1-D: `x,u,v,w[,Z]` (`v` is the mollified density; the nonlinear family
/// writes `x,u,v`). 2-D: `x,y,u,v,rho,w` with `(u, v)` the velocity and
/// `rho` the mollified density, row-major.
pub fn snapshot_columns<T: Real>(snapshot: &Snapshot<T>) -> Vec<(&'static str, Vec<f64>)> {
    let st = &snapshot.state;
    let grid = *st.grid();
    let to64 = |v: &[T]| v.iter().map(|x| x.to_f64_lossy()).collect::<Vec<f64>>();
    let nodes: Vec<f64> = grid.nodes().iter().map(|x| x.to_f64_lossy()).collect();
    let mut cols = Vec::new();
    if grid.dimension() == 1 {
        cols.push(("x", nodes));
        cols.push(("u", to64(st.u.values())));
        cols.push(("v", to64(st.density.values())));
    } else {
        let n = grid.cells_per_axis();
        cols.push(("x", (0..n * n).map(|i| nodes[i % n]).collect()));
        cols.push(("y", (0..n * n).map(|i| nodes[i / n]).collect()));
        cols.push(("u", to64(st.u.values())));
        let uy = st
            .u_y
            .as_ref()
            .map_or_else(|| vec![0.0; n * n], |f| to64(f.values()));
        cols.push(("v", uy));
        cols.push(("rho", to64(st.density.values())));
    }
    if let Some(w) = &st.w {
        cols.push(("w", to64(w.values())));
    }
    if let Some(z) = &st.z {
        cols.push(("Z", to64(z.values())));
    }
    cols
}

/// Parsed CSV: header names and numeric rows.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl CsvTable {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }
}

fn format_table(header: &[&str], columns: &[Vec<f64>]) -> String {
    let rows = columns.first().map_or(0, Vec::len);
    let mut out = String::with_capacity(rows * columns.len() * 24 + 64);
    out.push_str(&header.join(","));
    out.push('\n');
    for i in 0..rows {
        for (k, c) in columns.iter().enumerate() {
            if k > 0 {
                out.push(',');
            }
            let _ = write!(out, "{:.16e}", c[i]);
        }
        out.push('\n');
    }
    out
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Writes one snapshot as CSV with 17 significant digits.
pub fn write_snapshot_csv<T: Real>(snapshot: &Snapshot<T>, path: &Path) -> Result<()> {
    let cols = snapshot_columns(snapshot);
    let header: Vec<&str> = cols.iter().map(|c| c.0).collect();
    let data: Vec<Vec<f64>> = cols.into_iter().map(|c| c.1).collect();
    write_file(path, &format_table(&header, &data))
}

/// Parses a CSV table; lines starting with `#` are skipped.
pub fn parse_csv(text: &str) -> Result<CsvTable> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let csv_error = |e: csv::Error| {
        let line = e.position().map_or(1, |p| p.line() as usize);
        Error::Parse {
            line,
            column: 1,
            message: e.to_string(),
        }
    };
    let header: Vec<String> = reader
        .headers()
        .map_err(csv_error)?
        .iter()
        .map(str::to_string)
        .collect();
    if header.iter().all(String::is_empty) {
        return Err(Error::Parse {
            line: 1,
            column: 1,
            message: "missing CSV header".into(),
        });
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let mut row = Vec::with_capacity(header.len());
        let mut column = 1;
        for cell in record.iter() {
            let v = cell.parse::<f64>().map_err(|e| Error::Parse {
                line,
                column,
                message: format!("invalid number `{cell}`: {e}"),
            })?;
            row.push(v);
            column += cell.len() + 1;
        }
        rows.push(row);
    }
    Ok(CsvTable { header, rows })
}

pub fn read_csv(path: &Path) -> Result<CsvTable> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_csv(&text)
}

/// A numeric table preceded by `# ...` comment lines.
pub fn format_report(preamble: &[String], header: &[&str], columns: &[Vec<f64>]) -> String {
    let mut text = String::new();
    for line in preamble {
        let _ = writeln!(text, "# {line}");
    }
    text.push_str(&format_table(header, columns));
    text
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    write_file(path, text)
}

pub fn snapshot_file_name(index: usize) -> String {
    format!("snapshot_{index:03}.csv")
}

/// Writes every snapshot, `index.csv` (`file,time`), `diverged.txt` for a
/// diverged run, and `plot.gp`.
pub fn write_run<T: Real>(trajectory: &Trajectory<T>, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut index = String::from("file,time\n");
    for (i, snap) in trajectory.snapshots.iter().enumerate() {
        let name = snapshot_file_name(i);
        write_snapshot_csv(snap, &dir.join(&name))?;
        let _ = writeln!(index, "{name},{:.16e}", snap.time);
    }
    write_file(&dir.join("index.csv"), &index)?;
    if let Some(d) = &trajectory.diverged {
        write_file(
            &dir.join("diverged.txt"),
            &format!(
                "time = {:e}\nfield = {}\nmagnitude = {:e}\n",
                d.time, d.field, d.magnitude
            ),
        )?;
    }
    if !trajectory.snapshots.is_empty() {
        emit_plot_script(dir)?;
    }
    Ok(())
}

struct PlotSource {
    file: String,
    time: Option<f64>,
    header: Vec<String>,
    rows: usize,
}

fn plot_sources(dir: &Path) -> Result<Vec<PlotSource>> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut files: Vec<String> = entries
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .filter(|n| n.starts_with("snapshot_") && n.ends_with(".csv"))
        .collect();
    files.sort();
    let times: Vec<(String, f64)> = read_csv_index(&dir.join("index.csv")).unwrap_or_default();
    files
        .into_iter()
        .map(|file| {
            let path = dir.join(&file);
            let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
            let mut lines = text.lines().filter(|l| !l.trim().is_empty());
            let header = lines
                .next()
                .map(|h| h.split(',').map(|s| s.trim().to_string()).collect())
                .unwrap_or_default();
            let rows = lines.count();
            let time = times.iter().find(|(f, _)| *f == file).map(|(_, t)| *t);
            Ok(PlotSource {
                file,
                time,
                header,
                rows,
            })
        })
        .collect()
}

fn read_csv_index(path: &Path) -> Result<Vec<(String, f64)>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .skip(1)
        .filter_map(|l| {
            let (f, t) = l.split_once(',')?;
            Some((f.to_string(), t.trim().parse().ok()?))
        })
        .collect())
}

/// Writes `plot.gp` rendering one PNG per snapshot: a panel per field, plus
/// primitive and double-primitive panels for `w` and `Z` in 1-D.
pub fn emit_plot_script(dir: &Path) -> Result<PathBuf> {
    let sources = plot_sources(dir)?;
    if sources.is_empty() {
        return Err(Error::NothingToPlot(dir.display().to_string()));
    }
    let mut s = String::new();
    s.push_str("# gnuplot script; run from this directory with `gnuplot plot.gp`\n");
    s.push_str("set datafile separator ','\n");
    s.push_str("set terminal pngcairo size 1600,900\n");
    s.push_str("set key top left\n");
    for src in &sources {
        let two_d = src.header.iter().any(|h| h == "y");
        let fields: Vec<(usize, &str)> = src
            .header
            .iter()
            .enumerate()
            .filter(|(_, h)| !matches!(h.as_str(), "x" | "y"))
            .map(|(i, h)| (i + 1, h.as_str()))
            .collect();
        let integrated: Vec<(usize, &str)> = if two_d {
            Vec::new()
        } else {
            fields
                .iter()
                .copied()
                .filter(|(_, h)| matches!(*h, "w" | "Z"))
                .collect()
        };
        let panels = fields.len() + 2 * integrated.len();
        let cols = panels.clamp(1, 4);
        let rows = panels.div_ceil(cols);
        let png = src.file.trim_end_matches(".csv").to_string() + ".png";
        let title = match src.time {
            Some(t) => format!("{} (t = {t})", src.file),
            None => src.file.clone(),
        };
        let _ = writeln!(s, "\nset output '{png}'");
        let _ = writeln!(s, "set multiplot layout {rows},{cols} title '{title}'");
        if two_d {
            for (col, name) in &fields {
                let _ = writeln!(
                    s,
                    "set title '{name}'\nplot '{}' skip 1 using 1:2:{col} with image notitle",
                    src.file
                );
            }
        } else {
            let h = std::f64::consts::TAU / src.rows.max(1) as f64;
            let _ = writeln!(s, "h = {h:.16e}");
            for (col, name) in &fields {
                let _ = writeln!(
                    s,
                    "set title '{name}'\nplot '{}' skip 1 using 1:{col} with lines notitle",
                    src.file
                );
            }
            for (col, name) in &integrated {
                let _ = writeln!(
                    s,
                    "set title 'primitive of {name}'\nacc = 0\nplot '{}' skip 1 using 1:(acc = acc + column({col})*h, acc) with lines notitle",
                    src.file
                );
                let _ = writeln!(
                    s,
                    "set title 'double primitive of {name}'\nacc = 0\nacc2 = 0\nplot '{}' skip 1 using 1:(acc = acc + column({col})*h, acc2 = acc2 + acc*h, acc2) with lines notitle",
                    src.file
                );
            }
        }
        s.push_str("unset multiplot\n");
    }
    let path = dir.join("plot.gp");
    write_file(&path, &s)?;
    Ok(path)
}
