//! Report files: a JSON record per run plus CSV tables and plot data.

use serde::Serialize;
use std::fs;
use std::path::{Path, PathBuf};

use super::certify::HullCertificate;
use super::components::ComponentReport;
use super::sheets::SheetStudy;
use super::studies::{DecayStudy, HmStudy};
use crate::error::{Error, Result};

fn io(e: impl std::fmt::Display) -> Error {
    Error::Io(e.to_string())
}

/// Writes a header row and records, comma-delimited with `.` decimals.
pub fn write_csv<R, I>(path: &Path, header: &[&str], rows: R) -> Result<()>
where
    R: IntoIterator<Item = I>,
    I: IntoIterator<Item = String>,
{
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record(header).map_err(io)?;
    for row in rows {
        w.write_record(row).map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(io)?;
    fs::write(path, text + "\n").map_err(io)
}

fn s<T: ToString>(x: T) -> String {
    x.to_string()
}

struct Out<'a> {
    dir: &'a Path,
    files: Vec<PathBuf>,
}

impl<'a> Out<'a> {
    fn new(dir: &'a Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(io)?;
        Ok(Self { dir, files: Vec::new() })
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let path = self.dir.join(name);
        write_json(&path, value)?;
        self.files.push(path);
        Ok(())
    }

    fn csv(&mut self, name: &str, header: &[&str], rows: Vec<Vec<String>>) -> Result<()> {
        let path = self.dir.join(name);
        write_csv(&path, header, rows)?;
        self.files.push(path);
        Ok(())
    }
}

pub fn emit_certificate(cert: &HullCertificate, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Out::new(dir)?;
    out.json("certificate.json", cert)?;
    let minima = &cert.omega_minima;
    out.csv(
        "stage_minima.csv",
        &["stage", "min_value", "std_error", "argmin_re", "argmin_im", "pass", "unreliable"],
        minima
            .iter()
            .map(|m| vec![s(m.stage), s(m.min_value), s(m.std_error), s(m.argmin.re), s(m.argmin.im), s(m.pass), s(m.unreliable)])
            .collect(),
    )?;
    out.csv(
        "plot_quarter_bound.csv",
        &["x", "y", "err"],
        minima.iter().map(|m| vec![s(m.stage), s(m.min_value), s(m.std_error)]).collect(),
    )?;
    let mut margins = Vec::new();
    for (k, rep) in cert.margins.iter().enumerate() {
        for (i, r) in rep.rows.iter().enumerate() {
            margins.push(vec![
                s(k + 1),
                s(i),
                s(r.z.re),
                s(r.z.im),
                s(r.omega_slit),
                s(r.std_error),
                s(r.omega_disk),
                s(r.cert_value),
                s(r.margin),
                s(r.pass),
                s(r.seed),
            ]);
        }
    }
    out.csv(
        "margins.csv",
        &["stage", "point", "z_re", "z_im", "omega_slit", "std_error", "omega_disk", "cert_value", "margin", "pass", "seed"],
        margins,
    )?;
    if let Some(t) = &cert.convergence_table {
        let bound = |b: Option<f64>| b.map_or(String::new(), s);
        out.csv(
            "convergence.csv",
            &["stage", "sup_gap", "sup_abs", "bound"],
            t.rows.iter().map(|r| vec![s(r.stage), s(r.sup_gap), s(r.sup_abs), bound(r.bound)]).collect(),
        )?;
        out.csv("plot_convergence.csv", &["x", "y"], t.rows.iter().map(|r| vec![s(r.stage), s(r.sup_gap)]).collect())?;
    }
    out.csv("propagation.csv", &["n", "bound"], cert.propagation.iter().map(|r| vec![s(r.n), s(r.bound)]).collect())?;
    Ok(out.files)
}

pub fn emit_components(rep: &ComponentReport, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Out::new(dir)?;
    out.json("components.json", rep)?;
    out.csv(
        "components.csv",
        &["id", "cells", "area", "half_circle_hits", "selected"],
        rep.components
            .iter()
            .map(|c| vec![s(c.id), s(c.cells), s(c.area), s(c.half_circle_hits), s(rep.unique_nonthin == Some(c.id))])
            .collect(),
    )?;
    let n = rep.resolution;
    let rows = rep
        .labels
        .iter()
        .enumerate()
        .filter(|(_, l)| **l >= 0)
        .map(|(idx, l)| {
            let x = rep.lower_left.re + ((idx % n) as f64 + 0.5) * rep.cell;
            let y = rep.lower_left.im + ((idx / n) as f64 + 0.5) * rep.cell;
            vec![s(x), s(y), s(l)]
        })
        .collect();
    out.csv("plot_components.csv", &["x", "y", "component"], rows)?;
    Ok(out.files)
}

pub fn emit_sheets(study: &SheetStudy, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Out::new(dir)?;
    out.json("sheets.json", study)?;
    let flips = |v: &[usize]| v.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" ");
    out.csv(
        "sheets.csv",
        &["sheet", "flipped", "points", "max_residual", "pass"],
        study.rows.iter().map(|r| vec![s(r.sheet), flips(&r.flipped), s(r.points), s(r.max_residual), s(r.pass)]).collect(),
    )?;
    out.csv(
        "monodromy.csv",
        &["index", "loop_radius", "steps", "error", "separation", "pass"],
        study
            .monodromy
            .iter()
            .map(|m| vec![s(m.index), s(m.loop_radius), s(m.steps), s(m.error), s(m.separation), s(m.pass)])
            .collect(),
    )?;
    out.csv("plot_sheets.csv", &["x", "y"], study.rows.iter().map(|r| vec![s(r.sheet), s(r.max_residual)]).collect())?;
    Ok(out.files)
}

pub fn emit_hm_study(study: &HmStudy, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Out::new(dir)?;
    out.json("hm_study.json", study)?;
    out.csv(
        "hm_study.csv",
        &["case", "cx", "cy", "radius", "arc_start", "arc_sweep", "z_re", "z_im", "exact", "estimate", "std_error", "z_score", "pass"],
        study
            .rows
            .iter()
            .map(|r| {
                vec![
                    s(r.case),
                    s(r.disk.center.re),
                    s(r.disk.center.im),
                    s(r.disk.radius),
                    s(r.arc.start),
                    s(r.arc.sweep),
                    s(r.z.re),
                    s(r.z.im),
                    s(r.exact),
                    s(r.estimate),
                    s(r.std_error),
                    s(r.z_score),
                    s(r.pass),
                ]
            })
            .collect(),
    )?;
    out.csv(
        "plot_hm_study.csv",
        &["x", "y", "err"],
        study.rows.iter().map(|r| vec![s(r.exact), s(r.estimate), s(r.std_error)]).collect(),
    )?;
    Ok(out.files)
}

pub fn emit_decay(study: &DecayStudy, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Out::new(dir)?;
    out.json("decay.json", study)?;
    let rows = &study.report.rows;
    out.csv(
        "decay.csv",
        &["stage", "gap", "value", "std_error", "hits", "lost", "seed"],
        rows.iter()
            .zip(&study.gaps)
            .map(|(r, g)| {
                let e = &r.estimate;
                vec![s(r.stage), s(g), s(e.value), s(e.std_error), s(e.hits), s(e.lost), s(e.seed)]
            })
            .collect(),
    )?;
    out.csv(
        "plot_decay.csv",
        &["x", "y", "err"],
        rows.iter().map(|r| vec![s(r.stage), s(r.estimate.value), s(r.estimate.std_error)]).collect(),
    )?;
    Ok(out.files)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_has_header_and_plain_decimals() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        write_csv(&path, &["x", "y"], vec![vec![s(0.5), s(1e-20)], vec![s(2), s(-3.25)]]).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(text, "x,y\n0.5,0.00000000000000000001\n2,-3.25\n");
    }
}
