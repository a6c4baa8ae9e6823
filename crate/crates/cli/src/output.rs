//! CSV and summary writers for a finished run.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use distdp_core::checks::Verification;
use distdp_core::dpflow::{
    EquilibriumComponent, EquilibriumReport, MonitorSeries, Series, Trajectory,
};

/// Full-precision float: 17 significant digits round-trip any `f64`.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_writer(path: &Path) -> io::Result<csv::Writer<fs::File>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(io::Error::from)
}

fn finish(mut w: csv::Writer<fs::File>) -> io::Result<()> {
    w.flush()
}

/// Column names `<block>_<agent>_<coord>`, 1-based.
pub fn state_columns(traj: &Trajectory) -> Vec<String> {
    let flow = traj.flow();
    let q = flow.agent_dim();
    flow.blocks()
        .iter()
        .flat_map(|b| {
            (0..flow.agents())
                .flat_map(move |i| (0..q).map(move |k| format!("{}_{}_{}", b.name, i + 1, k + 1)))
        })
        .collect()
}

pub fn write_trajectory(path: &Path, traj: &Trajectory) -> io::Result<()> {
    let mut w = csv_writer(path)?;
    let mut header = vec!["t".to_string()];
    header.extend(state_columns(traj));
    w.write_record(&header)?;
    for (t, x) in traj.iter() {
        w.write_record(std::iter::once(num(t)).chain(x.iter().map(|&v| num(v))))?;
    }
    finish(w)
}

/// Per-time metrics; every series must be sampled at the trajectory's times.
pub struct Metrics<'a> {
    pub consensus: Vec<(String, Series)>,
    pub tracking: &'a Series,
    pub monitors: &'a [MonitorSeries],
}

pub fn write_metrics(path: &Path, traj: &Trajectory, m: &Metrics) -> io::Result<()> {
    let mut w = csv_writer(path)?;
    let mut header = vec!["t".to_string()];
    header.extend(m.consensus.iter().map(|(b, _)| format!("consensus_{b}")));
    header.push("e_t".into());
    header.extend(m.monitors.iter().map(|s| s.name.to_string()));
    w.write_record(&header)?;
    for (k, t) in traj.times().iter().enumerate() {
        let row = std::iter::once(*t)
            .chain(m.consensus.iter().map(|(_, s)| s[k].1))
            .chain(std::iter::once(m.tracking[k].1))
            .chain(m.monitors.iter().map(|s| s.values[k].1));
        w.write_record(row.map(num))?;
    }
    finish(w)
}

fn component_rows(name: &str, comp: &EquilibriumComponent, q: usize, rows: &mut Vec<[String; 3]>) {
    let kind = if comp.is_affine_set() {
        "affine_set_representative"
    } else {
        "point"
    };
    rows.extend(comp.representative().iter().enumerate().map(|(j, &v)| {
        [
            format!("{name}_{}_{}", j / q + 1, j % q + 1),
            num(v),
            kind.to_string(),
        ]
    }));
}

/// Columns `quantity,value,kind`; `kind` is `point`, `affine_set_representative` or `residual`.
pub fn write_equilibrium(path: &Path, report: &EquilibriumReport, q: usize) -> io::Result<()> {
    let mut rows: Vec<[String; 3]> = Vec::new();
    rows.extend(
        report
            .theta_c
            .iter()
            .enumerate()
            .map(|(k, &v)| [format!("theta_c_{}", k + 1), num(v), "point".into()]),
    );
    component_rows(
        "theta_star",
        &EquilibriumComponent::Point(report.theta_star.clone()),
        q,
        &mut rows,
    );
    if let Some(w) = &report.w_star {
        component_rows("w_star", w, q, &mut rows);
    }
    if let Some(v) = &report.v_star {
        component_rows("v_star", v, q, &mut rows);
    }
    rows.extend(
        report
            .residuals
            .iter()
            .map(|(n, r)| [format!("residual_{n}"), num(*r), "residual".into()]),
    );

    let mut w = csv_writer(path)?;
    w.write_record(["quantity", "value", "kind"])?;
    for r in rows {
        w.write_record(&r)?;
    }
    finish(w)
}

pub fn write_summary(path: &Path, lines: &[(String, String)]) -> io::Result<()> {
    let mut f = io::BufWriter::new(fs::File::create(path)?);
    for (k, v) in lines {
        writeln!(f, "{k} = {v}")?;
    }
    f.flush()
}

pub fn print_verification(out: &mut impl Write, v: &Verification) -> io::Result<()> {
    for c in &v.checks {
        let mut c = c.clone();
        c.name = format!("{}.{}", v.kind.name(), c.name);
        writeln!(out, "{c}")?;
    }
    for (name, value) in &v.notes {
        writeln!(out, "NOTE {}.{name}: {value:.6e}", v.kind.name())?;
    }
    Ok(())
}
