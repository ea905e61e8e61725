//! Plot-ready CSV files. Floats carry 17 significant digits and read back
//! bit-identically.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use pulseforge_core::dynamics::EvolutionTrace;
use pulseforge_core::pulse::Pulse;
use pulseforge_core::scp::IterRecord;

use crate::error::{AppError, Result};

pub const PULSE_HEADER: [&str; 4] = ["t_start_ns", "duration_ns", "amp_x_GHz", "amp_y_GHz"];
pub const TRACE_HEADER: [&str; 4] = ["iter", "accepted", "worst_case_F", "trust_radius"];
pub const EVOLUTION_HEADER: [&str; 5] = ["step", "t_ns", "entanglement", "bell_fidelity", "leakage"];
pub const SWEEP_HEADER: [&str; 3] = ["param1", "param2", "F"];
pub const TIME_SWEEP_HEADER: [&str; 2] = ["T_ns", "F"];

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// One row of a parameter sweep; `param2` is absent for one-axis sweeps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub param1: f64,
    pub param2: Option<f64>,
    pub fidelity: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimePoint {
    pub total_time: f64,
    pub fidelity: f64,
}

fn write_rows<W: Write>(out: W, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.flush()?;
    Ok(())
}

fn to_file(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let f = File::create(path).map_err(|e| AppError::io(path, e))?;
    write_rows(f, header, rows).map_err(|e| AppError::io(path, e.into()))
}

fn pulse_rows(p: &Pulse) -> impl Iterator<Item = Vec<String>> + '_ {
    (0..p.n_pixels()).map(move |k| {
        let y = if p.quadratures() > 1 { p.amp(1, k) } else { 0.0 };
        vec![fmt_f64(p.pixel_start(k)), fmt_f64(p.tau()), fmt_f64(p.amp(0, k)), fmt_f64(y)]
    })
}

pub fn write_pulse_to<W: Write>(out: W, p: &Pulse) -> csv::Result<()> {
    write_rows(out, &PULSE_HEADER, pulse_rows(p))
}

pub fn write_pulse(path: &Path, p: &Pulse) -> Result<()> {
    to_file(path, &PULSE_HEADER, pulse_rows(p))
}

fn check_header(path: &Path, r: &mut csv::Reader<File>, expected: &[&str]) -> Result<()> {
    let h = r.headers().map_err(|e| AppError::parse(path, e.to_string()))?;
    if h.iter().map(str::trim).ne(expected.iter().copied()) {
        return Err(AppError::parse(path, format!("expected header {}", expected.join(","))));
    }
    Ok(())
}

fn field(path: &Path, line: usize, rec: &csv::StringRecord, i: usize) -> Result<f64> {
    let s = rec.get(i).map(str::trim).unwrap_or("");
    s.parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| AppError::parse(path, format!("line {line}: column {} is not a number: '{s}'", i + 1)))
}

/// Reads a pulse with `quadratures` columns; a single-quadrature pulse must
/// have an all-zero `amp_y_GHz` column.
pub fn read_pulse(path: &Path, quadratures: usize) -> Result<Pulse> {
    let f = File::open(path).map_err(|e| AppError::Config(format!("cannot open {}: {e}", path.display())))?;
    let mut r = csv::Reader::from_reader(f);
    check_header(path, &mut r, &PULSE_HEADER)?;
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    let mut expect_start = 0.0;
    let mut width = None;
    for (i, rec) in r.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| AppError::parse(path, e.to_string()))?;
        let start = field(path, line, &rec, 0)?;
        let dur = field(path, line, &rec, 1)?;
        let w = *width.get_or_insert(dur);
        if !(dur > 0.0) || (dur - w).abs() > 1e-9 * w || (start - expect_start).abs() > 1e-9 * (1.0 + expect_start) {
            return Err(AppError::parse(path, format!("line {line}: pixels must be contiguous and equally wide")));
        }
        expect_start = start + dur;
        xs.push(field(path, line, &rec, 2)?);
        ys.push(field(path, line, &rec, 3)?);
    }
    let Some(tau) = width else {
        return Err(AppError::parse(path, "no pixels"));
    };
    let total_time = tau * xs.len() as f64;
    match quadratures {
        1 if ys.iter().any(|&y| y != 0.0) => {
            Err(AppError::parse(path, "amp_y_GHz is non-zero but the model has one quadrature"))
        }
        1 => Ok(Pulse::new(total_time, 1, xs)?),
        2 => {
            xs.extend(ys);
            Ok(Pulse::new(total_time, 2, xs)?)
        }
        q => Err(AppError::Config(format!("unsupported quadrature count {q}"))),
    }
}

pub fn write_trace(path: &Path, trace: &[IterRecord]) -> Result<()> {
    to_file(
        path,
        &TRACE_HEADER,
        trace.iter().map(|r| {
            vec![r.iter.to_string(), u8::from(r.accepted).to_string(), fmt_f64(r.worst_case), fmt_f64(r.trust_radius)]
        }),
    )
}

fn evolution_rows(t: &EvolutionTrace) -> impl Iterator<Item = Vec<String>> + '_ {
    (0..t.len()).map(|k| {
        vec![
            k.to_string(),
            fmt_f64(t.times[k]),
            fmt_f64(t.entanglement[k]),
            fmt_f64(t.bell_fidelity[k]),
            fmt_f64(t.leakage[k]),
        ]
    })
}

pub fn write_evolution(path: &Path, t: &EvolutionTrace) -> Result<()> {
    to_file(path, &EVOLUTION_HEADER, evolution_rows(t))
}

pub fn write_evolution_to<W: Write>(out: W, t: &EvolutionTrace) -> csv::Result<()> {
    write_rows(out, &EVOLUTION_HEADER, evolution_rows(t))
}

fn sweep_rows(rows: &[SweepRow]) -> impl Iterator<Item = Vec<String>> + '_ {
    rows.iter().map(|r| vec![fmt_f64(r.param1), r.param2.map(fmt_f64).unwrap_or_default(), fmt_f64(r.fidelity)])
}

pub fn write_sweep(path: &Path, rows: &[SweepRow]) -> Result<()> {
    to_file(path, &SWEEP_HEADER, sweep_rows(rows))
}

pub fn write_sweep_to<W: Write>(out: W, rows: &[SweepRow]) -> csv::Result<()> {
    write_rows(out, &SWEEP_HEADER, sweep_rows(rows))
}

pub fn read_sweep(path: &Path) -> Result<Vec<SweepRow>> {
    let f = File::open(path).map_err(|e| AppError::Config(format!("cannot open {}: {e}", path.display())))?;
    let mut r = csv::Reader::from_reader(f);
    check_header(path, &mut r, &SWEEP_HEADER)?;
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| AppError::parse(path, e.to_string()))?;
        let param2 = match rec.get(1).map(str::trim) {
            Some("") | None => None,
            Some(_) => Some(field(path, i + 2, &rec, 1)?),
        };
        out.push(SweepRow { param1: field(path, i + 2, &rec, 0)?, param2, fidelity: field(path, i + 2, &rec, 2)? });
    }
    Ok(out)
}

fn time_rows(points: &[TimePoint]) -> impl Iterator<Item = Vec<String>> + '_ {
    points.iter().map(|p| vec![fmt_f64(p.total_time), fmt_f64(p.fidelity)])
}

pub fn write_time_sweep(path: &Path, points: &[TimePoint]) -> Result<()> {
    to_file(path, &TIME_SWEEP_HEADER, time_rows(points))
}

pub fn write_time_sweep_to<W: Write>(out: W, points: &[TimePoint]) -> csv::Result<()> {
    write_rows(out, &TIME_SWEEP_HEADER, time_rows(points))
}

pub fn read_trace(path: &Path) -> Result<Vec<IterRecord>> {
    let f = File::open(path).map_err(|e| AppError::Config(format!("cannot open {}: {e}", path.display())))?;
    let mut r = csv::Reader::from_reader(f);
    check_header(path, &mut r, &TRACE_HEADER)?;
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| AppError::parse(path, e.to_string()))?;
        let iter = rec.get(0).and_then(|s| s.trim().parse().ok());
        let accepted = match rec.get(1).map(str::trim) {
            Some("1") => Some(true),
            Some("0") => Some(false),
            _ => None,
        };
        let (Some(iter), Some(accepted)) = (iter, accepted) else {
            return Err(AppError::parse(path, format!("line {line}: bad iteration or accepted flag")));
        };
        out.push(IterRecord {
            iter,
            accepted,
            worst_case: field(path, line, &rec, 2)?,
            trust_radius: field(path, line, &rec, 3)?,
        });
    }
    Ok(out)
}
