//! CSV output. Floats carry 17 significant digits so that re-parsing a row
//! gives back the same bits.

use crate::config::{ModelTag, SweepVar};
use crate::CliError;
use std::io::Write;

pub const ROW_HEADER: [&str; 10] = [
    "model",
    "sweep_variable",
    "sweep_value",
    "value",
    "err_estimate",
    "mode",
    "v_over_omega_z",
    "omega_tau",
    "gamma_over_omega_s",
    "omega_over_omega_s",
];

#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub model: ModelTag,
    pub variable: Option<SweepVar>,
    pub x: Option<f64>,
    pub value: f64,
    pub err_estimate: f64,
    pub mode: String,
    /// (v/Ωz, Ωτ, Γ/ω_S, Ω/ω_S)
    pub groups: [f64; 4],
}

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_f64(s: &str, what: &str) -> Result<f64, CliError> {
    s.parse().map_err(|_| CliError::Io(format!("bad {what} field `{s}`")))
}

/// One "#" comment line naming the command and the unit convention.
pub fn comment_line(command: &str) -> String {
    format!("# qfrict {} {command}: reduced units with hbar = 1; powers are energy/time, forces energy/length", env!("CARGO_PKG_VERSION"))
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Io(e.to_string())
}

/// Writes the comment, a header and the records.
pub fn write_table<W: Write>(mut out: W, command: &str, header: &[String], records: &[Vec<String>]) -> Result<(), CliError> {
    writeln!(out, "{}", comment_line(command)).map_err(|e| CliError::Io(e.to_string()))?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header).map_err(csv_err)?;
    for r in records {
        w.write_record(r).map_err(csv_err)?;
    }
    w.flush().map_err(|e| CliError::Io(e.to_string()))
}

pub fn row_record(r: &Row) -> Vec<String> {
    let mut v = vec![
        r.model.tag().to_string(),
        r.variable.map(|s| s.name().to_string()).unwrap_or_default(),
        r.x.map(fmt_f64).unwrap_or_default(),
        fmt_f64(r.value),
        fmt_f64(r.err_estimate),
        r.mode.clone(),
    ];
    v.extend(r.groups.iter().map(|&g| fmt_f64(g)));
    v
}

pub fn write_rows<W: Write>(out: W, command: &str, rows: &[Row]) -> Result<(), CliError> {
    let header: Vec<String> = ROW_HEADER.iter().map(|s| s.to_string()).collect();
    let recs: Vec<Vec<String>> = rows.iter().map(row_record).collect();
    write_table(out, command, &header, &recs)
}

/// Inverse of `write_rows`.
pub fn read_rows(text: &str) -> Result<Vec<Row>, CliError> {
    let mut rd = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let header = rd.headers().map_err(csv_err)?.clone();
    if header.iter().ne(ROW_HEADER.iter().copied()) {
        return Err(CliError::Io(format!("unexpected header {header:?}")));
    }
    let mut rows = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(csv_err)?;
        let model = ModelTag::parse(&rec[0]).ok_or_else(|| CliError::Io(format!("bad model `{}`", &rec[0])))?;
        let variable = if rec[1].is_empty() {
            None
        } else {
            Some(SweepVar::parse(&rec[1]).ok_or_else(|| CliError::Io(format!("bad sweep variable `{}`", &rec[1])))?)
        };
        let x = if rec[2].is_empty() { None } else { Some(parse_f64(&rec[2], "sweep_value")?) };
        let mut groups = [0.0; 4];
        for (g, s) in groups.iter_mut().zip(rec.iter().skip(6)) {
            *g = parse_f64(s, "group")?;
        }
        rows.push(Row {
            model,
            variable,
            x,
            value: parse_f64(&rec[3], "value")?,
            err_estimate: parse_f64(&rec[4], "err_estimate")?,
            mode: rec[5].to_string(),
            groups,
        });
    }
    Ok(rows)
}
