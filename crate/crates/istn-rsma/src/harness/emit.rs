use std::fmt::Write as _;
use std::io::{Read, Write};

use super::config::{CsitMode, SweepAxis};
use super::sweep::{summarise, ResultRow, ResultTable};
use crate::{Error, Result};

/// Column order of the result CSV.
pub const CSV_HEADER: [&str; 19] = [
    "axis",
    "value",
    "scheme",
    "csit",
    "trial",
    "status",
    "min_rate",
    "opt_min_rate",
    "spc_rate",
    "common_rate",
    "private_rate",
    "spc_power_fraction",
    "outer_iterations",
    "max_decrease",
    "max_kkt_residual",
    "rescaled",
    "wall_time_s",
    "error",
    "version",
];

/// Bumped whenever the column meaning changes.
const SCHEMA_VERSION: &str = "1";

/// Floats are written with the shortest representation that parses back
/// to the same value.
fn float(v: f64) -> String {
    format!("{v:?}")
}

pub fn write_csv<W: Write>(table: &ResultTable, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in &table.rows {
        w.write_record([
            table.axis.name().to_string(),
            float(r.value),
            r.scheme.name().to_string(),
            r.csit.name().to_string(),
            r.trial.to_string(),
            r.status.name().to_string(),
            float(r.min_rate),
            float(r.opt_min_rate),
            float(r.spc_rate),
            float(r.common_rate),
            float(r.private_rate),
            float(r.spc_power_fraction),
            r.outer_iterations.to_string(),
            float(r.max_decrease),
            float(r.max_kkt_residual),
            r.rescaled.to_string(),
            r.wall_time_s.map(float).unwrap_or_default(),
            r.error.clone(),
            SCHEMA_VERSION.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn to_csv_string(table: &ResultTable) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(table, &mut buf)?;
    String::from_utf8(buf).map_err(|e| Error::Parse(e.to_string()))
}

fn field<T: std::str::FromStr>(record: &csv::StringRecord, i: usize, line: usize) -> Result<T> {
    let raw = record.get(i).unwrap_or("");
    raw.parse()
        .map_err(|_| Error::Parse(format!("row {line}, column {}: cannot parse `{raw}`", CSV_HEADER[i])))
}

/// Reads a table written by [`write_csv`]. An empty table reads back with
/// axis `none`.
pub fn read_csv<R: Read>(input: R) -> Result<ResultTable> {
    let mut rd = csv::Reader::from_reader(input);
    let header: Vec<String> = rd.headers()?.iter().map(str::to_string).collect();
    if header != CSV_HEADER {
        return Err(Error::Parse(format!("unexpected header {header:?}")));
    }
    let mut axis = None;
    let mut rows = Vec::new();
    for (n, rec) in rd.records().enumerate() {
        let rec = rec?;
        let line = n + 2;
        let row_axis: SweepAxis = field(&rec, 0, line)?;
        if *axis.get_or_insert(row_axis) != row_axis {
            return Err(Error::Parse(format!("row {line}: mixed sweep axes")));
        }
        let wall = rec.get(16).unwrap_or("");
        rows.push(ResultRow {
            value: field(&rec, 1, line)?,
            scheme: field(&rec, 2, line)?,
            csit: field::<CsitMode>(&rec, 3, line)?,
            trial: field(&rec, 4, line)?,
            status: field(&rec, 5, line)?,
            min_rate: field(&rec, 6, line)?,
            opt_min_rate: field(&rec, 7, line)?,
            spc_rate: field(&rec, 8, line)?,
            common_rate: field(&rec, 9, line)?,
            private_rate: field(&rec, 10, line)?,
            spc_power_fraction: field(&rec, 11, line)?,
            outer_iterations: field(&rec, 12, line)?,
            max_decrease: field(&rec, 13, line)?,
            max_kkt_residual: field(&rec, 14, line)?,
            rescaled: field(&rec, 15, line)?,
            wall_time_s: if wall.is_empty() { None } else { Some(field(&rec, 16, line)?) },
            error: rec.get(17).unwrap_or("").to_string(),
        });
        if rec.get(18) != Some(SCHEMA_VERSION) {
            return Err(Error::Parse(format!("row {line}: unsupported schema version")));
        }
    }
    Ok(ResultTable::new(axis.unwrap_or(SweepAxis::None), rows))
}

/// Whitespace-separated columns for gnuplot: the sweep value followed by a
/// mean and standard-error pair per scheme and CSIT mode, one line per
/// sweep value. Groups without a successful trial print `nan`.
pub fn gnuplot_dat(table: &ResultTable) -> Result<String> {
    if table.rows.is_empty() {
        return Err(Error::Config("nothing to plot: the result table is empty".into()));
    }
    let summary = summarise(table);
    let mut series: Vec<(crate::signal::SchemeKind, CsitMode)> = summary.iter().map(|s| (s.scheme, s.csit)).collect();
    series.sort();
    series.dedup();
    let mut values: Vec<f64> = summary.iter().map(|s| s.value).collect();
    values.dedup();

    let mut out = String::new();
    let _ = write!(out, "# {}", table.axis);
    for (scheme, csit) in &series {
        let _ = write!(out, " {scheme}/{csit}:mean {scheme}/{csit}:stderr");
    }
    out.push('\n');
    for v in values {
        let _ = write!(out, "{v}");
        for &(scheme, csit) in &series {
            match summary.iter().find(|s| s.value == v && s.scheme == scheme && s.csit == csit) {
                Some(s) if s.trials > s.failures => {
                    let _ = write!(out, " {:.9e} {:.9e}", s.mean, s.stderr);
                }
                _ => out.push_str(" nan nan"),
            }
        }
        out.push('\n');
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::sweep::RowStatus;
    use crate::signal::SchemeKind;

    fn row(value: f64, scheme: SchemeKind, trial: usize, rate: f64) -> ResultRow {
        ResultRow {
            value,
            scheme,
            csit: CsitMode::Robust,
            trial,
            status: RowStatus::Ok,
            min_rate: rate,
            opt_min_rate: rate * 1.01,
            spc_rate: 0.1,
            common_rate: 1.0 / 3.0,
            private_rate: 1e-300,
            spc_power_fraction: 0.25,
            outer_iterations: 17,
            max_decrease: 0.0,
            max_kkt_residual: 3.5e-9,
            rescaled: trial % 2 == 0,
            wall_time_s: (trial == 1).then_some(0.125),
            error: String::new(),
        }
    }

    fn table() -> ResultTable {
        let mut failed = row(16.0, SchemeKind::SdmaOma, 0, 0.0);
        failed.status = RowStatus::Failed;
        failed.error = "conic solver returned \"MaxIter\", at iteration 3".into();
        ResultTable::new(
            SweepAxis::PsDbw,
            vec![
                row(16.0, SchemeKind::MdpRsma, 1, 0.7),
                row(10.0, SchemeKind::MdpRsma, 0, 0.5),
                row(16.0, SchemeKind::MdpRsma, 0, 0.9),
                failed,
                row(10.0, SchemeKind::SdmaOma, 0, 0.25),
            ],
        )
    }

    #[test]
    fn header_matches_the_schema() {
        let csv = to_csv_string(&table()).unwrap();
        assert_eq!(csv.lines().next().unwrap(), CSV_HEADER.join(","));
    }

    #[test]
    fn csv_round_trip_reproduces_the_table() {
        let t = table();
        let csv = to_csv_string(&t).unwrap();
        assert_eq!(read_csv(csv.as_bytes()).unwrap(), t);
        let empty = ResultTable::new(SweepAxis::None, Vec::new());
        assert_eq!(read_csv(to_csv_string(&empty).unwrap().as_bytes()).unwrap(), empty);
    }

    #[test]
    fn malformed_csv_is_rejected() {
        assert!(read_csv("a,b\n1,2\n".as_bytes()).is_err());
        let csv = to_csv_string(&table()).unwrap().replacen(",robust,", ",psychic,", 1);
        assert!(read_csv(csv.as_bytes()).is_err());
    }

    #[test]
    fn gnuplot_columns_hold_means_and_errors() {
        let dat = gnuplot_dat(&table()).unwrap();
        let lines: Vec<&str> = dat.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("# ps_dbw MDP-RSMA/robust:mean"));
        let at16: Vec<&str> = lines[2].split_whitespace().collect();
        assert_eq!(at16[0], "16");
        assert!((at16[1].parse::<f64>().unwrap() - 0.8).abs() < 1e-9);
        assert!((at16[2].parse::<f64>().unwrap() - 0.1).abs() < 1e-9);
        assert_eq!(&at16[3..], ["nan", "nan"]);
        assert!(gnuplot_dat(&ResultTable::new(SweepAxis::None, vec![])).is_err());
    }
}
