use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use privpost::diagnostics::SummaryRow;
use privpost::engine::DrawsMatrix;

use crate::error::{CliError, CliResult};

pub const SUMMARY_HEADER: [&str; 10] = ["variable", "mean", "median", "sd", "mad", "q5", "q95", "rhat", "ess_bulk", "ess_tail"];

/// 17 significant digits, enough to round-trip any `f64`.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt_num(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), num)
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w)
}

fn write_error(path: &Path, e: csv::Error) -> CliError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::io(path, io),
        other => CliError::Runtime(format!("{}: {other:?}", path.display())),
    }
}

/// Writes CSV rows built by `fill` to `path`.
fn write_csv(path: &Path, fill: impl FnOnce(&mut csv::Writer<BufWriter<File>>) -> csv::Result<()>) -> CliResult<()> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = csv_writer(BufWriter::new(file));
    fill(&mut w).map_err(|e| write_error(path, e))?;
    w.flush().map_err(|e| CliError::io(path, e))
}

/// Header `chain,iteration,<varnames...>`; chains are 1-based and iterations
/// count from the first sweep, so retained draws start after the warmup.
pub fn write_draws(path: &Path, draws: &DrawsMatrix, warmup: usize) -> CliResult<()> {
    write_csv(path, |w| {
        let mut header = vec!["chain".to_string(), "iteration".to_string()];
        header.extend(draws.varnames().iter().cloned());
        w.write_record(&header)?;
        for c in 0..draws.nchains() {
            for d in 0..draws.ndraws() {
                let mut rec = vec![(c + 1).to_string(), (warmup + d + 1).to_string()];
                rec.extend(draws.row(c, d).iter().map(|&v| num(v)));
                w.write_record(&rec)?;
            }
        }
        Ok(())
    })
}

/// Header `chain,iteration,mean_alpha`, one row per iteration including warmup.
pub fn write_acceptance(path: &Path, acceptance: &[Vec<f64>]) -> CliResult<()> {
    write_csv(path, |w| {
        w.write_record(["chain", "iteration", "mean_alpha"])?;
        for (c, series) in acceptance.iter().enumerate() {
            for (i, &a) in series.iter().enumerate() {
                w.write_record([(c + 1).to_string(), (i + 1).to_string(), num(a)])?;
            }
        }
        Ok(())
    })
}

pub fn write_summary(path: &Path, rows: &[SummaryRow]) -> CliResult<()> {
    write_csv(path, |w| {
        w.write_record(SUMMARY_HEADER)?;
        for r in rows {
            w.write_record([
                r.variable.clone(),
                num(r.mean),
                num(r.median),
                num(r.sd),
                num(r.mad),
                num(r.q5),
                num(r.q95),
                opt_num(r.rhat),
                opt_num(r.ess_bulk),
                opt_num(r.ess_tail),
            ])?;
        }
        Ok(())
    })
}

pub fn write_json(path: &Path, value: &serde_json::Value) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Runtime(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// Reads a draws file written by [`write_draws`]. Rows are grouped by chain
/// id in ascending order; every chain must hold the same number of draws.
pub fn read_draws(path: &Path) -> CliResult<DrawsMatrix> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    let parse_err = |line: u64, message: String| CliError::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let read_err = |e: csv::Error| match e.position().map(|p| p.line()) {
        Some(line) => parse_err(line, e.to_string()),
        None => match e.into_kind() {
            csv::ErrorKind::Io(io) => CliError::io(path, io),
            other => parse_err(1, format!("{other:?}")),
        },
    };
    let header = reader.headers().map_err(read_err)?.clone();
    if header.len() < 3 || &header[0] != "chain" || &header[1] != "iteration" {
        return Err(parse_err(1, "header must be `chain,iteration,<variables...>`".into()));
    }
    let varnames: Vec<String> = header.iter().skip(2).map(str::to_string).collect();
    let mut chains: Vec<(u64, Vec<f64>)> = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(read_err)?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != header.len() {
            return Err(parse_err(line, format!("expected {} fields, found {}", header.len(), rec.len())));
        }
        let chain: u64 = rec[0].parse().map_err(|_| parse_err(line, format!("bad chain id `{}`", &rec[0])))?;
        rec[1]
            .parse::<u64>()
            .map_err(|_| parse_err(line, format!("bad iteration `{}`", &rec[1])))?;
        let values = match chains.iter_mut().find(|(c, _)| *c == chain) {
            Some((_, v)) => v,
            None => {
                chains.push((chain, Vec::new()));
                &mut chains.last_mut().expect("just pushed").1
            }
        };
        for field in rec.iter().skip(2) {
            let v: f64 = field.parse().map_err(|_| parse_err(line, format!("bad number `{field}`")))?;
            values.push(v);
        }
    }
    if chains.is_empty() {
        return Err(parse_err(1, "no draws".into()));
    }
    chains.sort_by_key(|(c, _)| *c);
    DrawsMatrix::from_chains(varnames, chains.into_iter().map(|(_, v)| v).collect())
        .map_err(|e| parse_err(1, e.to_string()))
}

/// Aligned text rendering of a summary table.
pub fn summary_table(rows: &[SummaryRow]) -> String {
    let fixed = |v: f64| format!("{v:.3}");
    let count = |v: Option<f64>| v.map_or_else(|| "NA".to_string(), |v| format!("{v:.0}"));
    let cells: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.variable.clone(),
                fixed(r.mean),
                fixed(r.median),
                fixed(r.sd),
                fixed(r.mad),
                fixed(r.q5),
                fixed(r.q95),
                r.rhat.map_or_else(|| "NA".to_string(), |v| format!("{v:.3}")),
                count(r.ess_bulk),
                count(r.ess_tail),
            ]
        })
        .collect();
    let mut widths: Vec<usize> = SUMMARY_HEADER.iter().map(|h| h.len()).collect();
    for row in &cells {
        for (w, c) in widths.iter_mut().zip(row) {
            *w = (*w).max(c.chars().count());
        }
    }
    let mut out = String::new();
    let mut line = |fields: &[String]| {
        let parts: Vec<String> = fields
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(i, (f, w))| if i == 0 { format!("{f:<w$}") } else { format!("{f:>w$}") })
            .collect();
        out.push_str(parts.join("  ").trim_end());
        out.push('\n');
    };
    line(&SUMMARY_HEADER.map(String::from));
    for row in &cells {
        line(row);
    }
    out
}
