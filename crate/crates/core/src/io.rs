//! CSV encoding of [`MeasuredFunction`]s.
//!
//! ```text
//! group=cyclic:2x3;view=compact;mass=1,side=time
//! index_tuple,re,im
//! 0:0,1.0,0.0
//! 0:1,0.5,-0.25
//! ```
//!
//! Rows may appear in any order; missing rows are zero.

use std::io::{BufRead, Write};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fourier::{MeasuredFunction, Side};
use crate::group::GroupSpec;

/// Shortest decimal string that parses back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    format!("{x:?}")
}

fn io_err(e: impl std::fmt::Display) -> Error {
    Error::Io(e.to_string())
}

pub fn write_function_csv<W: Write>(f: &MeasuredFunction, mut out: W) -> Result<()> {
    let spec = f.spec();
    writeln!(out, "group={},side={}", spec, f.side().as_str()).map_err(io_err)?;
    writeln!(out, "index_tuple,re,im").map_err(io_err)?;
    for (i, v) in f.values().iter().enumerate() {
        let tuple = spec
            .residues_at(i)
            .iter()
            .map(|r| r.to_string())
            .collect::<Vec<_>>()
            .join(":");
        writeln!(out, "{tuple},{},{}", fmt_f64(v.re), fmt_f64(v.im)).map_err(io_err)?;
    }
    Ok(())
}

pub fn function_to_csv_string(f: &MeasuredFunction) -> String {
    let mut buf = Vec::new();
    write_function_csv(f, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("output is ASCII")
}

fn parse_header(line: &str) -> Result<(GroupSpec, Side)> {
    let bad = |d: &str| Error::Parse {
        what: "function csv header",
        detail: d.to_string(),
    };
    let line = line.trim();
    let (group_part, side_part) = line
        .rsplit_once(",side=")
        .ok_or_else(|| bad("expected `group=<spec>,side=<time|frequency>`"))?;
    let spec_str = group_part
        .strip_prefix("group=")
        .ok_or_else(|| bad("missing `group=` prefix"))?;
    let spec: GroupSpec = spec_str.parse()?;
    Ok((spec, Side::parse(side_part)?))
}

pub fn read_function_csv<R: BufRead>(mut input: R) -> Result<MeasuredFunction> {
    let mut header = String::new();
    input.read_line(&mut header).map_err(io_err)?;
    let (spec, side) = parse_header(&header)?;
    let mut out = MeasuredFunction::zeros(&spec, side)?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let parse_num = |s: &str| -> Result<f64> {
        s.parse::<f64>().map_err(|e| Error::Parse {
            what: "function value",
            detail: format!("{s:?}: {e}"),
        })
    };
    for rec in reader.records() {
        let rec = rec.map_err(io_err)?;
        if rec.len() != 3 {
            return Err(Error::Parse {
                what: "function row",
                detail: format!("expected 3 fields, got {}", rec.len()),
            });
        }
        let tuple = rec[0]
            .split(':')
            .map(|t| {
                t.parse::<usize>().map_err(|e| Error::Parse {
                    what: "index tuple",
                    detail: format!("{t:?}: {e}"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if tuple.len() == spec.rank() && tuple.iter().zip(spec.orders()).any(|(&t, &m)| t >= m) {
            return Err(Error::Parse {
                what: "index tuple",
                detail: format!("{} is out of range for {spec}", &rec[0]),
            });
        }
        let i = spec.index_of(&tuple)?;
        out.values_mut()[i] = Complex64::new(parse_num(&rec[1])?, parse_num(&rec[2])?);
    }
    MeasuredFunction::new(spec, side, out.into_values())
}
