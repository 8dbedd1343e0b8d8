//! Shared CSV conventions: a `# schema/version` comment line up front, then a
//! header row, then numeric records.

use std::io::{Read, Write};

use crate::error::{Error, Result};

pub fn reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(false)
        .from_reader(input)
}

pub fn writer<W: Write>(mut out: W, schema: &str) -> Result<csv::Writer<W>> {
    writeln!(out, "# {schema}")?;
    Ok(csv::Writer::from_writer(out))
}

/// Parses every field of `rec` as `f64`, naming the column on failure.
pub fn parse_row(rec: &csv::StringRecord, cols: &[&str], row: usize) -> Result<Vec<f64>> {
    rec.iter()
        .enumerate()
        .map(|(i, field)| {
            field.parse::<f64>().map_err(|_| {
                Error::Schema(format!(
                    "row {}, column {:?}: cannot parse {field:?} as a number",
                    row + 1,
                    cols.get(i).copied().unwrap_or("?")
                ))
            })
        })
        .collect()
}

/// Fails unless the header is exactly `expected`.
pub fn expect_header(found: &csv::StringRecord, expected: &[&str]) -> Result<()> {
    let got: Vec<&str> = found.iter().collect();
    if got != expected {
        for (i, e) in expected.iter().enumerate() {
            match got.get(i) {
                Some(g) if g == e => continue,
                Some(g) => return Err(Error::Schema(format!("column {i}: expected {e:?}, found {g:?}"))),
                None => return Err(Error::Schema(format!("missing column {e:?}"))),
            }
        }
        return Err(Error::Schema(format!("unexpected extra columns after {expected:?}: {got:?}")));
    }
    Ok(())
}

/// Integer-valued column, rejecting fractional or negative input.
pub fn as_index(v: f64, col: &str, row: usize) -> Result<usize> {
    if v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
        Ok(v as usize)
    } else {
        Err(Error::Schema(format!("row {}, column {col:?}: {v} is not a non-negative integer", row + 1)))
    }
}
