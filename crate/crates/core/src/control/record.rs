use std::io::{Read, Write};

use crate::csvio;
use crate::error::{Error, Result};

pub const LOOP_SCHEMA: &str = "fairsense-loop/v1";
const LOOP_COLUMNS: [&str; 5] = ["k", "y", "y_hat", "e", "pi"];

/// Closed-loop time series. `e = r_target − ŷ`, so a shortfall drives `π` up.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LoopRecord {
    pub k: Vec<usize>,
    pub y: Vec<f64>,
    pub y_hat: Vec<f64>,
    pub e: Vec<f64>,
    /// Broadcast in force during step `k`.
    pub pi: Vec<f64>,
}

impl LoopRecord {
    pub fn with_capacity(n: usize) -> Self {
        Self {
            k: Vec::with_capacity(n),
            y: Vec::with_capacity(n),
            y_hat: Vec::with_capacity(n),
            e: Vec::with_capacity(n),
            pi: Vec::with_capacity(n),
        }
    }

    pub fn push(&mut self, k: usize, y: f64, y_hat: f64, e: f64, pi: f64) {
        self.k.push(k);
        self.y.push(y);
        self.y_hat.push(y_hat);
        self.e.push(e);
        self.pi.push(pi);
    }

    pub fn len(&self) -> usize {
        self.k.len()
    }

    pub fn is_empty(&self) -> bool {
        self.k.is_empty()
    }

    /// Mean of `y` over rows with `k ≥ from`.
    pub fn mean_y_from(&self, from: usize) -> Option<f64> {
        let tail: Vec<f64> = self.k.iter().zip(&self.y).filter(|(k, _)| **k >= from).map(|(_, y)| *y).collect();
        (!tail.is_empty()).then(|| tail.iter().sum::<f64>() / tail.len() as f64)
    }

    /// First `k` at which `y` is inside `target·(1 ± band)`.
    pub fn first_entry(&self, target: f64, band: f64) -> Option<usize> {
        self.k
            .iter()
            .zip(&self.y)
            .find(|(_, y)| (**y - target).abs() <= band * target.abs())
            .map(|(k, _)| *k)
    }
}

pub fn write_loop_csv<W: Write>(out: W, rec: &LoopRecord) -> Result<()> {
    let mut w = csvio::writer(out, LOOP_SCHEMA)?;
    w.write_record(LOOP_COLUMNS)?;
    for i in 0..rec.len() {
        w.write_record(&[
            rec.k[i].to_string(),
            rec.y[i].to_string(),
            rec.y_hat[i].to_string(),
            rec.e[i].to_string(),
            rec.pi[i].to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_loop_csv<R: Read>(input: R) -> Result<LoopRecord> {
    let mut r = csvio::reader(input);
    csvio::expect_header(r.headers()?, &LOOP_COLUMNS)?;
    let mut rec = LoopRecord::default();
    for (row, line) in r.records().enumerate() {
        let v = csvio::parse_row(&line?, &LOOP_COLUMNS, row)?;
        if v[1..].iter().any(|x| !x.is_finite()) {
            return Err(Error::Schema(format!("row {}: non-finite value", row + 1)));
        }
        rec.push(csvio::as_index(v[0], "k", row)?, v[1], v[2], v[3], v[4]);
    }
    Ok(rec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let mut rec = LoopRecord::default();
        rec.push(0, 10.0, 10.0, -2.5, 0.0);
        rec.push(1, 7.25, 8.625, -0.625, 0.1);
        let mut buf = Vec::new();
        write_loop_csv(&mut buf, &rec).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("# fairsense-loop/v1\nk,y,y_hat,e,pi\n"));
        assert_eq!(read_loop_csv(&buf[..]).unwrap(), rec);
    }

    #[test]
    fn schema_errors_name_the_column() {
        let err = read_loop_csv("k,y,yhat,e,pi\n".as_bytes()).unwrap_err().to_string();
        assert!(err.contains("y_hat"), "{err}");
        let err = read_loop_csv("k,y,y_hat,e,pi\n0,1,x,0,0\n".as_bytes()).unwrap_err().to_string();
        assert!(err.contains("\"y_hat\""), "{err}");
        assert!(read_loop_csv("k,y,y_hat,e,pi\n0.5,1,1,0,0\n".as_bytes()).is_err());
        assert!(read_loop_csv("k,y,y_hat,e,pi\n0,1,1,0\n".as_bytes()).is_err());
    }

    #[test]
    fn settling_helpers() {
        let mut rec = LoopRecord::default();
        for (k, y) in [50.0, 80.0, 95.0, 101.0, 99.0].into_iter().enumerate() {
            rec.push(k, y, y, 100.0 - y, 0.0);
        }
        assert_eq!(rec.first_entry(100.0, 0.1), Some(2));
        assert_eq!(rec.mean_y_from(3), Some(100.0));
        assert_eq!(rec.mean_y_from(9), None);
    }
}
