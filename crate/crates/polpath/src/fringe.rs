//! Fringe tables: output-arm Stokes parameters against the interferometer phase.

use std::f64::consts::TAU;

use polpath_core::stokes::{predicted_fringe, StokesSet};

use crate::error::{CliError, Result};

pub const CSV_HEADER: &str = "phi,s0f_p0,s1f_p0,s2f_p0,s3f_p0,s0f_p1,s1f_p1,s2f_p1,s3f_p1";

/// `φ` followed by the four output-path-0 and four output-path-1 parameters.
pub type FringeRow = [f64; 9];

/// `points` rows at `φ = 2πk / points`, `k = 0..points`.
pub fn fringe_rows(set: &StokesSet, points: usize) -> Result<Vec<FringeRow>> {
    if points < 2 {
        return Err(CliError::Usage(format!(
            "need at least 2 fringe points, got {points}"
        )));
    }
    Ok((0..points)
        .map(|k| {
            let phi = TAU * k as f64 / points as f64;
            let p0 = predicted_fringe(set, 0, phi);
            let p1 = predicted_fringe(set, 1, phi);
            let mut row = [phi, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
            row[1..5].copy_from_slice(&p0.s);
            row[5..].copy_from_slice(&p1.s);
            row
        })
        .collect())
}

pub fn to_csv(rows: &[FringeRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in rows {
        let fields: Vec<String> = row.iter().map(|x| x.to_string()).collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

pub fn parse_csv(text: &str) -> Result<Vec<FringeRow>> {
    let mut lines = text.lines();
    if lines.next() != Some(CSV_HEADER) {
        return Err(CliError::Data("fringe CSV header mismatch".into()));
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 9 {
                return Err(CliError::Data(format!(
                    "fringe row {}: expected 9 fields",
                    i + 1
                )));
            }
            let mut row = [0.0; 9];
            for (slot, field) in row.iter_mut().zip(fields) {
                *slot = field.parse().map_err(|_| {
                    CliError::Data(format!("fringe row {}: bad number {field:?}", i + 1))
                })?;
            }
            Ok(row)
        })
        .collect()
}
