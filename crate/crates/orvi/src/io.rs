//! Plain-text numeric output.

use std::io::Write;

use nalgebra::DMatrix;

use crate::scalar::{to_f64, Real};

/// 17 significant digits, enough for an exact `f64` round trip.
pub fn fmt<T: Real>(x: T) -> String {
    format!("{:.16e}", to_f64(x))
}

/// One row per line, comma separated, with an optional header.
pub fn write_matrix_csv<T: Real, W: Write>(mut w: W, header: Option<&[String]>, m: &DMatrix<T>) -> std::io::Result<()> {
    if let Some(h) = header {
        writeln!(w, "{}", h.join(","))?;
    }
    for row in m.row_iter() {
        let cells: Vec<String> = row.iter().map(|x| fmt(*x)).collect();
        writeln!(w, "{}", cells.join(","))?;
    }
    Ok(())
}
