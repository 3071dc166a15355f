//! Convergence tables.

use std::path::Path;

use crate::error::Result;
use crate::output::{float, write_csv};

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub truncation: usize,
    pub h: f64,
    /// `max_k ‖f_2k − f_2k^ref‖∞`.
    pub error: f64,
    /// `‖f_0 − f_0^ref‖∞`.
    pub density_error: f64,
    pub energy: f64,
    /// `log₂(error(2h)/error(h))`, set only when the previous row of the
    /// same `K` has exactly twice this `h`.
    pub order: Option<f64>,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    pub warnings: Vec<String>,
}

pub const HEADER: [&str; 7] = ["K", "h", "error", "density_error", "energy", "order", "converged"];

fn is_halving(coarse: f64, fine: f64) -> bool {
    (coarse - 2.0 * fine).abs() <= 1e-9 * coarse
}

impl ConvergenceReport {
    /// Fills in orders. Rows must be grouped by `K` with `h` decreasing.
    pub fn new(mut rows: Vec<ConvergenceRow>, n_h: usize) -> Self {
        let mut warnings = Vec::new();
        if n_h < 2 {
            warnings.push("fewer than two h values; no convergence orders".to_string());
        }
        for i in 1..rows.len() {
            let (prev, cur) = (&rows[i - 1], &rows[i]);
            if prev.truncation == cur.truncation && is_halving(prev.h, cur.h) {
                rows[i].order = Some((prev.error / cur.error).log2());
            }
        }
        if n_h >= 2 && rows.iter().all(|r| r.order.is_none()) && rows.len() > 1 {
            warnings.push("no consecutive h values differ by a factor of two; no convergence orders".to_string());
        }
        if rows.iter().any(|r| !r.converged) {
            warnings.push("some sweep points did not converge".to_string());
        }
        Self { rows, warnings }
    }

    /// Orders of one `K` column, in row order.
    pub fn orders(&self, truncation: usize) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| r.truncation == truncation)
            .filter_map(|r| r.order)
            .collect()
    }

    pub fn column(&self, truncation: usize) -> Vec<&ConvergenceRow> {
        self.rows.iter().filter(|r| r.truncation == truncation).collect()
    }

    /// `convergence.csv`; the order field is empty where undefined.
    pub fn write(&self, path: &Path) -> Result<()> {
        write_csv(
            path,
            &HEADER.map(String::from),
            self.rows.iter().map(|r| {
                vec![
                    r.truncation.to_string(),
                    float(r.h),
                    float(r.error),
                    float(r.density_error),
                    float(r.energy),
                    r.order.map(float).unwrap_or_default(),
                    r.converged.to_string(),
                ]
            }),
        )
    }
}
