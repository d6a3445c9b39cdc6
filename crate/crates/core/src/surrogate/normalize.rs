//! Per-column z-score normalisation.

use serde::{Deserialize, Serialize};

/// Guard added to the divisor so constant columns map to zero.
pub const STD_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub mean: Vec<f64>,
    /// Sample standard deviation (divisor `m − 1`).
    pub std: Vec<f64>,
}

impl Normalization {
    /// Fits column statistics of a row-major `rows × cols` matrix (`rows ≥ 2`).
    pub fn fit(data: &[f64], cols: usize) -> Self {
        let rows = data.len() / cols;
        assert!(rows >= 2 && rows * cols == data.len(), "need at least two complete rows");
        let mut mean = vec![0.0; cols];
        for row in data.chunks_exact(cols) {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= rows as f64);
        let mut var = vec![0.0; cols];
        for row in data.chunks_exact(cols) {
            for ((s, v), m) in var.iter_mut().zip(row).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let std = var.into_iter().map(|s| (s / (rows - 1) as f64).sqrt()).collect();
        Self { mean, std }
    }

    /// The identity transform on `cols` columns.
    pub fn identity(cols: usize) -> Self {
        Self { mean: vec![0.0; cols], std: vec![1.0; cols] }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    fn scale(&self, c: usize) -> f64 {
        self.std[c].max(STD_EPS)
    }

    /// Normalises one row in place.
    pub fn apply_row(&self, row: &mut [f64]) {
        for (c, v) in row.iter_mut().enumerate() {
            *v = (*v - self.mean[c]) / self.scale(c);
        }
    }

    pub fn invert_row(&self, row: &mut [f64]) {
        for (c, v) in row.iter_mut().enumerate() {
            *v = *v * self.scale(c) + self.mean[c];
        }
    }

    pub fn apply(&self, data: &[f64]) -> Vec<f64> {
        let mut out = data.to_vec();
        out.chunks_exact_mut(self.dim()).for_each(|r| self.apply_row(r));
        out
    }

    pub fn invert(&self, data: &[f64]) -> Vec<f64> {
        let mut out = data.to_vec();
        out.chunks_exact_mut(self.dim()).for_each(|r| self.invert_row(r));
        out
    }

    /// Multiplier from normalised to physical units for column `c`.
    pub fn unit(&self, c: usize) -> f64 {
        self.scale(c)
    }
}
