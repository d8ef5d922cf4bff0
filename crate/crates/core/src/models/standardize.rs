//! Column standardization shared by linear models, neighbour lookups, and
//! outlier scoring.

use ndarray::ArrayView2;

/// Per-column mean and population standard deviation. Constant columns get
/// a scale of 1 so transforming them yields exactly zero instead of NaN.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Standardizer {
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
}

impl Standardizer {
    pub fn fit(rows: &ArrayView2<'_, f64>) -> Standardizer {
        let n = rows.nrows() as f64;
        let mut means = Vec::with_capacity(rows.ncols());
        let mut scales = Vec::with_capacity(rows.ncols());
        for j in 0..rows.ncols() {
            let col = rows.column(j);
            let mean = col.sum() / n;
            let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
            let scale = var.sqrt();
            means.push(mean);
            scales.push(if scale > 0.0 { scale } else { 1.0 });
        }
        Standardizer { means, scales }
    }

    #[inline]
    pub fn apply(&self, column: usize, value: f64) -> f64 {
        (value - self.means[column]) / self.scales[column]
    }

    /// Row-major standardized copy of the matrix.
    pub fn transform(&self, rows: &ArrayView2<'_, f64>) -> Vec<f64> {
        let mut out = Vec::with_capacity(rows.nrows() * rows.ncols());
        for i in 0..rows.nrows() {
            for j in 0..rows.ncols() {
                out.push(self.apply(j, rows[[i, j]]));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use ndarray::array;

    #[test]
    fn population_std_and_constant_guard() {
        let rows = array![[1.0, 7.0], [3.0, 7.0]];
        let s = Standardizer::fit(&rows.view());
        assert_relative_eq!(s.means[0], 2.0);
        assert_relative_eq!(s.scales[0], 1.0); // population std of {1, 3}
        assert_relative_eq!(s.scales[1], 1.0); // constant column guard
        assert_relative_eq!(s.apply(0, 3.0), 1.0);
        assert_relative_eq!(s.apply(1, 7.0), 0.0);
    }
}
