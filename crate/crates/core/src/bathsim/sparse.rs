use num_complex::Complex64;

/// Real symmetric matrix in compressed sparse row form.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

/// Row-by-row builder. Rows must be pushed in order.
#[derive(Debug, Default)]
pub(crate) struct CsrBuilder {
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl CsrBuilder {
    pub(crate) fn with_capacity(rows: usize, nnz: usize) -> Self {
        let mut row_ptr = Vec::with_capacity(rows + 1);
        row_ptr.push(0);
        CsrBuilder {
            row_ptr,
            cols: Vec::with_capacity(nnz),
            vals: Vec::with_capacity(nnz),
        }
    }

    pub(crate) fn push(&mut self, col: usize, val: f64) {
        if val != 0.0 {
            self.cols.push(col);
            self.vals.push(val);
        }
    }

    pub(crate) fn end_row(&mut self) {
        self.row_ptr.push(self.cols.len());
    }

    pub(crate) fn finish(self) -> CsrMatrix {
        CsrMatrix {
            n: self.row_ptr.len() - 1,
            row_ptr: self.row_ptr,
            cols: self.cols,
            vals: self.vals,
        }
    }
}

impl CsrMatrix {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// y = (A − shift·I) x.
    pub fn apply_shifted(&self, x: &[Complex64], shift: f64, y: &mut [Complex64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = -shift * x[i];
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.vals[p] * x[self.cols[p]];
            }
            *yi = acc;
        }
    }

    /// Gershgorin enclosure [lo, hi] of the spectrum.
    pub fn spectral_bounds(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..self.n {
            let (mut diag, mut radius) = (0.0, 0.0);
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                if self.cols[p] == i {
                    diag += self.vals[p];
                } else {
                    radius += self.vals[p].abs();
                }
            }
            lo = lo.min(diag - radius);
            hi = hi.max(diag + radius);
        }
        if self.n == 0 {
            (0.0, 0.0)
        } else {
            (lo, hi)
        }
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (0..self.n).all(|i| {
            (self.row_ptr[i]..self.row_ptr[i + 1]).all(|p| {
                let j = self.cols[p];
                let back: f64 = (self.row_ptr[j]..self.row_ptr[j + 1])
                    .filter(|&q| self.cols[q] == i)
                    .map(|q| self.vals[q])
                    .sum();
                (back - self.vals[p]).abs() <= tol
            })
        })
    }
}
