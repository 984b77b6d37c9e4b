use num_complex::Complex64;

use super::hilbert::{CMatrix, CVector};

/// Square complex matrix in compressed sparse row form.
#[derive(Debug, Clone, PartialEq)]
pub struct Csr {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<Complex64>,
}

impl Csr {
    /// Sums duplicate entries and drops exact zeros.
    pub fn from_triplets(n: usize, mut trips: Vec<(usize, usize, Complex64)>) -> Self {
        trips.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; n + 1];
        let mut cols = Vec::with_capacity(trips.len());
        let mut vals: Vec<Complex64> = Vec::with_capacity(trips.len());
        let mut rows = Vec::with_capacity(trips.len());
        for (r, c, v) in trips {
            if rows.last() == Some(&r) && cols.last() == Some(&c) {
                *vals.last_mut().unwrap() += v;
            } else {
                rows.push(r);
                cols.push(c);
                vals.push(v);
            }
        }
        let keep: Vec<bool> = vals.iter().map(|v| *v != Complex64::new(0.0, 0.0)).collect();
        let mut out = Csr { n, row_ptr: Vec::new(), cols: Vec::new(), vals: Vec::new() };
        for (i, k) in keep.iter().enumerate() {
            if *k {
                row_ptr[rows[i] + 1] += 1;
                out.cols.push(cols[i]);
                out.vals.push(vals[i]);
            }
        }
        for r in 0..n {
            row_ptr[r + 1] += row_ptr[r];
        }
        out.row_ptr = row_ptr;
        out
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.cols[span.clone()].iter().copied().zip(self.vals[span].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.cols[span.clone()].binary_search(&c) {
            Ok(k) => self.vals[span.start + k],
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    pub fn matvec(&self, x: &CVector) -> CVector {
        CVector::from_fn(self.n, |r, _| self.row(r).map(|(c, v)| v * x[c]).sum())
    }

    /// `x^T A`.
    pub fn left_matvec(&self, x: &CVector) -> CVector {
        let mut y = CVector::zeros(self.n);
        for r in 0..self.n {
            for (c, v) in self.row(r) {
                y[c] += x[r] * v;
            }
        }
        y
    }

    pub fn to_dense(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.n, self.n);
        for r in 0..self.n {
            for (c, v) in self.row(r) {
                m[(r, c)] = v;
            }
        }
        m
    }

    /// Maximum absolute row sum; bounds the spectral radius.
    pub fn inf_norm(&self) -> f64 {
        (0..self.n).map(|r| self.row(r).map(|(_, v)| v.norm()).sum::<f64>()).fold(0.0, f64::max)
    }
}
