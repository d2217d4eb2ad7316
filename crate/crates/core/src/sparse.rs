//! Compressed sparse row storage and Jacobi-preconditioned conjugate gradients.

use rayon::prelude::*;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl CsrMatrix {
    /// Sums duplicate entries. Triplets are sorted by `(row, col)` with a stable
    /// sort, so duplicates are added in insertion order and the result does not
    /// depend on anything but the triplet sequence.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0; n + 1];
        let mut cols = Vec::with_capacity(triplets.len() / 2);
        let mut vals: Vec<f64> = Vec::with_capacity(triplets.len() / 2);
        let mut last = None;
        for (r, c, v) in triplets {
            assert!(r < n && c < n, "triplet ({r}, {c}) out of bounds for n = {n}");
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(c);
                vals.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..n {
            row_ptr[r + 1] += row_ptr[r];
        }
        CsrMatrix { n, row_ptr, cols, vals }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.cols[span.clone()].iter().copied().zip(self.vals[span].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.row(r).find(|&(col, _)| col == c).map_or(0.0, |(_, v)| v)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|r| self.get(r, r)).collect()
    }

    /// `y = A x`, row-parallel. Every row is summed in column order, so the result
    /// is independent of the thread count.
    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        y.par_iter_mut().with_min_len(512).enumerate().for_each(|(r, yr)| {
            *yr = self.row(r).map(|(c, v)| v * x[c]).sum();
        });
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec_into(x, &mut y);
        y
    }

    /// Largest `|a_rc − a_cr|` relative to the largest `|a_rc|`.
    pub fn asymmetry(&self) -> f64 {
        let scale = self.vals.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let mut worst = 0.0_f64;
        for r in 0..self.n {
            for (c, v) in self.row(r) {
                worst = worst.max((v - self.get(c, r)).abs());
            }
        }
        if scale > 0.0 {
            worst / scale
        } else {
            0.0
        }
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[derive(Clone, Debug, PartialEq)]
pub struct CgOutcome {
    pub solution: Vec<f64>,
    pub iterations: usize,
    /// `‖b − A x‖ / ‖b‖` of the returned iterate (absolute residual if `b = 0`).
    pub relative_residual: f64,
}

/// Jacobi-preconditioned conjugate gradients, stopping when
/// `‖b − A x‖ ≤ tol·‖b‖`.
pub fn pcg(a: &CsrMatrix, b: &[f64], x0: Option<&[f64]>, tol: f64, max_iter: usize) -> Result<CgOutcome> {
    let n = a.dim();
    assert_eq!(b.len(), n);
    let mut x = match x0 {
        Some(v) => v.to_vec(),
        None => vec![0.0; n],
    };
    let inv_diag: Vec<f64> = a
        .diagonal()
        .into_iter()
        .map(|d| if d > 0.0 { 1.0 / d } else { 1.0 })
        .collect();

    let b_norm = norm(b);
    let scale = if b_norm > 0.0 { b_norm } else { 1.0 };
    let mut r: Vec<f64> = b.to_vec();
    if x0.is_some() {
        let ax = a.matvec(&x);
        r.iter_mut().zip(&ax).for_each(|(ri, ai)| *ri -= ai);
    }
    let target = tol * b_norm;
    let mut r_norm = norm(&r);
    if r_norm <= target {
        return Ok(CgOutcome { solution: x, iterations: 0, relative_residual: r_norm / scale });
    }

    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(ri, di)| ri * di).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    for iter in 1..=max_iter {
        a.matvec_into(&p, &mut ap);
        let curvature = dot(&p, &ap);
        if !(curvature > 0.0) {
            return Err(Error::NegativeCurvature { iteration: iter, curvature });
        }
        let alpha = rz / curvature;
        for k in 0..n {
            x[k] += alpha * p[k];
            r[k] -= alpha * ap[k];
        }
        r_norm = norm(&r);
        if r_norm <= target {
            return Ok(CgOutcome { solution: x, iterations: iter, relative_residual: r_norm / scale });
        }
        for k in 0..n {
            z[k] = r[k] * inv_diag[k];
        }
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for k in 0..n {
            p[k] = z[k] + beta * p[k];
        }
    }
    Err(Error::NotConverged { iterations: max_iter, residual: r_norm / scale })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn laplacian_1d(n: usize) -> CsrMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i > 0 {
                t.push((i, i - 1, -1.0));
            }
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
            }
        }
        CsrMatrix::from_triplets(n, t)
    }

    #[test]
    fn duplicates_are_summed() {
        let m = CsrMatrix::from_triplets(2, vec![(0, 0, 1.0), (1, 0, 2.0), (0, 0, 3.0), (0, 1, 5.0)]);
        assert_eq!(m.get(0, 0), 4.0);
        assert_eq!(m.get(0, 1), 5.0);
        assert_eq!(m.get(1, 0), 2.0);
        assert_eq!(m.get(1, 1), 0.0);
        assert_eq!(m.nnz(), 3);
    }

    #[test]
    fn zero_rhs_converges_immediately() {
        let a = laplacian_1d(10);
        let out = pcg(&a, &[0.0; 10], None, 1e-10, 100).unwrap();
        assert_eq!(out.iterations, 0);
        assert!(out.solution.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn one_by_one_system() {
        let a = CsrMatrix::from_triplets(1, vec![(0, 0, 4.0)]);
        let out = pcg(&a, &[3.0], None, 1e-12, 10).unwrap();
        assert_eq!(out.iterations, 1);
        assert_eq!(out.solution, vec![0.75]);
    }

    #[test]
    fn indefinite_matrix_is_reported() {
        let a = CsrMatrix::from_triplets(2, vec![(0, 0, 1.0), (1, 1, -1.0)]);
        let err = pcg(&a, &[0.0, 1.0], None, 1e-12, 10).unwrap_err();
        assert!(matches!(err, Error::NegativeCurvature { .. }));
    }

    #[test]
    fn iteration_cap_is_reported() {
        let a = laplacian_1d(50);
        let b = vec![1.0; 50];
        assert!(matches!(pcg(&a, &b, None, 1e-14, 3), Err(Error::NotConverged { iterations: 3, .. })));
    }

    proptest! {
        #[test]
        fn pcg_meets_its_residual_target(b in proptest::collection::vec(-1.0f64..1.0, 30), shift in 0.0f64..2.0) {
            let mut t = Vec::new();
            for i in 0..30 {
                t.push((i, i, 2.0 + shift + i as f64 * 0.1));
                if i > 0 { t.push((i, i - 1, -1.0)); }
                if i + 1 < 30 { t.push((i, i + 1, -1.0)); }
            }
            let a = CsrMatrix::from_triplets(30, t);
            let out = pcg(&a, &b, None, 1e-10, 500).unwrap();
            let ax = a.matvec(&out.solution);
            let res: Vec<f64> = b.iter().zip(&ax).map(|(x, y)| x - y).collect();
            prop_assert!(norm(&res) <= 1e-10 * norm(&b) * 1.0001 + 1e-300);
        }
    }
}
