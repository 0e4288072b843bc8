//! Tridiagonal operators and Thomas elimination.

use crate::{Error, Result};

/// Square tridiagonal matrix stored by diagonals.
///
/// `lower[i]` couples row `i + 1` to column `i`, `upper[i]` couples row `i`
/// to column `i + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Tridiagonal {
    pub fn zeros(n: usize) -> Self {
        let off = n.saturating_sub(1);
        Self {
            lower: vec![0.0; off],
            diag: vec![0.0; n],
            upper: vec![0.0; off],
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn transpose(&self) -> Self {
        Self {
            lower: self.upper.clone(),
            diag: self.diag.clone(),
            upper: self.lower.clone(),
        }
    }

    /// Exact (bitwise) symmetry.
    pub fn is_symmetric(&self) -> bool {
        self.lower == self.upper
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        assert_eq!(x.len(), n);
        let mut y: Vec<f64> = self.diag.iter().zip(x).map(|(d, v)| d * v).collect();
        for i in 0..n.saturating_sub(1) {
            y[i] += self.upper[i] * x[i + 1];
            y[i + 1] += self.lower[i] * x[i];
        }
        y
    }

    /// `xᵀ A x`.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        self.apply(x).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    /// Replaces row `i` by the identity row.
    pub fn set_identity_row(&mut self, i: usize) {
        self.diag[i] = 1.0;
        if i > 0 {
            self.lower[i - 1] = 0.0;
        }
        if i + 1 < self.len() {
            self.upper[i] = 0.0;
        }
    }

    pub fn add_to_diag(&mut self, i: usize, value: f64) {
        self.diag[i] += value;
    }

    /// Solves `A x = rhs` by Thomas elimination without pivoting.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.len();
        if rhs.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: rhs.len(),
            });
        }
        if n == 0 {
            return Ok(Vec::new());
        }
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        let mut pivot = self.diag[0];
        check_pivot(pivot, self.diag[0], 0)?;
        if n > 1 {
            c[0] = self.upper[0] / pivot;
        }
        d[0] = rhs[0] / pivot;
        for i in 1..n {
            pivot = self.diag[i] - self.lower[i - 1] * c[i - 1];
            check_pivot(pivot, self.diag[i], i)?;
            if i + 1 < n {
                c[i] = self.upper[i] / pivot;
            }
            d[i] = (rhs[i] - self.lower[i - 1] * d[i - 1]) / pivot;
        }
        for i in (0..n - 1).rev() {
            d[i] -= c[i] * d[i + 1];
        }
        Ok(d)
    }
}

/// A pivot is rejected once it falls below a hundredth of an ulp of the
/// original diagonal entry.
fn check_pivot(pivot: f64, scale: f64, row: usize) -> Result<()> {
    if !pivot.is_finite() || pivot.abs() <= f64::EPSILON * 1e-2 * scale.abs() {
        Err(Error::SingularPivot { row })
    } else {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense(t: &Tridiagonal) -> Vec<Vec<f64>> {
        let n = t.len();
        let mut a = vec![vec![0.0; n]; n];
        for i in 0..n {
            a[i][i] = t.diag[i];
            if i + 1 < n {
                a[i][i + 1] = t.upper[i];
                a[i + 1][i] = t.lower[i];
            }
        }
        a
    }

    #[test]
    fn solve_matches_dense_product() {
        let t = Tridiagonal {
            lower: vec![-1.0, 0.5, -2.0],
            diag: vec![4.0, 5.0, 6.0, 7.0],
            upper: vec![1.0, -1.0, 0.25],
        };
        let rhs = [1.0, 2.0, 3.0, 4.0];
        let x = t.solve(&rhs).unwrap();
        let a = dense(&t);
        for i in 0..4 {
            let s: f64 = (0..4).map(|j| a[i][j] * x[j]).sum();
            assert!((s - rhs[i]).abs() < 1e-13);
        }
        let y = t.apply(&x);
        for i in 0..4 {
            assert!((y[i] - rhs[i]).abs() < 1e-13);
        }
    }

    #[test]
    fn zero_pivot_is_reported() {
        let t = Tridiagonal {
            lower: vec![1.0],
            diag: vec![1.0, 1.0],
            upper: vec![1.0],
        };
        assert_eq!(t.solve(&[1.0, 1.0]), Err(Error::SingularPivot { row: 1 }));
    }

    #[test]
    fn identity_rows() {
        let mut t = Tridiagonal::zeros(3);
        t.lower = vec![2.0, 2.0];
        t.upper = vec![3.0, 3.0];
        t.set_identity_row(0);
        t.set_identity_row(2);
        assert_eq!(t.upper, vec![0.0, 3.0]);
        assert_eq!(t.lower, vec![2.0, 0.0]);
        assert_eq!(t.transpose().upper, t.lower);
    }
}
