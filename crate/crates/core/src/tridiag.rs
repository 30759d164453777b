//! Tridiagonal systems and the Thomas algorithm.

use crate::error::{Error, Result};

/// `sub[i]·x[i−1] + diag[i]·x[i] + sup[i]·x[i+1] = rhs[i]`.
///
/// `sub[0]` and `sup[n−1]` are ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalSystem {
    pub sub: Vec<f64>,
    pub diag: Vec<f64>,
    pub sup: Vec<f64>,
    pub rhs: Vec<f64>,
}

impl TridiagonalSystem {
    pub fn zeros(n: usize) -> Self {
        Self {
            sub: vec![0.0; n],
            diag: vec![0.0; n],
            sup: vec![0.0; n],
            rhs: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    fn off(&self, i: usize) -> (f64, f64) {
        let n = self.len();
        let lo = if i > 0 { self.sub[i] } else { 0.0 };
        let hi = if i + 1 < n { self.sup[i] } else { 0.0 };
        (lo, hi)
    }

    /// Smallest `|diag| − |sub| − |sup|` over all rows.
    pub fn dominance_margin(&self) -> f64 {
        (0..self.len())
            .map(|i| {
                let (lo, hi) = self.off(i);
                self.diag[i].abs() - lo.abs() - hi.abs()
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Infinity norm of the matrix.
    pub fn matrix_norm(&self) -> f64 {
        (0..self.len())
            .map(|i| {
                let (lo, hi) = self.off(i);
                self.diag[i].abs() + lo.abs() + hi.abs()
            })
            .fold(0.0, f64::max)
    }

    /// `A·x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut v = self.diag[i] * x[i];
                if i > 0 {
                    v += self.sub[i] * x[i - 1];
                }
                if i + 1 < n {
                    v += self.sup[i] * x[i + 1];
                }
                v
            })
            .collect()
    }

    /// `‖A·x − rhs‖_∞`.
    pub fn residual(&self, x: &[f64]) -> f64 {
        self.apply(x)
            .iter()
            .zip(&self.rhs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Solves the system in O(n) without pivoting.
pub fn thomas_solve(sys: &TridiagonalSystem) -> Result<Vec<f64>> {
    let n = sys.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    if sys.sub.len() != n || sys.sup.len() != n || sys.rhs.len() != n {
        return Err(Error::arg(
            "tridiagonal bands and rhs must have equal length",
        ));
    }
    let mut upper = vec![0.0; n];
    let mut x = vec![0.0; n];

    let mut pivot = sys.diag[0];
    if pivot == 0.0 || !pivot.is_finite() {
        return Err(Error::ZeroPivot { row: 0 });
    }
    upper[0] = sys.sup[0] / pivot;
    x[0] = sys.rhs[0] / pivot;
    for i in 1..n {
        pivot = sys.diag[i] - sys.sub[i] * upper[i - 1];
        if pivot == 0.0 || !pivot.is_finite() {
            return Err(Error::ZeroPivot { row: i });
        }
        upper[i] = if i + 1 < n { sys.sup[i] / pivot } else { 0.0 };
        x[i] = (sys.rhs[i] - sys.sub[i] * x[i - 1]) / pivot;
    }
    for i in (0..n - 1).rev() {
        x[i] -= upper[i] * x[i + 1];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_returns_rhs() {
        let mut s = TridiagonalSystem::zeros(5);
        s.diag.fill(1.0);
        s.rhs = vec![1.0, -2.0, 3.5, 0.0, 9.0];
        assert_eq!(thomas_solve(&s).unwrap(), s.rhs);
    }

    #[test]
    fn zero_pivot_is_reported() {
        let mut s = TridiagonalSystem::zeros(3);
        s.diag = vec![1.0, 0.0, 1.0];
        assert!(matches!(thomas_solve(&s), Err(Error::ZeroPivot { row: 1 })));
    }

    #[test]
    fn single_row() {
        let s = TridiagonalSystem {
            sub: vec![7.0],
            diag: vec![4.0],
            sup: vec![7.0],
            rhs: vec![2.0],
        };
        assert_eq!(thomas_solve(&s).unwrap(), vec![0.5]);
        assert_eq!(s.dominance_margin(), 4.0);
    }

    #[test]
    fn mismatched_lengths() {
        let mut s = TridiagonalSystem::zeros(3);
        s.rhs.pop();
        assert!(thomas_solve(&s).is_err());
    }
}
