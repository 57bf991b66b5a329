//! Linear operators on `Y` expressed in a fixed orthonormal basis.

use nalgebra::{DMatrix, DVector};

use super::vector::{RatMatrix, RationalVectorY};

/// Orthonormal basis of `Y`, obtained by Gram-Schmidt on
/// `p_1 - p_N, ..., p_{N-1} - p_N`. Columns are ambient coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct YBasis {
    n: usize,
    columns: DMatrix<f64>,
}

impl YBasis {
    pub fn new(n: usize) -> Self {
        let last = RationalVectorY::vertex(n, n).to_f64();
        let mut cols: Vec<DVector<f64>> = Vec::with_capacity(n - 1);
        for i in 1..n {
            let mut v = RationalVectorY::vertex(n, i).to_f64() - &last;
            // two passes of modified Gram-Schmidt keep the basis orthonormal to ~1e-16
            for _ in 0..2 {
                for c in &cols {
                    let proj = c.dot(&v);
                    v -= c * proj;
                }
            }
            let norm = v.norm();
            cols.push(v / norm);
        }
        Self {
            n,
            columns: DMatrix::from_columns(&cols),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `N x (N-1)` matrix whose columns are the basis vectors.
    pub fn columns(&self) -> &DMatrix<f64> {
        &self.columns
    }

    /// Coordinates of an ambient vector of `Y` in this basis.
    pub fn coords_of(&self, ambient: &DVector<f64>) -> DVector<f64> {
        self.columns.transpose() * ambient
    }

    pub fn ambient_of(&self, coords: &DVector<f64>) -> DVector<f64> {
        &self.columns * coords
    }

    /// Restriction to `Y` of an ambient linear map that preserves `Y`.
    pub fn restrict(&self, ambient: &DMatrix<f64>) -> OperatorY {
        OperatorY::new(self.n, self.columns.transpose() * ambient * &self.columns)
    }

    pub fn restrict_exact(&self, ambient: &RatMatrix) -> OperatorY {
        self.restrict(&ambient.to_f64())
    }
}

/// `(N-1) x (N-1)` matrix of an operator on `Y` in the basis of [`YBasis`].
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorY {
    n: usize,
    matrix: DMatrix<f64>,
}

impl OperatorY {
    pub fn new(n: usize, matrix: DMatrix<f64>) -> Self {
        assert_eq!(matrix.nrows(), n - 1);
        assert_eq!(matrix.ncols(), n - 1);
        Self { n, matrix }
    }

    pub fn identity(n: usize) -> Self {
        Self::new(n, DMatrix::identity(n - 1, n - 1))
    }

    /// Identifies the basis: one fixed basis per `N`.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }

    /// Squared Hilbert-Schmidt norm: sum of squared entries in the basis of `Y`.
    pub fn hs_norm_sq(&self) -> f64 {
        self.matrix.iter().map(|x| x * x).sum()
    }

    pub fn hs_norm(&self) -> f64 {
        self.hs_norm_sq().sqrt()
    }

    /// Largest singular value.
    pub fn operator_norm(&self) -> f64 {
        self.matrix
            .singular_values()
            .iter()
            .cloned()
            .fold(0.0, f64::max)
    }

    pub fn transpose(&self) -> Self {
        Self::new(self.n, self.matrix.transpose())
    }

    pub fn compose(&self, rhs: &Self) -> Self {
        Self::new(self.n, &self.matrix * &rhs.matrix)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self::new(self.n, &self.matrix * factor)
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace()
    }

    pub fn apply(&self, coords: &DVector<f64>) -> DVector<f64> {
        &self.matrix * coords
    }

    pub fn frobenius_distance(&self, other: &Self) -> f64 {
        (&self.matrix - &other.matrix).norm()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_is_orthonormal_and_spans_y() {
        for n in 2..=8 {
            let b = YBasis::new(n);
            let gram = b.columns().transpose() * b.columns();
            assert!((gram - DMatrix::<f64>::identity(n - 1, n - 1)).amax() < 1e-14);
            let ones = DVector::from_element(n, 1.0);
            assert!((b.columns().transpose() * ones).amax() < 1e-14);
        }
    }

    #[test]
    fn hs_norm_of_identity() {
        assert_eq!(OperatorY::identity(4).hs_norm_sq(), 3.0);
    }
}
