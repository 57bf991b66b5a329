//! Exact points of the hyperplane `Y = {x : sum x_j = 0}`.
//!
//! Coordinates are stored scaled by `sqrt(2)`: a stored vector `c` represents
//! the point `c / sqrt(2)` of `R^N`. With that scaling every vertex `p_j` and
//! every image of a vertex under the `F`, `S` and `H` maps has rational
//! coordinates, and inner products of represented points are `c . c' / 2`.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{GasketError, Result};

pub type Rational = BigRational;

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn rat_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// A point or direction of `Y` in exact `sqrt(2)`-scaled coordinates.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RationalVectorY {
    coords: Vec<Rational>,
}

impl RationalVectorY {
    pub fn new(coords: Vec<Rational>) -> Result<Self> {
        let sum = coords.iter().fold(Rational::zero(), |acc, c| acc + c);
        if !sum.is_zero() {
            return Err(GasketError::NotInHyperplane);
        }
        Ok(Self { coords })
    }

    pub(crate) fn new_unchecked(coords: Vec<Rational>) -> Self {
        debug_assert!(coords
            .iter()
            .fold(Rational::zero(), |acc, c| acc + c)
            .is_zero());
        Self { coords }
    }

    pub fn zero(n: usize) -> Self {
        Self {
            coords: vec![Rational::zero(); n],
        }
    }

    /// The simplex vertex `p_j` (1-based): stored as `e_j - (1/N)(1, ..., 1)`.
    pub fn vertex(n: usize, j: usize) -> Self {
        let base = rat(-1, n as i64);
        let mut coords = vec![base; n];
        coords[j - 1] += Rational::one();
        Self { coords }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// Stored (`sqrt(2)`-scaled) coordinates.
    pub fn coords(&self) -> &[Rational] {
        &self.coords
    }

    pub fn scale(&self, factor: &Rational) -> Self {
        Self {
            coords: self.coords.iter().map(|c| c * factor).collect(),
        }
    }

    /// Inner product of the represented points.
    pub fn dot(&self, other: &Self) -> Rational {
        let raw = self
            .coords
            .iter()
            .zip(&other.coords)
            .fold(Rational::zero(), |acc, (a, b)| acc + a * b);
        raw / Rational::from_integer(BigInt::from(2))
    }

    pub fn norm_sq(&self) -> Rational {
        self.dot(self)
    }

    pub fn distance_sq(&self, other: &Self) -> Rational {
        (self - other).norm_sq()
    }

    /// Ambient coordinates of the represented point (stored / sqrt(2)).
    pub fn to_f64(&self) -> DVector<f64> {
        let inv = std::f64::consts::FRAC_1_SQRT_2;
        DVector::from_iterator(self.dim(), self.coords.iter().map(|c| rat_to_f64(c) * inv))
    }
}

impl fmt::Debug for RationalVectorY {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list()
            .entries(self.coords.iter().map(|c| c.to_string()))
            .finish()?;
        f.write_str("/sqrt2")
    }
}

impl<'a> Add<&'a RationalVectorY> for &'a RationalVectorY {
    type Output = RationalVectorY;
    fn add(self, rhs: &RationalVectorY) -> RationalVectorY {
        RationalVectorY {
            coords: self.coords.iter().zip(&rhs.coords).map(|(a, b)| a + b).collect(),
        }
    }
}

impl<'a> Sub<&'a RationalVectorY> for &'a RationalVectorY {
    type Output = RationalVectorY;
    fn sub(self, rhs: &RationalVectorY) -> RationalVectorY {
        RationalVectorY {
            coords: self.coords.iter().zip(&rhs.coords).map(|(a, b)| a - b).collect(),
        }
    }
}

/// Dense `N x N` matrix of exact rationals.
///
/// Used both for the harmonic-extension matrices `H_j` (acting on value
/// vectors indexed by `V_0`) and for linear parts of affine maps acting on
/// stored coordinates of `Y`.
#[derive(Clone, PartialEq, Eq)]
pub struct RatMatrix {
    n: usize,
    entries: Vec<Rational>,
}

impl RatMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            entries: vec![Rational::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.entries[i * n + i] = Rational::one();
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Rational) -> Self {
        let mut entries = Vec::with_capacity(n * n);
        for r in 0..n {
            for c in 0..n {
                entries.push(f(r, c));
            }
        }
        Self { n, entries }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    /// Entry at 0-based `(row, col)`.
    pub fn get(&self, row: usize, col: usize) -> &Rational {
        &self.entries[row * self.n + col]
    }

    pub fn row(&self, row: usize) -> &[Rational] {
        &self.entries[row * self.n..(row + 1) * self.n]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |r, c| self.get(c, r).clone())
    }

    pub fn scale(&self, factor: &Rational) -> Self {
        Self {
            n: self.n,
            entries: self.entries.iter().map(|e| e * factor).collect(),
        }
    }

    pub fn apply(&self, v: &[Rational]) -> Vec<Rational> {
        (0..self.n)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(v)
                    .fold(Rational::zero(), |acc, (a, b)| acc + a * b)
            })
            .collect()
    }

    pub fn apply_y(&self, v: &RationalVectorY) -> RationalVectorY {
        RationalVectorY::new_unchecked(self.apply(v.coords()))
    }

    pub fn row_sums(&self) -> Vec<Rational> {
        (0..self.n)
            .map(|r| self.row(r).iter().fold(Rational::zero(), |acc, e| acc + e))
            .collect()
    }

    pub fn trace(&self) -> Rational {
        (0..self.n).fold(Rational::zero(), |acc, i| acc + self.get(i, i))
    }

    pub fn to_f64(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |r, c| rat_to_f64(self.get(r, c)))
    }
}

impl fmt::Debug for RatMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<Vec<String>> = (0..self.n)
            .map(|r| self.row(r).iter().map(|e| e.to_string()).collect())
            .collect();
        f.debug_list().entries(rows).finish()
    }
}

impl<'a> Mul<&'a RatMatrix> for &'a RatMatrix {
    type Output = RatMatrix;
    fn mul(self, rhs: &RatMatrix) -> RatMatrix {
        let n = self.n;
        RatMatrix::from_fn(n, |r, c| {
            (0..n).fold(Rational::zero(), |acc, k| acc + self.get(r, k) * rhs.get(k, c))
        })
    }
}

impl<'a> Add<&'a RatMatrix> for &'a RatMatrix {
    type Output = RatMatrix;
    fn add(self, rhs: &RatMatrix) -> RatMatrix {
        RatMatrix {
            n: self.n,
            entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a + b).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vertices_are_unit_spaced() {
        for n in 2..=8 {
            for j in 1..=n {
                let pj = RationalVectorY::vertex(n, j);
                assert_eq!(pj.norm_sq(), rat(n as i64 - 1, 2 * n as i64));
                for k in (j + 1)..=n {
                    let pk = RationalVectorY::vertex(n, k);
                    assert_eq!(pj.distance_sq(&pk), Rational::one());
                }
            }
        }
    }

    #[test]
    fn rejects_off_hyperplane_coords() {
        assert_eq!(
            RationalVectorY::new(vec![rat(1, 1), rat(0, 1)]),
            Err(GasketError::NotInHyperplane)
        );
    }

    #[test]
    fn float_rendering_matches() {
        let p = RationalVectorY::vertex(3, 1);
        let f = p.to_f64();
        assert!((f.norm() - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }
}
