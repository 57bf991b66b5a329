//! The plane `P` spanned by `p_1, p_2`, and the simplex symmetries used to
//! move `Γ` onto the other vertex pairs.

use nalgebra::{DMatrix, DVector};

use super::vector::{RatMatrix, Rational, RationalVectorY};
use super::validate_n;
use crate::error::{GasketError, Result};

/// The plane through `0`, `p_1`, `p_2` with the orthonormal frame
/// `e1 = p_1 - p_2`, `e2 = (N/(N-2))^{1/2} (p_1 + p_2)`.
///
/// Plane coordinates `(t, s)` are taken relative to the origin `p_2`:
/// `x = p_2 + t e1 + s e2`. For `N = 2` the plane degenerates to the line
/// through `p_1, p_2`; `e2` is absent and `s` is always `0`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneP {
    n: usize,
    e1: DVector<f64>,
    e2: Option<DVector<f64>>,
    p2: DVector<f64>,
    /// `Π(p_k)` for `k >= 3`, in plane coordinates.
    p_common: Option<[f64; 2]>,
}

impl PlaneP {
    pub fn new(n: usize) -> Result<Self> {
        validate_n(n)?;
        let p1 = RationalVectorY::vertex(n, 1).to_f64();
        let p2 = RationalVectorY::vertex(n, 2).to_f64();
        let e1 = &p1 - &p2;
        let e2 = (n >= 3).then(|| (&p1 + &p2) * (n as f64 / (n as f64 - 2.0)).sqrt());
        let mut plane = Self {
            n,
            e1,
            e2,
            p2,
            p_common: None,
        };
        if n >= 3 {
            let p3 = RationalVectorY::vertex(n, 3).to_f64();
            plane.p_common = Some(plane.coords_of(&p3));
        }
        Ok(plane)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn e1(&self) -> &DVector<f64> {
        &self.e1
    }

    /// `Err(DegeneratePlane)` for `N = 2`.
    pub fn e2(&self) -> Result<&DVector<f64>> {
        self.e2.as_ref().ok_or(GasketError::DegeneratePlane)
    }

    pub fn is_degenerate(&self) -> bool {
        self.e2.is_none()
    }

    /// The common projection `p` of `p_3, ..., p_N`.
    pub fn p(&self) -> Result<[f64; 2]> {
        self.p_common.ok_or(GasketError::DegeneratePlane)
    }

    /// Orthogonal projection `Π` of an ambient point of `Y` onto `P`.
    pub fn project(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut out = &self.e1 * self.e1.dot(x);
        if let Some(e2) = &self.e2 {
            out += e2 * e2.dot(x);
        }
        out
    }

    /// Plane coordinates `(t, s)` of `Π x`.
    pub fn coords_of(&self, x: &DVector<f64>) -> [f64; 2] {
        let d = x - &self.p2;
        let s = self.e2.as_ref().map_or(0.0, |e2| e2.dot(&d));
        [self.e1.dot(&d), s]
    }

    pub fn point_at(&self, ts: [f64; 2]) -> DVector<f64> {
        let mut x = &self.p2 + &self.e1 * ts[0];
        if let Some(e2) = &self.e2 {
            x += e2 * ts[1];
        }
        x
    }

    /// Plane coordinates of the origin `0` of `Y`.
    pub fn origin(&self) -> [f64; 2] {
        self.coords_of(&DVector::zeros(self.n))
    }
}

/// A permutation `σ` of the vertex labels, acting on `Y` by
/// `p_i -> p_{σ(i)}` (coordinate permutation, hence orthogonal).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VertexPermutation {
    /// `image[i - 1] = σ(i)`, 1-based labels.
    image: Vec<usize>,
}

impl VertexPermutation {
    pub fn identity(n: usize) -> Self {
        Self {
            image: (1..=n).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.image.len()
    }

    pub fn image(&self) -> &[usize] {
        &self.image
    }

    pub fn apply_label(&self, i: usize) -> usize {
        self.image[i - 1]
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.n()];
        for (i, &s) in self.image.iter().enumerate() {
            inv[s - 1] = i + 1;
        }
        Self { image: inv }
    }

    /// Matrix on stored coordinates: `(O x)_{σ(i)} = x_i`.
    pub fn matrix(&self) -> RatMatrix {
        let n = self.n();
        RatMatrix::from_fn(n, |r, c| {
            if self.image[c] == r + 1 {
                Rational::from_integer(1.into())
            } else {
                Rational::from_integer(0.into())
            }
        })
    }

    pub fn matrix_f64(&self) -> DMatrix<f64> {
        self.matrix().to_f64()
    }

    pub fn apply(&self, x: &RationalVectorY) -> RationalVectorY {
        self.matrix().apply_y(x)
    }

    pub fn apply_f64(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(x.len());
        for (i, &s) in self.image.iter().enumerate() {
            out[s - 1] = x[i];
        }
        out
    }
}

/// The orthogonal map of `Y` sending `p_1 -> p_j` and `p_2 -> p_k`; the
/// remaining labels are sent, in increasing order, to the remaining vertices.
pub fn symmetry_transform(n: usize, j: usize, k: usize) -> Result<VertexPermutation> {
    validate_n(n)?;
    if j == k || j == 0 || k == 0 || j > n || k > n {
        return Err(GasketError::InvalidPair(j, k));
    }
    let mut image = vec![j, k];
    image.extend((1..=n).filter(|&i| i != j && i != k));
    Ok(VertexPermutation { image })
}
