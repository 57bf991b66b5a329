//! The three map families on the gasket and their word compositions.
//!
//! * `F_j(x) = (x + p_j)/2`, the Euclidean similitudes of `K_N`;
//! * `S_j(x) = T_j (x - p_j) + p_j`, the harmonic affine maps, where `T_j`
//!   contracts `p_j` by `N/(N+2)` and its orthogonal complement in `Y` by
//!   `1/(N+2)`;
//! * `H_j`, the harmonic-extension matrices sending values on `V_0` to values
//!   on `F_j(V_0)`.
//!
//! Word order: `F_w = F_{w_1} o ... o F_{w_m}` (likewise `S_w`),
//! `T_w = T_{w_1} ... T_{w_m}`, and `H_w = H_{w_m} ... H_{w_1}` so that
//! `H_w` maps boundary values to the values on `F_w(V_0)`.

use nalgebra::{DMatrix, DVector};
use num_traits::{One, Zero};

use super::operator::{OperatorY, YBasis};
use super::vector::{rat, RatMatrix, Rational, RationalVectorY};
use super::word::{check_letter, Word};
use super::validate_n;
use crate::error::{GasketError, Result};

/// Affine map of `Y` with exact linear part (on stored coordinates) and
/// exact translation.
#[derive(Clone, PartialEq, Eq)]
pub struct AffineMapY {
    pub linear: RatMatrix,
    pub translation: RationalVectorY,
}

impl std::fmt::Debug for AffineMapY {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AffineMapY")
            .field("linear", &self.linear)
            .field("translation", &self.translation)
            .finish()
    }
}

impl AffineMapY {
    pub fn identity(n: usize) -> Self {
        Self {
            linear: RatMatrix::identity(n),
            translation: RationalVectorY::zero(n),
        }
    }

    pub fn apply(&self, x: &RationalVectorY) -> RationalVectorY {
        &self.linear.apply_y(x) + &self.translation
    }

    /// `self o inner`.
    pub fn compose(&self, inner: &AffineMapY) -> AffineMapY {
        AffineMapY {
            linear: &self.linear * &inner.linear,
            translation: &self.linear.apply_y(&inner.translation) + &self.translation,
        }
    }

    pub fn linear_operator(&self, basis: &YBasis) -> OperatorY {
        basis.restrict_exact(&self.linear)
    }

    pub fn to_float(&self) -> FloatAffineY {
        FloatAffineY {
            linear: self.linear.to_f64(),
            translation: self.translation.to_f64(),
        }
    }
}

/// Floating-point affine map on ambient coordinates of `Y`.
#[derive(Debug, Clone, PartialEq)]
pub struct FloatAffineY {
    pub linear: DMatrix<f64>,
    pub translation: DVector<f64>,
}

impl FloatAffineY {
    pub fn identity(n: usize) -> Self {
        Self {
            linear: DMatrix::identity(n, n),
            translation: DVector::zeros(n),
        }
    }

    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.linear * x + &self.translation
    }

    pub fn compose(&self, inner: &FloatAffineY) -> FloatAffineY {
        FloatAffineY {
            linear: &self.linear * &inner.linear,
            translation: &self.linear * &inner.translation + &self.translation,
        }
    }
}

fn check(n: usize, j: usize) -> Result<()> {
    validate_n(n)?;
    check_letter(n, j)
}

/// `F_j(x) = (x - p_j)/2 + p_j`.
pub fn f_map(n: usize, j: usize) -> Result<AffineMapY> {
    check(n, j)?;
    let half = rat(1, 2);
    Ok(AffineMapY {
        linear: RatMatrix::identity(n).scale(&half),
        translation: RationalVectorY::vertex(n, j).scale(&half),
    })
}

/// Exact linear part of `T_j` on stored coordinates: `(I + N p_j p_j^t)/(N+2)`
/// with the raw (unhalved) stored inner product, which equals `v_j` on `Y`.
pub fn t_linear(n: usize, j: usize) -> Result<RatMatrix> {
    check(n, j)?;
    let p = RationalVectorY::vertex(n, j);
    let nn = Rational::from_integer((n as i64).into());
    let inv = rat(1, n as i64 + 2);
    Ok(RatMatrix::from_fn(n, |r, c| {
        let id = if r == c { Rational::one() } else { Rational::zero() };
        (id + &nn * &p.coords()[r] * &p.coords()[c]) * &inv
    }))
}

/// `T_j` as an operator in the orthonormal basis of `Y`.
pub fn t_map(n: usize, j: usize) -> Result<OperatorY> {
    Ok(YBasis::new(n).restrict_exact(&t_linear(n, j)?))
}

/// `S_j(x) = T_j (x - p_j) + p_j = T_j x + 2 p_j/(N+2)`.
pub fn s_map(n: usize, j: usize) -> Result<AffineMapY> {
    let linear = t_linear(n, j)?;
    Ok(AffineMapY {
        linear,
        translation: RationalVectorY::vertex(n, j).scale(&rat(2, n as i64 + 2)),
    })
}

/// `S_j x = x/(N+2) + (2 + (N-1) x.p_j/|p_j|^2) p_j/(N+2)`, evaluated
/// directly with exact inner products.
pub fn s_map_direct(n: usize, j: usize, x: &RationalVectorY) -> Result<RationalVectorY> {
    check(n, j)?;
    let p = RationalVectorY::vertex(n, j);
    let inv = rat(1, n as i64 + 2);
    let ratio = x.dot(&p) / p.norm_sq();
    let coeff = (Rational::from_integer(2.into())
        + Rational::from_integer((n as i64 - 1).into()) * ratio)
        * &inv;
    Ok(&x.scale(&inv) + &p.scale(&coeff))
}

/// Harmonic-extension matrix `H_j`.
///
/// `H_1 = (1/(N+2)) [[N+2, 0], [2, I + J]]`; the others come from the cyclic
/// vertex permutation `i -> i + j - 1 (mod N)`.
pub fn h_matrix(n: usize, j: usize) -> Result<RatMatrix> {
    check(n, j)?;
    let inv = rat(1, n as i64 + 2);
    let h1 = |r: usize, c: usize| -> Rational {
        let v: i64 = match (r, c) {
            (0, 0) => n as i64 + 2,
            (0, _) => 0,
            (_, 0) => 2,
            (r, c) if r == c => 2,
            _ => 1,
        };
        Rational::from_integer(v.into()) * &inv
    };
    // inverse of the cyclic shift sending vertex 1 to vertex j (0-based)
    let back = |i: usize| (i + n - (j - 1)) % n;
    Ok(RatMatrix::from_fn(n, |r, c| h1(back(r), back(c))))
}

/// Map family selector for [`compose_word`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    F,
    S,
    T,
    H,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ComposedMap {
    Affine(AffineMapY),
    Operator(OperatorY),
    Matrix(RatMatrix),
}

pub fn f_word(word: &Word) -> Result<AffineMapY> {
    affine_word(word, f_map)
}

pub fn s_word(word: &Word) -> Result<AffineMapY> {
    affine_word(word, s_map)
}

fn affine_word(word: &Word, map: fn(usize, usize) -> Result<AffineMapY>) -> Result<AffineMapY> {
    let n = word.n();
    let mut acc = AffineMapY::identity(n);
    for &l in word.letters() {
        acc = acc.compose(&map(n, l as usize)?);
    }
    Ok(acc)
}

/// Exact `T_w` on stored coordinates.
pub fn t_word_exact(word: &Word) -> Result<RatMatrix> {
    let n = word.n();
    let mut acc = RatMatrix::identity(n);
    for &l in word.letters() {
        acc = &acc * &t_linear(n, l as usize)?;
    }
    Ok(acc)
}

/// `T_w = T_{w_1} ... T_{w_m}` in the orthonormal basis.
pub fn t_word(word: &Word) -> Result<OperatorY> {
    let n = word.n();
    let mut acc = OperatorY::identity(n);
    for &l in word.letters() {
        acc = acc.compose(&t_map(n, l as usize)?);
    }
    Ok(acc)
}

/// `H_w = H_{w_m} ... H_{w_1}`.
pub fn h_word(word: &Word) -> Result<RatMatrix> {
    let n = word.n();
    let mut acc = RatMatrix::identity(n);
    for &l in word.letters() {
        acc = &h_matrix(n, l as usize)? * &acc;
    }
    Ok(acc)
}

pub fn compose_word(word: &Word, family: Family) -> Result<ComposedMap> {
    Ok(match family {
        Family::F => ComposedMap::Affine(f_word(word)?),
        Family::S => ComposedMap::Affine(s_word(word)?),
        Family::T => ComposedMap::Operator(t_word(word)?),
        Family::H => ComposedMap::Matrix(h_word(word)?),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coordinates {
    Euclidean,
    Harmonic,
}

/// `F_w(b)` or `S_w(b)` for the barycenter `b = 0` of the simplex.
pub fn point_of_word(word: &Word, coords: Coordinates) -> Result<RationalVectorY> {
    if word.is_empty() {
        return Err(GasketError::AmbiguousAddress);
    }
    let map = match coords {
        Coordinates::Euclidean => f_word(word)?,
        Coordinates::Harmonic => s_word(word)?,
    };
    Ok(map.apply(&RationalVectorY::zero(word.n())))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(n: usize, j: usize) -> RationalVectorY {
        RationalVectorY::vertex(n, j)
    }

    #[test]
    fn f_fixes_its_vertex_and_halves() {
        for n in 2..=5 {
            for j in 1..=n {
                assert_eq!(f_map(n, j).unwrap().apply(&p(n, j)), p(n, j));
            }
        }
        let mid = (&p(4, 1) + &p(4, 2)).scale(&rat(1, 2));
        assert_eq!(f_map(4, 1).unwrap().apply(&p(4, 2)), mid);
    }

    #[test]
    fn f12_of_p3_two_ways() {
        let n = 3;
        let w = Word::parse(n, "12").unwrap();
        let composed = f_word(&w).unwrap().apply(&p(n, 3));
        let direct = f_map(n, 1)
            .unwrap()
            .apply(&f_map(n, 2).unwrap().apply(&p(n, 3)));
        assert_eq!(composed, direct);
        // (p1 + (p2 + p3)/2 ... ) computed by hand: F_2 p3 = (p2+p3)/2, F_1 of that
        let by_hand = (&p(n, 1).scale(&rat(1, 2)) + &(&p(n, 2) + &p(n, 3)).scale(&rat(1, 4))).clone();
        assert_eq!(composed, by_hand);
    }

    #[test]
    fn t_eigenstructure() {
        for n in 2..=6 {
            let nr = n as i64;
            for j in 1..=n {
                let t = t_linear(n, j).unwrap();
                assert_eq!(t.apply_y(&p(n, j)), p(n, j).scale(&rat(nr, nr + 2)));
                if n >= 3 {
                    let k = if j == 1 { 2 } else { 1 };
                    let l = if j == 3 || k == 3 { if n > 3 { 4 } else { 0 } } else { 3 };
                    if l != 0 {
                        let v = &p(n, k) - &p(n, l);
                        assert!(v.dot(&p(n, j)) == Rational::zero());
                        assert_eq!(t.apply_y(&v), v.scale(&rat(1, nr + 2)));
                    }
                }
                let op = t_map(n, j).unwrap();
                assert!((op.matrix() - op.matrix().transpose()).amax() < 1e-15);
            }
        }
    }

    #[test]
    fn s_maps_agree_with_direct_formula() {
        for n in 2..=6 {
            for j in 1..=n {
                let s = s_map(n, j).unwrap();
                assert_eq!(s.apply(&p(n, j)), p(n, j));
                for k in 1..=n {
                    let x = &p(n, k).scale(&rat(3, 7)) + &p(n, j).scale(&rat(-1, 5));
                    assert_eq!(s.apply(&x), s_map_direct(n, j, &x).unwrap());
                }
            }
        }
    }

    #[test]
    fn s_images_from_the_corner_cutting_argument() {
        for n in 2..=7 {
            let nr = n as i64;
            let s1 = s_map(n, 1).unwrap();
            let s2 = s_map(n, 2).unwrap();
            let expect = (&p(n, 1) + &p(n, 2)).scale(&rat(1, nr + 2));
            assert_eq!(s1.apply(&p(n, 2)), expect);
            assert_eq!(s2.apply(&p(n, 1)), expect);
            assert_eq!(s1.apply(&RationalVectorY::zero(n)), p(n, 1).scale(&rat(2, nr + 2)));
        }
    }

    #[test]
    fn h1_for_n3() {
        let h = h_matrix(3, 1).unwrap();
        let expect = RatMatrix::from_fn(3, |r, c| {
            let v = [[5, 0, 0], [2, 2, 1], [2, 1, 2]][r][c];
            rat(v, 5)
        });
        assert_eq!(h, expect);
    }

    #[test]
    fn h_rows_are_stochastic_and_cyclic() {
        for n in 2..=7 {
            let h1 = h_matrix(n, 1).unwrap();
            for j in 1..=n {
                let hj = h_matrix(n, j).unwrap();
                assert!(hj.row_sums().iter().all(|s| s.is_one()));
                // conjugation oracle: (H_j)_{sigma(a), sigma(b)} = (H_1)_{a,b}
                let sigma = |i: usize| (i + j - 1) % n;
                for a in 0..n {
                    for b in 0..n {
                        assert_eq!(hj.get(sigma(a), sigma(b)), h1.get(a, b));
                    }
                }
                // row j of H_j fixes p_j
                assert!(hj.get(j - 1, j - 1).is_one());
            }
            let h2 = h_matrix(n, 2).unwrap();
            assert_eq!(h2.get(0, 1), &rat(2, n as i64 + 2));
        }
    }

    #[test]
    fn empty_word_is_identity() {
        let e = Word::empty(4);
        assert_eq!(f_word(&e).unwrap(), AffineMapY::identity(4));
        assert_eq!(h_word(&e).unwrap(), RatMatrix::identity(4));
        assert_eq!(t_word(&e).unwrap(), OperatorY::identity(4));
        assert_eq!(point_of_word(&e, Coordinates::Harmonic), Err(GasketError::AmbiguousAddress));
    }

    #[test]
    fn word_order_convention() {
        let n = 3;
        let w = Word::parse(n, "12").unwrap();
        let t11 = t_word(&Word::parse(n, "11").unwrap()).unwrap();
        let t1 = t_map(n, 1).unwrap();
        assert!((t11.matrix() - t1.matrix() * t1.matrix()).amax() < 1e-15);
        // S_12 = S_1 o S_2
        let s12 = s_word(&w).unwrap();
        let x = p(n, 3);
        let twice = s_map(n, 1).unwrap().apply(&s_map(n, 2).unwrap().apply(&x));
        assert_eq!(s12.apply(&x), twice);
        // H_12 = H_2 H_1
        assert_eq!(h_word(&w).unwrap(), &h_matrix(n, 2).unwrap() * &h_matrix(n, 1).unwrap());
    }

    #[test]
    fn t12_hs_norm_dense_oracle() {
        let n = 3;
        let t12 = t_word(&Word::parse(n, "12").unwrap()).unwrap();
        // oracle: ambient dense product, HS norm over Y = ambient HS minus the
        // contribution of the (1,..,1) direction, scaled by (1/(N+2))^2 per letter
        let a = (t_linear(n, 1).unwrap().to_f64()) * t_linear(n, 2).unwrap().to_f64();
        let ambient_hs: f64 = a.iter().map(|x| x * x).sum();
        let ones_part = (1.0f64 / 25.0).powi(2);
        assert!((t12.hs_norm_sq() - (ambient_hs - ones_part)).abs() < 1e-14);
    }

    #[test]
    fn points_converge_along_constant_word() {
        let n = 3;
        let target = p(n, 1).to_f64();
        let mut prev = f64::INFINITY;
        for m in [1usize, 4, 8, 16] {
            let w = Word::repeated(n, 1, m).unwrap();
            let d = (point_of_word(&w, Coordinates::Euclidean).unwrap().to_f64() - &target).norm();
            assert!(d < prev);
            prev = d;
        }
        assert!(prev < 1e-4);
    }

    #[test]
    fn invalid_letters_rejected() {
        assert!(matches!(f_map(3, 4), Err(GasketError::InvalidLetter { .. })));
        assert!(matches!(t_map(3, 0), Err(GasketError::InvalidLetter { .. })));
        assert!(matches!(h_matrix(1, 1), Err(GasketError::InvalidDimension(1))));
    }
}
