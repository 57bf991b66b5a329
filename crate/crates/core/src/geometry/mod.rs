//! Exact simplex geometry in `Y`, the `F`/`S`/`T`/`H` map families, words,
//! and the plane `P`.

mod maps;
mod operator;
mod plane;
mod vector;
mod word;

pub use maps::{
    compose_word, f_map, f_word, h_matrix, h_word, point_of_word, s_map, s_map_direct, s_word,
    t_linear, t_map, t_word, t_word_exact, AffineMapY, ComposedMap, Coordinates, Family,
    FloatAffineY,
};
pub use operator::{OperatorY, YBasis};
pub use plane::{symmetry_transform, PlaneP, VertexPermutation};
pub use vector::{rat, rat_to_f64, RatMatrix, Rational, RationalVectorY};
pub use word::Word;

use crate::error::{GasketError, Result};

pub fn validate_n(n: usize) -> Result<()> {
    if n < 2 {
        Err(GasketError::InvalidDimension(n))
    } else {
        Ok(())
    }
}

/// The vertices `p_1, ..., p_N` of the unit-edge regular simplex in `Y`.
pub fn simplex_vertices(n: usize) -> Result<Vec<RationalVectorY>> {
    validate_n(n)?;
    Ok((1..=n).map(|j| RationalVectorY::vertex(n, j)).collect())
}

/// `max |((N+2)/N) Σ_j T_j T_j^t - I|` over entries, in the basis of `Y`.
pub fn partition_defect(n: usize) -> Result<f64> {
    validate_n(n)?;
    let mut acc = nalgebra::DMatrix::<f64>::zeros(n - 1, n - 1);
    for j in 1..=n {
        let t = t_map(n, j)?;
        acc += t.matrix() * t.matrix().transpose();
    }
    acc *= (n as f64 + 2.0) / n as f64;
    Ok((acc - nalgebra::DMatrix::<f64>::identity(n - 1, n - 1)).amax())
}

/// `|T_j|²_HS` for `j = 1..=N`; each equals `(N-1)/(N+2)`.
pub fn hs_norms_sq(n: usize) -> Result<Vec<f64>> {
    validate_n(n)?;
    (1..=n).map(|j| Ok(t_map(n, j)?.hs_norm_sq())).collect()
}
