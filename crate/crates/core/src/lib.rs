//! Harmonic N-Sierpinski gaskets.
//!
//! The crate builds the harmonic gasket `X_N ⊂ Y = {x ∈ R^N : Σ x_j = 0}`
//! from its affine maps `S_j`, the Kusuoka measure `ν` on words and the
//! normalised products `Z_m(w) = T_w T_w^t / |T_w|²_HS`, the de Rham curve
//! `Γ` joining `p_1` and `p_2`, shortest paths made of images of `Γ`, and a
//! level-`m` heat kernel for the Kusuoka measure.
//!
//! | module | contents |
//! |---|---|
//! | [`geometry`] | exact vertices, words, `F_j`, `S_j`, `T_j`, `H_j`, the plane `P` |
//! | [`energy`] | vertex sets `V_m`, graph energies, harmonic extension, `Ψ` |
//! | [`kusuoka`] | cylinder masses, `Z_m`, word sampling, energy/metric identity |
//! | [`derham`] | corner cutting, `Γ` polylines, `g(t)`, Hölder estimates, `Υ` |
//! | [`geodesic`] | cell arcs, the geodesic graph, shortest paths, length integrals |
//! | [`heat`] | discrete Laplacian, heat kernel, Gaussian diagnostics |

pub mod derham;
pub mod energy;
mod error;
pub mod geodesic;
pub mod geometry;
pub mod heat;
pub mod kusuoka;
pub mod numeric;

pub use error::{GasketError, Result};

/// Library version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub use geometry::{OperatorY, PlaneP, RationalVectorY, Word};
