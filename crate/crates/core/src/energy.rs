//! Level-`m` vertex sets, the graph energies
//! `E_m(u, v) = ((N+2)/N)^m Σ_{p ~_m q} (u(p) - u(q)) (v(p) - v(q))`,
//! harmonic extension through the `H_j` matrices, and the harmonic
//! embedding `Ψ`.
//!
//! Vertices are identified by exact coordinates. Every point `F_w(p_k)`
//! (`|w| = m`) has stored coordinates in `Z / (N 2^m)`, and every `S_w(p_k)`
//! in `Z / (N (N+2)^m)`, so a vertex is keyed by the integer numerators at
//! the level's common denominator.

use std::collections::HashMap;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_traits::Zero;

use crate::error::{GasketError, Result};
use crate::geometry::{h_matrix, rat, validate_n, Coordinates, RatMatrix, Rational, RationalVectorY, Word};
use crate::numeric::CompensatedSum;

/// Size guard for level constructions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LevelLimits {
    pub max_cells: u128,
}

impl Default for LevelLimits {
    fn default() -> Self {
        Self {
            max_cells: 2_000_000,
        }
    }
}

/// An exact vertex of `V_m`: integer numerators over the level denominator.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalVertex {
    numerators: Vec<i64>,
}

impl CanonicalVertex {
    pub fn numerators(&self) -> &[i64] {
        &self.numerators
    }
}

/// Vertex set `V_m` together with the cell structure `F_w(V_0)`, `|w| = m`.
#[derive(Debug, Clone)]
pub struct Level {
    n: usize,
    m: usize,
    coords: Coordinates,
    denominator: i64,
    vertices: Vec<CanonicalVertex>,
    /// `cells[c * N + k]` is the vertex index of `F_w(p_{k+1})` for the
    /// word `w` of lexicographic rank `c`.
    cells: Vec<usize>,
    index: HashMap<CanonicalVertex, usize>,
}

fn refinement_base(n: usize, coords: Coordinates) -> i64 {
    match coords {
        Coordinates::Euclidean => 2,
        Coordinates::Harmonic => n as i64 + 2,
    }
}

pub fn cell_count(n: usize, m: usize) -> u128 {
    (n as u128).saturating_pow(m as u32)
}

impl Level {
    /// Builds `V_m` in Euclidean (`F_w`) or harmonic (`S_w`) coordinates.
    pub fn build(n: usize, m: usize, coords: Coordinates, limits: &LevelLimits) -> Result<Self> {
        validate_n(n)?;
        let cells_needed = cell_count(n, m);
        if cells_needed > limits.max_cells {
            return Err(GasketError::ResourceGuard {
                what: "cells",
                requested: cells_needed,
                cap: limits.max_cells,
            });
        }
        let base = refinement_base(n, coords);
        let denominator = (base as i128).pow(m as u32) * n as i128;
        if denominator > (1i128 << 60) {
            return Err(GasketError::ResourceGuard {
                what: "level denominator",
                requested: denominator as u128,
                cap: 1u128 << 60,
            });
        }
        let mut level = Level {
            n,
            m,
            coords,
            denominator: denominator as i64,
            vertices: Vec::new(),
            cells: Vec::with_capacity(cells_needed as usize * n),
            index: HashMap::new(),
        };
        // p_k scaled by N: N e_k - (1, ..., 1)
        let root: Vec<Vec<i64>> = (0..n)
            .map(|k| (0..n).map(|i| if i == k { n as i64 - 1 } else { -1 }).collect())
            .collect();
        level.descend(&root, m);
        Ok(level)
    }

    fn descend(&mut self, cell: &[Vec<i64>], remaining: usize) {
        let n = self.n;
        if remaining == 0 {
            for point in cell {
                let key = CanonicalVertex {
                    numerators: point.clone(),
                };
                let next = self.vertices.len();
                let idx = *self.index.entry(key.clone()).or_insert(next);
                if idx == next {
                    self.vertices.push(key);
                }
                self.cells.push(idx);
            }
            return;
        }
        let base = refinement_base(n, self.coords);
        let total: Vec<i64> = (0..n).map(|i| cell.iter().map(|p| p[i]).sum()).collect();
        for j in 0..n {
            // child j: image of the cell under the j-th map, one level finer
            let child: Vec<Vec<i64>> = (0..n)
                .map(|k| {
                    (0..n)
                        .map(|i| {
                            if k == j {
                                cell[j][i] * base
                            } else {
                                match self.coords {
                                    Coordinates::Euclidean => cell[j][i] + cell[k][i],
                                    Coordinates::Harmonic => cell[j][i] + cell[k][i] + total[i],
                                }
                            }
                        })
                        .collect()
                })
                .collect();
            self.descend(&child, remaining - 1);
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn coordinates(&self) -> Coordinates {
        self.coords
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len() / self.n
    }

    pub fn vertices(&self) -> &[CanonicalVertex] {
        &self.vertices
    }

    /// Vertex indices of the cell of lexicographic rank `c`.
    pub fn cell(&self, c: usize) -> &[usize] {
        &self.cells[c * self.n..(c + 1) * self.n]
    }

    pub fn cells(&self) -> impl Iterator<Item = &[usize]> {
        self.cells.chunks(self.n)
    }

    pub fn vertex_position(&self, idx: usize) -> RationalVectorY {
        let d = Rational::from_integer(BigInt::from(self.denominator));
        let coords = self.vertices[idx]
            .numerators
            .iter()
            .map(|&a| Rational::from_integer(BigInt::from(a)) / &d)
            .collect();
        RationalVectorY::new(coords).expect("lattice points lie in Y")
    }

    pub fn vertex_position_f64(&self, idx: usize) -> Vec<f64> {
        let scale = std::f64::consts::FRAC_1_SQRT_2 / self.denominator as f64;
        self.vertices[idx]
            .numerators
            .iter()
            .map(|&a| a as f64 * scale)
            .collect()
    }

    /// Index of an exact point, if it is a vertex of this level.
    pub fn find(&self, point: &RationalVectorY) -> Option<usize> {
        let d = Rational::from_integer(BigInt::from(self.denominator));
        let mut numerators = Vec::with_capacity(self.n);
        for c in point.coords() {
            let scaled = c * &d;
            if !scaled.is_integer() {
                return None;
            }
            numerators.push(i64::try_from(scaled.to_integer()).ok()?);
        }
        self.index.get(&CanonicalVertex { numerators }).copied()
    }

    /// For each vertex of this level, its index in the finer level `fine`.
    pub fn embed_into(&self, fine: &Level) -> Result<Vec<usize>> {
        if fine.n != self.n || fine.coords != self.coords || fine.m < self.m {
            return Err(GasketError::LevelMismatch {
                form: self.m,
                function: fine.m,
            });
        }
        let factor = fine.denominator / self.denominator;
        self.vertices
            .iter()
            .map(|v| {
                let key = CanonicalVertex {
                    numerators: v.numerators.iter().map(|a| a * factor).collect(),
                };
                fine.index.get(&key).copied().ok_or(GasketError::Numerical(
                    "coarse vertex missing from finer level".into(),
                ))
            })
            .collect()
    }

    /// Edges `p ~_m q`: every intra-cell pair of every cell, as
    /// `(cell, k, l, vertex_k, vertex_l)` with `k < l` (0-based letters).
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, usize, usize, usize)> + '_ {
        let n = self.n;
        self.cells.chunks(n).enumerate().flat_map(move |(c, cell)| {
            (0..n).flat_map(move |k| ((k + 1)..n).map(move |l| (c, k, l, cell[k], cell[l])))
        })
    }

    /// Largest number of cells sharing one vertex pair (1 for every gasket).
    pub fn max_edge_multiplicity(&self) -> usize {
        let mut counts: HashMap<(usize, usize), usize> = HashMap::new();
        for (_, _, _, a, b) in self.edges() {
            *counts.entry((a.min(b), a.max(b))).or_default() += 1;
        }
        counts.values().copied().max().unwrap_or(0)
    }

    pub fn word_of_cell(&self, c: usize) -> Word {
        Word::from_index(self.n, self.m, c)
    }
}

/// A real function on `V_m`, indexed like [`Level::vertices`].
#[derive(Debug, Clone, PartialEq)]
pub struct VertexFunction {
    pub level: usize,
    pub values: Vec<f64>,
}

impl VertexFunction {
    pub fn new(level: usize, values: Vec<f64>) -> Self {
        Self { level, values }
    }

    pub fn constant(level: &Level, c: f64) -> Self {
        Self::new(level.m(), vec![c; level.vertex_count()])
    }

    /// Restriction `u|V_m` to a coarser level.
    pub fn restrict(&self, fine: &Level, coarse: &Level) -> Result<VertexFunction> {
        if self.level != fine.m() {
            return Err(GasketError::LevelMismatch {
                form: fine.m(),
                function: self.level,
            });
        }
        let map = coarse.embed_into(fine)?;
        Ok(VertexFunction::new(
            coarse.m(),
            map.iter().map(|&i| self.values[i]).collect(),
        ))
    }
}

/// The level-`m` energy form.
#[derive(Debug, Clone, Copy)]
pub struct EnergyForm<'a> {
    level: &'a Level,
    scale: f64,
}

impl<'a> EnergyForm<'a> {
    pub fn new(level: &'a Level) -> Self {
        let n = level.n() as f64;
        Self {
            level,
            scale: ((n + 2.0) / n).powi(level.m() as i32),
        }
    }

    pub fn level(&self) -> &'a Level {
        self.level
    }

    /// `((N+2)/N)^m`.
    pub fn scale(&self) -> f64 {
        self.scale
    }
}

fn check_level(form: &EnergyForm<'_>, u: &VertexFunction) -> Result<()> {
    if u.level != form.level.m() || u.values.len() != form.level.vertex_count() {
        return Err(GasketError::LevelMismatch {
            form: form.level.m(),
            function: u.level,
        });
    }
    Ok(())
}

/// `E_m(u, v)`, summed in word-lexicographic cell order with compensation.
pub fn energy(form: &EnergyForm<'_>, u: &VertexFunction, v: &VertexFunction) -> Result<f64> {
    check_level(form, u)?;
    check_level(form, v)?;
    let mut acc = CompensatedSum::new();
    for (_, _, _, a, b) in form.level.edges() {
        acc.add((u.values[a] - u.values[b]) * (v.values[a] - v.values[b]));
    }
    Ok(form.scale * acc.value())
}

pub fn energy_sq(form: &EnergyForm<'_>, u: &VertexFunction) -> Result<f64> {
    energy(form, u, u)
}

fn h_float(n: usize) -> Vec<DMatrix<f64>> {
    (1..=n)
        .map(|j| h_matrix(n, j).expect("valid letter").to_f64())
        .collect()
}

fn apply_rows(h: &DMatrix<f64>, b: &[f64]) -> Vec<f64> {
    (0..b.len())
        .map(|r| (0..b.len()).map(|c| h[(r, c)] * b[c]).sum())
        .collect()
}

/// Values of the harmonic function with the given boundary values on every
/// cell `F_w(V_0)`, `|w| = m`, in lexicographic order: `H_{w_m} ... H_{w_1} b`.
pub fn harmonic_cell_values(n: usize, boundary: &[f64], m: usize) -> Result<Vec<Vec<f64>>> {
    validate_n(n)?;
    if boundary.len() != n {
        return Err(GasketError::DimensionMismatch {
            expected: n,
            got: boundary.len(),
        });
    }
    let hs = h_float(n);
    let mut layer = vec![boundary.to_vec()];
    for _ in 0..m {
        // appending a letter: cell wj gets H_j applied to the values on cell w
        layer = layer
            .iter()
            .flat_map(|vals| hs.iter().map(move |h| apply_rows(h, vals)))
            .collect();
    }
    Ok(layer)
}

/// Harmonic extension of boundary values on `V_0` to all of `V_m`.
pub fn harmonic_extend(level: &Level, boundary: &[f64]) -> Result<VertexFunction> {
    let cells = harmonic_cell_values(level.n(), boundary, level.m())?;
    scatter(level, &cells)
}

fn scatter(level: &Level, cells: &[Vec<f64>]) -> Result<VertexFunction> {
    let mut values = vec![f64::NAN; level.vertex_count()];
    let scale = cells
        .iter()
        .flat_map(|c| c.iter())
        .fold(0.0f64, |a, b| a.max(b.abs()))
        .max(1.0);
    for (c, vals) in cells.iter().enumerate() {
        for (k, &idx) in level.cell(c).iter().enumerate() {
            if values[idx].is_nan() {
                values[idx] = vals[k];
            } else if (values[idx] - vals[k]).abs() > 1e-9 * scale {
                return Err(GasketError::Numerical(format!(
                    "harmonic extension disagrees at shared vertex {idx}"
                )));
            }
        }
    }
    Ok(VertexFunction::new(level.m(), values))
}

/// Extends `u` from `coarse` (level `m`) to `fine` (level `m+1`) cell by cell
/// with the `H_j` matrices: the energy-minimising extension.
pub fn extend_one_level(coarse: &Level, fine: &Level, u: &VertexFunction) -> Result<VertexFunction> {
    let n = coarse.n();
    if fine.m() != coarse.m() + 1 || u.level != coarse.m() {
        return Err(GasketError::LevelMismatch {
            form: coarse.m(),
            function: u.level,
        });
    }
    let hs = h_float(n);
    let mut cells = Vec::with_capacity(fine.cell_count());
    for cell in coarse.cells() {
        let b: Vec<f64> = cell.iter().map(|&i| u.values[i]).collect();
        for h in &hs {
            cells.push(apply_rows(h, &b));
        }
    }
    scatter(fine, &cells)
}

/// The harmonic embedding `Ψ = ((ψ_1, ..., ψ_N) - (1, ..., 1)/N)/sqrt(2)` on
/// `V_m`, computed exactly. Returns the Euclidean level and `Ψ(p)` for each
/// of its vertices (as stored, `sqrt(2)`-scaled, coordinates).
pub fn psi_embed(n: usize, m: usize, limits: &LevelLimits) -> Result<(Level, Vec<RationalVectorY>)> {
    let level = Level::build(n, m, Coordinates::Euclidean, limits)?;
    let hs: Vec<RatMatrix> = (1..=n).map(|j| h_matrix(n, j)).collect::<Result<_>>()?;
    let mut out: Vec<Option<RationalVectorY>> = vec![None; level.vertex_count()];
    let inv_n = rat(1, n as i64);
    let mut stack = vec![(0usize, 0usize, RatMatrix::identity(n))];
    while let Some((depth, rank, hw)) = stack.pop() {
        if depth == m {
            for (k, &idx) in level.cell(rank).iter().enumerate() {
                if out[idx].is_none() {
                    // ψ_i(F_w p_k) = (H_w e_i)_k, i.e. row k of H_w
                    let coords = hw.row(k).iter().map(|x| x - &inv_n).collect();
                    out[idx] = Some(RationalVectorY::new(coords)?);
                }
            }
            continue;
        }
        for (j, h) in hs.iter().enumerate().rev() {
            stack.push((depth + 1, rank * n + j, h * &hw));
        }
    }
    let psi = out
        .into_iter()
        .map(|p| p.ok_or_else(|| GasketError::Numerical("vertex without a cell".into())))
        .collect::<Result<Vec<_>>>()?;
    Ok((level, psi))
}

/// `Σ_j ψ_j(p) - 1` for a `Ψ` value in stored coordinates (always zero).
pub fn psi_partition_defect(psi: &RationalVectorY) -> Rational {
    let n = psi.dim();
    psi.coords()
        .iter()
        .fold(Rational::zero(), |acc, c| acc + c + rat(1, n as i64))
        - rat(1, 1)
}

/// Level invariance of harmonic energy and monotonicity of `E_m` along restrictions.
#[derive(Debug, Clone, PartialEq)]
pub struct InvarianceReport {
    pub samples: usize,
    pub max_level: usize,
    /// `max |E_m(h) - E_0(h)| / E_0(h)` over samples and `m <= max_level`.
    pub max_relative_error: f64,
    /// `max (E_m(u|V_m) - E_{m+1}(u))` over random `u` on `V_{m+1}`; nonpositive when monotone.
    pub max_monotonicity_excess: f64,
}

pub fn harmonic_invariance_check(n: usize, max_level: usize, samples: usize, seed: u64) -> Result<InvarianceReport> {
    use rand::{Rng, SeedableRng};
    validate_n(n)?;
    let limits = LevelLimits::default();
    let levels: Vec<Level> = (0..=max_level)
        .map(|m| Level::build(n, m, Coordinates::Euclidean, &limits))
        .collect::<Result<_>>()?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut max_rel = 0.0f64;
    for _ in 0..samples {
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let e0 = energy_sq(&EnergyForm::new(&levels[0]), &VertexFunction::new(0, b.clone()))?;
        if e0 == 0.0 {
            continue;
        }
        for l in &levels[1..] {
            let e = energy_sq(&EnergyForm::new(l), &harmonic_extend(l, &b)?)?;
            max_rel = max_rel.max(((e - e0) / e0).abs());
        }
    }
    let mut excess = f64::NEG_INFINITY;
    for m in 0..max_level {
        let (coarse, fine) = (&levels[m], &levels[m + 1]);
        let form_c = EnergyForm::new(coarse);
        let form_f = EnergyForm::new(fine);
        for _ in 0..samples {
            let u = VertexFunction::new(m + 1, (0..fine.vertex_count()).map(|_| rng.gen_range(-1.0..1.0)).collect());
            let ec = energy_sq(&form_c, &u.restrict(fine, coarse)?)?;
            let ef = energy_sq(&form_f, &u)?;
            excess = excess.max(ec - ef);
        }
    }
    Ok(InvarianceReport {
        samples,
        max_level,
        max_relative_error: max_rel,
        max_monotonicity_excess: excess,
    })
}

/// Exact check of `Ψ(F_w p_k) = S_w p_k` on `V_m` and of `Ψ ∘ F_j = S_j ∘ Ψ` on `V_{m-1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConjugacyReport {
    pub level: usize,
    pub vertices: usize,
    pub checks: usize,
    pub mismatches: usize,
}

pub fn conjugacy_check(n: usize, m: usize) -> Result<ConjugacyReport> {
    let limits = LevelLimits::default();
    let (level, psi) = psi_embed(n, m, &limits)?;
    let mut checks = 0;
    let mut mismatches = 0;
    for c in 0..level.cell_count() {
        let s = crate::geometry::s_word(&level.word_of_cell(c))?;
        for k in 1..=n {
            checks += 1;
            if psi[level.cell(c)[k - 1]] != s.apply(&RationalVectorY::vertex(n, k)) {
                mismatches += 1;
            }
        }
    }
    if m > 0 {
        let (coarse, psi_c) = psi_embed(n, m - 1, &limits)?;
        for j in 1..=n {
            let f = crate::geometry::f_map(n, j)?;
            let s = crate::geometry::s_map(n, j)?;
            for (x, px) in psi_c.iter().enumerate() {
                checks += 1;
                let image = level.find(&f.apply(&coarse.vertex_position(x)));
                match image {
                    Some(i) if psi[i] == s.apply(px) => {}
                    _ => mismatches += 1,
                }
            }
        }
    }
    Ok(ConjugacyReport {
        level: m,
        vertices: level.vertex_count(),
        checks,
        mismatches,
    })
}
