//! Level-`m` generator with respect to the Kusuoka measure, its spectral
//! heat kernel and Gaussian-fit diagnostics in the geodesic distance.
//!
//! Masses split each cell's `ν` mass equally among its `N` vertices; each
//! cell edge carries conductance `((N+2)/N)^m`, so the conductance quadratic
//! form is exactly `E_m`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::energy::{Level, LevelLimits, VertexFunction};
use crate::error::{GasketError, Result};
use crate::geodesic::GeodesicGraph;
use crate::geometry::{Coordinates, Word};
use crate::kusuoka::KusuokaMeasure;
use crate::numeric::{fit_line, CompensatedSum};

#[derive(Debug, Clone)]
pub struct DiscreteLaplacian {
    level: Level,
    masses: DVector<f64>,
    conductance: f64,
    /// `K` with `f^t K f = Σ c_pq (f(p) - f(q))²`.
    stiffness: DMatrix<f64>,
}

/// Vertex count above which the dense eigensolver is refused.
pub const MAX_DENSE_VERTICES: usize = 4000;

pub fn build_laplacian(n: usize, m: usize) -> Result<DiscreteLaplacian> {
    DiscreteLaplacian::build(n, m, &LevelLimits::default())
}

impl DiscreteLaplacian {
    pub fn build(n: usize, m: usize, limits: &LevelLimits) -> Result<Self> {
        let level = Level::build(n, m, Coordinates::Harmonic, limits)?;
        let v = level.vertex_count();
        if v > MAX_DENSE_VERTICES {
            return Err(GasketError::ResourceGuard {
                what: "laplacian vertices",
                requested: v as u128,
                cap: MAX_DENSE_VERTICES as u128,
            });
        }
        let measure = KusuokaMeasure::new(n)?;
        let mut sums = vec![CompensatedSum::new(); v];
        for (c, w) in Word::all(n, m).enumerate() {
            let share = measure.nu_mass(&w)? / n as f64;
            for &p in level.cell(c) {
                sums[p].add(share);
            }
        }
        let masses = DVector::from_iterator(v, sums.iter().map(CompensatedSum::value));
        let conductance = ((n as f64 + 2.0) / n as f64).powi(m as i32);
        let mut stiffness = DMatrix::zeros(v, v);
        for (_, _, _, a, b) in level.edges() {
            stiffness[(a, a)] += conductance;
            stiffness[(b, b)] += conductance;
            stiffness[(a, b)] -= conductance;
            stiffness[(b, a)] -= conductance;
        }
        Ok(Self {
            level,
            masses,
            conductance,
            stiffness,
        })
    }

    pub fn level(&self) -> &Level {
        &self.level
    }

    /// `ν_m(p)`.
    pub fn masses(&self) -> &DVector<f64> {
        &self.masses
    }

    /// `((N+2)/N)^m`.
    pub fn conductance(&self) -> f64 {
        self.conductance
    }

    pub fn stiffness(&self) -> &DMatrix<f64> {
        &self.stiffness
    }

    /// `L_m = -M^{-1} K`, i.e. `(L f)(p) = ν_m(p)^{-1} Σ_q c_pq (f(q) - f(p))`.
    pub fn generator(&self) -> DMatrix<f64> {
        let mut l = -self.stiffness.clone();
        for (r, mut row) in l.row_iter_mut().enumerate() {
            row /= self.masses[r];
        }
        l
    }

    pub fn quadratic_form(&self, f: &VertexFunction) -> f64 {
        let x = DVector::from_column_slice(&f.values);
        x.dot(&(&self.stiffness * &x))
    }

    /// Solves `K φ = λ M φ`.
    pub fn decompose(&self) -> SpectralDecomposition {
        let inv_sqrt = self.masses.map(|m| 1.0 / m.sqrt());
        let v = self.masses.len();
        let a = DMatrix::from_fn(v, v, |r, c| inv_sqrt[r] * self.stiffness[(r, c)] * inv_sqrt[c]);
        let eig = SymmetricEigen::new(a);
        let mut order: Vec<usize> = (0..v).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let eigenvalues = DVector::from_iterator(v, order.iter().map(|&i| eig.eigenvalues[i]));
        let mut eigenvectors = DMatrix::zeros(v, v);
        for (col, &i) in order.iter().enumerate() {
            let mut phi = eig.eigenvectors.column(i).component_mul(&inv_sqrt);
            // fix signs so that the largest-magnitude entry is positive
            let pivot = phi.iter().copied().max_by(|a, b| a.abs().total_cmp(&b.abs())).unwrap_or(1.0);
            if pivot < 0.0 {
                phi = -phi;
            }
            eigenvectors.set_column(col, &phi);
        }
        SpectralDecomposition {
            eigenvalues,
            eigenvectors,
            masses: self.masses.clone(),
        }
    }
}

/// Eigenpairs of `-L_m`, eigenvectors orthonormal in `l²(ν_m)`.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: DVector<f64>,
    /// Column `k` is `φ_k`.
    pub eigenvectors: DMatrix<f64>,
    pub masses: DVector<f64>,
}

impl SpectralDecomposition {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Smallest nonzero eigenvalue.
    pub fn spectral_gap(&self) -> f64 {
        self.eigenvalues.get(1).copied().unwrap_or(0.0)
    }

    /// `L_m` rebuilt as `-Φ Λ Φ^t M`.
    pub fn rebuild_generator(&self) -> DMatrix<f64> {
        let phi = &self.eigenvectors;
        let lam = DMatrix::from_diagonal(&self.eigenvalues);
        let m = DMatrix::from_diagonal(&self.masses);
        -(phi * lam * phi.transpose() * m)
    }

    /// `[p_m(t, x, y)]_{x,y}`.
    pub fn kernel_matrix(&self, t: f64) -> Result<DMatrix<f64>> {
        check_time(t)?;
        let decay = self.eigenvalues.map(|l| (-l.max(0.0) * t).exp());
        let scaled = &self.eigenvectors * DMatrix::from_diagonal(&decay);
        Ok(scaled * self.eigenvectors.transpose())
    }
}

fn check_time(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(GasketError::Domain {
            value: t,
            domain: "t > 0",
        })
    }
}

/// `p_m(t, x, y) = Σ_k e^{-λ_k t} φ_k(x) φ_k(y)`.
pub fn heat_kernel(decomposition: &SpectralDecomposition, t: f64, x: usize, y: usize) -> Result<f64> {
    check_time(t)?;
    let phi = &decomposition.eigenvectors;
    let mut acc = CompensatedSum::new();
    for k in 0..decomposition.len() {
        let lambda = decomposition.eigenvalues[k].max(0.0);
        acc.add((-lambda * t).exp() * phi[(x, k)] * phi[(y, k)]);
    }
    Ok(acc.value())
}

/// One `(t, x, y)` sample of the Gaussian fit.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSample {
    pub t: f64,
    pub x: usize,
    pub y: usize,
    pub kernel: f64,
    pub distance: f64,
    /// `ν_m(B(x, √t))` over vertices within geodesic distance `√t`.
    pub ball_mass: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianFitReport {
    pub n: usize,
    pub m: usize,
    pub samples: Vec<KernelSample>,
    /// Number of samples with `d²/t` inside the window.
    pub window_samples: usize,
    pub window: (f64, f64),
    /// True when the window held fewer than two usable samples.
    pub empty_fit: bool,
    /// Slope of `log p` against `d²/t` (negative for decay).
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Candidate constants of `c_1/ν(B) e^{-c_2 d²/t} ≤ p ≤ ...` style bounds,
    /// with `c_2 = c_4 = -slope`: `c_1 = max`, `c_3 = min` of
    /// `p ν(B) e^{c_2 d²/t}` over the window.
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    /// The same regression for `log(p ν(B(x, √t)))`.
    pub normalized_slope: f64,
    pub normalized_r_squared: f64,
    /// Far-regime pairs (`d²/t ≥ 5` at the smaller time) for which doubling
    /// `t` increased `p`, and the number of such pairs examined.
    pub doubling_increases: usize,
    pub doubling_checked: usize,
}

/// Regression of `log p_m(t, x, y)` on `d_*(x, y)²/t` for the given times
/// and vertex pairs, restricted to the window `1 ≤ d²/t ≤ 10`.
pub fn gaussian_fit(
    laplacian: &DiscreteLaplacian,
    graph: &GeodesicGraph,
    t_grid: &[f64],
    pairs: &[(usize, usize)],
) -> Result<GaussianFitReport> {
    let level = laplacian.level();
    if graph.n() != level.n() || graph.m() != level.m() {
        return Err(GasketError::LevelMismatch {
            form: level.m(),
            function: graph.m(),
        });
    }
    let window = (1.0, 10.0);
    let decomposition = laplacian.decompose();
    let distances = graph.distance_matrix();
    let masses = laplacian.masses();
    let ball = |x: usize, r: f64| -> f64 {
        distances[x]
            .iter()
            .zip(masses.iter())
            .filter(|(d, _)| **d < r)
            .map(|(_, m)| *m)
            .collect::<CompensatedSum>()
            .value()
    };
    let mut samples = Vec::new();
    for &t in t_grid {
        let kernel = decomposition.kernel_matrix(t)?;
        for &(x, y) in pairs {
            samples.push(KernelSample {
                t,
                x,
                y,
                kernel: kernel[(x, y)],
                distance: distances[x][y],
                ball_mass: ball(x, t.sqrt()),
            });
        }
    }
    let in_window: Vec<&KernelSample> = samples
        .iter()
        .filter(|s| {
            let ratio = s.distance * s.distance / s.t;
            s.kernel > 0.0 && ratio >= window.0 && ratio <= window.1
        })
        .collect();
    let xs: Vec<f64> = in_window.iter().map(|s| s.distance * s.distance / s.t).collect();
    let ys: Vec<f64> = in_window.iter().map(|s| s.kernel.ln()).collect();
    let fit = fit_line(&xs, &ys);
    let (slope, intercept, r_squared) = fit.as_ref().map_or((f64::NAN, f64::NAN, f64::NAN), |f| (f.slope, f.intercept, f.r_squared));
    let yn: Vec<f64> = in_window.iter().map(|s| (s.kernel * s.ball_mass).ln()).collect();
    let normalized = fit_line(&xs, &yn);
    let c2 = -slope;
    let ratios: Vec<f64> = in_window
        .iter()
        .zip(&xs)
        .map(|(s, x)| s.kernel * s.ball_mass * (c2 * x).exp())
        .collect();
    let c1 = ratios.iter().copied().fold(f64::NAN, f64::max);
    let c3 = ratios.iter().copied().fold(f64::NAN, f64::min);

    // samples are laid out time-major: index = time_index * pairs + pair_index
    let mut doubling_increases = 0;
    let mut doubling_checked = 0;
    for (ti, &t) in t_grid.iter().enumerate() {
        let Some(later) = t_grid.iter().position(|&u| u == 2.0 * t) else { continue };
        for pi in 0..pairs.len() {
            let (now, next) = (&samples[ti * pairs.len() + pi], &samples[later * pairs.len() + pi]);
            if now.distance * now.distance / t >= 5.0 {
                doubling_checked += 1;
                if next.kernel > now.kernel {
                    doubling_increases += 1;
                }
            }
        }
    }
    Ok(GaussianFitReport {
        n: level.n(),
        m: level.m(),
        window_samples: in_window.len(),
        samples,
        window,
        empty_fit: fit.is_none(),
        slope,
        intercept,
        r_squared,
        c1,
        c2,
        c3,
        c4: c2,
        normalized_slope: normalized.map_or(f64::NAN, |f| f.slope),
        normalized_r_squared: normalized.map_or(f64::NAN, |f| f.r_squared),
        doubling_increases,
        doubling_checked,
    })
}

/// Dyadic times `2^-k`, `k = lo..=hi`, in increasing order.
pub fn dyadic_times(lo: i32, hi: i32) -> Vec<f64> {
    (lo..=hi).rev().map(|k| 0.5f64.powi(k)).collect()
}

/// Structural properties of the discrete heat kernel at one level.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatReport {
    pub n: usize,
    pub m: usize,
    pub vertices: usize,
    pub lambda0: f64,
    pub min_eigenvalue: f64,
    pub spectral_gap: f64,
    /// `max |φ_0 - 1|`.
    pub constant_mode_error: f64,
    /// `|L - (-ΦΛΦ^t M)| / |L|` in Frobenius norm.
    pub rebuild_error: f64,
    pub times: [f64; 2],
    /// `max |p_t(x, y) - p_t(y, x)|`.
    pub symmetry: f64,
    /// `max |Σ_z p_s(x, z) p_t(z, y) ν(z) - p_{s+t}(x, y)|`.
    pub semigroup: f64,
    /// `max |Σ_y p_t(x, y) ν(y) - 1|`.
    pub conservation: f64,
    pub min_kernel: f64,
    /// Time `20/λ_1` used for the long-time limit.
    pub late_time: f64,
    /// `max |p(late, x, y) - 1|`.
    pub long_time: f64,
}

pub fn heat_property_check(lap: &DiscreteLaplacian, s: f64, t: f64) -> Result<HeatReport> {
    let dec = lap.decompose();
    let v = lap.level().vertex_count();
    let masses = lap.masses();
    let gen = lap.generator();
    let rebuild_error = (dec.rebuild_generator() - &gen).norm() / gen.norm();
    let phi0 = dec.eigenvectors.column(0);
    let sign = if phi0.sum() < 0.0 { -1.0 } else { 1.0 };
    let constant_mode_error = phi0.iter().map(|x| (sign * x - 1.0).abs()).fold(0.0, f64::max);
    let ps = dec.kernel_matrix(s)?;
    let pt = dec.kernel_matrix(t)?;
    let pst = dec.kernel_matrix(s + t)?;
    let weighted = DMatrix::from_fn(v, v, |z, y| pt[(z, y)] * masses[z]);
    let composed = &ps * weighted;
    let mut symmetry = 0.0f64;
    let mut semigroup = 0.0f64;
    let mut conservation = 0.0f64;
    let mut min_kernel = f64::INFINITY;
    for kernel in [&ps, &pt] {
        for x in 0..v {
            let mass: CompensatedSum = (0..v).map(|y| kernel[(x, y)] * masses[y]).collect();
            conservation = conservation.max((mass.value() - 1.0).abs());
            for y in 0..v {
                symmetry = symmetry.max((kernel[(x, y)] - kernel[(y, x)]).abs());
                min_kernel = min_kernel.min(kernel[(x, y)]);
            }
        }
    }
    for x in 0..v {
        for y in 0..v {
            semigroup = semigroup.max((composed[(x, y)] - pst[(x, y)]).abs());
        }
    }
    let late_time = 20.0 / dec.spectral_gap();
    let late = dec.kernel_matrix(late_time)?;
    let long_time = late.iter().map(|p| (p - 1.0).abs()).fold(0.0, f64::max);
    Ok(HeatReport {
        n: lap.level().n(),
        m: lap.level().m(),
        vertices: v,
        lambda0: dec.eigenvalues[0],
        min_eigenvalue: dec.eigenvalues.min(),
        spectral_gap: dec.spectral_gap(),
        constant_mode_error,
        rebuild_error,
        times: [s, t],
        symmetry,
        semigroup,
        conservation,
        min_kernel,
        late_time,
        long_time,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::{energy_sq, EnergyForm};
    use crate::geometry::VertexPermutation;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn masses_and_form() {
        let lap = build_laplacian(3, 3).unwrap();
        assert!((lap.masses().sum() - 1.0).abs() < 1e-12);
        let gen = lap.generator();
        for r in 0..gen.nrows() {
            assert!(gen.row(r).sum().abs() < 1e-9 * gen[(r, r)].abs());
        }
        let form = EnergyForm::new(lap.level());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let f = VertexFunction::new(3, (0..lap.level().vertex_count()).map(|_| rng.gen_range(-1.0..1.0)).collect());
            let e = energy_sq(&form, &f).unwrap();
            assert!((lap.quadratic_form(&f) - e).abs() <= 1e-10 * e);
        }
    }

    #[test]
    fn masses_are_symmetric() {
        let n = 3;
        let lap = build_laplacian(n, 1).unwrap();
        let level = lap.level();
        for image in [[2, 3, 1], [2, 1, 3], [3, 2, 1]] {
            let perm = crate::geometry::symmetry_transform(n, image[0], image[1]).unwrap();
            let perm: &VertexPermutation = &perm;
            for v in 0..level.vertex_count() {
                let moved = level.find(&perm.apply(&level.vertex_position(v))).unwrap();
                assert!((lap.masses()[v] - lap.masses()[moved]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn spectral_properties() {
        let lap = build_laplacian(3, 2).unwrap();
        let dec = lap.decompose();
        assert!(dec.eigenvalues[0].abs() < 1e-10);
        assert!(dec.eigenvalues.iter().all(|&l| l >= -1e-10));
        let phi0 = dec.eigenvectors.column(0);
        assert!(phi0.iter().all(|v| (v - 1.0).abs() < 1e-10));
        let gen = lap.generator();
        let rel = (dec.rebuild_generator() - &gen).norm() / gen.norm();
        assert!(rel < 1e-8);
        let v = lap.level().vertex_count();
        let (s, t) = (0.01, 0.03);
        let ps = dec.kernel_matrix(s).unwrap();
        let pt = dec.kernel_matrix(t).unwrap();
        let pst = dec.kernel_matrix(s + t).unwrap();
        for x in 0..v {
            let mass: f64 = (0..v).map(|y| ps[(x, y)] * lap.masses()[y]).sum();
            assert!((mass - 1.0).abs() < 1e-10);
            for y in 0..v {
                assert!((ps[(x, y)] - ps[(y, x)]).abs() < 1e-10);
                assert!(ps[(x, y)] > -1e-12);
                let composed: f64 = (0..v).map(|z| ps[(x, z)] * pt[(z, y)] * lap.masses()[z]).sum();
                assert!((composed - pst[(x, y)]).abs() < 1e-8);
            }
        }
        let late = 20.0 / dec.spectral_gap();
        assert!((heat_kernel(&dec, late, 0, v - 1).unwrap() - 1.0).abs() < 1e-8);
        assert!(heat_kernel(&dec, 0.0, 0, 0).is_err());
    }

    #[test]
    fn property_report() {
        let r = heat_property_check(&build_laplacian(3, 2).unwrap(), 0.01, 0.03).unwrap();
        assert_eq!(r.vertices, 15);
        assert!(r.lambda0.abs() < 1e-10 && r.constant_mode_error < 1e-10);
        assert!(r.symmetry < 1e-10 && r.semigroup < 1e-8 && r.conservation < 1e-10);
        assert!(r.min_kernel > 0.0 && r.long_time < 1e-8);
    }

    #[test]
    fn gaussian_report() {
        let lap = build_laplacian(3, 3).unwrap();
        let graph = crate::geodesic::build_geodesic_graph(3, 3, 11).unwrap();
        let v = lap.level().vertex_count();
        let pairs: Vec<(usize, usize)> = (0..v).flat_map(|x| ((x + 1)..v).map(move |y| (x, y))).collect();
        let report = gaussian_fit(&lap, &graph, &dyadic_times(2, 12), &pairs).unwrap();
        assert_eq!(report.samples.len(), 11 * pairs.len());
        assert!(!report.empty_fit && report.window_samples > 0);
        assert!(report.slope < 0.0);
        assert!(report.r_squared.is_finite());
        assert!(report.doubling_checked > 0);
        let none = gaussian_fit(&lap, &graph, &[1e3], &pairs[..3]).unwrap();
        assert!(none.empty_fit && none.r_squared.is_nan());
        let other = crate::geodesic::build_geodesic_graph(3, 2, 11).unwrap();
        assert!(gaussian_fit(&lap, &other, &[0.1], &pairs).is_err());
    }
}
