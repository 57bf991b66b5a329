//! Kusuoka measure on words and the normalised products
//! `Z_m(w) = T_w T_w^t / |T_w|²_HS`.
//!
//! Cylinder masses are `ν(wΣ) = ((N+2)/N)^{|w|} |T_w|²_HS / (N-1)`. Long
//! products are kept as `T_w = exp(log_scale) * unit` with `|unit|_HS = 1`,
//! which leaves `Z_m` untouched and keeps masses representable as logs.

use nalgebra::{DMatrix, DVector};
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::energy::{energy_sq, EnergyForm, Level, LevelLimits, VertexFunction};
use crate::error::{GasketError, Result};
use crate::geometry::{
    rat, t_map, t_word_exact, validate_n, Coordinates, OperatorY, RatMatrix, Rational, RationalVectorY,
    Word, YBasis,
};
use crate::numeric::CompensatedSum;

pub const DEFAULT_MAX_DEPTH: usize = 200;

/// `T_w` with its Hilbert-Schmidt scale factored out.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledProduct {
    pub unit: DMatrix<f64>,
    pub log_scale: f64,
    pub len: usize,
}

impl ScaledProduct {
    fn identity(n: usize) -> Self {
        let id = DMatrix::identity(n - 1, n - 1);
        let hs = ((n - 1) as f64).sqrt();
        Self {
            unit: id / hs,
            log_scale: hs.ln(),
            len: 0,
        }
    }

    fn times(&self, t: &DMatrix<f64>) -> Self {
        let raw = &self.unit * t;
        let hs = raw.norm();
        Self {
            unit: raw / hs,
            log_scale: self.log_scale + hs.ln(),
            len: self.len + 1,
        }
    }

    /// `ln |T_w|²_HS`.
    pub fn log_hs_sq(&self) -> f64 {
        2.0 * self.log_scale
    }
}

/// Cylinder mass of a word.
#[derive(Debug, Clone, PartialEq)]
pub struct CylinderMass {
    pub word: Word,
    pub mass: f64,
}

/// `Z_m(w)` with convergence diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricApprox {
    pub word: Word,
    pub z: OperatorY,
    pub trace: f64,
    /// `|Z² - Z|_F`.
    pub idempotency_residual: f64,
    /// Eigenvalues in decreasing order.
    pub eigenvalues: Vec<f64>,
}

impl MetricApprox {
    /// Second-largest eigenvalue (0 for `N = 2`).
    pub fn second_eigenvalue(&self) -> f64 {
        self.eigenvalues.get(1).copied().unwrap_or(0.0)
    }
}

#[derive(Debug, Clone)]
pub struct KusuokaMeasure {
    n: usize,
    basis: YBasis,
    t: Vec<DMatrix<f64>>,
    max_depth: usize,
}

impl KusuokaMeasure {
    pub fn new(n: usize) -> Result<Self> {
        validate_n(n)?;
        let t = (1..=n)
            .map(|j| t_map(n, j).map(OperatorY::into_matrix))
            .collect::<Result<_>>()?;
        Ok(Self {
            n,
            basis: YBasis::new(n),
            t,
            max_depth: DEFAULT_MAX_DEPTH,
        })
    }

    pub fn with_max_depth(mut self, max_depth: usize) -> Self {
        self.max_depth = max_depth;
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn basis(&self) -> &YBasis {
        &self.basis
    }

    /// `T_j` in the basis of `Y` (1-based letter).
    pub fn t(&self, j: u8) -> &DMatrix<f64> {
        &self.t[j as usize - 1]
    }

    fn check_word(&self, word: &Word) -> Result<()> {
        if word.n() != self.n {
            return Err(GasketError::DimensionMismatch {
                expected: self.n,
                got: word.n(),
            });
        }
        if word.len() > self.max_depth {
            return Err(GasketError::DepthLimit {
                len: word.len(),
                limit: self.max_depth,
            });
        }
        Ok(())
    }

    pub fn product(&self, word: &Word) -> Result<ScaledProduct> {
        self.check_word(word)?;
        Ok(word
            .letters()
            .iter()
            .fold(ScaledProduct::identity(self.n), |acc, &l| acc.times(self.t(l))))
    }

    pub fn extend(&self, prefix: &ScaledProduct, letter: u8) -> ScaledProduct {
        prefix.times(self.t(letter))
    }

    fn log_mass_of(&self, p: &ScaledProduct) -> f64 {
        let nf = self.n as f64;
        -(nf - 1.0).ln() + p.len as f64 * ((nf + 2.0) / nf).ln() + p.log_hs_sq()
    }

    pub fn log_nu_mass(&self, word: &Word) -> Result<f64> {
        Ok(self.log_mass_of(&self.product(word)?))
    }

    /// `ν(wΣ)`; the empty word has mass 1.
    pub fn nu_mass(&self, word: &Word) -> Result<f64> {
        Ok(self.log_nu_mass(word)?.exp())
    }

    pub fn cylinder(&self, word: &Word) -> Result<CylinderMass> {
        Ok(CylinderMass {
            word: word.clone(),
            mass: self.nu_mass(word)?,
        })
    }

    /// `ν(wjΣ)/ν(wΣ)` for `j` in `letters`, renormalised over `letters`.
    pub fn conditional_probabilities(&self, prefix: &ScaledProduct, letters: &[u8]) -> Vec<f64> {
        let scale = (self.n as f64 + 2.0) / self.n as f64;
        let raw: Vec<f64> = letters
            .iter()
            .map(|&l| scale * (&prefix.unit * self.t(l)).norm_squared())
            .collect();
        let total: f64 = raw.iter().sum();
        raw.into_iter().map(|r| r / total).collect()
    }

    pub fn z_approx(&self, word: &Word) -> Result<MetricApprox> {
        if word.is_empty() {
            return Err(GasketError::AmbiguousAddress);
        }
        let p = self.product(word)?;
        Ok(self.metric_from_product(word.clone(), &p))
    }

    pub fn metric_from_product(&self, word: Word, p: &ScaledProduct) -> MetricApprox {
        let z = &p.unit * p.unit.transpose();
        let trace = z.trace();
        let idempotency_residual = (&z * &z - &z).norm();
        let mut eigenvalues: Vec<f64> = z.clone().symmetric_eigenvalues().iter().copied().collect();
        eigenvalues.sort_by(|a, b| b.total_cmp(a));
        MetricApprox {
            word,
            z: OperatorY::new(self.n, z),
            trace,
            idempotency_residual,
            eigenvalues,
        }
    }

    /// `Σ_{|w|=m} <a, Z_m(w) b> ν(wΣ)` for ambient directions `a, b` of `Y`.
    ///
    /// For the harmonic functions `u = <a, Ψ>`, `v = <b, Ψ>` this is the
    /// metric side of the energy identity. It equals `<a, b>/(N-1)` at every
    /// level.
    pub fn energy_via_metric(&self, a: &DVector<f64>, b: &DVector<f64>, m: usize) -> f64 {
        let ca = self.basis.coords_of(a);
        let cb = self.basis.coords_of(b);
        let mut acc = CompensatedSum::new();
        let mut stack = vec![ScaledProduct::identity(self.n)];
        while let Some(p) = stack.pop() {
            if p.len == m {
                let mass = self.log_mass_of(&p).exp();
                let z = &p.unit * p.unit.transpose();
                acc.add(ca.dot(&(z * &cb)) * mass);
                continue;
            }
            for j in (1..=self.n as u8).rev() {
                stack.push(p.times(self.t(j)));
            }
        }
        acc.value()
    }
}

/// Exact `ν(wΣ)`: on `Y`, `|T_w|²_HS` is the ambient trace of `T_w T_w^t`
/// minus the `(1, ..., 1)` direction, which `T_w` scales by `(N+2)^{-|w|}`.
pub fn nu_mass_exact(word: &Word) -> Result<Rational> {
    let n = word.n() as i64;
    let t = t_word_exact(word)?;
    let gram: RatMatrix = &t * &t.transpose();
    let ones_part = rat(1, (n + 2).pow(2 * word.len() as u32));
    let hs = gram.trace() - ones_part;
    let scale = rat(n + 2, n);
    let mut pow = Rational::one();
    for _ in 0..word.len() {
        pow *= &scale;
    }
    Ok(hs * pow * rat(1, n - 1))
}

/// `E_0` of the harmonic function `<a, Ψ>` (boundary values `<a, p_j>`).
pub fn linear_harmonic_energy(a: &DVector<f64>) -> Result<f64> {
    let n = a.len();
    let level = Level::build(n, 0, Coordinates::Euclidean, &LevelLimits::default())?;
    let values = (0..level.vertex_count())
        .map(|i| a.dot(&DVector::from_vec(level.vertex_position_f64(i))))
        .collect();
    energy_sq(&EnergyForm::new(&level), &VertexFunction::new(0, values))
}

/// The constant `κ_N` in `E(u, u) = κ_N Σ_w <∇u, Z_m ∇u> ν(wΣ)` for harmonic `u`,
/// measured at level `m` along the direction `a`.
pub fn energy_metric_ratio(measure: &KusuokaMeasure, a: &DVector<f64>, m: usize) -> Result<f64> {
    Ok(linear_harmonic_energy(a)? / measure.energy_via_metric(a, a, m))
}

/// Seeded sampler of `ν`-distributed words, optionally conditioned on a
/// sub-alphabet.
#[derive(Debug, Clone)]
pub struct WordSampler {
    measure: KusuokaMeasure,
    rng: ChaCha8Rng,
    seed: u64,
    alphabet: Vec<u8>,
    max_step_error: f64,
}

impl WordSampler {
    pub fn new(measure: KusuokaMeasure, seed: u64) -> Self {
        let alphabet = (1..=measure.n() as u8).collect();
        Self::with_alphabet(measure, seed, alphabet)
    }

    /// Samples from `ν` conditioned on words over `alphabet`.
    pub fn with_alphabet(measure: KusuokaMeasure, seed: u64, alphabet: Vec<u8>) -> Self {
        Self {
            measure,
            rng: ChaCha8Rng::seed_from_u64(seed),
            seed,
            alphabet,
            max_step_error: 0.0,
        }
    }

    /// An independent sampler with a seed derived from this one's.
    pub fn derive(&self, stream: u64) -> Self {
        let seed = self.seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15).rotate_left(17);
        Self::with_alphabet(self.measure.clone(), seed, self.alphabet.clone())
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Largest `|Σ_j P(j | w) - 1|` seen so far.
    pub fn max_step_error(&self) -> f64 {
        self.max_step_error
    }

    pub fn sample_word(&mut self, m: usize) -> Word {
        self.sample_with_product(m).0
    }

    pub fn sample_with_product(&mut self, m: usize) -> (Word, ScaledProduct) {
        let n = self.measure.n();
        let mut word = Word::empty(n);
        let mut prod = ScaledProduct::identity(n);
        for _ in 0..m {
            let probs = self.measure.conditional_probabilities(&prod, &self.alphabet);
            let total: f64 = probs.iter().sum();
            self.max_step_error = self.max_step_error.max((total - 1.0).abs());
            let u: f64 = self.rng.gen();
            let mut acc = 0.0;
            let mut pick = *self.alphabet.last().expect("non-empty alphabet");
            for (&l, p) in self.alphabet.iter().zip(&probs) {
                acc += p;
                if u < acc {
                    pick = l;
                    break;
                }
            }
            word.push(pick).expect("alphabet letters are valid");
            prod = self.measure.extend(&prod, pick);
        }
        (word, prod)
    }
}

/// `p_j p_j^t / |p_j|²` in the basis of `Y`.
pub fn vertex_projection(basis: &YBasis, j: usize) -> OperatorY {
    let n = basis.n();
    let p = basis.coords_of(&RationalVectorY::vertex(n, j).to_f64());
    let norm_sq = p.norm_squared();
    OperatorY::new(n, &p * p.transpose() / norm_sq)
}

/// Totals and additivity of `ν` over all words up to a length.
#[derive(Debug, Clone, PartialEq)]
pub struct MassReport {
    /// `Σ_{|w|=m} ν(wΣ)` for `m = 0..=max_len`.
    pub totals: Vec<f64>,
    pub max_total_error: f64,
    /// `max |ν(wΣ) - Σ_j ν(wjΣ)|` over `|w| < max_len`.
    pub max_additivity_residual: f64,
}

pub fn mass_check(measure: &KusuokaMeasure, max_len: usize) -> Result<MassReport> {
    let n = measure.n();
    let mut totals = vec![CompensatedSum::new(); max_len + 1];
    let mut residual = 0.0f64;
    let mut stack = vec![ScaledProduct::identity(n)];
    while let Some(p) = stack.pop() {
        let mass = measure.log_mass_of(&p).exp();
        totals[p.len].add(mass);
        if p.len == max_len {
            continue;
        }
        let children: Vec<ScaledProduct> = (1..=n as u8).map(|j| p.times(measure.t(j))).collect();
        let split: f64 = children.iter().map(|c| measure.log_mass_of(c).exp()).collect::<CompensatedSum>().value();
        residual = residual.max((mass - split).abs());
        stack.extend(children.into_iter().rev());
    }
    let totals: Vec<f64> = totals.iter().map(CompensatedSum::value).collect();
    let max_total_error = totals.iter().map(|t| (t - 1.0).abs()).fold(0.0, f64::max);
    Ok(MassReport {
        totals,
        max_total_error,
        max_additivity_residual: residual,
    })
}

/// Both sides of the energy/metric identity for `u = <a, Ψ>` at each level.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityReport {
    /// `Σ_w <a, Z_m(w) a> ν(wΣ)` for `m = 0..=max_len`.
    pub metric_side: Vec<f64>,
    /// `|a|²/(N-1)`.
    pub expected: f64,
    pub max_error: f64,
    /// `E_0(u)`.
    pub energy: f64,
    /// `E_0(u)` divided by the metric side at the deepest level.
    pub kappa: f64,
}

pub fn metric_identity_check(measure: &KusuokaMeasure, a: &DVector<f64>, max_len: usize) -> Result<IdentityReport> {
    let n = measure.n();
    let metric_side: Vec<f64> = (0..=max_len).map(|m| measure.energy_via_metric(a, a, m)).collect();
    let expected = a.norm_squared() / (n as f64 - 1.0);
    let max_error = metric_side.iter().map(|v| (v - expected).abs()).fold(0.0, f64::max);
    let energy = linear_harmonic_energy(a)?;
    Ok(IdentityReport {
        kappa: energy / metric_side[max_len],
        metric_side,
        expected,
        max_error,
        energy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::rat_to_f64;

    #[test]
    fn first_letter_masses_n3() {
        let k = KusuokaMeasure::new(3).unwrap();
        for j in 1..=3u8 {
            let w = Word::new(3, vec![j]).unwrap();
            assert!((k.nu_mass(&w).unwrap() - 1.0 / 3.0).abs() < 1e-15);
            assert_eq!(nu_mass_exact(&w).unwrap(), rat(1, 3));
        }
        assert!((k.nu_mass(&Word::empty(3)).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn float_and_exact_masses_agree() {
        let k = KusuokaMeasure::new(4).unwrap();
        for s in ["1", "12", "4213", "333222"] {
            let w = Word::parse(4, s).unwrap();
            let exact = rat_to_f64(&nu_mass_exact(&w).unwrap());
            assert!((k.nu_mass(&w).unwrap() - exact).abs() < 1e-14 * exact.max(1e-300));
        }
    }

    #[test]
    fn masses_sum_to_one_by_enumeration() {
        for n in [3usize, 4] {
            let k = KusuokaMeasure::new(n).unwrap();
            for m in 0..=4 {
                let total: f64 = Word::all(n, m).map(|w| k.nu_mass(&w).unwrap()).sum();
                assert!((total - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn z_of_constant_word_tends_to_vertex_projection() {
        let k = KusuokaMeasure::new(3).unwrap();
        let target = vertex_projection(k.basis(), 1);
        let z = k.z_approx(&Word::repeated(3, 1, 40).unwrap()).unwrap();
        assert!(z.z.frobenius_distance(&target) <= 1e-8);
        assert!((z.trace - 1.0).abs() < 1e-12);
    }

    #[test]
    fn depth_guard() {
        let k = KusuokaMeasure::new(3).unwrap();
        let long = Word::repeated(3, 2, 201).unwrap();
        assert!(matches!(k.z_approx(&long), Err(GasketError::DepthLimit { .. })));
        assert!(k.z_approx(&Word::repeated(3, 2, 200).unwrap()).is_ok());
        assert_eq!(k.z_approx(&Word::empty(3)).unwrap_err(), GasketError::AmbiguousAddress);
    }

    #[test]
    fn reports() {
        let k = KusuokaMeasure::new(3).unwrap();
        let r = mass_check(&k, 5).unwrap();
        assert_eq!(r.totals.len(), 6);
        assert!(r.max_total_error < 1e-12 && r.max_additivity_residual < 1e-12);
        let a = RationalVectorY::vertex(3, 2).to_f64();
        let id = metric_identity_check(&k, &a, 4).unwrap();
        assert!(id.max_error < 1e-12);
        assert!((id.kappa - 3.0).abs() < 1e-10);
    }

    #[test]
    fn sampler_is_deterministic() {
        let k = KusuokaMeasure::new(3).unwrap();
        let mut a = WordSampler::new(k.clone(), 7);
        let mut b = WordSampler::new(k, 7);
        for _ in 0..20 {
            assert_eq!(a.sample_word(12), b.sample_word(12));
        }
        assert!(a.max_step_error() < 1e-14);
    }

    #[test]
    fn energy_metric_identity_and_ratio() {
        for n in [2usize, 3, 4] {
            let k = KusuokaMeasure::new(n).unwrap();
            let a = RationalVectorY::vertex(n, 1).to_f64() * 0.7
                - RationalVectorY::vertex(n, n).to_f64() * 0.2;
            let expect = a.norm_squared() / (n as f64 - 1.0);
            for m in 0..=4 {
                let v = k.energy_via_metric(&a, &a, m);
                assert!((v - expect).abs() < 1e-12);
            }
            let ratio = energy_metric_ratio(&k, &a, 3).unwrap();
            assert!((ratio - (n * (n - 1)) as f64 / 2.0).abs() < 1e-10);
        }
    }
}
