//! The curve `Γ = S_1(Γ) ∪ S_2(Γ)` joining `p_2` to `p_1`.
//!
//! `Γ` lies in the plane `P` and is the arc between `p_2` and `p_1` of the
//! de Rham curve obtained by cutting the corners of `[2p_2, 0, 2p_1]` with
//! ratio `r = 1/(N+2)`. It is built here both ways: by the two-map iterated
//! function system (exact junction points `S_w(p_1)`, `S_w(p_2)`) and by
//! explicit corner cutting.
//!
//! Points of `P` are written in plane coordinates `(t, s)` relative to `p_2`
//! (see [`PlaneP`]); `Γ` is the graph of a convex function `s = γ(t)` on
//! `[0, 1]` bulging from the chord `s = 0` towards the origin of `Y`.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{GasketError, Result};
use crate::geometry::{s_map, validate_n, PlaneP, RationalVectorY};
use crate::numeric::fit_line;

/// Affine map of the plane in `(t, s)` coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Affine2 {
    pub linear: [[f64; 2]; 2],
    pub translation: [f64; 2],
}

impl Affine2 {
    pub const IDENTITY: Affine2 = Affine2 {
        linear: [[1.0, 0.0], [0.0, 1.0]],
        translation: [0.0, 0.0],
    };

    pub fn apply(&self, x: [f64; 2]) -> [f64; 2] {
        let a = &self.linear;
        [
            a[0][0] * x[0] + a[0][1] * x[1] + self.translation[0],
            a[1][0] * x[0] + a[1][1] * x[1] + self.translation[1],
        ]
    }

    pub fn apply_linear(&self, v: [f64; 2]) -> [f64; 2] {
        let a = &self.linear;
        [a[0][0] * v[0] + a[0][1] * v[1], a[1][0] * v[0] + a[1][1] * v[1]]
    }

    /// `self o inner`.
    pub fn compose(&self, inner: &Affine2) -> Affine2 {
        let a = &self.linear;
        let b = &inner.linear;
        let mut linear = [[0.0; 2]; 2];
        for (r, row) in linear.iter_mut().enumerate() {
            for (c, out) in row.iter_mut().enumerate() {
                *out = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
        }
        Affine2 {
            linear,
            translation: self.apply(inner.translation),
        }
    }
}

/// An ordered point sequence with a cumulative arc-length table.
#[derive(Debug, Clone, PartialEq)]
pub struct PolylineCurve {
    dim: usize,
    coords: Vec<f64>,
    depth: usize,
    cumulative: Vec<f64>,
}

impl PolylineCurve {
    pub fn new(dim: usize, coords: Vec<f64>, depth: usize) -> Self {
        assert_eq!(coords.len() % dim, 0);
        let count = coords.len() / dim;
        let mut cumulative = Vec::with_capacity(count);
        let mut acc = 0.0;
        for i in 0..count {
            if i > 0 {
                let a = &coords[(i - 1) * dim..i * dim];
                let b = &coords[i * dim..(i + 1) * dim];
                acc += a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
            }
            cumulative.push(acc);
        }
        Self {
            dim,
            coords,
            depth,
            cumulative,
        }
    }

    pub fn from_points<const D: usize>(points: &[[f64; D]], depth: usize) -> Self {
        Self::new(D, points.iter().flatten().copied().collect(), depth)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks(self.dim)
    }

    pub fn point2(&self, i: usize) -> [f64; 2] {
        let p = self.point(i);
        [p[0], p[1]]
    }

    pub fn cumulative_lengths(&self) -> &[f64] {
        &self.cumulative
    }

    pub fn length(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }

    /// Maps every point (ambient polylines only).
    pub fn map(&self, f: impl Fn(&[f64]) -> Vec<f64>) -> PolylineCurve {
        let coords: Vec<f64> = self.points().flat_map(f).collect();
        let dim = coords.len() / self.len().max(1);
        PolylineCurve::new(dim.max(1), coords, self.depth)
    }

    pub fn reversed(&self) -> PolylineCurve {
        let coords = self.coords.chunks(self.dim).rev().flatten().copied().collect();
        PolylineCurve::new(self.dim, coords, self.depth)
    }

    /// Point at abscissa `t` (first coordinate), by binary search over the
    /// vertices and linear interpolation. Requires increasing abscissae.
    pub fn point_at_abscissa(&self, t: f64) -> Option<[f64; 2]> {
        let n = self.len();
        if n == 0 || t < self.point(0)[0] || t > self.point(n - 1)[0] {
            return None;
        }
        let hi = (0..n).collect::<Vec<_>>().partition_point(|&i| self.point(i)[0] < t);
        if hi == 0 {
            return Some(self.point2(0));
        }
        let (a, b) = (self.point2(hi - 1), self.point2(hi.min(n - 1)));
        let span = b[0] - a[0];
        let lambda = if span > 0.0 { (t - a[0]) / span } else { 0.0 };
        Some([t, a[1] + lambda * (b[1] - a[1])])
    }

    /// Midpoints of consecutive vertices.
    pub fn edge_midpoints(&self) -> PolylineCurve {
        let coords = (1..self.len())
            .flat_map(|i| {
                self.point(i - 1)
                    .iter()
                    .zip(self.point(i))
                    .map(|(a, b)| 0.5 * (a + b))
                    .collect::<Vec<_>>()
            })
            .collect();
        PolylineCurve::new(self.dim, coords, self.depth)
    }
}

/// `k` steps of corner cutting with ratio `r`: every edge `[a, b]` is
/// replaced by the points `a + r(b - a)` and `a + (1 - r)(b - a)`; the old
/// vertices are dropped. An open polygon with `E` edges becomes one with
/// `2E` vertices and `2E - 1` edges.
pub fn corner_cut(polygon: &PolylineCurve, r: f64, k: usize) -> Result<PolylineCurve> {
    if !(r > 0.0 && r < 0.5) {
        return Err(GasketError::InvalidRatio(r));
    }
    let edges = polygon.len().saturating_sub(1);
    if edges < 2 {
        return Err(GasketError::PolygonTooShort { min: 2, got: edges });
    }
    let dim = polygon.dim();
    let mut current = polygon.clone();
    for step in 0..k {
        let mut coords = Vec::with_capacity(2 * (current.len() - 1) * dim);
        for i in 1..current.len() {
            let (a, b) = (current.point(i - 1), current.point(i));
            coords.extend(a.iter().zip(b).map(|(x, y)| x + r * (y - x)));
            coords.extend(a.iter().zip(b).map(|(x, y)| x + (1.0 - r) * (y - x)));
        }
        current = PolylineCurve::new(dim, coords, polygon.depth() + step + 1);
    }
    Ok(current)
}

/// A point `g(t) = p_2 + t e1 + s e2` of `Γ` (or of its depth polyline).
#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub t: f64,
    pub s: f64,
    pub point: DVector<f64>,
}

/// A cell `S_w(Γ)` of `Γ`, `w` a word over `{1, 2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveCell {
    pub letters: Vec<u8>,
    pub map: Affine2,
    /// `S_w(p_2)` in plane coordinates.
    pub left: [f64; 2],
    /// `S_w(p_1)` in plane coordinates.
    pub right: [f64; 2],
}

impl CurveCell {
    pub fn width(&self) -> f64 {
        self.right[0] - self.left[0]
    }

    pub fn chord_slope(&self) -> f64 {
        (self.right[1] - self.left[1]) / self.width()
    }
}

/// The curve `Γ` for a fixed `N`, with `S_1`, `S_2` restricted to `P`.
#[derive(Debug, Clone)]
pub struct DeRhamCurve {
    n: usize,
    plane: PlaneP,
    s1: Affine2,
    s2: Affine2,
    junction: [f64; 2],
}

/// Deepest refinement used by adaptive evaluations.
const MAX_CELL_DEPTH: usize = 600;

impl DeRhamCurve {
    pub fn new(n: usize) -> Result<Self> {
        validate_n(n)?;
        let plane = PlaneP::new(n)?;
        let restrict = |j: usize| -> Result<Affine2> {
            let s = s_map(n, j)?.to_float();
            let image = |ts: [f64; 2]| plane.coords_of(&s.apply(&plane.point_at(ts)));
            let o = image([0.0, 0.0]);
            let a = image([1.0, 0.0]);
            let b = image([0.0, 1.0]);
            Ok(Affine2 {
                linear: [[a[0] - o[0], b[0] - o[0]], [a[1] - o[1], b[1] - o[1]]],
                translation: o,
            })
        };
        let s1 = restrict(1)?;
        let s2 = restrict(2)?;
        let junction = s1.apply([0.0, 0.0]);
        Ok(Self {
            n,
            plane,
            s1,
            s2,
            junction,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn plane(&self) -> &PlaneP {
        &self.plane
    }

    /// `S_1` or `S_2` restricted to `P`.
    pub fn map(&self, letter: u8) -> &Affine2 {
        if letter == 1 {
            &self.s1
        } else {
            &self.s2
        }
    }

    /// Corner-cutting ratio `1/(N+2)`.
    pub fn ratio(&self) -> f64 {
        1.0 / (self.n as f64 + 2.0)
    }

    /// `S_1(p_2) = S_2(p_1) = (p_1 + p_2)/(N+2)`.
    pub fn junction(&self) -> [f64; 2] {
        self.junction
    }

    /// The `2^depth + 1` points `S_w(p_2), S_w(p_1)`, `|w| = depth`, ordered
    /// from `p_2` to `p_1`.
    pub fn polyline(&self, depth: usize) -> PolylineCurve {
        let mut pts = vec![[0.0, 0.0], [1.0, 0.0]];
        for _ in 0..depth {
            let mut next: Vec<[f64; 2]> = Vec::with_capacity(2 * pts.len() - 1);
            next.extend(pts.iter().map(|&p| self.s2.apply(p)));
            next.extend(pts.iter().skip(1).map(|&p| self.s1.apply(p)));
            pts = next;
        }
        PolylineCurve::from_points(&pts, depth)
    }

    /// The same polyline in ambient coordinates of `Y`.
    pub fn polyline_ambient(&self, depth: usize) -> PolylineCurve {
        let planar = self.polyline(depth);
        planar.map(|p| self.plane.point_at([p[0], p[1]]).iter().copied().collect())
    }

    /// Initial corner-cutting polygon `[2p_2, 0, 2p_1]` in plane coordinates.
    pub fn generator_polygon(&self) -> PolylineCurve {
        let o = self.plane.origin();
        // 2x = 2(x - 0) + 0, in plane coordinates relative to p_2
        let double = |x: [f64; 2]| [2.0 * x[0] - o[0], 2.0 * x[1] - o[1]];
        PolylineCurve::from_points(&[double([0.0, 0.0]), o, double([1.0, 0.0])], 0)
    }

    /// Edge midpoints of the `depth`-fold corner cut of the generator; these
    /// coincide with [`DeRhamCurve::polyline`] at the same depth.
    pub fn corner_cut_polyline(&self, depth: usize) -> Result<PolylineCurve> {
        let cut = corner_cut(&self.generator_polygon(), self.ratio(), depth)?;
        let mid = cut.edge_midpoints();
        Ok(PolylineCurve::new(2, mid.coords, depth))
    }

    /// Descends `depth` levels to the cell whose abscissa range contains `t`.
    pub fn locate(&self, t: f64, depth: usize) -> CurveCell {
        let mut cell = CurveCell {
            letters: Vec::with_capacity(depth),
            map: Affine2::IDENTITY,
            left: [0.0, 0.0],
            right: [1.0, 0.0],
        };
        for _ in 0..depth {
            self.refine(&mut cell, t);
        }
        cell
    }

    fn refine(&self, cell: &mut CurveCell, t: f64) {
        let mid = cell.map.apply(self.junction);
        if t < mid[0] {
            cell.map = cell.map.compose(&self.s2);
            cell.right = mid;
            cell.letters.push(2);
        } else {
            cell.map = cell.map.compose(&self.s1);
            cell.left = mid;
            cell.letters.push(1);
        }
    }

    /// Refines until the cell containing `t` is narrower than `width`.
    pub fn locate_to_width(&self, t: f64, width: f64) -> CurveCell {
        let mut cell = self.locate(t, 0);
        while cell.width() > width && cell.letters.len() < MAX_CELL_DEPTH {
            self.refine(&mut cell, t);
        }
        cell
    }

    fn interpolate(&self, cell: &CurveCell, t: f64) -> CurvePoint {
        let span = cell.width();
        let lambda = if span > 0.0 { (t - cell.left[0]) / span } else { 0.0 };
        let s = cell.left[1] + lambda * (cell.right[1] - cell.left[1]);
        CurvePoint {
            t,
            s,
            point: self.plane.point_at([t, s]),
        }
    }

    /// `g(t)` on the depth-`depth` polyline.
    pub fn eval_g(&self, t: f64, depth: usize) -> Result<CurvePoint> {
        check_unit(t)?;
        Ok(self.interpolate(&self.locate(t, depth), t))
    }

    /// `g(t)` on a polyline whose segment around `t` is narrower than `width`.
    pub fn eval_to_width(&self, t: f64, width: f64) -> Result<CurvePoint> {
        check_unit(t)?;
        Ok(self.interpolate(&self.locate_to_width(t, width), t))
    }

    /// Ordinate `γ_depth(t)` of the depth polyline.
    pub fn ordinate(&self, t: f64, depth: usize) -> f64 {
        self.interpolate(&self.locate(t, depth), t).s
    }

    /// Unit tangent by finite differences of `g` at step `h = 2^-depth`
    /// (central inside `[h, 1-h]`, one-sided at the ends). Returned in plane
    /// coordinates; `g` itself is evaluated well below the step size.
    pub fn tangent_g(&self, t: f64, depth: usize) -> Result<[f64; 2]> {
        check_unit(t)?;
        if depth < 4 {
            return Err(GasketError::Domain {
                value: depth as f64,
                domain: "tangent depth >= 4",
            });
        }
        let h = 0.5f64.powi(depth as i32);
        let (lo, hi) = ((t - h).max(0.0), (t + h).min(1.0));
        let width = h * 1e-4;
        let a = self.eval_to_width(lo, width)?;
        let b = self.eval_to_width(hi, width)?;
        let d = [b.t - a.t, b.s - a.s];
        let norm = d[0].hypot(d[1]);
        if norm.is_nan() || norm <= 0.0 || !norm.is_finite() {
            return Err(GasketError::RefineDepth { t });
        }
        Ok([d[0] / norm, d[1] / norm])
    }

    /// Ambient unit tangent corresponding to [`DeRhamCurve::tangent_g`].
    pub fn tangent_ambient(&self, t: f64, depth: usize) -> Result<DVector<f64>> {
        let tan = self.tangent_g(t, depth)?;
        let mut v = self.plane.e1() * tan[0];
        if let Ok(e2) = self.plane.e2() {
            v += e2 * tan[1];
        }
        Ok(v)
    }

    /// Slope `γ'(t)` from the chord of a cell around `t` of width below
    /// `width`.
    pub fn slope(&self, t: f64, width: f64) -> f64 {
        self.locate_to_width(t, width).chord_slope()
    }

    /// Polyline length of `Γ` at the given depth.
    pub fn length(&self, depth: usize) -> f64 {
        self.polyline(depth).length()
    }
}

fn check_unit(t: f64) -> Result<()> {
    if (0.0..=1.0).contains(&t) {
        Ok(())
    } else {
        Err(GasketError::Domain {
            value: t,
            domain: "[0, 1]",
        })
    }
}

/// Hölder exponent of `g'` in closed form, from `N`.
pub fn closed_form_holder(n: usize) -> Result<f64> {
    validate_n(n)?;
    if n == 2 {
        return Err(GasketError::HolderInapplicable);
    }
    let nf = n as f64;
    let root = 1.0 + (4.0 * nf + 1.0).sqrt();
    let num = nf.ln() + 2.0 * 2f64.ln() - 2.0 * root.ln();
    let den = root.ln() - 2f64.ln() - (nf + 2.0).ln();
    Ok(num / den)
}

/// Hölder exponent of the derivative of a de Rham curve with ratio
/// `r ∈ (0, 1/4)`.
pub fn de_rham_holder(r: f64) -> Result<f64> {
    if !(r > 0.0 && r < 0.25) {
        return Err(GasketError::InvalidRatio(r));
    }
    Ok((r * (1.0 - 2.0 * r)).ln() / ((r + (4.0 * r - 7.0 * r * r).sqrt()).ln() - 2f64.ln()) - 2.0)
}

/// Settings of the Hölder regression.
#[derive(Debug, Clone, PartialEq)]
pub struct HolderConfig {
    /// Offsets `h = 2^-e` for `e` in this range.
    pub exponents: std::ops::RangeInclusive<u32>,
    /// Number of base points; rounded down to a power of two, at least two.
    pub base_points: usize,
}

impl Default for HolderConfig {
    fn default() -> Self {
        Self {
            exponents: 6..=12,
            base_points: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HolderEstimate {
    pub exponent: f64,
    pub r_squared: f64,
    /// `(h, |g'(t±h) - g'(t)|)` at the base point attaining the minimum.
    pub samples: Vec<(f64, f64)>,
}

impl DeRhamCurve {
    /// Fixed point of `S_a o S_b` (`a != b`) in plane coordinates.
    pub fn two_cycle_point(&self, first: u8) -> [f64; 2] {
        let second = if first == 1 { 2 } else { 1 };
        let m = self.map(first).compose(self.map(second));
        let mut x = self.junction;
        for _ in 0..200 {
            x = m.apply(x);
        }
        x
    }

    /// Images `S_v(x)` of the two 2-cycle points over words `v` of length
    /// `depth`, sorted by abscissa. The derivative of `g` is least regular
    /// at these points.
    pub fn critical_points(&self, depth: usize) -> Vec<[f64; 2]> {
        let mut pts = vec![self.two_cycle_point(1), self.two_cycle_point(2)];
        for _ in 0..depth {
            pts = pts
                .iter()
                .flat_map(|&p| [self.s2.apply(p), self.s1.apply(p)])
                .collect();
        }
        pts.sort_by(|a, b| a[0].total_cmp(&b[0]));
        pts
    }
}

/// Hölder exponent of `g'` from finite differences.
///
/// At each base point `t` the slope of `log max(|g'(t±h) - g'(t)|)` against
/// `log h` is fitted by least squares; the estimate is the smallest of these
/// local exponents. Base points are the images of the fixed points of
/// `S_1 S_2` and `S_2 S_1` under all words of one length, so
/// `base_points = 64` uses words of length 5.
pub fn holder_estimate(n: usize, config: &HolderConfig) -> Result<HolderEstimate> {
    if n == 2 {
        return Err(GasketError::HolderInapplicable);
    }
    let curve = DeRhamCurve::new(n)?;
    let depth = (config.base_points.max(2) / 2).ilog2() as usize;
    let h_min = 0.5f64.powi(*config.exponents.end() as i32);
    let width = h_min * 1e-5;
    let mut best: Option<HolderEstimate> = None;
    for base in curve.critical_points(depth) {
        let t = base[0];
        let here = curve.slope(t, width);
        let samples: Vec<(f64, f64)> = config
            .exponents
            .clone()
            .map(|e| {
                let h = 0.5f64.powi(e as i32);
                let d = [t - h, t + h]
                    .into_iter()
                    .filter(|u| (0.0..=1.0).contains(u))
                    .map(|u| (curve.slope(u, width) - here).abs())
                    .fold(0.0, f64::max);
                (h, d)
            })
            .collect();
        if samples.iter().any(|s| s.1.is_nan() || s.1 <= 0.0) {
            continue;
        }
        let xs: Vec<f64> = samples.iter().map(|s| s.0.ln()).collect();
        let ys: Vec<f64> = samples.iter().map(|s| s.1.ln()).collect();
        let Some(fit) = fit_line(&xs, &ys) else { continue };
        if best.as_ref().is_none_or(|b| fit.slope < b.exponent) {
            best = Some(HolderEstimate {
                exponent: fit.slope,
                r_squared: fit.r_squared,
                samples,
            });
        }
    }
    best.ok_or_else(|| GasketError::Numerical("degenerate Hölder fit".into()))
}

/// The region `Υ = Ω \ C`, where `Ω` is the triangle `(p, p_1, p_2)` and `C`
/// the open convex region between `Γ` and the chord `[p_1, p_2]`.
#[derive(Debug, Clone)]
pub struct RegionUpsilon {
    curve: DeRhamCurve,
    depth: usize,
    tolerance: f64,
    triangle: [[f64; 2]; 3],
}

impl RegionUpsilon {
    pub fn new(n: usize, depth: usize, tolerance: f64) -> Result<Self> {
        let curve = DeRhamCurve::new(n)?;
        let p = curve.plane().p()?;
        Ok(Self {
            curve,
            depth,
            tolerance,
            triangle: [p, [1.0, 0.0], [0.0, 0.0]],
        })
    }

    pub fn curve(&self) -> &DeRhamCurve {
        &self.curve
    }

    /// Vertices `p, p_1, p_2` of `Ω` in plane coordinates.
    pub fn triangle(&self) -> [[f64; 2]; 3] {
        self.triangle
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn in_triangle(&self, x: [f64; 2]) -> bool {
        let [a, b, c] = self.triangle;
        let orient = cross(a, b, c).signum();
        [(a, b), (b, c), (c, a)].iter().all(|&(u, v)| {
            let len = (v[0] - u[0]).hypot(v[1] - u[1]);
            orient * cross(u, v, x) / len >= -self.tolerance
        })
    }

    /// Strictly inside the open region bounded by the depth polyline and the
    /// chord.
    pub fn in_convex_region(&self, x: [f64; 2]) -> bool {
        let (t, s) = (x[0], x[1]);
        if !(t > 0.0 && t < 1.0) {
            return false;
        }
        let gamma = self.curve.ordinate(t, self.depth);
        s > gamma + self.tolerance && s < -self.tolerance
    }

    /// Membership in `Υ`, boundary included.
    pub fn contains(&self, x: [f64; 2]) -> bool {
        self.in_triangle(x) && !self.in_convex_region(x)
    }

    /// Membership of `Π x` for an ambient point `x` of `Y`.
    pub fn contains_ambient(&self, x: &DVector<f64>) -> bool {
        self.contains(self.curve.plane().coords_of(x))
    }
}

/// Counts from [`RegionUpsilon::check`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct UpsilonReport {
    pub attractor_points: usize,
    pub attractor_failures: usize,
    pub star_checks: usize,
    pub star_failures: usize,
    pub translation_checks: usize,
    pub translation_failures: usize,
}

impl UpsilonReport {
    pub fn passed(&self) -> bool {
        self.attractor_failures == 0 && self.star_failures == 0 && self.translation_failures == 0
    }
}

impl RegionUpsilon {
    /// Uniform samples of `Υ` by rejection from the bounding box of `Ω`.
    pub fn sample(&self, count: usize, rng: &mut impl Rng) -> Vec<[f64; 2]> {
        let xs = self.triangle.map(|v| v[0]);
        let ys = self.triangle.map(|v| v[1]);
        let lo = [xs.iter().copied().fold(f64::INFINITY, f64::min), ys.iter().copied().fold(f64::INFINITY, f64::min)];
        let hi = [xs.iter().copied().fold(f64::NEG_INFINITY, f64::max), ys.iter().copied().fold(f64::NEG_INFINITY, f64::max)];
        let mut out = Vec::with_capacity(count);
        while out.len() < count {
            let y = [rng.gen_range(lo[0]..=hi[0]), rng.gen_range(lo[1]..=hi[1])];
            if self.contains(y) {
                out.push(y);
            }
        }
        out
    }

    /// Checks `Π(X) ⊂ Υ` on `attractor_points` random points `S_w(p_j)`
    /// (`|w| = word_len`), star-shapedness about `0` and invariance under
    /// translation by `αp` inside `Ω` on `samples` random points of `Υ`,
    /// with `λ, α` on the grid of step `1/32`.
    pub fn check(&self, attractor_points: usize, word_len: usize, samples: usize, seed: u64) -> Result<UpsilonReport> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = self.curve.n();
        let mut report = UpsilonReport::default();
        for x in sample_attractor(n, attractor_points, word_len, &mut rng)? {
            report.attractor_points += 1;
            if !self.contains_ambient(&x) {
                report.attractor_failures += 1;
            }
        }
        let o = self.curve.plane().origin();
        let p = self.triangle[0];
        let grid: Vec<f64> = (0..=32).map(|i| i as f64 / 32.0).collect();
        for y in self.sample(samples, &mut rng) {
            for &lambda in &grid {
                report.star_checks += 1;
                let z = [o[0] + lambda * (y[0] - o[0]), o[1] + lambda * (y[1] - o[1])];
                if !self.contains(z) {
                    report.star_failures += 1;
                }
            }
            for &alpha in &grid {
                let z = [y[0] + alpha * (p[0] - o[0]), y[1] + alpha * (p[1] - o[1])];
                if self.in_triangle(z) {
                    report.translation_checks += 1;
                    if !self.contains(z) {
                        report.translation_failures += 1;
                    }
                }
            }
        }
        Ok(report)
    }
}

/// Random points `S_w(p_j)` of the harmonic gasket in ambient coordinates,
/// `w` uniform of length `word_len`.
pub fn sample_attractor(n: usize, count: usize, word_len: usize, rng: &mut impl Rng) -> Result<Vec<DVector<f64>>> {
    validate_n(n)?;
    let maps = (1..=n).map(|j| Ok(s_map(n, j)?.to_float())).collect::<Result<Vec<_>>>()?;
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let j = rng.gen_range(1..=n);
        let mut x = RationalVectorY::vertex(n, j).to_f64();
        for _ in 0..word_len {
            x = maps[rng.gen_range(0..n)].apply(&x);
        }
        out.push(x);
    }
    Ok(out)
}

fn cross(a: [f64; 2], b: [f64; 2], x: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (x[1] - a[1]) - (b[1] - a[1]) * (x[0] - a[0])
}

/// Upsilon containment as a free function.
pub fn upsilon_contains(region: &RegionUpsilon, point: [f64; 2]) -> bool {
    region.contains(point)
}

/// `gamma_polyline(N, depth)`.
pub fn gamma_polyline(n: usize, depth: usize) -> Result<PolylineCurve> {
    Ok(DeRhamCurve::new(n)?.polyline(depth))
}

/// Maximum distance between the corner-cut midpoints and the IFS polyline at `depth`.
pub fn corner_cut_deviation(n: usize, depth: usize) -> Result<f64> {
    let curve = DeRhamCurve::new(n)?;
    let ifs = curve.polyline(depth);
    let cut = curve.corner_cut_polyline(depth)?;
    if ifs.len() != cut.len() {
        return Err(GasketError::Numerical(format!(
            "corner cut gave {} points, expected {}",
            cut.len(),
            ifs.len()
        )));
    }
    Ok((0..ifs.len())
        .map(|i| {
            let (a, b) = (ifs.point2(i), cut.point2(i));
            (a[0] - b[0]).hypot(a[1] - b[1])
        })
        .fold(0.0, f64::max))
}

/// Polyline lengths of Γ over a depth range.
#[derive(Debug, Clone, PartialEq)]
pub struct LengthReport {
    pub n: usize,
    pub depths: Vec<usize>,
    pub lengths: Vec<f64>,
    /// `|l_{d+1} - l_d|` for consecutive depths.
    pub increments: Vec<f64>,
    pub increments_decreasing: bool,
    /// `l_d + inc/3`, the limit when increments shrink by a factor 4.
    pub extrapolated: f64,
}

pub fn length_report(n: usize, min_depth: usize, max_depth: usize) -> Result<LengthReport> {
    if max_depth <= min_depth {
        return Err(GasketError::Domain {
            value: max_depth as f64,
            domain: "max_depth > min_depth",
        });
    }
    let curve = DeRhamCurve::new(n)?;
    let depths: Vec<usize> = (min_depth..=max_depth).collect();
    let lengths: Vec<f64> = depths.iter().map(|&d| curve.length(d)).collect();
    let increments: Vec<f64> = lengths.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let increments_decreasing = increments.windows(2).all(|w| w[1] < w[0]);
    let last = *lengths.last().unwrap_or(&0.0);
    let extrapolated = last + (lengths[lengths.len() - 1] - lengths[lengths.len() - 2]) / 3.0;
    Ok(LengthReport {
        n,
        depths,
        lengths,
        increments,
        increments_decreasing,
        extrapolated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::rat;

    fn plane_point(n: usize, v: &RationalVectorY) -> [f64; 2] {
        PlaneP::new(n).unwrap().coords_of(&v.to_f64())
    }

    fn close(a: [f64; 2], b: [f64; 2], tol: f64) -> bool {
        (a[0] - b[0]).abs() <= tol && (a[1] - b[1]).abs() <= tol
    }

    #[test]
    fn corner_cut_identity_and_counts() {
        let poly = PolylineCurve::from_points(&[[0.0, 0.0], [1.0, 1.0], [2.0, 0.0], [3.0, 1.0]], 0);
        assert_eq!(corner_cut(&poly, 0.2, 0).unwrap(), poly);
        let once = corner_cut(&poly, 0.2, 1).unwrap();
        assert_eq!(once.len(), 2 * 3);
        assert!(matches!(corner_cut(&poly, 0.5, 1), Err(GasketError::InvalidRatio(_))));
        assert!(matches!(corner_cut(&poly, 0.0, 1), Err(GasketError::InvalidRatio(_))));
        let short = PolylineCurve::from_points(&[[0.0, 0.0], [1.0, 1.0]], 0);
        assert!(matches!(corner_cut(&short, 0.2, 1), Err(GasketError::PolygonTooShort { .. })));
    }

    #[test]
    fn first_cut_vertices() {
        for n in 3..=6 {
            let curve = DeRhamCurve::new(n).unwrap();
            let cut = corner_cut(&curve.generator_polygon(), curve.ratio(), 1).unwrap();
            let nn = n as i64;
            let a = plane_point(n, &RationalVectorY::vertex(n, 2).scale(&rat(2, nn + 2)));
            let b = plane_point(n, &RationalVectorY::vertex(n, 1).scale(&rat(2, nn + 2)));
            let mid = plane_point(
                n,
                &(&RationalVectorY::vertex(n, 1) + &RationalVectorY::vertex(n, 2)).scale(&rat(1, nn + 2)),
            );
            assert!(close(cut.point2(1), a, 1e-14));
            assert!(close(cut.point2(2), b, 1e-14));
            assert!(close(cut.edge_midpoints().point2(1), mid, 1e-14));
            assert!(close(curve.junction(), mid, 1e-14));
        }
    }

    #[test]
    fn polyline_endpoints_and_monotone_abscissa() {
        for n in 3..=5 {
            let pl = gamma_polyline(n, 9).unwrap();
            assert_eq!(pl.len(), 513);
            assert!(close(pl.point2(0), [0.0, 0.0], 1e-15));
            assert!(close(pl.point2(512), [1.0, 0.0], 1e-15));
            for i in 1..pl.len() {
                assert!(pl.point(i)[0] > pl.point(i - 1)[0]);
            }
        }
    }

    #[test]
    fn n2_is_a_segment() {
        let curve = DeRhamCurve::new(2).unwrap();
        let pl = curve.polyline(8);
        assert!(pl.points().all(|p| p[1] == 0.0));
        assert!((pl.length() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn corner_cut_matches_ifs() {
        for n in [3usize, 4] {
            let curve = DeRhamCurve::new(n).unwrap();
            for depth in 0..=8 {
                let a = curve.polyline(depth);
                let b = curve.corner_cut_polyline(depth).unwrap();
                assert_eq!(a.len(), b.len());
                for i in 0..a.len() {
                    assert!(close(a.point2(i), b.point2(i), 1e-12));
                }
            }
        }
    }

    #[test]
    fn report_helpers() {
        assert!(corner_cut_deviation(3, 6).unwrap() < 1e-12);
        let r = length_report(3, 8, 12).unwrap();
        assert!(r.increments_decreasing);
        assert!((r.extrapolated - 1.074351983).abs() < 1e-8);
        let flat = length_report(2, 2, 4).unwrap();
        assert!(flat.lengths.iter().all(|l| (l - 1.0).abs() < 1e-12));
    }

    #[test]
    fn eval_g_examples() {
        for n in 3..=6 {
            let curve = DeRhamCurve::new(n).unwrap();
            let g0 = curve.eval_g(0.0, 10).unwrap();
            let g1 = curve.eval_g(1.0, 10).unwrap();
            assert!(g0.s.abs() < 1e-15 && g1.s.abs() < 1e-15);
            let half = curve.eval_g(0.5, 10).unwrap();
            assert!(close([half.t, half.s], curve.junction(), 1e-15));
            for t in [0.1, 0.27, 0.4] {
                let a = curve.eval_g(t, 12).unwrap();
                let b = curve.eval_g(1.0 - t, 12).unwrap();
                assert!((a.s - b.s).abs() < 1e-12);
            }
            assert!(matches!(curve.eval_g(1.5, 4), Err(GasketError::Domain { .. })));
            // descent agrees with binary search on the materialised polyline
            let pl = curve.polyline(10);
            for t in [0.013, 0.31, 0.77] {
                let by_search = pl.point_at_abscissa(t).unwrap();
                assert!((by_search[1] - curve.eval_g(t, 10).unwrap().s).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn tangent_examples() {
        for n in [3usize, 4, 6] {
            let curve = DeRhamCurve::new(n).unwrap();
            let mid = curve.tangent_g(0.5, 12).unwrap();
            assert!(mid[1].abs() < 1e-12 && mid[0] > 0.0);
            // at p_1 the tangent points along p_1 (from the origin of Y)
            let end = curve.tangent_g(1.0, 16).unwrap();
            let o = curve.plane().origin();
            let dir = [1.0 - o[0], 0.0 - o[1]];
            let norm = dir[0].hypot(dir[1]);
            let cross = end[0] * dir[1] / norm - end[1] * dir[0] / norm;
            assert!(cross.abs() < 1e-6, "n={n} cross={cross}");
        }
        let curve = DeRhamCurve::new(3).unwrap();
        assert!(curve.tangent_g(0.3, 3).is_err());
    }

    #[test]
    fn holder_closed_forms_agree() {
        assert!((closed_form_holder(3).unwrap() - 0.734685).abs() < 1e-6);
        assert!((closed_form_holder(4).unwrap() - 0.581490).abs() < 1e-6);
        for n in 3..=8 {
            let a = closed_form_holder(n).unwrap();
            let b = de_rham_holder(1.0 / (n as f64 + 2.0)).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(closed_form_holder(2), Err(GasketError::HolderInapplicable));
    }

    #[test]
    fn two_cycle_points_are_fixed() {
        let curve = DeRhamCurve::new(4).unwrap();
        for first in [1u8, 2] {
            let second = 3 - first;
            let x = curve.two_cycle_point(first);
            let y = curve.map(first).apply(curve.map(second).apply(x));
            assert!(close(x, y, 1e-15));
            let on_curve = curve.eval_g(x[0], 40).unwrap();
            assert!((on_curve.s - x[1]).abs() < 1e-14);
        }
        assert_eq!(curve.critical_points(5).len(), 64);
    }

    #[test]
    fn upsilon_examples() {
        for n in [3usize, 4, 5] {
            let region = RegionUpsilon::new(n, 12, 1e-9).unwrap();
            let o = region.curve().plane().origin();
            assert!(region.contains([1.0, 0.0]));
            assert!(region.contains(o));
            assert!(region.contains([0.5, 0.0]));
            // a point just above the curve in the middle lies in the convex region
            let g = region.curve().eval_g(0.5, 12).unwrap();
            assert!(!region.contains([0.5, g.s * 0.5]));
            assert!(!region.contains([2.0, 0.0]));
        }
        assert!(RegionUpsilon::new(2, 8, 1e-9).is_err());
    }

    #[test]
    fn upsilon_properties() {
        for n in [3usize, 4, 6] {
            let region = RegionUpsilon::new(n, 12, 1e-9).unwrap();
            let report = region.check(5000, 10, 100, 7).unwrap();
            assert!(report.passed(), "n={n} {report:?}");
            assert!(report.translation_checks > 0);
        }
    }

    #[test]
    fn holder_estimate_near_closed_form() {
        for n in [3usize, 4] {
            let est = holder_estimate(n, &HolderConfig::default()).unwrap();
            let cf = closed_form_holder(n).unwrap();
            assert!((est.exponent - cf).abs() / cf < 0.1, "n={n} {est:?}");
            assert_eq!(est.samples.len(), 7);
        }
        assert!(holder_estimate(2, &HolderConfig::default()).is_err());
    }

    #[test]
    fn tangents_converge() {
        let curve = DeRhamCurve::new(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let ts: Vec<f64> = (0..20).map(|_| rng.gen_range(0.0..1.0)).collect();
        // sup over the sample of |tangent(d) - tangent(d + 2)|
        let sup: Vec<f64> = (6..=14)
            .step_by(2)
            .map(|d| {
                ts.iter()
                    .map(|&t| {
                        let a = curve.tangent_g(t, d).unwrap();
                        let b = curve.tangent_g(t, d + 2).unwrap();
                        (a[0] - b[0]).hypot(a[1] - b[1])
                    })
                    .fold(0.0, f64::max)
            })
            .collect();
        assert!(sup.windows(2).all(|w| w[1] < w[0]), "{sup:?}");
    }
}
