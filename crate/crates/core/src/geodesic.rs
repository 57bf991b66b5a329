//! Geodesic arcs `Γ_jk`, their cell images `S_w(Γ_jk)`, the level-`m`
//! geodesic graph on harmonic `V_m` and shortest-path distances.
//!
//! Arcs are always handled as mapped polylines of `Γ`: the arc of cell `w`
//! for the pair `(j, k)` is `S_w O_jk (Γ)` with `O_jk` from
//! [`symmetry_transform`], running from `S_w(p_k)` (`Γ` parameter 0) to
//! `S_w(p_j)` (parameter 1).

use nalgebra::{DMatrix, DVector};
use petgraph::algo::dijkstra;
use petgraph::graph::{NodeIndex, UnGraph};

use crate::derham::{DeRhamCurve, PolylineCurve};
use crate::energy::{Level, LevelLimits};
use crate::error::{GasketError, Result};
use crate::geometry::{
    s_map, s_word, symmetry_transform, validate_n, Coordinates, FloatAffineY, RationalVectorY,
    VertexPermutation, Word,
};
use crate::kusuoka::{KusuokaMeasure, WordSampler};
use crate::numeric::{angle_between, CompensatedSum};

/// Relative slack under which two path lengths count as tied.
const TIE_TOLERANCE: f64 = 1e-12;

/// The polyline of `Γ_jk = O_jk(Γ)` in ambient coordinates.
pub fn arc_gamma_jk(n: usize, j: usize, k: usize, depth: usize) -> Result<PolylineCurve> {
    let perm = symmetry_transform(n, j, k)?;
    let curve = DeRhamCurve::new(n)?;
    Ok(curve
        .polyline_ambient(depth)
        .map(|p| perm.apply_f64(&DVector::from_column_slice(p)).iter().copied().collect()))
}

/// The attractor of `{S_j, S_k}` rebuilt directly, from `p_k` to `p_j`.
pub fn arc_gamma_jk_ifs(n: usize, j: usize, k: usize, depth: usize) -> Result<PolylineCurve> {
    symmetry_transform(n, j, k)?;
    let sj = s_map(n, j)?.to_float();
    let sk = s_map(n, k)?.to_float();
    let mut pts = vec![RationalVectorY::vertex(n, k).to_f64(), RationalVectorY::vertex(n, j).to_f64()];
    for _ in 0..depth {
        let mut next: Vec<DVector<f64>> = pts.iter().map(|p| sk.apply(p)).collect();
        next.extend(pts.iter().skip(1).map(|p| sj.apply(p)));
        pts = next;
    }
    let coords = pts.iter().flat_map(|p| p.iter().copied().collect::<Vec<_>>()).collect();
    Ok(PolylineCurve::new(n, coords, depth))
}

/// Affine image `x(t, s) = base + t·dt + s·ds` of `Γ`'s plane coordinates
/// under `S_w O_jk`.
#[derive(Debug, Clone, PartialEq)]
pub struct ArcMap {
    pub word: Word,
    pub pair: (usize, usize),
    pub base: DVector<f64>,
    pub dt: DVector<f64>,
    pub ds: DVector<f64>,
    /// Linear part of `S_w O_jk` on ambient coordinates.
    pub linear: DMatrix<f64>,
}

impl ArcMap {
    pub fn new(curve: &DeRhamCurve, word: &Word, j: usize, k: usize) -> Result<Self> {
        let n = curve.n();
        let perm = symmetry_transform(n, j, k)?;
        let sw = s_word(word)?.to_float();
        Ok(Self::from_parts(curve, word, (j, k), &sw, &perm))
    }

    fn from_parts(curve: &DeRhamCurve, word: &Word, pair: (usize, usize), sw: &FloatAffineY, perm: &VertexPermutation) -> Self {
        let n = curve.n();
        let linear = &sw.linear * perm.matrix_f64();
        let plane = curve.plane();
        let origin = plane.point_at([0.0, 0.0]);
        let base = &linear * origin + &sw.translation;
        let dt = &linear * plane.e1();
        let ds = plane.e2().map_or_else(|_| DVector::zeros(n), |e2| &linear * e2);
        Self {
            word: word.clone(),
            pair,
            base,
            dt,
            ds,
            linear,
        }
    }

    pub fn at(&self, ts: [f64; 2]) -> DVector<f64> {
        &self.base + &self.dt * ts[0] + &self.ds * ts[1]
    }

    /// Image of `Γ`'s depth polyline.
    pub fn polyline(&self, curve: &DeRhamCurve, depth: usize) -> PolylineCurve {
        let planar = curve.polyline(depth);
        planar.map(|p| self.at([p[0], p[1]]).iter().copied().collect())
    }

    /// Length of the mapped polyline, accumulated without materialising it.
    pub fn length(&self, planar: &PolylineCurve) -> f64 {
        let mut acc = CompensatedSum::new();
        for i in 1..planar.len() {
            let (a, b) = (planar.point(i - 1), planar.point(i));
            let d = &self.dt * (b[0] - a[0]) + &self.ds * (b[1] - a[1]);
            acc.add(d.norm());
        }
        acc.value()
    }
}

/// Polyline length of `S_w(Γ_jk)` at the given depth.
pub fn cell_arc_length(word: &Word, j: usize, k: usize, depth: usize) -> Result<f64> {
    let curve = DeRhamCurve::new(word.n())?;
    Ok(ArcMap::new(&curve, word, j, k)?.length(&curve.polyline(depth)))
}

/// `S_w(p_j)`, identified by its exact point.
#[derive(Debug, Clone)]
pub struct CellVertexRef {
    pub word: Word,
    pub letter: usize,
    pub point: RationalVectorY,
}

impl CellVertexRef {
    pub fn new(word: Word, letter: usize) -> Result<Self> {
        let n = word.n();
        if letter == 0 || letter > n {
            return Err(GasketError::InvalidLetter { letter, n });
        }
        let point = s_word(&word)?.apply(&RationalVectorY::vertex(n, letter));
        Ok(Self { word, letter, point })
    }

    pub fn vertex(n: usize, letter: usize) -> Result<Self> {
        Self::new(Word::empty(n), letter)
    }
}

impl PartialEq for CellVertexRef {
    fn eq(&self, other: &Self) -> bool {
        self.point == other.point
    }
}

impl Eq for CellVertexRef {}

/// Address of one arc: cell rank (lexicographic), pair `j < k`, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ArcId {
    pub cell: usize,
    pub j: usize,
    pub k: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphEdge {
    pub arc: ArcId,
    /// Vertex index of `S_w(p_j)`.
    pub a: usize,
    /// Vertex index of `S_w(p_k)`.
    pub b: usize,
    pub length: f64,
}

/// Limits for [`build_geodesic_graph`].
#[derive(Debug, Clone, PartialEq)]
pub struct GraphLimits {
    pub level: LevelLimits,
    pub max_edges: u128,
}

impl Default for GraphLimits {
    fn default() -> Self {
        Self {
            level: LevelLimits::default(),
            max_edges: 4_000_000,
        }
    }
}

/// Level-`m` geodesic graph. `resolution` is the depth at which `Γ` is
/// resolved overall: arcs of level `m` use polylines of depth
/// `resolution - m`, so each level refines the previous one exactly.
#[derive(Debug, Clone)]
pub struct GeodesicGraph {
    curve: DeRhamCurve,
    level: Level,
    resolution: usize,
    edges: Vec<GraphEdge>,
    adjacency: Vec<Vec<(usize, usize)>>,
    graph: UnGraph<(), f64>,
    cell_maps: Vec<FloatAffineY>,
}

pub fn build_geodesic_graph(n: usize, m: usize, resolution: usize) -> Result<GeodesicGraph> {
    GeodesicGraph::build(n, m, resolution, &GraphLimits::default())
}

impl GeodesicGraph {
    pub fn build(n: usize, m: usize, resolution: usize, limits: &GraphLimits) -> Result<Self> {
        validate_n(n)?;
        if resolution < m {
            return Err(GasketError::Domain {
                value: resolution as f64,
                domain: "graph resolution >= level",
            });
        }
        let pairs = (n * (n - 1) / 2) as u128;
        let edges_needed = crate::energy::cell_count(n, m).saturating_mul(pairs);
        if edges_needed > limits.max_edges {
            return Err(GasketError::ResourceGuard {
                what: "geodesic graph edges",
                requested: edges_needed,
                cap: limits.max_edges,
            });
        }
        let curve = DeRhamCurve::new(n)?;
        let level = Level::build(n, m, Coordinates::Harmonic, &limits.level)?;
        let s_maps = (1..=n).map(|j| Ok(s_map(n, j)?.to_float())).collect::<Result<Vec<_>>>()?;
        let cell_maps: Vec<FloatAffineY> = Word::all(n, m)
            .map(|w| {
                w.letters()
                    .iter()
                    .fold(FloatAffineY::identity(n), |acc, &l| acc.compose(&s_maps[l as usize - 1]))
            })
            .collect();
        let perms = (1..=n)
            .flat_map(|j| ((j + 1)..=n).map(move |k| (j, k)))
            .map(|(j, k)| Ok(((j, k), symmetry_transform(n, j, k)?)))
            .collect::<Result<Vec<_>>>()?;
        let planar = curve.polyline(resolution - m);
        let mut edges = Vec::with_capacity(edges_needed as usize);
        let mut adjacency = vec![Vec::new(); level.vertex_count()];
        for (c, sw) in cell_maps.iter().enumerate() {
            let word = level.word_of_cell(c);
            let cell = level.cell(c);
            for ((j, k), perm) in &perms {
                let map = ArcMap::from_parts(&curve, &word, (*j, *k), sw, perm);
                let edge = GraphEdge {
                    arc: ArcId { cell: c, j: *j, k: *k },
                    a: cell[j - 1],
                    b: cell[k - 1],
                    length: map.length(&planar),
                };
                let e = edges.len();
                adjacency[edge.a].push((e, edge.b));
                adjacency[edge.b].push((e, edge.a));
                edges.push(edge);
            }
        }
        let mut graph = UnGraph::with_capacity(level.vertex_count(), edges.len());
        for _ in 0..level.vertex_count() {
            graph.add_node(());
        }
        for e in &edges {
            graph.add_edge(NodeIndex::new(e.a), NodeIndex::new(e.b), e.length);
        }
        Ok(Self {
            curve,
            level,
            resolution,
            edges,
            adjacency,
            graph,
            cell_maps,
        })
    }

    pub fn n(&self) -> usize {
        self.level.n()
    }

    pub fn m(&self) -> usize {
        self.level.m()
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    /// Polyline depth of each arc.
    pub fn arc_depth(&self) -> usize {
        self.resolution - self.m()
    }

    pub fn level(&self) -> &Level {
        &self.level
    }

    pub fn curve(&self) -> &DeRhamCurve {
        &self.curve
    }

    pub fn edges(&self) -> &[GraphEdge] {
        &self.edges
    }

    pub fn vertex_count(&self) -> usize {
        self.level.vertex_count()
    }

    pub fn is_connected(&self) -> bool {
        self.distances_from(0).iter().all(|d| d.is_finite())
    }

    pub fn arc_map(&self, arc: ArcId) -> Result<ArcMap> {
        let perm = symmetry_transform(self.n(), arc.j, arc.k)?;
        let word = self.level.word_of_cell(arc.cell);
        Ok(ArcMap::from_parts(&self.curve, &word, (arc.j, arc.k), &self.cell_maps[arc.cell], &perm))
    }

    pub fn resolve(&self, v: &CellVertexRef) -> Result<usize> {
        self.level
            .find(&v.point)
            .ok_or_else(|| GasketError::UnknownVertex(v.point.to_f64().iter().copied().collect()))
    }

    /// Nearest vertex of this level to an ambient point, with its distance.
    pub fn snap(&self, x: &DVector<f64>) -> (usize, f64) {
        (0..self.vertex_count())
            .map(|i| {
                let p = DVector::from_vec(self.level.vertex_position_f64(i));
                (i, (p - x).norm())
            })
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
            .expect("levels are non-empty")
    }

    /// Dijkstra distances from `source`.
    pub fn distances_from(&self, source: usize) -> Vec<f64> {
        let found = dijkstra(&self.graph, NodeIndex::new(source), None, |e| *e.weight());
        let mut dist = vec![f64::INFINITY; self.vertex_count()];
        for (node, d) in found {
            dist[node.index()] = d;
        }
        dist
    }

    /// `d^{(m)}(p, q)`, computed from the lower-indexed endpoint so that it
    /// is exactly symmetric.
    pub fn distance(&self, p: usize, q: usize) -> f64 {
        let (a, b) = (p.min(q), p.max(q));
        self.distances_from(a)[b]
    }

    /// All-pairs distances, exactly symmetric.
    pub fn distance_matrix(&self) -> Vec<Vec<f64>> {
        let v = self.vertex_count();
        let mut out = vec![vec![0.0; v]; v];
        for a in 0..v {
            let row = self.distances_from(a);
            for (b, &d) in row.iter().enumerate().skip(a + 1) {
                out[a][b] = d;
                out[b][a] = d;
            }
        }
        out
    }

    /// Shortest path between vertex indices. Among minimal paths (within a
    /// relative slack of 1e-12) the one with the lexicographically smallest
    /// arc-address sequence, read from the lower-indexed endpoint, is chosen.
    pub fn shortest_path_indices(&self, p: usize, q: usize) -> GeodesicPath {
        if p == q {
            return GeodesicPath {
                arcs: Vec::new(),
                length: 0.0,
                vertices: vec![p],
            };
        }
        let (from, to) = (p.min(q), p.max(q));
        let to_target = self.distances_from(to);
        let slack = TIE_TOLERANCE * to_target[from].max(1.0);
        let mut arcs = Vec::new();
        let mut vertices = vec![from];
        let mut u = from;
        while u != to {
            let (e, v) = self.adjacency[u]
                .iter()
                .copied()
                .filter(|&(e, v)| self.edges[e].length + to_target[v] <= to_target[u] + slack)
                .min_by_key(|&(e, _)| self.edges[e].arc)
                .expect("a shortest-path edge leaves every reachable vertex");
            let edge = &self.edges[e];
            arcs.push(PathArc {
                arc: edge.arc,
                from: u,
                to: v,
                forward: u == edge.b,
                length: edge.length,
            });
            vertices.push(v);
            u = v;
        }
        let length = arcs.iter().map(|a| a.length).collect::<CompensatedSum>().value();
        let path = GeodesicPath { arcs, length, vertices };
        if p == from {
            path
        } else {
            path.reversed()
        }
    }

    pub fn shortest_path(&self, p: &CellVertexRef, q: &CellVertexRef) -> Result<GeodesicPath> {
        Ok(self.shortest_path_indices(self.resolve(p)?, self.resolve(q)?))
    }

    /// The path as one ambient polyline with each arc at `depth`.
    pub fn densify(&self, path: &GeodesicPath, depth: usize) -> Result<PolylineCurve> {
        let n = self.n();
        let mut coords: Vec<f64> = Vec::new();
        for (i, arc) in path.arcs.iter().enumerate() {
            let mut pl = self.arc_map(arc.arc)?.polyline(&self.curve, depth);
            if !arc.forward {
                pl = pl.reversed();
            }
            let skip = usize::from(i > 0);
            coords.extend(pl.points().skip(skip).flatten());
        }
        if path.arcs.is_empty() {
            coords.extend(self.level.vertex_position_f64(path.vertices[0]));
        }
        Ok(PolylineCurve::new(n, coords, depth))
    }
}

/// One traversed arc. `forward` means travelling along increasing `Γ`
/// parameter, i.e. from `S_w(p_k)` to `S_w(p_j)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathArc {
    pub arc: ArcId,
    pub from: usize,
    pub to: usize,
    pub forward: bool,
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicPath {
    pub arcs: Vec<PathArc>,
    pub length: f64,
    /// Visited vertex indices, endpoints included.
    pub vertices: Vec<usize>,
}

impl GeodesicPath {
    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }

    pub fn reversed(&self) -> GeodesicPath {
        GeodesicPath {
            arcs: self
                .arcs
                .iter()
                .rev()
                .map(|a| PathArc {
                    from: a.to,
                    to: a.from,
                    forward: !a.forward,
                    ..*a
                })
                .collect(),
            length: self.length,
            vertices: self.vertices.iter().rev().copied().collect(),
        }
    }
}

/// What to integrate against in [`length_via_metric_integral`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricChoice {
    /// `Z_m` at the word address of each node.
    Kusuoka,
    Identity,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricIntegralConfig {
    pub panels: usize,
    /// Length of the `{j, k}` address appended to the cell word for `Z`.
    pub z_depth: usize,
    pub metric: MetricChoice,
}

impl Default for MetricIntegralConfig {
    fn default() -> Self {
        Self {
            panels: 4096,
            z_depth: 24,
            metric: MetricChoice::Kusuoka,
        }
    }
}

/// `Σ_arcs ∫_0^1 <x'(t), Z(x(t)) x'(t)>^{1/2} dt` by the composite midpoint
/// rule, with `x = S_w O_jk g` and `g'` from a chord of width 1e-10.
///
/// `Z` at a node is `Z_approx(w · O_jk(u))` where `u` is the `{1, 2}`
/// address of `g(t)` of length `z_depth`. A node falling on a junction of
/// that depth (where the address is ambiguous) is moved right by 1e-12.
pub fn length_via_metric_integral(
    graph: &GeodesicGraph,
    path: &GeodesicPath,
    config: &MetricIntegralConfig,
    measure: &KusuokaMeasure,
) -> Result<f64> {
    if path.is_empty() {
        return Err(GasketError::Domain {
            value: 0.0,
            domain: "non-empty path",
        });
    }
    if config.panels == 0 {
        return Err(GasketError::Domain {
            value: 0.0,
            domain: "panels >= 1",
        });
    }
    let curve = graph.curve();
    let basis = measure.basis();
    let mut total = CompensatedSum::new();
    for arc in &path.arcs {
        let map = graph.arc_map(arc.arc)?;
        let relabel = |l: u8| if l == 1 { arc.arc.j as u8 } else { arc.arc.k as u8 };
        let mut acc = CompensatedSum::new();
        for i in 0..config.panels {
            let mut t = (i as f64 + 0.5) / config.panels as f64;
            let mut cell = curve.locate(t, config.z_depth);
            if t == cell.left[0] || t == cell.right[0] {
                t += 1e-12;
                cell = curve.locate(t, config.z_depth);
            }
            let slope = curve.slope(t, 1e-10);
            let velocity = &map.dt + &map.ds * slope;
            let integrand = match config.metric {
                MetricChoice::Identity => velocity.norm(),
                MetricChoice::Kusuoka => {
                    let mut letters = map.word.letters().to_vec();
                    letters.extend(cell.letters.iter().map(|&l| relabel(l)));
                    let z = measure.z_approx(&Word::new(graph.n(), letters)?)?;
                    let v = basis.coords_of(&velocity);
                    v.dot(&(z.z.matrix() * &v)).max(0.0).sqrt()
                }
            };
            acc.add(integrand);
        }
        total.add(acc.value() / config.panels as f64);
    }
    Ok(total.value())
}

#[derive(Debug, Clone, PartialEq)]
pub struct JunctionReport {
    pub depth: usize,
    /// Angle at each interior vertex of the path, in order.
    pub angles: Vec<f64>,
    pub max_angle: f64,
}

/// Angles between the one-sided tangents of consecutive arcs, from chords
/// of `Γ` parameter length `2^-depth` ending at the junction.
pub fn junction_c1_check(graph: &GeodesicGraph, path: &GeodesicPath, depth: usize) -> Result<JunctionReport> {
    let curve = graph.curve();
    let h = 0.5f64.powi(depth as i32);
    let width = h * 1e-4;
    let point = |map: &ArcMap, t: f64| -> Result<DVector<f64>> {
        let g = curve.eval_to_width(t, width)?;
        Ok(map.at([g.t, g.s]))
    };
    let mut angles = Vec::new();
    for pair in path.arcs.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        let (ma, mb) = (graph.arc_map(a.arc)?, graph.arc_map(b.arc)?);
        // direction of travel approaching, then leaving, the junction
        let (end, before) = if a.forward { (1.0, 1.0 - h) } else { (0.0, h) };
        let incoming = point(&ma, end)? - point(&ma, before)?;
        let (start, after) = if b.forward { (0.0, h) } else { (1.0, 1.0 - h) };
        let outgoing = point(&mb, after)? - point(&mb, start)?;
        angles.push(angle_between(incoming.as_slice(), outgoing.as_slice()));
    }
    let max_angle = angles.iter().copied().fold(0.0, f64::max);
    Ok(JunctionReport { depth, angles, max_angle })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TangentMetricReport {
    pub samples: usize,
    /// Mean of `|Z_m(w) - ττ^t|_F`.
    pub mean_distance: f64,
    pub max_distance: f64,
    pub max_trace_error: f64,
}

/// Compares `Z_m(w)` for `ν`-sampled words over `{1, 2}` with the projection
/// onto the numerical unit tangent of `Γ` at the junction point of the cell
/// `S_w(Γ)`.
pub fn tangent_metric_check(n: usize, samples: usize, word_len: usize, tangent_depth: usize, seed: u64) -> Result<TangentMetricReport> {
    let measure = KusuokaMeasure::new(n)?;
    let curve = DeRhamCurve::new(n)?;
    let basis = measure.basis().clone();
    let mut sampler = WordSampler::with_alphabet(measure.clone(), seed, vec![1, 2]);
    let mut sum = CompensatedSum::new();
    let (mut max_distance, mut max_trace_error) = (0.0f64, 0.0f64);
    for _ in 0..samples {
        let (word, product) = sampler.sample_with_product(word_len);
        let z = measure.metric_from_product(word.clone(), &product);
        let map = word
            .letters()
            .iter()
            .fold(crate::derham::Affine2::IDENTITY, |acc, &l| acc.compose(curve.map(l)));
        let t = map.apply(curve.junction())[0];
        let tau = basis.coords_of(&curve.tangent_ambient(t, tangent_depth)?);
        let tau = &tau / tau.norm();
        let d = (z.z.matrix() - &tau * tau.transpose()).norm();
        sum.add(d);
        max_distance = max_distance.max(d);
        max_trace_error = max_trace_error.max((z.trace - 1.0).abs());
    }
    Ok(TangentMetricReport {
        samples,
        mean_distance: sum.value() / samples.max(1) as f64,
        max_distance,
        max_trace_error,
    })
}

/// Metric axioms of `d^{(m)}` on all vertex pairs of one graph.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricAxiomsReport {
    pub vertices: usize,
    pub zero_diagonal: bool,
    /// Exact equality `d(p, q) == d(q, p)`.
    pub symmetric: bool,
    /// Smallest off-diagonal distance.
    pub min_distance: f64,
    /// `max (d(p, r) - d(p, q) - d(q, r))`.
    pub max_triangle_excess: f64,
    /// `min (d(p, q) - |p - q|)`.
    pub min_chord_slack: f64,
}

pub fn metric_axioms_check(graph: &GeodesicGraph) -> MetricAxiomsReport {
    let d = graph.distance_matrix();
    let v = graph.vertex_count();
    let pos: Vec<DVector<f64>> = (0..v)
        .map(|p| DVector::from_vec(graph.level().vertex_position_f64(p)))
        .collect();
    let mut report = MetricAxiomsReport {
        vertices: v,
        zero_diagonal: true,
        symmetric: true,
        min_distance: f64::INFINITY,
        max_triangle_excess: f64::NEG_INFINITY,
        min_chord_slack: f64::INFINITY,
    };
    for p in 0..v {
        report.zero_diagonal &= d[p][p] == 0.0;
        for q in 0..v {
            report.symmetric &= d[p][q] == d[q][p];
            if p != q {
                report.min_distance = report.min_distance.min(d[p][q]);
                report.min_chord_slack = report.min_chord_slack.min(d[p][q] - (&pos[p] - &pos[q]).norm());
            }
            for r in 0..v {
                report.max_triangle_excess = report.max_triangle_excess.max(d[p][r] - d[p][q] - d[q][r]);
            }
        }
    }
    report
}

/// `max (d^{(m+1)}(p, q) - d^{(m)}(p, q))` over `p, q ∈ V_m`, per consecutive level pair.
#[derive(Debug, Clone, PartialEq)]
pub struct RefinementReport {
    pub levels: Vec<usize>,
    pub resolution: usize,
    pub excess: Vec<f64>,
    pub max_excess: f64,
}

pub fn refinement_check(n: usize, min_level: usize, max_level: usize, resolution: usize) -> Result<RefinementReport> {
    let levels: Vec<usize> = (min_level..=max_level).collect();
    let graphs: Vec<GeodesicGraph> = levels
        .iter()
        .map(|&m| build_geodesic_graph(n, m, resolution))
        .collect::<Result<_>>()?;
    let mut excess = Vec::with_capacity(graphs.len().saturating_sub(1));
    for w in graphs.windows(2) {
        let (coarse, fine) = (&w[0], &w[1]);
        let embed = coarse.level().embed_into(fine.level())?;
        let mut worst = f64::NEG_INFINITY;
        for p in 0..coarse.vertex_count() {
            let dc = coarse.distances_from(p);
            let df = fine.distances_from(embed[p]);
            for q in 0..coarse.vertex_count() {
                worst = worst.max(df[embed[q]] - dc[q]);
            }
        }
        excess.push(worst);
    }
    let max_excess = excess.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(RefinementReport {
        levels,
        resolution,
        excess,
        max_excess,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn max_point_gap(a: &PolylineCurve, b: &PolylineCurve) -> f64 {
        assert_eq!(a.len(), b.len());
        a.points()
            .zip(b.points())
            .flat_map(|(x, y)| x.iter().zip(y).map(|(u, v)| (u - v).abs()))
            .fold(0.0, f64::max)
    }

    #[test]
    fn arcs_gamma_jk() {
        let n = 4;
        let gamma = DeRhamCurve::new(n).unwrap().polyline_ambient(10);
        assert!(max_point_gap(&arc_gamma_jk(n, 1, 2, 10).unwrap(), &gamma) == 0.0);
        for (j, k) in [(1, 3), (2, 4), (3, 4), (4, 1)] {
            let arc = arc_gamma_jk(n, j, k, 10).unwrap();
            assert!((arc.length() - gamma.length()).abs() < 1e-12);
            let ifs = arc_gamma_jk_ifs(n, j, k, 10).unwrap();
            assert!(max_point_gap(&arc, &ifs) < 1e-12);
            let pk = RationalVectorY::vertex(n, k).to_f64();
            assert!(arc.point(0).iter().zip(pk.iter()).all(|(a, b)| (a - b).abs() < 1e-15));
        }
        assert!(matches!(arc_gamma_jk(n, 2, 2, 4), Err(GasketError::InvalidPair(2, 2))));
    }

    #[test]
    fn cell_arc_bounds() {
        let n = 3;
        let curve = DeRhamCurve::new(n).unwrap();
        let l_gamma = curve.length(12);
        assert!((cell_arc_length(&Word::empty(n), 1, 2, 12).unwrap() - l_gamma).abs() < 1e-14);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let len = rng.gen_range(1..=5);
            let word = Word::new(n, (0..len).map(|_| rng.gen_range(1..=3u8)).collect()).unwrap();
            let j = rng.gen_range(1..=3);
            let k = (j % 3) + 1;
            let (j, k) = (j.min(k), j.max(k));
            let length = cell_arc_length(&word, j, k, 10).unwrap();
            let sw = s_word(&word).unwrap().to_float();
            let at = |x: &DVector<f64>| sw.apply(x);
            let pj = at(&RationalVectorY::vertex(n, j).to_f64());
            let pk = at(&RationalVectorY::vertex(n, k).to_f64());
            let apex = at(&DVector::zeros(n));
            let chord = (&pj - &pk).norm();
            // affine image of the tangent triangle (p_k, 0, p_j) bounds the arc
            let triangle = (&pj - &apex).norm() + (&apex - &pk).norm();
            assert!(length >= chord * (1.0 - 1e-12));
            assert!(length <= triangle * (1.0 + 1e-12));
            let op = sw.linear.clone().svd(false, false).singular_values.max();
            assert!(length <= op * l_gamma * (1.0 + 1e-12));
        }
    }

    #[test]
    fn graph_examples() {
        let g0 = build_geodesic_graph(3, 0, 12).unwrap();
        assert_eq!(g0.vertex_count(), 3);
        let l = DeRhamCurve::new(3).unwrap().length(12);
        assert!(g0.edges().iter().all(|e| (e.length - l).abs() < 1e-12));
        let g1 = build_geodesic_graph(3, 1, 12).unwrap();
        assert_eq!((g1.vertex_count(), g1.edges().len()), (6, 9));
        assert!(g1.is_connected());
        for e in g1.edges() {
            let a = DVector::from_vec(g1.level().vertex_position_f64(e.a));
            let b = DVector::from_vec(g1.level().vertex_position_f64(e.b));
            assert!(e.length > 0.0 && e.length >= (a - b).norm());
        }
        let limits = GraphLimits {
            max_edges: 10,
            ..GraphLimits::default()
        };
        assert!(matches!(GeodesicGraph::build(3, 2, 8, &limits), Err(GasketError::ResourceGuard { .. })));
    }

    #[test]
    fn cell_maps_hit_vertices() {
        let g = build_geodesic_graph(4, 2, 6).unwrap();
        for e in g.edges() {
            let map = g.arc_map(e.arc).unwrap();
            let a = DVector::from_vec(g.level().vertex_position_f64(e.a));
            let b = DVector::from_vec(g.level().vertex_position_f64(e.b));
            assert!((map.at([1.0, 0.0]) - a).norm() < 1e-14);
            assert!((map.at([0.0, 0.0]) - b).norm() < 1e-14);
        }
    }

    #[test]
    fn shortest_paths() {
        let g0 = build_geodesic_graph(3, 0, 12).unwrap();
        let p1 = CellVertexRef::vertex(3, 1).unwrap();
        let p2 = CellVertexRef::vertex(3, 2).unwrap();
        let same = g0.shortest_path(&p1, &p1).unwrap();
        assert!(same.is_empty() && same.length == 0.0);
        let path = g0.shortest_path(&p1, &p2).unwrap();
        assert!((path.length - DeRhamCurve::new(3).unwrap().length(12)).abs() < 1e-13);
        let back = g0.shortest_path(&p2, &p1).unwrap();
        assert_eq!(path.length, back.length);
        assert_eq!(path.arcs[0].from, g0.resolve(&p1).unwrap());

        // p_1 to p_2 through S_1(p_2) at level 1
        let g1 = build_geodesic_graph(3, 1, 12).unwrap();
        let path = g1.shortest_path(&p1, &p2).unwrap();
        assert_eq!(path.arcs.len(), 2);
        assert!((path.length - g0.distance(0, 1)).abs() < 1e-12);
        let mid = CellVertexRef::new(Word::parse(3, "1").unwrap(), 2).unwrap();
        assert_eq!(path.vertices[1], g1.resolve(&mid).unwrap());
        let foreign = CellVertexRef::new(Word::parse(3, "12").unwrap(), 3).unwrap();
        assert!(matches!(g1.shortest_path(&p1, &foreign), Err(GasketError::UnknownVertex(_))));
    }

    #[test]
    fn metric_axioms_level_two() {
        let g = build_geodesic_graph(3, 2, 12).unwrap();
        let d = g.distance_matrix();
        let v = g.vertex_count();
        for p in 0..v {
            assert_eq!(d[p][p], 0.0);
            for q in 0..v {
                assert_eq!(d[p][q], d[q][p]);
                if p != q {
                    assert!(d[p][q] > 0.0);
                    let a = DVector::from_vec(g.level().vertex_position_f64(p));
                    let b = DVector::from_vec(g.level().vertex_position_f64(q));
                    assert!(d[p][q] >= (a - b).norm());
                }
                for r in 0..v {
                    assert!(d[p][q] + d[q][r] >= d[p][r] - 1e-12);
                }
            }
        }
    }

    #[test]
    fn report_helpers() {
        let g = build_geodesic_graph(3, 1, 10).unwrap();
        let r = metric_axioms_check(&g);
        assert!(r.zero_diagonal && r.symmetric);
        assert!(r.min_distance > 0.0 && r.min_chord_slack >= 0.0);
        assert!(r.max_triangle_excess <= 1e-12);
        let f = refinement_check(3, 0, 2, 10).unwrap();
        assert_eq!(f.excess.len(), 2);
        assert!(f.max_excess <= 1e-12);
    }

    #[test]
    fn levels_refine() {
        let resolution = 12;
        let graphs: Vec<GeodesicGraph> = (1..=4).map(|m| build_geodesic_graph(3, m, resolution).unwrap()).collect();
        for w in graphs.windows(2) {
            let (coarse, fine) = (&w[0], &w[1]);
            let embed = coarse.level().embed_into(fine.level()).unwrap();
            let dc = coarse.distance_matrix();
            for p in 0..coarse.vertex_count() {
                let df = fine.distances_from(embed[p]);
                for q in 0..coarse.vertex_count() {
                    assert!(df[embed[q]] <= dc[p][q] + 1e-12);
                }
            }
        }
    }

    #[test]
    fn n2_segment() {
        let g = build_geodesic_graph(2, 3, 10).unwrap();
        let ends = [1, 2].map(|j| g.resolve(&CellVertexRef::vertex(2, j).unwrap()).unwrap());
        let path = g.shortest_path_indices(ends[0], ends[1]);
        assert_eq!(path.arcs.len(), 8);
        assert!((path.length - 1.0).abs() < 1e-12);
        let measure = KusuokaMeasure::new(2).unwrap();
        let config = MetricIntegralConfig {
            panels: 64,
            ..MetricIntegralConfig::default()
        };
        let integral = length_via_metric_integral(&g, &path, &config, &measure).unwrap();
        assert!((integral - 1.0).abs() < 1e-12);
        let report = junction_c1_check(&g, &path, 10).unwrap();
        assert_eq!(report.angles.len(), path.arcs.len() - 1);
        assert!(report.max_angle < 1e-7, "{report:?}");
    }

    #[test]
    fn metric_integral_matches_polyline() {
        let g = build_geodesic_graph(3, 0, 14).unwrap();
        let path = g.shortest_path_indices(0, 1);
        let measure = KusuokaMeasure::new(3).unwrap();
        let config = MetricIntegralConfig {
            panels: 512,
            ..MetricIntegralConfig::default()
        };
        let z = length_via_metric_integral(&g, &path, &config, &measure).unwrap();
        let id = length_via_metric_integral(
            &g,
            &path,
            &MetricIntegralConfig {
                metric: MetricChoice::Identity,
                ..config
            },
            &measure,
        )
        .unwrap();
        assert!((z - path.length).abs() / path.length < 1e-3, "{z} {}", path.length);
        assert!((z - id).abs() / id < 1e-3);
    }

    #[test]
    fn junction_inside_gamma() {
        let g = build_geodesic_graph(3, 1, 14).unwrap();
        let path = g.shortest_path_indices(0, g.resolve(&CellVertexRef::vertex(3, 2).unwrap()).unwrap());
        let angles: Vec<f64> = [8, 11, 14].iter().map(|&d| junction_c1_check(&g, &path, d).unwrap().max_angle).collect();
        assert!(angles.windows(2).all(|w| w[1] < w[0]), "{angles:?}");
        assert!(angles[2] <= 0.01);
    }

    #[test]
    fn z_is_tangent_projection() {
        let report = tangent_metric_check(3, 40, 30, 20, 5).unwrap();
        assert!(report.mean_distance <= 0.05, "{report:?}");
        assert!(report.max_trace_error <= 1e-12);
    }
}
