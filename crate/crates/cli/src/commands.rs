//! One function per subcommand. Each returns the rendered document and the
//! resolved parameters recorded in the manifest.

use serde_json::{json, Map, Value};

use harmonic_gasket::derham::{
    closed_form_holder, corner_cut_deviation, de_rham_holder, holder_estimate, length_report, DeRhamCurve,
    HolderConfig, RegionUpsilon,
};
use harmonic_gasket::energy::{conjugacy_check, harmonic_invariance_check, Level, LevelLimits};
use harmonic_gasket::geodesic::{
    build_geodesic_graph, junction_c1_check, length_via_metric_integral, metric_axioms_check, refinement_check,
    tangent_metric_check, CellVertexRef, GeodesicGraph, MetricIntegralConfig,
};
use harmonic_gasket::geometry::{hs_norms_sq, partition_defect, validate_n, Coordinates};
use harmonic_gasket::heat::{build_laplacian, dyadic_times, gaussian_fit, heat_property_check};
use harmonic_gasket::kusuoka::{mass_check, metric_identity_check, KusuokaMeasure};
use harmonic_gasket::{RationalVectorY, Word};

use crate::args::{
    CoordinateChoice, CurveArgs, EnergyArgs, Format, GaussianArgs, GeodesicArgs, GlobalArgs, HeatArgs, HolderArgs,
    MeasureArgs, MetricArgs, UpsilonArgs, VerticesArgs,
};
use crate::error::{CliError, CliResult};
use crate::output::{json_document, num, svg_document, Csv};

pub struct Rendered {
    pub text: String,
    pub parameters: Map<String, Value>,
}

struct Params(Map<String, Value>);

impl Params {
    fn new(g: &GlobalArgs) -> Self {
        let mut m = Map::new();
        m.insert("n".into(), json!(g.n));
        m.insert("format".into(), json!(g.format.name()));
        m.insert("seed".into(), json!(g.seed));
        Self(m)
    }

    fn set(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.0.insert(key.into(), value.into());
        self
    }
}

fn render(params: Params, text: String) -> CliResult<Rendered> {
    Ok(Rendered {
        text,
        parameters: params.0,
    })
}

fn reject_svg(g: &GlobalArgs, command: &str) -> CliResult<()> {
    if g.format == Format::Svg {
        return Err(CliError::usage(format!("--format svg is not available for {command}")));
    }
    Ok(())
}

fn reject(flag: Option<usize>, name: &str, command: &str) -> CliResult<()> {
    if flag.is_some() {
        return Err(CliError::usage(format!("--{name} has no meaning for {command}")));
    }
    Ok(())
}

fn n_range(g: &GlobalArgs, up_to: Option<usize>) -> CliResult<std::ops::RangeInclusive<usize>> {
    let hi = up_to.unwrap_or(g.n);
    if hi < g.n {
        return Err(CliError::usage(format!("--up-to {hi} is below --n {}", g.n)));
    }
    validate_n(hi)?;
    Ok(g.n..=hi)
}

fn nums(xs: impl IntoIterator<Item = f64>) -> Value {
    Value::Array(xs.into_iter().map(|x| json!(x)).collect())
}

fn parse_word(n: usize, s: &str) -> CliResult<Word> {
    Word::parse(n, s).map_err(|e| CliError::usage(format!("invalid word {s:?}: {e}")))
}

/// `w:j` is `S_w(p_j)`; a bare `j` is `p_j`.
fn parse_vertex(n: usize, s: &str) -> CliResult<CellVertexRef> {
    let (word, letter) = match s.split_once(':') {
        Some((w, j)) => (w, j),
        None => ("", s),
    };
    let letter: usize = letter
        .parse()
        .map_err(|_| CliError::usage(format!("invalid vertex {s:?}: expected w:j")))?;
    let word = if word.is_empty() { Word::empty(n) } else { parse_word(n, word)? };
    Ok(CellVertexRef::new(word, letter)?)
}

pub fn vertices(g: &GlobalArgs, a: &VerticesArgs) -> CliResult<Rendered> {
    reject_svg(g, "vertices")?;
    reject(g.depth, "depth", "vertices")?;
    let m = g.level.unwrap_or(1);
    let coords = match a.coords {
        CoordinateChoice::Euclidean => Coordinates::Euclidean,
        CoordinateChoice::Harmonic => Coordinates::Harmonic,
    };
    let level = Level::build(g.n, m, coords, &LevelLimits::default())?;
    let name = match a.coords {
        CoordinateChoice::Euclidean => "euclidean",
        CoordinateChoice::Harmonic => "harmonic",
    };
    let params = Params::new(g).set("level", m).set("coords", name);
    let points: Vec<Vec<f64>> = (0..level.vertex_count()).map(|i| level.vertex_position_f64(i)).collect();
    let text = match g.format {
        Format::Csv => {
            let header: Vec<String> = std::iter::once("index".to_string())
                .chain((1..=g.n).map(|i| format!("x{i}")))
                .collect();
            let mut csv = Csv::new(&header);
            for (i, p) in points.iter().enumerate() {
                csv.row(std::iter::once(i.to_string()).chain(p.iter().map(|&x| num(x))));
            }
            csv.finish()
        }
        _ => json_document(json!({
            "n": g.n,
            "level": m,
            "coords": name,
            "vertices": points,
        })),
    };
    render(params, text)
}

pub fn curve(g: &GlobalArgs, a: &CurveArgs) -> CliResult<Rendered> {
    reject(g.level, "level", "curve")?;
    let depth = g.depth.unwrap_or(10);
    let ns = n_range(g, a.up_to)?;
    let params = Params::new(g)
        .set("depth", depth)
        .set("up_to", *ns.end())
        .set("summary", a.summary || a.up_to.is_some())
        .set("min_length_depth", a.min_length_depth);
    if g.format != Format::Json && a.up_to.is_some() {
        return Err(CliError::usage("--up-to needs --format json"));
    }
    let curve = DeRhamCurve::new(g.n)?;
    let poly = curve.polyline(depth);
    let text = match g.format {
        Format::Csv => {
            let mut csv = Csv::new(&["t", "x1", "x2"]);
            let scale = (1u64 << depth) as f64;
            for i in 0..poly.len() {
                let p = poly.point2(i);
                csv.row([num(i as f64 / scale), num(p[0]), num(p[1])]);
            }
            csv.finish()
        }
        Format::Svg => svg_document(&[(0..poly.len()).map(|i| poly.point2(i)).collect()])?,
        Format::Json => {
            let mut results = Vec::new();
            for n in ns {
                let mut entry = curve_summary(n, depth, a.min_length_depth)?;
                if !(a.summary || a.up_to.is_some()) {
                    let pts: Vec<[f64; 2]> = (0..poly.len()).map(|i| poly.point2(i)).collect();
                    entry.insert("points".into(), json!(pts));
                }
                results.push(Value::Object(entry));
            }
            json_document(json!({ "curves": results }))
        }
    };
    render(params, text)
}

fn curve_summary(n: usize, depth: usize, min_length_depth: usize) -> CliResult<Map<String, Value>> {
    let curve = DeRhamCurve::new(n)?;
    let cut_depth = depth.min(12);
    let deviation = (0..=cut_depth)
        .map(|d| corner_cut_deviation(n, d))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let mut m = Map::new();
    m.insert("n".into(), json!(n));
    m.insert("depth".into(), json!(depth));
    m.insert("ratio".into(), json!(curve.ratio()));
    m.insert("length".into(), json!(curve.length(depth)));
    m.insert(
        "corner_cut".into(),
        json!({ "max_depth": cut_depth, "max_deviation": deviation }),
    );
    if depth > min_length_depth {
        let r = length_report(n, min_length_depth, depth)?;
        m.insert(
            "lengths".into(),
            json!({
                "depths": r.depths,
                "lengths": nums(r.lengths),
                "increments": nums(r.increments),
                "increments_decreasing": r.increments_decreasing,
                "extrapolated": r.extrapolated,
            }),
        );
    }
    Ok(m)
}

pub fn measure(g: &GlobalArgs, a: &MeasureArgs) -> CliResult<Rendered> {
    reject_svg(g, "measure")?;
    reject(g.depth, "depth", "measure")?;
    let k = KusuokaMeasure::new(g.n)?;
    if let Some(w) = &a.word {
        if g.level.is_some() {
            return Err(CliError::usage("--word and --level are mutually exclusive"));
        }
        let word = parse_word(g.n, w)?;
        let mass = k.nu_mass(&word)?;
        let params = Params::new(g).set("word", word.to_string());
        let text = match g.format {
            Format::Csv => {
                let mut csv = Csv::new(&["word", "mass"]);
                csv.row([word.to_string(), num(mass)]);
                csv.finish()
            }
            _ => json_document(json!({ "word": word.to_string(), "mass": mass })),
        };
        return render(params, text);
    }
    let m = g.level.unwrap_or(3);
    let params = Params::new(g).set("level", m);
    let text = match g.format {
        Format::Csv => {
            let limits = LevelLimits::default();
            if harmonic_gasket::energy::cell_count(g.n, m) > limits.max_cells {
                return Err(harmonic_gasket::GasketError::ResourceGuard {
                    what: "words",
                    requested: harmonic_gasket::energy::cell_count(g.n, m),
                    cap: limits.max_cells,
                }
                .into());
            }
            let mut csv = Csv::new(&["word", "mass"]);
            for w in Word::all(g.n, m) {
                let mass = k.nu_mass(&w)?;
                csv.row([w.to_string(), num(mass)]);
            }
            csv.finish()
        }
        _ => {
            let r = mass_check(&k, m)?;
            json_document(json!({
                "n": g.n,
                "level": m,
                "totals": nums(r.totals),
                "max_total_error": r.max_total_error,
                "max_additivity_residual": r.max_additivity_residual,
            }))
        }
    };
    render(params, text)
}

pub fn metric(g: &GlobalArgs, a: &MetricArgs) -> CliResult<Rendered> {
    reject_svg(g, "metric")?;
    reject(g.level, "level", "metric")?;
    reject(g.depth, "depth", "metric")?;
    if let Some(w) = &a.word {
        if a.tangent || a.up_to.is_some() {
            return Err(CliError::usage("--word excludes --tangent and --up-to"));
        }
        let word = parse_word(g.n, w)?;
        let k = KusuokaMeasure::new(g.n)?;
        let z = k.z_approx(&word)?;
        let params = Params::new(g).set("word", word.to_string());
        let mat = z.z.matrix();
        let text = match g.format {
            Format::Csv => {
                let mut csv = Csv::new(&["row", "col", "value"]);
                for i in 0..mat.nrows() {
                    for j in 0..mat.ncols() {
                        csv.row([i.to_string(), j.to_string(), num(mat[(i, j)])]);
                    }
                }
                csv.finish()
            }
            _ => {
                let rows: Vec<Vec<f64>> = (0..mat.nrows()).map(|i| mat.row(i).iter().copied().collect()).collect();
                json_document(json!({
                    "word": word.to_string(),
                    "z": rows,
                    "trace": z.trace,
                    "idempotency_residual": z.idempotency_residual,
                    "eigenvalues": nums(z.eigenvalues.iter().copied()),
                }))
            }
        };
        return render(params, text);
    }
    if a.tangent {
        if a.up_to.is_some() {
            return Err(CliError::usage("--tangent excludes --up-to"));
        }
        let r = tangent_metric_check(g.n, a.samples, a.word_length, a.tangent_depth, g.seed)?;
        let params = Params::new(g)
            .set("samples", a.samples)
            .set("word_length", a.word_length)
            .set("tangent_depth", a.tangent_depth);
        let text = match g.format {
            Format::Csv => {
                let mut csv = Csv::new(&["samples", "mean_distance", "max_distance", "max_trace_error"]);
                csv.row([r.samples.to_string(), num(r.mean_distance), num(r.max_distance), num(r.max_trace_error)]);
                csv.finish()
            }
            _ => json_document(json!({
                "n": g.n,
                "samples": r.samples,
                "word_length": a.word_length,
                "tangent_depth": a.tangent_depth,
                "mean_distance": r.mean_distance,
                "max_distance": r.max_distance,
                "max_trace_error": r.max_trace_error,
            })),
        };
        return render(params, text);
    }
    let ns = n_range(g, a.up_to)?;
    let params = Params::new(g).set("up_to", *ns.end());
    let mut rows = Vec::new();
    for n in ns {
        let expected = (n as f64 - 1.0) / (n as f64 + 2.0);
        let hs = hs_norms_sq(n)?;
        let hs_error = hs.iter().map(|h| (h - expected).abs()).fold(0.0, f64::max);
        rows.push((n, partition_defect(n)?, hs, expected, hs_error));
    }
    let text = match g.format {
        Format::Csv => {
            let mut csv = Csv::new(&["n", "partition_defect", "hs_expected", "hs_max_error"]);
            for (n, d, _, e, err) in &rows {
                csv.row([n.to_string(), num(*d), num(*e), num(*err)]);
            }
            csv.finish()
        }
        _ => {
            let ops: Vec<Value> = rows
                .into_iter()
                .map(|(n, d, hs, e, err)| {
                    json!({
                        "n": n,
                        "partition_defect": d,
                        "hs_norms_sq": nums(hs),
                        "hs_expected": e,
                        "hs_max_error": err,
                    })
                })
                .collect();
            json_document(json!({ "operators": ops }))
        }
    };
    render(params, text)
}

fn arc_word(graph: &GeodesicGraph, cell: usize) -> String {
    graph.level().word_of_cell(cell).to_string()
}

pub fn geodesic(g: &GlobalArgs, a: &GeodesicArgs) -> CliResult<Rendered> {
    let m = g.level.unwrap_or(2);
    let resolution = g.depth.unwrap_or(m + 10);
    if resolution < m {
        return Err(CliError::usage(format!("--depth {resolution} is below --level {m}")));
    }
    let from = parse_vertex(g.n, &a.from)?;
    let to = parse_vertex(g.n, &a.to)?;
    let graph = build_geodesic_graph(g.n, m, resolution)?;
    let path = graph.shortest_path(&from, &to)?;
    let mut params = Params::new(g)
        .set("level", m)
        .set("depth", resolution)
        .set("from", a.from.clone())
        .set("to", a.to.clone())
        .set("junction_depth", a.junction_depth)
        .set("axioms", a.axioms);
    if let Some(p) = a.panels {
        params = params.set("panels", p).set("z_depth", a.z_depth);
    }
    if let Some(r) = a.refine_to {
        params = params.set("refine_from", a.refine_from).set("refine_to", r);
    }
    let text = match g.format {
        Format::Csv => {
            let mut csv = Csv::new(&["index", "word", "j", "k", "forward", "from", "to", "length"]);
            for (i, arc) in path.arcs.iter().enumerate() {
                csv.row([
                    i.to_string(),
                    arc_word(&graph, arc.arc.cell),
                    arc.arc.j.to_string(),
                    arc.arc.k.to_string(),
                    arc.forward.to_string(),
                    arc.from.to_string(),
                    arc.to.to_string(),
                    num(arc.length),
                ]);
            }
            csv.finish()
        }
        Format::Svg => {
            let depth = graph.arc_depth().min(8);
            let plane = graph.curve().plane();
            let mut paths = Vec::with_capacity(path.arcs.len());
            for arc in &path.arcs {
                let map = graph.arc_map(arc.arc)?;
                let mut pts: Vec<[f64; 2]> = map
                    .polyline(graph.curve(), depth)
                    .points()
                    .map(|x| plane.coords_of(&nalgebra_vector(x)))
                    .collect();
                if !arc.forward {
                    pts.reverse();
                }
                paths.push(pts);
            }
            svg_document(&paths)?
        }
        Format::Json => {
            let arcs: Vec<Value> = path
                .arcs
                .iter()
                .map(|arc| {
                    json!({
                        "word": arc_word(&graph, arc.arc.cell),
                        "j": arc.arc.j,
                        "k": arc.arc.k,
                        "forward": arc.forward,
                        "from": arc.from,
                        "to": arc.to,
                        "length": arc.length,
                    })
                })
                .collect();
            let junction = junction_c1_check(&graph, &path, a.junction_depth)?;
            let mut doc = Map::new();
            doc.insert("n".into(), json!(g.n));
            doc.insert("level".into(), json!(m));
            doc.insert("resolution".into(), json!(resolution));
            doc.insert("from".into(), json!(a.from));
            doc.insert("to".into(), json!(a.to));
            doc.insert("length".into(), json!(path.length));
            doc.insert("arcs".into(), Value::Array(arcs));
            doc.insert("vertices".into(), json!(path.vertices));
            doc.insert(
                "junction".into(),
                json!({
                    "depth": junction.depth,
                    "angles": nums(junction.angles),
                    "max_angle": junction.max_angle,
                }),
            );
            if let Some(panels) = a.panels {
                let config = MetricIntegralConfig {
                    panels,
                    z_depth: a.z_depth,
                    ..MetricIntegralConfig::default()
                };
                let k = KusuokaMeasure::new(g.n)?;
                let integral = length_via_metric_integral(&graph, &path, &config, &k)?;
                doc.insert(
                    "metric_integral".into(),
                    json!({
                        "panels": panels,
                        "z_depth": a.z_depth,
                        "length": integral,
                        "relative_error": (integral - path.length).abs() / path.length,
                    }),
                );
            }
            if a.axioms {
                let r = metric_axioms_check(&graph);
                doc.insert(
                    "axioms".into(),
                    json!({
                        "vertices": r.vertices,
                        "zero_diagonal": r.zero_diagonal,
                        "symmetric": r.symmetric,
                        "min_distance": r.min_distance,
                        "max_triangle_excess": r.max_triangle_excess,
                        "min_chord_slack": r.min_chord_slack,
                    }),
                );
            }
            if let Some(hi) = a.refine_to {
                if hi < a.refine_from || hi > resolution {
                    return Err(CliError::usage("--refine-to must lie in [--refine-from, --depth]"));
                }
                let r = refinement_check(g.n, a.refine_from, hi, resolution)?;
                doc.insert(
                    "refinement".into(),
                    json!({
                        "levels": r.levels,
                        "excess": nums(r.excess),
                        "max_excess": r.max_excess,
                    }),
                );
            }
            json_document(Value::Object(doc))
        }
    };
    render(params, text)
}

fn nalgebra_vector(x: &[f64]) -> nalgebra::DVector<f64> {
    nalgebra::DVector::from_column_slice(x)
}

pub fn holder(g: &GlobalArgs, a: &HolderArgs) -> CliResult<Rendered> {
    reject_svg(g, "holder")?;
    reject(g.level, "level", "holder")?;
    reject(g.depth, "depth", "holder")?;
    if a.min_exponent >= a.max_exponent {
        return Err(CliError::usage("--min-exponent must be below --max-exponent"));
    }
    let ns = n_range(g, a.up_to)?;
    let params = Params::new(g)
        .set("up_to", *ns.end())
        .set("estimate", !a.no_estimate)
        .set("base_points", a.base_points)
        .set("min_exponent", a.min_exponent)
        .set("max_exponent", a.max_exponent);
    let config = HolderConfig {
        exponents: a.min_exponent..=a.max_exponent,
        base_points: a.base_points,
    };
    let mut results = Vec::new();
    for n in ns {
        if n == 2 {
            results.push(json!({ "n": 2, "applicable": false }));
            continue;
        }
        let closed = closed_form_holder(n)?;
        let de_rham = de_rham_holder(1.0 / (n as f64 + 2.0))?;
        let mut entry = json!({
            "n": n,
            "applicable": true,
            "closed_form": closed,
            "de_rham": de_rham,
            "form_difference": (closed - de_rham).abs(),
        });
        if !a.no_estimate {
            let est = holder_estimate(n, &config)?;
            let obj = entry.as_object_mut().expect("object literal");
            obj.insert("estimate".into(), json!(est.exponent));
            obj.insert("r_squared".into(), json!(est.r_squared));
            obj.insert("relative_error".into(), json!((est.exponent - closed).abs() / closed));
            let samples: Vec<[f64; 2]> = est.samples.iter().map(|&(h, d)| [h, d]).collect();
            obj.insert("samples".into(), json!(samples));
        }
        results.push(entry);
    }
    let text = match g.format {
        Format::Csv => {
            let mut csv = Csv::new(&["n", "closed_form", "de_rham", "estimate", "r_squared"]);
            let cell = |v: &Value, k: &str| v.get(k).and_then(Value::as_f64).map(num).unwrap_or_default();
            for r in &results {
                csv.row([
                    r["n"].to_string(),
                    cell(r, "closed_form"),
                    cell(r, "de_rham"),
                    cell(r, "estimate"),
                    cell(r, "r_squared"),
                ]);
            }
            csv.finish()
        }
        _ => json_document(json!({ "results": results })),
    };
    render(params, text)
}

pub fn upsilon_check(g: &GlobalArgs, a: &UpsilonArgs) -> CliResult<Rendered> {
    reject_svg(g, "upsilon-check")?;
    reject(g.level, "level", "upsilon-check")?;
    let word_len = g.depth.unwrap_or(10);
    let region = RegionUpsilon::new(g.n, a.curve_depth, a.tolerance)?;
    let r = region.check(a.samples, word_len, a.star_samples, g.seed)?;
    let params = Params::new(g)
        .set("depth", word_len)
        .set("samples", a.samples)
        .set("star_samples", a.star_samples)
        .set("tolerance", a.tolerance)
        .set("curve_depth", a.curve_depth);
    let text = match g.format {
        Format::Csv => {
            let mut csv = Csv::new(&["check", "count", "failures"]);
            csv.row(["attractor".to_string(), r.attractor_points.to_string(), r.attractor_failures.to_string()]);
            csv.row(["star".to_string(), r.star_checks.to_string(), r.star_failures.to_string()]);
            csv.row(["translation".to_string(), r.translation_checks.to_string(), r.translation_failures.to_string()]);
            csv.finish()
        }
        _ => json_document(json!({
            "n": g.n,
            "depth": word_len,
            "tolerance": a.tolerance,
            "attractor_points": r.attractor_points,
            "attractor_failures": r.attractor_failures,
            "star_checks": r.star_checks,
            "star_failures": r.star_failures,
            "translation_checks": r.translation_checks,
            "translation_failures": r.translation_failures,
            "passed": r.passed(),
        })),
    };
    render(params, text)
}

pub fn energy_check(g: &GlobalArgs, a: &EnergyArgs) -> CliResult<Rendered> {
    use rand::{Rng, SeedableRng};
    reject_svg(g, "energy-check")?;
    reject(g.depth, "depth", "energy-check")?;
    validate_n(g.n)?;
    let m = g.level.unwrap_or(8);
    let params = Params::new(g)
        .set("level", m)
        .set("samples", a.samples)
        .set("conjugacy_level", a.conjugacy_level)
        .set("identity_level", a.identity_level);
    let inv = harmonic_invariance_check(g.n, m, a.samples, g.seed)?;
    let conj = conjugacy_check(g.n, a.conjugacy_level)?;
    let k = KusuokaMeasure::new(g.n)?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(g.seed);
    let vertex = RationalVectorY::vertex(g.n, 1).to_f64();
    let raw: Vec<f64> = (0..g.n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mean = raw.iter().sum::<f64>() / g.n as f64;
    let random = nalgebra::DVector::from_iterator(g.n, raw.iter().map(|x| x - mean));
    let mut identity = Vec::new();
    for (name, dir) in [("p1", vertex), ("random", random)] {
        let r = metric_identity_check(&k, &dir, a.identity_level)?;
        identity.push(json!({
            "direction": name,
            "a": nums(dir.iter().copied()),
            "metric_side": nums(r.metric_side),
            "expected": r.expected,
            "max_error": r.max_error,
            "energy": r.energy,
            "kappa": r.kappa,
        }));
    }
    let kappa_expected = (g.n * (g.n - 1)) as f64 / 2.0;
    let text = match g.format {
        Format::Csv => {
            let mut csv = Csv::new(&["check", "value"]);
            csv.row(["invariance_max_relative_error".to_string(), num(inv.max_relative_error)]);
            csv.row(["monotonicity_max_excess".to_string(), num(inv.max_monotonicity_excess)]);
            csv.row(["conjugacy_mismatches".to_string(), conj.mismatches.to_string()]);
            for r in &identity {
                let d = r["direction"].as_str().unwrap_or_default();
                csv.row([format!("identity_{d}_max_error"), num(r["max_error"].as_f64().unwrap_or(f64::NAN))]);
                csv.row([format!("identity_{d}_kappa"), num(r["kappa"].as_f64().unwrap_or(f64::NAN))]);
            }
            csv.finish()
        }
        _ => json_document(json!({
            "n": g.n,
            "invariance": {
                "level": inv.max_level,
                "samples": inv.samples,
                "max_relative_error": inv.max_relative_error,
                "max_monotonicity_excess": inv.max_monotonicity_excess,
            },
            "conjugacy": {
                "level": conj.level,
                "vertices": conj.vertices,
                "checks": conj.checks,
                "mismatches": conj.mismatches,
            },
            "identity": identity,
            "kappa_expected": kappa_expected,
        })),
    };
    render(params, text)
}

pub fn heat(g: &GlobalArgs, a: &HeatArgs) -> CliResult<Rendered> {
    reject_svg(g, "heat")?;
    reject(g.depth, "depth", "heat")?;
    let m = g.level.unwrap_or(3);
    let lap = build_laplacian(g.n, m)?;
    let params = Params::new(g).set("level", m).set("s", a.s).set("t", a.t);
    let text = match g.format {
        Format::Csv => {
            let dec = lap.decompose();
            let mut csv = Csv::new(&["k", "lambda"]);
            for (i, l) in dec.eigenvalues.iter().enumerate() {
                csv.row([i.to_string(), num(*l)]);
            }
            csv.finish()
        }
        _ => {
            let r = heat_property_check(&lap, a.s, a.t)?;
            json_document(json!({
                "n": r.n,
                "level": r.m,
                "vertices": r.vertices,
                "lambda0": r.lambda0,
                "min_eigenvalue": r.min_eigenvalue,
                "spectral_gap": r.spectral_gap,
                "constant_mode_error": r.constant_mode_error,
                "rebuild_error": r.rebuild_error,
                "times": r.times,
                "symmetry": r.symmetry,
                "semigroup": r.semigroup,
                "conservation": r.conservation,
                "min_kernel": r.min_kernel,
                "late_time": r.late_time,
                "long_time": r.long_time,
            }))
        }
    };
    render(params, text)
}

pub fn gaussian_report(g: &GlobalArgs, a: &GaussianArgs) -> CliResult<Rendered> {
    reject_svg(g, "gaussian-report")?;
    let m = g.level.unwrap_or(5);
    let resolution = g.depth.unwrap_or(m + 9);
    if resolution < m {
        return Err(CliError::usage(format!("--depth {resolution} is below --level {m}")));
    }
    if a.min_exponent > a.max_exponent {
        return Err(CliError::usage("--min-exponent must not exceed --max-exponent"));
    }
    let lap = build_laplacian(g.n, m)?;
    let graph = build_geodesic_graph(g.n, m, resolution)?;
    let v = lap.level().vertex_count();
    let pairs: Vec<(usize, usize)> = (0..v).flat_map(|x| ((x + 1)..v).map(move |y| (x, y))).collect();
    let times = dyadic_times(a.min_exponent, a.max_exponent);
    let r = gaussian_fit(&lap, &graph, &times, &pairs)?;
    let params = Params::new(g)
        .set("level", m)
        .set("depth", resolution)
        .set("min_exponent", a.min_exponent)
        .set("max_exponent", a.max_exponent);
    let text = match g.format {
        Format::Csv => {
            let mut csv = Csv::new(&["t", "x", "y", "kernel", "distance", "ball_mass"]);
            for s in &r.samples {
                csv.row([num(s.t), s.x.to_string(), s.y.to_string(), num(s.kernel), num(s.distance), num(s.ball_mass)]);
            }
            csv.finish()
        }
        _ => json_document(json!({
            "n": r.n,
            "level": r.m,
            "resolution": resolution,
            "times": nums(times.iter().copied()),
            "samples": r.samples.len(),
            "window": [r.window.0, r.window.1],
            "window_samples": r.window_samples,
            "empty_fit": r.empty_fit,
            "slope": r.slope,
            "intercept": r.intercept,
            "r_squared": r.r_squared,
            "r_squared_target": 0.9,
            "c1": r.c1,
            "c2": r.c2,
            "c3": r.c3,
            "c4": r.c4,
            "normalized_slope": r.normalized_slope,
            "normalized_r_squared": r.normalized_r_squared,
            "doubling_increases": r.doubling_increases,
            "doubling_checked": r.doubling_checked,
        })),
    };
    render(params, text)
}
