//! Acceptance suite: one PASS/FAIL line per criterion, each driven through
//! the `hgasket` binary. Every invocation runs twice and the two outputs and
//! manifests must agree byte for byte (criterion 15).

use std::path::Path;
use std::process::Command;

use serde_json::Value;

/// Regression baseline for the length of Γ at N = 3 (depth 24 polyline).
const GAMMA_LENGTH_N3: f64 = 1.074_351_983_05;

struct Runner {
    dir: tempfile::TempDir,
    runs: usize,
    mismatches: Vec<String>,
}

impl Runner {
    fn new() -> Self {
        Self {
            dir: tempfile::tempdir().expect("temp dir"),
            runs: 0,
            mismatches: Vec::new(),
        }
    }

    fn once(&self, args: &[&str], out: &Path) -> (Vec<u8>, Vec<u8>) {
        let status = Command::new(env!("CARGO_BIN_EXE_hgasket"))
            .args(args)
            .arg("--out")
            .arg(out)
            .output()
            .expect("binary runs");
        assert!(
            status.status.success(),
            "hgasket {}: {}",
            args.join(" "),
            String::from_utf8_lossy(&status.stderr)
        );
        let manifest = out.with_file_name(format!("{}.manifest.json", out.file_name().unwrap().to_string_lossy()));
        (std::fs::read(out).unwrap(), std::fs::read(manifest).unwrap())
    }

    fn json(&mut self, args: &[&str]) -> Value {
        serde_json::from_slice(&self.bytes(args, "json")).expect("JSON output")
    }

    fn bytes(&mut self, args: &[&str], ext: &str) -> Vec<u8> {
        self.runs += 1;
        let a = self.dir.path().join(format!("run{}a.{ext}", self.runs));
        let b = self.dir.path().join(format!("run{}b.{ext}", self.runs));
        let (body_a, man_a) = self.once(args, &a);
        let (body_b, man_b) = self.once(args, &b);
        // manifests name their own file, so compare with the names aligned
        let man_b = String::from_utf8(man_b)
            .unwrap()
            .replace(&format!("run{}b.{ext}", self.runs), &format!("run{}a.{ext}", self.runs));
        if body_a != body_b || man_a != man_b.as_bytes() {
            self.mismatches.push(args.join(" "));
        }
        body_a
    }
}

struct Tally {
    failed: Vec<usize>,
}

impl Tally {
    fn report(&mut self, id: usize, title: &str, pass: bool, detail: String) {
        println!("criterion {id:>2} {} {title}: {detail}", if pass { "PASS" } else { "FAIL" });
        if !pass {
            self.failed.push(id);
        }
    }
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap_or(f64::NAN)
}

fn fs(v: &Value) -> Vec<f64> {
    v.as_array().map(|a| a.iter().map(f).collect()).unwrap_or_default()
}

fn maxf(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().fold(f64::NEG_INFINITY, f64::max)
}

fn main() {
    let mut run = Runner::new();
    let mut tally = Tally { failed: Vec::new() };

    // 1, 2
    let ops = run.json(&["metric", "--n", "2", "--up-to", "8"]);
    let ops = ops["operators"].as_array().unwrap();
    let defect = maxf(ops.iter().map(|o| f(&o["partition_defect"])));
    tally.report(
        1,
        "partition identity, N = 2..8",
        ops.len() == 7 && defect <= 1e-12,
        format!("max defect {defect:.3e} (tol 1e-12)"),
    );
    let hs = maxf(ops.iter().map(|o| f(&o["hs_max_error"])));
    tally.report(
        2,
        "Hilbert-Schmidt norms, N = 2..8",
        ops.len() == 7 && hs <= 1e-14,
        format!("max error {hs:.3e} (tol 1e-14)"),
    );

    // 3
    let (mut tot, mut add) = (0.0f64, 0.0f64);
    let mut levels_ok = true;
    for n in ["3", "4", "5"] {
        let r = run.json(&["measure", "--n", n, "--level", "7"]);
        levels_ok &= r["totals"].as_array().map(Vec::len) == Some(8);
        tot = tot.max(f(&r["max_total_error"]));
        add = add.max(f(&r["max_additivity_residual"]));
    }
    tally.report(
        3,
        "Kusuoka masses, m <= 7, N = 3, 4, 5",
        levels_ok && tot <= 1e-10 && add <= 1e-12,
        format!("total error {tot:.3e} (tol 1e-10), additivity {add:.3e} (tol 1e-12)"),
    );

    // 4, 5, 12
    let energy: Vec<Value> = ["3", "4"]
        .iter()
        .map(|n| run.json(&["energy-check", "--n", n, "--level", "8", "--samples", "100", "--conjugacy-level", "6", "--identity-level", "7"]))
        .collect();
    let inv = maxf(energy.iter().map(|e| f(&e["invariance"]["max_relative_error"])));
    let mono = maxf(energy.iter().map(|e| f(&e["invariance"]["max_monotonicity_excess"])));
    tally.report(
        4,
        "harmonic energy invariance and monotonicity, m <= 8, N = 3, 4",
        inv <= 1e-10 && mono <= 1e-12,
        format!("relative error {inv:.3e} (tol 1e-10), max E_m - E_(m+1) {mono:.3e} (tol 1e-12)"),
    );
    let mismatches: u64 = energy.iter().map(|e| e["conjugacy"]["mismatches"].as_u64().unwrap_or(u64::MAX)).sum();
    let checks: u64 = energy.iter().map(|e| e["conjugacy"]["checks"].as_u64().unwrap_or(0)).sum();
    tally.report(
        5,
        "exact conjugacy on V_6, N = 3, 4",
        mismatches == 0 && checks > 0,
        format!("{checks} exact checks, {mismatches} mismatches"),
    );

    // 6, 7
    let curves = run.json(&["curve", "--n", "2", "--up-to", "8", "--depth", "14"]);
    let curves = curves["curves"].as_array().unwrap();
    let cut = maxf(
        curves
            .iter()
            .filter(|c| matches!(c["n"].as_u64(), Some(3 | 4)))
            .map(|c| f(&c["corner_cut"]["max_deviation"])),
    );
    let cut_depth = curves[1]["corner_cut"]["max_depth"].as_u64().unwrap_or(0);
    tally.report(
        6,
        "corner cutting equals the IFS polyline, N = 3, 4",
        cut <= 1e-12 && cut_depth >= 10,
        format!("max deviation {cut:.3e} over depths 0..={cut_depth} (tol 1e-12)"),
    );
    let lengths: Vec<f64> = curves.iter().map(|c| f(&c["length"])).collect();
    let in_range = curves.len() == 7 && lengths.iter().all(|l| (1.0 / 3.0..=2.0).contains(l));
    let n2 = (lengths[0] - 1.0).abs();
    let decreasing = curves[1..].iter().all(|c| c["lengths"]["increments_decreasing"] == true);
    let base = f(&curves[1]["lengths"]["extrapolated"]);
    tally.report(
        7,
        "length of Γ, N = 2..8",
        in_range && n2 <= 1e-12 && decreasing && (base - GAMMA_LENGTH_N3).abs() <= 1e-10,
        format!(
            "l in [{:.6}, {:.6}], |l - 1| = {n2:.1e} at N = 2, increments d = 8..13 strictly decreasing for N >= 3: {decreasing}, N = 3 limit {base:.12} (baseline {GAMMA_LENGTH_N3})",
            lengths.iter().copied().fold(f64::INFINITY, f64::min),
            maxf(lengths.iter().copied())
        ),
    );

    // 8
    let g = run.json(&["geodesic", "--n", "3", "--level", "0", "--depth", "14", "--panels", "4096"]);
    let rel = f(&g["metric_integral"]["relative_error"]);
    tally.report(
        8,
        "metric-integral length of Γ, N = 3, depth 14, 4096 panels",
        rel <= 1e-3,
        format!("relative error {rel:.3e} (tol 1e-3)"),
    );

    // 9
    let t = run.json(&["metric", "--n", "3", "--tangent", "--samples", "200", "--word-length", "12"]);
    let (mean, trace) = (f(&t["mean_distance"]), f(&t["max_trace_error"]));
    tally.report(
        9,
        "Z_12 against tangent projections, N = 3, 200 words",
        mean <= 0.05 && trace <= 1e-12,
        format!("mean distance {mean:.3e} (tol 0.05), trace error {trace:.3e} (tol 1e-12)"),
    );

    // 10
    let h = run.json(&["holder", "--n", "3", "--up-to", "8"]);
    let h = h["results"].as_array().unwrap();
    let forms = maxf(h.iter().map(|r| f(&r["form_difference"])));
    let rel3 = f(&h[0]["relative_error"]);
    let rel4 = f(&h[1]["relative_error"]);
    tally.report(
        10,
        "Hölder exponent of g'",
        h.len() == 6 && forms <= 1e-12 && rel3 <= 0.1 && rel4 <= 0.1,
        format!(
            "N = 3 estimate {:.4} vs {:.6} ({:.1}%), N = 4 estimate {:.4} vs {:.6} ({:.1}%), closed forms agree to {forms:.1e} for N = 3..8",
            f(&h[0]["estimate"]),
            f(&h[0]["closed_form"]),
            100.0 * rel3,
            f(&h[1]["estimate"]),
            f(&h[1]["closed_form"]),
            100.0 * rel4
        ),
    );

    // 11
    let mut detail = Vec::new();
    let mut ok = true;
    for n in ["3", "4"] {
        let u = run.json(&["upsilon-check", "--n", n, "--depth", "10", "--samples", "100000", "--star-samples", "500", "--tolerance", "1e-9"]);
        ok &= u["passed"] == true && u["attractor_points"] == 100_000;
        detail.push(format!(
            "N = {n}: {}/{} attractor, {}/{} star, {}/{} translation failures",
            u["attractor_failures"], u["attractor_points"], u["star_failures"], u["star_checks"], u["translation_failures"], u["translation_checks"]
        ));
    }
    tally.report(11, "projected attractor inside Υ", ok, detail.join("; "));

    // 12
    let mut id_err = 0.0f64;
    let mut kappa_err = 0.0f64;
    let mut depth_ok = true;
    for e in &energy {
        let kappa = f(&e["kappa_expected"]);
        for r in e["identity"].as_array().unwrap() {
            depth_ok &= fs(&r["metric_side"]).len() == 8;
            id_err = id_err.max(f(&r["max_error"]));
            kappa_err = kappa_err.max((f(&r["kappa"]) - kappa).abs());
        }
    }
    tally.report(
        12,
        "energy/metric identity, m <= 7, N = 3, 4",
        depth_ok && id_err <= 1e-12 && kappa_err <= 1e-10,
        format!("identity error {id_err:.3e} (tol 1e-12), |E_0/Σ - N(N-1)/2| = {kappa_err:.3e} (tol 1e-10)"),
    );

    // 13
    let g = run.json(&["geodesic", "--n", "3", "--level", "2", "--depth", "14", "--axioms", "--refine-from", "1", "--refine-to", "4", "--junction-depth", "14"]);
    let ax = &g["axioms"];
    let tri = f(&ax["max_triangle_excess"]);
    let chord = f(&ax["min_chord_slack"]);
    let refine = f(&g["refinement"]["max_excess"]);
    let angle = f(&g["junction"]["max_angle"]);
    tally.report(
        13,
        "metric axioms of d^(m), N = 3",
        ax["symmetric"] == true
            && ax["zero_diagonal"] == true
            && f(&ax["min_distance"]) > 0.0
            && tri <= 1e-12
            && chord >= 0.0
            && refine <= 1e-12
            && angle <= 0.01,
        format!(
            "symmetric {}, triangle excess {tri:.1e}, chord slack {chord:.3e}, refinement m = 1..4 excess {refine:.1e}, junction angle {angle:.1e} rad",
            ax["symmetric"]
        ),
    );

    // 14
    let k = run.json(&["heat", "--n", "3", "--level", "5"]);
    let gauss = run.json(&["gaussian-report", "--n", "3", "--level", "5"]);
    let props = [
        ("symmetry", f(&k["symmetry"]), 1e-10),
        ("semigroup", f(&k["semigroup"]), 1e-8),
        ("conservation", f(&k["conservation"]), 1e-10),
        ("lambda0", f(&k["lambda0"]).abs(), 1e-10),
        ("constant mode", f(&k["constant_mode_error"]), 1e-10),
        ("long time", f(&k["long_time"]), 1e-8),
    ];
    let pass = props.iter().all(|(_, v, tol)| v <= tol) && f(&k["min_kernel"]) > 0.0;
    let r2 = f(&gauss["r_squared"]);
    let listed: Vec<String> = props.iter().map(|(name, v, _)| format!("{name} {v:.1e}")).collect();
    tally.report(
        14,
        "heat kernel properties, N = 3, m = 5",
        pass && gauss["samples"].as_u64().unwrap_or(0) > 0,
        format!(
            "{}; Gaussian fit R² = {r2:.4} (target 0.9, report only), normalized R² = {:.4}",
            listed.join(", "),
            f(&gauss["normalized_r_squared"])
        ),
    );

    // 15: the remaining formats and subcommands
    run.bytes(&["vertices", "--n", "4", "--level", "3", "--format", "csv"], "csv");
    run.bytes(&["curve", "--n", "3", "--depth", "10", "--format", "csv"], "csv");
    run.bytes(&["curve", "--n", "3", "--depth", "8", "--format", "svg"], "svg");
    run.bytes(&["geodesic", "--n", "3", "--level", "2", "--format", "svg"], "svg");
    run.bytes(&["measure", "--n", "3", "--level", "5", "--format", "csv"], "csv");
    tally.report(
        15,
        "CLI determinism",
        run.mismatches.is_empty(),
        format!("{} invocations run twice, {} differed {:?}", run.runs, run.mismatches.len(), run.mismatches),
    );

    if tally.failed.is_empty() {
        println!("acceptance: all 15 criteria pass");
    } else {
        println!("acceptance: failing criteria {:?}", tally.failed);
        std::process::exit(1);
    }
}
