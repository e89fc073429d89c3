//! Acceptance suite: one PASS or FAIL line per criterion.
//!
//! Runs as a plain binary so that every criterion is reported even when an
//! earlier one fails. The process exits non-zero on a FAIL only when
//! `GLG_ACCEPTANCE_STRICT=1`; cells that need missing benchmark images are
//! reported as FAIL with the reason.

mod common;

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use glg::denoise::{add_noise, denoise_image, psnr, shrink_coefficient};
use glg::edges::{detect_edges, EdgeConfig};
use glg::estimate::{gauss_hermite, group_moments, level_em, root_em, root_log_marginal, LevelGroups};
use glg::io::{read_image, write_pgm};
use glg::model::{covariance_matrix, hidden_covariance, precision_matrix, simulate_forest, theoretical_moments, TreePrecision};
use glg::states::{map_gradient, map_tree, MapConfig};
use glg::{fit_glg, Filter, FitConfig, GlgParams, ImageGrid, TreeTopology};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn report(id: usize, name: &str, budget: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let out = f();
    let took = start.elapsed();
    let in_time = took <= budget;
    let pass = out.pass && in_time;
    let time_note = if in_time { String::new() } else { format!(" over budget {budget:?}") };
    println!(
        "criterion {id} {}: {name}: {} ({:.2} s{time_note})",
        if pass { "PASS" } else { "FAIL" },
        out.detail,
        took.as_secs_f64()
    );
    pass
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn covariance_oracle() -> Outcome {
    let topo = TreeTopology::quadtree(3).unwrap();
    let mut r = rng(1);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let p = common::random_params(&mut r, 3);
        let prec = common::to_nalgebra(&precision_matrix(&p, &topo).unwrap().to_dense());
        let inv = prec.try_inverse().expect("precision is invertible");
        for i in 0..topo.node_count() {
            for j in 0..topo.node_count() {
                worst = worst.max((inv[(i, j)] - hidden_covariance(&p, &topo, i, j).unwrap()).abs());
            }
        }
    }
    Outcome { pass: worst < 1e-8, detail: format!("max entry error {worst:.2e} over 50 draws (tol 1e-8)") }
}

/// Per-tree statistics of one level: mean `w^2`, `w^4`, sibling `w_i^2 w_j^2` and parent-child `w_j^2 w_h^2`.
fn tree_stats(topo: &TreeTopology, w: &[f64], level: usize) -> [f64; 4] {
    let nodes = topo.level_nodes(level);
    let m = nodes.len() as f64;
    let (mut s2, mut s4, mut pc) = (0.0, 0.0, 0.0);
    for i in nodes.clone() {
        let w2 = w[i] * w[i];
        s2 += w2;
        s4 += w2 * w2;
        if let Some(h) = topo.parent(i) {
            pc += w2 * w[h] * w[h];
        }
    }
    let (mut sib, mut pairs) = (0.0, 0.0);
    if level > 1 {
        for h in topo.level_nodes(level - 1) {
            let ch: Vec<usize> = topo.children(h).collect();
            for a in 0..ch.len() {
                for b in a + 1..ch.len() {
                    sib += (w[ch[a]] * w[ch[b]]).powi(2);
                    pairs += 1.0;
                }
            }
        }
    }
    [s2 / m, s4 / m, if pairs > 0.0 { sib / pairs } else { 0.0 }, pc / m]
}

fn moment_identities() -> Outcome {
    let topo = TreeTopology::quadtree(3).unwrap();
    let k = 100_000;
    let mut r = rng(2);
    let mut worst_z = 0.0f64;
    let mut worst_identity = 0.0f64;
    let mut comparisons = 0;
    for draw in 0..20 {
        // moderate variances keep the eighth moments behind the standard errors finite and estimable
        let p = GlgParams::new(
            r.random_range(-3.0..0.0),
            r.random_range(0.1..0.6),
            (0..2).map(|_| r.random_range(-1.0..0.5)).collect(),
            (0..2).map(|_| r.random_range(-0.8..0.8)).collect(),
            (0..2).map(|_| r.random_range(0.05..0.4)).collect(),
        )
        .unwrap();
        let (_, forest) = simulate_forest(&p, &topo, k, 1000 + draw).unwrap();
        let lm = p.level_moments();
        for level in 1..=3 {
            let lv = level - 1;
            let th = theoretical_moments(&p, lv).unwrap();
            let mut sum = [0.0; 4];
            let mut sum_sq = [0.0; 4];
            for row in forest.coefficients.rows() {
                let st = tree_stats(&topo, row.as_slice().unwrap(), level);
                for q in 0..4 {
                    sum[q] += st[q];
                    sum_sq[q] += st[q] * st[q];
                }
            }
            let want = [Some(th.eta2), Some(th.eta4), th.eta22, th.xi22];
            for q in 0..4 {
                let Some(t) = want[q] else { continue };
                let mean = sum[q] / k as f64;
                let se = ((sum_sq[q] / k as f64 - mean * mean) / (k as f64 - 1.0)).sqrt();
                worst_z = worst_z.max((mean - t).abs() / se);
                comparisons += 1;
            }
            // fourth moment and cross identities in closed form
            let i = topo.level_nodes(level).start;
            let rel = |a: f64, b: f64| ((a - b) / b).abs();
            worst_identity = worst_identity.max(rel(th.eta4 / (3.0 * th.eta2 * th.eta2), lm.sigma_sq[lv].exp()));
            if let (Some(e22), Some(x22)) = (th.eta22, th.xi22) {
                let parent = theoretical_moments(&p, lv - 1).unwrap();
                let sib = i + 1;
                let h = topo.parent(i).unwrap();
                let cov_sib = hidden_covariance(&p, &topo, i, sib).unwrap();
                let cov_pc = hidden_covariance(&p, &topo, i, h).unwrap();
                worst_identity = worst_identity.max(rel(e22, th.eta2 * th.eta2 * cov_sib.exp()));
                worst_identity = worst_identity.max(rel(x22, th.eta2 * parent.eta2 * cov_pc.exp()));
            }
        }
    }
    Outcome {
        pass: worst_z < 3.0 && worst_identity < 1e-12,
        detail: format!(
            "max |MC - theory| = {worst_z:.2} SE over {comparisons} moments (tol 3), closed-form identity error {worst_identity:.1e}"
        ),
    }
}

fn quadrature_oracle() -> Outcome {
    let rule = gauss_hermite(30).unwrap();
    let ws = [0.0, 1e-4, -0.01, 0.05, -0.2, 0.5, 1.0, -2.0, 5.0, 30.0];
    let priors = [(-6.0, 0.3), (-4.0, 1.0), (-2.0, 0.5), (-1.0, 2.5), (0.0, 1.0), (0.5, 0.05), (1.0, 4.0), (-8.0, 2.0), (-3.0, 0.1), (2.0, 0.8)];
    let mut root_err = 0.0f64;
    for &w in &ws {
        for &(mu, var) in &priors {
            let (lq, _, _) = common::root_oracle(w, mu, var);
            root_err = root_err.max((root_log_marginal(&rule, w, mu, var) - lq).abs());
        }
    }
    let pairs = [(0.3, -0.1), (0.01, 0.02), (2.0, 0.5), (-0.5, 1.5), (0.0, 0.4)];
    let settings = [
        ((-2.0, 1.0), (-0.5, 0.8, 0.3)),
        ((-4.0, 0.5), (-1.0, 0.5, 0.8)),
        ((-1.0, 2.0), (0.2, -0.6, 0.2)),
        ((-3.0, 0.8), (-2.0, 0.1, 1.5)),
    ];
    let mut pair_err = 0.0f64;
    let mut pair_points = 0;
    for &(wp, wc) in &pairs {
        for scale in [0.2, 1.0, 3.0, 8.0, 0.05] {
            let (wp, wc) = (wp * scale, wc * scale);
            let &(prior, trans) = &settings[pair_points % settings.len()];
            let o = common::pair_oracle(wp, wc, prior, trans);
            let g = group_moments(&rule, wp, &[wc], prior, trans);
            let diffs = [
                g.log_lik - o.log_lik,
                g.e_parent - o.e_parent,
                g.e_parent_sq - o.e_parent_sq,
                g.e_child[0] - o.e_child,
                g.e_child_parent[0] - o.e_child_parent,
                g.e_child_sq[0] - o.e_child_sq,
            ];
            pair_err = diffs.iter().fold(pair_err, |m, d| m.max(d.abs()));
            if wp != 0.0 {
                // the EM objective uses the tabulated inner integrals; zeros are unobserved there
                let groups = LevelGroups::new(vec![wp], vec![wc], 1).unwrap();
                let tabulated = glg::estimate::level_log_likelihood(&groups, prior, trans, &rule).unwrap();
                pair_err = pair_err.max((tabulated - o.log_lik).abs());
            }
            pair_points += 1;
        }
    }
    // the remaining points swap signs and scale by the setting index
    for &(wp, wc) in &pairs {
        for (j, &(prior, trans)) in settings.iter().enumerate() {
            for flip in [-1.0, 1.0, 0.5, -2.0] {
                let (wp, wc) = (flip * wp * (1.0 + j as f64), wc * (1.0 + j as f64));
                let o = common::pair_oracle(wp, wc, prior, trans);
                let g = group_moments(&rule, wp, &[wc], prior, trans);
                let diffs = [
                    g.log_lik - o.log_lik,
                    g.e_parent - o.e_parent,
                    g.e_parent_sq - o.e_parent_sq,
                    g.e_child[0] - o.e_child,
                    g.e_child_parent[0] - o.e_child_parent,
                    g.e_child_sq[0] - o.e_child_sq,
                ];
                pair_err = diffs.iter().fold(pair_err, |m, d| m.max(d.abs()));
                pair_points += 1;
            }
        }
    }
    let mut r = rng(3);
    let mut shrink_err = 0.0f64;
    for _ in 0..100 {
        let v = r.random_range(-2.0..2.0);
        let mu = r.random_range(-6.0..0.0);
        let var = r.random_range(0.1..3.0);
        let c = r.random_range(0.001..0.1);
        shrink_err = shrink_err.max((shrink_coefficient(v, mu, var, c) - common::shrink_oracle(v, mu, var, c)).abs());
    }
    let worst = root_err.max(pair_err).max(shrink_err);
    Outcome {
        pass: worst < 1e-6,
        detail: format!(
            "root marginal {root_err:.1e} (100 pts), group moments {pair_err:.1e} ({pair_points} pts), shrinkage {shrink_err:.1e} (100 pts) (tol 1e-6)"
        ),
    }
}

fn em_ascent() -> Outcome {
    let topo = TreeTopology::quadtree(3).unwrap();
    let rule = gauss_hermite(30).unwrap();
    let mut r = rng(4);
    let mut worst = f64::NEG_INFINITY;
    let mut traces = 0;
    for d in 0..20 {
        let p = common::random_params(&mut r, 3);
        let (_, forest) = simulate_forest(&p, &topo, 200, 50 + d).unwrap();
        // start away from the truth so that the traces are long
        let roots: Vec<f64> = forest.coefficients.column(0).to_vec();
        let (mu0, s0, t) = root_em(&roots, (p.mu0 + 1.0, 2.0 * p.sigma0_sq), &rule, 1e-8, 200).unwrap();
        worst = worst.max(t.worst_relative_decrease());
        traces += 1;
        let mut prior = (mu0, s0);
        for lv in 1..3 {
            let groups = LevelGroups::from_forest(&forest, lv).unwrap();
            let init = (0.0, 0.0, 1.0);
            let (a, b, k, t) = level_em(&groups, prior, init, &rule, 1e-8, 200).unwrap();
            worst = worst.max(t.worst_relative_decrease());
            traces += 1;
            prior = (a + b * prior.0, k + b * b * prior.1);
        }
    }
    Outcome {
        pass: worst <= 1e-9,
        detail: format!("largest relative objective decrease {worst:.1e} over {traces} traces (slack 1e-9)"),
    }
}

fn consistency() -> Outcome {
    let topo = TreeTopology::quadtree(3).unwrap();
    let truth = GlgParams::new(-1.0, 1.0, vec![-1.5, -1.0], vec![0.7, 0.5], vec![0.4, 0.3]).unwrap();
    let tv = truth.to_vec();
    let config = FitConfig::default();
    let mut medians = vec![];
    let mut worst_at_largest = 0.0f64;
    for (ki, k) in [100usize, 1000, 10_000].into_iter().enumerate() {
        let mut errs: Vec<Vec<f64>> = vec![vec![]; tv.len()];
        for rep in 0..20u64 {
            let (_, forest) = simulate_forest(&truth, &topo, k, 10_000 * ki as u64 + rep).unwrap();
            let fitted = fit_glg(&forest, &config).unwrap().params.to_vec();
            for (c, (a, b)) in fitted.iter().zip(&tv).enumerate() {
                errs[c].push((a - b).abs());
            }
        }
        if k == 10_000 {
            worst_at_largest = errs.iter().flatten().fold(0.0, |m, &e| m.max(e));
        }
        medians.push(
            errs.into_iter()
                .map(|mut e| {
                    e.sort_by(f64::total_cmp);
                    0.5 * (e[9] + e[10])
                })
                .collect::<Vec<f64>>(),
        );
    }
    let decreasing = (0..tv.len()).all(|c| medians[0][c] > medians[1][c] && medians[1][c] > medians[2][c]);
    let fmt = |m: &[f64]| m.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>().join(" ");
    Outcome {
        pass: decreasing && worst_at_largest < 0.15,
        detail: format!(
            "median errors k=1e2 [{}] k=1e3 [{}] k=1e4 [{}]; strictly decreasing {decreasing}; max error at k=1e4 {worst_at_largest:.3} (tol 0.15)",
            fmt(&medians[0]),
            fmt(&medians[1]),
            fmt(&medians[2])
        ),
    }
}

fn map_correctness() -> Outcome {
    let topo = TreeTopology::quadtree(3).unwrap();
    let n = topo.node_count();
    let mut r = rng(6);
    let (mut worst_grad, mut worst_diff) = (0.0f64, 0.0f64);
    let config = MapConfig::default();
    for t in 0..100 {
        let p = common::random_params(&mut r, 3);
        let (_, forest) = simulate_forest(&p, &topo, 1, 600 + t).unwrap();
        let w = forest.coefficients.row(0).to_vec();
        let prec = TreePrecision::new(&p, &topo).unwrap();
        let out = map_tree(&prec, &w, &vec![f64::NEG_INFINITY; n], &config);
        let g = map_gradient(&prec, &out.states, &w);
        worst_grad = worst_grad.max(g.iter().fold(0.0, |m, x| m.max(x.abs())));
        // dense route: precision as the inverse of the covariance
        let cov = common::to_nalgebra(&covariance_matrix(&p, &topo).unwrap());
        let dense_prec = cov.try_inverse().unwrap();
        let lm = p.level_moments();
        let mean: Vec<f64> = (0..n).map(|i| lm.mu[topo.level_of(i) - 1]).collect();
        let oracle = common::dense_map(&dense_prec, &mean, &w);
        worst_diff = out.states.iter().zip(&oracle).fold(worst_diff, |m, (a, b)| m.max((a - b).abs()));
    }
    Outcome {
        pass: worst_grad < 1e-8 && worst_diff < 1e-8,
        detail: format!("max gradient {worst_grad:.1e}, max state difference to dense Newton {worst_diff:.1e} over 100 trees (tol 1e-8)"),
    }
}

fn image_dir() -> PathBuf {
    std::env::var_os("GLG_IMAGE_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/images"))
}

fn find_image(name: &str) -> Option<PathBuf> {
    ["pgm", "png"].iter().map(|ext| image_dir().join(format!("{name}.{ext}"))).find(|p| p.exists())
}

fn table_one() -> Outcome {
    let targets = [
        ("lena", [(0.10, 18.76, 27.93), (0.15, 15.44, 26.18), (0.20, 13.17, 24.72)]),
        ("mandrill", [(0.10, 19.18, 23.39), (0.15, 15.77, 21.61), (0.20, 13.49, 20.52)]),
        ("peppers", [(0.10, 19.18, 27.96), (0.15, 15.83, 25.87), (0.20, 13.57, 24.41)]),
    ];
    let mut pass = true;
    let mut cells = vec![];
    for (name, rows) in targets {
        let Some(path) = find_image(name) else {
            pass = false;
            cells.push(format!("{name}: image unavailable (3 cells FAIL)"));
            continue;
        };
        let clean = read_image(&path).unwrap();
        for (sigma, want_noisy, want_glg) in rows {
            let noisy = add_noise(&clean, sigma, 1).unwrap().clipped();
            let out = denoise_image(&noisy, Filter::Daub4, 3, sigma, &FitConfig::default()).unwrap();
            let nd = psnr(&clean, &noisy).unwrap();
            let dd = psnr(&clean, &out.image).unwrap();
            let ok = (nd - want_noisy).abs() <= 0.15 && (dd - want_glg).abs() <= 1.5 && dd - nd >= 4.0;
            pass &= ok;
            cells.push(format!(
                "{name} {sigma:.2}: noisy {nd:.2} ({want_noisy}) glg {dd:.2} ({want_glg}) {}",
                if ok { "ok" } else { "off" }
            ));
        }
    }
    Outcome { pass, detail: cells.join("; ") }
}

fn edge_properties() -> Outcome {
    let mut notes = vec![];
    let constant = ImageGrid::from_fn(64, |_, _| 0.4).unwrap();
    let det = detect_edges(&constant, &EdgeConfig::default()).unwrap();
    let empty = det.map.count() == 0;
    notes.push(format!("constant image {} edge pixels", det.map.count()));

    // step between columns 32 and 33, inside the finest Haar pair (32, 33). An
    // exactly piecewise-constant image has almost all detail coefficients zero,
    // which leaves the fit without a maximum, so a faint seeded noise is added.
    // One level keeps every label tied to its own coefficient.
    let step = ImageGrid::from_fn(64, |_, x| if x <= 32 { 0.0 } else { 1.0 }).unwrap();
    let step = add_noise(&step, 1e-3, 5).unwrap();
    let cfg = EdgeConfig { levels: 1, ..EdgeConfig::default() };
    let det = detect_edges(&step, &cfg).unwrap();
    let px = &det.map.pixels;
    let outside = px.indexed_iter().filter(|((_, x), &e)| e == 1 && !(32..=33).contains(x)).count();
    let in_band = px.indexed_iter().filter(|((_, x), &e)| e == 1 && (32..=33).contains(x)).count();
    let band_ok = outside == 0 && in_band > 0;
    notes.push(format!("step image {in_band} pixels in band, {outside} outside"));

    let textured = ImageGrid::from_fn(64, |y, x| {
        let (fx, fy) = (x as f64 / 64.0, y as f64 / 64.0);
        let disk = if (fx - 0.5).powi(2) + (fy - 0.45).powi(2) < 0.09 { 0.6 } else { 0.2 };
        disk + 0.05 * (23.0 * fx).sin() * (17.0 * fy).cos() + 0.03 * ((x * 7 + y * 13) % 11) as f64 / 11.0
    })
    .unwrap();
    let mut counts = vec![];
    for p in [0.5, 0.7, 0.8, 0.9, 0.95, 0.99] {
        let det = detect_edges(&textured, &EdgeConfig { fractile: p, ..EdgeConfig::default() }).unwrap();
        counts.push(det.map.count());
    }
    let monotone = counts.windows(2).all(|c| c[1] <= c[0]);
    notes.push(format!("counts for p = 0.5..0.99: {counts:?}"));

    // figure export for visual comparison only: three Haar levels, finest level kept, p = 0.9
    let out_dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("edge_figures");
    std::fs::create_dir_all(&out_dir).unwrap();
    let fig = EdgeConfig { masked_levels: BTreeSet::from([1, 2]), ..EdgeConfig::default() };
    for name in ["lena", "peppers"] {
        match find_image(name) {
            Some(path) => {
                let det = detect_edges(&read_image(&path).unwrap(), &fig).unwrap();
                let file = out_dir.join(format!("{name}_edges.pgm"));
                write_pgm(&det.map.to_image(), &file).unwrap();
                notes.push(format!("{name} figure {} ({} edge pixels)", file.display(), det.map.count()));
            }
            None => notes.push(format!("{name} figure skipped, image unavailable")),
        }
    }
    Outcome { pass: empty && band_ok && monotone, detail: notes.join("; ") }
}

fn run_cli(args: &[&str]) -> (String, i32) {
    let out = Command::new(env!("CARGO_BIN_EXE_glg")).args(args).output().expect("binary runs");
    (String::from_utf8_lossy(&out.stdout).into_owned(), out.status.code().unwrap_or(-1))
}

fn numbers(text: &str) -> Vec<f64> {
    text.split(|c: char| !(c.is_ascii_digit() || c == '.' || c == '-' || c == 'e' || c == 'E'))
        .filter_map(|t| t.parse().ok())
        .collect()
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let d = |name: &str| dir.path().join(name).to_string_lossy().into_owned();
    let image = ImageGrid::from_fn(64, |y, x| {
        let (fx, fy) = (x as f64 / 64.0, y as f64 / 64.0);
        let disk = if (fx - 0.45).powi(2) + (fy - 0.5).powi(2) < 0.08 { 0.2 } else { 0.0 };
        0.4 + disk + 0.2 * (9.0 * fx).sin() * (5.0 * fy).cos() + 0.04 * ((x * 7 + y * 13) % 11) as f64 / 11.0
    })
    .unwrap();
    write_pgm(&image, Path::new(&d("img.pgm"))).unwrap();
    std::fs::write(
        d("truth.params"),
        "format_version=1\nmodel=tied\nlevels=3\nmu0=-2\nsigma0_sq=0.8\nalpha=-1 -0.8\nbeta=0.6 0.5\nkappa_sq=0.3 0.4\n",
    )
    .unwrap();
    let img = d("img.pgm");
    let truth = d("truth.params");
    let commands: Vec<(Vec<String>, Vec<String>)> = {
        let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
        let mut c = vec![];
        for run in ["a", "b"] {
            let f = |n: &str| d(&format!("{run}_{n}"));
            c.push((
                s(&["simulate", "--params", &truth, "--trees", "300", "--seed", "9", "--out-forest", &f("forest.csv"), "--out-states", &f("states.csv")]),
                vec![f("forest.csv"), f("states.csv")],
            ));
            c.push((s(&["fit", "--forest", &f("forest.csv"), "--out-prefix", &f("fit")]), vec![f("fit.params")]));
            c.push((s(&["fit", "--image", &img, "--filter", "haar", "--out-prefix", &f("img")]), vec![
                f("img.horizontal.params"),
                f("img.vertical.params"),
                f("img.diagonal.params"),
            ]));
            c.push((
                s(&["denoise", "--image", &img, "--sigma-eps", "0.1", "--seed", "4", "--out-image", &f("den.pgm"), "--out-noisy", &f("noisy.pgm"), "--out-csv", &f("den.csv")]),
                vec![f("den.pgm"), f("noisy.pgm"), f("den.csv")],
            ));
            c.push((s(&["edges", "--image", &img, "--out-image", &f("edges.pgm")]), vec![f("edges.pgm")]));
            c.push((s(&["psnr", "--reference", &img, "--test", &f("den.pgm")]), vec![]));
            c.push((s(&["subband-hist", "--image", &img, "--level", "1", "--out-csv", &f("hist.csv")]), vec![f("hist.csv")]));
        }
        c
    };
    let half = commands.len() / 2;
    let mut identical = true;
    let mut close = true;
    let mut failed = vec![];
    for threads in ["1", "2"] {
        let mut outputs: Vec<Vec<u8>> = vec![];
        for (args, files) in &commands {
            let mut full: Vec<&str> = vec!["--threads", threads];
            full.extend(args.iter().map(String::as_str));
            let (stdout, code) = run_cli(&full);
            if code != 0 {
                failed.push(args[0].clone());
            }
            let mut blob = stdout.into_bytes();
            for f in files {
                blob.extend(std::fs::read(f).unwrap_or_default());
            }
            outputs.push(blob);
        }
        for i in 0..half {
            let (a, b) = (&outputs[i], &outputs[i + half]);
            if threads == "1" {
                identical &= a == b;
            } else if a != b {
                let (x, y) = (numbers(&String::from_utf8_lossy(a)), numbers(&String::from_utf8_lossy(b)));
                close &= x.len() == y.len() && x.iter().zip(&y).all(|(p, q)| (p - q).abs() <= 1e-12 * (1.0 + p.abs()));
            }
        }
    }
    Outcome {
        pass: identical && close && failed.is_empty(),
        detail: format!(
            "{half} commands twice each: byte-identical with --threads 1 {identical}, within 1e-12 with --threads 2 {close}{}",
            if failed.is_empty() { String::new() } else { format!(", failed runs {failed:?}") }
        ),
    }
}

fn main() {
    let only: Option<Vec<usize>> = std::env::var("GLG_ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let want = |id: usize| only.as_ref().is_none_or(|o| o.contains(&id));
    let criteria: Vec<(usize, &str, Duration, fn() -> Outcome)> = vec![
        (1, "precision/covariance oracle", Duration::from_secs(1), covariance_oracle),
        (2, "moment identities", Duration::from_secs(60), moment_identities),
        (3, "quadrature oracle", Duration::from_secs(10), quadrature_oracle),
        (4, "EM ascent", Duration::from_secs(60), em_ascent),
        (5, "estimator consistency", Duration::from_secs(600), consistency),
        (6, "MAP correctness", Duration::from_secs(10), map_correctness),
        (7, "denoising table", Duration::from_secs(900), table_one),
        (8, "edge detection properties", Duration::from_secs(120), edge_properties),
        (9, "determinism", Duration::from_secs(600), determinism),
    ];
    let mut all = true;
    for (id, name, budget, f) in criteria {
        if want(id) {
            all &= report(id, name, budget, f);
        }
    }
    if !all && std::env::var("GLG_ACCEPTANCE_STRICT").as_deref() == Ok("1") {
        std::process::exit(1);
    }
}
