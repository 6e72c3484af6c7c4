//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! gating failure. Run with `cargo test --test acceptance`.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use smoothclust::cli::{run_ablation, strip_timings, AblationConfig};
use smoothclust::data::{gen_piecewise_images, gen_subspaces, load_csv, ImageFixtureSpec, SubspaceSpec};
use smoothclust::graph::{normalized_laplacian, AffinityMatrix, GraphFilter};
use smoothclust::metrics::accuracy;
use smoothclust::numerics::SeededRng;
use smoothclust::selfexpress::{
    lsr_affinity, lsr_coefficients, run_flsr, run_ftrr, trr_affinity, IterationConfig, LsrConfig,
    TrrConfig,
};
use smoothclust::spectral::{cluster, SpectralConfig};

enum Verdict {
    Pass(String),
    Fail(String),
    Skip(String),
    /// Reported but never gating.
    Info(bool, String),
}

fn timed(limit: Option<Duration>, f: impl FnOnce() -> Verdict) -> Verdict {
    let start = Instant::now();
    let verdict = f();
    let took = start.elapsed();
    let note = format!(" [{:.2} s]", took.as_secs_f64());
    match (verdict, limit) {
        (Verdict::Pass(m), Some(l)) if took > l => {
            Verdict::Fail(format!("{m}; runtime {:.2} s exceeds {:.0} s", took.as_secs_f64(), l.as_secs_f64()))
        }
        (Verdict::Pass(m), _) => Verdict::Pass(m + &note),
        (Verdict::Fail(m), _) => Verdict::Fail(m + &note),
        (Verdict::Info(ok, m), _) => Verdict::Info(ok, m + &note),
        (other, _) => other,
    }
}

fn check(ok: bool, msg: String) -> Verdict {
    if ok {
        Verdict::Pass(msg)
    } else {
        Verdict::Fail(msg)
    }
}

fn random_affinity(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let density: f64 = rng.gen_range(0.1..1.0);
    let mut w = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.gen_bool(density) {
                let v: f64 = rng.gen_range(0.0..1.0);
                w[(i, j)] = v;
                w[(j, i)] = v;
            }
        }
    }
    w
}

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.gen_range(-1.0..1.0))
}

/// `I - D^{-1/2} W D^{-1/2}`, isolated nodes keep an identity row.
fn laplacian_by_definition(w: &DMatrix<f64>) -> DMatrix<f64> {
    let n = w.nrows();
    let inv_sqrt: Vec<f64> = (0..n)
        .map(|i| {
            let d: f64 = w.row(i).sum();
            if d > 0.0 {
                1.0 / d.sqrt()
            } else {
                0.0
            }
        })
        .collect();
    DMatrix::from_fn(n, n, |i, j| {
        let delta = if i == j { 1.0 } else { 0.0 };
        delta - inv_sqrt[i] * w[(i, j)] * inv_sqrt[j]
    })
}

fn criterion_1() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let n = rng.gen_range(2..=50);
        let w = random_affinity(&mut rng, n);
        let l = laplacian_by_definition(&w);
        let eig = SymmetricEigen::new(l);
        let lap = normalized_laplacian(&AffinityMatrix::new(w).expect("valid affinity"));
        for k in [1u32, 2, 5] {
            let filtered = GraphFilter::new(k, lap.clone()).apply(&eig.eigenvectors).expect("filter");
            for (i, &lambda) in eig.eigenvalues.iter().enumerate() {
                let gain = (1.0 - lambda / 2.0).powi(k as i32);
                let expected = eig.eigenvectors.column(i) * gain;
                worst = worst.max((filtered.column(i) - expected).amax());
            }
        }
    }
    check(
        worst <= 1e-8,
        format!("filter spectral identity on 50 graphs, k in {{1,2,5}}: max error {worst:.2e} (tol 1e-8)"),
    )
}

/// Solves `a y = b` by Gaussian elimination with partial pivoting.
fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&r, &s| a[r][col].abs().total_cmp(&a[s][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        for r in (col + 1)..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut y = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = ((r + 1)..n).map(|c| a[r][c] * y[c]).sum();
        y[r] = (b[r] - s) / a[r][r];
    }
    y
}

/// Minimizes `|X - Z X|^2 + alpha |Z|^2` row by row through its normal
/// equations `(X X^T + alpha I) z_i = X x_i`.
fn lsr_oracle(x: &DMatrix<f64>, alpha: f64) -> DMatrix<f64> {
    let n = x.nrows();
    let gram = |i: usize, j: usize| -> f64 { (0..x.ncols()).map(|c| x[(i, c)] * x[(j, c)]).sum() };
    let g: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| gram(i, j)).collect()).collect();
    let mut z = DMatrix::zeros(n, n);
    for i in 0..n {
        let mut a = g.clone();
        for (r, row) in a.iter_mut().enumerate() {
            row[r] += alpha;
        }
        let row = gauss_solve(a, g[i].clone());
        for j in 0..n {
            z[(i, j)] = row[j];
        }
    }
    z
}

fn criterion_2() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let (mut worst_rel, mut worst_sym) = (0.0f64, 0.0f64);
    for _ in 0..20 {
        let n = rng.gen_range(2..=30);
        let m = rng.gen_range(1..=40);
        let alpha = 10f64.powf(rng.gen_range(-2.0..1.0));
        let x = random_matrix(&mut rng, n, m);
        let z = lsr_coefficients(&x, &LsrConfig::new(alpha)).expect("lsr").into_inner();
        let oracle = lsr_oracle(&x, alpha);
        worst_rel = worst_rel.max((&z - &oracle).norm() / oracle.norm());
        worst_sym = worst_sym.max((&z - z.transpose()).norm() / z.norm());
    }
    check(
        worst_rel <= 1e-6 && worst_sym <= 1e-8,
        format!(
            "closed-form LSR vs normal-equations oracle on 20 instances: rel error {worst_rel:.2e} (tol 1e-6), asymmetry {worst_sym:.2e} (tol 1e-8)"
        ),
    )
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(k - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, k - 1);
            out.push(q);
        }
    }
    out
}

fn exhaustive_accuracy(pred: &[usize], truth: &[usize]) -> f64 {
    let k = pred.iter().chain(truth).max().unwrap() + 1;
    let best = permutations(k)
        .iter()
        .map(|perm| pred.iter().zip(truth).filter(|(p, t)| perm[**p] == **t).count())
        .max()
        .unwrap();
    best as f64 / pred.len() as f64
}

fn criterion_3() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut mismatches = 0;
    for _ in 0..100 {
        let n = rng.gen_range(1..=40);
        let gp = rng.gen_range(1..=5);
        let gt = rng.gen_range(1..=5);
        let pred: Vec<usize> = (0..n).map(|_| rng.gen_range(0..gp)).collect();
        let truth: Vec<usize> = (0..n).map(|_| rng.gen_range(0..gt)).collect();
        if accuracy(&pred, &truth).expect("acc") != exhaustive_accuracy(&pred, &truth) {
            mismatches += 1;
        }
    }
    check(
        mismatches == 0,
        format!("Hungarian ACC equals exhaustive-permutation ACC on 100 label pairs (g <= 5): {mismatches} mismatches"),
    )
}

/// `1/2 sum_ij w_ij (x_i / sqrt(d_i) - x_j / sqrt(d_j))^2`.
fn energy_by_definition(w: &DMatrix<f64>, x: &DVector<f64>) -> f64 {
    let n = w.nrows();
    let scaled: Vec<f64> = (0..n)
        .map(|i| {
            let d: f64 = w.row(i).sum();
            if d > 0.0 {
                x[i] / d.sqrt()
            } else {
                0.0
            }
        })
        .collect();
    let mut e = 0.0;
    for i in 0..n {
        for j in 0..n {
            let diff = scaled[i] - scaled[j];
            e += w[(i, j)] * diff * diff;
        }
    }
    // isolated nodes contribute x_i^2 through their identity row
    for i in 0..n {
        if w.row(i).sum() == 0.0 {
            e += 2.0 * x[i] * x[i];
        }
    }
    0.5 * e
}

fn criterion_4() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut violations = 0;
    let mut worst_increase = 0.0f64;
    for _ in 0..20 {
        let n = rng.gen_range(2..=40);
        let cols = rng.gen_range(1..=4);
        let w = random_affinity(&mut rng, n);
        let x = random_matrix(&mut rng, n, cols);
        let lap = normalized_laplacian(&AffinityMatrix::new(w.clone()).expect("valid affinity"));
        let one = GraphFilter::new(1, lap);
        let mut current = x;
        let mut prev: Vec<f64> = current.column_iter().map(|c| energy_by_definition(&w, &c.into_owned())).collect();
        for _k in 1..=10 {
            current = one.apply(&current).expect("filter");
            let now: Vec<f64> = current.column_iter().map(|c| energy_by_definition(&w, &c.into_owned())).collect();
            for (a, b) in prev.iter().zip(&now) {
                worst_increase = worst_increase.max(b - a);
                if *b > a + 1e-10 {
                    violations += 1;
                }
            }
            prev = now;
        }
    }
    check(
        violations == 0,
        format!("smoothness energy non-increasing in k = 0..10 on 20 graph/signal pairs: {violations} violations, largest step {worst_increase:.2e}"),
    )
}

const FIXTURE_ALPHA: f64 = 0.01;
const FIXTURE_K: u32 = 1;
const FIXTURE_P: usize = 3;

fn subspace_fixture(seed: u64) -> (DMatrix<f64>, Vec<usize>) {
    let d = gen_subspaces(&SubspaceSpec {
        ambient_dim: 30,
        subspace_dim: 3,
        clusters: 3,
        samples_per_cluster: 50,
        noise_sigma: 0.01,
        seed,
        orthogonal: false,
    })
    .expect("fixture");
    (d.features, d.labels.expect("labels"))
}

fn spectral_acc(w: &AffinityMatrix, truth: &[usize], seed: u64) -> f64 {
    let pred = cluster(w, 3, &mut SeededRng::new(seed), &SpectralConfig::default()).expect("cluster");
    accuracy(pred.labels(), truth).expect("acc")
}

fn criterion_5() -> Verdict {
    let lsr = LsrConfig::new(FIXTURE_ALPHA);
    let trr = TrrConfig::new(FIXTURE_ALPHA, FIXTURE_P);
    let it = IterationConfig::new(FIXTURE_K);

    let (x, y) = subspace_fixture(0);
    let fixed = spectral_acc(&run_ftrr(&x, &trr, &it).expect("ftrr").affinity, &y, 0);

    let mut sums = [0.0f64; 4];
    for seed in 0..10u64 {
        let (x, y) = subspace_fixture(seed);
        sums[0] += spectral_acc(&lsr_affinity(&x, &lsr).expect("lsr"), &y, seed);
        sums[1] += spectral_acc(&trr_affinity(&x, &trr).expect("trr"), &y, seed);
        sums[2] += spectral_acc(&run_flsr(&x, &lsr, &it).expect("flsr").affinity, &y, seed);
        sums[3] += spectral_acc(&run_ftrr(&x, &trr, &it).expect("ftrr").affinity, &y, seed);
    }
    let [lsr_m, trr_m, flsr_m, ftrr_m] = sums.map(|s| s / 10.0);
    check(
        fixed >= 0.95 && flsr_m >= lsr_m && ftrr_m >= trr_m,
        format!(
            "3-subspace fixture (alpha {FIXTURE_ALPHA}, k {FIXTURE_K}, p {FIXTURE_P}): FTRR ACC {fixed:.4} at seed 0; 10-seed means LSR {lsr_m:.4} <= FLSR {flsr_m:.4}, TRR {trr_m:.4} <= FTRR {ftrr_m:.4}"
        ),
    )
}

fn criterion_6() -> Verdict {
    let (x, _) = subspace_fixture(0);
    let fit = run_flsr(&x, &LsrConfig::new(FIXTURE_ALPHA), &IterationConfig::new(FIXTURE_K)).expect("flsr");
    let residuals: Vec<String> = fit.trace.records.iter().map(|r| format!("{:.3e}", r.residual)).collect();
    let last = fit.trace.final_residual().unwrap_or(f64::INFINITY);
    check(
        fit.trace.converged && fit.trace.iterations() <= 50 && last < 1e-5,
        format!(
            "stopping rule fired after {} iterations (limit 50); residual trace [{}]",
            fit.trace.iterations(),
            residuals.join(", ")
        ),
    )
}

fn image_rows() -> Vec<smoothclust::cli::AblationRow> {
    let data = gen_piecewise_images(&ImageFixtureSpec::default()).expect("images");
    run_ablation(&data, &AblationConfig::new(16, 16)).expect("ablation")
}

fn single_peak(values: &[f64]) -> Option<usize> {
    let peak = (0..values.len()).max_by(|&a, &b| values[a].total_cmp(&values[b]))?;
    let rising = values[..=peak].windows(2).all(|w| w[1] > w[0]);
    let falling = values[peak..].windows(2).all(|w| w[1] < w[0]);
    (rising && falling && peak > 0 && peak < values.len() - 1).then_some(peak)
}

fn criterion_7(rows: &[smoothclust::cli::AblationRow]) -> Verdict {
    let psnr: Vec<f64> = rows.iter().map(|r| r.psnr).collect();
    let ssim: Vec<f64> = rows.iter().map(|r| r.ssim).collect();
    let peak = single_peak(&ssim);
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(" ");
    check(
        psnr[1] > psnr[0] && ssim[1] > ssim[0] && peak.is_some(),
        format!(
            "denoising on 800 noisy 16x16 images, kNN prior graph: PSNR k=0..10 [{}], SSIM [{}], single SSIM peak at k = {}",
            fmt(&psnr),
            fmt(&ssim),
            peak.map_or("none".into(), |p| p.to_string())
        ),
    )
}

fn criterion_8(rows: &[smoothclust::cli::AblationRow]) -> Verdict {
    let base = rows[0].fisher;
    let (best_k, best) = rows
        .iter()
        .map(|r| (r.k, r.fisher))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .expect("rows");
    check(
        best >= 2.0 * base,
        format!(
            "mean pairwise Fisher score: k=0 {base:.4e}, best k={best_k} {best:.4e}, ratio {:.2} (need >= 2)",
            best / base
        ),
    )
}

/// First `per_class` rows of every class, in file order.
fn first_per_class(x: &DMatrix<f64>, y: &[usize], per_class: usize) -> (DMatrix<f64>, Vec<usize>) {
    let mut counts = std::collections::HashMap::new();
    let keep: Vec<usize> = (0..y.len())
        .filter(|&i| {
            let c = counts.entry(y[i]).or_insert(0usize);
            *c += 1;
            *c <= per_class
        })
        .collect();
    let rows: Vec<_> = keep.iter().map(|&i| x.row(i)).collect();
    (DMatrix::from_rows(&rows), keep.iter().map(|&i| y[i]).collect())
}

fn criterion_9() -> Verdict {
    let Some(path) = std::env::var_os("SMOOTHCLUST_MNIST_CSV") else {
        return Verdict::Skip("MNIST check skipped: set SMOOTHCLUST_MNIST_CSV to a CSV with a trailing label column".into());
    };
    let data = match load_csv(Path::new(&path), true) {
        Ok(d) => d,
        Err(e) => return Verdict::Info(false, format!("MNIST check could not load data: {e}")),
    };
    let (mut x, y) = first_per_class(&data.features, data.labels.as_deref().unwrap(), 100);
    if x.max() > 1.0 {
        x /= 255.0;
    }
    let alphas = [0.1, 1.0, 10.0, 100.0];
    let ks = [1u32, 2, 3];
    let mut best = (0.0, 0.0, 0);
    for &alpha in &alphas {
        for &k in &ks {
            let Ok(fit) = run_flsr(&x, &LsrConfig::new(alpha), &IterationConfig::new(k)) else {
                continue;
            };
            let pred = cluster(&fit.affinity, 10, &mut SeededRng::new(0), &SpectralConfig::default()).expect("cluster");
            let acc = accuracy(pred.labels(), &y).expect("acc") * 100.0;
            if acc > best.0 {
                best = (acc, alpha, k);
            }
        }
    }
    let ok = (best.0 - 62.10).abs() <= 8.0;
    Verdict::Info(
        ok,
        format!(
            "MNIST-1000 FLSR best ACC {:.2} at alpha {}, k {} over alpha {alphas:?} x k {ks:?} (target 62.10 +- 8, informational)",
            best.0, best.1, best.2
        ),
    )
}

fn run_cli(args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_smoothclust"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr)))
    }
}

fn read(path: &Path) -> Vec<u8> {
    std::fs::read(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn criterion_10() -> Verdict {
    let root = tempfile::tempdir().expect("tempdir");
    let p = |s: &str| -> PathBuf { root.path().join(s) };
    let s = |path: PathBuf| path.to_string_lossy().into_owned();
    let fx = s(p("fx"));
    let img = s(p("img"));
    let features = s(p("fx/features.csv"));
    let labels = s(p("fx/labels.csv"));
    let img_features = s(p("img/features.csv"));
    let img_labels = s(p("img/labels.csv"));

    let mut compared = 0;
    let mut differing = Vec::new();
    for run in ["a", "b"] {
        let out = |name: &str| s(p(&format!("{run}_{name}")));
        let steps: Vec<Vec<String>> = vec![
            vec!["gen".into(), "--seed".into(), "7".into(), "--out".into(), out("gen")],
            vec!["gen".into(), "--kind".into(), "images".into(), "--per-class".into(), "30".into(), "--height".into(), "12".into(), "--width".into(), "12".into(), "--classes".into(), "3".into(), "--out".into(), out("gen_img")],
            vec!["cluster".into(), "--data".into(), features.clone(), "--labels".into(), labels.clone(), "--algo".into(), "ftrr".into(), "--alpha".into(), "0.01".into(), "--k".into(), "1".into(), "--p".into(), "3".into(), "--seed".into(), "7".into(), "--trace-metrics".into(), "--out".into(), out("cluster")],
            vec!["sweep".into(), "--data".into(), features.clone(), "--labels".into(), labels.clone(), "--algo".into(), "flsr".into(), "--alphas".into(), "0.01,1".into(), "--ks".into(), "0,1".into(), "--seed".into(), "3".into(), "--out".into(), out("sweep.csv")],
            vec!["ablate".into(), "--data".into(), img_features.clone(), "--labels".into(), img_labels.clone(), "--height".into(), "12".into(), "--width".into(), "12".into(), "--k-max".into(), "3".into(), "--knn".into(), "8".into(), "--out".into(), out("ablate.csv")],
            vec!["embed".into(), "--data".into(), features.clone(), "--algo".into(), "flsr".into(), "--alpha".into(), "0.01".into(), "--k".into(), "1".into(), "--iters".into(), "1,3".into(), "--out".into(), out("embed")],
        ];
        if run == "a" {
            // shared inputs for the commands that read data
            if let Err(e) = run_cli(&["gen", "--seed", "7", "--out", &fx]) {
                return Verdict::Fail(e);
            }
            if let Err(e) = run_cli(&["gen", "--kind", "images", "--per-class", "30", "--height", "12", "--width", "12", "--classes", "3", "--out", &img]) {
                return Verdict::Fail(e);
            }
        }
        for step in &steps {
            let args: Vec<&str> = step.iter().map(String::as_str).collect();
            if let Err(e) = run_cli(&args) {
                return Verdict::Fail(e);
            }
        }
    }
    let files = [
        "gen/features.csv",
        "gen/labels.csv",
        "gen_img/features.csv",
        "gen_img/labels.csv",
        "cluster/labels.csv",
        "cluster/report.txt",
        "sweep.csv",
        "ablate.csv",
        "embed/xbar_iter1.csv",
        "embed/xbar_iter3.csv",
    ];
    for f in files {
        let (a, b) = (read(&p(&format!("a_{f}"))), read(&p(&format!("b_{f}"))));
        let same = if f.ends_with("report.txt") {
            strip_timings(&String::from_utf8_lossy(&a)) == strip_timings(&String::from_utf8_lossy(&b))
        } else {
            a == b
        };
        compared += 1;
        if !same {
            differing.push(f);
        }
    }
    check(
        differing.is_empty(),
        format!("gen, cluster, sweep, ablate, embed each run twice: {compared} outputs compared, differing {differing:?}"),
    )
}

fn main() {
    let mut results: Vec<(u32, Verdict)> = vec![
        (1, timed(Some(Duration::from_secs(10)), criterion_1)),
        (2, timed(Some(Duration::from_secs(5)), criterion_2)),
        (3, timed(Some(Duration::from_secs(5)), criterion_3)),
        (4, timed(None, criterion_4)),
        (5, timed(Some(Duration::from_secs(60)), criterion_5)),
        (6, timed(None, criterion_6)),
    ];
    let mut rows = Vec::new();
    results.push((
        7,
        timed(Some(Duration::from_secs(120)), || {
            rows = image_rows();
            criterion_7(&rows)
        }),
    ));
    results.push((8, timed(None, || criterion_8(&rows))));
    results.push((9, timed(None, criterion_9)));
    results.push((10, timed(None, criterion_10)));

    let mut failed = 0;
    for (n, verdict) in &results {
        match verdict {
            Verdict::Pass(m) => println!("criterion {n:>2} PASS  {m}"),
            Verdict::Fail(m) => {
                failed += 1;
                println!("criterion {n:>2} FAIL  {m}")
            }
            Verdict::Skip(m) => println!("criterion {n:>2} SKIP  {m}"),
            Verdict::Info(ok, m) => println!("criterion {n:>2} {}  {m}", if *ok { "PASS" } else { "FAIL" }),
        }
    }
    println!("{} of {} gating criteria failed", failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
