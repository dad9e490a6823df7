//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each
//! and exits nonzero if any fails.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use topotext::clustering::CutRule;
use topotext::complex::{build_rips, FiltrationComplex};
use topotext::diagramtools::{bottleneck_finite, landscape, mean_landscape, wasserstein_finite};
use topotext::embed::coordinate_projection;
use topotext::mapper::{build_cover, build_mapper, CloudSource};
use topotext::metricspace::{pairwise_distances, Metric, PointCloud};
use topotext::oracle::{diagram_by_ranks, landscape_by_sup, matching_distance};
use topotext::persistence::{
    betti_profile, boundary_matrix, compute_diagram, reduce, reduce_twist, PersistenceDiagram, PersistencePair,
};

const METRIC_TOL: f64 = 1e-9;
const LANDSCAPE_TOL: f64 = 1e-9;
const SHAPE_TOL: f64 = 1e-9;
const PURITY_MIN: f64 = 0.95;

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    check(elapsed < limit, format!("took {elapsed:?}, limit {limit:?}"))
}

fn random_cloud(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> PointCloud {
    PointCloud::new((0..n).map(|_| (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect()).unwrap()
}

fn rips_of(cloud: &PointCloud, max_dim: usize, max_eps: f64) -> FiltrationComplex {
    build_rips(&pairwise_distances(cloud, Metric::Euclidean).unwrap(), max_dim, max_eps).unwrap()
}

fn boundary_soundness() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut columns = 0;
    for case in 0..100 {
        let n = rng.gen_range(1..=10);
        let max_dim = rng.gen_range(1..=3);
        let fc = rips_of(&random_cloud(&mut rng, n, 3), max_dim, rng.gen_range(0.3..3.5));
        let bm = boundary_matrix(&fc).map_err(|e| e.to_string())?;
        for j in 0..bm.len() {
            check(bm.apply(bm.column(j)).is_empty(), format!("case {case}: boundary of boundary of column {j} is nonzero"))?;
            // the same identity on vertex sets, independent of the matrix
            let mut parity = std::collections::BTreeMap::<Vec<usize>, usize>::new();
            for f in fc.simplices()[j].facets() {
                let facet = topotext::complex::Simplex::new(f, 0.0);
                for g in facet.facets() {
                    *parity.entry(g).or_insert(0) += 1;
                }
            }
            check(parity.values().all(|c| c % 2 == 0), format!("case {case}: odd face count in simplex {j}"))?;
            columns += 1;
        }
    }
    within(start.elapsed(), Duration::from_secs(10))?;
    Ok(format!("100 complexes, {columns} columns, {:.2?}", start.elapsed()))
}

fn homology_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut pairs = 0;
    for case in 0..50 {
        let n = rng.gen_range(1..=8);
        let dim = rng.gen_range(1..=3);
        let cloud = random_cloud(&mut rng, n, dim);
        let fc = rips_of(&cloud, 2, rng.gen_range(0.5..3.5));
        let bm = boundary_matrix(&fc).map_err(|e| e.to_string())?;
        check(reduce(&bm) == reduce_twist(&bm), format!("case {case}: twist pairing differs"))?;
        let got = compute_diagram(&fc, false).map_err(|e| e.to_string())?;
        let want = diagram_by_ranks(&fc);
        check(got == want, format!("case {case}: {:?} != {:?}", got.pairs(), want.pairs()))?;
        pairs += got.len();
    }
    within(start.elapsed(), Duration::from_secs(60))?;
    Ok(format!("50 clouds, {pairs} pairs identical, {:.2?}", start.elapsed()))
}

fn known_shapes() -> Outcome {
    let square = PointCloud::new(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]]).unwrap();
    let d = compute_diagram(&rips_of(&square, 2, 2.0), false).map_err(|e| e.to_string())?;
    let h1 = d.points(1);
    check(h1.len() == 1, format!("square H1 {h1:?}"))?;
    check(
        (h1[0].0 - 1.0).abs() <= SHAPE_TOL && (h1[0].1 - 2f64.sqrt()).abs() <= SHAPE_TOL,
        format!("square H1 {h1:?}"),
    )?;

    // regular tetrahedron: all six distances 1, no 3-simplex
    let s = 1.0 / 2f64.sqrt();
    let tetra = PointCloud::new(vec![
        vec![s, 0.0, 0.0, 0.0],
        vec![0.0, s, 0.0, 0.0],
        vec![0.0, 0.0, s, 0.0],
        vec![0.0, 0.0, 0.0, s],
    ])
    .unwrap();
    let d = compute_diagram(&rips_of(&tetra, 2, 1.5), false).map_err(|e| e.to_string())?;
    let b2 = betti_profile(&d).betti_at(2, 1.0);
    check(b2 == 1, format!("tetrahedron boundary beta2 = {b2}"))?;

    let n = 7;
    let spread = PointCloud::new((0..n).map(|i| vec![10.0 * i as f64]).collect()).unwrap();
    let d = compute_diagram(&rips_of(&spread, 2, 1.0), false).map_err(|e| e.to_string())?;
    check(d.points(0).len() == n, format!("{} H0 bars for {n} isolated points", d.points(0).len()))?;
    Ok(format!("square H1 {:?}, tetrahedron beta2 = 1, {n} isolated bars", h1[0]))
}

fn random_diagram(rng: &mut ChaCha8Rng) -> Vec<(f64, f64)> {
    (0..rng.gen_range(0..=5))
        .map(|_| {
            let b: f64 = rng.gen_range(0.0..5.0);
            (b, b + rng.gen_range(0.0..4.0))
        })
        .collect()
}

fn diagram_metrics() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    for case in 0..200 {
        let (a, b, c) = (random_diagram(&mut rng), random_diagram(&mut rng), random_diagram(&mut rng));
        let fast = |x: &[(f64, f64)], y: &[(f64, f64)]| {
            [bottleneck_finite(x, y), wasserstein_finite(x, y, 1.0), wasserstein_finite(x, y, 2.0)]
        };
        let ab = fast(&a, &b);
        let want = [matching_distance(&a, &b, None), matching_distance(&a, &b, Some(1.0)), matching_distance(&a, &b, Some(2.0))];
        for (g, w) in ab.iter().zip(&want) {
            worst = worst.max((g - w).abs());
            check((g - w).abs() <= METRIC_TOL, format!("case {case}: {g} vs exhaustive {w}"))?;
        }
        let (ba, ac, cb, aa) = (fast(&b, &a), fast(&a, &c), fast(&c, &b), fast(&a, &a));
        for m in 0..3 {
            check(aa[m].abs() <= METRIC_TOL, format!("case {case}: d(a, a) = {}", aa[m]))?;
            check((ab[m] - ba[m]).abs() <= METRIC_TOL, format!("case {case}: asymmetric"))?;
            check(ab[m] <= ac[m] + cb[m] + METRIC_TOL, format!("case {case}: triangle inequality"))?;
        }
    }
    within(start.elapsed(), Duration::from_secs(30))?;
    Ok(format!("200 pairs, max deviation {worst:.1e}, {:.2?}", start.elapsed()))
}

fn landscapes() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    for case in 0..50 {
        let pts = random_diagram(&mut rng);
        let d = PersistenceDiagram::new(pts.iter().map(|&(b, e)| PersistencePair::new(1, b, e)).collect());
        let k_max = 4;
        let l = landscape(&d, 1, k_max, None);
        for k in 1..=k_max {
            for i in 0..100 {
                let t = -0.5 + 10.0 * i as f64 / 99.0;
                let (got, want) = (l.eval(k, t), landscape_by_sup(&pts, k, t));
                worst = worst.max((got - want).abs());
                check((got - want).abs() <= LANDSCAPE_TOL, format!("case {case}: lambda{k}({t}) = {got}, sup gives {want}"))?;
            }
        }
        let mean = mean_landscape(&[l.clone(), l.clone()]).map_err(|e| e.to_string())?;
        check(mean == l, format!("case {case}: mean of two copies differs"))?;
    }
    Ok(format!("50 diagrams x 4 levels x 100 points, max deviation {worst:.1e}"))
}

fn circle_mapper() -> Outcome {
    let start = Instant::now();
    let n = 24;
    let cloud = PointCloud::new(
        (0..n)
            .map(|i| {
                let a = std::f64::consts::TAU * (i as f64 + 0.5) / n as f64;
                vec![a.cos(), a.sin()]
            })
            .collect(),
    )
    .unwrap();
    let lens = coordinate_projection(&cloud, 0).map_err(|e| e.to_string())?;
    let cover = build_cover(&lens, 5, 0.4).map_err(|e| e.to_string())?;
    let src = CloudSource {
        cloud: &cloud,
        metric: Metric::Euclidean,
    };
    let g = build_mapper(&lens, &src, &cover, CutRule::default(), None).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let covered: BTreeSet<usize> = g.nodes().iter().flat_map(|n| n.members.iter().copied()).collect();
    check(covered.len() == n, format!("{} of {n} points covered", covered.len()))?;
    check(g.cycle_rank() == 1, format!("cycle rank {}", g.cycle_rank()))?;
    within(elapsed, Duration::from_secs(1))?;
    Ok(format!("{} nodes, {} edges, cycle rank 1, {elapsed:.2?}", g.nodes().len(), g.edges().len()))
}

/// Two classes of documents over disjoint 50-word vocabularies plus 20
/// shared words.
fn synthetic_corpus(dir: &Path, name: &str, per_class: usize, seed: u64) -> (std::path::PathBuf, std::path::PathBuf) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vocab = |prefix: &str, n: usize| (0..n).map(|i| format!("{prefix}{i:02}")).collect::<Vec<_>>();
    let shared = vocab("shared", 20);
    let (mut text, mut labels) = (String::new(), String::new());
    for (label, own) in [("A", vocab("alpha", 50)), ("B", vocab("beta", 50))] {
        for _ in 0..per_class {
            let len = rng.gen_range(8..=14);
            let words: Vec<&str> = (0..len)
                .map(|_| {
                    let pool = if rng.gen_bool(0.7) { &own } else { &shared };
                    pool.choose(&mut rng).unwrap().as_str()
                })
                .collect();
            writeln!(text, "{}", words.join(" ")).unwrap();
            writeln!(labels, "{label}").unwrap();
        }
    }
    let (t, l) = (dir.join(format!("{name}.txt")), dir.join(format!("{name}.labels")));
    std::fs::write(&t, text).unwrap();
    std::fs::write(&l, labels).unwrap();
    (t, l)
}

fn topotext(args: &[&str]) -> Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_topotext"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("topotext {}: {}", args.join(" "), String::from_utf8_lossy(&out.stderr)));
    }
    Ok(String::from_utf8_lossy(&out.stdout).into_owned())
}

fn run_authorship(dir: &Path, out: &str) -> Result<(f64, f64), String> {
    let (t, l) = (dir.join("poems.txt"), dir.join("poems.labels"));
    let out = dir.join(out);
    topotext(&[
        "mapper",
        "--corpus",
        t.to_str().unwrap(),
        "--labels",
        l.to_str().unwrap(),
        "--lens",
        "svd:2",
        "--resolution",
        "10",
        "--overlap",
        "0.3",
        "--cut",
        "first-gap",
        "--seed",
        "42",
        "--purity",
        "--out",
        out.to_str().unwrap(),
    ])?;
    let csv = std::fs::read_to_string(out.join("purity.csv")).map_err(|e| e.to_string())?;
    let ratio = |side: &str| -> Result<f64, String> {
        let line = csv.lines().find(|l| l.starts_with(&format!("{side},"))).ok_or("missing row")?;
        line.rsplit(',').next().unwrap().parse::<f64>().map_err(|e| format!("{side}: {e}"))
    };
    Ok((ratio("A")?, ratio("B")?))
}

fn authorship(dir: &Path) -> Outcome {
    synthetic_corpus(dir, "poems", 500, 2024);
    let start = Instant::now();
    let (a, b) = run_authorship(dir, "run1")?;
    let elapsed = start.elapsed();
    check(a >= PURITY_MIN && b >= PURITY_MIN, format!("purity A {a}, B {b}"))?;
    within(elapsed, Duration::from_secs(30))?;
    Ok(format!("purity A {a:.4}, B {b:.4}, {elapsed:.2?}"))
}

fn table_shape(dir: &Path) -> Outcome {
    let mut dirs = Vec::new();
    for (name, seed) in [("first", 11), ("second", 12)] {
        let (t, _) = synthetic_corpus(dir, name, 100, seed);
        let out = dir.join(format!("{name}_diagrams"));
        topotext(&[
            "diagram",
            "--corpus",
            t.to_str().unwrap(),
            "--label",
            name,
            "--parts",
            "8",
            "--part-size",
            "25",
            "--out",
            out.to_str().unwrap(),
        ])?;
        dirs.push(out);
    }
    let (a, b) = (dirs[0].to_str().unwrap(), dirs[1].to_str().unwrap());
    let parse = |text: &str, header: &str, rows: usize| -> Result<(), String> {
        let lines: Vec<&str> = text.lines().collect();
        check(lines.first() == Some(&header), format!("header {:?}", lines.first()))?;
        check(lines.len() == rows + 1, format!("{} rows, expected {rows}", lines.len() - 1))?;
        for l in &lines[1..] {
            let cells: Vec<&str> = l.split(',').collect();
            check(cells.len() == 3, format!("row {l:?}"))?;
            for c in &cells[1..] {
                let v: f64 = c.parse().map_err(|_| format!("cell {c:?}"))?;
                check(v.is_finite() && v >= 0.0, format!("cell {c:?}"))?;
            }
        }
        Ok(())
    };
    parse(&topotext(&["distance", "--table", a, b])?, "part,dim0,dim1", 8)?;
    parse(&topotext(&["distance", "--consecutive", a])?, "parts,dim0,dim1", 7)?;
    Ok("table 8 x (dim0, dim1), consecutive 7 x (dim0, dim1)".into())
}

fn determinism(dir: &Path) -> Outcome {
    run_authorship(dir, "run2")?;
    for file in ["graph.json", "purity.csv"] {
        let a = std::fs::read(dir.join("run1").join(file)).map_err(|e| e.to_string())?;
        let b = std::fs::read(dir.join("run2").join(file)).map_err(|e| e.to_string())?;
        check(a == b, format!("{file} differs between runs"))?;
    }
    Ok("graph.json and purity.csv byte-identical".into())
}

fn main() {
    let dir = tempfile::tempdir().expect("temporary directory");
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("boundary soundness", Box::new(boundary_soundness)),
        ("homology oracle", Box::new(homology_oracle)),
        ("known shapes", Box::new(known_shapes)),
        ("diagram metrics", Box::new(diagram_metrics)),
        ("landscape equivalence", Box::new(landscapes)),
        ("mapper circle", Box::new(circle_mapper)),
        ("synthetic authorship purity", Box::new(|| authorship(dir.path()))),
        ("distance table shape", Box::new(|| table_shape(dir.path()))),
        ("determinism", Box::new(|| determinism(dir.path()))),
    ];
    let mut failed = 0;
    println!("\nacceptance");
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(f))
            .unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS {} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {} {name}: {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed\n", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
