//! Command-line front end: argument definitions and the subcommand
//! drivers behind the `topotext` binary.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use topotext::clustering::CutRule;
use topotext::complex::{build_rips, complex_at, default_max_eps};
use topotext::diagramtools::{landscape, mean_landscape, table_distance, wasserstein, Landscape};
use topotext::embed::{coordinate_projection, truncated_svd, Embedding};
use topotext::mapper::{
    build_cover, build_mapper, cluster_purity, majority_partition, term_summary, CloudSource, MetricSource, TermSource,
};
use topotext::metricspace::{pairwise_distances, DistanceMatrix, Metric, PointCloud};
use topotext::persistence::{compute_diagram, PersistenceDiagram};
use topotext::textpipeline::{load_corpus, split_parts, tfidf_with, Corpus, DocumentTermMatrix, LabelSource, TfidfOptions};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{0}")]
    Compute(String),
}

impl CliError {
    /// 2 for invalid configuration, 3 for unreadable or malformed input and
    /// failed writes, 4 for failures during computation.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io { .. } => 3,
            CliError::Compute(_) => 4,
        }
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

fn compute_err(e: impl std::fmt::Display) -> CliError {
    CliError::Compute(e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "topotext", version, about = "Persistent homology and Mapper for point clouds and text corpora")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a Vietoris–Rips filtration and write it out.
    Rips(RipsArgs),
    /// Persistence diagrams, barcodes and landscapes, optionally per part.
    Diagram(DiagramArgs),
    /// Wasserstein distances between diagrams or diagram directories.
    Distance(DistanceArgs),
    /// Persistence landscapes of saved diagrams.
    Landscape(LandscapeArgs),
    /// Mapper graph with JSON, DOT and HTML output.
    Mapper(MapperArgs),
    /// TF-IDF document-term matrix of a corpus.
    Tfidf(TfidfArgs),
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false, id = "source")]
pub struct SourceArgs {
    /// Point cloud CSV, one point per row.
    #[arg(long)]
    pub cloud: Option<PathBuf>,
    /// Text corpus, one document per line.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// The first CSV column holds point ids.
    #[arg(long)]
    pub id_column: bool,
    /// Label file aligned with the corpus lines.
    #[arg(long, conflicts_with = "label")]
    pub labels: Option<PathBuf>,
    /// One label for every document.
    #[arg(long)]
    pub label: Option<String>,
    /// Words to drop before weighting, one per line.
    #[arg(long)]
    pub stop_words: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RipsArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long)]
    pub metric: Option<Metric>,
    /// Highest simplex dimension.
    #[arg(long, default_value_t = 2)]
    pub max_dim: usize,
    /// Largest scale; defaults to the diameter of the data.
    #[arg(long)]
    pub max_eps: Option<f64>,
    #[arg(long, short, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DiagramArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long)]
    pub metric: Option<Metric>,
    /// Highest homology dimension reported; the complex is built one
    /// dimension higher.
    #[arg(long, default_value_t = 1)]
    pub max_dim: usize,
    /// Largest scale; defaults to the diameter of each part.
    #[arg(long)]
    pub max_eps: Option<f64>,
    /// Number of landscape levels.
    #[arg(long, default_value_t = 4)]
    pub k_max: usize,
    /// Documents (or points) per part.
    #[arg(long)]
    pub part_size: Option<usize>,
    /// Number of parts to process.
    #[arg(long)]
    pub parts: Option<usize>,
    /// Keep zero-persistence pairs.
    #[arg(long)]
    pub keep_zero: bool,
    #[arg(long, short, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DistanceArgs {
    /// Two diagram files, two directories with --table, or one directory
    /// with --consecutive.
    #[arg(required = true, num_args = 1..=2)]
    pub inputs: Vec<PathBuf>,
    /// Compare corresponding parts of two directories.
    #[arg(long, conflicts_with = "consecutive")]
    pub table: bool,
    /// Compare consecutive parts of one directory.
    #[arg(long)]
    pub consecutive: bool,
    /// Wasserstein order; `inf` gives the bottleneck distance.
    #[arg(long, short, default_value = "1", value_parser = parse_order)]
    pub p: f64,
    /// Homology dimensions to compare.
    #[arg(long, value_delimiter = ',', default_value = "0,1")]
    pub dims: Vec<usize>,
    /// Write the table here instead of standard output.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LandscapeArgs {
    /// Diagram CSV files; several are averaged with --mean.
    #[arg(required = true)]
    pub diagrams: Vec<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub dim: usize,
    #[arg(long, default_value_t = 4)]
    pub k_max: usize,
    /// Death value used for essential classes, which are skipped otherwise.
    #[arg(long)]
    pub cap: Option<f64>,
    /// Average the landscapes of all inputs.
    #[arg(long)]
    pub mean: bool,
    #[arg(long, short, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct MapperArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// `axis:I[,J]`, `svd:K` or `file:PATH`; defaults to `axis:0` for
    /// clouds and `svd:2` for corpora.
    #[arg(long)]
    pub lens: Option<String>,
    #[arg(long, default_value_t = 10)]
    pub resolution: usize,
    #[arg(long, default_value_t = 0.3)]
    pub overlap: f64,
    /// `first-gap[:g]`, `threshold:t` or `count:k`.
    #[arg(long, default_value = "first-gap")]
    pub cut: CutRule,
    /// Defaults to cosine for corpora and euclidean for clouds.
    #[arg(long)]
    pub metric: Option<Metric>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write per-class purity; needs labels.
    #[arg(long)]
    pub purity: bool,
    /// The two classes compared; defaults to the two labels present.
    #[arg(long, value_delimiter = ',', num_args = 2)]
    pub classes: Option<Vec<String>>,
    /// Majority share that assigns a node to one class.
    #[arg(long, default_value_t = 0.65)]
    pub both_threshold: f64,
    /// Terms listed per node in the report.
    #[arg(long, default_value_t = 10)]
    pub top_terms: usize,
    #[arg(long, short, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TfidfArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub stop_words: Option<PathBuf>,
    /// Keep raw tf-idf weights.
    #[arg(long)]
    pub no_normalize: bool,
    /// Also write a K-dimensional truncated SVD embedding.
    #[arg(long, value_name = "K")]
    pub svd: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, short, default_value = ".")]
    pub out: PathBuf,
}

fn parse_order(s: &str) -> Result<f64, String> {
    let p = match s {
        "inf" | "infinity" => f64::INFINITY,
        _ => s.parse::<f64>().map_err(|e| e.to_string())?,
    };
    if p >= 1.0 {
        Ok(p)
    } else {
        Err(format!("order must be at least 1, got {s}"))
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Rips(a) => cmd_rips(&a),
        Command::Diagram(a) => cmd_diagram(&a),
        Command::Distance(a) => cmd_distance(&a),
        Command::Landscape(a) => cmd_landscape(&a),
        Command::Mapper(a) => cmd_mapper(&a),
        Command::Tfidf(a) => cmd_tfidf(&a),
    }
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| io_err(&path, e))?;
    Ok(path)
}

fn read_stop_words(path: &Path) -> Result<TfidfOptions, CliError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    Ok(TfidfOptions {
        stop_words: text.lines().map(|l| l.trim().to_lowercase()).filter(|l| !l.is_empty()).collect(),
        ..Default::default()
    })
}

/// Loaded input data: a point cloud, or a corpus with its matrix.
enum Data {
    Cloud(PointCloud),
    Text { corpus: Corpus, dtm: DocumentTermMatrix },
}

impl Data {
    fn len(&self) -> usize {
        match self {
            Data::Cloud(c) => c.len(),
            Data::Text { corpus, .. } => corpus.len(),
        }
    }

    fn labels(&self) -> Option<Vec<String>> {
        match self {
            Data::Cloud(_) => None,
            Data::Text { corpus, .. } => Some(corpus.doc_labels()),
        }
    }

    fn default_metric(&self) -> Metric {
        match self {
            Data::Cloud(_) => Metric::Euclidean,
            Data::Text { .. } => Metric::Cosine,
        }
    }

    /// Dense rows `rows` as a point cloud.
    fn cloud_of(&self, rows: &[usize]) -> Result<PointCloud, CliError> {
        let (points, ids) = match self {
            Data::Cloud(c) => (
                rows.iter().map(|&r| c.point(r).to_vec()).collect(),
                rows.iter().map(|&r| c.ids()[r].clone()).collect(),
            ),
            Data::Text { dtm, .. } => (
                rows.iter().map(|&r| dtm.dense_row(r)).collect(),
                rows.iter().map(|&r| dtm.doc_ids()[r].clone()).collect(),
            ),
        };
        PointCloud::with_ids(points, ids).map_err(compute_err)
    }
}

fn load_input(input: &InputArgs, need_labels: bool) -> Result<Data, CliError> {
    if let Some(path) = &input.source.cloud {
        if need_labels {
            return Err(CliError::Config("purity needs a labeled corpus".into()));
        }
        let cloud = PointCloud::from_csv_path(path, input.id_column).map_err(|e| io_err(path, e))?;
        if cloud.is_empty() {
            return Err(io_err(path, "no points"));
        }
        return Ok(Data::Cloud(cloud));
    }
    let path = input.source.corpus.as_ref().expect("clap enforces one source");
    if need_labels && input.labels.is_none() && input.label.is_none() {
        return Err(CliError::Config("purity needs --labels".into()));
    }
    let source = match (&input.labels, &input.label) {
        (Some(p), _) => LabelSource::File(p),
        (None, Some(l)) => LabelSource::Single(l),
        (None, None) => LabelSource::Single("unlabeled"),
    };
    let corpus = load_corpus(path, source).map_err(|e| io_err(path, e))?;
    if corpus.is_empty() {
        return Err(io_err(path, "no documents"));
    }
    let opts = match &input.stop_words {
        Some(p) => read_stop_words(p)?,
        None => TfidfOptions::default(),
    };
    let dtm = tfidf_with(&corpus, &opts).map_err(|e| io_err(path, e))?;
    if corpus.dropped_blank() > 0 {
        eprintln!("skipped {} blank lines", corpus.dropped_blank());
    }
    Ok(Data::Text { corpus, dtm })
}

fn check_scale(max_eps: Option<f64>) -> Result<(), CliError> {
    match max_eps {
        Some(e) if !(e > 0.0 && e.is_finite()) => Err(CliError::Config(format!("--max-eps must be positive, got {e}"))),
        _ => Ok(()),
    }
}

fn distances(cloud: &PointCloud, metric: Metric) -> Result<DistanceMatrix, CliError> {
    pairwise_distances(cloud, metric).map_err(compute_err)
}

fn cmd_rips(a: &RipsArgs) -> Result<(), CliError> {
    check_scale(a.max_eps)?;
    let data = load_input(&a.input, false)?;
    let metric = a.metric.unwrap_or(Metric::Euclidean);
    let rows: Vec<usize> = (0..data.len()).collect();
    let dm = distances(&data.cloud_of(&rows)?, metric)?;
    let eps = a.max_eps.unwrap_or_else(|| default_max_eps(&dm));
    let fc = build_rips(&dm, a.max_dim, eps).map_err(compute_err)?;
    let path = write_file(&a.out, "complex.txt", &fc.dump())?;
    let counts: Vec<String> = complex_at(&fc, eps).iter().enumerate().map(|(d, c)| format!("dim {d}: {c}")).collect();
    println!("{} simplices up to scale {eps} ({})", fc.len(), counts.join(", "));
    println!("wrote {}", path.display());
    Ok(())
}

/// Row ranges of each part, or one range for the whole input.
fn part_rows(data: &Data, part_size: Option<usize>, parts: Option<usize>) -> Result<Vec<(Option<usize>, Vec<usize>)>, CliError> {
    let n = data.len();
    let size = match (part_size, parts) {
        (Some(0), _) => return Err(CliError::Config("--part-size must be positive".into())),
        (_, Some(0)) => return Err(CliError::Config("--parts must be positive".into())),
        (Some(s), _) => s,
        (None, Some(p)) => n.div_ceil(p),
        (None, None) => return Ok(vec![(None, (0..n).collect())]),
    };
    let mut chunks: Vec<Vec<usize>> = match data {
        Data::Text { corpus, .. } => split_parts(corpus, size)
            .into_iter()
            .map(|p| (p.offset..p.offset + p.corpus.len()).collect())
            .collect(),
        Data::Cloud(_) => (0..n).collect::<Vec<_>>().chunks(size).map(<[usize]>::to_vec).collect(),
    };
    if let Some(p) = parts {
        if chunks.len() < p {
            return Err(CliError::Config(format!(
                "{n} rows give {} parts of size {size}, fewer than --parts {p}",
                chunks.len()
            )));
        }
        chunks.truncate(p);
    }
    if let Some(last) = chunks.last() {
        if last.len() < size {
            eprintln!("last part holds only {} rows", last.len());
        }
    }
    Ok(chunks.into_iter().enumerate().map(|(i, c)| (Some(i + 1), c)).collect())
}

fn cmd_diagram(a: &DiagramArgs) -> Result<(), CliError> {
    check_scale(a.max_eps)?;
    if a.k_max == 0 {
        return Err(CliError::Config("--k-max must be at least 1".into()));
    }
    let data = load_input(&a.input, false)?;
    let metric = a.metric.unwrap_or(Metric::Euclidean);
    for (part, rows) in part_rows(&data, a.part_size, a.parts)? {
        let prefix = part.map_or(String::new(), |p| format!("part{p:03}_"));
        let dm = distances(&data.cloud_of(&rows)?, metric)?;
        let eps = a.max_eps.unwrap_or_else(|| default_max_eps(&dm));
        let fc = build_rips(&dm, a.max_dim + 1, eps).map_err(compute_err)?;
        let full = compute_diagram(&fc, a.keep_zero).map_err(compute_err)?;
        let d = PersistenceDiagram::new(full.pairs().iter().copied().filter(|p| p.dim <= a.max_dim).collect());
        write_file(&a.out, &format!("{prefix}diagram.csv"), &d.to_csv())?;
        write_file(&a.out, &format!("{prefix}barcode.svg"), &d.barcode_svg(eps))?;
        for dim in 0..=a.max_dim {
            let l = landscape(&d, dim, a.k_max, Some(eps));
            write_file(&a.out, &format!("{prefix}landscape_h{dim}.csv"), &l.to_csv())?;
            write_file(&a.out, &format!("{prefix}landscape_h{dim}.svg"), &l.to_svg())?;
        }
        println!("{}diagram: {} pairs, {} points, scale {eps}", prefix, d.len(), rows.len());
    }
    println!("wrote {}", a.out.display());
    Ok(())
}

/// Diagram files of a directory in name order.
fn diagram_files(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| io_err(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.ends_with("diagram.csv")))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(io_err(dir, "no *diagram.csv files"));
    }
    Ok(files)
}

fn read_diagram(path: &Path) -> Result<PersistenceDiagram, CliError> {
    PersistenceDiagram::from_csv_path(path).map_err(|e| io_err(path, e))
}

fn fmt_distance(v: f64) -> String {
    if v.is_infinite() {
        "inf".into()
    } else {
        format!("{v:.6}")
    }
}

fn distance_row(a: &PersistenceDiagram, b: &PersistenceDiagram, dims: &[usize], p: f64) -> Result<String, CliError> {
    let cells = dims
        .iter()
        .map(|&d| table_distance(a, b, d, p).map(|x| fmt_distance(x.value)).map_err(compute_err))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(cells.join(","))
}

fn cmd_distance(a: &DistanceArgs) -> Result<(), CliError> {
    let header_dims: Vec<String> = a.dims.iter().map(|d| format!("dim{d}")).collect();
    let mut out = String::new();
    if a.table {
        let [left, right] = a.inputs.as_slice() else {
            return Err(CliError::Config("--table needs two directories".into()));
        };
        let (l, r) = (diagram_files(left)?, diagram_files(right)?);
        if l.len() != r.len() {
            return Err(CliError::Config(format!("part counts differ: {} vs {}", l.len(), r.len())));
        }
        out.push_str(&format!("part,{}\n", header_dims.join(",")));
        for (i, (x, y)) in l.iter().zip(&r).enumerate() {
            let row = distance_row(&read_diagram(x)?, &read_diagram(y)?, &a.dims, a.p)?;
            out.push_str(&format!("{},{row}\n", i + 1));
        }
    } else if a.consecutive {
        let [dir] = a.inputs.as_slice() else {
            return Err(CliError::Config("--consecutive needs one directory".into()));
        };
        let files = diagram_files(dir)?;
        let diagrams = files.iter().map(|f| read_diagram(f)).collect::<Result<Vec<_>, _>>()?;
        out.push_str(&format!("parts,{}\n", header_dims.join(",")));
        for (i, w) in diagrams.windows(2).enumerate() {
            let row = distance_row(&w[0], &w[1], &a.dims, a.p)?;
            out.push_str(&format!("{}-{},{row}\n", i + 1, i + 2));
        }
    } else {
        let [x, y] = a.inputs.as_slice() else {
            return Err(CliError::Config("expected two diagram files".into()));
        };
        let (dx, dy) = (read_diagram(x)?, read_diagram(y)?);
        out.push_str("dim,distance\n");
        for &d in &a.dims {
            let v = wasserstein(&dx, &dy, d, a.p).map_err(compute_err)?;
            out.push_str(&format!("{d},{}\n", fmt_distance(v.value)));
        }
    }
    match &a.out {
        Some(path) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                fs::create_dir_all(parent).map_err(|e| io_err(parent, e))?;
            }
            fs::write(path, &out).map_err(|e| io_err(path, e))?;
        }
        None => print!("{out}"),
    }
    Ok(())
}

fn cmd_landscape(a: &LandscapeArgs) -> Result<(), CliError> {
    if a.k_max == 0 {
        return Err(CliError::Config("--k-max must be at least 1".into()));
    }
    if a.diagrams.len() > 1 && !a.mean {
        return Err(CliError::Config("several diagrams need --mean".into()));
    }
    let ls: Vec<Landscape> = a
        .diagrams
        .iter()
        .map(|p| read_diagram(p).map(|d| landscape(&d, a.dim, a.k_max, a.cap)))
        .collect::<Result<_, _>>()?;
    let (name, l) = if a.mean {
        ("mean_landscape", mean_landscape(&ls).map_err(compute_err)?)
    } else {
        ("landscape", ls.into_iter().next().expect("one diagram"))
    };
    write_file(&a.out, &format!("{name}_h{}.csv", a.dim), &l.to_csv())?;
    write_file(&a.out, &format!("{name}_h{}.svg", a.dim), &l.to_svg())?;
    println!("wrote {}", a.out.join(format!("{name}_h{}.csv", a.dim)).display());
    Ok(())
}

fn build_lens(spec: &str, data: &Data, seed: u64) -> Result<Embedding, CliError> {
    let bad = || CliError::Config(format!("invalid lens {spec:?} (expected axis:I[,J], svd:K or file:PATH)"));
    let (kind, arg) = spec.split_once(':').ok_or_else(bad)?;
    match kind {
        "axis" => {
            let axes: Vec<usize> = arg.split(',').map(|s| s.trim().parse()).collect::<Result<_, _>>().map_err(|_| bad())?;
            let cloud = data.cloud_of(&(0..data.len()).collect::<Vec<_>>())?;
            let cols = axes
                .iter()
                .map(|&ax| coordinate_projection(&cloud, ax).map_err(|e| CliError::Config(e.to_string())))
                .collect::<Result<Vec<_>, _>>()?;
            let coords = (0..cloud.len()).map(|i| cols.iter().map(|c| c.row(i)[0]).collect()).collect();
            Ok(Embedding::new(coords, cloud.ids().to_vec()))
        }
        "svd" => {
            let k: usize = arg.parse().map_err(|_| bad())?;
            let e = match data {
                Data::Cloud(c) => truncated_svd(c, k, seed),
                Data::Text { dtm, .. } => truncated_svd(dtm, k, seed),
            };
            e.map_err(|e| CliError::Config(e.to_string()))
        }
        "file" => {
            let path = Path::new(arg);
            let e = Embedding::from_csv_path(path).map_err(|e| io_err(path, e))?;
            if e.len() != data.len() {
                return Err(io_err(path, format!("{} rows for {} inputs", e.len(), data.len())));
            }
            Ok(e)
        }
        _ => Err(bad()),
    }
}

fn cmd_mapper(a: &MapperArgs) -> Result<(), CliError> {
    if a.resolution == 0 {
        return Err(CliError::Config("--resolution must be at least 1".into()));
    }
    if !(0.0..1.0).contains(&a.overlap) {
        return Err(CliError::Config(format!("--overlap must lie in [0, 1), got {}", a.overlap)));
    }
    if a.purity && !(a.both_threshold > 0.5 && a.both_threshold <= 1.0) {
        return Err(CliError::Config(format!("--both-threshold must lie in (0.5, 1], got {}", a.both_threshold)));
    }
    let data = load_input(&a.input, a.purity)?;
    let classes = if a.purity {
        let present: std::collections::BTreeSet<String> = data.labels().unwrap_or_default().into_iter().collect();
        let classes = match &a.classes {
            Some(c) => c.clone(),
            None if present.len() == 2 => present.iter().cloned().collect(),
            None => {
                return Err(CliError::Config(format!(
                    "purity compares two classes but the labels name {}; pass --classes",
                    present.len()
                )))
            }
        };
        for c in &classes {
            if !present.contains(c) {
                return Err(CliError::Config(format!("class {c:?} does not occur in the labels")));
            }
        }
        Some(classes)
    } else {
        None
    };

    let default_lens = match data {
        Data::Cloud(_) => "axis:0",
        Data::Text { .. } => "svd:2",
    };
    let lens = build_lens(a.lens.as_deref().unwrap_or(default_lens), &data, a.seed)?;
    let cover = build_cover(&lens, a.resolution, a.overlap).map_err(|e| CliError::Config(e.to_string()))?;
    let metric = a.metric.unwrap_or(data.default_metric());
    let labels = data.labels();
    let graph = match &data {
        Data::Cloud(cloud) => {
            let src = CloudSource { cloud, metric };
            build_mapper(&lens, &src as &dyn MetricSource, &cover, a.cut, labels.as_deref())
        }
        Data::Text { dtm, .. } => {
            let src = TermSource { dtm, metric };
            build_mapper(&lens, &src as &dyn MetricSource, &cover, a.cut, labels.as_deref())
        }
    }
    .map_err(compute_err)?;

    let terms: Option<Vec<Vec<(String, f64)>>> = match &data {
        Data::Text { dtm, .. } => Some(graph.nodes().iter().map(|n| term_summary(n, dtm, a.top_terms)).collect()),
        Data::Cloud(_) => None,
    };
    write_file(&a.out, "lens.csv", &lens.to_csv())?;
    write_file(&a.out, "graph.json", &graph.to_json())?;
    write_file(&a.out, "graph.dot", &graph.to_dot())?;
    write_file(&a.out, "report.html", &graph.to_html("Mapper graph", terms.as_deref()))?;
    println!(
        "{} nodes, {} edges, {} components, cycle rank {}",
        graph.nodes().len(),
        graph.edges().len(),
        graph.component_count(),
        graph.cycle_rank()
    );
    if let Some(classes) = classes {
        let partition = majority_partition(&graph, &classes[0], &classes[1], a.both_threshold).map_err(compute_err)?;
        let purity = cluster_purity(&graph, &partition, &classes[0], &classes[1]);
        write_file(&a.out, "purity.csv", &purity.to_csv())?;
        let show = |r: Option<f64>| r.map_or("n/a".to_string(), |v| format!("{v:.4}"));
        println!("purity {}: {}, {}: {}", classes[0], show(purity.a), classes[1], show(purity.b));
    }
    println!("wrote {}", a.out.display());
    Ok(())
}

fn cmd_tfidf(a: &TfidfArgs) -> Result<(), CliError> {
    let corpus = load_corpus(&a.corpus, LabelSource::Single("unlabeled")).map_err(|e| io_err(&a.corpus, e))?;
    let mut opts = match &a.stop_words {
        Some(p) => read_stop_words(p)?,
        None => TfidfOptions::default(),
    };
    opts.normalize = !a.no_normalize;
    let dtm = tfidf_with(&corpus, &opts).map_err(|e| io_err(&a.corpus, e))?;
    write_file(&a.out, "tfidf.csv", &dtm.triplets_csv())?;
    write_file(&a.out, "vocab.txt", &dtm.vocab_txt())?;
    if let Some(k) = a.svd {
        let e = truncated_svd(&dtm, k, a.seed).map_err(|e| CliError::Config(e.to_string()))?;
        write_file(&a.out, "embedding.csv", &e.to_csv())?;
    }
    println!("{} documents, {} terms", dtm.n_docs(), dtm.n_terms());
    println!("wrote {}", a.out.display());
    Ok(())
}
