mod config;
mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use swarmselect::dataset::{synthesize, SynthSpec};
use swarmselect::evaluation::{cross_validate, fitness_from_accuracy, metrics, reduction_from_counts};
use swarmselect::pipeline::{combination_seed, default_split, run_grid, select_features};
use swarmselect::ranking::{default_lead_size, leading_mask, rank_features};
use swarmselect::{classifiers, Algorithm, ClassifierKind, ClassifierSpec, Dataset, FeatureMask, RankMethod};

use config::{Format, RunConfig};

/// Exit status classes: 1 usage, 2 data, 3 internal.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Data(String),
    Internal(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Data(_) => 2,
            Failure::Internal(_) => 3,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            Failure::Usage(_) => "usage",
            Failure::Data(_) => "data",
            Failure::Internal(_) => "internal",
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Data(m) | Failure::Internal(m) => m,
        }
    }
}

impl From<swarmselect::Error> for Failure {
    fn from(e: swarmselect::Error) -> Self {
        use swarmselect::Error as E;
        if e.is_data_error() || matches!(e, E::AllFailed) {
            Failure::Data(e.to_string())
        } else if matches!(e, E::InvalidParameter(_) | E::EmptyMask | E::EmptyGrid | E::DimensionMismatch { .. }) {
            Failure::Usage(e.to_string())
        } else {
            Failure::Internal(e.to_string())
        }
    }
}

#[derive(Parser)]
#[command(name = "swarmselect", version, about = "Wrapper feature selection with ranking-seeded binary metaheuristics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score every feature against the label.
    Rank(RankArgs),
    /// Search for a feature subset with one (ranker, selector, classifier).
    Select(SelectArgs),
    /// Test metrics and cross-validation of a fixed feature subset.
    Evaluate(EvaluateArgs),
    /// Run every configured combination and write reports.
    Grid(GridArgs),
    /// Write a synthetic dataset and its planted-feature mask.
    Synth(SynthArgs),
    /// Re-emit reports from a results.json.
    Report(ReportArgs),
}

#[derive(Args)]
struct DataArgs {
    /// JSON run config; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// CSV file with a header row.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Name of the label column.
    #[arg(long)]
    label: Option<String>,
    /// Label token mapped to class 1 (default: labels are numeric 0/1).
    #[arg(long)]
    positive: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
}

impl DataArgs {
    fn run_config(&self) -> Result<RunConfig, Failure> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(d) = &self.data {
            cfg.data = Some(d.clone());
            cfg.synth = None;
        }
        if let Some(l) = &self.label {
            cfg.label_column = l.clone();
        }
        if let Some(p) = &self.positive {
            cfg.positive_label = Some(p.clone());
        }
        if let Some(s) = self.seed {
            cfg.grid.seed = s;
        }
        Ok(cfg)
    }
}

#[derive(Args)]
struct SearchArgs {
    /// Agents per swarm.
    #[arg(long)]
    agents: Option<usize>,
    /// Iterations per run.
    #[arg(long)]
    iterations: Option<usize>,
    /// Trees per random forest.
    #[arg(long)]
    trees: Option<usize>,
    /// Folds for cross-validation.
    #[arg(long)]
    cv_k: Option<usize>,
}

impl SearchArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        let g = &mut cfg.grid;
        if let Some(v) = self.agents {
            g.selector.num_agents = v;
        }
        if let Some(v) = self.iterations {
            g.selector.max_iterations = v;
        }
        if let Some(v) = self.trees {
            g.classifier.rf_trees = v;
        }
        if let Some(v) = self.cv_k {
            g.cv_k = v;
        }
    }
}

#[derive(Args)]
struct RankArgs {
    #[command(flatten)]
    data: DataArgs,
    /// pearson, spearman or relief; all three when omitted.
    #[arg(long)]
    method: Option<RankMethod>,
    /// Size of the leading mask (default: half the features).
    #[arg(long)]
    top: Option<usize>,
    /// Write JSON here instead of stdout.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Also write a score heatmap.
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct SelectArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    search: SearchArgs,
    #[arg(long, default_value = "relief")]
    ranker: RankMethod,
    #[arg(long, default_value = "gsa")]
    selector: Algorithm,
    #[arg(long, default_value = "knn")]
    classifier: ClassifierKind,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    search: SearchArgs,
    #[arg(long, default_value = "knn")]
    classifier: ClassifierKind,
    /// Hex mask, feature 0 in the most significant bit.
    #[arg(long, conflicts_with = "features")]
    mask: Option<String>,
    /// Comma-separated column indices or names.
    #[arg(long, value_delimiter = ',')]
    features: Vec<String>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct GridArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    search: SearchArgs,
    #[arg(long, value_delimiter = ',')]
    rankers: Vec<RankMethod>,
    #[arg(long, value_delimiter = ',')]
    selectors: Vec<Algorithm>,
    #[arg(long, value_delimiter = ',')]
    classifiers: Vec<ClassifierKind>,
    /// Subset of json, csv, svg.
    #[arg(long, value_delimiter = ',')]
    formats: Vec<Format>,
    /// Output directory.
    #[arg(short, long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    rows: usize,
    #[arg(long)]
    cols: usize,
    #[arg(long)]
    informative: usize,
    #[arg(long, default_value_t = 2.0)]
    separation: f64,
    /// Columns that are squares of noise columns.
    #[arg(long, default_value_t = 0)]
    redundant: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    /// A results.json written by `grid`.
    #[arg(long)]
    results: PathBuf,
    #[arg(long, value_delimiter = ',', default_values = ["json", "csv", "svg"])]
    formats: Vec<Format>,
    #[arg(short, long, default_value = "results")]
    out_dir: PathBuf,
}

fn to_json<T: Serialize>(v: &T) -> Result<String, Failure> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| Failure::Internal(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn emit(body: &str, output: Option<&Path>) -> Result<(), Failure> {
    match output {
        Some(p) => fs::write(p, body).map_err(|e| Failure::Internal(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct RankOutput {
    method: RankMethod,
    scores: Vec<f64>,
    order: Vec<usize>,
    order_names: Vec<String>,
    leading_mask: String,
}

fn rank(a: RankArgs) -> Result<(), Failure> {
    let d = a.data.run_config()?.dataset()?;
    let methods = a.method.map_or(RankMethod::ALL.to_vec(), |m| vec![m]);
    let k = a.top.unwrap_or_else(|| default_lead_size(d.n_cols()));
    let mut out = Vec::new();
    let mut ranked = Vec::new();
    for m in methods {
        let r = rank_features(&d, m)?;
        out.push(RankOutput {
            method: m,
            order_names: r.order.iter().map(|&i| d.column_names()[i].clone()).collect(),
            leading_mask: leading_mask(&r, k)?.to_hex(),
            scores: r.scores.clone(),
            order: r.order.clone(),
        });
        ranked.push(r);
    }
    if let Some(p) = &a.svg {
        emit(&report::ranking_heatmap(d.column_names(), &ranked), Some(p))?;
    }
    emit(&to_json(&out)?, a.output.as_deref())
}

#[derive(Serialize)]
struct SelectOutput {
    ranker: RankMethod,
    selector: Algorithm,
    classifier: ClassifierKind,
    seed: u64,
    selected_mask: String,
    selected_features: Vec<usize>,
    selected_names: Vec<String>,
    fitness: f64,
    validation_accuracy: f64,
    evaluations: u64,
    attempts: usize,
    leading_mask: String,
    fitness_history: Vec<f64>,
}

fn select(a: SelectArgs) -> Result<(), Failure> {
    let mut cfg = a.data.run_config()?;
    a.search.apply(&mut cfg);
    let d = cfg.dataset()?;
    let parts = default_split(&d, &cfg.grid)?;
    let seed = combination_seed(cfg.grid.seed, 0);
    let s = select_features(a.ranker, a.selector, a.classifier, &d, &parts, &cfg.grid, seed)?;
    let mask = &s.result.best_mask;
    let out = SelectOutput {
        ranker: a.ranker,
        selector: a.selector,
        classifier: a.classifier,
        seed,
        selected_mask: mask.to_hex(),
        selected_features: mask.indices(),
        selected_names: mask.indices().iter().map(|&i| d.column_names()[i].clone()).collect(),
        fitness: s.result.best_fitness,
        validation_accuracy: s.validation_accuracy,
        evaluations: s.result.evaluations,
        attempts: s.attempts,
        leading_mask: s.leading_mask.to_hex(),
        fitness_history: s.result.fitness_history,
    };
    emit(&to_json(&out)?, a.output.as_deref())
}

fn parse_mask(d: &Dataset, hex: Option<&str>, features: &[String]) -> Result<FeatureMask, Failure> {
    let n = d.n_cols();
    if let Some(h) = hex {
        return Ok(FeatureMask::from_hex(h, n)?);
    }
    if features.is_empty() {
        return Err(Failure::Usage("pass --mask or --features".into()));
    }
    let mut idx = Vec::new();
    for f in features {
        let i = match f.parse::<usize>() {
            Ok(i) => i,
            Err(_) => d
                .column_names()
                .iter()
                .position(|c| c == f)
                .ok_or_else(|| Failure::Usage(format!("no column `{f}`")))?,
        };
        idx.push(i);
    }
    Ok(FeatureMask::from_indices(n, &idx)?)
}

#[derive(Serialize)]
struct EvaluateOutput {
    classifier: ClassifierKind,
    selected_mask: String,
    n_selected: usize,
    n_features: usize,
    feature_reduction: f64,
    fitness: f64,
    test_confusion: swarmselect::evaluation::ConfusionMatrix,
    test_metrics: swarmselect::evaluation::MetricsReport,
    cv: swarmselect::evaluation::CvScores,
}

fn evaluate(a: EvaluateArgs) -> Result<(), Failure> {
    let mut cfg = a.data.run_config()?;
    a.search.apply(&mut cfg);
    let d = cfg.dataset()?;
    let mask = parse_mask(&d, a.mask.as_deref(), &a.features)?;
    let g = &cfg.grid;
    let parts = default_split(&d, g)?;
    let seed = combination_seed(g.seed, 0);
    let spec = ClassifierSpec { kind: a.classifier, seed, ..g.classifier.clone() };
    let cm = classifiers::evaluate_masked(&spec, &d, &parts.train_and_validate(), &parts.test, &mask)?;
    let n = d.n_cols();
    let out = EvaluateOutput {
        classifier: a.classifier,
        selected_mask: mask.to_hex(),
        n_selected: mask.count_ones(),
        n_features: n,
        feature_reduction: reduction_from_counts(mask.count_ones(), n),
        fitness: fitness_from_accuracy(cm.accuracy(), mask.count_ones(), n, g.fitness_weight)?.value,
        test_metrics: metrics(&cm)?,
        test_confusion: cm,
        cv: cross_validate(&spec, &d, &mask, g.cv_k, seed)?,
    };
    emit(&to_json(&out)?, a.output.as_deref())
}

fn grid(a: GridArgs) -> Result<(), Failure> {
    let mut cfg = a.data.run_config()?;
    a.search.apply(&mut cfg);
    if !a.rankers.is_empty() {
        cfg.grid.rankers = a.rankers;
    }
    if !a.selectors.is_empty() {
        cfg.grid.selectors = a.selectors;
    }
    if !a.classifiers.is_empty() {
        cfg.grid.classifiers = a.classifiers;
    }
    if !a.formats.is_empty() {
        cfg.formats = a.formats;
    }
    if let Some(o) = a.out_dir {
        cfg.output_dir = o;
    }
    let d = cfg.dataset()?;
    let results = run_grid(&d, &cfg.grid)?;
    if !results.iter().any(|r| r.is_ok()) {
        let first = results.iter().find_map(|r| r.error.clone()).unwrap_or_default();
        return Err(Failure::Data(format!("every combination failed; first error: {first}")));
    }
    let manifest = report::emit_report(&results, &cfg.formats, &cfg.output_dir)?;
    emit(&to_json(&manifest)?, None)
}

#[derive(Serialize)]
struct MaskSidecar {
    n_cols: usize,
    informative: Vec<usize>,
    informative_names: Vec<String>,
    mask: String,
    spec: SynthSpec,
}

fn synth(a: SynthArgs) -> Result<(), Failure> {
    let spec = SynthSpec {
        redundant_pairs: a.redundant,
        ..SynthSpec::new(a.rows, a.cols, a.informative, a.separation, a.seed)
    };
    let (d, mask) = synthesize(&spec)?;
    emit(&d.to_csv_string("label")?, Some(&a.output))?;
    let side = MaskSidecar {
        n_cols: d.n_cols(),
        informative: mask.indices(),
        informative_names: mask.indices().iter().map(|&i| d.column_names()[i].clone()).collect(),
        mask: mask.to_hex(),
        spec,
    };
    emit(&to_json(&side)?, Some(&a.output.with_extension("mask.json")))
}

fn report_cmd(a: ReportArgs) -> Result<(), Failure> {
    let text = fs::read_to_string(&a.results).map_err(|e| Failure::Data(format!("cannot read {}: {e}", a.results.display())))?;
    let results: Vec<swarmselect::pipeline::CombinationResult> =
        serde_json::from_str(&text).map_err(|e| Failure::Data(format!("invalid results file {}: {e}", a.results.display())))?;
    let manifest = report::emit_report(&results, &a.formats, &a.out_dir)?;
    emit(&to_json(&manifest)?, None)
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var("SWARMSELECT_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| Failure::Usage(format!("SWARMSELECT_THREADS=`{v}` is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| Failure::Internal(e.to_string()))
}

fn run(cli: Cli) -> Result<(), Failure> {
    configure_threads()?;
    match cli.command {
        Command::Rank(a) => rank(a),
        Command::Select(a) => select(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Grid(a) => grid(a),
        Command::Synth(a) => synth(a),
        Command::Report(a) => report_cmd(a),
    }
}

fn fail(f: &Failure) -> ExitCode {
    eprintln!("error[{}:{}] {}", f.code(), f.kind(), f.message().replace('\n', " "));
    ExitCode::from(f.code())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let _ = e.print();
            return fail(&Failure::Usage(e.kind().to_string()));
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => fail(&f),
    }
}
