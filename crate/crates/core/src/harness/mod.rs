//! Corpus runs: per-item answers, ablation grids over group subsets, and
//! their CSV and SVG outputs.

mod plots;

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analogies::AnalogyGroup;
use crate::corpus::{load_corpus, write_atomic, CorpusError, CorpusIndex, IndexEntry, Problem};
use crate::scoring::ScoreRecord;
use crate::similarity::MemoAligner;
use crate::strategies::{best_per_option, score_trace, select, SolveConfig, SolveError, StrategyId};
use crate::transforms::{TransformGroup, UnknownName};

pub use plots::{disk_svg, grid_svg, scatter_svg};

/// Overrides the worker count everywhere.
pub const THREADS_ENV: &str = "MATRIX_REASONER_THREADS";

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("analogy and transformation group sets must be non-empty")]
    EmptyGroups,
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("malformed CSV {path}: {message}")]
    MalformedCsv { path: String, message: String },
    #[error("cannot write {path}: {source}")]
    Write {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("bad {var}: {value}")]
    BadThreads { var: &'static str, value: String },
    #[error("thread pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

impl HarnessError {
    /// 2 for bad input, 3 for internal failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Write { .. } | HarnessError::Pool(_) => 3,
            HarnessError::Corpus(CorpusError::Generate { .. }) => 3,
            _ => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub strategy: StrategyId,
    pub analogy_groups: Vec<AnalogyGroup>,
    pub transform_groups: Vec<TransformGroup>,
    pub corpus: PathBuf,
    /// Worker count; `None` leaves it to rayon.
    pub parallelism: Option<usize>,
    pub output: PathBuf,
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.analogy_groups.is_empty() || self.transform_groups.is_empty() {
            return Err(HarnessError::EmptyGroups);
        }
        Ok(())
    }

    pub fn solve_config(&self) -> SolveConfig {
        SolveConfig {
            strategy: self.strategy,
            analogy_groups: self.analogy_groups.clone(),
            transform_groups: self.transform_groups.clone(),
        }
    }
}

/// The worker count after applying the environment override.
pub fn effective_threads(requested: Option<usize>) -> Result<Option<usize>, HarnessError> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(HarnessError::BadThreads { var: THREADS_ENV, value: v }),
        },
        Err(_) => Ok(requested),
    }
}

/// Runs `f` on a pool of the effective size.
pub fn in_pool<T: Send>(requested: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, HarnessError> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = effective_threads(requested)? {
        b = b.num_threads(n);
    }
    Ok(b.build()?.install(f))
}

/// A corpus item with its full-configuration trace. Every group subset
/// is a filter of this trace: records do not depend on which other
/// groups are enabled, and filtering keeps enumeration order.
#[derive(Debug, Clone)]
pub struct Traced {
    pub entry: IndexEntry,
    pub problem: Problem,
    pub trace: Vec<ScoreRecord>,
}

pub fn trace_corpus(index: &CorpusIndex, problems: Vec<Problem>) -> Vec<Traced> {
    index
        .items
        .iter()
        .cloned()
        .zip(problems)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(entry, problem)| {
            let trace = score_trace(&MemoAligner::new(), &problem, &AnalogyGroup::ALL, &TransformGroup::ALL);
            Traced { entry, problem, trace }
        })
        .collect()
}

pub fn restrict(trace: &[ScoreRecord], analogy_groups: &[AnalogyGroup], transform_groups: &[TransformGroup]) -> Vec<ScoreRecord> {
    trace
        .iter()
        .filter(|r| analogy_groups.contains(&r.analogy_group) && transform_groups.contains(&r.transform.group()))
        .cloned()
        .collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub correct: usize,
    pub total: usize,
}

impl Tally {
    pub fn add(&mut self, correct: bool) {
        self.total += 1;
        self.correct += correct as usize;
    }

    /// `correct / total`; zero for an empty tally.
    pub fn accuracy(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.correct as f64 / self.total as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ItemResult {
    pub problem_id: String,
    pub set: String,
    /// `None` when the configuration has nothing to apply to the item.
    pub record: Option<ScoreRecord>,
    pub correct: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub strategy: StrategyId,
    pub analogy_groups: Vec<AnalogyGroup>,
    pub transform_groups: Vec<TransformGroup>,
    pub items: Vec<ItemResult>,
    pub per_set: BTreeMap<String, Tally>,
    pub total: Tally,
}

/// Answers every traced item under `config`. Items without candidates
/// count as wrong.
pub fn evaluate(traced: &[Traced], config: &SolveConfig) -> RunReport {
    let mut report = RunReport {
        strategy: config.strategy,
        analogy_groups: config.analogy_groups.clone(),
        transform_groups: config.transform_groups.clone(),
        items: Vec::with_capacity(traced.len()),
        per_set: BTreeMap::new(),
        total: Tally::default(),
    };
    for t in traced {
        let sub = restrict(&t.trace, &config.analogy_groups, &config.transform_groups);
        let record = select(config.strategy, &sub).ok().map(|i| sub[i].clone());
        let correct = record.as_ref().is_some_and(|r| r.option_index == t.entry.answer);
        report.per_set.entry(t.entry.set.clone()).or_default().add(correct);
        report.total.add(correct);
        report.items.push(ItemResult {
            problem_id: t.entry.id.clone(),
            set: t.entry.set.clone(),
            record,
            correct,
        });
    }
    report
}

/// Loads the corpus named by `config`, solves it, and returns the report.
pub fn run(config: &RunConfig) -> Result<RunReport, HarnessError> {
    config.validate()?;
    let (index, problems) = load_corpus(&config.corpus)?;
    let traced = in_pool(config.parallelism, || trace_corpus(&index, problems))?;
    Ok(evaluate(&traced, &config.solve_config()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Grid {
    /// Each analogy group with each transformation group.
    PerGroup,
    /// Nested unions S, +H, +V, +R against Affine, +Diff, +Match, +Set.
    Cumulative,
}

impl Grid {
    pub fn name(self) -> &'static str {
        match self {
            Grid::PerGroup => "per_group",
            Grid::Cumulative => "cumulative",
        }
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Grid {
    type Err = UnknownName;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().replace('-', "_").to_ascii_lowercase().as_str() {
            "per_group" => Ok(Grid::PerGroup),
            "cumulative" => Ok(Grid::Cumulative),
            _ => Err(UnknownName(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridCell {
    pub label: String,
    pub analogy_groups: Vec<AnalogyGroup>,
    pub transform_groups: Vec<TransformGroup>,
}

fn join<T: Copy>(items: &[T], name: impl Fn(T) -> &'static str, sep: &str) -> String {
    items.iter().map(|&x| name(x)).collect::<Vec<_>>().join(sep)
}

/// Sixteen cells, analogy-major.
pub fn grid_cells(grid: Grid) -> Vec<GridCell> {
    let (ag, tg) = (AnalogyGroup::ALL, TransformGroup::ALL);
    let mut cells = Vec::new();
    for i in 0..ag.len() {
        for j in 0..tg.len() {
            let (a, t) = match grid {
                Grid::PerGroup => (vec![ag[i]], vec![tg[j]]),
                Grid::Cumulative => (ag[..=i].to_vec(), tg[..=j].to_vec()),
            };
            let label = format!("{}/{}", join(&a, AnalogyGroup::name, "+"), join(&t, TransformGroup::name, "+"));
            cells.push(GridCell {
                label,
                analogy_groups: a,
                transform_groups: t,
            });
        }
    }
    cells
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridRow {
    pub cell: GridCell,
    /// Per strategy, over all items.
    pub results: Vec<(StrategyId, Tally)>,
    /// Per strategy, over items whose generating groups lie inside the cell.
    pub stratum: Vec<(StrategyId, Tally)>,
    /// Per strategy and set, correct answers (for stacked bars).
    pub by_set: Vec<(StrategyId, BTreeMap<String, usize>)>,
}

pub fn ablate(traced: &[Traced], grid: Grid, strategies: &[StrategyId]) -> Vec<GridRow> {
    grid_cells(grid)
        .into_iter()
        .map(|cell| {
            let mut results = Vec::new();
            let mut stratum = Vec::new();
            let mut by_set = Vec::new();
            for &s in strategies {
                let config = SolveConfig {
                    strategy: s,
                    analogy_groups: cell.analogy_groups.clone(),
                    transform_groups: cell.transform_groups.clone(),
                };
                let report = evaluate(traced, &config);
                let mut own = Tally::default();
                let mut sets: BTreeMap<String, usize> = BTreeMap::new();
                for (t, item) in traced.iter().zip(&report.items) {
                    if cell.analogy_groups.contains(&t.entry.analogy_group) && cell.transform_groups.contains(&t.entry.transform_group) {
                        own.add(item.correct);
                    }
                    *sets.entry(item.set.clone()).or_default() += item.correct as usize;
                }
                results.push((s, report.total));
                stratum.push((s, own));
                by_set.push((s, sets));
            }
            GridRow {
                cell,
                results,
                stratum,
                by_set,
            }
        })
        .collect()
}

fn csv_error(e: csv::Error) -> HarnessError {
    HarnessError::MalformedCsv {
        path: "<memory>".into(),
        message: e.to_string(),
    }
}

fn finish(w: csv::Writer<Vec<u8>>) -> String {
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf-8 csv")
}

/// One row per grid cell: counts and accuracies for each strategy, overall
/// and on the cell's own stratum.
pub fn grid_csv(rows: &[GridRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let strategies: Vec<StrategyId> = rows.first().map(|r| r.results.iter().map(|(s, _)| *s).collect()).unwrap_or_default();
    let mut header = vec!["cell".to_string(), "analogy_groups".into(), "transform_groups".into(), "total".into(), "stratum_total".into()];
    for s in &strategies {
        header.extend([format!("{s}_correct"), format!("{s}_accuracy"), format!("{s}_stratum_accuracy")]);
    }
    w.write_record(&header).expect("in-memory write");
    for r in rows {
        let total = r.results.first().map(|(_, t)| t.total).unwrap_or(0);
        let own = r.stratum.first().map(|(_, t)| t.total).unwrap_or(0);
        let mut rec = vec![
            r.cell.label.clone(),
            join(&r.cell.analogy_groups, AnalogyGroup::name, ","),
            join(&r.cell.transform_groups, TransformGroup::name, ","),
            total.to_string(),
            own.to_string(),
        ];
        for ((_, t), (_, o)) in r.results.iter().zip(&r.stratum) {
            rec.extend([t.correct.to_string(), format!("{:.6}", t.accuracy()), format!("{:.6}", o.accuracy())]);
        }
        w.write_record(&rec).expect("in-memory write");
    }
    finish(w)
}

/// One row of the choices CSV: an option's best record under a strategy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChoiceRow {
    pub problem_id: String,
    pub strategy: StrategyId,
    pub analogy: String,
    pub transform: String,
    pub option_index: usize,
    pub mat: f64,
    pub o: f64,
    pub mato: f64,
    pub chosen: bool,
    pub correct: bool,
}

/// Full-configuration choices: per item, strategy and option, the best
/// record among the strategy's candidates.
pub fn choice_rows(traced: &[Traced], strategies: &[StrategyId]) -> Result<Vec<ChoiceRow>, SolveError> {
    let mut rows = Vec::new();
    for t in traced {
        for &s in strategies {
            let win = select(s, &t.trace)?;
            for (k, best) in best_per_option(s, &t.trace, t.problem.options.len()).into_iter().enumerate() {
                let Some(i) = best else { continue };
                let r = &t.trace[i];
                rows.push(ChoiceRow {
                    problem_id: t.entry.id.clone(),
                    strategy: s,
                    analogy: r.analogy.clone(),
                    transform: r.transform.name().to_string(),
                    option_index: k,
                    mat: round6(r.mat),
                    o: round6(r.o),
                    mato: round6(r.mato),
                    chosen: i == win,
                    correct: k == t.entry.answer,
                });
            }
        }
    }
    Ok(rows)
}

fn round6(x: f64) -> f64 {
    (x * 1e6).round() / 1e6
}

pub fn choices_csv(rows: &[ChoiceRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).expect("in-memory write");
    }
    finish(w)
}

pub fn parse_choices_csv(text: &str) -> Result<Vec<ChoiceRow>, HarnessError> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let rows = r.deserialize().collect::<Result<Vec<ChoiceRow>, _>>().map_err(csv_error)?;
    if rows.is_empty() {
        return Err(HarnessError::MalformedCsv {
            path: "<memory>".into(),
            message: "no rows".into(),
        });
    }
    Ok(rows)
}

fn write(path: &Path, text: &str) -> Result<(), HarnessError> {
    write_atomic(path, text.as_bytes()).map_err(|source| HarnessError::Write {
        path: path.display().to_string(),
        source,
    })
}

fn ensure_dir(dir: &Path) -> Result<(), HarnessError> {
    std::fs::create_dir_all(dir).map_err(|source| HarnessError::Write {
        path: dir.display().to_string(),
        source,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AblateOutput {
    pub rows: Vec<GridRow>,
    pub grid_csv: PathBuf,
    pub choices_csv: PathBuf,
    pub svg: PathBuf,
}

/// Per-item rows of a run: the chosen record and its correctness. Items
/// with nothing to apply leave the record columns empty.
pub fn report_csv(report: &RunReport) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["problem_id", "set", "strategy", "analogy", "transform", "option_index", "mat", "o", "mato", "correct"])
        .expect("in-memory write");
    for it in &report.items {
        let mut rec = vec![it.problem_id.clone(), it.set.clone(), report.strategy.name().to_string()];
        match &it.record {
            Some(r) => rec.extend([
                r.analogy.clone(),
                r.transform.name().to_string(),
                r.option_index.to_string(),
                format!("{:.6}", r.mat),
                format!("{:.6}", r.o),
                format!("{:.6}", r.mato),
            ]),
            None => rec.extend(std::iter::repeat_n(String::new(), 6)),
        }
        rec.push(it.correct.to_string());
        w.write_record(&rec).expect("in-memory write");
    }
    finish(w)
}

/// Runs `config` and writes `<strategy>.csv` into its output directory.
pub fn cmd_evaluate(config: &RunConfig) -> Result<(RunReport, PathBuf), HarnessError> {
    let report = run(config)?;
    ensure_dir(&config.output)?;
    let path = config.output.join(format!("{}.csv", config.strategy));
    write(&path, &report_csv(&report))?;
    Ok((report, path))
}

/// Writes `<grid>.csv`, `<grid>.svg` and `choices.csv` into `out`.
pub fn cmd_ablate(
    corpus: &Path,
    strategies: &[StrategyId],
    grid: Grid,
    out: &Path,
    threads: Option<usize>,
) -> Result<AblateOutput, HarnessError> {
    let (index, problems) = load_corpus(corpus)?;
    let (rows, choices) = in_pool(threads, || -> Result<_, SolveError> {
        let traced = trace_corpus(&index, problems);
        Ok((ablate(&traced, grid, strategies), choice_rows(&traced, strategies)?))
    })??;
    ensure_dir(out)?;
    let grid_path = out.join(format!("{grid}.csv"));
    let choices_path = out.join("choices.csv");
    let svg_path = out.join(format!("{grid}.svg"));
    write(&grid_path, &grid_csv(&rows))?;
    write(&choices_path, &choices_csv(&choices))?;
    write(&svg_path, &grid_svg(&rows, grid))?;
    Ok(AblateOutput {
        rows,
        grid_csv: grid_path,
        choices_csv: choices_path,
        svg: svg_path,
    })
}

/// Reads a choices CSV and writes `scatter.svg` and `disks.svg` into `out`.
pub fn cmd_report(csv_path: &Path, out: &Path) -> Result<(PathBuf, PathBuf), HarnessError> {
    let text = std::fs::read_to_string(csv_path).map_err(|source| HarnessError::Read {
        path: csv_path.display().to_string(),
        source,
    })?;
    let rows = parse_choices_csv(&text).map_err(|e| match e {
        HarnessError::MalformedCsv { message, .. } => HarnessError::MalformedCsv {
            path: csv_path.display().to_string(),
            message,
        },
        e => e,
    })?;
    ensure_dir(out)?;
    let (scatter, disks) = (out.join("scatter.svg"), out.join("disks.svg"));
    write(&scatter, &scatter_svg(&rows))?;
    write(&disks, &disk_svg(&rows))?;
    Ok((scatter, disks))
}
