use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use matrix_reasoner::analogies::AnalogyGroup;
use matrix_reasoner::corpus::{corpus_build, load_manifest, CorpusError, GlyphSet, ManifestError};
use matrix_reasoner::harness::{cmd_ablate, cmd_evaluate, cmd_report, in_pool, Grid, HarnessError, RunConfig};
use matrix_reasoner::strategies::{chosen_scores, solve, SolveConfig, SolveError, StrategyId};
use matrix_reasoner::transforms::TransformGroup;

#[derive(Parser)]
#[command(name = "matrix-reasoner", version, about = "Solve, generate and evaluate geometric matrix problems")]
struct Cli {
    /// Worker threads (MATRIX_REASONER_THREADS takes precedence).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one manifest and print the chosen option.
    Solve {
        manifest: PathBuf,
        #[arg(long, default_value = "m_prudent")]
        strategy: StrategyId,
        #[arg(long, value_delimiter = ',', default_value = "S,H,V,R")]
        analogy_groups: Vec<AnalogyGroup>,
        #[arg(long, value_delimiter = ',', default_value = "affine,diff,match,set")]
        transform_groups: Vec<TransformGroup>,
    },
    /// Generate a stratified corpus.
    Generate {
        #[arg(long, default_value_t = 60)]
        n: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve a corpus under one configuration and write per-item results.
    Evaluate {
        corpus: PathBuf,
        #[arg(long, default_value = "m_prudent")]
        strategy: StrategyId,
        #[arg(long, value_delimiter = ',', default_value = "S,H,V,R")]
        analogy_groups: Vec<AnalogyGroup>,
        #[arg(long, value_delimiter = ',', default_value = "affine,diff,match,set")]
        transform_groups: Vec<TransformGroup>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the group ablation grid over a corpus.
    Ablate {
        corpus: PathBuf,
        #[arg(long, default_value = "per_group")]
        grid: Grid,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "m_confident,m_neutral,m_prudent,o_confident,o_neutral,o_prudent")]
        strategies: Vec<StrategyId>,
    },
    /// Draw scatter and disk plots from a choices CSV.
    Report {
        csv: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        Failure {
            code: e.exit_code() as u8,
            message: e.to_string(),
        }
    }
}

impl From<ManifestError> for Failure {
    fn from(e: ManifestError) -> Self {
        Failure { code: 2, message: e.to_string() }
    }
}

impl From<SolveError> for Failure {
    fn from(e: SolveError) -> Self {
        Failure { code: 2, message: e.to_string() }
    }
}

impl From<CorpusError> for Failure {
    fn from(e: CorpusError) -> Self {
        Failure { code: 3, message: e.to_string() }
    }
}

fn non_empty<T>(v: &[T], what: &str) -> Result<(), Failure> {
    if v.is_empty() {
        return Err(Failure {
            code: 2,
            message: format!("{what} must not be empty"),
        });
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<(), Failure> {
    let threads = cli.threads;
    match cli.command {
        Command::Solve {
            manifest,
            strategy,
            analogy_groups,
            transform_groups,
        } => {
            non_empty(&analogy_groups, "analogy groups")?;
            non_empty(&transform_groups, "transform groups")?;
            let problem = load_manifest(&manifest)?;
            let config = SolveConfig {
                strategy,
                analogy_groups,
                transform_groups,
            };
            let solution = in_pool(threads, || solve(&problem, &config))??;
            let (mat, o, mato) = chosen_scores(&solution);
            let r = &solution.winning_record;
            println!("answer: {}", solution.chosen_option);
            println!("mat: {mat:.6}");
            println!("o: {o:.6}");
            println!("mato: {mato:.6}");
            println!("analogy: {}", r.analogy);
            println!("transform: {}", r.transform.name());
            if let Some(a) = problem.answer {
                println!("expected: {a}");
            }
        }
        Command::Generate { n, seed, out } => {
            let index = in_pool(threads, || corpus_build(n, seed, &GlyphSet::default(), &out))??;
            println!("wrote {} items to {} (hash {})", index.items.len(), out.display(), index.hash);
        }
        Command::Evaluate {
            corpus,
            strategy,
            analogy_groups,
            transform_groups,
            out,
        } => {
            let config = RunConfig {
                strategy,
                analogy_groups,
                transform_groups,
                corpus,
                parallelism: threads,
                output: out,
            };
            let (report, path) = cmd_evaluate(&config)?;
            for (set, t) in &report.per_set {
                println!("set {set}: {}/{} ({:.3})", t.correct, t.total, t.accuracy());
            }
            println!("total: {}/{} ({:.3})", report.total.correct, report.total.total, report.total.accuracy());
            println!("wrote {}", path.display());
        }
        Command::Ablate {
            corpus,
            grid,
            out,
            strategies,
        } => {
            non_empty(&strategies, "strategies")?;
            let o = cmd_ablate(&corpus, &strategies, grid, &out, threads)?;
            for row in &o.rows {
                let cells: Vec<String> = row
                    .results
                    .iter()
                    .map(|(s, t)| format!("{s} {}/{}", t.correct, t.total))
                    .collect();
                println!("{}: {}", row.cell.label, cells.join(", "));
            }
            println!("wrote {}, {}, {}", o.grid_csv.display(), o.choices_csv.display(), o.svg.display());
        }
        Command::Report { csv, out } => {
            let (scatter, disks) = cmd_report(&csv, &out)?;
            println!("wrote {}, {}", scatter.display(), disks.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match std::panic::catch_unwind(|| execute(cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(f)) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code)
        }
        Err(_) => ExitCode::from(3),
    }
}
