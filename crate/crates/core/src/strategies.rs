//! Integration strategies: when the (analogy, transformation) choice is
//! committed, and whether MATO or O picks the answer.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analogies::{enumerate_analogies, AnalogyGroup};
use crate::corpus::Problem;
use crate::scoring::{score_analogy, ScoreRecord};
use crate::similarity::{Aligner, MemoAligner};
use crate::transforms::{TransformGroup, TransformId, UnknownName};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyId {
    MConfident,
    MNeutral,
    MPrudent,
    OConfident,
    ONeutral,
    OPrudent,
}

impl StrategyId {
    pub const ALL: [StrategyId; 6] = [
        StrategyId::MConfident,
        StrategyId::MNeutral,
        StrategyId::MPrudent,
        StrategyId::OConfident,
        StrategyId::ONeutral,
        StrategyId::OPrudent,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StrategyId::MConfident => "m_confident",
            StrategyId::MNeutral => "m_neutral",
            StrategyId::MPrudent => "m_prudent",
            StrategyId::OConfident => "o_confident",
            StrategyId::ONeutral => "o_neutral",
            StrategyId::OPrudent => "o_prudent",
        }
    }

    /// MATO grows with O once MAT is fixed, so O-confident is M-confident.
    pub fn resolve(self) -> StrategyId {
        match self {
            StrategyId::OConfident => StrategyId::MConfident,
            s => s,
        }
    }
}

impl fmt::Display for StrategyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StrategyId {
    type Err = UnknownName;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim().replace('-', "_").to_ascii_lowercase();
        StrategyId::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or(UnknownName(s))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveConfig {
    pub strategy: StrategyId,
    pub analogy_groups: Vec<AnalogyGroup>,
    pub transform_groups: Vec<TransformGroup>,
}

impl SolveConfig {
    /// Every analogy and transformation group.
    pub fn full(strategy: StrategyId) -> Self {
        SolveConfig {
            strategy,
            analogy_groups: AnalogyGroup::ALL.to_vec(),
            transform_groups: TransformGroup::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("no compatible analogy/transformation pair for the selected groups")]
    NoCandidates,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub chosen_option: usize,
    pub winning_record: ScoreRecord,
    pub full_trace: Vec<ScoreRecord>,
}

/// Scores every compatible (analogy, transformation, option) triple, in
/// enumeration order. Evaluation runs in parallel; the order does not
/// depend on it.
pub fn score_trace(
    al: &dyn Aligner,
    problem: &Problem,
    analogy_groups: &[AnalogyGroup],
    transform_groups: &[TransformGroup],
) -> Vec<ScoreRecord> {
    let analogies = enumerate_analogies(problem.dim, analogy_groups);
    let transforms = TransformId::in_groups(transform_groups);
    let pairs: Vec<(usize, TransformId)> = analogies
        .iter()
        .enumerate()
        .flat_map(|(i, a)| {
            transforms
                .iter()
                .filter(move |t| a.shape().accepts(t.arity()))
                .map(move |&t| (i, t))
        })
        .collect();
    pairs
        .par_iter()
        .map(|&(i, t)| score_analogy(al, problem, &analogies[i], i, t).expect("arity checked"))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

/// First index maximising `key` among `indices`.
fn first_max(trace: &[ScoreRecord], indices: impl Iterator<Item = usize>, key: impl Fn(&ScoreRecord) -> f64) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for i in indices {
        let v = key(&trace[i]);
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((i, v));
        }
    }
    best.map(|(i, _)| i)
}

/// Trace indices of each (analogy, transformation) block.
fn blocks(trace: &[ScoreRecord]) -> Vec<std::ops::Range<usize>> {
    let mut out: Vec<std::ops::Range<usize>> = Vec::new();
    for (i, r) in trace.iter().enumerate() {
        match out.last_mut() {
            Some(b) if trace[b.start].analogy_index == r.analogy_index && trace[b.start].transform == r.transform => {
                b.end = i + 1
            }
            _ => out.push(i..i + 1),
        }
    }
    out
}

/// Per analogy, the first block with the highest MAT.
fn neutral_blocks(trace: &[ScoreRecord]) -> Vec<std::ops::Range<usize>> {
    let mut chosen: Vec<std::ops::Range<usize>> = Vec::new();
    for b in blocks(trace) {
        let mat = trace[b.start].mat;
        match chosen.last_mut() {
            Some(c) if trace[c.start].analogy_index == trace[b.start].analogy_index => {
                if mat > trace[c.start].mat {
                    *c = b;
                }
            }
            _ => chosen.push(b),
        }
    }
    chosen
}

/// Trace indices a strategy chooses among, in trace order.
pub fn candidates(strategy: StrategyId, trace: &[ScoreRecord]) -> Vec<usize> {
    match strategy.resolve() {
        StrategyId::MConfident => first_max(trace, 0..trace.len(), |r| r.mat)
            .and_then(|i| blocks(trace).into_iter().find(|b| b.contains(&i)))
            .map(|b| b.collect())
            .unwrap_or_default(),
        StrategyId::MNeutral | StrategyId::ONeutral => neutral_blocks(trace).into_iter().flatten().collect(),
        _ => (0..trace.len()).collect(),
    }
}

/// The score a strategy maximises over its candidates.
pub fn objective(strategy: StrategyId, record: &ScoreRecord) -> f64 {
    match strategy.resolve() {
        StrategyId::ONeutral | StrategyId::OPrudent => record.o,
        _ => record.mato,
    }
}

/// Index of the winning record in `trace` under `strategy`.
pub fn select(strategy: StrategyId, trace: &[ScoreRecord]) -> Result<usize, SolveError> {
    first_max(trace, candidates(strategy, trace).into_iter(), |r| objective(strategy, r)).ok_or(SolveError::NoCandidates)
}

/// Among the strategy's candidates, the best record for each option
/// (`None` for options no candidate covers).
pub fn best_per_option(strategy: StrategyId, trace: &[ScoreRecord], options: usize) -> Vec<Option<usize>> {
    let cands = candidates(strategy, trace);
    (0..options)
        .map(|k| {
            let of_k = cands.iter().copied().filter(|&i| trace[i].option_index == k);
            first_max(trace, of_k, |r| objective(strategy, r))
        })
        .collect()
}

pub fn solve_with(al: &dyn Aligner, problem: &Problem, config: &SolveConfig) -> Result<Solution, SolveError> {
    let trace = score_trace(al, problem, &config.analogy_groups, &config.transform_groups);
    let i = select(config.strategy, &trace)?;
    Ok(Solution {
        chosen_option: trace[i].option_index,
        winning_record: trace[i].clone(),
        full_trace: trace,
    })
}

pub fn solve(problem: &Problem, config: &SolveConfig) -> Result<Solution, SolveError> {
    solve_with(&MemoAligner::new(), problem, config)
}

pub fn chosen_scores(solution: &Solution) -> (f64, f64, f64) {
    let r = &solution.winning_record;
    (r.mat, r.o, r.mato)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bitmap::{BinaryImage, Offset};
    use crate::transforms::Failure;

    fn rec(a: usize, t: TransformId, opt: usize, mat: f64, o: f64) -> ScoreRecord {
        ScoreRecord {
            analogy: format!("a{a}"),
            analogy_index: a,
            analogy_group: AnalogyGroup::S,
            transform: t,
            option_index: opt,
            mat,
            o,
            mato: (mat + o) / 2.0,
            prediction: Err(Failure::NoCopyFound),
        }
    }

    /// Two analogies, two transforms, two options.
    fn trace() -> Vec<ScoreRecord> {
        use TransformId::*;
        vec![
            rec(0, Identity, 0, 0.5, 1.0),
            rec(0, Identity, 1, 0.5, 0.2),
            rec(0, AddDiff, 0, 0.9, 0.1),
            rec(0, AddDiff, 1, 0.9, 0.6),
            rec(1, Identity, 0, 0.95, 0.3),
            rec(1, Identity, 1, 0.95, 0.4),
            rec(1, AddDiff, 0, 0.7, 0.99),
            rec(1, AddDiff, 1, 0.7, 0.98),
        ]
    }

    #[test]
    fn each_strategy_on_a_hand_trace() {
        let t = trace();
        let pick = |s| t[select(s, &t).unwrap()].clone();
        // Best MAT is analogy 1 / identity; its better option is 1.
        assert_eq!(pick(StrategyId::MConfident).option_index, 1);
        assert_eq!(pick(StrategyId::MConfident).analogy_index, 1);
        assert_eq!(pick(StrategyId::OConfident), pick(StrategyId::MConfident));
        // Neutral keeps add_diff for analogy 0 and identity for analogy 1.
        let n = pick(StrategyId::MNeutral);
        assert_eq!((n.analogy_index, n.transform, n.option_index), (0, TransformId::AddDiff, 1));
        let on = pick(StrategyId::ONeutral);
        assert_eq!((on.analogy_index, on.transform, on.option_index), (0, TransformId::AddDiff, 1));
        let p = pick(StrategyId::MPrudent);
        assert_eq!((p.analogy_index, p.transform, p.option_index), (1, TransformId::AddDiff, 0));
        let op = pick(StrategyId::OPrudent);
        assert_eq!((op.analogy_index, op.transform, op.option_index), (0, TransformId::Identity, 0));
    }

    #[test]
    fn ties_go_to_the_first_record() {
        let t = vec![
            rec(0, TransformId::Identity, 0, 1.0, 0.5),
            rec(0, TransformId::Identity, 1, 1.0, 0.5),
        ];
        for s in StrategyId::ALL {
            assert_eq!(select(s, &t).unwrap(), 0);
        }
        assert_eq!(select(StrategyId::MPrudent, &[]), Err(SolveError::NoCandidates));
    }

    #[test]
    fn unique_maximiser_wins_everywhere() {
        let glyph = BinaryImage::from_ascii(&["###", "#..", "#.."]).embed(9, 9, Offset::new(3, 3));
        let garbage = BinaryImage::from_ascii(&["#.#", ".#.", "#.#"]).embed(9, 9, Offset::new(1, 1));
        let p = Problem::new("x", 2, vec![glyph.clone(); 3], vec![garbage, glyph], Some(1)).unwrap();
        let config = |s| SolveConfig {
            strategy: s,
            analogy_groups: vec![AnalogyGroup::S],
            transform_groups: vec![TransformGroup::Affine],
        };
        for s in StrategyId::ALL {
            let sol = solve(&p, &config(s)).unwrap();
            assert_eq!(sol.chosen_option, 1, "{s}");
            assert_eq!(sol.winning_record.option_index, sol.chosen_option);
        }
    }

    #[test]
    fn names_parse() {
        for s in StrategyId::ALL {
            assert_eq!(s.name().parse::<StrategyId>().unwrap(), s);
        }
        assert_eq!("M-Prudent".parse::<StrategyId>().unwrap(), StrategyId::MPrudent);
        assert!("greedy".parse::<StrategyId>().is_err());
    }
}
