//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::collections::HashSet;
use std::path::Path;
use std::time::Instant;

use matrix_reasoner::analogies::{enumerate_analogies, AnalogyGroup, AnyAnalogy, Shape};
use matrix_reasoner::bitmap::{connected_components, shadow, BinaryImage, Offset};
use matrix_reasoner::corpus::{corpus_build, generate_corpus, load_corpus, GlyphSet};
use matrix_reasoner::harness::{
    ablate, choice_rows, choices_csv, cmd_ablate, evaluate, grid_csv, in_pool, trace_corpus, Grid, GridRow, Traced, THREADS_ENV,
};
use matrix_reasoner::scoring::{aggregate_recursive, mato_score, SubproblemScores, PAIR_WEIGHTS};
use matrix_reasoner::similarity::{asym_jaccard_sliding, jaccard_sliding, Exhaustive};
use matrix_reasoner::strategies::{SolveConfig, StrategyId};
use matrix_reasoner::transforms::{apply_unary_affine, rearrange_detailed, xor_binary, Params, TransformGroup, TransformId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CORPUS_SIZE: usize = 60;
const CORPUS_SEED: u64 = 7;
const MIN_ACCURACY: f64 = 0.90;
const MAX_SECONDS: f64 = 60.0;
const MIN_TRAP_ITEMS: usize = 10;
const MIN_REPETITION_RATE: f64 = 0.5;
const NEUTRAL_PRUDENT_GAP: f64 = 0.05;
const SIMILARITY_PAIRS: usize = 500;
const MAX_SIDE: usize = 12;
const TRANSFORM_SETS: usize = 100;
const MAX_COMPONENTS: usize = 6;
const SCORE_VECTORS: usize = 1000;
const SCORE_TOL: f64 = 1e-12;

struct Verdict {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn accuracy(traced: &[Traced], s: StrategyId) -> (usize, usize) {
    let r = evaluate(traced, &SolveConfig::full(s));
    (r.total.correct, r.total.total)
}

fn ratio((a, b): (usize, usize)) -> f64 {
    a as f64 / b.max(1) as f64
}

fn headline(traced: &[Traced], generate_s: f64, solve_s: f64) -> Verdict {
    let p = accuracy(traced, StrategyId::MPrudent);
    let n = accuracy(traced, StrategyId::MNeutral);
    let gap = (ratio(p) - ratio(n)).abs();
    let pass = traced.len() == CORPUS_SIZE
        && ratio(p) >= MIN_ACCURACY
        && ratio(n) >= MIN_ACCURACY
        && solve_s < MAX_SECONDS
        && gap <= NEUTRAL_PRUDENT_GAP;
    Verdict {
        name: "60-item corpus accuracy and runtime",
        pass,
        detail: format!(
            "m_prudent {}/{}, m_neutral {}/{} (need >= {MIN_ACCURACY}, gap {gap:.3} <= {NEUTRAL_PRUDENT_GAP}); solve {solve_s:.1}s (< {MAX_SECONDS}s), generation {generate_s:.1}s",
            p.0, p.1, n.0, n.1
        ),
    }
}

fn o_trap(traced: &[Traced]) -> Verdict {
    let trap: Vec<&Traced> = traced.iter().filter(|t| t.entry.repetition_option.is_some()).collect();
    let owned: Vec<Traced> = trap.iter().map(|&t| t.clone()).collect();
    let m = evaluate(&owned, &SolveConfig::full(StrategyId::MPrudent));
    let o = evaluate(&owned, &SolveConfig::full(StrategyId::OPrudent));
    let repeated = owned
        .iter()
        .zip(&o.items)
        .filter(|(t, it)| it.record.as_ref().map(|r| r.option_index) == t.entry.repetition_option)
        .count();
    let rate = repeated as f64 / owned.len().max(1) as f64;
    let pass = owned.len() >= MIN_TRAP_ITEMS && m.total.accuracy() > o.total.accuracy() && rate >= MIN_REPETITION_RATE;
    Verdict {
        name: "O-trap: m_prudent beats o_prudent, o_prudent repeats",
        pass,
        detail: format!(
            "{} trap items (need >= {MIN_TRAP_ITEMS}); m_prudent {}/{} vs o_prudent {}/{}; repetition chosen {repeated}/{} (need >= {MIN_REPETITION_RATE})",
            owned.len(),
            m.total.correct,
            m.total.total,
            o.total.correct,
            o.total.total,
            owned.len()
        ),
    }
}

/// O-confident computed literally: commit to the first maximum-MAT
/// (analogy, transformation), then take the first option with the highest O.
fn o_confident_literal(t: &Traced) -> Option<usize> {
    let trace = &t.trace;
    let mut top = None::<usize>;
    for (i, r) in trace.iter().enumerate() {
        if top.is_none_or(|j| r.mat > trace[j].mat) {
            top = Some(i);
        }
    }
    let w = &trace[top?];
    let block = trace.iter().filter(|r| r.analogy_index == w.analogy_index && r.transform == w.transform);
    let mut best: Option<(usize, f64)> = None;
    for r in block {
        if best.is_none_or(|(_, o)| r.o > o) {
            best = Some((r.option_index, r.o));
        }
    }
    best.map(|(k, _)| k)
}

fn confident_equivalence(traced: &[Traced]) -> Verdict {
    let m = evaluate(traced, &SolveConfig::full(StrategyId::MConfident));
    let o = evaluate(traced, &SolveConfig::full(StrategyId::OConfident));
    let same = traced
        .iter()
        .zip(m.items.iter().zip(&o.items))
        .filter(|(t, (a, b))| {
            let mk = a.record.as_ref().map(|r| r.option_index);
            mk == b.record.as_ref().map(|r| r.option_index) && mk == o_confident_literal(t)
        })
        .count();
    Verdict {
        name: "m_confident and o_confident agree",
        pass: same == traced.len(),
        detail: format!("{same}/{} items identical (need all)", traced.len()),
    }
}

fn random_image(rng: &mut ChaCha8Rng, max_side: usize) -> BinaryImage {
    let (w, h) = (rng.random_range(1..=max_side), rng.random_range(1..=max_side));
    let density: f64 = rng.random_range(0.0..=1.0);
    let mut img = BinaryImage::new(w, h);
    for r in 0..h {
        for c in 0..w {
            if rng.random_bool(density) {
                img.set(r, c, true);
            }
        }
    }
    img
}

/// Scores every placement of `a` in `b`'s frame pixel by pixel.
/// Returns `(overlap, offset)` of the best placement under the
/// least-shifted, then lexicographic, tie-break.
fn brute_overlap(a: &BinaryImage, b: &BinaryImage) -> Option<(usize, Offset)> {
    let mut best: Option<(usize, f64, Offset)> = None;
    for dr in -(a.height() as i32)..=b.height() as i32 {
        for dc in -(a.width() as i32)..=b.width() as i32 {
            let mut n = 0;
            for r in 0..a.height() {
                for c in 0..a.width() {
                    let (br, bc) = (r as i32 + dr, c as i32 + dc);
                    if a.get(r, c)
                        && (0..b.height() as i32).contains(&br)
                        && (0..b.width() as i32).contains(&bc)
                        && b.get(br as usize, bc as usize)
                    {
                        n += 1;
                    }
                }
            }
            if n == 0 {
                continue;
            }
            let y = dr as f64 + a.height() as f64 / 2.0 - b.height() as f64 / 2.0;
            let x = dc as f64 + a.width() as f64 / 2.0 - b.width() as f64 / 2.0;
            let d = y * y + x * x;
            let off = Offset::new(dr, dc);
            let wins = match best {
                None => true,
                Some((bn, bd, bo)) => n > bn || (n == bn && (d < bd || (d == bd && (dr, dc) < (bo.drow, bo.dcol)))),
            };
            if wins {
                best = Some((n, d, off));
            }
        }
    }
    best.map(|(n, _, o)| (n, o))
}

fn similarity_oracle() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut bad = Vec::new();
    for i in 0..SIMILARITY_PAIRS {
        let (a, b) = (random_image(&mut rng, MAX_SIDE), random_image(&mut rng, MAX_SIDE));
        let (na, nb) = (a.count(), b.count());
        let found = brute_overlap(&a, &b);
        let (js, jo) = match found {
            _ if na == 0 && nb == 0 => (1.0, Offset::ZERO),
            None => (0.0, Offset::ZERO),
            Some((n, o)) => (n as f64 / (na + nb - n) as f64, o),
        };
        let (as_, ao) = match found {
            _ if na == 0 => (1.0, Offset::ZERO),
            None => (0.0, Offset::ZERO),
            Some((n, o)) => (n as f64 / na as f64, o),
        };
        let sym = jaccard_sliding(&a, &b);
        let asym = asym_jaccard_sliding(&a, &b);
        let mut diff = b.clone();
        if na > 0 && found.is_some() {
            for (r, c) in a.pixels() {
                let (br, bc) = (r as i32 + ao.drow, c as i32 + ao.dcol);
                if (0..b.height() as i32).contains(&br) && (0..b.width() as i32).contains(&bc) {
                    diff.set(br as usize, bc as usize, false);
                }
            }
        } else if na > 0 {
            diff = BinaryImage::new(b.width(), b.height());
        }
        if sym.score != js || sym.offset != jo || asym.score != as_ || asym.offset_ab != ao || asym.diff != diff {
            bad.push(i);
        }
    }
    Verdict {
        name: "sliding Jaccard matches brute force",
        pass: bad.is_empty(),
        detail: format!(
            "{}/{SIMILARITY_PAIRS} pairs up to {MAX_SIDE}x{MAX_SIDE} bit-exact (score, offset){}",
            SIMILARITY_PAIRS - bad.len(),
            if bad.is_empty() { String::new() } else { format!("; first mismatch at pair {}", bad[0]) }
        ),
    }
}

/// `n` solid rectangles on a 3x3 lattice of 10-pixel slots, so each is
/// its own component.
fn blobs(rng: &mut ChaCha8Rng, n: usize) -> BinaryImage {
    let mut img = BinaryImage::new(30, 30);
    let mut slots: Vec<usize> = (0..9).collect();
    for _ in 0..n {
        let s = slots.swap_remove(rng.random_range(0..slots.len()));
        let (h, w) = (rng.random_range(2..=7), rng.random_range(2..=7));
        let (top, left) = ((s / 3) * 10 + rng.random_range(0..=8 - h), (s % 3) * 10 + rng.random_range(0..=8 - w));
        for r in top..top + h {
            for c in left..left + w {
                img.set(r, c, true);
            }
        }
    }
    img
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

fn transform_properties() -> Verdict {
    use TransformId::*;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut failures: Vec<String> = Vec::new();
    let apply = |t: TransformId, img: &BinaryImage, k: usize| (0..k).fold(img.clone(), |x, _| apply_unary_affine(t, &x).expect("affine"));
    for i in 0..TRANSFORM_SETS {
        let a = random_image(&mut rng, 20);
        if apply(Rot90, &a, 4) != a {
            failures.push(format!("rot90^4 #{i}"));
        }
        for m in [MirrorH, MirrorV, MirrorDiag, MirrorAntidiag] {
            if apply(m, &a, 2) != a {
                failures.push(format!("{}^2 #{i}", m.name()));
            }
        }
        if a.count() > 0 {
            let x = xor_binary(&Exhaustive, &a, &a).prediction.expect("xor predicts");
            if x.count() != 0 {
                failures.push(format!("xor(A,A) #{i}"));
            }
        }
        let s = shadow(&a);
        if shadow(&s) != s {
            failures.push(format!("shadow #{i}"));
        }

        let n = rng.random_range(1..=MAX_COMPONENTS);
        let (ca, cb) = (blobs(&mut rng, n), blobs(&mut rng, n));
        let r = rearrange_detailed(&Exhaustive, &ca, &ca, &cb);
        let Params::Assignment { f, .. } = &r.outcome.instance.matrix else {
            failures.push(format!("rearrange #{i}: no assignment"));
            continue;
        };
        let (pa, pb) = (connected_components(&ca), connected_components(&cb));
        let w: Vec<Vec<f64>> = pa.iter().map(|x| pb.iter().map(|y| jaccard_sliding(&x.image, &y.image).score).collect()).collect();
        let total = |p: &[usize]| (0..p.len()).map(|k| w[k][p[k]]).sum::<f64>();
        let best = permutations(n).iter().map(|p| total(p)).fold(f64::NEG_INFINITY, f64::max);
        let got = total(f);
        if got != best && (got - best).abs() > SCORE_TOL {
            failures.push(format!("rearrange #{i}: {got} < {best}"));
        }
    }
    Verdict {
        name: "transformation properties",
        pass: failures.is_empty(),
        detail: format!(
            "rot90^4, mirror^2, xor(A,A), shadow idempotence, rearrange assignment vs brute force (n <= {MAX_COMPONENTS}) on {TRANSFORM_SETS} sets; {} failures{}",
            failures.len(),
            failures.first().map(|f| format!(", first {f}")).unwrap_or_default()
        ),
    }
}

fn scoring_formulas(traced: &[Traced]) -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    let mut constant_bad = 0;
    for _ in 0..SCORE_VECTORS {
        let n = rng.random_range(2..=4);
        let mat: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..=1.0)).collect();
        let o: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..=1.0)).collect();
        let (m, mo) = aggregate_recursive(&SubproblemScores { mat: mat.clone(), o: o.clone() });
        let sum_head: f64 = (0..n - 1).map(|k| mat[k] + o[k]).sum();
        let want_m = (sum_head + mat[n - 1]) / (2 * n - 1) as f64;
        let want_mo = (0..n).map(|k| mat[k] + o[k]).sum::<f64>() / (2 * n) as f64;
        worst = worst.max((m - want_m).abs()).max((mo - want_mo).abs());

        let s: f64 = rng.random_range(0.0..=1.0);
        if aggregate_recursive(&SubproblemScores { mat: vec![s; n], o: vec![s; n] }) != (s, s) {
            constant_bad += 1;
        }
    }
    let mut pair_records = 0;
    let mut pair_bad = 0;
    for t in traced {
        let analogies = enumerate_analogies(t.problem.dim, &AnalogyGroup::ALL);
        for r in &t.trace {
            if let AnyAnalogy::Simple(a) = &analogies[r.analogy_index] {
                if a.shape == Shape::Pair && r.prediction.is_ok() {
                    pair_records += 1;
                    if r.mato != (r.mat + r.o) / 2.0 || mato_score(r.mat, r.o, PAIR_WEIGHTS) != r.mato {
                        pair_bad += 1;
                    }
                }
            }
        }
    }
    Verdict {
        name: "scoring closed forms",
        pass: worst <= SCORE_TOL && constant_bad == 0 && pair_bad == 0 && pair_records > 0,
        detail: format!(
            "{SCORE_VECTORS} vectors, max error {worst:.1e} (<= {SCORE_TOL:e}); constant s -> s exact {}/{SCORE_VECTORS}; MATO = (MAT+O)/2 exact on {}/{pair_records} pair records",
            SCORE_VECTORS - constant_bad,
            pair_records - pair_bad
        ),
    }
}

fn determinism(corpus: &Path, traced: &[Traced], work: &Path) -> Verdict {
    let strategies = StrategyId::ALL;
    let reference = (grid_csv(&ablate(traced, Grid::PerGroup, &strategies)), choices_csv(&choice_rows(traced, &strategies).expect("choices")));
    let mut runs = Vec::new();
    for threads in [1, 4] {
        let out = work.join(format!("ablate-{threads}"));
        let o = cmd_ablate(corpus, &strategies, Grid::PerGroup, &out, Some(threads)).expect("ablate");
        let grid = std::fs::read_to_string(&o.grid_csv).expect("grid csv");
        let choices = std::fs::read_to_string(&o.choices_csv).expect("choices csv");
        runs.push((grid, choices));
    }
    let regenerated = in_pool(Some(1), || generate_corpus(CORPUS_SIZE, CORPUS_SEED, &GlyphSet::default())).expect("pool").expect("generate");
    let first: Vec<_> = traced.iter().map(|t| &t.problem).collect();
    let corpus_same = regenerated.iter().map(|(_, p)| p).eq(first.iter().copied());
    let pass = runs.iter().all(|r| *r == reference) && corpus_same;
    Verdict {
        name: "ablate output is deterministic",
        pass,
        detail: format!(
            "per_group.csv and choices.csv byte-identical at 1 and 4 threads and in-process: {}; corpus regenerated on 1 thread identical: {corpus_same}",
            runs.iter().all(|r| *r == reference)
        ),
    }
}

fn correct_of(row: &GridRow, s: StrategyId) -> usize {
    row.results.iter().find(|(x, _)| *x == s).map(|(_, t)| t.correct).expect("strategy present")
}

fn ablation_shape(traced: &[Traced]) -> Verdict {
    let strategies = [StrategyId::MPrudent, StrategyId::MNeutral];
    let per = ablate(traced, Grid::PerGroup, &strategies);
    let own: Vec<&str> = per
        .iter()
        .filter(|r| {
            let t = r.stratum[0].1;
            t.total == 0 || t.correct != t.total
        })
        .map(|r| r.cell.label.as_str())
        .collect();
    let cum = ablate(traced, Grid::Cumulative, &strategies);
    let (na, nt) = (AnalogyGroup::ALL.len(), TransformGroup::ALL.len());
    let mut drops = Vec::new();
    for &s in &strategies {
        for i in 0..na {
            for j in 0..nt {
                let here = correct_of(&cum[i * nt + j], s);
                if i + 1 < na && correct_of(&cum[(i + 1) * nt + j], s) < here {
                    drops.push(format!("{s} {}", cum[(i + 1) * nt + j].cell.label));
                }
                if j + 1 < nt && correct_of(&cum[i * nt + j + 1], s) < here {
                    drops.push(format!("{s} {}", cum[i * nt + j + 1].cell.label));
                }
            }
        }
    }
    let full = correct_of(cum.last().expect("cells"), StrategyId::MPrudent);
    let max_single = per.iter().map(|r| correct_of(r, StrategyId::MPrudent)).max().unwrap_or(0);
    Verdict {
        name: "ablation grid shape",
        pass: own.is_empty() && drops.is_empty() && full >= max_single,
        detail: format!(
            "per_group own-stratum m_prudent accuracy 1.0 in {}/16 cells; cumulative decreases: {}; full {full} >= best single cell {max_single}",
            16 - own.len(),
            if drops.is_empty() { "none".to_string() } else { drops.join(", ") }
        ),
    }
}

fn main() {
    std::env::remove_var(THREADS_ENV);
    let work = tempfile::tempdir().expect("tempdir");
    let corpus = work.path().join("corpus");

    let t0 = Instant::now();
    corpus_build(CORPUS_SIZE, CORPUS_SEED, &GlyphSet::default(), &corpus).expect("corpus builds");
    let generate_s = t0.elapsed().as_secs_f64();
    let (index, problems) = load_corpus(&corpus).expect("corpus loads");
    let t1 = Instant::now();
    let traced = trace_corpus(&index, problems);
    let solve_s = t1.elapsed().as_secs_f64();
    let sets: HashSet<_> = traced.iter().map(|t| (t.entry.analogy_group, t.entry.transform_group)).collect();
    assert_eq!(sets.len(), 16, "corpus covers every group pair");

    let verdicts = [
        headline(&traced, generate_s, solve_s),
        o_trap(&traced),
        confident_equivalence(&traced),
        similarity_oracle(),
        transform_properties(),
        scoring_formulas(&traced),
        determinism(&corpus, &traced, work.path()),
        ablation_shape(&traced),
    ];
    for (i, v) in verdicts.iter().enumerate() {
        println!("{} [{}] {}: {}", if v.pass { "PASS" } else { "FAIL" }, i + 1, v.name, v.detail);
    }
    let failed = verdicts.iter().filter(|v| !v.pass).count();
    println!("acceptance: {}/{} criteria pass", verdicts.len() - failed, verdicts.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
