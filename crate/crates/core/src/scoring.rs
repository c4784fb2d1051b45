//! MAT, O and MATO scores.
//!
//! MAT measures how well an (analogy, transformation) pair explains the known
//! cells; O how well it explains the relation that involves a candidate
//! answer; MATO is their weighted mean. Transformations fitted with the
//! asymmetric index average several aspects so they do not dominate the
//! symmetric ones.

use std::sync::Arc;

use thiserror::Error;

use crate::analogies::{Analogy, AnalogyGroup, AnyAnalogy, CellRef, Shape};
use crate::bitmap::BinaryImage;
use crate::corpus::Problem;
use crate::similarity::Aligner;
use crate::transforms::{
    self, apply_diff, apply_stamps, apply_unary_affine, induce_add_diff, induce_duplicate,
    induce_sub_diff, induce_xor_diff, preserved_share, Failure, Params, TransformId,
    TransformInstance, SUBSET_THRESHOLD,
};

pub const PAIR_WEIGHTS: (f64, f64) = (1.0, 1.0);
pub const TRIO_WEIGHTS: (f64, f64) = (1.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("{transform} cannot be applied to a {shape:?} analogy")]
pub struct ArityMismatch {
    pub shape: Shape,
    pub transform: TransformId,
}

pub type Prediction = Result<Arc<BinaryImage>, Failure>;

/// One (analogy, transformation, option) evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreRecord {
    pub analogy: String,
    /// Position of the analogy in the enumeration that produced it.
    pub analogy_index: usize,
    pub analogy_group: AnalogyGroup,
    pub transform: TransformId,
    pub option_index: usize,
    pub mat: f64,
    pub o: f64,
    pub mato: f64,
    pub prediction: Prediction,
}

pub fn mato_score(mat: f64, o: f64, weights: (f64, f64)) -> f64 {
    let (wm, wo) = weights;
    (wm * mat + wo * o) / (wm + wo)
}

/// Per-subproblem scores; the last entry belongs to the subproblem that
/// predicts the blank.
#[derive(Debug, Clone, PartialEq)]
pub struct SubproblemScores {
    pub mat: Vec<f64>,
    pub o: Vec<f64>,
}

/// `(MAT, MATO)` of a recursive analogy.
pub fn aggregate_recursive(scores: &SubproblemScores) -> (f64, f64) {
    let n = scores.mat.len();
    assert!(n >= 2 && scores.o.len() == n, "need n >= 2 paired subscores");
    // Averaged as deviations from the first score, so equal subscores come
    // back bit-exact.
    let base = scores.mat[0];
    let head: f64 = (0..n - 1).map(|k| (scores.mat[k] - base) + (scores.o[k] - base)).sum();
    let mat = base + (head + (scores.mat[n - 1] - base)) / (2 * n - 1) as f64;
    let mato = base + (head + (scores.mat[n - 1] - base) + (scores.o[n - 1] - base)) / (2 * n) as f64;
    (mat, mato)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptionScore {
    pub o: f64,
    pub prediction: Prediction,
    /// Parameters induced from this candidate, if any.
    pub params: Params,
}

/// A simple analogy scored against a list of candidate images.
#[derive(Debug, Clone, PartialEq)]
pub struct SimpleScores {
    pub mat: f64,
    pub instance: TransformInstance,
    pub candidates: Vec<OptionScore>,
}

/// Images of the analogy's known cells: source, then target without the
/// cell to predict.
fn images<'p>(problem: &'p Problem, analogy: &Analogy) -> (Vec<&'p BinaryImage>, Vec<&'p BinaryImage>) {
    let get = |c: &CellRef| problem.image(*c).expect("analogy refers to a known cell");
    let source = analogy.source.iter().map(get).collect();
    let target = analogy.target[..analogy.target.len() - 1].iter().map(get).collect();
    (source, target)
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Matrix-side fit: MAT, the instance, and for unary transformations the
/// option-independent prediction.
struct Fit {
    mat: f64,
    instance: TransformInstance,
    prediction: Option<Prediction>,
}

fn failed_fit(id: TransformId, why: Failure) -> Fit {
    Fit {
        mat: 0.0,
        instance: TransformInstance::new(id),
        prediction: Some(Err(why)),
    }
}

fn fit_unary(al: &dyn Aligner, t: TransformId, a: &BinaryImage, b: &BinaryImage, c: &BinaryImage) -> Fit {
    let with = |mat: f64, params: Params, pred: Prediction| Fit {
        mat,
        instance: TransformInstance {
            id: t,
            matrix: params,
            option: Params::None,
        },
        prediction: Some(pred),
    };
    if let Some(ta) = apply_unary_affine(t, a) {
        let pred = apply_unary_affine(t, c).expect("affine");
        return with(al.jaccard(&ta, b).score, Params::None, Ok(Arc::new(pred)));
    }
    match t {
        TransformId::AddDiff | TransformId::SubDiff | TransformId::XorDiff => {
            let (mat, params) = match t {
                TransformId::AddDiff => (al.asym_score(a, b), induce_add_diff(al, a, b)),
                TransformId::SubDiff => (al.asym_score(b, a), induce_sub_diff(al, a, b)),
                _ => (al.jaccard(a, b).score, induce_xor_diff(al, a, b)),
            };
            let pred = apply_diff(t, c, &params).expect("difference parameters");
            with(mat, params, Ok(Arc::new(pred)))
        }
        TransformId::Duplicate => match induce_duplicate(al, a, b) {
            Ok(params) => {
                let pred = apply_stamps(c, &params).expect("stamp parameters");
                // The copies found must also rebuild B; a lone embedding
                // does not make a duplication.
                let rebuilt = apply_stamps(a, &params).expect("stamp parameters");
                let mat = (al.asym_score(a, b) + al.jaccard(&rebuilt, b).score) / 2.0;
                with(mat, params, Ok(Arc::new(pred)))
            }
            Err(why) => failed_fit(t, why),
        },
        TransformId::Rearrange => {
            let r = transforms::rearrange_detailed(al, c, a, b);
            match r.outcome.prediction {
                Ok(pred) => with(mean(&r.match_scores).max(0.0), r.outcome.instance.matrix, Ok(Arc::new(pred))),
                Err(why) => failed_fit(t, why),
            }
        }
        _ => unreachable!("{t} is not unary"),
    }
}

fn option_unary(al: &dyn Aligner, fit: &Fit, c: &BinaryImage, option: &BinaryImage) -> OptionScore {
    let pred = fit.prediction.clone().expect("unary fit carries a prediction");
    let p = match &pred {
        Ok(p) => p,
        Err(_) => {
            return OptionScore {
                o: 0.0,
                prediction: pred,
                params: Params::None,
            }
        }
    };
    let fidelity = al.jaccard(p, option).score;
    let o = match (fit.instance.id, &fit.instance.matrix) {
        (TransformId::AddDiff, Params::Diff { diff, .. }) => {
            let m = al.asym(c, option);
            (m.score + al.jaccard(diff, &m.diff).score + fidelity) / 3.0
        }
        (TransformId::SubDiff, Params::Diff { diff, .. }) => {
            let m = al.asym(option, c);
            (m.score + al.jaccard(diff, &m.diff).score + fidelity) / 3.0
        }
        (TransformId::Duplicate, _) => (al.asym_score(c, option) + fidelity) / 2.0,
        _ => fidelity,
    };
    OptionScore {
        o,
        prediction: pred,
        params: Params::None,
    }
}

/// Prediction of a binary transformation and the alignment scores that
/// feed its assembly.
fn binary_outcome(
    al: &dyn Aligner,
    t: TransformId,
    x: &BinaryImage,
    y: &BinaryImage,
    param: &BinaryImage,
) -> (BinaryImage, Params, Option<[f64; 2]>) {
    let out = match t {
        TransformId::Unite => transforms::unite(al, x, y, param),
        TransformId::Intersect => transforms::intersect(al, x, y, param),
        TransformId::InverseUnite => transforms::inverse_unite(al, x, y, param),
        TransformId::Xor => transforms::xor_binary(al, x, y),
        TransformId::ShadowMaskUnite => transforms::shadow_mask_unite(al, x, y),
        _ => unreachable!("{t} is not binary"),
    };
    let scores = match &out.instance.option {
        Params::Alignment { scores, .. } => Some(*scores),
        _ => None,
    };
    let pred = out.prediction.expect("binary transformations never fail");
    (pred, out.instance.option, scores)
}

/// Alignment evidence plus fidelity to the parameter image.
fn binary_assembly(al: &dyn Aligner, pred: &BinaryImage, param: &BinaryImage, scores: Option<[f64; 2]>) -> f64 {
    let fidelity = al.jaccard(pred, param).score;
    match scores {
        Some([s1, s2]) => (s1 + s2 + fidelity) / 3.0,
        None => fidelity,
    }
}

/// Scores one simple analogy under `t` against each candidate image.
pub fn score_simple(
    al: &dyn Aligner,
    problem: &Problem,
    analogy: &Analogy,
    t: TransformId,
    candidates: &[&BinaryImage],
) -> Result<SimpleScores, ArityMismatch> {
    if !analogy.shape.accepts(t.arity()) {
        return Err(ArityMismatch {
            shape: analogy.shape,
            transform: t,
        });
    }
    let (src, tgt) = images(problem, analogy);
    if analogy.shape == Shape::Pair {
        let fit = fit_unary(al, t, src[0], src[1], tgt[0]);
        let candidates = candidates
            .iter()
            .map(|o| option_unary(al, &fit, tgt[0], o))
            .collect();
        return Ok(SimpleScores {
            mat: fit.mat,
            instance: fit.instance,
            candidates,
        });
    }

    let (a, b, c) = (src[0], src[1], src[2]);
    let (d, e) = (tgt[0], tgt[1]);
    if t == TransformId::PreservingSubDiff {
        return Ok(score_psd(al, [a, b, c], d, e, candidates));
    }
    let (pred, params, scores) = binary_outcome(al, t, a, b, c);
    let mat = binary_assembly(al, &pred, c, scores);
    let candidates = candidates
        .iter()
        .map(|o| {
            let (pred, params, scores) = binary_outcome(al, t, d, e, o);
            OptionScore {
                o: binary_assembly(al, &pred, o, scores),
                prediction: Ok(Arc::new(pred)),
                params,
            }
        })
        .collect();
    Ok(SimpleScores {
        mat,
        instance: TransformInstance {
            id: t,
            matrix: params,
            option: Params::None,
        },
        candidates,
    })
}

fn score_psd(
    al: &dyn Aligner,
    row: [&BinaryImage; 3],
    d: &BinaryImage,
    e: &BinaryImage,
    candidates: &[&BinaryImage],
) -> SimpleScores {
    let id = TransformId::PreservingSubDiff;
    let [a, b, c] = row;
    let zero = |why| OptionScore {
        o: 0.0,
        prediction: Err(why),
        params: Params::None,
    };
    if preserved_share(al, a, b, c) < SUBSET_THRESHOLD {
        return SimpleScores {
            mat: 0.0,
            instance: TransformInstance::new(id),
            candidates: candidates.iter().map(|_| zero(Failure::PreservationViolated)).collect(),
        };
    }
    let params = induce_sub_diff(al, b, c);
    let pred = Arc::new(apply_diff(id, e, &params).expect("difference parameters"));
    let Params::Diff { diff, .. } = &params else { unreachable!() };
    let candidates = candidates
        .iter()
        .map(|&o| {
            if preserved_share(al, d, e, o) < SUBSET_THRESHOLD {
                return zero(Failure::PreservationViolated);
            }
            let m = al.asym(o, e);
            let o_score = (m.score + al.jaccard(diff, &m.diff).score + al.jaccard(&pred, o).score) / 3.0;
            OptionScore {
                o: o_score,
                prediction: Ok(pred.clone()),
                params: Params::None,
            }
        })
        .collect();
    SimpleScores {
        mat: al.asym_score(c, b),
        instance: TransformInstance {
            id,
            matrix: params,
            option: Params::None,
        },
        candidates,
    }
}

/// MAT of a simple analogy and the matrix-induced parameters.
pub fn mat_score(
    al: &dyn Aligner,
    problem: &Problem,
    analogy: &Analogy,
    t: TransformId,
) -> Result<(f64, TransformInstance), ArityMismatch> {
    score_simple(al, problem, analogy, t, &[]).map(|s| (s.mat, s.instance))
}

/// O of one candidate under an instance fitted on the same analogy.
pub fn o_score(
    al: &dyn Aligner,
    problem: &Problem,
    analogy: &Analogy,
    instance: &TransformInstance,
    option: &BinaryImage,
) -> f64 {
    score_simple(al, problem, analogy, instance.id, &[option])
        .map(|s| s.candidates[0].o)
        .unwrap_or(0.0)
}

fn weights(shape: Shape) -> (f64, f64) {
    match shape {
        Shape::Pair => PAIR_WEIGHTS,
        Shape::Trio => TRIO_WEIGHTS,
    }
}

/// All option records of one (analogy, transformation) pair, in option order.
pub fn score_analogy(
    al: &dyn Aligner,
    problem: &Problem,
    analogy: &AnyAnalogy,
    analogy_index: usize,
    t: TransformId,
) -> Result<Vec<ScoreRecord>, ArityMismatch> {
    let options: Vec<&BinaryImage> = problem.options.iter().collect();
    let record = |i: usize, mat: f64, o: f64, mato: f64, prediction: Prediction| {
        let (mat, o, mato) = if prediction.is_err() { (0.0, 0.0, 0.0) } else { (mat, o, mato) };
        ScoreRecord {
            analogy: analogy.label().to_string(),
            analogy_index,
            analogy_group: analogy.group(),
            transform: t,
            option_index: i,
            mat,
            o,
            mato,
            prediction,
        }
    };
    match analogy {
        AnyAnalogy::Simple(a) => {
            let s = score_simple(al, problem, a, t, &options)?;
            let w = weights(a.shape);
            Ok(s.candidates
                .into_iter()
                .enumerate()
                .map(|(i, c)| record(i, s.mat, c.o, mato_score(s.mat, c.o, w), c.prediction))
                .collect())
        }
        AnyAnalogy::Recursive(r) => {
            let n = r.n();
            let mut mats = Vec::with_capacity(n);
            let mut os = Vec::with_capacity(n);
            for sub in &r.subproblems[..n - 1] {
                let forced = problem.image(sub.answer()).expect("forced option is a known cell");
                let s = score_simple(al, problem, sub, t, &[forced])?;
                let c = &s.candidates[0];
                let ok = c.prediction.is_ok();
                mats.push(if ok { s.mat } else { 0.0 });
                os.push(if ok { c.o } else { 0.0 });
            }
            let last = score_simple(al, problem, &r.subproblems[n - 1], t, &options)?;
            Ok(last
                .candidates
                .into_iter()
                .enumerate()
                .map(|(i, c)| {
                    let mut m = mats.clone();
                    let mut o = os.clone();
                    m.push(last.mat);
                    o.push(c.o);
                    let (mat, mato) = aggregate_recursive(&SubproblemScores { mat: m, o });
                    record(i, mat, c.o, mato, c.prediction)
                })
                .collect())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analogies::{enumerate_analogies, AnalogyGroup};
    use crate::bitmap::{affine, AffineKind, Offset, SetOp};
    use crate::similarity::{asym_jaccard_sliding, jaccard_sliding, Exhaustive};
    use proptest::prelude::*;

    const AL: &Exhaustive = &Exhaustive;

    fn glyph(rows: &[&str]) -> BinaryImage {
        BinaryImage::from_ascii(rows).embed(12, 12, Offset::new(3, 3))
    }

    fn pair_problem(a: BinaryImage, b: BinaryImage, c: BinaryImage, options: Vec<BinaryImage>) -> Problem {
        Problem::new("t", 2, vec![a, b, c], options, None).unwrap()
    }

    fn row_analogy(dim: usize) -> Analogy {
        match &enumerate_analogies(dim, &[AnalogyGroup::S])[0] {
            AnyAnalogy::Simple(a) => a.clone(),
            _ => unreachable!(),
        }
    }

    #[test]
    fn exact_mirror_scores_one() {
        let a = glyph(&["###", "#..", "#.."]);
        let b = affine(&a, AffineKind::MirrorH);
        let c = glyph(&["##.", ".#.", ".##"]);
        let want = affine(&c, AffineKind::MirrorH);
        let p = pair_problem(a, b, c, vec![want.clone(), glyph(&["#"])]);
        let an = row_analogy(2);
        let (mat, inst) = mat_score(AL, &p, &an, TransformId::MirrorH).unwrap();
        assert_eq!(mat, 1.0);
        assert_eq!(o_score(AL, &p, &an, &inst, &want), 1.0);
        assert!(o_score(AL, &p, &an, &inst, &p.options[1]) < 1.0);
    }

    #[test]
    fn add_diff_subset_and_full_option_score() {
        let a = glyph(&["###", "#.#", "###"]);
        let b = glyph(&["###.#", "#.#..", "###.."]);
        let c = glyph(&["#.#", ".#.", "#.#"]);
        let o = glyph(&["#.#.#", ".#...", "#.#.."]);
        let p = pair_problem(a.clone(), b.clone(), c.clone(), vec![o.clone(), c.clone()]);
        let an = row_analogy(2);
        let s = score_simple(AL, &p, &an, TransformId::AddDiff, &[&o, &c]).unwrap();
        assert_eq!(s.mat, 1.0);
        assert_eq!(s.candidates[0].o, 1.0);
        // Term by term for the second option.
        let d = crate::bitmap::set_op(&b, &a, Offset::ZERO, SetOp::Subtraction);
        let m = asym_jaccard_sliding(&c, &c);
        let pred = crate::bitmap::set_op(&c, &d, Offset::ZERO, SetOp::Union);
        let expected = (m.score + jaccard_sliding(&d, &m.diff).score + jaccard_sliding(&pred, &c).score) / 3.0;
        assert!((s.candidates[1].o - expected).abs() < 1e-12);
        assert_eq!(jaccard_sliding(&d, &m.diff).score, 0.0);
    }

    #[test]
    fn failure_zeroes_the_record() {
        let a = glyph(&["##", "##"]);
        let b = glyph(&["#"]);
        let p = pair_problem(a, b.clone(), b.clone(), vec![b.clone(), b]);
        let list = enumerate_analogies(2, &[AnalogyGroup::S]);
        let recs = score_analogy(AL, &p, &list[0], 0, TransformId::Duplicate).unwrap();
        for r in recs {
            assert_eq!((r.mat, r.o, r.mato), (0.0, 0.0, 0.0));
            assert_eq!(r.prediction, Err(Failure::NoCopyFound));
        }
    }

    #[test]
    fn arity_mismatch_is_reported() {
        let img = glyph(&["#"]);
        let p = pair_problem(img.clone(), img.clone(), img.clone(), vec![img.clone(), img]);
        let err = mat_score(AL, &p, &row_analogy(2), TransformId::Unite).unwrap_err();
        assert_eq!(err.transform, TransformId::Unite);
    }

    #[test]
    fn mato_examples() {
        assert!((mato_score(0.8, 0.6, PAIR_WEIGHTS) - 0.7).abs() < 1e-15);
        assert_eq!(mato_score(0.25, 0.25, (3.0, 1.0)), 0.25);
        assert!((mato_score(0.9, 0.5, (3.0, 1.0)) - 0.8).abs() < 1e-15);
    }

    #[test]
    fn recursive_examples() {
        let (mat, _) = aggregate_recursive(&SubproblemScores { mat: vec![0.9, 1.0], o: vec![0.8, 0.0] });
        assert!((mat - 0.9).abs() < 1e-15);
        let s = 0.37;
        let (m, o) = aggregate_recursive(&SubproblemScores { mat: vec![s; 3], o: vec![s; 3] });
        assert_eq!((m, o), (s, s));
    }

    #[test]
    fn unite_row_scores_one_on_its_own_option() {
        let l = glyph(&["#..", "#..", "#.."]);
        let r = glyph(&["..#", "..#", "..#"]);
        let both = glyph(&["#.#", "#.#", "#.#"]);
        let t = glyph(&["###", "...", "..."]);
        let u = glyph(&["...", "...", "###"]);
        let tu = glyph(&["###", "...", "###"]);
        let cells = vec![l.clone(), r.clone(), both.clone(), t.clone(), u.clone(), tu.clone(), l, r];
        let p = Problem::new("u", 3, cells, vec![both.clone(), tu.clone()], Some(0)).unwrap();
        let list = enumerate_analogies(3, &[AnalogyGroup::S]);
        let (idx, trio) = list
            .iter()
            .enumerate()
            .find(|(_, a)| a.label() == "D:E:F::G:H:?")
            .unwrap();
        let recs = score_analogy(AL, &p, trio, idx, TransformId::Unite).unwrap();
        assert_eq!(recs[0].mat, 1.0);
        assert_eq!(recs[0].mato, 1.0);
        assert!(recs[1].mato < 1.0);
    }

    proptest! {
        #[test]
        fn recursive_matches_closed_forms(v in proptest::collection::vec(0.0f64..=1.0, 6), n in 2usize..=3) {
            let s = SubproblemScores { mat: v[..n].to_vec(), o: v[3..3 + n].to_vec() };
            let (mat, mato) = aggregate_recursive(&s);
            let mut num = 0.0;
            for k in 0..n - 1 { num += s.mat[k] + s.o[k]; }
            prop_assert!((mat - (num + s.mat[n - 1]) / (2 * n - 1) as f64).abs() < 1e-12);
            prop_assert!((mato - (num + s.mat[n - 1] + s.o[n - 1]) / (2 * n) as f64).abs() < 1e-12);
        }

        #[test]
        fn mato_lies_between(mat in 0.0f64..=1.0, o in 0.0f64..=1.0, w in (0.1f64..5.0, 0.1f64..5.0)) {
            let m = mato_score(mat, o, w);
            prop_assert!(m >= mat.min(o) - 1e-12 && m <= mat.max(o) + 1e-12);
        }
    }
}
