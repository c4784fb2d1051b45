//! Synthetic problems generated from one known relation, then audited
//! against the solver.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::glyphs::{asymmetric_glyph, at_centre, centered, draw, random_glyph, random_primitive, stamp, GlyphSet, Primitive};
use super::Problem;
use crate::analogies::{windows, AnalogyGroup, CellRef};
use crate::bitmap::{affine, trim, AffineKind, BinaryImage, Offset, SetOp};
use crate::scoring::ScoreRecord;
use crate::similarity::{Aligner, MemoAligner};
use crate::strategies::{score_trace, select, StrategyId};
use crate::transforms::{self, Arity, TransformGroup, TransformId};

/// Side of every generated cell.
pub const CANVAS: usize = 96;
const MAX_ATTEMPTS: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistractorKind {
    /// A copy of the cell left of the blank.
    Repetition,
    PerturbedTruth,
    WrongTransform,
    RandomShape,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub seed: u64,
    pub dim: usize,
    pub transform: TransformId,
    pub analogy_group: AnalogyGroup,
    pub distractors: Vec<DistractorKind>,
    pub glyphs: GlyphSet,
}

impl GeneratorSpec {
    /// Five distractors for 2x2 items, seven for 3x3; one repetition each.
    pub fn standard_distractors(dim: usize) -> Vec<DistractorKind> {
        use DistractorKind::*;
        let mut d = vec![Repetition, PerturbedTruth, PerturbedTruth, WrongTransform, RandomShape];
        if dim == 3 {
            d.extend([WrongTransform, RandomShape]);
        }
        d
    }

    pub fn check(&self) -> Result<(), GenerateError> {
        let bad = |why: String| Err(GenerateError::InfeasibleSpec(why));
        let t = self.transform;
        if self.dim != 2 && self.dim != 3 {
            return bad(format!("dimension {}", self.dim));
        }
        if self.distractors.is_empty() {
            return bad("no distractors".into());
        }
        if matches!(t, TransformId::Identity | TransformId::XorDiff) {
            return bad(format!("{t} cannot generate an item with a unique answer"));
        }
        if self.dim == 2 && t.arity() != Arity::Unary {
            return bad(format!("{t} needs a 3x3 matrix"));
        }
        if self.dim == 2 && self.analogy_group == AnalogyGroup::R {
            return bad("2x2 matrices have no R analogies".into());
        }
        if self.glyphs.primitives.is_empty() || self.glyphs.min_size > self.glyphs.max_size || self.glyphs.max_size > 48 {
            return bad("glyph set".into());
        }
        if t == TransformId::Rearrange && distinct_primitives(&self.glyphs) < 2 {
            return bad("rearrange needs two distinct primitives".into());
        }
        Ok(())
    }
}

fn distinct_primitives(set: &GlyphSet) -> usize {
    let mut p = set.primitives.clone();
    p.sort_by_key(|x| *x as u8);
    p.dedup();
    p.len()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenerateError {
    #[error("infeasible generator spec: {0}")]
    InfeasibleSpec(String),
    #[error("no draft passed the audit in {0} attempts")]
    AuditFailed(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemMeta {
    pub transform: TransformId,
    pub analogy_group: AnalogyGroup,
    pub repetition_option: Option<usize>,
    /// O-prudent falls for the repetition distractor.
    pub o_trap: bool,
    pub attempts: usize,
}

#[derive(Debug, Clone)]
pub struct Generated {
    pub problem: Problem,
    pub meta: ItemMeta,
}

/// Parameters shared by every line of one item.
enum Shared {
    None,
    Affine(AffineKind),
    /// A canvas-sized mark, added or removed.
    Mark(BinaryImage),
    Copies(Vec<Offset>),
    Slots { centres: Vec<(i32, i32)>, perm: Vec<usize> },
}

struct Draft {
    /// `dim` lines of `dim` cells; the last cell of the last line is the answer.
    lines: Vec<Vec<BinaryImage>>,
}

impl Draft {
    fn truth(&self) -> &BinaryImage {
        self.lines.last().and_then(|l| l.last()).expect("non-empty draft")
    }
}

pub fn generate(id: &str, spec: &GeneratorSpec) -> Result<Generated, GenerateError> {
    spec.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    for attempt in 1..=MAX_ATTEMPTS {
        let al = MemoAligner::new();
        let Some(draft) = draft(&mut rng, spec, &al) else { continue };
        let Some((problem, repetition)) = assemble(&mut rng, id, spec, &draft, &al) else { continue };
        if let Some(o_trap) = audit(&al, &problem, spec, repetition) {
            return Ok(Generated {
                problem,
                meta: ItemMeta {
                    transform: spec.transform,
                    analogy_group: spec.analogy_group,
                    repetition_option: repetition,
                    o_trap,
                    attempts: attempt,
                },
            });
        }
    }
    Err(GenerateError::AuditFailed(MAX_ATTEMPTS))
}

fn shared(rng: &mut ChaCha8Rng, t: TransformId) -> Shared {
    match t {
        _ if t.affine_kind().is_some() => Shared::Affine(t.affine_kind().expect("affine")),
        TransformId::AddDiff | TransformId::SubDiff | TransformId::PreservingSubDiff => {
            let p = [Primitive::Square, Primitive::Disk, Primitive::Triangle, Primitive::Cross][rng.random_range(0..4)];
            let m = draw(p, rng.random_range(10..=16), rng.random_range(10..=16));
            let (r, c) = (rng.random_range(3..=6), rng.random_range(3..=6));
            let (r, c) = match rng.random_range(0..4) {
                0 => (r, c),
                1 => (r, CANVAS as i32 - c - m.width() as i32),
                2 => (CANVAS as i32 - r - m.height() as i32, c),
                _ => (CANVAS as i32 - r - m.height() as i32, CANVAS as i32 - c - m.width() as i32),
            };
            Shared::Mark(stamp(&BinaryImage::new(CANVAS, CANVAS), &m, r, c))
        }
        TransformId::Duplicate => {
            let (dr, dc) = [(0, 1), (1, 0), (1, 1)][rng.random_range(0..3)];
            let steps: &[i32] = if rng.random_bool(0.5) { &[-14, 14] } else { &[-28, 0, 28] };
            Shared::Copies(steps.iter().map(|s| Offset::new(s * dr, s * dc)).collect())
        }
        TransformId::Rearrange => {
            let mut quads = vec![(24, 24), (24, 72), (72, 24), (72, 72)];
            quads.shuffle(rng);
            let n = rng.random_range(2..=3);
            quads.truncate(n);
            let mut perm: Vec<usize> = (0..n).collect();
            while perm.iter().enumerate().all(|(i, &p)| i == p) {
                perm.shuffle(rng);
            }
            Shared::Slots { centres: quads, perm }
        }
        _ => Shared::None,
    }
}

/// A big outline centred on the canvas.
fn outline(rng: &mut ChaCha8Rng, lo: usize, hi: usize) -> BinaryImage {
    let p = [Primitive::Frame, Primitive::Ring][rng.random_range(0..2)];
    centered(&draw(p, rng.random_range(lo..=hi), rng.random_range(lo..=hi)), CANVAS)
}

/// A small filled glyph whose centre sits at `(row, col)`.
fn mark_at(rng: &mut ChaCha8Rng, lo: usize, hi: usize, row: i32, col: i32) -> BinaryImage {
    let p = [Primitive::Square, Primitive::Disk, Primitive::Triangle, Primitive::Cross][rng.random_range(0..4)];
    let g = draw(p, rng.random_range(lo..=hi), rng.random_range(lo..=hi));
    stamp(&BinaryImage::new(CANVAS, CANVAS), &g, row - g.height() as i32 / 2, col - g.width() as i32 / 2)
}

fn union(a: &BinaryImage, b: &BinaryImage) -> BinaryImage {
    a.combine_same(b, SetOp::Union)
}

/// The trimmed image re-centred on a fresh canvas.
fn recentred(img: &BinaryImage) -> Option<BinaryImage> {
    let (t, _) = trim(img).ok()?;
    (t.width() <= CANVAS && t.height() <= CANVAS).then(|| centered(&t, CANVAS))
}

/// Source and image of one unary line.
fn unary_pair(rng: &mut ChaCha8Rng, sh: &Shared, glyphs: &GlyphSet) -> Option<(BinaryImage, BinaryImage)> {
    match sh {
        Shared::Affine(k) => {
            let mut small = glyphs.clone();
            if *k == AffineKind::ScaleDoubleArea {
                small.max_size = small.max_size.min(36);
            }
            let g = asymmetric_glyph(rng, &small);
            Some((centered(&g, CANVAS), recentred(&affine(&g, *k))?))
        }
        Shared::Mark(m) => {
            let g = random_primitive(rng, glyphs, glyphs.min_size.max(16), glyphs.max_size.min(40));
            let x = centered(&g, CANVAS);
            Some((x.clone(), union(&x, m)))
        }
        Shared::Copies(offsets) => {
            let g = random_primitive(rng, glyphs, glyphs.min_size.min(12), glyphs.max_size.clamp(12, 24));
            let x = centered(&g, CANVAS);
            let (r0, c0) = (at_centre(g.height(), CANVAS), at_centre(g.width(), CANVAS));
            let y = offsets
                .iter()
                .fold(BinaryImage::new(CANVAS, CANVAS), |acc, o| stamp(&acc, &g, r0 + o.drow, c0 + o.dcol));
            Some((x, y))
        }
        Shared::Slots { centres, perm } => {
            let mut kinds = glyphs.primitives.clone();
            kinds.sort_by_key(|p| *p as u8);
            kinds.dedup();
            kinds.shuffle(rng);
            if kinds.len() < centres.len() {
                return None;
            }
            let shapes: Vec<BinaryImage> = kinds[..centres.len()]
                .iter()
                .map(|&p| draw(p, rng.random_range(12..=20), rng.random_range(12..=20)))
                .collect();
            let place = |slot_of: &dyn Fn(usize) -> usize| {
                shapes.iter().enumerate().fold(BinaryImage::new(CANVAS, CANVAS), |acc, (j, s)| {
                    let (r, c) = centres[slot_of(j)];
                    stamp(&acc, s, r - s.height() as i32 / 2, c - s.width() as i32 / 2)
                })
            };
            Some((place(&|j| j), place(&|j| perm[j])))
        }
        Shared::None => None,
    }
}

/// Three cells `[p, q, r]` of one binary line.
fn binary_line(rng: &mut ChaCha8Rng, t: TransformId, sh: &Shared, al: &dyn Aligner) -> Option<Vec<BinaryImage>> {
    let c = CANVAS as i32 / 2;
    let side = rng.random_range(12..=16);
    match t {
        TransformId::Unite => {
            let p = outline(rng, 44, 64);
            let q = mark_at(rng, 10, 20, c, c);
            let r = union(&p, &q);
            Some(vec![p, q, r])
        }
        TransformId::Intersect => {
            let common = outline(rng, 48, 64);
            let e1 = mark_at(rng, 8, 12, c, c - side);
            let e2 = mark_at(rng, 8, 12, c, c + side);
            Some(vec![union(&common, &e1), union(&common, &e2), common])
        }
        TransformId::InverseUnite => {
            let frame = outline(rng, 48, 64);
            // The removed mark cannot fit inside the kept one.
            let (m1, m2) = (mark_at(rng, 13, 16, c - side, c), mark_at(rng, 6, 9, c + side, c));
            let p = union(&union(&frame, &m1), &m2);
            Some(vec![p, recentred(&m1)?, union(&frame, &m2)])
        }
        TransformId::Xor | TransformId::ShadowMaskUnite => {
            let p = union(&outline(rng, 40, 60), &mark_at(rng, 8, 14, c, c));
            let q = union(&outline(rng, 40, 60), &mark_at(rng, 8, 14, c - side, c + side));
            let out = if t == TransformId::Xor {
                transforms::xor_binary(al, &p, &q)
            } else {
                transforms::shadow_mask_unite(al, &p, &q)
            };
            let r = recentred(&out.prediction.ok()?)?;
            Some(vec![p, q, r])
        }
        TransformId::PreservingSubDiff => {
            let Shared::Mark(m) = sh else { return None };
            let a = outline(rng, 40, 56);
            let (dr, dc) = (rng.random_range(-6..=6), rng.random_range(-6..=6));
            let s = mark_at(rng, 8, 16, c + dr, c + dc);
            let kept = union(&a, &s);
            Some(vec![a, union(&kept, m), kept])
        }
        _ => None,
    }
}

/// Whether the library transformation, induced on `first`, carries `line`
/// onto its last cell.
fn explains(al: &dyn Aligner, t: TransformId, first: &[BinaryImage], line: &[BinaryImage]) -> bool {
    let n = line.len();
    let out = match t.arity() {
        Arity::Unary => {
            let (a, b) = (&first[n - 2], &first[n - 1]);
            let c = &line[n - 2];
            match t {
                TransformId::AddDiff => transforms::add_diff(al, c, a, b),
                TransformId::SubDiff => transforms::sub_diff(al, c, a, b),
                TransformId::Duplicate => transforms::duplicate(al, c, a, b),
                TransformId::Rearrange => transforms::rearrange(al, c, a, b),
                _ => return true,
            }
        }
        Arity::Binary | Arity::Hybrid => {
            let (p, q, r) = (&line[0], &line[1], &line[2]);
            match t {
                TransformId::Unite => transforms::unite(al, p, q, r),
                TransformId::Intersect => transforms::intersect(al, p, q, r),
                TransformId::InverseUnite => transforms::inverse_unite(al, p, q, r),
                TransformId::Xor => transforms::xor_binary(al, p, q),
                TransformId::ShadowMaskUnite => transforms::shadow_mask_unite(al, p, q),
                TransformId::PreservingSubDiff => {
                    transforms::preserving_sub_diff(al, q, [&first[0], &first[1], &first[2]], Some((p, r)))
                }
                _ => return false,
            }
        }
    };
    match out.prediction {
        Ok(pred) => same_shape(al, &pred, &line[n - 1]),
        Err(_) => false,
    }
}

fn same_shape(al: &dyn Aligner, x: &BinaryImage, y: &BinaryImage) -> bool {
    x.count() == y.count() && al.jaccard(x, y).score >= 1.0
}

fn draft(rng: &mut ChaCha8Rng, spec: &GeneratorSpec, al: &dyn Aligner) -> Option<Draft> {
    let t = spec.transform;
    let dim = spec.dim;
    let sh = shared(rng, t);
    let mut lines = Vec::with_capacity(dim);
    for _ in 0..dim {
        let line = match t.arity() {
            Arity::Unary => {
                let mut line: Vec<BinaryImage> = (0..dim - 2).map(|_| centered(&random_glyph(rng, &spec.glyphs), CANVAS)).collect();
                let (x, y) = unary_pair(rng, &sh, &spec.glyphs)?;
                if t == TransformId::SubDiff {
                    line.extend([y, x]);
                } else {
                    line.extend([x, y]);
                }
                line
            }
            Arity::Binary | Arity::Hybrid => binary_line(rng, t, &sh, al)?,
        };
        if line.iter().any(|img| img.is_empty()) {
            return None;
        }
        lines.push(line);
    }
    let consistent = lines.iter().all(|l| explains(al, t, &lines[0], l));
    consistent.then_some(Draft { lines })
}

/// Where line `i`, position `j` lands in the matrix.
fn layout(spec: &GeneratorSpec, rng: &mut ChaCha8Rng) -> Vec<Vec<CellRef>> {
    let ws = windows(spec.dim, spec.analogy_group);
    let w = ws.choose(rng).expect("group has windows");
    // Orientations the group's own analogies can read the relation along.
    let by_columns = match (spec.dim, spec.transform.arity(), spec.analogy_group) {
        (3, Arity::Unary, AnalogyGroup::H) => true,
        (3, Arity::Unary, AnalogyGroup::V) => false,
        _ => rng.random_bool(0.5),
    };
    let d = spec.dim;
    (0..d)
        .map(|i| (0..d).map(|j| if by_columns { w.cells[j][i] } else { w.cells[i][j] }).collect())
        .collect()
}

fn distractor(
    rng: &mut ChaCha8Rng,
    kind: DistractorKind,
    spec: &GeneratorSpec,
    draft: &Draft,
    repetition: &BinaryImage,
) -> Option<BinaryImage> {
    let truth = draft.truth();
    let last = draft.lines.last().expect("lines");
    let d = spec.dim;
    let rectilinear = |rng: &mut ChaCha8Rng| AffineKind::ALL[rng.random_range(1..8)];
    match kind {
        DistractorKind::Repetition => Some(repetition.clone()),
        DistractorKind::RandomShape => Some(centered(&asymmetric_glyph(rng, &spec.glyphs), CANVAS)),
        DistractorKind::PerturbedTruth => {
            let bb = truth.bounding_box()?;
            if rng.random_bool(0.5) {
                let blob = draw(Primitive::Square, rng.random_range(6..=10), rng.random_range(6..=10));
                let r = rng.random_range(0..(CANVAS - blob.height()) as i32);
                let c = rng.random_range(0..(CANVAS - blob.width()) as i32);
                let placed = stamp(&BinaryImage::new(CANVAS, CANVAS), &blob, r, c);
                let near = stamp(&BinaryImage::new(CANVAS, CANVAS), &BinaryImage::filled(blob.width() + 4, blob.height() + 4), r - 2, c - 2);
                if !near.combine_same(truth, SetOp::Intersection).is_empty() {
                    return None;
                }
                Some(union(truth, &placed))
            } else {
                let (h, w) = ((bb.height / 2).max(4), (bb.width / 2).max(4));
                let r = bb.top as i32 + rng.random_range(0..=(bb.height.saturating_sub(h)) as i32);
                let c = bb.left as i32 + rng.random_range(0..=(bb.width.saturating_sub(w)) as i32);
                let hole = stamp(&BinaryImage::new(CANVAS, CANVAS), &BinaryImage::filled(w, h), r, c);
                let out = truth.combine_same(&hole, SetOp::Subtraction);
                (out.count() * 10 <= truth.count() * 9 && !out.is_empty()).then_some(out)
            }
        }
        DistractorKind::WrongTransform => match spec.transform.arity() {
            Arity::Binary | Arity::Hybrid => {
                let (p, q) = (&last[0], &last[1]);
                let out = match rng.random_range(0..6) {
                    0 => p.combine_same(q, SetOp::Union),
                    1 => p.combine_same(q, SetOp::Intersection),
                    2 => p.combine_same(q, SetOp::Subtraction),
                    3 => q.combine_same(p, SetOp::Subtraction),
                    4 => p.combine_same(q, SetOp::Xor),
                    _ => return recentred(&affine(&trim(truth).ok()?.0, rectilinear(rng))),
                };
                (!out.is_empty()).then_some(out)
            }
            Arity::Unary => {
                let k = rectilinear(rng);
                match spec.transform.affine_kind() {
                    Some(_) => {
                        let x = trim(&last[d - 2]).ok()?.0;
                        recentred(&affine(&x, k))
                    }
                    None => recentred(&affine(&trim(truth).ok()?.0, k)),
                }
            }
        },
    }
}

/// Places the draft in the matrix and adds shuffled distractors. Also
/// returns where the repetition distractor went.
fn assemble(
    rng: &mut ChaCha8Rng,
    id: &str,
    spec: &GeneratorSpec,
    draft: &Draft,
    al: &dyn Aligner,
) -> Option<(Problem, Option<usize>)> {
    let d = spec.dim;
    let place = layout(spec, rng);
    let mut grid: Vec<Option<BinaryImage>> = vec![None; d * d];
    for (i, line) in draft.lines.iter().enumerate() {
        for (j, img) in line.iter().enumerate() {
            if let CellRef::Entry { row, col } = place[i][j] {
                grid[row * d + col] = Some(img.clone());
            }
        }
    }
    let cells: Vec<BinaryImage> = grid.into_iter().take(d * d - 1).collect::<Option<_>>()?;
    let repetition = cells[d * d - 2].clone();

    let mut options = vec![draft.truth().clone()];
    let mut kinds = vec![None];
    for &kind in &spec.distractors {
        // A kind that keeps colliding with earlier options gives way to a
        // random shape.
        let tries = std::iter::repeat_n(kind, 20).chain(std::iter::repeat_n(DistractorKind::RandomShape, 20));
        let fresh = tries.into_iter().find_map(|kind| {
            let img = distractor(rng, kind, spec, draft, &repetition)?;
            let new = !options.iter().any(|o| same_shape(al, o, &img));
            new.then_some(img)
        })?;
        options.push(fresh);
        kinds.push(Some(kind));
    }
    let mut order: Vec<usize> = (0..options.len()).collect();
    order.shuffle(rng);
    let answer = order.iter().position(|&k| k == 0)?;
    let rep = order.iter().position(|&k| kinds[k] == Some(DistractorKind::Repetition));
    let options = order.iter().map(|&k| options[k].clone()).collect();
    let problem = Problem::new(id, d, cells, options, Some(answer)).ok()?;
    Some((problem, rep))
}

/// `Some(o_trap)` when M-prudent finds the answer as the unique MATO
/// maximiser and the item's own groups find it too.
fn audit(al: &dyn Aligner, problem: &Problem, spec: &GeneratorSpec, repetition: Option<usize>) -> Option<bool> {
    let answer = problem.answer?;
    let trace = score_trace(al, problem, &AnalogyGroup::ALL, &TransformGroup::ALL);
    let best = |keep: &dyn Fn(&ScoreRecord) -> bool| {
        trace.iter().filter(|r| keep(r)).map(|r| r.mato).fold(f64::NEG_INFINITY, f64::max)
    };
    let unique = best(&|r| r.option_index == answer) > best(&|r| r.option_index != answer);
    let chosen = trace[select(StrategyId::MPrudent, &trace).ok()?].option_index;
    if !unique || chosen != answer {
        return None;
    }
    let group = spec.transform.group();
    let own: Vec<ScoreRecord> = trace
        .iter()
        .filter(|r| r.analogy_group == spec.analogy_group && r.transform.group() == group)
        .cloned()
        .collect();
    if own[select(StrategyId::MPrudent, &own).ok()?].option_index != answer {
        return None;
    }
    let o_pick = trace[select(StrategyId::OPrudent, &trace).ok()?].option_index;
    Some(repetition == Some(o_pick))
}
