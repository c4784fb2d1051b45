//! The transformation catalog: nine affine maps, five unary set
//! transformations (`C|A,B`), five binary ones (`A,B|P`) and the hybrid
//! preserving subtraction.
//!
//! Unary set transformations induce their parameters from `A` and `B` and
//! apply them to `C`. Binary ones take an optional parameter image `P` that
//! fixes the alignment of the two inputs; in the solver `P` is the third
//! matrix cell on the matrix side and the candidate option on the option side.

mod assignment;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bitmap::{affine, connected_components, shadow, AffineKind, BinaryImage, Offset, Placed, SetOp};
use crate::similarity::Aligner;

pub use assignment::{
    assignment_total, brute_force_assignment, hungarian_assignment, max_weight_assignment,
    BRUTE_FORCE_LIMIT,
};

/// Minimum `J_A` for each copy found by `duplicate`.
pub const COPY_THRESHOLD: f64 = 0.6;
/// `duplicate` stops once the unmatched part of `B` drops below this share.
pub const RESIDUAL_FRACTION: f64 = 0.05;
pub const MAX_COPIES: usize = 16;
/// `J_A` needed for the subset tests of `preserving_sub_diff`.
pub const SUBSET_THRESHOLD: f64 = 0.85;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransformId {
    Identity,
    Rot90,
    Rot180,
    Rot270,
    MirrorH,
    MirrorV,
    MirrorDiag,
    MirrorAntidiag,
    ScaleDoubleArea,
    AddDiff,
    SubDiff,
    XorDiff,
    Duplicate,
    Rearrange,
    Unite,
    Intersect,
    InverseUnite,
    Xor,
    ShadowMaskUnite,
    PreservingSubDiff,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Arity {
    Unary,
    Binary,
    Hybrid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransformGroup {
    Affine,
    Diff,
    Match,
    Set,
}

impl TransformGroup {
    pub const ALL: [TransformGroup; 4] = [
        TransformGroup::Affine,
        TransformGroup::Diff,
        TransformGroup::Match,
        TransformGroup::Set,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TransformGroup::Affine => "affine",
            TransformGroup::Diff => "diff",
            TransformGroup::Match => "match",
            TransformGroup::Set => "set",
        }
    }
}

impl fmt::Display for TransformGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown name `{0}`")]
pub struct UnknownName(pub String);

impl FromStr for TransformGroup {
    type Err = UnknownName;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TransformGroup::ALL
            .into_iter()
            .find(|g| g.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| UnknownName(s.to_string()))
    }
}

impl TransformId {
    /// Registry order. Strategy tie-breaks follow it.
    pub const ALL: [TransformId; 20] = [
        TransformId::Identity,
        TransformId::Rot90,
        TransformId::Rot180,
        TransformId::Rot270,
        TransformId::MirrorH,
        TransformId::MirrorV,
        TransformId::MirrorDiag,
        TransformId::MirrorAntidiag,
        TransformId::ScaleDoubleArea,
        TransformId::AddDiff,
        TransformId::SubDiff,
        TransformId::XorDiff,
        TransformId::Duplicate,
        TransformId::Rearrange,
        TransformId::Unite,
        TransformId::Intersect,
        TransformId::InverseUnite,
        TransformId::Xor,
        TransformId::ShadowMaskUnite,
        TransformId::PreservingSubDiff,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TransformId::Identity => "identity",
            TransformId::Rot90 => "rot90",
            TransformId::Rot180 => "rot180",
            TransformId::Rot270 => "rot270",
            TransformId::MirrorH => "mirror_h",
            TransformId::MirrorV => "mirror_v",
            TransformId::MirrorDiag => "mirror_diag",
            TransformId::MirrorAntidiag => "mirror_antidiag",
            TransformId::ScaleDoubleArea => "scale_double_area",
            TransformId::AddDiff => "add_diff",
            TransformId::SubDiff => "sub_diff",
            TransformId::XorDiff => "xor_diff",
            TransformId::Duplicate => "duplicate",
            TransformId::Rearrange => "rearrange",
            TransformId::Unite => "unite",
            TransformId::Intersect => "intersect",
            TransformId::InverseUnite => "inverse_unite",
            TransformId::Xor => "xor",
            TransformId::ShadowMaskUnite => "shadow_mask_unite",
            TransformId::PreservingSubDiff => "preserving_sub_diff",
        }
    }

    pub fn arity(self) -> Arity {
        use TransformId::*;
        match self {
            Unite | Intersect | InverseUnite | Xor | ShadowMaskUnite => Arity::Binary,
            PreservingSubDiff => Arity::Hybrid,
            _ => Arity::Unary,
        }
    }

    pub fn group(self) -> TransformGroup {
        use TransformId::*;
        match self {
            AddDiff | SubDiff | XorDiff | PreservingSubDiff => TransformGroup::Diff,
            Duplicate | Rearrange => TransformGroup::Match,
            Unite | Intersect | InverseUnite | Xor | ShadowMaskUnite => TransformGroup::Set,
            _ => TransformGroup::Affine,
        }
    }

    pub fn affine_kind(self) -> Option<AffineKind> {
        AffineKind::ALL.get(self as usize).copied()
    }

    /// Transforms of the given groups, in registry order.
    pub fn in_groups(groups: &[TransformGroup]) -> Vec<TransformId> {
        TransformId::ALL
            .into_iter()
            .filter(|t| groups.contains(&t.group()))
            .collect()
    }
}

impl fmt::Display for TransformId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TransformId {
    type Err = UnknownName;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TransformId::ALL
            .into_iter()
            .find(|t| t.name() == s.trim())
            .ok_or_else(|| UnknownName(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Error, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Failure {
    #[error("no copy of the source image found")]
    NoCopyFound,
    #[error("component counts differ")]
    ComponentCountMismatch,
    #[error("preserved part is not a subset")]
    PreservationViolated,
}

/// Parameters a transformation induces from the images it is fitted to.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum Params {
    #[default]
    None,
    /// A difference image, trimmed, and its origin in the input's frame.
    Diff { diff: BinaryImage, origin: Offset },
    /// Stamp positions on a canvas of the given size.
    Stamps {
        width: usize,
        height: usize,
        positions: Vec<Offset>,
    },
    /// `f` matches components of A to B; `g` matches components of C to A.
    Assignment { f: Vec<usize>, g: Vec<usize> },
    /// Placements of the two inputs and the `J_A` scores that produced them.
    Alignment {
        first: Offset,
        second: Offset,
        scores: [f64; 2],
    },
}

/// `p1` comes from the matrix, `p2` from an answer option.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformInstance {
    pub id: TransformId,
    pub matrix: Params,
    pub option: Params,
}

impl TransformInstance {
    pub fn new(id: TransformId) -> Self {
        TransformInstance {
            id,
            matrix: Params::None,
            option: Params::None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransformOutcome {
    pub prediction: Result<BinaryImage, Failure>,
    pub instance: TransformInstance,
}

impl TransformOutcome {
    fn ok(id: TransformId, prediction: BinaryImage, matrix: Params, option: Params) -> Self {
        TransformOutcome {
            prediction: Ok(prediction),
            instance: TransformInstance { id, matrix, option },
        }
    }

    fn failed(id: TransformId, why: Failure) -> Self {
        TransformOutcome {
            prediction: Err(why),
            instance: TransformInstance::new(id),
        }
    }
}

pub fn apply_unary_affine(id: TransformId, a: &BinaryImage) -> Option<BinaryImage> {
    id.affine_kind().map(|kind| affine(a, kind))
}

/// Trims `img`, shifting `origin` along with it.
fn trimmed(img: BinaryImage, origin: Offset) -> (BinaryImage, Offset) {
    match img.bounding_box() {
        None => (BinaryImage::new(0, 0), origin),
        Some(r) => (
            img.crop(r),
            origin + Offset::new(r.top as i32, r.left as i32),
        ),
    }
}

fn place_onto(c: &BinaryImage, diff: &BinaryImage, origin: Offset, op: SetOp) -> BinaryImage {
    if diff.is_empty() {
        return match op {
            SetOp::Union | SetOp::Subtraction | SetOp::Xor => c.clone(),
            SetOp::Intersection => BinaryImage::new(c.width(), c.height()),
        };
    }
    if op == SetOp::Subtraction {
        let d = diff.embed(c.width(), c.height(), origin);
        return c.combine_same(&d, op);
    }
    Placed::origin_of(c.clone())
        .combine(&Placed::at(diff.clone(), origin), op)
        .image
}

/// `D = B - A` at the best embedding of A in B.
pub fn induce_add_diff(al: &dyn Aligner, a: &BinaryImage, b: &BinaryImage) -> Params {
    let m = al.asym(a, b);
    let (diff, origin) = trimmed(m.diff, m.offset_da);
    Params::Diff { diff, origin }
}

/// `D = A - B` at the best embedding of B in A. With A replaced by C the
/// embedding of B lands at `pos_BA` and D at `pos_BA + pos_DB`, which is C's
/// own origin.
pub fn induce_sub_diff(al: &dyn Aligner, a: &BinaryImage, b: &BinaryImage) -> Params {
    let m = al.asym(b, a);
    let (diff, origin) = trimmed(m.diff, m.offset_ab + m.offset_da);
    Params::Diff { diff, origin }
}

/// `D = A ⊕ B` with B brought into A's frame by symmetric matching.
pub fn induce_xor_diff(al: &dyn Aligner, a: &BinaryImage, b: &BinaryImage) -> Params {
    let m = al.jaccard(a, b);
    let d = Placed::origin_of(a.clone()).combine(&Placed::at(b.clone(), -m.offset), SetOp::Xor);
    let (diff, origin) = trimmed(d.image, d.origin);
    Params::Diff { diff, origin }
}

/// Applies a difference image to C with the set operation of `id`.
pub fn apply_diff(id: TransformId, c: &BinaryImage, params: &Params) -> Option<BinaryImage> {
    let Params::Diff { diff, origin } = params else {
        return None;
    };
    let op = match id {
        TransformId::AddDiff => SetOp::Union,
        TransformId::SubDiff | TransformId::PreservingSubDiff => SetOp::Subtraction,
        TransformId::XorDiff => SetOp::Xor,
        _ => return None,
    };
    Some(place_onto(c, diff, *origin, op))
}

fn diff_outcome(id: TransformId, c: &BinaryImage, params: Params) -> TransformOutcome {
    let pred = apply_diff(id, c, &params).expect("difference parameters");
    TransformOutcome::ok(id, pred, params, Params::None)
}

pub fn add_diff(al: &dyn Aligner, c: &BinaryImage, a: &BinaryImage, b: &BinaryImage) -> TransformOutcome {
    diff_outcome(TransformId::AddDiff, c, induce_add_diff(al, a, b))
}

pub fn sub_diff(al: &dyn Aligner, c: &BinaryImage, a: &BinaryImage, b: &BinaryImage) -> TransformOutcome {
    diff_outcome(TransformId::SubDiff, c, induce_sub_diff(al, a, b))
}

pub fn xor_diff(al: &dyn Aligner, c: &BinaryImage, a: &BinaryImage, b: &BinaryImage) -> TransformOutcome {
    diff_outcome(TransformId::XorDiff, c, induce_xor_diff(al, a, b))
}

/// Positions of successive copies of A inside B.
pub fn induce_duplicate(al: &dyn Aligner, a: &BinaryImage, b: &BinaryImage) -> Result<Params, Failure> {
    let total = b.count();
    if a.is_empty() || total == 0 {
        return Err(Failure::NoCopyFound);
    }
    let mut residual = b.clone();
    let mut positions = Vec::new();
    while positions.len() < MAX_COPIES {
        let Some(o) = al.overlap(a, &residual) else { break };
        if (o.count as f64 / a.count() as f64) < COPY_THRESHOLD {
            break;
        }
        positions.push(o.offset);
        let placed = a.embed(b.width(), b.height(), o.offset);
        residual = residual.combine_same(&placed, SetOp::Subtraction);
        if (residual.count() as f64) < RESIDUAL_FRACTION * total as f64 {
            break;
        }
    }
    if positions.is_empty() {
        return Err(Failure::NoCopyFound);
    }
    Ok(Params::Stamps {
        width: b.width(),
        height: b.height(),
        positions,
    })
}

pub fn apply_stamps(c: &BinaryImage, params: &Params) -> Option<BinaryImage> {
    let Params::Stamps {
        width,
        height,
        positions,
    } = params
    else {
        return None;
    };
    let mut out = BinaryImage::new(*width, *height);
    for &p in positions {
        out = out.combine_same(&c.embed(*width, *height, p), SetOp::Union);
    }
    Some(out)
}

pub fn duplicate(al: &dyn Aligner, c: &BinaryImage, a: &BinaryImage, b: &BinaryImage) -> TransformOutcome {
    match induce_duplicate(al, a, b) {
        Ok(params) => {
            let pred = apply_stamps(c, &params).expect("stamp parameters");
            TransformOutcome::ok(TransformId::Duplicate, pred, params, Params::None)
        }
        Err(why) => TransformOutcome::failed(TransformId::Duplicate, why),
    }
}

/// Component-level result of `rearrange`, with the matching scores kept for
/// the MAT assembly.
#[derive(Debug, Clone, PartialEq)]
pub struct Rearrangement {
    pub outcome: TransformOutcome,
    /// `J(A_i, B_f(i))` for each component of A.
    pub match_scores: Vec<f64>,
}

pub fn rearrange_detailed(
    al: &dyn Aligner,
    c: &BinaryImage,
    a: &BinaryImage,
    b: &BinaryImage,
) -> Rearrangement {
    let id = TransformId::Rearrange;
    let (ca, cb, cc) = (
        connected_components(a),
        connected_components(b),
        connected_components(c),
    );
    let n = ca.len();
    if cb.len() != n || cc.len() != n {
        return Rearrangement {
            outcome: TransformOutcome::failed(id, Failure::ComponentCountMismatch),
            match_scores: Vec::new(),
        };
    }
    let sims: Vec<Vec<_>> = ca
        .iter()
        .map(|ai| cb.iter().map(|bj| al.jaccard(&ai.image, &bj.image)).collect())
        .collect();
    let weights: Vec<Vec<f64>> = sims
        .iter()
        .map(|row| row.iter().map(|m| m.score).collect())
        .collect();
    let f = max_weight_assignment(&weights);
    let closeness: Vec<Vec<f64>> = cc
        .iter()
        .map(|ci| {
            ca.iter()
                .map(|ak| {
                    let dr = ci.centroid.0 - ak.centroid.0;
                    let dc = ci.centroid.1 - ak.centroid.1;
                    -(dr * dr + dc * dc).sqrt()
                })
                .collect()
        })
        .collect();
    let g = max_weight_assignment(&closeness);

    let mut out = BinaryImage::new(b.width(), b.height());
    for (i, ci) in cc.iter().enumerate() {
        let k = g[i];
        let j = f[k];
        // Move C_i the way A_k moves onto B_j.
        let at = ci.position + cb[j].position + sims[k][j].offset - ca[k].position;
        out = out.combine_same(&ci.image.embed(b.width(), b.height(), at), SetOp::Union);
    }
    let match_scores = (0..n).map(|k| weights[k][f[k]]).collect();
    Rearrangement {
        outcome: TransformOutcome::ok(id, out, Params::Assignment { f, g }, Params::None),
        match_scores,
    }
}

pub fn rearrange(al: &dyn Aligner, c: &BinaryImage, a: &BinaryImage, b: &BinaryImage) -> TransformOutcome {
    rearrange_detailed(al, c, a, b).outcome
}

fn unite_like(
    id: TransformId,
    a: &BinaryImage,
    b: &BinaryImage,
    first: Offset,
    second: Offset,
    scores: [f64; 2],
    op: SetOp,
) -> TransformOutcome {
    let pred = Placed::at(a.clone(), first)
        .combine(&Placed::at(b.clone(), second), op)
        .image;
    TransformOutcome::ok(
        id,
        pred,
        Params::None,
        Params::Alignment {
            first,
            second,
            scores,
        },
    )
}

/// `A ∪ B`, each embedded into the parameter image.
pub fn unite(al: &dyn Aligner, a: &BinaryImage, b: &BinaryImage, p: &BinaryImage) -> TransformOutcome {
    let (ma, mb) = (al.asym(a, p), al.asym(b, p));
    unite_like(
        TransformId::Unite,
        a,
        b,
        ma.offset_ab,
        mb.offset_ab,
        [ma.score, mb.score],
        SetOp::Union,
    )
}

/// `A ∩ B`, with the parameter image embedded into each.
pub fn intersect(al: &dyn Aligner, a: &BinaryImage, b: &BinaryImage, p: &BinaryImage) -> TransformOutcome {
    let (ma, mb) = (al.asym(p, a), al.asym(p, b));
    unite_like(
        TransformId::Intersect,
        a,
        b,
        -ma.offset_ab,
        -mb.offset_ab,
        [ma.score, mb.score],
        SetOp::Intersection,
    )
}

/// `A - (B - P)` in A's frame, with B and P embedded into A.
pub fn inverse_unite(al: &dyn Aligner, a: &BinaryImage, b: &BinaryImage, p: &BinaryImage) -> TransformOutcome {
    let (mb, mp) = (al.asym(b, a), al.asym(p, a));
    let b_minus_p = Placed::at(b.clone(), mb.offset_ab).combine(&Placed::at(p.clone(), mp.offset_ab), SetOp::Subtraction);
    let pred = Placed::origin_of(a.clone()).combine(&b_minus_p, SetOp::Subtraction);
    let pred = pred.image.crop(crate::bitmap::Rect {
        top: (-pred.origin.drow) as usize,
        left: (-pred.origin.dcol) as usize,
        height: a.height(),
        width: a.width(),
    });
    TransformOutcome::ok(
        TransformId::InverseUnite,
        pred,
        Params::None,
        Params::Alignment {
            first: mb.offset_ab,
            second: mp.offset_ab,
            scores: [mb.score, mp.score],
        },
    )
}

/// `A ⊕ B` at their best symmetric alignment.
pub fn xor_binary(al: &dyn Aligner, a: &BinaryImage, b: &BinaryImage) -> TransformOutcome {
    let m = al.jaccard(a, b);
    let pred = Placed::at(a.clone(), m.offset)
        .combine(&Placed::origin_of(b.clone()), SetOp::Xor)
        .image;
    TransformOutcome::ok(TransformId::Xor, pred, Params::None, Params::None)
}

/// `M ∩ (A ∪ B)` where M is the overlap of the two shadows.
pub fn shadow_mask_unite(al: &dyn Aligner, a: &BinaryImage, b: &BinaryImage) -> TransformOutcome {
    let (x, y) = (shadow(a), shadow(b));
    let pos = al.jaccard(&x, &y).offset;
    let mask = Placed::at(x, pos).combine(&Placed::origin_of(y), SetOp::Intersection);
    let both = Placed::at(a.clone(), pos).combine(&Placed::origin_of(b.clone()), SetOp::Union);
    let pred = mask.combine(&both, SetOp::Intersection).image;
    TransformOutcome::ok(TransformId::ShadowMaskUnite, pred, Params::None, Params::None)
}

/// `J_A(part, P ∩ Q)` with Q embedded into P.
pub fn preserved_share(al: &dyn Aligner, part: &BinaryImage, p: &BinaryImage, q: &BinaryImage) -> f64 {
    let m = al.asym(q, p);
    let common = p.combine_same(&q.embed(p.width(), p.height(), m.offset_ab), SetOp::Intersection);
    al.asym_score(part, &common)
}

/// On `A:B:C::D:E:?`, behaves as `sub_diff(E|B,C)` provided A survives in
/// `B ∩ C` and, when an option is supplied, D survives in `E ∩ O`.
pub fn preserving_sub_diff(
    al: &dyn Aligner,
    e: &BinaryImage,
    row: [&BinaryImage; 3],
    option_context: Option<(&BinaryImage, &BinaryImage)>,
) -> TransformOutcome {
    let id = TransformId::PreservingSubDiff;
    let [a, b, c] = row;
    if preserved_share(al, a, b, c) < SUBSET_THRESHOLD {
        return TransformOutcome::failed(id, Failure::PreservationViolated);
    }
    if let Some((d, o)) = option_context {
        if preserved_share(al, d, e, o) < SUBSET_THRESHOLD {
            return TransformOutcome::failed(id, Failure::PreservationViolated);
        }
    }
    let params = induce_sub_diff(al, b, c);
    let pred = apply_diff(id, e, &params).expect("difference parameters");
    TransformOutcome::ok(id, pred, params, Params::None)
}
