//! Sliding-window Jaccard similarity between binary images.
//!
//! Both indices are maximised over every integer placement of `a` inside
//! `b`'s frame. Since `|A ∪ B| = |A| + |B| - |A ∩ B|`, both indices are
//! monotone in the overlap count, so the scan only has to maximise overlap.
//! Ties go to the placement whose image centres are closest (squared
//! Euclidean distance), then to the lexicographically smallest offset.

use std::collections::HashMap;
use std::hash::{DefaultHasher, Hash, Hasher};
use std::sync::Mutex;

use crate::bitmap::{shift_row_into, BinaryImage, Offset, SetOp};

/// `J(A,B)` at its best placement; `offset` is A's origin in B's frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetricMatch {
    pub score: f64,
    pub offset: Offset,
}

/// `J_A(A,B) = |A ∩ B| / |A|` at its best placement.
#[derive(Debug, Clone, PartialEq)]
pub struct AsymmetricMatch {
    pub score: f64,
    /// A's origin in B's frame.
    pub offset_ab: Offset,
    /// The difference image's origin in A's frame.
    pub offset_da: Offset,
    /// `B - A` at the best placement, on B's canvas.
    pub diff: BinaryImage,
}

/// Best overlap found by the scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Overlap {
    pub count: usize,
    pub offset: Offset,
}

/// Squared distance between image centres, doubled to stay integral.
fn shift_cost(a: &BinaryImage, b: &BinaryImage, off: Offset) -> i64 {
    let dr = 2 * off.drow as i64 + a.height() as i64 - b.height() as i64;
    let dc = 2 * off.dcol as i64 + a.width() as i64 - b.width() as i64;
    dr * dr + dc * dc
}

/// Ranking key: larger overlap first, then least shifted, then offset order.
fn rank(count: usize, cost: i64, off: Offset) -> (std::cmp::Reverse<usize>, i64, i32, i32) {
    (std::cmp::Reverse(count), cost, off.drow, off.dcol)
}

fn popcounts_by_row(img: &BinaryImage) -> Vec<usize> {
    (0..img.height())
        .map(|r| img.row(r).iter().map(|w| w.count_ones() as usize).sum())
        .collect()
}

fn popcounts_by_col(img: &BinaryImage) -> Vec<usize> {
    let mut cols = vec![0; img.width()];
    for (_, c) in img.pixels() {
        cols[c] += 1;
    }
    cols
}

/// Sum of `min(x[i], y[i + shift])` over the overlapping range.
fn overlap_bound(x: &[usize], y: &[usize], shift: i64) -> usize {
    let lo = 0.max(-shift);
    let hi = (x.len() as i64).min(y.len() as i64 - shift);
    (lo..hi)
        .map(|i| x[i as usize].min(y[(i + shift) as usize]))
        .sum()
}

/// Maximum-overlap placement of `a` in `b`'s frame. `None` if either image
/// has no black pixels.
pub fn best_overlap(a: &BinaryImage, b: &BinaryImage) -> Option<Overlap> {
    let ra = a.bounding_box()?;
    let rb = b.bounding_box()?;
    let ta = a.crop(ra);
    let tb = b.crop(rb);
    let (ha, wa) = (ta.height() as i64, ta.width() as i64);
    let (hb, wb) = (tb.height() as i64, tb.width() as i64);
    let stride = tb.stride();

    let rows_a = popcounts_by_row(&ta);
    let rows_b = popcounts_by_row(&tb);
    let cols_a = popcounts_by_col(&ta);
    let cols_b = popcounts_by_col(&tb);

    // Trimmed-frame shift -> canvas offset of a in b.
    let to_canvas = |dr: i64, dc: i64| {
        Offset::new(
            (rb.top as i64 + dr - ra.top as i64) as i32,
            (rb.left as i64 + dc - ra.left as i64) as i32,
        )
    };

    let mut shifted = vec![0u64; ta.height() * stride];
    let mut best: Option<(Overlap, i64)> = None;

    let col_bounds: Vec<(i64, usize)> = (-(wa - 1)..=(wb - 1))
        .map(|dc| (dc, overlap_bound(&cols_a, &cols_b, dc)))
        .collect();
    let row_bounds: Vec<(i64, usize)> = (-(ha - 1)..=(hb - 1))
        .map(|dr| (dr, overlap_bound(&rows_a, &rows_b, dr)))
        .collect();

    // Visit columns with the largest bound first so pruning bites early.
    let mut col_order = col_bounds.clone();
    col_order.sort_by_key(|&(dc, bound)| (std::cmp::Reverse(bound), dc));

    for (dc, cbound) in col_order {
        if let Some((cur, _)) = best {
            if cbound < cur.count {
                break;
            }
        }
        for i in 0..ta.height() {
            shift_row_into(
                ta.row(i),
                -dc,
                tb.width(),
                &mut shifted[i * stride..(i + 1) * stride],
            );
        }
        for &(dr, rbound) in &row_bounds {
            let limit = rbound.min(cbound);
            if let Some((cur, _)) = best {
                if limit < cur.count {
                    continue;
                }
            }
            let i0 = 0.max(-dr);
            let i1 = ha.min(hb - dr);
            let mut count = 0usize;
            for i in i0..i1 {
                let sa = &shifted[i as usize * stride..(i as usize + 1) * stride];
                let rowb = tb.row((i + dr) as usize);
                count += sa
                    .iter()
                    .zip(rowb)
                    .map(|(x, y)| (x & y).count_ones() as usize)
                    .sum::<usize>();
            }
            if count == 0 {
                continue;
            }
            let offset = to_canvas(dr, dc);
            let cost = shift_cost(a, b, offset);
            let better = match best {
                None => true,
                Some((cur, cur_cost)) => {
                    rank(count, cost, offset) < rank(cur.count, cur_cost, cur.offset)
                }
            };
            if better {
                best = Some((Overlap { count, offset }, cost));
            }
        }
    }
    best.map(|(o, _)| o)
}

/// Source of best-overlap placements. Scoring a problem asks for the same
/// pairs many times, so callers can swap in [`MemoAligner`].
pub trait Aligner: Sync {
    fn overlap(&self, a: &BinaryImage, b: &BinaryImage) -> Option<Overlap>;

    fn jaccard(&self, a: &BinaryImage, b: &BinaryImage) -> SymmetricMatch {
        let (na, nb) = (a.count(), b.count());
        if na == 0 && nb == 0 {
            return SymmetricMatch {
                score: 1.0,
                offset: Offset::ZERO,
            };
        }
        match self.overlap(a, b) {
            None => SymmetricMatch {
                score: 0.0,
                offset: Offset::ZERO,
            },
            Some(o) => SymmetricMatch {
                score: o.count as f64 / (na + nb - o.count) as f64,
                offset: o.offset,
            },
        }
    }

    fn asym(&self, a: &BinaryImage, b: &BinaryImage) -> AsymmetricMatch {
        let na = a.count();
        if na == 0 {
            return AsymmetricMatch {
                score: 1.0,
                offset_ab: Offset::ZERO,
                offset_da: Offset::ZERO,
                diff: b.clone(),
            };
        }
        match self.overlap(a, b) {
            None => AsymmetricMatch {
                score: 0.0,
                offset_ab: Offset::ZERO,
                offset_da: Offset::ZERO,
                diff: BinaryImage::new(b.width(), b.height()),
            },
            Some(o) => {
                let placed = a.embed(b.width(), b.height(), o.offset);
                AsymmetricMatch {
                    score: o.count as f64 / na as f64,
                    offset_ab: o.offset,
                    offset_da: -o.offset,
                    diff: b.combine_same(&placed, SetOp::Subtraction),
                }
            }
        }
    }

    /// `J_A(a, b)` alone.
    fn asym_score(&self, a: &BinaryImage, b: &BinaryImage) -> f64 {
        let na = a.count();
        if na == 0 {
            return 1.0;
        }
        self.overlap(a, b).map_or(0.0, |o| o.count as f64 / na as f64)
    }
}

/// Runs the scan every time.
#[derive(Debug, Clone, Copy, Default)]
pub struct Exhaustive;

impl Aligner for Exhaustive {
    fn overlap(&self, a: &BinaryImage, b: &BinaryImage) -> Option<Overlap> {
        best_overlap(a, b)
    }
}

type Fingerprint = (usize, usize, u64, u64);

fn fingerprint(img: &BinaryImage) -> Fingerprint {
    let mut h1 = DefaultHasher::new();
    img.hash(&mut h1);
    let mut h2 = DefaultHasher::new();
    0x9e37_79b9_u32.hash(&mut h2);
    img.hash(&mut h2);
    (img.width(), img.height(), h1.finish(), h2.finish())
}

/// Caches placements keyed by a 128-bit content hash of both images.
#[derive(Debug, Default)]
pub struct MemoAligner {
    cache: Mutex<HashMap<(Fingerprint, Fingerprint), Option<Overlap>>>,
}

impl MemoAligner {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.cache.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl Aligner for MemoAligner {
    fn overlap(&self, a: &BinaryImage, b: &BinaryImage) -> Option<Overlap> {
        let key = (fingerprint(a), fingerprint(b));
        if let Some(hit) = self.cache.lock().unwrap().get(&key) {
            return *hit;
        }
        let found = best_overlap(a, b);
        self.cache.lock().unwrap().insert(key, found);
        found
    }
}

pub fn jaccard_sliding(a: &BinaryImage, b: &BinaryImage) -> SymmetricMatch {
    Exhaustive.jaccard(a, b)
}

pub fn asym_jaccard_sliding(a: &BinaryImage, b: &BinaryImage) -> AsymmetricMatch {
    Exhaustive.asym(a, b)
}
