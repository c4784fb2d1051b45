//! Primitive shapes for synthetic problems.

use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bitmap::{affine, AffineKind, BinaryImage, Offset, SetOp};
use crate::similarity::{Aligner, Exhaustive};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Primitive {
    Square,
    Frame,
    Triangle,
    Disk,
    Ring,
    Cross,
}

impl Primitive {
    pub const ALL: [Primitive; 6] = [
        Primitive::Square,
        Primitive::Frame,
        Primitive::Triangle,
        Primitive::Disk,
        Primitive::Ring,
        Primitive::Cross,
    ];
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GlyphSet {
    pub primitives: Vec<Primitive>,
    pub min_size: usize,
    pub max_size: usize,
}

impl Default for GlyphSet {
    fn default() -> Self {
        GlyphSet {
            primitives: Primitive::ALL.to_vec(),
            min_size: 12,
            max_size: 40,
        }
    }
}

const STROKE: usize = 3;

/// A `w`x`h` image filled by the primitive.
pub fn draw(p: Primitive, w: usize, h: usize) -> BinaryImage {
    let (wf, hf) = (w as f64, h as f64);
    let inside_ellipse = |r: usize, c: usize, shrink: f64| {
        let (ry, rx) = (hf / 2.0 - shrink, wf / 2.0 - shrink);
        if ry <= 0.0 || rx <= 0.0 {
            return false;
        }
        let y = (r as f64 + 0.5 - hf / 2.0) / ry;
        let x = (c as f64 + 0.5 - wf / 2.0) / rx;
        x * x + y * y <= 1.0
    };
    let s = STROKE;
    let pixels = (0..h).flat_map(|r| (0..w).map(move |c| (r, c)));
    let keep = |&(r, c): &(usize, usize)| match p {
        Primitive::Square => true,
        Primitive::Frame => r < s || c < s || r + s >= h || c + s >= w,
        // Right angle at the bottom-left.
        Primitive::Triangle => c * h <= (r + 1) * w,
        Primitive::Disk => inside_ellipse(r, c, 0.0),
        Primitive::Ring => inside_ellipse(r, c, 0.0) && !inside_ellipse(r, c, s as f64),
        Primitive::Cross => {
            let (mr, mc) = (h / 2, w / 2);
            r + s / 2 >= mr && r < mr + s - s / 2 || c + s / 2 >= mc && c < mc + s - s / 2
        }
    };
    BinaryImage::from_pixels(w, h, pixels.filter(keep))
}

pub fn random_primitive(rng: &mut impl Rng, set: &GlyphSet, lo: usize, hi: usize) -> BinaryImage {
    let p = *set.primitives.choose(rng).expect("glyph set has primitives");
    let lo = lo.max(STROKE * 3);
    let hi = hi.max(lo);
    let w = rng.random_range(lo..=hi);
    let h = rng.random_range(lo..=hi);
    draw(p, w, h)
}

/// A glyph from the set at its configured size range.
pub fn random_glyph(rng: &mut impl Rng, set: &GlyphSet) -> BinaryImage {
    random_primitive(rng, set, set.min_size, set.max_size)
}

/// A glyph that every non-trivial rectilinear map changes: a primitive with a
/// notch stuck to one corner and a bar along one side.
pub fn asymmetric_glyph(rng: &mut impl Rng, set: &GlyphSet) -> BinaryImage {
    loop {
        let body = random_primitive(rng, set, set.min_size.max(16), set.max_size.saturating_sub(8).max(16));
        let (w, h) = (body.width() + 8, body.height() + 8);
        let mut g = body.embed(w, h, Offset::new(4, 4));
        let notch = BinaryImage::filled(6, 6);
        let corner = [(0, 0), (0, w - 6), (h - 6, 0), (h - 6, w - 6)][rng.random_range(0..4)];
        g = stamp(&g, &notch, corner.0 as i32, corner.1 as i32);
        let along_top = rng.random_bool(0.5);
        let bar = if along_top {
            BinaryImage::filled(w / 2, 3)
        } else {
            BinaryImage::filled(3, h / 2)
        };
        let (r, c) = if along_top { (0, (w - w / 2) as i32) } else { ((h - h / 2) as i32, 0) };
        g = stamp(&g, &bar, r, c);
        let symmetric = AffineKind::ALL
            .iter()
            .filter(|k| k.is_rectilinear() && **k != AffineKind::Identity)
            .any(|&k| Exhaustive.jaccard(&affine(&g, k), &g).score > 0.999);
        if !symmetric {
            return g;
        }
    }
}

/// `canvas ∪ glyph` with the glyph's top-left at `(row, col)`.
pub fn stamp(canvas: &BinaryImage, glyph: &BinaryImage, row: i32, col: i32) -> BinaryImage {
    let placed = glyph.embed(canvas.width(), canvas.height(), Offset::new(row, col));
    canvas.combine_same(&placed, SetOp::Union)
}

/// The glyph centred on an empty `size`x`size` canvas.
pub fn centered(glyph: &BinaryImage, size: usize) -> BinaryImage {
    stamp(&BinaryImage::new(size, size), glyph, at_centre(glyph.height(), size), at_centre(glyph.width(), size))
}

/// Top-left coordinate that centres an extent of `len` in `size`.
pub fn at_centre(len: usize, size: usize) -> i32 {
    (size as i32 - len as i32) / 2
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bitmap::connected_components;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn primitives_are_single_components() {
        for p in Primitive::ALL {
            for (w, h) in [(9, 9), (14, 20), (33, 25)] {
                let g = draw(p, w, h);
                assert!(!g.is_empty(), "{p:?}");
                assert_eq!(connected_components(&g).len(), 1, "{p:?} {w}x{h}");
            }
        }
    }

    #[test]
    fn asymmetric_glyphs_change_under_every_map() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let g = asymmetric_glyph(&mut rng, &GlyphSet::default());
            for k in AffineKind::ALL.into_iter().filter(|k| k.is_rectilinear() && *k != AffineKind::Identity) {
                assert!(Exhaustive.jaccard(&affine(&g, k), &g).score < 1.0);
            }
        }
    }

    #[test]
    fn centring() {
        let g = draw(Primitive::Square, 4, 2);
        let c = centered(&g, 10);
        assert_eq!(c.bounding_box().map(|r| (r.top, r.left)), Some((4, 3)));
    }
}
