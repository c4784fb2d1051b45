use serde::{Deserialize, Serialize};

use super::{BinaryImage, EmptyImage, Offset};

/// The nine unary affine maps: identity, the seven non-trivial rectilinear
/// rotations/reflections, and an area-doubling scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AffineKind {
    Identity,
    /// Quarter turn clockwise.
    Rot90,
    Rot180,
    Rot270,
    /// Left-right reflection.
    MirrorH,
    /// Top-bottom reflection.
    MirrorV,
    /// Reflection about the main diagonal (transpose).
    MirrorDiag,
    MirrorAntidiag,
    ScaleDoubleArea,
}

impl AffineKind {
    pub const ALL: [AffineKind; 9] = [
        AffineKind::Identity,
        AffineKind::Rot90,
        AffineKind::Rot180,
        AffineKind::Rot270,
        AffineKind::MirrorH,
        AffineKind::MirrorV,
        AffineKind::MirrorDiag,
        AffineKind::MirrorAntidiag,
        AffineKind::ScaleDoubleArea,
    ];

    pub fn is_rectilinear(self) -> bool {
        self != AffineKind::ScaleDoubleArea
    }
}

pub fn affine(a: &BinaryImage, kind: AffineKind) -> BinaryImage {
    let (w, h) = (a.width(), a.height());
    let map = |f: &dyn Fn(usize, usize) -> (usize, usize), ow: usize, oh: usize| {
        BinaryImage::from_pixels(ow, oh, a.pixels().map(|(r, c)| f(r, c)))
    };
    match kind {
        AffineKind::Identity => a.clone(),
        AffineKind::Rot90 => map(&|r, c| (c, h - 1 - r), h, w),
        AffineKind::Rot180 => map(&|r, c| (h - 1 - r, w - 1 - c), w, h),
        AffineKind::Rot270 => map(&|r, c| (w - 1 - c, r), h, w),
        AffineKind::MirrorH => map(&|r, c| (r, w - 1 - c), w, h),
        AffineKind::MirrorV => map(&|r, c| (h - 1 - r, c), w, h),
        AffineKind::MirrorDiag => map(&|r, c| (c, r), h, w),
        AffineKind::MirrorAntidiag => map(&|r, c| (w - 1 - c, h - 1 - r), h, w),
        AffineKind::ScaleDoubleArea => scale_double_area(a),
    }
}

/// Nearest-neighbour resampling by √2 along each axis.
fn scale_double_area(a: &BinaryImage) -> BinaryImage {
    let s = std::f64::consts::SQRT_2;
    let ow = (a.width() as f64 * s).round() as usize;
    let oh = (a.height() as f64 * s).round() as usize;
    let src = |dst: usize, limit: usize| (((dst as f64 + 0.5) / s) as usize).min(limit - 1);
    let mut out = BinaryImage::new(ow, oh);
    if a.width() == 0 || a.height() == 0 {
        return out;
    }
    let cols: Vec<usize> = (0..ow).map(|c| src(c, a.width())).collect();
    for r in 0..oh {
        let sr = src(r, a.height());
        for (c, &sc) in cols.iter().enumerate() {
            if a.get(sr, sc) {
                out.set(r, c, true);
            }
        }
    }
    out
}

/// Crops to the tight bounding box; returns the crop and its position in `a`.
pub fn trim(a: &BinaryImage) -> Result<(BinaryImage, Offset), EmptyImage> {
    let rect = a.bounding_box().ok_or(EmptyImage)?;
    Ok((
        a.crop(rect),
        Offset::new(rect.top as i32, rect.left as i32),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn arb_image() -> impl Strategy<Value = BinaryImage> {
        (1usize..14, 1usize..14, proptest::collection::vec(any::<u8>(), 196)).prop_map(|(w, h, v)| {
            BinaryImage::from_pixels(w, h, (0..w * h).filter(|&i| v[i] % 3 == 0).map(|i| (i / w, i % w)))
        })
    }

    #[test]
    fn rot90_moves_corner_clockwise() {
        let a = BinaryImage::from_ascii(&["#..", "..."]);
        let r = affine(&a, AffineKind::Rot90);
        assert_eq!(r, BinaryImage::from_ascii(&[".#", "..", ".."]));
    }

    #[test]
    fn scale_of_ten_by_ten_blob() {
        let blob = BinaryImage::from_pixels(
            10,
            10,
            (0..10).flat_map(|r| (0..10).map(move |c| (r, c))).filter(|&(r, c)| (r as i32 - 5).pow(2) + (c as i32 - 4).pow(2) <= 12),
        );
        let scaled = affine(&blob, AffineKind::ScaleDoubleArea);
        assert_eq!((scaled.width(), scaled.height()), (14, 14));
        // Independent resampler: inverse-map every destination pixel centre.
        let mut expected = 0;
        for r in 0..14 {
            for c in 0..14 {
                let sr = ((r as f64 + 0.5) * 10.0 / 14.142135623730951).floor() as usize;
                let sc = ((c as f64 + 0.5) * 10.0 / 14.142135623730951).floor() as usize;
                if blob.get(sr.min(9), sc.min(9)) {
                    expected += 1;
                }
            }
        }
        assert_eq!(scaled.count(), expected);
        let ratio = scaled.count() as f64 / (2.0 * blob.count() as f64);
        assert!((0.85..=1.15).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn trim_examples() {
        let a = BinaryImage::from_pixels(5, 5, [(2, 3)]);
        let (t, off) = trim(&a).unwrap();
        assert_eq!((t.width(), t.height(), t.count()), (1, 1, 1));
        assert_eq!(off, Offset::new(2, 3));

        let full = BinaryImage::filled(4, 3);
        assert_eq!(trim(&full).unwrap(), (full.clone(), Offset::ZERO));

        assert_eq!(trim(&BinaryImage::new(3, 3)), Err(EmptyImage));
    }

    proptest! {
        #[test]
        fn rotation_group_laws(a in arb_image()) {
            let r = |img: &BinaryImage, k| affine(img, k);
            let four = r(&r(&r(&r(&a, AffineKind::Rot90), AffineKind::Rot90), AffineKind::Rot90), AffineKind::Rot90);
            prop_assert_eq!(&four, &a);
            prop_assert_eq!(r(&r(&a, AffineKind::Rot90), AffineKind::Rot90), r(&a, AffineKind::Rot180));
            prop_assert_eq!(r(&r(&a, AffineKind::Rot90), AffineKind::Rot270), a.clone());
            for k in [AffineKind::MirrorH, AffineKind::MirrorV, AffineKind::MirrorDiag, AffineKind::MirrorAntidiag] {
                prop_assert_eq!(r(&r(&a, k), k), a.clone());
            }
            for k in AffineKind::ALL.into_iter().filter(|k| k.is_rectilinear()) {
                prop_assert_eq!(r(&a, k).count(), a.count());
            }
        }

        #[test]
        fn trim_then_embed_round_trips(a in arb_image()) {
            prop_assume!(!a.is_empty());
            let (t, off) = trim(&a).unwrap();
            prop_assert_eq!(t.embed(a.width(), a.height(), off), a.clone());
            prop_assert_eq!(t.bounding_box().map(|r| (r.top, r.left)), Some((0, 0)));
        }
    }
}
