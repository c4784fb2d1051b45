use super::{BinaryImage, Offset};

/// One 8-connected blob, cropped to its bounding box.
#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub image: BinaryImage,
    /// Top-left corner of the bounding box in the parent image.
    pub position: Offset,
    /// Mean pixel coordinate in the parent image, `(row, col)`.
    pub centroid: (f64, f64),
}

impl Component {
    pub fn pixel_count(&self) -> usize {
        self.image.count()
    }
}

const NEIGHBOURS_8: [(i64, i64); 8] = [
    (-1, -1),
    (-1, 0),
    (-1, 1),
    (0, -1),
    (0, 1),
    (1, -1),
    (1, 0),
    (1, 1),
];
const NEIGHBOURS_4: [(i64, i64); 4] = [(-1, 0), (1, 0), (0, -1), (0, 1)];

/// Labels 8-connected components, ordered by the top-left corner of their
/// bounding boxes (row-major), then by their first pixel in raster order.
pub fn connected_components(a: &BinaryImage) -> Vec<Component> {
    let (w, h) = (a.width(), a.height());
    let mut seen = vec![false; w * h];
    let mut found: Vec<(Offset, (usize, usize), Component)> = Vec::new();
    let mut stack = Vec::new();

    for (r0, c0) in a.pixels() {
        if seen[r0 * w + c0] {
            continue;
        }
        seen[r0 * w + c0] = true;
        stack.push((r0, c0));
        let mut members = Vec::new();
        while let Some((r, c)) = stack.pop() {
            members.push((r, c));
            for (dr, dc) in NEIGHBOURS_8 {
                let (nr, nc) = (r as i64 + dr, c as i64 + dc);
                if nr < 0 || nc < 0 || nr >= h as i64 || nc >= w as i64 {
                    continue;
                }
                let (nr, nc) = (nr as usize, nc as usize);
                if a.get(nr, nc) && !seen[nr * w + nc] {
                    seen[nr * w + nc] = true;
                    stack.push((nr, nc));
                }
            }
        }
        let top = members.iter().map(|p| p.0).min().unwrap_or(0);
        let left = members.iter().map(|p| p.1).min().unwrap_or(0);
        let bottom = members.iter().map(|p| p.0).max().unwrap_or(0);
        let right = members.iter().map(|p| p.1).max().unwrap_or(0);
        let n = members.len() as f64;
        let centroid = (
            members.iter().map(|p| p.0 as f64).sum::<f64>() / n,
            members.iter().map(|p| p.1 as f64).sum::<f64>() / n,
        );
        let image = BinaryImage::from_pixels(
            right - left + 1,
            bottom - top + 1,
            members.iter().map(|&(r, c)| (r - top, c - left)),
        );
        let position = Offset::new(top as i32, left as i32);
        found.push((
            position,
            (r0, c0),
            Component {
                image,
                position,
                centroid,
            },
        ));
    }
    found.sort_by_key(|(pos, first, _)| (*pos, *first));
    found.into_iter().map(|(_, _, comp)| comp).collect()
}

/// Fills every white region that cannot reach the canvas border through
/// 4-connected white pixels.
pub fn shadow(a: &BinaryImage) -> BinaryImage {
    let (w, h) = (a.width(), a.height());
    let mut outside = vec![false; w * h];
    let mut stack = Vec::new();
    let mut seed = |r: usize, c: usize, stack: &mut Vec<(usize, usize)>| {
        if !a.get(r, c) && !outside[r * w + c] {
            outside[r * w + c] = true;
            stack.push((r, c));
        }
    };
    for r in 0..h {
        seed(r, 0, &mut stack);
        if w > 1 {
            seed(r, w - 1, &mut stack);
        }
    }
    for c in 0..w {
        seed(0, c, &mut stack);
        if h > 1 {
            seed(h - 1, c, &mut stack);
        }
    }
    while let Some((r, c)) = stack.pop() {
        for (dr, dc) in NEIGHBOURS_4 {
            let (nr, nc) = (r as i64 + dr, c as i64 + dc);
            if nr < 0 || nc < 0 || nr >= h as i64 || nc >= w as i64 {
                continue;
            }
            let (nr, nc) = (nr as usize, nc as usize);
            if !a.get(nr, nc) && !outside[nr * w + nc] {
                outside[nr * w + nc] = true;
                stack.push((nr, nc));
            }
        }
    }
    BinaryImage::from_pixels(
        w,
        h,
        (0..h)
            .flat_map(|r| (0..w).map(move |c| (r, c)))
            .filter(|&(r, c)| !outside[r * w + c]),
    )
}
