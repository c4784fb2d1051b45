//! Binary raster images stored as packed row bitsets.
//!
//! A [`BinaryImage`] is a fixed-size canvas whose black pixels form a set of
//! `(row, col)` coordinates. All operations are pure; images are immutable
//! once built. Everything positional is expressed with [`Offset`]s: the
//! placement of one image's origin inside another image's frame.

mod geometry;
mod raster;
mod regions;

use std::fmt;
use std::ops::{Add, Neg, Sub};

use thiserror::Error;

pub use geometry::{affine, trim, AffineKind};
pub use raster::{binarize, decode_image, encode_pgm, load_binary, save_pgm, RasterError};
pub use regions::{connected_components, shadow, Component};

const WORD: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("operation requires a non-empty image")]
pub struct EmptyImage;

/// Signed pixel displacement. Used as "origin of X inside Y's frame".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct Offset {
    pub drow: i32,
    pub dcol: i32,
}

impl Offset {
    pub const ZERO: Offset = Offset { drow: 0, dcol: 0 };

    pub const fn new(drow: i32, dcol: i32) -> Self {
        Offset { drow, dcol }
    }
}

impl Add for Offset {
    type Output = Offset;
    fn add(self, rhs: Offset) -> Offset {
        Offset::new(self.drow + rhs.drow, self.dcol + rhs.dcol)
    }
}

impl Sub for Offset {
    type Output = Offset;
    fn sub(self, rhs: Offset) -> Offset {
        Offset::new(self.drow - rhs.drow, self.dcol - rhs.dcol)
    }
}

impl Neg for Offset {
    type Output = Offset;
    fn neg(self) -> Offset {
        Offset::new(-self.drow, -self.dcol)
    }
}

impl fmt::Display for Offset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.drow, self.dcol)
    }
}

/// Inclusive-exclusive pixel rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rect {
    pub top: usize,
    pub left: usize,
    pub height: usize,
    pub width: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SetOp {
    Union,
    Intersection,
    Subtraction,
    Xor,
}

/// A black-and-white raster. Bit `c` of a row's word array is column `c`;
/// bits past `width` are always zero, so derived equality is value equality.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BinaryImage {
    width: usize,
    height: usize,
    stride: usize,
    bits: Vec<u64>,
}

impl BinaryImage {
    /// An all-white canvas.
    pub fn new(width: usize, height: usize) -> Self {
        let stride = width.div_ceil(WORD);
        BinaryImage {
            width,
            height,
            stride,
            bits: vec![0; stride * height],
        }
    }

    /// Builds an image from black-pixel coordinates. Out-of-canvas
    /// coordinates are ignored.
    pub fn from_pixels<I>(width: usize, height: usize, pixels: I) -> Self
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut img = BinaryImage::new(width, height);
        for (r, c) in pixels {
            if r < height && c < width {
                img.set(r, c, true);
            }
        }
        img
    }

    /// Parses rows of `#` (black) and `.` (white). Handy in tests.
    pub fn from_ascii(rows: &[&str]) -> Self {
        let height = rows.len();
        let width = rows.iter().map(|r| r.chars().count()).max().unwrap_or(0);
        let pixels = rows.iter().enumerate().flat_map(|(r, line)| {
            line.chars()
                .enumerate()
                .filter(|(_, ch)| *ch == '#')
                .map(move |(c, _)| (r, c))
        });
        BinaryImage::from_pixels(width, height, pixels)
    }

    /// Canvas filled with black.
    pub fn filled(width: usize, height: usize) -> Self {
        let mut img = BinaryImage::new(width, height);
        for r in 0..height {
            for c in 0..width {
                img.set(r, c, true);
            }
        }
        img
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub(crate) fn stride(&self) -> usize {
        self.stride
    }

    pub(crate) fn row(&self, r: usize) -> &[u64] {
        &self.bits[r * self.stride..(r + 1) * self.stride]
    }

    pub(crate) fn row_mut(&mut self, r: usize) -> &mut [u64] {
        &mut self.bits[r * self.stride..(r + 1) * self.stride]
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        if r >= self.height || c >= self.width {
            return false;
        }
        self.bits[r * self.stride + c / WORD] >> (c % WORD) & 1 == 1
    }

    pub fn set(&mut self, r: usize, c: usize, black: bool) {
        assert!(r < self.height && c < self.width, "pixel out of canvas");
        let word = &mut self.bits[r * self.stride + c / WORD];
        if black {
            *word |= 1 << (c % WORD);
        } else {
            *word &= !(1 << (c % WORD));
        }
    }

    /// Number of black pixels.
    pub fn count(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// True when no pixel is black (the canvas may still have area).
    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|&w| w == 0)
    }

    /// Black pixels in row-major order.
    pub fn pixels(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.height).flat_map(move |r| {
            self.row(r).iter().enumerate().flat_map(move |(k, &word)| {
                let mut w = word;
                std::iter::from_fn(move || {
                    if w == 0 {
                        return None;
                    }
                    let b = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some((r, k * WORD + b))
                })
            })
        })
    }

    /// Tight bounding box of the black pixels.
    pub fn bounding_box(&self) -> Option<Rect> {
        let mut top = None;
        let mut bottom = 0;
        let mut left = usize::MAX;
        let mut right = 0;
        for r in 0..self.height {
            let row = self.row(r);
            let first = row.iter().position(|&w| w != 0);
            let Some(first) = first else { continue };
            let last = row.iter().rposition(|&w| w != 0).unwrap_or(first);
            top.get_or_insert(r);
            bottom = r;
            left = left.min(first * WORD + row[first].trailing_zeros() as usize);
            right = right.max(last * WORD + (WORD - 1 - row[last].leading_zeros() as usize));
        }
        top.map(|top| Rect {
            top,
            left,
            height: bottom - top + 1,
            width: right - left + 1,
        })
    }

    /// Copies the pixels inside `rect` into a new canvas of the rect's size.
    pub fn crop(&self, rect: Rect) -> BinaryImage {
        let mut out = BinaryImage::new(rect.width, rect.height);
        for r in 0..rect.height {
            let src = rect.top + r;
            if src >= self.height {
                break;
            }
            shift_row_into(
                self.row(src),
                rect.left as i64,
                out.width,
                out.row_mut(r),
            );
        }
        out
    }

    /// Re-renders this image onto a `width`×`height` canvas with its origin
    /// at `at`. Pixels falling outside are clipped.
    pub fn embed(&self, width: usize, height: usize, at: Offset) -> BinaryImage {
        let mut out = BinaryImage::new(width, height);
        for r in 0..height {
            let src = r as i64 - at.drow as i64;
            if src < 0 || src >= self.height as i64 {
                continue;
            }
            shift_row_into(
                self.row(src as usize),
                -(at.dcol as i64),
                width,
                out.row_mut(r),
            );
        }
        out
    }

    fn zip_words(&self, other: &BinaryImage, f: impl Fn(u64, u64) -> u64) -> BinaryImage {
        debug_assert_eq!((self.width, self.height), (other.width, other.height));
        BinaryImage {
            width: self.width,
            height: self.height,
            stride: self.stride,
            bits: self
                .bits
                .iter()
                .zip(&other.bits)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    /// Pixelwise combination of two images with identical canvases.
    pub(crate) fn combine_same(&self, other: &BinaryImage, op: SetOp) -> BinaryImage {
        match op {
            SetOp::Union => self.zip_words(other, |a, b| a | b),
            SetOp::Intersection => self.zip_words(other, |a, b| a & b),
            SetOp::Subtraction => self.zip_words(other, |a, b| a & !b),
            SetOp::Xor => self.zip_words(other, |a, b| a ^ b),
        }
    }
}

impl fmt::Debug for BinaryImage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "BinaryImage {}x{} ({} black)",
            self.width,
            self.height,
            self.count()
        )?;
        if self.width <= 48 && self.height <= 48 {
            for r in 0..self.height {
                f.write_str("\n  ")?;
                for c in 0..self.width {
                    f.write_str(if self.get(r, c) { "#" } else { "." })?;
                }
            }
        }
        Ok(())
    }
}

/// Writes `dst[j] = src[j + skip]` bitwise for the first `dst_width` bits.
/// `skip` may be negative; missing source bits read as white.
pub(crate) fn shift_row_into(src: &[u64], skip: i64, dst_width: usize, dst: &mut [u64]) {
    let word_shift = skip.div_euclid(WORD as i64);
    let bit_shift = skip.rem_euclid(WORD as i64) as u32;
    let fetch = |i: i64| -> u64 {
        if i < 0 || i >= src.len() as i64 {
            0
        } else {
            src[i as usize]
        }
    };
    for (k, out) in dst.iter_mut().enumerate() {
        let i = k as i64 + word_shift;
        *out = if bit_shift == 0 {
            fetch(i)
        } else {
            (fetch(i) >> bit_shift) | (fetch(i + 1) << (WORD as u32 - bit_shift))
        };
    }
    let tail = dst_width % WORD;
    if tail != 0 {
        if let Some(last) = dst.last_mut() {
            *last &= (1u64 << tail) - 1;
        }
    }
}

/// An image positioned in a shared coordinate frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Placed {
    pub image: BinaryImage,
    pub origin: Offset,
}

impl Placed {
    pub fn at(image: BinaryImage, origin: Offset) -> Self {
        Placed { image, origin }
    }

    pub fn origin_of(image: BinaryImage) -> Self {
        Placed::at(image, Offset::ZERO)
    }

    /// Combines two placed images on the bounding hull of their canvases.
    pub fn combine(&self, other: &Placed, op: SetOp) -> Placed {
        let top = self.origin.drow.min(other.origin.drow);
        let left = self.origin.dcol.min(other.origin.dcol);
        let bottom = (self.origin.drow + self.image.height as i32)
            .max(other.origin.drow + other.image.height as i32);
        let right = (self.origin.dcol + self.image.width as i32)
            .max(other.origin.dcol + other.image.width as i32);
        let hull = Offset::new(top, left);
        let (w, h) = ((right - left) as usize, (bottom - top) as usize);
        let a = self.image.embed(w, h, self.origin - hull);
        let b = other.image.embed(w, h, other.origin - hull);
        Placed::at(a.combine_same(&b, op), hull)
    }
}

/// Combines `a` with `b` placed at `offset` inside `a`'s frame. The result
/// canvas is the bounding hull of both canvases.
pub fn set_op(a: &BinaryImage, b: &BinaryImage, offset: Offset, op: SetOp) -> BinaryImage {
    set_op_placed(a, b, offset, op).image
}

/// Like [`set_op`] but also reports where the hull's origin sits in `a`'s frame.
pub fn set_op_placed(a: &BinaryImage, b: &BinaryImage, offset: Offset, op: SetOp) -> Placed {
    Placed::origin_of(a.clone()).combine(&Placed::at(b.clone(), offset), op)
}
