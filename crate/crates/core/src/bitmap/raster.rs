use std::fs;
use std::io::Cursor;
use std::path::Path;

use image::{GrayImage, ImageFormat};
use thiserror::Error;

use super::BinaryImage;

#[derive(Debug, Error)]
pub enum RasterError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}: only 8-bit PGM (P5) and PNG images are accepted")]
    UnsupportedFormat(String),
    #[error("cannot decode {path}: {source}")]
    Decode {
        path: String,
        #[source]
        source: image::ImageError,
    },
}

/// Pixels darker than `threshold` become ink.
pub fn binarize(gray: &GrayImage, threshold: u8) -> BinaryImage {
    let (w, h) = gray.dimensions();
    BinaryImage::from_pixels(
        w as usize,
        h as usize,
        gray.enumerate_pixels()
            .filter(|(_, _, p)| p.0[0] < threshold)
            .map(|(x, y, _)| (y as usize, x as usize)),
    )
}

/// Decodes a PGM (P5) or PNG file to 8-bit luma.
pub fn decode_image(path: &Path) -> Result<GrayImage, RasterError> {
    let name = path.display().to_string();
    let bytes = fs::read(path).map_err(|source| RasterError::Io {
        path: name.clone(),
        source,
    })?;
    let format = if bytes.starts_with(b"P5") {
        ImageFormat::Pnm
    } else if bytes.starts_with(b"\x89PNG\r\n\x1a\n") {
        ImageFormat::Png
    } else {
        return Err(RasterError::UnsupportedFormat(name));
    };
    let img = image::load(Cursor::new(bytes), format)
        .map_err(|source| RasterError::Decode { path: name, source })?;
    Ok(img.to_luma8())
}

pub fn load_binary(path: &Path, threshold: u8) -> Result<BinaryImage, RasterError> {
    Ok(binarize(&decode_image(path)?, threshold))
}

/// Binary P5 encoding: ink is 0, background is 255.
pub fn encode_pgm(img: &BinaryImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.reserve(img.width() * img.height());
    for r in 0..img.height() {
        for c in 0..img.width() {
            out.push(if img.get(r, c) { 0 } else { 255 });
        }
    }
    out
}

pub fn save_pgm(img: &BinaryImage, path: &Path) -> std::io::Result<()> {
    fs::write(path, encode_pgm(img))
}

#[cfg(test)]
mod tests {
    use super::*;
    use image::Luma;

    #[test]
    fn threshold_extremes() {
        let white = GrayImage::from_pixel(4, 3, Luma([255]));
        assert!(binarize(&white, 128).is_empty());
        let black = GrayImage::from_pixel(4, 3, Luma([0]));
        assert_eq!(binarize(&black, 128).count(), 12);
    }

    #[test]
    fn gradient_matches_histogram() {
        let grad = GrayImage::from_fn(16, 16, |x, y| Luma([(y * 16 + x) as u8]));
        for threshold in [0u8, 1, 77, 128, 255] {
            let hist = grad.pixels().filter(|p| p.0[0] < threshold).count();
            assert_eq!(binarize(&grad, threshold).count(), hist);
        }
    }

    #[test]
    fn pgm_and_png_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let img = BinaryImage::from_ascii(&["#..#", ".##.", "...."]);
        let pgm = dir.path().join("a.pgm");
        save_pgm(&img, &pgm).unwrap();
        assert_eq!(load_binary(&pgm, 128).unwrap(), img);

        let png = dir.path().join("a.png");
        let rgb = image::RgbImage::from_fn(4, 3, |x, y| {
            if img.get(y as usize, x as usize) { image::Rgb([10, 20, 30]) } else { image::Rgb([250, 250, 250]) }
        });
        rgb.save(&png).unwrap();
        assert_eq!(load_binary(&png, 128).unwrap(), img);

        let bogus = dir.path().join("a.bmp");
        std::fs::write(&bogus, b"BM....").unwrap();
        assert!(matches!(decode_image(&bogus), Err(RasterError::UnsupportedFormat(_))));
    }
}
