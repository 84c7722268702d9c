//! Raster utilities: PNG I/O, resizing, cropping, inpainting, a box
//! compositor and pixel error.

mod composite;
mod inpaint;
mod io;
mod resize;

pub use composite::{composite_render, ExternalRenderer};
pub use inpaint::{telea_inpaint, DEFAULT_INPAINT_RADIUS};
pub use io::{decode_png, encode_png, read_png, write_png};
pub use resize::{resize_max_side, DEFAULT_MAX_SIDE};

use crate::svg::BBox;

#[derive(Debug, thiserror::Error)]
pub enum RasterError {
    #[error("shape mismatch: {0}x{1} vs {2}x{3}")]
    ShapeMismatch(u32, u32, u32, u32),
    #[error("crop region is empty after clamping")]
    EmptyCrop,
    #[error("missing raster for href {0:?}")]
    MissingAsset(String),
    #[error("invalid raster: {0}")]
    Invalid(String),
    #[error("image codec: {0}")]
    Codec(#[from] image::ImageError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("external renderer failed: {0}")]
    Render(String),
}

/// An 8-bit RGB image, row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Raster {
    width: u32,
    height: u32,
    data: Vec<u8>,
}

impl std::fmt::Debug for Raster {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Raster({}x{})", self.width, self.height)
    }
}

impl Raster {
    /// A raster filled with one color. Panics on a zero dimension.
    pub fn filled(width: u32, height: u32, rgb: [u8; 3]) -> Self {
        assert!(width > 0 && height > 0, "raster dimensions must be positive");
        let mut data = Vec::with_capacity(width as usize * height as usize * 3);
        for _ in 0..width as usize * height as usize {
            data.extend_from_slice(&rgb);
        }
        Raster { width, height, data }
    }

    pub fn from_raw(width: u32, height: u32, data: Vec<u8>) -> Result<Self, RasterError> {
        if width == 0 || height == 0 {
            return Err(RasterError::Invalid(format!("{width}x{height}")));
        }
        if data.len() != width as usize * height as usize * 3 {
            return Err(RasterError::Invalid(format!(
                "buffer of {} bytes for {width}x{height}",
                data.len()
            )));
        }
        Ok(Raster { width, height, data })
    }

    pub fn from_fn(width: u32, height: u32, f: impl Fn(u32, u32) -> [u8; 3]) -> Self {
        let mut r = Raster::filled(width, height, [0; 3]);
        for y in 0..height {
            for x in 0..width {
                r.put(x, y, f(x, y));
            }
        }
        r
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dims(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn as_raw(&self) -> &[u8] {
        &self.data
    }

    pub fn into_raw(self) -> Vec<u8> {
        self.data
    }

    #[inline]
    fn offset(&self, x: u32, y: u32) -> usize {
        (y as usize * self.width as usize + x as usize) * 3
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> [u8; 3] {
        let o = self.offset(x, y);
        [self.data[o], self.data[o + 1], self.data[o + 2]]
    }

    #[inline]
    pub fn put(&mut self, x: u32, y: u32, rgb: [u8; 3]) {
        let o = self.offset(x, y);
        self.data[o..o + 3].copy_from_slice(&rgb);
    }

    pub fn fill_rect(&mut self, rect: PixelRect, rgb: [u8; 3]) {
        let rect = rect.clamp(self.width, self.height);
        for y in rect.y0..rect.y1 {
            for x in rect.x0..rect.x1 {
                self.put(x as u32, y as u32, rgb);
            }
        }
    }

    /// Copies out a sub-image. The rectangle must lie inside the raster.
    pub fn sub_image(&self, rect: PixelRect) -> Result<Raster, RasterError> {
        let rect = rect.clamp(self.width, self.height);
        if rect.is_empty() {
            return Err(RasterError::EmptyCrop);
        }
        let (w, h) = (rect.width() as u32, rect.height() as u32);
        let mut data = Vec::with_capacity(w as usize * h as usize * 3);
        for y in rect.y0..rect.y1 {
            let start = self.offset(rect.x0 as u32, y as u32);
            data.extend_from_slice(&self.data[start..start + w as usize * 3]);
        }
        Ok(Raster { width: w, height: h, data })
    }
}

/// A per-pixel boolean mask; `true` marks pixels to inpaint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    width: u32,
    height: u32,
    bits: Vec<bool>,
}

impl Mask {
    pub fn new(width: u32, height: u32) -> Self {
        Mask {
            width,
            height,
            bits: vec![false; width as usize * height as usize],
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> bool {
        self.bits[y as usize * self.width as usize + x as usize]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, v: bool) {
        self.bits[y as usize * self.width as usize + x as usize] = v;
    }

    pub fn set_rect(&mut self, rect: PixelRect) {
        let rect = rect.clamp(self.width, self.height);
        for y in rect.y0..rect.y1 {
            for x in rect.x0..rect.x1 {
                self.set(x as u32, y as u32, true);
            }
        }
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|b| *b)
    }

    pub(crate) fn bits(&self) -> &[bool] {
        &self.bits
    }
}

/// A half-open pixel rectangle `[x0, x1) × [y0, y1)`, possibly outside the image.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PixelRect {
    pub x0: i64,
    pub y0: i64,
    pub x1: i64,
    pub y1: i64,
}

impl PixelRect {
    /// Converts a percent box to pixel edges on a `width × height` canvas,
    /// rounding each edge half-up. No clamping.
    pub fn from_bbox(b: &BBox, width: u32, height: u32) -> Self {
        let edge = |tenths: i32, dim: u32| -> i64 {
            (2 * i64::from(tenths) * i64::from(dim) + 1000).div_euclid(2000)
        };
        PixelRect {
            x0: edge(b.left(), width),
            y0: edge(b.top(), height),
            x1: edge(b.right(), width),
            y1: edge(b.bottom(), height),
        }
    }

    pub fn width(&self) -> i64 {
        (self.x1 - self.x0).max(0)
    }

    pub fn height(&self) -> i64 {
        (self.y1 - self.y0).max(0)
    }

    pub fn is_empty(&self) -> bool {
        self.width() == 0 || self.height() == 0
    }

    pub fn clamp(&self, width: u32, height: u32) -> PixelRect {
        let (w, h) = (i64::from(width), i64::from(height));
        PixelRect {
            x0: self.x0.clamp(0, w),
            y0: self.y0.clamp(0, h),
            x1: self.x1.clamp(0, w),
            y1: self.y1.clamp(0, h),
        }
    }

    pub fn intersect(&self, other: &PixelRect) -> PixelRect {
        PixelRect {
            x0: self.x0.max(other.x0),
            y0: self.y0.max(other.y0),
            x1: self.x1.min(other.x1),
            y1: self.y1.min(other.y1),
        }
    }

    pub fn translate(&self, dx: i64, dy: i64) -> PixelRect {
        PixelRect {
            x0: self.x0 + dx,
            y0: self.y0 + dy,
            x1: self.x1 + dx,
            y1: self.y1 + dy,
        }
    }
}

/// Crops the region of a percent box, clamped to the image bounds.
pub fn crop_region(img: &Raster, bbox: &BBox) -> Result<Raster, RasterError> {
    img.sub_image(PixelRect::from_bbox(bbox, img.width, img.height))
}

/// Mean squared error over all pixels and channels on the 0–255 scale.
pub fn mse(a: &Raster, b: &Raster) -> Result<f64, RasterError> {
    if a.dims() != b.dims() {
        return Err(RasterError::ShapeMismatch(a.width, a.height, b.width, b.height));
    }
    let sum: u64 = a
        .data
        .iter()
        .zip(&b.data)
        .map(|(&p, &q)| {
            let d = i64::from(p) - i64::from(q);
            (d * d) as u64
        })
        .sum();
    Ok(sum as f64 / a.data.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crop_whole_and_quadrant() {
        let img = Raster::from_fn(100, 100, |x, y| [x as u8, y as u8, 0]);
        assert_eq!(crop_region(&img, &BBox::FULL_CANVAS).unwrap(), img);
        let q = crop_region(&img, &BBox::from_tenths(500, 500, 500, 500)).unwrap();
        assert_eq!(q.dims(), (50, 50));
        assert_eq!(q.get(0, 0), [50, 50, 0]);
        assert_eq!(q.get(49, 49), [99, 99, 0]);
    }

    #[test]
    fn crop_outside_is_empty() {
        let img = Raster::filled(10, 10, [1, 2, 3]);
        let outside = BBox::from_tenths(1000, 1000, 100, 100);
        assert!(matches!(crop_region(&img, &outside), Err(RasterError::EmptyCrop)));
    }

    #[test]
    fn crop_clamps_overshoot() {
        let img = Raster::filled(10, 10, [1, 2, 3]);
        let over = BBox::from_tenths(500, 500, 800, 800);
        assert_eq!(crop_region(&img, &over).unwrap().dims(), (5, 5));
    }

    #[test]
    fn pixel_edges_round_half_up() {
        // 25% of 10 px = 2.5 -> 3
        let r = PixelRect::from_bbox(&BBox::from_tenths(250, 0, 500, 1000), 10, 10);
        assert_eq!((r.x0, r.x1), (3, 8));
    }

    #[test]
    fn mse_values() {
        let a = Raster::filled(1, 1, [0, 0, 0]);
        let b = Raster::filled(1, 1, [255, 255, 255]);
        assert_eq!(mse(&a, &a).unwrap(), 0.0);
        assert_eq!(mse(&a, &b).unwrap(), 65025.0);
        assert_eq!(mse(&b, &a).unwrap(), 65025.0);
        let c = Raster::filled(2, 1, [0, 0, 0]);
        assert!(matches!(mse(&a, &c), Err(RasterError::ShapeMismatch(..))));
    }

    #[test]
    fn raw_buffer_length_checked() {
        assert!(Raster::from_raw(2, 2, vec![0; 11]).is_err());
        assert!(Raster::from_raw(0, 2, vec![]).is_err());
        assert!(Raster::from_raw(2, 2, vec![0; 12]).is_ok());
    }
}
