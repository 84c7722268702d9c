use std::path::Path;

use image::codecs::png::{CompressionType, FilterType, PngEncoder};
use image::{ExtendedColorType, ImageEncoder, ImageFormat};

use super::{Raster, RasterError};

/// Decodes a PNG into RGB, compositing any alpha over white.
pub fn decode_png(bytes: &[u8]) -> Result<Raster, RasterError> {
    let img = image::load_from_memory_with_format(bytes, ImageFormat::Png)?.to_rgba8();
    let (w, h) = img.dimensions();
    let mut data = Vec::with_capacity(w as usize * h as usize * 3);
    for px in img.pixels() {
        let [r, g, b, a] = px.0;
        let a = u32::from(a);
        for c in [r, g, b] {
            let v = (u32::from(c) * a + 255 * (255 - a) + 127) / 255;
            data.push(v as u8);
        }
    }
    Raster::from_raw(w, h, data)
}

pub fn read_png(path: impl AsRef<Path>) -> Result<Raster, RasterError> {
    decode_png(&std::fs::read(path)?)
}

/// Encodes as 8-bit RGB PNG. Output bytes depend only on the pixels.
pub fn encode_png(img: &Raster) -> Result<Vec<u8>, RasterError> {
    let mut out = Vec::new();
    PngEncoder::new_with_quality(&mut out, CompressionType::Default, FilterType::Adaptive).write_image(
        img.as_raw(),
        img.width(),
        img.height(),
        ExtendedColorType::Rgb8,
    )?;
    Ok(out)
}

pub fn write_png(path: impl AsRef<Path>, img: &Raster) -> Result<(), RasterError> {
    std::fs::write(path, encode_png(img)?)?;
    Ok(())
}
