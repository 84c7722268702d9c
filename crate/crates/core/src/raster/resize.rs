use super::Raster;

pub const DEFAULT_MAX_SIDE: u32 = 1024;

/// Downscales so the longer side equals `max_side`, preserving aspect ratio
/// with bilinear sampling. Images already within the limit are returned as-is.
pub fn resize_max_side(img: &Raster, max_side: u32) -> Raster {
    let max_side = max_side.max(1);
    let (w, h) = img.dims();
    let long = w.max(h);
    if long <= max_side {
        return img.clone();
    }
    let scaled = |short: u32| -> u32 {
        let v = (2 * u64::from(short) * u64::from(max_side) + u64::from(long)) / (2 * u64::from(long));
        (v as u32).max(1)
    };
    let (nw, nh) = if w >= h { (max_side, scaled(h)) } else { (scaled(w), max_side) };
    bilinear(img, nw, nh)
}

fn bilinear(img: &Raster, nw: u32, nh: u32) -> Raster {
    let (w, h) = img.dims();
    let sx = f64::from(w) / f64::from(nw);
    let sy = f64::from(h) / f64::from(nh);
    let sample_axis = |dst: u32, scale: f64, len: u32| -> (u32, u32, f64) {
        let src = ((f64::from(dst) + 0.5) * scale - 0.5).clamp(0.0, f64::from(len - 1));
        let i0 = src.floor() as u32;
        let i1 = (i0 + 1).min(len - 1);
        (i0, i1, src - f64::from(i0))
    };
    Raster::from_fn(nw, nh, |x, y| {
        let (x0, x1, fx) = sample_axis(x, sx, w);
        let (y0, y1, fy) = sample_axis(y, sy, h);
        let (a, b, c, d) = (img.get(x0, y0), img.get(x1, y0), img.get(x0, y1), img.get(x1, y1));
        let mut out = [0u8; 3];
        for ch in 0..3 {
            let top = f64::from(a[ch]) * (1.0 - fx) + f64::from(b[ch]) * fx;
            let bottom = f64::from(c[ch]) * (1.0 - fx) + f64::from(d[ch]) * fx;
            out[ch] = (top * (1.0 - fy) + bottom * fy + 0.5).floor().clamp(0.0, 255.0) as u8;
        }
        out
    })
}
