//! Deterministic fixtures for the criterion benches.

use slider_core::raster::{Mask, PixelRect, Raster};
use slider_core::svg::{parse_slide_svg, serialize_slide_svg, BBox, SlideDoc};

/// A smooth gradient with a few hard edges, so inpainting has real structure.
pub fn gradient(width: u32, height: u32) -> Raster {
    let mut img = Raster::filled(width, height, [0, 0, 0]);
    for y in 0..height {
        for x in 0..width {
            let r = (x * 255 / width.max(1)) as u8;
            let g = (y * 255 / height.max(1)) as u8;
            let b = if (x / 32 + y / 32) % 2 == 0 { 40 } else { 200 };
            img.put(x, y, [r, g, b]);
        }
    }
    img
}

/// Rectangular holes covering roughly `percent` of the canvas.
pub fn holes(width: u32, height: u32, percent: u32) -> Mask {
    let mut mask = Mask::new(width, height);
    let side = ((width * height * percent / 100) as f64 / 4.0).sqrt() as u32;
    for k in 0..4 {
        let x = (width / 5) * (k + 1) - side / 2;
        let y = height / 2 - side / 2;
        let bbox = BBox::from_tenths(
            (x * 1000 / width) as i32,
            (y * 1000 / height) as i32,
            (side * 1000 / width) as i32,
            (side * 1000 / height) as i32,
        );
        mask.set_rect(PixelRect::from_bbox(&bbox, width, height));
    }
    mask
}

/// `n` boxes on a staggered grid, shifted by `offset` tenths.
pub fn boxes(n: usize, offset: i32) -> Vec<BBox> {
    (0..n as i32)
        .map(|i| BBox::from_tenths((i * 37 + offset) % 800, (i * 53 + offset) % 800, 150, 120))
        .collect()
}

/// Pseudo-text of `len` chars, varied by `salt`.
pub fn text(len: usize, salt: u32) -> String {
    let alphabet: Vec<char> = "abcdefghij klmnopqrst uvwxyz ÉéßΩ".chars().collect();
    let mut state = salt.wrapping_mul(2654435761).wrapping_add(1);
    (0..len)
        .map(|_| {
            state ^= state << 13;
            state ^= state >> 17;
            state ^= state << 5;
            alphabet[state as usize % alphabet.len()]
        })
        .collect()
}

/// A canonical slide with `n_images` images and `n_texts` text blocks.
pub fn slide_svg(n_images: usize, n_texts: usize) -> String {
    let mut svg = String::from(
        r#"<svg xmlns="http://www.w3.org/2000/svg" xmlns:xlink="http://www.w3.org/1999/xlink" width="1280" height="720">
  <image x="0.0%" y="0.0%" width="100.0%" height="100.0%" href="background.png" />
  <g id="images">
"#,
    );
    for (k, b) in boxes(n_images, 0).iter().enumerate() {
        svg.push_str(&format!(
            "    <image x=\"{}%\" y=\"{}%\" width=\"{}%\" height=\"{}%\" href=\"image_{}.png\" />\n",
            b.x.percent(),
            b.y.percent(),
            b.w.percent(),
            b.h.percent(),
            k + 1
        ));
    }
    svg.push_str("  </g>\n  <g id=\"text\">\n");
    for (k, b) in boxes(n_texts, 11).iter().enumerate() {
        svg.push_str(&format!(
            "    <foreignObject x=\"{}%\" y=\"{}%\" width=\"{}%\" height=\"{}%\" overflow=\"visible\">\n      \
             <div xmlns=\"http://www.w3.org/1999/xhtml\" style=\"font-family: Inter; font-size: 24px; letter-spacing: 0.0em; color: #202020; text-align: left;\">\n        \
             <div>{}</div>\n      </div>\n    </foreignObject>\n",
            b.x.percent(),
            b.y.percent(),
            b.w.percent(),
            b.h.percent(),
            text(40, k as u32)
        ));
    }
    svg.push_str("  </g>\n</svg>\n");
    // Round-trip so the bench input is exactly what the writer emits.
    let doc: SlideDoc = parse_slide_svg(&svg).expect("fixture parses");
    serialize_slide_svg(&doc).expect("fixture serializes")
}
