//! Seeded generators shared by the integration tests.
#![allow(dead_code)]

use std::collections::HashMap;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use slider_core::raster::{composite_render, Raster};
use slider_core::svg::{
    BBox, Color, Em, FontWeight, ImageAsset, Pct, Placement, Slot, SlideDoc, TextAlign, TextAsset, TextStyle,
};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_bbox(rng: &mut impl Rng, max_side: i32) -> BBox {
    let w = rng.random_range(1..=max_side);
    let h = rng.random_range(1..=max_side);
    let x = rng.random_range(0..=1000 - w);
    let y = rng.random_range(0..=1000 - h);
    BBox::from_tenths(x, y, w, h)
}

fn slot<T>(rng: &mut impl Rng, known: T) -> Option<Slot<T>> {
    match rng.random_range(0..10) {
        0 => None,
        1 => Some(Slot::Unknown),
        _ => Some(Slot::Known(known)),
    }
}

const LINE_CHARS: &[char] = &[
    'a', 'b', 'Z', '0', '9', ' ', '&', '"', '\'', '>', '%', ';', 'é', 'ß', '→', '中', '-', '.', '<',
];

fn random_line(rng: &mut impl Rng) -> String {
    loop {
        let len = rng.random_range(1..=24);
        let mut s: String = (0..len).map(|_| *LINE_CHARS.choose(rng).expect("non-empty")).collect();
        // '<' must not open something that looks like markup.
        s = s.replace('<', "< ");
        let s = s.split_whitespace().collect::<Vec<_>>().join(" ");
        if !s.is_empty() && s != "UNKNOWN" {
            return s;
        }
    }
}

pub fn random_style(rng: &mut impl Rng) -> TextStyle {
    let families = ["Inter", "Open Sans", "Roboto Mono", "serif"];
    let weight = match rng.random_range(0..3) {
        0 => FontWeight::Normal,
        1 => FontWeight::Bold,
        _ => FontWeight::Numeric(100 * rng.random_range(1..=9)),
    };
    let align = [TextAlign::Left, TextAlign::Center, TextAlign::Right][rng.random_range(0..3)];
    let mut extras = Vec::new();
    if rng.random_bool(0.3) {
        extras.push(("line-height".to_string(), format!("{}.{}", rng.random_range(1..3), rng.random_range(0..10))));
    }
    if rng.random_bool(0.2) {
        extras.push(("font-style".to_string(), "italic".to_string()));
    }
    let family = families[rng.random_range(0..families.len())].to_string();
    let size = rng.random_range(1..=200);
    let spacing = Em::from_milli(rng.random_range(-200..=500));
    let color = Color([rng.random(), rng.random(), rng.random()]);
    TextStyle {
        font_family: slot(rng, family),
        font_size: slot(rng, size),
        letter_spacing: slot(rng, spacing),
        font_weight: slot(rng, weight),
        color: slot(rng, color),
        text_align: slot(rng, align),
        extras,
    }
}

/// A random document within the dialect's invariants, including occasional
/// placeholders.
pub fn random_doc(rng: &mut impl Rng) -> SlideDoc {
    let mut doc = SlideDoc::empty(rng.random_range(1..=4000), rng.random_range(1..=4000));
    let n_images = rng.random_range(0..=8);
    for k in 1..=n_images {
        let placement = if rng.random_bool(0.05) {
            Placement::unknown()
        } else {
            random_bbox(rng, 1000).into()
        };
        doc.images.push(ImageAsset {
            placement,
            href: format!("image_{k}.png"),
        });
    }
    for _ in 0..rng.random_range(0..=6) {
        let lines = if rng.random_bool(0.05) {
            Slot::Unknown
        } else {
            Slot::Known((0..rng.random_range(1..=4)).map(|_| random_line(rng)).collect())
        };
        let mut placement: Placement = random_bbox(rng, 1000).into();
        if rng.random_bool(0.05) {
            placement.w = Slot::Unknown;
        }
        doc.texts.push(TextAsset {
            placement,
            style: random_style(rng),
            lines,
        });
    }
    doc
}

/// Canvas for synthetic corpora: 500x250 px, so x tenths that are even and y
/// tenths divisible by 4 land on whole pixels.
pub const SYN_W: u32 = 500;
pub const SYN_H: u32 = 250;

fn pixel_aligned_box(rng: &mut impl Rng, max_w_px: i32, h_px: i32) -> BBox {
    let w_px = rng.random_range(10..=max_w_px);
    let x_px = rng.random_range(0..=SYN_W as i32 - w_px);
    let y_px = rng.random_range(0..=SYN_H as i32 - h_px);
    BBox::from_tenths(2 * x_px, 4 * y_px, 2 * w_px, 4 * h_px)
}

fn noise(rng: &mut impl Rng, w: u32, h: u32) -> Raster {
    let data: Vec<u8> = (0..w * h * 3).map(|_| rng.random()).collect();
    Raster::from_raw(w, h, data).expect("sized")
}

/// A ground-truth slide whose compositor rendering is exactly reproducible
/// from its own extracted assets: pixel-aligned boxes, a solid background,
/// noise-textured images, and text boxes exactly `lines x font-size` tall.
pub fn synthetic_slide(rng: &mut impl Rng) -> (SlideDoc, HashMap<String, Raster>) {
    let mut doc = SlideDoc::empty(SYN_W, SYN_H);
    let mut assets = HashMap::new();
    let bg = [rng.random(), rng.random(), rng.random()];
    assets.insert("background.png".to_string(), Raster::filled(8, 8, bg));
    for k in 1..=rng.random_range(0..=3) {
        let href = format!("image_{k}.png");
        let h_px = rng.random_range(10..=120);
        doc.images.push(ImageAsset {
            placement: pixel_aligned_box(rng, 200, h_px).into(),
            href: href.clone(),
        });
        let (nw, nh) = (rng.random_range(4..=64), rng.random_range(4..=64));
        assets.insert(href, noise(rng, nw, nh));
    }
    for _ in 0..rng.random_range(1..=3) {
        let n_lines = rng.random_range(1..=3);
        let font_size = rng.random_range(8..=24);
        doc.texts.push(TextAsset {
            placement: pixel_aligned_box(rng, 300, n_lines * font_size).into(),
            style: TextStyle {
                font_family: Some(Slot::Known("Inter".into())),
                font_size: Some(Slot::Known(font_size as u32)),
                letter_spacing: Some(Slot::Known(Em::from_milli(0))),
                color: Some(Slot::Known(Color([rng.random(), rng.random(), rng.random()]))),
                text_align: Some(Slot::Known(TextAlign::Left)),
                ..TextStyle::default()
            },
            lines: Slot::Known((0..n_lines).map(|_| random_line(rng)).collect()),
        });
    }
    (doc, assets)
}

pub fn render(doc: &SlideDoc, assets: &HashMap<String, Raster>) -> Raster {
    composite_render(doc, assets).expect("synthetic slide renders")
}

pub fn pct(t: i32) -> Pct {
    Pct::from_tenths(t)
}
