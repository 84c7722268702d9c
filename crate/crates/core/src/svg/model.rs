use std::fmt;

/// Placeholder token used by templates for values the model must infer.
pub const UNKNOWN: &str = "UNKNOWN";

/// A coordinate expressed in tenths of a percent of the canvas.
///
/// The dialect carries exactly one decimal digit, so storing tenths keeps
/// every value exact and makes parse/serialize round trips bit-stable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Pct(i32);

impl Pct {
    pub const ZERO: Pct = Pct(0);
    pub const FULL: Pct = Pct(1000);

    pub const fn from_tenths(tenths: i32) -> Self {
        Pct(tenths)
    }

    pub const fn tenths(self) -> i32 {
        self.0
    }

    /// Rounds a percentage to one decimal digit, half-up.
    pub fn from_percent(value: f64) -> Self {
        // Small bias absorbs binary representation error such as 35.35 -> 35.34999.
        Pct(round_half_up(value * 10.0) as i32)
    }

    pub fn percent(self) -> f64 {
        f64::from(self.0) / 10.0
    }
}

pub(crate) fn round_half_up(v: f64) -> f64 {
    (v + 0.5 + 1e-9).floor()
}

impl fmt::Display for Pct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        write!(f, "{sign}{}.{}", abs / 10, abs % 10)
    }
}

/// Letter spacing in thousandths of an em.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Em(i32);

impl Em {
    pub const fn from_milli(milli: i32) -> Self {
        Em(milli)
    }

    pub const fn milli(self) -> i32 {
        self.0
    }
}

impl fmt::Display for Em {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        let mut frac = format!("{:03}", abs % 1000);
        while frac.len() > 1 && frac.ends_with('0') {
            frac.pop();
        }
        write!(f, "{sign}{}.{frac}em", abs / 1000)
    }
}

/// Either a concrete value or the `UNKNOWN` template placeholder.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Slot<T> {
    Known(T),
    Unknown,
}

impl<T> Slot<T> {
    pub fn known(&self) -> Option<&T> {
        match self {
            Slot::Known(v) => Some(v),
            Slot::Unknown => None,
        }
    }

    pub fn is_unknown(&self) -> bool {
        matches!(self, Slot::Unknown)
    }
}

impl<T> From<T> for Slot<T> {
    fn from(v: T) -> Self {
        Slot::Known(v)
    }
}

/// A concrete axis-aligned box in percent-of-canvas coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BBox {
    pub x: Pct,
    pub y: Pct,
    pub w: Pct,
    pub h: Pct,
}

impl BBox {
    pub const FULL_CANVAS: BBox = BBox {
        x: Pct::ZERO,
        y: Pct::ZERO,
        w: Pct::FULL,
        h: Pct::FULL,
    };

    pub fn from_tenths(x: i32, y: i32, w: i32, h: i32) -> Self {
        BBox {
            x: Pct(x),
            y: Pct(y),
            w: Pct(w),
            h: Pct(h),
        }
    }

    pub fn from_percent(x: f64, y: f64, w: f64, h: f64) -> Self {
        BBox {
            x: Pct::from_percent(x),
            y: Pct::from_percent(y),
            w: Pct::from_percent(w),
            h: Pct::from_percent(h),
        }
    }

    pub fn left(&self) -> i32 {
        self.x.0
    }

    pub fn top(&self) -> i32 {
        self.y.0
    }

    pub fn right(&self) -> i32 {
        self.x.0 + self.w.0
    }

    pub fn bottom(&self) -> i32 {
        self.y.0 + self.h.0
    }

    /// Area in squared tenths of a percent.
    pub fn area(&self) -> i64 {
        i64::from(self.w.0.max(0)) * i64::from(self.h.0.max(0))
    }

    /// True when the two boxes share a region of positive area.
    pub fn overlaps(&self, other: &BBox) -> bool {
        self.left().max(other.left()) < self.right().min(other.right())
            && self.top().max(other.top()) < self.bottom().min(other.bottom())
    }

    pub fn union(&self, other: &BBox) -> BBox {
        let x0 = self.left().min(other.left());
        let y0 = self.top().min(other.top());
        let x1 = self.right().max(other.right());
        let y1 = self.bottom().max(other.bottom());
        BBox::from_tenths(x0, y0, x1 - x0, y1 - y0)
    }
}

/// The spatial attributes of an asset as written in the document, each of
/// which may still be a placeholder.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Placement {
    pub x: Slot<Pct>,
    pub y: Slot<Pct>,
    pub w: Slot<Pct>,
    pub h: Slot<Pct>,
}

impl Placement {
    pub fn unknown() -> Self {
        Placement {
            x: Slot::Unknown,
            y: Slot::Unknown,
            w: Slot::Unknown,
            h: Slot::Unknown,
        }
    }

    /// The concrete box, if no coordinate is a placeholder.
    pub fn bbox(&self) -> Option<BBox> {
        Some(BBox {
            x: *self.x.known()?,
            y: *self.y.known()?,
            w: *self.w.known()?,
            h: *self.h.known()?,
        })
    }

    pub fn has_unknown(&self) -> bool {
        self.x.is_unknown() || self.y.is_unknown() || self.w.is_unknown() || self.h.is_unknown()
    }
}

impl From<BBox> for Placement {
    fn from(b: BBox) -> Self {
        Placement {
            x: Slot::Known(b.x),
            y: Slot::Known(b.y),
            w: Slot::Known(b.w),
            h: Slot::Known(b.h),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FontWeight {
    Normal,
    Bold,
    Numeric(u16),
}

impl fmt::Display for FontWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FontWeight::Normal => f.write_str("normal"),
            FontWeight::Bold => f.write_str("bold"),
            FontWeight::Numeric(w) => write!(f, "{w}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TextAlign {
    Left,
    Center,
    Right,
}

impl fmt::Display for TextAlign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TextAlign::Left => "left",
            TextAlign::Center => "center",
            TextAlign::Right => "right",
        })
    }
}

/// An opaque sRGB color, always written as lowercase `#rrggbb`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Color(pub [u8; 3]);

impl Color {
    pub const BLACK: Color = Color([0, 0, 0]);
    pub const WHITE: Color = Color([255, 255, 255]);
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [r, g, b] = self.0;
        write!(f, "#{r:02x}{g:02x}{b:02x}")
    }
}

/// Style of a text block. `None` means the key is absent from the `style`
/// attribute, which is distinct from an `UNKNOWN` placeholder.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct TextStyle {
    pub font_family: Option<Slot<String>>,
    pub font_size: Option<Slot<u32>>,
    pub letter_spacing: Option<Slot<Em>>,
    pub font_weight: Option<Slot<FontWeight>>,
    pub color: Option<Slot<Color>>,
    pub text_align: Option<Slot<TextAlign>>,
    /// Style keys outside the dialect, kept verbatim in source order.
    pub extras: Vec<(String, String)>,
}

impl TextStyle {
    /// Every dialect key set to `UNKNOWN`, as in partial templates.
    pub fn all_unknown() -> Self {
        TextStyle {
            font_family: Some(Slot::Unknown),
            font_size: Some(Slot::Unknown),
            letter_spacing: Some(Slot::Unknown),
            font_weight: Some(Slot::Unknown),
            color: Some(Slot::Unknown),
            text_align: Some(Slot::Unknown),
            extras: Vec::new(),
        }
    }

    pub fn has_unknown(&self) -> bool {
        fn u<T>(s: &Option<Slot<T>>) -> bool {
            matches!(s, Some(Slot::Unknown))
        }
        u(&self.font_family)
            || u(&self.font_size)
            || u(&self.letter_spacing)
            || u(&self.font_weight)
            || u(&self.color)
            || u(&self.text_align)
    }

    pub fn font_size_px(&self) -> Option<u32> {
        self.font_size.as_ref().and_then(|s| s.known().copied())
    }

    pub fn color_value(&self) -> Option<Color> {
        self.color.as_ref().and_then(|s| s.known().copied())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TextAsset {
    pub placement: Placement,
    pub style: TextStyle,
    /// One entry per inner `<div>`; `Unknown` when the content is the placeholder.
    pub lines: Slot<Vec<String>>,
}

impl TextAsset {
    pub fn line_texts(&self) -> &[String] {
        match &self.lines {
            Slot::Known(lines) => lines,
            Slot::Unknown => &[],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ImageAsset {
    pub placement: Placement,
    pub href: String,
}

/// The full-canvas background image. Its box is fixed at (0, 0, 100, 100).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BackgroundAsset {
    pub href: String,
}

impl Default for BackgroundAsset {
    fn default() -> Self {
        BackgroundAsset {
            href: "background.png".to_string(),
        }
    }
}

/// A structured slide: canvas, background, and foreground assets in DOM order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SlideDoc {
    pub width: u32,
    pub height: u32,
    pub background: BackgroundAsset,
    pub images: Vec<ImageAsset>,
    pub texts: Vec<TextAsset>,
}

impl SlideDoc {
    pub fn empty(width: u32, height: u32) -> Self {
        SlideDoc {
            width,
            height,
            background: BackgroundAsset::default(),
            images: Vec::new(),
            texts: Vec::new(),
        }
    }

    /// True if any attribute or text content is still a placeholder.
    pub fn has_unknown(&self) -> bool {
        self.images.iter().any(|i| i.placement.has_unknown())
            || self
                .texts
                .iter()
                .any(|t| t.placement.has_unknown() || t.style.has_unknown() || t.lines.is_unknown())
    }

    pub fn image_boxes(&self) -> Vec<BBox> {
        self.images.iter().filter_map(|i| i.placement.bbox()).collect()
    }

    pub fn text_boxes(&self) -> Vec<BBox> {
        self.texts.iter().filter_map(|t| t.placement.bbox()).collect()
    }
}
