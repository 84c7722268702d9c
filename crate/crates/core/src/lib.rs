//! Raster slide derendering: turns slide images into editable SVG documents.

pub mod context;
pub mod dataset;
pub mod engine;
pub mod metrics;
pub mod postprocess;
pub mod raster;
pub mod svg;

pub use context::{AuxContext, ContextKind, DetectionSet};
pub use engine::{derender_pipeline, Backend, DerenderResult, PipelineOptions, StartContext};
pub use raster::Raster;
pub use svg::{parse_slide_svg, serialize_slide_svg, BBox, Pct, SlideDoc, Slot};
