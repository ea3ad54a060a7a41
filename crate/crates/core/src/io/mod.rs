//! Serialization and the pipeline front end: the `.catd` container
//! ([`catd`]), PNG import/export ([`png`]) and declarative multi-step
//! processing ([`pipeline`]).

pub mod catd;
pub mod png;
pub mod pipeline;

pub use catd::{read_catd, read_catd_from, write_catd, write_catd_to, CatdImage, PayloadKind};
pub use png::{import_png_labels, render, Palette, RenderStyle};
pub use pipeline::{
    annotator_bias_recipe, apply_step, denoise_recipe, run_pipeline, Backend, OpKind,
    PipelineReport, PipelineSpec, Step, StepReport,
};
