//! Batch refinement of image directories and the domain-shift surrogate
//! experiment.

mod batch;
pub mod domain_shift;
mod ingest;

pub use batch::{
    collect_inputs, refine_batch, BatchManifest, ImageRecord, Outcome, INPUT_EXTENSIONS, MANIFEST_NAME,
};
pub use ingest::{channels_from_image, encode_png, ingest_image, luma, quantized_codes, Channels, LUMA_WEIGHTS};
