//! On-disk formats: JSON Lines records, depth rasters and intrinsics files.
//!
//! Every reader either returns complete, validated data or a [`FormatError`]
//! carrying a line number or byte offset.
//!
//! [`FormatError`]: crate::error::FormatError

mod depth_io;
mod intrinsics_io;
mod records;

pub use depth_io::{
    decode_depth, decode_pfm, decode_raw, encode_pfm, encode_raw, parse_depth, write_depth,
    DepthFormat,
};
pub use intrinsics_io::{format_intrinsics, parse_intrinsics, parse_intrinsics_str, write_intrinsics};
pub use records::{
    bbox_area, bbox_diagonal, center_size_to_corners, corners_to_center_size, parse_annotations,
    parse_fitted, parse_jsonl, parse_predictions, read_jsonl, to_jsonl, write_annotations,
    write_fitted, write_jsonl, write_predictions, AnnotationRecord, FittedRecord,
    PredictionRecord, Record, PREDICTION_CONTROL_POINTS,
};
