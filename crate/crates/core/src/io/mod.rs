//! Run configuration and result emission.

pub mod config;
pub mod csv;
pub mod json;
pub mod svg;

pub use config::{load_config, load_config_str, RunConfig};
pub use csv::{emit_csv, read_csv, Table};
pub use json::{emit_json, Summary};
pub use svg::{emit_svg, Heatmap, LinePlot, Plot};
