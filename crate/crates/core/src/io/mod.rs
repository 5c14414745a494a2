//! File formats shared by the command-line tool. Everything here converts
//! between in-memory values and strings or bytes; touching the filesystem is
//! left to the caller.
//!
//! * Grids: CSV with one line per row, and binary PGM (`P5`) heatmaps.
//! * Feature maps: little-endian binary (`u32` C, H, W then `f32` values in
//!   channel, row, column order) and long-form CSV `channel,row,col,value`.
//! * Trajectories: `frame,cx,cy,w,h` CSV out; `x,y,w,h` corner-format
//!   annotation files in.
//! * Configs: TOML, with parse and validation errors located by key and line.

mod config;
mod table;
mod tensor;

pub use config::{
    load_attribute_groups, load_ommr_params, load_scenario, load_weights, locate_key, WeightsFile,
};
pub use table::{
    eval_curves_csv, grid_csv, parse_annotations, parse_grid_csv, pgm, response_summary_csv,
    trace_csv, trajectory_csv,
};
pub use tensor::{decode_feature_map, encode_feature_map, feature_map_csv};
