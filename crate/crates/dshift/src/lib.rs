//! Input formats, output rendering, thread-parallel runners and SVG output
//! for `dshift-core`. The `dshift` binary is built on top of this crate.

pub mod input;
pub mod parallel;
pub mod render;
pub mod svg;

pub use dshift_core;
