//! Expression parsing, Julia-set rendering with chart overlays, figure
//! presets, and the command-line surface for the holodyn library.

pub mod cli;
pub mod expr;
pub mod render;
pub mod report;
