//! File formats, bundled datasets and parallel cross-validation around
//! `limefold-core`. The `limefold` binary builds its command line on top.

pub mod bundled;
pub mod harness;
pub mod io;
