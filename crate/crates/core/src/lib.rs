pub mod geometry;
pub mod harness;
pub mod medial_axis;
pub mod miqp;
pub mod mpc;
pub mod vehicle;
