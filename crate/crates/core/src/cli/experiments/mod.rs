pub mod bound;
pub mod dimension;
pub mod mlp_gap;
pub mod simulate;
pub mod synth_gap;
pub mod tailindex;
