//! Experiment orchestration for the phaselab core: key=value configs,
//! artifact bundles with content-addressed hashes, static SVG plots, and the
//! seven experiment runners the `phaselab` binary dispatches to.

pub mod bundle;
pub mod config;
pub mod experiments;
pub mod plot;
