//! Renderer-ready output formats. Every writer is deterministic: stable
//! ordering, stable float formatting.

pub mod graph;
pub mod model;
pub mod tables;
