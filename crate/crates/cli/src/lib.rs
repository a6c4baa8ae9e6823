//! Command-line front end for the distributed policy-evaluation flows:
//! TOML run configurations, bundled presets, CSV outputs and verification.

pub mod app;
pub mod config;
pub mod output;
