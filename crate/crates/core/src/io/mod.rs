//! File-level workflows: reading survival CSVs, per-group reports and
//! simulation configs.

pub mod input;
pub mod report;
pub mod sim_config;
