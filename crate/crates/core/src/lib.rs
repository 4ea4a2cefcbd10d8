//! Multi-robot tracking and identification from a single camera, using the
//! headings each robot broadcasts to tell visually identical robots apart.

pub mod assignment;
pub mod buffer;
pub mod cli;
pub mod config;
pub mod error;
pub mod geometry;
pub mod identify;
pub mod kalman;
pub mod pipeline;
pub mod report;
pub mod simworld;
pub mod tracklets;
pub mod wire;
