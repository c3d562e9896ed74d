//! Modal analysis and propulsion prediction for flexible planar underwater
//! robots driven by two crossing piezoelectric fiber-composite patches.
//!
//! The pipeline runs bottom-up:
//!
//! - [`laminate`] homogenizes the bonded actuator stack,
//! - [`fem`] meshes the planform and assembles Kirchhoff plate matrices,
//! - [`eigen`] extracts mass-normalized modes by shift-invert iteration,
//! - [`fluid`] maps dry modes to in-fluid modes through an added-mass model,
//! - [`drive`] superposes phased patch responses and estimates the motion tendency.
//!
//! [`analytic`] holds closed-form references used to verify the numerics, and
//! [`config`] / [`commands`] implement the `modeswim` batch front-end.

pub mod analytic;
pub mod commands;
pub mod config;
pub mod drive;
pub mod eigen;
pub mod error;
pub mod fem;
pub mod fluid;
pub mod grid;
pub mod laminate;
pub mod model;

pub use error::{Error, Result};
