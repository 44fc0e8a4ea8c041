//! Spatial degrees of freedom and channel strength between two regions.
//!
//! The crate computes correlation-operator eigenspectra of scalar Green's
//! function channels, geometry-based estimates from mutual shadow measures,
//! and closed-form high-frequency asymptotics, so the three can be compared.

pub mod asymptotics;
mod bessel;
pub mod builtins;
pub mod channel;
pub mod error;
pub mod geometry;
pub mod greens;
pub mod metrics;
pub mod output;
mod pairs;
pub mod quadrature;
pub mod scenario;
pub mod shadow;

pub use bessel::{j0, j0_y0, y0};
pub use channel::{
    assemble_channel, assemble_channel_with, compute_spectrum, merge_spectra, AssemblyOptions, ChannelMatrix,
    PairClass, Spectrum,
};
pub use error::{Error, Result};
pub use geometry::{region_measure, sample_region, Pose, RegionKind, RegionSpec, Rotation, SampledRegion, Shape, Vec3};
pub use greens::{green2d, green3d, Kernel, KernelVariant};
