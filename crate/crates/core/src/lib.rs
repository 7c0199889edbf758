//! Scalar-generic building blocks for the alternating Dirichlet/Neumann eigenvalue laboratory:
//! boundary geometry and `θ_ε` maps, the cutoff and profile functions, explicit boundary-layer
//! cell functions, adaptive quadrature and Bessel-based disk spectra.
//!
//! Everything here is generic over [`Real`]; the `*64` aliases fix `f64`, which is what the
//! finite-element layer uses.

pub mod bessel;
pub mod boundary_layer;
pub mod cutoff;
pub mod geometry;
pub mod quad;
pub mod scalar;

pub use scalar::Real;

pub type Circle64 = geometry::Circle<f64>;
pub type Ellipse64 = geometry::Ellipse<f64>;
pub type ThetaMap64 = geometry::ThetaMap<f64>;
pub type ThetaKind64 = geometry::ThetaKind<f64>;
pub type LengthRule64 = geometry::LengthRule<f64>;
pub type Alternation64 = geometry::AlternationConfig<f64>;
pub type ArcQuantities64 = geometry::ArcQuantities<f64>;
pub type SmallParams64 = geometry::SmallParams<f64>;
pub type DiskOracle64 = bessel::DiskOracle<f64>;
pub type DiskKind64 = bessel::DiskKind<f64>;
