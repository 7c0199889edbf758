//! Boundary curves, `θ_ε` maps, alternation sets and the scalars derived from them.

pub mod alternation;
pub mod arcs;
pub mod curve;
pub mod params;
pub mod theta;

pub use alternation::{AlternationConfig, AlternationError, Arc, LengthRule};
pub use arcs::ArcQuantities;
pub use curve::{wrap, BoundaryCurve, Circle, Ellipse};
pub use params::{eta_of, log_eta, ParamError, SmallParams};
pub use theta::{ThetaError, ThetaKind, ThetaMap, TrigSeries};
