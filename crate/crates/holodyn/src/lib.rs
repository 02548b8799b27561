//! Numerical local fixed-point theory for holomorphic dynamics in one
//! complex variable: rational-map dynamics, Koenigs/Boettcher/Fatou
//! coordinates, continued-fraction rotation arithmetic, and the
//! Siegel/Cremer linearizability frontier.

pub mod complex;
pub mod dynamics;
pub mod error;
pub mod exact;
pub mod linearize;
pub mod parabolic;
pub mod poly;
pub mod rotation;
pub mod siegel;

pub use complex::Cx;
pub use dynamics::{FixedPointRecord, GermSeries, OrbitTrace, PointClass, RationalMap};
pub use error::{DynError, Result};
pub use poly::Polynomial;
