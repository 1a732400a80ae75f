//! Theta-positive flags, cross-ratios, photons and positivity checks for
//! `SL(n)`, `Sp(2n)` and `SO(p+1, p+k)`.

pub mod crossratio;
pub mod error;
pub mod flags;
pub mod lie;
pub mod numlin;
pub mod photons;
pub mod positivity;
pub mod replab;
pub mod scalar;

pub use error::{Error, Result};
pub use numlin::Mat;
pub use scalar::{Rational, Scalar};
pub use lie::{Family, Group, GroupSpec, Sl2Triple, WeightForm};
pub use flags::Flag;
pub use crossratio::Quadruple;
pub use photons::{Photon, Projection, SupMinReport};
pub use positivity::{Certificate, CircleKind, ConeVector, LoxodromicInstance, PositiveCircle};
pub use replab::{HyperbolicPair, Rep, Verdict};
