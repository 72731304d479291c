//! Weighted multishifts on the unit ball: weight models, n-hypercontractivity
//! defects, similarity ratios, curvature of the reproducing kernel metric and
//! finite truncations.

pub mod counterexample;
pub mod curvature;
pub mod error;
pub mod hypercontraction;
pub mod multiindex;
pub mod report;
pub mod similarity;
pub mod truncation;
pub mod weights;

pub use error::{Error, Result};
pub use multiindex::MultiIndex;
pub use weights::{WeightFunction, WeightSpec};
