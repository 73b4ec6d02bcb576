//! Sequential network design: graphs grown one link (or one unit of weight)
//! per period, evaluated by walk-based utilities, and optimized greedily or
//! exactly over isomorphism classes.

pub mod canon;
pub mod error;
pub mod format;
pub mod games;
pub mod graph;
pub mod metrics;
pub mod planner;
pub mod reallocation;
pub mod structures;
pub mod weighted;

pub use canon::{canonical_form, canonical_labeling, isomorphic, CanonicalForm};
pub use error::{Error, Result};
pub use graph::{Graph, LinkEdit};
pub use metrics::{Dominance, DominanceVerdict, NodeWeights, WalkProfile};
