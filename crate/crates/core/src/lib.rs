//! Negligible sets, diffuse maps, canopy affinization, group quotients and
//! the Λ representability construction on finite topological spaces, plus a
//! sampled model of a smooth map that fails to factor through a quotient.

pub mod budget;
pub mod canopy;
pub mod fintop;
pub mod fixtures;
pub mod format;
pub mod gencat;
pub mod grpquot;
pub mod lambda_rep;
pub mod negligible;
pub mod pointset;
pub mod quotmor;
pub mod schwarz_numeric;

pub use budget::Budget;
pub use fintop::{
    continuous_maps, disjoint_union, enumerate_maps, is_continuous, is_homeomorphic,
    probe_catalog, quotient_space, ContinuousMap, DisjointUnion, FinSpace, MapError, Point,
    Quotient, TopologyError,
};
pub use pointset::PointSet;
