//! Search engine and verification toolkit for saturated pure partial planes.
//!
//! A pure partial plane of order `n` is a set of `(n+1)`-point lines over
//! the points `0..n²+n+1` in which any two lines meet in exactly one point.
//! It is saturated when no further line can be added. The crate provides
//! the plane model and counting identities ([`plane`], [`lines`]),
//! isomorphism classes via canonical incidence-graph labeling ([`iso`]),
//! a depth-first extension engine with phase chaining ([`search`]), the
//! order-6 case pipelines and the integer feasibility analyzer ([`cases`],
//! [`feasibility`]), and a plain-text plane file format ([`io`]).

pub mod cases;
pub mod construct;
pub mod error;
pub mod feasibility;
pub mod golden;
pub mod io;
pub mod iso;
pub mod lines;
pub mod plane;
pub mod search;

pub use construct::construct_odd_order_sppp;
pub use error::{Error, Result};
pub use iso::{dedupe, planes_isomorphic, CanonicalCertificate};
pub use lines::{
    enumerate_compatible_lines, is_saturated, AppearanceCaps, LineConstraints, MembershipQuota,
};
pub use plane::{
    appearance_profile, check_line_sum, check_no_n_point, check_sum_identities, lines_compatible,
    AppearanceProfile, Line, Order, PartialPlane, PointSet,
};
