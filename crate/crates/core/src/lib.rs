//! Matrix-form B-spline decomposition, cubic approximation and batched
//! point projection.

// `!(a < b)` is used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod basis;
pub mod curve;
pub mod decompose;
pub mod distance;
pub mod engine;
pub mod error;
pub mod fixtures;
pub mod oracle;
pub mod point;
pub mod poly;
pub mod project;
pub mod reduce;
pub mod segment;
pub mod selftest;

pub use curve::{BSplineCurve, KnotVector};
pub use decompose::decompose_to_bezier;
pub use engine::{plan_work, Engine, WorkPlan};
pub use error::{Error, Result};
pub use point::{Point, Point2, Point3};
pub use project::{invert_point, project_points, ProjectionResult, Projector};
pub use reduce::{approximate_error_controlled, ApproxConfig};
pub use segment::{BezierSegment, CubicApproxSegment, Interval};
