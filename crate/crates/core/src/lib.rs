//! Symbolic dynamics of billiards in Euclidean polygons.
//!
//! The crate traces billiard trajectories in labeled polygons and codes them
//! by the edges they hit, unfolds words into corridors of reflected copies,
//! decides which periodic words are realized, enumerates generalized
//! diagonals, samples finite windows of the bounce spectrum, builds the
//! translation-surface unfolding of rational tables, and computes cutting
//! sequences on edge-paired polygons.
//!
//! All geometry is generic over a [`Scalar`](numeric::Scalar) backend: the
//! exact rational backend [`Exact`](numeric::Exact) or the tolerant float
//! backend [`F64`](numeric::F64).

pub mod analysis;
pub mod flow;
pub mod io;
pub mod numeric;
pub mod surface;
pub mod svg;
pub mod table;
pub mod unfolding;

pub use flow::{bounce_word, trace, trace_backward, BounceWord, RayState, Trajectory};
pub use numeric::{Direction, Exact, Isometry, Point2, Scalar, Segment, F64};
pub use table::{classify_table, transform_table, validate_table, Label, LabeledTable, TableClass};
