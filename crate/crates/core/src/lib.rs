//! Lipschitz geometry of polygonal surface germs in R^3.
//!
//! Surface germs are given by vertex arcs `γ(t) = (x(t), y(t), t)` whose
//! coordinates are truncated Puiseux series. The crate computes tangency
//! orders and the LNE property, runs the certified edge-reduction pipeline to
//! a Hölder triangle or a horn, and compares germs through their labelled
//! region trees.

pub mod cli;
pub mod conemaps;
pub mod envelope;
pub mod fuzz;
pub mod geom;
pub mod germ;
pub mod hull;
pub mod linktopo;
pub mod metric;
pub mod puiseux;
pub mod reduce;
pub mod svg;

pub use germ::{ArcGerm, Component, GridConfig, PolygonalGerm};
pub use puiseux::{PuiseuxSeries, Q};
