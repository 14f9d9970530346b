//! Batch verification over a function catalog and a sampling grid.

pub mod catalog;
pub mod grid;
pub mod report;
pub mod run;

pub use catalog::{builtin_catalog, CatalogEntry, Expectation};
pub use grid::{GridPoint, GridSpec, Region};
pub use report::{Check, FunctionReport, Report, Row, Status};
pub use run::{run, RunConfig};
