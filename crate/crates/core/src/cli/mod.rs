//! Map documents, experiment commands and result documents behind the
//! `renorm` binary.

mod commands;
mod document;
mod spec;

pub use commands::{linefield_growth_run, run, Command, Options};
pub use document::{Assertion, Inputs, ResultDocument, Table};
pub use spec::{MapKind, MapSpecDocument, Parameters, PreparedMap, ThickeningData, ThickeningForm, ThickeningSpec, SCHEMA_VERSION};
