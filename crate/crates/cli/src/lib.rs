//! Command-line front end for the fraisse toolkit: a text syntax for
//! structures and classes, JSON records, the reproduction catalog, a result
//! cache and DOT export.

pub mod cache;
pub mod catalog;
pub mod dot;
pub mod dsl;
pub mod json;
pub mod ops;
pub mod runner;
pub mod settings;
