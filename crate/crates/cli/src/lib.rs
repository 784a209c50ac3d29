//! Command-line front end for the symtomo engine: field files, configuration
//! and the subcommands behind the `symtomo` binary.

pub mod commands;
pub mod config;
pub mod field_file;

pub use commands::run;
pub use config::Config;
pub use field_file::{FieldData, FieldFile, FieldFileError, FieldKind, Meta, SCHEMA_VERSION};
