//! Symbolic dynamics for Moran constructions and iterated function systems.
//!
//! Words, subshifts and compact trees live in [`word`], [`subshift`] and
//! [`tree`]; exact geometry in [`ifs`]; clustering scans and map
//! deduplication in [`separation`]; pressure and its zero in [`pressure`];
//! symbolic and geometric magnification in [`microsets`], [`geoset`] and
//! [`furstenberg`]; Markov measures in [`measures`].

pub mod cli;
pub mod error;
pub mod furstenberg;
pub mod geoset;
pub mod ifs;
pub mod measures;
pub mod microsets;
pub mod rational;
pub mod render;
pub mod separation;
pub mod pressure;
pub mod subshift;
pub mod tree;
pub mod word;

pub use error::{Error, ErrorKind, Result};
pub use ifs::{AxisBox, ContractionMap, Diameter, IfsSystem, MoranConstruction, Point, SeedSet};
pub use subshift::Subshift;
pub use tree::CompactTree;
pub use word::{is_orthogonal, lcp, lex_less, Word};
