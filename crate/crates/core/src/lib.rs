//! Engine and compiler for a one-dimensional reversible particle cellular
//! automaton.
//!
//! The automaton has four particle tracks per cell (fast right, slow right,
//! slow left, fast left). Each step shifts every track by its speed and then
//! applies a local collision rule: two co-located fast particles reverse the
//! slow particles in the same cell, and vice versa.
//!
//! On top of the concrete engine ([`core_ca`]) sits a symbolic twin
//! ([`logical`]) that carries Boolean formulas instead of bits and simulates
//! every concrete run at once. The compiler ([`synth`]) uses the symbolic
//! engine to place a finite set of gadget particles around an `n`-cell input
//! block so that, after a computed number of steps, the block holds `h(input)`
//! for an arbitrary block function `h` given as a NAND netlist.

pub mod circuit;
pub mod core_ca;
pub mod formula;
pub mod geometry;
pub mod logical;
pub mod render;
pub mod synth;

pub use core_ca::{Cell, Configuration, Speed};
pub use formula::{Formula, Valuation, VariableId};
pub use logical::{Census, LogicalCell, LogicalConfiguration, SpacetimePosition};
