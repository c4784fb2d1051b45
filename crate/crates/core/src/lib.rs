//! Imagery-based solver for geometric matrix reasoning problems.
//!
//! Problems are matrices of binary images with the bottom-right entry
//! missing. The solver explains the matrix with pixel-level transformations
//! applied along analogies between rows, columns and expanded arrangements of
//! the matrix, scores every candidate answer, and picks one according to an
//! integration strategy.

pub mod analogies;
pub mod bitmap;
pub mod corpus;
pub mod harness;
pub mod scoring;
pub mod similarity;
pub mod strategies;
pub mod transforms;
