pub mod check;
pub mod cli;
pub mod corpus;
pub mod error;
mod field;
pub mod gridfn;
pub mod lattice;
pub mod maximal;
pub mod pipelines;
pub mod real;
pub mod sparse;
pub mod suites;
pub mod weights;
