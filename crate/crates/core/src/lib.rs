pub mod acceptance;
pub mod diagrams;
pub mod invasion;
pub mod percolation;
pub mod runner;
pub mod schramm;
pub mod seed;
pub mod stats;
pub mod tree;
