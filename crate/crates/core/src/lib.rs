pub mod cmatching;
pub mod io;
pub mod lp;
pub mod model;
pub mod reduction;
pub mod semantics;
pub mod unit_solver;
pub mod coop;
pub mod pipeline;
pub mod repro;
pub mod random;
pub mod cli;
