//! One module per subcommand. Each `run` writes its files into `dir` and
//! returns the one-line stdout summary.

pub mod flow;
pub mod lattice;
pub mod orbit;
pub mod spectrum;
pub mod variation;
