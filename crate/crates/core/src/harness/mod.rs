//! Instance generators, file formats and the benchmark runner.

pub mod generate;
pub mod io;
pub mod suite;

pub use generate::{generate, GenClass, GeneratorSpec, ReductionSpec, ReductionVariant, SizeDist};
pub use io::{read_instance, write_instance, InstanceFile, PackingFile};
pub use suite::{run_suite, RunOptions, RunRow, Suite};
