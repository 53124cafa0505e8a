//! Simulator and analytic cost model for the many-core machine model (MMM).
//!
//! The simulator executes parallel polynomial division, multiplication and
//! GCD kernels over a prime field on an abstract machine with a two-level
//! memory, counting local operations and global-memory transfers per thread.
//! The cost model evaluates the matching closed-form work, span, overhead and
//! thread-block DAG formulas exactly over the rationals.

pub mod cli;
pub mod costmodel;
pub mod division;
pub mod error;
pub mod field;
pub mod gcd;
pub mod graph;
pub mod machine;
pub mod metrics;
pub mod multiplication;
pub mod oracle;
pub mod poly;
pub mod rational;
pub mod report;

pub use error::{Error, Result};
pub use field::{Coeff, Field};
pub use graph::{MmmProgram, StructuralMetrics};
pub use machine::{Machine, MachineParams};
pub use metrics::{ProgramMetrics, ProgramRun};
pub use poly::Poly;
