//! Nash social welfare maximization over indivisible goods.
//!
//! * [`identical`]: greedy allocation for identical additive valuations. The
//!   output is EFx and within a factor (e ln 2)/2 of the optimum.
//! * [`binary`]: exact optimum for binary additive valuations, and for
//!   valuations concave in the number of valued goods held, by repeatedly
//!   applying the best swap chain.
//! * [`oracle`]: exhaustive search used as ground truth.
//! * [`welfare`]: exact welfare values and EF/EFx checks.
//!
//! ```
//! use nsw_core::{binary::solve_binary, model::Instance, oracle};
//!
//! let inst = Instance::new(vec![vec![1, 1, 1], vec![1, 0, 0]]).unwrap();
//! let out = solve_binary(&inst, None, None).unwrap();
//! let best = oracle::brute_force(&inst, None, oracle::DEFAULT_BUDGET).unwrap();
//! assert_eq!(out.value, best.value);
//! ```

pub mod bench;
pub mod binary;
pub mod error;
pub mod gen;
pub mod identical;
pub mod io;
pub mod model;
pub mod oracle;
pub mod welfare;

pub use error::{ChainError, ModelError, OracleError, SolveError};
pub use model::{Allocation, ConcaveProfile, Instance, InstanceClass};
pub use welfare::NswValue;
