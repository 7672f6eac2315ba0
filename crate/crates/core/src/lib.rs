//! Lower bounds and heuristic schedules for parallel-batching machines
//! minimizing total completion time.
//!
//! Jobs have a processing time and a size; a batch machine of capacity `C`
//! processes any set of jobs whose sizes sum to at most `C` at once, taking
//! the longest processing time among them. The solver models batch sequences
//! as paths in an arc-flow graph, solves the linear relaxation of the
//! resulting set-partitioning model by column generation with knapsack
//! pricing, and then searches the generated columns for an integer schedule
//! (price-and-branch).
//!
//! ```
//! use pbatch_core::colgen::{price_and_branch, CgConfig};
//! use pbatch_core::model::Instance;
//!
//! let inst = Instance::new(&[(5, 6), (3, 5), (2, 4)], 10, 1).unwrap();
//! let res = price_and_branch(&inst, &CgConfig::default()).unwrap();
//! assert_eq!(res.cg_ub, Some(14));
//! assert!(res.cg_lb.unwrap() <= 14.0 + 1e-6);
//! ```

pub mod bench;
pub mod bounds;
pub mod colgen;
pub mod lp;
pub mod lpfile;
pub mod master;
pub mod model;
pub mod oracle;
pub mod pricing;
