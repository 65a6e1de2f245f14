//! Message-passing algorithms for maximum weight independent set (MWIS).
//!
//! * [`maxprod`]: loopy max-product in min-sum form, with ternary estimates.
//! * [`comptree`]: computation-tree unwrapping, the exact oracle for max-product estimates.
//! * [`descent`]: coordinate descent on the log-barrier smoothed LP dual.
//! * [`recovery`]: primal recovery from the dual by node coloring.
//! * [`oracles`]: brute-force MWIS, half-integral LP enumeration and duality checks.
//! * [`map_reduction`]: MAP estimation on factor models as MWIS.

pub mod comptree;
pub mod descent;
pub mod generate;
pub mod graph;
pub mod map_reduction;
pub mod maxprod;
pub mod oracles;
pub mod recovery;

pub use graph::{NodeSubset, WeightedGraph};
