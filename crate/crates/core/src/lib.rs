//! Random skew products over the Bernoulli shift with interval fibers.
//!
//! The base is the two-sided shift on `k` symbols with the uniform Bernoulli
//! measure; over each sequence `ω` a strictly increasing map `g_ω` of `[0, 1]`
//! acts on the fiber. The crate computes pullback attractors (invariant graphs
//! and bones), fiber Lyapunov exponents, stationary measures of the associated
//! random map, and Hutchinson (Wasserstein-1) distances between measures.

pub mod attractor;
pub mod conditions;
pub mod ergodic;
pub mod error;
pub mod interval_map;
pub mod measures;
pub mod sampling;
pub mod symbolic;
pub mod system;

pub use conditions::{check_conditions, ConditionReport};
pub use error::{Result, SkewError};
pub use interval_map::{IntervalMap, Jet};
pub use symbolic::{base_distance, in_cylinder, sample_bernoulli, BaseDistance, SymbolWindow, Tail};
pub use system::{
    dist_c2, estimate_base_lipschitz, make_bony_perturbation, make_default_step_system, FiberRule,
    SkewSystem,
};
