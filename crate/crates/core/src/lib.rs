//! Coverage view planning for triangle meshes.
//!
//! A fixed set of candidate camera views is reduced to a small subset whose
//! combined visibility covers the mesh. Views are picked one at a time by
//! maximizing `area / perimeter^λ` of the covered region, and the per-step
//! choice of `λ` is either fixed, alternated, or learned by one of three
//! temporal-difference agents.
//!
//! Module map:
//!
//! * [`mesh`]: triangle meshes, coverage submeshes, boundary calculus and the score.
//! * [`visibility`]: cameras, BVH ray casting and per-view coverage tables.
//! * [`planner`]: next-best-view selection and the non-learning baselines.
//! * [`value_net`]: the one-hidden-layer value approximator with explicit gradients.
//! * [`agents`]: SARSA, Watkins-Q and TD training plus policy-driven planning.
//! * [`bench`]: synthetic and certified instances, exact minimum cover.
//! * [`io`] and [`cli`]: file formats and the command-line front end.

pub mod agents;
pub mod bench;
pub mod cli;
mod error;
pub mod io;
pub mod mesh;
pub mod planner;
pub mod value_net;
pub mod visibility;

pub use error::{Error, Result};
