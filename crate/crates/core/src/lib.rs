//! Graphical Dirichlet process (GDP) mixture models for grouped data whose
//! groups are linked by a known DAG.
//!
//! The crate is organized bottom-up:
//!
//! * [`dag`]: graph validation, root augmentation, layering, ancestor
//!   multisets and hypernode chains.
//! * [`model`]: NIW base measure, Gaussian components, datasets,
//!   configuration and the gamma-DAG concentration prior.
//! * [`prior`]: forward simulators (stick-breaking, finite mixture,
//!   explicit parent mixtures, restaurant process) and synthetic data.
//! * [`simplex`]: adaptive Metropolis–Hastings on the simplex in
//!   log-coordinates.
//! * [`gibbs`]: the blocked Gibbs sampler.
//! * [`metrics`]: co-clustering, least-squares point estimates, ARI,
//!   internal validation indices and k-means.
//! * [`scenario`]: the named synthetic scenarios.
//! * [`diagnostics`]: Monte Carlo standard errors.

pub mod dag;
pub mod diagnostics;
pub mod dist;
pub mod gibbs;
pub mod metrics;
pub mod model;
pub mod prior;
pub mod scenario;
pub mod simplex;
