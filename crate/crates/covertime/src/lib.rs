//! Cover-time estimation for dense graphs.
//!
//! The pipeline estimates the vertex cover time of a connected graph with
//! minimum degree at least `theta * n` through three tiers:
//!
//! 1. when the graph's conductance is high, the cover time is the root of an
//!    explicit transcendental equation over the stationary distribution
//!    ([`estimator::solve_tstar`]);
//! 2. when conductance is low but the walk still mixes much faster than it
//!    covers, the graph is partitioned into a bounded number of dense,
//!    high-conductance blocks ([`partition`]), each block gets its own
//!    estimate through an excursion-weighted collapsed chain ([`collapsed`]),
//!    and the block estimates combine through their stationary masses;
//! 3. otherwise block-move stopping times measured on simulated walks give a
//!    two-sided interval with ratio `2 (1 + o(1))` ([`estimator::theorem3_bounds`]).
//!
//! Every analytic quantity is backed by an independent check: exact
//! taboo-matrix computations for first-visit probabilities, brute-force cut
//! enumeration for conductance, and Monte Carlo walk simulation for cover
//! times and collapsed-chain transitions.
//!
//! With the default `parallel` feature, trial fan-out and subset enumeration
//! run on rayon; disabling the feature yields a fully sequential build with
//! identical results.

pub mod collapsed;
pub mod error;
pub mod estimator;
pub mod graph;
pub mod markov;
pub mod partition;
pub mod rng;
pub mod spectral;
pub mod walker;

pub(crate) mod exec;

pub use error::{Error, Result};
pub use graph::{generate, Cut, DensityWitness, Family, Graph, LabeledGraph};
pub use partition::Partition;
