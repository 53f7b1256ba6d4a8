//! Simulation and analysis toolkit for random η-disk geometric routing.
//!
//! Nodes of a wireless ad-hoc network are scattered by a homogeneous Poisson
//! point process. A packet held by a node whose destination is out of range
//! is handed to a relay drawn uniformly at random from the nodes inside a
//! wedge of angle `2ηπ` and radius `R`, oriented towards the destination
//! (η = 1/2 gives the half-disk scheme).
//!
//! The crate is organised bottom-up:
//!
//! * [`geometry`]: points, wedges, lens and wedge-overlap areas, wedge sampling.
//! * [`network`]: Poisson node sets over disk/square regions with a grid index.
//! * [`routing`]: localized routing under the random wedge rule and baselines.
//! * [`bounds`]: closed-form connectivity and hop-count bounds.
//! * [`walk`]: the Markov approximation of the packet-to-destination distance.
//! * [`experiments`]: Monte Carlo harness pairing estimates with the bounds.
//!
//! All randomness flows from a single `u64` seed, see [`rng`].

pub mod bounds;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod network;
pub mod quadrature;
pub mod rng;
pub mod routing;
pub mod stats;
pub mod walk;

pub use error::{Error, Result};
pub use geometry::{LocalStep, Point2D, Wedge};
pub use network::{NetworkParams, NodeId, NodeSet, RegionKind, RegionSpec};
pub use routing::{RelayPolicy, RouteOutcome, RouteStatus};
