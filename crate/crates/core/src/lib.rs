//! Simulation and analysis toolkit for p-diluted disordered discrete-time
//! quantum walks.
//!
//! The library covers the full pipeline: unitary coin-and-shift evolution of a
//! two-component walker ([`walk`]), reproducible generation of statically and
//! dynamically disordered coin maps ([`disorder`]), Monte Carlo ensembles with
//! averaged distributions and variance series ([`ensemble`]), estimation of
//! the spatial decay exponent `b` and the temporal spreading exponent `2d`
//! ([`fit`]), and the continuous stretched-exponential theory used as an
//! independent reference ([`theory`]). Experiment orchestration and CSV
//! emission live in [`config`] and [`report`].

pub mod config;
pub mod disorder;
pub mod ensemble;
pub mod fit;
pub mod report;
pub mod rng;
pub mod theory;
pub mod walk;

pub use config::RunConfig;
pub use disorder::{CoinLabel, CoinMap, DisorderSpec, StaticMap};
pub use ensemble::{CountHistogram, EnsembleSummary};
pub use fit::{SpatialFit, TemporalFit};
pub use theory::TheoryProfile;
pub use walk::{CoinOperator, Distribution, WalkerState};
