//! Daily news-sentiment backtesting: score articles per asset, aggregate
//! open-to-open sentiment onto a 0-100 scale, trade Buy/Neutral/Sell lists
//! with equal-value sizing and short selling, and report the full
//! risk/return metric suite against a Buy&Hold benchmark.

pub mod aggregation;
pub mod cli;
pub mod engine;
pub mod error;
pub mod execution;
pub mod marketdata;
pub mod metrics;
pub mod newsfeed;
pub mod strategy;
pub mod synth;

/// Scalar type used across the pipeline. Metric kernels are generic over
/// num-traits floats; everything calendar- or IO-bound pins this alias.
pub type Scalar = f64;
pub type Price = Scalar;
pub type Currency = Scalar;

pub use error::{Error, Result};
