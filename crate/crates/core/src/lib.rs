//! atbench: a simulation benchmark harness for discrete auto-tuning
//! optimizers.
//!
//! The crate evaluates optimization algorithms against exhaustively
//! pre-measured (or synthetic) tuning search spaces: evaluations are served
//! from a cache while a simulated clock charges each configuration's
//! measured evaluation cost. Results are scored against an analytic random
//! search baseline on a fixed time grid, yielding baseline-relative
//! performance curves and aggregate scores that are comparable across
//! search spaces.

pub mod cache;
pub mod cli;
pub mod methodology;
pub mod opt;
pub mod sim;
pub mod space;

#[cfg(test)]
pub(crate) mod test_support;
