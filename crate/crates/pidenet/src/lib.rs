//! Jump-diffusion simulation and ReLU-network compilation of Euler sample paths.
//!
//! The library has two halves. The first simulates SDEs with jumps on a time
//! grid: Euler-Maruyama with compensated Poisson jumps, small-jump truncation,
//! network coefficients and a Monte Carlo replacement for the compensator
//! integral. The second compiles one frozen draw of the driving randomness
//! into a single feedforward ReLU network whose forward pass reproduces the
//! simulated path map `x -> X_T(x)` and, composed with a payoff network,
//! approximates option prices as a function of spot and strike.

pub mod builder;
pub mod error;
pub mod model;
pub mod pricing;
pub mod relu_net;
pub mod rng;
pub mod simulate;
pub mod stats;

pub use error::PidenetError;
pub use relu_net::ReluNetwork;
