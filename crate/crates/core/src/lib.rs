//! Sub-Poisson variance proxies and the tools around them.
//!
//! A centered random variable `X` is upper sub-Poisson with proxy `sigma2`
//! when `log E exp(lambda X) <= sigma2 * phi(lambda)` for all `lambda >= 0`,
//! where `phi(x) = e^x - 1 - x`. The crate computes optimal proxies
//! numerically ([`proxy`]), turns proxies into Bennett and Bernstein tail
//! bounds ([`bounds`]), combines proxies through the closure rules
//! ([`closure`]), relates them to Orlicz norms ([`orlicz`]), and checks all of
//! it against samples ([`empirical`]).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod cli;
pub mod closure;
pub mod distributions;
pub mod empirical;
pub mod error;
pub mod extended;
pub mod mgf;
pub mod orlicz;
pub mod proxy;
pub mod special;

pub use bounds::{BoundCurve, BoundKind};
pub use closure::{BoundedShape, ProxyCertificate, Rule};
pub use distributions::{catalog, AnalyticProxies, Distribution};
pub use empirical::{SampleSet, VerificationReport};
pub use error::{Error, Result};
pub use extended::ExtendedReal;
pub use mgf::{CenteredLogMgf, FiniteLaw, Negated, ScaleMixture};
pub use orlicz::OrliczNorm;
pub use proxy::{ProxyResult, Side, SolverOptions};
