//! Certified upper bounds on the volume of compact basic semialgebraic sets.
//!
//! The bound comes from a hierarchy of semidefinite programs: a polynomial
//! `p` of total degree at most `d` is required to dominate the indicator
//! function of the target set `K` (via weighted sum-of-squares certificates
//! over `K` and an outer domain `X` with known moments), and `∫_X p` is
//! minimized. The optimal values decrease monotonically to `vol K` as the
//! degree grows.
//!
//! The crate is organized around that pipeline:
//!
//! * [`poly`] — multivariate polynomials over monomial or tensor-Chebyshev
//!   bases, exact arithmetic and basis conversion.
//! * [`semialg`] — set descriptions, standing-assumption checks, and
//!   closed-form Lebesgue moments over boxes and balls.
//! * [`sdp`] — a dense block-diagonal primal-dual interior-point solver,
//!   independent residual checks, and SDPA sparse export.
//! * [`hierarchy`] — assembly of the degree-`d` relaxation, certificate
//!   verification, and the degree sweep.
//! * [`approx`] — one-sided L1 approximation by linear programming, averaged
//!   modulus of continuity and tube-volume estimators, closed-form degree
//!   bounds, and convergence-rate fitting.
//! * [`montecarlo`] — seeded, reproducible uniform sampling and reference
//!   volume estimates with confidence intervals.

pub mod approx;
pub mod hierarchy;
pub mod montecarlo;
pub mod poly;
pub mod sdp;
pub mod semialg;
