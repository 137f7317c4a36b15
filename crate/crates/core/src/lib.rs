//! Arbitrary-precision spectral solver for the modular pair of Harper-type
//! difference operators obtained by quantizing the mirror curve of local
//! P¹×P¹, at complex Planck constant ħ = 2πb² with b = e^{iθ} and at the
//! self-dual point ħ = 2π.
//!
//! The layers, bottom to top:
//!
//! * [`precision`]: working precision, the nome q, q-Pochhammer symbols, θ₁.
//! * [`chi`]: the regular solution χ_q(u, ε) of
//!   `f(u/q²) + q²u² f(q²u) = (1 - εu + u²) f(u)` and its partners.
//! * [`transfer`]: an independent matrix-product evaluation of χ and the
//!   dynamics of the ratio R(u) = χ(u/q²)/χ(u).
//! * [`spectral`]: the Wronskian, ε(σ) on each Riemann sheet, quantization.
//! * [`eigenfunction`]: the eigenfunction ψ(x) at quantized points.
//! * [`selfdual`]: the b = 1 case through period integrals on
//!   cos 2πx + cos 2πy = ε/2.

pub mod chi;
pub mod eigenfunction;
pub mod error;
pub mod precision;
pub mod quadrature;
pub mod selfdual;
pub mod spectral;
pub mod transfer;

pub use error::{Error, Result};
pub use precision::{make_context, ModularParam, PrecCtx};
