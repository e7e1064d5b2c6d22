//! Numerical building blocks: Gaussian tail function and its inverse,
//! and an adaptive Gauss-Kronrod integrator.

pub mod quadrature;
pub mod special;

pub use quadrature::{integrate, QuadError, QuadResult};
pub use special::{erf, erfc, gaussian_pdf, q_function, q_inverse_checked};
