//! Exact arithmetic for finite quadratic modules, Weil representations,
//! and truncated q-expansions of lattice theta functions and Jacobi forms.
//!
//! Everything in this crate is computed over `Q` or over cyclotomic fields
//! `Q(zeta_N)`; no floating point is used anywhere. Identities between
//! q-expansions are therefore checked as exact equalities of finite data,
//! valid inside an explicitly tracked truncation window.
//!
//! Module map:
//! - [`exact`]: rationals, cyclotomic numbers, elements of `Q(sqrt(-d))`.
//! - [`linalg`]: integer Smith/Hermite normal forms and rational matrices.
//! - [`lattice`]: even `Z`-lattices and Hermitian lattices over an order,
//!   duals, trace forms, discriminant groups.
//! - [`fqm`]: finite quadratic modules, subgroups, quotients, Gauss sums.
//! - [`weil`]: Weil representation matrices, `U(1,1)(Z)` words, arrow
//!   operators.
//! - [`theta`]: exact short-vector enumeration and theta q-expansions.
//! - [`jacobi`]: Jacobi q-expansions, theta decomposition, periodicity
//!   checks and the descent theorems.
//! - [`matrix_index`]: Jacobi forms whose index is a (possibly
//!   non-integral, semidefinite) Gram matrix together with a quadratic map
//!   into a discriminant form.

pub mod exact;
pub mod fqm;
pub mod jacobi;
pub mod lattice;
pub mod linalg;
pub mod matrix_index;
pub mod theta;
pub mod weil;

mod error;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
