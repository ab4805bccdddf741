//! Decides whether the nonsplit central extension `Z_r.PSL_n(q)` embeds in the
//! permutation wreath product `Z_r ≀ PSL_n(q)` over the points of `P^{n-1}(q)`.
//!
//! Three independent routes are provided: the arithmetic criterion
//! ([`embed::arithmetic_decide`]), an explicit cocycle construction of the
//! embedding ([`embed::construct_embedding`]), and an order-`r^2` obstruction
//! element ([`embed::obstruction_witness`]).

pub mod cert;
pub mod cocycle;
pub mod embed;
pub mod error;
pub mod ff;
pub mod grp;
pub mod linalg;
pub mod permmod;

pub use error::{Error, Result};
