//! Analysis toolkit for pairs of real symmetric matrices (`A`, `B`) viewed as
//! the Hessians of two quadratic forms cutting out a codimension-2 surface.
//!
//! The central object is the binary form `Δ(s,t) = det(sA + tB)`. Its root
//! multiplicities decide whether the surface is well-curved, and everything
//! else in the crate hangs off that classification:
//!
//! * [`pencil`]: pencil/det/binary-form arithmetic in exact rational or f64,
//! * [`roots`]: projective roots with multiplicities,
//! * [`classify`]: the curvature verdict (well-curved / flat / degenerate),
//! * [`witness`]: explicit destabilizing one-parameter subgroups with
//!   numerically verified orbit decay,
//! * [`factorize`]: the pairing-factorization LP and its Farkas certificates,
//! * [`sublevel`]: sublevel-set measure estimation and exponent fits,
//! * [`oplab`]: the discretized restricted 2-plane transform, counterexample
//!   set families and Kakeya slab experiments,
//! * [`ranges`]: decidable predicates for the predicted `(p,q,r)` exponent
//!   regions.

pub mod classify;
pub mod factorize;
pub mod fixtures;
pub mod mat;
pub mod oplab;
pub mod par;
pub mod pencil;
pub mod ranges;
pub mod roots;
pub mod scalar;
pub mod sublevel;
pub mod witness;


pub use pencil::{BinaryForm, SymmetricPencil};
pub use roots::{ProjectiveRoot, RootMultiset};
pub use scalar::{Field, Rat};
