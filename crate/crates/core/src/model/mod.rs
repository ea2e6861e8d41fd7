//! Trap parameters, derived couplings and Hamiltonian builders.

mod hamiltonians;
mod params;
pub mod special;

pub use hamiltonians::{build_h0, build_h_lab, build_h_ld, build_h_r, build_h_s};
pub use params::{derive_couplings, DerivedCouplings, TrapParams, LAMB_DICKE_WARN};
pub use special::{assoc_laguerre, coupling_fg, kummer_1f1, laguerre};
