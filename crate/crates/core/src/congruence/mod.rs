//! Matrices over `O_d` and its finite quotients, congruence levels, and the
//! systole certificate.

mod factor;
mod level;
mod mat;
mod systole;

pub use factor::{
    element_of_norm, factor_modulus, is_prime_element, is_rational_prime, sl2_order,
    sl2_order_brute_force, sl2_order_naive, splitting, PrimePower, ResidueRing, Splitting,
};
pub use level::*;
pub use mat::Mat2;
pub use systole::*;
