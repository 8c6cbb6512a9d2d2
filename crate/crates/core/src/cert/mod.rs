//! Exact algebra behind the optimality certificate: Bézout solves, the
//! `g·h` split of a common factor, square roots modulo a form, SOS
//! multipliers, and the certificate itself.

pub mod bezout;
pub mod certificate;
pub mod multiplier;
pub mod split;
pub mod sqrt;

pub use bezout::{bezout_solve, solve_exact};
pub use certificate::{
    certificate_build, certificate_build_with, certificate_verify, factor_h, form_from_squares, sampled_norm_sq, Certificate,
    CertificateCheck, MAX_CERT_DEGREE,
};
pub use multiplier::{sos_multiplier, sos_multiplier_with, sum_of_squares, SqrtOptions};
pub use split::{check_split, split_gcd, GcdSplit};
pub use sqrt::{refine_sqrt_mod, round_digits, sqrt_mod, sqrt_residual};
