//! Weighted Gauss–Kuzmin–Wirsing transfer operators
//!
//! ```text
//! (L_{s,ω} f)(z) = Σ_{n≥1} e^{ω c(n)} (z + n)^{−(2s + μω)} f(1/(z + n))
//! (F_{s,ω} f)(z) = same sum over n ≥ 2
//! ```
//!
//! discretized on the truncated Taylor basis `e_j(z) = (z − 2/3)^j`, together
//! with the constants of the central limit theorem for digit costs.

mod assemble;
mod birkhoff;
mod derivatives;
mod spectrum;

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cf::CostSpec;
use crate::error::{Error, Result};

pub use assemble::{assemble, assemble_branch, OperatorMatrix, Variant};
pub use birkhoff::{variance_birkhoff_estimate, BirkhoffEstimate};
pub use derivatives::{
    lambda_derivatives, variance_constant, Derivative, LambdaDerivatives, VarianceConstant,
    DERIVATIVE_STEP, RICHARDSON_TOLERANCE,
};
pub use spectrum::{eigenvalues, lambda_at, leading_spectrum, spectral_radius, SpectralData, GAP_TOLERANCE};

/// Expansion centre of the Taylor basis.
pub const CENTER: f64 = 2.0 / 3.0;

/// How the digits `n > N_max` of the operator series are handled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailMode {
    /// Keep only `n <= N_max`.
    Drop,
    /// Approximate `f(1/(z+n))` by `f(0)` beyond `N_max`.
    FirstOrder,
    /// Expand `e_j(1/(z+n))` binomially and sum every power of `1/(z+n)`
    /// beyond `N_max` in closed form.
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscParams {
    /// Number of Taylor coefficients `M`.
    pub basis_order: usize,
    /// Radius of the sampling circle around `2/3`.
    pub sample_radius: f64,
    /// Samples per coefficient on the circle.
    pub oversample: usize,
    /// `N_max`: digits summed explicitly.
    pub digit_truncation: u64,
    pub tail_mode: TailMode,
}

impl Default for DiscParams {
    fn default() -> Self {
        Self {
            basis_order: 32,
            sample_radius: 0.5,
            oversample: 2,
            digit_truncation: 10_000,
            tail_mode: TailMode::Full,
        }
    }
}

impl DiscParams {
    pub fn with_resolution(basis_order: usize, digit_truncation: u64) -> Self {
        Self {
            basis_order,
            digit_truncation,
            ..Self::default()
        }
    }

    /// Exactly the digits `1..=digit_bound`, nothing beyond. Used where an
    /// enumeration over bounded digit tuples must match the operator term by
    /// term, so the `N_max >= 64` floor does not apply.
    pub fn digit_truncated(basis_order: usize, digit_bound: u64) -> Self {
        Self {
            basis_order,
            digit_truncation: digit_bound,
            tail_mode: TailMode::Drop,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        if self.basis_order < 4 {
            return bad(format!("basis order {} < 4", self.basis_order));
        }
        if !(self.sample_radius > 0.0 && self.sample_radius < 1.0) {
            return bad(format!("sample radius {} outside (0, 1)", self.sample_radius));
        }
        if self.oversample < 2 {
            return bad(format!("oversample factor {} < 2", self.oversample));
        }
        if self.tail_mode != TailMode::Drop && self.digit_truncation < 64 {
            return bad(format!("digit truncation {} < 64", self.digit_truncation));
        }
        if self.digit_truncation < 2 {
            return bad(format!("digit truncation {} < 2", self.digit_truncation));
        }
        Ok(())
    }
}

/// `𝔥(T) = π²/(6 log 2)`, the entropy of the Gauss map.
pub fn entropy_constant() -> f64 {
    PI * PI / (6.0 * LN_2)
}

/// The mean `μ = (2/𝔥(T)) Σ_n c(n) log₂((n+1)²/(n(n+2)))`.
///
/// Table entries are summed term by term; the constant tail telescopes to
/// `log₂((K+2)/(K+1))` for a table of length `K`.
pub fn mean_constant(c: &CostSpec) -> f64 {
    let mass = |n: f64| (((n + 1.0) * (n + 1.0)) / (n * (n + 2.0))).log2();
    let k = c.table().len() as f64;
    let mut total = c.tail() * ((k + 2.0) / (k + 1.0)).log2();
    for (i, &ci) in c.table().iter().enumerate() {
        total += ci * mass(i as f64 + 1.0);
    }
    2.0 * total / entropy_constant()
}

/// `𝔣₀ = (F_{1,0} ξ)(0) = (1/log 2) Σ_{n≥2} 1/(n(n+1)) = 1/(2 log 2)`.
pub fn f0_constant() -> f64 {
    0.5 / LN_2
}

/// `(F_{1,0} ξ)(0)` evaluated through the discretized operator.
pub fn f0_discretized(params: &DiscParams) -> Result<f64> {
    let ones = CostSpec::constant(1.0)?;
    let one = Complex64::new(1.0, 0.0);
    let f = assemble(one, Complex64::new(0.0, 0.0), &ones, 0.0, params, Variant::TailF)?;
    let image = f.apply(&xi_coefficients(params.basis_order));
    Ok(eval_taylor(&image, Complex64::new(0.0, 0.0)).re)
}

/// Taylor coefficients about `2/3` of the invariant density
/// `ξ(z) = 1/((log 2)(1 + z))`.
pub fn xi_coefficients(m: usize) -> Vec<Complex64> {
    let ratio: f64 = -3.0 / 5.0;
    (0..m)
        .map(|k| Complex64::new(0.6 / LN_2 * ratio.powi(k as i32), 0.0))
        .collect()
}

/// Evaluates `Σ_k coeffs[k] (z − 2/3)^k`.
pub fn eval_taylor(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    let w = z - CENTER;
    coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &a| acc * w + a)
}

/// Taylor coefficients about `2/3` of the polynomial `Σ_k mono[k] x^k`.
pub fn monomial_to_taylor(mono: &[f64]) -> Vec<Complex64> {
    // x^k = Σ_j C(k,j) (2/3)^{k−j} (x − 2/3)^j
    let mut out = vec![0.0; mono.len()];
    for (k, &a) in mono.iter().enumerate() {
        let mut binom = 1.0;
        for (j, slot) in out.iter_mut().enumerate().take(k + 1) {
            *slot += a * binom * CENTER.powi((k - j) as i32);
            binom = binom * (k - j) as f64 / (j + 1) as f64;
        }
    }
    out.into_iter().map(|x| Complex64::new(x, 0.0)).collect()
}
