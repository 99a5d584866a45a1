use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{entropy_constant, lambda_at, mean_constant, DiscParams};
use crate::cf::CostSpec;
use crate::error::{Error, Result};

/// Base step of the central differences; `h/2` and `h/4` are also used.
pub const DERIVATIVE_STEP: f64 = 1e-3;
/// Largest accepted disagreement between successive Richardson extrapolants.
pub const RICHARDSON_TOLERANCE: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Derivative {
    pub value: f64,
    /// `|R(h/2) − R(h)|` for the Richardson extrapolants `R`.
    pub error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaDerivatives {
    pub lambda_s: Derivative,
    pub lambda_omega: Derivative,
    pub lambda_omegaomega: Derivative,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceConstant {
    /// `σ² = 2 λ_ωω(1,0) / 𝔥(T)`.
    pub sigma2: f64,
    pub mu: f64,
    pub lambda_omegaomega: Derivative,
}

fn richardson(which: &'static str, d: [f64; 3]) -> Result<Derivative> {
    let r1 = (4.0 * d[1] - d[0]) / 3.0;
    let r2 = (4.0 * d[2] - d[1]) / 3.0;
    let error = (r2 - r1).abs();
    if !(error <= RICHARDSON_TOLERANCE) {
        return Err(Error::DerivativeQuality {
            which,
            disagreement: error,
        });
    }
    Ok(Derivative { value: r2, error })
}

fn steps() -> [f64; 3] {
    [DERIVATIVE_STEP, DERIVATIVE_STEP / 2.0, DERIVATIVE_STEP / 4.0]
}

fn omega_derivatives(c: &CostSpec, mu: f64, params: &DiscParams) -> Result<(Derivative, Derivative)> {
    let one = Complex64::new(1.0, 0.0);
    let lam = |w: f64| lambda_at(one, Complex64::new(w, 0.0), c, mu, params).map(|z| z.re);
    let centre = lam(0.0)?;
    let mut first = [0.0; 3];
    let mut second = [0.0; 3];
    for (i, h) in steps().into_iter().enumerate() {
        let (up, down) = (lam(h)?, lam(-h)?);
        first[i] = (up - down) / (2.0 * h);
        second[i] = (up - 2.0 * centre + down) / (h * h);
    }
    Ok((richardson("lambda_omega", first)?, richardson("lambda_omegaomega", second)?))
}

/// `∂λ/∂s`, `∂λ/∂ω` and `∂²λ/∂ω²` at `(s, ω) = (1, 0)` by central
/// differences on the real axes with Richardson extrapolation.
pub fn lambda_derivatives(c: &CostSpec, mu: f64, params: &DiscParams) -> Result<LambdaDerivatives> {
    let zero = Complex64::new(0.0, 0.0);
    let lam = |s: f64| lambda_at(Complex64::new(s, 0.0), zero, c, mu, params).map(|z| z.re);
    let mut ds = [0.0; 3];
    for (i, h) in steps().into_iter().enumerate() {
        ds[i] = (lam(1.0 + h)? - lam(1.0 - h)?) / (2.0 * h);
    }
    let lambda_s = richardson("lambda_s", ds)?;
    let (lambda_omega, lambda_omegaomega) = omega_derivatives(c, mu, params)?;
    Ok(LambdaDerivatives {
        lambda_s,
        lambda_omega,
        lambda_omegaomega,
    })
}

/// `σ² = 2 λ_ωω(1,0) / 𝔥(T)` with `μ` from [`mean_constant`].
pub fn variance_constant(c: &CostSpec, params: &DiscParams) -> Result<VarianceConstant> {
    let mu = mean_constant(c);
    let (_, lambda_omegaomega) = omega_derivatives(c, mu, params)?;
    Ok(VarianceConstant {
        sigma2: 2.0 * lambda_omegaomega.value / entropy_constant(),
        mu,
        lambda_omegaomega,
    })
}
