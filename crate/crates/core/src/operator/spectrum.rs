use nalgebra::{DMatrix, DVector, Schur};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{assemble, eval_taylor, DiscParams, OperatorMatrix, Variant};
use crate::cf::CostSpec;
use crate::error::{Error, Result};

/// Minimum separation `|λ₁| − |λ₂|` accepted as a spectral gap.
pub const GAP_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralData {
    pub lambda1: Complex64,
    /// Taylor coefficients of the leading eigenfunction, scaled so its value
    /// at `z = 0` is 1.
    pub eigvec: Vec<Complex64>,
    pub lambda2_modulus: f64,
    /// `‖A v − λ₁ v‖ / ‖v‖`.
    pub residual: f64,
}

/// All eigenvalues, largest modulus first.
pub fn eigenvalues(a: &DMatrix<Complex64>) -> Result<Vec<Complex64>> {
    let schur = Schur::try_new(a.clone(), f64::EPSILON, 0).ok_or(Error::Eigensolver)?;
    let (_, t) = schur.unpack();
    let mut ev: Vec<Complex64> = t.diagonal().iter().copied().collect();
    if ev.iter().any(|z| !z.is_finite()) {
        return Err(Error::Eigensolver);
    }
    ev.sort_by(|x, y| y.norm().total_cmp(&x.norm()));
    Ok(ev)
}

pub fn spectral_radius(a: &OperatorMatrix) -> Result<f64> {
    Ok(eigenvalues(&a.entries)?[0].norm())
}

/// Leading eigenvalue, its eigenfunction and the subdominant modulus. Fails
/// when the two largest moduli are within [`GAP_TOLERANCE`].
pub fn leading_spectrum(a: &OperatorMatrix) -> Result<SpectralData> {
    let ev = eigenvalues(&a.entries)?;
    let lambda1 = ev[0];
    let lambda2_modulus = ev.get(1).map_or(0.0, |z| z.norm());
    if lambda1.norm() - lambda2_modulus < GAP_TOLERANCE {
        return Err(Error::NoSpectralGap {
            lambda1: lambda1.norm(),
            lambda2: lambda2_modulus,
        });
    }
    let v = inverse_iteration(&a.entries, lambda1)?;
    let residual = (&a.entries * &v - &v * lambda1).norm() / v.norm();
    Ok(SpectralData {
        lambda1,
        eigvec: normalize_at_zero(v.iter().copied().collect()),
        lambda2_modulus,
        residual,
    })
}

fn inverse_iteration(a: &DMatrix<Complex64>, lambda: Complex64) -> Result<DVector<Complex64>> {
    let n = a.nrows();
    let mut x = DVector::from_element(n, Complex64::new(1.0, 0.0));
    for bump in [1e-13, 1e-11, 1e-9] {
        let shift = lambda + lambda.norm().max(1e-300) * bump;
        let lu = (a - DMatrix::identity(n, n) * shift).lu();
        let mut ok = true;
        for _ in 0..3 {
            match lu.solve(&x) {
                Some(y) if y.iter().all(|z| z.is_finite()) => {
                    let norm = y.norm();
                    x = y / Complex64::new(norm, 0.0);
                }
                _ => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            return Ok(x);
        }
    }
    Err(Error::Eigensolver)
}

fn normalize_at_zero(mut v: Vec<Complex64>) -> Vec<Complex64> {
    let at_zero = eval_taylor(&v, Complex64::new(0.0, 0.0));
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let scale = if at_zero.norm() > 1e-12 * norm {
        at_zero.inv()
    } else {
        // value at 0 vanishes: fall back to unit norm with the largest
        // component real and positive
        let big = v.iter().copied().max_by(|a, b| a.norm().total_cmp(&b.norm())).unwrap();
        big.conj() / (big.norm() * norm)
    };
    v.iter_mut().for_each(|z| *z *= scale);
    v
}

/// `λ₁(s, ω)` of the assembled `L_{s,ω}`.
pub fn lambda_at(s: Complex64, omega: Complex64, c: &CostSpec, mu: f64, params: &DiscParams) -> Result<Complex64> {
    let a = assemble(s, omega, c, mu, params, Variant::FullL)?;
    Ok(leading_spectrum(&a)?.lambda1)
}
