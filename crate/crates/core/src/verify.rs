//! Checks of the identities linking enumeration sums to operator power sums:
//!
//! ```text
//! (F L^k 1)(0) = Σ_{(u,v) with k+1 digits} v^{−2s} exp(ω(C(u/v) − μ log v))
//! Σ_v v^{−2s} Σ_{u} exp(ω(C − μ log v)) = Σ_{k≥0} (F L^k 1)(0)
//! ```

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cf::{cost, reconstruct, CostSpec, DigitSequence};
use crate::enumeration::{dirichlet_ring, dp_ring, map_rings, PairKind};
use crate::error::{Error, Result};
use crate::operator::{
    assemble, eval_taylor, leading_spectrum, DiscParams, OperatorMatrix, Variant, DERIVATIVE_STEP,
};
use crate::summation::ComplexSum;

/// Largest number of digit tuples [`depth_identity`] will enumerate.
pub const MAX_TUPLES: f64 = 1e8;
/// Accepted basis error for the finite depth identity.
pub const DEPTH_TOLERANCE: f64 = 1e-10;
/// Contraction margin required by [`geometric_resummation`].
pub const CONTRACTION_MARGIN: f64 = 1e-6;
/// Safety factor applied to the empirically calibrated enumeration tail.
pub const TAIL_INFLATION: f64 = 4.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityConfig {
    pub identity: String,
    pub s: Complex64,
    pub omega: Complex64,
    pub mu: f64,
    pub cost: CostSpec,
    pub depth: Option<u32>,
    pub digit_bound: Option<u64>,
    pub n_enum: Option<u64>,
    pub k_max: Option<u32>,
    pub p: Option<u32>,
    pub params: DiscParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub abs_gap: f64,
    /// Documented bound the gap must respect.
    pub bound: f64,
    /// Individual contributions to `bound`, by name.
    pub bound_parts: Vec<(String, f64)>,
    pub config: IdentityConfig,
}

impl IdentityReport {
    fn new(lhs: Complex64, rhs: Complex64, bound_parts: Vec<(String, f64)>, config: IdentityConfig) -> Self {
        Self {
            lhs,
            rhs,
            abs_gap: (lhs - rhs).norm(),
            bound: bound_parts.iter().map(|p| p.1).sum(),
            bound_parts,
            config,
        }
    }

    pub fn passed(&self) -> bool {
        self.abs_gap <= self.bound
    }

    pub fn relative_gap(&self) -> f64 {
        self.abs_gap / self.rhs.norm().max(f64::MIN_POSITIVE)
    }
}

fn unit(m: usize) -> Vec<Complex64> {
    let mut e0 = vec![Complex64::new(0.0, 0.0); m];
    e0[0] = Complex64::new(1.0, 0.0);
    e0
}

/// `(F L^depth 1)(0)` against the direct sum over digit tuples
/// `(a_1, …, a_{depth+1})` with `1 <= a_i <= A`, `a_{depth+1} >= 2`. Both
/// sides keep only digits up to `A`, so the identity is exact and the gap is
/// pure basis error.
pub fn depth_identity(
    depth: u32,
    digit_bound: u64,
    s: Complex64,
    omega: Complex64,
    c: &CostSpec,
    mu: f64,
    basis_order: usize,
) -> Result<IdentityReport> {
    if digit_bound < 2 {
        return Err(Error::InvalidParams(format!("digit bound {digit_bound} < 2")));
    }
    let tuples = (digit_bound as f64).powi(depth as i32 + 1);
    if tuples > MAX_TUPLES {
        return Err(Error::CombinatorialExplosion(tuples));
    }
    let params = DiscParams::digit_truncated(basis_order, digit_bound);
    let l = assemble(s, omega, c, mu, &params, Variant::FullL)?;
    let f = assemble(s, omega, c, mu, &params, Variant::TailF)?;
    let mut x = unit(basis_order);
    for _ in 0..depth {
        x = l.apply(&x);
    }
    let lhs = eval_taylor(&f.apply(&x), Complex64::new(0.0, 0.0));

    let rhs = tuple_sum(depth, digit_bound, s, omega, c, mu)?;
    let config = IdentityConfig {
        identity: "depth".into(),
        s,
        omega,
        mu,
        cost: c.clone(),
        depth: Some(depth),
        digit_bound: Some(digit_bound),
        n_enum: None,
        k_max: None,
        p: None,
        params,
    };
    Ok(IdentityReport::new(lhs, rhs, vec![("basis".into(), DEPTH_TOLERANCE)], config))
}

fn tuple_sum(depth: u32, a_max: u64, s: Complex64, omega: Complex64, c: &CostSpec, mu: f64) -> Result<Complex64> {
    let len = depth as usize + 1;
    let first_digits: Vec<u64> = if len == 1 { (2..=a_max).collect() } else { (1..=a_max).collect() };
    let blocks: Vec<Result<ComplexSum>> = first_digits
        .into_par_iter()
        .map(|a1| {
            let mut acc = ComplexSum::new();
            let mut digits = vec![1u64; len];
            digits[0] = a1;
            if len > 1 {
                digits[len - 1] = 2;
            }
            loop {
                acc.add(tuple_weight(&digits, s, omega, c, mu)?);
                // odometer over positions 1..len, last position starting at 2
                let mut pos = len - 1;
                loop {
                    if pos == 0 {
                        return Ok(acc);
                    }
                    if digits[pos] < a_max {
                        digits[pos] += 1;
                        break;
                    }
                    digits[pos] = if pos == len - 1 { 2 } else { 1 };
                    pos -= 1;
                }
            }
        })
        .collect();
    let mut total = ComplexSum::new();
    for block in blocks {
        total.merge(&block?);
    }
    Ok(total.value())
}

fn tuple_weight(digits: &[u64], s: Complex64, omega: Complex64, c: &CostSpec, mu: f64) -> Result<Complex64> {
    let seq = DigitSequence::new(digits.to_vec())?;
    let v = reconstruct(&seq)?.denom();
    // h_{a_1} ∘ … ∘ h_{a_k} has matrix Π [[0,1],[1,a_i]] = [[p', p],[q', q]];
    // its derivative at 0 is ±1/q², so q must be the denominator.
    let (mut q_prev, mut q) = (0u128, 1u128);
    for &a in digits {
        (q_prev, q) = (q, q_prev + a as u128 * q);
    }
    if q != v as u128 {
        return Err(Error::DenominatorLaw {
            digits: digits.to_vec(),
            delta: q as u64,
            v,
        });
    }
    let log_v = (v as f64).ln();
    Ok((-2.0 * s * log_v + omega * (cost(&seq, c) - mu * log_v)).exp())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Resummation {
    /// `Σ_{k ≤ k_max} (F L^k 1)(0)`.
    pub partial_sum: Complex64,
    /// Bound on `Σ_{k > k_max}` from the last term and `|λ₁|`.
    pub tail_bound: f64,
    /// `(F (I − L)^{-1} 1)(0)`.
    pub resolvent: Complex64,
    pub lambda1: Complex64,
    /// Successive term ratios `|t_{k+1}| / |t_k|`.
    pub ratios: Vec<f64>,
}

struct Pair {
    l: OperatorMatrix,
    f: OperatorMatrix,
}

fn pair(s: Complex64, omega: Complex64, c: &CostSpec, mu: f64, params: &DiscParams) -> Result<Pair> {
    Ok(Pair {
        l: assemble(s, omega, c, mu, params, Variant::FullL)?,
        f: assemble(s, omega, c, mu, params, Variant::TailF)?,
    })
}

fn resolvent_value(p: &Pair) -> Result<Complex64> {
    let m = p.l.dim();
    let a = DMatrix::identity(m, m) - &p.l.entries;
    let x = a
        .lu()
        .solve(&DVector::from_column_slice(&unit(m)))
        .ok_or(Error::Eigensolver)?;
    let y: Vec<Complex64> = x.iter().copied().collect();
    Ok(eval_taylor(&p.f.apply(&y), Complex64::new(0.0, 0.0)))
}

/// `Σ_k (F_{s,ω} L^k_{s,ω} 1)(0)` by partial sums up to `k_max`, with a
/// geometric tail bound and the resolvent value for comparison.
pub fn geometric_resummation(
    s: Complex64,
    omega: Complex64,
    c: &CostSpec,
    mu: f64,
    k_max: u32,
    params: &DiscParams,
) -> Result<Resummation> {
    let p = pair(s, omega, c, mu, params)?;
    let lambda1 = leading_spectrum(&p.l)?.lambda1;
    let rho = lambda1.norm();
    if rho >= 1.0 - CONTRACTION_MARGIN {
        return Err(Error::NotContracting(rho));
    }
    let zero = Complex64::new(0.0, 0.0);
    let mut x = unit(params.basis_order);
    let mut acc = ComplexSum::new();
    let mut terms = Vec::with_capacity(k_max as usize + 1);
    for k in 0..=k_max {
        if k > 0 {
            x = p.l.apply(&x);
        }
        let t = eval_taylor(&p.f.apply(&x), zero);
        acc.add(t);
        terms.push(t.norm());
    }
    let last = *terms.last().unwrap();
    let ratios = terms.windows(2).map(|w| w[1] / w[0]).collect();
    Ok(Resummation {
        partial_sum: acc.value(),
        tail_bound: 2.0 * last * rho / (1.0 - rho),
        resolvent: resolvent_value(&p)?,
        lambda1,
        ratios,
    })
}

/// Enumeration sum through `n` and an inflated bound on `Σ_{v > n}`, fitted
/// as `Ĉ v^{1−2σ}` to the rings in `(7n/8, n]`.
fn enumeration_with_tail(rings: &[Complex64], n: u64, s: Complex64) -> Result<(Complex64, f64)> {
    let sigma = s.re;
    if sigma <= 1.0 {
        return Err(Error::HalfPlane(sigma));
    }
    let mut acc = ComplexSum::new();
    for &z in rings {
        acc.add(z);
    }
    // rings[i] belongs to v = i + 2
    let lo = (n - n / 8).max(2);
    let calib: Vec<f64> = (lo..=n)
        .map(|v| rings[(v - 2) as usize].norm() * (v as f64).powf(2.0 * sigma - 1.0))
        .collect();
    let c_hat = calib.iter().sum::<f64>() / calib.len().max(1) as f64;
    let tail = TAIL_INFLATION * c_hat * (n as f64).powf(2.0 - 2.0 * sigma) / (2.0 * sigma - 2.0);
    Ok((acc.value(), tail))
}

/// The Dirichlet series truncated at `v <= n_enum` against the operator
/// resummation with `k_max` terms.
pub fn series_identity(
    s: Complex64,
    omega: Complex64,
    c: &CostSpec,
    mu: f64,
    n_enum: u64,
    k_max: u32,
    params: &DiscParams,
) -> Result<IdentityReport> {
    if n_enum < 2 {
        return Err(Error::InvalidBound(n_enum));
    }
    if s.re <= 1.0 {
        return Err(Error::HalfPlane(s.re));
    }
    let rings = map_rings(PairKind::Reduced, 2..=n_enum, c, |v, h| dirichlet_ring(s, omega, v, h, mu));
    let (lhs, enum_tail) = enumeration_with_tail(&rings, n_enum, s)?;
    let res = geometric_resummation(s, omega, c, mu, k_max, params)?;
    let config = IdentityConfig {
        identity: "series".into(),
        s,
        omega,
        mu,
        cost: c.clone(),
        depth: None,
        digit_bound: None,
        n_enum: Some(n_enum),
        k_max: Some(k_max),
        p: None,
        params: *params,
    };
    let parts = vec![
        ("enumeration_tail".into(), enum_tail),
        ("operator_tail".into(), res.tail_bound),
        ("resolvent_mismatch".into(), (res.partial_sum - res.resolvent).norm()),
    ];
    Ok(IdentityReport::new(lhs, res.partial_sum, parts, config))
}

/// `D_p(s)` truncated at `n_enum` against `∂^p/∂ω^p` of the resolvent at
/// `ω = 0`, taken by central differences with Richardson extrapolation.
pub fn dp_identity(
    p: u32,
    s: Complex64,
    c: &CostSpec,
    mu: f64,
    n_enum: u64,
    params: &DiscParams,
) -> Result<IdentityReport> {
    if p > 2 {
        return Err(Error::MomentOrder(p));
    }
    if n_enum < 2 {
        return Err(Error::InvalidBound(n_enum));
    }
    if s.re <= 1.0 {
        return Err(Error::HalfPlane(s.re));
    }
    let rings = map_rings(PairKind::Reduced, 2..=n_enum, c, |v, h| dp_ring(s, p, v, h, mu));
    let (lhs, enum_tail) = enumeration_with_tail(&rings, n_enum, s)?;

    let at = |w: f64| -> Result<Complex64> {
        let pr = pair(s, Complex64::new(w, 0.0), c, mu, params)?;
        let rho = leading_spectrum(&pr.l)?.lambda1.norm();
        if rho >= 1.0 - CONTRACTION_MARGIN {
            return Err(Error::NotContracting(rho));
        }
        resolvent_value(&pr)
    };
    let centre = at(0.0)?;
    let (rhs, diff_err) = if p == 0 {
        (centre, 0.0)
    } else {
        let mut d = [Complex64::new(0.0, 0.0); 3];
        for (i, h) in [DERIVATIVE_STEP, DERIVATIVE_STEP / 2.0, DERIVATIVE_STEP / 4.0].into_iter().enumerate() {
            let (up, down) = (at(h)?, at(-h)?);
            d[i] = if p == 1 {
                (up - down) / (2.0 * h)
            } else {
                (up - 2.0 * centre + down) / (h * h)
            };
        }
        let r1 = (4.0 * d[1] - d[0]) / 3.0;
        let r2 = (4.0 * d[2] - d[1]) / 3.0;
        (r2, (r2 - r1).norm())
    };
    let config = IdentityConfig {
        identity: "dp".into(),
        s,
        omega: Complex64::new(0.0, 0.0),
        mu,
        cost: c.clone(),
        depth: None,
        digit_bound: None,
        n_enum: Some(n_enum),
        k_max: None,
        p: Some(p),
        params: *params,
    };
    let parts = vec![
        ("enumeration_tail".into(), enum_tail),
        ("differencing".into(), diff_err),
    ];
    Ok(IdentityReport::new(lhs, rhs, parts, config))
}
