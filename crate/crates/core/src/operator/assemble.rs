use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::{DiscParams, TailMode, CENTER};
use crate::cf::CostSpec;
use crate::error::{Error, Result};

/// Largest `|ω|` accepted by [`assemble`].
pub const OMEGA_LIMIT: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// `L_{s,ω}`: digits `n >= 1`.
    FullL,
    /// `F_{s,ω}`: digits `n >= 2`.
    TailF,
}

/// Dense `M × M` matrix of an operator in the basis `(z − 2/3)^j`; column `j`
/// holds the Taylor coefficients of the image of `e_j`.
#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    pub entries: DMatrix<Complex64>,
    pub s: Complex64,
    pub omega: Complex64,
    pub mu: f64,
    pub params: DiscParams,
    pub variant: Variant,
    /// Estimated size of the part of the digit series that was not captured.
    pub truncation_estimate: f64,
}

impl OperatorMatrix {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn apply(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        let x = DVector::from_column_slice(coeffs);
        (&self.entries * x).iter().copied().collect()
    }

    /// Whether the truncation estimate is within `1e-12 · ‖A‖_F`.
    pub fn truncation_ok(&self) -> bool {
        self.truncation_estimate <= 1e-12 * self.entries.norm()
    }
}

fn check_args(s: Complex64, omega: Complex64, params: &DiscParams) -> Result<()> {
    params.validate()?;
    if s.re <= 0.5 {
        return Err(Error::HalfPlane(s.re));
    }
    if omega.norm() > OMEGA_LIMIT {
        return Err(Error::OmegaOutOfRange(omega.norm()));
    }
    Ok(())
}

/// Assembles `L_{s,ω}` or `F_{s,ω}` for the cost `c` and centring `μ`.
pub fn assemble(
    s: Complex64,
    omega: Complex64,
    c: &CostSpec,
    mu: f64,
    params: &DiscParams,
    variant: Variant,
) -> Result<OperatorMatrix> {
    check_args(s, omega, params)?;
    let first = match variant {
        Variant::FullL => 1,
        Variant::TailF => 2,
    };
    let alpha = 2.0 * s + mu * omega;
    let tail = params.tail_mode != TailMode::Drop;
    if tail && alpha.re <= 1.0 {
        return Err(Error::Precondition(format!(
            "digit tail diverges for Re(2s + μω) = {}",
            alpha.re
        )));
    }
    if tail && (c.table().len() as u64) > params.digit_truncation {
        return Err(Error::InvalidParams(format!(
            "digit truncation {} shorter than the cost table",
            params.digit_truncation
        )));
    }
    let (entries, truncation_estimate) =
        build(alpha, omega, c, params, first..=params.digit_truncation, tail);
    Ok(OperatorMatrix {
        entries,
        s,
        omega,
        mu,
        params: *params,
        variant,
        truncation_estimate,
    })
}

/// The single-branch operator `f ↦ e^{ω c(n)} (z+n)^{−(2s+μω)} f(1/(z+n))`.
pub fn assemble_branch(
    digit: u64,
    s: Complex64,
    omega: Complex64,
    c: &CostSpec,
    mu: f64,
    params: &DiscParams,
) -> Result<OperatorMatrix> {
    check_args(s, omega, params)?;
    let (entries, _) = build(2.0 * s + mu * omega, omega, c, params, digit..=digit, false);
    Ok(OperatorMatrix {
        entries,
        s,
        omega,
        mu,
        params: *params,
        variant: Variant::FullL,
        truncation_estimate: 0.0,
    })
}

fn build(
    alpha: Complex64,
    omega: Complex64,
    c: &CostSpec,
    params: &DiscParams,
    digits: std::ops::RangeInclusive<u64>,
    with_tail: bool,
) -> (DMatrix<Complex64>, f64) {
    let m = params.basis_order;
    let k = m * params.oversample;
    let r = params.sample_radius;
    let n_max = params.digit_truncation;

    let table_weights: Vec<Complex64> = c.table().iter().map(|&ci| (omega * ci).exp()).collect();
    let tail_weight = (omega * c.tail()).exp();
    let weight = |n: u64| table_weights.get(n as usize - 1).copied().unwrap_or(tail_weight);
    let binom = binomials(m);

    // samples[q][j] = (B e_j)(z_q) on the circle z_q = 2/3 + r e^{2πiq/k}
    let samples: Vec<(Vec<Complex64>, f64)> = (0..k)
        .into_par_iter()
        .map(|q| {
            let z = CENTER + Complex64::from_polar(r, 2.0 * PI * q as f64 / k as f64);
            let mut g = vec![Complex64::new(0.0, 0.0); m];
            // smallest terms first
            for n in digits.clone().rev() {
                let zn = z + n as f64;
                let mut term = weight(n) * (-alpha * zn.ln()).exp();
                let h = zn.inv() - CENTER;
                for gj in g.iter_mut() {
                    *gj += term;
                    term *= h;
                }
            }
            let err = if with_tail {
                add_tail(&mut g, alpha, z + n_max as f64, tail_weight, params.tail_mode, &binom)
            } else {
                let a = alpha.re;
                tail_weight.norm() * (n_max as f64).powf(1.0 - a) / (a - 1.0).max(1e-3)
            };
            (g, err)
        })
        .collect();

    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(k);
    let mut entries = DMatrix::<Complex64>::zeros(m, m);
    let mut buf = vec![Complex64::new(0.0, 0.0); k];
    for j in 0..m {
        for (slot, (g, _)) in buf.iter_mut().zip(&samples) {
            *slot = g[j];
        }
        fft.process(&mut buf);
        let mut scale = 1.0 / k as f64;
        for row in 0..m {
            entries[(row, j)] = buf[row] * scale;
            scale /= r;
        }
    }
    let err = samples.iter().map(|s| s.1).fold(0.0, f64::max);
    (entries, err)
}

fn binomials(m: usize) -> Vec<Vec<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(m);
    for j in 0..m {
        let mut row = vec![1.0; j + 1];
        for i in 1..j {
            row[i] = rows[j - 1][i - 1] + rows[j - 1][i];
        }
        rows.push(row);
    }
    rows
}

/// Adds `Σ_{n > N} w (z+n)^{−α} e_j(1/(z+n))` to `g[j]`, where `a = z + N`.
/// Returns an estimate of what remains unaccounted for.
fn add_tail(
    g: &mut [Complex64],
    alpha: Complex64,
    a: Complex64,
    weight: Complex64,
    mode: TailMode,
    binom: &[Vec<f64>],
) -> f64 {
    let m = g.len();
    let powers = match mode {
        TailMode::Drop => return 0.0,
        TailMode::FirstOrder => 1,
        TailMode::Full => m,
    };
    // e_j(w) = Σ_k C(j,k) w^k (−2/3)^{j−k}
    let mut err = 0.0;
    let hz: Vec<Complex64> = (0..powers)
        .map(|p| {
            let (h, e) = hurwitz_tail(alpha + p as f64, a);
            err = f64::max(err, e);
            h
        })
        .collect();
    for (j, gj) in g.iter_mut().enumerate() {
        let mut acc = Complex64::new(0.0, 0.0);
        for (p, h) in hz.iter().enumerate().take(j + 1) {
            acc += binom[j][p] * (-CENTER).powi((j - p) as i32) * h;
        }
        *gj += weight * acc;
    }
    if mode == TailMode::FirstOrder && m > 1 {
        // leading neglected term: j (2/3)^{j−1} Σ (z+n)^{−α−1}, maximal near j = 2
        let (h1, _) = hurwitz_tail(alpha + 1.0, a);
        err = f64::max(err, 4.0 / 3.0 * weight.norm() * h1.norm());
    }
    err * weight.norm()
}

const BERNOULLI_OVER_FACTORIAL: [f64; 6] = [
    1.0 / 6.0 / 2.0,
    -1.0 / 30.0 / 24.0,
    1.0 / 42.0 / 720.0,
    -1.0 / 30.0 / 40_320.0,
    5.0 / 66.0 / 3_628_800.0,
    -691.0 / 2730.0 / 479_001_600.0,
];

/// `Σ_{m≥1} (a + m)^{−β}` for `Re(a) > 0`, `Re(β) > 1`, by Euler–Maclaurin
/// after shifting `a` far enough out. Returns the value and the size of the
/// last correction term as an error estimate.
pub(crate) fn hurwitz_tail(beta: Complex64, a: Complex64) -> (Complex64, f64) {
    let threshold = 4.0 * beta.norm() + 20.0;
    let mut a = a;
    let mut direct = Complex64::new(0.0, 0.0);
    while a.norm() < threshold {
        a += 1.0;
        direct += (-beta * a.ln()).exp();
    }
    let f0 = (-beta * a.ln()).exp();
    let mut sum = a * f0 / (beta - 1.0) - 0.5 * f0;
    // odd derivatives f^{(2k−1)}(0) of f(x) = (a + x)^{−β}
    let mut deriv = -beta * f0 / a;
    let mut last = 0.0;
    for (k, coeff) in BERNOULLI_OVER_FACTORIAL.iter().enumerate() {
        let term = deriv * *coeff;
        sum -= term;
        last = term.norm();
        let order = (2 * k + 1) as f64;
        deriv = deriv * (-beta - order) * (-beta - order - 1.0) / (a * a);
    }
    (direct + sum, last)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hurwitz_tail_matches_direct_sum() {
        for (beta, a) in [
            (Complex64::new(2.0, 0.0), Complex64::new(100.25, 0.0)),
            (Complex64::new(2.4, 0.7), Complex64::new(64.5, -0.3)),
            (Complex64::new(9.0, 0.0), Complex64::new(3.0, 0.4)),
        ] {
            let (fast, err) = hurwitz_tail(beta, a);
            // direct partial sum with an integral remainder far out
            let cut = 2_000_000u64;
            let mut direct = Complex64::new(0.0, 0.0);
            for m in (1..=cut).rev() {
                direct += (-beta * (a + m as f64).ln()).exp();
            }
            let end = a + cut as f64 + 0.5;
            direct += (-(beta - 1.0) * end.ln()).exp() / (beta - 1.0);
            assert!((fast - direct).norm() < 1e-12 * direct.norm(), "{beta} {a}: {fast} vs {direct}");
            assert!(err < 1e-14);
        }
    }

    #[test]
    fn binomial_rows() {
        let b = binomials(6);
        assert_eq!(b[5], vec![1.0, 5.0, 10.0, 10.0, 5.0, 1.0]);
        assert_eq!(b[0], vec![1.0]);
    }

    #[test]
    fn rejects_left_of_half_plane() {
        let c = CostSpec::constant(1.0).unwrap();
        let p = DiscParams::default();
        let zero = Complex64::new(0.0, 0.0);
        assert!(matches!(
            assemble(Complex64::new(0.5, 0.0), zero, &c, 0.8, &p, Variant::FullL),
            Err(Error::HalfPlane(_))
        ));
        assert!(matches!(
            assemble(Complex64::new(1.0, 0.0), Complex64::new(0.6, 0.0), &c, 0.8, &p, Variant::FullL),
            Err(Error::OmegaOutOfRange(_))
        ));
    }

    #[test]
    fn tail_f_is_l_minus_first_branch() {
        let c = CostSpec::new(vec![0.5, 2.0], 1.0).unwrap();
        let p = DiscParams::with_resolution(24, 2_000);
        let (s, w, mu) = (Complex64::new(1.1, 0.2), Complex64::new(0.1, -0.05), 0.7);
        let l = assemble(s, w, &c, mu, &p, Variant::FullL).unwrap();
        let f = assemble(s, w, &c, mu, &p, Variant::TailF).unwrap();
        let b1 = assemble_branch(1, s, w, &c, mu, &p).unwrap();
        let diff = &f.entries - &l.entries + &b1.entries;
        // row k is divided by r^k during recovery, so compare r^k-weighted
        let r = p.sample_radius;
        let mut worst = 0.0f64;
        for ((row, _), z) in diff.iter().enumerate().map(|(i, z)| ((i % 24, i / 24), z)) {
            worst = worst.max(z.norm() * r.powi(row as i32));
        }
        assert!(worst < 1e-12, "max weighted deviation {worst}");
    }

    #[test]
    fn truncation_budget() {
        let c = CostSpec::constant(1.0).unwrap();
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let full = assemble(one, zero, &c, 0.8, &DiscParams::default(), Variant::FullL).unwrap();
        assert!(full.truncation_ok());
        let dropped = DiscParams {
            tail_mode: TailMode::Drop,
            ..DiscParams::default()
        };
        let drop = assemble(one, zero, &c, 0.8, &dropped, Variant::FullL).unwrap();
        assert!(!drop.truncation_ok());
    }
}
