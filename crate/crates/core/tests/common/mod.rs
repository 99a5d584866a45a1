#![allow(dead_code)]

use euclid_core::cf::CostSpec;

/// Gauss–Legendre nodes and weights on `[-1, 1]` by Newton iteration on `P_n`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let k = k as f64;
                (p0, p1) = (p1, ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k);
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// Composite Gauss–Legendre on `[a, b]` with `pieces` panels of `order` nodes.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, pieces: usize, order: usize) -> f64 {
    let rule = gauss_legendre(order);
    let h = (b - a) / pieces as f64;
    let mut total = 0.0;
    for i in 0..pieces {
        let mid = a + (i as f64 + 0.5) * h;
        for &(x, w) in &rule {
            total += 0.5 * h * w * f(mid + 0.5 * h * x);
        }
    }
    total
}

pub fn naive_gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        naive_gcd(b, a % b)
    }
}

/// Digits of `u/v` (reduced first) by plain long division.
pub fn naive_digits(u: u64, v: u64) -> Vec<u64> {
    let g = naive_gcd(u, v);
    let (mut num, mut den) = (u / g, v / g);
    let mut digits = Vec::new();
    while num != 0 {
        digits.push(den / num);
        (num, den) = (den - (den / num) * num, num);
    }
    digits
}

pub fn naive_cost(u: u64, v: u64, c: &CostSpec) -> f64 {
    naive_digits(u, v).into_iter().map(|a| c.at(a)).sum()
}

/// Kahan-compensated running sum.
#[derive(Default, Clone, Copy)]
pub struct Kahan {
    sum: f64,
    carry: f64,
}

impl Kahan {
    pub fn add(&mut self, x: f64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

pub fn assert_close(actual: f64, expected: f64, tol: f64, what: &str) {
    assert!(
        (actual - expected).abs() <= tol,
        "{what}: got {actual}, expected {expected}, tolerance {tol}"
    );
}
