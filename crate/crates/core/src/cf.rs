//! Exact Euclidean-algorithm arithmetic: continued-fraction digits, their
//! inverse, digit costs and the Gauss map.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

/// A reduced fraction `u/v` with `1 <= u < v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Rational {
    u: u64,
    v: u64,
}

impl Rational {
    pub fn new(u: u64, v: u64) -> Result<Self> {
        if u == 0 || u >= v {
            return Err(Error::PairOutOfRange { u, v });
        }
        let g = gcd(u, v);
        if g != 1 {
            return Err(Error::NotReduced { u, v, gcd: g });
        }
        Ok(Self { u, v })
    }

    pub fn numer(&self) -> u64 {
        self.u
    }

    pub fn denom(&self) -> u64 {
        self.v
    }

    pub fn as_pair(&self) -> (u64, u64) {
        (self.u, self.v)
    }
}

/// An arbitrary pair `1 <= u < v`, not necessarily coprime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct UnreducedPair {
    u: u64,
    v: u64,
}

impl UnreducedPair {
    pub fn new(u: u64, v: u64) -> Result<Self> {
        if u == 0 || u >= v {
            return Err(Error::PairOutOfRange { u, v });
        }
        Ok(Self { u, v })
    }

    pub fn gcd(&self) -> u64 {
        gcd(self.u, self.v)
    }

    pub fn reduced(&self) -> Rational {
        let g = self.gcd();
        Rational {
            u: self.u / g,
            v: self.v / g,
        }
    }
}

/// Continued-fraction digits `[a_1, ..., a_n]` with every `a_i >= 1` and the
/// final digit `a_n >= 2`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u64>", into = "Vec<u64>")]
pub struct DigitSequence(Vec<u64>);

impl DigitSequence {
    pub fn new(digits: Vec<u64>) -> Result<Self> {
        match digits.last() {
            None => Err(Error::InvalidDigits("empty sequence")),
            Some(_) if digits.contains(&0) => Err(Error::InvalidDigits("digit 0")),
            Some(1) => Err(Error::InvalidDigits("final digit 1")),
            Some(_) => Ok(Self(digits)),
        }
    }

    /// Builds a sequence from raw division quotients, folding a trailing
    /// `[.., a, 1]` into `[.., a + 1]`.
    pub fn from_quotients(mut digits: Vec<u64>) -> Result<Self> {
        if digits.len() >= 2 && digits.last() == Some(&1) {
            digits.pop();
            *digits.last_mut().unwrap() += 1;
        }
        Self::new(digits)
    }

    pub fn digits(&self) -> &[u64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl TryFrom<Vec<u64>> for DigitSequence {
    type Error = Error;

    fn try_from(digits: Vec<u64>) -> Result<Self> {
        Self::new(digits)
    }
}

impl From<DigitSequence> for Vec<u64> {
    fn from(d: DigitSequence) -> Self {
        d.0
    }
}

/// A bounded digit cost: `c(k) = table[k - 1]` for `k <= table.len()`,
/// `c(k) = tail` beyond.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCost")]
pub struct CostSpec {
    table: Vec<f64>,
    tail: f64,
}

#[derive(Deserialize)]
struct RawCost {
    #[serde(default)]
    table: Vec<f64>,
    tail: f64,
}

impl TryFrom<RawCost> for CostSpec {
    type Error = Error;

    fn try_from(raw: RawCost) -> Result<Self> {
        CostSpec::new(raw.table, raw.tail)
    }
}

impl CostSpec {
    pub fn new(table: Vec<f64>, tail: f64) -> Result<Self> {
        if let Some(&bad) = table
            .iter()
            .chain(std::iter::once(&tail))
            .find(|x| !x.is_finite() || **x < 0.0)
        {
            return Err(Error::InvalidCost(bad));
        }
        if tail == 0.0 && table.iter().all(|&x| x == 0.0) {
            return Err(Error::ZeroCost);
        }
        Ok(Self { table, tail })
    }

    /// `c(k) = value` for every digit.
    pub fn constant(value: f64) -> Result<Self> {
        Self::new(Vec::new(), value)
    }

    /// `c(digit) = 1`, all other digits cost 0.
    pub fn indicator(digit: u64) -> Result<Self> {
        if digit == 0 {
            return Err(Error::InvalidDigits("digit 0"));
        }
        let mut table = vec![0.0; digit as usize];
        table[digit as usize - 1] = 1.0;
        Self::new(table, 0.0)
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.table.iter().map(|x| x * factor).collect(), self.tail * factor)
    }

    #[inline]
    pub fn at(&self, digit: u64) -> f64 {
        // digit >= 1; digit - 1 < len  <=>  digit <= len
        match self.table.get((digit as usize).wrapping_sub(1)) {
            Some(&c) => c,
            None => self.tail,
        }
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn tail(&self) -> f64 {
        self.tail
    }

    /// `|c|_inf`.
    pub fn bound(&self) -> f64 {
        self.table.iter().copied().fold(self.tail, f64::max)
    }
}

/// Digits of `u/v` via the division step `(u, v) -> (v mod u, u)`.
pub fn continued_fraction(u: u64, v: u64) -> Result<DigitSequence> {
    Rational::new(u, v)?;
    let mut digits = Vec::new();
    let (mut a, mut b) = (u, v);
    while a != 0 {
        digits.push(b / a);
        let r = b % a;
        b = a;
        a = r;
    }
    DigitSequence::from_quotients(digits)
}

/// Backward evaluation of `h_{a_1} o ... o h_{a_n}(0)` with `h_k(x) = 1/(x + k)`.
pub fn reconstruct(d: &DigitSequence) -> Result<Rational> {
    // x = p/q, starting from 0/1; x <- 1/(a + x) = q / (a q + p)
    let (mut p, mut q) = (0u64, 1u64);
    for &a in d.digits().iter().rev() {
        let next = a
            .checked_mul(q)
            .and_then(|aq| aq.checked_add(p))
            .ok_or(Error::Overflow)?;
        p = q;
        q = next;
    }
    Rational::new(p, q)
}

pub fn cost(d: &DigitSequence, c: &CostSpec) -> f64 {
    d.digits().iter().map(|&a| c.at(a)).sum()
}

/// Runs the Euclidean algorithm on `(u, v)`, `1 <= u < v`, without building
/// the digit list. Returns `(C(u/v), division steps, gcd(u, v))`; the cost is
/// that of the reduced fraction, since both share the same quotients.
#[inline]
pub fn euclid_cost(mut u: u64, mut v: u64, c: &CostSpec) -> (f64, u32, u64) {
    let mut total = 0.0;
    let mut steps = 0;
    while u != 0 {
        let q = v / u;
        let r = v - q * u;
        total += c.at(q);
        steps += 1;
        v = u;
        u = r;
    }
    (total, steps, v)
}

/// Number of division steps `N(u/v)`.
pub fn division_steps(u: u64, v: u64) -> u32 {
    let (mut a, mut b, mut n) = (u, v, 0);
    while a != 0 {
        let r = b % a;
        b = a;
        a = r;
        n += 1;
    }
    n
}

/// `T(x) = 1/x - floor(1/x)` on `(0, 1]`.
pub fn gauss_map(x: f64) -> Result<f64> {
    if !(x > 0.0 && x <= 1.0) {
        return Err(Error::GaussMapDomain(x));
    }
    let y = 1.0 / x;
    Ok(y - y.floor())
}

/// The Gauss map on a rational `u/v` in exact arithmetic: `(v mod u) / u`.
/// Returns `(0, u)` once the orbit hits zero.
pub fn gauss_map_rational(u: u64, v: u64) -> (u64, u64) {
    (v % u, u)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expansions() {
        assert_eq!(continued_fraction(1, 2).unwrap().digits(), &[2]);
        assert_eq!(continued_fraction(2, 3).unwrap().digits(), &[1, 2]);
        assert_eq!(continued_fraction(5, 8).unwrap().digits(), &[1, 1, 1, 2]);
    }

    #[test]
    fn expansion_rejects_bad_pairs() {
        assert!(matches!(continued_fraction(3, 3), Err(Error::PairOutOfRange { .. })));
        assert!(matches!(continued_fraction(0, 5), Err(Error::PairOutOfRange { .. })));
        assert!(matches!(continued_fraction(7, 4), Err(Error::PairOutOfRange { .. })));
        assert!(matches!(continued_fraction(2, 4), Err(Error::NotReduced { gcd: 2, .. })));
    }

    #[test]
    fn reconstruction() {
        let r = |d: Vec<u64>| reconstruct(&DigitSequence::new(d).unwrap()).unwrap().as_pair();
        assert_eq!(r(vec![2]), (1, 2));
        assert_eq!(r(vec![1, 2]), (2, 3));
        assert_eq!(r(vec![1, 1, 1, 2]), (5, 8));
    }

    #[test]
    fn digit_sequence_validation() {
        assert_eq!(DigitSequence::new(vec![]), Err(Error::InvalidDigits("empty sequence")));
        assert_eq!(DigitSequence::new(vec![3, 1]), Err(Error::InvalidDigits("final digit 1")));
        assert!(DigitSequence::new(vec![1, 0, 2]).is_err());
        assert_eq!(DigitSequence::from_quotients(vec![2, 3, 1]).unwrap().digits(), &[2, 4]);
        let json: std::result::Result<DigitSequence, _> = serde_json::from_str("[4, 1]");
        assert!(json.is_err());
    }

    #[test]
    fn reconstruct_overflow_is_reported() {
        let d = DigitSequence::new(vec![u64::MAX / 2, u64::MAX / 2, 5]).unwrap();
        assert_eq!(reconstruct(&d), Err(Error::Overflow));
    }

    #[test]
    fn costs() {
        let ones = CostSpec::constant(1.0).unwrap();
        let d = DigitSequence::new(vec![1, 1, 1, 2]).unwrap();
        assert_eq!(cost(&d, &ones), 4.0);
        let ind = CostSpec::indicator(1).unwrap();
        assert_eq!(cost(&DigitSequence::new(vec![1, 2]).unwrap(), &ind), 1.0);
        let half = CostSpec::constant(0.5).unwrap();
        assert_eq!(cost(&DigitSequence::new(vec![3]).unwrap(), &half), 0.5);
    }

    #[test]
    fn cost_spec_invariants() {
        assert_eq!(CostSpec::new(vec![0.0, 0.0], 0.0), Err(Error::ZeroCost));
        assert_eq!(CostSpec::new(vec![-1.0], 1.0), Err(Error::InvalidCost(-1.0)));
        let c = CostSpec::new(vec![0.25, 3.0], 1.5).unwrap();
        assert_eq!(c.bound(), 3.0);
        assert_eq!((c.at(1), c.at(2), c.at(3), c.at(1000)), (0.25, 3.0, 1.5, 1.5));
    }

    #[test]
    fn cost_spec_json() {
        let c: CostSpec = serde_json::from_str(r#"{"table": [1.0, 0.0], "tail": 0.5}"#).unwrap();
        assert_eq!(c, CostSpec::new(vec![1.0, 0.0], 0.5).unwrap());
        let back = serde_json::to_string(&c).unwrap();
        assert_eq!(back, r#"{"table":[1.0,0.0],"tail":0.5}"#);
        let zero: std::result::Result<CostSpec, _> = serde_json::from_str(r#"{"table": [], "tail": 0}"#);
        assert!(zero.unwrap_err().to_string().contains("cost identically zero"));
    }

    #[test]
    fn gauss_map_values() {
        assert_eq!(gauss_map(0.5).unwrap(), 0.0);
        assert!((gauss_map(2.0 / 3.0).unwrap() - 0.5).abs() < 1e-15);
        assert!((gauss_map(0.7).unwrap() - (1.0 / 0.7 - 1.0)).abs() < 1e-15);
        assert!(gauss_map(0.0).is_err());
        assert!(gauss_map(1.5).is_err());
        assert!(gauss_map(-0.2).is_err());
    }

    #[test]
    fn euclid_cost_matches_reduced_fraction() {
        let c = CostSpec::new(vec![0.3, 1.0, 0.0], 2.0).unwrap();
        let (cu, steps, g) = euclid_cost(12, 42, &c);
        let d = continued_fraction(2, 7).unwrap();
        assert_eq!(g, 6);
        assert_eq!(steps as usize, d.len());
        assert_eq!(cu, cost(&d, &c));
    }
}
