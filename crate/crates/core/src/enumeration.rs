//! Exhaustive enumeration of `Ω_n` (coprime pairs `1 <= u < v <= n`) and
//! `Ω̃_n` (all pairs), with streaming cost statistics.
//!
//! Work is split into fixed blocks of consecutive denominators. Blocks may
//! run on any number of workers, but every reduction merges block results in
//! ascending-`v` order, so numeric output never depends on the pool size.

use std::collections::{BTreeMap, HashMap};
use std::ops::RangeInclusive;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cf::{euclid_cost, CostSpec};
use crate::error::{Error, Result};
use crate::summation::{ComplexSum, NeumaierSum};

/// Largest supported moment order.
pub const MAX_MOMENT: u32 = 12;

const BLOCK_V: u64 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PairKind {
    /// `Ω_n`: coprime pairs only.
    Reduced,
    /// `Ω̃_n`: every pair.
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairSet {
    pub n: u64,
    pub kind: PairKind,
}

impl PairSet {
    pub fn reduced(n: u64) -> Self {
        Self { n, kind: PairKind::Reduced }
    }

    pub fn all(n: u64) -> Self {
        Self { n, kind: PairKind::All }
    }

    pub fn len(&self) -> u64 {
        match self.kind {
            PairKind::Reduced => count_omega(self.n),
            PairKind::All => count_all(self.n),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.n < 2
    }
}

/// Centering term subtracted from each cost.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reference {
    /// `C − μ log v`
    LogV,
    /// `C − μ log n`
    LogN,
    /// `C − μ log(v / gcd(u, v))`
    LogVOverGcd,
}

/// Euler's totient `φ(0..=n)` by a linear sieve.
pub fn totients(n: u64) -> Vec<u64> {
    let n = n as usize;
    let mut phi = vec![0u64; n + 1];
    let mut primes: Vec<usize> = Vec::new();
    if n >= 1 {
        phi[1] = 1;
    }
    for i in 2..=n {
        if phi[i] == 0 {
            phi[i] = (i - 1) as u64;
            primes.push(i);
        }
        for &p in &primes {
            let ip = i * p;
            if ip > n {
                break;
            }
            if i % p == 0 {
                phi[ip] = phi[i] * p as u64;
                break;
            }
            phi[ip] = phi[i] * (p as u64 - 1);
        }
    }
    phi
}

/// `#Ω_n = Σ_{v=2}^{n} φ(v)`.
pub fn count_omega(n: u64) -> u64 {
    if n < 2 {
        return 0;
    }
    totients(n).iter().skip(2).sum()
}

/// `#Ω̃_n = n(n − 1)/2`.
pub fn count_all(n: u64) -> u64 {
    if n < 2 {
        0
    } else {
        n * (n - 1) / 2
    }
}

fn smallest_prime_factors(n: u64) -> Vec<u32> {
    let n = n as usize;
    let mut spf = vec![0u32; n + 1];
    for i in 2..=n {
        if spf[i] == 0 {
            let mut j = i;
            while j <= n {
                if spf[j] == 0 {
                    spf[j] = i as u32;
                }
                j += i;
            }
        }
    }
    spf
}

/// Per-worker buffer for the per-denominator coprimality sieve.
pub(crate) struct Scratch<'a> {
    spf: &'a [u32],
    marked: Vec<bool>,
}

impl<'a> Scratch<'a> {
    fn new(spf: &'a [u32]) -> Self {
        Self { spf, marked: Vec::new() }
    }

    /// Calls `f(u)` for `u = 1..v` in ascending order, restricted to
    /// `gcd(u, v) = 1` when `kind` is `Reduced`.
    #[inline]
    pub(crate) fn for_each_u(&mut self, v: u64, kind: PairKind, mut f: impl FnMut(u64)) {
        match kind {
            PairKind::All => (1..v).for_each(f),
            PairKind::Reduced => {
                let len = v as usize;
                self.marked.clear();
                self.marked.resize(len, false);
                let mut rest = len;
                while rest > 1 {
                    let p = self.spf[rest] as usize;
                    let mut m = p;
                    while m < len {
                        self.marked[m] = true;
                        m += p;
                    }
                    while rest.is_multiple_of(p) {
                        rest /= p;
                    }
                }
                for u in 1..len {
                    if !self.marked[u] {
                        f(u as u64);
                    }
                }
            }
        }
    }
}

/// Runs `f` over fixed blocks of denominators covering `range` and returns the
/// block results in ascending order.
pub(crate) fn for_blocks<T, F>(range: RangeInclusive<u64>, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(RangeInclusive<u64>, &mut Scratch<'_>) -> T + Sync,
{
    let (lo, hi) = (*range.start().max(&2), *range.end());
    if lo > hi {
        return Vec::new();
    }
    let spf = smallest_prime_factors(hi);
    let starts: Vec<u64> = (lo..=hi).step_by(BLOCK_V as usize).collect();
    starts
        .into_par_iter()
        .map_init(
            || Scratch::new(&spf),
            |scratch, start| f(start..=(start + BLOCK_V - 1).min(hi), scratch),
        )
        .collect()
}

/// Visits every pair of `set` exactly once: `v` ascending, and `u` ascending
/// within each `v`.
pub fn stream_pairs(set: PairSet, mut consumer: impl FnMut(u64, u64)) {
    if set.n < 2 {
        return;
    }
    let spf = smallest_prime_factors(set.n);
    let mut scratch = Scratch::new(&spf);
    for v in 2..=set.n {
        scratch.for_each_u(v, set.kind, |u| consumer(u, v));
    }
}

#[derive(Debug, Clone, Default)]
struct PowerSums {
    count: u64,
    sums: Vec<NeumaierSum>,
}

impl PowerSums {
    fn new(p_max: u32) -> Self {
        Self {
            count: 0,
            sums: vec![NeumaierSum::new(); p_max as usize + 1],
        }
    }

    #[inline]
    fn add(&mut self, x: f64, weight: u64) {
        self.count += weight;
        let w = weight as f64;
        let mut pow = w;
        for s in self.sums.iter_mut() {
            s.add(pow);
            pow *= x;
        }
    }

    fn merge(&mut self, other: &PowerSums) {
        self.count += other.count;
        for (a, b) in self.sums.iter_mut().zip(&other.sums) {
            a.merge(b);
        }
    }

    fn values(&self) -> Vec<f64> {
        self.sums.iter().map(NeumaierSum::value).collect()
    }
}

/// Power sums `S_p = Σ (C − μ·ref)^p` for `p = 0..=p_max` over a pair set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostAccumulator {
    pub n: u64,
    pub kind: PairKind,
    pub p_max: u32,
    pub reference: Reference,
    pub mu: f64,
    pub count: u64,
    pub power_sums: Vec<f64>,
}

impl CostAccumulator {
    /// `S_p / count`.
    pub fn mean_power(&self, p: usize) -> f64 {
        self.power_sums[p] / self.count as f64
    }
}

fn accumulate_range(
    kind: PairKind,
    range: RangeInclusive<u64>,
    n_ref: u64,
    c: &CostSpec,
    mu: f64,
    p_max: u32,
    reference: Reference,
) -> PowerSums {
    let log_n = (n_ref as f64).ln();
    let blocks = for_blocks(range, |block, scratch| {
        let mut acc = PowerSums::new(p_max);
        for v in block {
            let log_v = (v as f64).ln();
            scratch.for_each_u(v, kind, |u| {
                let (cost, _, g) = euclid_cost(u, v, c);
                let shift = match reference {
                    Reference::LogV => log_v,
                    Reference::LogN => log_n,
                    Reference::LogVOverGcd if g == 1 => log_v,
                    Reference::LogVOverGcd => ((v / g) as f64).ln(),
                };
                acc.add(cost - mu * shift, 1);
            });
        }
        acc
    });
    let mut total = PowerSums::new(p_max);
    for b in &blocks {
        total.merge(b);
    }
    total
}

fn check_moment(p_max: u32) -> Result<()> {
    if p_max > MAX_MOMENT {
        Err(Error::MomentOrder(p_max))
    } else {
        Ok(())
    }
}

/// One-pass power sums of the centred cost over `set`. For `All`, the cost is
/// that of the reduced fraction `(u/g)/(v/g)`.
pub fn accumulate_costs(
    set: PairSet,
    c: &CostSpec,
    mu: f64,
    p_max: u32,
    reference: Reference,
) -> Result<CostAccumulator> {
    check_moment(p_max)?;
    let sums = accumulate_range(set.kind, 2..=set.n, set.n, c, mu, p_max, reference);
    Ok(CostAccumulator {
        n: set.n,
        kind: set.kind,
        p_max,
        reference,
        mu,
        count: sums.count,
        power_sums: sums.values(),
    })
}

/// Power sums restricted to the ring `v = n` (the pairs of `Ω_n ∖ Ω_{n−1}`).
pub fn accumulate_ring(
    set: PairSet,
    c: &CostSpec,
    mu: f64,
    p_max: u32,
    reference: Reference,
) -> Result<CostAccumulator> {
    check_moment(p_max)?;
    let sums = accumulate_range(set.kind, set.n..=set.n, set.n, c, mu, p_max, reference);
    Ok(CostAccumulator {
        n: set.n,
        kind: set.kind,
        p_max,
        reference,
        mu,
        count: sums.count,
        power_sums: sums.values(),
    })
}

/// Exact distribution of cost values: `(C, multiplicity)` sorted by `C`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CostHistogram {
    entries: Vec<(f64, u64)>,
}

impl CostHistogram {
    pub fn entries(&self) -> &[(f64, u64)] {
        &self.entries
    }

    pub fn count(&self) -> u64 {
        self.entries.iter().map(|e| e.1).sum()
    }

    /// `Σ mult·f(C)` with compensated summation.
    pub fn sum_by(&self, f: impl Fn(f64) -> f64) -> f64 {
        let mut acc = NeumaierSum::new();
        for &(c, m) in &self.entries {
            acc.add(m as f64 * f(c));
        }
        acc.value()
    }

    pub fn mean(&self) -> f64 {
        self.sum_by(|c| c) / self.count() as f64
    }

    /// Population variance of `C`.
    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.sum_by(|c| (c - m) * (c - m)) / self.count() as f64
    }
}

/// Linear search with a last-hit cache while the number of distinct costs is
/// small (integer-valued costs), switching to a hash index beyond that.
#[derive(Default)]
struct HistogramBuilder {
    entries: Vec<(f64, u64)>,
    last: usize,
    index: Option<HashMap<u64, usize>>,
}

impl HistogramBuilder {
    const LINEAR_LIMIT: usize = 64;

    #[inline]
    fn add(&mut self, c: f64) {
        if let Some(e) = self.entries.get_mut(self.last) {
            if e.0 == c {
                e.1 += 1;
                return;
            }
        }
        let found = match &self.index {
            Some(index) => index.get(&c.to_bits()).copied(),
            None => self.entries.iter().position(|e| e.0 == c),
        };
        match found {
            Some(i) => {
                self.entries[i].1 += 1;
                self.last = i;
            }
            None => {
                self.last = self.entries.len();
                self.entries.push((c, 1));
                if let Some(index) = &mut self.index {
                    index.insert(c.to_bits(), self.last);
                } else if self.entries.len() > Self::LINEAR_LIMIT {
                    let index = self.entries.iter().enumerate().map(|(i, e)| (e.0.to_bits(), i)).collect();
                    self.index = Some(index);
                }
            }
        }
    }

    fn finish(mut self) -> CostHistogram {
        self.entries.sort_by(|a, b| a.0.total_cmp(&b.0));
        CostHistogram { entries: self.entries }
    }
}

/// Applies `f(v, histogram of C over the ring v)` to every ring `v` in
/// `range`; results come back in ascending `v`.
pub fn map_rings<T, F>(kind: PairKind, range: RangeInclusive<u64>, c: &CostSpec, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64, &CostHistogram) -> T + Sync,
{
    for_blocks(range, |block, scratch| {
        block
            .map(|v| {
                let mut hist = HistogramBuilder::default();
                scratch.for_each_u(v, kind, |u| hist.add(euclid_cost(u, v, c).0));
                f(v, &hist.finish())
            })
            .collect::<Vec<T>>()
    })
    .into_iter()
    .flatten()
    .collect()
}

/// `Σ_{v ≤ n} v^{−2s} Σ_{(u,v) ∈ Ω_v ∖ Ω_{v−1}} exp(ω(C(u/v) − μ log v))`.
pub fn dirichlet_partial_sum(s: Complex64, omega: Complex64, n: u64, c: &CostSpec, mu: f64) -> Complex64 {
    let rings = map_rings(PairKind::Reduced, 2..=n, c, |v, hist| dirichlet_ring(s, omega, v, hist, mu));
    sum_complex(&rings)
}

/// `Σ_{v ≤ n} v^{−2s} Σ_{(u,v) ∈ Ω_v ∖ Ω_{v−1}} (C(u/v) − μ log v)^p`.
pub fn dp_partial_sum(s: Complex64, p: u32, n: u64, c: &CostSpec, mu: f64) -> Complex64 {
    let rings = map_rings(PairKind::Reduced, 2..=n, c, |v, hist| dp_ring(s, p, v, hist, mu));
    sum_complex(&rings)
}

pub(crate) fn dirichlet_ring(s: Complex64, omega: Complex64, v: u64, hist: &CostHistogram, mu: f64) -> Complex64 {
    let log_v = (v as f64).ln();
    let mut acc = ComplexSum::new();
    for &(cost, m) in hist.entries() {
        acc.add((omega * (cost - mu * log_v)).exp() * m as f64);
    }
    acc.value() * (-2.0 * s * log_v).exp()
}

pub(crate) fn dp_ring(s: Complex64, p: u32, v: u64, hist: &CostHistogram, mu: f64) -> Complex64 {
    let log_v = (v as f64).ln();
    let inner = hist.sum_by(|cost| (cost - mu * log_v).powi(p as i32));
    (-2.0 * s * log_v).exp() * inner
}

fn sum_complex(values: &[Complex64]) -> Complex64 {
    let mut acc = ComplexSum::new();
    for &z in values {
        acc.add(z);
    }
    acc.value()
}

/// Cost statistics of one pair set `Ω_n` / `Ω̃_n` from [`census_grid`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCensus {
    pub n: u64,
    pub kind: PairKind,
    pub histogram: CostHistogram,
    /// `Σ (C − μ log v)^p`, `p = 0..=p_max`.
    pub log_v_power_sums: Vec<f64>,
}

/// Scans every pair up to `max(grid)` once and reports, for each grid point
/// `n`, the exact cost distribution over the pair set together with the
/// `log v`-centred power sums.
pub fn census_grid(grid: &[u64], kind: PairKind, c: &CostSpec, mu: f64, p_max: u32) -> Result<Vec<GridCensus>> {
    check_moment(p_max)?;
    if let Some(&bad) = grid.iter().find(|&&n| n < 2) {
        return Err(Error::InvalidBound(bad));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Precondition("grid must be strictly ascending".into()));
    }
    let Some(&n_max) = grid.last() else {
        return Ok(Vec::new());
    };
    let rings = map_rings(kind, 2..=n_max, c, |v, hist| {
        let log_v = (v as f64).ln();
        let mut sums = PowerSums::new(p_max);
        for &(cost, m) in hist.entries() {
            sums.add(cost - mu * log_v, m);
        }
        (hist.clone(), sums)
    });

    let mut out = Vec::with_capacity(grid.len());
    let mut merged: BTreeMap<u64, u64> = BTreeMap::new();
    let mut sums = PowerSums::new(p_max);
    let mut next = grid.iter().peekable();
    for (v, (hist, ring_sums)) in (2..=n_max).zip(rings) {
        for &(cost, m) in hist.entries() {
            // costs are non-negative, so bit order is numeric order
            *merged.entry(cost.to_bits()).or_default() += m;
        }
        sums.merge(&ring_sums);
        if next.peek() == Some(&&v) {
            next.next();
            out.push(GridCensus {
                n: v,
                kind,
                histogram: CostHistogram {
                    entries: merged.iter().map(|(&b, &m)| (f64::from_bits(b), m)).collect(),
                },
                log_v_power_sums: sums.values(),
            });
        }
    }
    Ok(out)
}
