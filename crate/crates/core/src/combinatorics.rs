//! Binomial coefficients and hypergeometric laws, in log-domain `f64` and in
//! exact big-integer / rational arithmetic.
//!
//! The float path is what every production-size computation uses: a binomial
//! such as `C(2n+k, n)` overflows `f64` long before its logarithm loses
//! precision. The exact path exists for oracles and cross-checks on small
//! instances.

use alloc::vec::Vec;
use core::cmp::min;
use core::ops::{Div, Mul};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
#[allow(unused_imports)] // shadowed by inherent f64 math when std is linked
use num_traits::Float;
use num_traits::{One, Zero};

/// Exact rational number in lowest terms with a positive denominator.
pub type ExactRational = BigRational;

/// Nearest `f64` to `r`.
pub fn rational_to_f64(r: &ExactRational) -> f64 {
    num_traits::ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CombinatoricsError {
    #[error("hypergeometric successes {successes} exceed population {population}")]
    SuccessesExceedPopulation { population: u64, successes: u64 },
    #[error("hypergeometric draws {draws} exceed population {population}")]
    DrawsExceedPopulation { population: u64, draws: u64 },
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub const fn new() -> Self {
        Self { sum: 0.0, comp: 0.0 }
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Compensated sum of an iterator of reals.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<CompensatedSum>().total()
}

/// A non-negative real stored by its natural logarithm.
///
/// `-inf` encodes zero. NaN is never stored.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct LogValue(f64);

impl LogValue {
    pub const ZERO: LogValue = LogValue(f64::NEG_INFINITY);
    pub const ONE: LogValue = LogValue(0.0);

    /// Wraps a natural logarithm. Panics on NaN.
    pub fn from_ln(ln: f64) -> Self {
        assert!(!ln.is_nan(), "LogValue from NaN");
        LogValue(ln)
    }

    /// Panics if `x` is negative or NaN.
    pub fn from_value(x: f64) -> Self {
        assert!(x >= 0.0, "LogValue of negative or NaN value {x}");
        LogValue(x.ln())
    }

    #[inline]
    pub fn ln(self) -> f64 {
        self.0
    }

    /// The represented value; underflows to 0 and overflows to `inf`.
    #[inline]
    pub fn value(self) -> f64 {
        self.0.exp()
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == f64::NEG_INFINITY
    }

    pub fn powf(self, exponent: f64) -> Self {
        if self.is_zero() {
            return if exponent == 0.0 { Self::ONE } else { Self::ZERO };
        }
        LogValue(self.0 * exponent)
    }

    pub fn sqrt(self) -> Self {
        LogValue(0.5 * self.0)
    }

    /// `log(exp(a) + exp(b))`.
    pub fn log_add(self, other: Self) -> Self {
        let (hi, lo) = if self.0 >= other.0 {
            (self.0, other.0)
        } else {
            (other.0, self.0)
        };
        if lo == f64::NEG_INFINITY {
            return LogValue(hi);
        }
        LogValue(hi + (lo - hi).exp().ln_1p())
    }
}

impl Mul for LogValue {
    type Output = LogValue;
    fn mul(self, rhs: Self) -> Self {
        if self.is_zero() || rhs.is_zero() {
            return Self::ZERO;
        }
        LogValue(self.0 + rhs.0)
    }
}

impl Div for LogValue {
    type Output = LogValue;
    fn div(self, rhs: Self) -> Self {
        assert!(!rhs.is_zero(), "LogValue division by zero");
        if self.is_zero() {
            return Self::ZERO;
        }
        LogValue(self.0 - rhs.0)
    }
}

/// Log of a sum of log-domain terms: max extraction then a compensated sum
/// of the rescaled exponentials.
pub fn log_sum_exp<I>(terms: I) -> LogValue
where
    I: IntoIterator<Item = LogValue>,
    I::IntoIter: Clone,
{
    let iter = terms.into_iter();
    let peak = iter.clone().fold(f64::NEG_INFINITY, |m, v| m.max(v.0));
    if peak == f64::NEG_INFINITY {
        return LogValue::ZERO;
    }
    if peak == f64::INFINITY {
        return LogValue(f64::INFINITY);
    }
    let scaled = compensated_sum(iter.map(|v| (v.0 - peak).exp()));
    LogValue(peak + scaled.ln())
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

/// Double-double value `hi + lo`.
#[derive(Debug, Clone, Copy, Default)]
struct DoubleDouble {
    hi: f64,
    lo: f64,
}

impl DoubleDouble {
    fn add_f64(self, x: f64) -> Self {
        let (s, e) = two_sum(self.hi, x);
        let (hi, lo) = two_sum(s, e + self.lo);
        DoubleDouble { hi, lo }
    }

    fn sub(self, other: Self) -> Self {
        let (s, e) = two_sum(self.hi, -other.hi);
        let (hi, lo) = two_sum(s, e + self.lo - other.lo);
        DoubleDouble { hi, lo }
    }

    fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

/// Cached `ln(m!)` for `m = 0..=max`, accumulated in double-double so that
/// differences of large log-factorials keep full `f64` precision.
#[derive(Debug, Clone)]
pub struct LogFactorials {
    table: Vec<DoubleDouble>,
}

impl LogFactorials {
    pub fn new(max: u64) -> Self {
        let len = usize::try_from(max).expect("factorial table size") + 1;
        let mut table = alloc::vec![DoubleDouble::default(); len];
        let mut acc = DoubleDouble::default();
        for m in 2..len {
            acc = acc.add_f64((m as f64).ln());
            table[m] = acc;
        }
        Self { table }
    }

    pub fn max(&self) -> u64 {
        (self.table.len() - 1) as u64
    }

    pub fn ln_factorial(&self, m: u64) -> f64 {
        self.table[m as usize].to_f64()
    }

    /// `ln C(n, r)`; zero element outside `0 <= r <= n`.
    pub fn log_binomial(&self, n: u64, r: i64) -> LogValue {
        if r < 0 || r as u64 > n {
            return LogValue::ZERO;
        }
        let r = r as u64;
        let t = &self.table;
        let d = t[n as usize].sub(t[r as usize]).sub(t[(n - r) as usize]);
        LogValue(d.to_f64().max(0.0))
    }
}

/// `ln C(n, r)` without a cache, in `O(min(r, n - r))`.
///
/// Returns the zero element when `r < 0` or `r > n`.
pub fn log_binomial(n: u64, r: i64) -> LogValue {
    if r < 0 || r as u64 > n {
        return LogValue::ZERO;
    }
    let r = min(r as u64, n - r as u64);
    let rest = (n - r) as f64;
    let sum = compensated_sum((1..=r).map(|i| (rest / i as f64).ln_1p()));
    LogValue(sum)
}

/// Exact `C(n, r)`; zero outside `0 <= r <= n`.
pub fn exact_binomial(n: u64, r: i64) -> BigUint {
    if r < 0 || r as u64 > n {
        return BigUint::zero();
    }
    let r = min(r as u64, n - r as u64);
    let mut acc = BigUint::one();
    for i in 1..=r {
        acc *= n - r + i;
        acc /= i;
    }
    acc
}

/// Hypergeometric law `H(N, m, n)`: successes among `n` draws without
/// replacement from a population of `N` holding `m` successes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HypergeometricParams {
    population: u64,
    successes: u64,
    draws: u64,
}

impl HypergeometricParams {
    pub fn new(population: u64, successes: u64, draws: u64) -> Result<Self, CombinatoricsError> {
        if successes > population {
            return Err(CombinatoricsError::SuccessesExceedPopulation { population, successes });
        }
        if draws > population {
            return Err(CombinatoricsError::DrawsExceedPopulation { population, draws });
        }
        Ok(Self {
            population,
            successes,
            draws,
        })
    }

    pub fn population(&self) -> u64 {
        self.population
    }

    pub fn successes(&self) -> u64 {
        self.successes
    }

    pub fn draws(&self) -> u64 {
        self.draws
    }

    /// Inclusive support `[max(0, n + m - N), min(n, m)]`.
    pub fn support(&self) -> (u64, u64) {
        let lo = (self.draws + self.successes).saturating_sub(self.population);
        let hi = min(self.draws, self.successes);
        (lo, hi)
    }

    fn in_support(&self, i: i64) -> bool {
        let (lo, hi) = self.support();
        i >= 0 && (i as u64) >= lo && (i as u64) <= hi
    }

    /// `ln P(Y = i)`.
    pub fn pmf_ln(&self, i: i64) -> LogValue {
        if !self.in_support(i) {
            return LogValue::ZERO;
        }
        let i = i as u64;
        let num = log_binomial(self.successes, i as i64)
            * log_binomial(self.population - self.successes, (self.draws - i) as i64);
        num / log_binomial(self.population, self.draws as i64)
    }

    /// `ln P(Y = i)` using a factorial cache covering `population`.
    pub fn pmf_ln_cached(&self, table: &LogFactorials, i: i64) -> LogValue {
        if !self.in_support(i) {
            return LogValue::ZERO;
        }
        let i = i as u64;
        let num = table.log_binomial(self.successes, i as i64)
            * table.log_binomial(self.population - self.successes, (self.draws - i) as i64);
        num / table.log_binomial(self.population, self.draws as i64)
    }

    /// Exact `P(Y = i)`.
    pub fn pmf_exact(&self, i: i64) -> ExactRational {
        if !self.in_support(i) {
            return ExactRational::zero();
        }
        let i = i as u64;
        let num = exact_binomial(self.successes, i as i64)
            * exact_binomial(self.population - self.successes, (self.draws - i) as i64);
        let den = exact_binomial(self.population, self.draws as i64);
        ExactRational::new(BigInt::from(num), BigInt::from(den))
    }

    /// pmf over the support as `f64`, starting at `support().0`.
    ///
    /// Each entry is `exp` of the cached log-pmf; the vector is then divided
    /// by its compensated sum, which only removes rounding drift since the
    /// exact masses sum to one.
    pub fn pmf_vec(&self, table: &LogFactorials) -> Vec<f64> {
        let (lo, hi) = self.support();
        let mut probs: Vec<f64> = (lo..=hi).map(|i| self.pmf_ln_cached(table, i as i64).value()).collect();
        let total = compensated_sum(probs.iter().copied());
        for p in &mut probs {
            *p /= total;
        }
        probs
    }

    /// Closed-form `(mean, variance)`: `nm/N` and `nm(N-m)(N-n)/(N^2(N-1))`.
    /// Variance is zero when `N <= 1`; both are zero when `N = 0`.
    pub fn moments(&self) -> (f64, f64) {
        if self.population == 0 {
            return (0.0, 0.0);
        }
        let big_n = self.population as f64;
        let m = self.successes as f64;
        let n = self.draws as f64;
        let mean = n * m / big_n;
        if self.population == 1 {
            return (mean, 0.0);
        }
        let var = n * m * (big_n - m) * (big_n - n) / (big_n * big_n * (big_n - 1.0));
        (mean, var)
    }
}
