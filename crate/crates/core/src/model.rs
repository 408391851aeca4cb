//! Kneser graph parameters, the closed-form spectrum of the simple random
//! walk's transition matrix, and stationary laws at vertex and lump level.

use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint};
#[allow(unused_imports)] // shadowed by inherent f64 math when std is linked
use num_traits::Float;
use num_traits::ToPrimitive;

use crate::combinatorics::{
    exact_binomial, log_binomial, ExactRational, HypergeometricParams, LogFactorials, LogValue,
};
use crate::engine::LumpedDistribution;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("invalid Kneser parameters: subset size n must be >= 1 (got n = 0)")]
    ZeroSubsetSize,
    #[error("invalid Kneser parameters: excess k must be >= 1 (got k = 0; K(2n, n) is bipartite)")]
    ZeroExcess,
}

/// The Kneser graph `K(2n+k, n)`: `n`-subsets of `{1, ..., 2n+k}`, adjacent
/// when disjoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct KneserParams {
    n: u32,
    k: u32,
}

impl KneserParams {
    pub fn new(n: u32, k: u32) -> Result<Self, ModelError> {
        if n == 0 {
            return Err(ModelError::ZeroSubsetSize);
        }
        if k == 0 {
            return Err(ModelError::ZeroExcess);
        }
        Ok(Self { n, k })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// `2n + k`.
    pub fn ground_size(&self) -> u64 {
        2 * self.n as u64 + self.k as u64
    }

    pub fn log_vertex_count(&self) -> LogValue {
        log_binomial(self.ground_size(), self.n as i64)
    }

    pub fn log_degree(&self) -> LogValue {
        log_binomial(self.n as u64 + self.k as u64, self.n as i64)
    }

    pub fn vertex_count_exact(&self) -> BigUint {
        exact_binomial(self.ground_size(), self.n as i64)
    }

    pub fn degree_exact(&self) -> BigUint {
        exact_binomial(self.n as u64 + self.k as u64, self.n as i64)
    }

    /// Vertex count when it fits in a `u64`.
    pub fn vertex_count(&self) -> Option<u64> {
        if self.log_vertex_count().ln() > 45.0 {
            return None;
        }
        self.vertex_count_exact().to_u64()
    }

    /// Degree when it fits in a `u64`.
    pub fn degree(&self) -> Option<u64> {
        if self.log_degree().ln() > 45.0 {
            return None;
        }
        self.degree_exact().to_u64()
    }

    /// `n / (n + k)`, the magnitude of the second eigenvalue bound.
    pub fn contraction(&self) -> f64 {
        self.n as f64 / (self.n as f64 + self.k as f64)
    }

    /// Cutoff location `(1/2) log_{1+k/n}(2n+k)`, in real arithmetic.
    pub fn t_star(&self) -> f64 {
        let ratio = self.k as f64 / self.n as f64;
        0.5 * (self.ground_size() as f64).ln() / ratio.ln_1p()
    }

    /// Window scale `n / k`.
    pub fn window_scale(&self) -> f64 {
        self.n as f64 / self.k as f64
    }

    /// Spectral gap `k / (n + k)`.
    pub fn spectral_gap(&self) -> f64 {
        self.k as f64 / (self.n as f64 + self.k as f64)
    }

    pub(crate) fn factorials(&self) -> LogFactorials {
        LogFactorials::new(self.ground_size())
    }
}

/// One eigenvalue class of the transition matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumEntry {
    pub index: u32,
    /// `(-1)^index`.
    pub sign: i8,
    pub magnitude: LogValue,
    pub multiplicity: LogValue,
}

impl SpectrumEntry {
    /// Signed eigenvalue as `f64`; may underflow to zero.
    pub fn eigenvalue(&self) -> f64 {
        self.sign as f64 * self.magnitude.value()
    }
}

/// Eigenvalues `(-1)^i C(n+k-i, n-i) / C(n+k, n)` with multiplicity
/// `C(2n+k, i) - C(2n+k, i-1)`, for `i = 0..=n`.
#[derive(Debug, Clone)]
pub struct SpectrumTable {
    params: KneserParams,
    entries: Vec<SpectrumEntry>,
}

impl SpectrumTable {
    pub fn params(&self) -> KneserParams {
        self.params
    }

    pub fn entries(&self) -> &[SpectrumEntry] {
        &self.entries
    }

    /// Exact transition eigenvalue of class `i`.
    pub fn eigenvalue_exact(&self, i: u32) -> ExactRational {
        let p = self.params;
        let (n, k) = (p.n as u64, p.k as u64);
        let num = BigInt::from(exact_binomial(n + k - i as u64, (n - i as u64) as i64));
        let num = if i % 2 == 1 { -num } else { num };
        ExactRational::new(num, BigInt::from(p.degree_exact()))
    }

    /// Exact adjacency eigenvalue `(-1)^i C(n+k-i, n-i)` of class `i`.
    pub fn adjacency_eigenvalue_exact(&self, i: u32) -> BigInt {
        let (n, k) = (self.params.n as u64, self.params.k as u64);
        let v = BigInt::from(exact_binomial(n + k - i as u64, (n - i as u64) as i64));
        if i % 2 == 1 {
            -v
        } else {
            v
        }
    }

    pub fn multiplicity_exact(&self, i: u32) -> BigUint {
        let g = self.params.ground_size();
        exact_binomial(g, i as i64) - exact_binomial(g, i as i64 - 1)
    }
}

pub fn spectrum(p: KneserParams) -> SpectrumTable {
    let (n, k) = (p.n as u64, p.k as u64);
    let g = p.ground_size();
    let mut entries = Vec::with_capacity(p.n as usize + 1);
    // ln|λ_i| = Σ_{j<i} ln((n-j)/(n+k-j)) = Σ ln(1 - k/(n+k-j))
    let mut ln_mag = 0.0f64;
    let mut comp = 0.0f64;
    for i in 0..=n {
        if i > 0 {
            let term = (-(k as f64) / ((n + k - (i - 1)) as f64)).ln_1p();
            let y = term - comp;
            let t = ln_mag + y;
            comp = (t - ln_mag) - y;
            ln_mag = t;
        }
        // C(g, i) - C(g, i-1) = C(g, i) (g - 2i + 1) / (g - i + 1)
        let mult = log_binomial(g, i as i64) * LogValue::from_value((g - 2 * i + 1) as f64)
            / LogValue::from_value((g - i + 1) as f64);
        entries.push(SpectrumEntry {
            index: i as u32,
            sign: if i % 2 == 0 { 1 } else { -1 },
            magnitude: LogValue::from_ln(ln_mag),
            multiplicity: mult,
        });
    }
    SpectrumTable { params: p, entries }
}

/// `ln(1 / C(2n+k, n))`.
pub fn stationary_vertex_mass(p: KneserParams) -> LogValue {
    LogValue::ONE / p.log_vertex_count()
}

pub fn stationary_vertex_mass_exact(p: KneserParams) -> ExactRational {
    ExactRational::new(BigInt::from(1u32), BigInt::from(p.vertex_count_exact()))
}

/// Which intersection-size statistic a lumped chain tracks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LumpSpec {
    /// `j_t = |X_t ∩ X_0|`, starting at `j_0 = n`.
    StartOverlap,
    /// `f_t = |X_t ∩ {1..n}|` for `X_0 = {n+1..2n}`, starting at `f_0 = 0`.
    ReferenceOverlap,
}

impl LumpSpec {
    pub fn initial_state(&self, p: KneserParams) -> usize {
        match self {
            LumpSpec::StartOverlap => p.n as usize,
            LumpSpec::ReferenceOverlap => 0,
        }
    }
}

/// Law of the lump statistic under the uniform stationary distribution.
///
/// Both statistics count overlap with a fixed `n`-set, so both are
/// `H(2n+k, n, n)`.
pub fn stationary_lump(p: KneserParams, _spec: LumpSpec) -> LumpedDistribution {
    let h = stationary_hypergeometric(p);
    let table = p.factorials();
    let mut masses = alloc::vec![0.0; p.n as usize + 1];
    for (s, m) in masses.iter_mut().enumerate() {
        *m = h.pmf_ln_cached(&table, s as i64).value();
    }
    LumpedDistribution::from_masses(masses, 0)
}

/// Exact stationary lump law.
pub fn stationary_lump_exact(p: KneserParams) -> Vec<ExactRational> {
    let h = stationary_hypergeometric(p);
    (0..=p.n as i64).map(|s| h.pmf_exact(s)).collect()
}

/// `H(2n+k, n, n)`, the stationary law of either overlap statistic.
pub fn stationary_hypergeometric(p: KneserParams) -> HypergeometricParams {
    HypergeometricParams::new(p.ground_size(), p.n as u64, p.n as u64).expect("n <= 2n + k always holds")
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::{One, Zero};

    fn q(a: i64, b: i64) -> ExactRational {
        ExactRational::new(a.into(), b.into())
    }

    #[test]
    fn rejects_degenerate_params() {
        assert_eq!(KneserParams::new(0, 1), Err(ModelError::ZeroSubsetSize));
        assert_eq!(KneserParams::new(3, 0), Err(ModelError::ZeroExcess));
        assert!(KneserParams::new(1, 1).is_ok());
    }

    #[test]
    fn counts() {
        let p = KneserParams::new(2, 1).unwrap();
        assert_eq!(p.vertex_count(), Some(10));
        assert_eq!(p.degree(), Some(3));
        let big = KneserParams::new(500, 7).unwrap();
        assert_eq!(big.vertex_count(), None);
        assert!(big.log_vertex_count().ln() > 600.0);
    }

    #[test]
    fn petersen_spectrum() {
        let p = KneserParams::new(2, 1).unwrap();
        let s = spectrum(p);
        let want = [(q(1, 1), 1u32), (q(-2, 3), 4), (q(1, 3), 5)];
        for (i, (lam, mult)) in want.iter().enumerate() {
            assert_eq!(&s.eigenvalue_exact(i as u32), lam);
            assert_eq!(s.multiplicity_exact(i as u32), BigUint::from(*mult));
            let e = s.entries()[i];
            assert!((e.eigenvalue() - num_traits::ToPrimitive::to_f64(lam).unwrap()).abs() < 1e-15);
            assert!((e.multiplicity.value() - *mult as f64).abs() < 1e-12);
        }
        assert_eq!(s.adjacency_eigenvalue_exact(1), BigInt::from(-2));
    }

    #[test]
    fn triangle_spectrum() {
        let s = spectrum(KneserParams::new(1, 1).unwrap());
        assert_eq!(s.entries().len(), 2);
        assert_eq!(s.eigenvalue_exact(1), q(-1, 2));
        assert_eq!(s.multiplicity_exact(1), BigUint::from(2u32));
    }

    #[test]
    fn top_class_is_trivial() {
        for (n, k) in [(1, 1), (7, 3), (300, 2), (1000, 1000)] {
            let s = spectrum(KneserParams::new(n, k).unwrap());
            let e = s.entries()[0];
            assert_eq!((e.sign, e.magnitude.ln()), (1, 0.0));
            assert!(e.multiplicity.ln().abs() < 1e-15);
        }
    }

    #[test]
    fn multiplicities_telescope() {
        for n in 1..=12u32 {
            for k in 1..=6u32 {
                let p = KneserParams::new(n, k).unwrap();
                let s = spectrum(p);
                let total: BigUint = (0..=n).map(|i| s.multiplicity_exact(i)).sum();
                assert_eq!(total, p.vertex_count_exact());
            }
        }
    }

    #[test]
    fn magnitudes_decrease_and_respect_bound() {
        for (n, k) in [(1u32, 1u32), (2, 1), (10, 3), (100, 1), (400, 1), (500, 7), (100, 100)] {
            let p = KneserParams::new(n, k).unwrap();
            let s = spectrum(p);
            let ln_c = p.contraction().ln();
            for w in s.entries().windows(2) {
                assert!(w[1].magnitude < w[0].magnitude);
                assert_eq!(w[1].sign, -w[0].sign);
            }
            for e in s.entries() {
                assert!(e.magnitude.ln() <= e.index as f64 * ln_c + 1e-12);
            }
        }
    }

    #[test]
    fn float_spectrum_matches_exact_twin() {
        let p = KneserParams::new(9, 4).unwrap();
        let s = spectrum(p);
        for e in s.entries() {
            let exact = s.eigenvalue_exact(e.index).to_f64().unwrap();
            assert!((e.eigenvalue() - exact).abs() <= 1e-14 * exact.abs());
            let m = s.multiplicity_exact(e.index).to_f64().unwrap();
            assert!((e.multiplicity.value() - m).abs() <= 1e-12 * m);
        }
    }

    #[test]
    fn stationary_vertex_mass_examples() {
        for (n, k, v) in [(2, 1, 10i64), (1, 2, 4), (3, 1, 35)] {
            let p = KneserParams::new(n, k).unwrap();
            assert_eq!(stationary_vertex_mass_exact(p), q(1, v));
            assert!((stationary_vertex_mass(p).value() - 1.0 / v as f64).abs() < 1e-16);
        }
    }

    #[test]
    fn petersen_stationary_lumps() {
        let p = KneserParams::new(2, 1).unwrap();
        assert_eq!(stationary_lump_exact(p), [q(3, 10), q(6, 10), q(1, 10)]);
        let a = stationary_lump(p, LumpSpec::StartOverlap);
        let b = stationary_lump(p, LumpSpec::ReferenceOverlap);
        assert_eq!(a.masses(), b.masses());
        for (got, want) in a.masses().iter().zip([0.3, 0.6, 0.1]) {
            assert!((got - want).abs() < 1e-15);
        }
    }

    #[test]
    fn stationary_lump_sums_and_mean() {
        for (n, k) in [(3u32, 2u32), (50, 1), (400, 1), (500, 7), (100, 100)] {
            let p = KneserParams::new(n, k).unwrap();
            let d = stationary_lump(p, LumpSpec::ReferenceOverlap);
            assert!((d.total_mass() - 1.0).abs() <= 1e-12);
            let (nf, kf) = (n as f64, k as f64);
            let mean = nf * nf / (2.0 * nf + kf);
            assert!((d.mean() - mean).abs() <= 1e-11 * mean);
        }
        let p = KneserParams::new(3, 2).unwrap();
        let exact: ExactRational = stationary_lump_exact(p).into_iter().sum();
        assert!(exact.is_one());
        assert!(!stationary_lump_exact(p)[0].is_zero());
    }
}
