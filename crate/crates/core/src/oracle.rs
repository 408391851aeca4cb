//! Brute-force ground truth on tiny Kneser graphs: every vertex enumerated,
//! exact walk counts, exact `d(t)` and exact trace identities.

use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::combinatorics::ExactRational;
use crate::model::{KneserParams, LumpSpec, SpectrumTable};

/// Largest vertex count the oracle accepts.
pub const MAX_VERTICES: u64 = 5000;
/// Largest adjacency size (vertices times degree) the oracle accepts.
pub const MAX_ADJACENCY: u64 = 1_000_000;
/// Longest horizon for [`oracle_tv`].
pub const MAX_HORIZON: u64 = 200;
/// Highest power for [`certify_spectrum`].
pub const MAX_TRACE_POWER: u32 = 8;
/// Graphs up to this size are checked from every start vertex.
const ALL_STARTS_LIMIT: usize = 256;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("K({ground}, {n}) has {vertices} vertices; oracle limit is {MAX_VERTICES}")]
    TooManyVertices { ground: u64, n: u32, vertices: BigUint },
    #[error("adjacency of {entries} entries exceeds oracle limit {MAX_ADJACENCY}")]
    TooManyEdges { entries: u64 },
    #[error("horizon {0} exceeds oracle limit {MAX_HORIZON}")]
    HorizonTooLarge(u64),
    #[error("trace power {0} exceeds oracle limit {MAX_TRACE_POWER}")]
    TracePowerTooLarge(u32),
    #[error("distance at t = {t} from vertex {start} differs from the reference start")]
    RowDependent { t: u64, start: usize },
}

/// Binomials `C(x, i)` for `x <= ground`, `i <= n`, saturating.
#[derive(Debug, Clone)]
struct SmallBinomials {
    n: usize,
    table: Vec<u64>,
}

impl SmallBinomials {
    fn new(ground: usize, n: usize) -> Self {
        let width = n + 1;
        let mut table = alloc::vec![0u64; (ground + 1) * width];
        for x in 0..=ground {
            table[x * width] = 1;
            for i in 1..=n.min(x) {
                table[x * width + i] = table[(x - 1) * width + i - 1].saturating_add(table[(x - 1) * width + i]);
            }
        }
        Self { n, table }
    }

    fn get(&self, x: usize, i: usize) -> u64 {
        if i > x || i > self.n {
            return 0;
        }
        self.table[x * (self.n + 1) + i]
    }
}

/// The full simple random walk on `K(2n+k, n)`.
///
/// Vertices are sorted subsets of `{1..2n+k}` in lexicographic order; the
/// transition matrix is `1/degree` on disjoint pairs and zero elsewhere.
#[derive(Debug, Clone)]
pub struct FullChain {
    params: KneserParams,
    binomials: SmallBinomials,
    vertices: Vec<Vec<u32>>,
    neighbors: Vec<Vec<u32>>,
    degree: u64,
}

fn combinations(len: usize, r: usize, mut visit: impl FnMut(&[usize])) {
    if r > len {
        return;
    }
    let mut idx: Vec<usize> = (0..r).collect();
    loop {
        visit(&idx);
        let Some(i) = (0..r).rev().find(|&i| idx[i] < i + len - r) else {
            return;
        };
        idx[i] += 1;
        for j in i + 1..r {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

pub fn build_full_chain(p: KneserParams) -> Result<FullChain, OracleError> {
    let count = p.vertex_count_exact();
    let vertices_u64 = count
        .to_u64()
        .filter(|&v| v <= MAX_VERTICES)
        .ok_or_else(|| OracleError::TooManyVertices {
            ground: p.ground_size(),
            n: p.n(),
            vertices: count.clone(),
        })?;
    let degree = p.degree().expect("degree <= vertex count");
    if vertices_u64 * degree > MAX_ADJACENCY {
        return Err(OracleError::TooManyEdges {
            entries: vertices_u64 * degree,
        });
    }
    let ground = p.ground_size() as usize;
    let n = p.n() as usize;
    let mut vertices = Vec::with_capacity(vertices_u64 as usize);
    combinations(ground, n, |idx| {
        vertices.push(idx.iter().map(|&i| i as u32 + 1).collect())
    });
    let mut chain = FullChain {
        params: p,
        binomials: SmallBinomials::new(ground, n),
        vertices,
        neighbors: Vec::new(),
        degree,
    };
    let mut neighbors = Vec::with_capacity(chain.vertices.len());
    let mut complement = Vec::with_capacity(ground - n);
    let mut subset = alloc::vec![0u32; n];
    for v in &chain.vertices {
        complement.clear();
        complement.extend((1..=ground as u32).filter(|x| v.binary_search(x).is_err()));
        let mut row = Vec::with_capacity(degree as usize);
        combinations(complement.len(), n, |idx| {
            for (s, &i) in subset.iter_mut().zip(idx) {
                *s = complement[i];
            }
            row.push(chain.rank(&subset) as u32);
        });
        neighbors.push(row);
    }
    chain.neighbors = neighbors;
    Ok(chain)
}

impl FullChain {
    pub fn params(&self) -> KneserParams {
        self.params
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> &[Vec<u32>] {
        &self.vertices
    }

    pub fn degree(&self) -> u64 {
        self.degree
    }

    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.neighbors[v]
    }

    /// Lexicographic rank of a sorted subset, via the combinatorial number
    /// system on the reflected set `{N - c}`.
    pub fn rank(&self, subset: &[u32]) -> usize {
        let ground = self.params.ground_size() as usize;
        let colex: u64 = subset
            .iter()
            .rev()
            .enumerate()
            .map(|(i, &c)| self.binomials.get(ground - c as usize, i + 1))
            .sum();
        (self.vertices.len() as u64 - 1 - colex) as usize
    }

    pub fn unrank(&self, rank: usize) -> Vec<u32> {
        let ground = self.params.ground_size() as usize;
        let n = self.params.n() as usize;
        let mut colex = (self.vertices.len() - 1 - rank) as u64;
        let mut out = Vec::with_capacity(n);
        let mut hi = ground;
        for i in (1..=n).rev() {
            let mut b = i - 1;
            while b + 1 < hi && self.binomials.get(b + 1, i) <= colex {
                b += 1;
            }
            colex -= self.binomials.get(b, i);
            out.push((ground - b) as u32);
            hi = b;
        }
        out
    }

    /// `P(a, b)`.
    pub fn transition(&self, a: usize, b: usize) -> ExactRational {
        if self.neighbors[a].binary_search(&(b as u32)).is_ok() {
            ExactRational::new(BigInt::one(), BigInt::from(self.degree))
        } else {
            ExactRational::zero()
        }
    }

    /// Dense exact transition matrix.
    pub fn matrix(&self) -> Vec<Vec<ExactRational>> {
        (0..self.vertex_count())
            .map(|a| (0..self.vertex_count()).map(|b| self.transition(a, b)).collect())
            .collect()
    }

    /// Index of the start vertex `{n+1, ..., 2n}`.
    pub fn start_vertex(&self) -> usize {
        let n = self.params.n();
        let start: Vec<u32> = (n + 1..=2 * n).collect();
        self.rank(&start)
    }

    /// Walk counts from `start`: entry `v` of the `t`-th vector is the number
    /// of length-`t` walks ending at `v`, for `t = 0..=t_max`.
    fn walk_counts(&self, start: usize, t_max: u64, mut visit: impl FnMut(u64, &[BigUint])) {
        let mut counts = alloc::vec![BigUint::zero(); self.vertex_count()];
        counts[start] = BigUint::one();
        visit(0, &counts);
        for t in 1..=t_max {
            // adjacency is symmetric
            let next: Vec<BigUint> = self
                .neighbors
                .iter()
                .map(|row| row.iter().fold(BigUint::zero(), |acc, &u| acc + &counts[u as usize]))
                .collect();
            counts = next;
            visit(t, &counts);
        }
    }

    fn tv_of_counts(&self, counts: &[BigUint], t: u64) -> ExactRational {
        let walks = BigInt::from(BigUint::from(self.degree).pow(t as u32));
        let v = BigInt::from(self.vertex_count());
        let num: BigInt = counts
            .iter()
            .map(|c| (BigInt::from(c.clone()) * &v - &walks).abs())
            .sum();
        ExactRational::new(num, BigInt::from(2) * v * walks)
    }

    fn probe_starts(&self) -> Vec<usize> {
        let v = self.vertex_count();
        let start = self.start_vertex();
        let mut starts: Vec<usize> = if v <= ALL_STARTS_LIMIT {
            (0..v).collect()
        } else {
            (0..8).map(|i| i * (v - 1) / 7).collect()
        };
        starts.retain(|&s| s != start);
        starts
    }

    /// Law at time `t` of the lump statistic, for `t = 0..=t_max`, from the
    /// start vertex.
    pub fn lump_laws(&self, spec: LumpSpec, t_max: u64) -> Result<Vec<Vec<ExactRational>>, OracleError> {
        if t_max > MAX_HORIZON {
            return Err(OracleError::HorizonTooLarge(t_max));
        }
        let n = self.params.n();
        let reference: Vec<u32> = match spec {
            LumpSpec::StartOverlap => (n + 1..=2 * n).collect(),
            LumpSpec::ReferenceOverlap => (1..=n).collect(),
        };
        let class: Vec<usize> = self
            .vertices
            .iter()
            .map(|v| v.iter().filter(|x| reference.binary_search(x).is_ok()).count())
            .collect();
        let mut laws = Vec::with_capacity(t_max as usize + 1);
        self.walk_counts(self.start_vertex(), t_max, |t, counts| {
            let mut sums = alloc::vec![BigUint::zero(); n as usize + 1];
            for (c, &j) in counts.iter().zip(&class) {
                sums[j] += c;
            }
            let walks = BigInt::from(BigUint::from(self.degree).pow(t as u32));
            laws.push(
                sums.into_iter()
                    .map(|s| ExactRational::new(BigInt::from(s), walks.clone()))
                    .collect(),
            );
        });
        Ok(laws)
    }
}

/// Exact `d(t)` for `t = 0..=t_max` from the start vertex `{n+1..2n}`,
/// checked against other starting vertices (all of them on graphs with at
/// most 256 vertices, eight spread-out ones otherwise).
pub fn oracle_tv(chain: &FullChain, t_max: u64) -> Result<Vec<(u64, ExactRational)>, OracleError> {
    if t_max > MAX_HORIZON {
        return Err(OracleError::HorizonTooLarge(t_max));
    }
    let mut reference = Vec::with_capacity(t_max as usize + 1);
    chain.walk_counts(chain.start_vertex(), t_max, |t, counts| {
        reference.push((t, chain.tv_of_counts(counts, t)))
    });
    for start in chain.probe_starts() {
        let mut mismatch = None;
        chain.walk_counts(start, t_max, |t, counts| {
            if mismatch.is_none() && chain.tv_of_counts(counts, t) != reference[t as usize].1 {
                mismatch = Some(t);
            }
        });
        if let Some(t) = mismatch {
            return Err(OracleError::RowDependent { t, start });
        }
    }
    Ok(reference)
}

/// One trace identity `trace(P^m) = Σ_i m_i λ_i^m`.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceCheck {
    pub power: u32,
    pub trace: ExactRational,
    pub spectral: ExactRational,
}

impl TraceCheck {
    pub fn passed(&self) -> bool {
        self.trace == self.spectral
    }
}

/// Diagonal of `A^m` at `x`, for `m = 0..=m_max`, in `u128`.
fn closed_walks(chain: &FullChain, x: usize, m_max: u32) -> Vec<u128> {
    let mut counts = alloc::vec![0u128; chain.vertex_count()];
    counts[x] = 1;
    let mut out = alloc::vec![1u128];
    for _ in 0..m_max {
        counts = chain
            .neighbors
            .iter()
            .map(|row| row.iter().map(|&u| counts[u as usize]).sum())
            .collect();
        out.push(counts[x]);
    }
    out
}

/// Checks `trace(P^m)` against the spectrum for `m = 0..=m_max`.
///
/// Diagonals are summed over every vertex on graphs with at most 256
/// vertices; on larger graphs a spread of eight vertices is checked for
/// agreement and the common value is scaled by the vertex count.
pub fn certify_spectrum(chain: &FullChain, table: &SpectrumTable, m_max: u32) -> Result<Vec<TraceCheck>, OracleError> {
    if m_max > MAX_TRACE_POWER {
        return Err(OracleError::TracePowerTooLarge(m_max));
    }
    let v = chain.vertex_count();
    let mut diag_sums = alloc::vec![BigUint::zero(); m_max as usize + 1];
    if v <= ALL_STARTS_LIMIT {
        for x in 0..v {
            for (s, c) in diag_sums.iter_mut().zip(closed_walks(chain, x, m_max)) {
                *s += c;
            }
        }
    } else {
        let starts: Vec<usize> = (0..8).map(|i| i * (v - 1) / 7).collect();
        let first = closed_walks(chain, starts[0], m_max);
        for &x in &starts[1..] {
            if closed_walks(chain, x, m_max) != first {
                return Err(OracleError::RowDependent { t: 0, start: x });
            }
        }
        for (s, c) in diag_sums.iter_mut().zip(first) {
            *s = BigUint::from(c) * v;
        }
    }
    let n = chain.params().n();
    let checks = (0..=m_max)
        .map(|m| {
            let walks = BigInt::from(BigUint::from(chain.degree()).pow(m));
            let trace = ExactRational::new(BigInt::from(diag_sums[m as usize].clone()), walks);
            let spectral = (0..=n)
                .map(|i| {
                    ExactRational::from_integer(BigInt::from(table.multiplicity_exact(i)))
                        * table.eigenvalue_exact(i).pow(m as i32)
                })
                .sum();
            TraceCheck {
                power: m,
                trace,
                spectral,
            }
        })
        .collect();
    Ok(checks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::spectrum;

    fn params(n: u32, k: u32) -> KneserParams {
        KneserParams::new(n, k).unwrap()
    }

    fn q(a: i64, b: i64) -> ExactRational {
        ExactRational::new(a.into(), b.into())
    }

    #[test]
    fn chain_shapes() {
        for (n, k, v, d) in [(2u32, 1u32, 10usize, 3u64), (1, 2, 4, 3), (3, 1, 35, 4)] {
            let c = build_full_chain(params(n, k)).unwrap();
            assert_eq!(c.vertex_count(), v);
            assert_eq!(c.degree(), d);
            assert!((0..v).all(|x| c.neighbors(x).len() as u64 == d));
        }
        let k4 = build_full_chain(params(1, 2)).unwrap();
        assert_eq!(k4.transition(0, 1), q(1, 3));
        assert_eq!(k4.transition(2, 2), q(0, 1));
    }

    #[test]
    fn matrix_is_symmetric_and_stochastic() {
        let c = build_full_chain(params(2, 2)).unwrap();
        let m = c.matrix();
        for (a, row) in m.iter().enumerate() {
            assert!(row.iter().sum::<ExactRational>().is_one());
            for (b, x) in row.iter().enumerate() {
                assert_eq!(x, &m[b][a]);
                let disjoint = c.vertices()[a].iter().all(|e| !c.vertices()[b].contains(e));
                assert_eq!(!x.is_zero(), disjoint);
            }
        }
    }

    #[test]
    fn rank_round_trips() {
        for (n, k) in [(1u32, 3u32), (2, 1), (3, 2), (4, 1)] {
            let c = build_full_chain(params(n, k)).unwrap();
            for (r, v) in c.vertices().iter().enumerate() {
                assert_eq!(c.rank(v), r);
                assert_eq!(&c.unrank(r), v);
            }
            for w in c.vertices().windows(2) {
                assert!(w[0] < w[1]);
            }
        }
    }

    #[test]
    fn size_limits() {
        assert!(matches!(
            build_full_chain(params(10, 1)),
            Err(OracleError::TooManyVertices { .. })
        ));
        let c = build_full_chain(params(1, 1)).unwrap();
        assert_eq!(oracle_tv(&c, 201), Err(OracleError::HorizonTooLarge(201)));
        let table = spectrum(params(1, 1));
        assert_eq!(certify_spectrum(&c, &table, 9), Err(OracleError::TracePowerTooLarge(9)));
    }

    #[test]
    fn small_distances() {
        let petersen = build_full_chain(params(2, 1)).unwrap();
        let tv = oracle_tv(&petersen, 3).unwrap();
        assert_eq!(tv[0].1, q(9, 10));
        assert_eq!(tv[1].1, q(7, 10));
        let k4 = build_full_chain(params(1, 2)).unwrap();
        assert_eq!(oracle_tv(&k4, 1).unwrap()[1].1, q(1, 4));
    }

    #[test]
    fn petersen_traces() {
        let c = build_full_chain(params(2, 1)).unwrap();
        let checks = certify_spectrum(&c, &spectrum(params(2, 1)), 6).unwrap();
        assert_eq!(checks[0].trace, q(10, 1));
        assert_eq!(checks[1].trace, q(0, 1));
        assert_eq!(checks[2].trace, q(10, 3));
        assert!(checks.iter().all(TraceCheck::passed));
    }

    #[test]
    fn wrong_spectrum_is_caught() {
        let c = build_full_chain(params(2, 1)).unwrap();
        let checks = certify_spectrum(&c, &spectrum(params(2, 2)), 3).unwrap();
        assert!(!checks.iter().all(TraceCheck::passed));
    }

    #[test]
    fn sampled_starts_on_larger_graph() {
        let c = build_full_chain(params(5, 1)).unwrap();
        assert_eq!(c.vertex_count(), 462);
        assert!(oracle_tv(&c, 12).is_ok());
        let checks = certify_spectrum(&c, &spectrum(params(5, 1)), 8).unwrap();
        assert!(checks.iter().all(TraceCheck::passed));
    }
}
