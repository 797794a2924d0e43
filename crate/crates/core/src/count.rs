//! Point counts of jet schemes over prime fields.
//!
//! Exhaustive counting walks the assignment grid level by level: the
//! variables `A_1q..A_nq` are assigned together, and every `F_jq` is checked
//! as soon as the deepest level it involves is fixed. Levels past the last
//! nonzero equation contribute a free factor `p^n` each.

use std::ops::ControlFlow;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::heuristic::Heuristic;
use crate::jet::{self, JetError, JetSystem, NiceTriplePresentation};
use crate::ring::{CoefficientRing, RingError};

/// Default cap on `q^(n m)` for exhaustive enumeration.
pub const DEFAULT_ENUMERATION_LIMIT: u64 = 100_000_000;

const SAMPLE_BLOCK: u64 = 1024;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CountError {
    #[error("point counting needs a jet system over a prime field, got {0}")]
    NotPrimeField(CoefficientRing),
    #[error("grid of {grid} points exceeds the enumeration limit {limit}")]
    LimitExceeded { grid: String, limit: u64 },
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error(transparent)]
    Ring(#[from] RingError),
}

#[derive(Debug, Clone)]
struct FpPoly {
    terms: Vec<(u64, Vec<(usize, u32)>)>,
    level: usize,
}

impl FpPoly {
    fn eval(&self, point: &[u64], p: u64) -> u64 {
        let mut acc = 0u64;
        for (c, vars) in &self.terms {
            let mut t = *c;
            for &(v, e) in vars {
                for _ in 0..e {
                    t = t * point[v] % p;
                }
                if t == 0 {
                    break;
                }
            }
            acc = (acc + t) % p;
        }
        acc
    }
}

/// A jet system over `F_p` compiled to machine-word arithmetic.
#[derive(Debug, Clone)]
pub struct FpSystem {
    p: u64,
    n: usize,
    m: usize,
    /// `by_level[L]` holds the equations whose deepest variable level is `L`.
    by_level: Vec<Vec<FpPoly>>,
}

impl FpSystem {
    pub fn compile(js: &JetSystem) -> Result<Self, CountError> {
        let ring = js.ring();
        let p = match ring {
            CoefficientRing::PrimeField(p) => p.get(),
            other => return Err(CountError::NotPrimeField(other)),
        };
        let (n, m) = (js.n(), js.level());
        let mut by_level = vec![Vec::new(); m + 1];
        for f in js.all_equations().filter(|f| !f.is_zero()) {
            let mut level = 1;
            let terms = f
                .terms()
                .map(|(mono, c)| {
                    let vars: Vec<(usize, u32)> = mono
                        .exponents()
                        .iter()
                        .enumerate()
                        .filter(|(_, e)| **e > 0)
                        .map(|(v, e)| {
                            level = level.max(v % m + 1);
                            (v, *e)
                        })
                        .collect();
                    (ring.residue_u64(c).expect("prime field element"), vars)
                })
                .collect();
            by_level[level].push(FpPoly { terms, level });
        }
        Ok(FpSystem { p, n, m, by_level })
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn nvars(&self) -> usize {
        self.n * self.m
    }

    /// `p^(n m)`, or `None` on overflow.
    pub fn grid_size(&self) -> Option<u64> {
        u32::try_from(self.nvars())
            .ok()
            .and_then(|e| self.p.checked_pow(e))
    }

    /// Point in jet-variable order, entries in `[0, p)`.
    pub fn is_solution(&self, point: &[u64]) -> bool {
        self.by_level
            .iter()
            .flatten()
            .all(|f| f.eval(point, self.p) == 0)
    }

    fn deepest_level(&self) -> usize {
        (1..=self.m)
            .rev()
            .find(|l| !self.by_level[*l].is_empty())
            .unwrap_or(0)
    }

    fn set_level(&self, point: &mut [u64], level: usize, mut combo: u64) {
        for i in 0..self.n {
            point[i * self.m + level - 1] = combo % self.p;
            combo /= self.p;
        }
    }

    fn level_ok(&self, point: &[u64], level: usize) -> bool {
        self.by_level[level].iter().all(|f| {
            debug_assert_eq!(f.level, level);
            f.eval(point, self.p) == 0
        })
    }

    fn count_from(&self, point: &mut [u64], level: usize, deepest: usize) -> u64 {
        if level > deepest {
            return self.p.pow((self.n * (self.m + 1 - level)) as u32);
        }
        let combos = self.p.pow(self.n as u32);
        let mut total = 0;
        for combo in 0..combos {
            self.set_level(point, level, combo);
            if self.level_ok(point, level) {
                total += self.count_from(point, level + 1, deepest);
            }
        }
        total
    }

    fn check_limit(&self, limit: u64) -> Result<u64, CountError> {
        match self.grid_size() {
            Some(g) if g <= limit => Ok(g),
            Some(g) => Err(CountError::LimitExceeded {
                grid: g.to_string(),
                limit,
            }),
            None => Err(CountError::LimitExceeded {
                grid: format!("{}^{}", self.p, self.nvars()),
                limit,
            }),
        }
    }

    /// Exact number of solutions; blocks of level-1 assignments are counted
    /// concurrently and summed.
    pub fn count_exhaustive(&self, limit: u64) -> Result<u64, CountError> {
        self.check_limit(limit)?;
        let deepest = self.deepest_level();
        if deepest == 0 {
            return Ok(self.grid_size().expect("checked"));
        }
        let combos = self.p.pow(self.n as u32);
        Ok((0..combos)
            .into_par_iter()
            .map(|combo| {
                let mut point = vec![0u64; self.nvars()];
                self.set_level(&mut point, 1, combo);
                if self.level_ok(&point, 1) {
                    self.count_from(&mut point, 2, deepest)
                } else {
                    0
                }
            })
            .sum())
    }

    /// Calls `visit` on every solution, in level-major order, until it breaks.
    pub fn for_each_solution<F>(&self, limit: u64, mut visit: F) -> Result<(), CountError>
    where
        F: FnMut(&[u64]) -> ControlFlow<()>,
    {
        self.check_limit(limit)?;
        let mut point = vec![0u64; self.nvars()];
        let _ = self.walk(&mut point, 1, &mut visit);
        Ok(())
    }

    fn walk<F>(&self, point: &mut [u64], level: usize, visit: &mut F) -> ControlFlow<()>
    where
        F: FnMut(&[u64]) -> ControlFlow<()>,
    {
        if level > self.m {
            return visit(point);
        }
        for combo in 0..self.p.pow(self.n as u32) {
            self.set_level(point, level, combo);
            if self.level_ok(point, level) {
                self.walk(point, level + 1, visit)?;
            }
        }
        ControlFlow::Continue(())
    }

    /// Uniform random grid point from a seeded stream.
    pub fn random_point(&self, rng: &mut impl Rng) -> Vec<u64> {
        (0..self.nvars())
            .map(|_| rng.random_range(0..self.p))
            .collect()
    }

    /// Number of solutions among `samples` uniform grid points. Samples are
    /// drawn in fixed-size blocks, each from its own stream of the seeded
    /// generator, so the result does not depend on thread scheduling.
    pub fn sample_hits(&self, samples: u64, seed: u64) -> u64 {
        let blocks = samples.div_ceil(SAMPLE_BLOCK);
        (0..blocks)
            .into_par_iter()
            .map(|b| {
                let mut rng = block_rng(seed, b);
                let size = SAMPLE_BLOCK.min(samples - b * SAMPLE_BLOCK);
                (0..size)
                    .filter(|_| self.is_solution(&self.random_point(&mut rng)))
                    .count() as u64
            })
            .sum()
    }
}

/// Generator for block `block` of a seeded sampling run.
pub fn block_rng(seed: u64, block: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum CountMode {
    Exhaustive,
    Sampled { budget: u64, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PointCount {
    Exact {
        q: u64,
        level: usize,
        count: u64,
    },
    Estimate {
        q: u64,
        level: usize,
        samples: u64,
        hits: u64,
        seed: u64,
        estimate: f64,
        /// 95% Wilson score interval, scaled to the grid.
        ci_low: f64,
        ci_high: f64,
        heuristic: Heuristic,
    },
}

impl PointCount {
    pub fn q(&self) -> u64 {
        match self {
            PointCount::Exact { q, .. } | PointCount::Estimate { q, .. } => *q,
        }
    }

    pub fn level(&self) -> usize {
        match self {
            PointCount::Exact { level, .. } | PointCount::Estimate { level, .. } => *level,
        }
    }

    /// Exact count or point estimate.
    pub fn value(&self) -> f64 {
        match self {
            PointCount::Exact { count, .. } => *count as f64,
            PointCount::Estimate { estimate, .. } => *estimate,
        }
    }

    pub fn exact(&self) -> Option<u64> {
        match self {
            PointCount::Exact { count, .. } => Some(*count),
            PointCount::Estimate { .. } => None,
        }
    }
}

fn wilson(hits: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054_f64;
    let n = n as f64;
    let phat = hits as f64 / n;
    let denom = 1.0 + z * z / n;
    let center = (phat + z * z / (2.0 * n)) / denom;
    let half = z * (phat * (1.0 - phat) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Solutions of `{F_jq = 0}` over `F_q`: exact, or a seeded sample estimate.
pub fn count_points(js: &JetSystem, mode: CountMode, limit: u64) -> Result<PointCount, CountError> {
    let sys = FpSystem::compile(js)?;
    let q = sys.prime();
    let level = js.level();
    match mode {
        CountMode::Exhaustive => Ok(PointCount::Exact {
            q,
            level,
            count: sys.count_exhaustive(limit)?,
        }),
        CountMode::Sampled { budget, seed } => {
            let hits = sys.sample_hits(budget, seed);
            let grid = (q as f64).powi(sys.nvars() as i32);
            let (lo, hi) = wilson(hits, budget);
            let frac = if budget == 0 {
                0.0
            } else {
                hits as f64 / budget as f64
            };
            Ok(PointCount::Estimate {
                q,
                level,
                samples: budget,
                hits,
                seed,
                estimate: frac * grid,
                ci_low: lo * grid,
                ci_high: hi * grid,
                heuristic: Heuristic::new("sampled estimate of a point count"),
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DimensionRow {
    pub q: u64,
    pub level: usize,
    pub count: f64,
    pub exact: bool,
    /// `log_q` of the count; `None` when the count is zero.
    pub log_q: Option<f64>,
    /// Change of `log_q` from the previous listed level with the same `q`.
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DimensionTable {
    pub rows: Vec<DimensionRow>,
    pub heuristic: Heuristic,
}

impl DimensionTable {
    /// Builds the table from counts, ordered by `(q, level)`.
    pub fn from_counts(counts: &[PointCount]) -> Self {
        let mut sorted: Vec<&PointCount> = counts.iter().collect();
        sorted.sort_by_key(|c| (c.q(), c.level()));
        let mut rows: Vec<DimensionRow> = Vec::new();
        for c in sorted {
            let v = c.value();
            let log_q = (v > 0.0).then(|| v.ln() / (c.q() as f64).ln());
            let prev = rows.last().filter(|r| r.q == c.q()).and_then(|r| r.log_q);
            let delta = match (log_q, prev) {
                (Some(a), Some(b)) => Some(a - b),
                _ => None,
            };
            rows.push(DimensionRow {
                q: c.q(),
                level: c.level(),
                count: v,
                exact: c.exact().is_some(),
                log_q,
                delta,
            });
        }
        DimensionTable {
            rows,
            heuristic: Heuristic::new(
                "log_q of point counts approximates jet-scheme dimension (Lang-Weil style); \
                 counts cannot detect irreducible components",
            ),
        }
    }
}

/// `log_q N(q, m)` over the requested primes and levels.
pub fn dimension_probe(
    tri: &NiceTriplePresentation,
    primes: &[u64],
    levels: &[usize],
    mode: CountMode,
    limit: u64,
) -> Result<DimensionTable, CountError> {
    let mut counts = Vec::new();
    for &q in primes {
        let special = jet::base_change(tri, CoefficientRing::prime_field(q)?)?;
        for &m in levels {
            let js = jet::generate_jet_system(&special, m)?;
            counts.push(count_points(&js, mode, limit)?);
        }
    }
    Ok(DimensionTable::from_counts(&counts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::numbered_vars;
    use crate::jet::generate_jet_system;

    fn system(ring: CoefficientRing, n: usize, rels: &[&str], m: usize) -> JetSystem {
        let t = NiceTriplePresentation::parse("t", ring, numbered_vars("Y", n), rels).unwrap();
        generate_jet_system(&t, m).unwrap()
    }

    /// Independent oracle: evaluate every equation at every grid point with
    /// the exact polynomial evaluator.
    fn brute_force(js: &JetSystem) -> u64 {
        let p = js.ring().prime().unwrap();
        let nv = js.nvars();
        let mut count = 0;
        for code in 0..p.pow(nv as u32) {
            let mut c = code;
            let point: Vec<_> = (0..nv)
                .map(|_| {
                    let v = js.ring().from_i64((c % p) as i64);
                    c /= p;
                    v
                })
                .collect();
            if js
                .all_equations()
                .all(|f| num_traits::Zero::is_zero(&f.evaluate(&point).unwrap()))
            {
                count += 1;
            }
        }
        count
    }

    #[test]
    fn a1_counts_over_f2() {
        let f2 = CoefficientRing::prime_field(2).unwrap();
        let j1 = system(f2, 3, &["Y1*Y2 - Y3^2"], 1);
        let j2 = system(f2, 3, &["Y1*Y2 - Y3^2"], 2);
        // Frozen from the brute-force oracle below.
        assert_eq!(brute_force(&j1), 8);
        assert_eq!(brute_force(&j2), 32);
        assert_eq!(
            count_points(&j1, CountMode::Exhaustive, 1000)
                .unwrap()
                .exact(),
            Some(8)
        );
        assert_eq!(
            count_points(&j2, CountMode::Exhaustive, 1000)
                .unwrap()
                .exact(),
            Some(32)
        );
    }

    #[test]
    fn smooth_triple_has_one_point() {
        let f3 = CoefficientRing::prime_field(3).unwrap();
        for m in 1..=4 {
            let js = system(f3, 1, &["Y1"], m);
            assert_eq!(
                count_points(&js, CountMode::Exhaustive, 1000)
                    .unwrap()
                    .exact(),
                Some(1)
            );
        }
    }

    #[test]
    fn matches_brute_force_on_small_systems() {
        for p in [2u64, 3] {
            let fp = CoefficientRing::prime_field(p).unwrap();
            for rels in [
                vec!["Y1*Y2 - Y3^3"],
                vec!["Y1^2 - Y2^2*Y3"],
                vec!["Y1*Y2 - Y3^2", "Y1 + Y2 - Y3^2"],
            ] {
                for m in 1..=2 {
                    let js = system(fp, 3, &rels, m);
                    assert_eq!(
                        FpSystem::compile(&js)
                            .unwrap()
                            .count_exhaustive(u64::MAX)
                            .unwrap(),
                        brute_force(&js),
                        "{rels:?} m={m} p={p}"
                    );
                }
            }
        }
    }

    #[test]
    fn enumeration_visits_each_solution_once() {
        let f2 = CoefficientRing::prime_field(2).unwrap();
        let js = system(f2, 3, &["Y1*Y2 - Y3^2"], 2);
        let sys = FpSystem::compile(&js).unwrap();
        let mut seen = std::collections::BTreeSet::new();
        sys.for_each_solution(1000, |pt| {
            assert!(sys.is_solution(pt));
            seen.insert(pt.to_vec());
            ControlFlow::Continue(())
        })
        .unwrap();
        assert_eq!(seen.len(), 32);
    }

    #[test]
    fn limit_and_ring_errors() {
        let f2 = CoefficientRing::prime_field(2).unwrap();
        let js = system(f2, 3, &["Y1*Y2 - Y3^2"], 2);
        assert!(matches!(
            count_points(&js, CountMode::Exhaustive, 63),
            Err(CountError::LimitExceeded { .. })
        ));
        let z = system(CoefficientRing::Integers, 3, &["Y1*Y2 - Y3^2"], 2);
        assert!(matches!(
            count_points(&z, CountMode::Exhaustive, 1000),
            Err(CountError::NotPrimeField(_))
        ));
    }

    #[test]
    fn sampling_is_seeded_and_sane() {
        let f2 = CoefficientRing::prime_field(2).unwrap();
        let js = system(f2, 3, &["Y1*Y2 - Y3^2"], 2);
        let mode = CountMode::Sampled {
            budget: 5000,
            seed: 7,
        };
        let a = count_points(&js, mode, 0).unwrap();
        let b = count_points(&js, mode, 0).unwrap();
        assert_eq!(a, b);
        let PointCount::Estimate {
            ci_low,
            ci_high,
            estimate,
            ..
        } = a
        else {
            panic!()
        };
        assert!(
            ci_low <= 32.0 && 32.0 <= ci_high,
            "{ci_low} {estimate} {ci_high}"
        );
        let empty = count_points(&js, CountMode::Sampled { budget: 0, seed: 1 }, 0).unwrap();
        assert_eq!(empty.value(), 0.0);
    }

    #[test]
    fn dimension_table() {
        let z = CoefficientRing::Integers;
        let t = NiceTriplePresentation::parse("A1", z, numbered_vars("Y", 3), &["Y1*Y2 - Y3^2"])
            .unwrap();
        let table = dimension_probe(&t, &[2], &[1, 2], CountMode::Exhaustive, 1000).unwrap();
        assert_eq!(table.rows[0].log_q, Some(3.0));
        assert!((table.rows[1].log_q.unwrap() - 5.0).abs() < 1e-12);
        assert!((table.rows[1].delta.unwrap() - 2.0).abs() < 1e-12);
        assert!(table.heuristic.not_a_theorem);
        let empty = dimension_probe(&t, &[2], &[], CountMode::Exhaustive, 1000).unwrap();
        assert!(empty.rows.is_empty());
    }
}
