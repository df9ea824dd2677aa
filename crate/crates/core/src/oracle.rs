//! Brute-force ground truth: every distance-preserving bijection of a small
//! space, found by backtracking over the distance matrix.
//!
//! Points are assigned in order of ascending weight, then rank. A candidate
//! image is accepted only if it reproduces the distance to every point
//! assigned so far, and candidates are drawn from the sphere around the
//! first image so most of the space is never touched.
//!
//! Two counting strategies are available. [`CountMethod::Backtrack`] visits
//! every leaf. [`CountMethod::StabilizerChain`] uses that isometries form a
//! group: `|G| = Π_t |orbit of x_t under the pointwise stabilizer of
//! x_0, …, x_{t-1}|`, where orbit membership is decided by a single
//! existence search. Both are exact.

use std::time::{Duration, Instant};

use num_bigint::BigUint;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::chain;
use crate::error::{Error, Result};
use crate::product::{full_order, hamming_order, trivial_pi_corollary_order};
use crate::space::{Space, SpaceConfig};

pub const DEFAULT_LIST_CAP: u64 = 16;
pub const DEFAULT_COUNT_CAP: u64 = 64;
pub const DEFAULT_MATRIX_CAP: u64 = 4096;

/// Pairwise distances under canonical ranking.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceMatrix {
    size: usize,
    data: Vec<u8>,
}

impl DistanceMatrix {
    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize) -> u8 {
        self.data[a * self.size + b]
    }

    pub fn row(&self, a: usize) -> &[u8] {
        &self.data[a * self.size..(a + 1) * self.size]
    }
}

fn log10_factorial(n: u64) -> f64 {
    (2..=n).map(|k| (k as f64).log10()).sum()
}

fn refuse(space: &Space, what: &str, cap: u64) -> Result<()> {
    if space.size() > cap {
        return Err(Error::CapExceeded {
            what: what.to_string(),
            size: space.size(),
            cap,
            log10_estimate: log10_factorial(space.size().min(1 << 20)),
        });
    }
    Ok(())
}

pub fn distance_matrix(space: &Space, cap: Option<u64>) -> Result<DistanceMatrix> {
    refuse(
        space,
        "building the distance matrix",
        cap.unwrap_or(DEFAULT_MATRIX_CAP),
    )?;
    let size = space.size() as usize;
    let mut data = vec![0u8; size * size];
    for a in 0..size {
        for b in a + 1..size {
            let d = space.distance_ranks(a as u64, b as u64) as u8;
            data[a * size + b] = d;
            data[b * size + a] = d;
        }
    }
    Ok(DistanceMatrix { size, data })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CountMethod {
    Backtrack,
    StabilizerChain,
}

/// Result of an isometry enumeration.
#[derive(Debug, Clone)]
pub struct Isometries {
    pub count: BigUint,
    pub method: CountMethod,
    /// Dense rank tables, in discovery order, when listing was requested.
    pub maps: Option<Vec<Vec<u64>>>,
    pub elapsed: Duration,
}

struct Search<'a> {
    dm: &'a DistanceMatrix,
    /// Points in assignment order.
    order: Vec<usize>,
    /// `spheres[y][d]`: points at distance `d` from `y`.
    spheres: Vec<Vec<Vec<usize>>>,
}

impl<'a> Search<'a> {
    fn new(space: &Space, dm: &'a DistanceMatrix) -> Self {
        let size = dm.size();
        let mut order: Vec<usize> = (0..size).collect();
        order.sort_by_key(|&x| (space.weight_rank(x as u64), x));
        let max_d = space.m() * space.n();
        let spheres = (0..size)
            .map(|y| {
                let mut s = vec![Vec::new(); max_d + 1];
                for z in 0..size {
                    s[dm.get(y, z) as usize].push(z);
                }
                s
            })
            .collect();
        Search { dm, order, spheres }
    }

    fn candidates(&self, images: &[usize], t: usize) -> Vec<usize> {
        if t == 0 {
            return (0..self.dm.size()).collect();
        }
        let x = self.order[t];
        let d0 = self.dm.get(x, self.order[0]) as usize;
        self.spheres[images[0]][d0]
            .iter()
            .copied()
            .filter(|&y| (1..t).all(|s| self.dm.get(y, images[s]) == self.dm.get(x, self.order[s])))
            .collect()
    }

    /// Depth-first search from position `t`; `leaf` returns `false` to stop.
    /// Returns `false` if stopped early.
    fn dfs(
        &self,
        images: &mut Vec<usize>,
        used: &mut [bool],
        leaf: &mut dyn FnMut(&[usize]) -> bool,
    ) -> bool {
        let t = images.len();
        if t == self.order.len() {
            return leaf(images);
        }
        for y in self.candidates(images, t) {
            if used[y] {
                continue;
            }
            used[y] = true;
            images.push(y);
            let go_on = self.dfs(images, used, leaf);
            images.pop();
            used[y] = false;
            if !go_on {
                return false;
            }
        }
        true
    }

    fn to_table(&self, images: &[usize]) -> Vec<u64> {
        let mut f = vec![0u64; images.len()];
        for (t, &y) in images.iter().enumerate() {
            f[self.order[t]] = y as u64;
        }
        f
    }

    fn exists_extension(&self, prefix: &[usize]) -> bool {
        let mut images = prefix.to_vec();
        let mut used = vec![false; self.dm.size()];
        for &y in prefix {
            used[y] = true;
        }
        !self.dfs(&mut images, &mut used, &mut |_| false)
    }

    fn stabilizer_chain_count(&self) -> BigUint {
        let size = self.dm.size();
        let mut total = BigUint::one();
        let mut prefix: Vec<usize> = Vec::with_capacity(size);
        for t in 0..size {
            let x = self.order[t];
            let mut orbit = 0u64;
            for y in self.candidates(&prefix, t) {
                if prefix.contains(&y) {
                    continue;
                }
                if y == x {
                    orbit += 1;
                    continue;
                }
                prefix.push(y);
                if self.exists_extension(&prefix) {
                    orbit += 1;
                }
                prefix.pop();
            }
            total *= orbit;
            prefix.push(x);
        }
        total
    }
}

/// Enumerates all isometries of `space`.
///
/// Listing requires `q^N ≤ cap` (default 16) and always visits every leaf.
/// Counting requires `q^N ≤ cap` (default 64); `method` defaults to
/// backtracking up to 16 points and the stabilizer chain above.
pub fn enumerate_isometries(
    space: &Space,
    cap: Option<u64>,
    want_list: bool,
    method: Option<CountMethod>,
) -> Result<Isometries> {
    let start = Instant::now();
    let default_cap = if want_list {
        DEFAULT_LIST_CAP
    } else {
        DEFAULT_COUNT_CAP
    };
    refuse(space, "isometry enumeration", cap.unwrap_or(default_cap))?;
    let dm = distance_matrix(space, Some(space.size()))?;
    let search = Search::new(space, &dm);
    let method = if want_list {
        CountMethod::Backtrack
    } else {
        method.unwrap_or(if space.size() <= DEFAULT_LIST_CAP {
            CountMethod::Backtrack
        } else {
            CountMethod::StabilizerChain
        })
    };
    let (count, maps) = match method {
        CountMethod::Backtrack => {
            let mut count = 0u64;
            let mut maps = Vec::new();
            let mut images = Vec::with_capacity(dm.size());
            let mut used = vec![false; dm.size()];
            search.dfs(&mut images, &mut used, &mut |imgs| {
                count += 1;
                if want_list {
                    maps.push(search.to_table(imgs));
                }
                true
            });
            (BigUint::from(count), want_list.then_some(maps))
        }
        CountMethod::StabilizerChain => (search.stabilizer_chain_count(), None),
    };
    Ok(Isometries {
        count,
        method,
        maps,
        elapsed: start.elapsed(),
    })
}

/// A closed-form count reported alongside the oracle.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabeledCount {
    pub label: String,
    #[serde(with = "crate::decimal")]
    pub value: BigUint,
    pub matches_oracle: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleReport {
    pub config: SpaceConfig,
    pub points: u64,
    pub method: CountMethod,
    #[serde(with = "crate::decimal")]
    pub isometry_count: BigUint,
    #[serde(with = "crate::decimal")]
    pub formula_count: BigUint,
    pub formula_match: bool,
    /// Alternate closed forms, each flagged against the oracle count.
    pub corollary_counts: Vec<LabeledCount>,
    /// Wall-clock time; omitted from JSON so reports are reproducible.
    #[serde(skip)]
    pub elapsed: Duration,
}

impl OracleReport {
    pub fn discrepancies(&self) -> impl Iterator<Item = &LabeledCount> {
        self.corollary_counts.iter().filter(|c| !c.matches_oracle)
    }
}

/// Closed forms printed for special cases of the configuration.
pub fn corollary_counts(space: &Space) -> Vec<(String, BigUint)> {
    let cfg = space.config();
    let (q, m, n) = (space.q(), space.m(), space.n());
    let mut out = Vec::new();
    if cfg.is_trivial_pi() {
        if m == 1 {
            out.push((
                "chain-trivial-pi-corollary".to_string(),
                chain::trivial_pi_corollary_order(q, n),
            ));
        }
        out.push((
            "product-trivial-pi-corollary".to_string(),
            trivial_pi_corollary_order(q, m, n),
        ));
        if n == 1 {
            out.push(("hamming-corollary".to_string(), hamming_order(q, m)));
        }
    }
    out
}

/// Runs the oracle and compares it with the product formula and every
/// applicable printed corollary.
pub fn verify_against_formula(space: &Space, cap: Option<u64>) -> Result<OracleReport> {
    let iso = enumerate_isometries(space, cap, false, None)?;
    let formula_count = full_order(space)?;
    let corollary_counts = corollary_counts(space)
        .into_iter()
        .map(|(label, value)| LabeledCount {
            matches_oracle: value == iso.count,
            label,
            value,
        })
        .collect();
    Ok(OracleReport {
        config: space.config().clone(),
        points: space.size(),
        method: iso.method,
        formula_match: formula_count == iso.count,
        isometry_count: iso.count,
        formula_count,
        corollary_counts,
        elapsed: iso.elapsed,
    })
}
