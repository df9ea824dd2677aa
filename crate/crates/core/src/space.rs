//! The ordered Hamming block space: `m` disjoint chains of length `n`, each
//! poset element `(i, j)` carrying a block `F_q^{k_ij}`.
//!
//! Vectors are stored as an `m × n` grid of block ranks. The canonical vector
//! rank is mixed radix over block ranks, chain-major and level-minor, with
//! chain 1 and level 1 least significant. Because block ranks are themselves
//! base-`q` over field element ranks (first element least significant), the
//! vector rank is also a plain base-`q` numeral over all `N` field coordinates.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Field, FieldElement, FieldSpec};

/// Default ceiling on `q^N` for operations that walk every point of `V`.
pub const DEFAULT_MATERIALIZE_CAP: u64 = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceConfig {
    pub field: FieldSpec,
    pub m: usize,
    pub n: usize,
    /// `pi[i][j]` is the dimension of the block at chain `i`, level `j`.
    pub pi: Vec<Vec<usize>>,
}

impl SpaceConfig {
    pub fn new(field: FieldSpec, pi: Vec<Vec<usize>>) -> Self {
        let m = pi.len();
        let n = pi.first().map_or(0, Vec::len);
        SpaceConfig { field, m, n, pi }
    }

    /// `m` chains of length `n` with every block one-dimensional.
    pub fn trivial(q: u32, m: usize, n: usize) -> Result<Self> {
        Ok(SpaceConfig::new(
            FieldSpec::of_order(q)?,
            vec![vec![1; n]; m],
        ))
    }

    /// Whether every block is one-dimensional.
    pub fn is_trivial_pi(&self) -> bool {
        self.pi.iter().flatten().all(|&k| k == 1)
    }

    /// Total dimension `N = Σ k_ij`.
    pub fn dimension(&self) -> usize {
        self.pi.iter().flatten().sum()
    }
}

/// Poset element `(chain, level)`, both zero-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Coord {
    pub chain: usize,
    pub level: usize,
}

impl Coord {
    pub fn new(chain: usize, level: usize) -> Self {
        Coord { chain, level }
    }
}

pub type CoordSet = BTreeSet<Coord>;

/// An element of `V` as a row-major `m × n` grid of block ranks.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BlockVector {
    blocks: Vec<u64>,
}

impl BlockVector {
    pub fn blocks(&self) -> &[u64] {
        &self.blocks
    }
}

/// A validated space together with its field and radix tables.
#[derive(Debug, Clone)]
pub struct Space {
    config: SpaceConfig,
    field: Field,
    q: u64,
    dim: usize,
    total: u64,
    block_size: Vec<u64>,
    block_place: Vec<u64>,
    row_size: Vec<u64>,
    row_place: Vec<u64>,
    /// `row_prefix[i][t] = q^{k_i1 + … + k_it}`, `t ∈ [0, n]`.
    row_prefix: Vec<Vec<u64>>,
}

impl PartialEq for Space {
    fn eq(&self, other: &Self) -> bool {
        self.config == other.config
    }
}

impl Eq for Space {}

impl Space {
    pub fn new(config: SpaceConfig) -> Result<Self> {
        let field = Field::new(config.field.clone())?;
        let SpaceConfig { m, n, .. } = config;
        if m == 0 || n == 0 {
            return Err(Error::usage("m and n must both be at least 1"));
        }
        if config.pi.len() != m || config.pi.iter().any(|row| row.len() != n) {
            return Err(Error::usage(format!("pi must be a {m}×{n} grid")));
        }
        if config.pi.iter().flatten().any(|&k| k == 0) {
            return Err(Error::usage("every block dimension must be positive"));
        }
        let q = field.order() as u64;
        let dim = config.dimension();
        let total = u32::try_from(dim)
            .ok()
            .and_then(|d| q.checked_pow(d))
            .filter(|&t| t < 1 << 62)
            .ok_or_else(|| Error::usage(format!("q^N = {q}^{dim} does not fit in 62 bits")))?;

        let mut block_size = Vec::with_capacity(m * n);
        let mut block_place = Vec::with_capacity(m * n);
        let mut row_size = Vec::with_capacity(m);
        let mut row_place = Vec::with_capacity(m);
        let mut row_prefix = Vec::with_capacity(m);
        let mut place = 1u64;
        for row in &config.pi {
            row_place.push(place);
            let mut prefix = vec![1u64];
            let mut within = 1u64;
            for &k in row {
                let size = q.pow(k as u32);
                block_size.push(size);
                block_place.push(place);
                place *= size;
                within *= size;
                prefix.push(within);
            }
            row_size.push(within);
            row_prefix.push(prefix);
        }
        let mut config = config;
        config.field = field.spec().clone();
        Ok(Space {
            config,
            field,
            q,
            dim,
            total,
            block_size,
            block_place,
            row_size,
            row_place,
            row_prefix,
        })
    }

    pub fn config(&self) -> &SpaceConfig {
        &self.config
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn m(&self) -> usize {
        self.config.m
    }

    pub fn n(&self) -> usize {
        self.config.n
    }

    /// Total dimension `N`.
    pub fn dimension(&self) -> usize {
        self.dim
    }

    /// Number of points `q^N`.
    pub fn size(&self) -> u64 {
        self.total
    }

    /// Block dimensions of chain `i`.
    pub fn chain_pi(&self, i: usize) -> &[usize] {
        &self.config.pi[i]
    }

    /// Number of distinct rows of chain `i`, i.e. `q^{K_i}`.
    pub fn row_size(&self, i: usize) -> u64 {
        self.row_size[i]
    }

    pub fn block_size(&self, i: usize, j: usize) -> u64 {
        self.block_size[i * self.config.n + j]
    }

    /// Refuses spaces with more than `cap` points (default 2^20).
    pub fn ensure_materializable(&self, what: &str, cap: Option<u64>) -> Result<()> {
        let cap = cap.unwrap_or(DEFAULT_MATERIALIZE_CAP);
        if self.total > cap {
            return Err(Error::CapExceeded {
                what: what.to_string(),
                size: self.total,
                cap,
                log10_estimate: (self.total as f64).log10(),
            });
        }
        Ok(())
    }

    pub fn zero(&self) -> BlockVector {
        BlockVector {
            blocks: vec![0; self.config.m * self.config.n],
        }
    }

    /// Builds a vector from an `m × n` grid of block ranks.
    pub fn vector(&self, grid: &[Vec<u64>]) -> Result<BlockVector> {
        if grid.len() != self.config.m || grid.iter().any(|r| r.len() != self.config.n) {
            return Err(Error::usage("vector grid does not match m × n"));
        }
        let blocks: Vec<u64> = grid.iter().flatten().copied().collect();
        self.check_blocks(&blocks)?;
        Ok(BlockVector { blocks })
    }

    /// Builds a vector from element ranks, `elems[i][j]` being block `(i, j)`.
    pub fn vector_from_elements(&self, elems: &[Vec<Vec<u32>>]) -> Result<BlockVector> {
        if elems.len() != self.config.m || elems.iter().any(|r| r.len() != self.config.n) {
            return Err(Error::usage("vector grid does not match m × n"));
        }
        let mut blocks = Vec::with_capacity(self.config.m * self.config.n);
        for (i, row) in elems.iter().enumerate() {
            for (j, block) in row.iter().enumerate() {
                let k = self.config.pi[i][j];
                if block.len() != k {
                    return Err(Error::usage(format!(
                        "block ({}, {}) needs {k} elements, got {}",
                        i + 1,
                        j + 1,
                        block.len()
                    )));
                }
                let els = block
                    .iter()
                    .map(|&r| self.field.element(r))
                    .collect::<Result<Vec<FieldElement>>>()?;
                blocks.push(self.field.block_rank(&els)?);
            }
        }
        Ok(BlockVector { blocks })
    }

    fn check_blocks(&self, blocks: &[u64]) -> Result<()> {
        for (idx, (&b, &size)) in blocks.iter().zip(&self.block_size).enumerate() {
            if b >= size {
                return Err(Error::usage(format!(
                    "block ({}, {}) rank {b} out of range [0, {size})",
                    idx / self.config.n + 1,
                    idx % self.config.n + 1
                )));
            }
        }
        Ok(())
    }

    pub fn block(&self, v: &BlockVector, i: usize, j: usize) -> u64 {
        v.blocks[i * self.config.n + j]
    }

    /// Row `i` (the chain-`i` component `v_i ∈ U_i`) as block ranks.
    pub fn row<'a>(&self, v: &'a BlockVector, i: usize) -> &'a [u64] {
        let n = self.config.n;
        &v.blocks[i * n..(i + 1) * n]
    }

    pub fn rank(&self, v: &BlockVector) -> u64 {
        v.blocks
            .iter()
            .zip(&self.block_place)
            .map(|(&b, &pl)| b * pl)
            .sum()
    }

    pub fn unrank(&self, r: u64) -> Result<BlockVector> {
        if r >= self.total {
            return Err(Error::usage(format!(
                "vector rank {r} out of range [0, {})",
                self.total
            )));
        }
        let mut rest = r;
        let blocks = self
            .block_size
            .iter()
            .map(|&size| {
                let b = rest % size;
                rest /= size;
                b
            })
            .collect();
        Ok(BlockVector { blocks })
    }

    /// Rank of chain row `i` within `[0, q^{K_i})`, level 1 least significant.
    pub fn row_rank(&self, i: usize, row: &[u64]) -> u64 {
        let n = self.config.n;
        let sizes = &self.block_size[i * n..(i + 1) * n];
        row.iter()
            .zip(sizes)
            .rev()
            .fold(0, |acc, (&b, &s)| acc * s + b)
    }

    /// Row rank of chain `i` extracted from a vector rank.
    #[inline]
    pub fn row_rank_of(&self, r: u64, i: usize) -> u64 {
        (r / self.row_place[i]) % self.row_size[i]
    }

    /// Vector rank assembled from per-chain row ranks.
    pub fn from_row_ranks(&self, rows: &[u64]) -> u64 {
        rows.iter()
            .zip(&self.row_place)
            .map(|(&r, &pl)| r * pl)
            .sum()
    }

    /// Chain distance between two row ranks of chain `i`: the highest level
    /// (1-based) at which they differ, or 0.
    #[inline]
    pub fn chain_distance_ranks(&self, i: usize, a: u64, b: u64) -> u32 {
        let prefix = &self.row_prefix[i];
        let mut t = 0;
        while a / prefix[t] != b / prefix[t] {
            t += 1;
        }
        t as u32
    }

    /// `(P, π)`-weight of the vector with rank `r`.
    #[inline]
    pub fn weight_rank(&self, r: u64) -> u32 {
        (0..self.config.m)
            .map(|i| {
                let row = self.row_rank_of(r, i);
                let n = self.config.n;
                self.row_prefix[i][..n]
                    .iter()
                    .filter(|&&p| row >= p)
                    .count() as u32
            })
            .sum()
    }

    /// Coordinate-wise `a + b` on vector ranks.
    pub fn add_ranks(&self, a: u64, b: u64) -> u64 {
        if self.field.characteristic() == 2 {
            return a ^ b;
        }
        self.zip_digits(a, b, self.dim, |x, y| self.field.add(x, y))
    }

    /// Sum of two block ranks of width `k`.
    pub fn add_block_ranks(&self, k: usize, a: u64, b: u64) -> u64 {
        if self.field.characteristic() == 2 {
            return a ^ b;
        }
        self.zip_digits(a, b, k, |x, y| self.field.add(x, y))
    }

    /// Coordinate-wise `a − b` on vector ranks.
    pub fn sub_ranks(&self, a: u64, b: u64) -> u64 {
        if self.field.characteristic() == 2 {
            return a ^ b;
        }
        self.zip_digits(a, b, self.dim, |x, y| self.field.sub(x, y))
    }

    /// Scalar multiple `c · a` on vector ranks.
    pub fn scale_rank(&self, c: FieldElement, a: u64) -> u64 {
        self.zip_digits(a, 0, self.dim, |x, _| self.field.mul(c, x))
    }

    fn zip_digits(
        &self,
        mut a: u64,
        mut b: u64,
        digits: usize,
        op: impl Fn(FieldElement, FieldElement) -> FieldElement,
    ) -> u64 {
        let q = self.q;
        let mut out = 0u64;
        let mut place = 1u64;
        for _ in 0..digits {
            let x = self.field.element((a % q) as u32).unwrap();
            let y = self.field.element((b % q) as u32).unwrap();
            out += op(x, y).rank() as u64 * place;
            a /= q;
            b /= q;
            place *= q;
        }
        out
    }

    /// `d(a, b) = w(a − b)` on vector ranks.
    #[inline]
    pub fn distance_ranks(&self, a: u64, b: u64) -> u32 {
        self.weight_rank(self.sub_ranks(a, b))
    }

    pub fn add(&self, u: &BlockVector, v: &BlockVector) -> BlockVector {
        self.unrank(self.add_ranks(self.rank(u), self.rank(v)))
            .unwrap()
    }

    pub fn sub(&self, u: &BlockVector, v: &BlockVector) -> BlockVector {
        self.unrank(self.sub_ranks(self.rank(u), self.rank(v)))
            .unwrap()
    }

    pub fn check_vector(&self, v: &BlockVector) -> Result<()> {
        if v.blocks.len() != self.config.m * self.config.n {
            return Err(Error::usage("vector does not conform to the space"));
        }
        self.check_blocks(&v.blocks)
    }

    /// Nonzero blocks of `v`.
    pub fn pi_support(&self, v: &BlockVector) -> CoordSet {
        let n = self.config.n;
        v.blocks
            .iter()
            .enumerate()
            .filter(|(_, &b)| b != 0)
            .map(|(idx, _)| Coord::new(idx / n, idx % n))
            .collect()
    }

    /// Smallest ideal containing `set`: everything below each element on its chain.
    pub fn ideal_closure(&self, set: &CoordSet) -> CoordSet {
        set.iter()
            .flat_map(|c| (0..=c.level).map(move |l| Coord::new(c.chain, l)))
            .collect()
    }

    pub fn weight(&self, v: &BlockVector) -> u32 {
        self.ideal_closure(&self.pi_support(v)).len() as u32
    }

    pub fn distance(&self, u: &BlockVector, v: &BlockVector) -> u32 {
        self.weight(&self.sub(u, v))
    }

    /// Points of `V` in canonical rank order, subject to the default cap.
    pub fn points(&self) -> Result<impl Iterator<Item = u64>> {
        self.ensure_materializable("enumerating V", None)?;
        Ok(0..self.total)
    }

    /// Parses the text format: chains separated by `;`, blocks by `,`, a
    /// block being its juxtaposed element ranks (or `.`-separated ranks).
    pub fn parse_vector(&self, text: &str) -> Result<BlockVector> {
        let chains: Vec<&str> = text.trim().split(';').collect();
        if chains.len() != self.config.m {
            return Err(Error::parse(format!(
                "expected {} chains separated by ';', got {}",
                self.config.m,
                chains.len()
            )));
        }
        let mut elems = Vec::with_capacity(self.config.m);
        for chain in chains {
            let blocks: Vec<&str> = chain.trim().split(',').collect();
            if blocks.len() != self.config.n {
                return Err(Error::parse(format!(
                    "expected {} blocks separated by ',', got {} in '{chain}'",
                    self.config.n,
                    blocks.len()
                )));
            }
            let mut row = Vec::with_capacity(blocks.len());
            for block in blocks {
                row.push(self.parse_block(block.trim())?);
            }
            elems.push(row);
        }
        self.vector_from_elements(&elems)
            .map_err(|e| Error::parse(format!("'{}': {e}", text.trim())))
    }

    fn parse_block(&self, block: &str) -> Result<Vec<u32>> {
        let parse = |s: &str| {
            s.parse::<u32>()
                .map_err(|_| Error::parse(format!("bad element '{s}' in block '{block}'")))
        };
        if block.is_empty() {
            return Err(Error::parse("empty block"));
        }
        if block.contains('.') || self.q > 10 {
            block.split('.').map(parse).collect()
        } else {
            block.chars().map(|c| parse(&c.to_string())).collect()
        }
    }

    pub fn format_vector(&self, v: &BlockVector) -> String {
        let sep = if self.q > 10 { "." } else { "" };
        (0..self.config.m)
            .map(|i| {
                (0..self.config.n)
                    .map(|j| {
                        let k = self.config.pi[i][j];
                        self.field
                            .block_unrank(self.block(v, i, j), k)
                            .unwrap()
                            .iter()
                            .map(|x| x.rank().to_string())
                            .collect::<Vec<_>>()
                            .join(sep)
                    })
                    .collect::<Vec<_>>()
                    .join(",")
            })
            .collect::<Vec<_>>()
            .join(";")
    }

    pub fn format_rank(&self, r: u64) -> String {
        match self.unrank(r) {
            Ok(v) => self.format_vector(&v),
            Err(_) => format!("#{r}"),
        }
    }
}

/// Chain distance between two rows given as block ranks: the largest
/// (1-based) level at which they differ, 0 if equal.
pub fn chain_distance(u: &[u64], v: &[u64]) -> u32 {
    u.iter()
        .zip(v)
        .rposition(|(a, b)| a != b)
        .map_or(0, |j| j as u32 + 1)
}

impl fmt::Display for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.chain + 1, self.level + 1)
    }
}
