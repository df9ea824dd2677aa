//! Codes as finite sets of vectors, their metric invariants, and a
//! witness-producing equivalence search.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::chain::{ChainShape, ChainSymmetry};
use crate::error::{Error, Result};
use crate::oracle::enumerate_isometries;
use crate::product::{admissible_permutations, Symmetry};
use crate::space::{Space, SpaceConfig};

/// Search nodes explored before `equivalent` gives up.
pub const DEFAULT_BUDGET: u64 = 1_000_000;

/// Spaces at most this large are searched by listing every isometry.
pub const ORACLE_FALLBACK_POINTS: u64 = 16;

/// A nonempty set of vectors, stored as sorted ranks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Code {
    ranks: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeInvariants {
    pub size: usize,
    pub min_distance: Option<u32>,
    /// Unordered pairs of distinct codewords, by distance.
    pub distance_distribution: BTreeMap<u32, u64>,
    pub weight_distribution: BTreeMap<u32, u64>,
}

impl Code {
    pub fn new(space: &Space, ranks: impl IntoIterator<Item = u64>) -> Result<Self> {
        let mut ranks: Vec<u64> = ranks.into_iter().collect();
        if let Some(&bad) = ranks.iter().find(|&&r| r >= space.size()) {
            return Err(Error::usage(format!("rank {bad} is outside the space")));
        }
        ranks.sort_unstable();
        ranks.dedup();
        if ranks.is_empty() {
            return Err(Error::usage("a code needs at least one vector"));
        }
        Ok(Code { ranks })
    }

    pub fn ranks(&self) -> &[u64] {
        &self.ranks
    }

    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }

    pub fn contains(&self, r: u64) -> bool {
        self.ranks.binary_search(&r).is_ok()
    }

    pub fn invariants(&self, space: &Space) -> CodeInvariants {
        let mut distance_distribution = BTreeMap::new();
        for (i, &a) in self.ranks.iter().enumerate() {
            for &b in &self.ranks[i + 1..] {
                *distance_distribution
                    .entry(space.distance_ranks(a, b))
                    .or_insert(0) += 1;
            }
        }
        let mut weight_distribution = BTreeMap::new();
        for &a in &self.ranks {
            *weight_distribution.entry(space.weight_rank(a)).or_insert(0) += 1;
        }
        CodeInvariants {
            size: self.ranks.len(),
            min_distance: distance_distribution.keys().next().copied(),
            distance_distribution,
            weight_distribution,
        }
    }

    pub fn format(&self, space: &Space) -> Vec<String> {
        self.ranks.iter().map(|&r| space.format_rank(r)).collect()
    }
}

/// Image of a code under a symmetry.
pub fn apply_to_code(space: &Space, t: &Symmetry, code: &Code) -> Result<Code> {
    t.validate(space)?;
    let image = Code::new(space, code.ranks.iter().map(|&r| t.apply_rank(space, r)))?;
    debug_assert_eq!(
        image.invariants(space).distance_distribution,
        code.invariants(space).distance_distribution
    );
    Ok(image)
}

/// One codeword in a code file: text form or rank.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CodeEntry {
    Rank(u64),
    Text(String),
}

/// Parsed code file, before it is bound to a space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<SpaceConfig>,
    pub vectors: Vec<CodeEntry>,
}

impl CodeFile {
    /// Accepts a JSON document or one vector per line with `#` comments.
    pub fn parse(text: &str) -> Result<Self> {
        if text.trim_start().starts_with('{') {
            return serde_json::from_str(text).map_err(|e| Error::parse(format!("code file: {e}")));
        }
        let vectors = text
            .lines()
            .map(|l| l.split('#').next().unwrap().trim())
            .filter(|l| !l.is_empty())
            .map(|l| CodeEntry::Text(l.to_string()))
            .collect();
        Ok(CodeFile {
            config: None,
            vectors,
        })
    }

    pub fn into_code(self, space: &Space) -> Result<Code> {
        if let Some(cfg) = &self.config {
            if cfg != space.config() {
                return Err(Error::usage("code file was written for a different space"));
            }
        }
        let ranks = self
            .vectors
            .iter()
            .map(|e| match e {
                CodeEntry::Rank(r) => Ok(*r),
                CodeEntry::Text(t) => Ok(space.rank(&space.parse_vector(t)?)),
            })
            .collect::<Result<Vec<_>>>()?;
        Code::new(space, ranks)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchMethod {
    /// No search was needed.
    Trivial,
    /// Invariants differ.
    Screen,
    /// Every isometry of the space was listed.
    Oracle,
    /// Backtracking over codeword matchings per admissible σ.
    Matching,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum Verdict {
    Equivalent {
        witness: Symmetry,
        method: SearchMethod,
        explored: u64,
    },
    NotEquivalent {
        reason: String,
        method: SearchMethod,
        explored: u64,
    },
    Inconclusive {
        explored: u64,
        budget: u64,
    },
}

impl Verdict {
    pub fn witness(&self) -> Option<&Symmetry> {
        match self {
            Verdict::Equivalent { witness, .. } => Some(witness),
            _ => None,
        }
    }

    pub fn is_equivalent(&self) -> bool {
        matches!(self, Verdict::Equivalent { .. })
    }

    pub fn is_not_equivalent(&self) -> bool {
        matches!(self, Verdict::NotEquivalent { .. })
    }
}

/// Sorted distances from each codeword to all others.
fn profiles(space: &Space, code: &[u64]) -> Vec<Vec<u32>> {
    code.iter()
        .map(|&a| {
            let mut p: Vec<u32> = code.iter().map(|&b| space.distance_ranks(a, b)).collect();
            p.sort_unstable();
            p
        })
        .collect()
}

fn screen(space: &Space, c1: &Code, c2: &Code) -> Option<String> {
    if c1.len() != c2.len() {
        return Some(format!("sizes differ ({} vs {})", c1.len(), c2.len()));
    }
    let (i1, i2) = (c1.invariants(space), c2.invariants(space));
    if i1.distance_distribution != i2.distance_distribution {
        return Some(match (i1.min_distance, i2.min_distance) {
            (a, b) if a != b => format!(
                "minimum distances differ ({} vs {})",
                a.map_or("none".into(), |d| d.to_string()),
                b.map_or("none".into(), |d| d.to_string())
            ),
            _ => "distance distributions differ".into(),
        });
    }
    let mut p1 = profiles(space, &c1.ranks);
    let mut p2 = profiles(space, &c2.ranks);
    p1.sort();
    p2.sort();
    (p1 != p2).then(|| "per-codeword distance profiles differ".into())
}

/// Checks `t(c1) = c2` pointwise.
fn verify_witness(space: &Space, t: &Symmetry, c1: &Code, c2: &Code) -> Result<()> {
    let image = apply_to_code(space, t, c1)?;
    if image != *c2 {
        return Err(Error::Internal {
            chain: 0,
            reason: "equivalence witness does not map the first code onto the second".into(),
        });
    }
    Ok(())
}

/// Decides whether some symmetry maps `c1` onto `c2`.
///
/// Codes with different sizes, distance distributions, or per-codeword
/// distance profiles are rejected without search. Small spaces are settled
/// by listing all isometries. Otherwise, for every admissible `σ`, a
/// bijection `C1 → C2` is built codeword by codeword while each chain keeps
/// a partial map on rows that must stay injective and preserve the chain
/// distance; a complete matching extends level by level to triangular chain
/// tables. Any witness is checked pointwise before it is returned.
pub fn equivalent(space: &Space, c1: &Code, c2: &Code, budget: Option<u64>) -> Result<Verdict> {
    let budget = budget.unwrap_or(DEFAULT_BUDGET);
    if c1 == c2 {
        return Ok(Verdict::Equivalent {
            witness: Symmetry::identity(space),
            method: SearchMethod::Trivial,
            explored: 0,
        });
    }
    if let Some(reason) = screen(space, c1, c2) {
        return Ok(Verdict::NotEquivalent {
            reason,
            method: SearchMethod::Screen,
            explored: 0,
        });
    }
    if space.size() <= ORACLE_FALLBACK_POINTS {
        return by_oracle(space, c1, c2);
    }
    Matcher::new(space, c1, c2, budget).run()
}

fn by_oracle(space: &Space, c1: &Code, c2: &Code) -> Result<Verdict> {
    let iso = enumerate_isometries(space, Some(ORACLE_FALLBACK_POINTS), true, None)?;
    let maps = iso.maps.expect("listing was requested");
    let explored = maps.len() as u64;
    for f in &maps {
        if c1.ranks.iter().all(|&r| c2.contains(f[r as usize])) {
            let witness = Symmetry::decompose(space, f)?;
            verify_witness(space, &witness, c1, c2)?;
            return Ok(Verdict::Equivalent {
                witness,
                method: SearchMethod::Oracle,
                explored,
            });
        }
    }
    Ok(Verdict::NotEquivalent {
        reason: "no isometry of the space maps one code onto the other".into(),
        method: SearchMethod::Oracle,
        explored,
    })
}

/// Partial map between rows of one chain, with undo log.
#[derive(Default)]
struct RowMap {
    fwd: HashMap<u64, u64>,
    bwd: HashMap<u64, u64>,
    log: Vec<u64>,
}

impl RowMap {
    /// Adds `x ↦ y`, returning whether it was new, or `None` on conflict.
    fn try_add(&mut self, shape: &ChainShape, x: u64, y: u64) -> Option<bool> {
        if let Some(&img) = self.fwd.get(&x) {
            return (img == y).then_some(false);
        }
        if self.bwd.contains_key(&y) {
            return None;
        }
        if self
            .fwd
            .iter()
            .any(|(&x2, &y2)| shape.distance(x, x2) != shape.distance(y, y2))
        {
            return None;
        }
        self.fwd.insert(x, y);
        self.bwd.insert(y, x);
        self.log.push(x);
        Some(true)
    }

    fn undo(&mut self) {
        let x = self.log.pop().expect("undo without add");
        let y = self.fwd.remove(&x).unwrap();
        self.bwd.remove(&y);
    }

    /// Completes the map to a triangular chain symmetry. Each level and tail
    /// gets the forced block values first, then the remaining values in
    /// increasing order.
    fn extend(&self, shape: &ChainShape) -> Result<ChainSymmetry> {
        let mut forced: HashMap<(usize, u64), Vec<Option<u64>>> = HashMap::new();
        for (&x, &y) in &self.fwd {
            for j in 0..shape.levels() {
                let perm = forced
                    .entry((j, shape.tail_rank(x, j)))
                    .or_insert_with(|| vec![None; shape.block_size(j) as usize]);
                perm[shape.level_value(x, j) as usize] = Some(shape.level_value(y, j));
            }
        }
        let complete: HashMap<(usize, u64), Vec<u64>> = forced
            .into_iter()
            .map(|(key, partial)| {
                let mut used = vec![false; partial.len()];
                for y in partial.iter().flatten() {
                    used[*y as usize] = true;
                }
                let mut free = (0..partial.len() as u64).filter(|&v| !used[v as usize]);
                let perm = partial
                    .iter()
                    .map(|p| p.unwrap_or_else(|| free.next().unwrap()))
                    .collect();
                (key, perm)
            })
            .collect();
        ChainSymmetry::from_fn(shape.q(), shape.pi(), |j, x, tail| {
            complete.get(&(j, tail)).map_or(x, |p| p[x as usize])
        })
    }
}

struct Matcher<'a> {
    space: &'a Space,
    c1: &'a Code,
    c2: &'a Code,
    shapes: Vec<ChainShape>,
    /// `rows1[a][s]`: row rank of codeword `a` of `C1` in chain `s`.
    rows1: Vec<Vec<u64>>,
    rows2: Vec<Vec<u64>>,
    /// Codewords of `C1` in assignment order.
    order: Vec<usize>,
    /// Admissible images for each codeword of `C1`, by distance profile.
    candidates: Vec<Vec<usize>>,
    budget: u64,
    explored: u64,
}

enum Outcome {
    Found,
    Exhausted,
    OutOfBudget,
}

impl<'a> Matcher<'a> {
    fn new(space: &'a Space, c1: &'a Code, c2: &'a Code, budget: u64) -> Self {
        let m = space.m();
        let rows = |c: &Code| -> Vec<Vec<u64>> {
            c.ranks
                .iter()
                .map(|&r| (0..m).map(|s| space.row_rank_of(r, s)).collect())
                .collect()
        };
        let (p1, p2) = (profiles(space, &c1.ranks), profiles(space, &c2.ranks));
        let candidates: Vec<Vec<usize>> = p1
            .iter()
            .map(|p| (0..p2.len()).filter(|&b| p2[b] == *p).collect())
            .collect();
        let mut order: Vec<usize> = (0..c1.len()).collect();
        order.sort_by_key(|&a| (candidates[a].len(), a));
        Matcher {
            space,
            c1,
            c2,
            shapes: (0..m)
                .map(|s| ChainShape::new(space.q(), space.chain_pi(s)).unwrap())
                .collect(),
            rows1: rows(c1),
            rows2: rows(c2),
            order,
            candidates,
            budget,
            explored: 0,
        }
    }

    fn run(mut self) -> Result<Verdict> {
        let m = self.space.m();
        for sigma in admissible_permutations(self.space.config()) {
            // input chain s lands on output chain target[s]
            let mut target = vec![0usize; m];
            for (i, &s) in sigma.iter().enumerate() {
                target[s] = i;
            }
            let mut maps: Vec<RowMap> = (0..m).map(|_| RowMap::default()).collect();
            let mut used = vec![false; self.c2.len()];
            match self.dfs(0, &target, &mut maps, &mut used) {
                Outcome::Found => {
                    let chains = maps
                        .iter()
                        .zip(&self.shapes)
                        .map(|(map, shape)| map.extend(shape))
                        .collect::<Result<Vec<_>>>()?;
                    let witness = Symmetry::new(self.space, sigma, chains)?;
                    verify_witness(self.space, &witness, self.c1, self.c2)?;
                    return Ok(Verdict::Equivalent {
                        witness,
                        method: SearchMethod::Matching,
                        explored: self.explored,
                    });
                }
                Outcome::OutOfBudget => {
                    return Ok(Verdict::Inconclusive {
                        explored: self.explored,
                        budget: self.budget,
                    })
                }
                Outcome::Exhausted => {}
            }
        }
        Ok(Verdict::NotEquivalent {
            reason: "no symmetry maps one code onto the other".into(),
            method: SearchMethod::Matching,
            explored: self.explored,
        })
    }

    fn dfs(
        &mut self,
        t: usize,
        target: &[usize],
        maps: &mut [RowMap],
        used: &mut [bool],
    ) -> Outcome {
        if t == self.order.len() {
            return Outcome::Found;
        }
        let a = self.order[t];
        for ci in 0..self.candidates[a].len() {
            let b = self.candidates[a][ci];
            if used[b] {
                continue;
            }
            if self.explored >= self.budget {
                return Outcome::OutOfBudget;
            }
            self.explored += 1;
            let mut added: Vec<usize> = Vec::new();
            let mut ok = true;
            for s in 0..maps.len() {
                let y = self.rows2[b][target[s]];
                match maps[s].try_add(&self.shapes[s], self.rows1[a][s], y) {
                    Some(true) => added.push(s),
                    Some(false) => {}
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                used[b] = true;
                match self.dfs(t + 1, target, maps, used) {
                    Outcome::Exhausted => {}
                    other => return other,
                }
                used[b] = false;
            }
            for s in added {
                maps[s].undo();
            }
        }
        Outcome::Exhausted
    }
}
