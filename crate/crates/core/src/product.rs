//! Symmetries of the full `(m, n, π)` space in canonical form `(σ, g)`.
//!
//! `g = (g_1, …, g_m)` acts chain-wise by triangular chain symmetries, then
//! rows are permuted by an admissible `σ`:
//!
//! ```text
//! T(v)_i = g_{σ(i)}(v_{σ(i)})
//! ```
//!
//! so input chain `σ(i)` lands on output chain `i`. Translations are folded
//! into the chain tables, so every isometry of `V` (origin-fixing or not) has
//! exactly this form.

use num_bigint::BigUint;
use num_traits::One;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::chain::{chain_order, ChainSymmetry};
use crate::error::{Error, Result};
use crate::space::{BlockVector, Space, SpaceConfig};
use crate::table::{check_bijection, check_isometry};

/// Whether `sigma` (zero-based images) is a permutation of the chains that
/// only exchanges chains with identical block dimensions.
pub fn is_admissible(sigma: &[usize], config: &SpaceConfig) -> bool {
    let m = config.pi.len();
    if sigma.len() != m {
        return false;
    }
    let mut seen = vec![false; m];
    for &s in sigma {
        if s >= m || std::mem::replace(&mut seen[s], true) {
            return false;
        }
    }
    sigma
        .iter()
        .enumerate()
        .all(|(i, &s)| config.pi[s] == config.pi[i])
}

/// Every admissible permutation, identity first, in lexicographic order.
pub fn admissible_permutations(config: &SpaceConfig) -> Vec<Vec<usize>> {
    fn go(
        config: &SpaceConfig,
        sigma: &mut Vec<usize>,
        used: &mut [bool],
        out: &mut Vec<Vec<usize>>,
    ) {
        let i = sigma.len();
        if i == used.len() {
            out.push(sigma.clone());
            return;
        }
        for j in 0..used.len() {
            if !used[j] && config.pi[j] == config.pi[i] {
                used[j] = true;
                sigma.push(j);
                go(config, sigma, used, out);
                sigma.pop();
                used[j] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(
        config,
        &mut Vec::new(),
        &mut vec![false; config.pi.len()],
        &mut out,
    );
    out
}

/// Classes of chains with identical block dimensions, in first-occurrence order.
pub fn pi_classes(config: &SpaceConfig) -> Vec<Vec<usize>> {
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for (i, row) in config.pi.iter().enumerate() {
        match classes.iter_mut().find(|c| config.pi[c[0]] == *row) {
            Some(c) => c.push(i),
            None => classes.push(vec![i]),
        }
    }
    classes
}

fn factorial(n: usize) -> BigUint {
    (2..=n as u64).fold(BigUint::one(), |acc, k| acc * k)
}

/// `|S_π| = Π m_j!` over classes of equal rows of `π`.
pub fn s_pi_order(config: &SpaceConfig) -> BigUint {
    pi_classes(config)
        .iter()
        .map(|c| factorial(c.len()))
        .product()
}

/// `|Symm(V)| = |S_π| · Π_i |Symm(U_i)|`.
pub fn full_order(space: &Space) -> Result<BigUint> {
    let mut order = s_pi_order(space.config());
    for i in 0..space.m() {
        order *= chain_order(space.q(), space.chain_pi(i))?;
    }
    Ok(order)
}

/// The closed form printed for the all-ones partition,
/// `(q!)^{m·(q^n − 1)/(q − 1) + m} · m!`.
pub fn trivial_pi_corollary_order(q: u64, m: usize, n: usize) -> BigUint {
    let exp = m as u64 * ((q.pow(n as u32) - 1) / (q - 1)) + m as u64;
    factorial(q as usize).pow(exp as u32) * factorial(m)
}

/// `(q!)^m · m!`, the Hamming-space symmetry count.
pub fn hamming_order(q: u64, m: usize) -> BigUint {
    factorial(q as usize).pow(m as u32) * factorial(m)
}

/// A symmetry `T = T_σ ∘ g` in canonical form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SymmetryRepr", into = "SymmetryRepr")]
pub struct Symmetry {
    /// Zero-based images.
    sigma: Vec<usize>,
    chains: Vec<ChainSymmetry>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SymmetryRepr {
    /// One-based image sequence.
    sigma: Vec<usize>,
    chains: Vec<ChainSymmetry>,
}

impl From<Symmetry> for SymmetryRepr {
    fn from(s: Symmetry) -> Self {
        SymmetryRepr {
            sigma: s.sigma.iter().map(|x| x + 1).collect(),
            chains: s.chains,
        }
    }
}

impl TryFrom<SymmetryRepr> for Symmetry {
    type Error = Error;

    fn try_from(r: SymmetryRepr) -> Result<Self> {
        if r.sigma.contains(&0) {
            return Err(Error::usage("sigma is one-based"));
        }
        if r.sigma.len() != r.chains.len() {
            return Err(Error::usage("sigma and chains differ in length"));
        }
        Ok(Symmetry {
            sigma: r.sigma.iter().map(|x| x - 1).collect(),
            chains: r.chains,
        })
    }
}

impl Symmetry {
    /// Assembles and validates a canonical symmetry for `space`.
    pub fn new(space: &Space, sigma: Vec<usize>, chains: Vec<ChainSymmetry>) -> Result<Self> {
        let sym = Symmetry { sigma, chains };
        sym.validate(space)?;
        Ok(sym)
    }

    /// Checks admissibility of `σ` and that chain `i` has shape `π_i`.
    pub fn validate(&self, space: &Space) -> Result<()> {
        if !is_admissible(&self.sigma, space.config()) {
            return Err(Error::usage(format!(
                "sigma {:?} is not an admissible permutation",
                self.sigma.iter().map(|x| x + 1).collect::<Vec<_>>()
            )));
        }
        if self.chains.len() != space.m() {
            return Err(Error::usage(format!(
                "expected {} chain symmetries, got {}",
                space.m(),
                self.chains.len()
            )));
        }
        for (i, c) in self.chains.iter().enumerate() {
            if c.pi() != space.chain_pi(i) || c.q() != space.q() {
                return Err(Error::usage(format!(
                    "chain {} symmetry has shape {:?} over q={}, expected {:?} over q={}",
                    i + 1,
                    c.pi(),
                    c.q(),
                    space.chain_pi(i),
                    space.q()
                )));
            }
        }
        Ok(())
    }

    pub fn identity(space: &Space) -> Self {
        let chains = (0..space.m())
            .map(|i| ChainSymmetry::identity(space.q(), space.chain_pi(i)).unwrap())
            .collect();
        Symmetry {
            sigma: (0..space.m()).collect(),
            chains,
        }
    }

    /// The pure row permutation `T_σ`.
    pub fn from_sigma(space: &Space, sigma: Vec<usize>) -> Result<Self> {
        let chains = Symmetry::identity(space).chains;
        Symmetry::new(space, sigma, chains)
    }

    /// The chain-wise map `g` with `σ = id`.
    pub fn from_chains(space: &Space, chains: Vec<ChainSymmetry>) -> Result<Self> {
        Symmetry::new(space, (0..space.m()).collect(), chains)
    }

    pub fn sigma(&self) -> &[usize] {
        &self.sigma
    }

    pub fn chains(&self) -> &[ChainSymmetry] {
        &self.chains
    }

    pub fn is_identity(&self) -> bool {
        self.is_chain_only() && self.is_sigma_only()
    }

    /// `σ = id`.
    pub fn is_chain_only(&self) -> bool {
        self.sigma.iter().enumerate().all(|(i, &s)| i == s)
    }

    /// Every chain table is the identity.
    pub fn is_sigma_only(&self) -> bool {
        self.chains.iter().all(ChainSymmetry::is_identity)
    }

    /// Image of the vector with rank `r`.
    pub fn apply_rank(&self, space: &Space, r: u64) -> u64 {
        let images: Vec<u64> = self
            .chains
            .iter()
            .enumerate()
            .map(|(i, g)| g.apply_rank(space.row_rank_of(r, i)))
            .collect();
        let rows: Vec<u64> = self.sigma.iter().map(|&s| images[s]).collect();
        space.from_row_ranks(&rows)
    }

    pub fn apply(&self, space: &Space, v: &BlockVector) -> Result<BlockVector> {
        space.check_vector(v)?;
        space.unrank(self.apply_rank(space, space.rank(v)))
    }

    /// Dense bijection table on vector ranks.
    pub fn table(&self, space: &Space) -> Result<Vec<u64>> {
        space.ensure_materializable("tabulating a symmetry", None)?;
        Ok((0..space.size())
            .map(|r| self.apply_rank(space, r))
            .collect())
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        let same = self.sigma.len() == other.sigma.len()
            && self
                .chains
                .iter()
                .zip(&other.chains)
                .all(|(a, b)| a.shape() == b.shape());
        if same {
            Ok(())
        } else {
            Err(Error::usage("symmetries belong to different spaces"))
        }
    }

    /// `self ∘ other`, in canonical form.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let m = self.sigma.len();
        // σ_C(i) = σ_B(σ_A(i)),  C_r = A_{σ_B⁻¹(r)} ∘ B_r
        let sigma: Vec<usize> = (0..m).map(|i| other.sigma[self.sigma[i]]).collect();
        let mut other_inv = vec![0usize; m];
        for (i, &s) in other.sigma.iter().enumerate() {
            other_inv[s] = i;
        }
        let chains = (0..m)
            .map(|r| self.chains[other_inv[r]].compose(&other.chains[r]))
            .collect::<Result<Vec<_>>>()?;
        Ok(Symmetry { sigma, chains })
    }

    pub fn invert(&self) -> Self {
        let m = self.sigma.len();
        // τ = σ⁻¹,  h_s = g_{σ(s)}⁻¹
        let mut tau = vec![0usize; m];
        for (i, &s) in self.sigma.iter().enumerate() {
            tau[s] = i;
        }
        let chains = (0..m)
            .map(|s| self.chains[self.sigma[s]].invert())
            .collect();
        Symmetry { sigma: tau, chains }
    }

    /// Translation `u ↦ u + w`, expressed through per-level block shifts.
    pub fn translation(space: &Space, w: &BlockVector) -> Result<Self> {
        space.check_vector(w)?;
        let chains = (0..space.m())
            .map(|i| {
                let pi = space.chain_pi(i);
                ChainSymmetry::from_fn(space.q(), pi, |j, x, _| {
                    space.add_block_ranks(pi[j], x, space.block(w, i, j))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Symmetry {
            sigma: (0..space.m()).collect(),
            chains,
        })
    }

    /// Uniform `σ ∈ S_π` and independent uniform chain tables.
    pub fn random_with<R: Rng + ?Sized>(space: &Space, rng: &mut R) -> Self {
        let mut sigma: Vec<usize> = (0..space.m()).collect();
        for class in pi_classes(space.config()) {
            let mut images = class.clone();
            images.shuffle(rng);
            for (&i, &s) in class.iter().zip(&images) {
                sigma[i] = s;
            }
        }
        let chains = (0..space.m())
            .map(|i| ChainSymmetry::random_with(space.q(), space.chain_pi(i), rng).unwrap())
            .collect();
        Symmetry { sigma, chains }
    }

    pub fn random(space: &Space, seed: u64) -> Self {
        Symmetry::random_with(space, &mut ChaCha8Rng::seed_from_u64(seed))
    }

    /// Recovers the canonical form of an arbitrary isometry given as a dense
    /// table on vector ranks.
    pub fn decompose(space: &Space, f: &[u64]) -> Result<Self> {
        check_bijection(f, space.size())?;
        check_isometry(f, |a, b| space.distance_ranks(a, b))?;

        // f = S_w ∘ f0 with f0(0) = 0
        let w = f[0];
        let f0 = |x: u64| space.sub_ranks(f[x as usize], w);
        let m = space.m();

        // each chain's weight-1 sphere lands inside a single chain
        let mut target = vec![0usize; m];
        for (i, slot) in target.iter_mut().enumerate() {
            let mut hit: Option<usize> = None;
            for x in 1..space.block_size(i, 0) {
                let img = f0(space.from_row_ranks(&unit_row(m, i, x)));
                let chains: Vec<usize> =
                    (0..m).filter(|&r| space.row_rank_of(img, r) != 0).collect();
                match (chains.as_slice(), hit) {
                    ([r], None) => hit = Some(*r),
                    ([r], Some(h)) if *r == h => {}
                    _ => {
                        return Err(Error::Internal {
                            chain: i + 1,
                            reason: "weight-1 vectors of the chain do not map into one chain"
                                .into(),
                        })
                    }
                }
            }
            *slot = hit.expect("blocks have at least two points");
        }
        let mut sigma = vec![usize::MAX; m];
        for (s, &r) in target.iter().enumerate() {
            if sigma[r] != usize::MAX {
                return Err(Error::Internal {
                    chain: s + 1,
                    reason: format!("two chains map onto chain {}", r + 1),
                });
            }
            sigma[r] = s;
        }
        if !is_admissible(&sigma, space.config()) {
            let bad = (0..m)
                .find(|&i| space.chain_pi(sigma[i]) != space.chain_pi(i))
                .unwrap_or(0);
            return Err(Error::Internal {
                chain: sigma[bad] + 1,
                reason: "chain is matched with a chain of different block dimensions".into(),
            });
        }

        let mut chains = Vec::with_capacity(m);
        for (s, &r) in target.iter().enumerate() {
            let mut restricted = Vec::with_capacity(space.row_size(s) as usize);
            for x in 0..space.row_size(s) {
                let img = f0(space.from_row_ranks(&unit_row(m, s, x)));
                if (0..m).any(|t| t != r && space.row_rank_of(img, t) != 0) {
                    return Err(Error::Internal {
                        chain: s + 1,
                        reason: format!("image of U_{} leaves U_{}", s + 1, r + 1),
                    });
                }
                restricted.push(space.row_rank_of(img, r));
            }
            let g = ChainSymmetry::decompose(space.q(), space.chain_pi(s), &restricted).map_err(
                |e| Error::Internal {
                    chain: s + 1,
                    reason: format!("restriction is not a chain symmetry: {e}"),
                },
            )?;
            chains.push(g);
        }
        let origin_fixing = Symmetry { sigma, chains };
        let shift = Symmetry::translation(space, &space.unrank(w)?)?;
        let sym = shift.compose(&origin_fixing)?;

        for (x, &want) in f.iter().enumerate() {
            let got = sym.apply_rank(space, x as u64);
            if got != want {
                let chain = (0..m)
                    .find(|&i| space.row_rank_of(got, i) != space.row_rank_of(want, i))
                    .unwrap_or(0);
                return Err(Error::Internal {
                    chain: chain + 1,
                    reason: format!("reconstruction differs from the map at rank {x}"),
                });
            }
        }
        Ok(sym)
    }
}

fn unit_row(m: usize, i: usize, x: u64) -> Vec<u64> {
    let mut rows = vec![0u64; m];
    rows[i] = x;
    rows
}
