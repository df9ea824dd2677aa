//! Linear symmetries (automorphisms).
//!
//! A closed form is evaluated only for antichains (`n = 1`); for longer
//! chains the order comes from enumeration.

use num_bigint::BigUint;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::FieldElement;
use crate::product::s_pi_order;
use crate::space::Space;
use crate::table::check_bijection;

pub const DEFAULT_AUT_CAP: u64 = 1 << 12;

/// Whether the bijection `f` is additive and commutes with scalars,
/// checked on every pair of vectors and every scalar.
pub fn is_linear(space: &Space, f: &[u64]) -> Result<bool> {
    check_bijection(f, space.size())?;
    let size = space.size();
    for u in 0..size {
        for v in u..size {
            let lhs = f[space.add_ranks(u, v) as usize];
            if lhs != space.add_ranks(f[u as usize], f[v as usize]) {
                return Ok(false);
            }
        }
    }
    for c in space.field().elements() {
        for u in 0..size {
            if f[space.scale_rank(c, u) as usize] != space.scale_rank(c, f[u as usize]) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// `|GL_k(F_q)| = (q^k − 1)(q^k − q)…(q^k − q^{k−1})`.
pub fn gl_order(q: u64, k: usize) -> BigUint {
    let qk = BigUint::from(q).pow(k as u32);
    (0..k as u32)
        .map(|t| &qk - BigUint::from(q).pow(t))
        .product()
}

/// `Π_i |GL_{k_i}(F_q)| · |S_π|` for an antichain of blocks.
pub fn aut_order_antichain(space: &Space) -> Result<BigUint> {
    if space.n() != 1 {
        return Err(Error::usage(
            "closed-form automorphism order is only available for n = 1; use enumeration",
        ));
    }
    let blocks: BigUint = (0..space.m())
        .map(|i| gl_order(space.q(), space.chain_pi(i)[0]))
        .product();
    Ok(blocks * s_pi_order(space.config()))
}

#[derive(Debug, Clone)]
pub struct AutEnumeration {
    pub count: BigUint,
    pub maps: Option<Vec<Vec<u64>>>,
}

impl AutEnumeration {
    pub fn is_one(&self) -> bool {
        self.count.is_one()
    }
}

struct LinearSearch<'a> {
    space: &'a Space,
    dim: usize,
    weights: Vec<u32>,
    scalars: Vec<FieldElement>,
}

impl LinearSearch<'_> {
    /// Extends `images` (the map on ranks `[0, q^t)`) by `e_t ↦ b`, or
    /// returns `false` if some new vector changes weight.
    fn push_basis(&self, images: &mut Vec<u64>, t: usize, b: u64) -> bool {
        let span = self.space.q().pow(t as u32);
        let base_len = images.len();
        for (ci, &c) in self.scalars.iter().enumerate() {
            let cb = self.space.scale_rank(c, b);
            for r in 0..span {
                let v = r + (ci as u64 + 1) * span;
                let img = self.space.add_ranks(images[r as usize], cb);
                if self.weights[img as usize] != self.weights[v as usize] {
                    images.truncate(base_len);
                    return false;
                }
                images.push(img);
            }
        }
        true
    }

    fn basis_candidates(&self, t: usize) -> impl Iterator<Item = u64> + '_ {
        let w = self.weights[self.space.q().pow(t as u32) as usize];
        (1..self.space.size()).filter(move |&b| self.weights[b as usize] == w)
    }

    /// Depth-first over basis images; `leaf` returns `false` to stop.
    /// Returns `false` if stopped early.
    fn dfs(&self, t: usize, images: &mut Vec<u64>, leaf: &mut dyn FnMut(&[u64]) -> bool) -> bool {
        if t == self.dim {
            return leaf(images);
        }
        let base_len = images.len();
        for b in self.basis_candidates(t) {
            if self.push_basis(images, t, b) {
                let go_on = self.dfs(t + 1, images, leaf);
                images.truncate(base_len);
                if !go_on {
                    return false;
                }
            }
        }
        true
    }

    /// `Π_t |orbit of e_t under the pointwise stabilizer of e_0, …, e_{t−1}|`.
    fn stabilizer_chain_count(&self) -> BigUint {
        let mut total = BigUint::one();
        let mut images: Vec<u64> = vec![0];
        for t in 0..self.dim {
            let e_t = self.space.q().pow(t as u32);
            let base_len = images.len();
            let mut orbit = 0u64;
            for b in self.basis_candidates(t) {
                if !self.push_basis(&mut images, t, b) {
                    continue;
                }
                if b == e_t || !self.dfs(t + 1, &mut images, &mut |_| false) {
                    orbit += 1;
                }
                images.truncate(base_len);
            }
            total *= orbit;
            assert!(self.push_basis(&mut images, t, e_t), "identity is linear");
        }
        total
    }
}

/// Enumerates linear isometries by choosing images of the standard basis
/// vectors one at a time, pruning any choice that changes the weight of a
/// vector in the span fixed so far.
///
/// Listing visits every automorphism. Counting multiplies orbit sizes along
/// the stabilizer chain of the basis, so it never walks the whole group.
pub fn enumerate_automorphisms(
    space: &Space,
    cap: Option<u64>,
    want_list: bool,
) -> Result<AutEnumeration> {
    let cap = cap.unwrap_or(DEFAULT_AUT_CAP);
    if space.size() > cap {
        return Err(Error::CapExceeded {
            what: "automorphism enumeration".into(),
            size: space.size(),
            cap,
            log10_estimate: space.dimension() as f64 * (space.size() as f64).log10(),
        });
    }
    let search = LinearSearch {
        space,
        dim: space.dimension(),
        weights: (0..space.size()).map(|r| space.weight_rank(r)).collect(),
        scalars: space.field().elements().skip(1).collect(),
    };
    if !want_list {
        return Ok(AutEnumeration {
            count: search.stabilizer_chain_count(),
            maps: None,
        });
    }
    let mut maps = Vec::new();
    search.dfs(0, &mut vec![0], &mut |images| {
        maps.push(images.to_vec());
        true
    });
    Ok(AutEnumeration {
        count: BigUint::from(maps.len()),
        maps: Some(maps),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AutReport {
    #[serde(with = "crate::decimal::option")]
    pub formula_order: Option<BigUint>,
    #[serde(with = "crate::decimal::option")]
    pub enumerated_order: Option<BigUint>,
    /// `|GL_{k_ij}(F_q)|` for every block, row by row.
    pub per_block_gl_orders: Vec<Vec<String>>,
    #[serde(with = "crate::decimal")]
    pub s_pi_order: BigUint,
    pub discrepant: bool,
}

pub fn aut_report(
    space: &Space,
    with_formula: bool,
    with_enumeration: bool,
    cap: Option<u64>,
) -> Result<AutReport> {
    let formula_order = if with_formula {
        Some(aut_order_antichain(space)?)
    } else {
        None
    };
    let enumerated_order = if with_enumeration {
        Some(enumerate_automorphisms(space, cap, false)?.count)
    } else {
        None
    };
    let per_block_gl_orders = space
        .config()
        .pi
        .iter()
        .map(|row| {
            row.iter()
                .map(|&k| gl_order(space.q(), k).to_string())
                .collect()
        })
        .collect();
    let discrepant = matches!((&formula_order, &enumerated_order), (Some(a), Some(b)) if a != b);
    Ok(AutReport {
        formula_order,
        enumerated_order,
        per_block_gl_orders,
        s_pi_order: s_pi_order(space.config()),
        discrepant,
    })
}

/// Number of invertible `k × k` matrices over `F_p`, by enumeration.
#[cfg(test)]
fn count_invertible(p: u64, k: usize) -> u64 {
    let entries = k * k;
    let total = p.pow(entries as u32);
    (0..total)
        .filter(|&code| {
            // Gaussian elimination mod p
            let mut a: Vec<Vec<u64>> = (0..k)
                .map(|i| {
                    (0..k)
                        .map(|j| code / p.pow((i * k + j) as u32) % p)
                        .collect()
                })
                .collect();
            let mut rank = 0;
            for col in 0..k {
                let Some(piv) = (rank..k).find(|&r| a[r][col] != 0) else {
                    continue;
                };
                a.swap(rank, piv);
                let inv = (1..p).find(|&x| x * a[rank][col] % p == 1).unwrap();
                let pivot_row = a[rank].clone();
                for (r, row) in a.iter_mut().enumerate() {
                    if r != rank && row[col] != 0 {
                        let f = row[col] * inv % p;
                        for (x, &y) in row.iter_mut().zip(&pivot_row) {
                            *x = (*x + p * p - f * y % p) % p;
                        }
                    }
                }
                rank += 1;
            }
            rank == k
        })
        .count() as u64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldSpec;
    use crate::product::Symmetry;
    use crate::space::SpaceConfig;

    fn space(q: u32, pi: Vec<Vec<usize>>) -> Space {
        Space::new(SpaceConfig::new(FieldSpec::of_order(q).unwrap(), pi)).unwrap()
    }

    #[test]
    fn gl_examples() {
        assert_eq!(gl_order(2, 1), BigUint::one());
        assert_eq!(gl_order(2, 2), BigUint::from(6u32));
        assert_eq!(count_invertible(2, 2), 6);
        assert_eq!(gl_order(3, 2), BigUint::from(48u32));
        assert_eq!(count_invertible(3, 2), 48);
        assert_eq!(gl_order(2, 3), BigUint::from(count_invertible(2, 3)));
    }

    #[test]
    fn linearity_examples() {
        let s = space(2, vec![vec![1], vec![1]]);
        let id: Vec<u64> = (0..4).collect();
        assert!(is_linear(&s, &id).unwrap());
        let t = Symmetry::translation(&s, &s.unrank(1).unwrap()).unwrap();
        assert!(!is_linear(&s, &t.table(&s).unwrap()).unwrap());
        let swap = Symmetry::from_sigma(&s, vec![1, 0]).unwrap();
        assert!(is_linear(&s, &swap.table(&s).unwrap()).unwrap());
        // scalar check matters over GF(4): Frobenius x -> x² is additive, not linear
        let s4 = space(4, vec![vec![1]]);
        let f4 = s4.field();
        let frob: Vec<u64> = f4.elements().map(|x| f4.mul(x, x).rank() as u64).collect();
        assert!(!is_linear(&s4, &frob).unwrap());
    }

    #[test]
    fn antichain_formula_examples() {
        assert_eq!(
            aut_order_antichain(&space(2, vec![vec![1], vec![1]])).unwrap(),
            BigUint::from(2u32)
        );
        assert_eq!(
            aut_order_antichain(&space(2, vec![vec![2], vec![1]])).unwrap(),
            BigUint::from(6u32)
        );
        assert_eq!(
            aut_order_antichain(&space(2, vec![vec![2], vec![2]])).unwrap(),
            BigUint::from(72u32)
        );
        assert!(aut_order_antichain(&space(2, vec![vec![1, 1]])).is_err());
    }

    #[test]
    fn enumeration_examples() {
        let count = |q, pi| {
            enumerate_automorphisms(&space(q, pi), None, false)
                .unwrap()
                .count
        };
        assert_eq!(count(2, vec![vec![1], vec![1]]), BigUint::from(2u32));
        assert_eq!(count(2, vec![vec![2], vec![1]]), BigUint::from(6u32));
        // lower-triangular with unit diagonal over F_2
        assert_eq!(count(2, vec![vec![1, 1]]), BigUint::from(2u32));
        assert!(
            !enumerate_automorphisms(&space(2, vec![vec![1, 1]]), None, false)
                .unwrap()
                .is_one()
        );
    }

    #[test]
    fn enumerated_maps_are_linear_isometries() {
        for (q, pi) in [
            (2, vec![vec![1, 2]]),
            (3, vec![vec![1], vec![1]]),
            (4, vec![vec![1, 1]]),
        ] {
            let s = space(q, pi);
            let e = enumerate_automorphisms(&s, None, true).unwrap();
            for f in e.maps.unwrap() {
                assert!(is_linear(&s, &f).unwrap());
                crate::table::check_isometry(&f, |a, b| s.distance_ranks(a, b)).unwrap();
            }
        }
    }

    #[test]
    fn antichain_enumeration_matches_formula() {
        for (q, pi) in [
            (2, vec![vec![1], vec![1], vec![1]]),
            (3, vec![vec![1], vec![1]]),
            (2, vec![vec![3], vec![1]]),
            (4, vec![vec![1], vec![1]]),
            (3, vec![vec![2]]),
        ] {
            let s = space(q, pi);
            let r = aut_report(&s, true, true, None).unwrap();
            assert!(!r.discrepant, "{:?}", s.config());
        }
    }

    #[test]
    fn counting_matches_listing() {
        for (q, pi) in [
            (2, vec![vec![1, 1, 1]]),
            (2, vec![vec![1, 2], vec![1, 2]]),
            (3, vec![vec![1, 1]]),
            (2, vec![vec![2], vec![2]]),
        ] {
            let s = space(q, pi);
            let listed = enumerate_automorphisms(&s, None, true).unwrap();
            let counted = enumerate_automorphisms(&s, None, false).unwrap();
            assert_eq!(listed.count, counted.count, "{:?}", s.config());
        }
    }

    #[test]
    fn long_chain_counts_unitriangular_group() {
        // linear isometries of the F_2 chain of length 8: unit lower-triangular
        // matrices, 2^(8·7/2)
        let s = space(2, vec![vec![1; 8]]);
        let e = enumerate_automorphisms(&s, None, false).unwrap();
        assert_eq!(e.count, BigUint::from(2u32).pow(28));
    }

    #[test]
    fn cap_refuses() {
        let s = space(2, vec![vec![1; 13]]);
        assert!(matches!(
            enumerate_automorphisms(&s, None, false),
            Err(Error::CapExceeded { .. })
        ));
    }
}
