//! Exact arithmetic in small finite fields `GF(p^e)`.
//!
//! Elements are identified with their rank `Σ coeffs[t]·p^t` (polynomial
//! coefficients, low-order first), so `0` and `1` are the additive and
//! multiplicative identities and every downstream table can index by rank.
//! Addition and multiplication are precomputed into `q × q` tables.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest field order for which tables are built.
pub const MAX_FIELD_ORDER: u64 = 1024;

/// Construction data for a finite field.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    pub p: u32,
    #[serde(default = "one")]
    pub e: u32,
    /// Monic irreducible modulus, coefficients low-order first.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulus: Option<Vec<u32>>,
}

fn one() -> u32 {
    1
}

impl FieldSpec {
    pub fn prime(p: u32) -> Self {
        FieldSpec {
            p,
            e: 1,
            modulus: None,
        }
    }

    /// Field of order `q` using the bundled modulus when `q` is not prime.
    pub fn of_order(q: u32) -> Result<Self> {
        if is_prime(q) {
            return Ok(FieldSpec::prime(q));
        }
        match builtin_modulus(q) {
            Some((p, e, modulus)) => Ok(FieldSpec {
                p,
                e,
                modulus: Some(modulus),
            }),
            None => Err(Error::usage(format!(
                "no bundled modulus for q = {q}; supply one explicitly"
            ))),
        }
    }

    pub fn order(&self) -> u64 {
        (self.p as u64).pow(self.e)
    }
}

/// Bundled moduli for the small extension fields: x²+x+1, x³+x+1, x²+1.
fn builtin_modulus(q: u32) -> Option<(u32, u32, Vec<u32>)> {
    match q {
        4 => Some((2, 2, vec![1, 1, 1])),
        8 => Some((2, 3, vec![1, 1, 0, 1])),
        9 => Some((3, 2, vec![1, 0, 1])),
        _ => None,
    }
}

pub(crate) fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u32;
    while d.saturating_mul(d) <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// An element of a field, identified by its rank in `[0, q)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FieldElement(u32);

impl FieldElement {
    pub const ZERO: FieldElement = FieldElement(0);
    pub const ONE: FieldElement = FieldElement(1);

    pub fn rank(self) -> u32 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldOp {
    Add,
    Sub,
    Mul,
    /// Inverse of the first operand; the second is ignored.
    Inv,
}

/// A constructed finite field with precomputed operation tables.
#[derive(Debug, Clone)]
pub struct Field {
    spec: FieldSpec,
    q: u32,
    add: Vec<u32>,
    mul: Vec<u32>,
    neg: Vec<u32>,
    inv: Vec<u32>,
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec
    }
}

impl Eq for Field {}

impl Field {
    pub fn new(spec: FieldSpec) -> Result<Self> {
        let FieldSpec { p, e, .. } = spec;
        if !is_prime(p) {
            return Err(Error::usage(format!("characteristic {p} is not prime")));
        }
        if e == 0 {
            return Err(Error::usage("extension degree must be at least 1"));
        }
        let q = (p as u64)
            .checked_pow(e)
            .filter(|&q| q <= MAX_FIELD_ORDER)
            .ok_or_else(|| Error::usage(format!("field order {p}^{e} exceeds {MAX_FIELD_ORDER}")))?
            as u32;

        let mut spec = spec;
        let modulus = if e == 1 {
            if let Some(m) = &spec.modulus {
                if m.len() != 2 || m[1] != 1 {
                    return Err(Error::usage("degree-1 modulus must be monic linear"));
                }
            }
            None
        } else {
            let m = match spec.modulus.clone() {
                Some(m) => m,
                None => {
                    let (_, _, m) = builtin_modulus(q)
                        .filter(|(bp, be, _)| *bp == p && *be == e)
                        .ok_or_else(|| {
                            Error::usage(format!("no bundled modulus for GF({p}^{e})"))
                        })?;
                    spec.modulus = Some(m.clone());
                    m
                }
            };
            validate_modulus(p, e, &m)?;
            Some(m)
        };

        let digits = |x: u32| -> Vec<u32> {
            let mut c = vec![0u32; e as usize];
            let mut r = x;
            for d in c.iter_mut() {
                *d = r % p;
                r /= p;
            }
            c
        };
        let undigits = |c: &[u32]| -> u32 { c.iter().rev().fold(0, |acc, &d| acc * p + d) };

        let qs = q as usize;
        let mut add = vec![0u32; qs * qs];
        let mut mul = vec![0u32; qs * qs];
        for a in 0..q {
            let ca = digits(a);
            for b in 0..q {
                let cb = digits(b);
                let sum: Vec<u32> = ca.iter().zip(&cb).map(|(x, y)| (x + y) % p).collect();
                add[a as usize * qs + b as usize] = undigits(&sum);
                let prod = match &modulus {
                    None => vec![(a as u64 * b as u64 % p as u64) as u32],
                    Some(m) => poly_mulmod(&ca, &cb, m, p),
                };
                mul[a as usize * qs + b as usize] = undigits(&prod);
            }
        }
        let mut neg = vec![0u32; qs];
        let mut inv = vec![0u32; qs];
        for a in 0..q {
            for b in 0..q {
                if add[a as usize * qs + b as usize] == 0 {
                    neg[a as usize] = b;
                }
                if mul[a as usize * qs + b as usize] == 1 {
                    inv[a as usize] = b;
                }
            }
        }
        Ok(Field {
            spec,
            q,
            add,
            mul,
            neg,
            inv,
        })
    }

    pub fn of_order(q: u32) -> Result<Self> {
        Field::new(FieldSpec::of_order(q)?)
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.spec
    }

    pub fn order(&self) -> u32 {
        self.q
    }

    pub fn characteristic(&self) -> u32 {
        self.spec.p
    }

    pub fn degree(&self) -> u32 {
        self.spec.e
    }

    pub fn element(&self, rank: u32) -> Result<FieldElement> {
        if rank < self.q {
            Ok(FieldElement(rank))
        } else {
            Err(Error::usage(format!(
                "element rank {rank} out of range for GF({})",
                self.q
            )))
        }
    }

    pub fn elements(&self) -> impl Iterator<Item = FieldElement> {
        (0..self.q).map(FieldElement)
    }

    /// Polynomial coefficients of `x`, low-order first.
    pub fn coeffs(&self, x: FieldElement) -> Vec<u32> {
        let p = self.spec.p;
        let mut r = x.0;
        (0..self.spec.e)
            .map(|_| {
                let d = r % p;
                r /= p;
                d
            })
            .collect()
    }

    pub fn from_coeffs(&self, coeffs: &[u32]) -> Result<FieldElement> {
        let p = self.spec.p;
        if coeffs.len() != self.spec.e as usize || coeffs.iter().any(|&c| c >= p) {
            return Err(Error::usage("coefficient vector does not match field"));
        }
        Ok(FieldElement(
            coeffs.iter().rev().fold(0, |acc, &d| acc * p + d),
        ))
    }

    #[inline]
    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        FieldElement(self.add[a.0 as usize * self.q as usize + b.0 as usize])
    }

    #[inline]
    pub fn neg(&self, a: FieldElement) -> FieldElement {
        FieldElement(self.neg[a.0 as usize])
    }

    #[inline]
    pub fn sub(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        FieldElement(self.mul[a.0 as usize * self.q as usize + b.0 as usize])
    }

    pub fn inv(&self, a: FieldElement) -> Result<FieldElement> {
        if a.is_zero() {
            Err(Error::Domain("inverse of zero".into()))
        } else {
            Ok(FieldElement(self.inv[a.0 as usize]))
        }
    }

    /// Dispatch on `op`, validating that both operands belong to this field.
    pub fn arith(&self, a: FieldElement, b: FieldElement, op: FieldOp) -> Result<FieldElement> {
        self.element(a.0)?;
        self.element(b.0)?;
        match op {
            FieldOp::Add => Ok(self.add(a, b)),
            FieldOp::Sub => Ok(self.sub(a, b)),
            FieldOp::Mul => Ok(self.mul(a, b)),
            FieldOp::Inv => self.inv(a),
        }
    }

    /// Mixed-radix rank of a block, first element least significant.
    pub fn block_rank(&self, block: &[FieldElement]) -> Result<u64> {
        let q = self.q as u64;
        let mut r: u64 = 0;
        for x in block.iter().rev() {
            self.element(x.0)?;
            r = r
                .checked_mul(q)
                .and_then(|r| r.checked_add(x.0 as u64))
                .ok_or_else(|| Error::usage("block too wide"))?;
        }
        Ok(r)
    }

    pub fn block_unrank(&self, rank: u64, width: usize) -> Result<Vec<FieldElement>> {
        let q = self.q as u64;
        let size = q
            .checked_pow(width as u32)
            .ok_or_else(|| Error::usage("block too wide"))?;
        if rank >= size {
            return Err(Error::usage(format!(
                "block rank {rank} out of range [0, {size})"
            )));
        }
        let mut r = rank;
        Ok((0..width)
            .map(|_| {
                let x = FieldElement((r % q) as u32);
                r /= q;
                x
            })
            .collect())
    }
}

fn validate_modulus(p: u32, e: u32, m: &[u32]) -> Result<()> {
    if m.len() != e as usize + 1 || m[e as usize] != 1 {
        return Err(Error::usage(format!(
            "modulus must be monic of degree {e} (got {} coefficients)",
            m.len()
        )));
    }
    if m.iter().any(|&c| c >= p) {
        return Err(Error::usage(format!(
            "modulus coefficient not reduced mod {p}"
        )));
    }
    if !is_irreducible(m, p) {
        return Err(Error::usage(format!(
            "modulus {m:?} is reducible over F_{p}"
        )));
    }
    Ok(())
}

/// Trial division by every monic polynomial of degree `1..=deg/2`.
pub(crate) fn is_irreducible(m: &[u32], p: u32) -> bool {
    let deg = m.len() - 1;
    for d in 1..=deg / 2 {
        let count = (p as u64).pow(d as u32);
        for low in 0..count {
            let mut f = Vec::with_capacity(d + 1);
            let mut r = low;
            for _ in 0..d {
                f.push((r % p as u64) as u32);
                r /= p as u64;
            }
            f.push(1);
            if poly_rem(m, &f, p).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

/// Remainder of `a` modulo monic `b` over F_p.
fn poly_rem(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let db = b.len() - 1;
    let mut r: Vec<u64> = a.iter().map(|&c| c as u64).collect();
    let p = p as u64;
    while r.len() > db {
        let lead = r.pop().unwrap() % p;
        if lead != 0 {
            let shift = r.len() - db;
            for (t, &bc) in b[..db].iter().enumerate() {
                let sub = lead * bc as u64 % p;
                r[shift + t] = (r[shift + t] + p - sub) % p;
            }
        }
    }
    r.into_iter().map(|c| (c % p) as u32).collect()
}

fn poly_mulmod(a: &[u32], b: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    let mut prod = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x as u64 * y as u64) % p as u64;
        }
    }
    let prod: Vec<u32> = prod.into_iter().map(|c| c as u32).collect();
    let mut r = poly_rem(&prod, m, p);
    r.resize(m.len() - 1, 0);
    r
}
