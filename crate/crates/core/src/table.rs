//! Full bijection tables on `[0, size)` and their text format.
//!
//! A table file is either a dense rank array (JSON `[..]` or whitespace
//! separated integers) or newline-separated `rank -> rank` pairs. Lines
//! starting with `#` are comments.

use crate::error::{Error, Result};

/// Checks that `f` is a permutation of `[0, size)`.
pub fn check_bijection(f: &[u64], size: u64) -> Result<()> {
    if f.len() as u64 != size {
        return Err(Error::NotBijection(format!(
            "table has {} entries, expected {size}",
            f.len()
        )));
    }
    let mut seen = vec![false; f.len()];
    for (x, &y) in f.iter().enumerate() {
        if y >= size {
            return Err(Error::NotBijection(format!("f({x}) = {y} is out of range")));
        }
        if std::mem::replace(&mut seen[y as usize], true) {
            return Err(Error::NotBijection(format!("value {y} is hit twice")));
        }
    }
    Ok(())
}

/// Checks `dist(f(u), f(v)) = dist(u, v)` on every pair, returning the first
/// violating pair as a witness.
pub fn check_isometry(f: &[u64], dist: impl Fn(u64, u64) -> u32) -> Result<()> {
    let size = f.len() as u64;
    for u in 0..size {
        for v in u + 1..size {
            let before = dist(u, v);
            let after = dist(f[u as usize], f[v as usize]);
            if before != after {
                return Err(Error::NotIsometry {
                    u,
                    v,
                    before,
                    after,
                });
            }
        }
    }
    Ok(())
}

pub fn invert_table(f: &[u64]) -> Vec<u64> {
    let mut inv = vec![0u64; f.len()];
    for (x, &y) in f.iter().enumerate() {
        inv[y as usize] = x as u64;
    }
    inv
}

/// `(f ∘ g)(x) = f(g(x))`.
pub fn compose_tables(f: &[u64], g: &[u64]) -> Vec<u64> {
    g.iter().map(|&y| f[y as usize]).collect()
}

/// Parses a bijection table in any of the accepted layouts.
pub fn parse_table(text: &str) -> Result<Vec<u64>> {
    let body: String = text
        .lines()
        .filter(|l| !l.trim_start().starts_with('#'))
        .collect::<Vec<_>>()
        .join("\n");
    let trimmed = body.trim();
    if trimmed.starts_with('[') {
        return serde_json::from_str(trimmed).map_err(|e| Error::parse(format!("table JSON: {e}")));
    }
    if trimmed.contains("->") {
        let mut pairs = Vec::new();
        for line in trimmed.lines().map(str::trim).filter(|l| !l.is_empty()) {
            let (a, b) = line
                .split_once("->")
                .ok_or_else(|| Error::parse(format!("expected 'rank -> rank', got '{line}'")))?;
            let a: u64 = a
                .trim()
                .parse()
                .map_err(|_| Error::parse(format!("bad rank '{}'", a.trim())))?;
            let b: u64 = b
                .trim()
                .parse()
                .map_err(|_| Error::parse(format!("bad rank '{}'", b.trim())))?;
            pairs.push((a, b));
        }
        pairs.sort_unstable();
        let mut out = Vec::with_capacity(pairs.len());
        for (idx, (a, b)) in pairs.into_iter().enumerate() {
            if a != idx as u64 {
                return Err(Error::parse(format!(
                    "pair list must cover every rank once; missing or repeated rank near {idx}"
                )));
            }
            out.push(b);
        }
        return Ok(out);
    }
    trimmed
        .split(|c: char| c.is_whitespace() || c == ',')
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<u64>()
                .map_err(|_| Error::parse(format!("bad rank '{s}'")))
        })
        .collect()
}

/// Renders the `rank -> rank` layout.
pub fn format_pairs(f: &[u64]) -> String {
    f.iter()
        .enumerate()
        .map(|(x, y)| format!("{x} -> {y}\n"))
        .collect()
}
