//! Finite abelian groups given by cyclic factors.

use std::fmt;

use crate::error::{Error, Result};

/// `Z/n1 x Z/n2 x ...`; elements are vectors of residues.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FinAbGroup {
    factors: Vec<u64>,
}

impl fmt::Display for FinAbGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.factors.iter().map(|n| format!("Z/{n}")).collect();
        write!(f, "{}", parts.join("x"))
    }
}

impl std::str::FromStr for FinAbGroup {
    type Err = Error;

    /// Accepts `0`, `Z/4`, `Z/2xZ/4`, `Z/2 x Z/2` and `(Z/2)^3`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Malformed(format!("bad group {s}"));
        let s = s.trim();
        if s == "0" || s == "1" || s.is_empty() {
            return Ok(FinAbGroup { factors: Vec::new() });
        }
        let mut factors = Vec::new();
        for part in s.split('x').map(str::trim) {
            let (base, power) = match part.strip_prefix('(') {
                Some(rest) => {
                    let (inner, exp) = rest.split_once(")^").ok_or_else(bad)?;
                    (inner.trim(), exp.trim().parse::<usize>().map_err(|_| bad())?)
                }
                None => (part, 1),
            };
            let n: u64 =
                base.strip_prefix("Z/").and_then(|n| n.trim().parse().ok()).filter(|&n| n >= 1).ok_or_else(bad)?;
            if n > 1 {
                factors.extend(std::iter::repeat_n(n, power));
            }
        }
        Ok(FinAbGroup { factors })
    }
}

impl FinAbGroup {
    pub fn new(factors: Vec<u64>) -> Self {
        FinAbGroup { factors: factors.into_iter().filter(|&n| n > 1).collect() }
    }

    pub fn trivial() -> Self {
        FinAbGroup { factors: Vec::new() }
    }

    pub fn factors(&self) -> &[u64] {
        &self.factors
    }

    pub fn order(&self) -> u64 {
        self.factors.iter().product()
    }

    pub fn is_p_group(&self, p: u64) -> bool {
        self.factors.iter().all(|&n| {
            let mut m = n;
            while m % p == 0 {
                m /= p;
            }
            m == 1
        })
    }

    /// Number of cyclic factors (the p-rank for a p-group).
    pub fn rank(&self) -> usize {
        self.factors.len()
    }

    /// All elements, first coordinate varying slowest.
    pub fn elements(&self) -> Vec<Vec<u64>> {
        let mut out = vec![Vec::new()];
        for &n in &self.factors {
            out = out
                .into_iter()
                .flat_map(|v| {
                    (0..n).map(move |i| {
                        let mut w = v.clone();
                        w.push(i);
                        w
                    })
                })
                .collect();
        }
        out
    }

    pub fn index_of(&self, a: &[u64]) -> usize {
        a.iter().zip(&self.factors).fold(0usize, |acc, (&x, &n)| acc * n as usize + (x % n) as usize)
    }

    pub fn zero(&self) -> Vec<u64> {
        vec![0; self.factors.len()]
    }

    pub fn add(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        a.iter().zip(b).zip(&self.factors).map(|((&x, &y), &n)| (x + y) % n).collect()
    }

    pub fn scale(&self, k: u64, a: &[u64]) -> Vec<u64> {
        a.iter().zip(&self.factors).map(|(&x, &n)| (x * (k % n)) % n).collect()
    }

    pub fn is_zero(&self, a: &[u64]) -> bool {
        a.iter().all(|&x| x == 0)
    }

    /// Elements killed by `k`.
    pub fn torsion(&self, k: u64) -> Vec<Vec<u64>> {
        self.elements().into_iter().filter(|a| self.is_zero(&self.scale(k, a))).collect()
    }

    /// The standard generators `e_i`.
    pub fn generators(&self) -> Vec<Vec<u64>> {
        (0..self.factors.len())
            .map(|i| {
                let mut e = self.zero();
                e[i] = 1;
                e
            })
            .collect()
    }
}
