//! Graded monomial indexing.
//!
//! Monomials in `k` variables are ordered by total degree, then by the
//! exponent of `x1` descending, recursively. The index of a monomial does
//! not depend on the truncation degree, so truncation is a prefix.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

#[derive(Debug)]
pub(crate) struct MonomialTable {
    pub nvars: usize,
    pub cap: usize,
    /// Flat exponent vectors, `nvars` entries per monomial.
    exps: Vec<u16>,
    /// `off[j][m]`: number of monomials of degree `< m` in `j` variables.
    off: Vec<Vec<usize>>,
}

fn binom(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

impl MonomialTable {
    fn build(nvars: usize, cap: usize) -> Self {
        let off: Vec<Vec<usize>> = (0..=nvars)
            .map(|j| (0..=cap + 1).map(|m| if j == 0 { usize::from(m > 0) } else { binom(m + j - 1, j) }).collect())
            .collect();
        let mut exps = Vec::with_capacity(off[nvars][cap + 1] * nvars);
        let mut cur = vec![0u16; nvars];
        for d in 0..=cap {
            fill(&mut exps, &mut cur, 0, d);
        }
        MonomialTable { nvars, cap, exps, off }
    }

    /// Table for `nvars` variables covering at least degree `cap`.
    pub fn get(nvars: usize, cap: usize) -> Arc<MonomialTable> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<MonomialTable>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut map = cache.lock().expect("monomial cache");
        if let Some(t) = map.get(&nvars) {
            if t.cap >= cap {
                return t.clone();
            }
        }
        let old = map.get(&nvars).map_or(0, |t| t.cap);
        let t = Arc::new(Self::build(nvars, cap.max(old + old / 2).max(8)));
        map.insert(nvars, t.clone());
        t
    }

    /// Number of monomials of degree `<= d`.
    #[inline]
    pub fn count(&self, d: usize) -> usize {
        self.off[self.nvars][d + 1]
    }

    /// Index of the first monomial of degree `d`.
    #[inline]
    pub fn start(&self, d: usize) -> usize {
        self.off[self.nvars][d]
    }

    #[inline]
    pub fn exps(&self, idx: usize) -> &[u16] {
        &self.exps[idx * self.nvars..(idx + 1) * self.nvars]
    }

    #[inline]
    pub fn degree(&self, idx: usize) -> usize {
        self.exps(idx).iter().map(|&e| e as usize).sum()
    }

    #[inline]
    pub fn index(&self, e: &[u16]) -> usize {
        let k = self.nvars;
        let d: usize = e.iter().map(|&x| x as usize).sum();
        let mut idx = self.off[k][d];
        let mut rem = d;
        for (i, &ei) in e.iter().enumerate().take(k.saturating_sub(1)) {
            idx += self.off[k - 1 - i][rem - ei as usize];
            rem -= ei as usize;
        }
        idx
    }
}

fn fill(out: &mut Vec<u16>, cur: &mut [u16], pos: usize, rem: usize) {
    if pos + 1 == cur.len() {
        cur[pos] = rem as u16;
        out.extend_from_slice(cur);
        return;
    }
    if cur.is_empty() {
        return;
    }
    for e in (0..=rem).rev() {
        cur[pos] = e as u16;
        fill(out, cur, pos + 1, rem - e);
    }
    cur[pos] = 0;
}
