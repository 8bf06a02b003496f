//! Truncated multivariate power series over a tower ring.
//!
//! A series is known modulo monomials of total degree `> cap`. An `exact`
//! series is a polynomial: every coefficient above `cap` is zero. Binary
//! operations on series with different caps keep the smaller cap.

mod monomial;
mod text;
mod weierstrass;

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::coeff::{RingElem, RingTower};
use crate::error::{Error, Result};
pub(crate) use monomial::MonomialTable;
pub use weierstrass::{Division, Preparation};

#[derive(Clone)]
pub struct MPSeries {
    ring: RingTower,
    nvars: usize,
    cap: usize,
    exact: bool,
    coeffs: Vec<u64>,
}

/// Where two series first disagree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Discrepancy {
    pub exponents: Vec<u16>,
    pub left: RingElem,
    pub right: RingElem,
}

impl fmt::Display for Discrepancy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} vs {}", monomial_text(&self.exponents), self.left.to_text(), self.right.to_text())
    }
}

pub fn monomial_text(e: &[u16]) -> String {
    let parts: Vec<String> = e
        .iter()
        .enumerate()
        .filter(|(_, &x)| x > 0)
        .map(|(i, &x)| if x == 1 { format!("x{}", i + 1) } else { format!("x{}^{}", i + 1, x) })
        .collect();
    if parts.is_empty() {
        "1".into()
    } else {
        parts.join(" ")
    }
}

impl fmt::Debug for MPSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [cap {}{}]", self.to_text(), self.cap, if self.exact { ", exact" } else { "" })
    }
}

impl PartialEq for MPSeries {
    /// Equal as truncated objects: same ring, arity, cap, exactness and coefficients.
    fn eq(&self, other: &Self) -> bool {
        self.ring == other.ring
            && self.nvars == other.nvars
            && self.cap == other.cap
            && self.exact == other.exact
            && self.coeffs == other.coeffs
    }
}

fn effective(s: &MPSeries) -> usize {
    if s.exact {
        usize::MAX
    } else {
        s.cap
    }
}

impl MPSeries {
    // ----- construction -------------------------------------------------

    pub fn zero(ring: &RingTower, nvars: usize, cap: usize) -> Self {
        assert!(nvars > 0, "series need at least one variable");
        let t = MonomialTable::get(nvars, cap);
        MPSeries { ring: ring.clone(), nvars, cap, exact: false, coeffs: vec![0; t.count(cap) * ring.rank()] }
    }

    /// The exact zero polynomial.
    pub fn zero_exact(ring: &RingTower, nvars: usize) -> Self {
        let mut s = Self::zero(ring, nvars, 0);
        s.exact = true;
        s
    }

    pub fn constant(c: &RingElem, nvars: usize) -> Self {
        let mut s = Self::zero_exact(c.ring(), nvars);
        s.coeffs.copy_from_slice(c.coords());
        s
    }

    pub fn one(ring: &RingTower, nvars: usize) -> Self {
        Self::constant(&ring.one(), nvars)
    }

    /// The exact polynomial `x_{i+1}`.
    pub fn var(ring: &RingTower, nvars: usize, i: usize) -> Self {
        let mut e = vec![0u16; nvars];
        e[i] = 1;
        Self::monomial(&ring.one(), &e)
    }

    pub fn monomial(c: &RingElem, e: &[u16]) -> Self {
        let d: usize = e.iter().map(|&x| x as usize).sum();
        let mut s = Self::zero(c.ring(), e.len(), d);
        s.exact = true;
        s.set_coeff(e, c);
        s
    }

    /// Builds a series from terms; `cap = None` means exact.
    pub fn from_terms(
        ring: &RingTower,
        nvars: usize,
        cap: Option<usize>,
        terms: &[(Vec<u16>, RingElem)],
    ) -> Result<Self> {
        let deg = terms.iter().map(|(e, _)| e.iter().map(|&x| x as usize).sum::<usize>()).max().unwrap_or(0);
        let mut s = Self::zero(ring, nvars, cap.unwrap_or(deg));
        s.exact = cap.is_none();
        for (e, c) in terms {
            if e.len() != nvars {
                return Err(Error::ArityMismatch(e.len(), nvars));
            }
            if c.ring() != ring {
                return Err(Error::RingMismatch);
            }
            let d: usize = e.iter().map(|&x| x as usize).sum();
            if d <= s.cap {
                let cur = s.coeff(e);
                s.set_coeff(e, &cur.add(c)?);
            }
        }
        Ok(s)
    }

    /// Univariate series from coefficients `c_0, c_1, ...`.
    pub fn univariate(ring: &RingTower, coeffs: &[RingElem], exact: bool) -> Self {
        let cap = coeffs.len().saturating_sub(1);
        let mut s = Self::zero(ring, 1, cap);
        s.exact = exact;
        for (i, c) in coeffs.iter().enumerate() {
            s.coeffs[i * ring.rank()..(i + 1) * ring.rank()].copy_from_slice(c.coords());
        }
        s.normalize()
    }

    // ----- accessors ----------------------------------------------------

    pub fn ring(&self) -> &RingTower {
        &self.ring
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn is_exact(&self) -> bool {
        self.exact
    }

    fn table(&self) -> Arc<MonomialTable> {
        MonomialTable::get(self.nvars, self.cap)
    }

    fn len(&self) -> usize {
        self.coeffs.len() / self.ring.rank()
    }

    #[inline]
    fn slot(&self, idx: usize) -> &[u64] {
        let r = self.ring.rank();
        &self.coeffs[idx * r..(idx + 1) * r]
    }

    #[inline]
    fn slot_mut(&mut self, idx: usize) -> &mut [u64] {
        let r = self.ring.rank();
        &mut self.coeffs[idx * r..(idx + 1) * r]
    }

    #[inline]
    fn slot_nonzero(&self, idx: usize) -> bool {
        self.slot(idx).iter().any(|&x| x != 0)
    }

    pub fn coeff(&self, e: &[u16]) -> RingElem {
        let d: usize = e.iter().map(|&x| x as usize).sum();
        if d > self.cap {
            return self.ring.zero();
        }
        let idx = self.table().index(e);
        self.ring.elem(self.slot(idx).to_vec())
    }

    /// Coefficient of `t^i` of a univariate series.
    pub fn coeff1(&self, i: usize) -> RingElem {
        if i > self.cap {
            return self.ring.zero();
        }
        self.ring.elem(self.slot(i).to_vec())
    }

    pub fn set_coeff(&mut self, e: &[u16], c: &RingElem) {
        let idx = self.table().index(e);
        self.slot_mut(idx).copy_from_slice(c.coords());
    }

    pub fn constant_term(&self) -> RingElem {
        self.ring.elem(self.slot(0).to_vec())
    }

    /// Nonzero terms in graded order.
    pub fn terms(&self) -> Vec<(Vec<u16>, RingElem)> {
        let t = self.table();
        (0..self.len())
            .filter(|&i| self.slot_nonzero(i))
            .map(|i| (t.exps(i).to_vec(), self.ring.elem(self.slot(i).to_vec())))
            .collect()
    }

    /// Every monomial up to the cap, in graded order.
    pub(crate) fn monomials(&self) -> Vec<Vec<u16>> {
        let t = self.table();
        (0..t.count(self.cap)).map(|i| t.exps(i).to_vec()).collect()
    }

    /// Largest total degree with a nonzero coefficient (0 for zero).
    pub fn degree(&self) -> usize {
        let t = self.table();
        (0..self.len()).rev().find(|&i| self.slot_nonzero(i)).map_or(0, |i| t.degree(i))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&x| x == 0)
    }

    /// Lowest total degree with a nonzero coefficient, if any.
    pub fn order(&self) -> Option<usize> {
        let t = self.table();
        (0..self.len()).find(|&i| self.slot_nonzero(i)).map(|i| t.degree(i))
    }

    // ----- precision ----------------------------------------------------

    /// Shrinks the storage of an exact series to its degree.
    fn normalize(mut self) -> Self {
        if self.exact {
            let d = self.degree();
            if d < self.cap {
                let t = self.table();
                self.coeffs.truncate(t.count(d) * self.ring.rank());
                self.cap = d;
            }
        }
        self
    }

    fn resized(&self, cap: usize) -> Self {
        let t = MonomialTable::get(self.nvars, cap);
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(t.count(cap) * self.ring.rank(), 0);
        MPSeries { ring: self.ring.clone(), nvars: self.nvars, cap, exact: self.exact, coeffs }
    }

    /// Forgets everything above degree `cap`.
    pub fn truncate(&self, cap: usize) -> Self {
        if cap >= self.cap {
            return self.clone();
        }
        let mut s = self.resized(cap);
        s.exact = self.exact && self.degree() <= cap;
        s
    }

    /// Representation with storage exactly up to `cap`; an exact series is
    /// padded with zeros, a truncated one must already be known that far.
    pub fn at_cap(&self, cap: usize) -> Result<Self> {
        if cap <= self.cap {
            let mut s = self.resized(cap);
            s.exact = false;
            return Ok(s);
        }
        if !self.exact {
            return Err(Error::InsufficientPrecision(format!("series known to degree {}, needed {}", self.cap, cap)));
        }
        let mut s = self.resized(cap);
        s.exact = false;
        Ok(s)
    }

    /// Marks the series as a polynomial (caller asserts the tail vanishes).
    pub fn assume_exact(mut self) -> Self {
        self.exact = true;
        self.normalize()
    }

    // ----- arithmetic ---------------------------------------------------

    fn compatible(&self, other: &Self) -> Result<()> {
        if self.ring != other.ring {
            return Err(Error::RingMismatch);
        }
        if self.nvars != other.nvars {
            return Err(Error::ArityMismatch(self.nvars, other.nvars));
        }
        Ok(())
    }

    fn zip(&self, other: &Self, f: impl Fn(u64, u64) -> u64) -> Result<Self> {
        self.compatible(other)?;
        let (cap, exact) = if self.exact && other.exact {
            (self.cap.max(other.cap), true)
        } else {
            (effective(self).min(effective(other)), false)
        };
        let mut out = Self::zero(&self.ring, self.nvars, cap);
        out.exact = exact;
        let n = out.coeffs.len();
        for i in 0..n {
            let a = self.coeffs.get(i).copied().unwrap_or(0);
            let b = other.coeffs.get(i).copied().unwrap_or(0);
            out.coeffs[i] = f(a, b);
        }
        Ok(out.normalize())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let z = *self.ring.zpn();
        self.zip(other, move |a, b| z.add(a, b))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        let z = *self.ring.zpn();
        self.zip(other, move |a, b| z.sub(a, b))
    }

    pub fn neg(&self) -> Self {
        let z = *self.ring.zpn();
        let mut s = self.clone();
        for c in s.coeffs.iter_mut() {
            *c = z.neg(*c);
        }
        s
    }

    pub fn scale(&self, c: &RingElem) -> Result<Self> {
        if c.ring() != &self.ring {
            return Err(Error::RingMismatch);
        }
        let mut s = self.clone();
        let r = self.ring.rank();
        for i in 0..self.len() {
            if self.slot_nonzero(i) {
                let v = self.ring.mul_raw(self.slot(i), c.coords());
                s.coeffs[i * r..(i + 1) * r].copy_from_slice(&v);
            }
        }
        Ok(s.normalize())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.compatible(other)?;
        let (cap, exact) = if self.exact && other.exact {
            (self.degree() + other.degree(), true)
        } else {
            (effective(self).min(effective(other)), false)
        };
        let mut out = Self::zero(&self.ring, self.nvars, cap);
        out.exact = exact;
        self.mul_into(other, &mut out);
        Ok(out.normalize())
    }

    /// Accumulates `self * other` into `out` up to `out.cap`.
    fn mul_into(&self, other: &Self, out: &mut Self) {
        let cap = out.cap;
        let t = MonomialTable::get(self.nvars, cap);
        let r = self.ring.rank();
        let lhs: Vec<(usize, usize)> =
            (0..self.len().min(t.count(cap))).filter(|&i| self.slot_nonzero(i)).map(|i| (i, t.degree(i))).collect();
        let rhs: Vec<(usize, usize)> =
            (0..other.len().min(t.count(cap))).filter(|&i| other.slot_nonzero(i)).map(|i| (i, t.degree(i))).collect();
        let univariate = self.nvars == 1;
        let n_out = out.len().min(t.count(cap));
        if lhs.len() * rhs.len() > n_out * r * r {
            return self.mul_into_lazy(other, out, &lhs, &rhs, n_out);
        }
        let mut e = vec![0u16; self.nvars];
        for &(ia, da) in &lhs {
            let a = &self.coeffs[ia * r..(ia + 1) * r];
            for &(ib, db) in &rhs {
                if da + db > cap {
                    break;
                }
                let idx = if univariate {
                    ia + ib
                } else {
                    for (k, slot) in e.iter_mut().enumerate() {
                        *slot = t.exps(ia)[k] + t.exps(ib)[k];
                    }
                    t.index(&e)
                };
                let b = &other.coeffs[ib * r..(ib + 1) * r];
                self.ring.mul_acc(&mut out.coeffs[idx * r..(idx + 1) * r], a, b);
            }
        }
    }

    /// Dense variant of `mul_into`: sums coefficient products unreduced and
    /// folds them into the ring once per output monomial.
    fn mul_into_lazy(
        &self,
        other: &Self,
        out: &mut Self,
        lhs: &[(usize, usize)],
        rhs: &[(usize, usize)],
        n_out: usize,
    ) {
        let cap = out.cap;
        let t = MonomialTable::get(self.nvars, cap);
        let r = self.ring.rank();
        let rr = r * r;
        let q = self.ring.modulus();
        let batch = ((u64::MAX - q) / ((q - 1) * (q - 1)).max(1)) as usize;
        let mut acc = vec![0u64; n_out * rr];
        let sums = SumIndex::new(&t, n_out);
        for (n, &(ia, da)) in lhs.iter().enumerate() {
            if n > 0 && n % batch == 0 {
                acc.iter_mut().for_each(|x| *x %= q);
            }
            let a = &self.coeffs[ia * r..(ia + 1) * r];
            for &(ib, db) in rhs {
                if da + db > cap {
                    break;
                }
                let idx = sums.index(ia, ib);
                let b = &other.coeffs[ib * r..(ib + 1) * r];
                outer_acc(&mut acc[idx * rr..(idx + 1) * rr], a, b);
            }
        }
        for (idx, pairs) in acc.chunks_exact(rr).enumerate() {
            if pairs.iter().any(|&x| x != 0) {
                self.ring.fold_pairs(&mut out.coeffs[idx * r..(idx + 1) * r], pairs);
            }
        }
    }

    pub fn pow(&self, n: u32) -> Result<Self> {
        let mut acc = Self::one(&self.ring, self.nvars);
        for _ in 0..n {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// Inverse of a series with unit constant term, known to degree `cap`
    /// (or to `self.cap` when `None` and the series is truncated).
    pub fn unit_invert(&self, cap: Option<usize>) -> Result<Self> {
        let c0 = self.constant_term();
        let inv0 = c0.inverse()?;
        if self.exact && self.degree() == 0 {
            return Ok(Self::constant(&inv0, self.nvars));
        }
        let cap = match cap {
            Some(c) if !self.exact && c > self.cap => {
                return Err(Error::InsufficientPrecision(format!(
                    "inverse to degree {c} of a series known to degree {}",
                    self.cap
                )))
            }
            Some(c) => c,
            None if self.exact => {
                return Err(Error::InsufficientPrecision("inverse of a polynomial needs a cap".into()))
            }
            None => self.cap,
        };
        Ok(self.at_cap(cap)?.graded_inverse(&inv0))
    }

    /// `1 / self` to `self.cap`, solved degree by degree: each finished
    /// coefficient of the inverse is pushed through the nonconstant terms
    /// with unreduced sums, as in `mul_into_lazy`.
    fn graded_inverse(&self, inv0: &RingElem) -> Self {
        let cap = self.cap;
        let t = MonomialTable::get(self.nvars, cap);
        let r = self.ring.rank();
        let rr = r * r;
        let q = self.ring.modulus();
        let n_out = t.count(cap);
        let terms: Vec<(usize, usize)> =
            (1..self.len().min(n_out)).filter(|&i| self.slot_nonzero(i)).map(|i| (i, t.degree(i))).collect();
        let batch = ((u64::MAX - q) / ((q - 1) * (q - 1)).max(1)) as usize;
        let minus_inv0 = inv0.neg();
        let mut g = Self::zero(&self.ring, self.nvars, cap);
        let mut acc = vec![0u64; n_out * rr];
        let sums = SumIndex::new(&t, n_out);
        let mut pushed = 0usize;
        for ib in 0..n_out {
            let value = if ib == 0 {
                inv0.coords().to_vec()
            } else {
                let mut sum = vec![0u64; r];
                self.ring.fold_pairs(&mut sum, &acc[ib * rr..(ib + 1) * rr]);
                self.ring.mul_raw(minus_inv0.coords(), &sum)
            };
            if value.iter().all(|&x| x == 0) {
                continue;
            }
            g.slot_mut(ib).copy_from_slice(&value);
            pushed += 1;
            if pushed.is_multiple_of(batch) {
                acc[(ib + 1) * rr..].iter_mut().for_each(|x| *x %= q);
            }
            let db = t.degree(ib);
            for &(ia, da) in &terms {
                if da + db > cap {
                    break;
                }
                let idx = sums.index(ia, ib);
                outer_acc(&mut acc[idx * rr..(idx + 1) * rr], self.slot(ia), &value);
            }
        }
        g
    }

    /// `self -= c * f_1(x_1) * ... * f_k(x_k)` for univariate `f_i`, up to
    /// `self.cap`. The storage of `self` must already reach its cap.
    pub(crate) fn sub_separable(&mut self, factors: &[&MPSeries], c: &RingElem) {
        debug_assert_eq!(factors.len(), self.nvars);
        let cap = self.cap;
        let lists: Vec<Vec<(usize, Vec<u64>)>> = factors
            .iter()
            .map(|f| {
                (0..f.len().min(cap + 1)).filter(|&i| f.slot_nonzero(i)).map(|i| (i, f.slot(i).to_vec())).collect()
            })
            .collect();
        let t = self.table();
        let mut e = vec![0u16; self.nvars];
        let ring = self.ring.clone();
        self.sub_separable_rec(&ring, &t, &lists, 0, 0, c.coords().to_vec(), &mut e);
    }

    #[allow(clippy::too_many_arguments)]
    fn sub_separable_rec(
        &mut self,
        ring: &RingTower,
        t: &MonomialTable,
        lists: &[Vec<(usize, Vec<u64>)>],
        var: usize,
        deg: usize,
        acc: Vec<u64>,
        e: &mut [u16],
    ) {
        if var == lists.len() {
            let idx = t.index(e);
            let z = ring.zpn();
            for (o, a) in self.slot_mut(idx).iter_mut().zip(&acc) {
                *o = z.sub(*o, *a);
            }
            return;
        }
        for (i, coef) in &lists[var] {
            if deg + i > self.cap {
                break;
            }
            e[var] = *i as u16;
            let next = ring.mul_raw(&acc, coef);
            if next.iter().any(|&x| x != 0) {
                self.sub_separable_rec(ring, t, lists, var + 1, deg + i, next, e);
            }
        }
        e[var] = 0;
    }

    // ----- composition --------------------------------------------------

    /// Substitutes `args[i]` for `x_{i+1}`. Arguments need constant terms in
    /// the maximal ideal; nonzero constants cost precision.
    pub fn substitute(&self, args: &[MPSeries]) -> Result<Self> {
        if args.len() != self.nvars {
            return Err(Error::ArityMismatch(args.len(), self.nvars));
        }
        let m = args[0].nvars;
        for a in args {
            if a.ring != self.ring {
                return Err(Error::RingMismatch);
            }
            if a.nvars != m {
                return Err(Error::ArityMismatch(a.nvars, m));
            }
        }
        let consts: Vec<RingElem> = args.iter().map(|a| a.constant_term()).collect();
        if consts.iter().any(|c| c.is_unit()) {
            return Err(Error::NonNilpotentConstantTerm);
        }
        let e = self.ring.ideal_nilpotency(&consts);
        let exact = self.exact && args.iter().all(|a| a.exact);
        let cap = if exact {
            let dmax = args.iter().map(|a| a.degree()).max().unwrap_or(0).max(1);
            self.degree() * dmax
        } else {
            let mut c = args.iter().map(effective).min().unwrap_or(usize::MAX);
            if !self.exact {
                if self.cap + 1 < e {
                    return Err(Error::InsufficientPrecision(format!(
                        "substitution with constants of nilpotency {e} into a series known to degree {}",
                        self.cap
                    )));
                }
                c = c.min(self.cap + 1 - e);
            }
            c
        };
        let args: Vec<MPSeries> =
            if exact { args.to_vec() } else { args.iter().map(|a| a.at_cap(cap)).collect::<Result<_>>()? };
        let mut out = Self::zero(&self.ring, m, cap);
        out.exact = exact;
        let t = self.table();
        let zero_consts = consts.iter().all(|c| c.is_zero());
        let mut memo: HashMap<Vec<u16>, MPSeries> = HashMap::new();
        let r = self.ring.rank();
        for i in 0..self.len() {
            if !self.slot_nonzero(i) {
                continue;
            }
            if zero_consts && t.degree(i) > cap {
                break;
            }
            let e = t.exps(i).to_vec();
            let prod = power_product(&args, &e, cap, &mut memo)?;
            let c = self.slot(i);
            for j in 0..prod.len().min(out.len()) {
                if prod.slot_nonzero(j) {
                    let (lo, hi) = (j * r, (j + 1) * r);
                    let src = &prod.coeffs[lo..hi];
                    self.ring.mul_acc(&mut out.coeffs[lo..hi], c, src);
                }
            }
        }
        Ok(out.normalize())
    }

    /// Substitutes a univariate series `a` for `x_{var+1}`.
    pub fn subst_var(&self, var: usize, a: &MPSeries) -> Result<Self> {
        if a.nvars != 1 {
            return Err(Error::ArityMismatch(a.nvars, 1));
        }
        if a.ring != self.ring {
            return Err(Error::RingMismatch);
        }
        let c0 = a.constant_term();
        if c0.is_unit() {
            return Err(Error::NonNilpotentConstantTerm);
        }
        let e = self.ring.ideal_nilpotency(std::slice::from_ref(&c0));
        let t = self.table();
        let exact = self.exact && a.exact;
        let cap = if exact {
            let da = a.degree().max(1);
            (0..self.len())
                .filter(|&i| self.slot_nonzero(i))
                .map(|i| {
                    let ex = t.exps(i);
                    t.degree(i) - ex[var] as usize + ex[var] as usize * da
                })
                .max()
                .unwrap_or(0)
        } else {
            let mut c = effective(a);
            if !self.exact {
                if self.cap + 1 < e {
                    return Err(Error::InsufficientPrecision(format!(
                        "substitution with constant of nilpotency {e} into a series known to degree {}",
                        self.cap
                    )));
                }
                c = c.min(self.cap + 1 - e);
            }
            c
        };
        let a = if a.cap > cap { a.truncate(cap) } else { a.clone() };
        let mut out = Self::zero(&self.ring, self.nvars, cap);
        out.exact = exact;
        let tout = MonomialTable::get(self.nvars, cap);
        let r = self.ring.rank();
        let mut powers: Vec<MPSeries> = vec![Self::one(&self.ring, 1)];
        let mut ex = vec![0u16; self.nvars];
        for i in 0..self.len() {
            if !self.slot_nonzero(i) {
                continue;
            }
            let src = t.exps(i);
            let j = src[var] as usize;
            let rest = t.degree(i) - j;
            if rest > cap {
                if c0.is_zero() {
                    break;
                }
                continue;
            }
            if c0.is_zero() && rest + j > cap {
                continue;
            }
            while powers.len() <= j {
                let next = powers.last().expect("nonempty").mul(&a)?;
                let next = if next.cap > cap { next.truncate(cap) } else { next };
                powers.push(next);
            }
            let pw = &powers[j];
            let c = self.slot(i);
            ex.copy_from_slice(src);
            for d in 0..=(cap - rest).min(pw.cap) {
                let pc = pw.slot(d);
                if pc.iter().all(|&x| x == 0) {
                    continue;
                }
                ex[var] = d as u16;
                let idx = tout.index(&ex);
                self.ring.mul_acc(&mut out.coeffs[idx * r..(idx + 1) * r], c, pc);
            }
        }
        Ok(out.normalize())
    }

    /// Renames variables: `x_{i+1}` becomes `y_{map[i]+1}` in `nvars` variables.
    pub fn remap(&self, nvars: usize, map: &[usize]) -> Self {
        let t = self.table();
        let tout = MonomialTable::get(nvars, self.cap);
        let mut out = Self::zero(&self.ring, nvars, self.cap);
        out.exact = self.exact;
        let mut ex = vec![0u16; nvars];
        for i in 0..self.len() {
            if !self.slot_nonzero(i) {
                continue;
            }
            ex.iter_mut().for_each(|x| *x = 0);
            for (k, &e) in t.exps(i).iter().enumerate() {
                ex[map[k]] += e;
            }
            let idx = tout.index(&ex);
            let src = self.slot(i).to_vec();
            out.slot_mut(idx).copy_from_slice(&src);
        }
        out
    }

    /// Evaluates at a point of the maximal ideal.
    pub fn eval(&self, point: &[RingElem]) -> Result<RingElem> {
        if point.len() != self.nvars {
            return Err(Error::ArityMismatch(point.len(), self.nvars));
        }
        if point.iter().any(|x| x.ring() != &self.ring) {
            return Err(Error::RingMismatch);
        }
        if point.iter().any(|x| x.is_unit()) {
            return Err(Error::NonNilpotentConstantTerm);
        }
        let e = self.ring.ideal_nilpotency(point);
        if !self.exact && self.cap + 1 < e {
            return Err(Error::InsufficientPrecision(format!(
                "evaluation needs degree {} but series is known to degree {}",
                e - 1,
                self.cap
            )));
        }
        let t = self.table();
        let mut acc = self.ring.zero();
        for i in 0..self.len() {
            if !self.slot_nonzero(i) {
                continue;
            }
            if t.degree(i) >= e {
                break;
            }
            let mut term = self.ring.elem(self.slot(i).to_vec());
            for (k, &ex) in t.exps(i).iter().enumerate() {
                if ex > 0 {
                    term = term.mul(&point[k].pow(ex as u64))?;
                }
            }
            acc = acc.add(&term)?;
        }
        Ok(acc)
    }

    /// Compositional inverse of a univariate series with `f(0) = 0` and unit
    /// linear coefficient.
    pub fn reversion(&self, cap: Option<usize>) -> Result<Self> {
        if self.nvars != 1 {
            return Err(Error::ArityMismatch(self.nvars, 1));
        }
        if !self.constant_term().is_zero() {
            return Err(Error::NotACoordinate);
        }
        let a1 = self.coeff1(1);
        let inv1 = a1.inverse().map_err(|_| Error::NotACoordinate)?;
        if self.exact && self.degree() == 1 {
            return Self::from_terms(&self.ring, 1, None, &[(vec![1], inv1)]);
        }
        let cap = match cap {
            Some(c) if !self.exact && c > self.cap => {
                return Err(Error::InsufficientPrecision("reversion beyond known degree".into()))
            }
            Some(c) => c,
            None if self.exact => {
                return Err(Error::InsufficientPrecision("reversion of a polynomial needs a cap".into()))
            }
            None => self.cap,
        };
        let f = self.at_cap(cap)?;
        let mut g = Self::zero(&self.ring, 1, cap);
        g.slot_mut(1).copy_from_slice(inv1.coords());
        for n in 2..=cap {
            let fg = f.substitute(std::slice::from_ref(&g.truncate(n)))?;
            let c = fg.coeff1(n);
            if !c.is_zero() {
                let delta = c.mul(&inv1)?.neg();
                let cur = g.coeff1(n).add(&delta)?;
                g.slot_mut(n).copy_from_slice(cur.coords());
            }
        }
        Ok(g)
    }

    /// Univariate series divided by `t^k` (low terms must vanish).
    pub fn shift_down(&self, k: usize) -> Result<Self> {
        if self.nvars != 1 {
            return Err(Error::ArityMismatch(self.nvars, 1));
        }
        if (0..k.min(self.cap + 1)).any(|i| self.slot_nonzero(i)) {
            return Err(Error::Malformed(format!("series is not divisible by t^{k}")));
        }
        if k > self.cap {
            return Err(Error::InsufficientPrecision("shift past known degree".into()));
        }
        let r = self.ring.rank();
        let mut out = Self::zero(&self.ring, 1, self.cap - k);
        out.exact = self.exact;
        out.coeffs.copy_from_slice(&self.coeffs[k * r..]);
        Ok(out.normalize())
    }

    /// Applies a ring map to every coefficient.
    pub fn map_coeffs(&self, target: &RingTower, f: impl Fn(&RingElem) -> Result<RingElem>) -> Result<Self> {
        let mut out = Self::zero(target, self.nvars, self.cap);
        out.exact = self.exact;
        for i in 0..self.len() {
            if self.slot_nonzero(i) {
                let c = f(&self.ring.elem(self.slot(i).to_vec()))?;
                if c.ring() != target {
                    return Err(Error::RingMismatch);
                }
                out.slot_mut(i).copy_from_slice(c.coords());
            }
        }
        Ok(out.normalize())
    }

    /// Base change along the inclusion into a ring higher in the tower.
    pub fn embed(&self, target: &RingTower) -> Result<Self> {
        if target == &self.ring {
            return Ok(self.clone());
        }
        self.map_coeffs(target, |c| target.embed(c))
    }

    // ----- comparison ---------------------------------------------------

    /// First monomial (in graded order, up to the common precision) where the
    /// series differ.
    pub fn first_difference(&self, other: &Self) -> Result<Option<Discrepancy>> {
        self.compatible(other)?;
        let cap =
            if self.exact && other.exact { self.cap.max(other.cap) } else { effective(self).min(effective(other)) };
        let t = MonomialTable::get(self.nvars, cap);
        let r = self.ring.rank();
        for i in 0..t.count(cap) {
            let a = self.coeffs.get(i * r..(i + 1) * r);
            let b = other.coeffs.get(i * r..(i + 1) * r);
            let za = vec![0; r];
            let (a, b) = (a.unwrap_or(&za), b.unwrap_or(&za));
            if a != b {
                return Ok(Some(Discrepancy {
                    exponents: t.exps(i).to_vec(),
                    left: self.ring.elem(a.to_vec()),
                    right: self.ring.elem(b.to_vec()),
                }));
            }
        }
        Ok(None)
    }

    /// Equality up to the common precision.
    pub fn agrees_with(&self, other: &Self) -> Result<bool> {
        Ok(self.first_difference(other)?.is_none())
    }

    /// Precision at which two series are compared.
    pub fn common_cap(&self, other: &Self) -> usize {
        if self.exact && other.exact {
            self.cap.max(other.cap)
        } else {
            effective(self).min(effective(other))
        }
    }

    /// Nonzero coefficients of the given total degree.
    pub fn homogeneous_part(&self, d: usize) -> Vec<(Vec<u16>, RingElem)> {
        if d > self.cap {
            return Vec::new();
        }
        let t = self.table();
        (t.start(d)..t.count(d))
            .filter(|&i| self.slot_nonzero(i))
            .map(|i| (t.exps(i).to_vec(), self.ring.elem(self.slot(i).to_vec())))
            .collect()
    }
}

fn power_product(args: &[MPSeries], e: &[u16], cap: usize, memo: &mut HashMap<Vec<u16>, MPSeries>) -> Result<MPSeries> {
    if let Some(s) = memo.get(e) {
        return Ok(s.clone());
    }
    let Some(k) = e.iter().position(|&x| x > 0) else {
        let one = MPSeries::one(&args[0].ring, args[0].nvars);
        return Ok(one);
    };
    let mut prev = e.to_vec();
    prev[k] -= 1;
    let base = power_product(args, &prev, cap, memo)?;
    let mut out = MPSeries::zero(&base.ring, base.nvars, cap);
    out.exact = base.exact && args[k].exact;
    if out.exact {
        out = base.mul(&args[k])?;
    } else {
        base.mul_into(&args[k], &mut out);
    }
    memo.insert(e.to_vec(), out.clone());
    Ok(out)
}

/// `dst[i * r + j] += a[i] * b[j]`, unreduced.
#[inline]
fn outer_acc(dst: &mut [u64], a: &[u64], b: &[u64]) {
    fn fixed<const R: usize>(dst: &mut [u64], a: &[u64], b: &[u64]) {
        let b: &[u64; R] = b.try_into().expect("rank");
        for (row, &ai) in dst.chunks_exact_mut(R).zip(a) {
            if ai != 0 {
                let row: &mut [u64; R] = row.try_into().expect("rank");
                for j in 0..R {
                    row[j] += ai * b[j];
                }
            }
        }
    }
    match b.len() {
        1 => dst[0] += a[0] * b[0],
        2 => fixed::<2>(dst, a, b),
        3 => fixed::<3>(dst, a, b),
        4 => fixed::<4>(dst, a, b),
        6 => fixed::<6>(dst, a, b),
        r => {
            for (row, &ai) in dst.chunks_exact_mut(r).zip(a) {
                if ai != 0 {
                    for (d, &bj) in row.iter_mut().zip(b) {
                        *d += ai * bj;
                    }
                }
            }
        }
    }
}

/// Index of the product of two monomials, by table lookup when the dense
/// box `(cap + 1)^nvars` is small enough.
struct SumIndex<'a> {
    table: &'a MonomialTable,
    /// Position of each monomial in the dense box, and the inverse map.
    flat: Vec<usize>,
    lut: Vec<u32>,
}

impl<'a> SumIndex<'a> {
    const MAX_CELLS: usize = 1 << 25;

    fn new(table: &'a MonomialTable, n: usize) -> Self {
        let k = table.nvars;
        let side = n.checked_sub(1).map_or(1, |i| table.degree(i) + 1);
        let cells = (0..k).try_fold(1usize, |acc, _| acc.checked_mul(side)).filter(|&c| k > 1 && c <= Self::MAX_CELLS);
        let Some(cells) = cells else {
            return SumIndex { table, flat: Vec::new(), lut: Vec::new() };
        };
        let flat: Vec<usize> =
            (0..n).map(|i| table.exps(i).iter().fold(0usize, |acc, &x| acc * side + x as usize)).collect();
        let mut lut = vec![u32::MAX; cells];
        for (i, &f) in flat.iter().enumerate() {
            lut[f] = i as u32;
        }
        SumIndex { table, flat, lut }
    }

    #[inline]
    fn index(&self, a: usize, b: usize) -> usize {
        if self.table.nvars == 1 {
            return a + b;
        }
        if !self.lut.is_empty() {
            return self.lut[self.flat[a] + self.flat[b]] as usize;
        }
        let e: Vec<u16> = self.table.exps(a).iter().zip(self.table.exps(b)).map(|(x, y)| x + y).collect();
        self.table.index(&e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(p: u64, n: u32) -> RingTower {
        RingTower::base(p, n).unwrap()
    }

    fn x(r: &RingTower, k: usize, i: usize) -> MPSeries {
        MPSeries::var(r, k, i)
    }

    #[test]
    fn geometric_inverse() {
        let r = z(3, 2);
        let one = MPSeries::one(&r, 1);
        let f = one.sub(&x(&r, 1, 0)).unwrap();
        let g = f.unit_invert(Some(7)).unwrap();
        assert_eq!(g.cap(), 7);
        for i in 0..=7 {
            assert!(g.coeff1(i).is_one());
        }
        assert!(!g.is_exact());
    }

    #[test]
    fn dense_product_and_inverse_agree_with_termwise() {
        let b = z(3, 4);
        let r = b.extend(&[b.from_int(3), b.from_int(-3), b.one()], crate::coeff::ExtensionKind::Ramified).unwrap();
        let pi = r.generator().unwrap();
        let cap = 9;
        let mut f = MPSeries::zero(&r, 3, cap);
        let t = f.table();
        for i in 0..t.count(cap) {
            let c = pi.scale_int(i as i64 % 7 + 1).add(&r.from_int((i * i) as i64 % 11)).unwrap();
            let e = t.exps(i).to_vec();
            f.set_coeff(&e, &c);
        }
        f.set_coeff(&[0, 0, 0], &r.from_int(2));
        // Termwise reference product.
        let mut slow = MPSeries::zero(&r, 3, cap);
        for i in 0..t.count(cap) {
            for j in 0..t.count(cap) {
                let e: Vec<u16> = t.exps(i).iter().zip(t.exps(j)).map(|(a, b)| a + b).collect();
                if e.iter().map(|&x| x as usize).sum::<usize>() <= cap {
                    let c = slow.coeff(&e).add(&f.coeff(t.exps(i)).mul(&f.coeff(t.exps(j))).unwrap()).unwrap();
                    slow.set_coeff(&e, &c);
                }
            }
        }
        assert_eq!(f.mul(&f).unwrap().first_difference(&slow).unwrap(), None);
        let g = f.unit_invert(None).unwrap();
        assert_eq!(f.mul(&g).unwrap().first_difference(&MPSeries::one(&r, 3)).unwrap(), None);
    }

    #[test]
    fn caps_take_minimum() {
        let r = z(2, 3);
        let a = x(&r, 2, 0).at_cap(5).unwrap();
        let b = x(&r, 2, 1).at_cap(3).unwrap();
        let s = a.mul(&b).unwrap();
        assert_eq!(s.cap(), 3);
        let e = x(&r, 2, 0).mul(&x(&r, 2, 1)).unwrap();
        assert!(e.is_exact());
        assert_eq!(e.degree(), 2);
    }

    #[test]
    fn substitution_with_nilpotent_constant_loses_precision() {
        let r = z(2, 3);
        // f = 1 + t + t^2 + ... known to degree 6; substitute 2 + t.
        let f = MPSeries::univariate(&r, &vec![r.one(); 7], false);
        let a = MPSeries::from_terms(&r, 1, None, &[(vec![0], r.from_int(2)), (vec![1], r.one())]).unwrap();
        let g = f.subst_var(0, &a).unwrap();
        // 2 has nilpotency 3, so the result is known to degree 6 + 1 - 3.
        assert_eq!(g.cap(), 4);
        let h = f.substitute(std::slice::from_ref(&a)).unwrap();
        assert!(g.agrees_with(&h).unwrap());
    }

    #[test]
    fn reversion_of_exp_like() {
        let r = z(5, 3);
        // f = t + t^2
        let f = MPSeries::from_terms(&r, 1, None, &[(vec![1], r.one()), (vec![2], r.one())]).unwrap();
        let g = f.reversion(Some(8)).unwrap();
        let id = f.substitute(std::slice::from_ref(&g)).unwrap();
        assert!(id.agrees_with(&x(&r, 1, 0)).unwrap());
        // Catalan numbers with alternating sign: t - t^2 + 2t^3 - 5t^4.
        assert_eq!(g.coeff1(4), r.from_int(-5));
    }

    #[test]
    fn eval_needs_precision() {
        let r = z(2, 4);
        let f = MPSeries::univariate(&r, &vec![r.one(); 3], false);
        assert!(matches!(f.eval(&[r.from_int(2)]), Err(Error::InsufficientPrecision(_))));
        let g = MPSeries::univariate(&r, &vec![r.one(); 4], false);
        assert_eq!(g.eval(&[r.from_int(2)]).unwrap(), r.from_int(15));
    }

    #[test]
    fn remap_moves_variables() {
        let r = z(3, 1);
        let f = x(&r, 2, 0).mul(&x(&r, 2, 1).pow(2).unwrap()).unwrap();
        let g = f.remap(3, &[2, 0]);
        assert_eq!(g.coeff(&[2, 0, 1]), r.one());
    }
}
