//! One-dimensional commutative formal group laws.

mod honda;
pub mod weierstrass;

use std::fmt;

use crate::coeff::{RingElem, RingTower};
use crate::error::{Error, Result};
use crate::series::{Discrepancy, MPSeries};

/// How a law was obtained, so it can be rebuilt at a higher cap.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LawKind {
    Additive,
    Multiplicative,
    Honda { height: u32 },
    Weierstrass { a: [i64; 5] },
    Custom,
    Quotient,
}

impl fmt::Display for LawKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LawKind::Additive => write!(f, "add"),
            LawKind::Multiplicative => write!(f, "mult"),
            LawKind::Honda { height } => write!(f, "honda:{height}"),
            LawKind::Weierstrass { a } => {
                let s: Vec<String> = a.iter().map(|c| c.to_string()).collect();
                write!(f, "weier:{}", s.join(","))
            }
            LawKind::Custom => write!(f, "custom"),
            LawKind::Quotient => write!(f, "quotient"),
        }
    }
}

impl std::str::FromStr for LawKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Malformed(format!("unknown group {s}"));
        match s {
            "add" => return Ok(LawKind::Additive),
            "mult" => return Ok(LawKind::Multiplicative),
            _ => {}
        }
        if let Some(h) = s.strip_prefix("honda:") {
            let height: u32 = h.parse().map_err(|_| bad())?;
            if height == 0 {
                return Err(bad());
            }
            return Ok(LawKind::Honda { height });
        }
        if let Some(rest) = s.strip_prefix("weier:") {
            let v: Vec<i64> = rest
                .split(',')
                .map(|x| x.trim().parse::<i64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| bad())?;
            let a: [i64; 5] = v.try_into().map_err(|_| bad())?;
            return Ok(LawKind::Weierstrass { a });
        }
        Err(bad())
    }
}

/// A formal group law `F(x1, x2)` over a tower ring.
#[derive(Clone, Debug)]
pub struct FormalGroupLaw {
    kind: LawKind,
    /// Ring over which the standard construction is carried out.
    base: RingTower,
    law: MPSeries,
}

/// Outcome of the three axiom checks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AxiomReport {
    pub cap: usize,
    pub unit: Option<Discrepancy>,
    pub commutative: Option<Discrepancy>,
    pub associative: Option<Discrepancy>,
}

impl AxiomReport {
    pub fn holds(&self) -> bool {
        self.unit.is_none() && self.commutative.is_none() && self.associative.is_none()
    }
}

impl FormalGroupLaw {
    /// A standard law over `ring`, known to total degree `cap` (the additive
    /// and multiplicative laws are exact polynomials).
    pub fn standard(kind: &LawKind, ring: &RingTower, cap: usize) -> Result<Self> {
        let x = MPSeries::var(ring, 2, 0);
        let y = MPSeries::var(ring, 2, 1);
        let law = match kind {
            LawKind::Additive => x.add(&y)?,
            LawKind::Multiplicative => x.add(&y)?.sub(&x.mul(&y)?)?,
            LawKind::Honda { height } => {
                let rat = honda::honda_rational(ring.p(), *height, cap)?;
                let mut terms = Vec::new();
                let z = ring.zpn();
                for (i, row) in rat.iter().enumerate().take(cap + 1) {
                    for (j, c) in row.iter().enumerate().take(cap + 1 - i) {
                        let v = honda::reduce_mod(c, z);
                        if v != 0 {
                            terms.push((vec![i as u16, j as u16], ring.from_int(v as i64)));
                        }
                    }
                }
                MPSeries::from_terms(ring, 2, Some(cap), &terms)?
            }
            LawKind::Weierstrass { a } => weierstrass::weierstrass_law(ring, *a, cap)?,
            LawKind::Custom | LawKind::Quotient => {
                return Err(Error::Malformed(format!("{kind} is not a standard law")))
            }
        };
        Ok(FormalGroupLaw { kind: kind.clone(), base: ring.clone(), law })
    }

    /// Wraps an arbitrary bivariate series; no axioms are checked here.
    pub fn custom(law: MPSeries, kind: LawKind) -> Result<Self> {
        if law.nvars() != 2 {
            return Err(Error::ArityMismatch(law.nvars(), 2));
        }
        Ok(FormalGroupLaw { kind, base: law.ring().clone(), law })
    }

    pub fn kind(&self) -> &LawKind {
        &self.kind
    }

    pub fn ring(&self) -> &RingTower {
        self.law.ring()
    }

    pub fn law(&self) -> &MPSeries {
        &self.law
    }

    pub fn p(&self) -> u64 {
        self.ring().p()
    }

    /// Precision of the law (`usize::MAX` for polynomial laws).
    pub fn cap(&self) -> usize {
        if self.law.is_exact() {
            usize::MAX
        } else {
            self.law.cap()
        }
    }

    /// Same law known to at least degree `cap`, rebuilding standard laws.
    pub fn at_cap(&self, cap: usize) -> Result<Self> {
        if self.cap() >= cap {
            return Ok(self.clone());
        }
        match self.kind {
            LawKind::Custom | LawKind::Quotient => {
                Err(Error::InsufficientPrecision(format!("law known to degree {}, needed {cap}", self.law.cap())))
            }
            _ => Self::standard(&self.kind, &self.base, cap)?.base_change(self.ring()),
        }
    }

    /// Same law truncated to degree `cap` (no-op for polynomial laws).
    pub fn truncated(&self, cap: usize) -> Self {
        let mut out = self.clone();
        if !self.law.is_exact() {
            out.law = self.law.truncate(cap);
        }
        out
    }

    /// Base change along an inclusion into a larger tower.
    pub fn base_change(&self, ring: &RingTower) -> Result<Self> {
        Ok(FormalGroupLaw { kind: self.kind.clone(), base: self.base.clone(), law: self.law.embed(ring)? })
    }

    /// Pushforward of the coefficients along a ring map.
    pub fn map_coeffs(&self, ring: &RingTower, f: impl Fn(&RingElem) -> Result<RingElem>) -> Result<Self> {
        Ok(FormalGroupLaw { kind: LawKind::Custom, base: ring.clone(), law: self.law.map_coeffs(ring, f)? })
    }

    /// `F(a, b)` for series in the same variables.
    pub fn add(&self, a: &MPSeries, b: &MPSeries) -> Result<MPSeries> {
        self.law.substitute(&[a.clone(), b.clone()])
    }

    /// Formal sum of several series (zero of the right shape when empty).
    pub fn sum(&self, terms: &[MPSeries], nvars: usize) -> Result<MPSeries> {
        let mut iter = terms.iter();
        let Some(first) = iter.next() else {
            return Ok(MPSeries::zero_exact(self.ring(), nvars));
        };
        let mut acc = first.clone();
        for t in iter {
            acc = self.add(&acc, t)?;
        }
        Ok(acc)
    }

    /// `x_a +_F x_b` for points of the maximal ideal.
    pub fn add_points(&self, a: &RingElem, b: &RingElem) -> Result<RingElem> {
        let e = self.ring().ideal_nilpotency(&[a.clone(), b.clone()]);
        let law = self.at_cap(e.saturating_sub(1))?;
        law.law.eval(&[a.clone(), b.clone()])
    }

    /// `[n](a)` for a point of the maximal ideal.
    pub fn mul_point(&self, n: i64, a: &RingElem) -> Result<RingElem> {
        let e = self.ring().ideal_nilpotency(std::slice::from_ref(a));
        let cap = e.saturating_sub(1).max(1);
        let law = self.at_cap(cap)?;
        law.n_series(n, cap)?.eval(std::slice::from_ref(a))
    }

    /// The inverse series `[-1](t)`, to degree `cap`.
    pub fn inverse_series(&self, cap: usize) -> Result<MPSeries> {
        let law = self.at_cap(cap)?.law.truncate(cap);
        let ring = self.ring();
        let t = MPSeries::var(ring, 1, 0);
        let mut iota = MPSeries::zero(ring, 1, cap);
        if cap >= 1 {
            iota.set_coeff(&[1], &ring.from_int(-1));
        }
        for n in 2..=cap {
            let f = law.substitute(&[t.clone(), iota.truncate(n)])?;
            let c = f.coeff1(n);
            if !c.is_zero() {
                iota.set_coeff(&[n as u16], &iota.coeff1(n).sub(&c)?);
            }
        }
        Ok(iota)
    }

    /// `[n](t)` to degree `cap`, by an addition chain.
    pub fn n_series(&self, n: i64, cap: usize) -> Result<MPSeries> {
        let law = self.at_cap(cap)?.truncated(cap);
        let ring = self.ring();
        let t = MPSeries::var(ring, 1, 0);
        let m = n.unsigned_abs();
        let mut acc = MPSeries::zero_exact(ring, 1);
        for bit in (0..64 - m.leading_zeros()).rev() {
            acc = law.add(&acc, &acc)?;
            if (m >> bit) & 1 == 1 {
                acc = law.add(&acc, &t)?;
            }
        }
        if n < 0 {
            let iota = self.inverse_series(cap)?;
            acc = iota.substitute(std::slice::from_ref(&acc))?;
        }
        Ok(if acc.is_exact() { acc } else { acc.truncate(cap) })
    }

    pub fn p_series(&self, cap: usize) -> Result<MPSeries> {
        self.n_series(self.p() as i64, cap)
    }

    /// `<p>(t) = [p](t) / t`, known to degree `cap - 1`.
    pub fn pointy_p(&self, cap: usize) -> Result<MPSeries> {
        self.p_series(cap)?.shift_down(1)
    }

    /// Height `h` with `wdeg [p] = p^h`, reading `[p]` to degree `cap`.
    pub fn height(&self, cap: usize) -> Result<u32> {
        let ps = self.p_series(cap)?;
        let d = match ps.wdeg() {
            Ok(d) => d,
            Err(Error::NoWeierstrassDegree) if ps.is_exact() => return Err(Error::InfiniteHeight),
            Err(Error::NoWeierstrassDegree) => {
                return Err(Error::InsufficientPrecision(format!("[p] has no unit coefficient up to degree {cap}")))
            }
            Err(e) => return Err(e),
        };
        let p = self.p() as usize;
        let mut h = 0u32;
        let mut q = 1usize;
        while q < d {
            q *= p;
            h += 1;
        }
        if q != d {
            return Err(Error::WdegNotPPower(d));
        }
        Ok(h)
    }

    /// Unit, commutativity and associativity, compared to degree `cap`.
    pub fn check_axioms(&self, cap: usize) -> Result<AxiomReport> {
        let law = self.at_cap(cap)?.truncated(cap);
        let ring = self.ring();
        let f = &law.law;
        let x1 = MPSeries::var(ring, 2, 0);
        let zero = MPSeries::zero_exact(ring, 1);
        let unit = f.subst_var(1, &zero)?.first_difference(&x1)?;
        let swapped = f.remap(2, &[1, 0]);
        let commutative = f.first_difference(&swapped)?;
        let v: Vec<MPSeries> = (0..3).map(|i| MPSeries::var(ring, 3, i)).collect();
        let f12 = f.remap(3, &[0, 1]);
        let f23 = f.remap(3, &[1, 2]);
        let left = f.substitute(&[f12, v[2].clone()])?;
        let right = f.substitute(&[v[0].clone(), f23])?;
        let associative = left.first_difference(&right)?;
        Ok(AxiomReport { cap, unit, commutative, associative })
    }

    /// Translation `f(x_1, .., x_var +_F c, ..)` by a point `c` of the maximal ideal.
    pub fn translate(&self, f: &MPSeries, c: &RingElem, var: usize) -> Result<MPSeries> {
        let e = self.ring().ideal_nilpotency(std::slice::from_ref(c));
        let need = if f.is_exact() { f.degree() + e } else { f.cap() + e };
        let law = self.at_cap(need)?.truncated(need);
        let t = MPSeries::var(self.ring(), 1, 0);
        let shift = law.law.substitute(&[MPSeries::constant(c, 1), t])?;
        f.subst_var(var, &shift)
    }
}
