//! Weierstrass division and preparation for univariate series.

use super::MPSeries;
use crate::error::{Error, Result};

/// `g = quotient * f + remainder` with `deg remainder < wdeg f`.
#[derive(Clone, Debug)]
pub struct Division {
    pub quotient: MPSeries,
    pub remainder: MPSeries,
}

/// `f = unit * poly` with `poly` monic of degree `wdeg f`.
#[derive(Clone, Debug)]
pub struct Preparation {
    pub poly: MPSeries,
    pub unit: MPSeries,
}

impl MPSeries {
    /// Least `d` whose coefficient is a unit.
    pub fn wdeg(&self) -> Result<usize> {
        if self.nvars != 1 {
            return Err(Error::ArityMismatch(self.nvars, 1));
        }
        (0..=self.cap).find(|&i| self.coeff1(i).is_unit()).ok_or(Error::NoWeierstrassDegree)
    }

    /// Weierstrass division of `self` by `f`.
    pub fn weierstrass_divide(&self, f: &MPSeries) -> Result<Division> {
        self.compatible(f)?;
        if self.nvars != 1 {
            return Err(Error::ArityMismatch(self.nvars, 1));
        }
        let d = f.wdeg()?;
        let ring = self.ring.clone();
        let fd = f.coeff1(d);
        if f.exact && f.degree() == d && self.exact {
            let inv = fd.inverse()?;
            let mut r = self.clone();
            let top = r.degree();
            let mut q_terms = Vec::new();
            for k in (d..=top).rev() {
                let c = r.coeff1(k).mul(&inv)?;
                if c.is_zero() {
                    continue;
                }
                q_terms.push((vec![(k - d) as u16], c.clone()));
                let shift = MPSeries::monomial(&c, &[(k - d) as u16]);
                r = r.sub(&shift.mul(f)?)?;
            }
            let quotient = MPSeries::from_terms(&ring, 1, None, &q_terms)?.normalize();
            return Ok(Division { quotient, remainder: r });
        }
        let cap_g = super::effective(self);
        let cap_f = super::effective(f);
        if d == 0 {
            let known = cap_g.min(cap_f);
            let quotient = if known == usize::MAX {
                return Err(Error::InsufficientPrecision("division by a unit polynomial needs a cap".into()));
            } else {
                self.mul(&f.unit_invert(Some(known))?)?
            };
            return Ok(Division { quotient, remainder: MPSeries::zero_exact(&ring, 1) });
        }
        let low: Vec<_> = (0..d).map(|i| f.coeff1(i)).collect();
        let e = ring.ideal_nilpotency(&low);
        let need = (e - 1) * d + 2 * d - 1;
        let mut known = cap_g.min(cap_f);
        if known == usize::MAX {
            known = need;
        }
        if known < need {
            return Err(Error::InsufficientPrecision(format!("division needs degree {need}, inputs known to {known}")));
        }
        let l = known - d;
        let u = f.at_cap(known)?.shift_down_lossy(d);
        let uinv = u.unit_invert(Some(l))?;
        let p = f.truncate(d - 1).assume_exact_poly();
        let ag = self.at_cap(known)?.shift_down_lossy(d);
        let mut q = uinv.mul(&ag)?;
        for _ in 1..e {
            let corr = q.resized(known).mul_poly(&p, known)?.shift_down_lossy(d);
            q = uinv.mul(&ag.sub(&corr)?)?;
        }
        let qcap = l - (e - 1) * d;
        let quotient = q.truncate(qcap);
        let qf = quotient.mul(&f.truncate(qcap))?;
        let rem = self.truncate(d - 1).sub(&qf.truncate(d - 1))?;
        let remainder = rem.truncate(d.saturating_sub(1)).assume_exact_poly();
        Ok(Division { quotient, remainder })
    }

    /// Weierstrass preparation: a distinguished polynomial and a unit.
    pub fn weierstrass_prep(&self) -> Result<Preparation> {
        let d = self.wdeg()?;
        let ring = self.ring.clone();
        let fd = self.coeff1(d);
        if self.exact && self.degree() == d {
            let poly = self.scale(&fd.inverse()?)?;
            let unit = MPSeries::constant(&fd, 1);
            return Ok(Preparation { poly, unit });
        }
        let td = MPSeries::monomial(&ring.one(), &[d as u16]);
        let div = td.weierstrass_divide(self)?;
        let xd = MPSeries::monomial(&ring.one(), &[d as u16]);
        let poly = xd.sub(&div.remainder)?;
        let unit = div.quotient.unit_invert(None)?;
        Ok(Preparation { poly, unit })
    }

    /// Drops the `d` lowest coefficients and shifts down, keeping the cap
    /// bookkeeping of a truncated series.
    fn shift_down_lossy(&self, d: usize) -> MPSeries {
        let r = self.ring.rank();
        let cap = self.cap.saturating_sub(d);
        let mut out = MPSeries::zero(&self.ring, 1, cap);
        if self.cap >= d {
            out.coeffs.copy_from_slice(&self.coeffs[d * r..]);
        }
        out
    }

    fn assume_exact_poly(mut self) -> MPSeries {
        self.exact = true;
        self.normalize()
    }

    /// Product with a polynomial, computed to degree `cap`.
    fn mul_poly(&self, p: &MPSeries, cap: usize) -> Result<MPSeries> {
        let mut out = MPSeries::zero(&self.ring, self.nvars, cap);
        self.mul_into(p, &mut out);
        Ok(out)
    }
}
