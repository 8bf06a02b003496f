//! Solving `c(phi(x_1), ..., phi(x_k)) = h` for `c`.
//!
//! Modulo the maximal ideal `phi` is a unit times `x^d` plus higher terms, so
//! the coefficient of `x^(dJ)` in `phi^J` is a unit and the coefficients of
//! `h` at the monomials `x^(dJ)` determine `c` triangularly. The low
//! coefficients of `phi` (degrees `1..d`) generate an ideal `I`; each sweep of
//! the triangular solve pushes the diagonal residual one step deeper into the
//! `I`-adic filtration, so at most `e(I)` sweeps are needed.

use crate::coeff::RingElem;
use crate::error::{Error, Result};
use crate::series::{monomial_text, MPSeries};

/// Degrees needed to descend to a given output precision.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DescentPlan {
    /// Weierstrass degree of `phi`.
    pub d: usize,
    /// Nilpotency index of the ideal of the low coefficients of `phi`.
    pub e_low: usize,
    /// Precision of the result.
    pub out_cap: usize,
    /// Largest `|J|` solved for.
    pub solve_deg: usize,
    /// Degree to which `h` and `phi` must be known.
    pub need: usize,
    /// Degree to which the residual is provably free of truncation effects.
    pub check_deg: usize,
}

impl DescentPlan {
    /// Plan for `phi`, which must be known at least through its Weierstrass degree.
    pub fn new(phi: &MPSeries, out_cap: usize) -> Result<Self> {
        if phi.nvars() != 1 {
            return Err(Error::ArityMismatch(phi.nvars(), 1));
        }
        if !phi.constant_term().is_zero() {
            return Err(Error::Malformed("descent coordinate must vanish at 0".into()));
        }
        let d = phi.wdeg()?;
        if d == 0 {
            return Err(Error::Malformed("descent coordinate must vanish at 0".into()));
        }
        let low: Vec<RingElem> = (1..d).map(|i| phi.coeff1(i)).collect();
        let e_low = phi.ring().ideal_nilpotency(&low);
        // A term c_J y^J with |J| > |J0| reaches the diagonal monomial of J0
        // only through at least d(|J| - |J0|)/(d - 1) low factors.
        let extra = if d == 1 { 0 } else { (e_low * (d - 1)).div_ceil(d).saturating_sub(1) };
        let solve_deg = out_cap + extra;
        let need = d * solve_deg.max(1);
        let check_deg = if d == 1 { need } else { need.min((d * (solve_deg + 1)).saturating_sub(e_low * (d - 1))) };
        Ok(DescentPlan { d, e_low, out_cap, solve_deg, need, check_deg })
    }
}

/// `c` with `c(phi(x_1), ..., phi(x_k)) = h`, to degree `out_cap`. The result
/// is exact when `h` and `phi` are and the truncated solution recomposes to
/// `h` identically.
pub fn descent_solve(h: &MPSeries, phi: &MPSeries, out_cap: usize) -> Result<MPSeries> {
    let plan = DescentPlan::new(phi, out_cap)?;
    descent_with_plan(h, phi, &plan)
}

pub(crate) fn descent_with_plan(h: &MPSeries, phi: &MPSeries, plan: &DescentPlan) -> Result<MPSeries> {
    let ring = h.ring().clone();
    if phi.ring() != &ring {
        return Err(Error::RingMismatch);
    }
    let k = h.nvars();
    let DescentPlan { d, e_low, solve_deg, need, check_deg, out_cap } = *plan;
    let mut residual = h.at_cap(need)?;
    let phi_n = phi.at_cap(need)?;
    let mut pows = vec![MPSeries::one(&ring, 1).at_cap(need)?];
    for j in 1..=solve_deg {
        let next = pows[j - 1].mul(&phi_n)?;
        pows.push(next);
    }
    let lead_inv: Vec<RingElem> = (0..=solve_deg)
        .map(|j| if d * j <= need { pows[j].coeff1(d * j).inverse() } else { Ok(ring.one()) })
        .collect::<Result<_>>()?;
    let mut c = MPSeries::zero(&ring, k, solve_deg);
    let js: Vec<Vec<u16>> = c.monomials();
    for _sweep in 0..=e_low {
        let mut changed = false;
        for j in &js {
            let diag: Vec<u16> = j.iter().map(|&x| x * d as u16).collect();
            if diag.iter().map(|&x| x as usize).sum::<usize>() > need {
                continue;
            }
            let rho = residual.coeff(&diag);
            if rho.is_zero() {
                continue;
            }
            let mut delta = rho;
            for &ji in j {
                delta = delta.mul(&lead_inv[ji as usize])?;
            }
            let factors: Vec<&MPSeries> = j.iter().map(|&ji| &pows[ji as usize]).collect();
            residual.sub_separable(&factors, &delta);
            c.set_coeff(j, &c.coeff(j).add(&delta)?);
            changed = true;
        }
        if !changed {
            break;
        }
    }
    if let Some((e, v)) =
        residual.terms().into_iter().find(|(e, _)| e.iter().map(|&x| x as usize).sum::<usize>() <= check_deg)
    {
        return Err(Error::NotInvariant(format!("{} (coefficient {})", monomial_text(&e), v.to_text())));
    }
    let out = c.truncate(out_cap);
    if h.is_exact() && phi.is_exact() {
        let candidate = c.clone().assume_exact();
        if candidate.degree() <= out_cap {
            let args: Vec<MPSeries> = (0..k).map(|i| phi.remap(k, &[i])).collect();
            if candidate.substitute(&args)?.first_difference(h)?.is_none() {
                return Ok(candidate);
            }
        }
    }
    Ok(out)
}
