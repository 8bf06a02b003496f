//! Θ^k-structures on the ideal sheaf of the origin.
//!
//! A section of `Θ^k(I(0))` is stored as its ratio `u` against the reference
//! section `Θ^k(x)` of the law's own coordinate, so `u` is a unit series in
//! `k` variables and `Θ^k(x)` itself is `u = 1`. With `Θ^k s` the product of
//! `s(x_I)^((-1)^|I|)` over subsets `I`, a coordinate `s = x g` gives
//! `u = Θ^k(g)`.

use crate::error::{Error, Result};
use crate::fgl::FormalGroupLaw;
use crate::isogeny::{is_coordinate, translation, Isogeny, Psi};
use crate::series::{Discrepancy, MPSeries};

#[derive(Clone, Debug)]
pub struct ThetaStructure {
    pub k: usize,
    pub law: FormalGroupLaw,
    /// Ratio against `Θ^k(x)`.
    pub u: MPSeries,
}

impl ThetaStructure {
    pub fn new(law: &FormalGroupLaw, u: MPSeries) -> Result<Self> {
        if u.ring() != law.ring() {
            return Err(Error::RingMismatch);
        }
        if !u.constant_term().is_unit() {
            return Err(Error::NonUnit);
        }
        Ok(ThetaStructure { k: u.nvars(), law: law.clone(), u })
    }

    /// `Θ^k(x)` itself.
    pub fn reference(law: &FormalGroupLaw, k: usize) -> Self {
        ThetaStructure { k, law: law.clone(), u: MPSeries::one(law.ring(), k) }
    }
}

fn law_at(law: &FormalGroupLaw, cap: usize) -> Result<MPSeries> {
    let f = law.at_cap(cap)?;
    Ok(if f.law().is_exact() { f.law().clone() } else { f.law().truncate(cap) })
}

/// `x_{i1} + ... + x_{ij}` under the law, in `k` variables.
fn subset_sum(law: &MPSeries, k: usize, vars: &[usize]) -> Result<MPSeries> {
    let ring = law.ring();
    let mut it = vars.iter();
    let Some(&first) = it.next() else {
        return Ok(MPSeries::zero_exact(ring, k));
    };
    let mut acc = MPSeries::var(ring, k, first);
    for &v in it {
        acc = law.substitute(&[acc, MPSeries::var(ring, k, v)])?;
    }
    Ok(acc)
}

fn invert(s: &MPSeries, cap: usize) -> Result<MPSeries> {
    if s.is_exact() && s.degree() == 0 {
        return s.unit_invert(None);
    }
    s.unit_invert(Some(if s.is_exact() { cap } else { cap.min(s.cap()) }))
}

fn finish(s: MPSeries, cap: usize) -> MPSeries {
    if s.is_exact() {
        s
    } else {
        s.truncate(cap)
    }
}

/// `Θ^k(g)` for a unit series `g`.
pub fn theta_of_function(law: &FormalGroupLaw, g: &MPSeries, k: usize, cap: usize) -> Result<MPSeries> {
    if g.nvars() != 1 {
        return Err(Error::ArityMismatch(g.nvars(), 1));
    }
    let f = law_at(law, cap)?;
    let ring = law.ring();
    let mut num = MPSeries::one(ring, k);
    let mut den = MPSeries::one(ring, k);
    for mask in 0u32..(1 << k) {
        let vars: Vec<usize> = (0..k).filter(|i| mask >> i & 1 == 1).collect();
        let value = g.substitute(&[subset_sum(&f, k, &vars)?])?;
        if vars.len().is_multiple_of(2) {
            num = num.mul(&value)?;
        } else {
            den = den.mul(&value)?;
        }
    }
    Ok(finish(num.mul(&invert(&den, cap)?)?, cap))
}

/// The structure `Θ^k(s)` of a coordinate `s`.
pub fn theta_of_coordinate(law: &FormalGroupLaw, s: &MPSeries, k: usize, cap: usize) -> Result<ThetaStructure> {
    if !is_coordinate(s) {
        return Err(Error::NotACoordinate);
    }
    let g = s.shift_down(1)?;
    ThetaStructure::new(law, theta_of_function(law, &g, k, cap)?)
}

/// Result of checking rigidity, symmetry and the cocycle identity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ThetaCertificate {
    pub rigid: bool,
    pub symmetric: bool,
    pub cocycle: bool,
    /// First offending coefficient of whichever check failed first.
    pub defect: Option<String>,
}

impl ThetaCertificate {
    pub fn holds(&self) -> bool {
        self.rigid && self.symmetric && self.cocycle
    }
}

fn against_one(s: &MPSeries, cap: usize) -> Result<Option<Discrepancy>> {
    let one = MPSeries::one(s.ring(), s.nvars());
    finish(s.clone(), cap).first_difference(&one)
}

/// `u(x_1, .., x_k)` with `args` substituted, as series in `nvars` variables.
fn apply(u: &MPSeries, args: &[MPSeries]) -> Result<MPSeries> {
    u.substitute(args)
}

pub fn check_theta_structure(t: &ThetaStructure, cap: usize) -> Result<ThetaCertificate> {
    let k = t.k;
    let cap = if t.u.is_exact() { cap } else { cap.min(t.u.cap()) };
    let u = &finish(t.u.clone(), cap);
    let ring = u.ring();
    let mut defect = None;

    let rigid_d = against_one(&u.subst_var(0, &MPSeries::zero_exact(ring, 1))?, cap)?;
    let rigid = rigid_d.is_none();
    if let Some(d) = rigid_d {
        defect = Some(format!("rigidity: {d}"));
    }

    let mut symmetric = true;
    for i in 0..k.saturating_sub(1) {
        let mut map: Vec<usize> = (0..k).collect();
        map.swap(i, i + 1);
        if let Some(d) = finish(u.remap(k, &map), cap).first_difference(&finish(u.clone(), cap))? {
            symmetric = false;
            defect.get_or_insert(format!("symmetry x{} <-> x{}: {d}", i + 1, i + 2));
            break;
        }
    }

    let cocycle = if k < 2 {
        true
    } else {
        let f = law_at(&t.law, cap)?;
        let n = k + 1;
        let var = |i: usize| MPSeries::var(ring, n, i);
        let sum = |a: usize, b: usize| f.substitute(&[var(a), var(b)]);
        let tail: Vec<MPSeries> = (3..n).map(var).collect();
        let with = |head: Vec<MPSeries>| -> Vec<MPSeries> { head.into_iter().chain(tail.iter().cloned()).collect() };
        let a = apply(u, &with(vec![var(1), var(2)]))?;
        let b = apply(u, &with(vec![sum(0, 1)?, var(2)]))?;
        let c = apply(u, &with(vec![var(0), sum(1, 2)?]))?;
        let d = apply(u, &with(vec![var(0), var(1)]))?;
        let combo = a.mul(&c)?.mul(&invert(&b.mul(&d)?, cap)?)?;
        match against_one(&combo, cap)? {
            None => true,
            Some(d) => {
                defect.get_or_insert(format!("cocycle: {d}"));
                false
            }
        }
    };
    Ok(ThetaCertificate { rigid, symmetric, cocycle, defect })
}

/// `Δu(x_1, .., x_{k+1}) = u(x_1, x_3, ..) u(x_2, x_3, ..) / (u(x_1 + x_2, x_3, ..) u(0, x_3, ..))`.
pub fn delta_op(t: &ThetaStructure, cap: usize) -> Result<ThetaStructure> {
    let u = &finish(t.u.clone(), cap);
    let ring = u.ring();
    let n = t.k + 1;
    let f = law_at(&t.law, cap)?;
    let var = |i: usize| MPSeries::var(ring, n, i);
    let tail: Vec<MPSeries> = (2..n).map(var).collect();
    let with = |head: MPSeries| -> Vec<MPSeries> { std::iter::once(head).chain(tail.iter().cloned()).collect() };
    let a = apply(u, &with(var(0)))?;
    let b = apply(u, &with(var(1)))?;
    let c = apply(u, &with(f.substitute(&[var(0), var(1)])?))?;
    let d = apply(u, &with(MPSeries::zero_exact(ring, n)))?;
    let out = a.mul(&b)?.mul(&invert(&c.mul(&d)?, cap)?)?;
    ThetaStructure::new(&t.law, finish(out, cap))
}

/// Precision `u` needs for [`rnorm`] to reach `cap`.
pub fn rnorm_input_cap(isog: &Isogeny, cap: usize) -> Result<usize> {
    let plan = isog.plan(cap)?;
    Ok(plan.need + isog.ring().nilpotency_index().saturating_sub(1))
}

/// The norm of `t` along `isog`, taking the product over translates in
/// variable `var`.
pub fn rnorm_along(t: &ThetaStructure, isog: &Isogeny, var: usize, cap: usize) -> Result<ThetaStructure> {
    if t.u.ring() != isog.ring() {
        return Err(Error::RingMismatch);
    }
    if var >= t.k {
        return Err(Error::ArityMismatch(var + 1, t.k));
    }
    let k = t.k;
    let ring = t.u.ring();
    let plan = isog.plan(cap)?;
    let need = plan.need;
    let mut num = MPSeries::one(ring, k);
    let mut den = MPSeries::one(ring, k);
    for x in &isog.kernel.points {
        let shift = translation(&isog.source, x, need)?;
        num = num.mul(&t.u.subst_var(var, &shift)?)?;
        den = den.mul(&t.u.subst_var(var, &MPSeries::constant(x, 1))?)?;
    }
    let p = finish(num.mul(&invert(&den, need)?)?, need);
    let u = isog.descend(&p, cap)?;
    ThetaStructure::new(&isog.target, u)
}

/// The reduced norm `Ñ t` on the target of `isog`.
pub fn rnorm(t: &ThetaStructure, isog: &Isogeny, cap: usize) -> Result<ThetaStructure> {
    rnorm_along(t, isog, 0, cap)
}

/// `Ñ t` against `psi^* t`.
#[derive(Clone, Debug)]
pub struct ThetaCoherence {
    pub norm: ThetaStructure,
    pub pulled: MPSeries,
    pub discrepancy: Option<Discrepancy>,
    pub target_is_psi_source: bool,
}

impl ThetaCoherence {
    pub fn equal(&self) -> bool {
        self.discrepancy.is_none()
    }
}

pub fn norm_coherence_theta(t: &ThetaStructure, isog: &Isogeny, psi: &Psi, cap: usize) -> Result<ThetaCoherence> {
    let norm = rnorm(t, isog, cap)?;
    let pulled = finish(psi.apply(&t.u)?, cap);
    let discrepancy = finish(norm.u.clone(), cap).first_difference(&pulled)?;
    let source = psi.apply(isog.source.law())?;
    let target_is_psi_source = isog.target.law().first_difference(&source)?.is_none();
    Ok(ThetaCoherence { norm, pulled, discrepancy, target_is_psi_source })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::RingTower;
    use crate::fgl::LawKind;

    fn law(kind: LawKind) -> FormalGroupLaw {
        FormalGroupLaw::standard(&kind, &RingTower::base(2, 4).unwrap(), 8).unwrap()
    }

    #[test]
    fn delta_of_reference_is_reference() {
        let g = law(LawKind::Multiplicative);
        for k in 1..3 {
            let d = delta_op(&ThetaStructure::reference(&g, k), 6).unwrap();
            assert_eq!(d.k, k + 1);
            assert!(d.u.is_exact() && d.u.to_text() == "1");
        }
    }

    #[test]
    fn delta_of_one_plus_a_on_additive() {
        let g = law(LawKind::Additive);
        let r = g.ring().clone();
        let u = MPSeries::univariate(&r, &[r.one(), r.one()], true);
        let d = delta_op(&ThetaStructure::new(&g, u).unwrap(), 4).unwrap();
        // (1 + a)(1 + b) / (1 + a + b) = 1 + ab - ab(a + b) + ...
        assert_eq!(d.u.coeff(&[1, 1]), r.one());
        assert_eq!(d.u.coeff(&[2, 1]), r.from_int(-1));
    }

    #[test]
    fn planted_non_cocycle_is_rejected() {
        let g = law(LawKind::Multiplicative);
        let r = g.ring().clone();
        let u = MPSeries::from_terms(&r, 2, None, &[(vec![0, 0], r.one()), (vec![1, 1], r.one())]).unwrap();
        let c = check_theta_structure(&ThetaStructure::new(&g, u).unwrap(), 6).unwrap();
        assert!(c.rigid && c.symmetric && !c.cocycle);
        assert!(c.defect.unwrap().starts_with("cocycle"));
    }

    #[test]
    fn theta_of_perturbed_coordinate_is_certified() {
        let g = law(LawKind::Multiplicative);
        let r = g.ring().clone();
        let s = MPSeries::univariate(&r, &[r.zero(), r.one(), r.one()], true);
        for k in 1..=3 {
            let t = theta_of_coordinate(&g, &s, k, 6).unwrap();
            assert!(check_theta_structure(&t, 6).unwrap().holds());
        }
        // k = 2: u(a, b) = (1 + a + b - ab)/((1 + a)(1 + b)) = 1 - 2ab + ...
        let t = theta_of_coordinate(&g, &s, 2, 4).unwrap();
        assert_eq!(t.u.coeff(&[1, 1]), r.from_int(-2));
    }

    fn two_isogeny() -> Isogeny {
        let g = FormalGroupLaw::standard(&LawKind::Multiplicative, &RingTower::base(2, 4).unwrap(), 0).unwrap();
        let level = crate::level::level_ring(&"Z/2".parse().unwrap(), &g).unwrap();
        crate::isogeny::quotient_fgl(&level, 8).unwrap()
    }

    #[test]
    fn rnorm_of_reference_is_reference() {
        let q = two_isogeny();
        for k in 1..=3 {
            let out = rnorm(&ThetaStructure::reference(&q.source, k), &q, 6).unwrap();
            assert!(out.u.is_exact() && out.u.to_text() == "1");
        }
    }

    #[test]
    fn rnorm_matches_theta_of_norm() {
        let q = two_isogeny();
        let r = q.ring().clone();
        let cap = 5;
        let inc = rnorm_input_cap(&q, cap).unwrap();
        let g = MPSeries::univariate(&r, &[r.one(), r.one()], true);
        // (1 + x)(1 + (x + 2 - 2x)) = 3 + (2x - x^2).
        let ng = crate::isogeny::norm_function(&g.at_cap(inc).unwrap(), &q, cap).unwrap();
        assert_eq!(ng.truncate(3).to_text(), "3 + 1 * x1");
        let s = MPSeries::univariate(&r, &[r.zero(), r.one(), r.one()], true);
        for k in 1..=2 {
            let t = theta_of_coordinate(&q.source, &s, k, inc).unwrap();
            let out = rnorm(&t, &q, cap).unwrap();
            let direct = theta_of_function(&q.target, &ng, k, cap).unwrap();
            assert_eq!(out.u.truncate(cap).first_difference(&direct).unwrap(), None);
            assert!(check_theta_structure(&out, cap).unwrap().holds());
            let along_last = rnorm_along(&t, &q, k - 1, cap).unwrap();
            assert_eq!(along_last.u.first_difference(&out.u).unwrap(), None);
        }
    }

    #[test]
    fn coherence_detects_perturbation() {
        let q = two_isogeny();
        let r = q.ring().clone();
        let inc = rnorm_input_cap(&q, 4).unwrap();
        let reference = theta_of_coordinate(&q.source, &MPSeries::var(&r, 1, 0), 2, inc).unwrap();
        assert!(norm_coherence_theta(&reference, &q, &Psi::Identity, 4).unwrap().equal());
        let s = MPSeries::univariate(&r, &[r.zero(), r.one(), r.one()], true);
        let t = theta_of_coordinate(&q.source, &s, 2, inc).unwrap();
        let report = norm_coherence_theta(&t, &q, &Psi::Identity, 4).unwrap();
        assert_eq!(report.discrepancy.unwrap().exponents, vec![1, 1]);
    }
}
