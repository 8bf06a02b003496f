//! Lubin quotients `G -> G/A` by the kernel of a level structure, norms of
//! functions along them, and the coordinate form of norm coherence.

mod descent;

use std::fmt;
use std::sync::Arc;

pub use descent::{descent_solve, DescentPlan};

use crate::coeff::{RingElem, RingTower};
use crate::error::{Error, Result};
use crate::fgl::{FormalGroupLaw, LawKind};
use crate::level::{with_precision, FinAbGroup, LevelStructure};
use crate::series::{Discrepancy, MPSeries};

/// `c +_F t` as a univariate series, known to degree `cap` (exact for
/// polynomial laws).
pub fn translation(law: &FormalGroupLaw, c: &RingElem, cap: usize) -> Result<MPSeries> {
    let ring = law.ring();
    let t = MPSeries::var(ring, 1, 0);
    let shift = MPSeries::constant(c, 1);
    if law.law().is_exact() {
        return law.law().substitute(&[shift, t]);
    }
    let e = ring.ideal_nilpotency(std::slice::from_ref(c));
    let need = cap + e.saturating_sub(1);
    let f = law.at_cap(need)?;
    Ok(f.law().truncate(need).substitute(&[shift, t])?.truncate(cap))
}

/// `prod_{a in A} T_a^* f`, with `f` univariate.
pub fn translates_product(f: &MPSeries, level: &LevelStructure, cap: usize) -> Result<MPSeries> {
    if f.nvars() != 1 {
        return Err(Error::ArityMismatch(f.nvars(), 1));
    }
    let mut acc = MPSeries::one(&level.ring, 1);
    for x in &level.points {
        let shifted = f.substitute(&[translation(&level.law, x, cap)?])?;
        acc = acc.mul(&shifted)?;
    }
    Ok(if acc.is_exact() { acc } else { acc.truncate(cap) })
}

/// The coordinate `y = prod_{a in A} (x +_F x(a))` on the quotient.
pub fn lubin_norm(level: &LevelStructure, cap: usize) -> Result<MPSeries> {
    let x = MPSeries::var(&level.ring, 1, 0);
    translates_product(&x, level, cap)
}

type CoeffMap = Arc<dyn Fn(&RingElem) -> Result<RingElem> + Send + Sync>;

/// A ring endomorphism applied to coefficients.
#[derive(Clone)]
pub enum Psi {
    Identity,
    Map(CoeffMap),
}

impl Psi {
    pub fn apply(&self, f: &MPSeries) -> Result<MPSeries> {
        match self {
            Psi::Identity => Ok(f.clone()),
            Psi::Map(g) => f.map_coeffs(f.ring(), |c| g(c)),
        }
    }
}

impl fmt::Debug for Psi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Psi::Identity => write!(f, "id"),
            Psi::Map(_) => write!(f, "<map>"),
        }
    }
}

impl std::str::FromStr for Psi {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "id" | "identity" => Ok(Psi::Identity),
            other => Err(Error::Malformed(format!("unknown psi {other}"))),
        }
    }
}

/// Checks on a constructed quotient.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IsogenyCertificate {
    /// `phi(F(x, y)) = F'(phi(x), phi(y))` to the cap.
    pub homomorphism: bool,
    pub homomorphism_defect: Option<String>,
    /// `phi(x(a)) = 0` for every `a`.
    pub kernel: bool,
    /// `phi = x^|A|` modulo the maximal ideal.
    pub degree: bool,
    /// The quotient law passes the unit, commutativity and associativity checks.
    pub target_axioms: bool,
    /// Every coefficient of the quotient law lies in the base ring.
    pub target_in_base: bool,
}

impl IsogenyCertificate {
    pub fn holds(&self) -> bool {
        self.homomorphism && self.kernel && self.degree
    }
}

#[derive(Clone, Debug)]
pub struct Isogeny {
    pub kernel: LevelStructure,
    /// Source law over the ring of the kernel points.
    pub source: FormalGroupLaw,
    pub target: FormalGroupLaw,
    /// The coordinate map, known to `cap` (exact when the data are polynomial).
    pub phi: MPSeries,
    pub cap: usize,
    pub certificate: IsogenyCertificate,
}

impl Isogeny {
    pub fn degree(&self) -> u64 {
        self.kernel.group.order()
    }

    pub fn ring(&self) -> &RingTower {
        &self.kernel.ring
    }

    /// The coordinate map to degree `cap`.
    pub fn phi_at(&self, cap: usize) -> Result<MPSeries> {
        if self.phi.is_exact() || cap <= self.phi.cap() {
            return Ok(self.phi.truncate(cap.max(self.phi.degree())));
        }
        lubin_norm(&self.kernel, cap)
    }

    /// Plan for descending along this isogeny to degree `cap`.
    pub fn plan(&self, cap: usize) -> Result<DescentPlan> {
        let d = self.degree() as usize;
        DescentPlan::new(&self.phi_at(d.max(1))?, cap)
    }

    /// `c` with `c(phi(x_1), ..)` equal to `h`, where `h` must be known to
    /// `self.plan(cap)?.need`.
    pub fn descend(&self, h: &MPSeries, cap: usize) -> Result<MPSeries> {
        let plan = self.plan(cap)?;
        let phi = self.phi_at(plan.need)?;
        descent::descent_with_plan(h, &phi, &plan)
    }
}

fn in_subring(a: &RingElem, sub: &RingTower) -> bool {
    a.coords()[sub.rank()..].iter().all(|&x| x == 0)
}

/// The quotient of the source law by the kernel of `level`, to degree `cap`.
pub fn quotient_fgl(level: &LevelStructure, cap: usize) -> Result<Isogeny> {
    let d = level.group.order() as usize;
    let plan = DescentPlan::new(&lubin_norm(level, d.max(1))?, cap)?;
    if plan.d != d {
        return Err(Error::Malformed(format!(
            "norm coordinate has Weierstrass degree {} for a kernel of order {d}",
            plan.d
        )));
    }
    let phi_need = lubin_norm(level, plan.need)?;
    let law = level.law.at_cap(plan.need)?;
    let f = if law.law().is_exact() { law.law().clone() } else { law.law().truncate(plan.need) };
    let h = phi_need.substitute(std::slice::from_ref(&f))?;
    let target_law = descent::descent_with_plan(&h, &phi_need, &plan)?;
    let target = FormalGroupLaw::custom(target_law.clone(), LawKind::Quotient)?;
    let phi = if phi_need.is_exact() { phi_need.clone() } else { phi_need.truncate(cap) };

    let args = [phi.remap(2, &[0]), phi.remap(2, &[1])];
    let rhs = target_law.substitute(&args)?;
    let lhs = if h.is_exact() { h.clone() } else { h.truncate(cap) };
    let defect = lhs.first_difference(&rhs)?;

    let e_d = level.ring.nilpotency_index();
    let phi_eval = if phi.is_exact() { phi.clone() } else { lubin_norm(level, cap.max(e_d))? };
    let mut kernel = true;
    for x in &level.points {
        kernel &= phi_eval.eval(std::slice::from_ref(x))?.is_zero();
    }

    let xd = MPSeries::monomial(&level.ring.one(), &[d as u16]);
    let degree = phi.sub(&xd)?.terms().iter().all(|(_, c)| c.in_maximal_ideal());

    let axiom_cap = if target_law.is_exact() { cap } else { cap.min(target_law.cap()) };
    let target_axioms = target.check_axioms(axiom_cap)?.holds();
    let base = level.base.ring();
    let target_in_base = target_law.terms().iter().all(|(_, c)| in_subring(c, base));

    let certificate = IsogenyCertificate {
        homomorphism: defect.is_none(),
        homomorphism_defect: defect.map(|d| d.to_string()),
        kernel,
        degree,
        target_axioms,
        target_in_base,
    };
    Ok(Isogeny { kernel: level.clone(), source: level.law.clone(), target, phi, cap, certificate })
}

/// The norm `N f` of a function `f` on the source, as a function on the target.
pub fn norm_function(f: &MPSeries, isog: &Isogeny, cap: usize) -> Result<MPSeries> {
    let plan = isog.plan(cap)?;
    let prod = translates_product(f, &isog.kernel, plan.need)?;
    isog.descend(&prod, cap)
}

/// Direct quotient by `A = Z/n` against the quotient by `B = <b>` followed by
/// the quotient by the image of `A/B`.
#[derive(Clone, Debug)]
pub struct StagewiseReport {
    pub direct: Isogeny,
    pub first: Isogeny,
    pub second: Isogeny,
    /// `phi_{A/B} o phi_B`.
    pub composite_phi: MPSeries,
    pub phi_discrepancy: Option<Discrepancy>,
    pub law_discrepancy: Option<Discrepancy>,
}

impl StagewiseReport {
    pub fn equal(&self) -> bool {
        self.phi_discrepancy.is_none() && self.law_discrepancy.is_none()
    }
}

/// The sub-level structure on `<b>` of a cyclic level structure.
pub fn restrict_cyclic(level: &LevelStructure, b: u64) -> Result<LevelStructure> {
    let n = cyclic_order(&level.group)?;
    let b = gcd(b % n, n);
    let m = n / b;
    let points = (0..m).map(|j| level.points[(j * b) as usize].clone()).collect();
    LevelStructure::from_points(&FinAbGroup::new(vec![m]), &level.law, points)
}

fn cyclic_order(a: &FinAbGroup) -> Result<u64> {
    match a.factors() {
        [] => Ok(1),
        [n] => Ok(*n),
        _ => Err(Error::UnsupportedShape(a.to_string())),
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if a == 0 {
        b
    } else {
        gcd(b % a, a)
    }
}

pub fn stagewise_quotient(level: &LevelStructure, b: u64, cap: usize) -> Result<StagewiseReport> {
    let n = cyclic_order(&level.group)?;
    let b = gcd(b % n, n);
    let direct = quotient_fgl(level, cap)?;
    let sub = restrict_cyclic(level, b)?;
    let (first, second) = with_precision(cap, |c1| {
        let first = quotient_fgl(&sub, c1)?;
        // Representatives 0..b of A/B and their images on the first quotient.
        let e = level.ring.nilpotency_index();
        let phi_b = first.phi_at(e.max(1))?;
        let images =
            (0..b).map(|j| phi_b.eval(std::slice::from_ref(&level.points[j as usize]))).collect::<Result<Vec<_>>>()?;
        let quotient_group = FinAbGroup::new(vec![b]);
        let level2 = LevelStructure::from_points(&quotient_group, &first.target, images)?;
        let second = quotient_fgl(&level2, cap)?;
        Ok((first, second))
    })?;
    let composite_phi = second.phi.substitute(std::slice::from_ref(&first.phi))?;
    let phi_discrepancy = direct.phi.first_difference(&composite_phi)?;
    let law_discrepancy = direct.target.law().first_difference(second.target.law())?;
    Ok(StagewiseReport { direct, first, second, composite_phi, phi_discrepancy, law_discrepancy })
}

/// Both sides of `prod_a T_a^* s = (psi^* s)(phi(x))`.
#[derive(Clone, Debug)]
pub struct CoherenceReport {
    pub lhs: MPSeries,
    pub rhs: MPSeries,
    pub discrepancy: Option<Discrepancy>,
    /// Whether the quotient law equals `psi^*` of the source law, which is
    /// what lets `psi^* s` be read as a function on the target.
    pub target_is_psi_source: bool,
}

impl CoherenceReport {
    pub fn equal(&self) -> bool {
        self.discrepancy.is_none()
    }
}

/// Whether `s` is a coordinate: no constant term and a unit linear term.
pub fn is_coordinate(s: &MPSeries) -> bool {
    s.nvars() == 1 && s.constant_term().is_zero() && s.coeff1(1).is_unit()
}

pub fn coordinate_norm_coherence(s: &MPSeries, isog: &Isogeny, psi: &Psi, cap: usize) -> Result<CoherenceReport> {
    if !is_coordinate(s) {
        return Err(Error::NotACoordinate);
    }
    let lhs = translates_product(s, &isog.kernel, cap)?;
    let rhs = psi.apply(s)?.substitute(&[isog.phi_at(cap)?])?;
    let lhs = if lhs.is_exact() { lhs } else { lhs.truncate(cap) };
    let rhs = if rhs.is_exact() { rhs } else { rhs.truncate(cap) };
    let discrepancy = lhs.first_difference(&rhs)?;
    let pulled = psi.apply(isog.source.law())?;
    let target_is_psi_source = isog.target.law().first_difference(&pulled)?.is_none();
    Ok(CoherenceReport { lhs, rhs, discrepancy, target_is_psi_source })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::level::level_ring;

    fn gm_level(p: u64, n: u32, a: &str) -> LevelStructure {
        let ring = RingTower::base(p, n).unwrap();
        let g = FormalGroupLaw::standard(&LawKind::Multiplicative, &ring, 0).unwrap();
        level_ring(&a.parse().unwrap(), &g).unwrap()
    }

    #[test]
    fn norm_of_z2_level_is_two_series() {
        let l = gm_level(2, 8, "Z/2");
        assert_eq!(lubin_norm(&l, 8).unwrap().to_text(), "2 * x1 + -1 * x1^2");
    }

    #[test]
    fn multiplicative_quotient_is_multiplicative() {
        for (p, n) in [(2, 6), (3, 4)] {
            let l = gm_level(p, n, &format!("Z/{p}"));
            let q = quotient_fgl(&l, 8).unwrap();
            assert!(q.certificate.holds(), "{:?}", q.certificate);
            let gm = FormalGroupLaw::standard(&LawKind::Multiplicative, &l.ring, 0).unwrap();
            assert!(q.target.law().is_exact());
            assert!(q.target.law().first_difference(gm.law()).unwrap().is_none());
            assert!(q.certificate.target_in_base);
        }
    }

    #[test]
    fn trivial_kernel_is_identity() {
        let l = gm_level(2, 4, "0");
        let q = quotient_fgl(&l, 6).unwrap();
        assert_eq!(q.phi.to_text(), "1 * x1");
        assert!(q.certificate.holds());
    }

    #[test]
    fn norm_is_multiplicative() {
        let l = gm_level(2, 6, "Z/2");
        let q = quotient_fgl(&l, 6).unwrap();
        let r = &l.ring;
        let f = MPSeries::univariate(r, &[r.one(), r.one(), r.from_int(3)], true);
        let g = MPSeries::univariate(r, &[r.from_int(5), r.zero(), r.one()], true);
        let nf = norm_function(&f, &q, 5).unwrap();
        let ng = norm_function(&g, &q, 5).unwrap();
        let nfg = norm_function(&f.mul(&g).unwrap(), &q, 5).unwrap();
        assert!(nfg.agrees_with(&nf.mul(&ng).unwrap()).unwrap());
        let x = MPSeries::var(r, 1, 0);
        assert_eq!(norm_function(&x, &q, 5).unwrap().to_text(), "1 * x1");
    }

    #[test]
    fn coherence_for_coordinate_and_perturbation() {
        let l = gm_level(2, 8, "Z/2");
        let q = quotient_fgl(&l, 10).unwrap();
        let r = &l.ring;
        let x = MPSeries::var(r, 1, 0);
        let rep = coordinate_norm_coherence(&x, &q, &Psi::Identity, 10).unwrap();
        assert!(rep.equal() && rep.target_is_psi_source);
        let s = MPSeries::univariate(r, &[r.zero(), r.one(), r.one()], true);
        let rep = coordinate_norm_coherence(&s, &q, &Psi::Identity, 10).unwrap();
        assert!(!rep.equal());
    }
}
