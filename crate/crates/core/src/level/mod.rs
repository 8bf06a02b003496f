//! Hom(A, G) and Level(A, G): tautological points over extension towers,
//! the conditions (A)-(D) on a homomorphism `A -> G(D)`, the discriminant of
//! a level structure and the Vandermonde composite.

mod group;

pub use group::FinAbGroup;

use crate::coeff::{module_kernel, module_smith_valuations, ExtensionKind, RingElem, RingTower};
use crate::error::{Error, Result};
use crate::fgl::FormalGroupLaw;
use crate::series::MPSeries;

/// Largest truncation tried before giving up on a precision-hungry construction.
const MAX_CAP: usize = 512;

/// Runs `f` at increasing caps until it stops asking for more precision.
pub(crate) fn with_precision<T>(start: usize, mut f: impl FnMut(usize) -> Result<T>) -> Result<T> {
    let mut cap = start.max(4);
    loop {
        match f(cap) {
            Err(Error::InsufficientPrecision(msg)) => {
                if cap >= MAX_CAP {
                    return Err(Error::InsufficientPrecision(msg));
                }
                cap = (cap * 2).min(MAX_CAP);
            }
            other => return other,
        }
    }
}

/// Height of a law, reading `[p]` as far as needed.
pub fn height(g: &FormalGroupLaw) -> Result<u32> {
    if g.law().is_exact() {
        return g.height(g.law().cap().max(g.p() as usize) * 2);
    }
    let mut cap = (g.p() as usize).max(8);
    loop {
        match g.height(cap) {
            Err(Error::InsufficientPrecision(_)) if cap < MAX_CAP => cap *= 2,
            Err(Error::InsufficientPrecision(_)) => return Err(Error::InfiniteHeight),
            other => return other,
        }
    }
}

/// Adjoins a root of a monic polynomial, or finds it in the ring when linear.
fn adjoin_root(ring: &RingTower, poly: &MPSeries) -> Result<(RingTower, RingElem)> {
    let d = poly.degree();
    if d == 1 {
        return Ok((ring.clone(), poly.coeff1(0).neg()));
    }
    let coeffs: Vec<RingElem> = (0..=d).map(|i| poly.coeff1(i)).collect();
    let ext = ring.extend(&coeffs, ExtensionKind::Ramified)?;
    let root = ext.generator().expect("extension has a generator");
    Ok((ext, root))
}

/// The ring of Hom(A, G) with its tautological points.
#[derive(Clone, Debug)]
pub struct HomRing {
    pub ring: RingTower,
    /// Image of each standard generator of `A`.
    pub points: Vec<RingElem>,
    /// The distinguished polynomial adjoined for each factor.
    pub polys: Vec<MPSeries>,
}

/// Presents Hom(A, G) by preparing `[n_i]` for each cyclic factor.
pub fn hom_ring(a: &FinAbGroup, g: &FormalGroupLaw) -> Result<HomRing> {
    height(g)?;
    let start = a.factors().iter().copied().max().unwrap_or(1) as usize * 4;
    with_precision(start, |cap| {
        let mut ring = g.ring().clone();
        let mut points = Vec::new();
        let mut polys = Vec::new();
        for &n in a.factors() {
            let series = g.n_series(n as i64, cap)?.embed(&ring)?;
            let prep = series.weierstrass_prep()?;
            let (next, root) = adjoin_root(&ring, &prep.poly)?;
            points = points.iter().map(|x| next.embed(x)).collect::<Result<_>>()?;
            points.push(root);
            polys.push(prep.poly);
            ring = next;
        }
        Ok(HomRing { ring, points, polys })
    })
}

/// A homomorphism `A -> G(D)` given by the coordinates of its points.
#[derive(Clone, Debug)]
pub struct LevelStructure {
    pub group: FinAbGroup,
    /// The law over the base ring.
    pub base: FormalGroupLaw,
    /// The same law over `ring`.
    pub law: FormalGroupLaw,
    pub ring: RingTower,
    /// `x(l(a))`, indexed like `group.elements()`.
    pub points: Vec<RingElem>,
    /// Monic polynomials adjoined while building the tower.
    pub polys: Vec<MPSeries>,
}

impl LevelStructure {
    /// A homomorphism given by the images of the standard generators; the
    /// remaining points are formal sums.
    pub fn from_generators(
        group: &FinAbGroup,
        base: &FormalGroupLaw,
        ring: &RingTower,
        gens: &[RingElem],
    ) -> Result<Self> {
        if gens.len() != group.rank() {
            return Err(Error::Malformed(format!(
                "{} generator images for a group of rank {}",
                gens.len(),
                group.rank()
            )));
        }
        if gens.iter().any(|x| x.ring() != ring) {
            return Err(Error::RingMismatch);
        }
        if gens.iter().any(|x| x.is_unit()) {
            return Err(Error::NonNilpotentConstantTerm);
        }
        let law = base.base_change(ring)?;
        let mut points = Vec::new();
        for a in group.elements() {
            let mut acc = ring.zero();
            for (k, &ai) in a.iter().enumerate() {
                if ai != 0 {
                    let term = law.mul_point(ai as i64, &gens[k])?;
                    acc = law.add_points(&acc, &term)?;
                }
            }
            points.push(acc);
        }
        Ok(LevelStructure {
            group: group.clone(),
            base: base.clone(),
            law,
            ring: ring.clone(),
            points,
            polys: Vec::new(),
        })
    }

    /// A homomorphism given by all of its points, indexed like
    /// `group.elements()`, for a law over the ring of the points.
    pub fn from_points(group: &FinAbGroup, law: &FormalGroupLaw, points: Vec<RingElem>) -> Result<Self> {
        if points.len() as u64 != group.order() {
            return Err(Error::Malformed(format!("{} points for a group of order {}", points.len(), group.order())));
        }
        let ring = law.ring().clone();
        if points.iter().any(|x| x.ring() != &ring) {
            return Err(Error::RingMismatch);
        }
        if points.iter().any(|x| x.is_unit()) {
            return Err(Error::NonNilpotentConstantTerm);
        }
        Ok(LevelStructure {
            group: group.clone(),
            base: law.clone(),
            law: law.clone(),
            ring,
            points,
            polys: Vec::new(),
        })
    }

    pub fn point(&self, a: &[u64]) -> &RingElem {
        &self.points[self.group.index_of(a)]
    }

    /// Points of `A[k]`.
    pub fn torsion_points(&self, k: u64) -> Vec<RingElem> {
        self.group.torsion(k).iter().map(|a| self.point(a).clone()).collect()
    }

    /// First pair violating `x(a + b) = x(a) + x(b)`, if any.
    pub fn homomorphism_defect(&self) -> Result<Option<(Vec<u64>, Vec<u64>)>> {
        let elems = self.group.elements();
        for a in &elems {
            for b in &elems {
                let lhs = self.point(&self.group.add(a, b));
                let rhs = self.law.add_points(self.point(a), self.point(b))?;
                if *lhs != rhs {
                    return Ok(Some((a.clone(), b.clone())));
                }
            }
        }
        Ok(None)
    }

    /// The level structure pushed along an inclusion into a larger tower.
    pub fn base_change(&self, ring: &RingTower) -> Result<Self> {
        let points = self.points.iter().map(|x| ring.embed(x)).collect::<Result<_>>()?;
        Ok(LevelStructure { law: self.law.base_change(ring)?, ring: ring.clone(), points, ..self.clone() })
    }
}

/// The tautological level structure on Level(A, G), for `A = Z/p^m` or `(Z/p)^r`.
pub fn level_ring(a: &FinAbGroup, g: &FormalGroupLaw) -> Result<LevelStructure> {
    let p = g.p();
    if !a.is_p_group(p) {
        return Err(Error::NotPGroup(p));
    }
    let h = height(g)? as usize;
    if a.rank() > h {
        return Err(Error::RankExceedsHeight { rank: a.rank(), height: h });
    }
    let base_ring = g.ring().clone();
    if a.rank() == 0 {
        return LevelStructure::from_generators(a, g, &base_ring, &[]);
    }
    let f = a.factors();
    let elementary = f.iter().all(|&n| n == p);
    if !elementary && f.len() > 1 {
        return Err(Error::UnsupportedShape(a.to_string()));
    }
    let start = (base_ring.precision() as usize + 2) * (p.pow(h as u32) as usize);
    with_precision(start, |cap| if elementary { build_elementary(a, g, cap) } else { build_cyclic(a, g, cap) })
}

fn build_cyclic(a: &FinAbGroup, g: &FormalGroupLaw, cap: usize) -> Result<LevelStructure> {
    let p = g.p() as i64;
    let n = a.factors()[0] as i64;
    let inner = g.n_series(n / p, cap)?;
    let pointy = g.pointy_p(cap)?;
    let target = pointy.substitute(std::slice::from_ref(&inner))?;
    let prep = target.weierstrass_prep()?;
    let (ring, root) = adjoin_root(g.ring(), &prep.poly)?;
    let mut level = LevelStructure::from_generators(a, g, &ring, &[root])?;
    level.polys = vec![prep.poly];
    Ok(level)
}

fn build_elementary(a: &FinAbGroup, g: &FormalGroupLaw, cap: usize) -> Result<LevelStructure> {
    let r = a.rank();
    let p = g.p();
    let p_series = g.p_series(cap)?;
    let mut ring = g.ring().clone();
    let mut gens: Vec<RingElem> = Vec::new();
    let mut polys = Vec::new();
    for i in 0..r {
        // Points of the span of the generators found so far.
        let sub = FinAbGroup::new(vec![p; i]);
        let span = LevelStructure::from_generators(&sub, g, &ring, &gens)?;
        let t = MPSeries::var(&ring, 1, 0);
        let mut prod = MPSeries::one(&ring, 1);
        for x in &span.points {
            prod = prod.mul(&t.sub(&MPSeries::constant(x, 1))?)?;
        }
        let ps = p_series.embed(&ring)?;
        let div = ps.weierstrass_divide(&prod)?;
        if !div.remainder.is_zero() {
            let deg = div.remainder.order().unwrap_or(0);
            return Err(Error::NonzeroRemainder(deg));
        }
        let prep = div.quotient.weierstrass_prep()?;
        let (next, root) = adjoin_root(&ring, &prep.poly)?;
        gens = gens.iter().map(|x| next.embed(x)).collect::<Result<_>>()?;
        gens.push(root);
        polys = polys.iter().map(|q: &MPSeries| q.embed(&next)).collect::<Result<_>>()?;
        polys.push(prep.poly.embed(&next)?);
        ring = next;
    }
    let mut level = LevelStructure::from_generators(a, g, &ring, &gens)?;
    level.polys = polys;
    Ok(level)
}

/// Conditions (A)-(D) on a homomorphism, evaluated literally in the
/// Artinian ring, plus the lift certificates for (A) and (D).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelConditions {
    /// Every nonzero `x(a)`, `a` in `A[p]`, is a non-zero-divisor of `D`.
    pub a: bool,
    /// Every nonzero `x(a)`, `a` in `A[p]`, divides `p`.
    pub b: bool,
    /// `prod (t - x(a))` over `A[p]` divides `[p](t)`.
    pub c: bool,
    /// The Vandermonde map on `x(A[p])` is injective.
    pub d: bool,
    /// (A) after lifting: multiplication by each `x(a)` has all elementary
    /// divisors of valuation `< N`, so it is injective over any p-torsion-free
    /// ring reducing to `D`.
    pub a_lift: bool,
    /// (D) after lifting, in the same sense.
    pub d_lift: bool,
    /// Lowest nonzero remainder coefficient when (C) fails.
    pub c_remainder: Option<String>,
}

impl LevelConditions {
    pub fn all_literal(&self) -> bool {
        self.a && self.b && self.c && self.d
    }

    pub fn all_lift(&self) -> bool {
        self.a_lift && self.b && self.c && self.d_lift
    }
}

/// Whether `x` is a non-zero-divisor, literally and after lifting.
pub fn regularity(x: &RingElem) -> (bool, bool) {
    let ring = x.ring();
    let m = vec![vec![x.clone()]];
    let literal = module_kernel(ring, &m).is_empty();
    let n = ring.precision();
    let lift = module_smith_valuations(ring, &m).iter().all(|&v| v < n);
    (literal, lift)
}

/// Whether `x` divides `p` in its ring.
pub fn divides_p(x: &RingElem) -> bool {
    let ring = x.ring();
    ring.ideal_contains(std::slice::from_ref(x), &ring.from_int(ring.p() as i64))
}

/// The Vandermonde matrix `V[a][j] = x_a^j`.
pub fn vandermonde(points: &[RingElem]) -> Vec<Vec<RingElem>> {
    points.iter().map(|x| (0..points.len()).map(|j| x.pow(j as u64)).collect()).collect()
}

fn vandermonde_injective(ring: &RingTower, points: &[RingElem]) -> (bool, bool) {
    let v = vandermonde(points);
    let literal = module_kernel(ring, &v).is_empty();
    let n = ring.precision();
    let lift = module_smith_valuations(ring, &v).iter().all(|&s| s < n);
    (literal, lift)
}

pub fn check_level_conditions(level: &LevelStructure) -> Result<LevelConditions> {
    let ring = &level.ring;
    let p = ring.p();
    let torsion = level.group.torsion(p);
    let nonzero: Vec<RingElem> =
        torsion.iter().filter(|a| !level.group.is_zero(a)).map(|a| level.point(a).clone()).collect();
    let (mut a, mut a_lift) = (true, true);
    for x in &nonzero {
        let (lit, lift) = regularity(x);
        a &= lit;
        a_lift &= lift;
    }
    let b = nonzero.iter().all(divides_p);
    let pts: Vec<RingElem> = torsion.iter().map(|t| level.point(t).clone()).collect();
    let t = MPSeries::var(ring, 1, 0);
    let mut prod = MPSeries::one(ring, 1);
    for x in &pts {
        prod = prod.mul(&t.sub(&MPSeries::constant(x, 1))?)?;
    }
    let remainder = with_precision(4 * prod.degree().max(1), |cap| {
        let ps = level.base.p_series(cap)?.embed(ring)?;
        Ok(ps.weierstrass_divide(&prod)?.remainder)
    })?;
    let c_remainder = remainder.terms().first().map(|(e, c)| format!("{} * t^{}", c.to_text(), e[0]));
    let (d, d_lift) = vandermonde_injective(ring, &pts);
    Ok(LevelConditions { a, b, c: c_remainder.is_none(), d, a_lift, d_lift, c_remainder })
}

/// `Delta = prod_{a != b} (x(a) - x(b))` against `prod_{a != 0} x(a)^n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Discriminant {
    pub delta: RingElem,
    pub rhs: RingElem,
    /// A unit `eps` with `delta = eps * rhs`.
    pub unit: RingElem,
}

impl Discriminant {
    /// Both sides vanish, so the identity carries no information at this precision.
    pub fn is_degenerate(&self) -> bool {
        self.rhs.is_zero()
    }
}

/// The discriminant of `x(A[p^m])` (all of `A` when `m` is `None`).
pub fn discriminant_check(level: &LevelStructure, m: Option<u32>) -> Result<Discriminant> {
    let ring = &level.ring;
    let elems = match m {
        Some(m) => level.group.torsion(ring.p().pow(m)),
        None => level.group.elements(),
    };
    let pts: Vec<RingElem> = elems.iter().map(|a| level.point(a).clone()).collect();
    let n = pts.len() as u64;
    let mut delta = ring.one();
    for (i, x) in pts.iter().enumerate() {
        for (j, y) in pts.iter().enumerate() {
            if i != j {
                delta = delta.mul(&x.sub(y)?)?;
            }
        }
    }
    let mut rhs = ring.one();
    for (a, x) in elems.iter().zip(&pts) {
        if !level.group.is_zero(a) {
            rhs = rhs.mul(&x.pow(n))?;
        }
    }
    // Solve eps * rhs = delta over Z/p^N.
    let r = ring.rank();
    let mat = ring.mul_matrix(rhs.coords());
    let sol = crate::coeff::linalg::solve(ring.zpn(), &mat, r, delta.coords())
        .ok_or_else(|| Error::DivisionFails("discriminant is not a multiple of the product".into()))?;
    // eps is determined modulo Ann(rhs); the residues of the solutions form an
    // affine space, which contains a nonzero point iff the particular solution
    // or some kernel generator is a unit.
    let mut unit = ring.elem(sol);
    if !unit.is_unit() {
        let ann = module_kernel(ring, &[vec![rhs.clone()]]);
        let shift = ann
            .into_iter()
            .map(|mut v| v.remove(0))
            .find(RingElem::is_unit)
            .ok_or_else(|| Error::DivisionFails("quotient of discriminant is not a unit".into()))?;
        unit = unit.add(&shift)?;
    }
    Ok(Discriminant { delta, rhs, unit })
}

/// The composite `D (x) O(Hom(Z/p, G)) -> D x O(Level(Z/p, G)) -> prod_a D` used
/// for injectivity of the character map, over `D = O(Level((Z/p)^h, G))`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CharInjectivity {
    pub height: u32,
    /// Size of the matrix (`p^h`).
    pub size: usize,
    /// Kernel generators found over the Artinian tower (empty means injective).
    pub kernel_size: usize,
    /// Injective after lifting to a p-torsion-free ring.
    pub lift_injective: bool,
    /// Elementary-divisor valuations of the composite over Z/p^N.
    pub valuations: Vec<u32>,
}

impl CharInjectivity {
    pub fn injective(&self) -> bool {
        self.kernel_size == 0
    }
}

pub fn verify_char_injectivity(g: &FormalGroupLaw) -> Result<CharInjectivity> {
    let p = g.p();
    let h = height(g)?;
    let lambda = FinAbGroup::new(vec![p; h as usize]);
    let level = level_ring(&lambda, g)?;
    let ring = &level.ring;
    let size = level.points.len();
    // Domain basis 1, x, .., x^(p^h - 1). The F factor evaluates at x(l(0)) = 0,
    // each M factor at x(l(a)) for a != 0.
    let mut rows = Vec::with_capacity(size);
    for (a, x) in lambda.elements().iter().zip(&level.points) {
        let row: Vec<RingElem> = if lambda.is_zero(a) {
            (0..size).map(|j| if j == 0 { ring.one() } else { ring.zero() }).collect()
        } else {
            (0..size).map(|j| x.pow(j as u64)).collect()
        };
        rows.push(row);
    }
    let kernel = module_kernel(ring, &rows);
    let valuations = module_smith_valuations(ring, &rows);
    let n = ring.precision();
    Ok(CharInjectivity {
        height: h,
        size,
        kernel_size: kernel.len(),
        lift_injective: valuations.iter().all(|&v| v < n),
        valuations,
    })
}
