//! Coefficient rings: Z/p^N and towers of monic extensions over it.
//!
//! A tower ring is a free Z/p^N-module with basis the products of powers of
//! the adjoined roots. Elements are coordinate vectors in that basis and
//! multiplication goes through precomputed structure constants.

pub mod linalg;

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
pub use linalg::Zpn;

/// Whether an adjoined root is expected to be a uniformizer-like element
/// (Eisenstein-type) or to enlarge the residue field.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ExtensionKind {
    Ramified,
    Unramified,
}

/// One step of a tower: a monic polynomial over the ring below.
#[derive(Clone, Debug)]
pub struct Extension {
    /// Coefficients from the constant term up to the leading `1`.
    pub poly: Vec<RingElem>,
    pub kind: ExtensionKind,
}

struct Inner {
    z: Zpn,
    parent: Option<RingTower>,
    extension: Option<Extension>,
    rank: usize,
    /// `table[i * rank + j]` lists `(k, c)` with `b_i b_j = sum c b_k`.
    table: Vec<Vec<(usize, u64)>>,
    /// Matrix (mod p) of `a -> a^(p^t)` with `p^t >= rank`; rows indexed by output.
    frob_t: Vec<Vec<u64>>,
    residue_degree: usize,
    maximal_ideal: Vec<linalg::HowellRow>,
    nilpotency: usize,
}

/// A finite local Z/p^N-algebra, cheaply clonable.
#[derive(Clone)]
pub struct RingTower(Arc<Inner>);

impl fmt::Debug for RingTower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.describe())
    }
}

impl PartialEq for RingTower {
    fn eq(&self, other: &Self) -> bool {
        if Arc::ptr_eq(&self.0, &other.0) {
            return true;
        }
        if self.0.z != other.0.z || self.0.rank != other.0.rank {
            return false;
        }
        match (&self.0.parent, &other.0.parent) {
            (None, None) => true,
            (Some(a), Some(b)) => {
                let (ea, eb) = (self.0.extension.as_ref(), other.0.extension.as_ref());
                a == b
                    && match (ea, eb) {
                        (Some(x), Some(y)) => {
                            x.kind == y.kind
                                && x.poly.len() == y.poly.len()
                                && x.poly.iter().zip(&y.poly).all(|(u, v)| u.coords == v.coords)
                        }
                        _ => false,
                    }
            }
            _ => false,
        }
    }
}

impl Eq for RingTower {}

fn is_prime(p: u64) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| !p.is_multiple_of(d))
}

impl RingTower {
    /// The ring Z/p^N.
    pub fn base(p: u64, n: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if n == 0 || (n as f64) * (p as f64).log2() > 31.0 {
            return Err(Error::ModulusTooLarge { p, n });
        }
        let z = Zpn::new(p, n);
        let mut maximal = vec![vec![p % z.q]];
        if z.q == p {
            maximal = vec![vec![0]];
        }
        let inner = Inner {
            z,
            parent: None,
            extension: None,
            rank: 1,
            table: vec![vec![(0, 1)]],
            frob_t: vec![vec![1]],
            residue_degree: 1,
            maximal_ideal: linalg::howell_form(&z, &maximal, 1),
            nilpotency: n as usize,
        };
        Ok(RingTower(Arc::new(inner)))
    }

    /// Adjoins a root of the monic polynomial `poly` (coefficients over `self`,
    /// constant term first). Fails unless the result is again local.
    pub fn extend(&self, poly: &[RingElem], kind: ExtensionKind) -> Result<Self> {
        let d = poly.len().checked_sub(1).ok_or(Error::NotMonic)?;
        if d == 0 || poly.iter().any(|c| c.home != *self) || !poly[d].is_one() {
            return Err(Error::NotMonic);
        }
        let z = self.0.z;
        let r0 = self.0.rank;
        let rank = r0 * d;
        // alpha^m reduced, as d blocks over the parent, for m <= 2d-2.
        let mut pows: Vec<Vec<Vec<u64>>> = Vec::with_capacity(2 * d);
        for m in 0..d {
            let mut blocks = vec![vec![0; r0]; d];
            blocks[m][0] = 1;
            pows.push(blocks);
        }
        let tail: Vec<Vec<u64>> = poly[..d].iter().map(|c| c.neg().coords).collect();
        for m in d..(2 * d).saturating_sub(1).max(d + 1) {
            let prev = &pows[m - 1];
            let mut blocks = vec![vec![0; r0]; d];
            blocks[1..d].clone_from_slice(&prev[..d - 1]);
            let top = &prev[d - 1];
            if top.iter().any(|&x| x != 0) {
                for (b, t) in tail.iter().enumerate() {
                    let prod = self.mul_raw(top, t);
                    for (x, y) in blocks[b].iter_mut().zip(prod) {
                        *x = z.add(*x, y);
                    }
                }
            }
            pows.push(blocks);
        }
        let mut table = vec![Vec::new(); rank * rank];
        for i0 in 0..r0 {
            for k in 0..d {
                for j0 in 0..r0 {
                    for l in 0..d {
                        let mut c = vec![0; r0];
                        for &(t, v) in &self.0.table[i0 * r0 + j0] {
                            c[t] = v;
                        }
                        let mut acc = vec![0u64; rank];
                        for (blk, coeff) in pows[k + l].iter().enumerate() {
                            if coeff.iter().all(|&x| x == 0) {
                                continue;
                            }
                            let prod = self.mul_raw(&c, coeff);
                            for (t, v) in prod.into_iter().enumerate() {
                                acc[t + r0 * blk] = v;
                            }
                        }
                        table[(i0 + r0 * k) * rank + (j0 + r0 * l)] =
                            acc.into_iter().enumerate().filter(|&(_, v)| v != 0).collect();
                    }
                }
            }
        }
        let mut inner = Inner {
            z,
            parent: Some(self.clone()),
            extension: Some(Extension { poly: poly.to_vec(), kind }),
            rank,
            table,
            frob_t: Vec::new(),
            residue_degree: 0,
            maximal_ideal: Vec::new(),
            nilpotency: 0,
        };
        Self::finish_local(&mut inner)?;
        Ok(RingTower(Arc::new(inner)))
    }

    fn finish_local(inner: &mut Inner) -> Result<()> {
        let (z, rank) = (inner.z, inner.rank);
        let zp = Zpn::new(z.p, 1);
        let probe = RingTower(Arc::new(Inner {
            z,
            parent: None,
            extension: None,
            rank,
            table: inner.table.clone(),
            frob_t: Vec::new(),
            residue_degree: 0,
            maximal_ideal: Vec::new(),
            nilpotency: 0,
        }));
        let basis = |i: usize| {
            let mut v = vec![0; rank];
            v[i] = 1;
            v
        };
        let frob_matrix = |e: u64| -> Vec<Vec<u64>> {
            let cols: Vec<Vec<u64>> =
                (0..rank).map(|i| probe.pow_raw(&basis(i), e).iter().map(|x| x % z.p).collect()).collect();
            (0..rank).map(|r| (0..rank).map(|c| cols[c][r]).collect()).collect()
        };
        // Local iff the Frobenius-fixed subalgebra of R/pR is F_p.
        let mut f1 = frob_matrix(z.p);
        for (i, row) in f1.iter_mut().enumerate() {
            row[i] = zp.sub(row[i], 1);
        }
        let fixed = linalg::kernel(&zp, &f1, rank);
        if fixed.len() != 1 {
            return Err(Error::NotLocal(format!("R/pR has {} idempotent directions", fixed.len())));
        }
        let mut t = 0u32;
        while (z.p.pow(t) as usize) < rank {
            t += 1;
        }
        let ft = frob_matrix(z.p.pow(t));
        let nil = linalg::kernel(&zp, &ft, rank);
        let residue_degree = rank - nil.len();
        let mut gens: Vec<Vec<u64>> = (0..rank)
            .map(|i| {
                let mut v = vec![0; rank];
                v[i] = z.p % z.q;
                v
            })
            .collect();
        gens.extend(nil);
        let maximal = linalg::howell_form(&z, &gens, rank);
        let gen_rows: Vec<Vec<u64>> = maximal.iter().map(|h| h.row.clone()).collect();
        inner.nilpotency = probe.nilpotency_of_rows(&gen_rows);
        inner.frob_t = ft;
        inner.residue_degree = residue_degree;
        inner.maximal_ideal = maximal;
        Ok(())
    }

    pub fn p(&self) -> u64 {
        self.0.z.p
    }

    pub fn precision(&self) -> u32 {
        self.0.z.n
    }

    pub fn modulus(&self) -> u64 {
        self.0.z.q
    }

    pub fn zpn(&self) -> &Zpn {
        &self.0.z
    }

    pub fn rank(&self) -> usize {
        self.0.rank
    }

    pub fn parent(&self) -> Option<&RingTower> {
        self.0.parent.as_ref()
    }

    /// Extensions from the bottom of the tower to the top.
    pub fn extensions(&self) -> Vec<Extension> {
        let mut out = Vec::new();
        let mut cur = self.clone();
        while let (Some(parent), Some(ext)) = (cur.0.parent.clone(), cur.0.extension.clone()) {
            out.push(ext);
            cur = parent;
        }
        out.reverse();
        out
    }

    pub fn residue_degree(&self) -> usize {
        self.0.residue_degree
    }

    /// Least `e` with `m^e = 0`.
    pub fn nilpotency_index(&self) -> usize {
        self.0.nilpotency
    }

    /// Z/p^N-module generators of the maximal ideal.
    pub fn maximal_ideal(&self) -> Vec<RingElem> {
        self.0.maximal_ideal.iter().map(|h| self.elem(h.row.clone())).collect()
    }

    /// True if `self` is `other` or sits above it in a tower.
    pub fn contains(&self, other: &RingTower) -> bool {
        let mut cur = Some(self.clone());
        while let Some(c) = cur {
            if c == *other {
                return true;
            }
            cur = c.0.parent.clone();
        }
        false
    }

    pub fn describe(&self) -> String {
        let z = self.0.z;
        let mut s = format!("Z/{}^{}", z.p, z.n);
        for (i, ext) in self.extensions().iter().enumerate() {
            let deg = ext.poly.len() - 1;
            let k = match ext.kind {
                ExtensionKind::Ramified => "ram",
                ExtensionKind::Unramified => "unr",
            };
            s.push_str(&format!("[t{}: deg {} {}]", i + 1, deg, k));
        }
        s
    }

    pub fn elem(&self, coords: Vec<u64>) -> RingElem {
        debug_assert_eq!(coords.len(), self.0.rank);
        RingElem { home: self.clone(), coords }
    }

    pub fn zero(&self) -> RingElem {
        self.elem(vec![0; self.0.rank])
    }

    pub fn one(&self) -> RingElem {
        self.from_int(1)
    }

    pub fn from_int(&self, a: i64) -> RingElem {
        let mut v = vec![0; self.0.rank];
        v[0] = self.0.z.from_i64(a);
        self.elem(v)
    }

    /// The root adjoined at the top of the tower.
    pub fn generator(&self) -> Option<RingElem> {
        let parent = self.0.parent.as_ref()?;
        let mut v = vec![0; self.0.rank];
        v[parent.rank()] = 1;
        Some(self.elem(v))
    }

    /// Image of an element of a ring lower in the tower.
    pub fn embed(&self, a: &RingElem) -> Result<RingElem> {
        if a.home == *self {
            return Ok(a.clone());
        }
        if !self.contains(&a.home) {
            return Err(Error::RingMismatch);
        }
        let mut v = a.coords.clone();
        v.resize(self.0.rank, 0);
        Ok(self.elem(v))
    }

    // Raw coordinate arithmetic, used by the series layer.

    #[inline]
    pub(crate) fn mul_acc(&self, out: &mut [u64], a: &[u64], b: &[u64]) {
        let z = &self.0.z;
        if self.0.rank == 1 {
            out[0] = (out[0] + a[0] * b[0]) % z.q;
            return;
        }
        let r = self.0.rank;
        for (i, &ai) in a.iter().enumerate() {
            if ai == 0 {
                continue;
            }
            for (j, &bj) in b.iter().enumerate() {
                if bj == 0 {
                    continue;
                }
                let prod = ai * bj % z.q;
                for &(k, c) in &self.0.table[i * r + j] {
                    out[k] = (out[k] + prod * c) % z.q;
                }
            }
        }
    }

    /// Adds to `out` the element whose unreduced pair sums are `acc`, with
    /// `acc[i * rank + j]` standing for a multiple of `b_i b_j`.
    pub(crate) fn fold_pairs(&self, out: &mut [u64], acc: &[u64]) {
        let q = self.0.z.q;
        for (ij, &s) in acc.iter().enumerate() {
            let s = s % q;
            if s == 0 {
                continue;
            }
            for &(k, c) in &self.0.table[ij] {
                out[k] = (out[k] + s * c) % q;
            }
        }
    }

    pub(crate) fn mul_raw(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        let mut out = vec![0; self.0.rank];
        self.mul_acc(&mut out, a, b);
        out
    }

    pub(crate) fn pow_raw(&self, a: &[u64], mut e: u64) -> Vec<u64> {
        let mut base = a.to_vec();
        let mut acc = vec![0; self.0.rank];
        acc[0] = 1 % self.0.z.q;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul_raw(&acc, &base);
            }
            e >>= 1;
            if e > 0 {
                base = self.mul_raw(&base, &base);
            }
        }
        acc
    }

    pub(crate) fn is_unit_raw(&self, a: &[u64]) -> bool {
        let p = self.0.z.p;
        self.0.frob_t.iter().any(|row| row.iter().zip(a).fold(0, |acc, (&m, &x)| (acc + m * (x % p)) % p) != 0)
    }

    /// Multiplication-by-`a` matrix (rows indexed by output coordinate).
    pub(crate) fn mul_matrix(&self, a: &[u64]) -> Vec<Vec<u64>> {
        let r = self.0.rank;
        let cols: Vec<Vec<u64>> = (0..r)
            .map(|i| {
                let mut e = vec![0; r];
                e[i] = 1;
                self.mul_raw(a, &e)
            })
            .collect();
        (0..r).map(|row| (0..r).map(|c| cols[c][row]).collect()).collect()
    }

    pub(crate) fn inv_raw(&self, a: &[u64]) -> Option<Vec<u64>> {
        if !self.is_unit_raw(a) {
            return None;
        }
        let z = self.0.z;
        let r = self.0.rank;
        let zp = Zpn::new(z.p, 1);
        let m: Vec<Vec<u64>> =
            self.mul_matrix(a).into_iter().map(|row| row.into_iter().map(|x| x % z.p).collect()).collect();
        let mut e0 = vec![0; r];
        e0[0] = 1;
        let mut b = linalg::solve(&zp, &m, r, &e0)?;
        let mut two = vec![0; r];
        two[0] = 2 % z.q;
        for _ in 0..=(32 - z.n.leading_zeros()) {
            let ab = self.mul_raw(a, &b);
            if ab == self.one().coords {
                return Some(b);
            }
            let corr: Vec<u64> = two.iter().zip(&ab).map(|(&t, &x)| z.sub(t, x)).collect();
            b = self.mul_raw(&b, &corr);
        }
        (self.mul_raw(a, &b) == self.one().coords).then_some(b)
    }

    /// Z/q-span of the products of two spanning sets, in Howell form.
    fn product_span(&self, a: &[Vec<u64>], b: &[Vec<u64>]) -> Vec<Vec<u64>> {
        let mut rows = Vec::new();
        for x in a {
            for y in b {
                let v = self.mul_raw(x, y);
                if v.iter().any(|&c| c != 0) {
                    rows.push(v);
                }
            }
        }
        linalg::howell_form(&self.0.z, &rows, self.0.rank).into_iter().map(|h| h.row).collect()
    }

    /// Least `e >= 1` with `I^e = 0` for the ideal generated by `gens`.
    fn nilpotency_of_rows(&self, gens: &[Vec<u64>]) -> usize {
        let r = self.0.rank;
        let basis: Vec<Vec<u64>> = (0..r)
            .map(|i| {
                let mut v = vec![0; r];
                v[i] = 1;
                v
            })
            .collect();
        let ideal = self.product_span(gens, &basis);
        if ideal.is_empty() {
            return 1;
        }
        let mut power = ideal.clone();
        let mut e = 1;
        while !power.is_empty() {
            power = self.product_span(&power, &ideal);
            e += 1;
            if e > r * self.0.z.n as usize + 1 {
                // Not nilpotent; callers only pass elements of the maximal ideal.
                return usize::MAX;
            }
        }
        e
    }

    /// Least `e >= 1` with `I^e = 0`, where `I` is generated by `gens`
    /// (`1` for the zero ideal, `usize::MAX` if some generator is a unit).
    pub fn ideal_nilpotency(&self, gens: &[RingElem]) -> usize {
        let nonzero: Vec<Vec<u64>> = gens.iter().filter(|g| !g.is_zero()).map(|g| g.coords.clone()).collect();
        match nonzero.len() {
            0 => 1,
            1 => {
                let g = &nonzero[0];
                if self.is_unit_raw(g) {
                    return usize::MAX;
                }
                let mut acc = g.clone();
                let mut e = 1;
                while acc.iter().any(|&x| x != 0) {
                    acc = self.mul_raw(&acc, g);
                    e += 1;
                }
                e
            }
            _ => {
                if nonzero.iter().any(|g| self.is_unit_raw(g)) {
                    return usize::MAX;
                }
                self.nilpotency_of_rows(&nonzero)
            }
        }
    }

    /// Whether `a` lies in the ideal generated by `gens`.
    pub fn ideal_contains(&self, gens: &[RingElem], a: &RingElem) -> bool {
        let r = self.0.rank;
        let basis: Vec<Vec<u64>> = (0..r)
            .map(|i| {
                let mut v = vec![0; r];
                v[i] = 1;
                v
            })
            .collect();
        let rows: Vec<Vec<u64>> = gens.iter().map(|g| g.coords.clone()).collect();
        let span = self.product_span(&rows, &basis);
        let form = linalg::howell_form(&self.0.z, &span, r);
        linalg::in_span(&self.0.z, &form, &a.coords)
    }
}

/// A matrix over a tower ring as a matrix over Z/p^N, each entry replaced by
/// its multiplication matrix.
pub fn expand_matrix(ring: &RingTower, m: &[Vec<RingElem>]) -> Vec<Vec<u64>> {
    let r = ring.rank();
    let ncols = m.first().map_or(0, |row| row.len());
    let mut out = vec![vec![0; ncols * r]; m.len() * r];
    for (i, row) in m.iter().enumerate() {
        for (j, x) in row.iter().enumerate() {
            for (bi, brow) in ring.mul_matrix(x.coords()).into_iter().enumerate() {
                out[i * r + bi][j * r..(j + 1) * r].copy_from_slice(&brow);
            }
        }
    }
    out
}

/// Generators of the kernel of a matrix over a tower ring, as a Z/p^N-module.
pub fn module_kernel(ring: &RingTower, m: &[Vec<RingElem>]) -> Vec<Vec<RingElem>> {
    let r = ring.rank();
    let ncols = m.first().map_or(0, |row| row.len());
    linalg::kernel(ring.zpn(), &expand_matrix(ring, m), ncols * r)
        .into_iter()
        .map(|v| v.chunks(r).map(|c| ring.elem(c.to_vec())).collect())
        .collect()
}

/// Elementary-divisor valuations of a tower matrix viewed over Z/p^N.
///
/// All of them are `< N` exactly when the matrix is injective after lifting
/// to any p-torsion-free ring with this reduction.
pub fn module_smith_valuations(ring: &RingTower, m: &[Vec<RingElem>]) -> Vec<u32> {
    let r = ring.rank();
    let ncols = m.first().map_or(0, |row| row.len());
    linalg::smith_valuations(ring.zpn(), &expand_matrix(ring, m), ncols * r)
}

/// An element of a tower ring.
#[derive(Clone, PartialEq, Eq)]
pub struct RingElem {
    home: RingTower,
    coords: Vec<u64>,
}

impl fmt::Debug for RingElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_text())
    }
}

impl RingElem {
    pub fn ring(&self) -> &RingTower {
        &self.home
    }

    pub fn coords(&self) -> &[u64] {
        &self.coords
    }

    fn check(&self, other: &RingElem) -> Result<()> {
        if self.home == other.home {
            Ok(())
        } else {
            Err(Error::RingMismatch)
        }
    }

    pub fn add(&self, other: &RingElem) -> Result<RingElem> {
        self.check(other)?;
        let z = self.home.zpn();
        let v = self.coords.iter().zip(&other.coords).map(|(&a, &b)| z.add(a, b)).collect();
        Ok(self.home.elem(v))
    }

    pub fn sub(&self, other: &RingElem) -> Result<RingElem> {
        self.check(other)?;
        let z = self.home.zpn();
        let v = self.coords.iter().zip(&other.coords).map(|(&a, &b)| z.sub(a, b)).collect();
        Ok(self.home.elem(v))
    }

    pub fn mul(&self, other: &RingElem) -> Result<RingElem> {
        self.check(other)?;
        Ok(self.home.elem(self.home.mul_raw(&self.coords, &other.coords)))
    }

    pub fn neg(&self) -> RingElem {
        let z = self.home.zpn();
        self.home.elem(self.coords.iter().map(|&a| z.neg(a)).collect())
    }

    pub fn pow(&self, e: u64) -> RingElem {
        self.home.elem(self.home.pow_raw(&self.coords, e))
    }

    pub fn scale_int(&self, c: i64) -> RingElem {
        let z = self.home.zpn();
        let c = z.from_i64(c);
        self.home.elem(self.coords.iter().map(|&a| z.mul(a, c)).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&x| x == 0)
    }

    pub fn is_one(&self) -> bool {
        self.coords[0] == 1 % self.home.modulus() && self.coords[1..].iter().all(|&x| x == 0)
    }

    pub fn is_unit(&self) -> bool {
        self.home.is_unit_raw(&self.coords)
    }

    pub fn in_maximal_ideal(&self) -> bool {
        !self.is_unit()
    }

    pub fn inverse(&self) -> Result<RingElem> {
        self.home.inv_raw(&self.coords).map(|v| self.home.elem(v)).ok_or(Error::NonUnit)
    }

    /// Least `k` with `self^k = 0`, or `None` for units.
    pub fn nilpotency(&self) -> Option<usize> {
        match self.home.ideal_nilpotency(std::slice::from_ref(self)) {
            usize::MAX => None,
            e => Some(e),
        }
    }

    /// Coordinates as symmetric integers, e.g. `-1` or `[0, 1]`.
    pub fn to_text(&self) -> String {
        let z = self.home.zpn();
        if self.coords.len() == 1 {
            return z.signed(self.coords[0]).to_string();
        }
        let parts: Vec<String> = self.coords.iter().map(|&c| z.signed(c).to_string()).collect();
        format!("[{}]", parts.join(", "))
    }

    /// Inverse of [`RingElem::to_text`].
    pub fn parse(ring: &RingTower, s: &str) -> Result<RingElem> {
        let s = s.trim();
        let body = s.strip_prefix('[').and_then(|t| t.strip_suffix(']'));
        let parts: Vec<&str> = match body {
            Some(b) => b.split(',').map(str::trim).collect(),
            None => vec![s],
        };
        if body.is_some() && parts.len() != ring.rank() {
            return Err(Error::Malformed(format!("expected {} coordinates in {s}", ring.rank())));
        }
        let mut v = vec![0; ring.rank()];
        for (slot, part) in v.iter_mut().zip(&parts) {
            let n: i64 = part.parse().map_err(|_| Error::Malformed(format!("bad coefficient {part}")))?;
            *slot = ring.zpn().from_i64(n);
        }
        Ok(ring.elem(v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unramified_quadratic_over_z2(n: u32) -> RingTower {
        let r = RingTower::base(2, n).unwrap();
        let poly = vec![r.from_int(1), r.from_int(1), r.one()];
        r.extend(&poly, ExtensionKind::Unramified).unwrap()
    }

    #[test]
    fn base_ring_invariants() {
        let r = RingTower::base(3, 4).unwrap();
        assert_eq!(r.modulus(), 81);
        assert_eq!(r.nilpotency_index(), 4);
        assert_eq!(r.residue_degree(), 1);
        assert!(r.from_int(2).is_unit());
        assert!(!r.from_int(6).is_unit());
        assert_eq!(r.from_int(2).inverse().unwrap(), r.from_int(41));
        assert_eq!(RingTower::base(4, 2).unwrap_err(), Error::NotPrime(4));
    }

    #[test]
    fn eisenstein_extension() {
        let r = RingTower::base(2, 3).unwrap();
        // t^2 - 2
        let d = r.extend(&[r.from_int(-2), r.zero(), r.one()], ExtensionKind::Ramified).unwrap();
        assert_eq!(d.rank(), 2);
        assert_eq!(d.residue_degree(), 1);
        assert_eq!(d.nilpotency_index(), 6);
        let t = d.generator().unwrap();
        assert_eq!(t.mul(&t).unwrap(), d.from_int(2));
        assert!(!t.is_unit());
        assert_eq!(t.nilpotency(), Some(6));
    }

    #[test]
    fn unramified_extension_has_bigger_residue_field() {
        let d = unramified_quadratic_over_z2(3);
        assert_eq!(d.residue_degree(), 2);
        assert_eq!(d.nilpotency_index(), 3);
        let t = d.generator().unwrap();
        assert!(t.is_unit());
        let ti = t.inverse().unwrap();
        assert!(t.mul(&ti).unwrap().is_one());
    }

    #[test]
    fn split_extension_is_not_local() {
        let r = RingTower::base(3, 2).unwrap();
        // t^2 - 1 splits mod 3.
        let err = r.extend(&[r.from_int(-1), r.zero(), r.one()], ExtensionKind::Unramified).unwrap_err();
        assert!(matches!(err, Error::NotLocal(_)));
    }

    #[test]
    fn two_step_tower_embeds() {
        let r = RingTower::base(2, 4).unwrap();
        let d1 = r.extend(&[r.from_int(-2), r.zero(), r.one()], ExtensionKind::Ramified).unwrap();
        let s = d1.generator().unwrap();
        let d2 = d1.extend(&[s.neg(), d1.zero(), d1.one()], ExtensionKind::Ramified).unwrap();
        let t = d2.generator().unwrap();
        let s2 = d2.embed(&s).unwrap();
        assert_eq!(t.pow(2), s2);
        assert_eq!(t.pow(4), d2.from_int(2));
        assert_eq!(d2.extensions().len(), 2);
        assert!(d2.contains(&r));
        assert_eq!(d2.nilpotency_index(), 16);
    }

    #[test]
    fn kernel_of_nilpotent_multiplication() {
        let r = RingTower::base(2, 3).unwrap();
        let d = r.extend(&[r.from_int(-2), r.zero(), r.one()], ExtensionKind::Ramified).unwrap();
        let t = d.generator().unwrap();
        let ker = module_kernel(&d, &[vec![t.clone()]]);
        assert!(!ker.is_empty());
        for v in &ker {
            assert!(t.mul(&v[0]).unwrap().is_zero());
        }
        // t is regular in Z_2[sqrt 2], so every valuation is below N.
        assert!(module_smith_valuations(&d, &[vec![t]]).iter().all(|&v| v < 3));
        assert!(module_kernel(&d, &[vec![d.from_int(3)]]).is_empty());
    }

    #[test]
    fn text_roundtrip() {
        let d = unramified_quadratic_over_z2(2);
        let a = d.elem(vec![3, 1]);
        assert_eq!(a.to_text(), "[-1, 1]");
        assert_eq!(RingElem::parse(&d, &a.to_text()).unwrap(), a);
    }
}
