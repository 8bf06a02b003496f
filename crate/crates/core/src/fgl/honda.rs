//! Honda laws built over Q from the logarithm `sum t^(q^i) / p^i`, `q = p^h`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Dense bivariate rational coefficients `c[i][j]` of `x^i y^j`, `i + j <= cap`.
pub(crate) type RationalLaw = Vec<Vec<BigRational>>;

type Cache = Mutex<HashMap<(u64, u32), (usize, Arc<RationalLaw>)>>;

fn truncated_mul(a: &[BigRational], b: &[BigRational], cap: usize) -> Vec<BigRational> {
    let mut out = vec![BigRational::zero(); cap + 1];
    for (i, x) in a.iter().enumerate().filter(|(_, x)| !x.is_zero()) {
        for (j, y) in b.iter().enumerate().take(cap + 1 - i) {
            if !y.is_zero() {
                out[i + j] += x * y;
            }
        }
    }
    out
}

fn truncated_pow(a: &[BigRational], mut e: u64, cap: usize) -> Vec<BigRational> {
    let mut acc = vec![BigRational::zero(); cap + 1];
    acc[0] = BigRational::one();
    let mut base = a.to_vec();
    while e > 0 {
        if e & 1 == 1 {
            acc = truncated_mul(&acc, &base, cap);
        }
        e >>= 1;
        if e > 0 {
            base = truncated_mul(&base, &base, cap);
        }
    }
    acc
}

fn log_terms(p: u64, h: u32, cap: usize) -> Vec<(usize, BigRational)> {
    let q = p.pow(h) as usize;
    let mut out = Vec::new();
    let (mut deg, mut den) = (1usize, BigInt::one());
    while deg <= cap {
        out.push((deg, BigRational::new(BigInt::one(), den.clone())));
        deg = match deg.checked_mul(q) {
            Some(d) => d,
            None => break,
        };
        den *= BigInt::from(p);
    }
    out
}

fn truncated_inverse(a: &[BigRational], cap: usize) -> Vec<BigRational> {
    let inv0 = a[0].recip();
    let mut out = vec![BigRational::zero(); cap + 1];
    out[0] = inv0.clone();
    for n in 1..=cap {
        let mut acc = BigRational::zero();
        for k in 1..=n.min(a.len() - 1) {
            if !a[k].is_zero() {
                acc += &a[k] * &out[n - k];
            }
        }
        out[n] = -(acc * &inv0);
    }
    out
}

/// Coefficients `e_1..e_cap` of the exponential (compositional inverse of the log).
fn exponential(p: u64, h: u32, cap: usize) -> Vec<BigRational> {
    let logs = log_terms(p, h, cap);
    let mut e = vec![BigRational::zero(); cap + 1];
    if cap == 0 {
        return e;
    }
    e[1] = BigRational::one();
    // Newton on log(e(t)) = t: e <- e - (log(e) - t) / log'(e).
    let mut prec = 1;
    while prec < cap {
        prec = (2 * prec).min(cap);
        let mut g = vec![BigRational::zero(); prec + 1];
        let mut dg = vec![BigRational::zero(); prec + 1];
        g[1] = -BigRational::one();
        for (deg, c) in &logs {
            let pw = truncated_pow(&e[..=prec], (*deg - 1) as u64, prec);
            let dc = c * BigRational::from_integer(BigInt::from(*deg));
            let full = truncated_mul(&pw, &e[..=prec], prec);
            for n in 0..=prec {
                g[n] += c * &full[n];
                dg[n] += &dc * &pw[n];
            }
        }
        let step = truncated_mul(&g, &truncated_inverse(&dg, prec), prec);
        for n in 0..=prec {
            e[n] -= &step[n];
        }
    }
    e
}

fn p_valuation(n: &BigInt, p: &BigInt) -> u32 {
    let mut n = n.clone();
    let mut v = 0;
    while !n.is_zero() && (&n % p).is_zero() {
        n /= p;
        v += 1;
    }
    v
}

fn compute(p: u64, h: u32, cap: usize) -> RationalLaw {
    let logs = log_terms(p, h, cap);
    let ex = exponential(p, h, cap);
    let pb = BigInt::from(p);
    // Every coefficient of L^k in degree <= cap has denominator dividing p^cap,
    // and every e_k has a p-power denominator; work with integer numerators
    // over fixed powers of p so no gcds are taken in the inner loop.
    let s = cap as u32;
    let t = ex.iter().map(|e| p_valuation(e.denom(), &pb)).max().unwrap_or(0);
    let mut l: Vec<((usize, usize), u32)> = Vec::new();
    for (d, c) in &logs {
        let v = p_valuation(c.denom(), &pb);
        l.push(((*d, 0), v));
        l.push(((0, *d), v));
    }
    let zero = || vec![vec![BigInt::zero(); cap + 1]; cap + 1];
    let pows: Vec<BigInt> = (0..=s + t).map(|k| pb.pow(k)).collect();
    let mut law = zero();
    let mut power = zero();
    power[0][0] = pows[s as usize].clone();
    for (k, en) in ex.iter().enumerate().skip(1) {
        let mut next = zero();
        for i in 0..=cap {
            for j in 0..=cap - i {
                if i + j + 1 < k || power[i][j].is_zero() {
                    continue;
                }
                for ((a, b), v) in &l {
                    if i + a + j + b <= cap {
                        next[i + a][j + b] += &power[i][j] / &pows[*v as usize];
                    }
                }
            }
        }
        power = next;
        if !en.is_zero() {
            let scale = en.numer() * &pows[(t - p_valuation(en.denom(), &pb)) as usize];
            for i in 0..=cap {
                for j in 0..=cap - i {
                    if !power[i][j].is_zero() {
                        law[i][j] += &scale * &power[i][j];
                    }
                }
            }
        }
    }
    let den = &pows[(s + t) as usize];
    law.into_iter().map(|row| row.into_iter().map(|n| BigRational::new(n, den.clone())).collect()).collect()
}

/// The Honda law of height `h` at `p` over Q, to total degree `cap`; fails if
/// some coefficient is not p-integral.
pub(crate) fn honda_rational(p: u64, h: u32, cap: usize) -> Result<Arc<RationalLaw>> {
    static CACHE: OnceLock<Cache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some((c, law)) = cache.lock().expect("honda cache").get(&(p, h)) {
        if *c >= cap {
            return Ok(law.clone());
        }
    }
    let law = compute(p, h, cap);
    let pb = BigInt::from(p);
    for (i, row) in law.iter().enumerate() {
        for (j, c) in row.iter().enumerate() {
            if (c.denom() % &pb).is_zero() {
                return Err(Error::IntegralityFailure {
                    monomial: crate::series::monomial_text(&[i as u16, j as u16]),
                });
            }
        }
    }
    let law = Arc::new(law);
    cache.lock().expect("honda cache").insert((p, h), (cap, law.clone()));
    Ok(law)
}

/// Image of a p-integral rational in Z/p^N.
pub(crate) fn reduce_mod(c: &BigRational, z: &crate::coeff::Zpn) -> u64 {
    let qb = BigInt::from(z.q);
    let num = ((c.numer() % &qb) + &qb) % &qb;
    let den = ((c.denom() % &qb) + &qb) % &qb;
    let num = num.to_u64().expect("reduced");
    let den = den.to_u64().expect("reduced");
    z.mul(num, z.inv(den).expect("p-integral"))
}
