//! Values checked against independent computations done here in plain
//! integer or rational arithmetic.

use fglab_core::isogeny::{norm_function, quotient_fgl};
use fglab_core::level::level_ring;
use fglab_core::theta::{rnorm, rnorm_input_cap, theta_of_coordinate, theta_of_function};
use fglab_core::*;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

fn mult(p: u64, n: u32) -> FormalGroupLaw {
    FormalGroupLaw::standard(&LawKind::Multiplicative, &RingTower::base(p, n).unwrap(), 0).unwrap()
}

fn binom(n: i64, k: i64) -> i64 {
    (0..k).fold(1i64, |acc, i| acc * (n - i) / (i + 1))
}

#[test]
fn eisenstein_reduction() {
    // In Z/9[x]/(x^2 - 3x + 3), x^2 = 3x - 3.
    let z = RingTower::base(3, 2).unwrap();
    let poly = [z.from_int(3), z.from_int(-3), z.one()];
    let r = z.extend(&poly, ExtensionKind::Ramified).unwrap();
    let x = r.generator().unwrap();
    let expected = x.scale_int(3).sub(&r.from_int(3)).unwrap();
    assert_eq!(x.mul(&x).unwrap(), expected);
    // x^4 = (3x - 3)^2 = 9x^2 - 18x + 9 = 0 mod 9.
    assert!(x.pow(4).is_zero());
}

#[test]
fn reversion_matches_catalan() {
    // The inverse of t + t^2 has coefficients (-1)^(n-1) C_(n-1).
    let r = RingTower::base(3, 6).unwrap();
    let f = MPSeries::univariate(&r, &[r.zero(), r.one(), r.one()], true);
    let g = f.reversion(Some(8)).unwrap();
    for n in 1..=8i64 {
        let catalan = binom(2 * (n - 1), n - 1) / n;
        let sign = if n % 2 == 1 { 1 } else { -1 };
        assert_eq!(g.coeff1(n as usize), r.from_int(sign * catalan), "degree {n}");
    }
}

#[test]
fn multiplicative_n_series_is_binomial() {
    // [n](t) = 1 - (1 - t)^n, and [-1](t) = -t / (1 - t).
    let g = mult(3, 6);
    let r = g.ring().clone();
    for n in 1..=6i64 {
        let s = g.n_series(n, 10).unwrap();
        for k in 0..=10i64 {
            let c = if k == 0 { 0 } else { -binom(n, k) * (-1i64).pow(k as u32) };
            assert_eq!(s.coeff1(k as usize), r.from_int(c), "[{n}] degree {k}");
        }
    }
    let inv = g.n_series(-1, 10).unwrap();
    for k in 1..=10 {
        assert_eq!(inv.coeff1(k), r.from_int(-1));
    }
}

type Poly = Vec<BigRational>;

fn rmul(a: &Poly, b: &Poly, cap: usize) -> Poly {
    let mut out = vec![BigRational::zero(); cap + 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate().take(cap + 1 - i) {
            out[i + j] += x * y;
        }
    }
    out
}

/// `sum c_k f^k` for univariate coefficients `c` and any truncated `f`.
fn rcompose(c: &Poly, f: &[Vec<BigRational>], cap: usize) -> Vec<Vec<BigRational>> {
    let mul2 = |a: &Vec<Vec<BigRational>>, b: &Vec<Vec<BigRational>>| {
        let mut out = vec![vec![BigRational::zero(); cap + 1]; cap + 1];
        for i in 0..=cap {
            for j in 0..=cap - i {
                if a[i][j].is_zero() {
                    continue;
                }
                for k in 0..=cap - i - j {
                    for l in 0..=cap - i - j - k {
                        out[i + k][j + l] += &a[i][j] * &b[k][l];
                    }
                }
            }
        }
        out
    };
    let mut acc = vec![vec![BigRational::zero(); cap + 1]; cap + 1];
    let mut pw = vec![vec![BigRational::zero(); cap + 1]; cap + 1];
    pw[0][0] = BigRational::one();
    let f = f.to_vec();
    for ck in c.iter().take(cap + 1) {
        for i in 0..=cap {
            for j in 0..=cap - i {
                acc[i][j] += ck * &pw[i][j];
            }
        }
        pw = mul2(&pw, &f);
    }
    acc
}

#[test]
fn honda_height_one_matches_exp_of_log_sum() {
    // F(x, y) = exp(log x + log y) with log t = t + t^2/2 + t^4/4 + t^8/8.
    let cap = 8;
    let mut log = vec![BigRational::zero(); cap + 1];
    let mut d = 1;
    while d <= cap {
        log[d] = BigRational::new(BigInt::one(), BigInt::from(d));
        d *= 2;
    }
    // exp by the naive fixed point e <- t - (log(e) - e).
    let mut e = vec![BigRational::zero(); cap + 1];
    e[1] = BigRational::one();
    for _ in 0..cap {
        let mut le = vec![BigRational::zero(); cap + 1];
        let mut pw = vec![BigRational::zero(); cap + 1];
        pw[0] = BigRational::one();
        for c in &log {
            for k in 0..=cap {
                le[k] += c * &pw[k];
            }
            pw = rmul(&pw, &e, cap);
        }
        for k in 0..=cap {
            let t = if k == 1 { BigRational::one() } else { BigRational::zero() };
            e[k] = &t - (&le[k] - &e[k]);
        }
    }
    let mut s = vec![vec![BigRational::zero(); cap + 1]; cap + 1];
    for (k, c) in log.iter().enumerate() {
        s[k][0] += c;
        s[0][k] += c;
    }
    let oracle = rcompose(&e, &s, cap);
    let g = FormalGroupLaw::standard(&LawKind::Honda { height: 1 }, &RingTower::base(2, 8).unwrap(), cap).unwrap();
    let r = g.ring().clone();
    for (i, row) in oracle.iter().enumerate() {
        for (j, c) in row.iter().enumerate().take(cap + 1 - i) {
            assert!(c.denom().is_positive() && (c.denom() % 2u32).is_one() || c.is_zero());
            let q = BigInt::from(256);
            let num = ((c.numer() % &q) + &q) % &q;
            let den = ((c.denom() % &q) + &q) % &q;
            let want = r
                .from_int(i64::try_from(num).unwrap())
                .mul(&r.from_int(i64::try_from(den).unwrap()).inverse().unwrap())
                .unwrap();
            assert_eq!(g.law().coeff(&[i as u16, j as u16]), want, "x^{i} y^{j}");
        }
    }
}

#[test]
fn elliptic_law_adds_collinear_points() {
    // For y^2 + y = x^3 in z = -x/y, w = -1/y: w = z^3 + w^2, the inverse is
    // z / (w(z) - 1), and P1, P2, -(P1 + P2) lie on a line in the (z, w) plane.
    let cap = 9;
    let ring = RingTower::base(2, 6).unwrap();
    let mut w = vec![0i64; cap + 1];
    for _ in 0..cap {
        let mut next = vec![0i64; cap + 1];
        next[3] = 1;
        for i in 0..=cap {
            for j in 0..=cap - i {
                next[i + j] += w[i] * w[j];
            }
        }
        w = next;
    }
    let to_series = |c: &[i64]| {
        let coeffs: Vec<RingElem> = c.iter().map(|&x| ring.from_int(x)).collect();
        MPSeries::univariate(&ring, &coeffs, true).at_cap(cap).unwrap()
    };
    let ws = to_series(&w);
    let z = MPSeries::var(&ring, 1, 0);
    let inverse = z.mul(&ws.sub(&MPSeries::one(&ring, 1)).unwrap().unit_invert(Some(cap)).unwrap()).unwrap();
    let g = FormalGroupLaw::standard(&LawKind::Weierstrass { a: [0, 0, 1, 0, 0] }, &ring, cap).unwrap();
    let t1 = MPSeries::var(&ring, 2, 0);
    let t2 = MPSeries::var(&ring, 2, 1);
    let t3 = inverse.substitute(std::slice::from_ref(g.law())).unwrap();
    let w_of = |t: &MPSeries| ws.substitute(std::slice::from_ref(t)).unwrap();
    let (w1, w2, w3) = (w_of(&t1), w_of(&t2), w_of(&t3));
    let det = t1
        .mul(&w2.sub(&w3).unwrap())
        .unwrap()
        .sub(&w1.mul(&t2.sub(&t3).unwrap()).unwrap())
        .unwrap()
        .add(&t2.mul(&w3).unwrap().sub(&t3.mul(&w2).unwrap()).unwrap())
        .unwrap();
    assert!(det.truncate(cap).is_zero(), "{det:?}");
    // Frozen low-degree terms of the law, confirmed by the check above.
    assert_eq!(
        g.law().truncate(7).to_text(),
        "1 * x1 + 1 * x2 + -2 * x1^3 x2 + -3 * x1^2 x2^2 + -2 * x1 x2^3 + -2 * x1^6 x2 + 4 * x1^4 x2^3 \
         + 4 * x1^3 x2^4 + -2 * x1 x2^6"
    );
    let p2 = g.p_series(cap).unwrap();
    assert_eq!(p2.wdeg().unwrap(), 4);
}

#[test]
fn norm_of_one_plus_x_across_two_isogeny() {
    // On the multiplicative law over Z/2^8 the kernel point is 2, x +_F 2 = 2 - x,
    // so N(1 + x) pulls back to (1 + x)(3 - x) = 3 + (2x - x^2).
    let g = mult(2, 8);
    let level = level_ring(&"Z/2".parse().unwrap(), &g).unwrap();
    assert_eq!(level.point(&[1]).to_text(), "2");
    let q = quotient_fgl(&level, 8).unwrap();
    let r = q.ring().clone();
    let one_plus_x = MPSeries::univariate(&r, &[r.one(), r.one()], true);
    let n = norm_function(&one_plus_x.at_cap(rnorm_input_cap(&q, 6).unwrap()).unwrap(), &q, 6).unwrap();
    assert_eq!(n.to_text(), "3 + 1 * x1");
}

#[test]
fn theta_two_of_perturbed_coordinate_closed_form() {
    // g = 1 + x on x + y - xy: g(a +_F b) g(0) / (g(a) g(b)) = (1 + a + b - ab) / ((1 + a)(1 + b))
    // = 1 - 2 sum_{i, j >= 1} (-1)^(i + j) a^i b^j.
    let g = mult(2, 8);
    let r = g.ring().clone();
    let s = MPSeries::univariate(&r, &[r.zero(), r.one(), r.one()], true);
    let cap = 8;
    let t = theta_of_coordinate(&g, &s, 2, cap).unwrap();
    for i in 0..=cap {
        for j in 0..=cap - i {
            let want = match (i, j) {
                (0, 0) => 1,
                (0, _) | (_, 0) => 0,
                _ => -2 * (-1i64).pow((i + j) as u32),
            };
            assert_eq!(t.u.coeff(&[i as u16, j as u16]), r.from_int(want), "a^{i} b^{j}");
        }
    }
}

#[test]
fn reduced_norm_of_theta_is_theta_of_norm() {
    // N(Theta^k(x g)) computed by descending the translate product, against
    // Theta^k of the descended norm of g on the target law.
    let g = mult(3, 4);
    let level = level_ring(&"Z/3".parse().unwrap(), &g).unwrap();
    let q = quotient_fgl(&level, 8).unwrap();
    let r = q.ring().clone();
    let cap = 5;
    let inc = rnorm_input_cap(&q, cap).unwrap();
    let unit = MPSeries::univariate(&r, &[r.one(), r.zero(), r.one()], true);
    let s = MPSeries::univariate(&r, &[r.zero(), r.one(), r.zero(), r.one()], true);
    let ng = norm_function(&unit.at_cap(inc).unwrap(), &q, cap).unwrap();
    for k in 1..=2 {
        let t = theta_of_coordinate(&q.source, &s, k, inc).unwrap();
        let lhs = rnorm(&t, &q, cap).unwrap();
        let rhs = theta_of_function(&q.target, &ng, k, cap).unwrap();
        assert_eq!(lhs.u.truncate(cap).first_difference(&rhs).unwrap(), None, "k = {k}");
    }
}
