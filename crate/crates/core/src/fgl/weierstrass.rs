//! The formal group of a Weierstrass cubic
//! `y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6` in the parameter `z = -x/y`.

use crate::coeff::RingTower;
use crate::error::{Error, Result};
use crate::series::MPSeries;

/// Discriminant of the cubic over Z.
pub fn discriminant(a: [i64; 5]) -> i128 {
    let [a1, a2, a3, a4, a6] = a.map(i128::from);
    let b2 = a1 * a1 + 4 * a2;
    let b4 = 2 * a4 + a1 * a3;
    let b6 = a3 * a3 + 4 * a6;
    let b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4;
    -b2 * b2 * b8 - 8 * b4 * b4 * b4 - 27 * b6 * b6 + 9 * b2 * b4 * b6
}

/// `w(z) = z^3 (1 + ...)`, the fixed point of
/// `w = z^3 + a1 z w + a2 z^2 w + a3 w^2 + a4 z w^2 + a6 w^3`.
fn w_series(ring: &RingTower, a: [i64; 5], cap: usize) -> Result<MPSeries> {
    let [a1, a2, a3, a4, a6] = a.map(|c| ring.from_int(c));
    let z = MPSeries::var(ring, 1, 0);
    let z2 = z.mul(&z)?;
    let z3 = z2.mul(&z)?.at_cap(cap)?;
    let mut w = z3.clone();
    // Each pass fixes at least one more coefficient.
    for _ in 0..cap {
        let w2 = w.mul(&w)?;
        let w3 = w2.mul(&w)?;
        let next = z3
            .add(&z.mul(&w)?.scale(&a1)?)?
            .add(&z2.mul(&w)?.scale(&a2)?)?
            .add(&w2.scale(&a3)?)?
            .add(&z.mul(&w2)?.scale(&a4)?)?
            .add(&w3.scale(&a6)?)?;
        if next == w {
            break;
        }
        w = next;
    }
    Ok(w)
}

/// The formal group law of the curve, to total degree `cap`.
pub(crate) fn weierstrass_law(ring: &RingTower, a: [i64; 5], cap: usize) -> Result<MPSeries> {
    if discriminant(a).rem_euclid(ring.p() as i128) == 0 {
        return Err(Error::SingularCurve);
    }
    let w = w_series(ring, a, cap + 1)?;
    let [a1, a2, a3, a4, a6] = a.map(|c| ring.from_int(c));
    let x = MPSeries::var(ring, 2, 0);
    let y = MPSeries::var(ring, 2, 1);
    // lambda = (w(z2) - w(z1)) / (z2 - z1) = sum_n A_n sum_i z1^i z2^(n-1-i)
    let mut lambda = MPSeries::zero(ring, 2, cap);
    for n in 3..=cap + 1 {
        let c = w.coeff1(n);
        if c.is_zero() {
            continue;
        }
        for i in 0..n {
            let e = [i as u16, (n - 1 - i) as u16];
            let cur = lambda.coeff(&e);
            lambda.set_coeff(&e, &cur.add(&c)?);
        }
    }
    let w1 = w.truncate(cap).substitute(std::slice::from_ref(&x))?;
    let nu = w1.sub(&lambda.mul(&x)?)?;
    let l2 = lambda.mul(&lambda)?;
    let l3 = l2.mul(&lambda)?;
    // Vieta on w = lambda z + nu: z1 + z2 + z3 = -(z^2 coefficient) / (z^3 coefficient).
    let num = lambda
        .scale(&a1)?
        .add(&l2.scale(&a3)?)?
        .add(&nu.scale(&a2)?)?
        .add(&lambda.mul(&nu)?.scale(&a4.scale_int(2))?)?
        .add(&l2.mul(&nu)?.scale(&a6.scale_int(3))?)?;
    let den = MPSeries::one(ring, 2).add(&lambda.scale(&a2)?)?.add(&l2.scale(&a4)?)?.add(&l3.scale(&a6)?)?;
    let z3 = num.mul(&den.unit_invert(Some(cap))?)?.neg().sub(&x)?.sub(&y)?;
    // inverse point: i(z) = z / (a1 z + a3 w(z) - 1)
    let z = MPSeries::var(ring, 1, 0);
    let denom = z.scale(&a1)?.add(&w.truncate(cap).scale(&a3)?)?.sub(&MPSeries::one(ring, 1))?;
    let inv = z.mul(&denom.unit_invert(Some(cap))?)?;
    inv.substitute(std::slice::from_ref(&z3))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn discriminant_of_supersingular_curve() {
        // y^2 + y = x^3
        assert_eq!(discriminant([0, 0, 1, 0, 0]), -27);
        assert_eq!(discriminant([0, 0, 0, -1, 0]), 64);
    }

    #[test]
    fn w_starts_with_cube() {
        let r = RingTower::base(5, 2).unwrap();
        let w = w_series(&r, [1, 0, 0, 0, 0], 6).unwrap();
        // w = z^3 + a1 z^4 + (a1^2 + a2) z^5 + ...
        assert!(w.coeff1(3).is_one());
        assert!(w.coeff1(4).is_one());
        assert!(w.coeff1(5).is_one());
    }
}
