//! Linear algebra over the chain ring Z/p^N.
//!
//! Every ideal of Z/p^N is generated by a power of p, so row reduction with
//! minimal-valuation pivots plus annihilator rows yields a Howell form, which
//! answers span membership, kernel and solvability questions exactly.

/// Arithmetic in Z/p^N for a fixed prime power.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Zpn {
    pub p: u64,
    pub n: u32,
    pub q: u64,
}

impl Zpn {
    pub fn new(p: u64, n: u32) -> Self {
        Zpn { p, n, q: p.pow(n) }
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.q {
            s - self.q
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.q - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.q - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        a * b % self.q
    }

    /// p-adic valuation, with `val(0) = N`.
    pub fn val(&self, mut a: u64) -> u32 {
        if a == 0 {
            return self.n;
        }
        let mut v = 0;
        while a.is_multiple_of(self.p) {
            a /= self.p;
            v += 1;
        }
        v
    }

    /// Inverse of a unit of Z/p^N.
    pub fn inv(&self, a: u64) -> Option<u64> {
        let (mut r0, mut r1) = (self.q as i128, (a % self.q) as i128);
        let (mut t0, mut t1) = (0i128, 1i128);
        while r1 != 0 {
            let k = r0 / r1;
            (r0, r1) = (r1, r0 - k * r1);
            (t0, t1) = (t1, t0 - k * t1);
        }
        if r0 != 1 {
            return None;
        }
        Some(t0.rem_euclid(self.q as i128) as u64)
    }

    pub fn from_i64(&self, a: i64) -> u64 {
        a.rem_euclid(self.q as i64) as u64
    }

    /// Symmetric representative in (-q/2, q/2].
    pub fn signed(&self, a: u64) -> i64 {
        if a > self.q / 2 {
            a as i64 - self.q as i64
        } else {
            a as i64
        }
    }

    fn axpy(&self, y: &mut [u64], c: u64, x: &[u64]) {
        if c == 0 {
            return;
        }
        for (yi, &xi) in y.iter_mut().zip(x) {
            if xi != 0 {
                *yi = (*yi + c * xi) % self.q;
            }
        }
    }

    fn scale(&self, x: &mut [u64], c: u64) {
        for xi in x.iter_mut() {
            *xi = *xi * c % self.q;
        }
    }
}

/// A row in Howell form: the pivot column and the row itself, whose pivot
/// entry is `p^v`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HowellRow {
    pub pivot: usize,
    pub row: Vec<u64>,
}

/// Howell form of the row span of `rows`.
pub fn howell_form(z: &Zpn, rows: &[Vec<u64>], ncols: usize) -> Vec<HowellRow> {
    let mut pool: Vec<Vec<u64>> = rows.iter().filter(|r| r.iter().any(|&x| x != 0)).cloned().collect();
    let mut out: Vec<HowellRow> = Vec::new();
    for col in 0..ncols {
        let mut best: Option<(usize, u32)> = None;
        for (i, r) in pool.iter().enumerate() {
            let v = z.val(r[col]);
            if v < z.n && best.is_none_or(|(_, bv)| v < bv) {
                best = Some((i, v));
                if v == 0 {
                    break;
                }
            }
        }
        let Some((bi, v)) = best else { continue };
        let mut piv = pool.swap_remove(bi);
        let pv = z.p.pow(v);
        let unit = z.inv(piv[col] / pv).expect("unit part");
        z.scale(&mut piv, unit);
        for r in pool.iter_mut() {
            if r[col] != 0 {
                let c = z.neg(r[col] / pv);
                z.axpy(r, c, &piv);
            }
        }
        pool.retain(|r| r.iter().any(|&x| x != 0));
        if v > 0 {
            let mut ann = piv.clone();
            z.scale(&mut ann, z.p.pow(z.n - v));
            if ann.iter().any(|&x| x != 0) {
                pool.push(ann);
            }
        }
        out.push(HowellRow { pivot: col, row: piv });
    }
    // Back-reduce entries above each pivot into [0, p^v).
    for i in 0..out.len() {
        let (col, pv) = (out[i].pivot, out[i].row[out[i].pivot]);
        let piv = out[i].row.clone();
        for row in out.iter_mut().take(i) {
            let c = row.row[col] / pv;
            if c != 0 {
                z.axpy(&mut row.row, z.neg(c), &piv);
            }
        }
    }
    out
}

/// Reduces `v` against a Howell form; returns the residual (zero iff `v`
/// lies in the span).
pub fn reduce(z: &Zpn, form: &[HowellRow], v: &[u64]) -> Vec<u64> {
    let mut r = v.to_vec();
    for h in form {
        let e = r[h.pivot];
        if e == 0 {
            continue;
        }
        let pv = h.row[h.pivot];
        if !e.is_multiple_of(pv) {
            continue;
        }
        z.axpy(&mut r, z.neg(e / pv), &h.row);
    }
    r
}

pub fn in_span(z: &Zpn, form: &[HowellRow], v: &[u64]) -> bool {
    reduce(z, form, v).iter().all(|&x| x == 0)
}

/// Generators of `{ x : M x = 0 }` for an `m x n` matrix given by rows.
pub fn kernel(z: &Zpn, m: &[Vec<u64>], ncols: usize) -> Vec<Vec<u64>> {
    let nrows = m.len();
    let aug: Vec<Vec<u64>> = (0..ncols)
        .map(|j| {
            let mut r = vec![0; nrows + ncols];
            for i in 0..nrows {
                r[i] = m[i][j];
            }
            r[nrows + j] = 1;
            r
        })
        .collect();
    howell_form(z, &aug, nrows + ncols)
        .into_iter()
        .filter(|h| h.pivot >= nrows)
        .map(|h| h.row[nrows..].to_vec())
        .collect()
}

/// Some solution of `M x = b`, if one exists.
pub fn solve(z: &Zpn, m: &[Vec<u64>], ncols: usize, b: &[u64]) -> Option<Vec<u64>> {
    let nrows = m.len();
    let aug: Vec<Vec<u64>> = (0..ncols)
        .map(|j| {
            let mut r = vec![0; nrows + ncols];
            for i in 0..nrows {
                r[i] = m[i][j];
            }
            r[nrows + j] = 1;
            r
        })
        .collect();
    let form = howell_form(z, &aug, nrows + ncols);
    let mut target = vec![0; nrows + ncols];
    target[..nrows].copy_from_slice(b);
    let res = reduce(z, &form, &target);
    if res[..nrows].iter().any(|&x| x != 0) {
        return None;
    }
    Some(res[nrows..].iter().map(|&x| z.neg(x)).collect())
}

/// Valuations of the elementary divisors of a matrix, `min(rows, cols)` of
/// them, ascending; a zero divisor is reported as `N`.
pub fn smith_valuations(z: &Zpn, m: &[Vec<u64>], ncols: usize) -> Vec<u32> {
    let mut a: Vec<Vec<u64>> = m.to_vec();
    let nrows = a.len();
    let k = nrows.min(ncols);
    let mut vals = Vec::with_capacity(k);
    for t in 0..k {
        let mut best: Option<(usize, usize, u32)> = None;
        'scan: for (i, row) in a.iter().enumerate().skip(t) {
            for (j, &x) in row.iter().enumerate().skip(t) {
                let v = z.val(x);
                if v < z.n && best.is_none_or(|(_, _, bv)| v < bv) {
                    best = Some((i, j, v));
                    if v == 0 {
                        break 'scan;
                    }
                }
            }
        }
        let Some((bi, bj, v)) = best else {
            vals.extend(std::iter::repeat_n(z.n, k - t));
            break;
        };
        a.swap(t, bi);
        for row in a.iter_mut() {
            row.swap(t, bj);
        }
        let pv = z.p.pow(v);
        let unit = z.inv(a[t][t] / pv).expect("unit part");
        let piv = {
            let mut r = a[t].clone();
            z.scale(&mut r, unit);
            r
        };
        a[t] = piv.clone();
        for row in a.iter_mut().skip(t + 1) {
            if row[t] != 0 {
                let c = z.neg(row[t] / pv);
                z.axpy(row, c, &piv);
            }
        }
        // Column elimination only touches row t once the column below is clear.
        a[t][t + 1..ncols].fill(0);
        vals.push(v);
    }
    vals
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matmul(z: &Zpn, m: &[Vec<u64>], x: &[u64]) -> Vec<u64> {
        m.iter().map(|r| r.iter().zip(x).fold(0, |acc, (&a, &b)| z.add(acc, z.mul(a, b)))).collect()
    }

    #[test]
    fn inverse_mod_prime_power() {
        let z = Zpn::new(3, 4);
        for a in 1..81u64 {
            match z.inv(a) {
                Some(b) => assert_eq!(a * b % 81, 1),
                None => assert_eq!(a % 3, 0),
            }
        }
    }

    #[test]
    fn kernel_of_scalar_two_mod_eight() {
        let z = Zpn::new(2, 3);
        let k = kernel(&z, &[vec![2]], 1);
        assert_eq!(k, vec![vec![4]]);
    }

    #[test]
    fn howell_captures_annihilator_rows() {
        // Span of (2, 1) over Z/4 contains 2*(2,1) = (0, 2).
        let z = Zpn::new(2, 2);
        let form = howell_form(&z, &[vec![2, 1]], 2);
        assert!(in_span(&z, &form, &[0, 2]));
        assert!(!in_span(&z, &form, &[0, 1]));
    }

    #[test]
    fn solve_finds_preimage() {
        let z = Zpn::new(5, 2);
        let m = vec![vec![5, 1, 0], vec![0, 10, 3]];
        let b = matmul(&z, &m, &[7, 3, 11]);
        let x = solve(&z, &m, 3, &b).unwrap();
        assert_eq!(matmul(&z, &m, &x), b);
        assert!(solve(&z, &[vec![5]], 1, &[1]).is_none());
    }

    #[test]
    fn smith_of_diagonalish() {
        let z = Zpn::new(2, 4);
        let v = smith_valuations(&z, &[vec![4, 0], vec![0, 2]], 2);
        assert_eq!(v, vec![1, 2]);
        let v = smith_valuations(&z, &[vec![2, 4], vec![1, 2]], 2);
        assert_eq!(v, vec![0, 4]);
    }
}
