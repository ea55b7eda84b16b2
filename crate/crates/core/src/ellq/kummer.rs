//! Frobenius modulo 4 for curves with full rational 2-torsion.
//!
//! For `y^2 = (x - e1)(x - e2)(x - e3)` choose `Q1, Q2` with `2Q1 = (e1, 0)`, `2Q2 = (e2, 0)`.
//! Then `Frob_p(Qj) - Qj` lies in `E[2]` and is read off from Legendre symbols of
//! `A = e1 - e2`, `B = e1 - e3`, `C = e2 - e3` through the Weil pairing. The resulting matrix
//! in `GL_2(Z/4)` does not depend on which halves were chosen.

use crate::arith::jacobi;
use crate::error::{Error, Result};
use crate::modmat::ResidueMatrix;

fn flip(x: i128, p: u64) -> i64 {
    (jacobi(x, p as u128) == -1) as i64
}

/// Matrix of `Frob_p` on `E[4]` in the basis `(Q1, Q2)`, columns being images.
pub fn frobenius_mod4(roots: (i128, i128, i128), p: u64) -> Result<ResidueMatrix> {
    let (e1, e2, e3) = roots;
    let (a, b, c) = (e1 - e2, e1 - e3, e2 - e3);
    if p % 2 == 0 || (a * b * c) % p as i128 == 0 {
        return Err(Error::Domain(format!("p = {p} divides 2ABC")));
    }
    let u1 = flip(a, p);
    let u2 = flip(a * b, p);
    let v1 = flip(-a * c, p);
    let v2 = flip(-a, p);
    Ok(ResidueMatrix::new(4, [1 + 2 * u1, 2 * v1, 2 * u2, 1 + 2 * v2]))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `F_p[t]/(t^2 - n)` with n a non-residue.
    #[derive(Clone, Copy, PartialEq, Eq, Debug)]
    struct F2 {
        a: i64,
        b: i64,
    }

    struct Field {
        p: i64,
        n: i64,
    }

    impl Field {
        fn new(p: i64) -> Field {
            let n = (2..p).find(|&n| jacobi(n as i128, p as u128) == -1).unwrap();
            Field { p, n }
        }
        fn c(&self, a: i64) -> F2 {
            F2 { a: a.rem_euclid(self.p), b: 0 }
        }
        fn add(&self, x: F2, y: F2) -> F2 {
            F2 { a: (x.a + y.a) % self.p, b: (x.b + y.b) % self.p }
        }
        fn neg(&self, x: F2) -> F2 {
            F2 { a: (self.p - x.a) % self.p, b: (self.p - x.b) % self.p }
        }
        fn sub(&self, x: F2, y: F2) -> F2 {
            self.add(x, self.neg(y))
        }
        fn mul(&self, x: F2, y: F2) -> F2 {
            let p = self.p;
            F2 { a: (x.a * y.a + self.n * (x.b * y.b % p)) % p, b: (x.a * y.b + x.b * y.a) % p }
        }
        fn pow(&self, mut x: F2, mut k: u64) -> F2 {
            let mut r = self.c(1);
            while k > 0 {
                if k & 1 == 1 {
                    r = self.mul(r, x);
                }
                x = self.mul(x, x);
                k >>= 1;
            }
            r
        }
        fn inv(&self, x: F2) -> F2 {
            self.pow(x, (self.p * self.p - 2) as u64)
        }
        fn all(&self) -> impl Iterator<Item = F2> + '_ {
            (0..self.p).flat_map(move |a| (0..self.p).map(move |b| F2 { a, b }))
        }
        fn sqrt(&self, x: F2) -> Option<F2> {
            self.all().find(|&y| self.mul(y, y) == x)
        }
    }

    type P = Option<(F2, F2)>;

    fn add(f: &Field, a: F2, s: P, t: P) -> P {
        let ((x1, y1), (x2, y2)) = match (s, t) {
            (None, q) | (q, None) => return q,
            (Some(u), Some(v)) => (u, v),
        };
        let lam = if x1 == x2 {
            if f.add(y1, y2) == f.c(0) {
                return None;
            }
            let num = f.add(f.mul(f.c(3), f.mul(x1, x1)), a);
            f.mul(num, f.inv(f.mul(f.c(2), y1)))
        } else {
            f.mul(f.sub(y2, y1), f.inv(f.sub(x2, x1)))
        };
        let x3 = f.sub(f.sub(f.mul(lam, lam), x1), x2);
        let y3 = f.sub(f.mul(lam, f.sub(x1, x3)), y1);
        Some((x3, y3))
    }

    /// A point Q over `F_{p^2}` with `2Q = (e, 0)` on `y^2 = x^3 + a x + b`.
    fn half(f: &Field, a: F2, b: F2, e: i64) -> (F2, F2) {
        for x in f.all() {
            let rhs = f.add(f.add(f.mul(f.mul(x, x), x), f.mul(a, x)), b);
            if let Some(y) = f.sqrt(rhs) {
                if y == f.c(0) {
                    continue;
                }
                if add(f, a, Some((x, y)), Some((x, y))) == Some((f.c(e), f.c(0))) {
                    return (x, y);
                }
            }
        }
        panic!("no half of ({e}, 0) over F_p^2");
    }

    #[test]
    fn agrees_with_explicit_frobenius() {
        for roots in [(-37i64, 11, 26), (-61, -118, 179), (26, -37, 11)] {
            let (e1, e2, e3) = roots;
            let abc = (e1 - e2) * (e1 - e3) * (e2 - e3);
            for p in crate::arith::primes_up_to(40).into_iter().filter(|&p| p > 3 && abc % p as i64 != 0) {
                let f = Field::new(p as i64);
                let a = f.c(e1 * e2 + e1 * e3 + e2 * e3);
                let b = f.c(-e1 * e2 * e3);
                let q1 = half(&f, a, b, e1);
                let q2 = half(&f, a, b, e2);
                let frob = |q: (F2, F2)| (f.pow(q.0, p), f.pow(q.1, p));
                let t1 = Some((f.c(e1), f.c(0)));
                let t2 = Some((f.c(e2), f.c(0)));
                let coords = |d: P| -> (i64, i64) {
                    for (i, j) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
                        let mut s = None;
                        if i == 1 {
                            s = add(&f, a, s, t1);
                        }
                        if j == 1 {
                            s = add(&f, a, s, t2);
                        }
                        if s == d {
                            return (i, j);
                        }
                    }
                    panic!("difference not 2-torsion");
                };
                let neg = |q: (F2, F2)| Some((q.0, f.neg(q.1)));
                let d1 = coords(add(&f, a, Some(frob(q1)), neg(q1)));
                let d2 = coords(add(&f, a, Some(frob(q2)), neg(q2)));
                let expected = ResidueMatrix::new(4, [1 + 2 * d1.0, 2 * d2.0, 2 * d1.1, 1 + 2 * d2.1]);
                let r = (e1 as i128, e2 as i128, e3 as i128);
                assert_eq!(frobenius_mod4(r, p).unwrap(), expected, "roots {roots:?}, p = {p}");
            }
        }
    }

    #[test]
    fn determinant_is_p() {
        for p in [13u64, 17, 19, 29, 41, 43] {
            let m = frobenius_mod4((-37, 11, 26), p).unwrap();
            assert_eq!(m.det() as u64, p % 4);
        }
        assert!(frobenius_mod4((-37, 11, 26), 3).is_err());
    }
}
