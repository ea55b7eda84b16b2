//! 2x2 matrices over Z/N, stored row-major as `[a, b, c, d]` for `(a b; c d)`.

use std::fmt;

use crate::arith::{self, factor_u64, inv_mod};
use crate::error::{Error, Result};

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ResidueMatrix {
    modulus: u32,
    e: [u32; 4],
}

/// Trace and determinant of a matrix; its characteristic polynomial is x^2 - t x + d.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CharPoly {
    pub modulus: u32,
    pub trace: u32,
    pub det: u32,
}

impl CharPoly {
    pub fn reduce(&self, m: u32) -> CharPoly {
        assert!(self.modulus % m == 0, "reduction to a non-divisor");
        CharPoly { modulus: m, trace: self.trace % m, det: self.det % m }
    }
}

#[inline]
fn red(x: i64, n: u32) -> u32 {
    x.rem_euclid(n as i64) as u32
}

impl ResidueMatrix {
    pub fn new(modulus: u32, entries: [i64; 4]) -> Self {
        assert!(modulus >= 1, "modulus must be positive");
        let e = entries.map(|x| red(x, modulus));
        ResidueMatrix { modulus, e }
    }

    pub fn identity(modulus: u32) -> Self {
        ResidueMatrix::new(modulus, [1, 0, 0, 1])
    }

    pub fn scalar(modulus: u32, s: i64) -> Self {
        ResidueMatrix::new(modulus, [s, 0, 0, s])
    }

    #[inline]
    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    #[inline]
    pub fn entries(&self) -> [u32; 4] {
        self.e
    }

    pub fn is_identity(&self) -> bool {
        self.modulus == 1 || self.e == [1, 0, 0, 1]
    }

    pub fn mul(&self, other: &ResidueMatrix) -> Result<ResidueMatrix> {
        if self.modulus != other.modulus {
            return Err(Error::ModulusMismatch(self.modulus, other.modulus));
        }
        Ok(self.mul_same(other))
    }

    /// Product of two matrices known to share a modulus.
    #[inline]
    pub fn mul_same(&self, o: &ResidueMatrix) -> ResidueMatrix {
        debug_assert_eq!(self.modulus, o.modulus);
        let n = self.modulus as u64;
        let [a, b, c, d] = self.e.map(|x| x as u64);
        let [p, q, r, s] = o.e.map(|x| x as u64);
        let f = |x: u64, y: u64, z: u64, w: u64| (((x * y) % n + (z * w) % n) % n) as u32;
        ResidueMatrix {
            modulus: self.modulus,
            e: [f(a, p, b, r), f(a, q, b, s), f(c, p, d, r), f(c, q, d, s)],
        }
    }

    pub fn det(&self) -> u32 {
        let n = self.modulus as u64;
        let [a, b, c, d] = self.e.map(|x| x as u64);
        ((a * d % n + n - b * c % n) % n) as u32
    }

    pub fn trace(&self) -> u32 {
        ((self.e[0] as u64 + self.e[3] as u64) % self.modulus as u64) as u32
    }

    pub fn char_poly(&self) -> CharPoly {
        CharPoly { modulus: self.modulus, trace: self.trace(), det: self.det() }
    }

    pub fn is_invertible(&self) -> bool {
        arith::gcd(self.det() as u64, self.modulus as u64) == 1
    }

    pub fn inv(&self) -> Result<ResidueMatrix> {
        let n = self.modulus;
        let det = self.det();
        let di = inv_mod(det as i64, n as u64).ok_or(Error::NonUnit { det, modulus: n })? as u64;
        let [a, b, c, d] = self.e;
        let m = |x: u32| ((x as u64 * di) % n as u64) as i64;
        Ok(ResidueMatrix::new(n, [m(d), -m(b), -m(c), m(a)]))
    }

    pub fn pow(&self, mut k: u64) -> ResidueMatrix {
        let mut r = ResidueMatrix::identity(self.modulus);
        let mut b = *self;
        while k > 0 {
            if k & 1 == 1 {
                r = r.mul_same(&b);
            }
            b = b.mul_same(&b);
            k >>= 1;
        }
        r
    }

    /// Multiplicative order; the matrix must be invertible.
    pub fn order(&self) -> u64 {
        let mut x = *self;
        let mut k = 1;
        while !x.is_identity() {
            x = x.mul_same(self);
            k += 1;
        }
        k
    }

    pub fn transpose(&self) -> ResidueMatrix {
        let [a, b, c, d] = self.e;
        ResidueMatrix { modulus: self.modulus, e: [a, c, b, d] }
    }

    /// `g * self * g^-1`.
    pub fn conjugate_by(&self, g: &ResidueMatrix) -> ResidueMatrix {
        g.mul_same(self).mul_same(&g.inv().expect("conjugator must be invertible"))
    }

    pub fn reduce(&self, m: u32) -> Result<ResidueMatrix> {
        if m == 0 || self.modulus % m != 0 {
            return Err(Error::Domain(format!("{m} does not divide {}", self.modulus)));
        }
        Ok(ResidueMatrix { modulus: m, e: self.e.map(|x| x % m) })
    }

    /// Same residues read modulo a multiple `big` of the current modulus.
    pub fn lift(&self, big: u32) -> ResidueMatrix {
        assert!(big % self.modulus == 0);
        ResidueMatrix { modulus: big, e: self.e }
    }

    /// Components modulo each prime power of the modulus, primes ascending.
    pub fn crt_split(&self) -> Vec<ResidueMatrix> {
        prime_power_factors(self.modulus)
            .into_iter()
            .map(|q| self.reduce(q).expect("prime power divides modulus"))
            .collect()
    }

    /// Recombine matrices with pairwise coprime moduli.
    pub fn crt_join(parts: &[ResidueMatrix]) -> Result<ResidueMatrix> {
        let mut acc = ResidueMatrix::identity(1);
        for p in parts {
            let (m1, m2) = (acc.modulus as u64, p.modulus as u64);
            if arith::gcd(m1, m2) != 1 {
                return Err(Error::Domain(format!("moduli {m1} and {m2} are not coprime")));
            }
            let n = m1 * m2;
            if n > u32::MAX as u64 {
                return Err(Error::ResourceCap(format!("modulus {n} exceeds 32 bits")));
            }
            // x = a + m1 * ((b - a) * m1^-1 mod m2)
            let inv = inv_mod(m1 as i64, m2).unwrap_or(0);
            let mut e = [0u32; 4];
            for i in 0..4 {
                let a = acc.e[i] as u64;
                let b = p.e[i] as u64;
                let t = ((b + m2 - a % m2) % m2) * inv % m2;
                e[i] = (a + m1 * t) as u32;
            }
            acc = ResidueMatrix { modulus: n as u32, e };
        }
        Ok(acc)
    }

    /// Packed index in `[0, N^4)`; used as a compact set key for small moduli.
    #[inline]
    pub fn index(&self) -> u64 {
        let n = self.modulus as u64;
        debug_assert!(n <= 65_535);
        let [a, b, c, d] = self.e.map(|x| x as u64);
        ((a * n + b) * n + c) * n + d
    }

    #[inline]
    pub fn from_index(modulus: u32, mut idx: u64) -> ResidueMatrix {
        let n = modulus as u64;
        let mut e = [0u32; 4];
        for i in (0..4).rev() {
            e[i] = (idx % n) as u32;
            idx /= n;
        }
        ResidueMatrix { modulus, e }
    }

    /// Canonical key: modulus plus the four residues packed in reading order.
    pub fn key(&self) -> (u32, u128) {
        let [a, b, c, d] = self.e.map(|x| x as u128);
        (self.modulus, (a << 96) | (b << 64) | (c << 32) | d)
    }

    /// Parse `a,b,c,d` modulo `n`.
    pub fn parse(s: &str, n: u32) -> Result<ResidueMatrix> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 4 {
            return Err(Error::Parse(format!("expected four comma-separated entries in {s:?}")));
        }
        let mut e = [0i64; 4];
        for (slot, p) in e.iter_mut().zip(&parts) {
            *slot = p.parse().map_err(|_| Error::Parse(format!("bad matrix entry {p:?}")))?;
        }
        if n == 0 {
            return Err(Error::Parse("modulus must be positive".into()));
        }
        Ok(ResidueMatrix::new(n, e))
    }

    /// Parse a `;`-separated list of matrices.
    pub fn parse_list(s: &str, n: u32) -> Result<Vec<ResidueMatrix>> {
        s.split(';').filter(|t| !t.trim().is_empty()).map(|t| ResidueMatrix::parse(t, n)).collect()
    }
}

impl fmt::Display for ResidueMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, d] = self.e;
        write!(f, "{a},{b},{c},{d}")
    }
}

impl fmt::Debug for ResidueMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, d] = self.e;
        write!(f, "({a} {b}; {c} {d}) mod {}", self.modulus)
    }
}

pub fn format_list(ms: &[ResidueMatrix]) -> String {
    ms.iter().map(|m| m.to_string()).collect::<Vec<_>>().join(";")
}

/// Prime-power divisors `p^k || n`, primes ascending.
pub fn prime_power_factors(n: u32) -> Vec<u32> {
    factor_u64(n as u64).into_iter().map(|(p, e)| p.pow(e) as u32).collect()
}

/// `|GL_2(Z/N)| = N^4 * prod_{p | N} (1 - 1/p)(1 - 1/p^2)`.
pub fn gl2_order(n: u64) -> u128 {
    let mut r: u128 = 1;
    for (p, e) in factor_u64(n) {
        let p = p as u128;
        let q = p.pow(e);
        r *= q.pow(4) / (p * p * p * p) * (p * p - 1) * (p * p - p);
    }
    r
}

/// `|SL_2(Z/N)|`.
pub fn sl2_order(n: u64) -> u128 {
    gl2_order(n) / arith::euler_phi(n) as u128
}

fn unit_generators(q: u32) -> Vec<u32> {
    if q <= 2 {
        return vec![];
    }
    match arith::primitive_root(q as u64) {
        Some(g) => vec![g as u32],
        None => vec![q - 1, 5 % q],
    }
}

/// Generators of `GL_2(Z/q)` for a prime power `q`.
fn gl2_prime_power_generators(q: u32) -> Vec<ResidueMatrix> {
    let mut g = vec![ResidueMatrix::new(q, [1, 1, 0, 1]), ResidueMatrix::new(q, [0, -1, 1, 0])];
    for u in unit_generators(q) {
        g.push(ResidueMatrix::new(q, [u as i64, 0, 0, 1]));
    }
    g
}

/// Embed a component matrix at `q || n` into `GL_2(Z/n)`, identity elsewhere.
pub fn embed_component(m: &ResidueMatrix, n: u32) -> ResidueMatrix {
    let q = m.modulus();
    let rest = n / q;
    assert!(n % q == 0 && arith::gcd(q as u64, rest as u64) == 1);
    ResidueMatrix::crt_join(&[*m, ResidueMatrix::identity(rest)]).expect("coprime join")
}

/// Generators of `GL_2(Z/n)`.
pub fn gl2_generators(n: u32) -> Vec<ResidueMatrix> {
    congruence_kernel_generators(n, 1)
}

/// Generators of `SL_2(Z/n)`.
pub fn sl2_generators(n: u32) -> Vec<ResidueMatrix> {
    let mut out = Vec::new();
    for q in prime_power_factors(n) {
        for g in [ResidueMatrix::new(q, [1, 1, 0, 1]), ResidueMatrix::new(q, [1, 0, 1, 1])] {
            out.push(embed_component(&g, n));
        }
    }
    out
}

/// Generators of the kernel of reduction `GL_2(Z/n) -> GL_2(Z/m)`.
pub fn congruence_kernel_generators(n: u32, m: u32) -> Vec<ResidueMatrix> {
    assert!(m >= 1 && n % m == 0);
    let mut out = Vec::new();
    for q in prime_power_factors(n) {
        let j = arith::gcd(q as u64, m as u64) as u32;
        let comp: Vec<ResidueMatrix> = if j == 1 {
            gl2_prime_power_generators(q)
        } else if j == q {
            vec![]
        } else {
            // I + jX is generated by unipotents and diagonal units = 1 mod j
            let mut v = vec![
                ResidueMatrix::new(q, [1, j as i64, 0, 1]),
                ResidueMatrix::new(q, [1, 0, j as i64, 1]),
                ResidueMatrix::new(q, [1 + j as i64, 0, 0, 1]),
                ResidueMatrix::new(q, [1, 0, 0, 1 + j as i64]),
            ];
            if j == 2 {
                v.push(ResidueMatrix::new(q, [-1, 0, 0, 1]));
                v.push(ResidueMatrix::new(q, [1, 0, 0, -1]));
            }
            v
        };
        out.extend(comp.iter().map(|c| embed_component(c, n)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(n: u32, e: [i64; 4]) -> ResidueMatrix {
        ResidueMatrix::new(n, e)
    }

    #[test]
    fn arithmetic() {
        let a = m(4, [3, 0, 0, 1]);
        let b = m(4, [1, 1, 1, 0]);
        assert_eq!(a.mul(&b).unwrap(), m(4, [3, 3, 1, 0]));
        assert_eq!(m(8, [-1, 9, 0, 17]).entries(), [7, 1, 0, 1]);
        assert_eq!(m(8, [3, 2, 5, 7]).det(), 3);
        let x = m(420, [259, 362, 162, 365]);
        assert!(x.mul_same(&x.inv().unwrap()).is_identity());
        assert_eq!(m(4, [2, 0, 0, 2]).inv(), Err(Error::NonUnit { det: 0, modulus: 4 }));
        assert_eq!(a.mul(&m(8, [1, 0, 0, 1])), Err(Error::ModulusMismatch(4, 8)));
        assert_eq!(m(2, [0, 1, 1, 1]).order(), 3);
    }

    #[test]
    fn crt_round_trip() {
        let x = m(420, [259, 362, 162, 365]);
        let parts = x.crt_split();
        assert_eq!(parts.iter().map(|p| p.modulus()).collect::<Vec<_>>(), vec![4, 3, 5, 7]);
        assert_eq!(parts[0], m(4, [3, 2, 2, 1]));
        assert_eq!(ResidueMatrix::crt_join(&parts).unwrap(), x);
        assert!(ResidueMatrix::crt_join(&[m(4, [1, 0, 0, 1]), m(6, [1, 0, 0, 1])]).is_err());
    }

    #[test]
    fn gl2_orders() {
        assert_eq!(gl2_order(2), 6);
        assert_eq!(gl2_order(3), 48);
        assert_eq!(gl2_order(4), 96);
        assert_eq!(gl2_order(8), 1536);
        assert_eq!(gl2_order(9), 3888);
        assert_eq!(gl2_order(7), 2016);
        assert_eq!(gl2_order(23), 267_168);
        assert_eq!(sl2_order(4), 48);
    }

    #[test]
    fn brute_force_gl2_counts() {
        for n in [2u32, 3, 4, 5, 6, 8] {
            let count = (0..(n as u64).pow(4))
                .filter(|&i| ResidueMatrix::from_index(n, i).is_invertible())
                .count();
            assert_eq!(count as u128, gl2_order(n as u64), "n={n}");
        }
    }

    #[test]
    fn text_format() {
        let x = ResidueMatrix::parse("3, -1,0,5", 4).unwrap();
        assert_eq!(x.to_string(), "3,3,0,1");
        assert_eq!(ResidueMatrix::parse_list("1,0,0,1;0,1,1,1", 2).unwrap().len(), 2);
        assert!(matches!(ResidueMatrix::parse("1,2,3", 4), Err(Error::Parse(_))));
        assert_eq!(ResidueMatrix::from_index(8, x.lift(8).index()), x.lift(8));
    }
}
