//! Small exact integer arithmetic: factorization, symbols, sieves, discrete logs.

use num_integer::Integer;

use crate::error::Error;

const TRIAL_LIMIT: u64 = 1_000_000;
const RHO_BUDGET: u64 = 1 << 26;

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut r = 1u64;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    r
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn inv_mod(a: i64, m: u64) -> Option<u64> {
    let m = m as i128;
    let a = (a as i128).rem_euclid(m);
    let g = a.extended_gcd(&m);
    if g.gcd != 1 {
        return None;
    }
    Some(g.x.rem_euclid(m) as u64)
}

pub fn gcd(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

pub fn lcm(a: u64, b: u64) -> u64 {
    a.lcm(&b)
}

fn mul_mod_u128(mut a: u128, mut b: u128, m: u128) -> u128 {
    if m <= u64::MAX as u128 {
        return (a % m) * (b % m) % m;
    }
    // m < 2^127, so a + a never overflows
    a %= m;
    b %= m;
    let mut r = 0u128;
    while b > 0 {
        if b & 1 == 1 {
            r = (r + a) % m;
        }
        a = (a + a) % m;
        b >>= 1;
    }
    r
}

fn pow_mod_u128(mut b: u128, mut e: u128, m: u128) -> u128 {
    let mut r = 1u128 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod_u128(r, b, m);
        }
        b = mul_mod_u128(b, b, m);
        e >>= 1;
    }
    r
}

/// Miller-Rabin with the first twelve prime bases; deterministic below 3.3e24.
pub fn is_prime(n: u128) -> bool {
    if n < 2 {
        return false;
    }
    const BASES: [u128; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for p in BASES {
        if n % p == 0 {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'outer: for a in BASES {
        let mut x = pow_mod_u128(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod_u128(x, x, n);
            if x == n - 1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

fn rho(n: u128) -> Result<u128, Error> {
    let mut budget = RHO_BUDGET;
    for c in 1u128.. {
        let f = |x: u128| (mul_mod_u128(x, x, n) + c) % n;
        let (mut x, mut y, mut d) = (2u128, 2u128, 1u128);
        while d == 1 {
            x = f(x);
            y = f(f(y));
            d = x.abs_diff(y).gcd(&n);
            budget = budget.saturating_sub(1);
            if budget == 0 {
                return Err(Error::ResourceCap(format!("could not factor {n}")));
            }
        }
        if d != n {
            return Ok(d);
        }
    }
    unreachable!()
}

fn split_into(n: u128, out: &mut Vec<u128>) -> Result<(), Error> {
    if n == 1 {
        return Ok(());
    }
    if is_prime(n) {
        out.push(n);
        return Ok(());
    }
    let d = rho(n)?;
    split_into(d, out)?;
    split_into(n / d, out)
}

/// Prime factorization with multiplicities, primes ascending.
pub fn factor(n: u128) -> Result<Vec<(u128, u32)>, Error> {
    let mut out = Vec::new();
    let mut n = n;
    if n == 0 {
        return Err(Error::Domain("cannot factor zero".into()));
    }
    let mut p = 2u128;
    while p <= TRIAL_LIMIT as u128 && p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        let mut rest = Vec::new();
        split_into(n, &mut rest)?;
        rest.sort_unstable();
        for q in rest {
            match out.last_mut() {
                Some((r, e)) if *r == q => *e += 1,
                _ => out.push((q, 1)),
            }
        }
    }
    Ok(out)
}

/// Factorization of a word-sized integer; never hits the rho budget in practice.
pub fn factor_u64(n: u64) -> Vec<(u64, u32)> {
    factor(n as u128)
        .expect("64-bit factorization")
        .into_iter()
        .map(|(p, e)| (p as u64, e))
        .collect()
}

pub fn prime_divisors(n: u64) -> Vec<u64> {
    factor_u64(n).into_iter().map(|(p, _)| p).collect()
}

/// Signed squarefree part: `n = sf * k^2` with `sf` squarefree and the sign of `n`.
pub fn squarefree_part(n: i128) -> Result<i128, Error> {
    if n == 0 {
        return Err(Error::Domain("squarefree part of zero".into()));
    }
    let mut sf: i128 = n.signum();
    for (p, e) in factor(n.unsigned_abs())? {
        if e % 2 == 1 {
            sf *= p as i128;
        }
    }
    Ok(sf)
}

pub fn is_squarefree(n: u64) -> bool {
    n != 0 && factor_u64(n).iter().all(|&(_, e)| e == 1)
}

/// Largest squarefree divisor.
pub fn radical(n: u64) -> u64 {
    prime_divisors(n).into_iter().product()
}

pub fn euler_phi(n: u64) -> u64 {
    factor_u64(n)
        .into_iter()
        .map(|(p, e)| (p - 1) * p.pow(e - 1))
        .product()
}

/// Jacobi symbol (a/n) for odd positive n.
pub fn jacobi(a: i128, n: u128) -> i8 {
    assert!(n % 2 == 1, "jacobi needs an odd modulus");
    let mut a = a.rem_euclid(n as i128) as u128;
    let mut n = n;
    let mut t = 1i8;
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            if n % 8 == 3 || n % 8 == 5 {
                t = -t;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            t = -t;
        }
        a %= n;
    }
    if n == 1 {
        t
    } else {
        0
    }
}

/// Kronecker symbol (a/n) for arbitrary integers.
pub fn kronecker(a: i128, n: i128) -> i8 {
    if n == 0 {
        return if a == 1 || a == -1 { 1 } else { 0 };
    }
    let mut t = 1i8;
    let mut m = n;
    if m < 0 {
        m = -m;
        if a < 0 {
            t = -t;
        }
    }
    let v = m.trailing_zeros();
    if v > 0 {
        if a % 2 == 0 {
            return 0;
        }
        if v % 2 == 1 && (a.rem_euclid(8) == 3 || a.rem_euclid(8) == 5) {
            t = -t;
        }
        m >>= v;
    }
    t * jacobi(a, m as u128)
}

/// Quadratic Dirichlet character attached to a fundamental-type `d` with `d = 1 mod 4`,
/// evaluated at a unit `u` modulo `|d|`.
pub fn quadratic_character(d: i64, u: u64) -> i8 {
    debug_assert!(d.rem_euclid(4) == 1);
    if d == 1 {
        return 1;
    }
    jacobi(u as i128, d.unsigned_abs() as u128)
}

pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut sieve = vec![true; n + 1];
    sieve[0] = false;
    sieve[1] = false;
    let mut i = 2;
    while i * i <= n {
        if sieve[i] {
            let mut j = i * i;
            while j <= n {
                sieve[j] = false;
                j += i;
            }
        }
        i += 1;
    }
    (0..=n).filter(|&k| sieve[k]).map(|k| k as u64).collect()
}

/// Generator of the cyclic group `(Z/q)^x`, for `q` an odd prime power or 2, 4.
pub fn primitive_root(q: u64) -> Option<u64> {
    let f = factor_u64(q);
    let cyclic = q == 2 || q == 4 || (f.len() == 1 && f[0].0 != 2);
    if !cyclic {
        return None;
    }
    if q == 2 {
        return Some(1);
    }
    let phi = euler_phi(q);
    let ps = prime_divisors(phi);
    (2..q).find(|&g| gcd(g, q) == 1 && ps.iter().all(|&r| pow_mod(g, phi / r, q) != 1))
}

/// Table of discrete logs to the base of a primitive root of `q`; entry 0 for non-units.
#[derive(Clone, Debug)]
pub struct DlogTable {
    pub modulus: u64,
    pub generator: u64,
    pub order: u64,
    logs: Vec<u32>,
}

impl DlogTable {
    pub fn new(q: u64) -> Option<Self> {
        let g = primitive_root(q)?;
        let order = euler_phi(q);
        let mut logs = vec![u32::MAX; q as usize];
        let mut x = 1u64;
        for k in 0..order {
            logs[x as usize] = k as u32;
            x = mul_mod(x, g, q);
        }
        Some(DlogTable { modulus: q, generator: g, order, logs })
    }

    pub fn log(&self, u: u64) -> Option<u64> {
        match self.logs[(u % self.modulus) as usize] {
            u32::MAX => None,
            k => Some(k as u64),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factors() {
        assert_eq!(factor(420).unwrap(), vec![(2, 2), (3, 1), (5, 1), (7, 1)]);
        let big: u128 = 1_000_000_007 * 998_244_353;
        assert_eq!(factor(big).unwrap(), vec![(998_244_353, 1), (1_000_000_007, 1)]);
        assert_eq!(squarefree_part(-14031 * 4).unwrap(), -1559);
        assert_eq!(squarefree_part(784).unwrap(), 1);
        assert_eq!(squarefree_part(-18 * 25).unwrap(), -2);
    }

    #[test]
    fn symbols() {
        // (2/p) = 1 iff p = +-1 mod 8
        assert_eq!(kronecker(2, 7), 1);
        assert_eq!(kronecker(2, 5), -1);
        assert_eq!(kronecker(-3, 7), 1);
        assert_eq!(kronecker(-1, -1), -1);
        assert_eq!(kronecker(5, 8), -1);
        assert_eq!(jacobi(2, 15), 1);
        for p in primes_up_to(200).into_iter().filter(|&p| p > 2) {
            let squares: Vec<u64> = (1..p).map(|x| x * x % p).collect();
            for a in 1..p {
                let expect = if squares.contains(&a) { 1 } else { -1 };
                assert_eq!(jacobi(a as i128, p as u128), expect);
            }
        }
    }

    #[test]
    fn quadratic_character_is_legendre_at_primes() {
        for d in [-3i64, 5, -7, 21, -15, 33, -23, 69] {
            for p in primes_up_to(500) {
                if (d.unsigned_abs()) % p == 0 {
                    continue;
                }
                let u = p % d.unsigned_abs();
                assert_eq!(quadratic_character(d, u), kronecker(d as i128, p as i128), "d={d} p={p}");
            }
        }
    }

    #[test]
    fn roots_and_logs() {
        assert_eq!(primitive_root(7), Some(3));
        assert_eq!(primitive_root(8), None);
        let t = DlogTable::new(9).unwrap();
        assert_eq!(t.order, 6);
        assert_eq!(t.log(3), None);
        assert_eq!(pow_mod(t.generator, t.log(7).unwrap(), 9), 7);
        assert_eq!(inv_mod(3, 8), Some(3));
        assert_eq!(inv_mod(2, 8), None);
        assert_eq!(euler_phi(420), 96);
        assert!(!is_prime(91));
        assert!(is_prime(1_000_000_007));
    }
}
