//! Naive point counting over prime fields and the group structure of `E(F_p)`.

use super::CurveModel;
use crate::arith::{is_prime, mul_mod, pow_mod};
use crate::error::{Error, Result};

/// Largest prime handled by the O(p) counters unless the caller raises it.
pub const DEFAULT_PRIME_BOUND: u64 = 100_000;

fn red(x: i128, p: u64) -> u64 {
    x.rem_euclid(p as i128) as u64
}

/// Good reduction at p, judged on a minimal model.
pub fn is_good_prime(curve: &CurveModel, p: u64) -> bool {
    match curve.minimal_discriminant() {
        Ok(d) => is_prime(p as u128) && d % p as i128 != 0,
        Err(_) => false,
    }
}

fn check_prime(curve: &CurveModel, p: u64, bound: u64) -> Result<()> {
    if p > bound {
        return Err(Error::ResourceCap(format!("p = {p} exceeds the point-counting bound {bound}")));
    }
    if !is_good_prime(curve, p) {
        return Err(Error::Domain(format!("{p} is not a prime of good reduction for {curve}")));
    }
    Ok(())
}

/// Table of quadratic residues: `sq[a]` is true iff a is a nonzero square mod p.
fn square_table(p: u64) -> Vec<bool> {
    let mut sq = vec![false; p as usize];
    for y in 1..p {
        sq[(y * y % p) as usize] = true;
    }
    sq
}

/// Trace of Frobenius `p + 1 - #E(F_p)` at a good prime, with the default bound.
pub fn ap(curve: &CurveModel, p: u64) -> Result<i64> {
    ap_bounded(curve, p, DEFAULT_PRIME_BOUND)
}

pub fn ap_bounded(curve: &CurveModel, p: u64, bound: u64) -> Result<i64> {
    check_prime(curve, p, bound)?;
    let e = curve.minimal_model()?;
    let a = if p == 2 {
        p as i64 + 1 - count_pairs(&e, p) as i64 - 1
    } else {
        let inv = e.invariants()?;
        let sq = square_table(p);
        // (2y + a1 x + a3)^2 = 4x^3 + b2 x^2 + 2 b4 x + b6
        let (c3, c2, c1, c0) = (4 % p, red(inv.b2, p), red(2 * inv.b4, p), red(inv.b6, p));
        let mut s: i64 = 0;
        for x in 0..p {
            let v = (((c3 * x + c2) % p * x + c1) % p * x + c0) % p;
            if v != 0 {
                s += if sq[v as usize] { 1 } else { -1 };
            }
        }
        -s
    };
    if (a as f64).powi(2) > 4.0 * p as f64 {
        return Err(Error::Inconsistency(format!("a_{p} = {a} violates the Hasse bound")));
    }
    Ok(a)
}

/// Number of affine solutions `(x, y)` of the long Weierstrass equation mod p.
pub fn count_pairs(curve: &CurveModel, p: u64) -> u64 {
    let [a1, a2, a3, a4, a6] = curve.a.map(|c| red(c as i128, p));
    let mut n = 0;
    for x in 0..p {
        let rhs = (((x + a2) % p * x + a4) % p * x + a6) % p;
        for y in 0..p {
            let lhs = (y * y + a1 * x % p * y + a3 * y) % p;
            if lhs == rhs {
                n += 1;
            }
        }
    }
    n
}

/// `#E(F_p)` by the pair count (independent of [`ap`]).
pub fn count_points_naive(curve: &CurveModel, p: u64) -> u64 {
    count_pairs(curve, p) + 1
}

/// Roots of `4x^3 + b2 x^2 + 2 b4 x + b6` mod an odd p: the x-coordinates of the 2-torsion.
fn two_division_roots(curve: &CurveModel, p: u64) -> Result<usize> {
    let inv = curve.invariants()?;
    let (c2, c1, c0) = (red(inv.b2, p), red(2 * inv.b4, p), red(inv.b6, p));
    Ok((0..p).filter(|&x| (((4 * x + c2) % p * x + c1) % p * x + c0) % p == 0).count())
}

/// Affine points on `y^2 = x^3 + a x + b` over `F_p`, `p >= 5`.
type Pt = Option<(u64, u64)>;

struct Short {
    p: u64,
    a: u64,
}

impl Short {
    fn add(&self, s: Pt, t: Pt) -> Pt {
        let p = self.p;
        let ((x1, y1), (x2, y2)) = match (s, t) {
            (None, q) | (q, None) => return q,
            (Some(u), Some(v)) => (u, v),
        };
        let lam = if x1 == x2 {
            if (y1 + y2) % p == 0 {
                return None;
            }
            let num = (3 * mul_mod(x1, x1, p) + self.a) % p;
            mul_mod(num, pow_mod(2 * y1 % p, p - 2, p), p)
        } else {
            mul_mod((y2 + p - y1) % p, pow_mod((x2 + p - x1) % p, p - 2, p), p)
        };
        let x3 = (mul_mod(lam, lam, p) + 2 * p - x1 - x2) % p;
        let y3 = (mul_mod(lam, (x1 + p - x3) % p, p) + p - y1) % p;
        Some((x3, y3))
    }

    fn mul(&self, mut k: u64, pt: Pt) -> Pt {
        let mut acc = None;
        let mut base = pt;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.add(acc, base);
            }
            base = self.add(base, base);
            k >>= 1;
        }
        acc
    }
}

/// Number of points of `E(F_p)` killed by the odd prime l, by brute force (`p >= 5`, good).
pub fn torsion_count(curve: &CurveModel, p: u64, l: u64) -> Result<u64> {
    if p < 5 || l % 2 == 0 {
        return Err(Error::Domain(format!("torsion count needs p >= 5 and l odd (p = {p}, l = {l})")));
    }
    check_prime(curve, p, DEFAULT_PRIME_BOUND.max(p))?;
    let (sa, sb) = curve.minimal_model()?.short_model()?;
    let short = Short { p, a: red(sa, p) };
    let b = red(sb, p);
    let mut sqrt = vec![u64::MAX; p as usize];
    for y in 0..p {
        sqrt[(y * y % p) as usize] = y;
    }
    let mut torsion = 1u64;
    for x in 0..p {
        let v = ((mul_mod(mul_mod(x, x, p), x, p) + mul_mod(short.a, x, p)) % p + b) % p;
        let y = sqrt[v as usize];
        if y == u64::MAX {
            continue;
        }
        for yy in if y == 0 { vec![0] } else { vec![y, p - y] } {
            if short.mul(l, Some((x, yy))).is_none() {
                torsion += 1;
            }
        }
    }
    Ok(torsion)
}

/// Whether `E(F_p)` is cyclic at a good prime p.
///
/// `E(F_p)` fails to be cyclic exactly when it contains `E[l]` for some prime l; that forces
/// `l | p - 1` and `l^2 | #E(F_p)`, and for l odd the l-torsion points are counted directly.
pub fn is_cyclic_reduction(curve: &CurveModel, p: u64) -> Result<bool> {
    let ap = ap(curve, p)?;
    let n = (p as i64 + 1 - ap) as u64;
    let e = curve.minimal_model()?;
    if p == 2 {
        return Ok(true);
    }
    if n % 4 == 0 && two_division_roots(&e, p)? == 3 {
        return Ok(false);
    }
    if p == 3 {
        return Ok(true);
    }
    for (l, _) in crate::arith::factor_u64(p - 1) {
        if l == 2 || n % (l * l) != 0 {
            continue;
        }
        if torsion_count(&e, p, l)? == l * l {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_traces() {
        let e = CurveModel::parse("0,0,0,-7,7").unwrap();
        assert_eq!(ap(&e, 3).unwrap(), -3);
        assert!(!is_good_prime(&e, 2));
        assert!(is_good_prime(&e, 3));
        let e = CurveModel::parse("1,-1,1,-68,182").unwrap();
        assert!(!is_good_prime(&e, 5));
        assert!(matches!(ap(&e, 5), Err(Error::Domain(_))));
        assert!(matches!(ap_bounded(&e, 101, 100), Err(Error::ResourceCap(_))));
    }

    #[test]
    fn trace_matches_pair_count() {
        for s in ["1,-1,1,-68,182", "1,0,1,-16,-25", "0,0,0,-7,7", "0,0,0,-1372,-19208", "0,1,1,-2,0"] {
            let e = CurveModel::parse(s).unwrap();
            for p in crate::arith::primes_up_to(200) {
                if is_good_prime(&e, p) {
                    let n = count_points_naive(&e.minimal_model().unwrap(), p);
                    assert_eq!(p as i64 + 1 - ap(&e, p).unwrap(), n as i64, "{s} at {p}");
                }
            }
        }
    }

    /// Brute-force exponent of `E(F_p)` from all point orders, long model, any p.
    fn cyclic_brute(e: &CurveModel, p: u64) -> bool {
        let n = count_points_naive(e, p);
        // E(F_p) is cyclic iff some point has order n; use the l-torsion count for each l | n
        let short = e.short_model().unwrap();
        let s = Short { p, a: red(short.0, p) };
        let b = red(short.1, p);
        let mut pts: Vec<Pt> = vec![None];
        for x in 0..p {
            for y in 0..p {
                let v = ((mul_mod(mul_mod(x, x, p), x, p) + mul_mod(s.a, x, p)) % p + b) % p;
                if y * y % p == v {
                    pts.push(Some((x, y)));
                }
            }
        }
        assert_eq!(pts.len() as u64, n);
        let order = |q: Pt| (1..=n).find(|&k| s.mul(k, q).is_none()).unwrap();
        pts.iter().any(|&q| order(q) == n)
    }

    #[test]
    fn cyclicity_agrees_with_brute_force() {
        for s in ["1,-1,1,-68,182", "0,0,0,-7,7", "1,0,1,-16,-25", "0,0,0,-1,0"] {
            let e = CurveModel::parse(s).unwrap();
            for p in crate::arith::primes_up_to(120).into_iter().filter(|&p| p >= 5) {
                let m = e.minimal_model().unwrap();
                let (sa, sb) = m.short_model().unwrap();
                let ds = -16 * (4 * sa * sa * sa + 27 * sb * sb);
                if !is_good_prime(&e, p) || ds % p as i128 == 0 {
                    continue;
                }
                assert_eq!(is_cyclic_reduction(&e, p).unwrap(), cyclic_brute(&m, p), "{s} at {p}");
            }
        }
    }
}
