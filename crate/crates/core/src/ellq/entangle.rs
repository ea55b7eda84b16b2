//! Quadratic and cubic entanglement data attached to the 2-torsion shape.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;
use serde::Serialize;

use super::torsion::{cubic_discriminant, isqrt_exact, TwoTorsionShape};
use super::CurveModel;
use crate::arith::{factor, squarefree_part};
use crate::error::{Error, Result};

/// One quadratic entanglement `Q(sqrt N') ⊂ Q(E[2^k])`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Entanglement {
    pub n: u64,
    pub n_prime: i64,
    pub k: u32,
}

impl Entanglement {
    pub fn of(n: u64) -> Result<Entanglement> {
        Ok(Entanglement { n, n_prime: n_prime(n)?, k: k_of(n) })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind")]
pub enum EntanglementData {
    Cs { s: Vec<u64>, quadratic: Vec<Entanglement> },
    B { s: Vec<u64>, quadratic: Vec<Entanglement> },
    Cn { d_e: i64, d_e_prime: i64, k: u32, f: u64, quadratic: Vec<Entanglement> },
}

impl EntanglementData {
    /// Quadratic entanglements actually imposed (those with `N' != 1`).
    pub fn quadratic(&self) -> &[Entanglement] {
        match self {
            EntanglementData::Cs { quadratic, .. }
            | EntanglementData::B { quadratic, .. }
            | EntanglementData::Cn { quadratic, .. } => quadratic,
        }
    }

    /// Cubic conductor, for the 2Cn case.
    pub fn cubic_conductor(&self) -> Option<u64> {
        match self {
            EntanglementData::Cn { f, .. } => Some(*f),
            _ => None,
        }
    }
}

/// `N'` for squarefree `N >= 1`: the unique `+-N` or `+-N/2` that is 1 mod 4.
pub fn n_prime(n: u64) -> Result<i64> {
    if n == 0 || !crate::arith::is_squarefree(n) {
        return Err(Error::Domain(format!("{n} is not squarefree")));
    }
    let n = n as i64;
    Ok(match n % 8 {
        1 | 5 => n,
        3 | 7 => -n,
        2 => n / 2,
        6 => -n / 2,
        _ => unreachable!("squarefree"),
    })
}

pub fn k_of(n: u64) -> u32 {
    if n % 2 == 0 {
        3
    } else {
        2
    }
}

/// Squarefree part of a product of two squarefree integers.
fn sf_mul(x: i128, y: i128) -> i128 {
    let g = x.gcd(&y);
    (x / g) * (y / g)
}

/// The set S of the 2Cs case, built from the three root differences.
pub fn s_set_2cs(r: (i128, i128, i128)) -> Result<Vec<u64>> {
    let (a, b, c) = r;
    let sa = squarefree_part(a - b)?;
    let sb = squarefree_part(a - c)?;
    let sc = squarefree_part(b - c)?;
    let vals = [sa, sb, sc, sf_mul(sa, sb), sf_mul(sa, sc), sf_mul(sb, sc), sf_mul(sf_mul(sa, sb), sc)];
    let mut s: Vec<u64> = vals.iter().map(|v| v.unsigned_abs() as u64).filter(|&v| v != 1 && v != 2).collect();
    s.sort_unstable();
    s.dedup();
    Ok(s)
}

fn pick(s: &[u64], ok: impl Fn(u64) -> bool) -> Option<u64> {
    s.iter().copied().find(|&n| ok(n))
}

fn sf_u(x: u64) -> u64 {
    squarefree_part(x as i128).expect("nonzero") as u64
}

/// Entanglements for a split 2-torsion curve whose 2-adic image has the given index (6, 12 or 24).
pub fn entanglement_data_2cs(shape: &TwoTorsionShape, two_adic_index: u64) -> Result<EntanglementData> {
    let TwoTorsionShape::Split(r1, r2, r3) = *shape else {
        return Err(Error::Inconsistency("2Cs entanglements need split 2-torsion".into()));
    };
    let count = match two_adic_index {
        6 => 3,
        12 => 2,
        24 => 1,
        other => return Err(Error::Inconsistency(format!("2Cs label of index {other}"))),
    };
    let s = s_set_2cs((r1, r2, r3))?;
    let mut ns = Vec::new();
    if let Some(n1) = s.first().copied() {
        ns.push(n1);
        if let Some(n2) = pick(&s, |n| n % n1 != 0) {
            ns.push(n2);
            let n12 = sf_u(n1 * n2);
            if let Some(n3) = pick(&s, |n| n % n1 != 0 && n % n2 != 0 && n % n12 != 0) {
                ns.push(n3);
            }
        }
    }
    if ns.len() < count {
        return Err(Error::Inconsistency(format!(
            "S = {s:?} admits only {} of the {count} entanglements an index-{two_adic_index} image needs",
            ns.len()
        )));
    }
    ns.truncate(count);
    let quadratic = ns.into_iter().map(Entanglement::of).collect::<Result<_>>()?;
    Ok(EntanglementData::Cs { s, quadratic })
}

/// The set S of the 2B case for `(x^2 + a x + b)(x + c)`.
pub fn s_set_2b(a: i128, b: i128, c: i128) -> Result<Vec<u64>> {
    let d1 = squarefree_part(a * a - 4 * b)?;
    let d2 = squarefree_part(a * c - c * c - b)?;
    let mut s: Vec<u64> = [d1, d2, sf_mul(d1, d2)].iter().map(|v| v.unsigned_abs() as u64).collect();
    s.sort_unstable();
    s.dedup();
    Ok(s)
}

/// Entanglements for a 2B curve; `index_three` selects the 2.3.0.1 rule.
pub fn entanglement_data_2b(shape: &TwoTorsionShape, index_three: bool) -> Result<EntanglementData> {
    let TwoTorsionShape::PartialSplit(a, b, c) = *shape else {
        return Err(Error::Inconsistency("2B entanglements need a single rational 2-torsion point".into()));
    };
    let s = s_set_2b(a, b, c)?;
    let admissible: Vec<u64> = s.iter().copied().filter(|&n| n_prime(n).map_or(false, |p| p != 1)).collect();
    let ns: Vec<u64> = if index_three {
        let n1 = admissible.first().copied();
        let n2 = n1.and_then(|n1| pick(&admissible, |n| n % n1 != 0));
        match (n1, n2) {
            (Some(x), Some(y)) => vec![x, y],
            _ => return Err(Error::Inconsistency(format!("S = {s:?} has no admissible pair N1, N2"))),
        }
    } else {
        match admissible.first() {
            Some(&x) => vec![x],
            None => return Err(Error::Inconsistency(format!("S = {s:?} has no N with N' != 1"))),
        }
    };
    let quadratic = ns.into_iter().map(Entanglement::of).collect::<Result<_>>()?;
    Ok(EntanglementData::B { s, quadratic })
}

/// Entanglement data for a 2Cn curve: `D_E`, `D_E'`, `k` and the cubic conductor `f`.
pub fn entanglement_data_2cn(curve: &CurveModel, shape: &TwoTorsionShape) -> Result<EntanglementData> {
    let TwoTorsionShape::Irreducible(a, b) = *shape else {
        return Err(Error::Inconsistency("2Cn entanglements need an irreducible 2-division cubic".into()));
    };
    let disc = curve.discriminant()?;
    let root = isqrt_exact(disc).ok_or_else(|| Error::Inconsistency(format!("discriminant {disc} is not a square")))?;
    let d_e = squarefree_part(root)? as i64;
    let d_e_prime = n_prime(d_e as u64)?;
    let k = k_of(d_e as u64);
    let f = cubic_field_conductor(a, b)?;
    let quadratic = if d_e_prime == 1 { vec![] } else { vec![Entanglement { n: d_e as u64, n_prime: d_e_prime, k }] };
    Ok(EntanglementData::Cn { d_e, d_e_prime, k, f, quadratic })
}

fn val(x: &BigInt, p: &BigInt) -> u32 {
    if x.is_zero() {
        return u32::MAX;
    }
    let mut v = 0;
    let mut y = x.clone();
    while (&y % p).is_zero() {
        y /= p;
        v += 1;
    }
    v
}

/// Whether p ramifies in the cyclic cubic field cut out by the monic `x^3 + c2 x^2 + c1 x + c0`.
///
/// Works through Newton polygons at a triple root mod p; when the polygon has integral slope the
/// order is enlarged by `theta -> (theta - r)/p` (Dedekind's construction) and the test repeats.
fn ramifies(mut c: [BigInt; 3], p: u64) -> Result<bool> {
    let pb = BigInt::from(p);
    loop {
        let md = |x: &BigInt| x.mod_floor(&pb);
        // triple root r mod p?
        let r = if p == 3 {
            if !md(&c[2]).is_zero() || !md(&c[1]).is_zero() {
                return Ok(false);
            }
            md(&(-&c[0]))
        } else {
            let inv3 = BigInt::from(crate::arith::inv_mod(3, p).expect("p != 3"));
            let r = md(&(-&c[2] * inv3));
            let r2 = &r * &r;
            if md(&(&c[1] - 3 * &r2)) != BigInt::zero() || md(&(&c[0] + &r2 * &r)) != BigInt::zero() {
                return Ok(false);
            }
            r
        };
        // g(x) = f(x + r)
        let g2 = &c[2] + 3 * &r;
        let g1 = &c[1] + 2 * &c[2] * &r + 3 * &r * &r;
        let g0 = &c[0] + &c[1] * &r + &c[2] * &r * &r + &r * &r * &r;
        let (v0, v1, v2) = (val(&g0, &pb), val(&g1, &pb), val(&g2, &pb));
        debug_assert!(v0 >= 1 && v1 >= 1 && v2 >= 1);
        match v0 {
            1 => return Ok(true),
            2 if v1 >= 2 => return Ok(true),
            v if v >= 3 && v1 >= 2 => {
                let p2 = &pb * &pb;
                c = [g0 / (&p2 * &pb), g1 / p2, g2 / &pb];
            }
            _ => {
                return Err(Error::Inconsistency(format!(
                    "Newton polygon at {p} forces ramification index 2; the cubic field is not cyclic"
                )))
            }
        }
    }
}

/// Conductor of the cyclic cubic field defined by `x^3 + a x + b` (square discriminant).
pub fn cubic_field_conductor(a: i128, b: i128) -> Result<u64> {
    let disc = cubic_discriminant(a, b)?;
    let root = isqrt_exact(disc).ok_or_else(|| Error::Inconsistency(format!("cubic discriminant {disc} is not a square")))?;
    if root == 0 {
        return Err(Error::Domain("repeated root".into()));
    }
    let mut f: u64 = 1;
    for (p, _) in factor(root.unsigned_abs())? {
        let p = p as u64;
        let coeffs = [BigInt::from(b), BigInt::from(a), BigInt::zero()];
        if ramifies(coeffs, p)? {
            f *= if p == 3 { 9 } else { p };
        }
    }
    check_conductor(f, disc)?;
    Ok(f)
}

/// Structure check: f = 9^e * prod p_i with p_i = 1 mod 3, and disc / f^2 a square.
fn check_conductor(f: u64, disc: i128) -> Result<()> {
    if f % 2 == 0 {
        return Err(Error::Inconsistency(format!("even cubic conductor {f}")));
    }
    for (p, e) in crate::arith::factor_u64(f) {
        let ok = if p == 3 { e == 2 } else { e == 1 && p % 3 == 1 };
        if !ok {
            return Err(Error::Inconsistency(format!("conductor {f} violates the cyclic cubic structure at {p}")));
        }
    }
    let f2 = (f as i128) * (f as i128);
    if disc % f2 != 0 || isqrt_exact(disc / f2).is_none() {
        return Err(Error::Inconsistency(format!("{f}^2 does not divide {disc} with square cofactor")));
    }
    Ok(())
}

/// Whether `f = v^2 - 3v + 9` or `3f = v^2 - 3v + 9` for some integer v (the simplest-cubic family).
pub fn in_simplest_family(f: u64) -> bool {
    let hit = |t: u64| {
        // v^2 - 3v + 9 - t = 0 has discriminant 4t - 27
        let d = 4 * t as i128 - 27;
        d >= 0 && isqrt_exact(d).map_or(false, |s| (3 + s) % 2 == 0)
    };
    hit(f) || hit(3 * f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primes_and_k() {
        assert_eq!(n_prime(3).unwrap(), -3);
        assert_eq!(n_prime(5).unwrap(), 5);
        assert_eq!(n_prime(2).unwrap(), 1);
        assert_eq!(n_prime(6).unwrap(), -3);
        assert_eq!(n_prime(7).unwrap(), -7);
        assert!(n_prime(12).is_err());
        assert_eq!(k_of(15), 2);
        assert_eq!(k_of(6), 3);
        assert_eq!(k_of(57), 2);
        for n in (1..500u64).filter(|&n| crate::arith::is_squarefree(n)) {
            assert_eq!(n_prime(n).unwrap().rem_euclid(4), 1);
        }
    }

    #[test]
    fn selection_9405() {
        let shape = TwoTorsionShape::Split(-118, -61, 179);
        let d = entanglement_data_2cs(&shape, 6).unwrap();
        let EntanglementData::Cs { s, quadratic } = d else { panic!() };
        assert_eq!(s, vec![15, 33, 55, 57, 95, 209, 3135]);
        assert_eq!(quadratic.iter().map(|e| e.n).collect::<Vec<_>>(), vec![15, 33, 57]);
        assert!(quadratic.iter().all(|e| e.k == 2));
    }

    #[test]
    fn selection_315() {
        let d = entanglement_data_2cs(&TwoTorsionShape::Split(-37, 11, 26), 6).unwrap();
        let EntanglementData::Cs { s, quadratic } = d else { panic!() };
        assert_eq!(s, vec![3, 5, 7, 15, 21, 35, 105]);
        assert_eq!(quadratic.iter().map(|e| e.n_prime).collect::<Vec<_>>(), vec![-3, 5, -7]);
        let one = entanglement_data_2cs(&TwoTorsionShape::Split(-37, 11, 26), 24).unwrap();
        assert_eq!(one.quadratic().len(), 1);
    }

    #[test]
    fn selection_69() {
        let d = entanglement_data_2b(&TwoTorsionShape::PartialSplit(-78, -14031, 78), true).unwrap();
        let EntanglementData::B { s, quadratic } = d else { panic!() };
        assert_eq!(s, vec![3, 23, 69]);
        assert_eq!(quadratic.iter().map(|e| e.n_prime).collect::<Vec<_>>(), vec![-3, -23]);
    }

    #[test]
    fn cubic_conductors() {
        assert_eq!(cubic_field_conductor(-7, 7).unwrap(), 7);
        assert_eq!(cubic_field_conductor(-3, 1).unwrap(), 9);
        assert_eq!(cubic_field_conductor(-1372, -19208).unwrap(), 7);
        // disc = 63^2, ramified at both 3 and 7
        assert_eq!(cubic_field_conductor(-21, -35).unwrap(), 63);
        assert!(in_simplest_family(7) && in_simplest_family(9) && in_simplest_family(13));
        assert!(!in_simplest_family(31));
        assert!(cubic_field_conductor(-2, 1).is_err());
    }

    #[test]
    fn data_392() {
        let e = CurveModel::parse("0,0,0,-7,7").unwrap();
        let shape = super::super::classify_mod2(&e).unwrap();
        let d = entanglement_data_2cn(&e, &shape).unwrap();
        assert_eq!(d, EntanglementData::Cn {
            d_e: 7,
            d_e_prime: -7,
            k: 2,
            f: 7,
            quadratic: vec![Entanglement { n: 7, n_prime: -7, k: 2 }]
        });
    }
}
