//! Elliptic curves over Q given by integral Weierstrass equations.

pub mod count;
pub mod entangle;
pub mod kummer;
pub mod torsion;

use std::fmt;

use serde::Serialize;

use crate::arith::factor;
use crate::error::{Error, Result};

pub use count::{ap, is_good_prime};
pub use entangle::{cubic_field_conductor, k_of, n_prime, EntanglementData, Entanglement};
pub use torsion::{classify_mod2, TwoTorsionShape};

/// Long Weierstrass model `y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CurveModel {
    pub a: [i64; 5],
    pub name: Option<String>,
}

fn overflow() -> Error {
    Error::ResourceCap("curve coefficients too large for 128-bit invariants".into())
}

fn mul(a: i128, b: i128) -> Result<i128> {
    a.checked_mul(b).ok_or_else(overflow)
}

fn add(a: i128, b: i128) -> Result<i128> {
    a.checked_add(b).ok_or_else(overflow)
}

/// The b- and c-invariants and the discriminant of a model.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Invariants {
    pub b2: i128,
    pub b4: i128,
    pub b6: i128,
    pub b8: i128,
    pub c4: i128,
    pub c6: i128,
    pub disc: i128,
}

impl CurveModel {
    pub fn new(a: [i64; 5]) -> Result<CurveModel> {
        let c = CurveModel { a, name: None };
        if c.invariants()?.disc == 0 {
            // a singular equation is not a curve spec at all
            return Err(Error::Parse(format!("singular curve {a:?}")));
        }
        Ok(c)
    }

    pub fn named(mut self, name: &str) -> CurveModel {
        self.name = Some(name.to_string());
        self
    }

    /// Short model `y^2 = x^3 + A x + B`.
    pub fn short(a4: i64, a6: i64) -> Result<CurveModel> {
        CurveModel::new([0, 0, 0, a4, a6])
    }

    /// Accepts `a1,a2,a3,a4,a6`, `A,B`, optionally wrapped in brackets.
    pub fn parse(s: &str) -> Result<CurveModel> {
        let t = s.trim().trim_start_matches('[').trim_end_matches(']');
        let parts: Vec<i64> = t
            .split(',')
            .map(|p| p.trim().parse::<i64>().map_err(|_| Error::Parse(format!("bad coefficient {p:?} in {s:?}"))))
            .collect::<Result<_>>()?;
        match parts.len() {
            5 => CurveModel::new([parts[0], parts[1], parts[2], parts[3], parts[4]]),
            2 => CurveModel::short(parts[0], parts[1]),
            n => Err(Error::Parse(format!("expected 5 or 2 coefficients, got {n}"))),
        }
    }

    pub fn label(&self) -> String {
        self.name.clone().unwrap_or_else(|| self.to_string())
    }

    pub fn invariants(&self) -> Result<Invariants> {
        let [a1, a2, a3, a4, a6] = self.a.map(|x| x as i128);
        let b2 = add(mul(a1, a1)?, mul(4, a2)?)?;
        let b4 = add(mul(2, a4)?, mul(a1, a3)?)?;
        let b6 = add(mul(a3, a3)?, mul(4, a6)?)?;
        // b8 = a1^2 a6 + 4 a2 a6 - a1 a3 a4 + a2 a3^2 - a4^2
        let b8 = [mul(mul(a1, a1)?, a6)?, mul(mul(4, a2)?, a6)?, -mul(mul(a1, a3)?, a4)?, mul(mul(a2, a3)?, a3)?, -mul(a4, a4)?]
            .into_iter()
            .try_fold(0i128, add)?;
        let c4 = add(mul(b2, b2)?, -mul(24, b4)?)?;
        let c6 = [-mul(mul(b2, b2)?, b2)?, mul(mul(36, b2)?, b4)?, -mul(216, b6)?].into_iter().try_fold(0i128, add)?;
        let disc = [
            -mul(mul(b2, b2)?, b8)?,
            -mul(8, mul(mul(b4, b4)?, b4)?)?,
            -mul(27, mul(b6, b6)?)?,
            mul(9, mul(mul(b2, b4)?, b6)?)?,
        ]
        .into_iter()
        .try_fold(0i128, add)?;
        Ok(Invariants { b2, b4, b6, b8, c4, c6, disc })
    }

    pub fn discriminant(&self) -> Result<i128> {
        Ok(self.invariants()?.disc)
    }

    /// Integral short model `x^3 + A x + B` from `(-27 c4, -54 c6)`, with every `u^4 | A`, `u^6 | B` divided out.
    pub fn short_model(&self) -> Result<(i128, i128)> {
        let inv = self.invariants()?;
        let mut a = mul(-27, inv.c4)?;
        let mut b = mul(-54, inv.c6)?;
        let g = num_integer::gcd(a.unsigned_abs(), b.unsigned_abs());
        if g == 0 {
            return Err(Error::Domain("singular curve".into()));
        }
        for (p, _) in factor(g)? {
            let p = p as i128;
            loop {
                let (p4, p6) = (p.pow(4), p.pow(6));
                if a % p4 == 0 && b % p6 == 0 {
                    a /= p4;
                    b /= p6;
                } else {
                    break;
                }
            }
        }
        Ok((a, b))
    }

    /// A model minimal at every prime, found by searching `u = p^k` with `p^4 | c4`, `p^6 | c6`.
    pub fn minimal_model(&self) -> Result<CurveModel> {
        let inv = self.invariants()?;
        let mut c4 = inv.c4;
        let mut c6 = inv.c6;
        let mut cur = self.a;
        let g = if c4 == 0 { c6.unsigned_abs() } else if c6 == 0 { c4.unsigned_abs() } else {
            num_integer::gcd(c4.unsigned_abs(), c6.unsigned_abs())
        };
        for (p, _) in factor(g)? {
            let p = p as i128;
            while c4 % p.pow(4) == 0 && c6 % p.pow(6) == 0 {
                let (n4, n6) = (c4 / p.pow(4), c6 / p.pow(6));
                match model_from_c(n4, n6) {
                    Some(a) => {
                        cur = a;
                        c4 = n4;
                        c6 = n6;
                    }
                    None => break,
                }
            }
        }
        let mut m = CurveModel::new(cur)?;
        m.name = self.name.clone();
        Ok(m)
    }

    pub fn minimal_discriminant(&self) -> Result<i128> {
        self.minimal_model()?.discriminant()
    }
}

/// An integral model with the given `c4`, `c6`, if one exists (Kraus-style reconstruction).
fn model_from_c(c4: i128, c6: i128) -> Option<[i64; 5]> {
    for b2 in -5i128..=6 {
        let b4n = b2 * b2 - c4;
        if b4n % 24 != 0 {
            continue;
        }
        let b4 = b4n / 24;
        let b6n = -b2 * b2 * b2 + 36 * b2 * b4 - c6;
        if b6n % 216 != 0 {
            continue;
        }
        let b6 = b6n / 216;
        let a1 = b2.rem_euclid(2);
        let a2n = b2 - a1;
        if a2n % 4 != 0 {
            continue;
        }
        let a2 = a2n / 4;
        let a3 = b6.rem_euclid(2);
        let a4n = b4 - a1 * a3;
        if a4n % 2 != 0 {
            continue;
        }
        let a4 = a4n / 2;
        let a6n = b6 - a3;
        if a6n % 4 != 0 {
            continue;
        }
        let a6 = a6n / 4;
        let coeffs = [a1, a2, a3, a4, a6];
        if coeffs.iter().all(|c| i64::try_from(*c).is_ok()) {
            let a = coeffs.map(|c| c as i64);
            // confirm the invariants round trip
            let m = CurveModel { a, name: None };
            if let Ok(i) = m.invariants() {
                if i.c4 == c4 && i.c6 == c6 {
                    return Some(a);
                }
            }
        }
    }
    None
}

impl fmt::Display for CurveModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a1, a2, a3, a4, a6] = self.a;
        write!(f, "[{a1},{a2},{a3},{a4},{a6}]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn discriminants() {
        let e = CurveModel::parse("0,0,0,-7,7").unwrap();
        assert_eq!(e.discriminant().unwrap(), 784);
        let e = CurveModel::parse("[1,-1,1,-68,182]").unwrap();
        assert_eq!(e.short_model().unwrap(), (-1083, 10582));
        let e = CurveModel::parse("1,0,1,-16,-25").unwrap();
        assert_eq!(e.short_model().unwrap(), (-20115, -1094418));
        assert!(CurveModel::parse("0,0,0,0,0").is_err());
        assert!(matches!(CurveModel::parse("1,2,x"), Err(Error::Parse(_))));
    }

    #[test]
    fn minimal_models() {
        // 3136.b1 is minimal; scaling by u = 2 must be undone
        let e = CurveModel::parse("0,0,0,-1372,-19208").unwrap();
        assert_eq!(e.minimal_model().unwrap().a, e.a);
        let scaled = CurveModel::short(-7 * 16, 7 * 64).unwrap();
        let m = scaled.minimal_model().unwrap();
        assert_eq!(m.discriminant().unwrap(), 784);
        // 315.a2 short model scaled by 6 comes back to a model with the original discriminant
        let e = CurveModel::parse("1,-1,1,-68,182").unwrap();
        let big = CurveModel::short(-1083 * 81 * 16, 10582 * 729 * 64).unwrap();
        assert_eq!(big.minimal_discriminant().unwrap(), e.discriminant().unwrap());
    }
}
