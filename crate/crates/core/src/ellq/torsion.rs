//! Shape of the 2-torsion: factorization of the 2-division cubic over Q.

use serde::Serialize;

use super::CurveModel;
use crate::error::Result;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum TwoTorsionShape {
    /// `(x - r1)(x - r2)(x - r3)`, roots ascending.
    Split(i128, i128, i128),
    /// `(x^2 + a x + b)(x + c)` with irreducible quadratic.
    PartialSplit(i128, i128, i128),
    /// Irreducible `x^3 + A x + B` with square discriminant (cyclic cubic field).
    Irreducible(i128, i128),
    /// Irreducible cubic with non-square discriminant.
    Full,
}

impl TwoTorsionShape {
    pub fn class_name(&self) -> &'static str {
        match self {
            TwoTorsionShape::Split(..) => "2Cs",
            TwoTorsionShape::PartialSplit(..) => "2B",
            TwoTorsionShape::Irreducible(..) => "2Cn",
            TwoTorsionShape::Full => "none",
        }
    }
}

fn eval(a: i128, b: i128, x: i128) -> Option<i128> {
    x.checked_mul(x)?.checked_mul(x)?.checked_add(a.checked_mul(x)?)?.checked_add(b)
}

/// Integer roots of `x^3 + a x + b`, ascending, with multiplicity.
///
/// Real roots are located numerically and confirmed by exact evaluation at nearby integers.
pub fn integer_roots(a: i128, b: i128) -> Vec<i128> {
    let (af, bf) = (a as f64, b as f64);
    let mut approx: Vec<f64> = Vec::new();
    let disc = -4.0 * af * af * af - 27.0 * bf * bf;
    if disc > 0.0 {
        // three real roots: trigonometric form
        let r = 2.0 * (-af / 3.0).sqrt();
        let phi = ((3.0 * bf) / (af * r)).clamp(-1.0, 1.0).acos() / 3.0;
        for k in 0..3 {
            approx.push(r * (phi - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos());
        }
    } else {
        // Cardano for the single real root
        let q = bf / 2.0;
        let d = q * q + af * af * af / 27.0;
        let s = d.max(0.0).sqrt();
        approx.push((-q + s).cbrt() + (-q - s).cbrt());
        if a == 0 {
            approx.push((-bf).cbrt());
        }
    }
    let mut roots = Vec::new();
    for x in approx {
        let c = x.round() as i128;
        for d in -2..=2 {
            let y = c + d;
            if eval(a, b, y) == Some(0) && !roots.contains(&y) {
                roots.push(y);
            }
        }
    }
    roots.sort_unstable();
    // repeated roots are impossible for a nonsingular curve
    roots
}

fn is_square(n: i128) -> bool {
    if n < 0 {
        return false;
    }
    let r = (n as f64).sqrt() as i128;
    (r.saturating_sub(2)..=r + 2).any(|s| s >= 0 && s.checked_mul(s) == Some(n))
}

/// Exact integer square root of a perfect square.
pub fn isqrt_exact(n: i128) -> Option<i128> {
    if n < 0 {
        return None;
    }
    let r = (n as f64).sqrt() as i128;
    (r.saturating_sub(2)..=r + 2).find(|&s| s >= 0 && s.checked_mul(s) == Some(n))
}

/// `-4A^3 - 27B^2`, the discriminant of `x^3 + A x + B`.
pub fn cubic_discriminant(a: i128, b: i128) -> Result<i128> {
    let big = || crate::Error::ResourceCap("cubic discriminant overflows 128 bits".into());
    let a3 = a.checked_mul(a).and_then(|x| x.checked_mul(a)).and_then(|x| x.checked_mul(-4)).ok_or_else(big)?;
    let b2 = b.checked_mul(b).and_then(|x| x.checked_mul(27)).ok_or_else(big)?;
    a3.checked_sub(b2).ok_or_else(big)
}

pub fn classify_mod2(curve: &CurveModel) -> Result<TwoTorsionShape> {
    let (a, b) = curve.short_model()?;
    let roots = integer_roots(a, b);
    Ok(match roots.len() {
        3 => TwoTorsionShape::Split(roots[0], roots[1], roots[2]),
        1 => {
            let r = roots[0];
            TwoTorsionShape::PartialSplit(r, a + r * r, -r)
        }
        0 => {
            if is_square(cubic_discriminant(a, b)?) {
                TwoTorsionShape::Irreducible(a, b)
            } else {
                TwoTorsionShape::Full
            }
        }
        _ => unreachable!("a nonsingular cubic has one or three rational roots when it has any"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_shapes() {
        let e = CurveModel::parse("1,-1,1,-68,182").unwrap();
        assert_eq!(classify_mod2(&e).unwrap(), TwoTorsionShape::Split(-37, 11, 26));
        let e = CurveModel::parse("1,0,1,-16,-25").unwrap();
        assert_eq!(classify_mod2(&e).unwrap(), TwoTorsionShape::PartialSplit(-78, -14031, 78));
        let e = CurveModel::parse("0,0,0,-7,7").unwrap();
        assert_eq!(classify_mod2(&e).unwrap(), TwoTorsionShape::Irreducible(-7, 7));
        let e = CurveModel::parse("0,0,0,125,-1250").unwrap();
        assert_eq!(classify_mod2(&e).unwrap(), TwoTorsionShape::Full);
    }

    #[test]
    fn roots_exact() {
        assert_eq!(integer_roots(-1083, 10582), vec![-37, 11, 26]);
        assert_eq!(integer_roots(0, -8), vec![2]);
        assert_eq!(integer_roots(-7, 7), Vec::<i128>::new());
        // roots near 10^6
        let (r1, r2) = (1_000_003i128, -999_999i128);
        let r3 = -(r1 + r2);
        let a = r1 * r2 + r1 * r3 + r2 * r3;
        let b = -r1 * r2 * r3;
        assert_eq!(integer_roots(a, b), {
            let mut v = vec![r1, r2, r3];
            v.sort();
            v
        });
    }
}
