//! Entanglement correction factors and cyclicity constants.

pub mod euler;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::adelic::{AdelicImage, ClassificationResult};
use crate::arith::{is_squarefree, prime_divisors, squarefree_part, DlogTable};
use crate::chain::generated_order;
use crate::ellq::{self, CurveModel, EntanglementData};
use crate::error::{Error, Result};
use crate::fingroup::character::ElementaryQuotient;
use crate::fingroup::GroupSlice;
use crate::modmat::{gl2_order, ResidueMatrix};
use crate::paperdata::Obstruction;
pub use euler::{euler_product, EulerProduct, Real, DEFAULT_EULER_BOUND};

pub type Rational = BigRational;

fn rat(n: i128, d: i128) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// `-1 / |GL_2(F_l)|`.
fn gl2_term(l: u64) -> Rational {
    rat(-1, gl2_order(l) as i128)
}

fn obstruction_of(result: &ClassificationResult) -> Result<Obstruction> {
    if !result.is_relative_serre {
        return Err(Error::Domain(format!("{} is not relative Serre", result.curve)));
    }
    result.obstruction.ok_or_else(|| Error::Domain("no mod-2 obstruction".into()))
}

/// Closed form of the correction factor for 2B and 2Cn curves.
///
/// 2B: `1 - prod_{l | D} -1/|GL_2(F_l)|` when the squarefree discriminant D is 1 mod 4, else 1.
/// 2Cn: `1 - prod_{l | f} -1/|GL_2(F_l)|` when the cubic conductor f is squarefree, else 1.
pub fn correction_factor(curve: &CurveModel, result: &ClassificationResult) -> Result<Rational> {
    let g = obstruction_of(result)?;
    let primes = match (g, &result.entanglements) {
        (Obstruction::Cs, _) => {
            return Err(Error::Domain("2Cs curves have C_E = 0; the correction factor is undefined".into()))
        }
        (Obstruction::B, _) => {
            let d = squarefree_part(curve.discriminant()?)?;
            if d.rem_euclid(4) != 1 {
                return Ok(Rational::one());
            }
            prime_divisors(d.unsigned_abs() as u64)
        }
        (Obstruction::Cn, Some(EntanglementData::Cn { f, .. })) => {
            if !is_squarefree(*f) {
                return Ok(Rational::one());
            }
            prime_divisors(*f)
        }
        (Obstruction::Cn, _) => return Err(Error::Domain("2Cn result without cubic data".into())),
    };
    let prod = primes.into_iter().fold(Rational::one(), |acc, l| acc * gl2_term(l));
    Ok(Rational::one() - prod)
}

/// The image at the squarefree level `m = rad(m_E)` and its prime components.
struct PrimeLevels {
    m: u32,
    primes: Vec<u32>,
    gens: Vec<ResidueMatrix>,
    /// `|G_E(l)|` for each prime.
    orders: Vec<u128>,
}

impl PrimeLevels {
    fn new(image: &AdelicImage) -> Result<PrimeLevels> {
        let primes: Vec<u32> = prime_divisors(image.modulus as u64).into_iter().map(|p| p as u32).collect();
        let m: u32 = primes.iter().product();
        let gens: Vec<ResidueMatrix> = image.fiber.generators.iter().map(|g| g.reduce(m)).collect::<Result<_>>()?;
        let mut orders = Vec::new();
        for &l in &primes {
            orders.push(Self::order_at(&gens, l)?);
        }
        Ok(PrimeLevels { m, primes, gens, orders })
    }

    fn order_at(gens: &[ResidueMatrix], d: u32) -> Result<u128> {
        if d == 1 {
            return Ok(1);
        }
        let r: Vec<ResidueMatrix> = gens.iter().map(|g| g.reduce(d)).collect::<Result<_>>()?;
        generated_order(d, &r)
    }

    fn naive_product(&self) -> Rational {
        self.orders.iter().fold(Rational::one(), |acc, &n| acc * (Rational::one() - rat(1, n as i128)))
    }
}

/// The correction factor as the general character sum over `Phi_E = prod G_E(l) / G_E(m)`,
/// with `E_{chi,l} = -1/(|G_E(l)| - 1)` when `chi` is nontrivial on `G_E(l)`.
///
/// Odd `l | m` have `G_E(l) = GL_2(F_l)`, whose characters factor through the determinant.
/// `Phi_E` must be elementary abelian at each prime dividing its order; anything else is an error.
pub fn general_correction_via_characters(image: &AdelicImage) -> Result<Rational> {
    let lv = PrimeLevels::new(image)?;
    let full: u128 = lv.orders.iter().product();
    let sub = generated_order(lv.m, &lv.gens)?;
    if full % sub != 0 {
        return Err(Error::Inconsistency(format!("|G_E({})| = {sub} does not divide {full}", lv.m)));
    }
    let phi = full / sub;
    // per prime p | |Phi|: the characters of order dividing p, as "nontrivial at l" flags
    let mut per_p: Vec<Vec<Vec<bool>>> = Vec::new();
    let mut found: u128 = 1;
    for p in prime_divisors(phi as u64) {
        let p = p as u32;
        let mut locals: Vec<Vec<Box<dyn Fn(&ResidueMatrix) -> u32>>> = Vec::new();
        for &l in &lv.primes {
            let mut fs: Vec<Box<dyn Fn(&ResidueMatrix) -> u32>> = vec![Box::new(|_| 0)];
            if l == 2 {
                let g2 = GroupSlice::generate(2, &lv.gens.iter().map(|g| g.reduce(2)).collect::<Result<Vec<_>>>()?)?;
                let eq = ElementaryQuotient::new(&g2, p)?;
                for f in eq.functionals() {
                    let eq = eq.clone();
                    fs.push(Box::new(move |x| eq.eval(&f, &x.reduce(2).unwrap()).unwrap() as u32));
                }
            } else if (l - 1) % p == 0 {
                let t = DlogTable::new(l as u64).expect("odd prime");
                for a in 1..p {
                    let t = t.clone();
                    fs.push(Box::new(move |x| {
                        let d = x.reduce(l).unwrap().det() as u64;
                        (a as u64 * t.log(d).unwrap() % p as u64) as u32
                    }));
                }
            }
            locals.push(fs);
        }
        let mut chars: Vec<Vec<bool>> = Vec::new();
        let mut idx = vec![0usize; locals.len()];
        loop {
            let trivial_on_image = lv.gens.iter().all(|g| {
                idx.iter().enumerate().map(|(i, &j)| locals[i][j](g)).sum::<u32>() % p == 0
            });
            if trivial_on_image {
                chars.push(idx.iter().map(|&j| j != 0).collect());
            }
            let mut k = 0;
            loop {
                if k == idx.len() {
                    break;
                }
                idx[k] += 1;
                if idx[k] < locals[k].len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
            if k == idx.len() {
                break;
            }
        }
        found *= chars.len() as u128;
        per_p.push(chars);
    }
    if found != phi {
        return Err(Error::Inconsistency(format!(
            "Phi_E has order {phi} but only {found} characters of prime order combinations; it is not elementary abelian"
        )));
    }
    // combine the p-parts and sum over nontrivial characters
    let mut combos: Vec<Vec<bool>> = vec![vec![false; lv.primes.len()]];
    for chars in &per_p {
        combos = combos.iter().flat_map(|c| chars.iter().map(move |d| c.iter().zip(d).map(|(a, b)| *a || *b).collect())).collect();
    }
    let mut total = Rational::one();
    for (n, c) in combos.iter().enumerate() {
        if n == 0 {
            debug_assert!(c.iter().all(|b| !b));
            continue;
        }
        let mut term = Rational::one();
        for (i, &nontrivial) in c.iter().enumerate() {
            if nontrivial {
                term *= rat(-1, lv.orders[i] as i128 - 1);
            }
        }
        total += term;
    }
    Ok(total)
}

/// The correction factor from first principles: the density of elements of `G_E(m)` that are
/// nontrivial modulo every `l | m` (inclusion-exclusion over kernels of reduction), divided by the
/// product of the local densities `1 - 1/|G_E(l)|`.
pub fn correction_by_counting(image: &AdelicImage) -> Result<Rational> {
    let lv = PrimeLevels::new(image)?;
    let mut density = Rational::zero();
    for mask in 0u32..1 << lv.primes.len() {
        let d: u32 = (0..lv.primes.len()).filter(|i| mask >> i & 1 == 1).map(|i| lv.primes[i]).product();
        let term = rat(1, PrimeLevels::order_at(&lv.gens, d)? as i128);
        if mask.count_ones() % 2 == 0 {
            density += term;
        } else {
            density -= term;
        }
    }
    Ok(density / lv.naive_product())
}

/// `C_E = prefactor * prod_{l odd} (1 - 1/|GL_2(F_l)|)`.
#[derive(Clone, Debug, Serialize)]
pub struct CyclicityConstant {
    #[serde(serialize_with = "ser_rat")]
    pub prefactor: Rational,
    pub euler_product: Real,
    /// Bound on `|log(full product / truncated product)|`.
    pub tail_bound: Real,
    #[serde(rename = "L")]
    pub bound: u64,
    pub value: Real,
}

pub fn ser_rat<S: serde::Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format_rational(r))
}

pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Cyclicity constant from the closed-form correction factor, the Euler product truncated at `bound`.
pub fn cyclicity_constant(curve: &CurveModel, result: &ClassificationResult, bound: u64) -> Result<CyclicityConstant> {
    let g = obstruction_of(result)?;
    let p = euler_product::<Real>(bound)?;
    let prefactor = match g {
        Obstruction::Cs => Rational::zero(),
        Obstruction::B => correction_factor(curve, result)? * rat(1, 2),
        Obstruction::Cn => correction_factor(curve, result)? * rat(2, 3),
    };
    let value = to_real(&prefactor) * p.value;
    Ok(CyclicityConstant { prefactor, euler_product: p.value, tail_bound: p.tail_bound, bound, value })
}

pub fn to_real(r: &Rational) -> Real {
    use num_traits::ToPrimitive;
    r.to_f64().expect("finite rational")
}

/// Largest x accepted by [`empirical_cyclicity`].
pub const EMPIRICAL_MAX: u64 = 1_000_000;

/// Counts of good primes `p <= x` and of those with `E(F_p)` cyclic; `None` when there are none.
pub fn empirical_cyclicity(curve: &CurveModel, x: u64) -> Result<Option<(u64, u64)>> {
    if x > EMPIRICAL_MAX {
        return Err(Error::ResourceCap(format!("x = {x} exceeds {EMPIRICAL_MAX}")));
    }
    let e = curve.minimal_model()?;
    let (mut cyclic, mut total) = (0u64, 0u64);
    for p in crate::arith::primes_up_to(x) {
        if !ellq::is_good_prime(&e, p) {
            continue;
        }
        total += 1;
        if ellq::count::is_cyclic_reduction(&e, p)? {
            cyclic += 1;
        }
    }
    Ok((total > 0).then_some((cyclic, total)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adelic::{classify_with_image, ClassificationInput, OddMode};
    use crate::paperdata::appendix_rows;

    fn run(name: &str) -> (CurveModel, ClassificationResult, AdelicImage) {
        let r = appendix_rows().iter().find(|r| r.name() == name).unwrap();
        let mut i = ClassificationInput::new(r.curve.clone()).with_label(r.label);
        i.mode = OddMode::Attested;
        let (res, img) = classify_with_image(&i).unwrap();
        (r.curve.clone(), res, img.unwrap())
    }

    #[test]
    fn closed_forms() {
        let (e, res, _) = run("392.a1");
        assert_eq!(correction_factor(&e, &res).unwrap(), rat(2017, 2016));
        let (e, res, _) = run("102.a1");
        assert_eq!(correction_factor(&e, &res).unwrap(), rat(78337, 78336));
        let (e, res, _) = run("1152.d1");
        assert_eq!(correction_factor(&e, &res).unwrap(), Rational::one());
        let (e, res, _) = run("315.a2");
        assert!(matches!(correction_factor(&e, &res), Err(Error::Domain(_))));
        assert_eq!(cyclicity_constant(&e, &res, 1000).unwrap().value, 0.0);
    }

    #[test]
    fn counting_agrees_with_characters() {
        for name in ["392.a1", "102.a1", "69.a1", "1152.d1"] {
            let (_, _, img) = run(name);
            assert_eq!(general_correction_via_characters(&img).unwrap(), correction_by_counting(&img).unwrap(), "{name}");
        }
        let (_, _, img) = run("392.a1");
        // G_E(14): 2/3 of the elements are nontrivial at both 2 and 7
        assert_eq!(correction_by_counting(&img).unwrap(), rat(2016, 2015));
    }

    #[test]
    fn empirical_edge() {
        let e = CurveModel::parse("0,0,0,-7,7").unwrap();
        assert_eq!(empirical_cyclicity(&e, 2).unwrap(), None);
        assert!(empirical_cyclicity(&e, 2_000_000).is_err());
    }
}
