//! Certifying surjectivity of `rho_{E,l}` (and of `rho_{E,9}` for l = 3) from Frobenius traces.
//!
//! A proper subgroup of `GL_2` with surjective determinant lies in a maximal one; each maximal
//! type misses some characteristic polynomials, and a Frobenius with such a polynomial rules it
//! out. For l >= 5 the classical witnesses suffice. For l = 3 the maximal subgroups of `GL_2(F_3)`
//! and the proper subgroups of `GL_2(Z/9)` surjecting onto `GL_2(F_3)` are enumerated.

use std::collections::BTreeSet;
use std::sync::OnceLock;

use rustc_hash::FxHashSet;
use serde::Serialize;

use crate::arith::{is_prime, jacobi, primes_up_to};
use crate::ellq::{self, CurveModel};
use crate::error::{Error, Result};
use crate::fingroup::lattice::all_subgroups;
use crate::fingroup::GroupSlice;
use crate::modmat::ResidueMatrix;

/// Odd primes l up to this bound are sieved; beyond it surjectivity is assumed.
pub const CERTIFY_MAX_ELL: u64 = 37;

/// Smallest prime bound accepted for certification.
pub const MIN_PRIME_BOUND: u64 = 50;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Surjectivity {
    Certified,
    Unknown,
}

type PolySet = BTreeSet<(u32, u32)>;

fn maximal_by_inclusion(groups: Vec<GroupSlice>) -> Vec<GroupSlice> {
    let mut out: Vec<GroupSlice> = Vec::new();
    for (i, g) in groups.iter().enumerate() {
        let dominated = groups.iter().enumerate().any(|(j, h)| j != i && h.order() > g.order() && g.is_subgroup_of(h));
        if !dominated && !out.contains(g) {
            out.push(g.clone());
        }
    }
    out
}

fn polys(g: &GroupSlice) -> PolySet {
    g.elements().map(|x| (x.trace(), x.det())).collect()
}

/// Distinct characteristic polynomial sets (conjugate subgroups share one).
fn poly_sets(groups: &[GroupSlice]) -> Vec<PolySet> {
    let mut out: Vec<PolySet> = groups.iter().map(polys).collect();
    out.sort();
    out.dedup();
    out
}

/// Characteristic polynomial sets of the maximal proper determinant-surjective subgroups mod 3 and
/// of the maximal proper determinant-surjective subgroups of `GL_2(Z/9)` that reduce onto `GL_2(F_3)`.
///
/// Modulo 3 the characteristic polynomial alone cannot exclude the nonsplit Cartan normalizer, so the
/// mod-3 sets also record whether the element is scalar.
pub struct ThreeAdicObstructions {
    pub mod3: Vec<ClassSet>,
    pub mod9: Vec<PolySet>,
}

type ClassSet = BTreeSet<(u32, u32, bool)>;

fn class_sets(groups: &[GroupSlice]) -> Vec<ClassSet> {
    let mut out: Vec<ClassSet> = groups
        .iter()
        .map(|g| g.elements().map(|x| (x.trace(), x.det(), x.entries()[1] == 0 && x.entries()[2] == 0 && x.entries()[0] == x.entries()[3])).collect())
        .collect();
    out.sort();
    out.dedup();
    out
}

fn two_generators(g: &GroupSlice) -> (ResidueMatrix, ResidueMatrix) {
    let els: Vec<ResidueMatrix> = g.elements().collect();
    for a in &els {
        for b in &els {
            if GroupSlice::generate(g.modulus(), &[*a, *b]).map_or(false, |h| h.order() == g.order()) {
                return (*a, *b);
            }
        }
    }
    unreachable!("GL_2(F_3) is 2-generated")
}

fn compute_three_adic() -> Result<ThreeAdicObstructions> {
    let gl3 = GroupSlice::gl2(3)?;
    let proper3: Vec<GroupSlice> =
        all_subgroups(&gl3, 512)?.into_iter().filter(|h| h.has_full_det() && h.order() < gl3.order()).collect();
    let mod3 = class_sets(&maximal_by_inclusion(proper3));

    let (s, t) = two_generators(&gl3);
    let (s, t) = (s.lift(9), t.lift(9));
    let kernel_elt = |x: [i64; 4]| ResidueMatrix::new(9, [1 + 3 * x[0], 3 * x[1], 3 * x[2], 1 + 3 * x[3]]);
    let all_x: Vec<[i64; 4]> =
        (0..81).map(|k| [k % 3, (k / 3) % 3, (k / 9) % 3, k / 27]).collect();
    // H meets the kernel in an F_3[GL_2(F_3)]-submodule: 0, the scalars or sl_2
    let scalars = vec![kernel_elt([1, 0, 0, 1])];
    let sl2 = vec![kernel_elt([1, 0, 0, 2]), kernel_elt([0, 1, 0, 0]), kernel_elt([0, 0, 1, 0])];
    let reps_mod_scalar: Vec<[i64; 4]> = all_x.iter().copied().filter(|x| x[3] == 0).collect();
    let reps_mod_sl2: Vec<[i64; 4]> = (0..3).map(|a| [a, 0, 0, 0]).collect();
    let full = GroupSlice::gl2(9)?.order() as usize;
    let mut seen: FxHashSet<Vec<u64>> = FxHashSet::default();
    let mut proper9 = Vec::new();
    for (v, reps) in [(vec![], &all_x), (scalars, &reps_mod_scalar), (sl2, &reps_mod_sl2)] {
        for x in reps.iter() {
            for y in reps.iter() {
                let mut gens = vec![s.mul_same(&kernel_elt(*x)), t.mul_same(&kernel_elt(*y))];
                gens.extend(v.iter().copied());
                let h = match GroupSlice::generate_capped(9, &gens, full / 3) {
                    Ok(h) => h,
                    Err(Error::ResourceCap(_)) => continue,
                    Err(e) => return Err(e),
                };
                if h.has_full_det() && seen.insert(h.indices().to_vec()) {
                    proper9.push(h);
                }
            }
        }
    }
    let mod9 = poly_sets(&maximal_by_inclusion(proper9));
    Ok(ThreeAdicObstructions { mod3, mod9 })
}

static THREE_ADIC: OnceLock<std::result::Result<ThreeAdicObstructions, String>> = OnceLock::new();

pub fn three_adic_obstructions() -> Result<&'static ThreeAdicObstructions> {
    THREE_ADIC
        .get_or_init(|| compute_three_adic().map_err(|e| e.to_string()))
        .as_ref()
        .map_err(|e| Error::Inconsistency(e.clone()))
}

/// Frobenius traces at good primes `p <= bound`, `p != l`.
fn traces(curve: &CurveModel, ell: u64, bound: u64) -> Result<Vec<(u64, i64)>> {
    let mut out = Vec::new();
    for p in primes_up_to(bound) {
        if p == ell || p == 2 || !ellq::is_good_prime(curve, p) {
            continue;
        }
        out.push((p, ellq::count::ap_bounded(curve, p, bound.max(ellq::count::DEFAULT_PRIME_BOUND))?));
    }
    Ok(out)
}

fn residue(x: i64, m: u64) -> u64 {
    x.rem_euclid(m as i64) as u64
}

/// `(trace, det, scalar)` of Frobenius mod 3, when the scalar flag can be decided.
///
/// Only the polynomial `(x - 1)^2` is ambiguous in a way we resolve: Frobenius is the identity on
/// `E[3]` exactly when all nine 3-torsion points are rational over `F_p`.
fn frobenius_class_mod3(curve: &CurveModel, p: u64, a: i64) -> Result<Option<(u32, u32, bool)>> {
    let (t, d) = (residue(a, 3) as u32, (p % 3) as u32);
    let repeated = (t * t + 4 * (3 - d)) % 3 == 0;
    if !repeated {
        return Ok(Some((t, d, false)));
    }
    if d == 1 && t == 2 {
        let n = (p as i64 + 1 - a) as u64;
        let full = p >= 5 && n % 9 == 0 && ellq::count::torsion_count(curve, p, 3)? == 9;
        return Ok(Some((t, d, full)));
    }
    Ok(None)
}

/// Certified when Frobenius elements at good primes up to `prime_bound` leave no room for a proper
/// image; Unknown otherwise (never a claim of non-surjectivity).
pub fn certify_mod_l_surjectivity(curve: &CurveModel, ell: u64, prime_bound: u64) -> Result<Surjectivity> {
    if ell % 2 == 0 || !is_prime(ell as u128) {
        return Err(Error::Domain(format!("{ell} is not an odd prime")));
    }
    if prime_bound < MIN_PRIME_BOUND {
        return Err(Error::Domain(format!("prime bound {prime_bound} is below {MIN_PRIME_BOUND}")));
    }
    let tr = traces(curve, ell, prime_bound)?;
    let ok = if ell == 3 {
        let obs = three_adic_obstructions()?;
        let mut classes = Vec::new();
        for &(p, a) in &tr {
            if let Some(c) = frobenius_class_mod3(curve, p, a)? {
                classes.push(c);
            }
        }
        let mod3 = obs.mod3.iter().all(|s| classes.iter().any(|c| !s.contains(c)));
        let mod9 = obs.mod9.iter().all(|s| tr.iter().any(|&(p, a)| !s.contains(&(residue(a, 9) as u32, (p % 9) as u32))));
        mod3 && mod9
    } else {
        let l = ell as i128;
        let (mut borel_ns, mut nns, mut exceptional) = (false, false, false);
        for &(p, a) in &tr {
            let a = a as i128;
            let p = p as i128;
            if a.rem_euclid(l) == 0 {
                continue;
            }
            let disc = a * a - 4 * p;
            match jacobi(disc, ell as u128) {
                -1 => borel_ns = true,
                1 => nns = true,
                _ => {}
            }
            // u = a^2 / p in F_l
            let pinv = crate::arith::inv_mod(p as i64, ell).expect("p != l") as i128;
            let u = (a * a).rem_euclid(l) * pinv % l;
            if ![0, 1, 2, 4].contains(&u) && (u * u - 3 * u + 1).rem_euclid(l) != 0 {
                exceptional = true;
            }
        }
        borel_ns && nns && exceptional
    };
    Ok(if ok { Surjectivity::Certified } else { Surjectivity::Unknown })
}

/// Outcome of sieving every odd prime up to [`CERTIFY_MAX_ELL`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OddSurjectivity {
    pub certified: Vec<u64>,
    pub unknown: Vec<u64>,
    pub heuristic_beyond: u64,
}

impl OddSurjectivity {
    pub fn all_certified(&self) -> bool {
        self.unknown.is_empty()
    }
}

pub fn certify_odd_primes(curve: &CurveModel, prime_bound: u64) -> Result<OddSurjectivity> {
    let mut certified = Vec::new();
    let mut unknown = Vec::new();
    for ell in primes_up_to(CERTIFY_MAX_ELL).into_iter().filter(|&l| l > 2) {
        match certify_mod_l_surjectivity(curve, ell, prime_bound)? {
            Surjectivity::Certified => certified.push(ell),
            Surjectivity::Unknown => unknown.push(ell),
        }
    }
    Ok(OddSurjectivity { certified, unknown, heuristic_beyond: CERTIFY_MAX_ELL })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_adic_structure() {
        let t = three_adic_obstructions().unwrap();
        // Borel and the nonsplit Cartan normalizer; the split one sits inside a 2-Sylow
        assert_eq!(t.mod3.len(), 2);
        // the nonsplit Cartan normalizer realizes every polynomial but no nontrivial unipotent
        assert!(t.mod3.iter().any(|s| s.len() == 6 && !s.contains(&(2, 1, false))));
        assert!(!t.mod9.is_empty());
        let all9: PolySet = polys(&GroupSlice::gl2(9).unwrap());
        for s in &t.mod9 {
            assert!(s.len() < all9.len(), "a maximal subgroup mod 9 realizes every characteristic polynomial");
        }
    }

    #[test]
    fn isogeny_is_never_certified() {
        // 11.a1 has a rational 5-isogeny
        let e = CurveModel::parse("0,-1,1,-7820,-263580").unwrap();
        assert_eq!(certify_mod_l_surjectivity(&e, 5, 2000).unwrap(), Surjectivity::Unknown);
        assert_eq!(certify_mod_l_surjectivity(&e, 7, 2000).unwrap(), Surjectivity::Certified);
    }

    #[test]
    fn appendix_examples() {
        let e = CurveModel::parse("1,-1,1,-68,182").unwrap();
        assert_eq!(certify_mod_l_surjectivity(&e, 5, 1000).unwrap(), Surjectivity::Certified);
        let e = CurveModel::parse("0,0,0,-7,7").unwrap();
        assert_eq!(certify_mod_l_surjectivity(&e, 3, 1000).unwrap(), Surjectivity::Certified);
        assert!(certify_mod_l_surjectivity(&e, 9, 1000).is_err());
        assert!(certify_mod_l_surjectivity(&e, 5, 10).is_err());
    }
}
