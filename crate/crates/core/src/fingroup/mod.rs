//! Finite subgroups of GL_2(Z/N) given by generators, with their element sets materialized.

pub mod character;
pub mod fiber;
pub mod lattice;
pub mod quotient;

use std::collections::VecDeque;
use std::fmt;

use rustc_hash::FxHashSet;

use crate::error::{Error, Result};
use crate::modmat::{self, congruence_kernel_generators, gl2_order, ResidueMatrix};

/// Largest element set we are willing to materialize.
pub const DEFAULT_CAP: usize = 10_000_000;

/// A subgroup of `GL_2(Z/N)`: generators plus the sorted packed indices of all elements.
#[derive(Clone)]
pub struct GroupSlice {
    modulus: u32,
    gens: Vec<ResidueMatrix>,
    elems: Vec<u64>,
}

impl fmt::Debug for GroupSlice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GroupSlice(mod {}, order {}, gens {})", self.modulus, self.order(), modmat::format_list(&self.gens))
    }
}

impl PartialEq for GroupSlice {
    fn eq(&self, other: &Self) -> bool {
        self.modulus == other.modulus && self.elems == other.elems
    }
}

impl Eq for GroupSlice {}

fn check_modulus(modulus: u32, gens: &[ResidueMatrix]) -> Result<()> {
    if modulus > 65_535 {
        return Err(Error::ResourceCap(format!("modulus {modulus} too large to materialize")));
    }
    for g in gens {
        if g.modulus() != modulus {
            return Err(Error::ModulusMismatch(modulus, g.modulus()));
        }
        if !g.is_invertible() {
            return Err(Error::NonUnit { det: g.det(), modulus });
        }
    }
    Ok(())
}

/// Breadth-first closure of `start` under right multiplication by `gens`.
fn close(modulus: u32, gens: &[ResidueMatrix], start: &[u64], cap: usize) -> Result<Vec<u64>> {
    let mut seen: FxHashSet<u64> = start.iter().copied().collect();
    let mut queue: VecDeque<u64> = start.iter().copied().collect();
    let id = ResidueMatrix::identity(modulus).index();
    if seen.insert(id) {
        queue.push_back(id);
    }
    while let Some(x) = queue.pop_front() {
        let xm = ResidueMatrix::from_index(modulus, x);
        for g in gens {
            let y = xm.mul_same(g).index();
            if seen.insert(y) {
                if seen.len() > cap {
                    return Err(Error::ResourceCap(format!("group closure exceeded {cap} elements")));
                }
                queue.push_back(y);
            }
        }
    }
    let mut v: Vec<u64> = seen.into_iter().collect();
    v.sort_unstable();
    Ok(v)
}

impl GroupSlice {
    pub fn generate(modulus: u32, gens: &[ResidueMatrix]) -> Result<GroupSlice> {
        GroupSlice::generate_capped(modulus, gens, DEFAULT_CAP)
    }

    pub fn generate_capped(modulus: u32, gens: &[ResidueMatrix], cap: usize) -> Result<GroupSlice> {
        check_modulus(modulus, gens)?;
        let elems = close(modulus, gens, &[], cap)?;
        Ok(GroupSlice { modulus, gens: gens.to_vec(), elems })
    }

    /// Build from a known element list that is closed under multiplication.
    pub(crate) fn from_parts(modulus: u32, gens: Vec<ResidueMatrix>, mut elems: Vec<u64>) -> GroupSlice {
        elems.sort_unstable();
        elems.dedup();
        GroupSlice { modulus, gens, elems }
    }

    pub fn trivial(modulus: u32) -> GroupSlice {
        GroupSlice { modulus, gens: vec![], elems: vec![ResidueMatrix::identity(modulus).index()] }
    }

    pub fn gl2(modulus: u32) -> Result<GroupSlice> {
        GroupSlice::generate(modulus, &modmat::gl2_generators(modulus))
    }

    #[inline]
    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    pub fn gens(&self) -> &[ResidueMatrix] {
        &self.gens
    }

    #[inline]
    pub fn order(&self) -> u64 {
        self.elems.len() as u64
    }

    /// Sorted packed indices of the elements.
    pub fn indices(&self) -> &[u64] {
        &self.elems
    }

    pub fn elements(&self) -> impl Iterator<Item = ResidueMatrix> + '_ {
        let n = self.modulus;
        self.elems.iter().map(move |&i| ResidueMatrix::from_index(n, i))
    }

    #[inline]
    pub fn position(&self, m: &ResidueMatrix) -> Option<usize> {
        if m.modulus() != self.modulus {
            return None;
        }
        self.elems.binary_search(&m.index()).ok()
    }

    #[inline]
    pub fn contains(&self, m: &ResidueMatrix) -> bool {
        self.position(m).is_some()
    }

    pub fn is_subgroup_of(&self, other: &GroupSlice) -> bool {
        self.modulus == other.modulus
            && self.order() <= other.order()
            && other.order() % self.order() == 0
            && self.elems.iter().all(|i| other.elems.binary_search(i).is_ok())
    }

    pub fn index_in(&self, other: &GroupSlice) -> Result<u64> {
        if !self.is_subgroup_of(other) {
            return Err(Error::Domain("not a subgroup".into()));
        }
        Ok(other.order() / self.order())
    }

    /// Index in the full `GL_2(Z/N)`.
    pub fn gl2_index(&self) -> u64 {
        (gl2_order(self.modulus as u64) / self.order() as u128) as u64
    }

    /// `<self, extra>`, closing from the current element set.
    pub fn join_with(&self, extra: &[ResidueMatrix]) -> Result<GroupSlice> {
        check_modulus(self.modulus, extra)?;
        let fresh: Vec<ResidueMatrix> = extra.iter().filter(|g| !self.contains(g)).copied().collect();
        if fresh.is_empty() {
            return Ok(self.clone());
        }
        let mut gens = self.gens.clone();
        gens.extend(fresh);
        let elems = close(self.modulus, &gens, &self.elems, DEFAULT_CAP)?;
        Ok(GroupSlice { modulus: self.modulus, gens, elems })
    }

    pub fn join(&self, other: &GroupSlice) -> Result<GroupSlice> {
        self.join_with(&other.gens)
    }

    pub fn intersection(&self, other: &GroupSlice) -> GroupSlice {
        let (small, big) = if self.order() <= other.order() { (self, other) } else { (other, self) };
        let elems: Vec<u64> = small.elems.iter().copied().filter(|i| big.elems.binary_search(i).is_ok()).collect();
        let gens = small_generating_set(small.modulus, &elems);
        GroupSlice { modulus: self.modulus, gens, elems }
    }

    pub fn reduce_mod(&self, m: u32) -> Result<GroupSlice> {
        if m == 0 || self.modulus % m != 0 {
            return Err(Error::Domain(format!("{m} does not divide {}", self.modulus)));
        }
        let gens: Vec<ResidueMatrix> = self.gens.iter().map(|g| g.reduce(m).unwrap()).collect();
        GroupSlice::generate(m, &gens)
    }

    /// Full preimage in `GL_2(Z/n)` under reduction modulo the current modulus.
    pub fn preimage(&self, n: u32) -> Result<GroupSlice> {
        if n % self.modulus != 0 {
            return Err(Error::Domain(format!("{} does not divide {n}", self.modulus)));
        }
        let expected = self.order() as u128 * gl2_order(n as u64) / gl2_order(self.modulus as u64);
        if expected > DEFAULT_CAP as u128 {
            return Err(Error::ResourceCap(format!("preimage of order {expected}")));
        }
        let mut gens: Vec<ResidueMatrix> = self.gens.iter().map(|g| lift_unit(g, n)).collect();
        gens.extend(congruence_kernel_generators(n, self.modulus));
        let g = GroupSlice::generate(n, &gens)?;
        debug_assert_eq!(g.order() as u128, expected);
        Ok(g)
    }

    /// `g H g^-1`.
    pub fn conjugate(&self, g: &ResidueMatrix) -> GroupSlice {
        let gi = g.inv().expect("invertible conjugator");
        let conj = |x: ResidueMatrix| g.mul_same(&x).mul_same(&gi);
        let elems: Vec<u64> = self.elements().map(|x| conj(x).index()).collect();
        GroupSlice::from_parts(self.modulus, self.gens.iter().map(|&x| conj(x)).collect(), elems)
    }

    /// Sorted element set of `g H g^-1`, without generators.
    pub fn conjugate_set(&self, g: &ResidueMatrix, gi: &ResidueMatrix) -> Vec<u64> {
        let mut v: Vec<u64> = self.elements().map(|x| g.mul_same(&x).mul_same(gi).index()).collect();
        v.sort_unstable();
        v
    }

    pub fn is_normal_in(&self, g: &GroupSlice) -> bool {
        g.gens.iter().all(|x| {
            let xi = x.inv().unwrap();
            self.gens.iter().all(|h| self.contains(&x.mul_same(h).mul_same(&xi)))
        })
    }

    /// Smallest normal subgroup of `self` containing `seeds`.
    pub fn normal_closure(&self, seeds: &[ResidueMatrix]) -> Result<GroupSlice> {
        let mut n = GroupSlice::generate(self.modulus, seeds)?;
        loop {
            let mut extra = Vec::new();
            for x in &self.gens {
                let xi = x.inv().unwrap();
                for h in n.gens.iter() {
                    let c = x.mul_same(h).mul_same(&xi);
                    if !n.contains(&c) && !extra.contains(&c) {
                        extra.push(c);
                    }
                }
            }
            if extra.is_empty() {
                return Ok(n);
            }
            n = n.join_with(&extra)?;
        }
    }

    pub fn commutator_subgroup(&self) -> Result<GroupSlice> {
        let mut seeds = Vec::new();
        for (i, a) in self.gens.iter().enumerate() {
            for b in &self.gens[i + 1..] {
                let c = a.mul_same(b).mul_same(&a.inv().unwrap()).mul_same(&b.inv().unwrap());
                if !c.is_identity() {
                    seeds.push(c);
                }
            }
        }
        self.normal_closure(&seeds)
    }

    pub fn is_abelian(&self) -> bool {
        self.gens.iter().enumerate().all(|(i, a)| self.gens[i + 1..].iter().all(|b| a.mul_same(b) == b.mul_same(a)))
    }

    /// Sorted distinct determinants.
    pub fn det_image(&self) -> Vec<u32> {
        let mut v: Vec<u32> = self.elements().map(|x| x.det()).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn has_full_det(&self) -> bool {
        self.det_image().len() as u64 == crate::arith::euler_phi(self.modulus as u64)
    }

    /// Sorted distinct characteristic polynomials.
    pub fn char_polys(&self) -> Vec<modmat::CharPoly> {
        let mut v: Vec<_> = self.elements().map(|x| x.char_poly()).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Smallest level `d | N` such that the group is the full preimage of its image mod `d`.
    pub fn level(&self) -> Result<u32> {
        let n = self.modulus;
        let mut best = n;
        for d in divisors(n) {
            if d >= best {
                break;
            }
            let r = self.reduce_mod(d)?;
            if r.order() as u128 * gl2_order(n as u64) / gl2_order(d as u64) == self.order() as u128 {
                best = d;
            }
        }
        Ok(best)
    }

    /// A short generating list, chosen greedily from the elements.
    pub fn with_small_generators(&self) -> GroupSlice {
        GroupSlice { modulus: self.modulus, gens: small_generating_set(self.modulus, &self.elems), elems: self.elems.clone() }
    }
}

pub fn divisors(n: u32) -> Vec<u32> {
    let mut v: Vec<u32> = (1..=n).filter(|d| n % d == 0).collect();
    v.sort_unstable();
    v
}

/// Lift an invertible matrix mod m to an invertible matrix mod n (m | n).
pub fn lift_unit(g: &ResidueMatrix, n: u32) -> ResidueMatrix {
    let m = g.modulus();
    let base = g.lift(n);
    if base.is_invertible() {
        return base;
    }
    // adjust by multiples of m at the primes of n not dividing m
    let [a, b, c, d] = base.entries().map(|x| x as i64);
    let steps = n / m;
    for s in 0..steps as i64 {
        for t in 0..steps as i64 {
            let cand = ResidueMatrix::new(n, [a + s * m as i64, b, c, d + t * m as i64]);
            if cand.is_invertible() {
                return cand;
            }
        }
    }
    for s in 0..steps as i64 {
        for t in 0..steps as i64 {
            let cand = ResidueMatrix::new(n, [a, b + s * m as i64, c + t * m as i64, d]);
            if cand.is_invertible() {
                return cand;
            }
        }
    }
    panic!("no invertible lift of {g:?} to modulus {n}");
}

/// Greedy generating set for a closed element list.
pub fn small_generating_set(modulus: u32, elems: &[u64]) -> Vec<ResidueMatrix> {
    let mut gens: Vec<ResidueMatrix> = Vec::new();
    let mut have: Vec<u64> = vec![ResidueMatrix::identity(modulus).index()];
    // prefer elements of large order so that few generators are needed
    let mut order_sorted: Vec<(u64, u64)> =
        elems.iter().map(|&i| (ResidueMatrix::from_index(modulus, i).order(), i)).collect();
    order_sorted.sort_unstable_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    for (_, i) in order_sorted {
        if have.len() == elems.len() {
            break;
        }
        if have.binary_search(&i).is_ok() {
            continue;
        }
        gens.push(ResidueMatrix::from_index(modulus, i));
        have = close(modulus, &gens, &have, usize::MAX).expect("uncapped closure");
    }
    gens
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(n: u32, e: [i64; 4]) -> ResidueMatrix {
        ResidueMatrix::new(n, e)
    }

    #[test]
    fn closures_and_orders() {
        let k1 = GroupSlice::generate(4, &[m(4, [3, 0, 0, 1]), m(4, [1, 1, 1, 0])]).unwrap();
        assert_eq!(k1.order(), 24);
        assert_eq!(k1.gl2_index(), 4);
        assert_eq!(GroupSlice::gl2(8).unwrap().order(), 1536);
        assert_eq!(GroupSlice::gl2(9).unwrap().order(), 3888);
        let two_b = GroupSlice::generate(2, &[m(2, [1, 1, 0, 1])]).unwrap();
        assert_eq!(two_b.preimage(8).unwrap().order(), 512);
        let two_cn = GroupSlice::generate(2, &[m(2, [0, 1, 1, 1])]).unwrap();
        assert_eq!(two_cn.preimage(8).unwrap().order(), 768);
        assert_eq!(GroupSlice::trivial(2).preimage(8).unwrap().order(), 256);
        assert_eq!(two_cn.preimage(6).unwrap().order(), 3 * 48);
    }

    #[test]
    fn commutators_and_levels() {
        let g4 = GroupSlice::gl2(4).unwrap();
        assert_eq!(g4.commutator_subgroup().unwrap().order(), 24);
        let g3 = GroupSlice::gl2(3).unwrap();
        let c3 = g3.commutator_subgroup().unwrap();
        assert_eq!(c3.order(), 24);
        assert!(c3.elements().all(|x| x.det() == 1));
        let two_cn = GroupSlice::generate(2, &[m(2, [0, 1, 1, 1])]).unwrap();
        let h = two_cn.preimage(8).unwrap();
        assert_eq!(h.level().unwrap(), 2);
        assert!(h.has_full_det());
        assert_eq!(h.reduce_mod(4).unwrap(), two_cn.preimage(4).unwrap());
    }

    #[test]
    fn generating_sets() {
        let g = GroupSlice::gl2(8).unwrap();
        let s = small_generating_set(8, g.indices());
        assert!(s.len() <= 4);
        assert_eq!(GroupSlice::generate(8, &s).unwrap(), g);
        let x = m(4, [1, 2, 0, 1]);
        let h = GroupSlice::generate(4, &[x]).unwrap();
        assert!(h.is_subgroup_of(&g.reduce_mod(4).unwrap()));
        assert!(!GroupSlice::generate(4, &[m(4, [1, 1, 0, 1])]).unwrap().is_normal_in(&GroupSlice::gl2(4).unwrap()));
    }
}
