//! Stabilizer chains for subgroups of `GL_2(Z/N)` along the prime-power factors of N.
//!
//! Level i acts on the i-th CRT component; its stabilizer is the set of elements that are
//! trivial on components 0..=i. Orders and membership follow without materializing the group.

use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::modmat::{gl2_order, prime_power_factors, ResidueMatrix};

/// Largest single-component orbit we store.
pub const ORBIT_CAP: u128 = 2_000_000;

struct Level {
    comp: u32,
    gens: Vec<ResidueMatrix>,
    // component index -> transversal element at full modulus
    orbit: FxHashMap<u64, ResidueMatrix>,
}

pub struct ProductChain {
    modulus: u32,
    levels: Vec<Level>,
}

impl Level {
    fn rebuild(&mut self, n: u32) {
        let id = ResidueMatrix::identity(n);
        let mut orbit = FxHashMap::default();
        orbit.insert(id.reduce(self.comp).unwrap().index(), id);
        let mut queue = vec![id];
        while let Some(t) = queue.pop() {
            for s in &self.gens {
                let u = t.mul_same(s);
                let key = u.reduce(self.comp).unwrap().index();
                if let std::collections::hash_map::Entry::Vacant(e) = orbit.entry(key) {
                    e.insert(u);
                    queue.push(u);
                }
            }
        }
        self.orbit = orbit;
    }
}

impl ProductChain {
    pub fn new(modulus: u32, gens: &[ResidueMatrix]) -> Result<ProductChain> {
        for g in gens {
            if g.modulus() != modulus {
                return Err(Error::ModulusMismatch(modulus, g.modulus()));
            }
            if !g.is_invertible() {
                return Err(Error::NonUnit { det: g.det(), modulus });
            }
        }
        let mut comps = prime_power_factors(modulus);
        // the largest component goes last, where Schreier generators need no sifting
        comps.sort_by_key(|&q| gl2_order(q as u64));
        if let Some(&q) = comps.last() {
            if gl2_order(q as u64) > ORBIT_CAP {
                return Err(Error::ResourceCap(format!("component GL_2(Z/{q}) too large for a chain")));
            }
        }
        let mut chain = ProductChain {
            modulus,
            levels: comps.iter().map(|&comp| Level { comp, gens: vec![], orbit: FxHashMap::default() }).collect(),
        };
        for g in gens {
            if let Some(j) = chain.first_nontrivial(g) {
                for l in 0..=j {
                    chain.levels[l].gens.push(*g);
                }
            }
        }
        for l in 0..chain.levels.len() {
            chain.levels[l].rebuild(modulus);
        }
        chain.complete();
        Ok(chain)
    }

    fn first_nontrivial(&self, g: &ResidueMatrix) -> Option<usize> {
        self.levels.iter().position(|l| !g.reduce(l.comp).unwrap().is_identity())
    }

    /// Strip `g` through levels `from..`; returns the residue and the level where it got stuck.
    fn sift(&self, mut g: ResidueMatrix, from: usize) -> Option<(ResidueMatrix, usize)> {
        for j in from..self.levels.len() {
            let lev = &self.levels[j];
            let c = g.reduce(lev.comp).unwrap();
            if c.is_identity() {
                continue;
            }
            match lev.orbit.get(&c.index()) {
                None => return Some((g, j)),
                Some(t) => g = g.mul_same(&t.inv().unwrap()),
            }
        }
        if g.is_identity() {
            None
        } else {
            Some((g, self.levels.len()))
        }
    }

    fn complete(&mut self) {
        let n = self.modulus;
        let k = self.levels.len();
        if k < 2 {
            return;
        }
        let mut i = k as isize - 2;
        while i >= 0 {
            let lvl = i as usize;
            let mut bad = None;
            'scan: for t in self.levels[lvl].orbit.values() {
                for s in &self.levels[lvl].gens {
                    let u = t.mul_same(s);
                    let key = u.reduce(self.levels[lvl].comp).unwrap().index();
                    let tu = self.levels[lvl].orbit[&key];
                    let schreier = u.mul_same(&tu.inv().unwrap());
                    if let Some((h, j)) = self.sift(schreier, lvl + 1) {
                        bad = Some((h, j));
                        break 'scan;
                    }
                }
            }
            match bad {
                None => i -= 1,
                Some((h, j)) => {
                    let top = j.min(k - 1);
                    for l in lvl + 1..=top {
                        self.levels[l].gens.push(h);
                        self.levels[l].rebuild(n);
                    }
                    i = top as isize;
                }
            }
        }
    }

    pub fn order(&self) -> u128 {
        self.levels.iter().map(|l| l.orbit.len() as u128).product()
    }

    pub fn contains(&self, g: &ResidueMatrix) -> bool {
        g.modulus() == self.modulus && self.sift(*g, 0).is_none()
    }

    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    /// Order of the image modulo each prime-power component.
    pub fn component_orders(&self) -> Vec<(u32, u128)> {
        self.levels.iter().map(|l| (l.comp, l.orbit.len() as u128)).collect()
    }
}

/// Order of the group generated by `gens` inside `GL_2(Z/n)`.
pub fn generated_order(n: u32, gens: &[ResidueMatrix]) -> Result<u128> {
    Ok(ProductChain::new(n, gens)?.order())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fingroup::GroupSlice;
    use crate::modmat::gl2_generators;

    #[test]
    fn matches_materialized_orders() {
        for n in [6u32, 12, 24, 36, 40] {
            assert_eq!(generated_order(n, &gl2_generators(n)).unwrap(), gl2_order(n as u64));
        }
        let gens = [ResidueMatrix::new(12, [1, 1, 0, 1]), ResidueMatrix::new(12, [5, 0, 0, 7])];
        let direct = GroupSlice::generate(12, &gens).unwrap().order() as u128;
        assert_eq!(generated_order(12, &gens).unwrap(), direct);
    }

    #[test]
    fn diagonal_entanglement_halves_order() {
        // pairs (a mod 4, b mod 3) with det a = 1 mod 4 iff det b = 1 mod 3
        let h = GroupSlice::gl2(12).unwrap();
        let keep: Vec<ResidueMatrix> = h
            .elements()
            .filter(|x| ((x.det() % 4 == 1) as u8) == ((x.det() % 3 == 1) as u8))
            .collect();
        let direct = keep.len() as u128;
        let gens = crate::fingroup::small_generating_set(12, &{
            let mut v: Vec<u64> = keep.iter().map(|x| x.index()).collect();
            v.sort_unstable();
            v
        });
        let chain = ProductChain::new(12, &gens).unwrap();
        assert_eq!(chain.order(), direct);
        assert_eq!(direct * 2, gl2_order(12));
        assert!(chain.contains(&ResidueMatrix::new(12, [1, 1, 0, 1])));
        assert!(!chain.contains(&ResidueMatrix::new(12, [5, 0, 0, 1])));
    }
}
