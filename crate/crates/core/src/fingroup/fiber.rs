//! Fiber products `G1 x_Q G2` over a cyclic quotient `Q = Z/q`, realized by CRT in `GL_2(Z/m1 m2)`.

use rustc_hash::FxHashMap;

use super::GroupSlice;
use crate::error::{Error, Result};
use crate::modmat::ResidueMatrix;

/// A surjection onto Z/q given by its values on the generators of the source.
#[derive(Clone, Debug)]
pub struct CyclicMap {
    pub q: u32,
    pub on_gens: Vec<u32>,
}

#[derive(Clone, Debug)]
pub struct FiberProductSpec {
    pub left: GroupSlice,
    pub right: GroupSlice,
    pub psi_left: CyclicMap,
    pub psi_right: CyclicMap,
}

/// Values of a homomorphism on every element, aligned with `g.indices()`; errors if not well defined.
pub fn extend_map(g: &GroupSlice, psi: &CyclicMap) -> Result<Vec<u32>> {
    if psi.on_gens.len() != g.gens().len() {
        return Err(Error::Domain("map must give one value per generator".into()));
    }
    let n = g.order() as usize;
    let mut val = vec![u32::MAX; n];
    let id = g.position(&ResidueMatrix::identity(g.modulus())).unwrap();
    val[id] = 0;
    let mut stack = vec![id];
    while let Some(i) = stack.pop() {
        let x = ResidueMatrix::from_index(g.modulus(), g.indices()[i]);
        for (s, &v) in g.gens().iter().zip(&psi.on_gens) {
            let j = g.position(&x.mul_same(s)).unwrap();
            let w = (val[i] + v) % psi.q;
            if val[j] == u32::MAX {
                val[j] = w;
                stack.push(j);
            } else if val[j] != w {
                return Err(Error::Inconsistency("generator values do not define a homomorphism".into()));
            }
        }
    }
    let mut hit = vec![false; psi.q as usize];
    for &v in &val {
        hit[v as usize] = true;
    }
    if hit.iter().any(|&h| !h) {
        return Err(Error::Domain("map is not surjective".into()));
    }
    Ok(val)
}

impl FiberProductSpec {
    pub fn order(&self) -> u64 {
        self.left.order() * self.right.order() / self.psi_left.q as u64
    }

    /// All pairs with equal images, joined by CRT.
    pub fn materialize(&self) -> Result<GroupSlice> {
        if self.psi_left.q != self.psi_right.q {
            return Err(Error::Domain("the two maps must share a target".into()));
        }
        let (m1, m2) = (self.left.modulus(), self.right.modulus());
        if num_integer::gcd(m1, m2) != 1 {
            return Err(Error::Domain("fiber product needs coprime moduli".into()));
        }
        let v1 = extend_map(&self.left, &self.psi_left)?;
        let v2 = extend_map(&self.right, &self.psi_right)?;
        let mut by_value: FxHashMap<u32, Vec<ResidueMatrix>> = FxHashMap::default();
        for (x, &v) in self.right.elements().zip(&v2) {
            by_value.entry(v).or_default().push(x);
        }
        let n = m1 * m2;
        let mut elems = Vec::with_capacity(self.order() as usize);
        for (a, &v) in self.left.elements().zip(&v1) {
            for b in &by_value[&v] {
                elems.push(ResidueMatrix::crt_join(&[a, *b])?.index());
            }
        }
        let gens = super::small_generating_set(n, &elems);
        Ok(GroupSlice::from_parts(n, gens, elems))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fiber_over_z3() {
        // 2Cn x GL_2(F_7) glued along a cubic character of det
        let left = GroupSlice::generate(2, &[ResidueMatrix::new(2, [0, 1, 1, 1])]).unwrap();
        let right = GroupSlice::gl2(7).unwrap();
        let dl = crate::arith::DlogTable::new(7).unwrap();
        let on_gens = right.gens().iter().map(|g| (dl.log(g.det() as u64).unwrap() % 3) as u32).collect();
        let spec = FiberProductSpec {
            left,
            right,
            psi_left: CyclicMap { q: 3, on_gens: vec![1] },
            psi_right: CyclicMap { q: 3, on_gens },
        };
        let g = spec.materialize().unwrap();
        assert_eq!(g.order(), 2016);
        assert_eq!(g.reduce_mod(7).unwrap().order(), 2016);
        assert_eq!(g.reduce_mod(2).unwrap().order(), 3);
    }

    #[test]
    fn bad_map_rejected() {
        let g = GroupSlice::gl2(2).unwrap();
        let psi = CyclicMap { q: 3, on_gens: vec![1; g.gens().len()] };
        assert!(extend_map(&g, &psi).is_err());
    }
}
