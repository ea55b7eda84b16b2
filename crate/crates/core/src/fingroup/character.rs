//! Characters of order p: the quotient `G / <[G,G], G^p>` with explicit F_p coordinates.

use rustc_hash::FxHashMap;

use super::GroupSlice;
use crate::error::Result;
use crate::modmat::ResidueMatrix;

/// `G` modulo `<[G,G], g^p>`, an F_p vector space, with coordinates for every element.
#[derive(Clone, Debug)]
pub struct ElementaryQuotient {
    pub p: u32,
    pub dim: usize,
    group: GroupSlice,
    coords: Vec<Vec<u8>>,
}

/// A linear functional on the coordinates, i.e. a character with values in Z/p.
pub type Functional = Vec<u8>;

impl ElementaryQuotient {
    pub fn new(g: &GroupSlice, p: u32) -> Result<ElementaryQuotient> {
        let comm = g.commutator_subgroup()?;
        let powers: Vec<ResidueMatrix> = g.gens().iter().map(|x| x.pow(p as u64)).collect();
        let kernel = comm.join_with(&powers)?;
        let order = g.order() as usize;
        // coset label for each element of g
        let mut label = vec![u32::MAX; order];
        let mut reps: Vec<ResidueMatrix> = Vec::new();
        let kel: Vec<ResidueMatrix> = kernel.elements().collect();
        for (i, x) in g.elements().enumerate() {
            if label[i] != u32::MAX {
                continue;
            }
            let k = reps.len() as u32;
            reps.push(x);
            for y in &kel {
                label[g.position(&x.mul_same(y)).unwrap()] = k;
            }
        }
        let id = ResidueMatrix::identity(g.modulus());
        let coset = |m: &ResidueMatrix| label[g.position(m).unwrap()];
        // span: coset label -> (coordinates, representative)
        let mut span: FxHashMap<u32, (Vec<u8>, ResidueMatrix)> = FxHashMap::default();
        span.insert(coset(&id), (vec![], id));
        let mut dim = 0;
        for x in g.gens() {
            if span.contains_key(&coset(x)) {
                continue;
            }
            dim += 1;
            let old: Vec<(Vec<u8>, ResidueMatrix)> = span.values().cloned().collect();
            for (mut v, r) in old {
                v.resize(dim, 0);
                span.insert(coset(&r), (v.clone(), r));
                let mut y = r;
                for t in 1..p {
                    y = y.mul_same(x);
                    let mut w = v.clone();
                    w[dim - 1] = t as u8;
                    span.insert(coset(&y), (w, y));
                }
            }
        }
        debug_assert_eq!(span.len(), reps.len());
        let coords: Vec<Vec<u8>> = label
            .iter()
            .map(|l| {
                let mut v = span[l].0.clone();
                v.resize(dim, 0);
                v
            })
            .collect();
        Ok(ElementaryQuotient { p, dim, group: g.clone(), coords })
    }

    pub fn group(&self) -> &GroupSlice {
        &self.group
    }

    pub fn coords_of(&self, m: &ResidueMatrix) -> Option<&[u8]> {
        self.group.position(m).map(|i| self.coords[i].as_slice())
    }

    pub fn coords_at(&self, pos: usize) -> &[u8] {
        &self.coords[pos]
    }

    pub fn eval_at(&self, f: &Functional, pos: usize) -> u8 {
        dot(f, &self.coords[pos], self.p)
    }

    pub fn eval(&self, f: &Functional, m: &ResidueMatrix) -> Option<u8> {
        self.group.position(m).map(|i| self.eval_at(f, i))
    }

    /// Nonzero functionals, one per kernel (so scalar multiples are skipped).
    pub fn kernels(&self) -> Vec<Functional> {
        let total = (self.p as u64).pow(self.dim as u32);
        let mut out = Vec::new();
        for k in 1..total {
            let v = digits(k, self.p, self.dim);
            // normalize: first nonzero coordinate equal to 1
            if v.iter().find(|&&x| x != 0) == Some(&1) {
                out.push(v);
            }
        }
        out
    }

    /// All nonzero functionals.
    pub fn functionals(&self) -> Vec<Functional> {
        let total = (self.p as u64).pow(self.dim as u32);
        (1..total).map(|k| digits(k, self.p, self.dim)).collect()
    }

    /// Kernel of a functional as a subgroup.
    pub fn kernel(&self, f: &Functional) -> GroupSlice {
        let keep: Vec<u64> = (0..self.coords.len())
            .filter(|&i| self.eval_at(f, i) == 0)
            .map(|i| self.group.indices()[i])
            .collect();
        let gens = super::small_generating_set(self.group.modulus(), &keep);
        GroupSlice::from_parts(self.group.modulus(), gens, keep)
    }

    /// Functional representing an arbitrary Z/p-valued homomorphism given on all elements.
    pub fn functional_of(&self, values: impl Fn(&ResidueMatrix) -> u8) -> Option<Functional> {
        let mut f = vec![0u8; self.dim];
        // read values on unit vectors
        for (i, x) in self.group.elements().enumerate() {
            let c = &self.coords[i];
            if c.iter().filter(|&&v| v != 0).count() == 1 {
                let j = c.iter().position(|&v| v != 0).unwrap();
                if c[j] == 1 {
                    f[j] = values(&x) % self.p as u8;
                }
            }
        }
        let ok = self.group.elements().enumerate().all(|(i, x)| self.eval_at(&f, i) == values(&x) % self.p as u8);
        ok.then_some(f)
    }
}

pub fn dot(f: &[u8], v: &[u8], p: u32) -> u8 {
    (f.iter().zip(v).map(|(&a, &b)| a as u32 * b as u32).sum::<u32>() % p) as u8
}

fn digits(mut k: u64, p: u32, dim: usize) -> Vec<u8> {
    let mut v = vec![0u8; dim];
    for slot in v.iter_mut() {
        *slot = (k % p as u64) as u8;
        k /= p as u64;
    }
    v
}

/// Rank over F_p of a list of functionals.
pub fn rank(vectors: &[Functional], p: u32) -> usize {
    let mut rows: Vec<Vec<u32>> = vectors.iter().map(|v| v.iter().map(|&x| x as u32).collect()).collect();
    let cols = rows.first().map_or(0, |r| r.len());
    let mut r = 0;
    for c in 0..cols {
        let Some(piv) = (r..rows.len()).find(|&i| rows[i][c] % p != 0) else { continue };
        rows.swap(r, piv);
        let inv = crate::arith::inv_mod(rows[r][c] as i64, p as u64).unwrap() as u32;
        for x in rows[r].iter_mut() {
            *x = *x * inv % p;
        }
        for i in 0..rows.len() {
            if i != r && rows[i][c] % p != 0 {
                let f = rows[i][c];
                let pivot = rows[r].clone();
                for (x, y) in rows[i].iter_mut().zip(pivot) {
                    *x = (*x + (p - f) * y) % p;
                }
            }
        }
        r += 1;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gl2_mod_4_has_three_quadratic_characters() {
        let g = GroupSlice::gl2(4).unwrap();
        let q = ElementaryQuotient::new(&g, 2).unwrap();
        // abelianization of GL_2(Z/4) is Z/2 x Z/2
        assert_eq!(q.dim, 2);
        assert_eq!(q.kernels().len(), 3);
        for f in q.kernels() {
            assert_eq!(q.kernel(&f).order(), 48);
        }
    }

    #[test]
    fn cubic_character_of_2cn() {
        let h = GroupSlice::generate(2, &[ResidueMatrix::new(2, [0, 1, 1, 1])]).unwrap().preimage(4).unwrap();
        let q = ElementaryQuotient::new(&h, 3).unwrap();
        assert_eq!(q.dim, 1);
        assert_eq!(q.kernels().len(), 1);
        assert_eq!(q.kernel(&q.kernels()[0]).order(), 16);
    }

    #[test]
    fn ranks() {
        assert_eq!(rank(&[vec![1, 0, 1], vec![0, 1, 1], vec![1, 1, 0]], 2), 2);
        assert_eq!(rank(&[vec![1, 2], vec![2, 1]], 3), 1);
    }
}
