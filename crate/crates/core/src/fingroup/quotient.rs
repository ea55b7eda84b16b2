//! Abstract finite groups as multiplication tables; quotients of matrix groups and isomorphism tests.

use rustc_hash::FxHashMap;

use super::lattice::{normal_subgroups, NORMAL_CAP};
use super::GroupSlice;
use crate::error::{Error, Result};
use crate::modmat::ResidueMatrix;

/// Largest quotient we compare by brute force.
pub const ISO_CAP: usize = 256;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CayleyTable {
    n: usize,
    mul: Vec<u32>,
    identity: usize,
}

/// Isomorphism invariants used to bucket tables before the exhaustive test.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fingerprint {
    pub order: usize,
    pub order_histogram: Vec<(u32, u32)>,
    pub classes: usize,
    pub center: usize,
    pub commutator: usize,
    pub abelian: bool,
}

impl CayleyTable {
    pub fn from_fn(n: usize, identity: usize, f: impl Fn(usize, usize) -> usize) -> CayleyTable {
        let mut mul = vec![0u32; n * n];
        for a in 0..n {
            for b in 0..n {
                mul[a * n + b] = f(a, b) as u32;
            }
        }
        CayleyTable { n, mul, identity }
    }

    /// Cyclic group of order `n`.
    pub fn cyclic(n: usize) -> CayleyTable {
        CayleyTable::from_fn(n, 0, |a, b| (a + b) % n)
    }

    pub fn direct_product(&self, other: &CayleyTable) -> CayleyTable {
        let m = other.n;
        CayleyTable::from_fn(self.n * m, self.identity * m + other.identity, |a, b| {
            self.op(a / m, b / m) * m + other.op(a % m, b % m)
        })
    }

    pub fn order(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn op(&self, a: usize, b: usize) -> usize {
        self.mul[a * self.n + b] as usize
    }

    pub fn inverse(&self, a: usize) -> usize {
        (0..self.n).find(|&b| self.op(a, b) == self.identity).expect("group table")
    }

    pub fn element_order(&self, a: usize) -> u32 {
        let mut x = a;
        let mut k = 1;
        while x != self.identity {
            x = self.op(x, a);
            k += 1;
        }
        k
    }

    fn closure(&self, gens: &[usize]) -> Vec<bool> {
        let mut inside = vec![false; self.n];
        inside[self.identity] = true;
        let mut stack = vec![self.identity];
        while let Some(x) = stack.pop() {
            for &g in gens {
                let y = self.op(x, g);
                if !inside[y] {
                    inside[y] = true;
                    stack.push(y);
                }
            }
        }
        inside
    }

    pub fn is_abelian(&self) -> bool {
        (0..self.n).all(|a| (0..a).all(|b| self.op(a, b) == self.op(b, a)))
    }

    fn class_count(&self) -> usize {
        let mut seen = vec![false; self.n];
        let inv: Vec<usize> = (0..self.n).map(|a| self.inverse(a)).collect();
        let mut count = 0;
        for a in 0..self.n {
            if seen[a] {
                continue;
            }
            count += 1;
            for g in 0..self.n {
                seen[self.op(self.op(g, a), inv[g])] = true;
            }
        }
        count
    }

    fn commutator_order(&self) -> usize {
        let inv: Vec<usize> = (0..self.n).map(|a| self.inverse(a)).collect();
        let mut comms = Vec::new();
        for a in 0..self.n {
            for b in 0..self.n {
                comms.push(self.op(self.op(a, b), self.op(inv[a], inv[b])));
            }
        }
        comms.sort_unstable();
        comms.dedup();
        self.closure(&comms).iter().filter(|&&x| x).count()
    }

    pub fn fingerprint(&self) -> Fingerprint {
        let mut hist: FxHashMap<u32, u32> = FxHashMap::default();
        for a in 0..self.n {
            *hist.entry(self.element_order(a)).or_default() += 1;
        }
        let mut order_histogram: Vec<(u32, u32)> = hist.into_iter().collect();
        order_histogram.sort_unstable();
        let center = (0..self.n).filter(|&a| (0..self.n).all(|b| self.op(a, b) == self.op(b, a))).count();
        Fingerprint {
            order: self.n,
            order_histogram,
            classes: self.class_count(),
            center,
            commutator: self.commutator_order(),
            abelian: self.is_abelian(),
        }
    }

    /// Generators chosen greedily, largest element order first.
    fn generators(&self) -> Vec<usize> {
        let mut by_order: Vec<usize> = (0..self.n).collect();
        by_order.sort_by_key(|&a| std::cmp::Reverse(self.element_order(a)));
        let mut gens = Vec::new();
        let mut inside = self.closure(&gens);
        for a in by_order {
            if !inside[a] {
                gens.push(a);
                inside = self.closure(&gens);
            }
        }
        gens
    }

    /// Exhaustive search for an isomorphism `self -> other`.
    pub fn is_isomorphic(&self, other: &CayleyTable) -> Result<bool> {
        if self.n != other.n {
            return Ok(false);
        }
        if self.n > ISO_CAP {
            return Err(Error::ResourceCap(format!("isomorphism test on order {}", self.n)));
        }
        if self.fingerprint() != other.fingerprint() {
            return Ok(false);
        }
        let gens = self.generators();
        let targets: Vec<Vec<usize>> = gens
            .iter()
            .map(|&g| (0..other.n).filter(|&b| other.element_order(b) == self.element_order(g)).collect())
            .collect();
        let mut choice = vec![0usize; gens.len()];
        loop {
            let images: Vec<usize> = choice.iter().zip(&targets).map(|(&c, t)| t[c]).collect();
            if self.extends(&gens, &images, other) {
                return Ok(true);
            }
            // odometer
            let mut k = 0;
            loop {
                if k == gens.len() {
                    return Ok(false);
                }
                choice[k] += 1;
                if choice[k] < targets[k].len() {
                    break;
                }
                choice[k] = 0;
                k += 1;
            }
        }
    }

    fn extends(&self, gens: &[usize], images: &[usize], other: &CayleyTable) -> bool {
        let mut map = vec![usize::MAX; self.n];
        map[self.identity] = other.identity;
        let mut stack = vec![self.identity];
        while let Some(x) = stack.pop() {
            for (&g, &h) in gens.iter().zip(images) {
                let y = self.op(x, g);
                let fy = other.op(map[x], h);
                if map[y] == usize::MAX {
                    map[y] = fy;
                    stack.push(y);
                } else if map[y] != fy {
                    return false;
                }
            }
        }
        let mut hit = vec![false; other.n];
        for &v in &map {
            if v == usize::MAX || hit[v] {
                return false;
            }
            hit[v] = true;
        }
        true
    }
}

/// `g / n` as a table, with the coset label of every element of `g` (aligned with `g.indices()`).
pub fn quotient(g: &GroupSlice, n: &GroupSlice) -> Result<(CayleyTable, Vec<u32>)> {
    if !n.is_subgroup_of(g) || !n.is_normal_in(g) {
        return Err(Error::Domain("quotient by a non-normal subgroup".into()));
    }
    let size = (g.order() / n.order()) as usize;
    let mut label = vec![u32::MAX; g.order() as usize];
    let mut reps: Vec<ResidueMatrix> = Vec::with_capacity(size);
    let nel: Vec<ResidueMatrix> = n.elements().collect();
    for (i, x) in g.elements().enumerate() {
        if label[i] != u32::MAX {
            continue;
        }
        let k = reps.len() as u32;
        reps.push(x);
        for y in &nel {
            let j = g.position(&x.mul_same(y)).expect("coset inside group");
            label[j] = k;
        }
    }
    let id = label[g.position(&ResidueMatrix::identity(g.modulus())).unwrap()] as usize;
    let table = CayleyTable::from_fn(size, id, |a, b| {
        label[g.position(&reps[a].mul_same(&reps[b])).unwrap()] as usize
    });
    Ok((table, label))
}

/// Quotients `g / n` over all normal `n`, with `|g/n|` dividing `bound_order` (when nonzero).
pub fn quotients(g: &GroupSlice, bound_order: u64) -> Result<Vec<CayleyTable>> {
    let mut out = Vec::new();
    for n in normal_subgroups(g, NORMAL_CAP)? {
        let q = g.order() / n.order();
        if bound_order != 0 && bound_order % q != 0 {
            continue;
        }
        out.push(quotient(g, &n)?.0);
    }
    Ok(out)
}

/// Isomorphism classes of groups that are quotients of both `g1` and `g2`.
pub fn common_quotients(g1: &GroupSlice, g2: &GroupSlice) -> Result<Vec<CayleyTable>> {
    let bound = num_integer::gcd(g1.order(), g2.order());
    let q1 = dedupe_iso(quotients(g1, bound)?)?;
    let q2 = dedupe_iso(quotients(g2, bound)?)?;
    let mut out = Vec::new();
    for a in q1 {
        let mut shared = false;
        for b in &q2 {
            if a.is_isomorphic(b)? {
                shared = true;
                break;
            }
        }
        if shared {
            out.push(a);
        }
    }
    out.sort_by_key(|t| t.order());
    Ok(out)
}

pub fn dedupe_iso(tables: Vec<CayleyTable>) -> Result<Vec<CayleyTable>> {
    let mut out: Vec<CayleyTable> = Vec::new();
    for t in tables {
        let mut dup = false;
        for s in &out {
            if s.is_isomorphic(&t)? {
                dup = true;
                break;
            }
        }
        if !dup {
            out.push(t);
        }
    }
    Ok(out)
}
