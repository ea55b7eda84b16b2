//! Subgroup lattices of small matrix groups: enumeration by joins, conjugacy classes, normal subgroups.

use rustc_hash::FxHashMap;

use super::GroupSlice;
use crate::error::{Error, Result};
use crate::modmat::ResidueMatrix;

pub const SUBGROUP_CAP: usize = 512;
pub const NORMAL_CAP: usize = 4096;

/// Distinct cyclic subgroups, ordered by order then element set.
pub fn cyclic_subgroups(g: &GroupSlice) -> Vec<GroupSlice> {
    let mut seen: FxHashMap<Vec<u64>, ()> = FxHashMap::default();
    let mut out = Vec::new();
    for x in g.elements() {
        let c = GroupSlice::generate(g.modulus(), &[x]).expect("element of a group");
        if seen.insert(c.indices().to_vec(), ()).is_none() {
            out.push(c);
        }
    }
    out.sort_by(|a, b| a.order().cmp(&b.order()).then_with(|| a.indices().cmp(b.indices())));
    out
}

/// Close a seed family under pairwise joins with the given building blocks.
fn join_closure(seeds: Vec<GroupSlice>, blocks: &[GroupSlice], cap: usize) -> Result<Vec<GroupSlice>> {
    let mut seen: FxHashMap<Vec<u64>, usize> = FxHashMap::default();
    let mut out: Vec<GroupSlice> = Vec::new();
    for s in seeds {
        if !seen.contains_key(s.indices()) {
            seen.insert(s.indices().to_vec(), out.len());
            out.push(s);
        }
    }
    let mut i = 0;
    while i < out.len() {
        let h = out[i].clone();
        for c in blocks {
            if c.is_subgroup_of(&h) {
                continue;
            }
            let j = h.join(c)?;
            if !seen.contains_key(j.indices()) {
                if out.len() >= cap {
                    return Err(Error::ResourceCap(format!("more than {cap} subgroups")));
                }
                seen.insert(j.indices().to_vec(), out.len());
                out.push(j);
            }
        }
        i += 1;
    }
    out.sort_by(|a, b| a.order().cmp(&b.order()).then_with(|| a.indices().cmp(b.indices())));
    Ok(out)
}

/// Every subgroup of `g`, including the trivial group and `g` itself.
pub fn all_subgroups(g: &GroupSlice, cap: usize) -> Result<Vec<GroupSlice>> {
    let cyc = cyclic_subgroups(g);
    join_closure(cyc.clone(), &cyc, cap)
}

/// Every subgroup of `g` containing the normal subgroup `n`, found by joining `n` with cyclic pieces.
pub fn subgroups_containing(g: &GroupSlice, n: &GroupSlice, cap: usize) -> Result<Vec<GroupSlice>> {
    if !n.is_subgroup_of(g) {
        return Err(Error::Domain("seed is not a subgroup".into()));
    }
    let mut blocks: Vec<GroupSlice> = Vec::new();
    let mut seen: FxHashMap<Vec<u64>, ()> = FxHashMap::default();
    for x in g.elements() {
        if n.contains(&x) {
            continue;
        }
        let b = n.join_with(&[x])?;
        if seen.insert(b.indices().to_vec(), ()).is_none() {
            blocks.push(b);
        }
    }
    join_closure(vec![n.clone()], &blocks, cap)
}

/// Partition `subs` into classes under conjugation by the elements of `by`.
/// Returns class representatives' indices into `subs`, each class sorted.
pub fn conjugacy_classes(subs: &[GroupSlice], by: &GroupSlice) -> Vec<Vec<usize>> {
    let mut pos: FxHashMap<&[u64], usize> = FxHashMap::default();
    for (i, s) in subs.iter().enumerate() {
        pos.insert(s.indices(), i);
    }
    let mut class_of = vec![usize::MAX; subs.len()];
    let mut classes: Vec<Vec<usize>> = Vec::new();
    let conj: Vec<(ResidueMatrix, ResidueMatrix)> = by.elements().map(|x| (x, x.inv().unwrap())).collect();
    for i in 0..subs.len() {
        if class_of[i] != usize::MAX {
            continue;
        }
        let k = classes.len();
        let mut members = vec![i];
        class_of[i] = k;
        for (x, xi) in &conj {
            let c = subs[i].conjugate_set(x, xi);
            if let Some(&j) = pos.get(c.as_slice()) {
                if class_of[j] == usize::MAX {
                    class_of[j] = k;
                    members.push(j);
                }
            }
        }
        members.sort_unstable();
        classes.push(members);
    }
    classes
}

/// Conjugacy classes of elements of `g`, as sorted index lists into `g.indices()`.
pub fn element_classes(g: &GroupSlice) -> Vec<Vec<usize>> {
    let n = g.order() as usize;
    let mut class_of = vec![usize::MAX; n];
    let mut out = Vec::new();
    let gens: Vec<(ResidueMatrix, ResidueMatrix)> = g.gens().iter().map(|x| (*x, x.inv().unwrap())).collect();
    for start in 0..n {
        if class_of[start] != usize::MAX {
            continue;
        }
        let k = out.len();
        let mut members = vec![start];
        class_of[start] = k;
        let mut i = 0;
        while i < members.len() {
            let y = ResidueMatrix::from_index(g.modulus(), g.indices()[members[i]]);
            for (x, xi) in &gens {
                let z = x.mul_same(&y).mul_same(xi);
                let j = g.position(&z).expect("closed under conjugation");
                if class_of[j] == usize::MAX {
                    class_of[j] = k;
                    members.push(j);
                }
            }
            i += 1;
        }
        members.sort_unstable();
        out.push(members);
    }
    out
}

/// All normal subgroups, via joins of normal closures of single elements.
pub fn normal_subgroups(g: &GroupSlice, cap: usize) -> Result<Vec<GroupSlice>> {
    let mut seen: FxHashMap<Vec<u64>, ()> = FxHashMap::default();
    let mut blocks = Vec::new();
    for class in element_classes(g) {
        let x = ResidueMatrix::from_index(g.modulus(), g.indices()[class[0]]);
        let nc = g.normal_closure(&[x])?;
        if seen.insert(nc.indices().to_vec(), ()).is_none() {
            blocks.push(nc);
        }
    }
    join_closure(blocks.clone(), &blocks, cap)
}

/// `M(G)`: subgroups with the same determinant image and the same commutator subgroup as `g`,
/// one representative per conjugacy class under `by`.
pub fn m_set(g: &GroupSlice, by: &GroupSlice) -> Result<Vec<GroupSlice>> {
    let comm = g.commutator_subgroup()?;
    let dets = g.det_image();
    let mut subs = Vec::new();
    for h in subgroups_containing(g, &comm, SUBGROUP_CAP)? {
        if h.det_image() == dets && h.commutator_subgroup()? == comm {
            subs.push(h);
        }
    }
    Ok(conjugacy_classes(&subs, by).into_iter().map(|c| subs[c[0]].clone()).collect())
}

/// Whether `a` and `b` are conjugate under some element of `by`.
pub fn are_conjugate(a: &GroupSlice, b: &GroupSlice, by: &GroupSlice) -> bool {
    a.order() == b.order()
        && by.elements().any(|x| {
            let xi = x.inv().unwrap();
            a.conjugate_set(&x, &xi).as_slice() == b.indices()
        })
}

/// Normalizer of `h` inside `g`.
pub fn normalizer(g: &GroupSlice, h: &GroupSlice) -> GroupSlice {
    let keep: Vec<u64> = g
        .elements()
        .filter(|x| {
            let xi = x.inv().unwrap();
            h.gens().iter().all(|y| h.contains(&x.mul_same(y).mul_same(&xi)))
        })
        .map(|x| x.index())
        .collect();
    let gens = super::small_generating_set(g.modulus(), &keep);
    GroupSlice::from_parts(g.modulus(), gens, keep)
}
