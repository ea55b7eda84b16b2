//! Derives mod-8 generators for the S_G groups and prints them in `groups.dat` format.
//!
//! Each 2-adic label is matched to a conjugacy class of `M(G-hat(2^k))` (lifted to level 8) using
//! the Frobenius data of the curve listed for that label in `appendix.csv`: mod-8 characteristic
//! polynomials, plus the canonical mod-4 Frobenius matrices when the 2-torsion is rational.

use std::collections::BTreeSet;

use relserre::ellq::{self, kummer, CurveModel, TwoTorsionShape};
use relserre::fingroup::lattice::{conjugacy_classes, subgroups_containing, SUBGROUP_CAP};
use relserre::fingroup::GroupSlice;
use relserre::modmat::{format_list, ResidueMatrix};

fn m_set(ghat: &GroupSlice) -> Vec<GroupSlice> {
    let comm = ghat.commutator_subgroup().unwrap();
    let dets = ghat.det_image();
    let subs: Vec<GroupSlice> = subgroups_containing(ghat, &comm, SUBGROUP_CAP)
        .unwrap()
        .into_iter()
        .filter(|h| h.det_image() == dets && h.commutator_subgroup().unwrap() == comm)
        .collect();
    let gl = GroupSlice::gl2(ghat.modulus()).unwrap();
    conjugacy_classes(&subs, &gl).into_iter().map(|c| subs[c[0]].clone()).collect()
}

type Datum = (Option<ResidueMatrix>, (u32, u32));

fn frobenius_data(e: &CurveModel, bound: u64) -> BTreeSet<Datum> {
    let shape = ellq::classify_mod2(e).unwrap();
    let mut out = BTreeSet::new();
    for p in relserre::arith::primes_up_to(bound) {
        if p < 5 || !ellq::is_good_prime(e, p) {
            continue;
        }
        let ap = ellq::ap(e, p).unwrap();
        let cp = ((ap.rem_euclid(8)) as u32, (p % 8) as u32);
        let m = match shape {
            TwoTorsionShape::Split(a, b, c) => match kummer::frobenius_mod4((a, b, c), p) {
                Ok(m) => Some(m),
                Err(_) => continue,
            },
            TwoTorsionShape::PartialSplit(a, b, _) => {
                let split = relserre::arith::jacobi(a * a - 4 * b, p as u128) == 1;
                Some(ResidueMatrix::new(2, [1, if split { 0 } else { 1 }, 0, 1]))
            }
            _ => None,
        };
        out.insert((m, cp));
    }
    out
}

/// Fraction of the group's (mod-4 element, mod-8 char poly) pairs witnessed, best frame; None if inconsistent.
fn coverage(h: &GroupSlice, data: &BTreeSet<Datum>) -> Option<f64> {
    let pairs: BTreeSet<Datum> = h
        .elements()
        .map(|x| {
            let m = data.iter().next().unwrap().0.map(|d| x.reduce(d.modulus()).unwrap());
            (m, (x.trace(), x.det()))
        })
        .collect();
    let fm = data.iter().next().unwrap().0.map_or(2, |d| d.modulus());
    let frames: Vec<ResidueMatrix> = GroupSlice::gl2(fm).unwrap().elements().collect();
    let mut best: Option<f64> = None;
    for c in frames {
        let ci = c.inv().unwrap();
        let moved: BTreeSet<Datum> = data.iter().map(|(m, cp)| (m.map(|m| ci.mul_same(&m).mul_same(&c)), *cp)).collect();
        if moved.is_subset(&pairs) {
            let f = moved.len() as f64 / pairs.len() as f64;
            best = Some(best.map_or(f, |b: f64| b.max(f)));
        }
    }
    best
}

fn main() {
    let rows: Vec<(String, String, CurveModel)> = include_str!("../src/paperdata/appendix.csv")
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            let a: Vec<i64> = f[3..8].iter().map(|s| s.parse().unwrap()).collect();
            (f[0].to_string(), f[1].to_string(), CurveModel::new([a[0], a[1], a[2], a[3], a[4]]).unwrap().named(f[2]))
        })
        .collect();
    let bound: u64 = std::env::args().nth(1).map_or(2000, |s| s.parse().unwrap());
    let mut out: Vec<(String, String)> = Vec::new();
    for (g, base, k) in [("2Cs", vec![1, 0, 0, 1], 8u32), ("2B", vec![1, 1, 0, 1], 4), ("2Cn", vec![0, 1, 1, 1], 4)] {
        let b = ResidueMatrix::new(2, [base[0], base[1], base[2], base[3]]);
        let g2 = GroupSlice::generate(2, &[b]).unwrap();
        let ghat = g2.preimage(k).unwrap();
        let classes = m_set(&ghat);
        eprintln!("{g}: |M| = {}", classes.len());
        // every S_G group, lifted to level 8, is a subgroup of G-hat(8) reducing into the M-set
        let ghat8 = g2.preimage(8).unwrap();
        let lifted: Vec<GroupSlice> = if k == 8 {
            classes.clone()
        } else {
            let comm = ghat8.commutator_subgroup().unwrap();
            let subs: Vec<GroupSlice> = subgroups_containing(&ghat8, &comm, SUBGROUP_CAP)
                .unwrap()
                .into_iter()
                .filter(|h| {
                    h.has_full_det()
                        && h.commutator_subgroup().unwrap() == comm
                        && classes.iter().any(|c| {
                            let r = h.reduce_mod(4).unwrap();
                            r.order() == c.order() && conjugacy_classes(&[r.clone(), c.clone()], &GroupSlice::gl2(4).unwrap()).len() == 1
                        })
                })
                .collect();
            let gl = GroupSlice::gl2(8).unwrap();
            conjugacy_classes(&subs, &gl).into_iter().map(|c| subs[c[0]].clone()).collect()
        };
        for (i, h) in lifted.iter().enumerate() {
            let minus = h.contains(&ResidueMatrix::scalar(8, -1));
            eprintln!(
                "  class {i}: order {} index {} level {} -I {} mod4 order {}",
                h.order(),
                h.gl2_index(),
                h.level().unwrap(),
                minus,
                h.reduce_mod(4).unwrap().order()
            );
        }
        for (gg, label, e) in rows.iter().filter(|r| r.0 == g) {
            let data = frobenius_data(e, bound);
            let fits: Vec<(usize, f64)> =
                lifted.iter().enumerate().filter_map(|(i, h)| coverage(h, &data).map(|c| (i, c))).collect();
            let shown: Vec<String> = fits
                .iter()
                .map(|&(i, c)| format!("{i}:{}/{}/{c:.2}", lifted[i].level().unwrap(), lifted[i].gl2_index()))
                .collect();
            eprintln!("  {gg} {label} {}: {}", e.label(), shown.join(" "));
            let full: Vec<usize> = fits.iter().filter(|f| f.1 == 1.0).map(|f| f.0).collect();
            assert_eq!(full.len(), 1, "{label} is not pinned down by Frobenius data");
            let h = lifted[full[0]].with_small_generators();
            out.push((label.clone(), format_list(h.gens())));
        }
    }
    out.sort();
    for (label, gens) in out {
        println!("{label} 8 {gens}");
    }
}
