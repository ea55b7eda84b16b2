//! Frobenius data at good primes and its comparison with 2-adic label groups.

use std::collections::BTreeSet;

use crate::arith::{kronecker, primes_up_to};
use crate::ellq::{self, kummer, CurveModel, TwoTorsionShape};
use crate::error::{Error, Result};
use crate::fingroup::GroupSlice;
use crate::modmat::ResidueMatrix;
use crate::paperdata::{bundled, LabeledGroup, Obstruction};

/// Bound used when the 2-adic label has to be inferred from Frobenius data alone.
pub const INFERENCE_PRIME_BOUND: u64 = 5000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Observation {
    pub p: u64,
    pub ap: i64,
    /// Frobenius on `E[4]` (full 2-torsion) or `E[2]` (one rational 2-torsion point) in a basis
    /// fixed by the model; absent when the shape gives no canonical basis.
    pub frame: Option<ResidueMatrix>,
}

fn frame_matrix(shape: &TwoTorsionShape, p: u64) -> Option<ResidueMatrix> {
    match *shape {
        TwoTorsionShape::Split(a, b, c) if p >= 5 => kummer::frobenius_mod4((a, b, c), p).ok(),
        TwoTorsionShape::PartialSplit(a, b, _) if p >= 5 => match kronecker(a * a - 4 * b, p as i128) {
            1 => Some(ResidueMatrix::new(2, [1, 0, 0, 1])),
            -1 => Some(ResidueMatrix::new(2, [1, 1, 0, 1])),
            _ => None,
        },
        _ => None,
    }
}

/// Frobenius data at odd good primes `p <= bound`.
pub fn observe(curve: &CurveModel, bound: u64) -> Result<Vec<Observation>> {
    let shape = ellq::classify_mod2(curve)?;
    let bound_cap = bound.max(ellq::count::DEFAULT_PRIME_BOUND);
    let mut out = Vec::new();
    for p in primes_up_to(bound) {
        if p == 2 || !ellq::is_good_prime(curve, p) {
            continue;
        }
        let ap = ellq::count::ap_bounded(curve, p, bound_cap)?;
        out.push(Observation { p, ap, frame: frame_matrix(&shape, p) });
    }
    Ok(out)
}

type Pair = (ResidueMatrix, u32, u32);

/// Fraction of the group's (frame class, trace mod 8, det mod 8) triples witnessed by the data, for
/// the best choice of frame; `None` when no frame makes the data consistent with the group.
///
/// Observations without a frame matrix only enter through their characteristic polynomial.
pub fn coverage(g8: &GroupSlice, obs: &[Observation]) -> Option<f64> {
    debug_assert_eq!(g8.modulus(), 8);
    let polys: BTreeSet<(u32, u32)> = g8.elements().map(|x| (x.trace(), x.det())).collect();
    let cp = |o: &Observation| (o.ap.rem_euclid(8) as u32, (o.p % 8) as u32);
    if !obs.iter().all(|o| polys.contains(&cp(o))) {
        return None;
    }
    let framed: BTreeSet<Pair> = obs.iter().filter_map(|o| o.frame.map(|m| (m, cp(o).0, cp(o).1))).collect();
    let Some(fm) = framed.iter().next().map(|f| f.0.modulus()) else {
        let seen: BTreeSet<(u32, u32)> = obs.iter().map(cp).collect();
        return Some(seen.len() as f64 / polys.len() as f64);
    };
    let pairs: BTreeSet<Pair> = g8.elements().map(|x| (x.reduce(fm).unwrap(), x.trace(), x.det())).collect();
    let mut best: Option<f64> = None;
    for c in GroupSlice::gl2(fm).ok()?.elements() {
        let ci = c.inv().ok()?;
        let moved: BTreeSet<Pair> = framed.iter().map(|&(m, t, d)| (c.mul_same(&m).mul_same(&ci), t, d)).collect();
        if moved.is_subset(&pairs) {
            let f = moved.len() as f64 / pairs.len() as f64;
            best = Some(best.map_or(f, |b| b.max(f)));
        }
    }
    best
}

/// Rejects a label whose group cannot contain the observed Frobenius elements.
pub fn check_label(lg: &LabeledGroup, obs: &[Observation]) -> Result<f64> {
    coverage(&lg.group, obs).ok_or_else(|| {
        Error::Inconsistency(format!("Frobenius data is not contained in the 2-adic image {}", lg.label))
    })
}

/// The S_G label whose group is witnessed in full, preferring the largest index.
pub fn infer_label(g: Obstruction, obs: &[Observation]) -> Result<(&'static LabeledGroup, f64)> {
    let data = bundled()?;
    let mut best: Option<(&LabeledGroup, f64)> = None;
    for l in g.members() {
        let lg = data.labeled(l)?;
        if let Some(c) = coverage(&lg.group, obs) {
            if c >= 1.0 && best.map_or(true, |(b, _)| lg.label.index > b.label.index) {
                best = Some((lg, c));
            }
        }
    }
    best.ok_or_else(|| {
        Error::Ambiguity(format!("no {g} label is fully witnessed by Frobenius data; supply the 2-adic label"))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paperdata::appendix_rows;

    #[test]
    fn appendix_labels_are_recovered() {
        for row in appendix_rows().iter().filter(|r| ["315.a2", "392.d3", "69.a1", "102.a2", "392.a1"].contains(&r.name().as_str())) {
            let obs = observe(&row.curve, INFERENCE_PRIME_BOUND).unwrap();
            let (lg, c) = infer_label(row.obstruction, &obs).unwrap();
            assert_eq!(lg.label, row.label, "{}", row.name());
            assert_eq!(c, 1.0);
        }
    }

    #[test]
    fn wrong_label_is_inconsistent() {
        let row = appendix_rows().iter().find(|r| r.name() == "392.a1").unwrap();
        let obs = observe(&row.curve, 1000).unwrap();
        let wrong = bundled().unwrap().labeled("8.4.0.1").unwrap();
        assert!(matches!(check_label(wrong, &obs), Err(Error::Inconsistency(_))));
        let right = bundled().unwrap().labeled("2.2.0.1").unwrap();
        assert!(check_label(right, &obs).is_ok());
    }
}
