//! Relative Serre classification, image conductor and explicit adelic images.

pub mod frobenius;
pub mod image;
pub mod surject;

use serde::Serialize;

use crate::arith::{gcd, lcm};
use crate::chain::ProductChain;
use crate::ellq::{self, CurveModel, EntanglementData, TwoTorsionShape};
use crate::error::{Error, Result};
use crate::modmat::ResidueMatrix;
use crate::paperdata::{bundled, LabeledGroup, Obstruction, TwoAdicLabel};
use frobenius::{check_label, infer_label, observe, INFERENCE_PRIME_BOUND};
use image::{FiberPredicate, FiberProduct, FiberSetup};
use surject::{certify_odd_primes, OddSurjectivity};

pub const DEFAULT_PRIME_BOUND: u64 = 1000;

/// How surjectivity at odd primes is established.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OddMode {
    /// The caller vouches for it.
    Attested,
    /// Sieve every odd prime up to [`surject::CERTIFY_MAX_ELL`] with Frobenius data below `bound`.
    Certified { bound: u64 },
}

#[derive(Clone, Debug)]
pub struct ClassificationInput {
    pub curve: CurveModel,
    pub label: Option<TwoAdicLabel>,
    pub mode: OddMode,
    /// Primes used to separate fiber-product candidates.
    pub prime_bound: u64,
}

impl ClassificationInput {
    pub fn new(curve: CurveModel) -> ClassificationInput {
        ClassificationInput { curve, label: None, mode: OddMode::Certified { bound: DEFAULT_PRIME_BOUND }, prime_bound: DEFAULT_PRIME_BOUND }
    }

    pub fn with_label(mut self, label: TwoAdicLabel) -> ClassificationInput {
        self.label = Some(label);
        self
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Certification {
    pub mode: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub heuristic_beyond: Option<u64>,
    /// Odd primes where surjectivity could not be certified.
    pub unknown: Vec<u64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassificationResult {
    pub curve: String,
    /// `"none"` when the mod-2 image is all of `GL_2(F_2)`.
    pub mod2_class: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub two_adic_label: Option<TwoAdicLabel>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label_source: Option<&'static str>,
    pub is_relative_serre: bool,
    pub certification: Certification,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub adelic_index: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub image_conductor: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub entanglements: Option<EntanglementData>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub image_generators: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub image_order: Option<String>,
    #[serde(skip)]
    pub obstruction: Option<Obstruction>,
}

/// The obstruction named by the shape of the 2-torsion.
pub fn mod2_class(shape: &TwoTorsionShape) -> Option<Obstruction> {
    match shape {
        TwoTorsionShape::Split(..) => Some(Obstruction::Cs),
        TwoTorsionShape::PartialSplit(..) => Some(Obstruction::B),
        TwoTorsionShape::Irreducible(..) => Some(Obstruction::Cn),
        TwoTorsionShape::Full => None,
    }
}

/// Number of independent quadratic entanglements a G-Serre curve with this 2-adic label carries.
fn quadratic_count(lg: &LabeledGroup) -> Result<usize> {
    let g = lg.obstruction;
    let cubic = if g == Obstruction::Cn { 3 } else { 1 };
    let rest = g.adelic_index() / (lg.label.index as u64 * cubic);
    if rest == 0 || !rest.is_power_of_two() || rest * lg.label.index as u64 * cubic != g.adelic_index() {
        return Err(Error::Inconsistency(format!("label {} does not fit the adelic index {}", lg.label, g.adelic_index())));
    }
    Ok(rest.trailing_zeros() as usize)
}

/// Entanglement data for a curve whose 2-adic image is the labeled group.
pub fn entanglement_data(curve: &CurveModel, shape: &TwoTorsionShape, lg: &LabeledGroup) -> Result<EntanglementData> {
    let data = match lg.obstruction {
        Obstruction::Cs => ellq::entangle::entanglement_data_2cs(shape, lg.label.index as u64)?,
        Obstruction::B => ellq::entangle::entanglement_data_2b(shape, lg.label.index == 3)?,
        Obstruction::Cn => ellq::entangle::entanglement_data_2cn(curve, shape)?,
    };
    let need = quadratic_count(lg)?;
    let have = data.quadratic().len();
    if have < need {
        return Err(Error::Inconsistency(format!(
            "label {} needs {need} quadratic entanglements, the curve supplies {have}",
            lg.label
        )));
    }
    Ok(match data {
        // for 2Cn the quadratic field Q(sqrt(D_E)) only adds a condition when the 2-adic image has level 2
        EntanglementData::Cn { d_e, d_e_prime, k, f, mut quadratic } => {
            quadratic.truncate(need);
            EntanglementData::Cn { d_e, d_e_prime, k, f, quadratic }
        }
        other => other,
    })
}

/// `m_E`: the 2-power part covers the label level and every `2^k_i`; the odd part carries every
/// `|N_i'|` and the cubic conductor.
pub fn image_conductor(lg: &LabeledGroup, data: &EntanglementData) -> u32 {
    let mut two = lg.label.level as u64;
    let mut m = 1u64;
    for e in data.quadratic() {
        two = two.max(1 << e.k);
        m = lcm(m, e.n_prime.unsigned_abs());
    }
    if let Some(f) = data.cubic_conductor() {
        m = lcm(m, f);
    }
    lcm(m, two.max(2)) as u32
}

/// Resolves the 2-adic label, checking a supplied one against Frobenius data.
pub fn resolve_label(
    curve: &CurveModel,
    g: Obstruction,
    label: Option<TwoAdicLabel>,
) -> Result<(Option<&'static LabeledGroup>, &'static str)> {
    let obs = observe(curve, INFERENCE_PRIME_BOUND)?;
    match label {
        Some(l) => {
            if let Some(other) = Obstruction::of_label(&l.to_string()) {
                if other != g {
                    return Err(Error::Inconsistency(format!("label {l} belongs to {other} but the 2-torsion gives {g}")));
                }
            }
            match bundled()?.labeled(&l.to_string()) {
                Ok(lg) => {
                    check_label(lg, &obs)?;
                    Ok((Some(lg), "supplied"))
                }
                // a label outside S_G: the curve is not G-Serre
                Err(_) => Ok((None, "supplied")),
            }
        }
        None => Ok((Some(infer_label(g, &obs)?.0), "inferred")),
    }
}

pub fn is_relative_serre(input: &ClassificationInput) -> Result<ClassificationResult> {
    let curve = &input.curve;
    let shape = ellq::classify_mod2(curve)?;
    let (certification, odd_ok) = match input.mode {
        OddMode::Attested => (Certification { mode: "attested", bound: None, heuristic_beyond: None, unknown: vec![] }, true),
        OddMode::Certified { bound } => {
            let OddSurjectivity { unknown, heuristic_beyond, .. } = certify_odd_primes(curve, bound)?;
            let ok = unknown.is_empty();
            (Certification { mode: "certified", bound: Some(bound), heuristic_beyond: Some(heuristic_beyond), unknown }, ok)
        }
    };
    let mut result = ClassificationResult {
        curve: curve.label(),
        mod2_class: "none".into(),
        two_adic_label: input.label,
        label_source: input.label.map(|_| "supplied"),
        is_relative_serre: false,
        certification,
        adelic_index: None,
        image_conductor: None,
        entanglements: None,
        image_generators: None,
        image_order: None,
        obstruction: None,
    };
    let Some(g) = mod2_class(&shape) else {
        if let Some(l) = input.label {
            if l.level != 1 || l.index != 1 {
                return Err(Error::Inconsistency(format!("label {l} has a proper mod-2 image but the mod-2 image is GL2(F2)")));
            }
        }
        return Ok(result);
    };
    result.mod2_class = g.name().into();
    result.obstruction = Some(g);
    let (lg, source) = resolve_label(curve, g, input.label)?;
    result.label_source = Some(source);
    let Some(lg) = lg else { return Ok(result) };
    result.two_adic_label = Some(lg.label);
    let data = entanglement_data(curve, &shape, lg)?;
    result.image_conductor = Some(image_conductor(lg, &data));
    result.entanglements = Some(data);
    result.adelic_index = Some(g.adelic_index());
    result.is_relative_serre = odd_ok;
    Ok(result)
}

/// `G_E(m_E)` with its defining predicate.
#[derive(Clone, Debug, Serialize)]
pub struct AdelicImage {
    pub modulus: u32,
    pub generators: Vec<String>,
    #[serde(serialize_with = "ser_u128")]
    pub order: u128,
    #[serde(serialize_with = "ser_u128")]
    pub index: u128,
    pub predicate: FiberPredicate,
    /// Candidates before Frobenius elimination, up to conjugation of the 2-adic part.
    pub candidates: usize,
    /// Fraction of the survivor's Frobenius classes seen below the prime bound (absent when there
    /// was nothing to eliminate).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coverage: Option<f64>,
    #[serde(skip)]
    pub fiber: FiberProduct,
}

fn ser_u128<S: serde::Serializer>(x: &u128, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

/// Reduces candidates to one using Frobenius at good primes up to `prime_bound`.
pub fn disambiguate_by_frobenius(
    setup: &FiberSetup,
    candidates: Vec<image::Candidate>,
    curve: &CurveModel,
    prime_bound: u64,
) -> Result<(image::Candidate, Option<f64>)> {
    if candidates.len() == 1 {
        return Ok((candidates.into_iter().next().unwrap(), None));
    }
    let obs = observe(curve, prime_bound)?;
    let n = candidates.len();
    let mut survivors = setup.eliminate(candidates, &obs)?;
    match survivors.len() {
        0 => Err(Error::Inconsistency(format!("Frobenius data below {prime_bound} rules out all {n} fiber-product candidates"))),
        1 => {
            let c = survivors.pop().unwrap();
            let cov = setup.coverage(&c, &obs);
            Ok((c, Some(cov)))
        }
        k => Err(Error::Ambiguity(format!(
            "{k} of {n} fiber-product candidates survive Frobenius data below {prime_bound}; raise the prime bound"
        ))),
    }
}

/// Whether the determinants of `gens` generate `(Z/m)^x`.
fn dets_generate_units(m: u32, gens: &[ResidueMatrix]) -> bool {
    let units = (1..m as u64).filter(|&u| gcd(u, m as u64) == 1).count().max(1);
    let dets: Vec<u64> = gens.iter().map(|g| g.det() as u64).collect();
    let mut seen = std::collections::BTreeSet::from([1 % m as u64]);
    let mut stack = vec![1 % m as u64];
    while let Some(x) = stack.pop() {
        for d in &dets {
            let y = x * d % m as u64;
            if seen.insert(y) {
                stack.push(y);
            }
        }
    }
    seen.len() == units
}

/// Builds `G_E(m_E)` for a classified curve.
pub fn adelic_image(input: &ClassificationInput, result: &ClassificationResult) -> Result<AdelicImage> {
    if !result.is_relative_serre {
        return Err(Error::Domain(format!("{} is not relative Serre; no image is constructed", result.curve)));
    }
    let (Some(g), Some(label), Some(data), Some(m)) =
        (result.obstruction, result.two_adic_label, result.entanglements.as_ref(), result.image_conductor)
    else {
        return Err(Error::Domain("classification result lacks image data".into()));
    };
    let lg = bundled()?.labeled(&label.to_string())?;
    let setup = FiberSetup::new(g, &lg.group, m, data.quadratic().to_vec(), data.cubic_conductor())?;
    let candidates = setup.candidates()?;
    let count = candidates.len();
    let (cand, coverage) = disambiguate_by_frobenius(&setup, candidates, &input.curve, input.prime_bound)?;
    let mut fiber = setup.fiber_product(&cand)?;
    let order = fiber.chain()?.order();
    if order != fiber.expected_order {
        return Err(Error::Inconsistency(format!(
            "fiber product generated {order} elements, expected {}",
            fiber.expected_order
        )));
    }
    let index = fiber.index();
    if index != g.adelic_index() as u128 {
        return Err(Error::Inconsistency(format!("image has index {index} in GL2(Z/{m}), expected {}", g.adelic_index())));
    }
    if !dets_generate_units(m, &fiber.generators) {
        return Err(Error::Inconsistency("image is not determinant-surjective".into()));
    }
    fiber.reduce_generators()?;
    Ok(AdelicImage {
        modulus: m,
        generators: fiber.generators.iter().map(|x| x.to_string()).collect(),
        order,
        index,
        predicate: fiber.predicate(),
        candidates: count,
        coverage,
        fiber,
    })
}

/// Classification followed, for relative Serre curves, by the image construction.
pub fn classify_with_image(input: &ClassificationInput) -> Result<(ClassificationResult, Option<AdelicImage>)> {
    let mut result = is_relative_serre(input)?;
    if !result.is_relative_serre {
        return Ok((result, None));
    }
    let img = adelic_image(input, &result)?;
    result.image_generators = Some(img.generators.clone());
    result.image_order = Some(img.order.to_string());
    Ok((result, Some(img)))
}

/// Order of the group generated by `gens` at modulus `m`.
pub fn generated_order(m: u32, gens: &[ResidueMatrix]) -> Result<u128> {
    Ok(ProductChain::new(m, gens)?.order())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paperdata::appendix_rows;

    fn row(name: &str) -> &'static crate::paperdata::AppendixRow {
        appendix_rows().iter().find(|r| r.name() == name).unwrap()
    }

    fn attested(name: &str) -> ClassificationInput {
        let r = row(name);
        let mut i = ClassificationInput::new(r.curve.clone()).with_label(r.label);
        i.mode = OddMode::Attested;
        i
    }

    #[test]
    fn conductors_match_the_table() {
        for r in appendix_rows() {
            let res = is_relative_serre(&attested(&r.name())).unwrap();
            assert!(res.is_relative_serre, "{}", r.name());
            assert_eq!(res.image_conductor, Some(r.m_e as u32), "{}", r.name());
        }
    }

    #[test]
    fn full_mod2_image_is_no_obstruction() {
        let mut i = ClassificationInput::new(CurveModel::parse("0,0,1,-1,0").unwrap());
        i.mode = OddMode::Attested;
        let res = is_relative_serre(&i).unwrap();
        assert_eq!(res.mod2_class, "none");
        assert!(!res.is_relative_serre);
    }

    #[test]
    fn wrong_family_label_is_rejected() {
        let mut i = attested("315.a2");
        i.label = Some("2.3.0.1".parse().unwrap());
        assert!(matches!(is_relative_serre(&i), Err(Error::Inconsistency(_))));
    }

    #[test]
    fn small_images() {
        let (res, img) = classify_with_image(&attested("392.a1")).unwrap();
        let img = img.unwrap();
        assert_eq!(res.image_conductor, Some(28));
        assert_eq!(img.candidates, 2);
        assert_eq!(img.index, 12);
    }
}
