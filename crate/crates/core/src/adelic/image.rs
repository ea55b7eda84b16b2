//! `G_E(m_E)` as a fiber product of the 2-adic image with `GL_2(Z/m_odd)`.
//!
//! An element `(A, B)` with `A` in the 2-power part and `B` in `GL_2(Z/m_odd)` lies in the image
//! when every quadratic entanglement character `eps_i(A)` equals `(N_i' / det B)` and, for 2Cn, the
//! cubic character `omega(A)` equals `xi(det B)`. Which characters of the 2-adic group play the
//! roles of `eps_i` and which cubic `xi` is meant is not known a priori; every admissible choice is
//! a candidate and Frobenius data removes the wrong ones.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rustc_hash::FxHashSet;
use serde::Serialize;

use super::frobenius::Observation;
use crate::arith::{factor_u64, gcd, kronecker, DlogTable};
use crate::chain::ProductChain;
use crate::ellq::Entanglement;
use crate::error::{Error, Result};
use crate::fingroup::character::{rank, ElementaryQuotient, Functional};
use crate::fingroup::lattice::normalizer;
use crate::fingroup::{small_generating_set, GroupSlice};
use crate::modmat::{gl2_generators, gl2_order, ResidueMatrix};
use crate::paperdata::Obstruction;

/// Values of the entanglement characters on one element: bit i is `eps_i`, plus the cubic value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Signature {
    pub eps: u32,
    pub cubic: u8,
}

/// Which characters realize the entanglements.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Candidate {
    /// `eps_i` as functionals on `G2 / <[G2,G2], G2^2>`.
    pub eps: Vec<Functional>,
    /// Exponent (1 or 2) of the cubic character on each prime-power factor of f.
    pub xi: Vec<u8>,
}

/// Everything fixed before the characters are chosen.
#[derive(Clone, Debug)]
pub struct FiberSetup {
    pub obstruction: Obstruction,
    pub modulus: u32,
    pub two_power: u32,
    pub odd: u32,
    /// The 2-adic image modulo `two_power`.
    pub g2: GroupSlice,
    pub quadratic: Vec<Entanglement>,
    pub cubic_conductor: Option<u64>,
    eq: ElementaryQuotient,
    omega: Vec<u8>,
    cubic_tables: Vec<DlogTable>,
}

fn omega_of(x: &ResidueMatrix) -> u8 {
    let g = ResidueMatrix::new(2, [0, 1, 1, 1]);
    let r = x.reduce(2).expect("even modulus");
    if r.is_identity() {
        0
    } else if r == g {
        1
    } else {
        2
    }
}

impl FiberSetup {
    /// `g8` is the 2-adic image modulo 8 (or any multiple of the needed 2-power).
    pub fn new(
        obstruction: Obstruction,
        g8: &GroupSlice,
        modulus: u32,
        quadratic: Vec<Entanglement>,
        cubic_conductor: Option<u64>,
    ) -> Result<FiberSetup> {
        let two_power = 1u32 << modulus.trailing_zeros();
        let odd = modulus / two_power;
        if two_power < 2 || g8.modulus() % two_power != 0 {
            return Err(Error::Domain(format!("2-part {two_power} of {modulus} is not covered by the 2-adic data")));
        }
        for e in &quadratic {
            if odd as u64 % e.n_prime.unsigned_abs() != 0 || (1u32 << e.k) > two_power {
                return Err(Error::Inconsistency(format!("modulus {modulus} does not carry the entanglement N = {}", e.n)));
            }
        }
        if let Some(f) = cubic_conductor {
            if odd as u64 % f != 0 {
                return Err(Error::Inconsistency(format!("modulus {modulus} is not divisible by the cubic conductor {f}")));
            }
        }
        let g2 = g8.reduce_mod(two_power)?;
        let eq = ElementaryQuotient::new(&g2, 2)?;
        let omega = if cubic_conductor.is_some() { g2.elements().map(|x| omega_of(&x)).collect() } else { vec![0; g2.order() as usize] };
        let cubic_tables = match cubic_conductor {
            Some(f) => factor_u64(f)
                .into_iter()
                .map(|(p, e)| DlogTable::new(p.pow(e)).expect("odd prime power"))
                .collect(),
            None => vec![],
        };
        Ok(FiberSetup { obstruction, modulus, two_power, odd, g2, quadratic, cubic_conductor, eq, omega, cubic_tables })
    }

    /// Characters of `G2` that factor through the determinant.
    fn det_functionals(&self) -> Vec<Functional> {
        let mut out = Vec::new();
        if self.two_power >= 4 {
            out.extend(self.eq.functional_of(|x| (x.det() % 4 == 3) as u8));
        }
        if self.two_power >= 8 {
            out.extend(self.eq.functional_of(|x| matches!(x.det() % 8, 3 | 5) as u8));
        }
        out
    }

    /// Nonzero functionals trivial on the kernel of reduction to `2^k`.
    fn functionals_at_level(&self, k: u32) -> Vec<Functional> {
        let level = 1u32 << k;
        let all = self.eq.functionals();
        if level >= self.two_power {
            return all;
        }
        let kernel: Vec<usize> =
            self.g2.elements().enumerate().filter(|(_, x)| x.reduce(level).unwrap().is_identity()).map(|(i, _)| i).collect();
        all.into_iter().filter(|f| kernel.iter().all(|&i| self.eq.eval_at(f, i) == 0)).collect()
    }

    /// Every admissible assignment of characters, before conjugacy is taken into account.
    fn raw_candidates(&self) -> Vec<Candidate> {
        let dets = self.det_functionals();
        let det_rank = rank(&dets, 2);
        let pools: Vec<Vec<Functional>> = self.quadratic.iter().map(|e| self.functionals_at_level(e.k)).collect();
        let mut eps_choices: Vec<Vec<Functional>> = Vec::new();
        let mut current: Vec<Functional> = Vec::new();
        fn rec(
            i: usize,
            pools: &[Vec<Functional>],
            dets: &[Functional],
            det_rank: usize,
            current: &mut Vec<Functional>,
            out: &mut Vec<Vec<Functional>>,
        ) {
            if i == pools.len() {
                out.push(current.clone());
                return;
            }
            for f in &pools[i] {
                current.push(f.clone());
                let mut all = current.clone();
                all.extend(dets.iter().cloned());
                if rank(&all, 2) == current.len() + det_rank {
                    rec(i + 1, pools, dets, det_rank, current, out);
                }
                current.pop();
            }
        }
        rec(0, &pools, &dets, det_rank, &mut current, &mut eps_choices);
        let t = self.cubic_tables.len();
        let xis: Vec<Vec<u8>> = (0..1u32 << t).map(|mask| (0..t).map(|j| 1 + ((mask >> j) & 1) as u8).collect()).collect();
        let mut out = Vec::new();
        for eps in &eps_choices {
            for xi in &xis {
                out.push(Candidate { eps: eps.clone(), xi: xi.clone() });
            }
        }
        out
    }

    /// Signature of the element at position `pos` of `g2`.
    pub fn signature_at(&self, c: &Candidate, pos: usize) -> Signature {
        let mut eps = 0u32;
        for (i, f) in c.eps.iter().enumerate() {
            eps |= (self.eq.eval_at(f, pos) as u32) << i;
        }
        Signature { eps, cubic: self.omega[pos] }
    }

    /// Signature an element must have when the odd part has determinant `d`.
    pub fn target(&self, c: &Candidate, d: u64) -> Signature {
        let mut eps = 0u32;
        for (i, e) in self.quadratic.iter().enumerate() {
            if kronecker(e.n_prime as i128, d as i128) == -1 {
                eps |= 1 << i;
            }
        }
        let mut cubic = 0u32;
        for (t, j) in self.cubic_tables.iter().zip(&c.xi) {
            cubic += *j as u32 * (t.log(d % t.modulus).expect("unit") % 3) as u32;
        }
        Signature { eps, cubic: (cubic % 3) as u8 }
    }

    /// The candidate obtained by conjugating the 2-adic part by `n` (which normalizes `g2`).
    fn conjugate(&self, c: &Candidate, n: &ResidueMatrix) -> Candidate {
        let ni = n.inv().unwrap();
        let pos = |x: &ResidueMatrix| self.g2.position(&ni.mul_same(x).mul_same(n)).unwrap();
        let eps = c
            .eps
            .iter()
            .map(|f| self.eq.functional_of(|x| self.eq.eval_at(f, pos(x))).expect("conjugate of a character"))
            .collect();
        let mut xi = c.xi.clone();
        // conjugation by an element outside 2Cn mod 2 inverts omega
        if !self.cubic_tables.is_empty()
            && omega_of(&ni.mul_same(&ResidueMatrix::new(self.two_power, [0, 1, 1, 1])).mul_same(n)) == 2
        {
            xi.iter_mut().for_each(|j| *j = 3 - *j);
        }
        Candidate { eps, xi }
    }

    /// Admissible candidates up to conjugation by the normalizer of `g2` in `GL_2(Z/2^e)`.
    pub fn candidates(&self) -> Result<Vec<Candidate>> {
        let raw = self.raw_candidates();
        if raw.is_empty() {
            return Err(Error::Inconsistency(format!(
                "no independent characters of the 2-adic image realize the {} entanglements",
                self.quadratic.len()
            )));
        }
        let norm = normalizer(&GroupSlice::gl2(self.two_power)?, &self.g2);
        let gens: Vec<ResidueMatrix> = norm.gens().to_vec();
        let mut seen: FxHashSet<Candidate> = FxHashSet::default();
        let mut reps = Vec::new();
        for c in raw {
            if seen.contains(&c) {
                continue;
            }
            let mut orbit = vec![c.clone()];
            seen.insert(c.clone());
            let mut queue = VecDeque::from([c]);
            while let Some(x) = queue.pop_front() {
                for n in &gens {
                    let y = self.conjugate(&x, n);
                    if seen.insert(y.clone()) {
                        orbit.push(y.clone());
                        queue.push_back(y);
                    }
                }
            }
            reps.push(orbit.into_iter().min().unwrap());
        }
        reps.sort();
        Ok(reps)
    }

    fn keys(&self, c: &Candidate) -> BTreeSet<(u32, u32, Signature)> {
        (0..self.g2.order() as usize)
            .zip(self.g2.elements())
            .map(|(i, x)| (x.trace(), x.det(), self.signature_at(c, i)))
            .collect()
    }

    fn observed_key(&self, c: &Candidate, o: &Observation) -> (u32, u32, Signature) {
        let t = self.two_power as i64;
        ((o.ap.rem_euclid(t)) as u32, (o.p % self.two_power as u64) as u32, self.target(c, o.p % self.odd as u64))
    }

    fn usable(&self, o: &Observation) -> bool {
        gcd(o.p, self.modulus as u64) == 1
    }

    /// Whether every observation fits the candidate for one common choice of 2-adic frame.
    fn frames_fit(&self, c: &Candidate, obs: &[Observation]) -> Result<bool> {
        let framed: BTreeSet<(ResidueMatrix, (u32, u32, Signature))> = obs
            .iter()
            .filter(|o| self.usable(o))
            .filter_map(|o| o.frame.map(|m| (m, self.observed_key(c, o))))
            .collect();
        let Some(fm) = framed.iter().next().map(|f| f.0.modulus()) else { return Ok(true) };
        if self.two_power % fm != 0 {
            return Ok(true);
        }
        let have: FxHashSet<(ResidueMatrix, (u32, u32, Signature))> = (0..self.g2.order() as usize)
            .zip(self.g2.elements())
            .map(|(i, x)| (x.reduce(fm).unwrap(), (x.trace(), x.det(), self.signature_at(c, i))))
            .collect();
        for f in GroupSlice::gl2(fm)?.elements() {
            let fi = f.inv()?;
            if framed.iter().all(|(m, k)| have.contains(&(f.mul_same(m).mul_same(&fi), *k))) {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Fraction of the candidate's Frobenius keys that were observed.
    pub fn coverage(&self, c: &Candidate, obs: &[Observation]) -> f64 {
        let keys = self.keys(c);
        let seen: BTreeSet<(u32, u32, Signature)> =
            obs.iter().filter(|o| self.usable(o)).map(|o| self.observed_key(c, o)).collect();
        seen.len() as f64 / keys.len() as f64
    }

    /// Keeps the candidates compatible with every observation.
    pub fn eliminate(&self, candidates: Vec<Candidate>, obs: &[Observation]) -> Result<Vec<Candidate>> {
        let mut out = Vec::new();
        for c in candidates {
            let keys = self.keys(&c);
            if obs.iter().filter(|o| self.usable(o)).all(|o| keys.contains(&self.observed_key(&c, o))) && self.frames_fit(&c, obs)? {
                out.push(c);
            }
        }
        Ok(out)
    }

    /// The fiber product for one candidate.
    pub fn fiber_product(&self, c: &Candidate) -> Result<FiberProduct> {
        // every signature must occur, otherwise the characters are not jointly surjective
        let mut by_sig: BTreeMap<Signature, usize> = BTreeMap::new();
        for i in 0..self.g2.order() as usize {
            by_sig.entry(self.signature_at(c, i)).or_insert(i);
        }
        let quotient = (1usize << self.quadratic.len()) * if self.cubic_tables.is_empty() { 1 } else { 3 };
        if by_sig.len() != quotient {
            return Err(Error::Inconsistency("entanglement characters are not independent on the 2-adic image".into()));
        }
        let kernel: Vec<u64> = (0..self.g2.order() as usize)
            .filter(|&i| self.signature_at(c, i) == Signature { eps: 0, cubic: 0 })
            .map(|i| self.g2.indices()[i])
            .collect();
        let join = |a: &ResidueMatrix, b: &ResidueMatrix| -> Result<ResidueMatrix> {
            if self.odd == 1 {
                Ok(*a)
            } else {
                ResidueMatrix::crt_join(&[*a, *b])
            }
        };
        let mut gens = Vec::new();
        let id_odd = ResidueMatrix::identity(self.odd);
        for k in small_generating_set(self.two_power, &kernel) {
            gens.push(join(&k, &id_odd)?);
        }
        if self.odd > 1 {
            for b in gl2_generators(self.odd) {
                let sig = self.target(c, b.det() as u64);
                let pos = *by_sig.get(&sig).ok_or_else(|| Error::Inconsistency("unreachable signature".into()))?;
                let a = ResidueMatrix::from_index(self.two_power, self.g2.indices()[pos]);
                gens.push(join(&a, &b)?);
            }
        }
        let expected = self.g2.order() as u128 * gl2_order(self.odd as u64) / quotient as u128;
        Ok(FiberProduct { setup: self.clone(), candidate: c.clone(), generators: gens, expected_order: expected })
    }
}

/// One explicit fiber product inside `GL_2(Z/m)`.
#[derive(Clone, Debug)]
pub struct FiberProduct {
    pub setup: FiberSetup,
    pub candidate: Candidate,
    pub generators: Vec<ResidueMatrix>,
    /// `|G2| |GL_2(Z/m_odd)| / |Q|`.
    pub expected_order: u128,
}

impl FiberProduct {
    pub fn modulus(&self) -> u32 {
        self.setup.modulus
    }

    pub fn index(&self) -> u128 {
        gl2_order(self.setup.modulus as u64) / self.expected_order
    }

    /// Membership: the 2-power part lies in `g2` and carries the signature the odd determinant demands.
    pub fn contains(&self, m: &ResidueMatrix) -> bool {
        self.contains_in_frame(m, &ResidueMatrix::identity(self.setup.two_power))
    }

    /// Membership after conjugating the 2-power part by `frame`.
    pub fn contains_in_frame(&self, m: &ResidueMatrix, frame: &ResidueMatrix) -> bool {
        let s = &self.setup;
        if m.modulus() != s.modulus {
            return false;
        }
        let a = frame.mul_same(&m.reduce(s.two_power).unwrap()).mul_same(&frame.inv().unwrap());
        let Some(pos) = s.g2.position(&a) else { return false };
        let d = if s.odd == 1 { 1 } else { m.reduce(s.odd).unwrap().det() as u64 };
        s.signature_at(&self.candidate, pos) == s.target(&self.candidate, d)
    }

    /// A frame in `GL_2(Z/2^e)` putting all of `ms` inside the fiber product, if one exists.
    pub fn frame_for(&self, ms: &[ResidueMatrix]) -> Result<Option<ResidueMatrix>> {
        for f in GroupSlice::gl2(self.setup.two_power)?.elements() {
            if ms.iter().all(|m| self.contains_in_frame(m, &f)) {
                return Ok(Some(f));
            }
        }
        Ok(None)
    }

    /// Stabilizer chain for the generated group.
    pub fn chain(&self) -> Result<ProductChain> {
        ProductChain::new(self.setup.modulus, &self.generators)
    }

    /// Drops generators while the generated order stays the same.
    pub fn reduce_generators(&mut self) -> Result<()> {
        let target = self.chain()?.order();
        let mut i = 0;
        while i < self.generators.len() {
            let mut trial = self.generators.clone();
            trial.remove(i);
            if !trial.is_empty() && ProductChain::new(self.setup.modulus, &trial)?.order() == target {
                self.generators = trial;
            } else {
                i += 1;
            }
        }
        Ok(())
    }

    /// Description of the defining conditions.
    pub fn predicate(&self) -> FiberPredicate {
        let s = &self.setup;
        let mut conditions = Vec::new();
        for (i, (e, f)) in s.quadratic.iter().zip(&self.candidate.eps).enumerate() {
            let keep: Vec<u64> =
                (0..s.g2.order() as usize).filter(|&j| s.eq.eval_at(f, j) == 0).map(|j| s.g2.indices()[j]).collect();
            conditions.push(Condition {
                kind: "quadratic".into(),
                character: format!("eps_{}(A) = ({} / det B)", i + 1, e.n_prime),
                two_adic_level: 1 << e.k,
                dirichlet_modulus: e.n_prime.unsigned_abs(),
                kernel_generators: small_generating_set(s.two_power, &keep).iter().map(|m| m.to_string()).collect(),
            });
        }
        if let Some(f) = s.cubic_conductor {
            let keep: Vec<u64> = (0..s.g2.order() as usize).filter(|&j| s.omega[j] == 0).map(|j| s.g2.indices()[j]).collect();
            let exps: Vec<String> = s.cubic_tables.iter().zip(&self.candidate.xi).map(|(t, j)| format!("j({})={j}", t.modulus)).collect();
            conditions.push(Condition {
                kind: "cubic".into(),
                character: format!("omega(A) = xi(det B), xi of conductor {f} with exponents {}", exps.join(" ")),
                two_adic_level: 2,
                dirichlet_modulus: f,
                kernel_generators: small_generating_set(s.two_power, &keep).iter().map(|m| m.to_string()).collect(),
            });
        }
        FiberPredicate {
            two_power: s.two_power,
            odd_part: s.odd,
            two_adic_generators: s.g2.gens().iter().map(|m| m.to_string()).collect(),
            conditions,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Condition {
    pub kind: String,
    pub character: String,
    pub two_adic_level: u32,
    pub dirichlet_modulus: u64,
    pub kernel_generators: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FiberPredicate {
    pub two_power: u32,
    pub odd_part: u32,
    pub two_adic_generators: Vec<String>,
    pub conditions: Vec<Condition>,
}
