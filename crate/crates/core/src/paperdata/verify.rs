//! Recomputes the group-theoretic facts the classification rests on.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use super::{bundled, Obstruction};
use crate::error::{Error, Result};
use crate::fingroup::character::ElementaryQuotient;
use crate::fingroup::lattice::{are_conjugate, m_set};
use crate::fingroup::quotient::{common_quotients, CayleyTable};
use crate::fingroup::GroupSlice;
use crate::modmat::sl2_generators;

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub suite: Suite,
    pub checks: Vec<Check>,
}

impl Report {
    fn new(suite: Suite) -> Report {
        Report { suite, checks: Vec::new() }
    }

    fn push(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check { name: name.into(), passed, detail: detail.into() });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "[{}] {} {}: {}", self.suite, if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail)?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Msets,
    Quo,
    Comm,
    Sg,
    #[serde(rename = "2bmod4")]
    TwoBMod4,
}

impl Suite {
    pub const ALL: [Suite; 5] = [Suite::Msets, Suite::Quo, Suite::Comm, Suite::Sg, Suite::TwoBMod4];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Msets => "msets",
            Suite::Quo => "quo",
            Suite::Comm => "comm",
            Suite::Sg => "sg",
            Suite::TwoBMod4 => "2bmod4",
        }
    }

    pub fn run(self) -> Result<Report> {
        match self {
            Suite::Msets => verify_m_sets(),
            Suite::Quo => verify_quo_intersections(),
            Suite::Comm => verify_commutator_indices(),
            Suite::Sg => verify_sg_membership(),
            Suite::TwoBMod4 => verify_2b_mod4_facts(),
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Parses a suite name; `all` yields every suite.
pub fn parse_suites(s: &str) -> Result<Vec<Suite>> {
    if s.eq_ignore_ascii_case("all") {
        return Ok(Suite::ALL.to_vec());
    }
    Ok(vec![Suite::from_str(s)?])
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Suite> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Parse(format!("unknown suite {s:?}")))
    }
}

fn hat_level(g: Obstruction) -> u32 {
    1 << g.m_level()
}

/// `M(G-hat(2^k))` up to `GL_2(Z/2^k)`-conjugacy.
pub fn m_set_of(g: Obstruction) -> Result<Vec<GroupSlice>> {
    let n = hat_level(g);
    m_set(&g.hat(n)?, &GroupSlice::gl2(n)?)
}

fn conj_in(h: &GroupSlice, reps: &[GroupSlice]) -> Option<usize> {
    let gl = GroupSlice::gl2(h.modulus()).ok()?;
    reps.iter().position(|r| are_conjugate(h, r, &gl))
}

pub fn verify_m_sets() -> Result<Report> {
    let mut rep = Report::new(Suite::Msets);
    let gl9 = GroupSlice::gl2(9)?;
    let sl9 = GroupSlice::generate(9, &sl2_generators(9))?;
    let comm9 = gl9.commutator_subgroup()?;
    // any H with [H,H] = SL_2(Z/9) and full determinant is all of GL_2(Z/9)
    rep.push(
        "M(GL2(9)) = {GL2(9)}",
        comm9 == sl9 && sl9.order() * 6 == gl9.order(),
        format!("[GL2(9),GL2(9)] has order {}, |SL2(9)| = {}", comm9.order(), sl9.order()),
    );

    let data = bundled()?;
    let k1 = data.builtin_group("K1")?;
    let mcn = m_set_of(Obstruction::Cn)?;
    let hat = Obstruction::Cn.hat(4)?;
    let ok = mcn.len() == 2 && conj_in(&hat, &mcn).is_some() && conj_in(&k1, &mcn).is_some();
    rep.push("M(2Cn-hat(4)) = {2Cn-hat(4), K1}", ok, format!("{} classes, orders {:?}", mcn.len(), orders(&mcn)));

    let mb = m_set_of(Obstruction::B)?;
    let ok = mb.len() == 1 && mb[0] == Obstruction::B.hat(4)?;
    rep.push("M(2B-hat(4)) = {2B-hat(4)}", ok, format!("{} classes", mb.len()));

    let mcs = m_set_of(Obstruction::Cs)?;
    rep.push("|M(2Cs-hat(8))| = 15", mcs.len() == 15, format!("{} classes", mcs.len()));
    let targets = vec![Obstruction::Cs.hat(4)?, data.builtin_group("K2")?, data.builtin_group("K3")?];
    let mut hit = [0usize; 3];
    let mut stray = 0;
    for h in &mcs {
        match conj_in(&h.reduce_mod(4)?, &targets) {
            Some(i) => hit[i] += 1,
            None => stray += 1,
        }
    }
    rep.push(
        "M(2Cs-hat(8)) mod 4 in {2Cs-hat(4), K2, K3}",
        stray == 0,
        format!("2Cs-hat(4): {}, K2: {}, K3: {}, other: {stray}", hit[0], hit[1], hit[2]),
    );
    Ok(rep)
}

fn orders(gs: &[GroupSlice]) -> Vec<u64> {
    gs.iter().map(|g| g.order()).collect()
}

fn describe(qs: &[CayleyTable]) -> String {
    let names: Vec<String> = qs
        .iter()
        .map(|q| match q.order() {
            1 => "0".to_string(),
            n if q.is_isomorphic(&CayleyTable::cyclic(n)).unwrap_or(false) => format!("Z/{n}"),
            n => format!("<non-cyclic of order {n}>"),
        })
        .collect();
    format!("{{{}}}", names.join(", "))
}

fn all_cyclic(qs: &[CayleyTable]) -> bool {
    qs.iter().all(|q| q.is_isomorphic(&CayleyTable::cyclic(q.order())).unwrap_or(false))
}

pub fn verify_quo_intersections() -> Result<Report> {
    let mut rep = Report::new(Suite::Quo);
    let gl9 = GroupSlice::gl2(9)?;
    for g in Obstruction::ALL {
        let want = if g == Obstruction::Cn { "{0, Z/2, Z/3, Z/6}" } else { "{0, Z/2}" };
        for (i, k) in m_set_of(g)?.iter().enumerate() {
            let qs = common_quotients(&gl9, k)?;
            let got = describe(&qs);
            rep.push(format!("Quo(GL2(9)) & Quo(K) for K = M({g}-hat)[{i}]"), got == want, got);
            rep.push(format!("common quotients cyclic for M({g}-hat)[{i}]"), all_cyclic(&qs), format!("{} classes", qs.len()));
        }
    }
    Ok(rep)
}

/// `[SL_2(Z/4) : [G-hat(4), G-hat(4)]]`.
pub fn commutator_index(g: Obstruction) -> Result<u64> {
    let c = g.hat(4)?.commutator_subgroup()?;
    Ok(48 / c.order())
}

pub fn verify_commutator_indices() -> Result<Report> {
    let mut rep = Report::new(Suite::Comm);
    let got: Vec<u64> = Obstruction::ALL.iter().map(|&g| commutator_index(g)).collect::<Result<_>>()?;
    rep.push(
        "[SL2 : [G-hat, G-hat]] for (2Cs, 2B, 2Cn)",
        got == [48, 12, 12],
        format!("({}, {}, {})", got[0], got[1], got[2]),
    );
    Ok(rep)
}

/// Whether H lies in `M(G-hat)`: contained in it, same determinant image, same commutator subgroup.
pub fn in_m_set(h: &GroupSlice, ghat: &GroupSlice) -> Result<bool> {
    Ok(h.is_subgroup_of(ghat) && h.det_image() == ghat.det_image() && h.commutator_subgroup()? == ghat.commutator_subgroup()?)
}

pub fn verify_sg_membership() -> Result<Report> {
    let mut rep = Report::new(Suite::Sg);
    for lg in bundled()?.labels() {
        let g = lg.obstruction;
        let n = hat_level(g);
        let h = lg.at(n)?;
        let mod2 = lg.at(2)? == g.mod2_group();
        let inm = in_m_set(&h, &g.hat(n)?)?;
        let index = lg.group.gl2_index();
        let level = lg.group.level()?;
        rep.push(
            format!("{} in S_{g}", lg.label),
            mod2 && inm && index == lg.label.index as u64 && level == lg.label.level,
            format!("H(2) = {g}: {mod2}, H({n}) in M: {inm}, index {index}, level {level}"),
        );
    }
    Ok(rep)
}

/// Number of index-2 subgroups of a finite group.
pub fn index_two_subgroups(g: &GroupSlice) -> Result<usize> {
    Ok((1usize << ElementaryQuotient::new(g, 2)?.dim) - 1)
}

pub fn verify_2b_mod4_facts() -> Result<Report> {
    let mut rep = Report::new(Suite::TwoBMod4);
    let data = bundled()?;
    for l in Obstruction::B.members() {
        let h4 = data.labeled(l)?.at(4)?;
        let idx = h4.gl2_index();
        let n2 = index_two_subgroups(&h4)?;
        rep.push(format!("{l}(4)"), idx == 3 && n2 == 7, format!("index {idx}, {n2} index-2 subgroups"));
    }
    let h4 = data.labeled("2.6.0.1")?.at(4)?;
    let n2 = index_two_subgroups(&h4)?;
    rep.push("2.6.0.1(4) contrast", n2 == 15, format!("{n2} index-2 subgroups"));
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn commutator_indices() {
        assert_eq!(commutator_index(Obstruction::Cs).unwrap(), 48);
        assert_eq!(commutator_index(Obstruction::B).unwrap(), 12);
        assert_eq!(commutator_index(Obstruction::Cn).unwrap(), 12);
    }

    #[test]
    fn suites_parse() {
        assert_eq!(parse_suites("all").unwrap().len(), 5);
        assert_eq!(parse_suites("2bmod4").unwrap(), vec![Suite::TwoBMod4]);
        assert!(parse_suites("bogus").is_err());
    }

    #[test]
    fn two_b_facts() {
        assert!(verify_2b_mod4_facts().unwrap().passed());
    }
}
