//! Bundled group data: the mod-2 obstructions, K1-K3, the 25 2-adic images, and the appendix curves.

mod appendix;
pub mod verify;

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::fingroup::GroupSlice;
use crate::modmat::ResidueMatrix;

pub use appendix::{appendix_rows, load_appendix, load_appendix_dir, AppendixRow};

pub const BUNDLED_GROUPS: &str = include_str!("groups.dat");
pub const BUNDLED_APPENDIX: &str = include_str!("appendix.csv");

/// The three proper subgroups of `GL_2(Z/2)` up to conjugacy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Obstruction {
    Cs,
    B,
    Cn,
}

impl Obstruction {
    pub const ALL: [Obstruction; 3] = [Obstruction::Cs, Obstruction::B, Obstruction::Cn];

    pub fn name(self) -> &'static str {
        match self {
            Obstruction::Cs => "2Cs",
            Obstruction::B => "2B",
            Obstruction::Cn => "2Cn",
        }
    }

    pub fn mod2_generator(self) -> ResidueMatrix {
        match self {
            Obstruction::Cs => ResidueMatrix::identity(2),
            Obstruction::B => ResidueMatrix::new(2, [1, 1, 0, 1]),
            Obstruction::Cn => ResidueMatrix::new(2, [0, 1, 1, 1]),
        }
    }

    pub fn mod2_group(self) -> GroupSlice {
        GroupSlice::generate(2, &[self.mod2_generator()]).expect("mod 2 group")
    }

    /// The full preimage `G-hat(n)` of the mod-2 group in `GL_2(Z/n)`, n even.
    pub fn hat(self, n: u32) -> Result<GroupSlice> {
        self.mod2_group().preimage(n)
    }

    /// Labels of the 2-adic images that occur for G-Serre curves.
    pub fn members(self) -> &'static [&'static str] {
        match self {
            Obstruction::Cs => &[
                "2.6.0.1", "8.12.0.2", "4.12.0.2", "8.12.0.1", "4.12.0.1", "8.12.0.3", "8.24.0.5", "8.24.0.7",
                "8.24.0.2", "8.24.0.1", "8.12.0.4", "8.24.0.6", "8.24.0.8", "8.24.0.3", "8.24.0.4",
            ],
            Obstruction::B => &["2.3.0.1", "8.6.0.2", "8.6.0.4", "8.6.0.1", "8.6.0.6", "8.6.0.3", "8.6.0.5"],
            Obstruction::Cn => &["2.2.0.1", "4.4.0.2", "8.4.0.1"],
        }
    }

    /// Exponent k with `M(G-hat(2^k))` the relevant set of 2-adic reductions.
    pub fn m_level(self) -> u32 {
        match self {
            Obstruction::Cs => 3,
            _ => 2,
        }
    }

    /// Index of the adelic image of a G-Serre curve in `GL_2(Z-hat)`.
    pub fn adelic_index(self) -> u64 {
        match self {
            Obstruction::Cs => 48,
            _ => 12,
        }
    }

    pub fn of_label(label: &str) -> Option<Obstruction> {
        Obstruction::ALL.into_iter().find(|g| g.members().contains(&label))
    }
}

impl fmt::Display for Obstruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Obstruction {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Obstruction::ALL
            .into_iter()
            .find(|g| g.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Parse(format!("unknown obstruction {s:?}")))
    }
}

impl Serialize for Obstruction {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

/// `A.B.C.D`: level, index, genus, tiebreak.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TwoAdicLabel {
    pub level: u32,
    pub index: u32,
    pub genus: u32,
    pub tiebreak: u32,
}

impl FromStr for TwoAdicLabel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<u32> = s
            .trim()
            .split('.')
            .map(|p| p.parse::<u32>().map_err(|_| Error::Parse(format!("bad 2-adic label {s:?}"))))
            .collect::<Result<_>>()?;
        match parts[..] {
            [level, index, genus, tiebreak] if level.is_power_of_two() && level <= 32 => {
                Ok(TwoAdicLabel { level, index, genus, tiebreak })
            }
            _ => Err(Error::Parse(format!("bad 2-adic label {s:?}"))),
        }
    }
}

impl fmt::Display for TwoAdicLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}.{}.{}", self.level, self.index, self.genus, self.tiebreak)
    }
}

impl Serialize for TwoAdicLabel {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[derive(Clone, Debug)]
pub struct LabeledGroup {
    pub label: TwoAdicLabel,
    pub obstruction: Obstruction,
    /// The image modulo 8.
    pub group: GroupSlice,
}

impl LabeledGroup {
    /// The image modulo `2^e` for `e <= 3`.
    pub fn at(&self, modulus: u32) -> Result<GroupSlice> {
        self.group.reduce_mod(modulus)
    }
}

/// Groups read from a `groups.dat` file.
#[derive(Clone, Debug)]
pub struct GroupData {
    named: BTreeMap<String, GroupSlice>,
    labeled: BTreeMap<TwoAdicLabel, LabeledGroup>,
}

fn integrity(msg: String) -> Error {
    Error::Inconsistency(format!("group data integrity: {msg}"))
}

impl GroupData {
    pub fn parse(text: &str) -> Result<GroupData> {
        let mut named = BTreeMap::new();
        let mut labeled = BTreeMap::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 3 {
                return Err(Error::Parse(format!("groups.dat line {}: expected 3 fields", no + 1)));
            }
            let n: u32 = f[1].parse().map_err(|_| Error::Parse(format!("groups.dat line {}: bad modulus", no + 1)))?;
            let gens = ResidueMatrix::parse_list(f[2], n)?;
            let g = GroupSlice::generate(n, &gens)?;
            if f[0].contains('.') {
                let label: TwoAdicLabel = f[0].parse()?;
                let obstruction = Obstruction::of_label(f[0])
                    .ok_or_else(|| integrity(format!("{} is not in any S_G", f[0])))?;
                if n != 8 {
                    return Err(integrity(format!("{label} must be given modulo 8")));
                }
                labeled.insert(label, LabeledGroup { label, obstruction, group: g });
            } else {
                named.insert(f[0].to_string(), g);
            }
        }
        let data = GroupData { named, labeled };
        data.check()?;
        Ok(data)
    }

    pub fn from_dir(dir: &Path) -> Result<GroupData> {
        let path = dir.join("groups.dat");
        let text = std::fs::read_to_string(&path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        GroupData::parse(&text)
    }

    fn check(&self) -> Result<()> {
        for g in Obstruction::ALL {
            let stored = self.named.get(g.name()).ok_or_else(|| integrity(format!("missing {g}")))?;
            if *stored != g.mod2_group() {
                return Err(integrity(format!("{g} does not match its definition")));
            }
            for l in g.members() {
                if !self.labeled.contains_key(&l.parse::<TwoAdicLabel>()?) {
                    return Err(integrity(format!("missing {l}")));
                }
            }
        }
        for (k, want) in [("K1", Obstruction::Cn), ("K2", Obstruction::Cs), ("K3", Obstruction::Cs)] {
            let grp = self.named.get(k).ok_or_else(|| integrity(format!("missing {k}")))?;
            if grp.reduce_mod(2)? != want.mod2_group() {
                return Err(integrity(format!("{k} does not reduce to {want}")));
            }
        }
        for lg in self.labeled.values() {
            let h = &lg.group;
            if h.reduce_mod(2)? != lg.obstruction.mod2_group() {
                return Err(integrity(format!("{} does not reduce to {}", lg.label, lg.obstruction)));
            }
            if h.level()? != lg.label.level {
                return Err(integrity(format!("{} has level {}", lg.label, h.level()?)));
            }
            if h.gl2_index() != lg.label.index as u64 {
                return Err(integrity(format!("{} has index {}", lg.label, h.gl2_index())));
            }
            let n = 1 << lg.obstruction.m_level();
            if !verify::in_m_set(&h.reduce_mod(n)?, &lg.obstruction.hat(n)?)? {
                return Err(integrity(format!("{}({n}) is not in M({}-hat({n}))", lg.label, lg.obstruction)));
            }
        }
        Ok(())
    }

    pub fn labeled(&self, label: &str) -> Result<&LabeledGroup> {
        let l: TwoAdicLabel = label.parse()?;
        self.labeled.get(&l).ok_or_else(|| Error::Domain(format!("no bundled group for label {label}")))
    }

    pub fn labels(&self) -> impl Iterator<Item = &LabeledGroup> {
        self.labeled.values()
    }

    /// Named groups: file entries, `GL2(N)`, `SL2(N)`, `<G>-hat(N)`, and any bundled 2-adic label (mod 8).
    pub fn builtin_group(&self, name: &str) -> Result<GroupSlice> {
        let name = name.trim().replace('₁', "1").replace('₂', "2").replace('₃', "3");
        if let Some(g) = self.named.get(name.as_str()) {
            return Ok(g.clone());
        }
        let arg = |prefix: &str| -> Option<u32> {
            name.strip_prefix(prefix)?.strip_prefix('(')?.strip_suffix(')')?.parse().ok()
        };
        if let Some(n) = arg("GL2") {
            return GroupSlice::gl2(n);
        }
        if let Some(n) = arg("SL2") {
            return GroupSlice::generate(n, &crate::modmat::sl2_generators(n));
        }
        for g in Obstruction::ALL {
            if let Some(n) = arg(&format!("{}-hat", g.name())) {
                return g.hat(n);
            }
        }
        if name.contains('.') {
            return Ok(self.labeled(&name)?.group.clone());
        }
        Err(Error::Domain(format!("unknown group {name:?}")))
    }
}

static BUNDLED: OnceLock<std::result::Result<GroupData, String>> = OnceLock::new();

/// The bundled group data, parsed and checked once.
pub fn bundled() -> Result<&'static GroupData> {
    BUNDLED
        .get_or_init(|| GroupData::parse(BUNDLED_GROUPS).map_err(|e| e.to_string()))
        .as_ref()
        .map_err(|e| Error::Inconsistency(e.clone()))
}

/// Replaces the bundled data with `dir/groups.dat` (and `dir/appendix.csv` when present).
///
/// Must run before anything reads the data; the files pass the same integrity checks.
pub fn install_data_dir(dir: &Path) -> Result<()> {
    let groups = GroupData::from_dir(dir);
    let fail = groups.as_ref().err().cloned();
    if BUNDLED.set(groups.map_err(|e| e.to_string())).is_err() {
        return Err(Error::Domain("group data already loaded".into()));
    }
    if let Some(e) = fail {
        return Err(e);
    }
    if dir.join("appendix.csv").exists() {
        appendix::install_rows(appendix::load_appendix_dir(dir)?)?;
    }
    Ok(())
}

/// Shorthand for `bundled()?.builtin_group(name)`.
pub fn builtin_group(name: &str) -> Result<GroupSlice> {
    bundled()?.builtin_group(name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_parse() {
        let l: TwoAdicLabel = "8.24.0.5".parse().unwrap();
        assert_eq!((l.level, l.index, l.genus, l.tiebreak), (8, 24, 0, 5));
        assert_eq!(l.to_string(), "8.24.0.5");
        assert!("3.2.0.1".parse::<TwoAdicLabel>().is_err());
        assert!("8.24.0".parse::<TwoAdicLabel>().is_err());
        assert_eq!(Obstruction::of_label("4.4.0.2"), Some(Obstruction::Cn));
        assert_eq!(Obstruction::of_label("8.6.0.6"), Some(Obstruction::B));
        assert_eq!(Obstruction::ALL.iter().map(|g| g.members().len()).sum::<usize>(), 25);
    }

    #[test]
    fn bundled_groups() {
        let d = bundled().unwrap();
        assert_eq!(d.labels().count(), 25);
        assert_eq!(builtin_group("2Cn").unwrap().order(), 3);
        assert_eq!(builtin_group("2.6.0.1").unwrap().order(), 256);
        assert_eq!(builtin_group("K₂").unwrap().reduce_mod(2).unwrap(), Obstruction::Cs.mod2_group());
        assert_eq!(builtin_group("K1").unwrap().order(), 24);
        assert_eq!(builtin_group("GL2(9)").unwrap().order(), 3888);
        assert_eq!(builtin_group("SL2(4)").unwrap().order(), 48);
        assert_eq!(builtin_group("2B-hat(4)").unwrap().gl2_index(), 3);
        assert!(builtin_group("nonsense").is_err());
    }

    #[test]
    fn tampered_data_is_rejected() {
        let bad = BUNDLED_GROUPS.replace("8.4.0.1 8 0,1,1,1;0,1,1,5;0,1,5,3", "8.4.0.1 8 0,1,1,1;0,1,1,5;0,1,5,1");
        assert_ne!(bad, BUNDLED_GROUPS);
        assert!(matches!(GroupData::parse(&bad), Err(Error::Inconsistency(_))));
        let missing: String = BUNDLED_GROUPS.lines().filter(|l| !l.starts_with("8.6.0.3")).map(|l| format!("{l}\n")).collect();
        assert!(matches!(GroupData::parse(&missing), Err(Error::Inconsistency(_))));
    }
}
