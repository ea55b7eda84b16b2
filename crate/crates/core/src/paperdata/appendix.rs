//! The table of example curves: one curve per 2-adic image, with `m_E` and the cyclicity correction.

use std::path::Path;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Deserialize;

use super::{Obstruction, TwoAdicLabel, BUNDLED_APPENDIX};
use crate::ellq::CurveModel;
use crate::error::{Error, Result};

#[derive(Debug, Deserialize)]
struct Raw {
    #[serde(rename = "G")]
    g: String,
    label: String,
    name: String,
    a1: i64,
    a2: i64,
    a3: i64,
    a4: i64,
    a6: i64,
    #[serde(rename = "mE")]
    m_e: u64,
    corr_num: Option<u64>,
    corr_den: Option<u64>,
}

#[derive(Clone, Debug)]
pub struct AppendixRow {
    pub obstruction: Obstruction,
    pub label: TwoAdicLabel,
    pub curve: CurveModel,
    pub m_e: u64,
    /// Tabulated cyclicity correction factor; absent for 2Cs rows.
    pub correction: Option<BigRational>,
}

impl AppendixRow {
    pub fn name(&self) -> String {
        self.curve.label()
    }
}

pub fn load_appendix(text: &str) -> Result<Vec<AppendixRow>> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for rec in rdr.deserialize::<Raw>() {
        let r = rec.map_err(|e| Error::Parse(format!("appendix table: {e}")))?;
        let obstruction: Obstruction = r.g.parse()?;
        if Obstruction::of_label(&r.label) != Some(obstruction) {
            return Err(Error::Inconsistency(format!("{} is not a {} label", r.label, r.g)));
        }
        let correction = match (r.corr_num, r.corr_den) {
            (Some(n), Some(d)) if d > 0 => Some(BigRational::new(BigInt::from(n), BigInt::from(d))),
            (None, None) => None,
            _ => return Err(Error::Parse(format!("appendix table: bad correction for {}", r.name))),
        };
        let label: TwoAdicLabel = r.label.parse()?;
        if r.m_e % label.level as u64 != 0 {
            return Err(Error::Inconsistency(format!("m_E = {} of {} is not divisible by the level {}", r.m_e, r.name, label.level)));
        }
        rows.push(AppendixRow {
            obstruction,
            label,
            curve: CurveModel::new([r.a1, r.a2, r.a3, r.a4, r.a6])?.named(&r.name),
            m_e: r.m_e,
            correction,
        });
    }
    Ok(rows)
}

pub fn load_appendix_dir(dir: &Path) -> Result<Vec<AppendixRow>> {
    let path = dir.join("appendix.csv");
    let text = std::fs::read_to_string(&path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    load_appendix(&text)
}

static ROWS: OnceLock<Vec<AppendixRow>> = OnceLock::new();

/// The bundled table.
pub fn appendix_rows() -> &'static [AppendixRow] {
    ROWS.get_or_init(|| load_appendix(BUNDLED_APPENDIX).expect("bundled appendix table parses"))
}

pub(crate) fn install_rows(rows: Vec<AppendixRow>) -> Result<()> {
    ROWS.set(rows).map_err(|_| Error::Domain("appendix table already loaded".into()))
}
