//! Golden data: closed forms of the twelve families as polynomials in `d` and
//! the externally published check values. The data file is embedded in the
//! binary and checked against its SHA-256 digest when first loaded.

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::singularity::Configuration;

const DATA: &str = include_str!("../data/closed_forms.json");
const DATA_SHA256: &str = include_str!("../data/closed_forms.json.sha256");
const DATA_VERSION: u32 = 1;

#[derive(Deserialize)]
struct RawFile {
    version: u32,
    families: Vec<RawFamily>,
    external: Vec<RawExternal>,
}

#[derive(Deserialize)]
struct RawFamily {
    family: String,
    d_min: u32,
    entries: Vec<RawEntry>,
}

#[derive(Deserialize)]
struct RawEntry {
    s: u32,
    scale: String,
    factors: Vec<(Vec<i64>, u32)>,
}

#[derive(Deserialize)]
struct RawExternal {
    source: String,
    d: u32,
    spec: String,
    r: u32,
    s: u32,
    ordered: bool,
    value: String,
}

/// `scale · ∏ factor_i(d)^power_i` for one family and one `s`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClosedForm {
    pub family: Configuration,
    pub s: u32,
    pub d_min: u32,
    pub scale: BigRational,
    /// Coefficients from the highest power of `d` down, with an exponent.
    pub factors: Vec<(Vec<BigInt>, u32)>,
}

impl ClosedForm {
    /// Exact evaluation at any `d`; fails if the result is not an integer.
    pub fn evaluate(&self, d: u32) -> Result<BigInt> {
        let x = BigInt::from(d);
        let mut value = self.scale.clone();
        for (coeffs, power) in &self.factors {
            let f = coeffs.iter().fold(BigInt::zero(), |acc, c| acc * &x + c);
            value *= BigRational::from_integer(f.pow(*power));
        }
        if !value.is_integer() {
            return Err(Error::NonExactDivision(format!(
                "closed form for {} at d = {d}, s = {} is {value}",
                self.family, self.s
            )));
        }
        Ok(value.to_integer())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExternalValue {
    /// `cusp-C3`, `cusp-C4` or `BPS-g2`.
    pub source: String,
    pub d: u32,
    pub config: Configuration,
    pub r: u32,
    pub s: u32,
    pub ordered: bool,
    pub value: BigInt,
}

#[derive(Debug)]
pub struct ReferenceData {
    pub closed_forms: Vec<ClosedForm>,
    pub external: Vec<ExternalValue>,
}

fn parse_int(text: &str) -> Result<BigInt> {
    text.parse()
        .map_err(|_| Error::Reference(format!("bad integer `{text}`")))
}

fn parse_rational(text: &str) -> Result<BigRational> {
    match text.split_once('/') {
        Some((p, q)) => {
            let q = parse_int(q)?;
            if q.is_zero() {
                return Err(Error::Reference(format!("zero denominator in `{text}`")));
            }
            Ok(BigRational::new(parse_int(p)?, q))
        }
        None => Ok(BigRational::from_integer(parse_int(text)?)),
    }
}

/// Parses and checks a data file. `expected_sha256` is a lowercase hex digest.
pub fn parse_reference(text: &str, expected_sha256: &str) -> Result<ReferenceData> {
    let digest = hex::encode(Sha256::digest(text.as_bytes()));
    if digest != expected_sha256.trim() {
        return Err(Error::Reference(format!(
            "checksum mismatch: expected {}, found {digest}",
            expected_sha256.trim()
        )));
    }
    let raw: RawFile =
        serde_json::from_str(text).map_err(|e| Error::Reference(format!("malformed JSON: {e}")))?;
    if raw.version != DATA_VERSION {
        return Err(Error::Reference(format!(
            "data version {} is not {DATA_VERSION}",
            raw.version
        )));
    }

    let mut closed_forms = Vec::new();
    for fam in raw.families {
        let family: Configuration = fam.family.parse()?;
        if family.d_min() != fam.d_min {
            return Err(Error::Reference(format!(
                "{family}: stored d_min {} differs from {}",
                fam.d_min,
                family.d_min()
            )));
        }
        for entry in fam.entries {
            closed_forms.push(ClosedForm {
                family,
                s: entry.s,
                d_min: fam.d_min,
                scale: parse_rational(&entry.scale)?,
                factors: entry
                    .factors
                    .into_iter()
                    .map(|(c, p)| (c.into_iter().map(BigInt::from).collect(), p))
                    .collect(),
            });
        }
    }
    let external = raw
        .external
        .into_iter()
        .map(|e| {
            Ok(ExternalValue {
                source: e.source,
                d: e.d,
                config: e.spec.parse()?,
                r: e.r,
                s: e.s,
                ordered: e.ordered,
                value: parse_int(&e.value)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let data = ReferenceData {
        closed_forms,
        external,
    };
    data.check_consistency()?;
    Ok(data)
}

impl ReferenceData {
    pub fn closed_form(&self, family: Configuration, s: u32) -> Option<&ClosedForm> {
        self.closed_forms
            .iter()
            .find(|c| c.family == family && c.s == s)
    }

    /// Every external value must agree with the closed form of its family,
    /// divided by the node factorial when the value is unordered. The cusp
    /// values with two nodes sit below that family's `d_min`.
    fn check_consistency(&self) -> Result<()> {
        for ext in &self.external {
            let form = self.closed_form(ext.config, ext.s).ok_or_else(|| {
                Error::Reference(format!(
                    "no closed form for {} at s = {}",
                    ext.config, ext.s
                ))
            })?;
            if ext.config.r_for(ext.d, ext.s) != Some(ext.r) {
                return Err(Error::Reference(format!(
                    "{} value at d = {}, s = {} has the wrong r = {}",
                    ext.source, ext.d, ext.s, ext.r
                )));
            }
            let mut expected = form.evaluate(ext.d)?;
            if !ext.ordered {
                let f: BigInt = (1..=ext.config.nodes).map(BigInt::from).product();
                expected /= f;
            }
            if expected != ext.value {
                return Err(Error::Reference(format!(
                    "{} at (r, s) = ({}, {}): closed form gives {expected}, stored {}",
                    ext.source, ext.r, ext.s, ext.value
                )));
            }
        }
        Ok(())
    }
}

/// The embedded data, parsed and checked once.
pub fn reference() -> &'static ReferenceData {
    static DATA_CELL: OnceLock<ReferenceData> = OnceLock::new();
    DATA_CELL.get_or_init(|| {
        parse_reference(DATA, DATA_SHA256)
            .unwrap_or_else(|e| panic!("embedded reference data: {e}"))
    })
}

/// `(r, value)` of the closed form for `family` at `(d, s)`.
pub fn closed_form_value(family: Configuration, d: u32, s: u32) -> Result<(u32, BigInt)> {
    let form = reference()
        .closed_form(family, s)
        .ok_or_else(|| Error::InvalidArgument(format!("no closed form for {family} at s = {s}")))?;
    if d < form.d_min {
        return Err(Error::OutsideProvenRange(format!(
            "the closed form for {family} holds for d >= {}, got d = {d}",
            form.d_min
        )));
    }
    let r = family.r_for(d, s).ok_or_else(|| {
        Error::Dimension(format!(
            "no cell with s = {s} for {family} at d = {d}: r would be negative"
        ))
    })?;
    Ok((r, form.evaluate(d)?))
}

pub fn external_values() -> &'static [ExternalValue] {
    &reference().external
}

/// Raw file contents, for export.
pub fn raw_data() -> &'static str {
    DATA
}
