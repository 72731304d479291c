//! JSON weight specifications.
//!
//! ```json
//! {"kind":"power","n":2,"m":2}
//! {"kind":"radial","m":2,"a":{"generator":"geometric","r":"3/2"}}
//! {"kind":"radial","m":2,"a":{"list":["1","2","9/2"]}}
//! {"kind":"table","m":2,"entries":[{"alpha":[1,0],"rho":"3"}],"fallback":"power:2"}
//! {"kind":"perturbed45","n":2,"m":2,"L":2}
//! ```
//!
//! Rationals are `"p/q"` strings; plain integers and finite decimals are
//! accepted on input. Every kind takes an optional `"scale"`.

use std::collections::BTreeMap;

use rug::{Integer, Rational};
use serde::{Deserialize, Serialize};

use super::{RadialSequence, WeightFunction, WeightKind};
use crate::error::{Error, Result};
use crate::multiindex::MultiIndex;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum WeightSpec {
    Power {
        n: u32,
        m: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        scale: Option<String>,
    },
    Radial {
        m: usize,
        a: RadialSpec,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        scale: Option<String>,
    },
    Table {
        m: usize,
        entries: Vec<TableEntry>,
        fallback: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        scale: Option<String>,
    },
    #[serde(rename = "perturbed45")]
    Perturbed {
        n: u32,
        m: usize,
        #[serde(rename = "L")]
        blocks: u32,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        scale: Option<String>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RadialSpec {
    List {
        list: Vec<String>,
    },
    Generator {
        generator: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n: Option<u32>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        r: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        coefficients: Option<Vec<String>>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableEntry {
    pub alpha: Vec<u32>,
    pub rho: String,
}

/// Parses `"p/q"`, `"p"` or a finite decimal such as `"0.25"` exactly.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    if let Ok(r) = s.parse::<Rational>() {
        return Ok(r);
    }
    let bad = || Error::Spec(format!("not a rational: {s:?}"));
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int_part, frac_part) = body.split_once('.').ok_or_else(bad)?;
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit())
        || (int_part.is_empty() && frac_part.is_empty())
    {
        return Err(bad());
    }
    let digits: Integer = format!("{int_part}{frac_part}")
        .parse::<Integer>()
        .map_err(|_| bad())?;
    let den = Integer::from(Integer::u_pow_u(10, frac_part.len() as u32));
    let r = Rational::from((digits, den));
    Ok(if neg { -r } else { r })
}

fn parse_scale(scale: &Option<String>) -> Result<Option<Rational>> {
    scale.as_deref().map(parse_rational).transpose()
}

fn parse_fallback(s: &str) -> Result<RadialSequence> {
    let (name, arg) = s
        .split_once(':')
        .ok_or_else(|| Error::Spec(format!("fallback must look like \"power:<n>\", got {s:?}")))?;
    match name {
        "power" => Ok(RadialSequence::Power(arg.trim().parse().map_err(|_| {
            Error::Spec(format!("bad power order in fallback {s:?}"))
        })?)),
        "geometric" => Ok(RadialSequence::Geometric(parse_rational(arg)?)),
        _ => Err(Error::Spec(format!("unknown fallback rule {name:?}"))),
    }
}

fn fallback_string(a: &RadialSequence) -> Result<String> {
    match a {
        RadialSequence::Power(n) => Ok(format!("power:{n}")),
        RadialSequence::Geometric(r) => Ok(format!("geometric:{r}")),
        _ => Err(Error::Spec("table fallback must be power or geometric".into())),
    }
}

impl RadialSpec {
    pub fn to_sequence(&self) -> Result<RadialSequence> {
        match self {
            RadialSpec::List { list } => Ok(RadialSequence::List(
                list.iter().map(|s| parse_rational(s)).collect::<Result<_>>()?,
            )),
            RadialSpec::Generator {
                generator,
                n,
                r,
                coefficients,
            } => match generator.as_str() {
                "power" => Ok(RadialSequence::Power(
                    n.ok_or_else(|| Error::Spec("power generator needs \"n\"".into()))?,
                )),
                "geometric" => Ok(RadialSequence::Geometric(parse_rational(
                    r.as_deref()
                        .ok_or_else(|| Error::Spec("geometric generator needs \"r\"".into()))?,
                )?)),
                "polynomial" => Ok(RadialSequence::Polynomial(
                    coefficients
                        .as_ref()
                        .ok_or_else(|| {
                            Error::Spec("polynomial generator needs \"coefficients\"".into())
                        })?
                        .iter()
                        .map(|s| parse_rational(s))
                        .collect::<Result<_>>()?,
                )),
                other => Err(Error::Spec(format!("unknown generator {other:?}"))),
            },
        }
    }

    pub fn from_sequence(a: &RadialSequence) -> Self {
        let strings = |v: &[Rational]| v.iter().map(|x| x.to_string()).collect();
        match a {
            RadialSequence::List(v) => RadialSpec::List { list: strings(v) },
            RadialSequence::Power(n) => RadialSpec::Generator {
                generator: "power".into(),
                n: Some(*n),
                r: None,
                coefficients: None,
            },
            RadialSequence::Geometric(r) => RadialSpec::Generator {
                generator: "geometric".into(),
                n: None,
                r: Some(r.to_string()),
                coefficients: None,
            },
            RadialSequence::Polynomial(c) => RadialSpec::Generator {
                generator: "polynomial".into(),
                n: None,
                r: None,
                coefficients: Some(strings(c)),
            },
        }
    }
}

impl WeightSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Spec(e.to_string()))
    }

    pub fn build(&self) -> Result<WeightFunction> {
        let (w, scale) = match self {
            WeightSpec::Power { n, m, scale } => (WeightFunction::power(*m, *n)?, scale),
            WeightSpec::Radial { m, a, scale } => {
                (WeightFunction::radial(*m, a.to_sequence()?)?, scale)
            }
            WeightSpec::Table {
                m,
                entries,
                fallback,
                scale,
            } => {
                let mut map = BTreeMap::new();
                for e in entries {
                    if e.alpha.is_empty() {
                        return Err(Error::Spec("table entry with empty alpha".into()));
                    }
                    let alpha = MultiIndex::new(e.alpha.clone());
                    if map.insert(alpha.clone(), parse_rational(&e.rho)?).is_some() {
                        return Err(Error::Spec(format!("duplicate table entry {alpha}")));
                    }
                }
                (
                    WeightFunction::table(*m, map, parse_fallback(fallback)?)?,
                    scale,
                )
            }
            WeightSpec::Perturbed {
                n,
                m,
                blocks,
                scale,
            } => (WeightFunction::ray_perturbed(*n, *m, *blocks)?, scale),
        };
        match parse_scale(scale)? {
            Some(c) => w.scaled(c),
            None => Ok(w),
        }
    }
}

impl TryFrom<&WeightFunction> for WeightSpec {
    type Error = Error;

    fn try_from(w: &WeightFunction) -> Result<Self> {
        let scale = (*w.scale() != 1).then(|| w.scale().to_string());
        let m = w.dim();
        Ok(match w.kind() {
            WeightKind::Power { n } => WeightSpec::Power { n: *n, m, scale },
            WeightKind::Radial(a) => WeightSpec::Radial {
                m,
                a: RadialSpec::from_sequence(a),
                scale,
            },
            WeightKind::Table { entries, fallback } => WeightSpec::Table {
                m,
                entries: entries
                    .iter()
                    .map(|(alpha, v)| TableEntry {
                        alpha: alpha.entries().to_vec(),
                        rho: v.to_string(),
                    })
                    .collect(),
                fallback: fallback_string(fallback)?,
                scale,
            },
            WeightKind::RayPerturbed(p) => WeightSpec::Perturbed {
                n: p.n,
                m,
                blocks: p.blocks,
                scale,
            },
        })
    }
}
