use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::field::PolyVectorField;
use super::parse::parse_system_with;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemId {
    Bz,
    Genesio,
    Michelson,
    SprottEVariant,
    Dumm,
    Custom,
}

impl SystemId {
    pub const BUILTIN: [SystemId; 5] =
        [SystemId::Bz, SystemId::Genesio, SystemId::Michelson, SystemId::SprottEVariant, SystemId::Dumm];

    pub fn as_str(self) -> &'static str {
        match self {
            SystemId::Bz => "bz",
            SystemId::Genesio => "genesio",
            SystemId::Michelson => "michelson",
            SystemId::SprottEVariant => "sprott_e_variant",
            SystemId::Dumm => "dumm",
            SystemId::Custom => "custom",
        }
    }
}

impl fmt::Display for SystemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SystemId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bz" => Ok(SystemId::Bz),
            "genesio" => Ok(SystemId::Genesio),
            "michelson" => Ok(SystemId::Michelson),
            "sprott_e_variant" | "sprott" => Ok(SystemId::SprottEVariant),
            "dumm" => Ok(SystemId::Dumm),
            "custom" => Ok(SystemId::Custom),
            _ => Err(Error::UnknownSystem(s.to_string())),
        }
    }
}

/// Open or closed interval bound on a parameter value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Range {
    Positive,
    Any,
}

impl Range {
    pub fn contains(self, v: f64) -> bool {
        v.is_finite()
            && match self {
                Range::Positive => v > 0.0,
                Range::Any => true,
            }
    }

    fn describe(self) -> &'static str {
        match self {
            Range::Positive => "(0, inf)",
            Range::Any => "(-inf, inf)",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ParamSpec {
    pub name: &'static str,
    pub default: f64,
    pub range: Range,
}

#[derive(Clone, Debug, Serialize)]
pub struct ZooEntry {
    pub id: SystemId,
    pub params: Vec<ParamSpec>,
    /// Velocity component (1-based) whose level set the analysis uses by default.
    pub default_component: usize,
    source: &'static str,
}

const BZ_SRC: &str = "\
param a = 1
param b = 1
param c = 1
dx = y
dy = z
dz = x - 4*y - z + x^2 - a*y^2 - b*x*z - c*x^2*z
";

// a = b = 1 puts a purely imaginary pair at the origin, so the defaults
// sit in the ab < 1 region where both equilibria are saddle foci.
const GENESIO_SRC: &str = "\
param a = 0.44
param b = 1.1
dx = y
dy = z
dz = -a*z - b*y - x*(1 + x)
";

const MICHELSON_SRC: &str = "\
param c = 1
dx = y
dy = z
dz = c^2 - y - x^2/2
";

const SPROTT_SRC: &str = "\
param a = 1
dx = y*z + a
dy = x^2 - y
dz = 1 - 4*x
";

const DUMM_SRC: &str = "\
param eps = 0.1
param a = 1
dx = y + eps*x
dy = z
dz = -a*z + y^2 - x
";

pub fn zoo_entry(id: SystemId) -> Option<ZooEntry> {
    let p = |name, default, range| ParamSpec { name, default, range };
    let (params, default_component, source) = match id {
        SystemId::Bz => (
            vec![p("a", 1.0, Range::Positive), p("b", 1.0, Range::Positive), p("c", 1.0, Range::Positive)],
            1,
            BZ_SRC,
        ),
        SystemId::Genesio => (vec![p("a", 0.44, Range::Positive), p("b", 1.1, Range::Positive)], 1, GENESIO_SRC),
        SystemId::Michelson => (vec![p("c", 1.0, Range::Positive)], 1, MICHELSON_SRC),
        SystemId::SprottEVariant => (vec![p("a", 1.0, Range::Positive)], 3, SPROTT_SRC),
        SystemId::Dumm => (vec![p("eps", 0.1, Range::Any), p("a", 1.0, Range::Any)], 1, DUMM_SRC),
        SystemId::Custom => return None,
    };
    Some(ZooEntry { id, params, default_component, source })
}

impl ZooEntry {
    pub fn source(&self) -> &'static str {
        self.source
    }

    /// Defaults overlaid with `overrides`, validated against the ranges.
    pub fn resolve_params(&self, overrides: &BTreeMap<String, f64>) -> Result<BTreeMap<String, f64>> {
        for k in overrides.keys() {
            if !self.params.iter().any(|p| p.name == k) {
                return Err(Error::UnknownParameter { system: self.id.to_string(), param: k.clone() });
            }
        }
        let mut out = BTreeMap::new();
        for p in &self.params {
            let v = overrides.get(p.name).copied().unwrap_or(p.default);
            if !p.range.contains(v) {
                return Err(Error::ParameterOutOfRange {
                    name: p.name.to_string(),
                    value: v,
                    range: p.range.describe().to_string(),
                });
            }
            out.insert(p.name.to_string(), v);
        }
        Ok(out)
    }

    /// Half-width of the cube centred at the origin searched for equilibria.
    pub fn search_half_width(&self, params: &BTreeMap<String, f64>) -> f64 {
        match self.id {
            SystemId::Bz | SystemId::Genesio => 5.0,
            SystemId::Michelson => (2.0 * params["c"] * std::f64::consts::SQRT_2 + 1.0).max(5.0),
            SystemId::SprottEVariant => (20.0 * params["a"]).max(20.0),
            // The second equilibrium sits at (1/eps², -1/eps, 0).
            SystemId::Dumm => {
                let e = params["eps"].abs();
                if e > 0.0 {
                    (1.5 / (e * e)).clamp(10.0, 1e4)
                } else {
                    10.0
                }
            }
            SystemId::Custom => 10.0,
        }
    }
}

/// Builds a zoo system from its source text with validated parameters.
pub fn zoo(id: SystemId, overrides: &BTreeMap<String, f64>) -> Result<PolyVectorField> {
    let entry = zoo_entry(id).ok_or_else(|| Error::UnknownSystem(id.to_string()))?;
    let params = entry.resolve_params(overrides)?;
    let mut f = parse_system_with(entry.source, &params)?;
    f.name = id.to_string();
    Ok(PolyVectorField::new(f.name.clone(), params, f.components().clone()))
}
