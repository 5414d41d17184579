//! JSON documents for instances and allocations.
//!
//! Instance document:
//!
//! ```json
//! {
//!   "agents": 2,
//!   "goods": 3,
//!   "valuations": [
//!     [1, 1, 1],
//!     [1, 0, 0]
//!   ],
//!   "caps": [2, 1]
//! }
//! ```
//!
//! `caps` (positive integers) and `concave` (one table `f(0)..f(m)` of
//! rational strings `"p/q"` per agent) are optional and mutually exclusive.
//! An optional `generator` object records how a document was produced.
//! Allocation document: `{ "owner": [a_1, ..., a_m] }`. Agents and goods are
//! 1-indexed in documents.

use std::fmt::Write as _;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::ModelError;
use crate::model::{Allocation, ConcaveProfile, Instance};

/// Optional utility transform attached to an instance document.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum UtilityMode {
    Additive,
    /// Binary budget-additive: `f_i(k) = min(c_i, k)`.
    Caps(Vec<u64>),
    Concave(ConcaveProfile),
}

/// Provenance of a generated instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorInfo {
    pub algorithm: String,
    pub family: String,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_value: Option<u64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InstanceDocument {
    pub instance: Instance,
    pub utility: UtilityMode,
    pub generator: Option<GeneratorInfo>,
}

impl InstanceDocument {
    pub fn additive(instance: Instance) -> Self {
        Self {
            instance,
            utility: UtilityMode::Additive,
            generator: None,
        }
    }

    pub fn caps(&self) -> Option<&[u64]> {
        match &self.utility {
            UtilityMode::Caps(c) => Some(c),
            _ => None,
        }
    }

    /// The cardinality profile implied by `caps` or `concave`, if any.
    pub fn profile(&self) -> Option<ConcaveProfile> {
        match &self.utility {
            UtilityMode::Additive => None,
            UtilityMode::Caps(c) => Some(
                ConcaveProfile::from_caps(c, self.instance.num_goods())
                    .expect("caps validated at parse time"),
            ),
            UtilityMode::Concave(p) => Some(p.clone()),
        }
    }

    /// Canonical serialization; [`parse_instance`] inverts it.
    pub fn to_json(&self) -> String {
        let inst = &self.instance;
        let mut out = String::from("{\n");
        if let Some(g) = &self.generator {
            let _ = writeln!(
                out,
                "  \"generator\": {},",
                serde_json::to_string(g).expect("plain struct")
            );
        }
        let _ = writeln!(out, "  \"agents\": {},", inst.num_agents());
        let _ = writeln!(out, "  \"goods\": {},", inst.num_goods());
        out.push_str("  \"valuations\": [\n");
        let rows: Vec<String> = inst
            .values()
            .iter()
            .map(|row| format!("    [{}]", join(row.iter().map(u64::to_string))))
            .collect();
        out.push_str(&rows.join(",\n"));
        out.push_str("\n  ]");
        match &self.utility {
            UtilityMode::Additive => {}
            UtilityMode::Caps(caps) => {
                let _ = write!(out, ",\n  \"caps\": [{}]", join(caps.iter().map(u64::to_string)));
            }
            UtilityMode::Concave(p) => {
                out.push_str(",\n  \"concave\": [\n");
                let rows: Vec<String> = p
                    .tables()
                    .iter()
                    .map(|t| {
                        format!(
                            "    [{}]",
                            join(t.iter().map(|r| format!("\"{}\"", format_rational(r))))
                        )
                    })
                    .collect();
                out.push_str(&rows.join(",\n"));
                out.push_str("\n  ]");
            }
        }
        out.push_str("\n}\n");
        out
    }
}

fn join(items: impl Iterator<Item = String>) -> String {
    items.collect::<Vec<_>>().join(", ")
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInstance {
    agents: usize,
    goods: usize,
    valuations: Vec<Vec<Value>>,
    #[serde(default)]
    caps: Option<Vec<Value>>,
    #[serde(default)]
    concave: Option<Vec<Vec<String>>>,
    #[serde(default)]
    generator: Option<GeneratorInfo>,
}

fn malformed(e: impl std::fmt::Display) -> ModelError {
    ModelError::Malformed(e.to_string())
}

/// Parses a rational written as `"p/q"` or `"p"`, reduced to lowest terms.
pub fn parse_rational(s: &str) -> Result<BigRational, ModelError> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (s, "1"),
    };
    let num = BigInt::from_str(num).map_err(|_| malformed(format!("bad rational {s:?}")))?;
    let den = BigInt::from_str(den).map_err(|_| malformed(format!("bad rational {s:?}")))?;
    if den.is_zero() {
        return Err(malformed(format!("zero denominator in {s:?}")));
    }
    Ok(BigRational::new(num, den))
}

/// Always `p/q`, lowest terms, positive denominator.
pub fn format_rational(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

fn non_negative(v: &Value, agent: usize, good: usize) -> Result<u64, ModelError> {
    if let Some(x) = v.as_u64() {
        return Ok(x);
    }
    match v {
        Value::Number(num) if num.as_i64().is_some() => {
            Err(ModelError::NegativeEntry { agent, good })
        }
        Value::Number(num) if num.as_f64().is_some_and(|f| f < 0.0) => {
            Err(ModelError::NegativeEntry { agent, good })
        }
        _ => Err(malformed(format!(
            "valuation for agent {}, good {} is not a non-negative integer: {v}",
            agent + 1,
            good + 1
        ))),
    }
}

/// Parses and validates an instance document.
pub fn parse_instance(text: &str) -> Result<InstanceDocument, ModelError> {
    let raw: RawInstance = serde_json::from_str(text).map_err(malformed)?;
    let mut rows = Vec::with_capacity(raw.valuations.len());
    for (agent, row) in raw.valuations.iter().enumerate() {
        let parsed = row
            .iter()
            .enumerate()
            .map(|(good, v)| non_negative(v, agent, good))
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(parsed);
    }
    let instance = Instance::with_dimensions(raw.agents, raw.goods, rows)?;
    let utility = match (raw.caps, raw.concave) {
        (Some(_), Some(_)) => return Err(malformed("\"caps\" and \"concave\" are mutually exclusive")),
        (None, None) => UtilityMode::Additive,
        (Some(caps), None) => {
            if caps.len() != raw.agents {
                return Err(malformed(format!(
                    "expected {} caps, found {}",
                    raw.agents,
                    caps.len()
                )));
            }
            let caps = caps
                .iter()
                .map(|c| match c.as_u64() {
                    Some(x) if x > 0 => Ok(x),
                    _ => Err(malformed(format!("cap must be a positive integer: {c}"))),
                })
                .collect::<Result<Vec<_>, _>>()?;
            UtilityMode::Caps(caps)
        }
        (None, Some(tables)) => {
            let tables = tables
                .iter()
                .map(|t| t.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>, _>>())
                .collect::<Result<Vec<_>, _>>()?;
            let profile = ConcaveProfile::new(tables)?;
            profile.check_fits(&instance)?;
            UtilityMode::Concave(profile)
        }
    };
    Ok(InstanceDocument {
        instance,
        utility,
        generator: raw.generator,
    })
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAllocation {
    owner: Vec<Value>,
}

/// Parses an allocation document against the given dimensions.
pub fn parse_allocation(text: &str, num_agents: usize, num_goods: usize) -> Result<Allocation, ModelError> {
    let raw: RawAllocation = serde_json::from_str(text).map_err(malformed)?;
    if raw.owner.len() != num_goods {
        return Err(ModelError::OwnerLength {
            expected: num_goods,
            found: raw.owner.len(),
        });
    }
    let owner = raw
        .owner
        .iter()
        .enumerate()
        .map(|(good, a)| match a.as_u64() {
            Some(x) if x >= 1 && (x as usize) <= num_agents => Ok(x as usize - 1),
            Some(x) => Err(ModelError::AgentOutOfRange {
                good,
                agent: x as usize,
            }),
            None => Err(malformed(format!("owner of good {} is not an agent index: {a}", good + 1))),
        })
        .collect::<Result<Vec<_>, _>>()?;
    Allocation::from_owner(num_agents, owner)
}

pub fn allocation_to_json(alloc: &Allocation) -> String {
    format!(
        "{{ \"owner\": [{}] }}\n",
        join(alloc.owners().iter().map(|a| (a + 1).to_string()))
    )
}
