//! Reference data shipped with the crate: a published integral basis for
//! index `2 I_3`, its restriction set, and a determinant 5 Gram matrix.

use serde::Deserialize;
use num_traits::Zero;
use serde_json::Value;

use crate::arith::{parse_rat, Rat};
use crate::error::{Error, Result};
use crate::jacobi::{FourierClassSpace, JacobiExpansion, JacobiIndex};

const TABLE1: &str = include_str!("../fixtures/table1.json");
const RESTRICTION_SET: &str = include_str!("../fixtures/restriction_set.json");
const SCHOTTKY: &str = include_str!("../fixtures/schottky_matrix.json");

#[derive(Deserialize)]
struct RawValue {
    n: i64,
    r: Vec<i64>,
    c: Value,
}

#[derive(Deserialize)]
struct RawForm {
    name: String,
    weight: i64,
    values: Vec<RawValue>,
}

#[derive(Deserialize)]
struct RawTable {
    version: u32,
    twice_index: Vec<Vec<i64>>,
    precision: usize,
    representatives: Vec<Vec<i64>>,
    forms: Vec<RawForm>,
}

#[derive(Clone, Debug)]
pub struct TableForm {
    pub name: String,
    pub weight: i64,
    pub expansion: JacobiExpansion,
}

#[derive(Clone, Debug)]
pub struct Table1 {
    pub version: u32,
    pub index: JacobiIndex,
    pub precision: usize,
    pub representatives: Vec<Vec<i64>>,
    pub forms: Vec<TableForm>,
}

impl Table1 {
    pub fn weights(&self) -> Vec<i64> {
        let mut w: Vec<i64> = self.forms.iter().map(|f| f.weight).collect();
        w.dedup();
        w
    }

    pub fn forms_of_weight(&self, k: i64) -> Vec<&TableForm> {
        self.forms.iter().filter(|f| f.weight == k).collect()
    }

    pub fn form(&self, name: &str) -> Option<&TableForm> {
        self.forms.iter().find(|f| f.name == name)
    }
}

fn parse_value(v: &Value) -> Result<Rat> {
    match v {
        Value::Number(n) => parse_rat(&n.to_string()),
        Value::String(s) => parse_rat(s),
        _ => Err(Error::Parse(format!("bad coefficient {v}"))),
    }
}

/// Spreads tabulated orbit values over the full support. Values given at
/// several members of one orbit must agree.
fn build(index: &JacobiIndex, precision: usize, raw: &RawForm) -> Result<JacobiExpansion> {
    let space = FourierClassSpace::new(index, precision, raw.weight);
    let mut vals: Vec<Option<Rat>> = vec![None; space.dim()];
    for v in &raw.values {
        let c = parse_value(&v.c)?;
        match space.locate(v.n, &v.r) {
            Some((o, flip)) => {
                let c = if flip { -c } else { c };
                match &vals[o] {
                    Some(old) if *old != c => {
                        return Err(Error::Parse(format!("{}: conflicting values on orbit of ({}, {:?})", raw.name, v.n, v.r)))
                    }
                    _ => vals[o] = Some(c),
                }
            }
            None if c.is_zero() => {}
            None => return Err(Error::Parse(format!("{}: ({}, {:?}) outside the support", raw.name, v.n, v.r))),
        }
    }
    let vals: Vec<Rat> = vals.into_iter().map(|v| v.unwrap_or_default()).collect();
    Ok(JacobiExpansion::from_orbit_values(&space, raw.weight, &vals))
}

pub fn table1() -> Result<Table1> {
    let raw: RawTable = serde_json::from_str(TABLE1).map_err(|e| Error::Parse(e.to_string()))?;
    let index = JacobiIndex::from_twice(&raw.twice_index)?;
    let forms = raw
        .forms
        .iter()
        .map(|f| Ok(TableForm { name: f.name.clone(), weight: f.weight, expansion: build(&index, raw.precision, f)? }))
        .collect::<Result<Vec<_>>>()?;
    Ok(Table1 { version: raw.version, index, precision: raw.precision, representatives: raw.representatives, forms })
}

/// Restriction vectors matching [`table1`].
pub fn restriction_set() -> Result<(JacobiIndex, Vec<Vec<i64>>)> {
    #[derive(Deserialize)]
    struct Raw {
        twice_index: Vec<Vec<i64>>,
        vectors: Vec<Vec<i64>>,
    }
    let raw: Raw = serde_json::from_str(RESTRICTION_SET).map_err(|e| Error::Parse(e.to_string()))?;
    Ok((JacobiIndex::from_twice(&raw.twice_index)?, raw.vectors))
}

/// The determinant 5 Gram matrix and the expected normalized coefficient.
pub fn schottky_matrix() -> Result<(Vec<Vec<i64>>, i64)> {
    #[derive(Deserialize)]
    struct Raw {
        #[serde(rename = "twice_T")]
        twice_t: Vec<Vec<i64>>,
        expected: i64,
    }
    let raw: Raw = serde_json::from_str(SCHOTTKY).map_err(|e| Error::Parse(e.to_string()))?;
    Ok((raw.twice_t, raw.expected))
}
