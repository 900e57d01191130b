use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::arith::{fmt_rat, parse_rat, rat, rat_mod, Rat};
use crate::error::{Error, Result};
use crate::jacobi::index::JacobiIndex;
use crate::jacobi::orbits::FourierClassSpace;
use crate::qseries::QExpansion;

pub type FourierIndex = (i64, Vec<i64>);

/// Truncated Fourier expansion `sum c(n, r) q^n ζ^r` over `0 <= n < precision`,
/// supported on `D(n, r) >= 0`. Only nonzero coefficients are stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JacobiExpansion {
    pub index: JacobiIndex,
    pub weight: Option<i64>,
    pub precision: usize,
    coeffs: BTreeMap<FourierIndex, Rat>,
}

fn check_key(index: &JacobiIndex, precision: usize, n: i64, r: &[i64]) -> Result<()> {
    if r.len() != index.rank() {
        return Err(Error::IndexMismatch(format!("r has length {}, index rank {}", r.len(), index.rank())));
    }
    if n < 0 || n as usize >= precision {
        return Err(Error::InvalidArgument(format!("n = {n} outside precision {precision}")));
    }
    if index.disc(n, r) < 0 {
        return Err(Error::InvalidArgument(format!("coefficient at ({n}, {r:?}) has negative discriminant")));
    }
    Ok(())
}

impl JacobiExpansion {
    pub fn zero(index: &JacobiIndex, weight: Option<i64>, precision: usize) -> Self {
        JacobiExpansion { index: index.clone(), weight, precision, coeffs: BTreeMap::new() }
    }

    pub fn from_map(
        index: &JacobiIndex,
        weight: Option<i64>,
        precision: usize,
        coeffs: BTreeMap<FourierIndex, Rat>,
    ) -> Result<Self> {
        for (n, r) in coeffs.keys() {
            check_key(index, precision, *n, r)?;
        }
        let mut e = Self::zero(index, weight, precision);
        e.coeffs = coeffs.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        Ok(e)
    }

    /// Expansion with value `values[o]` on orbit `o` of `space`.
    pub fn from_orbit_values(space: &FourierClassSpace, weight: i64, values: &[Rat]) -> Self {
        assert_eq!(values.len(), space.dim());
        let mut coeffs = BTreeMap::new();
        for (n, r) in space.support() {
            if let Some((o, flip)) = space.locate(*n, r) {
                let v = &values[o];
                if !v.is_zero() {
                    coeffs.insert((*n, r.clone()), if flip { -v.clone() } else { v.clone() });
                }
            }
        }
        JacobiExpansion { index: space.index.clone(), weight: Some(weight), precision: space.precision, coeffs }
    }

    /// Values on the canonical orbit members of `space`.
    pub fn orbit_values(&self, space: &FourierClassSpace) -> Vec<Rat> {
        space.orbits.iter().map(|o| self.coeff(o.n, &o.r)).collect()
    }

    /// Whether the coefficients are constant (up to `(-1)^k`) on orbits and
    /// vanish where parity forces it.
    pub fn is_orbit_consistent(&self, space: &FourierClassSpace) -> bool {
        let vals = self.orbit_values(space);
        space.support().iter().all(|(n, r)| {
            let c = self.coeff(*n, r);
            match space.locate(*n, r) {
                None => c.is_zero(),
                Some((o, flip)) => c == if flip { -vals[o].clone() } else { vals[o].clone() },
            }
        })
    }

    /// Direct check of `c(n + λ·r + M[λ], r + 2Mλ) = c(n, r)` for
    /// `λ ∈ {-1, 0, 1}^l` and of `c(n, -r) = (-1)^k c(n, r)` on the whole
    /// in-precision support. Without a weight tag only shifts are checked.
    pub fn verify_periodicity(&self) -> bool {
        let l = self.index.rank();
        let lambdas: Vec<Vec<i64>> = crate::jacobi::index::BoxPoints::new(&vec![1; l]).filter(|x| x.iter().any(|&v| v != 0)).collect();
        let sign = self.weight.map(|k| if k.rem_euclid(2) == 1 { -Rat::one() } else { Rat::one() });
        self.index.support(self.precision).iter().all(|(n, r)| {
            let c = self.coeff(*n, r);
            let neg: Vec<i64> = r.iter().map(|x| -x).collect();
            if let Some(sg) = &sign {
                if self.coeff(*n, &neg) != &c * sg {
                    return false;
                }
            }
            lambdas.iter().all(|lam| {
                let lr: i64 = lam.iter().zip(r).map(|(a, b)| a * b).sum();
                let n2 = n + lr + self.index.quad(lam);
                if n2 as usize >= self.precision {
                    return true;
                }
                let shift = self.index.apply_twice(lam);
                let r2: Vec<i64> = r.iter().zip(&shift).map(|(a, b)| a + b).collect();
                self.coeff(n2, &r2) == c
            })
        })
    }

    pub fn coeff(&self, n: i64, r: &[i64]) -> Rat {
        self.coeffs.get(&(n, r.to_vec())).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn set(&mut self, n: i64, r: &[i64], c: Rat) -> Result<()> {
        check_key(&self.index, self.precision, n, r)?;
        if c.is_zero() {
            self.coeffs.remove(&(n, r.to_vec()));
        } else {
            self.coeffs.insert((n, r.to_vec()), c);
        }
        Ok(())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&FourierIndex, &Rat)> {
        self.coeffs.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn truncate(&self, precision: usize) -> Self {
        let precision = precision.min(self.precision);
        let coeffs = self.coeffs.iter().filter(|((n, _), _)| (*n as usize) < precision).map(|(k, v)| (k.clone(), v.clone())).collect();
        JacobiExpansion { index: self.index.clone(), weight: self.weight, precision, coeffs }
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.index != other.index {
            return Err(Error::IndexMismatch("expansions have different indices".into()));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        let precision = self.precision.min(other.precision);
        let mut out = self.truncate(precision);
        for ((n, r), c) in other.coeffs.iter() {
            if (*n as usize) < precision {
                let e = out.coeffs.entry((*n, r.clone())).or_insert_with(Rat::zero);
                *e += c;
                if e.is_zero() {
                    out.coeffs.remove(&(*n, r.clone()));
                }
            }
        }
        if self.weight != other.weight {
            out.weight = None;
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Rat) -> Self {
        let mut out = self.clone();
        if c.is_zero() {
            out.coeffs.clear();
        } else {
            for v in out.coeffs.values_mut() {
                *v = &*v * c;
            }
        }
        out
    }

    /// Heat operator: `c(n, r) -> D(n, r) c(n, r)`. The result has no weight tag.
    pub fn heat(&self) -> Self {
        let mut out = self.clone();
        out.weight = None;
        out.coeffs = self
            .coeffs
            .iter()
            .filter_map(|((n, r), c)| {
                let d = self.index.disc_rational(*n, r);
                let v = c * d;
                (!v.is_zero()).then(|| ((*n, r.clone()), v))
            })
            .collect();
        out
    }

    /// `U_p`: keep `c(n, r)` with `p | D(n, r)`, zero the rest.
    pub fn u_p(&self, p: u64) -> Self {
        let mut out = self.clone();
        out.coeffs.retain(|(n, r), _| self.index.disc(*n, r).rem_euclid(p as i64) == 0);
        out
    }

    pub fn reduce_mod(&self, p: u64) -> Result<JacobiModP> {
        let mut coeffs = BTreeMap::new();
        for ((n, r), c) in &self.coeffs {
            let v = rat_mod(c, p).ok_or_else(|| Error::NonIntegral { at: format!("(n, r) = ({n}, {r:?})"), p })?;
            if v != 0 {
                coeffs.insert((*n, r.clone()), v);
            }
        }
        Ok(JacobiModP { index: self.index.clone(), weight: self.weight, precision: self.precision, p, coeffs })
    }

    /// Pullback along `z -> s z`: index `M[s]`, `c'(n, r') = sum_{s·r = r'} c(n, r)`.
    pub fn restrict(&self, s: &[i64]) -> Result<JacobiExpansion> {
        let target = self.index.restricted(s)?;
        let mut coeffs: BTreeMap<FourierIndex, Rat> = BTreeMap::new();
        for ((n, r), c) in &self.coeffs {
            let rp: i64 = r.iter().zip(s).map(|(a, b)| a * b).sum();
            let e = coeffs.entry((*n, vec![rp])).or_insert_with(Rat::zero);
            *e += c;
        }
        coeffs.retain(|_, c| !c.is_zero());
        JacobiExpansion::from_map(&target, self.weight, self.precision, coeffs)
    }

    /// Product of Jacobi expansions; indices add.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        let index = self.index.add(&other.index)?;
        let precision = self.precision.min(other.precision);
        let mut coeffs: BTreeMap<FourierIndex, Rat> = BTreeMap::new();
        for ((n1, r1), a) in &self.coeffs {
            if *n1 as usize >= precision {
                continue;
            }
            for ((n2, r2), b) in &other.coeffs {
                let n = n1 + n2;
                if n as usize >= precision {
                    continue;
                }
                let r: Vec<i64> = r1.iter().zip(r2).map(|(x, y)| x + y).collect();
                *coeffs.entry((n, r)).or_insert_with(Rat::zero) += a * b;
            }
        }
        let weight = match (self.weight, other.weight) {
            (Some(a), Some(b)) => Some(a + b),
            _ => None,
        };
        JacobiExpansion::from_map(&index, weight, precision, coeffs)
    }

    /// `f(q) φ` for an elliptic q-expansion `f`.
    pub fn mul_q(&self, f: &QExpansion) -> Self {
        let precision = self.precision.min(f.precision());
        let mut coeffs: BTreeMap<FourierIndex, Rat> = BTreeMap::new();
        for ((n, r), c) in &self.coeffs {
            for a in 0..precision as i64 - n {
                let fa = f.coeff(a as usize);
                if !fa.is_zero() {
                    *coeffs.entry((n + a, r.clone())).or_insert_with(Rat::zero) += fa * c;
                }
            }
        }
        coeffs.retain(|_, c| !c.is_zero());
        let weight = match (self.weight, f.weight) {
            (Some(a), Some(b)) => Some(a + b),
            _ => None,
        };
        JacobiExpansion { index: self.index.clone(), weight, precision, coeffs }
    }

    pub fn to_json(&self) -> Value {
        let coeffs: Vec<Value> = self
            .coeffs
            .iter()
            .map(|((n, r), c)| json!({"n": n, "r": r, "c": fmt_rat(c)}))
            .collect();
        json!({
            "kind": "jacobi",
            "weight": self.weight,
            "twice_index": self.index.twice_rows(),
            "precision": self.precision,
            "coeffs": coeffs,
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let bad = |m: &str| Error::Parse(format!("jacobi expansion: {m}"));
        if v.get("kind").and_then(Value::as_str) != Some("jacobi") {
            return Err(bad("kind must be \"jacobi\""));
        }
        let twice: Vec<Vec<i64>> = serde_json::from_value(v.get("twice_index").cloned().ok_or_else(|| bad("missing twice_index"))?)
            .map_err(|e| bad(&e.to_string()))?;
        let index = JacobiIndex::from_twice(&twice)?;
        let weight = v.get("weight").and_then(Value::as_i64);
        let precision = v.get("precision").and_then(Value::as_u64).ok_or_else(|| bad("missing precision"))? as usize;
        let mut coeffs = BTreeMap::new();
        for e in v.get("coeffs").and_then(Value::as_array).ok_or_else(|| bad("missing coeffs"))? {
            let n = e.get("n").and_then(Value::as_i64).ok_or_else(|| bad("entry n"))?;
            let r: Vec<i64> = serde_json::from_value(e.get("r").cloned().ok_or_else(|| bad("entry r"))?).map_err(|_| bad("entry r"))?;
            let c = match e.get("c") {
                Some(Value::String(s)) => parse_rat(s)?,
                Some(Value::Number(x)) => rat(x.as_i64().ok_or_else(|| bad("entry c"))?),
                _ => return Err(bad("entry c")),
            };
            coeffs.insert((n, r), c);
        }
        Self::from_map(&index, weight, precision, coeffs)
    }

    /// Denominators cleared: the expansion is integral.
    pub fn is_integral(&self) -> bool {
        self.coeffs.values().all(|c| c.denom().is_one())
    }

    pub fn lcm_denominator(&self) -> BigInt {
        crate::arith::lcm_denominators(self.coeffs.values())
    }
}

/// A Jacobi expansion with coefficients in `F_p`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JacobiModP {
    pub index: JacobiIndex,
    pub weight: Option<i64>,
    pub precision: usize,
    pub p: u64,
    coeffs: BTreeMap<FourierIndex, u64>,
}

impl JacobiModP {
    pub fn coeff(&self, n: i64, r: &[i64]) -> u64 {
        self.coeffs.get(&(n, r.to_vec())).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&FourierIndex, &u64)> {
        self.coeffs.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn disc_mod(&self, n: i64, r: &[i64]) -> u64 {
        let p = self.p;
        let d = self.index.disc(n, r).rem_euclid(p as i64) as u64;
        let inv2 = crate::arith::inv_mod(2, p).expect("odd prime");
        let s = crate::arith::pow_mod(inv2, self.index.shift() as u64, p);
        crate::arith::mul_mod(d, s, p)
    }

    /// Heat operator mod `p`; raises the weight tag by `p + 1`.
    pub fn heat(&self) -> Self {
        let mut out = self.clone();
        out.weight = self.weight.map(|k| k + self.p as i64 + 1);
        out.coeffs = self
            .coeffs
            .iter()
            .filter_map(|((n, r), c)| {
                let v = crate::arith::mul_mod(*c, self.disc_mod(*n, r), self.p);
                (v != 0).then(|| ((*n, r.clone()), v))
            })
            .collect();
        out
    }

    pub fn u_p(&self) -> Self {
        let mut out = self.clone();
        let p = self.p as i64;
        out.coeffs.retain(|(n, r), _| self.index.disc(*n, r).rem_euclid(p) == 0);
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.index != other.index || self.p != other.p {
            return Err(Error::IndexMismatch("mod-p expansions differ in index or prime".into()));
        }
        let precision = self.precision.min(other.precision);
        let mut coeffs: BTreeMap<FourierIndex, u64> = BTreeMap::new();
        for (k, v) in self.coeffs.iter().chain(other.coeffs.iter()) {
            if (k.0 as usize) < precision {
                let e = coeffs.entry(k.clone()).or_insert(0);
                *e = (*e + v) % self.p;
            }
        }
        coeffs.retain(|_, v| *v != 0);
        Ok(JacobiModP { index: self.index.clone(), weight: if self.weight == other.weight { self.weight } else { None }, precision, p: self.p, coeffs })
    }

    pub fn scale(&self, c: u64) -> Self {
        let mut out = self.clone();
        out.coeffs = self
            .coeffs
            .iter()
            .filter_map(|(k, v)| {
                let x = crate::arith::mul_mod(*v, c % self.p, self.p);
                (x != 0).then(|| (k.clone(), x))
            })
            .collect();
        out
    }

    pub fn restrict(&self, s: &[i64]) -> Result<JacobiModP> {
        let target = self.index.restricted(s)?;
        let mut coeffs: BTreeMap<FourierIndex, u64> = BTreeMap::new();
        for ((n, r), c) in &self.coeffs {
            let rp: i64 = r.iter().zip(s).map(|(a, b)| a * b).sum();
            let e = coeffs.entry((*n, vec![rp])).or_insert(0);
            *e = (*e + c) % self.p;
        }
        coeffs.retain(|_, v| *v != 0);
        Ok(JacobiModP { index: target, weight: self.weight, precision: self.precision, p: self.p, coeffs })
    }

    /// Values on the canonical orbit members of `space`.
    pub fn orbit_values(&self, space: &FourierClassSpace) -> Vec<u64> {
        space.orbits.iter().map(|o| self.coeff(o.n, &o.r)).collect()
    }

    pub fn from_orbit_values(space: &FourierClassSpace, weight: Option<i64>, p: u64, values: &[u64]) -> Self {
        let mut coeffs = BTreeMap::new();
        for (n, r) in space.support() {
            if let Some((o, flip)) = space.locate(*n, r) {
                let v = values[o] % p;
                if v != 0 {
                    coeffs.insert((*n, r.clone()), if flip { p - v } else { v });
                }
            }
        }
        JacobiModP { index: space.index.clone(), weight, precision: space.precision, p, coeffs }
    }
}
