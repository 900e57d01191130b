use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::Zero;
use serde_json::{json, Value};
use upcong_core::arith::{fmt_rat, parse_rat, rat_mod, Rat};
use upcong_core::jacobi::{JacobiExpansion, JacobiIndex};
use upcong_core::qseries::QExpansion;
use upcong_core::{Error, Result};

use crate::twice::TwiceT;

/// Truncated degree-`g` Fourier expansion `sum c(T) e(tr(TZ))` over
/// `tr(T) <= trace_bound`. Indices are raw matrices; only nonzero
/// coefficients are stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SiegelExpansion {
    pub degree: usize,
    pub weight: Option<i64>,
    pub trace_bound: i64,
    coeffs: BTreeMap<TwiceT, Rat>,
}

impl SiegelExpansion {
    pub fn zero(degree: usize, weight: Option<i64>, trace_bound: i64) -> Self {
        SiegelExpansion { degree, weight, trace_bound, coeffs: BTreeMap::new() }
    }

    pub fn from_map(degree: usize, weight: Option<i64>, trace_bound: i64, coeffs: BTreeMap<TwiceT, Rat>) -> Result<Self> {
        for t in coeffs.keys() {
            if t.degree() != degree {
                return Err(Error::InvalidArgument(format!("{t:?} is not of degree {degree}")));
            }
            if t.trace() > 2 * trace_bound {
                return Err(Error::InvalidArgument(format!("{t:?} exceeds trace bound {trace_bound}")));
            }
        }
        let mut e = Self::zero(degree, weight, trace_bound);
        e.coeffs = coeffs.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        Ok(e)
    }

    /// Degree-one expansion `c(T = (n)) = f_n`, trace bound `precision - 1`.
    pub fn from_elliptic(f: &QExpansion) -> Self {
        let coeffs = f
            .coeffs()
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(n, c)| (TwiceT::from_gram(vec![vec![2 * n as i64]]), c.clone()))
            .collect();
        SiegelExpansion { degree: 1, weight: f.weight, trace_bound: f.precision() as i64 - 1, coeffs }
    }

    /// Inverse of `from_elliptic` for degree one.
    pub fn to_elliptic(&self) -> Result<QExpansion> {
        if self.degree != 1 {
            return Err(Error::InvalidArgument("not a degree one expansion".into()));
        }
        let coeffs = (0..=self.trace_bound).map(|n| self.coeff(&TwiceT::from_gram(vec![vec![2 * n]]))).collect();
        Ok(QExpansion::new(self.weight, coeffs))
    }

    pub fn coeff(&self, t: &TwiceT) -> Rat {
        self.coeffs.get(t).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&TwiceT, &Rat)> {
        self.coeffs.iter()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn truncate(&self, trace_bound: i64) -> Self {
        let tb = trace_bound.min(self.trace_bound);
        let coeffs = self.coeffs.iter().filter(|(t, _)| t.trace() <= 2 * tb).map(|(t, c)| (t.clone(), c.clone())).collect();
        SiegelExpansion { degree: self.degree, weight: self.weight, trace_bound: tb, coeffs }
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.degree != other.degree {
            return Err(Error::InvalidArgument(format!("degrees {} and {} differ", self.degree, other.degree)));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let tb = self.trace_bound.min(other.trace_bound);
        let mut out = self.truncate(tb);
        for (t, c) in other.coeffs.iter().filter(|(t, _)| t.trace() <= 2 * tb) {
            let v = out.coeff(t) + c;
            out.set_raw(t.clone(), v);
        }
        if self.weight != other.weight {
            out.weight = None;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(&-Rat::from_integer(1.into())))
    }

    pub fn scale(&self, s: &Rat) -> Self {
        let mut out = Self::zero(self.degree, self.weight, self.trace_bound);
        if !s.is_zero() {
            out.coeffs = self.coeffs.iter().map(|(t, c)| (t.clone(), c * s)).collect();
        }
        out
    }

    fn set_raw(&mut self, t: TwiceT, c: Rat) {
        if c.is_zero() {
            self.coeffs.remove(&t);
        } else {
            self.coeffs.insert(t, c);
        }
    }

    /// Product; the trace bound is the smaller of the two.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let tb = self.trace_bound.min(other.trace_bound);
        self.convolve(other, tb, |_, _| Rat::from_integer(1.into()))
    }

    /// `sum_{T1 + T2 = T} w(T1, T2) c(T1) c'(T2)` up to trace bound `tb`.
    pub(crate) fn convolve(&self, other: &Self, tb: i64, w: impl Fn(&TwiceT, &TwiceT) -> Rat) -> Result<Self> {
        let mut acc: BTreeMap<TwiceT, Rat> = BTreeMap::new();
        for (t1, c1) in self.coeffs.iter().filter(|(t, _)| t.trace() <= 2 * tb) {
            for (t2, c2) in other.coeffs.iter().filter(|(t, _)| t.trace() + t1.trace() <= 2 * tb) {
                let f = w(t1, t2);
                if f.is_zero() {
                    continue;
                }
                *acc.entry(t1.add(t2)).or_insert_with(Rat::zero) += f * c1 * c2;
            }
        }
        let weight = match (self.weight, other.weight) {
            (Some(a), Some(b)) => Some(a + b),
            _ => None,
        };
        Self::from_map(self.degree, weight, tb, acc)
    }

    /// `c(T) ↦ det(T) c(T)`. The weight becomes untagged.
    pub fn theta_d(&self) -> Self {
        let mut out = Self::zero(self.degree, None, self.trace_bound);
        for (t, c) in &self.coeffs {
            out.set_raw(t.clone(), t.det_t() * c);
        }
        out
    }

    /// Keeps `c(T)` exactly when `p | det(2T)`, which for odd `p` is
    /// `p | det T`.
    pub fn u_cap_p(&self, p: u64) -> Result<Self> {
        if p % 2 == 0 {
            return Err(Error::InvalidArgument("U(p) needs odd p".into()));
        }
        let pb = BigInt::from(p);
        let coeffs = self.coeffs.iter().filter(|(t, _)| (t.det() % &pb).is_zero()).map(|(t, c)| (t.clone(), c.clone())).collect();
        Ok(SiegelExpansion { degree: self.degree, weight: self.weight, trace_bound: self.trace_bound, coeffs })
    }

    /// Coefficients mod `p`, zero entries dropped.
    pub fn reduce_mod(&self, p: u64) -> Result<BTreeMap<TwiceT, u64>> {
        let mut out = BTreeMap::new();
        for (t, c) in &self.coeffs {
            let v = rat_mod(c, p).ok_or_else(|| Error::NonIntegral { at: format!("{t:?}"), p })?;
            if v != 0 {
                out.insert(t.clone(), v);
            }
        }
        Ok(out)
    }

    /// The coefficient `Φ_M(τ, z)` of `e(tr(MW))` in the block decomposition
    /// `Z = [[τ, z], [z^t, W]]`, as a Jacobi expansion of index `M`.
    /// `c(n, r) = c([[n, r/2], [r^t/2, M]])`; all such `T` have trace at most
    /// the bound when `n <= N - tr(M)`.
    pub fn fourier_jacobi(&self, twice_m: &[Vec<i64>]) -> Result<JacobiExpansion> {
        if twice_m.len() + 1 != self.degree {
            return Err(Error::IndexMismatch(format!("block of size {} in degree {}", twice_m.len(), self.degree)));
        }
        let index = JacobiIndex::from_twice(twice_m)?;
        let tr_m: i64 = (0..twice_m.len()).map(|i| twice_m[i][i]).sum::<i64>() / 2;
        let precision = (self.trace_bound - tr_m + 1).max(0) as usize;
        let mut coeffs = BTreeMap::new();
        for (t, c) in &self.coeffs {
            if t.lower_block() != twice_m {
                continue;
            }
            let n = t.entry(0, 0) / 2;
            if n as usize >= precision {
                continue;
            }
            let r: Vec<i64> = t.rows()[0][1..].to_vec();
            coeffs.insert((n, r), c.clone());
        }
        JacobiExpansion::from_map(&index, self.weight, precision, coeffs)
    }

    /// The smallest stored `T` with `c(T) ≢ 0 (mod p)` in the order of
    /// `TwiceT::order_key`.
    pub fn minimal_index(&self, p: u64) -> Result<Option<TwiceT>> {
        Ok(self.reduce_mod(p)?.into_keys().min_by(|a, b| a.order_key().cmp(&b.order_key())))
    }

    pub fn is_integral(&self) -> bool {
        self.coeffs.values().all(|c| c.is_integer())
    }

    /// gcd of the numerators; the expansion is assumed integral.
    pub fn content(&self) -> BigInt {
        let nums: Vec<BigInt> = self.coeffs.values().map(|c| c.numer().clone()).collect();
        upcong_core::arith::gcd_all(&nums)
    }

    pub fn to_json(&self) -> Value {
        let coeffs: Vec<Value> = self.coeffs.iter().map(|(t, c)| json!({"twice_T": t.rows(), "c": fmt_rat(c)})).collect();
        json!({
            "kind": "siegel",
            "degree": self.degree,
            "weight": self.weight,
            "trace_bound": self.trace_bound,
            "coeffs": coeffs,
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let bad = |m: &str| Error::Parse(m.to_string());
        if v.get("kind").and_then(Value::as_str) != Some("siegel") {
            return Err(bad("kind must be \"siegel\""));
        }
        let degree = v.get("degree").and_then(Value::as_u64).ok_or_else(|| bad("missing degree"))? as usize;
        let weight = match v.get("weight") {
            None | Some(Value::Null) => None,
            Some(w) => Some(w.as_i64().ok_or_else(|| bad("weight must be an integer"))?),
        };
        let trace_bound = v.get("trace_bound").and_then(Value::as_i64).ok_or_else(|| bad("missing trace_bound"))?;
        let mut coeffs = BTreeMap::new();
        for entry in v.get("coeffs").and_then(Value::as_array).ok_or_else(|| bad("missing coeffs"))? {
            let rows: Vec<Vec<i64>> = serde_json::from_value(entry.get("twice_T").cloned().ok_or_else(|| bad("missing twice_T"))?)
                .map_err(|e| bad(&e.to_string()))?;
            let c = parse_rat(entry.get("c").and_then(Value::as_str).ok_or_else(|| bad("c must be a string"))?)?;
            let t = TwiceT::new(rows)?;
            if coeffs.insert(t.clone(), c).is_some() {
                return Err(Error::Parse(format!("duplicate index {t:?}")));
            }
        }
        Self::from_map(degree, weight, trace_bound, coeffs)
    }
}
