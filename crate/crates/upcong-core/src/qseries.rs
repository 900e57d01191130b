//! Truncated q-expansions of elliptic modular forms over `Q`.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::arith::{fmt_rat, parse_rat, rat, rat_mod, Rat};
use crate::error::{invalid, Error, Result};
use crate::linalg::fp::FpRowSpace;

/// `sum_{n < precision} c_n q^n`, exact rational coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QExpansion {
    pub weight: Option<i64>,
    coeffs: Vec<Rat>,
}

impl QExpansion {
    pub fn new(weight: Option<i64>, coeffs: Vec<Rat>) -> Self {
        QExpansion { weight, coeffs }
    }

    pub fn from_integers(weight: Option<i64>, coeffs: &[i64]) -> Self {
        Self::new(weight, coeffs.iter().map(|&c| rat(c)).collect())
    }

    pub fn zero(weight: Option<i64>, precision: usize) -> Self {
        Self::new(weight, vec![Rat::zero(); precision])
    }

    pub fn one(precision: usize) -> Self {
        let mut c = vec![Rat::zero(); precision];
        if precision > 0 {
            c[0] = Rat::one();
        }
        Self::new(Some(0), c)
    }

    pub fn precision(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeff(&self, n: usize) -> &Rat {
        &self.coeffs[n]
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn truncate(&self, precision: usize) -> Self {
        let n = precision.min(self.precision());
        Self::new(self.weight, self.coeffs[..n].to_vec())
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.precision().min(other.precision());
        let w = if self.weight == other.weight { self.weight } else { None };
        Self::new(w, (0..n).map(|i| &self.coeffs[i] + &other.coeffs[i]).collect())
    }

    pub fn scale(&self, c: &Rat) -> Self {
        Self::new(self.weight, self.coeffs.iter().map(|x| x * c).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let n = self.precision().min(other.precision());
        let mut out = vec![Rat::zero(); n];
        for (i, a) in self.coeffs[..n].iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs[..n - i].iter().enumerate() {
                if !b.is_zero() {
                    out[i + j] += a * b;
                }
            }
        }
        let w = match (self.weight, other.weight) {
            (Some(a), Some(b)) => Some(a + b),
            _ => None,
        };
        Self::new(w, out)
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut r = Self::one(self.precision());
        r.weight = Some(0);
        for _ in 0..e {
            r = r.mul(self);
        }
        if e == 0 {
            r.weight = Some(0);
        }
        r
    }

    /// Reduction modulo `p`; errors naming the first coefficient whose
    /// denominator is divisible by `p`.
    pub fn reduce_mod(&self, p: u64) -> Result<Vec<u64>> {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(n, c)| rat_mod(c, p).ok_or(Error::NonIntegral { at: format!("q^{n}"), p }))
            .collect()
    }

    pub fn to_json(&self) -> Value {
        let coeffs: Vec<Value> = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(n, c)| json!([n.to_string(), fmt_rat(c)]))
            .collect();
        json!({
            "kind": "q",
            "weight": self.weight,
            "precision": self.precision(),
            "coeffs": coeffs,
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let bad = |m: &str| Error::Parse(format!("q-expansion: {m}"));
        if v.get("kind").and_then(Value::as_str) != Some("q") {
            return Err(bad("kind must be \"q\""));
        }
        let weight = v.get("weight").and_then(Value::as_i64);
        let precision = v
            .get("precision")
            .and_then(Value::as_u64)
            .ok_or_else(|| bad("missing precision"))? as usize;
        let mut coeffs = vec![Rat::zero(); precision];
        for e in v.get("coeffs").and_then(Value::as_array).ok_or_else(|| bad("missing coeffs"))? {
            let pair = e.as_array().filter(|a| a.len() == 2).ok_or_else(|| bad("entry"))?;
            let n: usize = match &pair[0] {
                Value::String(s) => s.parse().map_err(|_| bad("exponent"))?,
                Value::Number(x) => x.as_u64().ok_or_else(|| bad("exponent"))? as usize,
                _ => return Err(bad("exponent")),
            };
            let c = match &pair[1] {
                Value::String(s) => parse_rat(s)?,
                Value::Number(x) => rat(x.as_i64().ok_or_else(|| bad("coefficient"))?),
                _ => return Err(bad("coefficient")),
            };
            if n >= precision {
                return Err(bad("exponent beyond precision"));
            }
            coeffs[n] = c;
        }
        Ok(Self::new(weight, coeffs))
    }
}

/// Bernoulli number `B_n` with `B_1 = -1/2`.
pub fn bernoulli(n: usize) -> Rat {
    let mut b: Vec<Rat> = Vec::with_capacity(n + 1);
    b.push(Rat::one());
    for m in 1..=n {
        // sum_{j<m} C(m+1, j) B_j + (m+1) B_m = 0
        let mut s = Rat::zero();
        let mut binom = BigInt::one();
        for (j, bj) in b.iter().enumerate() {
            s += Rat::from_integer(binom.clone()) * bj;
            binom = binom * BigInt::from(m + 1 - j) / BigInt::from(j + 1);
        }
        b.push(-s / rat(m as i64 + 1));
    }
    b.pop().unwrap()
}

pub fn sigma(k: u32, n: u64) -> BigInt {
    let mut s = BigInt::zero();
    let mut d = 1;
    while d * d <= n {
        if n.is_multiple_of(d) {
            s += BigInt::from(d).pow(k);
            let e = n / d;
            if e != d {
                s += BigInt::from(e).pow(k);
            }
        }
        d += 1;
    }
    s
}

/// `E_k = 1 - (2k/B_k) sum sigma_{k-1}(n) q^n` for even `k >= 4`.
pub fn eisenstein(k: i64, precision: usize) -> Result<QExpansion> {
    if k < 4 || k % 2 != 0 {
        return invalid(format!("Eisenstein series needs even weight >= 4, got {k}"));
    }
    let c = -rat(2 * k) / bernoulli(k as usize);
    let mut coeffs = Vec::with_capacity(precision);
    for n in 0..precision {
        coeffs.push(if n == 0 {
            Rat::one()
        } else {
            &c * Rat::from_integer(sigma(k as u32 - 1, n as u64))
        });
    }
    Ok(QExpansion::new(Some(k), coeffs))
}

/// The quasimodular `E_2 = 1 - 24 sum sigma_1(n) q^n`.
pub fn e2(precision: usize) -> QExpansion {
    let coeffs = (0..precision)
        .map(|n| if n == 0 { Rat::one() } else { Rat::from_integer(sigma(1, n as u64) * -24) })
        .collect();
    QExpansion::new(Some(2), coeffs)
}

/// `Delta = q prod (1 - q^n)^24`.
pub fn delta(precision: usize) -> QExpansion {
    let mut c = vec![BigInt::zero(); precision];
    if precision > 1 {
        c[1] = BigInt::one();
    }
    for n in 1..precision {
        for _ in 0..24 {
            for i in (n..precision).rev() {
                let t = c[i - n].clone();
                c[i] -= t;
            }
        }
    }
    QExpansion::new(Some(12), c.into_iter().map(Rat::from_integer).collect())
}

pub fn dim_mk(k: i64) -> usize {
    if k < 0 || k % 2 != 0 {
        return 0;
    }
    if k % 12 == 2 {
        (k / 12) as usize
    } else {
        (k / 12) as usize + 1
    }
}

/// Echelon basis `f_i = q^i + O(q^d)` of `M_k`, `d = dim M_k`.
pub fn mf_basis(k: i64, precision: usize) -> Vec<QExpansion> {
    let d = dim_mk(k);
    if d == 0 {
        return vec![];
    }
    let work = precision.max(d);
    let e4 = eisenstein(4, work).unwrap();
    let e6 = eisenstein(6, work).unwrap();
    let dl = delta(work);
    let mut gens = Vec::with_capacity(d);
    for i in 0..d as i64 {
        let rest = k - 12 * i;
        // rest = 4a + 6b with b in {0, 1}
        let (a, b) = if rest % 4 == 0 { (rest / 4, 0) } else { ((rest - 6) / 4, 1) };
        let g = dl.pow(i as u32).mul(&e4.pow(a as u32)).mul(&e6.pow(b as u32));
        gens.push(g);
    }
    // g_i = q^i + ...; clear upwards from the bottom
    for i in (0..d).rev() {
        for j in i + 1..d {
            let c = gens[i].coeff(j).clone();
            if !c.is_zero() {
                let t = gens[j].scale(&-c);
                gens[i] = gens[i].add(&t);
            }
        }
    }
    gens.into_iter()
        .map(|mut g| {
            g.weight = Some(k);
            g.truncate(precision)
        })
        .collect()
}

/// Sturm bound for level one: forms in `M_k` vanishing to this many terms vanish.
pub fn sturm(k: i64) -> usize {
    if k < 0 {
        0
    } else {
        (k / 12) as usize + 1
    }
}

/// `q d/dq`; the result carries no weight tag.
pub fn theta_elliptic(f: &QExpansion) -> QExpansion {
    QExpansion::new(
        None,
        f.coeffs.iter().enumerate().map(|(n, c)| c * rat(n as i64)).collect(),
    )
}

/// Mod-p filtration of `f in M_k`: the least weight `k' ≡ k (mod p-1)`
/// with `f mod p` in `M_{k'}`. `None` when `f ≡ 0 (mod p)`.
pub fn elliptic_filtration(f: &QExpansion, k: i64, p: u64) -> Result<Option<i64>> {
    if p < 5 {
        return invalid("elliptic filtration needs p >= 5");
    }
    let v = f.reduce_mod(p)?;
    if v.iter().all(|&x| x == 0) {
        return Ok(None);
    }
    let n = f.precision();
    let step = p as i64 - 1;
    let mut w = k.rem_euclid(step);
    while w <= k {
        let basis: Vec<Vec<u64>> = mf_basis(w, n)
            .iter()
            .map(|g| g.reduce_mod(p))
            .collect::<Result<_>>()?;
        if FpRowSpace::new(p, n, &basis).contains(&v) {
            return Ok(Some(w));
        }
        w += step;
    }
    Err(Error::InvalidArgument(format!("form is not in M_{k} mod {p} at this precision")))
}
