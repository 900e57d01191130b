//! Scalar index Jacobi forms from the weak generators
//! `φ_{-2,1} = θ_1^2/η^6`, `φ_{0,1} = 4 Σ_{i=2,3,4} (θ_i(z)/θ_i(0))^2` and
//! `φ_{-1,2} = θ_1(τ,2z)/η^3`.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::arith::{isqrt_i64, Rat};
use crate::error::{invalid, Error, Result};
use crate::jacobi::{FourierClassSpace, JacobiExpansion, JacobiIndex};
use crate::linalg::exact::rref_q;
use crate::linalg::hnf::saturate;
use crate::qseries::{mf_basis, sturm, QExpansion};

/// Series in `q^{1/8}` and `ζ^{1/2}`, exact below `valid` (in units of `q^{1/8}`).
#[derive(Clone, Debug)]
struct Graded {
    valid: i64,
    terms: BTreeMap<(i64, i64), Rat>,
}

impl Graded {
    fn ord(&self) -> i64 {
        self.terms.keys().map(|k| k.0).min().unwrap_or(self.valid)
    }

    fn mul(&self, o: &Graded) -> Graded {
        let valid = (self.valid + o.ord()).min(o.valid + self.ord());
        let mut terms: BTreeMap<(i64, i64), Rat> = BTreeMap::new();
        for ((a1, b1), c1) in &self.terms {
            for ((a2, b2), c2) in &o.terms {
                if a1 + a2 < valid {
                    *terms.entry((a1 + a2, b1 + b2)).or_insert_with(Rat::zero) += c1 * c2;
                }
            }
        }
        terms.retain(|_, c| !c.is_zero());
        Graded { valid, terms }
    }

    fn add(&self, o: &Graded) -> Graded {
        let valid = self.valid.min(o.valid);
        let mut terms = BTreeMap::new();
        for (k, c) in self.terms.iter().chain(o.terms.iter()) {
            if k.0 < valid {
                *terms.entry(*k).or_insert_with(Rat::zero) += c;
            }
        }
        terms.retain(|_, c: &mut Rat| !c.is_zero());
        Graded { valid, terms }
    }

    fn scale(&self, s: &Rat) -> Graded {
        Graded { valid: self.valid, terms: self.terms.iter().map(|(k, c)| (*k, c * s)).collect() }
    }

    /// Specialisation `ζ = 1`.
    fn at_zero(&self) -> Graded {
        let mut terms: BTreeMap<(i64, i64), Rat> = BTreeMap::new();
        for ((a, _), c) in &self.terms {
            *terms.entry((*a, 0)).or_insert_with(Rat::zero) += c;
        }
        terms.retain(|_, c| !c.is_zero());
        Graded { valid: self.valid, terms }
    }

    /// Inverse of a series in `q` alone.
    fn inverse(&self) -> Graded {
        assert!(self.terms.keys().all(|k| k.1 == 0), "inverse needs a pure q-series");
        let o = self.ord();
        let lead = self.terms[&(o, 0)].clone();
        let len = (self.valid - o) as usize;
        let mut h = vec![Rat::zero(); len];
        for ((a, _), c) in &self.terms {
            h[(a - o) as usize] = c / &lead;
        }
        let mut w = vec![Rat::zero(); len];
        if len > 0 {
            w[0] = Rat::one();
        }
        for a in 1..len {
            let mut s = Rat::zero();
            for j in 1..=a {
                if !h[j].is_zero() && !w[a - j].is_zero() {
                    s += &h[j] * &w[a - j];
                }
            }
            w[a] = -s;
        }
        let inv_lead = lead.recip();
        let valid = self.valid - 2 * o;
        let terms = w
            .into_iter()
            .enumerate()
            .filter(|(a, c)| !c.is_zero() && (*a as i64 - o) < valid)
            .map(|(a, c)| ((a as i64 - o, 0), c * &inv_lead))
            .collect();
        Graded { valid, terms }
    }
}

fn theta_series(valid: i64, half: bool, signed: bool, zeta_scale: i64) -> Graded {
    // half: exponents (2n+1)^2/8 with ζ^{(2n+1)/2}; otherwise n^2/2 with ζ^n
    let mut terms = BTreeMap::new();
    let bound = isqrt_i64(valid) + 2;
    for n in -bound..=bound {
        let (a, b) = if half { ((2 * n + 1) * (2 * n + 1), 2 * n + 1) } else { (4 * n * n, 2 * n) };
        if a >= valid {
            continue;
        }
        let c = if signed && n.rem_euclid(2) == 1 { -Rat::one() } else { Rat::one() };
        terms.insert((a, b * zeta_scale), c);
    }
    Graded { valid, terms }
}

fn eta_cubed(valid: i64) -> Graded {
    // q^{1/8} prod (1 - q^n)^3 in units of q^{1/8}
    let len = valid.max(1) as usize;
    let mut c = vec![BigInt::zero(); len];
    c[0] = BigInt::one();
    let mut n = 1;
    while 8 * n < valid {
        for _ in 0..3 {
            for i in (8 * n as usize..len).rev() {
                let t = c[i - 8 * n as usize].clone();
                c[i] -= t;
            }
        }
        n += 1;
    }
    let terms = c
        .into_iter()
        .enumerate()
        .filter(|(a, x)| !x.is_zero() && (*a as i64 + 1) < valid)
        .map(|(a, x)| ((a as i64 + 1, 0), Rat::from_integer(x)))
        .collect();
    Graded { valid, terms }
}

/// A weak Jacobi form of scalar index: coefficients `c(n, r)` for
/// `0 <= n < precision`, `|r| <= rmax`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeakForm {
    pub weight: i64,
    pub m: i64,
    pub precision: usize,
    rmax: i64,
    rows: Vec<Vec<BigInt>>,
}

fn rmax_for(m: i64, precision: usize) -> i64 {
    isqrt_i64(4 * m * (precision as i64 - 1).max(0) + m * m)
}

impl WeakForm {
    fn empty(weight: i64, m: i64, precision: usize) -> Self {
        let rmax = rmax_for(m, precision);
        WeakForm { weight, m, precision, rmax, rows: vec![vec![BigInt::zero(); (2 * rmax + 1) as usize]; precision] }
    }

    fn from_graded(g: &Graded, weight: i64, m: i64, precision: usize) -> Result<Self> {
        if g.valid < 8 * precision as i64 {
            return Err(Error::InsufficientPrecision { have: (g.valid / 8) as usize, need: precision, what: "theta quotient".into() });
        }
        let mut w = Self::empty(weight, m, precision);
        for ((a, b), c) in &g.terms {
            if a % 8 != 0 || b % 2 != 0 || !c.is_integer() {
                return Err(Error::LinearAlgebra(format!("theta quotient has a non-integral term at q^{a}/8 ζ^{b}/2")));
            }
            let n = a / 8;
            if n < 0 {
                return Err(Error::LinearAlgebra("q-grading did not cancel".into()));
            }
            if (n as usize) < precision {
                let r = b / 2;
                if r.abs() > w.rmax {
                    return Err(Error::LinearAlgebra("weak form exceeds its r-range".into()));
                }
                w.rows[n as usize][(r + w.rmax) as usize] = c.to_integer();
            }
        }
        Ok(w)
    }

    pub fn coeff(&self, n: i64, r: i64) -> BigInt {
        if n < 0 || n as usize >= self.precision || r.abs() > self.rmax {
            return BigInt::zero();
        }
        self.rows[n as usize][(r + self.rmax) as usize].clone()
    }

    pub fn mul(&self, o: &WeakForm) -> WeakForm {
        let precision = self.precision.min(o.precision);
        let mut out = Self::empty(self.weight + o.weight, self.m + o.m, precision);
        for n1 in 0..precision {
            for (i1, c1) in self.rows[n1].iter().enumerate() {
                if c1.is_zero() {
                    continue;
                }
                let r1 = i1 as i64 - self.rmax;
                for n2 in 0..precision - n1 {
                    for (i2, c2) in o.rows[n2].iter().enumerate() {
                        if c2.is_zero() {
                            continue;
                        }
                        let r = r1 + i2 as i64 - o.rmax;
                        if r.abs() <= out.rmax {
                            out.rows[n1 + n2][(r + out.rmax) as usize] += c1 * c2;
                        }
                    }
                }
            }
        }
        out
    }

    /// `f(q) φ` for an integral elliptic form `f`.
    pub fn mul_q(&self, f: &QExpansion) -> WeakForm {
        let precision = self.precision.min(f.precision());
        let mut out = self.clone();
        out.precision = precision;
        out.rows.truncate(precision);
        out.weight = self.weight + f.weight.unwrap_or(0);
        for row in out.rows.iter_mut() {
            row.iter_mut().for_each(|x| *x = BigInt::zero());
        }
        for a in 0..precision {
            let fa = f.coeff(a);
            if fa.is_zero() {
                continue;
            }
            assert!(fa.is_integer(), "mul_q needs an integral q-series");
            let fa = fa.to_integer();
            for n in 0..precision - a {
                for (i, c) in self.rows[n].iter().enumerate() {
                    if !c.is_zero() {
                        out.rows[n + a][i] += &fa * c;
                    }
                }
            }
        }
        out
    }

    /// All `(n, r)` with `D = 4mn - r^2 < 0` and a nonzero coefficient.
    pub fn negative_support(&self) -> Vec<(i64, i64)> {
        let mut out = vec![];
        for n in 0..self.precision as i64 {
            for r in -self.rmax..=self.rmax {
                if 4 * self.m * n - r * r < 0 && !self.coeff(n, r).is_zero() {
                    out.push((n, r));
                }
            }
        }
        out
    }

    pub fn to_jacobi(&self) -> Result<JacobiExpansion> {
        if !self.negative_support().is_empty() {
            return Err(Error::InvalidArgument("weak form has negative-discriminant terms".into()));
        }
        let index = JacobiIndex::scalar(self.m)?;
        let mut coeffs = BTreeMap::new();
        for n in 0..self.precision as i64 {
            for r in -self.rmax..=self.rmax {
                let c = self.coeff(n, r);
                if !c.is_zero() {
                    coeffs.insert((n, vec![r]), Rat::from_integer(c));
                }
            }
        }
        JacobiExpansion::from_map(&index, Some(self.weight), self.precision, coeffs)
    }
}

/// `(φ_{-2,1}, φ_{0,1}, φ_{-1,2})` to the given precision.
pub fn weak_generators(precision: usize) -> Result<Arc<(WeakForm, WeakForm, WeakForm)>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<(WeakForm, WeakForm, WeakForm)>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(g) = cache.lock().unwrap().get(&precision) {
        return Ok(g.clone());
    }
    let v = 8 * precision as i64 + 16;
    let th1 = theta_series(v, true, true, 1);
    let eta3 = eta_cubed(v);
    let eta6 = eta3.mul(&eta3);
    let phi_m2 = th1.mul(&th1).mul(&eta6.inverse());
    let mut phi_0 = Graded { valid: v, terms: BTreeMap::new() };
    for (half, signed) in [(true, false), (false, false), (false, true)] {
        let th = theta_series(v, half, signed, 1);
        let ratio = th.mul(&th.at_zero().inverse());
        phi_0 = phi_0.add(&ratio.mul(&ratio).scale(&Rat::from_integer(BigInt::from(4))));
    }
    let th1_2z = theta_series(v, true, true, 2);
    let phi_m1 = th1_2z.mul(&eta3.inverse());
    let g = Arc::new((
        WeakForm::from_graded(&phi_m2, -2, 1, precision)?,
        WeakForm::from_graded(&phi_0, 0, 1, precision)?,
        WeakForm::from_graded(&phi_m1, -1, 2, precision)?,
    ));
    cache.lock().unwrap().insert(precision, g.clone());
    Ok(g)
}

fn power(w: &WeakForm, e: u32, precision: usize) -> WeakForm {
    let mut r = WeakForm::empty(0, 0, precision);
    r.rows[0][r.rmax as usize] = BigInt::one();
    for _ in 0..e {
        r = r.mul(w);
    }
    r
}

/// Basis of weak Jacobi forms of weight `k` and index `m`:
/// `f φ_{-2,1}^j φ_{0,1}^{m-j}` with `f` running over a basis of `M_{k+2j}`,
/// times `φ_{-1,2}` in odd weight.
pub fn weak_basis(k: i64, m: i64, precision: usize) -> Result<Vec<WeakForm>> {
    if m < 0 {
        return invalid("index must be nonnegative");
    }
    let g = weak_generators(precision)?;
    if k.rem_euclid(2) == 1 {
        if m < 2 {
            return Ok(vec![]);
        }
        return Ok(weak_basis(k + 1, m - 2, precision)?.iter().map(|w| w.mul(&g.2)).collect());
    }
    let mut out = vec![];
    for j in 0..=m {
        let mono = power(&g.0, j as u32, precision).mul(&power(&g.1, (m - j) as u32, precision));
        for f in mf_basis(k + 2 * j, precision) {
            out.push(mono.mul_q(&f));
        }
    }
    for w in out.iter_mut() {
        w.weight = k;
        w.m = m;
    }
    Ok(out)
}

/// Smallest precision from which truncation is injective on `J_{k,m}`.
pub fn jacobi_sturm(k: i64, m: i64) -> usize {
    (0..=m.max(0)).map(|j| sturm(k + 2 * j)).max().unwrap_or(1)
}

type BasisKey = (i64, i64, usize);

/// Integral basis (Hermite normal form in orbit coordinates) of the
/// holomorphic Jacobi forms `J_{k,m}` truncated to `precision`.
pub fn holomorphic_basis(k: i64, m: i64, precision: usize) -> Result<Arc<Vec<JacobiExpansion>>> {
    static CACHE: OnceLock<Mutex<HashMap<BasisKey, Arc<Vec<JacobiExpansion>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(b) = cache.lock().unwrap().get(&(k, m, precision)) {
        return Ok(b.clone());
    }
    if m < 1 {
        return invalid("holomorphic_basis needs m >= 1");
    }
    // work where the weak basis is faithful and all negative orbits are visible
    let work = precision
        .max(jacobi_sturm(k, m) + 1)
        .max((0..=m).map(|j| crate::qseries::dim_mk(k + 2 * j + 2)).max().unwrap_or(0) + 1)
        .max((m / 4 + 2) as usize);
    let weak = weak_basis(k, m, work)?;
    let index = JacobiIndex::scalar(m)?;
    let out: Vec<JacobiExpansion> = if weak.is_empty() {
        vec![]
    } else {
        // functionals: negative-discriminant coefficients
        let mut neg: Vec<(i64, i64)> = weak.iter().flat_map(|w| w.negative_support()).collect();
        neg.sort();
        neg.dedup();
        let cols = weak.len();
        let mut sys: Vec<Vec<Rat>> = neg
            .iter()
            .map(|&(n, r)| weak.iter().map(|w| Rat::from_integer(w.coeff(n, r))).collect())
            .collect();
        let kernel: Vec<Vec<Rat>> = if sys.is_empty() {
            (0..cols).map(|i| (0..cols).map(|j| if i == j { Rat::one() } else { Rat::zero() }).collect()).collect()
        } else {
            let piv = rref_q(&mut sys);
            let free: Vec<usize> = (0..cols).filter(|c| !piv.contains(c)).collect();
            free.iter()
                .map(|&f| {
                    let mut v = vec![Rat::zero(); cols];
                    v[f] = Rat::one();
                    for (i, &c) in piv.iter().enumerate() {
                        v[c] = -sys[i][f].clone();
                    }
                    v
                })
                .collect()
        };
        // orbit coordinates at the working precision
        let space = FourierClassSpace::new(&index, work, k);
        let coords: Vec<Vec<Rat>> = kernel
            .iter()
            .map(|a| {
                space
                    .orbits
                    .iter()
                    .map(|o| {
                        let mut s = Rat::zero();
                        for (ai, w) in a.iter().zip(&weak) {
                            if !ai.is_zero() {
                                s += ai * Rat::from_integer(w.coeff(o.n, o.r[0]));
                            }
                        }
                        s
                    })
                    .collect()
            })
            .collect();
        let sat = saturate(&coords, space.dim())?;
        let full: Vec<JacobiExpansion> = sat
            .iter()
            .map(|row| {
                let vals: Vec<Rat> = row.iter().map(|x| Rat::from_integer(x.clone())).collect();
                JacobiExpansion::from_orbit_values(&space, k, &vals)
            })
            .collect();
        if work == precision {
            full
        } else {
            truncated_basis(&full, &index, k, precision)?
        }
    };
    let out = Arc::new(out);
    cache.lock().unwrap().insert((k, m, precision), out.clone());
    Ok(out)
}

/// Integral basis of the image of `forms` under truncation to `precision`.
pub fn truncated_basis(forms: &[JacobiExpansion], index: &JacobiIndex, k: i64, precision: usize) -> Result<Vec<JacobiExpansion>> {
    let space = FourierClassSpace::new(index, precision, k);
    let mut rows: Vec<Vec<Rat>> = forms.iter().map(|f| f.truncate(precision).orbit_values(&space)).collect();
    rref_q(&mut rows);
    let sat = saturate(&rows, space.dim())?;
    Ok(sat
        .iter()
        .map(|row| {
            let vals: Vec<Rat> = row.iter().map(|x| Rat::from_integer(x.clone())).collect();
            JacobiExpansion::from_orbit_values(&space, k, &vals)
        })
        .collect())
}
