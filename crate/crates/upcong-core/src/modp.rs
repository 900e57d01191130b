//! Reduction mod p: filtrations, heat cycles, `U_p` congruences and the
//! criterion that predicts them.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::jacobi::{JacobiExpansion, JacobiIndex, JacobiModP};
use crate::linalg::fp::{FpMatrix, FpRowSpace};
use crate::restriction::{choose_s, jacobi_basis, JacobiBasis};
use crate::scalar::jacobi_sturm;

/// Number of leading coefficients `n < N` that decide equality of two forms
/// of weight `k` whose restrictions have index at most `m`.
pub fn certification_precision(k: i64, m: i64) -> usize {
    jacobi_sturm(k, m) + 1
}

/// Largest scalar index `M[s]` over the default restriction set.
pub fn restriction_bound(index: &JacobiIndex, precision: usize, weight: i64) -> Result<i64> {
    type Key = (JacobiIndex, usize, i64);
    static CACHE: OnceLock<Mutex<HashMap<Key, i64>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let key = (index.clone(), precision, weight.rem_euclid(2));
    if let Some(&m) = cache.lock().unwrap().get(&key) {
        return Ok(m);
    }
    let m = choose_s(index, precision, weight)?.iter().map(|s| index.quad(s)).max().unwrap_or(1);
    cache.lock().unwrap().insert(key, m);
    Ok(m)
}

/// Precision at which forms of weight up to `weight_bound` (parity of
/// `weight`) are determined. The restriction set depends on the precision,
/// so this iterates to a fixed point.
pub fn required_precision(index: &JacobiIndex, weight_bound: i64, weight: i64) -> Result<usize> {
    let mut m = (0..index.rank()).map(|i| index.twice_entry(i, i) / 2).max().unwrap_or(1);
    loop {
        let n = certification_precision(weight_bound, m);
        let m2 = restriction_bound(index, n, weight)?;
        if m2 <= m {
            return Ok(n);
        }
        m = m2;
    }
}

/// Precision needed to certify `L^{p-1} φ ≡ φ` for `φ` of weight `k`: the
/// cycle can climb to weight `k + (p-1)(p+1)`.
pub fn cycle_precision(index: &JacobiIndex, k: i64, p: u64) -> Result<usize> {
    let p = p as i64;
    required_precision(index, k + (p - 1) * (p + 1), k)
}

fn check_prime(p: u64) -> Result<()> {
    if p < 5 || !crate::arith::is_prime_u64(p) {
        return invalid(format!("p = {p} must be a prime >= 5"));
    }
    Ok(())
}

/// Whether `phi` is the reduction of a form of weight `k`.
pub fn in_span_mod_p(phi: &JacobiModP, k: i64) -> Result<bool> {
    if k < 1 {
        return Ok(phi.is_zero());
    }
    let basis = jacobi_basis(k, &phi.index, phi.precision)?;
    let vals = phi.orbit_values(&basis.space);
    if JacobiModP::from_orbit_values(&basis.space, phi.weight, phi.p, &vals).iter().ne(phi.iter()) {
        return Ok(false);
    }
    let span = FpRowSpace::new(phi.p, basis.space.dim(), &basis.rows_mod(phi.p));
    Ok(span.contains(&vals))
}

/// Filtration of `phi`, known to be the reduction of a form of weight at
/// most `upper`. Membership at weight `w` implies membership at
/// `w + (p - 1)` (multiply by `E_{p-1}`), so the search ascends.
pub fn filtration_below(phi: &JacobiModP, upper: i64) -> Result<Option<i64>> {
    check_prime(phi.p)?;
    if phi.is_zero() {
        return Ok(None);
    }
    let step = phi.p as i64 - 1;
    let need = required_precision(&phi.index, upper, upper)?;
    if phi.precision < need {
        return Err(Error::InsufficientPrecision { have: phi.precision, need, what: format!("filtration below weight {upper}") });
    }
    let mut w = upper.rem_euclid(step);
    if w == 0 {
        w = step;
    }
    while w <= upper {
        if in_span_mod_p(phi, w)? {
            return Ok(Some(w));
        }
        w += step;
    }
    Err(Error::LinearAlgebra(format!("form is not the reduction of a weight {upper} form")))
}

/// `ω(φ)`: the least weight `k' ≡ k (mod p - 1)` in which `φ` mod p occurs;
/// `None` for `φ ≡ 0`.
pub fn jacobi_filtration(phi: &JacobiModP) -> Result<Option<i64>> {
    let k = phi.weight.ok_or_else(|| Error::InvalidArgument("filtration needs a weight tag".into()))?;
    filtration_below(phi, k)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Fall {
    /// `e` with `ω(L^e φ) < ω(L^{e-1} φ) + p + 1`.
    pub step: usize,
    /// Steps since the previous fall (or the start).
    pub gap: usize,
    /// `b` with `ω(L^e φ) = ω(L^{e-1} φ) + p + 1 - b (p - 1)`.
    pub drop: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HeatCycleReport {
    pub weight: i64,
    pub p: u64,
    pub l: usize,
    /// `ω(L^e φ)` for `e = 0..p-1`; `None` once the cycle hits zero.
    pub filtrations: Vec<Option<i64>>,
    pub falls: Vec<Fall>,
    /// `e` with `2 ω(L^{e-1} φ) ≡ l (mod p)`.
    pub low_points: Vec<usize>,
    pub cycle_closed: bool,
}

impl HeatCycleReport {
    /// `Σ b_j (p - 1) = Σ c_j (p + 1)`, which must hold on closed cycles.
    pub fn balanced(&self) -> bool {
        let p = self.p as i64;
        let b: i64 = self.falls.iter().map(|f| f.drop).sum();
        b * (p - 1) == (self.filtrations.len() as i64 - 1) * (p + 1)
    }
}

/// Iterates the heat operator mod p through `L^{p-1}`, tracking filtrations
/// with the bound `ω(Lφ) <= ω(φ) + p + 1`.
pub fn heat_cycle(phi: &JacobiModP) -> Result<HeatCycleReport> {
    let p = phi.p;
    check_prime(p)?;
    let k = phi.weight.ok_or_else(|| Error::InvalidArgument("heat cycle needs a weight tag".into()))?;
    if phi.index.det_twice() % p as i64 == 0 {
        return invalid(format!("p = {p} divides det(2M)"));
    }
    let l = phi.index.rank();
    let pi = p as i64;
    let mut filtrations = vec![jacobi_filtration(phi)?];
    let mut cur = phi.clone();
    for _ in 1..p {
        cur = cur.heat();
        let prev = *filtrations.last().unwrap();
        let w = match prev {
            Some(w) => filtration_below(&cur, w + pi + 1)?,
            None => None,
        };
        filtrations.push(w);
    }
    let mut falls = vec![];
    let mut low_points = vec![];
    let mut last = 0;
    for e in 1..filtrations.len() {
        if let (Some(a), Some(b)) = (filtrations[e - 1], filtrations[e]) {
            if (2 * a - l as i64).rem_euclid(pi) == 0 {
                low_points.push(e);
            }
            if b != a + pi + 1 {
                falls.push(Fall { step: e, gap: e - last, drop: (a + pi + 1 - b) / (pi - 1) });
                last = e;
            }
        }
    }
    let cycle_closed = cur.iter().eq(phi.iter());
    Ok(HeatCycleReport { weight: k, p, l, filtrations, falls, low_points, cycle_closed })
}

/// Whether `φ | U_p ≡ 0 (mod p)`. A nonzero coefficient with `p | D` is a
/// witness at any precision; vanishing is only certified at
/// [`cycle_precision`]. Both `U_p` and `L^{p-1} φ ≡ φ` are evaluated and
/// must agree.
pub fn up_congruent(phi: &JacobiExpansion, p: u64) -> Result<bool> {
    check_prime(p)?;
    let k = phi.weight.ok_or_else(|| Error::InvalidArgument("U_p congruence needs a weight tag".into()))?;
    let red = phi.reduce_mod(p)?;
    let via_u = phi.u_p(p).reduce_mod(p)?.is_zero();
    let mut h = red.clone();
    for _ in 1..p {
        h = h.heat();
    }
    let via_heat = h.iter().eq(red.iter());
    if via_u != via_heat {
        return Err(Error::LinearAlgebra("U_p and heat cycle disagree".into()));
    }
    if !via_u {
        return Ok(false);
    }
    let need = cycle_precision(&phi.index, k, p)?;
    if phi.precision < need {
        return Err(Error::InsufficientPrecision { have: phi.precision, need, what: format!("U_{p} congruence at weight {k}") });
    }
    Ok(true)
}

/// The forms of weight `k` with `φ | U_p ≡ 0`, as `F_p`-coordinates in an
/// integral basis.
#[derive(Clone, Debug)]
pub struct CongruenceSpace {
    pub weight: i64,
    pub p: u64,
    pub basis: Arc<JacobiBasis>,
    /// Reduced row echelon coordinates relative to `basis`.
    pub kernel: Vec<Vec<u64>>,
}

impl CongruenceSpace {
    pub fn dim(&self) -> usize {
        self.kernel.len()
    }

    fn combine(&self, coords: &[u64]) -> JacobiModP {
        let p = self.p;
        let rows = self.basis.rows_mod(p);
        let mut vals = vec![0u64; self.basis.space.dim()];
        for (c, row) in coords.iter().zip(&rows) {
            for (v, x) in vals.iter_mut().zip(row) {
                *v = (*v + crate::arith::mul_mod(*c, *x, p)) % p;
            }
        }
        JacobiModP::from_orbit_values(&self.basis.space, Some(self.weight), p, &vals)
    }

    pub fn forms(&self) -> Vec<JacobiModP> {
        self.kernel.iter().map(|c| self.combine(c)).collect()
    }

    pub fn basis_forms(&self) -> Vec<JacobiModP> {
        let d = self.basis.dim();
        (0..d).map(|i| self.combine(&(0..d).map(|j| (i == j) as u64).collect::<Vec<_>>())).collect()
    }

    /// Membership of a form of weight `k` given at any precision at least
    /// the basis precision's orbit prefix.
    pub fn contains(&self, phi: &JacobiModP) -> Result<bool> {
        let space = crate::jacobi::FourierClassSpace::new(&self.basis.space.index, phi.precision.min(self.basis.precision()), self.weight);
        let gens: Vec<Vec<u64>> = self.forms().iter().map(|f| f.orbit_values(&space)).collect();
        Ok(FpRowSpace::new(self.p, space.dim(), &gens).contains(&phi.orbit_values(&space)))
    }
}

fn congruence_space_at(k: i64, index: &JacobiIndex, p: u64, precision: usize) -> Result<CongruenceSpace> {
    let basis = jacobi_basis(k, index, precision)?;
    let cols: Vec<usize> = (0..basis.space.dim()).filter(|&o| basis.space.orbits[o].disc.rem_euclid(p as i64) == 0).collect();
    let rows = basis.rows_mod(p);
    // left kernel of the U_p-part: transpose so kernel() acts on coordinates
    let t: Vec<Vec<u64>> = cols.iter().map(|&c| rows.iter().map(|r| r[c]).collect()).collect();
    let ker = FpMatrix::from_rows(p, basis.dim(), &t).kernel();
    let kernel = FpRowSpace::new(p, basis.dim(), &ker).rows;
    Ok(CongruenceSpace { weight: k, p, basis, kernel })
}

pub fn up_congruence_space(k: i64, index: &JacobiIndex, p: u64) -> Result<CongruenceSpace> {
    check_prime(p)?;
    if index.det_twice() % p as i64 == 0 {
        return invalid(format!("p = {p} divides det(2M)"));
    }
    congruence_space_at(k, index, p, cycle_precision(index, k, p)?)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "regime")]
pub enum Verdict {
    NotApplicable { reason: String },
    /// Every nonzero form has `U_p` image nonzero mod p.
    ExcludedByBound,
    /// `ω(L^exponent φ)` equals `not_congruent` or `congruent` according to
    /// whether `φ | U_p ≢ 0`.
    FiltrationTest { exponent: i64, not_congruent: i64, congruent: i64 },
    /// `p` sits exactly on the bound, which the theorem leaves open.
    BoundaryUndetermined,
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::NotApplicable { .. } => "NotApplicable",
            Verdict::ExcludedByBound => "ExcludedByBound",
            Verdict::FiltrationTest { .. } => "FiltrationTest",
            Verdict::BoundaryUndetermined => "BoundaryUndetermined",
        }
    }
}

fn na(reason: impl Into<String>) -> Verdict {
    Verdict::NotApplicable { reason: reason.into() }
}

/// Prediction for `U_p` congruences of `J_{k,M}` with `M` of rank `l`.
pub fn jacobi_criterion(k: i64, l: usize, p: u64, det_twice: i64) -> Verdict {
    let (pi, li) = (p as i64, l as i64);
    if p < 5 || !crate::arith::is_prime_u64(p) {
        return na("p must be a prime >= 5");
    }
    if pi < k {
        return na("p < k");
    }
    if det_twice % pi == 0 {
        return na("p divides det(2M)");
    }
    if l.is_multiple_of(2) {
        if pi <= li / 2 + 1 {
            return na("p <= l/2 + 1");
        }
        return Verdict::FiltrationTest { exponent: pi + 1 - k + li / 2, not_congruent: 2 * pi + 2 + li - k, congruent: pi + 3 + li - k };
    }
    if 2 * k <= li + 5 {
        return na("k <= (l + 5)/2");
    }
    let bound = 2 * k - li - 4;
    match pi.cmp(&bound) {
        std::cmp::Ordering::Greater => Verdict::ExcludedByBound,
        std::cmp::Ordering::Equal => Verdict::BoundaryUndetermined,
        std::cmp::Ordering::Less => Verdict::FiltrationTest {
            exponent: (3 * pi + li) / 2 + 1 - k,
            not_congruent: 3 * pi + 2 + li - k,
            congruent: 2 * pi + 3 + li - k,
        },
    }
}

/// Whether the branch weights of a verdict are `≡ k + e(p + 1) (mod p - 1)`.
pub fn verdict_consistent(v: &Verdict, k: i64, p: u64) -> bool {
    match v {
        Verdict::FiltrationTest { exponent, not_congruent, congruent } => {
            let (pi, m) = (p as i64, p as i64 - 1);
            let w = k + exponent * (pi + 1);
            *exponent > 0 && (w - not_congruent).rem_euclid(m) == 0 && (w - congruent).rem_euclid(m) == 0
        }
        _ => true,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CriterionCheck {
    pub form: String,
    pub congruent: bool,
    pub predicted: Option<i64>,
    pub observed: Option<i64>,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CriterionReport {
    pub weight: i64,
    pub p: u64,
    pub verdict: Verdict,
    pub congruence_dim: usize,
    pub checks: Vec<CriterionCheck>,
}

impl CriterionReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Checks the criterion's prediction against direct computation on every
/// basis form and every congruence-space generator.
pub fn verify_criterion(k: i64, index: &JacobiIndex, p: u64) -> Result<CriterionReport> {
    let verdict = jacobi_criterion(k, index.rank(), p, index.det_twice());
    let mut precision = cycle_precision(index, k, p)?;
    if let Verdict::FiltrationTest { exponent, .. } = verdict {
        precision = precision.max(required_precision(index, k + exponent * (p as i64 + 1), k)?);
    }
    let space = congruence_space_at(k, index, p, precision)?;
    let mut forms: Vec<(String, JacobiModP)> =
        space.basis_forms().into_iter().enumerate().map(|(i, f)| (format!("basis[{i}]"), f)).collect();
    forms.extend(space.forms().into_iter().enumerate().map(|(i, f)| (format!("kernel[{i}]"), f)));
    let mut checks = vec![];
    for (name, f) in forms {
        if f.is_zero() {
            continue;
        }
        let congruent = space.contains(&f)?;
        let check = match &verdict {
            Verdict::ExcludedByBound => CriterionCheck { form: name, congruent, predicted: None, observed: None, pass: !congruent },
            Verdict::FiltrationTest { exponent, not_congruent, congruent: cw } => {
                let mut h = f.clone();
                for _ in 0..*exponent {
                    h = h.heat();
                }
                let observed = jacobi_filtration(&h)?;
                let predicted = if congruent { *cw } else { *not_congruent };
                CriterionCheck { form: name, congruent, predicted: Some(predicted), observed, pass: observed == Some(predicted) }
            }
            _ => continue,
        };
        checks.push(check);
    }
    Ok(CriterionReport { weight: k, p, verdict, congruence_dim: space.dim(), checks })
}
