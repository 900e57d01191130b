//! Jacobi forms of matrix index from their pullbacks to scalar index.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_traits::Zero;

use crate::arith::{large_primes, Rat};
use crate::error::{invalid, Error, Result};
use crate::jacobi::{FourierClassSpace, JacobiExpansion, JacobiIndex};
use crate::linalg::exact::{kernel_q, solve_in_span};
use crate::linalg::fp::FpRowSpace;
use crate::linalg::hnf::saturate;
use crate::scalar::{holomorphic_basis, jacobi_sturm};

/// `(1, 4b, (4b)^2, ..., (4b)^{l-1})`; `z -> s z` then separates all `r`
/// with `|r_j| < 2b`.
pub fn restriction_vector(b: i64, l: usize) -> Result<Vec<i64>> {
    if b < 1 {
        return invalid("restriction_vector needs b >= 1");
    }
    let mut v = Vec::with_capacity(l);
    let mut x: i64 = 1;
    for i in 0..l {
        v.push(x);
        if i + 1 < l {
            x = x.checked_mul(4 * b).ok_or_else(|| Error::Resource("restriction vector overflows".into()))?;
        }
    }
    Ok(v)
}

/// Sparse restriction map from orbit coordinates of `space` to orbit
/// coordinates of the scalar index `M[s]`: one row per scalar orbit,
/// entries `(column, ±1 multiplicity)`.
pub fn restriction_rows(space: &FourierClassSpace, s: &[i64], weight: i64) -> Result<(FourierClassSpace, Vec<Vec<(usize, i64)>>)> {
    let target = space.index.restricted(s)?;
    let tspace = FourierClassSpace::new(&target, space.precision, weight);
    let canon: HashMap<(i64, i64), usize> = tspace.orbits.iter().enumerate().map(|(i, o)| ((o.n, o.r[0]), i)).collect();
    let mut rows: Vec<HashMap<usize, i64>> = vec![HashMap::new(); tspace.dim()];
    for (n, r) in space.support() {
        let rp: i64 = r.iter().zip(s).map(|(a, b)| a * b).sum();
        let Some(&row) = canon.get(&(*n, rp)) else { continue };
        if let Some((o, flip)) = space.locate(*n, r) {
            *rows[row].entry(o).or_insert(0) += if flip { -1 } else { 1 };
        }
    }
    let rows = rows
        .into_iter()
        .map(|m| {
            let mut v: Vec<(usize, i64)> = m.into_iter().filter(|&(_, c)| c != 0).collect();
            v.sort();
            v
        })
        .collect();
    Ok((tspace, rows))
}

fn rank_mod(p: u64, cols: usize, rows: &[Vec<u64>]) -> usize {
    FpRowSpace::new(p, cols, rows).dim()
}

fn dense_mod(row: &[(usize, i64)], cols: usize, p: u64) -> Vec<u64> {
    let mut v = vec![0u64; cols];
    for &(c, x) in row {
        v[c] = x.rem_euclid(p as i64) as u64;
    }
    v
}

/// Whether the stacked restriction along `s_set` is injective on the
/// truncated formal expansions (checked over a large prime, which bounds
/// the rational rank from below).
pub fn is_valid_s(index: &JacobiIndex, precision: usize, weight: i64, s_set: &[Vec<i64>]) -> Result<bool> {
    let space = FourierClassSpace::new(index, precision, weight);
    let p = large_primes().next().unwrap();
    let mut all = vec![];
    for s in s_set {
        let (_, rows) = restriction_rows(&space, s, weight)?;
        all.extend(rows.iter().map(|r| dense_mod(r, space.dim(), p)));
    }
    Ok(rank_mod(p, space.dim(), &all) == space.dim())
}

fn primitive_candidates(l: usize, bound: i64) -> Vec<Vec<i64>> {
    let mut out = vec![];
    for v in crate::jacobi::index::BoxPoints::new(&vec![bound; l]) {
        let first = v.iter().find(|&&x| x != 0);
        if first.is_none_or(|&x| x < 0) {
            continue;
        }
        let g = v.iter().fold(0i64, |a, &x| num_integer::gcd(a, x));
        if g == 1 {
            out.push(v);
        }
    }
    out
}

/// A finite set `S` making the restriction map injective at this precision:
/// short vectors added greedily in order of `M[s]`, largest first within ties.
pub fn choose_s(index: &JacobiIndex, precision: usize, weight: i64) -> Result<Vec<Vec<i64>>> {
    let l = index.rank();
    if l == 1 {
        return Ok(vec![vec![1]]);
    }
    let space = FourierClassSpace::new(index, precision, weight);
    let p = large_primes().next().unwrap();
    let mut chosen: Vec<Vec<i64>> = vec![];
    let mut acc: Vec<Vec<u64>> = vec![];
    let mut rank = 0;
    if space.dim() == 0 {
        return Ok(vec![]);
    }
    for bound in 1..=3 {
        let mut cands = primitive_candidates(l, bound);
        cands.sort_by(|a, b| (index.quad(a), b).cmp(&(index.quad(b), a)));
        for s in cands {
            if chosen.contains(&s) {
                continue;
            }
            let (_, rows) = restriction_rows(&space, &s, weight)?;
            let mut trial = acc.clone();
            trial.extend(rows.iter().map(|r| dense_mod(r, space.dim(), p)));
            let rk = rank_mod(p, space.dim(), &trial);
            if rk > rank {
                rank = rk;
                acc = FpRowSpace::new(p, space.dim(), &trial).rows;
                chosen.push(s);
                if rank == space.dim() {
                    return Ok(chosen);
                }
            }
        }
    }
    // fall back to a separating vector
    let b = (0..l).map(|i| index.r_bound(precision as i64, i)).max().unwrap_or(1) + 1;
    let s = restriction_vector(b, l)?;
    chosen.push(s);
    if is_valid_s(index, precision, weight, &chosen)? {
        Ok(chosen)
    } else {
        Err(Error::LinearAlgebra("no injective restriction set found".into()))
    }
}

/// An integral basis of `J_{k,M}` truncated to `precision`, in orbit coordinates.
#[derive(Clone, Debug)]
pub struct JacobiBasis {
    pub weight: i64,
    pub space: FourierClassSpace,
    pub s_set: Vec<Vec<i64>>,
    /// Hermite normal form rows, one per basis element.
    pub rows: Vec<Vec<BigInt>>,
}

impl JacobiBasis {
    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn index(&self) -> &JacobiIndex {
        &self.space.index
    }

    pub fn precision(&self) -> usize {
        self.space.precision
    }

    pub fn expansions(&self) -> Vec<JacobiExpansion> {
        self.rows
            .iter()
            .map(|r| {
                let vals: Vec<Rat> = r.iter().map(|x| Rat::from_integer(x.clone())).collect();
                JacobiExpansion::from_orbit_values(&self.space, self.weight, &vals)
            })
            .collect()
    }

    /// Coordinates of `phi` in this basis, or `None` if it is not in the span.
    pub fn membership(&self, phi: &JacobiExpansion) -> Result<Option<Vec<Rat>>> {
        if phi.index != self.space.index {
            return Err(Error::IndexMismatch("membership: index differs from basis".into()));
        }
        if phi.precision != self.precision() {
            return Err(Error::InvalidArgument(format!(
                "membership: precision {} differs from basis precision {}",
                phi.precision,
                self.precision()
            )));
        }
        if phi.weight.is_some_and(|w| w != self.weight) || !phi.is_orbit_consistent(&self.space) {
            return Ok(None);
        }
        let rows: Vec<Vec<Rat>> =
            self.rows.iter().map(|r| r.iter().map(|x| Rat::from_integer(x.clone())).collect()).collect();
        Ok(solve_in_span(&rows, &phi.orbit_values(&self.space)))
    }

    /// Reduction of the basis modulo `p` in orbit coordinates.
    pub fn rows_mod(&self, p: u64) -> Vec<Vec<u64>> {
        self.rows.iter().map(|r| r.iter().map(|x| crate::arith::bigint_mod(x, p)).collect()).collect()
    }
}

/// Solves for `J_{k,M}` by requiring every pullback along `s in S` to lie in
/// the span of the scalar holomorphic basis of index `M[s]`.
pub fn solve_basis(k: i64, index: &JacobiIndex, s_set: &[Vec<i64>], precision: usize) -> Result<JacobiBasis> {
    let space = FourierClassSpace::new(index, precision, k);
    for s in s_set {
        let need = jacobi_sturm(k, index.quad(s));
        if precision < need {
            return Err(Error::InsufficientPrecision { have: precision, need, what: format!("restriction to index {}", index.quad(s)) });
        }
    }
    let nx = space.dim();
    // blocks: per s, rows of (restriction, -scalar basis)
    let mut blocks = vec![];
    let mut naux = 0;
    for s in s_set {
        let m = index.quad(s);
        let (tspace, rrows) = restriction_rows(&space, s, k)?;
        let sb = holomorphic_basis(k, m, precision)?;
        let svals: Vec<Vec<Rat>> = sb.iter().map(|f| f.orbit_values(&tspace)).collect();
        blocks.push((rrows, svals, naux));
        naux += sb.len();
    }
    let cols = naux + nx;
    let mut a: Vec<Vec<BigInt>> = vec![];
    for (rrows, svals, off) in &blocks {
        for (i, rr) in rrows.iter().enumerate() {
            let mut row = vec![BigInt::zero(); cols];
            for (j, sv) in svals.iter().enumerate() {
                let v = &sv[i];
                debug_assert!(v.is_integer());
                row[off + j] = -v.to_integer();
            }
            for &(c, x) in rr {
                row[naux + c] = BigInt::from(x);
            }
            a.push(row);
        }
    }
    let ker = kernel_q(&a, cols)?;
    let xs: Vec<Vec<Rat>> = ker.basis.iter().map(|v| v[naux..].to_vec()).collect();
    let rows = if xs.is_empty() { vec![] } else { saturate(&xs, nx)? };
    Ok(JacobiBasis { weight: k, space, s_set: s_set.to_vec(), rows })
}

type Key = (i64, JacobiIndex, usize);

/// Cached `solve_basis` with the default restriction set.
pub fn jacobi_basis(k: i64, index: &JacobiIndex, precision: usize) -> Result<Arc<JacobiBasis>> {
    static CACHE: OnceLock<Mutex<HashMap<Key, Arc<JacobiBasis>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let key = (k, index.clone(), precision);
    if let Some(b) = cache.lock().unwrap().get(&key) {
        return Ok(b.clone());
    }
    let s = choose_s(index, precision, k)?;
    let b = Arc::new(solve_basis(k, index, &s, precision)?);
    cache.lock().unwrap().insert(key, b.clone());
    Ok(b)
}

/// The unique form of weight `k` agreeing with `phi` below its precision,
/// expanded to `precision`. Needs `phi` to be known past the Sturm bound.
pub fn extend_precision(phi: &JacobiExpansion, precision: usize) -> Result<JacobiExpansion> {
    let k = phi.weight.ok_or_else(|| Error::InvalidArgument("extension needs a weight tag".into()))?;
    let need = crate::modp::required_precision(&phi.index, k, k)?;
    if phi.precision < need {
        return Err(Error::InsufficientPrecision { have: phi.precision, need, what: format!("extension of a weight {k} form") });
    }
    if precision <= phi.precision {
        return Ok(phi.truncate(precision));
    }
    let basis = jacobi_basis(k, &phi.index, precision)?;
    let small = FourierClassSpace::new(&phi.index, phi.precision, k);
    let full = basis.expansions();
    let cols: Vec<Vec<Rat>> = full.iter().map(|e| e.orbit_values(&small)).collect();
    if !phi.is_orbit_consistent(&small) {
        return invalid("form is not periodic");
    }
    let x = solve_in_span(&cols, &phi.orbit_values(&small)).ok_or_else(|| Error::LinearAlgebra(format!("form is not in J_{k}")))?;
    let mut out = JacobiExpansion::zero(&phi.index, Some(k), precision);
    for (c, e) in x.iter().zip(&full) {
        out = out.add(&e.scale(c))?;
    }
    Ok(out)
}
