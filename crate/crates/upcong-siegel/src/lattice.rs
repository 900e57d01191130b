use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::One;
use rayon::prelude::*;
use upcong_core::arith::Rat;
use upcong_core::jacobi::index::det_i64;
use upcong_core::{Error, Result};

use crate::expansion::SiegelExpansion;
use crate::twice::TwiceT;

/// Largest number of short vectors (and of enumerated tuples) before a
/// computation gives up with a resource error.
pub const DEFAULT_BUDGET: u64 = 50_000_000;

/// Gram matrix of an even positive definite lattice.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Gram(Vec<Vec<i64>>);

impl Gram {
    pub fn new(rows: Vec<Vec<i64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidArgument("Gram matrix must be nonempty and square".into()));
        }
        for i in 0..n {
            if rows[i][i] % 2 != 0 {
                return Err(Error::InvalidArgument(format!("lattice is not even: diagonal entry {}", rows[i][i])));
            }
            for j in 0..i {
                if rows[i][j] != rows[j][i] {
                    return Err(Error::InvalidArgument("Gram matrix is not symmetric".into()));
                }
            }
        }
        for s in 1..=n {
            let sub: Vec<Vec<i64>> = rows[..s].iter().map(|r| r[..s].to_vec()).collect();
            if det_i64(&sub) <= BigInt::from(0) {
                return Err(Error::InvalidArgument("Gram matrix is not positive definite".into()));
            }
        }
        Ok(Gram(rows))
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let rows = v.get("gram").cloned().ok_or_else(|| Error::Parse("missing gram".into()))?;
        let rows: Vec<Vec<i64>> = serde_json::from_value(rows).map_err(|e| Error::Parse(e.to_string()))?;
        Gram::new(rows)
    }

    pub fn rank(&self) -> usize {
        self.0.len()
    }

    pub fn rows(&self) -> &[Vec<i64>] {
        &self.0
    }

    pub fn det(&self) -> BigInt {
        det_i64(&self.0)
    }

    pub fn norm(&self, x: &[i64]) -> i64 {
        inner(&self.apply(x), x)
    }

    pub fn apply(&self, x: &[i64]) -> Vec<i64> {
        self.0.iter().map(|r| inner(r, x)).collect()
    }

    /// Orthogonal direct sum.
    pub fn direct_sum(&self, other: &Gram) -> Gram {
        let (a, b) = (self.rank(), other.rank());
        let mut rows = vec![vec![0; a + b]; a + b];
        for i in 0..a {
            rows[i][..a].copy_from_slice(&self.0[i]);
        }
        for i in 0..b {
            rows[a + i][a..].copy_from_slice(&other.0[i]);
        }
        Gram(rows)
    }
}

fn inner(x: &[i64], y: &[i64]) -> i64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// The `E_8` root lattice (Cartan matrix).
pub fn e8() -> Gram {
    let mut rows = vec![vec![0i64; 8]; 8];
    // Bourbaki labels 1-3-4-5-6-7-8 in a chain, 2 attached to 4
    let edges = [(1, 3), (3, 4), (4, 5), (5, 6), (6, 7), (7, 8), (2, 4)];
    for i in 0..8 {
        rows[i][i] = 2;
    }
    for (a, b) in edges {
        rows[a - 1][b - 1] = -1;
        rows[b - 1][a - 1] = -1;
    }
    Gram(rows)
}

/// `D_16^+`: `D_16` together with the glue vector `h = (1/2, ..., 1/2)`.
/// The basis is `h` and the simple roots of `D_16` other than `e_1 - e_2`,
/// which has coefficient `1/2` in `h`.
pub fn d16_plus() -> Result<Gram> {
    // coordinates scaled by 2 to stay integral
    let n = 16;
    let mut basis: Vec<Vec<i64>> = vec![vec![1; n]];
    for i in 1..n - 1 {
        let mut v = vec![0; n];
        v[i] = 2;
        v[i + 1] = -2;
        basis.push(v);
    }
    let mut v = vec![0; n];
    v[n - 2] = 2;
    v[n - 1] = 2;
    basis.push(v);
    let mut rows = vec![vec![0i64; n]; n];
    for i in 0..n {
        for j in 0..n {
            let s = inner(&basis[i], &basis[j]);
            if s % 4 != 0 {
                return Err(Error::LinearAlgebra("D16+ Gram is not integral".into()));
            }
            rows[i][j] = s / 4;
        }
    }
    let g = Gram::new(rows)?;
    if !g.det().is_one() {
        return Err(Error::LinearAlgebra("D16+ Gram is not unimodular".into()));
    }
    Ok(g)
}

fn overflow() -> Error {
    Error::Resource("short vector enumeration overflowed i128".into())
}

/// All `x` with `x^t G x <= bound`, including zero, in a fixed order.
///
/// Exact Fincke-Pohst: with leading minors `M_k` and fraction-free
/// elimination rows `B`, `x^t G x = sum_k s_k^2 / (M_k M_{k-1})` where
/// `s_k = M_k x_k + sum_{j>k} B_kj x_j`.
pub fn short_vectors(gram: &Gram, bound: i64, budget: u64) -> Result<Vec<Vec<i64>>> {
    let n = gram.rank();
    // Bareiss
    let mut a: Vec<Vec<i128>> = gram.0.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let mut rowsb: Vec<Vec<i128>> = vec![];
    let mut minors = vec![1i128];
    let mut prev = 1i128;
    for k in 0..n {
        rowsb.push(a[k].clone());
        let piv = a[k][k];
        minors.push(piv);
        for i in k + 1..n {
            for j in k + 1..n {
                let v = piv.checked_mul(a[i][j]).and_then(|x| x.checked_sub(a[i][k].checked_mul(a[k][j])?)).ok_or_else(overflow)?;
                a[i][j] = v / prev;
            }
            a[i][k] = 0;
        }
        prev = piv;
    }
    let q: Vec<i128> = (0..n).map(|k| minors[k + 1].checked_mul(minors[k]).ok_or_else(overflow)).collect::<Result<_>>()?;
    let mut p = 1i128;
    for &qk in &q {
        p = p.checked_div(p.gcd(&qk)).and_then(|x| x.checked_mul(qk)).ok_or_else(overflow)?;
    }
    let w: Vec<i128> = q.iter().map(|qk| p / qk).collect();
    let budget_r = p.checked_mul(bound.max(0) as i128).ok_or_else(overflow)?;

    let mut out = vec![];
    let mut x = vec![0i64; n];
    struct Ctx<'a> {
        b: &'a [Vec<i128>],
        m: &'a [i128],
        w: &'a [i128],
        n: usize,
        cap: u64,
    }
    fn rec(ctx: &Ctx, k: usize, rem: i128, x: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) -> Result<()> {
        if out.len() as u64 > ctx.cap {
            return Err(Error::Resource(format!("more than {} short vectors", ctx.cap)));
        }
        let mut c = 0i128;
        for j in k + 1..ctx.n {
            c = c.checked_add(ctx.b[k][j].checked_mul(x[j] as i128).ok_or_else(overflow)?).ok_or_else(overflow)?;
        }
        let t = (rem / ctx.w[k]).isqrt();
        let mk = ctx.m[k + 1];
        let lo = -Integer::div_floor(&(t + c), &mk);
        let hi = Integer::div_floor(&(t - c), &mk);
        for v in lo..=hi {
            x[k] = v as i64;
            let s = mk * v + c;
            let r2 = rem - ctx.w[k] * s * s;
            if k == 0 {
                out.push(x.clone());
            } else {
                rec(ctx, k - 1, r2, x, out)?;
            }
        }
        x[k] = 0;
        Ok(())
    }
    let ctx = Ctx { b: &rowsb, m: &minors, w: &w, n, cap: budget };
    rec(&ctx, n - 1, budget_r, &mut x, &mut out)?;
    Ok(out)
}

/// Lattice vectors bucketed by norm, with `Gv` cached for inner products.
struct VectorTable {
    by_norm: BTreeMap<i64, Vec<usize>>,
    vecs: Vec<Vec<i64>>,
    images: Vec<Vec<i64>>,
}

impl VectorTable {
    fn new(gram: &Gram, bound: i64, budget: u64) -> Result<Self> {
        let vecs = short_vectors(gram, bound, budget)?;
        let images: Vec<Vec<i64>> = vecs.iter().map(|v| gram.apply(v)).collect();
        let mut by_norm: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
        for (i, v) in vecs.iter().enumerate() {
            by_norm.entry(inner(&images[i], v)).or_default().push(i);
        }
        Ok(VectorTable { by_norm, vecs, images })
    }

    fn ip(&self, a: usize, b: usize) -> i64 {
        inner(&self.images[a], &self.vecs[b])
    }

    /// Position of `-v` for every `v`.
    fn negation(&self) -> Vec<usize> {
        let pos: std::collections::HashMap<&[i64], usize> = self.vecs.iter().enumerate().map(|(i, v)| (v.as_slice(), i)).collect();
        self.vecs.iter().map(|v| pos[v.iter().map(|x| -x).collect::<Vec<_>>().as_slice()]).collect()
    }

    fn of_norm(&self, n: i64) -> &[usize] {
        self.by_norm.get(&n).map(|v| v.as_slice()).unwrap_or(&[])
    }
}

/// Number of vectors of each norm `<= bound`.
pub fn norm_counts(gram: &Gram, bound: i64) -> Result<BTreeMap<i64, u64>> {
    let t = VectorTable::new(gram, bound, DEFAULT_BUDGET)?;
    Ok(t.by_norm.iter().map(|(n, v)| (*n, v.len() as u64)).collect())
}

/// `#{(v_1, ..., v_g) : <v_i, v_j> = (2T)_ij}`.
pub fn theta_coefficient(gram: &Gram, twice_t: &TwiceT) -> Result<u64> {
    let g = twice_t.degree();
    let max_norm = (0..g).map(|i| twice_t.entry(i, i)).max().unwrap_or(0);
    let table = VectorTable::new(gram, max_norm, DEFAULT_BUDGET)?;
    count_tuples(&table, twice_t)
}

/// Fixed-width bitset over the candidates of one position.
type Bits = Vec<u64>;

fn and_count(a: &[u64], b: &[u64]) -> u64 {
    a.iter().zip(b).map(|(x, y)| (x & y).count_ones() as u64).sum()
}

fn ones(b: &[u64]) -> impl Iterator<Item = usize> + '_ {
    b.iter().enumerate().flat_map(|(w, &word)| {
        let mut x = word;
        std::iter::from_fn(move || {
            if x == 0 {
                return None;
            }
            let t = x.trailing_zeros() as usize;
            x &= x - 1;
            Some(w * 64 + t)
        })
    })
}

/// Largest neighbour table (in bits) built by `count_tuples`.
const NEIGHBOUR_BITS: usize = 1 << 31;

fn count_tuples(table: &VectorTable, t: &TwiceT) -> Result<u64> {
    let g = t.degree();
    let cands: Vec<&[usize]> = (0..g).map(|i| table.of_norm(t.entry(i, i))).collect();
    if g == 1 {
        return Ok(cands[0].len() as u64);
    }
    if cands.iter().any(|c| c.is_empty()) {
        return Ok(0);
    }
    let words: Vec<usize> = cands.iter().map(|c| c.len().div_ceil(64)).collect();
    let size: usize = (0..g).flat_map(|d| (d + 1..g).map(move |i| (d, i))).map(|(d, i)| cands[d].len() * words[i] * 64).sum();
    if size > NEIGHBOUR_BITS {
        return Err(Error::Resource(format!("neighbour tables of {size} bits exceed the budget")));
    }
    // nbr[d][i][a]: candidates b of position i with <cands[d][a], cands[i][b]> = (2T)_di
    let mut nbr: Vec<Vec<Vec<Bits>>> = vec![vec![vec![]; g]; g];
    for d in 0..g {
        for i in d + 1..g {
            let want = t.entry(d, i);
            nbr[d][i] = cands[d]
                .par_iter()
                .map(|&v| {
                    let mut bits = vec![0u64; words[i]];
                    for (b, &w) in cands[i].iter().enumerate() {
                        if table.ip(v, w) == want {
                            bits[b / 64] |= 1 << (b % 64);
                        }
                    }
                    bits
                })
                .collect();
        }
    }
    fn rec(nbr: &[Vec<Vec<Bits>>], d: usize, allowed: &[Bits]) -> u64 {
        let g = nbr.len();
        let mut total = 0;
        for a in ones(&allowed[0]) {
            if d + 2 == g {
                total += and_count(&allowed[1], &nbr[d][d + 1][a]);
                continue;
            }
            let next: Vec<Bits> =
                (d + 1..g).map(|i| allowed[i - d].iter().zip(&nbr[d][i][a]).map(|(x, y)| x & y).collect()).collect();
            if next.iter().any(|b| b.iter().all(|&x| x == 0)) {
                continue;
            }
            total += rec(nbr, d + 1, &next);
        }
        total
    }
    let full: Vec<Bits> = (0..g)
        .map(|i| {
            let mut b = vec![!0u64; words[i]];
            let extra = words[i] * 64 - cands[i].len();
            if extra > 0 {
                b[words[i] - 1] >>= extra;
            }
            b
        })
        .collect();
    // v and -v contribute equally: count one of each pair and double
    let neg = table.negation();
    let firsts: Vec<(usize, u64)> = cands[0]
        .iter()
        .enumerate()
        .filter_map(|(a, &v)| match neg[v] {
            w if w == v => Some((a, 1)),
            w if w > v => Some((a, 2)),
            _ => None,
        })
        .collect();
    Ok(firsts
        .par_iter()
        .map(|&(a, mult)| {
            let mut one = vec![0u64; words[0]];
            one[a / 64] |= 1 << (a % 64);
            let mut allowed = full.clone();
            allowed[0] = one;
            mult * rec(&nbr, 0, &allowed)
        })
        .sum())
}

/// Degree-`g` theta series of the lattice: every `T` with `tr(T) <= trace_bound`.
pub fn lattice_theta(gram: &Gram, g: usize, trace_bound: i64, budget: u64) -> Result<SiegelExpansion> {
    if g == 0 {
        return Err(Error::InvalidArgument("degree must be positive".into()));
    }
    let bound = 2 * trace_bound;
    let table = VectorTable::new(gram, bound, budget)?;
    let order: Vec<usize> = table.by_norm.values().flatten().copied().collect();
    // tuples counted with the norm budget; guard against runaway sizes
    let mut estimate: u64 = 0;
    let norms: Vec<(i64, u64)> = table.by_norm.iter().map(|(n, v)| (*n, v.len() as u64)).collect();
    {
        let mut ways = vec![0u64; bound as usize / 2 + 1];
        ways[0] = 1;
        for _ in 0..g {
            let mut nxt = vec![0u64; ways.len()];
            for (s, &c) in ways.iter().enumerate() {
                if c == 0 {
                    continue;
                }
                for &(n, cnt) in &norms {
                    let t = s + n as usize / 2;
                    if t < nxt.len() {
                        nxt[t] = nxt[t].saturating_add(c.saturating_mul(cnt));
                    }
                }
            }
            ways = nxt;
        }
        for w in ways {
            estimate = estimate.saturating_add(w);
        }
    }
    if estimate > budget {
        return Err(Error::Resource(format!("{estimate} vector tuples exceed the budget {budget}")));
    }
    fn rec(table: &VectorTable, order: &[usize], g: usize, rem: i64, chosen: &mut Vec<usize>, acc: &mut BTreeMap<Vec<i64>, u64>) {
        if chosen.len() == g {
            let key: Vec<i64> = chosen.iter().flat_map(|&a| chosen.iter().map(move |&b| (a, b))).map(|(a, b)| table.ip(a, b)).collect();
            *acc.entry(key).or_insert(0) += 1;
            return;
        }
        for &v in order {
            let nv = table.ip(v, v);
            if nv > rem {
                break;
            }
            chosen.push(v);
            rec(table, order, g, rem - nv, chosen, acc);
            chosen.pop();
        }
    }
    let merged = order
        .par_iter()
        .filter(|&&v| table.ip(v, v) <= bound)
        .map(|&v| {
            let mut acc = BTreeMap::new();
            let mut chosen = vec![v];
            rec(&table, &order, g, bound - table.ip(v, v), &mut chosen, &mut acc);
            acc
        })
        .reduce(BTreeMap::new, |mut a, b| {
            for (k, c) in b {
                *a.entry(k).or_insert(0) += c;
            }
            a
        });
    let coeffs: BTreeMap<TwiceT, Rat> = merged
        .into_iter()
        .map(|(k, c)| {
            let rows: Vec<Vec<i64>> = k.chunks(g).map(|r| r.to_vec()).collect();
            (TwiceT::from_gram(rows), Rat::from_integer(BigInt::from(c)))
        })
        .collect();
    SiegelExpansion::from_map(g, Some(gram.rank() as i64 / 2), trace_bound, coeffs)
}
