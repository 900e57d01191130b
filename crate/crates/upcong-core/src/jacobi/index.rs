use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{isqrt_i64, Rat};
use crate::error::{invalid, Error, Result};
use crate::linalg::hnf::hnf_rows;

/// Index `M` of a Jacobi form, stored as the even symmetric positive
/// definite matrix `2M`.
///
/// The discriminant `4 det(M) n - M^#[r]` is returned scaled by `2^shift`
/// so that it is always an integer; `shift` is zero for every index whose
/// discriminant form is integral (all `I_l`, every `l <= 2`).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<i64>>", into = "Vec<Vec<i64>>")]
pub struct JacobiIndex {
    l: usize,
    twice: Vec<i64>,
    det2: i64,
    adj2: Vec<i64>,
    // D * 2^shift = (2 det(2M) n - adj(2M)[r]) / 2^(l-1-shift)
    shift: u32,
    hnf: Vec<Vec<i64>>,
}

impl TryFrom<Vec<Vec<i64>>> for JacobiIndex {
    type Error = Error;
    fn try_from(rows: Vec<Vec<i64>>) -> Result<Self> {
        JacobiIndex::from_twice(&rows)
    }
}

impl From<JacobiIndex> for Vec<Vec<i64>> {
    fn from(m: JacobiIndex) -> Self {
        m.twice_rows()
    }
}

fn det_bigint(a: &[Vec<BigInt>]) -> BigInt {
    // fraction-free Bareiss
    let n = a.len();
    if n == 0 {
        return BigInt::from(1);
    }
    let mut m: Vec<Vec<BigInt>> = a.to_vec();
    let mut sign = 1i32;
    let mut prev = BigInt::from(1);
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            let Some(s) = (k + 1..n).find(|&i| !m[i][k].is_zero()) else { return BigInt::zero() };
            m.swap(k, s);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&m[i][j] * &m[k][k] - &m[i][k] * &m[k][j]) / &prev;
                m[i][j] = v;
            }
        }
        prev = m[k][k].clone();
    }
    let d = m[n - 1][n - 1].clone();
    if sign < 0 { -d } else { d }
}

pub fn det_i64(rows: &[Vec<i64>]) -> BigInt {
    let b: Vec<Vec<BigInt>> = rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
    det_bigint(&b)
}

impl JacobiIndex {
    pub fn from_twice(rows: &[Vec<i64>]) -> Result<Self> {
        let l = rows.len();
        if l == 0 {
            return invalid("index must be at least 1x1");
        }
        for (i, r) in rows.iter().enumerate() {
            if r.len() != l {
                return invalid("index matrix must be square");
            }
            if r[i] % 2 != 0 {
                return invalid("2M must have even diagonal");
            }
            for j in 0..l {
                if rows[j][i] != r[j] {
                    return invalid("2M must be symmetric");
                }
            }
        }
        for k in 1..=l {
            let minor: Vec<Vec<i64>> = rows[..k].iter().map(|r| r[..k].to_vec()).collect();
            if det_i64(&minor) <= BigInt::zero() {
                return invalid("2M must be positive definite");
            }
        }
        let det2 = det_i64(rows).to_i64().ok_or_else(|| Error::Resource("det(2M) too large".into()))?;
        let mut adj2 = vec![0i64; l * l];
        for i in 0..l {
            for j in 0..l {
                let minor: Vec<Vec<i64>> = rows
                    .iter()
                    .enumerate()
                    .filter(|(a, _)| *a != j)
                    .map(|(_, r)| r.iter().enumerate().filter(|(b, _)| *b != i).map(|(_, &x)| x).collect())
                    .collect();
                let m = if l == 1 { BigInt::from(1) } else { det_i64(&minor) };
                let s = if (i + j) % 2 == 0 { 1 } else { -1 };
                adj2[i * l + j] = s * m.to_i64().ok_or_else(|| Error::Resource("adjugate too large".into()))?;
            }
        }
        let mut g: i64 = 2 * det2;
        for i in 0..l {
            for j in 0..l {
                let c = if i == j { adj2[i * l + j] } else { 2 * adj2[i * l + j] };
                g = num_integer::gcd(g, c);
            }
        }
        let v2 = g.trailing_zeros().min(l as u32 - 1);
        let shift = l as u32 - 1 - v2;
        let h = hnf_rows(
            &rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect::<Vec<_>>(),
            l,
            None,
        );
        let hnf = h.iter().map(|r| r.iter().map(|x| x.to_i64().unwrap()).collect()).collect();
        Ok(JacobiIndex { l, twice: rows.concat(), det2, adj2, shift, hnf })
    }

    /// Scalar index `m` (so `2M = (2m)`).
    pub fn scalar(m: i64) -> Result<Self> {
        if m < 1 {
            return invalid("scalar index must be positive");
        }
        Self::from_twice(&[vec![2 * m]])
    }

    pub fn identity(l: usize) -> Self {
        let rows: Vec<Vec<i64>> = (0..l).map(|i| (0..l).map(|j| if i == j { 2 } else { 0 }).collect()).collect();
        Self::from_twice(&rows).expect("2 I is a valid index")
    }

    /// Parses `I1`, `I2`, `I3`, ... or returns `None`.
    pub fn named(name: &str) -> Option<Self> {
        let l: usize = name.strip_prefix('I')?.parse().ok()?;
        (l >= 1).then(|| Self::identity(l))
    }

    pub fn rank(&self) -> usize {
        self.l
    }

    pub fn twice_entry(&self, i: usize, j: usize) -> i64 {
        self.twice[i * self.l + j]
    }

    pub fn twice_rows(&self) -> Vec<Vec<i64>> {
        self.twice.chunks(self.l).map(|c| c.to_vec()).collect()
    }

    /// `det(2M)`.
    pub fn det_twice(&self) -> i64 {
        self.det2
    }

    pub fn shift(&self) -> u32 {
        self.shift
    }

    /// `m` for a rank one index.
    pub fn scalar_value(&self) -> Option<i64> {
        (self.l == 1).then(|| self.twice[0] / 2)
    }

    /// `adj(2M)[r] = 2^(l-1) M^#[r]`.
    pub fn adj_norm(&self, r: &[i64]) -> i64 {
        let l = self.l;
        let mut s = 0;
        for i in 0..l {
            if r[i] == 0 {
                continue;
            }
            for j in 0..l {
                s += self.adj2[i * l + j] * r[i] * r[j];
            }
        }
        s
    }

    /// `M[x] = x^T M x`.
    pub fn quad(&self, x: &[i64]) -> i64 {
        let l = self.l;
        let mut s = 0;
        for i in 0..l {
            for j in 0..l {
                s += self.twice[i * l + j] * x[i] * x[j];
            }
        }
        s / 2
    }

    /// `2M x`.
    pub fn apply_twice(&self, x: &[i64]) -> Vec<i64> {
        let l = self.l;
        (0..l).map(|i| (0..l).map(|j| self.twice[i * l + j] * x[j]).sum()).collect()
    }

    /// Integer discriminant `2^shift (4 det(M) n - M^#[r])`.
    pub fn disc(&self, n: i64, r: &[i64]) -> i64 {
        let num = 2 * self.det2 * n - self.adj_norm(r);
        let drop = self.l as u32 - 1 - self.shift;
        debug_assert_eq!(num % (1 << drop), 0);
        num >> drop
    }

    /// The exact rational discriminant `4 det(M) n - M^#[r]`.
    pub fn disc_rational(&self, n: i64, r: &[i64]) -> Rat {
        Rat::new(BigInt::from(self.disc(n, r)), BigInt::from(1i64 << self.shift))
    }

    /// Canonical representative of `r` modulo `2M Z^l`.
    pub fn reduce_class(&self, r: &[i64]) -> Vec<i64> {
        let mut v = r.to_vec();
        for (i, h) in self.hnf.iter().enumerate() {
            let q = v[i].div_euclid(h[i]);
            if q != 0 {
                for j in 0..self.l {
                    v[j] -= q * h[j];
                }
            }
        }
        v
    }

    /// Class key of `r` up to sign.
    pub fn signed_class(&self, r: &[i64]) -> Vec<i64> {
        let a = self.reduce_class(r);
        let neg: Vec<i64> = r.iter().map(|x| -x).collect();
        let b = self.reduce_class(&neg);
        a.min(b)
    }

    /// Largest `|r_i|` with `D(n, r) >= 0`.
    pub fn r_bound(&self, n: i64, i: usize) -> i64 {
        isqrt_i64(2 * n * self.twice[i * self.l + i])
    }

    /// All `(n, r)` with `0 <= n < precision` and `D(n, r) >= 0`, in
    /// lexicographic order.
    pub fn support(&self, precision: usize) -> Vec<(i64, Vec<i64>)> {
        let mut out = Vec::new();
        for n in 0..precision as i64 {
            let bounds: Vec<i64> = (0..self.l).map(|i| self.r_bound(n, i)).collect();
            for r in BoxPoints::new(&bounds) {
                if self.disc(n, &r) >= 0 {
                    out.push((n, r));
                }
            }
        }
        out
    }

    /// One representative per class of `Z^l / 2M Z^l`: minimal `M^#[r]`,
    /// ties broken towards the lexicographically largest vector. Sorted
    /// lexicographically.
    pub fn representatives(&self) -> Vec<Vec<i64>> {
        // norms of the parallelepiped representatives bound the search
        let diag: Vec<i64> = self.hnf.iter().enumerate().map(|(i, h)| h[i]).collect();
        let mut radius = 0;
        for v in BoxPoints::new(&diag.iter().map(|d| d - 1).collect::<Vec<_>>()) {
            if v.iter().all(|&x| x >= 0) {
                radius = radius.max(self.adj_norm(&v));
            }
        }
        // adj(2M)[r] <= R gives r_i^2 <= R (2M)_ii / det(2M)
        let bounds: Vec<i64> = (0..self.l)
            .map(|i| isqrt_i64(radius * self.twice[i * self.l + i] / self.det2) + 1)
            .collect();
        let mut best: BTreeMap<Vec<i64>, (i64, Vec<i64>)> = BTreeMap::new();
        for r in BoxPoints::new(&bounds) {
            let nrm = self.adj_norm(&r);
            if nrm > radius {
                continue;
            }
            let key = self.reduce_class(&r);
            let better = match best.get(&key) {
                None => true,
                Some((bn, br)) => nrm < *bn || (nrm == *bn && r.cmp(br) == Ordering::Greater),
            };
            if better {
                best.insert(key, (nrm, r));
            }
        }
        debug_assert_eq!(best.len() as i64, self.det2);
        let mut reps: Vec<Vec<i64>> = best.into_values().map(|(_, r)| r).collect();
        reps.sort();
        reps
    }

    /// Index of the pullback `M[s] = s^T M s` for `s in Z^l`.
    pub fn restricted(&self, s: &[i64]) -> Result<JacobiIndex> {
        if s.len() != self.l {
            return Err(Error::IndexMismatch(format!("restriction vector has length {}, index rank {}", s.len(), self.l)));
        }
        JacobiIndex::scalar(self.quad(s))
    }

    /// `2M ⊕ 2M'` block sum.
    pub fn add(&self, other: &JacobiIndex) -> Result<JacobiIndex> {
        if self.l != other.l {
            return Err(Error::IndexMismatch("indices of different rank".into()));
        }
        let rows: Vec<Vec<i64>> = (0..self.l)
            .map(|i| (0..self.l).map(|j| self.twice_entry(i, j) + other.twice_entry(i, j)).collect())
            .collect();
        JacobiIndex::from_twice(&rows)
    }
}

/// Integer points of the box `prod [-b_i, b_i]` in lexicographic order.
pub struct BoxPoints {
    bounds: Vec<i64>,
    next: Option<Vec<i64>>,
}

impl BoxPoints {
    pub fn new(bounds: &[i64]) -> Self {
        let next = if bounds.iter().all(|&b| b >= 0) {
            Some(bounds.iter().map(|b| -b).collect())
        } else {
            None
        };
        BoxPoints { bounds: bounds.to_vec(), next }
    }
}

impl Iterator for BoxPoints {
    type Item = Vec<i64>;
    fn next(&mut self) -> Option<Vec<i64>> {
        let cur = self.next.take()?;
        let mut nxt = cur.clone();
        let mut i = nxt.len();
        while i > 0 {
            i -= 1;
            if nxt[i] < self.bounds[i] {
                nxt[i] += 1;
                for j in i + 1..nxt.len() {
                    nxt[j] = -self.bounds[j];
                }
                self.next = Some(nxt);
                return Some(cur);
            }
        }
        Some(cur)
    }
}
