use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use serde::Serialize;
use upcong_core::fixtures::schottky_matrix;
use upcong_core::Result;

use crate::lattice::{d16_plus, e8, theta_coefficient, Gram};
use crate::twice::TwiceT;

#[derive(Clone, Debug, Serialize)]
pub struct SchottkyClass {
    pub twice_t: Vec<Vec<i64>>,
    pub det_twice_t: i64,
    pub e8_e8: u64,
    pub d16_plus: u64,
    pub difference: i64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SchottkyReport {
    pub p: u64,
    pub target: Vec<Vec<i64>>,
    pub classes: Vec<SchottkyClass>,
    pub content: String,
    /// Normalized coefficient at the target.
    pub value: String,
    pub expected: i64,
    pub kept_by_u_p: bool,
    pub nonzero_mod_p: bool,
}

impl SchottkyReport {
    pub fn pass(&self) -> bool {
        self.value == self.expected.to_string()
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = vec![];
    for p in permutations(n - 1) {
        for pos in 0..n {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// Smallest image of `2T` under signed permutations, a cheap class key.
fn signed_perm_key(t: &[Vec<i64>], perms: &[Vec<usize>]) -> Vec<Vec<i64>> {
    let g = t.len();
    let mut best: Option<Vec<Vec<i64>>> = None;
    for perm in perms {
        for signs in 0u32..(1 << g) {
            let s = |i: usize| if signs >> i & 1 == 1 { -1 } else { 1 };
            let m: Vec<Vec<i64>> = (0..g).map(|i| (0..g).map(|j| s(i) * s(j) * t[perm[i]][perm[j]]).collect()).collect();
            if best.as_ref().is_none_or(|b| m < *b) {
                best = Some(m);
            }
        }
    }
    best.unwrap_or_default()
}

/// Positive definite `2T` of degree `g` with diagonal 2: the root-lattice
/// indices of trace `g`.
pub fn diagonal_two_indices(g: usize) -> Vec<TwiceT> {
    let pairs: Vec<(usize, usize)> = (0..g).flat_map(|i| (i + 1..g).map(move |j| (i, j))).collect();
    let total = 3usize.pow(pairs.len() as u32);
    let mut out = vec![];
    for mut code in 0..total {
        let mut rows = vec![vec![0i64; g]; g];
        for i in 0..g {
            rows[i][i] = 2;
        }
        for &(i, j) in &pairs {
            let v = (code % 3) as i64 - 1;
            code /= 3;
            rows[i][j] = v;
            rows[j][i] = v;
        }
        if let Ok(t) = TwiceT::new(rows) {
            if t.is_definite() {
                out.push(t);
            }
        }
    }
    out
}

/// Compares the degree-4 theta series of `E8 + E8` and `D16+` on every
/// definite `2T` of trace 8 (the only nondegenerate indices up to that
/// trace), normalizes the difference to content 1 and reads it off at the
/// fixture matrix.
pub fn schottky_check(p: u64) -> Result<SchottkyReport> {
    let (target_rows, expected) = schottky_matrix()?;
    let target = TwiceT::new(target_rows.clone())?;
    let e8e8 = e8().direct_sum(&e8());
    let d16 = d16_plus()?;
    let perms = permutations(4);
    let mut cache: BTreeMap<Vec<Vec<i64>>, (u64, u64)> = BTreeMap::new();
    let count = |g: &Gram, t: &[Vec<i64>]| theta_coefficient(g, &TwiceT::from_gram(t.to_vec()));
    for t in diagonal_two_indices(4) {
        let key = signed_perm_key(t.rows(), &perms);
        if !cache.contains_key(&key) {
            let v = (count(&e8e8, &key)?, count(&d16, &key)?);
            cache.insert(key, v);
        }
    }
    let classes: Vec<SchottkyClass> = cache
        .iter()
        .map(|(k, (a, b))| SchottkyClass {
            twice_t: k.clone(),
            det_twice_t: upcong_core::jacobi::index::det_i64(k).try_into().unwrap_or(i64::MAX),
            e8_e8: *a,
            d16_plus: *b,
            difference: *a as i64 - *b as i64,
        })
        .collect();
    let content = classes.iter().fold(BigInt::zero(), |acc, c| acc.gcd(&BigInt::from(c.difference)));
    let (a, b) = cache[&signed_perm_key(target.rows(), &perms)];
    let diff = BigInt::from(a as i64 - b as i64);
    let value = if content.is_zero() { BigInt::zero() } else { &diff / &content };
    let pb = BigInt::from(p);
    Ok(SchottkyReport {
        p,
        target: target_rows,
        classes,
        content: content.to_string(),
        value: value.to_string(),
        expected,
        kept_by_u_p: (target.det() % &pb).is_zero(),
        nonzero_mod_p: !(value.abs() % &pb).is_zero(),
    })
}
