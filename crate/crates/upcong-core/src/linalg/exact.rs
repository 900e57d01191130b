//! Exact kernels over `Q` by multi-modular elimination.
//!
//! Each prime gives an echelon form mod p. Primes whose rank or pivot
//! pattern differs from the best seen are discarded, the rest are combined
//! by CRT and lifted by rational reconstruction. A candidate kernel is
//! accepted once the product of the primes on which `A v = 0` holds exceeds
//! twice the height bound for `A v`, which makes the result exact.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::arith::{bigint_mod, inv_mod, large_primes, rat_mod, rational_reconstruct, Rat};
use crate::error::{Error, Result};
use crate::linalg::fp::FpMatrix;

/// Kernel of an integer matrix over `Q`, in the normalised form where each
/// basis vector has a 1 in its own free column and 0 in the other free columns.
#[derive(Clone, Debug)]
pub struct QKernel {
    pub cols: usize,
    pub rank: usize,
    pub pivots: Vec<usize>,
    pub free: Vec<usize>,
    pub basis: Vec<Vec<Rat>>,
}

const MAX_PRIMES: usize = 4000;

fn reduce_matrix(a: &[Vec<BigInt>], cols: usize, p: u64) -> FpMatrix {
    let mut m = FpMatrix::zeros(p, a.len(), cols);
    for (i, row) in a.iter().enumerate() {
        for (j, x) in row.iter().enumerate() {
            if !x.is_zero() {
                m.set(i, j, bigint_mod(x, p));
            }
        }
    }
    m
}

fn bits(x: &BigInt) -> u64 {
    x.bits()
}

/// Kernel of `a` (rows of length `cols`) over `Q`.
pub fn kernel_q(a: &[Vec<BigInt>], cols: usize) -> Result<QKernel> {
    for r in a {
        if r.len() != cols {
            return Err(Error::LinearAlgebra("ragged matrix".into()));
        }
    }
    if a.is_empty() || a.iter().all(|r| r.iter().all(|x| x.is_zero())) {
        let basis = (0..cols)
            .map(|f| (0..cols).map(|j| if j == f { Rat::one() } else { Rat::zero() }).collect())
            .collect();
        return Ok(QKernel { cols, rank: 0, pivots: vec![], free: (0..cols).collect(), basis });
    }
    let max_a_bits = a.iter().flatten().map(bits).max().unwrap_or(0);
    let log_cols = 64 - (cols as u64).leading_zeros() as u64;

    let mut best: Option<Vec<usize>> = None;
    // CRT state over primes agreeing with `best`
    let mut modulus = BigInt::one();
    let mut residues: Vec<Vec<BigInt>> = Vec::new();
    let mut used = 0usize;
    let mut next_attempt = 1usize;
    let mut candidate: Option<(Vec<Vec<Rat>>, Vec<BigInt>)> = None; // (basis, per-vector lcm)
    let mut verified_bits: u64 = 0;

    for (count, p) in large_primes().enumerate() {
        if count > MAX_PRIMES {
            return Err(Error::Resource("multi-modular kernel did not stabilise".into()));
        }
        let mut m = reduce_matrix(a, cols, p);
        let piv = m.rref();

        if let Some((basis, _)) = &candidate {
            // verification phase: check A v = 0 mod p directly
            if Some(&piv) != best.as_ref() {
                continue;
            }
            let am = reduce_matrix(a, cols, p);
            let ok = basis.iter().all(|v| {
                let Some(vm): Option<Vec<u64>> = v.iter().map(|x| rat_mod(x, p)).collect() else {
                    return false;
                };
                (0..am.rows).all(|i| {
                    let mut s: u128 = 0;
                    for j in 0..cols {
                        let aij = am.get(i, j);
                        if aij != 0 && vm[j] != 0 {
                            s = (s + aij as u128 * vm[j] as u128) % p as u128;
                        }
                    }
                    s == 0
                })
            });
            if !ok {
                // the candidate was wrong: restart accumulation from scratch
                candidate = None;
                verified_bits = 0;
                modulus = BigInt::one();
                residues.clear();
                used = 0;
                next_attempt = 1;
                best = None;
                continue;
            }
            verified_bits += 61;
        } else {
            let better = match &best {
                None => true,
                Some(b) => piv.len() > b.len() || (piv.len() == b.len() && piv < *b),
            };
            let same = best.as_ref() == Some(&piv);
            if better && !same {
                best = Some(piv.clone());
                modulus = BigInt::one();
                residues.clear();
                used = 0;
                next_attempt = 1;
            } else if !same {
                continue;
            }
            let pivots = best.as_ref().unwrap();
            let free = free_columns(pivots, cols);
            // residues of R[i][f]
            let pb = BigInt::from(p);
            let minv = inv_mod(bigint_mod(&modulus, p), p).expect("distinct primes");
            if residues.is_empty() {
                residues = free.iter().map(|_| vec![BigInt::zero(); pivots.len()]).collect();
            }
            for (fi, &f) in free.iter().enumerate() {
                for i in 0..pivots.len() {
                    let r = m.get(i, f);
                    let x = &mut residues[fi][i];
                    let xm = bigint_mod(x, p);
                    let delta = ((r as u128 + p as u128 - xm as u128) % p as u128) as u64;
                    let t = ((delta as u128 * minv as u128) % p as u128) as u64;
                    if t != 0 {
                        *x += &modulus * BigInt::from(t);
                    }
                }
            }
            modulus *= &pb;
            used += 1;
            if used < next_attempt {
                continue;
            }
            next_attempt = (used * 2).max(used + 1);
            if let Some(c) = reconstruct(&residues, &modulus, pivots, &free, cols) {
                verified_bits = (modulus.bits()).saturating_sub(1);
                candidate = Some(c);
            } else {
                continue;
            }
        }
        // termination test
        let (basis, lcms) = candidate.as_ref().unwrap();
        let mut max_v_bits = 0;
        for (v, l) in basis.iter().zip(lcms) {
            for x in v {
                if !x.is_zero() {
                    let b = bits(&(x.numer() * (l / x.denom())));
                    max_v_bits = max_v_bits.max(b);
                }
            }
        }
        let height_bits = max_a_bits + max_v_bits + log_cols + 1;
        if verified_bits > height_bits {
            let pivots = best.unwrap();
            let free = free_columns(&pivots, cols);
            return Ok(QKernel {
                cols,
                rank: pivots.len(),
                pivots,
                free,
                basis: candidate.unwrap().0,
            });
        }
    }
    unreachable!()
}

fn free_columns(pivots: &[usize], cols: usize) -> Vec<usize> {
    let mut is_piv = vec![false; cols];
    for &c in pivots {
        is_piv[c] = true;
    }
    (0..cols).filter(|&c| !is_piv[c]).collect()
}

fn reconstruct(
    residues: &[Vec<BigInt>],
    modulus: &BigInt,
    pivots: &[usize],
    free: &[usize],
    cols: usize,
) -> Option<(Vec<Vec<Rat>>, Vec<BigInt>)> {
    let half = modulus >> 1usize;
    let bound = half.sqrt();
    let mut basis = Vec::with_capacity(free.len());
    let mut lcms = Vec::with_capacity(free.len());
    for (fi, &f) in free.iter().enumerate() {
        let mut v = vec![Rat::zero(); cols];
        v[f] = Rat::one();
        let mut den = BigInt::one();
        for (i, &c) in pivots.iter().enumerate() {
            let x = &residues[fi][i];
            if x.is_zero() {
                continue;
            }
            // try the running denominator first
            let mut y = (x * &den).mod_floor(modulus);
            if y > half {
                y -= modulus;
            }
            let q = if y.abs() <= bound {
                Rat::new(y, den.clone())
            } else {
                let q = rational_reconstruct(x, modulus)?;
                den = den.lcm(q.denom());
                if den > bound {
                    return None;
                }
                q
            };
            if !q.denom().gcd(modulus).is_one() {
                return None;
            }
            v[c] = -q;
        }
        let l = v.iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
        basis.push(v);
        lcms.push(l);
    }
    Some((basis, lcms))
}

/// Reduced row echelon form over `Q` by plain fraction arithmetic.
/// Intended for small systems.
pub fn rref_q(rows: &mut Vec<Vec<Rat>>) -> Vec<usize> {
    let m = rows.len();
    let n = rows.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..n {
        if r == m {
            break;
        }
        let Some(piv) = (r..m).find(|&i| !rows[i][c].is_zero()) else { continue };
        rows.swap(piv, r);
        let inv = rows[r][c].recip();
        for x in rows[r].iter_mut() {
            *x = &*x * &inv;
        }
        for i in 0..m {
            if i != r && !rows[i][c].is_zero() {
                let f = rows[i][c].clone();
                let (lo, hi) = if i < r { rows.split_at_mut(r) } else { rows.split_at_mut(i) };
                let (ri, rr) = if i < r { (&mut lo[i], &hi[0]) } else { (&mut hi[0], &lo[r]) };
                for (x, y) in ri.iter_mut().zip(rr.iter()) {
                    if !y.is_zero() {
                        *x -= &f * y;
                    }
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    rows.truncate(r);
    pivots
}

/// Coordinates of `v` in the row span of `basis` over `Q`, if it lies there.
pub fn solve_in_span(basis: &[Vec<Rat>], v: &[Rat]) -> Option<Vec<Rat>> {
    let d = basis.len();
    let n = v.len();
    // columns: d coefficients then the target; rows: one per coordinate
    let mut sys: Vec<Vec<Rat>> = (0..n)
        .map(|j| {
            let mut row: Vec<Rat> = basis.iter().map(|b| b[j].clone()).collect();
            row.push(v[j].clone());
            row
        })
        .collect();
    let piv = rref_q(&mut sys);
    if piv.contains(&d) {
        return None;
    }
    let mut x = vec![Rat::zero(); d];
    for (i, &c) in piv.iter().enumerate() {
        x[c] = sys[i][d].clone();
    }
    Some(x)
}
