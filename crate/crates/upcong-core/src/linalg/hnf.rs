//! Hermite normal form and lattice saturation over `Z`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::arith::{bigint_mod, Rat};
use crate::error::{Error, Result};
use crate::linalg::fp::FpMatrix;

fn axpy(dst: &mut [BigInt], a: &BigInt, src: &[BigInt]) {
    for (x, y) in dst.iter_mut().zip(src) {
        if !y.is_zero() {
            *x += a * y;
        }
    }
}

/// Row Hermite normal form: nonzero rows only, positive pivots, entries
/// above each pivot reduced into `[0, pivot)`.
///
/// With `modulus = Some(D)` the caller asserts that the row lattice
/// contains `D Z^n`; entries right of the working column are then kept
/// reduced modulo `D`.
pub fn hnf_rows(rows: &[Vec<BigInt>], cols: usize, modulus: Option<&BigInt>) -> Vec<Vec<BigInt>> {
    let mut a: Vec<Vec<BigInt>> = rows.to_vec();
    if let Some(d) = modulus {
        for r in a.iter_mut() {
            reduce_tail(r, 0, modulus);
        }
        for j in 0..cols {
            let mut e = vec![BigInt::zero(); cols];
            e[j] = d.clone();
            a.push(e);
        }
    }
    let m = a.len();
    let mut r = 0;
    for c in 0..cols {
        if r == m {
            break;
        }
        for i in r + 1..m {
            if a[i][c].is_zero() {
                continue;
            }
            if a[r][c].is_zero() {
                a.swap(r, i);
                continue;
            }
            let (x0, y0) = (a[r][c].clone(), a[i][c].clone());
            let e = x0.extended_gcd(&y0);
            let (g, s, t) = (e.gcd, e.x, e.y);
            let u = &x0 / &g;
            let v = &y0 / &g;
            let (ri, rr) = (std::mem::take(&mut a[i]), std::mem::take(&mut a[r]));
            let mut nr: Vec<BigInt> = rr.iter().map(|x| &s * x).collect();
            axpy(&mut nr, &t, &ri);
            let mut ni: Vec<BigInt> = ri.iter().map(|x| &u * x).collect();
            axpy(&mut ni, &(-&v), &rr);
            reduce_tail(&mut nr, c + 1, modulus);
            reduce_tail(&mut ni, c + 1, modulus);
            a[r] = nr;
            a[i] = ni;
        }
        if a[r][c].is_zero() {
            continue;
        }
        if a[r][c].is_negative() {
            for x in a[r].iter_mut() {
                *x = -&*x;
            }
            reduce_tail(&mut a[r], c + 1, modulus);
        }
        let pr = a[r].clone();
        let pv = pr[c].clone();
        for i in 0..r {
            let q = a[i][c].div_floor(&pv);
            if !q.is_zero() {
                axpy(&mut a[i], &(-q), &pr);
                reduce_tail(&mut a[i], c + 1, modulus);
            }
        }
        r += 1;
    }
    a.truncate(r);
    a
}

fn reduce_tail(row: &mut [BigInt], from: usize, modulus: Option<&BigInt>) {
    if let Some(d) = modulus {
        for x in row[from..].iter_mut() {
            if !x.is_zero() {
                *x = x.mod_floor(d);
            }
        }
    }
}

/// Saturation `span_Q(B) ∩ Z^n` of the row lattice of `basis`, returned in
/// Hermite normal form. Rows of `basis` must be linearly independent.
pub fn saturate(basis: &[Vec<Rat>], cols: usize) -> Result<Vec<Vec<BigInt>>> {
    if basis.is_empty() {
        return Ok(vec![]);
    }
    let mut u: Vec<Vec<Rat>> = basis.to_vec();
    let pivots = crate::linalg::exact::rref_q(&mut u);
    if pivots.len() != basis.len() {
        return Err(Error::LinearAlgebra("saturate: rows are dependent".into()));
    }
    let d = pivots.len();
    let nonpiv: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    let den = u
        .iter()
        .flat_map(|r| nonpiv.iter().map(move |&c| r[c].denom().clone()))
        .fold(BigInt::one(), |a, b| a.lcm(&b));
    let lam: Vec<Vec<BigInt>> = if den.is_one() {
        (0..d).map(|i| (0..d).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect()).collect()
    } else {
        // rows (W' mod D | e_i) and (D e_j | 0); keep rows with zero prefix
        let k = nonpiv.len();
        let mut rows: Vec<Vec<BigInt>> = Vec::with_capacity(d + k);
        for (i, r) in u.iter().enumerate() {
            let mut row = Vec::with_capacity(k + d);
            for &c in &nonpiv {
                let w = r[c].numer() * (&den / r[c].denom());
                row.push(w.mod_floor(&den));
            }
            for j in 0..d {
                row.push(if i == j { BigInt::one() } else { BigInt::zero() });
            }
            rows.push(row);
        }
        for j in 0..k {
            let mut row = vec![BigInt::zero(); k + d];
            row[j] = den.clone();
            rows.push(row);
        }
        let h = hnf_rows(&rows, k + d, None);
        let tail: Vec<Vec<BigInt>> = h
            .into_iter()
            .filter(|r| r[..k].iter().all(|x| x.is_zero()))
            .map(|r| r[k..].to_vec())
            .collect();
        if tail.len() != d {
            return Err(Error::LinearAlgebra("saturate: wrong rank".into()));
        }
        hnf_rows(&tail, d, Some(&den))
    };
    let mut out = Vec::with_capacity(d);
    for c in &lam {
        let mut row = vec![Rat::zero(); cols];
        for (ci, ui) in c.iter().zip(&u) {
            if ci.is_zero() {
                continue;
            }
            let cq = Rat::from_integer(ci.clone());
            for (x, y) in row.iter_mut().zip(ui) {
                if !y.is_zero() {
                    *x += &cq * y;
                }
            }
        }
        let mut irow = Vec::with_capacity(cols);
        for x in row {
            if !x.is_integer() {
                return Err(Error::LinearAlgebra("saturate produced a non-integral row".into()));
            }
            irow.push(x.to_integer());
        }
        out.push(irow);
    }
    Ok(hnf_rows(&out, cols, None))
}

/// Saturates the row lattice of `basis` at the single prime `p`.
pub fn p_saturate(basis: &[Vec<BigInt>], p: u64) -> Result<Vec<Vec<BigInt>>> {
    let cols = basis.first().map_or(0, |r| r.len());
    let mut b: Vec<Vec<BigInt>> = basis.to_vec();
    let pb = BigInt::from(p);
    let mut guard = 0usize;
    loop {
        guard += 1;
        if guard > 100_000 {
            return Err(Error::LinearAlgebra("p_saturate did not terminate".into()));
        }
        // left kernel of B mod p = right kernel of B^T mod p
        let mut t = FpMatrix::zeros(p, cols, b.len());
        for (i, row) in b.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                t.set(j, i, bigint_mod(x, p));
            }
        }
        let ker = t.kernel();
        let Some(c) = ker.into_iter().next() else { break };
        let mut comb = vec![BigInt::zero(); cols];
        for (ci, row) in c.iter().zip(&b) {
            if *ci != 0 {
                axpy(&mut comb, &BigInt::from(*ci), row);
            }
        }
        if comb.iter().all(|x| x.is_zero()) {
            return Err(Error::LinearAlgebra("p_saturate: rows are dependent".into()));
        }
        for x in comb.iter_mut() {
            debug_assert!((&*x % &pb).is_zero());
            *x = &*x / &pb;
        }
        let i = c.iter().rposition(|&x| x != 0).unwrap();
        b[i] = comb;
    }
    Ok(b)
}

/// Divides an integer vector by the gcd of its entries and makes the first
/// nonzero entry positive.
pub fn primitive(v: &[BigInt]) -> Vec<BigInt> {
    let g = v.iter().fold(BigInt::zero(), |a, x| a.gcd(x));
    if g.is_zero() {
        return v.to_vec();
    }
    let sign = v.iter().find(|x| !x.is_zero()).is_some_and(|x| x.is_negative());
    v.iter()
        .map(|x| if sign { -(x / &g) } else { x / &g })
        .collect()
}
