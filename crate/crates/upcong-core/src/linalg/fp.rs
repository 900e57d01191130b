//! Dense matrices over `F_p` for primes below `2^63`.

use crate::arith::{inv_mod, mul_mod};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FpMatrix {
    pub p: u64,
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<u64>,
}

impl FpMatrix {
    pub fn zeros(p: u64, rows: usize, cols: usize) -> Self {
        FpMatrix { p, rows, cols, data: vec![0; rows * cols] }
    }

    pub fn from_rows(p: u64, cols: usize, rows: &[Vec<u64>]) -> Self {
        let mut m = Self::zeros(p, rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), cols);
            for (j, &x) in r.iter().enumerate() {
                m.data[i * cols + j] = x % p;
            }
        }
        m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: u64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[u64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<u64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    /// Reduced row echelon form in place; returns the pivot columns.
    /// Rows beyond the rank are zero afterwards.
    pub fn rref(&mut self) -> Vec<usize> {
        let p = self.p;
        let (m, n) = (self.rows, self.cols);
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..n {
            if r == m {
                break;
            }
            let Some(piv) = (r..m).find(|&i| self.get(i, c) != 0) else { continue };
            if piv != r {
                for j in 0..n {
                    self.data.swap(piv * n + j, r * n + j);
                }
            }
            let inv = inv_mod(self.get(r, c), p).expect("nonzero pivot is invertible");
            for j in c..n {
                let v = self.get(r, j);
                if v != 0 {
                    self.set(r, j, mul_mod(v, inv, p));
                }
            }
            let pivot_row: Vec<(usize, u64)> =
                (c..n).filter_map(|j| { let v = self.get(r, j); (v != 0).then_some((j, v)) }).collect();
            for i in 0..m {
                if i == r {
                    continue;
                }
                let f = self.get(i, c);
                if f == 0 {
                    continue;
                }
                let neg = p - f;
                let base = i * n;
                for &(j, v) in &pivot_row {
                    let x = &mut self.data[base + j];
                    *x = ((*x as u128 + neg as u128 * v as u128) % p as u128) as u64;
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        self.clone().rref().len()
    }

    /// Basis of the right kernel `{x : A x = 0}`, one vector per free column.
    pub fn kernel(&self) -> Vec<Vec<u64>> {
        let mut a = self.clone();
        let pivots = a.rref();
        kernel_from_rref(&a, &pivots)
    }
}

pub fn kernel_from_rref(a: &FpMatrix, pivots: &[usize]) -> Vec<Vec<u64>> {
    let p = a.p;
    let n = a.cols;
    let mut is_piv = vec![false; n];
    for &c in pivots {
        is_piv[c] = true;
    }
    let mut out = Vec::new();
    for f in (0..n).filter(|&c| !is_piv[c]) {
        let mut v = vec![0u64; n];
        v[f] = 1;
        for (i, &c) in pivots.iter().enumerate() {
            let x = a.get(i, f);
            v[c] = if x == 0 { 0 } else { p - x };
        }
        out.push(v);
    }
    out
}

/// A row space over `F_p` kept in reduced echelon form.
#[derive(Clone, Debug)]
pub struct FpRowSpace {
    pub p: u64,
    pub cols: usize,
    pub rows: Vec<Vec<u64>>,
    pub pivots: Vec<usize>,
}

impl FpRowSpace {
    pub fn new(p: u64, cols: usize, generators: &[Vec<u64>]) -> Self {
        let mut m = FpMatrix::from_rows(p, cols, generators);
        let pivots = m.rref();
        let rows = (0..pivots.len()).map(|i| m.row(i).to_vec()).collect();
        FpRowSpace { p, cols, rows, pivots }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    /// Residual of `v` after eliminating against the echelon rows.
    pub fn reduce(&self, v: &[u64]) -> Vec<u64> {
        let p = self.p;
        let mut w: Vec<u64> = v.iter().map(|x| x % p).collect();
        for (row, &c) in self.rows.iter().zip(&self.pivots) {
            let f = w[c];
            if f == 0 {
                continue;
            }
            let neg = p - f;
            for (x, &y) in w.iter_mut().zip(row) {
                if y != 0 {
                    *x = ((*x as u128 + neg as u128 * y as u128) % p as u128) as u64;
                }
            }
        }
        w
    }

    pub fn contains(&self, v: &[u64]) -> bool {
        self.reduce(v).iter().all(|&x| x == 0)
    }

    /// Coordinates of `v` in the echelon basis, if `v` lies in the span.
    pub fn coordinates(&self, v: &[u64]) -> Option<Vec<u64>> {
        if !self.contains(v) {
            return None;
        }
        Some(self.pivots.iter().map(|&c| v[c] % self.p).collect())
    }
}
