use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use upcong_core::arith::Rat;
use upcong_core::jacobi::index::det_i64;
use upcong_core::{Error, Result};

/// The matrix `2T` of a half-integral symmetric `T`: integral, symmetric,
/// even diagonal, positive semi-definite.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TwiceT(Vec<Vec<i64>>);

impl fmt::Debug for TwiceT {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl TwiceT {
    pub fn new(rows: Vec<Vec<i64>>) -> Result<Self> {
        let g = rows.len();
        if g == 0 || rows.iter().any(|r| r.len() != g) {
            return Err(Error::InvalidArgument("2T must be a nonempty square matrix".into()));
        }
        for i in 0..g {
            if rows[i][i] % 2 != 0 {
                return Err(Error::InvalidArgument(format!("2T has odd diagonal entry {}", rows[i][i])));
            }
            for j in 0..i {
                if rows[i][j] != rows[j][i] {
                    return Err(Error::InvalidArgument("2T is not symmetric".into()));
                }
            }
        }
        let t = TwiceT(rows);
        if !t.is_psd() {
            return Err(Error::InvalidArgument(format!("{t:?} is not positive semi-definite")));
        }
        Ok(t)
    }

    /// Trusted constructor for Gram matrices of lattice vectors.
    pub(crate) fn from_gram(rows: Vec<Vec<i64>>) -> Self {
        TwiceT(rows)
    }

    pub fn zero(g: usize) -> Self {
        TwiceT(vec![vec![0; g]; g])
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn rows(&self) -> &[Vec<i64>] {
        &self.0
    }

    pub fn entry(&self, i: usize, j: usize) -> i64 {
        self.0[i][j]
    }

    /// `tr(2T)`.
    pub fn trace(&self) -> i64 {
        (0..self.degree()).map(|i| self.0[i][i]).sum()
    }

    /// `det(2T)`.
    pub fn det(&self) -> BigInt {
        det_i64(&self.0)
    }

    /// `det T = det(2T) / 2^g`.
    pub fn det_t(&self) -> Rat {
        Rat::new(self.det(), BigInt::from(1u64) << self.degree())
    }

    /// Every principal minor is nonnegative.
    fn is_psd(&self) -> bool {
        let g = self.degree();
        (1u32..(1 << g)).all(|mask| {
            let idx: Vec<usize> = (0..g).filter(|i| mask >> i & 1 == 1).collect();
            let sub: Vec<Vec<i64>> = idx.iter().map(|&i| idx.iter().map(|&j| self.0[i][j]).collect()).collect();
            !det_i64(&sub).is_negative()
        })
    }

    pub fn is_definite(&self) -> bool {
        let g = self.degree();
        (1..=g).all(|s| {
            let sub: Vec<Vec<i64>> = (0..s).map(|i| self.0[i][..s].to_vec()).collect();
            det_i64(&sub) > BigInt::zero()
        })
    }

    pub fn add(&self, other: &TwiceT) -> TwiceT {
        TwiceT(self.0.iter().zip(&other.0).map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y).collect()).collect())
    }

    /// `2T` plus `λ` times `2T'`, without validation.
    pub(crate) fn pencil(&self, other: &TwiceT, lambda: i64) -> Vec<Vec<i64>> {
        self.0.iter().zip(&other.0).map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + lambda * y).collect()).collect()
    }

    /// Key for the total order used to find minimal nonvanishing
    /// coefficients: diagonal entries first, then all entries row by row.
    pub fn order_key(&self) -> Vec<i64> {
        let g = self.degree();
        let mut k: Vec<i64> = (0..g).map(|i| self.0[i][i]).collect();
        k.extend(self.0.iter().flatten().copied());
        k
    }

    /// Lower-right `(g-1)x(g-1)` block.
    pub fn lower_block(&self) -> Vec<Vec<i64>> {
        self.0[1..].iter().map(|r| r[1..].to_vec()).collect()
    }

    /// `[[2n, r^t], [r, 2M]]`.
    pub fn from_jacobi(n: i64, r: &[i64], twice_m: &[Vec<i64>]) -> TwiceT {
        let g = r.len() + 1;
        let mut rows = vec![vec![0; g]; g];
        rows[0][0] = 2 * n;
        for (j, &x) in r.iter().enumerate() {
            rows[0][j + 1] = x;
            rows[j + 1][0] = x;
        }
        for (i, row) in twice_m.iter().enumerate() {
            rows[i + 1][1..].copy_from_slice(row);
        }
        TwiceT(rows)
    }
}
