use num_bigint::BigInt;
use num_traits::Zero;
use upcong_core::arith::{binomial, factorial, Rat};
use upcong_core::jacobi::index::det_i64;
use upcong_core::{Error, Result};

use crate::expansion::SiegelExpansion;
use crate::twice::TwiceT;

/// Coefficients of the polynomial of degree `<= n` taking `values[i]` at
/// `x = i`, by Newton divided differences.
fn interpolate(values: &[Rat]) -> Vec<Rat> {
    let n = values.len();
    let mut dd = values.to_vec();
    for j in 1..n {
        for i in (j..n).rev() {
            dd[i] = (&dd[i] - &dd[i - 1]) / Rat::from_integer(BigInt::from(j));
        }
    }
    // expand the Newton form from the top
    let mut poly = vec![Rat::zero(); n];
    for i in (0..n).rev() {
        // poly = poly * (x - i) + dd[i]
        let mut next = vec![Rat::zero(); n];
        for d in 0..n {
            if poly[d].is_zero() {
                continue;
            }
            if d + 1 < n {
                next[d + 1] += &poly[d];
            }
            next[d] -= &poly[d] * Rat::from_integer(BigInt::from(i));
        }
        next[0] += &dd[i];
        poly = next;
    }
    poly
}

/// `P_α(T1, T2)`: the coefficient of `λ^α` in `det(T1 + λ T2)`, for
/// `α = 0..=g`.
pub fn p_alpha(t1: &TwiceT, t2: &TwiceT) -> Vec<Rat> {
    let g = t1.degree();
    let scale = BigInt::from(1u64) << g;
    let values: Vec<Rat> = (0..=g as i64).map(|l| Rat::new(det_i64(&t1.pencil(t2, l)), scale.clone())).collect();
    interpolate(&values)
}

/// The constants `(-1)^α α! (g-α)! C(2k'-α, g-α) C(2k-g+α, α)`.
pub fn q_weights(k: i64, k2: i64, g: usize) -> Vec<BigInt> {
    let gi = g as i64;
    (0..=gi)
        .map(|a| {
            let v = factorial(a) * factorial(gi - a) * binomial(2 * k2 - a, gi - a) * binomial(2 * k - gi + a, a);
            if a % 2 == 1 {
                -v
            } else {
                v
            }
        })
        .collect()
}

/// `Q^{(g)}_{k,k'}(T1, T2)`.
pub fn q_poly(k: i64, k2: i64, t1: &TwiceT, t2: &TwiceT) -> Rat {
    let w = q_weights(k, k2, t1.degree());
    p_alpha(t1, t2).iter().zip(&w).map(|(p, c)| p * Rat::from_integer(c.clone())).sum()
}

/// The Rankin-Cohen bracket `{Φ, Υ}` of weight `k + k' + 2`.
pub fn rankin_cohen(phi: &SiegelExpansion, ups: &SiegelExpansion) -> Result<SiegelExpansion> {
    if phi.degree != ups.degree {
        return Err(Error::InvalidArgument(format!("degrees {} and {} differ", phi.degree, ups.degree)));
    }
    let (k, k2) = match (phi.weight, ups.weight) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::InvalidArgument("the bracket needs weight-tagged inputs".into())),
    };
    let w: Vec<Rat> = q_weights(k, k2, phi.degree).into_iter().map(Rat::from_integer).collect();
    let tb = phi.trace_bound.min(ups.trace_bound);
    let mut out = phi.convolve(ups, tb, |t1, t2| p_alpha(t1, t2).iter().zip(&w).map(|(p, c)| p * c).sum())?;
    out.weight = Some(k + k2 + 2);
    Ok(out)
}

/// `(2k')! / (2k' - g)!`, the constant of the bracket congruence.
pub fn bracket_constant(k2: i64, g: usize) -> BigInt {
    factorial(2 * k2) / factorial(2 * k2 - g as i64)
}
