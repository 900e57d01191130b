use std::cmp::Ordering;

use serde::Serialize;
use upcong_core::arith::is_prime_u64;
use upcong_core::modp::{verdict_consistent, Verdict};

/// Heat-cycle branches for degree `g` and weight `k` at `p`, ignoring the
/// hypothesis `p >= max(k, g + 3)`: the verdict the inequalities alone give.
pub fn siegel_branches(k: i64, g: usize, p: u64) -> Verdict {
    let (pi, gi) = (p as i64, g as i64);
    if g % 2 == 1 {
        return Verdict::FiltrationTest { exponent: pi + 1 - k + (gi - 1) / 2, not_congruent: 2 * pi + 1 + gi - k, congruent: pi + 2 + gi - k };
    }
    if 2 * k <= gi + 4 {
        return Verdict::NotApplicable { reason: "k <= (g + 4)/2".into() };
    }
    match pi.cmp(&(2 * k - gi - 3)) {
        Ordering::Greater => Verdict::ExcludedByBound,
        Ordering::Equal => Verdict::BoundaryUndetermined,
        Ordering::Less => Verdict::FiltrationTest {
            exponent: (3 * pi + gi + 1) / 2 - k,
            not_congruent: 3 * pi + 1 + gi - k,
            congruent: 2 * pi + 2 + gi - k,
        },
    }
}

/// Prediction for `U(p)` congruences of degree `g` Siegel forms of weight `k`.
pub fn siegel_criterion(k: i64, g: usize, p: u64) -> Verdict {
    if g == 0 {
        return Verdict::NotApplicable { reason: "degree must be positive".into() };
    }
    if p < 5 || !is_prime_u64(p) {
        return Verdict::NotApplicable { reason: "p must be a prime >= 5".into() };
    }
    if (p as i64) < k.max(g as i64 + 3) {
        return Verdict::NotApplicable { reason: "p < max(k, g + 3)".into() };
    }
    siegel_branches(k, g, p)
}

#[derive(Clone, Debug, Serialize)]
pub struct VerdictRow {
    pub k: i64,
    pub g: usize,
    pub p: u64,
    pub verdict: Verdict,
    pub consistent: bool,
}

/// Verdicts for `1 <= k <= max_k`, `1 <= g <= max_g`, primes `5 <= p <= max_p`.
pub fn verdict_table(max_k: i64, max_g: usize, max_p: u64) -> Vec<VerdictRow> {
    let mut rows = vec![];
    for k in 1..=max_k {
        for g in 1..=max_g {
            for p in (5..=max_p).filter(|&p| is_prime_u64(p)) {
                let verdict = siegel_criterion(k, g, p);
                let consistent = verdict_consistent(&verdict, k, p);
                rows.push(VerdictRow { k, g, p, verdict, consistent });
            }
        }
    }
    rows
}
