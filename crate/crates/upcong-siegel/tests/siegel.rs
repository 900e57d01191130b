use std::collections::BTreeMap;

use num_bigint::BigInt;
use upcong_core::arith::{rat, rat_frac, Rat};
use upcong_core::fixtures::schottky_matrix;
use upcong_core::modp::{verdict_consistent, Verdict};
use upcong_core::qseries::{delta, eisenstein, sigma, theta_elliptic};
use upcong_core::Error;
use upcong_siegel::bracket::{bracket_constant, p_alpha, q_poly, rankin_cohen};
use upcong_siegel::criterion::{siegel_branches, siegel_criterion, verdict_table};
use upcong_siegel::lattice::*;
use upcong_siegel::schottky::diagonal_two_indices;
use upcong_siegel::{SiegelExpansion, TwiceT};

fn t(rows: &[&[i64]]) -> TwiceT {
    TwiceT::new(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
}

fn single(tt: TwiceT, c: i64, tb: i64) -> SiegelExpansion {
    let g = tt.degree();
    SiegelExpansion::from_map(g, Some(4), tb, BTreeMap::from([(tt, rat(c))])).unwrap()
}

#[test]
fn twice_t_validation() {
    assert!(TwiceT::new(vec![vec![1]]).is_err());
    assert!(TwiceT::new(vec![vec![2, 1], vec![0, 2]]).is_err());
    assert!(TwiceT::new(vec![vec![2, 3], vec![3, 2]]).is_err());
    assert!(TwiceT::new(vec![vec![0, 1], vec![1, 0]]).is_err());
    assert!(TwiceT::new(vec![]).is_err());
    let a = t(&[&[2, 2], &[2, 2]]);
    assert!(!a.is_definite());
    assert_eq!(a.det_t(), rat(0));
    assert_eq!(t(&[&[2, 1], &[1, 2]]).det_t(), rat_frac(3, 4));
    assert_eq!(TwiceT::from_jacobi(3, &[1, -1], &[vec![2, 0], vec![0, 2]]), t(&[&[6, 1, -1], &[1, 2, 0], &[-1, 0, 2]]));
}

#[test]
fn theta_operator_examples() {
    let z = single(TwiceT::zero(2), 1, 2).theta_d();
    assert!(z.is_zero());
    assert_eq!(single(t(&[&[2, 0], &[0, 2]]), 5, 2).theta_d().coeff(&t(&[&[2, 0], &[0, 2]])), rat(5));
    assert_eq!(single(t(&[&[2, 1], &[1, 2]]), 4, 2).theta_d().coeff(&t(&[&[2, 1], &[1, 2]])), rat(3));
    let e4 = eisenstein(4, 8).unwrap();
    let d = SiegelExpansion::from_elliptic(&e4).theta_d().to_elliptic().unwrap();
    assert_eq!(d.coeffs(), theta_elliptic(&e4).coeffs());
}

#[test]
fn u_cap_p_examples() {
    let (rows, _) = schottky_matrix().unwrap();
    let fixture = TwiceT::new(rows).unwrap();
    assert_eq!(fixture.det(), BigInt::from(5));
    let diag = t(&[&[2, 0, 0, 0], &[0, 2, 0, 0], &[0, 0, 2, 0], &[0, 0, 0, 2]]);
    let f = SiegelExpansion::from_map(4, Some(8), 4, BTreeMap::from([(fixture.clone(), rat(-1)), (diag.clone(), rat(40))])).unwrap();
    let u = f.u_cap_p(5).unwrap();
    assert_eq!(u.coeff(&fixture), rat(-1));
    assert_eq!(u.coeff(&diag), rat(0));
    assert_eq!(u.u_cap_p(5).unwrap(), u);
    assert!(SiegelExpansion::zero(2, None, 3).u_cap_p(5).unwrap().is_zero());
    assert!(f.u_cap_p(2).is_err());
}

#[test]
fn json_round_trip() {
    let th = lattice_theta(&e8(), 2, 1, DEFAULT_BUDGET).unwrap();
    let back = SiegelExpansion::from_json(&th.to_json()).unwrap();
    assert_eq!(back, th);
    let mut bad = th.to_json();
    bad["kind"] = "jacobi".into();
    assert!(matches!(SiegelExpansion::from_json(&bad), Err(Error::Parse(_))));
}

#[test]
fn e8_theta_degree_one() {
    // oracle: theta_{E8} = E4 = 1 + 240 sum sigma_3(n) q^n
    let th = lattice_theta(&e8(), 1, 4, DEFAULT_BUDGET).unwrap().to_elliptic().unwrap();
    assert_eq!(th.coeff(1), &rat(240));
    for n in 1..=4u64 {
        assert_eq!(th.coeff(n as usize), &Rat::from_integer(BigInt::from(240) * sigma(3, n)));
    }
    assert_eq!(th.coeffs(), eisenstein(4, 5).unwrap().coeffs());
    assert_eq!(e8().det(), BigInt::from(1));
}

#[test]
fn unimodular_rank_sixteen() {
    let d = d16_plus().unwrap();
    assert_eq!(d.det(), BigInt::from(1));
    assert!(d.rows().iter().enumerate().all(|(i, r)| r[i] % 2 == 0));
    let e = e8().direct_sum(&e8());
    let counts = norm_counts(&d, 4).unwrap();
    assert_eq!(counts[&2], 480);
    assert_eq!(counts, norm_counts(&e, 4).unwrap());
    // oracle: both theta series equal E8 = 1 + 480 sum sigma_7(n) q^n
    let a = lattice_theta(&d, 1, 2, DEFAULT_BUDGET).unwrap().to_elliptic().unwrap();
    let b = lattice_theta(&e, 1, 2, DEFAULT_BUDGET).unwrap().to_elliptic().unwrap();
    assert_eq!(a, b);
    assert_eq!(a.coeffs(), eisenstein(8, 3).unwrap().coeffs());
}

#[test]
fn theta_zero_coefficient_and_budget() {
    for g in 1..=3 {
        assert_eq!(lattice_theta(&e8(), g, 1, DEFAULT_BUDGET).unwrap().coeff(&TwiceT::zero(g)), rat(1));
    }
    assert!(matches!(lattice_theta(&e8(), 3, 4, 1000), Err(Error::Resource(_))));
    assert!(matches!(short_vectors(&e8(), 8, 100), Err(Error::Resource(_))));
    assert!(Gram::new(vec![vec![2, 3], vec![3, 2]]).is_err());
    assert!(Gram::new(vec![vec![1]]).is_err());
}

#[test]
fn short_vectors_against_brute_force() {
    let a2 = Gram::new(vec![vec![2, -1], vec![-1, 2]]).unwrap();
    let g = Gram::new(vec![vec![4, 1, 0], vec![1, 6, 2], vec![0, 2, 8]]).unwrap();
    for (gram, bound) in [(a2, 14), (g, 30)] {
        let mut got = short_vectors(&gram, bound, DEFAULT_BUDGET).unwrap();
        got.sort();
        let n = gram.rank();
        let mut want = vec![];
        let r = 6i64;
        let total = (2 * r + 1).pow(n as u32);
        for mut code in 0..total {
            let x: Vec<i64> = (0..n)
                .map(|_| {
                    let v = code % (2 * r + 1) - r;
                    code /= 2 * r + 1;
                    v
                })
                .collect();
            if gram.norm(&x) <= bound {
                want.push(x);
            }
        }
        want.sort();
        assert_eq!(got, want);
    }
}

#[test]
fn direct_sum_is_convolution() {
    let e = e8().direct_sum(&e8());
    for g in 1..=2 {
        let single = lattice_theta(&e8(), g, 2, DEFAULT_BUDGET).unwrap();
        let sum = lattice_theta(&e, g, 2, DEFAULT_BUDGET).unwrap();
        let conv = single.mul(&single).unwrap();
        assert_eq!(sum.truncate(2).iter().collect::<Vec<_>>(), conv.iter().collect::<Vec<_>>(), "g = {g}");
    }
}

#[test]
fn theta_coefficient_agrees_with_series() {
    let th = lattice_theta(&e8(), 2, 2, DEFAULT_BUDGET).unwrap();
    for (tt, c) in th.iter() {
        assert_eq!(Rat::from_integer(theta_coefficient(&e8(), tt).unwrap().into()), *c, "{tt:?}");
    }
    // 2T = [[2,1],[1,2]]: pairs of roots with inner product 1; each root has 56 such
    assert_eq!(theta_coefficient(&e8(), &t(&[&[2, 1], &[1, 2]])).unwrap(), 240 * 56);
}

#[test]
fn fourier_jacobi_of_e8_theta() {
    let th = lattice_theta(&e8(), 2, 3, DEFAULT_BUDGET).unwrap();
    let phi = th.fourier_jacobi(&[vec![2]]).unwrap();
    assert_eq!(phi.precision, 3);
    assert_eq!(phi.weight, Some(4));
    assert!(phi.verify_periodicity());
    // (0, root) pairs, then root pairs by inner product
    assert_eq!(phi.coeff(0, &[0]), rat(240));
    assert_eq!(phi.coeff(1, &[0]), rat(240 * 126));
    assert_eq!(phi.coeff(0, &[1]), rat(0));
    assert_eq!(phi.coeff(1, &[1]), rat(240 * 56));
    assert!(SiegelExpansion::zero(2, Some(4), 3).fourier_jacobi(&[vec![2]]).unwrap().is_zero());
    assert!(th.fourier_jacobi(&[vec![2, 0], vec![0, 2]]).is_err());
    let th3 = lattice_theta(&e8(), 3, 3, DEFAULT_BUDGET).unwrap();
    let phi3 = th3.fourier_jacobi(&[vec![2, 1], vec![1, 2]]).unwrap();
    assert!(phi3.verify_periodicity());
    assert!(!phi3.is_zero());
}

#[test]
fn p_alpha_and_q() {
    let a = t(&[&[2, 1], &[1, 4]]);
    let b = t(&[&[6, -1], &[-1, 2]]);
    // det(A + λB) with A = [[1, 1/2], [1/2, 2]], B = [[3, -1/2], [-1/2, 1]]
    // = (1 + 3λ)(2 + λ) - (1/2 - λ/2)^2
    let want = [rat_frac(7, 4), rat_frac(15, 2), rat_frac(11, 4)];
    assert_eq!(p_alpha(&a, &b), want);
    // g = 1: Q = 2k' n1 - 2k n2
    let (x, y) = (t(&[&[6]]), t(&[&[10]]));
    assert_eq!(q_poly(4, 6, &x, &y), rat(12 * 3 - 8 * 5));
}

#[test]
fn bracket_of_e4_e6() {
    let e4 = SiegelExpansion::from_elliptic(&eisenstein(4, 6).unwrap());
    let e6 = SiegelExpansion::from_elliptic(&eisenstein(6, 6).unwrap());
    let b = rankin_cohen(&e4, &e6).unwrap();
    assert_eq!(b.weight, Some(12));
    let d = SiegelExpansion::from_elliptic(&delta(6)).scale(&rat(6912));
    assert_eq!(b.iter().collect::<Vec<_>>(), d.iter().collect::<Vec<_>>());
    let back = rankin_cohen(&e6, &e4).unwrap();
    assert_eq!(back, b.scale(&rat(-1)));
    assert!(rankin_cohen(&e4, &lattice_theta(&e8(), 2, 1, DEFAULT_BUDGET).unwrap()).is_err());
}

fn bracket_vs_theta(phi: &SiegelExpansion, ups: &SiegelExpansion, p: u64) -> (BTreeMap<TwiceT, u64>, BTreeMap<TwiceT, u64>) {
    let c = Rat::from_integer(bracket_constant(ups.weight.unwrap(), phi.degree));
    let lhs = rankin_cohen(phi, ups).unwrap().reduce_mod(p).unwrap();
    let rhs = phi.theta_d().mul(ups).unwrap().scale(&c).reduce_mod(p).unwrap();
    (lhs, rhs)
}

#[test]
fn bracket_congruence_degree_one() {
    // p = 5 divides 2k - g + 1 = 20 for k = 10
    let e10 = SiegelExpansion::from_elliptic(&eisenstein(10, 12).unwrap());
    let e4 = SiegelExpansion::from_elliptic(&eisenstein(4, 12).unwrap());
    assert_eq!(bracket_constant(4, 1), BigInt::from(8));
    let (lhs, rhs) = bracket_vs_theta(&e10, &e4, 5);
    assert_eq!(lhs, rhs);
    assert!(!lhs.is_empty());
    let (lhs, rhs) = bracket_vs_theta(&e10, &e4, 7);
    assert_ne!(lhs, rhs);
}

#[test]
fn bracket_congruence_at_seven() {
    // p = 7 divides 2k - g + 1 for k = 4, g = 2
    let phi = lattice_theta(&e8(), 2, 3, DEFAULT_BUDGET).unwrap();
    let ups = phi.mul(&phi).unwrap();
    assert_eq!(ups.weight, Some(8));
    let c = bracket_constant(8, 2);
    assert_eq!(c, BigInt::from(240));
    assert_ne!(&c % 7, BigInt::from(0));
    let (lhs, rhs) = bracket_vs_theta(&phi, &ups, 7);
    assert_eq!(lhs, rhs);
    // weight (p + 1)/2 in degree two: D(phi) vanishes mod p, so both sides do
    assert!(phi.theta_d().reduce_mod(7).unwrap().is_empty());
    assert!(!phi.reduce_mod(7).unwrap().is_empty());
    assert!(lhs.is_empty());
    let (lhs, rhs) = bracket_vs_theta(&phi, &ups, 13);
    assert_ne!(lhs, rhs);
}

#[test]
fn products_keep_minimal_indices() {
    let th = lattice_theta(&e8(), 2, 3, DEFAULT_BUDGET).unwrap();
    let cusp = th.sub(&SiegelExpansion::from_map(2, Some(4), 3, BTreeMap::from([(TwiceT::zero(2), rat(1))])).unwrap()).unwrap();
    let d = th.theta_d();
    let forms = [&th, &cusp, &d];
    let mut tested = 0;
    for p in [5u64, 7, 11, 13] {
        for f in forms {
            for h in forms {
                let (Some(a), Some(b)) = (f.minimal_index(p).unwrap(), h.minimal_index(p).unwrap()) else { continue };
                if a.trace() + b.trace() > 6 {
                    continue;
                }
                let prod = f.mul(h).unwrap();
                let m = prod.minimal_index(p).unwrap();
                assert_eq!(m, Some(a.add(&b)), "p = {p}");
                let want = f.reduce_mod(p).unwrap()[&a] * h.reduce_mod(p).unwrap()[&b] % p;
                assert_eq!(prod.reduce_mod(p).unwrap()[&a.add(&b)], want);
                tested += 1;
            }
        }
    }
    assert!(tested >= 12, "{tested}");
    assert_eq!(cusp.minimal_index(7).unwrap(), Some(t(&[&[0, 0], &[0, 2]])));
    // theta of E8 is 1 mod 5
    assert_eq!(cusp.minimal_index(5).unwrap(), None);
}

#[test]
fn criterion_fixtures() {
    assert_eq!(siegel_criterion(8, 4, 11), Verdict::ExcludedByBound);
    for p in [11u64, 13, 17, 19, 23, 29, 31] {
        assert_eq!(siegel_criterion(8, 4, p), Verdict::ExcludedByBound);
    }
    assert_eq!(siegel_criterion(8, 4, 7).name(), "NotApplicable");
    assert_eq!(siegel_criterion(8, 4, 5).name(), "NotApplicable");
    assert_eq!(siegel_branches(8, 4, 7), Verdict::FiltrationTest { exponent: 5, not_congruent: 18, congruent: 12 });
    assert_eq!(siegel_criterion(9, 4, 11), Verdict::BoundaryUndetermined);
    assert_eq!(siegel_criterion(10, 4, 11), Verdict::FiltrationTest { exponent: 9, not_congruent: 28, congruent: 18 });
    assert_eq!(siegel_criterion(6, 3, 7), Verdict::FiltrationTest { exponent: 3, not_congruent: 12, congruent: 6 });
    assert_eq!(siegel_criterion(8, 4, 9).name(), "NotApplicable");
    assert_eq!(siegel_criterion(3, 2, 5).name(), "NotApplicable");
    let table = verdict_table(12, 6, 23);
    assert_eq!(table.len(), 12 * 6 * 7);
    assert!(table.iter().all(|r| r.consistent && verdict_consistent(&r.verdict, r.k, r.p)));
    assert!(table.iter().any(|r| r.verdict.name() == "FiltrationTest"));
    assert!(table.iter().any(|r| r.verdict == Verdict::ExcludedByBound));
}

#[test]
fn root_indices_of_degree_four() {
    let all = diagonal_two_indices(4);
    assert!(all.iter().all(|x| x.is_definite() && x.trace() == 8));
    let dets: std::collections::BTreeSet<i64> = all.iter().map(|x| x.det().try_into().unwrap()).collect();
    assert_eq!(dets.into_iter().collect::<Vec<_>>(), vec![4, 5, 8, 9, 12, 16]);
}
