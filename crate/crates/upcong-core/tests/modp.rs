use upcong_core::arith::rat;
use upcong_core::fixtures::{table1, Table1};
use upcong_core::jacobi::{FourierClassSpace, JacobiExpansion, JacobiIndex, JacobiModP};
use upcong_core::linalg::fp::FpRowSpace;
use upcong_core::modp::*;
use upcong_core::qseries::eisenstein;
use upcong_core::restriction::extend_precision;
use upcong_core::scalar::jacobi_sturm;
use upcong_core::Error;

fn i3() -> JacobiIndex {
    JacobiIndex::identity(3)
}

fn combo(t: &Table1, terms: &[(i64, &str)]) -> JacobiExpansion {
    let first = &t.form(terms[0].1).unwrap().expansion;
    let mut acc = JacobiExpansion::zero(&first.index, first.weight, first.precision);
    for (c, name) in terms {
        acc = acc.add(&t.form(name).unwrap().expansion.scale(&rat(*c))).unwrap();
    }
    acc
}

fn assert_same_span(k: i64, p: u64, got: &[JacobiModP], want: &[JacobiExpansion]) {
    let space = FourierClassSpace::new(&i3(), 5, k);
    let a: Vec<Vec<u64>> = got.iter().map(|f| f.orbit_values(&space)).collect();
    let b: Vec<Vec<u64>> = want.iter().map(|f| f.reduce_mod(p).unwrap().orbit_values(&space)).collect();
    let sa = FpRowSpace::new(p, space.dim(), &a);
    let sb = FpRowSpace::new(p, space.dim(), &b);
    assert_eq!(sa.dim(), sb.dim(), "k = {k}, p = {p}");
    assert!(b.iter().all(|v| sa.contains(v)), "k = {k}, p = {p}");
    assert!(a.iter().all(|v| sb.contains(v)), "k = {k}, p = {p}");
}

#[test]
fn precision_bounds() {
    assert_eq!(jacobi_sturm(4, 1), 1);
    assert_eq!(cycle_precision(&i3(), 10, 13).unwrap(), 17);
    // criterion weight 3p + 2 + l - k at k = 10, p = 13
    assert_eq!(required_precision(&i3(), 3 * 13 + 2 + 3 - 10, 10).unwrap(), 5);
    assert_eq!(restriction_bound(&i3(), 17, 10).unwrap(), 3);
}

#[test]
fn filtration_examples() {
    let t = table1().unwrap();
    let phi = &t.form("phi_6_1").unwrap().expansion;
    let red = phi.reduce_mod(7).unwrap();
    assert_eq!(jacobi_filtration(&red).unwrap(), Some(6));
    assert_eq!(jacobi_filtration(&red.heat()).unwrap(), Some(14));
    let lifted = phi.mul_q(&eisenstein(6, 5).unwrap());
    assert_eq!(lifted.weight, Some(12));
    assert_eq!(jacobi_filtration(&lifted.reduce_mod(7).unwrap()).unwrap(), Some(6));
    let zero = JacobiExpansion::zero(&i3(), Some(8), 5).reduce_mod(7).unwrap();
    assert_eq!(jacobi_filtration(&zero).unwrap(), None);
    let mut short = red.clone();
    short.weight = Some(6 + 6 * 40);
    assert!(matches!(jacobi_filtration(&short), Err(Error::InsufficientPrecision { .. })));
}

#[test]
fn heat_cycle_examples() {
    let t = table1().unwrap();
    let prec = cycle_precision(&i3(), 6, 5).unwrap();
    let phi6 = extend_precision(&t.form("phi_6_1").unwrap().expansion, prec).unwrap();
    let r = heat_cycle(&phi6.reduce_mod(5).unwrap()).unwrap();
    assert!(r.cycle_closed);
    assert!(r.balanced());
    assert_eq!(r.filtrations.len(), 5);
    for f in &r.falls {
        assert!(r.low_points.contains(&f.step), "{r:?}");
    }
    let prec = cycle_precision(&i3(), 4, 5).unwrap();
    let phi4 = extend_precision(&t.form("phi_4_0").unwrap().expansion, prec).unwrap();
    let r = heat_cycle(&phi4.reduce_mod(5).unwrap()).unwrap();
    assert!(!r.cycle_closed);
    for (e, w) in r.filtrations.iter().enumerate() {
        if let Some(w) = w {
            assert_eq!((w - 4 - e as i64 * 6).rem_euclid(4), 0);
        }
    }
}

#[test]
fn heat_cycles_of_congruence_spaces() {
    // every cycle closes and balances, steps are maximal exactly away from low points
    let mut one_fall = 0;
    for (k, p) in [(6, 5), (8, 5), (8, 7), (10, 5), (10, 7)] {
        let space = up_congruence_space(k, &i3(), p).unwrap();
        for f in space.forms() {
            let r = heat_cycle(&f).unwrap();
            assert!(r.cycle_closed && r.balanced(), "{r:?}");
            let pi = p as i64;
            for w in r.filtrations.windows(2) {
                let (a, b) = (w[0].unwrap(), w[1].unwrap());
                assert!(b <= a + pi + 1);
                let low = (2 * a - 3).rem_euclid(pi) == 0;
                assert_eq!(b == a + pi + 1, !low, "{r:?}");
            }
            if r.falls.len() == 1 {
                one_fall += 1;
                assert_eq!((r.falls[0].gap, r.falls[0].drop), (p as usize - 1, pi + 1));
            }
        }
    }
    // (6, 5) and (10, 5) fall once, from 24 back to 6
    assert_eq!(one_fall, 2);
}

#[test]
fn up_congruent_examples() {
    let t = table1().unwrap();
    let f8 = combo(&t, &[(1, "phi_8_1"), (1, "phi_8_2"), (1, "phi_8_3")]);
    assert!(matches!(up_congruent(&f8, 7), Err(Error::InsufficientPrecision { .. })));
    let f8 = extend_precision(&f8, cycle_precision(&i3(), 8, 7).unwrap()).unwrap();
    assert!(up_congruent(&f8, 7).unwrap());
    let prec = cycle_precision(&i3(), 10, 13).unwrap();
    for i in 1..=4 {
        let f = extend_precision(&t.form(&format!("phi_10_{i}")).unwrap().expansion, prec).unwrap();
        assert!(up_congruent(&f, 13).unwrap());
    }
    assert!(up_congruent(&JacobiExpansion::zero(&i3(), Some(10), prec), 13).unwrap());
    // a witness needs no extra precision
    assert!(!up_congruent(&t.form("phi_4_0").unwrap().expansion, 5).unwrap());
}

#[test]
fn congruence_spaces() {
    let t = table1().unwrap();
    let cases: Vec<(i64, u64, Vec<Vec<(i64, &str)>>)> = vec![
        (4, 5, vec![]),
        (6, 5, vec![vec![(1, "phi_6_1")]]),
        (8, 5, vec![vec![(1, "phi_8_2")], vec![(1, "phi_8_3")]]),
        (8, 7, vec![vec![(1, "phi_8_1"), (1, "phi_8_2"), (1, "phi_8_3")]]),
        (10, 5, vec![vec![(1, "phi_10_1"), (4, "phi_10_2"), (4, "phi_10_3"), (1, "phi_10_4")]]),
        (10, 7, vec![vec![(1, "phi_10_1"), (5, "phi_10_2"), (5, "phi_10_3"), (4, "phi_10_4")]]),
        (10, 11, vec![vec![(1, "phi_10_1"), (9, "phi_10_4")], vec![(1, "phi_10_2"), (1, "phi_10_3"), (8, "phi_10_4")]]),
        (10, 13, vec![vec![(1, "phi_10_1")], vec![(1, "phi_10_2")], vec![(1, "phi_10_3")], vec![(1, "phi_10_4")]]),
    ];
    for (k, p, gens) in cases {
        let space = up_congruence_space(k, &i3(), p).unwrap();
        let want: Vec<JacobiExpansion> = gens.iter().map(|g| combo(&t, g)).collect();
        assert_eq!(space.dim(), want.len(), "k = {k}, p = {p}");
        assert_same_span(k, p, &space.forms(), &want);
    }
    for (k, p) in [(6, 7), (8, 11), (10, 17)] {
        assert_eq!(up_congruence_space(k, &i3(), p).unwrap().dim(), 0);
    }
}

#[test]
fn congruence_routes_agree() {
    for (k, p) in [(8, 5), (10, 7)] {
        let space = up_congruence_space(k, &i3(), p).unwrap();
        let exps = space.basis.expansions();
        for (i, e) in exps.iter().enumerate() {
            let flag = up_congruent(e, p).unwrap();
            assert_eq!(flag, space.contains(&e.reduce_mod(p).unwrap()).unwrap(), "k = {k}, p = {p}, form {i}");
        }
        for f in space.forms() {
            let mut h = f.clone();
            for _ in 1..p {
                h = h.heat();
            }
            assert!(h.iter().eq(f.iter()));
            assert!(f.u_p().is_zero());
        }
    }
}

#[test]
fn criterion_regimes() {
    assert_eq!(jacobi_criterion(10, 3, 17, 8), Verdict::ExcludedByBound);
    assert_eq!(jacobi_criterion(10, 3, 11, 8), Verdict::FiltrationTest { exponent: 9, not_congruent: 28, congruent: 18 });
    assert_eq!(jacobi_criterion(6, 3, 7, 8), Verdict::ExcludedByBound);
    assert_eq!(jacobi_criterion(10, 3, 13, 8), Verdict::BoundaryUndetermined);
    assert_eq!(jacobi_criterion(10, 3, 7, 8).name(), "NotApplicable");
    assert_eq!(jacobi_criterion(10, 3, 11, 22).name(), "NotApplicable");
    assert_eq!(jacobi_criterion(4, 3, 11, 8).name(), "NotApplicable");
    assert_eq!(jacobi_criterion(4, 2, 7, 4), Verdict::FiltrationTest { exponent: 5, not_congruent: 14, congruent: 8 });
    for k in 1..=30 {
        for l in 1..=8 {
            for p in [5u64, 7, 11, 13, 17, 19, 23, 29, 31] {
                assert!(verdict_consistent(&jacobi_criterion(k, l, p, 1), k, p), "{k} {l} {p}");
            }
        }
    }
}

#[test]
fn criterion_verified_at_eleven() {
    let r = verify_criterion(10, &i3(), 11).unwrap();
    assert_eq!(r.congruence_dim, 2);
    assert!(r.pass(), "{r:?}");
    assert!(r.checks.iter().any(|c| c.congruent && c.observed == Some(18)));
    assert!(r.checks.iter().any(|c| !c.congruent && c.observed == Some(28)));
}
