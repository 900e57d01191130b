use num_bigint::BigInt;
use upcong_core::arith::{rat, Rat};
use upcong_core::jacobi::{FourierClassSpace, JacobiIndex};
use upcong_core::linalg::exact::solve_in_span;
use upcong_core::qseries::{delta, dim_mk, eisenstein};
use upcong_core::scalar::*;

fn row(w: &WeakForm, n: i64, lo: i64, hi: i64) -> Vec<i64> {
    (lo..=hi).map(|r| i64::try_from(w.coeff(n, r)).unwrap()).collect()
}

#[test]
fn weak_generator_leading_terms() {
    let g = weak_generators(4).unwrap();
    assert_eq!(row(&g.0, 0, -2, 2), vec![0, 1, -2, 1, 0]);
    assert_eq!(row(&g.0, 1, -2, 2), vec![-2, 8, -12, 8, -2]);
    assert_eq!(row(&g.1, 0, -2, 2), vec![0, 1, 10, 1, 0]);
    assert_eq!(row(&g.1, 1, -2, 2), vec![10, -64, 108, -64, 10]);
    assert_eq!(row(&g.2, 0, -2, 2), vec![0, -1, 0, 1, 0]);
}

#[test]
fn generator_relation() {
    // 432 φ_{-1,2}^2 = φ_{-2,1} (φ_{0,1}^3 - 3 E4 φ_{-2,1}^2 φ_{0,1} + 2 E6 φ_{-2,1}^3)
    let n = 8;
    let g = weak_generators(n).unwrap();
    let (a, b, c) = (&g.0, &g.1, &g.2);
    let lhs = c.mul(c);
    let t1 = b.mul(b).mul(b);
    let t2 = a.mul(a).mul(b).mul_q(&eisenstein(4, n).unwrap());
    let t3 = a.mul(a).mul(a).mul_q(&eisenstein(6, n).unwrap());
    let x = t1;
    for nn in 0..n as i64 {
        for r in -12i64..=12 {
            let rhs_inner = |w: &WeakForm| w.coeff(nn, r);
            let _ = rhs_inner;
        }
    }
    let inner = |nn: i64, r: i64| x.coeff(nn, r) - BigInt::from(3) * t2.coeff(nn, r) + BigInt::from(2) * t3.coeff(nn, r);
    for nn in 0..n as i64 {
        for r in -12i64..=12 {
            // multiply by φ_{-2,1} by hand
            let mut s = BigInt::from(0);
            for n1 in 0..=nn {
                for r1 in -8i64..=8 {
                    let c1 = a.coeff(n1, r1);
                    if c1 != BigInt::from(0) {
                        s += c1 * inner(nn - n1, r - r1);
                    }
                }
            }
            assert_eq!(BigInt::from(432) * lhs.coeff(nn, r), s, "(n, r) = ({nn}, {r})");
        }
    }
}

fn ez_dim_even(k: i64, m: i64) -> usize {
    // sum_{j=0}^{m} (dim M_{k+2j} - ceil(j^2 / 4m))
    (0..=m)
        .map(|j| dim_mk(k + 2 * j) as i64 - (j * j + 4 * m - 1) / (4 * m))
        .sum::<i64>() as usize
}

#[test]
fn scalar_dimensions() {
    assert_eq!(holomorphic_basis(4, 1, 3).unwrap().len(), 1);
    assert_eq!(holomorphic_basis(10, 1, 3).unwrap().len(), 2);
    for k in [3, 5, 7, 9, 11, 13] {
        assert_eq!(holomorphic_basis(k, 1, 4).unwrap().len(), 0, "k = {k}");
    }
    for k in [3, 5, 7, 9] {
        assert_eq!(holomorphic_basis(k, 2, 4).unwrap().len(), 0, "k = {k}");
    }
    assert_eq!(holomorphic_basis(11, 2, 4).unwrap().len(), 1);
    for m in 1..=3 {
        for k in (4..=40).step_by(2) {
            let n = jacobi_sturm(k, m) + 1;
            assert_eq!(holomorphic_basis(k, m, n).unwrap().len(), ez_dim_even(k, m), "(k, m) = ({k}, {m})");
        }
    }
    assert!(weak_basis(3, 1, 3).unwrap().is_empty());
    let w = weak_basis(-2, 1, 3).unwrap();
    assert_eq!(w.len(), 1);
    assert_eq!(w[0], weak_generators(3).unwrap().0);
}

#[test]
fn eisenstein_index_one() {
    let b = holomorphic_basis(4, 1, 3).unwrap();
    let e = &b[0];
    assert_eq!(e.coeff(0, &[0]), rat(1));
    assert_eq!(e.coeff(1, &[0]), rat(126));
    assert_eq!(e.coeff(1, &[1]), rat(56));
    assert_eq!(e.coeff(1, &[2]), rat(1));
    assert_eq!(e.coeff(2, &[0]), rat(756));
}

#[test]
fn cusp_form_weight_ten() {
    let n = 6;
    let b = holomorphic_basis(10, 1, n).unwrap();
    let idx = JacobiIndex::scalar(1).unwrap();
    let space = FourierClassSpace::new(&idx, n, 10);
    // cusp subspace: vanish on D = 0
    let zero_cols: Vec<usize> = space.orbits.iter().enumerate().filter(|(_, o)| o.disc == 0).map(|(i, _)| i).collect();
    let rows: Vec<Vec<Rat>> = b.iter().map(|f| zero_cols.iter().map(|&i| f.orbit_values(&space)[i].clone()).collect()).collect();
    let rank = {
        let mut r = rows.clone();
        upcong_core::linalg::exact::rref_q(&mut r).len()
    };
    assert_eq!(b.len() - rank, 1);
    // Δ φ_{-2,1} lies in the span
    let phi = weak_generators(n).unwrap().0.mul_q(&delta(n)).to_jacobi().unwrap();
    let vecs: Vec<Vec<Rat>> = b.iter().map(|f| f.orbit_values(&space)).collect();
    assert!(solve_in_span(&vecs, &phi.orbit_values(&space)).is_some());
    assert!(phi.is_orbit_consistent(&space));
}

#[test]
fn holomorphic_basis_in_weak_span() {
    for (k, m) in [(8, 2), (10, 3), (12, 3), (11, 2), (15, 3)] {
        let n = jacobi_sturm(k, m) + 1;
        let weak = weak_basis(k, m, n).unwrap();
        let idx = JacobiIndex::scalar(m).unwrap();
        let sup = idx.support(n);
        let hol = holomorphic_basis(k, m, n).unwrap();
        // compare on all (n, r) with |r| <= rmax, including negative discriminants
        let keys: Vec<(i64, i64)> = (0..n as i64).flat_map(|a| (-12..=12).map(move |r| (a, r))).collect();
        let wv: Vec<Vec<Rat>> = weak.iter().map(|w| keys.iter().map(|&(a, r)| Rat::from_integer(w.coeff(a, r))).collect()).collect();
        for f in hol.iter() {
            assert!(f.iter().all(|((a, r), _)| sup.contains(&(*a, r.clone()))));
            let v: Vec<Rat> = keys.iter().map(|&(a, r)| f.coeff(a, &[r])).collect();
            assert!(solve_in_span(&wv, &v).is_some(), "(k, m) = ({k}, {m})");
            assert!(f.is_integral());
            let space = FourierClassSpace::new(&idx, n, k);
            assert!(f.is_orbit_consistent(&space));
        }
    }
}
