use std::collections::{BTreeMap, HashMap};

use crate::jacobi::index::JacobiIndex;

/// Canonical member of an orbit: least `n`, then the lexicographically
/// largest `r`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Orbit {
    pub disc: i64,
    pub n: i64,
    pub r: Vec<i64>,
}

/// Orbits of in-precision Fourier indices `(n, r)` under
/// `(n, r) -> (n + λ·r + M[λ], r + 2Mλ)` and `r -> -r`.
///
/// Coefficients of a Jacobi form of the given weight parity are constant
/// up to the sign `(-1)^k` on each orbit. For odd weight, orbits whose
/// class satisfies `r ≡ -r` are forced to vanish and carry no coordinate.
#[derive(Clone, Debug)]
pub struct FourierClassSpace {
    pub index: JacobiIndex,
    pub precision: usize,
    pub odd: bool,
    pub orbits: Vec<Orbit>,
    members: HashMap<(i64, Vec<i64>), (usize, bool)>,
    support: Vec<(i64, Vec<i64>)>,
}

impl FourierClassSpace {
    pub fn new(index: &JacobiIndex, precision: usize, weight: i64) -> Self {
        let odd = weight.rem_euclid(2) == 1;
        let support = index.support(precision);
        let mut groups: BTreeMap<(i64, Vec<i64>), Vec<usize>> = BTreeMap::new();
        for (i, (n, r)) in support.iter().enumerate() {
            groups.entry((index.disc(*n, r), index.signed_class(r))).or_default().push(i);
        }
        let mut orbits = Vec::new();
        let mut members = HashMap::with_capacity(support.len());
        let mut keyed: Vec<(Orbit, Vec<usize>)> = groups
            .into_iter()
            .map(|((disc, _), idx)| {
                let nmin = idx.iter().map(|&i| support[i].0).min().unwrap();
                let r = idx
                    .iter()
                    .filter(|&&i| support[i].0 == nmin)
                    .map(|&i| support[i].1.clone())
                    .max()
                    .unwrap();
                (Orbit { disc, n: nmin, r }, idx)
            })
            .collect();
        keyed.sort_by(|a, b| (a.0.n, &a.0.r).cmp(&(b.0.n, &b.0.r)));
        for (orbit, idx) in keyed {
            let pos = index.reduce_class(&orbit.r);
            let neg_r: Vec<i64> = orbit.r.iter().map(|x| -x).collect();
            let self_dual = index.reduce_class(&neg_r) == pos;
            if odd && self_dual {
                continue;
            }
            let o = orbits.len();
            for &i in &idx {
                let (n, r) = &support[i];
                let flip = odd && index.reduce_class(r) != pos;
                members.insert((*n, r.clone()), (o, flip));
            }
            orbits.push(orbit);
        }
        FourierClassSpace { index: index.clone(), precision, odd, orbits, members, support }
    }

    pub fn dim(&self) -> usize {
        self.orbits.len()
    }

    pub fn support(&self) -> &[(i64, Vec<i64>)] {
        &self.support
    }

    /// Orbit and sign flip of `(n, r)`; `None` for a forced zero or an
    /// index outside the support.
    pub fn locate(&self, n: i64, r: &[i64]) -> Option<(usize, bool)> {
        self.members.get(&(n, r.to_vec())).copied()
    }
}
