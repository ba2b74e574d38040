//! Lattice fans for the two explicit toric models: the Mukai-flop cone with
//! its pair of unimodular triangulations, and the resolution fan of the
//! quotient of C^4 by the cyclic group of order 3.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::cones::{strict_interior_point, Cone};
use crate::exactq::{qvec_from_bigints, Q, QMatrix, QVector};

#[derive(Debug, Error)]
pub enum ToricError {
    #[error("NotSimplicial: {0} rays in a rank {1} lattice")]
    NotSimplicial(usize, usize),
    #[error("vector does not lie in the lattice")]
    NotInLattice,
    #[error("NoUnimodularTriangulation")]
    NoUnimodularTriangulation,
}

/// Full-rank lattice inside Q^rank, stored by a triangular integer-combination
/// basis computed from arbitrary rational generators.
#[derive(Debug, Clone)]
pub struct Lattice {
    pub rank: usize,
    basis: QMatrix,     // rows form a lattice basis
    basis_inv: QMatrix, // inverse of basis^T, maps ambient -> lattice coords
}

/// Integer row echelon form (Hermite-style) of the scaled generator rows;
/// small inputs only, plain Euclidean elimination.
fn integer_row_echelon(mut rows: Vec<Vec<BigInt>>) -> Vec<Vec<BigInt>> {
    let ncols = rows.first().map_or(0, Vec::len);
    let mut pivot_row = 0;
    for col in 0..ncols {
        loop {
            let mut best: Option<usize> = None;
            for r in pivot_row..rows.len() {
                if !rows[r][col].is_zero()
                    && best.map_or(true, |b| rows[r][col].abs() < rows[b][col].abs())
                {
                    best = Some(r);
                }
            }
            let Some(b) = best else { break };
            rows.swap(pivot_row, b);
            let mut done = true;
            for r in pivot_row + 1..rows.len() {
                if !rows[r][col].is_zero() {
                    let q = &rows[r][col] / &rows[pivot_row][col];
                    for c in 0..ncols {
                        let t = &rows[pivot_row][c] * &q;
                        rows[r][c] -= t;
                    }
                    if !rows[r][col].is_zero() {
                        done = false;
                    }
                }
            }
            if done {
                if rows[pivot_row][col].is_negative() {
                    for c in 0..ncols {
                        rows[pivot_row][c] = -rows[pivot_row][c].clone();
                    }
                }
                pivot_row += 1;
                break;
            }
        }
    }
    rows.truncate(pivot_row);
    rows
}

impl Lattice {
    pub fn standard(rank: usize) -> Lattice {
        Lattice {
            rank,
            basis: QMatrix::identity(rank),
            basis_inv: QMatrix::identity(rank),
        }
    }

    /// Lattice generated over Z by the given rational rows (must span Q^dim).
    pub fn from_generators(dim: usize, generators: &[QVector]) -> Lattice {
        // clear denominators, reduce over Z, scale back
        let mut lcm = BigInt::one();
        for g in generators {
            for c in g.0.iter() {
                lcm = num_integer::lcm(lcm, c.denom().clone());
            }
        }
        let scaled: Vec<Vec<BigInt>> = generators
            .iter()
            .map(|g| {
                g.0.iter()
                    .map(|c| c.numer() * (&lcm / c.denom()))
                    .collect()
            })
            .collect();
        let echelon = integer_row_echelon(scaled);
        assert_eq!(echelon.len(), dim, "generators do not span the space");
        let scale = Q::from_bigint(lcm).recip();
        let basis = QMatrix::from_rows(
            echelon
                .iter()
                .map(|r| qvec_from_bigints(r).scale(&scale))
                .collect(),
        );
        let basis_inv = basis.transpose().inverse().unwrap();
        Lattice {
            rank: dim,
            basis,
            basis_inv,
        }
    }

    /// Coordinates of an ambient vector in the lattice basis (rational in
    /// general; integral exactly for lattice members).
    pub fn coords(&self, v: &QVector) -> QVector {
        self.basis_inv.mul_vec(v)
    }

    pub fn contains(&self, v: &QVector) -> bool {
        self.coords(v).0.iter().all(Q::is_integer)
    }

    pub fn integer_coords(&self, v: &QVector) -> Result<Vec<BigInt>, ToricError> {
        let c = self.coords(v);
        if !c.0.iter().all(Q::is_integer) {
            return Err(ToricError::NotInLattice);
        }
        Ok(c.0.iter().map(Q::to_bigint).collect())
    }

    /// Fundamental-domain volume: |det| of the basis.
    pub fn covolume(&self) -> Q {
        self.basis.det().abs()
    }

    /// A nonzero lattice vector is primitive when its basis coordinates have
    /// content 1.
    pub fn is_primitive(&self, v: &QVector) -> Result<bool, ToricError> {
        let c = self.integer_coords(v)?;
        let gcd = c
            .iter()
            .fold(BigInt::zero(), |acc, x| num_integer::gcd(acc, x.clone()));
        Ok(gcd.is_one())
    }
}

/// Volume of the simplex cone spanned by the rays, in lattice measure
/// (unimodular simplices have volume 1).
pub fn lattice_volume(rays: &[QVector], lattice: &Lattice) -> Result<Q, ToricError> {
    if rays.len() != lattice.rank {
        return Err(ToricError::NotSimplicial(rays.len(), lattice.rank));
    }
    let rows: Vec<QVector> = rays.iter().map(|r| lattice.coords(r)).collect();
    Ok(QMatrix::from_rows(rows).det().abs())
}

pub fn is_unimodular(rays: &[QVector], lattice: &Lattice) -> Result<bool, ToricError> {
    Ok(lattice_volume(rays, lattice)? == Q::one())
}

#[derive(Debug, Clone)]
pub struct Fan {
    pub lattice: Lattice,
    pub rays: Vec<QVector>,
    pub maximal_cones: Vec<Vec<usize>>,
}

impl Fan {
    fn cone(&self, indices: &[usize]) -> Cone {
        let rays: Vec<QVector> = indices.iter().map(|&i| self.rays[i].clone()).collect();
        Cone::from_rays(self.rays[0].len(), &rays)
    }

    pub fn all_unimodular(&self) -> Result<bool, ToricError> {
        for cone in &self.maximal_cones {
            let rays: Vec<QVector> = cone.iter().map(|&i| self.rays[i].clone()).collect();
            if !is_unimodular(&rays, &self.lattice)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// A fan is valid when every ray is used, every maximal cone is simplicial
/// and strictly convex, and pairwise intersections are faces of both (for
/// simplicial cones: spanned by a common subset of rays).
pub fn validate_fan(fan: &Fan) -> bool {
    let mut used = vec![false; fan.rays.len()];
    for cone in &fan.maximal_cones {
        for &i in cone {
            used[i] = true;
        }
    }
    if !used.iter().all(|&u| u) {
        return false;
    }
    let cones: Vec<Cone> = fan.maximal_cones.iter().map(|c| fan.cone(c)).collect();
    for c in &cones {
        if !c.is_simplicial() || !c.is_strictly_convex() {
            return false;
        }
    }
    // Two cones meet in the common face iff a functional separates them:
    // zero on the shared rays, strictly positive on the rest of one cone and
    // strictly negative on the rest of the other. Certifying this by LP is
    // far cheaper than recomputing the double description per pair.
    let dim = fan.rays.first().map_or(0, |r| r.0.len());
    for (a, ia) in fan.maximal_cones.iter().enumerate() {
        for ib in &fan.maximal_cones[a + 1..] {
            let common: Vec<usize> = ia.iter().copied().filter(|i| ib.contains(i)).collect();
            let mut strict = Vec::new();
            for &i in ia.iter().filter(|i| !common.contains(i)) {
                strict.push(fan.rays[i].clone());
            }
            for &i in ib.iter().filter(|i| !common.contains(i)) {
                strict.push(fan.rays[i].neg());
            }
            if strict.is_empty() {
                // identical maximal cones
                return false;
            }
            let eqs: Vec<QVector> = common.iter().map(|&i| fan.rays[i].clone()).collect();
            if strict_interior_point(&strict, &eqs, dim).is_none() {
                return false;
            }
        }
    }
    true
}

/// The two small resolutions of the cone over the Segre product: lattice of
/// rank 2r-1 = Z^{2r} modulo the relation sum(e) = sum(f), with f_r mapped to
/// (1,...,1,-1,...,-1). The plus fan drops one e from each maximal cone, the
/// minus fan one f.
pub fn mukai_flop_fans(r: usize) -> (Fan, Fan) {
    assert!(r >= 2, "flop cone needs r >= 2");
    let dim = 2 * r - 1;
    let lattice = Lattice::standard(dim);
    let mut rays: Vec<QVector> = Vec::new();
    for i in 0..dim {
        let mut v = vec![0i64; dim];
        v[i] = 1;
        rays.push(QVector::from_ints(&v));
    }
    let mut last = vec![1i64; r];
    last.extend(std::iter::repeat(-1).take(r - 1));
    rays.push(QVector::from_ints(&last));
    // indices: e_1..e_r = 0..r-1, f_1..f_r = r..2r-1
    let e: Vec<usize> = (0..r).collect();
    let f: Vec<usize> = (r..2 * r).collect();
    let drop_one = |keep: &[usize], full: &[usize]| -> Vec<Vec<usize>> {
        keep.iter()
            .map(|&k| {
                let mut cone: Vec<usize> =
                    keep.iter().copied().filter(|&i| i != k).collect();
                cone.extend_from_slice(full);
                cone.sort_unstable();
                cone
            })
            .collect()
    };
    let plus = Fan {
        lattice: lattice.clone(),
        rays: rays.clone(),
        maximal_cones: drop_one(&e, &f),
    };
    let minus = Fan {
        lattice,
        rays,
        maximal_cones: drop_one(&f, &e),
    };
    (plus, minus)
}

fn third(a: i64, b: i64, c: i64, d: i64) -> QVector {
    QVector::from_ints(&[a, b, c, d]).scale(&Q::new(1, 3))
}

/// The six rays of the resolution of the order-3 cyclic quotient of C^4:
/// e_1, e_2, f_1, f_2 and the fractional v_1, v_2 with v_1 + v_2 integral.
pub fn c4z3_rays() -> Vec<QVector> {
    vec![
        QVector::from_ints(&[1, 0, 0, 0]),
        QVector::from_ints(&[0, 1, 0, 0]),
        QVector::from_ints(&[0, 0, 1, 0]),
        QVector::from_ints(&[0, 0, 0, 1]),
        third(1, 1, 2, 2),
        third(2, 2, 1, 1),
    ]
}

/// The overlattice N = Z^4 + Z v_1 in which the quotient is taken.
pub fn c4z3_lattice() -> Lattice {
    let mut gens = vec![
        QVector::from_ints(&[1, 0, 0, 0]),
        QVector::from_ints(&[0, 1, 0, 0]),
        QVector::from_ints(&[0, 0, 1, 0]),
        QVector::from_ints(&[0, 0, 0, 1]),
    ];
    gens.push(third(1, 1, 2, 2));
    Lattice::from_generators(4, &gens)
}

/// Volume of the slice of a simplicial cone by the hyperplane
/// sum(coords) = 1, up to the fixed dimensional constant: |det| of the rays
/// rescaled to the slice. This is the additive measure for tiling checks
/// (unimodularity is about the lattice determinant, which does not add up
/// across cones whose generators sit on different slices).
pub fn slice_volume(rays: &[QVector]) -> Q {
    let rows: Vec<QVector> = rays
        .iter()
        .map(|r| {
            let s = r.0.iter().fold(Q::zero(), |a, b| a + b.clone());
            r.scale(&s.recip())
        })
        .collect();
    QMatrix::from_rows(rows).det().abs()
}

/// All unimodular triangulations of the cone over e_1,e_2,f_1,f_2 using the
/// six rays, as sorted cone lists (deterministic order).
pub fn c4z3_triangulations() -> Vec<Vec<Vec<usize>>> {
    let lattice = c4z3_lattice();
    let rays = c4z3_rays();
    let total = slice_volume(&rays[..4]);
    let mut candidates: Vec<(Vec<usize>, Q)> = Vec::new();
    for a in 0..rays.len() {
        for b in a + 1..rays.len() {
            for c in b + 1..rays.len() {
                for d in c + 1..rays.len() {
                    let subset = [
                        rays[a].clone(),
                        rays[b].clone(),
                        rays[c].clone(),
                        rays[d].clone(),
                    ];
                    if matches!(is_unimodular(&subset, &lattice), Ok(true)) {
                        candidates.push((vec![a, b, c, d], slice_volume(&subset)));
                    }
                }
            }
        }
    }
    let mut found = Vec::new();
    let mut pick: Vec<usize> = Vec::new();
    search(&candidates, &total, 0, &mut pick, &mut |cones: &[usize]| {
        let fan = Fan {
            lattice: lattice.clone(),
            rays: rays.clone(),
            maximal_cones: cones.iter().map(|&i| candidates[i].0.clone()).collect(),
        };
        // interior-disjoint pieces with full slice volume tile the cone
        if validate_fan(&fan) {
            found.push(fan.maximal_cones.clone());
        }
    });
    found
}

/// Enumerate subsets of candidate cones whose slice volumes sum to `need`.
fn search(
    candidates: &[(Vec<usize>, Q)],
    need: &Q,
    from: usize,
    pick: &mut Vec<usize>,
    emit: &mut dyn FnMut(&[usize]),
) {
    if need.is_zero() {
        emit(pick);
        return;
    }
    if need.is_negative() {
        return;
    }
    for i in from..candidates.len() {
        pick.push(i);
        let rest = need.clone() - candidates[i].1.clone();
        search(candidates, &rest, i + 1, pick, emit);
        pick.pop();
    }
}

/// Canonical resolution fan: the lexicographically first unimodular
/// triangulation containing the v_1-v_2 edge.
pub fn c4z3_fan() -> Result<Fan, ToricError> {
    let has_edge = |cones: &Vec<Vec<usize>>| {
        cones.iter().any(|c| c.contains(&4) && c.contains(&5))
    };
    let cones = c4z3_triangulations()
        .into_iter()
        .find(has_edge)
        .ok_or(ToricError::NoUnimodularTriangulation)?;
    Ok(Fan {
        lattice: c4z3_lattice(),
        rays: c4z3_rays(),
        maximal_cones: cones,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qv(v: &[i64]) -> QVector {
        QVector::from_ints(v)
    }

    #[test]
    fn standard_basis_is_unimodular() {
        let l = Lattice::standard(4);
        let rays: Vec<QVector> = (0..4)
            .map(|i| {
                let mut v = vec![0i64; 4];
                v[i] = 1;
                qv(&v)
            })
            .collect();
        assert_eq!(is_unimodular(&rays, &l).unwrap(), true);
    }

    #[test]
    fn not_simplicial_error() {
        let l = Lattice::standard(3);
        let rays = vec![qv(&[1, 0, 0]), qv(&[0, 1, 0])];
        assert!(matches!(
            is_unimodular(&rays, &l),
            Err(ToricError::NotSimplicial(2, 3))
        ));
    }

    #[test]
    fn overlattice_index_three() {
        let n = c4z3_lattice();
        let n0 = Lattice::standard(4);
        let index = (n0.covolume() / n.covolume()).abs();
        assert_eq!(index, Q::from_int(3));
        // e,f basis has index 3 in N, hence is not unimodular there
        let rays = c4z3_rays();
        assert_eq!(is_unimodular(&rays[..4], &n).unwrap(), false);
        assert_eq!(lattice_volume(&rays[..4], &n).unwrap(), Q::from_int(3));
    }

    #[test]
    fn v2_is_an_integer_combination() {
        let n = c4z3_lattice();
        let rays = c4z3_rays();
        for r in &rays {
            assert!(n.contains(r));
            assert!(n.is_primitive(r).unwrap());
        }
        // v2 = (e1+e2+f1+f2) - v1
        let sum = rays[0].add(&rays[1]).add(&rays[2]).add(&rays[3]);
        assert_eq!(sum.sub(&rays[4]), rays[5]);
    }

    #[test]
    fn mukai_fans_r2() {
        let (plus, minus) = mukai_flop_fans(2);
        assert_eq!(plus.maximal_cones.len(), 2);
        assert_eq!(minus.maximal_cones.len(), 2);
        for fan in [&plus, &minus] {
            assert!(validate_fan(fan));
            assert!(fan.all_unimodular().unwrap());
        }
        assert_eq!(plus.rays, minus.rays);
        assert_ne!(plus.maximal_cones, minus.maximal_cones);
    }

    #[test]
    fn mukai_fans_r3_r4() {
        for r in [3usize, 4] {
            let (plus, minus) = mukai_flop_fans(r);
            assert_eq!(plus.maximal_cones.len(), r);
            assert_eq!(minus.maximal_cones.len(), r);
            for fan in [&plus, &minus] {
                assert!(validate_fan(fan));
                assert!(fan.all_unimodular().unwrap());
            }
        }
    }

    #[test]
    fn overlapping_cones_fail_validation() {
        let fan = Fan {
            lattice: Lattice::standard(2),
            rays: vec![qv(&[1, 0]), qv(&[0, 1]), qv(&[1, 1])],
            // second cone's interior overlaps the first
            maximal_cones: vec![vec![0, 1], vec![0, 2]],
        };
        assert!(!validate_fan(&fan));
    }

    #[test]
    fn resolution_fan_tiles_the_quotient_cone() {
        let fan = c4z3_fan().unwrap();
        assert!(validate_fan(&fan));
        assert!(fan.all_unimodular().unwrap());
        let total: Q = fan
            .maximal_cones
            .iter()
            .map(|c| {
                let rays: Vec<QVector> = c.iter().map(|&i| fan.rays[i].clone()).collect();
                slice_volume(&rays)
            })
            .fold(Q::zero(), |a, b| a + b);
        assert_eq!(total, slice_volume(&fan.rays[..4]));
        assert!(fan
            .maximal_cones
            .iter()
            .any(|c| c.contains(&4) && c.contains(&5)));
    }

    #[test]
    fn every_triangulation_uses_the_fractional_edge() {
        let all = c4z3_triangulations();
        assert!(!all.is_empty());
        for cones in &all {
            assert!(cones.iter().any(|c| c.contains(&4) && c.contains(&5)));
        }
    }
}
