//! Finite root systems of types A-G: Cartan matrices, positive roots,
//! Weyl dimension polynomials, and diagram foldings.
//!
//! Conventions (fixed throughout the crate):
//! * Cartan entry `c[i][j] = <alpha_j, alpha_i^vee> = 2(alpha_i,alpha_j)/(alpha_i,alpha_i)`.
//! * Node numbering: A_n is the chain 1..n. B_n/C_n are chains with the
//!   short/long root last. D_n puts the two fork legs first (nodes 1,2 both
//!   attach to node 3, then the chain 3..n). E_n uses the chain
//!   1-3-4-5-6(-7-8) with node 2 hanging off node 4.
//! * Roots are stored as integer coordinate vectors in the simple-root basis;
//!   weights as rational vectors in the fundamental-weight basis.

use crate::exactq::{Q, QMatrix, QVector};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum RootsysError {
    #[error("rank {1} is not valid for family {0:?}")]
    BadRank(Family, usize),
    #[error("map is not a diagram automorphism")]
    NotAnAutomorphism,
    #[error("folding requires a simply-laced system")]
    NotSimplyLaced,
    #[error("orbit order must list one representative per orbit: {0}")]
    BadOrbitOrder(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
}

impl std::str::FromStr for Family {
    type Err = String;
    fn from_str(s: &str) -> Result<Family, String> {
        match s {
            "A" | "a" => Ok(Family::A),
            "B" | "b" => Ok(Family::B),
            "C" | "c" => Ok(Family::C),
            "D" | "d" => Ok(Family::D),
            "E" | "e" => Ok(Family::E),
            "F" | "f" => Ok(Family::F),
            "G" | "g" => Ok(Family::G),
            other => Err(format!("unknown family {:?}", other)),
        }
    }
}

/// Integer Cartan matrix for the given family and rank.
pub fn cartan_matrix(family: Family, rank: usize) -> Result<QMatrix, RootsysError> {
    let bad = || RootsysError::BadRank(family, rank);
    let chain = |n: usize| -> Vec<Vec<i64>> {
        let mut m = vec![vec![0i64; n]; n];
        for i in 0..n {
            m[i][i] = 2;
            if i + 1 < n {
                m[i][i + 1] = -1;
                m[i + 1][i] = -1;
            }
        }
        m
    };
    let m = match family {
        Family::A => {
            if rank == 0 {
                return Err(bad());
            }
            chain(rank)
        }
        Family::B => {
            if rank < 2 {
                return Err(bad());
            }
            let mut m = chain(rank);
            m[rank - 1][rank - 2] = -2; // last root short
            m
        }
        Family::C => {
            if rank < 2 {
                return Err(bad());
            }
            let mut m = chain(rank);
            m[rank - 2][rank - 1] = -2; // last root long
            m
        }
        Family::D => {
            if rank < 3 {
                return Err(bad());
            }
            // Fork legs 0 and 1 both attach to 2; chain 2..rank-1.
            let n = rank;
            let mut m = vec![vec![0i64; n]; n];
            for i in 0..n {
                m[i][i] = 2;
            }
            let mut link = |a: usize, b: usize| {
                m[a][b] = -1;
                m[b][a] = -1;
            };
            link(0, 2);
            link(1, 2);
            for i in 2..n - 1 {
                link(i, i + 1);
            }
            m
        }
        Family::E => {
            if !(6..=8).contains(&rank) {
                return Err(bad());
            }
            let n = rank;
            let mut m = vec![vec![0i64; n]; n];
            for i in 0..n {
                m[i][i] = 2;
            }
            let mut link = |a: usize, b: usize| {
                m[a][b] = -1;
                m[b][a] = -1;
            };
            link(0, 2);
            link(1, 3);
            for i in 2..n - 1 {
                link(i, i + 1);
            }
            m
        }
        Family::F => {
            if rank != 4 {
                return Err(bad());
            }
            vec![
                vec![2, -1, 0, 0],
                vec![-1, 2, -1, 0],
                vec![0, -2, 2, -1],
                vec![0, 0, -1, 2],
            ]
        }
        Family::G => {
            if rank != 2 {
                return Err(bad());
            }
            vec![vec![2, -1], vec![-3, 2]]
        }
    };
    Ok(QMatrix::from_rows(
        m.into_iter().map(|r| QVector::from_ints(&r)).collect(),
    ))
}

/// A root system together with its symmetrizer d (smallest positive integers
/// with d_i c_ij = d_j c_ji, so that diag(d) * C is the matrix of inner
/// products (alpha_i, alpha_j) up to global scale).
#[derive(Debug, Clone)]
pub struct RootSystem {
    pub family: Family,
    pub rank: usize,
    pub cartan: QMatrix,
    pub symmetrizer: Vec<Q>,
}

impl RootSystem {
    pub fn new(family: Family, rank: usize) -> Result<RootSystem, RootsysError> {
        let cartan = cartan_matrix(family, rank)?;
        let symmetrizer = symmetrizer_of(&cartan).expect("built-in Cartan is symmetrizable");
        Ok(RootSystem {
            family,
            rank,
            cartan,
            symmetrizer,
        })
    }

    pub fn is_simply_laced(&self) -> bool {
        matches!(self.family, Family::A | Family::D | Family::E)
    }

    /// `<beta, alpha_i^vee>` for a root beta in simple-root coordinates.
    fn coroot_eval(&self, beta: &[i64], i: usize) -> i64 {
        let mut s = 0i64;
        for (j, &b) in beta.iter().enumerate() {
            // Cartan entries are small integers.
            let c = self.cartan.at(i, j).to_bigint();
            let c: i64 = (&c).try_into().expect("cartan entry fits in i64");
            s += b * c;
        }
        s
    }

    /// All positive roots, in simple-root coordinates, sorted by height then
    /// lexicographically. Built by the usual root-string closure: beta+alpha_i
    /// is a root iff p - <beta, alpha_i^vee> > 0 where p is the length of the
    /// descending alpha_i-string through beta.
    pub fn positive_roots(&self) -> Vec<Vec<i64>> {
        use std::collections::BTreeSet;
        let n = self.rank;
        let mut set: BTreeSet<Vec<i64>> = BTreeSet::new();
        let mut level: Vec<Vec<i64>> = Vec::new();
        for i in 0..n {
            let mut e = vec![0i64; n];
            e[i] = 1;
            set.insert(e.clone());
            level.push(e);
        }
        while !level.is_empty() {
            let mut next = Vec::new();
            for beta in &level {
                for i in 0..n {
                    // Descend: p = max k with beta - k alpha_i a root.
                    let mut p = 0i64;
                    let mut down = beta.clone();
                    loop {
                        down[i] -= 1;
                        if down[i] >= 0 && set.contains(&down) {
                            p += 1;
                        } else {
                            break;
                        }
                    }
                    if p - self.coroot_eval(beta, i) > 0 {
                        let mut up = beta.clone();
                        up[i] += 1;
                        if set.insert(up.clone()) {
                            next.push(up);
                        }
                    }
                }
            }
            level = next;
        }
        let mut roots: Vec<Vec<i64>> = set.into_iter().collect();
        roots.sort_by_key(|r| (r.iter().sum::<i64>(), r.clone()));
        roots
    }

    pub fn num_positive_roots(&self) -> usize {
        self.positive_roots().len()
    }

    /// Inner product (v, alpha) of a weight v (fundamental-weight coordinates)
    /// with a root alpha (simple-root coordinates): sum_j v_j a_j d_j.
    pub fn weight_root_pairing(&self, v: &[Q], alpha: &[i64]) -> Q {
        assert_eq!(v.len(), self.rank);
        assert_eq!(alpha.len(), self.rank);
        let mut s = Q::zero();
        for j in 0..self.rank {
            s += &(&v[j] * &Q::from_int(alpha[j])) * &self.symmetrizer[j];
        }
        s
    }

    /// Inner product (alpha, beta) of two roots in simple-root coordinates.
    pub fn root_root_pairing(&self, alpha: &[i64], beta: &[i64]) -> Q {
        // (alpha, beta) = sum_ij a_i b_j d_i c_ij.
        let mut s = Q::zero();
        for i in 0..self.rank {
            if alpha[i] == 0 {
                continue;
            }
            for j in 0..self.rank {
                if beta[j] == 0 {
                    continue;
                }
                let t = &Q::from_int(alpha[i] * beta[j]) * &self.symmetrizer[i];
                s += t * self.cartan.at(i, j).clone();
            }
        }
        s
    }

    /// `alpha^vee(v) = 2 (alpha, v) / (alpha, alpha)` for a weight v.
    pub fn coroot_pairing(&self, alpha: &[i64], v: &[Q]) -> Q {
        let num = self.weight_root_pairing(v, alpha);
        let den = self.root_root_pairing(alpha, alpha);
        (Q::from_int(2) * num) / den
    }

    /// Sum of the positive roots, in fundamental-weight coordinates.
    /// Always the vector (2,...,2), i.e. twice the sum of fundamental weights.
    pub fn rho(&self) -> Vec<Q> {
        let mut total = vec![0i64; self.rank];
        for r in self.positive_roots() {
            for (t, x) in total.iter_mut().zip(&r) {
                *t += x;
            }
        }
        (0..self.rank)
            .map(|i| Q::from_int(self.coroot_eval(&total, i)))
            .collect()
    }

    /// Weyl dimension polynomial
    /// `H(lambda) = prod_{alpha>0} (lambda + rho/2, alpha) / (rho/2, alpha)`,
    /// evaluated exactly at a weight in fundamental-weight coordinates.
    /// `rho/2` has coordinates (1,...,1). For dominant integral lambda this is
    /// the dimension of the irreducible representation; for arbitrary rational
    /// lambda it is the polynomial value.
    pub fn weyl_dim(&self, lambda: &[Q]) -> Q {
        assert_eq!(lambda.len(), self.rank);
        let delta: Vec<Q> = vec![Q::one(); self.rank];
        let shifted: Vec<Q> = lambda.iter().zip(&delta).map(|(l, d)| l + d).collect();
        let mut h = Q::one();
        for alpha in self.positive_roots() {
            let num = self.weight_root_pairing(&shifted, &alpha);
            let den = self.weight_root_pairing(&delta, &alpha);
            h = h * (num / den);
        }
        h
    }

    /// Checks the duality `H(-lambda - rho) = (-1)^{#R+} H(lambda)`.
    pub fn serre_dual_check(&self, lambda: &[Q]) -> bool {
        let rho = self.rho();
        let neg: Vec<Q> = lambda.iter().zip(&rho).map(|(l, r)| -&(l + r)).collect();
        let lhs = self.weyl_dim(&neg);
        let rhs = self.weyl_dim(lambda);
        let n_pos = self.num_positive_roots();
        if n_pos % 2 == 0 {
            lhs == rhs
        } else {
            lhs == -rhs
        }
    }
}

/// Smallest positive integer symmetrizer of a Cartan matrix, if one exists.
fn symmetrizer_of(cartan: &QMatrix) -> Option<Vec<Q>> {
    let n = cartan.nrows();
    let mut d: Vec<Option<Q>> = vec![None; n];
    // Propagate d_i c_ij = d_j c_ji along diagram edges, component by component.
    for start in 0..n {
        if d[start].is_some() {
            continue;
        }
        d[start] = Some(Q::one());
        let mut stack = vec![start];
        while let Some(i) = stack.pop() {
            for j in 0..n {
                if i == j || cartan.at(i, j).is_zero() {
                    continue;
                }
                let want = &(d[i].clone().unwrap() * cartan.at(i, j).clone()) / cartan.at(j, i);
                match &d[j] {
                    None => {
                        d[j] = Some(want);
                        stack.push(j);
                    }
                    Some(have) => {
                        if have != &want {
                            return None;
                        }
                    }
                }
            }
        }
    }
    let d: Vec<Q> = d.into_iter().map(|x| x.unwrap()).collect();
    // Clear to smallest positive integers.
    let prim = QVector(d).primitive();
    Some(prim.into_iter().map(Q::from_bigint).collect())
}

/// Folds a simply-laced root system along a diagram automorphism.
///
/// `auto` is a node permutation (0-based); orbits are those of the cyclic
/// group it generates. `orbit_order` lists one representative per orbit and
/// fixes the row/column order of the result. Entry (a,b) of the folded matrix
/// is the inner product of the representative of orbit a with the sum of the
/// simple roots in orbit b.
pub fn fold(
    rs: &RootSystem,
    auto: &[usize],
    orbit_order: &[usize],
) -> Result<QMatrix, RootsysError> {
    if !rs.is_simply_laced() {
        return Err(RootsysError::NotSimplyLaced);
    }
    let n = rs.rank;
    if auto.len() != n {
        return Err(RootsysError::NotAnAutomorphism);
    }
    let mut seen = vec![false; n];
    for &img in auto {
        if img >= n || seen[img] {
            return Err(RootsysError::NotAnAutomorphism);
        }
        seen[img] = true;
    }
    for i in 0..n {
        for j in 0..n {
            if rs.cartan.at(i, j) != rs.cartan.at(auto[i], auto[j]) {
                return Err(RootsysError::NotAnAutomorphism);
            }
        }
    }
    // Orbits of the cyclic group generated by auto.
    let mut orbit_of = vec![usize::MAX; n];
    let mut orbits: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        if orbit_of[i] != usize::MAX {
            continue;
        }
        let id = orbits.len();
        let mut orb = Vec::new();
        let mut k = i;
        while orbit_of[k] == usize::MAX {
            orbit_of[k] = id;
            orb.push(k);
            k = auto[k];
        }
        orbits.push(orb);
    }
    if orbit_order.len() != orbits.len() {
        return Err(RootsysError::BadOrbitOrder(format!(
            "expected {} representatives, got {}",
            orbits.len(),
            orbit_order.len()
        )));
    }
    let mut used = vec![false; orbits.len()];
    for &rep in orbit_order {
        if rep >= n || used[orbit_of[rep]] {
            return Err(RootsysError::BadOrbitOrder(format!(
                "bad representative {}",
                rep
            )));
        }
        used[orbit_of[rep]] = true;
    }
    let m = orbit_order.len();
    let mut out = vec![vec![Q::zero(); m]; m];
    for (a, &ra) in orbit_order.iter().enumerate() {
        for (b, &rb) in orbit_order.iter().enumerate() {
            // Simply-laced: the Cartan matrix is the inner product matrix.
            let mut s = Q::zero();
            for &k in &orbits[orbit_of[rb]] {
                s += rs.cartan.at(ra, k).clone();
            }
            out[a][b] = s;
        }
    }
    Ok(QMatrix::from_rows(out.into_iter().map(QVector).collect()))
}

/// The standard involution of the diagram: reversal for A_n, fork-leg swap
/// for D_n, the nontrivial symmetry for E_6. Identity has no involution.
pub fn involution(family: Family, rank: usize) -> Result<Vec<usize>, RootsysError> {
    match family {
        Family::A => {
            if rank == 0 {
                return Err(RootsysError::BadRank(family, rank));
            }
            Ok((0..rank).map(|i| rank - 1 - i).collect())
        }
        Family::D => {
            if rank < 3 {
                return Err(RootsysError::BadRank(family, rank));
            }
            let mut p: Vec<usize> = (0..rank).collect();
            p.swap(0, 1);
            Ok(p)
        }
        Family::E => {
            if rank != 6 {
                return Err(RootsysError::BadRank(family, rank));
            }
            Ok(vec![5, 1, 4, 3, 2, 0])
        }
        _ => Err(RootsysError::NotSimplyLaced),
    }
}

/// Order-3 rotation of the D_4 diagram (legs 0 -> 1 -> 3 -> 0, node 2 fixed).
pub fn d4_triality() -> Vec<usize> {
    vec![1, 3, 2, 0]
}

/// Tridiagonal matrix with diagonal (1, 2, ..., 2) and off-diagonal -1;
/// the Gram matrix obtained by folding A_{2n} along its involution with the
/// innermost orbit first.
pub fn u_matrix(n: usize) -> QMatrix {
    assert!(n >= 1);
    let mut m = vec![vec![0i64; n]; n];
    for i in 0..n {
        m[i][i] = if i == 0 { 1 } else { 2 };
        if i + 1 < n {
            m[i][i + 1] = -1;
            m[i + 1][i] = -1;
        }
    }
    QMatrix::from_rows(m.into_iter().map(|r| QVector::from_ints(&r)).collect())
}

/// Orbit order that sends A_{2n+1} to B_{n+1} under the involution:
/// outer pairs inward, fixed center last.
pub fn a_odd_orbit_order(rank: usize) -> Vec<usize> {
    assert!(rank % 2 == 1 && rank >= 3);
    let half = rank / 2;
    let mut v: Vec<usize> = (0..half).collect();
    v.push(half);
    v
}

/// Orbit order that sends A_{2n} to U_n under the involution:
/// innermost pair first, moving outward.
pub fn a_even_orbit_order(rank: usize) -> Vec<usize> {
    assert!(rank % 2 == 0 && rank >= 2);
    (0..rank / 2).rev().collect()
}
