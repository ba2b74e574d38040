//! Rational polyhedral cones with exact ray/facet descriptions.
//!
//! A `Cone` is canonicalized on construction: rays are the primitive extreme
//! rays (plus a +-pair per lineality direction when the cone contains lines),
//! sorted lexicographically, and facets are the irredundant supporting
//! halfspace normals (plus +-pairs spanning the orthogonal complement when the
//! cone is not full-dimensional). Membership is exactly `f . v >= 0` over all
//! facet rows. Equality of cones is equality of the canonical ray lists.

use crate::exactq::{qvec_from_bigints, QMatrix, QVector, Q};
use serde::{Deserialize, Serialize};

/// Hard cap on ambient dimension; the ray enumeration is combinatorial and
/// not meant for high dimensions.
pub const MAX_AMBIENT_DIM: usize = 12;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ConesError {
    #[error("cone is the origin; it has no relative interior ray")]
    EmptyCone,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

/// Bilinear pairing `<c, d> = c^T M d` between a "curve" space and a
/// "divisor" space.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pairing {
    pub matrix: QMatrix,
}

impl Pairing {
    pub fn new(matrix: QMatrix) -> Pairing {
        Pairing { matrix }
    }

    pub fn pair(&self, curve: &QVector, divisor: &QVector) -> Q {
        self.matrix.mul_vec(divisor).dot(curve)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cone {
    pub ambient_dim: usize,
    /// Canonical generators: primitive integer vectors, sorted.
    pub rays: Vec<QVector>,
    /// Canonical supporting halfspace normals: `f . v >= 0` for all v in cone.
    pub facets: Vec<QVector>,
}

/// Reduced row echelon form; depends only on the row space.
fn rref(m: &QMatrix) -> (Vec<QVector>, Vec<usize>) {
    let mut rows = m.rows.clone();
    let (nr, nc) = (rows.len(), m.ncols());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..nc {
        let Some(p) = (r..nr).find(|&i| !rows[i].0[c].is_zero()) else {
            continue;
        };
        rows.swap(p, r);
        let inv = rows[r].0[c].recip();
        rows[r] = rows[r].scale(&inv);
        for i in 0..nr {
            if i == r || rows[i].0[c].is_zero() {
                continue;
            }
            let f = rows[i].0[c].clone();
            rows[i] = rows[i].sub(&rows[r].scale(&f));
        }
        pivots.push(c);
        r += 1;
        if r == nr {
            break;
        }
    }
    rows.truncate(r);
    (rows, pivots)
}

/// Canonical basis of { x : A x = 0 }, from the RREF of A.
fn canonical_null_space(a: &QMatrix) -> Vec<QVector> {
    let nc = a.ncols();
    let (rows, pivots) = rref(a);
    let free: Vec<usize> = (0..nc).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut x = QVector::zeros(nc);
            x.0[f] = Q::one();
            for (r, &pc) in pivots.iter().enumerate() {
                x.0[pc] = -rows[r].0[f].clone();
            }
            x
        })
        .collect()
}

fn primitive_qvec(v: &QVector) -> QVector {
    qvec_from_bigints(&v.primitive())
}

/// All generators of { x : a . x >= 0 for all rows a }: the primitive extreme
/// rays, plus a +-pair per lineality direction. Complete and canonical: the
/// output depends only on the geometric cone, not on the presentation.
fn hrep_generators(ineqs: &[QVector], dim: usize) -> Vec<QVector> {
    assert!(dim <= MAX_AMBIENT_DIM, "ambient dimension above cap");
    let satisfies = |v: &QVector| ineqs.iter().all(|a| !a.dot(v).is_negative());

    let a = QMatrix::from_rows(ineqs.to_vec());
    let lineality = if ineqs.is_empty() {
        QMatrix::identity(dim).rows
    } else {
        canonical_null_space(&a)
    };
    let lin_dim = lineality.len();

    let mut out: Vec<QVector> = Vec::new();
    for l in &lineality {
        let p = primitive_qvec(l);
        out.push(p.neg());
        out.push(p);
    }

    if lin_dim < dim && !ineqs.is_empty() {
        // The pointed part lives in the row space of A; coordinates there are
        // canonical given the row space, and the reduced cone
        // { w : (A B^T) w >= 0 } is pointed and full-dimensional.
        let (basis, _) = rref(&a);
        let d = basis.len();
        let reduced: Vec<QVector> = ineqs
            .iter()
            .map(|row| QVector(basis.iter().map(|b| row.dot(b)).collect()))
            .collect();
        // Extreme rays lie on d-1 linearly independent tight constraints.
        let mut cands: Vec<QVector> = Vec::new();
        if d == 1 {
            cands.push(QVector(vec![Q::one()]));
            cands.push(QVector(vec![-Q::one()]));
        } else {
            use itertools::Itertools;
            for subset in (0..reduced.len()).combinations(d - 1) {
                let sub =
                    QMatrix::from_rows(subset.iter().map(|&i| reduced[i].clone()).collect());
                let ns = canonical_null_space(&sub);
                if ns.len() == 1 {
                    let v = primitive_qvec(&ns[0]);
                    cands.push(v.neg());
                    cands.push(v);
                }
            }
        }
        let mut seen = std::collections::BTreeSet::new();
        for w in cands {
            if !reduced.iter().all(|a| !a.dot(&w).is_negative()) {
                continue;
            }
            let tight: Vec<QVector> = reduced
                .iter()
                .filter(|a| a.dot(&w).is_zero())
                .cloned()
                .collect();
            let tight_rank = if tight.is_empty() {
                0
            } else {
                QMatrix::from_rows(tight).rank()
            };
            if tight_rank != d - 1 {
                continue;
            }
            // Lift to ambient coordinates.
            let mut amb = QVector::zeros(dim);
            for (k, b) in basis.iter().enumerate() {
                amb = amb.add(&b.scale(&w.0[k]));
            }
            let amb = primitive_qvec(&amb);
            debug_assert!(satisfies(&amb));
            if seen.insert(amb.0.clone()) {
                out.push(amb);
            }
        }
    }

    let mut seen = std::collections::BTreeSet::new();
    out.retain(|v| seen.insert(v.0.clone()));
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

impl Cone {
    /// Cone generated by the given rays (any rational generating set).
    pub fn from_rays(ambient_dim: usize, rays: &[QVector]) -> Cone {
        assert!(ambient_dim <= MAX_AMBIENT_DIM, "ambient dimension above cap");
        for r in rays {
            assert_eq!(r.len(), ambient_dim, "ray dimension mismatch");
        }
        let gens: Vec<QVector> = rays
            .iter()
            .filter(|r| !r.is_zero())
            .map(primitive_qvec)
            .collect();
        let facets = hrep_generators(&gens, ambient_dim);
        let rays = hrep_generators(&facets, ambient_dim);
        Cone {
            ambient_dim,
            rays,
            facets,
        }
    }

    /// Cone cut out by `a . x >= 0` over the given rows.
    pub fn from_halfspaces(ambient_dim: usize, ineqs: &[QVector]) -> Cone {
        assert!(ambient_dim <= MAX_AMBIENT_DIM, "ambient dimension above cap");
        for a in ineqs {
            assert_eq!(a.len(), ambient_dim, "halfspace dimension mismatch");
        }
        let rays = hrep_generators(ineqs, ambient_dim);
        let facets = hrep_generators(&rays, ambient_dim);
        Cone {
            ambient_dim,
            rays,
            facets,
        }
    }

    pub fn origin(ambient_dim: usize) -> Cone {
        Cone::from_rays(ambient_dim, &[])
    }

    pub fn contains(&self, v: &QVector) -> bool {
        assert_eq!(v.len(), self.ambient_dim, "point dimension mismatch");
        self.facets.iter().all(|f| !f.dot(v).is_negative())
    }

    pub fn dim(&self) -> usize {
        if self.rays.is_empty() {
            0
        } else {
            QMatrix::from_rows(self.rays.clone()).rank()
        }
    }

    /// Strictly convex (pointed): contains no line.
    pub fn is_strictly_convex(&self) -> bool {
        if self.facets.is_empty() {
            return self.ambient_dim == 0;
        }
        canonical_null_space(&QMatrix::from_rows(self.facets.clone())).is_empty()
    }

    /// Simplicial: the rays are linearly independent.
    pub fn is_simplicial(&self) -> bool {
        self.rays.is_empty() || QMatrix::from_rows(self.rays.clone()).rank() == self.rays.len()
    }

    /// Dual cone in the divisor space: { D : <r, D> >= 0 for all rays r }.
    pub fn dual(&self, pairing: &Pairing) -> Cone {
        let m = &pairing.matrix;
        assert_eq!(m.nrows(), self.ambient_dim, "pairing row dimension");
        let ineqs: Vec<QVector> = self
            .rays
            .iter()
            .map(|r| {
                // Row r^T M.
                QVector(
                    (0..m.ncols())
                        .map(|j| {
                            let mut s = Q::zero();
                            for i in 0..m.nrows() {
                                s += &r.0[i] * m.at(i, j);
                            }
                            s
                        })
                        .collect(),
                )
            })
            .collect();
        Cone::from_halfspaces(m.ncols(), &ineqs)
    }

    pub fn intersect(&self, other: &Cone) -> Result<Cone, ConesError> {
        if self.ambient_dim != other.ambient_dim {
            return Err(ConesError::DimensionMismatch(format!(
                "{} vs {}",
                self.ambient_dim, other.ambient_dim
            )));
        }
        let mut ineqs = self.facets.clone();
        ineqs.extend(other.facets.iter().cloned());
        Ok(Cone::from_halfspaces(self.ambient_dim, &ineqs))
    }

    /// A point in the relative interior: the sum of the canonical rays,
    /// taking one direction per lineality pair.
    pub fn relative_interior_point(&self) -> Result<QVector, ConesError> {
        if self.rays.is_empty() {
            return Err(ConesError::EmptyCone);
        }
        let raysset: std::collections::BTreeSet<Vec<Q>> =
            self.rays.iter().map(|r| r.0.clone()).collect();
        let mut sum = QVector::zeros(self.ambient_dim);
        let mut used: std::collections::BTreeSet<Vec<Q>> = Default::default();
        for r in &self.rays {
            if raysset.contains(&r.neg().0) && used.contains(&r.neg().0) {
                continue; // other half of a lineality pair already counted
            }
            used.insert(r.0.clone());
            sum = sum.add(r);
        }
        if sum.is_zero() {
            // All rays cancelled (pure lineality); any lineality direction works.
            sum = self.rays.last().unwrap().clone();
        }
        Ok(primitive_qvec(&sum))
    }
}

/// Exact LP: maximize the margin t subject to `a . x >= t` for all strict
/// rows, `e . x = 0` for all equality rows, and `t <= 1`. Returns a rational
/// x with positive margin iff the system { a . x > 0, e . x = 0 } is solvable.
/// Phase-2 simplex from the feasible origin, Bland's rule, exact arithmetic.
pub fn strict_interior_point(
    strict: &[QVector],
    equalities: &[QVector],
    dim: usize,
) -> Option<QVector> {
    // Eliminate equalities by restricting to their null space.
    let (reduced, basis): (Vec<QVector>, Option<Vec<QVector>>) = if equalities.is_empty() {
        (strict.to_vec(), None)
    } else {
        let ns = canonical_null_space(&QMatrix::from_rows(equalities.to_vec()));
        if ns.is_empty() {
            // Only x = 0 satisfies the equalities.
            return if strict.is_empty() {
                Some(QVector::zeros(dim))
            } else {
                None
            };
        }
        let red = strict
            .iter()
            .map(|a| QVector(ns.iter().map(|b| a.dot(b)).collect()))
            .collect();
        (red, Some(ns))
    };
    let d = basis.as_ref().map_or(dim, |b| b.len());
    if reduced.is_empty() {
        // Any point works; the origin is in the relative interior.
        return Some(QVector::zeros(dim));
    }

    let w = simplex_max_margin(&reduced, d)?;
    match basis {
        None => Some(w),
        Some(b) => {
            let mut x = QVector::zeros(dim);
            for (k, bk) in b.iter().enumerate() {
                x = x.add(&bk.scale(&w.0[k]));
            }
            Some(x)
        }
    }
}

/// Maximizes t subject to a_i . x - t >= 0 and t <= 1; returns x if the
/// optimum t is positive.
fn simplex_max_margin(ineqs: &[QVector], d: usize) -> Option<QVector> {
    let m = ineqs.len();
    // Columns: x+ (d), x- (d), t (1), slacks (m+1). Rows: m margin equations
    // (a.x - t - s_i = 0) then the cap (t + s_cap = 1).
    let ncols = 2 * d + 1 + m + 1;
    let t_col = 2 * d;
    let mut tab: Vec<Vec<Q>> = Vec::with_capacity(m + 1);
    let mut rhs: Vec<Q> = vec![Q::zero(); m + 1];
    for (i, a) in ineqs.iter().enumerate() {
        let mut row = vec![Q::zero(); ncols];
        for j in 0..d {
            row[j] = a.0[j].clone();
            row[d + j] = -&a.0[j];
        }
        row[t_col] = -Q::one();
        row[t_col + 1 + i] = -Q::one();
        tab.push(row);
    }
    let mut cap = vec![Q::zero(); ncols];
    cap[t_col] = Q::one();
    cap[t_col + 1 + m] = Q::one();
    tab.push(cap);
    rhs[m] = Q::one();

    // Basis: slack of each row. Slack columns have coefficient -1 in margin
    // rows; rescale those rows so basic columns are +1.
    for (i, row) in tab.iter_mut().enumerate().take(m) {
        for x in row.iter_mut() {
            *x = -x.clone();
        }
        let _ = i;
    }
    let mut basis: Vec<usize> = (0..=m).map(|i| t_col + 1 + i).collect();
    // Objective: maximize t. Reduced costs c_j - c_B B^-1 A_j; with the basis
    // all slacks (cost 0), reduced cost of t is 1.
    let mut obj = vec![Q::zero(); ncols];
    obj[t_col] = Q::one();

    loop {
        // Bland: entering column = smallest index with positive reduced cost.
        let Some(enter) = (0..ncols).find(|&j| obj[j].is_positive()) else {
            break; // optimal
        };
        // Ratio test over rows with positive pivot coefficient.
        let mut leave: Option<usize> = None;
        let mut best: Option<Q> = None;
        for i in 0..tab.len() {
            if !tab[i][enter].is_positive() {
                continue;
            }
            let ratio = &rhs[i] / &tab[i][enter];
            let better = match &best {
                None => true,
                Some(b) => {
                    &ratio < b || (&ratio == b && basis[i] < basis[leave.unwrap()])
                }
            };
            if better {
                best = Some(ratio);
                leave = Some(i);
            }
        }
        let Some(li) = leave else {
            // Unbounded in t is impossible (t <= 1); unbounded otherwise
            // cannot happen for the entering rule on this tableau, but guard.
            return None;
        };
        // Pivot.
        let piv = tab[li][enter].clone();
        let inv = piv.recip();
        for x in tab[li].iter_mut() {
            *x = &*x * &inv;
        }
        rhs[li] = &rhs[li] * &inv;
        for i in 0..tab.len() {
            if i == li || tab[i][enter].is_zero() {
                continue;
            }
            let f = tab[i][enter].clone();
            for j in 0..ncols {
                let delta = &f * &tab[li][j];
                tab[i][j] = &tab[i][j] - &delta;
            }
            let dr = &f * &rhs[li];
            rhs[i] = &rhs[i] - &dr;
        }
        if !obj[enter].is_zero() {
            let f = obj[enter].clone();
            for j in 0..ncols {
                let delta = &f * &tab[li][j];
                obj[j] = &obj[j] - &delta;
            }
        }
        basis[li] = enter;
    }

    // Optimal t value.
    let mut x = vec![Q::zero(); 2 * d + 1];
    for (i, &b) in basis.iter().enumerate() {
        if b < 2 * d + 1 {
            x[b] = rhs[i].clone();
        }
    }
    let t = x[t_col].clone();
    if !t.is_positive() {
        return None;
    }
    Some(QVector(
        (0..d).map(|j| &x[j] - &x[d + j]).collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactq::QVector;

    fn v(x: &[i64]) -> QVector {
        QVector::from_ints(x)
    }

    #[test]
    fn first_quadrant_round_trip() {
        let c = Cone::from_rays(2, &[v(&[1, 0]), v(&[0, 1]), v(&[1, 1])]);
        assert_eq!(c.rays, vec![v(&[0, 1]), v(&[1, 0])]);
        assert_eq!(c.facets.len(), 2);
        assert!(c.contains(&v(&[3, 5])));
        assert!(!c.contains(&v(&[-1, 2])));
        assert!(c.is_strictly_convex());
        assert!(c.is_simplicial());
        assert_eq!(c.dim(), 2);
    }

    #[test]
    fn halfspace_to_rays() {
        let c = Cone::from_halfspaces(2, &[v(&[1, 0]), v(&[0, 1])]);
        assert_eq!(c.rays, vec![v(&[0, 1]), v(&[1, 0])]);
        // Same cone built two ways is equal.
        let c2 = Cone::from_rays(2, &[v(&[2, 0]), v(&[0, 3])]);
        assert_eq!(c, c2);
    }

    #[test]
    fn non_simplicial_cone() {
        // Square cone over 4 rays in R^3.
        let c = Cone::from_rays(
            3,
            &[v(&[1, 1, 1]), v(&[-1, 1, 1]), v(&[-1, -1, 1]), v(&[1, -1, 1])],
        );
        assert_eq!(c.rays.len(), 4);
        assert_eq!(c.facets.len(), 4);
        assert!(!c.is_simplicial());
        assert!(c.is_strictly_convex());
        // Redundant generator is dropped.
        let c2 = Cone::from_rays(
            3,
            &[
                v(&[1, 1, 1]),
                v(&[-1, 1, 1]),
                v(&[-1, -1, 1]),
                v(&[1, -1, 1]),
                v(&[0, 0, 1]),
            ],
        );
        assert_eq!(c, c2);
    }

    #[test]
    fn whole_line_is_not_strictly_convex() {
        let c = Cone::from_rays(1, &[v(&[1]), v(&[-1])]);
        assert!(!c.is_strictly_convex());
        assert!(c.contains(&v(&[-7])));
        // Dual of the origin in R^1 under the identity pairing is the line.
        let origin = Cone::origin(1);
        assert!(origin.is_strictly_convex());
        let dual = origin.dual(&Pairing::new(QMatrix::identity(1)));
        assert!(!dual.is_strictly_convex());
        assert!(dual.contains(&v(&[5])) && dual.contains(&v(&[-5])));
    }

    #[test]
    fn half_plane_lineality() {
        // x >= 0 in R^2: lineality along y.
        let c = Cone::from_halfspaces(2, &[v(&[1, 0])]);
        assert!(!c.is_strictly_convex());
        assert!(c.contains(&v(&[0, -9])));
        assert!(c.contains(&v(&[4, 2])));
        assert!(!c.contains(&v(&[-1, 0])));
        let p = c.relative_interior_point().unwrap();
        assert!(p.0[0].is_positive());
    }

    #[test]
    fn lower_dimensional_cone() {
        // Single ray in R^3.
        let c = Cone::from_rays(3, &[v(&[1, 2, 3])]);
        assert_eq!(c.dim(), 1);
        assert!(c.contains(&v(&[2, 4, 6])));
        assert!(!c.contains(&v(&[1, 2, 4])));
        assert!(!c.contains(&v(&[-1, -2, -3])));
        assert!(c.is_strictly_convex());
        assert!(c.is_simplicial());
    }

    #[test]
    fn dual_of_dual_under_identity() {
        let p = Pairing::new(QMatrix::identity(3));
        let c = Cone::from_rays(3, &[v(&[1, 0, 0]), v(&[1, 1, 0]), v(&[1, 1, 1])]);
        let dd = c.dual(&p).dual(&p);
        assert_eq!(c, dd);
    }

    #[test]
    fn dual_under_nontrivial_pairing() {
        // <c, d> = c^T M d with M = -Cartan(A1): dual of the ray e_0 under M
        // is { d : -2 d >= 0 }.
        let m = QMatrix::from_ints(&[&[-2]]);
        let c = Cone::from_rays(1, &[v(&[1])]);
        let d = c.dual(&Pairing::new(m));
        assert_eq!(d.rays, vec![v(&[-1])]);
    }

    #[test]
    fn intersection() {
        let a = Cone::from_halfspaces(2, &[v(&[1, 0])]);
        let b = Cone::from_halfspaces(2, &[v(&[0, 1])]);
        let c = a.intersect(&b).unwrap();
        assert_eq!(c, Cone::from_halfspaces(2, &[v(&[1, 0]), v(&[0, 1])]));
        let bad = Cone::origin(3);
        assert!(a.intersect(&bad).is_err());
    }

    #[test]
    fn origin_cone() {
        let c = Cone::from_halfspaces(1, &[v(&[1]), v(&[-1])]);
        assert!(c.rays.is_empty());
        assert_eq!(c.relative_interior_point(), Err(ConesError::EmptyCone));
        assert!(c.contains(&v(&[0])));
        assert!(!c.contains(&v(&[1])));
        assert!(c.is_strictly_convex());
        assert!(c.is_simplicial());
    }

    #[test]
    fn relative_interior_in_interior() {
        let c = Cone::from_rays(
            3,
            &[v(&[1, 1, 1]), v(&[-1, 1, 1]), v(&[-1, -1, 1]), v(&[1, -1, 1])],
        );
        let p = c.relative_interior_point().unwrap();
        for f in &c.facets {
            assert!(f.dot(&p).is_positive(), "not strictly inside facet {:?}", f);
        }
    }

    #[test]
    fn json_shape() {
        let c = Cone::from_rays(2, &[v(&[1, 0]), v(&[0, 1])]);
        let j = serde_json::to_value(&c).unwrap();
        assert_eq!(j["ambient_dim"], 2);
        assert!(j["rays"].is_array() && j["facets"].is_array());
        let back: Cone = serde_json::from_value(j).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn lp_finds_interior_point() {
        // Interior of the first quadrant.
        let x = strict_interior_point(&[v(&[1, 0]), v(&[0, 1])], &[], 2).unwrap();
        assert!(x.0[0].is_positive() && x.0[1].is_positive());
        // Infeasible: x > 0 and -x > 0.
        assert!(strict_interior_point(&[v(&[1]), v(&[-1])], &[], 1).is_none());
        // Equality restriction: x + y = 0, x - y > 0.
        let x = strict_interior_point(&[v(&[1, -1])], &[v(&[1, 1])], 2).unwrap();
        assert_eq!(x.0[0], -x.0[1].clone());
        assert!(x.0[0].is_positive());
    }

    #[test]
    fn lp_narrow_cone() {
        // 100 x >= 99 y, y >= 0 and x <= y (i.e. y - x >= 0) leaves a sliver.
        let x = strict_interior_point(&[v(&[100, -99]), v(&[0, 1]), v(&[-1, 1])], &[], 2).unwrap();
        assert!((&x.0[0] * &Q::from_int(100)).is_positive());
        assert!((Q::from_int(100) * x.0[0].clone() - Q::from_int(99) * x.0[1].clone()).is_positive());
    }

    #[test]
    fn lp_lower_dim_infeasible() {
        // x >= t and -x >= t forces t <= 0: no strict point.
        assert!(strict_interior_point(&[v(&[1, 0]), v(&[-1, 0])], &[], 2).is_none());
    }
}
