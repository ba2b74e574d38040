//! Movable-cone chamber structure for the resolution model with curve classes
//! e_0, ..., e_n paired against divisors E_0, ..., E_n by minus the Cartan
//! matrix of A_1 + A_n (e_0 is the A_1 factor).
//!
//! The flopping classes are lambda_ij = e_0 - (e_i + ... + e_j) for
//! 1 <= i <= j <= n; each chamber of Mov is cut out by a sign choice on the
//! lambda_ij. A superincreasing parameter vector beta gives the straight-line
//! walk D_t = D_0 - (t/2) E_0 which crosses the hyperplane lambda_ij^perp at
//! t = gamma_ij = beta_i + ... + beta_j, visiting n(n+1)/2 + 1 chambers.

use crate::cones::{strict_interior_point, Cone, Pairing};
use crate::exactq::{QMatrix, QVector, Q};
use crate::rootsys::{cartan_matrix, Family};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ChambersError {
    #[error("beta must be positive and superincreasing: {0}")]
    InvalidBeta(String),
    #[error("chamber enumeration is limited to n <= {0}")]
    ScaleLimit(usize),
    #[error("walk thresholds are not distinct")]
    DegenerateWalk,
}

pub const MAX_N: usize = 6;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FloppingClass {
    pub i: usize,
    pub j: usize,
    /// e_0 - (e_i + ... + e_j) in curve coordinates.
    pub class: QVector,
}

#[derive(Debug, Clone)]
pub struct ResolutionModel {
    pub n: usize,
    pub pairing: Pairing,
}

impl ResolutionModel {
    pub fn new(n: usize) -> ResolutionModel {
        assert!(n >= 1, "n must be at least 1");
        let an = cartan_matrix(Family::A, n).expect("A_n");
        let d = n + 1;
        let mut rows = vec![QVector::zeros(d); d];
        rows[0].0[0] = Q::from_int(-2);
        for i in 0..n {
            for j in 0..n {
                rows[i + 1].0[j + 1] = -an.at(i, j).clone();
            }
        }
        ResolutionModel {
            n,
            pairing: Pairing::new(QMatrix::from_rows(rows)),
        }
    }

    pub fn dim(&self) -> usize {
        self.n + 1
    }

    /// Basis curve class e_alpha.
    pub fn e(&self, alpha: usize) -> QVector {
        assert!(alpha <= self.n);
        let mut v = QVector::zeros(self.dim());
        v.0[alpha] = Q::one();
        v
    }

    pub fn lambda(&self, i: usize, j: usize) -> QVector {
        assert!(1 <= i && i <= j && j <= self.n);
        let mut v = self.e(0);
        for k in i..=j {
            v.0[k] = -Q::one();
        }
        v
    }

    /// Row of the pairing evaluated in the divisor space: the linear form
    /// D -> <c, D> as a covector on divisors.
    fn form(&self, c: &QVector) -> QVector {
        let m = &self.pairing.matrix;
        QVector(
            (0..m.ncols())
                .map(|j| {
                    let mut s = Q::zero();
                    for i in 0..m.nrows() {
                        s += &c.0[i] * m.at(i, j);
                    }
                    s
                })
                .collect(),
        )
    }
}

pub fn flopping_classes(model: &ResolutionModel) -> Vec<FloppingClass> {
    let mut out = Vec::new();
    for i in 1..=model.n {
        for j in i..=model.n {
            out.push(FloppingClass {
                i,
                j,
                class: model.lambda(i, j),
            });
        }
    }
    out
}

/// Movable cone in divisor coordinates: { D : <e_alpha, D> >= 0 for all alpha }.
pub fn mov_cone(model: &ResolutionModel) -> Cone {
    let ineqs: Vec<QVector> = (0..=model.n).map(|a| model.form(&model.e(a))).collect();
    Cone::from_halfspaces(model.dim(), &ineqs)
}

/// A full-dimensional chamber of Mov, recorded by the sign of every flopping
/// class on it, an integer interior witness, and the curve classes whose
/// hyperplanes support its facets (inward-pointing: nonnegative on the
/// chamber).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chamber {
    pub signs: BTreeMap<(usize, usize), i8>,
    pub witness: QVector,
    pub walls: Vec<QVector>,
}

impl Chamber {
    /// Builds a chamber from an interior divisor; the witness must be strictly
    /// off every lambda hyperplane and strictly inside Mov.
    fn from_witness(model: &ResolutionModel, witness: QVector) -> Chamber {
        let flops = flopping_classes(model);
        let mut signs = BTreeMap::new();
        // Inequality rows that cut out the chamber.
        let mut rows: Vec<QVector> = Vec::new();
        let mut labels: Vec<QVector> = Vec::new();
        for a in 0..=model.n {
            let e = model.e(a);
            let f = model.form(&e);
            let val = f.dot(&witness);
            assert!(val.is_positive(), "witness not interior to Mov");
            rows.push(f);
            labels.push(e);
        }
        for fc in &flops {
            let f = model.form(&fc.class);
            let val = f.dot(&witness);
            let s = val.signum();
            assert!(s != 0, "witness on a flopping hyperplane");
            signs.insert((fc.i, fc.j), s as i8);
            if s > 0 {
                rows.push(f);
                labels.push(fc.class.clone());
            } else {
                rows.push(f.neg());
                labels.push(fc.class.neg());
            }
        }
        // A row is a facet iff the chamber stays full-dimensional inside it.
        let dim = model.dim();
        let mut walls = Vec::new();
        for k in 0..rows.len() {
            let others: Vec<QVector> = rows
                .iter()
                .enumerate()
                .filter(|(l, _)| *l != k)
                .map(|(_, r)| r.clone())
                .collect();
            if strict_interior_point(&others, &[rows[k].clone()], dim).is_some() {
                walls.push(labels[k].clone());
            }
        }
        Chamber {
            signs,
            witness,
            walls,
        }
    }
}

fn integer_witness(x: &QVector) -> QVector {
    crate::exactq::qvec_from_bigints(&x.primitive())
}

/// All chambers of Mov, by incremental halfspace splitting. Exponential in
/// the number of flopping classes; guarded by `MAX_N`.
pub fn enumerate_chambers(model: &ResolutionModel) -> Result<Vec<Chamber>, ChambersError> {
    if model.n > MAX_N {
        return Err(ChambersError::ScaleLimit(MAX_N));
    }
    let dim = model.dim();
    let mov_rows: Vec<QVector> = (0..=model.n).map(|a| model.form(&model.e(a))).collect();
    let mut regions: Vec<Vec<QVector>> = vec![mov_rows];
    for fc in flopping_classes(model) {
        let f = model.form(&fc.class);
        let mut next = Vec::new();
        for r in regions {
            for half in [f.clone(), f.neg()] {
                let mut r2 = r.clone();
                r2.push(half);
                if strict_interior_point(&r2, &[], dim).is_some() {
                    next.push(r2);
                }
            }
        }
        regions = next;
    }
    Ok(regions
        .into_iter()
        .map(|rows| {
            let x = strict_interior_point(&rows, &[], dim).expect("region is full-dimensional");
            Chamber::from_witness(model, integer_witness(&x))
        })
        .collect())
}

/// The chamber where every flopping class is negative.
pub fn hilb_chow_chamber(model: &ResolutionModel) -> Chamber {
    let dim = model.dim();
    let mut rows: Vec<QVector> = (0..=model.n).map(|a| model.form(&model.e(a))).collect();
    for fc in flopping_classes(model) {
        rows.push(model.form(&fc.class).neg());
    }
    let x = strict_interior_point(&rows, &[], dim).expect("chamber is nonempty");
    Chamber::from_witness(model, integer_witness(&x))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WalkConfig {
    pub n: usize,
    pub beta: Vec<Q>,
}

impl WalkConfig {
    /// beta must be positive and superincreasing:
    /// beta_1 + ... + beta_{i-1} < beta_i.
    pub fn new(n: usize, beta: Vec<Q>) -> Result<WalkConfig, ChambersError> {
        if beta.len() != n {
            return Err(ChambersError::InvalidBeta(format!(
                "expected {} entries, got {}",
                n,
                beta.len()
            )));
        }
        let mut partial = Q::zero();
        for (i, b) in beta.iter().enumerate() {
            if !b.is_positive() {
                return Err(ChambersError::InvalidBeta(format!(
                    "beta_{} is not positive",
                    i + 1
                )));
            }
            if !(b > &partial) {
                return Err(ChambersError::InvalidBeta(format!(
                    "beta_{} must exceed the sum of its predecessors",
                    i + 1
                )));
            }
            partial += b.clone();
        }
        Ok(WalkConfig { n, beta })
    }

    /// Powers of two: 1, 2, 4, ...
    pub fn default_beta(n: usize) -> WalkConfig {
        let beta = (0..n).map(|i| Q::from_int(1i64 << i)).collect();
        WalkConfig::new(n, beta).expect("powers of two are superincreasing")
    }
}

/// gamma_ij = beta_i + ... + beta_j, keyed by (i, j).
pub fn gamma_table(config: &WalkConfig) -> BTreeMap<(usize, usize), Q> {
    let mut out = BTreeMap::new();
    for i in 1..=config.n {
        let mut s = Q::zero();
        for j in i..=config.n {
            s += config.beta[j - 1].clone();
            out.insert((i, j), s.clone());
        }
    }
    out
}

/// The base divisor D_0 of the walk: <e_0, D_0> = 0 and <e_i, D_0> = beta_i.
pub fn base_divisor(model: &ResolutionModel, config: &WalkConfig) -> QVector {
    assert_eq!(model.n, config.n);
    let mut rhs = QVector::zeros(model.dim());
    for i in 1..=model.n {
        rhs.0[i] = config.beta[i - 1].clone();
    }
    // Rows of the pairing are the forms <e_alpha, ->.
    model
        .pairing
        .matrix
        .solve_linear(&rhs)
        .expect("pairing is nondegenerate")
}

/// Checks that the increasing order of the gamma_ij follows the chain
/// pattern: for each j = 1..n the block gamma_jj < gamma_{j-1,j} < ... <
/// gamma_1j, and block j precedes block j+1.
pub fn verify_gamma_chain(config: &WalkConfig) -> bool {
    let gamma = gamma_table(config);
    let mut sorted: Vec<((usize, usize), Q)> = gamma.into_iter().collect();
    sorted.sort_by(|a, b| a.1.cmp(&b.1));
    let mut expected = Vec::new();
    for j in 1..=config.n {
        for i in (1..=j).rev() {
            expected.push((i, j));
        }
    }
    sorted.len() == expected.len()
        && sorted.iter().map(|(k, _)| *k).eq(expected.into_iter())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WalkStep {
    /// Threshold interval (t_lo, t_hi); t_hi is None on the final ray.
    pub t_lo: Q,
    pub t_hi: Option<Q>,
    /// The class flopped on entering this chamber (None for the first).
    pub entered_by: Option<(usize, usize)>,
    pub chamber: Chamber,
}

/// Walks D_t = D_0 - (t/2) E_0 through Mov, one step per chamber.
pub fn walk(model: &ResolutionModel, config: &WalkConfig) -> Result<Vec<WalkStep>, ChambersError> {
    assert_eq!(model.n, config.n);
    let gamma = gamma_table(config);
    let mut thresholds: Vec<((usize, usize), Q)> = gamma.into_iter().collect();
    thresholds.sort_by(|a, b| a.1.cmp(&b.1));
    for w in thresholds.windows(2) {
        if w[0].1 == w[1].1 {
            return Err(ChambersError::DegenerateWalk);
        }
    }
    let d0 = base_divisor(model, config);
    let e0_div = {
        let mut v = QVector::zeros(model.dim());
        v.0[0] = Q::one();
        v
    };
    let divisor_at = |t: &Q| -> QVector {
        d0.sub(&e0_div.scale(&(t / &Q::from_int(2))))
    };
    let mut steps = Vec::new();
    let mut lo = Q::zero();
    let mut entered: Option<(usize, usize)> = None;
    for k in 0..=thresholds.len() {
        let hi = thresholds.get(k).map(|(_, g)| g.clone());
        let t_mid = match &hi {
            Some(h) => (&lo + h) / Q::from_int(2),
            None => lo.clone() + Q::one(),
        };
        let witness = integer_witness(&divisor_at(&t_mid));
        steps.push(WalkStep {
            t_lo: lo.clone(),
            t_hi: hi.clone(),
            entered_by: entered,
            chamber: Chamber::from_witness(model, witness),
        });
        if let Some((key, g)) = thresholds.get(k) {
            entered = Some(*key);
            lo = g.clone();
        }
    }
    Ok(steps)
}
