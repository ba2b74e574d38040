//! Central-fiber diagrams for the chamber walk: which surfaces sit over the
//! origin, how they meet, and how a flop rewrites the configuration.
//!
//! Components P_ij (1 <= i <= j <= n) carry one of five surface types; the
//! Q_i are rigid F_4 Hirzebruch surfaces and never change type. Curve classes
//! live in the lattice spanned by e_0, ..., e_n and are written as integer
//! coordinate vectors. The flopping classes are lambda_ij = e_0 - (e_i + ...
//! + e_j).
//!
//! A flop in class mu rewrites the diagram locally around the unique P^2 with
//! line class -mu:
//!  * neighbours meeting it along a curve (class -mu) contract that curve,
//!    walking down the surface catalogue, and the incidence degenerates to a
//!    point; classes on the contracting neighbour are pushed forward by
//!    D -> D + (D.c) c;
//!  * neighbours meeting it at a point are blown up there, walking up the
//!    catalogue, and the incidence becomes a curve of class +mu;
//!  * a point incidence between two contracting neighbours is absorbed, and
//!    a fresh point incidence appears between blown-up neighbours at adjacent
//!    grid diagonals.
//! The P^2 itself survives with its line class negated. Applying the flop in
//! -mu undoes all of this.

use crate::exactq::{QMatrix, QVector, Q};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

pub type CurveClass = Vec<i64>;

#[derive(Debug, thiserror::Error)]
pub enum FiberdiagError {
    #[error("no component can be flopped in this class")]
    NoFlopTarget,
    #[error("more than one component can be flopped in this class")]
    AmbiguousFlopTarget,
    #[error("inconsistent curve classes: {0}")]
    InconsistentClasses(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CompId {
    /// P_ij, 1 <= i <= j <= n.
    P(usize, usize),
    /// Q_i, 1 <= i <= n.
    Q(usize),
}

impl fmt::Display for CompId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CompId::P(i, j) => write!(f, "P_{}_{}", i, j),
            CompId::Q(i) => write!(f, "Q_{}", i),
        }
    }
}

impl std::str::FromStr for CompId {
    type Err = String;
    fn from_str(s: &str) -> Result<CompId, String> {
        let parts: Vec<&str> = s.split('_').collect();
        match parts.as_slice() {
            ["P", i, j] => Ok(CompId::P(
                i.parse().map_err(|_| s.to_string())?,
                j.parse().map_err(|_| s.to_string())?,
            )),
            ["Q", i] => Ok(CompId::Q(i.parse().map_err(|_| s.to_string())?)),
            _ => Err(format!("bad component id {:?}", s)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SurfaceType {
    ProjPlane,
    Hirzebruch1,
    Quadric,
    TwoPointBlowup,
    Hirzebruch4Static,
}

impl SurfaceType {
    pub fn code(&self) -> &'static str {
        match self {
            SurfaceType::ProjPlane => "P2",
            SurfaceType::Hirzebruch1 => "F1",
            SurfaceType::Quadric => "P1xP1",
            SurfaceType::TwoPointBlowup => "Bl2",
            SurfaceType::Hirzebruch4Static => "F4",
        }
    }

    pub fn from_code(s: &str) -> Option<SurfaceType> {
        Some(match s {
            "P2" => SurfaceType::ProjPlane,
            "F1" => SurfaceType::Hirzebruch1,
            "P1xP1" => SurfaceType::Quadric,
            "Bl2" => SurfaceType::TwoPointBlowup,
            "F4" => SurfaceType::Hirzebruch4Static,
            _ => return None,
        })
    }
}

/// A component surface with its named curve classes.
///
/// * `Hirzebruch1`: `section_pos = section_neg + ruling` is implied.
/// * `Quadric`: the two rulings are unordered.
/// * `TwoPointBlowup`: the chain end_a - middle - end_b of (-1)/(-2)-curves
///   may be read in either direction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Surface {
    ProjPlane { line: CurveClass },
    Hirzebruch1 { section_neg: CurveClass, ruling: CurveClass },
    Quadric { ruling_a: CurveClass, ruling_b: CurveClass },
    TwoPointBlowup { end_a: CurveClass, middle: CurveClass, end_b: CurveClass },
    Hirzebruch4Static,
}

impl Surface {
    pub fn surface_type(&self) -> SurfaceType {
        match self {
            Surface::ProjPlane { .. } => SurfaceType::ProjPlane,
            Surface::Hirzebruch1 { .. } => SurfaceType::Hirzebruch1,
            Surface::Quadric { .. } => SurfaceType::Quadric,
            Surface::TwoPointBlowup { .. } => SurfaceType::TwoPointBlowup,
            Surface::Hirzebruch4Static => SurfaceType::Hirzebruch4Static,
        }
    }

    /// Canonical form: quadric rulings sorted, blowup chain oriented by the
    /// lexicographically smaller end.
    fn normalize(self) -> Surface {
        match self {
            Surface::Quadric { ruling_a, ruling_b } => {
                let (a, b) = if ruling_a <= ruling_b {
                    (ruling_a, ruling_b)
                } else {
                    (ruling_b, ruling_a)
                };
                Surface::Quadric { ruling_a: a, ruling_b: b }
            }
            Surface::TwoPointBlowup { end_a, middle, end_b } => {
                let (a, b) = if end_a <= end_b {
                    (end_a, end_b)
                } else {
                    (end_b, end_a)
                };
                Surface::TwoPointBlowup { end_a: a, middle, end_b: b }
            }
            other => other,
        }
    }

    /// Every class an irreducible incidence curve on this surface may carry.
    fn menu(&self) -> Option<Vec<CurveClass>> {
        match self {
            Surface::ProjPlane { line } => Some(vec![line.clone()]),
            Surface::Hirzebruch1 { section_neg, ruling } => Some(vec![
                section_neg.clone(),
                ruling.clone(),
                add(section_neg, ruling),
            ]),
            Surface::Quadric { ruling_a, ruling_b } => {
                Some(vec![ruling_a.clone(), ruling_b.clone()])
            }
            Surface::TwoPointBlowup { end_a, middle, end_b } => Some(vec![
                end_a.clone(),
                middle.clone(),
                end_b.clone(),
                add(end_a, middle),
                add(middle, end_b),
                add(&add(end_a, middle), end_b),
            ]),
            Surface::Hirzebruch4Static => None,
        }
    }

    /// Picard basis and intersection matrix used for push-forwards.
    fn basis_and_gram(&self) -> Option<(Vec<CurveClass>, Vec<Vec<i64>>)> {
        match self {
            Surface::Hirzebruch1 { section_neg, ruling } => Some((
                vec![section_neg.clone(), ruling.clone()],
                vec![vec![-1, 1], vec![1, 0]],
            )),
            Surface::TwoPointBlowup { end_a, middle, end_b } => Some((
                vec![end_a.clone(), middle.clone(), end_b.clone()],
                vec![vec![-1, 1, 0], vec![1, -1, 1], vec![0, 1, -1]],
            )),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IncidenceKind {
    Curve,
    Point,
}

#[derive(Debug, Clone)]
pub struct Incidence {
    pub kind: IncidenceKind,
    /// Class of the shared curve; point incidences carry none.
    pub class: Option<CurveClass>,
    /// Label for incidences with a Q_i drawn to the diagram border.
    pub boundary_stub: Option<String>,
    /// Multiplicities with which this curve passes through point incidences:
    /// keyed by (owner, partner), meaning the curve lies on `owner` and runs
    /// through the point incidence (owner, partner). Populated when a
    /// contraction pushes the curve through the fresh point; consumed (as a
    /// strict-transform correction) when that point is blown up again. Not
    /// part of the serialized schema.
    pub through: BTreeMap<(CompId, CompId), i64>,
}

// `through` is derived bookkeeping, not part of the diagram's identity.
impl PartialEq for Incidence {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
            && self.class == other.class
            && self.boundary_stub == other.boundary_stub
    }
}
impl Eq for Incidence {}

impl Incidence {
    fn curve(class: CurveClass, stub: Option<&str>) -> Incidence {
        Incidence {
            kind: IncidenceKind::Curve,
            class: Some(class),
            boundary_stub: stub.map(str::to_string),
            through: BTreeMap::new(),
        }
    }

    fn point() -> Incidence {
        Incidence {
            kind: IncidenceKind::Point,
            class: None,
            boundary_stub: None,
            through: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiagramState {
    pub n: usize,
    /// Threshold interval labels, e.g. ("g_1_1", "g_2_2"); "0" and "inf" at
    /// the ends.
    pub interval: (String, String),
    pub components: BTreeMap<CompId, Surface>,
    pub incidences: BTreeMap<(CompId, CompId), Incidence>,
}

// ---- curve class helpers ----

fn add(a: &CurveClass, b: &CurveClass) -> CurveClass {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn sub(a: &CurveClass, b: &CurveClass) -> CurveClass {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn neg(a: &CurveClass) -> CurveClass {
    a.iter().map(|x| -x).collect()
}

fn scale(k: i64, a: &CurveClass) -> CurveClass {
    a.iter().map(|x| k * x).collect()
}

pub fn e_class(n: usize, k: usize) -> CurveClass {
    let mut v = vec![0i64; n + 1];
    v[k] = 1;
    v
}

pub fn lambda_class(n: usize, i: usize, j: usize) -> CurveClass {
    assert!(1 <= i && i <= j && j <= n);
    let mut v = e_class(n, 0);
    for k in i..=j {
        v[k] = -1;
    }
    v
}

/// Human-readable name: e_k, +-l_i_j, +-2 l_i_j, or the raw vector.
pub fn class_name(c: &CurveClass) -> String {
    let n = c.len() - 1;
    for k in 0..=n {
        if c == &e_class(n, k) {
            return format!("e{}", k);
        }
    }
    for i in 1..=n {
        for j in i..=n {
            let l = lambda_class(n, i, j);
            if c == &l {
                return format!("l{}{}", i, j);
            }
            if c == &neg(&l) {
                return format!("-l{}{}", i, j);
            }
            if c == &scale(2, &l) {
                return format!("2l{}{}", i, j);
            }
            if c == &scale(-2, &l) {
                return format!("-2l{}{}", i, j);
            }
        }
    }
    format!("{:?}", c)
}

fn pair_key(a: CompId, b: CompId) -> (CompId, CompId) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Writes `d` in the given basis (exactly); None if not in the span.
fn in_basis(basis: &[CurveClass], d: &CurveClass) -> Option<Vec<Q>> {
    let dim = d.len();
    let k = basis.len();
    // Solve sum x_l basis_l = d by elimination on the (dim x k) system.
    let rows: Vec<QVector> = (0..dim)
        .map(|r| {
            let mut v: Vec<Q> = basis.iter().map(|b| Q::from_int(b[r])).collect();
            v.push(Q::from_int(d[r]));
            QVector(v)
        })
        .collect();
    let m = QMatrix::from_rows(rows);
    // Reduce; consistent iff no pivot in the last column.
    let mut rows = m.rows.clone();
    let mut piv_cols = Vec::new();
    let mut r = 0;
    for c in 0..=k {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i].0[c].is_zero()) else {
            continue;
        };
        if c == k {
            return None; // inconsistent
        }
        rows.swap(p, r);
        let inv = rows[r].0[c].recip();
        rows[r] = rows[r].scale(&inv);
        for i in 0..rows.len() {
            if i != r && !rows[i].0[c].is_zero() {
                let f = rows[i].0[c].clone();
                rows[i] = rows[i].sub(&rows[r].scale(&f));
            }
        }
        piv_cols.push(c);
        r += 1;
    }
    if piv_cols.len() < k {
        return None; // basis not independent in these coordinates
    }
    let mut x = vec![Q::zero(); k];
    for (row, &c) in piv_cols.iter().enumerate() {
        x[c] = rows[row].0[k].clone();
    }
    Some(x)
}

/// Push-forward of class `d` under contraction of the basis curve `c_idx`:
/// `d + (d . c) c`, with the intersection number read off the Gram matrix.
/// Also returns the intersection number, which is the multiplicity of the
/// image curve at the contracted point.
fn push_forward(
    surface: &Surface,
    c_idx: usize,
    d: &CurveClass,
) -> Result<(CurveClass, i64), FiberdiagError> {
    let (basis, gram) = surface
        .basis_and_gram()
        .expect("push_forward only on F1 / Bl2");
    let x = in_basis(&basis, d).ok_or_else(|| {
        FiberdiagError::InconsistentClasses(format!(
            "class {} not supported on the contracting surface",
            class_name(d)
        ))
    })?;
    let mut dc = Q::zero();
    for (l, xl) in x.iter().enumerate() {
        dc += xl * &Q::from_int(gram[l][c_idx]);
    }
    if !dc.is_integer() {
        return Err(FiberdiagError::InconsistentClasses(format!(
            "non-integral intersection with {}",
            class_name(d)
        )));
    }
    let k: i64 = (&dc.to_bigint())
        .try_into()
        .expect("intersection number fits in i64");
    Ok((add(d, &scale(k, &basis[c_idx])), k))
}

/// The diagram over the Hilbert-Chow chamber: P^2 on the diagonal with line
/// class -lambda_ii, two-point blowups on the first superdiagonal with chain
/// (-lambda_ii, e_0, -lambda_{i+1,i+1}), and quadrics elsewhere.
pub fn initial_state(n: usize) -> DiagramState {
    assert!(n >= 1);
    let mut components = BTreeMap::new();
    for i in 1..=n {
        for j in i..=n {
            let s = if i == j {
                Surface::ProjPlane {
                    line: neg(&lambda_class(n, i, i)),
                }
            } else if j == i + 1 {
                Surface::TwoPointBlowup {
                    end_a: neg(&lambda_class(n, i, i)),
                    middle: e_class(n, 0),
                    end_b: neg(&lambda_class(n, j, j)),
                }
                .normalize()
            } else {
                Surface::Quadric {
                    ruling_a: e_class(n, i),
                    ruling_b: e_class(n, j),
                }
                .normalize()
            };
            components.insert(CompId::P(i, j), s);
        }
        components.insert(CompId::Q(i), Surface::Hirzebruch4Static);
    }

    let mut incidences = BTreeMap::new();
    let mut curve = |a: CompId, b: CompId, c: CurveClass, stub: Option<&str>| {
        incidences.insert(pair_key(a, b), Incidence::curve(c, stub));
    };
    for i in 1..=n {
        for j in i..=n {
            // Column i runs upward, row j leftward.
            if j < n {
                let c = if j == i {
                    neg(&lambda_class(n, i, i))
                } else {
                    e_class(n, i)
                };
                curve(CompId::P(i, j), CompId::P(i, j + 1), c, None);
            }
            if i < j {
                let c = if i + 1 == j {
                    neg(&lambda_class(n, j, j))
                } else {
                    e_class(n, j)
                };
                curve(CompId::P(i, j), CompId::P(i + 1, j), c, None);
            }
        }
        // Boundary stubs into the Q surfaces.
        curve(
            CompId::P(i, i),
            CompId::Q(i),
            scale(-2, &lambda_class(n, i, i)),
            Some("conic"),
        );
        if i < n {
            curve(CompId::P(i, i + 1), CompId::Q(i), e_class(n, 0), Some("fiber"));
            curve(CompId::P(i, n), CompId::Q(i), e_class(n, i), Some("column"));
        }
        if i >= 2 {
            curve(CompId::P(1, i), CompId::Q(i), e_class(n, i), Some("row"));
        }
    }
    let mut point = |a: CompId, b: CompId| {
        incidences.insert(pair_key(a, b), Incidence::point());
    };
    for i in 1..=n {
        for j in i..=n {
            if i < j && j + 1 <= n {
                point(CompId::P(i, j), CompId::P(i + 1, j + 1));
            }
            if i >= 2 && j + 1 <= n {
                point(CompId::P(i, j), CompId::P(i - 1, j + 1));
            }
        }
    }

    DiagramState {
        n,
        interval: ("0".to_string(), first_threshold_label(n)),
        components,
        incidences,
    }
}

fn first_threshold_label(n: usize) -> String {
    let _ = n;
    "g_1_1".to_string()
}

/// Validates that every P-P curve incidence class is realizable on both of
/// its endpoint surfaces.
pub fn validate(state: &DiagramState) -> Result<(), FiberdiagError> {
    for ((a, b), inc) in &state.incidences {
        if inc.kind != IncidenceKind::Curve {
            continue;
        }
        // Boundary curves into the Q surfaces may be non-reduced (conics);
        // they are not menu-checked.
        if matches!(a, CompId::Q(_)) || matches!(b, CompId::Q(_)) {
            continue;
        }
        let class = inc.class.as_ref().ok_or_else(|| {
            FiberdiagError::InconsistentClasses(format!("curve {}-{} missing a class", a, b))
        })?;
        for id in [a, b] {
            if matches!(id, CompId::Q(_)) {
                continue;
            }
            let menu = state.components[id].menu();
            if let Some(menu) = menu {
                if !menu.contains(class) {
                    return Err(FiberdiagError::InconsistentClasses(format!(
                        "{} does not carry a curve of class {} (meets {})",
                        id,
                        class_name(class),
                        if id == a { b } else { a },
                    )));
                }
            }
        }
    }
    Ok(())
}

fn grid_diagonal_adjacent(a: CompId, b: CompId) -> bool {
    match (a, b) {
        (CompId::P(i1, j1), CompId::P(i2, j2)) => {
            i1.abs_diff(i2) == 1 && j1.abs_diff(j2) == 1
        }
        _ => false,
    }
}

/// Flops the unique P^2 whose line class is -mu. See the module docs for the
/// rewrite rules.
pub fn flop(state: &DiagramState, mu: &CurveClass) -> Result<DiagramState, FiberdiagError> {
    if mu.len() != state.n + 1 {
        return Err(FiberdiagError::InconsistentClasses(
            "class has the wrong dimension".to_string(),
        ));
    }
    let minus_mu = neg(mu);
    let mut targets = state.components.iter().filter(|(_, s)| {
        matches!(s, Surface::ProjPlane { line } if line == &minus_mu)
    });
    let target = match (targets.next(), targets.next()) {
        (Some((id, _)), None) => *id,
        (None, _) => return Err(FiberdiagError::NoFlopTarget),
        (Some(_), Some(_)) => return Err(FiberdiagError::AmbiguousFlopTarget),
    };

    let mut out = state.clone();
    // New interval starts at the wall just crossed (meaningful when mu is a
    // positive flopping class); the upper end is unknown to a single flop.
    out.interval = (interval_label(state.n, mu), "inf".to_string());

    // Classify the neighbours of the target.
    let mut contracting: Vec<CompId> = Vec::new();
    let mut blowing: Vec<CompId> = Vec::new();
    let neighbour_pairs: Vec<(CompId, CompId)> = state
        .incidences
        .keys()
        .filter(|(a, b)| *a == target || *b == target)
        .cloned()
        .collect();
    for key in &neighbour_pairs {
        let other = if key.0 == target { key.1 } else { key.0 };
        let inc = &state.incidences[key];
        match (inc.kind, other) {
            (IncidenceKind::Curve, CompId::Q(_)) => {
                // Any curve on a P^2 is a multiple of the line; negate it.
                let c = inc.class.as_ref().unwrap();
                let ok = (1..=4).any(|k| c == &scale(-k, mu));
                if !ok {
                    return Err(FiberdiagError::InconsistentClasses(format!(
                        "boundary curve {} on {} is not a multiple of the line",
                        class_name(c),
                        target
                    )));
                }
                out.incidences.get_mut(key).unwrap().class = Some(neg(c));
            }
            (IncidenceKind::Curve, p) => {
                let c = inc.class.as_ref().unwrap();
                if c != &minus_mu {
                    return Err(FiberdiagError::InconsistentClasses(format!(
                        "curve {}-{} has class {}, expected {}",
                        key.0,
                        key.1,
                        class_name(c),
                        class_name(&minus_mu)
                    )));
                }
                contracting.push(p);
            }
            (IncidenceKind::Point, CompId::Q(q)) => {
                return Err(FiberdiagError::InconsistentClasses(format!(
                    "point incidence with Q_{}",
                    q
                )));
            }
            (IncidenceKind::Point, p) => blowing.push(p),
        }
    }

    // A curve incidence may connect two neighbours of the target; the
    // contraction push-forward and the strict transform at the other end
    // describe the same class change, so apply it at most once per flop.
    let mut adjusted: BTreeSet<(CompId, CompId)> = BTreeSet::new();

    // Contract the flopped curve in each curve-neighbour.
    for &nb in &contracting {
        let surf = state.components[&nb].clone();
        let (new_surf, c_idx) = match &surf {
            Surface::Hirzebruch1 { section_neg, ruling } => {
                if section_neg != &minus_mu {
                    return Err(FiberdiagError::InconsistentClasses(format!(
                        "{} cannot contract {}",
                        nb,
                        class_name(&minus_mu)
                    )));
                }
                (
                    Surface::ProjPlane {
                        line: add(section_neg, ruling),
                    },
                    0usize,
                )
            }
            Surface::TwoPointBlowup { end_a, middle, end_b } => {
                if end_a == &minus_mu {
                    (
                        Surface::Hirzebruch1 {
                            section_neg: end_b.clone(),
                            ruling: add(middle, end_a),
                        },
                        0,
                    )
                } else if end_b == &minus_mu {
                    (
                        Surface::Hirzebruch1 {
                            section_neg: end_a.clone(),
                            ruling: add(middle, end_b),
                        },
                        2,
                    )
                } else if middle == &minus_mu {
                    (
                        Surface::Quadric {
                            ruling_a: add(end_a, middle),
                            ruling_b: add(end_b, middle),
                        }
                        .normalize(),
                        1,
                    )
                } else {
                    return Err(FiberdiagError::InconsistentClasses(format!(
                        "{} carries no (-1)-chain curve of class {}",
                        nb,
                        class_name(&minus_mu)
                    )));
                }
            }
            other => {
                return Err(FiberdiagError::InconsistentClasses(format!(
                    "{} ({:?}) cannot contract a curve",
                    nb,
                    other.surface_type()
                )));
            }
        };
        // Push forward every other incidence class of this neighbour.
        let keys: Vec<(CompId, CompId)> = out
            .incidences
            .keys()
            .filter(|(a, b)| (*a == nb || *b == nb) && !(*a == target || *b == target))
            .cloned()
            .collect();
        for key in keys {
            let inc = out.incidences.get_mut(&key).unwrap();
            if inc.kind != IncidenceKind::Curve {
                continue;
            }
            let c = inc.class.as_ref().unwrap();
            if c == &minus_mu {
                return Err(FiberdiagError::InconsistentClasses(format!(
                    "contracted curve also meets {}-{}",
                    key.0, key.1
                )));
            }
            let (pushed, mult) = push_forward(&surf, c_idx, c)?;
            if mult != 0 && adjusted.insert(key) {
                inc.class = Some(pushed);
                // The image curve passes through the new point (target, nb)
                // with this multiplicity; the reverse blow-up takes the
                // strict transform.
                inc.through.insert((nb, target), mult);
            }
        }
        out.components.insert(nb, new_surf.normalize());
        let key = pair_key(target, nb);
        let inc = out.incidences.get_mut(&key).unwrap();
        inc.kind = IncidenceKind::Point;
        inc.class = None;
    }

    // Blow up each point-neighbour at the incidence point.
    for &nb in &blowing {
        let surf = state.components[&nb].clone();
        let new_surf = match &surf {
            Surface::ProjPlane { line } => Surface::Hirzebruch1 {
                section_neg: mu.clone(),
                ruling: sub(line, mu),
            },
            Surface::Hirzebruch1 { section_neg, ruling } => Surface::TwoPointBlowup {
                end_a: section_neg.clone(),
                middle: sub(ruling, mu),
                end_b: mu.clone(),
            },
            Surface::Quadric { ruling_a, ruling_b } => Surface::TwoPointBlowup {
                end_a: sub(ruling_a, mu),
                middle: mu.clone(),
                end_b: sub(ruling_b, mu),
            },
            other => {
                return Err(FiberdiagError::InconsistentClasses(format!(
                    "{} ({:?}) cannot be blown up again",
                    nb,
                    other.surface_type()
                )));
            }
        };
        out.components.insert(nb, new_surf.normalize());
        // Curves of this neighbour passing through the blown-up point are
        // replaced by their strict transforms.
        let keys: Vec<(CompId, CompId)> = out
            .incidences
            .keys()
            .filter(|(a, b)| (*a == nb || *b == nb) && !(*a == target || *b == target))
            .cloned()
            .collect();
        for key in keys {
            let inc = out.incidences.get_mut(&key).unwrap();
            if inc.kind != IncidenceKind::Curve {
                continue;
            }
            if let Some(mult) = inc.through.remove(&(nb, target)) {
                if adjusted.insert(key) {
                    let c = inc.class.as_ref().unwrap();
                    inc.class = Some(sub(c, &scale(mult, mu)));
                }
            }
        }
        let key = pair_key(target, nb);
        let inc = out.incidences.get_mut(&key).unwrap();
        inc.kind = IncidenceKind::Curve;
        inc.class = Some(mu.clone());
        inc.through.clear();
    }

    // A point shared by two contracted curves is absorbed by the flop.
    for (x, &n1) in contracting.iter().enumerate() {
        for &n2 in &contracting[x + 1..] {
            let key = pair_key(n1, n2);
            if let Some(inc) = out.incidences.get(&key) {
                if inc.kind == IncidenceKind::Point {
                    out.incidences.remove(&key);
                }
            }
        }
    }
    // Blown-up neighbours at adjacent grid diagonals acquire a new point.
    for (x, &m1) in blowing.iter().enumerate() {
        for &m2 in &blowing[x + 1..] {
            if !grid_diagonal_adjacent(m1, m2) {
                continue;
            }
            let key = pair_key(m1, m2);
            if out.incidences.contains_key(&key) {
                return Err(FiberdiagError::InconsistentClasses(format!(
                    "{}-{} already meet",
                    m1, m2
                )));
            }
            out.incidences.insert(key, Incidence::point());
        }
    }

    // The flopped plane itself: line class negated, so are its boundary
    // stubs (handled above).
    out.components.insert(
        target,
        Surface::ProjPlane { line: mu.clone() },
    );

    validate(&out)?;
    Ok(out)
}

fn interval_label(n: usize, mu: &CurveClass) -> String {
    for i in 1..=n {
        for j in i..=n {
            if mu == &lambda_class(n, i, j) {
                return format!("g_{}_{}", i, j);
            }
        }
    }
    // Reverse flops and exotic classes get an opaque label.
    format!("after({})", class_name(mu))
}

/// All n(n+1)/2 + 1 diagrams along the standard walk, flopping the
/// lambda_ij in threshold order (gamma_jj block by block).
pub fn walk_states(n: usize) -> Result<Vec<DiagramState>, FiberdiagError> {
    let mut states = vec![initial_state(n)];
    let mut order = Vec::new();
    for j in 1..=n {
        for i in (1..=j).rev() {
            order.push((i, j));
        }
    }
    for (idx, &(i, j)) in order.iter().enumerate() {
        let next = flop(states.last().unwrap(), &lambda_class(n, i, j))?;
        states.push(next);
        let hi = match order.get(idx + 1) {
            Some(&(i2, j2)) => format!("g_{}_{}", i2, j2),
            None => "inf".to_string(),
        };
        states.last_mut().unwrap().interval.1 = hi;
    }
    Ok(states)
}

/// Line classes of all P^2 components.
pub fn p2_classes(state: &DiagramState) -> BTreeSet<CurveClass> {
    state
        .components
        .values()
        .filter_map(|s| match s {
            Surface::ProjPlane { line } => Some(line.clone()),
            _ => None,
        })
        .collect()
}

// ---- serialization, fixtures, comparison ----

/// JSON-facing form of a state. Class slots may be omitted (null) in
/// fixtures; such slots match anything in `states_equal`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateSpec {
    pub n: usize,
    pub interval: (String, String),
    #[serde(default)]
    pub q_elided: bool,
    pub components: Vec<ComponentSpec>,
    pub incidences: Vec<IncidenceSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComponentSpec {
    pub id: String,
    #[serde(rename = "type")]
    pub surface_type: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub classes: BTreeMap<String, CurveClass>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IncidenceSpec {
    pub a: String,
    pub b: String,
    pub kind: IncidenceKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<CurveClass>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary_stub: Option<String>,
}

impl DiagramState {
    pub fn to_spec(&self) -> StateSpec {
        let components = self
            .components
            .iter()
            .map(|(id, s)| {
                let mut classes = BTreeMap::new();
                match s {
                    Surface::ProjPlane { line } => {
                        classes.insert("line".to_string(), line.clone());
                    }
                    Surface::Hirzebruch1 { section_neg, ruling } => {
                        classes.insert("section_neg".to_string(), section_neg.clone());
                        classes.insert("ruling".to_string(), ruling.clone());
                    }
                    Surface::Quadric { ruling_a, ruling_b } => {
                        classes.insert("ruling_a".to_string(), ruling_a.clone());
                        classes.insert("ruling_b".to_string(), ruling_b.clone());
                    }
                    Surface::TwoPointBlowup { end_a, middle, end_b } => {
                        classes.insert("end_a".to_string(), end_a.clone());
                        classes.insert("middle".to_string(), middle.clone());
                        classes.insert("end_b".to_string(), end_b.clone());
                    }
                    Surface::Hirzebruch4Static => {}
                }
                ComponentSpec {
                    id: id.to_string(),
                    surface_type: s.surface_type().code().to_string(),
                    classes,
                }
            })
            .collect();
        let incidences = self
            .incidences
            .iter()
            .map(|((a, b), inc)| IncidenceSpec {
                a: a.to_string(),
                b: b.to_string(),
                kind: inc.kind,
                class: inc.class.clone(),
                boundary_stub: inc.boundary_stub.clone(),
            })
            .collect();
        StateSpec {
            n: self.n,
            interval: self.interval.clone(),
            q_elided: false,
            components,
            incidences,
        }
    }
}

/// Canonical JSON for a diagram state.
pub fn to_json(state: &DiagramState) -> String {
    crate::jsonutil::canonical(&state.to_spec())
}

pub fn load_fixture(path: &Path) -> Result<StateSpec, FiberdiagError> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// Variants of a component's class table under the surface symmetries
/// (quadric ruling swap, blowup chain reversal).
fn class_table_variants(
    surface_type: &str,
    classes: &BTreeMap<String, CurveClass>,
) -> Vec<BTreeMap<String, CurveClass>> {
    let mut swapped = classes.clone();
    let swap = |m: &mut BTreeMap<String, CurveClass>, k1: &str, k2: &str| {
        let v1 = m.remove(k1);
        let v2 = m.remove(k2);
        if let Some(v) = v1 {
            m.insert(k2.to_string(), v);
        }
        if let Some(v) = v2 {
            m.insert(k1.to_string(), v);
        }
    };
    match surface_type {
        "P1xP1" => {
            swap(&mut swapped, "ruling_a", "ruling_b");
            vec![classes.clone(), swapped]
        }
        "Bl2" => {
            swap(&mut swapped, "end_a", "end_b");
            vec![classes.clone(), swapped]
        }
        _ => vec![classes.clone()],
    }
}

fn class_tables_match(
    surface_type: &str,
    a: &BTreeMap<String, CurveClass>,
    b: &BTreeMap<String, CurveClass>,
) -> bool {
    // Slots missing on either side are wildcards.
    let compatible = |x: &BTreeMap<String, CurveClass>, y: &BTreeMap<String, CurveClass>| {
        x.iter().all(|(k, v)| y.get(k).map_or(true, |w| w == v))
    };
    class_table_variants(surface_type, b)
        .iter()
        .any(|bv| compatible(a, bv) && compatible(bv, a))
}

/// Structural equality of two states with wildcard class slots. Incidences
/// touching a Q component are ignored entirely when either side has
/// `q_elided` set; intervals and boundary-stub labels are not compared.
pub fn states_equal(a: &StateSpec, b: &StateSpec) -> bool {
    if a.n != b.n {
        return false;
    }
    let comp_map = |s: &StateSpec| -> BTreeMap<String, (String, BTreeMap<String, CurveClass>)> {
        s.components
            .iter()
            .map(|c| (c.id.clone(), (c.surface_type.clone(), c.classes.clone())))
            .collect()
    };
    let ca = comp_map(a);
    let cb = comp_map(b);
    if ca.len() != cb.len() {
        return false;
    }
    for (id, (ty, cls_a)) in &ca {
        let Some((ty_b, cls_b)) = cb.get(id) else {
            return false;
        };
        if ty != ty_b || !class_tables_match(ty, cls_a, cls_b) {
            return false;
        }
    }
    let skip_q = a.q_elided || b.q_elided;
    let is_q = |id: &str| id.starts_with('Q');
    let inc_map = |s: &StateSpec| -> BTreeMap<(String, String), (IncidenceKind, Option<CurveClass>)> {
        s.incidences
            .iter()
            .filter(|i| !(skip_q && (is_q(&i.a) || is_q(&i.b))))
            .map(|i| {
                let key = if i.a <= i.b {
                    (i.a.clone(), i.b.clone())
                } else {
                    (i.b.clone(), i.a.clone())
                };
                (key, (i.kind, i.class.clone()))
            })
            .collect()
    };
    let ia = inc_map(a);
    let ib = inc_map(b);
    if ia.len() != ib.len() {
        return false;
    }
    for (key, (kind, cls_a)) in &ia {
        let Some((kind_b, cls_b)) = ib.get(key) else {
            return false;
        };
        if kind != kind_b {
            return false;
        }
        if let (Some(x), Some(y)) = (cls_a, cls_b) {
            if x != y {
                return false;
            }
        }
    }
    true
}

/// Graphviz rendering with deterministic node and edge order. Solid edges
/// are curve incidences (labelled by class), dashed edges are point
/// incidences.
pub fn to_dot(state: &DiagramState) -> String {
    let mut out = String::from("graph fiber {\n");
    out.push_str("  node [fontsize=10];\n");
    for (id, s) in &state.components {
        let shape = match s.surface_type() {
            SurfaceType::ProjPlane => "triangle",
            SurfaceType::Hirzebruch1 => "diamond",
            SurfaceType::Quadric => "box",
            SurfaceType::TwoPointBlowup => "star",
            SurfaceType::Hirzebruch4Static => "circle",
        };
        let label = match s {
            Surface::ProjPlane { line } => format!("{}\\n{}", id, class_name(line)),
            _ => id.to_string(),
        };
        out.push_str(&format!(
            "  \"{}\" [shape={}, label=\"{}\"];\n",
            id, shape, label
        ));
    }
    for ((a, b), inc) in &state.incidences {
        match inc.kind {
            IncidenceKind::Curve => {
                let label = inc.class.as_ref().map(|c| class_name(c)).unwrap_or_default();
                out.push_str(&format!(
                    "  \"{}\" -- \"{}\" [style=solid, label=\"{}\"];\n",
                    a, b, label
                ));
            }
            IncidenceKind::Point => {
                out.push_str(&format!("  \"{}\" -- \"{}\" [style=dashed];\n", a, b));
            }
        }
    }
    out.push_str("}\n");
    out
}
