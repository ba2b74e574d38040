//! Brute-force finite-group utilities: wreath products, conjugacy classes,
//! normalizer quotients. Every instance here is tiny, so everything is an
//! explicit multiplication table.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum McKayError {
    #[error("multiplication table is not a group: {0}")]
    NotAGroup(&'static str),
    #[error("NotASubgroup")]
    NotASubgroup,
}

#[derive(Debug, Clone)]
pub struct FiniteGroupTable {
    pub order: usize,
    /// mul[a][b] = a * b; element 0 is the identity.
    pub mul: Vec<Vec<usize>>,
    pub labels: Vec<String>,
}

impl FiniteGroupTable {
    pub fn new(mul: Vec<Vec<usize>>, labels: Option<Vec<String>>) -> Result<Self, McKayError> {
        let n = mul.len();
        if n == 0 || mul.iter().any(|r| r.len() != n) {
            return Err(McKayError::NotAGroup("table is not square"));
        }
        if mul.iter().flatten().any(|&x| x >= n) {
            return Err(McKayError::NotAGroup("entry out of range"));
        }
        for a in 0..n {
            if mul[0][a] != a || mul[a][0] != a {
                return Err(McKayError::NotAGroup("0 is not an identity"));
            }
            if !mul[a].iter().any(|&p| p == 0) {
                return Err(McKayError::NotAGroup("missing inverse"));
            }
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if mul[mul[a][b]][c] != mul[a][mul[b][c]] {
                        return Err(McKayError::NotAGroup("not associative"));
                    }
                }
            }
        }
        let labels = labels.unwrap_or_else(|| (0..n).map(|i| i.to_string()).collect());
        if labels.len() != n {
            return Err(McKayError::NotAGroup("label count mismatch"));
        }
        Ok(FiniteGroupTable {
            order: n,
            mul,
            labels,
        })
    }

    pub fn inverse(&self, a: usize) -> usize {
        (0..self.order).find(|&b| self.mul[a][b] == 0).unwrap()
    }
}

/// The wreath product of the cyclic group of order m with the swap: elements
/// ((a,b), s) with s acting on (c,d) by exchange. Order 2m^2.
pub fn wreath_z2(m: usize) -> FiniteGroupTable {
    assert!(m >= 1);
    let idx = |a: usize, b: usize, s: usize| s * m * m + a * m + b;
    let n = 2 * m * m;
    let mut mul = vec![vec![0usize; n]; n];
    let mut labels = vec![String::new(); n];
    for a in 0..m {
        for b in 0..m {
            for s in 0..2 {
                labels[idx(a, b, s)] = format!("(({},{}),{})", a, b, s);
                for c in 0..m {
                    for d in 0..m {
                        for t in 0..2 {
                            let (c2, d2) = if s == 1 { (d, c) } else { (c, d) };
                            mul[idx(a, b, s)][idx(c, d, t)] =
                                idx((a + c2) % m, (b + d2) % m, (s + t) % 2);
                        }
                    }
                }
            }
        }
    }
    FiniteGroupTable::new(mul, Some(labels)).expect("wreath table is a group")
}

/// Symmetric group on three letters as a table (identity first).
pub fn symmetric3() -> FiniteGroupTable {
    let perms: Vec<[usize; 3]> = vec![
        [0, 1, 2],
        [1, 0, 2],
        [0, 2, 1],
        [2, 1, 0],
        [1, 2, 0],
        [2, 0, 1],
    ];
    let compose = |p: &[usize; 3], q: &[usize; 3]| [p[q[0]], p[q[1]], p[q[2]]];
    let n = perms.len();
    let mut mul = vec![vec![0usize; n]; n];
    for a in 0..n {
        for b in 0..n {
            let r = compose(&perms[a], &perms[b]);
            mul[a][b] = perms.iter().position(|p| *p == r).unwrap();
        }
    }
    let labels = perms.iter().map(|p| format!("{:?}", p)).collect();
    FiniteGroupTable::new(mul, Some(labels)).expect("permutation table is a group")
}

/// Cyclic group of order m.
pub fn cyclic(m: usize) -> FiniteGroupTable {
    assert!(m >= 1);
    let mul = (0..m)
        .map(|a| (0..m).map(|b| (a + b) % m).collect())
        .collect();
    FiniteGroupTable::new(mul, None).expect("cyclic table is a group")
}

/// Number of orbits of the conjugation action.
pub fn conjugacy_class_count(g: &FiniteGroupTable) -> usize {
    let mut seen = vec![false; g.order];
    let mut count = 0;
    for x in 0..g.order {
        if seen[x] {
            continue;
        }
        count += 1;
        for h in 0..g.order {
            let conj = g.mul[g.mul[h][x]][g.inverse(h)];
            seen[conj] = true;
        }
    }
    count
}

/// |N_G(H)| / |H| by direct enumeration.
pub fn normalizer_quotient_order(
    g: &FiniteGroupTable,
    h_elements: &[usize],
) -> Result<usize, McKayError> {
    let h: Vec<usize> = h_elements.to_vec();
    let in_h = |x: usize| h.contains(&x);
    if !in_h(0) || h.iter().any(|&x| x >= g.order) {
        return Err(McKayError::NotASubgroup);
    }
    for &a in &h {
        if !in_h(g.inverse(a)) {
            return Err(McKayError::NotASubgroup);
        }
        for &b in &h {
            if !in_h(g.mul[a][b]) {
                return Err(McKayError::NotASubgroup);
            }
        }
    }
    let normalizer = (0..g.order)
        .filter(|&n| {
            let n_inv = g.inverse(n);
            h.iter().all(|&x| in_h(g.mul[g.mul[n][x]][n_inv]))
        })
        .count();
    Ok(normalizer / h.len())
}

/// Table isomorphism by exhaustive search over generator images; adequate for
/// the single-digit orders used in tests.
pub fn is_isomorphic(a: &FiniteGroupTable, b: &FiniteGroupTable) -> bool {
    if a.order != b.order {
        return false;
    }
    let n = a.order;
    fn extend(
        a: &FiniteGroupTable,
        b: &FiniteGroupTable,
        map: &mut Vec<Option<usize>>,
        used: &mut Vec<bool>,
        x: usize,
    ) -> bool {
        let n = a.order;
        if x == n {
            // verify homomorphism in full
            return (0..n).all(|p| {
                (0..n).all(|q| map[a.mul[p][q]] == Some(b.mul[map[p].unwrap()][map[q].unwrap()]))
            });
        }
        if map[x].is_some() {
            return extend(a, b, map, used, x + 1);
        }
        for y in 0..n {
            if used[y] {
                continue;
            }
            map[x] = Some(y);
            used[y] = true;
            // propagate products of already-mapped elements; bail on clash
            let mut consistent = true;
            'outer: for p in 0..n {
                for q in 0..n {
                    if let (Some(mp), Some(mq)) = (map[p], map[q]) {
                        let img = b.mul[mp][mq];
                        match map[a.mul[p][q]] {
                            Some(m) if m != img => {
                                consistent = false;
                                break 'outer;
                            }
                            _ => {}
                        }
                    }
                }
            }
            if consistent && extend(a, b, map, used, x + 1) {
                return true;
            }
            map[x] = None;
            used[y] = false;
        }
        false
    }
    let mut map: Vec<Option<usize>> = vec![None; n];
    let mut used = vec![false; n];
    map[0] = Some(0);
    used[0] = true;
    extend(a, b, &mut map, &mut used, 1)
}

/// Dihedral group of order 2m (symmetries of the regular m-gon).
pub fn dihedral(m: usize) -> FiniteGroupTable {
    assert!(m >= 1);
    let n = 2 * m;
    let idx = |r: usize, s: usize| s * m + r;
    let mut mul = vec![vec![0usize; n]; n];
    for r in 0..m {
        for s in 0..2 {
            for r2 in 0..m {
                for s2 in 0..2 {
                    // (r,s)*(r2,s2): reflections conjugate rotations
                    let rr = if s == 1 { (r + m - r2 % m) % m } else { (r + r2) % m };
                    mul[idx(r, s)][idx(r2, s2)] = idx(rr, (s + s2) % 2);
                }
            }
        }
    }
    FiniteGroupTable::new(mul, None).expect("dihedral table is a group")
}
