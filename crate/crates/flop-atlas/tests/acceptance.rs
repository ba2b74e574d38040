//! End-to-end acceptance suite. Each criterion prints exactly one PASS/FAIL
//! line (run with --nocapture to see them all).

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use flop_atlas::chambers::{
    base_divisor, enumerate_chambers, flopping_classes, gamma_table, hilb_chow_chamber, mov_cone,
    verify_gamma_chain, walk, ResolutionModel, WalkConfig,
};
use flop_atlas::cones::strict_interior_point;
use flop_atlas::exactq::{Q, QMatrix, QVector};
use flop_atlas::fiberdiag::{
    flop, lambda_class, load_fixture, p2_classes, states_equal, walk_states, CurveClass, Surface,
};
use flop_atlas::mckay::{
    conjugacy_class_count, normalizer_quotient_order, symmetric3, wreath_z2,
};
use flop_atlas::rootsys::{
    a_even_orbit_order, a_odd_orbit_order, cartan_matrix, d4_triality, fold, involution, u_matrix,
    Family, RootSystem,
};
use flop_atlas::toricfan::{
    c4z3_fan, c4z3_lattice, c4z3_rays, lattice_volume, mukai_flop_fans, slice_volume, validate_fan,
};

fn criterion(label: &str, budget: Option<Duration>, body: impl FnOnce() + std::panic::UnwindSafe) {
    let start = Instant::now();
    let result = std::panic::catch_unwind(body);
    let elapsed = start.elapsed();
    let timed_out = budget.map_or(false, |b| elapsed > b);
    let ok = result.is_ok() && !timed_out;
    println!(
        "criterion {}: {} ({:.2?})",
        label,
        if ok { "PASS" } else { "FAIL" },
        elapsed
    );
    if let Err(e) = result {
        std::panic::resume_unwind(e);
    }
    assert!(!timed_out, "criterion {} exceeded {:?}", label, budget.unwrap());
}

fn qv(v: &[i64]) -> Vec<Q> {
    v.iter().map(|&x| Q::from_int(x)).collect()
}

#[test]
fn criterion_01_folding_identities() {
    criterion("1 (folding identities)", Some(Duration::from_secs(1)), || {
        // A_{2k+1} folds to the rank k+1 system with a short last root.
        for (rank, target_rank) in [(3usize, 2usize), (5, 3), (7, 4)] {
            let a = RootSystem::new(Family::A, rank).unwrap();
            let m = fold(&a, &involution(Family::A, rank).unwrap(), &a_odd_orbit_order(rank))
                .unwrap();
            assert_eq!(m, cartan_matrix(Family::B, target_rank).unwrap(), "A_{}", rank);
        }
        // D_n folds to the (n-1)x(n-1) tridiagonal with a doubled first link.
        for n in 4usize..=6 {
            let d = RootSystem::new(Family::D, n).unwrap();
            let mut order = vec![0usize];
            order.extend(2..n);
            let m = fold(&d, &involution(Family::D, n).unwrap(), &order).unwrap();
            let k = n - 1;
            let mut expect = vec![vec![0i64; k]; k];
            for i in 0..k {
                expect[i][i] = 2;
                if i + 1 < k {
                    expect[i][i + 1] = -1;
                    expect[i + 1][i] = -1;
                }
            }
            expect[1][0] = -2;
            let expect =
                QMatrix::from_rows(expect.iter().map(|r| QVector::from_ints(r)).collect());
            assert_eq!(m, expect, "D_{}", n);
        }
        // E_6 folds to F_4.
        let e6 = RootSystem::new(Family::E, 6).unwrap();
        let m = fold(&e6, &involution(Family::E, 6).unwrap(), &[0, 2, 3, 1]).unwrap();
        assert_eq!(m, cartan_matrix(Family::F, 4).unwrap());
        // D_4 under triality folds to G_2 (orientation fixed by orbit order).
        let d4 = RootSystem::new(Family::D, 4).unwrap();
        let g = fold(&d4, &d4_triality(), &[0, 2]).unwrap();
        let g2 = cartan_matrix(Family::G, 2).unwrap();
        assert!(g == g2 || g == g2.transpose());
        // A_{2n} folds to U_n.
        for n in 1usize..=5 {
            let a = RootSystem::new(Family::A, 2 * n).unwrap();
            let m = fold(&a, &involution(Family::A, 2 * n).unwrap(), &a_even_orbit_order(2 * n))
                .unwrap();
            assert_eq!(m, u_matrix(n), "A_{}", 2 * n);
        }
    });
}

fn all_small_systems() -> Vec<RootSystem> {
    let mut out = Vec::new();
    for r in 1..=4 {
        out.push(RootSystem::new(Family::A, r).unwrap());
    }
    for r in 2..=4 {
        out.push(RootSystem::new(Family::B, r).unwrap());
        out.push(RootSystem::new(Family::C, r).unwrap());
    }
    for r in 3..=4 {
        out.push(RootSystem::new(Family::D, r).unwrap());
    }
    out.push(RootSystem::new(Family::F, 4).unwrap());
    out.push(RootSystem::new(Family::G, 2).unwrap());
    out.push(RootSystem::new(Family::E, 6).unwrap());
    out
}

#[test]
fn criterion_02_weyl_suite() {
    criterion("2 (Weyl dimension suite)", Some(Duration::from_secs(5)), || {
        for s in all_small_systems() {
            assert_eq!(s.weyl_dim(&vec![Q::zero(); s.rank]), Q::one());
        }
        let a1 = RootSystem::new(Family::A, 1).unwrap();
        for m in 0..=20i64 {
            assert_eq!(a1.weyl_dim(&qv(&[m])), Q::from_int(m + 1));
        }
        // Serre identity on pseudo-random integer weights (fixed xorshift seed).
        let mut state = 0x243f6a8885a308d3u64;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state % 13) as i64 - 6
        };
        for s in all_small_systems() {
            for _ in 0..50 {
                let lambda: Vec<Q> = (0..s.rank).map(|_| Q::from_int(next())).collect();
                assert!(s.serre_dual_check(&lambda), "{:?} rank {}", s.family, s.rank);
            }
        }
        // Each simple coroot pairs to 2 against rho.
        for s in all_small_systems() {
            let rho = s.rho();
            for i in 0..s.rank {
                let mut alpha = vec![0i64; s.rank];
                alpha[i] = 1;
                assert_eq!(s.coroot_pairing(&alpha, &rho), Q::from_int(2));
            }
        }
    });
}

#[test]
fn criterion_03_gamma_chain() {
    criterion("3 (gamma threshold chain)", None, || {
        for n in 1usize..=8 {
            let config = WalkConfig::default_beta(n);
            assert!(verify_gamma_chain(&config), "n={}", n);
            // Sorted thresholds must read (1,1),(2,2),(1,2),(3,3),(2,3),(1,3),...
            let gamma = gamma_table(&config);
            let mut sorted: Vec<((usize, usize), Q)> = gamma.clone().into_iter().collect();
            sorted.sort_by(|a, b| a.1.cmp(&b.1));
            let mut expected = Vec::new();
            for j in 1..=n {
                for i in (1..=j).rev() {
                    expected.push((i, j));
                }
            }
            let got: Vec<(usize, usize)> = sorted.iter().map(|(k, _)| *k).collect();
            assert_eq!(got, expected, "n={}", n);
            // <lambda_ij, D_t> = t - gamma_ij at assorted rational t.
            let model = ResolutionModel::new(n);
            let d0 = base_divisor(&model, &config);
            let mut e0div = QVector::zeros(model.dim());
            e0div.0[0] = Q::one();
            let mut ts = vec![Q::zero(), Q::from_int(1), Q::from_int(7) / Q::from_int(2)];
            ts.extend(gamma.values().cloned());
            for t in &ts {
                let dt = d0.sub(&e0div.scale(&(t / &Q::from_int(2))));
                for i in 1..=n {
                    for j in i..=n {
                        let val = model.pairing.pair(&model.lambda(i, j), &dt);
                        assert_eq!(val, t - &gamma[&(i, j)], "n={} ({},{}) t={}", n, i, j, t);
                    }
                }
            }
        }
    });
}

#[test]
fn criterion_04_walk_cardinality() {
    criterion("4 (walk cardinality and endpoints)", None, || {
        for n in 1usize..=6 {
            let model = ResolutionModel::new(n);
            let config = WalkConfig::default_beta(n);
            let steps = walk(&model, &config).unwrap();
            assert_eq!(steps.len(), n * (n + 1) / 2 + 1, "n={}", n);
            // A different superincreasing beta gives the same sign sequence.
            let beta2: Vec<Q> = (0..n as u32).map(|i| Q::from_int(3i64.pow(i))).collect();
            let steps2 = walk(&model, &WalkConfig::new(n, beta2).unwrap()).unwrap();
            let sign_seq = |s: &[flop_atlas::chambers::WalkStep]| {
                s.iter().map(|x| x.chamber.signs.clone()).collect::<Vec<_>>()
            };
            assert_eq!(sign_seq(&steps), sign_seq(&steps2), "n={}", n);
            // The walk starts at the Hilb-Chow chamber with the expected facets.
            let hc = hilb_chow_chamber(&model);
            assert_eq!(steps[0].chamber.signs, hc.signs, "n={}", n);
            let mut expected_walls: Vec<QVector> = vec![model.e(0)];
            for i in 1..=n {
                expected_walls.push(model.lambda(i, i));
            }
            // Wall labels are inward-oriented; the facet hyperplanes are what
            // the criterion pins down, so compare up to sign.
            let got = &steps[0].chamber.walls;
            assert_eq!(got.len(), expected_walls.len(), "n={}", n);
            assert!(
                expected_walls.iter().all(|w| got.contains(w) || got.contains(&w.neg())),
                "n={}",
                n
            );
            // The final fiber state has exactly one plane, with lines in +lambda_1n.
            let states = walk_states(n).unwrap();
            let last = states.last().unwrap();
            let planes: Vec<&CurveClass> = last
                .components
                .values()
                .filter_map(|s| match s {
                    Surface::ProjPlane { line } => Some(line),
                    _ => None,
                })
                .collect();
            assert_eq!(planes.len(), 1, "n={}", n);
            assert_eq!(planes[0], &lambda_class(n, 1, n), "n={}", n);
        }
    });
}

#[test]
fn criterion_05_golden_diagrams() {
    criterion("5 (golden fixtures n=6)", Some(Duration::from_secs(10)), || {
        let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/n6");
        let states = walk_states(6).unwrap();
        let mut checked = 0;
        for entry in std::fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.extension().and_then(|e| e.to_str()) != Some("json") {
                continue;
            }
            let fixture = load_fixture(&path).unwrap();
            let state = states
                .iter()
                .find(|s| s.interval.0 == fixture.interval.0)
                .unwrap_or_else(|| panic!("no state at {}", fixture.interval.0));
            assert!(states_equal(&state.to_spec(), &fixture), "{}", path.display());
            checked += 1;
        }
        assert_eq!(checked, 17);
    });
}

#[test]
fn criterion_06_n2_cross_check() {
    criterion("6 (n=2 cross-check)", None, || {
        let states = walk_states(2).unwrap();
        let state = states.iter().find(|s| s.interval.0 == "g_2_2").unwrap();
        let expected: BTreeSet<CurveClass> =
            [vec![1, -1, 0], vec![1, 0, -1], vec![-1, 1, 1]].into_iter().collect();
        assert_eq!(p2_classes(state), expected);

        // Independent oracle: try all sign vectors over the three flopping
        // hyperplanes, keeping those cut out a nonempty open region of Mov.
        let model = ResolutionModel::new(2);
        let dim = model.dim();
        let form = |c: &QVector| -> QVector {
            let m = &model.pairing.matrix;
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
        };
        let flops = flopping_classes(&model);
        assert_eq!(flops.len(), 3);
        let mut feasible = 0;
        for mask in 0..(1u32 << flops.len()) {
            let mut rows: Vec<QVector> = (0..=model.n).map(|a| form(&model.e(a))).collect();
            for (k, fc) in flops.iter().enumerate() {
                let f = form(&fc.class);
                rows.push(if mask & (1 << k) != 0 { f } else { f.neg() });
            }
            if strict_interior_point(&rows, &[], dim).is_some() {
                feasible += 1;
            }
        }
        assert_eq!(feasible, 5);
        assert_eq!(enumerate_chambers(&model).unwrap().len(), feasible);
    });
}

#[test]
fn criterion_07_duality_structure() {
    criterion("7 (movable cone duality)", None, || {
        for n in 1usize..=6 {
            let model = ResolutionModel::new(n);
            let mov = mov_cone(&model);
            assert!(mov.is_simplicial(), "n={}", n);
            assert_eq!(mov.dual(&model.pairing).dual(&model.pairing), mov, "n={}", n);
            // Every chamber wall lies on a flopping hyperplane or a Mov facet.
            if n <= 4 {
                let mut allowed: Vec<QVector> = (0..=n).map(|a| model.e(a)).collect();
                for fc in flopping_classes(&model) {
                    allowed.push(fc.class.clone());
                    allowed.push(fc.class.neg());
                }
                for c in enumerate_chambers(&model).unwrap() {
                    for w in &c.walls {
                        assert!(allowed.contains(w), "n={} wall {:?}", n, w);
                    }
                }
            }
        }
    });
}

#[test]
fn criterion_08_toric() {
    criterion("8 (toric fans)", Some(Duration::from_secs(2)), || {
        for r in 2usize..=4 {
            let (plus, minus) = mukai_flop_fans(r);
            for fan in [&plus, &minus] {
                assert!(validate_fan(fan), "r={}", r);
                assert!(fan.all_unimodular().unwrap(), "r={}", r);
            }
        }
        let fan = c4z3_fan().unwrap();
        assert!(validate_fan(&fan));
        assert!(fan.all_unimodular().unwrap());
        // The fractional rays v1, v2 span an edge of some maximal cone.
        assert!(fan.maximal_cones.iter().any(|c| c.contains(&4) && c.contains(&5)));
        // The refined lattice has index 3 over the standard one.
        let lattice = c4z3_lattice();
        assert_eq!(lattice.covolume(), Q::one() / Q::from_int(3));
        let rays = c4z3_rays();
        assert_eq!(
            lattice_volume(&[rays[0].clone(), rays[1].clone(), rays[2].clone(), rays[3].clone()], &lattice)
                .unwrap(),
            Q::from_int(3)
        );
        // Volume conservation: the cones tile the quotient cone exactly.
        let total: Q = fan
            .maximal_cones
            .iter()
            .map(|c| {
                let cr: Vec<QVector> = c.iter().map(|&i| fan.rays[i].clone()).collect();
                slice_volume(&cr)
            })
            .fold(Q::zero(), |a, b| a + b);
        assert_eq!(total, slice_volume(&rays[0..4]));
    });
}

#[test]
fn criterion_09_mckay() {
    criterion("9 (group utilities)", None, || {
        let s3 = symmetric3();
        assert_eq!(conjugacy_class_count(&s3), 3);
        // Order-2 subgroup generated by a transposition has trivial
        // normalizer quotient.
        let t = (1..s3.order).find(|&x| s3.mul[x][x] == 0).unwrap();
        assert_eq!(normalizer_quotient_order(&s3, &[0, t]).unwrap(), 1);
        // Wreath class counts against an independent orbit-partition oracle.
        for m in 1..=6 {
            let g = wreath_z2(m);
            assert_eq!(g.order, 2 * m * m);
            let mut classes: Vec<BTreeSet<usize>> = Vec::new();
            for x in 0..g.order {
                if classes.iter().any(|c| c.contains(&x)) {
                    continue;
                }
                classes.push(
                    (0..g.order)
                        .map(|h| g.mul[g.mul[h][x]][g.inverse(h)])
                        .collect(),
                );
            }
            assert_eq!(conjugacy_class_count(&g), classes.len(), "m={}", m);
        }
    });
}

#[test]
fn criterion_10_flop_involution() {
    criterion("10 (flop involution)", None, || {
        for n in 1usize..=6 {
            let states = walk_states(n).unwrap();
            let mut order = Vec::new();
            for j in 1..=n {
                for i in (1..=j).rev() {
                    order.push((i, j));
                }
            }
            for (k, &(i, j)) in order.iter().enumerate() {
                let mu = lambda_class(n, i, j);
                let neg: CurveClass = mu.iter().map(|x| -x).collect();
                let forward = flop(&states[k], &mu).unwrap();
                let back = flop(&forward, &neg).unwrap();
                assert_eq!(back.components, states[k].components, "n={} step {}", n, k);
                assert_eq!(back.incidences, states[k].incidences, "n={} step {}", n, k);
            }
        }
    });
}
