use proptest::prelude::*;

use flop_atlas::chambers::{gamma_table, verify_gamma_chain, WalkConfig};
use flop_atlas::cones::{Cone, Pairing};
use flop_atlas::exactq::{Q, QMatrix, QVector};
use flop_atlas::mckay::{conjugacy_class_count, wreath_z2, FiniteGroupTable};
use flop_atlas::rootsys::{Family, RootSystem};

fn qv(v: &[i64]) -> Vec<Q> {
    v.iter().map(|&x| Q::from_int(x)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn serre_duality_on_random_weights(rank in 1usize..=4, coeffs in proptest::collection::vec(-8i64..=8, 4)) {
        let rs = RootSystem::new(Family::A, rank).unwrap();
        let lambda = qv(&coeffs[..rank]);
        prop_assert!(rs.serre_dual_check(&lambda));
    }

    #[test]
    fn cone_double_dual_is_identity(raw in proptest::collection::vec(proptest::collection::vec(-4i64..=4, 3), 1..6)) {
        let rays: Vec<QVector> = raw.iter().map(|r| QVector::from_ints(r)).collect();
        let cone = Cone::from_rays(3, &rays);
        let id = Pairing::new(QMatrix::identity(3));
        prop_assert_eq!(cone.dual(&id).dual(&id), cone);
    }

    #[test]
    fn gamma_chain_holds_for_any_superincreasing_beta(n in 1usize..=6, extras in proptest::collection::vec(1i64..=5, 6)) {
        // beta_i = (sum of predecessors) + extra_i is superincreasing by
        // construction; the threshold ordering must not depend on the values.
        let mut beta = Vec::new();
        let mut total = 0i64;
        for &e in extras.iter().take(n) {
            let b = total + e;
            beta.push(Q::from_int(b));
            total += b;
        }
        let config = WalkConfig::new(n, beta).unwrap();
        prop_assert!(verify_gamma_chain(&config));
        let gamma = gamma_table(&config);
        prop_assert_eq!(gamma.len(), n * (n + 1) / 2);
    }

    #[test]
    fn class_count_is_relabeling_invariant(m in 1usize..=4, seed in 0u64..1000) {
        let g = wreath_z2(m);
        let n = g.order;
        // Fisher-Yates with a toy xorshift; identity stays at 0.
        let mut state = seed.wrapping_add(0x9e3779b97f4a7c15);
        let mut rng = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        let mut perm: Vec<usize> = (0..n).collect();
        for i in (2..n).rev() {
            let j = 1 + (rng() as usize) % i;
            perm.swap(i, j);
        }
        let inv = {
            let mut v = vec![0usize; n];
            for (i, &p) in perm.iter().enumerate() {
                v[p] = i;
            }
            v
        };
        let mul: Vec<Vec<usize>> = (0..n)
            .map(|a| (0..n).map(|b| perm[g.mul[inv[a]][inv[b]]]).collect())
            .collect();
        let h = FiniteGroupTable::new(mul, None).unwrap();
        prop_assert_eq!(conjugacy_class_count(&h), conjugacy_class_count(&g));
    }
}
