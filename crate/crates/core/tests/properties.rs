//! Property tests over randomly drawn small instances.

use hiercc_core::cache::ItemKind;
use hiercc_core::delivery::Phase;
use hiercc_core::gf::{is_prime, PrimeField};
use hiercc_core::harness::{deliver, outcomes, place, random_surjections, run_episode};
use hiercc_core::rates::{measured_memory, memories_scheme1, memories_scheme2};
use hiercc_core::{Demand, FileLibrary, SchemeId, SystemConfig};
use proptest::prelude::*;

/// `(K1, K2, N, L, seed)` with `2 <= N <= K`.
fn instance() -> impl Strategy<Value = (usize, usize, usize, usize, u64)> {
    (1usize..=3, 2usize..=3).prop_flat_map(|(k1, k2)| (Just(k1), Just(k2), 2..=k1 * k2, 1usize..=3, any::<u64>()))
}

fn scheme() -> impl Strategy<Value = SchemeId> {
    prop_oneof![Just(SchemeId::First), Just(SchemeId::Second)]
}

fn small_prime() -> impl Strategy<Value = u64> {
    (2u64..200).prop_filter("prime", |&p| is_prime(p))
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn field_operations_are_consistent(p in small_prime(), a in any::<u64>(), b in any::<u64>(), c in any::<u64>()) {
        let f = PrimeField::new(p).unwrap();
        let (a, b, c) = (f.elem(a), f.elem(b), f.elem(c));
        prop_assert_eq!(f.add(f.sub(a, b), b), a);
        prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
        prop_assert_eq!(f.add(a, f.neg(a)), f.elem(0));
        if !a.is_zero() {
            prop_assert_eq!(f.mul(a, f.inv(a).unwrap()), f.elem(1));
        } else {
            prop_assert!(f.inv(a).is_err());
        }
        prop_assert_eq!(f.pow(a, p - 1), if a.is_zero() { f.elem(0) } else { f.elem(1) });
    }

    #[test]
    fn every_payload_matches_its_label((k1, k2, n, l, seed) in instance(), scheme in scheme()) {
        let cfg = SystemConfig::new(k1, k2, n, l, None).unwrap();
        let lib = FileLibrary::random(&cfg, seed);
        let demand = Demand::new(&cfg, random_surjections(&cfg, seed, 1).remove(0)).unwrap();
        let placement = place(&cfg, scheme, &lib).unwrap();
        for cache in placement.mirrors.iter().chain(&placement.users) {
            prop_assert!(cache.is_consistent(cfg.field(), &lib));
        }
        let delivery = deliver(&cfg, &placement, &lib, &demand).unwrap();
        for t in delivery.all() {
            prop_assert!(t.data.is_consistent(cfg.field(), &lib), "{:?}", t.phase);
        }
    }

    #[test]
    fn memories_match_closed_forms((k1, k2, n, _l, _seed) in instance(), scheme in scheme()) {
        let cfg = SystemConfig::new(k1, k2, n, 1, None).unwrap();
        let placement = place(&cfg, scheme, &FileLibrary::zeros(&cfg)).unwrap();
        let (m1, m2) = match scheme {
            SchemeId::First => memories_scheme1(&cfg),
            SchemeId::Second => memories_scheme2(&cfg),
        };
        for c in &placement.mirrors {
            prop_assert_eq!(measured_memory(&cfg, c.len()), m1.clone());
        }
        for c in &placement.users {
            prop_assert_eq!(measured_memory(&cfg, c.len()), m2.clone());
        }
    }

    #[test]
    fn users_never_cache_their_own_pairs((k1, k2, n, _l, _seed) in instance(), scheme in scheme()) {
        let cfg = SystemConfig::new(k1, k2, n, 1, None).unwrap();
        let placement = place(&cfg, scheme, &FileLibrary::zeros(&cfg)).unwrap();
        for k in 1..=cfg.users() {
            let block = cfg.users_of_mirror(cfg.mirror_of(k).unwrap()).unwrap();
            for item in placement.user(k).items() {
                if let ItemKind::Uncoded(id) = item.kind {
                    prop_assert!(id.i != k && id.j != k);
                    prop_assert!(block.contains(&id.i) || block.contains(&id.j));
                }
            }
        }
    }

    #[test]
    fn schemes_share_phases_a_and_b((k1, k2, n, l, seed) in instance()) {
        let cfg = SystemConfig::new(k1, k2, n, l, None).unwrap();
        let lib = FileLibrary::random(&cfg, seed);
        let demand = Demand::new(&cfg, random_surjections(&cfg, seed, 1).remove(0)).unwrap();
        let d1 = deliver(&cfg, &place(&cfg, SchemeId::First, &lib).unwrap(), &lib, &demand).unwrap();
        let d2 = deliver(&cfg, &place(&cfg, SchemeId::Second, &lib).unwrap(), &lib, &demand).unwrap();
        prop_assert_eq!(&d1.server, &d2.server);
        for m in 1..=cfg.mirrors() {
            let ab: Vec<_> = d1.mirror(m).iter().filter(|t| matches!(t.phase, Phase::A | Phase::B)).cloned().collect();
            prop_assert_eq!(ab.as_slice(), d2.mirror(m));
        }
    }

    #[test]
    fn multi_mirror_episodes_decode_and_oracle_agrees((k1, k2, n, l, seed) in instance(), scheme in scheme()) {
        let cfg = SystemConfig::new(k1, k2, n, l, None).unwrap();
        let lib = FileLibrary::random(&cfg, seed);
        let demand = Demand::new(&cfg, random_surjections(&cfg, seed ^ 1, 1).remove(0)).unwrap();
        let placement = place(&cfg, scheme, &lib).unwrap();
        let delivery = deliver(&cfg, &placement, &lib, &demand).unwrap();
        for u in outcomes(&cfg, &placement, &delivery, &lib, &demand, true) {
            prop_assert_eq!(u.oracle_agrees(), Some(true), "user {} {:?}", u.user, u.oracle);
            if k1 >= 2 || scheme == SchemeId::Second {
                prop_assert!(u.success, "user {} missing {:?}", u.user, u.missing);
            }
        }
    }

    #[test]
    fn episodes_are_deterministic((k1, k2, n, l, seed) in instance(), scheme in scheme()) {
        let cfg = SystemConfig::new(k1, k2, n, l, None).unwrap();
        let d = random_surjections(&cfg, seed, 1).remove(0);
        let a = run_episode(&cfg, scheme, &d, &FileLibrary::random(&cfg, seed)).unwrap();
        let b = run_episode(&cfg, scheme, &d, &FileLibrary::random(&cfg, seed)).unwrap();
        prop_assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }
}
