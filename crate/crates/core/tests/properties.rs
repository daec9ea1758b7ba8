use num_bigint::BigUint;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

use workbench_core::construct::{build_basic, build_fs, count_fs, count_fs_via_phitilde};
use workbench_core::lowdim::{check_properties, gis_count, phitilde, random_candidate, LayeredCandidate};
use workbench_core::setcore::{k_subsets, Family, SetWord};
use workbench_core::spectral::{cheeger_check, johnson, kk_check};
use workbench_core::sunflower::{find_sunflower, is_admissible, is_sunflower, verify_cert, CoreConstraint, SunflowerCert};

fn family(max_n: usize, max_len: usize) -> impl Strategy<Value = Family> {
    (1..=max_n).prop_flat_map(move |n| {
        prop::collection::vec(0..(1u128 << n), 0..=max_len)
            .prop_map(move |codes| Family::new(n, codes.into_iter().map(SetWord)).unwrap())
    })
}

fn uniform_family(max_n: usize) -> impl Strategy<Value = Family> {
    (2..=max_n)
        .prop_flat_map(|n| (Just(n), 1..=n.min(4)))
        .prop_flat_map(|(n, k)| {
            let all: Vec<SetWord> = k_subsets(n, k).collect();
            let len = all.len();
            prop::collection::vec(any::<bool>(), len).prop_map(move |mask| {
                Family::uniform(n, k, all.iter().zip(&mask).filter(|(_, &b)| b).map(|(&x, _)| x)).unwrap()
            })
        })
}

fn permutation(n: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..n).collect::<Vec<usize>>()).prop_shuffle()
}

fn constraint() -> impl Strategy<Value = CoreConstraint> {
    prop_oneof![
        (0usize..3).prop_map(CoreConstraint::Exact),
        (0usize..3).prop_map(CoreConstraint::AtMost),
        Just(CoreConstraint::Any),
    ]
}

fn naive_sunflower(fam: &Family, s: usize, cc: CoreConstraint) -> bool {
    k_subsets(fam.len(), s).any(|idx| {
        let sets: Vec<SetWord> = idx.iter().map(|i| fam.members()[i]).collect();
        matches!(is_sunflower(&sets), Ok(Some(core)) if cc.allows(core.len()))
    })
}

proptest! {
    #[test]
    fn shadow_composes(f in uniform_family(7), a in 0usize..5, b in 0usize..5) {
        let k = f.uniformity().unwrap();
        let (g, h) = (a.min(b).min(k), a.max(b).min(k));
        let twice = f.shadow(h).0.shadow(g).0;
        let once = f.shadow(g).0;
        prop_assert_eq!(twice.members(), once.members());
    }

    #[test]
    fn restriction_partitions(f in family(6, 20), b_code in 0u128..64) {
        let b = SetWord(b_code & SetWord::full(f.ground_n()).0);
        let total: usize = b.iter().count();
        let mut sum = 0;
        for size in 0..=total {
            for a in b.subsets_of_size(size) {
                sum += f.restrict(a, b).unwrap().len();
            }
        }
        prop_assert_eq!(sum, f.len());
    }

    #[test]
    fn shadow_support(f in family(7, 15), h in 0usize..4) {
        let (sh, _) = f.shadow(h);
        prop_assert!(sh.support().is_subset(f.support()));
        if h >= 1 && f.min_member_size().is_none_or(|m| m >= h) {
            prop_assert_eq!(sh.support(), f.support());
        }
    }

    #[test]
    fn text_round_trip(f in family(10, 25)) {
        let text = f.to_text();
        let back = Family::parse(&text).unwrap();
        prop_assert_eq!(back.to_text(), text);
        prop_assert_eq!(back, f);
    }

    #[test]
    fn sunflower_search_matches_naive(f in family(8, 14), s in 2usize..5, cc in constraint()) {
        let fast = find_sunflower(&f, s, cc).unwrap();
        prop_assert_eq!(fast.is_some(), naive_sunflower(&f, s, cc));
        if let Some(cert) = fast {
            prop_assert!(verify_cert(&f, &cert, s, cc).valid);
        }
    }

    #[test]
    fn certificates_survive_supersets(f in family(7, 10), extra in family(7, 6), s in 2usize..4, cc in constraint()) {
        let n = f.ground_n().max(extra.ground_n());
        let big = Family::new(n, f.members().iter().chain(extra.members()).copied()).unwrap();
        if let Some(cert) = find_sunflower(&f, s, cc).unwrap() {
            let remapped = SunflowerCert {
                member_indices: cert.member_indices.iter().map(|&i| big.index_of(f.members()[i]).unwrap()).collect(),
                core: cert.core,
            };
            prop_assert!(verify_cert(&big, &remapped, s, cc).valid);
        }
    }

    #[test]
    fn two_distinct_sets_form_a_small_core_sunflower(f in uniform_family(7)) {
        let k = f.uniformity().unwrap();
        let found = find_sunflower(&f, 2, CoreConstraint::AtMost(k - 1)).unwrap();
        prop_assert_eq!(found.is_some(), f.len() >= 2);
    }

    #[test]
    fn sunflowers_are_relabel_invariant(f in family(7, 12), perm in permutation(7), s in 2usize..4, cc in constraint()) {
        let g = f.with_ground(7).unwrap().relabel(&perm).unwrap();
        prop_assert_eq!(find_sunflower(&f, s, cc).unwrap().is_some(), find_sunflower(&g, s, cc).unwrap().is_some());
    }
}

fn candidate(seed: u64, s: usize, t: usize, phi_st: usize, pool: usize) -> LayeredCandidate {
    random_candidate(&mut StdRng::seed_from_u64(seed), s, t, phi_st, pool, 50)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn phitilde_counts_g_sets(seed in any::<u64>(), which in 0usize..3) {
        let (s, t, phi_st, pool) = [(3, 2, 6, 9), (4, 2, 10, 9), (2, 3, 1, 5)][which];
        let c = candidate(seed, s, t, phi_st, pool);
        let v = phitilde(&c).unwrap();
        prop_assert_eq!(v.components().len(), c.big_t() - t + 1);
        for (i, x) in v.components().iter().enumerate() {
            prop_assert_eq!(x, &BigUint::from(gis_count(&c, i).unwrap()));
        }
    }

    #[test]
    fn phitilde_is_relabel_invariant(seed in any::<u64>(), perm in permutation(12)) {
        let c = candidate(seed, 3, 2, 6, 9);
        let moved = LayeredCandidate::new(c.family.relabel(&perm).unwrap(), 3, 2, 6);
        prop_assert_eq!(phitilde(&c).unwrap(), phitilde(&moved).unwrap());
    }

    #[test]
    fn adding_a_member_raises_only_its_component(seed in any::<u64>()) {
        let c = candidate(seed, 3, 2, 6, 8);
        let supp = c.t_support();
        let cc = CoreConstraint::AtMost(1);
        let before = phitilde(&c).unwrap();
        for size in 3..=supp.len().min(c.big_t()) {
            for x in supp.subsets_of_size(size) {
                if c.family.contains(x) {
                    continue;
                }
                let grown = Family::new(c.family.ground_n(), c.family.members().iter().copied().chain([x])).unwrap();
                if !is_admissible(&grown, 3, cc).unwrap() {
                    continue;
                }
                let after = phitilde(&LayeredCandidate::new(grown, 3, 2, 6)).unwrap();
                let i = size - 2;
                prop_assert_eq!(&after.components()[..i], &before.components()[..i]);
                prop_assert!(after.components()[i] > before.components()[i]);
                return Ok(());
            }
        }
    }

    #[test]
    fn counting_by_parts_matches_enumeration(seed in any::<u64>(), nk in 0usize..4) {
        let (n, k) = [(10, 4), (12, 5), (14, 5), (16, 4)][nk];
        let c = candidate(seed, 3, 2, 6, 9);
        let built = build_fs(&c, n, k).unwrap();
        let direct = k_subsets(n, k).filter(|f| c.family.contains(f.intersection(c.t_support()))).count();
        prop_assert_eq!(built.len(), direct);
        prop_assert_eq!(count_fs(&c, n, k).unwrap(), BigUint::from(direct));
        if n >= c.big_t() {
            prop_assert_eq!(count_fs_via_phitilde(&c, n, k).unwrap(), BigUint::from(direct));
        }
    }

    #[test]
    fn layered_families_stay_admissible(seed in any::<u64>(), k in 3usize..6) {
        let c = candidate(seed, 3, 2, 6, 8);
        let report = check_properties(&c, None).unwrap();
        prop_assert!(report.property1() && report.property2());
        let f = build_fs(&c, 11, k).unwrap();
        prop_assert!(is_admissible(&f, 3, CoreConstraint::Exact(1)).unwrap());
        let basic = build_basic(&c.t_layer(), 11, k).unwrap();
        prop_assert!(basic.is_subfamily_of(&f));
    }

    #[test]
    fn build_fs_is_relabel_equivariant(seed in any::<u64>(), perm in permutation(12)) {
        let c = candidate(seed, 3, 2, 6, 9);
        let moved = LayeredCandidate::new(c.family.relabel(&perm).unwrap(), 3, 2, 6);
        let left = build_fs(&c, 12, 4).unwrap().relabel(&perm).unwrap();
        prop_assert_eq!(left, build_fs(&moved, 12, 4).unwrap());
    }

    #[test]
    fn cheeger_holds_on_johnson_graphs(n in 4usize..9, m_pick in 0usize..4, mask in any::<u128>()) {
        let m = 1 + m_pick % (n / 2);
        let g = johnson(n, m).unwrap();
        let subset: Vec<usize> = (0..g.order()).filter(|&v| mask >> (v % 128) & 1 == 1).take(g.order() / 2).collect();
        prop_assert!(cheeger_check(&g, &subset).unwrap().holds);
    }

    #[test]
    fn kruskal_katona_holds(f in uniform_family(8), h in 1usize..5) {
        let k = f.uniformity().unwrap();
        prop_assert!(kk_check(&f, h.min(k)).unwrap().holds);
    }
}

#[test]
fn johnson_graphs_are_regular() {
    for n in 2..=10 {
        for m in 1..=n / 2 {
            let g = johnson(n, m).unwrap();
            assert_eq!(g.order() as u128, workbench_core::setcore::binomial(n as u64, m as u64));
            assert_eq!(g.regular_degree(), Some(m * (n - m)));
            for v in 0..g.order() {
                for &w in g.neighbors(v) {
                    assert_eq!(g.labels()[v].intersection(g.labels()[w]).len(), m - 1);
                }
            }
        }
    }
}
