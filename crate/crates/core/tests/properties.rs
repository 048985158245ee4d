use std::collections::BTreeSet;
use std::sync::Arc;

use proptest::prelude::*;

use prodone_core::dihedral;
use prodone_core::monoid::{enumerate_atoms, tame_bounds, Lengths};
use prodone_core::{
    is_product_one, product_one_ordering, product_set_dp, product_set_perm, AtomMode, Budgets, Element, GroundSet,
    GroupSpec, Monoid, Sequence,
};

fn budgets() -> Budgets {
    Budgets::default()
}

/// Distinct elements of the infinite dihedral group with small exponents.
fn dihedral_ground() -> impl Strategy<Value = GroundSet> {
    prop::collection::btree_set((any::<bool>(), -5i64..=5), 1..=4).prop_map(|set| {
        let els = set
            .into_iter()
            .map(|(refl, k)| if refl { Element::DihRefl(k) } else { Element::DihRot(k) })
            .collect();
        GroundSet::new(Arc::new(GroupSpec::infinite_dihedral()), els).unwrap()
    })
}

fn counts_up_to(width: usize, total: u32) -> impl Strategy<Value = Sequence> {
    prop::collection::vec(0u32..=total, width).prop_filter_map("too long", move |c| {
        (c.iter().sum::<u32>() <= total).then(|| Sequence::from_counts(c).unwrap())
    })
}

fn dihedral_instance(total: u32) -> impl Strategy<Value = (GroundSet, Sequence)> {
    dihedral_ground().prop_flat_map(move |g| {
        let w = g.len();
        (Just(g), counts_up_to(w, total))
    })
}

fn finite_group() -> impl Strategy<Value = GroupSpec> {
    prop_oneof![
        (1u32..=7).prop_map(|n| GroupSpec::cyclic(n).unwrap()),
        (1u32..=4).prop_map(|n| GroupSpec::finite_dihedral(n).unwrap()),
        (1u32..=3).prop_map(|r| GroupSpec::elementary_2(r).unwrap()),
    ]
}

fn finite_instance(total: u32) -> impl Strategy<Value = (GroundSet, Sequence)> {
    finite_group().prop_flat_map(move |group| {
        let group = Arc::new(group);
        let els = group.elements().unwrap();
        let n = els.len();
        (prop::sample::subsequence(els, 1..=n.min(4)), Just(group)).prop_flat_map(move |(sub, group)| {
            let g = GroundSet::new(group, sub).unwrap();
            let w = g.len();
            (Just(g), counts_up_to(w, total))
        })
    })
}

fn reflection_count(g: &GroundSet, s: &Sequence) -> u32 {
    s.counts()
        .iter()
        .enumerate()
        .filter(|&(i, _)| matches!(g.element(i), Element::DihRefl(_)))
        .map(|(_, &m)| m)
        .sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn concatenation_and_division((a, b) in (1usize..=5).prop_flat_map(|w| (counts_up_to(w, 6), counts_up_to(w, 6)))) {
        let ab = a.concat(&b).unwrap();
        prop_assert_eq!(ab.len(), a.len() + b.len());
        prop_assert!(a.divides(&ab).unwrap());
        prop_assert!(b.divides(&ab).unwrap());
        prop_assert_eq!(ab.subtract(&b).unwrap(), a.clone());
        prop_assert_eq!(ab, b.concat(&a).unwrap());
    }

    #[test]
    fn odd_reflection_count_is_never_product_one((g, s) in dihedral_instance(10)) {
        if reflection_count(&g, &s) % 2 == 1 {
            prop_assert!(!is_product_one(&g, &s, &budgets()).unwrap());
        }
    }

    #[test]
    fn product_set_dp_matches_permutations((g, s) in finite_instance(7)) {
        prop_assert_eq!(product_set_dp(&g, &s, &budgets()).unwrap(), product_set_perm(&g, &s, &budgets()).unwrap());
    }

    #[test]
    fn product_set_dp_matches_permutations_dihedral((g, s) in dihedral_instance(7)) {
        prop_assert_eq!(product_set_dp(&g, &s, &budgets()).unwrap(), product_set_perm(&g, &s, &budgets()).unwrap());
    }

    #[test]
    fn abelian_product_set_is_a_single_element(n in 1u32..=9, c in prop::collection::vec(0u32..=3, 9)) {
        let group = Arc::new(GroupSpec::cyclic(n).unwrap());
        let g = GroundSet::whole(group).unwrap();
        let s = Sequence::from_counts(c[..n as usize].to_vec()).unwrap();
        prop_assert_eq!(product_set_dp(&g, &s, &budgets()).unwrap().len(), 1);
    }

    #[test]
    fn balancing_matches_generic_membership((g, s) in dihedral_instance(9)) {
        let generic = product_set_dp(&g, &s, &budgets()).unwrap().contains(Element::DihRot(0));
        prop_assert_eq!(dihedral::is_product_one_dihedral(&g, &s, &budgets()).unwrap(), generic);
    }

    #[test]
    fn witness_ordering_multiplies_to_one((g, s) in dihedral_instance(10)) {
        let member = is_product_one(&g, &s, &budgets()).unwrap();
        let word = product_one_ordering(&g, &s, &budgets()).unwrap();
        prop_assert_eq!(word.is_some(), member);
        if let Some(word) = word {
            let mut sorted = word.clone();
            sorted.sort();
            prop_assert_eq!(sorted, g.terms(&s));
            prop_assert_eq!(g.group().product(&word).unwrap(), Element::DihRot(0));
        }
        if reflection_count(&g, &s) > 0 {
            if let Some(w) = dihedral::decompose(&g, &s, &budgets()).unwrap() {
                prop_assert!(w.verify(&g));
            }
        }
    }

    #[test]
    fn lengths_are_superadditive(
        n in 2u32..=5,
        a in prop::collection::vec(0u32..=3, 5),
        b in prop::collection::vec(0u32..=3, 5),
    ) {
        let group = Arc::new(GroupSpec::cyclic(n).unwrap());
        let g = GroundSet::whole(group).unwrap();
        let m = Monoid::new(g.clone(), budgets());
        let inv = enumerate_atoms(&m, AtomMode::Exact).unwrap();
        let mut lengths = Lengths::new(&m, &inv).unwrap();
        let close = |c: &[u32]| -> Option<Sequence> {
            let s = Sequence::from_counts(c[..n as usize].to_vec()).unwrap();
            m.is_product_one(&s).unwrap().then_some(s)
        };
        if let (Some(sa), Some(sb)) = (close(&a), close(&b)) {
            let la = lengths.of(&sa).unwrap();
            let lb = lengths.of(&sb).unwrap();
            let lab = lengths.of(&sa.concat(&sb).unwrap()).unwrap();
            let sums: BTreeSet<u32> = la.iter().flat_map(|x| lb.iter().map(move |y| x + y)).collect();
            prop_assert!(sums.is_subset(&lab));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn tame_degree_is_max_of_omega_and_one_plus_tau(n in 2u32..=4, pick in any::<prop::sample::Index>()) {
        let group = Arc::new(GroupSpec::cyclic(n).unwrap());
        let g = GroundSet::whole(group).unwrap();
        let m = Monoid::new(g, budgets());
        let inv = enumerate_atoms(&m, AtomMode::Exact).unwrap();
        let u = inv.atoms()[pick.index(inv.atoms().len())].clone();
        let r = tame_bounds(&m, &inv, &u, 2 * n + 1).unwrap();
        if r.prime_within_bound {
            prop_assert_eq!(r.tame.value(), 0);
        } else {
            prop_assert_eq!(r.tame.value(), r.omega.value().max(1 + r.tau.value()));
            prop_assert!(r.omega.value() <= r.tame.value());
        }
    }
}
