use proptest::prelude::*;
use tdspace::beta::{delete_first_td, induced_evolutions, kernel_check_all, random_beta_tree};
use tdspace::count::{count_evolution, count_extensions_bruteforce, enumerate_extensions};
use tdspace::tree::{build_2d_tree, hasse_diagram, validate_structure, BreakpointId, Side};
use tdspace::word::{enumerate_word_evolutions, DupChoice, Word, WordEvolution};

/// Raw `(x, y)` pairs folded into valid steps for whatever word length is current.
fn evolution_from_raw(raw: &[(usize, usize)]) -> WordEvolution {
    let mut e = WordEvolution::initial();
    for &(x, y) in raw {
        let len = e.last_word().len();
        let a = 1 + x % (len + 1);
        let b = (a - 1) + y % (len + 2 - a);
        e.push(DupChoice::new(a, b)).unwrap();
    }
    e
}

fn position(ext: &[BreakpointId], x: BreakpointId) -> usize {
    ext.iter().position(|&y| y == x).unwrap()
}

proptest! {
    #[test]
    fn formula_matches_oracle(raw in prop::collection::vec((0usize..64, 0usize..64), 0..5)) {
        let e = evolution_from_raw(&raw);
        let h = hasse_diagram(&build_2d_tree(&e)).unwrap();
        prop_assert_eq!(count_evolution(&e).unwrap().value, count_extensions_bruteforce(&h).unwrap());
    }

    #[test]
    fn structure_holds(raw in prop::collection::vec((0usize..64, 0usize..64), 0..6)) {
        let e = evolution_from_raw(&raw);
        let report = validate_structure(&build_2d_tree(&e));
        prop_assert!(report.passed(), "{}", report);
    }

    #[test]
    fn words_round_trip(raw in prop::collection::vec((0usize..64, 0usize..64), 0..6)) {
        let e = evolution_from_raw(&raw);
        prop_assert_eq!(&WordEvolution::from_words(e.words()).unwrap(), &e);
        prop_assert_eq!(&WordEvolution::from_json(&e.to_json()).unwrap(), &e);
        let w = e.last_word();
        prop_assert_eq!(&w.to_string().parse::<Word>().unwrap(), w);
        for k in 1..=e.td_count() as u32 {
            prop_assert!(w.count_of(k) >= 1);
        }
    }

    #[test]
    fn deletion_inverts_induction(raw in prop::collection::vec((0usize..64, 0usize..64), 0..3)) {
        let e = evolution_from_raw(&raw);
        for ep in induced_evolutions(&e).unwrap() {
            prop_assert_eq!(&delete_first_td(&ep).unwrap(), &e);
        }
    }

    #[test]
    fn random_beta_trees_satisfy_kernel(seed in any::<u64>(), size in 2usize..11) {
        let t = random_beta_tree(seed, size);
        prop_assert!(t.validate().is_ok());
        for k in kernel_check_all(&t).unwrap() {
            prop_assert!(k.equal(), "r={} {} vs {}", k.r, k.lhs, k.rhs);
        }
    }
}

#[test]
fn fenced_tds_are_reversed_in_every_extension() {
    for n in 1..=3 {
        for e in enumerate_word_evolutions(n) {
            let t = build_2d_tree(&e);
            let exts = enumerate_extensions(&hasse_diagram(&t).unwrap()).unwrap();
            for k in 1..=n as u32 {
                let (a, b) = (BreakpointId::new(k, Side::A), BreakpointId::new(k, Side::B));
                let reversed = exts.iter().filter(|x| position(x, a) < position(x, b)).count();
                if t.has_fence(k) {
                    assert_eq!(reversed, exts.len(), "{e} TD {k}");
                }
            }
        }
    }
}

#[test]
fn non_fence_direction_can_vary() {
    let e = WordEvolution::from_words(&["1".parse().unwrap(), "121".parse().unwrap()]).unwrap();
    let t = build_2d_tree(&e);
    assert!(!t.has_fence(2));
    let exts = enumerate_extensions(&hasse_diagram(&t).unwrap()).unwrap();
    let (a, b) = (BreakpointId::a(2), BreakpointId::b(2));
    let reversed = exts.iter().filter(|x| position(x, a) < position(x, b)).count();
    assert!(reversed > 0 && reversed < exts.len());
}
