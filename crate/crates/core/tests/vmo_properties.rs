mod common;

use std::collections::BTreeSet;

use actiongraph::Oracle;
use common::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn spell(o: &Oracle, word: &[usize]) -> bool {
    let mut state = 0;
    for &c in word {
        match o.transition(state, c) {
            Some(next) => state = next,
            None => return false,
        }
    }
    true
}

#[test]
fn reference_helpers_on_known_string() {
    // a b b c a b c d a b c
    let s = [0, 1, 1, 2, 0, 1, 2, 3, 0, 1, 2];
    assert_eq!(longest_repeated_suffix(&s, 7), 2); // "bc" at 3..4
    assert_eq!(longest_repeated_suffix(&s, 11), 3); // "abc" at 5..7
    assert_eq!(first_end(&s, &[0, 1, 2]), Some(7));
    // "abc" is spelled 0 -a-> 1 -b-> 2 -c-> 4, so it is recognized in 4
    // even though its first occurrence ends at 7.
    let links = brute_factor_oracle(&s);
    assert!(links.contains(&(2, 4)));
    assert_eq!(recognize(&s, &links, &[0, 1, 2]), Some(4));
    assert_eq!(
        brute_suffix_links(&s),
        vec![
            None,
            Some(0),
            Some(0),
            Some(2),
            Some(0),
            Some(1),
            Some(2),
            Some(4),
            Some(0),
            Some(1),
            Some(2),
            Some(4)
        ]
    );
}

#[test]
fn reference_sequence_links_match_brute_force() {
    let s = [0, 1, 1, 2, 0, 1, 2, 3, 0, 1, 2];
    let o = Oracle::build(0.5, &symbol_frames(&s)).unwrap();
    assert_eq!(o.labels(), &s);
    assert_eq!(o.suffix_links(), &brute_suffix_links(&s)[..]);
    let links: BTreeSet<(usize, usize)> = o.links().map(|(a, _, b, _)| (a, b)).collect();
    assert_eq!(links, brute_factor_oracle(&s));
    for (src, label, dst, external) in o.links() {
        assert_eq!(label, s[dst - 1]);
        assert_eq!(external, dst != src + 1);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn suffix_and_factor_structure(s in prop::collection::vec(0usize..4, 1..80)) {
        // Relabel in order of first appearance to match the oracle's labels.
        let mut map = Vec::new();
        let s: Vec<usize> = s.iter().map(|c| match map.iter().position(|m| m == c) {
            Some(i) => i,
            None => { map.push(*c); map.len() - 1 }
        }).collect();
        let o = Oracle::build(0.5, &symbol_frames(&s)).unwrap();
        prop_assert_eq!(o.labels(), &s[..]);
        prop_assert_eq!(o.suffix_links(), &brute_suffix_links(&s)[..]);
        let links: BTreeSet<(usize, usize)> = o.links().map(|(a, _, b, _)| (a, b)).collect();
        prop_assert_eq!(links, brute_factor_oracle(&s));
        for w in factors(&s, 4) {
            prop_assert!(spell(&o, &w), "factor {:?} not spellable", w);
        }
    }

    #[test]
    fn sfx_chain_reaches_root(frames in prop::collection::vec(prop::array::uniform2(-1.0..1.0f64), 1..120), theta in 0.0..0.8f64) {
        let o = Oracle::build(theta, &frames).unwrap();
        for t in 1..=o.len() {
            let mut k = t;
            let mut steps = 0;
            while k != 0 {
                let next = o.sfx(k).unwrap();
                prop_assert!(next < k);
                k = next;
                steps += 1;
                prop_assert!(steps <= t);
            }
            prop_assert_eq!(o.forward(t - 1).first(), Some(&t));
        }
        // Clusters partition the states by label.
        let mut all: Vec<usize> = o.clusters().iter().flatten().copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (1..=o.len()).collect::<Vec<_>>());
        for (k, b) in o.clusters().iter().enumerate() {
            prop_assert!(b.windows(2).all(|w| w[0] < w[1]));
            prop_assert!(b.iter().all(|&t| o.label(t) == k));
        }
    }

    #[test]
    fn model_round_trip(frames in prop::collection::vec(prop::array::uniform3(-5.0..5.0f64), 0..60), theta in 0.0..2.0f64) {
        let o = Oracle::build(theta, &frames).unwrap();
        prop_assert_eq!(Oracle::from_json(&o.to_json()).unwrap(), o);
    }
}

#[test]
fn degenerate_thresholds_on_random_series() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let n = rng.random_range(2..60);
        let frames: Vec<[f64; 3]> = (0..n).map(|_| rng.random()).collect();
        assert_eq!(Oracle::build(0.0, &frames).unwrap().num_clusters(), n);
        let mut max = 0.0f64;
        for a in &frames {
            for b in &frames {
                max = max.max(actiongraph::types::feature_distance(a, b));
            }
        }
        assert_eq!(Oracle::build(max, &frames).unwrap().num_clusters(), 1);
    }
}

#[test]
fn label_count_is_not_monotone_in_threshold() {
    // A larger threshold can stop a suffix walk earlier, which leaves fewer
    // forward links for later frames to match against.
    let frames = [[2.0, 2.0], [1.0, 4.0], [3.0, 3.0], [1.0, 2.0], [0.0, 1.0]];
    let narrow = Oracle::build(1.5, &frames).unwrap();
    let wide = Oracle::build(2.0, &frames).unwrap();
    assert_eq!(narrow.labels(), &[0, 1, 0, 0, 0]);
    assert_eq!(wide.labels(), &[0, 1, 0, 1, 2]);
}

#[test]
fn threshold_extremes_bracket_label_count() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let n = rng.random_range(5..80);
        let frames: Vec<[f64; 2]> = (0..n).map(|_| [rng.random(), rng.random()]).collect();
        for step in 0..=40 {
            let k = Oracle::build(step as f64 * 0.03, &frames)
                .unwrap()
                .num_clusters();
            assert!((1..=n).contains(&k));
        }
    }
}

#[test]
fn incremental_links_are_frozen() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let frames: Vec<[f64; 2]> = (0..150).map(|_| [rng.random(), rng.random()]).collect();
    let mut o = Oracle::new(0.2).unwrap();
    let mut before: Vec<Option<usize>> = vec![None];
    let mut labels_before: Vec<usize> = vec![];
    for f in &frames {
        o.add_frame(f).unwrap();
        assert_eq!(&o.suffix_links()[..before.len()], &before[..]);
        assert_eq!(&o.labels()[..labels_before.len()], &labels_before[..]);
        before = o.suffix_links().to_vec();
        labels_before = o.labels().to_vec();
    }
}
