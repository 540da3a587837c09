//! Scratch scan used while pinning the two composite fixtures.

use std::collections::BTreeMap;

use tracegraph::degrees::{compatibility_search, SearchBudget};
use tracegraph::families::{generate, FamilySpec};
use tracegraph::graph::{ColorSet, ColoredGraph, Edge};
use tracegraph::perm::Perm;

fn main() {
    scan_eq384();
    scan_fig30();
}

fn scan_eq384() {
    let melon = ColoredGraph::trivial(3, 1);
    let budget = SearchBudget::exhaustive_up_to(9);
    let mut results: BTreeMap<(u64, u64), usize> = BTreeMap::new();
    let mut seen = std::collections::BTreeSet::new();
    for pt_traced in 1..=3usize {
    let pt3 = generate(&FamilySpec::Pt {
        d: 3,
        k: 3,
        blocks: FamilySpec::standard_blocks(3, &ColorSet::from_slice(&[pt_traced])).unwrap(),
    })
    .unwrap();
    for traced in 1..=3usize {
        let rm = generate(&FamilySpec::Rm {
            d: 3,
            n: 2,
            blocks: FamilySpec::standard_blocks(3, &ColorSet::from_slice(&[traced])).unwrap(),
        })
        .unwrap();
        for e1 in 0..3 {
            for e2 in 0..4 {
                let s1 = pt3
                    .flip(Edge { color: 1, white: e1 }, &rm, Edge { color: 1, white: e2 })
                    .unwrap();
                for e3 in 0..s1.k() {
                    let s2 = s1
                        .flip(Edge { color: 1, white: e3 }, &melon, Edge { color: 1, white: 0 })
                        .unwrap();
                    for e4 in 0..s2.k() {
                        let g = s2
                            .flip(Edge { color: 2, white: e4 }, &melon, Edge { color: 2, white: 0 })
                            .unwrap();
                        let canon = g.canonical_form();
                        let key: Vec<Vec<usize>> =
                            canon.sigmas().iter().map(|s| s.one_line()).collect();
                        if !seen.insert(key) {
                            continue;
                        }
                        let s = compatibility_search(&g, &budget).unwrap();
                        *results.entry((s.delta, s.mu.unwrap())).or_insert(0) += 1;
                    }
                }
            }
        }
    }
    }
    println!("Eq.384 scan: {} classes, (Delta, mu) -> count: {results:?}", seen.len());
}

fn scan_fig30() {
    let k = 9usize;
    let sigma2 = Perm::from_cycles(k, &[vec![1, 2, 3, 4, 5, 6, 7], vec![8, 9]]).unwrap();
    let budget = SearchBudget::exhaustive_up_to(9);
    let mut hist: BTreeMap<(usize, usize), BTreeMap<(u64, u64), usize>> = BTreeMap::new();
    let mut count = 0usize;
    for sigma3 in Perm::all(k) {
        let f13 = sigma3.cycle_count();
        if f13 != 3 && f13 != 4 {
            continue;
        }
        let f23 = sigma2.compose(&sigma3.inverse()).cycle_count();
        if f23 != 3 && f23 != 4 {
            continue;
        }
        if !(f13 == 4 && f23 == 3 || f13 == 3 && f23 == 4) {
            continue;
        }
        let g = ColoredGraph::new(vec![Perm::identity(k), sigma2.clone(), sigma3]).unwrap();
        if !g.is_connected() {
            continue;
        }
        count += 1;
        // Full scan on the printed orientation, sampled on the swapped one.
        if f13 == 3 && count % 37 != 0 {
            continue;
        }
        let s = compatibility_search(&g, &budget).unwrap();
        *hist
            .entry((f13, f23))
            .or_default()
            .entry((s.delta, s.mu.unwrap()))
            .or_insert(0) += 1;
    }
    println!("Fig.30 scan: {count} candidates; sampled spectra per (F13, F23): {hist:?}");
}
