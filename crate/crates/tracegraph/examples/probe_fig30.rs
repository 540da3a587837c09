use tracegraph::degrees::{compatibility_search, SearchBudget};
use tracegraph::graph::ColoredGraph;
use tracegraph::perm::Perm;

fn main() {
    let k = 9;
    let sigma2 = Perm::from_cycles(k, &[vec![1, 2, 3, 4, 5, 6, 7], vec![8, 9]]).unwrap();
    let candidates = vec![
        ("(14)(279)(35)(68)", vec![vec![1, 4], vec![2, 7, 9], vec![3, 5], vec![6, 8]]),
        ("(14)(259)(36)(78)", vec![vec![1, 4], vec![2, 5, 9], vec![3, 6], vec![7, 8]]),
        ("(14)(259)(38)(67)", vec![vec![1, 4], vec![2, 5, 9], vec![3, 8], vec![6, 7]]),
        ("(17)(259)(34)(68)", vec![vec![1, 7], vec![2, 5, 9], vec![3, 4], vec![6, 8]]),
        ("(14)(759)(23)(68)", vec![vec![1, 4], vec![7, 5, 9], vec![2, 3], vec![6, 8]]),
        ("(74)(259)(31)(68)", vec![vec![7, 4], vec![2, 5, 9], vec![3, 1], vec![6, 8]]),
        ("(14)(257)(39)(68)", vec![vec![1, 4], vec![2, 5, 7], vec![3, 9], vec![6, 8]]),
    ];
    for (name, cycles) in candidates {
        let sigma3 = Perm::from_cycles(k, &cycles).unwrap();
        let g = ColoredGraph::new(vec![Perm::identity(k), sigma2.clone(), sigma3]).unwrap();
        let f = g.faces().unwrap();
        let s = compatibility_search(&g, &SearchBudget::exhaustive_up_to(9)).unwrap();
        println!(
            "{name}: connected={} F13={} F23={} Delta={} mu={:?}",
            g.is_connected(),
            f.get(1, 3),
            f.get(2, 3),
            s.delta,
            s.mu
        );
        if s.delta == 2 && s.mu == Some(3) {
            for w in &s.witnesses {
                println!("   nu = {}", w.nu);
            }
        }
    }
}
