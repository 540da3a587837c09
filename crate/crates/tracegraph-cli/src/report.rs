//! Report assembly, printing, the distinguishing-graph catalog scan, the
//! verify suites, and the optional SVG scaling plot.

use std::collections::BTreeMap;

use num_traits::ToPrimitive;
use serde::Serialize;

use crate::formats::{CliError, CliResult};
use crate::LoadedGraph;
use tracegraph::degrees::{
    compatibility_search, degree_report, ComposeOutcome, Exactness, SearchBudget,
};
use tracegraph::families::{generate, identity_suite, FamilySpec};
use tracegraph::graph::{ColorSet, ColoredGraph};
use tracegraph::haar::haar_moment_exact;
use tracegraph::perm::Perm;
use tracegraph::refstates::{
    evaluate_on_reference, scaling_of_named, FactoredValue, Flow, NamedState, Rational,
    WeightFunction,
};

#[derive(Serialize)]
pub struct GraphInfoReport {
    pub provenance: String,
    pub d: usize,
    pub k: usize,
    pub kappa: usize,
    pub sigma: Vec<String>,
    pub faces: BTreeMap<String, usize>,
    pub f_total: usize,
    pub k_b: BTreeMap<String, u64>,
    pub jacket_genera: BTreeMap<String, u64>,
    pub omega2: u64,
    pub omega_p: BTreeMap<String, u64>,
    pub omega_pq: BTreeMap<String, u64>,
    pub omega_c: BTreeMap<String, u64>,
    pub classification: ClassificationReport,
    pub delta: u64,
    pub mu: Option<u64>,
    pub delta_exactness: String,
    pub witness: Option<String>,
    pub composition: Option<Vec<String>>,
}

#[derive(Serialize)]
pub struct ClassificationReport {
    pub trivial: bool,
    pub cyclic: bool,
    pub genuinely_d_partite: bool,
    pub num_distinct_colors: usize,
    pub melonic: bool,
    pub c_melonic_colors: Vec<usize>,
    pub maximally_single_trace: bool,
    pub has_double_size2_face_vertex: bool,
}

pub fn graph_info(loaded: &LoadedGraph, budget: &SearchBudget) -> CliResult<GraphInfoReport> {
    let g = &loaded.graph;
    let r = degree_report(g)?;
    let class = g.classify();
    // Prefer the composed bookkeeping when a script provided it exactly;
    // fall back to the direct search.
    let (delta, mu, exactness, witness) = match &loaded.composed {
        Some(composed) if composed.delta.is_some() && composed.delta_exact => (
            composed.delta.unwrap(),
            composed.mu,
            "EXACT (composition)".to_string(),
            Some(composed.witness.to_string()),
        ),
        _ => {
            let s = compatibility_search(g, budget)?;
            let witness = s.witnesses.first().map(|w| w.nu.to_string());
            let flag = match s.exactness {
                Exactness::Exact => "EXACT".to_string(),
                Exactness::Bound => "BOUND".to_string(),
            };
            (s.delta, s.mu, flag, witness)
        }
    };
    Ok(GraphInfoReport {
        provenance: loaded.provenance.clone(),
        d: g.d(),
        k: g.k(),
        kappa: r.kappa,
        sigma: g.sigmas().iter().map(|s| s.to_string()).collect(),
        faces: r
            .faces
            .pairs()
            .iter()
            .map(|((i, j), f)| (format!("{i},{j}"), *f))
            .collect(),
        f_total: r.faces.total(),
        k_b: r.k_b.iter().map(|(b, v)| (b.to_string(), *v)).collect(),
        jacket_genera: r
            .jacket_genera
            .iter()
            .map(|(order, g)| {
                let text: Vec<String> = order.iter().map(|c| c.to_string()).collect();
                (text.join(","), *g)
            })
            .collect(),
        omega2: r.omega2,
        omega_p: r
            .omega_p
            .iter()
            .map(|(p, v)| (p.to_string(), *v))
            .collect(),
        omega_pq: r
            .omega_pq
            .iter()
            .map(|((p, q), v)| (format!("{p},{q}"), *v))
            .collect(),
        omega_c: r
            .omega_c
            .iter()
            .map(|(c, v)| (c.to_string(), *v))
            .collect(),
        classification: ClassificationReport {
            trivial: class.trivial,
            cyclic: class.cyclic,
            genuinely_d_partite: class.genuinely_d_partite,
            num_distinct_colors: class.num_distinct_colors,
            melonic: class.melonic,
            c_melonic_colors: class.c_melonic_colors,
            maximally_single_trace: class.maximally_single_trace,
            has_double_size2_face_vertex: class.has_double_size2_face_vertex,
        },
        delta,
        mu,
        delta_exactness: exactness,
        witness,
        composition: loaded.composed.as_ref().map(|c| {
            c.provenance
                .iter()
                .map(|step| {
                    let verdict = match &step.outcome {
                        ComposeOutcome::Known {
                            delta,
                            justification,
                            ..
                        } => format!("Delta so far {delta} ({justification})"),
                        ComposeOutcome::Unknown { failed } => format!("UNKNOWN ({failed})"),
                    };
                    format!("{} -> {verdict}", step.description)
                })
                .collect()
        }),
    })
}

pub fn print_graph_info(r: &GraphInfoReport) {
    println!("graph: D={} k={} kappa={}   [{}]", r.d, r.k, r.kappa, r.provenance);
    for (c, s) in r.sigma.iter().enumerate() {
        println!("  sigma_{} = {s}", c + 1);
    }
    let faces: Vec<String> = r.faces.iter().map(|(p, f)| format!("F_{p}={f}")).collect();
    println!("faces: {} (F = {})", faces.join(" "), r.f_total);
    let genera: Vec<String> = r
        .jacket_genera
        .iter()
        .map(|(o, g)| format!("g_({o})={g}"))
        .collect();
    println!("jacket genera: {}", genera.join(" "));
    println!("omega_2 = {}", r.omega2);
    let omegas: Vec<String> = r.omega_p.iter().map(|(p, v)| format!("omega_{p}={v}")).collect();
    println!("p-complete degrees: {}", omegas.join(" "));
    let oc: Vec<String> = r.omega_c.iter().map(|(c, v)| format!("Omega_{c}={v}")).collect();
    println!("c-degrees: {}", oc.join(" "));
    println!(
        "classification: trivial={} cyclic={} genuinely-D-partite={} melonic={} MST={}",
        r.classification.trivial,
        r.classification.cyclic,
        r.classification.genuinely_d_partite,
        r.classification.melonic,
        r.classification.maximally_single_trace
    );
    match r.mu {
        Some(mu) => println!("Delta = {} [{}], mu = {mu}", r.delta, r.delta_exactness),
        None => println!("Delta <= {} [{}]", r.delta, r.delta_exactness),
    }
    if let Some(witness) = &r.witness {
        println!("witness nu = {witness}");
    }
    if let Some(steps) = &r.composition {
        println!("composition provenance:");
        for step in steps {
            println!("  {step}");
        }
    }
}

pub fn print_graph_info_csv(r: &GraphInfoReport) {
    println!("quantity,key,value");
    println!("k,,{}", r.k);
    println!("kappa,,{}", r.kappa);
    for (p, f) in &r.faces {
        println!("F,\"{p}\",{f}");
    }
    for (o, g) in &r.jacket_genera {
        println!("g,\"{o}\",{g}");
    }
    println!("omega2,,{}", r.omega2);
    for (p, v) in &r.omega_p {
        println!("omega_p,{p},{v}");
    }
    for (c, v) in &r.omega_c {
        println!("Omega_c,{c},{v}");
    }
    println!("Delta,,{}", r.delta);
    if let Some(mu) = r.mu {
        println!("mu,,{mu}");
    }
    println!("exactness,,{}", r.delta_exactness);
}

#[derive(Serialize)]
pub struct EvalReport {
    pub graph_provenance: String,
    pub state_provenance: String,
    pub exponents: BTreeMap<String, i64>,
    pub value: String,
    pub value_f64: Option<f64>,
    pub scaling: Option<String>,
    pub scaling_exactness: Option<String>,
}

pub fn eval_report(
    loaded: &LoadedGraph,
    state_provenance: &str,
    _wf: &WeightFunction,
    value: &FactoredValue,
    scaling: Option<(Rational, Exactness)>,
) -> EvalReport {
    EvalReport {
        graph_provenance: loaded.provenance.clone(),
        state_provenance: state_provenance.to_string(),
        exponents: value
            .exponents
            .iter()
            .map(|(b, e)| (b.to_string(), *e))
            .collect(),
        value: value.value.to_string(),
        value_f64: value.value.to_f64(),
        scaling: scaling.as_ref().map(|(s, _)| s.to_string()),
        scaling_exactness: scaling.map(|(_, e)| match e {
            Exactness::Exact => "EXACT".to_string(),
            Exactness::Bound => "BOUND".to_string(),
        }),
    }
}

pub fn print_eval(r: &EvalReport) {
    println!("graph: {}", r.graph_provenance);
    println!("state: {}", r.state_provenance);
    let factors: Vec<String> = r
        .exponents
        .iter()
        .map(|(b, e)| format!("alpha({{{b}}})^{e}"))
        .collect();
    println!("factored: {}", if factors.is_empty() { "1".into() } else { factors.join(" * ") });
    println!(
        "value: {}{}",
        r.value,
        r.value_f64.map(|v| format!(" = {v:.6e}")).unwrap_or_default()
    );
    if let Some(s) = &r.scaling {
        println!(
            "scaling s_G = {s} [{}]",
            r.scaling_exactness.as_deref().unwrap_or("EXACT")
        );
    }
}

// ---------------------------------------------------------------------------
// Distinguish
// ---------------------------------------------------------------------------

#[derive(Serialize)]
pub struct DistinguishReport {
    pub verdict: String,
    pub witness_family: Option<String>,
    pub difference: Option<String>,
    pub rejected: Vec<String>,
}

/// Catalog of candidate separating graphs in a deterministic order:
/// melonic probes first, then cyclic bipartitions, PT, RM, ME, the complete
/// bipartite graph and small joint realignments.
fn catalog(d: usize, k_budget: usize) -> Vec<(String, ColoredGraph)> {
    let mut out: Vec<(String, ColoredGraph)> = Vec::new();
    let mut push = |name: String, g: tracegraph::Result<ColoredGraph>| {
        if let Ok(g) = g {
            if g.k() <= k_budget {
                out.push((name, g));
            }
        }
    };
    // Melonic probes: one insertion per color.
    for c in 1..=d {
        push(
            format!("melon insertion on color {c}"),
            generate(&FamilySpec::MelonicScript {
                d,
                insertions: vec![tracegraph::graph::Edge { color: c, white: 0 }],
            }),
        );
    }
    for b in ColorSet::subsets(d, 1) {
        if b.len() >= d {
            continue;
        }
        for k in 2..=k_budget.min(4) {
            push(
                format!("cyclic bipartition {{{b}}} k={k}"),
                generate(&FamilySpec::CyclicBipartition { d, b: b.clone(), k }),
            );
        }
    }
    for c in 1..=d {
        let traced = ColorSet::from_slice(&[c]);
        if let Ok(blocks) = FamilySpec::standard_blocks(d, &traced) {
            for k in 3..=k_budget {
                push(
                    format!("PT k={k} traced={c}"),
                    generate(&FamilySpec::Pt {
                        d,
                        k,
                        blocks: blocks.clone(),
                    }),
                );
            }
            for n in 1..=(k_budget / 2) {
                push(
                    format!("RM n={n} traced={c}"),
                    generate(&FamilySpec::Rm {
                        d,
                        n,
                        blocks: blocks.clone(),
                    }),
                );
            }
        }
    }
    for n in 2..=3usize {
        if n.pow((d - 1) as u32) <= k_budget {
            push(format!("ME n={n}"), generate(&FamilySpec::Me { d, n }));
        }
    }
    push("complete bipartite".into(), generate(&FamilySpec::CompleteGraph { d }));
    out
}

pub fn distinguish_named(
    d: usize,
    a: &NamedState,
    b: &NamedState,
    k_budget: usize,
    budget: &SearchBudget,
) -> CliResult<DistinguishReport> {
    let mut rejected = Vec::new();
    for (name, g) in catalog(d, k_budget) {
        let (sa, ea) = scaling_of_named(&g, a, budget)?;
        let (sb, eb) = scaling_of_named(&g, b, budget)?;
        if ea == Exactness::Exact && eb == Exactness::Exact && sa != sb {
            return Ok(DistinguishReport {
                verdict: "FOUND".into(),
                witness_family: Some(name),
                difference: Some((sa - sb).to_string()),
                rejected,
            });
        }
        rejected.push(name);
    }
    Ok(DistinguishReport {
        verdict: "NOT_FOUND".into(),
        witness_family: None,
        difference: None,
        rejected,
    })
}

pub fn distinguish_weights(
    d: usize,
    a: &WeightFunction,
    b: &WeightFunction,
    k_budget: usize,
) -> CliResult<DistinguishReport> {
    let mut rejected = Vec::new();
    for (name, g) in catalog(d, k_budget) {
        let va = evaluate_on_reference(&g, a)?;
        let vb = evaluate_on_reference(&g, b)?;
        if va.value != vb.value {
            return Ok(DistinguishReport {
                verdict: "FOUND".into(),
                witness_family: Some(name),
                difference: Some(format!("{} vs {}", va.value, vb.value)),
                rejected,
            });
        }
        rejected.push(name);
    }
    Ok(DistinguishReport {
        verdict: "NOT_FOUND".into(),
        witness_family: None,
        difference: None,
        rejected,
    })
}

pub fn print_distinguish(r: &DistinguishReport) {
    match &r.witness_family {
        Some(name) => println!(
            "FOUND separating graph: {name} (difference {})",
            r.difference.as_deref().unwrap_or("?")
        ),
        None => println!("NOT_FOUND within the catalog budget"),
    }
    if !r.rejected.is_empty() {
        println!("rejected first: {}", r.rejected.join("; "));
    }
}

// ---------------------------------------------------------------------------
// Order / Haar reports
// ---------------------------------------------------------------------------

#[derive(Serialize)]
pub struct OrderReport {
    pub relation: String,
    pub verdict: String,
    pub witness: Option<String>,
    pub established: bool,
}

pub fn divisor_table(beta: &WeightFunction, alpha: &WeightFunction) -> String {
    let mut parts = Vec::new();
    for (b, w) in beta.entries() {
        parts.push(format!("{}/{} on {{{b}}}", w, alpha.get(b)));
    }
    if parts.is_empty() {
        "trivial".into()
    } else {
        parts.join(", ")
    }
}

pub fn flow_witness(flow: &Flow) -> String {
    let parts: Vec<String> = flow
        .edges
        .iter()
        .map(|((b, c), gamma)| format!("gamma({{{b}}},{{{c}}}) = {gamma}"))
        .collect();
    if parts.is_empty() {
        "identity flow".into()
    } else {
        parts.join(", ")
    }
}

#[derive(Serialize)]
pub struct HaarReport {
    pub provenance: String,
    pub n: u64,
    pub exact: Option<String>,
    pub gaussian: Option<String>,
    pub prefactor: Option<String>,
    pub mc_mean: Option<(f64, f64)>,
    pub mc_std_error: Option<f64>,
    pub mc_samples: Option<u64>,
    pub seed: u64,
    pub s: Option<i64>,
    pub mu: Option<u64>,
    pub renyi: Option<f64>,
    pub asymptotic_slope: Option<u64>,
    pub asymptotic_mu: Option<u64>,
    pub conditions: Vec<String>,
    pub exactness: String,
}

pub fn print_haar(r: &HaarReport) {
    println!("graph: {}", r.provenance);
    if let Some(exact) = &r.exact {
        println!("exact moment at N={}: {exact}", r.n);
        println!("  gaussian sum: {}", r.gaussian.as_deref().unwrap_or("?"));
        println!("  prefactor:    {}", r.prefactor.as_deref().unwrap_or("?"));
        if let (Some(s), Some(mu)) = (r.s, r.mu) {
            println!("  leading order: mu N^s with s = {s}, mu = {mu}");
        }
        if let Some(renyi) = r.renyi {
            println!("  R_G = {renyi:.6}");
        }
    }
    if let Some((re, im)) = r.mc_mean {
        println!(
            "monte carlo ({} samples, seed {}): {re:.6e} + {im:.6e}i (se {:.3e})",
            r.mc_samples.unwrap_or(0),
            r.seed,
            r.mc_std_error.unwrap_or(0.0)
        );
    }
    if let Some(slope) = r.asymptotic_slope {
        println!(
            "asymptote: <R_G> ~ {slope} ln N - ln {}",
            r.asymptotic_mu.unwrap_or(1)
        );
    }
    if !r.conditions.is_empty() {
        println!("conditions [{}]:", r.exactness);
        for c in &r.conditions {
            println!("  {c}");
        }
    }
}

/// A minimal static SVG: ln of the exact moment against ln N.
pub fn write_scaling_plot(
    g: &ColoredGraph,
    budget: &SearchBudget,
    path: &str,
) -> CliResult<()> {
    let ns: Vec<u64> = vec![2, 3, 4, 5, 6, 7, 8];
    let mut points = Vec::new();
    for &n in &ns {
        let moment = haar_moment_exact(g, n, budget)?;
        let value = moment
            .exact_value
            .to_f64()
            .ok_or_else(|| CliError("moment out of f64 range".into()))?;
        points.push(((n as f64).ln(), value.ln()));
    }
    let (w, h, margin) = (480.0, 320.0, 40.0);
    let xmin = points.first().unwrap().0;
    let xmax = points.last().unwrap().0;
    let ymin = points.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let ymax = points.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let sx = |x: f64| margin + (x - xmin) / (xmax - xmin).max(1e-12) * (w - 2.0 * margin);
    let sy = |y: f64| h - margin - (y - ymin) / (ymax - ymin).max(1e-12) * (h - 2.0 * margin);
    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\">\n"
    ));
    svg.push_str(&format!(
        "<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n"
    ));
    let path_data: Vec<String> = points
        .iter()
        .enumerate()
        .map(|(i, (x, y))| {
            format!("{}{:.2},{:.2}", if i == 0 { "M" } else { "L" }, sx(*x), sy(*y))
        })
        .collect();
    svg.push_str(&format!(
        "<path d=\"{}\" stroke=\"#336\" fill=\"none\" stroke-width=\"2\"/>\n",
        path_data.join(" ")
    ));
    for (x, y) in &points {
        svg.push_str(&format!(
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"#336\"/>\n",
            sx(*x),
            sy(*y)
        ));
    }
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"12\">ln N</text>\n",
        w - margin,
        h - margin / 2.0
    ));
    svg.push_str(&format!(
        "<text x=\"8\" y=\"{}\" font-size=\"12\">ln moment</text>\n",
        margin / 2.0
    ));
    svg.push_str("</svg>\n");
    std::fs::write(path, svg).map_err(|e| CliError(format!("cannot write {path:?}: {e}")))?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Verify suites
// ---------------------------------------------------------------------------

pub fn verify_identities() -> bool {
    let mut ok = true;
    for check in identity_suite() {
        println!(
            "  identity {}: {}",
            check.name,
            if check.pass { "pass" } else { "FAIL" }
        );
        ok &= check.pass;
    }
    ok
}

pub fn verify_appc() -> bool {
    let mut ok = true;
    let mut check = |name: &str, pass: bool| {
        println!("  appc {name}: {}", if pass { "pass" } else { "FAIL" });
        ok &= pass;
    };
    let budget = SearchBudget::default();
    for n in 2..=3usize {
        let g = generate(&FamilySpec::Rm {
            d: 3,
            n,
            blocks: FamilySpec::standard_blocks(3, &ColorSet::from_slice(&[3])).unwrap(),
        })
        .unwrap();
        let r = degree_report(&g).unwrap();
        let s = compatibility_search(&g, &budget).unwrap();
        check(
            &format!("RM_{} kappa-k and Delta", 2 * n),
            r.kappa_minus_k == 1 - 2 * n as i64 && s.delta == 1,
        );
    }
    for n in 1..=2usize {
        let even = generate(&FamilySpec::Pt {
            d: 3,
            k: 2 * n,
            blocks: FamilySpec::standard_blocks(3, &ColorSet::from_slice(&[3])).unwrap(),
        })
        .unwrap();
        let r = degree_report(&even).unwrap();
        let s = compatibility_search(&even, &budget).unwrap();
        check(
            &format!("PT_{} omega2 and Delta", 2 * n),
            r.omega2 == 2 * (n as u64 - 1) && s.delta == 0,
        );
    }
    for n in 2..=3usize {
        let g = generate(&FamilySpec::Me { d: 3, n }).unwrap();
        let r = degree_report(&g).unwrap();
        check(
            &format!("ME_{n}^3 kappa-k and K"),
            r.kappa_minus_k == 1 - (n * n) as i64
                && r.k_b[&ColorSet::from_slice(&[1, 3])] == n as u64 - 1,
        );
    }
    ok
}

pub fn verify_footnote68() -> bool {
    let g = generate(&FamilySpec::CompleteGraph { d: 4 }).unwrap();
    let r = degree_report(&g).unwrap();
    let s = compatibility_search(&g, &SearchBudget::default()).unwrap();
    let mut genera: Vec<u64> = r.jacket_genera.iter().map(|(_, g)| *g).collect();
    genera.sort_unstable();
    let mut got: Vec<Perm> = s.witnesses.iter().map(|w| w.nu.clone()).collect();
    got.sort();
    let mut want = vec![
        Perm::from_cycles(4, &[vec![2, 4]]).unwrap(),
        Perm::from_cycles(4, &[vec![1, 2], vec![3, 4]]).unwrap(),
        Perm::from_cycles(4, &[vec![1, 3]]).unwrap(),
        Perm::from_cycles(4, &[vec![1, 4], vec![2, 3]]).unwrap(),
    ];
    want.sort();
    let pass = genera == vec![2, 2, 3]
        && r.omega2 == 7
        && r.omega_p[&3] == 3
        && s.delta == 1
        && s.mu == Some(4)
        && got == want;
    println!("  footnote68: {}", if pass { "pass" } else { "FAIL" });
    pass
}

pub fn verify_oplaws(seed: u64) -> bool {
    use rand::Rng;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut ok = true;
    for _ in 0..50 {
        let d = rng.gen_range(3..=5usize);
        let g1 = ColoredGraph::random(d, rng.gen_range(1..=4), &mut rng);
        let g2 = ColoredGraph::random(d, rng.gen_range(1..=4), &mut rng);
        let union = g1.union(&g2).unwrap();
        let r1 = degree_report(&g1).unwrap();
        let r2 = degree_report(&g2).unwrap();
        let ru = degree_report(&union).unwrap();
        ok &= ru.omega2 == r1.omega2 + r2.omega2;
        for b in ColorSet::subsets(d, 1) {
            ok &= union.kappa_restrict(&b).unwrap()
                == g1.kappa_restrict(&b).unwrap() + g2.kappa_restrict(&b).unwrap();
        }
    }
    println!("  oplaws: {}", if ok { "pass" } else { "FAIL" });
    ok
}

