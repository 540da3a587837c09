//! Constructive generators for the named invariant families, the
//! cross-family identity suite that validates them, tree composition with
//! `(Delta, mu)` bookkeeping, and color symmetrization.

use std::fmt;
use std::str::FromStr;

use crate::degrees::{
    compatibility_search, compose_delta, compose_witness, delta_nu, ComposeOp, ComposeOutcome,
    Exactness, OperandInfo, SearchBudget, TreeLikeCert,
};
use crate::error::{Error, Result};
use crate::graph::{ColorSet, ColoredGraph, Edge, Vertex};
use crate::perm::Perm;

/// A named family member, parameters included.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FamilySpec {
    /// Two-colored cycle with `k` white vertices.
    Cycle { k: usize },
    /// Connected cyclic graph for the bipartition `{B, complement}`.
    CyclicBipartition { d: usize, b: ColorSet, k: usize },
    /// The two-vertex graph.
    Melon { d: usize },
    /// Melonic graph from an explicit insertion script.
    MelonicScript { d: usize, insertions: Vec<Edge> },
    /// Partial-transpose moment graph over a block tripartition; `traced`
    /// holds the block that is traced out.
    Pt {
        d: usize,
        k: usize,
        blocks: (ColorSet, ColorSet, ColorSet),
    },
    /// Realignment moment with `2n` white vertices; `blocks.2` is traced.
    Rm {
        d: usize,
        n: usize,
        blocks: (ColorSet, ColorSet, ColorSet),
    },
    /// Joint realignment moment over a cyclic color sequence.
    Jrm { d: usize, sequence: Vec<usize> },
    /// Lattice extension of the joint realignment moments.
    Lattice {
        d: usize,
        m: usize,
        n: usize,
        sequence: Vec<usize>,
        cut_color: usize,
    },
    /// Multi-entropy graph on `n^{D-1}` white vertices.
    Me { d: usize, n: usize },
    /// Reflected multi-entropy graph; `traced` is the color bundle joining
    /// the two multi-entropy copies, `m` is even.
    Rme {
        d: usize,
        m: usize,
        n: usize,
        traced: ColorSet,
    },
    /// Complete bipartite K_{D,D}; errors when it is not maximally
    /// single-trace (use `CompleteGraph` for the unchecked variant).
    CompleteBipartite { d: usize },
    /// K_{D,D} without the maximally-single-trace claim.
    CompleteGraph { d: usize },
    /// Contraction of a maximally single-trace graph with its mirror.
    MirrorDoubleMst {
        inner: Box<FamilySpec>,
        white: usize,
    },
}

impl FamilySpec {
    pub fn d(&self) -> usize {
        match self {
            FamilySpec::Cycle { .. } => 2,
            FamilySpec::CyclicBipartition { d, .. }
            | FamilySpec::Melon { d }
            | FamilySpec::MelonicScript { d, .. }
            | FamilySpec::Pt { d, .. }
            | FamilySpec::Rm { d, .. }
            | FamilySpec::Jrm { d, .. }
            | FamilySpec::Lattice { d, .. }
            | FamilySpec::Me { d, .. }
            | FamilySpec::Rme { d, .. }
            | FamilySpec::CompleteBipartite { d }
            | FamilySpec::CompleteGraph { d } => *d,
            FamilySpec::MirrorDoubleMst { inner, .. } => inner.d(),
        }
    }

    /// Default single-color tripartition `({c1}, {c2}, rest)` used by the
    /// short PT/RM forms where only the traced colors are named.
    pub fn standard_blocks(d: usize, traced: &ColorSet) -> Result<(ColorSet, ColorSet, ColorSet)> {
        traced.validate(d)?;
        let rest: Vec<usize> = (1..=d).filter(|c| !traced.contains(*c)).collect();
        if rest.len() < 2 {
            return Err(Error::InvalidFamilySpec(format!(
                "traced set {traced} leaves fewer than two color blocks"
            )));
        }
        let b1 = ColorSet::from_slice(&[rest[0]]);
        let b2 = ColorSet::from_slice(&rest[1..]);
        Ok((b1, b2, traced.clone()))
    }

    /// Tree-like-dominance certificate read off the family.
    pub fn tree_like_cert(&self) -> TreeLikeCert {
        match self {
            FamilySpec::Melon { .. } | FamilySpec::MelonicScript { .. } => {
                TreeLikeCert::OnlyDominant
            }
            // Cyclic graphs: tree-like unless the bipartition is balanced.
            FamilySpec::Cycle { .. } => TreeLikeCert::OnlyDominant,
            FamilySpec::CyclicBipartition { d, b, .. } => {
                if 2 * b.len() == *d {
                    TreeLikeCert::None
                } else {
                    TreeLikeCert::OnlyDominant
                }
            }
            // Realignment moments with a traced bundle of size D−2.
            FamilySpec::Rm { d, blocks, .. } => {
                if blocks.2.len() == d - 2 {
                    TreeLikeCert::OnlyDominant
                } else {
                    TreeLikeCert::None
                }
            }
            FamilySpec::Jrm { sequence, .. } => {
                if sequence.len() > 4 {
                    TreeLikeCert::OnlyDominant
                } else {
                    TreeLikeCert::Dominant
                }
            }
            _ => TreeLikeCert::None,
        }
    }
}

/// Builds the graph of a family member.
pub fn generate(spec: &FamilySpec) -> Result<ColoredGraph> {
    match spec {
        FamilySpec::Cycle { k } => {
            if *k == 0 {
                return Err(Error::InvalidFamilySpec("cycle needs k >= 1".into()));
            }
            ColoredGraph::new(vec![Perm::full_cycle(*k), Perm::identity(*k)])
        }
        FamilySpec::CyclicBipartition { d, b, k } => {
            b.validate(*d)?;
            if b.is_empty() || b.len() == *d {
                return Err(Error::InvalidFamilySpec(
                    "cyclic bipartition needs a proper nonempty block".into(),
                ));
            }
            let tau = Perm::full_cycle(*k);
            let sigma = (1..=*d)
                .map(|c| {
                    if b.contains(c) {
                        tau.clone()
                    } else {
                        Perm::identity(*k)
                    }
                })
                .collect();
            ColoredGraph::new(sigma)
        }
        FamilySpec::Melon { d } => Ok(ColoredGraph::trivial(*d, 1)),
        FamilySpec::MelonicScript { d, insertions } => {
            let mut g = ColoredGraph::trivial(*d, 1);
            for (i, e) in insertions.iter().enumerate() {
                g = g.insert_melon(*e).map_err(|err| Error::InvalidScript {
                    step: i,
                    reason: err.to_string(),
                })?;
            }
            Ok(g)
        }
        FamilySpec::Pt { d, k, blocks } => {
            validate_tripartition(*d, blocks)?;
            let tau = Perm::full_cycle(*k);
            let tau_inv = tau.inverse();
            let sigma = (1..=*d)
                .map(|c| {
                    if blocks.0.contains(c) {
                        tau.clone()
                    } else if blocks.1.contains(c) {
                        tau_inv.clone()
                    } else {
                        Perm::identity(*k)
                    }
                })
                .collect();
            ColoredGraph::new(sigma)
        }
        FamilySpec::Rm { d, n, blocks } => {
            validate_tripartition(*d, blocks)?;
            if *n == 0 {
                return Err(Error::InvalidFamilySpec("RM needs n >= 1".into()));
            }
            let seq: Vec<&ColorSet> = (0..2 * n)
                .map(|t| if t % 2 == 0 { &blocks.0 } else { &blocks.1 })
                .collect();
            block_ring_graph(*d, &seq)
        }
        FamilySpec::Jrm { d, sequence } => {
            if sequence.len() < 3 {
                return Err(Error::InvalidFamilySpec("JRM needs |seq| >= 3".into()));
            }
            for &c in sequence {
                if c == 0 || c > *d {
                    return Err(Error::ColorOutOfRange { color: c, d: *d });
                }
            }
            for t in 0..sequence.len() {
                if sequence[t] == sequence[(t + 1) % sequence.len()] {
                    return Err(Error::InvalidFamilySpec(
                        "JRM sequence must not repeat a color consecutively".into(),
                    ));
                }
            }
            let sets: Vec<ColorSet> = sequence
                .iter()
                .map(|&c| ColorSet::from_slice(&[c]))
                .collect();
            let refs: Vec<&ColorSet> = sets.iter().collect();
            block_ring_graph(*d, &refs)
        }
        FamilySpec::Lattice {
            d,
            m,
            n,
            sequence,
            cut_color,
        } => lattice_graph(*d, *m, *n, sequence, *cut_color),
        FamilySpec::Me { d, n } => me_graph(*d, *n),
        FamilySpec::Rme { d, m, n, traced } => rme_graph_impl(*d, *m, *n, traced),
        FamilySpec::CompleteBipartite { d } => {
            let g = complete_graph(*d)?;
            if !g.classify().maximally_single_trace {
                return Err(Error::FamilyPredicateFailed(format!(
                    "K_{{{d},{d}}} is not maximally single-trace; use the complete-graph spec"
                )));
            }
            Ok(g)
        }
        FamilySpec::CompleteGraph { d } => complete_graph(*d),
        FamilySpec::MirrorDoubleMst { inner, white } => {
            let m = generate(inner)?;
            if !m.classify().maximally_single_trace {
                return Err(Error::FamilyPredicateFailed(
                    "mirror construction needs a maximally single-trace seed".into(),
                ));
            }
            let mirror = m.conjugate();
            // The mirror image of white `w` is the black vertex with the
            // same index in the conjugate.
            m.vertex_contract(Vertex::White(*white), &mirror, Vertex::Black(*white))
        }
    }
}

fn validate_tripartition(
    d: usize,
    blocks: &(ColorSet, ColorSet, ColorSet),
) -> Result<()> {
    let (a, b, c) = blocks;
    a.validate(d)?;
    b.validate(d)?;
    c.validate(d)?;
    if a.is_empty() || b.is_empty() || c.is_empty() {
        return Err(Error::InvalidFamilySpec(
            "tripartition blocks must be nonempty".into(),
        ));
    }
    let total = a.len() + b.len() + c.len();
    let union = a.union(b).union(c);
    if total != d || union.len() != d {
        return Err(Error::InvalidFamilySpec(
            "blocks must partition the color set".into(),
        ));
    }
    Ok(())
}

/// The ring underlying RM/JRM graphs: `seq[t]` is the block of colors that
/// hops from pair `t` to pair `t+1`; colors outside `seq[t] ∪ seq[t+1]`
/// stay inside pair `t`.
fn block_ring_graph(d: usize, seq: &[&ColorSet]) -> Result<ColoredGraph> {
    let k = seq.len();
    for t in 0..k {
        if !seq[t].intersection(seq[(t + 1) % k]).is_empty() {
            return Err(Error::InvalidFamilySpec(
                "consecutive ring blocks must be disjoint".into(),
            ));
        }
    }
    let sigma = (1..=d)
        .map(|c| {
            let images: Vec<usize> = (0..k)
                .map(|t| {
                    if seq[t].contains(c) {
                        (t + k - 1) % k + 1
                    } else if seq[(t + 1) % k].contains(c) {
                        (t + 1) % k + 1
                    } else {
                        t + 1
                    }
                })
                .collect();
            Perm::from_images_one_indexed(&images)
        })
        .collect::<Result<_>>()?;
    ColoredGraph::new(sigma)
}

/// Multi-entropy graph: white vertices indexed by `(Z_n)^{D-1}` in mixed
/// radix with coordinate 1 fastest; color `c < D` shifts coordinate `c`,
/// color `D` is the identity.
fn me_graph(d: usize, n: usize) -> Result<ColoredGraph> {
    if d < 2 || n == 0 {
        return Err(Error::InvalidFamilySpec("ME needs D >= 2, n >= 1".into()));
    }
    let k = n.pow((d - 1) as u32);
    let stride = |c: usize| n.pow((c - 1) as u32);
    let sigma = (1..=d)
        .map(|c| {
            if c == d {
                return Ok(Perm::identity(k));
            }
            let s = stride(c);
            let images: Vec<usize> = (0..k)
                .map(|v| {
                    let digit = v / s % n;
                    let shifted = v - digit * s + (digit + 1) % n * s;
                    shifted + 1
                })
                .collect();
            Perm::from_images_one_indexed(&images)
        })
        .collect::<Result<_>>()?;
    ColoredGraph::new(sigma)
}

/// Reflected multi-entropy: two mirrored multi-entropy copies on the colors
/// outside `traced`, joined vertex-by-vertex with `traced`-colored bundles,
/// each bundle carrying `(m-2)/2` melonic insertions.
fn rme_graph_impl(d: usize, m: usize, n: usize, traced: &ColorSet) -> Result<ColoredGraph> {
    traced.validate(d)?;
    if m < 2 || m % 2 != 0 {
        return Err(Error::InvalidFamilySpec("RME needs even m >= 2".into()));
    }
    if n == 0 || traced.is_empty() || traced.len() >= d {
        return Err(Error::InvalidFamilySpec(
            "RME needs n >= 1 and a proper traced set".into(),
        ));
    }
    let kept: Vec<usize> = (1..=d).filter(|c| !traced.contains(*c)).collect();
    let p = kept.len();
    let me = me_graph(p, n)?;
    let k0 = me.k();
    // Copy A occupies labels 0..k0, the mirror copy k0..2k0. The mirror
    // swaps shades, so its color-c permutation is the inverse acting on
    // matched labels.
    let k = 2 * k0;
    let mut sigma_full: Vec<Perm> = Vec::with_capacity(d);
    for c in 1..=d {
        if let Some(pos) = kept.iter().position(|&x| x == c) {
            let s = me.sigma(pos + 1);
            let inv = s.inverse();
            let images: Vec<usize> = (0..k)
                .map(|w| {
                    if w < k0 {
                        s.image(w) + 1
                    } else {
                        k0 + inv.image(w - k0) + 1
                    }
                })
                .collect();
            sigma_full.push(Perm::from_images_one_indexed(&images)?);
        } else {
            // Traced color: join white v of A to black v of the mirror and
            // white v of the mirror back to black v of A.
            let images: Vec<usize> = (0..k)
                .map(|w| if w < k0 { k0 + w + 1 } else { w - k0 + 1 })
                .collect();
            sigma_full.push(Perm::from_images_one_indexed(&images)?);
        }
    }
    let mut g = ColoredGraph::new(sigma_full)?;
    // Bundle melons: (m-2)/2 nested insertions on each of the 2*k0 traced
    // bundles. A bundle insertion adds one pair joined internally by every
    // kept color and splits the traced edges.
    for v in 0..k {
        for _ in 0..(m - 2) / 2 {
            g = insert_bundle_melon(&g, traced, v)?;
        }
    }
    Ok(g)
}

/// Inserts one pair in the middle of the traced bundle leaving white `v`.
fn insert_bundle_melon(g: &ColoredGraph, traced: &ColorSet, v: usize) -> Result<ColoredGraph> {
    let d = g.d();
    let k = g.k();
    let first = traced.iter().next().expect("nonempty traced set");
    let b = g.sigma(first).image(v);
    let sigma = (1..=d)
        .map(|c| {
            let old = g.sigma(c);
            let mut images: Vec<usize> = old.one_line();
            if traced.contains(c) {
                if old.image(v) != b {
                    return Err(Error::InvalidFamilySpec(
                        "traced colors must be parallel at the insertion point".into(),
                    ));
                }
                // v -> new black (k), new white (k) -> b.
                images[v] = k + 1;
                images.push(b + 1);
            } else {
                // New pair internally joined by the kept colors.
                images.push(k + 1);
            }
            Perm::from_images_one_indexed(&images)
        })
        .collect::<Result<_>>()?;
    ColoredGraph::new(sigma)
}

/// K_{D,D} with `sigma_c = tau^{c-1}` on `D` points.
fn complete_graph(d: usize) -> Result<ColoredGraph> {
    if d < 2 {
        return Err(Error::TooFewColors { d, needed: 2 });
    }
    let tau = Perm::full_cycle(d);
    let sigma = (0..d).map(|e| tau.pow(e)).collect();
    ColoredGraph::new(sigma)
}

/// The lattice extension: `m` columns of `n` stacked copies of the
/// color-`cut_color`-cut joint realignment ring. Traced colors run between
/// stacked copies (cyclically); the cut ring edges at the first and last
/// occurrence of the cut color run between columns (cyclically).
fn lattice_graph(
    d: usize,
    m: usize,
    n: usize,
    sequence: &[usize],
    cut_color: usize,
) -> Result<ColoredGraph> {
    let l = sequence.len();
    if m == 0 || n == 0 || l < 3 {
        return Err(Error::InvalidFamilySpec(
            "lattice needs m, n >= 1 and |seq| >= 3".into(),
        ));
    }
    if !sequence.contains(&cut_color) {
        return Err(Error::InvalidFamilySpec(
            "cut color must occur in the sequence".into(),
        ));
    }
    for t in 0..l {
        if sequence[t] == sequence[(t + 1) % l] {
            return Err(Error::InvalidFamilySpec(
                "lattice sequence must not repeat a color consecutively".into(),
            ));
        }
        if sequence[t] == 0 || sequence[t] > d {
            return Err(Error::ColorOutOfRange {
                color: sequence[t],
                d,
            });
        }
    }
    let ring_colors: ColorSet = ColorSet::from_slice(sequence);
    let first_cut = sequence.iter().position(|&c| c == cut_color).unwrap();
    let last_cut = sequence.iter().rposition(|&c| c == cut_color).unwrap();
    let k = l * m * n;
    let idx = |t: usize, s: usize, r: usize| r * (l * n) + s * l + t;
    let sigma = (1..=d)
        .map(|c| {
            let mut images = vec![0usize; k];
            for r in 0..m {
                for s in 0..n {
                    for t in 0..l {
                        let w = idx(t, s, r);
                        let target = if !ring_colors.contains(c) {
                            // Traced colors step to the next stacked copy.
                            idx(t, (s + 1) % n, r)
                        } else if sequence[t] == c {
                            // Ring hop towards pair t−1; crossing the first
                            // cut moves to the next column.
                            let tt = (t + l - 1) % l;
                            if t == first_cut {
                                idx(tt, s, (r + 1) % m)
                            } else {
                                idx(tt, s, r)
                            }
                        } else if sequence[(t + 1) % l] == c {
                            // Ring hop towards pair t+1; crossing the last
                            // cut moves to the next column.
                            let tt = (t + 1) % l;
                            if (t + 1) % l == last_cut && last_cut != first_cut {
                                idx(tt, s, (r + 1) % m)
                            } else {
                                idx(tt, s, r)
                            }
                        } else {
                            idx(t, s, r)
                        };
                        images[w] = target + 1;
                    }
                }
            }
            Perm::from_images_one_indexed(&images)
        })
        .collect::<Result<_>>()?;
    ColoredGraph::new(sigma)
}

// ---------------------------------------------------------------------------
// Identity suite
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct IdentityCheck {
    pub name: String,
    pub pass: bool,
}

/// Checks every cross-family identity the construction is validated by.
pub fn identity_suite() -> Vec<IdentityCheck> {
    let mut out = Vec::new();
    let mut check = |name: &str, a: Result<ColoredGraph>, b: Result<ColoredGraph>| {
        let pass = match (a, b) {
            (Ok(a), Ok(b)) => a.is_isomorphic(&b),
            _ => false,
        };
        out.push(IdentityCheck {
            name: name.to_string(),
            pass,
        });
    };

    let traced = |c: usize| ColorSet::from_slice(&[c]);
    let d3_blocks = |c: usize| FamilySpec::standard_blocks(3, &traced(c)).unwrap();

    for c in 1..=3 {
        check(
            &format!("RM_2^({c}) = PT_2^({c})"),
            generate(&FamilySpec::Rm {
                d: 3,
                n: 1,
                blocks: d3_blocks(c),
            }),
            generate(&FamilySpec::Pt {
                d: 3,
                k: 2,
                blocks: d3_blocks(c),
            }),
        );
    }
    check(
        "RM_4 = ME_2^3",
        generate(&FamilySpec::Rm {
            d: 3,
            n: 2,
            blocks: d3_blocks(3),
        }),
        generate(&FamilySpec::Me { d: 3, n: 2 }),
    );
    check(
        "RE_2,2 = ME_2^3",
        generate(&FamilySpec::Rme {
            d: 3,
            m: 2,
            n: 2,
            traced: traced(3),
        }),
        generate(&FamilySpec::Me { d: 3, n: 2 }),
    );
    for n in 1..=4 {
        check(
            &format!("RE_2,{n}^(3) = RM_{}^(3)", 2 * n),
            generate(&FamilySpec::Rme {
                d: 3,
                m: 2,
                n,
                traced: traced(3),
            }),
            generate(&FamilySpec::Rm {
                d: 3,
                n,
                blocks: d3_blocks(3),
            }),
        );
    }
    for n in 1..=5 {
        check(
            &format!("ME_{n}^2 = C_{n}"),
            generate(&FamilySpec::Me { d: 2, n }),
            generate(&FamilySpec::Cycle { k: n }),
        );
    }
    for d in 3..=4 {
        check(
            &format!("RME_2,2^(c) = ME_2^{d}"),
            generate(&FamilySpec::Rme {
                d,
                m: 2,
                n: 2,
                traced: traced(d),
            }),
            generate(&FamilySpec::Me { d, n: 2 }),
        );
    }
    check(
        "PT_3 = JRM_3^(1,2,3)",
        generate(&FamilySpec::Pt {
            d: 3,
            k: 3,
            blocks: d3_blocks(3),
        }),
        generate(&FamilySpec::Jrm {
            d: 3,
            sequence: vec![1, 2, 3],
        }),
    );
    check(
        "K_{3,3} = PT_3",
        generate(&FamilySpec::CompleteBipartite { d: 3 }),
        generate(&FamilySpec::Pt {
            d: 3,
            k: 3,
            blocks: d3_blocks(3),
        }),
    );
    check(
        "L_{1,1} = JRM (same sequence)",
        generate(&FamilySpec::Lattice {
            d: 6,
            m: 1,
            n: 1,
            sequence: vec![4, 1, 2, 3, 1],
            cut_color: 1,
        }),
        generate(&FamilySpec::Jrm {
            d: 6,
            sequence: vec![4, 1, 2, 3, 1],
        }),
    );
    check(
        "RME_2,n^(B), |B| = D-2, = RM_2n^(B) (D = 4, n = 2)",
        generate(&FamilySpec::Rme {
            d: 4,
            m: 2,
            n: 2,
            traced: ColorSet::from_slice(&[3, 4]),
        }),
        generate(&FamilySpec::Rm {
            d: 4,
            n: 2,
            blocks: (
                ColorSet::from_slice(&[1]),
                ColorSet::from_slice(&[2]),
                ColorSet::from_slice(&[3, 4]),
            ),
        }),
    );
    out
}

// ---------------------------------------------------------------------------
// Tree composition
// ---------------------------------------------------------------------------

/// One operand: either a named family member or a literal graph.
#[derive(Clone, Debug)]
pub enum TreeOperand {
    Family(FamilySpec),
    Graph(ColoredGraph),
}

impl TreeOperand {
    pub fn build(&self) -> Result<ColoredGraph> {
        match self {
            TreeOperand::Family(spec) => generate(spec),
            TreeOperand::Graph(g) => Ok(g.clone()),
        }
    }

    fn tree_like_cert(&self, graph: &ColoredGraph) -> TreeLikeCert {
        // Structural facts first: melonic graphs and connected planar
        // 3-colored graphs have only tree-like dominant unions.
        if graph.is_melonic() {
            return TreeLikeCert::OnlyDominant;
        }
        if graph.d() == 3 {
            if let Ok(report) = crate::degrees::degree_report(graph) {
                if report.jacket_genera.iter().all(|(_, g)| *g == 0) {
                    return TreeLikeCert::OnlyDominant;
                }
            }
        }
        match self {
            TreeOperand::Family(spec) => spec.tree_like_cert(),
            TreeOperand::Graph(_) => TreeLikeCert::None,
        }
    }
}

/// One step of a composition script.
#[derive(Clone, Debug)]
pub enum TreeStep {
    Union {
        operand: TreeOperand,
    },
    Flip {
        operand: TreeOperand,
        color: usize,
        /// White endpoint of the edge in the accumulated graph.
        edge_acc: usize,
        /// White endpoint of the edge in the operand.
        edge_op: usize,
    },
    Contract {
        operand: TreeOperand,
        vertex_acc: Vertex,
        vertex_op: Vertex,
    },
}

#[derive(Clone, Debug)]
pub struct TreeScript {
    pub base: TreeOperand,
    pub steps: Vec<TreeStep>,
}

/// Provenance of one step: the operand's own search plus the composition
/// verdict after applying it.
#[derive(Clone, Debug)]
pub struct ProvenanceStep {
    pub description: String,
    pub operand_delta: u64,
    pub operand_mu: Option<u64>,
    pub outcome: ComposeOutcome,
}

/// The composed graph together with the `(Delta, mu)` bookkeeping.
#[derive(Clone, Debug)]
pub struct ComposedGraph {
    pub graph: ColoredGraph,
    pub provenance: Vec<ProvenanceStep>,
    /// Composed degree of compatibility when every step was justified.
    pub delta: Option<u64>,
    pub delta_exact: bool,
    pub mu: Option<u64>,
    /// A color-0 witness built alongside; `delta_nu(graph, witness)` is an
    /// upper bound for `Delta` regardless of the justification status.
    pub witness: Perm,
    pub witness_delta: u64,
}

/// Runs a script, tracking `(Delta, mu)` through the composition rules and
/// assembling a certifying witness.
pub fn tree_compose(script: &TreeScript, budget: &SearchBudget) -> Result<ComposedGraph> {
    let mut graph = script.base.build()?;
    let base_search = compatibility_search(&graph, budget)?;
    let mut delta = match base_search.exactness {
        Exactness::Exact => Some(base_search.delta),
        Exactness::Bound => Some(base_search.delta),
    };
    let mut delta_exact = base_search.exactness == Exactness::Exact;
    let mut mu = base_search.mu;
    let mut acc_cert = script.base.tree_like_cert(&graph);
    let mut witness = base_search.witnesses[0].nu.clone();
    let mut provenance = Vec::new();

    for (i, step) in script.steps.iter().enumerate() {
        let (operand, op, built): (&TreeOperand, ComposeOp, ColoredGraph) = match step {
            TreeStep::Union { operand } => {
                let b = operand.build()?;
                let joined = graph.union(&b).map_err(|e| Error::InvalidScript {
                    step: i,
                    reason: e.to_string(),
                })?;
                (operand, ComposeOp::Union, joined)
            }
            TreeStep::Flip {
                operand,
                color,
                edge_acc,
                edge_op,
            } => {
                let b = operand.build()?;
                let joined = graph
                    .flip(
                        Edge {
                            color: *color,
                            white: *edge_acc,
                        },
                        &b,
                        Edge {
                            color: *color,
                            white: *edge_op,
                        },
                    )
                    .map_err(|e| Error::InvalidScript {
                        step: i,
                        reason: e.to_string(),
                    })?;
                (operand, ComposeOp::Flip { color: *color }, joined)
            }
            TreeStep::Contract {
                operand,
                vertex_acc,
                vertex_op,
            } => {
                let b = operand.build()?;
                let joined = graph
                    .vertex_contract(*vertex_acc, &b, *vertex_op)
                    .map_err(|e| Error::InvalidScript {
                        step: i,
                        reason: e.to_string(),
                    })?;
                let face = graph
                    .min_face_size_at(*vertex_acc)
                    .min(b.min_face_size_at(*vertex_op));
                (
                    operand,
                    ComposeOp::Contract {
                        vertex_face_bound: face,
                    },
                    joined,
                )
            }
        };

        let operand_graph = operand.build()?;
        let op_search = compatibility_search(&operand_graph, budget)?;
        let op_cert = operand.tree_like_cert(&operand_graph);
        let left = OperandInfo {
            delta: delta.unwrap_or(u64::MAX),
            delta_exact,
            mu,
            tree_like: acc_cert,
            mirror_mst_pair: false,
        };
        let right = OperandInfo {
            delta: op_search.delta,
            delta_exact: op_search.exactness == Exactness::Exact,
            mu: op_search.mu,
            tree_like: op_cert,
            mirror_mst_pair: false,
        };
        let outcome = if delta.is_some() {
            compose_delta(graph.d(), &op, &left, &right, None)
        } else {
            ComposeOutcome::Unknown {
                failed: "accumulated Delta already unknown".into(),
            }
        };

        // Witness composition always goes through.
        let contract_vertices = match step {
            TreeStep::Contract {
                vertex_acc,
                vertex_op,
                ..
            } => Some((*vertex_acc, *vertex_op)),
            _ => None,
        };
        witness = compose_witness(
            &op,
            graph.k(),
            &witness,
            &op_search.witnesses[0].nu,
            contract_vertices,
        )?;

        provenance.push(ProvenanceStep {
            description: format!("step {i}: {op:?} with {operand:?}"),
            operand_delta: op_search.delta,
            operand_mu: op_search.mu,
            outcome: outcome.clone(),
        });

        match outcome {
            ComposeOutcome::Known {
                delta: nd,
                delta_exact: ne,
                mu: nm,
                ..
            } => {
                delta = Some(nd);
                delta_exact = ne;
                mu = nm;
            }
            ComposeOutcome::Unknown { .. } => {
                delta = None;
                delta_exact = false;
                mu = None;
            }
        }
        // The accumulated graph generally loses its certificate; recompute
        // the structural ones only.
        graph = built;
        acc_cert = if graph.is_melonic() {
            TreeLikeCert::OnlyDominant
        } else {
            TreeLikeCert::None
        };
    }

    let witness_delta = delta_nu(&graph, &witness)?;
    Ok(ComposedGraph {
        graph,
        provenance,
        delta,
        delta_exact,
        mu,
        witness,
        witness_delta,
    })
}

// ---------------------------------------------------------------------------
// Symmetrization
// ---------------------------------------------------------------------------

/// Disjoint union over all `D!` color permutations of `G`; the result has
/// `kappa(H|_B) = p!(D−p)! kappa^{(p)}(G)` whenever `|B| = p`.
pub fn symmetrize(g: &ColoredGraph) -> ColoredGraph {
    let d = g.d();
    let mut acc: Option<ColoredGraph> = None;
    for tau in Perm::all(d) {
        let sigma: Vec<Perm> = (0..d).map(|c| g.sigmas()[tau.image(c)].clone()).collect();
        let piece = ColoredGraph::new(sigma).expect("valid color permutation");
        acc = Some(match acc {
            None => piece,
            Some(a) => a.union(&piece).expect("same D"),
        });
    }
    acc.expect("D >= 1")
}

// ---------------------------------------------------------------------------
// Textual form
// ---------------------------------------------------------------------------

impl fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilySpec::Cycle { k } => write!(f, "CYCLE k={k}"),
            FamilySpec::CyclicBipartition { d, b, k } => {
                write!(f, "CYCLICBIP D={d} B={b} k={k}")
            }
            FamilySpec::Melon { d } => write!(f, "MELON D={d}"),
            FamilySpec::MelonicScript { d, insertions } => {
                let script: Vec<String> = insertions
                    .iter()
                    .map(|e| format!("{}:{}", e.color, e.white + 1))
                    .collect();
                write!(f, "MELONIC D={d} script={}", script.join(","))
            }
            FamilySpec::Pt { d, k, blocks } => {
                write!(f, "PT k={k} D={d} traced={}", blocks.2)
            }
            FamilySpec::Rm { d, n, blocks } => {
                write!(f, "RM n={n} D={d} traced={}", blocks.2)
            }
            FamilySpec::Jrm { d, sequence } => {
                let seq: Vec<String> = sequence.iter().map(|c| c.to_string()).collect();
                write!(f, "JRM D={d} seq={}", seq.join(","))
            }
            FamilySpec::Lattice {
                d,
                m,
                n,
                sequence,
                cut_color,
            } => {
                let seq: Vec<String> = sequence.iter().map(|c| c.to_string()).collect();
                write!(f, "LATTICE D={d} m={m} n={n} seq={} cut={cut_color}", seq.join(","))
            }
            FamilySpec::Me { d, n } => write!(f, "ME n={n} D={d}"),
            FamilySpec::Rme { d, m, n, traced } => {
                write!(f, "RME m={m} n={n} D={d} traced={traced}")
            }
            FamilySpec::CompleteBipartite { d } => write!(f, "KBIP D={d}"),
            FamilySpec::CompleteGraph { d } => write!(f, "KGRAPH D={d}"),
            FamilySpec::MirrorDoubleMst { inner, white } => {
                write!(f, "MIRROR v={} of ({inner})", white + 1)
            }
        }
    }
}

impl FromStr for FamilySpec {
    type Err = Error;

    fn from_str(text: &str) -> Result<FamilySpec> {
        let mut parts = text.split_whitespace();
        let head = parts
            .next()
            .ok_or_else(|| Error::InvalidFamilySpec("empty spec".into()))?
            .to_ascii_uppercase();
        let mut kv = std::collections::BTreeMap::new();
        for part in parts {
            let (key, value) = part.split_once('=').ok_or_else(|| {
                Error::InvalidFamilySpec(format!("expected key=value, found {part:?}"))
            })?;
            kv.insert(key.to_ascii_lowercase(), value.to_string());
        }
        let get_usize = |kv: &std::collections::BTreeMap<String, String>, key: &str| -> Result<usize> {
            kv.get(key)
                .ok_or_else(|| Error::InvalidFamilySpec(format!("missing {key}=")))?
                .parse()
                .map_err(|_| Error::InvalidFamilySpec(format!("bad value for {key}")))
        };
        let get_list = |kv: &std::collections::BTreeMap<String, String>, key: &str| -> Result<Vec<usize>> {
            kv.get(key)
                .ok_or_else(|| Error::InvalidFamilySpec(format!("missing {key}=")))?
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse()
                        .map_err(|_| Error::InvalidFamilySpec(format!("bad value for {key}")))
                })
                .collect()
        };
        match head.as_str() {
            "CYCLE" => Ok(FamilySpec::Cycle {
                k: get_usize(&kv, "k")?,
            }),
            "CYCLICBIP" => Ok(FamilySpec::CyclicBipartition {
                d: get_usize(&kv, "d")?,
                b: ColorSet::from_slice(&get_list(&kv, "b")?),
                k: get_usize(&kv, "k")?,
            }),
            "MELON" => Ok(FamilySpec::Melon {
                d: get_usize(&kv, "d")?,
            }),
            "MELONIC" => {
                let d = get_usize(&kv, "d")?;
                let script = kv
                    .get("script")
                    .map(|s| -> Result<Vec<Edge>> {
                        s.split(',')
                            .map(|item| {
                                let (c, w) = item.split_once(':').ok_or_else(|| {
                                    Error::InvalidFamilySpec("script items are color:white".into())
                                })?;
                                let color = c.parse().map_err(|_| {
                                    Error::InvalidFamilySpec("bad script color".into())
                                })?;
                                let white: usize = w.parse().map_err(|_| {
                                    Error::InvalidFamilySpec("bad script white".into())
                                })?;
                                if white == 0 {
                                    return Err(Error::InvalidFamilySpec(
                                        "script whites are 1-indexed".into(),
                                    ));
                                }
                                Ok(Edge {
                                    color,
                                    white: white - 1,
                                })
                            })
                            .collect()
                    })
                    .transpose()?
                    .unwrap_or_default();
                Ok(FamilySpec::MelonicScript {
                    d,
                    insertions: script,
                })
            }
            "PT" => {
                let d = kv.get("d").map_or(Ok(3), |_| get_usize(&kv, "d"))?;
                let traced = if kv.contains_key("traced") {
                    ColorSet::from_slice(&get_list(&kv, "traced")?)
                } else {
                    ColorSet::from_slice(&[d])
                };
                Ok(FamilySpec::Pt {
                    d,
                    k: get_usize(&kv, "k")?,
                    blocks: FamilySpec::standard_blocks(d, &traced)?,
                })
            }
            "RM" => {
                let d = kv.get("d").map_or(Ok(3), |_| get_usize(&kv, "d"))?;
                let traced = if kv.contains_key("traced") {
                    ColorSet::from_slice(&get_list(&kv, "traced")?)
                } else {
                    ColorSet::from_slice(&[d])
                };
                Ok(FamilySpec::Rm {
                    d,
                    n: get_usize(&kv, "n")?,
                    blocks: FamilySpec::standard_blocks(d, &traced)?,
                })
            }
            "JRM" => Ok(FamilySpec::Jrm {
                d: get_usize(&kv, "d")?,
                sequence: get_list(&kv, "seq")?,
            }),
            "LATTICE" => Ok(FamilySpec::Lattice {
                d: get_usize(&kv, "d")?,
                m: get_usize(&kv, "m")?,
                n: get_usize(&kv, "n")?,
                sequence: get_list(&kv, "seq")?,
                cut_color: get_usize(&kv, "cut")?,
            }),
            "ME" => Ok(FamilySpec::Me {
                d: get_usize(&kv, "d")?,
                n: get_usize(&kv, "n")?,
            }),
            "RME" => Ok(FamilySpec::Rme {
                d: get_usize(&kv, "d")?,
                m: get_usize(&kv, "m")?,
                n: get_usize(&kv, "n")?,
                traced: ColorSet::from_slice(&get_list(&kv, "traced")?),
            }),
            "KBIP" => Ok(FamilySpec::CompleteBipartite {
                d: get_usize(&kv, "d")?,
            }),
            "KGRAPH" => Ok(FamilySpec::CompleteGraph {
                d: get_usize(&kv, "d")?,
            }),
            other => Err(Error::InvalidFamilySpec(format!(
                "unknown family {other:?}"
            ))),
        }
    }
}
