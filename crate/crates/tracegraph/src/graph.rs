//! D-colored bipartite graphs encoded as D-tuples of permutations.
//!
//! A graph has `k` white and `k` black vertices; `sigma[c](w)` is the black
//! vertex joined to white vertex `w` by the color-`c` edge. Everything here
//! is invariant-oriented: restrictions, connected components, faces,
//! canonical forms under the simultaneous relabeling `sigma[c] -> eta ∘
//! sigma[c] ∘ nu`, structural predicates, and the three binary operations
//! (union, flip, vertex contraction) together with 1-dipole moves.

use std::collections::BTreeSet;
use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};
use crate::perm::Perm;

/// A sorted set of colors taken from `1..=D`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct ColorSet(BTreeSet<usize>);

impl ColorSet {
    pub fn new() -> Self {
        ColorSet(BTreeSet::new())
    }

    pub fn from_slice(colors: &[usize]) -> Self {
        ColorSet(colors.iter().copied().collect())
    }

    pub fn full(d: usize) -> Self {
        ColorSet((1..=d).collect())
    }

    pub fn insert(&mut self, c: usize) {
        self.0.insert(c);
    }

    pub fn contains(&self, c: usize) -> bool {
        self.0.contains(&c)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn is_subset(&self, other: &ColorSet) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn union(&self, other: &ColorSet) -> ColorSet {
        ColorSet(self.0.union(&other.0).copied().collect())
    }

    pub fn intersection(&self, other: &ColorSet) -> ColorSet {
        ColorSet(self.0.intersection(&other.0).copied().collect())
    }

    pub fn complement(&self, d: usize) -> ColorSet {
        ColorSet((1..=d).filter(|c| !self.0.contains(c)).collect())
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        for c in self.iter() {
            if c == 0 || c > d {
                return Err(Error::ColorOutOfRange { color: c, d });
            }
        }
        Ok(())
    }

    /// All subsets of `{1..=d}` with at least `min_len` elements.
    pub fn subsets(d: usize, min_len: usize) -> Vec<ColorSet> {
        let mut out = Vec::new();
        for mask in 0u32..(1 << d) {
            if (mask.count_ones() as usize) < min_len {
                continue;
            }
            let set: BTreeSet<usize> = (0..d).filter(|i| mask >> i & 1 == 1).map(|i| i + 1).collect();
            out.push(ColorSet(set));
        }
        out.sort();
        out
    }
}

impl fmt::Debug for ColorSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self)
    }
}

impl fmt::Display for ColorSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|c| c.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

/// A vertex of a colored graph: white vertices carry tensor copies, black
/// vertices their conjugates. Indices are 0-based.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash, PartialOrd, Ord)]
pub enum Vertex {
    White(usize),
    Black(usize),
}

/// An edge, addressed by its color and the white endpoint.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub color: usize,
    pub white: usize,
}

/// Face counts `F_ij`, the per-color sums `F_c` and the total `F`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FaceTable {
    d: usize,
    pairs: Vec<((usize, usize), usize)>,
}

impl FaceTable {
    pub fn get(&self, i: usize, j: usize) -> usize {
        let key = (i.min(j), i.max(j));
        self.pairs
            .iter()
            .find(|(p, _)| *p == key)
            .map(|(_, f)| *f)
            .expect("face pair out of range")
    }

    pub fn per_color(&self, c: usize) -> usize {
        (1..=self.d).filter(|&i| i != c).map(|i| self.get(i, c)).sum()
    }

    pub fn total(&self) -> usize {
        self.pairs.iter().map(|(_, f)| f).sum()
    }

    pub fn pairs(&self) -> &[((usize, usize), usize)] {
        &self.pairs
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ColoredGraph {
    d: usize,
    k: usize,
    sigma: Vec<Perm>,
}

impl fmt::Debug for ColoredGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ColoredGraph(D={}, k={}, [", self.d, self.k)?;
        for (i, s) in self.sigma.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{s}")?;
        }
        write!(f, "])")
    }
}

impl ColoredGraph {
    pub fn new(sigma: Vec<Perm>) -> Result<Self> {
        if sigma.is_empty() {
            return Err(Error::TooFewColors { d: 0, needed: 1 });
        }
        let k = sigma[0].degree();
        if k == 0 {
            return Err(Error::VertexOutOfRange { index: 0, k: 0 });
        }
        for s in &sigma {
            if s.degree() != k {
                return Err(Error::DegreeMismatch {
                    left: k,
                    right: s.degree(),
                });
            }
        }
        Ok(ColoredGraph {
            d: sigma.len(),
            k,
            sigma,
        })
    }

    /// The trivial graph: `k` two-vertex components, all colors parallel.
    pub fn trivial(d: usize, k: usize) -> Self {
        ColoredGraph {
            d,
            k,
            sigma: vec![Perm::identity(k); d],
        }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn sigma(&self, c: usize) -> &Perm {
        &self.sigma[c - 1]
    }

    pub fn sigmas(&self) -> &[Perm] {
        &self.sigma
    }

    /// Restriction to the colors in `B`, renumbered `1..=|B|` in order.
    pub fn restrict(&self, b: &ColorSet) -> Result<ColoredGraph> {
        if b.is_empty() {
            return Err(Error::EmptyColorSet);
        }
        b.validate(self.d)?;
        let sigma = b.iter().map(|c| self.sigma[c - 1].clone()).collect();
        ColoredGraph::new(sigma)
    }

    /// Number of connected components of the bipartite multigraph.
    pub fn kappa(&self) -> usize {
        self.kappa_of_colors(&ColorSet::full(self.d))
    }

    /// Components of the restriction `G|_B`.
    pub fn kappa_restrict(&self, b: &ColorSet) -> Result<usize> {
        if b.is_empty() {
            return Err(Error::EmptyColorSet);
        }
        b.validate(self.d)?;
        Ok(self.kappa_of_colors(b))
    }

    fn kappa_of_colors(&self, b: &ColorSet) -> usize {
        // Union-find over whites only: w ~ sigma_c'^{-1}(sigma_c(w)) for c, c' in B.
        let mut uf = UnionFind::new(self.k);
        let colors: Vec<usize> = b.iter().collect();
        if let Some(&first) = colors.first() {
            let s0 = &self.sigma[first - 1];
            for &c in &colors[1..] {
                let inv = self.sigma[c - 1].inverse();
                for w in 0..self.k {
                    uf.union(w, inv.image(s0.image(w)));
                }
            }
        }
        uf.count()
    }

    pub fn is_connected(&self) -> bool {
        self.kappa() == 1
    }

    /// Face table: `F_ij = #(sigma_i ∘ sigma_j⁻¹)` for `i < j`.
    pub fn faces(&self) -> Result<FaceTable> {
        if self.d < 2 {
            return Err(Error::TooFewColors {
                d: self.d,
                needed: 2,
            });
        }
        let mut pairs = Vec::new();
        for i in 1..=self.d {
            for j in (i + 1)..=self.d {
                let f = self.sigma[i - 1]
                    .compose(&self.sigma[j - 1].inverse())
                    .cycle_count();
                pairs.push(((i, j), f));
            }
        }
        Ok(FaceTable { d: self.d, pairs })
    }

    /// The color-flipped graph with `sigma[c] -> sigma[c]⁻¹`; its invariant
    /// evaluates to the complex conjugate.
    pub fn conjugate(&self) -> ColoredGraph {
        ColoredGraph {
            d: self.d,
            k: self.k,
            sigma: self.sigma.iter().map(|s| s.inverse()).collect(),
        }
    }

    /// White-vertex labels of each connected component, sorted.
    pub fn component_whites(&self) -> Vec<Vec<usize>> {
        let mut uf = UnionFind::new(self.k);
        let s0 = &self.sigma[0];
        for c in 2..=self.d {
            let inv = self.sigma[c - 1].inverse();
            for w in 0..self.k {
                uf.union(w, inv.image(s0.image(w)));
            }
        }
        uf.groups()
    }

    /// Connected components as standalone graphs, in order of least white.
    pub fn components(&self) -> Vec<ColoredGraph> {
        self.component_whites()
            .into_iter()
            .map(|whites| self.induced(&whites))
            .collect()
    }

    /// Subgraph induced by a union of components given as white labels.
    /// The black side follows automatically because components are closed.
    fn induced(&self, whites: &[usize]) -> ColoredGraph {
        let mut white_pos = vec![usize::MAX; self.k];
        for (i, &w) in whites.iter().enumerate() {
            white_pos[w] = i;
        }
        // Blacks of the component are the images of its whites under any color.
        let blacks: Vec<usize> = whites.iter().map(|&w| self.sigma[0].image(w)).collect();
        let mut sorted_blacks = blacks;
        sorted_blacks.sort_unstable();
        let mut black_pos = vec![usize::MAX; self.k];
        for (i, &b) in sorted_blacks.iter().enumerate() {
            black_pos[b] = i;
        }
        let sigma = self
            .sigma
            .iter()
            .map(|s| {
                let images: Vec<usize> = whites
                    .iter()
                    .map(|&w| black_pos[s.image(w)] + 1)
                    .collect();
                Perm::from_images_one_indexed(&images).expect("component closure")
            })
            .collect();
        ColoredGraph::new(sigma).expect("component is a valid graph")
    }

    // ---------------------------------------------------------------------
    // Canonical form and isomorphism
    // ---------------------------------------------------------------------

    /// Canonical representative of the `(eta, nu)` relabeling orbit.
    ///
    /// For `k <= 8` this is the exact lexicographic minimum of the
    /// concatenated one-line notation: the first permutation is always
    /// normalized to the identity, which reduces the search to conjugation
    /// of the tuple `(sigma_1⁻¹ sigma_c)` by a single `nu`. Above that, a
    /// breadth-first labeling minimized over all root choices is used,
    /// which is still a true orbit invariant.
    pub fn canonical_form(&self) -> ColoredGraph {
        if self.k <= 8 {
            self.canonical_exact()
        } else {
            self.canonical_bfs()
        }
    }

    fn canonical_exact(&self) -> ColoredGraph {
        let inv0 = self.sigma[0].inverse();
        let taus: Vec<Perm> = self.sigma.iter().map(|s| inv0.compose(s)).collect();
        let mut best: Option<Vec<Perm>> = None;
        for nu in Perm::all(self.k) {
            let nu_inv = nu.inverse();
            let candidate: Vec<Perm> = taus
                .iter()
                .map(|t| nu_inv.compose(&t.compose(&nu)))
                .collect();
            if best.as_ref().map_or(true, |b| candidate < *b) {
                best = Some(candidate);
            }
        }
        ColoredGraph::new(best.expect("nonempty orbit")).expect("valid canonical form")
    }

    fn canonical_bfs(&self) -> ColoredGraph {
        let comps = self.components();
        if comps.len() > 1 {
            let mut canon: Vec<ColoredGraph> =
                comps.into_iter().map(|c| c.canonical_form()).collect();
            canon.sort_by(|a, b| (a.k, &a.sigma).cmp(&(b.k, &b.sigma)));
            let mut acc = canon[0].clone();
            for c in &canon[1..] {
                acc = acc.union(c).expect("same D");
            }
            return acc;
        }
        let mut best: Option<Vec<Perm>> = None;
        for root in 0..self.k {
            let candidate = self.bfs_candidate(root);
            if best.as_ref().map_or(true, |b| candidate < *b) {
                best = Some(candidate);
            }
        }
        ColoredGraph::new(best.expect("nonempty")).expect("valid canonical form")
    }

    /// Deterministic relabeling from a BFS over whites with color-ordered
    /// neighbor visits, then black labels by first appearance.
    fn bfs_candidate(&self, root: usize) -> Vec<Perm> {
        let k = self.k;
        let inverses: Vec<Perm> = self.sigma.iter().map(|s| s.inverse()).collect();
        let mut order = Vec::with_capacity(k);
        let mut pos = vec![usize::MAX; k];
        order.push(root);
        pos[root] = 0;
        let mut head = 0;
        while head < order.len() {
            let w = order[head];
            head += 1;
            for via in 0..self.d {
                let b = self.sigma[via].image(w);
                for back in 0..self.d {
                    let w2 = inverses[back].image(b);
                    if pos[w2] == usize::MAX {
                        pos[w2] = order.len();
                        order.push(w2);
                    }
                }
            }
        }
        debug_assert_eq!(order.len(), k, "bfs_candidate needs a connected graph");
        // Black labels by first appearance scanning colors row-major in the
        // new white order.
        let mut black_pos = vec![usize::MAX; k];
        let mut next_black = 0;
        for c in 0..self.d {
            for &w in &order {
                let b = self.sigma[c].image(w);
                if black_pos[b] == usize::MAX {
                    black_pos[b] = next_black;
                    next_black += 1;
                }
            }
        }
        self.sigma
            .iter()
            .map(|s| {
                let images: Vec<usize> = order
                    .iter()
                    .map(|&w| black_pos[s.image(w)] + 1)
                    .collect();
                Perm::from_images_one_indexed(&images).expect("relabeled bijection")
            })
            .collect()
    }

    pub fn is_isomorphic(&self, other: &ColoredGraph) -> bool {
        self.d == other.d && self.k == other.k && self.canonical_form() == other.canonical_form()
    }

    /// Applies the relabeling `sigma[c] -> eta ∘ sigma[c] ∘ nu`.
    pub fn relabel(&self, eta: &Perm, nu: &Perm) -> Result<ColoredGraph> {
        if eta.degree() != self.k || nu.degree() != self.k {
            return Err(Error::DegreeMismatch {
                left: self.k,
                right: eta.degree().max(nu.degree()),
            });
        }
        let sigma = self
            .sigma
            .iter()
            .map(|s| eta.compose(&s.compose(nu)))
            .collect();
        ColoredGraph::new(sigma)
    }

    // ---------------------------------------------------------------------
    // Structural predicates
    // ---------------------------------------------------------------------

    pub fn classify(&self) -> Classification {
        let mut distinct: Vec<&Perm> = Vec::new();
        for s in &self.sigma {
            if !distinct.contains(&s) {
                distinct.push(s);
            }
        }
        let num_distinct = distinct.len();
        let melonic = self.is_melonic();
        let kappa = self.kappa();
        let c_melonic_colors: Vec<usize> = if melonic && self.d >= 2 {
            (1..=self.d)
                .filter(|&c| {
                    let others = ColorSet::from_slice(
                        &(1..=self.d).filter(|&x| x != c).collect::<Vec<_>>(),
                    );
                    !others.is_empty() && self.kappa_of_colors(&others) == kappa
                })
                .collect()
        } else {
            Vec::new()
        };
        let b_melonic_maximal = if melonic && self.d >= 2 && self.d <= 16 {
            maximal_sets(
                ColorSet::subsets(self.d, 1)
                    .into_iter()
                    .filter(|b| {
                        let comp = b.complement(self.d);
                        !comp.is_empty() && self.kappa_of_colors(&comp) == kappa
                    })
                    .collect(),
            )
        } else {
            Vec::new()
        };
        let mst = self.d >= 2
            && kappa == 1
            && self
                .faces()
                .map(|f| f.pairs().iter().all(|(_, c)| *c == 1))
                .unwrap_or(false);
        Classification {
            trivial: num_distinct == 1,
            cyclic: num_distinct <= 2,
            genuinely_d_partite: num_distinct == self.d,
            num_distinct_colors: num_distinct,
            melonic,
            c_melonic_colors,
            b_melonic_maximal_sets: b_melonic_maximal,
            maximally_single_trace: mst,
            has_double_size2_face_vertex: self.has_double_size2_face_vertex(),
        }
    }

    /// Iterated removal of (D−1)-dipoles down to two-vertex components.
    pub fn is_melonic(&self) -> bool {
        if self.d < 2 {
            return false;
        }
        let mut stack: Vec<ColoredGraph> = self.components();
        while let Some(g) = stack.pop() {
            if g.k == 1 {
                continue;
            }
            // Look for a pair (w, b) joined by exactly D−1 parallel edges.
            let mut found = None;
            'outer: for w in 0..g.k {
                let mut counts = std::collections::HashMap::new();
                for c in 0..g.d {
                    *counts.entry(g.sigma[c].image(w)).or_insert(0usize) += 1;
                }
                for (&b, &m) in &counts {
                    if m == g.d - 1 {
                        // Any edge of the dipole works for contraction.
                        let color = (1..=g.d).find(|&c| g.sigma[c - 1].image(w) == b).unwrap();
                        found = Some(Edge { color, white: w });
                        break 'outer;
                    }
                }
            }
            match found {
                Some(e) => {
                    let contracted = g.contract_edge(e).expect("dipole edge is contractible");
                    stack.extend(contracted.components());
                }
                None => return false,
            }
        }
        true
    }

    fn has_double_size2_face_vertex(&self) -> bool {
        // Two size-two faces at a vertex force incompatibility only when
        // they run to two different partner vertices; parallel pairs over
        // the same partner (as in the trivial graph) stay compatible.
        if self.d < 2 {
            return false;
        }
        for w in 0..self.k {
            let mut partners = BTreeSet::new();
            for i in 0..self.d {
                for j in (i + 1)..self.d {
                    if self.sigma[i].image(w) == self.sigma[j].image(w) {
                        partners.insert(self.sigma[i].image(w));
                    }
                }
            }
            if partners.len() >= 2 {
                return true;
            }
        }
        let inverses: Vec<Perm> = self.sigma.iter().map(|s| s.inverse()).collect();
        for b in 0..self.k {
            let mut partners = BTreeSet::new();
            for i in 0..self.d {
                for j in (i + 1)..self.d {
                    if inverses[i].image(b) == inverses[j].image(b) {
                        partners.insert(inverses[i].image(b));
                    }
                }
            }
            if partners.len() >= 2 {
                return true;
            }
        }
        false
    }

    /// Size (edge count) of the smallest bicolored face through `v`.
    pub fn min_face_size_at(&self, v: Vertex) -> usize {
        let mut best = usize::MAX;
        for i in 0..self.d {
            for j in (i + 1)..self.d {
                // Orbit length of the white-side action sigma_j⁻¹ sigma_i.
                let step = self.sigma[j].inverse().compose(&self.sigma[i]);
                let w0 = match v {
                    Vertex::White(w) => w,
                    Vertex::Black(b) => self.sigma[i].inverse().image(b),
                };
                let mut len = 1;
                let mut x = step.image(w0);
                while x != w0 {
                    len += 1;
                    x = step.image(x);
                }
                best = best.min(2 * len);
            }
        }
        best
    }

    // ---------------------------------------------------------------------
    // Coarse-graining
    // ---------------------------------------------------------------------

    /// Expands a D'-colored graph to D colors along the partition `zeta`:
    /// the block `zeta[c'-1]` receives copies of color-c' permutation.
    pub fn coarse_grain_expand(&self, zeta: &[ColorSet], d: usize) -> Result<ColoredGraph> {
        if zeta.len() != self.d {
            return Err(Error::BlockCountMismatch {
                blocks: zeta.len(),
                expected: self.d,
            });
        }
        let mut assignment = vec![None; d];
        for (ci, block) in zeta.iter().enumerate() {
            block.validate(d)?;
            if block.is_empty() {
                return Err(Error::EmptyColorSet);
            }
            for c in block.iter() {
                if assignment[c - 1].is_some() {
                    return Err(Error::InvalidWeights(format!(
                        "color {c} appears in two blocks"
                    )));
                }
                assignment[c - 1] = Some(ci);
            }
        }
        let sigma: Vec<Perm> = (0..d)
            .map(|c| {
                let ci = assignment[c].ok_or(Error::ColorOutOfRange { color: c + 1, d })?;
                Ok(self.sigma[ci].clone())
            })
            .collect::<Result<_>>()?;
        ColoredGraph::new(sigma)
    }

    /// Membership in `G_{D,zeta}`: equal permutations within each block.
    pub fn in_zeta_class(&self, zeta: &[ColorSet]) -> Result<bool> {
        let mut seen = vec![false; self.d];
        for block in zeta {
            block.validate(self.d)?;
            let colors: Vec<usize> = block.iter().collect();
            for &c in &colors {
                if seen[c - 1] {
                    return Err(Error::InvalidWeights(format!(
                        "color {c} appears in two blocks"
                    )));
                }
                seen[c - 1] = true;
            }
            for w in colors.windows(2) {
                if self.sigma[w[0] - 1] != self.sigma[w[1] - 1] {
                    return Ok(false);
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::BlockCountMismatch {
                blocks: zeta.len(),
                expected: self.d,
            });
        }
        Ok(true)
    }

    // ---------------------------------------------------------------------
    // Binary operations
    // ---------------------------------------------------------------------

    pub fn union(&self, other: &ColoredGraph) -> Result<ColoredGraph> {
        if self.d != other.d {
            return Err(Error::GraphArityMismatch {
                left: self.d,
                right: other.d,
            });
        }
        let k = self.k + other.k;
        let sigma = (0..self.d)
            .map(|c| {
                let mut images: Vec<usize> = self.sigma[c].one_line();
                images.extend(other.sigma[c].one_line().iter().map(|&i| i + self.k));
                Perm::from_images_one_indexed(&images).expect("blockwise bijection")
            })
            .collect();
        debug_assert!(k > 0);
        ColoredGraph::new(sigma)
    }

    /// Cuts the color-c edges `e1` (in self) and `e2` (in other) and
    /// reconnects crosswise.
    pub fn flip(&self, e1: Edge, other: &ColoredGraph, e2: Edge) -> Result<ColoredGraph> {
        if e1.color != e2.color {
            return Err(Error::ColorMismatch {
                left: e1.color,
                right: e2.color,
            });
        }
        if e1.color == 0 || e1.color > self.d {
            return Err(Error::ColorOutOfRange {
                color: e1.color,
                d: self.d,
            });
        }
        if e1.white >= self.k {
            return Err(Error::VertexOutOfRange {
                index: e1.white,
                k: self.k,
            });
        }
        if e2.white >= other.k {
            return Err(Error::VertexOutOfRange {
                index: e2.white,
                k: other.k,
            });
        }
        let mut joined = self.union(other)?;
        let c = e1.color - 1;
        let w1 = e1.white;
        let w2 = self.k + e2.white;
        let mut images = joined.sigma[c].one_line();
        images.swap(w1, w2);
        joined.sigma[c] = Perm::from_images_one_indexed(&images)?;
        Ok(joined)
    }

    /// Removes one vertex from each graph (opposite shades) and reconnects
    /// the pending half-edges color by color.
    pub fn vertex_contract(
        &self,
        v1: Vertex,
        other: &ColoredGraph,
        v2: Vertex,
    ) -> Result<ColoredGraph> {
        if self.d != other.d {
            return Err(Error::GraphArityMismatch {
                left: self.d,
                right: other.d,
            });
        }
        match (v1, v2) {
            (Vertex::White(w), Vertex::Black(b)) => self.contract_white_black(w, other, b),
            (Vertex::Black(b), Vertex::White(w)) => {
                // Symmetric case: remove black from self, white from other.
                other.contract_white_black(w, self, b)
            }
            _ => Err(Error::ShadeMismatch),
        }
    }

    /// Removes white `w` from `self` and black `b` from `other`.
    fn contract_white_black(
        &self,
        w: usize,
        other: &ColoredGraph,
        b: usize,
    ) -> Result<ColoredGraph> {
        if w >= self.k {
            return Err(Error::VertexOutOfRange { index: w, k: self.k });
        }
        if b >= other.k {
            return Err(Error::VertexOutOfRange {
                index: b,
                k: other.k,
            });
        }
        let k = self.k + other.k - 1;
        // Whites: self minus w, then other's whites. Blacks: self's blacks,
        // then other's minus b. Index maps keep the surviving order.
        let white_of_self = |x: usize| if x < w { x } else { x - 1 };
        let black_of_other = |y: usize| self.k + if y < b { y } else { y - 1 };
        let sigma = (0..self.d)
            .map(|c| {
                let mut images = vec![0usize; k];
                for x in 0..self.k {
                    if x == w {
                        continue;
                    }
                    images[white_of_self(x)] = self.sigma[c].image(x) + 1;
                }
                let hooked = other.sigma[c].inverse().image(b);
                for y in 0..other.k {
                    let target = other.sigma[c].image(y);
                    let slot = self.k - 1 + y;
                    if target == b {
                        debug_assert_eq!(y, hooked);
                        images[slot] = self.sigma[c].image(w) + 1;
                    } else {
                        images[slot] = black_of_other(target) + 1;
                    }
                }
                Perm::from_images_one_indexed(&images)
            })
            .collect::<Result<_>>()?;
        ColoredGraph::new(sigma)
    }

    // ---------------------------------------------------------------------
    // Dipole moves
    // ---------------------------------------------------------------------

    /// Edges whose endpoints fall in different components once the edge
    /// color is removed.
    pub fn one_dipoles(&self) -> Vec<Edge> {
        let mut out = Vec::new();
        if self.d < 2 {
            return out;
        }
        for color in 1..=self.d {
            let others = ColorSet::from_slice(
                &(1..=self.d).filter(|&c| c != color).collect::<Vec<_>>(),
            );
            // Component id over whites and blacks of G without `color`.
            let mut uf = UnionFind::new(2 * self.k);
            for c in others.iter() {
                for w in 0..self.k {
                    uf.union(w, self.k + self.sigma[c - 1].image(w));
                }
            }
            for w in 0..self.k {
                let b = self.sigma[color - 1].image(w);
                if uf.find(w) != uf.find(self.k + b) {
                    out.push(Edge { color, white: w });
                }
            }
        }
        out
    }

    /// Contracts a 1-dipole; errors when `e` is not one.
    pub fn one_dipole_contract(&self, e: Edge) -> Result<ColoredGraph> {
        if !self.one_dipoles().contains(&e) {
            return Err(Error::NotAOneDipole {
                color: e.color,
                white: e.white,
            });
        }
        self.contract_edge(e)
    }

    /// Generic edge contraction (Fig.-48 style): removes the edge and its
    /// endpoints and rewires the pending half-edges color by color.
    pub fn contract_edge(&self, e: Edge) -> Result<ColoredGraph> {
        if e.color == 0 || e.color > self.d {
            return Err(Error::ColorOutOfRange {
                color: e.color,
                d: self.d,
            });
        }
        if e.white >= self.k {
            return Err(Error::VertexOutOfRange {
                index: e.white,
                k: self.k,
            });
        }
        if self.k == 1 {
            return Err(Error::VertexOutOfRange { index: 0, k: 1 });
        }
        let w = e.white;
        let b = self.sigma[e.color - 1].image(w);
        let k = self.k - 1;
        let wmap = |x: usize| if x < w { x } else { x - 1 };
        let bmap = |y: usize| if y < b { y } else { y - 1 };
        let sigma = (0..self.d)
            .map(|c| {
                let mut images = vec![0usize; k];
                for x in 0..self.k {
                    if x == w {
                        continue;
                    }
                    let mut target = self.sigma[c].image(x);
                    if target == b {
                        // Pending half-edge at the removed black reattaches
                        // to the removed white's other endpoint.
                        target = self.sigma[c].image(w);
                        if target == b {
                            // Parallel edge between w and b: vanishes, and x
                            // cannot exist in this branch.
                            unreachable!("x maps to b only once per color");
                        }
                    }
                    images[wmap(x)] = bmap(target) + 1;
                }
                Perm::from_images_one_indexed(&images)
            })
            .collect::<Result<_>>()?;
        ColoredGraph::new(sigma)
    }

    // ---------------------------------------------------------------------
    // Random graphs for property suites
    // ---------------------------------------------------------------------

    pub fn random<R: Rng>(d: usize, k: usize, rng: &mut R) -> ColoredGraph {
        ColoredGraph::new((0..d).map(|_| Perm::random(k, rng)).collect())
            .expect("random sigmas are valid")
    }

    pub fn random_connected<R: Rng>(d: usize, k: usize, rng: &mut R) -> ColoredGraph {
        loop {
            let g = ColoredGraph::random(d, k, rng);
            if g.is_connected() {
                return g;
            }
        }
    }

    /// Random melonic graph built from `insertions` melonic insertions.
    pub fn random_melonic<R: Rng>(d: usize, insertions: usize, rng: &mut R) -> ColoredGraph {
        let mut g = ColoredGraph::trivial(d, 1);
        for _ in 0..insertions {
            let color = rng.gen_range(1..=d);
            let white = rng.gen_range(0..g.k);
            g = g.insert_melon(Edge { color, white }).expect("valid edge");
        }
        g
    }

    /// Melonic insertion on an edge: a flip with the two-vertex graph.
    pub fn insert_melon(&self, e: Edge) -> Result<ColoredGraph> {
        let m = ColoredGraph::trivial(self.d, 1);
        self.flip(e, &m, Edge { color: e.color, white: 0 })
    }
}

/// Flags computed by `ColoredGraph::classify`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Classification {
    pub trivial: bool,
    pub cyclic: bool,
    pub genuinely_d_partite: bool,
    pub num_distinct_colors: usize,
    pub melonic: bool,
    pub c_melonic_colors: Vec<usize>,
    pub b_melonic_maximal_sets: Vec<ColorSet>,
    pub maximally_single_trace: bool,
    pub has_double_size2_face_vertex: bool,
}

fn maximal_sets(mut sets: Vec<ColorSet>) -> Vec<ColorSet> {
    sets.sort_by_key(|s| std::cmp::Reverse(s.len()));
    let mut out: Vec<ColorSet> = Vec::new();
    for s in sets {
        if !out.iter().any(|m| s.is_subset(m)) {
            out.push(s);
        }
    }
    out.sort();
    out
}

struct UnionFind {
    parent: Vec<usize>,
    count: usize,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            count: n,
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra] = rb;
            self.count -= 1;
        }
    }

    fn count(&self) -> usize {
        self.count
    }

    fn groups(&mut self) -> Vec<Vec<usize>> {
        let n = self.parent.len();
        let mut map = std::collections::BTreeMap::new();
        for x in 0..n {
            let r = self.find(x);
            map.entry(r).or_insert_with(Vec::new).push(x);
        }
        let mut out: Vec<Vec<usize>> = map.into_values().collect();
        out.sort_by_key(|g| g[0]);
        out
    }
}
