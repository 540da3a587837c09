//! Scalar combinatorial quantities of a colored graph, and the search for
//! the degree of compatibility.
//!
//! Everything is exact integer arithmetic. The heavy operation is
//! `compatibility_search`, which minimizes the total Gromov product over a
//! color-0 permutation: exhaustive for small degree, branch-and-bound with
//! an admissible cycle-count bound above that.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::One;

use crate::error::{Error, Result};
use crate::graph::{ColorSet, ColoredGraph, FaceTable, Vertex};
use crate::perm::Perm;

/// Binomial coefficient as u64; sizes here are tiny.
pub fn binomial(n: usize, r: usize) -> u64 {
    if r > n {
        return 0;
    }
    let mut acc = 1u64;
    for i in 0..r {
        acc = acc * (n - i) as u64 / (i + 1) as u64;
    }
    acc
}

/// All scalar degrees of one graph.
#[derive(Clone, Debug)]
pub struct DegreeReport {
    pub d: usize,
    pub k: usize,
    pub kappa: usize,
    pub kappa_minus_k: i64,
    pub faces: FaceTable,
    /// `K_B = kappa(G|_B) − kappa(G)` for every `B` with `2 <= |B| <= D`.
    pub k_b: BTreeMap<ColorSet, u64>,
    /// Jacket genus per cyclic color order (summed over components). The
    /// key is the順 cycle written from color 1, e.g. `[1, 2, 3, 4]`.
    pub jacket_genera: Vec<(Vec<usize>, u64)>,
    /// Gurau degree.
    pub omega2: u64,
    /// `omega_p` for `p = 2..=D` (`omega_D = 0` by convention).
    pub omega_p: BTreeMap<usize, u64>,
    /// `omega_p^{(q)}` for `2 <= p <= q <= D`.
    pub omega_pq: BTreeMap<(usize, usize), u64>,
    /// `Omega_c` per color.
    pub omega_c: BTreeMap<usize, u64>,
    /// `kappa^{(p)}` for `p = 1..=D`.
    pub kappa_p: BTreeMap<usize, u64>,
}

/// Computes every entry of the report; needs `D >= 2`.
pub fn degree_report(g: &ColoredGraph) -> Result<DegreeReport> {
    let d = g.d();
    if d < 2 {
        return Err(Error::TooFewColors { d, needed: 2 });
    }
    let k = g.k();
    let kappa = g.kappa();
    let faces = g.faces()?;

    let mut k_b = BTreeMap::new();
    let mut kappa_by_set: BTreeMap<ColorSet, usize> = BTreeMap::new();
    for b in ColorSet::subsets(d, 1) {
        let kb = g.kappa_restrict(&b)?;
        kappa_by_set.insert(b.clone(), kb);
        if b.len() >= 2 {
            k_b.insert(b, (kb - kappa) as u64);
        }
    }

    let mut kappa_p = BTreeMap::new();
    for p in 1..=d {
        let total: u64 = kappa_by_set
            .iter()
            .filter(|(b, _)| b.len() == p)
            .map(|(_, &v)| v as u64)
            .sum();
        kappa_p.insert(p, total);
    }

    let jacket_genera = jacket_genera(g, &faces)?;

    // omega_2 = (D−1) kappa + (D−1)(D−2)/2 k − F.
    let f_total = faces.total() as i64;
    let omega2_signed =
        (d as i64 - 1) * kappa as i64 + (d as i64 - 1) * (d as i64 - 2) / 2 * k as i64 - f_total;
    if omega2_signed < 0 {
        return Err(Error::InternalConsistency(format!(
            "negative Gurau degree {omega2_signed}"
        )));
    }
    let omega2 = omega2_signed as u64;

    let mut omega_p = BTreeMap::new();
    for p in 2..=d {
        if p == d {
            omega_p.insert(p, 0u64);
            continue;
        }
        let val = binomial(d - 1, p - 1) as i64 * kappa as i64
            + binomial(d - 1, p) as i64 * k as i64
            - kappa_p[&p] as i64;
        if val < 0 {
            return Err(Error::InternalConsistency(format!(
                "negative {p}-complete degree {val}"
            )));
        }
        omega_p.insert(p, val as u64);
    }

    let mut omega_pq = BTreeMap::new();
    for p in 2..=d {
        for q in p..=d {
            if p == q {
                omega_pq.insert((p, q), 0u64);
                continue;
            }
            let val = binomial(q - 1, p - 1) as i64 * kappa_p[&q] as i64
                + binomial(q - 1, p) as i64 * binomial(d, q) as i64 * k as i64
                - binomial(d - p, q - p) as i64 * kappa_p[&p] as i64;
            if val < 0 {
                return Err(Error::InternalConsistency(format!(
                    "negative omega_{p}^({q}) = {val}"
                )));
            }
            omega_pq.insert((p, q), val as u64);
        }
    }

    let mut omega_c = BTreeMap::new();
    for c in 1..=d {
        let val = kappa as i64 + (d as i64 - 2) * k as i64 - faces.per_color(c) as i64;
        if val < 0 {
            return Err(Error::InternalConsistency(format!(
                "negative c-degree for color {c}: {val}"
            )));
        }
        omega_c.insert(c, val as u64);
    }

    Ok(DegreeReport {
        d,
        k,
        kappa,
        kappa_minus_k: kappa as i64 - k as i64,
        faces,
        k_b,
        jacket_genera,
        omega2,
        omega_p,
        omega_pq,
        omega_c,
        kappa_p,
    })
}

/// Genus of each regular embedding, one entry per cyclic color order up to
/// rotation and inversion, summed over connected components.
fn jacket_genera(g: &ColoredGraph, _faces: &FaceTable) -> Result<Vec<(Vec<usize>, u64)>> {
    let d = g.d();
    let mut out = Vec::new();
    for order in cyclic_orders(d) {
        let mut total = 0u64;
        for comp in g.components() {
            let faces = comp.faces()?;
            let k = comp.k() as i64;
            let mut face_sum = 0i64;
            for i in 0..d {
                let a = order[i];
                let b = order[(i + 1) % d];
                face_sum += faces.get(a, b) as i64;
            }
            let two_minus_2g = (2 - d as i64) * k + face_sum;
            let doubled = 2 - two_minus_2g;
            if doubled < 0 || doubled % 2 != 0 {
                return Err(Error::InternalConsistency(format!(
                    "Euler parity violation for jacket {order:?}: 2-2g = {two_minus_2g}"
                )));
            }
            total += (doubled / 2) as u64;
        }
        out.push((order, total));
    }
    Ok(out)
}

/// Cyclic orders of `1..=d` starting at 1, up to inversion: for `d >= 3`
/// there are `(d−1)!/2` of them; for `d = 2` the single order `[1, 2]`.
pub fn cyclic_orders(d: usize) -> Vec<Vec<usize>> {
    if d == 2 {
        return vec![vec![1, 2]];
    }
    let rest: Vec<usize> = (2..=d).collect();
    let mut out = Vec::new();
    permute(&rest, &mut Vec::new(), &mut out);
    out.retain(|tail| tail[0] < tail[tail.len() - 1]);
    out.into_iter()
        .map(|tail| {
            let mut order = vec![1];
            order.extend(tail);
            order
        })
        .collect()
}

fn permute(pool: &[usize], acc: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if pool.is_empty() {
        out.push(acc.clone());
        return;
    }
    for (i, &x) in pool.iter().enumerate() {
        let mut rest = pool.to_vec();
        rest.remove(i);
        acc.push(x);
        permute(&rest, acc, out);
        acc.pop();
    }
}

// ---------------------------------------------------------------------------
// Compatibility search
// ---------------------------------------------------------------------------

/// Limits for the minimization over the color-0 permutation.
#[derive(Clone, Debug)]
pub struct SearchBudget {
    /// Exhaustive enumeration of S_k up to this degree.
    pub exhaustive_k: usize,
    /// Node cap for the branch-and-bound above `exhaustive_k`.
    pub max_nodes: u64,
    /// Cap on the number of stored witnesses.
    pub max_witnesses: usize,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            exhaustive_k: 8,
            max_nodes: 50_000_000,
            max_witnesses: 64,
        }
    }
}

impl SearchBudget {
    pub fn exhaustive_up_to(k: usize) -> Self {
        SearchBudget {
            exhaustive_k: k,
            ..SearchBudget::default()
        }
    }
}

/// Whether a search result is proven optimal.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exactness {
    Exact,
    /// Upper bound only; the search did not close.
    Bound,
}

/// A minimizing (or best-found) color-0 permutation with its breakdown.
#[derive(Clone, Debug)]
pub struct NuWitness {
    pub nu: Perm,
    pub delta_nu: u64,
    pub f0: u64,
    /// Gromov products `(sigma_i | sigma_j)_nu` keyed by `(i, j)`, `i < j`.
    pub gromov: BTreeMap<(usize, usize), u64>,
}

/// Result of the compatibility search.
#[derive(Clone, Debug)]
pub struct DeltaSearch {
    pub delta: u64,
    /// Number of minimizers; `None` when the search returned a bound.
    pub mu: Option<u64>,
    pub witnesses: Vec<NuWitness>,
    pub exactness: Exactness,
}

/// Builds the full witness record for a given `nu`.
pub fn witness_for(g: &ColoredGraph, nu: &Perm) -> Result<NuWitness> {
    if nu.degree() != g.k() {
        return Err(Error::DegreeMismatch {
            left: g.k(),
            right: nu.degree(),
        });
    }
    let mut gromov = BTreeMap::new();
    let mut total = 0u64;
    for i in 1..=g.d() {
        for j in (i + 1)..=g.d() {
            let dij = g.sigma(i).cayley_distance(g.sigma(j))?;
            let din = g.sigma(i).cayley_distance(nu)?;
            let djn = g.sigma(j).cayley_distance(nu)?;
            let twice = din + djn - dij;
            if twice % 2 != 0 {
                return Err(Error::InternalConsistency(
                    "odd Gromov product".to_string(),
                ));
            }
            let val = (twice / 2) as u64;
            gromov.insert((i, j), val);
            total += val;
        }
    }
    let f0: usize = (1..=g.d())
        .map(|c| g.sigma(c).compose(&nu.inverse()).cycle_count())
        .sum();
    Ok(NuWitness {
        nu: nu.clone(),
        delta_nu: total,
        f0: f0 as u64,
        gromov,
    })
}

/// `Delta_nu` without building the whole witness.
pub fn delta_nu(g: &ColoredGraph, nu: &Perm) -> Result<u64> {
    Ok(witness_for(g, nu)?.delta_nu)
}

/// Minimizes the total Gromov product over `nu ∈ S_k`, counting the
/// minimizers. `Exact` unless the branch-and-bound ran out of nodes.
pub fn compatibility_search(g: &ColoredGraph, budget: &SearchBudget) -> Result<DeltaSearch> {
    let k = g.k();
    if k <= budget.exhaustive_k {
        exhaustive_search(g, budget)
    } else {
        branch_and_bound(g, budget)
    }
}

/// `F0(nu) = Σ_c #(sigma_c ∘ nu⁻¹)` relates to the Gromov total by
/// `Delta_nu = [(D−1)(Dk − F0) − (D(D−1)k/2 − F)] / 2`; maximizing `F0`
/// minimizes `Delta_nu`.
fn delta_from_f0(g: &ColoredGraph, f_total: u64, f0: u64) -> u64 {
    let d = g.d() as u64;
    let k = g.k() as u64;
    // 2*Delta = (D−1)(Dk − F0) − (D(D−1)k/2 − F) stays non-negative.
    let lhs = (d - 1) * (d * k - f0) + f_total;
    let rhs = d * (d - 1) * k / 2;
    debug_assert!(lhs >= rhs, "negative Delta from F0");
    (lhs - rhs) / 2
}

fn exhaustive_search(g: &ColoredGraph, budget: &SearchBudget) -> Result<DeltaSearch> {
    let k = g.k();
    let d = g.d();
    let sigmas: Vec<Vec<u32>> = (1..=d)
        .map(|c| g.sigma(c).images().to_vec())
        .collect();
    let mut best_f0 = 0usize;
    let mut count = 0u64;
    let mut minimizers: Vec<Perm> = Vec::new();
    let mut nu_inv = vec![0u32; k];
    let mut seen = vec![0u64; k];
    let mut stamp = 0u64;
    for nu in Perm::all(k) {
        for (i, &im) in nu.images().iter().enumerate() {
            nu_inv[im as usize] = i as u32;
        }
        let mut f0 = 0usize;
        for sigma in &sigmas {
            // Cycle count of b -> sigma[nu_inv[b]].
            stamp += 1;
            for start in 0..k {
                if seen[start] == stamp {
                    continue;
                }
                f0 += 1;
                let mut x = start;
                while seen[x] != stamp {
                    seen[x] = stamp;
                    x = sigma[nu_inv[x] as usize] as usize;
                }
            }
        }
        if f0 > best_f0 {
            best_f0 = f0;
            count = 1;
            minimizers.clear();
            minimizers.push(nu);
        } else if f0 == best_f0 {
            count += 1;
            if minimizers.len() < budget.max_witnesses {
                minimizers.push(nu);
            }
        }
    }
    let f_total = g.faces()?.total() as u64;
    let delta = delta_from_f0(g, f_total, best_f0 as u64);
    let witnesses = minimizers
        .iter()
        .map(|nu| witness_for(g, nu))
        .collect::<Result<_>>()?;
    Ok(DeltaSearch {
        delta,
        mu: Some(count),
        witnesses,
        exactness: Exactness::Exact,
    })
}

/// Branch and bound assigning `nu` white by white. The admissible bound on
/// each color's final cycle count is `closed cycles + open paths + isolated
/// vertices` of the partial functional graph of `sigma_c ∘ nu⁻¹`.
fn branch_and_bound(g: &ColoredGraph, budget: &SearchBudget) -> Result<DeltaSearch> {
    let k = g.k();
    let d = g.d();
    let sigmas: Vec<Vec<usize>> = (1..=d)
        .map(|c| g.sigma(c).images().iter().map(|&x| x as usize).collect())
        .collect();

    struct ColorState {
        // Per-vertex path bookkeeping for the partial graph on blacks.
        start_of_end: Vec<usize>,
        end_of_start: Vec<usize>,
        has_out: Vec<bool>,
        has_in: Vec<bool>,
        closed: usize,
        paths: usize,
        isolated: usize,
    }

    impl ColorState {
        fn new(k: usize) -> Self {
            ColorState {
                start_of_end: (0..k).collect(),
                end_of_start: (0..k).collect(),
                has_out: vec![false; k],
                has_in: vec![false; k],
                closed: 0,
                paths: 0,
                isolated: k,
            }
        }

        fn bound(&self) -> usize {
            self.closed + self.paths + self.isolated
        }

        // Adds the edge u -> v; returns an undo record.
        fn add_edge(&mut self, u: usize, v: usize) -> (usize, usize, bool) {
            let su = self.start_of_end[u];
            let ev = self.end_of_start[v];
            let u_iso = !self.has_out[u] && !self.has_in[u];
            let v_iso = !self.has_out[v] && !self.has_in[v];
            let closes = su == v || (u == v && u_iso);
            if u == v {
                // Self-loop: closes a fixed point.
                self.closed += 1;
                if u_iso {
                    self.isolated -= 1;
                } else {
                    self.paths -= 1;
                }
            } else if closes {
                self.closed += 1;
                self.paths -= 1;
            } else {
                // Merge path ending at u with path starting at v.
                match (u_iso, v_iso) {
                    (true, true) => {
                        self.isolated -= 2;
                        self.paths += 1;
                    }
                    (true, false) | (false, true) => {
                        self.isolated -= 1;
                    }
                    (false, false) => {
                        self.paths -= 1;
                    }
                }
                self.start_of_end[self.end_of_start[v]] = su;
                self.end_of_start[su] = ev;
            }
            self.has_out[u] = true;
            self.has_in[v] = true;
            (su, ev, closes)
        }

        fn remove_edge(&mut self, u: usize, v: usize, undo: (usize, usize, bool)) {
            let (su, ev, closed) = undo;
            self.has_out[u] = false;
            self.has_in[v] = false;
            let u_iso = !self.has_out[u] && !self.has_in[u];
            let v_iso = !self.has_out[v] && !self.has_in[v];
            if u == v && closed && u_iso {
                self.closed -= 1;
                self.isolated += 1;
            } else if u == v && closed {
                self.closed -= 1;
                self.paths += 1;
            } else if closed {
                self.closed -= 1;
                self.paths += 1;
            } else {
                match (u_iso, v_iso) {
                    (true, true) => {
                        self.isolated += 2;
                        self.paths -= 1;
                    }
                    (true, false) | (false, true) => {
                        self.isolated += 1;
                    }
                    (false, false) => {
                        self.paths += 1;
                    }
                }
                self.start_of_end[ev] = v;
                self.end_of_start[su] = u;
            }
        }
    }

    struct Ctx {
        k: usize,
        sigmas: Vec<Vec<usize>>,
        states: Vec<ColorState>,
        used: Vec<bool>,
        nu: Vec<usize>,
        best_f0: usize,
        count: u64,
        minimizers: Vec<Perm>,
        nodes: u64,
        max_nodes: u64,
        max_witnesses: usize,
        exhausted: bool,
    }

    fn recurse(ctx: &mut Ctx, s: usize) {
        if ctx.exhausted {
            return;
        }
        ctx.nodes += 1;
        if ctx.nodes > ctx.max_nodes {
            ctx.exhausted = true;
            return;
        }
        if s == ctx.k {
            let f0: usize = ctx.states.iter().map(|st| st.closed).sum();
            if f0 > ctx.best_f0 {
                ctx.best_f0 = f0;
                ctx.count = 1;
                ctx.minimizers.clear();
                let images: Vec<usize> = ctx.nu.iter().map(|&b| b + 1).collect();
                ctx.minimizers
                    .push(Perm::from_images_one_indexed(&images).unwrap());
            } else if f0 == ctx.best_f0 {
                ctx.count += 1;
                if ctx.minimizers.len() < ctx.max_witnesses {
                    let images: Vec<usize> = ctx.nu.iter().map(|&b| b + 1).collect();
                    ctx.minimizers
                        .push(Perm::from_images_one_indexed(&images).unwrap());
                }
            }
            return;
        }
        let bound: usize = ctx.states.iter().map(|st| st.bound()).sum();
        if bound < ctx.best_f0 {
            return;
        }
        for b in 0..ctx.k {
            if ctx.used[b] {
                continue;
            }
            ctx.used[b] = true;
            ctx.nu[s] = b;
            let mut undos = Vec::with_capacity(ctx.states.len());
            for (c, st) in ctx.states.iter_mut().enumerate() {
                let v = ctx.sigmas[c][s];
                undos.push(st.add_edge(b, v));
            }
            recurse(ctx, s + 1);
            for (c, st) in ctx.states.iter_mut().enumerate().rev() {
                let v = ctx.sigmas[c][s];
                st.remove_edge(b, v, undos[c]);
            }
            ctx.used[b] = false;
        }
    }

    let mut ctx = Ctx {
        k,
        states: (0..d).map(|_| ColorState::new(k)).collect(),
        sigmas,
        used: vec![false; k],
        nu: vec![0; k],
        best_f0: 0,
        count: 0,
        minimizers: Vec::new(),
        nodes: 0,
        max_nodes: budget.max_nodes,
        max_witnesses: budget.max_witnesses,
        exhausted: false,
    };
    recurse(&mut ctx, 0);

    if ctx.minimizers.is_empty() {
        return Err(Error::BudgetExceeded(
            "branch-and-bound found no complete assignment".into(),
        ));
    }
    let f_total = g.faces()?.total() as u64;
    let delta = delta_from_f0(g, f_total, ctx.best_f0 as u64);
    let witnesses = ctx
        .minimizers
        .iter()
        .map(|nu| witness_for(g, nu))
        .collect::<Result<_>>()?;
    if ctx.exhausted {
        Ok(DeltaSearch {
            delta,
            mu: None,
            witnesses,
            exactness: Exactness::Bound,
        })
    } else {
        Ok(DeltaSearch {
            delta,
            mu: Some(ctx.count),
            witnesses,
            exactness: Exactness::Exact,
        })
    }
}

/// Haar scaling `s_G = −min_nu Σ_c d(sigma_c, nu)` with the minimizer count;
/// the same search as the compatibility degree.
pub fn haar_scaling(g: &ColoredGraph, budget: &SearchBudget) -> Result<(i64, Option<u64>, Exactness)> {
    let search = compatibility_search(g, budget)?;
    let s = haar_scaling_from_delta(g, search.delta)?;
    Ok((s, search.mu, search.exactness))
}

/// `s_G(phi) = F/(D−1) − (D/2)k − 2*Delta/(D−1)`, always an integer.
pub fn haar_scaling_from_delta(g: &ColoredGraph, delta: u64) -> Result<i64> {
    let d = g.d() as i64;
    let k = g.k() as i64;
    let f = g.faces()?.total() as i64;
    let num = 2 * f - d * (d - 1) * k - 4 * delta as i64;
    if num % (2 * (d - 1)) != 0 {
        return Err(Error::InternalConsistency(
            "non-integer Haar scaling".to_string(),
        ));
    }
    Ok(num / (2 * (d - 1)))
}

// ---------------------------------------------------------------------------
// Conditional composition of Delta and mu
// ---------------------------------------------------------------------------

/// The binary operation whose effect on `(Delta, mu)` is being justified.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ComposeOp {
    Union,
    Flip { color: usize },
    Contract { vertex_face_bound: usize },
}

/// A certificate that a graph belongs to a family whose disjoint unions are
/// known to have tree-like dominant graphs, read off its construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum TreeLikeCert {
    None,
    /// Unions with this operand have tree-like dominant graphs.
    Dominant,
    /// ... and nothing else dominates (needed for vertex contraction).
    OnlyDominant,
}

/// Why additivity applied, or which condition failed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ComposeOutcome {
    Known {
        delta: u64,
        /// False when an operand only carried an upper bound; the composed
        /// value is then itself an upper bound.
        delta_exact: bool,
        mu: Option<u64>,
        justification: String,
    },
    Unknown {
        failed: String,
    },
}

/// Inputs to the composition rule for one operand.
#[derive(Clone, Debug)]
pub struct OperandInfo {
    pub delta: u64,
    pub delta_exact: bool,
    pub mu: Option<u64>,
    pub tree_like: TreeLikeCert,
    /// Set when the operand is known compatible and maximally single-trace
    /// and the operation is the mirror contraction of that graph with its
    /// conjugate.
    pub mirror_mst_pair: bool,
}

/// Applies the conditional additivity rules for `Delta` and `mu`.
///
/// Thresholds: union needs `min(Delta1+Delta2, bound on result) < D(D−1)/2`,
/// flip the same with `(D−1)(D−2)/2`; vertex contraction needs both graphs
/// compatible with a contraction vertex on a face of size at most four.
/// When either operand carries a tree-like certificate, union and flip are
/// additive regardless of the thresholds, and contraction when the
/// certificate is `OnlyDominant`.
pub fn compose_delta(
    d: usize,
    op: &ComposeOp,
    left: &OperandInfo,
    right: &OperandInfo,
    result_upper_bound: Option<u64>,
) -> ComposeOutcome {
    let sum = left.delta + right.delta;
    let both_exact = left.delta_exact && right.delta_exact;
    let mu = match (left.mu, right.mu, both_exact) {
        (Some(a), Some(b), true) => Some(a * b),
        _ => None,
    };
    let bound = result_upper_bound.map_or(sum, |r| r.min(sum));
    let known = |justification: String| ComposeOutcome::Known {
        delta: sum,
        delta_exact: both_exact,
        mu,
        justification,
    };
    match op {
        ComposeOp::Union => {
            let threshold = (d as u64) * (d as u64 - 1) / 2;
            if bound < threshold {
                return known(format!("union threshold: {bound} < {threshold}"));
            }
            if left.tree_like >= TreeLikeCert::Dominant || right.tree_like >= TreeLikeCert::Dominant
            {
                return known("union with a tree-like-dominant operand".to_string());
            }
            ComposeOutcome::Unknown {
                failed: format!(
                    "union needs Delta bound < {threshold} (have {bound}) or a tree-like operand"
                ),
            }
        }
        ComposeOp::Flip { .. } => {
            let threshold = (d as u64 - 1) * (d as u64 - 2) / 2;
            if bound < threshold {
                return known(format!("flip threshold: {bound} < {threshold}"));
            }
            if left.tree_like >= TreeLikeCert::Dominant || right.tree_like >= TreeLikeCert::Dominant
            {
                return known("flip with a tree-like-dominant operand".to_string());
            }
            ComposeOutcome::Unknown {
                failed: format!(
                    "flip needs Delta bound < {threshold} (have {bound}) or a tree-like operand"
                ),
            }
        }
        ComposeOp::Contract { vertex_face_bound } => {
            if left.mirror_mst_pair || right.mirror_mst_pair {
                return ComposeOutcome::Known {
                    delta: 0,
                    delta_exact: true,
                    mu: None,
                    justification: "mirror contraction of a maximally single-trace graph".into(),
                };
            }
            if left.tree_like == TreeLikeCert::OnlyDominant
                || right.tree_like == TreeLikeCert::OnlyDominant
            {
                return known("contraction with an only-tree-like-dominant operand".to_string());
            }
            if both_exact && left.delta == 0 && right.delta == 0 && *vertex_face_bound <= 4 {
                return known(format!(
                    "compatible contraction on a face of size {vertex_face_bound}"
                ));
            }
            ComposeOutcome::Unknown {
                failed: format!(
                    "contraction needs Delta1 = Delta2 = 0 with a face of size <= 4 \
                     (have {}, {}, face {vertex_face_bound}) or an only-tree-like operand",
                    left.delta, right.delta
                ),
            }
        }
    }
}

/// Composes two witnesses through a binary operation into a witness of the
/// composed graph; its `Delta_nu` always certifies `Delta <= Delta1+Delta2`.
pub fn compose_witness(
    op: &ComposeOp,
    left_k: usize,
    left_nu: &Perm,
    right_nu: &Perm,
    contract_vertices: Option<(Vertex, Vertex)>,
) -> Result<Perm> {
    let combine = |a: &Perm, b: &Perm| -> Perm {
        let mut images = a.one_line();
        images.extend(b.one_line().iter().map(|&x| x + a.degree()));
        Perm::from_images_one_indexed(&images).expect("block sum")
    };
    match op {
        ComposeOp::Union | ComposeOp::Flip { .. } => Ok(combine(left_nu, right_nu)),
        ComposeOp::Contract { .. } => {
            let (v1, v2) = contract_vertices.ok_or(Error::ShadeMismatch)?;
            // Normalize to (white in left, black in right).
            let (w, b, swap) = match (v1, v2) {
                (Vertex::White(w), Vertex::Black(b)) => (w, b, false),
                (Vertex::Black(b), Vertex::White(w)) => (w, b, true),
                _ => return Err(Error::ShadeMismatch),
            };
            let (first, second, w, b) = if swap {
                (right_nu, left_nu, w, b)
            } else {
                (left_nu, right_nu, w, b)
            };
            let k1 = if swap { right_nu.degree() } else { left_k };
            debug_assert_eq!(first.degree(), k1);
            let k2 = second.degree();
            let hooked = second.inverse().image(b);
            let target = first.image(w);
            let wmap = |x: usize| if x < w { x } else { x - 1 };
            let bmap = |y: usize| k1 + if y < b { y } else { y - 1 };
            let mut images = vec![0usize; k1 + k2 - 1];
            for x in 0..k1 {
                if x == w {
                    continue;
                }
                images[wmap(x)] = first.image(x) + 1;
            }
            for y in 0..k2 {
                let t = second.image(y);
                let slot = k1 - 1 + y;
                if y == hooked {
                    images[slot] = target + 1;
                } else {
                    images[slot] = bmap(t) + 1;
                }
            }
            Perm::from_images_one_indexed(&images)
        }
    }
}

// ---------------------------------------------------------------------------
// Degree bounds
// ---------------------------------------------------------------------------

/// Least `k` with `k! >= D`: the minimal degree of a genuinely D-partite
/// graph.
pub fn k_min(d: usize) -> usize {
    let mut k = 1usize;
    let mut fact = 1usize;
    while fact < d {
        k += 1;
        fact = fact.saturating_mul(k);
    }
    k.max(1)
}

/// Exact integer evaluation of the generator-degree bound
/// `max(2, ceil(3/8 · max_c N_c · (Π N_c)^4 · (2D)^{2δ}))` with
/// `δ = Σ (N_c − 1)`.
pub fn k_max_bound(dims: &[usize]) -> BigUint {
    let d = dims.len();
    let max_dim = dims.iter().copied().max().unwrap_or(1);
    let product: BigUint = dims.iter().fold(BigUint::one(), |acc, &n| acc * n);
    let delta: usize = dims.iter().map(|&n| n - 1).sum();
    let val = BigUint::from(3usize)
        * max_dim
        * product.pow(4)
        * BigUint::from(2 * d).pow(2 * delta as u32);
    let eight = BigUint::from(8usize);
    let (q, r) = num_integer::Integer::div_rem(&val, &eight);
    let bound = if r == BigUint::from(0usize) { q } else { q + 1usize };
    bound.max(BigUint::from(2usize))
}
