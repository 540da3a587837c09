//! Reference-state algebra: weighted partitions of fine-grained subsystems,
//! canonical weight functions labeling LU-classes, exact symbolic
//! evaluation of invariants, reconstruction of the weight function from a
//! handful of evaluations, LO and (sufficient) LOCC order decisions,
//! coarse-graining and separability structure.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Signed, Zero};

use crate::degrees::{binomial, compatibility_search, Exactness, SearchBudget};
use crate::error::{Error, Result};
use crate::families::{generate, FamilySpec};
use crate::graph::{ColorSet, ColoredGraph};

pub type Rational = Ratio<i64>;

// ---------------------------------------------------------------------------
// Weight functions
// ---------------------------------------------------------------------------

/// The canonical label of a reference-state LU-class: a map from color
/// subsets of size >= 2 to positive integers. Absent entries are 1 and only
/// weights >= 2 are stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightFunction {
    d: usize,
    weights: BTreeMap<ColorSet, BigUint>,
}

impl WeightFunction {
    pub fn ones(d: usize) -> Self {
        WeightFunction {
            d,
            weights: BTreeMap::new(),
        }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn set(&mut self, b: ColorSet, weight: BigUint) -> Result<()> {
        b.validate(self.d)?;
        if b.len() < 2 {
            return Err(Error::InvalidWeights(format!(
                "weight keys need at least two colors, got {{{b}}}"
            )));
        }
        if weight.is_zero() {
            return Err(Error::InvalidWeights("weights must be >= 1".into()));
        }
        if weight.is_one() {
            self.weights.remove(&b);
        } else {
            self.weights.insert(b, weight);
        }
        Ok(())
    }

    pub fn from_entries(d: usize, entries: &[(ColorSet, u64)]) -> Result<Self> {
        let mut wf = WeightFunction::ones(d);
        for (b, w) in entries {
            let current = wf.get(b);
            wf.set(b.clone(), current * BigUint::from(*w))?;
        }
        Ok(wf)
    }

    pub fn get(&self, b: &ColorSet) -> BigUint {
        self.weights.get(b).cloned().unwrap_or_else(BigUint::one)
    }

    /// Stored entries, all with weight >= 2.
    pub fn entries(&self) -> impl Iterator<Item = (&ColorSet, &BigUint)> {
        self.weights.iter()
    }

    pub fn is_separable(&self) -> bool {
        self.weights.is_empty()
    }

    /// Pointwise product (tensoring the states).
    pub fn product(&self, other: &WeightFunction) -> Result<WeightFunction> {
        if self.d != other.d {
            return Err(Error::GraphArityMismatch {
                left: self.d,
                right: other.d,
            });
        }
        let mut out = self.clone();
        for (b, w) in other.entries() {
            let current = out.get(b);
            out.set(b.clone(), current * w)?;
        }
        Ok(out)
    }
}

// ---------------------------------------------------------------------------
// Weighted partitions and multiset canonicalization
// ---------------------------------------------------------------------------

/// A fine-grained subsystem: copy `index` of the color-`color` party
/// (both 1-indexed).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Slot {
    pub color: usize,
    pub index: usize,
}

/// One GHZ building block of a fine-grained reference state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightedBlock {
    pub members: BTreeSet<Slot>,
    pub weight: BigUint,
}

/// A partition of the fine-grained subsystem set with a dimension per block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightedPartition {
    pub d: usize,
    pub blocks: Vec<WeightedBlock>,
}

impl WeightedPartition {
    pub fn new(d: usize, blocks: Vec<WeightedBlock>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for block in &blocks {
            if block.members.is_empty() {
                return Err(Error::InvalidWeights("empty partition block".into()));
            }
            if block.weight.is_zero() {
                return Err(Error::InvalidWeights("block weights must be >= 1".into()));
            }
            for slot in &block.members {
                if slot.color == 0 || slot.color > d {
                    return Err(Error::ColorOutOfRange {
                        color: slot.color,
                        d,
                    });
                }
                if !seen.insert(*slot) {
                    return Err(Error::InvalidWeights(format!(
                        "slot ({}, {}) appears in two blocks",
                        slot.color, slot.index
                    )));
                }
            }
        }
        Ok(WeightedPartition { d, blocks })
    }

    /// The multiset of weighted color-multisets induced by forgetting copy
    /// indices; kept as (support, weight) pairs with multiplicity.
    pub fn color_multisets(&self) -> Vec<(ColorSet, BigUint)> {
        self.blocks
            .iter()
            .map(|b| {
                let colors: Vec<usize> = b.members.iter().map(|s| s.color).collect();
                (ColorSet::from_slice(&colors), b.weight.clone())
            })
            .collect()
    }

    pub fn canonical_weights(&self) -> WeightFunction {
        canonicalize_multiset(self.d, &self.color_multisets())
    }
}

/// Applies the four reduction rules to a fixed point: drop singleton
/// supports, drop weight-one blocks, replace multisets by their supports
/// (done on entry by `ColorSet`), and merge equal supports multiplicatively.
pub fn canonicalize_multiset(d: usize, blocks: &[(ColorSet, BigUint)]) -> WeightFunction {
    let mut wf = WeightFunction::ones(d);
    for (support, weight) in blocks {
        if support.len() < 2 || weight.is_one() {
            continue;
        }
        let current = wf.get(support);
        wf.set(support.clone(), current * weight)
            .expect("validated support");
    }
    wf
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

/// Exact evaluation of `Tr_G` on a reference state, kept in the factored
/// form `prod_B alpha(B)^{kappa(G|_B) − k}` with the rational value
/// materialized on demand.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactoredValue {
    pub exponents: BTreeMap<ColorSet, i64>,
    pub value: BigRational,
}

/// `Tr_G(psi_alpha) = prod alpha(B)^{kappa(G|_B) − k(G)}`; factorizes over
/// components and is 1 on trivial graphs.
pub fn evaluate_on_reference(g: &ColoredGraph, alpha: &WeightFunction) -> Result<FactoredValue> {
    if g.d() != alpha.d() {
        return Err(Error::GraphArityMismatch {
            left: g.d(),
            right: alpha.d(),
        });
    }
    let k = g.k() as i64;
    let mut exponents = BTreeMap::new();
    let mut value = BigRational::one();
    for (b, w) in alpha.entries() {
        let kappa_b = g.kappa_restrict(b)? as i64;
        let exp = kappa_b - k;
        exponents.insert(b.clone(), exp);
        debug_assert!(exp <= 0);
        let power = BigRational::from_integer(BigInt::from(w.clone())).pow((-exp) as i32);
        value /= power;
    }
    Ok(FactoredValue { exponents, value })
}

/// `s_G` for a uniform-weight reference state: `(1/I) sum_B [kappa(G|_B) − k]`
/// over block supports with multiplicity.
pub fn scaling_on_uniform_state(
    g: &ColoredGraph,
    supports: &[ColorSet],
    fine_graining: usize,
) -> Result<Rational> {
    if fine_graining == 0 {
        return Err(Error::InvalidWeights("fine graining must be >= 1".into()));
    }
    let k = g.k() as i64;
    let mut total = 0i64;
    for b in supports {
        if b.is_empty() {
            continue;
        }
        if b.len() == 1 {
            continue; // separable factor, contributes zero
        }
        total += g.kappa_restrict(b)? as i64 - k;
    }
    Ok(Rational::new(total, fine_graining as i64))
}

// ---------------------------------------------------------------------------
// LU classification and reconstruction
// ---------------------------------------------------------------------------

/// LU-equivalence of reference states is exactly equality of canonical
/// weight functions.
pub fn lu_equal(alpha: &WeightFunction, beta: &WeightFunction) -> bool {
    alpha == beta
}

/// The graph family whose evaluations pin down the weight function: the
/// multi-entropy graphs for `n = 2..=D` and the reflected multi-entropy
/// graphs `RME_{2, n_B}` over every traced complement.
pub fn classification_family(d: usize) -> Result<Vec<(String, ColoredGraph)>> {
    if d < 3 {
        return Err(Error::TooFewColors { d, needed: 3 });
    }
    let mut out = Vec::new();
    for n in 2..=d {
        out.push((
            format!("ME n={n} D={d}"),
            generate(&FamilySpec::Me { d, n })?,
        ));
    }
    for b in ColorSet::subsets(d, 2) {
        if b.len() < 2 || b.len() > d - 1 {
            continue;
        }
        let traced = b.complement(d);
        for n in 1..=b.len() {
            out.push((
                format!("RME m=2 n={n} D={d} traced={traced}"),
                generate(&FamilySpec::Rme {
                    d,
                    m: 2,
                    n,
                    traced: traced.clone(),
                })?,
            ));
        }
    }
    Ok(out)
}

/// Recovers the weight function of an unknown reference state from exact
/// evaluations on the classification family.
///
/// For D = 3 the closed-form inversion is used; for larger D the linear
/// system in the log-exponents is solved exactly prime by prime.
pub fn reconstruct_alpha<F>(d: usize, oracle: F) -> Result<WeightFunction>
where
    F: Fn(&ColoredGraph) -> Result<BigRational>,
{
    if d == 3 {
        reconstruct_alpha_d3(&oracle)
    } else {
        reconstruct_alpha_general(d, &oracle)
    }
}

/// Evaluations on reference states are reciprocals of positive integers;
/// extracts that integer.
fn as_inverse_integer(value: &BigRational) -> Result<BigUint> {
    if value.is_zero() || value.is_negative() || !value.numer().is_one() {
        return Err(Error::NotAReferenceState);
    }
    Ok(value.denom().to_biguint().expect("positive"))
}

fn reconstruct_alpha_d3<F>(oracle: &F) -> Result<WeightFunction>
where
    F: Fn(&ColoredGraph) -> Result<BigRational>,
{
    let me2 = generate(&FamilySpec::Me { d: 3, n: 2 })?;
    let me3 = generate(&FamilySpec::Me { d: 3, n: 3 })?;
    let t_me2 = as_inverse_integer(&oracle(&me2)?)?;
    let t_me3 = as_inverse_integer(&oracle(&me3)?)?;
    let mut wf = WeightFunction::ones(3);
    // alpha({1,2,3}) = Tr_{ME_3} / Tr_{ME_2}^3 read on the denominators.
    let num = t_me2.pow(3);
    let (q, r) = num.div_rem(&t_me3);
    if !r.is_zero() {
        return Err(Error::NotAReferenceState);
    }
    let alpha_full = q;
    wf.set(ColorSet::from_slice(&[1, 2, 3]), alpha_full)?;
    // alpha({i,j})^2 = Tr_{ME_2}^3 Tr_{RME_{2,1}^{(k)}}^2 / (Tr_{ME_3} Tr_{RME_{2,2}^{(k)}}).
    for c in 1..=3usize {
        let pair: Vec<usize> = (1..=3).filter(|&x| x != c).collect();
        let traced = ColorSet::from_slice(&[c]);
        let rme21 = generate(&FamilySpec::Rme {
            d: 3,
            m: 2,
            n: 1,
            traced: traced.clone(),
        })?;
        let rme22 = generate(&FamilySpec::Rme {
            d: 3,
            m: 2,
            n: 2,
            traced,
        })?;
        let t21 = as_inverse_integer(&oracle(&rme21)?)?;
        let t22 = as_inverse_integer(&oracle(&rme22)?)?;
        // In denominator space the signs invert: alpha^2 = t_me3 * t22 / (t_me2^3 * t21^2).
        let num = &t_me3 * &t22;
        let den = t_me2.pow(3) * t21.pow(2);
        let (sq, r) = num.div_rem(&den);
        if !r.is_zero() {
            return Err(Error::NotAReferenceState);
        }
        let root = sq.sqrt();
        if &root * &root != sq {
            return Err(Error::NotAReferenceState);
        }
        wf.set(ColorSet::from_slice(&pair), root)?;
    }
    Ok(wf)
}

fn reconstruct_alpha_general<F>(d: usize, oracle: &F) -> Result<WeightFunction>
where
    F: Fn(&ColoredGraph) -> Result<BigRational>,
{
    let family = classification_family(d)?;
    let unknowns: Vec<ColorSet> = ColorSet::subsets(d, 2);
    // Coefficient matrix: rows are graphs, column j multiplies v_p(alpha(C_j));
    // the row equation is sum_j (k − kappa_{C_j}) x_j = v_p(denominator).
    let mut rows: Vec<Vec<BigRational>> = Vec::new();
    let mut denominators: Vec<BigUint> = Vec::new();
    for (_, g) in &family {
        let k = g.k() as i64;
        let row: Vec<BigRational> = unknowns
            .iter()
            .map(|c| {
                let kappa_c = g.kappa_restrict(c).expect("valid subset") as i64;
                BigRational::from_integer(BigInt::from(k - kappa_c))
            })
            .collect();
        rows.push(row);
        denominators.push(as_inverse_integer(&oracle(g)?)?);
    }
    // Primes appearing in any denominator.
    let mut primes = BTreeSet::new();
    for den in &denominators {
        for (p, _) in factorize(den) {
            primes.insert(p);
        }
    }
    let mut wf = WeightFunction::ones(d);
    for p in primes {
        let rhs: Vec<BigRational> = denominators
            .iter()
            .map(|den| BigRational::from_integer(BigInt::from(valuation(den, &p))))
            .collect();
        let solution = solve_exact(&rows, &rhs)?;
        for (j, x) in solution.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            if !x.is_integer() || x.is_negative() {
                return Err(Error::NotAReferenceState);
            }
            let e = x.to_integer().to_biguint().expect("nonnegative");
            let e: u32 = e
                .try_into()
                .map_err(|_| Error::NotAReferenceState)?;
            let current = wf.get(&unknowns[j]);
            wf.set(unknowns[j].clone(), current * p.pow(e))?;
        }
    }
    // Consistency: the reconstructed function must reproduce every oracle
    // value, otherwise the system was over-determined and inconsistent.
    for ((_, g), den) in family.iter().zip(&denominators) {
        let eval = evaluate_on_reference(g, &wf)?;
        if as_inverse_integer(&eval.value)? != *den {
            return Err(Error::NotAReferenceState);
        }
    }
    Ok(wf)
}

fn factorize(n: &BigUint) -> Vec<(BigUint, u32)> {
    let mut out = Vec::new();
    let mut n = n.clone();
    let mut p = BigUint::from(2usize);
    while &p * &p <= n {
        let mut e = 0u32;
        loop {
            let (q, r) = n.div_rem(&p);
            if r.is_zero() {
                n = q;
                e += 1;
            } else {
                break;
            }
        }
        if e > 0 {
            out.push((p.clone(), e));
        }
        p += 1usize;
    }
    if n > BigUint::one() {
        out.push((n, 1));
    }
    out
}

fn valuation(n: &BigUint, p: &BigUint) -> u32 {
    let mut n = n.clone();
    let mut v = 0;
    loop {
        let (q, r) = n.div_rem(p);
        if r.is_zero() {
            n = q;
            v += 1;
        } else {
            return v;
        }
    }
}

/// Least-squares-free exact solve of an overdetermined consistent system by
/// Gaussian elimination; errors when inconsistent.
fn solve_exact(rows: &[Vec<BigRational>], rhs: &[BigRational]) -> Result<Vec<BigRational>> {
    let m = rows.len();
    let n = rows.first().map_or(0, |r| r.len());
    let mut a: Vec<Vec<BigRational>> = rows
        .iter()
        .zip(rhs)
        .map(|(row, b)| {
            let mut r = row.clone();
            r.push(b.clone());
            r
        })
        .collect();
    let mut pivot_cols = Vec::new();
    let mut row = 0;
    for col in 0..n {
        let pivot = (row..m).find(|&r| !a[r][col].is_zero());
        let Some(p) = pivot else { continue };
        a.swap(row, p);
        let inv = a[row][col].clone();
        for x in a[row].iter_mut() {
            *x /= inv.clone();
        }
        for r in 0..m {
            if r != row && !a[r][col].is_zero() {
                let factor = a[r][col].clone();
                for c in col..=n {
                    let delta = &factor * &a[row][c];
                    a[r][c] -= delta;
                }
            }
        }
        pivot_cols.push(col);
        row += 1;
        if row == m {
            break;
        }
    }
    // Inconsistency check.
    for r in row..m {
        if a[r][..n].iter().all(|x| x.is_zero()) && !a[r][n].is_zero() {
            return Err(Error::NotAReferenceState);
        }
    }
    if pivot_cols.len() < n {
        return Err(Error::NotAReferenceState);
    }
    let mut solution = vec![BigRational::zero(); n];
    for (i, &col) in pivot_cols.iter().enumerate() {
        solution[col] = a[i][n].clone();
    }
    Ok(solution)
}

// ---------------------------------------------------------------------------
// LO order
// ---------------------------------------------------------------------------

/// `psi_beta -> psi_alpha` by local operations iff `alpha(B) | beta(B)` for
/// every subset.
pub fn lo_less_equal(beta: &WeightFunction, alpha: &WeightFunction) -> Result<bool> {
    if beta.d() != alpha.d() {
        return Err(Error::GraphArityMismatch {
            left: beta.d(),
            right: alpha.d(),
        });
    }
    for b in ColorSet::subsets(beta.d(), 2) {
        let (wb, wa) = (beta.get(&b), alpha.get(&b));
        if !wb.div_rem(&wa).1.is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

// ---------------------------------------------------------------------------
// LOCC relations
// ---------------------------------------------------------------------------

/// `alpha <= beta` pointwise implies an LOCC transformation `beta -> alpha`
/// by repeated local measurement.
pub fn locc_pointwise_le(beta: &WeightFunction, alpha: &WeightFunction) -> Result<bool> {
    if beta.d() != alpha.d() {
        return Err(Error::GraphArityMismatch {
            left: beta.d(),
            right: alpha.d(),
        });
    }
    for b in ColorSet::subsets(beta.d(), 2) {
        if alpha.get(&b) > beta.get(&b) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A positive-integer flow on the Hasse diagram of subsets, stored on the
/// edges with flow > 1.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Flow {
    pub edges: BTreeMap<(ColorSet, ColorSet), BigUint>,
}

/// Downward Hasse edges `(B, C)` with `C ⊂ B`, `|C| = |B| − 1 >= 2`.
fn hasse_edges(d: usize) -> Vec<(ColorSet, ColorSet)> {
    let mut out = Vec::new();
    for b in ColorSet::subsets(d, 3) {
        for drop in b.iter() {
            let c = ColorSet::from_slice(&b.iter().filter(|&x| x != drop).collect::<Vec<_>>());
            if c.len() >= 2 {
                out.push((b.clone(), c));
            }
        }
    }
    out
}

/// Decides `alpha <= beta` in the flow order, returning a witness flow.
///
/// The multiplicative balance condition is reduced prime by prime to an
/// additive transshipment problem on the Hasse diagram, solved exactly by
/// max-flow.
pub fn locc_flow_order(beta: &WeightFunction, alpha: &WeightFunction) -> Result<Option<Flow>> {
    if beta.d() != alpha.d() {
        return Err(Error::GraphArityMismatch {
            left: beta.d(),
            right: alpha.d(),
        });
    }
    let d = beta.d();
    // Fast necessary filter: flows preserve the total weight product.
    let prod = |wf: &WeightFunction| -> BigUint {
        wf.entries().fold(BigUint::one(), |acc, (_, w)| acc * w)
    };
    if prod(beta) != prod(alpha) {
        return Ok(None);
    }
    let nodes: Vec<ColorSet> = ColorSet::subsets(d, 2);
    let node_index: BTreeMap<ColorSet, usize> = nodes
        .iter()
        .cloned()
        .enumerate()
        .map(|(i, b)| (b, i))
        .collect();
    let edges = hasse_edges(d);
    let mut primes = BTreeSet::new();
    for b in &nodes {
        for (p, _) in factorize(&beta.get(b)) {
            primes.insert(p);
        }
        for (p, _) in factorize(&alpha.get(b)) {
            primes.insert(p);
        }
    }
    let mut flow = Flow::default();
    for p in primes {
        // Node divergence requirement: out − in = v_p(beta) − v_p(alpha).
        let excess: Vec<i64> = nodes
            .iter()
            .map(|b| valuation(&beta.get(b), &p) as i64 - valuation(&alpha.get(b), &p) as i64)
            .collect();
        if excess.iter().sum::<i64>() != 0 {
            return Ok(None);
        }
        match feasible_flow(nodes.len(), &edges, &node_index, &excess) {
            Some(unit_flows) => {
                for (e, f) in edges.iter().zip(unit_flows) {
                    if f > 0 {
                        let entry = flow
                            .edges
                            .entry(e.clone())
                            .or_insert_with(BigUint::one);
                        *entry *= p.pow(f as u32);
                    }
                }
            }
            None => return Ok(None),
        }
    }
    Ok(Some(flow))
}

/// Integer transshipment feasibility on a DAG via max-flow with a
/// super-source and super-sink.
fn feasible_flow(
    n: usize,
    edges: &[(ColorSet, ColorSet)],
    node_index: &BTreeMap<ColorSet, usize>,
    excess: &[i64],
) -> Option<Vec<i64>> {
    // Node ids: 0..n the subsets, n source, n+1 sink.
    let source = n;
    let sink = n + 1;
    let mut graph: Vec<Vec<usize>> = vec![Vec::new(); n + 2];
    // Arcs: (to, capacity, flow); reverse arcs paired by xor 1.
    let mut arcs: Vec<(usize, i64, i64)> = Vec::new();
    let add_arc = |graph: &mut Vec<Vec<usize>>, arcs: &mut Vec<(usize, i64, i64)>, u: usize, v: usize, cap: i64| -> usize {
        let id = arcs.len();
        arcs.push((v, cap, 0));
        arcs.push((u, 0, 0));
        graph[u].push(id);
        graph[v].push(id + 1);
        id
    };
    let inf = i64::MAX / 4;
    let edge_arc_ids: Vec<usize> = edges
        .iter()
        .map(|(b, c)| add_arc(&mut graph, &mut arcs, node_index[b], node_index[c], inf))
        .collect();
    let mut total_supply = 0;
    for (i, &e) in excess.iter().enumerate() {
        if e > 0 {
            add_arc(&mut graph, &mut arcs, source, i, e);
            total_supply += e;
        } else if e < 0 {
            add_arc(&mut graph, &mut arcs, i, sink, -e);
        }
    }
    // BFS augmenting paths (Edmonds-Karp); the graph is tiny.
    let mut flow_total = 0;
    loop {
        let mut parent_arc = vec![usize::MAX; n + 2];
        let mut visited = vec![false; n + 2];
        let mut queue = VecDeque::new();
        visited[source] = true;
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            for &id in &graph[u] {
                let (v, cap, f) = arcs[id];
                if !visited[v] && cap - f > 0 {
                    visited[v] = true;
                    parent_arc[v] = id;
                    queue.push_back(v);
                }
            }
        }
        if !visited[sink] {
            break;
        }
        // Find bottleneck.
        let mut bottleneck = inf;
        let mut v = sink;
        while v != source {
            let id = parent_arc[v];
            let (_, cap, f) = arcs[id];
            bottleneck = bottleneck.min(cap - f);
            v = arcs[id ^ 1].0;
        }
        let mut v = sink;
        while v != source {
            let id = parent_arc[v];
            arcs[id].2 += bottleneck;
            arcs[id ^ 1].2 -= bottleneck;
            v = arcs[id ^ 1].0;
        }
        flow_total += bottleneck;
    }
    if flow_total != total_supply {
        return None;
    }
    Some(edge_arc_ids.iter().map(|&id| arcs[id].2).collect())
}

/// One quantum-teleportation move applied in the `beta -> alpha` direction:
/// `beta(B1) = N alpha(B1)`, `beta(B2) = N alpha(B2)`,
/// `beta(B1 ∪ B2) = alpha(B1 ∪ B2) / N`.
pub fn teleportation_move(
    beta: &WeightFunction,
    b1: &ColorSet,
    b2: &ColorSet,
    n: &BigUint,
) -> Result<WeightFunction> {
    let d = beta.d();
    b1.validate(d)?;
    b2.validate(d)?;
    if b1.len() < 2 || b2.len() < 2 {
        return Err(Error::InvalidWeights(
            "teleportation blocks need at least two colors".into(),
        ));
    }
    if b1.intersection(b2).is_empty() {
        return Err(Error::InvalidWeights(
            "teleportation blocks must overlap".into(),
        ));
    }
    if b1.is_subset(b2) || b2.is_subset(b1) {
        return Err(Error::InvalidWeights(
            "teleportation blocks must not be nested".into(),
        ));
    }
    if n.is_zero() {
        return Err(Error::InvalidWeights("N must be >= 1".into()));
    }
    let union = b1.union(b2);
    let mut alpha = beta.clone();
    for b in [b1, b2] {
        let w = beta.get(b);
        let (q, r) = w.div_rem(n);
        if !r.is_zero() {
            return Err(Error::InvalidWeights(format!(
                "N does not divide beta({b})"
            )));
        }
        alpha.set(b.clone(), q)?;
    }
    alpha.set(union.clone(), beta.get(&union) * n)?;
    Ok(alpha)
}

/// Outcome of the budgeted sufficient LOCC search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LoccVerdict {
    Established(String),
    NotEstablished,
}

/// Closes `beta` under pointwise reductions, flow moves and teleportation
/// moves up to `budget` visited states and tests whether `alpha` becomes
/// reachable. Sufficient only: a `NotEstablished` answer decides nothing.
pub fn locc_reachable_sufficient(
    beta: &WeightFunction,
    alpha: &WeightFunction,
    budget: usize,
) -> Result<LoccVerdict> {
    if beta.d() != alpha.d() {
        return Err(Error::GraphArityMismatch {
            left: beta.d(),
            right: alpha.d(),
        });
    }
    let d = beta.d();
    let mut seen = BTreeSet::new();
    let mut queue = VecDeque::new();
    let key = |wf: &WeightFunction| -> Vec<(ColorSet, BigUint)> {
        wf.entries().map(|(b, w)| (b.clone(), w.clone())).collect()
    };
    queue.push_back((beta.clone(), "start".to_string()));
    seen.insert(key(beta));
    let mut visited = 0usize;
    while let Some((state, path)) = queue.pop_front() {
        visited += 1;
        if visited > budget {
            return Ok(LoccVerdict::NotEstablished);
        }
        if locc_pointwise_le(&state, alpha)? {
            return Ok(LoccVerdict::Established(format!(
                "{path} -> pointwise measurement reduction"
            )));
        }
        if locc_flow_order(&state, alpha)?.is_some() {
            return Ok(LoccVerdict::Established(format!(
                "{path} -> flow of measurement reductions"
            )));
        }
        // Successors: prime teleportation moves and prime divisor drops.
        let subsets = ColorSet::subsets(d, 2);
        for b1 in &subsets {
            for b2 in &subsets {
                if b1 >= b2
                    || b1.intersection(b2).is_empty()
                    || b1.is_subset(b2)
                    || b2.is_subset(b1)
                {
                    continue;
                }
                let g = state.get(b1).gcd(&state.get(b2));
                for (p, _) in factorize(&g) {
                    if let Ok(next) = teleportation_move(&state, b1, b2, &p) {
                        if seen.insert(key(&next)) {
                            queue.push_back((
                                next,
                                format!("{path} -> teleport({b1};{b2};{p})"),
                            ));
                        }
                    }
                }
            }
        }
        for b in &subsets {
            let w = state.get(b);
            for (p, _) in factorize(&w) {
                let mut next = state.clone();
                next.set(b.clone(), &w / &p)?;
                if seen.insert(key(&next)) {
                    queue.push_back((next, format!("{path} -> reduce({b};{p})")));
                }
            }
        }
    }
    Ok(LoccVerdict::NotEstablished)
}

// ---------------------------------------------------------------------------
// Coarse-graining of weight functions
// ---------------------------------------------------------------------------

/// Coarse-grained weight function along a partition `zeta` of the colors:
/// the new weight of a block set `B'` multiplies every old weight whose
/// block trace is exactly `B'`.
pub fn coarse_grain_alpha(alpha: &WeightFunction, zeta: &[ColorSet]) -> Result<WeightFunction> {
    let d = alpha.d();
    let mut seen = vec![false; d];
    for block in zeta {
        block.validate(d)?;
        for c in block.iter() {
            if seen[c - 1] {
                return Err(Error::InvalidWeights(format!(
                    "color {c} appears in two blocks"
                )));
            }
            seen[c - 1] = true;
        }
    }
    if seen.iter().any(|s| !s) {
        return Err(Error::BlockCountMismatch {
            blocks: zeta.len(),
            expected: d,
        });
    }
    let d_prime = zeta.len();
    let mut out = WeightFunction::ones(d_prime);
    for (b, w) in alpha.entries() {
        let trace: Vec<usize> = zeta
            .iter()
            .enumerate()
            .filter(|(_, block)| !block.intersection(b).is_empty())
            .map(|(i, _)| i + 1)
            .collect();
        if trace.len() >= 2 {
            let key = ColorSet::from_slice(&trace);
            let current = out.get(&key);
            out.set(key, current * w)?;
        }
    }
    Ok(out)
}

/// Product of the weights crossing the bipartition `{A, complement}`.
pub fn bipartition_coefficient(alpha: &WeightFunction, a: &ColorSet) -> Result<BigUint> {
    a.validate(alpha.d())?;
    let complement = a.complement(alpha.d());
    let mut coeff = BigUint::one();
    for (b, w) in alpha.entries() {
        if !b.intersection(a).is_empty() && !b.intersection(&complement).is_empty() {
            coeff *= w;
        }
    }
    Ok(coeff)
}

/// Set partitions of `{1..=d}` with exactly `parts` blocks.
pub fn partitions_with_blocks(d: usize, parts: usize) -> Vec<Vec<ColorSet>> {
    let mut out = Vec::new();
    let mut assignment = vec![0usize; d];
    fn recurse(
        i: usize,
        used: usize,
        d: usize,
        parts: usize,
        assignment: &mut Vec<usize>,
        out: &mut Vec<Vec<ColorSet>>,
    ) {
        if i == d {
            if used == parts {
                let mut blocks: Vec<Vec<usize>> = vec![Vec::new(); used];
                for (color, &b) in assignment.iter().enumerate() {
                    blocks[b].push(color + 1);
                }
                out.push(blocks.iter().map(|b| ColorSet::from_slice(b)).collect());
            }
            return;
        }
        for b in 0..=used.min(parts - 1) {
            assignment[i] = b;
            let next_used = used.max(b + 1);
            recurse(i + 1, next_used, d, parts, assignment, out);
        }
    }
    recurse(0, 0, d, parts, &mut assignment, &mut out);
    out
}

/// Equality of all coarse-grainings of length `d_prime` (Thm.-3.3 exactness
/// at the coarse level).
pub fn d_prime_equivalent(
    alpha: &WeightFunction,
    beta: &WeightFunction,
    d_prime: usize,
) -> Result<bool> {
    let d = alpha.d();
    if beta.d() != d {
        return Err(Error::GraphArityMismatch {
            left: d,
            right: beta.d(),
        });
    }
    if d_prime < 2 || d_prime >= d {
        return Err(Error::InvalidWeights(format!(
            "need 2 <= D' < D, got D' = {d_prime}"
        )));
    }
    for zeta in partitions_with_blocks(d, d_prime) {
        if coarse_grain_alpha(alpha, &zeta)? != coarse_grain_alpha(beta, &zeta)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Separability structure of a reference state: the finest factorizing
/// partition, the entanglement depth, and the maximal separability rank.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeparabilityStructure {
    pub xi: Vec<ColorSet>,
    pub depth: usize,
    pub max_r: usize,
}

pub fn separability_structure(alpha: &WeightFunction) -> SeparabilityStructure {
    let d = alpha.d();
    let mut parent: Vec<usize> = (0..d).collect();
    fn find(parent: &mut Vec<usize>, mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (b, _) in alpha.entries() {
        let colors: Vec<usize> = b.iter().collect();
        for w in colors.windows(2) {
            let (a, b) = (find(&mut parent, w[0] - 1), find(&mut parent, w[1] - 1));
            if a != b {
                parent[a] = b;
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for c in 0..d {
        let root = find(&mut parent, c);
        groups.entry(root).or_default().push(c + 1);
    }
    let xi: Vec<ColorSet> = groups.values().map(|g| ColorSet::from_slice(g)).collect();
    let depth = xi.iter().map(|b| b.len()).max().unwrap_or(0);
    let max_r = xi.len();
    SeparabilityStructure { xi, depth, max_r }
}

// ---------------------------------------------------------------------------
// Named states and scaling comparisons
// ---------------------------------------------------------------------------

/// The catalog of reference states used for scaling comparisons, each with
/// its fine-graining convention built in.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NamedState {
    /// GHZ on all parties.
    Ghz,
    /// GHZ on the subset `b`, separable on the rest.
    GhzRestricted { b: ColorSet },
    /// GHZ of dimension `N^{1/i}`.
    GhzFraction { i: usize },
    /// Bell pairs along a cyclic permutation of the colors (as a cycle
    /// listing each color once).
    Cyclic { tau: Vec<usize> },
    /// GHZ on every p-subset of the colors.
    PComplete { p: usize },
    /// Bell pairs from color `c` to every other color.
    CStar { c: usize },
    /// Product of c-star states of reduced dimension over `b`.
    StarSet { b: ColorSet },
    /// Haar-random state of matching local dimension.
    Haar,
}

impl NamedState {
    /// Fine-graining denominator of the state's scaling convention.
    pub fn fine_graining(&self, d: usize) -> usize {
        match self {
            NamedState::Ghz => 1,
            NamedState::GhzRestricted { .. } => 1,
            NamedState::GhzFraction { i } => *i,
            NamedState::Cyclic { .. } => 2,
            NamedState::PComplete { p } => binomial(d - 1, p - 1) as usize,
            NamedState::CStar { .. } => d - 1,
            NamedState::StarSet { b } => b.len() * (d - 1),
            NamedState::Haar => 1,
        }
    }

    /// The block supports of the uniform reference state, with multiplicity.
    pub fn supports(&self, d: usize) -> Result<Vec<ColorSet>> {
        match self {
            NamedState::Ghz | NamedState::GhzFraction { .. } => Ok(vec![ColorSet::full(d)]),
            NamedState::GhzRestricted { b } => {
                b.validate(d)?;
                Ok(vec![b.clone()])
            }
            NamedState::Cyclic { tau } => {
                if tau.len() != d {
                    return Err(Error::UnknownState(format!(
                        "cyclic state needs a length-{d} cycle"
                    )));
                }
                Ok((0..d)
                    .map(|i| ColorSet::from_slice(&[tau[i], tau[(i + 1) % d]]))
                    .collect())
            }
            NamedState::PComplete { p } => {
                if *p == 0 || *p > d {
                    return Err(Error::UnknownState(format!("p = {p} out of range")));
                }
                Ok(ColorSet::subsets(d, *p)
                    .into_iter()
                    .filter(|b| b.len() == *p)
                    .collect())
            }
            NamedState::CStar { c } => {
                if *c == 0 || *c > d {
                    return Err(Error::ColorOutOfRange { color: *c, d });
                }
                Ok((1..=d)
                    .filter(|&x| x != *c)
                    .map(|x| ColorSet::from_slice(&[*c, x]))
                    .collect())
            }
            NamedState::StarSet { b } => {
                b.validate(d)?;
                let mut out = Vec::new();
                for c in b.iter() {
                    for x in 1..=d {
                        if x != c {
                            out.push(ColorSet::from_slice(&[c, x]));
                        }
                    }
                }
                Ok(out)
            }
            NamedState::Haar => Err(Error::UnknownState(
                "the Haar state has no reference-state supports".into(),
            )),
        }
    }

    /// Weight function at block dimension `n_s` (deterministic states only).
    pub fn to_weight_function(&self, d: usize, n_s: &BigUint) -> Result<WeightFunction> {
        let supports = self.supports(d)?;
        let mut wf = WeightFunction::ones(d);
        for b in supports {
            if b.len() < 2 {
                continue;
            }
            let current = wf.get(&b);
            wf.set(b, current * n_s)?;
        }
        Ok(wf)
    }
}

/// `s_G` of a named state; Haar goes through the compatibility search.
pub fn scaling_of_named(
    g: &ColoredGraph,
    state: &NamedState,
    budget: &SearchBudget,
) -> Result<(Rational, Exactness)> {
    match state {
        NamedState::Haar => {
            let search = compatibility_search(g, budget)?;
            let s = crate::degrees::haar_scaling_from_delta(g, search.delta)?;
            Ok((Rational::from_integer(s), search.exactness))
        }
        _ => {
            let supports = state.supports(g.d())?;
            let s = scaling_on_uniform_state(g, &supports, state.fine_graining(g.d()))?;
            Ok((s, Exactness::Exact))
        }
    }
}

/// `s_G(a) − s_G(b)`, the table entry separating the two states.
pub fn distinguishing_quantity(
    g: &ColoredGraph,
    a: &NamedState,
    b: &NamedState,
    budget: &SearchBudget,
) -> Result<(Rational, Exactness)> {
    let (sa, ea) = scaling_of_named(g, a, budget)?;
    let (sb, eb) = scaling_of_named(g, b, budget)?;
    let exact = if ea == Exactness::Exact && eb == Exactness::Exact {
        Exactness::Exact
    } else {
        Exactness::Bound
    };
    Ok((sa - sb, exact))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::degrees::degree_report;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cs(colors: &[usize]) -> ColorSet {
        ColorSet::from_slice(colors)
    }

    #[test]
    fn multiset_canonicalization_examples() {
        // {{1,1,2}_4, {2}_3} ~ {{1,2}_4}: supports drop the repeat, the
        // singleton block is deleted.
        let wf = canonicalize_multiset(
            2,
            &[
                (cs(&[1, 2]), BigUint::from(4u32)),
                (cs(&[2]), BigUint::from(3u32)),
            ],
        );
        assert_eq!(wf.get(&cs(&[1, 2])), BigUint::from(4u32));
        assert_eq!(wf.entries().count(), 1);

        // The Eq.-(138) partition canonicalizes to {126:2, 56:3, 34:6}.
        let blocks = vec![
            WeightedBlock {
                members: [
                    Slot { color: 1, index: 1 },
                    Slot { color: 2, index: 1 },
                    Slot { color: 6, index: 1 },
                ]
                .into(),
                weight: BigUint::from(2u32),
            },
            WeightedBlock {
                members: [Slot { color: 5, index: 2 }, Slot { color: 6, index: 2 }].into(),
                weight: BigUint::from(3u32),
            },
            WeightedBlock {
                members: [Slot { color: 3, index: 1 }, Slot { color: 4, index: 1 }].into(),
                weight: BigUint::from(3u32),
            },
            WeightedBlock {
                members: [Slot { color: 3, index: 2 }, Slot { color: 4, index: 2 }].into(),
                weight: BigUint::from(2u32),
            },
            WeightedBlock {
                members: [Slot { color: 1, index: 2 }].into(),
                weight: BigUint::from(2u32),
            },
            WeightedBlock {
                members: [Slot { color: 2, index: 2 }].into(),
                weight: BigUint::from(4u32),
            },
            WeightedBlock {
                members: [Slot { color: 5, index: 1 }].into(),
                weight: BigUint::from(5u32),
            },
        ];
        let partition = WeightedPartition::new(6, blocks).unwrap();
        let wf = partition.canonical_weights();
        assert_eq!(wf.get(&cs(&[1, 2, 6])), BigUint::from(2u32));
        assert_eq!(wf.get(&cs(&[5, 6])), BigUint::from(3u32));
        assert_eq!(wf.get(&cs(&[3, 4])), BigUint::from(6u32));
        assert_eq!(wf.entries().count(), 3);

        // {B_2, B_2} -> {B_4}.
        let wf = canonicalize_multiset(
            3,
            &[
                (cs(&[1, 3]), BigUint::from(2u32)),
                (cs(&[1, 3]), BigUint::from(2u32)),
            ],
        );
        assert_eq!(wf.get(&cs(&[1, 3])), BigUint::from(4u32));
    }

    #[test]
    fn evaluation_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        // Connected G on GHZ(N): value N^{1−k}.
        for _ in 0..10 {
            let g = ColoredGraph::random_connected(3, 4, &mut rng);
            let mut alpha = WeightFunction::ones(3);
            alpha.set(cs(&[1, 2, 3]), BigUint::from(5u32)).unwrap();
            let v = evaluate_on_reference(&g, &alpha).unwrap();
            let expect = BigRational::new(BigInt::one(), BigInt::from(5i64.pow(3)));
            assert_eq!(v.value, expect);
        }
        // All-ones alpha: value 1.
        let g = ColoredGraph::random(3, 4, &mut rng);
        let v = evaluate_on_reference(&g, &WeightFunction::ones(3)).unwrap();
        assert!(v.value.is_one());
    }

    #[test]
    fn evaluation_is_multiplicative_in_alpha() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let g = ColoredGraph::random(3, 4, &mut rng);
            let alpha = random_weights(3, &mut rng);
            let beta = random_weights(3, &mut rng);
            let va = evaluate_on_reference(&g, &alpha).unwrap().value;
            let vb = evaluate_on_reference(&g, &beta).unwrap().value;
            let vab = evaluate_on_reference(&g, &alpha.product(&beta).unwrap())
                .unwrap()
                .value;
            assert_eq!(vab, va * vb);
        }
    }

    fn random_weights<R: Rng>(d: usize, rng: &mut R) -> WeightFunction {
        let mut wf = WeightFunction::ones(d);
        for b in ColorSet::subsets(d, 2) {
            let w = rng.gen_range(1u64..=9);
            wf.set(b, BigUint::from(w)).unwrap();
        }
        wf
    }

    #[test]
    fn reconstruction_round_trip_d3() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let alpha = random_weights(3, &mut rng);
            let recon = reconstruct_alpha(3, |g| {
                Ok(evaluate_on_reference(g, &alpha)?.value)
            })
            .unwrap();
            assert_eq!(recon, alpha);
        }
        // All-ones round trip.
        let ones = WeightFunction::ones(3);
        let recon =
            reconstruct_alpha(3, |g| Ok(evaluate_on_reference(g, &ones)?.value)).unwrap();
        assert_eq!(recon, ones);
    }

    #[test]
    fn reconstruction_round_trip_d4() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let alpha = random_weights(4, &mut rng);
        let recon = reconstruct_alpha(4, |g| {
            Ok(evaluate_on_reference(g, &alpha)?.value)
        })
        .unwrap();
        assert_eq!(recon, alpha);
    }

    #[test]
    fn inconsistent_oracle_is_rejected() {
        let err = reconstruct_alpha(3, |g| {
            // A value that is not a reciprocal integer.
            Ok(BigRational::new(BigInt::from(3), BigInt::from(2)) * BigRational::from_integer(BigInt::from(g.k() as i64)))
        })
        .unwrap_err();
        assert_eq!(err, Error::NotAReferenceState);
    }

    #[test]
    fn lo_divisibility() {
        let mut beta = WeightFunction::ones(3);
        beta.set(cs(&[1, 2]), BigUint::from(6u32)).unwrap();
        let mut alpha = WeightFunction::ones(3);
        alpha.set(cs(&[1, 2]), BigUint::from(2u32)).unwrap();
        assert!(lo_less_equal(&beta, &alpha).unwrap());
        assert!(!lo_less_equal(&alpha, &beta).unwrap());
        assert!(lo_less_equal(&alpha, &alpha).unwrap());
    }

    #[test]
    fn lo_and_lu_agree_on_mutual_divisibility() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..20 {
            let a = random_weights(3, &mut rng);
            let b = random_weights(3, &mut rng);
            let both = lo_less_equal(&a, &b).unwrap() && lo_less_equal(&b, &a).unwrap();
            assert_eq!(both, lu_equal(&a, &b));
        }
    }

    #[test]
    fn flow_order_example_5_12() {
        let mut beta = WeightFunction::ones(3);
        beta.set(cs(&[1, 2, 3]), BigUint::from(6u32)).unwrap();
        beta.set(cs(&[1, 2]), BigUint::from(2u32)).unwrap();
        let mut alpha = WeightFunction::ones(3);
        alpha.set(cs(&[1, 2, 3]), BigUint::from(2u32)).unwrap();
        alpha.set(cs(&[1, 2]), BigUint::from(6u32)).unwrap();
        let flow = locc_flow_order(&beta, &alpha).unwrap().expect("flow exists");
        assert_eq!(
            flow.edges.get(&(cs(&[1, 2, 3]), cs(&[1, 2]))),
            Some(&BigUint::from(3u32))
        );
        assert!(!locc_pointwise_le(&beta, &alpha).unwrap());
        assert!(!locc_pointwise_le(&alpha, &beta).unwrap());
        // Flow order is directional here.
        assert!(locc_flow_order(&alpha, &beta).unwrap().is_none());
    }

    #[test]
    fn flow_order_is_antisymmetric_on_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..30 {
            let a = random_weights(3, &mut rng);
            let b = random_weights(3, &mut rng);
            let ab = locc_flow_order(&a, &b).unwrap().is_some();
            let ba = locc_flow_order(&b, &a).unwrap().is_some();
            if ab && ba {
                assert_eq!(a, b);
            }
        }
        // Reflexive with the trivial flow.
        let a = random_weights(3, &mut rng);
        assert!(locc_flow_order(&a, &a).unwrap().is_some());
    }

    #[test]
    fn flow_monotonicity_of_invariants() {
        // When a flow exists, |Tr_G| may only grow towards the target.
        let mut beta = WeightFunction::ones(3);
        beta.set(cs(&[1, 2, 3]), BigUint::from(6u32)).unwrap();
        beta.set(cs(&[1, 2]), BigUint::from(2u32)).unwrap();
        let mut alpha = WeightFunction::ones(3);
        alpha.set(cs(&[1, 2, 3]), BigUint::from(2u32)).unwrap();
        alpha.set(cs(&[1, 2]), BigUint::from(6u32)).unwrap();
        assert!(locc_flow_order(&beta, &alpha).unwrap().is_some());
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for _ in 0..30 {
            let g = ColoredGraph::random(3, 4, &mut rng);
            let va = evaluate_on_reference(&g, &alpha).unwrap().value;
            let vb = evaluate_on_reference(&g, &beta).unwrap().value;
            assert!(va >= vb);
        }
    }

    #[test]
    fn teleportation_move_eq_315() {
        // B1 = {1,3,5}, B2 = {4,5,6}, N = 2 on D = 6.
        let b1 = cs(&[1, 3, 5]);
        let b2 = cs(&[4, 5, 6]);
        let mut beta = WeightFunction::ones(6);
        beta.set(b1.clone(), BigUint::from(4u32)).unwrap();
        beta.set(b2.clone(), BigUint::from(6u32)).unwrap();
        beta.set(cs(&[1, 3, 4, 5, 6]), BigUint::from(5u32)).unwrap();
        let alpha = teleportation_move(&beta, &b1, &b2, &BigUint::from(2u32)).unwrap();
        assert_eq!(alpha.get(&b1), BigUint::from(2u32));
        assert_eq!(alpha.get(&b2), BigUint::from(3u32));
        assert_eq!(alpha.get(&cs(&[1, 3, 4, 5, 6])), BigUint::from(10u32));
        // Monotone ratio check, Eq.-(328) exponent >= 0 on random graphs.
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..20 {
            let g = ColoredGraph::random(6, 3, &mut rng);
            let va = evaluate_on_reference(&g, &alpha).unwrap().value;
            let vb = evaluate_on_reference(&g, &beta).unwrap().value;
            assert!(va >= vb);
        }
    }

    #[test]
    fn locc_closure_established_cases() {
        // Identity.
        let a = WeightFunction::from_entries(3, &[(cs(&[1, 2]), 4)]).unwrap();
        assert!(matches!(
            locc_reachable_sufficient(&a, &a, 100).unwrap(),
            LoccVerdict::Established(_)
        ));
        // Ex. 5.12 through the flow check.
        let beta = WeightFunction::from_entries(3, &[(cs(&[1, 2, 3]), 6), (cs(&[1, 2]), 2)])
            .unwrap();
        let alpha = WeightFunction::from_entries(3, &[(cs(&[1, 2, 3]), 2), (cs(&[1, 2]), 6)])
            .unwrap();
        assert!(matches!(
            locc_reachable_sufficient(&beta, &alpha, 1000).unwrap(),
            LoccVerdict::Established(_)
        ));
        // A teleportation-only case: beta has weights on B1, B2; alpha on the union.
        let beta = WeightFunction::from_entries(3, &[(cs(&[1, 2]), 2), (cs(&[2, 3]), 2)])
            .unwrap();
        let alpha = WeightFunction::from_entries(3, &[(cs(&[1, 2, 3]), 2)]).unwrap();
        assert!(matches!(
            locc_reachable_sufficient(&beta, &alpha, 5000).unwrap(),
            LoccVerdict::Established(_)
        ));
    }

    #[test]
    fn coarse_graining_examples() {
        // Finest partition: unchanged.
        let alpha = WeightFunction::from_entries(
            3,
            &[(cs(&[1, 2]), 2), (cs(&[1, 2, 3]), 3)],
        )
        .unwrap();
        let finest: Vec<ColorSet> = (1..=3).map(|c| cs(&[c])).collect();
        assert_eq!(coarse_grain_alpha(&alpha, &finest).unwrap(), alpha);

        // Ex. 3.4: alpha = {123: N^2} and beta = {12: N, 13: N, 23: N} agree on
        // every bipartition coefficient.
        let n = 3u64;
        let alpha =
            WeightFunction::from_entries(3, &[(cs(&[1, 2, 3]), n * n)]).unwrap();
        let beta = WeightFunction::from_entries(
            3,
            &[(cs(&[1, 2]), n), (cs(&[1, 3]), n), (cs(&[2, 3]), n)],
        )
        .unwrap();
        for a in ColorSet::subsets(3, 1) {
            if a.len() >= 3 {
                continue;
            }
            assert_eq!(
                bipartition_coefficient(&alpha, &a).unwrap(),
                bipartition_coefficient(&beta, &a).unwrap()
            );
        }
        assert!(d_prime_equivalent(&alpha, &beta, 2).unwrap());
        assert!(!lu_equal(&alpha, &beta));

        // alpha = {12:2} vs beta = {13:2} separate at D' = 2.
        let alpha = WeightFunction::from_entries(3, &[(cs(&[1, 2]), 2)]).unwrap();
        let beta = WeightFunction::from_entries(3, &[(cs(&[1, 3]), 2)]).unwrap();
        assert!(!d_prime_equivalent(&alpha, &beta, 2).unwrap());
        assert!(d_prime_equivalent(&alpha, &alpha, 2).unwrap());
    }

    #[test]
    fn separability_structure_examples() {
        // Eq. (149): depth 2, four blocks.
        let blocks = vec![
            WeightedBlock {
                members: [
                    Slot { color: 1, index: 1 },
                    Slot { color: 1, index: 2 },
                    Slot { color: 2, index: 1 },
                ]
                .into(),
                weight: BigUint::from(3u32),
            },
            WeightedBlock {
                members: [Slot { color: 2, index: 2 }].into(),
                weight: BigUint::from(2u32),
            },
            WeightedBlock {
                members: [Slot { color: 3, index: 1 }, Slot { color: 3, index: 2 }].into(),
                weight: BigUint::from(5u32),
            },
            WeightedBlock {
                members: [Slot { color: 4, index: 1 }, Slot { color: 5, index: 2 }].into(),
                weight: BigUint::from(6u32),
            },
            WeightedBlock {
                members: [Slot { color: 4, index: 2 }, Slot { color: 5, index: 1 }].into(),
                weight: BigUint::from(7u32),
            },
            WeightedBlock {
                members: [Slot { color: 6, index: 1 }].into(),
                weight: BigUint::from(2u32),
            },
            WeightedBlock {
                members: [Slot { color: 6, index: 2 }].into(),
                weight: BigUint::from(4u32),
            },
        ];
        let partition = WeightedPartition::new(6, blocks).unwrap();
        let s = separability_structure(&partition.canonical_weights());
        assert_eq!(s.depth, 2);
        assert_eq!(s.max_r, 4);

        // All-ones: singletons.
        let s = separability_structure(&WeightFunction::ones(4));
        assert_eq!(s.depth, 1);
        assert_eq!(s.max_r, 4);

        // The Eq.-(144) weights on D = 6: xi = {{1,2,5,6},{3,4}}, depth 4.
        let alpha = WeightFunction::from_entries(
            6,
            &[(cs(&[1, 2, 6]), 2), (cs(&[5, 6]), 3), (cs(&[3, 4]), 6)],
        )
        .unwrap();
        let s = separability_structure(&alpha);
        assert_eq!(s.depth, 4);
        assert_eq!(s.max_r, 2);
        assert!(s.xi.contains(&cs(&[1, 2, 5, 6])));
        assert!(s.xi.contains(&cs(&[3, 4])));
    }

    #[test]
    fn named_state_scaling_formulas() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let budget = SearchBudget::default();
        for _ in 0..10 {
            let g = ColoredGraph::random(4, 3, &mut rng);
            let r = degree_report(&g).unwrap();
            // GHZ: kappa − k.
            let (s, _) = scaling_of_named(&g, &NamedState::Ghz, &budget).unwrap();
            assert_eq!(s, Rational::from_integer(r.kappa_minus_k));
            // Cyclic tau: (1/2) sum of F_{i tau(i)} − k.
            let tau = vec![1, 2, 3, 4];
            let (s, _) = scaling_of_named(&g, &NamedState::Cyclic { tau }, &budget).unwrap();
            let face_sum: i64 = (0..4)
                .map(|i| {
                    r.faces.get([1, 2, 3, 4][i], [1, 2, 3, 4][(i + 1) % 4]) as i64
                        - g.k() as i64
                })
                .sum();
            assert_eq!(s, Rational::new(face_sum, 2));
            // GHZ vs cyclic difference is the jacket genus.
            let (diff, _) = distinguishing_quantity(
                &g,
                &NamedState::Ghz,
                &NamedState::Cyclic {
                    tau: vec![1, 2, 3, 4],
                },
                &budget,
            )
            .unwrap();
            let g_tau = r
                .jacket_genera
                .iter()
                .find(|(o, _)| o == &vec![1, 2, 3, 4])
                .unwrap()
                .1;
            assert_eq!(diff, Rational::from_integer(g_tau as i64));
            // GHZ vs phi_p difference: omega_p / I_p.
            for p in 2..=3 {
                let (diff, _) = distinguishing_quantity(
                    &g,
                    &NamedState::Ghz,
                    &NamedState::PComplete { p },
                    &budget,
                )
                .unwrap();
                assert_eq!(
                    diff,
                    Rational::new(r.omega_p[&p] as i64, binomial(3, p - 1) as i64)
                );
            }
            // phi_2 vs Haar: 2 Delta / (D−1).
            let (diff, _) = distinguishing_quantity(
                &g,
                &NamedState::PComplete { p: 2 },
                &NamedState::Haar,
                &budget,
            )
            .unwrap();
            let delta = compatibility_search(&g, &budget).unwrap().delta;
            assert_eq!(diff, Rational::new(2 * delta as i64, 3));
        }
    }

    #[test]
    fn phi2_tensor_power_matches_cyclic_product() {
        // s of phi_2 times (D−1)! equals the summed s over all cyclic states.
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let budget = SearchBudget::default();
        for d in [3usize, 4] {
            let g = ColoredGraph::random(d, 3, &mut rng);
            let (s2, _) =
                scaling_of_named(&g, &NamedState::PComplete { p: 2 }, &budget).unwrap();
            let mut total = Rational::from_integer(0);
            let mut count = 0;
            for tail in permutations_of(&(2..=d).collect::<Vec<_>>()) {
                let mut tau = vec![1];
                tau.extend(tail);
                let (s, _) =
                    scaling_of_named(&g, &NamedState::Cyclic { tau }, &budget).unwrap();
                total += s;
                count += 1;
            }
            let factorial: i64 = (1..=(d as i64 - 1)).product();
            assert_eq!(count as i64, factorial);
            assert_eq!(s2 * Rational::from_integer(factorial), total);
        }
    }

    fn permutations_of(items: &[usize]) -> Vec<Vec<usize>> {
        if items.is_empty() {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for (i, &x) in items.iter().enumerate() {
            let mut rest = items.to_vec();
            rest.remove(i);
            for mut tail in permutations_of(&rest) {
                tail.insert(0, x);
                out.push(tail);
            }
        }
        out
    }
}
