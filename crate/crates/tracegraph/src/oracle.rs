//! Independent numeric ground truth: explicit dense tensors for GHZ-built
//! reference states and Haar samples, contraction of any trace-invariant
//! over them, Monte Carlo moment estimation, and the separability test.
//!
//! Nothing here shares code with the symbolic evaluation paths; agreement
//! between the two is what the cross-check suites assert.

use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::graph::{ColorSet, ColoredGraph};
use crate::refstates::WeightedPartition;

/// Default cap on multiply-adds per contraction.
pub const DEFAULT_CONTRACT_BUDGET: u64 = 100_000_000;

/// A dense normalized D-partite state.
#[derive(Clone, Debug)]
pub struct DenseState {
    /// Local dimension per color, `dims[c-1]`.
    pub dims: Vec<usize>,
    /// Amplitudes in row-major order, color 1 slowest.
    pub amps: Vec<Complex64>,
}

impl DenseState {
    pub fn d(&self) -> usize {
        self.dims.len()
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn norm_sq(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1usize; self.dims.len()];
        for c in (0..self.dims.len().saturating_sub(1)).rev() {
            strides[c] = strides[c + 1] * self.dims[c + 1];
        }
        strides
    }

    fn check_budget(dims: &[usize], budget: u64) -> Result<usize> {
        let mut total = 1u64;
        for &d in dims {
            total = total.saturating_mul(d as u64);
            if total > budget {
                return Err(Error::ElementBudgetExceeded(format!(
                    "state of {total}+ elements"
                )));
            }
        }
        Ok(total as usize)
    }
}

/// GHZ of dimension `n` on the colors in `b`, normalized uniform vectors on
/// the remaining colors. Ambient dimensions must dominate `n` on `b`.
pub fn build_ghz(b: &ColorSet, n: usize, dims: &[usize]) -> Result<DenseState> {
    let d = dims.len();
    b.validate(d)?;
    if b.is_empty() {
        return Err(Error::EmptyColorSet);
    }
    if n == 0 {
        return Err(Error::DimensionMismatch("GHZ dimension must be >= 1".into()));
    }
    for c in b.iter() {
        if dims[c - 1] < n {
            return Err(Error::DimensionMismatch(format!(
                "color {c} has dimension {} < {n}",
                dims[c - 1]
            )));
        }
    }
    let total = DenseState::check_budget(dims, DEFAULT_CONTRACT_BUDGET)?;
    let mut state = DenseState {
        dims: dims.to_vec(),
        amps: vec![Complex64::zero(); total],
    };
    let strides = state.strides();
    // Amplitude 1/sqrt(n) * prod_{c not in b} 1/sqrt(dims[c]) whenever the
    // b-indices agree and are < n.
    let outside: Vec<usize> = (1..=d).filter(|c| !b.contains(*c)).collect();
    let mut norm = (n as f64).sqrt();
    for &c in &outside {
        norm *= (dims[c - 1] as f64).sqrt();
    }
    let amp = Complex64::new(1.0 / norm, 0.0);
    let mut outside_index = vec![0usize; outside.len()];
    loop {
        for i in 0..n {
            let mut flat = 0usize;
            for c in b.iter() {
                flat += i * strides[c - 1];
            }
            for (pos, &c) in outside.iter().enumerate() {
                flat += outside_index[pos] * strides[c - 1];
            }
            state.amps[flat] = amp;
        }
        // Advance the mixed-radix outside index.
        let mut pos = outside.len();
        loop {
            if pos == 0 {
                return Ok(state);
            }
            pos -= 1;
            outside_index[pos] += 1;
            if outside_index[pos] < dims[outside[pos] - 1] {
                break;
            }
            outside_index[pos] = 0;
        }
    }
}

/// Dense tensor of a fine-grained reference state; each slot's dimension is
/// its block weight and each color's dimension is the product over its
/// slots.
pub fn build_reference(partition: &WeightedPartition) -> Result<DenseState> {
    let d = partition.d;
    // Collect the slots per color in index order.
    let mut slots_per_color: Vec<Vec<(usize, usize)>> = vec![Vec::new(); d];
    for (bi, block) in partition.blocks.iter().enumerate() {
        let w = block
            .weight
            .to_usize()
            .ok_or_else(|| Error::ElementBudgetExceeded("huge block weight".into()))?;
        for slot in &block.members {
            slots_per_color[slot.color - 1].push((slot.index, bi));
            let _ = w;
        }
    }
    for list in &mut slots_per_color {
        list.sort_unstable();
    }
    let block_dim: Vec<usize> = partition
        .blocks
        .iter()
        .map(|b| b.weight.to_usize().unwrap_or(usize::MAX))
        .collect();
    let dims: Vec<usize> = slots_per_color
        .iter()
        .map(|slots| slots.iter().map(|&(_, bi)| block_dim[bi]).product::<usize>().max(1))
        .collect();
    let total = DenseState::check_budget(&dims, DEFAULT_CONTRACT_BUDGET)?;
    let mut state = DenseState {
        dims: dims.clone(),
        amps: vec![Complex64::zero(); total],
    };
    let strides = state.strides();
    // Iterate over one index per block; each slot of the block carries it.
    let nblocks = partition.blocks.len();
    let mut block_index = vec![0usize; nblocks];
    let norm: f64 = block_dim.iter().map(|&w| (w as f64).sqrt()).product();
    let amp = Complex64::new(1.0 / norm, 0.0);
    loop {
        let mut flat = 0usize;
        for c in 0..d {
            // Mixed radix over this color's slots, first slot slowest.
            let mut local = 0usize;
            for &(_, bi) in &slots_per_color[c] {
                local = local * block_dim[bi] + block_index[bi];
            }
            flat += local * strides[c];
        }
        state.amps[flat] = amp;
        let mut pos = nblocks;
        loop {
            if pos == 0 {
                return Ok(state);
            }
            pos -= 1;
            block_index[pos] += 1;
            if block_index[pos] < block_dim[pos] {
                break;
            }
            block_index[pos] = 0;
        }
    }
}

/// Exact rational contraction for reference states: amplitudes are 0/1
/// counts times a global normalization, so the invariant is the integer
/// count of index assignments divided by `Π_A w_A^{k}`.
pub fn contract_reference_exact(
    g: &ColoredGraph,
    partition: &WeightedPartition,
) -> Result<BigRational> {
    if g.d() != partition.d {
        return Err(Error::GraphArityMismatch {
            left: g.d(),
            right: partition.d,
        });
    }
    let k = g.k();
    // Index variables: one per (block, tensor copy, shade). The delta
    // pattern identifies block index of white w with block index of black
    // sigma_c(w) whenever the block touches color c. Count solutions by
    // union-find over (block, vertex) pairs weighted by block dims.
    let nblocks = partition.blocks.len();
    let nodes = nblocks * 2 * k;
    let mut parent: Vec<usize> = (0..nodes).collect();
    fn find(parent: &mut Vec<usize>, mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let union = |parent: &mut Vec<usize>, a: usize, b: usize| {
        let (ra, rb) = (find(parent, a), find(parent, b));
        if ra != rb {
            parent[ra] = rb;
        }
    };
    let node = |bi: usize, white: bool, v: usize| bi * 2 * k + if white { v } else { k + v };
    for (bi, block) in partition.blocks.iter().enumerate() {
        let colors: ColorSet =
            ColorSet::from_slice(&block.members.iter().map(|s| s.color).collect::<Vec<_>>());
        for c in colors.iter() {
            for w in 0..k {
                let b = g.sigma(c).image(w);
                union(&mut parent, node(bi, true, w), node(bi, false, b));
            }
        }
    }
    // Count of free index classes per block, weighted by the block weight.
    let mut count = BigUint::one();
    for bi in 0..nblocks {
        let mut roots = std::collections::BTreeSet::new();
        for v in 0..2 * k {
            roots.insert(find(&mut parent, bi * 2 * k + v));
        }
        let classes = roots.len() as u32;
        let w = &partition.blocks[bi].weight;
        count *= w.pow(classes);
    }
    let mut denom = BigUint::one();
    for block in &partition.blocks {
        denom *= block.weight.pow(2 * k as u32);
    }
    // Each class merges a white and black chain; sqrt pairing: amplitudes
    // contribute w^{-k} per block and the count is w^{classes}; classes
    // counts pairs of (white, black) identified sets.
    Ok(BigRational::new(
        BigInt::from(count),
        BigInt::from(denom.sqrt()),
    ))
}

/// The three-qutrit state whose complete-tripartite invariant vanishes.
pub fn build_psi_ex() -> DenseState {
    let dims = vec![3usize, 3, 3];
    let mut amps = vec![Complex64::zero(); 27];
    let idx = |a: usize, b: usize, c: usize| a * 9 + b * 3 + c;
    let w = 1.0 / (6.0f64).sqrt();
    amps[idx(0, 0, 1)] = Complex64::new(w, 0.0);
    amps[idx(0, 1, 0)] = Complex64::new(-w, 0.0);
    amps[idx(1, 0, 2)] = Complex64::new(w, 0.0);
    amps[idx(1, 2, 0)] = Complex64::new(-w, 0.0);
    amps[idx(2, 1, 2)] = Complex64::new(w, 0.0);
    amps[idx(2, 2, 1)] = Complex64::new(-w, 0.0);
    DenseState { dims, amps }
}

/// Haar-random state: normalized i.i.d. complex Gaussians, deterministic in
/// the seed.
pub fn sample_haar(d: usize, n: usize, seed: u64) -> Result<DenseState> {
    let dims = vec![n; d];
    let total = DenseState::check_budget(&dims, DEFAULT_CONTRACT_BUDGET)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut amps = Vec::with_capacity(total);
    for _ in 0..total {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        amps.push(Complex64::new(re, im));
    }
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    for a in &mut amps {
        *a /= norm;
    }
    Ok(DenseState { dims, amps })
}

// ---------------------------------------------------------------------------
// Contraction
// ---------------------------------------------------------------------------

/// A dense intermediate tensor with labeled open legs.
struct Tensor {
    /// Edge labels; an edge is (color, white) and joins the two vertices it
    /// came from.
    legs: Vec<(usize, usize)>,
    dims: Vec<usize>,
    data: Vec<Complex64>,
}

/// Numerically evaluates `Tr_G(state)` by greedy pairwise contraction.
pub fn contract(g: &ColoredGraph, state: &DenseState, budget: u64) -> Result<Complex64> {
    if g.d() != state.d() {
        return Err(Error::GraphArityMismatch {
            left: g.d(),
            right: state.d(),
        });
    }
    let k = g.k();
    let d = g.d();
    let mut remaining_ops = budget;
    // Node tensors: whites carry the state, blacks its conjugate; the leg
    // of color c at white w is (c, w); at black b it is (c, sigma_c^{-1}(b)).
    let mut tensors: Vec<Tensor> = Vec::with_capacity(2 * k);
    for w in 0..k {
        tensors.push(Tensor {
            legs: (1..=d).map(|c| (c, w)).collect(),
            dims: state.dims.clone(),
            data: state.amps.clone(),
        });
    }
    let inverses: Vec<_> = (1..=d).map(|c| g.sigma(c).inverse()).collect();
    for b in 0..k {
        tensors.push(Tensor {
            legs: (1..=d).map(|c| (c, inverses[c - 1].image(b))).collect(),
            dims: state.dims.clone(),
            data: state.amps.iter().map(|a| a.conj()).collect(),
        });
    }

    while tensors.len() > 1 {
        // Greedy: pick the sharing pair with the smallest result size.
        let mut best: Option<(usize, usize, u64)> = None;
        for i in 0..tensors.len() {
            for j in (i + 1)..tensors.len() {
                let shared: Vec<usize> = tensors[i]
                    .legs
                    .iter()
                    .enumerate()
                    .filter(|(_, l)| tensors[j].legs.contains(l))
                    .map(|(pos, _)| pos)
                    .collect();
                if shared.is_empty() {
                    continue;
                }
                let mut size = 1u64;
                for (pos, dim) in tensors[i].dims.iter().enumerate() {
                    if !shared.contains(&pos) {
                        size = size.saturating_mul(*dim as u64);
                    }
                }
                for (pos, leg) in tensors[j].legs.iter().enumerate() {
                    if !tensors[i].legs.contains(leg) {
                        size = size.saturating_mul(tensors[j].dims[pos] as u64);
                    }
                }
                if best.map_or(true, |(_, _, s)| size < s) {
                    best = Some((i, j, size));
                }
            }
        }
        let (i, j, _) = match best {
            Some(b) => b,
            None => {
                // No sharing pair left (disconnected components already
                // reduced): take the outer product of the two smallest.
                let mut order: Vec<usize> = (0..tensors.len()).collect();
                order.sort_by_key(|&i| tensors[i].data.len());
                (order[0], order[1], 0)
            }
        };
        let (i, j) = (i.min(j), i.max(j));
        let right = tensors.swap_remove(j);
        let left = tensors.swap_remove(i);
        let product = contract_pair(&left, &right, &mut remaining_ops)?;
        tensors.push(product);
    }
    let last = tensors.pop().expect("one tensor remains");
    if !last.legs.is_empty() {
        return Err(Error::InternalConsistency(
            "open legs after full contraction".into(),
        ));
    }
    Ok(last.data[0])
}

fn contract_pair(a: &Tensor, b: &Tensor, remaining_ops: &mut u64) -> Result<Tensor> {
    // Partition legs into (free_a, shared) and (shared, free_b).
    let shared: Vec<(usize, usize)> = a
        .legs
        .iter()
        .copied()
        .filter(|l| b.legs.contains(l))
        .collect();
    let free_a: Vec<usize> = (0..a.legs.len())
        .filter(|&p| !shared.contains(&a.legs[p]))
        .collect();
    let free_b: Vec<usize> = (0..b.legs.len())
        .filter(|&p| !shared.contains(&b.legs[p]))
        .collect();
    let a_shared_pos: Vec<usize> = shared
        .iter()
        .map(|l| a.legs.iter().position(|x| x == l).unwrap())
        .collect();
    let b_shared_pos: Vec<usize> = shared
        .iter()
        .map(|l| b.legs.iter().position(|x| x == l).unwrap())
        .collect();

    let dim_of = |positions: &[usize], dims: &[usize]| -> usize {
        positions.iter().map(|&p| dims[p]).product::<usize>().max(1)
    };
    let m = dim_of(&free_a, &a.dims);
    let kk = dim_of(&a_shared_pos, &a.dims);
    let n = dim_of(&free_b, &b.dims);
    let ops = (m as u64)
        .saturating_mul(kk as u64)
        .saturating_mul(n as u64);
    if ops > *remaining_ops {
        return Err(Error::ElementBudgetExceeded(format!(
            "contraction of an {m}x{kk} by {kk}x{n} block"
        )));
    }
    *remaining_ops -= ops;

    let a_mat = reorder(a, &free_a, &a_shared_pos);
    let b_mat = reorder(b, &b_shared_pos, &free_b);
    let mut data = vec![Complex64::zero(); m * n];
    for r in 0..m {
        for t in 0..kk {
            let av = a_mat[r * kk + t];
            if av == Complex64::zero() {
                continue;
            }
            let row = &b_mat[t * n..(t + 1) * n];
            let out = &mut data[r * n..(r + 1) * n];
            for (o, &bv) in out.iter_mut().zip(row) {
                *o += av * bv;
            }
        }
    }
    let mut legs = Vec::with_capacity(free_a.len() + free_b.len());
    let mut dims = Vec::with_capacity(legs.capacity());
    for &p in &free_a {
        legs.push(a.legs[p]);
        dims.push(a.dims[p]);
    }
    for &p in &free_b {
        legs.push(b.legs[p]);
        dims.push(b.dims[p]);
    }
    Ok(Tensor { legs, dims, data })
}

/// Reorders a tensor's data into (group1, group2) row-major layout.
fn reorder(t: &Tensor, group1: &[usize], group2: &[usize]) -> Vec<Complex64> {
    let rank = t.legs.len();
    let mut strides = vec![1usize; rank];
    for p in (0..rank.saturating_sub(1)).rev() {
        strides[p] = strides[p + 1] * t.dims[p + 1];
    }
    let order: Vec<usize> = group1.iter().chain(group2).copied().collect();
    let total = t.data.len();
    let mut out = vec![Complex64::zero(); total];
    let mut index = vec![0usize; order.len()];
    for slot in 0..total {
        let mut flat = 0usize;
        for (pos, &p) in order.iter().enumerate() {
            flat += index[pos] * strides[p];
        }
        out[slot] = t.data[flat];
        // Advance mixed radix over `order` dims, last fastest.
        let mut pos = order.len();
        while pos > 0 {
            pos -= 1;
            index[pos] += 1;
            if index[pos] < t.dims[order[pos]] {
                break;
            }
            index[pos] = 0;
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Monte Carlo and derived tests
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct MonteCarloEstimate {
    pub mean: Complex64,
    pub std_error: f64,
    pub samples: u64,
    pub seed: u64,
}

/// Sample mean of `Tr_G` over Haar states, deterministic in the seed.
pub fn monte_carlo_haar_moment(
    g: &ColoredGraph,
    n: usize,
    samples: u64,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    let mut sum = Complex64::zero();
    let mut sum_sq = 0.0f64;
    for i in 0..samples {
        let state = sample_haar(g.d(), n, seed.wrapping_add(i).wrapping_mul(0x9E3779B97F4A7C15))?;
        let value = contract(g, &state, DEFAULT_CONTRACT_BUDGET)?;
        sum += value;
        sum_sq += value.norm_sqr();
    }
    let mean = sum / samples as f64;
    let variance = (sum_sq / samples as f64 - mean.norm_sqr()).max(0.0);
    let std_error = (variance / samples as f64).sqrt();
    Ok(MonteCarloEstimate {
        mean,
        std_error,
        samples,
        seed,
    })
}

/// Separability test through a genuinely D-partite invariant: the modulus
/// is 1 exactly on separable states.
pub fn separability_test(g: &ColoredGraph, state: &DenseState, tolerance: f64) -> Result<bool> {
    if !g.classify().genuinely_d_partite {
        return Err(Error::FamilyPredicateFailed(
            "separability test needs a genuinely D-partite graph".into(),
        ));
    }
    let value = contract(g, state, DEFAULT_CONTRACT_BUDGET)?;
    Ok((value.norm() - 1.0).abs() < tolerance)
}

/// `Tr((rho_A)^m)` for `m = 1..=up_to`, computed from the dense reduced
/// density matrix across the bipartition `{A, complement}`.
pub fn power_sums(state: &DenseState, a: &ColorSet, up_to: usize) -> Result<Vec<f64>> {
    let d = state.d();
    a.validate(d)?;
    if a.is_empty() || a.len() == d {
        return Err(Error::EmptyColorSet);
    }
    let dim_a: usize = a.iter().map(|c| state.dims[c - 1]).product();
    let dim_b: usize = (1..=d)
        .filter(|c| !a.contains(*c))
        .map(|c| state.dims[c - 1])
        .product();
    if (dim_a as u64 * dim_a as u64).saturating_mul(dim_b as u64) > DEFAULT_CONTRACT_BUDGET {
        return Err(Error::ElementBudgetExceeded("power sums".into()));
    }
    // Reshape into a dim_a x dim_b matrix.
    let strides = state.strides();
    let a_cols: Vec<usize> = a.iter().collect();
    let b_cols: Vec<usize> = (1..=d).filter(|c| !a.contains(*c)).collect();
    let mut psi = vec![Complex64::zero(); dim_a * dim_b];
    let mut index = vec![0usize; d];
    for _ in 0..state.len() {
        let mut flat = 0usize;
        for c in 0..d {
            flat += index[c] * strides[c];
        }
        let mut row = 0usize;
        for &c in &a_cols {
            row = row * state.dims[c - 1] + index[c - 1];
        }
        let mut col = 0usize;
        for &c in &b_cols {
            col = col * state.dims[c - 1] + index[c - 1];
        }
        psi[row * dim_b + col] = state.amps[flat];
        let mut pos = d;
        while pos > 0 {
            pos -= 1;
            index[pos] += 1;
            if index[pos] < state.dims[pos] {
                break;
            }
            index[pos] = 0;
        }
    }
    // rho = psi psi^dagger.
    let mut rho = vec![Complex64::zero(); dim_a * dim_a];
    for r in 0..dim_a {
        for s in 0..dim_a {
            let mut acc = Complex64::zero();
            for t in 0..dim_b {
                acc += psi[r * dim_b + t] * psi[s * dim_b + t].conj();
            }
            rho[r * dim_a + s] = acc;
        }
    }
    let mut out = Vec::with_capacity(up_to);
    let mut power = rho.clone();
    for m in 1..=up_to {
        let trace: Complex64 = (0..dim_a).map(|i| power[i * dim_a + i]).sum();
        out.push(trace.re);
        if m < up_to {
            let mut next = vec![Complex64::zero(); dim_a * dim_a];
            for r in 0..dim_a {
                for t in 0..dim_a {
                    let v = power[r * dim_a + t];
                    if v == Complex64::zero() {
                        continue;
                    }
                    for s in 0..dim_a {
                        next[r * dim_a + s] += v * rho[t * dim_a + s];
                    }
                }
            }
            power = next;
        }
    }
    Ok(out)
}
