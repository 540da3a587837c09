//! Exact finite-N Haar and Gaussian moments of trace-invariants, the
//! large-N factorization check, the Rényi-type monotone `R_G` with its
//! asymptote, and the finite-replica entropy scalings of the named
//! families.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::degrees::{compatibility_search, Exactness, SearchBudget};
use crate::error::{Error, Result};
use crate::families::{generate, FamilySpec};
use crate::graph::{ColorSet, ColoredGraph};
use crate::perm::Perm;
use crate::refstates::{scaling_of_named, NamedState, Rational};

/// Exact Haar moment at a given `N` with the asymptotic pair.
#[derive(Clone, Debug)]
pub struct MomentReport {
    pub n: u64,
    /// `⟨Tr_G⟩` over the Haar ensemble, exact.
    pub exact_value: BigRational,
    /// The Gaussian (Wick) value: the same sum without the prefactor.
    pub gaussian_value: BigRational,
    /// Prefactor `f_{k,D,N} = N^{Dk} (N^D − 1)! / (N^D + k − 1)!`.
    pub prefactor: BigRational,
    /// Leading exponent `s_G` and its degeneracy `mu`.
    pub s: i64,
    pub mu: Option<u64>,
    pub exactness: Exactness,
}

/// Distance profile: how many `nu` have `Σ_c d(sigma_c, nu) = t`.
fn distance_profile(g: &ColoredGraph, budget: &SearchBudget) -> Result<Vec<u64>> {
    let k = g.k();
    if k > budget.exhaustive_k.max(9) {
        return Err(Error::BudgetExceeded(format!(
            "exact moment needs the exhaustive nu-sum; k = {k} exceeds the budget"
        )));
    }
    let d = g.d();
    let mut profile = vec![0u64; d * k + 1];
    for nu in Perm::all(k) {
        let nu_inv = nu.inverse();
        let mut total = 0usize;
        for c in 1..=d {
            total += k - g.sigma(c).compose(&nu_inv).cycle_count();
        }
        profile[total] += 1;
    }
    Ok(profile)
}

fn gaussian_sum(profile: &[u64], n: u64) -> BigRational {
    let n_big = BigInt::from(n);
    let mut total = BigRational::zero();
    for (t, &count) in profile.iter().enumerate() {
        if count == 0 {
            continue;
        }
        let term = BigRational::new(BigInt::from(count), n_big.pow(t as u32));
        total += term;
    }
    total
}

/// `f_{k,D,N} = N^{Dk} (N^D − 1)! / (N^D + k − 1)! = N^{Dk} / Π_{j=0}^{k−1}(N^D + j)`.
pub fn haar_prefactor(k: usize, d: usize, n: u64) -> BigRational {
    let n_big = BigInt::from(n);
    let nd = n_big.pow(d as u32);
    let mut denom = BigInt::one();
    for j in 0..k {
        denom *= &nd + BigInt::from(j);
    }
    BigRational::new(n_big.pow((d * k) as u32), denom)
}

/// Exact Haar moment `f_{k,D,N} Σ_nu N^{−Σ_c d(sigma_c, nu)}` together with
/// the Gaussian value and the asymptotic `(s, mu)` pair.
pub fn haar_moment_exact(g: &ColoredGraph, n: u64, budget: &SearchBudget) -> Result<MomentReport> {
    if n == 0 {
        return Err(Error::DimensionMismatch("N must be >= 1".into()));
    }
    let profile = distance_profile(g, budget)?;
    let gaussian = gaussian_sum(&profile, n);
    let prefactor = haar_prefactor(g.k(), g.d(), n);
    let exact_value = &prefactor * &gaussian;
    // Moments of a normalized state stay in (0, 1].
    if exact_value.is_negative()
        || exact_value.is_zero()
        || exact_value > BigRational::one()
    {
        return Err(Error::InternalConsistency(format!(
            "Haar moment {exact_value} outside (0, 1]"
        )));
    }
    let min_distance = profile
        .iter()
        .position(|&c| c > 0)
        .expect("profile nonempty");
    let mu = profile[min_distance];
    Ok(MomentReport {
        n,
        exact_value,
        gaussian_value: gaussian,
        prefactor,
        s: -(min_distance as i64),
        mu: Some(mu),
        exactness: Exactness::Exact,
    })
}

/// The Gaussian (Wick) moment alone: the nu-sum without the prefactor.
pub fn gaussian_moment_exact(
    g: &ColoredGraph,
    n: u64,
    budget: &SearchBudget,
) -> Result<BigRational> {
    let profile = distance_profile(g, budget)?;
    Ok(gaussian_sum(&profile, n))
}

/// Large-N factorization over `G ⊔ conj(G)`.
#[derive(Clone, Debug)]
pub struct FactorizationReport {
    pub s_g: i64,
    pub mu_g: Option<u64>,
    pub s_doubled: Option<i64>,
    pub mu_doubled: Option<u64>,
    pub holds: Option<bool>,
    pub via: String,
}

/// Checks `s_{G⊔Ḡ} = 2 s_G` and `mu_{G⊔Ḡ} = mu_G²`, taking the fast path
/// `Delta(G) < D(D−1)/4` when available.
pub fn factorization_check(g: &ColoredGraph, budget: &SearchBudget) -> Result<FactorizationReport> {
    let search = compatibility_search(g, budget)?;
    let s_g = crate::degrees::haar_scaling_from_delta(g, search.delta)?;
    let threshold_num = g.d() as u64 * (g.d() as u64 - 1);
    // Delta < D(D−1)/4  <=>  4*Delta < D(D−1).
    if search.exactness == Exactness::Exact && 4 * search.delta < threshold_num {
        return Ok(FactorizationReport {
            s_g,
            mu_g: search.mu,
            s_doubled: Some(2 * s_g),
            mu_doubled: search.mu.map(|m| m * m),
            holds: Some(true),
            via: format!(
                "Delta = {} < D(D-1)/4 = {}/4",
                search.delta, threshold_num
            ),
        });
    }
    let doubled = g.union(&g.conjugate())?;
    if doubled.k() > budget.exhaustive_k {
        return Ok(FactorizationReport {
            s_g,
            mu_g: search.mu,
            s_doubled: None,
            mu_doubled: None,
            holds: None,
            via: "doubled search exceeds the budget".into(),
        });
    }
    let doubled_search = compatibility_search(&doubled, budget)?;
    let s_doubled = crate::degrees::haar_scaling_from_delta(&doubled, doubled_search.delta)?;
    let holds = s_doubled == 2 * s_g
        && match (doubled_search.mu, search.mu) {
            (Some(md), Some(mg)) => md == mg * mg,
            _ => false,
        };
    Ok(FactorizationReport {
        s_g,
        mu_g: search.mu,
        s_doubled: Some(s_doubled),
        mu_doubled: doubled_search.mu,
        holds: Some(holds),
        via: "doubled search".into(),
    })
}

/// `R_G = −ln |Tr_G|`, with `+∞` at zero.
pub fn renyi_monotone(value: f64) -> f64 {
    if value == 0.0 {
        f64::INFINITY
    } else {
        -value.abs().ln()
    }
}

/// The asymptote `⟨R_G⟩ ≈ |s| ln N − ln mu` with the per-component
/// hypothesis report.
#[derive(Clone, Debug)]
pub struct RAsymptote {
    /// Coefficient of `ln N`.
    pub slope: u64,
    /// The constant is `−ln mu`; this is `mu` itself.
    pub mu: u64,
    pub conditions: Vec<String>,
}

/// Recognizes a component of the power-law catalog: cyclic graphs,
/// `RM_{2n}^{(B)}` with `|B| = D−2`, `RE_{m,n}^{(c)}` at D = 3, and even
/// partial-transpose moments at D = 3.
fn power_law_membership(component: &ColoredGraph) -> Option<String> {
    let class = component.classify();
    if class.cyclic {
        return Some("cyclic".into());
    }
    let d = component.d();
    let k = component.k();
    // RM_{2n}^{(B)}, |B| = D−2: k = 2n.
    if k % 2 == 0 {
        let n = k / 2;
        for traced in ColorSet::subsets(d, 2) {
            if traced.len() != d - 2 {
                continue;
            }
            if let Ok(blocks) = FamilySpec::standard_blocks(d, &traced) {
                if let Ok(rm) = generate(&FamilySpec::Rm { d, n, blocks }) {
                    if rm.is_isomorphic(component) {
                        return Some(format!("RM_{k}^({traced})"));
                    }
                }
            }
        }
    }
    if d == 3 {
        // RE_{m,n}^{(c)} with m n = k, m even.
        for c in 1..=3usize {
            let traced = ColorSet::from_slice(&[c]);
            for n in 1..=k {
                if k % n != 0 {
                    continue;
                }
                let m = k / n;
                if m < 2 || m % 2 != 0 {
                    continue;
                }
                if let Ok(re) = generate(&FamilySpec::Rme {
                    d: 3,
                    m,
                    n,
                    traced: traced.clone(),
                }) {
                    if re.is_isomorphic(component) {
                        return Some(format!("RE_{m},{n}^({c})"));
                    }
                }
            }
        }
        // Even partial transpose moments.
        if k % 2 == 0 {
            for c in 1..=3usize {
                let traced = ColorSet::from_slice(&[c]);
                if let Ok(blocks) = FamilySpec::standard_blocks(3, &traced) {
                    if let Ok(pt) = generate(&FamilySpec::Pt { d: 3, k, blocks }) {
                        if pt.is_isomorphic(component) {
                            return Some(format!("PT_{k}^({c})"));
                        }
                    }
                }
            }
        }
    }
    None
}

/// Asymptotic typical value of `R_G` on the Haar state; errors with
/// `ConditionsNotMet` outside the proven catalog.
pub fn asymptotic_r_haar(g: &ColoredGraph, budget: &SearchBudget) -> Result<RAsymptote> {
    let mut conditions = Vec::new();
    for (i, component) in g.components().iter().enumerate() {
        match power_law_membership(component) {
            Some(name) => conditions.push(format!("component {}: {name}", i + 1)),
            None => {
                return Err(Error::ConditionsNotMet(format!(
                    "component {} is outside the power-law catalog",
                    i + 1
                )))
            }
        }
    }
    let fact = factorization_check(g, budget)?;
    match fact.holds {
        Some(true) => conditions.push(fact.via.clone()),
        _ => {
            return Err(Error::ConditionsNotMet(
                "large-N factorization not established".into(),
            ))
        }
    }
    let mu = fact
        .mu_g
        .ok_or_else(|| Error::ConditionsNotMet("mu unknown".into()))?;
    let slope = (-fact.s_g) as u64;
    Ok(RAsymptote {
        slope,
        mu,
        conditions,
    })
}

// ---------------------------------------------------------------------------
// Entropy scalings
// ---------------------------------------------------------------------------

/// The finite-replica normalized entropy scalings of the named families.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EntropyKind {
    /// `[s_{ME_n} − n^{D−1} s_{ME_1}] / ((1−n) n^{D−2})`.
    MultiEntropy { n: usize },
    /// `[s_{RME_{m,n}} − n^{D−2} s_{RME_{m,1}}] / ((1−n) n^{D−3})`.
    ReflectedMultiEntropy { m: usize, n: usize, traced_color: usize },
    /// `s_{cyclic} / (1−k)` for the bipartition `{B, complement}`.
    EntanglementRenyi { b: ColorSet, k: usize },
    /// `−s_{PT_{2n+1}} / 2`.
    PartialTransposeEntropy { n: usize, traced_color: usize },
    /// `s_{PT_{2n}}` itself.
    LogarithmicNegativity { n: usize, traced_color: usize },
    /// `s_{RM_{2n}}` itself.
    RealignmentScaling { n: usize, traced_color: usize },
}

/// Exact rational scaling of a finite-replica entropy on a named state.
/// Entries the source leaves conjectural (multi-entropies on the Haar
/// state) return `Err(Conjecture)`.
pub fn entropy_scaling(
    d: usize,
    kind: &EntropyKind,
    state: &NamedState,
    budget: &SearchBudget,
) -> Result<Rational> {
    if matches!(state, NamedState::Haar)
        && matches!(
            kind,
            EntropyKind::MultiEntropy { .. } | EntropyKind::ReflectedMultiEntropy { .. }
        )
    {
        return Err(Error::Conjecture);
    }
    let s_of = |g: &ColoredGraph| -> Result<Rational> {
        Ok(scaling_of_named(g, state, budget)?.0)
    };
    let ipow = |n: usize, e: usize| -> i64 { (n as i64).pow(e as u32) };
    match kind {
        EntropyKind::MultiEntropy { n } => {
            if *n < 2 {
                return Err(Error::MissingNormalization);
            }
            let g_n = generate(&FamilySpec::Me { d, n: *n })?;
            let g_1 = generate(&FamilySpec::Me { d, n: 1 })?;
            let s_n = s_of(&g_n)?;
            let s_1 = s_of(&g_1)?;
            let numerator = s_n - s_1 * Rational::from_integer(ipow(*n, d - 1));
            let denominator = Rational::from_integer((1 - *n as i64) * ipow(*n, d - 2));
            Ok(numerator / denominator)
        }
        EntropyKind::ReflectedMultiEntropy { m, n, traced_color } => {
            if *n < 2 || d < 3 {
                return Err(Error::MissingNormalization);
            }
            let traced = ColorSet::from_slice(&[*traced_color]);
            let g_n = generate(&FamilySpec::Rme {
                d,
                m: *m,
                n: *n,
                traced: traced.clone(),
            })?;
            let g_1 = generate(&FamilySpec::Rme {
                d,
                m: *m,
                n: 1,
                traced,
            })?;
            let s_n = s_of(&g_n)?;
            let s_1 = s_of(&g_1)?;
            let numerator = s_n - s_1 * Rational::from_integer(ipow(*n, d - 2));
            let denominator = Rational::from_integer((1 - *n as i64) * ipow(*n, d - 3));
            Ok(numerator / denominator)
        }
        EntropyKind::EntanglementRenyi { b, k } => {
            if *k < 2 {
                return Err(Error::MissingNormalization);
            }
            let g = generate(&FamilySpec::CyclicBipartition {
                d,
                b: b.clone(),
                k: *k,
            })?;
            Ok(s_of(&g)? / Rational::from_integer(1 - *k as i64))
        }
        EntropyKind::PartialTransposeEntropy { n, traced_color } => {
            let traced = ColorSet::from_slice(&[*traced_color]);
            let g = generate(&FamilySpec::Pt {
                d,
                k: 2 * n + 1,
                blocks: FamilySpec::standard_blocks(d, &traced)?,
            })?;
            Ok(s_of(&g)? / Rational::from_integer(-2))
        }
        EntropyKind::LogarithmicNegativity { n, traced_color } => {
            let traced = ColorSet::from_slice(&[*traced_color]);
            let g = generate(&FamilySpec::Pt {
                d,
                k: 2 * n,
                blocks: FamilySpec::standard_blocks(d, &traced)?,
            })?;
            s_of(&g)
        }
        EntropyKind::RealignmentScaling { n, traced_color } => {
            let traced = ColorSet::from_slice(&[*traced_color]);
            let g = generate(&FamilySpec::Rm {
                d,
                n: *n,
                blocks: FamilySpec::standard_blocks(d, &traced)?,
            })?;
            s_of(&g)
        }
    }
}

/// Catalan number, exact.
pub fn catalan(k: usize) -> u64 {
    let mut binom = 1u128;
    for i in 0..k {
        binom = binom * (2 * k - i) as u128 / (i + 1) as u128;
    }
    (binom / (k as u128 + 1))
        .to_u64()
        .expect("catalan fits u64 at the sizes used here")
}
