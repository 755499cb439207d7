//! Free-probability combinatorics: non-crossing partitions, moment–cumulant
//! transforms, operator-valued semicircular moments over diagonal algebras,
//! and Wick-word trace pairings.
//!
//! Indexing convention: `c^(n)` takes `n` argument slots and corresponds to
//! partition blocks covering `n+1` X-factors. In the conventional κ-indexed
//! calculus this is `κ_{n+1}`; "semicircular" means only `c^(1)` (= κ₂) is
//! nonzero. Blocks of size one never occur, so every distribution handled
//! here is centred; a nonzero first moment is rejected.

use num::rational::BigRational;
use num::{BigInt, One, Signed, Zero};
use std::collections::BTreeMap;
use std::fmt;

use crate::circle::CirclePoint;
use crate::extent::Extent;
use crate::rep::Representation;

/// Combinatorial guard for partition-indexed sums.
pub const NC_GUARD: usize = 16;
/// Guards for the finite-dimensional reduction check.
pub const THM_ORDER_GUARD: usize = 8;
pub const THM_DIM_GUARD: usize = 16;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum FreeprobError {
    #[error("size guard exceeded: {0}")]
    SizeGuard(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("pairing against a symbolic (irrational) angle is not supported")]
    SymbolicAngle,
}

fn q(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

// ---------------------------------------------------------------------------
// Non-crossing partitions
// ---------------------------------------------------------------------------

/// A non-crossing set partition of {1, …, n}, blocks sorted by least element.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct NCPartition {
    pub n: usize,
    pub blocks: Vec<Vec<usize>>,
}

impl NCPartition {
    pub fn is_noncrossing(&self) -> bool {
        for (i, b1) in self.blocks.iter().enumerate() {
            for b2 in &self.blocks[i + 1..] {
                // a < b < c < d with {a,c} and {b,d} split across blocks
                for &a in b1 {
                    for &c in b1 {
                        if a >= c {
                            continue;
                        }
                        for &b in b2 {
                            for &d in b2 {
                                if b >= d {
                                    continue;
                                }
                                if a < b && b < c && c < d {
                                    return false;
                                }
                                if b < a && a < d && d < c {
                                    return false;
                                }
                            }
                        }
                    }
                }
            }
        }
        true
    }

    pub fn block_of(&self, i: usize) -> &[usize] {
        self.blocks
            .iter()
            .find(|b| b.contains(&i))
            .expect("index inside partition")
    }
}

impl fmt::Display for NCPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, b) in self.blocks.iter().enumerate() {
            if i > 0 {
                write!(f, " | ")?;
            }
            for (j, x) in b.iter().enumerate() {
                if j > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{x}")?;
            }
        }
        Ok(())
    }
}

fn nc_range(lo: usize, hi: usize, min_block: usize) -> Vec<Vec<Vec<usize>>> {
    if lo > hi {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    // Choose the block containing `lo` as lo plus a subset of (lo, hi];
    // the gaps between consecutive block elements are partitioned
    // independently, which is exactly the non-crossing condition on a
    // contiguous range.
    let rest: Vec<usize> = (lo + 1..=hi).collect();
    let m = rest.len();
    for mask in 0..(1u32 << m) {
        let mut block = vec![lo];
        for (i, &x) in rest.iter().enumerate() {
            if mask >> i & 1 == 1 {
                block.push(x);
            }
        }
        if block.len() < min_block {
            continue;
        }
        // Partition each gap and the tail independently.
        let mut segments = Vec::new();
        for w in block.windows(2) {
            segments.push((w[0] + 1, w[1] - 1));
        }
        segments.push((block.last().unwrap() + 1, hi));
        let mut partials: Vec<Vec<Vec<usize>>> = vec![Vec::new()];
        for (a, b) in segments {
            let subs = nc_range(a, b, min_block);
            let mut next = Vec::new();
            for p in &partials {
                for s in &subs {
                    let mut combined = p.clone();
                    combined.extend(s.iter().cloned());
                    next.push(combined);
                }
            }
            partials = next;
        }
        for mut p in partials {
            p.insert(0, block.clone());
            out.push(p);
        }
    }
    out
}

/// All non-crossing partitions of {1, …, n}; |result| = Catalan(n).
pub fn enumerate_nc(n: usize) -> Result<Vec<NCPartition>, FreeprobError> {
    if n == 0 || n > NC_GUARD {
        return Err(FreeprobError::SizeGuard(format!(
            "enumerate_nc requires 1 ≤ n ≤ {NC_GUARD}, got {n}"
        )));
    }
    let mut out: Vec<NCPartition> = nc_range(1, n, 1)
        .into_iter()
        .map(|mut blocks| {
            blocks.sort();
            NCPartition { n, blocks }
        })
        .collect();
    out.sort();
    Ok(out)
}

/// Non-crossing partitions with every block of size at least two — the
/// index set of the moment–cumulant relation for centred distributions.
pub fn enumerate_nc_min2(n: usize) -> Result<Vec<NCPartition>, FreeprobError> {
    if n == 0 || n > NC_GUARD {
        return Err(FreeprobError::SizeGuard(format!(
            "partition order must satisfy 1 ≤ n ≤ {NC_GUARD}, got {n}"
        )));
    }
    let mut out: Vec<NCPartition> = nc_range(1, n, 2)
        .into_iter()
        .map(|mut blocks| {
            blocks.sort();
            NCPartition { n, blocks }
        })
        .collect();
    out.sort();
    Ok(out)
}

// ---------------------------------------------------------------------------
// Scalar moment–cumulant transform
// ---------------------------------------------------------------------------

/// Moments m₀..m_K of the centred distribution with cumulants
/// `c[i] = c^(i+1)` (a block of size s contributes the factor `c[s-2]`).
pub fn moments_from_cumulants(
    c: &[BigRational],
    order: usize,
) -> Result<Vec<BigRational>, FreeprobError> {
    if order > NC_GUARD {
        return Err(FreeprobError::SizeGuard(format!(
            "moment order must be ≤ {NC_GUARD}, got {order}"
        )));
    }
    let weight = |s: usize| -> BigRational {
        if s >= 2 && s - 2 < c.len() {
            c[s - 2].clone()
        } else {
            BigRational::zero()
        }
    };
    let mut m = vec![BigRational::zero(); order + 1];
    m[0] = BigRational::one();
    for n in 1..=order {
        // Condition on the block containing position 1: size s, leaving s
        // gaps of total size n - s, each an independent sub-problem.
        let mut total = BigRational::zero();
        for s in 2..=n {
            let w = weight(s);
            if w.is_zero() {
                continue;
            }
            // g[t] = Σ_{i₁+…+i_s = t} m_{i₁} ⋯ m_{i_s}, by iterated convolution.
            let mut g = vec![BigRational::zero(); n - s + 1];
            g[0] = BigRational::one();
            for _ in 0..s {
                let mut h = vec![BigRational::zero(); n - s + 1];
                for t in 0..=n - s {
                    for i in 0..=t {
                        let add = &g[t - i] * &m[i];
                        h[t] += add;
                    }
                }
                g = h;
            }
            total += w * g[n - s].clone();
        }
        m[n] = total;
    }
    Ok(m)
}

/// Inverse of [`moments_from_cumulants`]: recovers `c^(1)..c^(order-1)`
/// from the moment sequence m₀..m_order. Requires m₀ = 1 and m₁ = 0.
pub fn cumulants_from_moments(
    m: &[BigRational],
    order: usize,
) -> Result<Vec<BigRational>, FreeprobError> {
    if order > NC_GUARD {
        return Err(FreeprobError::SizeGuard(format!(
            "cumulant order must be ≤ {NC_GUARD}, got {order}"
        )));
    }
    if m.len() <= order {
        return Err(FreeprobError::DimensionMismatch(format!(
            "need moments m₀..m_{order}, got {} entries",
            m.len()
        )));
    }
    if !m[0].is_one() {
        return Err(FreeprobError::InvalidDistribution(
            "m₀ must equal 1".to_string(),
        ));
    }
    if order >= 1 && !m[1].is_zero() {
        return Err(FreeprobError::InvalidDistribution(
            "nonzero mean: m₁ must vanish".to_string(),
        ));
    }
    let mut c: Vec<BigRational> = Vec::new();
    for n in 2..=order {
        // With c^(n-1) set to zero, the recursion reproduces every term of
        // m_n except the full-block one, which isolates c^(n-1).
        let trial = moments_from_cumulants(&c, n)?;
        c.push(&m[n] - &trial[n]);
    }
    Ok(c)
}

// ---------------------------------------------------------------------------
// Operator-valued semicircular moments over a diagonal algebra
// ---------------------------------------------------------------------------

/// Diagonal element of C^k with exact entries.
pub type Diag = Vec<BigRational>;

fn diag_mul(a: &Diag, b: &Diag) -> Diag {
    a.iter().zip(b).map(|(x, y)| x * y).collect()
}

fn diag_add(a: &Diag, b: &Diag) -> Diag {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn diag_ones(k: usize) -> Diag {
    vec![BigRational::one(); k]
}

fn diag_zero(k: usize) -> Diag {
    vec![BigRational::zero(); k]
}

/// A semicircular element over the diagonal algebra C^k with trace weights
/// `tau` and covariance map `eta` (a nonnegative k×k matrix acting on
/// diagonals).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OVDistribution {
    pub dim: usize,
    pub tau: Vec<BigRational>,
    pub eta: Vec<Vec<BigRational>>,
}

impl OVDistribution {
    pub fn new(
        tau: Vec<BigRational>,
        eta: Vec<Vec<BigRational>>,
    ) -> Result<OVDistribution, FreeprobError> {
        let dim = tau.len();
        if dim == 0 {
            return Err(FreeprobError::InvalidDistribution(
                "algebra dimension must be positive".to_string(),
            ));
        }
        let total: BigRational = tau.iter().cloned().sum();
        if !total.is_one() || tau.iter().any(|t| !t.is_positive()) {
            return Err(FreeprobError::InvalidDistribution(
                "trace weights must be positive and sum to 1".to_string(),
            ));
        }
        if eta.len() != dim || eta.iter().any(|row| row.len() != dim) {
            return Err(FreeprobError::DimensionMismatch(format!(
                "eta must be {dim}×{dim}"
            )));
        }
        if eta.iter().flatten().any(|e| e.is_negative()) {
            return Err(FreeprobError::InvalidDistribution(
                "eta must be entrywise nonnegative".to_string(),
            ));
        }
        Ok(OVDistribution { dim, tau, eta })
    }

    /// Semicircular over C^k with the uniform trace and η = τ(·)·1.
    pub fn standard(k: usize) -> OVDistribution {
        let tau: Vec<BigRational> = vec![BigRational::new(BigInt::one(), BigInt::from(k)); k];
        let eta = vec![tau.clone(); k];
        OVDistribution {
            dim: k,
            tau,
            eta,
        }
    }

    pub fn apply_eta(&self, a: &Diag) -> Diag {
        self.eta
            .iter()
            .map(|row| row.iter().zip(a).map(|(r, x)| r * x).sum())
            .collect()
    }

    pub fn trace(&self, a: &Diag) -> BigRational {
        self.tau.iter().zip(a).map(|(t, x)| t * x).sum()
    }
}

/// E(X a₁ X a₂ ⋯ a_n X): sum over non-crossing pairings of the n+1
/// X-positions, with η applied to each nested sub-expectation inside-out.
pub fn ov_moment(dist: &OVDistribution, args: &[Diag]) -> Result<Diag, FreeprobError> {
    for a in args {
        if a.len() != dist.dim {
            return Err(FreeprobError::DimensionMismatch(format!(
                "argument has {} entries, algebra has {}",
                a.len(),
                dist.dim
            )));
        }
    }
    Ok(ov_moment_inner(dist, args))
}

fn ov_moment_inner(dist: &OVDistribution, args: &[Diag]) -> Diag {
    let n = args.len();
    let k = dist.dim;
    if (n + 1) % 2 == 1 {
        return diag_zero(k);
    }
    // Word X₁ a₁ X₂ ⋯ a_n X_{n+1}. Pair X₁ with X_j: the enclosed word
    // a₁ X₂ ⋯ X_{j-1} a_{j-1} is evaluated first and fed through η, then
    // multiplied into the remainder a_j X_{j+1} ⋯ X_{n+1}.
    let mut total = diag_zero(k);
    for j in 2..=n + 1 {
        let inner = if j == 2 {
            args[0].clone()
        } else {
            let mid = ov_moment_inner(dist, &args[1..j - 2]);
            diag_mul(&diag_mul(&args[0], &mid), &args[j - 2])
        };
        if inner.iter().all(|x| x.is_zero()) {
            continue;
        }
        let paired = dist.apply_eta(&inner);
        let contribution = if j <= n {
            let rest = ov_moment_inner(dist, &args[j..]);
            diag_mul(&diag_mul(&paired, &args[j - 1]), &rest)
        } else {
            paired
        };
        total = diag_add(&total, &contribution);
    }
    total
}

// ---------------------------------------------------------------------------
// Finite-dimensional reduction check
// ---------------------------------------------------------------------------

/// Evaluates the nested cumulant product of a min-block-2 non-crossing
/// partition of X-positions lo..hi against diagonal arguments b₁..b_n
/// (b_i sits between X_i and X_{i+1}), using the supplied cumulant oracle.
fn eval_partition_range(
    lo: usize,
    hi: usize,
    part: &NCPartition,
    b: &[Diag],
    k: usize,
    cumulant: &mut dyn FnMut(&[Diag]) -> Diag,
) -> Diag {
    if lo > hi {
        return diag_ones(k);
    }
    let block: Vec<usize> = part.block_of(lo).to_vec();
    let s = block.len();
    let mut slot_args: Vec<Diag> = Vec::with_capacity(s - 1);
    for t in 0..s - 1 {
        let (p, pn) = (block[t], block[t + 1]);
        let arg = if pn == p + 1 {
            b[p - 1].clone()
        } else {
            let gap = eval_partition_range(p + 1, pn - 1, part, b, k, cumulant);
            diag_mul(&diag_mul(&b[p - 1], &gap), &b[pn - 2])
        };
        slot_args.push(arg);
    }
    let head = cumulant(&slot_args);
    let last = *block.last().unwrap();
    if last < hi {
        let tail = eval_partition_range(last + 1, hi, part, b, k, cumulant);
        diag_mul(&diag_mul(&head, &b[last - 1]), &tail)
    } else {
        head
    }
}

/// E_A-slice of a B = C^m ⊗ C^k element, embedded back into B.
/// B-index (i,j) ↦ i·k + j with i the C^m leg.
fn slice_embed(b: &Diag, k: usize, m: usize) -> Diag {
    let a: Vec<BigRational> = (0..k)
        .map(|j| {
            let sum: BigRational = (0..m).map(|i| b[i * k + j].clone()).sum();
            sum / q(m as i64)
        })
        .collect();
    (0..m * k).map(|idx| a[idx % k].clone()).collect()
}

/// Memo for the A-valued cumulants of B, keyed by argument list.
type KappaCache = BTreeMap<Vec<Diag>, Diag>;

/// A-valued cumulants of elements of B with respect to E_A, by recursive
/// Möbius inversion over non-crossing partitions with the interval-nested
/// evaluation convention (gap values multiply into the slot on their left).
fn kappa_b(args: &[Diag], k: usize, m: usize, cache: &mut KappaCache) -> Diag {
    if let Some(v) = cache.get(args) {
        return v.clone();
    }
    let j = args.len();
    let mut product = diag_ones(m * k);
    for a in args {
        product = diag_mul(&product, a);
    }
    let moment = slice_embed(&product, k, m);
    if j == 1 {
        cache.insert(args.to_vec(), moment.clone());
        return moment;
    }
    let mut lower = diag_zero(m * k);
    for p in enumerate_nc(j).expect("guarded order") {
        if p.blocks.len() == 1 {
            continue;
        }
        lower = diag_add(&lower, &eval_pure_b(1, j, &p, args, k, m, cache));
    }
    let out: Diag = moment
        .iter()
        .zip(&lower)
        .map(|(x, y)| x - y)
        .collect();
    cache.insert(args.to_vec(), out.clone());
    out
}

/// Nested evaluation of a pure-B non-crossing partition on positions
/// lo..hi (1-based, inclusive) against arguments args[position-1].
fn eval_pure_b(
    lo: usize,
    hi: usize,
    part: &NCPartition,
    args: &[Diag],
    k: usize,
    m: usize,
    cache: &mut KappaCache,
) -> Diag {
    if lo > hi {
        return diag_ones(m * k);
    }
    let block: Vec<usize> = part.block_of(lo).to_vec();
    let s = block.len();
    let mut slot_args: Vec<Diag> = Vec::with_capacity(s);
    for t in 0..s {
        let mut a = args[block[t] - 1].clone();
        if t + 1 < s && block[t + 1] > block[t] + 1 {
            let gap = eval_pure_b(block[t] + 1, block[t + 1] - 1, part, args, k, m, cache);
            a = diag_mul(&a, &gap);
        }
        slot_args.push(a);
    }
    let head = kappa_b(&slot_args, k, m, cache);
    let last = *block.last().unwrap();
    if last < hi {
        let tail = eval_pure_b(last + 1, hi, part, args, k, m, cache);
        diag_mul(&head, &tail)
    } else {
        head
    }
}

/// E_A of a word alternating X (represented as `None`) and B-elements,
/// for X free from B over A and A-valued semicircular with covariance
/// τ_A(·)·1. Sums over non-crossing partitions with homogeneous blocks:
/// X-blocks are pairs contributing τ_B(gap)·1, B-blocks contribute their
/// A-valued cumulants with nested gap values multiplied in. Memoized on
/// contiguous subranges of the word.
struct WordEval<'a> {
    word: &'a [Option<Diag>],
    k: usize,
    m: usize,
    /// Tag distinguishing the final letter; ranges not touching it are
    /// shared across evaluations that differ only there.
    tail_tag: usize,
    memo: &'a mut BTreeMap<(usize, usize, usize), Diag>,
    kappa: &'a mut KappaCache,
}

impl WordEval<'_> {
    fn eval(&mut self, lo: usize, hi: usize) -> Diag {
        let dim = self.m * self.k;
        if lo >= hi {
            return diag_ones(dim);
        }
        let key = (
            lo,
            hi,
            if hi == self.word.len() {
                self.tail_tag
            } else {
                usize::MAX
            },
        );
        if let Some(v) = self.memo.get(&key) {
            return v.clone();
        }
        let mut total = diag_zero(dim);
        match &self.word[lo] {
            None => {
                // pair the leading X with a later X
                for j in lo + 1..hi {
                    if self.word[j].is_some() {
                        continue;
                    }
                    let gap = self.eval(lo + 1, j);
                    let scale: BigRational =
                        gap.iter().cloned().sum::<BigRational>() / q(dim as i64);
                    if scale.is_zero() {
                        continue;
                    }
                    let rest = self.eval(j + 1, hi);
                    for (acc, r) in total.iter_mut().zip(&rest) {
                        *acc += &scale * r;
                    }
                }
            }
            Some(first) => {
                // choose the B-block of the leading letter
                let others: Vec<usize> = (lo + 1..hi)
                    .filter(|&p| self.word[p].is_some())
                    .collect();
                let nb = others.len();
                for mask in 0u32..1 << nb {
                    let mut block = vec![lo];
                    for (i, &p) in others.iter().enumerate() {
                        if mask >> i & 1 == 1 {
                            block.push(p);
                        }
                    }
                    let mut slot_args: Vec<Diag> = Vec::with_capacity(block.len());
                    let mut dead = false;
                    for t in 0..block.len() {
                        let mut a = if t == 0 {
                            first.clone()
                        } else {
                            self.word[block[t]].clone().unwrap()
                        };
                        if t + 1 < block.len() && block[t + 1] > block[t] + 1 {
                            let gap = self.eval(block[t] + 1, block[t + 1]);
                            if gap.iter().all(|x| x.is_zero()) {
                                dead = true;
                                break;
                            }
                            a = diag_mul(&a, &gap);
                        }
                        slot_args.push(a);
                    }
                    if dead {
                        continue;
                    }
                    let head = kappa_b(&slot_args, self.k, self.m, self.kappa);
                    if head.iter().all(|x| x.is_zero()) {
                        continue;
                    }
                    let rest = self.eval(block.last().unwrap() + 1, hi);
                    total = diag_add(&total, &diag_mul(&head, &rest));
                }
            }
        }
        self.memo.insert(key, total.clone());
        total
    }
}

/// Models B = C^m ⊗ C^k with E_A the slice by the C^m trace, takes the
/// A-valued standard semicircular X, forms the B-valued moments
/// E_B(X b₁ X ⋯ b_n X) = embed(E_A-moment of the sliced arguments), and
/// checks that the resulting B-valued cumulants vanish except at order 1,
/// where they equal (τ⊗τ)(·)·1. Verified exactly on all basis tuples up
/// to `order`.
pub fn verify_thm51_reduction(
    k: usize,
    m: usize,
    order: usize,
) -> Result<bool, FreeprobError> {
    if order > THM_ORDER_GUARD {
        return Err(FreeprobError::SizeGuard(format!(
            "order must be ≤ {THM_ORDER_GUARD}, got {order}"
        )));
    }
    if k == 0 || m == 0 || k * m > THM_DIM_GUARD {
        return Err(FreeprobError::SizeGuard(format!(
            "need 1 ≤ k·m ≤ {THM_DIM_GUARD}, got k={k}, m={m}"
        )));
    }
    let dim_b = m * k;
    let tau_b = |b: &Diag| -> BigRational {
        let sum: BigRational = b.iter().cloned().sum();
        sum / q(dim_b as i64)
    };

    let mut kappa: KappaCache = BTreeMap::new();

    // E_B(X b₁ X ⋯ b_n X), computed from the amalgamated free-product
    // structure alone: E_A of any word in X and B is a sum over
    // non-crossing homogeneous partitions — X-blocks are pairs weighted by
    // η(·) = τ_A(E_A ·)·1 and B-blocks carry the A-valued cumulants of B —
    // and E_B is recovered from the trace pairings τ(w·e_d) against the
    // minimal projections of B.
    fn phi(
        args: &[Diag],
        k: usize,
        m: usize,
        kappa: &mut KappaCache,
    ) -> Diag {
        let dim_b = m * k;
        let mut out = diag_zero(dim_b);
        let mut memo: BTreeMap<(usize, usize, usize), Diag> = BTreeMap::new();
        for d in 0..dim_b {
            // word: X b₁ X b₂ ⋯ b_n X e_d
            let mut word: Vec<Option<Diag>> = Vec::with_capacity(2 * args.len() + 2);
            word.push(None);
            for b in args {
                word.push(Some(b.clone()));
                word.push(None);
            }
            word.push(Some(basis_vec(dim_b, d)));
            let len = word.len();
            let mut ev = WordEval {
                word: &word,
                k,
                m,
                tail_tag: d,
                memo: &mut memo,
                kappa,
            };
            let value = ev.eval(0, len);
            // φ[d] = τ(w·e_d)/τ_B(e_d) = τ_B(value)·mk = Σ coords
            out[d] = value.iter().cloned().sum();
        }
        out
    }

    // The construction is equivariant under relabelling each tensor leg,
    // so the top order only needs checking on orbit representatives.
    let leg_maps = leg_permutation_maps(k, m);
    let top = order.saturating_sub(1);

    // B-valued cumulants on basis tuples, by recursive inversion over
    // min-block-2 non-crossing partitions; extended multilinearly.
    let mut table: BTreeMap<(usize, Vec<usize>), Diag> = BTreeMap::new();
    for n in 1..order {
        let parts = enumerate_nc_min2(n + 1)?;
        let tuples = basis_tuples(dim_b, n);
        for tuple in tuples {
            let at_top = n == top;
            if at_top {
                let canonical = leg_maps.iter().all(|map| {
                    let mapped: Vec<usize> = tuple.iter().map(|&x| map[x]).collect();
                    tuple <= mapped
                });
                if !canonical {
                    continue;
                }
            }
            let args: Vec<Diag> = tuple.iter().map(|&i| basis_vec(dim_b, i)).collect();
            let mut lower = diag_zero(dim_b);
            for p in &parts {
                if p.blocks.len() == 1 {
                    continue;
                }
                let mut oracle = |slot_args: &[Diag]| -> Diag {
                    eval_cumulant_multilinear(&table, slot_args, dim_b)
                };
                let v = eval_partition_range(1, n + 1, p, &args, dim_b, &mut oracle);
                lower = diag_add(&lower, &v);
            }
            let moment = phi(&args, k, m, &mut kappa);
            let c: Diag = moment
                .iter()
                .zip(&lower)
                .map(|(x, y)| x - y)
                .collect();
            let ok = if n == 1 {
                let expected: Diag = vec![tau_b(&args[0]); dim_b];
                c == expected
            } else {
                c.iter().all(|x| x.is_zero())
            };
            if !ok {
                return Ok(false);
            }
            if !at_top {
                table.insert((n, tuple), c);
            }
        }
    }
    Ok(true)
}

/// Index maps of B = C^m ⊗ C^k induced by separately permuting the two
/// legs, used to cut basis tuples down to orbit representatives. Falls
/// back to the identity alone when the group is large.
fn leg_permutation_maps(k: usize, m: usize) -> Vec<Vec<usize>> {
    fn perms(n: usize) -> Vec<Vec<usize>> {
        if n == 1 {
            return vec![vec![0]];
        }
        let mut out = Vec::new();
        for p in perms(n - 1) {
            for pos in 0..n {
                let mut q: Vec<usize> = p.clone();
                q.insert(pos, n - 1);
                out.push(q);
            }
        }
        out
    }
    let factorial = |n: usize| (1..=n).product::<usize>();
    if factorial(k) * factorial(m) > 120 {
        return vec![(0..m * k).collect()];
    }
    let mut maps = Vec::new();
    for sigma in perms(m) {
        for rho in perms(k) {
            maps.push(
                (0..m * k)
                    .map(|idx| sigma[idx / k] * k + rho[idx % k])
                    .collect(),
            );
        }
    }
    maps
}

fn basis_vec(dim: usize, i: usize) -> Diag {
    let mut v = diag_zero(dim);
    v[i] = BigRational::one();
    v
}

fn basis_tuples(dim: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = vec![Vec::new()];
    for _ in 0..n {
        let mut next = Vec::new();
        for t in &out {
            for i in 0..dim {
                let mut u = t.clone();
                u.push(i);
                next.push(u);
            }
        }
        out = next;
    }
    out
}

/// Evaluates a stored basis-tuple cumulant table on arbitrary diagonal
/// arguments by multilinear expansion. Missing orders evaluate to zero.
fn eval_cumulant_multilinear(
    table: &BTreeMap<(usize, Vec<usize>), Diag>,
    args: &[Diag],
    dim: usize,
) -> Diag {
    let n = args.len();
    let mut total = diag_zero(dim);
    let mut idx = vec![0usize; n];
    loop {
        let coeff: BigRational = idx
            .iter()
            .enumerate()
            .map(|(t, &i)| args[t][i].clone())
            .product();
        if !coeff.is_zero() {
            if let Some(c) = table.get(&(n, idx.clone())) {
                for (acc, x) in total.iter_mut().zip(c) {
                    *acc += &coeff * x;
                }
            }
        }
        let mut carry = n;
        while carry > 0 {
            idx[carry - 1] += 1;
            if idx[carry - 1] < dim {
                break;
            }
            idx[carry - 1] = 0;
            carry -= 1;
        }
        if carry == 0 {
            break;
        }
    }
    total
}

// ---------------------------------------------------------------------------
// Wick-word trace pairings
// ---------------------------------------------------------------------------

/// One tensor factor: coordinates in the real space of one almost periodic
/// component (index into the representation's atom list; 2-dim for a
/// non-real eigenvalue pair, 1-dim for a real eigenvalue).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TensorFactor {
    pub component: usize,
    pub coords: Vec<BigRational>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TensorVector {
    pub factors: Vec<TensorFactor>,
}

/// Exact when the value lies in Q; floating (1e-12 tolerance) otherwise.
#[derive(Debug, Clone, PartialEq)]
pub enum PairingValue {
    Exact(BigRational),
    Approx(f64),
}

/// Value in Q[√3]: a + b·√3. Covers all quarter- and sixth-turn (hence
/// twelfth-turn) rotation entries exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Quad {
    a: BigRational,
    b: BigRational,
}

impl Quad {
    fn rational(a: BigRational) -> Quad {
        Quad { a, b: BigRational::zero() }
    }
    fn mul(&self, other: &Quad) -> Quad {
        Quad {
            a: &self.a * &other.a + &self.b * &other.b * q(3),
            b: &self.a * &other.b + &self.b * &other.a,
        }
    }
    fn add(&self, other: &Quad) -> Quad {
        Quad { a: &self.a + &other.a, b: &self.b + &other.b }
    }
    fn scale(&self, c: &BigRational) -> Quad {
        Quad { a: &self.a * c, b: &self.b * c }
    }
    fn to_f64(&self) -> f64 {
        rational_to_f64(&self.a) + rational_to_f64(&self.b) * 3f64.sqrt()
    }
}

fn rational_to_f64(r: &BigRational) -> f64 {
    let n = r.numer().to_string().parse::<f64>().unwrap_or(f64::NAN);
    let d = r.denom().to_string().parse::<f64>().unwrap_or(f64::NAN);
    n / d
}

/// cos and sin of 2π·(t/12) as elements of Q[√3]/2.
fn twelfth_turn(t: i64) -> (Quad, Quad) {
    let t = t.rem_euclid(12);
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let entries = |v: i64| -> Quad {
        // encoding: cos/sin values at twelfths are 0, ±1/2, ±√3/2, ±1
        match v {
            0 => Quad::rational(BigRational::zero()),
            1 => Quad::rational(half.clone()),
            2 => Quad { a: BigRational::zero(), b: half.clone() },
            3 => Quad::rational(BigRational::one()),
            -1 => Quad::rational(-half.clone()),
            -2 => Quad { a: BigRational::zero(), b: -half.clone() },
            -3 => Quad::rational(-BigRational::one()),
            _ => unreachable!(),
        }
    };
    // cos(2πt/12), sin(2πt/12) in the encoding above for t = 0..11
    const COS: [i64; 12] = [3, 2, 1, 0, -1, -2, -3, -2, -1, 0, 1, 2];
    const SIN: [i64; 12] = [0, 1, 2, 3, 2, 1, 0, -1, -2, -3, -2, -1];
    (entries(COS[t as usize]), entries(SIN[t as usize]))
}

enum Acc {
    Quad(Quad),
    Float(f64),
}

/// δ_{n,m} · Π_i ⟨ξ_i, π(g) η_i⟩ with π(g) rotating each two-dimensional
/// component by g times its angle and acting by the eigenvalue sign on
/// one-dimensional components. Exact whenever every rotation angle is a
/// multiple of a twelfth turn; other rational angles fall back to double
/// precision. Symbolic angles are rejected.
pub fn wick_pairing(
    left: &TensorVector,
    right: &TensorVector,
    rep: &Representation,
    g: i64,
) -> Result<PairingValue, FreeprobError> {
    if left.factors.len() != right.factors.len() {
        return Ok(PairingValue::Exact(BigRational::zero()));
    }
    let atoms: Vec<&(CirclePoint, Extent)> = rep.ap_atoms().iter().collect();
    let mut acc = Acc::Quad(Quad::rational(BigRational::one()));
    for (l, r) in left.factors.iter().zip(&right.factors) {
        if l.component >= atoms.len() || r.component >= atoms.len() {
            return Err(FreeprobError::DimensionMismatch(
                "component index out of range".to_string(),
            ));
        }
        if l.component != r.component {
            // Distinct components are orthogonal.
            return Ok(PairingValue::Exact(BigRational::zero()));
        }
        let (angle, _) = atoms[l.component];
        if !angle.symbolic().is_empty() {
            return Err(FreeprobError::SymbolicAngle);
        }
        let real = angle.is_identity() || angle.is_half();
        let expect_dim = if real { 1 } else { 2 };
        if l.coords.len() != expect_dim || r.coords.len() != expect_dim {
            return Err(FreeprobError::DimensionMismatch(format!(
                "component of dimension {expect_dim} given {} and {} coordinates",
                l.coords.len(),
                r.coords.len()
            )));
        }
        let rotated = angle.pow_i64(g);
        if real {
            // eigenvalue ±1: rotation is the sign (−1)^(g·[angle = 1/2])
            let sign = if rotated.is_half() { q(-1) } else { q(1) };
            let factor = &l.coords[0] * &r.coords[0] * sign;
            acc = match acc {
                Acc::Quad(v) => Acc::Quad(v.scale(&factor)),
                Acc::Float(v) => Acc::Float(v * rational_to_f64(&factor)),
            };
            continue;
        }
        let beta = rotated.torsion();
        let twelve = q(12) * beta;
        let factor: Result<(Quad, Quad), f64> = if twelve.is_integer() {
            let t = twelve.to_integer();
            let t: i64 = t.to_string().parse().expect("small turn index");
            Ok(twelfth_turn(t))
        } else {
            let ang = 2.0 * std::f64::consts::PI * rational_to_f64(beta);
            Err(ang)
        };
        // ⟨ξ, R η⟩ for R = [[c, -s], [s, c]]
        match factor {
            Ok((c, s)) => {
                let inner = c
                    .scale(&(&l.coords[0] * &r.coords[0] + &l.coords[1] * &r.coords[1]))
                    .add(&s.scale(
                        &(&l.coords[1] * &r.coords[0] - &l.coords[0] * &r.coords[1]),
                    ));
                acc = match acc {
                    Acc::Quad(v) => Acc::Quad(v.mul(&inner)),
                    Acc::Float(v) => Acc::Float(v * inner.to_f64()),
                };
            }
            Err(ang) => {
                let (s, c) = ang.sin_cos();
                let inner = c
                    * (rational_to_f64(&l.coords[0]) * rational_to_f64(&r.coords[0])
                        + rational_to_f64(&l.coords[1]) * rational_to_f64(&r.coords[1]))
                    + s * (rational_to_f64(&l.coords[1]) * rational_to_f64(&r.coords[0])
                        - rational_to_f64(&l.coords[0]) * rational_to_f64(&r.coords[1]));
                acc = match acc {
                    Acc::Quad(v) => Acc::Float(v.to_f64() * inner),
                    Acc::Float(v) => Acc::Float(v * inner),
                };
            }
        }
    }
    Ok(match acc {
        Acc::Quad(v) if v.b.is_zero() => PairingValue::Exact(v.a),
        Acc::Quad(v) => PairingValue::Approx(v.to_f64()),
        Acc::Float(v) => PairingValue::Approx(v),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circle::SymbolTable;

    fn catalan(n: usize) -> usize {
        let mut c = vec![0usize; n + 1];
        c[0] = 1;
        for i in 1..=n {
            c[i] = (0..i).map(|k| c[k] * c[i - 1 - k]).sum();
        }
        c[n]
    }

    #[test]
    fn nc_counts_match_catalan() {
        for n in 1..=10 {
            let parts = enumerate_nc(n).unwrap();
            assert_eq!(parts.len(), catalan(n), "n = {n}");
            // duplicate-free and actually non-crossing
            let mut sorted = parts.clone();
            sorted.dedup();
            assert_eq!(sorted.len(), parts.len());
            for p in &parts {
                assert!(p.is_noncrossing());
            }
        }
    }

    /// Oracle: filter all set partitions through the crossing predicate.
    #[test]
    fn nc_enumeration_matches_bruteforce_filter() {
        for n in 1..=7 {
            let mut brute: Vec<NCPartition> = Vec::new();
            // restricted-growth enumeration of all set partitions
            let mut rgs = vec![0usize; n];
            loop {
                let nblocks = rgs.iter().max().unwrap() + 1;
                let mut blocks = vec![Vec::new(); nblocks];
                for (i, &b) in rgs.iter().enumerate() {
                    blocks[b].push(i + 1);
                }
                let p = NCPartition { n, blocks };
                if p.is_noncrossing() {
                    brute.push(p);
                }
                // next restricted growth string
                let mut i = n;
                loop {
                    if i == 1 {
                        i = 0;
                        break;
                    }
                    i -= 1;
                    let cap = rgs[..i].iter().max().unwrap() + 1;
                    if rgs[i] < cap {
                        rgs[i] += 1;
                        for v in rgs[i + 1..].iter_mut() {
                            *v = 0;
                        }
                        i = 1;
                        break;
                    }
                }
                if i == 0 {
                    break;
                }
            }
            brute.sort();
            assert_eq!(enumerate_nc(n).unwrap(), brute, "n = {n}");
        }
    }

    #[test]
    fn semicircular_moments_are_catalan() {
        let c = vec![q(1)];
        let m = moments_from_cumulants(&c, 12).unwrap();
        let expected = [1, 0, 1, 0, 2, 0, 5, 0, 14, 0, 42, 0, 132];
        for (i, &e) in expected.iter().enumerate() {
            assert_eq!(m[i], q(e), "m_{i}");
        }
    }

    #[test]
    fn variance_scales_pairings() {
        let v = BigRational::new(BigInt::from(3), BigInt::from(7));
        let m = moments_from_cumulants(&[v.clone()], 4).unwrap();
        assert_eq!(m[2], v);
        assert_eq!(m[4], q(2) * &v * &v);
    }

    /// Oracle: the recursion must agree with the explicit sum over
    /// min-block-2 non-crossing partitions, weighted per block size.
    #[test]
    fn moment_recursion_matches_partition_sum() {
        let c = vec![q(2), q(-1), q(5), BigRational::new(BigInt::from(1), BigInt::from(3))];
        let m = moments_from_cumulants(&c, 8).unwrap();
        for n in 1..=8usize {
            let mut total = BigRational::zero();
            for p in enumerate_nc_min2(n).unwrap() {
                let mut w = BigRational::one();
                for b in &p.blocks {
                    let s = b.len();
                    w *= if s - 2 < c.len() { c[s - 2].clone() } else { BigRational::zero() };
                }
                total += w;
            }
            assert_eq!(m[n], total, "order {n}");
        }
    }

    #[test]
    fn moment_cumulant_roundtrip() {
        let c = vec![q(1), q(4), q(0), q(-2), q(3)];
        let m = moments_from_cumulants(&c, 12).unwrap();
        let back = cumulants_from_moments(&m, 12).unwrap();
        for (i, ci) in c.iter().enumerate() {
            assert_eq!(&back[i], ci, "c^({})", i + 1);
        }
        for extra in &back[c.len()..] {
            assert!(extra.is_zero());
        }
    }

    #[test]
    fn gaussian_fourth_moment_reveals_nonsemicircularity() {
        // m₂ = 1, m₄ = 3: the order-4 relation gives 3 = 2·1 + c^(3).
        let m = vec![q(1), q(0), q(1), q(0), q(3)];
        let c = cumulants_from_moments(&m, 4).unwrap();
        assert_eq!(c[0], q(1));
        assert_eq!(c[1], q(0));
        assert_eq!(c[2], q(1));
    }

    #[test]
    fn delta_distribution_has_zero_cumulants() {
        let m = vec![q(1), q(0), q(0), q(0), q(0), q(0), q(0)];
        let c = cumulants_from_moments(&m, 6).unwrap();
        assert!(c.iter().all(|x| x.is_zero()));
    }

    #[test]
    fn size_guards() {
        assert!(matches!(enumerate_nc(17), Err(FreeprobError::SizeGuard(_))));
        assert!(matches!(
            moments_from_cumulants(&[q(1)], 17),
            Err(FreeprobError::SizeGuard(_))
        ));
    }

    fn half() -> BigRational {
        BigRational::new(BigInt::one(), BigInt::from(2))
    }

    #[test]
    fn ov_moment_spec_examples() {
        let d = OVDistribution::standard(2);
        // E(X b X) = η(b) = τ(b)·1
        let b = vec![q(1), q(0)];
        assert_eq!(ov_moment(&d, &[b.clone()]).unwrap(), vec![half(), half()]);
        // odd X-count vanishes
        assert_eq!(
            ov_moment(&d, &[b.clone(), b.clone()]).unwrap(),
            vec![q(0), q(0)]
        );
        // E(X 1 X 1 X 1 X) = 2·1 (two non-crossing pairings of 4 points)
        let one = vec![q(1), q(1)];
        assert_eq!(
            ov_moment(&d, &[one.clone(), one.clone(), one.clone()]).unwrap(),
            vec![q(2), q(2)]
        );
    }

    #[test]
    fn ov_moment_scalar_case_matches_scalar_transform() {
        let d = OVDistribution::standard(1);
        let m = moments_from_cumulants(&[q(1)], 9).unwrap();
        for n in (1..=8).step_by(2) {
            let args = vec![vec![q(1)]; n];
            let v = ov_moment(&d, &args).unwrap();
            assert_eq!(v[0], m[n + 1], "word with {} X's", n + 1);
        }
    }

    #[test]
    fn ov_moment_is_tracial_under_cyclic_rotation() {
        let d = OVDistribution::standard(3);
        let b: Vec<Diag> = vec![
            vec![q(1), q(0), q(2)],
            vec![q(0), q(1), q(1)],
            vec![q(3), q(1), q(0)],
            vec![q(1), q(1), q(1)],
            vec![q(2), q(0), q(1)],
        ];
        // φ(X b₁ X ⋯ b_{n-1} X b_n) is cyclic in (b₁..b_n)
        for n in [2usize, 4] {
            let args: Vec<Diag> = b[..n].to_vec();
            let base = d.trace(&diag_mul(
                &ov_moment(&d, &args[..n - 1]).unwrap(),
                &args[n - 1],
            ));
            for rot in 1..n {
                let mut rotated = args.clone();
                rotated.rotate_left(rot);
                let v = d.trace(&diag_mul(
                    &ov_moment(&d, &rotated[..n - 1]).unwrap(),
                    &rotated[n - 1],
                ));
                assert_eq!(v, base, "rotation {rot} at n = {n}");
            }
        }
    }

    #[test]
    fn thm51_reduction_holds() {
        assert!(verify_thm51_reduction(1, 1, 4).unwrap());
        assert!(verify_thm51_reduction(2, 2, 4).unwrap());
        assert!(verify_thm51_reduction(2, 2, 6).unwrap());
        assert!(verify_thm51_reduction(3, 1, 4).unwrap());
        assert!(matches!(
            verify_thm51_reduction(2, 2, 9),
            Err(FreeprobError::SizeGuard(_))
        ));
        assert!(matches!(
            verify_thm51_reduction(5, 4, 4),
            Err(FreeprobError::SizeGuard(_))
        ));
    }

    fn quarter_rep() -> Representation {
        Representation::new(
            "w",
            vec![
                (CirclePoint::rational(1, 4), Extent::Finite(1)),
                (CirclePoint::rational(1, 5), Extent::Finite(1)),
                (CirclePoint::half(), Extent::Finite(1)),
            ],
            vec![],
            SymbolTable::empty(),
        )
        .unwrap()
    }

    fn unit(component: usize) -> TensorVector {
        TensorVector {
            factors: vec![TensorFactor {
                component,
                coords: vec![q(1), q(0)],
            }],
        }
    }

    #[test]
    fn wick_quarter_turn_squared_is_minus_one() {
        let rep = quarter_rep();
        // components are sorted: 1/5 before 1/4? atoms sorted by CirclePoint
        let idx = rep
            .ap_atoms()
            .iter()
            .position(|(p, _)| *p == CirclePoint::rational(1, 4))
            .unwrap();
        let v = unit(idx);
        let r = wick_pairing(&v, &v, &rep, 2).unwrap();
        assert_eq!(r, PairingValue::Exact(q(-1)));
    }

    #[test]
    fn wick_rank_mismatch_is_zero() {
        let rep = quarter_rep();
        let idx = rep
            .ap_atoms()
            .iter()
            .position(|(p, _)| *p == CirclePoint::rational(1, 4))
            .unwrap();
        let two = TensorVector {
            factors: vec![unit(idx).factors[0].clone(); 2],
        };
        let three = TensorVector {
            factors: vec![unit(idx).factors[0].clone(); 3],
        };
        assert_eq!(
            wick_pairing(&two, &three, &rep, 1).unwrap(),
            PairingValue::Exact(q(0))
        );
    }

    #[test]
    fn wick_identity_element_squares_inner_product() {
        let rep = quarter_rep();
        let idx = rep
            .ap_atoms()
            .iter()
            .position(|(p, _)| *p == CirclePoint::rational(1, 4))
            .unwrap();
        let xi = TensorVector {
            factors: vec![
                TensorFactor { component: idx, coords: vec![q(1), q(0)] };
                2
            ],
        };
        let eta = TensorVector {
            factors: vec![
                TensorFactor { component: idx, coords: vec![q(3), q(4)] };
                2
            ],
        };
        assert_eq!(
            wick_pairing(&xi, &eta, &rep, 0).unwrap(),
            PairingValue::Exact(q(9))
        );
    }

    #[test]
    fn wick_fifth_turn_falls_back_to_float() {
        let rep = quarter_rep();
        let idx = rep
            .ap_atoms()
            .iter()
            .position(|(p, _)| *p == CirclePoint::rational(1, 5))
            .unwrap();
        let v = unit(idx);
        match wick_pairing(&v, &v, &rep, 1).unwrap() {
            PairingValue::Approx(x) => {
                let expected = (2.0 * std::f64::consts::PI / 5.0).cos();
                assert!((x - expected).abs() < 1e-12);
            }
            other => panic!("expected float fallback, got {other:?}"),
        }
    }

    #[test]
    fn wick_sixth_turn_exact_when_rational() {
        let table = SymbolTable::empty();
        let rep = Representation::new(
            "s",
            vec![(CirclePoint::rational(1, 6), Extent::Finite(1))],
            vec![],
            table,
        )
        .unwrap();
        let v = unit(0);
        // cos(2π/6) = 1/2 on the diagonal; sin part cancels in ⟨e₁, R e₁⟩
        assert_eq!(
            wick_pairing(&v, &v, &rep, 1).unwrap(),
            PairingValue::Exact(half())
        );
        // ⟨e₁, R e₂⟩ = -sin(2π/6) = -√3/2: not rational
        let w = TensorVector {
            factors: vec![TensorFactor {
                component: 0,
                coords: vec![q(0), q(1)],
            }],
        };
        match wick_pairing(&v, &w, &rep, 1).unwrap() {
            PairingValue::Approx(x) => {
                assert!((x + 3f64.sqrt() / 2.0).abs() < 1e-12);
            }
            other => panic!("expected tagged approximation, got {other:?}"),
        }
    }

    #[test]
    fn wick_symbolic_angle_rejected() {
        let table = SymbolTable::new(vec!["t".to_string()]).unwrap();
        let rep = Representation::new(
            "s",
            vec![(CirclePoint::symbol("t"), Extent::Finite(1))],
            vec![],
            table,
        )
        .unwrap();
        let v = unit(0);
        assert_eq!(
            wick_pairing(&v, &v, &rep, 1),
            Err(FreeprobError::SymbolicAngle)
        );
    }

    #[test]
    fn wick_half_turn_sign() {
        let rep = quarter_rep();
        let idx = rep
            .ap_atoms()
            .iter()
            .position(|(p, _)| p.is_half())
            .unwrap();
        let v = TensorVector {
            factors: vec![TensorFactor {
                component: idx,
                coords: vec![q(2)],
            }],
        };
        assert_eq!(
            wick_pairing(&v, &v, &rep, 3).unwrap(),
            PairingValue::Exact(q(-4))
        );
        assert_eq!(
            wick_pairing(&v, &v, &rep, 2).unwrap(),
            PairingValue::Exact(q(4))
        );
    }
}
