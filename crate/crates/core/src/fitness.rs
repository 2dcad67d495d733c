//! Fitness families: linear functions, separable additively decomposed
//! functions (with Royal Road as a special case) and exponential scaling.
//!
//! Every family carries its f-based level partition: with weights sorted in
//! descending order `a_1 ≥ … ≥ a_k`, level `j` holds the points with
//! `a_1 + … + a_j ≤ f(x) < a_1 + … + a_{j+1}`, and the top level `k` holds the
//! optima. For linear functions `k = n`, for decomposed functions `k` is the
//! number of blocks.

use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{Error, Result};

/// Largest block accepted for truth-table predicates.
pub const MAX_BLOCK_BITS: usize = 20;

/// Largest optimum for which sums of integer weights stay exact in `f64`.
const EXACT_LIMIT: f64 = 9_007_199_254_740_992.0; // 2^53

fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidFitness(msg.into()))
}

/// Prefix thresholds `t_0 = 0 < t_1 < … < t_k = f*` of an f-based partition.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelPartition {
    thresholds: Vec<f64>,
}

impl LevelPartition {
    /// Builds the partition from weights sorted in descending order.
    fn from_sorted_weights(weights: &[f64]) -> Self {
        let mut thresholds = Vec::with_capacity(weights.len() + 1);
        let mut acc = 0.0;
        thresholds.push(acc);
        for &w in weights {
            acc += w;
            thresholds.push(acc);
        }
        Self { thresholds }
    }

    /// Number of levels `m`.
    pub fn level_count(&self) -> usize {
        self.thresholds.len()
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    pub fn top(&self) -> usize {
        self.thresholds.len() - 1
    }

    /// The unique `j` with `t_j ≤ value < t_{j+1}` (top level when `value ≥ f*`).
    pub fn level_of_value(&self, value: f64) -> usize {
        self.thresholds.partition_point(|&t| t <= value).saturating_sub(1)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinearSpec {
    weights: Vec<f64>,
    unit: bool,
    integral: bool,
    optimum: f64,
    partition: LevelPartition,
}

impl LinearSpec {
    /// Weights must be positive, finite and sorted in descending order; use
    /// [`canonicalize_weights`] for arbitrary non-zero weights.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return invalid("linear function needs at least one weight");
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return invalid(format!("weights must be positive and finite, found {w}"));
        }
        if weights.windows(2).any(|p| p[0] < p[1]) {
            return invalid("weights must be sorted in descending order");
        }
        let optimum: f64 = weights.iter().sum();
        let integral = weights.iter().all(|w| w.fract() == 0.0);
        if integral && optimum > EXACT_LIMIT {
            return invalid(format!("optimum {optimum} exceeds exact integer range"));
        }
        if !optimum.is_finite() {
            return invalid("optimum overflows");
        }
        let unit = weights.iter().all(|&w| w == 1.0);
        let partition = LevelPartition::from_sorted_weights(&weights);
        Ok(Self {
            weights,
            unit,
            integral,
            optimum,
            partition,
        })
    }

    pub fn from_integers(weights: &[u64]) -> Result<Self> {
        Self::new(weights.iter().map(|&w| w as f64).collect())
    }

    pub fn onemax(n: usize) -> Self {
        Self::new(vec![1.0; n]).expect("onemax dimension must be positive")
    }

    pub fn n(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn is_onemax(&self) -> bool {
        self.unit
    }

    pub fn evaluate_unchecked(&self, x: &BitString) -> f64 {
        if self.unit {
            x.count_ones() as f64
        } else {
            x.ones_iter().map(|i| self.weights[i]).sum()
        }
    }
}

/// One block `σ_ℓ` of a decomposed function with its Boolean predicate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecompBlock {
    /// 0-based positions; bit `k` of an assignment index is the value at `positions[k]`.
    pub positions: Vec<usize>,
    /// Assignment indices on which the predicate is 1.
    pub satisfying: Vec<u64>,
    pub weight: u64,
}

#[derive(Clone, Debug, PartialEq)]
struct CompiledBlock {
    positions: Vec<usize>,
    table: Vec<u64>,
    satisfying: Vec<u64>,
    weight: f64,
}

impl CompiledBlock {
    fn assignment(&self, x: &BitString) -> u64 {
        self.positions
            .iter()
            .enumerate()
            .fold(0u64, |acc, (k, &p)| acc | ((x.get(p) as u64) << k))
    }

    fn solved_by(&self, assignment: u64) -> bool {
        (self.table[(assignment / 64) as usize] >> (assignment % 64)) & 1 == 1
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecompSpec {
    n: usize,
    blocks: Vec<CompiledBlock>,
    optimum: f64,
    partition: LevelPartition,
}

impl DecompSpec {
    /// Blocks must partition `0..n`; they are reordered by descending weight
    /// (stable) so that the level partition uses `a_1 ≥ … ≥ a_N`.
    pub fn new(n: usize, blocks: Vec<DecompBlock>) -> Result<Self> {
        if n == 0 || blocks.is_empty() {
            return invalid("decomposed function needs n ≥ 1 and at least one block");
        }
        let mut seen = vec![false; n];
        let mut compiled = Vec::with_capacity(blocks.len());
        for (b, block) in blocks.into_iter().enumerate() {
            let size = block.positions.len();
            if size == 0 || size > MAX_BLOCK_BITS {
                return invalid(format!("block {b} has {size} bits, expected 1..={MAX_BLOCK_BITS}"));
            }
            for &p in &block.positions {
                if p >= n {
                    return invalid(format!("block {b} position {p} out of range"));
                }
                if std::mem::replace(&mut seen[p], true) {
                    return invalid(format!("position {p} appears in more than one block"));
                }
            }
            if block.weight == 0 {
                return invalid(format!("block {b} has zero weight"));
            }
            if block.satisfying.is_empty() {
                return invalid(format!("block {b} predicate is unsatisfiable"));
            }
            let entries = 1u64 << size;
            let mut table = vec![0u64; entries.div_ceil(64) as usize];
            for &a in &block.satisfying {
                if a >= entries {
                    return invalid(format!("block {b} assignment {a} needs more than {size} bits"));
                }
                table[(a / 64) as usize] |= 1 << (a % 64);
            }
            let mut satisfying = block.satisfying;
            satisfying.sort_unstable();
            satisfying.dedup();
            compiled.push(CompiledBlock {
                positions: block.positions,
                table,
                satisfying,
                weight: block.weight as f64,
            });
        }
        if let Some(p) = seen.iter().position(|s| !s) {
            return invalid(format!("position {p} is not covered by any block"));
        }
        compiled.sort_by(|a, b| b.weight.total_cmp(&a.weight));
        let weights: Vec<f64> = compiled.iter().map(|b| b.weight).collect();
        let optimum: f64 = weights.iter().sum();
        if optimum > EXACT_LIMIT {
            return invalid("optimum exceeds exact integer range");
        }
        Ok(Self {
            n,
            partition: LevelPartition::from_sorted_weights(&weights),
            blocks: compiled,
            optimum,
        })
    }

    /// `RoyalRoad_r`: `n/r` contiguous blocks of length `r`, each solved only
    /// by all ones. Unit weights unless `weights` is given (one per block, in
    /// block order).
    pub fn royal_road(n: usize, r: usize, weights: Option<&[u64]>) -> Result<Self> {
        if r == 0 || n == 0 || n % r != 0 {
            return invalid(format!("royal road needs r ≥ 1 dividing n (n={n}, r={r})"));
        }
        if r > MAX_BLOCK_BITS {
            return invalid(format!("block length {r} exceeds {MAX_BLOCK_BITS}"));
        }
        let count = n / r;
        if let Some(w) = weights {
            if w.len() != count {
                return invalid(format!("expected {count} block weights, got {}", w.len()));
            }
        }
        let blocks = (0..count)
            .map(|i| DecompBlock {
                positions: (i * r..(i + 1) * r).collect(),
                satisfying: vec![(1u64 << r) - 1],
                weight: weights.map_or(1, |w| w[i]),
            })
            .collect();
        Self::new(n, blocks)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    /// Longest block length `r`.
    pub fn max_block_len(&self) -> usize {
        self.blocks.iter().map(|b| b.positions.len()).max().unwrap_or(0)
    }

    /// Block weights in descending order.
    pub fn weights(&self) -> Vec<f64> {
        self.blocks.iter().map(|b| b.weight).collect()
    }

    /// Positions and satisfying assignments of block `k` (descending-weight order).
    pub fn block(&self, k: usize) -> (&[usize], &[u64]) {
        let b = &self.blocks[k];
        (&b.positions, &b.satisfying)
    }

    pub fn solved(&self, k: usize, x: &BitString) -> bool {
        let b = &self.blocks[k];
        b.solved_by(b.assignment(x))
    }

    pub fn evaluate_unchecked(&self, x: &BitString) -> f64 {
        self.blocks
            .iter()
            .filter(|b| b.solved_by(b.assignment(x)))
            .map(|b| b.weight)
            .sum()
    }
}

/// An unscaled fitness function.
#[derive(Clone, Debug, PartialEq)]
pub enum Unscaled {
    Linear(LinearSpec),
    Decomp(DecompSpec),
}

impl Unscaled {
    fn n(&self) -> usize {
        match self {
            Unscaled::Linear(l) => l.n(),
            Unscaled::Decomp(d) => d.n(),
        }
    }

    fn evaluate_unchecked(&self, x: &BitString) -> f64 {
        match self {
            Unscaled::Linear(l) => l.evaluate_unchecked(x),
            Unscaled::Decomp(d) => d.evaluate_unchecked(x),
        }
    }

    fn integral(&self) -> bool {
        match self {
            Unscaled::Linear(l) => l.integral,
            Unscaled::Decomp(_) => true,
        }
    }
}

/// `c^{f(x)}` for an inner function `f` and base `c > 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScaledSpec {
    inner: Unscaled,
    base: f64,
    ln_base: f64,
}

impl ScaledSpec {
    pub fn new(inner: Unscaled, base: f64) -> Result<Self> {
        if !(base.is_finite() && base > 1.0) {
            return invalid(format!("scaling base must be a finite number > 1, got {base}"));
        }
        Ok(Self {
            inner,
            base,
            ln_base: base.ln(),
        })
    }

    pub fn inner(&self) -> &Unscaled {
        &self.inner
    }

    pub fn base(&self) -> f64 {
        self.base
    }

    /// `ln(c^{f(x)}) = f(x)·ln c`; the power itself is never formed.
    pub fn log_value(&self, x: &BitString) -> Result<f64> {
        x.check_len(self.inner.n())?;
        Ok(self.inner.evaluate_unchecked(x) * self.ln_base)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum FitnessSpec {
    Linear(LinearSpec),
    Decomp(DecompSpec),
    Scaled(ScaledSpec),
}

impl FitnessSpec {
    /// Unscaled linear functions must have integer weights; real weights are
    /// accepted only inside [`FitnessSpec::scaled`].
    pub fn linear(spec: LinearSpec) -> Result<Self> {
        if !spec.integral {
            return invalid("non-integer weights are only supported under exponential scaling");
        }
        Ok(FitnessSpec::Linear(spec))
    }

    pub fn onemax(n: usize) -> Self {
        FitnessSpec::Linear(LinearSpec::onemax(n))
    }

    pub fn decomp(spec: DecompSpec) -> Self {
        FitnessSpec::Decomp(spec)
    }

    pub fn scaled(inner: Unscaled, base: f64) -> Result<Self> {
        Ok(FitnessSpec::Scaled(ScaledSpec::new(inner, base)?))
    }

    fn unscaled_ref(&self) -> UnscaledRef<'_> {
        match self {
            FitnessSpec::Linear(l) => UnscaledRef::Linear(l),
            FitnessSpec::Decomp(d) => UnscaledRef::Decomp(d),
            FitnessSpec::Scaled(s) => match &s.inner {
                Unscaled::Linear(l) => UnscaledRef::Linear(l),
                Unscaled::Decomp(d) => UnscaledRef::Decomp(d),
            },
        }
    }

    pub fn as_linear(&self) -> Option<&LinearSpec> {
        match self.unscaled_ref() {
            UnscaledRef::Linear(l) => Some(l),
            UnscaledRef::Decomp(_) => None,
        }
    }

    pub fn as_decomp(&self) -> Option<&DecompSpec> {
        match self.unscaled_ref() {
            UnscaledRef::Decomp(d) => Some(d),
            UnscaledRef::Linear(_) => None,
        }
    }

    pub fn n(&self) -> usize {
        match self.unscaled_ref() {
            UnscaledRef::Linear(l) => l.n(),
            UnscaledRef::Decomp(d) => d.n(),
        }
    }

    /// Scaling base `c` when the spec is exponentially scaled.
    pub fn scale_base(&self) -> Option<f64> {
        match self {
            FitnessSpec::Scaled(s) => Some(s.base),
            _ => None,
        }
    }

    pub fn is_integral(&self) -> bool {
        match self {
            FitnessSpec::Linear(l) => l.integral,
            FitnessSpec::Decomp(_) => true,
            FitnessSpec::Scaled(s) => s.inner.integral(),
        }
    }

    /// The unscaled value `f(x)`. For a scaled spec this is the exponent of
    /// `c^{f(x)}`; see [`FitnessSpec::scaled_log_value`].
    pub fn evaluate(&self, x: &BitString) -> Result<f64> {
        x.check_len(self.n())?;
        Ok(self.evaluate_unchecked(x))
    }

    #[inline]
    pub fn evaluate_unchecked(&self, x: &BitString) -> f64 {
        match self.unscaled_ref() {
            UnscaledRef::Linear(l) => l.evaluate_unchecked(x),
            UnscaledRef::Decomp(d) => d.evaluate_unchecked(x),
        }
    }

    /// `f(x)·ln c` for scaled specs; `None` for unscaled ones.
    pub fn scaled_log_value(&self, x: &BitString) -> Option<Result<f64>> {
        match self {
            FitnessSpec::Scaled(s) => Some(s.log_value(x)),
            _ => None,
        }
    }

    /// `f* = Σ a_i` (of the unscaled function).
    pub fn optimum_value(&self) -> f64 {
        match self.unscaled_ref() {
            UnscaledRef::Linear(l) => l.optimum,
            UnscaledRef::Decomp(d) => d.optimum,
        }
    }

    pub fn partition(&self) -> &LevelPartition {
        match self.unscaled_ref() {
            UnscaledRef::Linear(l) => &l.partition,
            UnscaledRef::Decomp(d) => &d.partition,
        }
    }

    pub fn level_count(&self) -> usize {
        self.partition().level_count()
    }

    pub fn level_of(&self, x: &BitString) -> Result<usize> {
        Ok(self.partition().level_of_value(self.evaluate(x)?))
    }

    /// Largest weight `a_1`.
    pub fn max_weight(&self) -> f64 {
        match self.unscaled_ref() {
            UnscaledRef::Linear(l) => l.weights[0],
            UnscaledRef::Decomp(d) => d.blocks[0].weight,
        }
    }
}

enum UnscaledRef<'a> {
    Linear(&'a LinearSpec),
    Decomp(&'a DecompSpec),
}

/// Sorted positive weights plus the transform back to the caller's coordinates.
///
/// With `y = to_canonical(x)`, `f_raw(x) = f_canonical(y) + offset`, where
/// `offset` is the sum of the negative raw weights. Bit-flips and position
/// permutations preserve the bitwise-mutation law, so an EA on the canonical
/// function behaves exactly like one on the raw function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CanonicalWeights {
    pub weights: Vec<f64>,
    /// `permutation[k]` is the 1-based raw position that canonical position `k+1` came from.
    pub permutation: Vec<usize>,
    /// `flip_mask[i]` is true when raw position `i+1` had a negative weight.
    pub flip_mask: Vec<bool>,
    pub offset: f64,
}

impl CanonicalWeights {
    pub fn to_canonical(&self, x: &BitString) -> Result<BitString> {
        x.check_len(self.flip_mask.len())?;
        let mut y = BitString::zeros(x.len());
        for (k, &p) in self.permutation.iter().enumerate() {
            y.set(k, x.get(p - 1) ^ self.flip_mask[p - 1]);
        }
        Ok(y)
    }

    pub fn from_canonical(&self, y: &BitString) -> Result<BitString> {
        y.check_len(self.permutation.len())?;
        let mut x = BitString::zeros(y.len());
        for (k, &p) in self.permutation.iter().enumerate() {
            x.set(p - 1, y.get(k) ^ self.flip_mask[p - 1]);
        }
        Ok(x)
    }

    /// Maps a canonical fitness value back to the raw function's value.
    pub fn raw_value(&self, canonical: f64) -> f64 {
        canonical + self.offset
    }
}

/// Sorts `|w_i|` descending (stable) and records the permutation and sign flips.
pub fn canonicalize_weights(raw: &[f64]) -> Result<CanonicalWeights> {
    if raw.is_empty() {
        return invalid("weights must be non-empty");
    }
    if let Some(i) = raw.iter().position(|w| *w == 0.0 || !w.is_finite()) {
        return invalid(format!("weight at position {} is zero or non-finite", i + 1));
    }
    let mut order: Vec<usize> = (0..raw.len()).collect();
    order.sort_by(|&a, &b| raw[b].abs().total_cmp(&raw[a].abs()));
    Ok(CanonicalWeights {
        weights: order.iter().map(|&i| raw[i].abs()).collect(),
        permutation: order.iter().map(|&i| i + 1).collect(),
        flip_mask: raw.iter().map(|&w| w < 0.0).collect(),
        offset: raw.iter().filter(|w| **w < 0.0).sum(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bs(s: &str) -> BitString {
        s.parse().unwrap()
    }

    fn linear(w: &[u64]) -> FitnessSpec {
        FitnessSpec::linear(LinearSpec::from_integers(w).unwrap()).unwrap()
    }

    #[test]
    fn evaluate_examples() {
        assert_eq!(linear(&[3, 2, 1]).evaluate(&bs("110")).unwrap(), 5.0);
        assert_eq!(FitnessSpec::onemax(5).evaluate(&bs("10101")).unwrap(), 3.0);
        let rr = FitnessSpec::decomp(DecompSpec::royal_road(4, 2, None).unwrap());
        assert_eq!(rr.evaluate(&bs("1101")).unwrap(), 1.0);
    }

    #[test]
    fn evaluate_rejects_wrong_length() {
        assert!(matches!(
            FitnessSpec::onemax(5).evaluate(&bs("101")),
            Err(Error::LengthMismatch { expected: 5, actual: 3 })
        ));
    }

    #[test]
    fn scaled_log_value_examples() {
        let inner = Unscaled::Linear(LinearSpec::onemax(100));
        let s = FitnessSpec::scaled(inner.clone(), 4.7).unwrap();
        assert_eq!(s.scaled_log_value(&BitString::zeros(100)).unwrap().unwrap(), 0.0);
        let v = s.scaled_log_value(&BitString::ones(100)).unwrap().unwrap();
        assert!((v - 154.756_250_871_601_3).abs() < 1e-9, "{v}");

        let e = FitnessSpec::scaled(Unscaled::Linear(LinearSpec::onemax(7)), std::f64::consts::E).unwrap();
        let v = e.scaled_log_value(&BitString::ones(7)).unwrap().unwrap();
        assert!((v - 7.0).abs() < 1e-12);
        assert!(FitnessSpec::onemax(3).scaled_log_value(&bs("111")).is_none());
        assert!(FitnessSpec::scaled(inner, 1.0).is_err());
    }

    #[test]
    fn optimum_examples() {
        assert_eq!(linear(&[3, 2, 1]).optimum_value(), 6.0);
        assert_eq!(FitnessSpec::onemax(17).optimum_value(), 17.0);
        let rr = FitnessSpec::decomp(DecompSpec::royal_road(20, 2, None).unwrap());
        assert_eq!(rr.optimum_value(), 10.0);
        assert_eq!(rr.level_count(), 11);
    }

    #[test]
    fn level_examples() {
        let f = linear(&[3, 2, 1]);
        assert_eq!(f.level_count(), 4);
        assert_eq!(f.level_of(&bs("110")).unwrap(), 2);
        assert_eq!(f.level_of(&bs("111")).unwrap(), 3);
        assert_eq!(f.level_of(&bs("001")).unwrap(), 0);
        let om = FitnessSpec::onemax(6);
        for k in 0..=6u64 {
            let x = BitString::from_index(6, (1 << k) - 1);
            assert_eq!(om.level_of(&x).unwrap(), k as usize);
        }
    }

    #[test]
    fn canonicalize_examples() {
        let c = canonicalize_weights(&[1.0, 3.0, 2.0]).unwrap();
        assert_eq!(c.weights, vec![3.0, 2.0, 1.0]);
        assert_eq!(c.permutation, vec![2, 3, 1]);
        assert!(c.flip_mask.iter().all(|f| !f));

        let c = canonicalize_weights(&[-2.0, 5.0]).unwrap();
        assert_eq!(c.weights, vec![5.0, 2.0]);
        assert_eq!(c.flip_mask, vec![true, false]);
        let canon = FitnessSpec::Linear(LinearSpec::new(c.weights.clone()).unwrap());
        for v in 0..4 {
            let x = BitString::from_index(2, v);
            let raw = -2.0 * x.get(0) as u8 as f64 + 5.0 * x.get(1) as u8 as f64;
            let y = c.to_canonical(&x).unwrap();
            assert_eq!(c.raw_value(canon.evaluate(&y).unwrap()), raw, "x={x}");
            assert_eq!(c.from_canonical(&y).unwrap(), x);
        }

        assert!(canonicalize_weights(&[0.0, 1.0]).is_err());
    }

    #[test]
    fn non_canonical_or_real_weights_rejected_where_required() {
        assert!(LinearSpec::new(vec![1.0, 2.0]).is_err());
        assert!(LinearSpec::new(vec![2.0, -1.0]).is_err());
        let real = LinearSpec::new(vec![2.5, 1.0]).unwrap();
        assert!(FitnessSpec::linear(real.clone()).is_err());
        assert!(FitnessSpec::scaled(Unscaled::Linear(real), 2.0).is_ok());
    }

    #[test]
    fn decomp_validation() {
        let block = |p: Vec<usize>, s: Vec<u64>| DecompBlock { positions: p, satisfying: s, weight: 1 };
        assert!(DecompSpec::new(3, vec![block(vec![0, 1], vec![3])]).is_err(), "uncovered");
        assert!(DecompSpec::new(2, vec![block(vec![0, 1], vec![3]), block(vec![1], vec![1])]).is_err());
        assert!(DecompSpec::new(2, vec![block(vec![0, 1], vec![])]).is_err(), "unsatisfiable");
        assert!(DecompSpec::new(2, vec![block(vec![0, 1], vec![4])]).is_err(), "assignment too wide");
        assert!(DecompSpec::royal_road(5, 2, None).is_err());
    }

    #[test]
    fn decomp_with_xor_predicate_has_multiple_optima() {
        // Single block over two bits, solved by 01 or 10.
        let d = DecompSpec::new(
            2,
            vec![DecompBlock { positions: vec![0, 1], satisfying: vec![1, 2], weight: 4 }],
        )
        .unwrap();
        let f = FitnessSpec::decomp(d);
        assert_eq!(f.evaluate(&bs("10")).unwrap(), 4.0);
        assert_eq!(f.evaluate(&bs("01")).unwrap(), 4.0);
        assert_eq!(f.evaluate(&bs("11")).unwrap(), 0.0);
        assert_eq!(f.level_of(&bs("01")).unwrap(), 1);
    }

    fn exhaustive_partition_soundness(f: &FitnessSpec) {
        let n = f.n();
        let m = f.level_count();
        let fstar = f.optimum_value();
        let t = f.partition().thresholds().to_vec();
        let mut by_level: Vec<Vec<f64>> = vec![Vec::new(); m];
        for v in 0..(1u64 << n) {
            let x = BitString::from_index(n, v);
            let fx = f.evaluate(&x).unwrap();
            let j = f.level_of(&x).unwrap();
            assert!(t[j] <= fx);
            if j + 1 < m {
                assert!(fx < t[j + 1]);
            }
            assert_eq!(j == m - 1, fx == fstar);
            by_level[j].push(fx);
        }
        for j in 0..m.saturating_sub(1) {
            let hi = by_level[j].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let lo = by_level[j + 1..]
                .iter()
                .flatten()
                .cloned()
                .fold(f64::INFINITY, f64::min);
            assert!(hi < lo || by_level[j].is_empty(), "level {j} not f-based");
        }
    }

    #[test]
    fn partition_soundness_exhaustive() {
        exhaustive_partition_soundness(&FitnessSpec::onemax(12));
        exhaustive_partition_soundness(&linear(&[9, 7, 7, 4, 3, 3, 2, 1, 1, 1]));
        exhaustive_partition_soundness(&linear(&[1000, 1]));
        exhaustive_partition_soundness(&FitnessSpec::decomp(DecompSpec::royal_road(12, 3, None).unwrap()));
        exhaustive_partition_soundness(&FitnessSpec::decomp(
            DecompSpec::royal_road(12, 2, Some(&[1, 5, 2, 2, 9, 1])).unwrap(),
        ));
    }

    proptest! {
        #[test]
        fn decomp_singletons_agree_with_linear(raw in proptest::collection::vec(1u64..50, 1..=12)) {
            let mut w = raw.clone();
            w.sort_unstable_by(|a, b| b.cmp(a));
            let lin = linear(&w);
            let blocks = w
                .iter()
                .enumerate()
                .map(|(i, &a)| DecompBlock { positions: vec![i], satisfying: vec![1], weight: a })
                .collect();
            let dec = FitnessSpec::decomp(DecompSpec::new(w.len(), blocks).unwrap());
            for v in 0..(1u64 << w.len()) {
                let x = BitString::from_index(w.len(), v);
                prop_assert_eq!(lin.evaluate(&x).unwrap(), dec.evaluate(&x).unwrap());
                prop_assert_eq!(lin.level_of(&x).unwrap(), dec.level_of(&x).unwrap());
            }
        }

        #[test]
        fn scaling_preserves_order(
            w in proptest::collection::vec(1u64..20, 1..=10),
            base in 1.0001f64..50.0,
            a in any::<u64>(),
            b in any::<u64>(),
        ) {
            let mut w = w;
            w.sort_unstable_by(|a, b| b.cmp(a));
            let n = w.len();
            let lin = LinearSpec::from_integers(&w).unwrap();
            let f = FitnessSpec::Linear(lin.clone());
            let s = FitnessSpec::scaled(Unscaled::Linear(lin), base).unwrap();
            let mask = (1u64 << n) - 1;
            let x = BitString::from_index(n, a & mask);
            let y = BitString::from_index(n, b & mask);
            let (fx, fy) = (f.evaluate(&x).unwrap(), f.evaluate(&y).unwrap());
            let (gx, gy) = (
                s.scaled_log_value(&x).unwrap().unwrap(),
                s.scaled_log_value(&y).unwrap().unwrap(),
            );
            prop_assert_eq!(fx >= fy, gx >= gy);
            prop_assert_eq!(fx > fy, gx > gy);
        }

        #[test]
        fn canonical_transform_preserves_values(raw in proptest::collection::vec(
            prop_oneof![-30i64..=-1, 1i64..=30], 1..=10)
        ) {
            let raw: Vec<f64> = raw.into_iter().map(|w| w as f64).collect();
            let c = canonicalize_weights(&raw).unwrap();
            let canon = FitnessSpec::Linear(LinearSpec::new(c.weights.clone()).unwrap());
            for v in 0..(1u64 << raw.len()) {
                let x = BitString::from_index(raw.len(), v);
                let direct: f64 = x.ones_iter().map(|i| raw[i]).sum();
                let y = c.to_canonical(&x).unwrap();
                prop_assert_eq!(c.raw_value(canon.evaluate(&y).unwrap()), direct);
            }
        }
    }
}
