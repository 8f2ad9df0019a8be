//! Exact coordinate-resampling Markov semigroup on finite product spaces.
//!
//! Every operator here is computed by full enumeration, with no sampling
//! error: the semigroup action via the subset-sum formula (or an equivalent
//! per-coordinate factorization for many coordinates), the generator as a sum
//! of resampling differences, and the carré du champ operators via their
//! resampling expressions. On a finite space every field is "suitable", which
//! is what makes this engine usable as the exactness oracle for the
//! inequality checks in [`crate::verify`].
//!
//! States are enumerated in mixed-radix order with the **last factor varying
//! fastest**; all serialized field values follow that order.

use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hermitian::{CMatrix, HermitianMatrix, MatrixError, MatrixLiteral};

#[derive(Debug, Error)]
pub enum FiniteError {
    #[error("a product space needs at least one factor")]
    NoFactors,
    #[error("factor {index} has no states")]
    EmptyFactor { index: usize },
    #[error("factor {index} has non-positive or non-finite weight {weight}")]
    BadWeight { index: usize, weight: f64 },
    #[error("factor {index} weights sum to {sum}, expected 1 within 1e-12")]
    WeightSum { index: usize, sum: f64 },
    #[error("factor {index} has {labels} labels for {weights} weights")]
    LabelCount {
        index: usize,
        labels: usize,
        weights: usize,
    },
    #[error("state count {total} exceeds the enumeration cap {cap}")]
    StateCountCap { total: usize, cap: usize },
    #[error("{n} coordinates exceed the semigroup coordinate cap {cap}")]
    CoordinateCap { n: usize, cap: usize },
    #[error("field has {got} values, space has {expected} states")]
    ValueCount { expected: usize, got: usize },
    #[error("field values must share one dimension: found {left} and {right}")]
    MixedDimensions { left: usize, right: usize },
    #[error("fields live on different spaces")]
    SpaceMismatch,
    #[error("fields have different matrix dimensions: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("time must be finite and non-negative, got {t}")]
    InvalidTime { t: f64 },
    #[error("beta must be positive, got {beta}")]
    InvalidBeta { beta: f64 },
    #[error("subset index has bits beyond coordinate {n}")]
    IndexOutOfRange { n: usize },
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

pub type Result<T> = std::result::Result<T, FiniteError>;

/// Default ceiling on the total number of enumerated states.
pub const DEFAULT_ENUMERATION_CAP: usize = 100_000;
/// Hard cap on the coordinate count accepted by the semigroup action.
pub const SEMIGROUP_COORDINATE_CAP: usize = 20;
/// Above this many coordinates the semigroup switches from the 2ⁿ subset-sum
/// formula to the per-coordinate factorized evaluation (same operator).
pub const SUBSET_SUM_MAX_COORDINATES: usize = 12;

/// One coordinate distribution: labelled states with positive weights.
///
/// Weights are renormalized exactly (divided by their sum) on construction.
/// Labels carry the numeric value of each state for building fields; they
/// play no role in the measure itself and serialize as implicit indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Factor {
    labels: Vec<f64>,
    weights: Vec<f64>,
}

impl Factor {
    pub fn new(labels: Vec<f64>, weights: Vec<f64>) -> std::result::Result<Self, String> {
        if labels.len() != weights.len() {
            return Err(format!(
                "{} labels for {} weights",
                labels.len(),
                weights.len()
            ));
        }
        Ok(Self { labels, weights })
    }

    /// Uniform distribution over the given labels.
    pub fn uniform(labels: &[f64]) -> Self {
        Self {
            labels: labels.to_vec(),
            weights: vec![1.0 / labels.len() as f64; labels.len()],
        }
    }

    /// Weighted factor with labels 0, 1, 2, ….
    pub fn from_weights(weights: &[f64]) -> Self {
        Self {
            labels: (0..weights.len()).map(|i| i as f64).collect(),
            weights: weights.to_vec(),
        }
    }

    /// The two-point uniform distribution on {-1, +1}.
    pub fn rademacher() -> Self {
        Self::uniform(&[-1.0, 1.0])
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// An explicitly enumerated finite product space with a product measure.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteProductSpace {
    factors: Vec<Factor>,
    strides: Vec<usize>,
    total: usize,
}

impl FiniteProductSpace {
    pub fn new(factors: Vec<Factor>) -> Result<Self> {
        Self::with_cap(factors, DEFAULT_ENUMERATION_CAP)
    }

    pub fn with_cap(mut factors: Vec<Factor>, cap: usize) -> Result<Self> {
        if factors.is_empty() {
            return Err(FiniteError::NoFactors);
        }
        for (index, f) in factors.iter_mut().enumerate() {
            if f.is_empty() {
                return Err(FiniteError::EmptyFactor { index });
            }
            if f.labels.len() != f.weights.len() {
                return Err(FiniteError::LabelCount {
                    index,
                    labels: f.labels.len(),
                    weights: f.weights.len(),
                });
            }
            for &w in &f.weights {
                if !(w > 0.0) || !w.is_finite() {
                    return Err(FiniteError::BadWeight { index, weight: w });
                }
            }
            let sum: f64 = f.weights.iter().sum();
            if (sum - 1.0).abs() > 1e-12 {
                return Err(FiniteError::WeightSum { index, sum });
            }
            for w in &mut f.weights {
                *w /= sum;
            }
        }
        let mut total: usize = 1;
        for f in &factors {
            total = total
                .checked_mul(f.len())
                .ok_or(FiniteError::StateCountCap { total: usize::MAX, cap })?;
            if total > cap {
                return Err(FiniteError::StateCountCap { total, cap });
            }
        }
        let n = factors.len();
        let mut strides = vec![1usize; n];
        for i in (0..n.saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * factors[i + 1].len();
        }
        Ok(Self {
            factors,
            strides,
            total,
        })
    }

    pub fn coordinates(&self) -> usize {
        self.factors.len()
    }

    pub fn total_states(&self) -> usize {
        self.total
    }

    pub fn factor(&self, i: usize) -> &Factor {
        &self.factors[i]
    }

    #[inline]
    pub fn digit(&self, state: usize, coord: usize) -> usize {
        (state / self.strides[coord]) % self.factors[coord].len()
    }

    pub fn digits(&self, state: usize) -> Vec<usize> {
        (0..self.coordinates())
            .map(|i| self.digit(state, i))
            .collect()
    }

    pub fn index_of(&self, digits: &[usize]) -> usize {
        digits
            .iter()
            .zip(&self.strides)
            .map(|(d, s)| d * s)
            .sum()
    }

    /// Probability of one enumerated state under the product measure.
    pub fn state_weight(&self, state: usize) -> f64 {
        (0..self.coordinates())
            .map(|i| self.factors[i].weights[self.digit(state, i)])
            .product()
    }

    /// Numeric labels of one state, coordinate by coordinate.
    pub fn labels_of(&self, state: usize) -> Vec<f64> {
        (0..self.coordinates())
            .map(|i| self.factors[i].labels[self.digit(state, i)])
            .collect()
    }

    /// State index obtained from `z` by replacing coordinate `coord` with
    /// local state `k`.
    #[inline]
    pub fn replace_coord(&self, state: usize, coord: usize, k: usize) -> usize {
        state - self.digit(state, coord) * self.strides[coord] + k * self.strides[coord]
    }

    /// The interlacing operation: take coordinates in `index` from `w`, the
    /// rest from `z`.
    pub fn interlace(&self, z: usize, w: usize, index: InterlacingIndex) -> Result<usize> {
        index.validate(self.coordinates())?;
        let mut out = 0usize;
        for i in 0..self.coordinates() {
            let d = if index.contains(i) {
                self.digit(w, i)
            } else {
                self.digit(z, i)
            };
            out += d * self.strides[i];
        }
        Ok(out)
    }
}

/// A subset of coordinates, stored as a bitmask.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InterlacingIndex(u32);

impl InterlacingIndex {
    pub fn new(bits: u32) -> Self {
        Self(bits)
    }

    pub fn empty() -> Self {
        Self(0)
    }

    pub fn full(n: usize) -> Self {
        Self(((1u64 << n) - 1) as u32)
    }

    pub fn bits(&self) -> u32 {
        self.0
    }

    #[inline]
    pub fn contains(&self, coord: usize) -> bool {
        self.0 & (1 << coord) != 0
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    fn validate(&self, n: usize) -> Result<()> {
        if n < 32 && self.0 >> n != 0 {
            return Err(FiniteError::IndexOutOfRange { n });
        }
        Ok(())
    }
}

// Shared arithmetic needed by the generic engine core.
trait FieldValue: Clone {
    fn zeros(dim: usize) -> Self;
    fn add_scaled(&mut self, w: f64, other: &Self);
    fn scale(&self, s: f64) -> Self;
}

impl FieldValue for HermitianMatrix {
    fn zeros(dim: usize) -> Self {
        HermitianMatrix::zeros(dim)
    }
    fn add_scaled(&mut self, w: f64, other: &Self) {
        self.add_assign_scaled(w, other);
    }
    fn scale(&self, s: f64) -> Self {
        HermitianMatrix::scale(self, s)
    }
}

impl FieldValue for CMatrix {
    fn zeros(dim: usize) -> Self {
        CMatrix::zeros(dim, dim)
    }
    fn add_scaled(&mut self, w: f64, other: &Self) {
        self.add_assign_scaled(w, other);
    }
    fn scale(&self, s: f64) -> Self {
        self.scale_re(s)
    }
}

/// Marginal average of a field along one coordinate:
/// `out[z] = Σ_k w_i[k] · f[z with coordinate i set to k]`.
fn avg_along<T: FieldValue>(space: &FiniteProductSpace, values: &[T], coord: usize, dim: usize) -> Vec<T> {
    let k_count = space.factors[coord].len();
    let stride = space.strides[coord];
    let weights = &space.factors[coord].weights;
    let mut out: Vec<T> = Vec::with_capacity(values.len());
    for s in 0..values.len() {
        let base = s - space.digit(s, coord) * stride;
        let mut acc = T::zeros(dim);
        for k in 0..k_count {
            acc.add_scaled(weights[k], &values[base + k * stride]);
        }
        out.push(acc);
    }
    out
}

fn expectation_core<T: FieldValue>(space: &FiniteProductSpace, values: &[T], dim: usize) -> T {
    let mut acc = T::zeros(dim);
    for (s, v) in values.iter().enumerate() {
        acc.add_scaled(space.state_weight(s), v);
    }
    acc
}

/// `L f = Σ_i (Avg_i f − f)`, the negated sum of resampling differences.
fn generator_core<T: FieldValue>(space: &FiniteProductSpace, values: &[T], dim: usize) -> Vec<T> {
    let n = space.coordinates();
    let mut out: Vec<T> = values.iter().map(|v| v.scale(-(n as f64))).collect();
    for i in 0..n {
        let avg = avg_along(space, values, i, dim);
        for (o, a) in out.iter_mut().zip(&avg) {
            o.add_scaled(1.0, a);
        }
    }
    out
}

fn semigroup_core<T: FieldValue>(
    space: &FiniteProductSpace,
    values: &[T],
    dim: usize,
    t: f64,
) -> Result<Vec<T>> {
    if !t.is_finite() || t < 0.0 {
        return Err(FiniteError::InvalidTime { t });
    }
    let n = space.coordinates();
    if n > SEMIGROUP_COORDINATE_CAP {
        return Err(FiniteError::CoordinateCap {
            n,
            cap: SEMIGROUP_COORDINATE_CAP,
        });
    }
    if n <= SUBSET_SUM_MAX_COORDINATES {
        Ok(semigroup_subset_sum(space, values, dim, t))
    } else {
        Ok(semigroup_factorized(space, values, dim, t))
    }
}

/// The subset-sum form: `P_t f(z) = Σ_I (1-e^{-t})^{|I|} e^{-t(n-|I|)} ·
/// E_Z f((z;Z)_I)`, evaluated over all 2ⁿ coordinate subsets.
fn semigroup_subset_sum<T: FieldValue>(
    space: &FiniteProductSpace,
    values: &[T],
    dim: usize,
    t: f64,
) -> Vec<T> {
    let n = space.coordinates();
    let decay = (-t).exp();
    let grow = 1.0 - decay;
    let mut out: Vec<T> = vec![T::zeros(dim); values.len()];
    for mask in 0u32..(1u32 << n) {
        let size = mask.count_ones() as i32;
        let coef = grow.powi(size) * decay.powi(n as i32 - size);
        if coef == 0.0 {
            continue;
        }
        let mut partial: Vec<T> = values.to_vec();
        for i in 0..n {
            if mask & (1 << i) != 0 {
                partial = avg_along(space, &partial, i, dim);
            }
        }
        for (o, p) in out.iter_mut().zip(&partial) {
            o.add_scaled(coef, p);
        }
    }
    out
}

/// Equivalent factorized form: apply the one-coordinate kernel
/// `e^{-t}·Id + (1-e^{-t})·Avg_i` for each coordinate in turn.
fn semigroup_factorized<T: FieldValue>(
    space: &FiniteProductSpace,
    values: &[T],
    dim: usize,
    t: f64,
) -> Vec<T> {
    let decay = (-t).exp();
    let grow = 1.0 - decay;
    let mut buf: Vec<T> = values.to_vec();
    for i in 0..space.coordinates() {
        let avg = avg_along(space, &buf, i, dim);
        for (b, a) in buf.iter_mut().zip(&avg) {
            let mut v = b.scale(decay);
            v.add_scaled(grow, a);
            *b = v;
        }
    }
    buf
}

type ResampleCache = Vec<Vec<HermitianMatrix>>;

/// A matrix-valued function on a finite product space: one Hermitian value
/// per enumerated state, in mixed-radix order.
#[derive(Debug, Clone)]
pub struct MatrixField {
    space: Arc<FiniteProductSpace>,
    dim: usize,
    values: Arc<Vec<HermitianMatrix>>,
    // Per-coordinate marginal averages E_Z f((z;Z)_i), filled on first use.
    // Fields are immutable, so sharing the cache across clones is sound.
    resample: Arc<OnceLock<ResampleCache>>,
}

impl PartialEq for MatrixField {
    fn eq(&self, other: &Self) -> bool {
        self.space == other.space && self.dim == other.dim && self.values == other.values
    }
}

impl MatrixField {
    pub fn new(space: Arc<FiniteProductSpace>, values: Vec<HermitianMatrix>) -> Result<Self> {
        if values.len() != space.total_states() {
            return Err(FiniteError::ValueCount {
                expected: space.total_states(),
                got: values.len(),
            });
        }
        let dim = values[0].dim();
        for v in &values {
            if v.dim() != dim {
                return Err(FiniteError::MixedDimensions {
                    left: dim,
                    right: v.dim(),
                });
            }
        }
        Ok(Self {
            space,
            dim,
            values: Arc::new(values),
            resample: Arc::new(OnceLock::new()),
        })
    }

    /// Build a field from a function of the mixed-radix state index.
    pub fn from_fn<F>(space: Arc<FiniteProductSpace>, f: F) -> Result<Self>
    where
        F: FnMut(usize) -> HermitianMatrix,
    {
        let values = (0..space.total_states()).map(f).collect();
        Self::new(space, values)
    }

    /// Build a field from a function of the coordinate labels.
    pub fn from_label_fn<F>(space: Arc<FiniteProductSpace>, mut f: F) -> Result<Self>
    where
        F: FnMut(&[f64]) -> HermitianMatrix,
    {
        let values = (0..space.total_states())
            .map(|s| f(&space.labels_of(s)))
            .collect();
        Self::new(space, values)
    }

    pub fn constant(space: Arc<FiniteProductSpace>, value: HermitianMatrix) -> Self {
        let values = vec![value; space.total_states()];
        Self::new(space, values).expect("constant field is always well formed")
    }

    pub fn space(&self) -> &Arc<FiniteProductSpace> {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn values(&self) -> &[HermitianMatrix] {
        &self.values
    }

    pub fn value(&self, state: usize) -> &HermitianMatrix {
        &self.values[state]
    }

    fn same_layout(&self, other: &MatrixField) -> Result<()> {
        if !Arc::ptr_eq(&self.space, &other.space) && self.space != other.space {
            return Err(FiniteError::SpaceMismatch);
        }
        if self.dim != other.dim {
            return Err(FiniteError::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        Ok(())
    }

    fn wrap(&self, values: Vec<HermitianMatrix>) -> MatrixField {
        MatrixField {
            space: Arc::clone(&self.space),
            dim: self.dim,
            values: Arc::new(values),
            resample: Arc::new(OnceLock::new()),
        }
    }

    fn resample_averages(&self) -> &ResampleCache {
        self.resample.get_or_init(|| {
            (0..self.space.coordinates())
                .map(|i| avg_along(&self.space, &self.values, i, self.dim))
                .collect()
        })
    }

    /// `E_μ f = Σ_z μ(z) f(z)`.
    pub fn expectation(&self) -> HermitianMatrix {
        expectation_core(&self.space, &self.values, self.dim)
    }

    /// Exact semigroup action `P_t f`.
    pub fn semigroup_apply(&self, t: f64) -> Result<MatrixField> {
        Ok(self.wrap(semigroup_core(&self.space, &self.values, self.dim, t)?))
    }

    /// Exact generator `L f = -Σ_i δ_i f`.
    pub fn generator_apply(&self) -> MatrixField {
        let n = self.space.coordinates();
        let cache = self.resample_averages();
        let mut out: Vec<HermitianMatrix> = self
            .values
            .iter()
            .map(|v| v.scale(-(n as f64)))
            .collect();
        for avg in cache {
            for (o, a) in out.iter_mut().zip(avg) {
                o.add_assign_scaled(1.0, a);
            }
        }
        self.wrap(out)
    }

    /// Carré du champ quadratic form
    /// `Γ(f)(z) = ½ Σ_i E_Z (f(z) − f((z;Z)_i))²`, pointwise psd.
    pub fn gamma(&self) -> MatrixField {
        let space = &self.space;
        let mut out = Vec::with_capacity(self.values.len());
        for s in 0..self.values.len() {
            let mut acc = HermitianMatrix::zeros(self.dim);
            for i in 0..space.coordinates() {
                let stride = space.strides[i];
                let digit = space.digit(s, i);
                let base = s - digit * stride;
                let weights = space.factors[i].weights();
                for (k, &w) in weights.iter().enumerate() {
                    if k == digit {
                        continue;
                    }
                    let diff = &self.values[s] - &self.values[base + k * stride];
                    acc.add_assign_scaled(0.5 * w, &diff.square());
                }
            }
            out.push(acc);
        }
        self.wrap(out)
    }

    /// Bilinear carré du champ `Γ(f, g)`; not Hermitian unless f = g.
    pub fn carre_du_champ(&self, other: &MatrixField) -> Result<GeneralField> {
        self.same_layout(other)?;
        let space = &self.space;
        let mut out = Vec::with_capacity(self.values.len());
        for s in 0..self.values.len() {
            let mut acc = CMatrix::zeros(self.dim, self.dim);
            for i in 0..space.coordinates() {
                let stride = space.strides[i];
                let digit = space.digit(s, i);
                let base = s - digit * stride;
                let weights = space.factors[i].weights();
                for (k, &w) in weights.iter().enumerate() {
                    if k == digit {
                        continue;
                    }
                    let df = &self.values[s] - &self.values[base + k * stride];
                    let dg = &other.values[s] - &other.values[base + k * stride];
                    acc.add_assign_scaled(0.5 * w, &df.mul(&dg));
                }
            }
            out.push(acc);
        }
        Ok(GeneralField {
            space: Arc::clone(&self.space),
            dim: self.dim,
            values: out,
        })
    }

    /// Iterated carré du champ quadratic form, by the double-resampling
    /// expression (single-coordinate terms plus cross-coordinate rectangles).
    pub fn gamma2(&self) -> MatrixField {
        let space = &self.space;
        let n = space.coordinates();
        let f = &*self.values;
        let mut out = Vec::with_capacity(f.len());
        for s in 0..f.len() {
            let mut acc = HermitianMatrix::zeros(self.dim);
            for i in 0..n {
                let stride = space.strides[i];
                let digit = space.digit(s, i);
                let base = s - digit * stride;
                let weights = space.factors[i].weights();
                // E_Z (f(z) − f((z;Z)_i))², independent of the second resample.
                for (k, &w) in weights.iter().enumerate() {
                    if k == digit {
                        continue;
                    }
                    let diff = &f[s] - &f[base + k * stride];
                    acc.add_assign_scaled(0.25 * w, &diff.square());
                }
                // E_Z̃ E_Z (f((z;Z̃)_i) − f((z;Z)_i))².
                for (l, &wl) in weights.iter().enumerate() {
                    for (k, &wk) in weights.iter().enumerate() {
                        if k == l {
                            continue;
                        }
                        let diff = &f[base + l * stride] - &f[base + k * stride];
                        acc.add_assign_scaled(0.25 * wl * wk, &diff.square());
                    }
                }
            }
            for i in 0..n {
                for j in 0..n {
                    if i == j {
                        continue;
                    }
                    let (si, di) = (space.strides[i], space.digit(s, i));
                    let (sj, dj) = (space.strides[j], space.digit(s, j));
                    let base = s - di * si - dj * sj;
                    let wi = space.factors[i].weights();
                    let wj = space.factors[j].weights();
                    for (k, &wk) in wi.iter().enumerate() {
                        for (l, &wl) in wj.iter().enumerate() {
                            // f(z) − f((z;Z̃)_i) − f((z;Z)_j) + f(((z;Z̃)_i;Z)_j)
                            let mut rect = f[base + di * si + dj * sj].clone();
                            rect.add_assign_scaled(-1.0, &f[base + k * si + dj * sj]);
                            rect.add_assign_scaled(-1.0, &f[base + di * si + l * sj]);
                            rect.add_assign_scaled(1.0, &f[base + k * si + l * sj]);
                            acc.add_assign_scaled(0.25 * wk * wl, &rect.square());
                        }
                    }
                }
            }
            out.push(acc);
        }
        self.wrap(out)
    }

    /// Bilinear iterated carré du champ `Γ₂(f, g)`.
    pub fn carre_du_champ2(&self, other: &MatrixField) -> Result<GeneralField> {
        self.same_layout(other)?;
        let space = &self.space;
        let n = space.coordinates();
        let f = &*self.values;
        let g = &*other.values;
        let mut out = Vec::with_capacity(f.len());
        for s in 0..f.len() {
            let mut acc = CMatrix::zeros(self.dim, self.dim);
            for i in 0..n {
                let stride = space.strides[i];
                let digit = space.digit(s, i);
                let base = s - digit * stride;
                let weights = space.factors[i].weights();
                for (k, &w) in weights.iter().enumerate() {
                    if k == digit {
                        continue;
                    }
                    let df = &f[s] - &f[base + k * stride];
                    let dg = &g[s] - &g[base + k * stride];
                    acc.add_assign_scaled(0.25 * w, &df.mul(&dg));
                }
                for (l, &wl) in weights.iter().enumerate() {
                    for (k, &wk) in weights.iter().enumerate() {
                        if k == l {
                            continue;
                        }
                        let df = &f[base + l * stride] - &f[base + k * stride];
                        let dg = &g[base + l * stride] - &g[base + k * stride];
                        acc.add_assign_scaled(0.25 * wl * wk, &df.mul(&dg));
                    }
                }
            }
            for i in 0..n {
                for j in 0..n {
                    if i == j {
                        continue;
                    }
                    let (si, di) = (space.strides[i], space.digit(s, i));
                    let (sj, dj) = (space.strides[j], space.digit(s, j));
                    let base = s - di * si - dj * sj;
                    let wi = space.factors[i].weights();
                    let wj = space.factors[j].weights();
                    for (k, &wk) in wi.iter().enumerate() {
                        for (l, &wl) in wj.iter().enumerate() {
                            let mut rf = f[base + di * si + dj * sj].clone();
                            rf.add_assign_scaled(-1.0, &f[base + k * si + dj * sj]);
                            rf.add_assign_scaled(-1.0, &f[base + di * si + l * sj]);
                            rf.add_assign_scaled(1.0, &f[base + k * si + l * sj]);
                            let mut rg = g[base + di * si + dj * sj].clone();
                            rg.add_assign_scaled(-1.0, &g[base + k * si + dj * sj]);
                            rg.add_assign_scaled(-1.0, &g[base + di * si + l * sj]);
                            rg.add_assign_scaled(1.0, &g[base + k * si + l * sj]);
                            acc.add_assign_scaled(0.25 * wk * wl, &rf.mul(&rg));
                        }
                    }
                }
            }
            out.push(acc);
        }
        Ok(GeneralField {
            space: Arc::clone(&self.space),
            dim: self.dim,
            values: out,
        })
    }

    /// Matrix Dirichlet form `E_μ Γ(f, f)`.
    pub fn dirichlet_energy(&self) -> HermitianMatrix {
        self.gamma().expectation()
    }

    /// Bilinear Dirichlet form `E_μ Γ(f, g)`.
    pub fn dirichlet_form(&self, other: &MatrixField) -> Result<CMatrix> {
        Ok(self.carre_du_champ(other)?.expectation())
    }

    /// `Var_μ f = E_μ f² − (E_μ f)²`, positive semidefinite.
    pub fn matrix_variance(&self) -> HermitianMatrix {
        let mean = self.expectation();
        let mut acc = HermitianMatrix::zeros(self.dim);
        for (s, v) in self.values.iter().enumerate() {
            acc.add_assign_scaled(self.space.state_weight(s), &v.square());
        }
        acc.add_assign_scaled(-1.0, &mean.square());
        acc
    }

    /// Exact `E_μ tr |f − E_μ f|^p` for p ≥ 1.
    pub fn trace_moment(&self, p: f64) -> Result<f64> {
        let mean = self.expectation();
        let mut acc = 0.0;
        for (s, v) in self.values.iter().enumerate() {
            acc += self.space.state_weight(s) * (v - &mean).trace_power_abs(p)?;
        }
        Ok(acc)
    }

    /// Exact normalized trace mgf `E_μ tr̄ exp(θ (f − E_μ f))`.
    pub fn trace_mgf(&self, theta: f64) -> Result<f64> {
        let mean = self.expectation();
        let mut acc = 0.0;
        for (s, v) in self.values.iter().enumerate() {
            let centered = (v - &mean).scale(theta);
            acc += self.space.state_weight(s) * centered.expm()?.normalized_trace();
        }
        Ok(acc)
    }

    /// Variance proxy `v_f = max_z ‖Γ(f)(z)‖`.
    pub fn variance_proxy(&self) -> Result<f64> {
        let gamma = self.gamma();
        let mut best = 0.0f64;
        for v in gamma.values() {
            best = best.max(v.op_norm()?);
        }
        Ok(best)
    }

    /// Exponential mean of the carré du champ,
    /// `r_f(β) = β^{-1} log E_μ tr̄ exp(β Γ(f))`.
    ///
    /// Evaluated spectrally with a log-sum-exp shift so large β do not
    /// overflow the matrix exponential.
    pub fn r_beta(&self, beta: f64) -> Result<f64> {
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(FiniteError::InvalidBeta { beta });
        }
        let gamma = self.gamma();
        let mut spectra: Vec<(f64, Vec<f64>)> = Vec::with_capacity(gamma.values().len());
        let mut shift = f64::NEG_INFINITY;
        for (s, v) in gamma.values().iter().enumerate() {
            let eigs = v.eigenvalues()?;
            for &l in &eigs {
                shift = shift.max(beta * l);
            }
            spectra.push((self.space.state_weight(s), eigs));
        }
        let mut acc = 0.0;
        for (w, eigs) in &spectra {
            let sum: f64 = eigs.iter().map(|&l| (beta * l - shift).exp()).sum();
            acc += w * sum / self.dim as f64;
        }
        Ok((shift + acc.ln()) / beta)
    }

    /// Pointwise square f², again a Hermitian field.
    pub fn square_field(&self) -> MatrixField {
        self.wrap(self.values.iter().map(|v| v.square()).collect())
    }

    /// Apply a standard matrix function state by state.
    pub fn map_matrix_function<F: Fn(f64) -> f64>(&self, phi: F) -> Result<MatrixField> {
        let mut out = Vec::with_capacity(self.values.len());
        for v in self.values.iter() {
            out.push(v.matrix_function(&phi)?);
        }
        Ok(self.wrap(out))
    }

    pub fn scale(&self, s: f64) -> MatrixField {
        self.wrap(self.values.iter().map(|v| v.scale(s)).collect())
    }

    pub fn add(&self, other: &MatrixField) -> Result<MatrixField> {
        self.same_layout(other)?;
        Ok(self.wrap(
            self.values
                .iter()
                .zip(other.values.iter())
                .map(|(a, b)| a + b)
                .collect(),
        ))
    }

    pub fn sub(&self, other: &MatrixField) -> Result<MatrixField> {
        self.same_layout(other)?;
        Ok(self.wrap(
            self.values
                .iter()
                .zip(other.values.iter())
                .map(|(a, b)| a - b)
                .collect(),
        ))
    }

    /// Pointwise product f·g, which leaves the Hermitian cone.
    pub fn pointwise_mul(&self, other: &MatrixField) -> Result<GeneralField> {
        self.same_layout(other)?;
        Ok(GeneralField {
            space: Arc::clone(&self.space),
            dim: self.dim,
            values: self
                .values
                .iter()
                .zip(other.values.iter())
                .map(|(a, b)| a.mul(b))
                .collect(),
        })
    }

    pub fn to_general(&self) -> GeneralField {
        GeneralField {
            space: Arc::clone(&self.space),
            dim: self.dim,
            values: self.values.iter().map(|v| v.to_cmatrix()).collect(),
        }
    }
}

/// A field of general complex matrices. Products of Hermitian fields land
/// here; the semigroup and generator act on it exactly as on Hermitian
/// fields, which is what the identity checks (reversibility, triple product,
/// carré du champ consistency) need.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralField {
    space: Arc<FiniteProductSpace>,
    dim: usize,
    values: Vec<CMatrix>,
}

impl GeneralField {
    pub fn space(&self) -> &Arc<FiniteProductSpace> {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn values(&self) -> &[CMatrix] {
        &self.values
    }

    pub fn value(&self, state: usize) -> &CMatrix {
        &self.values[state]
    }

    pub fn expectation(&self) -> CMatrix {
        expectation_core(&self.space, &self.values, self.dim)
    }

    pub fn generator_apply(&self) -> GeneralField {
        GeneralField {
            space: Arc::clone(&self.space),
            dim: self.dim,
            values: generator_core(&self.space, &self.values, self.dim),
        }
    }

    pub fn semigroup_apply(&self, t: f64) -> Result<GeneralField> {
        Ok(GeneralField {
            space: Arc::clone(&self.space),
            dim: self.dim,
            values: semigroup_core(&self.space, &self.values, self.dim, t)?,
        })
    }

    pub fn pointwise_mul_field(&self, other: &MatrixField) -> Result<GeneralField> {
        if self.space != other.space || self.dim != other.dim {
            return Err(FiniteError::SpaceMismatch);
        }
        Ok(GeneralField {
            space: Arc::clone(&self.space),
            dim: self.dim,
            values: self
                .values
                .iter()
                .zip(other.values.iter())
                .map(|(a, b)| a.matmul(&b.to_cmatrix()))
                .collect(),
        })
    }

    pub fn sub(&self, other: &GeneralField) -> GeneralField {
        assert_eq!(self.space, other.space);
        GeneralField {
            space: Arc::clone(&self.space),
            dim: self.dim,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn scale(&self, s: f64) -> GeneralField {
        GeneralField {
            space: Arc::clone(&self.space),
            dim: self.dim,
            values: self.values.iter().map(|v| v.scale_re(s)).collect(),
        }
    }

    pub fn max_hs_norm(&self) -> f64 {
        self.values.iter().map(|v| v.hs_norm()).fold(0.0, f64::max)
    }
}

// ---------------------------------------------------------------------------
// Serialization: {"space": {"factors": [[w, ...], ...]}, "d": n, "values": [...]}
// in mixed-radix state order; labels are implicit indices.

#[derive(Serialize, Deserialize)]
struct SpaceLiteral {
    factors: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct FieldLiteral {
    space: SpaceLiteral,
    d: usize,
    values: Vec<MatrixLiteral>,
}

impl Serialize for MatrixField {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let lit = FieldLiteral {
            space: SpaceLiteral {
                factors: self
                    .space
                    .factors
                    .iter()
                    .map(|f| f.weights.clone())
                    .collect(),
            },
            d: self.dim,
            values: self
                .values
                .iter()
                .map(|v| MatrixLiteral::from(v.clone()))
                .collect(),
        };
        lit.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for MatrixField {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error;
        let lit = FieldLiteral::deserialize(deserializer)?;
        let factors = lit
            .space
            .factors
            .iter()
            .map(|w| Factor::from_weights(w))
            .collect();
        let space = FiniteProductSpace::new(factors).map_err(D::Error::custom)?;
        let mut values = Vec::with_capacity(lit.values.len());
        for v in lit.values {
            values.push(HermitianMatrix::try_from(v).map_err(D::Error::custom)?);
        }
        MatrixField::new(Arc::new(space), values).map_err(D::Error::custom)
    }
}

/// Convenience: a Rademacher field `f(z) = z·A` on the two-point space.
pub fn rademacher_linear(coefficient: &HermitianMatrix) -> MatrixField {
    let space = Arc::new(
        FiniteProductSpace::new(vec![Factor::rademacher()]).expect("two-point space is valid"),
    );
    MatrixField::from_label_fn(space, |labels| coefficient.scale(labels[0]))
        .expect("rademacher field is well formed")
}
