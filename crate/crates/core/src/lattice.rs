//! Finitely supported vectors on `ℤ`, the polynomial functional calculus of a
//! weighted shift, and norm estimates for compressions of `p(W)`.
//!
//! Vectors are exact: `W^n` maps a finitely supported vector to a finitely
//! supported vector, so orbit computations carry no truncation error. Only
//! operator norms need a finite-dimensional compression.

use std::collections::BTreeMap;
use std::ops::{Add, Sub};

use num_complex::Complex;
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::scalar::{cis, Real};
use crate::weights::{LogWindow, WeightSequence};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LatticeError {
    #[error("negative powers need an invertible shift")]
    NotInvertible,
    #[error("amplitude at index {index} overflows the scalar type")]
    Overflow { index: i64 },
    #[error("truncation half-width {half_width} is below the polynomial degree {degree}")]
    InvalidTruncation { half_width: usize, degree: usize },
    #[error("norm iteration did not converge within {iterations} steps (last estimate {last})")]
    NoConvergence { iterations: usize, last: f64 },
    #[error("invalid polynomial: {0}")]
    InvalidPolynomial(String),
}

/// A vector `Σ x_i e_i` with finite support, stored sparsely.
///
/// Exact zeros are never stored.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct LatticeVector<T> {
    amplitudes: BTreeMap<i64, Complex<T>>,
}

impl<T: Real> LatticeVector<T> {
    pub fn zero() -> Self {
        LatticeVector { amplitudes: BTreeMap::new() }
    }

    /// The basis vector `e_k`.
    pub fn basis(k: i64) -> Self {
        Self::from_pairs([(k, Complex::new(T::one(), T::zero()))])
    }

    /// Builds a vector, summing repeated indices.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (i64, Complex<T>)>) -> Self {
        let mut v = Self::zero();
        for (i, a) in pairs {
            v.add_at(i, a);
        }
        v
    }

    pub fn add_at(&mut self, index: i64, value: Complex<T>) {
        let slot = self.amplitudes.entry(index).or_default();
        *slot = *slot + value;
        if *slot == Complex::default() {
            self.amplitudes.remove(&index);
        }
    }

    pub fn get(&self, index: i64) -> Complex<T> {
        self.amplitudes.get(&index).copied().unwrap_or_default()
    }

    pub fn support(&self) -> impl Iterator<Item = i64> + '_ {
        self.amplitudes.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex<T>)> + '_ {
        self.amplitudes.iter().map(|(&i, &a)| (i, a))
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn min_index(&self) -> Option<i64> {
        self.amplitudes.keys().next().copied()
    }

    pub fn max_index(&self) -> Option<i64> {
        self.amplitudes.keys().next_back().copied()
    }

    pub fn norm_sqr(&self) -> T {
        self.amplitudes.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> T {
        scaled_norm(self.amplitudes.values())
    }

    /// Norm of the restriction to indices strictly greater than `index`.
    ///
    /// With `F = span{e_j : j <= index}` this is the distance from the vector to `F`.
    pub fn tail_norm_after(&self, index: i64) -> T {
        scaled_norm(self.amplitudes.range(index + 1..).map(|(_, a)| a))
    }

    pub fn scale(&self, factor: Complex<T>) -> Self {
        Self::from_pairs(self.iter().map(|(i, a)| (i, a * factor)))
    }

    pub fn distance(&self, other: &Self) -> T {
        (self - other).norm()
    }
}

/// Euclidean norm computed relative to the largest entry, so that it does not
/// overflow while the norm itself is representable.
fn scaled_norm<'a, T: Real>(values: impl Iterator<Item = &'a Complex<T>> + Clone) -> T {
    let largest = values.clone().map(|a| a.norm()).fold(T::zero(), T::max);
    if largest == T::zero() || !largest.is_finite() {
        return largest;
    }
    largest * values.map(|a| (a.norm() / largest).powi(2)).fold(T::zero(), |s, x| s + x).sqrt()
}

impl<T: Real> Add for &LatticeVector<T> {
    type Output = LatticeVector<T>;

    fn add(self, rhs: Self) -> LatticeVector<T> {
        let mut out = self.clone();
        for (i, a) in rhs.iter() {
            out.add_at(i, a);
        }
        out
    }
}

impl<T: Real> Sub for &LatticeVector<T> {
    type Output = LatticeVector<T>;

    fn sub(self, rhs: Self) -> LatticeVector<T> {
        let mut out = self.clone();
        for (i, a) in rhs.iter() {
            out.add_at(i, -a);
        }
        out
    }
}

/// Serialized as `{"index": [re, im], ...}`.
impl<T: Real> Serialize for LatticeVector<T> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.len()))?;
        for (i, a) in self.iter() {
            map.serialize_entry(&i, &[a.re, a.im])?;
        }
        map.end()
    }
}

/// `p(W) + q(W^{-1})` with `p(λ) = Σ a_n λ^n` and `q(μ) = Σ_{n>=1} b_n μ^n`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound = "T: Real")]
pub struct ShiftPolynomial<T> {
    /// `a_0, …, a_m`; trailing zeros are trimmed.
    forward: Vec<Complex<T>>,
    /// `b_1, …, b_l` (coefficient of `W^{-(j+1)}` at position `j`); no constant term.
    backward: Vec<Complex<T>>,
}

fn trim<T: Real>(mut v: Vec<Complex<T>>) -> Vec<Complex<T>> {
    while v.last().is_some_and(|c| *c == Complex::default()) {
        v.pop();
    }
    v
}

impl<T: Real> ShiftPolynomial<T> {
    pub fn new(forward: Vec<Complex<T>>) -> Self {
        ShiftPolynomial { forward: trim(forward), backward: Vec::new() }
    }

    pub fn from_real(coefficients: &[T]) -> Self {
        Self::new(coefficients.iter().map(|&c| Complex::new(c, T::zero())).collect())
    }

    /// `q(W^{-1})` with `q(0) = 0`; `backward[j]` multiplies `W^{-(j+1)}`.
    pub fn inverse_part(backward: Vec<Complex<T>>) -> Self {
        ShiftPolynomial { forward: Vec::new(), backward: trim(backward) }
    }

    pub fn with_inverse_part(forward: Vec<Complex<T>>, backward: Vec<Complex<T>>) -> Self {
        ShiftPolynomial { forward: trim(forward), backward: trim(backward) }
    }

    pub fn monomial(power: usize, coefficient: Complex<T>) -> Self {
        let mut forward = vec![Complex::default(); power + 1];
        forward[power] = coefficient;
        Self::new(forward)
    }

    pub fn identity() -> Self {
        Self::from_real(&[T::one()])
    }

    /// Index of the last nonzero forward coefficient (0 for constants and for the zero polynomial).
    pub fn degree(&self) -> usize {
        self.forward.len().saturating_sub(1)
    }

    /// Highest power of `W^{-1}` present.
    pub fn inverse_degree(&self) -> usize {
        self.backward.len()
    }

    pub fn forward(&self) -> &[Complex<T>] {
        &self.forward
    }

    pub fn backward(&self) -> &[Complex<T>] {
        &self.backward
    }

    pub fn has_inverse_part(&self) -> bool {
        !self.backward.is_empty()
    }

    pub fn scale(&self, factor: T) -> Self {
        ShiftPolynomial {
            forward: self.forward.iter().map(|&c| c * factor).collect(),
            backward: self.backward.iter().map(|&c| c * factor).collect(),
        }
    }

    /// `(power, coefficient)` over all nonzero terms; negative powers belong to `W^{-1}`.
    pub fn terms(&self) -> impl Iterator<Item = (i64, Complex<T>)> + '_ {
        let fwd = self.forward.iter().enumerate().map(|(n, &c)| (n as i64, c));
        let bwd = self.backward.iter().enumerate().map(|(j, &c)| (-(j as i64) - 1, c));
        fwd.chain(bwd).filter(|(_, c)| *c != Complex::default())
    }
}

fn check_power<T: Real>(w: &WeightSequence<T>, min_power: i64) -> Result<(), LatticeError> {
    if min_power < 0 && !w.is_invertible() {
        return Err(LatticeError::NotInvertible);
    }
    Ok(())
}

/// Adds `coefficient · W^power x` into `out`, using `window` for the weight products.
fn accumulate_power<T: Real>(
    window: &LogWindow<T>,
    x: &LatticeVector<T>,
    power: i64,
    coefficient: Complex<T>,
    out: &mut LatticeVector<T>,
) -> Result<(), LatticeError> {
    for (i, a) in x.iter() {
        // W^p e_i = (w_i ⋯ w_{i+p-1}) e_{i+p};  W^{-p} e_i = e_{i-p} / (w_{i-p} ⋯ w_{i-1})
        let (log_mag, phase) = if power >= 0 {
            (window.sum(i, i + power), window.phase(i, i + power))
        } else {
            (-window.sum(i + power, i), -window.phase(i + power, i))
        };
        let target = i + power;
        let factor = cis(log_mag, phase);
        let value = if factor.norm() > T::zero() && factor.norm().is_finite() {
            a * coefficient * factor
        } else {
            // fold the amplitudes into the log-magnitude before exponentiating
            let total = log_mag + a.norm().ln() + coefficient.norm().ln();
            cis(total, phase + a.arg() + coefficient.arg())
        };
        if !value.re.is_finite() || !value.im.is_finite() {
            return Err(LatticeError::Overflow { index: target });
        }
        out.add_at(target, value);
    }
    Ok(())
}

fn window_for<T: Real>(w: &WeightSequence<T>, x: &LatticeVector<T>, min_power: i64, max_power: i64) -> LogWindow<T> {
    let lo = x.min_index().unwrap_or(0) + min_power.min(0);
    let hi = x.max_index().unwrap_or(0) + max_power.max(0);
    w.log_window(lo, hi)
}

/// `W^power x`, exactly up to rounding of the log-domain weight products.
pub fn apply_shift<T: Real>(
    w: &WeightSequence<T>,
    x: &LatticeVector<T>,
    power: i64,
) -> Result<LatticeVector<T>, LatticeError> {
    check_power(w, power)?;
    let window = window_for(w, x, power, power);
    let mut out = LatticeVector::zero();
    accumulate_power(&window, x, power, Complex::new(T::one(), T::zero()), &mut out)?;
    Ok(out)
}

/// `Σ a_n W^n x + Σ b_n W^{-n} x`.
pub fn apply_polynomial<T: Real>(
    w: &WeightSequence<T>,
    p: &ShiftPolynomial<T>,
    x: &LatticeVector<T>,
) -> Result<LatticeVector<T>, LatticeError> {
    let min_power = -(p.inverse_degree() as i64);
    check_power(w, min_power)?;
    let mut out = LatticeVector::zero();
    if x.is_empty() {
        return Ok(out);
    }
    let window = window_for(w, x, min_power, p.degree() as i64);
    for (power, c) in p.terms() {
        accumulate_power(&window, x, power, c, &mut out)?;
    }
    Ok(out)
}

/// Orthogonal decomposition of `p(W) e_k + q(W^{-1}) e_k` for `q(0) = 0`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound = "T: Real")]
pub struct SplitReport<T> {
    pub basis_index: i64,
    pub forward_norm_sqr: T,
    pub backward_norm_sqr: T,
    pub sum_norm_sqr: T,
    /// `|‖sum‖² - ‖p(W)e_k‖² - ‖q(W^{-1})e_k‖²|`.
    pub pythagoras_deviation: T,
    pub supports_disjoint: bool,
    /// `‖p(W)e_k‖ <= ‖sum‖` and `‖q(W^{-1})e_k‖ <= ‖sum‖`.
    pub dominated: bool,
}

/// `p(W) e_k` lives on indices `>= k`, `q(W^{-1}) e_k` on indices `< k`.
pub fn orthogonal_split<T: Real>(
    w: &WeightSequence<T>,
    p: &ShiftPolynomial<T>,
    q: &ShiftPolynomial<T>,
    k: i64,
) -> Result<SplitReport<T>, LatticeError> {
    if p.has_inverse_part() {
        return Err(LatticeError::InvalidPolynomial("p must not contain powers of W^-1".into()));
    }
    if !q.forward().is_empty() {
        return Err(LatticeError::InvalidPolynomial("q must satisfy q(0) = 0 and act through W^-1".into()));
    }
    let e = LatticeVector::basis(k);
    let fwd = apply_polynomial(w, p, &e)?;
    let bwd = apply_polynomial(w, q, &e)?;
    let sum = &fwd + &bwd;
    let supports_disjoint = fwd.support().all(|i| bwd.get(i) == Complex::default());
    let (f2, b2, s2) = (fwd.norm_sqr(), bwd.norm_sqr(), sum.norm_sqr());
    Ok(SplitReport {
        basis_index: k,
        forward_norm_sqr: f2,
        backward_norm_sqr: b2,
        sum_norm_sqr: s2,
        pythagoras_deviation: (s2 - f2 - b2).abs(),
        supports_disjoint,
        dominated: f2 <= s2 && b2 <= s2,
    })
}

/// `P_N p(W) P_N` on coordinates `[-N, N]`, stored by diagonals.
///
/// The term `a_n W^n` contributes `a_n · w_i ⋯ w_{i+n-1}` at `(row, col) = (i+n, i)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedOperator<T> {
    half_width: usize,
    /// `(shift, values)` with `values[c]` the entry in column `c - N`, row `c - N + shift`.
    bands: Vec<(i64, Vec<Complex<T>>)>,
}

impl<T: Real> TruncatedOperator<T> {
    pub fn assemble(
        w: &WeightSequence<T>,
        p: &ShiftPolynomial<T>,
        half_width: usize,
    ) -> Result<Self, LatticeError> {
        let degree = p.degree().max(p.inverse_degree());
        if half_width < degree {
            return Err(LatticeError::InvalidTruncation { half_width, degree });
        }
        check_power(w, -(p.inverse_degree() as i64))?;
        let n = half_width as i64;
        let window = w.log_window(-n - degree as i64, n + degree as i64);
        let mut bands: Vec<(i64, Vec<Complex<T>>)> = Vec::new();
        for (power, c) in p.terms() {
            let values = (-n..=n)
                .map(|col| {
                    let row = col + power;
                    if row < -n || row > n {
                        return Complex::default();
                    }
                    let (log_mag, phase) = if power >= 0 {
                        (window.sum(col, row), window.phase(col, row))
                    } else {
                        (-window.sum(row, col), -window.phase(row, col))
                    };
                    c * cis(log_mag, phase)
                })
                .collect();
            match bands.iter_mut().find(|(s, _)| *s == power) {
                Some((_, existing)) => existing.iter_mut().zip(values).for_each(|(a, b)| *a = *a + b),
                None => bands.push((power, values)),
            }
        }
        Ok(TruncatedOperator { half_width, bands })
    }

    pub fn dim(&self) -> usize {
        2 * self.half_width + 1
    }

    pub fn half_width(&self) -> usize {
        self.half_width
    }

    pub fn bands(&self) -> &[(i64, Vec<Complex<T>>)] {
        &self.bands
    }

    /// `y = A x` on dense coordinates ordered `-N..=N`.
    pub fn apply(&self, x: &[Complex<T>]) -> Vec<Complex<T>> {
        let dim = self.dim() as i64;
        let mut y = vec![Complex::default(); self.dim()];
        for (shift, values) in &self.bands {
            for (c, v) in values.iter().enumerate() {
                let r = c as i64 + shift;
                if (0..dim).contains(&r) {
                    y[r as usize] = y[r as usize] + *v * x[c];
                }
            }
        }
        y
    }

    /// `y = A* x`, the conjugate transpose taken band by band.
    pub fn apply_adjoint(&self, x: &[Complex<T>]) -> Vec<Complex<T>> {
        let dim = self.dim() as i64;
        let mut y = vec![Complex::default(); self.dim()];
        for (shift, values) in &self.bands {
            for (c, v) in values.iter().enumerate() {
                let r = c as i64 + shift;
                if (0..dim).contains(&r) {
                    y[c] = y[c] + v.conj() * x[r as usize];
                }
            }
        }
        y
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound = "T: Real")]
pub struct NormEstimate<T> {
    /// Estimate of `‖P_N p(W) P_N‖`; never exceeds the true compression norm beyond rounding.
    pub value: T,
    /// [`op_norm_upper_bound`] for the same polynomial.
    pub upper_bound: T,
    pub iterations: usize,
    pub half_width: usize,
}

fn dot<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> Complex<T> {
    a.iter().zip(b).fold(Complex::default(), |acc, (x, y)| acc + x.conj() * y)
}

fn vec_norm<T: Real>(a: &[Complex<T>]) -> T {
    a.iter().map(|x| x.norm_sqr()).sum::<T>().sqrt()
}

/// Largest eigenvalue of the symmetric tridiagonal matrix with diagonal
/// `alpha` and off-diagonal `beta`, by Sturm-sequence bisection.
fn tridiagonal_max_eigenvalue<T: Real>(alpha: &[T], beta: &[T]) -> T {
    let n = alpha.len();
    let (mut lo, mut hi) = (T::infinity(), T::neg_infinity());
    for i in 0..n {
        let radius = if i > 0 { beta[i - 1].abs() } else { T::zero() }
            + if i + 1 < n { beta[i].abs() } else { T::zero() };
        lo = lo.min(alpha[i] - radius);
        hi = hi.max(alpha[i] + radius);
    }
    // number of eigenvalues strictly below x
    let count_below = |x: T| -> usize {
        let tiny = T::min_positive_value();
        let mut count = 0;
        let mut d = T::one();
        for i in 0..n {
            let off = if i > 0 { beta[i - 1] * beta[i - 1] / d } else { T::zero() };
            d = alpha[i] - x - off;
            if d == T::zero() {
                d = -tiny;
            }
            if d < T::zero() {
                count += 1;
            }
        }
        count
    };
    let two = T::lit(2.0);
    for _ in 0..200 {
        let mid = (lo + hi) / two;
        if mid <= lo || mid >= hi {
            break;
        }
        if count_below(mid) < n {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// Estimates `‖P_N p(W) P_N‖` by Lanczos iteration on the Gram operator `A* A`.
///
/// The start vector is the normalized all-ones vector. Iteration stops once
/// three consecutive top Ritz values agree to relative `tol`, or when the
/// Krylov space is exhausted. The budget is `10 · N · max(degree, 1)` steps.
/// Ritz values never exceed the top eigenvalue, so the returned value is a
/// lower bound of the compression norm up to rounding.
pub fn op_norm_truncated<T: Real>(
    w: &WeightSequence<T>,
    p: &ShiftPolynomial<T>,
    half_width: usize,
    tol: T,
) -> Result<NormEstimate<T>, LatticeError> {
    let op = TruncatedOperator::assemble(w, p, half_width)?;
    let upper_bound = op_norm_upper_bound(w, p);
    let dim = op.dim();
    let degree = p.degree().max(p.inverse_degree()).max(1);
    let budget = 10 * half_width.max(1) * degree;
    let gram = |v: &[Complex<T>]| op.apply_adjoint(&op.apply(v));

    let start = T::one() / T::from_count(dim).sqrt();
    let mut basis: Vec<Vec<Complex<T>>> = vec![vec![Complex::new(start, T::zero()); dim]];
    let (mut alpha, mut beta): (Vec<T>, Vec<T>) = (Vec::new(), Vec::new());
    let mut history: Vec<T> = Vec::new();

    for step in 0..budget.min(dim) {
        let q = &basis[step];
        let mut z = gram(q);
        let a = dot(q, &z).re;
        alpha.push(a);
        // full reorthogonalization, two passes
        for _ in 0..2 {
            for b in &basis {
                let c = dot(b, &z);
                z.iter_mut().zip(b).for_each(|(zi, bi)| *zi = *zi - c * bi);
            }
        }
        let theta = tridiagonal_max_eigenvalue(&alpha, &beta).max(T::zero());
        history.push(theta);
        let b = vec_norm(&z);
        let scale = theta.max(T::min_positive_value());
        let stalled = history.len() >= 3
            && history[history.len() - 3..].windows(2).all(|h| (h[1] - h[0]).abs() <= tol * scale);
        let exhausted = b <= T::epsilon() * T::lit(16.0) * scale || step + 1 == dim;
        if stalled || exhausted {
            return Ok(NormEstimate { value: theta.sqrt(), upper_bound, iterations: step + 1, half_width });
        }
        beta.push(b);
        basis.push(z.into_iter().map(|zi| zi / b).collect());
    }
    let last = history.last().copied().unwrap_or_else(T::zero).sqrt();
    Err(LatticeError::NoConvergence { iterations: budget.min(dim), last: last.as_f64() })
}

/// `Σ |a_n| ‖W^n‖ + Σ |b_n| ‖W^{-n}‖`, with `‖W^n‖ = sup_k |w_k ⋯ w_{k+n-1}|`
/// and `‖W^{-n}‖ = 1 / inf_k |w_k ⋯ w_{k+n-1}|`.
///
/// The sliding extremes are exact for every rule kind, so this dominates
/// `‖p(W)‖` and hence every compression of it.
pub fn op_norm_upper_bound<T: Real>(w: &WeightSequence<T>, p: &ShiftPolynomial<T>) -> T {
    p.terms()
        .map(|(power, c)| {
            let (lo, hi) = w.sliding_log_extremes(power.unsigned_abs() as usize);
            let log_norm = if power >= 0 { hi } else { -lo };
            c.norm() * log_norm.exp()
        })
        .sum()
}
