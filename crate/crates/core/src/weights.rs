//! Bi-infinite weight sequences defining injective bilateral weighted shifts
//! `W e_n = w_n e_{n+1}`.
//!
//! A [`WeightRule`] is a finite description of `(w_n)_{n ∈ ℤ}`. Every rule
//! carries exact magnitude bounds, so boundedness and invertibility are
//! decided from the rule data rather than by sampling. All products of
//! weights are handled as sums of logarithms through [`LogWindow`].

use std::fmt;

use num_complex::Complex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WeightError {
    #[error("weight {location} is zero; the shift must be injective")]
    ZeroWeight { location: String },
    #[error("weight {location} is not finite")]
    NonFinite { location: String },
    #[error("periodic rule needs at least one value")]
    EmptyPeriod,
    #[error("shift is not invertible: inf |w_n| = 0")]
    NotInvertible,
}

/// Finitely describable weight data.
///
/// Serialized with a `"kind"` discriminator. Each weight is written either as a
/// plain number or as a `[re, im]` pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", bound = "T: Real")]
pub enum WeightRule<T> {
    /// `w_n = value` for every `n`.
    Constant {
        #[serde(with = "complex_serde")]
        value: Complex<T>,
    },
    /// `w_n = values[n mod len]` with the nonnegative modulus.
    Periodic {
        #[serde(with = "complex_vec_serde")]
        values: Vec<Complex<T>>,
    },
    /// `w_n = negative_value` for `n < 0`, `nonnegative_value` for `n >= 0`.
    TwoSidedStep {
        #[serde(with = "complex_serde")]
        negative_value: Complex<T>,
        #[serde(with = "complex_serde")]
        nonnegative_value: Complex<T>,
    },
    /// `w_k = hi` whenever `2^m <= k <= 2^m + m` for some `m >= 1`, else `lo`.
    LacunaryBlocks {
        #[serde(with = "complex_serde")]
        hi: Complex<T>,
        #[serde(with = "complex_serde")]
        lo: Complex<T>,
    },
    /// Explicit entries on `[offset, offset + entries.len())`, fills elsewhere.
    Table {
        offset: i64,
        #[serde(with = "complex_vec_serde")]
        entries: Vec<Complex<T>>,
        #[serde(with = "complex_serde")]
        left_fill: Complex<T>,
        #[serde(with = "complex_serde")]
        right_fill: Complex<T>,
    },
}

impl<T: Real> WeightRule<T> {
    pub fn constant(value: T) -> Self {
        WeightRule::Constant { value: Complex::new(value, T::zero()) }
    }

    pub fn periodic(values: &[T]) -> Self {
        WeightRule::Periodic { values: values.iter().map(|&v| Complex::new(v, T::zero())).collect() }
    }

    pub fn two_sided_step(negative_value: T, nonnegative_value: T) -> Self {
        WeightRule::TwoSidedStep {
            negative_value: Complex::new(negative_value, T::zero()),
            nonnegative_value: Complex::new(nonnegative_value, T::zero()),
        }
    }

    pub fn lacunary_blocks(hi: T, lo: T) -> Self {
        WeightRule::LacunaryBlocks { hi: Complex::new(hi, T::zero()), lo: Complex::new(lo, T::zero()) }
    }

    pub fn table(offset: i64, entries: &[T], left_fill: T, right_fill: T) -> Self {
        WeightRule::Table {
            offset,
            entries: entries.iter().map(|&v| Complex::new(v, T::zero())).collect(),
            left_fill: Complex::new(left_fill, T::zero()),
            right_fill: Complex::new(right_fill, T::zero()),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            WeightRule::Constant { .. } => "constant",
            WeightRule::Periodic { .. } => "periodic",
            WeightRule::TwoSidedStep { .. } => "two_sided_step",
            WeightRule::LacunaryBlocks { .. } => "lacunary_blocks",
            WeightRule::Table { .. } => "table",
        }
    }

    /// Every distinct weight value the rule can produce, with a label for error messages.
    fn values(&self) -> Vec<(String, Complex<T>)> {
        match self {
            WeightRule::Constant { value } => vec![("value".into(), *value)],
            WeightRule::Periodic { values } => {
                values.iter().enumerate().map(|(i, v)| (format!("values[{i}]"), *v)).collect()
            }
            WeightRule::TwoSidedStep { negative_value, nonnegative_value } => vec![
                ("negative_value".into(), *negative_value),
                ("nonnegative_value".into(), *nonnegative_value),
            ],
            WeightRule::LacunaryBlocks { hi, lo } => vec![("hi".into(), *hi), ("lo".into(), *lo)],
            WeightRule::Table { entries, left_fill, right_fill, .. } => {
                let mut out: Vec<_> =
                    entries.iter().enumerate().map(|(i, v)| (format!("entries[{i}]"), *v)).collect();
                out.push(("left_fill".into(), *left_fill));
                out.push(("right_fill".into(), *right_fill));
                out
            }
        }
    }

    fn map_values(&self, f: impl Fn(Complex<T>) -> Complex<T>) -> Self {
        match self {
            WeightRule::Constant { value } => WeightRule::Constant { value: f(*value) },
            WeightRule::Periodic { values } => {
                WeightRule::Periodic { values: values.iter().map(|&v| f(v)).collect() }
            }
            WeightRule::TwoSidedStep { negative_value, nonnegative_value } => WeightRule::TwoSidedStep {
                negative_value: f(*negative_value),
                nonnegative_value: f(*nonnegative_value),
            },
            WeightRule::LacunaryBlocks { hi, lo } => WeightRule::LacunaryBlocks { hi: f(*hi), lo: f(*lo) },
            WeightRule::Table { offset, entries, left_fill, right_fill } => WeightRule::Table {
                offset: *offset,
                entries: entries.iter().map(|&v| f(v)).collect(),
                left_fill: f(*left_fill),
                right_fill: f(*right_fill),
            },
        }
    }
}

/// `true` when `k` lies in a block `[2^m, 2^m + m]` with `m >= 1`.
///
/// Blocks never straddle a power of two (`m < 2^m`), so the only candidate
/// block for `k` is `m = floor(log2 k)`.
pub fn in_lacunary_block(k: i64) -> bool {
    if k < 2 {
        return false;
    }
    let m = 63 - k.leading_zeros() as i64;
    k - (1i64 << m) <= m
}

/// A validated weight rule with its exact magnitude bounds.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightSequence<T> {
    rule: WeightRule<T>,
    magnitude_sup: T,
    magnitude_inf: T,
}

impl<T: Real> WeightSequence<T> {
    pub fn new(rule: WeightRule<T>) -> Result<Self, WeightError> {
        let values = rule.values();
        if values.is_empty() {
            return Err(WeightError::EmptyPeriod);
        }
        let mut sup = T::zero();
        let mut inf = T::infinity();
        for (location, v) in &values {
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(WeightError::NonFinite { location: location.clone() });
            }
            let m = v.norm();
            if m == T::zero() {
                return Err(WeightError::ZeroWeight { location: location.clone() });
            }
            if !m.is_finite() {
                return Err(WeightError::NonFinite { location: location.clone() });
            }
            sup = sup.max(m);
            inf = inf.min(m);
        }
        Ok(WeightSequence { rule, magnitude_sup: sup, magnitude_inf: inf })
    }

    pub fn rule(&self) -> &WeightRule<T> {
        &self.rule
    }

    /// `sup_n |w_n|`, exact from the rule data.
    pub fn magnitude_sup(&self) -> T {
        self.magnitude_sup
    }

    /// `inf_n |w_n|`, exact from the rule data. This is also the lower bound `m(W)`.
    pub fn magnitude_inf(&self) -> T {
        self.magnitude_inf
    }

    pub fn is_invertible(&self) -> bool {
        self.magnitude_inf > T::zero()
    }

    pub fn eval(&self, n: i64) -> Complex<T> {
        match &self.rule {
            WeightRule::Constant { value } => *value,
            WeightRule::Periodic { values } => values[n.rem_euclid(values.len() as i64) as usize],
            WeightRule::TwoSidedStep { negative_value, nonnegative_value } => {
                if n < 0 {
                    *negative_value
                } else {
                    *nonnegative_value
                }
            }
            WeightRule::LacunaryBlocks { hi, lo } => {
                if in_lacunary_block(n) {
                    *hi
                } else {
                    *lo
                }
            }
            WeightRule::Table { offset, entries, left_fill, right_fill } => {
                if n < *offset {
                    *left_fill
                } else if n - offset < entries.len() as i64 {
                    entries[(n - offset) as usize]
                } else {
                    *right_fill
                }
            }
        }
    }

    pub fn log_magnitude(&self, n: i64) -> T {
        self.eval(n).norm().ln()
    }

    /// `Σ_{n=a}^{b-1} ln|w_n|`; `0` for the empty range.
    ///
    /// For `a > b` the oriented sum `-Σ_{n=b}^{a-1} ln|w_n|` is returned, which
    /// keeps `prefix(a, c) = prefix(a, b) + prefix(b, c)` valid for any order.
    pub fn log_magnitude_prefix(&self, a: i64, b: i64) -> T {
        if a <= b {
            self.log_window(a, b).sum(a, b)
        } else {
            -self.log_window(b, a).sum(b, a)
        }
    }

    /// Prefix sums of `ln|w_n|` and `arg w_n` over indices `[lo, hi)`.
    pub fn log_window(&self, lo: i64, hi: i64) -> LogWindow<T> {
        LogWindow::build(self, lo, hi)
    }

    /// Exact `(min, max)` over all positions `k ∈ ℤ` of `Σ_{j=k}^{k+n-1} ln|w_j|`.
    ///
    /// These are `ln` of `inf_k` and `sup_k` of the sliding products, i.e.
    /// `ln m(W^n)` and `ln ‖W^n‖`.
    pub fn sliding_log_extremes(&self, n: usize) -> (T, T) {
        if n == 0 {
            return (T::zero(), T::zero());
        }
        let len = T::from_count(n);
        match &self.rule {
            WeightRule::Constant { value } => {
                let l = value.norm().ln() * len;
                (l, l)
            }
            WeightRule::Periodic { values } => {
                let p = values.len();
                let logs: Vec<T> = values.iter().map(|v| v.norm().ln()).collect();
                let period_sum: T = logs.iter().copied().sum();
                let full = T::from_count(n / p) * period_sum;
                let rem = n % p;
                let mut lo = T::infinity();
                let mut hi = T::neg_infinity();
                for start in 0..p {
                    let partial: T = (0..rem).map(|j| logs[(start + j) % p]).sum();
                    let s = full + partial;
                    lo = lo.min(s);
                    hi = hi.max(s);
                }
                (lo, hi)
            }
            // Pure windows of every length exist on both sides (for the lacunary
            // rule: blocks of length m + 1 for every m, and lo on k < 0); mixed
            // windows are convex combinations of the two levels.
            WeightRule::TwoSidedStep { negative_value: a, nonnegative_value: b }
            | WeightRule::LacunaryBlocks { hi: a, lo: b } => {
                let (la, lb) = (a.norm().ln(), b.norm().ln());
                (la.min(lb) * len, la.max(lb) * len)
            }
            WeightRule::Table { offset, entries, left_fill, right_fill } => {
                let (ll, lr) = (left_fill.norm().ln() * len, right_fill.norm().ln() * len);
                let mut lo = ll.min(lr);
                let mut hi = ll.max(lr);
                if !entries.is_empty() {
                    let n = n as i64;
                    let first = offset - n + 1;
                    let last = offset + entries.len() as i64 - 1;
                    let window = self.log_window(first, last + n);
                    for k in first..=last {
                        let s = window.sum(k, k + n);
                        lo = lo.min(s);
                        hi = hi.max(s);
                    }
                }
                (lo, hi)
            }
        }
    }

    /// Weights of `V = U* W^{-1} U` where `U e_n = e_{-n}`: `v_n = 1 / w_{-(n+1)}`.
    ///
    /// Closed-form rules map to rules of the same kind. The lacunary rule maps
    /// to a table covering `n ∈ [-horizon, 0)`; outside that range the table
    /// uses `1/lo`, which is exact for `n >= 0` and a truncation for `n < -horizon`.
    pub fn inverse_conjugate(&self, horizon: usize) -> Result<WeightSequence<T>, WeightError> {
        if !self.is_invertible() {
            return Err(WeightError::NotInvertible);
        }
        let recip = |v: Complex<T>| v.inv();
        let rule = match &self.rule {
            WeightRule::Constant { value } => WeightRule::Constant { value: recip(*value) },
            WeightRule::Periodic { values } => {
                let p = values.len() as i64;
                let values =
                    (0..p).map(|j| recip(values[(-j - 1).rem_euclid(p) as usize])).collect();
                WeightRule::Periodic { values }
            }
            WeightRule::TwoSidedStep { negative_value, nonnegative_value } => WeightRule::TwoSidedStep {
                negative_value: recip(*nonnegative_value),
                nonnegative_value: recip(*negative_value),
            },
            WeightRule::Table { offset, entries, left_fill, right_fill } => WeightRule::Table {
                offset: -offset - entries.len() as i64,
                entries: entries.iter().rev().map(|&v| recip(v)).collect(),
                left_fill: recip(*right_fill),
                right_fill: recip(*left_fill),
            },
            WeightRule::LacunaryBlocks { lo, .. } => {
                let h = horizon as i64;
                WeightRule::Table {
                    offset: -h,
                    entries: (-h..0).map(|n| recip(self.eval(-(n + 1)))).collect(),
                    left_fill: recip(*lo),
                    right_fill: recip(*lo),
                }
            }
        };
        WeightSequence::new(rule)
    }

    /// The shift with every weight multiplied by `factor`.
    pub fn scaled(&self, factor: T) -> Result<WeightSequence<T>, WeightError> {
        WeightSequence::new(self.rule.map_values(|v| v * factor))
    }
}

impl<T: Real> fmt::Display for WeightSequence<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (|w| in [{}, {}])", self.rule.kind(), self.magnitude_inf, self.magnitude_sup)
    }
}

/// Prefix sums of `ln|w_n|` and `arg w_n` over a finite index range.
///
/// `sum(a, b)` is `Σ_{n=a}^{b-1} ln|w_n|` for `lo <= a <= b <= hi`.
#[derive(Clone, Debug)]
pub struct LogWindow<T> {
    lo: i64,
    log_prefix: Vec<T>,
    phase_prefix: Vec<T>,
}

impl<T: Real> LogWindow<T> {
    pub fn build(w: &WeightSequence<T>, lo: i64, hi: i64) -> Self {
        assert!(lo <= hi, "empty log window [{lo}, {hi})");
        let len = (hi - lo) as usize;
        let mut log_prefix = Vec::with_capacity(len + 1);
        let mut phase_prefix = Vec::with_capacity(len + 1);
        let (mut l, mut p) = (T::zero(), T::zero());
        log_prefix.push(l);
        phase_prefix.push(p);
        for n in lo..hi {
            let v = w.eval(n);
            l = l + v.norm().ln();
            p = p + v.arg();
            log_prefix.push(l);
            phase_prefix.push(p);
        }
        LogWindow { lo, log_prefix, phase_prefix }
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.lo + self.log_prefix.len() as i64 - 1
    }

    fn slot(&self, n: i64) -> usize {
        debug_assert!(n >= self.lo && n <= self.hi(), "index {n} outside [{}, {}]", self.lo, self.hi());
        (n - self.lo) as usize
    }

    pub fn sum(&self, a: i64, b: i64) -> T {
        self.log_prefix[self.slot(b)] - self.log_prefix[self.slot(a)]
    }

    pub fn phase(&self, a: i64, b: i64) -> T {
        self.phase_prefix[self.slot(b)] - self.phase_prefix[self.slot(a)]
    }

    /// `w_a ⋯ w_{b-1}` as a complex number assembled from its log-magnitude and phase.
    pub fn product(&self, a: i64, b: i64) -> Complex<T> {
        crate::scalar::cis(self.sum(a, b), self.phase(a, b))
    }
}

/// Named rules shipped with the toolkit.
pub fn bundled_rules<T: Real>() -> Vec<(&'static str, WeightRule<T>)> {
    let one = T::one();
    let two = T::lit(2.0);
    vec![
        ("unweighted", WeightRule::constant(one)),
        ("constant-2", WeightRule::constant(two)),
        ("periodic-2-1", WeightRule::periodic(&[two, one])),
        ("two-sided-step-2-1", WeightRule::two_sided_step(two, one)),
        ("paper-example", WeightRule::lacunary_blocks(two, one)),
        (
            "table-demo",
            WeightRule::table(-3, &[T::lit(0.5), T::lit(3.0), T::lit(1.5), T::lit(0.75), two], T::lit(1.25), T::lit(0.8)),
        ),
    ]
}

pub fn bundled_rule<T: Real>(name: &str) -> Option<WeightRule<T>> {
    bundled_rules().into_iter().find(|(n, _)| *n == name).map(|(_, r)| r)
}

#[derive(Serialize, Deserialize)]
#[serde(untagged, bound = "T: Real")]
enum ComplexRepr<T> {
    Real(T),
    Pair([T; 2]),
}

impl<T: Real> ComplexRepr<T> {
    fn from_complex(c: &Complex<T>) -> Self {
        if c.im == T::zero() {
            ComplexRepr::Real(c.re)
        } else {
            ComplexRepr::Pair([c.re, c.im])
        }
    }

    fn into_complex(self) -> Complex<T> {
        match self {
            ComplexRepr::Real(re) => Complex::new(re, T::zero()),
            ComplexRepr::Pair([re, im]) => Complex::new(re, im),
        }
    }
}

mod complex_serde {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<T: Real, S: Serializer>(c: &Complex<T>, s: S) -> Result<S::Ok, S::Error> {
        ComplexRepr::from_complex(c).serialize(s)
    }

    pub fn deserialize<'de, T: Real, D: Deserializer<'de>>(d: D) -> Result<Complex<T>, D::Error> {
        ComplexRepr::<T>::deserialize(d).map(ComplexRepr::into_complex)
    }
}

mod complex_vec_serde {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<T: Real, S: Serializer>(v: &[Complex<T>], s: S) -> Result<S::Ok, S::Error> {
        let reprs: Vec<_> = v.iter().map(ComplexRepr::from_complex).collect();
        reprs.serialize(s)
    }

    pub fn deserialize<'de, T: Real, D: Deserializer<'de>>(d: D) -> Result<Vec<Complex<T>>, D::Error> {
        let reprs = Vec::<ComplexRepr<T>>::deserialize(d)?;
        Ok(reprs.into_iter().map(ComplexRepr::into_complex).collect())
    }
}
