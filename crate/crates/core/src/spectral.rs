//! Finite-horizon estimators for the sliding-product quantities of a
//! bilateral weighted shift.
//!
//! Every quantity is a limit of window geometric means `|w_a ⋯ w_{a+n-1}|^{1/n}`:
//!
//! | quantity | per-n value                                  | limit   |
//! |----------|----------------------------------------------|---------|
//! | `r±`     | sup over window positions                    | lim     |
//! | `r1±`    | inf over window positions                    | lim     |
//! | `r2±`    | anchored window (`[0, n)` or `[-n, 0)`)      | liminf  |
//! | `r3±`    | anchored window                              | limsup  |
//!
//! Plus-side windows are `{k, …, k+n-1}` for `0 <= k <= horizon_k`; minus-side
//! windows are `{-n-k+1, …, -k}` for `1 <= k <= horizon_k`, so that `k = 1`
//! is exactly the anchored minus window `{-n, …, -1}`.
//!
//! Nothing here claims an exact limit. Each estimate carries its per-n
//! sequence and a [`BoundDirection`] describing its one-sided error.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Real;
use crate::weights::{LogWindow, WeightSequence};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("invalid horizon: {0}")]
    InvalidHorizon(String),
    #[error("ordering chain violated on the {side} side at n = {n}: {detail}")]
    ChainViolation { side: Side, n: usize, detail: String },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Minus,
    Plus,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Minus => "minus",
            Side::Plus => "plus",
        })
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    RMinus,
    RPlus,
    R1Minus,
    R1Plus,
    R2Minus,
    R2Plus,
    R3Minus,
    R3Plus,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
enum Aggregate {
    SupOverPositions,
    InfOverPositions,
    AnchoredLiminf,
    AnchoredLimsup,
}

impl Quantity {
    pub const ALL: [Quantity; 8] = [
        Quantity::RMinus,
        Quantity::RPlus,
        Quantity::R1Minus,
        Quantity::R1Plus,
        Quantity::R2Minus,
        Quantity::R2Plus,
        Quantity::R3Minus,
        Quantity::R3Plus,
    ];

    pub fn side(self) -> Side {
        match self {
            Quantity::RMinus | Quantity::R1Minus | Quantity::R2Minus | Quantity::R3Minus => Side::Minus,
            _ => Side::Plus,
        }
    }

    fn aggregate(self) -> Aggregate {
        match self {
            Quantity::RMinus | Quantity::RPlus => Aggregate::SupOverPositions,
            Quantity::R1Minus | Quantity::R1Plus => Aggregate::InfOverPositions,
            Quantity::R2Minus | Quantity::R2Plus => Aggregate::AnchoredLiminf,
            Quantity::R3Minus | Quantity::R3Plus => Aggregate::AnchoredLimsup,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Quantity::RMinus => "r_minus",
            Quantity::RPlus => "r_plus",
            Quantity::R1Minus => "r1_minus",
            Quantity::R1Plus => "r1_plus",
            Quantity::R2Minus => "r2_minus",
            Quantity::R2Plus => "r2_plus",
            Quantity::R3Minus => "r3_minus",
            Quantity::R3Plus => "r3_plus",
        }
    }

    pub fn parse(name: &str) -> Option<Quantity> {
        Quantity::ALL.into_iter().find(|q| q.name() == name)
    }

    fn bound_direction(self) -> BoundDirection {
        match self.aggregate() {
            // a finite position range can only undercount a sup, overcount an inf
            Aggregate::SupOverPositions => BoundDirection::Lower,
            Aggregate::InfOverPositions => BoundDirection::Upper,
            Aggregate::AnchoredLiminf | Aggregate::AnchoredLimsup => BoundDirection::Heuristic,
        }
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundDirection {
    Lower,
    Upper,
    TwoSided,
    Heuristic,
}

/// Horizons shared by all estimators.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Horizons {
    /// Largest window length for anchored sequences.
    pub n: usize,
    /// Number of window positions scanned by the sup/inf quantities.
    pub k: usize,
}

impl Horizons {
    pub fn new(n: usize, k: usize) -> Result<Self, SpectralError> {
        if n < 2 {
            return Err(SpectralError::InvalidHorizon(format!("horizon_n = {n} must be at least 2")));
        }
        if k < 1 {
            return Err(SpectralError::InvalidHorizon(format!("horizon_k = {k} must be at least 1")));
        }
        Ok(Horizons { n, k })
    }

    /// Largest window length used by the sup/inf quantities: `min(n, floor(log2 k))`,
    /// but at least 2.
    ///
    /// Windows over a two-level weight alphabet have `2^n` patterns, so `2^n`
    /// positions are the fewest that can exhibit every pattern of length `n`.
    pub fn sliding_len(&self) -> usize {
        let log2k = (usize::BITS - 1 - self.k.leading_zeros()) as usize;
        log2k.max(2).min(self.n)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct QuantityEstimate<T> {
    pub name: Quantity,
    pub horizon_n: usize,
    pub horizon_k: usize,
    /// Per-n values for window lengths `1..=sequence.len()`, in radius units.
    pub sequence: Vec<T>,
    /// Tail aggregate of `sequence` alone.
    pub raw_estimate: T,
    /// `raw_estimate` reconciled with the ordering chain (see [`spectral_profile`]).
    pub estimate: T,
    pub bound_direction: BoundDirection,
}

impl<T: Real> QuantityEstimate<T> {
    /// `(n, value)` rows for CSV output.
    pub fn rows(&self) -> impl Iterator<Item = (usize, T)> + '_ {
        self.sequence.iter().enumerate().map(|(i, &v)| (i + 1, v))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SpectralProfile<T> {
    pub horizon_n: usize,
    pub horizon_k: usize,
    pub sliding_len: usize,
    pub r_minus: QuantityEstimate<T>,
    pub r_plus: QuantityEstimate<T>,
    pub r1_minus: QuantityEstimate<T>,
    pub r1_plus: QuantityEstimate<T>,
    pub r2_minus: QuantityEstimate<T>,
    pub r2_plus: QuantityEstimate<T>,
    pub r3_minus: QuantityEstimate<T>,
    pub r3_plus: QuantityEstimate<T>,
    /// Spectral radius estimate `max(r_minus, r_plus)`.
    pub r: T,
    /// `min(r1_minus, r1_plus)`.
    pub r1: T,
    pub invertible: bool,
    /// Lower bound `m(W) = inf |w_n|`.
    pub m_of_w: T,
    pub magnitude_sup: T,
    pub minus_window: String,
}

impl<T: Real> SpectralProfile<T> {
    pub fn get(&self, q: Quantity) -> &QuantityEstimate<T> {
        match q {
            Quantity::RMinus => &self.r_minus,
            Quantity::RPlus => &self.r_plus,
            Quantity::R1Minus => &self.r1_minus,
            Quantity::R1Plus => &self.r1_plus,
            Quantity::R2Minus => &self.r2_minus,
            Quantity::R2Plus => &self.r2_plus,
            Quantity::R3Minus => &self.r3_minus,
            Quantity::R3Plus => &self.r3_plus,
        }
    }

    pub fn estimate(&self, q: Quantity) -> T {
        self.get(q).estimate
    }

    pub fn quantities(&self) -> impl Iterator<Item = &QuantityEstimate<T>> {
        Quantity::ALL.into_iter().map(move |q| self.get(q))
    }
}

pub const MINUS_WINDOW: &str = "minus-side windows are {-n-k+1, ..., -k} for 1 <= k <= horizon_k";

/// `ln|w_a ⋯ w_{a+n-1}| / n` for the anchored window of each length `n = 1..=len`.
pub fn anchored_log_means<T: Real>(w: &WeightSequence<T>, side: Side, len: usize) -> Vec<T> {
    let h = len as i64;
    match side {
        Side::Plus => {
            let window = w.log_window(0, h);
            (1..=h).map(|n| window.sum(0, n) / T::from_index(n)).collect()
        }
        Side::Minus => {
            let window = w.log_window(-h, 0);
            (1..=h).map(|n| window.sum(-n, 0) / T::from_index(n)).collect()
        }
    }
}

/// Log-domain `(inf, sup)` over window positions of the window means, for each
/// window length `n = 1..=len`.
pub fn sliding_log_means<T: Real>(
    w: &WeightSequence<T>,
    side: Side,
    len: usize,
    positions: usize,
) -> (Vec<T>, Vec<T>) {
    let (h, kk) = (len as i64, positions as i64);
    let (window, first, last): (LogWindow<T>, i64, i64) = match side {
        // window [k, k+n) for k in 0..=K
        Side::Plus => (w.log_window(0, kk + h), 0, kk),
        // window [-n-k+1, -k+1) for k in 1..=K, written with start a = -n-k+1
        Side::Minus => (w.log_window(-h - kk + 1, 0), 1, kk),
    };
    let mut infs = Vec::with_capacity(len);
    let mut sups = Vec::with_capacity(len);
    for n in 1..=h {
        let mut lo = T::infinity();
        let mut hi = T::neg_infinity();
        for k in first..=last {
            let s = match side {
                Side::Plus => window.sum(k, k + n),
                Side::Minus => window.sum(-n - k + 1, -k + 1),
            };
            lo = lo.min(s);
            hi = hi.max(s);
        }
        let n = T::from_index(n);
        infs.push(lo / n);
        sups.push(hi / n);
    }
    (infs, sups)
}

fn tail_start(len: usize) -> usize {
    len - len.div_ceil(4)
}

/// `(min, max)` over the last quarter (rounded up) of `seq`.
pub fn tail_extremes<T: Real>(seq: &[T]) -> (T, T) {
    seq[tail_start(seq.len())..]
        .iter()
        .fold((T::infinity(), T::neg_infinity()), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}

/// Liminf and limsup proxies for a log-mean sequence.
///
/// Tail extremes over the last quarter carry an `O(1/n)` bias from bounded
/// fluctuations of the partial sums. When the sequence is long enough, the
/// extremes at horizon `H` and `H/2` are combined as `2 M(H) - M(H/2)`, which
/// cancels that term, and the result is confined to the observed tail range.
pub fn limit_proxies<T: Real>(seq: &[T]) -> (T, T) {
    let (lo, hi) = tail_extremes(seq);
    if seq.len() < 16 {
        return (lo, hi);
    }
    let (half_lo, half_hi) = tail_extremes(&seq[..seq.len() / 2]);
    let two = T::lit(2.0);
    let clamp = |v: T| v.max(lo).min(hi);
    let a = clamp(two * lo - half_lo);
    let b = clamp(two * hi - half_hi);
    (a.min(b), a.max(b))
}

fn raw_estimate<T: Real>(q: Quantity, log_seq: &[T]) -> T {
    match q.aggregate() {
        // per-n sups over all positions decrease towards the limit, infs increase
        Aggregate::SupOverPositions => tail_extremes(log_seq).0,
        Aggregate::InfOverPositions => tail_extremes(log_seq).1,
        Aggregate::AnchoredLiminf => limit_proxies(log_seq).0,
        Aggregate::AnchoredLimsup => limit_proxies(log_seq).1,
    }
}

fn make_estimate<T: Real>(q: Quantity, horizons: Horizons, log_seq: &[T]) -> QuantityEstimate<T> {
    let raw = raw_estimate(q, log_seq).exp();
    QuantityEstimate {
        name: q,
        horizon_n: horizons.n,
        horizon_k: horizons.k,
        sequence: log_seq.iter().map(|v| v.exp()).collect(),
        raw_estimate: raw,
        estimate: raw,
        bound_direction: q.bound_direction(),
    }
}

/// Estimates a single quantity.
pub fn estimate_quantity<T: Real>(
    w: &WeightSequence<T>,
    name: Quantity,
    horizon_n: usize,
    horizon_k: usize,
) -> Result<QuantityEstimate<T>, SpectralError> {
    let horizons = Horizons::new(horizon_n, horizon_k)?;
    let side = name.side();
    let log_seq = match name.aggregate() {
        Aggregate::AnchoredLiminf | Aggregate::AnchoredLimsup => anchored_log_means(w, side, horizons.n),
        Aggregate::SupOverPositions => sliding_log_means(w, side, horizons.sliding_len(), horizons.k).1,
        Aggregate::InfOverPositions => sliding_log_means(w, side, horizons.sliding_len(), horizons.k).0,
    };
    Ok(make_estimate(name, horizons, &log_seq))
}

/// Per-n ordering chain `inf_k <= anchored <= sup_k` on both sides, plus
/// liminf proxy `<=` limsup proxy for the anchored sequences.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ChainReport<T> {
    pub lengths_checked: usize,
    /// Largest amount (log domain) by which any link was violated; `<= 0` when all hold strictly.
    pub worst_excess: T,
}

fn check_chain_links<T: Real>(
    side: Side,
    infs: &[T],
    anchored: &[T],
    sups: &[T],
    worst: &mut T,
) -> Result<(), SpectralError> {
    let tol = T::chain_tolerance();
    for (i, ((&lo, &mid), &hi)) in infs.iter().zip(anchored).zip(sups).enumerate() {
        let excess = (lo - mid).max(mid - hi);
        *worst = worst.max(excess);
        if excess > tol {
            return Err(SpectralError::ChainViolation {
                side,
                n: i + 1,
                detail: format!("inf {lo} <= anchored {mid} <= sup {hi} fails (log domain)"),
            });
        }
    }
    Ok(())
}

/// Checks the finite-horizon ordering chain at every window length `n <= horizon_n`.
pub fn check_ordering_chain<T: Real>(
    w: &WeightSequence<T>,
    horizon_n: usize,
    horizon_k: usize,
) -> Result<ChainReport<T>, SpectralError> {
    let horizons = Horizons::new(horizon_n, horizon_k)?;
    let mut worst = T::neg_infinity();
    for side in [Side::Minus, Side::Plus] {
        let anchored = anchored_log_means(w, side, horizons.n);
        let (infs, sups) = sliding_log_means(w, side, horizons.n, horizons.k);
        check_chain_links(side, &infs, &anchored, &sups, &mut worst)?;
        let (liminf, limsup) = limit_proxies(&anchored);
        worst = worst.max(liminf - limsup);
    }
    Ok(ChainReport { lengths_checked: horizons.n, worst_excess: worst })
}

/// Aggregates all eight quantities into a profile.
///
/// The sup/inf quantities come from short windows and the anchored ones from
/// long windows, so their raw estimates are not automatically ordered. The
/// limits satisfy `r1 <= r2 <= r3 <= r` on each side, hence the reported
/// estimates are `r = max(raw r, r3)` and `r1 = min(raw r1, r2)`. The per-n
/// chain over the sliding lengths is checked before reconciliation; a
/// violation there means an estimator bug.
pub fn spectral_profile<T: Real>(
    w: &WeightSequence<T>,
    horizon_n: usize,
    horizon_k: usize,
) -> Result<SpectralProfile<T>, SpectralError> {
    let horizons = Horizons::new(horizon_n, horizon_k)?;
    let sliding = horizons.sliding_len();
    let mut worst = T::neg_infinity();

    let mut side_estimates = |side: Side| -> Result<[QuantityEstimate<T>; 4], SpectralError> {
        let anchored = anchored_log_means(w, side, horizons.n);
        let (infs, sups) = sliding_log_means(w, side, sliding, horizons.k);
        check_chain_links(side, &infs, &anchored[..sliding], &sups, &mut worst)?;
        let (sup_q, inf_q, liminf_q, limsup_q) = match side {
            Side::Minus => (Quantity::RMinus, Quantity::R1Minus, Quantity::R2Minus, Quantity::R3Minus),
            Side::Plus => (Quantity::RPlus, Quantity::R1Plus, Quantity::R2Plus, Quantity::R3Plus),
        };
        let mut r = make_estimate(sup_q, horizons, &sups);
        let mut r1 = make_estimate(inf_q, horizons, &infs);
        let r2 = make_estimate(liminf_q, horizons, &anchored);
        let r3 = make_estimate(limsup_q, horizons, &anchored);
        r.estimate = r.raw_estimate.max(r3.estimate);
        r1.estimate = r1.raw_estimate.min(r2.estimate);
        Ok([r, r1, r2, r3])
    };
    let [r_minus, r1_minus, r2_minus, r3_minus] = side_estimates(Side::Minus)?;
    let [r_plus, r1_plus, r2_plus, r3_plus] = side_estimates(Side::Plus)?;

    let tol = T::chain_tolerance();
    for (side, chain) in [
        (Side::Minus, [&r1_minus, &r2_minus, &r3_minus, &r_minus]),
        (Side::Plus, [&r1_plus, &r2_plus, &r3_plus, &r_plus]),
    ] {
        for pair in chain.windows(2) {
            if pair[0].estimate.ln() > pair[1].estimate.ln() + tol {
                return Err(SpectralError::ChainViolation {
                    side,
                    n: horizons.n,
                    detail: format!(
                        "estimate {} = {} exceeds {} = {}",
                        pair[0].name, pair[0].estimate, pair[1].name, pair[1].estimate
                    ),
                });
            }
        }
    }

    let r = r_minus.estimate.max(r_plus.estimate);
    let r1 = r1_minus.estimate.min(r1_plus.estimate);
    Ok(SpectralProfile {
        horizon_n: horizons.n,
        horizon_k: horizons.k,
        sliding_len: sliding,
        r_minus,
        r_plus,
        r1_minus,
        r1_plus,
        r2_minus,
        r2_plus,
        r3_minus,
        r3_plus,
        r,
        r1,
        invertible: w.is_invertible(),
        m_of_w: w.magnitude_inf(),
        magnitude_sup: w.magnitude_sup(),
        minus_window: MINUS_WINDOW.to_string(),
    })
}

/// `‖W^n e_k‖^{1/n}` for `n = 1..=horizon_n` with a limsup estimate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct LocalRadiusEstimate<T> {
    pub basis_index: i64,
    pub horizon_n: usize,
    pub sequence: Vec<T>,
    pub estimate: T,
}

pub fn local_radius<T: Real>(
    w: &WeightSequence<T>,
    k: i64,
    horizon_n: usize,
) -> Result<LocalRadiusEstimate<T>, SpectralError> {
    if horizon_n < 2 {
        return Err(SpectralError::InvalidHorizon(format!("horizon_n = {horizon_n} must be at least 2")));
    }
    let h = horizon_n as i64;
    // ‖W^n e_k‖ = |w_k ⋯ w_{n+k-1}|
    let window = w.log_window(k, k + h);
    let logs: Vec<T> = (1..=h).map(|n| window.sum(k, k + n) / T::from_index(n)).collect();
    let estimate = limit_proxies(&logs).1.exp();
    Ok(LocalRadiusEstimate {
        basis_index: k,
        horizon_n,
        sequence: logs.into_iter().map(|v| v.exp()).collect(),
        estimate,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct IdentityReport<T> {
    pub basis_index: i64,
    pub horizon_n: usize,
    pub checked: usize,
    pub max_deviation: T,
}

/// Compares `ln‖W^n e_k‖` accumulated term by term against its regrouping
/// through the orbit of `e_0`:
///
/// * `k > 0`: `ln‖W^{n+k} e_0‖ - ln‖W^k e_0‖`
/// * `k < 0`, `n > -k`: `ln‖W^{-k} e_k‖ + ln‖W^{n+k} e_0‖`
pub fn check_local_radius_identities<T: Real>(
    w: &WeightSequence<T>,
    k: i64,
    horizon_n: usize,
) -> Result<IdentityReport<T>, SpectralError> {
    if k == 0 || horizon_n as i64 <= k.abs() {
        return Err(SpectralError::InvalidHorizon(format!(
            "need k != 0 and horizon_n > |k|, got k = {k}, horizon_n = {horizon_n}"
        )));
    }
    let h = horizon_n as i64;
    let window = w.log_window(k.min(0), h + k.max(0));
    let mut direct = T::zero();
    let mut max_deviation = T::zero();
    let mut checked = 0;
    for n in 1..=h {
        direct = direct + w.log_magnitude(k + n - 1);
        let regrouped = if k > 0 {
            window.sum(0, n + k) - window.sum(0, k)
        } else if n > -k {
            window.sum(k, 0) + window.sum(0, n + k)
        } else {
            continue;
        };
        max_deviation = max_deviation.max((direct - regrouped).abs());
        checked += 1;
    }
    Ok(IdentityReport { basis_index: k, horizon_n, checked, max_deviation })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::{bundled_rules, WeightRule};
    use proptest::prelude::*;

    fn seq(rule: WeightRule<f64>) -> WeightSequence<f64> {
        WeightSequence::new(rule).unwrap()
    }

    /// Direct product of evaluated weights, independent of the prefix-sum path.
    /// Long windows raise each factor to `1/n` first so the product stays finite.
    fn direct_mean(w: &WeightSequence<f64>, start: i64, n: i64) -> f64 {
        let mags = (start..start + n).map(|j| w.eval(j).norm());
        if n <= 256 {
            mags.product::<f64>().powf(1.0 / n as f64)
        } else {
            mags.map(|m| m.powf(1.0 / n as f64)).product()
        }
    }

    #[test]
    fn constant_one_is_flat() {
        let w = seq(WeightRule::constant(1.0));
        for q in Quantity::ALL {
            let e = estimate_quantity(&w, q, 64, 64).unwrap();
            assert_eq!(e.estimate, 1.0, "{q}");
            assert!(e.sequence.iter().all(|&v| v == 1.0));
        }
    }

    #[test]
    fn lacunary_r_plus_short_windows_reach_two() {
        let w = seq(WeightRule::lacunary_blocks(2.0, 1.0));
        let e = estimate_quantity(&w, Quantity::RPlus, 16, 1 << 16).unwrap();
        assert_eq!(e.sequence.len(), 16);
        // oracle: direct search over positions for an all-hi window of length 16
        let best = (0..=(1i64 << 16)).map(|k| direct_mean(&w, k, 16)).fold(0.0, f64::max);
        assert_eq!(best, 2.0);
        assert!((e.estimate - 2.0).abs() < 1e-12);
        assert_eq!(e.bound_direction, BoundDirection::Lower);
    }

    #[test]
    fn lacunary_r3_plus_stays_near_one() {
        let w = seq(WeightRule::lacunary_blocks(2.0, 1.0));
        let h = 1usize << 16;
        let e = estimate_quantity(&w, Quantity::R3Plus, h, h).unwrap();
        // 135 hi weights below 2^16: blocks m = 1..=15 of length m + 1
        let hi_count: usize = (1..=15).map(|m| m + 1).sum();
        assert_eq!(hi_count, 135);
        let prefix = w.log_magnitude_prefix(0, h as i64);
        assert!((prefix - 135.0 * 2f64.ln()).abs() < 1e-9);
        assert!((e.sequence[h - 1] - 2f64.powf(135.0 / h as f64)).abs() < 1e-12);
        assert!(e.estimate >= 1.0 && e.estimate <= 1.01, "{}", e.estimate);
    }

    #[test]
    fn two_sided_step_r2_minus() {
        let w = seq(WeightRule::two_sided_step(2.0, 1.0));
        let e = estimate_quantity(&w, Quantity::R2Minus, 64, 64).unwrap();
        for (i, v) in e.sequence.iter().enumerate() {
            assert!((v - direct_mean(&w, -(i as i64) - 1, i as i64 + 1)).abs() < 1e-12);
        }
        assert!((e.estimate - 2.0).abs() < 1e-12);
    }

    #[test]
    fn profile_constant_two() {
        let p = spectral_profile(&seq(WeightRule::constant(2.0)), 64, 64).unwrap();
        for q in p.quantities() {
            assert!((q.estimate - 2.0).abs() < 1e-12, "{}", q.name);
        }
        assert!((p.r - 2.0).abs() < 1e-12 && (p.r1 - 2.0).abs() < 1e-12);
        assert!(p.invertible);
        assert_eq!(p.m_of_w, 2.0);
    }

    #[test]
    fn profile_periodic_is_sqrt_two() {
        let w = seq(WeightRule::periodic(&[2.0, 1.0]));
        let h = 1 << 12;
        let p = spectral_profile(&w, h, h).unwrap();
        // oracle: direct product over the full horizon
        let oracle = direct_mean(&w, 0, h as i64);
        assert!((oracle - 2f64.sqrt()).abs() < 1e-12);
        for q in p.quantities() {
            assert!((q.estimate - oracle).abs() < 1e-6, "{} = {}", q.name, q.estimate);
        }
        assert!((p.r - oracle).abs() < 1e-6 && (p.r1 - oracle).abs() < 1e-6);
    }

    #[test]
    fn profile_two_sided_step() {
        let p = spectral_profile(&seq(WeightRule::two_sided_step(2.0, 1.0)), 256, 256).unwrap();
        for q in Quantity::ALL {
            let want = if q.side() == Side::Minus { 2.0 } else { 1.0 };
            assert!((p.estimate(q) - want).abs() < 1e-12, "{q}");
        }
        assert!((p.r - 2.0).abs() < 1e-12);
        assert!((p.r1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn minus_window_at_k_one_is_anchored() {
        let w = seq(WeightRule::table(-9, &[3.0, 0.5, 2.0, 0.25, 1.5, 4.0, 0.75, 1.25], 1.0, 1.0));
        let anchored = anchored_log_means(&w, Side::Minus, 8);
        let (infs, sups) = sliding_log_means(&w, Side::Minus, 8, 1);
        assert_eq!(anchored.len(), 8);
        for i in 0..8 {
            assert!((infs[i] - anchored[i]).abs() < 1e-14);
            assert!((sups[i] - anchored[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn sliding_len_policy() {
        assert_eq!(Horizons::new(1 << 16, 1 << 16).unwrap().sliding_len(), 16);
        assert_eq!(Horizons::new(8, 1 << 16).unwrap().sliding_len(), 8);
        assert_eq!(Horizons::new(64, 1).unwrap().sliding_len(), 2);
        assert!(Horizons::new(1, 4).is_err());
        assert!(Horizons::new(4, 0).is_err());
    }

    #[test]
    fn limit_proxies_cancel_bounded_oscillation() {
        // a_n = c + (n odd) * b / n
        let seq: Vec<f64> = (1..=4096).map(|n| 0.3 + if n % 2 == 1 { 0.5 / n as f64 } else { 0.0 }).collect();
        let (lo, hi) = limit_proxies(&seq);
        assert_eq!(lo, 0.3);
        assert!((hi - 0.3).abs() < 1e-6);
        let (tlo, thi) = tail_extremes(&seq);
        assert_eq!(tlo, 0.3);
        assert!(thi - 0.3 > 1e-4);
    }

    #[test]
    fn local_radius_examples() {
        let one = local_radius(&seq(WeightRule::constant(1.0)), 0, 64).unwrap();
        assert_eq!(one.estimate, 1.0);
        let lac = local_radius(&seq(WeightRule::lacunary_blocks(2.0, 1.0)), 0, 1 << 16).unwrap();
        assert!(lac.estimate >= 1.0 && lac.estimate <= 1.01);
    }

    #[test]
    fn local_radius_at_zero_matches_r3_plus() {
        for (_, rule) in bundled_rules::<f64>() {
            let w = seq(rule);
            let e0 = local_radius(&w, 0, 1024).unwrap();
            let r3 = estimate_quantity(&w, Quantity::R3Plus, 1024, 1024).unwrap();
            assert_eq!(e0.estimate, r3.raw_estimate);
        }
    }

    #[test]
    fn local_radius_identities() {
        let c2 = seq(WeightRule::constant(2.0));
        assert!(check_local_radius_identities(&c2, 5, 64).unwrap().max_deviation < 1e-10);
        let lac = seq(WeightRule::lacunary_blocks(2.0, 1.0));
        let rep = check_local_radius_identities(&lac, -3, 512).unwrap();
        assert!(rep.max_deviation < 1e-9);
        assert_eq!(rep.checked, 512 - 3);
        let per = seq(WeightRule::periodic(&[2.0, 1.0]));
        assert!(check_local_radius_identities(&per, 1, 512).unwrap().max_deviation < 1e-9);
        assert!(check_local_radius_identities(&per, 0, 512).is_err());
        assert!(check_local_radius_identities(&per, 9, 9).is_err());
    }

    #[test]
    fn local_radius_agrees_across_basis_vectors() {
        for (name, rule) in bundled_rules::<f64>() {
            let w = seq(rule);
            let e0 = local_radius(&w, 0, 1 << 12).unwrap().estimate;
            for k in [-7, -3, 1, 4, 9] {
                let ek = local_radius(&w, k, 1 << 12).unwrap().estimate;
                assert!((ek - e0).abs() < 0.05, "{name} k={k}: {ek} vs {e0}");
            }
        }
    }

    #[test]
    fn generic_over_f32() {
        let w = WeightSequence::new(WeightRule::<f32>::two_sided_step(2.0, 1.0)).unwrap();
        let p = spectral_profile(&w, 256, 256).unwrap();
        assert!((p.r - 2.0).abs() < 1e-4);
        assert!((p.r1 - 1.0).abs() < 1e-4);
    }

    fn table_rule() -> impl Strategy<Value = WeightRule<f64>> {
        (
            -40i64..40,
            prop::collection::vec((-1.4f64..1.4).prop_map(f64::exp), 0..32),
            (-1.4f64..1.4).prop_map(f64::exp),
            (-1.4f64..1.4).prop_map(f64::exp),
        )
            .prop_map(|(o, e, l, r)| WeightRule::table(o, &e, l, r))
    }

    proptest! {
        #[test]
        fn per_n_chain_holds(rule in table_rule()) {
            let w = seq(rule);
            let rep = check_ordering_chain(&w, 48, 64).unwrap();
            prop_assert!(rep.worst_excess <= 1e-10);
        }

        #[test]
        fn profile_never_reports_chain_violation(rule in table_rule()) {
            let w = seq(rule);
            let p = spectral_profile(&w, 128, 128).unwrap();
            prop_assert_eq!(p.r, p.r_minus.estimate.max(p.r_plus.estimate));
            prop_assert_eq!(p.r1, p.r1_minus.estimate.min(p.r1_plus.estimate));
            for q in p.quantities() {
                prop_assert!(q.estimate <= w.magnitude_sup() * (1.0 + 1e-12));
                prop_assert!(q.estimate >= w.magnitude_inf() * (1.0 - 1e-12));
            }
        }

        #[test]
        fn estimates_scale_covariantly(rule in table_rule(), s in 0.2f64..5.0) {
            let w = seq(rule);
            let ws = w.scaled(s).unwrap();
            let p = spectral_profile(&w, 96, 96).unwrap();
            let ps = spectral_profile(&ws, 96, 96).unwrap();
            for q in Quantity::ALL {
                let (a, b) = (p.get(q), ps.get(q));
                prop_assert!((b.estimate.ln() - a.estimate.ln() - s.ln()).abs() < 1e-10);
                for (x, y) in a.sequence.iter().zip(&b.sequence) {
                    prop_assert!((y.ln() - x.ln() - s.ln()).abs() < 1e-10);
                }
            }
        }
    }
}
