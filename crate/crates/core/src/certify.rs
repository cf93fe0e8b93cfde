//! Finite-horizon compactness certificates and empirical precompactness probes.
//!
//! A certificate for a vector `x` with `r(x, T) < c < d`, where `d` is the
//! distance from `0` to the boundary of the full spectrum, records
//!
//! * `n0`: from here on `‖T^n x‖ <= c^n` (checked up to a horizon),
//! * `n1 >= n0` with `Σ_{n>n1} (c/d)^n < ε`,
//!
//! so that for every polynomial with `‖p(T)‖ <= 1` the vector `p(T)x` lies
//! within `ε` of `F = span{x, Tx, …, T^{n1} x}`. The coefficient estimate
//! `|a_n| <= ‖p(T)‖ / d^n` that drives this is checked separately by
//! [`cauchy_coefficient_check`].
//!
//! Nothing here proves compactness: orbit bounds are verified only up to the
//! horizon, and every certificate carries that caveat.

// `!(x > 0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;
use thiserror::Error;

use crate::lattice::{apply_polynomial, op_norm_truncated, op_norm_upper_bound, LatticeError, LatticeVector, ShiftPolynomial};
use crate::scalar::Real;
use crate::spectral::{local_radius, SpectralError, SpectralProfile};
use crate::weights::WeightSequence;

/// Uniform separation of an inverse orbit that rules out precompactness.
pub const WITNESS_SEPARATION: f64 = 0.5;

/// Absolute slack in the coefficient bound `|a_n| <= d^{-n}`.
pub const CAUCHY_SLACK: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CertifyError {
    #[error("precondition violated: {0}")]
    Contract(String),
    #[error("spectral radius is zero; the full spectrum has empty interior")]
    DegenerateSpectrum,
    #[error("hypothesis unmet at e_{basis_index} with c = {c}: {reason}")]
    HypothesisUnmet { basis_index: i64, c: f64, reason: String },
    #[error("certificate violated by sample {sample}: residual {residual} >= epsilon {epsilon} for {polynomial}")]
    CertificateViolated { sample: usize, residual: f64, epsilon: f64, polynomial: String },
    #[error("coefficient bound violated at power {power}: |a_n| = {coefficient} > d^-n = {bound}")]
    BoundViolated { power: usize, coefficient: f64, bound: f64 },
    #[error("the shift is not invertible")]
    NotInvertible,
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

/// `d`: for a bilateral weighted shift the full spectrum is the closed disk of
/// radius `r(W)`, so the distance from `0` to its boundary is `r(W)` and `0`
/// is interior as soon as `r(W) > 0`.
pub fn full_spectrum_radius<T: Real>(profile: &SpectralProfile<T>) -> Result<T, CertifyError> {
    if profile.r > T::zero() {
        Ok(profile.r)
    } else {
        Err(CertifyError::DegenerateSpectrum)
    }
}

/// Midpoint of `(r(x, T), d)`, the default choice of `c`.
pub fn suggested_c<T: Real>(local_radius: T, d: T) -> T {
    (local_radius + d) / T::lit(2.0)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound = "T: Real")]
pub struct CompactnessCertificate<T> {
    pub basis_index: i64,
    pub d: T,
    pub c: T,
    pub n0: usize,
    pub n1: usize,
    pub epsilon: T,
    /// `(c/d)^{n1+1} / (1 - c/d)`, strictly below `epsilon`.
    pub tail_bound: T,
    pub horizon_checked: usize,
    /// `‖T^n x‖ <= c^n` holds only up to `horizon_checked`.
    pub caveat: bool,
    /// `F` is spanned by the basis vectors `e_j` with `j` in this closed range.
    pub subspace: (i64, i64),
}

/// `(c/d)^{n+1} / (1 - c/d)`.
pub fn geometric_tail<T: Real>(ratio: T, n: usize) -> T {
    (T::from_count(n + 1) * ratio.ln()).exp() / (T::one() - ratio)
}

/// Smallest `n` with `geometric_tail(ratio, n) < epsilon`.
pub fn tail_cutoff<T: Real>(ratio: T, epsilon: T) -> usize {
    let guess = ((epsilon * (T::one() - ratio)).ln() / ratio.ln() - T::lit(3.0)).max(T::zero());
    let mut n = guess.to_usize().unwrap_or(0);
    while n > 0 && geometric_tail(ratio, n - 1) < epsilon {
        n -= 1;
    }
    while geometric_tail(ratio, n) >= epsilon {
        n += 1;
    }
    n
}

/// Builds a certificate from abstract orbit data `log_norms[n] = ln‖T^n x‖`,
/// `n = 0..=horizon`.
pub fn certificate_from_orbit_norms<T: Real>(
    basis_index: i64,
    log_norms: &[T],
    c: T,
    d: T,
    epsilon: T,
) -> Result<CompactnessCertificate<T>, CertifyError> {
    if !(c > T::zero() && c < d) {
        return Err(CertifyError::Contract(format!("need 0 < c < d, got c = {c}, d = {d}")));
    }
    if !(epsilon > T::zero()) {
        return Err(CertifyError::Contract(format!("epsilon must be positive, got {epsilon}")));
    }
    if log_norms.len() < 5 {
        return Err(CertifyError::Contract("orbit data must cover at least 4 powers".into()));
    }
    let horizon = log_norms.len() - 1;
    let log_c = c.ln();
    let tol = T::chain_tolerance();
    let last_violation = log_norms
        .iter()
        .enumerate()
        .rev()
        .find(|(n, &l)| l > T::from_count(*n) * log_c + tol)
        .map(|(n, _)| n);
    let n0 = last_violation.map_or(0, |n| n + 1);
    let tail_from = horizon + 1 - (horizon + 1).div_ceil(4);
    if n0 > tail_from {
        return Err(CertifyError::HypothesisUnmet {
            basis_index,
            c: c.as_f64(),
            reason: format!("‖T^n x‖ > c^n persists at n = {} within the last quarter of horizon {horizon}", n0 - 1),
        });
    }
    let ratio = c / d;
    let n1 = tail_cutoff(ratio, epsilon).max(n0);
    Ok(CompactnessCertificate {
        basis_index,
        d,
        c,
        n0,
        n1,
        epsilon,
        tail_bound: geometric_tail(ratio, n1),
        horizon_checked: horizon,
        caveat: true,
        subspace: (basis_index, basis_index + n1 as i64),
    })
}

/// Certificate for `x = e_k` of the shift, using `‖W^n e_k‖ = |w_k ⋯ w_{k+n-1}|`.
pub fn build_certificate<T: Real>(
    w: &WeightSequence<T>,
    k: i64,
    c: T,
    d: T,
    epsilon: T,
    horizon: usize,
) -> Result<CompactnessCertificate<T>, CertifyError> {
    if !(c < d) {
        return Err(CertifyError::Contract(format!("need c < d, got c = {c}, d = {d}")));
    }
    let local = local_radius(w, k, horizon)?;
    if local.estimate >= c {
        return Err(CertifyError::HypothesisUnmet {
            basis_index: k,
            c: c.as_f64(),
            reason: format!("local radius estimate {} is not below c", local.estimate),
        });
    }
    let h = horizon as i64;
    let window = w.log_window(k, k + h);
    let log_norms: Vec<T> = (0..=h).map(|n| window.sum(k, k + n)).collect();
    certificate_from_orbit_norms(k, &log_norms, c, d, epsilon)
}

/// Seeded source of random polynomials with complex Gaussian coefficients.
///
/// Sample `i` draws from its own ChaCha stream, so results do not depend on
/// evaluation order.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PolynomialSampler {
    pub seed: u64,
    pub max_degree: usize,
}

impl PolynomialSampler {
    pub fn new(seed: u64, max_degree: usize) -> Self {
        PolynomialSampler { seed, max_degree }
    }

    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }

    fn coefficients<T: Real>(rng: &mut ChaCha8Rng, len: usize) -> Vec<Complex<T>> {
        (0..len)
            .map(|_| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex::new(T::lit(re), T::lit(im))
            })
            .collect()
    }

    /// `p(λ) = Σ_{n<=m} a_n λ^n` with `m` uniform in `0..=max_degree`.
    pub fn forward<T: Real>(&self, index: usize) -> ShiftPolynomial<T> {
        let mut rng = self.rng(2 * index as u64);
        let degree = rng.random_range(0..=self.max_degree);
        ShiftPolynomial::new(Self::coefficients(&mut rng, degree + 1))
    }

    /// `q(W^{-1})` with `q(0) = 0` and degree uniform in `1..=max_degree`.
    pub fn backward<T: Real>(&self, index: usize) -> ShiftPolynomial<T> {
        let mut rng = self.rng(2 * index as u64 + 1);
        let degree = rng.random_range(1..=self.max_degree.max(1));
        ShiftPolynomial::inverse_part(Self::coefficients(&mut rng, degree))
    }
}

/// Scales `p` so that `op_norm_upper_bound(p) = 1`, which guarantees `‖p(W)‖ <= 1`.
pub fn normalize_by_upper_bound<T: Real>(w: &WeightSequence<T>, p: &ShiftPolynomial<T>) -> ShiftPolynomial<T> {
    let bound = op_norm_upper_bound(w, p);
    if bound > T::zero() {
        p.scale(T::one() / bound)
    } else {
        p.clone()
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// Divide by [`op_norm_upper_bound`]; always sound.
    UpperBound,
    /// Divide by the compression norm at this half-width, a lower bound of
    /// `‖p(W)‖`; diagnostics only.
    Truncated { half_width: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound = "T: Real")]
pub struct ValidationReport<T> {
    pub basis_index: i64,
    pub epsilon: T,
    pub n1: usize,
    pub num_samples: usize,
    pub max_degree: usize,
    pub seed: u64,
    pub normalization: Normalization,
    pub max_residual: T,
    /// Samples of degree `<= n1`, whose residual must vanish.
    pub low_degree_samples: usize,
    pub low_degree_max_residual: T,
    /// Samples with residual `>= epsilon` (only possible in diagnostics mode).
    pub violations: usize,
}

fn run_validation<T: Real>(
    w: &WeightSequence<T>,
    cert: &CompactnessCertificate<T>,
    num_samples: usize,
    max_degree: usize,
    seed: u64,
    normalization: Normalization,
) -> Result<ValidationReport<T>, CertifyError> {
    if max_degree <= cert.n1 {
        return Err(CertifyError::Contract(format!("max_degree {max_degree} must exceed n1 = {}", cert.n1)));
    }
    let sampler = PolynomialSampler::new(seed, max_degree);
    let e = LatticeVector::basis(cert.basis_index);
    let cutoff = cert.basis_index + cert.n1 as i64;
    let mut report = ValidationReport {
        basis_index: cert.basis_index,
        epsilon: cert.epsilon,
        n1: cert.n1,
        num_samples,
        max_degree,
        seed,
        normalization,
        max_residual: T::zero(),
        low_degree_samples: 0,
        low_degree_max_residual: T::zero(),
        violations: 0,
    };
    for i in 0..num_samples {
        let raw = sampler.forward::<T>(i);
        let p = match normalization {
            Normalization::UpperBound => normalize_by_upper_bound(w, &raw),
            Normalization::Truncated { half_width } => {
                let norm = op_norm_truncated(w, &raw, half_width.max(raw.degree()), T::lit(1e-10))?.value;
                raw.scale(T::one() / norm)
            }
        };
        let residual = apply_polynomial(w, &p, &e)?.tail_norm_after(cutoff);
        report.max_residual = report.max_residual.max(residual);
        if p.degree() <= cert.n1 {
            report.low_degree_samples += 1;
            report.low_degree_max_residual = report.low_degree_max_residual.max(residual);
        }
        if residual >= cert.epsilon {
            if normalization == Normalization::UpperBound {
                return Err(CertifyError::CertificateViolated {
                    sample: i,
                    residual: residual.as_f64(),
                    epsilon: cert.epsilon.as_f64(),
                    polynomial: format!("{:?}", p.forward()),
                });
            }
            report.violations += 1;
        }
    }
    Ok(report)
}

/// Checks `dist(p(W) e_k, F) < ε` on seeded random polynomials normalized by
/// [`op_norm_upper_bound`]. The distance is exact: the norm of the coordinates
/// past `k + n1`.
pub fn validate_certificate<T: Real>(
    w: &WeightSequence<T>,
    cert: &CompactnessCertificate<T>,
    num_samples: usize,
    max_degree: usize,
    seed: u64,
) -> Result<ValidationReport<T>, CertifyError> {
    run_validation(w, cert, num_samples, max_degree, seed, Normalization::UpperBound)
}

/// Same sampling with a chosen normalization; residuals past `ε` are counted,
/// never raised. Truncated-norm normalization may let `‖p(W)‖` exceed 1.
pub fn validation_diagnostics<T: Real>(
    w: &WeightSequence<T>,
    cert: &CompactnessCertificate<T>,
    num_samples: usize,
    max_degree: usize,
    seed: u64,
    normalization: Normalization,
) -> Result<ValidationReport<T>, CertifyError> {
    if normalization == Normalization::UpperBound {
        return validate_certificate(w, cert, num_samples, max_degree, seed);
    }
    run_validation(w, cert, num_samples, max_degree, seed, normalization)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound = "T: Real")]
pub struct CauchyReport<T> {
    pub d: T,
    /// `d^{-n} + slack - |a_n|` for each forward coefficient.
    pub margins: Vec<T>,
    pub min_margin: T,
}

/// Checks `|a_n| <= ‖p(W)‖ / d^n` for a polynomial already normalized to
/// `op_norm_upper_bound(p) <= 1`. A violation means `d` exceeds the true
/// full-spectrum radius.
pub fn cauchy_coefficient_check<T: Real>(
    w: &WeightSequence<T>,
    p: &ShiftPolynomial<T>,
    d: T,
) -> Result<CauchyReport<T>, CertifyError> {
    let bound = op_norm_upper_bound(w, p);
    if bound > T::one() + T::chain_tolerance() {
        return Err(CertifyError::Contract(format!("polynomial is not normalized: upper bound {bound} > 1")));
    }
    let slack = T::lit(CAUCHY_SLACK);
    let log_d = d.ln();
    let margins: Vec<T> = p
        .forward()
        .iter()
        .enumerate()
        .map(|(n, a)| (-T::from_count(n) * log_d).exp() + slack - a.norm())
        .collect();
    if let Some((n, _)) = margins.iter().enumerate().find(|(_, &m)| m < T::zero()) {
        return Err(CertifyError::BoundViolated {
            power: n,
            coefficient: p.forward()[n].norm().as_f64(),
            bound: (-T::from_count(n) * log_d).exp().as_f64(),
        });
    }
    let min_margin = margins.iter().copied().fold(T::infinity(), T::min);
    Ok(CauchyReport { d, margins, min_margin })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound = "T: Real")]
pub struct CoveringReport<T> {
    pub epsilon: T,
    pub num_points: usize,
    pub net_size: usize,
    /// Largest distance from a point to its nearest center.
    pub max_residual: T,
    pub sample_seed: Option<u64>,
    /// Indices into the input of the chosen centers, in selection order.
    pub centers: Vec<usize>,
}

/// Farthest-point greedy ε-net.
///
/// The first point is the first center; each further center is the point
/// farthest from the current centers (first index on ties), until every point
/// is within `epsilon`. The selection order does not depend on `epsilon`, so
/// the net size is non-increasing in `epsilon`.
pub fn greedy_net<T: Real>(points: &[LatticeVector<T>], epsilon: T) -> Result<CoveringReport<T>, CertifyError> {
    if !(epsilon > T::zero()) {
        return Err(CertifyError::Contract(format!("epsilon must be positive, got {epsilon}")));
    }
    let mut centers = Vec::new();
    let mut nearest = vec![T::infinity(); points.len()];
    let mut next = if points.is_empty() { None } else { Some(0) };
    while let Some(c) = next {
        centers.push(c);
        for (d, p) in nearest.iter_mut().zip(points) {
            *d = d.min(p.distance(&points[c]));
        }
        let (far, dist) = nearest
            .iter()
            .enumerate()
            .fold((0, T::neg_infinity()), |(bi, bd), (i, &d)| if d > bd { (i, d) } else { (bi, bd) });
        next = (dist > epsilon).then_some(far);
    }
    let max_residual = nearest.iter().copied().fold(T::zero(), T::max);
    Ok(CoveringReport {
        epsilon,
        num_points: points.len(),
        net_size: centers.len(),
        max_residual,
        sample_seed: None,
        centers,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound = "T: Real")]
pub struct OrbitWitness<T> {
    pub horizon: usize,
    /// `m(W) >= 1`, so `‖W^{-n}‖ <= 1` for every `n`.
    pub m_of_w: T,
    pub min_pairwise_distance: T,
    pub separation: T,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case", bound = "T: Real")]
pub enum WitnessOutcome<T> {
    Found(OrbitWitness<T>),
    NotFound { reason: String, min_pairwise_distance: Option<T> },
}

impl<T> WitnessOutcome<T> {
    pub fn witness(&self) -> Option<&OrbitWitness<T>> {
        match self {
            WitnessOutcome::Found(w) => Some(w),
            WitnessOutcome::NotFound { .. } => None,
        }
    }
}

/// Looks for a uniformly separated inverse orbit `{W^{-n} e_0 : 1 <= n <= horizon}`.
///
/// When `m(W) >= 1` the monomials `μ^n` have `‖(W^{-1})^n‖ <= 1`, so the orbit
/// sits inside the unit-ball orbit of the algebra generated by `W^{-1}`. A
/// separation of at least [`WITNESS_SEPARATION`] leaves no finite net of half
/// that radius, which contradicts precompactness.
pub fn orbit_witness_noncompact<T: Real>(
    w: &WeightSequence<T>,
    horizon: usize,
) -> Result<WitnessOutcome<T>, CertifyError> {
    if !w.is_invertible() {
        return Err(CertifyError::NotInvertible);
    }
    let m = w.magnitude_inf();
    if m < T::one() {
        return Ok(WitnessOutcome::NotFound {
            reason: format!("m(W) = {m} < 1, so the powers of W^-1 are not contractions"),
            min_pairwise_distance: None,
        });
    }
    if horizon < 2 {
        return Err(CertifyError::Contract("witness horizon must be at least 2".into()));
    }
    let e0 = LatticeVector::basis(0);
    let orbit = (1..=horizon as i64)
        .map(|n| crate::lattice::apply_shift(w, &e0, -n))
        .collect::<Result<Vec<_>, _>>()?;
    let mut min_dist = T::infinity();
    for i in 0..orbit.len() {
        for j in i + 1..orbit.len() {
            min_dist = min_dist.min(orbit[i].distance(&orbit[j]));
        }
    }
    let separation = T::lit(WITNESS_SEPARATION);
    if min_dist >= separation {
        Ok(WitnessOutcome::Found(OrbitWitness { horizon, m_of_w: m, min_pairwise_distance: min_dist, separation }))
    } else {
        Ok(WitnessOutcome::NotFound {
            reason: format!("orbit points come within {min_dist} of each other"),
            min_pairwise_distance: Some(min_dist),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound = "T: Real")]
pub struct DecompositionNetReport<T> {
    pub basis_index: i64,
    pub epsilon: T,
    pub seed: u64,
    pub num_samples: usize,
    /// Net of `{p(W)e_k + q(W^{-1})e_k}` at `epsilon`.
    pub combined: CoveringReport<T>,
    /// Net of `{p(W)e_k}` at `epsilon / 4`.
    pub forward: CoveringReport<T>,
    /// Net of `{q(W^{-1})e_k}` at `epsilon / 4`.
    pub backward: CoveringReport<T>,
    /// `combined.net_size <= forward.net_size * backward.net_size`.
    pub bound_holds: bool,
}

/// Sum-set check for the algebra generated by `W` and `W^{-1}`.
///
/// Each sample pair is scaled so that `ub(p) + ub(q) = 1`, which keeps
/// `‖p(W) + q(W^{-1})‖ <= 1`. Sum points lie within `ε/2` of sums of centers
/// of the two `ε/4`-nets, and greedy centers are more than `ε` apart, so each
/// such ball holds at most one combined center.
pub fn decomposition_net_check<T: Real>(
    w: &WeightSequence<T>,
    k: i64,
    epsilon: T,
    num_samples: usize,
    max_degree: usize,
    seed: u64,
) -> Result<DecompositionNetReport<T>, CertifyError> {
    let sampler = PolynomialSampler::new(seed, max_degree);
    let e = LatticeVector::basis(k);
    let mut sums = Vec::with_capacity(num_samples);
    let mut fwd_points = Vec::with_capacity(num_samples);
    let mut bwd_points = Vec::with_capacity(num_samples);
    for i in 0..num_samples {
        let p = sampler.forward::<T>(i);
        let q = sampler.backward::<T>(i);
        let scale = op_norm_upper_bound(w, &p) + op_norm_upper_bound(w, &q);
        let (p, q) = (p.scale(T::one() / scale), q.scale(T::one() / scale));
        let a = apply_polynomial(w, &p, &e)?;
        let b = apply_polynomial(w, &q, &e)?;
        sums.push(&a + &b);
        fwd_points.push(a);
        bwd_points.push(b);
    }
    let quarter = epsilon / T::lit(4.0);
    let mut combined = greedy_net(&sums, epsilon)?;
    let mut forward = greedy_net(&fwd_points, quarter)?;
    let mut backward = greedy_net(&bwd_points, quarter)?;
    for r in [&mut combined, &mut forward, &mut backward] {
        r.sample_seed = Some(seed);
    }
    let bound_holds = combined.net_size <= forward.net_size * backward.net_size;
    Ok(DecompositionNetReport { basis_index: k, epsilon, seed, num_samples, combined, forward, backward, bound_holds })
}

/// Points `p(W) e_k` for seeded polynomials normalized by [`op_norm_upper_bound`].
pub fn sample_orbit_points<T: Real>(
    w: &WeightSequence<T>,
    k: i64,
    num_samples: usize,
    max_degree: usize,
    seed: u64,
) -> Result<Vec<LatticeVector<T>>, CertifyError> {
    let sampler = PolynomialSampler::new(seed, max_degree);
    let e = LatticeVector::basis(k);
    (0..num_samples)
        .map(|i| {
            let p = normalize_by_upper_bound(w, &sampler.forward::<T>(i));
            apply_polynomial(w, &p, &e).map_err(CertifyError::from)
        })
        .collect()
}

/// Samples orbit points and covers them with a greedy net.
pub fn cover_orbit<T: Real>(
    w: &WeightSequence<T>,
    k: i64,
    epsilon: T,
    num_samples: usize,
    max_degree: usize,
    seed: u64,
) -> Result<CoveringReport<T>, CertifyError> {
    let points = sample_orbit_points(w, k, num_samples, max_degree, seed)?;
    let mut report = greedy_net(&points, epsilon)?;
    report.sample_seed = Some(seed);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::spectral_profile;
    use crate::weights::WeightRule;

    type C = Complex<f64>;

    fn seq(rule: WeightRule<f64>) -> WeightSequence<f64> {
        WeightSequence::new(rule).unwrap()
    }

    #[test]
    fn full_spectrum_radius_examples() {
        let lac = seq(WeightRule::lacunary_blocks(2.0, 1.0));
        let p = spectral_profile(&lac, 1 << 12, 1 << 12).unwrap();
        assert!((full_spectrum_radius(&p).unwrap() - 2.0).abs() < 1e-12);
        let one = spectral_profile(&seq(WeightRule::constant(1.0)), 64, 64).unwrap();
        assert_eq!(full_spectrum_radius(&one).unwrap(), 1.0);
        let step = spectral_profile(&seq(WeightRule::two_sided_step(2.0, 1.0)), 256, 256).unwrap();
        assert!((full_spectrum_radius(&step).unwrap() - 2.0).abs() < 1e-12);
        let mut degenerate = one.clone();
        degenerate.r = 0.0;
        assert_eq!(full_spectrum_radius(&degenerate), Err(CertifyError::DegenerateSpectrum));
    }

    #[test]
    fn tail_cutoff_matches_direct_evaluation() {
        // 0.6^16 / 0.4 ≈ 7.05e-4 < 1e-3 <= 0.6^15 / 0.4 ≈ 1.18e-3
        assert!(0.6f64.powi(16) / 0.4 < 1e-3 && 0.6f64.powi(15) / 0.4 >= 1e-3);
        assert_eq!(tail_cutoff(0.6, 1e-3), 15);
        assert!(0.75f64.powi(21) / 0.25 < 1e-2 && 0.75f64.powi(20) / 0.25 >= 1e-2);
        assert_eq!(tail_cutoff(0.75, 1e-2), 20);
        for (q, eps) in [(0.1, 0.5), (0.9, 1e-6), (0.999, 1e-3), (0.5, 2.0)] {
            let n = tail_cutoff::<f64>(q, eps);
            let direct = |n: i32| q.powi(n + 1) / (1.0 - q);
            assert!(direct(n as i32) < eps);
            assert!(n == 0 || direct(n as i32 - 1) >= eps);
        }
    }

    #[test]
    fn two_sided_step_certificate() {
        let w = seq(WeightRule::two_sided_step(2.0, 1.0));
        let cert = build_certificate(&w, 0, 1.2, 2.0, 1e-3, 1 << 10).unwrap();
        assert_eq!(cert.n0, 0);
        assert_eq!(cert.n1, 15);
        assert_eq!(cert.subspace, (0, 15));
        assert!(cert.tail_bound < 1e-3);
        assert!(cert.caveat);
    }

    #[test]
    fn lacunary_certificate_matches_scan() {
        let w = seq(WeightRule::lacunary_blocks(2.0, 1.0));
        let horizon = 1usize << 12;
        let cert = build_certificate(&w, 0, 1.5, 2.0, 1e-2, horizon).unwrap();
        // oracle: direct scan of ‖W^n e_0‖ <= 1.5^n by counting hi weights
        let mut hi = 0i32;
        let mut last_bad = None;
        for n in 0..=horizon as i32 {
            if n > 0 && w.eval(n as i64 - 1).re == 2.0 {
                hi += 1;
            }
            if f64::from(hi) * 2f64.ln() > f64::from(n) * 1.5f64.ln() {
                last_bad = Some(n);
            }
        }
        let n0 = last_bad.map_or(0, |n| n as usize + 1);
        assert_eq!(cert.n0, n0);
        assert_eq!(cert.n1, n0.max(20));
    }

    #[test]
    fn certificate_contract_errors() {
        let w = seq(WeightRule::two_sided_step(2.0, 1.0));
        assert!(matches!(build_certificate(&w, 0, 2.0, 2.0, 1e-3, 256), Err(CertifyError::Contract(_))));
        assert!(matches!(build_certificate(&w, 0, 2.5, 2.0, 1e-3, 256), Err(CertifyError::Contract(_))));
        assert!(matches!(build_certificate(&w, 0, 1.2, 2.0, 0.0, 256), Err(CertifyError::Contract(_))));
        // c below the local radius 1 of e_0
        assert!(matches!(build_certificate(&w, 0, 0.9, 2.0, 1e-3, 256), Err(CertifyError::HypothesisUnmet { .. })));
    }

    #[test]
    fn orbit_data_with_late_growth_is_rejected() {
        // ‖T^n x‖ = 1 up to n = 90, then 3^n: violation in the tail quarter
        let logs: Vec<f64> = (0..=100).map(|n| if n <= 90 { 0.0 } else { n as f64 * 3f64.ln() }).collect();
        assert!(matches!(
            certificate_from_orbit_norms(0, &logs, 1.5, 2.0, 1e-2),
            Err(CertifyError::HypothesisUnmet { .. })
        ));
        // an early bump is fine and only moves n0
        let logs: Vec<f64> = (0..=100).map(|n| if n == 3 { 10.0 } else { 0.0 }).collect();
        let cert = certificate_from_orbit_norms(0, &logs, 1.5, 2.0, 1e-2).unwrap();
        assert_eq!(cert.n0, 4);
    }

    #[test]
    fn validation_on_two_sided_step() {
        let w = seq(WeightRule::two_sided_step(2.0, 1.0));
        let cert = build_certificate(&w, 0, 1.2, 2.0, 1e-3, 1 << 10).unwrap();
        let rep = validate_certificate(&w, &cert, 200, 60, 42).unwrap();
        assert!(rep.max_residual < 1e-3);
        assert!(rep.low_degree_samples > 0);
        assert_eq!(rep.low_degree_max_residual, 0.0);
        assert!(matches!(validate_certificate(&w, &cert, 10, 15, 42), Err(CertifyError::Contract(_))));
    }

    #[test]
    fn validation_is_seed_deterministic() {
        let w = seq(WeightRule::two_sided_step(2.0, 1.0));
        let cert = build_certificate(&w, 0, 1.2, 2.0, 1e-3, 1 << 10).unwrap();
        let a = validate_certificate(&w, &cert, 30, 40, 7).unwrap();
        let b = validate_certificate(&w, &cert, 30, 40, 7).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn truncated_normalization_diagnostics_run() {
        let w = seq(WeightRule::two_sided_step(2.0, 1.0));
        let cert = build_certificate(&w, 0, 1.2, 2.0, 1e-3, 1 << 10).unwrap();
        let rep = validation_diagnostics(&w, &cert, 20, 30, 42, Normalization::Truncated { half_width: 40 }).unwrap();
        assert_eq!(rep.num_samples, 20);
        let sound = validate_certificate(&w, &cert, 20, 30, 42).unwrap();
        // dividing by a smaller norm can only inflate residuals
        assert!(rep.max_residual >= sound.max_residual);
    }

    #[test]
    fn cauchy_bound_examples() {
        let lac = seq(WeightRule::lacunary_blocks(2.0, 1.0));
        for m in [1usize, 5, 20] {
            let p = normalize_by_upper_bound(&lac, &ShiftPolynomial::monomial(m, C::new(1.0, 0.0)));
            assert!(cauchy_coefficient_check(&lac, &p, 2.0).is_ok());
            assert!(matches!(cauchy_coefficient_check(&lac, &p, 3.0), Err(CertifyError::BoundViolated { power, .. }) if power == m));
        }
        let unnormalized = ShiftPolynomial::from_real(&[1.0, 1.0]);
        assert!(matches!(cauchy_coefficient_check(&lac, &unnormalized, 2.0), Err(CertifyError::Contract(_))));
    }

    #[test]
    fn greedy_net_examples() {
        let basis: Vec<LatticeVector<f64>> = (0..50).map(LatticeVector::basis).collect();
        assert_eq!(greedy_net(&basis, 0.7).unwrap().net_size, 50);
        let same = vec![LatticeVector::<f64>::basis(3); 10];
        assert_eq!(greedy_net(&same, 1e-9).unwrap().net_size, 1);
        let e0 = LatticeVector::<f64>::basis(0);
        let pts = vec![e0.clone(), e0.clone(), e0.scale(C::new(0.5, 0.0))];
        assert_eq!(greedy_net(&pts, 0.6).unwrap().net_size, 1);
        assert_eq!(greedy_net::<f64>(&[], 0.1).unwrap().net_size, 0);
        assert!(greedy_net(&pts, 0.0).is_err());
    }

    #[test]
    fn greedy_net_covers_and_is_monotone() {
        let w = seq(WeightRule::two_sided_step(2.0, 1.0));
        let points = sample_orbit_points(&w, 0, 120, 30, 3).unwrap();
        let mut last = usize::MAX;
        for eps in [0.001, 0.01, 0.05, 0.1, 0.3, 1.0] {
            let rep = greedy_net(&points, eps).unwrap();
            assert!(rep.max_residual <= eps);
            for p in &points {
                let nearest = rep.centers.iter().map(|&c| p.distance(&points[c])).fold(f64::INFINITY, f64::min);
                assert!(nearest <= eps);
            }
            assert!(rep.net_size <= last);
            last = rep.net_size;
        }
    }

    #[test]
    fn witness_examples() {
        let lac = seq(WeightRule::lacunary_blocks(2.0, 1.0));
        for h in [2, 10, 50, 200] {
            let w = orbit_witness_noncompact(&lac, h).unwrap();
            let found = w.witness().expect("witness");
            assert!((found.min_pairwise_distance - 2f64.sqrt()).abs() < 1e-12);
        }
        let half = seq(WeightRule::constant(0.5));
        assert!(matches!(orbit_witness_noncompact(&half, 50).unwrap(), WitnessOutcome::NotFound { min_pairwise_distance: None, .. }));
        let one = seq(WeightRule::constant(1.0));
        assert!(orbit_witness_noncompact(&one, 50).unwrap().witness().is_some());
        // weights >= 1 but huge on the negative side squeeze the inverse orbit together
        let squeezed = seq(WeightRule::two_sided_step(100.0, 1.0));
        assert!(matches!(orbit_witness_noncompact(&squeezed, 20).unwrap(), WitnessOutcome::NotFound { min_pairwise_distance: Some(_), .. }));
    }

    #[test]
    fn decomposition_nets_respect_sum_bound() {
        let w = seq(WeightRule::two_sided_step(2.0, 1.0));
        for eps in [0.05, 0.2] {
            let rep = decomposition_net_check(&w, 0, eps, 80, 12, 11).unwrap();
            assert!(rep.bound_holds, "{eps}: {} > {} * {}", rep.combined.net_size, rep.forward.net_size, rep.backward.net_size);
        }
    }

    #[test]
    fn sampler_streams_are_independent_of_order() {
        let s = PolynomialSampler::new(99, 10);
        let forward: Vec<ShiftPolynomial<f64>> = (0..5).map(|i| s.forward(i)).collect();
        let reversed: Vec<ShiftPolynomial<f64>> = (0..5).rev().map(|i| s.forward(i)).collect();
        for (a, b) in forward.iter().zip(reversed.iter().rev()) {
            assert_eq!(a, b);
        }
        assert!(forward.iter().all(|p| p.degree() <= 10));
        let q: ShiftPolynomial<f64> = s.backward(0);
        assert!(q.forward().is_empty() && q.inverse_degree() >= 1);
    }
}
