//! Rayleigh channel ensembles and `log₂ det(I + ρ Σ⁻¹ H Hᴴ)`.
//!
//! `Σ = σ²I + diag(γ(Q_i))` is diagonal, so the matrix is evaluated in the
//! Hermitian form `I + ρ Σ^{-1/2} H Hᴴ Σ^{-1/2}`, which has the same
//! determinant, and the log-determinant is read off its Cholesky factor.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{CapacityError, QuantizationVector};

/// Quantization noise power `scale · 2^(−2Q)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantNoiseModel {
    pub scale: f64,
}

impl Default for QuantNoiseModel {
    fn default() -> Self {
        QuantNoiseModel { scale: std::f64::consts::PI * 3f64.sqrt() / 2.0 }
    }
}

impl QuantNoiseModel {
    /// A zero scale models ideal (noise-free) converters.
    pub fn new(scale: f64) -> Result<Self, CapacityError> {
        if !scale.is_finite() || scale < 0.0 {
            return Err(CapacityError::BadParameter { name: "quantization noise scale", value: scale });
        }
        Ok(QuantNoiseModel { scale })
    }

    pub fn gamma(&self, bits: u32) -> f64 {
        self.scale * (-2.0 * f64::from(bits)).exp2()
    }
}

/// A frozen list of `n × m` channel matrices shared by every capacity
/// evaluation in a search.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelEnsemble {
    n: usize,
    m: usize,
    rho: f64,
    sigma2: f64,
    seed: Option<u64>,
    realizations: Vec<DMatrix<Complex64>>,
}

impl ChannelEnsemble {
    /// Draws `count` matrices with i.i.d. `CN(0, 1)` entries. Realization
    /// `k` comes from its own ChaCha stream, so the ensemble does not depend
    /// on how realizations are scheduled across threads.
    pub fn rayleigh(n: usize, m: usize, count: usize, rho: f64, sigma2: f64, seed: u64) -> Result<Self, CapacityError> {
        check_dims(n, m, count, rho, sigma2)?;
        let realizations = (0..count)
            .into_par_iter()
            .map(|k| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(k as u64);
                DMatrix::from_fn(n, m, |_, _| {
                    let a: f64 = StandardNormal.sample(&mut rng);
                    let b: f64 = StandardNormal.sample(&mut rng);
                    Complex64::new(a, b) * std::f64::consts::FRAC_1_SQRT_2
                })
            })
            .collect();
        Ok(ChannelEnsemble { n, m, rho, sigma2, seed: Some(seed), realizations })
    }

    pub fn from_realizations(
        realizations: Vec<DMatrix<Complex64>>,
        rho: f64,
        sigma2: f64,
    ) -> Result<Self, CapacityError> {
        let first = realizations.first().ok_or(CapacityError::EmptyEnsemble)?;
        let (n, m) = first.shape();
        check_dims(n, m, realizations.len(), rho, sigma2)?;
        for (index, h) in realizations.iter().enumerate() {
            let (rows, cols) = h.shape();
            if (rows, cols) != (n, m) {
                return Err(CapacityError::Shape { index, rows, cols, n, m });
            }
        }
        Ok(ChannelEnsemble { n, m, rho, sigma2, seed: None, realizations })
    }

    pub fn radios(&self) -> usize {
        self.n
    }

    pub fn antennas(&self) -> usize {
        self.m
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn realizations(&self) -> &[DMatrix<Complex64>] {
        &self.realizations
    }
}

fn check_dims(n: usize, m: usize, count: usize, rho: f64, sigma2: f64) -> Result<(), CapacityError> {
    if n == 0 || m == 0 {
        return Err(CapacityError::ZeroDimension);
    }
    if count == 0 {
        return Err(CapacityError::EmptyEnsemble);
    }
    if !(rho.is_finite() && rho > 0.0) {
        return Err(CapacityError::BadParameter { name: "transmit power", value: rho });
    }
    if !(sigma2.is_finite() && sigma2 > 0.0) {
        return Err(CapacityError::BadParameter { name: "thermal noise power", value: sigma2 });
    }
    Ok(())
}

/// `log₂ det(I + ρ Σ⁻¹ H Hᴴ)` for one channel matrix.
pub fn per_realization_capacity(
    h: &DMatrix<Complex64>,
    q: &QuantizationVector,
    noise: &QuantNoiseModel,
    rho: f64,
    sigma2: f64,
) -> Result<f64, CapacityError> {
    if q.len() != h.nrows() {
        return Err(CapacityError::Length { expected: h.nrows(), found: q.len() });
    }
    let inv_sqrt = DVector::from_iterator(
        q.len(),
        q.bits().iter().map(|&b| Complex64::from(1.0 / (sigma2 + noise.gamma(b)).sqrt())),
    );
    let g = DMatrix::from_diagonal(&inv_sqrt) * h;
    let mut a = &g * g.adjoint() * Complex64::from(rho);
    for i in 0..a.nrows() {
        a[(i, i)] += Complex64::from(1.0);
    }
    let chol = a.cholesky().ok_or(CapacityError::NonFinite)?;
    let l = chol.l_dirty();
    let value: f64 = (0..l.nrows()).map(|i| l[(i, i)].re.log2()).sum::<f64>() * 2.0;
    if value.is_finite() {
        Ok(value)
    } else {
        Err(CapacityError::NonFinite)
    }
}

/// Mean of the per-realization capacities over the ensemble. Realizations
/// run in parallel; the sum is a fixed pairwise tree over realization
/// indices, so the result does not depend on thread count.
pub fn ergodic_capacity(
    q: &QuantizationVector,
    ensemble: &ChannelEnsemble,
    noise: &QuantNoiseModel,
) -> Result<f64, CapacityError> {
    let values = ensemble
        .realizations
        .par_iter()
        .map(|h| per_realization_capacity(h, q, noise, ensemble.rho, ensemble.sigma2))
        .collect::<Result<Vec<f64>, _>>()?;
    Ok(pairwise_sum(&values) / values.len() as f64)
}

fn pairwise_sum(v: &[f64]) -> f64 {
    match v.len() {
        0 => 0.0,
        1 => v[0],
        n => pairwise_sum(&v[..n / 2]) + pairwise_sum(&v[n / 2..]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capacity::QuantLadder;

    fn scalar(h: f64) -> ChannelEnsemble {
        ChannelEnsemble::from_realizations(vec![DMatrix::from_element(1, 1, Complex64::from(h))], 1.0, 1.0).unwrap()
    }

    #[test]
    fn scalar_spot_values() {
        let ladder = QuantLadder::new(vec![1]).unwrap();
        let q = QuantizationVector::uniform(1, 1, &ladder).unwrap();
        // scale 4 gives γ(1) = 1
        let unit = QuantNoiseModel::new(4.0).unwrap();
        let c = ergodic_capacity(&q, &scalar(1.0), &unit).unwrap();
        assert!((c - 1.5f64.log2()).abs() < 1e-15);
        assert!((c - 0.584_962_500_721_156).abs() < 1e-12);
        let ideal = QuantNoiseModel::new(0.0).unwrap();
        assert!((ergodic_capacity(&q, &scalar(1.0), &ideal).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(ergodic_capacity(&q, &scalar(0.0), &unit).unwrap(), 0.0);
    }

    #[test]
    fn log_det_matches_closed_form_2x2() {
        // H = I: A = diag(1 + ρ/Σ_i)
        let h = DMatrix::<Complex64>::identity(2, 2);
        let ladder = QuantLadder::new(vec![1, 2]).unwrap();
        let q = QuantizationVector::new(vec![1, 2], &ladder).unwrap();
        let noise = QuantNoiseModel::default();
        let got = per_realization_capacity(&h, &q, &noise, 3.0, 0.5).unwrap();
        let want = (1.0 + 3.0 / (0.5 + noise.gamma(1))).log2() + (1.0 + 3.0 / (0.5 + noise.gamma(2))).log2();
        assert!((got - want).abs() < 1e-12);
    }

    #[test]
    fn ensemble_is_seeded_and_unit_variance() {
        let a = ChannelEnsemble::rayleigh(3, 2, 400, 1.0, 1.0, 11).unwrap();
        let b = ChannelEnsemble::rayleigh(3, 2, 400, 1.0, 1.0, 11).unwrap();
        assert_eq!(a, b);
        let c = ChannelEnsemble::rayleigh(3, 2, 400, 1.0, 1.0, 12).unwrap();
        assert_ne!(a, c);
        let power: f64 =
            a.realizations().iter().flat_map(|h| h.iter().map(|z| z.norm_sqr())).sum::<f64>() / (400.0 * 6.0);
        assert!((power - 1.0).abs() < 0.1, "{power}");
    }

    #[test]
    fn default_noise_is_decreasing() {
        let n = QuantNoiseModel::default();
        assert!((1..16).all(|b| n.gamma(b + 1) < n.gamma(b)));
        assert!(QuantNoiseModel::new(-1.0).is_err());
    }

    #[test]
    fn shape_errors() {
        let h = DMatrix::<Complex64>::zeros(2, 2);
        let g = DMatrix::<Complex64>::zeros(3, 2);
        assert!(matches!(
            ChannelEnsemble::from_realizations(vec![h, g], 1.0, 1.0),
            Err(CapacityError::Shape { index: 1, .. })
        ));
        assert!(ChannelEnsemble::rayleigh(2, 2, 1, 1.0, 0.0, 0).is_err());
    }
}
