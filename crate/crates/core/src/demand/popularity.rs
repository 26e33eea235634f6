use rand::Rng;

use crate::{Error, Result};

/// File popularity `p_n ∝ n^{-θ}` over `1..=N`.
#[derive(Debug, Clone, PartialEq)]
pub struct PopularityDist {
    theta: f64,
    pmf: Vec<f64>,
    cdf: Vec<f64>,
}

/// Zipf pmf with exponent `theta`; `theta = 0` is uniform.
pub fn zipf_pmf(library: usize, theta: f64) -> Result<PopularityDist> {
    if library == 0 {
        return Err(Error::InvalidConfig(
            "library must hold at least one file".into(),
        ));
    }
    if !(theta >= 0.0 && theta.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "theta = {theta} must be >= 0"
        )));
    }
    let weights: Vec<f64> = (1..=library).map(|n| (n as f64).powf(-theta)).collect();
    let total: f64 = weights.iter().sum();
    let pmf: Vec<f64> = weights.iter().map(|w| w / total).collect();
    let mut acc = 0.0;
    let mut cdf: Vec<f64> = pmf
        .iter()
        .map(|p| {
            acc += p;
            acc
        })
        .collect();
    *cdf.last_mut().expect("library is non-empty") = 1.0;
    Ok(PopularityDist { theta, pmf, cdf })
}

impl PopularityDist {
    pub fn library(&self) -> usize {
        self.pmf.len()
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    /// `p_n` for a 1-based file index.
    pub fn prob(&self, file: usize) -> f64 {
        self.pmf[file - 1]
    }

    /// Draws a 1-based file index.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        self.cdf
            .partition_point(|&c| c <= u)
            .min(self.pmf.len() - 1)
            + 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let u = zipf_pmf(7, 0.0).unwrap();
        assert!(u.pmf().iter().all(|&p| (p - 1.0 / 7.0).abs() < 1e-15));
        let z = zipf_pmf(2, 1.0).unwrap();
        assert!((z.prob(1) - 2.0 / 3.0).abs() < 1e-15);
        assert!((z.prob(2) - 1.0 / 3.0).abs() < 1e-15);
        let z = zipf_pmf(1000, 0.75).unwrap();
        assert!((z.prob(1) / z.prob(1000) - 1000f64.powf(0.75)).abs() < 1e-9);
        assert!((z.pmf().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(z.pmf().windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(zipf_pmf(0, 0.0).is_err());
        assert!(zipf_pmf(10, -0.5).is_err());
        assert!(zipf_pmf(10, f64::NAN).is_err());
    }

    #[test]
    fn sampling_stays_in_range() {
        use rand::SeedableRng;
        let z = zipf_pmf(5, 1.2).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let mut counts = [0usize; 5];
        for _ in 0..50_000 {
            counts[z.sample(&mut rng) - 1] += 1;
        }
        for (i, &c) in counts.iter().enumerate() {
            let p = z.pmf()[i];
            let sd = (50_000.0 * p * (1.0 - p)).sqrt();
            assert!((c as f64 - 50_000.0 * p).abs() < 4.0 * sd);
        }
    }
}
