use crate::evalues::{generalized_half_width, plain_half_width};
use crate::procedures::{by_dependent_alpha, e_by_alpha, harmonic};

/// `K / exp(2·sqrt(log(2/δ)·log ℓ_K))`: for a selection of at least this
/// size, the Hoeffding e-CI tuned at `α' = δ` and reported at `δ|S|/K` is no
/// wider than the plain Hoeffding CI at `δ|S|/(K·ℓ_K)`.
pub fn crossover_threshold(k: usize, delta: f64) -> f64 {
    let spread = 2.0 * ((2.0 / delta).ln() * harmonic(k).ln()).sqrt();
    k as f64 / spread.exp()
}

/// Half-widths `(e-BY, BY-dependent)` for `n` samples in `[0, 1]` and a
/// selection of size `s`.
pub fn crossover_half_widths(k: usize, delta: f64, s: usize, n: u64) -> (f64, f64) {
    let eby = generalized_half_width(n, 1.0, e_by_alpha(delta, s, k), delta);
    let by = plain_half_width(n, 1.0, by_dependent_alpha(delta, s, k));
    (eby, by)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_value() {
        let b = crossover_threshold(1000, 0.1);
        assert!((b - 7.36).abs() < 0.01, "{b}");
    }

    #[test]
    fn bound_separates_widths() {
        let (k, delta) = (1000, 0.1);
        let b = crossover_threshold(k, delta);
        let above = b.ceil() as usize;
        let (e, p) = crossover_half_widths(k, delta, above, 100);
        assert!(e <= p);
        let below = b.floor() as usize - 1;
        let (e, p) = crossover_half_widths(k, delta, below, 100);
        assert!(e > p);
    }

    #[test]
    fn fraction_decreases_in_k() {
        let ks = [10, 100, 1000, 10_000, 100_000];
        let fr: Vec<f64> = ks.iter().map(|&k| crossover_threshold(k, 0.1) / k as f64).collect();
        assert!(fr.windows(2).all(|w| w[1] < w[0]));
    }
}
