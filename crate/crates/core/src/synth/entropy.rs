use crate::counting::OutcomeDistribution;

/// Shannon entropy in bits of the distribution given by `counts`.
///
/// Terms are summed in ascending order of count so that equal multisets of
/// counts produce bit-identical results regardless of outcome order.
pub fn entropy_bits(counts: &[u64]) -> f64 {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let mut nonzero: Vec<u64> = counts.iter().copied().filter(|&c| c > 0).collect();
    if nonzero.len() <= 1 {
        return 0.0;
    }
    nonzero.sort_unstable();
    let n = total as f64;
    let h: f64 = nonzero
        .iter()
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum();
    h.max(0.0)
}

/// Entropy of a probability vector; zero probabilities contribute nothing.
pub fn entropy_of_probs(probs: &[f64]) -> f64 {
    let mut ps: Vec<f64> = probs.iter().copied().filter(|&p| p > 0.0).collect();
    ps.sort_by(f64::total_cmp);
    ps.iter().map(|&p| -p * p.log2()).sum::<f64>().max(0.0)
}

pub fn entropy(dist: &OutcomeDistribution) -> f64 {
    entropy_bits(&dist.counts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_values() {
        assert!((entropy_bits(&[9, 9, 9]) - 3f64.log2()).abs() < 1e-12);
        assert_eq!(entropy_bits(&[27, 0, 0]), 0.0);
        assert_eq!(entropy_bits(&[]), 0.0);
        assert!((entropy_bits(&[1, 1]) - 1.0).abs() < 1e-15);
        assert!((entropy_of_probs(&[1.0 / 3.0; 3]) - 1.584962500721156).abs() < 1e-12);
        assert_eq!(entropy_of_probs(&[1.0, 0.0, 0.0]), 0.0);
    }

    #[test]
    fn order_independent() {
        assert_eq!(
            entropy_bits(&[3, 1, 5]).to_bits(),
            entropy_bits(&[5, 3, 1]).to_bits()
        );
    }
}
