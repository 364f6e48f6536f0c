//! Portable transcendental functions.
//!
//! All log-likelihoods, logistic activations, and softmax distributions go
//! through these wrappers instead of the platform libm, so that serialized
//! reports and trace files are byte-identical across operating systems.

/// Natural logarithm.
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

/// Exponential.
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

/// Logistic sigmoid with the argument clamped to [-30, 30] so the output
/// stays strictly inside (0, 1) in f64.
pub fn sigmoid(z: f64) -> f64 {
    let z = z.clamp(-30.0, 30.0);
    1.0 / (1.0 + exp(-z))
}

/// Clip into [0, 1].
pub fn clip01(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigmoid_stays_open_interval() {
        assert!(sigmoid(1e9) < 1.0);
        assert!(sigmoid(-1e9) > 0.0);
        assert_eq!(sigmoid(0.0), 0.5);
    }

    #[test]
    fn clip_bounds() {
        assert_eq!(clip01(-0.3), 0.0);
        assert_eq!(clip01(1.7), 1.0);
        assert_eq!(clip01(0.4), 0.4);
    }
}
