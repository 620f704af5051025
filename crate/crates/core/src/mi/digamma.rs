use crate::error::{Error, Result};

const SHIFT_THRESHOLD: f64 = 10.0;

/// Digamma function, `d/dx ln Gamma(x)`, for `x > 0`.
///
/// Arguments below 10 are shifted up with `psi(x) = psi(x + 1) - 1/x`, then the
/// asymptotic expansion in `1/x^2` is summed through the `x^-14` term, which
/// keeps the absolute error near machine precision.
pub fn digamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("digamma requires a finite x > 0, got {x}")));
    }
    Ok(digamma_unchecked(x))
}

pub(crate) fn digamma_unchecked(mut x: f64) -> f64 {
    let mut acc = 0.0;
    while x < SHIFT_THRESHOLD {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let inv2 = 1.0 / (x * x);
    // B_2k / (2k) for k = 1..7
    let series = inv2
        * (1.0 / 12.0
            - inv2
                * (1.0 / 120.0
                    - inv2
                        * (1.0 / 252.0
                            - inv2
                                * (1.0 / 240.0
                                    - inv2
                                        * (1.0 / 132.0
                                            - inv2 * (691.0 / 32760.0 - inv2 / 12.0))))));
    acc + x.ln() - 0.5 / x - series
}

#[cfg(test)]
mod tests {
    use super::*;

    const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

    #[test]
    fn known_values() {
        let err = (digamma(1.0).unwrap() + EULER_GAMMA).abs();
        assert!(err < 1e-14, "{err:e}");
        let half = -EULER_GAMMA - 2.0 * std::f64::consts::LN_2;
        assert!((digamma(0.5).unwrap() - half).abs() < 1e-14);
        assert!((half + 1.963_510_026_021_423_5).abs() < 1e-12);
    }

    #[test]
    fn recurrence() {
        for x in [0.5, 1.0, 3.0, 10.0, 5.999, 6.0, 1e-3, 250.5] {
            let lhs = digamma(x + 1.0).unwrap() - digamma(x).unwrap();
            assert!((lhs - 1.0 / x).abs() < 1e-10, "x = {x}");
        }
    }

    #[test]
    fn harmonic_numbers() {
        // psi(n) = H_{n-1} - gamma
        let mut h = 0.0;
        for n in 1..2000u32 {
            let want = h - EULER_GAMMA;
            assert!((digamma(n as f64).unwrap() - want).abs() < 1e-12, "n = {n}");
            h += 1.0 / n as f64;
        }
    }

    #[test]
    fn domain() {
        assert!(digamma(0.0).is_err());
        assert!(digamma(-1.5).is_err());
        assert!(digamma(f64::NAN).is_err());
        assert!(digamma(f64::INFINITY).is_err());
    }
}
