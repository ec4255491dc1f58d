//! Standard normal helpers shared by the estimators and the simulator.
//!
//! Transcendentals come from `libm` rather than the platform C library so
//! that every report is bit-identical across targets.

use libm::{erfc, exp};

pub const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard normal density.
#[inline]
pub fn pdf(z: f64) -> f64 {
    INV_SQRT_2PI * exp(-0.5 * z * z)
}

/// Standard normal CDF, `Φ(z) = erfc(-z/√2) / 2`. Using the complementary
/// error function keeps full relative precision in the lower tail.
#[inline]
pub fn cdf(z: f64) -> f64 {
    if z == f64::NEG_INFINITY {
        return 0.0;
    }
    if z == f64::INFINITY {
        return 1.0;
    }
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_values() {
        assert_eq!(cdf(0.0), 0.5);
        assert!((cdf(1.0) - 0.841_344_746_068_542_9).abs() < 1e-15);
        assert!((cdf(-3.0) - 0.001_349_898_031_630_094_6).abs() < 1e-17);
        assert!((pdf(3.0) - 0.004_431_848_411_938_008).abs() < 1e-17);
        assert_eq!(cdf(f64::NEG_INFINITY), 0.0);
        assert_eq!(cdf(f64::INFINITY), 1.0);
    }

    #[test]
    fn cdf_matches_simpson_quadrature() {
        // Independent route: integrate the density from -12 with composite Simpson.
        for &x in &[-2.5, -0.5, 0.0, 0.3, 1.7, 4.0] {
            let a = -12.0;
            let n = 20_000;
            let h = (x - a) / n as f64;
            let mut s = pdf(a) + pdf(x);
            for i in 1..n {
                let w = if i % 2 == 1 { 4.0 } else { 2.0 };
                s += w * pdf(a + i as f64 * h);
            }
            let quad = s * h / 3.0;
            assert!((cdf(x) - quad).abs() < 1e-12, "x={x}: {} vs {quad}", cdf(x));
        }
    }
}
