//! Resolution parameters balancing preprocessing against query cost.
//!
//! The primal cell size `delta1` and dual resolution `delta2` are negative
//! powers of two with `delta1 * delta2 = epsilon` exactly (the requested
//! epsilon is first rounded down to a power of two, which only tightens the
//! guarantees). Outside the balanced range the parameters clamp to the
//! dual-only (`delta1 = 1`) or primal-only (`delta2 = 1`) configurations.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    DualOnly,
    Balanced,
    PrimalOnly,
}

#[derive(Clone, Copy, Debug)]
pub struct Params {
    /// Power-of-two epsilon actually used by the structure (<= requested).
    pub epsilon: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub regime: Regime,
}

impl Params {
    fn from_delta1(epsilon: f64, delta1: f64) -> Params {
        let delta2 = epsilon / delta1;
        let regime = if delta1 == 1.0 {
            Regime::DualOnly
        } else if delta2 == 1.0 {
            Regime::PrimalOnly
        } else {
            Regime::Balanced
        };
        Params {
            epsilon,
            delta1,
            delta2,
            regime,
        }
    }
}

/// Largest power of two `<= x` (x positive).
pub fn pow2_floor(x: f64) -> f64 {
    debug_assert!(x > 0.0 && x.is_finite());
    let mut p = 2f64.powi(x.log2().floor() as i32);
    while p > x {
        p *= 0.5;
    }
    while p * 2.0 <= x {
        p *= 2.0;
    }
    p
}

/// Power of two nearest to `x` in log scale.
pub fn pow2_round(x: f64) -> f64 {
    let p = pow2_floor(x);
    if x / p >= std::f64::consts::SQRT_2 {
        p * 2.0
    } else {
        p
    }
}

fn validate(eps: f64, m: usize, d: usize) -> Result<f64> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::param("epsilon", format!("must be in (0, 1], got {eps}")));
    }
    if m == 0 {
        return Err(Error::param("m", "expected query count must be positive"));
    }
    if d < 2 {
        return Err(Error::param("d", "dimension must be at least 2"));
    }
    Ok(pow2_floor(eps))
}

/// Parameters for the halfplane structure: `delta1 = sqrt(n*eps/m)` rounded
/// to a power of two, `delta2 = eps/delta1`.
pub fn choose_parameters(n: usize, m: usize, eps: f64, tune: f64) -> Result<Params> {
    choose_parameters_d(n, m, eps, 2, tune)
}

/// The d-dimensional generalization: `delta1 = (n/m)^(1/(2(d-1))) * sqrt(eps)`.
pub fn choose_parameters_d(n: usize, m: usize, eps: f64, d: usize, tune: f64) -> Result<Params> {
    let epsp = validate(eps, m, d)?;
    let (n, m) = (n as f64, m as f64);
    let band = epsp.powi(d as i32 - 1);
    if m < n * band {
        return Ok(Params::from_delta1(epsp, 1.0));
    }
    if n == 0.0 || m > n / band {
        return Ok(Params::from_delta1(epsp, epsp));
    }
    let raw = (n / m).powf(1.0 / (2.0 * (d as f64 - 1.0))) * epsp.sqrt() * tune;
    let delta1 = pow2_round(raw).clamp(epsp, 1.0);
    Ok(Params::from_delta1(epsp, delta1))
}

/// Parameters for the simplex structure in `R^3`. The dual resolution
/// `delta2 = (m*eps^2/n)^(1/5)` is primary and `delta1 = eps/delta2`, which
/// keeps the product constraint exact.
pub fn choose_parameters_simplex3(n: usize, m: usize, eps: f64, tune: f64) -> Result<Params> {
    let epsp = validate(eps, m, 3)?;
    let (n, m) = (n as f64, m as f64);
    if m < n * epsp.powi(3) {
        return Ok(Params::from_delta1(epsp, 1.0));
    }
    if n == 0.0 || m > n / epsp.powi(2) {
        return Ok(Params::from_delta1(epsp, epsp));
    }
    let raw2 = (m * epsp * epsp / n).powf(0.2) / tune;
    let delta2 = pow2_round(raw2).clamp(epsp, 1.0);
    Ok(Params::from_delta1(epsp, epsp / delta2))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pow2_rounding_is_exact_on_powers() {
        for e in -40..2 {
            let x = 2f64.powi(e);
            assert_eq!(pow2_floor(x), x);
            assert_eq!(pow2_round(x), x);
        }
        assert_eq!(pow2_floor(0.7), 0.5);
        assert_eq!(pow2_round(0.7), 0.5);
        assert_eq!(pow2_round(0.72), 1.0);
    }

    #[test]
    fn balanced_example() {
        let p = choose_parameters(10_000, 10_000, 2f64.powi(-10), 1.0).unwrap();
        assert_eq!(p.delta1, 2f64.powi(-5));
        assert_eq!(p.delta2, 2f64.powi(-5));
        assert_eq!(p.regime, Regime::Balanced);
        assert_eq!(p.delta1 * p.delta2, p.epsilon);
    }

    #[test]
    fn range_endpoints() {
        let eps = 2f64.powi(-8);
        let n = 1 << 12;
        // m = n/eps: primal-only boundary
        let p = choose_parameters(n, n * (1 << 8), eps, 1.0).unwrap();
        assert_eq!(p.delta2, 1.0);
        assert_eq!(p.regime, Regime::PrimalOnly);
        // m = n*eps: dual-only boundary
        let p = choose_parameters(n, n >> 8, eps, 1.0).unwrap();
        assert_eq!(p.delta1, 1.0);
        assert_eq!(p.regime, Regime::DualOnly);
    }

    #[test]
    fn d_dimensional_examples() {
        // d = 2 matches the planar formula
        let a = choose_parameters(5000, 300, 0.01, 1.0).unwrap();
        let b = choose_parameters_d(5000, 300, 0.01, 2, 1.0).unwrap();
        assert_eq!(a.delta1, b.delta1);
        // d = 3, n = m: delta1 = delta2 = sqrt(eps)
        let p = choose_parameters_d(4096, 4096, 2f64.powi(-10), 3, 1.0).unwrap();
        assert_eq!(p.delta1, 2f64.powi(-5));
        assert_eq!(p.delta2, 2f64.powi(-5));
    }

    #[test]
    fn simplex_example() {
        let p = choose_parameters_simplex3(1000, 1000, 2f64.powi(-10), 1.0).unwrap();
        assert_eq!(p.delta2, 2f64.powi(-4));
        assert_eq!(p.delta1, 2f64.powi(-6));
        assert_eq!(p.delta1 * p.delta2, p.epsilon);
    }

    #[test]
    fn invalid_epsilon_is_rejected() {
        assert!(choose_parameters(10, 10, 0.0, 1.0).is_err());
        assert!(choose_parameters(10, 10, 1.5, 1.0).is_err());
        assert!(choose_parameters(10, 0, 0.5, 1.0).is_err());
    }
}
