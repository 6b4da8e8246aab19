//! Model parameters and the closed-form pieces of the single-right problem.
//!
//! The project drift is either `mu0 < 0` or `mu1 > 0`; the investor sees the
//! drift only through a Brownian observation with volatility `sigma`. After the
//! usual normalisation everything depends on the strike `k`, the
//! signal-to-noise ratio `rho` and the positive root `gamma` of
//! `gamma^2 - gamma - 2r/rho^2 = 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Raw model inputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Drift of the bad project (< 0).
    pub mu0: f64,
    /// Drift of the good project (> 0).
    pub mu1: f64,
    /// Observation noise volatility.
    pub sigma: f64,
    /// Discount rate.
    pub r: f64,
    /// Total number of investment rights `N`.
    pub n_rights: usize,
    /// Information-time increment gained by each investment.
    pub eps: f64,
}

impl ModelParams {
    pub fn new(mu0: f64, mu1: f64, sigma: f64, r: f64, n_rights: usize, eps: f64) -> Result<Self> {
        let p = Self { mu0, mu1, sigma, r, n_rights, eps };
        p.validate()?;
        Ok(p)
    }

    /// Builds parameters from the total learning `N * eps` instead of `eps`.
    pub fn with_total_learning(
        mu0: f64,
        mu1: f64,
        sigma: f64,
        r: f64,
        n_rights: usize,
        total_learning: f64,
    ) -> Result<Self> {
        if n_rights == 0 {
            return Err(Error::InvalidParameter("n_rights must be >= 1".into()));
        }
        Self::new(mu0, mu1, sigma, r, n_rights, total_learning / n_rights as f64)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.mu0, self.mu1, self.sigma, self.r, self.eps]
            .iter()
            .all(|x| x.is_finite());
        if !finite {
            return Err(Error::InvalidParameter("all parameters must be finite".into()));
        }
        if !(self.mu0 < 0.0 && self.mu1 > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "mu0 < 0 < mu1 violated (mu0 = {}, mu1 = {})",
                self.mu0, self.mu1
            )));
        }
        if self.sigma <= 0.0 {
            return Err(Error::InvalidParameter(format!("sigma > 0 violated (sigma = {})", self.sigma)));
        }
        if self.r <= 0.0 {
            return Err(Error::InvalidParameter(format!("r > 0 violated (r = {})", self.r)));
        }
        if self.n_rights == 0 {
            return Err(Error::InvalidParameter("n_rights >= 1 violated".into()));
        }
        if self.eps < 0.0 {
            return Err(Error::InvalidParameter(format!("eps >= 0 violated (eps = {})", self.eps)));
        }
        Ok(())
    }

    pub fn total_learning(&self) -> f64 {
        self.eps * self.n_rights as f64
    }

    /// Investment level `u_n = (N - n) / N` held while `n` rights remain.
    pub fn investment_level(&self, n: usize) -> f64 {
        (self.n_rights as f64 - n as f64) / self.n_rights as f64
    }
}

/// Dimensionless quantities derived from [`ModelParams`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedParams {
    /// Strike `k = -mu0 / (mu1 - mu0)`, in (0, 1).
    pub k: f64,
    /// Signal-to-noise ratio `rho = (mu1 - mu0) / sigma`.
    pub rho: f64,
    /// Positive root of `gamma^2 - gamma - 2r/rho^2 = 0`; always > 1.
    pub gamma: f64,
}

pub fn derive_params(p: &ModelParams) -> Result<DerivedParams> {
    p.validate()?;
    let spread = p.mu1 - p.mu0;
    let k = -p.mu0 / spread;
    let rho = spread / p.sigma;
    // discriminant >= 1, no cancellation
    let gamma = 0.5 * (1.0 + (1.0 + 8.0 * p.r / (rho * rho)).sqrt());
    Ok(DerivedParams { k, rho, gamma })
}

impl DerivedParams {
    /// Builds the derived set directly, checking `k` in (0,1), `rho > 0`, `gamma > 1`.
    pub fn new(k: f64, rho: f64, gamma: f64) -> Result<Self> {
        if !(k > 0.0 && k < 1.0) {
            return Err(Error::InvalidParameter(format!("k must lie in (0,1), got {k}")));
        }
        if !(rho > 0.0) || !rho.is_finite() {
            return Err(Error::InvalidParameter(format!("rho must be positive, got {rho}")));
        }
        if !(gamma > 1.0) || !gamma.is_finite() {
            return Err(Error::InvalidParameter(format!("gamma must exceed 1, got {gamma}")));
        }
        Ok(Self { k, rho, gamma })
    }

    /// Diffusion coefficient of the belief generator, `rho^2 pi^2 (1-pi)^2 / 2`.
    #[inline]
    pub fn diffusion(&self, pi: f64) -> f64 {
        let s = self.rho * pi * (1.0 - pi);
        0.5 * s * s
    }
}

/// `G(pi) = (1 - pi) (pi / (1 - pi))^gamma` without domain checks.
///
/// `G(0) = 0` by continuity. Callers must keep `pi < 1`.
#[inline]
pub(crate) fn harmonic_raw(pi: f64, gamma: f64) -> f64 {
    if pi <= 0.0 {
        return 0.0;
    }
    let rest = 1.0 - pi;
    rest * (pi / rest).powf(gamma)
}

#[inline]
pub(crate) fn harmonic_derivative_raw(pi: f64, gamma: f64) -> f64 {
    (gamma - pi) / (pi * (1.0 - pi)) * harmonic_raw(pi, gamma)
}

/// The increasing r-harmonic function of the belief generator that vanishes at 0.
///
/// Defined on `[0, 1)`; it blows up as `pi -> 1` whenever `gamma > 1`.
pub fn harmonic(pi: f64, gamma: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&pi) {
        return Err(Error::Domain { value: pi, domain: "[0, 1)" });
    }
    Ok(harmonic_raw(pi, gamma))
}

/// Derivative `G'(pi) = (gamma - pi) / (pi (1 - pi)) G(pi)`; interior beliefs only.
pub fn harmonic_derivative(pi: f64, gamma: f64) -> Result<f64> {
    if !(pi > 0.0 && pi < 1.0) {
        return Err(Error::Domain { value: pi, domain: "(0, 1)" });
    }
    Ok(harmonic_derivative_raw(pi, gamma))
}

/// Investment boundary with a single right left: `gamma k / (gamma + k - 1)`.
pub fn single_right_boundary(d: &DerivedParams) -> f64 {
    d.gamma * d.k / (d.gamma + d.k - 1.0)
}

/// Value function with one right left, pasted at the closed-form boundary.
pub fn single_right_value(pi: f64, d: &DerivedParams) -> Result<f64> {
    if !(0.0..=1.0).contains(&pi) {
        return Err(Error::Domain { value: pi, domain: "[0, 1]" });
    }
    let b1 = single_right_boundary(d);
    if pi >= b1 {
        Ok(pi - d.k)
    } else {
        Ok((b1 - d.k) / harmonic_raw(b1, d.gamma) * harmonic_raw(pi, d.gamma))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig3() -> ModelParams {
        ModelParams::with_total_learning(-1.0, 1.0, 4.0, 0.1, 10, 1.0).unwrap()
    }

    fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
        let flo = f(lo);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if (f(mid) > 0.0) == (flo > 0.0) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn fig3_derived_values() {
        let d = derive_params(&fig3()).unwrap();
        assert_eq!(d.k, 0.5);
        assert_eq!(d.rho, 0.5);
        let q = |g: f64| g * g - g - 0.8;
        let oracle = bisect(q, 1.0, 10.0);
        assert!((d.gamma - oracle).abs() < 1e-12);
        assert!((d.gamma - 1.524695).abs() < 1e-6);
        assert!(q(d.gamma).abs() < 1e-12 * 0.8);
    }

    #[test]
    fn snr_from_sigma() {
        let d = derive_params(&ModelParams::new(-1.0, 1.0, 1.0, 0.1, 10, 0.1).unwrap()).unwrap();
        assert_eq!(d.rho, 2.0);
        let d = derive_params(&ModelParams::new(-1.0, 1.0, 10.0, 0.1, 10, 0.1).unwrap()).unwrap();
        assert_eq!(d.rho, 0.2);
        let d = derive_params(&ModelParams::new(-3.7, 3.7, 0.3, 0.1, 1, 0.0).unwrap()).unwrap();
        assert_eq!(d.k, 0.5);
    }

    #[test]
    fn rejects_invalid_params() {
        assert!(ModelParams::new(1.0, 2.0, 1.0, 0.1, 1, 0.0).is_err());
        assert!(ModelParams::new(-1.0, 1.0, 0.0, 0.1, 1, 0.0).is_err());
        assert!(ModelParams::new(-1.0, 1.0, 1.0, 0.0, 1, 0.0).is_err());
        assert!(ModelParams::new(-1.0, 1.0, 1.0, 0.1, 0, 0.0).is_err());
        assert!(ModelParams::new(-1.0, 1.0, 1.0, 0.1, 1, -0.1).is_err());
        assert!(ModelParams::new(f64::NAN, 1.0, 1.0, 0.1, 1, 0.1).is_err());
        let bad = ModelParams { mu0: -1.0, mu1: 1.0, sigma: -2.0, r: 0.1, n_rights: 3, eps: 0.1 };
        assert!(matches!(derive_params(&bad), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn harmonic_basics() {
        let g = 1.524695077;
        assert_eq!(harmonic(0.5, g).unwrap(), 0.5);
        assert_eq!(harmonic(0.0, g).unwrap(), 0.0);
        assert!(harmonic(1.0, g).is_err());
        assert!(harmonic(-0.1, g).is_err());
        for &pi in &[0.1, 0.37, 0.9] {
            assert!((harmonic(pi, 1.0).unwrap() - pi).abs() < 1e-15);
            assert!((harmonic_derivative(pi, 1.0).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn harmonic_solves_generator_equation() {
        // (L G) = rho^2 pi^2 (1-pi)^2 / 2 * G'' - r G = 0, checked by finite differences
        let p = fig3();
        let d = derive_params(&p).unwrap();
        let dx = 1e-4;
        for &pi in &[0.2, 0.5, 0.8] {
            let g = |x: f64| harmonic(x, d.gamma).unwrap();
            let second = (g(pi + dx) - 2.0 * g(pi) + g(pi - dx)) / (dx * dx);
            let lg = d.diffusion(pi) * second - p.r * g(pi);
            assert!(lg.abs() < 1e-6, "LG({pi}) = {lg}");
        }
    }

    #[test]
    fn derivative_matches_central_difference() {
        assert!((harmonic_derivative(0.5, 2.0).unwrap() - 3.0).abs() < 1e-14);
        let gamma = 1.524695077;
        let dx = 1e-6;
        for i in 1..20 {
            let pi = i as f64 / 20.0;
            let fd = (harmonic(pi + dx, gamma).unwrap() - harmonic(pi - dx, gamma).unwrap()) / (2.0 * dx);
            let an = harmonic_derivative(pi, gamma).unwrap();
            assert!(((fd - an) / an).abs() < 1e-8, "pi = {pi}: {fd} vs {an}");
        }
        assert!(harmonic_derivative(0.2, gamma).unwrap() > 0.0);
        assert!(harmonic_derivative(0.0, gamma).is_err());
        assert!(harmonic_derivative(1.0, gamma).is_err());
    }

    #[test]
    fn closed_form_boundary_matches_smooth_fit_root() {
        // oracle: bisection on G'(pi)(pi - k) - G(pi) = 0 over (k, 1)
        let cases = [(4.0, 0.743975018), (1.0, 0.956435465), (10.0, 0.609108945)];
        for (sigma, expected) in cases {
            let p = ModelParams::new(-1.0, 1.0, sigma, 0.1, 10, 0.1).unwrap();
            let d = derive_params(&p).unwrap();
            let fit = |pi: f64| {
                harmonic_derivative(pi, d.gamma).unwrap() * (pi - d.k) - harmonic(pi, d.gamma).unwrap()
            };
            let root = bisect(fit, d.k + 1e-12, 1.0 - 1e-9);
            let b1 = single_right_boundary(&d);
            assert!((b1 - root).abs() < 1e-9);
            assert!((b1 - expected).abs() < 1e-8, "sigma {sigma}: {b1}");
            assert!(b1 > d.k && b1 < 1.0);
        }
        let d = DerivedParams::new(0.5, 0.5, 1e6).unwrap();
        assert!((single_right_boundary(&d) - 0.5).abs() < 1e-5);
    }

    #[test]
    fn single_right_value_endpoints_and_pasting() {
        let d = derive_params(&fig3()).unwrap();
        let b1 = single_right_boundary(&d);
        assert_eq!(single_right_value(0.0, &d).unwrap(), 0.0);
        assert!((single_right_value(1.0, &d).unwrap() - 0.5).abs() < 1e-15);
        assert!((single_right_value(b1, &d).unwrap() - (b1 - d.k)).abs() < 1e-15);
        let a1 = (b1 - d.k) / harmonic(b1, d.gamma).unwrap();
        let v = single_right_value(0.3, &d).unwrap();
        assert!((v - a1 * harmonic(0.3, d.gamma).unwrap()).abs() < 1e-15);
        // one-sided slopes at b1
        let dx = 1e-7;
        let left = (single_right_value(b1, &d).unwrap() - single_right_value(b1 - dx, &d).unwrap()) / dx;
        let left_exact = a1 * harmonic_derivative(b1, d.gamma).unwrap();
        assert!((left_exact - 1.0).abs() < 1e-8);
        assert!((left - 1.0).abs() < 1e-5);
        assert!(single_right_value(1.2, &d).is_err());
    }
}
