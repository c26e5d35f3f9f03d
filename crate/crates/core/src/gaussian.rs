//! Two-mode Gaussian covariance matrices in normal form.
//!
//! Quadratures are ordered `(q1, p1, q2, p2)` with `[x_k, x_l] = 2iΩ_kl`, so the
//! vacuum covariance matrix is the identity and a thermal mode with mean photon
//! number `N` has covariance `(2N + 1) I`. Every module of the crate shares this
//! convention.

use nalgebra::{Matrix2, Matrix4};
use serde::{Deserialize, Serialize};

use crate::error::{domain, QreadError, Result};

/// Symplectic eigenvalues are accepted down to `1 - PHYSICALITY_TOL`.
pub const PHYSICALITY_TOL: f64 = 1e-9;

/// Below this distance from 1 a symplectic eigenvalue is treated as exactly pure.
const PURE_EIGENVALUE_TOL: f64 = 1e-12;

/// Covariance matrix `[[a I, c Z], [c Z, b I]]` with `I = diag(1, 1)` and `Z = diag(1, -1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoModeNormalCm {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl TwoModeNormalCm {
    /// Builds the matrix and checks the uncertainty principle.
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && c.is_finite()) || c < 0.0 {
            return Err(QreadError::NonPhysicalCm(format!(
                "entries must be finite with c >= 0, got a={a}, b={b}, c={c}"
            )));
        }
        let cm = Self { a, b, c };
        symplectic_spectrum(&cm)?;
        Ok(cm)
    }

    /// `y = (a + b)^2 - 4c^2`; physical matrices have `y >= 4`.
    pub fn y(&self) -> f64 {
        (self.a + self.b).powi(2) - 4.0 * self.c * self.c
    }

    /// `ab - c^2`, whose absolute value is the product of the symplectic eigenvalues.
    pub fn reduced_det(&self) -> f64 {
        self.a * self.b - self.c * self.c
    }

    pub fn dense(&self) -> Matrix4<f64> {
        block_matrix(self.a, self.b, self.c)
    }
}

fn block_matrix(diag0: f64, diag1: f64, off: f64) -> Matrix4<f64> {
    #[rustfmt::skip]
    let m = Matrix4::new(
        diag0, 0.0,   off,   0.0,
        0.0,   diag0, 0.0,   -off,
        off,   0.0,   diag1, 0.0,
        0.0,   -off,  0.0,   diag1,
    );
    m
}

/// The symplectic form `Ω = ⊕ [[0, 1], [-1, 0]]` on two modes.
pub fn symplectic_form() -> Matrix4<f64> {
    let w = Matrix2::new(0.0, 1.0, -1.0, 0.0);
    let mut omega = Matrix4::zeros();
    omega.fixed_view_mut::<2, 2>(0, 0).copy_from(&w);
    omega.fixed_view_mut::<2, 2>(2, 2).copy_from(&w);
    omega
}

/// Williamson data of a [`TwoModeNormalCm`]: `V = S (ν₁ I ⊕ ν₂ I) Sᵀ` with
/// `S = [[x₊ I, x₋ Z], [x₋ Z, x₊ I]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymplecticDecomposition {
    pub nu1: f64,
    pub nu2: f64,
    pub x_plus: f64,
    pub x_minus: f64,
}

impl SymplecticDecomposition {
    pub fn symplectic_matrix(&self) -> Matrix4<f64> {
        block_matrix(self.x_plus, self.x_plus, self.x_minus)
    }

    pub fn williamson_form(&self) -> Matrix4<f64> {
        Matrix4::from_diagonal(&nalgebra::Vector4::new(self.nu1, self.nu1, self.nu2, self.nu2))
    }

    /// `S · diag(d1, d1, d2, d2) · Sᵀ`, the congruence used both for the
    /// reconstruction and for the fractional-power matrices of the Chernoff formula.
    pub fn congruence(&self, d1: f64, d2: f64) -> Matrix4<f64> {
        let s = self.symplectic_matrix();
        let w = Matrix4::from_diagonal(&nalgebra::Vector4::new(d1, d1, d2, d2));
        s * w * s.transpose()
    }

    pub fn reconstruct(&self) -> Matrix4<f64> {
        self.congruence(self.nu1, self.nu2)
    }

    pub fn is_pure(&self) -> bool {
        (self.nu1 - 1.0).abs() < PURE_EIGENVALUE_TOL && (self.nu2 - 1.0).abs() < PURE_EIGENVALUE_TOL
    }
}

/// Isotropic single-mode Gaussian state: mean `(q, p)` and covariance `cm_scale · I`.
/// A coherent amplitude `α` has mean `(2 Re α, 2 Im α)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingleModeGaussian {
    pub mean_q: f64,
    pub mean_p: f64,
    pub cm_scale: f64,
}

impl SingleModeGaussian {
    pub fn new(mean_q: f64, mean_p: f64, cm_scale: f64) -> Result<Self> {
        if !(mean_q.is_finite() && mean_p.is_finite()) || !(cm_scale >= 1.0 - PHYSICALITY_TOL) {
            return Err(QreadError::NonPhysicalCm(format!(
                "single-mode state needs finite mean and cm_scale >= 1, got cm_scale={cm_scale}"
            )));
        }
        Ok(Self { mean_q, mean_p, cm_scale })
    }

    /// `⟨a†a⟩ = (cm_scale - 1)/2 + |mean|²/4`.
    pub fn mean_photon_number(&self) -> f64 {
        0.5 * (self.cm_scale - 1.0) + 0.25 * (self.mean_q * self.mean_q + self.mean_p * self.mean_p)
    }
}

/// Symplectic eigenvalues `ν₁ = (√y + a − b)/2`, `ν₂ = (√y + b − a)/2`.
pub fn symplectic_spectrum(cm: &TwoModeNormalCm) -> Result<(f64, f64)> {
    let y = cm.y();
    if !(y >= 4.0 * (1.0 - PHYSICALITY_TOL)) {
        return Err(QreadError::NonPhysicalCm(format!(
            "y = (a+b)^2 - 4c^2 = {y} < 4 for (a, b, c) = ({}, {}, {})",
            cm.a, cm.b, cm.c
        )));
    }
    let sy = y.sqrt();
    let nu1 = 0.5 * (sy + cm.a - cm.b);
    let nu2 = 0.5 * (sy + cm.b - cm.a);
    let floor = 1.0 - PHYSICALITY_TOL;
    if nu1 < floor || nu2 < floor {
        return Err(QreadError::NonPhysicalCm(format!(
            "symplectic eigenvalues ({nu1}, {nu2}) below 1 for (a, b, c) = ({}, {}, {})",
            cm.a, cm.b, cm.c
        )));
    }
    Ok((nu1, nu2))
}

pub fn williamson(cm: &TwoModeNormalCm) -> Result<SymplecticDecomposition> {
    let (nu1, nu2) = symplectic_spectrum(cm)?;
    let sy = cm.y().sqrt();
    let sum = cm.a + cm.b;
    let x_plus = ((sum + sy) / (2.0 * sy)).sqrt();
    // a + b >= sqrt(y) exactly; clamp round-off when c = 0
    let x_minus = ((sum - sy).max(0.0) / (2.0 * sy)).sqrt();
    Ok(SymplecticDecomposition { nu1, nu2, x_plus, x_minus })
}

fn check_power_args(nu: f64, p: f64) -> Result<()> {
    if !(nu >= 1.0 - PHYSICALITY_TOL) || !nu.is_finite() {
        return domain(format!("symplectic eigenvalue must be >= 1, got {nu}"));
    }
    if !(p > 0.0 && p <= 1.0) {
        return domain(format!("power must lie in (0, 1], got {p}"));
    }
    Ok(())
}

/// `((ν−1)/(ν+1))^p`, the geometric ratio of the eigenvalues of `ρ^p` for a
/// thermal mode with symplectic eigenvalue `ν`.
fn power_ratio_ln(nu: f64, p: f64) -> f64 {
    p * ((nu - 1.0) / (nu + 1.0)).ln()
}

/// `G_p(ν) = 2^p / [(ν+1)^p − (ν−1)^p]`, equal to `Tr ρ^p` for a thermal mode.
pub fn gp(nu: f64, p: f64) -> Result<f64> {
    check_power_args(nu, p)?;
    Ok(gp_unchecked(nu, p))
}

/// `Λ_p(ν) = [(ν+1)^p + (ν−1)^p] / [(ν+1)^p − (ν−1)^p]`, the symplectic
/// eigenvalue of the normalized `ρ^p`.
pub fn lambda_p(nu: f64, p: f64) -> Result<f64> {
    check_power_args(nu, p)?;
    Ok(lambda_p_unchecked(nu, p))
}

pub(crate) fn gp_unchecked(nu: f64, p: f64) -> f64 {
    if (nu - 1.0).abs() < PURE_EIGENVALUE_TOL {
        return 1.0;
    }
    // (ν+1)^p − (ν−1)^p = (ν+1)^p · (1 − t), t = ((ν−1)/(ν+1))^p
    let denom = (p * (nu + 1.0).ln()).exp() * -power_ratio_ln(nu, p).exp_m1();
    2f64.powf(p) / denom
}

pub(crate) fn lambda_p_unchecked(nu: f64, p: f64) -> f64 {
    if (nu - 1.0).abs() < PURE_EIGENVALUE_TOL {
        return 1.0;
    }
    let ln_t = power_ratio_ln(nu, p);
    (1.0 + ln_t.exp()) / -ln_t.exp_m1()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn vacuum_spectrum() {
        let cm = TwoModeNormalCm::new(1.0, 1.0, 0.0).unwrap();
        assert_eq!(symplectic_spectrum(&cm).unwrap(), (1.0, 1.0));
        let d = williamson(&cm).unwrap();
        assert_eq!((d.x_plus, d.x_minus), (1.0, 0.0));
        assert_eq!(d.symplectic_matrix(), Matrix4::identity());
    }

    #[test]
    fn pure_tmsv_spectrum_and_decomposition() {
        let mu: f64 = 3.0;
        let cm = TwoModeNormalCm::new(mu, mu, (mu * mu - 1.0).sqrt()).unwrap();
        let (n1, n2) = symplectic_spectrum(&cm).unwrap();
        assert_relative_eq!(n1, 1.0, epsilon = 1e-12);
        assert_relative_eq!(n2, 1.0, epsilon = 1e-12);
        let d = williamson(&cm).unwrap();
        assert_relative_eq!(d.x_plus, 2f64.sqrt(), epsilon = 1e-12);
        assert_relative_eq!(d.x_minus, 1.0, epsilon = 1e-12);
        assert!((d.reconstruct() - cm.dense()).amax() < 1e-12);
    }

    #[test]
    fn mixed_fixture() {
        let cm = TwoModeNormalCm::new(2.1, 3.0, 2.0).unwrap();
        let (n1, n2) = symplectic_spectrum(&cm).unwrap();
        // sqrt(y) = sqrt(10.01)
        assert_relative_eq!(n1, 1.131_929_202_0, epsilon = 1e-9);
        assert_relative_eq!(n2, 2.031_929_202_0, epsilon = 1e-9);
        assert_relative_eq!(n1 * n2, 2.3, epsilon = 1e-12);
        assert_relative_eq!(n1 * n2, cm.dense().determinant().sqrt(), epsilon = 1e-12);

        let d = williamson(&cm).unwrap();
        assert_relative_eq!(d.x_plus, 1.142_794, epsilon = 1e-6);
        assert_relative_eq!(d.x_minus, 0.553_153, epsilon = 1e-6);
        assert_relative_eq!(d.x_plus.powi(2) - d.x_minus.powi(2), 1.0, epsilon = 1e-12);
        let s = d.symplectic_matrix();
        let omega = symplectic_form();
        assert!((s * omega * s.transpose() - omega).amax() < 1e-12);
        assert!((d.reconstruct() - cm.dense()).amax() < 1e-12);
    }

    #[test]
    fn rejects_nonphysical() {
        assert!(matches!(
            TwoModeNormalCm::new(1.0, 1.0, 0.5),
            Err(QreadError::NonPhysicalCm(_))
        ));
        assert!(TwoModeNormalCm::new(0.5, 0.5, 0.0).is_err());
        assert!(TwoModeNormalCm::new(1.0, 1.0, -0.1).is_err());
        assert!(TwoModeNormalCm::new(f64::NAN, 1.0, 0.0).is_err());
    }

    #[test]
    fn power_functions() {
        assert_eq!(gp(1.0, 0.5).unwrap(), 1.0);
        assert_relative_eq!(gp(3.0, 1.0).unwrap(), 1.0, epsilon = 1e-14);
        let root2 = 2f64.sqrt();
        assert_relative_eq!(gp(3.0, 0.5).unwrap(), root2 / (2.0 - root2), epsilon = 1e-13);
        assert_eq!(lambda_p(1.0, 0.3).unwrap(), 1.0);
        assert_relative_eq!(lambda_p(3.0, 1.0).unwrap(), 3.0, epsilon = 1e-13);
        assert_relative_eq!(
            lambda_p(3.0, 0.5).unwrap(),
            (2.0 + root2) / (2.0 - root2),
            epsilon = 1e-12
        );
    }

    #[test]
    fn power_function_domain() {
        assert!(matches!(gp(0.5, 0.5), Err(QreadError::Domain(_))));
        assert!(lambda_p(2.0, 0.0).is_err());
        assert!(lambda_p(2.0, 1.5).is_err());
        // just inside the physicality tolerance
        assert_eq!(gp(1.0 - 1e-13, 0.5).unwrap(), 1.0);
    }

    #[test]
    fn power_functions_large_nu_stable() {
        // (ν+1)^p − (ν−1)^p ≈ 2p ν^(p−1) for large ν
        let nu: f64 = 1e8;
        let p = 0.3;
        let expected = 2f64.powf(p) / (2.0 * p * nu.powf(p - 1.0));
        assert_relative_eq!(gp(nu, p).unwrap(), expected, max_relative = 1e-6);
        assert!(lambda_p(nu, p).unwrap().is_finite());
    }

    #[test]
    fn single_mode_photon_number() {
        let s = SingleModeGaussian::new(2.0, 0.0, 1.0).unwrap();
        assert_relative_eq!(s.mean_photon_number(), 1.0);
        assert!(SingleModeGaussian::new(0.0, 0.0, 0.9).is_err());
    }
}
