//! Elastic–perfectly plastic phase laws.

use crate::error::{Error, Result};
use crate::tensor::Sym2;

/// Relative `σ_eq / σ0` below which the deviatoric flow direction is
/// considered undefined.
pub const APEX_THRESHOLD: f64 = 1e-10;

/// Mean stress `σ_m = tr(σ)/3` and equivalent stress `σ_eq = sqrt(3/2 s:s)`.
pub fn stress_invariants(sigma: &Sym2) -> (f64, f64) {
    let s = sigma.deviator();
    (sigma.mean(), (1.5 * s.dot(&s)).sqrt())
}

/// Drucker–Prager criterion `F = σ_eq + σ_m tan φ - σ0`.
///
/// The plastic potential has the same form with the dilatancy angle `ψ` in
/// place of `φ`; `ψ = φ` gives associated flow.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DruckerPrager {
    friction_angle: f64,
    failure_stress: f64,
    dilatancy_angle: f64,
}

impl DruckerPrager {
    /// Associated model with friction angle `phi` (rad) and pure-shear
    /// failure stress `sigma0` (MPa).
    pub fn new(phi: f64, sigma0: f64) -> Result<Self> {
        Self::non_associated(phi, sigma0, phi)
    }

    pub fn non_associated(phi: f64, sigma0: f64, psi: f64) -> Result<Self> {
        if !sigma0.is_finite() || sigma0 <= 0.0 {
            return Err(Error::InvalidMaterial(format!(
                "failure stress must be positive, got {sigma0}"
            )));
        }
        for (name, angle) in [("friction", phi), ("dilatancy", psi)] {
            if !(0.0..std::f64::consts::FRAC_PI_2).contains(&angle) {
                return Err(Error::InvalidMaterial(format!(
                    "{name} angle must lie in [0, π/2), got {angle}"
                )));
            }
        }
        Ok(DruckerPrager {
            friction_angle: phi,
            failure_stress: sigma0,
            dilatancy_angle: psi,
        })
    }

    pub fn friction_angle(&self) -> f64 {
        self.friction_angle
    }

    pub fn failure_stress(&self) -> f64 {
        self.failure_stress
    }

    pub fn dilatancy_angle(&self) -> f64 {
        self.dilatancy_angle
    }

    pub fn is_associated(&self) -> bool {
        self.dilatancy_angle == self.friction_angle
    }

    /// Yield function value (MPa).
    pub fn yield_value(&self, sigma: &Sym2) -> f64 {
        let (mean, eq) = stress_invariants(sigma);
        eq + mean * self.friction_angle.tan() - self.failure_stress
    }

    /// `∂F/∂σ`.
    pub fn yield_gradient(&self, sigma: &Sym2) -> Result<Sym2> {
        self.gradient(sigma, self.friction_angle)
    }

    /// `∂G/∂σ`, the plastic flow direction.
    pub fn flow_direction(&self, sigma: &Sym2) -> Result<Sym2> {
        self.gradient(sigma, self.dilatancy_angle)
    }

    /// `∂²G/∂σ²` (Mandel 6×6), the derivative of the flow direction.
    pub fn flow_hessian(&self, sigma: &Sym2) -> Result<crate::tensor::Ten4> {
        let s = sigma.deviator();
        let eq = self.equivalent_checked(&s)?;
        let (_, k) = crate::tensor::iso_projectors();
        let ss = s.mandel() * s.mandel().transpose();
        let m = (k.mandel() - ss * (1.5 / (eq * eq))) * (1.5 / eq);
        crate::tensor::Ten4::symmetric_from_mandel(0.5 * (m + m.transpose()))
    }

    fn equivalent_checked(&self, s: &Sym2) -> Result<f64> {
        let eq = (1.5 * s.dot(s)).sqrt();
        if eq <= APEX_THRESHOLD * self.failure_stress {
            return Err(Error::ApexSingularity { sigma_eq: eq });
        }
        Ok(eq)
    }

    fn gradient(&self, sigma: &Sym2, angle: f64) -> Result<Sym2> {
        let s = sigma.deviator();
        let eq = self.equivalent_checked(&s)?;
        Ok(s * (1.5 / eq) + Sym2::identity() * (angle.tan() / 3.0))
    }
}

/// Constitutive behaviour of a phase beyond linear elasticity.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub enum PlasticModel {
    #[default]
    Elastic,
    DruckerPrager(DruckerPrager),
}

impl PlasticModel {
    pub fn drucker_prager(&self) -> Option<&DruckerPrager> {
        match self {
            PlasticModel::Elastic => None,
            PlasticModel::DruckerPrager(dp) => Some(dp),
        }
    }

    pub fn is_plastic(&self) -> bool {
        matches!(self, PlasticModel::DruckerPrager(_))
    }
}
