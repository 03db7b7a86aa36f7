//! Concentration and influence tensors of an eigen-stressed multiphase
//! medium, and the upscaling relations built on them.
//!
//! Phase strains follow
//!
//! ```text
//! ε_α = A_α : ε̄ + Σ_β B_αβ : εᵖ_β
//! ```
//!
//! and the macroscopic stress is `σ̄ = C̄ : ε̄ - Σ_α f_α A_αᵀ : C_α : εᵖ_α`.

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::eshelby::{hill_tensor, SpheroidShape};
use crate::plasticity::PlasticModel;
use crate::tensor::{iso_stiffness, rotate_ten4, Orientation, Sym2, Ten4};

/// Fraction sums must match 1 to this tolerance.
pub const FRACTION_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Morphology {
    /// The continuous phase; reference medium of the Mori–Tanaka scheme.
    Matrix,
    Spheroid {
        shape: SpheroidShape,
        orientation: Orientation,
    },
}

/// One material phase of the representative volume.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseSpec {
    pub id: String,
    pub volume_fraction: f64,
    /// Young's modulus (MPa).
    pub young: f64,
    pub poisson: f64,
    pub morphology: Morphology,
    pub plastic: PlasticModel,
}

impl PhaseSpec {
    pub fn matrix(id: impl Into<String>, fraction: f64, young: f64, poisson: f64) -> Self {
        PhaseSpec {
            id: id.into(),
            volume_fraction: fraction,
            young,
            poisson,
            morphology: Morphology::Matrix,
            plastic: PlasticModel::Elastic,
        }
    }

    pub fn spheroid(
        id: impl Into<String>,
        fraction: f64,
        young: f64,
        poisson: f64,
        shape: SpheroidShape,
        orientation: Orientation,
    ) -> Self {
        PhaseSpec {
            id: id.into(),
            volume_fraction: fraction,
            young,
            poisson,
            morphology: Morphology::Spheroid { shape, orientation },
            plastic: PlasticModel::Elastic,
        }
    }

    pub fn with_plastic(mut self, plastic: PlasticModel) -> Self {
        self.plastic = plastic;
        self
    }

    pub fn stiffness(&self) -> Result<Ten4> {
        iso_stiffness(self.young, self.poisson)
    }

    pub fn is_matrix(&self) -> bool {
        matches!(self.morphology, Morphology::Matrix)
    }
}

/// The 26 directions of cube symmetry: 6 face normals, 12 edge and 8 vertex
/// diagonals, in a fixed order.
pub fn cube26_axes() -> Vec<Vector3<f64>> {
    let mut axes = Vec::with_capacity(26);
    for x in -1i32..=1 {
        for y in -1i32..=1 {
            for z in -1i32..=1 {
                if (x, y, z) != (0, 0, 0) {
                    axes.push(Vector3::new(x as f64, y as f64, z as f64).normalize());
                }
            }
        }
    }
    // faces, then edges, then vertices
    axes.sort_by_key(|a| a.iter().filter(|c| c.abs() > 0.0).count());
    axes
}

/// Checks the phase-list invariants: fractions in `(0, 1]` summing to one,
/// exactly one matrix phase.
pub fn validate_phases(phases: &[PhaseSpec]) -> Result<usize> {
    if phases.is_empty() {
        return Err(Error::InvalidPhases("no phases given".to_string()));
    }
    let mut matrix = None;
    for (i, p) in phases.iter().enumerate() {
        if !(p.volume_fraction > 0.0 && p.volume_fraction <= 1.0) {
            return Err(Error::InvalidPhases(format!(
                "phase '{}' has volume fraction {} outside (0, 1]",
                p.id, p.volume_fraction
            )));
        }
        if p.is_matrix() {
            if matrix.is_some() {
                return Err(Error::InvalidPhases(
                    "more than one matrix phase".to_string(),
                ));
            }
            matrix = Some(i);
        }
        p.stiffness()?;
    }
    let total: f64 = phases.iter().map(|p| p.volume_fraction).sum();
    if (total - 1.0).abs() > FRACTION_TOLERANCE {
        return Err(Error::FractionSum(total));
    }
    matrix.ok_or_else(|| Error::InvalidPhases("no matrix phase".to_string()))
}

/// Dilute strain concentration tensor `[I + P : (C_incl - C0)]⁻¹`.
pub fn dilute_concentration(p: &Ten4, c_incl: &Ten4, c0: &Ten4) -> Result<Ten4> {
    let bracket = Ten4::identity() + p.compose(&(*c_incl - *c0));
    bracket.inverse().map_err(|e| match e {
        Error::Singular { condition } => Error::MorphologyIncompatible { condition },
        other => other,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Scheme {
    #[default]
    MoriTanaka,
    Dilute,
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::MoriTanaka => "mori_tanaka",
            Scheme::Dilute => "dilute",
        }
    }
}

/// Precomputed localization and upscaling operators of a phase assembly.
#[derive(Clone, Debug)]
pub struct MeanFieldOperators {
    scheme: Scheme,
    fractions: Vec<f64>,
    stiffness: Vec<Ten4>,
    concentration: Vec<Ten4>,
    /// `influence[α][β] = B_αβ`
    influence: Vec<Vec<Ten4>>,
    effective: Ten4,
    effective_inv: Ten4,
    /// `f_α A_αᵀ : C_α`
    eigen_weights: Vec<Ten4>,
}

/// Per-inclusion ingredients of the dilute problems, in the global frame.
struct DiluteParts {
    /// `A^dil`
    concentration: Ten4,
    /// `A^dil : P`, maps a polarization to the induced strain.
    polarization: Ten4,
}

fn dilute_parts(phases: &[PhaseSpec], matrix: usize) -> Result<Vec<DiluteParts>> {
    let c0 = phases[matrix].stiffness()?;
    phases
        .iter()
        .map(|p| match p.morphology {
            Morphology::Matrix => Ok(DiluteParts {
                concentration: Ten4::identity(),
                polarization: Ten4::zero(),
            }),
            Morphology::Spheroid { shape, orientation } => {
                let hill = rotate_ten4(&hill_tensor(&shape, &c0)?, &orientation);
                let a_dil = dilute_concentration(&hill, &p.stiffness()?, &c0)?;
                Ok(DiluteParts {
                    polarization: a_dil * hill,
                    concentration: a_dil,
                })
            }
        })
        .collect()
}

/// `∂(ς_r - ς_matrix)/∂εᵖ_β` for inclusion `r`: the relative eigen-stress
/// an inclusion sees from a unit plastic strain in phase `β`.
fn relative_eigenstress(r: usize, beta: usize, matrix: usize, stiffness: &[Ten4]) -> Ten4 {
    if beta == matrix {
        stiffness[matrix]
    } else if beta == r {
        -stiffness[beta]
    } else {
        Ten4::zero()
    }
}

impl MeanFieldOperators {
    pub fn assemble(phases: &[PhaseSpec], scheme: Scheme) -> Result<Self> {
        match scheme {
            Scheme::MoriTanaka => Self::assemble_mori_tanaka(phases),
            Scheme::Dilute => Self::assemble_dilute(phases),
        }
    }

    /// Mori–Tanaka operators with the matrix as reference medium.
    ///
    /// Every inclusion is a dilute eigen-stressed inclusion embedded in the
    /// matrix at the (unknown) matrix strain `ε0`; the average rule
    /// `Σ f_α ε_α = ε̄` closes the system. Solving it once for `ε̄` and once
    /// per phase for a unit eigen-strain gives `A` and `B`.
    #[allow(clippy::needless_range_loop)]
    pub fn assemble_mori_tanaka(phases: &[PhaseSpec]) -> Result<Self> {
        let matrix = validate_phases(phases)?;
        let stiffness = phases
            .iter()
            .map(PhaseSpec::stiffness)
            .collect::<Result<Vec<_>>>()?;
        let parts = dilute_parts(phases, matrix)?;
        let fractions: Vec<f64> = phases.iter().map(|p| p.volume_fraction).collect();
        let n = phases.len();

        let mut mean_dilute = Ten4::zero();
        for (f, part) in fractions.iter().zip(&parts) {
            mean_dilute += part.concentration * *f;
        }
        let mean_dilute_inv = mean_dilute.inverse()?;

        let concentration: Vec<Ten4> = parts
            .iter()
            .map(|part| part.concentration * mean_dilute_inv)
            .collect();

        let mut influence = vec![vec![Ten4::zero(); n]; n];
        for beta in 0..n {
            // matrix strain produced by a unit eigen-strain in phase beta
            let mut rhs = Ten4::zero();
            for r in (0..n).filter(|&r| r != matrix) {
                let d = relative_eigenstress(r, beta, matrix, &stiffness);
                rhs += parts[r].polarization * d * fractions[r];
            }
            let matrix_strain = mean_dilute_inv * rhs;
            for alpha in 0..n {
                influence[alpha][beta] = if alpha == matrix {
                    matrix_strain
                } else {
                    let d = relative_eigenstress(alpha, beta, matrix, &stiffness);
                    parts[alpha].concentration * matrix_strain - parts[alpha].polarization * d
                };
            }
        }

        Self::finish(Scheme::MoriTanaka, fractions, stiffness, concentration, influence)
    }

    /// Dilute estimates: inclusions see the macroscopic strain directly and
    /// the matrix strain follows from the average rule.
    #[allow(clippy::needless_range_loop)]
    pub fn assemble_dilute(phases: &[PhaseSpec]) -> Result<Self> {
        let matrix = validate_phases(phases)?;
        let stiffness = phases
            .iter()
            .map(PhaseSpec::stiffness)
            .collect::<Result<Vec<_>>>()?;
        let parts = dilute_parts(phases, matrix)?;
        let fractions: Vec<f64> = phases.iter().map(|p| p.volume_fraction).collect();
        let n = phases.len();
        let f0 = fractions[matrix];

        let mut concentration: Vec<Ten4> = parts.iter().map(|p| p.concentration).collect();
        let mut rest = Ten4::identity();
        for r in (0..n).filter(|&r| r != matrix) {
            rest = rest - concentration[r] * fractions[r];
        }
        concentration[matrix] = rest * (1.0 / f0);

        let mut influence = vec![vec![Ten4::zero(); n]; n];
        for beta in 0..n {
            let mut weighted = Ten4::zero();
            for r in (0..n).filter(|&r| r != matrix) {
                let b = -(parts[r].polarization * relative_eigenstress(r, beta, matrix, &stiffness));
                weighted += b * fractions[r];
                influence[r][beta] = b;
            }
            influence[matrix][beta] = weighted * (-1.0 / f0);
        }

        Self::finish(Scheme::Dilute, fractions, stiffness, concentration, influence)
    }

    fn finish(
        scheme: Scheme,
        fractions: Vec<f64>,
        stiffness: Vec<Ten4>,
        concentration: Vec<Ten4>,
        influence: Vec<Vec<Ten4>>,
    ) -> Result<Self> {
        let mut effective = Ten4::zero();
        let mut eigen_weights = Vec::with_capacity(fractions.len());
        for ((f, c), a) in fractions.iter().zip(&stiffness).zip(&concentration) {
            effective += (*c * *a) * *f;
            eigen_weights.push((a.transpose() * *c) * *f);
        }
        let effective = Ten4::symmetric_from_mandel(*effective.mandel())
            .unwrap_or_else(|_| Ten4::from_mandel(*effective.mandel()));
        let effective_inv = effective.inverse()?;
        Ok(MeanFieldOperators {
            scheme,
            fractions,
            stiffness,
            concentration,
            influence,
            effective,
            effective_inv,
            eigen_weights,
        })
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn len(&self) -> usize {
        self.fractions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fractions.is_empty()
    }

    pub fn fractions(&self) -> &[f64] {
        &self.fractions
    }

    pub fn stiffness(&self, alpha: usize) -> &Ten4 {
        &self.stiffness[alpha]
    }

    /// `A_α`
    pub fn concentration(&self, alpha: usize) -> &Ten4 {
        &self.concentration[alpha]
    }

    /// `B_αβ`
    pub fn influence(&self, alpha: usize, beta: usize) -> &Ten4 {
        &self.influence[alpha][beta]
    }

    /// `C̄`
    pub fn effective_stiffness(&self) -> &Ten4 {
        &self.effective
    }

    pub fn effective_compliance(&self) -> &Ten4 {
        &self.effective_inv
    }

    /// Phase strains `A_α : ε̄ + Σ_β B_αβ : εᵖ_β`.
    pub fn localize(&self, macro_strain: &Sym2, plastic: &[Sym2]) -> Vec<Sym2> {
        assert_eq!(plastic.len(), self.len(), "one plastic strain per phase");
        (0..self.len())
            .map(|alpha| {
                let mut eps = self.concentration[alpha].apply(macro_strain);
                for (b, ep) in self.influence[alpha].iter().zip(plastic) {
                    eps += b.apply(ep);
                }
                eps
            })
            .collect()
    }

    /// `Σ_α f_α A_αᵀ : C_α : εᵖ_α`, the negated macroscopic eigen-stress.
    fn weighted_plastic_stress(&self, plastic: &[Sym2]) -> Sym2 {
        assert_eq!(plastic.len(), self.len(), "one plastic strain per phase");
        let mut acc = Sym2::zero();
        for (w, ep) in self.eigen_weights.iter().zip(plastic) {
            acc += w.apply(ep);
        }
        acc
    }

    /// Macroscopic eigen-stress `ς̄ = -Σ_α f_α A_αᵀ : C_α : εᵖ_α`.
    pub fn eigen_stress(&self, plastic: &[Sym2]) -> Sym2 {
        -self.weighted_plastic_stress(plastic)
    }

    /// `σ̄ = C̄ : ε̄ + ς̄`.
    pub fn upscale_stress(&self, macro_strain: &Sym2, plastic: &[Sym2]) -> Sym2 {
        self.effective.apply(macro_strain) + self.eigen_stress(plastic)
    }

    /// `ε̄ᵖ = C̄⁻¹ : Σ_α f_α A_αᵀ : C_α : εᵖ_α`.
    pub fn macro_plastic_strain(&self, plastic: &[Sym2]) -> Sym2 {
        self.effective_inv.apply(&self.weighted_plastic_stress(plastic))
    }

    /// Volume average `Σ_α f_α x_α`.
    pub fn average(&self, fields: &[Sym2]) -> Sym2 {
        let mut acc = Sym2::zero();
        for (f, x) in self.fractions.iter().zip(fields) {
            acc += *x * *f;
        }
        acc
    }

    /// `‖Σ_α f_α A_α - I‖∞` (largest Mandel entry).
    pub fn concentration_residual(&self) -> f64 {
        let mut acc = -Ten4::identity();
        for (f, a) in self.fractions.iter().zip(&self.concentration) {
            acc += *a * *f;
        }
        acc.max_abs()
    }

    /// `max_β ‖Σ_α f_α B_αβ‖∞`.
    pub fn influence_residual(&self) -> f64 {
        (0..self.len())
            .map(|beta| {
                let mut acc = Ten4::zero();
                for (alpha, f) in self.fractions.iter().enumerate() {
                    acc += self.influence[alpha][beta] * *f;
                }
                acc.max_abs()
            })
            .fold(0.0, f64::max)
    }

    /// `‖C̄ - iso(C̄)‖ / ‖C̄‖` in the Frobenius norm.
    pub fn anisotropy(&self) -> f64 {
        let iso = self.effective.isotropic_part();
        (self.effective - iso).norm() / self.effective.norm()
    }
}
