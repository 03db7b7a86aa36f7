//! Reference solutions and the invariant battery behind `mfplast check`.

use crate::error::Result;
use crate::eshelby::{self, SpheroidShape};
use crate::mean_field::{MeanFieldOperators, PhaseSpec, Scheme};
use crate::plasticity::{DruckerPrager, PlasticModel};
use crate::scenario::Scenario;
use crate::solver::{Solver, SolverSettings};
use crate::tensor::{bulk_shear, iso_projectors, iso_stiffness, Sym2};

/// Point of the classical J2 radial-return solution.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadialReturnPoint {
    pub stress: Sym2,
    pub plastic_strain: Sym2,
    pub multiplier: f64,
}

/// Strain-driven von Mises perfect plasticity integrated by closed-form
/// radial return: `Δλ = (q_tr - σ0) / 3μ`, `σ = σ_tr - 3μ Δλ s_tr / q_tr`.
pub fn radial_return_j2(young: f64, poisson: f64, sigma0: f64, path: &[Sym2]) -> Result<Vec<RadialReturnPoint>> {
    let (k, mu) = bulk_shear(young, poisson)?;
    let mut plastic = Sym2::zero();
    let mut out = Vec::with_capacity(path.len());
    for eps in path {
        let elastic = *eps - plastic;
        let trial = elastic.deviator() * (2.0 * mu) + Sym2::identity() * (k * elastic.trace());
        let s = trial.deviator();
        let q = (1.5 * s.dot(&s)).sqrt();
        if q <= sigma0 {
            out.push(RadialReturnPoint {
                stress: trial,
                plastic_strain: plastic,
                multiplier: 0.0,
            });
            continue;
        }
        let dl = (q - sigma0) / (3.0 * mu);
        let n = s * (1.5 / q);
        plastic += n * dl;
        out.push(RadialReturnPoint {
            stress: trial - n * (2.0 * mu * dl),
            plastic_strain: plastic,
            multiplier: dl,
        });
    }
    Ok(out)
}

/// Non-proportional strain path used by the homogeneous-limit checks:
/// axial compression with shear, then partial reversal.
pub fn reference_strain_path(increments: usize) -> Vec<Sym2> {
    let peak = Sym2::from_components([4e-4, -1e-4, -2e-3, 0.0, 3e-4, 5e-4]);
    let back = Sym2::from_components([-2e-4, 2e-4, -1e-3, 4e-4, 0.0, 2e-4]);
    let mut path = Vec::with_capacity(2 * increments);
    for i in 1..=increments {
        path.push(peak * (i as f64 / increments as f64));
    }
    for i in 1..=increments {
        let t = i as f64 / increments as f64;
        path.push(peak + (back - peak) * t);
    }
    path
}

/// Largest stress and plastic strain mismatch between a multiscale run of
/// `phases` along `path` and the radial-return solution of one material.
pub fn homogeneous_mismatch(
    phases: &[PhaseSpec],
    young: f64,
    poisson: f64,
    sigma0: f64,
    path: &[Sym2],
) -> Result<(f64, f64)> {
    let ops = MeanFieldOperators::assemble(phases, Scheme::MoriTanaka)?;
    let solver = Solver::new(&ops, phases, SolverSettings::default());
    let oracle = radial_return_j2(young, poisson, sigma0, path)?;
    let mut state = solver.initial_state();
    let (mut ds, mut dp) = (0.0f64, 0.0f64);
    for (eps, reference) in path.iter().zip(&oracle) {
        state = solver.step(&state, eps)?;
        ds = ds.max((state.macro_stress - reference.stress).max_abs());
        dp = dp.max((state.macro_plastic_strain - reference.plastic_strain).max_abs());
        for p in &state.phases {
            ds = ds.max((p.stress - reference.stress).max_abs());
            dp = dp.max((p.plastic_strain - reference.plastic_strain).max_abs());
        }
    }
    Ok((ds, dp))
}

/// Two phases (matrix and one tilted spheroid family) with identical von Mises
/// material.
pub fn identical_two_phase(young: f64, poisson: f64, sigma0: f64) -> Result<Vec<PhaseSpec>> {
    let model = PlasticModel::DruckerPrager(DruckerPrager::new(0.0, sigma0)?);
    Ok(vec![
        PhaseSpec::matrix("matrix", 0.7, young, poisson).with_plastic(model),
        PhaseSpec::spheroid(
            "inclusion",
            0.3,
            young,
            poisson,
            SpheroidShape::new(0.35)?,
            crate::tensor::Orientation::about_axis(nalgebra::Vector3::new(1.0, 2.0, 3.0), 0.7)?,
        )
        .with_plastic(model),
    ])
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn outcome(name: &'static str, passed: bool, detail: String) -> CheckOutcome {
    CheckOutcome { name, passed, detail }
}

fn guarded(name: &'static str, f: impl FnOnce() -> Result<CheckOutcome>) -> CheckOutcome {
    f().unwrap_or_else(|e| outcome(name, false, format!("error: {e}")))
}

/// Runs the oracle battery: operator consistency, spherical Eshelby tensor,
/// closed-form radial return and the homogeneous limit.
pub fn run_checks() -> Vec<CheckOutcome> {
    vec![
        guarded("operator consistency", || {
            let phases = Scenario::default_scenario().phases()?;
            let ops = MeanFieldOperators::assemble(&phases, Scheme::MoriTanaka)?;
            let (a, b) = (ops.concentration_residual(), ops.influence_residual());
            Ok(outcome(
                "operator consistency",
                a < 1e-10 && b < 1e-10,
                format!("|sum f A - I| = {a:.3e}, max |sum f B| = {b:.3e}"),
            ))
        }),
        guarded("sphere Eshelby tensor", || {
            let s = eshelby::eshelby_tensor(&SpheroidShape::sphere(), 0.25)?;
            let (j, k) = iso_projectors();
            let (a, b) = (j.contract(&s), k.contract(&s) / 5.0);
            let (ea, eb) = ((a - 5.0 / 9.0).abs(), (b - 22.0 / 45.0).abs());
            let q = eshelby::quadrature::eshelby_tensor(0.35, 0.25);
            let closed = eshelby::eshelby_tensor(&SpheroidShape::new(0.35)?, 0.25)?;
            let eq = (closed - q).max_abs();
            Ok(outcome(
                "sphere Eshelby tensor",
                ea < 1e-10 && eb < 1e-10 && eq < 1e-8,
                format!("|alpha - 5/9| = {ea:.3e}, |beta - 22/45| = {eb:.3e}, spheroid vs quadrature {eq:.3e}"),
            ))
        }),
        guarded("radial return", || {
            let model = PlasticModel::DruckerPrager(DruckerPrager::new(0.0, 0.12)?);
            let phases = vec![PhaseSpec::matrix("m", 1.0, 1000.0, 0.25).with_plastic(model)];
            let path = reference_strain_path(20);
            let (ds, dp) = homogeneous_mismatch(&phases, 1000.0, 0.25, 0.12, &path)?;
            Ok(outcome(
                "radial return",
                ds < 1e-10 && dp < 1e-10,
                format!("stress mismatch {ds:.3e} MPa, plastic strain mismatch {dp:.3e}"),
            ))
        }),
        guarded("homogeneous limit", || {
            let phases = identical_two_phase(1000.0, 0.25, 0.12)?;
            let path = reference_strain_path(20);
            let (ds, dp) = homogeneous_mismatch(&phases, 1000.0, 0.25, 0.12, &path)?;
            let c = iso_stiffness(1000.0, 0.25)?;
            let ops = MeanFieldOperators::assemble(&phases, Scheme::MoriTanaka)?;
            let dc = (*ops.effective_stiffness() - c).max_abs() / c.max_abs();
            Ok(outcome(
                "homogeneous limit",
                ds < 1e-10 && dp < 1e-10 && dc < 1e-12,
                format!("stress mismatch {ds:.3e} MPa, plastic strain mismatch {dp:.3e}, stiffness {dc:.3e}"),
            ))
        }),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracle_uniaxial_yield_point() {
        // uniaxial stress state at yield has sigma_eq = sigma0
        let (e, nu, s0) = (1000.0, 0.25, 0.12);
        let strain = Sym2::from_components([nu * s0 / e, nu * s0 / e, -s0 / e, 0.0, 0.0, 0.0]) * 2.0;
        let out = radial_return_j2(e, nu, s0, &[strain]).unwrap();
        let s = out[0].stress.deviator();
        assert!(((1.5 * s.dot(&s)).sqrt() - s0).abs() < 1e-14);
        assert!(out[0].multiplier > 0.0);
        assert!(out[0].plastic_strain.trace().abs() < 1e-18);
    }

    #[test]
    fn oracle_elastic_below_yield() {
        let strain = Sym2::from_components([0.0, 0.0, -1e-5, 0.0, 0.0, 0.0]);
        let out = radial_return_j2(1000.0, 0.25, 0.12, &[strain]).unwrap();
        let c = iso_stiffness(1000.0, 0.25).unwrap();
        assert!((out[0].stress - c.apply(&strain)).max_abs() < 1e-15);
        assert_eq!(out[0].multiplier, 0.0);
    }

    #[test]
    fn battery_passes() {
        for c in run_checks() {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }
}
