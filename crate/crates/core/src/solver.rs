//! Incremental multiscale return mapping.
//!
//! Each increment localizes the new macroscopic strain with the plastic
//! strains frozen (trial state), checks every phase against its yield
//! criterion, and, if any phase is violated, solves the coupled system
//! `F(σ_α(λ)) = 0` for the plastic multipliers of the active phases. Phase
//! stresses depend on all active multipliers through the influence tensors:
//!
//! ```text
//! σ_α = σ_α^tr + C_α : (Σ_β λ_β B_αβ : m_β - λ_α m_α),   m = ∂G/∂σ
//! ```
//!
//! Stress-controlled macroscopic components are enforced by an outer
//! iteration on the free strain components using the homogenized elastic
//! stiffness as iteration operator.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::mean_field::{MeanFieldOperators, PhaseSpec};
use crate::plasticity::{DruckerPrager, PlasticModel};
use crate::tensor::{Sym2, Ten4, Vec6};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum JacobianKind {
    #[default]
    Analytic,
    FiniteDifference,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverSettings {
    /// Newton residual tolerance on `|F|`, relative to the phase `σ0`.
    pub newton_tolerance: f64,
    /// A phase is plastic when `F > yield_tolerance · σ0`.
    pub yield_tolerance: f64,
    pub max_newton_iterations: usize,
    pub max_active_set_iterations: usize,
    pub jacobian: JacobianKind,
    /// Absolute tolerance (MPa) on stress-controlled components, scaled by
    /// `max(1, ‖σ̄‖)`.
    pub stress_tolerance: f64,
    pub max_mixed_iterations: usize,
    /// Number of times a failing increment may be halved.
    pub max_subdivisions: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            newton_tolerance: 1e-12,
            yield_tolerance: 1e-10,
            max_newton_iterations: 50,
            max_active_set_iterations: 20,
            jacobian: JacobianKind::Analytic,
            stress_tolerance: 1e-10,
            max_mixed_iterations: 500,
            max_subdivisions: 8,
        }
    }
}

/// Fields of one phase.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct PhaseState {
    pub strain: Sym2,
    pub plastic_strain: Sym2,
    pub stress: Sym2,
}

/// State of the representative volume after a converged increment.
#[derive(Clone, Debug, PartialEq)]
pub struct RevState {
    pub step: usize,
    pub phases: Vec<PhaseState>,
    pub macro_strain: Sym2,
    pub macro_plastic_strain: Sym2,
    pub macro_stress: Sym2,
    /// Phases that plasticized in the increment leading to this state.
    pub active: ActiveSet,
    /// Plastic multiplier increments of that increment, zero for elastic phases.
    pub multipliers: Vec<f64>,
}

impl RevState {
    pub fn plastic_strains(&self) -> Vec<Sym2> {
        self.phases.iter().map(|p| p.plastic_strain).collect()
    }
}

/// Partition of the phases into elastic and plastic sets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActiveSet {
    plastic: Vec<bool>,
}

impl ActiveSet {
    pub fn empty(n: usize) -> Self {
        ActiveSet {
            plastic: vec![false; n],
        }
    }

    pub fn from_flags(plastic: Vec<bool>) -> Self {
        ActiveSet { plastic }
    }

    pub fn len(&self) -> usize {
        self.plastic.len()
    }

    pub fn is_empty(&self) -> bool {
        !self.plastic.iter().any(|&p| p)
    }

    pub fn is_plastic(&self, alpha: usize) -> bool {
        self.plastic[alpha]
    }

    pub fn flags(&self) -> &[bool] {
        &self.plastic
    }

    pub fn plastic_phases(&self) -> Vec<usize> {
        (0..self.plastic.len()).filter(|&a| self.plastic[a]).collect()
    }

    pub fn elastic_phases(&self) -> Vec<usize> {
        (0..self.plastic.len()).filter(|&a| !self.plastic[a]).collect()
    }

    pub fn count(&self) -> usize {
        self.plastic.iter().filter(|&&p| p).count()
    }
}

/// Trial state of an increment: plastic strains frozen at step `n`.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialState {
    pub macro_strain: Sym2,
    pub strains: Vec<Sym2>,
    pub stresses: Vec<Sym2>,
}

/// Plastic multiplier increments, indexed by phase.
#[derive(Clone, Debug, PartialEq)]
pub struct PlasticMultipliers(pub Vec<f64>);

/// Control of one macroscopic component over a load segment.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Control {
    /// Target tensor strain component at the end of the segment.
    Strain(f64),
    /// Target stress component (MPa) at the end of the segment.
    Stress(f64),
}

/// Segment of a load program; components in the order 11, 22, 33, 23, 13, 12.
#[derive(Clone, Debug, PartialEq)]
pub struct Segment {
    pub controls: [Control; 6],
    pub increments: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LoadProgram {
    pub segments: Vec<Segment>,
}

impl LoadProgram {
    /// Axial strain path on component 33 with all other stress components
    /// held at zero: load to `peak`, then unload to `unload`.
    pub fn uniaxial(peak: f64, loading: usize, unload: f64, unloading: usize) -> Self {
        let seg = |target, increments| {
            let mut controls = [Control::Stress(0.0); 6];
            controls[2] = Control::Strain(target);
            Segment {
                controls,
                increments,
            }
        };
        LoadProgram {
            segments: vec![seg(peak, loading), seg(unload, unloading)],
        }
    }

    pub fn total_increments(&self) -> usize {
        self.segments.iter().map(|s| s.increments).sum()
    }

    pub fn validate(&self) -> Result<()> {
        for (i, s) in self.segments.iter().enumerate() {
            if s.increments == 0 {
                return Err(Error::InvalidProgram(format!(
                    "segment {} has zero increments",
                    i + 1
                )));
            }
            for c in &s.controls {
                let v = match c {
                    Control::Strain(v) | Control::Stress(v) => *v,
                };
                if !v.is_finite() {
                    return Err(Error::InvalidProgram(format!(
                        "segment {} has a non-finite target",
                        i + 1
                    )));
                }
            }
        }
        Ok(())
    }
}

const SHEAR_SCALE: [f64; 6] = [
    1.0,
    1.0,
    1.0,
    std::f64::consts::SQRT_2,
    std::f64::consts::SQRT_2,
    std::f64::consts::SQRT_2,
];

/// Targets of one increment in Mandel components.
#[derive(Clone, Copy, Debug)]
struct MixedTarget {
    stress_controlled: [bool; 6],
    values: Vec6,
}

impl MixedTarget {
    /// Interpolates between the state `from` and the segment end `controls`.
    fn interpolate(from: &RevState, controls: &[Control; 6], t: f64) -> Self {
        let mut stress_controlled = [false; 6];
        let mut values = Vec6::zeros();
        for (i, c) in controls.iter().enumerate() {
            let (start, end) = match *c {
                Control::Strain(v) => (from.macro_strain.mandel()[i], v * SHEAR_SCALE[i]),
                Control::Stress(v) => {
                    stress_controlled[i] = true;
                    (from.macro_stress.mandel()[i], v * SHEAR_SCALE[i])
                }
            };
            values[i] = if t == 1.0 { end } else { start + t * (end - start) };
        }
        MixedTarget {
            stress_controlled,
            values,
        }
    }

    fn midpoint(&self, from: &RevState) -> Self {
        let mut values = self.values;
        for i in 0..6 {
            let start = if self.stress_controlled[i] {
                from.macro_stress.mandel()[i]
            } else {
                from.macro_strain.mandel()[i]
            };
            values[i] = 0.5 * (start + self.values[i]);
        }
        MixedTarget {
            stress_controlled: self.stress_controlled,
            values,
        }
    }
}

/// Multiscale return-mapping driver for a fixed phase assembly.
pub struct Solver<'a> {
    ops: &'a MeanFieldOperators,
    models: Vec<PlasticModel>,
    settings: SolverSettings,
    /// `C_α : B_αβ - δ_αβ C_α`
    coupling: Vec<Vec<Ten4>>,
}

impl<'a> Solver<'a> {
    pub fn new(ops: &'a MeanFieldOperators, phases: &[PhaseSpec], settings: SolverSettings) -> Self {
        Self::with_models(ops, phases.iter().map(|p| p.plastic).collect(), settings)
    }

    pub fn with_models(
        ops: &'a MeanFieldOperators,
        models: Vec<PlasticModel>,
        settings: SolverSettings,
    ) -> Self {
        assert_eq!(models.len(), ops.len(), "one plastic model per phase");
        let n = ops.len();
        let coupling = (0..n)
            .map(|a| {
                (0..n)
                    .map(|b| {
                        let cb = *ops.stiffness(a) * *ops.influence(a, b);
                        if a == b {
                            cb - *ops.stiffness(a)
                        } else {
                            cb
                        }
                    })
                    .collect()
            })
            .collect();
        Solver {
            ops,
            models,
            settings,
            coupling,
        }
    }

    pub fn operators(&self) -> &MeanFieldOperators {
        self.ops
    }

    pub fn settings(&self) -> &SolverSettings {
        &self.settings
    }

    pub fn models(&self) -> &[PlasticModel] {
        &self.models
    }

    pub fn initial_state(&self) -> RevState {
        let n = self.ops.len();
        RevState {
            step: 0,
            phases: vec![PhaseState::default(); n],
            macro_strain: Sym2::zero(),
            macro_plastic_strain: Sym2::zero(),
            macro_stress: Sym2::zero(),
            active: ActiveSet::empty(n),
            multipliers: vec![0.0; n],
        }
    }

    /// Trial strains and stresses for the macroscopic strain increment
    /// `delta`, with plastic strains frozen at `state`.
    pub fn trial_step(&self, state: &RevState, delta: &Sym2) -> TrialState {
        self.trial_at(state, &(state.macro_strain + *delta))
    }

    fn trial_at(&self, state: &RevState, macro_strain: &Sym2) -> TrialState {
        let plastic = state.plastic_strains();
        let strains = self.ops.localize(macro_strain, &plastic);
        let stresses = strains
            .iter()
            .zip(&plastic)
            .enumerate()
            .map(|(a, (e, ep))| self.ops.stiffness(a).apply(&(*e - *ep)))
            .collect();
        TrialState {
            macro_strain: *macro_strain,
            strains,
            stresses,
        }
    }

    fn yield_tolerance(&self, dp: &DruckerPrager) -> f64 {
        self.settings.yield_tolerance * dp.failure_stress()
    }

    /// Yield function values of all phases (`-∞` for purely elastic phases)
    /// and the phases violating their criterion.
    pub fn check_yield(&self, stresses: &[Sym2]) -> (Vec<f64>, ActiveSet) {
        let mut values = Vec::with_capacity(stresses.len());
        let mut flags = Vec::with_capacity(stresses.len());
        for (model, sigma) in self.models.iter().zip(stresses) {
            match model.drucker_prager() {
                Some(dp) => {
                    let f = dp.yield_value(sigma);
                    values.push(f);
                    flags.push(f > self.yield_tolerance(dp));
                }
                None => {
                    values.push(f64::NEG_INFINITY);
                    flags.push(false);
                }
            }
        }
        (values, ActiveSet::from_flags(flags))
    }

    /// Stresses for multipliers `lambda` along directions `dirs` on the
    /// active phases `set`.
    fn stresses(&self, trial: &TrialState, set: &[usize], lambda: &[f64], dirs: &[Sym2]) -> Vec<Sym2> {
        (0..self.ops.len())
            .map(|a| {
                let mut s = trial.stresses[a];
                for (k, &b) in set.iter().enumerate() {
                    s += self.coupling[a][b].apply(&(dirs[k] * lambda[k]));
                }
                s
            })
            .collect()
    }

    fn model(&self, alpha: usize) -> &DruckerPrager {
        self.models[alpha]
            .drucker_prager()
            .expect("active phase without a plastic model")
    }

    /// Newton solve of `F(σ_s) = 0` over the active phases `set`.
    /// Returns multipliers and converged flow directions.
    fn solve_multipliers(&self, trial: &TrialState, set: &[usize]) -> Result<(Vec<f64>, Vec<Sym2>)> {
        let n = set.len();
        let mut lambda = vec![0.0; n];
        let mut dirs = set
            .iter()
            .map(|&a| self.model(a).flow_direction(&trial.stresses[a]))
            .collect::<Result<Vec<_>>>()?;
        let mut residual = f64::INFINITY;

        for _ in 0..self.settings.max_newton_iterations {
            let mut sigma = self.stresses(trial, set, &lambda, &dirs);

            // re-linearize about the current iterate
            let mut mismatch: f64 = 0.0;
            let mut new_dirs = Vec::with_capacity(n);
            for (k, &a) in set.iter().enumerate() {
                let m = self.model(a).flow_direction(&sigma[a])?;
                let scale = self.ops.stiffness(a).max_abs() / self.model(a).failure_stress();
                mismatch = mismatch.max((m - dirs[k]).max_abs() * lambda[k].abs() * scale);
                new_dirs.push(m);
            }
            let tol_ok = |f: &[f64]| {
                f.iter()
                    .zip(set)
                    .all(|(r, &a)| r.abs() <= self.settings.newton_tolerance * self.model(a).failure_stress())
            };
            let f: Vec<f64> = set.iter().map(|&a| self.model(a).yield_value(&sigma[a])).collect();
            residual = f.iter().fold(0.0, |acc: f64, r| acc.max(r.abs()));
            if tol_ok(&f) && mismatch <= self.settings.newton_tolerance {
                return Ok((lambda, dirs));
            }
            if mismatch > 0.0 {
                dirs = new_dirs;
                sigma = self.stresses(trial, set, &lambda, &dirs);
            }
            let f: Vec<f64> = set.iter().map(|&a| self.model(a).yield_value(&sigma[a])).collect();

            let jac = match self.settings.jacobian {
                JacobianKind::Analytic => self.analytic_jacobian(set, &sigma, &dirs)?,
                JacobianKind::FiniteDifference => self.fd_jacobian(trial, set, &lambda, &dirs, &f),
            };
            let rhs = DVector::from_iterator(n, f.iter().map(|r| -r));
            let step = jac.lu().solve(&rhs).ok_or(Error::StepFailure {
                iterations: 0,
                residual,
            })?;
            for (l, d) in lambda.iter_mut().zip(step.iter()) {
                *l += d;
            }
            if lambda.iter().any(|l| !l.is_finite()) {
                break;
            }
        }
        Err(Error::StepFailure {
            iterations: self.settings.max_newton_iterations,
            residual,
        })
    }

    /// `J_st = n_s : C_s : (B_st : m_t - δ_st m_t)`
    fn analytic_jacobian(&self, set: &[usize], sigma: &[Sym2], dirs: &[Sym2]) -> Result<DMatrix<f64>> {
        let n = set.len();
        let mut jac = DMatrix::zeros(n, n);
        for (s, &a) in set.iter().enumerate() {
            let grad = self.model(a).yield_gradient(&sigma[a])?;
            for (t, &b) in set.iter().enumerate() {
                jac[(s, t)] = grad.dot(&self.coupling[a][b].apply(&dirs[t]));
            }
        }
        Ok(jac)
    }

    fn fd_jacobian(
        &self,
        trial: &TrialState,
        set: &[usize],
        lambda: &[f64],
        dirs: &[Sym2],
        f0: &[f64],
    ) -> DMatrix<f64> {
        let n = set.len();
        let mut jac = DMatrix::zeros(n, n);
        let mut perturbed = lambda.to_vec();
        for (t, &b) in set.iter().enumerate() {
            let scale = self.model(b).failure_stress() / self.ops.stiffness(b).max_abs();
            let h = 1e-7 * lambda[t].abs().max(scale);
            perturbed[t] = lambda[t] + h;
            let sigma = self.stresses(trial, set, &perturbed, dirs);
            for (s, &a) in set.iter().enumerate() {
                jac[(s, t)] = (self.model(a).yield_value(&sigma[a]) - f0[s]) / h;
            }
            perturbed[t] = lambda[t];
        }
        jac
    }

    /// Return mapping from the trial state with an active-set iteration:
    /// phases with negative multipliers leave the set, newly violating
    /// phases join it.
    pub fn return_map(
        &self,
        state: &RevState,
        trial: &TrialState,
        candidates: &ActiveSet,
    ) -> Result<(RevState, PlasticMultipliers, ActiveSet)> {
        let n = self.ops.len();
        let mut flags = candidates.flags().to_vec();
        for _ in 0..self.settings.max_active_set_iterations {
            let set: Vec<usize> = (0..n).filter(|&a| flags[a]).collect();
            let (lambda, dirs) = if set.is_empty() {
                (Vec::new(), Vec::new())
            } else {
                self.solve_multipliers(trial, &set)?
            };

            let mut multipliers = vec![0.0; n];
            let mut increments = vec![Sym2::zero(); n];
            for (k, &a) in set.iter().enumerate() {
                multipliers[a] = lambda[k];
                increments[a] = dirs[k] * lambda[k];
            }
            let new_state = self.assemble_state(state, trial, &increments, ActiveSet::from_flags(flags.clone()), multipliers.clone());

            let (values, _) = self.check_yield(&new_state.phases.iter().map(|p| p.stress).collect::<Vec<_>>());
            let mut changed = false;
            for a in 0..n {
                if flags[a] && multipliers[a] < 0.0 {
                    flags[a] = false;
                    changed = true;
                } else if !flags[a] {
                    if let Some(dp) = self.models[a].drucker_prager() {
                        if values[a] > self.yield_tolerance(dp) {
                            flags[a] = true;
                            changed = true;
                        }
                    }
                }
            }
            if !changed {
                let active = new_state.active.clone();
                return Ok((new_state, PlasticMultipliers(multipliers), active));
            }
        }
        Err(Error::ActiveSetOscillation(
            self.settings.max_active_set_iterations,
        ))
    }

    fn assemble_state(
        &self,
        state: &RevState,
        trial: &TrialState,
        increments: &[Sym2],
        active: ActiveSet,
        multipliers: Vec<f64>,
    ) -> RevState {
        let n = self.ops.len();
        let phases = (0..n)
            .map(|a| {
                let mut strain = trial.strains[a];
                for (b, inc) in increments.iter().enumerate() {
                    if active.is_plastic(b) {
                        strain += self.ops.influence(a, b).apply(inc);
                    }
                }
                let plastic_strain = state.phases[a].plastic_strain + increments[a];
                PhaseState {
                    strain,
                    plastic_strain,
                    stress: self.ops.stiffness(a).apply(&(strain - plastic_strain)),
                }
            })
            .collect();
        let mut next = RevState {
            step: state.step + 1,
            phases,
            macro_strain: trial.macro_strain,
            macro_plastic_strain: state.macro_plastic_strain,
            macro_stress: state.macro_stress,
            active,
            multipliers,
        };
        self.update_macro(&mut next);
        next
    }

    /// Macroscopic plastic strain and stress from the phase plastic strains.
    pub fn update_macro(&self, state: &mut RevState) {
        let plastic = state.plastic_strains();
        state.macro_plastic_strain = self.ops.macro_plastic_strain(&plastic);
        state.macro_stress = self
            .ops
            .effective_stiffness()
            .apply(&(state.macro_strain - state.macro_plastic_strain));
    }

    /// One increment to the prescribed macroscopic strain.
    pub fn step(&self, state: &RevState, macro_strain: &Sym2) -> Result<RevState> {
        let trial = self.trial_at(state, macro_strain);
        let (_, candidates) = self.check_yield(&trial.stresses);
        let (next, _, _) = self.return_map(state, &trial, &candidates)?;
        Ok(next)
    }

    /// Runs a load program and returns the initial state followed by one
    /// state per increment.
    pub fn drive(&self, program: &LoadProgram) -> Result<Vec<RevState>> {
        program.validate()?;
        let mut history = Vec::with_capacity(program.total_increments() + 1);
        let mut state = self.initial_state();
        history.push(state.clone());
        for segment in &program.segments {
            let start = state.clone();
            for inc in 1..=segment.increments {
                let t = inc as f64 / segment.increments as f64;
                let target = MixedTarget::interpolate(&start, &segment.controls, t);
                let mut next = self.advance(&state, &target, 0)?;
                next.step = state.step + 1;
                state = next;
                history.push(state.clone());
            }
        }
        Ok(history)
    }

    /// Reaches `target` from `state`, halving the increment on failure.
    fn advance(&self, state: &RevState, target: &MixedTarget, depth: usize) -> Result<RevState> {
        match self.mixed_step(state, target) {
            Ok(next) => Ok(next),
            Err(
                e @ (Error::StepFailure { .. }
                | Error::ActiveSetOscillation(_)
                | Error::MixedControl { .. }),
            ) => {
                if depth >= self.settings.max_subdivisions {
                    return Err(e);
                }
                let mid = target.midpoint(state);
                let half = self.advance(state, &mid, depth + 1)?;
                self.advance(&half, target, depth + 1)
            }
            Err(e) => Err(e),
        }
    }

    /// One increment under mixed control.
    fn mixed_step(&self, state: &RevState, target: &MixedTarget) -> Result<RevState> {
        let free: Vec<usize> = (0..6).filter(|&i| target.stress_controlled[i]).collect();
        let fixed: Vec<usize> = (0..6).filter(|&i| !target.stress_controlled[i]).collect();

        let mut strain = *state.macro_strain.mandel();
        for &i in &fixed {
            strain[i] = target.values[i];
        }
        if free.is_empty() {
            return self.step(state, &Sym2::from_mandel(strain));
        }

        let c = self.ops.effective_stiffness().mandel();
        let sub = |rows: &[usize], cols: &[usize]| {
            DMatrix::from_fn(rows.len(), cols.len(), |r, k| c[(rows[r], cols[k])])
        };
        let c_ff = sub(&free, &free)
            .lu();
        let c_fs = sub(&free, &fixed);

        // elastic predictor for the free components
        let d_fixed = DVector::from_iterator(
            fixed.len(),
            fixed.iter().map(|&i| strain[i] - state.macro_strain.mandel()[i]),
        );
        let d_stress = DVector::from_iterator(
            free.len(),
            free.iter().map(|&i| target.values[i] - state.macro_stress.mandel()[i]),
        );
        let predictor = c_ff
            .solve(&(d_stress - c_fs * d_fixed))
            .ok_or(Error::Singular {
                condition: f64::INFINITY,
            })?;
        for (k, &i) in free.iter().enumerate() {
            strain[i] += predictor[k];
        }

        let mut residual = f64::INFINITY;
        for _ in 0..self.settings.max_mixed_iterations {
            let next = self.step(state, &Sym2::from_mandel(strain))?;
            let sigma = next.macro_stress.mandel();
            let r = DVector::from_iterator(
                free.len(),
                free.iter().map(|&i| sigma[i] - target.values[i]),
            );
            residual = r.amax();
            let tol = self.settings.stress_tolerance * next.macro_stress.norm().max(1.0);
            if residual <= tol {
                return Ok(next);
            }
            let correction = c_ff.solve(&r).ok_or(Error::Singular {
                condition: f64::INFINITY,
            })?;
            for (k, &i) in free.iter().enumerate() {
                strain[i] -= correction[k];
            }
        }
        Err(Error::MixedControl {
            step: state.step + 1,
            residual,
        })
    }
}

/// Apparent elastic modulus `1 / (C̄⁻¹)_ii` along Mandel component `i` with
/// all other stress components free.
pub fn apparent_modulus(ops: &MeanFieldOperators, component: usize) -> f64 {
    1.0 / ops.effective_compliance().mandel()[(component, component)]
}
