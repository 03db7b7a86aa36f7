//! Scenario files.
//!
//! A scenario is a TOML document with the sections `[matrix]`,
//! `[[inclusions]]`, `[loading]` (with `[[loading.segment]]` entries),
//! `[solver]` and `[output]`. Units are MPa and radians; strains are
//! dimensionless tensor components. The grammar is documented in the README.

use std::collections::BTreeMap;
use std::ops::Range;
use std::path::PathBuf;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use toml::Spanned;

use crate::error::{Error, Result};
use crate::eshelby::SpheroidShape;
use crate::mean_field::{cube26_axes, PhaseSpec, Scheme, FRACTION_TOLERANCE};
use crate::plasticity::{DruckerPrager, PlasticModel};
use crate::solver::{Control, JacobianKind, LoadProgram, Segment, SolverSettings};
use crate::tensor::Orientation;

/// Component keys in the order used by [`Control`] arrays.
pub const COMPONENT_KEYS: [&str; 6] = ["11", "22", "33", "23", "13", "12"];

/// Elastic constants and plastic law of a material.
#[derive(Clone, Debug, PartialEq)]
pub struct MaterialSpec {
    pub young: f64,
    pub poisson: f64,
    pub model: PlasticModel,
}

#[derive(Clone, Debug, PartialEq)]
pub enum OrientationSet {
    /// The 26 symmetry directions of a cube.
    Cube26,
    /// Explicit symmetry axes (normalized on use).
    Axes(Vec<[f64; 3]>),
}

impl OrientationSet {
    pub fn axes(&self) -> Vec<Vector3<f64>> {
        match self {
            OrientationSet::Cube26 => cube26_axes(),
            OrientationSet::Axes(a) => a.iter().map(|v| Vector3::from(*v)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            OrientationSet::Cube26 => 26,
            OrientationSet::Axes(a) => a.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Spheroids of one material and shape spread evenly over a set of
/// orientations; every orientation becomes one phase.
#[derive(Clone, Debug, PartialEq)]
pub struct InclusionFamily {
    pub id: String,
    pub material: MaterialSpec,
    pub aspect_ratio: f64,
    /// Total fraction of the family.
    pub volume_fraction: f64,
    pub orientations: OrientationSet,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct OutputOptions {
    pub directory: Option<PathBuf>,
    pub per_phase: bool,
    pub plot_data: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub matrix: MaterialSpec,
    pub inclusions: Vec<InclusionFamily>,
    pub scheme: Scheme,
    pub program: LoadProgram,
    pub settings: SolverSettings,
    pub output: OutputOptions,
}

impl Scenario {
    /// Granular material of the reference experiment: a soft elastic matrix
    /// with 26 orientations of stiff, oblate, von Mises grains loaded in
    /// axial compression with free lateral faces, then half unloaded.
    pub fn default_scenario() -> Self {
        Scenario {
            matrix: MaterialSpec {
                young: 100.0,
                poisson: 0.25,
                model: PlasticModel::Elastic,
            },
            inclusions: vec![InclusionFamily {
                id: "grain".into(),
                material: MaterialSpec {
                    young: 1000.0,
                    poisson: 0.25,
                    model: PlasticModel::DruckerPrager(
                        DruckerPrager::new(0.0, 0.12).expect("valid default"),
                    ),
                },
                aspect_ratio: 0.35,
                volume_fraction: 0.143,
                orientations: OrientationSet::Cube26,
            }],
            scheme: Scheme::MoriTanaka,
            program: LoadProgram::uniaxial(-0.001, 100, -0.0005, 50),
            settings: SolverSettings::default(),
            output: OutputOptions {
                directory: None,
                per_phase: false,
                plot_data: true,
            },
        }
    }

    /// The same scenario with purely elastic inclusions.
    pub fn with_elastic_inclusions(mut self) -> Self {
        for inc in &mut self.inclusions {
            inc.material.model = PlasticModel::Elastic;
        }
        self
    }

    pub fn matrix_fraction(&self) -> f64 {
        1.0 - self.inclusions.iter().map(|i| i.volume_fraction).sum::<f64>()
    }

    /// Expands the inclusion families into one phase per orientation; the
    /// matrix is phase 0.
    pub fn phases(&self) -> Result<Vec<PhaseSpec>> {
        let mut phases = vec![PhaseSpec::matrix(
            "matrix",
            self.matrix_fraction(),
            self.matrix.young,
            self.matrix.poisson,
        )
        .with_plastic(self.matrix.model)];
        for inc in &self.inclusions {
            let shape = SpheroidShape::new(inc.aspect_ratio)?;
            let axes = inc.orientations.axes();
            let f = inc.volume_fraction / axes.len() as f64;
            for (k, axis) in axes.into_iter().enumerate() {
                phases.push(
                    PhaseSpec::spheroid(
                        format!("{}-{}", inc.id, k + 1),
                        f,
                        inc.material.young,
                        inc.material.poisson,
                        shape,
                        Orientation::from_axis(axis)?,
                    )
                    .with_plastic(inc.material.model),
                );
            }
        }
        Ok(phases)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let file: FileScenario = toml::from_str(text).map_err(|e| {
            Error::parse(
                e.span().map(|s| line_of(text, s.start)),
                e.message().trim().to_string(),
            )
        })?;
        file.into_scenario(text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(&FileScenario::from_scenario(self)).expect("scenario serializes")
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum ModelKind {
    Elastic,
    DruckerPrager,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum SchemeName {
    MoriTanaka,
    Dilute,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum JacobianName {
    Analytic,
    FiniteDifference,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileScenario {
    matrix: Spanned<FileMatrix>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    inclusions: Vec<Spanned<FileInclusion>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    loading: Option<FileLoading>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    solver: Option<Spanned<FileSolver>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    output: Option<FileOutput>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileMatrix {
    young: f64,
    poisson: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    volume_fraction: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    model: Option<ModelKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    friction_angle: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    failure_stress: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dilatancy_angle: Option<f64>,
}

/// Plastic-law keys shared by `[matrix]` and `[[inclusions]]`.
#[derive(Default)]
struct FileLaw {
    model: Option<ModelKind>,
    friction_angle: Option<f64>,
    failure_stress: Option<f64>,
    dilatancy_angle: Option<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum FileOrientations {
    Keyword(String),
    Axes(Vec<[f64; 3]>),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileInclusion {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    id: Option<String>,
    young: f64,
    poisson: f64,
    aspect_ratio: f64,
    volume_fraction: f64,
    orientations: FileOrientations,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    model: Option<ModelKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    friction_angle: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    failure_stress: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dilatancy_angle: Option<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileLoading {
    segment: Vec<Spanned<FileSegment>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileSegment {
    increments: usize,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    strain: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    stress: BTreeMap<String, f64>,
}

#[derive(Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct FileSolver {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    scheme: Option<SchemeName>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    jacobian: Option<JacobianName>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    newton_tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    yield_tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    stress_tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    max_newton_iterations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    max_active_set_iterations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    max_mixed_iterations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    max_subdivisions: Option<usize>,
}

#[derive(Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct FileOutput {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    directory: Option<PathBuf>,
    #[serde(default)]
    per_phase: bool,
    #[serde(default = "yes")]
    plot_data: bool,
}

macro_rules! law {
    ($t:expr) => {
        FileLaw {
            model: $t.model,
            friction_angle: $t.friction_angle,
            failure_stress: $t.failure_stress,
            dilatancy_angle: $t.dilatancy_angle,
        }
    };
}

macro_rules! impl_with_law {
    ($($t:ty),*) => {$(
        impl $t {
            fn with_law(mut self, law: FileLaw) -> Self {
                self.model = law.model;
                self.friction_angle = law.friction_angle;
                self.failure_stress = law.failure_stress;
                self.dilatancy_angle = law.dilatancy_angle;
                self
            }
        }
    )*};
}

impl_with_law!(FileMatrix, FileInclusion);

fn yes() -> bool {
    true
}

/// Error located at the start of a spanned table.
fn at(text: &str, span: Range<usize>, message: impl Into<String>) -> Error {
    Error::parse(Some(line_of(text, span.start)), message)
}

impl FileLaw {
    fn build(&self, text: &str, span: Range<usize>) -> Result<PlasticModel> {
        let model = self.model.unwrap_or(if self.failure_stress.is_some() {
            ModelKind::DruckerPrager
        } else {
            ModelKind::Elastic
        });
        match model {
            ModelKind::Elastic => {
                if self.friction_angle.is_some()
                    || self.failure_stress.is_some()
                    || self.dilatancy_angle.is_some()
                {
                    return Err(at(text, span, "plastic parameters given for an elastic material"));
                }
                Ok(PlasticModel::Elastic)
            }
            ModelKind::DruckerPrager => {
                let sigma0 = self
                    .failure_stress
                    .ok_or_else(|| at(text, span.clone(), "drucker_prager requires failure_stress"))?;
                let phi = self.friction_angle.unwrap_or(0.0);
                let psi = self.dilatancy_angle.unwrap_or(phi);
                DruckerPrager::non_associated(phi, sigma0, psi)
                    .map(PlasticModel::DruckerPrager)
                    .map_err(|e| at(text, span, e.to_string()))
            }
        }
    }

    fn from_model(model: &PlasticModel) -> Self {
        match model {
            PlasticModel::Elastic => FileLaw::default(),
            PlasticModel::DruckerPrager(dp) => FileLaw {
                model: Some(ModelKind::DruckerPrager),
                friction_angle: Some(dp.friction_angle()),
                failure_stress: Some(dp.failure_stress()),
                dilatancy_angle: (!dp.is_associated()).then_some(dp.dilatancy_angle()),
            },
        }
    }
}

fn check_elastic(text: &str, span: Range<usize>, young: f64, poisson: f64) -> Result<()> {
    if !young.is_finite() || young <= 0.0 {
        return Err(at(text, span, format!("young must be positive, got {young}")));
    }
    if !(poisson > -1.0 && poisson < 0.5) {
        return Err(at(text, span, format!("poisson must lie in (-1, 0.5), got {poisson}")));
    }
    Ok(())
}

impl FileScenario {
    fn into_scenario(self, text: &str) -> Result<Scenario> {
        let span = self.matrix.span();
        let m = self.matrix.into_inner();
        check_elastic(text, span.clone(), m.young, m.poisson)?;
        let matrix = MaterialSpec {
            young: m.young,
            poisson: m.poisson,
            model: law!(m).build(text, span)?,
        };

        let mut inclusions = Vec::with_capacity(self.inclusions.len());
        for (k, entry) in self.inclusions.into_iter().enumerate() {
            let span = entry.span();
            let inc = entry.into_inner();
            check_elastic(text, span.clone(), inc.young, inc.poisson)?;
            SpheroidShape::new(inc.aspect_ratio).map_err(|e| at(text, span.clone(), e.to_string()))?;
            if !(inc.volume_fraction > 0.0 && inc.volume_fraction < 1.0) {
                return Err(at(
                    text,
                    span,
                    format!("volume_fraction must lie in (0, 1), got {}", inc.volume_fraction),
                ));
            }
            let orientations = match inc.orientations {
                FileOrientations::Keyword(k) if k == "cube26" => OrientationSet::Cube26,
                FileOrientations::Keyword(k) => {
                    return Err(at(text, span, format!("unknown orientation set `{k}`")));
                }
                FileOrientations::Axes(a) => {
                    if a.is_empty() {
                        return Err(at(text, span, "orientations must not be empty"));
                    }
                    for axis in &a {
                        Orientation::from_axis(Vector3::from(*axis))
                            .map_err(|e| at(text, span.clone(), e.to_string()))?;
                    }
                    OrientationSet::Axes(a)
                }
            };
            inclusions.push(InclusionFamily {
                id: inc.id.unwrap_or_else(|| format!("inclusion{}", k + 1)),
                material: MaterialSpec {
                    young: inc.young,
                    poisson: inc.poisson,
                    model: law!(inc).build(text, span)?,
                },
                aspect_ratio: inc.aspect_ratio,
                volume_fraction: inc.volume_fraction,
                orientations,
            });
        }

        let inclusion_total: f64 = inclusions.iter().map(|i| i.volume_fraction).sum();
        let total = inclusion_total + m.volume_fraction.unwrap_or(1.0 - inclusion_total);
        if (total - 1.0).abs() > FRACTION_TOLERANCE || inclusion_total >= 1.0 {
            return Err(Error::FractionSum(total.max(inclusion_total)));
        }

        let program = match self.loading {
            None => Scenario::default_scenario().program,
            Some(l) => {
                if l.segment.is_empty() {
                    return Err(Error::parse(None, "loading needs at least one segment"));
                }
                let mut segments = Vec::with_capacity(l.segment.len());
                for entry in l.segment {
                    let span = entry.span();
                    segments.push(entry.into_inner().build(text, span)?);
                }
                LoadProgram { segments }
            }
        };

        let mut scheme = Scheme::MoriTanaka;
        let mut settings = SolverSettings::default();
        if let Some(entry) = self.solver {
            let span = entry.span();
            let s = entry.into_inner();
            if let Some(name) = s.scheme {
                scheme = match name {
                    SchemeName::MoriTanaka => Scheme::MoriTanaka,
                    SchemeName::Dilute => Scheme::Dilute,
                };
            }
            if let Some(j) = s.jacobian {
                settings.jacobian = match j {
                    JacobianName::Analytic => JacobianKind::Analytic,
                    JacobianName::FiniteDifference => JacobianKind::FiniteDifference,
                };
            }
            for (value, slot) in [
                (s.newton_tolerance, &mut settings.newton_tolerance),
                (s.yield_tolerance, &mut settings.yield_tolerance),
                (s.stress_tolerance, &mut settings.stress_tolerance),
            ] {
                if let Some(v) = value {
                    if !v.is_finite() || v <= 0.0 {
                        return Err(at(text, span, format!("tolerances must be positive, got {v}")));
                    }
                    *slot = v;
                }
            }
            for (value, slot) in [
                (s.max_newton_iterations, &mut settings.max_newton_iterations),
                (s.max_active_set_iterations, &mut settings.max_active_set_iterations),
                (s.max_mixed_iterations, &mut settings.max_mixed_iterations),
            ] {
                if let Some(v) = value {
                    if v == 0 {
                        return Err(at(text, span, "iteration limits must be at least 1"));
                    }
                    *slot = v;
                }
            }
            if let Some(v) = s.max_subdivisions {
                settings.max_subdivisions = v;
            }
        }

        let output = self
            .output
            .map(|o| OutputOptions {
                directory: o.directory,
                per_phase: o.per_phase,
                plot_data: o.plot_data,
            })
            .unwrap_or(OutputOptions {
                plot_data: true,
                ..Default::default()
            });

        Ok(Scenario {
            matrix,
            inclusions,
            scheme,
            program,
            settings,
            output,
        })
    }

    fn from_scenario(s: &Scenario) -> Self {
        let nowhere = 0..0;
        let defaults = SolverSettings::default();
        let set = |v: f64, d: f64| (v != d).then_some(v);
        let set_n = |v: usize, d: usize| (v != d).then_some(v);
        FileScenario {
            matrix: Spanned::new(
                nowhere.clone(),
                FileMatrix {
                    young: s.matrix.young,
                    poisson: s.matrix.poisson,
                    volume_fraction: None,
                    model: None,
                    friction_angle: None,
                    failure_stress: None,
                    dilatancy_angle: None,
                }
                .with_law(FileLaw::from_model(&s.matrix.model)),
            ),
            inclusions: s
                .inclusions
                .iter()
                .map(|i| {
                    Spanned::new(
                        nowhere.clone(),
                        FileInclusion {
                            id: Some(i.id.clone()),
                            young: i.material.young,
                            poisson: i.material.poisson,
                            aspect_ratio: i.aspect_ratio,
                            volume_fraction: i.volume_fraction,
                            orientations: match &i.orientations {
                                OrientationSet::Cube26 => FileOrientations::Keyword("cube26".into()),
                                OrientationSet::Axes(a) => FileOrientations::Axes(a.clone()),
                            },
                            model: None,
                            friction_angle: None,
                            failure_stress: None,
                            dilatancy_angle: None,
                        }
                        .with_law(FileLaw::from_model(&i.material.model)),
                    )
                })
                .collect(),
            loading: Some(FileLoading {
                segment: s
                    .program
                    .segments
                    .iter()
                    .map(|seg| Spanned::new(nowhere.clone(), FileSegment::from_segment(seg)))
                    .collect(),
            }),
            solver: Some(Spanned::new(
                nowhere.clone(),
                FileSolver {
                    scheme: Some(match s.scheme {
                        Scheme::MoriTanaka => SchemeName::MoriTanaka,
                        Scheme::Dilute => SchemeName::Dilute,
                    }),
                    jacobian: Some(match s.settings.jacobian {
                        JacobianKind::Analytic => JacobianName::Analytic,
                        JacobianKind::FiniteDifference => JacobianName::FiniteDifference,
                    }),
                    newton_tolerance: set(s.settings.newton_tolerance, defaults.newton_tolerance),
                    yield_tolerance: set(s.settings.yield_tolerance, defaults.yield_tolerance),
                    stress_tolerance: set(s.settings.stress_tolerance, defaults.stress_tolerance),
                    max_newton_iterations: set_n(
                        s.settings.max_newton_iterations,
                        defaults.max_newton_iterations,
                    ),
                    max_active_set_iterations: set_n(
                        s.settings.max_active_set_iterations,
                        defaults.max_active_set_iterations,
                    ),
                    max_mixed_iterations: set_n(
                        s.settings.max_mixed_iterations,
                        defaults.max_mixed_iterations,
                    ),
                    max_subdivisions: set_n(s.settings.max_subdivisions, defaults.max_subdivisions),
                },
            )),
            output: Some(FileOutput {
                directory: s.output.directory.clone(),
                per_phase: s.output.per_phase,
                plot_data: s.output.plot_data,
            }),
        }
    }
}

impl FileSegment {
    fn build(self, text: &str, span: Range<usize>) -> Result<Segment> {
        if self.increments == 0 {
            return Err(at(text, span, "increments must be at least 1"));
        }
        // components not listed are held at zero stress
        let mut controls = [Control::Stress(0.0); 6];
        let mut seen = [false; 6];
        for (table, strain) in [(&self.strain, true), (&self.stress, false)] {
            for (key, &value) in table {
                let i = COMPONENT_KEYS.iter().position(|k| k == key).ok_or_else(|| {
                    at(
                        text,
                        span.clone(),
                        format!("unknown component `{key}` (expected one of 11, 22, 33, 23, 13, 12)"),
                    )
                })?;
                if seen[i] {
                    return Err(at(
                        text,
                        span.clone(),
                        format!("component {key} is both strain- and stress-controlled"),
                    ));
                }
                if !value.is_finite() {
                    return Err(at(text, span.clone(), format!("component {key} is not finite")));
                }
                seen[i] = true;
                controls[i] = if strain {
                    Control::Strain(value)
                } else {
                    Control::Stress(value)
                };
            }
        }
        Ok(Segment {
            controls,
            increments: self.increments,
        })
    }

    fn from_segment(seg: &Segment) -> Self {
        let mut strain = BTreeMap::new();
        let mut stress = BTreeMap::new();
        for (key, c) in COMPONENT_KEYS.iter().zip(&seg.controls) {
            match *c {
                Control::Strain(v) => strain.insert(key.to_string(), v),
                Control::Stress(v) => stress.insert(key.to_string(), v),
            };
        }
        FileSegment {
            increments: seg.increments,
            strain,
            stress,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const DEFAULT_TEXT: &str = r#"
[matrix]
young = 100.0
poisson = 0.25

[[inclusions]]
id = "grain"
young = 1000.0
poisson = 0.25
aspect_ratio = 0.35
volume_fraction = 0.143
orientations = "cube26"
model = "drucker_prager"
friction_angle = 0.0
failure_stress = 0.12

[[loading.segment]]
increments = 100
strain = { 33 = -0.001 }

[[loading.segment]]
increments = 50
strain = { 33 = -0.0005 }
"#;

    #[test]
    fn text_matches_built_in_default() {
        let parsed = Scenario::parse(DEFAULT_TEXT).unwrap();
        assert_eq!(parsed, Scenario::default_scenario());
    }

    #[test]
    fn default_values() {
        let s = Scenario::default_scenario();
        assert_eq!((s.matrix.young, s.matrix.poisson), (100.0, 0.25));
        let inc = &s.inclusions[0];
        assert_eq!((inc.material.young, inc.material.poisson), (1000.0, 0.25));
        let dp = inc.material.model.drucker_prager().unwrap();
        assert_eq!((dp.friction_angle(), dp.failure_stress()), (0.0, 0.12));
        assert_eq!((inc.aspect_ratio, inc.volume_fraction), (0.35, 0.143));
        let phases = s.phases().unwrap();
        assert_eq!(phases.len(), 27);
        let total: f64 = phases.iter().map(|p| p.volume_fraction).sum();
        assert!((total - 1.0).abs() < 1e-14);
        assert_eq!(s.program.total_increments(), 150);
    }

    #[test]
    fn single_phase_scenario() {
        let s = Scenario::parse("[matrix]\nyoung = 10.0\npoisson = 0.2\nfailure_stress = 1.0\n").unwrap();
        assert!(s.inclusions.is_empty());
        assert_eq!(s.phases().unwrap().len(), 1);
        assert!(s.matrix.model.is_plastic());
    }

    #[test]
    fn fraction_sum_rejected() {
        let text = DEFAULT_TEXT.replace("poisson = 0.25\n\n[[inclusions]]", "poisson = 0.25\nvolume_fraction = 0.907\n\n[[inclusions]]");
        assert!(matches!(Scenario::parse(&text), Err(Error::FractionSum(t)) if (t - 1.05).abs() < 1e-12));
        let ok = DEFAULT_TEXT.replace("poisson = 0.25\n\n[[inclusions]]", "poisson = 0.25\nvolume_fraction = 0.857\n\n[[inclusions]]");
        assert!(Scenario::parse(&ok).is_ok());
    }

    fn parse_error_line(text: &str) -> Option<usize> {
        match Scenario::parse(text) {
            Err(Error::Parse { line, .. }) => line,
            other => panic!("expected a parse error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_key_reports_line() {
        let text = DEFAULT_TEXT.replace("aspect_ratio = 0.35", "aspect_ratio = 0.35\nshape = 1");
        assert_eq!(parse_error_line(&text), Some(11));
    }

    #[test]
    fn malformed_number_reports_line() {
        let text = DEFAULT_TEXT.replace("young = 100.0", "young = 1o0.0");
        assert_eq!(parse_error_line(&text), Some(3));
    }

    #[test]
    fn negative_modulus_rejected() {
        let text = DEFAULT_TEXT.replace("young = 1000.0", "young = -1000.0");
        assert_eq!(parse_error_line(&text), Some(6));
    }

    #[test]
    fn bad_components_rejected() {
        let text = DEFAULT_TEXT.replace("strain = { 33 = -0.001 }", "strain = { 34 = -0.001 }");
        assert_eq!(parse_error_line(&text), Some(17));
        let text = DEFAULT_TEXT.replace(
            "strain = { 33 = -0.001 }",
            "strain = { 33 = -0.001 }\nstress = { 33 = 0.0 }",
        );
        assert!(Scenario::parse(&text).is_err());
        let text = DEFAULT_TEXT.replace("increments = 100", "increments = 0");
        assert!(Scenario::parse(&text).is_err());
    }

    #[test]
    fn bad_orientations_rejected() {
        let text = DEFAULT_TEXT.replace("\"cube26\"", "\"cube27\"");
        assert!(Scenario::parse(&text).is_err());
        let text = DEFAULT_TEXT.replace("\"cube26\"", "[[0.0, 0.0, 0.0]]");
        assert!(Scenario::parse(&text).is_err());
        let text = DEFAULT_TEXT.replace("\"cube26\"", "[[0.0, 0.0, 2.0], [1.0, 0.0, 0.0]]");
        let s = Scenario::parse(&text).unwrap();
        assert_eq!(s.phases().unwrap().len(), 3);
    }

    #[test]
    fn elastic_material_with_plastic_keys_rejected() {
        let text = DEFAULT_TEXT.replace("model = \"drucker_prager\"", "model = \"elastic\"");
        assert!(Scenario::parse(&text).is_err());
    }

    fn arb_model() -> impl Strategy<Value = PlasticModel> {
        prop_oneof![
            Just(PlasticModel::Elastic),
            (0.0f64..1.5, 1e-3f64..1e3, 0.0f64..1.5).prop_map(|(phi, s0, psi)| {
                PlasticModel::DruckerPrager(DruckerPrager::non_associated(phi, s0, psi).unwrap())
            }),
        ]
    }

    fn arb_material() -> impl Strategy<Value = MaterialSpec> {
        (1e-2f64..1e5, -0.99f64..0.49, arb_model()).prop_map(|(young, poisson, model)| MaterialSpec {
            young,
            poisson,
            model,
        })
    }

    fn arb_control() -> impl Strategy<Value = Control> {
        prop_oneof![
            (-1e-2f64..1e-2).prop_map(Control::Strain),
            (-1e2f64..1e2).prop_map(Control::Stress),
        ]
    }

    fn arb_scenario() -> impl Strategy<Value = Scenario> {
        let family = (
            "[a-z]{1,8}",
            arb_material(),
            0.05f64..20.0,
            0.001f64..0.3,
            prop_oneof![
                Just(OrientationSet::Cube26),
                prop::collection::vec(
                    prop::array::uniform3(-1.0f64..1.0).prop_filter("nonzero", |a| {
                        a.iter().map(|x| x * x).sum::<f64>() > 1e-2
                    }),
                    1..4
                )
                .prop_map(OrientationSet::Axes),
            ],
        )
            .prop_map(|(id, material, aspect_ratio, volume_fraction, orientations)| InclusionFamily {
                id,
                material,
                aspect_ratio,
                volume_fraction,
                orientations,
            });
        let segment = (prop::array::uniform6(arb_control()), 1usize..500)
            .prop_map(|(controls, increments)| Segment { controls, increments });
        (
            arb_material(),
            prop::collection::vec(family, 0..3),
            prop::bool::ANY,
            prop::collection::vec(segment, 1..4),
            prop::bool::ANY,
            1e-14f64..1e-6,
            (1usize..100, prop::bool::ANY, prop::bool::ANY),
        )
            .prop_map(
                |(matrix, inclusions, dilute, segments, fd, tol, (iters, per_phase, plot_data))| {
                    let settings = SolverSettings {
                        newton_tolerance: tol,
                        max_newton_iterations: iters,
                        jacobian: if fd {
                            JacobianKind::FiniteDifference
                        } else {
                            JacobianKind::Analytic
                        },
                        ..SolverSettings::default()
                    };
                    Scenario {
                        matrix,
                        inclusions,
                        scheme: if dilute { Scheme::Dilute } else { Scheme::MoriTanaka },
                        program: LoadProgram { segments },
                        settings,
                        output: OutputOptions {
                            directory: per_phase.then(|| PathBuf::from("results/run")),
                            per_phase,
                            plot_data,
                        },
                    }
                },
            )
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn round_trip(s in arb_scenario()) {
            let text = s.to_toml();
            let back = Scenario::parse(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
            prop_assert_eq!(back, s);
        }
    }
}
