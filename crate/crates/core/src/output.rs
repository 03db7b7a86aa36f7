//! Result tables.
//!
//! All numbers are written with 17 significant digits so that a table
//! reproduces the computed doubles exactly. Files are written to a temporary
//! sibling and renamed into place.

use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::mean_field::MeanFieldOperators;
use crate::scenario::COMPONENT_KEYS;
use crate::solver::RevState;
use crate::tensor::Sym2;

/// One output record: the macroscopic and per-phase state after an
/// increment (the first row is the unloaded initial state).
#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub step: usize,
    pub macro_strain: Sym2,
    pub macro_stress: Sym2,
    pub macro_plastic_strain: Sym2,
    /// Volume average of the phase plastic strains, `Σ f_α ε^p_α`.
    pub mean_plastic_strain: Sym2,
    pub phase_strain: Vec<Sym2>,
    pub phase_plastic_strain: Vec<Sym2>,
    pub phase_stress: Vec<Sym2>,
    pub active: Vec<bool>,
    pub multipliers: Vec<f64>,
}

impl ResultRow {
    pub fn from_state(state: &RevState, ops: &MeanFieldOperators) -> Self {
        let plastic = state.plastic_strains();
        ResultRow {
            step: state.step,
            macro_strain: state.macro_strain,
            macro_stress: state.macro_stress,
            macro_plastic_strain: state.macro_plastic_strain,
            mean_plastic_strain: ops.average(&plastic),
            phase_strain: state.phases.iter().map(|p| p.strain).collect(),
            phase_plastic_strain: plastic,
            phase_stress: state.phases.iter().map(|p| p.stress).collect(),
            active: state.active.flags().to_vec(),
            multipliers: state.multipliers.clone(),
        }
    }

    pub fn active_count(&self) -> usize {
        self.active.iter().filter(|&&a| a).count()
    }
}

pub fn rows_from_history(history: &[RevState], ops: &MeanFieldOperators) -> Vec<ResultRow> {
    history.iter().map(|s| ResultRow::from_state(s, ops)).collect()
}

/// Formats a double with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn tensor_headers(prefix: &str) -> impl Iterator<Item = String> + '_ {
    COMPONENT_KEYS.iter().map(move |k| format!("{prefix}_{k}"))
}

fn tensor_fields(t: &Sym2) -> impl Iterator<Item = String> {
    t.components().into_iter().map(fmt_f64)
}

/// File name, column names and row extractor of a plot table.
type PlotSpec<'a> = (&'a str, [&'a str; 2], &'a dyn Fn(&ResultRow) -> [f64; 2]);

/// Paths of the files produced by [`write_results`].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct WrittenFiles {
    pub macro_table: PathBuf,
    pub phase_table: Option<PathBuf>,
    pub plots: Vec<PathBuf>,
}

/// Writes `macro.csv`, optionally `phases.csv` and the two-column plot
/// tables into `dir`, which is created if needed.
pub fn write_results(
    dir: &Path,
    rows: &[ResultRow],
    phase_ids: &[String],
    per_phase: bool,
    plot_data: bool,
) -> Result<WrittenFiles> {
    std::fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    let mut files = WrittenFiles {
        macro_table: dir.join("macro.csv"),
        ..Default::default()
    };

    let mut header = vec!["step".to_string()];
    header.extend(tensor_headers("strain"));
    header.extend(tensor_headers("stress"));
    header.extend(tensor_headers("plastic_strain"));
    header.extend(tensor_headers("mean_plastic_strain"));
    header.push("active_phases".into());
    let records = rows.iter().map(|r| {
        let mut rec = vec![r.step.to_string()];
        rec.extend(tensor_fields(&r.macro_strain));
        rec.extend(tensor_fields(&r.macro_stress));
        rec.extend(tensor_fields(&r.macro_plastic_strain));
        rec.extend(tensor_fields(&r.mean_plastic_strain));
        rec.push(r.active_count().to_string());
        rec
    });
    write_table(&files.macro_table, &header, records)?;

    if per_phase {
        let path = dir.join("phases.csv");
        let mut header: Vec<String> = ["step", "phase", "id", "active", "multiplier"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        header.extend(tensor_headers("strain"));
        header.extend(tensor_headers("plastic_strain"));
        header.extend(tensor_headers("stress"));
        let records = rows.iter().flat_map(|r| {
            (0..r.phase_strain.len()).map(move |a| {
                let mut rec = vec![
                    r.step.to_string(),
                    a.to_string(),
                    phase_ids.get(a).cloned().unwrap_or_default(),
                    u8::from(r.active[a]).to_string(),
                    fmt_f64(r.multipliers[a]),
                ];
                rec.extend(tensor_fields(&r.phase_strain[a]));
                rec.extend(tensor_fields(&r.phase_plastic_strain[a]));
                rec.extend(tensor_fields(&r.phase_stress[a]));
                rec
            })
        });
        write_table(&path, &header, records)?;
        files.phase_table = Some(path);
    }

    if plot_data {
        let abs33 = |r: &ResultRow| r.macro_stress.get(2, 2).abs();
        let plots: [PlotSpec; 3] = [
            ("plot_axial.csv", ["strain_33", "abs_stress_33"], &|r| [r.macro_strain.get(2, 2), abs33(r)]),
            ("plot_lateral.csv", ["strain_11", "abs_stress_33"], &|r| [r.macro_strain.get(0, 0), abs33(r)]),
            (
                "plot_plastic.csv",
                ["plastic_strain_33", "mean_plastic_strain_33"],
                &|r| [r.macro_plastic_strain.get(2, 2), r.mean_plastic_strain.get(2, 2)],
            ),
        ];
        for (name, cols, f) in plots {
            let path = dir.join(name);
            let header: Vec<String> = cols.iter().map(|s| s.to_string()).collect();
            write_table(&path, &header, rows.iter().map(|r| f(r).map(fmt_f64).to_vec()))?;
            files.plots.push(path);
        }
    }
    Ok(files)
}

fn io_error(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write_table(
    path: &Path,
    header: &[String],
    records: impl Iterator<Item = Vec<String>>,
) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| io_error(dir, e))?;
    {
        let mut w = csv::Writer::from_writer(std::io::BufWriter::new(tmp.as_file()));
        w.write_record(header)?;
        for rec in records {
            w.write_record(&rec)?;
        }
        let mut inner = w.into_inner().map_err(|e| io_error(path, e.into_error()))?;
        inner.flush().map_err(|e| io_error(path, e))?;
    }
    tmp.persist(path).map_err(|e| io_error(path, e.error))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mean_field::PhaseSpec;
    use crate::solver::{Control, LoadProgram, Segment, Solver, SolverSettings};

    fn elastic_rows() -> (Vec<ResultRow>, MeanFieldOperators) {
        let phases = vec![PhaseSpec::matrix("m", 1.0, 100.0, 0.25)];
        let ops = MeanFieldOperators::assemble(&phases, Default::default()).unwrap();
        let solver = Solver::new(&ops, &phases, SolverSettings::default());
        let mut controls = [Control::Strain(0.0); 6];
        controls[2] = Control::Strain(-1e-3);
        controls[5] = Control::Strain(2e-4);
        let program = LoadProgram {
            segments: vec![Segment {
                controls,
                increments: 1,
            }],
        };
        let history = solver.drive(&program).unwrap();
        let rows = rows_from_history(&history, &ops);
        (rows, ops)
    }

    fn read(path: &Path) -> Vec<csv::StringRecord> {
        let mut r = csv::Reader::from_path(path).unwrap();
        r.records().map(|r| r.unwrap()).collect()
    }

    #[test]
    fn one_step_elastic_table() {
        let (rows, ops) = elastic_rows();
        let dir = tempfile::tempdir().unwrap();
        let files = write_results(dir.path(), &rows, &["m".into()], true, true).unwrap();
        let records = read(&files.macro_table);
        assert_eq!(records.len(), 2);
        let strain = Sym2::from_components(std::array::from_fn(|i| records[1][1 + i].parse().unwrap()));
        let stress: [f64; 6] = std::array::from_fn(|i| records[1][7 + i].parse().unwrap());
        let expected = ops.effective_stiffness().apply(&strain).components();
        for i in 0..6 {
            assert!((stress[i] - expected[i]).abs() <= 1e-15 * expected[i].abs().max(1e-3));
        }
        assert_eq!(read(files.phase_table.as_ref().unwrap()).len(), 2);
        assert_eq!(files.plots.len(), 3);
    }

    #[test]
    fn values_round_trip_exactly() {
        let (rows, _) = elastic_rows();
        let dir = tempfile::tempdir().unwrap();
        let files = write_results(dir.path(), &rows, &[], false, false).unwrap();
        let records = read(&files.macro_table);
        for i in 0..6 {
            let v: f64 = records[1][7 + i].parse().unwrap();
            assert_eq!(v, rows[1].macro_stress.components()[i]);
        }
        assert!(files.phase_table.is_none() && files.plots.is_empty());
    }

    #[test]
    fn header_order_is_fixed() {
        let (rows, _) = elastic_rows();
        let dir = tempfile::tempdir().unwrap();
        let files = write_results(dir.path(), &rows, &[], false, false).unwrap();
        let header = csv::Reader::from_path(&files.macro_table).unwrap().headers().unwrap().clone();
        assert_eq!(&header[0], "step");
        assert_eq!(&header[1], "strain_11");
        assert_eq!(&header[9], "stress_33");
        assert_eq!(&header[header.len() - 1], "active_phases");
        assert_eq!(header.len(), 26);
    }

    #[test]
    fn unwritable_directory_is_an_io_error() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        std::fs::write(&blocker, "x").unwrap();
        let (rows, _) = elastic_rows();
        let err = write_results(&blocker.join("sub"), &rows, &[], false, false).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
        assert_eq!(err.exit_code(), 4);
    }
}
