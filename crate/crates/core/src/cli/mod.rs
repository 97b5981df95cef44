//! Experiment harness: builds the function for a `(eps, scheme)` pair,
//! certifies each level, cross-checks polynomial levels with the minimax
//! solver and writes the report.

pub mod config;
pub mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::Path;

use clap::Parser;
use rayon::prelude::*;

use crate::certifier::{self, AlternationCertificate};
use crate::error::{Error, Result};
use crate::function::LethargyFunction;
use crate::minimax::{self, MinimaxResult};

pub use config::{Args, ExperimentConfig, Format};
pub use report::{Report, ReportRow};

pub const EXIT_OK: u8 = 0;
pub const EXIT_CONFIG: u8 = 1;
pub const EXIT_VERIFICATION: u8 = 2;
pub const EXIT_IO: u8 = 3;

pub struct Experiment {
    pub function: LethargyFunction,
    /// Per level, in level order; `None` where the search failed.
    pub certificates: Vec<Option<AlternationCertificate>>,
    pub solver: Vec<Option<MinimaxResult>>,
    pub report: Report,
}

impl Experiment {
    pub fn found_certificates(&self) -> Vec<AlternationCertificate> {
        self.certificates.iter().flatten().cloned().collect()
    }
}

/// Runs the experiment. Errors are configuration problems or an envelope
/// whose containment cannot be verified; per-level certification failures
/// are recorded in the report instead.
pub fn run(config: &ExperimentConfig) -> Result<Experiment> {
    config.validate()?;
    let eps = config.eps.materialize(config.n_hi)?;
    let function = LethargyFunction::build(
        eps,
        config.scheme.clone(),
        config.interval,
        config.envelope,
        config.verify_grid,
    )?;
    let levels: Vec<usize> = (config.n_lo..=config.n_hi).collect();

    let searched: Vec<Result<AlternationCertificate>> =
        levels.par_iter().map(|&n| certifier::search(&function, n)).collect();

    let polynomial = config.scheme.is_polynomial();
    let mut grid_points = None;
    let solver: Vec<Option<MinimaxResult>> = if polynomial {
        let mut grid = config.interval.uniform(config.grid);
        grid.extend(searched.iter().flatten().flat_map(|c| c.points.iter().copied()));
        grid.sort_by(f64::total_cmp);
        grid.dedup();
        grid_points = Some(grid.len());
        let values: Vec<f64> = grid.par_iter().map(|&t| function.value(t)).collect();
        levels
            .par_iter()
            .map(|&n| minimax::remez_values(&values, n, config.interval, &grid, config.tol))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .map(Some)
            .collect()
    } else {
        vec![None; levels.len()]
    };

    let mut rows = Vec::with_capacity(levels.len());
    for ((&n, found), solved) in levels.iter().zip(&searched).zip(&solver) {
        let eps_n = function.eps()[n];
        let m_n = config.scheme.phi(n)?;
        let floor = found.as_ref().ok().map(|c| c.floor);
        rows.push(ReportRow {
            n,
            m_n,
            eps_n,
            floor,
            floor_root: floor.filter(|_| n >= 1).map(|b| b.powf(1.0 / n as f64)),
            minimax_error: solved.as_ref().map(|r| r.error),
            bracket_lower: solved.as_ref().map(|r| r.lower_bracket),
            converged: solved.as_ref().map(|r| r.converged),
            verdict_floor: floor.is_some_and(|b| b > eps_n),
            verdict_grid: solved.as_ref().map(|r| r.lower_bracket >= eps_n),
            consistent: match (floor, solved) {
                (Some(b), Some(r)) => Some(b <= r.error + report::CONSISTENCY_SLACK),
                _ => None,
            },
            failure: found.as_ref().err().map(|e| e.to_string()),
        });
    }

    let min_floor_root_from_5 = rows
        .iter()
        .filter(|r| r.n >= report::RATE_FROM)
        .filter_map(|r| r.floor_root)
        .reduce(f64::min);
    let all_pass = rows.iter().all(ReportRow::passes);
    let report = Report {
        eps: config.eps_label.clone(),
        scheme: config.scheme_label.clone(),
        interval: [config.interval.a(), config.interval.b()],
        envelope: config.envelope,
        containment: *function.envelope().record(),
        solver_grid_points: grid_points,
        rows,
        min_floor_root_from_5,
        all_pass,
    };
    Ok(Experiment {
        function,
        certificates: searched.into_iter().map(|r| r.ok()).collect(),
        solver,
        report,
    })
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|source| Error::Io { path: path.to_owned(), source })
}

/// Writes the report and the requested dumps into `config.out`.
pub fn write_outputs(config: &ExperimentConfig, experiment: &Experiment) -> Result<()> {
    let Some(dir) = &config.out else {
        return Ok(());
    };
    std::fs::create_dir_all(dir).map_err(|source| Error::Io { path: dir.clone(), source })?;
    write_file(&dir.join("report.csv"), &experiment.report.to_csv())?;
    write_file(&dir.join("report.json"), &experiment.report.to_json())?;
    let certificates = experiment.found_certificates();
    if let Some(count) = config.emit_samples {
        let rows = report::samples(&experiment.function, &certificates, count);
        write_file(&dir.join("samples.csv"), &report::samples_csv(&rows))?;
    }
    if config.emit_certs {
        let mut json = serde_json::to_string_pretty(&certificates)?;
        json.push('\n');
        write_file(&dir.join("certificates.json"), &json)?;
    }
    if let Some(count) = config.emit_envelope {
        let envelope = experiment.function.envelope();
        let upper = (envelope.base().last_knot() as f64).max(1.0);
        write_file(
            &dir.join("envelope_p.csv"),
            &report::envelope_csv("p", upper, count, |u| envelope.base().eval(u)),
        )?;
        write_file(&dir.join("envelope_e.csv"), &report::envelope_csv("e", upper, count, |u| envelope.eval(u)))?;
    }
    Ok(())
}

fn exit_code(error: &Error) -> u8 {
    match error {
        Error::Io { .. } => EXIT_IO,
        Error::Containment { .. } | Error::SearchFailed { .. } | Error::SingularSystem | Error::Solver(_) => {
            EXIT_VERIFICATION
        }
        _ => EXIT_CONFIG,
    }
}

/// Full command-line entry point; returns the process exit status.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(args) => args,
        Err(e) => {
            // --help and --version also arrive here
            if e.use_stderr() {
                let _ = write!(stderr, "{e}");
                return EXIT_CONFIG;
            }
            let _ = write!(stdout, "{e}");
            return EXIT_OK;
        }
    };
    let config = match ExperimentConfig::from_args(&args) {
        Ok(config) => config,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_CONFIG;
        }
    };
    let experiment = match run(&config) {
        Ok(experiment) => experiment,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return exit_code(&e);
        }
    };
    let rendered = match config.format {
        Format::Csv => experiment.report.to_csv(),
        Format::Json => experiment.report.to_json(),
    };
    if stdout.write_all(rendered.as_bytes()).is_err() {
        return EXIT_IO;
    }
    if let Err(e) = write_outputs(&config, &experiment) {
        let _ = writeln!(stderr, "error: {e}");
        return exit_code(&e);
    }
    if experiment.report.all_pass {
        EXIT_OK
    } else {
        let _ = writeln!(stderr, "verification failed at levels {:?}", experiment.report.failing_levels());
        for row in experiment.report.rows.iter().filter(|r| r.failure.is_some()) {
            let _ = writeln!(stderr, "  level {}: {}", row.n, row.failure.as_deref().unwrap_or(""));
        }
        EXIT_VERIFICATION
    }
}
