//! Named, reproducible experiments over the germlab primitives, with
//! JSON reports, CSV tables and SVG plots.

pub mod config;
pub mod error;
pub mod experiments;
pub mod plot;
pub mod report;
pub mod zoo;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::Value;

pub use config::ExperimentConfig;
pub use error::{LabError, Result};
pub use experiments::EXPERIMENTS;
pub use report::{Assertion, ExperimentReport, Source};

use plot::Plot;

/// Shortest round-trip decimal form; the only float formatting used in CSV output.
pub fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

/// Collects assertions, measurements and output files for one experiment run.
pub struct Run {
    dir: Option<PathBuf>,
    assertions: Vec<Assertion>,
    measurements: BTreeMap<String, Value>,
    outputs: Vec<String>,
}

impl Run {
    fn new(dir: Option<PathBuf>) -> Result<Self> {
        if let Some(d) = &dir {
            fs::create_dir_all(d)?;
        }
        Ok(Run { dir, assertions: Vec::new(), measurements: BTreeMap::new(), outputs: Vec::new() })
    }

    /// Output directory of this run, if files are being written.
    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    #[allow(clippy::too_many_arguments)]
    pub fn check(
        &mut self,
        id: impl Into<String>,
        description: impl Into<String>,
        measured: impl Serialize,
        expected: impl Serialize,
        source: Source,
        anchor: impl Into<String>,
        pass: bool,
    ) {
        self.assertions.push(Assertion {
            id: id.into(),
            description: description.into(),
            measured: to_value(measured),
            expected: to_value(expected),
            source,
            anchor: anchor.into(),
            pass,
        });
    }

    pub fn measure(&mut self, key: impl Into<String>, value: impl Serialize) {
        self.measurements.insert(key.into(), to_value(value));
    }

    /// Writes a CSV table; a no-op without an output directory.
    pub fn csv<I, R>(&mut self, file: &str, header: &[&str], rows: I) -> Result<()>
    where
        I: IntoIterator<Item = R>,
        R: IntoIterator<Item = String>,
    {
        let Some(dir) = &self.dir else { return Ok(()) };
        let mut w = csv::Writer::from_path(dir.join(file))?;
        w.write_record(header)?;
        for row in rows {
            w.write_record(row)?;
        }
        w.flush()?;
        self.outputs.push(file.to_string());
        Ok(())
    }

    /// Writes a direction cloud as CSV; a no-op without an output directory.
    pub fn cloud_csv(&mut self, file: &str, cloud: &germlab::SphericalCloud) -> Result<()> {
        let Some(dir) = &self.dir else { return Ok(()) };
        cloud.write_csv(fs::File::create(dir.join(file))?)?;
        self.outputs.push(file.to_string());
        Ok(())
    }

    pub fn plot(&mut self, file: &str, plot: &Plot) -> Result<()> {
        let Some(dir) = &self.dir else { return Ok(()) };
        plot::emit_plot(plot, &dir.join(file))?;
        self.outputs.push(file.to_string());
        Ok(())
    }
}

fn to_value(v: impl Serialize) -> Value {
    serde_json::to_value(v).unwrap_or_else(|e| Value::String(format!("unserializable: {e}")))
}

/// Output directory of `name` under the configured root.
pub fn experiment_dir(config: &ExperimentConfig, name: &str) -> Option<PathBuf> {
    config.out_dir.as_ref().map(|d| d.join(name))
}

/// Runs a named experiment. Errors inside the experiment become a failed
/// report; only an unknown name or an unwritable output directory is an `Err`.
pub fn run_experiment(name: &str, config: &ExperimentConfig) -> Result<ExperimentReport> {
    let body = experiments::lookup(name).ok_or_else(|| LabError::UnknownExperiment(name.to_string()))?;
    let mut config = config.clone();
    config.name = name.to_string();
    let dir = experiment_dir(&config, name);
    let start = Instant::now();
    let mut run = Run::new(dir.clone())?;
    let error = match body(&mut run, &config) {
        Ok(resolved) => {
            config.params = resolved;
            None
        }
        Err(e) => Some(e.to_string()),
    };
    let pass = error.is_none() && !run.assertions.is_empty() && run.assertions.iter().all(|a| a.pass);
    let mut outputs = run.outputs;
    if dir.is_some() {
        outputs.push("report.json".into());
    }
    let report = ExperimentReport {
        name: name.to_string(),
        pass,
        runtime_seconds: start.elapsed().as_secs_f64(),
        config,
        assertions: run.assertions,
        measurements: run.measurements,
        outputs,
        error,
    };
    if let Some(d) = dir {
        fs::write(d.join("report.json"), serde_json::to_string_pretty(&report)?)?;
    }
    Ok(report)
}
