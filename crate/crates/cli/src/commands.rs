//! The `run`, `fit` and `summarize` commands.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};
use std::time::Instant;

use ndarray::Array2;

use abc_psvm::psvm::{fit_psvm, read_map, write_map, PsvmConfig};

use crate::config::{render, Params, RawConfig};
use crate::error::{CliError, CliResult};
use crate::experiments::{psvm_from_params, Experiment};
use crate::output::{fmt_f64, write_run, write_text, Manifest, Table};

pub const GIT_DESCRIBE: &str = env!("ABC_PSVM_GIT_DESCRIBE");

fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(format!("reading {}", path.display()), e))
}

/// What `run` did, for callers that want more than the files.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub output_dir: PathBuf,
    pub manifest: Manifest,
}

/// Parses the config at `config_path`, runs the experiment it names and
/// writes the run directory. `seed` overrides the config's seed.
pub fn cmd_run(config_path: &Path, seed: Option<u64>) -> CliResult<RunSummary> {
    let mut raw = RawConfig::parse(&read_text(config_path)?)?;
    if let Some(seed) = seed {
        raw.set("seed", seed.to_string());
    }
    let params = Params::new(raw);
    let name: String = params.require("experiment")?;
    let seed: u64 = params.require("seed")?;
    let output_dir: String = params.require("output_dir")?;
    let experiment = Experiment::from_params(&name, &params)?;
    let resolved = params.finish()?;

    let started = Instant::now();
    let output = experiment.run(seed)?;
    let mut manifest = Manifest {
        experiment: name,
        seed,
        config_text: render(&resolved),
        config: resolved,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        git_describe: GIT_DESCRIBE.to_string(),
        threads: rayon::current_num_threads(),
        wall_clock_seconds: started.elapsed().as_secs_f64(),
        files: Vec::new(),
    };
    let dir = PathBuf::from(output_dir);
    write_run(&dir, &output, &mut manifest)?;
    Ok(RunSummary { output_dir: dir, manifest })
}

/// A numeric CSV: header plus rows of floats.
struct NumericCsv {
    header: Vec<String>,
    raw_rows: Vec<Vec<String>>,
    values: Array2<f64>,
}

fn read_numeric_csv(path: &Path) -> CliResult<NumericCsv> {
    let file = File::open(path).map_err(|e| CliError::io(format!("opening {}", path.display()), e))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(BufReader::new(file));
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| CliError::Schema(format!("{}: {e}", path.display())))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let mut raw_rows = Vec::new();
    let mut flat = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::Schema(format!("{}: {e}", path.display())))?;
        if record.len() != header.len() {
            return Err(CliError::Schema(format!(
                "{}: row {} has {} columns, header has {}",
                path.display(),
                i + 1,
                record.len(),
                header.len()
            )));
        }
        let mut row = Vec::with_capacity(record.len());
        for field in record.iter() {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| CliError::Schema(format!("{}: row {}: '{field}' is not a number", path.display(), i + 1)))?;
            flat.push(v);
            row.push(field.trim().to_string());
        }
        raw_rows.push(row);
    }
    let values = Array2::from_shape_vec((raw_rows.len(), header.len()), flat).expect("rectangular by construction");
    Ok(NumericCsv { header, raw_rows, values })
}

/// Checks that `columns` are exactly `x_1..x_p`.
fn check_data_columns(path: &Path, columns: &[String]) -> CliResult<()> {
    for (j, c) in columns.iter().enumerate() {
        if *c != format!("x_{}", j + 1) {
            return Err(CliError::Schema(format!("{}: expected column 'x_{}', found '{c}'", path.display(), j + 1)));
        }
    }
    if columns.is_empty() {
        return Err(CliError::Schema(format!("{}: no data columns", path.display())));
    }
    Ok(())
}

/// PSVM settings for `fit`: the `[psvm]` section of an optional config file.
pub fn fit_config(config_path: Option<&Path>) -> CliResult<PsvmConfig> {
    let raw = match config_path {
        Some(p) => RawConfig::parse(&read_text(p)?)?,
        None => RawConfig::default(),
    };
    let params = Params::new(raw);
    let config = psvm_from_params(&params, &PsvmConfig::default())?;
    params.finish()?;
    Ok(config)
}

/// Fits a kernel PSVM map from a `theta,x_1..x_n` CSV and writes it to `output`.
pub fn cmd_fit(input: &Path, output: &Path, config: &PsvmConfig) -> CliResult<()> {
    let csv = read_numeric_csv(input)?;
    if csv.header.first().map(String::as_str) != Some("theta") {
        return Err(CliError::Schema(format!("{}: first column must be 'theta'", input.display())));
    }
    check_data_columns(input, &csv.header[1..])?;
    let theta: Vec<f64> = csv.values.column(0).to_vec();
    let x = csv.values.slice(ndarray::s![.., 1..]).to_owned();
    let map = fit_psvm(&theta, x.view(), config)?;
    let file = File::create(output).map_err(|e| CliError::io(format!("creating {}", output.display()), e))?;
    write_map(&map, BufWriter::new(file))?;
    Ok(())
}

/// Evaluates a stored map on the rows of an `x_1..x_n` CSV and writes the
/// rows back with `summary_1..summary_d` appended.
pub fn cmd_summarize(map_path: &Path, input: &Path, output: &Path) -> CliResult<()> {
    let file = File::open(map_path).map_err(|e| CliError::io(format!("opening {}", map_path.display()), e))?;
    let map = read_map(BufReader::new(file))?;
    let csv = read_numeric_csv(input)?;
    check_data_columns(input, &csv.header)?;
    if csv.header.len() != map.input_dim() {
        return Err(CliError::Schema(format!(
            "{}: {} data columns, the map expects {}",
            input.display(),
            csv.header.len(),
            map.input_dim()
        )));
    }
    let summaries = map.evaluate_rows(csv.values.view())?;
    let mut header = csv.header.clone();
    header.extend((1..=map.output_dim()).map(|j| format!("summary_{j}")));
    let mut table = Table::new(&header);
    for (row, s) in csv.raw_rows.iter().zip(summaries.rows()) {
        let mut out = row.clone();
        out.extend(s.iter().map(|v| fmt_f64(*v)));
        table.push(out);
    }
    write_text(output, &table.to_csv())
}
