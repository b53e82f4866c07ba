//! Command-line front end: CSV in, JSON/CSV reports out.
//!
//! Exit codes: 0 success, 1 data/model errors, 2 usage errors.

pub mod fixture;
pub mod ingest;
pub mod reports;

use std::fs;
use std::path::{Path, PathBuf};

use archmx::{
    fit_model, run_rejection_study, run_selection_study, select_variables, test_covariate,
    CovariatePanel, Evaluator, FitMethod, KernelConfig, KernelType, ReturnSeries, Scenario,
    SelectionMethod, Shock, SimModel, SplineConfig, StudyConfig,
};
use clap::{Args, Parser, Subcommand, ValueEnum};

use ingest::{ingest_csv, IngestOptions};
use reports::{file_hash, FitReport, InputStamp, SelectionReport, TestReport};

#[derive(Parser)]
#[command(name = "archmx", version, about = "ARCH(p)-m(X) volatility modeling: simulate, fit, test, select")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScenarioArg {
    Test2,
    Test5,
    Select5,
    Select10,
}

impl From<ScenarioArg> for Scenario {
    fn from(s: ScenarioArg) -> Self {
        match s {
            ScenarioArg::Test2 => Scenario::Test2Cov,
            ScenarioArg::Test5 => Scenario::Test5Cov,
            ScenarioArg::Select5 => Scenario::Select5Cov,
            ScenarioArg::Select10 => Scenario::Select10Cov,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ShockArg {
    Normal,
    Laplace,
    StudentT,
    ScaledT,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Kernel,
    Spline,
}

#[derive(Clone, Copy, ValueEnum)]
enum SelectMethodArg {
    By,
    Bonferroni,
}

#[derive(Args, Clone)]
struct DataArgs {
    /// Return series CSV (header row; optional date column + one value column)
    #[arg(long)]
    series: PathBuf,
    /// Covariate panel CSV (header row; optional date column + named columns)
    #[arg(long)]
    covariates: PathBuf,
    /// Name of the date column, if the files carry one
    #[arg(long)]
    date_column: Option<String>,
    /// Comma-separated price columns to convert to log returns on ingest
    #[arg(long, value_delimiter = ',')]
    log_returns: Vec<String>,
    /// Name of the return-series column (default: first non-date column).
    /// When --series and --covariates point at the same file, this column
    /// is excluded from the covariate panel.
    #[arg(long)]
    series_column: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one benchmark dataset and write series + covariate CSVs
    Simulate {
        #[arg(long, value_enum)]
        scenario: ScenarioArg,
        /// Benchmark model number, 1-8
        #[arg(long)]
        model: u8,
        #[arg(long, default_value_t = 0.0)]
        c: f64,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0.5)]
        rho: f64,
        #[arg(long, value_enum, default_value_t = ShockArg::Normal)]
        shock: ShockArg,
        /// Laplace / scaled-t scale parameter
        #[arg(long, default_value_t = 0.5)]
        shock_scale: f64,
        /// Student-t degrees of freedom
        #[arg(long, default_value_t = 7.0)]
        shock_df: f64,
        /// Rescale shocks to unit variance
        #[arg(long)]
        standardize_shocks: bool,
        #[arg(long, default_value_t = 500)]
        burnin: usize,
        #[arg(long)]
        seed: u64,
        /// Two paths: series CSV, covariates CSV
        #[arg(long, num_args = 2)]
        out: Vec<PathBuf>,
    },
    /// Fit the model and write a JSON report
    Fit {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, default_value_t = 1)]
        p: usize,
        #[arg(long, value_enum, default_value_t = MethodArg::Kernel)]
        method: MethodArg,
        /// Kernel bandwidth per covariate (default: rule of thumb)
        #[arg(long, value_delimiter = ',')]
        bandwidth: Vec<f64>,
        /// Interior knots per covariate for the spline method
        #[arg(long, value_delimiter = ',')]
        knots: Vec<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Test whether one covariate enters the variance function
    Test {
        #[command(flatten)]
        data: DataArgs,
        /// 1-based covariate index to test
        #[arg(long)]
        covariate: usize,
        #[arg(long, default_value_t = 1)]
        p: usize,
        /// Window width (odd; default chosen from the sample size)
        #[arg(long)]
        kn: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Test all covariates and select at FDR level q
    Select {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, default_value_t = 1)]
        p: usize,
        #[arg(long, default_value_t = 0.05)]
        q: f64,
        #[arg(long, value_enum, default_value_t = SelectMethodArg::By)]
        method: SelectMethodArg,
        #[arg(long)]
        kn: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Monte Carlo rejection-rate study from a JSON config
    McTest {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Monte Carlo selection-accuracy study from a JSON config
    McSelect {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a synthetic 11-covariate daily price fixture CSV
    Fixture {
        #[arg(long, default_value_t = 600)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Parse and run; returns the process exit code.
pub fn run(args: Vec<String>) -> i32 {
    let mut argv = vec!["archmx".to_string()];
    argv.extend(args);
    // honor a worker cap before any parallel work starts
    if let Ok(threads) = std::env::var("ARCHMX_THREADS") {
        if let Ok(t) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
        }
    }
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            // clap's own exit semantics: help/version are success
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(msg) => {
            eprintln!("error: {msg}");
            1
        }
    }
}

fn shock_from(arg: ShockArg, scale: f64, df: f64) -> Shock {
    match arg {
        ShockArg::Normal => Shock::Normal,
        ShockArg::Laplace => Shock::Laplace { scale },
        ShockArg::StudentT => Shock::StudentT { df },
        ShockArg::ScaledT => Shock::ScaledT { df, scale },
    }
}

struct LoadedData {
    series: ReturnSeries,
    panel: CovariatePanel,
    stamp: InputStamp,
}

fn csv_headers(path: &Path) -> Result<Vec<String>, String> {
    let mut rdr = csv::Reader::from_path(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    Ok(rdr
        .headers()
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect())
}

fn load_data(data: &DataArgs) -> Result<LoadedData, String> {
    let series_headers = csv_headers(&data.series)?;
    let cov_headers = csv_headers(&data.covariates)?;
    for wanted in &data.log_returns {
        if !series_headers.contains(wanted) && !cov_headers.contains(wanted) {
            return Err(format!("missing column '{wanted}'"));
        }
    }
    // the log-return option names columns from either file; each file reads
    // headers first so it only transforms the ones it actually has
    let opts_for = |path: &Path| -> Result<IngestOptions, String> {
        let present = csv_headers(path)?;
        Ok(IngestOptions {
            date_column: data.date_column.clone(),
            log_return_columns: data
                .log_returns
                .iter()
                .filter(|c| present.iter().any(|h| h == *c))
                .cloned()
                .collect(),
        })
    };
    let series_table =
        ingest_csv(&data.series, &opts_for(&data.series)?).map_err(|e| e.to_string())?;
    let cov_table =
        ingest_csv(&data.covariates, &opts_for(&data.covariates)?).map_err(|e| e.to_string())?;
    let value_col = match &data.series_column {
        Some(name) => series_table.column(name).map_err(|e| e.to_string())?.to_vec(),
        None => series_table
            .columns
            .first()
            .ok_or_else(|| "series file has no value column".to_string())?
            .clone(),
    };
    let series = ReturnSeries::new(value_col).map_err(|e| e.to_string())?;
    let panel = match &data.series_column {
        Some(name) if cov_table.names.contains(name) => {
            let keep: Vec<usize> = (0..cov_table.names.len())
                .filter(|&i| &cov_table.names[i] != name)
                .collect();
            CovariatePanel::from_columns(
                keep.iter().map(|&i| cov_table.columns[i].clone()).collect(),
                keep.iter().map(|&i| cov_table.names[i].clone()).collect(),
            )
            .map_err(|e| e.to_string())?
        }
        _ => cov_table.to_panel().map_err(|e| e.to_string())?,
    };
    if series.n() != panel.n() {
        return Err(format!(
            "series length {} does not match covariate length {}",
            series.n(),
            panel.n()
        ));
    }
    let stamp = InputStamp {
        series_file: data.series.display().to_string(),
        series_sha256: file_hash(&data.series).map_err(|e| e.to_string())?,
        covariates_file: data.covariates.display().to_string(),
        covariates_sha256: file_hash(&data.covariates).map_err(|e| e.to_string())?,
        n: series.n(),
        d: panel.d(),
        covariate_names: panel.names().to_vec(),
        dropped_rows: series_table.dropped_rows + cov_table.dropped_rows,
    };
    Ok(LoadedData {
        series,
        panel,
        stamp,
    })
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), String> {
    let json = serde_json::to_string_pretty(value).map_err(|e| e.to_string())?;
    fs::write(path, json + "\n").map_err(|e| e.to_string())
}

fn float_csv(v: f64) -> String {
    // shortest representation that round-trips, so re-ingestion is
    // bit-identical
    format!("{v}")
}

fn dispatch(cmd: Command) -> Result<(), String> {
    match cmd {
        Command::Simulate {
            scenario,
            model,
            c,
            n,
            rho,
            shock,
            shock_scale,
            shock_df,
            standardize_shocks,
            burnin,
            seed,
            out,
        } => {
            let model = SimModel::new(scenario.into(), model, c).map_err(|e| e.to_string())?;
            let shock = shock_from(shock, shock_scale, shock_df);
            let (series, panel) =
                archmx::simulate_dataset(&model, rho, n, burnin, shock, standardize_shocks, seed)
                    .map_err(|e| e.to_string())?;
            let mut s = String::from("date,value\n");
            for (t, v) in series.values().iter().enumerate() {
                s.push_str(&format!("{},{}\n", fixture::fake_date(t), float_csv(*v)));
            }
            fs::write(&out[0], s).map_err(|e| e.to_string())?;
            let mut c = String::from("date");
            for name in panel.names() {
                c.push(',');
                c.push_str(name);
            }
            c.push('\n');
            for t in 0..panel.n() {
                c.push_str(&fixture::fake_date(t));
                for v in panel.row(t) {
                    c.push(',');
                    c.push_str(&float_csv(*v));
                }
                c.push('\n');
            }
            fs::write(&out[1], c).map_err(|e| e.to_string())?;
            Ok(())
        }
        Command::Fit {
            data,
            p,
            method,
            bandwidth,
            knots,
            out,
        } => {
            let loaded = load_data(&data)?;
            let fit_method = build_method(method, &bandwidth, &knots, loaded.panel.d())?;
            let fit = fit_model(&loaded.series, &loaded.panel, p, &fit_method, None)
                .map_err(|e| e.to_string())?;
            let n = fit.residuals.len() as f64;
            let mean = fit.residuals.iter().sum::<f64>() / n;
            let var = fit
                .residuals
                .iter()
                .map(|v| (v - mean) * (v - mean))
                .sum::<f64>()
                / (n - 1.0);
            let (method_name, bandwidths, interior_knots) = match &fit.evaluator {
                Evaluator::Kernel { cfg, .. } => {
                    ("kernel".to_string(), Some(cfg.bandwidths.clone()), None)
                }
                Evaluator::Spline { basis, .. } => (
                    "spline".to_string(),
                    None,
                    Some(
                        basis
                            .knots
                            .iter()
                            .zip(&basis.orders)
                            .map(|(k, o)| k.len() - 2 * o)
                            .collect(),
                    ),
                ),
            };
            write_json(
                &out,
                &FitReport {
                    input: loaded.stamp,
                    p,
                    method: method_name,
                    bandwidths,
                    interior_knots,
                    alpha_hat: fit.alpha_hat.clone(),
                    n_eff: fit.n_eff,
                    residual_mean: mean,
                    residual_variance: var,
                },
            )
        }
        Command::Test {
            data,
            covariate,
            p,
            kn,
            out,
        } => {
            let loaded = load_data(&data)?;
            let result = test_covariate(
                &loaded.series,
                &loaded.panel,
                covariate,
                p,
                &FitMethod::default(),
                kn,
            )
            .map_err(|e| e.to_string())?;
            let name = loaded.panel.names()[covariate - 1].clone();
            write_json(
                &out,
                &TestReport::from_result(loaded.stamp, p, &name, None, &result),
            )
        }
        Command::Select {
            data,
            p,
            q,
            method,
            kn,
            out,
        } => {
            let loaded = load_data(&data)?;
            let sel_method = match method {
                SelectMethodArg::By => SelectionMethod::BenjaminiYekutieli,
                SelectMethodArg::Bonferroni => SelectionMethod::Bonferroni,
            };
            let (sel, tests) = select_variables(
                &loaded.series,
                &loaded.panel,
                p,
                q,
                sel_method,
                &FitMethod::default(),
                kn,
            )
            .map_err(|e| e.to_string())?;
            let names = loaded.panel.names().to_vec();
            write_json(
                &out,
                &SelectionReport::build(loaded.stamp, p, &names, &sel, &tests),
            )
        }
        Command::McTest { config, out } => {
            let cfg: StudyConfig = read_config(&config)?;
            let rows = run_rejection_study(&cfg).map_err(|e| e.to_string())?;
            let mut s = String::from("c,replications,rejections,failures,rate,std_error\n");
            for r in rows {
                s.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    float_csv(r.c),
                    r.replications,
                    r.rejections,
                    r.failures,
                    float_csv(r.rate),
                    float_csv(r.std_error)
                ));
            }
            fs::write(&out, s).map_err(|e| e.to_string())
        }
        Command::McSelect { config, out } => {
            let cfg: StudyConfig = read_config(&config)?;
            let m = run_selection_study(&cfg).map_err(|e| e.to_string())?;
            let mut header = String::from("model,shock,n,replications,failures,cs,is,ce,ie");
            let mut row = format!(
                "{},{},{},{},{},{},{},{},{}",
                cfg.model_id,
                shock_label(&cfg.shock),
                cfg.n,
                m.replications,
                m.failures,
                float_csv(m.mean_correct_selected),
                float_csv(m.mean_incorrect_selected),
                float_csv(m.mean_correct_excluded),
                float_csv(m.mean_incorrect_excluded),
            );
            for (j, f) in m.per_covariate_freq.iter().enumerate() {
                header.push_str(&format!(",freq_{}", j + 1));
                row.push_str(&format!(",{}", float_csv(*f)));
            }
            fs::write(&out, format!("{header}\n{row}\n")).map_err(|e| e.to_string())
        }
        Command::Fixture { n, seed, out } => {
            let csv = fixture::fixture_csv(n, seed).map_err(|e| e.to_string())?;
            fs::write(&out, csv).map_err(|e| e.to_string())
        }
    }
}

fn build_method(
    method: MethodArg,
    bandwidth: &[f64],
    knots: &[usize],
    d: usize,
) -> Result<FitMethod, String> {
    match method {
        MethodArg::Kernel => {
            if bandwidth.is_empty() {
                Ok(FitMethod::Kernel { config: None })
            } else {
                let bw = if bandwidth.len() == 1 {
                    vec![bandwidth[0]; d]
                } else {
                    bandwidth.to_vec()
                };
                Ok(FitMethod::Kernel {
                    config: Some(
                        KernelConfig::new(bw, KernelType::Gaussian).map_err(|e| e.to_string())?,
                    ),
                })
            }
        }
        MethodArg::Spline => {
            let interior = if knots.is_empty() {
                vec![2; d]
            } else if knots.len() == 1 {
                vec![knots[0]; d]
            } else {
                knots.to_vec()
            };
            Ok(FitMethod::Spline {
                config: SplineConfig {
                    orders: vec![4; interior.len()],
                    interior_knots: interior,
                    max_iter: 2000,
                },
            })
        }
    }
}

fn shock_label(s: &Shock) -> String {
    match s {
        Shock::Normal => "normal".into(),
        Shock::Laplace { scale } => format!("laplace({scale})"),
        Shock::StudentT { df } => format!("t({df})"),
        Shock::ScaledT { df, scale } => format!("{scale}*t({df})"),
    }
}

fn read_config(path: &Path) -> Result<StudyConfig, String> {
    let text = fs::read_to_string(path)
        .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("invalid config: {e}"))
}

