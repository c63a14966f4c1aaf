use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use off_core::dataset::{inject_availability, load_csv, save_csv, InjectionSpec, Schema, DEFAULT_NA_TOKEN};
use off_core::experiment::{fit_model, run_experiment, threads_from_env, with_threads, ExperimentConfig, ModelKind, ModelOptions};
use off_core::glm::FitConfig;
use off_core::learner::{GroupMeanLearner, LogisticLearner, SubsetLearner};
use off_core::metrics::{evaluate, off_gap};
use off_core::models::FittedModel;
use off_core::OffError;

#[derive(Parser)]
#[command(name = "off", version, about = "Optional feature fair classifiers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Base,
    Imputed,
    Csp,
    Multi,
    OffLr,
    NbOff,
}

impl From<ModelArg> for ModelKind {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Base => ModelKind::Base,
            ModelArg::Imputed => ModelKind::Imputed,
            ModelArg::Csp => ModelKind::Csp,
            ModelArg::Multi => ModelKind::Multi,
            ModelArg::OffLr => ModelKind::OffLr,
            ModelArg::NbOff => ModelKind::NbOff,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum LearnerArg {
    Logistic,
    GroupMean,
}

#[derive(Subcommand)]
enum Command {
    /// Hide optional values of a CSV according to an injection spec.
    Inject {
        #[arg(long)]
        input: PathBuf,
        /// Schema JSON: base_names, optional_names, label_name.
        #[arg(long)]
        schema: PathBuf,
        /// Injection spec JSON: list of {feature, slope, per_std, center}.
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        output: PathBuf,
        #[arg(long, default_value = DEFAULT_NA_TOKEN)]
        na_token: String,
    },
    /// Fit a model on a CSV and save it as JSON.
    Fit {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        schema: PathBuf,
        #[arg(long, value_enum)]
        model: ModelArg,
        #[arg(long, value_enum, default_value = "logistic")]
        learner: LearnerArg,
        /// Fit config JSON: l2_penalty, max_iters, grad_tol.
        #[arg(long)]
        fit_config: Option<PathBuf>,
        #[arg(long)]
        no_indicator: bool,
        #[arg(long, default_value_t = 1.0)]
        nb_alpha: f64,
        #[arg(long)]
        output: PathBuf,
        #[arg(long, default_value = DEFAULT_NA_TOKEN)]
        na_token: String,
    },
    /// Evaluate a saved model on a CSV; prints a JSON report.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        input: PathBuf,
        /// Second saved model; adds the mean absolute gap between the two.
        #[arg(long)]
        reference: Option<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, default_value = DEFAULT_NA_TOKEN)]
        na_token: String,
    },
    /// Run a configured experiment and write its reports.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        /// Replace the seed list of the config.
        #[arg(long, num_args = 1.., value_delimiter = ',')]
        seed_override: Option<Vec<u64>>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write plot.csv with aggregated values.
        #[arg(long)]
        emit_plot_data: bool,
    },
}

enum Failure {
    Config(String),
    Data(String),
}

impl From<OffError> for Failure {
    fn from(e: OffError) -> Self {
        if e.is_config_error() {
            Failure::Config(e.to_string())
        } else {
            Failure::Data(e.to_string())
        }
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

fn read_schema(path: &Path) -> Result<Schema, Failure> {
    let schema: Schema = read_json(path)?;
    schema.validate()?;
    Ok(schema)
}

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Inject {
            input,
            schema,
            spec,
            seed,
            output,
            na_token,
        } => {
            let schema = read_schema(&schema)?;
            let spec: InjectionSpec = read_json(&spec)?;
            let ds = load_csv(&input, &schema, &na_token)?;
            let injected = inject_availability(&ds, &spec, seed)?;
            save_csv(&injected, &output, &na_token)?;
        }
        Command::Fit {
            input,
            schema,
            model,
            learner,
            fit_config,
            no_indicator,
            nb_alpha,
            output,
            na_token,
        } => {
            let schema = read_schema(&schema)?;
            let fit: FitConfig = match fit_config {
                Some(path) => read_json(&path)?,
                None => FitConfig::default(),
            };
            fit.validate()?;
            let ds = load_csv(&input, &schema, &na_token)?;
            let opts = ModelOptions {
                add_indicator: !no_indicator,
                nb_alpha,
            };
            let learner: Box<dyn SubsetLearner> = match learner {
                LearnerArg::Logistic => Box::new(LogisticLearner::new(fit)),
                LearnerArg::GroupMean => Box::new(GroupMeanLearner),
            };
            let (fitted, fits) = fit_model(model.into(), &ds, learner.as_ref(), &opts)?;
            let text = serde_json::to_string_pretty(&fitted).map_err(OffError::from)?;
            write_text(&output, &text)?;
            eprintln!("fitted {} with {fits} primitive fits", ModelKind::from(model).name());
        }
        Command::Eval {
            model,
            input,
            reference,
            output,
            na_token,
        } => {
            let model: FittedModel = read_json(&model)?;
            let ds = load_csv(&input, model.schema(), &na_token)?;
            let mut report = evaluate(&model, &ds)?;
            if let Some(path) = reference {
                let reference: FittedModel = read_json(&path)?;
                if reference.schema() != model.schema() {
                    return Err(Failure::Config("reference model has a different schema".into()));
                }
                report.insert("off_gap", off_gap(&model, &reference, &ds)?, ds.len(), None);
            }
            let text = serde_json::to_string_pretty(&report).map_err(OffError::from)? + "\n";
            match output {
                Some(path) => write_text(&path, &text)?,
                None => print!("{text}"),
            }
        }
        Command::Experiment {
            config,
            seed_override,
            out,
            emit_plot_data,
        } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(seeds) = seed_override {
                cfg.seeds = seeds;
                cfg.validate()?;
            }
            let report = with_threads(threads_from_env(), || run_experiment(&cfg))??;
            match out.or_else(|| cfg.output.clone()) {
                Some(dir) => {
                    for path in report.write(&dir, emit_plot_data)? {
                        eprintln!("wrote {}", path.display());
                    }
                }
                None => print!("{}", report.to_json()),
            }
            eprint!("{}", report.render_table());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Data(msg)) => {
            eprintln!("data error: {msg}");
            ExitCode::from(3)
        }
    }
}
