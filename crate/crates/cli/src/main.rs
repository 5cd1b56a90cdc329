use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use survcobra::experiment::{
    curves_from_file, evaluate, load_config_dir, load_params, reproduce, tune, tune_and_evaluate,
    write_tune_outputs, ExperimentConfig, TuneSummary,
};
use survcobra::tuning::NormChoice;
use survcobra::util::write_atomic;
use survcobra::{Error, Result, Variant, WeightScheme};

#[derive(Parser, Debug)]
#[command(name = "survcobra", version, about = "Survival COBRA experiments")]
#[command(arg_required_else_help = true)]
struct Cli {
    /// Worker threads for data-parallel stages (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Log progress to stderr (repeat for more detail).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Cross-validated search over (epsilon, alpha, norm).
    Tune(Common),
    /// Repeated split evaluation; tunes first unless --params is given.
    Evaluate {
        #[command(flatten)]
        common: Common,
        /// Parameters from `tune` output, or a CobraParams object/list.
        #[arg(long)]
        params: Option<PathBuf>,
    },
    /// Predicted survival curves for the rows of a query CSV.
    Curves {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        params: PathBuf,
        /// CSV with the dataset's covariate columns.
        #[arg(long)]
        queries: PathBuf,
    },
    /// Tune and evaluate every config in a directory and write the IBS table.
    Reproduce(Common),
}

#[derive(Args, Debug)]
struct Common {
    /// Experiment JSON (for `reproduce`, a directory of them or one file).
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    variant: Option<VariantArg>,
    #[arg(long, value_enum)]
    norm: Option<NormArg>,
    #[arg(long, value_enum)]
    weights: Option<WeightsArg>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum VariantArg {
    Straight,
    Weighted,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum NormArg {
    Frobenius,
    Sup,
    Both,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum WeightsArg {
    Complement,
    Literal,
}

impl Common {
    fn apply(&self, cfg: &mut ExperimentConfig) -> Result<()> {
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(v) = self.variant {
            cfg.variants = vec![match v {
                VariantArg::Straight => Variant::Straight,
                VariantArg::Weighted => Variant::Weighted,
            }];
        }
        if let Some(n) = self.norm {
            cfg.norm = match n {
                NormArg::Frobenius => NormChoice::Frobenius,
                NormArg::Sup => NormChoice::Sup,
                NormArg::Both => NormChoice::Both,
            };
        }
        if let Some(w) = self.weights {
            cfg.weights = match w {
                WeightsArg::Complement => WeightScheme::Complement,
                WeightsArg::Literal => WeightScheme::Literal,
            };
        }
        if let Some(r) = self.reps {
            cfg.repetitions = r;
        }
        cfg.validate()
    }

    fn load(&self) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::load(&self.config)?;
        self.apply(&mut cfg)?;
        Ok(cfg)
    }

    fn out_dir(&self, cfg: Option<&ExperimentConfig>) -> PathBuf {
        self.out
            .clone()
            .or_else(|| cfg.and_then(|c| c.out.clone()))
            .unwrap_or_else(|| PathBuf::from("out"))
    }
}

fn create_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn run(cli: Cli) -> Result<()> {
    if let Some(w) = cli.workers {
        if w == 0 {
            return Err(Error::Params("--workers must be >= 1".into()));
        }
        survcobra::par::configure_workers(w);
    }
    match cli.command {
        Command::Tune(common) => {
            let cfg = common.load()?;
            let (dataset, _) = cfg.load_dataset()?;
            let results = tune(&dataset, &cfg)?;
            let out = common.out_dir(Some(&cfg));
            create_dir(&out)?;
            write_tune_outputs(&results, &out)?;
            for r in &results {
                println!("{}", serde_json::to_string(&TuneSummary::from_result(r))?);
            }
        }
        Command::Evaluate { common, params } => {
            let cfg = common.load()?;
            let (dataset, _) = cfg.load_dataset()?;
            let report = match params {
                Some(p) => {
                    let methods = load_params(&p)?;
                    evaluate(&dataset, &cfg, &methods)?
                }
                None => tune_and_evaluate(&dataset, &cfg)?.1,
            };
            let out = common.out_dir(Some(&cfg));
            create_dir(&out)?;
            report.write(&out)?;
            for m in &report.methods {
                println!("{}\t{:.4}\t{:.4}", m.label, m.mean_ibs, m.sd_ibs);
            }
            println!("weak learners (average)\t{:.4}", report.machine_average_ibs);
        }
        Command::Curves {
            common,
            params,
            queries,
        } => {
            let cfg = common.load()?;
            let candidates = load_params(&params)?;
            let chosen = candidates
                .into_iter()
                .find(|p| cfg.variants.contains(&p.variant) && cfg.norm.norms().contains(&p.norm))
                .ok_or_else(|| Error::Params("no parameter set matches --variant/--norm".into()))?;
            let table = curves_from_file(&cfg, chosen, &queries)?;
            let out = common.out_dir(Some(&cfg));
            create_dir(&out)?;
            write_atomic(&out.join("curves.csv"), table.to_csv()?.as_bytes())?;
        }
        Command::Reproduce(common) => {
            let mut configs = if common.config.is_dir() {
                load_config_dir(&common.config)?
            } else {
                vec![ExperimentConfig::load(&common.config)?]
            };
            for cfg in &mut configs {
                common.apply(cfg)?;
            }
            // every dataset must be readable before anything is written
            for cfg in &configs {
                cfg.load_dataset().map_err(|e| Error::Dataset {
                    name: cfg.name.clone(),
                    source: Box::new(e),
                })?;
            }
            let out = common.out_dir(None);
            create_dir(&out)?;
            let report = reproduce(&configs, &out)?;
            print!("{}", report.to_markdown());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_user_error() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
