//! `sgam`: fit, tune and evaluate sparse additive logistic classifiers, and
//! reproduce the simulation and spambase benchmark studies.

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use sgam::{
    cross_validate, fit_model, format_table, load_csv, load_features_csv, log_grid, method_grid,
    method_weights, run_experiment, run_spam_bench, BasisKind, BasisSpec, Dataset, Error,
    FitConfig, HarnessConfig, LabelColumn, Method, Result, SimConfig, SpamBenchConfig, SpamModel,
    TuningMode,
};

mod selfcheck;

#[derive(Parser)]
#[command(
    name = "sgam",
    version,
    about = "Sparse additive logistic classifiers with sparse group Lasso/Slope penalties",
    long_about = "Fit nonparametric sparse additive logistic classifiers over cosine or Haar \
                  expansions, tune penalties by cross-validation, and run the simulation and \
                  spambase benchmark protocols.\n\nEvery command is deterministic given its \
                  flags and --seed, for any --threads value."
)]
struct Cli {
    /// Worker threads (0 = one per core); results are identical for any value
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit one classifier at fixed penalty constants and save it as JSON
    Fit(FitArgs),
    /// Score a saved model on new data
    Predict(PredictArgs),
    /// Choose penalty constants by K-fold cross-validation
    Cv(CvArgs),
    /// Run the simulation study for one (d, n) combination
    Simulate(SimArgs),
    /// Reproduce the spambase benchmark protocol
    SpamDemo(SpamDemoArgs),
    /// Check the numerical core against brute-force oracles
    Selfcheck(SelfcheckArgs),
}

#[derive(Args)]
struct DataArgs {
    /// Input CSV path
    #[arg(long)]
    data: PathBuf,

    /// Label column: 'last', a zero-based index, or a header name
    #[arg(long, default_value = "last")]
    label: String,

    /// Treat the first line as a header row
    #[arg(long)]
    header: bool,
}

impl DataArgs {
    fn label_column(&self) -> LabelColumn {
        if self.label.eq_ignore_ascii_case("last") {
            LabelColumn::Last
        } else if let Ok(idx) = self.label.parse::<usize>() {
            LabelColumn::Index(idx)
        } else {
            LabelColumn::Name(self.label.clone())
        }
    }

    fn load(&self) -> Result<Dataset> {
        load_csv(&self.data, &self.label_column(), self.header)
    }
}

#[derive(Args)]
struct BasisArgs {
    /// Basis family: cosine or haar
    #[arg(long, default_value = "cosine")]
    basis: String,

    /// Basis functions per feature; defaults to min(n, 128)
    #[arg(long)]
    m: Option<usize>,
}

impl BasisArgs {
    fn spec(&self, n: usize) -> Result<BasisSpec> {
        let kind = BasisKind::from_str(&self.basis)?;
        BasisSpec::new(
            kind,
            self.m.unwrap_or_else(|| BasisSpec::default_truncation(n)),
        )
    }
}

#[derive(Args)]
struct SolverArgs {
    /// Proximal gradient iteration cap per fit
    #[arg(long, default_value_t = 5000)]
    max_iterations: usize,

    /// Relative objective-change tolerance
    #[arg(long, default_value_t = 1e-8)]
    tolerance: f64,
}

impl SolverArgs {
    fn config(&self) -> FitConfig {
        FitConfig {
            max_iterations: self.max_iterations,
            tolerance: self.tolerance,
            ..FitConfig::default()
        }
    }
}

/// `LO:HI:COUNT` log-spaced grid axis.
fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::InvalidConfig(format!(
            "grid spec must be LO:HI:COUNT, got '{spec}'"
        )));
    }
    let lo: f64 = parts[0]
        .parse()
        .map_err(|_| Error::InvalidConfig(format!("bad grid low '{}'", parts[0])))?;
    let hi: f64 = parts[1]
        .parse()
        .map_err(|_| Error::InvalidConfig(format!("bad grid high '{}'", parts[1])))?;
    let count: usize = parts[2]
        .parse()
        .map_err(|_| Error::InvalidConfig(format!("bad grid count '{}'", parts[2])))?;
    if !(lo > 0.0 && hi > lo && count >= 2) {
        return Err(Error::InvalidConfig(
            "grid needs 0 < LO < HI and COUNT ≥ 2".into(),
        ));
    }
    Ok(log_grid(lo, hi, count))
}

fn parse_methods(spec: &str) -> Result<Vec<Method>> {
    spec.split(',')
        .map(|s| Method::from_str(s.trim()))
        .collect()
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    data: DataArgs,

    #[command(flatten)]
    basis: BasisArgs,

    /// lasso, grouplasso, sparsegrouplasso or sparsegroupslope
    #[arg(long, default_value = "sparsegrouplasso")]
    method: String,

    /// Multiplier on the feature-level penalty schedule
    #[arg(long, default_value_t = 1.0)]
    c1: f64,

    /// Multiplier on the coefficient-level penalty schedule
    #[arg(long, default_value_t = 1.0)]
    c2: f64,

    /// Where to write the fitted model JSON
    #[arg(long)]
    out: Option<PathBuf>,

    #[command(flatten)]
    solver: SolverArgs,
}

fn cmd_fit(args: &FitArgs) -> Result<()> {
    let ds = args.data.load()?;
    let method = Method::from_str(&args.method)?;
    let basis = args.basis.spec(ds.n())?;
    let cfg = args.solver.config();
    let (model, fitted) = fit_model(ds.x.view(), &ds.y, basis, method, args.c1, args.c2, &cfg)?;

    let weights = method_weights(
        method,
        ds.n(),
        model.num_features(),
        basis.truncation(),
        args.c1,
        args.c2,
    )?;
    println!(
        "method {method}, basis {} (m = {})",
        basis.kind(),
        basis.truncation()
    );
    println!(
        "penalties: lambda_1 = {:.6e}, kappa_1 = {:.6e}",
        weights.row_weights()[0],
        weights.entry_weights()[0]
    );
    println!(
        "iterations: {} (converged: {})",
        fitted.iterations, fitted.converged
    );
    println!(
        "training error: {:.4}",
        model.misclassification_rate(ds.x.view(), &ds.y)?
    );
    println!(
        "selected features: {} of {} ({} nonzero coefficients)",
        model.selected_features(0.0).len(),
        ds.d(),
        model.nonzero_coefficients()
    );
    if let Some(path) = &args.out {
        model.save(path)?;
        println!("model written to {}", path.display());
    }
    Ok(())
}

#[derive(Args)]
struct PredictArgs {
    /// Fitted model JSON from `sgam fit`
    #[arg(long)]
    model: PathBuf,

    /// Input CSV path
    #[arg(long)]
    data: PathBuf,

    /// Label column for scoring ('none' for feature-only files)
    #[arg(long, default_value = "none")]
    label: String,

    /// Treat the first line as a header row
    #[arg(long)]
    header: bool,

    /// Write predictions CSV here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

fn cmd_predict(args: &PredictArgs) -> Result<()> {
    let model = SpamModel::load(&args.model)?;
    let (x, y) = if args.label.eq_ignore_ascii_case("none") {
        let (x, _) = load_features_csv(&args.data, args.header)?;
        (x, None)
    } else {
        let data_args = DataArgs {
            data: args.data.clone(),
            label: args.label.clone(),
            header: args.header,
        };
        let ds = data_args.load()?;
        (ds.x, Some(ds.y))
    };

    let mut out = String::from("row,logit,probability,class\n");
    let mut buf = vec![0.0; x.ncols()];
    for (i, row) in x.rows().into_iter().enumerate() {
        buf.iter_mut().zip(row.iter()).for_each(|(d, s)| *d = *s);
        let logit = model.predict_logit(&buf)?;
        let proba = model.predict_proba(&buf)?;
        let class = model.classify(&buf)?;
        out.push_str(&format!("{i},{logit},{proba},{class}\n"));
    }
    match &args.out {
        Some(path) => {
            std::fs::write(path, &out).map_err(|source| Error::File {
                path: path.clone(),
                source,
            })?;
            println!("predictions written to {}", path.display());
        }
        None => print!("{out}"),
    }
    if let Some(y) = y {
        println!(
            "misclassification rate: {:.4}",
            model.misclassification_rate(x.view(), &y)?
        );
    }
    Ok(())
}

#[derive(Args)]
struct CvArgs {
    #[command(flatten)]
    data: DataArgs,

    #[command(flatten)]
    basis: BasisArgs,

    /// lasso, grouplasso, sparsegrouplasso or sparsegroupslope
    #[arg(long, default_value = "sparsegrouplasso")]
    method: String,

    /// Log-spaced grid of schedule multipliers, LO:HI:COUNT per axis
    #[arg(long, default_value = "1e-2:1e1:13")]
    grid: String,

    #[arg(long, default_value_t = 10)]
    folds: usize,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Write the per-gridpoint report CSV here
    #[arg(long)]
    out: Option<PathBuf>,

    /// Also fit at the chosen constants and save the model JSON here
    #[arg(long)]
    model_out: Option<PathBuf>,

    #[command(flatten)]
    solver: SolverArgs,
}

fn cmd_cv(args: &CvArgs) -> Result<()> {
    let ds = args.data.load()?;
    let method = Method::from_str(&args.method)?;
    let basis = args.basis.spec(ds.n())?;
    let axis = parse_grid(&args.grid)?;
    let grid = method_grid(method, &axis);
    let cfg = args.solver.config();
    let report = cross_validate(
        ds.x.view(),
        &ds.y,
        &basis,
        method,
        &grid,
        args.folds,
        args.seed,
        &cfg,
    )?;
    let (c1, c2) = report.chosen_point();
    println!(
        "chosen constants: C1 = {c1:.6}, C2 = {c2:.6} (mean error {:.4} ± {:.4} over {} folds)",
        report.mean_error[report.chosen], report.std_error[report.chosen], report.folds
    );
    if let Some(path) = &args.out {
        std::fs::write(path, report.to_csv()).map_err(|source| Error::File {
            path: path.clone(),
            source,
        })?;
        println!("report written to {}", path.display());
    }
    if let Some(path) = &args.model_out {
        let (model, _) = fit_model(ds.x.view(), &ds.y, basis, method, c1, c2, &cfg)?;
        model.save(path)?;
        println!("model written to {}", path.display());
    }
    Ok(())
}

#[derive(Args)]
struct SimArgs {
    /// Number of features (the first three carry the signal)
    #[arg(long)]
    d: usize,

    /// Training sample size
    #[arg(long)]
    n: usize,

    #[arg(long, default_value_t = 10)]
    replications: usize,

    #[arg(long, default_value_t = 100)]
    test_size: usize,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Comma-separated methods to compare
    #[arg(long, default_value = "lasso,grouplasso,sparsegrouplasso")]
    methods: String,

    #[command(flatten)]
    basis: BasisArgs,

    #[arg(long, default_value_t = 10)]
    folds: usize,

    /// Log-spaced grid of schedule multipliers, LO:HI:COUNT per axis
    #[arg(long, default_value = "1e-2:1e1:13")]
    grid: String,

    /// Write per-replication raw results CSV here
    #[arg(long)]
    out_csv: Option<PathBuf>,

    #[command(flatten)]
    solver: SolverArgs,
}

fn cmd_simulate(args: &SimArgs) -> Result<()> {
    let cfg = SimConfig {
        d: args.d,
        n: args.n,
        replications: args.replications,
        test_size: args.test_size,
        seed: args.seed,
    };
    let methods = parse_methods(&args.methods)?;
    let harness = HarnessConfig {
        basis: BasisKind::from_str(&args.basis.basis)?,
        m: args.basis.m,
        folds: args.folds,
        grid_axis: parse_grid(&args.grid)?,
        fit: args.solver.config(),
    };
    let report = run_experiment(&cfg, &methods, &harness)?;
    print!("{}", format_table(std::slice::from_ref(&report)));
    if let Some(path) = &args.out_csv {
        std::fs::write(path, report.to_csv()).map_err(|source| Error::File {
            path: path.clone(),
            source,
        })?;
        println!("raw results written to {}", path.display());
    }
    Ok(())
}

#[derive(Args)]
struct SpamDemoArgs {
    /// Spambase CSV: 4601 rows, 57 numeric features + 0/1 label (1 = spam)
    /// in the last column. A copy ships under data/spambase.csv; the
    /// original lives in the UCI Machine Learning Repository ("spambase").
    #[arg(long)]
    data: PathBuf,

    #[arg(long, default_value_t = 300)]
    train_size: usize,

    #[arg(long, default_value_t = 1)]
    seed: u64,

    /// 'cv' tunes by cross-validation on the training set; 'holdout' tunes
    /// on the test set, mirroring the original protocol
    #[arg(long, default_value = "cv")]
    tuning: String,

    /// Comma-separated methods to compare
    #[arg(long, default_value = "lasso,grouplasso,sparsegrouplasso")]
    methods: String,

    #[command(flatten)]
    basis: BasisArgs,

    #[arg(long, default_value_t = 10)]
    folds: usize,

    /// Log-spaced grid of schedule multipliers, LO:HI:COUNT per axis
    #[arg(long, default_value = "1e-2:1e1:13")]
    grid: String,

    /// Write the per-method report CSV here
    #[arg(long)]
    out_csv: Option<PathBuf>,

    #[command(flatten)]
    solver: SolverArgs,
}

fn cmd_spam_demo(args: &SpamDemoArgs) -> Result<()> {
    let ds = load_csv(&args.data, &LabelColumn::Last, false)?;
    if ds.d() != 57 {
        return Err(Error::InvalidConfig(format!(
            "spambase has 57 feature columns plus a label (58 total); this file parses to {} features",
            ds.d()
        )));
    }
    let mode = match args.tuning.to_ascii_lowercase().as_str() {
        "cv" => TuningMode::CvOnTrain,
        "holdout" => TuningMode::HoldoutOnTest,
        other => {
            return Err(Error::InvalidConfig(format!(
                "tuning must be 'cv' or 'holdout', got '{other}'"
            )))
        }
    };
    let cfg = SpamBenchConfig {
        train_size: args.train_size,
        seed: args.seed,
        basis: args.basis.spec(args.train_size)?,
        grid_axis: parse_grid(&args.grid)?,
        folds: args.folds,
        fit: args.solver.config(),
        mode,
        methods: parse_methods(&args.methods)?,
    };
    let report = run_spam_bench(&ds, &cfg)?;
    print!("{}", report.format_table());
    if let Some(path) = &args.out_csv {
        std::fs::write(path, report.to_csv()).map_err(|source| Error::File {
            path: path.clone(),
            source,
        })?;
        println!("report written to {}", path.display());
    }
    Ok(())
}

#[derive(Args)]
struct SelfcheckArgs {
    /// Test hook: corrupt one result to demonstrate failure reporting
    #[arg(long, hide = true)]
    inject_fault: bool,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        // Numeric/internal trouble.
        Error::NonFinite(_) => 1,
        // Everything else stems from the inputs or flags.
        _ => 2,
    }
}

fn run(command: &Command) -> Result<ExitCode> {
    match command {
        Command::Fit(args) => cmd_fit(args).map(|()| ExitCode::SUCCESS),
        Command::Predict(args) => cmd_predict(args).map(|()| ExitCode::SUCCESS),
        Command::Cv(args) => cmd_cv(args).map(|()| ExitCode::SUCCESS),
        Command::Simulate(args) => cmd_simulate(args).map(|()| ExitCode::SUCCESS),
        Command::SpamDemo(args) => cmd_spam_demo(args).map(|()| ExitCode::SUCCESS),
        Command::Selfcheck(args) => {
            let failures = selfcheck::run(args.inject_fault);
            Ok(if failures == 0 {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .ok();
    }
    match run(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
