//! Command-line front end.
//!
//! Exit status: 0 on success, 1 when a statistical run fails, 2 on bad input.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use nnscit::bench::{
    run_gof, run_sweep, timing_report, write_gof_csv, write_timing_csv, ExperimentConfig, GofConfig, SweepRow,
};
use nnscit::crt::{run_nnscit, CrtResult, Decision, TestConfig, Variant};
use nnscit::data::load_csv;
use nnscit::mlp::TrainConfig;
use nnscit::synth::{generate, Family, Hypothesis, ScenarioSpec};
use nnscit::{Error, Result};

#[derive(Parser)]
#[command(name = "nnscit", version, about = "Nearest-neighbor sampling conditional independence test")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Test X independent of Y given Z on a CSV with columns x, y, z1..zd.
    Test(TestArgs),
    /// Run a replication sweep described by a TOML file.
    Bench(BenchArgs),
    /// Export histograms of 1-NN samples against true conditional draws.
    Gof(GofArgs),
    /// Time one test per d_Z under the eq6 and eq5 statistics.
    Timing(TimingArgs),
    /// Write a synthetic dataset to CSV.
    Generate(GenerateArgs),
}

#[derive(Args)]
struct TestArgs {
    csv: PathBuf,
    /// Result record path [default: <csv stem>.result.json next to the CSV]
    #[arg(long)]
    output: Option<PathBuf>,
    #[command(flatten)]
    test: TestFlags,
}

#[derive(Args)]
struct TestFlags {
    /// Resampling repetitions
    #[arg(long, default_value_t = 500)]
    m: usize,
    /// Neighbor order of the k-NN estimator
    #[arg(long, default_value_t = 3)]
    k: usize,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// eq6 (default), eq5 or eq7
    #[arg(long, default_value = "eq6")]
    variant: String,
    #[command(flatten)]
    classifier: ClassifierFlags,
}

#[derive(Args)]
struct ClassifierFlags {
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    l2_penalty: Option<f64>,
    /// Hidden layer widths, comma separated
    #[arg(long, value_delimiter = ',')]
    hidden: Option<Vec<usize>>,
    #[arg(long)]
    validation_fraction: Option<f64>,
    #[arg(long)]
    patience: Option<usize>,
    #[arg(long)]
    warmup_steps: Option<usize>,
}

impl ClassifierFlags {
    fn apply(&self, mut cfg: TrainConfig) -> TrainConfig {
        if let Some(v) = self.epochs {
            cfg.epochs = v;
        }
        if let Some(v) = self.batch_size {
            cfg.batch_size = v;
        }
        if let Some(v) = self.learning_rate {
            cfg.learning_rate = v;
        }
        if let Some(v) = self.l2_penalty {
            cfg.l2_penalty = v;
        }
        if let Some(v) = &self.hidden {
            cfg.hidden = v.clone();
        }
        if let Some(v) = self.validation_fraction {
            cfg.validation_fraction = v;
        }
        if let Some(v) = self.patience {
            cfg.patience = v;
        }
        if let Some(v) = self.warmup_steps {
            cfg.warmup_steps = v;
        }
        cfg
    }
}

impl TestFlags {
    fn config(&self) -> Result<TestConfig> {
        let cfg = TestConfig {
            m: self.m,
            k: self.k,
            alpha: self.alpha,
            seed: self.seed,
            variant: self.variant.parse()?,
            classifier: self.classifier.apply(TrainConfig::default()),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct BenchArgs {
    config: PathBuf,
    #[arg(long)]
    replications: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    /// Master seed
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

#[derive(Args)]
struct GofArgs {
    /// gof-1 or gof-2
    #[arg(long)]
    family: String,
    #[arg(long, default_value_t = 50)]
    d_z: usize,
    /// Rows indexed by the sampler
    #[arg(long, default_value_t = 500)]
    reference: usize,
    /// Rows at which x is resampled
    #[arg(long, default_value_t = 500)]
    query: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "gof.csv")]
    output: PathBuf,
}

#[derive(Args)]
struct TimingArgs {
    /// d_Z values, comma separated
    #[arg(long, value_delimiter = ',', default_values_t = [5, 20, 50, 100])]
    grid: Vec<usize>,
    #[arg(long, default_value = "postnonlinear-II")]
    family: String,
    #[arg(long, default_value = "H0")]
    hypothesis: String,
    #[arg(long, default_value_t = 600)]
    n: usize,
    #[arg(long, default_value_t = 20)]
    m: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "timing.csv")]
    output: PathBuf,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    family: String,
    #[arg(long, default_value = "H0")]
    hypothesis: String,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    d_z: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 2.0)]
    b: f64,
    #[arg(long, default_value_t = 0.7)]
    noise_sd: f64,
    #[arg(long)]
    output: PathBuf,
}

/// Machine-readable record written by `test`.
#[derive(Serialize)]
struct ResultRecord<'a> {
    p_value: f64,
    statistic: f64,
    null_stats: &'a [f64],
    decision: Decision,
    variant: Variant,
    seed: u64,
    wall_time_ms: f64,
    m: usize,
    k: usize,
    alpha: f64,
    n: usize,
    d_z: usize,
}

fn default_result_path(csv: &Path) -> PathBuf {
    let stem = csv.file_stem().and_then(|s| s.to_str()).unwrap_or("nnscit");
    csv.with_file_name(format!("{stem}.result.json"))
}

fn print_result(res: &CrtResult, m: usize) {
    println!("p-value    {:.6}", res.p_value);
    println!("statistic  {:.6}", res.observed_stat);
    println!("decision   {}", res.decision.name());
    println!("variant    {}", res.variant);
    println!("M          {m}");
    println!("wall time  {:.3} s", res.wall_time.as_secs_f64());
}

fn cmd_test(args: &TestArgs) -> Result<()> {
    let cfg = args.test.config()?;
    let data = load_csv(&args.csv)?;
    let res = run_nnscit(&data, &cfg)?;
    print_result(&res, cfg.m);
    let record = ResultRecord {
        p_value: res.p_value,
        statistic: res.observed_stat,
        null_stats: &res.null_stats,
        decision: res.decision,
        variant: res.variant,
        seed: cfg.seed,
        wall_time_ms: res.wall_time.as_secs_f64() * 1e3,
        m: cfg.m,
        k: cfg.k,
        alpha: cfg.alpha,
        n: data.n(),
        d_z: data.d_z(),
    };
    let out = args.output.clone().unwrap_or_else(|| default_result_path(&args.csv));
    let text = serde_json::to_string_pretty(&record).expect("record serializes");
    std::fs::write(&out, text + "\n").map_err(|e| Error::Io {
        path: out.clone(),
        message: e.to_string(),
    })?;
    println!("result     {}", out.display());
    Ok(())
}

fn cmd_bench(args: &BenchArgs) -> Result<()> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if let Some(v) = args.replications {
        cfg.replications = v;
    }
    if let Some(v) = args.m {
        cfg.test.m = v;
    }
    if let Some(v) = args.seed {
        cfg.scenario.seed = v;
        cfg.test.seed = v;
    }
    if let Some(v) = &args.output_dir {
        cfg.output_dir = v.clone();
    }
    cfg.validate()?;
    println!(
        "{} {:?}, n = {}, M = {}, {} replications, variant {}",
        cfg.scenario.family, cfg.scenario.hypothesis, cfg.scenario.n, cfg.test.m, cfg.replications, cfg.test.variant
    );
    println!("{:>6} {:>10} {:>8} {:>12}", "d_z", "rejection", "mean p", "mean ms");
    let report = run_sweep(&cfg, |row: &SweepRow| {
        println!(
            "{:>6} {:>10.3} {:>8.3} {:>12.1}",
            row.d_z, row.rejection_rate, row.mean_p, row.mean_wall_time_ms
        );
    })?;
    println!("wrote {} rows to {}", report.rows.len(), cfg.output_dir.display());
    Ok(())
}

fn cmd_gof(args: &GofArgs) -> Result<()> {
    let cfg = GofConfig {
        family: args.family.parse()?,
        d_z: args.d_z,
        reference: args.reference,
        query: args.query,
        seed: args.seed,
    };
    let report = run_gof(&cfg)?;
    write_gof_csv(&report, &args.output)?;
    println!("family     {}", report.family);
    println!("L1         {:.4}", report.l1_distance);
    println!("KS         {:.4}", report.ks_statistic);
    println!("histogram  {}", args.output.display());
    Ok(())
}

fn cmd_timing(args: &TimingArgs) -> Result<()> {
    let family: Family = args.family.parse()?;
    let hypothesis: Hypothesis = args.hypothesis.parse()?;
    let base = ScenarioSpec::new(family, hypothesis, args.n, 1, args.seed);
    let test = TestConfig {
        m: args.m,
        seed: args.seed,
        ..TestConfig::default()
    };
    let rows = timing_report(&base, &args.grid, &test)?;
    println!("{:>6} {:>12} {:>12} {:>8}", "d_z", "eq6 ms", "eq5 ms", "ratio");
    for row in &rows {
        println!("{:>6} {:>12.1} {:>12.1} {:>8.4}", row.d_z, row.eq6_ms, row.eq5_ms, row.ratio);
    }
    write_timing_csv(&rows, &args.output)?;
    println!("report     {}", args.output.display());
    Ok(())
}

fn cmd_generate(args: &GenerateArgs) -> Result<()> {
    let spec = ScenarioSpec {
        b: args.b,
        noise_sd: args.noise_sd,
        ..ScenarioSpec::new(args.family.parse()?, args.hypothesis.parse()?, args.n, args.d_z, args.seed)
    };
    generate(&spec)?.write_csv(&args.output)?;
    println!("wrote {} rows to {}", args.n, args.output.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Test(a) => cmd_test(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Gof(a) => cmd_gof(a),
        Command::Timing(a) => cmd_timing(a),
        Command::Generate(a) => cmd_generate(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_input_error() { 2 } else { 1 })
        }
    }
}
