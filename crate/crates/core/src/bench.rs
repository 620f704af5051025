//! Replication sweeps, goodness-of-fit exports and timing reports.
//!
//! A sweep runs `replications` independent datasets per `d_z` value of the
//! grid. Every replication appends one JSON line to `records.jsonl` in the
//! output directory, so an interrupted sweep resumes where it stopped.
//! `sweep.csv` and `summary.json` are rebuilt from all records at the end.
//!
//! Seeds are derived from the master seed, the `d_z` value and the
//! replication index, never from execution order.

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::crt::{run_nnscit, Decision, TestConfig, Variant};
use crate::data::{Dataset, StreamRng};
use crate::error::{Error, Result};
use crate::mlp::TrainConfig;
use crate::sampler::{build_index, sample_1nn};
use crate::stats::{ks_statistic, l1_distance, paired_histogram, pooled_range, GOF_BINS};
use crate::synth::{generate, oracle_conditional_sampler, ConditionalSampler, Family, Hypothesis, ScenarioSpec};

pub const DESK_N: usize = 600;
pub const DESK_M: usize = 100;
pub const DESK_REPLICATIONS: usize = 100;

pub const RECORDS_FILE: &str = "records.jsonl";
pub const SWEEP_FILE: &str = "sweep.csv";
pub const SUMMARY_FILE: &str = "summary.json";
const CONFIG_FILE: &str = "config.json";

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    /// Base scenario; `seed` is the master seed and `d_z` is replaced by each
    /// grid value.
    pub scenario: ScenarioSpec,
    pub d_z_grid: Vec<usize>,
    pub test: TestConfig,
    pub replications: usize,
    pub output_dir: PathBuf,
}

impl ExperimentConfig {
    /// Desk-scale sweep: n = 600, M = 100, 100 replications.
    pub fn desk(family: Family, hypothesis: Hypothesis, d_z_grid: Vec<usize>, output_dir: impl Into<PathBuf>) -> Self {
        let first = d_z_grid.first().copied().unwrap_or(1);
        ExperimentConfig {
            scenario: ScenarioSpec::new(family, hypothesis, DESK_N, first, 0),
            d_z_grid,
            test: TestConfig {
                m: DESK_M,
                ..TestConfig::default()
            },
            replications: DESK_REPLICATIONS,
            output_dir: output_dir.into(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.replications == 0 {
            problems.push("replications must be at least 1".to_string());
        }
        if self.d_z_grid.is_empty() {
            problems.push("d_z grid must not be empty".to_string());
        }
        if self.d_z_grid.contains(&0) {
            problems.push("d_z values must be positive".to_string());
        }
        for check in [self.scenario.validate(), self.test.validate()] {
            if let Err(Error::InvalidConfig(more)) = check {
                problems.extend(more);
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(problems))
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    /// Parses a config file. Unknown keys are reported together, with
    /// their table prefix.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::InvalidConfig(vec![e.message().to_string()]))?;
        let mut unknown = Vec::new();
        collect_unknown(&table, "", TOP_KEYS, &mut unknown);
        for (section, keys) in [("scenario", SCENARIO_KEYS), ("test", TEST_KEYS), ("classifier", CLASSIFIER_KEYS)] {
            match table.get(section) {
                Some(toml::Value::Table(t)) => collect_unknown(t, section, keys, &mut unknown),
                Some(_) => unknown.push(format!("`{section}` must be a table")),
                None => {}
            }
        }
        if !unknown.is_empty() {
            return Err(Error::InvalidConfig(unknown));
        }
        let raw: RawConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| Error::InvalidConfig(vec![e.message().to_string()]))?;
        raw.into_config()
    }
}

const TOP_KEYS: &[&str] = &["seed", "replications", "output_dir", "d_z", "scenario", "test", "classifier"];
const SCENARIO_KEYS: &[&str] = &["family", "hypothesis", "n", "b", "noise_sd", "partial_corr", "coupling"];
const TEST_KEYS: &[&str] = &["m", "k", "alpha", "variant"];
const CLASSIFIER_KEYS: &[&str] = &[
    "epochs",
    "batch_size",
    "learning_rate",
    "l2_penalty",
    "hidden",
    "validation_fraction",
    "patience",
    "warmup_steps",
];

fn collect_unknown(table: &toml::Table, prefix: &str, known: &[&str], out: &mut Vec<String>) {
    for key in table.keys() {
        if !known.contains(&key.as_str()) {
            let full = if prefix.is_empty() { key.clone() } else { format!("{prefix}.{key}") };
            out.push(format!("unknown key `{full}`"));
        }
    }
}

#[derive(Deserialize)]
#[serde(default)]
struct RawConfig {
    seed: u64,
    replications: usize,
    output_dir: Option<PathBuf>,
    d_z: Vec<usize>,
    scenario: RawScenario,
    test: RawTest,
    classifier: TrainConfig,
}

impl Default for RawConfig {
    fn default() -> Self {
        RawConfig {
            seed: 0,
            replications: DESK_REPLICATIONS,
            output_dir: None,
            d_z: Vec::new(),
            scenario: RawScenario::default(),
            test: RawTest::default(),
            classifier: TrainConfig::default(),
        }
    }
}

#[derive(Deserialize)]
#[serde(default)]
struct RawScenario {
    family: Option<String>,
    hypothesis: String,
    n: usize,
    b: f64,
    noise_sd: f64,
    partial_corr: f64,
    coupling: f64,
}

impl Default for RawScenario {
    fn default() -> Self {
        let base = ScenarioSpec::new(Family::PostNonlinearI, Hypothesis::H0, DESK_N, 1, 0);
        RawScenario {
            family: None,
            hypothesis: "H0".into(),
            n: base.n,
            b: base.b,
            noise_sd: base.noise_sd,
            partial_corr: base.partial_corr,
            coupling: base.coupling,
        }
    }
}

#[derive(Deserialize)]
#[serde(default)]
struct RawTest {
    m: usize,
    k: usize,
    alpha: f64,
    variant: String,
}

impl Default for RawTest {
    fn default() -> Self {
        let base = TestConfig::default();
        RawTest {
            m: DESK_M,
            k: base.k,
            alpha: base.alpha,
            variant: base.variant.name().into(),
        }
    }
}

impl RawConfig {
    fn into_config(self) -> Result<ExperimentConfig> {
        let mut problems = Vec::new();
        let family = match self.scenario.family.as_deref() {
            Some(name) => name.parse::<Family>().map_err(|e| problems.push(e.to_string())).ok(),
            None => {
                problems.push("missing key `scenario.family`".into());
                None
            }
        };
        let hypothesis = self
            .scenario
            .hypothesis
            .parse::<Hypothesis>()
            .map_err(|e| problems.push(e.to_string()))
            .ok();
        let variant = self
            .test
            .variant
            .parse::<Variant>()
            .map_err(|e| problems.push(e.to_string()))
            .ok();
        if self.output_dir.is_none() {
            problems.push("missing key `output_dir`".into());
        }
        let (Some(family), Some(hypothesis), Some(variant), Some(output_dir)) =
            (family, hypothesis, variant, self.output_dir)
        else {
            return Err(Error::InvalidConfig(problems));
        };
        let s = self.scenario;
        let config = ExperimentConfig {
            scenario: ScenarioSpec {
                b: s.b,
                noise_sd: s.noise_sd,
                partial_corr: s.partial_corr,
                coupling: s.coupling,
                ..ScenarioSpec::new(family, hypothesis, s.n, self.d_z.first().copied().unwrap_or(1), self.seed)
            },
            d_z_grid: self.d_z,
            test: TestConfig {
                m: self.test.m,
                k: self.test.k,
                alpha: self.test.alpha,
                seed: self.seed,
                variant,
                classifier: self.classifier,
            },
            replications: self.replications,
            output_dir,
        };
        config.validate()?;
        Ok(config)
    }
}

/// One replication of a sweep, one line of `records.jsonl`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplicationRecord {
    pub d_z: usize,
    pub replication: usize,
    pub data_seed: u64,
    /// Seed of the test itself.
    pub seed: u64,
    pub p_value: f64,
    pub statistic: f64,
    pub null_stats: Vec<f64>,
    pub decision: Decision,
    pub variant: Variant,
    pub wall_time_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub d_z: usize,
    pub rejections: usize,
    pub replications: usize,
    /// `rejections / replications`.
    pub rejection_rate: f64,
    pub mean_p: f64,
    pub mean_wall_time_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub family: Family,
    pub hypothesis: Hypothesis,
    pub variant: Variant,
    pub alpha: f64,
    pub rows: Vec<SweepRow>,
}

/// Seeds for the data and the test of one replication.
pub fn replication_seeds(master: u64, d_z: usize, replication: usize) -> (u64, u64) {
    let base = ((d_z as u64) << 33) | ((replication as u64) << 1);
    (StreamRng::child_seed(master, base), StreamRng::child_seed(master, base | 1))
}

/// Runs a single replication without touching the filesystem.
pub fn run_replication(cfg: &ExperimentConfig, d_z: usize, replication: usize) -> Result<ReplicationRecord> {
    let (data_seed, test_seed) = replication_seeds(cfg.scenario.seed, d_z, replication);
    let spec = ScenarioSpec {
        d_z,
        seed: data_seed,
        ..cfg.scenario.clone()
    };
    let data = generate(&spec)?;
    let test = TestConfig {
        seed: test_seed,
        ..cfg.test.clone()
    };
    let res = run_nnscit(&data, &test)?;
    Ok(ReplicationRecord {
        d_z,
        replication,
        data_seed,
        seed: test_seed,
        p_value: res.p_value,
        statistic: res.observed_stat,
        null_stats: res.null_stats,
        decision: res.decision,
        variant: res.variant,
        wall_time_ms: res.wall_time.as_secs_f64() * 1e3,
    })
}

/// Summarizes records per grid value; records beyond `replications` are
/// ignored.
pub fn summarize(cfg: &ExperimentConfig, records: &[ReplicationRecord]) -> SweepReport {
    let rows = cfg
        .d_z_grid
        .iter()
        .map(|&d_z| {
            let cell: Vec<&ReplicationRecord> = records
                .iter()
                .filter(|r| r.d_z == d_z && r.replication < cfg.replications)
                .collect();
            let count = cell.len();
            let rejections = cell.iter().filter(|r| r.p_value < cfg.test.alpha).count();
            let per = |f: fn(&ReplicationRecord) -> f64| {
                if count == 0 {
                    f64::NAN
                } else {
                    cell.iter().map(|r| f(r)).sum::<f64>() / count as f64
                }
            };
            SweepRow {
                d_z,
                rejections,
                replications: count,
                rejection_rate: if count == 0 { f64::NAN } else { rejections as f64 / count as f64 },
                mean_p: per(|r| r.p_value),
                mean_wall_time_ms: per(|r| r.wall_time_ms),
            }
        })
        .collect();
    SweepReport {
        family: cfg.scenario.family,
        hypothesis: cfg.scenario.hypothesis,
        variant: cfg.test.variant,
        alpha: cfg.test.alpha,
        rows,
    }
}

/// Part of the configuration that fixes every statistical output.
#[derive(Serialize, Deserialize, PartialEq)]
struct Fingerprint {
    scenario: serde_json::Value,
    test: serde_json::Value,
}

impl Fingerprint {
    fn of(cfg: &ExperimentConfig) -> Self {
        Fingerprint {
            scenario: serde_json::to_value(ScenarioSpec {
                d_z: 0,
                ..cfg.scenario.clone()
            })
            .expect("serializable"),
            test: serde_json::to_value(&cfg.test).expect("serializable"),
        }
    }
}

fn read_records(path: &Path) -> Result<Vec<ReplicationRecord>> {
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(Error::io(path, e)),
    };
    let mut out = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        // a torn final line from an interrupted run is dropped
        if let Ok(rec) = serde_json::from_str::<ReplicationRecord>(&line) {
            out.push(rec);
        }
    }
    Ok(out)
}

fn write_records(path: &Path, records: &[ReplicationRecord], append: bool) -> Result<()> {
    let mut file = OpenOptions::new()
        .create(true)
        .write(true)
        .append(append)
        .truncate(!append)
        .open(path)
        .map_err(|e| Error::io(path, e))?;
    let mut buf = String::new();
    for rec in records {
        buf.push_str(&serde_json::to_string(rec).expect("serializable"));
        buf.push('\n');
    }
    file.write_all(buf.as_bytes()).map_err(|e| Error::io(path, e))
}

/// Runs (or resumes) a sweep and writes its report files.
///
/// `on_cell` is called after each grid value completes.
pub fn run_sweep(cfg: &ExperimentConfig, mut on_cell: impl FnMut(&SweepRow)) -> Result<SweepReport> {
    cfg.validate()?;
    let dir = &cfg.output_dir;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

    let fingerprint_path = dir.join(CONFIG_FILE);
    let fingerprint = Fingerprint::of(cfg);
    if let Ok(text) = fs::read_to_string(&fingerprint_path) {
        let previous: Fingerprint = serde_json::from_str(&text).map_err(|e| {
            Error::InvalidConfig(vec![format!("unreadable {}: {e}", fingerprint_path.display())])
        })?;
        if previous != fingerprint {
            return Err(Error::InvalidConfig(vec![format!(
                "{} holds records of a different configuration",
                dir.display()
            )]));
        }
    } else {
        let text = serde_json::to_string_pretty(&fingerprint).expect("serializable");
        fs::write(&fingerprint_path, text).map_err(|e| Error::io(&fingerprint_path, e))?;
    }

    let records_path = dir.join(RECORDS_FILE);
    let mut by_key: BTreeMap<(usize, usize), ReplicationRecord> = read_records(&records_path)?
        .into_iter()
        .map(|r| ((r.d_z, r.replication), r))
        .collect();
    let kept: Vec<ReplicationRecord> = by_key.values().cloned().collect();
    write_records(&records_path, &kept, false)?;

    for &d_z in &cfg.d_z_grid {
        let todo: Vec<usize> = (0..cfg.replications)
            .filter(|r| !by_key.contains_key(&(d_z, *r)))
            .collect();
        let fresh = todo
            .par_iter()
            .map(|&r| run_replication(cfg, d_z, r))
            .collect::<Vec<Result<ReplicationRecord>>>();
        // keep whatever finished before reporting a failure
        let done: Vec<ReplicationRecord> = fresh.iter().filter_map(|r| r.as_ref().ok().cloned()).collect();
        write_records(&records_path, &done, true)?;
        for rec in done {
            by_key.insert((rec.d_z, rec.replication), rec);
        }
        if let Some(err) = fresh.into_iter().find_map(|r| r.err()) {
            return Err(err);
        }
        let all: Vec<ReplicationRecord> = by_key.values().cloned().collect();
        if let Some(row) = summarize(cfg, &all).rows.into_iter().find(|row| row.d_z == d_z) {
            on_cell(&row);
        }
    }

    let all: Vec<ReplicationRecord> = by_key.into_values().collect();
    let report = summarize(cfg, &all);
    write_sweep_csv(&report, dir.join(SWEEP_FILE))?;
    let summary = dir.join(SUMMARY_FILE);
    fs::write(&summary, serde_json::to_string_pretty(&report).expect("serializable"))
        .map_err(|e| Error::io(&summary, e))?;
    Ok(report)
}

pub fn write_sweep_csv(report: &SweepReport, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::io(path, e))?;
    let csv_err = |e: csv::Error| Error::io(path, e);
    w.write_record(["d_z", "rejection_rate", "mean_p", "mean_wall_time_ms", "replications", "rejections"])
        .map_err(csv_err)?;
    for row in &report.rows {
        w.write_record([
            row.d_z.to_string(),
            row.rejection_rate.to_string(),
            row.mean_p.to_string(),
            row.mean_wall_time_ms.to_string(),
            row.replications.to_string(),
            row.rejections.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GofConfig {
    pub family: Family,
    pub d_z: usize,
    /// Rows indexed by the nearest-neighbor sampler.
    pub reference: usize,
    /// Rows at which `x` is resampled.
    pub query: usize,
    pub seed: u64,
}

impl GofConfig {
    pub fn new(family: Family, seed: u64) -> Self {
        GofConfig {
            family,
            d_z: 50,
            reference: 500,
            query: 500,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if !matches!(self.family, Family::Gof1 | Family::Gof2) {
            problems.push(format!("goodness-of-fit needs gof-1 or gof-2, got {}", self.family));
        }
        if self.reference == 0 || self.query == 0 {
            problems.push("reference and query sample counts must be positive".into());
        }
        if self.d_z == 0 {
            problems.push("d_z must be positive".into());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(problems))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub bin_left: f64,
    pub bin_right: f64,
    pub count_generated: usize,
    pub count_true: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GofReport {
    pub family: Family,
    pub bins: Vec<HistogramBin>,
    pub l1_distance: f64,
    pub ks_statistic: f64,
    /// 1-NN samples at the query rows.
    pub generated: Vec<f64>,
    /// Fresh draws from the true conditional law at the query rows.
    pub truth: Vec<f64>,
}

/// Compares 1-NN conditional samples with draws from the true law of
/// `x | z` at the same query points.
pub fn run_gof(cfg: &GofConfig) -> Result<GofReport> {
    cfg.validate()?;
    let spec = ScenarioSpec::new(cfg.family, Hypothesis::H0, cfg.reference + cfg.query, cfg.d_z, cfg.seed);
    let data = generate(&spec)?;
    let reference = data.select(&(0..cfg.reference).collect::<Vec<_>>());
    let query: Dataset = data.select(&(cfg.reference..data.n()).collect::<Vec<_>>());
    let generated = sample_1nn(&build_index(&reference)?, &query)?;
    let oracle = oracle_conditional_sampler(&spec)?;
    let mut rng = StreamRng::new(cfg.seed, 7);
    let truth: Vec<f64> = (0..query.n()).map(|i| oracle.sample(query.z_row(i), &mut rng)).collect();

    let (gen_counts, true_counts) = paired_histogram(&generated, &truth, GOF_BINS)?;
    let (lo, hi) = pooled_range(&generated, &truth);
    let width = (hi - lo) / GOF_BINS as f64;
    let bins = (0..GOF_BINS)
        .map(|b| HistogramBin {
            bin_left: lo + b as f64 * width,
            bin_right: lo + (b + 1) as f64 * width,
            count_generated: gen_counts[b],
            count_true: true_counts[b],
        })
        .collect();
    Ok(GofReport {
        family: cfg.family,
        bins,
        l1_distance: l1_distance(&gen_counts, &true_counts),
        ks_statistic: ks_statistic(&generated, &truth)?,
        generated,
        truth,
    })
}

pub fn write_gof_csv(report: &GofReport, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let to_err = |e: csv::Error| Error::io(path, e);
    let mut w = csv::Writer::from_path(path).map_err(to_err)?;
    for bin in &report.bins {
        w.serialize(bin).map_err(to_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimingRow {
    pub d_z: usize,
    pub eq6_ms: f64,
    pub eq5_ms: f64,
    /// `eq6_ms / eq5_ms`.
    pub ratio: f64,
    pub eq6_p: f64,
    pub eq5_p: f64,
}

/// Wall time of one test per `d_z` under the default pairing and under the
/// classifier-null ablation, on the same data and seed.
pub fn timing_report(base: &ScenarioSpec, grid: &[usize], test: &TestConfig) -> Result<Vec<TimingRow>> {
    if grid.is_empty() || grid.contains(&0) {
        return Err(Error::InvalidConfig(vec!["d_z grid must be nonempty and positive".into()]));
    }
    grid.iter()
        .map(|&d_z| {
            let data = generate(&ScenarioSpec {
                d_z,
                ..base.clone()
            })?;
            let run = |variant| {
                run_nnscit(
                    &data,
                    &TestConfig {
                        variant,
                        ..test.clone()
                    },
                )
            };
            let eq6 = run(Variant::Eq6)?;
            let eq5 = run(Variant::Eq5)?;
            let (eq6_ms, eq5_ms) = (eq6.wall_time.as_secs_f64() * 1e3, eq5.wall_time.as_secs_f64() * 1e3);
            Ok(TimingRow {
                d_z,
                eq6_ms,
                eq5_ms,
                ratio: eq6_ms / eq5_ms,
                eq6_p: eq6.p_value,
                eq5_p: eq5.p_value,
            })
        })
        .collect()
}

pub fn write_timing_csv(rows: &[TimingRow], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let to_err = |e: csv::Error| Error::io(path, e);
    let mut w = csv::Writer::from_path(path).map_err(to_err)?;
    for row in rows {
        w.serialize(row).map_err(to_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        seed = 3
        replications = 2
        output_dir = "out"
        d_z = [2, 4]

        [scenario]
        family = "postnonlinear-I"
        hypothesis = "H1"
        n = 150

        [test]
        m = 9
        variant = "eq7"
    "#;

    #[test]
    fn parses_config_with_defaults() {
        let cfg = ExperimentConfig::from_toml_str(MINIMAL).unwrap();
        assert_eq!(cfg.d_z_grid, vec![2, 4]);
        assert_eq!(cfg.scenario.family, Family::PostNonlinearI);
        assert_eq!(cfg.scenario.hypothesis, Hypothesis::H1);
        assert_eq!(cfg.scenario.n, 150);
        assert_eq!(cfg.scenario.b, 2.0);
        assert_eq!(cfg.test.m, 9);
        assert_eq!(cfg.test.variant, Variant::Eq7);
        assert_eq!(cfg.test.seed, 3);
        assert_eq!(cfg.test.classifier, TrainConfig::default());
    }

    #[test]
    fn desk_defaults() {
        let cfg = ExperimentConfig::from_toml_str(
            "output_dir = 'o'\nd_z = [5]\n[scenario]\nfamily = 'gof-2'\n",
        )
        .unwrap();
        assert_eq!((cfg.scenario.n, cfg.test.m, cfg.replications), (600, 100, 100));
        assert_eq!(cfg, ExperimentConfig::desk(Family::Gof2, Hypothesis::H0, vec![5], "o"));
    }

    #[test]
    fn unknown_keys_are_all_listed() {
        let text = format!("bogus = 1\n{MINIMAL}\n[classifier]\nlr = 0.1\n");
        let text = text.replace("[test]", "[test]\nrepeats = 4");
        match ExperimentConfig::from_toml_str(&text) {
            Err(Error::InvalidConfig(p)) => {
                assert_eq!(p.len(), 3, "{p:?}");
                assert!(p.iter().any(|m| m.contains("`bogus`")));
                assert!(p.iter().any(|m| m.contains("`test.repeats`")));
                assert!(p.iter().any(|m| m.contains("`classifier.lr`")));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn invalid_values_rejected() {
        let text = MINIMAL.replace("replications = 2", "replications = 0");
        assert!(matches!(ExperimentConfig::from_toml_str(&text), Err(Error::InvalidConfig(_))));
        let text = MINIMAL.replace("eq7", "eq9");
        assert!(matches!(ExperimentConfig::from_toml_str(&text), Err(Error::InvalidConfig(_))));
        let text = MINIMAL.replace("family = \"postnonlinear-I\"", "");
        assert!(matches!(ExperimentConfig::from_toml_str(&text), Err(Error::InvalidConfig(_))));
        assert!(ExperimentConfig::from_toml_str("d_z = ").is_err());
    }

    #[test]
    fn seeds_depend_on_cell_not_order() {
        let a = replication_seeds(1, 5, 3);
        assert_eq!(a, replication_seeds(1, 5, 3));
        assert_ne!(a, replication_seeds(1, 5, 4));
        assert_ne!(a, replication_seeds(1, 6, 3));
        assert_ne!(a.0, a.1);
    }

    fn record(d_z: usize, replication: usize, p_value: f64) -> ReplicationRecord {
        ReplicationRecord {
            d_z,
            replication,
            data_seed: 0,
            seed: 0,
            p_value,
            statistic: 0.0,
            null_stats: vec![],
            decision: crate::crt::decide(p_value, 0.05),
            variant: Variant::Eq6,
            wall_time_ms: 2.0,
        }
    }

    #[test]
    fn summary_arithmetic() {
        let mut cfg = ExperimentConfig::from_toml_str(MINIMAL).unwrap();
        cfg.replications = 3;
        let recs = [
            record(2, 0, 0.01),
            record(2, 1, 0.5),
            record(2, 2, 0.04),
            record(2, 7, 0.01),
            record(4, 0, 0.05),
        ];
        let report = summarize(&cfg, &recs);
        assert_eq!(report.rows[0].rejections, 2);
        assert_eq!(report.rows[0].replications, 3);
        assert_eq!(report.rows[0].rejection_rate, 2.0 / 3.0);
        assert_eq!(report.rows[1].rejection_rate, 0.0);
        assert_eq!(report.rows[1].mean_wall_time_ms, 2.0);
    }

    #[test]
    fn gof_rejects_zero_samples() {
        let mut cfg = GofConfig::new(Family::Gof1, 0);
        cfg.query = 0;
        assert!(matches!(run_gof(&cfg), Err(Error::InvalidConfig(_))));
        let cfg = GofConfig::new(Family::PostNonlinearI, 0);
        assert!(matches!(run_gof(&cfg), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn gof_histogram_shape() {
        let mut cfg = GofConfig::new(Family::Gof2, 1);
        cfg.reference = 100;
        cfg.query = 80;
        let report = run_gof(&cfg).unwrap();
        assert_eq!(report.bins.len(), GOF_BINS);
        assert_eq!(report.bins.iter().map(|b| b.count_generated).sum::<usize>(), 80);
        assert_eq!(report.bins.iter().map(|b| b.count_true).sum::<usize>(), 80);
        let (lo, hi) = pooled_range(&report.generated, &report.truth);
        assert_eq!(report.bins[0].bin_left, lo);
        assert!((report.bins[GOF_BINS - 1].bin_right - hi).abs() < 1e-12);
        for w in report.bins.windows(2) {
            assert!((w[0].bin_right - w[1].bin_left).abs() < 1e-12);
        }
        assert!((0.0..=2.0).contains(&report.l1_distance));
    }
}
