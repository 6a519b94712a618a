//! Seeded, parallel experiment runs with CSV and JSON output.
//!
//! Trial `t` of a grid point uses seed `base_seed + t`. Records are sorted by
//! (q, k, c, seed) before writing, so output does not depend on the worker count.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::colouring::{count_colourings_exact, sample_planted_map, Colouring};
use crate::cycles::{count_loose_cycles, poisson_fit, poisson_params, MIN_FIT_SAMPLES};
use crate::error::{Error, Result};
use crate::hypergraph::{gen_multi, gen_planted, Hypergraph, Vertex};
use crate::moments::{first_moment_exact_log, landscape_scan, second_moment_ratio, LandscapeSettings, MomentFunctions};
use crate::params::ModelParams;
use crate::rigidity::{extract_core, frozen_set_exact, recolouring_certificate_with_trace};
use crate::thresholds::{self, fixed_point, threshold_report};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    Thresholds,
    Cycles,
    Core,
    Frozen,
    Moments,
    Oracle,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Thresholds => "thresholds",
            ExperimentKind::Cycles => "cycles",
            ExperimentKind::Core => "core",
            ExperimentKind::Frozen => "frozen",
            ExperimentKind::Moments => "moments",
            ExperimentKind::Oracle => "oracle",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub q: Vec<u16>,
    pub k: Vec<usize>,
    pub c: Vec<f64>,
    pub n: Option<usize>,
    /// Exact edge count; overrides floor(c·n), and then `c` is ignored.
    pub m: Option<usize>,
    pub trials: usize,
    pub base_seed: u64,
    /// Longest loose cycle counted.
    pub max_len: usize,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
    pub workers: Option<usize>,
    /// Cycles: draw from the planted model instead of H'.
    pub planted: bool,
    /// Frozen: largest stripping round a certificate may start from.
    pub depth_budget: usize,
    /// Frozen: largest ℓ for the exact monotonicity check at oracle scale.
    pub ell_max: usize,
    /// Frozen: instances with n at most this also run the exact oracle.
    pub oracle_max_n: usize,
    pub landscape: Option<LandscapeSettings>,
    /// Guard on n × trials × grid points.
    pub max_work: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            kind: ExperimentKind::Thresholds,
            q: vec![3],
            k: vec![3],
            c: vec![1.0],
            n: None,
            m: None,
            trials: 1,
            base_seed: 1,
            max_len: 3,
            out: None,
            format: OutputFormat::Csv,
            workers: None,
            planted: false,
            depth_budget: 6,
            ell_max: 2,
            oracle_max_n: 12,
            landscape: None,
            max_work: 20_000_000_000,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.q.is_empty() || self.k.is_empty() || (self.c.is_empty() && self.m.is_none()) {
            return Err(Error::params("parameter grid is empty"));
        }
        if self.trials == 0 {
            return Err(Error::params("trials must be at least 1"));
        }
        if self.kind != ExperimentKind::Thresholds && self.kind != ExperimentKind::Moments && self.n.is_none() {
            return Err(Error::params(format!("{} needs --n", self.kind.name())));
        }
        if self.max_len < 2 && self.kind == ExperimentKind::Cycles {
            return Err(Error::params("max_len must be at least 2"));
        }
        if self.workers == Some(0) {
            return Err(Error::params("workers must be at least 1"));
        }
        Ok(())
    }

    /// Grid points sorted by (q, k, c), duplicates removed.
    pub fn grid(&self) -> Result<Vec<ModelParams>> {
        self.validate()?;
        let mut out = Vec::new();
        for &q in &self.q {
            for &k in &self.k {
                match (self.n, self.m) {
                    (Some(n), Some(m)) => out.push(ModelParams::with_edges(q, k, n, m)?),
                    (n, _) => {
                        for &c in &self.c {
                            out.push(match n {
                                Some(n) => ModelParams::with_n(q, k, c, n)?,
                                None => ModelParams::new(q, k, c)?,
                            });
                        }
                    }
                }
            }
        }
        out.sort_by(|a, b| (a.q, a.k).cmp(&(b.q, b.k)).then(a.c.total_cmp(&b.c)));
        out.dedup_by(|a, b| a.q == b.q && a.k == b.k && a.c == b.c);
        Ok(out)
    }

    fn check_work(&self, points: usize) -> Result<()> {
        let work = self.n.unwrap_or(1) as u128 * self.trials as u128 * points as u128;
        if work > self.max_work as u128 {
            return Err(Error::ResourceGuard(format!("n x trials x points = {work} exceeds max_work = {}", self.max_work)));
        }
        Ok(())
    }
}

/// One trial: parameters, seed and measured values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub kind: ExperimentKind,
    pub q: u16,
    pub k: usize,
    pub c: f64,
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub seed: u64,
    pub planted: bool,
    pub values: BTreeMap<String, f64>,
}

impl TrialRecord {
    fn new(kind: ExperimentKind, p: &ModelParams, seed: u64, planted: bool) -> Self {
        TrialRecord { kind, q: p.q, k: p.k, c: p.c, n: p.n, m: p.m().ok(), seed, planted, values: BTreeMap::new() }
    }

    fn set(&mut self, key: &str, v: f64) {
        self.values.insert(key.to_string(), v);
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.values.get(key).copied()
    }
}

/// Aggregate over the trials of one grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub q: u16,
    pub k: usize,
    pub c: f64,
    pub n: Option<usize>,
    pub metric: String,
    pub count: usize,
    pub mean: f64,
    pub se: f64,
    pub values: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentOutput {
    pub format_version: u32,
    pub config: ExperimentConfig,
    pub records: Vec<TrialRecord>,
    pub summaries: Vec<Summary>,
}

pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Pearson correlation; NaN when either side is constant.
pub fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let (ma, _) = mean_se(a);
    let (mb, _) = mean_se(b);
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

fn summary(p: &ModelParams, metric: &str, xs: &[f64]) -> Summary {
    let (mean, se) = mean_se(xs);
    Summary { q: p.q, k: p.k, c: p.c, n: p.n, metric: metric.to_string(), count: xs.len(), mean, se, values: BTreeMap::new() }
}

fn column(records: &[TrialRecord], key: &str) -> Vec<f64> {
    records.iter().filter_map(|r| r.get(key)).collect()
}

fn planted_instance(p: &ModelParams, seed: u64) -> Result<(Hypergraph, Colouring)> {
    let n = p.require_n()?;
    let m = p.m()?;
    let sigma = sample_planted_map(n, p.q, p.k, m, seed)?;
    let h = gen_planted(p, &sigma, seed)?;
    Ok((h, sigma))
}

/// Runs one trial of `config.kind` at `p` with `seed`. Replaying a record
/// means calling this with the record's parameters and seed.
pub fn run_trial(config: &ExperimentConfig, p: &ModelParams, seed: u64) -> Result<TrialRecord> {
    let mut rec = TrialRecord::new(config.kind, p, seed, config.planted);
    match config.kind {
        ExperimentKind::Thresholds | ExperimentKind::Moments => {
            return Err(Error::params(format!("{} has no random trials", config.kind.name())));
        }
        ExperimentKind::Cycles => {
            let h = if config.planted { planted_instance(p, seed)?.0 } else { gen_multi(p, seed)? };
            let census = count_loose_cycles(&h, config.max_len)?;
            for (ell, count) in census.iter() {
                rec.set(&format!("c{ell}"), count as f64);
            }
        }
        ExperimentKind::Core => {
            let (h, sigma) = planted_instance(p, seed)?;
            let trace = extract_core(&h, &sigma)?;
            rec.set("core_fraction", trace.core_fraction());
            rec.set("core_size", trace.core.len() as f64);
            rec.set("rounds", trace.rounds.len() as f64);
            rec.set("surviving_edges", trace.surviving_edges.len() as f64);
        }
        ExperimentKind::Frozen => {
            let (h, sigma) = planted_instance(p, seed)?;
            frozen_trial(config, &h, &sigma, &mut rec)?;
        }
        ExperimentKind::Oracle => {
            let h = gen_multi(p, seed)?;
            rec.set("z", count_colourings_exact(&h, p.q)? as f64);
        }
    }
    Ok(rec)
}

fn frozen_trial(config: &ExperimentConfig, h: &Hypergraph, sigma: &Colouring, rec: &mut TrialRecord) -> Result<()> {
    let trace = extract_core(h, sigma)?;
    let outside: Vec<Vertex> = (0..h.n() as Vertex).filter(|&v| !trace.in_core(v)).collect();
    let mut certified = Vec::new();
    for &v in &outside {
        if let Some(seq) = recolouring_certificate_with_trace(h, sigma, &trace, v, config.depth_budget)? {
            seq.validate_steps(h, sigma)?;
            certified.push(v);
        }
    }
    rec.set("core_size", trace.core.len() as f64);
    rec.set("non_core", outside.len() as f64);
    rec.set("certified", certified.len() as f64);
    let frac = if outside.is_empty() { 1.0 } else { certified.len() as f64 / outside.len() as f64 };
    rec.set("certified_fraction", frac);
    if h.n() <= config.oracle_max_n {
        let mut sets = Vec::new();
        for ell in 1..=config.ell_max.max(1) {
            sets.push(frozen_set_exact(h, sigma, ell)?);
        }
        let contradictions = certified.iter().filter(|&&v| sets[0][v as usize]).count();
        let frozen1 = sets[0].iter().filter(|&&b| b).count();
        // frozen for ℓ+1 must imply frozen for ℓ
        let monotonicity = sets
            .windows(2)
            .map(|w| (0..h.n()).filter(|&v| w[1][v] && !w[0][v]).count())
            .sum::<usize>();
        rec.set("oracle_frozen_1", frozen1 as f64);
        rec.set("contradictions", contradictions as f64);
        rec.set("monotonicity_violations", monotonicity as f64);
    }
    Ok(())
}

fn thread_pool(workers: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        b = b.num_threads(w);
    }
    b.build().map_err(|e| Error::ResourceGuard(format!("cannot start worker pool: {e}")))
}

fn run_trials(config: &ExperimentConfig, grid: &[ModelParams]) -> Result<Vec<TrialRecord>> {
    config.check_work(grid.len())?;
    let jobs: Vec<(ModelParams, u64)> = grid
        .iter()
        .flat_map(|p| (0..config.trials as u64).map(move |t| (*p, config.base_seed.wrapping_add(t))))
        .collect();
    let pool = thread_pool(config.workers)?;
    let mut records: Vec<TrialRecord> =
        pool.install(|| jobs.par_iter().map(|(p, seed)| run_trial(config, p, *seed)).collect::<Result<_>>())?;
    records.sort_by(|a, b| (a.q, a.k).cmp(&(b.q, b.k)).then(a.c.total_cmp(&b.c)).then(a.seed.cmp(&b.seed)));
    Ok(records)
}

fn per_point(records: &[TrialRecord], p: &ModelParams) -> Vec<TrialRecord> {
    records.iter().filter(|r| r.q == p.q && r.k == p.k && r.c == p.c).cloned().collect()
}

pub fn run_thresholds(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    config.validate()?;
    let mut qk: Vec<(u16, usize)> = config.q.iter().flat_map(|&q| config.k.iter().map(move |&k| (q, k))).collect();
    qk.sort();
    qk.dedup();
    let mut records = Vec::new();
    for (q, k) in qk {
        let t = threshold_report(q, k)?;
        let p = ModelParams::new(q, k, t.c_r_exact)?;
        let mut rec = TrialRecord::new(ExperimentKind::Thresholds, &p, 0, false);
        rec.c = 0.0;
        rec.set("x", thresholds::x_of(q, k));
        rec.set("lambda_r", t.lambda_r);
        rec.set("lambda_r_lambert", t.lambda_r_lambert);
        rec.set("alpha_r", t.alpha_r);
        rec.set("c_r", t.c_r_exact);
        rec.set("c_r_asymptotic", t.c_r_asymptotic);
        rec.set("c_cond", t.c_cond);
        rec.set("first_regime_bound", t.first_regime_bound);
        rec.set("rho_r", t.rho_r);
        records.push(rec);
    }
    Ok(ExperimentOutput { format_version: FORMAT_VERSION, config: config.clone(), records, summaries: Vec::new() })
}

pub fn run_cycles(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    let grid = config.grid()?;
    if config.trials < MIN_FIT_SAMPLES {
        return Err(Error::params(format!("the Poisson fit needs at least {MIN_FIT_SAMPLES} trials")));
    }
    let records = run_trials(config, &grid)?;
    let mut summaries = Vec::new();
    for p in &grid {
        let rs = per_point(&records, p);
        for pp in poisson_params(p, config.max_len) {
            let key = format!("c{}", pp.ell);
            let xs = column(&rs, &key);
            let mut s = summary(p, &key, &xs);
            let expected = if config.planted { pp.mu } else { pp.lambda };
            s.values.insert("expected".into(), expected);
            s.values.insert("lambda".into(), pp.lambda);
            s.values.insert("mu".into(), pp.mu);
            let counts: Vec<u64> = xs.iter().map(|&x| x as u64).collect();
            if let Ok(fit) = poisson_fit(&counts, expected) {
                s.values.insert("chi2".into(), fit.chi2);
                s.values.insert("dof".into(), fit.dof as f64);
                s.values.insert("p".into(), fit.p);
            }
            summaries.push(s);
        }
        if config.max_len >= 3 {
            let r = correlation(&column(&rs, "c2"), &column(&rs, "c3"));
            let mut s = summary(p, "corr_c2_c3", &[r]);
            s.se = f64::NAN;
            summaries.push(s);
        }
    }
    Ok(ExperimentOutput { format_version: FORMAT_VERSION, config: config.clone(), records, summaries })
}

pub fn run_core(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    let grid = config.grid()?;
    let records = run_trials(config, &grid)?;
    let mut summaries = Vec::new();
    for p in &grid {
        let rs = per_point(&records, p);
        let mut s = summary(p, "core_fraction", &column(&rs, "core_fraction"));
        let fp = fixed_point(p)?;
        s.values.insert("upsilon".into(), fp.upsilon);
        s.values.insert("c_r".into(), thresholds::c_r(p.q, p.k)?);
        summaries.push(s);
        summaries.push(summary(p, "rounds", &column(&rs, "rounds")));
    }
    Ok(ExperimentOutput { format_version: FORMAT_VERSION, config: config.clone(), records, summaries })
}

pub fn run_frozen(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    let grid = config.grid()?;
    let records = run_trials(config, &grid)?;
    let mut summaries = Vec::new();
    for p in &grid {
        let rs = per_point(&records, p);
        let non_core: f64 = column(&rs, "non_core").iter().sum();
        let certified: f64 = column(&rs, "certified").iter().sum();
        let mut s = summary(p, "certified_fraction", &column(&rs, "certified_fraction"));
        s.values.insert("pooled".into(), if non_core > 0.0 { certified / non_core } else { 1.0 });
        summaries.push(s);
        for key in ["contradictions", "monotonicity_violations"] {
            let xs = column(&rs, key);
            if !xs.is_empty() {
                let mut s = summary(p, key, &xs);
                s.values.insert("total".into(), xs.iter().sum());
                summaries.push(s);
            }
        }
    }
    Ok(ExperimentOutput { format_version: FORMAT_VERSION, config: config.clone(), records, summaries })
}

pub fn run_moments(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    let grid = config.grid()?;
    let mut records = Vec::new();
    for p in &grid {
        let mf = MomentFunctions::new(p);
        let mut rec = TrialRecord::new(ExperimentKind::Moments, p, config.base_seed, false);
        rec.set("f_bar", mf.f_bar);
        rec.set("quad_coeff", mf.quad_coeff);
        rec.set("psi", mf.psi);
        rec.set("gamma", mf.gamma);
        rec.set("kappa", mf.kappa);
        if mf.psi > 0.0 {
            rec.set("second_moment_ratio", second_moment_ratio(p)?);
        }
        if let Some(settings) = &config.landscape {
            let s = LandscapeSettings { seed: config.base_seed, ..settings.clone() };
            let rep = landscape_scan(p, &s)?;
            rec.set("landscape_evaluated", rep.evaluated as f64);
            rec.set("landscape_max_diff", rep.max_diff);
            rec.set("landscape_sinkhorn_failures", rep.sinkhorn_failures as f64);
            if rep.bound_checked {
                rec.set("bound_violations", rep.bound_violations as f64);
                rec.set("bound_min_slack", rep.bound_min_slack);
            }
        }
        records.push(rec);
    }
    Ok(ExperimentOutput { format_version: FORMAT_VERSION, config: config.clone(), records, summaries: Vec::new() })
}

pub fn run_oracle(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    let grid = config.grid()?;
    for p in &grid {
        if p.require_n()? > 40 {
            return Err(Error::ResourceGuard("oracle runs need n <= 40".into()));
        }
    }
    let records = run_trials(config, &grid)?;
    let mut summaries = Vec::new();
    for p in &grid {
        let rs = per_point(&records, p);
        let mut s = summary(p, "z", &column(&rs, "z"));
        let exact = first_moment_exact_log(p.q, p.k, p.require_n()?, p.m()?)?.exp();
        s.values.insert("exact_mean".into(), exact);
        s.values.insert("z_score".into(), (s.mean - exact) / s.se);
        summaries.push(s);
    }
    Ok(ExperimentOutput { format_version: FORMAT_VERSION, config: config.clone(), records, summaries })
}

pub fn run(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    match config.kind {
        ExperimentKind::Thresholds => run_thresholds(config),
        ExperimentKind::Cycles => run_cycles(config),
        ExperimentKind::Core => run_core(config),
        ExperimentKind::Frozen => run_frozen(config),
        ExperimentKind::Moments => run_moments(config),
        ExperimentKind::Oracle => run_oracle(config),
    }
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl ExperimentOutput {
    /// Records as CSV, preceded by a `#` line with the schema and format version.
    pub fn write_records_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# hypercol {} schema={FORMAT_VERSION}", self.config.kind.name())?;
        let keys: Vec<String> = {
            let mut ks: Vec<String> = self.records.iter().flat_map(|r| r.values.keys().cloned()).collect();
            ks.sort();
            ks.dedup();
            ks
        };
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<String> = ["kind", "q", "k", "c", "n", "m", "seed", "planted"].iter().map(|s| s.to_string()).collect();
        header.extend(keys.iter().cloned());
        w.write_record(&header)?;
        for r in &self.records {
            let mut row = vec![
                r.kind.name().to_string(),
                r.q.to_string(),
                r.k.to_string(),
                r.c.to_string(),
                opt(r.n),
                opt(r.m),
                r.seed.to_string(),
                r.planted.to_string(),
            ];
            row.extend(keys.iter().map(|key| opt(r.get(key))));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_summaries_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# hypercol {} summary schema={FORMAT_VERSION}", self.config.kind.name())?;
        let mut keys: Vec<String> = self.summaries.iter().flat_map(|s| s.values.keys().cloned()).collect();
        keys.sort();
        keys.dedup();
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<String> = ["q", "k", "c", "n", "metric", "count", "mean", "se"].iter().map(|s| s.to_string()).collect();
        header.extend(keys.iter().cloned());
        w.write_record(&header)?;
        for s in &self.summaries {
            let mut row = vec![
                s.q.to_string(),
                s.k.to_string(),
                s.c.to_string(),
                opt(s.n),
                s.metric.clone(),
                s.count.to_string(),
                s.mean.to_string(),
                s.se.to_string(),
            ];
            row.extend(keys.iter().map(|key| opt(s.values.get(key))));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_json<W: Write>(&self, mut out: W) -> Result<()> {
        serde_json::to_writer_pretty(&mut out, self)?;
        writeln!(out)?;
        Ok(())
    }

    /// Writes to `config.out` (or stdout). CSV output with summaries also
    /// writes `<stem>.summary.csv` next to the records file.
    pub fn write(&self) -> Result<()> {
        match &self.config.out {
            None => {
                let stdout = std::io::stdout();
                let mut lock = stdout.lock();
                match self.config.format {
                    OutputFormat::Json => self.write_json(&mut lock),
                    OutputFormat::Csv => {
                        self.write_records_csv(&mut lock)?;
                        if !self.summaries.is_empty() {
                            self.write_summaries_csv(&mut lock)?;
                        }
                        Ok(())
                    }
                }
            }
            Some(path) => self.write_to(path),
        }
    }

    pub fn write_to(&self, path: &Path) -> Result<()> {
        let file = BufWriter::new(File::create(path)?);
        match self.config.format {
            OutputFormat::Json => self.write_json(file),
            OutputFormat::Csv => {
                self.write_records_csv(file)?;
                if !self.summaries.is_empty() {
                    let summary_path = summary_path(path);
                    self.write_summaries_csv(BufWriter::new(File::create(summary_path)?))?;
                }
                Ok(())
            }
        }
    }

    pub fn summary(&self, q: u16, k: usize, c: f64, metric: &str) -> Option<&Summary> {
        self.summaries.iter().find(|s| s.q == q && s.k == k && s.c == c && s.metric == metric)
    }
}

pub fn summary_path(path: &Path) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.summary.csv"))
}
