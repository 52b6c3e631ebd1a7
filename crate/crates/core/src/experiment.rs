//! Monte Carlo experiments: the channel-aware scheme, its infinite-packet
//! limit and three baselines, swept over the cache size.
//!
//! Every scheme is scored with the same load: channel uses spent divided by
//! the bits of requested content made available to the receivers. Content
//! counts whether it crossed the channel or was already cached, but for the
//! slot-limited schemes only cached descriptions inside the delivered prefix
//! of the file count. With full delivery and equal rates this reduces to
//! `psi / sum(eta)` with `psi` measured in file transmissions.
//!
//! Channel uses per scheme:
//! - `RAP-CA-HgC`: each GIS is a block sized for its slowest member,
//!   `max_u s_u * B / eta_u`.
//! - `RAP-SSC-CC`: equal description counts, classical coloring (one packet
//!   per receiver and color), every color sent at the worst rate.
//! - `LFU-CC`: the union of uncached requested content sent uncoded at the
//!   worst rate.
//! - `O-LFU`: each receiver's uncached content unicast at its own rate.
//! - `RAP-CA-HgC-Dinf`: the analytic `E[psi] / sum(eta)`, no simulation.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::analytics::{
    best_cutoff, expected_psi, psi_realization, rates, ExpectedPsi, PsiMode, RhoMode, SymmetricParams,
    EXACT_PSI_MAX_RECEIVERS,
};
use crate::cache::{
    lfu_place, proportional_distribution, rap_place, uniform_cutoff_distribution, CacheRealization, CachingDistribution,
};
use crate::coloring::{ca_hgc, channel_uses, Growth};
use crate::error::{Error, Result};
use crate::graph::ConflictGraph;
use crate::model::{sample_requests, DemandModel, ReceiverChannel, RequestVector, SystemConfig};
use crate::par::{try_map_indexed, Execution};
use crate::rng::{Component, StreamRng, Streams};
use crate::schedule::{schedule, Schedule, ScheduleMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Scheme {
    #[serde(rename = "rap-ca-hgc")]
    RapCaHgc,
    #[serde(rename = "rap-ca-hgc-dinf")]
    RapCaHgcDinf,
    #[serde(rename = "rap-ssc-cc")]
    RapSscCc,
    #[serde(rename = "lfu-cc")]
    LfuCc,
    #[serde(rename = "o-lfu")]
    OLfu,
}

impl Scheme {
    pub const ALL: [Scheme; 5] =
        [Scheme::RapCaHgcDinf, Scheme::RapCaHgc, Scheme::RapSscCc, Scheme::LfuCc, Scheme::OLfu];

    pub fn label(self) -> &'static str {
        match self {
            Scheme::RapCaHgc => "RAP-CA-HgC",
            Scheme::RapCaHgcDinf => "RAP-CA-HgC-Dinf",
            Scheme::RapSscCc => "RAP-SSC-CC",
            Scheme::LfuCc => "LFU-CC",
            Scheme::OLfu => "O-LFU",
        }
    }

    /// Whether the scheme places caches at random.
    pub fn random_placement(self) -> bool {
        matches!(self, Scheme::RapCaHgc | Scheme::RapCaHgcDinf | Scheme::RapSscCc)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|k| k.label().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::config(format!("unknown scheme '{s}'")))
    }
}

/// How the random-placement caching distribution is chosen at each cache size.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CachingSpec {
    /// Proportional to popularity, clipped at `1/M`.
    #[default]
    Proportional,
    /// Uniform over the most popular files; the cutoff is grid-searched when absent.
    UniformCutoff { cutoff: Option<usize> },
    /// A fixed distribution, used at every cache size.
    Explicit { p: Vec<f64> },
}

/// A full experiment: one row per scheme and cache size.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub system: SystemConfig,
    pub channels: Vec<ReceiverChannel>,
    /// Common demand distribution.
    pub demand: Vec<f64>,
    pub caching: CachingSpec,
    /// Cache sizes in files, ascending.
    pub sweep: Vec<f64>,
    pub schemes: Vec<Scheme>,
    pub trials: u64,
    pub growth: Growth,
    pub schedule: ScheduleMode,
    pub execution: Execution,
}

impl ExperimentSpec {
    pub fn eta(&self) -> Vec<f64> {
        self.channels.iter().map(|c| c.eta).collect()
    }

    pub fn validate(&self) -> Result<()> {
        self.system.validate()?;
        let m = self.system.files;
        if self.trials == 0 {
            return Err(Error::config("trials must be at least 1"));
        }
        if self.sweep.is_empty() {
            return Err(Error::config("cache-size sweep is empty"));
        }
        if self.sweep.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::config("cache-size sweep must be strictly ascending"));
        }
        if let Some(mc) = self.sweep.iter().find(|&&mc| !(0.0..=m as f64).contains(&mc)) {
            return Err(Error::config(format!("cache size {mc} outside [0, {m}]")));
        }
        if self.schemes.is_empty() {
            return Err(Error::config("no schemes selected"));
        }
        if self.channels.len() != self.system.receivers {
            return Err(Error::config(format!(
                "{} channels for {} receivers",
                self.channels.len(),
                self.system.receivers
            )));
        }
        if self.demand.len() != m {
            return Err(Error::config(format!("demand has {} entries for {m} files", self.demand.len())));
        }
        crate::model::check_stochastic("demand", &self.demand)?;
        if let CachingSpec::Explicit { p } = &self.caching {
            if p.len() != m {
                return Err(Error::config(format!("caching distribution has {} entries for {m} files", p.len())));
            }
            crate::model::check_stochastic("caching distribution", p)?;
            for &mc in &self.sweep {
                if let Some(x) = p.iter().find(|&&x| x * mc > 1.0 + 1e-12) {
                    return Err(Error::config(format!("caching probability {x} exceeds 1/M at M = {mc}")));
                }
            }
        }
        if let CachingSpec::UniformCutoff { cutoff: Some(c) } = self.caching {
            if c == 0 || c > m || self.sweep.iter().any(|&mc| c as f64 + 1e-12 < mc) {
                return Err(Error::config(format!("cutoff {c} must lie in [max M, {m}]")));
            }
        }
        Ok(())
    }
}

/// Everything fixed at one cache size.
#[derive(Debug, Clone)]
pub struct Point {
    pub cache_files: f64,
    pub params: SymmetricParams,
    pub psi: ExpectedPsi,
    pub dist: CachingDistribution,
    pub demand: DemandModel,
}

/// Caching distribution at cache size `cache_files`.
pub fn caching_distribution(spec: &ExperimentSpec, cache_files: f64) -> Result<Vec<f64>> {
    let q = &spec.demand;
    match &spec.caching {
        CachingSpec::Proportional => proportional_distribution(q, cache_files),
        CachingSpec::Explicit { p } => Ok(p.clone()),
        CachingSpec::UniformCutoff { cutoff: Some(c) } => uniform_cutoff_distribution(q, *c, cache_files),
        CachingSpec::UniformCutoff { cutoff: None } => {
            let m = spec.system.files;
            let lo = (cache_files.ceil() as usize).max(1);
            let step = ((m - lo) / 64).max(1);
            let mut grid: Vec<usize> = (lo..=m).step_by(step).collect();
            grid.push(m);
            let base = SymmetricParams { p: vec![0.0; m], ..base_params(spec, cache_files) };
            let mut rng = Streams::new(spec.system.seed).stream(Component::Estimator, u64::MAX);
            let (c, _) = best_cutoff(&base, &grid, &mut rng)?;
            uniform_cutoff_distribution(q, c, cache_files)
        }
    }
}

fn base_params(spec: &ExperimentSpec, cache_files: f64) -> SymmetricParams {
    SymmetricParams {
        q: spec.demand.clone(),
        p: Vec::new(),
        cache_files,
        eta: spec.eta(),
        gamma: spec.system.gamma,
        descriptions: spec.system.descriptions,
        description_bits: spec.system.description_bits,
    }
}

pub fn prepare_point(spec: &ExperimentSpec, cache_files: f64) -> Result<Point> {
    let p = caching_distribution(spec, cache_files)?;
    let params = SymmetricParams { p: p.clone(), ..base_params(spec, cache_files) };
    let mut rng = Streams::new(spec.system.seed).stream(Component::Estimator, cache_files.to_bits());
    let psi = expected_psi(&params, RhoMode::ClosedForm, &mut rng)?;
    let u_n = spec.system.receivers;
    Ok(Point {
        cache_files,
        dist: CachingDistribution::symmetric(p, cache_files, u_n)?,
        demand: DemandModel::common(spec.demand.clone(), u_n)?,
        params,
        psi,
    })
}

/// Load and per-receiver rates of one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub load: f64,
    /// Requested bits made available per channel use, per receiver.
    pub rates: Vec<f64>,
    pub channel_uses: f64,
}

fn stream(spec: &ExperimentSpec, component: Component, point: &Point, trial: u64) -> StreamRng {
    Streams::new(spec.system.seed).stream2(component, trial, point.cache_files.to_bits())
}

/// Requests of a trial; shared by all schemes at the same point.
pub fn trial_requests(spec: &ExperimentSpec, point: &Point, trial: u64) -> RequestVector {
    sample_requests(&point.demand, &mut stream(spec, Component::Demand, point, trial))
}

/// Random placement of a trial; shared by the random-placement schemes.
pub fn trial_cache(spec: &ExperimentSpec, point: &Point, trial: u64) -> Result<CacheRealization> {
    rap_place(&point.dist, spec.system.descriptions, &mut stream(spec, Component::CachePlacement, point, trial))
}

/// Descriptions of each requested file made available in the slot: the
/// scheduled ones plus cached ones below the last scheduled index.
pub fn covered_descriptions(cache: &CacheRealization, s: &Schedule) -> Vec<usize> {
    s.scheduled
        .packets
        .iter()
        .enumerate()
        .map(|(u, pk)| match pk.last() {
            None => 0,
            Some(&last) => pk.len() + cache.packets(u, s.scheduled.requests[u]).iter().filter(|&&i| i < last).count(),
        })
        .collect()
}

fn outcome(channel_uses: f64, covered_bits: &[f64]) -> TrialOutcome {
    let total: f64 = covered_bits.iter().sum();
    let load = if channel_uses == 0.0 { 0.0 } else { channel_uses / total };
    let rates = covered_bits.iter().map(|&b| if channel_uses > 0.0 { b / channel_uses } else { 0.0 }).collect();
    TrialOutcome { load, rates, channel_uses }
}

fn normalized_length(spec: &ExperimentSpec, point: &Point, requests: &RequestVector, trial: u64) -> Result<f64> {
    match spec.schedule {
        ScheduleMode::Expectation => Ok(point.psi.value),
        ScheduleMode::PerRealization => {
            let mode =
                if spec.system.receivers <= EXACT_PSI_MAX_RECEIVERS { PsiMode::Exact } else { PsiMode::Sampled(4096) };
            let mut rng = stream(spec, Component::Estimator, point, trial);
            Ok(psi_realization(requests, &point.params, mode, &mut rng)?.value)
        }
    }
}

/// One trial of the channel-aware scheme.
pub fn trial_ca(spec: &ExperimentSpec, point: &Point, trial: u64) -> Result<TrialOutcome> {
    let requests = trial_requests(spec, point, trial);
    let cache = trial_cache(spec, point, trial)?;
    let psi = normalized_length(spec, point, &requests, trial)?;
    let u_n = spec.system.receivers;
    if psi <= 0.0 {
        return Ok(outcome(0.0, &vec![0.0; u_n]));
    }
    let eta = spec.eta();
    let bits = spec.system.description_bits;
    let s = schedule(&cache, &requests, &eta, psi, spec.system.slot(), bits as u64, spec.schedule)?;
    let graph = ConflictGraph::build(&cache, &s.scheduled)?;
    let coloring = ca_hgc(&graph, &s.d, spec.growth);
    let covered: Vec<f64> = covered_descriptions(&cache, &s).iter().map(|&c| (c * bits) as f64).collect();
    Ok(outcome(channel_uses(&graph, &coloring, &eta, bits), &covered))
}

/// One trial of separate source-channel coding over the compound channel.
pub fn trial_ssc(spec: &ExperimentSpec, point: &Point, trial: u64) -> Result<TrialOutcome> {
    let requests = trial_requests(spec, point, trial);
    let cache = trial_cache(spec, point, trial)?;
    let psi = normalized_length(spec, point, &requests, trial)?;
    let u_n = spec.system.receivers;
    if psi <= 0.0 {
        return Ok(outcome(0.0, &vec![0.0; u_n]));
    }
    let worst = spec.eta().into_iter().fold(f64::INFINITY, f64::min);
    if worst <= 0.0 {
        return Ok(outcome(f64::INFINITY, &vec![(spec.system.file_bits()) as f64; u_n]));
    }
    let bits = spec.system.description_bits;
    let s = schedule(&cache, &requests, &vec![worst; u_n], psi, spec.system.slot(), bits as u64, spec.schedule)?;
    let graph = ConflictGraph::build(&cache, &s.scheduled)?;
    let coloring = ca_hgc(&graph, &vec![1; u_n], spec.growth);
    let covered: Vec<f64> = covered_descriptions(&cache, &s).iter().map(|&c| (c * bits) as f64).collect();
    Ok(outcome(coloring.len() as f64 * bits as f64 / worst, &covered))
}

/// Uncached bits of each receiver's request under a deterministic placement.
fn uncached_bits(cache: &CacheRealization, requests: &RequestVector, bits: usize) -> Vec<f64> {
    let dn = cache.descriptions();
    (0..requests.receivers()).map(|u| ((dn - cache.count(u, requests.file(u))) * bits) as f64).collect()
}

/// Uncoded multicast of the union of uncached requests at the worst rate.
pub fn trial_lfu_cc(
    spec: &ExperimentSpec,
    point: &Point,
    cache: &CacheRealization,
    trial: u64,
) -> Result<TrialOutcome> {
    let requests = trial_requests(spec, point, trial);
    let eta = spec.eta();
    let worst = eta.iter().copied().fold(f64::INFINITY, f64::min);
    let unc = uncached_bits(cache, &requests, spec.system.description_bits);
    let mut files: Vec<(usize, usize)> = (0..requests.receivers()).map(|u| (requests.file(u), u)).collect();
    files.sort_unstable();
    files.dedup_by_key(|x| x.0);
    let sent: f64 = files.iter().map(|&(_, u)| unc[u]).sum();
    let uses = if sent == 0.0 { 0.0 } else { sent / worst };
    Ok(outcome(uses, &vec![spec.system.file_bits() as f64; eta.len()]))
}

/// Each receiver's uncached request unicast at its own rate.
pub fn trial_olfu(spec: &ExperimentSpec, point: &Point, cache: &CacheRealization, trial: u64) -> Result<TrialOutcome> {
    let requests = trial_requests(spec, point, trial);
    let eta = spec.eta();
    let unc = uncached_bits(cache, &requests, spec.system.description_bits);
    let uses: f64 = unc.iter().zip(&eta).filter(|(&b, _)| b > 0.0).map(|(b, e)| b / e).sum();
    Ok(outcome(uses, &vec![spec.system.file_bits() as f64; eta.len()]))
}

/// Mean and standard error of a sample.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 || !mean.is_finite() {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub scheme: Scheme,
    pub cache_files: f64,
    pub load_mean: f64,
    pub load_se: f64,
    /// Mean per-receiver rates in bits per channel use.
    pub rates: Vec<f64>,
    /// Monte Carlo trials; 0 marks an analytic row.
    pub trials: u64,
    pub wall_time: Duration,
}

/// Run one scheme at one prepared point.
pub fn run_point(spec: &ExperimentSpec, point: &Point, scheme: Scheme) -> Result<ResultRow> {
    let start = Instant::now();
    let row = |load_mean, load_se, rates, trials| ResultRow {
        scheme,
        cache_files: point.cache_files,
        load_mean,
        load_se,
        rates,
        trials,
        wall_time: start.elapsed(),
    };
    if scheme == Scheme::RapCaHgcDinf {
        let report = rates(&point.params, &point.psi)?;
        return Ok(row(report.load, 0.0, report.per_receiver, 0));
    }
    let lfu = match scheme {
        Scheme::LfuCc | Scheme::OLfu => {
            Some(lfu_place(&spec.demand, point.cache_files, spec.system.descriptions, spec.system.receivers)?)
        }
        _ => None,
    };
    let outcomes = try_map_indexed(spec.trials, spec.execution, |t| match scheme {
        Scheme::RapCaHgc => trial_ca(spec, point, t),
        Scheme::RapSscCc => trial_ssc(spec, point, t),
        Scheme::LfuCc => trial_lfu_cc(spec, point, lfu.as_ref().expect("placed"), t),
        Scheme::OLfu => trial_olfu(spec, point, lfu.as_ref().expect("placed"), t),
        Scheme::RapCaHgcDinf => unreachable!(),
    })?;
    let loads: Vec<f64> = outcomes.iter().map(|o| o.load).collect();
    let (mean, se) = mean_se(&loads);
    let u_n = spec.system.receivers;
    let n = outcomes.len() as f64;
    let rates = (0..u_n).map(|u| outcomes.iter().map(|o| o.rates[u]).sum::<f64>() / n).collect();
    Ok(row(mean, se, rates, spec.trials))
}

/// Run every scheme over the sweep. Rows are ordered by scheme, then cache size.
pub fn run_scheme(spec: &ExperimentSpec) -> Result<Vec<ResultRow>> {
    spec.validate()?;
    let points: Vec<Point> = spec.sweep.iter().map(|&mc| prepare_point(spec, mc)).collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for &scheme in &spec.schemes {
        for point in &points {
            rows.push(run_point(spec, point, scheme)?);
        }
    }
    Ok(rows)
}

/// Output flavors of [`emit`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    #[default]
    Csv,
    PlotData,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "plot-data" => Ok(OutputFormat::PlotData),
            _ => Err(Error::config(format!("unknown output format '{s}' (csv or plot-data)"))),
        }
    }
}

/// The columns written to disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub scheme: String,
    #[serde(rename = "M")]
    pub cache_files: f64,
    pub load_mean: f64,
    pub load_se: f64,
    pub trials: u64,
}

impl From<&ResultRow> for CsvRow {
    fn from(r: &ResultRow) -> Self {
        CsvRow {
            scheme: r.scheme.label().into(),
            cache_files: r.cache_files,
            load_mean: r.load_mean,
            load_se: r.load_se,
            trials: r.trials,
        }
    }
}

pub const CSV_HEADER: &str = "scheme,M,load_mean,load_se,trials";

pub fn emit(rows: &[ResultRow], format: OutputFormat) -> Result<String> {
    let rows: Vec<CsvRow> = rows.iter().map(CsvRow::from).collect();
    match format {
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            if rows.is_empty() {
                w.write_record(CSV_HEADER.split(','))?;
            }
            for r in &rows {
                w.serialize(r)?;
            }
            let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
            Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
        }
        OutputFormat::PlotData => Ok(plot_data(&rows)),
    }
}

/// One block per scheme, blocks separated by two blank lines.
fn plot_data(rows: &[CsvRow]) -> String {
    let mut out = String::new();
    let mut schemes: Vec<&str> = Vec::new();
    for r in rows {
        if !schemes.contains(&r.scheme.as_str()) {
            schemes.push(&r.scheme);
        }
    }
    for (i, s) in schemes.iter().enumerate() {
        if i > 0 {
            out.push_str("\n\n");
        }
        out.push_str(&format!("# {s}\n# M load_mean load_se trials\n"));
        for r in rows.iter().filter(|r| r.scheme == *s) {
            out.push_str(&format!("{} {} {} {}\n", r.cache_files, r.load_mean, r.load_se, r.trials));
        }
    }
    out
}

pub fn parse(text: &str, format: OutputFormat) -> Result<Vec<CsvRow>> {
    match format {
        OutputFormat::Csv => {
            let mut r = csv::Reader::from_reader(text.as_bytes());
            let header: Vec<String> = r.headers()?.iter().map(String::from).collect();
            if header.join(",") != CSV_HEADER {
                return Err(Error::Parse { line: 1, msg: format!("expected header '{CSV_HEADER}'") });
            }
            r.deserialize().map(|row| row.map_err(Error::from)).collect()
        }
        OutputFormat::PlotData => parse_plot_data(text),
    }
}

fn parse_plot_data(text: &str) -> Result<Vec<CsvRow>> {
    let mut rows = Vec::new();
    let mut scheme: Option<String> = None;
    for (i, line) in text.lines().enumerate() {
        let bad = |msg: &str| Error::Parse { line: i + 1, msg: msg.into() };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let rest = rest.trim();
            if !rest.starts_with("M ") {
                scheme = Some(rest.to_string());
            }
            continue;
        }
        let s = scheme.clone().ok_or_else(|| bad("data before a scheme heading"))?;
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 4 {
            return Err(bad("expected 4 columns"));
        }
        let num = |x: &str| x.parse::<f64>().map_err(|_| bad("bad number"));
        rows.push(CsvRow {
            scheme: s,
            cache_files: num(f[0])?,
            load_mean: num(f[1])?,
            load_se: num(f[2])?,
            trials: f[3].parse().map_err(|_| bad("bad trial count"))?,
        });
    }
    Ok(rows)
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        let line = e.position().map_or(0, |p| p.line() as usize);
        Error::Parse { line, msg: e.to_string() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{zipf_demand, ChannelModel};

    fn spec(files: usize, receivers: usize, eta: &[f64], sweep: Vec<f64>, trials: u64) -> ExperimentSpec {
        ExperimentSpec {
            system: SystemConfig { files, descriptions: 20, description_bits: 1, gamma: 4.0, receivers, seed: 11 },
            channels: (0..receivers)
                .map(|u| {
                    let r = eta[u % eta.len()];
                    ReceiverChannel::with_rate(u, ChannelModel::bec(1.0 - r).unwrap(), r).unwrap()
                })
                .collect(),
            demand: zipf_demand(files, 0.5).unwrap(),
            caching: CachingSpec::Proportional,
            sweep,
            schemes: Scheme::ALL.to_vec(),
            trials,
            growth: Growth::Greedy,
            schedule: ScheduleMode::Expectation,
            execution: Execution::Parallel,
        }
    }

    fn load(rows: &[ResultRow], scheme: Scheme, mc: f64) -> f64 {
        rows.iter().find(|r| r.scheme == scheme && r.cache_files == mc).unwrap().load_mean
    }

    #[test]
    fn scheme_labels_round_trip() {
        for s in Scheme::ALL {
            assert_eq!(s.label().parse::<Scheme>().unwrap(), s);
        }
        assert!("x".parse::<Scheme>().is_err());
    }

    #[test]
    fn deterministic_rows() {
        let s = spec(10, 4, &REF, vec![0.0, 2.0], 1);
        let a = run_scheme(&s).unwrap();
        let b = run_scheme(&s).unwrap();
        let strip = |rows: Vec<ResultRow>| {
            rows.into_iter().map(|r| (r.scheme, r.cache_files, r.load_mean, r.rates)).collect::<Vec<_>>()
        };
        assert_eq!(strip(a), strip(b));
    }

    const REF: [f64; 3] = [0.5, 0.75, 0.25];

    #[test]
    fn single_receiver_without_cache() {
        // One receiver, nothing cached: every scheme sends the file at rate eta.
        let rows = run_scheme(&spec(5, 1, &[0.5], vec![0.0], 3)).unwrap();
        for r in &rows {
            assert!((r.load_mean - 2.0).abs() < 1e-12, "{} {}", r.scheme, r.load_mean);
        }
    }

    #[test]
    fn zero_cache_equal_rates() {
        let rows = run_scheme(&spec(50, 4, &[0.5], vec![0.0], 40)).unwrap();
        let lfu = load(&rows, Scheme::LfuCc, 0.0);
        let olfu = load(&rows, Scheme::OLfu, 0.0);
        assert!((olfu - 2.0).abs() < 1e-12);
        // Repeated requests only help the multicast baseline.
        assert!(lfu <= olfu);
        let ca = load(&rows, Scheme::RapCaHgc, 0.0);
        let ssc = load(&rows, Scheme::RapSscCc, 0.0);
        assert!((ca - ssc).abs() < 1e-9 * ssc, "{ca} {ssc}");
    }

    #[test]
    fn equal_rates_ca_matches_ssc() {
        let rows = run_scheme(&spec(20, 4, &[0.5], vec![4.0], 40)).unwrap();
        let ca = load(&rows, Scheme::RapCaHgc, 4.0);
        let ssc = load(&rows, Scheme::RapSscCc, 4.0);
        assert!((ca - ssc).abs() <= 0.1 * ssc, "{ca} {ssc}");
    }

    #[test]
    fn full_cache_costs_nothing() {
        let rows = run_scheme(&spec(4, 3, &REF, vec![4.0], 5)).unwrap();
        for r in &rows {
            assert_eq!(r.load_mean, 0.0, "{}", r.scheme);
        }
    }

    #[test]
    fn weak_receiver_hurts_compound_schemes_only() {
        let mut prev = None;
        for worst in [0.25, 0.05, 0.01] {
            let rows = run_scheme(&spec(20, 4, &[0.75, 0.75, 0.75, worst], vec![2.0], 20)).unwrap();
            let lfu = load(&rows, Scheme::LfuCc, 2.0);
            let ca = load(&rows, Scheme::RapCaHgc, 2.0);
            assert!(ca < 2.0 / 0.75, "{ca}");
            if let Some(p) = prev {
                assert!(lfu > 2.0 * p);
            }
            prev = Some(lfu);
        }
    }

    #[test]
    fn loads_fall_with_cache_size() {
        let rows = run_scheme(&spec(40, 6, &REF, vec![0.0, 5.0, 10.0, 20.0], 30)).unwrap();
        for s in Scheme::ALL {
            let l: Vec<f64> = [0.0, 5.0, 10.0, 20.0].iter().map(|&m| load(&rows, s, m)).collect();
            assert!(l.windows(2).all(|w| w[1] <= w[0] + 1e-12), "{s}: {l:?}");
        }
    }

    #[test]
    fn config_errors_before_trials() {
        let mut s = spec(10, 2, &REF, vec![0.0, 11.0], 1);
        assert!(run_scheme(&s).unwrap_err().is_config());
        s.sweep = vec![];
        assert!(run_scheme(&s).unwrap_err().is_config());
        s.sweep = vec![1.0];
        s.trials = 0;
        assert!(run_scheme(&s).unwrap_err().is_config());
    }

    #[test]
    fn sequential_matches_parallel() {
        let mut s = spec(20, 4, &REF, vec![3.0], 8);
        let a = run_scheme(&s).unwrap();
        s.execution = Execution::Sequential;
        let b = run_scheme(&s).unwrap();
        assert_eq!(emit(&a, OutputFormat::Csv).unwrap(), emit(&b, OutputFormat::Csv).unwrap());
    }

    #[test]
    fn output_round_trips() {
        let rows = run_scheme(&spec(10, 3, &REF, vec![0.0, 1.5], 4)).unwrap();
        for format in [OutputFormat::Csv, OutputFormat::PlotData] {
            let text = emit(&rows, format).unwrap();
            let back = parse(&text, format).unwrap();
            let want: Vec<CsvRow> = rows.iter().map(CsvRow::from).collect();
            assert_eq!(back, want);
            assert_eq!(text, emit(&rows, format).unwrap());
        }
        let csv = emit(&rows, OutputFormat::Csv).unwrap();
        assert_eq!(csv.lines().next().unwrap(), CSV_HEADER);
        let plot = emit(&rows, OutputFormat::PlotData).unwrap();
        assert_eq!(plot.matches("# M ").count(), 5);
        assert!(parse("a,b\n1,2\n", OutputFormat::Csv).is_err());
    }
}
