//! TOML experiment files.
//!
//! ```toml
//! [system]
//! files = 1000            # library size
//! descriptions = 200      # descriptions per file
//! description_bits = 1    # bits per description
//! gamma = 4.0             # slot length in channel uses per file bit
//! receivers = 30
//! seed = 1
//!
//! [channels]
//! rates = [0.5, 0.75, 0.25]   # or: links = [{ kind = "bec", epsilon = 0.25 }]
//! assignment = "round-robin"  # or "random"
//! backoff = 1.0               # links only: rate = backoff * capacity
//!
//! [demand]
//! zipf = 0.2                  # or: pmf = [...]
//!
//! [caching]
//! kind = "proportional"       # or "uniform-cutoff" (optional cutoff) or "explicit" (p = [...])
//!
//! [experiment]
//! schemes = ["RAP-CA-HgC", "RAP-CA-HgC-Dinf", "RAP-SSC-CC", "LFU-CC", "O-LFU"]
//! sweep = [0, 50, 100, 150, 200]
//! trials = 100
//! growth = "greedy"           # or "fill-on-join"
//! schedule = "expectation"    # or "per-realization"
//! execution = "parallel"      # or "sequential"
//! ```
//!
//! Rates and links are assigned to receivers cyclically in list order, or
//! drawn uniformly from the list with `assignment = "random"`. A bare rate is
//! modeled as an erasure channel whose capacity equals that rate.

use rand::Rng;
use serde::Deserialize;

use crate::coloring::Growth;
use crate::error::{Error, Result};
use crate::experiment::{CachingSpec, ExperimentSpec, Scheme};
use crate::model::{zipf_demand, ChannelKind, ChannelModel, ReceiverChannel, SystemConfig};
use crate::par::Execution;
use crate::rng::{Component, Streams};
use crate::schedule::ScheduleMode;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub system: SystemConfig,
    pub channels: ChannelSection,
    pub demand: DemandSection,
    #[serde(default)]
    pub caching: CachingSpec,
    #[serde(default)]
    pub experiment: ExperimentSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Assignment {
    #[default]
    RoundRobin,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Link {
    pub kind: ChannelKind,
    pub epsilon: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSection {
    pub rates: Option<Vec<f64>>,
    pub links: Option<Vec<Link>>,
    #[serde(default)]
    pub assignment: Assignment,
    pub backoff: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemandSection {
    pub zipf: Option<f64>,
    pub pmf: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentSection {
    pub schemes: Vec<String>,
    pub sweep: Vec<f64>,
    pub trials: u64,
    pub growth: Growth,
    pub schedule: ScheduleMode,
    pub execution: Execution,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        Self {
            schemes: Scheme::ALL.iter().map(|s| s.label().to_string()).collect(),
            sweep: vec![0.0, 50.0, 100.0, 150.0, 200.0],
            trials: 100,
            growth: Growth::default(),
            schedule: ScheduleMode::default(),
            execution: Execution::default(),
        }
    }
}

/// The three rates used in the reference experiments, assigned cyclically.
pub const REFERENCE_RATES: [f64; 3] = [0.5, 0.75, 0.25];

pub fn parse_config(text: &str) -> Result<ConfigFile> {
    toml::from_str(text).map_err(|e| Error::config(e.to_string()))
}

pub fn load_spec(text: &str) -> Result<ExperimentSpec> {
    parse_config(text)?.into_spec()
}

impl ConfigFile {
    pub fn into_spec(self) -> Result<ExperimentSpec> {
        let system = self.system;
        system.validate()?;
        let channels = self.channels.build(system.receivers, system.seed)?;
        let demand = match (self.demand.zipf, self.demand.pmf) {
            (Some(alpha), None) => zipf_demand(system.files, alpha).map_err(|e| Error::config(e.to_string()))?,
            (None, Some(pmf)) => pmf,
            _ => return Err(Error::config("demand needs exactly one of 'zipf' or 'pmf'")),
        };
        let schemes = self.experiment.schemes.iter().map(|s| s.parse()).collect::<Result<Vec<Scheme>>>()?;
        let spec = ExperimentSpec {
            system,
            channels,
            demand,
            caching: self.caching,
            sweep: self.experiment.sweep,
            schemes,
            trials: self.experiment.trials,
            growth: self.experiment.growth,
            schedule: self.experiment.schedule,
            execution: self.experiment.execution,
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl ChannelSection {
    /// Receiver channels in receiver order.
    pub fn build(&self, receivers: usize, seed: u64) -> Result<Vec<ReceiverChannel>> {
        let options: Vec<(ChannelModel, Option<f64>)> = match (&self.rates, &self.links) {
            (Some(rates), None) => {
                if self.backoff.is_some() {
                    return Err(Error::config("'backoff' applies to links, not to bare rates"));
                }
                rates
                    .iter()
                    .map(|&r| {
                        if !(0.0..=1.0).contains(&r) {
                            return Err(Error::config(format!("rate {r} outside [0, 1]")));
                        }
                        Ok((ChannelModel::bec(1.0 - r)?, Some(r)))
                    })
                    .collect::<Result<_>>()?
            }
            (None, Some(links)) => {
                links.iter().map(|l| Ok((ChannelModel::new(l.kind, l.epsilon)?, None))).collect::<Result<_>>()?
            }
            _ => return Err(Error::config("channels need exactly one of 'rates' or 'links'")),
        };
        if options.is_empty() {
            return Err(Error::config("channel list is empty"));
        }
        let mut rng = Streams::new(seed).stream(Component::RateAssignment, 0);
        (0..receivers)
            .map(|u| {
                let k = match self.assignment {
                    Assignment::RoundRobin => u % options.len(),
                    Assignment::Random => rng.gen_range(0..options.len()),
                };
                let (model, rate) = options[k];
                let ch = match rate {
                    Some(r) => ReceiverChannel::with_rate(u, model, r),
                    None => ReceiverChannel::at_capacity(u, model, self.backoff.unwrap_or(1.0)),
                };
                ch.map_err(|e| Error::config(e.to_string()))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const REFERENCE: &str = r#"
[system]
files = 1000
descriptions = 200
description_bits = 1
gamma = 1.0
receivers = 30
seed = 1

[channels]
rates = [0.5, 0.75, 0.25]

[demand]
zipf = 0.2
"#;

    #[test]
    fn reference_config() {
        let spec = load_spec(REFERENCE).unwrap();
        assert_eq!(spec.channels.len(), 30);
        assert_eq!(spec.eta()[..4], [0.5, 0.75, 0.25, 0.5]);
        assert_eq!(spec.schemes.len(), 5);
        assert_eq!(spec.sweep, vec![0.0, 50.0, 100.0, 150.0, 200.0]);
        assert_eq!(spec.trials, 100);
        assert_eq!(spec.caching, CachingSpec::Proportional);
        assert!((spec.channels[2].model.capacity() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn links_with_backoff() {
        let text = REFERENCE
            .replace("rates = [0.5, 0.75, 0.25]", "links = [{ kind = \"bec\", epsilon = 0.2 }]\nbackoff = 0.5");
        let spec = load_spec(&text).unwrap();
        assert!((spec.channels[7].eta - 0.4).abs() < 1e-12);
    }

    #[test]
    fn random_assignment_is_seeded() {
        let text = REFERENCE.replace("rates = [0.5, 0.75, 0.25]", "rates = [0.5, 0.75, 0.25]\nassignment = \"random\"");
        let a = load_spec(&text).unwrap().eta();
        let b = load_spec(&text).unwrap().eta();
        assert_eq!(a, b);
        assert!(a.iter().all(|r| REFERENCE_RATES.contains(r)));
    }

    #[test]
    fn caching_variants() {
        let cut = format!("{REFERENCE}\n[caching]\nkind = \"uniform-cutoff\"\ncutoff = 400\n");
        assert_eq!(load_spec(&cut).unwrap().caching, CachingSpec::UniformCutoff { cutoff: Some(400) });
        let search = format!("{REFERENCE}\n[caching]\nkind = \"uniform-cutoff\"\n");
        assert_eq!(load_spec(&search).unwrap().caching, CachingSpec::UniformCutoff { cutoff: None });
    }

    #[test]
    fn config_errors() {
        let cases = [
            REFERENCE.replace("files = 1000", "files = 0"),
            REFERENCE.replace("zipf = 0.2", ""),
            REFERENCE.replace("rates = [0.5, 0.75, 0.25]", "rates = [1.5]"),
            format!("{REFERENCE}\n[experiment]\nsweep = [0, 2000]\n"),
            format!("{REFERENCE}\n[experiment]\nsweep = [50, 10]\n"),
            format!("{REFERENCE}\n[experiment]\ntrials = 0\n"),
            format!("{REFERENCE}\n[experiment]\nschemes = [\"nope\"]\n"),
            format!("{REFERENCE}\nunknown = 3\n"),
            "not toml [".to_string(),
        ];
        for text in cases {
            let e = load_spec(&text).unwrap_err();
            assert!(e.is_config(), "{e}");
        }
    }
}
