//! System parameters, channel models and the demand model.
//!
//! File, packet and receiver indices are zero-based in the API. Text formats
//! and the CLI print them one-based.

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for "sums to one" checks on probability vectors.
pub const STOCHASTIC_TOL: f64 = 1e-12;

/// Binary entropy in bits, with `H(0) = H(1) = 0`.
pub fn binary_entropy(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    -x * x.log2() - (1.0 - x) * (1.0 - x).log2()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelKind {
    Bsc,
    Bec,
}

/// A binary symmetric or binary erasure channel with degradation `epsilon`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelModel {
    pub kind: ChannelKind,
    pub epsilon: f64,
}

impl ChannelModel {
    pub fn new(kind: ChannelKind, epsilon: f64) -> Result<Self> {
        check_probability("epsilon", epsilon)?;
        Ok(Self { kind, epsilon })
    }

    pub fn bsc(epsilon: f64) -> Result<Self> {
        Self::new(ChannelKind::Bsc, epsilon)
    }

    pub fn bec(epsilon: f64) -> Result<Self> {
        Self::new(ChannelKind::Bec, epsilon)
    }

    /// Capacity in bits per channel use.
    pub fn capacity(&self) -> f64 {
        match self.kind {
            ChannelKind::Bsc => 1.0 - binary_entropy(self.epsilon),
            ChannelKind::Bec => 1.0 - self.epsilon,
        }
    }
}

/// Capacity bound of a channel: `1 - H2(eps)` for the BSC, `1 - eps` for the BEC.
pub fn channel_rate(kind: ChannelKind, epsilon: f64) -> Result<f64> {
    Ok(ChannelModel::new(kind, epsilon)?.capacity())
}

/// The channel seen by one receiver together with the rate it is served at.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReceiverChannel {
    pub receiver: usize,
    pub model: ChannelModel,
    pub eta: f64,
}

impl ReceiverChannel {
    /// Serve the receiver at `backoff * capacity`. A backoff of 1 runs at capacity.
    pub fn at_capacity(receiver: usize, model: ChannelModel, backoff: f64) -> Result<Self> {
        if !(backoff > 0.0 && backoff <= 1.0) {
            return Err(Error::domain(format!("backoff {backoff} outside (0, 1]")));
        }
        Ok(Self { receiver, model, eta: backoff * model.capacity() })
    }

    /// Serve the receiver at an explicit rate, which must not exceed capacity.
    pub fn with_rate(receiver: usize, model: ChannelModel, eta: f64) -> Result<Self> {
        if !(eta >= 0.0) || eta > model.capacity() + 1e-12 {
            return Err(Error::domain(format!(
                "rate {eta} for receiver {} exceeds capacity {}",
                receiver + 1,
                model.capacity()
            )));
        }
        Ok(Self { receiver, model, eta })
    }
}

/// Library and network dimensions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    /// Number of files in the library.
    pub files: usize,
    /// Descriptions (packets) per file.
    pub descriptions: usize,
    /// Bits per description.
    pub description_bits: usize,
    /// Slot duration in channel uses per file bit.
    pub gamma: f64,
    pub receivers: usize,
    pub seed: u64,
}

impl SystemConfig {
    pub fn validate(&self) -> Result<()> {
        if self.files == 0 || self.descriptions == 0 || self.description_bits == 0 || self.receivers == 0 {
            return Err(Error::config("files, descriptions, description_bits and receivers must be >= 1"));
        }
        if !(self.gamma > 0.0) || !self.gamma.is_finite() {
            return Err(Error::config(format!("gamma must be positive, got {}", self.gamma)));
        }
        Ok(())
    }

    /// Bits per file, `B * D`.
    pub fn file_bits(&self) -> usize {
        self.description_bits * self.descriptions
    }

    /// Slot duration `gamma * F` in channel uses, rounded down.
    pub fn slot(&self) -> u64 {
        (self.gamma * self.file_bits() as f64).floor() as u64
    }

    /// Whether [`SystemConfig::slot`] had to drop a fractional part.
    pub fn slot_rounded(&self) -> bool {
        let exact = self.gamma * self.file_bits() as f64;
        exact != exact.floor()
    }
}

/// `q_f = f^-alpha / sum_j j^-alpha` for `f = 1..=m`.
pub fn zipf_demand(m: usize, alpha: f64) -> Result<Vec<f64>> {
    if m == 0 {
        return Err(Error::domain("zipf_demand needs m >= 1"));
    }
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(Error::domain(format!("zipf exponent must be >= 0, got {alpha}")));
    }
    let weights: Vec<f64> = (1..=m).map(|f| (f as f64).powf(-alpha)).collect();
    let total: f64 = weights.iter().sum();
    Ok(weights.into_iter().map(|w| w / total).collect())
}

#[derive(Debug, Clone, PartialEq)]
struct Column {
    pmf: Vec<f64>,
    cdf: Vec<f64>,
    last_positive: usize,
}

impl Column {
    fn new(pmf: Vec<f64>) -> Result<Self> {
        check_stochastic("demand column", &pmf)?;
        let mut acc = 0.0;
        let cdf = pmf
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        let last_positive = pmf.iter().rposition(|&p| p > 0.0).unwrap_or(0);
        Ok(Self { pmf, cdf, last_positive })
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        self.cdf.partition_point(|&c| c <= u).min(self.last_positive)
    }
}

/// Per-receiver request distributions (one column of `Q` per receiver).
#[derive(Debug, Clone, PartialEq)]
pub struct DemandModel {
    columns: Vec<Arc<Column>>,
}

impl DemandModel {
    /// Every receiver draws from the same distribution.
    pub fn common(pmf: Vec<f64>, receivers: usize) -> Result<Self> {
        if receivers == 0 {
            return Err(Error::domain("demand model needs at least one receiver"));
        }
        let column = Arc::new(Column::new(pmf)?);
        Ok(Self { columns: vec![column; receivers] })
    }

    pub fn zipf(m: usize, alpha: f64, receivers: usize) -> Result<Self> {
        Self::common(zipf_demand(m, alpha)?, receivers)
    }

    /// One column per receiver; all columns must have the same length.
    pub fn per_receiver(columns: Vec<Vec<f64>>) -> Result<Self> {
        let Some(first) = columns.first() else {
            return Err(Error::domain("demand model needs at least one receiver"));
        };
        let m = first.len();
        if columns.iter().any(|c| c.len() != m) {
            return Err(Error::domain("demand columns differ in length"));
        }
        let columns = columns.into_iter().map(|c| Column::new(c).map(Arc::new)).collect::<Result<_>>()?;
        Ok(Self { columns })
    }

    pub fn files(&self) -> usize {
        self.columns[0].pmf.len()
    }

    pub fn receivers(&self) -> usize {
        self.columns.len()
    }

    /// `q_{., u}`.
    pub fn column(&self, receiver: usize) -> &[f64] {
        &self.columns[receiver].pmf
    }

    /// Whether all receivers share one distribution.
    pub fn is_common(&self) -> bool {
        self.columns.windows(2).all(|w| Arc::ptr_eq(&w[0], &w[1]) || w[0].pmf == w[1].pmf)
    }
}

/// One realized request per receiver.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RequestVector(pub Vec<usize>);

impl RequestVector {
    pub fn validate(&self, files: usize) -> Result<()> {
        match self.0.iter().find(|&&f| f >= files) {
            Some(f) => Err(Error::domain(format!("request for file {} outside 1..={files}", f + 1))),
            None => Ok(()),
        }
    }

    pub fn receivers(&self) -> usize {
        self.0.len()
    }

    pub fn file(&self, receiver: usize) -> usize {
        self.0[receiver]
    }
}

/// Draw each receiver's request independently from its own column.
pub fn sample_requests<R: Rng + ?Sized>(demand: &DemandModel, rng: &mut R) -> RequestVector {
    RequestVector(demand.columns.iter().map(|c| c.sample(rng)).collect())
}

pub(crate) fn check_probability(name: &str, x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} = {x} outside [0, 1]")))
    }
}

pub(crate) fn check_stochastic(name: &str, v: &[f64]) -> Result<()> {
    if v.is_empty() {
        return Err(Error::domain(format!("{name} is empty")));
    }
    if let Some(x) = v.iter().find(|x| !(0.0..=1.0).contains(*x)) {
        return Err(Error::domain(format!("{name} has entry {x} outside [0, 1]")));
    }
    let sum: f64 = v.iter().sum();
    if (sum - 1.0).abs() > STOCHASTIC_TOL * (v.len() as f64).max(1.0) {
        return Err(Error::domain(format!("{name} sums to {sum}, not 1")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{Component, Streams};
    use approx::assert_abs_diff_eq;

    #[test]
    fn bec_rate() {
        assert_abs_diff_eq!(channel_rate(ChannelKind::Bec, 0.25).unwrap(), 0.75);
    }

    #[test]
    fn bsc_rate_at_half_is_zero() {
        assert_abs_diff_eq!(channel_rate(ChannelKind::Bsc, 0.5).unwrap(), 0.0);
    }

    #[test]
    fn bsc_rate_near_half_capacity() {
        // 1 - H2(0.11) from a 50-digit evaluation: 0.500084041835472004...
        assert_abs_diff_eq!(channel_rate(ChannelKind::Bsc, 0.11).unwrap(), 0.500_084_041_835_472, epsilon = 1e-13);
    }

    #[test]
    fn epsilon_out_of_range() {
        assert!(matches!(channel_rate(ChannelKind::Bsc, 1.5), Err(Error::Domain(_))));
        assert!(matches!(channel_rate(ChannelKind::Bec, -0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn entropy_endpoints() {
        assert_eq!(binary_entropy(0.0), 0.0);
        assert_eq!(binary_entropy(1.0), 0.0);
        assert_abs_diff_eq!(binary_entropy(0.5), 1.0);
    }

    #[test]
    fn zipf_uniform_when_alpha_zero() {
        assert_eq!(zipf_demand(4, 0.0).unwrap(), vec![0.25; 4]);
    }

    #[test]
    fn zipf_two_files() {
        let q = zipf_demand(2, 1.0).unwrap();
        assert_abs_diff_eq!(q[0], 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(q[1], 1.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn zipf_large_library_head() {
        // Normalizer sum_{j<=1000} j^-0.2 = 313.377473148899... from a 50-digit direct summation.
        let q = zipf_demand(1000, 0.2).unwrap();
        assert_abs_diff_eq!(q[0], 0.003_191_039_834_330_58, epsilon = 1e-15);
        assert_abs_diff_eq!(q.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn zipf_rejects_empty_library() {
        assert!(zipf_demand(0, 1.0).is_err());
    }

    #[test]
    fn point_mass_column() {
        let demand = DemandModel::per_receiver(vec![vec![0.0, 0.0, 1.0], vec![0.5, 0.5, 0.0]]).unwrap();
        let mut rng = Streams::new(3).stream(Component::Demand, 0);
        for _ in 0..1000 {
            assert_eq!(sample_requests(&demand, &mut rng).file(0), 2);
        }
    }

    #[test]
    fn uniform_two_files_frequency() {
        let demand = DemandModel::common(vec![0.5, 0.5], 1).unwrap();
        let mut rng = Streams::new(11).stream(Component::Demand, 0);
        let n = 1_000_000;
        let ones = (0..n).filter(|_| sample_requests(&demand, &mut rng).file(0) == 0).count();
        assert_abs_diff_eq!(ones as f64 / n as f64, 0.5, epsilon = 0.002);
    }

    #[test]
    fn sampling_is_deterministic_under_cloned_state() {
        let demand = DemandModel::zipf(50, 0.8, 6).unwrap();
        let mut a = Streams::new(5).stream(Component::Demand, 9);
        let mut b = a.clone();
        assert_eq!(sample_requests(&demand, &mut a), sample_requests(&demand, &mut b));
    }

    #[test]
    fn slot_rounds_down() {
        let cfg = SystemConfig { files: 3, descriptions: 3, description_bits: 1, gamma: 0.5, receivers: 2, seed: 0 };
        assert_eq!(cfg.slot(), 1);
        assert!(cfg.slot_rounded());
    }

    #[test]
    fn rejects_non_stochastic_columns() {
        assert!(DemandModel::common(vec![0.5, 0.6], 2).is_err());
        assert!(DemandModel::per_receiver(vec![vec![1.0], vec![0.5, 0.5]]).is_err());
    }

    proptest::proptest! {
        #[test]
        fn capacity_non_increasing(a in 0.0f64..=0.5, b in 0.0f64..=0.5) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            proptest::prop_assert!(channel_rate(ChannelKind::Bsc, lo).unwrap() >= channel_rate(ChannelKind::Bsc, hi).unwrap() - 1e-15);
            let (lo, hi) = (2.0 * lo, 2.0 * hi);
            proptest::prop_assert!(channel_rate(ChannelKind::Bec, lo).unwrap() >= channel_rate(ChannelKind::Bec, hi).unwrap());
        }

        #[test]
        fn zipf_non_increasing(m in 1usize..200, alpha in 0.0f64..3.0) {
            let q = zipf_demand(m, alpha).unwrap();
            proptest::prop_assert!(q.windows(2).all(|w| w[0] >= w[1]));
            proptest::prop_assert!((q.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}
