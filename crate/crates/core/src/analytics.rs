//! Closed-form performance of random popularity caching with channel-aware
//! coded multicast in the symmetric setting (common `p`, `q` and `M`).

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{check_probability, check_stochastic, RequestVector};

/// Largest receiver count for exact subset sums.
pub const EXACT_PSI_MAX_RECEIVERS: usize = 20;
/// Largest outcome count `m^l` for enumerated winner probabilities.
pub const ENUMERATION_LIMIT: f64 = 1e7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetricParams {
    /// Demand distribution over files.
    pub q: Vec<f64>,
    /// Caching distribution over files.
    pub p: Vec<f64>,
    /// Cache size in files.
    pub cache_files: f64,
    /// Channel rate of each receiver.
    pub eta: Vec<f64>,
    pub gamma: f64,
    pub descriptions: usize,
    pub description_bits: usize,
}

impl SymmetricParams {
    pub fn validate(&self) -> Result<()> {
        check_stochastic("demand", &self.q)?;
        check_stochastic("caching distribution", &self.p)?;
        if self.q.len() != self.p.len() {
            return Err(Error::config("demand and caching vectors differ in length"));
        }
        if !(self.cache_files >= 0.0 && self.cache_files.is_finite()) {
            return Err(Error::config("cache size must be a non-negative number of files"));
        }
        if let Some(f) = self.p.iter().position(|&p| p * self.cache_files > 1.0 + 1e-9) {
            return Err(Error::config(format!("file {} gets more than a whole file of cache", f + 1)));
        }
        if self.eta.is_empty() {
            return Err(Error::config("at least one receiver is required"));
        }
        for &e in &self.eta {
            check_probability("channel rate", e)?;
        }
        if !(self.gamma > 0.0) || self.descriptions == 0 || self.description_bits == 0 {
            return Err(Error::config("gamma, descriptions and description bits must be positive"));
        }
        Ok(())
    }

    pub fn files(&self) -> usize {
        self.q.len()
    }

    pub fn receivers(&self) -> usize {
        self.eta.len()
    }

    /// Fraction of file `f` held in each cache.
    pub fn cached_fraction(&self, f: usize) -> f64 {
        (self.p[f] * self.cache_files).min(1.0)
    }

    /// Expected cached fraction of a requested file.
    pub fn expected_cached_fraction(&self) -> f64 {
        (0..self.files()).map(|f| self.q[f] * self.cached_fraction(f)).sum()
    }
}

fn ln_lambda(x: f64, ell: usize, receivers: usize) -> f64 {
    let a = (ell - 1) as f64;
    let b = (receivers - ell + 1) as f64;
    let term = |base: f64, exp: f64| if exp == 0.0 { 0.0 } else { exp * base.ln() };
    term(x, a) + term(1.0 - x, b)
}

/// `lambda(f, l) = (p_f M)^(l-1) (1 - p_f M)^(U-l+1)`: probability that a
/// description requested by one receiver is cached by exactly `l - 1` named others.
pub fn lambda_coeff(p: f64, cache_files: f64, ell: usize, receivers: usize) -> Result<f64> {
    let x = p * cache_files;
    if !(-1e-12..=1.0 + 1e-12).contains(&x) {
        return Err(Error::domain(format!("cached fraction {x} outside [0, 1]")));
    }
    if ell == 0 || ell > receivers {
        return Err(Error::domain(format!("level {ell} outside 1..={receivers}")));
    }
    Ok(ln_lambda(x.clamp(0.0, 1.0), ell, receivers).exp())
}

fn lambda_x(x: f64, ell: usize, receivers: usize) -> f64 {
    ln_lambda(x, ell, receivers).exp()
}

fn ln_binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    (0..k).map(|i| ((n - i) as f64).ln() - ((i + 1) as f64).ln()).sum()
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        0.0
    } else {
        ln_binomial(n, k).exp().round()
    }
}

/// A value with its Monte Carlo standard error (zero when exact).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Self { value, std_error: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PsiMode {
    Exact,
    /// Stratified sampling with this many subsets per subset size.
    Sampled(usize),
}

/// Normalized multicast length of one demand realization: the sum over
/// nonempty receiver subsets `S` of the largest `lambda(f_u, |S|)` in `S`.
pub fn psi_realization<R: Rng + ?Sized>(
    requests: &RequestVector,
    params: &SymmetricParams,
    mode: PsiMode,
    rng: &mut R,
) -> Result<Estimate> {
    let u_n = requests.receivers();
    requests.validate(params.files())?;
    if u_n == 0 {
        return Ok(Estimate::exact(0.0));
    }
    let x: Vec<f64> = requests.0.iter().map(|&f| params.cached_fraction(f)).collect();
    match mode {
        PsiMode::Exact => {
            if u_n > EXACT_PSI_MAX_RECEIVERS {
                return Err(Error::Refused(format!(
                    "exact subset sum needs at most {EXACT_PSI_MAX_RECEIVERS} receivers, got {u_n}"
                )));
            }
            // The i-th largest value (0-based) is the maximum of C(U-1-i, l-1) subsets.
            let mut total = 0.0;
            for ell in 1..=u_n {
                let mut vals: Vec<f64> = x.iter().map(|&xi| lambda_x(xi, ell, u_n)).collect();
                vals.sort_by(|a, b| b.total_cmp(a));
                for (i, v) in vals.iter().enumerate() {
                    if u_n - 1 - i >= ell - 1 {
                        total += v * binomial(u_n - 1 - i, ell - 1);
                    }
                }
            }
            Ok(Estimate::exact(total))
        }
        PsiMode::Sampled(k) => {
            if k < 2 {
                return Err(Error::config("sampled mode needs at least two samples per size"));
            }
            let (mut total, mut var) = (0.0, 0.0);
            for ell in 1..=u_n {
                let c = binomial(u_n, ell);
                let draws: Vec<f64> = (0..k)
                    .map(|_| {
                        rand::seq::index::sample(rng, u_n, ell)
                            .iter()
                            .map(|u| lambda_x(x[u], ell, u_n))
                            .fold(0.0, f64::max)
                    })
                    .collect();
                let mean = draws.iter().sum::<f64>() / k as f64;
                let s2 = draws.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (k - 1) as f64;
                total += c * mean;
                var += c * c * s2 / k as f64;
            }
            Ok(Estimate { value: total, std_error: var.sqrt() })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RhoMode {
    /// Enumerate all `m^l` ordered draws.
    Enumerate,
    /// Sample this many draws.
    MonteCarlo(usize),
    /// Exact from tail sums of the demand over the score ranking.
    #[default]
    ClosedForm,
}

/// Winner probabilities at level `l`: for `l` i.i.d. draws from `q`, the
/// probability that file `f` has the highest `lambda(., l)` among the draws.
/// Ties go to the lower file index.
pub fn rho_vector<R: Rng + ?Sized>(
    ell: usize,
    params: &SymmetricParams,
    mode: RhoMode,
    rng: &mut R,
) -> Result<Vec<Estimate>> {
    let u_n = params.receivers();
    let m = params.files();
    if ell == 0 || ell > u_n {
        return Err(Error::domain(format!("level {ell} outside 1..={u_n}")));
    }
    let score: Vec<f64> = (0..m).map(|f| lambda_x(params.cached_fraction(f), ell, u_n)).collect();
    let beats = |a: usize, b: usize| score[a] > score[b] || (score[a] == score[b] && a < b);
    match mode {
        RhoMode::ClosedForm => {
            let mut rank: Vec<usize> = (0..m).collect();
            rank.sort_by(|&a, &b| score[b].total_cmp(&score[a]).then(a.cmp(&b)));
            let mut out = vec![Estimate::exact(0.0); m];
            let mut below = 0.0;
            for &f in rank.iter().rev() {
                let upto = below + params.q[f];
                out[f] = Estimate::exact(upto.powi(ell as i32) - f64::powi(below, ell as i32));
                below = upto;
            }
            Ok(out)
        }
        RhoMode::Enumerate => {
            if (m as f64).powi(ell as i32) > ENUMERATION_LIMIT {
                return Err(Error::Refused(format!("{m}^{ell} outcomes exceed the enumeration limit")));
            }
            let mut out = vec![0.0; m];
            let mut idx = vec![0usize; ell];
            loop {
                let mut prob = 1.0;
                let mut best = idx[0];
                for &j in &idx {
                    prob *= params.q[j];
                    if beats(j, best) {
                        best = j;
                    }
                }
                out[best] += prob;
                let mut pos = 0;
                loop {
                    if pos == ell {
                        return Ok(out.into_iter().map(Estimate::exact).collect());
                    }
                    idx[pos] += 1;
                    if idx[pos] < m {
                        break;
                    }
                    idx[pos] = 0;
                    pos += 1;
                }
            }
        }
        RhoMode::MonteCarlo(k) => {
            if k == 0 {
                return Err(Error::config("Monte Carlo mode needs at least one draw"));
            }
            let dist = WeightedIndex::new(&params.q).map_err(|e| Error::config(e.to_string()))?;
            let mut counts = vec![0usize; m];
            for _ in 0..k {
                let mut best = dist.sample(rng);
                for _ in 1..ell {
                    let j = dist.sample(rng);
                    if beats(j, best) {
                        best = j;
                    }
                }
                counts[best] += 1;
            }
            Ok(counts
                .into_iter()
                .map(|c| {
                    let p = c as f64 / k as f64;
                    Estimate { value: p, std_error: (p * (1.0 - p) / k as f64).sqrt() }
                })
                .collect())
        }
    }
}

pub fn rho<R: Rng + ?Sized>(
    file: usize,
    ell: usize,
    params: &SymmetricParams,
    mode: RhoMode,
    rng: &mut R,
) -> Result<Estimate> {
    if file >= params.files() {
        return Err(Error::domain(format!("file {} out of range", file + 1)));
    }
    Ok(rho_vector(ell, params, mode, rng)?[file])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpectedPsi {
    /// Coded-multicast term.
    pub phi: f64,
    /// Expected number of distinct requested files.
    pub m_bar: f64,
    /// The smaller of the two.
    pub value: f64,
}

/// Expected number of distinct files requested by the receivers.
pub fn expected_distinct_requests(q: &[f64], receivers: usize) -> f64 {
    q.iter().map(|&qf| 1.0 - (1.0 - qf).powi(receivers as i32)).sum()
}

/// Expected normalized multicast length over demands and caches.
pub fn expected_psi<R: Rng + ?Sized>(params: &SymmetricParams, mode: RhoMode, rng: &mut R) -> Result<ExpectedPsi> {
    params.validate()?;
    let u_n = params.receivers();
    let mut phi = 0.0;
    for ell in 1..=u_n {
        let rho = rho_vector(ell, params, mode, rng)?;
        let ln_c = ln_binomial(u_n, ell);
        for (f, r) in rho.iter().enumerate() {
            if r.value > 0.0 {
                phi += r.value * (ln_c + ln_lambda(params.cached_fraction(f), ell, u_n)).exp();
            }
        }
    }
    let m_bar = expected_distinct_requests(&params.q, u_n);
    Ok(ExpectedPsi { phi, m_bar, value: phi.min(m_bar) })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    /// Delivery rate of each receiver, bits per channel use.
    pub per_receiver: Vec<f64>,
    pub network: f64,
    /// Distortion of each receiver: fraction of descriptions not delivered.
    pub distortions: Vec<f64>,
    pub distortion: f64,
    pub expected_psi: f64,
    pub load: f64,
}

/// Per-receiver rate `min(eta_u / E[psi], (1 - E[M]) / gamma) + E[M] / gamma`.
pub fn receiver_rate(eta: f64, expected_psi: f64, cached: f64, gamma: f64) -> f64 {
    let multicast = if expected_psi > 0.0 { eta / expected_psi } else { f64::INFINITY };
    multicast.min((1.0 - cached) / gamma) + cached / gamma
}

/// Rates, distortions and load for the given parameters.
pub fn rates(params: &SymmetricParams, psi: &ExpectedPsi) -> Result<RateReport> {
    params.validate()?;
    let cached = params.expected_cached_fraction();
    let per_receiver: Vec<f64> =
        params.eta.iter().map(|&e| receiver_rate(e, psi.value, cached, params.gamma)).collect();
    // Delivered descriptions per slot are rate * gamma * D.
    let distortions: Vec<f64> = per_receiver.iter().map(|r| (1.0 - params.gamma * r).clamp(0.0, 1.0)).collect();
    Ok(RateReport {
        network: per_receiver.iter().sum(),
        distortion: distortions.iter().sum::<f64>() / distortions.len() as f64,
        per_receiver,
        distortions,
        expected_psi: psi.value,
        load: network_load(psi.value, &params.eta)?,
    })
}

/// Channel uses per delivered bit: normalized length over the sum of rates.
pub fn network_load(psi: f64, eta: &[f64]) -> Result<f64> {
    let total: f64 = eta.iter().sum();
    if !(total > 0.0) {
        return Err(Error::domain("sum of channel rates must be positive"));
    }
    Ok(psi / total)
}

/// Monte Carlo average of [`psi_realization`] over sampled demands.
pub fn expected_psi_sampled<R: Rng + ?Sized>(params: &SymmetricParams, draws: usize, rng: &mut R) -> Result<Estimate> {
    params.validate()?;
    let dist = WeightedIndex::new(&params.q).map_err(|e| Error::config(e.to_string()))?;
    let vals: Vec<f64> = (0..draws.max(2))
        .map(|_| {
            let req = RequestVector((0..params.receivers()).map(|_| dist.sample(rng)).collect());
            psi_realization(&req, params, PsiMode::Exact, rng).map(|e| e.value)
        })
        .collect::<Result<_>>()?;
    let n = vals.len() as f64;
    let mean = vals.iter().sum::<f64>() / n;
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(Estimate { value: mean, std_error: (var / n).sqrt() })
}

/// Uniform-cutoff size minimizing the expected length over a grid.
pub fn best_cutoff<R: Rng + ?Sized>(
    base: &SymmetricParams,
    grid: &[usize],
    rng: &mut R,
) -> Result<(usize, ExpectedPsi)> {
    let mut best: Option<(usize, ExpectedPsi)> = None;
    for &cutoff in grid {
        if cutoff == 0 || cutoff > base.files() || (cutoff as f64) < base.cache_files {
            continue;
        }
        let p = crate::cache::uniform_cutoff_distribution(&base.q, cutoff, base.cache_files)?;
        let params = SymmetricParams { p, ..base.clone() };
        let e = expected_psi(&params, RhoMode::ClosedForm, rng)?;
        if best.as_ref().is_none_or(|(_, b)| e.value < b.value) {
            best = Some((cutoff, e));
        }
    }
    best.ok_or_else(|| Error::config("no feasible cutoff in the grid"))
}
