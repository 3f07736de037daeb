//! Finite-statistics model of the coincidence measurement.
//!
//! Every setting gets the same number of source pairs `N` (equal integration
//! time), and its coincidence count is binomial with the setting's joint
//! probability. Uncertainties are parametric-bootstrap standard deviations.
//! All randomness comes from ChaCha8 streams keyed by the record seed, so
//! results do not depend on thread scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::witness::{
    normalize, witness_formula, NormalizationPolicy, ProbTable, Quartet, SettingIndex,
};

pub const DEFAULT_BOOTSTRAP: usize = 1000;
/// Key offset separating bootstrap streams from the primary sampling streams.
const BOOTSTRAP_KEY: u64 = 0x9e37_79b9_7f4a_7c15;

/// Simulated coincidence counts for the five measured settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountRecord {
    /// In [`SettingIndex::MEASURED`] order.
    pub counts: [u64; 5],
    /// Source pairs sent per setting.
    pub n_pairs: u64,
    pub seed: u64,
}

impl CountRecord {
    pub fn new(counts: [u64; 5], n_pairs: u64, seed: u64) -> Result<Self> {
        if let Some(c) = counts.iter().find(|c| **c > n_pairs) {
            return Err(Error::Invalid(format!(
                "count {c} exceeds the {n_pairs} pairs per setting"
            )));
        }
        Ok(Self {
            counts,
            n_pairs,
            seed,
        })
    }

    pub fn count(&self, s: SettingIndex) -> u64 {
        let k = SettingIndex::MEASURED
            .iter()
            .position(|m| *m == s)
            .unwrap_or_else(|| panic!("setting {s} is not measured"));
        self.counts[k]
    }

    /// Frequencies as a probability table; the singlet success is the sum of
    /// the four computational frequencies.
    pub fn empirical_table(&self) -> Result<ProbTable> {
        if self.n_pairs == 0 {
            return Err(Error::NoData);
        }
        Ok(frequencies_table(&self.counts, self.n_pairs))
    }
}

fn frequencies_table(counts: &[u64; 5], n: u64) -> ProbTable {
    let f = counts.map(|c| c as f64 / n as f64);
    // ppp may exceed the singlet sum in small samples, so skip ProbTable::new
    ProbTable {
        p00: f[0],
        p01: f[1],
        p10: f[2],
        p11: f[3],
        ppp: f[4],
        singlet_success: f[0] + f[1] + f[2] + f[3],
    }
}

/// Witness of empirical frequencies. Normalized entries are capped at 1,
/// which only matters when independent per-setting sampling makes `p++`
/// exceed the singlet frequency.
fn witness_of_counts(
    counts: &[u64; 5],
    n: u64,
    p: f64,
    policy: NormalizationPolicy,
) -> Result<f64> {
    let q = normalize(&frequencies_table(counts, n), policy);
    let capped = Quartet::new(
        q.p00.min(1.0),
        q.p01.min(1.0),
        q.p11.min(1.0),
        q.ppp.min(1.0),
    );
    Ok(witness_formula(p, capped)?.w)
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn binomial(rng: &mut ChaCha8Rng, n: u64, p: f64) -> u64 {
    if n == 0 || p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return n;
    }
    Binomial::new(n, p).expect("p in (0, 1)").sample(rng)
}

/// Draws one binomial count per setting; setting `k` uses stream `k` of `seed`.
pub fn sample_counts(t: &ProbTable, n_pairs: u64, seed: u64) -> CountRecord {
    let probs = t.measured();
    let mut counts = [0u64; 5];
    for (k, (slot, p)) in counts.iter_mut().zip(probs).enumerate() {
        *slot = binomial(&mut stream_rng(seed, k as u64), n_pairs, p);
    }
    CountRecord {
        counts,
        n_pairs,
        seed,
    }
}

/// Point estimate with its bootstrap standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WitnessEstimate {
    pub value: f64,
    /// Bootstrap standard deviation.
    pub std_error: f64,
    pub n_pairs: u64,
    pub policy: NormalizationPolicy,
    pub p: f64,
    pub bootstrap_resamples: usize,
}

pub fn estimate_witness(
    c: &CountRecord,
    p: f64,
    policy: NormalizationPolicy,
    resamples: usize,
) -> Result<WitnessEstimate> {
    if c.n_pairs == 0 {
        return Err(Error::NoData);
    }
    let value = witness_of_counts(&c.counts, c.n_pairs, p, policy)?;
    let std_error = bootstrap_ci(c, resamples, p, policy)?;
    Ok(WitnessEstimate {
        value,
        std_error,
        n_pairs: c.n_pairs,
        policy,
        p,
        bootstrap_resamples: resamples,
    })
}

/// Standard deviation of `W` over `resamples` parametric resamples, each
/// setting redrawn binomially from its empirical frequency.
pub fn bootstrap_ci(
    c: &CountRecord,
    resamples: usize,
    p: f64,
    policy: NormalizationPolicy,
) -> Result<f64> {
    if resamples < 2 {
        return Err(Error::Invalid(format!(
            "bootstrap needs at least 2 resamples, got {resamples}"
        )));
    }
    if c.n_pairs == 0 {
        return Err(Error::NoData);
    }
    let n = c.n_pairs;
    let freqs = c.counts.map(|k| k as f64 / n as f64);
    let key = c.seed.wrapping_add(BOOTSTRAP_KEY);
    let values = (0..resamples)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream_rng(key, b as u64);
            let counts = freqs.map(|f| binomial(&mut rng, n, f));
            witness_of_counts(&counts, n, p, policy)
        })
        .collect::<Result<Vec<f64>>>()?;
    let mean = values.iter().sum::<f64>() / resamples as f64;
    let var = values.iter().map(|w| (w - mean).powi(2)).sum::<f64>() / (resamples - 1) as f64;
    Ok(var.sqrt())
}

/// Smallest power of ten `N ≤ 10^8` whose bootstrap σ is at most `target`.
pub fn calibrate_pairs(
    t: &ProbTable,
    p: f64,
    policy: NormalizationPolicy,
    target: f64,
    seed: u64,
    resamples: usize,
) -> Result<u64> {
    for exp in 1..=8 {
        let n = 10u64.pow(exp);
        let record = sample_counts(t, n, seed);
        if bootstrap_ci(&record, resamples, p, policy)? <= target {
            return Ok(n);
        }
    }
    Err(Error::Invalid(format!(
        "no N ≤ 1e8 reaches bootstrap sigma {target}"
    )))
}
