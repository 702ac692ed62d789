//! Monte-Carlo verification of the jump-functional laws of compound-Poisson
//! ensembles against closed forms.
//!
//! The counting process of jumps with size in a zero-separated set is
//! Poisson with mean `t * nu`; [`verify_poisson_law`] checks the sample mean
//! against the closed-form rate, runs a chi-square goodness-of-fit against
//! the Poisson histogram, and checks stationary independent increments on
//! two half windows. The cumulative jump functional has mean
//! `t * intensity * E[g(J); J in A]`; [`verify_compound_mean`] estimates it
//! and compares against the target computed by adaptive quadrature (or exact
//! mass sums for discrete laws).
//!
//! All ensemble statistics reduce over fixed-size index blocks in block
//! order, so reports are byte-identical for any worker count.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma_ur, ln_gamma};

use crate::borel::BorelSet;
use crate::error::{Error, Result};
use crate::measure::{counting_process, jump_sum_process};
use crate::par::map_blocks;
use crate::quad::adaptive_simpson;
use crate::sim::{generate_path, nu, JumpLaw, SimConfig, ThetaLaw};

/// Mean checks pass within this many standard errors.
pub const Z_THRESHOLD: f64 = 4.0;
/// Goodness-of-fit checks pass at or above this p-value.
pub const P_THRESHOLD: f64 = 0.001;
/// Histogram bins are merged until every expected count reaches this.
pub const MIN_EXPECTED_PER_BIN: f64 = 5.0;
/// Distributional verification needs at least this many paths.
pub const MIN_SAMPLE_PATHS: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn passed(self) -> bool {
        self == Verdict::Pass
    }

    fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

/// One mean estimate against a closed-form target.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationReport {
    pub test_name: String,
    pub estimate: f64,
    pub std_error: f64,
    pub target: f64,
    pub z_score: f64,
    pub n_samples: u64,
    pub verdict: Verdict,
}

impl SimulationReport {
    fn new(test_name: &str, estimate: f64, std_error: f64, target: f64, n_samples: u64) -> Self {
        let z_score = if std_error > 0.0 {
            (estimate - target) / std_error
        } else if estimate == target {
            0.0
        } else {
            f64::INFINITY.copysign(estimate - target)
        };
        Self {
            test_name: test_name.to_string(),
            estimate,
            std_error,
            target,
            z_score,
            n_samples,
            verdict: Verdict::from_bool(z_score.abs() <= Z_THRESHOLD),
        }
    }
}

/// Independence and stationarity checks on two equal half windows.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IncrementsCheck {
    /// Sample correlation of the two window counts.
    pub correlation: f64,
    /// Null bound `4 / sqrt(n)` for the correlation.
    pub correlation_bound: f64,
    pub mean_first: f64,
    pub mean_second: f64,
    /// Paired z-score for equality of the window means.
    pub mean_diff_z: f64,
    pub verdict: Verdict,
}

/// Chi-square goodness-of-fit of window counts against the Poisson law,
/// together with the mean and increments checks.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GofReport {
    pub test_name: String,
    pub bin_counts: Vec<u64>,
    pub expected: Vec<f64>,
    pub statistic: f64,
    pub dof: u32,
    pub p_value: f64,
    pub n_samples: u64,
    pub mean_check: SimulationReport,
    pub increments: IncrementsCheck,
    pub verdict: Verdict,
}

/// The uniform report shape emitted by the command-line surface.
#[derive(Debug, Clone, Serialize)]
pub struct ReportJson {
    pub test_name: String,
    pub estimate: f64,
    pub std_error: f64,
    pub target: f64,
    pub z_score: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_value: Option<f64>,
    pub n_samples: u64,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub details: Option<serde_json::Value>,
}

impl From<&SimulationReport> for ReportJson {
    fn from(r: &SimulationReport) -> Self {
        ReportJson {
            test_name: r.test_name.clone(),
            estimate: r.estimate,
            std_error: r.std_error,
            target: r.target,
            z_score: r.z_score,
            p_value: None,
            n_samples: r.n_samples,
            verdict: r.verdict,
            details: None,
        }
    }
}

impl From<&GofReport> for ReportJson {
    fn from(r: &GofReport) -> Self {
        ReportJson {
            test_name: r.test_name.clone(),
            estimate: r.mean_check.estimate,
            std_error: r.mean_check.std_error,
            target: r.mean_check.target,
            z_score: r.mean_check.z_score,
            p_value: Some(r.p_value),
            n_samples: r.n_samples,
            verdict: r.verdict,
            details: serde_json::to_value(r).ok(),
        }
    }
}

/// The built-in integrand vocabulary of the command-line surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrand {
    One,
    X,
    X2,
    Abs,
}

impl Integrand {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Integrand::One => 1.0,
            Integrand::X => x,
            Integrand::X2 => x * x,
            Integrand::Abs => x.abs(),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Integrand::One => "one",
            Integrand::X => "x",
            Integrand::X2 => "x2",
            Integrand::Abs => "abs",
        }
    }
}

impl FromStr for Integrand {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "one" => Ok(Integrand::One),
            "x" => Ok(Integrand::X),
            "x2" => Ok(Integrand::X2),
            "abs" => Ok(Integrand::Abs),
            other => Err(Error::Config(format!(
                "unknown integrand {other:?}; expected one|x|x2|abs"
            ))),
        }
    }
}

impl fmt::Display for Integrand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Poisson probability mass at `k` for mean `m`.
pub fn poisson_pmf(k: u64, m: f64) -> f64 {
    if m == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    (k as f64 * m.ln() - m - ln_gamma(k as f64 + 1.0)).exp()
}

/// Survival value of the chi-square distribution.
fn chi_square_p(statistic: f64, dof: u32) -> f64 {
    if dof == 0 {
        return 1.0;
    }
    gamma_ur(dof as f64 / 2.0, statistic / 2.0)
}

/// `E[g(J); J in a]` for the jump law: atom sums for the discrete laws,
/// adaptive quadrature against the density for the continuous ones.
pub fn restricted_expectation<G>(law: &JumpLaw, a: &BorelSet, g: &G) -> Result<f64>
where
    G: Fn(f64) -> f64,
{
    a.require_zero_separated()?;
    const QUAD_TOL: f64 = 1e-11;
    let mass_sum = |atoms: &[(f64, f64)]| -> Result<f64> {
        let mut total = 0.0;
        for &(x, p) in atoms {
            if a.contains(x) {
                let y = g(x);
                if !y.is_finite() {
                    return Err(Error::Numeric(format!(
                        "integrand is not finite at x = {x}"
                    )));
                }
                total += p * y;
            }
        }
        Ok(total)
    };
    match law {
        JumpLaw::Normal { mu, sigma } => {
            let norm = 1.0 / (sigma * (2.0 * std::f64::consts::PI).sqrt());
            let density = move |x: f64| norm * (-0.5 * ((x - mu) / sigma).powi(2)).exp();
            // mass beyond forty standard deviations is below 1e-300
            let support = (mu - 40.0 * sigma, mu + 40.0 * sigma);
            quadrature_over(a, support, |x| g(x) * density(x), QUAD_TOL)
        }
        JumpLaw::ExponentialSymmetric { rate } => {
            let density = move |x: f64| 0.5 * rate * (-rate * x.abs()).exp();
            let reach = 60.0 / rate;
            quadrature_over(a, (-reach, reach), |x| g(x) * density(x), QUAD_TOL)
        }
        JumpLaw::TwoPoint { x1, p1, x2 } => mass_sum(&[(*x1, *p1), (*x2, 1.0 - *p1)]),
        JumpLaw::FixedList { values } => {
            let w = 1.0 / values.len() as f64;
            let atoms: Vec<(f64, f64)> = values.iter().map(|&v| (v, w)).collect();
            mass_sum(&atoms)
        }
    }
}

fn quadrature_over<F>(a: &BorelSet, support: (f64, f64), f: F, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let mut total = 0.0;
    for iv in a.intervals() {
        let lo = iv.lo_value().max(support.0);
        let hi = iv.hi_value().min(support.1);
        if lo < hi {
            total += adaptive_simpson(&f, lo, hi, tol)?;
        }
    }
    Ok(total)
}

fn check_verification_inputs(cfg: &SimConfig, a: &BorelSet, t: f64) -> Result<()> {
    cfg.validate()?;
    a.require_zero_separated()?;
    if cfg.theta_law != ThetaLaw::Cadlag {
        return Err(Error::Config(
            "distributional verification runs on right-continuous ensembles; \
             set theta_law to cadlag"
                .to_string(),
        ));
    }
    if !(t > 0.0 && t <= cfg.horizon) {
        return Err(Error::Domain(format!(
            "t = {t} outside (0, {}]",
            cfg.horizon
        )));
    }
    if cfg.n_paths < MIN_SAMPLE_PATHS {
        return Err(Error::Config(format!(
            "distributional verification needs at least {MIN_SAMPLE_PATHS} paths, got {}",
            cfg.n_paths
        )));
    }
    Ok(())
}

#[derive(Default, Clone)]
struct CountSums {
    hist: Vec<u64>,
    total: u64,
    sum1: u64,
    sum2: u64,
    sq1: u64,
    sq2: u64,
    cross: u64,
    n: u64,
}

impl CountSums {
    fn record(&mut self, n_half: u64, n_full: u64) {
        let n2 = n_full - n_half;
        if self.hist.len() <= n_full as usize {
            self.hist.resize(n_full as usize + 1, 0);
        }
        self.hist[n_full as usize] += 1;
        self.total += n_full;
        self.sum1 += n_half;
        self.sum2 += n2;
        self.sq1 += n_half * n_half;
        self.sq2 += n2 * n2;
        self.cross += n_half * n2;
        self.n += 1;
    }

    fn merge(mut self, other: &CountSums) -> CountSums {
        if self.hist.len() < other.hist.len() {
            self.hist.resize(other.hist.len(), 0);
        }
        for (slot, v) in self.hist.iter_mut().zip(&other.hist) {
            *slot += v;
        }
        self.total += other.total;
        self.sum1 += other.sum1;
        self.sum2 += other.sum2;
        self.sq1 += other.sq1;
        self.sq2 += other.sq2;
        self.cross += other.cross;
        self.n += other.n;
        self
    }
}

struct Bin {
    lo: u64,
    hi: Option<u64>,
    expected: f64,
}

/// Contiguous Poisson bins with every expected count at least
/// [`MIN_EXPECTED_PER_BIN`]; the right tail is always an open bin.
fn poisson_bins(n_samples: u64, mean: f64) -> Vec<Bin> {
    let n = n_samples as f64;
    let mut bins = Vec::new();
    let mut lo = 0u64;
    let mut acc = 0.0;
    let mut cdf = 0.0;
    let mut k = 0u64;
    loop {
        let p = poisson_pmf(k, mean);
        acc += n * p;
        cdf += p;
        let tail = n * (1.0 - cdf).max(0.0);
        if tail < MIN_EXPECTED_PER_BIN {
            bins.push(Bin {
                lo,
                hi: None,
                expected: acc + tail,
            });
            break;
        }
        if acc >= MIN_EXPECTED_PER_BIN {
            bins.push(Bin {
                lo,
                hi: Some(k),
                expected: acc,
            });
            lo = k + 1;
            acc = 0.0;
        }
        k += 1;
    }
    // an undersized tail merges into the previous bin
    if bins.len() >= 2
        && bins
            .last()
            .is_some_and(|b| b.expected < MIN_EXPECTED_PER_BIN)
    {
        let tail = bins.pop().expect("just checked");
        let prev = bins.last_mut().expect("just checked");
        prev.hi = None;
        prev.expected += tail.expected;
    }
    bins
}

fn observed_in_bin(hist: &[u64], bin: &Bin) -> u64 {
    let lo = bin.lo as usize;
    if lo >= hist.len() {
        return 0;
    }
    match bin.hi {
        Some(hi) => hist[lo..hist.len().min(hi as usize + 1)].iter().sum(),
        None => hist[lo..].iter().sum(),
    }
}

/// Simulates the ensemble and checks that the count of jumps with size in
/// `a` on `[0, t]` follows the Poisson law with the closed-form mean:
/// sample mean against `t * nu` at the theoretical standard error,
/// chi-square goodness of fit on the count histogram, and independence and
/// stationarity of the two half-window increments.
pub fn verify_poisson_law(
    cfg: &SimConfig,
    a: &BorelSet,
    t: f64,
    threads: usize,
) -> Result<GofReport> {
    check_verification_inputs(cfg, a, t)?;
    let target_mean = t * nu(cfg, a)?;
    let half = 0.5 * t;

    let blocks = map_blocks(cfg.n_paths, threads, |range| -> Result<CountSums> {
        let mut sums = CountSums::default();
        for i in range {
            let path = generate_path(cfg, i);
            let counts = counting_process(&path, a, &[half, t])?;
            sums.record(counts[0], counts[1]);
        }
        Ok(sums)
    });
    let mut sums = CountSums::default();
    for b in blocks {
        sums = sums.merge(&b?);
    }

    let n = sums.n as f64;

    let bins = poisson_bins(sums.n, target_mean);
    let bin_counts: Vec<u64> = bins
        .iter()
        .map(|b| observed_in_bin(&sums.hist, b))
        .collect();
    let expected: Vec<f64> = bins.iter().map(|b| b.expected).collect();
    let statistic: f64 = bin_counts
        .iter()
        .zip(&expected)
        .map(|(&obs, &exp)| {
            let d = obs as f64 - exp;
            d * d / exp
        })
        .sum();
    let dof = (bins.len() as u32).saturating_sub(1);
    let p_value = chi_square_p(statistic, dof);

    let mean_check = SimulationReport::new(
        "poisson_mean",
        sums.total as f64 / n,
        (target_mean / n).sqrt(),
        target_mean,
        sums.n,
    );

    let (s1, s2) = (sums.sum1 as f64, sums.sum2 as f64);
    let (q1, q2, cr) = (sums.sq1 as f64, sums.sq2 as f64, sums.cross as f64);
    let var1 = n * q1 - s1 * s1;
    let var2 = n * q2 - s2 * s2;
    let correlation = if var1 > 0.0 && var2 > 0.0 {
        (n * cr - s1 * s2) / (var1 * var2).sqrt()
    } else {
        0.0
    };
    let correlation_bound = Z_THRESHOLD / n.sqrt();
    let mean_d = (s1 - s2) / n;
    let sdd = q1 - 2.0 * cr + q2;
    let var_d = ((sdd - (s1 - s2) * (s1 - s2) / n) / (n - 1.0)).max(0.0);
    let se_d = (var_d / n).sqrt();
    let mean_diff_z = if se_d > 0.0 {
        mean_d / se_d
    } else if mean_d == 0.0 {
        0.0
    } else {
        f64::INFINITY.copysign(mean_d)
    };
    let increments = IncrementsCheck {
        correlation,
        correlation_bound,
        mean_first: s1 / n,
        mean_second: s2 / n,
        mean_diff_z,
        verdict: Verdict::from_bool(
            correlation.abs() <= correlation_bound && mean_diff_z.abs() <= Z_THRESHOLD,
        ),
    };

    let verdict = Verdict::from_bool(
        p_value >= P_THRESHOLD && mean_check.verdict.passed() && increments.verdict.passed(),
    );

    Ok(GofReport {
        test_name: "poisson_law".to_string(),
        bin_counts,
        expected,
        statistic,
        dof,
        p_value,
        n_samples: sums.n,
        mean_check,
        increments,
        verdict,
    })
}

/// Simulates the ensemble and checks the mean of the cumulative jump
/// functional `sum of g over jumps with size in a up to t` against the
/// closed-form target `t * intensity * E[g(J); J in a]`. The integrand must
/// have a finite second moment on the restricted law; this is validated
/// numerically before simulating.
pub fn verify_compound_mean<G>(
    cfg: &SimConfig,
    a: &BorelSet,
    g: G,
    t: f64,
    threads: usize,
) -> Result<SimulationReport>
where
    G: Fn(f64) -> f64 + Sync,
{
    check_verification_inputs(cfg, a, t)?;
    let restricted_mean = restricted_expectation(&cfg.law, a, &g)?;
    restricted_expectation(&cfg.law, a, &|x| {
        let y = g(x);
        y * y
    })?;
    let target = t * cfg.intensity * restricted_mean;

    let blocks = map_blocks(cfg.n_paths, threads, |range| -> Result<Vec<f64>> {
        range
            .map(|i| {
                let path = generate_path(cfg, i);
                Ok(jump_sum_process(&path, a, &g, &[t])?[0])
            })
            .collect()
    });
    let mut values = Vec::with_capacity(cfg.n_paths as usize);
    for b in blocks {
        values.extend(b?);
    }

    let n = values.len() as f64;
    let mut sum = 0.0;
    let mut sumsq = 0.0;
    for &v in &values {
        sum += v;
        sumsq += v * v;
    }
    let estimate = sum / n;
    let variance = ((sumsq - sum * sum / n) / (n - 1.0)).max(0.0);
    let std_error = (variance / n).sqrt();

    Ok(SimulationReport::new(
        "compound_mean",
        estimate,
        std_error,
        target,
        cfg.n_paths,
    ))
}
