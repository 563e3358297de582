//! Exact finite-n law of the magnetization per spin `S_n/n`, under the product
//! measure `Q` and under the Gibbs measure obtained from it by tilting with
//! `e^{nF(m)}`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::ext_real::ExtReal;
use crate::field_models::{sample_fields, FieldModel, FieldRealization};
use crate::numerics::{log_add_exp, log_sum_exp, median, softplus};
use crate::output::fmt_f64;
use crate::rate_function::{RateFunction, TiltFunction};

/// Lattice points within this distance of an interval endpoint count as inside.
const ENDPOINT_TOL: f64 = 1e-12;

/// Law of `S_n/n` on `X_n = {-1, -1 + 2/n, ..., 1}`, stored as log-probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct MagnetizationPMF {
    n: usize,
    log_probs: Vec<f64>,
}

impl MagnetizationPMF {
    fn from_log_weights(n: usize, mut log_w: Vec<f64>) -> Self {
        let z = log_sum_exp(&log_w);
        for v in &mut log_w {
            *v -= z;
        }
        MagnetizationPMF { n, log_probs: log_w }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `m_k = (2k - n)/n` for `k = 0..=n` (number of up spins).
    pub fn support_point(&self, k: usize) -> f64 {
        (2.0 * k as f64 - self.n as f64) / self.n as f64
    }

    pub fn support(&self) -> Vec<f64> {
        (0..=self.n).map(|k| self.support_point(k)).collect()
    }

    pub fn log_probs(&self) -> &[f64] {
        &self.log_probs
    }

    pub fn probs(&self) -> Vec<f64> {
        self.log_probs.iter().map(|v| v.exp()).collect()
    }
}

/// Exact law of `S_n/n` under `Q = ⊗ Q_i`, `Q_i({1}) = e^{βh_i}/(2 cosh βh_i)`.
///
/// Sequential convolution over sites in log space: `O(n²)` time, `O(n)` memory.
pub fn product_pmf(realization: &FieldRealization, beta: f64) -> MagnetizationPMF {
    let n = realization.len();
    let mut log_w = vec![f64::NEG_INFINITY; n + 1];
    log_w[0] = 0.0;
    for (i, &h) in realization.values.iter().enumerate() {
        // ln Q_i(+1) = -ln(1 + e^{-2βh}), ln Q_i(-1) = -ln(1 + e^{2βh})
        let up = -softplus(-2.0 * beta * h);
        let down = -softplus(2.0 * beta * h);
        for k in (0..=i + 1).rev() {
            let stay = log_w[k] + down;
            log_w[k] = if k == 0 { stay } else { log_add_exp(stay, log_w[k - 1] + up) };
        }
    }
    MagnetizationPMF::from_log_weights(n, log_w)
}

/// Exact law of `S_n/n` under the Gibbs measure, by reweighting
/// [`product_pmf`] with `e^{nF(m)}` and renormalizing.
pub fn gibbs_pmf(realization: &FieldRealization, beta: f64) -> MagnetizationPMF {
    tilt(&product_pmf(realization, beta), beta)
}

/// Reweights a magnetization law by `e^{nF(m)}`.
pub fn tilt(pmf: &MagnetizationPMF, beta: f64) -> MagnetizationPMF {
    let tilt = TiltFunction::new(beta);
    let n = pmf.n();
    let log_w = (0..=n).map(|k| pmf.log_probs[k] + n as f64 * tilt.value(pmf.support_point(k))).collect();
    MagnetizationPMF::from_log_weights(n, log_w)
}

/// A finite union of closed intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalSet {
    intervals: Vec<(f64, f64)>,
}

impl IntervalSet {
    pub fn new(intervals: Vec<(f64, f64)>) -> Result<Self> {
        if intervals.is_empty() {
            return Err(Error::InvalidArgument("interval set is empty".into()));
        }
        if let Some(&(lo, hi)) = intervals.iter().find(|(lo, hi)| lo.partial_cmp(hi).is_none_or(|o| o.is_gt())) {
            return Err(Error::InvalidArgument(format!("interval [{lo}, {hi}] is not ordered")));
        }
        Ok(IntervalSet { intervals })
    }

    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![(lo, hi)])
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn contains(&self, x: f64) -> bool {
        self.intervals.iter().any(|&(lo, hi)| x >= lo - ENDPOINT_TOL && x <= hi + ENDPOINT_TOL)
    }
}

/// `-(1/n) ln P(S_n/n ∈ set)`; `+inf` when the set misses the lattice.
pub fn empirical_rate(pmf: &MagnetizationPMF, set: &IntervalSet) -> ExtReal {
    let inside: Vec<f64> =
        (0..=pmf.n).filter(|&k| set.contains(pmf.support_point(k))).map(|k| pmf.log_probs[k]).collect();
    let log_p = log_sum_exp(&inside);
    if log_p == f64::NEG_INFINITY {
        return ExtReal::PosInf;
    }
    // full mass can round to a hair above 0
    ExtReal::Finite((-log_p / pmf.n as f64).max(0.0))
}

/// Inputs of a finite-n LDP convergence study.
#[derive(Debug, Clone, PartialEq)]
pub struct LdpStudy {
    pub model: FieldModel,
    pub beta: f64,
    /// `β` of the theoretical side; `None` uses `beta`. Differs only in
    /// negative controls.
    pub theory_beta: Option<f64>,
    pub interval: (f64, f64),
    pub n_list: Vec<usize>,
    pub seeds: Vec<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LdpRow {
    pub n: usize,
    pub seed: u64,
    pub set_lo: f64,
    pub set_hi: f64,
    pub empirical_rate: f64,
    pub theory_rate: f64,
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LdpReport {
    pub rows: Vec<LdpRow>,
    /// Median deviation over seeds, per `n` in input order.
    pub median_deviation: Vec<(usize, f64)>,
    /// Median deviation non-increasing over the last three `n`; `None` with
    /// fewer than three.
    pub monotone_tail: Option<bool>,
    pub warnings: Vec<String>,
}

pub const LDP_CSV_HEADER: &str = "n,seed,set_lo,set_hi,empirical_rate,theory_rate,deviation";

impl LdpReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(LDP_CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.n,
                r.seed,
                fmt_f64(r.set_lo),
                fmt_f64(r.set_hi),
                fmt_f64(r.empirical_rate),
                fmt_f64(r.theory_rate),
                fmt_f64(r.deviation),
            ));
        }
        out
    }

    /// Median deviation at the largest `n`.
    pub fn final_median(&self) -> Option<f64> {
        self.median_deviation.last().map(|&(_, d)| d)
    }
}

/// Exact Gibbs `S_n/n` law for sampled realizations at every `(n, seed)`,
/// compared against `inf_{x ∈ set} I(x)`.
pub fn ldp_convergence_report(study: &LdpStudy, exec: Execution) -> Result<LdpReport> {
    if study.n_list.is_empty() || study.seeds.is_empty() {
        return Err(Error::InvalidArgument("n_list and seeds must be non-empty".into()));
    }
    if study.n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("n_list must be strictly increasing".into()));
    }
    let (lo, hi) = study.interval;
    let set = IntervalSet::interval(lo, hi)?;
    let theory = RateFunction::new(study.model.clone(), study.theory_beta.unwrap_or(study.beta))?;
    let theory_rate = theory.inf_over_interval(lo, hi)?.to_f64();

    let jobs: Vec<(usize, u64)> = study.n_list.iter().flat_map(|&n| study.seeds.iter().map(move |&s| (n, s))).collect();
    let rows = exec
        .map(&jobs, |&(n, seed)| -> Result<LdpRow> {
            let realization = sample_fields(&study.model, n, seed)?;
            let pmf = gibbs_pmf(&realization, study.beta);
            let empirical = empirical_rate(&pmf, &set).to_f64();
            let deviation = if empirical.is_infinite() && theory_rate.is_infinite() {
                0.0
            } else {
                (empirical - theory_rate).abs()
            };
            Ok(LdpRow { n, seed, set_lo: lo, set_hi: hi, empirical_rate: empirical, theory_rate, deviation })
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

    let median_deviation: Vec<(usize, f64)> = study
        .n_list
        .iter()
        .map(|&n| {
            let devs: Vec<f64> = rows.iter().filter(|r| r.n == n).map(|r| r.deviation).collect();
            (n, median(&devs))
        })
        .collect();
    let mut warnings = Vec::new();
    let monotone_tail = if median_deviation.len() >= 3 {
        let tail = &median_deviation[median_deviation.len() - 3..];
        Some(tail.windows(2).all(|w| w[1].1 <= w[0].1))
    } else {
        warnings
            .push(format!("monotonicity check skipped: needs at least 3 values of n, got {}", median_deviation.len()));
        None
    };
    Ok(LdpReport { rows, median_deviation, monotone_tail, warnings })
}

/// Initial spin configuration of the heat-bath chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GlauberStart {
    Random,
    AllUp,
}

/// Single-site heat-bath dynamics for the Gibbs measure of `realization` at
/// `β`. One sweep is `n` updates at uniformly chosen sites; returns `S_n/n`
/// after every sweep.
pub fn glauber_sample(
    realization: &FieldRealization,
    beta: f64,
    sweeps: usize,
    seed: u64,
    start: GlauberStart,
) -> Result<Vec<f64>> {
    if sweeps == 0 {
        return Err(Error::InvalidArgument("sweeps must be >= 1".into()));
    }
    let n = realization.len();
    let nf = n as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut spins: Vec<i8> = match start {
        GlauberStart::AllUp => vec![1; n],
        GlauberStart::Random => (0..n).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect(),
    };
    let mut total: i64 = spins.iter().map(|&s| i64::from(s)).sum();
    let mut out = Vec::with_capacity(sweeps);
    for _ in 0..sweeps {
        for _ in 0..n {
            let i = rng.random_range(0..n);
            let rest = (total - i64::from(spins[i])) as f64;
            // P(σ_i = +1 | rest) = 1 / (1 + exp(-2β(S_rest/n + h_i)))
            let p_up = 1.0 / (1.0 + (-2.0 * beta * (rest / nf + realization.values[i])).exp());
            let new = if rng.random::<f64>() < p_up { 1 } else { -1 };
            total += i64::from(new - spins[i]);
            spins[i] = new;
        }
        out.push(total as f64 / nf);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn realization(values: Vec<f64>) -> FieldRealization {
        FieldRealization::from_values(values).unwrap()
    }

    #[test]
    fn single_site_product_law() {
        let (beta, h) = (0.9, 0.4);
        let pmf = product_pmf(&realization(vec![h]), beta);
        let p_up = (beta * h).exp() / (2.0 * (beta * h).cosh());
        assert!((pmf.probs()[1] - p_up).abs() < 1e-15);
        assert_eq!(pmf.support(), vec![-1.0, 1.0]);
        // constant tilt for n = 1
        let g = gibbs_pmf(&realization(vec![h]), beta);
        assert!((g.probs()[1] - p_up).abs() < 1e-15);
    }

    #[test]
    fn fair_coins_give_binomial() {
        let pmf = product_pmf(&realization(vec![0.0; 4]), 1.3);
        let expected = [1.0, 4.0, 6.0, 4.0, 1.0].map(|c| c / 16.0);
        for (p, e) in pmf.probs().iter().zip(expected) {
            assert!((p - e).abs() < 1e-15);
        }
        assert_eq!(pmf.support(), vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
    }

    #[test]
    fn two_free_spins_under_gibbs() {
        let beta = 0.8;
        let pmf = gibbs_pmf(&realization(vec![0.0, 0.0]), beta);
        assert!((pmf.probs()[1] - 1.0 / (1.0 + beta.exp())).abs() < 1e-15);
    }

    #[test]
    fn empirical_rate_edge_cases() {
        let pmf = gibbs_pmf(&realization(vec![0.1, -0.3, 0.5, 0.0]), 1.0);
        assert_eq!(empirical_rate(&pmf, &IntervalSet::interval(-1.0, 1.0).unwrap()), ExtReal::Finite(0.0));
        assert_eq!(empirical_rate(&pmf, &IntervalSet::interval(1.5, 2.0).unwrap()), ExtReal::PosInf);
        // endpoints on lattice points count as inside
        let at_half = empirical_rate(&pmf, &IntervalSet::interval(0.5, 0.5).unwrap());
        assert!((at_half.unwrap_finite() - (-pmf.log_probs()[3] / 4.0)).abs() < 1e-15);
        // overlapping intervals count lattice points once
        let union = IntervalSet::new(vec![(0.0, 1.0), (0.5, 1.0)]).unwrap();
        let single = IntervalSet::interval(0.0, 1.0).unwrap();
        assert_eq!(empirical_rate(&pmf, &union), empirical_rate(&pmf, &single));
        assert!(IntervalSet::interval(1.0, 0.0).is_err());
    }

    #[test]
    fn pmf_is_normalized_for_large_n() {
        let r = sample_fields(&FieldModel::dichotomous(1.0, 0.5).unwrap(), 2000, 5).unwrap();
        let pmf = gibbs_pmf(&r, 2.0);
        let total: f64 = pmf.probs().iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!(pmf.log_probs().iter().all(|v| v.is_finite()));
    }

    #[test]
    fn report_skips_monotonicity_with_too_few_sizes() {
        let study = LdpStudy {
            model: FieldModel::constant(0.0).unwrap(),
            beta: 0.5,
            theory_beta: None,
            interval: (0.5, 1.0),
            n_list: vec![100],
            seeds: vec![1, 2],
        };
        let report = ldp_convergence_report(&study, Execution::Sequential).unwrap();
        assert_eq!(report.rows.len(), 2);
        assert_eq!(report.monotone_tail, None);
        assert_eq!(report.warnings.len(), 1);
        assert!(report.to_csv().starts_with(LDP_CSV_HEADER));
    }

    #[test]
    fn typical_set_has_near_zero_rate() {
        let study = LdpStudy {
            model: FieldModel::constant(0.0).unwrap(),
            beta: 0.5,
            theory_beta: None,
            interval: (-0.05, 0.05),
            n_list: vec![2000],
            seeds: vec![1],
        };
        let report = ldp_convergence_report(&study, Execution::Sequential).unwrap();
        assert!(report.rows[0].empirical_rate < 5e-3);
        assert_eq!(report.rows[0].theory_rate, 0.0);
    }

    #[test]
    fn glauber_single_site_frequency() {
        let (beta, h) = (0.7, 0.5);
        let samples = glauber_sample(&realization(vec![h]), beta, 200_000, 9, GlauberStart::Random).unwrap();
        let up = samples.iter().filter(|&&m| m > 0.0).count() as f64 / samples.len() as f64;
        let exact = (beta * h).exp() / (2.0 * (beta * h).cosh());
        assert!((up - exact).abs() < 5e-3, "{up} vs {exact}");
        assert!(glauber_sample(&realization(vec![h]), beta, 0, 9, GlauberStart::Random).is_err());
    }
}
