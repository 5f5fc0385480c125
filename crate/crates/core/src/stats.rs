//! Running moments, estimator reports and the Kolmogorov–Smirnov test.

use serde::{Deserialize, Serialize};

use crate::laws::Rate;

/// Welford accumulator.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Welford {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Welford {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        if self.n == 0 { f64::NAN } else { self.mean }
    }

    /// Unbiased sample variance (0 for fewer than two values).
    pub fn variance(&self) -> f64 {
        if self.n < 2 { 0.0 } else { (self.m2 / (self.n - 1) as f64).max(0.0) }
    }

    pub fn std_error(&self) -> f64 {
        if self.n == 0 { f64::NAN } else { (self.variance() / self.n as f64).sqrt() }
    }
}

impl FromIterator<f64> for Welford {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut w = Welford::new();
        iter.into_iter().for_each(|x| w.push(x));
        w
    }
}

/// Summary of one Monte Carlo estimator at one intensity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimatorReport {
    pub name: String,
    pub lambda: f64,
    pub n: u64,
    pub mean: f64,
    pub variance: f64,
    pub std_error: f64,
    pub ci95: [f64; 2],
    /// Limit value of the (rescaled) estimator, when one is known.
    pub theory: Option<f64>,
    /// Rate the raw values were divided by.
    pub rescale_rate: Option<Rate>,
    pub seed: u64,
}

impl EstimatorReport {
    pub fn from_welford(name: impl Into<String>, lambda: f64, w: &Welford, seed: u64) -> Self {
        let mean = w.mean();
        let se = w.std_error();
        EstimatorReport {
            name: name.into(),
            lambda,
            n: w.count(),
            mean,
            variance: w.variance(),
            std_error: se,
            ci95: [mean - 1.96 * se, mean + 1.96 * se],
            theory: None,
            rescale_rate: None,
            seed,
        }
    }

    /// Report on `values / rate(λ)`, compared with `theory`.
    pub fn rescaled(name: impl Into<String>, lambda: f64, values: &[f64], rate: Rate, theory: f64, seed: u64) -> Self {
        let s = rate.at(lambda);
        let w: Welford = values.iter().map(|v| v / s).collect();
        let mut r = Self::from_welford(name, lambda, &w, seed);
        r.theory = Some(theory);
        r.rescale_rate = Some(rate);
        r
    }

    pub fn with_theory(mut self, theory: f64) -> Self {
        self.theory = Some(theory);
        self
    }

    /// `|mean - theory| / theory`.
    pub fn relative_error(&self) -> Option<f64> {
        self.theory.map(|t| ((self.mean - t) / t).abs())
    }
}

/// Kolmogorov–Smirnov statistic and asymptotic p-value of `sample` against `cdf`.
pub fn ks_test(sample: &[f64], cdf: impl Fn(f64) -> f64) -> (f64, f64) {
    let mut xs = sample.to_vec();
    xs.sort_by(|a, b| a.total_cmp(b));
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, x) in xs.iter().enumerate() {
        let f = cdf(*x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    let sn = n.sqrt();
    (d, kolmogorov_q((sn + 0.12 + 0.11 / sn) * d))
}

/// `P(K > t)` for the Kolmogorov distribution.
pub fn kolmogorov_q(t: f64) -> f64 {
    if t < 0.2 {
        return 1.0;
    }
    let mut s = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * t * t).exp();
        s += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}
