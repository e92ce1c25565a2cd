//! Small statistical helpers shared by the panel and inference modules.

use statrs::distribution::{ChiSquared, ContinuousCDF, Normal, StudentsT};

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Divide-by-N standard deviation.
pub fn population_sd(xs: &[f64]) -> f64 {
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / xs.len() as f64).sqrt()
}

/// Divide-by-(N-1) variance.
pub fn sample_variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// `***` p < .01, `**` p < .05, `*` p < .1.
pub fn stars(p: f64) -> &'static str {
    if p < 0.01 {
        "***"
    } else if p < 0.05 {
        "**"
    } else if p < 0.1 {
        "*"
    } else {
        ""
    }
}

pub fn normal_two_sided_p(z: f64) -> f64 {
    if !z.is_finite() {
        return if z.is_nan() { f64::NAN } else { 0.0 };
    }
    let n = Normal::new(0.0, 1.0).expect("standard normal");
    2.0 * n.cdf(-z.abs())
}

pub fn t_two_sided_p(t: f64, df: f64) -> f64 {
    if !t.is_finite() || !(df > 0.0) {
        return if t.is_infinite() { 0.0 } else { f64::NAN };
    }
    let d = StudentsT::new(0.0, 1.0, df).expect("valid df");
    2.0 * d.cdf(-t.abs())
}

pub fn chi2_upper_p(x: f64, df: usize) -> f64 {
    if df == 0 {
        return f64::NAN;
    }
    if x.is_infinite() {
        return 0.0;
    }
    let d = ChiSquared::new(df as f64).expect("valid df");
    1.0 - d.cdf(x.max(0.0))
}
