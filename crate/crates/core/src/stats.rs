//! Small statistics toolbox: order statistics for batch aggregation, and the
//! rank tests the verification suite leans on.

/// Linear-interpolation percentile of an unsorted sample; `q` in [0, 1].
pub fn percentile(values: &[f64], q: f64) -> f64 {
    assert!(!values.is_empty(), "percentile of empty sample");
    let mut sorted: Vec<f64> = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        let frac = pos - lo as f64;
        sorted[lo] * (1.0 - frac) + sorted[hi] * frac
    }
}

pub fn median(values: &[f64]) -> f64 {
    percentile(values, 0.5)
}

/// Two-sided Kolmogorov-Smirnov statistic of a sample against a theoretical
/// CDF.
pub fn ks_statistic(sample: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut sorted: Vec<f64> = sample.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        let lo = i as f64 / n;
        let hi = (i + 1) as f64 / n;
        d = d.max((f - lo).abs()).max((hi - f).abs());
    }
    d
}

/// Asymptotic KS critical value at significance `alpha` for sample size `n`.
pub fn ks_critical(n: usize, alpha: f64) -> f64 {
    // c(alpha) = sqrt(-ln(alpha / 2) / 2)
    let c = (-(alpha / 2.0).ln() / 2.0).sqrt();
    c / (n as f64).sqrt()
}

pub fn exp_cdf(mean: f64) -> impl Fn(f64) -> f64 {
    move |x| if x <= 0.0 { 0.0 } else { 1.0 - (-x / mean).exp() }
}

pub fn uniform_cdf(lo: f64, hi: f64) -> impl Fn(f64) -> f64 {
    move |x| ((x - lo) / (hi - lo)).clamp(0.0, 1.0)
}

/// One-sided Mann-Whitney z score for the alternative "values in `b` tend to
/// be larger than values in `a`", with the normal approximation and tie
/// correction. Positive z supports the alternative; compare against 1.645
/// for alpha = 0.05.
pub fn mann_whitney_z(a: &[f64], b: &[f64]) -> f64 {
    let n1 = a.len() as f64;
    let n2 = b.len() as f64;
    assert!(n1 > 0.0 && n2 > 0.0, "empty sample");

    let mut all: Vec<(f64, bool)> = a
        .iter()
        .map(|&v| (v, false))
        .chain(b.iter().map(|&v| (v, true)))
        .collect();
    all.sort_by(|x, y| x.0.total_cmp(&y.0));

    // Midranks with tie bookkeeping.
    let n = all.len();
    let mut rank_sum_b = 0.0;
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j < n && all[j].0 == all[i].0 {
            j += 1;
        }
        let count = (j - i) as f64;
        let midrank = (i + j + 1) as f64 / 2.0; // average of ranks i+1..=j
        for item in &all[i..j] {
            if item.1 {
                rank_sum_b += midrank;
            }
        }
        tie_term += count * (count * count - 1.0);
        i = j;
    }

    let u_b = rank_sum_b - n2 * (n2 + 1.0) / 2.0;
    let mean_u = n1 * n2 / 2.0;
    let total = n1 + n2;
    let var_u = n1 * n2 / 12.0 * ((total + 1.0) - tie_term / (total * (total - 1.0)));
    if var_u <= 0.0 {
        return 0.0;
    }
    (u_b - mean_u) / var_u.sqrt()
}

/// z critical value for a one-sided test at alpha = 0.05.
pub const Z_ONE_SIDED_05: f64 = 1.6448536269514722;
