//! Kolmogorov–Smirnov statistics with asymptotic critical values.

/// `(α, c(α))` with `c(α) = sqrt(-ln(α/2)/2)` rounded, the limiting
/// Kolmogorov quantiles.
pub const KS_CRITICAL: [(f64, f64); 4] = [
    (0.10, 1.2239),
    (0.05, 1.3581),
    (0.01, 1.6276),
    (0.001, 1.9495),
];

fn coefficient(alpha: f64) -> f64 {
    KS_CRITICAL
        .iter()
        .find(|(a, _)| (*a - alpha).abs() < 1e-12)
        .map(|&(_, c)| c)
        .unwrap_or_else(|| (-(alpha / 2.0).ln() / 2.0).sqrt())
}

/// One-sample critical value `c(α)/√n`.
pub fn ks_critical(alpha: f64, n: usize) -> f64 {
    coefficient(alpha) / (n as f64).sqrt()
}

/// Two-sample critical value `c(α)·sqrt((n+m)/(nm))`.
pub fn ks_critical_two_sample(alpha: f64, n: usize, m: usize) -> f64 {
    let (n, m) = (n as f64, m as f64);
    coefficient(alpha) * ((n + m) / (n * m)).sqrt()
}

/// `sup_t |F_n(t) − (1 − e^{−t})|`. Sorts `samples` in place.
pub fn ks_exp1(samples: &mut [f64]) -> f64 {
    if samples.is_empty() {
        return f64::NAN;
    }
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in samples.iter().enumerate() {
        let f = if x > 0.0 { -(-x).exp_m1() } else { 0.0 };
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    d
}

/// `sup_t |F_n(t) − G_m(t)|` for integer-valued samples, ties handled by
/// evaluating only between distinct values. Sorts both inputs.
pub fn ks_two_sample(a: &mut [u64], b: &mut [u64]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return f64::NAN;
    }
    a.sort_unstable();
    b.sort_unstable();
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let t = a[i].min(b[j]);
        while i < a.len() && a[i] == t {
            i += 1;
        }
        while j < b.len() && b[j] == t {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    d
}
