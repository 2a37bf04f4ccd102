//! Distributional checks of the vMF sampler: the cosine of the angle to
//! the mean direction must follow the marginal density proportional to
//! `e^{kappa t}` on [-1, 1].

use vmf_doppler::vmf::VmfParams;

/// Two-sided one-sample Kolmogorov-Smirnov statistic against `cdf`.
fn ks_statistic(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    d
}

/// Asymptotic two-sided KS critical value at the 1% level.
fn ks_critical_1pct(n: usize) -> f64 {
    1.6276236115189504 / (n as f64).sqrt()
}

/// CDF of t = draw . mean for concentration kappa.
fn mean_cosine_cdf(kappa: f64) -> impl Fn(f64) -> f64 {
    move |t: f64| {
        if kappa == 0.0 {
            (t + 1.0) / 2.0
        } else {
            (kappa * (t + 1.0)).exp_m1() / (2.0 * kappa).exp_m1()
        }
    }
}

#[test]
fn mean_cosine_passes_ks_at_one_percent() {
    let n = 100_000usize;
    for (kappa, seed) in [(0.0, 101u64), (2.0, 102), (10.0, 103)] {
        let p = VmfParams::new(0.8, -0.2, kappa).unwrap();
        let mean = p.mean_doa();
        let mut t: Vec<f64> = p.sample(n, seed).iter().map(|v| v.dot(mean)).collect();
        t.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let d = ks_statistic(&t, mean_cosine_cdf(kappa));
        let crit = ks_critical_1pct(n);
        assert!(d < crit, "kappa={kappa}: D={d} critical={crit}");
    }
}

#[test]
fn tangential_angle_is_uniform() {
    // project the draws onto the plane orthogonal to the mean (taken as
    // the z-axis here) and KS-test the angle against uniformity
    let p = VmfParams::new(0.0, core::f64::consts::FRAC_PI_2, 5.0).unwrap();
    let n = 100_000usize;
    let mut angles: Vec<f64> = p.sample(n, 7).iter().map(|v| v.y().atan2(v.x())).collect();
    angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let pi = core::f64::consts::PI;
    let d = ks_statistic(&angles, |a| (a + pi) / (2.0 * pi));
    assert!(d < ks_critical_1pct(n), "D={d}");
}
