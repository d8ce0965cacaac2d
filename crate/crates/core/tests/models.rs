use abc_psvm::grid::{linspace, trapezoid, GridDensity};
use abc_psvm::models::*;
use abc_psvm::rng::{domain, substream};
use abc_psvm::special::{normal_cdf, normal_pdf};
use abc_psvm::stats::{mean, sample_variance};
use proptest::prelude::*;

fn stream(seed: u64, i: u64) -> abc_psvm::rng::Stream {
    substream(seed, domain::AUXILIARY, i)
}

#[test]
fn white_noise_variance() {
    let y = simulate_ar1(0.0, 20_001, 0.5, 1.0, &mut stream(1, 0)).unwrap();
    let v = sample_variance(&y[1..]);
    // sd of the sample variance is about σ²·√(2/n) ≈ 0.0025.
    assert!((v - 0.25).abs() < 0.01, "{v}");
}

#[test]
fn ar1_estimator_is_consistent() {
    let est: Vec<f64> = (0..200)
        .map(|i| ar1_mle(&simulate_ar1(0.6, 1000, 0.5, 1.0, &mut stream(2, i)).unwrap()).unwrap())
        .collect();
    assert!((mean(&est) - 0.6).abs() < 0.01);
}

fn truncated_normal_mean(m: f64, s: f64, a: f64, b: f64) -> f64 {
    let (za, zb) = ((a - m) / s, (b - m) / s);
    m + s * (normal_pdf(za) - normal_pdf(zb)) / (normal_cdf(zb) - normal_cdf(za))
}

#[test]
fn reference_posterior_matches_truncated_normal() {
    for (seed, beta) in [(3, 0.6), (4, 0.95), (5, -0.3)] {
        let y = simulate_ar1(beta, 100, 0.5, 1.0, &mut stream(seed, 0)).unwrap();
        let post = ar1_reference_posterior(&y, 0.5, -1.0, 1.0, &linspace(-1.0, 1.0, 20_001)).unwrap();
        let (m, s) = ar1_gaussian_posterior(&y, 0.5).unwrap();
        let want = truncated_normal_mean(m, s, -1.0, 1.0);
        assert!((post.mean() - want).abs() < 1e-6, "beta {beta}: {} vs {want}", post.mean());
    }
    // Short series with a wide posterior that the truncation bites into.
    let y = [1.0, 0.9, 0.7];
    let post = ar1_reference_posterior(&y, 0.5, -1.0, 1.0, &linspace(-1.0, 1.0, 20_001)).unwrap();
    let (m, s) = ar1_gaussian_posterior(&y, 0.5).unwrap();
    assert!((post.mean() - truncated_normal_mean(m, s, -1.0, 1.0)).abs() < 1e-6);
}

#[test]
fn gamma_moment_estimator_unbiased() {
    let n = 100_000;
    let x = simulate_gamma(3.0, 2.0, n, &mut stream(6, 0)).unwrap();
    let a = gamma_m_estimator(&x, 2.0).unwrap();
    assert!((a - 3.0).abs() < 3.0 * (3.0 / n as f64).sqrt(), "{a}");
}

fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut c, mut d) = (hi - g * (hi - lo), lo + g * (hi - lo));
    while hi - lo > 1e-12 * (1.0 + lo.abs()) {
        if f(c) > f(d) {
            hi = d;
        } else {
            lo = c;
        }
        c = hi - g * (hi - lo);
        d = lo + g * (hi - lo);
    }
    0.5 * (lo + hi)
}

#[test]
fn gamma_mle_maximizes_likelihood() {
    for (seed, alpha) in [(7, 0.4), (8, 3.0), (9, 25.0)] {
        let x = simulate_gamma(alpha, 1.5, 500, &mut stream(seed, 0)).unwrap();
        let mle = gamma_mle(&x, 1.5).unwrap();
        let oracle = golden_max(|a| gamma_log_likelihood(a, &x, 1.5), 1e-3, 200.0);
        assert!((mle - oracle).abs() < 1e-8 * oracle.max(1.0) * 10.0, "{mle} vs {oracle}");
    }
}

#[test]
fn gamma_partial_posterior_is_unimodal() {
    let (at, n) = (2.3, 50);
    let grid = linspace(1e-3, 50.0 * at, 20_000);
    let f: Vec<f64> = grid.iter().map(|&a| gamma_partial_posterior_logpdf(a, at, n, 1.0)).collect();
    let signs: Vec<bool> = f.windows(2).map(|w| w[1] > w[0]).collect();
    let changes = signs.windows(2).filter(|w| w[0] != w[1]).count();
    assert_eq!(changes, 1);
}

#[test]
fn pivot_draws_center_and_spread() {
    let (n, lambda, z_bar) = (50, 1.0, 0.7);
    let draws: Vec<f64> = (0..50_000)
        .map(|i| laplace_pivot_posterior_sample(z_bar, lambda, n, &mut stream(10, i)).unwrap())
        .collect();
    let var = sample_variance(&draws);
    let se = (var / draws.len() as f64).sqrt();
    assert!((mean(&draws) - z_bar).abs() < 3.0 * se);
    let m = mean(&draws);
    let skew = draws.iter().map(|d| ((d - m) / var.sqrt()).powi(3)).sum::<f64>() / draws.len() as f64;
    assert!(skew.abs() < 3.0 * (6.0 / draws.len() as f64).sqrt(), "skewness {skew}");
    let scaled = var * n as f64;
    assert!((scaled - 2.0 * lambda * lambda).abs() < 0.05 * 2.0 * lambda * lambda);
}

#[test]
fn laplace_data_have_stated_mean() {
    let x = simulate_laplace(1.5, 0.5, 40_000, &mut stream(11, 0)).unwrap();
    assert!((mean(&x) - 1.5).abs() < 3.0 * (0.5f64 / 40_000.0).sqrt());
}

#[test]
fn pure_birth_counts_are_poisson() {
    let (lambda, t) = (1.5, 20.0);
    let counts: Vec<f64> = (0..2000)
        .map(|i| {
            let p = simulate_birth_death(lambda, 0.0, 2, t, &mut stream(12, i)).unwrap();
            assert_eq!(p.r2, 0);
            p.r1 as f64
        })
        .collect();
    let se = (lambda * t / counts.len() as f64).sqrt();
    assert!((mean(&counts) - lambda * t).abs() < 3.0 * se);
}

#[test]
fn arrival_rate_estimator_is_consistent() {
    let est: Vec<f64> = (0..20)
        .map(|i| iep_mle(&simulate_birth_death(2.0, 1.0, 5, 2000.0, &mut stream(13, i)).unwrap()).unwrap().0)
        .collect();
    // sd of each estimate is (λ/T)^{1/2} ≈ 0.032, so 5% is about three sds.
    assert!((mean(&est) - 2.0).abs() < 0.1);
    assert!(est.iter().filter(|l| (*l - 2.0).abs() < 0.1).count() >= 18);
}

fn direct_sum(u: f64, r: u64) -> f64 {
    (0..=r).map(|j| j as f64 * u.powi(j as i32)).sum()
}

fn mu_for_u(u: f64, mu_hat: f64) -> f64 {
    // μ e^{−μ/μ̂} increases on (0, μ̂); bisect there.
    let (mut lo, mut hi) = (1e-12, mu_hat);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid * (-mid / mu_hat).exp() < u {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn closed_form_matches_direct_sum() {
    let mu = mu_for_u(0.3, 1.0);
    let u = mu * (-mu).exp();
    let got = iep_partial_posterior_unnormalized(mu, 1.0, 20).unwrap();
    let want = direct_sum(u, 20);
    assert!(((got - want) / want).abs() < 1e-10);

    for (mu, mu_hat, r) in [(5.0f64, 5.0f64, 30u64), (2.7, 2.72, 400), (0.9, 1.0, 3), (1.0, 1.0, 1005)] {
        let u: f64 = mu * (-mu / mu_hat).exp();
        let got = iep_partial_posterior_log(mu, mu_hat, r).unwrap();
        let want = direct_sum(u, r).ln();
        assert!((got - want).abs() < 1e-10 * want.abs().max(1.0), "mu {mu} r {r}: {got} vs {want}");
    }
}

#[test]
fn near_unit_root_approaches_triangular_number() {
    let e = std::f64::consts::E;
    let r = 50;
    let limit = (r * (r + 1) / 2) as f64;
    let close = iep_partial_posterior_unnormalized(e * (1.0 + 1e-3), e, r).unwrap();
    assert!(((close - limit) / limit).abs() < 1e-3);
}

#[test]
fn limit_density_integrates_to_one() {
    let grid = linspace(-30.0, 30.0, 8001);
    for v in LimitVariance::ALL {
        let f: Vec<f64> = grid.iter().map(|&t| iep_limit_density(t, 2.0, 1.3, v).unwrap()).collect();
        assert!((trapezoid(&grid, &f) - 1.0).abs() < 1e-9);
    }
}

#[test]
fn musq_density_is_bimodal_at_closed_form_mode() {
    let (s2, n, shape, scale) = (2.4, 30, 2.0, 1.0);
    let grid = linspace(-6.0, 6.0, 24_001);
    let f: Vec<f64> = grid.iter().map(|&m| normal_musq_partial_posterior(m, s2, n, shape, scale).unwrap()).collect();
    let peaks: Vec<f64> = (1..grid.len() - 1).filter(|&i| f[i] > f[i - 1] && f[i] >= f[i + 1]).map(|i| grid[i]).collect();
    assert_eq!(peaks.len(), 2);
    assert!((peaks[0] + peaks[1]).abs() < 1e-12);
    let polished = golden_max(|m| normal_musq_log_density(m, s2, n, shape, scale).unwrap(), peaks[1] - 1e-3, peaks[1] + 1e-3);
    let mode = normal_musq_mode(s2, n, shape, scale).unwrap();
    assert!((polished - mode).abs() < 1e-6);
    // Each half-line carries unit mass.
    assert!((trapezoid(&grid, &f) - 2.0).abs() < 1e-3);
}

#[test]
fn oracle_densities_normalize_on_their_grids() {
    let y = simulate_ar1(0.6, 100, 0.5, 1.0, &mut stream(14, 0)).unwrap();
    let coarse = ar1_reference_posterior(&y, 0.5, -1.0, 1.0, &linspace(-1.0, 1.0, 4096)).unwrap();
    let fine = linspace(-1.0, 1.0, 65_536);
    let on_fine: Vec<f64> = fine.iter().map(|&b| coarse.pdf(b)).collect();
    assert!((trapezoid(&fine, &on_fine) - 1.0).abs() < 1e-3);

    let grid = linspace(0.5, 1.6, 4096);
    let log: Vec<f64> = grid.iter().map(|&m| iep_partial_posterior_log(m, 1.05, 1000).unwrap()).collect();
    let g = GridDensity::from_log(grid, &log).unwrap();
    assert!((g.mass() - 1.0).abs() < 1e-3);

    let at = 1.7;
    let grid = linspace(1.0, 2.5, 4096);
    let log: Vec<f64> = grid.iter().map(|&a| gamma_partial_posterior_logpdf(a, at, 5000, 1.0)).collect();
    let g = GridDensity::from_log(grid, &log).unwrap();
    assert!((g.mass() - 1.0).abs() < 1e-3);
    assert!(g.density()[0] < 1e-12 && *g.density().last().unwrap() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn simulators_are_reproducible(seed in any::<u64>(), theta in 0.05f64..0.95) {
        let a = simulate_ar1(theta, 50, 0.5, 1.0, &mut stream(seed, 0)).unwrap();
        let b = simulate_ar1(theta, 50, 0.5, 1.0, &mut stream(seed, 0)).unwrap();
        prop_assert_eq!(a, b);
        let a = simulate_gamma(theta * 5.0, 2.0, 30, &mut stream(seed, 1)).unwrap();
        let b = simulate_gamma(theta * 5.0, 2.0, 30, &mut stream(seed, 1)).unwrap();
        prop_assert_eq!(a, b);
        let a = simulate_birth_death(theta * 3.0, 0.5, 4, 10.0, &mut stream(seed, 2)).unwrap();
        let b = simulate_birth_death(theta * 3.0, 0.5, 4, 10.0, &mut stream(seed, 2)).unwrap();
        prop_assert_eq!(a, b);
        let a = laplace_pivot_posterior_sample(0.1, theta, 10, &mut stream(seed, 3)).unwrap();
        let b = laplace_pivot_posterior_sample(0.1, theta, 10, &mut stream(seed, 3)).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn birth_death_paths_conserve_counts(seed in any::<u64>(), lambda in 0.0f64..4.0, mu in 0.0f64..2.0, x0 in 0u64..20) {
        let p = simulate_birth_death(lambda, mu, x0, 15.0, &mut stream(seed, 4)).unwrap();
        prop_assert_eq!(p.final_state() as i64, x0 as i64 + p.r1 as i64 - p.r2 as i64);
        prop_assert_eq!((p.r1 + p.r2) as usize, p.times.len());
        prop_assert!(p.area >= 0.0);
        prop_assert!(p.times.windows(2).all(|t| t[1] > t[0]));
        let mut prev = x0 as i64;
        for s in &p.states {
            prop_assert_eq!((*s as i64 - prev).abs(), 1);
            prev = *s as i64;
        }
        prop_assert!(p.times.iter().all(|t| *t < 15.0));
    }

    #[test]
    fn gamma_score_vanishes_at_mle(seed in any::<u64>(), alpha in 0.1f64..30.0, beta in 0.2f64..5.0) {
        let x = simulate_gamma(alpha, beta, 200, &mut stream(seed, 5)).unwrap();
        let mle = gamma_mle(&x, beta).unwrap();
        let target = x.iter().map(|v| v.ln()).sum::<f64>() / x.len() as f64 - beta.ln();
        prop_assert!((abc_psvm::special::digamma(mle) - target).abs() <= 1e-8);
    }
}

#[test]
fn pivot_draws_are_symmetric() {
    for seed in 0..4 {
        let draws: Vec<f64> = (0..20_000)
            .map(|i| laplace_pivot_posterior_sample(0.0, 1.0, 5, &mut substream(seed, domain::AUXILIARY, i)).unwrap())
            .collect();
        let m = mean(&draws);
        let sd = sample_variance(&draws).sqrt();
        let skew = draws.iter().map(|d| ((d - m) / sd).powi(3)).sum::<f64>() / draws.len() as f64;
        // Three standard errors of the sample skewness, widened for the excess
        // kurtosis of the draws (1.2 at n = 5).
        assert!(skew.abs() < 3.0 * (6.0 * 2.2 / draws.len() as f64).sqrt(), "seed {seed}: {skew}");
    }
}
