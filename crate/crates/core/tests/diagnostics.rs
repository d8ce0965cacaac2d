use abc_psvm::diagnostics::*;
use abc_psvm::models::{gamma_fisher_information, gamma_godambe_information};
use abc_psvm::rng::{domain, substream};
use abc_psvm::special::{normal_cdf, normal_pdf, normal_quantile};
use abc_psvm::stats::{quantile_sorted, sorted};
use ndarray::arr2;
use proptest::prelude::*;
use rand::Rng;
use rand_distr::StandardNormal;

fn normals(seed: u64, m: usize) -> Vec<f64> {
    let mut rng = substream(seed, domain::AUXILIARY, 0);
    (0..m).map(|_| rng.sample(StandardNormal)).collect()
}

#[test]
fn kde_recovers_standard_normal() {
    let x = normals(1, 10_000);
    let k = kde(&x, None, None).unwrap();
    let sup = k.grid.iter().zip(&k.density).map(|(g, d)| (d - normal_pdf(*g)).abs()).fold(0.0, f64::max);
    assert!(sup <= 0.05, "{sup}");
    assert!((k.mass() - 1.0).abs() < 1e-3);
}

#[test]
fn ks_of_matching_normal_sample_is_small() {
    assert!(ks_statistic(&normals(2, 10_000), normal_cdf) <= 0.02);
}

#[test]
fn normal_interval_endpoints() {
    let ci = credible_interval(&normals(3, 100_000), 0.95).unwrap();
    assert!((ci.lower() + 1.96).abs() < 0.02 && (ci.upper() - 1.96).abs() < 0.02);
    assert_eq!(ci.basis, IntervalBasis::Empirical);
}

#[test]
fn symmetric_sample_interval_centers_on_median() {
    let mut x = normals(4, 501);
    let extra: Vec<f64> = x.iter().map(|v| -v).collect();
    x.extend(extra);
    let ci = credible_interval(&x, 0.8).unwrap();
    let median = quantile_sorted(&sorted(&x), 0.5);
    assert!((ci.center - median).abs() < 1e-12);
}

#[test]
fn godambe_interval_is_wider_for_gamma_shape() {
    for alpha in [0.5, 1.0, 3.0, 10.0] {
        let fisher = wald_interval(alpha, gamma_fisher_information(alpha), 5000, 0.95, IntervalBasis::Fisher).unwrap();
        let godambe = wald_interval(alpha, gamma_godambe_information(alpha), 5000, 0.95, IntervalBasis::Godambe).unwrap();
        assert!(godambe.half_width > fisher.half_width);
        assert!(godambe.lower() < fisher.lower() && godambe.upper() > fisher.upper());
    }
    assert!(wald_interval(0.0, 0.0, 10, 0.9, IntervalBasis::Fisher).is_err());
}

#[test]
fn scalar_chisq_set_is_a_symmetric_interval() {
    let (s, w, n, level) = (0.4, 2.5, 80usize, 0.9);
    let half = normal_quantile(0.5 * (1.0 + level)) / (n as f64 * w).sqrt();
    let sigma = arr2(&[[w]]);
    let inside = |h: f64| chisq_credible_set_membership(&[h], &[s], &sigma, n, level).unwrap();
    assert!(inside(s + half * (1.0 - 1e-9)) && inside(s - half * (1.0 - 1e-9)));
    assert!(!inside(s + half * (1.0 + 1e-7)) && !inside(s - half * (1.0 + 1e-7)));
    let wald = wald_interval(s, w, n, level, IntervalBasis::Fisher).unwrap();
    assert!((wald.half_width - half).abs() < 1e-15);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ks_invariant_under_monotone_maps(xs in prop::collection::vec(-3.0f64..3.0, 1..60)) {
        let direct = ks_statistic(&xs, normal_cdf);
        let mapped: Vec<f64> = xs.iter().map(|v| v.exp()).collect();
        let via = ks_statistic(&mapped, |y| normal_cdf(y.ln()));
        prop_assert!((direct - via).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&direct));
    }

    #[test]
    fn kde_mass_on_default_grid(xs in prop::collection::vec(-5.0f64..5.0, 2..200)) {
        prop_assume!(abc_psvm::stats::sample_variance(&xs) > 1e-6);
        let k = kde(&xs, None, None).unwrap();
        prop_assert!(k.mass() >= 0.997 && k.mass() <= 1.003, "mass {}", k.mass());
    }

    #[test]
    fn credible_intervals_nest(xs in prop::collection::vec(-5.0f64..5.0, 20..200), a in 0.05f64..0.95, b in 0.05f64..0.95) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let narrow = credible_interval(&xs, lo).unwrap();
        let wide = credible_interval(&xs, hi).unwrap();
        prop_assert!(wide.lower() <= narrow.lower() && wide.upper() >= narrow.upper());
    }

    #[test]
    fn association_is_affine_invariant(
        xs in prop::collection::vec(-5.0f64..5.0, 3..40),
        noise in prop::collection::vec(-1.0f64..1.0, 40),
        a in 0.1f64..10.0, b in -5.0f64..5.0, c in 0.1f64..10.0, sign in any::<bool>()
    ) {
        let ys: Vec<f64> = xs.iter().zip(&noise).map(|(x, e)| x + e).collect();
        let base = association_report(&xs, &ys);
        prop_assume!(base.is_ok());
        let r = base.unwrap().pearson_r;
        let s = if sign { -1.0 } else { 1.0 };
        let xs2: Vec<f64> = xs.iter().map(|x| s * a * x + b).collect();
        let ys2: Vec<f64> = ys.iter().map(|y| c * y - b).collect();
        let r2 = association_report(&xs2, &ys2).unwrap().pearson_r;
        prop_assert!((r2 - s * r).abs() < 1e-9);
    }
}
