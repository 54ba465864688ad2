use lhsd::copula::CopulaModel;
use lhsd::lhsd::{EmpiricalCopula, Lhsd, PlainMonteCarlo, RawSample, SamplingScheme};
use lhsd::rng::master_stream;
use lhsd::stats::{correlation, ks_statistic, mean, sample_variance};
use lhsd::vg::{
    asset_paths, derive_gamma_params, draw_uniforms, martingale_drift, simulate_increments,
    uniform_column, BasketModel, DriftConvention, Increments, QuantileCache, Sign, VgAsset,
};
use ndarray::Axis;
use proptest::prelude::*;
use rand::Rng;

const THETA: f64 = -0.2859;
const SIGMA: f64 = 0.1927;
const C: f64 = 0.2505;

fn table_asset() -> VgAsset {
    VgAsset::new(THETA, SIGMA, C, 100.0).unwrap()
}

fn basket(d: usize, alpha: f64, times: Vec<f64>) -> BasketModel {
    let cop = CopulaModel::fgm(alpha, d).unwrap();
    BasketModel::new(vec![table_asset(); d], cop.clone(), cop, times).unwrap()
}

#[test]
fn gamma_parameter_examples() {
    let g = derive_gamma_params(0.0, 1.0, 1.0).unwrap();
    let h = 0.5f64.sqrt();
    assert!((g.mu_plus - h).abs() < 1e-15 && (g.mu_minus - h).abs() < 1e-15);
    assert!((g.nu_plus - 0.5).abs() < 1e-15 && (g.nu_minus - 0.5).abs() < 1e-15);

    // 40-digit evaluation of the conversion
    let g = derive_gamma_params(THETA, SIGMA, C).unwrap();
    assert!((g.mu_plus - 0.164_544_789_896_305_81).abs() < 1e-15);
    assert!((g.mu_minus - 0.450_444_789_896_305_81).abs() < 1e-15);
    assert!((g.nu_plus - 0.006_782_284_464_445_865).abs() < 1e-16);
    assert!((g.nu_minus - 0.050_826_577_440_554_135).abs() < 1e-15);
    assert!((g.mu_plus - 0.16454).abs() < 1e-5 && (g.mu_minus - 0.45044).abs() < 1e-5);

    assert!(derive_gamma_params(0.1, 0.0, 0.2).is_err());
    assert!(derive_gamma_params(0.1, 0.2, -1.0).is_err());
}

#[test]
fn martingale_drift_examples() {
    let w = martingale_drift(0.0, 0.1, 0.1).unwrap();
    assert!((w - -0.005_001_250_416_822_979).abs() < 1e-15);
    let w = martingale_drift(THETA, SIGMA, C).unwrap();
    assert!((w - 0.258_762_671_030_492_56).abs() < 1e-14);
    // log argument 1 − θc − σ²c/2 ≤ 0
    assert!(martingale_drift(2.0, 0.1, 0.5).is_err());
}

#[test]
fn increment_moments_under_mc() {
    let dt = 0.25;
    let b = basket(2, 0.5, BasketModel::uniform_grid(4, dt));
    let n = 100_000;
    let inc = simulate_increments(&b, n, &PlainMonteCarlo, &mut master_stream(20), &QuantileCache::new())
        .unwrap();
    let a = table_asset();
    for (sign, mu, nu) in [(Sign::Plus, a.mu_plus, a.nu_plus), (Sign::Minus, a.mu_minus, a.nu_minus)] {
        for k in [0, 3] {
            let col: Vec<f64> = (0..n).map(|i| inc.get(i, k, 1, sign)).collect();
            let m = mean(&col);
            let se = (nu * dt / n as f64).sqrt();
            assert!((m - mu * dt).abs() < 3.0 * se, "{sign:?} step {k}: {m} vs {}", mu * dt);
            let v = sample_variance(&col);
            assert!((v / (nu * dt) - 1.0).abs() < 0.1, "{sign:?} step {k}: {v}");
        }
    }
    assert!(inc.data.iter().all(|&x| x >= 0.0));
}

#[test]
fn increment_columns_follow_the_gamma_law() {
    let b = basket(3, 0.5, BasketModel::uniform_grid(4, 0.25));
    let n = 10_000;
    let inc = simulate_increments(&b, n, &PlainMonteCarlo, &mut master_stream(21), &QuantileCache::new())
        .unwrap();
    let bound = 1.36 / (n as f64).sqrt() * 2.0;
    for sign in Sign::BOTH {
        for j in 0..3 {
            let law = b.assets()[j].increment_law(sign, 0.25).unwrap();
            let col: Vec<f64> = (0..n).map(|i| inc.get(i, 2, j, sign)).collect();
            let ks = ks_statistic(&col, |x| law.cdf(x));
            assert!(ks < bound, "{sign:?} asset {j}: {ks}");
        }
    }
}

#[test]
fn lhsd_uniform_columns_are_stratified() {
    let b = basket(4, 0.5, BasketModel::uniform_grid(4, 0.25));
    let n = 500;
    let mut rng = master_stream(22);
    let raw = draw_uniforms(&b, n, &mut rng).unwrap();
    assert_eq!(raw.ncols(), 2 * 4 * 4);
    let v = Lhsd::default().design(raw, &mut rng);
    for col in v.columns() {
        let mut cells: Vec<usize> = col.iter().map(|x| (x * n as f64) as usize).collect();
        cells.sort_unstable();
        assert_eq!(cells, (0..n).collect::<Vec<_>>());
    }
}

#[test]
fn plus_and_minus_uniforms_are_uncorrelated() {
    let d = 3;
    let b = basket(d, 1.0, BasketModel::uniform_grid(2, 0.5));
    let n = 20_000;
    let u = draw_uniforms(&b, n, &mut master_stream(23)).unwrap();
    let band = 3.0 / (n as f64).sqrt();
    for k in 0..2 {
        for i in 0..d {
            for j in 0..d {
                let p = u.column(uniform_column(k, Sign::Plus, i, d)).to_vec();
                let m = u.column(uniform_column(k, Sign::Minus, j, d)).to_vec();
                let r = correlation(&p, &m);
                assert!(r.abs() < band, "step {k} plus {i} minus {j}: {r}");
            }
        }
    }
    // across steps as well
    let a = u.column(uniform_column(0, Sign::Plus, 0, d)).to_vec();
    let c = u.column(uniform_column(1, Sign::Plus, 1, d)).to_vec();
    assert!(correlation(&a, &c).abs() < band);
}

#[test]
fn plus_columns_carry_the_plus_copula() {
    let d = 3;
    let plus = CopulaModel::fgm(1.0, d).unwrap();
    let minus = CopulaModel::independence(d).unwrap();
    let b = BasketModel::new(vec![table_asset(); d], plus.clone(), minus.clone(), vec![1.0]).unwrap();
    let u = draw_uniforms(&b, 100_000, &mut master_stream(24)).unwrap();
    let half = vec![0.5; d];
    for (sign, model) in [(Sign::Plus, &plus), (Sign::Minus, &minus)] {
        let cols: Vec<usize> = (0..d).map(|j| uniform_column(0, sign, j, d)).collect();
        let sub = u.select(Axis(1), &cols);
        let emp = EmpiricalCopula::new(&RawSample::new(sub).unwrap());
        let got = emp.rank_based(&half).unwrap();
        let want = model.cdf(&half).unwrap();
        assert!((got - want).abs() < 0.01, "{sign:?}: {got} vs {want}");
    }
}

#[test]
fn zero_increments_give_the_deterministic_drift() {
    let b = basket(2, 0.5, BasketModel::uniform_grid(4, 0.25));
    let w = b.assets()[0].w;
    let inc = Increments::zeros(3, 4, 2);
    let s = asset_paths(&b, &inc, 0.05, DriftConvention::Literal);
    for (k, &t) in b.times().iter().enumerate() {
        let want = 100.0 * ((w - 0.05) * t).exp();
        assert!((s[[2, k, 0]] - want).abs() < 1e-12);
    }
    // r = w under the literal reading keeps the price flat
    let flat = asset_paths(&b, &inc, w, DriftConvention::Literal);
    assert!(flat.iter().all(|&x| (x - 100.0).abs() < 1e-12));
}

#[test]
fn discounted_terminal_price_is_a_martingale() {
    // One monitoring step to maturity: the terminal law is the same as on
    // any finer grid because increments are independent.
    let r = 0.05;
    let b = basket(2, 0.5, vec![1.0]);
    let n = 1_000_000;
    let inc = simulate_increments(&b, n, &PlainMonteCarlo, &mut master_stream(25), &QuantileCache::new())
        .unwrap();
    let s = asset_paths(&b, &inc, r, DriftConvention::RiskNeutral);
    for j in 0..2 {
        let ratio: Vec<f64> = (0..n).map(|i| (-r).exp() * s[[i, 0, j]] / 100.0).collect();
        let m = mean(&ratio);
        let se = (sample_variance(&ratio) / n as f64).sqrt();
        assert!((m - 1.0).abs() < 3.0 * se, "asset {j}: {m} ± {se}");
        assert!((m - 1.0).abs() < 1e-3);
    }
}

#[test]
fn literal_drift_is_not_a_martingale() {
    let r = 0.05;
    let b = basket(2, 0.5, vec![1.0]);
    let n = 100_000;
    let inc = simulate_increments(&b, n, &PlainMonteCarlo, &mut master_stream(26), &QuantileCache::new())
        .unwrap();
    let s = asset_paths(&b, &inc, r, DriftConvention::Literal);
    let ratio: Vec<f64> = (0..n).map(|i| (-r).exp() * s[[i, 0, 0]] / 100.0).collect();
    // e^{−2r} in expectation
    assert!((mean(&ratio) - (-2.0 * r).exp()).abs() < 3e-3);
}

#[test]
fn increments_depend_on_scheme_only_through_the_design() {
    let b = basket(2, 0.5, BasketModel::uniform_grid(2, 0.5));
    let cache = QuantileCache::new();
    let a = simulate_increments(&b, 64, &Lhsd::default(), &mut master_stream(27), &cache).unwrap();
    let c = simulate_increments(&b, 64, &Lhsd::default(), &mut master_stream(27), &cache).unwrap();
    assert_eq!(a, c);
    assert!(!cache.is_empty());
}

#[test]
fn basket_validation() {
    let a = table_asset();
    let c2 = CopulaModel::fgm(0.5, 2).unwrap();
    let c3 = CopulaModel::fgm(0.5, 3).unwrap();
    assert!(BasketModel::new(vec![a; 2], c2.clone(), c3, vec![1.0]).is_err());
    assert!(BasketModel::new(vec![a; 2], c2.clone(), c2.clone(), vec![0.5, 0.5]).is_err());
    assert!(BasketModel::new(vec![a; 2], c2.clone(), c2, vec![]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn mu_product_identity(theta in -1.0f64..1.0, sigma in 0.01f64..1.0, c in 0.01f64..2.0) {
        let g = derive_gamma_params(theta, sigma, c).unwrap();
        let want = sigma * sigma / (2.0 * c);
        prop_assert!(g.mu_plus > 0.0 && g.mu_minus > 0.0);
        prop_assert!((g.mu_plus * g.mu_minus - want).abs() <= 1e-12 * want.max(1.0));
        prop_assert!((g.mu_plus - g.mu_minus - theta).abs() <= 1e-12 * theta.abs().max(1.0));
        prop_assert!((g.nu_plus - g.mu_plus.powi(2) * c).abs() <= 1e-15 * g.nu_plus.max(1.0));
    }

    #[test]
    fn increment_law_moments(sign in prop::bool::ANY, dt in 0.01f64..2.0) {
        let a = table_asset();
        let (s, mu, nu) = if sign { (Sign::Plus, a.mu_plus, a.nu_plus) } else { (Sign::Minus, a.mu_minus, a.nu_minus) };
        let law = a.increment_law(s, dt).unwrap();
        prop_assert!((law.mean() - mu * dt).abs() <= 1e-12 * mu * dt);
        prop_assert!((law.variance() - nu * dt).abs() <= 1e-12 * nu * dt);
    }

    #[test]
    fn gamma_quantile_inverts_the_cdf(shape in 0.05f64..50.0, p in 1e-6f64..0.999_999) {
        let law = lhsd::vg::GammaLaw::new(shape, 1.0).unwrap();
        let x = law.quantile(p).unwrap();
        prop_assert!((law.cdf(x) - p).abs() < 1e-9 * p.min(1.0 - p).max(1e-4) + 1e-12);
    }
}

#[test]
fn random_valid_parameters_build_assets() {
    let mut rng = master_stream(28);
    for _ in 0..100 {
        let theta = rng.random_range(-0.5..0.5);
        let sigma = rng.random_range(0.05..0.5);
        let c = rng.random_range(0.05..0.5);
        let a = VgAsset::new(theta, sigma, c, 50.0).unwrap();
        let prod = a.mu_plus * a.mu_minus;
        assert!((prod - sigma * sigma / (2.0 * c)).abs() < 1e-12);
    }
}
