use std::sync::OnceLock;

use lhsd::copula::{Condition, CopulaModel};
use lhsd::rng::master_stream;
use lhsd::stats::{chi_square_two_sample, ks_statistic, spearman_rho};
use ndarray::Array2;
use proptest::prelude::*;
use rand::Rng;

fn models() -> &'static Vec<CopulaModel> {
    static MODELS: OnceLock<Vec<CopulaModel>> = OnceLock::new();
    MODELS.get_or_init(|| {
        let mut out = Vec::new();
        for d in 1..=4 {
            out.push(CopulaModel::independence(d).unwrap());
        }
        for d in 2..=4 {
            for a in [-1.0, -0.5, 0.0, 0.3, 0.5, 1.0] {
                out.push(CopulaModel::fgm(a, d).unwrap());
            }
            for a in [-1.0, -0.4, 0.0, 0.5, 0.9, 1.0] {
                out.push(CopulaModel::amh(a, d).unwrap());
            }
        }
        out
    })
}

/// Closed forms written out independently of the library.
fn reference_cdf(family: &str, alpha: f64, u: &[f64]) -> f64 {
    let p: f64 = u.iter().product();
    let q: f64 = u.iter().map(|x| 1.0 - x).product();
    match family {
        "independence" => p,
        "fgm" => p * (1.0 + alpha * q),
        "amh" => p / (1.0 - alpha * q),
        _ => unreachable!(),
    }
}

/// `Σ_k α^k ∏_i ∂/∂u_i [u_i (1 − u_i)^k]` for AMH, the termwise derivative of
/// the geometric expansion of the distribution function.
fn reference_density(family: &str, alpha: f64, u: &[f64]) -> f64 {
    match family {
        "independence" => 1.0,
        "fgm" => 1.0 + alpha * u.iter().map(|x| 1.0 - 2.0 * x).product::<f64>(),
        "amh" => {
            let mut sum = 1.0;
            let mut ak = 1.0;
            for k in 1..400 {
                ak *= alpha;
                let term: f64 = u
                    .iter()
                    .map(|&x| (1.0 - x).powi(k - 1) * (1.0 - (k as f64 + 1.0) * x))
                    .product();
                sum += ak * term;
                if (ak * term).abs() < 1e-17 {
                    break;
                }
            }
            sum
        }
        _ => unreachable!(),
    }
}

#[test]
fn closed_form_examples() {
    let fgm0 = CopulaModel::fgm(0.0, 2).unwrap();
    assert!((fgm0.cdf(&[0.3, 0.7]).unwrap() - 0.21).abs() < 1e-15);
    let fgm1 = CopulaModel::fgm(1.0, 2).unwrap();
    assert!((fgm1.cdf(&[0.5, 0.5]).unwrap() - 0.3125).abs() < 1e-15);
    let amh = CopulaModel::amh(0.5, 3).unwrap();
    assert!((amh.cdf(&[0.5, 0.5, 0.5]).unwrap() - 2.0 / 15.0).abs() < 1e-15);

    let ind = CopulaModel::independence(2).unwrap();
    assert!((ind.partial_derivative(&[0.3, 0.7], 0).unwrap() - 0.7).abs() < 1e-15);
    let u = [0.2, 0.6, 0.9];
    let fgm0 = CopulaModel::fgm(0.0, 3).unwrap();
    assert!((fgm0.partial_derivative(&u, 1).unwrap() - 0.18).abs() < 1e-15);
}

#[test]
fn evaluation_errors() {
    assert!(CopulaModel::fgm(1.5, 2).is_err());
    assert!(CopulaModel::amh(-1.01, 3).is_err());
    let m = CopulaModel::fgm(0.5, 2).unwrap();
    assert!(m.cdf(&[0.5]).is_err());
    assert!(m.cdf(&[0.5, 1.2]).is_err());
    assert!(m.partial_derivative(&[0.5, 0.5], 2).is_err());
}

#[test]
fn marginals_on_a_fine_grid() {
    for m in models() {
        let d = m.dim();
        for j in 0..d {
            for k in 0..=100 {
                let mut u = vec![1.0; d];
                u[j] = k as f64 / 100.0;
                let c = m.cdf(&u).unwrap();
                assert!((c - u[j]).abs() < 1e-12, "{m} j={j} u={}", u[j]);
            }
        }
    }
}

#[test]
fn groundedness_and_frechet_bounds_on_offset_grids() {
    let mut rng = master_stream(41);
    for m in models() {
        let d = m.dim();
        let offset: Vec<f64> = (0..d).map(|_| rng.random::<f64>() / 9.0).collect();
        let total = 9usize.pow(d as u32);
        for idx in 0..total {
            let mut rem = idx;
            let u: Vec<f64> = (0..d)
                .map(|j| {
                    let k = rem % 9;
                    rem /= 9;
                    k as f64 / 9.0 + offset[j]
                })
                .collect();
            let c = m.cdf(&u).unwrap();
            let lower = (u.iter().sum::<f64>() - d as f64 + 1.0).max(0.0);
            let upper = u.iter().cloned().fold(1.0, f64::min);
            assert!(c >= lower - 1e-14 && c <= upper + 1e-14, "{m} at {u:?}: {c}");
            for j in 0..d {
                let mut z = u.clone();
                z[j] = 0.0;
                assert_eq!(m.cdf(&z).unwrap(), 0.0, "{m} at {z:?}");
            }
        }
    }
}

#[test]
fn cdf_matches_reference_closed_forms() {
    let mut rng = master_stream(2);
    for m in models() {
        for _ in 0..200 {
            let u: Vec<f64> = (0..m.dim()).map(|_| rng.random()).collect();
            let want = reference_cdf(m.name(), m.alpha(), &u);
            assert!((m.cdf(&u).unwrap() - want).abs() < 1e-14, "{m} {u:?}");
        }
    }
}

#[test]
fn partials_match_central_differences() {
    let h = 1e-6;
    let mut rng = master_stream(3);
    for m in models() {
        let d = m.dim();
        for _ in 0..1000 {
            let u: Vec<f64> = (0..d).map(|_| 0.01 + 0.98 * rng.random::<f64>()).collect();
            for j in 0..d {
                let (mut up, mut dn) = (u.clone(), u.clone());
                up[j] += h;
                dn[j] -= h;
                let fd = (m.cdf(&up).unwrap() - m.cdf(&dn).unwrap()) / (2.0 * h);
                let an = m.partial_derivative(&u, j).unwrap();
                assert!((fd - an).abs() < 1e-6, "{m} j={j} {u:?}: {an} vs {fd}");
            }
        }
    }
    // the named example
    let m = CopulaModel::fgm(0.5, 2).unwrap();
    let fd = (m.cdf(&[0.5 + h, 0.5]).unwrap() - m.cdf(&[0.5 - h, 0.5]).unwrap()) / (2.0 * h);
    assert!((m.partial_derivative(&[0.5, 0.5], 0).unwrap() - fd).abs() < 1e-6);
}

#[test]
fn densities_match_references_and_mixed_differences() {
    let mut rng = master_stream(4);
    for m in models() {
        if m.name() == "amh" && m.alpha() == 1.0 {
            continue;
        }
        for _ in 0..200 {
            let u: Vec<f64> = (0..m.dim()).map(|_| 0.02 + 0.96 * rng.random::<f64>()).collect();
            let want = reference_density(m.name(), m.alpha(), &u);
            let got = m.density(&u).unwrap();
            assert!((got - want).abs() < 1e-9 * want.abs().max(1.0), "{m} {u:?}: {got} vs {want}");
            assert!(got >= 0.0);
        }
    }
    // four-point mixed difference for AMH 0.5 at the centre
    let m = CopulaModel::amh(0.5, 2).unwrap();
    let h = 1e-3;
    let c = |a: f64, b: f64| m.cdf(&[a, b]).unwrap();
    let fd = (c(0.5 + h, 0.5 + h) - c(0.5 + h, 0.5 - h) - c(0.5 - h, 0.5 + h) + c(0.5 - h, 0.5 - h))
        / (4.0 * h * h);
    assert!((m.density(&[0.5, 0.5]).unwrap() - fd).abs() < 1e-4);
    let fgm = CopulaModel::fgm(0.7, 3).unwrap();
    let u = [0.1, 0.4, 0.8];
    assert!((fgm.density(&u).unwrap() - (1.0 + 0.7 * 0.8 * 0.2 * -0.6)).abs() < 1e-15);
}

#[test]
fn densities_integrate_to_one() {
    for m in models() {
        let d = m.dim();
        if d > 3 || (m.name() == "amh" && m.alpha() == 1.0) {
            continue;
        }
        let g: usize = if d == 2 { 400 } else { 60 };
        let nodes: Vec<f64> = (0..g).map(|k| (k as f64 + 0.5) / g as f64).collect();
        let mut total = 0.0;
        let mut u = vec![0.0; d];
        for idx in 0..g.pow(d as u32) {
            let mut rem = idx;
            for x in u.iter_mut() {
                *x = nodes[rem % g];
                rem /= g;
            }
            total += m.density(&u).unwrap();
        }
        total /= g.pow(d as u32) as f64;
        assert!((total - 1.0).abs() < 1e-3, "{m}: {total}");
    }
}

/// Conditional inversion for the bivariate FGM copula, an algorithm that
/// shares nothing with the library's sampler.
fn fgm2_by_inversion(alpha: f64, n: usize, rng: &mut impl Rng) -> Array2<f64> {
    let mut out = Array2::zeros((n, 2));
    for mut row in out.rows_mut() {
        let u: f64 = rng.random();
        let w: f64 = rng.random();
        let a = alpha * (1.0 - 2.0 * u);
        let v = if a.abs() < 1e-12 {
            w
        } else {
            ((1.0 + a) - ((1.0 + a).powi(2) - 4.0 * a * w).sqrt()) / (2.0 * a)
        };
        row[0] = u;
        row[1] = v;
    }
    out
}

/// Rejection from the uniform envelope using the reference density.
fn reference_rejection(m: &CopulaModel, bound: f64, n: usize, rng: &mut impl Rng) -> Array2<f64> {
    let d = m.dim();
    let mut out = Array2::zeros((n, d));
    let mut u = vec![0.0; d];
    for mut row in out.rows_mut() {
        loop {
            for x in u.iter_mut() {
                *x = rng.random();
            }
            if rng.random::<f64>() * bound <= reference_density(m.name(), m.alpha(), &u) {
                break;
            }
        }
        for (r, x) in row.iter_mut().zip(&u) {
            *r = *x;
        }
    }
    out
}

fn cell_counts(sample: &Array2<f64>, k: usize) -> Vec<u64> {
    let d = sample.ncols();
    let mut counts = vec![0u64; k.pow(d as u32)];
    for row in sample.rows() {
        let idx = row
            .iter()
            .rev()
            .fold(0, |acc, &x| acc * k + ((x * k as f64) as usize).min(k - 1));
        counts[idx] += 1;
    }
    counts
}

#[test]
fn sampler_agrees_with_independent_oracles() {
    let n = 100_000;
    let cases: Vec<(CopulaModel, Option<f64>)> = vec![
        (CopulaModel::fgm(1.0, 2).unwrap(), None),
        (CopulaModel::fgm(-0.5, 2).unwrap(), None),
        (CopulaModel::fgm(0.5, 3).unwrap(), Some(1.5)),
        (CopulaModel::independence(3).unwrap(), Some(1.0)),
        (CopulaModel::amh(0.5, 2).unwrap(), Some(4.0)),
        (CopulaModel::amh(-0.5, 2).unwrap(), Some(2.0)),
        (CopulaModel::amh(0.5, 3).unwrap(), Some(8.0)),
    ];
    for (i, (m, bound)) in cases.iter().enumerate() {
        let mut rng = master_stream(100 + i as u64);
        let got = m.sample(n, &mut rng).unwrap();
        let mut oracle_rng = master_stream(200 + i as u64);
        let want = match bound {
            None => fgm2_by_inversion(m.alpha(), n, &mut oracle_rng),
            Some(b) => reference_rejection(m, *b, n, &mut oracle_rng),
        };
        let p = chi_square_two_sample(&cell_counts(&got, 4), &cell_counts(&want, 4));
        assert!(p > 0.001, "{m}: p = {p}");
    }
}

#[test]
fn reference_rejection_bounds_are_envelopes() {
    // the bounds used above must dominate the reference density
    for (m, b) in [
        (CopulaModel::amh(0.5, 2).unwrap(), 4.0),
        (CopulaModel::amh(-0.5, 2).unwrap(), 2.0),
        (CopulaModel::amh(0.5, 3).unwrap(), 8.0),
        (CopulaModel::fgm(0.5, 3).unwrap(), 1.5),
    ] {
        let d = m.dim() as u32;
        for idx in 0..11usize.pow(d) {
            let u: Vec<f64> = (0..d).map(|j| ((idx / 11usize.pow(j)) % 11) as f64 / 10.0).collect();
            assert!(reference_density(m.name(), m.alpha(), &u) <= b, "{m} {u:?}");
        }
    }
}

#[test]
fn independence_marginals_pass_ks() {
    let m = CopulaModel::independence(3).unwrap();
    let s = m.sample(10_000, &mut master_stream(5)).unwrap();
    for col in s.columns() {
        let ks = ks_statistic(&col.to_vec(), |x| x.clamp(0.0, 1.0));
        assert!(ks < 0.05, "{ks}");
    }
}

#[test]
fn fgm_spearman_rho_is_alpha_over_three() {
    // 12 ∫∫ C du dv − 3 by quadrature as a cross-check of the identity
    let m = CopulaModel::fgm(1.0, 2).unwrap();
    let g = 200;
    let mut integral = 0.0;
    for a in 0..g {
        for b in 0..g {
            let u = (a as f64 + 0.5) / g as f64;
            let v = (b as f64 + 0.5) / g as f64;
            integral += m.cdf(&[u, v]).unwrap();
        }
    }
    let rho_quad = 12.0 * integral / (g * g) as f64 - 3.0;
    assert!((rho_quad - 1.0 / 3.0).abs() < 1e-4);

    let s = m.sample(100_000, &mut master_stream(6)).unwrap();
    let rho = spearman_rho(&s.column(0).to_vec(), &s.column(1).to_vec());
    assert!((rho - 1.0 / 3.0).abs() < 0.01, "{rho}");
}

#[test]
fn fgm_empirical_cdf_at_the_centre() {
    let m = CopulaModel::fgm(0.5, 2).unwrap();
    let s = m.sample(100_000, &mut master_stream(7)).unwrap();
    let hits = s.rows().into_iter().filter(|r| r[0] <= 0.5 && r[1] <= 0.5).count();
    let emp = hits as f64 / 1e5;
    assert!((emp - m.cdf(&[0.5, 0.5]).unwrap()).abs() < 0.005, "{emp}");
}

#[test]
fn condition_certification_examples() {
    for a in [0.0, 0.25, 0.5, 1.0] {
        let r = CopulaModel::fgm(a, 3).unwrap().check_conditions(9).unwrap();
        assert!(r.partial_bound_holds && r.pairwise_sum_holds, "fgm {a}: {r}");
        assert_eq!(r.worst_violation, 0.0);
    }
    let r = CopulaModel::independence(3).unwrap().check_conditions(9).unwrap();
    assert!(r.holds());

    let r = CopulaModel::fgm(-0.5, 2).unwrap().check_conditions(9).unwrap();
    assert!(!r.partial_bound_holds);
    assert!(r.worst_violation < 0.0);
    assert_eq!(r.witness.condition, Condition::PartialBound);
    assert_eq!(r.witness.slack, r.worst_violation);
    // the witness really violates the partial bound C(u)/u_j ≥ ∂_j C(u)
    let m = CopulaModel::fgm(-0.5, 2).unwrap();
    let u = &r.witness.point;
    let j = r.witness.j;
    let slack = m.cdf(u).unwrap() / u[j] - m.partial_derivative(u, j).unwrap();
    assert!((slack - r.worst_violation).abs() < 1e-12);
}

#[test]
fn report_verdict_matches_worst_violation() {
    for m in models().iter().filter(|m| m.dim() <= 3) {
        let r = m.check_conditions(5).unwrap();
        assert!(r.worst_violation <= 0.0);
        assert_eq!(r.holds(), r.worst_violation >= -1e-12, "{m}: {r}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn copula_invariants_at_random_points(
        idx in 0usize..1000,
        raw in prop::collection::vec(0.0f64..=1.0, 4),
        j in 0usize..4,
    ) {
        let all = models();
        let m = &all[idx % all.len()];
        let d = m.dim();
        let u = &raw[..d];
        let j = j % d;
        let c = m.cdf(u).unwrap();
        let lower = (u.iter().sum::<f64>() - d as f64 + 1.0).max(0.0);
        let upper = u.iter().cloned().fold(1.0, f64::min);
        prop_assert!(c >= lower - 1e-14 && c <= upper + 1e-14);

        let mut marg = vec![1.0; d];
        marg[j] = u[j];
        prop_assert!((m.cdf(&marg).unwrap() - u[j]).abs() < 1e-12);

        let mut z = u.to_vec();
        z[j] = 0.0;
        prop_assert_eq!(m.cdf(&z).unwrap(), 0.0);

        // monotone in every coordinate, so ∂_j C ≥ 0 and C is 1-Lipschitz
        let dj = m.partial_derivative(u, j).unwrap();
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&dj), "{} {:?}: {}", m, u, dj);
    }

    #[test]
    fn partial_matches_difference_at_random_points(
        idx in 0usize..1000,
        raw in prop::collection::vec(0.01f64..0.99, 4),
        j in 0usize..4,
    ) {
        let all = models();
        let m = &all[idx % all.len()];
        let d = m.dim();
        let u = &raw[..d];
        let j = j % d;
        let h = 1e-6;
        let (mut up, mut dn) = (u.to_vec(), u.to_vec());
        up[j] += h;
        dn[j] -= h;
        let fd = (m.cdf(&up).unwrap() - m.cdf(&dn).unwrap()) / (2.0 * h);
        prop_assert!((m.partial_derivative(u, j).unwrap() - fd).abs() < 1e-6);
    }
}
