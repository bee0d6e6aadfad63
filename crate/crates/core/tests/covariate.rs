#![allow(clippy::needless_range_loop)]

use zbias::estimators::{covariate_average, covariate_average_unadjusted, estimates};
use zbias::{
    BinaryScenario, Conditioning, CovariateFamily, DiscreteParts, DiscreteScenario, Error, Stratum,
};

fn case(p: [f64; 4], r: [f64; 4]) -> BinaryScenario {
    BinaryScenario::from_table(0.5, 0.5, p, r).unwrap()
}

fn case1() -> BinaryScenario {
    case([0.8, 0.6, 0.2, 0.1], [0.08, 0.06, 0.02, 0.01])
}

fn case3() -> BinaryScenario {
    case([0.5, 0.4, 0.4, 0.1], [0.04, 0.04, 0.04, 0.01])
}

fn family(strata: &[(f64, BinaryScenario)]) -> CovariateFamily {
    CovariateFamily::new(
        strata
            .iter()
            .enumerate()
            .map(|(k, (w, b))| Stratum {
                label: format!("x{k}"),
                weight: *w,
                scenario: b.to_discrete(),
            })
            .collect(),
    )
    .unwrap()
}

/// X folded into the confounder: U' = (X, U) with the same instrument law.
fn flattened(strata: &[(f64, BinaryScenario)]) -> DiscreteScenario {
    let mut u_pmf = Vec::new();
    let mut treat = vec![Vec::new(), Vec::new()];
    let mut mean = [vec![Vec::new(), Vec::new()], vec![Vec::new(), Vec::new()]];
    for (w, b) in strata {
        for u in 0..2 {
            u_pmf.push(w * if u == 1 { b.p_u() } else { 1.0 - b.p_u() });
            for z in 0..2 {
                treat[z].push(b.p(z, u));
                for a in 0..2 {
                    mean[a][z].push(b.r(a, u));
                }
            }
        }
    }
    DiscreteScenario::new(DiscreteParts {
        z_support: vec![0.0, 1.0],
        z_pmf: vec![0.5, 0.5],
        u_support: (0..u_pmf.len()).map(|j| j as f64).collect(),
        u_pmf,
        treat,
        outcome_mean: mean,
        binary_outcome: true,
        ..DiscreteParts::default()
    })
    .unwrap()
}

#[test]
fn single_stratum_is_the_stratum() {
    let e = estimates(&case1().to_discrete(), Conditioning::OnZ).unwrap();
    let avg = covariate_average(&family(&[(1.0, case1())]), Conditioning::OnZ).unwrap();
    for (x, y) in [
        (avg.true_treated, e.true_treated),
        (avg.true_control, e.true_control),
        (avg.true_all, e.true_all),
        (avg.unadj, e.unadj),
        (avg.adj_treated, e.adj_treated),
        (avg.adj_control, e.adj_control),
        (avg.adj_all, e.adj_all),
        (avg.f, e.f),
    ] {
        assert!((x - y).abs() < 1e-15);
    }
}

#[test]
fn identical_strata_average_to_the_common_set() {
    let e = estimates(&case3().to_discrete(), Conditioning::OnZ).unwrap();
    let avg = covariate_average(
        &family(&[(0.3, case3()), (0.7, case3())]),
        Conditioning::OnZ,
    )
    .unwrap();
    assert!((avg.adj_treated - e.adj_treated).abs() < 1e-15);
    assert!((avg.true_control - e.true_control).abs() < 1e-15);
    assert!((avg.unadj - e.unadj).abs() < 1e-15);
}

#[test]
fn truths_match_the_flattened_population() {
    let strata = [(0.4, case1()), (0.6, case3())];
    let avg = covariate_average(&family(&strata), Conditioning::OnZ).unwrap();
    let flat = estimates(&flattened(&strata), Conditioning::OnZ).unwrap();
    assert!((avg.true_treated - flat.true_treated).abs() < 1e-15);
    assert!((avg.true_control - flat.true_control).abs() < 1e-15);
    assert!((avg.true_all - flat.true_all).abs() < 1e-15);
    assert!((avg.f - flat.f).abs() < 1e-15);

    // Hand mixtures: f = 0.4·0.425 + 0.6·0.35.
    let e1 = estimates(&case1().to_discrete(), Conditioning::OnZ).unwrap();
    let e3 = estimates(&case3().to_discrete(), Conditioning::OnZ).unwrap();
    assert!((avg.f - 0.38).abs() < 1e-15);
    let w1 = 0.4 * e1.f / avg.f;
    assert!((avg.adj_treated - (w1 * e1.adj_treated + (1.0 - w1) * e3.adj_treated)).abs() < 1e-15);
    assert!((avg.adj_all - (0.4 * e1.adj_all + 0.6 * e3.adj_all)).abs() < 1e-15);
    assert!((avg.unadj - (0.4 * e1.unadj + 0.6 * e3.unadj)).abs() < 1e-15);

    let arm = covariate_average_unadjusted(&family(&strata)).unwrap();
    assert!((arm.treated - (w1 * e1.unadj + (1.0 - w1) * e3.unadj)).abs() < 1e-15);
    assert!((arm.all - avg.unadj).abs() < 1e-15);
}

#[test]
fn degenerate_stratum_propagates() {
    let all_treated = case([1.0; 4], [0.1; 4]);
    let err = covariate_average(
        &family(&[(0.5, case1()), (0.5, all_treated)]),
        Conditioning::OnZ,
    )
    .unwrap_err();
    assert!(matches!(err, Error::Degenerate(_)), "{err}");
}
