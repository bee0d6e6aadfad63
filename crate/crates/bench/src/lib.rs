//! Fixed scenarios shared by the benchmarks.

use zbias::{BinaryScenario, DiscreteParts, DiscreteScenario};

/// The first row of the classic binary example.
pub fn binary_case() -> BinaryScenario {
    BinaryScenario::from_table(0.5, 0.5, [0.8, 0.6, 0.2, 0.1], [0.08, 0.06, 0.02, 0.01])
        .expect("valid fixture")
}

/// An additive treatment model on an `n × n` grid with uniform marginals.
pub fn grid(n: usize) -> DiscreteScenario {
    let step = 1.0 / (n as f64 - 1.0).max(1.0);
    let support: Vec<f64> = (0..n).map(|i| i as f64).collect();
    let pmf = vec![1.0 / n as f64; n];
    let treat = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| 0.1 + 0.4 * step * i as f64 + 0.4 * step * j as f64)
                .collect()
        })
        .collect();
    let mean = |base: f64| {
        vec![
            (0..n)
                .map(|j| base + 0.5 * step * j as f64)
                .collect::<Vec<_>>();
            n
        ]
    };
    DiscreteScenario::new(DiscreteParts {
        z_support: support.clone(),
        z_pmf: pmf.clone(),
        u_support: support,
        u_pmf: pmf,
        treat,
        outcome_mean: [mean(0.1), mean(0.3)],
        outcome_law: None,
        binary_outcome: false,
        direct_effect: false,
    })
    .expect("valid fixture")
}
