//! Solver invariants over random instances.

mod common;

use common::gaussian_instance;
use cqreg::penalty::PenaltySpec;
use cqreg::pipeline::{fit, FitRequest};
use cqreg::solvers::admm::AdmmState;
use cqreg::solvers::solve;
use cqreg::{objective, stack_composite, Algorithm, Dataset, FitResult, QuantileLevels, SolverOptions};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn levels_strategy() -> impl Strategy<Value = QuantileLevels> {
    prop_oneof![
        (0.1f64..0.9).prop_map(|t| QuantileLevels::single(t).unwrap()),
        (2usize..5).prop_map(|k| QuantileLevels::equally_spaced(k).unwrap()),
    ]
}

fn algorithm_strategy() -> impl Strategy<Value = Algorithm> {
    prop::sample::select(Algorithm::ALL.to_vec())
}

fn penalty_for(data: &Dataset, levels: &QuantileLevels, lambda: Option<f64>) -> PenaltySpec {
    match lambda {
        None => PenaltySpec::None,
        Some(l) => {
            let pilot = solve(data, levels, &PenaltySpec::None, &SolverOptions::new(Algorithm::Ip)).unwrap();
            PenaltySpec::adaptive(l, DVector::from_vec(pilot.coefficients))
        }
    }
}

fn same_bits(a: &FitResult, b: &FitResult) -> bool {
    let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
    bits(&a.intercepts) == bits(&b.intercepts)
        && bits(&a.coefficients) == bits(&b.coefficients)
        && a.objective.to_bits() == b.objective.to_bits()
        && a.iterations == b.iterations
        && a.converged == b.converged
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn reported_objective_is_recomputable(
        seed in 0u64..1000,
        n in 15usize..40,
        p in 1usize..4,
        levels in levels_strategy(),
        alg in algorithm_strategy(),
        lambda in prop::option::of(0.1f64..5.0),
    ) {
        let data = gaussian_instance(n, p, seed);
        let penalty = penalty_for(&data, &levels, lambda);
        let fit = solve(&data, &levels, &penalty, &SolverOptions::new(alg)).unwrap();
        let direct = objective(&data, &fit.intercepts, &fit.coefficients, &levels, &penalty).unwrap();
        prop_assert!((fit.objective - direct).abs() <= 1e-10, "{} vs {}", fit.objective, direct);
    }

    #[test]
    fn fits_are_deterministic(
        seed in 0u64..1000,
        p in 1usize..4,
        levels in levels_strategy(),
        alg in algorithm_strategy(),
        lambda in prop::option::of(0.1f64..5.0),
    ) {
        let data = gaussian_instance(30, p, seed);
        let req = match lambda {
            None => FitRequest::unregularized(data, levels, SolverOptions::new(alg)),
            Some(l) => FitRequest::regularized(data, levels, l, SolverOptions::new(alg)),
        };
        let a = fit(&req).unwrap();
        let b = fit(&req).unwrap();
        prop_assert!(same_bits(&a, &b));
        prop_assert_eq!(a.diagnostics.pilot, b.diagnostics.pilot);
    }

    #[test]
    fn column_permutation_permutes_coefficients(
        seed in 0u64..1000,
        tau in 0.2f64..0.8,
        order in Just(vec![0usize, 1, 2]).prop_shuffle(),
        alg in algorithm_strategy(),
    ) {
        let data = gaussian_instance(40, 3, seed);
        let levels = QuantileLevels::single(tau).unwrap();
        let opts = SolverOptions::new(alg);
        let base = solve(&data, &levels, &PenaltySpec::None, &opts).unwrap();
        let permuted = solve(&data.permute_columns(&order).unwrap(), &levels, &PenaltySpec::None, &opts).unwrap();
        for (j, &src) in order.iter().enumerate() {
            prop_assert!((permuted.coefficients[j] - base.coefficients[src]).abs() <= 1e-6,
                "{alg}: column {j} <- {src}: {} vs {}", permuted.coefficients[j], base.coefficients[src]);
        }
    }

    #[test]
    fn mm_and_cd_never_increase_objective(
        seed in 0u64..1000,
        p in 1usize..4,
        levels in levels_strategy(),
        lambda in prop::option::of(0.1f64..5.0),
    ) {
        let data = gaussian_instance(30, p, seed);
        let penalty = penalty_for(&data, &levels, lambda);
        for alg in [Algorithm::Mm, Algorithm::Cd] {
            let mut opts = SolverOptions::new(alg);
            opts.trace = true;
            let fit = solve(&data, &levels, &penalty, &opts).unwrap();
            prop_assert!(!fit.diagnostics.descent.is_empty());
            for (step, (before, after)) in fit.diagnostics.descent.iter().enumerate() {
                prop_assert!(after <= &(before + 1e-10), "{alg} step {step}: {before} -> {after}");
            }
        }
    }

    #[test]
    fn admm_convergence_claims_hold(
        seed in 0u64..1000,
        p in 1usize..4,
        levels in levels_strategy(),
        lambda in prop::option::of(0.1f64..5.0),
    ) {
        let data = gaussian_instance(30, p, seed);
        let penalty = penalty_for(&data, &levels, lambda);
        let opts = SolverOptions::new(Algorithm::Admm);
        let fit = solve(&data, &levels, &penalty, &opts).unwrap();
        let state = fit.diagnostics.admm.clone().unwrap();
        if fit.converged {
            let (primal, eps_p, dual, eps_d) = residuals_dense(&data, &levels, &state, &opts);
            prop_assert!(primal <= eps_p && dual <= eps_d, "{primal} > {eps_p} or {dual} > {eps_d}");
        }
    }
}

/// Residual test written out on the dense stacked design.
fn residuals_dense(data: &Dataset, levels: &QuantileLevels, s: &AdmmState, o: &SolverOptions) -> (f64, f64, f64, f64) {
    let d = stack_composite(data, levels);
    let k = levels.len();
    let n = data.n();
    let mut xcov = d.xs.clone();
    xcov.columns_mut(0, k).fill(0.0);
    let mut primal = 0.0;
    for i in 0..n * k {
        let fit: f64 = (0..d.xs.ncols()).map(|c| d.xs[(i, c)] * s.theta[c]).sum();
        primal += (d.ys[i] - fit - s.r[i]).powi(2);
    }
    let dr = &s.r - &s.r_prev;
    let xt = |m: &DMatrix<f64>, v: &DVector<f64>| m.transpose() * v;
    let sq = |v: &DVector<f64>| v.iter().map(|x| x * x).sum::<f64>();
    let (dual, fit_sq, data_sq) = if s.regularized {
        let dual = xt(&xcov, &dr).rows(k, data.p()).into_owned() * o.rho;
        let data_sq: f64 = (0..n * k).map(|i| (s.theta[i / n] - d.ys[i]).powi(2)).sum();
        (dual, sq(&(&xcov * &s.theta)), data_sq)
    } else {
        (xt(&d.xs, &dr) * o.rho, sq(&(&d.xs * &s.theta)), sq(&d.ys))
    };
    let eps_p = ((n * k) as f64).sqrt() * o.eps_abs + o.eps_rel * fit_sq.max(sq(&s.r)).max(data_sq);
    let eps_d = (dual.len() as f64).sqrt() * o.eps_abs + o.eps_rel * sq(&xt(&d.xs, &s.u));
    (primal.sqrt(), eps_p, sq(&dual).sqrt(), eps_d)
}

#[test]
fn zero_pilot_forces_zero_coefficient() {
    let base = gaussian_instance(30, 3, 11);
    let mut x = base.x().clone();
    x.column_mut(1).fill(0.0);
    let data = Dataset::new(x, base.y().clone()).unwrap();
    for alg in Algorithm::ALL {
        let req = FitRequest::regularized(data.clone(), QuantileLevels::single(0.5).unwrap(), 0.5, SolverOptions::new(alg));
        let fit = fit(&req).unwrap();
        assert_eq!(fit.diagnostics.pilot.as_ref().unwrap()[1], 0.0, "{alg}");
        assert_eq!(fit.coefficients[1], 0.0, "{alg}");
    }
}
