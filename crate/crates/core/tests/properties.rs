use partlab::sortcore::partition_sort_observed;
use partlab::{
    anova_full_factorial, binomial_sample, geometric_sample, least_squares_fit, nb_sample, partition_sort,
    quicksort_baseline, reg_inc_beta, select_kth, BasisSpec, Factor, FactorialDesign, NbMethod, Observation,
    PartitionStrategy, Predictors, RngStream, SortStats,
};
use proptest::prelude::*;

fn strategies() -> impl Strategy<Value = PartitionStrategy> {
    prop_oneof![
        Just(PartitionStrategy::DeterministicSelect),
        any::<u64>().prop_map(|seed| PartitionStrategy::RandomizedSelect { seed }),
    ]
}

fn keys() -> impl Strategy<Value = Vec<i64>> {
    prop_oneof![
        prop::collection::vec(any::<i64>(), 0..600),
        prop::collection::vec(0i64..4, 0..600),
        prop::collection::vec(-50i64..50, 0..600),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn sorts_into_a_permutation(input in keys(), strategy in strategies()) {
        let mut expected = input.clone();
        expected.sort();
        let (out, _) = partition_sort(input, strategy);
        prop_assert_eq!(out, expected);
    }

    #[test]
    fn every_split_is_an_exact_half(input in keys(), strategy in strategies()) {
        let mut a = input;
        let mut ok = true;
        partition_sort_observed(&mut a, strategy, |left, right| {
            let total = left.len() + right.len();
            let max_left = left.iter().max();
            let min_right = right.iter().min();
            ok &= left.len() == total / 2 && right.len() == total - total / 2;
            ok &= match (max_left, min_right) {
                (Some(l), Some(r)) => l <= r,
                _ => true,
            };
        });
        prop_assert!(ok);
    }

    #[test]
    fn deterministic_runs_repeat(input in keys(), seed in any::<u64>()) {
        for strategy in [PartitionStrategy::DeterministicSelect, PartitionStrategy::RandomizedSelect { seed }] {
            let a = partition_sort(input.clone(), strategy);
            let b = partition_sort(input.clone(), strategy);
            prop_assert_eq!(a, b);
        }
        prop_assert_eq!(quicksort_baseline(input.clone(), seed), quicksort_baseline(input, seed));
    }

    #[test]
    fn selection_places_the_rank(input in prop::collection::vec(-20i64..20, 1..300), r in any::<prop::sample::Index>(),
                                 strategy in strategies()) {
        let rank = r.index(input.len());
        let mut a = input.clone();
        let mut stats = SortStats::default();
        select_kth(&mut a, 0, input.len(), rank, strategy, &mut stats).unwrap();
        let mut sorted = input;
        sorted.sort();
        prop_assert_eq!(a[rank], sorted[rank]);
        prop_assert!(a[..rank].iter().all(|x| *x <= a[rank]));
        prop_assert!(a[rank + 1..].iter().all(|x| *x >= a[rank]));
    }

    #[test]
    fn beta_reflection(x in 0.0f64..=1.0, a in 0.05f64..200.0, b in 0.05f64..200.0) {
        let s = reg_inc_beta(x, a, b).unwrap() + reg_inc_beta(1.0 - x, b, a).unwrap();
        prop_assert!((s - 1.0).abs() < 1e-10, "sum {}", s);
    }

    #[test]
    fn sample_supports(seed in any::<u64>(), k in 1u64..50, m in 1u64..50, p in 0.01f64..=1.0) {
        let mut rng = RngStream::new(seed);
        prop_assert!(geometric_sample(p, &mut rng).unwrap() >= 1);
        for method in [NbMethod::GeometricSum, NbMethod::BernoulliSim] {
            prop_assert!(nb_sample(k, p, &mut rng, method).unwrap() >= k);
        }
        prop_assert!(binomial_sample(m, p, &mut rng).unwrap() <= m);
    }
}

#[test]
fn recursion_depth_is_log2() {
    for n in [1usize, 2, 3, 5, 1000, 1024, 1025, 4097] {
        let keys: Vec<i64> = (0..n as i64).rev().collect();
        let (_, stats) = partition_sort(keys, PartitionStrategy::DeterministicSelect);
        let expected = (n as f64).log2().ceil() as u32;
        assert_eq!(stats.max_depth, expected, "n = {n}");
    }
}

/// Deterministic pivots bound the comparison count by C n log2 n.
#[test]
fn comparison_growth_window() {
    const C: f64 = 8.0;
    let mut rng = RngStream::new(77);
    for e in 10..=17 {
        let n = 1usize << e;
        let random: Vec<i64> = (0..n).map(|_| rng.next_u64() as i64).collect();
        let sorted: Vec<i64> = (0..n as i64).collect();
        let reverse: Vec<i64> = sorted.iter().rev().copied().collect();
        let equal = vec![7i64; n];
        for (name, keys) in [
            ("random", random),
            ("sorted", sorted),
            ("reverse", reverse),
            ("equal", equal),
        ] {
            let (_, stats) = partition_sort(keys, PartitionStrategy::DeterministicSelect);
            let ratio = stats.comparisons as f64 / (n as f64 * (n as f64).log2());
            assert!(ratio <= C, "{name} n={n}: ratio {ratio}");
        }
    }
}

// --------------------------------------------------------------- regression

fn points_strategy() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::btree_set(1u32..1000, 6..30).prop_flat_map(|xs| {
        let xs: Vec<f64> = xs.into_iter().map(|x| x as f64 / 1000.0).collect();
        let len = xs.len();
        (Just(xs), prop::collection::vec(-5.0f64..5.0, len)).prop_map(|(xs, ys)| xs.into_iter().zip(ys).collect())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn residuals_are_orthogonal_to_the_basis(data in points_strategy(), degree in 1usize..4) {
        let points: Vec<_> = data.iter().map(|&(x, y)| (Predictors::p(x), y)).collect();
        let basis = BasisSpec::poly_p(degree);
        let fit = least_squares_fit(&points, &basis).unwrap();
        let scale: f64 = data.iter().map(|(_, y)| y.abs()).fold(1.0, f64::max);
        for f in &basis.functions {
            let dot: f64 = points.iter().zip(&fit.residuals).map(|((x, _), r)| f.eval(x) * r).sum();
            prop_assert!(dot.abs() < 1e-9 * scale * points.len() as f64, "{} . r = {}", f.name(), dot);
        }
    }

    #[test]
    fn richer_models_never_fit_worse(data in points_strategy()) {
        let points: Vec<_> = data.iter().map(|&(x, y)| (Predictors::p(x), y)).collect();
        let sse: Vec<f64> = (1..=3).map(|d| least_squares_fit(&points, &BasisSpec::poly_p(d)).unwrap().sse).collect();
        prop_assert!(sse[1] <= sse[0] * (1.0 + 1e-9) + 1e-12);
        prop_assert!(sse[2] <= sse[1] * (1.0 + 1e-9) + 1e-12);
    }

    #[test]
    fn two_parameter_fit_matches_closed_form(data in points_strategy()) {
        let points: Vec<_> = data.iter().map(|&(x, y)| (Predictors::p(x), y)).collect();
        let fit = least_squares_fit(&points, &BasisSpec::poly_p(1)).unwrap();
        let m = data.len() as f64;
        let mx = data.iter().map(|d| d.0).sum::<f64>() / m;
        let my = data.iter().map(|d| d.1).sum::<f64>() / m;
        let sxy: f64 = data.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = data.iter().map(|(x, _)| (x - mx).powi(2)).sum();
        let b = sxy / sxx;
        let a = my - b * mx;
        let tol = 1e-10 * (1.0 + a.abs().max(b.abs()));
        prop_assert!((fit.coefficients[0] - a).abs() < tol, "{} vs {}", fit.coefficients[0], a);
        prop_assert!((fit.coefficients[1] - b).abs() < tol, "{} vs {}", fit.coefficients[1], b);
    }
}

// -------------------------------------------------------------------- anova

#[derive(Debug, Clone)]
struct RandomDesign {
    design: FactorialDesign,
    observations: Vec<Observation>,
}

fn design_strategy() -> impl Strategy<Value = RandomDesign> {
    (prop::collection::vec(2usize..4, 1..4), 1usize..4).prop_flat_map(|(levels, replicates)| {
        let cells: usize = levels.iter().product();
        prop::collection::vec(-100.0f64..100.0, cells * replicates).prop_map(move |ys| {
            let factors = levels
                .iter()
                .enumerate()
                .map(|(i, &l)| Factor {
                    name: format!("F{i}"),
                    levels: (0..l).map(|j| j.to_string()).collect(),
                })
                .collect();
            let mut observations = Vec::with_capacity(ys.len());
            for (idx, y) in ys.into_iter().enumerate() {
                let mut rest = idx / replicates;
                let mut lv = Vec::with_capacity(levels.len());
                for &l in levels.iter().rev() {
                    lv.push(rest % l);
                    rest /= l;
                }
                lv.reverse();
                observations.push(Observation { levels: lv, y });
            }
            RandomDesign {
                design: FactorialDesign { factors, replicates },
                observations,
            }
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn anova_partitions_total_variation(d in design_strategy()) {
        let t = anova_full_factorial(&d.design, &d.observations).unwrap();
        let total = t.total();
        let parts: f64 = t.effects().map(|r| r.seq_ss).sum::<f64>() + t.error().seq_ss;
        prop_assert!((parts - total.seq_ss).abs() <= 1e-9 * total.seq_ss.max(1.0));
        let df: usize = t.effects().map(|r| r.df).sum::<usize>() + t.error().df;
        prop_assert_eq!(df, total.df);
        prop_assert_eq!(total.df, d.observations.len() - 1);
        for r in &t.rows {
            prop_assert_eq!(r.seq_ss, r.adj_ss);
        }
    }

    #[test]
    fn anova_ignores_observation_order(d in design_strategy(), shuffle_seed in any::<u64>()) {
        let a = anova_full_factorial(&d.design, &d.observations).unwrap();
        let mut shuffled = d.observations.clone();
        let mut rng = RngStream::new(shuffle_seed);
        for i in (1..shuffled.len()).rev() {
            let j = rng.below(i as u64 + 1) as usize;
            shuffled.swap(i, j);
        }
        let b = anova_full_factorial(&d.design, &shuffled).unwrap();
        for (x, y) in a.rows.iter().zip(&b.rows) {
            prop_assert_eq!(x.df, y.df);
            prop_assert!((x.seq_ss - y.seq_ss).abs() <= 1e-9 * a.total().seq_ss.max(1.0));
        }
    }

    #[test]
    fn anova_scales_quadratically(d in design_strategy(), c in 0.1f64..10.0) {
        let a = anova_full_factorial(&d.design, &d.observations).unwrap();
        let scaled: Vec<_> = d.observations.iter().map(|o| Observation { levels: o.levels.clone(), y: c * o.y }).collect();
        let b = anova_full_factorial(&d.design, &scaled).unwrap();
        for (x, y) in a.rows.iter().zip(&b.rows) {
            prop_assert!((c * c * x.seq_ss - y.seq_ss).abs() <= 1e-9 * b.total().seq_ss.max(1.0));
            if let (Some(f1), Some(f2)) = (x.f, y.f) {
                prop_assert!((f1 - f2).abs() <= 1e-6 * f1.abs().max(1.0));
            }
        }
    }

    /// Two-way layout checked against the textbook sum-of-squares formulas.
    #[test]
    #[allow(clippy::needless_range_loop)]
    fn two_way_matches_textbook(ys in prop::collection::vec(-10.0f64..10.0, 3 * 4 * 2)) {
        let (la, lb, r) = (3usize, 4usize, 2usize);
        let factor = |name: &str, l: usize| Factor { name: name.into(), levels: (0..l).map(|j| j.to_string()).collect() };
        let design = FactorialDesign { factors: vec![factor("A", la), factor("B", lb)], replicates: r };
        let y = |i: usize, j: usize, t: usize| ys[(i * lb + j) * r + t];
        let obs: Vec<_> = (0..la)
            .flat_map(|i| (0..lb).flat_map(move |j| (0..r).map(move |t| (i, j, t))))
            .map(|(i, j, t)| Observation { levels: vec![i, j], y: y(i, j, t) })
            .collect();
        let t = anova_full_factorial(&design, &obs).unwrap();

        let n = (la * lb * r) as f64;
        let grand = ys.iter().sum::<f64>() / n;
        let mean_a: Vec<f64> = (0..la).map(|i| (0..lb).flat_map(|j| (0..r).map(move |t| (j, t))).map(|(j, t)| y(i, j, t)).sum::<f64>() / (lb * r) as f64).collect();
        let mean_b: Vec<f64> = (0..lb).map(|j| (0..la).flat_map(|i| (0..r).map(move |t| (i, t))).map(|(i, t)| y(i, j, t)).sum::<f64>() / (la * r) as f64).collect();
        let cell = |i: usize, j: usize| (0..r).map(|t| y(i, j, t)).sum::<f64>() / r as f64;
        let ss_a = (lb * r) as f64 * mean_a.iter().map(|m| (m - grand).powi(2)).sum::<f64>();
        let ss_b = (la * r) as f64 * mean_b.iter().map(|m| (m - grand).powi(2)).sum::<f64>();
        let mut ss_ab = 0.0;
        let mut ss_e = 0.0;
        for i in 0..la {
            for j in 0..lb {
                ss_ab += r as f64 * (cell(i, j) - mean_a[i] - mean_b[j] + grand).powi(2);
                for k in 0..r {
                    ss_e += (y(i, j, k) - cell(i, j)).powi(2);
                }
            }
        }
        let tol = 1e-9 * (1.0 + ss_a + ss_b + ss_ab + ss_e);
        prop_assert!((t.row("A").unwrap().seq_ss - ss_a).abs() < tol);
        prop_assert!((t.row("B").unwrap().seq_ss - ss_b).abs() < tol);
        prop_assert!((t.row("A*B").unwrap().seq_ss - ss_ab).abs() < tol);
        prop_assert!((t.error().seq_ss - ss_e).abs() < tol);
        let f_a = (ss_a / 2.0) / (ss_e / 12.0);
        prop_assert!((t.row("A").unwrap().f.unwrap() - f_a).abs() <= 1e-8 * f_a.max(1.0));
    }
}
