use branching_stable::asymptotics::integral_on_grid;
use branching_stable::{geometric_grid, sample_cloud, solve_u, OffspringLaw64, StableParams64, TabulatedFn64};

fn integral_upto(u: &TabulatedFn64, x: f64) -> f64 {
    let (xs, ys): (Vec<f64>, Vec<f64>) = u.window(0.0, x).unzip();
    integral_on_grid(&TabulatedFn64::new(xs, ys).unwrap())
}

#[test]
fn subcritical_solution_has_a_finite_integral() {
    let p = StableParams64::new(1.5, 0.0).unwrap();
    let law = OffspringLaw64::new(&[0.6, 0.0, 0.4]).unwrap();
    let cloud = sample_cloud(&p, 8, 400_000, 91).unwrap();
    let grid = geometric_grid(0.01, 100.0, 160).unwrap();
    assert!(cloud.samples().iter().filter(|s| s.s >= 50.0).count() >= 100);
    let sol = solve_u(&law, &cloud, &grid, 1e-9, 10_000).unwrap();
    let i: Vec<f64> = [12.5, 25.0, 50.0, 100.0].iter().map(|&x| integral_upto(&sol.u, x)).collect();
    // a tail like x^-1.5 shrinks the increment by 2^-1/2 per doubling
    for w in i.windows(3) {
        let ratio = (w[2] - w[1]) / (w[1] - w[0]);
        assert!(ratio > 0.0 && ratio < 0.9, "{i:?}");
    }
}

#[test]
fn solution_does_not_depend_on_thread_count() {
    let p = StableParams64::new(1.5, 0.0).unwrap();
    let law = OffspringLaw64::new(&[0.5, 0.0, 0.5]).unwrap();
    let cloud = sample_cloud(&p, 4, 20_000, 92).unwrap();
    let grid = geometric_grid(0.01, 100.0, 80).unwrap();
    let solve = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| solve_u(&law, &cloud, &grid, 1e-8, 10_000).unwrap())
    };
    assert_eq!(solve(1), solve(3));
}
