use lpw::grid::{lp_lq_norm, lp_norm, GridFunction, GridSpec, VectorSequence};
use lpw::maximal::*;
use lpw::weights::WeightSequence;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_real(spec: GridSpec, rng: &mut ChaCha8Rng) -> GridFunction {
    GridFunction::real(spec, (0..spec.len()).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
}

fn indicator(spec: GridSpec, lo: f64, hi: f64) -> GridFunction {
    GridFunction::from_fn(spec, |x| if (lo..hi).contains(&x[0]) { 1.0 } else { 0.0 }).unwrap()
}

fn max_abs_diff(a: &GridFunction, b: &GridFunction) -> f64 {
    a.re().iter().zip(b.re()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn fast_path_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for case in 0..1000 {
        let n = if case % 4 == 3 { 2 } else { 1 };
        let samples = if n == 1 { 1 << rng.gen_range(1..7) } else { 1 << rng.gen_range(1..4) };
        let spec = GridSpec::new(n, 2.0, samples, true).unwrap();
        let top = spec.cell_level();
        let lowest = top - samples.trailing_zeros() as i32;
        let v_min = rng.gen_range(lowest..=top);
        let v_max = rng.gen_range(v_min..=top);
        let cfg = MaximalConfig::new(v_min, v_max, rng.gen_bool(0.5));
        let f = random_real(spec, &mut rng);
        let fast = maximal_fn(&f, &cfg).unwrap();
        let slow = maximal_fn_brute(&f, &cfg).unwrap();
        worst = worst.max(max_abs_diff(&fast, &slow));
    }
    assert!(worst <= 1e-12, "{worst}");
}

#[test]
fn constant_input_is_fixed() {
    let spec = GridSpec::new(2, 2.0, 16, true).unwrap();
    let cfg = MaximalConfig::new(-2, spec.cell_level(), true);
    let c = GridFunction::constant(spec, 2.5);
    assert!(max_abs_diff(&maximal_fn(&c, &cfg).unwrap(), &c) < 1e-14);
    assert!(max_abs_diff(&maximal_sigma(&c, 0.7, &cfg).unwrap(), &c) < 1e-14);
}

#[test]
fn indicator_example() {
    let spec = GridSpec::new(1, 4.0, 64, true).unwrap();
    let chi = indicator(spec, 0.0, 1.0);
    // The cell ending at x = 2.
    let at_two = (0..spec.len()).find(|&i| (spec.coord(i) - (2.0 - spec.h() / 2.0)).abs() < 1e-12).unwrap();
    for translates in [false, true] {
        let cfg = MaximalConfig::new(-2, spec.cell_level(), translates);
        let m = maximal_fn(&chi, &cfg).unwrap();
        assert!((m.re()[at_two] - 0.5).abs() < 1e-15);
        assert!((maximal_fn_brute(&chi, &cfg).unwrap().re()[at_two] - 0.5).abs() < 1e-15);
        let m2 = maximal_sigma(&chi, 2.0, &cfg).unwrap();
        assert!((m2.re()[at_two] - 0.5f64.sqrt()).abs() < 1e-15);
        assert!(max_abs_diff(&maximal_sigma(&chi, 1.0, &cfg).unwrap(), &m) < 1e-15);
    }
}

#[test]
fn config_validation() {
    let spec = GridSpec::new(1, 2.0, 32, true).unwrap();
    let f = GridFunction::constant(spec, 1.0);
    assert!(maximal_fn(&f, &MaximalConfig::new(0, spec.cell_level() + 1, true)).is_err());
    assert!(maximal_fn(&f, &MaximalConfig::new(-3, 0, true)).is_err());
    assert!(maximal_fn(&f, &MaximalConfig::new(2, 1, true)).is_err());
    assert!(maximal_sigma(&f, 0.0, &MaximalConfig::new(0, 1, true)).is_err());
}

#[test]
fn fefferman_stein_examples() {
    let spec = GridSpec::new(1, 8.0, 256, true).unwrap();
    let cfg = MaximalConfig::new(-3, spec.cell_level(), true);
    let ones = VectorSequence::new(0, vec![GridFunction::constant(spec, 1.0); 4]).unwrap();
    assert!((fefferman_stein_ratio(&ones, 2.0, 2.0, 1.0, &cfg).unwrap() - 1.0).abs() < 1e-14);

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let f = random_real(spec, &mut rng);
    let zero = GridFunction::zeros(spec);
    let single = VectorSequence::new(0, vec![zero.clone(), f.clone(), zero.clone()]).unwrap();
    let scalar = lp_norm(&maximal_sigma(&f, 0.5, &cfg).unwrap(), 2.0).unwrap() / lp_norm(&f, 2.0).unwrap();
    let vector = fefferman_stein_ratio(&single, 2.0, 1.5, 0.5, &cfg).unwrap();
    assert!((vector - scalar).abs() < 1e-12 * scalar);

    assert!(fefferman_stein_ratio(&single, 2.0, 2.0, 2.0, &cfg).is_err());
    let zeros = VectorSequence::new(0, vec![zero]).unwrap();
    assert!(fefferman_stein_ratio(&zeros, 2.0, 2.0, 1.0, &cfg).is_err());
}

#[test]
fn weighted_ratio_unit_weight_is_scalar_ratio() {
    let spec = GridSpec::new(1, 8.0, 256, true).unwrap();
    let cfg = MaximalConfig::new(-3, spec.cell_level(), true);
    let f = indicator(spec, -0.5, 1.0);
    let fs = VectorSequence::new(0, vec![f.clone()]).unwrap();
    let r = weighted_maximal_ratio(&fs, &WeightSequence::parse("const:1").unwrap(), 2.0, 2.0, &cfg).unwrap();
    let scalar = lp_norm(&maximal_fn(&f, &cfg).unwrap(), 2.0).unwrap() / lp_norm(&f, 2.0).unwrap();
    assert!((r - scalar).abs() < 1e-12 * scalar);
    assert!(r >= 1.0);
    assert!(weighted_maximal_ratio(&fs, &WeightSequence::parse("const:1").unwrap(), 1.0, 2.0, &cfg).is_err());
}

#[test]
fn non_muckenhoupt_weight_blows_up_on_spikes() {
    let spec = GridSpec::new(1, 8.0, 4096, true).unwrap();
    let cfg = MaximalConfig::new(-3, spec.cell_level(), true);
    let ts = WeightSequence::parse("pow:2").unwrap();
    let ratios: Vec<f64> = (0..5)
        .map(|j| {
            let w = (-(j as f64)).exp2();
            let fs = VectorSequence::new(0, vec![indicator(spec, -w, w)]).unwrap();
            weighted_maximal_ratio(&fs, &ts, 2.0, f64::INFINITY, &cfg).unwrap()
        })
        .collect();
    assert!(ratios.windows(2).all(|w| w[1] > w[0]), "{ratios:?}");
    assert!(ratios[4] > 2.0 * ratios[0], "{ratios:?}");

    // The same spikes stay bounded under an A_2 weight.
    let tame = WeightSequence::parse("pow:0.3").unwrap();
    for j in 0..5 {
        let w = (-(j as f64)).exp2();
        let fs = VectorSequence::new(0, vec![indicator(spec, -w, w)]).unwrap();
        assert!(weighted_maximal_ratio(&fs, &tame, 2.0, f64::INFINITY, &cfg).unwrap() < 4.0);
    }
}

#[test]
fn kernel_sums_match_double_loop() {
    let spec = GridSpec::new(1, 4.0, 64, true).unwrap();
    let cfg = MaximalConfig::new(-2, spec.cell_level(), true);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let zero = GridFunction::zeros(spec);
    let f0 = random_real(spec, &mut rng);
    // Levels -2..=3 with only f_0 nonzero.
    let mut entries = vec![zero; 6];
    entries[2] = f0.clone();
    let fs = VectorSequence::new(-2, entries).unwrap();
    let one = WeightSequence::parse("const:1").unwrap();
    let kernel = 1.0;
    let got = kernel_sum_ratio(&fs, &one, kernel, 0, Direction::Below, 2.0, 2.0, &cfg).unwrap();

    let m0 = maximal_fn(&f0, &cfg).unwrap();
    let g: Vec<GridFunction> = (-2..=3)
        .map(|k: i32| if k >= 0 { m0.scaled((-(k as f64) * kernel).exp2()) } else { GridFunction::zeros(spec) })
        .collect();
    let oracle = lp_lq_norm(&VectorSequence::new(-2, g).unwrap(), 2.0, 2.0).unwrap() / lp_lq_norm(&fs, 2.0, 2.0).unwrap();
    assert!((got - oracle).abs() < 1e-12 * oracle, "{got} {oracle}");

    let zeros = VectorSequence::new(0, vec![GridFunction::zeros(spec)]).unwrap();
    assert!(kernel_sum_ratio(&zeros, &one, 1.0, 0, Direction::Above, 2.0, 2.0, &cfg).is_err());
}

#[test]
fn kernel_sum_ratio_bounded_for_dyadic_weights() {
    let spec = GridSpec::new(1, 8.0, 512, true).unwrap();
    let cfg = MaximalConfig::new(-3, spec.cell_level(), true);
    let s = 0.5;
    let ts = WeightSequence::parse(&format!("dyadic:{s}")).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..6 {
        let fs = VectorSequence::new(-3, (0..8).map(|_| random_real(spec, &mut rng)).collect()).unwrap();
        let below = kernel_sum_ratio(&fs, &ts, s + 1.0, 0, Direction::Below, 2.0, 2.0, &cfg).unwrap();
        let above = kernel_sum_ratio(&fs, &ts, s - 1.0, 0, Direction::Above, 2.0, 2.0, &cfg).unwrap();
        assert!(below < 20.0 && above < 20.0, "{below} {above}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pointwise_domination(seed in any::<u64>(), translates in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spec = GridSpec::new(2, 2.0, 16, true).unwrap();
        let f = random_real(spec, &mut rng);
        let m = maximal_fn(&f, &MaximalConfig::new(-2, spec.cell_level(), translates)).unwrap();
        for i in 0..spec.len() {
            prop_assert!(m.re()[i] >= f.abs_at(i));
        }
    }

    #[test]
    fn sublinear_and_homogeneous(seed in any::<u64>(), c in 0.01f64..100.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spec = GridSpec::new(1, 4.0, 128, true).unwrap();
        let cfg = MaximalConfig::new(-3, spec.cell_level(), true);
        let f = random_real(spec, &mut rng);
        let g = random_real(spec, &mut rng);
        let mf = maximal_fn(&f, &cfg).unwrap();
        let mg = maximal_fn(&g, &cfg).unwrap();
        let msum = maximal_fn(&f.add(&g).unwrap(), &cfg).unwrap();
        for i in 0..spec.len() {
            prop_assert!(msum.re()[i] <= mf.re()[i] + mg.re()[i] + 1e-12);
        }
        let mc = maximal_fn(&f.scaled(c), &cfg).unwrap();
        for i in 0..spec.len() {
            prop_assert!((mc.re()[i] - c * mf.re()[i]).abs() <= 1e-12 * c.max(1.0));
        }
    }

    #[test]
    fn larger_families_dominate(seed in any::<u64>(), lo in -3i32..=2, extra in 0i32..=2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spec = GridSpec::new(1, 4.0, 64, true).unwrap();
        let top = spec.cell_level();
        let f = random_real(spec, &mut rng);
        let small = maximal_fn(&f, &MaximalConfig::new(lo, top, false)).unwrap();
        let wider = maximal_fn(&f, &MaximalConfig::new((lo - extra).max(-3), top, false)).unwrap();
        let translated = maximal_fn(&f, &MaximalConfig::new(lo, top, true)).unwrap();
        for i in 0..spec.len() {
            prop_assert!(wider.re()[i] >= small.re()[i]);
            prop_assert!(translated.re()[i] >= small.re()[i]);
        }
    }

    #[test]
    fn sigma_monotone(seed in any::<u64>(), s in 0.2f64..3.0, ds in 0.0f64..3.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spec = GridSpec::new(1, 4.0, 64, true).unwrap();
        let cfg = MaximalConfig::new(-3, spec.cell_level(), true);
        let f = random_real(spec, &mut rng);
        let a = maximal_sigma(&f, s, &cfg).unwrap();
        let b = maximal_sigma(&f, s + ds, &cfg).unwrap();
        for i in 0..spec.len() {
            prop_assert!(b.re()[i] >= a.re()[i] - 1e-12);
        }
    }
}
