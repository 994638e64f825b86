use lpw::grid::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn random_function(spec: GridSpec, seed: u64) -> GridFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let re = (0..spec.len()).map(|_| rng.gen_range(-2.0..2.0)).collect();
    let im = (0..spec.len()).map(|_| rng.gen_range(-2.0..2.0)).collect();
    GridFunction::complex(spec, re, im).unwrap()
}

#[test]
fn spec_validation() {
    assert!(GridSpec::new(1, 8.0, 4096, true).is_ok());
    assert!(GridSpec::new(3, 8.0, 64, true).is_err());
    assert!(GridSpec::new(1, 3.0, 64, true).is_err());
    assert!(GridSpec::new(1, 8.0, 100, true).is_err());
    let s = GridSpec::new(1, 1.0, 8, true).unwrap();
    assert_eq!(s.h(), 0.25);
    assert_eq!(s.coord(0), -0.875);
    assert!((0..s.len()).all(|i| s.point(i)[0] != 0.0));
}

#[test]
fn cube_enumeration_counts() {
    let s1 = GridSpec::new(1, 1.0, 8, true).unwrap();
    let c = enumerate_cubes(&s1, 0, 0).unwrap();
    assert_eq!(c.len(), 2);
    assert_eq!(c[0].cell_box(&s1), Some(([0, 0], 4)));
    assert_eq!(c[1].cell_box(&s1), Some(([4, 0], 4)));
    assert_eq!(enumerate_cubes(&s1, 0, 2).unwrap().len(), 14);
    let s2 = GridSpec::new(2, 1.0, 8, true).unwrap();
    let c2 = enumerate_cubes(&s2, 1, 1).unwrap();
    assert_eq!(c2.len(), 16);
    assert!(c2.iter().all(|c| (c.side() - 0.5).abs() < 1e-15));
    assert!(enumerate_cubes(&s1, 0, 3).is_err());
    assert!(enumerate_cubes(&s1, -2, 0).is_err());
}

#[test]
fn cubes_of_one_level_tile_the_domain_once() {
    for (n, samples) in [(1, 64), (2, 16)] {
        let spec = GridSpec::new(n, 2.0, samples, true).unwrap();
        for v in -1..=spec.cell_level() {
            let mut hits = vec![0u32; spec.len()];
            let fam = CubeFamily::new(v, v, false);
            for c in fam.cubes(&spec).unwrap() {
                for i in c.indices(&spec) {
                    hits[i] += 1;
                }
            }
            assert!(hits.iter().all(|&h| h == 1), "n={n} v={v}");
        }
    }
}

#[test]
fn cube_average_examples() {
    let spec = GridSpec::new(1, 2.0, 64, true).unwrap();
    let q = DyadicCube::new(0, [0, 0]);
    assert!(rel(cube_average(&GridFunction::constant(spec, 3.0), &q, 2.0).unwrap(), 3.0) < 1e-15);
    let chi = GridFunction::from_fn(spec, |x| if (0.0..1.0).contains(&x[0]) { 1.0 } else { 0.0 }).unwrap();
    let q2 = DyadicCube::new(-1, [0, 0]);
    assert!(rel(cube_average(&chi, &q2, 1.0).unwrap(), 0.5) < 1e-15);
    assert!(cube_average(&chi, &q2, 0.0).is_err());
    assert!(cube_average(&chi, &DyadicCube::new(9, [0, 0]), 1.0).is_err());
    // Midpoint rule for the integral of x^{1/2} over [0, 1) = 2/3.
    let fine = GridSpec::new(1, 2.0, 1 << 16, true).unwrap();
    let root = GridFunction::from_fn(fine, |x| x[0].abs().sqrt()).unwrap();
    let avg = cube_average(&root, &q, 1.0).unwrap();
    assert!((avg - 2.0 / 3.0).abs() < 1e-6, "{avg}");
}

#[test]
fn weighted_lp_examples() {
    let spec = GridSpec::new(1, 1.0, 64, true).unwrap();
    let one = GridFunction::constant(spec, 1.0);
    assert!(rel(weighted_lp_norm(&one, &one, 2.0).unwrap(), 2f64.sqrt()) < 1e-14);
    let f = GridFunction::from_fn(spec, |x| x[0].sin() + 0.3).unwrap();
    let g = GridFunction::from_fn(spec, |x| 1.0 + x[0] * x[0]).unwrap();
    for p in [0.5, 1.0, 3.0] {
        let a = weighted_lp_norm(&f, &g, p).unwrap();
        let b = weighted_lp_norm(&f, &g.scaled(2.0), p).unwrap();
        assert!(rel(b, 2.0 * a) < 1e-14);
    }
    let neg = GridFunction::constant(spec, -1.0);
    assert!(weighted_lp_norm(&f, &neg, 2.0).is_err());
    assert_eq!(
        weighted_lp_norm(&f, &g, f64::INFINITY).unwrap(),
        (0..spec.len()).map(|i| f.abs_at(i) * g.abs_at(i)).fold(0.0, f64::max)
    );
}

/// Adaptive Simpson quadrature.
fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            return left + right + (left + right - whole) / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    rec(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, 60)
}

#[test]
fn weighted_lp_matches_adaptive_quadrature() {
    let spec = GridSpec::new(1, 8.0, 1 << 16, true).unwrap();
    let bump = GridFunction::from_fn(spec, |x| (-x[0] * x[0]).exp()).unwrap();
    let gamma = GridFunction::from_fn(spec, |x| x[0].abs().powf(0.3)).unwrap();
    let got = weighted_lp_norm(&bump, &gamma, 2.0).unwrap();
    let integrand = |x: f64| (-2.0 * x * x).exp() * x.powf(0.6);
    let oracle = (2.0 * simpson(&integrand, 0.0, 8.0, 1e-14)).sqrt();
    assert!(rel(got, oracle) < 1e-6, "{got} {oracle}");
}

#[test]
fn weak_lp_examples() {
    let spec = GridSpec::new(1, 1.0, 64, true).unwrap();
    let chi = GridFunction::from_fn(spec, |x| if (0.0..0.5).contains(&x[0]) { 1.0 } else { 0.0 }).unwrap();
    assert!(rel(weak_lp_norm(&chi, 2.0).unwrap(), 0.5f64.sqrt()) < 1e-14);
    assert_eq!(weak_lp_norm(&GridFunction::zeros(spec), 2.0).unwrap(), 0.0);
    // On the offset grid the sup is attained at the two origin cells:
    // (h/2)^{-1/4} (2h)^{1/4} = 2^{1/2} for every N.
    for samples in [1024, 2048, 4096] {
        let s = GridSpec::new(1, 8.0, samples, true).unwrap();
        let f = GridFunction::from_fn(s, |x| x[0].abs().powf(-0.25)).unwrap();
        let v = weak_lp_norm(&f, 4.0).unwrap();
        assert!(rel(v, 2f64.sqrt()) < 1e-12, "{v}");
    }
}

#[test]
fn lp_lq_examples() {
    let spec = GridSpec::new(1, 2.0, 64, true).unwrap();
    let f = random_function(spec, 1);
    let zero = GridFunction::zeros(spec);
    let single = VectorSequence::new(0, vec![zero.clone(), f.clone(), zero]).unwrap();
    for q in [0.5, 2.0, f64::INFINITY] {
        assert!(rel(lp_lq_norm(&single, 1.5, q).unwrap(), lp_norm(&f, 1.5).unwrap()) < 1e-14);
    }
    let twice = VectorSequence::new(0, vec![f.clone(), f.clone()]).unwrap();
    assert!(rel(lp_lq_norm(&twice, 3.0, 2.0).unwrap(), 2f64.sqrt() * lp_norm(&f, 3.0).unwrap()) < 1e-14);
    // Naive double loop oracle.
    let fs: Vec<GridFunction> = (0..5).map(|s| random_function(spec, 10 + s)).collect();
    let seq = VectorSequence::new(-2, fs.clone()).unwrap();
    let mut acc = 0.0;
    for i in 0..spec.len() {
        let mut inner = 0.0;
        for f in &fs {
            inner += f.abs_at(i).powi(3);
        }
        acc += inner.powf(2.0 / 3.0);
    }
    let oracle = (acc * spec.h()).sqrt();
    assert!(rel(lp_lq_norm(&seq, 2.0, 3.0).unwrap(), oracle) < 1e-12);
    let other = GridSpec::new(1, 2.0, 32, true).unwrap();
    assert!(VectorSequence::new(0, vec![f, GridFunction::zeros(other)]).is_err());
}

#[test]
fn grid_function_io_round_trip() {
    let spec = GridSpec::new(2, 4.0, 16, true).unwrap();
    let f = random_function(spec, 3);
    let (side, bytes) = f.encode();
    assert_eq!(GridFunction::decode(&side, &bytes).unwrap(), f);
    assert!(GridFunction::decode(&side, &bytes[..bytes.len() - 1]).is_err());
    let dir = std::env::temp_dir().join(format!("lpw-grid-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let stem = dir.join("f");
    f.write_to(&stem).unwrap();
    assert_eq!(GridFunction::read_from(&stem).unwrap(), f);
    std::fs::remove_dir_all(&dir).unwrap();
}

fn cubes_1d() -> (GridSpec, Vec<FamilyCube>) {
    let spec = GridSpec::new(1, 4.0, 128, true).unwrap();
    let cubes = CubeFamily::new(-3, spec.cell_level(), true).cubes(&spec).unwrap();
    (spec, cubes)
}

fn average(f: &[f64], c: &FamilyCube, spec: &GridSpec, p: f64) -> f64 {
    let idx = c.indices(spec);
    (idx.iter().map(|&i| f[i].abs().powf(p)).sum::<f64>() / idx.len() as f64).powf(1.0 / p)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn jensen_monotonicity(seed in any::<u64>(), p1 in 0.1f64..4.0, dp in 0.0f64..4.0) {
        let (spec, cubes) = cubes_1d();
        let f = random_function(spec, seed).magnitudes();
        for c in &cubes {
            prop_assert!(average(&f, c, &spec, p1) <= average(&f, c, &spec, p1 + dp) + 1e-12);
        }
    }

    #[test]
    fn discrete_holder(seed in any::<u64>(), p in 0.5f64..4.0, s in 0.5f64..4.0) {
        let (spec, cubes) = cubes_1d();
        let u = random_function(spec, seed).magnitudes();
        let v = random_function(spec, seed ^ 1).magnitudes();
        let uv: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a * b).collect();
        let theta = 1.0 / (1.0 / p + 1.0 / s);
        for c in &cubes {
            let lhs = average(&uv, c, &spec, theta);
            prop_assert!(lhs <= average(&u, c, &spec, p) * average(&v, c, &spec, s) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn tiling_consistency(seed in any::<u64>(), v in -2i32..5) {
        let spec = GridSpec::new(1, 4.0, 128, true).unwrap();
        let f = random_function(spec, seed);
        let total = lp_norm(&f, 1.0).unwrap();
        let sum: f64 = enumerate_cubes(&spec, v, v)
            .unwrap()
            .iter()
            .map(|q| {
                let (_, side) = q.cell_box(&spec).unwrap();
                side as f64 * spec.h() * cube_average(&f, q, 1.0).unwrap()
            })
            .sum();
        prop_assert!(rel(sum, total) < 1e-12);
    }

    #[test]
    fn lp_lq_decreases_in_q(seed in any::<u64>(), p in 0.5f64..4.0, q in 0.3f64..4.0, dq in 0.0f64..4.0) {
        let spec = GridSpec::new(1, 2.0, 32, true).unwrap();
        let fs: Vec<GridFunction> = (0..4).map(|i| random_function(spec, seed.wrapping_add(i))).collect();
        let seq = VectorSequence::new(0, fs).unwrap();
        let a = lp_lq_norm(&seq, p, q).unwrap();
        let b = lp_lq_norm(&seq, p, q + dq).unwrap();
        let c = lp_lq_norm(&seq, p, f64::INFINITY).unwrap();
        prop_assert!(b <= a * (1.0 + 1e-12));
        prop_assert!(c <= b * (1.0 + 1e-12));
    }
}
