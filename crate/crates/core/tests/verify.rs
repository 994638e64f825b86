use lpw::grid::{weighted_lp_norm, CubeFamily, FamilyCube, GridFunction, GridSpec};
use lpw::lpaley::{make_lp_pair, spectrum_outside, LPPair};
use lpw::spaces::tl_norm;
use lpw::verify::*;
use lpw::weights::{SampledWeights, WeightSequence, WeightSpec};
use proptest::prelude::*;
use std::sync::OnceLock;

fn w(s: &str) -> WeightSpec {
    WeightSpec::parse(s).unwrap()
}

fn pair() -> LPPair {
    make_lp_pair(&GridSpec::new(1, 8.0, 1024, true).unwrap(), -3, 6).unwrap()
}

fn corpus() -> &'static Corpus {
    static C: OnceLock<Corpus> = OnceLock::new();
    C.get_or_init(|| Corpus::for_pair(&pair(), 8, 5).unwrap())
}

/// Cube window [-4, 9] with translates on its weight grid.
fn cubes() -> &'static (GridSpec, Vec<FamilyCube>) {
    static C: OnceLock<(GridSpec, Vec<FamilyCube>)> = OnceLock::new();
    C.get_or_init(|| {
        let fam = CubeFamily::new(-4, 9, true);
        let spec = fam.weight_grid(1, 8.0).unwrap();
        let cubes = fam.cubes(&spec).unwrap();
        (spec, cubes)
    })
}

fn lp_with(t: &WeightSpec, p: f64) -> impl Fn(&GridFunction) -> lpw::Result<f64> {
    let t = t.clone();
    move |f: &GridFunction| {
        let gamma = SampledWeights::new(&WeightSequence::uniform(t.clone()), f.spec())?.level(0);
        weighted_lp_norm(f, &GridFunction::real(*f.spec(), gamma)?, p)
    }
}

#[test]
fn corpus_is_admissible_and_reproducible() {
    let p = pair();
    let c = corpus();
    assert_eq!(c.len(), 8);
    for m in &c.members {
        assert!(spectrum_outside(&m.f, p.admissible_band()).is_empty());
        let mean: f64 = m.f.re().iter().sum::<f64>() / m.f.len() as f64;
        assert!(mean.abs() < 1e-12);
    }
    let again = Corpus::for_pair(&p, 8, 5).unwrap();
    for (a, b) in c.members.iter().zip(&again.members) {
        assert_eq!(a.recipe, b.recipe);
        assert_eq!(a.f.re(), b.f.re());
    }
    let other = Corpus::for_pair(&p, 8, 6).unwrap();
    assert_ne!(c.members[0].f.re(), other.members[0].f.re());
}

#[test]
fn resampled_corpus_keeps_members() {
    let c = corpus();
    let fine = c.resampled(&c.spec.refined()).unwrap();
    for (a, b) in c.members.iter().zip(&fine.members) {
        // Same trigonometric polynomial: the fine samples at even offsets are
        // not the coarse ones, but the L_2 norms agree.
        let l2 = |f: &GridFunction| (f.re().iter().map(|v| v * v).sum::<f64>() * f.spec().cell_volume()).sqrt();
        assert!((l2(&a.f) - l2(&b.f)).abs() <= 1e-10 * l2(&a.f));
    }
}

#[test]
fn self_equivalence_is_exactly_one() {
    let p = pair();
    let one = WeightSequence::parse("const:1").unwrap();
    let norm = |f: &GridFunction| tl_norm(f, &p, &one, 2.0, 2.0);
    let r = equivalence_report(("F", norm), ("F", norm), corpus()).unwrap();
    assert_eq!((r.min, r.max), (1.0, 1.0));
    assert!(r.ratios.iter().all(|&(_, v)| v == 1.0));
}

#[test]
fn doubled_weight_doubles_every_lp_ratio() {
    let t = w("pow:0.3");
    let r = equivalence_report(("Lp(t)", lp_with(&t, 2.0)), ("Lp(2t)", lp_with(&t.scaled(2.0), 2.0)), corpus()).unwrap();
    for &(_, v) in &r.ratios {
        assert!((v - 2.0).abs() <= 1e-14, "{v}");
    }
}

#[test]
fn zero_norm_members_are_excluded() {
    let r = report_from_pairs("a", "b", &[(1.0, 2.0), (0.0, 1.0), (2.0, 1.0), (3.0, 0.0)]).unwrap();
    assert_eq!(r.excluded, vec![1, 3]);
    assert_eq!(r.ratios, vec![(0, 2.0), (2, 0.5)]);
    assert_eq!((r.argmin, r.argmax), (2, 0));
    assert!(report_from_pairs("a", "b", &[(0.0, 1.0)]).is_err());
}

#[test]
fn ceiling_sweep_reports_drift() {
    let a = report_from_pairs("a", "b", &[(1.0, 2.0), (1.0, 1.0)]).unwrap();
    let b = report_from_pairs("a", "b", &[(4.0, 1.0), (1.0, 1.0)]).unwrap();
    let s = ceiling_sweep(&[(0, a), (1, b)]);
    assert_eq!(s.ceilings, vec![(0, 2.0), (1, 4.0)]);
    assert_eq!(s.drift, 2.0);
}

proptest! {
    #[test]
    fn report_extremes_and_symmetry(pairs in prop::collection::vec((1e-3f64..1e3, 1e-3f64..1e3), 1..40)) {
        let r = report_from_pairs("a", "b", &pairs).unwrap();
        for &(i, v) in &r.ratios {
            prop_assert!(r.min <= v && v <= r.max);
            prop_assert_eq!(v, pairs[i].1 / pairs[i].0);
        }
        prop_assert_eq!(r.min, pairs[r.argmin].1 / pairs[r.argmin].0);
        prop_assert_eq!(r.max, pairs[r.argmax].1 / pairs[r.argmax].0);
        let swapped: Vec<(f64, f64)> = pairs.iter().map(|&(a, b)| (b, a)).collect();
        let s = report_from_pairs("b", "a", &swapped).unwrap();
        let inv = r.inverted();
        for (x, y) in s.ratios.iter().zip(&inv.ratios) {
            prop_assert_eq!(x.0, y.0);
            prop_assert!((x.1 - y.1).abs() <= 1e-12 * x.1);
        }
        prop_assert!((s.min - inv.min).abs() <= 1e-12 * s.min);
        prop_assert!((s.max - inv.max).abs() <= 1e-12 * s.max);
    }
}

#[test]
fn sigma1_values() {
    assert_eq!(sigma1(2.0, 1.0).unwrap(), 2.0);
    assert!((sigma1(3.0, 0.5).unwrap() - 0.6).abs() < 1e-15);
    assert!(sigma1(1.0, 1.0).is_err());
    assert!(sigma1(2.0, 3.0).is_err());
}

#[test]
fn holder_floor_examples() {
    let (spec, cubes) = cubes();
    let (one, _) = holder_floor_check(&w("const:1"), 2.0, 1.0, spec, cubes).unwrap();
    assert!((one - 1.0).abs() <= 1e-15, "{one}");
    let (dy, _) = holder_floor_check(&w("dyadic:1"), 2.0, 1.0, spec, cubes).unwrap();
    assert!((dy - 1.0).abs() <= 1e-15, "{dy}");
    for s in ["pow:0.3", "pow:-0.3", "shiftpow:1,1", "prod:[pow:0.3,shiftpow:-0.5,2]"] {
        for (p, theta) in [(2.0, 1.0), (3.0, 0.5)] {
            let (m, _) = holder_floor_check(&w(s), p, theta, spec, cubes).unwrap();
            assert!(m >= 1.0 - 1e-12, "{s} p={p} theta={theta}: {m}");
        }
    }
}

#[test]
fn scaled_weight_coincides_with_exact_ratios() {
    let (spec, cubes) = cubes();
    let t = w("pow:0.3");
    for c in [0.1, 1.0, 7.0] {
        let r = coincidence_check(&t, &t.scaled(c), 2.0, 1.0, spec, cubes, 50.0, 100.0).unwrap();
        assert!(r.pass);
        for v in [r.inverse.min, r.inverse.max] {
            assert!((v - c).abs() <= 1e-12 * c, "{v} vs {c}");
        }
        for v in [r.direct.min, r.direct.max] {
            assert!((v - 1.0 / c).abs() <= 1e-12 / c, "{v} vs {}", 1.0 / c);
        }
    }
    let same = coincidence_check(&t, &t, 2.0, 1.0, spec, cubes, 50.0, 100.0).unwrap();
    assert_eq!((same.direct.min, same.direct.max, same.inverse.min, same.inverse.max), (1.0, 1.0, 1.0, 1.0));
}

#[test]
fn opposite_powers_do_not_coincide() {
    let (spec, cubes) = cubes();
    let r = coincidence_check(&w("pow:0.3"), &w("pow:-0.3"), 2.0, 1.0, spec, cubes, 10.0, 100.0).unwrap();
    assert!(!r.pass);
    // M_{Q,2} ratio of |x|^{0.6} on origin cubes scales like l(Q)^{0.6}.
    assert!(r.direct.spread() > 2f64.powf(0.6 * 12.0), "{}", r.direct.spread());
}

#[test]
fn coincidence_refuses_outside_the_hypothesis() {
    let (spec, cubes) = cubes();
    let e = coincidence_check(&w("pow:0.3"), &w("pow:-0.3"), 2.0, 1.5, spec, cubes, 50.0, 100.0).unwrap_err();
    assert!(e.to_string().contains("hypothesis"), "{e}");
    // An estimate above the A_p ceiling is refused as well.
    assert!(coincidence_check(&w("pow:0.9"), &w("pow:0.9"), 1.5, 1.0, spec, cubes, 50.0, 1.0).is_err());
}

fn positions() -> Vec<(i32, [i64; 2])> {
    (-3..=9).flat_map(|k| [(k, [-1, 0]), (k, [0, 0])]).collect()
}

#[test]
fn delta_check_examples() {
    let (spec, _) = cubes();
    let t = w("pow:0.3");
    let same = delta_coefficient_check(&t, &t, 2.0, 2.0, spec, &positions(), 50.0).unwrap();
    assert!(same.pass);
    assert!(same.ratios.iter().all(|r| r.2 == 1.0 && r.3 == 1.0));
    let tripled = delta_coefficient_check(&t, &t.scaled(3.0), 2.0, 2.0, spec, &positions(), 50.0).unwrap();
    for r in &tripled.ratios {
        assert!((r.2 - 3.0).abs() <= 1e-12 && (r.3 - 3.0).abs() <= 1e-12, "{r:?}");
    }
    let neg = delta_coefficient_check(&t, &w("pow:-0.3"), 2.0, 2.0, spec, &positions(), 10.0).unwrap();
    assert!(!neg.pass);
    assert!(delta_coefficient_check(&t, &t, 2.0, 2.0, spec, &[], 50.0).is_err());
}

#[test]
fn delta_check_agrees_with_cube_check() {
    let (spec, cubes) = cubes();
    let fixtures = [("pow:0.3", "pow:0.3"), ("pow:0.3", "prod:[pow:0.3,const:4]"), ("pow:0.3", "pow:-0.3"), ("pow:0.2", "pow:0.4")];
    for (a, b) in fixtures {
        let c = coincidence_check(&w(a), &w(b), 2.0, 1.0, spec, cubes, 10.0, 100.0).unwrap();
        let d = delta_coefficient_check(&w(a), &w(b), 2.0, 2.0, spec, &positions(), 10.0).unwrap();
        assert_eq!(c.pass, d.pass, "{a} vs {b}: direct {:?}, delta [{}, {}]", c.direct, d.min, d.max);
    }
}

#[test]
fn coincidence_implies_lp_equivalence_at_squared_ceiling() {
    let (spec, cubes) = cubes();
    let c_c = 50.0;
    let base = w("pow:0.3");
    for other in ["pow:0.3", "prod:[pow:0.3,const:4]", "prod:[pow:0.3,shiftpow:0.5,1]", "prod:[pow:0.3,const:0.1]"] {
        let t2 = w(other);
        let res = coincidence_check(&base, &t2, 2.0, 1.0, spec, cubes, c_c, 100.0).unwrap();
        assert!(res.pass, "{other}");
        let r = equivalence_report(("Lp(t1)", lp_with(&base, 2.0)), ("Lp(t2)", lp_with(&t2, 2.0)), corpus()).unwrap();
        assert!(r.within(c_c * c_c), "{other}: [{}, {}]", r.min, r.max);
    }
}
