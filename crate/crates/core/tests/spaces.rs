use lpw::grid::{CubeFamily, GridFunction, GridSpec};
use lpw::lpaley::{analyze, band, make_lp_pair, CoefficientSet, LPPair};
use lpw::spaces::*;
use lpw::verify::{random_coefficients, Corpus};
use lpw::weights::WeightSequence;

fn grid(n: usize, samples: usize) -> GridSpec {
    GridSpec::new(n, 8.0, samples, true).unwrap()
}

fn seq(s: &str) -> WeightSequence {
    WeightSequence::parse(s).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn small_pair() -> LPPair {
    make_lp_pair(&grid(1, 512), -3, 5).unwrap()
}

#[test]
fn classical_path_matches_weighted_norms_with_dyadic_weights() {
    let pair = small_pair();
    let corpus = Corpus::for_pair(&pair, 8, 11).unwrap();
    for m in &corpus.members {
        let cb = ClassicalBands::new(&m.f, &pair);
        for s in [-1.0, 0.0, 0.5, 2.0] {
            let ts = seq(&format!("dyadic:{s}"));
            let wb = WeightedBands::of(&m.f, &pair, &ts).unwrap();
            for (p, q) in [(2.0, 2.0), (1.0, f64::INFINITY), (3.0, 1.5)] {
                let (a, b) = (wb.besov(p, q).unwrap(), cb.besov(s, p, q).unwrap());
                assert!(rel(a, b) <= 1e-12, "B s={s} p={p} q={q}: {a} vs {b}");
                let (a, b) = (wb.triebel(p, q).unwrap(), cb.triebel(s, p, q).unwrap());
                assert!(rel(a, b) <= 1e-12, "F s={s} p={p} q={q}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn zero_function_has_zero_norms() {
    let pair = small_pair();
    let z = GridFunction::zeros(pair.spec);
    let ts = seq("pow:0.3");
    let fam = CubeFamily::new(-3, 5, false);
    assert_eq!(besov_norm(&z, &pair, &ts, 2.0, 2.0).unwrap(), 0.0);
    assert_eq!(tl_norm(&z, &pair, &ts, 2.0, 2.0).unwrap(), 0.0);
    assert_eq!(tl_infty_norm(&z, &pair, &ts, 2.0, &fam).unwrap(), 0.0);
    assert_eq!(bmo_norm(&z, &fam).unwrap().0, 0.0);
}

#[test]
fn single_band_norms_reduce_to_one_level() {
    let pair = small_pair();
    let spec = pair.spec;
    // Mode at |xi| = 2^2 lives only in band k = 2.
    let j = (4.0 * spec.half_width / std::f64::consts::PI).round() as usize;
    let xi = std::f64::consts::PI * j as f64 / spec.half_width;
    let f = GridFunction::from_fn(spec, |x| (xi * x[0]).cos()).unwrap();
    let ts = seq("pow:0.3");
    let wb = WeightedBands::of(&f, &pair, &ts).unwrap();
    let nonzero: Vec<usize> =
        wb.levels.iter().enumerate().filter(|(_, l)| l.iter().any(|v| *v > 1e-12)).map(|(i, _)| i).collect();
    assert_eq!(nonzero.len(), 1);
    for q in [1.5, 2.0, f64::INFINITY] {
        assert!(rel(wb.besov(2.0, q).unwrap(), wb.besov(2.0, 1.0).unwrap()) < 1e-12);
        assert!(rel(wb.triebel(2.0, q).unwrap(), wb.besov(2.0, q).unwrap()) < 1e-12);
    }
}

#[test]
fn single_band_carleson_norm_matches_cube_scan() {
    let pair = small_pair();
    let spec = pair.spec;
    let j = (4.0 * spec.half_width / std::f64::consts::PI).round() as usize;
    let xi = std::f64::consts::PI * j as f64 / spec.half_width;
    let f = GridFunction::from_fn(spec, |x| (xi * x[0]).sin() * (-x[0] * x[0] / 8.0).exp()).unwrap();
    let fam = CubeFamily::new(-3, 5, true);
    let q = 2.0;
    let ts = seq("const:1");
    let got = tl_infty_norm(&f, &pair, &ts, q, &fam).unwrap();
    // Direct scan: every band contributes to cubes no finer than it.
    let bands: Vec<(i32, Vec<f64>)> = pair.levels().map(|k| (k, band(&f, &pair, k).unwrap().magnitudes())).collect();
    let mut best = 0.0f64;
    for c in fam.cubes(&spec).unwrap() {
        let idx = c.indices(&spec);
        let mut total = 0.0;
        for (k, b) in &bands {
            if *k >= c.cube.v {
                total += idx.iter().map(|&i| b[i].powf(q)).sum::<f64>();
            }
        }
        best = best.max(total / idx.len() as f64);
    }
    assert!(rel(got, best.powf(1.0 / q)) < 1e-12, "{got} {}", best.sqrt());
    let doubled = tl_infty_norm(&f, &pair, &ts.scaled(2.0), q, &fam).unwrap();
    assert!(rel(doubled, 2.0 * got) < 1e-12);
}

#[test]
fn homogeneity_and_q_monotonicity_on_corpus() {
    let pair = small_pair();
    let corpus = Corpus::for_pair(&pair, 4, 5).unwrap();
    let ts = seq("prod:[pow:0.3,dyadic:0.5]");
    for f in corpus.functions() {
        let wb = WeightedBands::of(f, &pair, &ts).unwrap();
        let scaled = WeightedBands::of(&f.scaled(-3.0), &pair, &ts).unwrap();
        assert!(rel(scaled.besov(1.5, 2.0).unwrap(), 3.0 * wb.besov(1.5, 2.0).unwrap()) < 1e-12);
        assert!(rel(scaled.triebel(1.5, 2.0).unwrap(), 3.0 * wb.triebel(1.5, 2.0).unwrap()) < 1e-12);
        let qs = [0.5, 1.0, 2.0, 4.0, f64::INFINITY];
        for w in qs.windows(2) {
            assert!(wb.besov(2.0, w[1]).unwrap() <= wb.besov(2.0, w[0]).unwrap() * (1.0 + 1e-12));
            assert!(wb.triebel(2.0, w[1]).unwrap() <= wb.triebel(2.0, w[0]).unwrap() * (1.0 + 1e-12));
        }
    }
}

#[test]
fn quasi_triangle_inequality() {
    let pair = small_pair();
    let corpus = Corpus::for_pair(&pair, 6, 9).unwrap();
    let ts = seq("pow:-0.2");
    let fs: Vec<&GridFunction> = corpus.functions().collect();
    for (p, q) in [(0.5, 2.0), (2.0, 0.7), (1.0, 1.0)] {
        let c: f64 = 1.0f64.max((1.0 / p - 1.0f64).exp2()).max((1.0 / q - 1.0f64).exp2());
        for w in fs.windows(2) {
            let sum = w[0].add(w[1]).unwrap();
            for norm in [besov_norm, tl_norm] {
                let lhs = norm(&sum, &pair, &ts, p, q).unwrap();
                let rhs = norm(w[0], &pair, &ts, p, q).unwrap() + norm(w[1], &pair, &ts, p, q).unwrap();
                assert!(lhs <= c * rhs * (1.0 + 1e-12));
            }
        }
    }
}

#[test]
fn frame_bound_oracle_for_unweighted_l2() {
    let pair = small_pair();
    let (lo, hi) = lpw::lpaley::frame_bounds(&pair);
    let corpus = Corpus::for_pair(&pair, 8, 3).unwrap();
    for f in corpus.functions() {
        let l2 = lpw::grid::lp_norm(f, 2.0).unwrap();
        let tl = tl_norm(f, &pair, &seq("const:1"), 2.0, 2.0).unwrap();
        let r = (tl / l2).powi(2);
        assert!(r >= lo * (1.0 - 1e-12) && r <= hi * (1.0 + 1e-12), "{r} not in [{lo}, {hi}]");
    }
}

#[test]
fn single_coefficient_sequence_norms() {
    let spec = grid(1, 512);
    let one = seq("const:1");
    for k0 in [-2, 0, 2, 4] {
        let lambda = CoefficientSet::delta(1, k0, [1, 0]);
        let b = seq_b_norm(&lambda, &spec, &one, 1.0, 1.0).unwrap();
        let expected = (-(k0 as f64) / 2.0).exp2();
        assert!(rel(b.plain, expected) < 1e-12 && rel(b.starred, expected) < 1e-12, "{b:?}");
        let f = seq_f_norm(&lambda, &spec, &one, 2.0, 2.0).unwrap();
        assert!(rel(f.plain, 1.0) < 1e-12 && rel(f.starred, 1.0) < 1e-12, "{f:?}");
        let f1 = seq_f_norm(&lambda, &spec, &one, 1.0, 3.0).unwrap();
        assert!(rel(f1.plain, expected) < 1e-12 && rel(f1.starred, expected) < 1e-12);
    }
    let fam = CubeFamily::new(-3, 5, true);
    for w in ["pow:0.3", "pow:-0.5", "prod:[dyadic:0.5,shiftpow:1,1]", "prod:[pow:0.3,const:4]"] {
        let ts = seq(w);
        for k0 in [-3, -1, 0, 3, 5] {
            for m in [-1, 0, 3] {
                if k0 < -1 && m == 3 {
                    continue;
                }
                let lambda = CoefficientSet::delta(1, k0, [m, 0]);
                for (p, q) in [(2.0, 2.0), (1.0, 0.5), (3.0, f64::INFINITY)] {
                    let b = seq_b_norm(&lambda, &spec, &ts, p, q).unwrap();
                    assert!(rel(b.plain, b.starred) <= 1e-12, "{w} b {k0} {m}: {b:?}");
                    let f = seq_f_norm(&lambda, &spec, &ts, p, q).unwrap();
                    assert!(rel(f.plain, f.starred) <= 1e-12, "{w} f {k0} {m}: {f:?}");
                }
                let fi = seq_f_infty_norm(&lambda, &spec, &ts, 2.0, &fam).unwrap();
                assert!(rel(fi.plain, fi.starred) <= 1e-12, "{w} f_inf {k0} {m}: {fi:?}");
            }
        }
    }
}

#[test]
fn empty_coefficients_give_zero() {
    let spec = grid(1, 256);
    let e = CoefficientSet::new(1);
    let fam = CubeFamily::new(-3, 5, false);
    let r = seq_f_infty_norm(&e, &spec, &seq("pow:0.3"), 2.0, &fam).unwrap();
    assert_eq!((r.plain, r.starred), (0.0, 0.0));
    assert_eq!(seq_b_norm(&e, &spec, &seq("pow:0.3"), 2.0, 2.0).unwrap().plain, 0.0);
}

#[test]
fn random_sequence_norms_stay_comparable() {
    let spec = grid(1, 1024);
    let fam = CubeFamily::new(-3, 6, true);
    let mut worst = 1.0f64;
    for seed in 0..16 {
        let lambda = random_coefficients(1, 8.0, (-3, 6), 10, seed);
        for w in ["pow:0.3", "dyadic:0.5"] {
            let ts = seq(w);
            let f = seq_f_norm(&lambda, &spec, &ts, 2.0, 2.0).unwrap();
            let fi = seq_f_infty_norm(&lambda, &spec, &ts, 2.0, &fam).unwrap();
            for r in [f.plain / f.starred, fi.plain / fi.starred] {
                worst = worst.max(r).max(1.0 / r);
            }
        }
    }
    assert!(worst < 20.0, "{worst}");
}

#[test]
fn analysis_feeds_sequence_norms() {
    let pair = small_pair();
    let corpus = Corpus::for_pair(&pair, 2, 1).unwrap();
    let f = &corpus.members[0].f;
    let lambda = analyze(f, &pair).unwrap();
    let b = seq_b_norm(&lambda, &pair.spec, &seq("const:1"), 2.0, 2.0).unwrap();
    assert!(b.plain > 0.0 && rel(b.plain, b.starred) < 1e-12);
    let doubled = seq_b_norm(&lambda.scaled(2.0), &pair.spec, &seq("const:1"), 2.0, 2.0).unwrap();
    assert!(rel(doubled.plain, 2.0 * b.plain) < 1e-12);
}

#[test]
fn bmo_examples() {
    let spec = GridSpec::new(1, 2.0, 64, true).unwrap();
    let fam = CubeFamily::new(-1, 4, true);
    let chi = GridFunction::from_fn(spec, |x| if (0.0..1.0).contains(&x[0]) { 1.0 } else { 0.0 }).unwrap();
    let (v, w) = bmo_norm(&chi, &fam).unwrap();
    assert!(rel(v, 0.5) < 1e-12, "{v}");
    let w = w.unwrap();
    assert_eq!(w.v, -1, "{w:?}");
    let shifted = chi.add(&GridFunction::constant(spec, 5.0)).unwrap();
    assert!(rel(bmo_norm(&shifted, &fam).unwrap().0, v) < 1e-12);
    assert_eq!(bmo_norm(&GridFunction::constant(spec, 3.0), &fam).unwrap().0, 0.0);
}

#[test]
fn dictionary_members_are_normalized() {
    let d = TestFunctionDictionary::standard(1).unwrap();
    assert_eq!(d.members.len(), 8);
    for m in &d.members {
        let fine = m.seminorm(1, d.order_n, 200_000);
        assert!(fine <= 1.0, "{m:?}: {fine}");
    }
    let d2 = TestFunctionDictionary::standard(2).unwrap();
    for m in &d2.members {
        assert!(m.seminorm(2, d2.order_n, 1200) <= 1.0);
    }
}

#[test]
fn hardy_norm_grows_with_dictionary_and_tracks_triebel() {
    let pair = small_pair();
    let d = TestFunctionDictionary::standard(1).unwrap();
    let ts = seq("const:1");
    let corpus = Corpus::for_pair(&pair, 8, 21).unwrap();
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for f in corpus.functions() {
        let mut prev = 0.0;
        for count in 1..=d.members.len() {
            let v = hardy_grand_norm(f, &pair, &ts, 2.0, &d.truncated(count)).unwrap();
            assert!(v >= prev);
            prev = v;
        }
        let r = prev / tl_norm(f, &pair, &ts, 2.0, 2.0).unwrap();
        lo = lo.min(r);
        hi = hi.max(r);
    }
    assert!(hi / lo < 20.0, "{lo} {hi}");
    let z = GridFunction::zeros(pair.spec);
    assert_eq!(hardy_grand_norm(&z, &pair, &ts, 2.0, &d).unwrap(), 0.0);
}

#[test]
fn space_tags_round_trip() {
    for s in Space::ALL {
        assert_eq!(s.tag().parse::<Space>().unwrap(), s);
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(json, format!("\"{}\"", s.tag()));
    }
    assert!("X".parse::<Space>().is_err());
}

#[test]
fn norm_requests_validate_exponents() {
    let ts = seq("const:1");
    assert!(NormRequest::new(Space::F, f64::INFINITY, 2.0, ts.clone()).validate().is_err());
    assert!(NormRequest::new(Space::FInf, 2.0, f64::INFINITY, ts.clone()).validate().is_err());
    assert!(NormRequest::new(Space::B, 0.0, 2.0, ts.clone()).validate().is_err());
    assert!(NormRequest::new(Space::B, f64::INFINITY, f64::INFINITY, ts).validate().is_ok());
}

#[test]
fn dispatch_matches_direct_calls() {
    let pair = small_pair();
    let fam = CubeFamily::new(-3, 5, true);
    let dict = TestFunctionDictionary::standard(1).unwrap().truncated(2);
    let ctx = NormContext { pair: &pair, family: &fam, dictionary: &dict };
    let corpus = Corpus::for_pair(&pair, 1, 4).unwrap();
    let f = &corpus.members[0].f;
    let ts = seq("pow:0.3");
    for space in Space::ALL {
        let rec = compute_norm(f, &NormRequest::new(space, 2.0, 2.0, ts.clone()), &ctx).unwrap();
        assert!(rec.value.is_finite() && rec.value > 0.0, "{space}: {}", rec.value);
        assert_eq!(rec.levels, (-3, 5));
    }
    let rec = compute_norm(f, &NormRequest::new(Space::B, 2.0, 2.0, ts.clone()), &ctx).unwrap();
    assert_eq!(rec.value, besov_norm(f, &pair, &ts, 2.0, 2.0).unwrap());
}
