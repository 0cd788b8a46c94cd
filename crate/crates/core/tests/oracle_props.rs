use std::f64::consts::PI;
use std::path::PathBuf;

use fdtd25d::geometry::AreaFunction;
use fdtd25d::oracle::{
    chain_from_area_function, determinant, input_output_response, oracle_formants, Segment, SegmentChain,
};
use proptest::prelude::*;

const C: f64 = 350.0;
const RHO: f64 = 1.14;

fn fixture(name: &str) -> AreaFunction {
    AreaFunction::from_path(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)).unwrap()
}

/// Zeros of `cos a cos b − (A1/A2) sin a sin b` for two equal halves,
/// found by bisection on a fine bracket scan.
fn two_tube_roots(half: f64, ratio: f64, f_max: f64) -> Vec<f64> {
    let g = |f: f64| {
        let kl = 2.0 * PI * f / C * half;
        kl.cos() * kl.cos() - kl.sin() * kl.sin() / ratio
    };
    let mut roots = Vec::new();
    let mut lo = 1.0;
    while lo < f_max {
        let hi = lo + 1.0;
        if g(lo).signum() != g(hi).signum() {
            let (mut a, mut b) = (lo, hi);
            for _ in 0..80 {
                let m = 0.5 * (a + b);
                if g(a).signum() == g(m).signum() { a = m } else { b = m }
            }
            roots.push(0.5 * (a + b));
        }
        lo = hi;
    }
    roots
}

#[test]
fn two_tube_formants_match_the_closed_form() {
    let chain = chain_from_area_function(&fixture("two_tube.txt"), 0.5e-3, C, RHO).unwrap();
    let roots = two_tube_roots(0.0875, 3.0, 5000.0);
    assert!((roots[0] - C / (6.0 * 0.0875)).abs() < 1e-6);
    let found = oracle_formants(&chain, 5000.0, roots.len()).unwrap();
    assert_eq!(found.len(), roots.len());
    for (got, want) in found.frequencies.iter().zip(&roots) {
        // the fixture's 0.01 mm area ramp moves the roots by well under 1 Hz
        assert!((got - want).abs() < 1.0, "{got} vs {want}");
    }
    // dense sweep around F1
    let freqs: Vec<f64> = (0..2000).map(|k| 566.0 + 0.1 * k as f64).collect();
    let resp = input_output_response(&chain, &freqs).unwrap();
    let k = (0..resp.len()).max_by(|&a, &b| resp[a].total_cmp(&resp[b])).unwrap();
    assert!((freqs[k] - roots[0]).abs() <= 0.15, "{} vs {}", freqs[k], roots[0]);
}

#[test]
fn halving_segment_length_barely_moves_formants() {
    for name in ["two_tube.txt", "cosine_horn.txt"] {
        let af = fixture(name);
        let coarse = oracle_formants(&chain_from_area_function(&af, 0.5e-3, C, RHO).unwrap(), 5000.0, 4).unwrap();
        let fine = oracle_formants(&chain_from_area_function(&af, 0.25e-3, C, RHO).unwrap(), 5000.0, 4).unwrap();
        for (a, b) in coarse.frequencies.iter().zip(&fine.frequencies) {
            assert!((a - b).abs() / b < 0.005, "{name}: {a} vs {b}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn splitting_a_uniform_segment_changes_nothing(
        n in 2usize..40, length in 0.05f64..0.3, area in 1e-5f64..1e-3, f in 20.0f64..9000.0,
    ) {
        let whole = SegmentChain::new(vec![Segment { length, area }], C, RHO).unwrap();
        let parts = SegmentChain::new(vec![Segment { length: length / n as f64, area }; n], C, RHO).unwrap();
        let (a, b) = (whole.matrix(f), parts.matrix(f));
        let scale = a.iter().flatten().fold(0.0f64, |m, z| m.max(z.norm()));
        for r in 0..2 {
            for c in 0..2 {
                prop_assert!((a[r][c] - b[r][c]).norm() <= 1e-9 * scale);
            }
        }
    }

    #[test]
    fn lossless_chains_have_unit_determinant(
        areas in prop::collection::vec(1e-5f64..1e-3, 1..30), seg in 1e-3f64..1e-2, f in 20.0f64..9000.0,
    ) {
        let chain = SegmentChain::new(areas.iter().map(|&area| Segment { length: seg, area }).collect(), C, RHO).unwrap();
        let m = chain.matrix(f);
        let scale = m.iter().flatten().fold(1.0f64, |s, z| s.max(z.norm_sqr()));
        prop_assert!((determinant(&m) - 1.0).norm() <= 1e-10 * scale);
    }

    #[test]
    fn uniform_tube_resonates_at_odd_quarter_waves(length in 0.1f64..0.25, area in 1e-5f64..1e-3) {
        let af = AreaFunction::uniform(length, area).unwrap();
        let chain = chain_from_area_function(&af, 1e-3, C, RHO).unwrap();
        let found = oracle_formants(&chain, 5000.0, 3).unwrap();
        for (k, got) in found.frequencies.iter().enumerate() {
            let want = (2 * k + 1) as f64 * C / (4.0 * length);
            prop_assert!((got - want).abs() < 0.5, "{} vs {}", got, want);
        }
    }
}
