use std::f64::consts::PI;

use proptest::prelude::*;
use radres::formats::{read_points_csv, write_trace_csv};
use radres::hulls::{parse_angle, parse_hull};
use radres_core::C;

proptest! {
    #[test]
    fn pi_fractions_parse(k in 1u32..12, m in 1u32..12) {
        let v = k as f64 * PI / m as f64;
        for text in [format!("{k}pi/{m}"), format!("{k}*pi/{m}"), format!(" {k} * pi / {m} ")] {
            prop_assert!((parse_angle(&text).unwrap() - v).abs() < 1e-15 * v.max(1.0));
        }
    }

    #[test]
    fn plain_numbers_parse(x in -1e6..1e6f64) {
        prop_assert_eq!(parse_angle(&format!("{x}")).unwrap(), x);
    }

    #[test]
    fn traces_keep_twelve_digits(pts in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1..30)) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let points: Vec<C> = pts.iter().map(|&(a, b)| C::new(a, b)).collect();
        let times: Vec<f64> = (0..points.len()).map(|k| k as f64 * 1e-3).collect();
        write_trace_csv(std::fs::File::create(&path).unwrap(), &times, &points).unwrap();
        let back = read_points_csv(&path).unwrap();
        prop_assert_eq!(back.len(), points.len());
        for (p, q) in points.iter().zip(&back) {
            prop_assert!((p.re - q.re).abs() <= 5e-12 * p.re.abs() + 1e-300);
            prop_assert!((p.im - q.im).abs() <= 5e-12 * p.im.abs() + 1e-300);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn perfect_descriptors_carry_their_derivatives(theta in 0.2..(2.0 * PI - 0.2), t in 0.01..0.5f64) {
        let h = parse_hull(&format!("perfect:{theta},{t}")).unwrap();
        prop_assert!((h.derivatives.d0 - t.exp()).abs() < 1e-12 * t.exp());
        prop_assert!((h.derivatives.d1 - (-t / (1.0 - theta.cos())).exp()).abs() < 1e-5);
    }
}
