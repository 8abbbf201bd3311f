use granot::emit::{series_csv, series_svg, SERIES_CSV_HEADER};
use granot::report::SeriesRow;
use proptest::prelude::*;

fn row() -> impl Strategy<Value = SeriesRow> {
    (0.0..100.0f64, 0.0..10.0f64, 0.0..10.0f64, 1e-6..1e3f64, 1e-6..1e3f64, 0.0..1e6f64, 0.0..1e6f64).prop_map(
        |(tau, w2, bound, theta_a, theta_b, m4_a, m4_b)| SeriesRow { tau, w2, bound, theta_a, theta_b, m4_a, m4_b },
    )
}

proptest! {
    #[test]
    fn csv_values_parse_back_exactly(rows in prop::collection::vec(row(), 0..20)) {
        let csv = series_csv(&rows);
        let mut lines = csv.lines();
        prop_assert_eq!(lines.next(), Some(SERIES_CSV_HEADER));
        let parsed: Vec<SeriesRow> = lines
            .map(|l| {
                let v: Vec<f64> = l.split(',').map(|s| s.parse().unwrap()).collect();
                SeriesRow { tau: v[0], w2: v[1], bound: v[2], theta_a: v[3], theta_b: v[4], m4_a: v[5], m4_b: v[6] }
            })
            .collect();
        prop_assert_eq!(parsed, rows);
    }

    #[test]
    fn svg_points_stay_in_the_canvas(rows in prop::collection::vec(row(), 1..20)) {
        let svg = series_svg("t", &rows);
        for poly in svg.split("points=\"").skip(1) {
            let pts = poly.split('"').next().unwrap();
            for p in pts.split_whitespace() {
                let (x, y) = p.split_once(',').unwrap();
                let (x, y): (f64, f64) = (x.parse().unwrap(), y.parse().unwrap());
                prop_assert!((0.0..=640.0).contains(&x) && (0.0..=400.0).contains(&y), "{p}");
            }
        }
    }
}
