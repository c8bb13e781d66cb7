use chrono::{TimeZone, Utc};
use proptest::prelude::*;

use soilsense::measurement::{method_agreement, spread, AgreementRow, FieldValue, Parameter};
use soilsense::suitability::Interval;
use soilsense::{
    analyze, cross_section_area, fit_exponential, fixtures, resistivity, ExponentialModel, ModelBank,
    OptimumRanges, PointSelection, SoilReading,
};

#[test]
fn table_resistivities_reconstruct() {
    let rows = fixtures::calibration();
    assert_eq!(rows.len(), 66);
    for r in &rows {
        let rho = resistivity(r.resistance_kohm, fixtures::TABLE_AREA_M2, fixtures::TABLE_SPACING_M).unwrap();
        let rel = (rho - r.resistivity_kohm_m).abs() / r.resistivity_kohm_m;
        assert!(rel <= 1e-9, "{r:?} -> {rho}");
    }
}

#[test]
fn fitted_bank_round_trips_through_inversion() {
    let bank = ModelBank::fit(&fixtures::calibration(), None, PointSelection::default()).unwrap();
    assert_eq!(bank.len(), 6);
    for m in bank.models() {
        for k in 0..=100 {
            let x = k as f64;
            let back = m.invert_salinity(m.predict_resistivity(x).unwrap()).unwrap().salinity_pct;
            assert!((back - x).abs() <= 1e-9 * x.max(1.0), "{} at {x}: {back}", m.moisture_pct);
        }
    }
}

fn reading(ph: f64, moisture: f64, temperature: f64) -> SoilReading {
    SoilReading::new(moisture, ph, temperature, Utc.timestamp_opt(0, 0).unwrap()).unwrap()
}

fn interval() -> impl Strategy<Value = Interval> {
    (0.0f64..50.0, 0.0f64..50.0).prop_map(|(a, w)| Interval::new(a, a + w))
}

proptest! {
    #[test]
    fn resistivity_is_linear_in_resistance(r in 0.0f64..1e4, k in 0.0f64..100.0, a in 1e-4f64..1.0, l in 1e-3f64..1.0) {
        let base = resistivity(r, a, l).unwrap();
        let scaled = resistivity(k * r, a, l).unwrap();
        prop_assert!((scaled - k * base).abs() <= 1e-12 * (k * base).max(1e-300));
    }

    #[test]
    fn area_grows_with_radius(r1 in 1e-4f64..10.0, dr in 1e-6f64..10.0) {
        prop_assert!(cross_section_area(r1 + dr).unwrap() > cross_section_area(r1).unwrap());
    }

    #[test]
    fn spread_ignores_order(mut v in proptest::collection::vec(-100.0f64..100.0, 1..8), seed: u64) {
        let s = spread(&v);
        prop_assert!(s >= 0.0);
        let n = v.len();
        v.rotate_left((seed % n as u64) as usize);
        v.reverse();
        prop_assert_eq!(spread(&v), s);
    }

    #[test]
    fn agreement_spread_is_symmetric_in_methods(f in 0.0f64..14.0, a in 0.0f64..14.0, b in 0.0f64..14.0) {
        let row = |field: f64, lab: f64, iot: f64| AgreementRow {
            parameter: Parameter::Ph,
            sample_label: "S".into(),
            field_value: FieldValue::Scalar(field),
            lab_value: lab,
            iot_value: iot,
        };
        let one = method_agreement(&[row(f, a, b)]).unwrap();
        let two = method_agreement(&[row(b, f, a)]).unwrap();
        prop_assert_eq!(one.max_spread[&Parameter::Ph], two.max_spread[&Parameter::Ph]);
    }

    #[test]
    fn predict_invert_round_trip(a in 1e-3f64..100.0, b in 1e-4f64..0.05, x in 0.0f64..100.0) {
        let m = ExponentialModel::new(a, b, 5.0).unwrap();
        let y = m.predict_resistivity(x).unwrap();
        let back = m.invert_salinity(y).unwrap().salinity_pct;
        prop_assert!((back - x).abs() <= 1e-9 * x.max(1.0));
    }

    #[test]
    fn model_is_monotone(a in 1e-3f64..100.0, b in 1e-4f64..0.05, x1 in 0.0f64..100.0, dx in 1e-3f64..10.0) {
        let m = ExponentialModel::new(a, b, 5.0).unwrap();
        let (y1, y2) = (m.predict_resistivity(x1).unwrap(), m.predict_resistivity(x1 + dx).unwrap());
        prop_assert!(y2 < y1);
        prop_assert!(m.invert_salinity(y2).unwrap().salinity_pct > m.invert_salinity(y1).unwrap().salinity_pct);
    }

    #[test]
    fn fit_recovers_exact_exponentials(a in 1e-2f64..50.0, b in 1e-3f64..0.03, scale in 0.1f64..10.0) {
        let pts: Vec<(f64, f64)> = (0..=10).map(|k| {
            let x = 10.0 * k as f64;
            (x, a * (-b * x).exp())
        }).collect();
        let m = fit_exponential(&pts, 5.0).unwrap();
        prop_assert!((m.amplitude - a).abs() <= 1e-9 * a);
        prop_assert!((m.decay - b).abs() <= 1e-9 * b);
        // refitting the model's own curve gives the same model
        let again: Vec<(f64, f64)> = pts.iter().map(|&(x, _)| (x, m.predict_resistivity(x).unwrap())).collect();
        let m2 = fit_exponential(&again, 5.0).unwrap();
        prop_assert!((m2.amplitude - m.amplitude).abs() <= 1e-9 * m.amplitude);
        // scaling resistivity scales A and leaves B alone
        let scaled: Vec<(f64, f64)> = pts.iter().map(|&(x, y)| (x, scale * y)).collect();
        let ms = fit_exponential(&scaled, 5.0).unwrap();
        prop_assert!((ms.amplitude - scale * m.amplitude).abs() <= 1e-9 * scale * m.amplitude);
        prop_assert!((ms.decay - m.decay).abs() <= 1e-9 * m.decay);
    }

    #[test]
    fn widening_never_adds_problems(
        ph in 0.0f64..14.0, moisture in 0.0f64..100.0, temp in -10.0f64..50.0,
        r_ph in interval(), r_m in interval(), r_t in interval(),
        grow in proptest::collection::vec(0.0f64..20.0, 6),
    ) {
        let ranges = OptimumRanges { ph: r_ph, moisture_pct: r_m, temperature_c: r_t };
        let wider = OptimumRanges {
            ph: Interval::new(r_ph.min - grow[0], r_ph.max + grow[1]),
            moisture_pct: Interval::new(r_m.min - grow[2], r_m.max + grow[3]),
            temperature_c: Interval::new(r_t.min - grow[4], r_t.max + grow[5]),
        };
        let r = reading(ph, moisture, temp);
        let narrow = analyze(&r, &ranges);
        let wide = analyze(&r, &wider);
        prop_assert!(narrow.problems.len() <= 3);
        prop_assert!(wide.problems.iter().all(|p| narrow.problems.contains(p)));
        prop_assert_eq!(narrow.suitable, narrow.problems.is_empty());
    }
}
