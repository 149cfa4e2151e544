use proptest::prelude::*;
use simrsf::{load_csv, CsvSchema, Dataset, SurvivalRecord};

fn record() -> impl Strategy<Value = SurvivalRecord> {
    (0.0f64..1e6, any::<bool>(), prop::collection::vec(-1e9f64..1e9, 3)).prop_map(|(time, event, covariates)| {
        SurvivalRecord {
            time,
            event,
            covariates,
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn csv_round_trip_is_exact(records in prop::collection::vec(record(), 1..40)) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        let names = vec!["a".to_string(), "b".into(), "c".into()];
        let ids: Vec<String> = (0..records.len()).map(|i| format!("s{i}")).collect();
        let data = Dataset::with_ids(records, names, ids).unwrap();
        data.write_csv(&path).unwrap();
        let schema = CsvSchema::infer(&path, &[]).unwrap();
        let back = load_csv(&path, &schema).unwrap();
        prop_assert_eq!(back.records(), data.records());
        prop_assert_eq!(back.feature_names(), data.feature_names());
        prop_assert_eq!(back.ids(), data.ids());
        let again = dir.path().join("e.csv");
        back.write_csv(&again).unwrap();
        prop_assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&again).unwrap());
    }
}

#[test]
fn column_order_and_missing_id() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.csv");
    std::fs::write(&path, "x,event,time\n0.5,1,3\n1.5,0,4\n").unwrap();
    let d = load_csv(&path, &CsvSchema::infer(&path, &[]).unwrap()).unwrap();
    assert_eq!(d.ids(), ["0", "1"]);
    assert_eq!(d.record(1).time, 4.0);
    assert!(!d.record(1).event);
    assert_eq!(d.record(0).covariates, [0.5]);
}

#[test]
fn bad_event_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.csv");
    std::fs::write(&path, "time,event,x\n1,1,0\n2,yes,1\n").unwrap();
    let err = load_csv(&path, &CsvSchema::infer(&path, &[]).unwrap()).unwrap_err();
    assert!(err.to_string().contains("invalid event indicator"), "{err}");
}
