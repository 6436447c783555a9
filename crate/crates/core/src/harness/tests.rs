use super::*;
use std::f64::consts::LN_2;

#[test]
fn ratios_parse_and_check_integrality() {
    let r = parse_ratios("1/2, 1/4,1/4").unwrap();
    assert_eq!(r[0], Ratio { num: 1, den: 2 });
    assert_eq!(r[1].of(12), Some(3));
    assert_eq!(r[1].of(10), None);
    assert!(parse_ratios("1/3,1/3").is_err());
    assert!("0/3".parse::<Ratio>().is_err());
    assert_eq!("2/6".parse::<Ratio>().unwrap().to_string(), "1/3");
}

#[test]
fn configuration_errors() {
    let mut c = ExperimentConfig::new(ModelSpec::Ising);
    c.sizes.clear();
    assert!(matches!(run_experiment(&c), Err(Error::Config(_))));
    c.sizes = vec![12, 9];
    assert!(c.validate().is_err());
    c.sizes = vec![10];
    assert!(c.validate().is_err());
    c.sizes = vec![9];
    c.ratios = parse_ratios("1/3,1/3,1/2").unwrap();
    assert!(c.validate().is_err());
    c.ratios = equal_thirds();
    c.backend = Backend::Import;
    assert!(c.validate().is_err());
}

#[test]
fn ghz_point() {
    let c = ExperimentConfig::new(ModelSpec::Ghz);
    let rec = run_point(&c, 9);
    assert_eq!(rec.status, Status::Converged, "{:?}", rec.error);
    let m = rec.measures.unwrap();
    assert!((m.g - LN_2).abs() < 1e-4);
    assert!(m.h.abs() < 1e-8);
    rec.check_bookkeeping().unwrap();
    let mut mps = c.clone();
    mps.backend = Backend::Mps;
    let m2 = run_point(&mps, 9).measures.unwrap();
    assert!((m2.g - LN_2).abs() < 1e-4);
}

#[test]
fn fixed_point_mps_point() {
    let mut c = ExperimentConfig::new(ModelSpec::FixedPoint { blocks: 1 });
    c.backend = Backend::Mps;
    let rec = run_point(&c, 9);
    let m = rec.measures.expect("measured");
    assert!(m.g.abs() < 1e-5, "g = {}", m.g);
    assert!(m.h.abs() < 1e-9, "h = {}", m.h);
}

#[test]
fn failures_become_records() {
    let mut c = ExperimentConfig::new(ModelSpec::W);
    c.backend = Backend::Mps;
    let rec = run_point(&c, 9);
    assert_eq!(rec.status, Status::Failed);
    assert!(rec.error.is_some());
    assert!(rec.measures.is_none());
}

#[test]
fn records_round_trip_through_jsonl() {
    let mut c = ExperimentConfig::new(ModelSpec::Ising);
    c.sizes = vec![6, 9];
    let out = run_experiment(&c).unwrap();
    let text = records_to_jsonl(&out.records).unwrap();
    let back = records_from_jsonl(&text).unwrap();
    assert_eq!(back.len(), 2);
    for (a, b) in back.iter().zip(&out.records) {
        assert_eq!(a.measures, b.measures);
        a.check_bookkeeping().unwrap();
    }
    assert!(!text.contains("wall_time"));
    let csv = records_to_csv(&out.records);
    assert!(csv.starts_with("N,g,h,I\n6,"));
    // two sizes cannot be extrapolated
    assert!(out.fits.g.is_none() && !out.fits.errors.is_empty());
}

#[test]
fn bond_schedule() {
    assert_eq!(scheduled_bond_dim(24), 12);
    assert_eq!(scheduled_bond_dim(84), 26);
    assert_eq!(scheduled_bond_dim(6), 8);
}
