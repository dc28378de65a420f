use std::path::PathBuf;

use fiberamp::config::{load_config, SimConfig};
use fiberamp::{presets, ConfigError, Config};

fn config_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

#[test]
fn reference_files_match_presets() {
    let tm: Config = load_config(config_path("tm_nufern.json")).unwrap();
    assert_eq!(tm, presets::tm_nufern());
    let yb: Config = load_config(config_path("yb_nufern.json")).unwrap();
    assert_eq!(yb, presets::yb_nufern());
}

#[test]
fn serialization_round_trip_is_exact() {
    for cfg in [presets::tm_nufern::<f64>(), presets::yb_nufern()] {
        let back: Config = SimConfig::from_json_str(&cfg.to_json_string()).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.hash(), cfg.hash());
    }
}

#[test]
fn cladding_index_identity() {
    for cfg in [presets::tm_nufern::<f64>(), presets::yb_nufern()] {
        let f = &cfg.fiber;
        let lhs = f.n_clad().powi(2) + f.numerical_aperture.powi(2);
        assert!((lhs - f.n_core.powi(2)).abs() / f.n_core.powi(2) < 1e-12);
    }
}

#[test]
fn table_values_land_in_fields() {
    let tm = presets::tm_nufern::<f64>();
    assert_eq!(tm.fiber.r_core, 1.25e-5);
    assert_eq!(tm.fiber.numerical_aperture, 0.1);
    assert_eq!(tm.fiber.n_core, 1.439994);
    assert_eq!(tm.fiber.lambda_s, 2110e-9);
    assert_eq!(tm.launch.pump_power, 1100.0);
    assert_eq!(tm.launch.signal_power, 30.0);
    let yb = presets::yb_nufern::<f64>();
    assert_eq!(yb.launch.fractions.len(), 4);
}

#[test]
fn load_errors_name_the_problem() {
    let missing = load_config::<f64>("/nonexistent/fiber.json").unwrap_err();
    assert!(matches!(missing, ConfigError::Io { .. }));
    assert!(missing.to_string().contains("/nonexistent/fiber.json"));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ \"fiber\": ").unwrap();
    assert!(matches!(load_config::<f64>(&bad).unwrap_err(), ConfigError::Parse { .. }));

    let mut cfg = presets::tm_nufern::<f64>();
    cfg.fiber.numerical_aperture = 2.0;
    let invalid = dir.path().join("invalid.json");
    std::fs::write(&invalid, cfg.to_json_string()).unwrap();
    assert!(matches!(load_config::<f64>(&invalid).unwrap_err(), ConfigError::Invalid(_)));

    let mut cfg = presets::tm_nufern::<f64>();
    cfg.launch.fractions = vec![0.7, 0.7];
    std::fs::write(&invalid, cfg.to_json_string()).unwrap();
    assert!(load_config::<f64>(&invalid).is_err());
}
