use std::path::PathBuf;

use cavity_relax_cli::config::{ConfigFile, Cutoff, Grid, Overrides, Range, Scenario, ScenarioConfig, Spacing};
use cavity_relax_cli::error::CliError;
use cavity_relax_cli::output::{columns, schema_markdown, Cell, Table};
use proptest::prelude::*;

fn file(json: &str) -> ConfigFile {
    serde_json::from_str(json).unwrap()
}

#[test]
fn flags_override_file_and_file_overrides_defaults() {
    let f = file(r#"{"scenario": "gap-coherent", "cutoff": 12, "output": "from-file", "params": {"g0": [0.3]}}"#);
    let c = ScenarioConfig::resolve(Some(f), &Overrides::default()).unwrap();
    assert_eq!(c.cutoff, Cutoff::Fixed(12));
    assert_eq!(c.output, PathBuf::from("from-file"));
    assert_eq!(c.params.g0, Range::List(vec![0.3]));
    assert_eq!(c.params.eps, ScenarioConfig::defaults(Scenario::GapCoherent).params.eps);

    let f = file(r#"{"scenario": "gap-coherent", "cutoff": 12, "output": "from-file"}"#);
    let flags = Overrides {
        scenario: Some(Scenario::MiCoherent),
        cutoff: Some(Cutoff::Auto),
        output: Some("from-flag".into()),
        plot: true,
    };
    let c = ScenarioConfig::resolve(Some(f), &flags).unwrap();
    assert_eq!(c.scenario, Scenario::MiCoherent);
    assert_eq!(c.cutoff, Cutoff::Auto);
    assert_eq!(c.output, PathBuf::from("from-flag"));
    assert!(c.plot);
}

#[test]
fn scenario_is_required() {
    let err = ScenarioConfig::resolve(None, &Overrides::default()).unwrap_err();
    assert!(matches!(err, CliError::Usage(_)));
    assert_eq!(err.exit_code(), 64);
}

#[test]
fn unknown_scenario_is_a_usage_error() {
    let err = "gap".parse::<Scenario>().unwrap_err();
    assert_eq!(err.exit_code(), 64);
    for s in Scenario::ALL {
        assert_eq!(s.name().parse::<Scenario>().unwrap(), s);
    }
}

#[test]
fn cutoff_parses_auto_and_positive_integers() {
    assert_eq!("auto".parse::<Cutoff>().unwrap(), Cutoff::Auto);
    assert_eq!("8".parse::<Cutoff>().unwrap(), Cutoff::Fixed(8));
    assert!("0".parse::<Cutoff>().is_err());
    assert!("many".parse::<Cutoff>().is_err());
    assert_eq!(file(r#"{"cutoff": "auto"}"#).cutoff, Some(Cutoff::Auto));
    assert!(serde_json::from_str::<ConfigFile>(r#"{"cutoff": 0}"#).is_err());
}

#[test]
fn invalid_configs_are_rejected() {
    let bad = [
        r#"{"scenario": "gap-coherent", "params": {"g0": []}}"#,
        r#"{"scenario": "gap-coherent", "params": {"g0": -1.0}}"#,
        r#"{"scenario": "mi-coherent", "time_grid": {"t_max": 0.0, "points": 10}}"#,
        r#"{"scenario": "mi-coherent", "time_grid": {"t_max": 10.0, "points": 1}}"#,
        r#"{"scenario": "mi-coherent", "time_grid": {"t_max": 10.0, "points": 5, "t_min": 20.0}}"#,
        r#"{"scenario": "gap-coherent", "params": {"eps": {"from": 0.0, "to": 10.0, "points": 3}}}"#,
    ];
    for json in bad {
        let err = ScenarioConfig::resolve(Some(file(json)), &Overrides::default()).unwrap_err();
        assert_eq!(err.exit_code(), 2, "{json}: {err}");
    }
    assert!(serde_json::from_str::<ConfigFile>(r#"{"scenario": "gap-coherent", "colour": 1}"#).is_err());
}

#[test]
fn ranges_expand_to_values() {
    let g = Range::Grid(Grid { from: 1.0, to: 1000.0, points: 4, spacing: Spacing::Log });
    let v = g.values().unwrap();
    for (a, b) in v.iter().zip([1.0, 10.0, 100.0, 1000.0]) {
        assert!((a - b).abs() <= 1e-12 * b);
    }
    let lin = Range::Grid(Grid { from: 0.0, to: 1.0, points: 3, spacing: Spacing::Linear });
    assert_eq!(lin.values().unwrap(), vec![0.0, 0.5, 1.0]);
    assert_eq!(Range::Value(2.0).values().unwrap(), vec![2.0]);
}

#[test]
fn points_are_sorted_by_parameter_value() {
    let c = ScenarioConfig::defaults(Scenario::RealDetector);
    let gammas: Vec<f64> = c.points().unwrap().iter().map(|p| p.gamma).collect();
    assert_eq!(gammas, vec![0.0, 1e-5, 1e-4, 1e-3]);
}

#[test]
fn every_default_config_is_valid() {
    for s in Scenario::ALL {
        let c = ScenarioConfig::defaults(s);
        c.validate().unwrap();
        assert!(!c.points().unwrap().is_empty());
    }
}

#[test]
fn csv_header_names_scenario_units_and_columns() {
    let mut t = Table::new(Scenario::Verify);
    t.push(vec![Cell::Int(1), true.into(), 0.5.into(), f64::NAN.into()]);
    let csv = t.to_csv();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "# scenario: verify");
    assert!(lines[1].starts_with("# units:"));
    assert_eq!(lines[2], "# columns: criterion,passed,metric,bound");
    assert_eq!(lines[3], "1,1,5.0000000000000000e-1,nan");
}

#[test]
fn every_scenario_table_starts_with_the_parameters() {
    for s in Scenario::ALL.into_iter().filter(|s| *s != Scenario::Verify) {
        let names: Vec<&str> = columns(s).iter().map(|c| c.name).collect();
        assert_eq!(&names[..5], ["g0", "eps", "n_th", "gamma", "cutoff"]);
    }
}

#[test]
fn repository_schema_is_current() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/SCHEMA.md");
    let on_disk = std::fs::read_to_string(path).unwrap();
    assert_eq!(on_disk, schema_markdown(), "SCHEMA.md is stale; copy the one written into any output directory");
}

proptest! {
    #[test]
    fn floats_round_trip_through_csv(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
        let mut t = Table::new(Scenario::Verify);
        t.push(vec![Cell::Int(0), false.into(), x.into(), 0.0.into()]);
        let csv = t.to_csv();
        let field = csv.lines().nth(3).unwrap().split(',').nth(2).unwrap().to_string();
        prop_assert_eq!(field.parse::<f64>().unwrap().to_bits(), x.to_bits());
    }
}
