//! Small end-to-end runs of each experiment driver.

use std::fs;

use poro_cli::config::{parse_config, Experiment, RunConfig};
use poro_cli::experiments::{run_experiment, tables, write_outputs, Outcome, RunError};

fn small(experiment: Experiment, overrides: &[(&str, &str)]) -> RunConfig {
    let mut cfg = RunConfig::preset(experiment);
    for (k, v) in overrides {
        cfg.set(k, v).unwrap();
    }
    cfg
}

#[test]
fn temporal_study_has_the_expected_columns_and_rates() {
    let cfg = small(Experiment::ConvergeTime, &[("n", "4"), ("k", "2"), ("l", "2"), ("dt_ladder", "0.5, 0.25")]);
    let out = run_experiment(&cfg).unwrap();
    let t = &tables(&cfg, &out).unwrap()[0].1;
    let cols = ["dt", "eu_H1", "rate_u", "exi_L2", "rate_xi", "ephi_H1", "rate_phi", "epsi_H1", "rate_psi"];
    assert_eq!(t.columns, cols);
    assert_eq!(t.rows.len(), 2);
    assert_eq!(t.column("dt").unwrap(), vec![Some(0.5), Some(0.25)]);
    assert_eq!(t.rows[0][2], None);
    assert!(t.rows[1][2].is_some());
}

#[test]
fn iteration_table_columns() {
    let cfg = small(Experiment::Iterate, &[("n", "4"), ("steps", "4"), ("max_iter", "6"), ("tol", "0")]);
    let Outcome::Iteration(s) = run_experiment(&cfg).unwrap() else { panic!("wrong outcome") };
    let t = s.table();
    assert_eq!(t.columns, ["iter", "rel_err_u", "rel_err_xi", "rel_err_phi", "rel_err_psi", "contraction_ratio"]);
    assert_eq!(t.rows.len(), 6);
    assert_eq!(t.rows[0][5], None);
    assert!(t.rows[5][5].is_some());
}

#[test]
fn zero_data_single_run_gives_zero_fields() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().to_str().unwrap();
    let cfg = small(Experiment::SingleRun, &[("problem", "homogeneous"), ("n", "3"), ("steps", "2"), ("output_dir", out_dir)]);
    let out = run_experiment(&cfg).unwrap();
    let written = write_outputs(&cfg, &out).unwrap();
    let names: Vec<_> = written.iter().map(|p| p.file_name().unwrap().to_str().unwrap().to_string()).collect();
    assert_eq!(names, ["history.csv", "fields.csv", "final.vtk"]);

    let fields = poro_cli::table::ResultTable::from_csv_str(&fs::read_to_string(&written[1]).unwrap()).unwrap();
    assert_eq!(fields.rows.len(), 16);
    for row in &fields.rows {
        assert!(row[2..].iter().all(|v| *v == Some(0.0)));
    }
    let meta = fs::read_to_string(dir.path().join("history.csv.meta")).unwrap();
    assert_eq!(parse_config(&meta).unwrap(), cfg);
}

#[test]
fn invalid_configuration_stops_before_solving() {
    let mut cfg = RunConfig::preset(Experiment::SingleRun);
    cfg.samples = 1;
    assert!(matches!(run_experiment(&cfg), Err(RunError::Config(_))));
}
