//! Cross-module harness behaviour: cached reruns, failure recording,
//! and report file emission.

use simscreen::harness::{
    emit_report_files, run_experiment, AgentConfig, BaseModelConfig, DataConfig, ExperimentConfig,
    ExplainerConfig, GeneratorConfig, Report, Sweep, SweepAxis, UseCaseConfig,
};
use simscreen::usecase::bugs::BugKind;
use simscreen::usecase::types::ExplanationSetting;

fn tiny_counterfactual(cache: Option<std::path::PathBuf>) -> ExperimentConfig {
    ExperimentConfig {
        use_case: UseCaseConfig::Counterfactual,
        explanation_settings: vec![ExplanationSetting::Surrogate, ExplanationSetting::Baseline],
        sweep: Sweep {
            axis: SweepAxis::TrainSize,
            values: vec![4.0, 8.0],
        },
        seeds: vec![1, 2],
        data: DataConfig::default(),
        generator: GeneratorConfig {
            n_test: Some(8),
            base_train_size: 250,
            ..Default::default()
        },
        base_model: BaseModelConfig {
            gbm_trees: 20,
            ..Default::default()
        },
        explainer: ExplainerConfig {
            lime_samples: 120,
            ..Default::default()
        },
        agent: AgentConfig {
            epochs: Some(6),
            ..Default::default()
        },
        cache_dir: cache,
        output_dir: None,
    }
}

#[test]
fn warm_cache_rerun_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny_counterfactual(Some(dir.path().to_path_buf()));
    let cold = run_experiment(&cfg).unwrap();
    assert!(
        dir.path().join("datasets").read_dir().unwrap().count() > 0,
        "expected cached datasets"
    );
    let warm = run_experiment(&cfg).unwrap();
    assert_eq!(cold.to_csv(), warm.to_csv());
    assert_eq!(cold.to_table_text(), warm.to_table_text());
    assert_eq!(
        serde_json::to_string(&cold).unwrap(),
        serde_json::to_string(&warm).unwrap()
    );
}

#[test]
fn failed_cells_are_recorded_not_fatal() {
    let mut cfg = tiny_counterfactual(None);
    cfg.use_case = UseCaseConfig::DataBugs {
        bug: BugKind::RedundantFeature {
            strength: 0.5,
            source: "no-such-feature".into(),
        },
    };
    cfg.explanation_settings = vec![ExplanationSetting::Baseline];
    cfg.sweep = Sweep {
        axis: SweepAxis::SetSize,
        values: vec![1.0],
    };
    cfg.data.synthetic_rows = 5000;
    let report = run_experiment(&cfg).unwrap();
    assert!(report.rows.is_empty());
    assert_eq!(report.errors.len(), 2, "one failed cell per seed");
    assert!(report.errors[0].message.contains("no-such-feature"));
}

#[test]
fn grid_cell_counts_match_the_plan() {
    // 2 settings x sweep {4, 8} x 2 seeds -> 4 rows, 2 per-seed
    // accuracies each
    let cfg = tiny_counterfactual(None);
    let report = run_experiment(&cfg).unwrap();
    assert_eq!(report.rows.len(), 4);
    for row in &report.rows {
        assert_eq!(row.seed_accuracies.len(), 2);
        let mean = row.seed_accuracies.iter().sum::<f64>() / 2.0;
        assert!((row.mean - mean).abs() < 1e-12);
    }
}

#[test]
fn report_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny_counterfactual(None);
    let report = run_experiment(&cfg).unwrap();
    emit_report_files(&report, dir.path()).unwrap();
    let csv = std::fs::read_to_string(dir.path().join("report.csv")).unwrap();
    let rows = Report::from_csv(&csv).unwrap();
    assert_eq!(rows, report.rows);
    let json = std::fs::read_to_string(dir.path().join("report.json")).unwrap();
    let back: Report = serde_json::from_str(&json).unwrap();
    assert_eq!(back.rows, report.rows);
    assert_eq!(back.fingerprint, report.fingerprint);
}
