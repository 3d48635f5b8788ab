use langevin_homog::output::{emit_csv, SWEEP_CSV};
use langevin_homog::sweep::{summarize, Verdict};
use langevin_homog::{run_sweep, run_sweep_with, SweepConfig, SweepRow};
use std::sync::Mutex;

fn small(epsilons: &[f64]) -> SweepConfig {
    SweepConfig {
        epsilons: epsilons.to_vec(),
        n_pairs: 3,
        ..SweepConfig::default()
    }
}

#[test]
fn single_epsilon_gives_one_record() {
    let out = run_sweep(&small(&[0.4])).unwrap();
    assert_eq!(out.outcomes.len(), 1);
    let r = out.outcomes[0].row.record().unwrap();
    assert!(r.poisson_err_l2 > 0.0);
    assert!(r.errors_are_valid());
    assert_eq!(r.n_pairs(), 3);
    let checks = summarize(&out);
    let poisson = checks
        .iter()
        .find(|c| c.name == "poisson_l2_decay")
        .unwrap();
    assert_eq!(poisson.verdict, Verdict::Skipped);
}

#[test]
fn two_epsilons_decrease() {
    let out = run_sweep(&small(&[0.4, 0.2])).unwrap();
    let recs: Vec<_> = out.records().collect();
    assert_eq!(recs.len(), 2);
    assert!(recs[1].poisson_err_l2 < recs[0].poisson_err_l2);
    assert!(recs[1].corrector_err_h1 < recs[0].corrector_err_h1);
    for c in summarize(&out) {
        assert_ne!(c.verdict, Verdict::Fail, "{}", c.name);
    }
}

#[test]
fn serial_and_parallel_agree_bitwise() {
    let eps = [0.4, 0.3, 0.2, 0.1];
    let par = run_sweep(&SweepConfig {
        parallel: true,
        ..small(&eps)
    })
    .unwrap();
    let ser = run_sweep(&SweepConfig {
        parallel: false,
        ..small(&eps)
    })
    .unwrap();
    assert_eq!(par.outcomes, ser.outcomes);

    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    emit_csv(&par.rows(), &a).unwrap();
    emit_csv(&run_sweep(&small(&eps)).unwrap().rows(), &b).unwrap();
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn callback_sees_every_epsilon() {
    let seen = Mutex::new(Vec::new());
    let out = run_sweep_with(&small(&[0.4, 0.2, 0.1]), |o| {
        seen.lock().unwrap().push(o.row.epsilon())
    })
    .unwrap();
    let mut seen = seen.into_inner().unwrap();
    seen.sort_by(|a, b| b.total_cmp(a));
    assert_eq!(seen, vec![0.4, 0.2, 0.1]);
    let order: Vec<f64> = out.outcomes.iter().map(|o| o.row.epsilon()).collect();
    assert_eq!(order, vec![0.4, 0.2, 0.1]);
}

#[test]
fn failing_epsilon_leaves_marker_row() {
    // ε = 2 gives h = 4: three elements on [-5, 5], too few nodes for 5 pairs.
    let cfg = SweepConfig {
        epsilons: vec![2.0, 0.4],
        ..SweepConfig::default()
    };
    let out = run_sweep(&cfg).unwrap();
    assert!(out.has_failures());
    match &out.outcomes[0].row {
        SweepRow::Failed {
            epsilon,
            h,
            message,
        } => {
            assert_eq!((*epsilon, *h), (2.0, 4.0));
            assert!(!message.is_empty());
        }
        other => panic!("{other:?}"),
    }
    assert!(out.outcomes[1].row.record().is_some());
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join(SWEEP_CSV);
    emit_csv(&out.rows(), &p).unwrap();
    let back = langevin_homog::output::read_csv(&p).unwrap();
    assert_eq!(back[0], out.outcomes[0].row);
}

#[test]
fn invalid_config_is_rejected_before_running() {
    assert!(run_sweep(&small(&[0.1, 0.4])).is_err());
    let bad_model = SweepConfig {
        model: "unknown".into(),
        ..small(&[0.4])
    };
    assert!(run_sweep(&bad_model).is_err());
}
