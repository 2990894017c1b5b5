//! Linear probes, metrics, fairness reports and the latent-size sweep.

mod metrics;
mod probe;
mod report;
mod sweep;

pub use metrics::{accuracy, auc, eod, mae, tpr, Eod, PositiveCounts};
pub use probe::{
    fit_linear_probe, fit_logistic_probe, LinearProbe, LogisticProbe, ProbeLabel, LOGISTIC_GRAD_TOL, LOGISTIC_LR,
    LOGISTIC_MAX_ITERS, RIDGE,
};
pub use report::{
    fairness_report, probe_report, AgeProbeMetrics, BinaryProbeMetrics, DatasetReport, EvalSettings, FairnessReport,
    GroupEod, ProbeReport, TaskMetrics, DECISION_THRESHOLD, REPORT_FORMAT_VERSION,
};
pub use sweep::{latent_sweep, latent_sweep_with, SweepResult, SweepRow};
