use std::fmt::Write;

use super::{EvaluationReport, MetricsReport, Protocol};

const SCALE: u64 = 1_000_000;

/// Correct and incorrect percentages to four decimals. Both are derived
/// from one rounded integer so they always add up to exactly 100.
pub fn format_percentages(correct: u64, total: u64) -> (String, String) {
    if total == 0 {
        return ("undefined".into(), "undefined".into());
    }
    let scaled = (2 * correct * SCALE + total) / (2 * total);
    let render = |v: u64| format!("{}.{:04}", v / 10_000, v % 10_000);
    (render(scaled), render(SCALE - scaled))
}

fn fixed4(v: f64) -> String {
    let s = format!("{v:.4}");
    if s == "-0.0000" {
        "0.0000".into()
    } else {
        s
    }
}

fn percent(v: Option<f64>) -> String {
    v.map_or_else(|| "undefined".into(), |v| format!("{} %", fixed4(v)))
}

/// The summary block: six metric rows and the instance total, tab separated.
pub fn format_metrics(m: &MetricsReport) -> String {
    let (ok, bad) = format_percentages(m.correct, m.total);
    let mut out = String::new();
    let _ = writeln!(out, "Correctly Classified Instances\t{}\t{ok} %", m.correct);
    let _ = writeln!(
        out,
        "Incorrectly Classified Instances\t{}\t{bad} %",
        m.total - m.correct
    );
    let _ = writeln!(out, "Kappa statistic\t{}", fixed4(m.kappa));
    let _ = writeln!(out, "Mean absolute error\t{}", fixed4(m.mae));
    let _ = writeln!(out, "Root mean squared error\t{}", fixed4(m.rmse));
    let _ = writeln!(out, "Relative absolute error\t{}", percent(m.rae_pct));
    let _ = writeln!(out, "Root relative squared error\t{}", percent(m.rrse_pct));
    let _ = writeln!(out, "Total Number of Instances\t{}", m.total);
    out
}

fn protocol(r: &EvaluationReport) -> String {
    match r.header.protocol {
        Protocol::Resubstitution if r.header.contaminated => {
            "resubstitution (contaminated: training records are evaluated)".into()
        }
        Protocol::Resubstitution => "resubstitution".into(),
        Protocol::Holdout => "holdout".into(),
        Protocol::KFold { k, seed } => format!("{k}-fold cross-validation (seed {seed})"),
    }
}

fn ratio(v: Option<f64>) -> String {
    v.map_or_else(|| "undefined".into(), fixed4)
}

/// Full plain-text report: header, summary block, multi-label block and,
/// for k-fold runs, one accuracy line per fold. The trigger rate line is
/// only present for cascade models.
pub fn format_report(r: &EvaluationReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "Model\t{}", r.header.model);
    let _ = writeln!(out, "Mode\t{}", r.header.mode.as_str());
    let _ = writeln!(out, "Protocol\t{}", protocol(r));
    out.push('\n');
    out.push_str(&format_metrics(&r.metrics));
    out.push('\n');
    let ml = &r.multilabel;
    let _ = writeln!(out, "Subset accuracy\t{} %", fixed4(ml.subset_accuracy_pct));
    let _ = writeln!(out, "Hamming loss\t{}", fixed4(ml.hamming_loss));
    if let Some(rate) = ml.trigger_rate {
        let _ = writeln!(out, "Cascade trigger rate\t{}", fixed4(rate));
    }
    out.push('\n');
    let _ = writeln!(out, "Code\tPrecision\tRecall\tSupport");
    for s in &ml.per_label {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}",
            s.code,
            ratio(s.precision),
            ratio(s.recall),
            s.support
        );
    }
    if !r.folds.is_empty() {
        out.push('\n');
        for (i, f) in r.folds.iter().enumerate() {
            let (ok, _) = format_percentages(f.correct, f.total);
            let _ = writeln!(out, "Fold {}\t{}/{}\t{ok} %", i + 1, f.correct, f.total);
        }
    }
    out
}
