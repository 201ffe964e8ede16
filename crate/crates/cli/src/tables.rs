//! Plain-text summary tables printed to stdout.

use faultsynth::fidelity::FidelityReport;
use faultsynth::tstr::TstrReport;

/// One row per compared model: average Wasserstein, MMD, and KS.
pub fn fidelity_table(label: &str, report: &FidelityReport) -> String {
    let mut s = String::new();
    s.push_str(&format!(
        "{:<24} {:>14} {:>12} {:>10}\n",
        "model", "Wasserstein", "MMD", "KS"
    ));
    s.push_str(&format!(
        "{:<24} {:>14.4} {:>12.6} {:>10.4}\n",
        label, report.averages.wasserstein, report.mmd, report.averages.ks
    ));
    s
}

/// Four classifier rows plus the cross-classifier average row.
pub fn tstr_table(report: &TstrReport) -> String {
    let mut s = String::new();
    s.push_str(&format!(
        "{:<16} {:>9} {:>10} {:>8} {:>8}\n",
        "classifier", "accuracy", "precision", "recall", "f1"
    ));
    for row in &report.per_classifier {
        s.push_str(&format!(
            "{:<16} {:>9.3} {:>10.3} {:>8.3} {:>8.3}\n",
            row.classifier, row.accuracy, row.precision, row.recall, row.f1
        ));
    }
    s.push_str(&format!(
        "{:<16} {:>9.3} {:>10.3} {:>8.3} {:>8.3}\n",
        "average",
        report.average.accuracy,
        report.average.precision,
        report.average.recall,
        report.average.f1
    ));
    s
}
