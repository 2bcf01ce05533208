use std::fmt::Write as _;
use std::io::Write;

use super::{EvaluationReport, Metrics};
use crate::error::{Error, Result};

/// Three decimals, never `-0.000`.
pub fn fmt3(v: f64) -> String {
    let s = format!("{v:.3}");
    if s == "-0.000" { "0.000".into() } else { s }
}

fn undefined_list(m: &Metrics) -> String {
    m.undefined.iter().map(|n| n.name()).collect::<Vec<_>>().join(";")
}

fn csv_err(e: csv::Error) -> Error {
    Error::Data(format!("csv: {e}"))
}

fn metric_cells(m: &Metrics) -> [String; 6] {
    [fmt3(m.acc), fmt3(m.prec), fmt3(m.recall), fmt3(m.f1), fmt3(m.mcc), undefined_list(m)]
}

/// One row per fold plus a final `all` row for the pooled matrix.
pub fn write_report_csv<W: Write>(out: W, report: &EvaluationReport) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "action", "model", "fold", "tp", "fp", "tn", "fn", "acc", "prec", "recall", "f1", "mcc", "undefined",
    ])
    .map_err(csv_err)?;
    let rows = report
        .folds
        .iter()
        .enumerate()
        .map(|(i, cm)| (i.to_string(), cm))
        .chain(std::iter::once(("all".to_string(), &report.pooled)));
    for (fold, cm) in rows {
        let cells = match super::compute_metrics(cm) {
            Ok(m) => metric_cells(&m).to_vec(),
            Err(_) => vec![String::new(); 6],
        };
        let mut record = vec![
            report.movement.name().to_string(),
            report.classifier.name().to_string(),
            fold,
            cm.tp.to_string(),
            cm.fp.to_string(),
            cm.tn.to_string(),
            cm.fn_.to_string(),
        ];
        record.extend(cells);
        w.write_record(&record).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::Data(format!("csv: {e}")))?;
    Ok(())
}

/// One row of pooled metrics per report.
pub fn write_summary_csv<W: Write>(out: W, reports: &[EvaluationReport]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["Action", "Model", "Acc", "Prec", "Recall", "F1-score", "MCC", "undefined"])
        .map_err(csv_err)?;
    for r in reports {
        let mut record = vec![r.movement.title().to_string(), r.classifier.title().to_string()];
        record.extend(metric_cells(&r.metrics));
        w.write_record(&record).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::Data(format!("csv: {e}")))?;
    Ok(())
}

pub fn summary_csv(reports: &[EvaluationReport]) -> Result<String> {
    let mut buf = Vec::new();
    write_summary_csv(&mut buf, reports)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

/// Fixed-width results table. Metrics flagged as undefined carry a `*`.
pub fn format_table(reports: &[EvaluationReport]) -> String {
    let header = ["Action", "Model", "Acc", "Prec", "Recall", "F1-score", "MCC"];
    let rows: Vec<Vec<String>> = reports
        .iter()
        .map(|r| {
            let m = &r.metrics;
            let mark = |v: f64, name| {
                let s = fmt3(v);
                if m.undefined.contains(&name) { s + "*" } else { s }
            };
            use super::MetricName::*;
            vec![
                r.movement.title().to_string(),
                r.classifier.title().to_string(),
                fmt3(m.acc),
                mark(m.prec, Precision),
                mark(m.recall, Recall),
                mark(m.f1, F1),
                mark(m.mcc, Mcc),
            ]
        })
        .collect();
    let widths: Vec<usize> = (0..header.len())
        .map(|c| rows.iter().map(|r| r[c].len()).chain([header[c].len()]).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    let mut line = |cells: &[String]| {
        let parts: Vec<String> = cells
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(c, (s, &w))| if c < 2 { format!("{s:<w$}") } else { format!("{s:>w$}") })
            .collect();
        writeln!(out, "{}", parts.join("  ").trim_end()).expect("write to string");
    };
    line(&header.map(String::from));
    line(&widths.iter().map(|&w| "-".repeat(w)).collect::<Vec<_>>());
    for r in &rows {
        line(r);
    }
    if reports.iter().any(|r| !r.metrics.undefined.is_empty()) {
        out.push_str("* zero denominator, reported as 0\n");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::ClassifierKind;
    use crate::evaluation::{compute_metrics, ConfusionMatrix};
    use crate::skeleton::MovementKind;

    fn report(cm: ConfusionMatrix) -> EvaluationReport {
        let folds = vec![cm; 10];
        let pooled: ConfusionMatrix = folds.iter().copied().sum();
        EvaluationReport {
            movement: MovementKind::ChairRise,
            classifier: ClassifierKind::RandomForest,
            metrics: compute_metrics(&pooled).unwrap(),
            folds,
            pooled,
        }
    }

    #[test]
    fn three_decimals() {
        assert_eq!(fmt3(0.8181818), "0.818");
        assert_eq!(fmt3(-0.0001), "0.000");
        assert_eq!(fmt3(1.0), "1.000");
    }

    #[test]
    fn report_csv_rows() {
        let mut buf = Vec::new();
        write_report_csv(&mut buf, &report(ConfusionMatrix::new(45, 5, 40, 10))).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines.len(), 12);
        assert_eq!(lines[11], "ChairRise,RandomForest,all,450,50,400,100,0.850,0.900,0.818,0.857,0.704,");
    }

    #[test]
    fn table_layout() {
        let t = format_table(&[report(ConfusionMatrix::new(1, 0, 1, 0)), report(ConfusionMatrix::new(0, 0, 3, 1))]);
        let lines: Vec<_> = t.lines().collect();
        assert!(lines[0].starts_with("Action"));
        assert!(lines[0].ends_with("MCC"));
        assert!(lines[2].contains("Chair Rise") && lines[2].contains("Random Forest"));
        assert!(lines[3].contains("0.000*"));
        assert!(t.ends_with("reported as 0\n"));
        let csv = summary_csv(&[report(ConfusionMatrix::new(1, 0, 1, 0))]).unwrap();
        assert_eq!(csv.lines().nth(1).unwrap(), "Chair Rise,Random Forest,1.000,1.000,1.000,1.000,1.000,");
    }
}
