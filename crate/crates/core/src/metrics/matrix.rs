use serde::{Deserialize, Serialize};

/// Decimal places used in every text export.
pub const DECIMALS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixKind {
    InterCitationPercent,
    Jaccard,
    CompositionProb,
    CompositionZnorm,
}

/// Labeled dense matrix; `values[i][j]` belongs to `row_labels[i]` and
/// `col_labels[j]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsMatrix {
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    pub values: Vec<Vec<f64>>,
    pub kind: MatrixKind,
}

/// Fixed-decimal rendering without negative zero.
pub fn format_value(x: f64) -> String {
    let s = format!("{:.*}", DECIMALS, x);
    match s.strip_prefix('-') {
        Some(rest) if rest.bytes().all(|b| b == b'0' || b == b'.') => rest.to_string(),
        _ => s,
    }
}

fn comment(header: Option<&str>) -> String {
    header.map(|h| format!("# {h}\n")).unwrap_or_default()
}

impl MetricsMatrix {
    pub fn get(&self, row: &str, col: &str) -> Option<f64> {
        let i = self.row_labels.iter().position(|r| r == row)?;
        let j = self.col_labels.iter().position(|c| c == col)?;
        Some(self.values[i][j])
    }

    /// Wide CSV: first row holds column labels, first column row labels.
    /// `header` becomes a leading `#` comment line.
    pub fn to_csv(&self, header: Option<&str>) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut first = vec![String::new()];
        first.extend(self.col_labels.iter().cloned());
        w.write_record(&first).expect("in-memory write");
        for (label, row) in self.row_labels.iter().zip(&self.values) {
            let mut record = vec![label.clone()];
            record.extend(row.iter().map(|&x| format_value(x)));
            w.write_record(&record).expect("in-memory write");
        }
        let body = String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input");
        comment(header) + &body
    }

    /// Parses the output of [`MetricsMatrix::to_csv`].
    pub fn from_csv(text: &str, kind: MatrixKind) -> Result<Self, csv::Error> {
        let mut r = csv::ReaderBuilder::new()
            .has_headers(false)
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let mut records = r.records();
        let head = records.next().transpose()?.unwrap_or_default();
        let col_labels = head.iter().skip(1).map(str::to_string).collect();
        let (mut row_labels, mut values) = (Vec::new(), Vec::new());
        for record in records {
            let record = record?;
            row_labels.push(record.get(0).unwrap_or_default().to_string());
            values.push(record.iter().skip(1).map(|v| v.parse().unwrap_or(f64::NAN)).collect());
        }
        Ok(MetricsMatrix { row_labels, col_labels, values, kind })
    }

    /// Long format: one `row\tcol\tvalue` line per cell.
    pub fn to_long_tsv(&self, header: Option<&str>) -> String {
        let mut out = comment(header) + "row\tcol\tvalue\n";
        for (label, row) in self.row_labels.iter().zip(&self.values) {
            for (col, &x) in self.col_labels.iter().zip(row) {
                out.push_str(&format!("{label}\t{col}\t{}\n", format_value(x)));
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut clean = self.clone();
        for x in clean.values.iter_mut().flatten() {
            *x += 0.0;
        }
        serde_json::to_string_pretty(&clean).expect("finite values serialize")
    }
}
