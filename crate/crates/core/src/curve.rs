//! Learning-curve rows, CSV export/import, and a minimal SVG chart.

use std::io::Write;

use crate::error::{Error, Result};
use crate::numfmt;

/// One metrics sample. `distance` is instantaneous; the window fields
/// average the queries since the previous sample and are `None` when the
/// window holds no defined values.
#[derive(Clone, Debug, PartialEq)]
pub struct CurveRow {
    pub query_index: u64,
    pub distance: f64,
    pub precision_window: Option<f64>,
    pub mean_search_length_window: Option<f64>,
}

/// Distance between actual and ideal metaknowledge sampled over a run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LearningCurve {
    rows: Vec<CurveRow>,
}

const HEADER: &str = "query_index,distance,precision_window,mean_search_length_window";

fn optional(value: Option<f64>) -> String {
    match value {
        Some(v) => numfmt::sig12(v),
        None => "NA".to_string(),
    }
}

impl LearningCurve {
    pub fn new(rows: Vec<CurveRow>) -> Self {
        LearningCurve { rows }
    }

    pub fn push(&mut self, row: CurveRow) {
        self.rows.push(row);
    }

    pub fn rows(&self) -> &[CurveRow] {
        &self.rows
    }

    /// Writes `query_index,distance,precision_window,mean_search_length_window`
    /// rows; floats carry 12 significant digits, empty windows the literal `NA`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{HEADER}")?;
        for row in &self.rows {
            writeln!(
                w,
                "{},{},{},{}",
                row.query_index,
                numfmt::sig12(row.distance),
                optional(row.precision_window),
                optional(row.mean_search_length_window),
            )?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("vec write");
        String::from_utf8(buf).expect("csv is utf-8")
    }

    /// Parses a curve produced by [`write_csv`](Self::write_csv).
    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        match lines.next() {
            Some(h) if h == HEADER => {}
            other => {
                return Err(Error::Parse(format!(
                    "bad curve header: {:?}",
                    other.unwrap_or("")
                )))
            }
        }
        let mut rows = Vec::new();
        for (n, line) in lines.enumerate() {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 4 {
                return Err(Error::Parse(format!(
                    "curve row {} has {} fields, expected 4",
                    n + 2,
                    fields.len()
                )));
            }
            let number = |s: &str| -> Result<f64> {
                s.parse()
                    .map_err(|e| Error::Parse(format!("curve row {}: {e}", n + 2)))
            };
            let window = |s: &str| -> Result<Option<f64>> {
                if s == "NA" {
                    Ok(None)
                } else {
                    number(s).map(Some)
                }
            };
            rows.push(CurveRow {
                query_index: fields[0]
                    .parse()
                    .map_err(|e| Error::Parse(format!("curve row {}: {e}", n + 2)))?,
                distance: number(fields[1])?,
                precision_window: window(fields[2])?,
                mean_search_length_window: window(fields[3])?,
            });
        }
        Ok(LearningCurve { rows })
    }

    /// Static line chart of distance against query index.
    pub fn to_svg(&self) -> String {
        const W: f64 = 640.0;
        const H: f64 = 400.0;
        const MARGIN: f64 = 50.0;

        let max_index = self
            .rows
            .last()
            .map(|r| r.query_index.max(1))
            .unwrap_or(1) as f64;
        let max_distance = self
            .rows
            .iter()
            .map(|r| r.distance)
            .fold(0.0f64, f64::max)
            .max(1e-9);

        let x = |q: u64| MARGIN + (q as f64 / max_index) * (W - 2.0 * MARGIN);
        let y = |d: f64| H - MARGIN - (d / max_distance) * (H - 2.0 * MARGIN);

        let points: Vec<String> = self
            .rows
            .iter()
            .map(|r| format!("{:.2},{:.2}", x(r.query_index), y(r.distance)))
            .collect();

        let mut svg = String::new();
        svg.push_str(&format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" \
             viewBox=\"0 0 {W} {H}\">\n"
        ));
        svg.push_str(&format!(
            "  <rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n"
        ));
        svg.push_str(&format!(
            "  <line x1=\"{m}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/>\n",
            m = MARGIN,
            b = H - MARGIN,
            r = W - MARGIN
        ));
        svg.push_str(&format!(
            "  <line x1=\"{m}\" y1=\"{m}\" x2=\"{m}\" y2=\"{b}\" stroke=\"black\"/>\n",
            m = MARGIN,
            b = H - MARGIN
        ));
        svg.push_str(&format!(
            "  <text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">queries</text>\n",
            W / 2.0,
            H - 12.0
        ));
        svg.push_str(&format!(
            "  <text x=\"14\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\" \
             transform=\"rotate(-90 14 {})\">distance</text>\n",
            H / 2.0,
            H / 2.0
        ));
        svg.push_str(&format!(
            "  <text x=\"{}\" y=\"{}\" font-size=\"10\">0</text>\n",
            MARGIN - 14.0,
            H - MARGIN + 4.0
        ));
        svg.push_str(&format!(
            "  <text x=\"{}\" y=\"{}\" font-size=\"10\">{:.3}</text>\n",
            MARGIN - 40.0,
            MARGIN + 4.0,
            max_distance
        ));
        svg.push_str(&format!(
            "  <text x=\"{}\" y=\"{}\" font-size=\"10\" text-anchor=\"end\">{}</text>\n",
            W - MARGIN,
            H - MARGIN + 14.0,
            max_index as u64
        ));
        if !points.is_empty() {
            svg.push_str(&format!(
                "  <polyline points=\"{}\" fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\"/>\n",
                points.join(" ")
            ));
        }
        svg.push_str("</svg>\n");
        svg
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> LearningCurve {
        LearningCurve::new(vec![
            CurveRow {
                query_index: 0,
                distance: 0.332211,
                precision_window: None,
                mean_search_length_window: None,
            },
            CurveRow {
                query_index: 10,
                distance: 0.25,
                precision_window: Some(0.6),
                mean_search_length_window: Some(2.1),
            },
        ])
    }

    #[test]
    fn csv_round_trip_is_byte_stable() {
        let text = sample().to_csv_string();
        assert!(text.starts_with(HEADER));
        assert!(text.contains("NA,NA"));
        let reparsed = LearningCurve::from_csv_str(&text).unwrap();
        assert_eq!(reparsed.to_csv_string(), text);
        assert_eq!(reparsed.rows().len(), 2);
    }

    #[test]
    fn csv_rejects_malformed_input() {
        assert!(LearningCurve::from_csv_str("nope\n1,2,3,4\n").is_err());
        let text = format!("{HEADER}\n1,0.5,NA\n");
        assert!(LearningCurve::from_csv_str(&text).is_err());
        let text = format!("{HEADER}\n1,zebra,NA,NA\n");
        assert!(LearningCurve::from_csv_str(&text).is_err());
    }

    #[test]
    fn svg_renders_a_polyline() {
        let svg = sample().to_svg();
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("<polyline"));
        assert!(svg.ends_with("</svg>\n"));
    }
}
