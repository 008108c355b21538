use super::{PhaseSpaceGrid, WignerError, WignerGrid};
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};

/// Provenance attached to a Wigner grid when it is written out.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct WignerLabel {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub scenario: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub time_ns: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub outcome: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub model: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub param_hash: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub code_version: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct WignerDocument {
    grid: PhaseSpaceGrid,
    weight: f64,
    #[serde(default)]
    label: WignerLabel,
    /// `values[i][j] = W(x_i, p_j)`.
    values: Vec<Vec<f64>>,
}

impl WignerGrid {
    /// CSV with a header row of p values and one row per x value.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), WignerError> {
        let g = self.grid();
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["x\\p".to_string()];
        header.extend(g.ps().iter().map(|p| p.to_string()));
        w.write_record(&header)?;
        for i in 0..g.n_x() {
            let mut row = vec![g.x(i).to_string()];
            row.extend((0..g.n_p()).map(|j| self.at(i, j).to_string()));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the CSV layout of [`WignerGrid::write_csv`]; the weight is not stored
    /// in CSV and must be supplied.
    pub fn read_csv<R: Read>(input: R, weight: f64) -> Result<Self, WignerError> {
        let mut r = csv::ReaderBuilder::new().has_headers(false).comment(Some(b'#')).from_reader(input);
        let mut rows = r.records();
        let header = rows.next().ok_or_else(|| WignerError::Format("empty file".into()))??;
        let parse = |s: &str| s.trim().parse::<f64>().map_err(|e| WignerError::Format(format!("{s:?}: {e}")));
        let ps: Vec<f64> = header.iter().skip(1).map(parse).collect::<Result<_, _>>()?;
        let mut xs = Vec::new();
        let mut values = Vec::new();
        for rec in rows {
            let rec = rec?;
            if rec.len() != ps.len() + 1 {
                return Err(WignerError::Format(format!("row with {} fields, expected {}", rec.len(), ps.len() + 1)));
            }
            xs.push(parse(&rec[0])?);
            for f in rec.iter().skip(1) {
                values.push(parse(f)?);
            }
        }
        if xs.len() < 2 || ps.len() < 2 {
            return Err(WignerError::Format("need at least two x and two p values".into()));
        }
        let grid = PhaseSpaceGrid::new(xs[0], xs[xs.len() - 1], xs.len(), ps[0], ps[ps.len() - 1], ps.len())?;
        WignerGrid::new(grid, values, weight)
    }

    pub fn write_json<W: Write>(&self, out: W) -> Result<(), WignerError> {
        let g = self.grid();
        let doc = WignerDocument {
            grid: *g,
            weight: self.weight(),
            label: self.label.clone(),
            values: (0..g.n_x()).map(|i| (0..g.n_p()).map(|j| self.at(i, j)).collect()).collect(),
        };
        serde_json::to_writer_pretty(out, &doc)?;
        Ok(())
    }

    pub fn read_json<R: Read>(input: R) -> Result<Self, WignerError> {
        let doc: WignerDocument = serde_json::from_reader(input)?;
        doc.grid.validate()?;
        if doc.values.len() != doc.grid.n_x() || doc.values.iter().any(|r| r.len() != doc.grid.n_p()) {
            return Err(WignerError::Format("value array shape does not match the grid".into()));
        }
        let values = doc.values.into_iter().flatten().collect();
        Ok(WignerGrid::new(doc.grid, values, doc.weight)?.with_label(doc.label))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> WignerGrid {
        let g = PhaseSpaceGrid::new(-1.0, 2.0, 4, -0.5, 0.5, 3).unwrap();
        let v = (0..12).map(|k| 0.3 * ((k as f64) * 0.77).sin() / 3.0).collect();
        WignerGrid::new(g, v, 0.4).unwrap()
    }

    #[test]
    fn csv_round_trip() {
        let w = sample();
        let mut buf = Vec::new();
        w.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("x\\p,-0.5,0,0.5"));
        let back = WignerGrid::read_csv(buf.as_slice(), 0.4).unwrap();
        assert!(back.max_abs_diff(&w) <= 1e-12);
        assert_eq!(back.grid().n_x(), 4);
    }

    #[test]
    fn json_round_trip() {
        let w = sample().with_label(WignerLabel {
            scenario: Some("zb".into()),
            time_ns: Some(330.0),
            outcome: Some("e".into()),
            ..WignerLabel::default()
        });
        let mut buf = Vec::new();
        w.write_json(&mut buf).unwrap();
        let back = WignerGrid::read_json(buf.as_slice()).unwrap();
        assert_eq!(back, w);
    }

    #[test]
    fn malformed_csv_rejected() {
        assert!(WignerGrid::read_csv("x\\p,0,1\n0,1\n".as_bytes(), 1.0).is_err());
        assert!(WignerGrid::read_csv("".as_bytes(), 1.0).is_err());
    }
}
