//! Sampled datasets with headered CSV input and output.

use crate::table::Table;
use crate::{EvalError, Result};
use std::collections::BTreeMap;
use std::io::{Read, Write};

/// Rows of discrete states over columns in name order.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    columns: Vec<(String, usize)>,
    rows: Vec<Vec<usize>>,
}

impl Dataset {
    pub fn new(mut columns: Vec<(String, usize)>, rows: Vec<Vec<usize>>) -> Result<Dataset> {
        let mut order: Vec<usize> = (0..columns.len()).collect();
        order.sort_by(|a, b| columns[*a].0.cmp(&columns[*b].0));
        let rows: Vec<Vec<usize>> = rows.into_iter().map(|r| order.iter().map(|i| r[*i]).collect()).collect();
        columns = order.iter().map(|i| columns[*i].clone()).collect();
        for r in &rows {
            if r.len() != columns.len() || r.iter().zip(&columns).any(|(x, (_, c))| x >= c) {
                return Err(EvalError::BadTable("dataset row does not fit the columns".into()));
            }
        }
        Ok(Dataset { columns, rows })
    }

    pub fn columns(&self) -> &[(String, usize)] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    /// Empirical joint frequencies.
    pub fn empirical(&self) -> Result<Table> {
        let mut counts = BTreeMap::<&[usize], f64>::new();
        for r in &self.rows {
            *counts.entry(r.as_slice()).or_default() += 1.0;
        }
        let n = self.rows.len().max(1) as f64;
        Table::from_fn(self.columns.clone(), |s| counts.get(s).copied().unwrap_or(0.0) / n)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(self.columns.iter().map(|(n, _)| n.as_str())).map_err(csv_err)?;
        for r in &self.rows {
            out.write_record(r.iter().map(|x| x.to_string())).map_err(csv_err)?;
        }
        out.flush().map_err(|e| EvalError::Io(e.to_string()))
    }

    /// Reads a headered CSV; `cards` gives each column's cardinality.
    pub fn read_csv<R: Read>(r: R, cards: &BTreeMap<String, usize>) -> Result<Dataset> {
        let mut rd = csv::Reader::from_reader(r);
        let header: Vec<String> = rd.headers().map_err(csv_err)?.iter().map(str::to_string).collect();
        let columns = header
            .iter()
            .map(|h| cards.get(h).map(|c| (h.clone(), *c)).ok_or_else(|| EvalError::Unbound(h.clone())))
            .collect::<Result<Vec<_>>>()?;
        let mut rows = Vec::new();
        for rec in rd.records() {
            let rec = rec.map_err(csv_err)?;
            let row = rec
                .iter()
                .map(|x| x.trim().parse::<usize>().map_err(|e| EvalError::BadTable(e.to_string())))
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        Dataset::new(columns, rows)
    }
}

fn csv_err(e: csv::Error) -> EvalError {
    EvalError::Io(e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_with_sorted_columns() {
        let d = Dataset::new(vec![("Y".into(), 2), ("A".into(), 3)], vec![vec![1, 2], vec![0, 0]]).unwrap();
        assert_eq!(d.columns()[0].0, "A");
        assert_eq!(d.rows()[0], [2, 1]);
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "A,Y\n2,1\n0,0\n");
        let cards: BTreeMap<String, usize> = [("A".to_string(), 3), ("Y".to_string(), 2)].into();
        assert_eq!(Dataset::read_csv(buf.as_slice(), &cards).unwrap(), d);
        let e = d.empirical().unwrap();
        assert_eq!(e.at(&[2, 1]), 0.5);
    }
}
