use std::io::{Read, Write};

use crate::error::{Error, Result};

/// A dense joint distribution over finitely many discrete variables. The
/// last variable varies fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct JointTable {
    variables: Vec<String>,
    cards: Vec<usize>,
    probs: Vec<f64>,
}

impl JointTable {
    pub fn new(variables: Vec<String>, cards: Vec<usize>, probs: Vec<f64>) -> Result<Self> {
        if variables.len() != cards.len() {
            return Err(Error::InvalidTable("one cardinality per variable".into()));
        }
        for (i, v) in variables.iter().enumerate() {
            if variables[..i].contains(v) {
                return Err(Error::InvalidTable(format!("duplicate variable `{v}`")));
            }
            if cards[i] == 0 {
                return Err(Error::InvalidCardinality(v.clone()));
            }
        }
        let size: usize = cards.iter().product();
        if probs.len() != size {
            return Err(Error::InvalidTable(format!("expected {size} entries, got {}", probs.len())));
        }
        if let Some(p) = probs.iter().find(|p| p.is_nan() || **p < 0.0) {
            return Err(Error::InvalidTable(format!("negative or NaN entry {p}")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidTable(format!("entries sum to {total}")));
        }
        Ok(JointTable { variables, cards, probs })
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn cards(&self) -> &[usize] {
        &self.cards
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn column(&self, name: &str) -> Result<usize> {
        self.variables.iter().position(|v| v == name).ok_or_else(|| Error::UnknownNode(name.to_string()))
    }

    pub fn strides(&self) -> Vec<usize> {
        let mut s = vec![1; self.cards.len()];
        for i in (0..self.cards.len().saturating_sub(1)).rev() {
            s[i] = s[i + 1] * self.cards[i + 1];
        }
        s
    }

    /// Values of every variable at a flat index.
    pub fn decode(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.cards.len()];
        for i in (0..self.cards.len()).rev() {
            out[i] = index % self.cards[i];
            index /= self.cards[i];
        }
        out
    }

    pub fn encode(&self, values: &[usize]) -> usize {
        values.iter().zip(&self.cards).fold(0, |acc, (&v, &c)| acc * c + v)
    }

    pub fn prob_at(&self, values: &[usize]) -> f64 {
        self.probs[self.encode(values)]
    }

    pub fn min_entry(&self) -> f64 {
        self.probs.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Marginal over the given columns (in the given order, last fastest).
    pub fn marginal(&self, cols: &[usize]) -> Vec<f64> {
        let size: usize = cols.iter().map(|&c| self.cards[c]).product();
        let mut out = vec![0.0; size];
        let mut values = vec![0usize; self.cards.len()];
        for &p in &self.probs {
            let idx = cols.iter().fold(0, |acc, &c| acc * self.cards[c] + values[c]);
            out[idx] += p;
            // odometer increment, last variable fastest
            for i in (0..values.len()).rev() {
                values[i] += 1;
                if values[i] < self.cards[i] {
                    break;
                }
                values[i] = 0;
            }
        }
        out
    }

    /// Marginal table over a subset of variables, by name.
    pub fn marginalize(&self, keep: &[&str]) -> Result<JointTable> {
        let cols: Vec<usize> = keep.iter().map(|k| self.column(k)).collect::<Result<_>>()?;
        let probs = self.marginal(&cols);
        let total: f64 = probs.iter().sum();
        Ok(JointTable {
            variables: keep.iter().map(|s| s.to_string()).collect(),
            cards: cols.iter().map(|&c| self.cards[c]).collect(),
            probs: probs.into_iter().map(|p| p / total).collect(),
        })
    }

    /// Rescales entries to sum to one. Used after accumulating counts or
    /// floating point sums.
    pub fn normalized(variables: Vec<String>, cards: Vec<usize>, mut probs: Vec<f64>) -> Result<Self> {
        let total: f64 = probs.iter().sum();
        if total.is_nan() || total <= 0.0 {
            return Err(Error::InvalidTable("total mass is zero".into()));
        }
        for p in &mut probs {
            *p /= total;
        }
        JointTable::new(variables, cards, probs)
    }

    /// Maximum absolute difference between two tables over the same
    /// variables (in the same order).
    pub fn max_abs_diff(&self, other: &JointTable) -> Result<f64> {
        if self.variables != other.variables || self.cards != other.cards {
            return Err(Error::InvalidTable("tables have different layouts".into()));
        }
        Ok(self.probs.iter().zip(&other.probs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
    }

    /// CSV with a header of variable names followed by a probability column,
    /// one row per joint state. Floats use the shortest round-tripping form.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let mut header: Vec<&str> = self.variables.iter().map(String::as_str).collect();
        header.push("prob");
        wr.write_record(&header).map_err(csv_err)?;
        for (i, p) in self.probs.iter().enumerate() {
            let mut row: Vec<String> = self.decode(i).iter().map(|v| v.to_string()).collect();
            row.push(format!("{p:?}"));
            wr.write_record(&row).map_err(csv_err)?;
        }
        wr.flush().map_err(|e| Error::InvalidTable(e.to_string()))?;
        Ok(())
    }

    /// Reads the CSV layout written by [`JointTable::write_csv`]. The last
    /// column holds probabilities whatever its header; cardinalities are one
    /// more than the largest value seen and missing states get zero mass.
    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let header = rd.headers().map_err(csv_err)?.clone();
        if header.len() < 2 {
            return Err(Error::InvalidTable("need at least one variable and a probability column".into()));
        }
        let nvars = header.len() - 1;
        let variables: Vec<String> = header.iter().take(nvars).map(|s| s.trim().to_string()).collect();
        let mut rows: Vec<(Vec<usize>, f64)> = Vec::new();
        for rec in rd.records() {
            let rec = rec.map_err(csv_err)?;
            if rec.len() != header.len() {
                return Err(Error::InvalidTable("ragged row".into()));
            }
            let values = rec
                .iter()
                .take(nvars)
                .map(|s| s.trim().parse::<usize>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::InvalidTable(e.to_string()))?;
            let p: f64 =
                rec[nvars].trim().parse().map_err(|e: std::num::ParseFloatError| Error::InvalidTable(e.to_string()))?;
            rows.push((values, p));
        }
        let mut cards = vec![1usize; nvars];
        for (values, _) in &rows {
            for (c, &v) in cards.iter_mut().zip(values) {
                *c = (*c).max(v + 1);
            }
        }
        let size: usize = cards.iter().product();
        let mut probs = vec![0.0; size];
        let mut seen = vec![false; size];
        let shape = JointTable { variables: variables.clone(), cards: cards.clone(), probs: Vec::new() };
        for (values, p) in rows {
            let i = shape.encode(&values);
            if std::mem::replace(&mut seen[i], true) {
                return Err(Error::InvalidTable(format!("duplicate state {values:?}")));
            }
            probs[i] = p;
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidTable(format!("probabilities sum to {total}")));
        }
        JointTable::normalized(variables, cards, probs)
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::InvalidTable(e.to_string())
}
