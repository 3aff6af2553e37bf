//! Evaluation-return time series keyed by gradient step.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

pub const CURVE_HEADER: &str = "gradient_step,mean_return,min_return,max_return";

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurveRow {
    pub gradient_step: usize,
    pub mean_return: f64,
    pub min_return: f64,
    pub max_return: f64,
}

impl CurveRow {
    /// Summarises a set of episode returns.
    pub fn from_returns(gradient_step: usize, returns: &[f64]) -> Result<Self> {
        if returns.is_empty() {
            return Err(Error::NotEnoughData("no episode returns to summarise".into()));
        }
        let mean = returns.iter().sum::<f64>() / returns.len() as f64;
        let min = returns.iter().copied().fold(f64::INFINITY, f64::min);
        let max = returns.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(CurveRow {
            gradient_step,
            mean_return: mean.clamp(min, max),
            min_return: min,
            max_return: max,
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct LearningCurve {
    rows: Vec<CurveRow>,
}

impl LearningCurve {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rows(&self) -> &[CurveRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn last(&self) -> Option<&CurveRow> {
        self.rows.last()
    }

    pub fn push(&mut self, row: CurveRow) -> Result<()> {
        if !(row.min_return <= row.mean_return && row.mean_return <= row.max_return) {
            return Err(Error::InvalidSample(format!("curve row violates min <= mean <= max: {row:?}")));
        }
        if let Some(prev) = self.rows.last() {
            if row.gradient_step <= prev.gradient_step {
                return Err(Error::InvalidSample(format!(
                    "gradient step {} does not increase past {}",
                    row.gradient_step, prev.gradient_step
                )));
            }
        }
        self.rows.push(row);
        Ok(())
    }

    /// Mean of `mean_return` over the last `ceil(len/5)` rows.
    pub fn plateau(&self) -> Option<f64> {
        if self.rows.is_empty() {
            return None;
        }
        let window = self.rows.len().div_ceil(5);
        let tail = &self.rows[self.rows.len() - window..];
        Some(tail.iter().map(|r| r.mean_return).sum::<f64>() / window as f64)
    }

    /// First gradient step whose mean return is within 5% of the curve's
    /// range from the plateau.
    pub fn steps_to_plateau(&self) -> Option<usize> {
        let plateau = self.plateau()?;
        let lo = self.rows.iter().map(|r| r.mean_return).fold(f64::INFINITY, f64::min);
        let hi = self.rows.iter().map(|r| r.mean_return).fold(f64::NEG_INFINITY, f64::max);
        let tol = 0.05 * (hi - lo);
        self.rows
            .iter()
            .find(|r| (r.mean_return - plateau).abs() <= tol)
            .map(|r| r.gradient_step)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{CURVE_HEADER}")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{}",
                r.gradient_step, r.mean_return, r.min_return, r.max_return
            )?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines();
        let header = lines.next().transpose()?.unwrap_or_default();
        if header.trim() != CURVE_HEADER {
            return Err(Error::Parse(format!("unexpected curve header `{header}`")));
        }
        let mut curve = LearningCurve::new();
        for (i, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 4 {
                return Err(Error::Parse(format!("curve line {}: expected 4 fields", i + 2)));
            }
            let num = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("curve line {}: `{s}`: {e}", i + 2)))
            };
            let step = f[0]
                .trim()
                .parse::<usize>()
                .map_err(|e| Error::Parse(format!("curve line {}: {e}", i + 2)))?;
            curve.push(CurveRow {
                gradient_step: step,
                mean_return: num(f[1])?,
                min_return: num(f[2])?,
                max_return: num(f[3])?,
            })?;
        }
        Ok(curve)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.write_csv(BufWriter::new(File::create(path)?))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read_csv(BufReader::new(File::open(path)?))
    }

    /// Across-curve aggregate: at each gradient step, the mean, min and max
    /// of the per-curve mean returns, over the curves that reached that step.
    pub fn aggregate(curves: &[LearningCurve]) -> Result<Self> {
        let mut steps: Vec<usize> = curves.iter().flat_map(|c| c.rows.iter().map(|r| r.gradient_step)).collect();
        steps.sort_unstable();
        steps.dedup();
        let mut out = LearningCurve::new();
        for step in steps {
            let means: Vec<f64> = curves
                .iter()
                .filter_map(|c| c.rows.iter().find(|r| r.gradient_step == step))
                .map(|r| r.mean_return)
                .collect();
            out.push(CurveRow::from_returns(step, &means)?)?;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve(points: &[(usize, f64)]) -> LearningCurve {
        let mut c = LearningCurve::new();
        for &(s, m) in points {
            c.push(CurveRow {
                gradient_step: s,
                mean_return: m,
                min_return: m - 1.0,
                max_return: m + 1.0,
            })
            .unwrap();
        }
        c
    }

    #[test]
    fn csv_roundtrip_is_lossless() {
        let c = curve(&[(500, -3.25), (1000, 0.1 + 0.2), (1500, 7.0 / 3.0)]);
        let mut bytes = Vec::new();
        c.write_csv(&mut bytes).unwrap();
        assert!(bytes.starts_with(b"gradient_step,mean_return,min_return,max_return\n"));
        assert_eq!(LearningCurve::read_csv(&bytes[..]).unwrap(), c);
    }

    #[test]
    fn rejects_bad_rows() {
        let mut c = curve(&[(500, 1.0)]);
        let bad = CurveRow {
            gradient_step: 500,
            mean_return: 1.0,
            min_return: 0.0,
            max_return: 2.0,
        };
        assert!(c.push(bad).is_err());
        let bad = CurveRow {
            gradient_step: 1000,
            mean_return: 3.0,
            min_return: 0.0,
            max_return: 2.0,
        };
        assert!(c.push(bad).is_err());
        assert!(LearningCurve::read_csv(&b"step,mean\n"[..]).is_err());
    }

    #[test]
    fn plateau_uses_the_last_fifth() {
        let c = curve(&[(1, 0.0), (2, 0.0), (3, 0.0), (4, 0.0), (5, 0.0), (6, 8.0), (7, 10.8), (8, 10.0), (9, 11.0), (10, 11.0)]);
        assert_eq!(c.plateau(), Some(11.0));
        assert_eq!(c.steps_to_plateau(), Some(7));
        assert_eq!(LearningCurve::new().plateau(), None);
    }

    #[test]
    fn aggregate_matches_recomputation() {
        let a = curve(&[(500, 1.0), (1000, 2.0)]);
        let b = curve(&[(500, 3.0), (1000, -2.0), (1500, 4.0)]);
        let agg = LearningCurve::aggregate(&[a, b]).unwrap();
        let rows = agg.rows();
        assert_eq!(rows.len(), 3);
        assert_eq!((rows[0].mean_return, rows[0].min_return, rows[0].max_return), (2.0, 1.0, 3.0));
        assert_eq!((rows[1].mean_return, rows[1].min_return, rows[1].max_return), (0.0, -2.0, 2.0));
        assert_eq!(rows[2].mean_return, 4.0);
    }
}
