use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use super::{RunConfig, AGGREGATE_FILE, MANIFEST_FILE};
use crate::agent::Formulation;
use crate::curve::LearningCurve;
use crate::env::EnvKind;
use crate::error::{Error, Result};

/// One run's aggregate curve plus the settings that must agree across a
/// comparison.
#[derive(Clone, Debug, PartialEq)]
pub struct CompareEntry {
    pub label: String,
    pub algo: Formulation,
    pub env: EnvKind,
    pub eval_interval: usize,
    pub eval_episodes: usize,
    pub curve: LearningCurve,
}

impl CompareEntry {
    pub fn load(dir: &Path) -> Result<Self> {
        let cfg = RunConfig::load(&dir.join(MANIFEST_FILE))?;
        Ok(CompareEntry {
            label: dir
                .file_name()
                .map_or_else(|| dir.display().to_string(), |n| n.to_string_lossy().into_owned()),
            algo: cfg.algo,
            env: cfg.env,
            eval_interval: cfg.agent.eval_interval,
            eval_episodes: cfg.agent.eval_episodes,
            curve: LearningCurve::load(&dir.join(AGGREGATE_FILE))?,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompareRow {
    pub label: String,
    pub algo: Formulation,
    pub plateau: Option<f64>,
    pub steps_to_plateau: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompareReport {
    pub env: EnvKind,
    pub rows: Vec<CompareRow>,
}

/// Loads each directory and compares their aggregate curves.
pub fn compare_report<P: AsRef<Path>>(dirs: &[P]) -> Result<CompareReport> {
    let entries = dirs
        .iter()
        .map(|d| CompareEntry::load(d.as_ref()))
        .collect::<Result<Vec<_>>>()?;
    CompareReport::from_entries(entries)
}

impl CompareReport {
    pub fn from_entries(entries: Vec<CompareEntry>) -> Result<Self> {
        let first = entries
            .first()
            .ok_or_else(|| Error::Alignment("nothing to compare".into()))?;
        for e in &entries[1..] {
            if (e.env, e.eval_interval, e.eval_episodes) != (first.env, first.eval_interval, first.eval_episodes) {
                return Err(Error::Alignment(format!(
                    "`{}` evaluates {} every {} steps over {} episodes, `{}` evaluates {} every {} steps over {} episodes",
                    first.label,
                    first.env,
                    first.eval_interval,
                    first.eval_episodes,
                    e.label,
                    e.env,
                    e.eval_interval,
                    e.eval_episodes
                )));
            }
        }
        let env = first.env;
        let rows = entries
            .into_iter()
            .map(|e| CompareRow {
                plateau: e.curve.plateau(),
                steps_to_plateau: e.curve.steps_to_plateau(),
                label: e.label,
                algo: e.algo,
            })
            .collect();
        Ok(CompareReport { env, rows })
    }

    /// Relative improvement of row `i` over row `j`, in percent of `|plateau_j|`.
    pub fn improvement(&self, i: usize, j: usize) -> Option<f64> {
        let a = self.rows.get(i)?.plateau?;
        let b = self.rows.get(j)?.plateau?;
        if b == 0.0 {
            return if a == 0.0 { Some(0.0) } else { None };
        }
        Some((a - b) / b.abs() * 100.0)
    }

    /// `run,algo,env,plateau_mean_return,steps_to_plateau`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "run,algo,env,plateau_mean_return,steps_to_plateau")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{}",
                r.label,
                r.algo,
                self.env,
                r.plateau.map_or(String::new(), |p| p.to_string()),
                r.steps_to_plateau.map_or(String::new(), |s| s.to_string())
            )?;
        }
        Ok(())
    }

    /// Plateau table followed by every ordered pairwise improvement.
    pub fn table(&self) -> String {
        let width = self.rows.iter().map(|r| r.label.len()).max().unwrap_or(3).max(3);
        let mut t = String::new();
        let _ = writeln!(t, "{:<width$}  {:<6}  {:>12}  {:>16}", "run", "algo", "plateau", "steps_to_plateau");
        for r in &self.rows {
            let _ = writeln!(
                t,
                "{:<width$}  {:<6}  {:>12}  {:>16}",
                r.label,
                r.algo.to_string(),
                r.plateau.map_or("-".into(), |p| format!("{p:.3}")),
                r.steps_to_plateau.map_or("-".into(), |s| s.to_string())
            );
        }
        for i in 0..self.rows.len() {
            for j in 0..self.rows.len() {
                if i != j {
                    let v = self.improvement(i, j).map_or("n/a".into(), |p| format!("{p:+.1}%"));
                    let _ = writeln!(t, "{} vs {}: {v}", self.rows[i].label, self.rows[j].label);
                }
            }
        }
        t
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::CurveRow;

    fn flat(label: &str, algo: Formulation, level: f64) -> CompareEntry {
        let mut curve = LearningCurve::new();
        for i in 1..=10 {
            let m = level * i.min(5) as f64 / 5.0;
            curve
                .push(CurveRow {
                    gradient_step: 500 * i,
                    mean_return: m,
                    min_return: m,
                    max_return: m,
                })
                .unwrap();
        }
        CompareEntry {
            label: label.into(),
            algo,
            env: EnvKind::Slot,
            eval_interval: 500,
            eval_episodes: 10,
            curve,
        }
    }

    #[test]
    fn self_comparison_is_zero() {
        let r = CompareReport::from_entries(vec![flat("a", Formulation::StateTransition, 4.0), flat("b", Formulation::StateTransition, 4.0)]).unwrap();
        assert_eq!(r.improvement(0, 1), Some(0.0));
    }

    #[test]
    fn seventeen_and_a_half_over_ten_is_seventy_five_percent() {
        let r = CompareReport::from_entries(vec![flat("sas", Formulation::StateTransition, 17.5), flat("dd", Formulation::StateAction, 10.0)]).unwrap();
        assert_eq!(r.rows[0].plateau, Some(17.5));
        assert!((r.improvement(0, 1).unwrap() - 75.0).abs() < 1e-12);
        assert_eq!(r.rows[0].steps_to_plateau, Some(2500));
        assert!(r.table().contains("sas vs dd: +75.0%"));
        let mut csv = Vec::new();
        r.write_csv(&mut csv).unwrap();
        assert!(String::from_utf8(csv).unwrap().contains("sas,sasrl,slot,17.5,2500"));
    }

    #[test]
    fn mismatched_grids_are_rejected() {
        let mut b = flat("b", Formulation::StateAction, 1.0);
        b.eval_interval = 250;
        let err = CompareReport::from_entries(vec![flat("a", Formulation::StateTransition, 1.0), b]).unwrap_err();
        assert!(matches!(err, Error::Alignment(_)));
        let mut c = flat("c", Formulation::StateAction, 1.0);
        c.env = EnvKind::Berzerk;
        assert!(CompareReport::from_entries(vec![flat("a", Formulation::StateTransition, 1.0), c]).is_err());
        assert!(CompareReport::from_entries(vec![]).is_err());
    }
}
