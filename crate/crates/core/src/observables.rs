//! Atomic observables summed over photon sectors.

use serde::Serialize;

use crate::coupled::TrajectoryRecord;
use crate::error::{MazerError, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObservableSeries {
    pub time: Vec<f64>,
    pub p_e: Vec<f64>,
    pub p_g: Vec<f64>,
    /// W(t) = Σ_n |D_n|² W_n(t)
    pub inversion: Vec<f64>,
    pub norm: Vec<f64>,
}

impl ObservableSeries {
    pub fn from_records(records: &[TrajectoryRecord]) -> Self {
        Self {
            time: records.iter().map(|r| r.time).collect(),
            p_e: records.iter().map(|r| r.p_e).collect(),
            p_g: records.iter().map(|r| r.p_g).collect(),
            inversion: records.iter().map(|r| r.inversion).collect(),
            norm: records.iter().map(|r| r.norm).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.time.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time.is_empty()
    }
}

fn same_time(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(1.0)
}

/// Weighted sum of per-sector observables. `weights[i]` is `|D_n|²` of the
/// sector that produced `sectors[i]`.
pub fn aggregate_inversion(sectors: &[&[TrajectoryRecord]], weights: &[f64]) -> Result<ObservableSeries> {
    if sectors.is_empty() {
        return Err(MazerError::InvalidInput("no sector trajectories".into()));
    }
    if sectors.len() != weights.len() {
        return Err(MazerError::InvalidInput(format!(
            "{} trajectories but {} weights",
            sectors.len(),
            weights.len()
        )));
    }
    let first = sectors[0];
    for (i, s) in sectors.iter().enumerate().skip(1) {
        let aligned = s.len() == first.len() && s.iter().zip(first).all(|(a, b)| same_time(a.time, b.time));
        if !aligned {
            return Err(MazerError::InvalidInput(format!(
                "sector trajectory {i} does not share the time grid of trajectory 0"
            )));
        }
    }
    let len = first.len();
    let mut out = ObservableSeries {
        time: first.iter().map(|r| r.time).collect(),
        p_e: vec![0.0; len],
        p_g: vec![0.0; len],
        inversion: vec![0.0; len],
        norm: vec![0.0; len],
    };
    for (records, &w) in sectors.iter().zip(weights) {
        for (j, r) in records.iter().enumerate() {
            out.p_e[j] += w * r.p_e;
            out.p_g[j] += w * r.p_g;
            out.inversion[j] += w * r.inversion;
            out.norm[j] += w * r.norm;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(time: f64, p_e: f64) -> TrajectoryRecord {
        TrajectoryRecord {
            time,
            norm: 1.0,
            p_e,
            p_g: 1.0 - p_e,
            inversion: 2.0 * p_e - 1.0,
        }
    }

    #[test]
    fn equal_weights_give_the_mean() {
        let a = [rec(0.0, 1.0), rec(1.0, 0.25)];
        let b = [rec(0.0, 1.0), rec(1.0, 0.75)];
        let s = aggregate_inversion(&[&a, &b], &[0.5, 0.5]).unwrap();
        assert_eq!(s.inversion, vec![1.0, 0.0]);
        assert_eq!(s.norm, vec![1.0, 1.0]);
    }

    #[test]
    fn mismatched_grids_are_rejected() {
        let a = [rec(0.0, 1.0), rec(1.0, 0.5)];
        let b = [rec(0.0, 1.0), rec(1.5, 0.5)];
        assert!(matches!(
            aggregate_inversion(&[&a, &b], &[0.5, 0.5]),
            Err(MazerError::InvalidInput(_))
        ));
        assert!(aggregate_inversion(&[&a], &[0.5, 0.5]).is_err());
    }
}
