//! Log-log least squares of mean empirical delta against `Km/N`.
//!
//! A slope near one half confirms the leading square-root scaling of the
//! certified delta. Records are grouped per grid point; failed or
//! non-finite records never enter the fit.

use std::collections::BTreeMap;

use haarqec::{Error, Result};
use serde::Serialize;

use crate::sweep::SweepRecord;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the fit in log space.
    pub residual: f64,
    /// Number of (ratio, mean-delta) points entering the fit.
    pub points: usize,
}

pub fn fit_scaling(records: &[SweepRecord]) -> Result<ScalingFit> {
    // Group by grid point and average delta over seeds.
    let mut groups: BTreeMap<(usize, usize, usize), (f64, usize)> = BTreeMap::new();
    for r in records {
        if r.error.is_some() || !r.delta_emp.is_finite() || r.delta_emp <= 0.0 {
            continue;
        }
        let e = groups
            .entry((r.n_dim, r.code_dim, r.set_size))
            .or_insert((0.0, 0));
        e.0 += r.delta_emp;
        e.1 += 1;
    }

    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (&(n, k, m), &(sum, count)) in &groups {
        let ratio = (k * m) as f64 / n as f64;
        xs.push(ratio.ln());
        ys.push((sum / count as f64).ln());
    }
    let mut distinct: Vec<u64> = xs.iter().map(|x| x.to_bits()).collect();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 5 {
        return Err(Error::InvalidParameter(format!(
            "scaling fit needs at least 5 distinct Km/N values, found {}",
            distinct.len()
        )));
    }

    let n = xs.len() as f64;
    let mean_x: f64 = xs.iter().sum::<f64>() / n;
    let mean_y: f64 = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let mut ss_res = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        let pred = slope * x + intercept;
        ss_res += (y - pred) * (y - pred);
    }
    Ok(ScalingFit {
        slope,
        intercept,
        residual: (ss_res / n).sqrt(),
        points: xs.len(),
    })
}
