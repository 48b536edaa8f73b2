use std::collections::HashMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::measure::SampleSet;

/// Largest ambient dimension the cube counter supports.
pub const MAX_MESH_DIM: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MomentEntry {
    pub r: f64,
    /// `Σ_C μ̂(C)^q` over occupied `r`-mesh cubes.
    pub m: f64,
    pub occupied: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentSeries {
    pub q: f64,
    pub entries: Vec<MomentEntry>,
}

impl MomentSeries {
    /// CSV with columns `r,M,occupied,log_r,log_M`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,M,occupied,log_r,log_M\n");
        for e in &self.entries {
            let _ = writeln!(out, "{},{},{},{},{}", e.r, e.m, e.occupied, e.r.ln(), e.m.ln());
        }
        out
    }
}

/// Occupied-cube counts of the `r`-mesh, cubes `[j₁r, (j₁+1)r) × …`.
fn cube_counts(samples: &SampleSet, r: f64) -> Vec<u64> {
    let d = samples.dim;
    let count_chunk = |data: &[f64]| {
        let mut map: HashMap<[i64; MAX_MESH_DIM], u64> = HashMap::new();
        for x in data.chunks_exact(d) {
            let mut key = [0i64; MAX_MESH_DIM];
            for (k, v) in key.iter_mut().zip(x) {
                *k = (v / r).floor() as i64;
            }
            *map.entry(key).or_insert(0) += 1;
        }
        map
    };
    let merge = |mut a: HashMap<[i64; MAX_MESH_DIM], u64>, b: HashMap<[i64; MAX_MESH_DIM], u64>| {
        for (k, v) in b {
            *a.entry(k).or_insert(0) += v;
        }
        a
    };
    const CHUNK_POINTS: usize = 1 << 20;
    #[cfg(feature = "parallel")]
    let map = {
        use rayon::prelude::*;
        samples.data.par_chunks(CHUNK_POINTS * d).map(count_chunk).reduce(HashMap::new, merge)
    };
    #[cfg(not(feature = "parallel"))]
    let map = samples.data.chunks(CHUNK_POINTS * d).map(count_chunk).fold(HashMap::new(), merge);
    let mut counts: Vec<u64> = map.into_values().collect();
    counts.sort_unstable();
    counts
}

/// Empirical moment sums `M_r(q) = Σ_C μ̂(C)^q` for each mesh size.
///
/// Integer cube counts are merged exactly and summed in sorted order, so the
/// result does not depend on the worker count.
pub fn mesh_moments(samples: &SampleSet, q: f64, r_list: &[f64]) -> Result<MomentSeries> {
    if samples.count == 0 || samples.data.is_empty() {
        return Err(Error::EmptySample);
    }
    if samples.dim > MAX_MESH_DIM {
        return Err(Error::UnsupportedDimension(samples.dim));
    }
    if !(q > 1.0) || !q.is_finite() {
        return Err(invalid(format!("q must exceed 1, got {q}")));
    }
    if r_list.is_empty() || r_list.iter().any(|&r| !(r > 0.0) || !r.is_finite()) {
        return Err(invalid("mesh sizes must be positive"));
    }
    let total = samples.count as f64;
    let entries = r_list
        .iter()
        .map(|&r| {
            let counts = cube_counts(samples, r);
            let m: f64 = counts.iter().map(|&c| (c as f64 / total).powf(q)).sum();
            MomentEntry { r, m, occupied: counts.len() as u64 }
        })
        .collect();
    Ok(MomentSeries { q, entries })
}

/// Least-squares fit of `log M` against `(q−1) log r`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DqEstimate {
    pub slope: f64,
    pub stderr: f64,
    pub intercept: f64,
    /// Largest absolute residual of the fit; large values signal curvature.
    pub max_residual: f64,
}

pub fn dq_estimate(series: &MomentSeries) -> Result<DqEstimate> {
    let e = &series.entries;
    if e.len() < 4 {
        return Err(invalid(format!("need at least 4 mesh sizes, got {}", e.len())));
    }
    if e.windows(2).any(|w| !(w[1].r < w[0].r)) {
        return Err(invalid("mesh sizes must be strictly decreasing"));
    }
    let q1 = series.q - 1.0;
    let xs: Vec<f64> = e.iter().map(|p| q1 * p.r.ln()).collect();
    let ys: Vec<f64> = e.iter().map(|p| p.m.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(invalid("degenerate mesh grid"));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals: Vec<f64> = xs.iter().zip(&ys).map(|(x, y)| y - intercept - slope * x).collect();
    let rss: f64 = residuals.iter().map(|r| r * r).sum();
    let stderr = (rss / (n - 2.0) / sxx).sqrt();
    let max_residual = residuals.iter().fold(0.0f64, |a, r| a.max(r.abs()));
    Ok(DqEstimate { slope, stderr, intercept, max_residual })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(points: Vec<[f64; 2]>) -> SampleSet {
        SampleSet {
            dim: 2,
            seed: 0,
            count: points.len() as u64,
            burn_in: 0,
            data: points.into_iter().flatten().collect(),
        }
    }

    #[test]
    fn point_mass() {
        let s = set(vec![[0.3, 0.7]; 100]);
        let m = mesh_moments(&s, 2.5, &[0.5, 0.1, 0.01, 0.001]).unwrap();
        assert!(m.entries.iter().all(|e| e.m == 1.0 && e.occupied == 1));
        assert!(dq_estimate(&m).unwrap().slope.abs() < 1e-15);
    }

    #[test]
    fn dyadic_centres() {
        let j = 6;
        let pts: Vec<[f64; 2]> = (0..1 << j).map(|i| [(i as f64 + 0.5) / (1 << j) as f64, 0.0]).collect();
        let s = set(pts);
        let r = 1.0 / (1 << j) as f64;
        let m = mesh_moments(&s, 2.0, &[r]).unwrap();
        assert_eq!(m.entries[0].occupied, 1 << j);
        assert!((m.entries[0].m - 2f64.powi(-j)).abs() < 1e-15);
    }

    #[test]
    fn upper_face_goes_to_next_cube() {
        let s = set(vec![[0.25, 0.0], [0.2499999, 0.0]]);
        let m = mesh_moments(&s, 2.0, &[0.25]).unwrap();
        assert_eq!(m.entries[0].occupied, 2);
    }

    #[test]
    fn exact_power_law() {
        let q = 2.0;
        let t = 0.7;
        let entries = (1..=6)
            .map(|k| {
                let r = 2f64.powi(-k);
                MomentEntry { r, m: r.powf((q - 1.0) * t), occupied: 1 }
            })
            .collect();
        let est = dq_estimate(&MomentSeries { q, entries }).unwrap();
        assert!((est.slope - t).abs() < 1e-12 && est.stderr < 1e-12);
    }

    #[test]
    fn rejects_bad_grids() {
        let s = set(vec![[0.0, 0.0]]);
        assert!(mesh_moments(&s, 1.0, &[0.1]).is_err());
        assert!(mesh_moments(&s, 2.0, &[0.0]).is_err());
        let m = mesh_moments(&s, 2.0, &[0.1, 0.2, 0.05, 0.01]).unwrap();
        assert!(dq_estimate(&m).is_err());
        let csv = m.to_csv();
        assert!(csv.starts_with("r,M,occupied,log_r,log_M\n0.1,1,1,"));
    }
}
