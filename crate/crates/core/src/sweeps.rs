//! Figure datasets: inequality values along `theta`/`phi` sweeps of the
//! symmetric product state, and verdicts over the Bloch ball.
//!
//! Rows are computed in parallel and collected in index order, so output
//! bytes never depend on the thread count.

use std::f64::consts::{FRAC_PI_2, PI};
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::behavior::{Behavior, Tolerances};
use crate::decision::{classify, side_ratios, Verdict};
use crate::error::{Error, Result};
use crate::quantum::{bloch_behavior, ideal_behavior, sample_all, BlochVector, ProductState, QubitState};
use crate::stats::{propagate_uncertainty, CountTable};

pub const DEFAULT_STEPS: usize = 181;
pub const DEFAULT_BALL_RESOLUTION: usize = 101;
pub const DEFAULT_SPHERE_RESOLUTION: usize = 256;
pub const DEFAULT_SWEEP_RESAMPLES: usize = 200;

/// Text written in place of a ratio whose denominator is within `1e-9` of zero.
pub const UNDEFINED: &str = "undefined";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Param {
    Theta,
    Phi,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub fixed: Param,
    #[serde(rename = "fixedValue")]
    pub fixed_value: f64,
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
    /// Shots per setting; 0 means exact probabilities.
    pub shots: u64,
    pub seed: u64,
    /// Bootstrap size for the error columns of sampled sweeps.
    pub resamples: usize,
}

impl SweepSpec {
    /// Ideal sweep of the parameter that is not `fixed` over its full range:
    /// `theta` in `[0, pi/2]`, `phi` in `[0, pi]`.
    pub fn ideal(fixed: Param, fixed_value: f64) -> Self {
        let (lo, hi) = match fixed {
            Param::Theta => (0.0, PI),
            Param::Phi => (0.0, FRAC_PI_2),
        };
        SweepSpec {
            fixed,
            fixed_value,
            lo,
            hi,
            steps: DEFAULT_STEPS,
            shots: 0,
            seed: 0,
            resamples: DEFAULT_SWEEP_RESAMPLES,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.lo.is_finite() || !self.hi.is_finite() || self.lo >= self.hi {
            return Err(Error::Input(format!("sweep range [{}, {}] is empty", self.lo, self.hi)));
        }
        if self.steps < 2 {
            return Err(Error::Input(format!("steps must be at least 2, got {}", self.steps)));
        }
        if !self.fixed_value.is_finite() {
            return Err(Error::Input("fixed value must be finite".into()));
        }
        if self.fixed == Param::Phi && (self.lo < 0.0 || self.hi > FRAC_PI_2) {
            return Err(Error::Input(format!(
                "theta range [{}, {}] leaves [0, pi/2]",
                self.lo, self.hi
            )));
        }
        if self.fixed == Param::Theta && !(0.0..=FRAC_PI_2).contains(&self.fixed_value) {
            return Err(Error::Input(format!("theta = {} leaves [0, pi/2]", self.fixed_value)));
        }
        if self.shots == 1 {
            return Err(Error::Input("sampled sweeps need at least 2 shots per setting".into()));
        }
        if self.shots > 0 && self.resamples > 0 && self.resamples < crate::stats::MIN_RESAMPLES {
            return Err(Error::Input(format!(
                "resamples must be 0 or at least {}",
                crate::stats::MIN_RESAMPLES
            )));
        }
        Ok(())
    }

    /// Value of the varying parameter at row `k`.
    pub fn point(&self, k: usize) -> f64 {
        if k + 1 == self.steps {
            self.hi
        } else {
            self.lo + (self.hi - self.lo) * k as f64 / (self.steps - 1) as f64
        }
    }

    pub fn angles(&self, k: usize) -> (f64, f64) {
        match self.fixed {
            Param::Theta => (self.fixed_value, self.point(k)),
            Param::Phi => (self.point(k), self.fixed_value),
        }
    }
}

/// Bootstrap standard errors attached to sampled rows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RowErrors {
    pub l1: f64,
    pub r1: f64,
    pub l2: f64,
    pub r2: f64,
    pub corr_ab: f64,
    pub single_lhs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub index: usize,
    pub theta: f64,
    pub phi: f64,
    pub l1: f64,
    pub r1: f64,
    pub l2: f64,
    pub r2: f64,
    pub corr_ab: f64,
    /// `<AB>/L1, <AB>/R1, <AB>/R2, <AB>/L2`.
    pub ratios: [Option<f64>; 4],
    pub single_lhs: f64,
    pub verdict: Verdict,
    pub errors: Option<RowErrors>,
}

impl SweepRow {
    pub fn ratio_undefined(&self) -> bool {
        self.ratios.iter().any(Option::is_none)
    }
}

fn row_from(index: usize, theta: f64, phi: f64, b: &Behavior, errors: Option<RowErrors>) -> SweepRow {
    let rep = classify(b, &Tolerances::default());
    SweepRow {
        index,
        theta,
        phi,
        l1: rep.bounds.l1,
        r1: rep.bounds.r1,
        l2: rep.bounds.l2,
        r2: rep.bounds.r2,
        corr_ab: b.corr_ab(),
        ratios: side_ratios(b),
        single_lhs: rep.single_lhs,
        verdict: rep.verdict,
        errors,
    }
}

/// Seed of row `k`. Each row samples three settings from `seed + setting`,
/// so rows step by 3 to keep every stream distinct.
pub fn row_seed(seed: u64, k: usize) -> u64 {
    seed.wrapping_add(3 * k as u64)
}

fn sweep_row(s: &SweepSpec, k: usize) -> Result<SweepRow> {
    let (theta, phi) = s.angles(k);
    if s.shots == 0 {
        return Ok(row_from(k, theta, phi, &ideal_behavior(theta, phi)?, None));
    }
    let state = ProductState::symmetric(QubitState::new(theta, phi)?);
    let seed = row_seed(s.seed, k);
    let table = CountTable::from_outcome_counts(&sample_all(&state, s.shots, seed)?)?;
    if s.resamples == 0 {
        let est = crate::stats::estimate_behavior(&table)?;
        return Ok(row_from(k, theta, phi, &est.behavior, None));
    }
    let rep = propagate_uncertainty(&table, s.resamples, seed)?;
    let se = rep.standard_errors;
    let errors = RowErrors {
        l1: se.l1,
        r1: se.r1,
        l2: se.l2,
        r2: se.r2,
        corr_ab: rep.mean_errors.corr_ab,
        single_lhs: se.single_lhs,
    };
    Ok(row_from(k, theta, phi, &rep.behavior, Some(errors)))
}

pub fn run_sweep(s: &SweepSpec) -> Result<Vec<SweepRow>> {
    s.validate()?;
    (0..s.steps).into_par_iter().map(|k| sweep_row(s, k)).collect()
}

/// Scientific notation with 17 significant digits, enough to round-trip.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| UNDEFINED.to_string(), fmt_f64)
}

pub const SWEEP_HEADER: [&str; 20] = [
    "index",
    "theta",
    "phi",
    "L1",
    "R1",
    "L2",
    "R2",
    "corrAB",
    "ratio_L1",
    "ratio_R1",
    "ratio_R2",
    "ratio_L2",
    "ratioUndefined",
    "singleLHS",
    "verdict",
    "se_L1",
    "se_R1",
    "se_L2",
    "se_R2",
    "se_singleLHS",
];

/// Writes sweep rows as CSV. Error columns are empty for ideal sweeps.
pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(SWEEP_HEADER)?;
    for r in rows {
        let e = r.errors;
        let se = |f: fn(&RowErrors) -> f64| e.as_ref().map_or(String::new(), |e| fmt_f64(f(e)));
        let mut rec = vec![
            r.index.to_string(),
            fmt_f64(r.theta),
            fmt_f64(r.phi),
            fmt_f64(r.l1),
            fmt_f64(r.r1),
            fmt_f64(r.l2),
            fmt_f64(r.r2),
            fmt_f64(r.corr_ab),
        ];
        rec.extend(r.ratios.map(opt));
        rec.extend([
            r.ratio_undefined().to_string(),
            fmt_f64(r.single_lhs),
            r.verdict.as_str().to_string(),
            se(|e| e.l1),
            se(|e| e.r1),
            se(|e| e.l2),
            se(|e| e.r2),
            se(|e| e.single_lhs),
        ]);
        out.write_record(&rec)?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionSpec {
    /// Points per Cartesian axis for the ball, or angular divisions for the
    /// sphere.
    pub resolution: usize,
    #[serde(rename = "surfaceOnly")]
    pub surface_only: bool,
}

impl RegionSpec {
    pub fn ball() -> Self {
        RegionSpec {
            resolution: DEFAULT_BALL_RESOLUTION,
            surface_only: false,
        }
    }

    pub fn sphere() -> Self {
        RegionSpec {
            resolution: DEFAULT_SPHERE_RESOLUTION,
            surface_only: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.resolution < 2 {
            return Err(Error::Input(format!(
                "resolution must be at least 2, got {}",
                self.resolution
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegionRow {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub verdict: Verdict,
    pub single_lhs: f64,
}

/// Verdict for the state `ρ ⊗ ρ` with Bloch vector `(x, y, z)`.
pub fn classify_bloch(r: &BlochVector) -> Result<RegionRow> {
    let b = bloch_behavior(r)?;
    let rep = classify(&b, &Tolerances::default());
    Ok(RegionRow {
        x: r.x,
        y: r.y,
        z: r.z,
        verdict: rep.verdict,
        single_lhs: rep.single_lhs,
    })
}

/// Coordinate `k` of an `n`-point grid on `[-1, 1]`. The grid is exactly
/// symmetric: coordinate `n - 1 - k` is the negation of coordinate `k`.
pub fn axis_value(k: usize, n: usize) -> f64 {
    let m = (n - 1) as f64;
    (2.0 * k as f64 - m) / m
}

fn ball_points(n: usize) -> Vec<BlochVector> {
    let mut pts = Vec::new();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let (x, y, z) = (axis_value(i, n), axis_value(j, n), axis_value(k, n));
                if let Ok(v) = BlochVector::new(x, y, z) {
                    pts.push(v);
                }
            }
        }
    }
    pts
}

/// Polar angles `pi * k / n` for `k = 0..=n` (the equator is included when
/// `n` is even) times azimuths `2 pi j / n` for `j < n`.
fn sphere_points(n: usize) -> Vec<BlochVector> {
    let mut pts = Vec::with_capacity((n + 1) * n);
    for k in 0..=n {
        let polar = PI * k as f64 / n as f64;
        for j in 0..n {
            let azimuth = 2.0 * PI * j as f64 / n as f64;
            let (x, y, z) = (polar.sin() * azimuth.cos(), polar.sin() * azimuth.sin(), polar.cos());
            let norm = (x * x + y * y + z * z).sqrt();
            pts.push(BlochVector::new(x / norm, y / norm, z / norm).expect("unit vector"));
        }
    }
    pts
}

pub fn run_region(spec: &RegionSpec) -> Result<Vec<RegionRow>> {
    spec.validate()?;
    let pts = if spec.surface_only {
        sphere_points(spec.resolution)
    } else {
        ball_points(spec.resolution)
    };
    pts.par_iter().map(classify_bloch).collect()
}

pub fn write_region_csv<W: Write>(rows: &[RegionRow], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["x", "y", "z", "verdict", "singleLHS"])?;
    for r in rows {
        out.write_record([
            fmt_f64(r.x),
            fmt_f64(r.y),
            fmt_f64(r.z),
            r.verdict.as_str().to_string(),
            fmt_f64(r.single_lhs),
        ])?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};

    #[test]
    fn optimal_row() {
        let s = SweepSpec {
            lo: FRAC_PI_4,
            hi: FRAC_PI_2,
            steps: 2,
            ..SweepSpec::ideal(Param::Theta, FRAC_PI_4)
        };
        let rows = run_sweep(&s).unwrap();
        let expected = (2f64.sqrt() - 1.0).powi(2);
        assert!((rows[0].single_lhs - expected).abs() < 1e-12);
        assert_eq!(rows[0].verdict, Verdict::BiContextual);
        assert!(rows[0].errors.is_none());
    }

    #[test]
    fn region_examples() {
        let h = FRAC_1_SQRT_2;
        let v = |x, y, z| classify_bloch(&BlochVector::new(x, y, z).unwrap()).unwrap().verdict;
        assert_eq!(v(h, h, 0.0), Verdict::BiContextual);
        assert_eq!(v(0.0, 0.0, 0.0), Verdict::NonBiContextual);
        assert_eq!(v(1.0, 0.0, 0.0), Verdict::NonBiContextual);
    }

    #[test]
    fn grid_is_symmetric() {
        for n in [2, 3, 101] {
            for k in 0..n {
                assert_eq!(axis_value(k, n), -axis_value(n - 1 - k, n));
            }
        }
        assert_eq!(axis_value(50, 101), 0.0);
    }

    #[test]
    fn sphere_grid_hits_the_optimal_state() {
        let rows = run_region(&RegionSpec::sphere()).unwrap();
        let hit = rows
            .iter()
            .find(|r| (r.x - FRAC_1_SQRT_2).abs() < 1e-12 && (r.y - FRAC_1_SQRT_2).abs() < 1e-12 && r.z.abs() < 1e-12)
            .unwrap();
        assert_eq!(hit.verdict, Verdict::BiContextual);
    }

    #[test]
    fn csv_marks_undefined_ratios() {
        // theta = 0: every mean vanishes except <AB> = 1, so L = -1 and R = 1
        // and no ratio is undefined; at theta = pi/4, phi = 0 the first
        // source has alpha1 = 1, beta1 = 0, hence L1 = R1 = 0.
        let s = SweepSpec {
            lo: 0.0,
            hi: FRAC_PI_4,
            steps: 2,
            ..SweepSpec::ideal(Param::Phi, 0.0)
        };
        let rows = run_sweep(&s).unwrap();
        assert!(!rows[0].ratio_undefined());
        assert!(rows[1].ratio_undefined());
        let mut buf = Vec::new();
        write_sweep_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("index,theta,phi,L1,"));
        assert!(text.lines().nth(2).unwrap().contains(UNDEFINED));
    }

    #[test]
    fn invalid_specs() {
        let mut s = SweepSpec::ideal(Param::Theta, FRAC_PI_4);
        s.steps = 1;
        assert!(run_sweep(&s).is_err());
        let mut s = SweepSpec::ideal(Param::Theta, FRAC_PI_4);
        s.hi = s.lo;
        assert!(run_sweep(&s).is_err());
        assert!(run_region(&RegionSpec {
            resolution: 1,
            surface_only: false
        })
        .is_err());
    }
}
