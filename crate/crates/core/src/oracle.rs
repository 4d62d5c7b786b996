//! Brute-force cross-checks of the analytic decision procedure.
//!
//! Nothing here is needed to reach a verdict. The grid scan searches the
//! hyperbola `c1 * c2 = <AB>` point by point instead of reasoning about
//! rectangle corners, the deterministic enumeration re-sums a factorized model
//! strategy by strategy, and the bisection locates where the verdict of the
//! ideal quantum behavior flips along a line of constant `phi`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::behavior::{Behavior, Tolerances, CELLS};
use crate::decision::{build_witness, classify, compute_bounds, decide_single, Verdict};
use crate::error::{Error, Result};
use crate::quantum::ideal_behavior;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleConfig {
    /// Grid points per axis, endpoints included.
    pub grid_points: usize,
    pub tolerance: f64,
    pub bisection_tol: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            grid_points: 10_001,
            tolerance: 1e-9,
            bisection_tol: 1e-10,
        }
    }
}

impl OracleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid_points < 3 {
            return Err(Error::Input(format!(
                "grid_points must be at least 3, got {}",
                self.grid_points
            )));
        }
        for (name, v) in [("tolerance", self.tolerance), ("bisection_tol", self.bisection_tol)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Input(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// Outcome of the grid search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridResult {
    pub feasible: bool,
    /// A hyperbola point inside the (tolerance-widened) rectangle.
    pub point: Option<(f64, f64)>,
    /// Which scan found a point; both are false when only the zero rule fired.
    #[serde(rename = "foundByC1")]
    pub found_by_c1: bool,
    #[serde(rename = "foundByC2")]
    pub found_by_c2: bool,
}

fn grid(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    let step = (hi - lo) / (n - 1) as f64;
    (0..n).map(move |k| if k + 1 == n { hi } else { lo + step * k as f64 })
}

/// Walks `x` over a grid on `[lo, hi]` and returns the first `x` whose
/// partner `c / x` lands in `[olo - tol, ohi + tol]`.
fn scan_axis(c: f64, (lo, hi): (f64, f64), (olo, ohi): (f64, f64), n: usize, tol: f64) -> Option<(f64, f64)> {
    for x in grid(lo, hi, n) {
        if x == 0.0 {
            // Any partner value solves 0 * y = c when c vanishes.
            if c.abs() <= tol && olo <= ohi + tol {
                return Some((0.0, 0.0f64.clamp(olo, ohi)));
            }
            continue;
        }
        let y = c / x;
        if y >= olo - tol && y <= ohi + tol {
            return Some((x, y));
        }
    }
    None
}

/// Searches for `(c1, c2)` on the hyperbola inside the rectangle by direct
/// scan over a uniform grid in `c1`, then in `c2` as a cross-check.
///
/// Because the grids contain the rectangle's edges and the hyperbola enters
/// the rectangle through an edge whenever it meets it, the two scans together
/// only miss intersections that graze a corner within a few ulps.
pub fn grid_feasibility(b: &Behavior, cfg: &OracleConfig) -> GridResult {
    let r = compute_bounds(b);
    let c = b.corr_ab();
    let n = cfg.grid_points.max(3);
    let by_c1 = scan_axis(c, (r.l1, r.r1), (r.l2, r.r2), n, cfg.tolerance);
    let by_c2 = scan_axis(c, (r.l2, r.r2), (r.l1, r.r1), n, cfg.tolerance).map(|(c2, c1)| (c1, c2));
    // With c = 0 a zero correlation on either axis suffices, and the grid
    // may step over 0 itself, so that case is checked directly and preferred.
    let zero = (c.abs() <= cfg.tolerance).then(|| {
        if r.l1 <= cfg.tolerance && r.r1 >= -cfg.tolerance {
            Some((0.0, 0.0f64.clamp(r.l2, r.r2)))
        } else if r.l2 <= cfg.tolerance && r.r2 >= -cfg.tolerance {
            Some((0.0f64.clamp(r.l1, r.r1), 0.0))
        } else {
            None
        }
    });
    let zero = zero.flatten();
    let point = zero.or(by_c1).or(by_c2);
    GridResult {
        feasible: point.is_some(),
        point,
        found_by_c1: by_c1.is_some(),
        found_by_c2: by_c2.is_some(),
    }
}

/// Weights of a factorized mixture of deterministic strategies.
///
/// `source1[k]` is the weight of `(alpha1, beta1) = CELLS[k]`, likewise for
/// source 2; strategy `(j, k)` carries weight `source1[j] * source2[k]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Decomposition {
    pub source1: [f64; 4],
    pub source2: [f64; 4],
}

impl Decomposition {
    /// Sums `(alpha1, alpha2, beta1, beta2, <AB>, <A>, <B>)` over all sixteen
    /// strategies.
    pub fn resum(&self) -> [f64; 7] {
        let mut m = [0.0; 7];
        for (j, &(a1, b1)) in CELLS.iter().enumerate() {
            for (k, &(a2, b2)) in CELLS.iter().enumerate() {
                let w = self.source1[j] * self.source2[k];
                let (a1, b1, a2, b2) = (a1.value(), b1.value(), a2.value(), b2.value());
                let a = a1 * a2;
                let bb = b1 * b2;
                for (slot, v) in m.iter_mut().zip([a1, a2, b1, b2, a * bb, a, bb]) {
                    *slot += w * v;
                }
            }
        }
        m
    }

    pub fn is_valid(&self, tol: f64) -> bool {
        [self.source1, self.source2]
            .iter()
            .all(|w| w.iter().all(|&x| x >= -tol) && (w.iter().sum::<f64>() - 1.0).abs() <= tol)
    }
}

/// Expresses `b` as a factorized mixture of the sixteen deterministic
/// two-source strategies, or `None` when no such mixture exists.
///
/// The weights come from the witness construction; they are accepted only
/// after a strategy-by-strategy re-summation reproduces every mean of `b`.
pub fn enumerate_deterministic(b: &Behavior) -> Option<Decomposition> {
    let tol = Tolerances::default();
    if classify(b, &tol).verdict == Verdict::BiContextual {
        return None;
    }
    let w = build_witness(b, &compute_bounds(b)).ok()?;
    let d = Decomposition {
        source1: w.mu1.cells(),
        source2: w.mu2.cells(),
    };
    if !d.is_valid(tol.consistency) {
        return None;
    }
    let m = d.resum();
    let target = b.moments();
    let ok_moments = m[..5].iter().zip(target).all(|(x, t)| (x - t).abs() <= tol.consistency);
    let ok_sources = [(m[5], b.mean_a()), (m[6], b.mean_b())]
        .iter()
        .all(|&(x, t)| t.is_none_or(|t| (x - t).abs() <= tol.consistency));
    (ok_moments && ok_sources).then_some(d)
}

fn verdict_at(theta: f64, phi: f64) -> Result<Verdict> {
    Ok(classify(&ideal_behavior(theta, phi)?, &Tolerances::default()).verdict)
}

/// Locates the `theta` in `[theta_lo, theta_hi]` where the verdict of the
/// ideal behavior at fixed `phi` flips, assuming a single flip.
pub fn bisect_violation_boundary(phi: f64, theta_lo: f64, theta_hi: f64, cfg: &OracleConfig) -> Result<f64> {
    cfg.validate()?;
    if theta_lo.is_nan() || theta_hi.is_nan() || theta_lo >= theta_hi {
        return Err(Error::Precondition(format!("empty bracket [{theta_lo}, {theta_hi}]")));
    }
    let (mut lo, mut hi) = (theta_lo, theta_hi);
    let v_lo = verdict_at(lo, phi)?;
    let v_hi = verdict_at(hi, phi)?;
    if v_lo == v_hi {
        return Err(Error::Precondition(format!(
            "verdict is {} at both theta = {theta_lo} and theta = {theta_hi} (phi = {phi})",
            v_lo.as_str()
        )));
    }
    while hi - lo > cfg.bisection_tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if verdict_at(mid, phi)? == v_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Coarse scan of `theta` over `[lo, hi]` at fixed `phi`; returns the brackets
/// between consecutive points whose verdicts differ.
pub fn flip_brackets(phi: f64, lo: f64, hi: f64, step: f64) -> Result<Vec<(f64, f64)>> {
    if step.is_nan() || lo.is_nan() || hi.is_nan() || step <= 0.0 || lo >= hi {
        return Err(Error::Input("flip scan needs lo < hi and step > 0".into()));
    }
    let n = ((hi - lo) / step).ceil() as usize;
    let thetas: Vec<f64> = (0..=n).map(|k| (lo + step * k as f64).min(hi)).collect();
    let verdicts = thetas.iter().map(|&t| verdict_at(t, phi)).collect::<Result<Vec<_>>>()?;
    Ok(thetas
        .windows(2)
        .zip(verdicts.windows(2))
        .filter(|(_, v)| v[0] != v[1])
        .map(|(t, _)| (t[0], t[1]))
        .collect())
}

/// A uniformly random behavior: four means and `<AB>` independently uniform
/// in `[-1, 1]`.
pub fn random_behavior<R: Rng>(rng: &mut R) -> Behavior {
    let mut m = [0.0; 5];
    for x in &mut m {
        *x = rng.random_range(-1.0..=1.0);
    }
    Behavior::new(m[0], m[1], m[2], m[3], m[4]).expect("means drawn from [-1, 1]")
}

/// Tally of grid-versus-analytic comparisons over random behaviors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AgreementSummary {
    pub samples: usize,
    pub seed: u64,
    #[serde(rename = "bicontextual")]
    pub bicontextual: usize,
    pub agreements: usize,
    /// Disagreements with `|single_lhs|` below the band width.
    #[serde(rename = "bandDisagreements")]
    pub band_disagreements: usize,
    /// Disagreements anywhere else; must be zero.
    #[serde(rename = "outsideBandDisagreements")]
    pub outside_band_disagreements: usize,
    #[serde(rename = "bandWidth")]
    pub band_width: f64,
}

impl AgreementSummary {
    pub fn passed(&self) -> bool {
        self.outside_band_disagreements == 0
    }
}

/// Width of the `|single_lhs|` band in which a grid miss is tolerated.
pub const BOUNDARY_BAND: f64 = 1e-4;

/// Compares [`grid_feasibility`] against [`decide_single`] on `samples`
/// random behaviors. Sample `k` is drawn from its own stream, so the result
/// does not depend on the thread count.
pub fn random_agreement(samples: usize, seed: u64, cfg: &OracleConfig) -> AgreementSummary {
    let per_sample: Vec<(bool, bool, f64)> = (0..samples)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let b = random_behavior(&mut rng);
            let rep = decide_single(&b);
            let grid = grid_feasibility(&b, cfg).feasible;
            (rep.verdict == Verdict::NonBiContextual, grid, rep.single_lhs)
        })
        .collect();
    let mut s = AgreementSummary {
        samples,
        seed,
        bicontextual: 0,
        agreements: 0,
        band_disagreements: 0,
        outside_band_disagreements: 0,
        band_width: BOUNDARY_BAND,
    };
    for (analytic, grid, lhs) in per_sample {
        if !analytic {
            s.bicontextual += 1;
        }
        if analytic == grid {
            s.agreements += 1;
        } else if lhs.abs() < BOUNDARY_BAND {
            s.band_disagreements += 1;
        } else {
            s.outside_band_disagreements += 1;
        }
    }
    s
}
