use serde::{Deserialize, Serialize};

use super::{classify, CorrelationBounds, Verdict};
use crate::behavior::{pair_distribution_from_moments, Behavior, PairDistribution, Realization, Tolerances};
use crate::error::{Error, Result};

/// Explicit factorized model reproducing a behavior.
///
/// Source `i` is described by `mu_i`, a distribution over `(alpha_i, beta_i)`
/// with correlation `c_i`. Independence of the sources makes every measurable
/// mean a function of `mu1` and `mu2` alone.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WitnessModel {
    pub c1: f64,
    pub c2: f64,
    pub mu1: PairDistribution,
    pub mu2: PairDistribution,
}

impl WitnessModel {
    /// Builds `mu_i` from the behavior's means and the chosen correlations and
    /// checks the result against the behavior.
    pub fn from_correlations(b: &Behavior, c1: f64, c2: f64, tol: &Tolerances) -> Result<Self> {
        let mu = |source: usize, c: f64| -> Result<PairDistribution> {
            let (a, bm) = b.source_means(source);
            let c = c.clamp(-1.0, 1.0);
            match pair_distribution_from_moments(a, bm, c)? {
                Realization::Valid(d) => Ok(d),
                Realization::Negative(cert) => Err(Error::Witness(format!(
                    "source {source} distribution is negative: {cert}"
                ))),
            }
        };
        let w = WitnessModel {
            c1,
            c2,
            mu1: mu(1, c1)?,
            mu2: mu(2, c2)?,
        };
        w.verify(b, tol)?;
        Ok(w)
    }

    /// `(alpha1, alpha2, beta1, beta2, corrAB)` implied by the model.
    pub fn induced_moments(&self) -> [f64; 5] {
        [
            self.mu1.mean_q(),
            self.mu2.mean_q(),
            self.mu1.mean_r(),
            self.mu2.mean_r(),
            self.mu1.correlation() * self.mu2.correlation(),
        ]
    }

    /// `(<A>, <B>)` implied by the model.
    pub fn induced_source_means(&self) -> (f64, f64) {
        (
            self.mu1.mean_q() * self.mu2.mean_q(),
            self.mu1.mean_r() * self.mu2.mean_r(),
        )
    }

    pub fn verify(&self, b: &Behavior, tol: &Tolerances) -> Result<()> {
        let eps = tol.consistency;
        let bounds = super::compute_bounds(b);
        for (name, c, (lo, hi)) in [("c1", self.c1, bounds.interval(1)), ("c2", self.c2, bounds.interval(2))] {
            if c < lo - eps || c > hi + eps {
                return Err(Error::Witness(format!("{name} = {c} outside [{lo}, {hi}]")));
            }
        }
        if (self.c1 * self.c2 - b.corr_ab()).abs() > eps {
            return Err(Error::Witness(format!(
                "c1 * c2 = {} but <AB> = {}",
                self.c1 * self.c2,
                b.corr_ab()
            )));
        }
        let names = ["alpha1", "alpha2", "beta1", "beta2", "corrAB"];
        for ((name, induced), target) in names.iter().zip(self.induced_moments()).zip(b.moments()) {
            if (induced - target).abs() > eps {
                return Err(Error::Witness(format!(
                    "model gives {name} = {induced}, behavior has {target}"
                )));
            }
        }
        let (ma, mb) = self.induced_source_means();
        for (name, induced, target) in [("meanA", ma, b.mean_a()), ("meanB", mb, b.mean_b())] {
            if let Some(t) = target {
                if (induced - t).abs() > eps {
                    return Err(Error::Witness(format!(
                        "model gives {name} = {induced}, behavior has {t}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Constructs the witness model of a non-bi-contextual behavior.
///
/// Among all points of the hyperbola inside the rectangle the one with the
/// smallest `|c1| + |c2|` is chosen; ties go to the smaller `c1 + c2`, then the
/// smaller `c1`.
pub fn build_witness(b: &Behavior, bounds: &CorrelationBounds) -> Result<WitnessModel> {
    build_witness_with(b, bounds, &Tolerances::default())
}

pub(crate) fn build_witness_with(b: &Behavior, bounds: &CorrelationBounds, tol: &Tolerances) -> Result<WitnessModel> {
    if classify(b, tol).verdict == Verdict::BiContextual {
        return Err(Error::NoWitness);
    }
    let (c1, c2) = select_correlations(b.corr_ab(), bounds, tol.verdict)
        .ok_or_else(|| Error::Witness("hyperbola misses the rectangle despite the verdict".into()))?;
    WitnessModel::from_correlations(b, c1, c2, tol)
}

#[derive(Clone, Copy)]
struct Candidate {
    c1: f64,
    c2: f64,
}

impl Candidate {
    fn key(&self) -> (f64, f64, f64) {
        (self.c1.abs() + self.c2.abs(), self.c1 + self.c2, self.c1)
    }
}

fn better(a: Candidate, b: Candidate) -> Candidate {
    let (ka, kb) = (a.key(), b.key());
    let ord =
        ka.0.total_cmp(&kb.0)
            .then(ka.1.total_cmp(&kb.1))
            .then(ka.2.total_cmp(&kb.2));
    if ord.is_le() {
        a
    } else {
        b
    }
}

/// Magnitudes `[lo, hi]` reachable in `[l, r]` on the side of zero given by `sign`.
fn magnitudes(l: f64, r: f64, sign: f64) -> Option<(f64, f64)> {
    let (lo, hi) = if sign > 0.0 {
        (l.max(0.0), r)
    } else {
        ((-r).max(0.0), -l)
    };
    (hi > 0.0 && lo <= hi).then_some((lo, hi))
}

fn select_correlations(c: f64, r: &CorrelationBounds, tol: f64) -> Option<(f64, f64)> {
    let mut best: Option<Candidate> = None;
    let mut offer = |cand: Candidate| {
        best = Some(match best {
            Some(b) => better(b, cand),
            None => cand,
        });
    };

    if c.abs() <= tol {
        if r.l1 <= tol && r.r1 >= -tol {
            offer(Candidate {
                c1: 0.0,
                c2: 0.0f64.clamp(r.l2, r.r2),
            });
        }
        if r.l2 <= tol && r.r2 >= -tol {
            offer(Candidate {
                c1: 0.0f64.clamp(r.l1, r.r1),
                c2: 0.0,
            });
        }
        return best.map(|b| (b.c1, b.c2));
    }

    let target = c.abs();
    for s1 in [1.0, -1.0] {
        let s2 = s1 * c.signum();
        let (Some(m1), Some(m2)) = (magnitudes(r.l1, r.r1, s1), magnitudes(r.l2, r.r2, s2)) else {
            continue;
        };
        // |c1| must satisfy both its own range and |c2| = target / |c1| in m2.
        let lo = m1.0.max(target / m2.1);
        let hi = if m2.0 > 0.0 { m1.1.min(target / m2.0) } else { m1.1 };
        let t = if lo <= hi {
            target.sqrt().clamp(lo, hi)
        } else if lo - hi <= tol.max(1e-12) * lo.max(1.0) * 16.0 {
            0.5 * (lo + hi)
        } else {
            continue;
        };
        let c1 = s1 * t;
        offer(Candidate { c1, c2: c / c1 });
    }
    best.map(|b| (b.c1, b.c2))
}
