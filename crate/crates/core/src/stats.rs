//! From outcome counts to behaviors with error bars.
//!
//! Means carry the analytic standard error `sqrt((1 - m²) / (n - 1))`. Every
//! derived quantity (bounds, corner range, side ratios, `single_lhs`) gets a
//! bootstrap standard error: each setting's counts are resampled
//! multinomially, the decision is recomputed, and the spread of the resampled
//! values is reported. The three settings are treated as independent runs.

use std::io::Read;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::behavior::{Behavior, PairDistribution, Tolerances};
use crate::decision::{classify, necessary_bound_check, side_ratios, DecisionReport, SideResultsArray, Verdict};
use crate::error::{Error, Result};
use crate::quantum::{Counts, OutcomeCounts, Setting};

/// Smallest bootstrap size accepted.
pub const MIN_RESAMPLES: usize = 100;

/// Outcome counts of all three settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CountTable {
    pub alpha: Counts,
    pub beta: Counts,
    /// Cells are `(A, B)` label pairs.
    pub joint: Counts,
}

impl CountTable {
    pub fn get(&self, s: Setting) -> &Counts {
        match s {
            Setting::AlphaLocal => &self.alpha,
            Setting::BetaLocal => &self.beta,
            Setting::JointMs => &self.joint,
        }
    }

    fn get_mut(&mut self, s: Setting) -> &mut Counts {
        match s {
            Setting::AlphaLocal => &mut self.alpha,
            Setting::BetaLocal => &mut self.beta,
            Setting::JointMs => &mut self.joint,
        }
    }

    pub fn shots(&self, s: Setting) -> u64 {
        self.get(s).total()
    }

    /// Builds the table from per-setting records. Every setting must appear
    /// exactly once and its `shots` field must match its counts.
    pub fn from_outcome_counts(records: &[OutcomeCounts]) -> Result<Self> {
        let mut table = CountTable::default();
        let mut seen = [false; 3];
        for rec in records {
            let i = rec.setting.index() as usize;
            if seen[i] {
                return Err(Error::Input(format!("setting {} listed twice", rec.setting.name())));
            }
            seen[i] = true;
            if rec.counts.total() != rec.shots {
                return Err(Error::Input(format!(
                    "setting {}: counts sum to {} but shots = {}",
                    rec.setting.name(),
                    rec.counts.total(),
                    rec.shots
                )));
            }
            *table.get_mut(rec.setting) = rec.counts;
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(Error::Input(format!(
                "no counts for setting {}",
                Setting::ALL[i].name()
            )));
        }
        Ok(table)
    }

    pub fn to_outcome_counts(&self) -> [OutcomeCounts; 3] {
        Setting::ALL.map(|s| OutcomeCounts {
            setting: s,
            shots: self.shots(s),
            counts: *self.get(s),
        })
    }

    /// Empirical distribution of one setting.
    pub fn distribution(&self, s: Setting) -> Result<PairDistribution> {
        let c = self.get(s);
        let n = c.total();
        if n == 0 {
            return Err(Error::Input(format!("setting {} has no shots", s.name())));
        }
        let cells = c.as_array().map(|k| k as f64 / n as f64);
        PairDistribution::from_cells(cells, 1e-12)
    }

    /// Reads aggregated counts as JSON: either an array of per-setting records
    /// or an object with a `counts` array (the `simulate` output).
    pub fn from_json_reader<R: Read>(r: R) -> Result<Self> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Input {
            Bare(Vec<OutcomeCounts>),
            Wrapped { counts: Vec<OutcomeCounts> },
        }
        let records = match serde_json::from_reader(r)? {
            Input::Bare(v) | Input::Wrapped { counts: v } => v,
        };
        Self::from_outcome_counts(&records)
    }

    /// Reads per-shot records with header `setting,o1,o2`, outcomes `+1`/`-1`.
    pub fn from_csv_reader<R: Read>(r: R) -> Result<Self> {
        #[derive(Deserialize)]
        struct Shot {
            setting: String,
            o1: String,
            o2: String,
        }
        fn outcome(s: &str, line: u64) -> Result<crate::behavior::Outcome> {
            match s.trim() {
                "+1" | "1" => Ok(crate::behavior::Outcome::Plus),
                "-1" => Ok(crate::behavior::Outcome::Minus),
                other => Err(Error::Input(format!(
                    "record {line}: outcome {other:?} is not +1 or -1"
                ))),
            }
        }
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
        let headers = rdr.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["setting", "o1", "o2"] {
            return Err(Error::Input(format!(
                "per-shot CSV header must be setting,o1,o2, found {}",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut table = CountTable::default();
        for (k, rec) in rdr.deserialize::<Shot>().enumerate() {
            let line = k as u64 + 2;
            let rec = rec?;
            let s = Setting::from_name(rec.setting.trim())
                .ok_or_else(|| Error::Input(format!("record {line}: unknown setting {:?}", rec.setting)))?;
            table
                .get_mut(s)
                .record(outcome(&rec.o1, line)?, outcome(&rec.o2, line)?);
        }
        Ok(table)
    }

    /// Dispatches on the file extension: `.csv` is per-shot, anything else JSON.
    pub fn from_path(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
            Self::from_csv_reader(f)
        } else {
            Self::from_json_reader(f)
        }
    }
}

/// Standard error of a `±1` mean `m` estimated from `n` shots.
pub fn mean_standard_error(m: f64, n: u64) -> f64 {
    ((1.0 - m * m).max(0.0) / (n as f64 - 1.0)).sqrt()
}

/// Analytic standard errors of the measured means.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanErrors {
    pub alpha1: f64,
    pub alpha2: f64,
    pub beta1: f64,
    pub beta2: f64,
    #[serde(rename = "corrAB")]
    pub corr_ab: f64,
    #[serde(rename = "meanA")]
    pub mean_a: f64,
    #[serde(rename = "meanB")]
    pub mean_b: f64,
}

impl MeanErrors {
    pub const ZERO: MeanErrors = MeanErrors {
        alpha1: 0.0,
        alpha2: 0.0,
        beta1: 0.0,
        beta2: 0.0,
        corr_ab: 0.0,
        mean_a: 0.0,
        mean_b: 0.0,
    };
}

#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    /// Five-mean behavior. Sampling noise breaks `<A> = <alpha1><alpha2>`
    /// exactly, so the source means are reported separately.
    pub behavior: Behavior,
    pub mean_a: f64,
    pub mean_b: f64,
    pub errors: MeanErrors,
}

/// Empirical means and their standard errors.
pub fn estimate_behavior(c: &CountTable) -> Result<Estimate> {
    for s in Setting::ALL {
        let n = c.shots(s);
        if n < 2 {
            return Err(Error::Input(format!(
                "setting {} needs at least 2 shots, has {n}",
                s.name()
            )));
        }
    }
    let [a, b, j] = Setting::ALL.map(|s| c.distribution(s).expect("shots checked"));
    let behavior = Behavior::new(a.mean_q(), a.mean_r(), b.mean_q(), b.mean_r(), j.correlation())?;
    let se = |m: f64, s: Setting| mean_standard_error(m, c.shots(s));
    let errors = MeanErrors {
        alpha1: se(a.mean_q(), Setting::AlphaLocal),
        alpha2: se(a.mean_r(), Setting::AlphaLocal),
        beta1: se(b.mean_q(), Setting::BetaLocal),
        beta2: se(b.mean_r(), Setting::BetaLocal),
        corr_ab: se(j.correlation(), Setting::JointMs),
        mean_a: se(j.mean_q(), Setting::JointMs),
        mean_b: se(j.mean_r(), Setting::JointMs),
    };
    Ok(Estimate {
        behavior,
        mean_a: j.mean_q(),
        mean_b: j.mean_r(),
        errors,
    })
}

/// The numeric outputs of a decision that receive error bars.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quantities {
    #[serde(rename = "L1")]
    pub l1: f64,
    #[serde(rename = "R1")]
    pub r1: f64,
    #[serde(rename = "L2")]
    pub l2: f64,
    #[serde(rename = "R2")]
    pub r2: f64,
    pub min: f64,
    pub max: f64,
    #[serde(rename = "singleLHS")]
    pub single_lhs: f64,
    /// `<AB>/L1, <AB>/R1, <AB>/R2, <AB>/L2`; `null` where undefined.
    pub ratios: [Option<f64>; 4],
}

impl Quantities {
    pub fn of(b: &Behavior, report: &DecisionReport) -> Self {
        let r = report.bounds;
        Quantities {
            l1: r.l1,
            r1: r.r1,
            l2: r.l2,
            r2: r.r2,
            min: report.product_min,
            max: report.product_max,
            single_lhs: report.single_lhs,
            ratios: side_ratios(b),
        }
    }

    fn scalars(&self) -> [f64; 7] {
        [self.l1, self.r1, self.l2, self.r2, self.min, self.max, self.single_lhs]
    }

    pub const ZERO: Quantities = Quantities {
        l1: 0.0,
        r1: 0.0,
        l2: 0.0,
        r2: 0.0,
        min: 0.0,
        max: 0.0,
        single_lhs: 0.0,
        ratios: [Some(0.0); 4],
    };
}

/// Checks `<A> = <alpha1><alpha2>` and `<B> = <beta1><beta2>` on the data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndependenceCheck {
    pub observable: char,
    pub measured: f64,
    pub product: f64,
    /// `(measured - product) / SE`, `null` when the SE vanishes.
    pub z: Option<f64>,
}

fn independence(
    observable: char,
    measured: f64,
    se_measured: f64,
    x: (f64, f64),
    se_x: (f64, f64),
) -> IndependenceCheck {
    let product = x.0 * x.1;
    // Delta method for the product of two independent means.
    let var = se_measured.powi(2) + (x.1 * se_x.0).powi(2) + (x.0 * se_x.1).powi(2);
    let diff = measured - product;
    IndependenceCheck {
        observable,
        measured,
        product,
        z: (var > 0.0).then(|| diff / var.sqrt()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Shots {
    pub alpha: u64,
    pub beta: u64,
    pub joint: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UncertainReport {
    pub verdict: Verdict,
    pub behavior: Behavior,
    #[serde(rename = "meanErrors")]
    pub mean_errors: MeanErrors,
    #[serde(flatten)]
    pub estimate: Quantities,
    pub sides: SideResultsArray,
    #[serde(rename = "necessaryBound")]
    pub necessary_bound: f64,
    #[serde(rename = "standardErrors")]
    pub standard_errors: Quantities,
    /// `single_lhs / SE(single_lhs)`; `null` when the SE is zero.
    pub significance: Option<f64>,
    #[serde(rename = "sourceIndependence")]
    pub source_independence: Vec<IndependenceCheck>,
    pub shots: Shots,
    pub resamples: usize,
    pub seed: u64,
}

fn decide(b: &Behavior) -> DecisionReport {
    classify(b, &Tolerances::default())
}

fn resample_counts(c: &Counts, rng: &mut ChaCha8Rng) -> Counts {
    let cells = c.as_array();
    let n = c.total();
    let mut left = n;
    let mut mass_left = n;
    let mut out = [0u64; 4];
    for k in 0..3 {
        if left == 0 || mass_left == 0 {
            break;
        }
        let p = (cells[k] as f64 / mass_left as f64).clamp(0.0, 1.0);
        let draw = Binomial::new(left, p).expect("p in [0, 1]").sample(rng);
        out[k] = draw;
        left -= draw;
        mass_left -= cells[k];
    }
    out[3] = left;
    Counts::from_array(out)
}

fn resample_table(c: &CountTable, rng: &mut ChaCha8Rng) -> CountTable {
    CountTable {
        alpha: resample_counts(&c.alpha, rng),
        beta: resample_counts(&c.beta, rng),
        joint: resample_counts(&c.joint, rng),
    }
}

fn std_dev(xs: impl Iterator<Item = f64>) -> Option<f64> {
    let v: Vec<f64> = xs.collect();
    if v.len() < 2 {
        return None;
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    Some((v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt())
}

/// Bootstrap standard errors of every decision quantity.
///
/// Resample `r` draws from ChaCha8 stream `r` of `seed`, so the report is the
/// same for any thread count.
pub fn bootstrap_errors(c: &CountTable, resamples: usize, seed: u64) -> Result<Quantities> {
    if resamples < MIN_RESAMPLES {
        return Err(Error::Input(format!(
            "at least {MIN_RESAMPLES} resamples are required, got {resamples}"
        )));
    }
    let draws: Vec<Quantities> = (0..resamples)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(r as u64);
            let t = resample_table(c, &mut rng);
            let b = estimate_behavior(&t).expect("resampling keeps shot counts").behavior;
            Quantities::of(&b, &decide(&b))
        })
        .collect();
    let scalar = |i: usize| std_dev(draws.iter().map(|q| q.scalars()[i])).unwrap_or(0.0);
    let ratio = |i: usize| std_dev(draws.iter().filter_map(|q| q.ratios[i]));
    Ok(Quantities {
        l1: scalar(0),
        r1: scalar(1),
        l2: scalar(2),
        r2: scalar(3),
        min: scalar(4),
        max: scalar(5),
        single_lhs: scalar(6),
        ratios: [0, 1, 2, 3].map(ratio),
    })
}

/// Point estimates, bootstrap errors and significance for a count table.
pub fn propagate_uncertainty(c: &CountTable, resamples: usize, seed: u64) -> Result<UncertainReport> {
    let est = estimate_behavior(c)?;
    let b = &est.behavior;
    let report = decide(b);
    let point = Quantities::of(b, &report);
    let mut se = bootstrap_errors(c, resamples, seed)?;
    for k in 0..4 {
        if point.ratios[k].is_none() {
            se.ratios[k] = None;
        }
    }
    let e = est.errors;
    let source_independence = vec![
        independence(
            'A',
            est.mean_a,
            e.mean_a,
            (b.alpha1(), b.alpha2()),
            (e.alpha1, e.alpha2),
        ),
        independence('B', est.mean_b, e.mean_b, (b.beta1(), b.beta2()), (e.beta1, e.beta2)),
    ];
    Ok(UncertainReport {
        verdict: report.verdict,
        behavior: b.clone(),
        mean_errors: e,
        estimate: point,
        sides: report.side_results,
        necessary_bound: necessary_bound_check(b).0,
        standard_errors: se,
        significance: (se.single_lhs > 0.0).then(|| point.single_lhs / se.single_lhs),
        source_independence,
        shots: Shots {
            alpha: c.alpha.total(),
            beta: c.beta.total(),
            joint: c.joint.total(),
        },
        resamples,
        seed,
    })
}

/// Report for exact statistics: every standard error is zero.
pub fn ideal_report(b: &Behavior, seed: u64) -> UncertainReport {
    let report = decide(b);
    let point = Quantities::of(b, &report);
    let mut se = Quantities::ZERO;
    se.ratios = point.ratios.map(|r| r.map(|_| 0.0));
    let (ma, mb) = (
        b.mean_a().unwrap_or(b.alpha1() * b.alpha2()),
        b.mean_b().unwrap_or(b.beta1() * b.beta2()),
    );
    UncertainReport {
        verdict: report.verdict,
        behavior: b.moments_only(),
        mean_errors: MeanErrors::ZERO,
        estimate: point,
        sides: report.side_results,
        necessary_bound: necessary_bound_check(b).0,
        standard_errors: se,
        significance: None,
        source_independence: vec![
            independence('A', ma, 0.0, (b.alpha1(), b.alpha2()), (0.0, 0.0)),
            independence('B', mb, 0.0, (b.beta1(), b.beta2()), (0.0, 0.0)),
        ],
        shots: Shots {
            alpha: 0,
            beta: 0,
            joint: 0,
        },
        resamples: 0,
        seed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(a: [u64; 4], b: [u64; 4], j: [u64; 4]) -> CountTable {
        CountTable {
            alpha: Counts::from_array(a),
            beta: Counts::from_array(b),
            joint: Counts::from_array(j),
        }
    }

    #[test]
    fn means_are_count_weighted_averages() {
        // alpha: ++ 3, +- 1, -+ 0, -- 4  (n = 8)
        let t = table([3, 1, 0, 4], [2, 2, 2, 2], [5, 0, 0, 3]);
        let e = estimate_behavior(&t).unwrap();
        let b = e.behavior;
        assert_eq!(b.alpha1(), (3.0 + 1.0 - 0.0 - 4.0) / 8.0);
        assert_eq!(b.alpha2(), (3.0 - 1.0 + 0.0 - 4.0) / 8.0);
        assert_eq!(b.beta1(), 0.0);
        assert_eq!(b.corr_ab(), 1.0);
        assert_eq!(e.mean_a, 2.0 / 8.0);
        assert_eq!(e.errors.beta1, (1.0f64 / 7.0).sqrt());
        assert_eq!(e.errors.corr_ab, 0.0);
    }

    #[test]
    fn too_few_shots() {
        let t = table([1, 0, 0, 0], [2, 0, 0, 0], [2, 0, 0, 0]);
        assert!(matches!(estimate_behavior(&t), Err(Error::Input(_))));
    }

    #[test]
    fn deterministic_counts_have_no_spread() {
        let t = table([50, 0, 0, 0], [50, 0, 0, 0], [50, 0, 0, 0]);
        let r = propagate_uncertainty(&t, 100, 3).unwrap();
        assert_eq!(r.estimate.single_lhs, 0.0);
        assert_eq!(r.standard_errors.single_lhs, 0.0);
        assert_eq!(r.standard_errors.l1, 0.0);
        assert!(r.significance.is_none());
        assert_eq!(r.verdict, Verdict::NonBiContextual);
    }

    #[test]
    fn resampling_preserves_totals_and_zero_cells() {
        let c = Counts::from_array([10, 0, 7, 3]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let r = resample_counts(&c, &mut rng);
            assert_eq!(r.total(), 20);
            assert_eq!(r.pm, 0);
        }
    }

    #[test]
    fn rejects_small_bootstrap() {
        let t = table([5, 5, 5, 5], [5, 5, 5, 5], [5, 5, 5, 5]);
        assert!(propagate_uncertainty(&t, 99, 0).is_err());
    }

    #[test]
    fn csv_ingestion() {
        let csv = "setting,o1,o2\nalpha,+1,-1\nalpha,-1,-1\nbeta,1,1\nbeta,+1,+1\njoint,-1,+1\njoint,+1,+1\n";
        let t = CountTable::from_csv_reader(csv.as_bytes()).unwrap();
        assert_eq!(t.alpha.as_array(), [0, 1, 0, 1]);
        assert_eq!(t.beta.as_array(), [2, 0, 0, 0]);
        assert_eq!(t.joint.as_array(), [1, 0, 1, 0]);
        assert!(CountTable::from_csv_reader("setting,o1,o2\ngamma,1,1\n".as_bytes()).is_err());
        assert!(CountTable::from_csv_reader("setting,o1,o2\nalpha,0,1\n".as_bytes()).is_err());
        assert!(CountTable::from_csv_reader("s,a,b\nalpha,1,1\n".as_bytes()).is_err());
    }

    #[test]
    fn json_ingestion_round_trip() {
        let t = table([1, 2, 3, 4], [4, 3, 2, 1], [0, 5, 5, 0]);
        let bare = serde_json::to_string(&t.to_outcome_counts()).unwrap();
        assert_eq!(CountTable::from_json_reader(bare.as_bytes()).unwrap(), t);
        let wrapped = format!(r#"{{"counts": {bare}, "other": 1}}"#);
        assert_eq!(CountTable::from_json_reader(wrapped.as_bytes()).unwrap(), t);
        let missing = r#"[{"setting":"alpha","shots":1,"counts":{"++":1,"+-":0,"-+":0,"--":0}}]"#;
        assert!(CountTable::from_json_reader(missing.as_bytes()).is_err());
        let bad_total = r#"[{"setting":"alpha","shots":2,"counts":{"++":1,"+-":0,"-+":0,"--":0}}]"#;
        assert!(CountTable::from_json_reader(bad_total.as_bytes()).is_err());
    }
}
