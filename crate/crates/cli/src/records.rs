//! Serializable views of solver results, rounded to the emitted precision.

use std::io::{Read, Write};
use std::str::FromStr;

use hotelling_core::{
    Candidate, FacilityConfig, Regime, SolveReport, SweepRow, Threshold, VerificationResult,
};
use serde::{Deserialize, Serialize};

/// Significant digits written for every floating-point output.
pub const SIGNIFICANT_DIGITS: usize = 15;

/// Rounds `x` to [`SIGNIFICANT_DIGITS`] significant digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x)
        .parse()
        .unwrap_or(x)
}

fn round3(c: &FacilityConfig) -> [f64; 3] {
    c.to_array().map(round_sig)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope<P, R, D> {
    pub command: String,
    pub params: P,
    pub result: R,
    pub diagnostics: D,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidTheta {
    pub lo: f64,
    pub hi: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateRecord {
    pub config: [f64; 3],
    pub family: String,
    pub welfare: f64,
    pub valid_theta: ValidTheta,
    pub free_range: Option<[f64; 2]>,
}

impl From<&Candidate> for CandidateRecord {
    fn from(c: &Candidate) -> Self {
        CandidateRecord {
            config: round3(&c.config),
            family: c.family.to_string(),
            welfare: round_sig(c.welfare),
            valid_theta: ValidTheta {
                lo: round_sig(c.valid_for_theta.lo),
                hi: c.valid_for_theta.hi.map(round_sig),
            },
            free_range: c.free_range.map(|(lo, hi)| [round_sig(lo), round_sig(hi)]),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveParams {
    pub theta: f64,
    pub gamma: f64,
    pub resolution: usize,
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    /// `[a, b, q]` per optimum, sorted by `(q, a, b)`.
    pub optima: Vec<[f64; 3]>,
    /// Indifferent consumer of each optimum.
    pub splits: Vec<f64>,
    pub welfare: f64,
    pub regime: String,
    pub candidates: Vec<CandidateRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub config: [f64; 3],
    pub welfare: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveDiagnostics {
    pub grid: Point,
    pub oracle: Point,
    pub agreement: f64,
    pub refine_sweeps: usize,
    pub refine_converged: bool,
    pub theorem: Option<String>,
}

impl SolveResult {
    pub fn new(report: &SolveReport, candidates: &[Candidate]) -> Self {
        SolveResult {
            optima: report.optima.iter().map(|o| round3(&o.config)).collect(),
            splits: report
                .optima
                .iter()
                .map(|o| {
                    round_sig(hotelling_core::indifferent_point(&o.config, &report.prefs).jhat)
                })
                .collect(),
            welfare: round_sig(report.welfare_star),
            regime: report.regime.to_string(),
            candidates: candidates.iter().map(CandidateRecord::from).collect(),
        }
    }
}

impl From<&SolveReport> for SolveDiagnostics {
    fn from(r: &SolveReport) -> Self {
        SolveDiagnostics {
            grid: Point {
                config: round3(&r.grid_best.config),
                welfare: round_sig(r.grid_best.welfare),
            },
            oracle: Point {
                config: round3(&r.oracle.config),
                welfare: round_sig(r.oracle.welfare),
            },
            agreement: round_sig(r.agreement),
            refine_sweeps: r.refine_sweeps,
            refine_converged: r.refine_converged,
            theorem: r.covered_by.map(|c| c.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyParams {
    pub claim: String,
    pub theta: f64,
    pub gamma: f64,
    pub resolution: usize,
    pub tol: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub label: String,
    pub discrepancy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyResult {
    pub claim: String,
    pub passed: bool,
    pub max_discrepancy: f64,
    pub tolerance: f64,
    pub witnesses: Vec<[f64; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyDiagnostics {
    pub checks: Vec<CheckRecord>,
}

impl From<&VerificationResult> for VerifyResult {
    fn from(v: &VerificationResult) -> Self {
        VerifyResult {
            claim: v.claim.to_string(),
            passed: v.passed,
            max_discrepancy: round_sig(v.max_discrepancy),
            tolerance: round_sig(v.tolerance),
            witnesses: v.witnesses.iter().map(round3).collect(),
        }
    }
}

impl From<&VerificationResult> for VerifyDiagnostics {
    fn from(v: &VerificationResult) -> Self {
        VerifyDiagnostics {
            checks: v
                .checks
                .iter()
                .map(|c| CheckRecord {
                    label: c.label.to_string(),
                    discrepancy: round_sig(c.discrepancy),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepParams {
    pub theta_min: f64,
    pub theta_max: f64,
    pub steps: usize,
    pub gamma: f64,
    pub resolution: usize,
    pub tol: f64,
}

/// One CSV line: `theta,a,b,q,jhat,welfare,regime`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub theta: f64,
    pub a: f64,
    pub b: f64,
    pub q: f64,
    pub jhat: f64,
    pub welfare: f64,
    pub regime: String,
}

impl From<&SweepRow> for SweepRecord {
    fn from(r: &SweepRow) -> Self {
        SweepRecord {
            theta: round_sig(r.theta),
            a: round_sig(r.a),
            b: round_sig(r.b),
            q: round_sig(r.q),
            jhat: round_sig(r.jhat),
            welfare: round_sig(r.welfare),
            regime: r.regime.to_string(),
        }
    }
}

impl TryFrom<SweepRecord> for SweepRow {
    type Error = hotelling_core::Error;

    fn try_from(r: SweepRecord) -> hotelling_core::Result<Self> {
        Ok(SweepRow {
            theta: r.theta,
            a: r.a,
            b: r.b,
            q: r.q,
            jhat: r.jhat,
            welfare: r.welfare,
            regime: Regime::from_str(&r.regime)?,
        })
    }
}

/// Rows of a solve report in sweep layout, one per optimum.
pub fn solve_rows(report: &SolveReport) -> Vec<SweepRecord> {
    report
        .optima
        .iter()
        .map(|o| {
            let jhat = hotelling_core::indifferent_point(&o.config, &report.prefs).jhat;
            SweepRecord::from(&SweepRow {
                theta: report.prefs.theta(),
                a: o.config.a(),
                b: o.config.b(),
                q: o.config.q(),
                jhat,
                welfare: o.welfare,
                regime: report.regime,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdParams {
    pub gamma: f64,
    pub bracket: [f64; 2],
    pub tol: f64,
    pub resolution: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRecord {
    pub theta: f64,
    pub lower_regime: String,
    pub upper_regime: String,
    pub iterations: usize,
}

impl From<&Threshold> for ThresholdRecord {
    fn from(t: &Threshold) -> Self {
        ThresholdRecord {
            theta: round_sig(t.theta),
            lower_regime: t.lower_regime.to_string(),
            upper_regime: t.upper_regime.to_string(),
            iterations: t.iterations,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Empty {}

/// Writes `records` as CSV with a header row and LF terminators.
pub fn write_csv<W: Write, T: Serialize>(out: W, records: &[T]) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads `theta,a,b,q,jhat,welfare,regime` rows back into sweep rows.
pub fn read_sweep_csv<R: Read>(input: R) -> Result<Vec<SweepRow>, Box<dyn std::error::Error>> {
    let mut rows = Vec::new();
    for record in csv::Reader::from_reader(input).deserialize::<SweepRecord>() {
        rows.push(SweepRow::try_from(record?)?);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_keeps_fifteen_digits() {
        assert_eq!(round_sig(0.15), 0.15);
        assert_eq!(round_sig(1.0 / 3.0), 0.333333333333333);
        assert_eq!(round_sig(-2.0 / 3.0e-7), -6.66666666666667e6);
        assert_eq!(round_sig(0.0), 0.0);
        assert_eq!(round_sig(round_sig(0.1 + 0.2)), round_sig(0.1 + 0.2));
    }

    #[test]
    fn header_only_csv_reads_as_no_rows() {
        let rows = read_sweep_csv("theta,a,b,q,jhat,welfare,regime\n".as_bytes()).unwrap();
        assert!(rows.is_empty());
    }
}
