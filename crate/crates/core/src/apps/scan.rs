//! Line scans through a surface point and the offset precision study.
//!
//! A scan starts at `p = eval(net, d0)` and walks along `v̂ = p/‖p‖`, so the
//! patch is crossed at `t = 0`. Both the expanded polynomial and the
//! numeric determinant are sampled. With normalization the net is first
//! mapped into its canonical pose and so are the scan points; the mapped
//! start point is the normalized net evaluated at `d0` (affine invariance),
//! which keeps the large offset out of the arithmetic.

use std::fmt::Write as _;

use serde::Serialize;

use super::roots::bisect;
use crate::dixon::{build_cayley_matrix, CayleyMatrix};
use crate::error::{Error, Result};
use crate::expand::{expand_resultant, TrivariatePoly};
use crate::geometry::{ControlNet, DomainPoint, Point3};
use crate::normalize::normalize_net;
use crate::numeric::det_eval;
use crate::slp::format_f64;

/// A crossing counts as found when it lies this close to `t = 0`.
pub const CROSSING_TOL: f64 = 1e-6;

/// A single crossing farther than this from `t = 0` is flagged as displaced.
pub const DISPLACED_TOL: f64 = 1e-3;

pub const DEFAULT_SAMPLES: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanRecord {
    pub t: f64,
    pub implicit_value: f64,
    pub det_value: f64,
}

/// Both evaluators along one scan line, callable at any `t`.
#[derive(Debug, Clone)]
pub struct LineScan {
    start: Point3,
    dir: Point3,
    cayley: CayleyMatrix,
    poly: Option<TrivariatePoly>,
}

impl LineScan {
    pub fn new(net: &ControlNet, d0: DomainPoint, use_normalization: bool) -> Result<Self> {
        let p = net.eval(d0)?;
        let len = p.norm();
        if len == 0.0 {
            return Err(Error::DegenerateDirection);
        }
        let v = p * (1.0 / len);
        let (frame_net, start, dir) = if use_normalization {
            let (n, t) = normalize_net(net)?;
            let start = n.eval(d0)?;
            (n, start, t.vector_to_normalized(v))
        } else {
            (net.clone(), p, v)
        };
        let cayley = build_cayley_matrix(&frame_net)?;
        if cayley.is_identically_zero() {
            return Err(Error::DegenerateSurface("the Cayley matrix vanishes identically".into()));
        }
        // Expansion can lose every coefficient to cleanup at extreme offsets;
        // the polynomial column then reads as zero.
        let poly = match expand_resultant(&cayley) {
            Ok(p) => Some(p),
            Err(e) if e.is_degenerate() => None,
            Err(e) => return Err(e),
        };
        Ok(LineScan { start, dir, cayley, poly })
    }

    pub fn point(&self, t: f64) -> Point3 {
        self.start + self.dir * t
    }

    pub fn implicit_value(&self, t: f64) -> f64 {
        self.poly.as_ref().map_or(0.0, |p| p.evaluate(self.point(t)))
    }

    pub fn det_value(&self, t: f64) -> f64 {
        det_eval(&self.cayley, self.point(t))
    }

    pub fn value(&self, column: Column, t: f64) -> f64 {
        match column {
            Column::Implicit => self.implicit_value(t),
            Column::Det => self.det_value(t),
        }
    }

    pub fn sample(&self, t_range: [f64; 2], n_samples: usize) -> Result<Vec<ScanRecord>> {
        let ts = sample_points(t_range, n_samples)?;
        Ok(ts
            .into_iter()
            .map(|t| ScanRecord { t, implicit_value: self.implicit_value(t), det_value: self.det_value(t) })
            .collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Column {
    Implicit,
    Det,
}

fn sample_points(t_range: [f64; 2], n: usize) -> Result<Vec<f64>> {
    let [t0, t1] = t_range;
    if n < 2 {
        return Err(Error::InvalidInput(format!("need at least 2 samples, got {n}")));
    }
    if !t0.is_finite() || !t1.is_finite() || t0 >= t1 {
        return Err(Error::InvalidInput(format!("bad parameter range [{t0}, {t1}]")));
    }
    let h = (t1 - t0) / (n - 1) as f64;
    Ok((0..n).map(|i| if i == n - 1 { t1 } else { t0 + i as f64 * h }).collect())
}

/// Sample both evaluators at `n_samples` uniform parameters along
/// `p + t·v̂`.
pub fn scan_line(
    net: &ControlNet,
    d0: DomainPoint,
    t_range: [f64; 2],
    n_samples: usize,
    use_normalization: bool,
) -> Result<Vec<ScanRecord>> {
    LineScan::new(net, d0, use_normalization)?.sample(t_range, n_samples)
}

pub fn scan_csv(records: &[ScanRecord]) -> String {
    let mut out = String::from("t,implicit_value,det_value\n");
    for r in records {
        let _ = writeln!(out, "{},{},{}", format_f64(r.t), format_f64(r.implicit_value), format_f64(r.det_value));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct CrossingFlags {
    pub no_sign_change: bool,
    pub multiple_crossings: bool,
    pub displaced: bool,
}

impl CrossingFlags {
    pub fn any(&self) -> bool {
        self.no_sign_change || self.multiple_crossings || self.displaced
    }

    pub fn label(&self) -> String {
        let mut parts = Vec::new();
        if self.no_sign_change {
            parts.push("no_sign_change");
        }
        if self.multiple_crossings {
            parts.push("multiple_crossings");
        }
        if self.displaced {
            parts.push("displaced");
        }
        if parts.is_empty() {
            "none".into()
        } else {
            parts.join("|")
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CrossingReport {
    pub crossing_found: bool,
    pub t_star: Option<f64>,
    pub flags: CrossingFlags,
}

/// Count sign changes among the nonzero samples of `values`; when there is
/// exactly one, refine it by bisection on `f`.
pub fn detect_crossing(ts: &[f64], values: &[f64], f: impl Fn(f64) -> f64) -> CrossingReport {
    let nonzero: Vec<(f64, f64)> = ts.iter().copied().zip(values.iter().copied()).filter(|(_, v)| *v != 0.0).collect();
    let brackets: Vec<_> = nonzero.windows(2).filter(|w| (w[0].1 > 0.0) != (w[1].1 > 0.0)).map(|w| (w[0], w[1])).collect();
    let mut flags = CrossingFlags::default();
    match brackets.len() {
        0 => {
            flags.no_sign_change = true;
            CrossingReport { crossing_found: false, t_star: None, flags }
        }
        1 => {
            let ((a, fa), (b, _)) = brackets[0];
            let width = ts.last().unwrap() - ts[0];
            let t = bisect(&f, a, b, fa, 1e-12 * width);
            flags.displaced = t.abs() > DISPLACED_TOL;
            CrossingReport { crossing_found: t.abs() <= CROSSING_TOL, t_star: Some(t), flags }
        }
        _ => {
            flags.multiple_crossings = true;
            CrossingReport { crossing_found: false, t_star: None, flags }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StudyMode {
    RawImplicit,
    RawDet,
    NormalizedImplicit,
    NormalizedDet,
}

impl StudyMode {
    pub const ALL: [StudyMode; 4] =
        [StudyMode::RawImplicit, StudyMode::RawDet, StudyMode::NormalizedImplicit, StudyMode::NormalizedDet];

    pub fn normalized(self) -> bool {
        matches!(self, StudyMode::NormalizedImplicit | StudyMode::NormalizedDet)
    }

    pub fn column(self) -> Column {
        match self {
            StudyMode::RawImplicit | StudyMode::NormalizedImplicit => Column::Implicit,
            StudyMode::RawDet | StudyMode::NormalizedDet => Column::Det,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            StudyMode::RawImplicit => "raw-implicit",
            StudyMode::RawDet => "raw-det",
            StudyMode::NormalizedImplicit => "normalized-implicit",
            StudyMode::NormalizedDet => "normalized-det",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StudyOptions {
    pub d0: DomainPoint,
    pub t_range: [f64; 2],
    pub n_samples: usize,
}

impl Default for StudyOptions {
    fn default() -> Self {
        StudyOptions {
            d0: DomainPoint::triangle(0.33, 0.33).expect("valid domain point"),
            t_range: [-1.0, 1.0],
            n_samples: DEFAULT_SAMPLES,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StudyRow {
    pub offset: f64,
    pub mode: StudyMode,
    pub report: CrossingReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyReport {
    pub rows: Vec<StudyRow>,
}

impl StudyReport {
    pub fn row(&self, offset: f64, mode: StudyMode) -> Option<&StudyRow> {
        self.rows.iter().find(|r| r.offset == offset && r.mode == mode)
    }

    /// Offsets at which a mode succeeds after having failed at a smaller offset.
    pub fn non_monotone(&self, mode: StudyMode) -> Vec<f64> {
        let mut rows: Vec<_> = self.rows.iter().filter(|r| r.mode == mode).collect();
        rows.sort_by(|a, b| a.offset.total_cmp(&b.offset));
        let mut failed = false;
        let mut out = Vec::new();
        for r in rows {
            if r.report.crossing_found && failed {
                out.push(r.offset);
            }
            failed |= !r.report.crossing_found;
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("offset,mode,crossing_found,t_star,error_flags\n");
        for r in &self.rows {
            let t = r.report.t_star.map(format_f64).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                format_f64(r.offset),
                r.mode.name(),
                r.report.crossing_found,
                t,
                r.report.flags.label()
            );
        }
        out
    }
}

fn study_offset(base: &ControlNet, m: f64, opts: &StudyOptions) -> Result<Vec<StudyRow>> {
    let shift = Point3 { x: m, y: m, z: m };
    let net = base.map_points(|p| p + shift)?;
    let ts = sample_points(opts.t_range, opts.n_samples)?;
    let mut rows = Vec::with_capacity(4);
    for normalized in [false, true] {
        let scan = LineScan::new(&net, opts.d0, normalized)?;
        for mode in StudyMode::ALL.into_iter().filter(|md| md.normalized() == normalized) {
            let col = mode.column();
            let values: Vec<f64> = ts.iter().map(|&t| scan.value(col, t)).collect();
            let report = detect_crossing(&ts, &values, |t| scan.value(col, t));
            rows.push(StudyRow { offset: m, mode, report });
        }
    }
    Ok(rows)
}

/// Shift every control point by `(m, m, m)` for each offset and record, per
/// evaluation mode, whether a unique crossing near `t = 0` is detected.
/// Offsets are processed in parallel; rows come back in input order.
pub fn precision_study(base_net: &ControlNet, offsets: &[f64], opts: &StudyOptions) -> Result<StudyReport> {
    if let Some(m) = offsets.iter().find(|m| !m.is_finite() || **m < 0.0) {
        return Err(Error::InvalidInput(format!("offsets must be finite and non-negative, got {m}")));
    }
    let results: Vec<Result<Vec<StudyRow>>> = std::thread::scope(|s| {
        let handles: Vec<_> = offsets.iter().map(|&m| s.spawn(move || study_offset(base_net, m, opts))).collect();
        handles.into_iter().map(|h| h.join().expect("study worker panicked")).collect()
    });
    let mut rows = Vec::new();
    for r in results {
        rows.extend(r?);
    }
    Ok(StudyReport { rows })
}
