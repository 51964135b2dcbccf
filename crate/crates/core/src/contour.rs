//! Piecewise paths in the complex energy plane and line integrals over them.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quad::{adaptive, QuadratureResult, Tolerance};
use crate::smatrix::Sheet;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Segment {
    Line {
        from: Complex64,
        to: Complex64,
    },
    /// `center + radius e^{i theta}` for theta from `start_angle` to `end_angle`.
    Arc {
        center: Complex64,
        radius: f64,
        start_angle: f64,
        end_angle: f64,
    },
    /// Half-line `origin + s direction`, `s >= 0`; traversed towards infinity
    /// unless `inbound`.
    Ray {
        origin: Complex64,
        direction: Complex64,
        inbound: bool,
    },
}

impl Segment {
    /// Finite start point, `None` for an inbound ray.
    pub fn start(&self) -> Option<Complex64> {
        match *self {
            Segment::Line { from, .. } => Some(from),
            Segment::Arc {
                center,
                radius,
                start_angle,
                ..
            } => Some(center + Complex64::from_polar(radius, start_angle)),
            Segment::Ray { origin, inbound, .. } => (!inbound).then_some(origin),
        }
    }

    pub fn end(&self) -> Option<Complex64> {
        match *self {
            Segment::Line { to, .. } => Some(to),
            Segment::Arc {
                center,
                radius,
                end_angle,
                ..
            } => Some(center + Complex64::from_polar(radius, end_angle)),
            Segment::Ray { origin, inbound, .. } => inbound.then_some(origin),
        }
    }

    /// Distance from `z` to the point set of the segment.
    pub fn distance_to(&self, z: Complex64) -> f64 {
        match *self {
            Segment::Line { from, to } => {
                let d = to - from;
                let len2 = d.norm_sqr();
                let s = if len2 > 0.0 {
                    (((z - from) * d.conj()).re / len2).clamp(0.0, 1.0)
                } else {
                    0.0
                };
                (z - (from + d * s)).norm()
            }
            Segment::Arc {
                center,
                radius,
                start_angle,
                end_angle,
            } => {
                let rel = z - center;
                let (lo, hi) = if start_angle <= end_angle {
                    (start_angle, end_angle)
                } else {
                    (end_angle, start_angle)
                };
                let mut best = (rel - Complex64::from_polar(radius, lo))
                    .norm()
                    .min((rel - Complex64::from_polar(radius, hi)).norm());
                let theta = rel.arg();
                for k in -2..=2 {
                    let t = theta + 2.0 * PI * (k as f64);
                    if t >= lo && t <= hi {
                        best = best.min((rel.norm() - radius).abs());
                    }
                }
                best
            }
            Segment::Ray { origin, direction, .. } => {
                let d = direction / direction.norm();
                let s = ((z - origin) * d.conj()).re.max(0.0);
                (z - (origin + d * s)).norm()
            }
        }
    }

    /// Change of `arg(z - p)` along the segment.
    fn arg_change(&self, p: Complex64) -> f64 {
        let principal = |a: Complex64, b: Complex64| ((b - p) / (a - p)).arg();
        match *self {
            Segment::Line { from, to } => principal(from, to),
            Segment::Arc {
                center,
                radius,
                start_angle,
                end_angle,
            } => {
                let n = 512;
                let mut total = 0.0;
                let mut prev = center + Complex64::from_polar(radius, start_angle);
                for k in 1..=n {
                    let t = start_angle + (end_angle - start_angle) * (k as f64) / (n as f64);
                    let next = center + Complex64::from_polar(radius, t);
                    total += principal(prev, next);
                    prev = next;
                }
                total
            }
            Segment::Ray {
                origin,
                direction,
                inbound,
            } => {
                // From arg(origin - p) to the asymptotic direction.
                let change = (direction / (origin - p)).arg();
                if inbound {
                    -change
                } else {
                    change
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathSegment {
    pub segment: Segment,
    pub sheet: Sheet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    Forward,
    Reversed,
}

/// Chain of segments, each tagged with the sheet it runs on.
#[derive(Debug, Clone, PartialEq)]
pub struct ContourPath {
    segments: Vec<PathSegment>,
    orientation: Orientation,
}

impl ContourPath {
    /// Checks that consecutive segments share endpoints exactly and that
    /// inbound rays only open and outbound rays only close the path.
    pub fn new(segments: Vec<PathSegment>, orientation: Orientation) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::invalid("contour path needs at least one segment"));
        }
        for (i, s) in segments.iter().enumerate() {
            if let Segment::Ray { direction, .. } = s.segment {
                if direction.norm() == 0.0 {
                    return Err(Error::invalid("ray direction must be nonzero"));
                }
            }
            if let Segment::Arc { radius, .. } = s.segment {
                if !(radius > 0.0) {
                    return Err(Error::invalid("arc radius must be positive"));
                }
            }
            if i > 0 && s.segment.start().is_none() {
                return Err(Error::invalid("an inbound ray can only start a path"));
            }
            if i + 1 < segments.len() && s.segment.end().is_none() {
                return Err(Error::invalid("an outbound ray can only end a path"));
            }
        }
        for w in segments.windows(2) {
            if w[0].segment.end() != w[1].segment.start() {
                return Err(Error::invalid("contour segments do not chain"));
            }
        }
        Ok(ContourPath { segments, orientation })
    }

    pub fn builder(start: Complex64, sheet: Sheet) -> PathBuilder {
        PathBuilder {
            start: Some(start),
            cursor: start,
            sheet,
            segments: Vec::new(),
        }
    }

    /// Path that comes in from infinity along `direction` reversed, i.e.
    /// starts with an inbound ray ending at `origin`.
    pub fn from_infinity(origin: Complex64, direction: Complex64, sheet: Sheet) -> PathBuilder {
        PathBuilder {
            start: None,
            cursor: origin,
            sheet,
            segments: alloc::vec![PathSegment {
                segment: Segment::Ray {
                    origin,
                    direction,
                    inbound: true,
                },
                sheet,
            }],
        }
    }

    /// Counter-clockwise circle.
    pub fn circle(center: Complex64, radius: f64, sheet: Sheet) -> Result<Self> {
        Self::new(
            alloc::vec![PathSegment {
                segment: Segment::Arc {
                    center,
                    radius,
                    start_angle: 0.0,
                    end_angle: 2.0 * PI,
                },
                sheet,
            }],
            Orientation::Forward,
        )
    }

    /// Counter-clockwise rectangle with opposite corners `lo` and `hi`.
    pub fn rectangle(lo: Complex64, hi: Complex64, sheet: Sheet) -> Result<Self> {
        let b = Complex64::new(hi.re, lo.im);
        let d = Complex64::new(lo.re, hi.im);
        Self::builder(lo, sheet)
            .line_to(b)
            .line_to(hi)
            .line_to(d)
            .line_to(lo)
            .build()
    }

    /// The horizontal line `Im z = height`, left to right.
    pub fn horizontal_line(height: f64, sheet: Sheet) -> Result<Self> {
        let origin = Complex64::new(0.0, height);
        Self::from_infinity(origin, Complex64::new(-1.0, 0.0), sheet)
            .ray(Complex64::new(1.0, 0.0))
            .build()
    }

    /// From `start` out to `-infinity` along the real axis.
    pub fn negative_real_axis(start: f64, sheet: Sheet) -> Result<Self> {
        Self::builder(Complex64::new(start, 0.0), sheet)
            .ray(Complex64::new(-1.0, 0.0))
            .build()
    }

    pub fn segments(&self) -> &[PathSegment] {
        &self.segments
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn is_closed(&self) -> bool {
        let first = self.segments[0].segment.start();
        let last = self.segments[self.segments.len() - 1].segment.end();
        match (first, last) {
            (Some(a), Some(b)) => a == b || (a - b).norm() <= 1e-14 * a.norm().max(1.0),
            _ => false,
        }
    }

    /// Directions at infinity of the two ends (`None` for finite ends).
    pub(crate) fn asymptotes(&self) -> (Option<Complex64>, Option<Complex64>) {
        let start = match self.segments[0].segment {
            Segment::Ray {
                direction,
                inbound: true,
                ..
            } => Some(direction),
            _ => None,
        };
        let end = match self.segments[self.segments.len() - 1].segment {
            Segment::Ray {
                direction,
                inbound: false,
                ..
            } => Some(direction),
            _ => None,
        };
        match self.orientation {
            Orientation::Forward => (start, end),
            Orientation::Reversed => (end, start),
        }
    }

    pub(crate) fn endpoints(&self) -> (Option<Complex64>, Option<Complex64>) {
        let start = self.segments[0].segment.start();
        let end = self.segments[self.segments.len() - 1].segment.end();
        match self.orientation {
            Orientation::Forward => (start, end),
            Orientation::Reversed => (end, start),
        }
    }

    /// Smallest distance from `z` to the path.
    pub fn distance_to(&self, z: Complex64) -> f64 {
        self.segments
            .iter()
            .map(|s| s.segment.distance_to(z))
            .fold(f64::INFINITY, f64::min)
    }

    /// Total change of `arg(z - p)` along the path in its orientation.
    pub(crate) fn arg_change(&self, p: Complex64) -> f64 {
        let total: f64 = self.segments.iter().map(|s| s.segment.arg_change(p)).sum();
        match self.orientation {
            Orientation::Forward => total,
            Orientation::Reversed => -total,
        }
    }

    /// Winding number about `p` of a closed path.
    pub fn winding_number(&self, p: Complex64) -> Result<i32> {
        if !self.is_closed() {
            return Err(Error::invalid("winding number needs a closed path"));
        }
        Ok(libm::round(self.arg_change(p) / (2.0 * PI)) as i32)
    }
}

pub struct PathBuilder {
    start: Option<Complex64>,
    cursor: Complex64,
    sheet: Sheet,
    segments: Vec<PathSegment>,
}

impl PathBuilder {
    pub fn on_sheet(mut self, sheet: Sheet) -> Self {
        self.sheet = sheet;
        self
    }

    pub fn line_to(mut self, to: Complex64) -> Self {
        self.segments.push(PathSegment {
            segment: Segment::Line { from: self.cursor, to },
            sheet: self.sheet,
        });
        self.cursor = to;
        self
    }

    /// Arc about `center` from the current point, sweeping `sweep` radians
    /// (positive is counter-clockwise).
    pub fn arc(mut self, center: Complex64, sweep: f64) -> Self {
        let rel = self.cursor - center;
        let radius = rel.norm();
        let start_angle = rel.arg();
        let segment = Segment::Arc {
            center,
            radius,
            start_angle,
            end_angle: start_angle + sweep,
        };
        self.cursor = segment.end().unwrap_or(self.cursor);
        self.segments.push(PathSegment {
            segment,
            sheet: self.sheet,
        });
        self
    }

    /// Closing outbound ray to infinity.
    pub fn ray(mut self, direction: Complex64) -> Self {
        self.segments.push(PathSegment {
            segment: Segment::Ray {
                origin: self.cursor,
                direction,
                inbound: false,
            },
            sheet: self.sheet,
        });
        self
    }

    pub fn close(self) -> Self {
        match self.start {
            Some(s) if s != self.cursor => self.line_to(s),
            _ => self,
        }
    }

    pub fn build(self) -> Result<ContourPath> {
        ContourPath::new(self.segments, Orientation::Forward)
    }
}

fn segment_integral<F>(f: &F, seg: &PathSegment, tol: Tolerance) -> Result<QuadratureResult>
where
    F: Fn(Complex64, Sheet) -> Result<Complex64>,
{
    let sheet = seg.sheet;
    match seg.segment {
        Segment::Line { from, to } => {
            let d = to - from;
            adaptive(|s| Ok(f(from + d * s, sheet)? * d), &[0.0, 0.5, 1.0], tol)
        }
        Segment::Arc {
            center,
            radius,
            start_angle,
            end_angle,
        } => {
            let (lo, hi, sign) = if start_angle <= end_angle {
                (start_angle, end_angle, 1.0)
            } else {
                (end_angle, start_angle, -1.0)
            };
            let mut breaks = Vec::new();
            let pieces = (((hi - lo) / FRAC_PI_2).ceil() as usize).max(1);
            for k in 0..=pieces {
                breaks.push(lo + (hi - lo) * (k as f64) / (pieces as f64));
            }
            adaptive(
                |theta| {
                    let e = Complex64::from_polar(radius, theta);
                    Ok(f(center + e, sheet)? * Complex64::new(0.0, 1.0) * e)
                },
                &breaks,
                tol,
            )
            .map(|r| r.scale(Complex64::new(sign, 0.0)))
        }
        Segment::Ray {
            origin,
            direction,
            inbound,
        } => {
            let d = direction / direction.norm();
            let w = origin.norm().max(1.0);
            let r = adaptive(
                |theta| {
                    let t = libm::tan(theta);
                    Ok(f(origin + d * (w * t), sheet)? * d * (w * (1.0 + t * t)))
                },
                &[0.0, 0.25 * PI, FRAC_PI_2],
                tol,
            )?;
            Ok(if inbound { r.scale(Complex64::new(-1.0, 0.0)) } else { r })
        }
    }
}

/// Oriented line integral `sum_segments int f(z(s), sheet) z'(s) ds`.
///
/// Segments are summed in path order. Each gets an equal share of the
/// absolute tolerance and the relative tolerance against its own value.
pub fn integrate_contour<F>(f: F, path: &ContourPath, tol: Tolerance) -> Result<QuadratureResult>
where
    F: Fn(Complex64, Sheet) -> Result<Complex64>,
{
    let n = path.segments.len() as f64;
    let share = Tolerance {
        abs: tol.abs / n,
        ..tol
    };
    let mut total = QuadratureResult::ZERO;
    for seg in &path.segments {
        total = total.combine(segment_integral(&f, seg, share)?);
    }
    Ok(match path.orientation {
        Orientation::Forward => total,
        Orientation::Reversed => total.scale(Complex64::new(-1.0, 0.0)),
    })
}
