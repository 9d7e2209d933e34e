//! Rectangular lattices, sampled scalar fields, and the discrete calculus
//! the rest of the workbench is built on: trapezoid integration with halved
//! boundary cells, second-order gradients, and mollification by the
//! standard compactly supported bump.
//!
//! All functionals downstream are finite sums over these lattices; test
//! functions have compactly supported gradients, so a bounded window with
//! enough padding represents ℝⁿ faithfully.

use std::io::{BufRead, Write};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad;

/// Highest supported dimension. Fixed-size coordinate buffers use this.
pub const MAX_DIM: usize = 3;

/// A uniform rectangular lattice over a box `[lo, hi]` in dimension 1..=3.
///
/// Node `i` on an axis sits at `lo + i * spacing`; flat indices are
/// row-major with the last axis fastest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    lo: Vec<f64>,
    hi: Vec<f64>,
    points: Vec<usize>,
}

impl Lattice {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>, points: Vec<usize>) -> Result<Self> {
        let dim = lo.len();
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::InvalidInput(format!(
                "lattice dimension must be 1..={MAX_DIM}, got {dim}"
            )));
        }
        if hi.len() != dim || points.len() != dim {
            return Err(Error::InvalidInput(
                "lo, hi, points must have equal lengths".into(),
            ));
        }
        for a in 0..dim {
            if !(lo[a] < hi[a]) || !lo[a].is_finite() || !hi[a].is_finite() {
                return Err(Error::InvalidInput(format!(
                    "axis {a}: need finite lo < hi, got [{}, {}]",
                    lo[a], hi[a]
                )));
            }
            if points[a] < 2 {
                return Err(Error::InvalidInput(format!(
                    "axis {a}: need at least 2 points, got {}",
                    points[a]
                )));
            }
        }
        Ok(Self { lo, hi, points })
    }

    /// Same bounds and point count on every axis.
    pub fn uniform(dim: usize, lo: f64, hi: f64, points: usize) -> Result<Self> {
        Self::new(vec![lo; dim], vec![hi; dim], vec![points; dim])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    /// Total node count.
    pub fn len(&self) -> usize {
        self.points.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn points(&self, axis: usize) -> usize {
        self.points[axis]
    }

    pub fn lo(&self, axis: usize) -> f64 {
        self.lo[axis]
    }

    pub fn hi(&self, axis: usize) -> f64 {
        self.hi[axis]
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        (self.hi[axis] - self.lo[axis]) / (self.points[axis] - 1) as f64
    }

    pub fn max_spacing(&self) -> f64 {
        (0..self.dim()).map(|a| self.spacing(a)).fold(0.0, f64::max)
    }

    /// Shortest box edge; the usable "window size" for radius clamps.
    pub fn min_extent(&self) -> f64 {
        (0..self.dim())
            .map(|a| self.hi[a] - self.lo[a])
            .fold(f64::INFINITY, f64::min)
    }

    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        self.lo[axis] + i as f64 * self.spacing(axis)
    }

    /// Measure of one full cell (product of spacings).
    pub fn cell_measure(&self) -> f64 {
        (0..self.dim()).map(|a| self.spacing(a)).product()
    }

    /// Decompose a flat index into per-axis indices (last axis fastest).
    pub fn multi(&self, mut flat: usize, out: &mut [usize; MAX_DIM]) {
        let dim = self.dim();
        for a in (0..dim).rev() {
            out[a] = flat % self.points[a];
            flat /= self.points[a];
        }
    }

    pub fn flat(&self, multi: &[usize]) -> usize {
        let mut idx = 0;
        for a in 0..self.dim() {
            idx = idx * self.points[a] + multi[a];
        }
        idx
    }

    /// Coordinates of the node with the given flat index.
    pub fn node(&self, flat: usize, out: &mut [f64; MAX_DIM]) {
        let mut mi = [0usize; MAX_DIM];
        self.multi(flat, &mut mi);
        for a in 0..self.dim() {
            out[a] = self.coord(a, mi[a]);
        }
    }

    /// Trapezoid weight factor of a node: 1/2 per axis on which it is a
    /// boundary node.
    pub fn trapezoid_factor(&self, multi: &[usize]) -> f64 {
        let mut w = 1.0;
        for a in 0..self.dim() {
            if multi[a] == 0 || multi[a] + 1 == self.points[a] {
                w *= 0.5;
            }
        }
        w
    }

    /// Iterate flat indices together with per-axis indices.
    pub fn iter_multi(&self) -> MultiIter<'_> {
        MultiIter {
            lattice: self,
            flat: 0,
            multi: [0; MAX_DIM],
        }
    }
}

pub struct MultiIter<'a> {
    lattice: &'a Lattice,
    flat: usize,
    multi: [usize; MAX_DIM],
}

impl Iterator for MultiIter<'_> {
    type Item = (usize, [usize; MAX_DIM]);

    fn next(&mut self) -> Option<Self::Item> {
        if self.flat >= self.lattice.len() {
            return None;
        }
        let item = (self.flat, self.multi);
        // Advance the per-axis counter (last axis fastest).
        self.flat += 1;
        let dim = self.lattice.dim();
        for a in (0..dim).rev() {
            self.multi[a] += 1;
            if self.multi[a] < self.lattice.points(a) {
                break;
            }
            self.multi[a] = 0;
        }
        Some(item)
    }
}

/// A scalar field sampled on a lattice, with optional analytic provenance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    pub lattice: Lattice,
    pub values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<FunctionSpec>,
}

impl GridFunction {
    pub fn new(lattice: Lattice, values: Vec<f64>) -> Result<Self> {
        if values.len() != lattice.len() {
            return Err(Error::InvalidInput(format!(
                "value count {} does not match lattice size {}",
                values.len(),
                lattice.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite value {v}")));
        }
        Ok(Self {
            lattice,
            values,
            provenance: None,
        })
    }

    pub fn zeros(lattice: Lattice) -> Self {
        let n = lattice.len();
        Self {
            lattice,
            values: vec![0.0; n],
            provenance: None,
        }
    }

    /// Apply a pointwise map, dropping provenance.
    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Self {
        Self {
            lattice: self.lattice.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
            provenance: None,
        }
    }

    /// Combine two fields on the same lattice pointwise.
    pub fn zip_with<F: Fn(f64, f64) -> f64>(&self, other: &Self, f: F) -> Result<Self> {
        self.check_same_lattice(other)?;
        Ok(Self {
            lattice: self.lattice.clone(),
            values: self
                .values
                .iter()
                .zip(other.values.iter())
                .map(|(&a, &b)| f(a, b))
                .collect(),
            provenance: None,
        })
    }

    pub fn check_same_lattice(&self, other: &Self) -> Result<()> {
        if self.lattice != other.lattice {
            return Err(Error::LatticeMismatch(
                "fields live on different lattices".into(),
            ));
        }
        Ok(())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, &v| m.max(v.abs()))
    }

    /// Write the field as CSV: one row per node, coordinates then value.
    pub fn dump_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        let dim = self.lattice.dim();
        let names = ["x", "y", "z"];
        for a in 0..dim {
            write!(out, "{},", names[a])?;
        }
        writeln!(out, "value")?;
        let mut coords = [0.0; MAX_DIM];
        for (flat, _) in self.lattice.iter_multi() {
            self.lattice.node(flat, &mut coords);
            for c in coords.iter().take(dim) {
                write!(out, "{c},")?;
            }
            writeln!(out, "{}", self.values[flat])?;
        }
        Ok(())
    }

    /// Read a field back from the CSV produced by `dump_csv`, rebuilding
    /// the lattice from the coordinate columns.
    pub fn load_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::InvalidInput("empty CSV".into()))??;
        let dim = header.split(',').count() - 1;
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::InvalidInput(format!("bad CSV header: {header}")));
        }
        let mut rows: Vec<(Vec<f64>, f64)> = Vec::new();
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != dim + 1 {
                return Err(Error::InvalidInput(format!("bad CSV row: {line}")));
            }
            let mut coords = Vec::with_capacity(dim);
            for f in &fields[..dim] {
                coords.push(
                    f.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::InvalidInput(format!("bad coordinate {f}: {e}")))?,
                );
            }
            let value = fields[dim]
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::InvalidInput(format!("bad value: {e}")))?;
            rows.push((coords, value));
        }
        // Infer the per-axis grids from sorted unique coordinates.
        let mut lo = vec![f64::INFINITY; dim];
        let mut hi = vec![f64::NEG_INFINITY; dim];
        let mut counts = vec![0usize; dim];
        for a in 0..dim {
            let mut axis: Vec<f64> = rows.iter().map(|(c, _)| c[a]).collect();
            axis.sort_by(f64::total_cmp);
            axis.dedup();
            lo[a] = axis[0];
            hi[a] = *axis.last().unwrap();
            counts[a] = axis.len();
        }
        let lattice = Lattice::new(lo, hi, counts)?;
        if lattice.len() != rows.len() {
            return Err(Error::InvalidInput(format!(
                "CSV has {} rows but inferred lattice has {} nodes",
                rows.len(),
                lattice.len()
            )));
        }
        let mut values = vec![0.0; rows.len()];
        let mut coords = [0.0; MAX_DIM];
        for (flat, (row_coords, value)) in rows.iter().enumerate() {
            lattice.node(flat, &mut coords);
            for a in 0..dim {
                let tol = 1e-9 * (lattice.hi(a) - lattice.lo(a));
                if (coords[a] - row_coords[a]).abs() > tol {
                    return Err(Error::InvalidInput(
                        "CSV rows are not in row-major lattice order".into(),
                    ));
                }
            }
            values[flat] = *value;
        }
        GridFunction::new(lattice, values)
    }
}

/// Analytic test functions with known gradients.
///
/// `hat` is the only member with a kink; everything else is C² with
/// compactly supported gradient, the test class of the limit identities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FunctionSpec {
    Constant {
        height: f64,
    },
    Linear {
        slope: Vec<f64>,
        #[serde(default)]
        intercept: f64,
    },
    /// Radial tent: height at the center, linear to zero at |x-c| = halfwidth.
    Hat {
        center: Vec<f64>,
        halfwidth: f64,
        height: f64,
    },
    /// height * exp(1 - 1/(1-t²)) with t = |x-c|/radius; vanishes outside.
    SmoothBump {
        center: Vec<f64>,
        radius: f64,
        height: f64,
    },
    /// The 1D hat convolved with the standard bump at scale 1/k; C²,
    /// gradient supported in [c - w - 1/k, c + w + 1/k].
    SmoothedHat {
        center: Vec<f64>,
        halfwidth: f64,
        height: f64,
        k: u32,
    },
    /// height * exp(-t²/(1-t²)): bell-shaped but compactly supported.
    GaussianLike {
        center: Vec<f64>,
        radius: f64,
        height: f64,
    },
    /// Product of 1D profiles, one per axis.
    TensorProduct { factors: Vec<FunctionSpec> },
    Sum { terms: Vec<FunctionSpec> },
}

impl FunctionSpec {
    /// Dimension this spec is pinned to, if any (constants fit any lattice).
    pub fn dim(&self) -> Option<usize> {
        match self {
            FunctionSpec::Constant { .. } => None,
            FunctionSpec::Linear { slope, .. } => Some(slope.len()),
            FunctionSpec::Hat { center, .. }
            | FunctionSpec::SmoothBump { center, .. }
            | FunctionSpec::GaussianLike { center, .. } => Some(center.len()),
            FunctionSpec::SmoothedHat { .. } => Some(1),
            FunctionSpec::TensorProduct { factors } => Some(factors.len()),
            FunctionSpec::Sum { terms } => terms.iter().find_map(|t| t.dim()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            FunctionSpec::Constant { height } => {
                ensure_finite(*height, "height")?;
            }
            FunctionSpec::Linear { slope, intercept } => {
                if slope.is_empty() || slope.len() > MAX_DIM {
                    return Err(Error::InvalidInput("linear: bad slope length".into()));
                }
                for s in slope {
                    ensure_finite(*s, "slope")?;
                }
                ensure_finite(*intercept, "intercept")?;
            }
            FunctionSpec::Hat {
                center,
                halfwidth,
                height,
            } => {
                check_center(center)?;
                ensure_positive(*halfwidth, "halfwidth")?;
                ensure_finite(*height, "height")?;
            }
            FunctionSpec::SmoothBump {
                center,
                radius,
                height,
            }
            | FunctionSpec::GaussianLike {
                center,
                radius,
                height,
            } => {
                check_center(center)?;
                ensure_positive(*radius, "radius")?;
                ensure_finite(*height, "height")?;
            }
            FunctionSpec::SmoothedHat {
                center,
                halfwidth,
                height,
                k,
            } => {
                if center.len() != 1 {
                    return Err(Error::InvalidInput(
                        "smoothed-hat is a 1D profile; lift with tensor-product".into(),
                    ));
                }
                check_center(center)?;
                ensure_positive(*halfwidth, "halfwidth")?;
                ensure_finite(*height, "height")?;
                if *k == 0 {
                    return Err(Error::InvalidInput("smoothed-hat: k must be >= 1".into()));
                }
            }
            FunctionSpec::TensorProduct { factors } => {
                if factors.is_empty() || factors.len() > MAX_DIM {
                    return Err(Error::InvalidInput(
                        "tensor-product: need 1..=3 factors".into(),
                    ));
                }
                for f in factors {
                    f.validate()?;
                    if f.dim().is_some_and(|d| d != 1) {
                        return Err(Error::InvalidInput(
                            "tensor-product factors must be 1D profiles".into(),
                        ));
                    }
                }
            }
            FunctionSpec::Sum { terms } => {
                if terms.is_empty() {
                    return Err(Error::InvalidInput("sum: no terms".into()));
                }
                let mut dim = None;
                for t in terms {
                    t.validate()?;
                    if let Some(d) = t.dim() {
                        if *dim.get_or_insert(d) != d {
                            return Err(Error::InvalidInput(
                                "sum: terms have mixed dimensions".into(),
                            ));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Evaluate at a point.
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            FunctionSpec::Constant { height } => *height,
            FunctionSpec::Linear { slope, intercept } => {
                intercept + slope.iter().zip(x).map(|(s, xi)| s * xi).sum::<f64>()
            }
            FunctionSpec::Hat {
                center,
                halfwidth,
                height,
            } => {
                let t = radial(x, center) / halfwidth;
                if t < 1.0 {
                    height * (1.0 - t)
                } else {
                    0.0
                }
            }
            FunctionSpec::SmoothBump {
                center,
                radius,
                height,
            } => {
                let t = radial(x, center) / radius;
                if t < 1.0 {
                    height * (1.0 - 1.0 / (1.0 - t * t)).exp()
                } else {
                    0.0
                }
            }
            FunctionSpec::SmoothedHat {
                center,
                halfwidth,
                height,
                k,
            } => smoothed_hat_eval(x[0] - center[0], *halfwidth, *height, *k as f64),
            FunctionSpec::GaussianLike {
                center,
                radius,
                height,
            } => {
                let t = radial(x, center) / radius;
                if t < 1.0 {
                    height * (-t * t / (1.0 - t * t)).exp()
                } else {
                    0.0
                }
            }
            FunctionSpec::TensorProduct { factors } => factors
                .iter()
                .enumerate()
                .map(|(a, f)| f.eval(&x[a..=a]))
                .product(),
            FunctionSpec::Sum { terms } => terms.iter().map(|t| t.eval(x)).sum(),
        }
    }

    /// Analytic gradient at a point. The hat's kink set (center, rim) gets
    /// gradient 0 by convention; it is measure zero and never integrated
    /// against directly.
    pub fn grad(&self, x: &[f64]) -> Vec<f64> {
        let dim = x.len();
        match self {
            FunctionSpec::Constant { .. } => vec![0.0; dim],
            FunctionSpec::Linear { slope, .. } => slope.clone(),
            FunctionSpec::Hat {
                center,
                halfwidth,
                height,
            } => {
                let r = radial(x, center);
                if r == 0.0 || r >= *halfwidth {
                    return vec![0.0; dim];
                }
                let scale = -height / halfwidth / r;
                x.iter().zip(center).map(|(xi, ci)| scale * (xi - ci)).collect()
            }
            FunctionSpec::SmoothBump {
                center,
                radius,
                height,
            } => {
                let r = radial(x, center);
                let t = r / radius;
                if t >= 1.0 || r == 0.0 {
                    return vec![0.0; dim];
                }
                let s = 1.0 - t * t;
                let dfdt = -height * (1.0 - 1.0 / s).exp() * 2.0 * t / (s * s);
                let scale = dfdt / (radius * r);
                x.iter().zip(center).map(|(xi, ci)| scale * (xi - ci)).collect()
            }
            FunctionSpec::SmoothedHat {
                center,
                halfwidth,
                height,
                k,
            } => {
                vec![smoothed_hat_deriv(
                    x[0] - center[0],
                    *halfwidth,
                    *height,
                    *k as f64,
                )]
            }
            FunctionSpec::GaussianLike {
                center,
                radius,
                height,
            } => {
                let r = radial(x, center);
                let t = r / radius;
                if t >= 1.0 || r == 0.0 {
                    return vec![0.0; dim];
                }
                let s = 1.0 - t * t;
                let dfdt = -height * (-t * t / s).exp() * 2.0 * t / (s * s);
                let scale = dfdt / (radius * r);
                x.iter().zip(center).map(|(xi, ci)| scale * (xi - ci)).collect()
            }
            FunctionSpec::TensorProduct { factors } => {
                let vals: Vec<f64> = factors
                    .iter()
                    .enumerate()
                    .map(|(a, f)| f.eval(&x[a..=a]))
                    .collect();
                (0..dim)
                    .map(|a| {
                        let da = factors[a].grad(&x[a..=a])[0];
                        let rest: f64 = vals
                            .iter()
                            .enumerate()
                            .filter(|(b, _)| *b != a)
                            .map(|(_, v)| v)
                            .product();
                        da * rest
                    })
                    .collect()
            }
            FunctionSpec::Sum { terms } => {
                let mut g = vec![0.0; dim];
                for t in terms {
                    for (gi, ti) in g.iter_mut().zip(t.grad(x)) {
                        *gi += ti;
                    }
                }
                g
            }
        }
    }

    /// Bounding box of the support, if compact.
    pub fn support_bounds(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        match self {
            FunctionSpec::Constant { .. } | FunctionSpec::Linear { .. } => None,
            FunctionSpec::Hat {
                center, halfwidth, ..
            } => Some(ball_box(center, *halfwidth)),
            FunctionSpec::SmoothBump { center, radius, .. }
            | FunctionSpec::GaussianLike { center, radius, .. } => {
                Some(ball_box(center, *radius))
            }
            FunctionSpec::SmoothedHat {
                center,
                halfwidth,
                k,
                ..
            } => Some(ball_box(center, halfwidth + 1.0 / *k as f64)),
            FunctionSpec::TensorProduct { factors } => {
                let mut lo = Vec::new();
                let mut hi = Vec::new();
                for f in factors {
                    let (l, h) = f.support_bounds()?;
                    lo.push(l[0]);
                    hi.push(h[0]);
                }
                Some((lo, hi))
            }
            FunctionSpec::Sum { terms } => {
                let mut acc: Option<(Vec<f64>, Vec<f64>)> = None;
                for t in terms {
                    let (l, h) = t.support_bounds()?;
                    match &mut acc {
                        None => acc = Some((l, h)),
                        Some((al, ah)) => {
                            for a in 0..al.len() {
                                al[a] = al[a].min(l[a]);
                                ah[a] = ah[a].max(h[a]);
                            }
                        }
                    }
                }
                acc
            }
        }
    }
}

fn ensure_finite(v: f64, what: &str) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{what} must be finite")))
    }
}

fn ensure_positive(v: f64, what: &str) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{what} must be > 0, got {v}")))
    }
}

fn check_center(center: &[f64]) -> Result<()> {
    if center.is_empty() || center.len() > MAX_DIM {
        return Err(Error::InvalidInput("center: bad dimension".into()));
    }
    for c in center {
        ensure_finite(*c, "center")?;
    }
    Ok(())
}

fn radial(x: &[f64], center: &[f64]) -> f64 {
    x.iter()
        .zip(center)
        .map(|(xi, ci)| (xi - ci) * (xi - ci))
        .sum::<f64>()
        .sqrt()
}

fn ball_box(center: &[f64], r: f64) -> (Vec<f64>, Vec<f64>) {
    (
        center.iter().map(|c| c - r).collect(),
        center.iter().map(|c| c + r).collect(),
    )
}

// --- the standard bump and its moments -----------------------------------
//
// eta(t) = exp(-1/(1-t²)) on (-1,1). The smoothed hat needs the partial
// integrals I0(u) = ∫_{-1}^u eta and I1(u) = ∫_{-1}^u t·eta; both are
// evaluated on demand by tanh-sinh panels (the integrand is flat to all
// orders at ±1, so the panels converge to machine precision).

fn bump_raw(t: f64) -> f64 {
    if t.abs() < 1.0 {
        (-1.0 / (1.0 - t * t)).exp()
    } else {
        0.0
    }
}

fn bump_mass() -> f64 {
    static MASS: OnceLock<f64> = OnceLock::new();
    *MASS.get_or_init(|| quad::tanh_sinh(bump_raw, -1.0, 1.0, 1e-15))
}

fn bump_i0(u: f64) -> f64 {
    if u <= -1.0 {
        0.0
    } else if u >= 1.0 {
        bump_mass()
    } else {
        quad::tanh_sinh(bump_raw, -1.0, u, 1e-15)
    }
}

fn bump_i1(u: f64) -> f64 {
    if u <= -1.0 || u >= 1.0 {
        0.0 // odd integrand: the full first moment vanishes
    } else {
        quad::tanh_sinh(|t| t * bump_raw(t), -1.0, u, 1e-15)
    }
}

/// Smooth monotone step: 0 for u ≤ -1, 1 for u ≥ 1, C^∞ in between
/// (the normalized CDF of the standard bump). Used for mollified
/// indicator-like test functions and smoothed exponent profiles.
pub fn smooth_step(u: f64) -> f64 {
    bump_i0(u) / bump_mass()
}

/// Derivative of [`smooth_step`]: the normalized bump itself.
pub fn smooth_step_deriv(u: f64) -> f64 {
    bump_raw(u) / bump_mass()
}

/// Exact convolution of the 1D hat (halfwidth w, height H) with the
/// normalized bump at scale 1/k, evaluated at offset s from the center.
fn smoothed_hat_eval(s: f64, w: f64, height: f64, k: f64) -> f64 {
    if s.abs() >= w + 1.0 / k {
        return 0.0;
    }
    let m0 = bump_mass();
    // Rising piece t ∈ [-w, 0]: hat = H(1 + t/w); substituted u = k(s - t).
    let (a1, b1) = (k * s, k * (s + w));
    let rising = (1.0 + s / w) * (bump_i0(b1) - bump_i0(a1))
        - (bump_i1(b1) - bump_i1(a1)) / (k * w);
    // Falling piece t ∈ [0, w]: hat = H(1 - t/w).
    let (a2, b2) = (k * (s - w), k * s);
    let falling = (1.0 - s / w) * (bump_i0(b2) - bump_i0(a2))
        + (bump_i1(b2) - bump_i1(a2)) / (k * w);
    height * (rising + falling) / m0
}

/// d/ds of `smoothed_hat_eval`: the hat's slopes convolved with the bump.
fn smoothed_hat_deriv(s: f64, w: f64, height: f64, k: f64) -> f64 {
    if s.abs() >= w + 1.0 / k {
        return 0.0;
    }
    let m0 = bump_mass();
    height / (w * m0) * (bump_i0(k * (s + w)) + bump_i0(k * (s - w)) - 2.0 * bump_i0(k * s))
}

// --- sampling and calculus -------------------------------------------------

/// Sample an analytic spec on a lattice, retaining provenance.
pub fn sample(spec: &FunctionSpec, lattice: &Lattice) -> Result<GridFunction> {
    spec.validate()?;
    if let Some(d) = spec.dim() {
        if d != lattice.dim() {
            return Err(Error::InvalidInput(format!(
                "spec is {d}-dimensional but lattice is {}-dimensional",
                lattice.dim()
            )));
        }
    }
    let mut values = vec![0.0; lattice.len()];
    let mut coords = [0.0; MAX_DIM];
    for (flat, _) in lattice.iter_multi() {
        lattice.node(flat, &mut coords);
        values[flat] = spec.eval(&coords[..lattice.dim()]);
    }
    let mut f = GridFunction::new(lattice.clone(), values)?;
    f.provenance = Some(spec.clone());
    Ok(f)
}

/// Trapezoid integral Σ f·(weight)·cell with halved boundary cells.
pub fn integrate(f: &GridFunction, weight: Option<&GridFunction>) -> Result<f64> {
    if let Some(w) = weight {
        f.check_same_lattice(w)?;
        if w.values.iter().any(|&v| v < 0.0) {
            return Err(Error::InvalidInput("integration weight must be >= 0".into()));
        }
    }
    let cell = f.lattice.cell_measure();
    let mut acc = 0.0;
    for (flat, multi) in f.lattice.iter_multi() {
        let mut term = f.values[flat] * f.lattice.trapezoid_factor(&multi[..f.lattice.dim()]);
        if let Some(w) = weight {
            term *= w.values[flat];
        }
        acc += term;
    }
    Ok(acc * cell)
}

/// Trapezoid integral restricted to the index box `[lo, hi]` (inclusive),
/// with halved cells on the box faces.
pub fn box_integrate(f: &GridFunction, lo: &[usize], hi: &[usize]) -> f64 {
    let lat = &f.lattice;
    let dim = lat.dim();
    debug_assert!(lo.len() == dim && hi.len() == dim);
    let cell = lat.cell_measure();
    let mut acc = 0.0;
    let mut idx = [0usize; MAX_DIM];
    idx[..dim].copy_from_slice(&lo[..dim]);
    loop {
        let mut w = 1.0;
        for a in 0..dim {
            if idx[a] == lo[a] || idx[a] == hi[a] {
                w *= 0.5;
            }
        }
        acc += w * f.values[lat.flat(&idx[..dim])];
        // Advance within the box.
        let mut a = dim;
        loop {
            if a == 0 {
                return acc * cell;
            }
            a -= 1;
            if idx[a] < hi[a] {
                idx[a] += 1;
                break;
            }
            idx[a] = lo[a];
        }
    }
}

/// Per-axis first derivatives: central differences in the interior,
/// one-sided second-order stencils at the boundary.
pub fn gradient(f: &GridFunction) -> Result<Vec<GridFunction>> {
    let lat = &f.lattice;
    let dim = lat.dim();
    for a in 0..dim {
        if lat.points(a) < 3 {
            return Err(Error::InvalidInput(format!(
                "gradient needs >= 3 points per axis; axis {a} has {}",
                lat.points(a)
            )));
        }
    }
    let mut out = Vec::with_capacity(dim);
    for a in 0..dim {
        let h = lat.spacing(a);
        let n_a = lat.points(a);
        // Stride between neighbors along axis a.
        let stride: usize = (a + 1..dim).map(|b| lat.points(b)).product();
        let mut values = vec![0.0; lat.len()];
        for (flat, multi) in lat.iter_multi() {
            let i = multi[a];
            let v = &f.values;
            values[flat] = if i == 0 {
                (-3.0 * v[flat] + 4.0 * v[flat + stride] - v[flat + 2 * stride]) / (2.0 * h)
            } else if i + 1 == n_a {
                (3.0 * v[flat] - 4.0 * v[flat - stride] + v[flat - 2 * stride]) / (2.0 * h)
            } else {
                (v[flat + stride] - v[flat - stride]) / (2.0 * h)
            };
        }
        out.push(GridFunction::new(lat.clone(), values)?);
    }
    Ok(out)
}

/// Euclidean norm of the discrete gradient per node.
pub fn gradient_magnitude(f: &GridFunction) -> Result<GridFunction> {
    let comps = gradient(f)?;
    let mut values = vec![0.0; f.lattice.len()];
    for (i, v) in values.iter_mut().enumerate() {
        *v = comps.iter().map(|c| c.values[i] * c.values[i]).sum::<f64>().sqrt();
    }
    GridFunction::new(f.lattice.clone(), values)
}

/// Magnitude of the analytic gradient of `spec` sampled on `lattice`.
pub fn analytic_gradient_magnitude(spec: &FunctionSpec, lattice: &Lattice) -> Result<GridFunction> {
    spec.validate()?;
    let mut values = vec![0.0; lattice.len()];
    let mut coords = [0.0; MAX_DIM];
    for (flat, _) in lattice.iter_multi() {
        lattice.node(flat, &mut coords);
        let g = spec.grad(&coords[..lattice.dim()]);
        values[flat] = g.iter().map(|gi| gi * gi).sum::<f64>().sqrt();
    }
    GridFunction::new(lattice.clone(), values)
}

/// Discrete convolution with the bump mollifier at scale 1/k.
///
/// The sampled kernel is renormalized so its discrete integral is exactly 1;
/// the field is extended by zero outside the window.
pub fn mollify(f: &GridFunction, k: u32) -> Result<GridFunction> {
    if k == 0 {
        return Err(Error::InvalidInput("mollify: k must be >= 1".into()));
    }
    let lat = &f.lattice;
    let dim = lat.dim();
    let radius = 1.0 / k as f64;
    if radius < 2.0 * lat.max_spacing() {
        return Err(Error::InvalidInput(format!(
            "mollifier radius 1/{k} is below two cells (spacing {}); kernel unresolvable",
            lat.max_spacing()
        )));
    }
    // Kernel taps: integer offsets with |offset·h| < 1/k.
    let reach: Vec<isize> = (0..dim)
        .map(|a| (radius / lat.spacing(a)).ceil() as isize)
        .collect();
    let mut taps: Vec<(Vec<isize>, f64)> = Vec::new();
    let mut mass = 0.0;
    let mut off = vec![-reach[0]; dim];
    'outer: loop {
        let r2: f64 = (0..dim)
            .map(|a| {
                let d = off[a] as f64 * lat.spacing(a);
                d * d
            })
            .sum();
        let t = r2.sqrt() * k as f64;
        if t < 1.0 {
            let w = (-1.0 / (1.0 - t * t)).exp();
            mass += w;
            taps.push((off.clone(), w));
        }
        // Advance the offset counter.
        let mut a = dim;
        loop {
            if a == 0 {
                break 'outer;
            }
            a -= 1;
            if off[a] < reach[a] {
                off[a] += 1;
                break;
            }
            off[a] = -reach[a];
        }
    }
    let cell = lat.cell_measure();
    let norm = 1.0 / (mass * cell);

    let mut values = vec![0.0; lat.len()];
    let mut mi = [0usize; MAX_DIM];
    for (flat, _) in lat.iter_multi() {
        lat.multi(flat, &mut mi);
        let mut acc = 0.0;
        'taps: for (offset, w) in &taps {
            let mut src = 0usize;
            for a in 0..dim {
                let i = mi[a] as isize - offset[a];
                if i < 0 || i >= lat.points(a) as isize {
                    continue 'taps; // zero extension
                }
                src = src * lat.points(a) + i as usize;
            }
            acc += w * f.values[src];
        }
        values[flat] = acc * norm * cell;
    }
    GridFunction::new(lat.clone(), values)
}
