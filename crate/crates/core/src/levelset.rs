//! Level-set measures |{y : |f(x)−f(y)| > λ|x−y|^{n/q+s}}|, the weak and
//! strong functionals built on them, λ-scan profiles with large-λ limit
//! extraction, and the sphere constant K(q,n).
//!
//! Discrete conventions (frozen): the defining inequality is strict, the
//! self pair y = x is excluded, and the measure is cell-measure × node
//! count. The accelerated scan only skips pairs that provably cannot fire
//! (|f(x)−f(y)| ≤ 2·max|f| < λ·d^e), so its counts are bit-identical to the
//! brute scan. λ-grids are clamped to the window where the discrete counts
//! track the continuum: r_max(λ) ∈ [8·spacing, window/4], and for exponents
//! e = n/q+s > 1 additionally λ ≤ max|∇f|/d_min^{e−1} with d_min =
//! max(8·spacing, (spacing²·window)^{1/3}), which keeps the level-set width
//! resolvable while still letting λ·spacing → 0 under refinement.

use std::sync::atomic::{AtomicU32, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{gradient_magnitude, GridFunction, Lattice, MAX_DIM};
use crate::quad;
use crate::spaces::{self, SpaceSpec};

/// One level-set query: the set E_f(λ) = {(x,y) : |f(x)−f(y)| > λ|x−y|^e}
/// with e = n/q + s.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelSetParams {
    pub q: f64,
    pub s: f64,
    pub lambda: f64,
}

impl LevelSetParams {
    pub fn validate(&self, dim: usize) -> Result<()> {
        if !(self.q.is_finite() && self.q > 0.0) {
            return Err(Error::InvalidInput(format!("q = {} must be positive", self.q)));
        }
        if !(self.s.is_finite() && self.s >= 0.0) {
            return Err(Error::InvalidInput(format!("s = {} must be ≥ 0", self.s)));
        }
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return Err(Error::InvalidInput(format!(
                "λ = {} must be positive",
                self.lambda
            )));
        }
        let e = dim as f64 / self.q + self.s;
        if !(e.is_finite() && e > 0.0) {
            return Err(Error::InvalidInput(format!(
                "distance exponent n/q + s = {e} must be positive"
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScanMode {
    /// Every unordered node pair is examined.
    Brute,
    /// Pairs farther than r_max(λ) = (2·max|f|/λ)^{1/e} are skipped; counts
    /// are bit-identical to the brute scan.
    Accelerated,
}

/// Geometric λ-grid specification (endpoints inclusive).
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LambdaGrid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl LambdaGrid {
    pub fn validate(&self) -> Result<()> {
        if !(self.min.is_finite() && self.max.is_finite() && 0.0 < self.min && self.min < self.max)
        {
            return Err(Error::InvalidInput(format!(
                "λ-grid [{}, {}] must be a positive finite range",
                self.min, self.max
            )));
        }
        if self.points < 16 {
            return Err(Error::InvalidInput(format!(
                "λ-grid needs ≥ 16 points, got {}",
                self.points
            )));
        }
        Ok(())
    }

    /// The geometric grid itself, endpoint-pinned.
    pub fn realize(&self) -> Vec<f64> {
        let n = self.points;
        let ratio = (self.max / self.min).powf(1.0 / (n - 1) as f64);
        let mut out = Vec::with_capacity(n);
        let mut v = self.min;
        for i in 0..n {
            out.push(if i + 1 == n { self.max } else { v });
            v *= ratio;
        }
        out
    }
}

/// Points in the default geometric λ-grid.
pub const DEFAULT_LAMBDA_POINTS: usize = 48;
/// Top-decade relative spread above which a limit estimate is unreliable.
pub const DIAGNOSTIC_THRESHOLD: f64 = 0.1;

/// λ-scan of the weak functional with the large-λ limit bookkeeping.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LevelSetProfile {
    /// Ascending geometric λ-grid after validity clamping.
    pub lambda: Vec<f64>,
    /// λ·‖measure^{1/q}‖_X per grid point.
    pub values: Vec<f64>,
    /// r_max(λ)/spacing per grid point (diagnostic resolution scale).
    pub r_max_cells: Vec<f64>,
    pub sup_value: f64,
    /// Top-decade average; present only when the diagnostic is within the
    /// reliability threshold (0.1).
    pub limit_estimate: Option<f64>,
    /// (max − min)/mean over the top decade, when ≥ 8 points lie there.
    pub limit_diagnostic: Option<f64>,
}

impl LevelSetProfile {
    pub fn reliable(&self) -> bool {
        self.limit_estimate.is_some()
    }

    /// CSV table: one row per λ-grid point.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("lambda,value,r_max_cells\n");
        for i in 0..self.lambda.len() {
            out.push_str(&format!(
                "{},{},{}\n",
                self.lambda[i], self.values[i], self.r_max_cells[i]
            ));
        }
        out
    }

    /// Compact JSON summary of the scan.
    pub fn summary_json(&self) -> String {
        #[derive(Serialize)]
        struct Summary {
            sup: f64,
            limit: Option<f64>,
            diagnostic: Option<f64>,
        }
        serde_json::to_string(&Summary {
            sup: self.sup_value,
            limit: self.limit_estimate,
            diagnostic: self.limit_diagnostic,
        })
        .expect("summary serialization cannot fail")
    }
}

/// Half-space node offsets (first nonzero component positive) with their
/// Euclidean lengths, optionally truncated to `cap`.
fn half_space_offsets(lat: &Lattice, cap: Option<f64>) -> Vec<([i64; MAX_DIM], f64)> {
    let n = lat.dim();
    let mut per_axis_max = [0i64; MAX_DIM];
    for a in 0..n {
        let mut m = lat.points(a) as i64 - 1;
        if let Some(c) = cap {
            m = m.min((c / lat.spacing(a)).floor() as i64);
        }
        per_axis_max[a] = m.max(0);
    }
    let mut out = Vec::new();
    let mut off = [0i64; MAX_DIM];
    fn rec(
        a: usize,
        n: usize,
        leading_zero: bool,
        per_axis_max: &[i64; MAX_DIM],
        lat: &Lattice,
        cap: Option<f64>,
        off: &mut [i64; MAX_DIM],
        out: &mut Vec<([i64; MAX_DIM], f64)>,
    ) {
        if a == n {
            if leading_zero {
                return; // the zero offset (self pair)
            }
            let mut d2 = 0.0;
            for b in 0..n {
                let d = off[b] as f64 * lat.spacing(b);
                d2 += d * d;
            }
            let d = d2.sqrt();
            if let Some(c) = cap {
                if d > c {
                    return;
                }
            }
            out.push((*off, d));
            return;
        }
        let lo = if leading_zero { 0 } else { -per_axis_max[a] };
        for v in lo..=per_axis_max[a] {
            off[a] = v;
            rec(
                a + 1,
                n,
                leading_zero && v == 0,
                per_axis_max,
                lat,
                cap,
                off,
                out,
            );
        }
    }
    rec(0, n, true, &per_axis_max, lat, cap, &mut off, &mut out);
    out
}

/// Node-pair counts of the level set, one count per node (each unordered
/// pair increments both of its ends).
fn measure_counts(f: &GridFunction, params: &LevelSetParams, mode: ScanMode) -> Result<Vec<u32>> {
    let lat = &f.lattice;
    let n = lat.dim();
    params.validate(n)?;
    let e = n as f64 / params.q + params.s;
    let cap = match mode {
        ScanMode::Brute => None,
        ScanMode::Accelerated => {
            let bound = 2.0 * f.max_abs();
            // Pairs with λ·d^e ≥ 2·max|f| can never satisfy the strict
            // inequality; the relative margin absorbs the roundoff of
            // computing r_max itself.
            Some((bound / params.lambda).powf(1.0 / e) * (1.0 + 1e-9))
        }
    };
    let offsets = half_space_offsets(lat, cap);
    let thresholds: Vec<f64> = offsets
        .iter()
        .map(|&(_, d)| params.lambda * d.powf(e))
        .collect();
    let counts: Vec<AtomicU32> = (0..lat.len()).map(|_| AtomicU32::new(0)).collect();
    let dims: Vec<i64> = (0..n).map(|a| lat.points(a) as i64).collect();
    (0..lat.len()).into_par_iter().for_each(|x| {
        let mut xi = [0usize; MAX_DIM];
        lat.multi(x, &mut xi);
        let fx = f.values[x];
        'offs: for (k, (off, _)) in offsets.iter().enumerate() {
            let mut y = 0usize;
            for a in 0..n {
                let t = xi[a] as i64 + off[a];
                if t < 0 || t >= dims[a] {
                    continue 'offs;
                }
                y = y * dims[a] as usize + t as usize;
            }
            if (fx - f.values[y]).abs() > thresholds[k] {
                counts[x].fetch_add(1, Ordering::Relaxed);
                counts[y].fetch_add(1, Ordering::Relaxed);
            }
        }
    });
    Ok(counts.into_iter().map(|c| c.into_inner()).collect())
}

/// Per node x, cell-measure × #{y ≠ x : |f(x)−f(y)| > λ|x−y|^{n/q+s}}.
pub fn measure_field(
    f: &GridFunction,
    params: &LevelSetParams,
    mode: ScanMode,
) -> Result<GridFunction> {
    let cell = f.lattice.cell_measure();
    let counts = measure_counts(f, params, mode)?;
    GridFunction::new(
        f.lattice.clone(),
        counts.into_iter().map(|c| c as f64 * cell).collect(),
    )
}

/// Validity window for λ given the field: r_max(λ) ∈ [8h, window/4], plus
/// the level-width resolution cap for e > 1 (see module docs). Returns
/// (λ_lo, λ_hi).
pub fn lambda_bounds(f: &GridFunction, e: f64) -> Result<(f64, f64)> {
    let lat = &f.lattice;
    let h = lat.max_spacing();
    let window = lat.min_extent();
    let bound = 2.0 * f.max_abs();
    let lo = bound / (window / 4.0).powf(e);
    let mut hi = bound / (8.0 * h).powf(e);
    if e > 1.0 {
        let grad_max = gradient_magnitude(f)?.max_abs();
        if grad_max > 0.0 {
            let d_min = (8.0 * h).max((h * h * window).cbrt());
            hi = hi.min(grad_max / d_min.powf(e - 1.0));
        }
    }
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::InvalidInput(format!(
            "no valid λ-window: the lattice is too coarse for this field \
             (λ_lo = {lo:.3e}, λ_hi = {hi:.3e})"
        )));
    }
    Ok((lo, hi))
}

/// λ-scan of the weak functional: values(λ) = λ·‖measure_field(λ)^{1/q}‖_X
/// over a geometric grid. With no grid given, the scan covers the validity
/// window derived from the field (truncation-free at the bottom, level
/// widths of several cells at the top) — the range suited to reading off
/// the λ→∞ limit at s = 1. An explicit grid is honored as requested, which
/// supremum-oriented scans need: for n/q + s ≤ 1 the level sets empty out
/// at moderate λ and the supremum lives below the default window.
pub fn weak_functional(
    f: &GridFunction,
    space: &SpaceSpec,
    q: f64,
    s: f64,
    grid: Option<&LambdaGrid>,
) -> Result<LevelSetProfile> {
    let n = f.lattice.dim();
    LevelSetParams {
        q,
        s,
        lambda: 1.0,
    }
    .validate(n)?;
    if let Some(g) = grid {
        g.validate()?;
    }
    let e = n as f64 / q + s;

    // A field with no variation never fills a level set; report the zero
    // profile over whatever grid was requested (or a fixed default).
    let range_zero = f.max_abs() == 0.0
        || f
            .values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
            == (f.values[0], f.values[0]);
    let lambdas = match grid {
        Some(g) => g.realize(),
        None if range_zero => LambdaGrid {
            min: 1.0,
            max: 16.0,
            points: DEFAULT_LAMBDA_POINTS,
        }
        .realize(),
        None => {
            let (lo, hi) = lambda_bounds(f, e)?;
            LambdaGrid {
                min: lo,
                max: hi,
                points: DEFAULT_LAMBDA_POINTS,
            }
            .realize()
        }
    };

    let h = f.lattice.max_spacing();
    let bound = 2.0 * f.max_abs();
    let mut values = Vec::with_capacity(lambdas.len());
    let mut r_max_cells = Vec::with_capacity(lambdas.len());
    for &lambda in &lambdas {
        let params = LevelSetParams { q, s, lambda };
        let m = measure_field(f, &params, ScanMode::Accelerated)?;
        let rooted = m.map(|v| v.powf(1.0 / q));
        values.push(lambda * spaces::norm(space, &rooted)?);
        r_max_cells.push(if bound > 0.0 {
            (bound / lambda).powf(1.0 / e) / h
        } else {
            0.0
        });
    }
    let sup_value = values.iter().cloned().fold(0.0, f64::max);
    let mut profile = LevelSetProfile {
        lambda: lambdas,
        values,
        r_max_cells,
        sup_value,
        limit_estimate: None,
        limit_diagnostic: None,
    };
    if let Ok((estimate, diagnostic)) = limit_from_profile(&profile) {
        profile.limit_diagnostic = Some(diagnostic);
        if diagnostic <= DIAGNOSTIC_THRESHOLD {
            profile.limit_estimate = Some(estimate);
        }
    }
    Ok(profile)
}

/// Top-decade average of the profile values and its relative spread
/// (max − min)/mean. Errors when fewer than 8 grid points lie in the top
/// decade; a zero mean (empty level sets) reports (0, 0).
pub fn limit_from_profile(profile: &LevelSetProfile) -> Result<(f64, f64)> {
    let lambda_max = profile
        .lambda
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    if !lambda_max.is_finite() {
        return Err(Error::InvalidInput("empty λ-grid".into()));
    }
    let floor = lambda_max / 10.0 * (1.0 - 1e-12);
    let decade: Vec<f64> = profile
        .lambda
        .iter()
        .zip(&profile.values)
        .filter(|(l, _)| **l >= floor)
        .map(|(_, v)| *v)
        .collect();
    if decade.len() < 8 {
        return Err(Error::InvalidInput(format!(
            "top λ-decade holds {} points; need ≥ 8 for a limit estimate",
            decade.len()
        )));
    }
    let mean = decade.iter().sum::<f64>() / decade.len() as f64;
    if mean == 0.0 {
        return Ok((0.0, 0.0));
    }
    let hi = decade.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = decade.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok((mean, (hi - lo) / mean))
}

/// ‖[Σ_{y≠x} |f(x)−f(y)|^q·|x−y|^{−n−sq}·cell]^{1/q}‖_X — the strong
/// functional with the self cell excluded.
pub fn strong_functional(f: &GridFunction, space: &SpaceSpec, q: f64, s: f64) -> Result<f64> {
    let lat = &f.lattice;
    let n = lat.dim();
    if !(q.is_finite() && q > 0.0) {
        return Err(Error::InvalidInput(format!("q = {q} must be positive")));
    }
    if !(s.is_finite() && 0.0 < s && s <= 1.0) {
        return Err(Error::InvalidInput(format!("s = {s} must lie in (0, 1]")));
    }
    let cell = lat.cell_measure();
    let kernel_exp = -(n as f64 + s * q);
    // Kernel table over absolute index offsets (offset 0 stays 0: the self
    // pair is excluded and axis-aligned zero components are harmless since
    // the table is only read at nonzero offsets).
    let dims: Vec<usize> = (0..n).map(|a| lat.points(a)).collect();
    let table_len: usize = dims.iter().product();
    let mut kernel = vec![0.0; table_len];
    {
        let mut idx = [0usize; MAX_DIM];
        for (flat, k) in kernel.iter_mut().enumerate() {
            let mut rem = flat;
            for a in (0..n).rev() {
                idx[a] = rem % dims[a];
                rem /= dims[a];
            }
            if idx[..n].iter().all(|&v| v == 0) {
                continue;
            }
            let d2: f64 = (0..n)
                .map(|a| {
                    let d = idx[a] as f64 * lat.spacing(a);
                    d * d
                })
                .sum();
            *k = d2.sqrt().powf(kernel_exp);
        }
    }
    let inner: Vec<f64> = (0..lat.len())
        .into_par_iter()
        .map(|x| {
            let mut xi = [0usize; MAX_DIM];
            lat.multi(x, &mut xi);
            let fx = f.values[x];
            let mut acc = 0.0;
            for (y, &fy) in f.values.iter().enumerate() {
                if y == x {
                    continue;
                }
                let mut rem = y;
                let mut kidx = 0usize;
                for a in (0..n).rev() {
                    let ya = rem % dims[a];
                    rem /= dims[a];
                    kidx += xi[a].abs_diff(ya) * dims[a + 1..n].iter().product::<usize>();
                }
                let diff = (fx - fy).abs();
                let powered = if q == 2.0 {
                    diff * diff
                } else if q == 1.0 {
                    diff
                } else {
                    diff.powf(q)
                };
                acc += powered * kernel[kidx];
            }
            (acc * cell).powf(1.0 / q)
        })
        .collect();
    spaces::norm(space, &GridFunction::new(lat.clone(), inner)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SphereMethod {
    ClosedForm,
    Quadrature,
}

/// K(q,n) = ∫_{S^{n−1}} |ξ·e|^q dσ(ξ), by the Γ-function closed form and an
/// independent quadrature; the quadrature is authoritative on disagreement.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SphereConstant {
    pub q: f64,
    pub n: usize,
    pub value: f64,
    pub method: SphereMethod,
    pub closed_form: f64,
    pub quadrature: f64,
}

pub fn sphere_constant(q: f64, n: usize) -> Result<SphereConstant> {
    if !(q.is_finite() && q > 0.0) {
        return Err(Error::InvalidInput(format!("q = {q} must be positive")));
    }
    if !(1..=MAX_DIM).contains(&n) {
        return Err(Error::InvalidInput(format!(
            "sphere constant needs n ∈ 1..={MAX_DIM}, got {n}"
        )));
    }
    use statrs::function::gamma::gamma;
    let closed_form = 2.0
        * std::f64::consts::PI.powf((n as f64 - 1.0) / 2.0)
        * gamma((q + 1.0) / 2.0)
        / gamma((n as f64 + q) / 2.0);
    let quadrature = match n {
        // S⁰ = {±1} with counting measure.
        1 => 2.0,
        // 4·∫₀^{π/2} cos^q θ dθ; tanh-sinh absorbs the cos → 0 endpoint.
        2 => 4.0 * quad::tanh_sinh(|t| t.cos().powf(q), 0.0, std::f64::consts::FRAC_PI_2, 1e-13),
        // 2π·∫_{−1}^{1}|u|^q du, split at the cusp.
        _ => {
            4.0 * std::f64::consts::PI * quad::tanh_sinh(|u| u.powf(q), 0.0, 1.0, 1e-13)
        }
    };
    let agree = (closed_form - quadrature).abs() <= 1e-8 * closed_form.abs().max(1.0);
    Ok(SphereConstant {
        q,
        n,
        value: if agree { closed_form } else { quadrature },
        method: if agree {
            SphereMethod::ClosedForm
        } else {
            SphereMethod::Quadrature
        },
        closed_form,
        quadrature,
    })
}
