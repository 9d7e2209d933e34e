//! Norm evaluators for seven function-space families on rectangular
//! lattices, plus convexification X ↦ X^s, the catalogued associate spaces,
//! and Hölder/duality checks.
//!
//! Conventions (frozen): plain Lebesgue-type integrals use the trapezoid
//! weights of `field::integrate`; the Morrey supremum runs over a finite
//! family (stride sub-lattice of centers × geometric radii) and is therefore
//! a certified *lower bound* of the true norm — the largest radius exceeds
//! the window diagonal so the exhausting-ball collapse r = α is exact;
//! Luxemburg norms bisect the modular against 1 (relative tolerance 1e−10
//! guaranteed, tighter in practice); the slice norm zero-extends the field
//! to a padded lattice so every window node is seen by a full stencil of
//! centers, which makes the Φ = t^p, r = p collapse an exact identity for
//! fields vanishing at the window boundary.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{integrate, sample, smooth_step, FunctionSpec, GridFunction, Lattice, MAX_DIM};
use crate::operators::{ball_offsets, max_offset};
use crate::weights::{sample_weight, WeightSpec};

/// Young-function catalogue for Orlicz-type norms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrliczFamily {
    /// Φ(t) = t^p
    Power,
    /// Φ(t) = t^p·log(e + t)
    PowerLog,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrliczSpec {
    pub family: OrliczFamily,
    pub p: f64,
}

impl OrliczSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.p.is_finite() && self.p >= 1.0) {
            return Err(Error::InvalidInput(format!(
                "Orlicz exponent p = {} must be finite and ≥ 1",
                self.p
            )));
        }
        Ok(())
    }

    fn eval(&self, t: f64) -> f64 {
        match self.family {
            OrliczFamily::Power => pow_abs(t, self.p),
            OrliczFamily::PowerLog => pow_abs(t, self.p) * (std::f64::consts::E + t).ln(),
        }
    }
}

/// The seven space families. `p = ∞` is admitted for Lebesgue variants
/// (supremum norm); all other parameters are finite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "space", rename_all = "snake_case")]
pub enum SpaceSpec {
    Lebesgue {
        p: f64,
    },
    WeightedLebesgue {
        p: f64,
        w: WeightSpec,
    },
    /// sup over balls B of |B|^{1/α−1/r}·‖f‖_{L^r(B)}, r ≤ α.
    Morrey {
        r: f64,
        alpha: f64,
    },
    /// Iterated per-axis norms, innermost axis first.
    MixedNorm {
        r_vec: Vec<f64>,
    },
    /// Luxemburg norm with node-wise exponent r(x) ∈ [r₋, r₊] ⊂ [1, ∞).
    VariableLebesgue {
        r_field: GridFunction,
    },
    Orlicz {
        phi: OrliczSpec,
    },
    /// { ∫ [‖f·1_{B(x,t)}‖_Φ / ‖1_{B(x,t)}‖_Φ]^r dx }^{1/r}.
    OrliczSlice {
        phi: OrliczSpec,
        r: f64,
        t: f64,
    },
}

fn check_exponent(p: f64, what: &str) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidInput(format!("{what} = {p} must be ≥ 1")));
    }
    Ok(())
}

fn check_finite_exponent(p: f64, what: &str) -> Result<()> {
    check_exponent(p, what)?;
    if !p.is_finite() {
        return Err(Error::InvalidInput(format!("{what} must be finite")));
    }
    Ok(())
}

impl SpaceSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            SpaceSpec::Lebesgue { p } => check_exponent(*p, "Lebesgue exponent"),
            SpaceSpec::WeightedLebesgue { p, w } => {
                check_exponent(*p, "weighted Lebesgue exponent")?;
                w.validate()
            }
            SpaceSpec::Morrey { r, alpha } => {
                check_finite_exponent(*r, "Morrey integrability r")?;
                check_finite_exponent(*alpha, "Morrey scale α")?;
                if *alpha < *r {
                    return Err(Error::InvalidInput(format!(
                        "Morrey needs r ≤ α, got r = {r}, α = {alpha}"
                    )));
                }
                Ok(())
            }
            SpaceSpec::MixedNorm { r_vec } => {
                if r_vec.is_empty() || r_vec.len() > MAX_DIM {
                    return Err(Error::InvalidInput(
                        "mixed norm needs one exponent per axis".into(),
                    ));
                }
                for (a, r) in r_vec.iter().enumerate() {
                    check_finite_exponent(*r, &format!("mixed-norm exponent for axis {a}"))?;
                }
                Ok(())
            }
            SpaceSpec::VariableLebesgue { r_field } => {
                let mut min = f64::INFINITY;
                let mut max = f64::NEG_INFINITY;
                for &v in &r_field.values {
                    if !v.is_finite() {
                        return Err(Error::InvalidInput(
                            "variable exponent field has a non-finite value".into(),
                        ));
                    }
                    min = min.min(v);
                    max = max.max(v);
                }
                if !(min >= 1.0 && max < f64::INFINITY) {
                    return Err(Error::InvalidInput(format!(
                        "variable exponent range [{min}, {max}] must lie in [1, ∞)"
                    )));
                }
                Ok(())
            }
            SpaceSpec::Orlicz { phi } => phi.validate(),
            SpaceSpec::OrliczSlice { phi, r, t } => {
                phi.validate()?;
                check_finite_exponent(*r, "slice outer exponent r")?;
                if !(t.is_finite() && *t > 0.0) {
                    return Err(Error::InvalidInput(format!(
                        "slice ball size t = {t} must be positive"
                    )));
                }
                Ok(())
            }
        }
    }
}

/// Catalogued exponent profiles for building variable-exponent fields; the
/// smoothed step is C² and log-Hölder continuous by construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "snake_case", deny_unknown_fields)]
pub enum ExponentProfile {
    Constant {
        r: f64,
    },
    /// r_neg for x₀ ≪ center, r_pos for x₀ ≫ center, smooth transition of
    /// half-width `width` along the first axis.
    SmoothedStep {
        r_neg: f64,
        r_pos: f64,
        #[serde(default)]
        center: f64,
        #[serde(default = "default_step_width")]
        width: f64,
    },
}

fn default_step_width() -> f64 {
    0.5
}

impl ExponentProfile {
    pub fn validate(&self) -> Result<()> {
        match self {
            ExponentProfile::Constant { r } => check_finite_exponent(*r, "constant exponent"),
            ExponentProfile::SmoothedStep {
                r_neg,
                r_pos,
                center,
                width,
            } => {
                check_finite_exponent(*r_neg, "step exponent r_neg")?;
                check_finite_exponent(*r_pos, "step exponent r_pos")?;
                if !center.is_finite() || !(width.is_finite() && *width > 0.0) {
                    return Err(Error::InvalidInput(
                        "step profile needs a finite center and positive width".into(),
                    ));
                }
                Ok(())
            }
        }
    }

    pub fn sample(&self, lattice: &Lattice) -> Result<GridFunction> {
        self.validate()?;
        let values = match *self {
            ExponentProfile::Constant { r } => vec![r; lattice.len()],
            ExponentProfile::SmoothedStep {
                r_neg,
                r_pos,
                center,
                width,
            } => {
                let mut x = [0.0; MAX_DIM];
                (0..lattice.len())
                    .map(|i| {
                        lattice.node(i, &mut x);
                        r_neg + (r_pos - r_neg) * smooth_step((x[0] - center) / width)
                    })
                    .collect()
            }
        };
        GridFunction::new(lattice.clone(), values)
    }
}

/// |v|^p with the exact special cases p = 1, 2 (no powf roundoff).
fn pow_abs(v: f64, p: f64) -> f64 {
    let a = v.abs();
    if p == 1.0 {
        a
    } else if p == 2.0 {
        a * a
    } else {
        a.powf(p)
    }
}

/// x^{1/p} with the exact special cases p = 1, 2.
fn root(x: f64, p: f64) -> f64 {
    if p == 1.0 {
        x
    } else if p == 2.0 {
        x.sqrt()
    } else {
        x.powf(1.0 / p)
    }
}

/// ‖f‖_X for the given space; for the Morrey family this is a certified
/// lower bound of the supremum (finite candidate family).
pub fn norm(space: &SpaceSpec, f: &GridFunction) -> Result<f64> {
    space.validate()?;
    match space {
        SpaceSpec::Lebesgue { p } => lebesgue_norm(f, *p, None),
        SpaceSpec::WeightedLebesgue { p, w } => {
            let weight = sample_weight(w, &f.lattice)?;
            lebesgue_norm(f, *p, Some(&weight))
        }
        SpaceSpec::Morrey { r, alpha } => morrey_norm(f, *r, *alpha),
        SpaceSpec::MixedNorm { r_vec } => mixed_norm(f, r_vec),
        SpaceSpec::VariableLebesgue { r_field } => variable_norm(f, r_field),
        SpaceSpec::Orlicz { phi } => orlicz_norm(f, phi),
        SpaceSpec::OrliczSlice { phi, r, t } => orlicz_slice_norm(f, phi, *r, *t),
    }
}

fn lebesgue_norm(f: &GridFunction, p: f64, weight: Option<&GridFunction>) -> Result<f64> {
    if p.is_infinite() {
        return Ok(f.max_abs());
    }
    let powered = f.map(|v| pow_abs(v, p));
    Ok(root(integrate(&powered, weight)?, p))
}

/// Unit-ball volumes for n = 1, 2, 3.
fn ball_volume(n: usize, rho: f64) -> f64 {
    match n {
        1 => 2.0 * rho,
        2 => std::f64::consts::PI * rho * rho,
        _ => 4.0 * std::f64::consts::FRAC_PI_3 * rho * rho * rho,
    }
}

/// Stride-4 node indices per axis, always including both endpoints.
fn stride_centers(npts: usize) -> Vec<usize> {
    let mut v: Vec<usize> = (0..npts).step_by(4).collect();
    if *v.last().unwrap() != npts - 1 {
        v.push(npts - 1);
    }
    v
}

/// Geometric radius ladder (ratio 2^{1/12}) from one spacing to just past
/// the window diagonal, so the largest ball contains every node from every
/// candidate center.
fn radius_ladder(lat: &Lattice) -> Vec<f64> {
    let ratio = 2f64.powf(1.0 / 12.0);
    let diag = (0..lat.dim())
        .map(|a| (lat.hi(a) - lat.lo(a)).powi(2))
        .sum::<f64>()
        .sqrt();
    let mut radii = vec![lat.max_spacing()];
    while *radii.last().unwrap() <= diag {
        let next = radii.last().unwrap() * ratio;
        radii.push(next);
    }
    radii
}

fn morrey_norm(f: &GridFunction, r: f64, alpha: f64) -> Result<f64> {
    let lat = &f.lattice;
    let n = lat.dim();
    let cell = lat.cell_measure();
    let exp = 1.0 / alpha - 1.0 / r;
    // |f|^r premultiplied by the trapezoid factor; the cell measure is
    // applied once per candidate. A full-window ball then reproduces
    // integrate(|f|^r) exactly.
    let mut g = vec![0.0; lat.len()];
    for (flat, multi) in lat.iter_multi() {
        g[flat] = pow_abs(f.values[flat], r) * lat.trapezoid_factor(&multi);
    }
    let radii = radius_ladder(lat);
    let centers: Vec<Vec<usize>> = (0..n).map(|a| stride_centers(lat.points(a))).collect();

    let best = match n {
        1 => {
            let n0 = lat.points(0);
            let h0 = lat.spacing(0);
            let mut prefix = Vec::with_capacity(n0 + 1);
            prefix.push(0.0);
            let mut acc = 0.0;
            for &v in &g {
                acc += v;
                prefix.push(acc);
            }
            let mut best = 0.0f64;
            for &rho in &radii {
                let k = max_offset(rho, h0);
                let vol = ball_volume(1, rho).powf(exp);
                for &c in &centers[0] {
                    let a = c.saturating_sub(k);
                    let b = (c + k).min(n0 - 1);
                    let mass = (prefix[b + 1] - prefix[a]).max(0.0) * cell;
                    best = best.max(vol * root(mass, r));
                }
            }
            best
        }
        2 => {
            let (n0, n1) = (lat.points(0), lat.points(1));
            let (h0, h1) = (lat.spacing(0), lat.spacing(1));
            let mut prefix = vec![0.0; n0 * (n1 + 1)];
            for i in 0..n0 {
                let row = &g[i * n1..(i + 1) * n1];
                let p = &mut prefix[i * (n1 + 1)..(i + 1) * (n1 + 1)];
                let mut acc = 0.0;
                for (j, &v) in row.iter().enumerate() {
                    acc += v;
                    p[j + 1] = acc;
                }
            }
            let mut best = 0.0f64;
            for &rho in &radii {
                let k0 = max_offset(rho, h0) as i64;
                let half: Vec<i64> = (0..=k0)
                    .map(|d0| {
                        let rem = rho * rho - (d0 as f64 * h0) * (d0 as f64 * h0);
                        if rem <= 0.0 {
                            return -1;
                        }
                        let mut k = (rem.sqrt() / h1).ceil() as i64 - 1;
                        while ((k + 1) as f64 * h1) * ((k + 1) as f64 * h1) < rem {
                            k += 1;
                        }
                        while k >= 0 && (k as f64 * h1) * (k as f64 * h1) >= rem {
                            k -= 1;
                        }
                        k
                    })
                    .collect();
                let vol = ball_volume(2, rho).powf(exp);
                let round_best = centers[0]
                    .par_iter()
                    .map(|&c0| {
                        let mut local = 0.0f64;
                        for &c1 in &centers[1] {
                            let mut mass = 0.0;
                            for d0 in -k0..=k0 {
                                let row = c0 as i64 + d0;
                                if row < 0 || row >= n0 as i64 {
                                    continue;
                                }
                                let hw = half[d0.unsigned_abs() as usize];
                                if hw < 0 {
                                    continue;
                                }
                                let a = (c1 as i64 - hw).max(0) as usize;
                                let b = ((c1 as i64 + hw).min(n1 as i64 - 1)) as usize;
                                let p = &prefix[row as usize * (n1 + 1)..];
                                mass += p[b + 1] - p[a];
                            }
                            local = local.max(vol * root((mass * cell).max(0.0), r));
                        }
                        local
                    })
                    .reduce(|| 0.0, f64::max);
                best = best.max(round_best);
            }
            best
        }
        _ => {
            let dims: Vec<i64> = (0..n).map(|a| lat.points(a) as i64).collect();
            let mut best = 0.0f64;
            for &rho in &radii {
                let offsets = ball_offsets(lat, rho);
                let vol = ball_volume(3, rho).powf(exp);
                let mut centers_flat = Vec::new();
                for &c0 in &centers[0] {
                    for &c1 in &centers[1] {
                        for &c2 in &centers[2] {
                            centers_flat.push([c0 as i64, c1 as i64, c2 as i64]);
                        }
                    }
                }
                let round_best = centers_flat
                    .par_iter()
                    .map(|c| {
                        let mut mass = 0.0;
                        'offs: for off in &offsets {
                            let mut flat = 0usize;
                            for a in 0..n {
                                let y = c[a] + off[a];
                                if y < 0 || y >= dims[a] {
                                    continue 'offs;
                                }
                                flat = flat * dims[a] as usize + y as usize;
                            }
                            mass += g[flat];
                        }
                        vol * root((mass * cell).max(0.0), r)
                    })
                    .reduce(|| 0.0, f64::max);
                best = best.max(round_best);
            }
            best
        }
    };
    Ok(best)
}

fn mixed_norm(f: &GridFunction, r_vec: &[f64]) -> Result<f64> {
    let lat = &f.lattice;
    let n = lat.dim();
    if r_vec.len() != n {
        return Err(Error::InvalidInput(format!(
            "mixed norm has {} exponents for a {n}-dimensional field",
            r_vec.len()
        )));
    }
    let mut vals: Vec<f64> = f.values.iter().map(|v| v.abs()).collect();
    let mut dims: Vec<usize> = (0..n).map(|a| lat.points(a)).collect();
    for (axis, &r) in r_vec.iter().enumerate() {
        let npts = dims[0];
        let rest: usize = dims[1..].iter().product();
        let h = lat.spacing(axis);
        let mut out = vec![0.0; rest];
        for (j, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for i in 0..npts {
                let w = if i == 0 || i + 1 == npts { 0.5 } else { 1.0 };
                acc += pow_abs(vals[i * rest + j], r) * w;
            }
            *o = root(acc * h, r);
        }
        vals = out;
        dims.remove(0);
    }
    Ok(vals[0])
}

/// Bisect a decreasing modular against 1. Guarantees (for nonzero input):
/// the returned λ satisfies |modular(λ) − 1| within the bracket slack, the
/// bracket having relative width ≤ 1e−14 or the modular pinned to 1e−12.
fn luxemburg<M: Fn(f64) -> f64>(modular: M, seed: f64) -> Result<f64> {
    let mut hi = seed;
    let mut guard = 0;
    while modular(hi) > 1.0 {
        hi *= 2.0;
        guard += 1;
        if guard > 4096 {
            return Err(Error::Internal("Luxemburg bracket ran away upward".into()));
        }
    }
    let mut lo = 0.5 * hi;
    guard = 0;
    while modular(lo) < 1.0 {
        hi = lo;
        lo *= 0.5;
        guard += 1;
        if guard > 4096 {
            return Err(Error::Internal("Luxemburg bracket ran away downward".into()));
        }
    }
    // modular(lo) ≥ 1 ≥ modular(hi)
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let m = modular(mid);
        if (m - 1.0).abs() <= 1e-12 {
            return Ok(mid);
        }
        if m > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Nonzero values with their exponents and integration weights.
fn modular_terms(
    f: &GridFunction,
    exponent: impl Fn(usize) -> f64,
) -> (Vec<(f64, f64, f64)>, f64) {
    let lat = &f.lattice;
    let cell = lat.cell_measure();
    let mut terms = Vec::new();
    let mut vmax = 0.0f64;
    for (flat, multi) in lat.iter_multi() {
        let v = f.values[flat].abs();
        if v > 0.0 {
            terms.push((v, exponent(flat), lat.trapezoid_factor(&multi) * cell));
            vmax = vmax.max(v);
        }
    }
    (terms, vmax)
}

fn variable_norm(f: &GridFunction, r_field: &GridFunction) -> Result<f64> {
    f.check_same_lattice(r_field)?;
    let (terms, vmax) = modular_terms(f, |flat| r_field.values[flat]);
    if terms.is_empty() {
        return Ok(0.0);
    }
    let modular =
        |lambda: f64| terms.iter().map(|&(v, p, w)| w * (v / lambda).powf(p)).sum::<f64>();
    luxemburg(modular, vmax)
}

fn orlicz_norm(f: &GridFunction, phi: &OrliczSpec) -> Result<f64> {
    match phi.family {
        // Φ = t^p makes the Luxemburg norm the plain L^p norm, exactly.
        OrliczFamily::Power => lebesgue_norm(f, phi.p, None),
        OrliczFamily::PowerLog => {
            let (terms, vmax) = modular_terms(f, |_| 0.0);
            if terms.is_empty() {
                return Ok(0.0);
            }
            let modular = |lambda: f64| {
                terms.iter().map(|&(v, _, w)| w * phi.eval(v / lambda)).sum::<f64>()
            };
            luxemburg(modular, vmax)
        }
    }
}

fn orlicz_slice_norm(f: &GridFunction, phi: &OrliczSpec, r: f64, t: f64) -> Result<f64> {
    let lat = &f.lattice;
    let n = lat.dim();
    let cell = lat.cell_measure();
    let offsets = ball_offsets(lat, t);
    let n_ball = offsets.len() as f64; // ≥ 1: the zero offset is always inside
    let mu = cell * n_ball;
    let one_norm = match phi.family {
        OrliczFamily::Power => root(mu, phi.p),
        OrliczFamily::PowerLog => {
            // ‖1_B‖_Φ solves Φ(1/λ)·μ(B) = 1.
            luxemburg(|lambda: f64| mu * phi.eval(1.0 / lambda), 1.0)?
        }
    };
    let ks: Vec<i64> = (0..n).map(|a| max_offset(t, lat.spacing(a)) as i64).collect();
    let dims: Vec<i64> = (0..n).map(|a| lat.points(a) as i64).collect();
    let pdims: Vec<usize> = (0..n).map(|a| lat.points(a) + 2 * ks[a] as usize).collect();
    let total: usize = pdims.iter().product();

    let ratios: Vec<f64> = (0..total)
        .into_par_iter()
        .map(|padded_flat| -> Result<f64> {
            let mut rem = padded_flat;
            let mut c = [0i64; MAX_DIM];
            for a in (0..n).rev() {
                c[a] = (rem % pdims[a]) as i64 - ks[a];
                rem /= pdims[a];
            }
            match phi.family {
                OrliczFamily::Power => {
                    let mut acc = 0.0;
                    'offs: for off in &offsets {
                        let mut flat = 0usize;
                        for a in 0..n {
                            let y = c[a] + off[a];
                            if y < 0 || y >= dims[a] {
                                continue 'offs;
                            }
                            flat = flat * dims[a] as usize + y as usize;
                        }
                        acc += pow_abs(f.values[flat], phi.p);
                    }
                    Ok(root(acc / n_ball, phi.p))
                }
                OrliczFamily::PowerLog => {
                    let mut vals = Vec::new();
                    let mut vmax = 0.0f64;
                    'offs2: for off in &offsets {
                        let mut flat = 0usize;
                        for a in 0..n {
                            let y = c[a] + off[a];
                            if y < 0 || y >= dims[a] {
                                continue 'offs2;
                            }
                            flat = flat * dims[a] as usize + y as usize;
                        }
                        let v = f.values[flat].abs();
                        if v > 0.0 {
                            vals.push(v);
                            vmax = vmax.max(v);
                        }
                    }
                    if vals.is_empty() {
                        return Ok(0.0);
                    }
                    let modular = |lambda: f64| {
                        vals.iter().map(|&v| cell * phi.eval(v / lambda)).sum::<f64>()
                    };
                    Ok(luxemburg(modular, vmax)? / one_norm)
                }
            }
        })
        .collect::<Result<Vec<f64>>>()?;

    let mut acc = 0.0;
    for &ratio in &ratios {
        acc += pow_abs(ratio, r) * cell;
    }
    Ok(root(acc, r))
}

/// The `SpaceSpec` of X^s, defined by ‖f‖_{X^s} = ‖|f|^s‖_X^{1/s}. Exponents scale
/// by s; the power Young function t^p maps to t^{ps}; the power-log family
/// is not closed under this map.
pub fn convexify(space: &SpaceSpec, s: f64) -> Result<SpaceSpec> {
    if !(s.is_finite() && s > 0.0) {
        return Err(Error::InvalidInput(format!(
            "convexification power s = {s} must be positive and finite"
        )));
    }
    let out = match space {
        SpaceSpec::Lebesgue { p } => SpaceSpec::Lebesgue { p: p * s },
        SpaceSpec::WeightedLebesgue { p, w } => SpaceSpec::WeightedLebesgue {
            p: p * s,
            w: w.clone(),
        },
        SpaceSpec::Morrey { r, alpha } => SpaceSpec::Morrey {
            r: r * s,
            alpha: alpha * s,
        },
        SpaceSpec::MixedNorm { r_vec } => SpaceSpec::MixedNorm {
            r_vec: r_vec.iter().map(|r| r * s).collect(),
        },
        SpaceSpec::VariableLebesgue { r_field } => SpaceSpec::VariableLebesgue {
            r_field: r_field.map(|v| v * s),
        },
        SpaceSpec::Orlicz { phi } => SpaceSpec::Orlicz {
            phi: convexify_phi(phi, s)?,
        },
        SpaceSpec::OrliczSlice { phi, r, t } => SpaceSpec::OrliczSlice {
            phi: convexify_phi(phi, s)?,
            r: r * s,
            t: *t,
        },
    };
    out.validate()?;
    Ok(out)
}

fn convexify_phi(phi: &OrliczSpec, s: f64) -> Result<OrliczSpec> {
    match phi.family {
        OrliczFamily::Power => Ok(OrliczSpec {
            family: OrliczFamily::Power,
            p: phi.p * s,
        }),
        OrliczFamily::PowerLog => Err(Error::Unsupported(
            "t^p·log(e+t) has no catalogued convexification".into(),
        )),
    }
}

fn conjugate(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}

/// ω ↦ ω^e inside the analytic weight catalogue.
fn weight_power(w: &WeightSpec, e: f64) -> WeightSpec {
    match w {
        WeightSpec::Constant { value } => WeightSpec::Constant {
            value: value.powf(e),
        },
        WeightSpec::Power { a, center } => WeightSpec::Power {
            a: a * e,
            center: center.clone(),
        },
        WeightSpec::Step { v_neg, v_pos } => WeightSpec::Step {
            v_neg: v_neg.powf(e),
            v_pos: v_pos.powf(e),
        },
        WeightSpec::Product { factors } => WeightSpec::Product {
            factors: factors.iter().map(|f| weight_power(f, e)).collect(),
        },
    }
}

/// Catalogued associate space X′: (L^p)′ = L^{p′}; (L^p_ω)′ = L^{p′}
/// weighted by ω^{1−p′} for p > 1; the power Orlicz family is L^p itself.
pub fn associate(space: &SpaceSpec) -> Result<SpaceSpec> {
    match space {
        SpaceSpec::Lebesgue { p } => Ok(SpaceSpec::Lebesgue { p: conjugate(*p) }),
        SpaceSpec::WeightedLebesgue { p, w } => {
            if *p <= 1.0 {
                return Err(Error::Unsupported(
                    "associate of a weighted L¹ space is not catalogued".into(),
                ));
            }
            let q = conjugate(*p);
            Ok(SpaceSpec::WeightedLebesgue {
                p: q,
                w: weight_power(w, 1.0 - q),
            })
        }
        SpaceSpec::Orlicz { phi } if phi.family == OrliczFamily::Power => {
            Ok(SpaceSpec::Lebesgue {
                p: conjugate(phi.p),
            })
        }
        _ => Err(Error::Unsupported(
            "associate space not catalogued for this family".into(),
        )),
    }
}

/// (∫|fg|, ‖f‖_X·‖g‖_{X′}); the first is ≤ the second (Hölder).
pub fn holder_pairing(
    f: &GridFunction,
    g: &GridFunction,
    space: &SpaceSpec,
) -> Result<(f64, f64)> {
    let assoc = associate(space)?;
    let product = f.zip_with(g, |a, b| (a * b).abs())?;
    let lhs = integrate(&product, None)?;
    let rhs = norm(space, f)? * norm(&assoc, g)?;
    Ok((lhs, rhs))
}

/// ‖1_B‖_X·‖1_B‖_{X′}/|B| for the open ball B; |B| is the discrete measure
/// integrate(1_B). Falls back to a probe-family lower bound of ‖1_B‖_{X′}
/// when the associate is not catalogued (the 1_B probe alone already gives
/// the Hölder floor of 1).
pub fn indicator_duality(
    space: &SpaceSpec,
    lattice: &Lattice,
    center: &[f64],
    radius: f64,
) -> Result<f64> {
    if center.len() != lattice.dim() {
        return Err(Error::InvalidInput(
            "ball center dimension differs from the lattice".into(),
        ));
    }
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::InvalidInput(format!("ball radius {radius} must be positive")));
    }
    let indicator = ball_indicator(lattice, center, radius)?;
    let measure = integrate(&indicator, None)?;
    if measure <= 0.0 {
        return Err(Error::InvalidInput(
            "the ball contains no lattice node".into(),
        ));
    }
    let primal = norm(space, &indicator)?;
    let dual = match associate(space) {
        Ok(assoc) => norm(&assoc, &indicator)?,
        Err(Error::Unsupported(_)) => {
            // sup_g ∫ 1_B·g / ‖g‖_X over a small probe family.
            let mut probes = vec![indicator.clone()];
            if let Ok(half) = ball_indicator(lattice, center, 0.5 * radius) {
                if half.values.iter().any(|&v| v > 0.0) {
                    probes.push(half);
                }
            }
            let bump = FunctionSpec::SmoothBump {
                center: center.to_vec(),
                radius,
                height: 1.0,
            };
            probes.push(sample(&bump, lattice)?);
            let mut best = 0.0f64;
            for probe in &probes {
                let denom = norm(space, probe)?;
                if denom <= 0.0 {
                    continue;
                }
                let pairing = integrate(&indicator.zip_with(probe, |a, b| (a * b).abs())?, None)?;
                best = best.max(pairing / denom);
            }
            best
        }
        Err(e) => return Err(e),
    };
    Ok(primal * dual / measure)
}

fn ball_indicator(lattice: &Lattice, center: &[f64], radius: f64) -> Result<GridFunction> {
    let n = lattice.dim();
    let r2 = radius * radius;
    let mut x = [0.0; MAX_DIM];
    let values = (0..lattice.len())
        .map(|i| {
            lattice.node(i, &mut x);
            let d2: f64 = (0..n).map(|a| (x[a] - center[a]).powi(2)).sum();
            if d2 < r2 {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    GridFunction::new(lattice.clone(), values)
}
