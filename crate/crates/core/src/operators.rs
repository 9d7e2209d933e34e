//! Ball averages, the Hardy–Littlewood maximal operator, the Riesz
//! potential, operator-norm probing, and the Rubio de Francia iteration.
//!
//! Discrete conventions (frozen): balls are *open* Euclidean balls of lattice
//! nodes, so the smallest admissible radius (one spacing) gives the singleton
//! ball and the uncentered maximal function dominates |f| pointwise.
//! Averages are taken over the nodes inside the window (in-window node
//! measure), which preserves constants up to the boundary. The candidate set
//! of the maximal operator (stride sub-lattice of centers × a finite radius
//! list) makes the computed Mf a certified lower bound of the true Mf; every
//! assertion built on it is one-sided or comparative.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{integrate, GridFunction, Lattice, MAX_DIM};
use crate::quad;
use crate::spaces::{self, SpaceSpec};

/// Where ball centers live for the maximal supremum.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MaximalMode {
    Centered,
    Uncentered,
}

/// Candidate set for the maximal operator.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MaximalConfig {
    pub mode: MaximalMode,
    /// Strictly increasing ball radii, each ≥ the lattice spacing.
    pub radii: Vec<f64>,
    /// Centers live on every `center_stride`-th node per axis (uncentered mode).
    pub center_stride: usize,
}

impl MaximalConfig {
    /// Geometric radii doubling from one spacing up to the window size;
    /// stride 1 in 1D, 2 in higher dimensions.
    pub fn default_for(lattice: &Lattice, mode: MaximalMode) -> Self {
        let h = lattice.max_spacing();
        let window = (0..lattice.dim())
            .map(|a| lattice.hi(a) - lattice.lo(a))
            .fold(0.0, f64::max);
        let mut radii = Vec::new();
        let mut r = h;
        while r <= window * (1.0 + 1e-12) {
            radii.push(r);
            r *= 2.0;
        }
        MaximalConfig {
            mode,
            radii,
            center_stride: if lattice.dim() == 1 { 1 } else { 2 },
        }
    }

    pub fn validate(&self, lattice: &Lattice) -> Result<()> {
        if self.radii.is_empty() {
            return Err(Error::InvalidInput("maximal operator needs a radius list".into()));
        }
        if self.center_stride == 0 {
            return Err(Error::InvalidInput("center stride must be ≥ 1".into()));
        }
        let h = lattice.max_spacing();
        if self.radii[0] < h * (1.0 - 1e-12) {
            return Err(Error::InvalidInput(format!(
                "smallest radius {} is below the lattice spacing {h}",
                self.radii[0]
            )));
        }
        if self.radii.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput("radii must be strictly increasing".into()));
        }
        Ok(())
    }
}

/// Largest per-axis node offset inside the open ball of radius r.
pub(crate) fn max_offset(r: f64, h: f64) -> usize {
    let mut k = (r / h).ceil() as i64 - 1;
    while (k + 1) as f64 * h < r {
        k += 1;
    }
    while k >= 0 && k as f64 * h >= r {
        k -= 1;
    }
    k.max(0) as usize
}

/// Centered average of |f| over the open ball of radius r (in-window nodes).
pub fn ball_average(f: &GridFunction, r: f64) -> Result<GridFunction> {
    let lat = &f.lattice;
    if !(r.is_finite() && r >= lat.max_spacing() * (1.0 - 1e-12)) {
        return Err(Error::InvalidInput(format!(
            "ball radius {r} must be at least the lattice spacing {}",
            lat.max_spacing()
        )));
    }
    let values = match lat.dim() {
        1 => ball_average_1d(f, r),
        2 => ball_average_2d(f, r),
        _ => ball_average_nd(f, r),
    };
    GridFunction::new(lat.clone(), values)
}

fn ball_average_1d(f: &GridFunction, r: f64) -> Vec<f64> {
    let lat = &f.lattice;
    let n = lat.points(0);
    let k = max_offset(r, lat.spacing(0));
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0);
    let mut acc = 0.0;
    for &v in &f.values {
        acc += v.abs();
        prefix.push(acc);
    }
    (0..n)
        .map(|i| {
            let a = i.saturating_sub(k);
            let b = (i + k).min(n - 1);
            (prefix[b + 1] - prefix[a]) / (b - a + 1) as f64
        })
        .collect()
}

/// Per-row half-widths of the open disc/shell, then row prefix sums.
fn ball_average_2d(f: &GridFunction, r: f64) -> Vec<f64> {
    let lat = &f.lattice;
    let (n0, n1) = (lat.points(0), lat.points(1));
    let (h0, h1) = (lat.spacing(0), lat.spacing(1));
    let k0 = max_offset(r, h0);
    // Row half-width per |d0|: largest |d1| with (d0·h0)² + (d1·h1)² < r².
    let half: Vec<i64> = (0..=k0 as i64)
        .map(|d0| {
            let rem = r * r - (d0 as f64 * h0) * (d0 as f64 * h0);
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
    let mut prefix = vec![0.0; n0 * (n1 + 1)];
    for i in 0..n0 {
        let row = &f.values[i * n1..(i + 1) * n1];
        let p = &mut prefix[i * (n1 + 1)..(i + 1) * (n1 + 1)];
        let mut acc = 0.0;
        for (j, &v) in row.iter().enumerate() {
            acc += v.abs();
            p[j + 1] = acc;
        }
    }
    (0..n0 * n1)
        .into_par_iter()
        .map(|flat| {
            let (i, j) = (flat / n1, flat % n1);
            let mut sum = 0.0;
            let mut count = 0usize;
            for d0 in -(k0 as i64)..=k0 as i64 {
                let row = i as i64 + d0;
                if row < 0 || row >= n0 as i64 {
                    continue;
                }
                let hw = half[d0.unsigned_abs() as usize];
                if hw < 0 {
                    continue;
                }
                let a = (j as i64 - hw).max(0) as usize;
                let b = ((j as i64 + hw).min(n1 as i64 - 1)) as usize;
                let p = &prefix[row as usize * (n1 + 1)..];
                sum += p[b + 1] - p[a];
                count += b - a + 1;
            }
            sum / count as f64
        })
        .collect()
}

fn ball_average_nd(f: &GridFunction, r: f64) -> Vec<f64> {
    let lat = &f.lattice;
    let n = lat.dim();
    let offsets = ball_offsets(lat, r);
    let dims: Vec<i64> = (0..n).map(|a| lat.points(a) as i64).collect();
    (0..lat.len())
        .into_par_iter()
        .map(|flat| {
            let mut idx = [0usize; MAX_DIM];
            lat.multi(flat, &mut idx);
            let mut sum = 0.0;
            let mut count = 0usize;
            'offs: for off in &offsets {
                let mut target = 0usize;
                for a in 0..n {
                    let t = idx[a] as i64 + off[a];
                    if t < 0 || t >= dims[a] {
                        continue 'offs;
                    }
                    target = target * dims[a] as usize + t as usize;
                }
                sum += f.values[target].abs();
                count += 1;
            }
            sum / count as f64
        })
        .collect()
}

/// All node offsets strictly inside the open ball of radius r.
pub(crate) fn ball_offsets(lat: &Lattice, r: f64) -> Vec<[i64; MAX_DIM]> {
    let n = lat.dim();
    let ks: Vec<i64> = (0..n).map(|a| max_offset(r, lat.spacing(a)) as i64).collect();
    let mut out = Vec::new();
    let mut off = [0i64; MAX_DIM];
    fn rec(
        a: usize,
        n: usize,
        ks: &[i64],
        lat: &Lattice,
        r2: f64,
        off: &mut [i64; MAX_DIM],
        out: &mut Vec<[i64; MAX_DIM]>,
    ) {
        if a == n {
            let d2: f64 = (0..n)
                .map(|b| {
                    let d = off[b] as f64 * lat.spacing(b);
                    d * d
                })
                .sum();
            if d2 < r2 {
                out.push(*off);
            }
            return;
        }
        for v in -ks[a]..=ks[a] {
            off[a] = v;
            rec(a + 1, n, ks, lat, r2, off, out);
        }
    }
    rec(0, n, &ks, lat, r * r, &mut off, &mut out);
    out
}

/// Hardy–Littlewood maximal function over the configured candidate set.
pub fn maximal(f: &GridFunction, cfg: &MaximalConfig) -> Result<GridFunction> {
    let lat = &f.lattice;
    cfg.validate(lat)?;
    let mut out = vec![f64::NEG_INFINITY; lat.len()];
    for &r in &cfg.radii {
        let avg = ball_average(f, r)?;
        match cfg.mode {
            MaximalMode::Centered => {
                for (o, &a) in out.iter_mut().zip(&avg.values) {
                    if a > *o {
                        *o = a;
                    }
                }
            }
            MaximalMode::Uncentered => {
                let covered = uncentered_max(&avg, r, cfg.center_stride);
                for (o, a) in out.iter_mut().zip(covered) {
                    if a > *o {
                        *o = a;
                    }
                }
            }
        }
    }
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::Internal(
            "maximal candidate set left a node uncovered".into(),
        ));
    }
    GridFunction::new(lat.clone(), out)
}

/// Per node, max of `avg` over stride-sublattice centers whose open ball of
/// radius r contains the node. NEG_INFINITY where no candidate covers.
fn uncentered_max(avg: &GridFunction, r: f64, stride: usize) -> Vec<f64> {
    let lat = &avg.lattice;
    match lat.dim() {
        1 => {
            let n = lat.points(0);
            let k = max_offset(r, lat.spacing(0)) as i64;
            let centers: Vec<usize> = (0..n).step_by(stride).collect();
            let mut out = vec![f64::NEG_INFINITY; n];
            // Monotone deque over the center list; windows advance with x.
            let mut deque: std::collections::VecDeque<usize> = Default::default();
            let mut next = 0usize;
            for (x, o) in out.iter_mut().enumerate() {
                let lo = x as i64 - k;
                let hi = x as i64 + k;
                while next < centers.len() && (centers[next] as i64) <= hi {
                    let v = avg.values[centers[next]];
                    while let Some(&b) = deque.back() {
                        if avg.values[centers[b]] <= v {
                            deque.pop_back();
                        } else {
                            break;
                        }
                    }
                    deque.push_back(next);
                    next += 1;
                }
                while let Some(&fr) = deque.front() {
                    if (centers[fr] as i64) < lo {
                        deque.pop_front();
                    } else {
                        break;
                    }
                }
                if let Some(&fr) = deque.front() {
                    *o = avg.values[centers[fr]];
                }
            }
            out
        }
        _ => {
            let n = lat.dim();
            let dims: Vec<i64> = (0..n).map(|a| lat.points(a) as i64).collect();
            let ks: Vec<i64> = (0..n).map(|a| max_offset(r, lat.spacing(a)) as i64).collect();
            let r2 = r * r;
            (0..lat.len())
                .into_par_iter()
                .map(|flat| {
                    let mut idx = [0usize; MAX_DIM];
                    lat.multi(flat, &mut idx);
                    let mut best = f64::NEG_INFINITY;
                    // Iterate stride-aligned centers in the offset box.
                    let mut c = [0i64; MAX_DIM];
                    fn rec(
                        a: usize,
                        n: usize,
                        idx: &[usize; MAX_DIM],
                        ks: &[i64],
                        dims: &[i64],
                        stride: usize,
                        lat: &Lattice,
                        r2: f64,
                        avg: &[f64],
                        c: &mut [i64; MAX_DIM],
                        best: &mut f64,
                    ) {
                        if a == n {
                            let d2: f64 = (0..n)
                                .map(|b| {
                                    let d = (c[b] - idx[b] as i64) as f64 * lat.spacing(b);
                                    d * d
                                })
                                .sum();
                            if d2 < r2 {
                                let mut flat = 0usize;
                                for b in 0..n {
                                    flat = flat * dims[b] as usize + c[b] as usize;
                                }
                                if avg[flat] > *best {
                                    *best = avg[flat];
                                }
                            }
                            return;
                        }
                        let lo = (idx[a] as i64 - ks[a]).max(0);
                        let hi = (idx[a] as i64 + ks[a]).min(dims[a] - 1);
                        let mut v = lo.div_euclid(stride as i64) * stride as i64;
                        if v < lo {
                            v += stride as i64;
                        }
                        while v <= hi {
                            c[a] = v;
                            rec(a + 1, n, idx, ks, dims, stride, lat, r2, avg, c, best);
                            v += stride as i64;
                        }
                    }
                    rec(
                        0,
                        n,
                        &idx,
                        &ks,
                        &dims,
                        stride,
                        lat,
                        r2,
                        &avg.values,
                        &mut c,
                        &mut best,
                    );
                    best
                })
                .collect()
        }
    }
}

/// Exact integral of |z|^{1−n} over one lattice cell centered at the origin.
fn self_cell_correction(lat: &Lattice) -> Result<f64> {
    let n = lat.dim();
    let h = lat.spacing(0);
    for a in 1..n {
        if (lat.spacing(a) - h).abs() > 1e-12 * h {
            return Err(Error::Unsupported(
                "Riesz self-cell correction needs equal spacings".into(),
            ));
        }
    }
    Ok(match n {
        1 => h,                                  // kernel ≡ 1
        2 => 4.0 * h * (1.0 + std::f64::consts::SQRT_2).ln(), // ∫_cell |z|⁻¹
        _ => h * unit_cube_inverse_square(),     // h·∫_{[-1/2,1/2]³} |u|⁻²
    })
}

/// ∫_{[−1/2,1/2]³} |u|^{−2} du, via J = 2·(shell integral): the cube integral
/// satisfies J(c) = c·J(1), so J(1) = J(1)/2 + S with S the smooth integral
/// over the 3×3×3 shell boxes around the inner half-cube.
fn unit_cube_inverse_square() -> f64 {
    use std::sync::OnceLock;
    static VAL: OnceLock<f64> = OnceLock::new();
    *VAL.get_or_init(|| {
        let cuts = [-0.5, -0.25, 0.25, 0.5];
        let (nodes, weights) = quad::gauss_legendre(24);
        let mut shell = 0.0;
        for bx in 0..3 {
            for by in 0..3 {
                for bz in 0..3 {
                    if bx == 1 && by == 1 && bz == 1 {
                        continue;
                    }
                    let (x0, x1) = (cuts[bx], cuts[bx + 1]);
                    let (y0, y1) = (cuts[by], cuts[by + 1]);
                    let (z0, z1) = (cuts[bz], cuts[bz + 1]);
                    let mut acc = 0.0;
                    for (xu, wx) in nodes.iter().zip(&weights) {
                        let x = 0.5 * (x0 + x1) + 0.5 * (x1 - x0) * xu;
                        for (yu, wy) in nodes.iter().zip(&weights) {
                            let y = 0.5 * (y0 + y1) + 0.5 * (y1 - y0) * yu;
                            for (zu, wz) in nodes.iter().zip(&weights) {
                                let z = 0.5 * (z0 + z1) + 0.5 * (z1 - z0) * zu;
                                acc += wx * wy * wz / (x * x + y * y + z * z);
                            }
                        }
                    }
                    shell += acc * 0.125 * (x1 - x0) * (y1 - y0) * (z1 - z0);
                }
            }
        }
        2.0 * shell
    })
}

/// Riesz potential I₁: per node, Σ_y g(y)·|x−y|^{1−n}·cell + the analytic
/// self-cell term. An optional mask restricts the source to Ω.
pub fn riesz_potential(g: &GridFunction, region_mask: Option<&[bool]>) -> Result<GridFunction> {
    let lat = &g.lattice;
    let n = lat.dim();
    if let Some(m) = region_mask {
        if m.len() != g.values.len() {
            return Err(Error::LatticeMismatch(
                "region mask length differs from the field".into(),
            ));
        }
    }
    let cell = lat.cell_measure();
    let self_term = self_cell_correction(lat)?;

    // Source list: (flat index, value), zeros skipped.
    let sources: Vec<(usize, f64)> = g
        .values
        .iter()
        .enumerate()
        .filter(|(i, v)| region_mask.map_or(true, |m| m[*i]) && **v != 0.0)
        .map(|(i, &v)| (i, v))
        .collect();

    let dims: Vec<usize> = (0..n).map(|a| lat.points(a)).collect();
    // Kernel table over absolute index offsets.
    let kernel: Vec<f64> = match n {
        1 => vec![1.0; dims[0]],
        2 => {
            let (h0, h1) = (lat.spacing(0), lat.spacing(1));
            let mut t = vec![0.0; dims[0] * dims[1]];
            for d0 in 0..dims[0] {
                for d1 in 0..dims[1] {
                    if d0 == 0 && d1 == 0 {
                        continue;
                    }
                    let d = ((d0 as f64 * h0).powi(2) + (d1 as f64 * h1).powi(2)).sqrt();
                    t[d0 * dims[1] + d1] = 1.0 / d;
                }
            }
            t
        }
        _ => {
            let (h0, h1, h2) = (lat.spacing(0), lat.spacing(1), lat.spacing(2));
            let mut t = vec![0.0; dims[0] * dims[1] * dims[2]];
            for d0 in 0..dims[0] {
                for d1 in 0..dims[1] {
                    for d2 in 0..dims[2] {
                        if d0 == 0 && d1 == 0 && d2 == 0 {
                            continue;
                        }
                        let d2sum = (d0 as f64 * h0).powi(2)
                            + (d1 as f64 * h1).powi(2)
                            + (d2 as f64 * h2).powi(2);
                        t[(d0 * dims[1] + d1) * dims[2] + d2] = 1.0 / d2sum;
                    }
                }
            }
            t
        }
    };

    let values: Vec<f64> = (0..lat.len())
        .into_par_iter()
        .map(|x| {
            let mut xi = [0usize; MAX_DIM];
            lat.multi(x, &mut xi);
            let mut acc = 0.0;
            for &(y, gv) in &sources {
                if y == x {
                    acc += gv * self_term / cell; // folded into the common cell factor
                    continue;
                }
                let mut yi = [0usize; MAX_DIM];
                lat.multi(y, &mut yi);
                let mut kidx = 0usize;
                for a in 0..n {
                    kidx = kidx * dims[a] + xi[a].abs_diff(yi[a]);
                }
                acc += gv * kernel[kidx];
            }
            acc * cell
        })
        .collect();

    GridFunction::new(lat.clone(), values)
}

/// Rubio de Francia sum and its truncation tail bound in L^p_ω.
#[derive(Clone, Debug)]
pub struct RdFResult {
    pub field: GridFunction,
    /// 2^{1−k_max}·‖g‖_{L^p_ω}: an upper bound for the discarded tail when
    /// m_norm dominates the per-step growth of the maximal orbit.
    pub tail_bound: f64,
}

/// Parameters of the Rubio de Francia iteration.
#[derive(Clone, Debug)]
pub struct RdFConfig {
    pub p: f64,
    pub weight: GridFunction,
    pub k_max: usize,
    /// Operator-norm surrogate ‖M‖; the series uses 1/(2·m_norm)^k.
    pub m_norm: f64,
}

impl RdFConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.p.is_finite() && self.p >= 1.0) {
            return Err(Error::InvalidInput("RdF exponent p must be ≥ 1".into()));
        }
        if self.k_max < 1 {
            return Err(Error::InvalidInput("RdF needs k_max ≥ 1".into()));
        }
        if !(self.m_norm.is_finite() && self.m_norm >= 1.0) {
            return Err(Error::InvalidInput("RdF norm surrogate must be ≥ 1".into()));
        }
        Ok(())
    }
}

/// Rg = Σ_{k=0}^{k_max} M^k g / (2^k·m_norm^k), with M⁰g = |g| and M the
/// uncentered maximal operator over `mcfg`.
pub fn rubio_de_francia(
    g: &GridFunction,
    cfg: &RdFConfig,
    mcfg: &MaximalConfig,
) -> Result<RdFResult> {
    cfg.validate()?;
    g.check_same_lattice(&cfg.weight)?;
    if mcfg.mode != MaximalMode::Uncentered {
        return Err(Error::InvalidInput(
            "the Rubio de Francia iteration uses the uncentered maximal operator".into(),
        ));
    }
    let mut current = g.map(f64::abs);
    let mut acc = current.values.clone();
    let mut scale = 1.0;
    for _ in 1..=cfg.k_max {
        current = maximal(&current, mcfg)?;
        scale /= 2.0 * cfg.m_norm;
        for (a, &v) in acc.iter_mut().zip(&current.values) {
            *a += scale * v;
        }
    }
    let weighted_p = integrate(&g.map(|v| v.abs().powf(cfg.p)), Some(&cfg.weight))?;
    let tail_bound = 2f64.powi(1 - cfg.k_max as i32) * weighted_p.powf(1.0 / cfg.p);
    Ok(RdFResult {
        field: GridFunction::new(g.lattice.clone(), acc)?,
        tail_bound,
    })
}

/// Max over probes of ‖Mf‖_X/‖f‖_X, floored at 1 (a certified lower bound
/// for the operator norm of M on X).
pub fn operator_norm_probe(
    space: &SpaceSpec,
    probes: &[GridFunction],
    mcfg: &MaximalConfig,
) -> Result<f64> {
    if probes.is_empty() {
        return Err(Error::InvalidInput("operator norm probe needs probes".into()));
    }
    let mut best = 1.0f64;
    for probe in probes {
        let denom = spaces::norm(space, probe)?;
        if denom == 0.0 {
            return Err(Error::InvalidInput("zero-norm probe".into()));
        }
        let m = maximal(probe, mcfg)?;
        best = best.max(spaces::norm(space, &m)? / denom);
    }
    Ok(best)
}
