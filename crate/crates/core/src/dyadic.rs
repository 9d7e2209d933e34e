//! Shifted dyadic cube systems with exact rational arithmetic.
//!
//! A system is indexed by a shift α ∈ {0, 1/3, 2/3}^n. At scale j ∈ ℤ its
//! cubes are
//!
//! ```text
//!     Q = 2^j · ( k + [0,1)^n + (−1)^j α ),    k ∈ ℤ^n,
//! ```
//!
//! half-open boxes of side 2^j. Every corner coordinate is a rational with
//! denominator 3: along axis a the cube spans `[N, N+3) · 2^j / 3` where
//! `N = 3k + (−1)^j α_num` and `α_num ∈ {0,1,2}` is the shift numerator.
//! All geometric predicates in this module (point membership, nesting,
//! ball covering) therefore reduce to integer comparisons between `N · 2^j`
//! and `3m · 2^e` with `x = m · 2^e` the exact binary decomposition of an
//! `f64` coordinate — no floating-point rounding enters any decision.
//!
//! The alternating shift `(−1)^j α` is what gives the three 1D systems the
//! one-third property: any interval of length ℓ is contained in a single
//! cube of side < 6ℓ in at least one system ([`cover_ball`]), and two cubes
//! of the *same* system are always nested or disjoint ([`DyadicCube::relation`]).

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::MAX_DIM;

/// Largest |j| accepted, and |k| is capped at 2^40. Keeps every integer
/// comparison inside i128 with room to spare; desk-scale geometry uses a
/// tiny fraction of this range.
pub const MAX_SCALE: i32 = 40;
const MAX_INDEX: i64 = 1 << 40;

/// One cube of a shifted dyadic system.
///
/// `alpha` stores the shift numerators (α = alpha/3 per axis, digits 0..=2),
/// `j` the scale (side 2^j), `k` the position index per axis. Serialized as
/// `{"alpha":[..],"j":..,"k":[..]}` with alpha in thirds.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DyadicCube {
    pub alpha: Vec<u8>,
    pub j: i32,
    pub k: Vec<i64>,
}

/// How two cubes of the same system relate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CubeRelation {
    Identical,
    /// The first cube strictly contains the second.
    Contains,
    /// The first cube is strictly contained in the second.
    ContainedIn,
    Disjoint,
}

impl DyadicCube {
    pub fn new(alpha: Vec<u8>, j: i32, k: Vec<i64>) -> Result<Self> {
        let cube = DyadicCube { alpha, j, k };
        cube.validate()?;
        Ok(cube)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.alpha.len();
        if n == 0 || n > MAX_DIM || self.k.len() != n {
            return Err(Error::InvalidInput(format!(
                "cube needs matching alpha/k of dimension 1..={MAX_DIM}, got {}/{}",
                n,
                self.k.len()
            )));
        }
        if self.alpha.iter().any(|&a| a > 2) {
            return Err(Error::InvalidInput(
                "shift numerators must lie in {0,1,2} (thirds)".into(),
            ));
        }
        if self.j.abs() > MAX_SCALE {
            return Err(Error::InvalidInput(format!(
                "scale j={} outside supported range ±{MAX_SCALE}",
                self.j
            )));
        }
        if self.k.iter().any(|&k| k.abs() > MAX_INDEX) {
            return Err(Error::InvalidInput(
                "position index |k| exceeds 2^40".into(),
            ));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.alpha.len()
    }

    pub fn side(&self) -> f64 {
        2f64.powi(self.j)
    }

    /// Sign (−1)^j of the alternating shift.
    fn shift_sign(&self) -> i64 {
        if self.j & 1 == 0 {
            1
        } else {
            -1
        }
    }

    /// Corner numerator along an axis: the cube spans [N, N+3)·2^j/3.
    fn corner_num(&self, axis: usize) -> i64 {
        3 * self.k[axis] + self.shift_sign() * self.alpha[axis] as i64
    }

    /// Lower corner coordinate (f64 approximation of N·2^j/3).
    pub fn corner(&self, axis: usize) -> f64 {
        self.corner_num(axis) as f64 * 2f64.powi(self.j) / 3.0
    }

    /// Exact half-open membership test: corner ≤ x < corner + side per axis.
    pub fn contains_point(&self, x: &[f64]) -> bool {
        debug_assert_eq!(x.len(), self.dim());
        (0..self.dim()).all(|a| {
            let n = self.corner_num(a);
            cmp_thirds(n, self.j, x[a]) != Ordering::Greater
                && cmp_thirds(n + 3, self.j, x[a]) == Ordering::Greater
        })
    }

    /// The unique parent cube (same system, scale j+1).
    ///
    /// Existence and uniqueness are integer facts: the parent corner
    /// numerator N' is the unique element of {N/2, (N−3)/2} ∩ ℤ, and the
    /// alternating shift makes N' ≡ (−1)^{j+1}α (mod 3) automatically.
    pub fn parent(&self) -> Result<Self> {
        if self.j >= MAX_SCALE {
            return Err(Error::InvalidInput("parent would exceed scale range".into()));
        }
        let s_parent = -self.shift_sign();
        let mut k_parent = Vec::with_capacity(self.dim());
        for a in 0..self.dim() {
            let n = self.corner_num(a);
            let n_up = n - 3 * n.rem_euclid(2);
            debug_assert_eq!(n_up.rem_euclid(2), 0);
            let num = n_up / 2 - s_parent * self.alpha[a] as i64;
            debug_assert_eq!(num.rem_euclid(3), 0);
            k_parent.push(num.div_euclid(3));
        }
        DyadicCube::new(self.alpha.clone(), self.j + 1, k_parent)
    }

    /// Nesting/disjointness within one system. Errors on mismatched systems;
    /// partial overlap is impossible for same-α cubes and reported as an
    /// internal error if the integer arithmetic ever produced it.
    pub fn relation(&self, other: &Self) -> Result<CubeRelation> {
        self.validate()?;
        other.validate()?;
        if self.alpha != other.alpha {
            return Err(Error::InvalidInput(
                "cube relation is only defined within a single shifted system".into(),
            ));
        }
        if self == other {
            return Ok(CubeRelation::Identical);
        }
        let (big, small, first_is_big) = if self.j >= other.j {
            (self, other, true)
        } else {
            (other, self, false)
        };
        // Work in units of 2^{small.j}/3; the big cube spans [N·2^Δ, (N+3)·2^Δ).
        let delta = (big.j - small.j) as u32;
        let mut all_contained = true;
        for a in 0..self.dim() {
            let lo_big = (big.corner_num(a) as i128) << delta;
            let hi_big = ((big.corner_num(a) + 3) as i128) << delta;
            let lo_small = small.corner_num(a) as i128;
            let hi_small = lo_small + 3;
            if hi_small <= lo_big || hi_big <= lo_small {
                return Ok(CubeRelation::Disjoint);
            }
            if !(lo_big <= lo_small && hi_small <= hi_big) {
                all_contained = false;
            }
        }
        if !all_contained {
            return Err(Error::Internal(
                "partial overlap between same-shift dyadic cubes".into(),
            ));
        }
        if big.j == small.j {
            // Same scale, contained, not identical cannot happen.
            return Err(Error::Internal(
                "distinct same-scale cubes reported as nested".into(),
            ));
        }
        Ok(if first_is_big {
            CubeRelation::Contains
        } else {
            CubeRelation::ContainedIn
        })
    }
}

/// The unique cube of system α at scale j containing the point x.
pub fn point_cube(x: &[f64], j: i32, alpha: &[u8]) -> Result<DyadicCube> {
    if x.len() != alpha.len() {
        return Err(Error::InvalidInput(
            "point and shift must have the same dimension".into(),
        ));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("point coordinates must be finite".into()));
    }
    let s = if j & 1 == 0 { 1i64 } else { -1 };
    let side = 2f64.powi(j);
    let mut k = Vec::with_capacity(x.len());
    for (&xa, &al) in x.iter().zip(alpha.iter()) {
        // Float guess, then exact adjustment (at most a step or two).
        let mut ka = (xa / side - s as f64 * al as f64 / 3.0).floor() as i64;
        let num = |k: i64| 3 * k + s * al as i64;
        while cmp_thirds(num(ka), j, xa) == Ordering::Greater {
            ka -= 1;
        }
        while cmp_thirds(num(ka) + 3, j, xa) != Ordering::Greater {
            ka += 1;
        }
        k.push(ka);
    }
    DyadicCube::new(alpha.to_vec(), j, k)
}

/// Smallest-scale cube (first in the j-ascending, α-lexicographic scan)
/// containing the open ball B(center, radius), together with the ratio
/// side/diameter. Scales 2^j ∈ [diam, 8·diam] are scanned; the one-third
/// property guarantees a hit with ratio < 6.
pub fn cover_ball(center: &[f64], radius: f64) -> Result<(DyadicCube, f64)> {
    let n = center.len();
    if n == 0 || n > MAX_DIM {
        return Err(Error::InvalidInput(format!(
            "ball dimension must be 1..={MAX_DIM}"
        )));
    }
    if !(radius.is_finite() && radius > 0.0) || center.iter().any(|c| !c.is_finite()) {
        return Err(Error::InvalidInput(
            "cover_ball needs a finite center and positive radius".into(),
        ));
    }
    let diam = 2.0 * radius;
    // Smallest j with 2^j ≥ diam, fixed up exactly after the float log.
    let mut j0 = diam.log2().ceil() as i32;
    while 2f64.powi(j0) < diam {
        j0 += 1;
    }
    while j0 > -MAX_SCALE && 2f64.powi(j0 - 1) >= diam {
        j0 -= 1;
    }
    if j0.abs() > MAX_SCALE || (j0 + 3).abs() > MAX_SCALE {
        return Err(Error::InvalidInput(
            "ball size outside the supported dyadic scale range".into(),
        ));
    }

    for j in j0..=j0 + 3 {
        let side = 2f64.powi(j);
        let s = if j & 1 == 0 { 1i64 } else { -1 };
        'shifts: for alpha in alpha_lex(n) {
            let mut k = Vec::with_capacity(n);
            for (&c, &al) in center.iter().zip(alpha.iter()) {
                let lo = c - radius;
                let hi = c + radius;
                let num = |k: i64| 3 * k + s * al as i64;
                // Largest k with corner ≤ lo.
                let mut ka = (lo / side - s as f64 * al as f64 / 3.0).floor() as i64;
                while cmp_thirds(num(ka), j, lo) == Ordering::Greater {
                    ka -= 1;
                }
                while cmp_thirds(num(ka + 1), j, lo) != Ordering::Greater {
                    ka += 1;
                }
                // Open ball: the far end may touch the upper face.
                if cmp_thirds(num(ka) + 3, j, hi) == Ordering::Less {
                    continue 'shifts;
                }
                k.push(ka);
            }
            let cube = DyadicCube::new(alpha, j, k)?;
            return Ok((cube, side / diam));
        }
    }
    Err(Error::Internal(
        "one-third cover scan exhausted its scale range".into(),
    ))
}

/// The 3^n shifts in lexicographic order (axis 0 most significant).
fn alpha_lex(n: usize) -> Vec<Vec<u8>> {
    let mut out = Vec::with_capacity(3usize.pow(n as u32));
    let mut digits = vec![0u8; n];
    loop {
        out.push(digits.clone());
        let mut a = n;
        loop {
            if a == 0 {
                return out;
            }
            a -= 1;
            if digits[a] < 2 {
                digits[a] += 1;
                for d in &mut digits[a + 1..] {
                    *d = 0;
                }
                break;
            }
        }
    }
}

// --- exact comparison of N·2^j/3 against an f64 ---------------------------

/// x = m·2^e exactly (m signed, e the power of two of the lowest mantissa bit).
fn decompose(x: f64) -> (i128, i32) {
    if x == 0.0 {
        return (0, 0);
    }
    let bits = x.to_bits();
    let sign: i128 = if bits >> 63 == 1 { -1 } else { 1 };
    let exp_field = ((bits >> 52) & 0x7ff) as i32;
    let frac = (bits & ((1u64 << 52) - 1)) as i128;
    if exp_field == 0 {
        (sign * frac, -1074)
    } else {
        (sign * (frac | (1 << 52)), exp_field - 1075)
    }
}

/// Exact ordering of N·2^j/3 versus a finite f64, via N·2^j ⋛ 3m·2^e.
fn cmp_thirds(n: i64, j: i32, x: f64) -> Ordering {
    debug_assert!(x.is_finite());
    let (m, e) = decompose(x);
    cmp_scaled(n as i128, j, 3 * m, e)
}

/// Ordering of a·2^ea versus b·2^eb for |a|,|b| < 2^60.
fn cmp_scaled(a: i128, ea: i32, b: i128, eb: i32) -> Ordering {
    if a == 0 || b == 0 || (a > 0) != (b > 0) {
        return a.signum().cmp(&b.signum());
    }
    let d = ea - eb;
    if d >= 0 {
        if d > 64 {
            // |a·2^d| ≥ 2^64 > |b|: the sign decides.
            return if a > 0 { Ordering::Greater } else { Ordering::Less };
        }
        (a << d).cmp(&b)
    } else {
        if d < -64 {
            return if b > 0 { Ordering::Less } else { Ordering::Greater };
        }
        a.cmp(&(b << (-d) as u32))
    }
}
