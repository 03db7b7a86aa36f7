//! Eshelby and Hill tensors of spheroidal inclusions in an isotropic matrix.
//!
//! Everything is expressed in the local spheroid frame: semi-axes
//! `(1, 1, ω)` with axis 3 as the symmetry axis.

pub mod quadrature;

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::tensor::{iso_projectors, Mat6, Ten4};

/// Below this distance from `ω = 1` the sphere values are used directly.
const SPHERE_BAND: f64 = 1e-9;

/// Inside `|1 - ω²| < SERIES_RADIUS` the depolarization integrals are
/// evaluated from their power series in `1 - ω²`; the closed forms lose
/// digits to cancellation there.
const SERIES_RADIUS: f64 = 0.1;
const SERIES_TERMS: usize = 40;

/// Spheroid shape: ratio of the symmetry-axis semi-axis to the equatorial one.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpheroidShape {
    aspect_ratio: f64,
}

impl SpheroidShape {
    pub fn new(aspect_ratio: f64) -> Result<Self> {
        if !aspect_ratio.is_finite() || aspect_ratio <= 0.0 {
            return Err(Error::InvalidPhases(format!(
                "spheroid aspect ratio must be positive, got {aspect_ratio}"
            )));
        }
        Ok(SpheroidShape { aspect_ratio })
    }

    pub fn sphere() -> Self {
        SpheroidShape { aspect_ratio: 1.0 }
    }

    pub fn aspect_ratio(&self) -> f64 {
        self.aspect_ratio
    }

    pub fn is_oblate(&self) -> bool {
        self.aspect_ratio < 1.0
    }

    pub fn is_prolate(&self) -> bool {
        self.aspect_ratio > 1.0
    }
}

/// Depolarization integrals `I_1, I_3, I_11 (= I_12), I_13, I_33` for
/// semi-axes `(1, 1, ω)`.
#[derive(Clone, Copy, Debug)]
struct Integrals {
    i1: f64,
    i3: f64,
    i11: f64,
    i13: f64,
    i33: f64,
}

fn integrals(w: f64) -> Integrals {
    let x = 1.0 - w * w;
    let (i1, i13) = if (w - 1.0).abs() < SPHERE_BAND {
        (4.0 * PI / 3.0, 4.0 * PI / 5.0)
    } else if x.abs() < SERIES_RADIUS {
        series_integrals(x)
    } else if x > 0.0 {
        // oblate
        let i1 = 2.0 * PI * w / x.powf(1.5) * (w.acos() - w * x.sqrt());
        (i1, (4.0 * PI - 3.0 * i1) / x)
    } else {
        // prolate
        let z = -x;
        let i1 = 2.0 * PI * w / z.powf(1.5) * (w * z.sqrt() - w.acosh());
        (i1, (4.0 * PI - 3.0 * i1) / x)
    };
    let i3 = 4.0 * PI - 2.0 * i1;
    Integrals {
        i1,
        i3,
        i11: PI - 0.25 * i13,
        i13,
        i33: (4.0 * PI / (w * w) - 2.0 * i13) / 3.0,
    }
}

/// `I_1` and `I_13` from their expansions about the sphere, `x = 1 - ω²`.
///
/// `I_1 = 2π √(1-x) Σ t_n x^(n-1)` with `t_n = C(2n,n)/4^n · 4n/(4n²-1)`,
/// which holds on both sides of `x = 0`. Writing `I_1 = 2π Σ u_k x^k`,
/// `I_13 = (4π - 3 I_1)/x = -6π Σ_{k≥1} u_k x^(k-1)` since `u_0 = 2/3`.
fn series_integrals(x: f64) -> (f64, f64) {
    let mut t = [0.0; SERIES_TERMS + 2];
    let mut central = 1.0; // C(2n,n)/4^n
    for (n, tn) in t.iter_mut().enumerate().skip(1) {
        let nf = n as f64;
        central *= (2.0 * nf - 1.0) / (2.0 * nf);
        *tn = central * 4.0 * nf / (4.0 * nf * nf - 1.0);
    }
    // binomial series of sqrt(1 - x)
    let mut c = [0.0; SERIES_TERMS + 1];
    c[0] = 1.0;
    for j in 1..=SERIES_TERMS {
        let jf = j as f64;
        c[j] = -c[j - 1] * (0.5 - jf + 1.0) / jf;
    }
    let mut i1 = 0.0;
    let mut i13 = 0.0;
    // x^(k-1), starting at k = 0
    let mut prev_power = 0.0;
    let mut power = 1.0;
    for k in 0..=SERIES_TERMS {
        let u: f64 = (0..=k).map(|j| c[j] * t[k - j + 1]).sum();
        i1 += u * power;
        i13 += u * prev_power;
        prev_power = power;
        power *= x;
    }
    (2.0 * PI * i1, -6.0 * PI * i13)
}

/// Eshelby tensor of a spheroid in an isotropic matrix with Poisson's ratio
/// `nu`, in the local frame.
pub fn eshelby_tensor(shape: &SpheroidShape, nu: f64) -> Result<Ten4> {
    if !(nu > -1.0 && nu < 0.5) {
        return Err(Error::InvalidMaterial(format!(
            "matrix Poisson's ratio must lie in (-1, 0.5), got {nu}"
        )));
    }
    let w = shape.aspect_ratio;
    let w2 = w * w;
    let Integrals {
        i1,
        i3,
        i11,
        i13,
        i33,
    } = integrals(w);
    let d = 1.0 / (8.0 * PI * (1.0 - nu));
    let r = (1.0 - 2.0 * nu) * d;

    let s1111 = 3.0 * d * i11 + r * i1;
    let s1122 = d * i11 - r * i1;
    let s1133 = d * w2 * i13 - r * i1;
    let s3311 = d * i13 - r * i3;
    let s3333 = 3.0 * d * w2 * i33 + r * i3;
    let s1212 = d * i11 + r * i1;
    let s1313 = 0.5 * d * (1.0 + w2) * i13 + 0.5 * r * (i1 + i3);

    let mut m = Mat6::zeros();
    m[(0, 0)] = s1111;
    m[(1, 1)] = s1111;
    m[(0, 1)] = s1122;
    m[(1, 0)] = s1122;
    m[(0, 2)] = s1133;
    m[(1, 2)] = s1133;
    m[(2, 0)] = s3311;
    m[(2, 1)] = s3311;
    m[(2, 2)] = s3333;
    m[(3, 3)] = 2.0 * s1313;
    m[(4, 4)] = 2.0 * s1313;
    m[(5, 5)] = 2.0 * s1212;
    Ok(Ten4::from_mandel(m))
}

/// Bulk and shear moduli of an isotropic stiffness, or an error if `c0` is
/// not isotropic to 1e-10 relative.
pub fn isotropic_moduli(c0: &Ten4) -> Result<(f64, f64)> {
    let iso = c0.isotropic_part();
    let dev = (c0.mandel() - iso.mandel()).amax();
    if dev > 1e-10 * c0.max_abs() {
        return Err(Error::InvalidMaterial(
            "reference medium must be isotropic".to_string(),
        ));
    }
    let (j, k) = iso_projectors();
    Ok((j.contract(c0) / 3.0, k.contract(c0) / 10.0))
}

/// Hill tensor `P = S : C0⁻¹` in the local frame.
pub fn hill_tensor(shape: &SpheroidShape, c0: &Ten4) -> Result<Ten4> {
    let (bulk, shear) = isotropic_moduli(c0)?;
    let nu = (3.0 * bulk - 2.0 * shear) / (2.0 * (3.0 * bulk + shear));
    let s = eshelby_tensor(shape, nu)?;
    let p = s * c0.inverse()?;
    debug_assert!(p.asymmetry() < 1e-10, "Hill tensor asymmetry {}", p.asymmetry());
    let m = p.mandel();
    Ten4::symmetric_from_mandel(0.5 * (m + m.transpose()))
}
