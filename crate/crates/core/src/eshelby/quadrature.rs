//! Direct numerical evaluation of the Hill and Eshelby tensors of a spheroid
//! in an isotropic matrix.
//!
//! The Hill tensor of an ellipsoid with semi-axes `a` is the unit-sphere
//! average
//!
//! ```text
//! P = 1/(4π) ∫_{|ζ|=1} Γ(A⁻¹ζ) dS(ζ),   Γ_ijkl(ξ) = sym[N_ik(ξ) ξ_j ξ_l]
//! ```
//!
//! with `N = (ξ·C0·ξ)⁻¹` the inverse acoustic tensor of the matrix and
//! `A = diag(a)`. `Γ` is homogeneous of degree zero, so only the direction of
//! `A⁻¹ζ` matters. This route shares no code with the closed forms and is used
//! to check them.

use std::f64::consts::PI;

use crate::tensor::{Mat6, Ten4, MANDEL_PAIRS};

/// Number of Gauss–Legendre nodes per panel and angle.
pub const NODES: usize = 64;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

struct Rule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Rule {
    fn new() -> Self {
        let (nodes, weights) = gauss_legendre(NODES);
        Rule { nodes, weights }
    }

    fn integrate(&self, lo: f64, hi: f64, f: &mut impl FnMut(f64) -> Mat6) -> Mat6 {
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        let mut acc = Mat6::zeros();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += f(mid + half * x) * (w * half);
        }
        acc
    }
}

/// Mandel matrix of `Γ(ξ)` for a unit vector `ξ`.
fn gamma(xi: [f64; 3], shear: f64, longitudinal: f64) -> Mat6 {
    let mut n = [[0.0; 3]; 3];
    for i in 0..3 {
        for k in 0..3 {
            let delta = if i == k { 1.0 } else { 0.0 };
            n[i][k] = (delta - xi[i] * xi[k]) / shear + xi[i] * xi[k] / longitudinal;
        }
    }
    let g = |i: usize, j: usize, k: usize, l: usize| {
        0.25 * (n[i][k] * xi[j] * xi[l]
            + n[j][k] * xi[i] * xi[l]
            + n[i][l] * xi[j] * xi[k]
            + n[j][l] * xi[i] * xi[k])
    };
    let w = |a: usize| if a < 3 { 1.0 } else { std::f64::consts::SQRT_2 };
    let mut m = Mat6::zeros();
    for (a, &(i, j)) in MANDEL_PAIRS.iter().enumerate() {
        for (b, &(k, l)) in MANDEL_PAIRS.iter().enumerate() {
            m[(a, b)] = w(a) * w(b) * g(i, j, k, l);
        }
    }
    m
}

/// Hill tensor of a spheroid (semi-axes `1, 1, aspect`, symmetry axis 3) in
/// an isotropic matrix with bulk modulus `bulk` and shear modulus `shear`.
///
/// The polar angle is integrated with adaptively bisected 64-point
/// Gauss–Legendre panels, the azimuth with one 64-point rule.
pub fn hill_tensor(aspect: f64, bulk: f64, shear: f64) -> Ten4 {
    let rule = Rule::new();
    let longitudinal = bulk + 4.0 * shear / 3.0;

    // azimuthal integral at polar angle theta
    let mut ring = |theta: f64| -> Mat6 {
        let (s, t) = theta.sin_cos();
        let t = t / aspect;
        let sum = rule.integrate(0.0, 2.0 * PI, &mut |phi: f64| {
            let (sp, cp) = phi.sin_cos();
            let v = [s * cp, s * sp, t];
            let len = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            gamma([v[0] / len, v[1] / len, v[2] / len], shear, longitudinal)
        });
        sum * s
    };

    // the integrand is symmetric about the equator: integrate [0, π/2] twice
    let total = adaptive(&rule, 0.0, 0.5 * PI, &mut ring, 0);
    Ten4::from_mandel(total * (2.0 / (4.0 * PI)))
}

fn adaptive(rule: &Rule, lo: f64, hi: f64, f: &mut impl FnMut(f64) -> Mat6, depth: usize) -> Mat6 {
    let whole = rule.integrate(lo, hi, f);
    let mid = 0.5 * (lo + hi);
    let left = rule.integrate(lo, mid, f);
    let right = rule.integrate(mid, hi, f);
    let halves = left + right;
    if depth >= 24 || (halves - whole).amax() <= 1e-15 * halves.amax().max(1e-300) * 10.0 {
        halves
    } else {
        adaptive(rule, lo, mid, f, depth + 1) + adaptive(rule, mid, hi, f, depth + 1)
    }
}

/// Eshelby tensor `S = P : C0` by quadrature. Independent of Young's modulus.
pub fn eshelby_tensor(aspect: f64, poisson: f64) -> Ten4 {
    let young = 1.0;
    let bulk = young / (3.0 * (1.0 - 2.0 * poisson));
    let shear = young / (2.0 * (1.0 + poisson));
    let p = hill_tensor(aspect, bulk, shear);
    let c0 = crate::tensor::iso_from_moduli(bulk, shear);
    p * c0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(NODES);
        let sum: f64 = w.iter().sum();
        assert!((sum - 2.0).abs() < 1e-14);
        // ∫ x^126 = 2/127
        let p: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(126)).sum();
        assert!((p - 2.0 / 127.0).abs() < 1e-14);
        let (x5, w5) = gauss_legendre(5);
        let q: f64 = x5.iter().zip(&w5).map(|(x, w)| w * x.powi(8)).sum();
        assert!((q - 2.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn sphere_by_quadrature() {
        let nu: f64 = 0.25;
        let s = eshelby_tensor(1.0, nu);
        let alpha = (1.0 + nu) / (3.0 * (1.0 - nu));
        let beta = 2.0 * (4.0 - 5.0 * nu) / (15.0 * (1.0 - nu));
        let (j, k) = crate::tensor::iso_projectors();
        let expected = j * alpha + k * beta;
        assert!((s.mandel() - expected.mandel()).amax() < 1e-13);
    }
}
