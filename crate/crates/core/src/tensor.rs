//! Mandel-notation algebra for symmetric second-order and minor-symmetric
//! fourth-order tensors.
//!
//! A symmetric tensor `a` is stored as
//!
//! ```text
//! (a11, a22, a33, √2 a23, √2 a13, √2 a12)
//! ```
//!
//! and a fourth-order tensor with both minor symmetries as the 6×6 matrix
//! `M[I][J] = w_I w_J T_ijkl` with `w = 1` on the normal and `√2` on the
//! shear components. The basis is orthonormal, so double contraction becomes
//! the plain dot/matrix product, transposition is the matrix transpose and
//! the inverse on the space of symmetric tensors is the matrix inverse.

use std::f64::consts::SQRT_2;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use nalgebra::{Matrix3, SMatrix, SVector, Vector3};

use crate::error::{Error, Result};

pub type Vec6 = SVector<f64, 6>;
pub type Mat6 = SMatrix<f64, 6, 6>;

/// Index pairs `(i, j)` of the six Mandel components.
pub const MANDEL_PAIRS: [(usize, usize); 6] = [(0, 0), (1, 1), (2, 2), (1, 2), (0, 2), (0, 1)];

/// Mandel weight of component `I`.
#[inline]
fn weight(i: usize) -> f64 {
    if i < 3 {
        1.0
    } else {
        SQRT_2
    }
}

/// Mandel index of the symmetric pair `(i, j)`.
#[inline]
pub fn mandel_index(i: usize, j: usize) -> usize {
    match (i.min(j), i.max(j)) {
        (0, 0) => 0,
        (1, 1) => 1,
        (2, 2) => 2,
        (1, 2) => 3,
        (0, 2) => 4,
        (0, 1) => 5,
        _ => panic!("tensor index out of range: ({i}, {j})"),
    }
}

/// Symmetric second-order tensor in Mandel form.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Sym2(Vec6);

impl Sym2 {
    pub fn zero() -> Self {
        Sym2(Vec6::zeros())
    }

    pub fn identity() -> Self {
        Sym2(Vec6::new(1.0, 1.0, 1.0, 0.0, 0.0, 0.0))
    }

    /// Builds from raw Mandel components.
    pub fn from_mandel(v: Vec6) -> Self {
        Sym2(v)
    }

    /// Builds from tensor components in the order 11, 22, 33, 23, 13, 12.
    pub fn from_components(c: [f64; 6]) -> Self {
        Sym2(Vec6::new(
            c[0],
            c[1],
            c[2],
            SQRT_2 * c[3],
            SQRT_2 * c[4],
            SQRT_2 * c[5],
        ))
    }

    /// Tensor components in the order 11, 22, 33, 23, 13, 12.
    pub fn components(&self) -> [f64; 6] {
        let v = &self.0;
        [
            v[0],
            v[1],
            v[2],
            v[3] / SQRT_2,
            v[4] / SQRT_2,
            v[5] / SQRT_2,
        ]
    }

    /// Converts a 3×3 matrix, rejecting inputs that are not symmetric to
    /// 1e-12 relative.
    pub fn from_matrix(m: &Matrix3<f64>) -> Result<Self> {
        let scale = m.abs().max().max(f64::MIN_POSITIVE);
        let asym = (m - m.transpose()).abs().max() / scale;
        if asym > 1e-12 {
            return Err(Error::NotSymmetric(asym));
        }
        let s = 0.5 * (m + m.transpose());
        Ok(Sym2(Vec6::new(
            s[(0, 0)],
            s[(1, 1)],
            s[(2, 2)],
            SQRT_2 * s[(1, 2)],
            SQRT_2 * s[(0, 2)],
            SQRT_2 * s[(0, 1)],
        )))
    }

    pub fn to_matrix(&self) -> Matrix3<f64> {
        let [a11, a22, a33, a23, a13, a12] = self.components();
        Matrix3::new(a11, a12, a13, a12, a22, a23, a13, a23, a33)
    }

    pub fn mandel(&self) -> &Vec6 {
        &self.0
    }

    /// Tensor component `a_ij`.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let k = mandel_index(i, j);
        self.0[k] / weight(k)
    }

    pub fn trace(&self) -> f64 {
        self.0[0] + self.0[1] + self.0[2]
    }

    pub fn mean(&self) -> f64 {
        self.trace() / 3.0
    }

    pub fn deviator(&self) -> Self {
        let m = self.mean();
        let mut v = self.0;
        v[0] -= m;
        v[1] -= m;
        v[2] -= m;
        Sym2(v)
    }

    /// Double contraction `a : b`.
    pub fn dot(&self, other: &Sym2) -> f64 {
        self.0.dot(&other.0)
    }

    /// Frobenius norm `sqrt(a : a)`.
    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.amax()
    }
}

impl Add for Sym2 {
    type Output = Sym2;
    fn add(self, rhs: Sym2) -> Sym2 {
        Sym2(self.0 + rhs.0)
    }
}

impl Sub for Sym2 {
    type Output = Sym2;
    fn sub(self, rhs: Sym2) -> Sym2 {
        Sym2(self.0 - rhs.0)
    }
}

impl AddAssign for Sym2 {
    fn add_assign(&mut self, rhs: Sym2) {
        self.0 += rhs.0;
    }
}

impl SubAssign for Sym2 {
    fn sub_assign(&mut self, rhs: Sym2) {
        self.0 -= rhs.0;
    }
}

impl Neg for Sym2 {
    type Output = Sym2;
    fn neg(self) -> Sym2 {
        Sym2(-self.0)
    }
}

impl Mul<f64> for Sym2 {
    type Output = Sym2;
    fn mul(self, rhs: f64) -> Sym2 {
        Sym2(self.0 * rhs)
    }
}

impl Mul<Sym2> for f64 {
    type Output = Sym2;
    fn mul(self, rhs: Sym2) -> Sym2 {
        Sym2(rhs.0 * self)
    }
}

/// Fourth-order tensor with minor symmetries as a 6×6 Mandel matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ten4 {
    m: Mat6,
    major_symmetric: bool,
}

impl Ten4 {
    pub fn zero() -> Self {
        Ten4 {
            m: Mat6::zeros(),
            major_symmetric: true,
        }
    }

    pub fn identity() -> Self {
        Ten4 {
            m: Mat6::identity(),
            major_symmetric: true,
        }
    }

    /// Wraps a general (not necessarily major-symmetric) Mandel matrix.
    pub fn from_mandel(m: Mat6) -> Self {
        Ten4 {
            m,
            major_symmetric: false,
        }
    }

    /// Wraps a Mandel matrix that must be symmetric to 1e-12 relative.
    pub fn symmetric_from_mandel(m: Mat6) -> Result<Self> {
        let scale = m.abs().max().max(f64::MIN_POSITIVE);
        let asym = (m - m.transpose()).abs().max() / scale;
        if asym > 1e-12 {
            return Err(Error::NotSymmetric(asym));
        }
        Ok(Ten4 {
            m,
            major_symmetric: true,
        })
    }

    /// Builds from full index-notation components `T_ijkl`. The function is
    /// expected to respect the minor symmetries.
    pub fn from_components(f: impl Fn(usize, usize, usize, usize) -> f64) -> Self {
        let mut m = Mat6::zeros();
        for (a, &(i, j)) in MANDEL_PAIRS.iter().enumerate() {
            for (b, &(k, l)) in MANDEL_PAIRS.iter().enumerate() {
                m[(a, b)] = weight(a) * weight(b) * f(i, j, k, l);
            }
        }
        Ten4::from_mandel(m)
    }

    /// Index-notation component `T_ijkl`.
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        let a = mandel_index(i, j);
        let b = mandel_index(k, l);
        self.m[(a, b)] / (weight(a) * weight(b))
    }

    pub fn mandel(&self) -> &Mat6 {
        &self.m
    }

    pub fn is_major_symmetric(&self) -> bool {
        self.major_symmetric
    }

    /// `T : a`
    pub fn apply(&self, a: &Sym2) -> Sym2 {
        Sym2(self.m * a.0)
    }

    /// `T : U`
    pub fn compose(&self, other: &Ten4) -> Ten4 {
        Ten4::from_mandel(self.m * other.m)
    }

    /// Major transpose `T^T`, i.e. `(T^T)_ijkl = T_klij`.
    pub fn transpose(&self) -> Ten4 {
        Ten4 {
            m: self.m.transpose(),
            major_symmetric: self.major_symmetric,
        }
    }

    /// Inverse on the space of symmetric tensors.
    ///
    /// Fails with [`Error::Singular`] when the LU factorization breaks down or
    /// the 1-norm condition estimate exceeds 1e12.
    pub fn inverse(&self) -> Result<Ten4> {
        let inv = self
            .m
            .try_inverse()
            .ok_or(Error::Singular {
                condition: f64::INFINITY,
            })?;
        let condition = norm1(&self.m) * norm1(&inv);
        if !condition.is_finite() || condition > 1e12 {
            return Err(Error::Singular { condition });
        }
        Ok(Ten4 {
            m: inv,
            major_symmetric: self.major_symmetric,
        })
    }

    /// 1-norm condition estimate, infinite if singular.
    pub fn condition(&self) -> f64 {
        match self.m.try_inverse() {
            Some(inv) => norm1(&self.m) * norm1(&inv),
            None => f64::INFINITY,
        }
    }

    /// Largest absolute Mandel entry.
    pub fn max_abs(&self) -> f64 {
        self.m.amax()
    }

    /// Frobenius norm, equal to `sqrt(T :: T)` in index notation.
    pub fn norm(&self) -> f64 {
        self.m.norm()
    }

    /// Full quadruple contraction `T :: U = T_ijkl U_ijkl`.
    pub fn contract(&self, other: &Ten4) -> f64 {
        self.m.dot(&other.m)
    }

    /// Relative deviation of the Mandel matrix from symmetry.
    pub fn asymmetry(&self) -> f64 {
        let scale = self.m.abs().max().max(f64::MIN_POSITIVE);
        (self.m - self.m.transpose()).abs().max() / scale
    }

    /// Isotropic part `(J::T) J + (K::T)/5 K`.
    pub fn isotropic_part(&self) -> Ten4 {
        let (j, k) = iso_projectors();
        j * j.contract(self) + k * (k.contract(self) / 5.0)
    }
}

impl Add for Ten4 {
    type Output = Ten4;
    fn add(self, rhs: Ten4) -> Ten4 {
        Ten4 {
            m: self.m + rhs.m,
            major_symmetric: self.major_symmetric && rhs.major_symmetric,
        }
    }
}

impl Sub for Ten4 {
    type Output = Ten4;
    fn sub(self, rhs: Ten4) -> Ten4 {
        Ten4 {
            m: self.m - rhs.m,
            major_symmetric: self.major_symmetric && rhs.major_symmetric,
        }
    }
}

impl AddAssign for Ten4 {
    fn add_assign(&mut self, rhs: Ten4) {
        self.m += rhs.m;
        self.major_symmetric &= rhs.major_symmetric;
    }
}

impl Neg for Ten4 {
    type Output = Ten4;
    fn neg(self) -> Ten4 {
        Ten4 {
            m: -self.m,
            major_symmetric: self.major_symmetric,
        }
    }
}

impl Mul<f64> for Ten4 {
    type Output = Ten4;
    fn mul(self, rhs: f64) -> Ten4 {
        Ten4 {
            m: self.m * rhs,
            major_symmetric: self.major_symmetric,
        }
    }
}

impl Mul<Ten4> for f64 {
    type Output = Ten4;
    fn mul(self, rhs: Ten4) -> Ten4 {
        rhs * self
    }
}

impl Mul<Ten4> for Ten4 {
    type Output = Ten4;
    fn mul(self, rhs: Ten4) -> Ten4 {
        self.compose(&rhs)
    }
}

impl Mul<Sym2> for Ten4 {
    type Output = Sym2;
    fn mul(self, rhs: Sym2) -> Sym2 {
        self.apply(&rhs)
    }
}

fn norm1(m: &Mat6) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Spherical and deviatoric projectors `J = (1/3) i⊗i`, `K = I - J`.
pub fn iso_projectors() -> (Ten4, Ten4) {
    let mut j = Mat6::zeros();
    for a in 0..3 {
        for b in 0..3 {
            j[(a, b)] = 1.0 / 3.0;
        }
    }
    let k = Mat6::identity() - j;
    (
        Ten4 {
            m: j,
            major_symmetric: true,
        },
        Ten4 {
            m: k,
            major_symmetric: true,
        },
    )
}

/// Isotropic tensor `3k J + 2μ K`.
pub fn iso_from_moduli(bulk: f64, shear: f64) -> Ten4 {
    let (j, k) = iso_projectors();
    j * (3.0 * bulk) + k * (2.0 * shear)
}

/// Isotropic elastic stiffness from Young's modulus (MPa) and Poisson's ratio.
pub fn iso_stiffness(young: f64, poisson: f64) -> Result<Ten4> {
    let (bulk, shear) = bulk_shear(young, poisson)?;
    Ok(iso_from_moduli(bulk, shear))
}

/// Bulk and shear moduli `(k, μ)` from `(E, ν)`.
pub fn bulk_shear(young: f64, poisson: f64) -> Result<(f64, f64)> {
    if !young.is_finite() || young <= 0.0 {
        return Err(Error::InvalidMaterial(format!(
            "Young's modulus must be positive, got {young}"
        )));
    }
    if poisson == 0.5 {
        return Err(Error::Incompressible(poisson));
    }
    if !(poisson > -1.0 && poisson < 0.5) {
        return Err(Error::InvalidMaterial(format!(
            "Poisson's ratio must lie in (-1, 0.5), got {poisson}"
        )));
    }
    Ok((
        young / (3.0 * (1.0 - 2.0 * poisson)),
        young / (2.0 * (1.0 + poisson)),
    ))
}

/// Proper rotation from a local frame to the global frame. For spheroids the
/// local axis 3 is the symmetry axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Orientation(Matrix3<f64>);

impl Orientation {
    pub fn identity() -> Self {
        Orientation(Matrix3::identity())
    }

    /// Validates `R^T R = I` and `det R = 1` to 1e-12.
    pub fn new(r: Matrix3<f64>) -> Result<Self> {
        let ortho = (r.transpose() * r - Matrix3::identity()).abs().max();
        if ortho > 1e-12 {
            return Err(Error::InvalidOrientation(format!(
                "not orthonormal (|R^T R - I| = {ortho:.3e})"
            )));
        }
        let det = r.determinant();
        if (det - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidOrientation(format!(
                "not a proper rotation (det = {det})"
            )));
        }
        Ok(Orientation(r))
    }

    /// A rotation taking the local axis 3 onto `axis`. The rotation about the
    /// axis is fixed by a deterministic choice of the first in-plane vector.
    pub fn from_axis(axis: Vector3<f64>) -> Result<Self> {
        let len = axis.norm();
        if !len.is_finite() || len <= 0.0 {
            return Err(Error::InvalidOrientation(format!(
                "axis must be a nonzero finite vector, got {axis:?}"
            )));
        }
        let n = axis / len;
        // pick the global axis least aligned with n as a helper
        let helper = {
            let a = n.abs();
            if a.x <= a.y && a.x <= a.z {
                Vector3::x()
            } else if a.y <= a.z {
                Vector3::y()
            } else {
                Vector3::z()
            }
        };
        let t1 = (helper - n * n.dot(&helper)).normalize();
        let t2 = n.cross(&t1);
        let r = Matrix3::from_columns(&[t1, t2, n]);
        Orientation::new(r)
    }

    /// Rotation by `angle` (rad) about `axis`.
    pub fn about_axis(axis: Vector3<f64>, angle: f64) -> Result<Self> {
        let unit = nalgebra::Unit::try_new(axis, 1e-300).ok_or_else(|| {
            Error::InvalidOrientation("rotation axis must be nonzero".to_string())
        })?;
        Ok(Orientation(
            *nalgebra::Rotation3::from_axis_angle(&unit, angle).matrix(),
        ))
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    /// Global direction of the local axis 3.
    pub fn symmetry_axis(&self) -> Vector3<f64> {
        self.0.column(2).into_owned()
    }

    /// `self ∘ inner`: apply `inner` first.
    pub fn compose(&self, inner: &Orientation) -> Orientation {
        Orientation(self.0 * inner.0)
    }

    /// 6×6 orthogonal matrix `Q` with `mandel(R a R^T) = Q mandel(a)`.
    pub fn mandel_rotation(&self) -> Mat6 {
        let r = &self.0;
        let mut q = Mat6::zeros();
        for (b, &(k, l)) in MANDEL_PAIRS.iter().enumerate() {
            // rotated image of the Mandel basis tensor E_b
            let mut e = Matrix3::zeros();
            if k == l {
                e[(k, l)] = 1.0;
            } else {
                e[(k, l)] = 1.0 / SQRT_2;
                e[(l, k)] = 1.0 / SQRT_2;
            }
            let rotated = r * e * r.transpose();
            for (a, &(i, j)) in MANDEL_PAIRS.iter().enumerate() {
                q[(a, b)] = weight(a) * rotated[(i, j)];
            }
        }
        q
    }
}

/// `R a R^T`
pub fn rotate_sym2(a: &Sym2, r: &Orientation) -> Sym2 {
    Sym2(r.mandel_rotation() * a.0)
}

/// `R_ip R_jq R_kr R_ls T_pqrs`
pub fn rotate_ten4(t: &Ten4, r: &Orientation) -> Ten4 {
    let q = r.mandel_rotation();
    Ten4 {
        m: q * t.m * q.transpose(),
        major_symmetric: t.major_symmetric,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn full_from_sym2(a: &Sym2) -> [[f64; 3]; 3] {
        let m = a.to_matrix();
        let mut out = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] = m[(i, j)];
            }
        }
        out
    }

    fn sym_matrix(c: [f64; 6]) -> Matrix3<f64> {
        Matrix3::new(c[0], c[5], c[4], c[5], c[1], c[3], c[4], c[3], c[2])
    }

    fn arb_sym() -> impl Strategy<Value = [f64; 6]> {
        prop::array::uniform6(-10.0f64..10.0)
    }

    fn arb_rotation() -> impl Strategy<Value = Orientation> {
        (prop::array::uniform3(-1.0f64..1.0), 0.0f64..6.3).prop_filter_map(
            "degenerate axis",
            |(a, angle)| {
                let v = Vector3::new(a[0], a[1], a[2]);
                if v.norm() < 1e-3 {
                    None
                } else {
                    Orientation::about_axis(v, angle).ok()
                }
            },
        )
    }

    #[test]
    fn identity_round_trip() {
        let a = Sym2::from_matrix(&Matrix3::identity()).unwrap();
        assert_eq!(a.mandel().as_slice(), &[1.0, 1.0, 1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn shear_gets_sqrt2() {
        let s = 0.7;
        let a = Sym2::from_matrix(&sym_matrix([0.0, 0.0, 0.0, 0.0, 0.0, s])).unwrap();
        assert_abs_diff_eq!(a.mandel()[5], SQRT_2 * s, epsilon = 1e-15);
        assert_abs_diff_eq!(a.get(0, 1), s, epsilon = 1e-15);
        assert_abs_diff_eq!(a.get(1, 0), s, epsilon = 1e-15);
    }

    #[test]
    fn non_symmetric_rejected() {
        let mut m = Matrix3::identity();
        m[(0, 1)] = 1e-3;
        assert!(matches!(Sym2::from_matrix(&m), Err(Error::NotSymmetric(_))));
    }

    #[test]
    fn inverse_of_scaled_identity() {
        let t = Ten4::identity() * 2.0;
        let inv = t.inverse().unwrap();
        assert_abs_diff_eq!(
            (inv.mandel() - Mat6::identity() * 0.5).amax(),
            0.0,
            epsilon = 1e-15
        );
        let a = Sym2::from_components([1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(Ten4::identity().apply(&a), a);
    }

    #[test]
    fn singular_inverse_reports_condition() {
        let (j, _) = iso_projectors();
        match j.inverse() {
            Err(Error::Singular { condition }) => assert!(condition > 1e12),
            other => panic!("expected singular error, got {other:?}"),
        }
    }

    #[test]
    fn hooke_uniaxial_strain() {
        // lambda = 40, mu = 40: sigma = lambda tr(eps) i + 2 mu eps
        let c = iso_stiffness(100.0, 0.25).unwrap();
        let s = c.apply(&Sym2::from_components([1e-3, 0.0, 0.0, 0.0, 0.0, 0.0]));
        let lambda = 40.0;
        let mu = 40.0;
        let expected = [lambda * 1e-3 + 2.0 * mu * 1e-3, lambda * 1e-3, lambda * 1e-3];
        for i in 0..3 {
            assert_abs_diff_eq!(s.components()[i], expected[i], epsilon = 1e-15);
        }
        assert_abs_diff_eq!(s.components()[0], 0.12, epsilon = 1e-15);
        assert_abs_diff_eq!(s.components()[1], 0.04, epsilon = 1e-15);
    }

    #[test]
    fn moduli_conversion() {
        let (k, mu) = bulk_shear(100.0, 0.25).unwrap();
        assert_abs_diff_eq!(k, 200.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(mu, 40.0, epsilon = 1e-12);
        let (k, mu) = bulk_shear(1000.0, 0.25).unwrap();
        assert_abs_diff_eq!(k, 2000.0 / 3.0, epsilon = 1e-10);
        assert_abs_diff_eq!(mu, 400.0, epsilon = 1e-10);
        let (k, mu) = bulk_shear(30.0, 0.0).unwrap();
        assert_abs_diff_eq!(k, 10.0, epsilon = 1e-14);
        assert_abs_diff_eq!(mu, 15.0, epsilon = 1e-14);
        assert!(iso_stiffness(100.0, 0.25).unwrap().is_major_symmetric());
    }

    #[test]
    fn incompressible_rejected() {
        assert!(matches!(
            iso_stiffness(100.0, 0.5),
            Err(Error::Incompressible(_))
        ));
        assert!(iso_stiffness(-1.0, 0.2).is_err());
        assert!(iso_stiffness(1.0, -1.0).is_err());
    }

    #[test]
    fn projector_algebra() {
        let (j, k) = iso_projectors();
        let tol = 1e-15;
        assert!(((j + k).mandel() - Mat6::identity()).amax() < tol);
        assert!(((j * j).mandel() - j.mandel()).amax() < tol);
        assert!(((k * k).mandel() - k.mandel()).amax() < tol);
        assert!((j * k).mandel().amax() < tol);
        let hydro = Sym2::identity() * 3.5;
        assert!(k.apply(&hydro).norm() < tol);
    }

    #[test]
    fn rotation_about_3_swaps_axes() {
        let r = Orientation::about_axis(Vector3::z(), std::f64::consts::FRAC_PI_2).unwrap();
        let a = Sym2::from_components([1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let b = rotate_sym2(&a, &r);
        assert_abs_diff_eq!(b.get(1, 1), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(b.get(0, 0), 0.0, epsilon = 1e-15);
        let same = rotate_sym2(&a, &Orientation::identity());
        assert_eq!(same, a);
    }

    #[test]
    fn isotropic_rotation_invariant() {
        let c = iso_stiffness(123.0, 0.3).unwrap();
        let r = Orientation::about_axis(Vector3::new(0.3, -1.0, 0.7), 1.1).unwrap();
        let rc = rotate_ten4(&c, &r);
        assert!((rc.mandel() - c.mandel()).amax() < 1e-12 * c.max_abs());
    }

    #[test]
    fn from_axis_is_proper() {
        for axis in [
            Vector3::new(0.0, 0.0, 1.0),
            Vector3::new(1.0, 1.0, 1.0),
            Vector3::new(-1.0, 0.0, 1.0),
            Vector3::new(0.2, -3.0, 0.01),
        ] {
            let r = Orientation::from_axis(axis).unwrap();
            let n = r.symmetry_axis();
            assert!((n - axis.normalize()).norm() < 1e-15);
        }
        assert!(Orientation::from_axis(Vector3::zeros()).is_err());
        let mut bad = Matrix3::identity();
        bad[(0, 0)] = -1.0;
        assert!(Orientation::new(bad).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn round_trip_matrix(c in arb_sym()) {
            let m = sym_matrix(c);
            let back = Sym2::from_matrix(&m).unwrap().to_matrix();
            prop_assert!((back - m).norm() < 1e-14 * m.norm().max(1e-300));
        }

        #[test]
        fn mandel_dot_is_double_contraction(a in arb_sym(), b in arb_sym()) {
            let (ma, mb) = (sym_matrix(a), sym_matrix(b));
            let full: f64 = ma.component_mul(&mb).sum();
            let mandel = Sym2::from_matrix(&ma).unwrap().dot(&Sym2::from_matrix(&mb).unwrap());
            prop_assert!((full - mandel).abs() <= 1e-14 * ma.norm() * mb.norm());
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn rotate_sym2_matches_index_notation(c in arb_sym(), r in arb_rotation()) {
            let a = Sym2::from_components(c);
            let full = full_from_sym2(&a);
            let rm = r.matrix();
            let rotated = rotate_sym2(&a, &r);
            for i in 0..3 {
                for j in 0..3 {
                    let mut s = 0.0;
                    for p in 0..3 {
                        for q in 0..3 {
                            s += rm[(i, p)] * rm[(j, q)] * full[p][q];
                        }
                    }
                    prop_assert!((rotated.get(i, j) - s).abs() < 1e-12);
                }
            }
            prop_assert!((rotated.norm() - a.norm()).abs() < 1e-12 * a.norm().max(1.0));
        }

        #[test]
        fn rotate_ten4_matches_index_notation(
            entries in prop::collection::vec(-5.0f64..5.0, 36),
            r in arb_rotation(),
        ) {
            let t = Ten4::from_mandel(Mat6::from_iterator(entries));
            let rm = r.matrix();
            let rotated = rotate_ten4(&t, &r);
            for &(i, j) in MANDEL_PAIRS.iter() {
                for &(k, l) in MANDEL_PAIRS.iter() {
                    let mut s = 0.0;
                    for p in 0..3 { for q in 0..3 { for u in 0..3 { for v in 0..3 {
                        s += rm[(i, p)] * rm[(j, q)] * rm[(k, u)] * rm[(l, v)] * t.get(p, q, u, v);
                    }}}}
                    prop_assert!((rotated.get(i, j, k, l) - s).abs() < 1e-12);
                }
            }
        }

        #[test]
        fn rotate_ten4_composes(
            entries in prop::collection::vec(-5.0f64..5.0, 36),
            r1 in arb_rotation(),
            r2 in arb_rotation(),
        ) {
            let t = Ten4::from_mandel(Mat6::from_iterator(entries));
            let both = rotate_ten4(&t, &r1.compose(&r2));
            let nested = rotate_ten4(&rotate_ten4(&t, &r2), &r1);
            prop_assert!((both.mandel() - nested.mandel()).amax() < 1e-12);
        }

        #[test]
        fn transpose_adjoint(
            entries in prop::collection::vec(-5.0f64..5.0, 36),
            b in arb_sym(),
            c in arb_sym(),
        ) {
            let t = Ten4::from_mandel(Mat6::from_iterator(entries));
            let (b, c) = (Sym2::from_components(b), Sym2::from_components(c));
            let lhs = t.apply(&b).dot(&c);
            let rhs = b.dot(&t.transpose().apply(&c));
            prop_assert!((lhs - rhs).abs() < 1e-11 * (1.0 + lhs.abs()));
        }

        #[test]
        fn inverse_is_inverse(
            entries in prop::collection::vec(-1.0f64..1.0, 36),
        ) {
            let t = Ten4::from_mandel(Mat6::from_iterator(entries) + Mat6::identity() * 8.0);
            let inv = t.inverse().unwrap();
            prop_assert!(((t * inv).mandel() - Mat6::identity()).amax() < 1e-10);
        }
    }
}
