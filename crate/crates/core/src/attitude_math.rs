//! Modified Rodrigues Parameter (MRP) algebra.
//!
//! Rotation matrices follow the direction-cosine convention: `rotation_matrix(σ)`
//! maps components expressed in the reference frame into the rotated frame, so a
//! small rotation `σ ≈ e·θ/4` gives `R ≈ I − θ·e^×`.

use nalgebra::{Matrix3, Vector3};
use std::f64::consts::PI;
use std::fmt;
use thiserror::Error;

pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;

/// Composition denominators below this magnitude are treated as singular.
pub const COMPOSITION_DEGENERACY: f64 = 1e-12;

/// An initial error smaller than this norm is treated as "already at goal".
pub const ZERO_ERROR_NORM: f64 = 1e-9;

const GIMBAL_LOCK_MARGIN: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AttitudeError {
    #[error("MRP composition is degenerate (denominator {denominator:e})")]
    DegenerateComposition { denominator: f64 },
    #[error("initial attitude error norm {norm:e} is too small to define an Euler axis")]
    ZeroInitialError { norm: f64 },
}

/// Modified Rodrigues Parameters `σ = e·tan(θ/4)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Mrp(pub Vec3);

impl Mrp {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self(Vec3::new(x, y, z))
    }

    pub fn zero() -> Self {
        Self(Vec3::zeros())
    }

    /// MRP for a rotation of `angle` about the unit vector `axis`.
    pub fn from_axis_angle(axis: &Vec3, angle: f64) -> Self {
        Self(axis * (angle / 4.0).tan())
    }

    #[inline]
    pub fn vector(&self) -> &Vec3 {
        &self.0
    }

    #[inline]
    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    #[inline]
    pub fn norm_squared(&self) -> f64 {
        self.0.norm_squared()
    }

    /// Inverse rotation, `σ* = −σ`.
    pub fn conjugate(&self) -> Self {
        Self(-self.0)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }
}

impl From<Vec3> for Mrp {
    fn from(v: Vec3) -> Self {
        Self(v)
    }
}

impl From<[f64; 3]> for Mrp {
    fn from(v: [f64; 3]) -> Self {
        Self(Vec3::from(v))
    }
}

impl fmt::Display for Mrp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}, {}]", self.0.x, self.0.y, self.0.z)
    }
}

/// Euler axis and principal rotation angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisAngle {
    axis: Vec3,
    angle: f64,
}

impl AxisAngle {
    /// Normalizes `axis` and wraps `angle` into `[0, 2π)`. Returns `None` for a
    /// zero or non-finite axis.
    pub fn new(axis: Vec3, angle: f64) -> Option<Self> {
        let n = axis.norm();
        if !(n.is_finite() && n > 0.0 && angle.is_finite()) {
            return None;
        }
        Some(Self {
            axis: axis / n,
            angle: angle.rem_euclid(2.0 * PI),
        })
    }

    pub fn axis(&self) -> &Vec3 {
        &self.axis
    }

    pub fn angle(&self) -> f64 {
        self.angle
    }

    pub fn to_mrp(&self) -> Mrp {
        Mrp::from_axis_angle(&self.axis, self.angle)
    }
}

/// 3-2-1 (yaw, pitch, roll) Euler angles in radians.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EulerAngles {
    pub roll: f64,
    pub pitch: f64,
    pub yaw: f64,
    /// Set when `|sin(pitch)|` is within 1e-9 of 1; roll is then pinned to 0.
    pub gimbal_lock: bool,
}

/// Cross-product matrix: `skew(x) * y == x × y`.
pub fn skew(x: &Vec3) -> Mat3 {
    Mat3::new(
        0.0, -x.z, x.y, //
        x.z, 0.0, -x.x, //
        -x.y, x.x, 0.0,
    )
}

/// MRP kinematics matrix `M(σ) = ((1 − ‖σ‖²)I + 2σ^× + 2σσᵀ)/4`, so that `σ̇ = M(σ)ω`.
pub fn mrp_kinematics_matrix(sigma: &Mrp) -> Mat3 {
    let x = sigma.vector();
    (Mat3::identity() * (1.0 - x.norm_squared()) + skew(x) * 2.0 + x * x.transpose() * 2.0) / 4.0
}

/// Literal error form
/// `((1−‖σ‖²)σ_d + (1−‖σ_d‖²)σ + 2σ_d^×σ) / (1 + ‖σ_d‖²‖σ‖² + 2σ_dᵀσ)`.
///
/// Does not vanish at `σ = σ_d`. Seeds the rest-to-rest initial error
/// (`σ = 0` gives `σ_d`). Use [`mrp_error`] for the canonical product.
pub fn mrp_error_literal(sigma: &Mrp, sigma_d: &Mrp) -> Result<Mrp, AttitudeError> {
    let s = sigma.vector();
    let d = sigma_d.vector();
    let (ns, nd) = (s.norm_squared(), d.norm_squared());
    let denominator = 1.0 + nd * ns + 2.0 * d.dot(s);
    if denominator.abs() < COMPOSITION_DEGENERACY {
        return Err(AttitudeError::DegenerateComposition { denominator });
    }
    let numerator = d * (1.0 - ns) + s * (1.0 - nd) + d.cross(s) * 2.0;
    Ok(Mrp(numerator / denominator))
}

/// Standard MRP product: the rotation `a` followed by `b`, i.e.
/// `rotation_matrix(compose(b, a)) == rotation_matrix(b) * rotation_matrix(a)`.
pub fn mrp_compose(sigma_b: &Mrp, sigma_a: &Mrp) -> Result<Mrp, AttitudeError> {
    let b = sigma_b.vector();
    let a = sigma_a.vector();
    let (na, nb) = (a.norm_squared(), b.norm_squared());
    let denominator = 1.0 + na * nb - 2.0 * a.dot(b);
    if denominator.abs() < COMPOSITION_DEGENERACY {
        return Err(AttitudeError::DegenerateComposition { denominator });
    }
    let numerator = b * (1.0 - na) + a * (1.0 - nb) - b.cross(a) * 2.0;
    Ok(Mrp(numerator / denominator))
}

/// Canonical attitude error with `R(σ_e) = R(σ)ᵀ R(σ_d)`. Zero when `σ = σ_d`
/// and equal to `σ_d` when the body starts at the identity attitude.
pub fn mrp_error(sigma: &Mrp, sigma_d: &Mrp) -> Result<Mrp, AttitudeError> {
    mrp_compose(&sigma.conjugate(), sigma_d)
}

/// Inverse of [`mrp_error`]: recovers the body attitude from the error and the target.
pub fn attitude_from_error(sigma_e: &Mrp, sigma_d: &Mrp) -> Result<Mrp, AttitudeError> {
    mrp_compose(sigma_d, &sigma_e.conjugate())
}

/// `R(σ) = I + (8σ^×σ^× − 4(1 − ‖σ‖²)σ^×)/(1 + ‖σ‖²)²`.
pub fn rotation_matrix(sigma_e: &Mrp) -> Mat3 {
    let x = sigma_e.vector();
    let n2 = x.norm_squared();
    let sx = skew(x);
    let den = (1.0 + n2) * (1.0 + n2);
    Mat3::identity() + (sx * sx * 8.0 - sx * (4.0 * (1.0 - n2))) / den
}

/// `θ = 4·arctan(eᵀσ_e)`.
pub fn rotation_angle(sigma_e: &Mrp, e: &Vec3) -> f64 {
    4.0 * e.dot(sigma_e.vector()).atan()
}

/// Euler axis `e = σ_e(0)/‖σ_e(0)‖`.
pub fn euler_axis_from_initial(sigma_e0: &Mrp) -> Result<Vec3, AttitudeError> {
    let norm = sigma_e0.norm();
    if norm.is_nan() || norm <= ZERO_ERROR_NORM {
        return Err(AttitudeError::ZeroInitialError { norm });
    }
    Ok(sigma_e0.vector() / norm)
}

/// 3-2-1 Euler angles of a direction-cosine matrix.
pub fn euler_angles_from_matrix(c: &Mat3) -> EulerAngles {
    let sin_pitch = (-c[(0, 2)]).clamp(-1.0, 1.0);
    let pitch = sin_pitch.asin();
    if sin_pitch.abs() > 1.0 - GIMBAL_LOCK_MARGIN {
        return EulerAngles {
            roll: 0.0,
            pitch,
            yaw: (-c[(1, 0)]).atan2(c[(1, 1)]),
            gimbal_lock: true,
        };
    }
    EulerAngles {
        roll: c[(1, 2)].atan2(c[(2, 2)]),
        pitch,
        yaw: c[(0, 1)].atan2(c[(0, 0)]),
        gimbal_lock: false,
    }
}

pub fn mrp_to_euler_angles(sigma: &Mrp) -> EulerAngles {
    euler_angles_from_matrix(&rotation_matrix(sigma))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_unit(rng: &mut impl Rng) -> Vec3 {
        loop {
            let v = Vec3::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            );
            let n = v.norm();
            if n > 0.1 && n <= 1.0 {
                return v / n;
            }
        }
    }

    /// Axis-angle DCM: `cos θ I + (1 − cos θ) eeᵀ − sin θ e^×`.
    fn rodrigues_dcm(e: &Vec3, theta: f64) -> Mat3 {
        let (s, c) = theta.sin_cos();
        Mat3::identity() * c + e * e.transpose() * (1.0 - c) - skew(e) * s
    }

    #[test]
    fn skew_examples() {
        assert_eq!(skew(&Vec3::zeros()), Mat3::zeros());
        let m = skew(&Vec3::new(1.0, 2.0, 3.0));
        let expected = Mat3::new(0.0, -3.0, 2.0, 3.0, 0.0, -1.0, -2.0, 1.0, 0.0);
        assert_eq!(m, expected);
        let x = Vec3::new(-0.4, 1.7, 2.2);
        assert_eq!(skew(&x) * x, Vec3::zeros());
        let y = Vec3::new(0.3, -0.1, 5.0);
        assert_abs_diff_eq!(skew(&x) * y, x.cross(&y), epsilon = 1e-15);
        assert_eq!(skew(&x).transpose(), -skew(&x));
    }

    #[test]
    fn kinematics_matrix_at_zero_is_quarter_identity() {
        assert_eq!(mrp_kinematics_matrix(&Mrp::zero()), Mat3::identity() / 4.0);
    }

    #[test]
    fn kinematics_matrix_matches_scalar_expansion() {
        let (x1, x2, x3) = (0.1, 0.2, -0.3);
        let n = x1 * x1 + x2 * x2 + x3 * x3;
        let a = 1.0 - n;
        let expected = Mat3::new(
            (a + 2.0 * x1 * x1) / 4.0,
            (-2.0 * x3 + 2.0 * x1 * x2) / 4.0,
            (2.0 * x2 + 2.0 * x1 * x3) / 4.0,
            (2.0 * x3 + 2.0 * x2 * x1) / 4.0,
            (a + 2.0 * x2 * x2) / 4.0,
            (-2.0 * x1 + 2.0 * x2 * x3) / 4.0,
            (-2.0 * x2 + 2.0 * x3 * x1) / 4.0,
            (2.0 * x1 + 2.0 * x3 * x2) / 4.0,
            (a + 2.0 * x3 * x3) / 4.0,
        );
        let m = mrp_kinematics_matrix(&Mrp::new(x1, x2, x3));
        assert_abs_diff_eq!(m, expected, epsilon = 1e-15);
    }

    #[test]
    fn on_axis_kinematics_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for _ in 0..1000 {
            let e = random_unit(&mut rng);
            let theta = rng.gen_range(0.01..(2.0 * PI - 0.01));
            let t = (theta / 4.0).tan();
            let lhs = mrp_kinematics_matrix(&Mrp(e * t)).transpose() * e;
            let scale = (1.0 + t * t) / 4.0;
            // entries grow like tan²(θ/4), so compare against that scale
            assert!((lhs - e * scale).norm() / scale < 1e-12, "theta={theta}");
        }
    }

    #[test]
    fn literal_error_reproduces_initial_conditions() {
        let a = Mrp::new(0.1, 0.2, -0.3);
        assert_eq!(mrp_error_literal(&Mrp::zero(), &a).unwrap(), a);
        let b = Mrp::new(0.7809, 0.4685, -0.7809);
        assert_eq!(mrp_error_literal(&Mrp::zero(), &b).unwrap(), b);
        assert_eq!(
            mrp_error_literal(&Mrp::zero(), &Mrp::zero()).unwrap(),
            Mrp::zero()
        );
    }

    #[test]
    fn literal_error_does_not_vanish_at_target() {
        let s = Mrp::new(0.1, 0.2, -0.3);
        let e = mrp_error_literal(&s, &s).unwrap();
        let n = s.norm_squared();
        let expected = s.vector() * (2.0 * (1.0 - n) / (1.0 + n * n + 2.0 * n));
        assert_abs_diff_eq!(*e.vector(), expected, epsilon = 1e-15);
        assert!(e.norm() > 0.1);
    }

    #[test]
    fn literal_error_degenerate_denominator() {
        // 1 + |d|²|s|² + 2dᵀs = (1 − 1)² = 0 for s = −d with |d| = 1
        let d = Mrp::new(1.0, 0.0, 0.0);
        let s = Mrp::new(-1.0, 0.0, 0.0);
        assert!(matches!(
            mrp_error_literal(&s, &d),
            Err(AttitudeError::DegenerateComposition { .. })
        ));
    }

    #[test]
    fn compose_identity_and_inverse() {
        let s = Mrp::new(0.3, -0.2, 0.55);
        assert_eq!(mrp_compose(&s, &Mrp::zero()).unwrap(), s);
        assert_eq!(mrp_compose(&Mrp::zero(), &s).unwrap(), s);
        assert_abs_diff_eq!(
            *mrp_compose(&s, &s.conjugate()).unwrap().vector(),
            Vec3::zeros(),
            epsilon = 1e-15
        );
        let unit = Mrp::new(0.0, 1.0, 0.0);
        assert!(matches!(
            mrp_compose(&unit, &unit),
            Err(AttitudeError::DegenerateComposition { .. })
        ));
    }

    #[test]
    fn canonical_error_round_trips() {
        let s = Mrp::new(0.2, -0.4, 0.1);
        let d = Mrp::new(0.7809, 0.4685, -0.7809);
        assert_abs_diff_eq!(
            *mrp_error(&d, &d).unwrap().vector(),
            Vec3::zeros(),
            epsilon = 1e-15
        );
        assert_eq!(mrp_error(&Mrp::zero(), &d).unwrap(), d);
        let se = mrp_error(&s, &d).unwrap();
        let back = attitude_from_error(&se, &d).unwrap();
        assert_abs_diff_eq!(rotation_matrix(&back), rotation_matrix(&s), epsilon = 1e-12);
    }

    #[test]
    fn rotation_matrix_examples() {
        assert_eq!(rotation_matrix(&Mrp::zero()), Mat3::identity());
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let e = random_unit(&mut rng);
            let theta = rng.gen_range(0.0..(2.0 * PI - 1e-3));
            let r = rotation_matrix(&Mrp::from_axis_angle(&e, theta));
            assert_abs_diff_eq!(r, rodrigues_dcm(&e, theta), epsilon = 1e-12);
        }
    }

    #[test]
    fn rotation_matrix_is_proper_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let s = random_unit(&mut rng) * rng.gen_range(0.0..5.0);
            let r = rotation_matrix(&Mrp(s));
            assert!((r.transpose() * r - Mat3::identity()).norm() < 1e-12);
            assert!((r.determinant() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rotation_angle_examples() {
        let a = Mrp::new(0.1, 0.2, -0.3);
        let ea = a.vector().normalize();
        assert!((rotation_angle(&a, &ea) - 1.4321).abs() < 1e-3);
        assert!((rotation_angle(&a, &ea) - 1.432_156_250_2).abs() < 1e-9);
        let b = Mrp::new(0.7809, 0.4685, -0.7809);
        let eb = b.vector().normalize();
        assert!((rotation_angle(&b, &eb) - 3.5036).abs() < 1e-4);
        assert_eq!(rotation_angle(&Mrp::zero(), &Vec3::z()), 0.0);
    }

    #[test]
    fn rotation_angle_inverts_axis_angle_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..1000 {
            let e = random_unit(&mut rng);
            let theta = rng.gen_range(1e-6..(2.0 * PI - 1e-6));
            let s = Mrp::from_axis_angle(&e, theta);
            assert!((rotation_angle(&s, &e) - theta).abs() < 1e-10);
        }
    }

    #[test]
    fn euler_axis_examples() {
        let e = euler_axis_from_initial(&Mrp::new(0.1, 0.2, -0.3)).unwrap();
        assert_abs_diff_eq!(
            e,
            Vec3::new(0.267_261_24, 0.534_522_48, -0.801_783_73),
            epsilon = 1e-8
        );
        assert_eq!(
            euler_axis_from_initial(&Mrp::new(0.0, 0.0, 1.0)).unwrap(),
            Vec3::z()
        );
        assert!(matches!(
            euler_axis_from_initial(&Mrp::zero()),
            Err(AttitudeError::ZeroInitialError { .. })
        ));
    }

    #[test]
    fn euler_angles_examples() {
        let zero = mrp_to_euler_angles(&Mrp::zero());
        assert_eq!((zero.roll, zero.pitch, zero.yaw), (0.0, 0.0, 0.0));

        let ex = mrp_to_euler_angles(&Mrp::new((PI / 8.0).tan(), 0.0, 0.0));
        assert!((ex.roll - PI / 2.0).abs() < 1e-12);
        assert!(ex.pitch.abs() < 1e-12 && ex.yaw.abs() < 1e-12);

        let s = Mrp::new(0.2, -0.1, 0.35);
        assert_eq!(
            mrp_to_euler_angles(&s),
            euler_angles_from_matrix(&rotation_matrix(&s))
        );
    }

    /// Builds `R1(roll) R2(pitch) R3(yaw)` from elementary rotations and checks
    /// the extraction recovers the angles.
    #[test]
    fn euler_angles_recover_elementary_sequence() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let (r, p, y) = (
                rng.gen_range(-3.0..3.0),
                rng.gen_range(-1.5..1.5),
                rng.gen_range(-3.0..3.0),
            );
            let c = rodrigues_dcm(&Vec3::x(), r)
                * rodrigues_dcm(&Vec3::y(), p)
                * rodrigues_dcm(&Vec3::z(), y);
            let ang = euler_angles_from_matrix(&c);
            assert!(!ang.gimbal_lock);
            assert!((ang.roll - r).abs() < 1e-9);
            assert!((ang.pitch - p).abs() < 1e-9);
            assert!((ang.yaw - y).abs() < 1e-9);
        }
    }

    #[test]
    fn euler_angles_flag_gimbal_lock() {
        let c = rodrigues_dcm(&Vec3::y(), PI / 2.0) * rodrigues_dcm(&Vec3::z(), 0.4);
        let ang = euler_angles_from_matrix(&c);
        assert!(ang.gimbal_lock);
        assert_eq!(ang.roll, 0.0);
        assert!((ang.pitch - PI / 2.0).abs() < 1e-6);
        assert!((ang.yaw - 0.4).abs() < 1e-9);
    }

    #[test]
    fn axis_angle_wraps_and_normalizes() {
        let aa = AxisAngle::new(Vec3::new(0.0, 0.0, 2.0), -0.5).unwrap();
        assert_eq!(*aa.axis(), Vec3::z());
        assert!((aa.angle() - (2.0 * PI - 0.5)).abs() < 1e-15);
        assert!(AxisAngle::new(Vec3::zeros(), 1.0).is_none());
        let s = AxisAngle::new(Vec3::x(), 1.0).unwrap().to_mrp();
        assert!((rotation_angle(&s, &Vec3::x()) - 1.0).abs() < 1e-14);
    }
}
