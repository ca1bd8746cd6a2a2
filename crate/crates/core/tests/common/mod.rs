#![allow(dead_code)]

use mrp_sim::attitude_math::{Mat3, Mrp, Vec3};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn unit_vector(rng: &mut impl Rng) -> Vec3 {
    loop {
        let v = Vec3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            return v / n;
        }
    }
}

pub fn vector_in_ball(rng: &mut impl Rng, radius: f64) -> Vec3 {
    unit_vector(rng) * radius * rng.gen::<f64>().cbrt()
}

pub fn mrp_in_ball(rng: &mut impl Rng, radius: f64) -> Mrp {
    Mrp::from(vector_in_ball(rng, radius))
}

/// Shepperd extraction of the unit quaternion `(q0, q)` of a direction-cosine
/// matrix, returned with `q0 ≥ 0`.
pub fn dcm_to_quaternion(c: &Mat3) -> (f64, Vec3) {
    let tr = c.trace();
    let cands = [tr, c[(0, 0)], c[(1, 1)], c[(2, 2)]];
    let (i, _) = cands.iter().enumerate().fold(
        (0, f64::MIN),
        |acc, (k, &v)| if v > acc.1 { (k, v) } else { acc },
    );
    let (q0, q1, q2, q3) = match i {
        0 => {
            let q0 = 0.5 * (1.0 + tr).sqrt();
            let f = 0.25 / q0;
            (
                q0,
                (c[(1, 2)] - c[(2, 1)]) * f,
                (c[(2, 0)] - c[(0, 2)]) * f,
                (c[(0, 1)] - c[(1, 0)]) * f,
            )
        }
        1 => {
            let q1 = 0.5 * (1.0 + 2.0 * c[(0, 0)] - tr).sqrt();
            let f = 0.25 / q1;
            (
                (c[(1, 2)] - c[(2, 1)]) * f,
                q1,
                (c[(0, 1)] + c[(1, 0)]) * f,
                (c[(2, 0)] + c[(0, 2)]) * f,
            )
        }
        2 => {
            let q2 = 0.5 * (1.0 + 2.0 * c[(1, 1)] - tr).sqrt();
            let f = 0.25 / q2;
            (
                (c[(2, 0)] - c[(0, 2)]) * f,
                (c[(0, 1)] + c[(1, 0)]) * f,
                q2,
                (c[(1, 2)] + c[(2, 1)]) * f,
            )
        }
        _ => {
            let q3 = 0.5 * (1.0 + 2.0 * c[(2, 2)] - tr).sqrt();
            let f = 0.25 / q3;
            (
                (c[(0, 1)] - c[(1, 0)]) * f,
                (c[(2, 0)] + c[(0, 2)]) * f,
                (c[(1, 2)] + c[(2, 1)]) * f,
                q3,
            )
        }
    };
    if q0 < 0.0 {
        (-q0, -Vec3::new(q1, q2, q3))
    } else {
        (q0, Vec3::new(q1, q2, q3))
    }
}

/// Short-rotation MRP (`‖σ‖ ≤ 1`) of a direction-cosine matrix.
pub fn dcm_to_mrp(c: &Mat3) -> Mrp {
    let (q0, q) = dcm_to_quaternion(c);
    Mrp::from(q / (1.0 + q0))
}

/// Maps an MRP onto its short-rotation member.
pub fn short_mrp(s: &Mrp) -> Mrp {
    let n2 = s.norm_squared();
    if n2 > 1.0 {
        Mrp::from(-s.vector() / n2)
    } else {
        *s
    }
}
