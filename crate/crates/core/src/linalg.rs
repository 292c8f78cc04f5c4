//! Small dense linear algebra helpers on top of nalgebra.

use nalgebra::{Matrix3, Vector3};

pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;

/// Unit vectors `(t1, t2)` with `t1 × t2 = n̂`.
pub fn orthonormal_frame(n: &Vec3) -> (Vec3, Vec3) {
    let n = n.normalize();
    let helper = if n.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    let t1 = helper.cross(&n).normalize();
    let t2 = n.cross(&t1);
    (t1, t2)
}

pub fn to_array(v: &Vec3) -> [f64; 3] {
    [v.x, v.y, v.z]
}

pub fn to_rows(m: &Mat3) -> [[f64; 3]; 3] {
    let mut out = [[0.0; 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, e) in row.iter_mut().enumerate() {
            *e = m[(i, j)];
        }
    }
    out
}

/// Unit point on the sphere with azimuth `theta` and polar angle `phi`.
pub fn sphere_point(theta: f64, phi: f64) -> Vec3 {
    Vec3::new(phi.sin() * theta.cos(), phi.sin() * theta.sin(), phi.cos())
}

/// Cell-centred azimuth × polar sample grid on the unit sphere.
pub fn sphere_grid(n_azimuth: usize, n_polar: usize) -> Vec<Vec3> {
    let mut pts = Vec::with_capacity(n_azimuth * n_polar);
    for k in 0..n_polar {
        let phi = std::f64::consts::PI * (k as f64 + 0.5) / n_polar as f64;
        for j in 0..n_azimuth {
            let theta = 2.0 * std::f64::consts::PI * j as f64 / n_azimuth as f64;
            pts.push(sphere_point(theta, phi));
        }
    }
    pts
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_is_right_handed() {
        for n in [Vec3::x(), Vec3::new(0.3, -2.0, 0.7), Vec3::new(1.0, 1e-9, 0.0)] {
            let (t1, t2) = orthonormal_frame(&n);
            let c = t1.cross(&t2) - n.normalize();
            assert!(c.norm() < 1e-14);
            assert!(t1.dot(&n).abs() < 1e-14);
        }
    }
}
