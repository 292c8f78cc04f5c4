//! Fixed points: multistart Newton search, eigenvalues from the
//! characteristic cubic, and saddle-focus classification.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{to_rows, Mat3, Vec3};
use crate::polyfield::{zoo_entry, PolyVectorField, SystemId};

/// Residual bound every reported equilibrium satisfies, relative to max(1, ‖s‖).
pub const RESIDUAL_TOL: f64 = 1e-10;
/// |det J| at or below this makes the local index undefined.
pub const DET_TOL: f64 = 1e-10;
/// Eigenvalues with |Re| at or below this are treated as lying on the imaginary axis.
pub const IMAG_AXIS_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    SaddleFocus,
    ComplexSink,
    ComplexSource,
    RealNode,
    RealSaddle,
    Degenerate,
}

impl Classification {
    pub fn has_complex_pair(self) -> bool {
        matches!(self, Classification::SaddleFocus | Classification::ComplexSink | Classification::ComplexSource)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub location: Vec3,
    /// Row-major Jacobian at `location`.
    pub jacobian: [[f64; 3]; 3],
    /// Real eigenvalue first when a complex pair exists (then `+Im`, `-Im`);
    /// otherwise all real in ascending order.
    pub eigenvalues: Vec<Complex64>,
    pub classification: Classification,
    pub local_index: Option<i8>,
    pub shilnikov_ratio: Option<f64>,
}

impl Equilibrium {
    pub fn jacobian_matrix(&self) -> Mat3 {
        Mat3::from_fn(|i, j| self.jacobian[i][j])
    }

    /// The real eigenvalue paired with a complex pair, if there is one.
    pub fn real_eigenvalue(&self) -> Option<f64> {
        if self.classification.has_complex_pair() {
            Some(self.eigenvalues[0].re)
        } else {
            None
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchBox {
    pub lo: Vec3,
    pub hi: Vec3,
}

impl SearchBox {
    pub fn cube(half_width: f64) -> Self {
        SearchBox { lo: Vec3::repeat(-half_width), hi: Vec3::repeat(half_width) }
    }

    pub fn diameter(&self) -> f64 {
        (self.hi - self.lo).norm()
    }

    pub fn contains(&self, s: &Vec3, slack: f64) -> bool {
        (0..3).all(|k| s[k] >= self.lo[k] - slack && s[k] <= self.hi[k] + slack)
    }
}

impl Default for SearchBox {
    fn default() -> Self {
        SearchBox::cube(10.0)
    }
}

pub const DEFAULT_GRID_N: usize = 21;

/// Search box for a field: the zoo's box when the field's name is a
/// built-in system id, else the default `[-10, 10]³`.
pub fn default_search_box(field: &PolyVectorField) -> SearchBox {
    field
        .name
        .parse::<SystemId>()
        .ok()
        .and_then(zoo_entry)
        .filter(|e| e.params.iter().all(|p| field.parameters.contains_key(p.name)))
        .map(|e| SearchBox::cube(e.search_half_width(&field.parameters)))
        .unwrap_or_default()
}

/// `find_equilibria` over `default_search_box` with the default grid.
pub fn equilibria_of(field: &PolyVectorField) -> Result<Vec<Equilibrium>> {
    find_equilibria(field, &default_search_box(field), DEFAULT_GRID_N)
}

/// `det(λI - J) = λ³ + c2 λ² + c1 λ + c0`, returned as `[c0, c1, c2]`.
pub fn characteristic_coefficients(j: &Mat3) -> [f64; 3] {
    let tr = j.trace();
    let m2 = j[(0, 0)] * j[(1, 1)] - j[(0, 1)] * j[(1, 0)] + j[(0, 0)] * j[(2, 2)] - j[(0, 2)] * j[(2, 0)]
        + j[(1, 1)] * j[(2, 2)]
        - j[(1, 2)] * j[(2, 1)];
    [-j.determinant(), m2, -tr]
}

fn cubic_eval(c: &[f64; 3], l: Complex64) -> Complex64 {
    ((l + c[2]) * l + c[1]) * l + c[0]
}

fn cubic_deriv(c: &[f64; 3], l: Complex64) -> Complex64 {
    (l * 3.0 + 2.0 * c[2]) * l + c[1]
}

fn polish(c: &[f64; 3], mut l: Complex64) -> Complex64 {
    for _ in 0..4 {
        let p = cubic_eval(c, l);
        let d = cubic_deriv(c, l);
        if d.norm() == 0.0 {
            break;
        }
        let cand = l - p / d;
        if cubic_eval(c, cand).norm() < p.norm() {
            l = cand;
        } else {
            break;
        }
    }
    l
}

/// Roots of `λ³ + c2 λ² + c1 λ + c0` by Cardano / trigonometric formulas,
/// polished by Newton steps that are kept only when they reduce |p(λ)|.
pub fn solve_cubic(c: &[f64; 3]) -> [Complex64; 3] {
    let [a0, a1, a2] = *c;
    let shift = a2 / 3.0;
    let p = a1 - a2 * a2 / 3.0;
    let q = 2.0 * a2 * a2 * a2 / 27.0 - a2 * a1 / 3.0 + a0;
    let disc = (q / 2.0).powi(2) + (p / 3.0).powi(3);
    let roots = if disc > 0.0 {
        let sq = disc.sqrt();
        let w = -q / 2.0 - if q >= 0.0 { sq } else { -sq };
        let u = w.cbrt();
        let v = if u != 0.0 { -p / (3.0 * u) } else { 0.0 };
        let re = -(u + v) / 2.0 - shift;
        let im = 3f64.sqrt() / 2.0 * (u - v).abs();
        [
            Complex64::new(u + v - shift, 0.0),
            Complex64::new(re, im),
            Complex64::new(re, -im),
        ]
    } else if p == 0.0 {
        [Complex64::new(-shift, 0.0); 3]
    } else {
        let m = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
        let th = arg.acos() / 3.0;
        let tau = 2.0 * std::f64::consts::PI / 3.0;
        [0.0, 1.0, 2.0].map(|k| Complex64::new(m * (th - tau * k).cos() - shift, 0.0))
    };
    let mut out = roots.map(|r| polish(c, r));
    if out[1].im != 0.0 {
        // Keep the pair exactly conjugate after independent polishing.
        let pair = if out[1].im > 0.0 { out[1] } else { out[1].conj() };
        out[1] = pair;
        out[2] = pair.conj();
        out[0].im = 0.0;
    }
    out
}

fn is_complex(l: &Complex64) -> bool {
    l.im.abs() > 1e-9 * (1.0 + l.norm())
}

/// Eigenvalues ordered real-first when a complex pair exists, else ascending.
pub fn eigenvalues(j: &Mat3) -> Vec<Complex64> {
    let roots = solve_cubic(&characteristic_coefficients(j));
    if is_complex(&roots[1]) {
        vec![roots[0], roots[1], roots[2]]
    } else {
        let mut r: Vec<f64> = roots.iter().map(|l| l.re).collect();
        r.sort_by(|a, b| a.total_cmp(b));
        r.into_iter().map(|x| Complex64::new(x, 0.0)).collect()
    }
}

fn classify_spectrum(ev: &[Complex64]) -> (Classification, Option<f64>) {
    if ev.iter().any(|l| l.re.abs() <= IMAG_AXIS_TOL) {
        return (Classification::Degenerate, None);
    }
    if is_complex(&ev[1]) {
        let gamma = ev[0].re;
        let rho = ev[1].re;
        if gamma.signum() != rho.signum() {
            (Classification::SaddleFocus, Some((rho / gamma).abs()))
        } else if gamma < 0.0 {
            (Classification::ComplexSink, None)
        } else {
            (Classification::ComplexSource, None)
        }
    } else if ev.iter().all(|l| l.re < 0.0) || ev.iter().all(|l| l.re > 0.0) {
        (Classification::RealNode, None)
    } else {
        (Classification::RealSaddle, None)
    }
}

fn residual_ok(field: &PolyVectorField, s: &Vec3) -> bool {
    field.evaluate(s).norm() < RESIDUAL_TOL * s.norm().max(1.0)
}

/// Classifies the fixed point at `location`.
pub fn classify_equilibrium(field: &PolyVectorField, location: &Vec3) -> Result<Equilibrium> {
    if !residual_ok(field, location) {
        return Err(Error::InvalidArgument(format!(
            "{location:?} is not an equilibrium (|F| = {:e})",
            field.evaluate(location).norm()
        )));
    }
    let j = field.jacobian_at(location);
    let det = j.determinant();
    let ev = eigenvalues(&j);
    let (mut classification, shilnikov_ratio) = classify_spectrum(&ev);
    let local_index = if det.abs() > DET_TOL {
        Some(if det > 0.0 { 1 } else { -1 })
    } else {
        classification = Classification::Degenerate;
        None
    };
    Ok(Equilibrium {
        location: *location,
        jacobian: to_rows(&j),
        eigenvalues: ev,
        classification,
        local_index,
        shilnikov_ratio: if classification == Classification::SaddleFocus { shilnikov_ratio } else { None },
    })
}

fn newton(field: &PolyVectorField, seed: Vec3, limit: f64) -> Option<Vec3> {
    let mut s = seed;
    let mut converged_steps = 0;
    for _ in 0..100 {
        let f = field.evaluate(&s);
        if !f.iter().all(|v| v.is_finite()) {
            return None;
        }
        let j = field.jacobian_at(&s);
        let step = j.lu().solve(&f)?;
        s -= step;
        if !s.iter().all(|v| v.is_finite()) || s.norm() > limit {
            return None;
        }
        if step.norm() <= 1e-14 * s.norm().max(1.0) || field.evaluate(&s).norm() < 1e-15 * s.norm().max(1.0) {
            converged_steps += 1;
            if converged_steps >= 2 {
                break;
            }
        }
    }
    residual_ok(field, &s).then_some(s)
}

/// Multistart Newton over a `grid_n³` lattice of seeds in `search_box`.
pub fn find_equilibria(field: &PolyVectorField, search_box: &SearchBox, grid_n: usize) -> Result<Vec<Equilibrium>> {
    if grid_n < 2 {
        return Err(Error::InvalidArgument("grid_n must be at least 2".into()));
    }
    let diam = search_box.diameter();
    if (0..3).any(|k| search_box.hi[k] <= search_box.lo[k]) {
        return Err(Error::InvalidArgument("search box is degenerate".into()));
    }
    let n = grid_n;
    let seed = |idx: usize| {
        let (i, j, k) = (idx / (n * n), (idx / n) % n, idx % n);
        let t = |m: usize, a: usize| search_box.lo[a] + (search_box.hi[a] - search_box.lo[a]) * m as f64 / (n - 1) as f64;
        Vec3::new(t(i, 0), t(j, 1), t(k, 2))
    };
    let limit = 100.0 * (diam + search_box.lo.norm().max(search_box.hi.norm()));
    let roots: Vec<Vec3> = (0..n * n * n)
        .into_par_iter()
        .filter_map(|idx| newton(field, seed(idx), limit))
        .filter(|s| search_box.contains(s, 1e-9 * diam))
        .collect();

    let radius = 1e-6 * diam;
    let mut unique: Vec<Vec3> = Vec::new();
    for r in roots {
        if !unique.iter().any(|u| (u - r).norm() < radius) {
            unique.push(r);
        }
    }
    unique.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)).then(a.z.total_cmp(&b.z)));
    unique.iter().map(|s| classify_equilibrium(field, s)).collect()
}

/// The three displayed radical formulas for the spectrum of the Michelson
/// Jacobian at `p₊ = (c√2, 0, 0)`, in (real, complex, conjugate) order.
///
/// The Jacobian's characteristic polynomial is `λ³ + λ + k` with `k = c√2`.
/// The real root is `u - 1/(3u)` with `u = A^{1/3} / (2^{1/3} 3^{2/3})`.
pub fn michelson_eigenvalues_closed_form(c: f64) -> Result<[Complex64; 3]> {
    if !(c > 0.0) {
        return Err(Error::InvalidArgument(format!("c must be positive, got {c}")));
    }
    let k = c * std::f64::consts::SQRT_2;
    let s3 = 3f64.sqrt();
    let a = s3 * (27.0 * k * k + 4.0).sqrt() - 9.0 * k;
    let a13 = a.cbrt();
    let i_s3 = Complex64::new(0.0, s3);
    let one = Complex64::new(1.0, 0.0);
    let lead = 2f64.powf(2.0 / 3.0) * 3f64.cbrt() * a13;
    let tail = 2f64.powf(4.0 / 3.0) * 3f64.powf(2.0 / 3.0);
    let e1 = (one + i_s3) / lead - (one - i_s3) * a13 / tail;
    let e2 = (one - i_s3) / lead - (one + i_s3) * a13 / tail;
    let real = a13 / (2f64.cbrt() * 3f64.powf(2.0 / 3.0)) - 2f64.cbrt() / (3f64.cbrt() * a13);
    Ok([Complex64::new(real, 0.0), e1, e2])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyfield::{zoo, SystemId};
    use std::collections::BTreeMap;

    fn params(kv: &[(&str, f64)]) -> BTreeMap<String, f64> {
        kv.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn bz_fixed_points() {
        let f = zoo(SystemId::Bz, &BTreeMap::new()).unwrap();
        let eqs = find_equilibria(&f, &SearchBox::cube(5.0), 21).unwrap();
        assert_eq!(eqs.len(), 2);
        assert!((eqs[0].location - Vec3::new(-1.0, 0.0, 0.0)).norm() < 1e-12);
        assert!(eqs[1].location.norm() < 1e-12);
        assert_eq!(eqs[0].classification, Classification::ComplexSink);
        assert_eq!(eqs[0].local_index, Some(-1));
        assert_eq!(eqs[1].classification, Classification::SaddleFocus);
        assert_eq!(eqs[1].local_index, Some(1));
    }

    #[test]
    fn sprott_fixed_point() {
        let f = zoo(SystemId::SprottEVariant, &params(&[("a", 1.0)])).unwrap();
        let eqs = find_equilibria(&f, &SearchBox::cube(20.0), 21).unwrap();
        assert_eq!(eqs.len(), 1);
        assert!((eqs[0].location - Vec3::new(0.25, 0.0625, -16.0)).norm() < 1e-10);
        assert_eq!(eqs[0].local_index, Some(-1));
    }

    #[test]
    fn stable_node() {
        let f = PolyVectorField::linear("neg", &(-Mat3::identity()));
        let e = classify_equilibrium(&f, &Vec3::zeros()).unwrap();
        assert_eq!(e.classification, Classification::RealNode);
        assert_eq!(e.local_index, Some(-1));
        assert!(e.shilnikov_ratio.is_none());
    }

    #[test]
    fn pure_imaginary_pair_is_degenerate() {
        let f = zoo(SystemId::Genesio, &params(&[("a", 1.0), ("b", 1.0)])).unwrap();
        let e = classify_equilibrium(&f, &Vec3::zeros()).unwrap();
        assert_eq!(e.classification, Classification::Degenerate);
    }

    #[test]
    fn closed_form_small_c_limit() {
        let ev = michelson_eigenvalues_closed_form(1e-8).unwrap();
        let want = [Complex64::new(0.0, 0.0), Complex64::new(0.0, 1.0), Complex64::new(0.0, -1.0)];
        for (a, b) in ev.iter().zip(want.iter()) {
            assert!((a - b).norm() < 1e-4, "{a} vs {b}");
        }
        assert!(michelson_eigenvalues_closed_form(0.0).is_err());
    }

    #[test]
    fn closed_form_pair_is_conjugate() {
        for c in [0.05, 0.3, 1.0, 7.0, 20.0] {
            let ev = michelson_eigenvalues_closed_form(c).unwrap();
            assert!((ev[1] - ev[2].conj()).norm() < 1e-12 * (1.0 + ev[1].norm()));
            assert!(ev[0].re < 0.0 && ev[1].re > 0.0);
        }
    }

    #[test]
    fn cubic_with_triple_root() {
        // (λ - 2)³
        let r = solve_cubic(&[-8.0, 12.0, -6.0]);
        for l in r {
            assert!((l - Complex64::new(2.0, 0.0)).norm() < 1e-5);
        }
    }

    #[test]
    fn non_equilibrium_rejected() {
        let f = zoo(SystemId::Bz, &BTreeMap::new()).unwrap();
        assert!(classify_equilibrium(&f, &Vec3::new(1.0, 1.0, 1.0)).is_err());
    }

    #[test]
    fn bad_grid_rejected() {
        let f = zoo(SystemId::Bz, &BTreeMap::new()).unwrap();
        assert!(find_equilibria(&f, &SearchBox::cube(5.0), 1).is_err());
    }
}
