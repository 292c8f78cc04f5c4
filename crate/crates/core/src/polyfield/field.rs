use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::poly::{CompiledPoly, TriPolynomial};
use crate::linalg::{Mat3, Vec3};

/// A polynomial vector field `F = (F1, F2, F3)` on R³ with parameters
/// already substituted into the coefficients.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(into = "FieldRepr", from = "FieldRepr")]
pub struct PolyVectorField {
    pub name: String,
    pub parameters: BTreeMap<String, f64>,
    components: [TriPolynomial; 3],
    jac: [[TriPolynomial; 3]; 3],
    fast: [CompiledPoly; 3],
    fast_jac: [[CompiledPoly; 3]; 3],
    max_exp: usize,
}

#[derive(Serialize, Deserialize)]
struct FieldRepr {
    name: String,
    parameters: BTreeMap<String, f64>,
    components: [TriPolynomial; 3],
}

impl From<PolyVectorField> for FieldRepr {
    fn from(f: PolyVectorField) -> Self {
        FieldRepr { name: f.name, parameters: f.parameters, components: f.components }
    }
}

impl From<FieldRepr> for PolyVectorField {
    fn from(r: FieldRepr) -> Self {
        PolyVectorField::new(r.name, r.parameters, r.components)
    }
}

impl PartialEq for PolyVectorField {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.parameters == other.parameters && self.components == other.components
    }
}

impl PolyVectorField {
    pub fn new(name: impl Into<String>, parameters: BTreeMap<String, f64>, components: [TriPolynomial; 3]) -> Self {
        let jac: [[TriPolynomial; 3]; 3] =
            std::array::from_fn(|i| std::array::from_fn(|j| components[i].derivative(j)));
        let fast = std::array::from_fn(|i| components[i].compile());
        let fast_jac = std::array::from_fn(|i| std::array::from_fn(|j| jac[i][j].compile()));
        let max_exp = components
            .iter()
            .map(|c| c.compile().max_exp)
            .max()
            .unwrap_or(0);
        Self { name: name.into(), parameters, components, jac, fast, fast_jac, max_exp }
    }

    /// Field with the given components and no parameters.
    pub fn from_components(name: impl Into<String>, components: [TriPolynomial; 3]) -> Self {
        Self::new(name, BTreeMap::new(), components)
    }

    /// Linear field `F(s) = A s`.
    pub fn linear(name: impl Into<String>, a: &Mat3) -> Self {
        let comps = std::array::from_fn(|i| {
            (0..3).fold(TriPolynomial::zero(), |acc, j| &acc + &TriPolynomial::var(j).scale(a[(i, j)]))
        });
        Self::from_components(name, comps)
    }

    pub fn components(&self) -> &[TriPolynomial; 3] {
        &self.components
    }

    /// Component `F_{k+1}` (zero-based index).
    pub fn component(&self, k: usize) -> &TriPolynomial {
        &self.components[k]
    }

    pub fn degree(&self) -> u32 {
        self.components.iter().map(|c| c.degree()).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(|c| c.is_zero())
    }

    /// `-F`, the time-reversed field.
    pub fn negated(&self) -> Self {
        Self::new(
            format!("-{}", self.name),
            self.parameters.clone(),
            std::array::from_fn(|i| -&self.components[i]),
        )
    }

    fn power_tables(&self, s: &Vec3) -> Vec<[f64; 3]> {
        let mut pw = vec![[1.0; 3]; self.max_exp + 1];
        for n in 1..=self.max_exp {
            pw[n] = [pw[n - 1][0] * s.x, pw[n - 1][1] * s.y, pw[n - 1][2] * s.z];
        }
        pw
    }

    pub fn evaluate(&self, s: &Vec3) -> Vec3 {
        let pw = self.power_tables(s);
        Vec3::new(
            self.fast[0].eval_tables(&pw),
            self.fast[1].eval_tables(&pw),
            self.fast[2].eval_tables(&pw),
        )
    }

    /// Symbolic Jacobian: entry `(i, j)` is `∂F_i/∂s_j`.
    pub fn jacobian(&self) -> &[[TriPolynomial; 3]; 3] {
        &self.jac
    }

    pub fn jacobian_at(&self, s: &Vec3) -> Mat3 {
        let pw = self.power_tables(s);
        Mat3::from_fn(|i, j| self.fast_jac[i][j].eval_tables(&pw))
    }

    pub fn divergence(&self) -> TriPolynomial {
        &(&self.jac[0][0] + &self.jac[1][1]) + &self.jac[2][2]
    }

    /// `∇g · F`.
    pub fn lie_derivative(&self, g: &TriPolynomial) -> TriPolynomial {
        (0..3).fold(TriPolynomial::zero(), |acc, k| &acc + &(&g.derivative(k) * &self.components[k]))
    }

    /// `F(s) · s`.
    pub fn radial_polynomial(&self) -> TriPolynomial {
        (0..3).fold(TriPolynomial::zero(), |acc, k| &acc + &(&self.components[k] * &TriPolynomial::var(k)))
    }
}

impl fmt::Display for PolyVectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (name, value) in &self.parameters {
            writeln!(f, "param {name} = {value}")?;
        }
        writeln!(f, "dx = {}", self.components[0])?;
        writeln!(f, "dy = {}", self.components[1])?;
        write!(f, "dz = {}", self.components[2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyfield::{parse_system, zoo, SystemId};

    #[test]
    fn bz_on_x_axis() {
        let f = zoo(SystemId::Bz, &BTreeMap::new()).unwrap();
        let v = f.evaluate(&Vec3::new(1.0, 0.0, 0.0));
        assert_eq!(v, Vec3::new(0.0, 0.0, 2.0));
    }

    #[test]
    fn identity_jacobian() {
        let f = PolyVectorField::linear("id", &Mat3::identity());
        assert_eq!(f.jacobian_at(&Vec3::new(3.0, -1.0, 7.0)), Mat3::identity());
        assert_eq!(f.divergence(), TriPolynomial::constant(3.0));
    }

    #[test]
    fn lie_of_constant_vanishes() {
        let f = parse_system("dx=y\ndy=z\ndz=x^2").unwrap();
        assert!(f.lie_derivative(&TriPolynomial::constant(4.0)).is_zero());
    }

    #[test]
    fn display_roundtrips_with_params() {
        let mut p = BTreeMap::new();
        p.insert("c".to_string(), 0.7);
        let f = zoo(SystemId::Michelson, &p).unwrap();
        let g = parse_system(&f.to_string()).unwrap();
        assert_eq!(f.components(), g.components());
    }

    #[test]
    fn serde_roundtrip() {
        let f = zoo(SystemId::Bz, &BTreeMap::new()).unwrap();
        let json = serde_json::to_string(&f).unwrap();
        let g: PolyVectorField = serde_json::from_str(&json).unwrap();
        assert_eq!(f, g);
    }
}
