use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::linalg::Vec3;

/// Largest total degree accepted for parsed input fields.
pub const MAX_DEGREE: u32 = 16;
/// Coefficients smaller than this in magnitude are dropped after arithmetic.
pub const COEFF_EPS: f64 = 1e-14;

pub type Exponents = [u32; 3];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub coefficient: f64,
    /// Powers of x, y, z.
    pub exponents: Exponents,
}

impl Monomial {
    pub fn degree(&self) -> u32 {
        self.exponents.iter().sum()
    }
}

/// Sparse polynomial in x, y, z kept in canonical form: one entry per
/// exponent triple, lexicographic order, no coefficient below [`COEFF_EPS`].
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(into = "Vec<Monomial>", from = "Vec<Monomial>")]
pub struct TriPolynomial {
    terms: BTreeMap<Exponents, f64>,
}

impl From<TriPolynomial> for Vec<Monomial> {
    fn from(p: TriPolynomial) -> Self {
        p.monomials().collect()
    }
}

impl From<Vec<Monomial>> for TriPolynomial {
    fn from(v: Vec<Monomial>) -> Self {
        TriPolynomial::from_monomials(v)
    }
}

impl TriPolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        Self::monomial(c, [0, 0, 0])
    }

    /// The coordinate polynomial `x`, `y` or `z` for `k = 0, 1, 2`.
    pub fn var(k: usize) -> Self {
        let mut e = [0; 3];
        e[k] = 1;
        Self::monomial(1.0, e)
    }

    pub fn monomial(c: f64, exponents: Exponents) -> Self {
        Self::from_monomials([Monomial { coefficient: c, exponents }])
    }

    /// Sums coefficients of repeated exponents and drops negligible terms.
    pub fn from_monomials(ms: impl IntoIterator<Item = Monomial>) -> Self {
        let mut terms: BTreeMap<Exponents, f64> = BTreeMap::new();
        for m in ms {
            *terms.entry(m.exponents).or_insert(0.0) += m.coefficient;
        }
        terms.retain(|_, c| c.abs() >= COEFF_EPS);
        Self { terms }
    }

    /// Re-canonicalizes the term list (a no-op on values built through this API).
    pub fn canonical(&self) -> Self {
        Self::from_monomials(self.monomials())
    }

    pub fn monomials(&self) -> impl Iterator<Item = Monomial> + '_ {
        self.terms
            .iter()
            .map(|(e, c)| Monomial { coefficient: *c, exponents: *e })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, e: Exponents) -> f64 {
        self.terms.get(&e).copied().unwrap_or(0.0)
    }

    /// Total degree; 0 for constants and for the zero polynomial.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    /// Constant value if the polynomial has no variable terms.
    pub fn as_constant(&self) -> Option<f64> {
        match self.terms.len() {
            0 => Some(0.0),
            1 => self.terms.get(&[0, 0, 0]).copied(),
            _ => None,
        }
    }

    pub fn scale(&self, k: f64) -> Self {
        Self::from_monomials(self.monomials().map(|m| Monomial { coefficient: m.coefficient * k, ..m }))
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::constant(1.0);
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Formal partial derivative with respect to variable `k`.
    pub fn derivative(&self, k: usize) -> Self {
        Self::from_monomials(self.monomials().filter(|m| m.exponents[k] > 0).map(|m| {
            let mut e = m.exponents;
            let p = e[k];
            e[k] -= 1;
            Monomial { coefficient: m.coefficient * p as f64, exponents: e }
        }))
    }

    pub fn gradient(&self) -> [TriPolynomial; 3] {
        [self.derivative(0), self.derivative(1), self.derivative(2)]
    }

    pub fn eval(&self, s: &Vec3) -> f64 {
        let mut acc = 0.0;
        for (e, c) in &self.terms {
            acc += c * s.x.powi(e[0] as i32) * s.y.powi(e[1] as i32) * s.z.powi(e[2] as i32);
        }
        acc
    }

    pub fn eval_gradient(&self, s: &Vec3) -> Vec3 {
        let g = self.gradient();
        Vec3::new(g[0].eval(s), g[1].eval(s), g[2].eval(s))
    }

    /// Homogeneous parts keyed by degree; zero parts are omitted.
    pub fn homogeneous_components(&self) -> BTreeMap<u32, TriPolynomial> {
        let mut out: BTreeMap<u32, Vec<Monomial>> = BTreeMap::new();
        for m in self.monomials() {
            out.entry(m.degree()).or_default().push(m);
        }
        out.into_iter()
            .map(|(d, ms)| (d, TriPolynomial::from_monomials(ms)))
            .collect()
    }

    pub fn is_homogeneous(&self, k: u32) -> bool {
        self.terms.keys().all(|e| e.iter().sum::<u32>() == k)
    }

    pub(crate) fn compile(&self) -> CompiledPoly {
        CompiledPoly {
            terms: self.terms.iter().map(|(e, c)| (*c, *e)).collect(),
            max_exp: self
                .terms
                .keys()
                .flat_map(|e| e.iter().copied())
                .max()
                .unwrap_or(0) as usize,
        }
    }
}

/// Flat term list for fast repeated evaluation.
#[derive(Clone, Debug, Default)]
pub(crate) struct CompiledPoly {
    terms: Vec<(f64, Exponents)>,
    pub(crate) max_exp: usize,
}

impl CompiledPoly {
    /// Evaluates with precomputed power tables `pw[k][n] = s_k^n`.
    #[inline]
    pub(crate) fn eval_tables(&self, pw: &[[f64; 3]]) -> f64 {
        let mut acc = 0.0;
        for (c, e) in &self.terms {
            acc += c * pw[e[0] as usize][0] * pw[e[1] as usize][1] * pw[e[2] as usize][2];
        }
        acc
    }
}

impl Add for &TriPolynomial {
    type Output = TriPolynomial;
    fn add(self, rhs: &TriPolynomial) -> TriPolynomial {
        TriPolynomial::from_monomials(self.monomials().chain(rhs.monomials()))
    }
}

impl Sub for &TriPolynomial {
    type Output = TriPolynomial;
    fn sub(self, rhs: &TriPolynomial) -> TriPolynomial {
        self + &(-rhs)
    }
}

impl Neg for &TriPolynomial {
    type Output = TriPolynomial;
    fn neg(self) -> TriPolynomial {
        self.scale(-1.0)
    }
}

impl Mul for &TriPolynomial {
    type Output = TriPolynomial;
    fn mul(self, rhs: &TriPolynomial) -> TriPolynomial {
        let mut out = Vec::with_capacity(self.len() * rhs.len());
        for a in self.monomials() {
            for b in rhs.monomials() {
                out.push(Monomial {
                    coefficient: a.coefficient * b.coefficient,
                    exponents: [
                        a.exponents[0] + b.exponents[0],
                        a.exponents[1] + b.exponents[1],
                        a.exponents[2] + b.exponents[2],
                    ],
                });
            }
        }
        TriPolynomial::from_monomials(out)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $f:ident) => {
        impl $tr for TriPolynomial {
            type Output = TriPolynomial;
            fn $f(self, rhs: TriPolynomial) -> TriPolynomial {
                (&self).$f(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for TriPolynomial {
    type Output = TriPolynomial;
    fn neg(self) -> TriPolynomial {
        -&self
    }
}

/// Prints in the system-definition grammar, highest exponent triple first.
/// Coefficients use Rust's shortest round-trip float formatting.
impl fmt::Display for TriPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, (e, c)) in self.terms.iter().rev().enumerate() {
            let neg = *c < 0.0;
            let mag = c.abs();
            match (n, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let vars: Vec<String> = ["x", "y", "z"]
                .iter()
                .zip(e.iter())
                .filter(|(_, &p)| p > 0)
                .map(|(v, &p)| if p == 1 { v.to_string() } else { format!("{v}^{p}") })
                .collect();
            if vars.is_empty() {
                write!(f, "{mag}")?;
            } else if mag == 1.0 {
                write!(f, "{}", vars.join("*"))?;
            } else {
                write!(f, "{mag}*{}", vars.join("*"))?;
            }
        }
        Ok(())
    }
}
