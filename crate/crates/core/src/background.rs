//! Harmonic polynomial background potentials.
//!
//! A background `H` is a constant plus a finite sum of `α·Re zᵏ + β·Im zᵏ`
//! with `z = x₁ + i x₂`. Writing `H = Re f` for the entire function
//! `f(z) = c + Σ (α - iβ) zᵏ` gives exact values, gradients and conjugates.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::Vec2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarmonicTerm {
    pub degree: u32,
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct HarmonicPolynomial {
    constant: f64,
    terms: Vec<HarmonicTerm>,
}

impl HarmonicPolynomial {
    pub fn new(constant: f64, mut terms: Vec<HarmonicTerm>) -> Result<Self> {
        if !constant.is_finite() {
            return Err(Error::InvalidPolynomial(format!("constant {constant} is not finite")));
        }
        for term in &terms {
            if term.degree == 0 {
                return Err(Error::InvalidPolynomial(
                    "term degree must be at least 1; use the constant".into(),
                ));
            }
            if !(term.re.is_finite() && term.im.is_finite()) {
                return Err(Error::InvalidPolynomial(format!(
                    "non-finite coefficient in degree {} term",
                    term.degree
                )));
            }
        }
        terms.sort_by_key(|t| t.degree);
        if let Some(w) = terms.windows(2).find(|w| w[0].degree == w[1].degree) {
            return Err(Error::InvalidPolynomial(format!("degree {} repeated", w[0].degree)));
        }
        Ok(Self { constant, terms })
    }

    pub fn zero() -> Self {
        Self::default()
    }

    /// `H = x₁`.
    pub fn x1() -> Self {
        Self::linear(1.0, 0.0)
    }

    /// `H = x₂`.
    pub fn x2() -> Self {
        Self::linear(0.0, 1.0)
    }

    /// `H = g₁x₁ + g₂x₂`.
    pub fn linear(g1: f64, g2: f64) -> Self {
        Self {
            constant: 0.0,
            terms: vec![HarmonicTerm {
                degree: 1,
                re: g1,
                im: g2,
            }],
        }
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn terms(&self) -> &[HarmonicTerm] {
        &self.terms
    }

    pub fn degree(&self) -> u32 {
        self.terms.last().map_or(0, |t| t.degree)
    }

    fn coefficient(term: &HarmonicTerm) -> Complex64 {
        Complex64::new(term.re, -term.im)
    }

    pub fn eval(&self, x: Vec2) -> f64 {
        let z = Complex64::new(x.x, x.y);
        self.constant
            + self
                .terms
                .iter()
                .map(|t| (Self::coefficient(t) * z.powu(t.degree)).re)
                .sum::<f64>()
    }

    pub fn grad(&self, x: Vec2) -> Vec2 {
        let z = Complex64::new(x.x, x.y);
        let df: Complex64 = self
            .terms
            .iter()
            .map(|t| Self::coefficient(t) * f64::from(t.degree) * z.powu(t.degree - 1))
            .sum();
        Vec2::new(df.re, -df.im)
    }

    /// Harmonic conjugate `H̃` normalized so that `H̃ + iH` is analytic and
    /// `H̃(0) = 0`. Each term `α·Re zᵏ + β·Im zᵏ` maps to `β·Re zᵏ - α·Im zᵏ`,
    /// so `x₁ ↦ -x₂` and `x₂ ↦ x₁`, and `∇H̃ = -(∇H)^⊥`.
    pub fn conjugate(&self) -> Self {
        Self {
            constant: 0.0,
            terms: self
                .terms
                .iter()
                .map(|t| HarmonicTerm {
                    degree: t.degree,
                    re: t.im,
                    im: -t.re,
                })
                .collect(),
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            constant: self.constant * factor,
            terms: self
                .terms
                .iter()
                .map(|t| HarmonicTerm {
                    degree: t.degree,
                    re: t.re * factor,
                    im: t.im * factor,
                })
                .collect(),
        }
    }
}

impl std::fmt::Display for HarmonicPolynomial {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut parts = Vec::new();
        if self.constant != 0.0 {
            parts.push(format!("const:{}", self.constant));
        }
        for t in &self.terms {
            if t.re != 0.0 {
                parts.push(format!("re:{}:{}", t.degree, t.re));
            }
            if t.im != 0.0 {
                parts.push(format!("im:{}:{}", t.degree, t.im));
            }
        }
        write!(f, "{}", parts.join(", "))
    }
}
