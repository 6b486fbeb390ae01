//! Univariate polynomials in a formal parameter `q` with exact rational coefficients.

use std::fmt;
use std::ops::{Add, Mul};

use num_traits::{One, Signed, Zero};

use crate::scalar::{format_rational, Rational};

/// `coeffs[k]` is the coefficient of `q^k`; trailing zeros are trimmed.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct QPoly {
    coeffs: Vec<Rational>,
}

impl QPoly {
    pub fn zero() -> Self {
        QPoly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        QPoly::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        QPoly::from_coeffs(vec![c])
    }

    /// The monomial `q^k`.
    pub fn monomial(k: usize) -> Self {
        let mut coeffs = vec![Rational::zero(); k + 1];
        coeffs[k] = Rational::one();
        QPoly { coeffs }
    }

    pub fn from_coeffs(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        QPoly { coeffs }
    }

    pub fn from_ints(coeffs: &[i64]) -> Self {
        QPoly::from_coeffs(coeffs.iter().map(|&c| Rational::from_integer(c.into())).collect())
    }

    /// `[k]_q = 1 + q + ... + q^{k-1}`.
    pub fn q_integer(k: usize) -> Self {
        QPoly::from_coeffs(vec![Rational::one(); k])
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Rational {
        self.coeffs.get(k).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Horner evaluation at an exact rational point.
    pub fn eval(&self, q: &Rational) -> Rational {
        self.coeffs
            .iter()
            .rev()
            .fold(Rational::zero(), |acc, c| acc * q + c)
    }

    pub fn as_constant(&self) -> Option<Rational> {
        match self.coeffs.len() {
            0 => Some(Rational::zero()),
            1 => Some(self.coeffs[0].clone()),
            _ => None,
        }
    }
}

impl Add for &QPoly {
    type Output = QPoly;
    fn add(self, o: &QPoly) -> QPoly {
        let len = self.coeffs.len().max(o.coeffs.len());
        QPoly::from_coeffs((0..len).map(|k| self.coeff(k) + o.coeff(k)).collect())
    }
}

impl Mul for &QPoly {
    type Output = QPoly;
    fn mul(self, o: &QPoly) -> QPoly {
        if self.is_zero() || o.is_zero() {
            return QPoly::zero();
        }
        let mut out = vec![Rational::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        QPoly::from_coeffs(out)
    }
}

impl fmt::Display for QPoly {
    /// Renders as `5 + 6*q + 3*q^2 + q^3`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else { "+" };
            if first {
                if c.is_negative() {
                    f.write_str("-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let abs = c.abs();
            let var = match k {
                0 => String::new(),
                1 => "q".to_string(),
                _ => format!("q^{k}"),
            };
            match (k, abs.is_one()) {
                (0, _) => f.write_str(&format_rational(&abs))?,
                (_, true) => f.write_str(&var)?,
                (_, false) => write!(f, "{}*{}", format_rational(&abs), var)?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    #[test]
    fn renders_like_the_cli() {
        assert_eq!(QPoly::from_ints(&[5, 6, 3, 1]).to_string(), "5 + 6*q + 3*q^2 + q^3");
        assert_eq!(QPoly::from_ints(&[0, -2, 0, 1]).to_string(), "-2*q + q^3");
        assert_eq!(QPoly::zero().to_string(), "0");
        assert_eq!(QPoly::from_ints(&[1]).to_string(), "1");
    }

    #[test]
    fn arithmetic_and_eval() {
        let a = QPoly::q_integer(3);
        let b = QPoly::from_ints(&[1, -1]);
        // (1 + q + q^2)(1 - q) = 1 - q^3
        assert_eq!(&a * &b, QPoly::from_ints(&[1, 0, 0, -1]));
        assert_eq!((&a + &b).to_string(), "2 + q^2");
        assert_eq!(a.eval(&rat(1, 2)), rat(7, 4));
        assert_eq!(QPoly::from_ints(&[0, 0]).degree(), None);
    }
}
