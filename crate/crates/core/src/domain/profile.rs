use std::fmt;
use std::sync::Arc;

use serde::ser::{Serialize, SerializeStruct, Serializer};

use crate::expr::Expr;
use crate::{Error, Result};

#[derive(Clone)]
enum Kind {
    Constant(f64),
    Expression(Expr),
    Tabulated { xs: Arc<[f64]>, ys: Arc<[f64]> },
}

/// A scalar coefficient `x ↦ c(x)` on `[-L, L]`.
///
/// Tabulated profiles are linearly interpolated and clamped outside their
/// abscissae.
#[derive(Clone)]
pub struct CoefficientProfile {
    kind: Kind,
}

impl CoefficientProfile {
    pub fn constant(value: f64) -> Self {
        Self {
            kind: Kind::Constant(value),
        }
    }

    pub fn expression(source: &str) -> Result<Self> {
        let e = Expr::parse(source)?;
        Ok(match e.as_constant() {
            Some(v) => Self::constant(v),
            None => Self {
                kind: Kind::Expression(e),
            },
        })
    }

    pub fn tabulated(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() || xs.len() < 2 {
            return Err(Error::Config(
                "tabulated profile needs at least two (x, value) pairs".into(),
            ));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Config(
                "tabulated profile abscissae must be strictly increasing".into(),
            ));
        }
        if xs.iter().chain(&ys).any(|v| !v.is_finite()) {
            return Err(Error::Config("tabulated profile has non-finite entries".into()));
        }
        Ok(Self {
            kind: Kind::Tabulated {
                xs: xs.into(),
                ys: ys.into(),
            },
        })
    }

    pub fn sample(&self, x: f64) -> f64 {
        match &self.kind {
            Kind::Constant(v) => *v,
            Kind::Expression(e) => e.eval(x),
            Kind::Tabulated { xs, ys } => {
                let n = xs.len();
                if x <= xs[0] {
                    return ys[0];
                }
                if x >= xs[n - 1] {
                    return ys[n - 1];
                }
                let k = xs.partition_point(|&v| v <= x).min(n - 1);
                let (x0, x1) = (xs[k - 1], xs[k]);
                let t = (x - x0) / (x1 - x0);
                ys[k - 1] * (1.0 - t) + ys[k] * t
            }
        }
    }

    pub fn sample_all(&self, xs: &[f64]) -> Vec<f64> {
        xs.iter().map(|&x| self.sample(x)).collect()
    }

    pub fn as_constant(&self) -> Option<f64> {
        match self.kind {
            Kind::Constant(v) => Some(v),
            _ => None,
        }
    }

    /// `x ↦ s · c(-x)`, returned as samples at `xs`.
    pub fn reflected_samples(&self, xs: &[f64], sign: f64) -> Vec<f64> {
        xs.iter().map(|&x| sign * self.sample(-x)).collect()
    }

    /// Checks that the profile is finite on `[-half_length, half_length]`
    /// (probed on a fine grid) and, if tabulated, that the table covers it.
    pub fn validate(&self, half_length: f64, name: &str) -> Result<()> {
        if let Kind::Tabulated { xs, .. } = &self.kind {
            let tol = 1e-12 * half_length;
            if xs[0] > -half_length + tol || xs[xs.len() - 1] < half_length - tol {
                return Err(Error::Config(format!(
                    "tabulated profile {name} does not cover [-{half_length}, {half_length}]"
                )));
            }
        }
        let probes = 1001;
        for k in 0..probes {
            let x = -half_length + 2.0 * half_length * k as f64 / (probes - 1) as f64;
            if !self.sample(x).is_finite() {
                return Err(Error::Config(format!(
                    "profile {name} is not finite at x = {x}"
                )));
            }
        }
        Ok(())
    }
}

impl fmt::Debug for CoefficientProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            Kind::Constant(v) => write!(f, "Constant({v})"),
            Kind::Expression(e) => write!(f, "Expression({e})"),
            Kind::Tabulated { xs, .. } => write!(f, "Tabulated({} points)", xs.len()),
        }
    }
}

impl Serialize for CoefficientProfile {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match &self.kind {
            Kind::Constant(v) => s.serialize_f64(*v),
            Kind::Expression(e) => s.serialize_str(e.source()),
            Kind::Tabulated { xs, ys } => {
                let mut st = s.serialize_struct("Tabulated", 2)?;
                st.serialize_field("x", &xs[..])?;
                st.serialize_field("value", &ys[..])?;
                st.end()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kinds() {
        assert_eq!(CoefficientProfile::constant(3.0).sample(0.7), 3.0);
        let e = CoefficientProfile::expression("1 + x^2").unwrap();
        assert_eq!(e.sample(2.0), 5.0);
        assert!(e.as_constant().is_none());
        assert_eq!(CoefficientProfile::expression("2*3").unwrap().as_constant(), Some(6.0));

        let t = CoefficientProfile::tabulated(vec![-1.0, 0.0, 1.0], vec![0.0, 2.0, 0.0]).unwrap();
        assert_eq!(t.sample(-0.5), 1.0);
        assert_eq!(t.sample(0.25), 1.5);
        assert_eq!(t.sample(5.0), 0.0);
        assert_eq!(t.sample(0.0), 2.0);
        assert_eq!(t.sample(1.0), 0.0);
    }

    #[test]
    fn validation() {
        let t = CoefficientProfile::tabulated(vec![-0.5, 1.0], vec![0.0, 1.0]).unwrap();
        assert!(t.validate(1.0, "lambda").is_err());
        assert!(t.validate(0.5, "lambda").is_ok());
        assert!(CoefficientProfile::tabulated(vec![0.0, 0.0], vec![1.0, 1.0]).is_err());
        let e = CoefficientProfile::expression("1/x").unwrap();
        assert!(e.validate(1.0, "lambda").is_err());
    }
}
