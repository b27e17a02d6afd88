use crate::error::{Error, Result};

/// Hyperparameters: Gamma shape/rate on the Poisson rates and symmetric
/// Dirichlet concentrations on the node and time mixing proportions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Priors {
    pub a: f64,
    pub b: f64,
    pub alpha: f64,
    pub gamma: f64,
}

impl Default for Priors {
    /// Unit Gamma mean and variance, uniform Dirichlet.
    fn default() -> Self {
        Priors {
            a: 1.0,
            b: 1.0,
            alpha: 1.0,
            gamma: 1.0,
        }
    }
}

impl Priors {
    pub fn new(a: f64, b: f64, alpha: f64, gamma: f64) -> Result<Self> {
        let p = Priors { a, b, alpha, gamma };
        p.validate()?;
        Ok(p)
    }

    /// Unit Gamma prior with Jeffreys (1/2) Dirichlet concentrations.
    pub fn jeffreys() -> Self {
        Priors {
            alpha: 0.5,
            gamma: 0.5,
            ..Priors::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = [self.a, self.b, self.alpha, self.gamma]
            .iter()
            .all(|v| v.is_finite() && *v > 0.0);
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidPriors)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(Priors::default().validate().is_ok());
        assert!(Priors::jeffreys().validate().is_ok());
        assert!(Priors::new(0.0, 1.0, 1.0, 1.0).is_err());
        assert!(Priors::new(1.0, f64::INFINITY, 1.0, 1.0).is_err());
        assert!(Priors::new(1.0, 1.0, f64::NAN, 1.0).is_err());
    }
}
