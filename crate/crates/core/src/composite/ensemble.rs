use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Named members with free weights; weights need not sum to one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    members: Vec<(String, f64)>,
}

impl EnsembleSpec {
    pub fn new(members: Vec<(String, f64)>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::Config("ensemble needs at least one member".into()));
        }
        if let Some((name, w)) = members.iter().find(|(_, w)| !w.is_finite()) {
            return Err(Error::Config(format!("weight {w} of member '{name}' is not finite")));
        }
        Ok(Self { members })
    }

    pub fn members(&self) -> &[(String, f64)] {
        &self.members
    }

    pub fn weights(&self) -> impl Iterator<Item = f64> + '_ {
        self.members.iter().map(|(_, w)| *w)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// `Σ weightᵢ · predᵢ`, without normalization.
pub fn ensemble_predict(spec: &EnsembleSpec, predictions: &[f64]) -> Result<f64> {
    if predictions.len() != spec.len() {
        return Err(Error::Shape(format!(
            "{} predictions for {} ensemble members",
            predictions.len(),
            spec.len()
        )));
    }
    Ok(spec.weights().zip(predictions).map(|(w, p)| w * p).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn spec(weights: &[f64]) -> EnsembleSpec {
        EnsembleSpec::new(weights.iter().enumerate().map(|(i, &w)| (format!("m{i}"), w)).collect()).unwrap()
    }

    #[test]
    fn published_weights_on_unit_predictions() {
        let got = ensemble_predict(&spec(&[0.5, 0.5, 0.12, 0.07]), &[1.0; 4]).unwrap();
        assert!((got - 1.19).abs() < 1e-15);
    }

    #[test]
    fn single_member_identity() {
        assert_eq!(ensemble_predict(&spec(&[1.0]), &[0.37]).unwrap(), 0.37);
    }

    #[test]
    fn invalid_specs() {
        assert!(EnsembleSpec::new(vec![]).is_err());
        assert!(EnsembleSpec::new(vec![("a".into(), f64::NAN)]).is_err());
        assert!(ensemble_predict(&spec(&[1.0, 1.0]), &[1.0]).is_err());
    }

    proptest! {
        #[test]
        fn linear_in_weights_and_predictions(
            w in prop::collection::vec(-2.0f64..2.0, 1..6),
            seed in prop::collection::vec(-3.0f64..3.0, 12),
            k in -4.0f64..4.0,
        ) {
            let n = w.len();
            let p = &seed[..n];
            let q = &seed[6..6 + n];
            let s = spec(&w);
            let base = ensemble_predict(&s, p).unwrap();
            let doubled: Vec<f64> = w.iter().map(|v| 2.0 * v).collect();
            prop_assert!((ensemble_predict(&spec(&doubled), p).unwrap() - 2.0 * base).abs() < 1e-12);
            let combo: Vec<f64> = p.iter().zip(q).map(|(a, b)| a + k * b).collect();
            let lhs = ensemble_predict(&s, &combo).unwrap();
            let rhs = base + k * ensemble_predict(&s, q).unwrap();
            prop_assert!((lhs - rhs).abs() < 1e-10);
        }
    }
}
