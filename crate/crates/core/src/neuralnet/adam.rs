use ndarray::Zip;

use super::params::Parameters;
use crate::error::{Error, Result};

/// Optimizer hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

impl AdamConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.learning_rate > 0.0
            && self.learning_rate.is_finite()
            && (0.0..1.0).contains(&self.beta1)
            && (0.0..1.0).contains(&self.beta2)
            && self.epsilon > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid Adam settings {self:?}")))
        }
    }
}

/// Moment estimates laid out like the parameters they track.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub config: AdamConfig,
    pub m: Parameters,
    pub v: Parameters,
    pub t: u64,
}

impl AdamState {
    pub fn new(params: &Parameters, config: AdamConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config,
            m: params.zeros_like(),
            v: params.zeros_like(),
            t: 0,
        })
    }

    /// One bias-corrected update. Frozen tensors are left untouched.
    pub fn step(&mut self, params: &mut Parameters, grads: &Parameters) -> Result<()> {
        if params.shapes() != grads.shapes() || params.shapes() != self.m.shapes() {
            return Err(Error::Shape("gradient layout does not match the parameters".into()));
        }
        self.t += 1;
        let AdamConfig {
            learning_rate: lr,
            beta1: b1,
            beta2: b2,
            epsilon: eps,
        } = self.config;
        let c1 = 1.0 - b1.powi(self.t as i32);
        let c2 = 1.0 - b2.powi(self.t as i32);
        for (i, g) in grads.iter().enumerate() {
            if !params.get(i).trainable {
                continue;
            }
            let m = &mut self.m.get_mut(i).value;
            let v = &mut self.v.get_mut(i).value;
            let theta = &mut params.get_mut(i).value;
            Zip::from(theta).and(m).and(v).and(&g.value).for_each(|p, m, v, &g| {
                *m = b1 * *m + (1.0 - b1) * g;
                *v = b2 * *v + (1.0 - b2) * g * g;
                let m_hat = *m / c1;
                let v_hat = *v / c2;
                *p -= lr * m_hat / (v_hat.sqrt() + eps);
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{arr1, ArrayD};

    fn single(values: &[f64]) -> Parameters {
        let mut p = Parameters::new();
        p.push("x", arr1(values).into_dyn(), true);
        p
    }

    #[test]
    fn first_step_moves_by_lr_against_sign() {
        let mut p = single(&[1.0, 1.0, 1.0]);
        let g = single(&[3.0, -0.5, 1e3]);
        let mut adam = AdamState::new(&p, AdamConfig::default()).unwrap();
        adam.step(&mut p, &g).unwrap();
        let expected = [1.0 - 1e-3, 1.0 + 1e-3, 1.0 - 1e-3];
        for (a, e) in p.get(0).value.iter().zip(expected) {
            assert!((a - e).abs() < 1e-9, "{a} vs {e}");
        }
    }

    #[test]
    fn zero_gradient_only_advances_time() {
        let mut p = single(&[0.3, -0.2]);
        let before = p.clone();
        let g = p.zeros_like();
        let mut adam = AdamState::new(&p, AdamConfig::default()).unwrap();
        adam.step(&mut p, &g).unwrap();
        assert_eq!(p, before);
        assert_eq!(adam.t, 1);
    }

    #[test]
    fn frozen_tensors_do_not_move() {
        let mut p = Parameters::new();
        p.push("frozen", ArrayD::from_elem(ndarray::IxDyn(&[2]), 1.0), false);
        let before = p.clone();
        let mut g = p.zeros_like();
        g.get_mut(0).value.fill(5.0);
        let mut adam = AdamState::new(&p, AdamConfig::default()).unwrap();
        adam.step(&mut p, &g).unwrap();
        assert_eq!(p, before);
    }

    #[test]
    fn rejects_bad_config() {
        let p = single(&[0.0]);
        let cfg = AdamConfig {
            beta1: 1.0,
            ..AdamConfig::default()
        };
        assert!(AdamState::new(&p, cfg).is_err());
    }
}
