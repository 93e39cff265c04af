use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{BclError, Result};
use crate::numerics::{DenseMatrix, ParamStore};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.01,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

#[derive(Debug, Clone)]
struct Moments {
    m: DenseMatrix,
    v: DenseMatrix,
}

/// Bias-corrected Adam. Moments are created lazily on the first step.
#[derive(Debug, Clone)]
pub struct AdamState {
    config: AdamConfig,
    step: u64,
    moments: BTreeMap<String, Moments>,
}

impl AdamState {
    pub fn new(config: AdamConfig) -> Self {
        Self {
            config,
            step: 0,
            moments: BTreeMap::new(),
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    pub fn config(&self) -> &AdamConfig {
        &self.config
    }

    /// Applies one update to every parameter in name order, then zeroes the
    /// gradients.
    pub fn step(&mut self, params: &mut ParamStore) -> Result<()> {
        self.step += 1;
        let AdamConfig {
            learning_rate,
            beta1,
            beta2,
            epsilon,
        } = self.config;
        let t = self.step as i32;
        let bc1 = 1.0 - beta1.powi(t);
        let bc2 = 1.0 - beta2.powi(t);

        for (name, p) in params.iter_mut() {
            let mom = self.moments.entry(name.to_string()).or_insert_with(|| Moments {
                m: DenseMatrix::zeros(p.value.rows(), p.value.cols()),
                v: DenseMatrix::zeros(p.value.rows(), p.value.cols()),
            });
            if mom.m.shape() != p.value.shape() {
                return Err(BclError::dims(
                    format!("adam moments for {name}"),
                    format!("{:?}", mom.m.shape()),
                    format!("{:?}", p.value.shape()),
                ));
            }
            let g = p.grad.values();
            let m = mom.m.values_mut();
            for (mi, gi) in m.iter_mut().zip(g) {
                *mi = beta1 * *mi + (1.0 - beta1) * gi;
            }
            let v = mom.v.values_mut();
            for (vi, gi) in v.iter_mut().zip(g) {
                *vi = beta2 * *vi + (1.0 - beta2) * gi * gi;
            }
            let (m, v) = (mom.m.values(), mom.v.values());
            for ((w, mi), vi) in p.value.values_mut().iter_mut().zip(m).zip(v) {
                let m_hat = mi / bc1;
                let v_hat = vi / bc2;
                *w -= learning_rate * m_hat / (v_hat.sqrt() + epsilon);
            }
            p.grad.fill(0.0);
        }
        Ok(())
    }
}
