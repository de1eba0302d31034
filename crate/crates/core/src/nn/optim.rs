use serde::{Deserialize, Serialize};

use super::graph::{Gradients, ParamStore};
use super::matrix::Matrix;

pub trait Optimizer {
    fn step(&mut self, params: &mut ParamStore, grads: &Gradients);
}

/// RMSProp: `v = decay*v + (1-decay)*g^2; p -= lr * g / (sqrt(v) + eps)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RmsProp {
    pub lr: f64,
    pub decay: f64,
    pub eps: f64,
    cache: Vec<Option<Matrix>>,
}

impl RmsProp {
    pub fn new(lr: f64) -> Self {
        RmsProp {
            lr,
            decay: 0.9,
            eps: 1e-8,
            cache: Vec::new(),
        }
    }
}

impl Optimizer for RmsProp {
    fn step(&mut self, params: &mut ParamStore, grads: &Gradients) {
        self.cache.resize(params.len(), None);
        for id in params.ids() {
            let Some(g) = grads.get(id) else { continue };
            let p = params.get_mut(id);
            let cache = self.cache[id].get_or_insert_with(|| Matrix::zeros(p.rows(), p.cols()));
            for ((w, v), &g) in p.data_mut().iter_mut().zip(cache.data_mut()).zip(g.data()) {
                *v = self.decay * *v + (1.0 - self.decay) * g * g;
                *w -= self.lr * g / (v.sqrt() + self.eps);
            }
        }
    }
}

/// Adam with bias correction.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    t: u64,
    m: Vec<Option<Matrix>>,
    v: Vec<Option<Matrix>>,
}

impl Adam {
    pub fn new(lr: f64) -> Self {
        Adam {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            t: 0,
            m: Vec::new(),
            v: Vec::new(),
        }
    }
}

impl Optimizer for Adam {
    fn step(&mut self, params: &mut ParamStore, grads: &Gradients) {
        self.m.resize(params.len(), None);
        self.v.resize(params.len(), None);
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.beta2.powi(self.t as i32);
        for id in params.ids() {
            let Some(g) = grads.get(id) else { continue };
            let p = params.get_mut(id);
            let (r, c) = p.shape();
            let m = self.m[id].get_or_insert_with(|| Matrix::zeros(r, c));
            let v = self.v[id].get_or_insert_with(|| Matrix::zeros(r, c));
            for (((w, m), v), &g) in p
                .data_mut()
                .iter_mut()
                .zip(m.data_mut())
                .zip(v.data_mut())
                .zip(g.data())
            {
                *m = self.beta1 * *m + (1.0 - self.beta1) * g;
                *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
                *w -= self.lr * (*m / bc1) / ((*v / bc2).sqrt() + self.eps);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::Graph;

    fn minimize(opt: &mut dyn Optimizer, steps: usize) -> f64 {
        let mut store = ParamStore::new();
        let x = store.add("x", Matrix::row_vector(vec![3.0, -2.0]));
        for _ in 0..steps {
            let grads = {
                let mut g = Graph::new(&store);
                let v = g.param(x);
                let sq = g.mul(v, v);
                let l = g.sum(sq);
                g.backward(l)
            };
            opt.step(&mut store, &grads);
        }
        store.get(x).max_abs()
    }

    #[test]
    fn rmsprop_first_step_magnitude() {
        // v = 0.1 g^2 on the first step, so each coordinate moves lr / sqrt(0.1).
        let mut store = ParamStore::new();
        let x = store.add("x", Matrix::row_vector(vec![1.0]));
        let grads = {
            let mut g = Graph::new(&store);
            let v = g.param(x);
            let l = g.sum(v);
            g.backward(l)
        };
        let mut opt = RmsProp::new(0.01);
        opt.step(&mut store, &grads);
        let expected = 1.0 - 0.01 / (0.1f64.sqrt() + 1e-8);
        assert!((store.get(x).data()[0] - expected).abs() < 1e-12);
    }

    #[test]
    fn optimizers_descend_a_quadratic() {
        assert!(minimize(&mut RmsProp::new(0.05), 400) < 0.1);
        assert!(minimize(&mut Adam::new(0.1), 400) < 0.1);
    }
}
