//! Adam with bias correction.

use ndarray::Array2;

use super::ModelParams;

#[derive(Debug, Clone, PartialEq)]
pub struct AdamHyper {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamHyper {
    pub fn with_lr(lr: f64) -> AdamHyper {
        AdamHyper { lr, ..AdamHyper::default() }
    }
}

impl Default for AdamHyper {
    fn default() -> AdamHyper {
        AdamHyper {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// First and second moment estimates per tensor, plus the step counter.
#[derive(Debug, Clone)]
pub struct AdamState {
    m: Vec<Array2<f64>>,
    v: Vec<Array2<f64>>,
    step: u64,
}

impl AdamState {
    pub fn new(params: &ModelParams) -> AdamState {
        let zeros: Vec<Array2<f64>> = params
            .tensors()
            .into_iter()
            .map(|(_, t)| Array2::zeros(t.dim()))
            .collect();
        AdamState {
            m: zeros.clone(),
            v: zeros,
            step: 0,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }
}

/// One Adam update over every tensor in `params`.
pub fn adam_step(
    params: &mut ModelParams,
    grads: &ModelParams,
    state: &mut AdamState,
    hp: &AdamHyper,
) {
    state.step += 1;
    let t = state.step as f64;
    let bias1 = 1.0 - hp.beta1.powf(t);
    let bias2 = 1.0 - hp.beta2.powf(t);

    let grad_tensors: Vec<&Array2<f64>> = grads.tensors().into_iter().map(|(_, g)| g).collect();
    for (ti, theta) in params.tensors_mut().into_iter().enumerate() {
        let g = grad_tensors[ti];
        let m = &mut state.m[ti];
        let v = &mut state.v[ti];
        ndarray::Zip::from(theta)
            .and(m)
            .and(v)
            .and(g)
            .for_each(|theta, m, v, &g| {
                *m = hp.beta1 * *m + (1.0 - hp.beta1) * g;
                *v = hp.beta2 * *v + (1.0 - hp.beta2) * g * g;
                let m_hat = *m / bias1;
                let v_hat = *v / bias2;
                *theta -= hp.lr * m_hat / (v_hat.sqrt() + hp.epsilon);
            });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    fn scalar_params(x: f64) -> ModelParams {
        ModelParams {
            w_embed: array![[x]],
            w_gcn: vec![array![[0.0]]],
            w_proj: array![[0.0]],
            b_proj: array![[0.0]],
        }
    }

    #[test]
    fn first_step_magnitude_is_close_to_lr() {
        // closed form: m_hat = g, v_hat = g^2, so the first step is
        // lr * g / (|g| + eps) = -lr for g = 1 (up to eps)
        let mut params = scalar_params(0.0);
        let grads = scalar_params(1.0);
        let mut state = AdamState::new(&params);
        let hp = AdamHyper::default();
        adam_step(&mut params, &grads, &mut state, &hp);
        assert_abs_diff_eq!(params.w_embed[(0, 0)], -hp.lr, epsilon = 1e-9);
        assert_eq!(state.step_count(), 1);
    }

    #[test]
    fn zero_gradient_leaves_parameters_unchanged() {
        let mut params = scalar_params(0.75);
        let grads = scalar_params(0.0);
        let mut state = AdamState::new(&params);
        adam_step(&mut params, &grads, &mut state, &AdamHyper::default());
        assert_eq!(params.w_embed[(0, 0)], 0.75);
    }

    #[test]
    fn trajectories_are_deterministic() {
        let run = || {
            let mut params = scalar_params(0.5);
            let mut state = AdamState::new(&params);
            let hp = AdamHyper::default();
            for k in 1..=25 {
                let grads = scalar_params((k as f64 * 0.37).sin());
                adam_step(&mut params, &grads, &mut state, &hp);
            }
            params.w_embed[(0, 0)]
        };
        assert_eq!(run().to_bits(), run().to_bits());
    }
}
