use serde::{Deserialize, Serialize};

use super::{NnError, ParameterBlock};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub m: ParameterBlock,
    pub v: ParameterBlock,
    pub t: u64,
    pub alpha: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamState {
    /// Moments for `params` with the usual defaults (0.001, 0.9, 0.999, 1e-8).
    pub fn new(params: &ParameterBlock) -> Self {
        Self::with_hyper(params, 1e-3, 0.9, 0.999, 1e-8)
    }

    pub fn with_hyper(
        params: &ParameterBlock,
        alpha: f64,
        beta1: f64,
        beta2: f64,
        epsilon: f64,
    ) -> Self {
        Self {
            m: ParameterBlock::zeros_like(params),
            v: ParameterBlock::zeros_like(params),
            t: 0,
            alpha,
            beta1,
            beta2,
            epsilon,
        }
    }
}

/// One bias-corrected Adam update of `params` in place.
pub fn adam_step(
    params: &mut ParameterBlock,
    grads: &ParameterBlock,
    state: &mut AdamState,
) -> Result<(), NnError> {
    if !params.same_shape(grads) || !params.same_shape(&state.m) {
        return Err(NnError::ShapeMismatch(
            "gradients or moments do not match parameters".into(),
        ));
    }
    if !grads.is_finite() {
        return Err(NnError::NonFiniteGradient);
    }
    state.t += 1;
    let t = state.t as i32;
    let bc1 = 1.0 - state.beta1.powi(t);
    let bc2 = 1.0 - state.beta2.powi(t);
    let (b1, b2, alpha, eps) = (state.beta1, state.beta2, state.alpha, state.epsilon);
    let tensors = params
        .tensors_mut()
        .zip(grads.tensors())
        .zip(state.m.tensors_mut().zip(state.v.tensors_mut()));
    for ((w, g), (m, v)) in tensors {
        let iter = w
            .as_mut_slice()
            .iter_mut()
            .zip(g.as_slice())
            .zip(m.as_mut_slice().iter_mut().zip(v.as_mut_slice()));
        for ((w, &g), (m, v)) in iter {
            *m = b1 * *m + (1.0 - b1) * g;
            *v = b2 * *v + (1.0 - b2) * g * g;
            let m_hat = *m / bc1;
            let v_hat = *v / bc2;
            *w -= alpha * m_hat / (v_hat.sqrt() + eps);
        }
    }
    params.bump();
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Matrix;

    fn scalar(w: f64) -> ParameterBlock {
        ParameterBlock {
            layers: vec![vec![Matrix::from_vec(1, 1, vec![w])]],
            version: 0,
        }
    }

    #[test]
    fn zero_gradient_leaves_params() {
        let mut p = scalar(1.5);
        let mut s = AdamState::new(&p);
        adam_step(&mut p, &scalar(0.0), &mut s).unwrap();
        assert_eq!(p.flatten(), vec![1.5]);
        assert_eq!(s.t, 1);
    }

    #[test]
    fn first_step_moves_by_alpha_sign() {
        for g in [3.7, -0.02] {
            let mut p = scalar(0.0);
            let mut s = AdamState::new(&p);
            adam_step(&mut p, &scalar(g), &mut s).unwrap();
            let step = p.flatten()[0];
            assert!(
                (step + 1e-3 * f64::signum(g)).abs() < 1e-8,
                "step {step} for g {g}"
            );
        }
    }

    #[test]
    fn quadratic_converges() {
        // f(w) = (w - 3)², f'(w) = 2(w - 3)
        let mut p = scalar(0.0);
        let mut s = AdamState::with_hyper(&p, 0.1, 0.9, 0.999, 1e-8);
        for _ in 0..200 {
            let w = p.flatten()[0];
            adam_step(&mut p, &scalar(2.0 * (w - 3.0)), &mut s).unwrap();
        }
        assert!((p.flatten()[0] - 3.0).abs() < 0.5);
    }

    #[test]
    fn nonfinite_gradient_rejected() {
        let mut p = scalar(0.0);
        let mut s = AdamState::new(&p);
        assert!(matches!(
            adam_step(&mut p, &scalar(f64::NAN), &mut s),
            Err(NnError::NonFiniteGradient)
        ));
        assert_eq!(s.t, 0);
    }
}
