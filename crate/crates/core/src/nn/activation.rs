use super::Activation;
use crate::matrix::Matrix;

/// Max-shifted softmax.
pub fn softmax(z: &[f64]) -> Vec<f64> {
    let mut out = z.to_vec();
    softmax_in_place(&mut out);
    out
}

fn softmax_in_place(z: &mut [f64]) {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in z.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in z.iter_mut() {
        *v /= sum;
    }
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub(crate) fn apply(act: Activation, z: &mut Matrix) {
    match act {
        // `f64::max` would swallow NaN; keep it so divergence stays visible.
        Activation::Relu => z.as_mut_slice().iter_mut().for_each(|v| {
            if *v < 0.0 {
                *v = 0.0
            }
        }),
        Activation::Sigmoid => z.as_mut_slice().iter_mut().for_each(|v| *v = sigmoid(*v)),
        Activation::Tanh => z.as_mut_slice().iter_mut().for_each(|v| *v = v.tanh()),
        Activation::Linear => {}
        Activation::Softmax => {
            for r in 0..z.rows() {
                softmax_in_place(z.row_mut(r));
            }
        }
    }
}

/// Gradient with respect to the pre-activation given the activation output
/// `y` and the gradient `g` with respect to `y`.
pub(crate) fn backprop(act: Activation, y: &Matrix, g: &Matrix) -> Matrix {
    match act {
        Activation::Relu => Matrix::from_vec(
            y.rows(),
            y.cols(),
            y.as_slice()
                .iter()
                .zip(g.as_slice())
                .map(|(&y, &g)| if y > 0.0 { g } else { 0.0 })
                .collect(),
        ),
        Activation::Sigmoid => Matrix::from_vec(
            y.rows(),
            y.cols(),
            y.as_slice()
                .iter()
                .zip(g.as_slice())
                .map(|(&y, &g)| g * y * (1.0 - y))
                .collect(),
        ),
        Activation::Tanh => Matrix::from_vec(
            y.rows(),
            y.cols(),
            y.as_slice()
                .iter()
                .zip(g.as_slice())
                .map(|(&y, &g)| g * (1.0 - y * y))
                .collect(),
        ),
        Activation::Linear => g.clone(),
        Activation::Softmax => {
            let mut out = Matrix::zeros(y.rows(), y.cols());
            for r in 0..y.rows() {
                let (yr, gr) = (y.row(r), g.row(r));
                let dot: f64 = yr.iter().zip(gr).map(|(a, b)| a * b).sum();
                for (o, (&yi, &gi)) in out.row_mut(r).iter_mut().zip(yr.iter().zip(gr)) {
                    *o = yi * (gi - dot);
                }
            }
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_on_equal_logits() {
        assert_eq!(softmax(&[0.0; 4]), vec![0.25; 4]);
    }

    #[test]
    fn shift_invariant() {
        let z = [0.3, -1.2, 2.5];
        let shifted: Vec<f64> = z.iter().map(|v| v + 123.456).collect();
        for (a, b) in softmax(&z).iter().zip(softmax(&shifted)) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn large_logits_stay_finite() {
        let p = softmax(&[1000.0, 0.0]);
        assert!(p.iter().all(|v| v.is_finite()));
        assert!((p[0] - 1.0).abs() < 1e-12 && p[1] < 1e-12);
    }

    #[test]
    fn sigmoid_extremes() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!(sigmoid(-800.0).is_finite() && sigmoid(800.0) == 1.0);
    }
}
