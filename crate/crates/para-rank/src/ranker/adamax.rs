/// Adamax: Adam's infinity-norm variant. Per parameter,
/// `m = b1*m + (1-b1)*g`, `u = max(b2*u, |g|)`, and the update is
/// `theta -= lr/(1-b1^t) * m/(u + eps)`.
#[derive(Debug, Clone)]
pub struct Adamax {
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    step: u64,
    m: Vec<f64>,
    u: Vec<f64>,
}

impl Adamax {
    pub fn new(dim: usize, lr: f64, beta1: f64, beta2: f64, eps: f64) -> Self {
        Adamax {
            lr,
            beta1,
            beta2,
            eps,
            step: 0,
            m: vec![0.0; dim],
            u: vec![0.0; dim],
        }
    }

    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) {
        assert_eq!(params.len(), self.m.len());
        assert_eq!(grads.len(), self.m.len());
        self.step += 1;
        let bias = 1.0 - self.beta1.powi(self.step as i32);
        let rate = self.lr / bias;
        for i in 0..params.len() {
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * grads[i];
            self.u[i] = (self.beta2 * self.u[i]).max(grads[i].abs());
            params[i] -= rate * self.m[i] / (self.u[i] + self.eps);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_step_matches_hand_computation() {
        let mut opt = Adamax::new(2, 0.002, 0.9, 0.999, 1e-8);
        let mut params = vec![1.0, -1.0];
        let grads = vec![0.5, -0.25];
        opt.step(&mut params, &grads);
        // m = 0.1*g, u = |g|, bias = 0.1 -> update = 0.002 * g/(|g|+eps)
        let expect0 = 1.0 - 0.002 * (0.1 * 0.5) / 0.1 / (0.5 + 1e-8);
        let expect1 = -1.0 + 0.002 * (0.1 * 0.25) / 0.1 / (0.25 + 1e-8);
        assert!((params[0] - expect0).abs() < 1e-12);
        assert!((params[1] - expect1).abs() < 1e-12);
    }

    #[test]
    fn zero_learning_rate_never_moves_parameters() {
        let mut opt = Adamax::new(3, 0.0, 0.9, 0.999, 1e-8);
        let mut params = vec![0.3, -0.7, 2.0];
        let before = params.clone();
        for step in 0..10 {
            let grads = vec![1.0 + step as f64, -2.0, 0.5];
            opt.step(&mut params, &grads);
        }
        assert_eq!(params, before);
    }

    #[test]
    fn descends_a_simple_quadratic() {
        let mut opt = Adamax::new(1, 0.05, 0.9, 0.999, 1e-8);
        let mut params = vec![3.0];
        for _ in 0..500 {
            let grads = vec![2.0 * params[0]];
            opt.step(&mut params, &grads);
        }
        assert!(params[0].abs() < 0.05, "did not converge: {}", params[0]);
    }
}
