use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{check_len, Error, Result};
use crate::numkit::Parameters;

/// Fully connected network with `tanh` hidden layers and an identity output.
///
/// Parameters live in one flat buffer. Layer `k` occupies a
/// `sizes[k + 1] x sizes[k]` row-major weight block followed by its bias.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpParams {
    sizes: Vec<usize>,
    params: Vec<f64>,
    offsets: Vec<usize>,
}

/// Gradient with the same flat layout as [`MlpParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct MlpGrad {
    pub params: Vec<f64>,
    pub input: Vec<f64>,
}

fn layer_offsets(sizes: &[usize]) -> Vec<usize> {
    let mut offsets = Vec::with_capacity(sizes.len());
    let mut acc = 0;
    offsets.push(0);
    for w in sizes.windows(2) {
        acc += w[1] * w[0] + w[1];
        offsets.push(acc);
    }
    offsets
}

impl MlpParams {
    /// All-zero network with the given layer sizes (input first, output last).
    pub fn zeros(sizes: &[usize]) -> Result<Self> {
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(Error::Config(alloc::format!(
                "layer sizes must have at least two positive entries, got {sizes:?}"
            )));
        }
        let offsets = layer_offsets(sizes);
        let total = *offsets.last().unwrap_or(&0);
        Ok(Self {
            sizes: sizes.to_vec(),
            params: vec![0.0; total],
            offsets,
        })
    }

    /// Glorot-uniform weights, zero biases.
    pub fn glorot<R: Rng + ?Sized>(sizes: &[usize], rng: &mut R) -> Result<Self> {
        let mut net = Self::zeros(sizes)?;
        for k in 0..net.num_layers() {
            let (fan_in, fan_out) = (net.sizes[k], net.sizes[k + 1]);
            let limit = libm::sqrt(6.0 / (fan_in + fan_out) as f64);
            for w in net.weights_mut(k) {
                *w = rng.random_range(-limit..limit);
            }
        }
        Ok(net)
    }

    /// Builds a network from explicit per-layer weights and biases.
    pub fn from_layers(sizes: &[usize], weights: &[Vec<f64>], biases: &[Vec<f64>]) -> Result<Self> {
        let mut net = Self::zeros(sizes)?;
        check_len("layer weights", net.num_layers(), weights.len())?;
        check_len("layer biases", net.num_layers(), biases.len())?;
        for k in 0..net.num_layers() {
            net.weights_mut(k).copy_from_slice(checked(&weights[k], sizes[k + 1] * sizes[k])?);
            net.bias_mut(k).copy_from_slice(checked(&biases[k], sizes[k + 1])?);
        }
        Ok(net)
    }

    /// Rebuilds a network from its flat parameter vector.
    pub fn from_flat(sizes: &[usize], params: Vec<f64>) -> Result<Self> {
        let mut net = Self::zeros(sizes)?;
        check_len("flat parameters", net.params.len(), params.len())?;
        if params.iter().any(|v| !v.is_finite()) {
            return Err(Error::Input("network parameters must be finite".into()));
        }
        net.params = params;
        Ok(net)
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn num_layers(&self) -> usize {
        self.sizes.len() - 1
    }

    pub fn input_len(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_len(&self) -> usize {
        self.sizes[self.sizes.len() - 1]
    }

    pub fn flat(&self) -> &[f64] {
        &self.params
    }

    pub fn flat_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn weights(&self, layer: usize) -> &[f64] {
        let start = self.offsets[layer];
        &self.params[start..start + self.sizes[layer + 1] * self.sizes[layer]]
    }

    pub fn weights_mut(&mut self, layer: usize) -> &mut [f64] {
        let start = self.offsets[layer];
        let len = self.sizes[layer + 1] * self.sizes[layer];
        &mut self.params[start..start + len]
    }

    pub fn bias(&self, layer: usize) -> &[f64] {
        let start = self.offsets[layer] + self.sizes[layer + 1] * self.sizes[layer];
        &self.params[start..self.offsets[layer + 1]]
    }

    pub fn bias_mut(&mut self, layer: usize) -> &mut [f64] {
        let start = self.offsets[layer] + self.sizes[layer + 1] * self.sizes[layer];
        let end = self.offsets[layer + 1];
        &mut self.params[start..end]
    }

    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        let mut acts = self.activations(input)?;
        Ok(acts.pop().unwrap_or_default())
    }

    /// Layer outputs, input included as element 0.
    fn activations(&self, input: &[f64]) -> Result<Vec<Vec<f64>>> {
        check_len("mlp input", self.input_len(), input.len())?;
        let last = self.num_layers() - 1;
        let mut acts: Vec<Vec<f64>> = Vec::with_capacity(self.sizes.len());
        acts.push(input.to_vec());
        for k in 0..self.num_layers() {
            let (n_in, n_out) = (self.sizes[k], self.sizes[k + 1]);
            let w = self.weights(k);
            let b = self.bias(k);
            let x = &acts[k];
            let mut out = Vec::with_capacity(n_out);
            for r in 0..n_out {
                let row = &w[r * n_in..(r + 1) * n_in];
                let z = b[r] + row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
                out.push(if k == last { z } else { libm::tanh(z) });
            }
            acts.push(out);
        }
        Ok(acts)
    }

    /// Reverse-mode gradient of `upstream . forward(input)` with respect to every
    /// parameter and to the input.
    pub fn grad(&self, input: &[f64], upstream: &[f64]) -> Result<MlpGrad> {
        check_len("mlp upstream", self.output_len(), upstream.len())?;
        let acts = self.activations(input)?;
        let mut grad = vec![0.0; self.params.len()];
        let mut g = upstream.to_vec();
        for k in (0..self.num_layers()).rev() {
            let (n_in, n_out) = (self.sizes[k], self.sizes[k + 1]);
            let x = &acts[k];
            let start = self.offsets[k];
            let (gw, gb) = grad[start..self.offsets[k + 1]].split_at_mut(n_out * n_in);
            for r in 0..n_out {
                let gr = g[r];
                gb[r] = gr;
                if gr != 0.0 {
                    for (dst, xi) in gw[r * n_in..(r + 1) * n_in].iter_mut().zip(x) {
                        *dst = gr * xi;
                    }
                }
            }
            let w = self.weights(k);
            let mut g_in = vec![0.0; n_in];
            for r in 0..n_out {
                let gr = g[r];
                if gr == 0.0 {
                    continue;
                }
                for (dst, wi) in g_in.iter_mut().zip(&w[r * n_in..(r + 1) * n_in]) {
                    *dst += gr * wi;
                }
            }
            if k > 0 {
                // x is the tanh output of the previous layer
                for (gi, xi) in g_in.iter_mut().zip(x) {
                    *gi *= 1.0 - xi * xi;
                }
            }
            g = g_in;
        }
        Ok(MlpGrad {
            params: grad,
            input: g,
        })
    }
}

fn checked(values: &[f64], expected: usize) -> Result<&[f64]> {
    check_len("layer shape", expected, values.len())?;
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Input("network parameters must be finite".into()));
    }
    Ok(values)
}

impl Parameters for MlpParams {
    fn for_each_slice(&self, f: &mut dyn FnMut(&[f64])) {
        f(&self.params);
    }

    fn for_each_slice_mut(&mut self, f: &mut dyn FnMut(&mut [f64])) {
        f(&mut self.params);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Straight-line evaluator for a net with two hidden layers, written
    /// independently of the flat-buffer indexing above.
    fn reference_two_hidden(
        w: &[Vec<Vec<f64>>; 3],
        b: &[Vec<f64>; 3],
        x: &[f64],
    ) -> Vec<f64> {
        let affine = |w: &Vec<Vec<f64>>, b: &Vec<f64>, x: &[f64]| -> Vec<f64> {
            w.iter()
                .zip(b)
                .map(|(row, bi)| {
                    let mut s = *bi;
                    for j in 0..row.len() {
                        s += row[j] * x[j];
                    }
                    s
                })
                .collect()
        };
        let h1: Vec<f64> = affine(&w[0], &b[0], x).into_iter().map(f64::tanh).collect();
        let h2: Vec<f64> = affine(&w[1], &b[1], &h1).into_iter().map(f64::tanh).collect();
        affine(&w[2], &b[2], &h2)
    }

    #[test]
    fn zero_weights_return_bias() {
        let net = MlpParams::from_layers(&[3, 2], &[vec![0.0; 6]], &[vec![0.5, -1.5]]).unwrap();
        assert_eq!(net.forward(&[1.0, 2.0, 3.0]).unwrap(), vec![0.5, -1.5]);
    }

    #[test]
    fn single_affine_layer() {
        let net = MlpParams::from_layers(&[1, 1], &[vec![2.0]], &[vec![1.0]]).unwrap();
        assert_eq!(net.forward(&[3.0]).unwrap(), vec![7.0]);
    }

    #[test]
    fn matches_straight_line_evaluator() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let sizes = [4, 5, 3, 2];
        let mut w: [Vec<Vec<f64>>; 3] = Default::default();
        let mut b: [Vec<f64>; 3] = Default::default();
        for k in 0..3 {
            w[k] = (0..sizes[k + 1])
                .map(|_| (0..sizes[k]).map(|_| rng.random_range(-1.0..1.0)).collect())
                .collect();
            b[k] = (0..sizes[k + 1]).map(|_| rng.random_range(-1.0..1.0)).collect();
        }
        let flat_w: Vec<Vec<f64>> = w.iter().map(|m| m.concat()).collect();
        let net = MlpParams::from_layers(&sizes, &flat_w, &b).unwrap();
        for _ in 0..5 {
            let x: Vec<f64> = (0..4).map(|_| rng.random_range(-2.0..2.0)).collect();
            let got = net.forward(&x).unwrap();
            let want = reference_two_hidden(&w, &b, &x);
            for (g, e) in got.iter().zip(&want) {
                assert!((g - e).abs() < 1e-12, "{g} vs {e}");
            }
        }
    }

    #[test]
    fn zero_upstream_gives_zero_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let net = MlpParams::glorot(&[3, 4, 2], &mut rng).unwrap();
        let g = net.grad(&[0.1, 0.2, 0.3], &[0.0, 0.0]).unwrap();
        assert!(g.params.iter().all(|&v| v == 0.0));
        assert!(g.input.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn linear_layer_gradient_is_outer_product() {
        let net = MlpParams::from_layers(&[2, 2], &[vec![1.0, 2.0, 3.0, 4.0]], &[vec![0.0, 0.0]])
            .unwrap();
        let g = net.grad(&[5.0, 7.0], &[2.0, -1.0]).unwrap();
        assert_eq!(g.params, vec![10.0, 14.0, -5.0, -7.0, 2.0, -1.0]);
        assert_eq!(g.input, vec![2.0 * 1.0 - 3.0, 2.0 * 2.0 - 4.0]);
    }

    #[test]
    fn dimension_errors() {
        let net = MlpParams::zeros(&[2, 1]).unwrap();
        assert!(matches!(net.forward(&[1.0]), Err(Error::Dimension { .. })));
        assert!(matches!(net.grad(&[1.0, 2.0], &[1.0, 1.0]), Err(Error::Dimension { .. })));
        assert!(MlpParams::zeros(&[2]).is_err());
        assert!(MlpParams::zeros(&[2, 0]).is_err());
    }
}
