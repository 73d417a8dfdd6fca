use super::activation::sigmoid;
use super::tensor::{Scalar, Tensor};
use super::NnError;

/// Single-layer LSTM returning the final hidden state.
///
/// Gate blocks in every weight row are ordered input, forget, candidate,
/// output (`[i | f | g | o]`, each `hidden` wide).
/// `w_input` is `[in, 4H]`, `w_recurrent` is `[H, 4H]`, `bias` is `[4H]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Lstm<T> {
    pub w_input: Tensor<T>,
    pub w_recurrent: Tensor<T>,
    pub bias: Tensor<T>,
}

/// Per-step activations kept for backpropagation through time.
#[derive(Debug, Clone)]
pub struct LstmCache<T> {
    input: Tensor<T>,
    /// `[T, 4H]`, post-activation gate values.
    gates: Vec<T>,
    /// `[T + 1, H]`, cell states with `c_0 = 0` first.
    cells: Vec<T>,
    /// `[T, H]`, `tanh(c_t)`.
    tanh_cells: Vec<T>,
    /// `[T + 1, H]`, hidden states with `h_0 = 0` first.
    hidden: Vec<T>,
}

pub struct LstmGrads<T> {
    pub input: Tensor<T>,
    pub w_input: Tensor<T>,
    pub w_recurrent: Tensor<T>,
    pub bias: Tensor<T>,
}

impl<T: Scalar> Lstm<T> {
    pub fn new(w_input: Tensor<T>, w_recurrent: Tensor<T>, bias: Tensor<T>) -> Result<Self, NnError> {
        let ok = match (w_input.shape(), w_recurrent.shape(), bias.shape()) {
            ([_, g1], [h, g2], [g3]) => *g1 == 4 * h && g2 == g1 && g3 == g1,
            _ => false,
        };
        if !ok {
            return Err(NnError::Shape(format!(
                "lstm weights {:?} / {:?} / {:?}",
                w_input.shape(),
                w_recurrent.shape(),
                bias.shape()
            )));
        }
        Ok(Self { w_input, w_recurrent, bias })
    }

    pub fn hidden(&self) -> usize {
        self.w_recurrent.shape()[0]
    }

    pub fn in_features(&self) -> usize {
        self.w_input.shape()[0]
    }

    fn check(&self, x: &Tensor<T>) -> Result<usize, NnError> {
        match x.shape() {
            [0, _] => Err(NnError::Shape("lstm input has zero timesteps".into())),
            [t, c] if *c == self.in_features() => Ok(*t),
            s => Err(NnError::Shape(format!("lstm expects [T, {}], got {s:?}", self.in_features()))),
        }
    }

    pub fn forward(&self, x: &Tensor<T>) -> Result<Tensor<T>, NnError> {
        self.forward_cached(x).map(|(h, _)| h)
    }

    pub fn forward_cached(&self, x: &Tensor<T>) -> Result<(Tensor<T>, LstmCache<T>), NnError> {
        let steps = self.check(x)?;
        let h = self.hidden();
        let c_in = self.in_features();
        let g4 = 4 * h;
        let wx = self.w_input.data();
        let wh = self.w_recurrent.data();
        let xd = x.data();

        let mut gates = vec![T::zero(); steps * g4];
        let mut cells = vec![T::zero(); (steps + 1) * h];
        let mut tanh_cells = vec![T::zero(); steps * h];
        let mut hidden = vec![T::zero(); (steps + 1) * h];
        let mut z = vec![T::zero(); g4];

        for t in 0..steps {
            z.copy_from_slice(self.bias.data());
            for (c, &xv) in xd[t * c_in..(t + 1) * c_in].iter().enumerate() {
                for (zv, &wv) in z.iter_mut().zip(&wx[c * g4..(c + 1) * g4]) {
                    *zv = *zv + xv * wv;
                }
            }
            for k in 0..h {
                let hv = hidden[t * h + k];
                for (zv, &wv) in z.iter_mut().zip(&wh[k * g4..(k + 1) * g4]) {
                    *zv = *zv + hv * wv;
                }
            }
            let gt = &mut gates[t * g4..(t + 1) * g4];
            for k in 0..h {
                let i = sigmoid(z[k]);
                let f = sigmoid(z[h + k]);
                let g = z[2 * h + k].tanh();
                let o = sigmoid(z[3 * h + k]);
                gt[k] = i;
                gt[h + k] = f;
                gt[2 * h + k] = g;
                gt[3 * h + k] = o;
                let c = f * cells[t * h + k] + i * g;
                let tc = c.tanh();
                cells[(t + 1) * h + k] = c;
                tanh_cells[t * h + k] = tc;
                hidden[(t + 1) * h + k] = o * tc;
            }
        }
        let out = Tensor::raw(vec![h], hidden[steps * h..].to_vec());
        Ok((out, LstmCache { input: x.clone(), gates, cells, tanh_cells, hidden }))
    }

    /// Backpropagation through time from the gradient of the final hidden
    /// state.
    pub fn backward(&self, cache: &LstmCache<T>, grad_h: &Tensor<T>) -> Result<LstmGrads<T>, NnError> {
        let steps = self.check(&cache.input)?;
        let h = self.hidden();
        if grad_h.shape() != [h] {
            return Err(NnError::Shape(format!("lstm grad {:?}, expected [{h}]", grad_h.shape())));
        }
        if cache.gates.len() != steps * 4 * h || cache.hidden.len() != (steps + 1) * h {
            return Err(NnError::Cache("lstm cache does not match layer".into()));
        }
        let c_in = self.in_features();
        let g4 = 4 * h;
        let wx = self.w_input.data();
        let wh = self.w_recurrent.data();
        let xd = cache.input.data();

        let mut gwx = vec![T::zero(); wx.len()];
        let mut gwh = vec![T::zero(); wh.len()];
        let mut gb = vec![T::zero(); g4];
        let mut gx = vec![T::zero(); xd.len()];
        let mut dh = grad_h.data().to_vec();
        let mut dc_next = vec![T::zero(); h];
        let mut dz = vec![T::zero(); g4];
        let one = T::one();

        for t in (0..steps).rev() {
            let gt = &cache.gates[t * g4..(t + 1) * g4];
            for k in 0..h {
                let (i, f, g, o) = (gt[k], gt[h + k], gt[2 * h + k], gt[3 * h + k]);
                let tc = cache.tanh_cells[t * h + k];
                let c_prev = cache.cells[t * h + k];
                let d_o = dh[k] * tc;
                let dc = dc_next[k] + dh[k] * o * (one - tc * tc);
                dz[k] = dc * g * i * (one - i);
                dz[h + k] = dc * c_prev * f * (one - f);
                dz[2 * h + k] = dc * i * (one - g * g);
                dz[3 * h + k] = d_o * o * (one - o);
                dc_next[k] = dc * f;
            }
            for (b, &d) in gb.iter_mut().zip(&dz) {
                *b = *b + d;
            }
            for c in 0..c_in {
                let xv = xd[t * c_in + c];
                let mut acc = T::zero();
                for ((gw, &w), &d) in gwx[c * g4..(c + 1) * g4].iter_mut().zip(&wx[c * g4..(c + 1) * g4]).zip(&dz) {
                    *gw = *gw + xv * d;
                    acc = acc + w * d;
                }
                gx[t * c_in + c] = acc;
            }
            for k in 0..h {
                let hv = cache.hidden[t * h + k];
                let mut acc = T::zero();
                for ((gw, &w), &d) in gwh[k * g4..(k + 1) * g4].iter_mut().zip(&wh[k * g4..(k + 1) * g4]).zip(&dz) {
                    *gw = *gw + hv * d;
                    acc = acc + w * d;
                }
                dh[k] = acc;
            }
        }
        Ok(LstmGrads {
            input: Tensor::raw(cache.input.shape().to_vec(), gx),
            w_input: Tensor::raw(self.w_input.shape().to_vec(), gwx),
            w_recurrent: Tensor::raw(self.w_recurrent.shape().to_vec(), gwh),
            bias: Tensor::raw(vec![g4], gb),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_lstm(wx: [f64; 4], wh: [f64; 4], b: [f64; 4]) -> Lstm<f64> {
        Lstm::new(
            Tensor::raw(vec![1, 4], wx.to_vec()),
            Tensor::raw(vec![1, 4], wh.to_vec()),
            Tensor::raw(vec![4], b.to_vec()),
        )
        .unwrap()
    }

    #[test]
    fn zero_weights_give_zero_state() {
        let l = Lstm::<f64>::new(Tensor::zeros(&[3, 8]), Tensor::zeros(&[2, 8]), Tensor::zeros(&[8])).unwrap();
        let x = Tensor::raw(vec![4, 3], (0..12).map(|v| v as f64 - 5.0).collect());
        assert!(l.forward(&x).unwrap().data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn single_step_hand_evaluation() {
        let l = scalar_lstm([0.5, -0.3, 0.8, 0.2], [0.0; 4], [0.1, 0.2, -0.1, 0.05]);
        let x = 2.0;
        let s = |z: f64| 1.0 / (1.0 + (-z).exp());
        let i = s(0.5 * x + 0.1);
        let g = (0.8 * x - 0.1f64).tanh();
        let o = s(0.2 * x + 0.05);
        let expected = o * (i * g).tanh();
        let h = l.forward(&Tensor::raw(vec![1, 1], vec![x])).unwrap();
        assert!((h.data()[0] - expected).abs() < 1e-15);
    }

    #[test]
    fn zero_timesteps_rejected() {
        let l = scalar_lstm([0.0; 4], [0.0; 4], [0.0; 4]);
        let empty = Tensor::raw(vec![0, 1], vec![]);
        assert!(l.forward(&empty).is_err());
    }

    #[test]
    fn zero_upstream_zero_gradients() {
        let l = scalar_lstm([0.5, -0.3, 0.8, 0.2], [0.1, 0.4, -0.2, 0.3], [0.0; 4]);
        let x = Tensor::raw(vec![3, 1], vec![1.0, -2.0, 0.5]);
        let (_, cache) = l.forward_cached(&x).unwrap();
        let g = l.backward(&cache, &Tensor::zeros(&[1])).unwrap();
        for t in [&g.input, &g.w_input, &g.w_recurrent, &g.bias] {
            assert!(t.data().iter().all(|&v| v == 0.0));
        }
    }
}
