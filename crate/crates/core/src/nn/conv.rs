use super::tensor::{Scalar, Tensor};
use super::NnError;

/// 1-D convolution over `[length, channels]` input with stride 1 and zero
/// padding that preserves length. Weights are laid out `[kernel, in, filters]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Conv1d<T> {
    pub weight: Tensor<T>,
    pub bias: Tensor<T>,
}

pub struct Conv1dGrads<T> {
    pub input: Tensor<T>,
    pub weight: Tensor<T>,
    pub bias: Tensor<T>,
}

impl<T: Scalar> Conv1d<T> {
    pub fn new(weight: Tensor<T>, bias: Tensor<T>) -> Result<Self, NnError> {
        let ws = weight.shape();
        if ws.len() != 3 || ws[0] % 2 == 0 || bias.shape() != [ws[2]] {
            return Err(NnError::Shape(format!(
                "conv1d weight {:?} / bias {:?}",
                ws,
                bias.shape()
            )));
        }
        Ok(Self { weight, bias })
    }

    pub fn kernel(&self) -> usize {
        self.weight.shape()[0]
    }

    pub fn in_channels(&self) -> usize {
        self.weight.shape()[1]
    }

    pub fn filters(&self) -> usize {
        self.weight.shape()[2]
    }

    fn check_input(&self, x: &Tensor<T>) -> Result<(usize, usize), NnError> {
        match x.shape() {
            [l, c] if *c == self.in_channels() => Ok((*l, *c)),
            s => Err(NnError::Shape(format!(
                "conv1d expects [L, {}], got {s:?}",
                self.in_channels()
            ))),
        }
    }

    pub fn forward(&self, x: &Tensor<T>) -> Result<Tensor<T>, NnError> {
        let (len, cin) = self.check_input(x)?;
        let (k, f) = (self.kernel(), self.filters());
        let pad = k / 2;
        let w = self.weight.data();
        let xd = x.data();
        let mut out = Vec::with_capacity(len * f);
        for t in 0..len {
            out.extend_from_slice(self.bias.data());
            let row = &mut out[t * f..(t + 1) * f];
            for j in 0..k {
                let s = t + j;
                if s < pad || s - pad >= len {
                    continue;
                }
                let src = &xd[(s - pad) * cin..(s - pad + 1) * cin];
                for (c, &xv) in src.iter().enumerate() {
                    let wr = &w[(j * cin + c) * f..(j * cin + c + 1) * f];
                    for (o, &wv) in row.iter_mut().zip(wr) {
                        *o = *o + xv * wv;
                    }
                }
            }
        }
        Ok(Tensor::raw(vec![len, f], out))
    }

    /// Gradients given the forward input and the upstream gradient.
    pub fn backward(&self, x: &Tensor<T>, grad_out: &Tensor<T>) -> Result<Conv1dGrads<T>, NnError> {
        let (len, cin) = self.check_input(x)?;
        let (k, f) = (self.kernel(), self.filters());
        if grad_out.shape() != [len, f] {
            return Err(NnError::Shape(format!(
                "conv1d grad {:?}, expected [{len}, {f}]",
                grad_out.shape()
            )));
        }
        let pad = k / 2;
        let w = self.weight.data();
        let xd = x.data();
        let g = grad_out.data();
        let mut gw = vec![T::zero(); w.len()];
        let mut gb = vec![T::zero(); f];
        let mut gx = vec![T::zero(); xd.len()];
        for t in 0..len {
            let grow = &g[t * f..(t + 1) * f];
            for (b, &gv) in gb.iter_mut().zip(grow) {
                *b = *b + gv;
            }
            for j in 0..k {
                let s = t + j;
                if s < pad || s - pad >= len {
                    continue;
                }
                let si = s - pad;
                for c in 0..cin {
                    let base = (j * cin + c) * f;
                    let xv = xd[si * cin + c];
                    let mut acc = T::zero();
                    for ((gwv, &wv), &gv) in gw[base..base + f].iter_mut().zip(&w[base..base + f]).zip(grow) {
                        *gwv = *gwv + xv * gv;
                        acc = acc + wv * gv;
                    }
                    gx[si * cin + c] = gx[si * cin + c] + acc;
                }
            }
        }
        Ok(Conv1dGrads {
            input: Tensor::raw(vec![len, cin], gx),
            weight: Tensor::raw(self.weight.shape().to_vec(), gw),
            bias: Tensor::raw(vec![f], gb),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ones_conv(cin: usize, f: usize) -> Conv1d<f64> {
        Conv1d::new(Tensor::raw(vec![3, cin, f], vec![1.0; 3 * cin * f]), Tensor::zeros(&[f])).unwrap()
    }

    #[test]
    fn hand_convolution_with_zero_padding() {
        let conv = ones_conv(1, 1);
        let x = Tensor::raw(vec![4, 1], vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(conv.forward(&x).unwrap().data(), &[3.0, 6.0, 9.0, 7.0]);
    }

    #[test]
    fn zero_input_zero_bias() {
        let conv = ones_conv(2, 5);
        let y = conv.forward(&Tensor::zeros(&[6, 2])).unwrap();
        assert_eq!(y.shape(), &[6, 5]);
        assert!(y.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn channel_mismatch() {
        let conv = ones_conv(2, 1);
        assert!(conv.forward(&Tensor::zeros(&[4, 1])).is_err());
        let x = Tensor::zeros(&[4, 2]);
        assert!(conv.backward(&x, &Tensor::zeros(&[3, 1])).is_err());
    }

    #[test]
    fn zero_upstream_gives_zero_gradients() {
        let conv = ones_conv(2, 3);
        let x = Tensor::raw(vec![5, 2], (0..10).map(|v| v as f64).collect());
        let g = conv.backward(&x, &Tensor::zeros(&[5, 3])).unwrap();
        assert!(g.input.data().iter().chain(g.weight.data()).chain(g.bias.data()).all(|&v| v == 0.0));
    }
}
