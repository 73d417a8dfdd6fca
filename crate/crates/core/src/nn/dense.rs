use super::tensor::{Scalar, Tensor};
use super::NnError;

/// Fully connected layer, `y = b + x W` with `W` laid out `[in, out]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense<T> {
    pub weight: Tensor<T>,
    pub bias: Tensor<T>,
}

pub struct DenseGrads<T> {
    pub input: Tensor<T>,
    pub weight: Tensor<T>,
    pub bias: Tensor<T>,
}

impl<T: Scalar> Dense<T> {
    pub fn new(weight: Tensor<T>, bias: Tensor<T>) -> Result<Self, NnError> {
        match weight.shape() {
            [_, o] if bias.shape() == [*o] => Ok(Self { weight, bias }),
            s => Err(NnError::Shape(format!("dense weight {s:?} / bias {:?}", bias.shape()))),
        }
    }

    pub fn in_features(&self) -> usize {
        self.weight.shape()[0]
    }

    pub fn out_features(&self) -> usize {
        self.weight.shape()[1]
    }

    fn check(&self, x: &Tensor<T>) -> Result<(), NnError> {
        if x.shape() != [self.in_features()] {
            return Err(NnError::Shape(format!(
                "dense expects [{}], got {:?}",
                self.in_features(),
                x.shape()
            )));
        }
        Ok(())
    }

    pub fn forward(&self, x: &Tensor<T>) -> Result<Tensor<T>, NnError> {
        self.check(x)?;
        let o = self.out_features();
        let w = self.weight.data();
        let mut y = self.bias.data().to_vec();
        for (i, &xv) in x.data().iter().enumerate() {
            for (yv, &wv) in y.iter_mut().zip(&w[i * o..(i + 1) * o]) {
                *yv = *yv + xv * wv;
            }
        }
        Ok(Tensor::raw(vec![o], y))
    }

    pub fn backward(&self, x: &Tensor<T>, grad_out: &Tensor<T>) -> Result<DenseGrads<T>, NnError> {
        self.check(x)?;
        let o = self.out_features();
        if grad_out.shape() != [o] {
            return Err(NnError::Shape(format!("dense grad {:?}, expected [{o}]", grad_out.shape())));
        }
        let w = self.weight.data();
        let g = grad_out.data();
        let mut gw = vec![T::zero(); w.len()];
        let mut gx = Vec::with_capacity(x.len());
        for (i, &xv) in x.data().iter().enumerate() {
            let mut acc = T::zero();
            for ((gwv, &wv), &gv) in gw[i * o..(i + 1) * o].iter_mut().zip(&w[i * o..(i + 1) * o]).zip(g) {
                *gwv = xv * gv;
                acc = acc + wv * gv;
            }
            gx.push(acc);
        }
        Ok(DenseGrads {
            input: Tensor::raw(vec![x.len()], gx),
            weight: Tensor::raw(self.weight.shape().to_vec(), gw),
            bias: grad_out.clone(),
        })
    }
}
