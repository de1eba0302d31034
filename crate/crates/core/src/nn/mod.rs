//! Minimal dense neural-network toolkit: matrices, a reverse-mode tape,
//! recurrent and affine layers, and the optimizers used for training.

mod graph;
mod layers;
mod matrix;
mod optim;

pub use graph::{Gradients, Graph, ParamId, ParamStore, Var};
pub use layers::{Linear, Lstm, LstmState};
pub use matrix::Matrix;
pub use optim::{Adam, Optimizer, RmsProp};

pub(crate) use graph::{sigmoid, softmax_in_place};
