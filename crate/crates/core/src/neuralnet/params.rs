use ndarray::{ArrayD, ArrayView1, ArrayView2, ArrayViewMut1, ArrayViewMut2, IxDyn};

/// One named parameter array.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    pub name: String,
    pub value: ArrayD<f64>,
    pub trainable: bool,
}

/// Ordered set of named tensors. Gradients and optimizer moments use the
/// same layout.
#[derive(Debug, Clone, PartialEq)]
pub struct Parameters {
    tensors: Vec<Tensor>,
}

impl Parameters {
    pub(crate) fn new() -> Self {
        Self { tensors: Vec::new() }
    }

    pub(crate) fn push(&mut self, name: impl Into<String>, value: ArrayD<f64>, trainable: bool) -> usize {
        self.tensors.push(Tensor {
            name: name.into(),
            value,
            trainable,
        });
        self.tensors.len() - 1
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            tensors: self
                .tensors
                .iter()
                .map(|t| Tensor {
                    name: t.name.clone(),
                    value: ArrayD::zeros(t.value.raw_dim()),
                    trainable: t.trainable,
                })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Tensor> {
        self.tensors.iter()
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = &mut Tensor> {
        self.tensors.iter_mut()
    }

    pub fn get(&self, idx: usize) -> &Tensor {
        &self.tensors[idx]
    }

    pub fn get_mut(&mut self, idx: usize) -> &mut Tensor {
        &mut self.tensors[idx]
    }

    pub fn by_name(&self, name: &str) -> Option<&Tensor> {
        self.tensors.iter().find(|t| t.name == name)
    }

    /// Total number of scalar entries.
    pub fn count(&self) -> usize {
        self.tensors.iter().map(|t| t.value.len()).sum()
    }

    pub fn all_finite(&self) -> bool {
        self.tensors.iter().all(|t| t.value.iter().all(|x| x.is_finite()))
    }

    pub fn shapes(&self) -> Vec<(String, Vec<usize>)> {
        self.tensors
            .iter()
            .map(|t| (t.name.clone(), t.value.shape().to_vec()))
            .collect()
    }

    pub(crate) fn mat(&self, idx: usize) -> ArrayView2<'_, f64> {
        self.tensors[idx]
            .value
            .view()
            .into_dimensionality()
            .expect("parameter is 2-d")
    }

    pub(crate) fn vec(&self, idx: usize) -> ArrayView1<'_, f64> {
        self.tensors[idx]
            .value
            .view()
            .into_dimensionality()
            .expect("parameter is 1-d")
    }

    pub(crate) fn mat_mut(&mut self, idx: usize) -> ArrayViewMut2<'_, f64> {
        self.tensors[idx]
            .value
            .view_mut()
            .into_dimensionality()
            .expect("parameter is 2-d")
    }

    pub(crate) fn vec_mut(&mut self, idx: usize) -> ArrayViewMut1<'_, f64> {
        self.tensors[idx]
            .value
            .view_mut()
            .into_dimensionality()
            .expect("parameter is 1-d")
    }
}

pub(crate) fn zeros(shape: &[usize]) -> ArrayD<f64> {
    ArrayD::zeros(IxDyn(shape))
}
