//! The canonical ordered parameter vector of a mixture and masks over it.
//!
//! Order: mixing weights `pi_1 .. pi_{M-1}` (the last weight is implied),
//! then the parameters of component 1, component 2, and so on in the
//! per-family canonical ordering.

use crate::mixture::MixtureSpec;
use nalgebra::DVector;

/// One coordinate of the global parameter vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamId {
    /// Mixing weight `pi_j`, `j < M - 1`.
    Weight(usize),
    /// Parameter `idx` of component `comp`.
    Component { comp: usize, idx: usize },
}

/// Which parameters of a mixture are free to move during estimation.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamMask {
    pub weights_free: bool,
    /// Per component, per parameter index.
    pub component_free: Vec<Vec<bool>>,
}

impl ParamMask {
    pub fn all_free(spec: &MixtureSpec) -> Self {
        Self {
            weights_free: true,
            component_free: spec
                .components()
                .iter()
                .map(|c| vec![true; c.param_count()])
                .collect(),
        }
    }

    /// Frees exactly the listed component parameters, fixing the rest and the
    /// weights.
    pub fn only(spec: &MixtureSpec, free: &[(usize, usize)]) -> Self {
        let mut mask = Self {
            weights_free: false,
            component_free: spec
                .components()
                .iter()
                .map(|c| vec![false; c.param_count()])
                .collect(),
        };
        for &(comp, idx) in free {
            mask.component_free[comp][idx] = true;
        }
        mask
    }
}

/// An ordered list of active parameter coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamLayout {
    pub entries: Vec<ParamId>,
    m: usize,
}

impl ParamLayout {
    /// Layout over every parameter of the spec.
    pub fn full(spec: &MixtureSpec) -> Self {
        Self::masked(spec, &ParamMask::all_free(spec), true)
    }

    /// Layout over the mask's free parameters; `include_weights` additionally
    /// gates the weight coordinates (estimators whose objective carries no
    /// mixing weights drop them regardless of the mask).
    pub fn masked(spec: &MixtureSpec, mask: &ParamMask, include_weights: bool) -> Self {
        let m = spec.n_components();
        let mut entries = Vec::new();
        if include_weights && mask.weights_free {
            for j in 0..m - 1 {
                entries.push(ParamId::Weight(j));
            }
        }
        for (comp, c) in spec.components().iter().enumerate() {
            for idx in 0..c.param_count() {
                if mask.component_free[comp][idx] {
                    entries.push(ParamId::Component { comp, idx });
                }
            }
        }
        Self { entries, m }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Human-readable coordinate names in order.
    pub fn names(&self, spec: &MixtureSpec) -> Vec<String> {
        self.entries
            .iter()
            .map(|e| match e {
                ParamId::Weight(j) => format!("pi{}", j + 1),
                ParamId::Component { comp, idx } => {
                    format!("c{}.{}", comp + 1, spec.component(*comp).param_name(*idx))
                }
            })
            .collect()
    }

    /// Extracts the active coordinates of `spec` as a vector.
    pub fn pack(&self, spec: &MixtureSpec) -> DVector<f64> {
        DVector::from_fn(self.entries.len(), |i, _| match self.entries[i] {
            ParamId::Weight(j) => spec.weights()[j],
            ParamId::Component { comp, idx } => spec.component(comp).get_param(idx),
        })
    }

    /// Writes a coordinate vector back onto a copy of `base`. Weight entries
    /// rebalance the implied last weight so the total stays exactly one.
    pub fn unpack(&self, base: &MixtureSpec, v: &DVector<f64>) -> MixtureSpec {
        assert_eq!(v.len(), self.entries.len(), "layout/vector mismatch");
        let mut spec = base.clone();
        for (entry, &value) in self.entries.iter().zip(v.iter()) {
            match *entry {
                ParamId::Weight(j) => spec.weights_mut()[j] = value,
                ParamId::Component { comp, idx } => {
                    spec.components_mut()[comp].set_param(idx, value)
                }
            }
        }
        if self.entries.iter().any(|e| matches!(e, ParamId::Weight(_))) {
            let head: f64 = spec.weights()[..self.m - 1].iter().sum();
            spec.weights_mut()[self.m - 1] = 1.0 - head;
        }
        spec
    }
}
