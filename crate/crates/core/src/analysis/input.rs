use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::propagator::{inverse_propagator, InversePropagator, ProcessKind, Propagator};
use crate::{Error, Result};

/// A ladder operator on mode `mode`: signal modes are `0..N`, idler modes `N..2N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LadderOp {
    pub mode: usize,
    pub creation: bool,
}

impl LadderOp {
    pub fn create(mode: usize) -> Self {
        Self { mode, creation: true }
    }

    pub fn annihilate(mode: usize) -> Self {
        Self { mode, creation: false }
    }
}

/// `coefficient · ops[0] ops[1] …`, in the written operator order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub coefficient: Complex64,
    pub ops: Vec<LadderOp>,
}

/// Rewrites `f(a†)` so that `U f(a†) U† = f'(a, a†)`, the operator that
/// prepares the output state from the propagated vacuum.
pub fn transform_nonvacuum_input(inverse: &InversePropagator, input: &[Term]) -> Result<Vec<Term>> {
    let dim = inverse.system.nrows();
    let n = dim / 2;
    let pdc = inverse.kind == ProcessKind::Pdc;
    // x = (a_s, a_i†) for down-conversion, so idler operators swap their dagger.
    let swaps = |mode: usize| pdc && mode >= n;

    let substitute = |op: LadderOp| -> Result<Vec<(Complex64, LadderOp)>> {
        if op.mode >= dim {
            return Err(Error::InvalidInput(format!("mode {} outside the {} propagated modes", op.mode, dim)));
        }
        let dagger = op.creation ^ swaps(op.mode);
        let row = inverse.system.row(op.mode);
        Ok(row
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != Complex64::new(0.0, 0.0))
            .map(|(k, &c)| {
                let coefficient = if dagger { c.conj() } else { c };
                (coefficient, LadderOp { mode: k, creation: dagger ^ swaps(k) })
            })
            .collect())
    };

    let mut out: BTreeMap<Vec<LadderOp>, Complex64> = BTreeMap::new();
    for term in input {
        let mut partial: Vec<(Complex64, Vec<LadderOp>)> = vec![(term.coefficient, Vec::new())];
        for &op in &term.ops {
            let replacement = substitute(op)?;
            partial = partial
                .into_iter()
                .flat_map(|(c, ops)| {
                    replacement.iter().map(move |&(r, new)| {
                        let mut ops = ops.clone();
                        ops.push(new);
                        (c * r, ops)
                    })
                })
                .collect();
        }
        for (c, ops) in partial {
            *out.entry(ops).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
    }
    Ok(out
        .into_iter()
        .filter(|(_, c)| *c != Complex64::new(0.0, 0.0))
        .map(|(ops, coefficient)| Term { coefficient, ops })
        .collect())
}

/// [`transform_nonvacuum_input`] through the backward propagator of `p`.
pub fn transform_through(p: &Propagator, input: &[Term]) -> Result<Vec<Term>> {
    transform_nonvacuum_input(&inverse_propagator(p)?, input)
}
