//! The two L/R exchange algebras, their canonical structure-matrix
//! representations, and the coproducts that grow the quantum space.
//!
//! A pair `(L, R)` acting on (auxiliary leg, quantum leg) that satisfies
//! one of the two three-relation exchange algebras turns a representation
//! `T` into a new representation `L·T·R` on the enlarged quantum space;
//! the second algebra shifts `T`'s argument by the Cartan weights of the
//! pair's own quantum space. Folding pairs builds spin-chain-like
//! monodromy representations.

use std::sync::Arc;

use num_complex::Complex;

use crate::algebra::{LaxRep, StructureSet};
use crate::dynamical::{BaseFn, DynamicalOperator};
use crate::error::{Error, Result};
use crate::scalar::RealScalar;
use crate::tensor::{product, rel_residual, TensorOperator};

/// Hard cap on the exchange-check ambient dimension a chain may reach.
pub const CHAIN_DIM_GUARD: usize = 4096;

/// Which of the two L/R exchange algebras a pair represents.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairType {
    /// Undecorated relations; fusion composes `L·T·R` directly.
    TypeOne,
    /// Relations carrying the unindexed shift `λ + γh` on the pair's own
    /// quantum space; fusion shifts `T`'s argument by the quantum weights.
    TypeTwo,
}

/// Plain structure-matrix representation or its contragredient form.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairForm {
    Plain,
    Contragredient,
}

/// An L/R representation pair on (auxiliary leg, quantum leg), with the
/// Cartan weights of its quantum basis.
#[derive(Clone, Debug)]
pub struct LRPair<T: RealScalar> {
    pub pair_type: PairType,
    pub l: DynamicalOperator<T>,
    pub r: DynamicalOperator<T>,
    pub weights: Vec<Vec<i64>>,
}

fn standard_weights(n: usize) -> Vec<Vec<i64>> {
    (0..n)
        .map(|k| {
            let mut w = vec![0i64; n];
            w[k] = 1;
            w
        })
        .collect()
}

/// The four canonical representations by structure matrices on `H_q' = V`:
///
/// - type one, plain: `(L, R) = (A₁₂, B₁₂)`
/// - type one, contragredient: `((A₁₂⁻¹)^{t₂}, (B₁₂^{t₂})⁻¹)`
/// - type two, plain: `(C₁₂, D₁₂)`
/// - type two, contragredient: `((C₁₂^{t₂})⁻¹, (D₁₂⁻¹)^{t₂})`
///
/// Leg 2 is the quantum leg; its weights are the standard basis weights.
pub fn canonical_lr<T: RealScalar>(
    s: &StructureSet<T>,
    pair_type: PairType,
    form: PairForm,
) -> Result<LRPair<T>> {
    let n = s.n;
    let gamma = s.gamma;
    let (l, r) = match (pair_type, form) {
        (PairType::TypeOne, PairForm::Plain) => (s.a.clone(), s.b.clone()),
        (PairType::TypeOne, PairForm::Contragredient) => {
            let af = s.a.base_fn();
            let lf: BaseFn<T> = Arc::new(move |lam| af(lam)?.invert()?.partial_transpose(2));
            let bf = s.b.base_fn();
            let rf: BaseFn<T> = Arc::new(move |lam| bf(lam)?.partial_transpose(2)?.invert());
            (
                DynamicalOperator::new(n, gamma, vec![1, 2], lf)?,
                DynamicalOperator::new(n, gamma, vec![1, 2], rf)?,
            )
        }
        (PairType::TypeTwo, PairForm::Plain) => (s.c.clone(), s.d.clone()),
        (PairType::TypeTwo, PairForm::Contragredient) => {
            let cf = s.c.base_fn();
            let lf: BaseFn<T> = Arc::new(move |lam| cf(lam)?.partial_transpose(2)?.invert());
            let df = s.d.base_fn();
            let rf: BaseFn<T> = Arc::new(move |lam| df(lam)?.invert()?.partial_transpose(2));
            (
                DynamicalOperator::new(n, gamma, vec![1, 2], lf)?,
                DynamicalOperator::new(n, gamma, vec![1, 2], rf)?,
            )
        }
    };
    Ok(LRPair {
        pair_type,
        l,
        r,
        weights: standard_weights(n),
    })
}

/// The trivial pair `L = R = 1` (a type-one representation).
pub fn identity_pair<T: RealScalar>(n: usize, gamma: Complex<T>) -> Result<LRPair<T>> {
    let id = TensorOperator::identity(n, 2)?;
    Ok(LRPair {
        pair_type: PairType::TypeOne,
        l: DynamicalOperator::constant(n, gamma, vec![1, 2], id.clone())?,
        r: DynamicalOperator::constant(n, gamma, vec![1, 2], id)?,
        weights: standard_weights(n),
    })
}

/// Evaluate a two-leg operator with its argument shifted by the Cartan
/// weights of the basis of leg `wleg`: the realization of the unindexed
/// `λ + γh` of the second exchange algebra.
fn eval_weight_shifted<T: RealScalar>(
    op: &DynamicalOperator<T>,
    lambda: &[Complex<T>],
    ambient: usize,
    wleg: usize,
    weights: &[Vec<i64>],
) -> Result<TensorOperator<T>> {
    let n = op.n();
    let gamma = op.gamma();
    let mut out = TensorOperator::zeros(n, ambient)?;
    for (m, w) in weights.iter().enumerate() {
        let mut lam = lambda.to_vec();
        for (k, &wk) in w.iter().enumerate() {
            if wk != 0 {
                let f = T::from_i64(wk).expect("small weight");
                lam[k] = lam[k] + gamma * Complex::from(f);
            }
        }
        let base = op.base_at(&lam)?;
        out = out.add(&base.embed_fixed(op.support(), ambient, &[(wleg, m)])?)?;
    }
    Ok(out)
}

/// Residuals of the pair's three exchange relations on `V₁ ⊗ V₂ ⊗ H_q'`:
///
/// ```text
/// A₁₂ L₁ L₂              = L₂ L₁ A₁₂⟨λ+γh⟩
/// R₁ B₁₂ L₂(λ+γh₁)       = L₂ B₁₂⟨λ+γh⟩ R₁
/// D₁₂⟨λ+γh⟩ R₁ R₂(λ+γh₁) = R₂ R₁(λ+γh₂) D₁₂
/// ```
///
/// where the unindexed shift `⟨λ+γh⟩` acts on the pair's quantum leg for a
/// type-two pair and is absent for type one.
pub fn lr_residuals<T: RealScalar>(
    s: &StructureSet<T>,
    p: &LRPair<T>,
    lambda: &[Complex<T>],
) -> Result<[T; 3]> {
    let ambient = 3;
    let qleg = 3;
    let l1 = p.l.on_legs(vec![1, qleg])?;
    let l2 = p.l.on_legs(vec![2, qleg])?;
    let r1 = p.r.on_legs(vec![1, qleg])?;
    let r2 = p.r.on_legs(vec![2, qleg])?;
    let shifted = |m: &DynamicalOperator<T>| -> Result<TensorOperator<T>> {
        match p.pair_type {
            PairType::TypeOne => m.evaluate(lambda, ambient),
            PairType::TypeTwo => eval_weight_shifted(m, lambda, ambient, qleg, &p.weights),
        }
    };

    let rel1 = rel_residual(
        &product(&[
            &s.a.evaluate(lambda, ambient)?,
            &l1.evaluate(lambda, ambient)?,
            &l2.evaluate(lambda, ambient)?,
        ])?,
        &product(&[
            &l2.evaluate(lambda, ambient)?,
            &l1.evaluate(lambda, ambient)?,
            &shifted(&s.a)?,
        ])?,
    )?;

    let rel2 = rel_residual(
        &product(&[
            &r1.evaluate(lambda, ambient)?,
            &s.b.evaluate(lambda, ambient)?,
            &l2.shift(1)?.evaluate(lambda, ambient)?,
        ])?,
        &product(&[
            &l2.evaluate(lambda, ambient)?,
            &shifted(&s.b)?,
            &r1.evaluate(lambda, ambient)?,
        ])?,
    )?;

    let rel3 = rel_residual(
        &product(&[
            &shifted(&s.d)?,
            &r1.evaluate(lambda, ambient)?,
            &r2.shift(1)?.evaluate(lambda, ambient)?,
        ])?,
        &product(&[
            &r2.evaluate(lambda, ambient)?,
            &r1.shift(2)?.evaluate(lambda, ambient)?,
            &s.d.evaluate(lambda, ambient)?,
        ])?,
    )?;

    Ok([rel1, rel2, rel3])
}

/// Fuse a representation with an L/R pair: `T ↦ L·T·R` on
/// `H_q ⊗ H_q'`, with `T`'s argument weight-shifted for a type-two pair.
/// The combined quantum weights are the sums of the component weights.
pub fn fuse<T: RealScalar>(t: &LaxRep<T>, p: &LRPair<T>) -> Result<LaxRep<T>> {
    if t.n() != p.l.n() {
        return Err(Error::ShapeMismatch {
            n_left: t.n(),
            legs_left: 1,
            n_right: p.l.n(),
            legs_right: 2,
        });
    }
    let n = t.n();
    let ql = t.q_legs();
    let ambient = 2 + ql;
    let last = ambient;
    let t_support: Vec<usize> = std::iter::once(1).chain(2..2 + ql).collect();
    let gamma = p.l.gamma();
    let pair_type = p.pair_type;
    let l_fn = p.l.base_fn();
    let r_fn = p.r.base_fn();
    let t_fn = t.base_fn();
    let pair_weights = p.weights.clone();

    let ev: BaseFn<T> = Arc::new(move |lam| {
        let l_m = l_fn(lam)?.embed(&[1, last], ambient)?;
        let r_m = r_fn(lam)?.embed(&[1, last], ambient)?;
        let t_m = match pair_type {
            PairType::TypeOne => t_fn(lam)?.embed(&t_support, ambient)?,
            PairType::TypeTwo => {
                let mut acc = TensorOperator::zeros(n, ambient)?;
                for (m, w) in pair_weights.iter().enumerate() {
                    let mut shifted = lam.to_vec();
                    for (k, &wk) in w.iter().enumerate() {
                        if wk != 0 {
                            let f = T::from_i64(wk).expect("small weight");
                            shifted[k] = shifted[k] + gamma * Complex::from(f);
                        }
                    }
                    acc = acc.add(&t_fn(&shifted)?.embed_fixed(
                        &t_support,
                        ambient,
                        &[(last, m)],
                    )?)?;
                }
                acc
            }
        };
        product(&[&l_m, &t_m, &r_m])
    });

    let mut weights = Vec::with_capacity(t.quantum_dim() * n);
    for wq in t.weights() {
        for wp in &p.weights {
            weights.push(wq.iter().zip(wp.iter()).map(|(a, b)| a + b).collect());
        }
    }
    LaxRep::new(n, ql + 1, ev, weights)
}

/// Left fold of [`fuse`] over a pair list: the spin-chain-style monodromy
/// representation. Refuses chains whose exchange-check ambient dimension
/// `n^(2 + q_legs + len)` exceeds [`CHAIN_DIM_GUARD`].
pub fn chain<T: RealScalar>(t0: &LaxRep<T>, pairs: &[LRPair<T>]) -> Result<LaxRep<T>> {
    let n = t0.n();
    let legs = 2 + t0.q_legs() + pairs.len();
    let dim = n
        .checked_pow(legs as u32)
        .ok_or(Error::DimensionGuard {
            dim: usize::MAX,
            max: CHAIN_DIM_GUARD,
        })?;
    if dim > CHAIN_DIM_GUARD {
        return Err(Error::DimensionGuard {
            dim,
            max: CHAIN_DIM_GUARD,
        });
    }
    let mut acc = t0.clone();
    for p in pairs {
        acc = fuse(&acc, p)?;
    }
    Ok(acc)
}
