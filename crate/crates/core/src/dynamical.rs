//! λ-dependent operators with dynamical-shift semantics.
//!
//! A shift decoration `λ → λ + γ h_ℓ` on leg `ℓ` is resolved at evaluation
//! time as a finite projector sum: the Cartan generators are `h_i = E_ii`
//! in the defining representation, so the shifted operator equals
//! `Σ_k base(λ + γ ê_k) ⊗ P_k` with `P_k` the basis projector on leg `ℓ`.
//! No series truncation is ever involved.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::RealScalar;
use crate::tensor::{rel_residual, TensorOperator};

/// Evaluator of the undecorated operator at a dynamical parameter λ ∈ ℂⁿ.
pub type BaseFn<T> =
    Arc<dyn Fn(&[Complex<T>]) -> Result<TensorOperator<T>> + Send + Sync>;

/// A λ-dependent operator together with its support legs, coupling γ and
/// accumulated shift decorations.
#[derive(Clone)]
pub struct DynamicalOperator<T: RealScalar> {
    n: usize,
    gamma: Complex<T>,
    support: Vec<usize>,
    shifts: Vec<(usize, u32)>,
    base: BaseFn<T>,
}

impl<T: RealScalar> fmt::Debug for DynamicalOperator<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DynamicalOperator")
            .field("n", &self.n)
            .field("gamma", &self.gamma)
            .field("support", &self.support)
            .field("shifts", &self.shifts)
            .finish_non_exhaustive()
    }
}

impl<T: RealScalar> DynamicalOperator<T> {
    pub fn new(
        n: usize,
        gamma: Complex<T>,
        support: Vec<usize>,
        base: BaseFn<T>,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::Invalid("local dimension must be positive".into()));
        }
        if support.is_empty() {
            return Err(Error::Invalid("support must list at least one leg".into()));
        }
        let mut sorted = support.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != support.len() || sorted[0] == 0 {
            return Err(Error::Invalid(format!("bad support list {support:?}")));
        }
        Ok(Self {
            n,
            gamma,
            support,
            shifts: Vec::new(),
            base,
        })
    }

    /// A λ-independent operator.
    pub fn constant(n: usize, gamma: Complex<T>, support: Vec<usize>, value: TensorOperator<T>) -> Result<Self> {
        Self::new(n, gamma, support, Arc::new(move |_| Ok(value.clone())))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gamma(&self) -> Complex<T> {
        self.gamma
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn shifts(&self) -> &[(usize, u32)] {
        &self.shifts
    }

    /// Evaluate the undecorated base on its own support leg count.
    pub fn base_at(&self, lambda: &[Complex<T>]) -> Result<TensorOperator<T>> {
        (self.base)(lambda)
    }

    /// Shared handle to the undecorated base evaluator.
    pub fn base_fn(&self) -> BaseFn<T> {
        self.base.clone()
    }

    /// Copy acting on a different support list. Only defined for
    /// undecorated operators; shift legs are relative to the ambient space
    /// and would silently change meaning.
    pub fn on_legs(&self, support: Vec<usize>) -> Result<Self> {
        if !self.shifts.is_empty() {
            return Err(Error::Invalid(
                "cannot re-support an operator carrying shift decorations".into(),
            ));
        }
        if support.len() != self.support.len() {
            return Err(Error::SupportMismatch {
                expected: self.support.len(),
                got: support.len(),
            });
        }
        Self::new(self.n, self.gamma, support, self.base.clone())
    }

    /// Append a dynamical shift `λ → λ + γ h_leg`. Shifting the same leg
    /// twice accumulates multiplicity 2 (argument `λ + 2γ ê_k` on that
    /// leg's basis blocks).
    pub fn shift(&self, leg: usize) -> Result<Self> {
        if leg == 0 {
            return Err(Error::LegOutOfRange { leg, legs: 0 });
        }
        if self.support.contains(&leg) {
            return Err(Error::ShiftLegInSupport { leg });
        }
        let mut out = self.clone();
        match out.shifts.iter_mut().find(|(l, _)| *l == leg) {
            Some((_, m)) => *m += 1,
            None => out.shifts.push((leg, 1)),
        }
        Ok(out)
    }

    fn max_leg(&self) -> usize {
        self.support
            .iter()
            .chain(self.shifts.iter().map(|(l, _)| l))
            .copied()
            .max()
            .unwrap_or(0)
    }

    /// Evaluate on `V^⊗ambient`: the base goes onto the support legs and
    /// every shift decoration resolves into its projector sum.
    pub fn evaluate(&self, lambda: &[Complex<T>], ambient: usize) -> Result<TensorOperator<T>> {
        if lambda.len() != self.n {
            return Err(Error::Invalid(format!(
                "λ has length {}, expected {}",
                lambda.len(),
                self.n
            )));
        }
        let needed = self.max_leg();
        if ambient < needed {
            return Err(Error::AmbientTooSmall { ambient, needed });
        }
        if self.shifts.is_empty() {
            return self.base_at(lambda)?.embed(&self.support, ambient);
        }
        let n = self.n;
        let m = self.shifts.len();
        let mut out = TensorOperator::zeros(n, ambient)?;
        let mut assign = vec![0usize; m];
        let total = n.pow(m as u32);
        for a in 0..total {
            let mut rem = a;
            for slot in assign.iter_mut() {
                *slot = rem % n;
                rem /= n;
            }
            let mut shifted = lambda.to_vec();
            for (t, &(_, mult)) in self.shifts.iter().enumerate() {
                let mult = T::from_u32(mult).expect("small integer");
                shifted[assign[t]] = shifted[assign[t]] + self.gamma * Complex::from(mult);
            }
            let base = self.base_at(&shifted)?;
            let fixed: Vec<(usize, usize)> = self
                .shifts
                .iter()
                .zip(assign.iter())
                .map(|(&(leg, _), &k)| (leg, k))
                .collect();
            out = out.add(&base.embed_fixed(&self.support, ambient, &fixed)?)?;
        }
        Ok(out)
    }

    /// Evaluate at a real parameter vector.
    pub fn evaluate_real(&self, lambda: &[T], ambient: usize) -> Result<TensorOperator<T>> {
        let lc: Vec<Complex<T>> = lambda.iter().map(|&x| Complex::from(x)).collect();
        self.evaluate(&lc, ambient)
    }
}

/// Which Cartan commutators a two-leg operator must kill.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WeightMode {
    /// `[h ⊗ 1, M] = 0`
    LegOneZero,
    /// `[1 ⊗ h, M] = 0`
    LegTwoZero,
    /// `[h ⊗ 1 + 1 ⊗ h, M] = 0`
    TotalZero,
}

/// Max over Cartan generators of the residual of the commutator of a
/// two-support-leg operator with `E_ii` on the designated leg(s).
pub fn weight_residual<T: RealScalar>(
    d: &DynamicalOperator<T>,
    mode: WeightMode,
    lambda: &[Complex<T>],
) -> Result<T> {
    if d.support().len() != 2 {
        return Err(Error::Invalid(
            "weight conditions are defined for two-support-leg operators".into(),
        ));
    }
    let ambient = d.max_leg();
    let m = d.evaluate(lambda, ambient)?;
    let zero = TensorOperator::zeros(d.n(), ambient)?;
    let mut worst = T::zero();
    for i in 1..=d.n() {
        let e = TensorOperator::elementary(d.n(), i, i)?;
        let h = match mode {
            WeightMode::LegOneZero => e.embed(&[d.support()[0]], ambient)?,
            WeightMode::LegTwoZero => e.embed(&[d.support()[1]], ambient)?,
            WeightMode::TotalZero => e
                .embed(&[d.support()[0]], ambient)?
                .add(&e.embed(&[d.support()[1]], ambient)?)?,
        };
        let comm = h.mul(&m)?.sub(&m.mul(&h)?)?;
        worst = worst.max(rel_residual(&comm, &zero)?);
    }
    Ok(worst)
}
