//! Dense complex operators on tensor powers of `V = ℂⁿ`.
//!
//! Matrix rows and columns are indexed by multi-indices `(i₁, …, i_N)` with
//! `i_k ∈ {1, …, n}`, laid out row-major: leg 1 is the most significant
//! digit. Every other module builds on the leg bookkeeping defined here.

use ndarray::Array2;
use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::{real, RealScalar};

/// Floor on the reciprocal-condition estimate below which `invert` refuses.
pub const DEFAULT_RCOND_FLOOR: f64 = 1e-10;

/// Dense complex linear operator on `V^⊗N`, `V = ℂⁿ`.
#[derive(Clone, Debug)]
pub struct TensorOperator<T: RealScalar> {
    n: usize,
    legs: usize,
    data: Array2<Complex<T>>,
}

fn checked_dim(n: usize, legs: usize) -> Result<usize> {
    let legs32 = u32::try_from(legs)
        .map_err(|_| Error::Invalid(format!("leg count {legs} too large")))?;
    n.checked_pow(legs32)
        .filter(|d| *d <= 1 << 22)
        .ok_or(Error::DimensionGuard {
            dim: usize::MAX,
            max: 1 << 22,
        })
}

impl<T: RealScalar> TensorOperator<T> {
    /// Zero operator on `legs` tensor factors.
    pub fn zeros(n: usize, legs: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Invalid("local dimension must be positive".into()));
        }
        let dim = checked_dim(n, legs)?;
        Ok(Self {
            n,
            legs,
            data: Array2::zeros((dim, dim)),
        })
    }

    /// Identity operator on `legs` tensor factors.
    pub fn identity(n: usize, legs: usize) -> Result<Self> {
        let mut out = Self::zeros(n, legs)?;
        for i in 0..out.dim() {
            out.data[[i, i]] = Complex::one();
        }
        Ok(out)
    }

    /// Wrap an existing matrix; the side must equal `n^legs`.
    pub fn from_matrix(n: usize, legs: usize, data: Array2<Complex<T>>) -> Result<Self> {
        let dim = checked_dim(n, legs)?;
        if data.nrows() != dim || data.ncols() != dim {
            return Err(Error::Invalid(format!(
                "matrix is {}x{}, expected {dim}x{dim}",
                data.nrows(),
                data.ncols()
            )));
        }
        Ok(Self { n, legs, data })
    }

    /// Elementary matrix `E_ij` on a single leg, 1-based indices:
    /// `(E_ij)_kl = δ_ik δ_jl`.
    pub fn elementary(n: usize, i: usize, j: usize) -> Result<Self> {
        if i == 0 || i > n || j == 0 || j > n {
            return Err(Error::IndexOutOfRange { i, j, n });
        }
        let mut out = Self::zeros(n, 1)?;
        out.data[[i - 1, j - 1]] = Complex::one();
        Ok(out)
    }

    /// The leg-swap operator `C = Σ_{i,j} E_ij ⊗ E_ji` on two legs.
    pub fn casimir(n: usize) -> Result<Self> {
        let mut out = Self::zeros(n, 2)?;
        for i in 0..n {
            for j in 0..n {
                out.data[[i * n + j, j * n + i]] = Complex::one();
            }
        }
        Ok(out)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn legs(&self) -> usize {
        self.legs
    }

    /// Matrix side, `n^legs`.
    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn matrix(&self) -> &Array2<Complex<T>> {
        &self.data
    }

    pub fn into_matrix(self) -> Array2<Complex<T>> {
        self.data
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.n != other.n || self.legs != other.legs {
            return Err(Error::ShapeMismatch {
                n_left: self.n,
                legs_left: self.legs,
                n_right: other.n,
                legs_right: other.legs,
            });
        }
        Ok(())
    }

    fn flat(&self, digits: &[usize]) -> Result<usize> {
        if digits.len() != self.legs {
            return Err(Error::SupportMismatch {
                expected: self.legs,
                got: digits.len(),
            });
        }
        let mut idx = 0;
        for &d in digits {
            if d == 0 || d > self.n {
                return Err(Error::IndexOutOfRange {
                    i: d,
                    j: d,
                    n: self.n,
                });
            }
            idx = idx * self.n + (d - 1);
        }
        Ok(idx)
    }

    /// Entry addressed by 1-based row/column multi-indices.
    pub fn entry(&self, row: &[usize], col: &[usize]) -> Result<Complex<T>> {
        Ok(self.data[[self.flat(row)?, self.flat(col)?]])
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        self.same_shape(rhs)?;
        Ok(Self {
            n: self.n,
            legs: self.legs,
            data: &self.data + &rhs.data,
        })
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        self.same_shape(rhs)?;
        Ok(Self {
            n: self.n,
            legs: self.legs,
            data: &self.data - &rhs.data,
        })
    }

    pub fn scale(&self, factor: Complex<T>) -> Self {
        Self {
            n: self.n,
            legs: self.legs,
            data: self.data.mapv(|z| z * factor),
        }
    }

    /// Matrix product `self · rhs`.
    pub fn mul(&self, rhs: &Self) -> Result<Self> {
        self.same_shape(rhs)?;
        Ok(Self {
            n: self.n,
            legs: self.legs,
            data: self.data.dot(&rhs.data),
        })
    }

    /// Kronecker product; the result acts on the concatenated legs.
    pub fn kron(&self, rhs: &Self) -> Result<Self> {
        if self.n != rhs.n {
            return Err(Error::ShapeMismatch {
                n_left: self.n,
                legs_left: self.legs,
                n_right: rhs.n,
                legs_right: rhs.legs,
            });
        }
        let (da, db) = (self.dim(), rhs.dim());
        let mut out = Self::zeros(self.n, self.legs + rhs.legs)?;
        for ra in 0..da {
            for ca in 0..da {
                let x = self.data[[ra, ca]];
                if x.is_zero() {
                    continue;
                }
                for rb in 0..db {
                    for cb in 0..db {
                        out.data[[ra * db + rb, ca * db + cb]] = x * rhs.data[[rb, cb]];
                    }
                }
            }
        }
        Ok(out)
    }

    /// Apply to a state vector of length `dim`.
    pub fn apply(&self, v: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        if v.len() != self.dim() {
            return Err(Error::Invalid(format!(
                "vector length {} does not match operator side {}",
                v.len(),
                self.dim()
            )));
        }
        let view = ndarray::ArrayView1::from(v);
        Ok(self.data.dot(&view).to_vec())
    }

    /// Embed into `V^⊗ambient`, acting as `self` on the listed legs (in
    /// order) and as identity elsewhere. The embedding is an algebra
    /// homomorphism.
    pub fn embed(&self, support: &[usize], ambient: usize) -> Result<Self> {
        self.embed_fixed(support, ambient, &[])
    }

    /// Embed with some non-support legs pinned to a basis value instead of
    /// summed over: equivalent to `embed(self) · Π projectors`. `fixed`
    /// holds `(leg, 0-based basis index)` pairs; this is what resolves
    /// dynamical shifts into finite projector sums.
    pub(crate) fn embed_fixed(
        &self,
        support: &[usize],
        ambient: usize,
        fixed: &[(usize, usize)],
    ) -> Result<Self> {
        if support.len() != self.legs {
            return Err(Error::SupportMismatch {
                expected: self.legs,
                got: support.len(),
            });
        }
        let mut used = vec![false; ambient + 1];
        for &leg in support.iter().chain(fixed.iter().map(|(l, _)| l)) {
            if leg == 0 || leg > ambient {
                return Err(Error::LegOutOfRange { leg, legs: ambient });
            }
            if used[leg] {
                return Err(Error::DuplicateLeg { leg });
            }
            used[leg] = true;
        }
        let n = self.n;
        let dim = checked_dim(n, ambient)?;
        let stride = |leg: usize| n.pow((ambient - leg) as u32);

        // Offset of each local multi-index once routed to the support legs.
        let dx = self.dim();
        let mut offs = vec![0usize; dx];
        for (v, off) in offs.iter_mut().enumerate() {
            let mut rem = v;
            for t in (0..self.legs).rev() {
                *off += (rem % n) * stride(support[t]);
                rem /= n;
            }
        }
        let fixed_off: usize = fixed.iter().map(|&(l, v)| v * stride(l)).sum();
        let free: Vec<usize> = (1..=ambient).filter(|l| !used[*l]).collect();

        let mut out = Array2::zeros((dim, dim));
        for c in 0..n.pow(free.len() as u32) {
            let mut rem = c;
            let mut base = fixed_off;
            for t in (0..free.len()).rev() {
                base += (rem % n) * stride(free[t]);
                rem /= n;
            }
            for r in 0..dx {
                for c in 0..dx {
                    out[[base + offs[r], base + offs[c]]] = self.data[[r, c]];
                }
            }
        }
        Ok(Self {
            n,
            legs: ambient,
            data: out,
        })
    }

    /// Transpose the row/column indices of one leg; an involution.
    pub fn partial_transpose(&self, leg: usize) -> Result<Self> {
        if leg == 0 || leg > self.legs {
            return Err(Error::LegOutOfRange {
                leg,
                legs: self.legs,
            });
        }
        let n = self.n;
        let d = self.dim();
        let s = n.pow((self.legs - leg) as u32);
        let mut out = Array2::zeros((d, d));
        for r in 0..d {
            let dr = (r / s) % n;
            for c in 0..d {
                let dc = (c / s) % n;
                out[[r - dr * s + dc * s, c - dc * s + dr * s]] = self.data[[r, c]];
            }
        }
        Ok(Self {
            n,
            legs: self.legs,
            data: out,
        })
    }

    /// Full matrix transpose (partial transpose on every leg).
    pub fn transpose(&self) -> Self {
        Self {
            n: self.n,
            legs: self.legs,
            data: self.data.t().to_owned(),
        }
    }

    /// Conjugate by the unitary permuting tensor factors: leg `k` of `self`
    /// becomes leg `perm[k-1]` of the result. `permute_legs(X, [2, 1])`
    /// realizes the index swap `X₁₂ ↦ X₂₁`.
    pub fn permute_legs(&self, perm: &[usize]) -> Result<Self> {
        let nl = self.legs;
        let mut seen = vec![false; nl + 1];
        if perm.len() != nl {
            return Err(Error::BadPermutation {
                perm: perm.to_vec(),
                legs: nl,
            });
        }
        for &p in perm {
            if p == 0 || p > nl || seen[p] {
                return Err(Error::BadPermutation {
                    perm: perm.to_vec(),
                    legs: nl,
                });
            }
            seen[p] = true;
        }
        let n = self.n;
        let d = self.dim();
        let mut map = vec![0usize; d];
        let mut digits = vec![0usize; nl];
        for (v, m) in map.iter_mut().enumerate() {
            let mut rem = v;
            for t in (0..nl).rev() {
                digits[t] = rem % n;
                rem /= n;
            }
            let mut idx = vec![0usize; nl];
            for t in 0..nl {
                idx[perm[t] - 1] = digits[t];
            }
            *m = idx.iter().fold(0, |acc, &dd| acc * n + dd);
        }
        let mut out = Array2::zeros((d, d));
        for r in 0..d {
            for c in 0..d {
                out[[map[r], map[c]]] = self.data[[r, c]];
            }
        }
        Ok(Self {
            n,
            legs: self.legs,
            data: out,
        })
    }

    /// Inverse via LU with partial pivoting, using the default
    /// reciprocal-condition floor.
    pub fn invert(&self) -> Result<Self> {
        self.invert_with_floor(real(DEFAULT_RCOND_FLOOR))
    }

    /// Inverse with an explicit floor on the pivot-ratio estimate of the
    /// reciprocal condition number.
    pub fn invert_with_floor(&self, rcond_floor: T) -> Result<Self> {
        let d = self.dim();
        let mut lu = self.data.clone();
        let mut perm: Vec<usize> = (0..d).collect();
        let mut min_piv = T::infinity();
        let mut max_piv = T::zero();
        for col in 0..d {
            let mut pr = col;
            let mut pm = lu[[col, col]].norm();
            for r in col + 1..d {
                let m = lu[[r, col]].norm();
                if m > pm {
                    pm = m;
                    pr = r;
                }
            }
            if pr != col {
                for c in 0..d {
                    let tmp = lu[[col, c]];
                    lu[[col, c]] = lu[[pr, c]];
                    lu[[pr, c]] = tmp;
                }
                perm.swap(col, pr);
            }
            min_piv = min_piv.min(pm);
            max_piv = max_piv.max(pm);
            if pm.is_zero() {
                return Err(Error::Singular { rcond: 0.0 });
            }
            let piv = lu[[col, col]];
            for r in col + 1..d {
                let f = lu[[r, col]] / piv;
                lu[[r, col]] = f;
                for c in col + 1..d {
                    let sub = f * lu[[col, c]];
                    lu[[r, c]] = lu[[r, c]] - sub;
                }
            }
        }
        let rcond = if max_piv > T::zero() {
            min_piv / max_piv
        } else {
            T::zero()
        };
        if rcond < rcond_floor {
            return Err(Error::Singular {
                rcond: rcond.to_f64().unwrap_or(0.0),
            });
        }

        let mut inv = Array2::zeros((d, d));
        let mut y = vec![Complex::<T>::zero(); d];
        for j in 0..d {
            for i in 0..d {
                let mut s = if perm[i] == j {
                    Complex::one()
                } else {
                    Complex::zero()
                };
                for (k, &yk) in y.iter().enumerate().take(i) {
                    s = s - lu[[i, k]] * yk;
                }
                y[i] = s;
            }
            for i in (0..d).rev() {
                let mut s = y[i];
                for k in i + 1..d {
                    s = s - lu[[i, k]] * y[k];
                }
                y[i] = s / lu[[i, i]];
            }
            for i in 0..d {
                inv[[i, j]] = y[i];
            }
        }
        Ok(Self {
            n: self.n,
            legs: self.legs,
            data: inv,
        })
    }

    /// Frobenius norm.
    pub fn norm_fro(&self) -> T {
        self.data
            .iter()
            .fold(T::zero(), |acc, z| acc + z.norm_sqr())
            .sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.data
            .iter()
            .fold(T::zero(), |acc, z| acc.max(z.norm()))
    }
}

/// The single residual metric used by every checker:
/// `‖x − y‖_F / max(1, ‖x‖_F, ‖y‖_F)`.
pub fn rel_residual<T: RealScalar>(
    x: &TensorOperator<T>,
    y: &TensorOperator<T>,
) -> Result<T> {
    x.same_shape(y)?;
    let diff = x
        .data
        .iter()
        .zip(y.data.iter())
        .fold(T::zero(), |acc, (a, b)| acc + (a - b).norm_sqr())
        .sqrt();
    Ok(diff / T::one().max(x.norm_fro()).max(y.norm_fro()))
}

/// Same metric for plain state vectors.
pub fn vec_rel_residual<T: RealScalar>(x: &[Complex<T>], y: &[Complex<T>]) -> T {
    let norm = |v: &[Complex<T>]| {
        v.iter()
            .fold(T::zero(), |acc, z| acc + z.norm_sqr())
            .sqrt()
    };
    let diff = x
        .iter()
        .zip(y.iter())
        .fold(T::zero(), |acc, (a, b)| acc + (a - b).norm_sqr())
        .sqrt();
    diff / T::one().max(norm(x)).max(norm(y))
}

/// Left-to-right product of a factor list.
pub fn product<T: RealScalar>(factors: &[&TensorOperator<T>]) -> Result<TensorOperator<T>> {
    let (first, rest) = factors
        .split_first()
        .ok_or_else(|| Error::Invalid("empty product".into()))?;
    let mut acc = (*first).clone();
    for f in rest {
        acc = acc.mul(f)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::creal;
    use ndarray::array;
    use proptest::prelude::*;

    type Op = TensorOperator<f64>;

    fn c(re: f64) -> Complex<f64> {
        Complex::new(re, 0.0)
    }

    #[test]
    fn elementary_is_a_unit_entry() {
        let e11 = Op::elementary(2, 1, 1).unwrap();
        assert_eq!(e11.matrix(), &array![[c(1.0), c(0.0)], [c(0.0), c(0.0)]]);
        assert!(Op::elementary(2, 3, 1).is_err());
        assert!(Op::elementary(2, 1, 0).is_err());
    }

    #[test]
    fn elementary_products_compose() {
        let e12 = Op::elementary(2, 1, 2).unwrap();
        let e21 = Op::elementary(2, 2, 1).unwrap();
        let e11 = Op::elementary(2, 1, 1).unwrap();
        assert!(rel_residual(&e12.mul(&e21).unwrap(), &e11).unwrap() == 0.0);
    }

    #[test]
    fn elementary_completeness() {
        let mut acc = Op::zeros(3, 1).unwrap();
        for i in 1..=3 {
            acc = acc.add(&Op::elementary(3, i, i).unwrap()).unwrap();
        }
        assert_eq!(rel_residual(&acc, &Op::identity(3, 1).unwrap()).unwrap(), 0.0);
    }

    #[test]
    fn embed_single_leg() {
        let e12 = Op::elementary(2, 1, 2).unwrap();
        let emb = e12.embed(&[2], 2).unwrap();
        let expect = Op::identity(2, 1).unwrap().kron(&e12).unwrap();
        assert_eq!(rel_residual(&emb, &expect).unwrap(), 0.0);
    }

    #[test]
    fn embed_of_identity_is_identity() {
        let id2 = Op::identity(2, 2).unwrap();
        let emb = id2.embed(&[1, 2], 3).unwrap();
        assert_eq!(rel_residual(&emb, &Op::identity(2, 3).unwrap()).unwrap(), 0.0);
    }

    #[test]
    fn embed_rejects_bad_supports() {
        let x = Op::identity(2, 2).unwrap();
        assert!(matches!(
            x.embed(&[1, 1], 3),
            Err(Error::DuplicateLeg { leg: 1 })
        ));
        assert!(matches!(
            x.embed(&[1, 4], 3),
            Err(Error::LegOutOfRange { leg: 4, .. })
        ));
        assert!(matches!(x.embed(&[1], 3), Err(Error::SupportMismatch { .. })));
    }

    #[test]
    fn embed_respects_support_order() {
        // E12 ⊗ E21 placed on legs (3, 1) equals E21 ⊗ 1 ⊗ E12.
        let x = Op::elementary(2, 1, 2)
            .unwrap()
            .kron(&Op::elementary(2, 2, 1).unwrap())
            .unwrap();
        let emb = x.embed(&[3, 1], 3).unwrap();
        let expect = Op::elementary(2, 2, 1)
            .unwrap()
            .kron(&Op::identity(2, 1).unwrap())
            .unwrap()
            .kron(&Op::elementary(2, 1, 2).unwrap())
            .unwrap();
        assert_eq!(rel_residual(&emb, &expect).unwrap(), 0.0);
    }

    #[test]
    fn partial_transpose_moves_one_leg() {
        let x = Op::elementary(2, 1, 2)
            .unwrap()
            .kron(&Op::elementary(2, 2, 1).unwrap())
            .unwrap();
        let expect = Op::elementary(2, 2, 1)
            .unwrap()
            .kron(&Op::elementary(2, 2, 1).unwrap())
            .unwrap();
        let got = x.partial_transpose(1).unwrap();
        assert_eq!(rel_residual(&got, &expect).unwrap(), 0.0);
    }

    #[test]
    fn transpose_on_all_legs_is_full_transpose() {
        let x = random_op(2, 2, 7);
        let both = x.partial_transpose(1).unwrap().partial_transpose(2).unwrap();
        assert!(rel_residual(&both, &x.transpose()).unwrap() < 1e-15);
    }

    #[test]
    fn permute_swap_exchanges_factors() {
        let x = Op::elementary(2, 1, 1)
            .unwrap()
            .kron(&Op::elementary(2, 2, 2).unwrap())
            .unwrap();
        let expect = Op::elementary(2, 2, 2)
            .unwrap()
            .kron(&Op::elementary(2, 1, 1).unwrap())
            .unwrap();
        assert_eq!(
            rel_residual(&x.permute_legs(&[2, 1]).unwrap(), &expect).unwrap(),
            0.0
        );
    }

    #[test]
    fn casimir_swaps_basis_vectors() {
        let cas = Op::casimir(2).unwrap();
        // e1 ⊗ e2 is index 1, e2 ⊗ e1 is index 2.
        let v = vec![c(0.0), c(1.0), c(0.0), c(0.0)];
        let w = cas.apply(&v).unwrap();
        assert_eq!(w, vec![c(0.0), c(0.0), c(1.0), c(0.0)]);
    }

    #[test]
    fn casimir_squares_to_identity_and_is_swap_invariant() {
        for n in [2, 3] {
            let cas = Op::casimir(n).unwrap();
            let sq = cas.mul(&cas).unwrap();
            assert_eq!(rel_residual(&sq, &Op::identity(n, 2).unwrap()).unwrap(), 0.0);
            let sw = cas.permute_legs(&[2, 1]).unwrap();
            assert_eq!(rel_residual(&sw, &cas).unwrap(), 0.0);
        }
    }

    #[test]
    fn casimir_commutes_with_symmetric_one_leg_sums() {
        let x = random_op(3, 1, 11);
        let cas = Op::casimir(3).unwrap();
        let sum = x.embed(&[1], 2).unwrap().add(&x.embed(&[2], 2).unwrap()).unwrap();
        let lhs = cas.mul(&sum).unwrap();
        let rhs = sum.mul(&cas).unwrap();
        assert!(rel_residual(&lhs, &rhs).unwrap() < 1e-14);
        let xx = x.kron(&x).unwrap();
        let comm = cas.mul(&xx).unwrap().sub(&xx.mul(&cas).unwrap()).unwrap();
        assert!(comm.norm_fro() < 1e-13);
    }

    #[test]
    fn invert_diagonal() {
        let d = Op::from_matrix(
            2,
            1,
            array![[c(2.0), c(0.0)], [c(0.0), c(4.0)]],
        )
        .unwrap();
        let inv = d.invert().unwrap();
        let expect =
            Op::from_matrix(2, 1, array![[c(0.5), c(0.0)], [c(0.0), c(0.25)]]).unwrap();
        assert!(rel_residual(&inv, &expect).unwrap() < 1e-15);
        let id = Op::identity(2, 1).unwrap();
        assert_eq!(rel_residual(&id.invert().unwrap(), &id).unwrap(), 0.0);
    }

    #[test]
    fn invert_rejects_singular() {
        let zero = Op::zeros(2, 1).unwrap();
        assert!(matches!(zero.invert(), Err(Error::Singular { .. })));
        let rank1 = Op::from_matrix(
            2,
            1,
            array![[c(1.0), c(1.0)], [c(1.0), c(1.0)]],
        )
        .unwrap();
        assert!(matches!(rank1.invert(), Err(Error::Singular { .. })));
    }

    #[test]
    fn rel_residual_examples() {
        let x = random_op(2, 2, 3);
        assert_eq!(rel_residual(&x, &x).unwrap(), 0.0);
        // ‖0 − 1‖_F = √2 on one leg at n = 2, and max(1, √2) = √2.
        let z = Op::zeros(2, 1).unwrap();
        let id = Op::identity(2, 1).unwrap();
        assert!((rel_residual(&z, &id).unwrap() - 1.0).abs() < 1e-15);
        assert!(rel_residual(&x, &Op::zeros(3, 2).unwrap()).is_err());
    }

    fn random_op(n: usize, legs: usize, seed: u64) -> Op {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let dim = n.pow(legs as u32);
        let data = Array2::from_shape_fn((dim, dim), |_| {
            Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        Op::from_matrix(n, legs, data).unwrap()
    }

    #[test]
    fn embed_is_multiplicative_and_linear() {
        let x = random_op(2, 2, 17);
        let y = random_op(2, 2, 18);
        let xy = x.mul(&y).unwrap();
        let lhs = xy.embed(&[1, 3], 3).unwrap();
        let rhs = x
            .embed(&[1, 3], 3)
            .unwrap()
            .mul(&y.embed(&[1, 3], 3).unwrap())
            .unwrap();
        assert!(rel_residual(&lhs, &rhs).unwrap() < 1e-14);

        let sum = x.add(&y).unwrap().embed(&[2, 3], 3).unwrap();
        let parts = x
            .embed(&[2, 3], 3)
            .unwrap()
            .add(&y.embed(&[2, 3], 3).unwrap())
            .unwrap();
        assert!(rel_residual(&sum, &parts).unwrap() < 1e-15);
    }

    #[test]
    fn invert_roundtrip_on_random_input() {
        let x = random_op(2, 2, 23).add(&Op::identity(2, 2).unwrap().scale(creal(3.0))).unwrap();
        let inv = x.invert().unwrap();
        let id = Op::identity(2, 2).unwrap();
        assert!(rel_residual(&x.mul(&inv).unwrap(), &id).unwrap() < 1e-13);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn partial_transpose_is_involution(seed in 0u64..1000, leg in 1usize..=2) {
            let x = random_op(2, 2, seed);
            let back = x.partial_transpose(leg).unwrap().partial_transpose(leg).unwrap();
            prop_assert!(rel_residual(&back, &x).unwrap() == 0.0);
        }

        #[test]
        fn partial_transposes_commute_across_legs(seed in 0u64..1000) {
            let x = random_op(2, 3, seed);
            let ab = x.partial_transpose(1).unwrap().partial_transpose(3).unwrap();
            let ba = x.partial_transpose(3).unwrap().partial_transpose(1).unwrap();
            prop_assert!(rel_residual(&ab, &ba).unwrap() == 0.0);
        }

        #[test]
        fn permute_roundtrips(seed in 0u64..1000) {
            let x = random_op(2, 3, seed);
            // σ = (2 3 1) sends leg 1 to 2, leg 2 to 3, leg 3 to 1.
            let sigma = [2usize, 3, 1];
            let mut inv = [0usize; 3];
            for (i, &s) in sigma.iter().enumerate() {
                inv[s - 1] = i + 1;
            }
            let back = x.permute_legs(&sigma).unwrap().permute_legs(&inv).unwrap();
            prop_assert!(rel_residual(&back, &x).unwrap() == 0.0);
        }
    }
}
