//! Truncated Toeplitz matrices on the monomial basis.
//!
//! The matrix of T_f on the degree-ordered basis is assembled entrywise from
//! the coupling rule: a term z^p zbar^q rho(|z|) connects e_m to e_k only
//! when m + p = k + q, and the entry is a product of basis normalizations,
//! the monomial norm at m + p, and the radial mean omega(rho, |m + p|).
//! Matrix products of truncations are tracked with an exactness flag: they
//! equal the truncation of the operator product only when a diagonal factor
//! protects the contracted range.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::indexing::{basis_coefficient, enumerate_basis, monomial_norm_sq, BasisOrder, SpaceParams};
use crate::spectra::omega;
use crate::symbols::{RadialProfile, SymbolExpr};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Assembled,
    Adjoint,
    Composed,
}

#[derive(Clone, Debug)]
pub struct TruncatedOperator {
    basis: BasisOrder,
    space: SpaceParams,
    matrix: DMatrix<Complex64>,
    provenance: Provenance,
    exact_entries: bool,
    diagonal: bool,
}

fn profile_is_exact(rho: &RadialProfile) -> bool {
    matches!(rho, RadialProfile::PolyT2(_) | RadialProfile::PowerT(_))
}

impl TruncatedOperator {
    /// The compression P_D T_f P_D, rows and columns in basis order.
    /// Entry (k, m) is <T_f e_m, e_k>.
    pub fn assemble(f: &SymbolExpr, space: &SpaceParams, cutoff: u32) -> Result<Self> {
        if f.dim() != space.dimension {
            return Err(Error::DimensionMismatch {
                expected: space.dimension,
                got: f.dim(),
            });
        }
        let basis = enumerate_basis(space, cutoff);
        let size = basis.size();
        let mut matrix = DMatrix::<Complex64>::zeros(size, size);
        for term in f.terms() {
            // omega depends only on |m + p|; cache per reachable total degree
            let top = (cutoff + term.p.degree()) as usize;
            let mut omega_cache: Vec<Option<f64>> = vec![None; top + 1];
            for (col, m) in basis.indices().iter().enumerate() {
                let coupled = m.plus(&term.p);
                let Some(k) = coupled.checked_sub(&term.q) else {
                    continue;
                };
                if k.degree() > cutoff {
                    continue;
                }
                let row = basis.index_of(&k).expect("degree within cutoff");
                let s = coupled.degree() as usize;
                let w = match omega_cache[s] {
                    Some(w) => w,
                    None => {
                        let w = omega(&term.rho, s as f64, space)?;
                        omega_cache[s] = Some(w);
                        w
                    }
                };
                let scale = basis_coefficient(m, space)
                    * basis_coefficient(&k, space)
                    * monomial_norm_sq(&coupled, space)
                    * w;
                matrix[(row, col)] += term.coeff * scale;
            }
        }
        Ok(TruncatedOperator {
            basis,
            space: *space,
            matrix,
            provenance: Provenance::Assembled,
            exact_entries: f.terms().iter().all(|t| profile_is_exact(&t.rho)),
            diagonal: f.terms().iter().all(|t| t.p == t.q),
        })
    }

    pub fn basis(&self) -> &BasisOrder {
        &self.basis
    }

    pub fn space(&self) -> &SpaceParams {
        &self.space
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn cutoff(&self) -> u32 {
        self.basis.cutoff()
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// Entries are certified to quadrature accuracy (closed form or Gauss),
    /// and for products, equal the truncation of the operator product.
    pub fn exact_entries(&self) -> bool {
        self.exact_entries
    }

    /// Structurally diagonal: every symbol term had p = q, so no entry was
    /// ever written off the diagonal.
    pub fn is_diagonal(&self) -> bool {
        self.diagonal
    }

    pub fn entry(&self, k: &crate::indexing::MultiIndex, m: &crate::indexing::MultiIndex) -> Option<Complex64> {
        let row = self.basis.index_of(k)?;
        let col = self.basis.index_of(m)?;
        Some(self.matrix[(row, col)])
    }

    /// Conjugate transpose; equals the compression of T_(fbar) exactly.
    pub fn adjoint(&self) -> Self {
        TruncatedOperator {
            basis: self.basis.clone(),
            space: self.space,
            matrix: self.matrix.adjoint(),
            provenance: Provenance::Adjoint,
            exact_entries: self.exact_entries,
            diagonal: self.diagonal,
        }
    }

    /// Matrix product self * other ("other acts first"). The result equals
    /// the compression of the composed operator only when a diagonal factor
    /// keeps the contracted middle range inside the window; the exactness
    /// flag records that.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.space != other.space || self.basis.cutoff() != other.basis.cutoff() {
            return Err(Error::InvalidParam(
                "compose needs matching space and cutoff".into(),
            ));
        }
        Ok(TruncatedOperator {
            basis: self.basis.clone(),
            space: self.space,
            matrix: &self.matrix * &other.matrix,
            provenance: Provenance::Composed,
            exact_entries: self.exact_entries
                && other.exact_entries
                && (self.diagonal || other.diagonal),
            diagonal: self.diagonal && other.diagonal,
        })
    }

    pub fn apply(&self, v: &DVector<Complex64>) -> Result<DVector<Complex64>> {
        if v.len() != self.basis.size() {
            return Err(Error::DimensionMismatch {
                expected: self.basis.size(),
                got: v.len(),
            });
        }
        Ok(&self.matrix * v)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.matrix.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.matrix.iter().fold(0.0, |m, c| c.norm().max(m))
    }
}
