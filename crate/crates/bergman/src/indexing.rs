use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exponent vector of a monomial z^m on C^n.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn zero(dim: usize) -> Self {
        MultiIndex(vec![0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Total degree |m|.
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    /// Componentwise sum; panics on dimension mismatch (caller bug).
    pub fn plus(&self, other: &MultiIndex) -> MultiIndex {
        assert_eq!(self.dim(), other.dim(), "multi-index dimensions differ");
        MultiIndex(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    /// Componentwise difference, None if any entry would go negative.
    pub fn checked_sub(&self, other: &MultiIndex) -> Option<MultiIndex> {
        assert_eq!(self.dim(), other.dim(), "multi-index dimensions differ");
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.checked_sub(*b))
            .collect::<Option<Vec<u32>>>()
            .map(MultiIndex)
    }

    /// Signed componentwise difference self - other.
    pub fn offset_from(&self, other: &MultiIndex) -> Vec<i64> {
        assert_eq!(self.dim(), other.dim(), "multi-index dimensions differ");
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| *a as i64 - *b as i64)
            .collect()
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

/// Ambient space: dimension n of the ball and the weight exponent alpha of
/// the measure (1 - |z|^2)^alpha d nu, alpha > -1. alpha = 0 is the
/// unweighted (normalized Lebesgue) case.
#[derive(Clone, Copy, PartialEq, Debug, Serialize, Deserialize)]
pub struct SpaceParams {
    pub dimension: usize,
    pub weight_alpha: f64,
}

impl SpaceParams {
    pub fn new(dimension: usize, weight_alpha: f64) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidParam(
                "ball dimension must be at least 1".into(),
            ));
        }
        if !weight_alpha.is_finite() || weight_alpha <= -1.0 {
            return Err(Error::InvalidParam(format!(
                "weight exponent alpha must be finite and > -1, got {weight_alpha}"
            )));
        }
        Ok(SpaceParams {
            dimension,
            weight_alpha,
        })
    }

    pub fn unweighted(dimension: usize) -> Result<Self> {
        SpaceParams::new(dimension, 0.0)
    }

    pub fn is_unweighted(&self) -> bool {
        self.weight_alpha == 0.0
    }
}

/// All multi-indices of total degree <= cutoff in graded order: degree shells
/// are contiguous and ascending, and within a shell indices are listed with
/// the leading exponent largest first ((d,0,..), (d-1,1,..), ..., (0,..,d)).
#[derive(Clone, Debug)]
pub struct BasisOrder {
    dimension: usize,
    cutoff: u32,
    list: Vec<MultiIndex>,
    position: HashMap<MultiIndex, usize>,
    shell_start: Vec<usize>,
}

pub fn enumerate_basis(space: &SpaceParams, cutoff: u32) -> BasisOrder {
    let n = space.dimension;
    let mut list = Vec::new();
    let mut shell_start = Vec::with_capacity(cutoff as usize + 2);
    for d in 0..=cutoff {
        shell_start.push(list.len());
        push_shell(n, d, &mut Vec::with_capacity(n), &mut list);
    }
    shell_start.push(list.len());
    let position = list
        .iter()
        .cloned()
        .enumerate()
        .map(|(i, m)| (m, i))
        .collect();
    BasisOrder {
        dimension: n,
        cutoff,
        list,
        position,
        shell_start,
    }
}

fn push_shell(n: usize, remaining: u32, prefix: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
    if prefix.len() + 1 == n {
        prefix.push(remaining);
        out.push(MultiIndex(prefix.clone()));
        prefix.pop();
        return;
    }
    for v in (0..=remaining).rev() {
        prefix.push(v);
        push_shell(n, remaining - v, prefix, out);
        prefix.pop();
    }
}

impl BasisOrder {
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn cutoff(&self) -> u32 {
        self.cutoff
    }

    pub fn size(&self) -> usize {
        self.list.len()
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.list
    }

    pub fn at(&self, position: usize) -> &MultiIndex {
        &self.list[position]
    }

    pub fn index_of(&self, m: &MultiIndex) -> Option<usize> {
        self.position.get(m).copied()
    }

    /// Positions of the degree-d shell; empty range past the cutoff.
    pub fn shell(&self, degree: u32) -> std::ops::Range<usize> {
        if degree > self.cutoff {
            return self.size()..self.size();
        }
        let d = degree as usize;
        self.shell_start[d]..self.shell_start[d + 1]
    }
}

/// ln Gamma(x) for x > 0.
pub(crate) fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// Squared norm of the monomial z^m in the weighted Bergman space.
///
/// At alpha = 0 this is the closed form m! n! / (n + |m|)!, evaluated through
/// log-Gamma so that large degrees do not overflow. For alpha != 0 the radial
/// factor is a ratio of certified one-dimensional quadratures; only the
/// angular factor is a closed-form factorial ratio.
pub fn monomial_norm_sq(m: &MultiIndex, space: &SpaceParams) -> f64 {
    assert_eq!(
        m.dim(),
        space.dimension,
        "multi-index dimension does not match the space"
    );
    let n = space.dimension as f64;
    let s = m.degree() as f64;
    let ln_m_fact: f64 = m.entries().iter().map(|&e| ln_gamma(e as f64 + 1.0)).sum();
    if space.is_unweighted() {
        (ln_m_fact + ln_gamma(n + 1.0) - ln_gamma(n + s + 1.0)).exp()
    } else {
        // (n-1)! m! / (n-1+|m|)! times the weighted radial moment ratio.
        let angular = (ln_m_fact + ln_gamma(n) - ln_gamma(n + s)).exp();
        angular * crate::quadrature::radial_moment_ratio(space, m.degree())
    }
}

/// Normalizing coefficient c_m with e_m = c_m z^m orthonormal:
/// c_m = monomial_norm_sq(m)^(-1/2).
pub fn basis_coefficient(m: &MultiIndex, space: &SpaceParams) -> f64 {
    assert_eq!(
        m.dim(),
        space.dimension,
        "multi-index dimension does not match the space"
    );
    if space.is_unweighted() {
        let n = space.dimension as f64;
        let s = m.degree() as f64;
        let ln_m_fact: f64 = m.entries().iter().map(|&e| ln_gamma(e as f64 + 1.0)).sum();
        (0.5 * (ln_gamma(n + s + 1.0) - ln_gamma(n + 1.0) - ln_m_fact)).exp()
    } else {
        monomial_norm_sq(m, space).sqrt().recip()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn space(n: usize) -> SpaceParams {
        SpaceParams::unweighted(n).unwrap()
    }

    #[test]
    fn pinned_coefficients_and_norms() {
        assert_abs_diff_eq!(
            basis_coefficient(&MultiIndex(vec![1]), &space(1)),
            2.0_f64.sqrt(),
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(
            basis_coefficient(&MultiIndex(vec![1, 1]), &space(2)),
            12.0_f64.sqrt(),
            epsilon = 1e-13
        );
        assert_abs_diff_eq!(
            monomial_norm_sq(&MultiIndex(vec![2]), &space(1)),
            1.0 / 3.0,
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(
            monomial_norm_sq(&MultiIndex(vec![3]), &space(1)),
            1.0 / 4.0,
            epsilon = 1e-14
        );
    }

    #[test]
    fn basis_size_and_shells() {
        let order = enumerate_basis(&space(3), 4);
        assert_eq!(order.size(), 35); // C(3+4,3)
        // shell d holds C(n+d-1, n-1) indices
        let expected = [1usize, 3, 6, 10, 15];
        for (d, &count) in expected.iter().enumerate() {
            assert_eq!(order.shell(d as u32).len(), count, "shell {d}");
        }
        assert_eq!(order.shell(5).len(), 0);
    }

    #[test]
    fn graded_order_is_degree_sorted_and_bijective() {
        let order = enumerate_basis(&space(4), 7);
        let mut prev_degree = 0;
        for (i, m) in order.indices().iter().enumerate() {
            assert!(m.degree() >= prev_degree, "degrees never decrease");
            prev_degree = m.degree();
            assert_eq!(order.index_of(m), Some(i));
        }
    }

    #[test]
    fn shell_interior_order_is_lexicographic_descending() {
        let order = enumerate_basis(&space(3), 2);
        let shell: Vec<_> = order.shell(2).map(|i| order.at(i).0.clone()).collect();
        assert_eq!(
            shell,
            vec![
                vec![2, 0, 0],
                vec![1, 1, 0],
                vec![1, 0, 1],
                vec![0, 2, 0],
                vec![0, 1, 1],
                vec![0, 0, 2]
            ]
        );
    }

    #[test]
    fn coefficient_inverts_norm_across_weights() {
        for n in 1..=3usize {
            for alpha in [0.0, 0.5, 2.0] {
                let sp = SpaceParams::new(n, alpha).unwrap();
                let order = enumerate_basis(&sp, 30);
                // spot-check the full shell at a few degrees to keep runtime sane
                for d in [0u32, 1, 7, 30] {
                    for i in order.shell(d) {
                        let m = order.at(i);
                        let prod = basis_coefficient(m, &sp).powi(2) * monomial_norm_sq(m, &sp);
                        assert_abs_diff_eq!(prod, 1.0, epsilon = 1e-13);
                    }
                }
            }
        }
    }

    #[test]
    fn invalid_space_params_rejected() {
        assert!(SpaceParams::new(0, 0.0).is_err());
        assert!(SpaceParams::new(1, -1.0).is_err());
        assert!(SpaceParams::new(1, f64::NAN).is_err());
    }
}
