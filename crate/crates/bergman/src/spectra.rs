//! Eigenvalue sequences of radial Toeplitz operators.
//!
//! A radial symbol acts diagonally on the monomial basis; the eigenvalue at a
//! monomial depends only on its total degree s and equals the weighted radial
//! mean omega(f, s). Everything downstream (zero sets, sparsity dichotomies,
//! engineered symbols) is built from these sequences.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::indexing::SpaceParams;
use crate::muntz::{reciprocal_sum_class, IntegerSetDesc, SumClass};
use crate::quadrature::{radial_integral_with, u_moment, QuadOptions, QuadPath};
use crate::symbols::{RadialProfile, SymbolZeroCertificate, Witness, ZeroVerdict};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OmegaMethod {
    ClosedForm,
    Quadrature,
}

/// At alpha = 0 the mean against u^(n+s-1) of a u-polynomial is a rational
/// expression in s; anything else goes through quadrature.
fn closed_form_omega(profile: &RadialProfile, s: f64, space: &SpaceParams) -> Option<f64> {
    if !space.is_unweighted() {
        return None;
    }
    let x = space.dimension as f64 + s;
    match profile {
        RadialProfile::PolyT2(coeffs) => Some(
            coeffs
                .iter()
                .enumerate()
                .map(|(j, a)| a * x / (x + j as f64))
                .sum(),
        ),
        RadialProfile::PowerT(a) => Some(x / (x + a)),
        _ => None,
    }
}

/// Eigenvalue of the radial symbol at total degree s (s may be any real >= 0;
/// integer values are the operator spectrum).
pub fn omega(profile: &RadialProfile, s: f64, space: &SpaceParams) -> Result<f64> {
    omega_with(profile, s, space, &QuadOptions::default()).map(|(v, _)| v)
}

/// Same, reporting how the value was obtained. A forced quadrature path
/// bypasses the closed form, which is how the two are compared in tests.
pub fn omega_with(
    profile: &RadialProfile,
    s: f64,
    space: &SpaceParams,
    opts: &QuadOptions,
) -> Result<(f64, OmegaMethod)> {
    if !s.is_finite() || s < 0.0 {
        return Err(Error::InvalidParam(format!(
            "degree parameter s = {s} must be >= 0"
        )));
    }
    if opts.path == QuadPath::Auto {
        if let Some(v) = closed_form_omega(profile, s, space) {
            return Ok((v, OmegaMethod::ClosedForm));
        }
    }
    let eval = radial_integral_with(profile, s, space, opts)?;
    Ok((eval.value, OmegaMethod::Quadrature))
}

/// omega(f, s) for s = 0..=s_max, with the method used for every entry.
#[derive(Clone, Debug, Serialize)]
pub struct OmegaSequence {
    profile: RadialProfile,
    space: SpaceParams,
    values: Vec<f64>,
    method: OmegaMethod,
}

impl OmegaSequence {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value_at(&self, s: u32) -> Option<f64> {
        self.values.get(s as usize).copied()
    }

    pub fn s_max(&self) -> u32 {
        self.values.len() as u32 - 1
    }

    pub fn method(&self) -> OmegaMethod {
        self.method
    }

    pub fn profile(&self) -> &RadialProfile {
        &self.profile
    }

    pub fn space(&self) -> &SpaceParams {
        &self.space
    }
}

pub fn omega_sequence(
    profile: &RadialProfile,
    space: &SpaceParams,
    s_max: u32,
) -> Result<OmegaSequence> {
    let opts = QuadOptions::default();
    let mut values = Vec::with_capacity(s_max as usize + 1);
    let mut method = OmegaMethod::ClosedForm;
    for s in 0..=s_max {
        let (v, m) = omega_with(profile, s as f64, space, &opts)?;
        values.push(v);
        method = m;
    }
    Ok(OmegaSequence {
        profile: profile.clone(),
        space: *space,
        values,
        method,
    })
}

/// The zero set W of an eigenvalue sequence, under the two-band rule: values
/// with |omega| <= eps_zero are zeros, values with |omega| >= 10 eps_zero are
/// certified nonzero, and anything between is refused.
#[derive(Clone, Debug, Serialize)]
pub struct DegreeZeroSet {
    pub degrees: Vec<u32>,
    pub eps_zero: f64,
    pub s_max: u32,
    /// Smallest |omega| among retained (nonzero) degrees.
    pub margin: f64,
}

pub fn degree_zero_set(seq: &OmegaSequence, eps_zero: f64) -> Result<DegreeZeroSet> {
    if !(eps_zero > 0.0) || !eps_zero.is_finite() {
        return Err(Error::InvalidParam(format!(
            "eps_zero = {eps_zero} must be positive"
        )));
    }
    let mut degrees = Vec::new();
    let mut margin = f64::INFINITY;
    for (s, &v) in seq.values().iter().enumerate() {
        let mag = v.abs();
        if mag <= eps_zero {
            degrees.push(s as u32);
        } else if mag < 10.0 * eps_zero {
            return Err(Error::AmbiguousZero {
                s: s as u32,
                value: v,
                eps: eps_zero,
            });
        } else {
            margin = margin.min(mag);
        }
    }
    Ok(DegreeZeroSet {
        degrees,
        eps_zero,
        s_max: seq.s_max(),
        margin,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SparsityVerdict {
    SparseSumConverges,
    DenseSumDiverges,
}

/// Classifies sum over s in W, s != 0, of 1/s. The observed zero set is
/// finite by construction; a symbolic tail describes the degrees beyond
/// s_max the experiment intends W to continue with.
pub fn sparsity_verdict(
    w: &DegreeZeroSet,
    tail: Option<&IntegerSetDesc>,
) -> Result<SparsityVerdict> {
    let finite = IntegerSetDesc::Finite(w.degrees.iter().map(|&d| d as u64).collect());
    let desc = match tail {
        Some(t) => IntegerSetDesc::Union(vec![finite, t.clone()]),
        None => finite,
    };
    match reciprocal_sum_class(&desc)? {
        SumClass::Converges => Ok(SparsityVerdict::SparseSumConverges),
        SumClass::Diverges => Ok(SparsityVerdict::DenseSumDiverges),
    }
}

/// A polynomial profile in t^2 whose eigenvalue sequence vanishes exactly at
/// the requested degrees, normalized so omega at max(zeros)+1 equals one.
///
/// The linear system has one moment-matching row per zero plus the
/// normalization row; k zeros need degree k in u = t^2.
pub fn profile_with_zeros(zeros: &[u32], space: &SpaceParams) -> Result<RadialProfile> {
    let mut sorted = zeros.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != zeros.len() {
        return Err(Error::InvalidParam(
            "zero degrees must be distinct".into(),
        ));
    }
    if sorted.is_empty() {
        return Ok(RadialProfile::constant(1.0));
    }
    let k = sorted.len();
    let s_norm = sorted[k - 1] + 1;
    // beta(s, j) = omega(t^(2j), s): the mean of u^j at shell parameter s
    let beta = |s: u32, j: usize| -> f64 {
        let x = space.dimension as f64 + s as f64 - 1.0;
        u_moment(x + j as f64, space.weight_alpha) / u_moment(x, space.weight_alpha)
    };
    let mut mat = DMatrix::<f64>::zeros(k + 1, k + 1);
    let mut rhs = DVector::<f64>::zeros(k + 1);
    for (row, &s) in sorted.iter().enumerate() {
        for j in 0..=k {
            mat[(row, j)] = beta(s, j);
        }
    }
    for j in 0..=k {
        mat[(k, j)] = beta(s_norm, j);
    }
    rhs[k] = 1.0;
    let coeffs = mat
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::IllConditioned("zero-placement system is singular".into()))?;
    Ok(RadialProfile::PolyT2(coeffs.iter().copied().collect()))
}

/// Certifies a radial profile is not the zero symbol by exhibiting one
/// eigenvalue clear of the ambiguity band; scans s = 0..=s_max.
pub fn certify_profile_nonzero(
    profile: &RadialProfile,
    space: &SpaceParams,
    s_max: u32,
    eps_zero: f64,
) -> Result<SymbolZeroCertificate> {
    for s in 0..=s_max {
        let v = omega(profile, s as f64, space)?;
        if v.abs() >= 10.0 * eps_zero {
            return Ok(SymbolZeroCertificate {
                verdict: ZeroVerdict::NonzeroWitness {
                    at: Witness::Degree(s),
                    value: v,
                },
                tolerance: eps_zero,
            });
        }
    }
    Ok(SymbolZeroCertificate {
        verdict: ZeroVerdict::ZeroFunction,
        tolerance: eps_zero,
    })
}
