//! End-to-end zero-product experiments.
//!
//! An experiment takes radial flank symbols, an arbitrary middle symbol, and
//! a truncation window, and works through the whole mechanism: certify the
//! flanks nonzero, read off their shared zero-degree set W, classify its
//! sparsity, form the flank-middle-flank product, recover the middle's
//! matrix entries by dividing the flank eigenvalues back out wherever W
//! permits, and (when W is sparse) attach the moment-constraint certificate
//! that says which middles the surviving entries pin down.

use std::collections::BTreeSet;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::indexing::{MultiIndex, SpaceParams};
use crate::muntz::IntegerSetDesc;
use crate::operators::TruncatedOperator;
use crate::reconstruction::{build_constraints, nullspace_certificate, NullspaceCertificate};
use crate::spectra::{
    certify_profile_nonzero, degree_zero_set, omega_sequence, sparsity_verdict, DegreeZeroSet,
    SparsityVerdict,
};
use crate::symbols::{RadialProfile, SymbolExpr, SymbolZeroCertificate, ZeroVerdict};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub space: SpaceParams,
    /// Radial profiles of the left flank operators, outermost first.
    pub flanks_left: Vec<RadialProfile>,
    /// Radial profiles of the right flank operators, innermost first.
    pub flanks_right: Vec<RadialProfile>,
    pub middle: SymbolExpr,
    /// Truncation cutoff D: the window holds all monomials of degree <= D.
    pub cutoff: u32,
    pub eps_zero: f64,
    /// Support degree A for the reconstruction certificate.
    pub support_degree: u32,
    /// Optional symbolic continuation of W beyond the window.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w_tail: Option<IntegerSetDesc>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.middle.dim() != self.space.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.space.dimension,
                got: self.middle.dim(),
            });
        }
        if !(self.eps_zero > 0.0) || !self.eps_zero.is_finite() {
            return Err(Error::InvalidParam(format!(
                "eps_zero = {} must be positive",
                self.eps_zero
            )));
        }
        if self.flanks_left.is_empty() && self.flanks_right.is_empty() {
            return Err(Error::InvalidParam(
                "at least one flank symbol is required".into(),
            ));
        }
        for (i, p) in self.flanks_left.iter().enumerate() {
            p.validate(&format!("$.flanks_left[{i}]"))?;
        }
        for (i, p) in self.flanks_right.iter().enumerate() {
            p.validate(&format!("$.flanks_right[{i}]"))?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RecoveryViolation {
    pub m: MultiIndex,
    pub k: MultiIndex,
    pub deviation: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentReport {
    pub space: SpaceParams,
    pub cutoff: u32,
    /// Nonzero certificates, left flanks then right flanks, in config order.
    pub flank_certificates: Vec<SymbolZeroCertificate>,
    /// Union of the flank zero sets within the window.
    pub zero_degrees: Vec<u32>,
    /// Smallest retained |omega| across all flanks: the division margin.
    pub zero_margin: f64,
    pub sparsity: SparsityVerdict,
    pub product_max_abs: f64,
    pub product_frobenius: f64,
    /// Product entries equal the compression of the operator product.
    pub product_exact: bool,
    pub middle_structurally_zero: bool,
    /// Largest |recovered - assembled| over rows and columns outside W.
    pub recovered_max_deviation: f64,
    pub recovery_violations: Vec<RecoveryViolation>,
    /// Present when W is sparse: whether the retained moments force the
    /// zero middle at the configured support degree.
    pub reconstruction: Option<NullspaceCertificate>,
}

/// Tolerance on recovering middle entries by dividing out flank eigenvalues.
pub const RECOVERY_TOLERANCE: f64 = 1e-11;

fn assemble_flanks(
    profiles: &[RadialProfile],
    space: &SpaceParams,
    cutoff: u32,
) -> Result<Vec<TruncatedOperator>> {
    profiles
        .iter()
        .map(|p| {
            let f = SymbolExpr::radial(space.dimension, p.clone())?;
            TruncatedOperator::assemble(&f, space, cutoff)
        })
        .collect()
}

/// Product of flank eigenvalues at each total degree 0..=cutoff.
fn eigenvalue_products(
    profiles: &[RadialProfile],
    space: &SpaceParams,
    cutoff: u32,
) -> Result<Vec<f64>> {
    let mut out = vec![1.0f64; cutoff as usize + 1];
    for p in profiles {
        let seq = omega_sequence(p, space, cutoff)?;
        for (s, v) in out.iter_mut().enumerate() {
            *v *= seq.value_at(s as u32).expect("within s_max");
        }
    }
    Ok(out)
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let space = &config.space;
    let cutoff = config.cutoff;
    let eps = config.eps_zero;

    // flank certification and the union zero set; ambiguity surfaces as-is
    let mut certificates = Vec::new();
    let mut union: BTreeSet<u32> = BTreeSet::new();
    let mut margin = f64::INFINITY;
    for (side, profile) in config
        .flanks_left
        .iter()
        .chain(&config.flanks_right)
        .enumerate()
    {
        let cert = certify_profile_nonzero(profile, space, cutoff, eps)?;
        if matches!(cert.verdict, ZeroVerdict::ZeroFunction) {
            return Err(Error::NotCertified(format!(
                "flank {side} has no eigenvalue above 10*eps_zero up to degree {cutoff}; \
                 it is consistent with the zero symbol"
            )));
        }
        certificates.push(cert);
        let seq = omega_sequence(profile, space, cutoff)?;
        let w = degree_zero_set(&seq, eps)?;
        union.extend(w.degrees.iter().copied());
        margin = margin.min(w.margin);
    }
    let zero_degrees: Vec<u32> = union.into_iter().collect();
    let w_set = DegreeZeroSet {
        degrees: zero_degrees.clone(),
        eps_zero: eps,
        s_max: cutoff,
        margin,
    };
    let sparsity = sparsity_verdict(&w_set, config.w_tail.as_ref())?;

    // operators and the flank-middle-flank product
    let left = assemble_flanks(&config.flanks_left, space, cutoff)?;
    let right = assemble_flanks(&config.flanks_right, space, cutoff)?;
    let middle = TruncatedOperator::assemble(&config.middle, space, cutoff)?;
    let mut product = middle.clone();
    for op in left.iter().rev() {
        product = op.compose(&product)?;
    }
    for op in &right {
        product = product.compose(op)?;
    }

    // divide the diagonal flank action back out where W permits
    let row_scale = eigenvalue_products(&config.flanks_left, space, cutoff)?;
    let col_scale = eigenvalue_products(&config.flanks_right, space, cutoff)?;
    let in_w = |d: u32| zero_degrees.binary_search(&d).is_ok();
    let basis = middle.basis();
    let mut recovered_max_deviation = 0.0f64;
    let mut recovery_violations = Vec::new();
    for (row, k) in basis.indices().iter().enumerate() {
        if in_w(k.degree()) {
            continue;
        }
        let d_k = row_scale[k.degree() as usize];
        for (col, m) in basis.indices().iter().enumerate() {
            if in_w(m.degree()) {
                continue;
            }
            let c_m = col_scale[m.degree() as usize];
            let recovered = product.matrix()[(row, col)] / Complex64::new(d_k * c_m, 0.0);
            let deviation = (recovered - middle.matrix()[(row, col)]).norm();
            recovered_max_deviation = recovered_max_deviation.max(deviation);
            if deviation > RECOVERY_TOLERANCE {
                recovery_violations.push(RecoveryViolation {
                    m: m.clone(),
                    k: k.clone(),
                    deviation,
                });
            }
        }
    }

    let reconstruction = if sparsity == SparsityVerdict::SparseSumConverges {
        let d_c = config.support_degree + zero_degrees.len() as u32 + 2;
        let system = build_constraints(config.support_degree, &zero_degrees, d_c, space)?;
        Some(nullspace_certificate(&system)?)
    } else {
        None
    };

    Ok(ExperimentReport {
        space: *space,
        cutoff,
        flank_certificates: certificates,
        zero_degrees,
        zero_margin: margin,
        sparsity,
        product_max_abs: product.max_abs_entry(),
        product_frobenius: product.frobenius_norm(),
        product_exact: product.exact_entries(),
        middle_structurally_zero: config.middle.canonicalized().terms().is_empty(),
        recovered_max_deviation,
        recovery_violations,
        reconstruction,
    })
}

/// Result of minimizing the product norm over middle symbols in a window.
#[derive(Clone, Debug, Serialize)]
pub struct NearZeroSearch {
    /// Smallest singular value of the coefficients-to-product-entries map:
    /// the minimal Frobenius norm of the flanked product over unit-norm
    /// middle coefficient vectors.
    pub sigma_min: f64,
    /// Monomial pairs (a, b) spanning the middle window, column order.
    pub pairs: Vec<(MultiIndex, MultiIndex)>,
    /// Minimizing unit coefficient vector, (re, im) per pair.
    pub minimizer: Vec<(f64, f64)>,
}

/// Scans all middles sum c_(a,b) z^a zbar^b with |a|, |b| <= support for the
/// one the flanks come closest to annihilating. The map from coefficients to
/// product entries is linear; each column is built by assembling the unit
/// monomial symbol and composing it with the flank products, and sigma_min
/// of the stacked matrix is the answer. `budget` caps the map size
/// (rows x columns) before any assembly happens.
pub fn near_zero_search(
    flanks_left: &[RadialProfile],
    flanks_right: &[RadialProfile],
    support: u32,
    space: &SpaceParams,
    cutoff: u32,
    budget: usize,
) -> Result<NearZeroSearch> {
    let window = crate::indexing::enumerate_basis(space, support);
    let matrix_dim = crate::indexing::enumerate_basis(space, cutoff).size();
    let pairs: Vec<(MultiIndex, MultiIndex)> = window
        .indices()
        .iter()
        .flat_map(|a| window.indices().iter().map(move |b| (a.clone(), b.clone())))
        .collect();
    let rows = matrix_dim * matrix_dim;
    let cols = pairs.len();
    if rows.saturating_mul(cols) > budget {
        return Err(Error::BudgetExhausted(format!(
            "near-zero map needs {rows} x {cols} entries, over the budget of {budget}"
        )));
    }

    let identity = |space: &SpaceParams| -> Result<TruncatedOperator> {
        let one = SymbolExpr::radial(space.dimension, RadialProfile::constant(1.0))?;
        TruncatedOperator::assemble(&one, space, cutoff)
    };
    let mut left = identity(space)?;
    for p in flanks_left {
        let f = SymbolExpr::radial(space.dimension, p.clone())?;
        left = left.compose(&TruncatedOperator::assemble(&f, space, cutoff)?)?;
    }
    let mut right = identity(space)?;
    for p in flanks_right {
        let f = SymbolExpr::radial(space.dimension, p.clone())?;
        right = right.compose(&TruncatedOperator::assemble(&f, space, cutoff)?)?;
    }

    let mut map = DMatrix::<Complex64>::zeros(rows, cols);
    for (ci, (a, b)) in pairs.iter().enumerate() {
        let unit = SymbolExpr::monomial(space.dimension, a.clone(), b.clone())?;
        let op = TruncatedOperator::assemble(&unit, space, cutoff)?;
        let flanked = left.compose(&op)?.compose(&right)?;
        for (ri, v) in flanked.matrix().iter().enumerate() {
            map[(ri, ci)] = *v;
        }
    }

    let svd = map.svd(false, true);
    let order = svd.singular_values.len();
    let sigma_min = svd.singular_values[order - 1];
    let v_t = svd.v_t.expect("requested right vectors");
    let minimizer: Vec<(f64, f64)> = (0..cols)
        .map(|c| {
            // right singular vector: conjugate-transpose row of V^T
            let v = v_t[(order - 1, c)].conj();
            (v.re, v.im)
        })
        .collect();
    Ok(NearZeroSearch {
        sigma_min,
        pairs,
        minimizer,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::profile_with_zeros;
    use crate::symbols::SymbolTerm;
    use approx::assert_abs_diff_eq;
    use rand::prelude::*;

    fn ball(n: usize) -> SpaceParams {
        SpaceParams::unweighted(n).unwrap()
    }

    fn random_middle(rng: &mut impl Rng, n: usize, deg: u32) -> SymbolExpr {
        let terms: Vec<SymbolTerm> = (0..rng.random_range(1..=3))
            .map(|_| SymbolTerm {
                coeff: Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
                p: MultiIndex((0..n).map(|_| rng.random_range(0..=deg)).collect()),
                q: MultiIndex((0..n).map(|_| rng.random_range(0..=deg)).collect()),
                rho: RadialProfile::PolyT2(
                    (0..=rng.random_range(0..=2usize))
                        .map(|_| rng.random_range(-1.0..1.0))
                        .collect(),
                ),
            })
            .collect();
        SymbolExpr::new(n, terms).unwrap()
    }

    fn base_config(n: usize, middle: SymbolExpr) -> ExperimentConfig {
        let space = ball(n);
        ExperimentConfig {
            space,
            flanks_left: vec![profile_with_zeros(&[0], &space).unwrap()],
            flanks_right: vec![RadialProfile::PolyT2(vec![0.5, 0.25])],
            middle,
            cutoff: 6,
            eps_zero: 1e-10,
            support_degree: 2,
            w_tail: None,
        }
    }

    #[test]
    fn recovery_divides_the_flanks_back_out() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(71);
        for n in 1..=2usize {
            let config = base_config(n, random_middle(&mut rng, n, 2));
            let report = run_experiment(&config).unwrap();
            assert_eq!(report.zero_degrees, vec![0]);
            assert!(report.product_exact);
            assert!(
                report.recovered_max_deviation <= RECOVERY_TOLERANCE,
                "recovery deviation {} too large",
                report.recovered_max_deviation
            );
            assert!(report.recovery_violations.is_empty());
            assert_eq!(report.flank_certificates.len(), 2);
            assert_eq!(report.sparsity, SparsityVerdict::SparseSumConverges);
            let cert = report.reconstruction.expect("sparse W gets a certificate");
            assert!(matches!(
                cert.verdict,
                crate::reconstruction::NullspaceVerdict::OnlyZero
            ));
        }
    }

    #[test]
    fn structurally_zero_middle_gives_an_exactly_zero_product() {
        let zero = SymbolExpr::radial(1, RadialProfile::PolyT2(vec![0.0])).unwrap();
        let config = base_config(1, zero);
        let report = run_experiment(&config).unwrap();
        assert!(report.middle_structurally_zero);
        assert_eq!(report.product_max_abs, 0.0);
        assert_eq!(report.product_frobenius, 0.0);
    }

    #[test]
    fn product_scales_linearly_with_the_middle() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(73);
        let middle = random_middle(&mut rng, 1, 2);
        let scaled = {
            let terms: Vec<SymbolTerm> = middle
                .terms()
                .iter()
                .map(|t| SymbolTerm {
                    coeff: t.coeff * 3.0,
                    ..t.clone()
                })
                .collect();
            SymbolExpr::new(1, terms).unwrap()
        };
        let a = run_experiment(&base_config(1, middle)).unwrap();
        let b = run_experiment(&base_config(1, scaled)).unwrap();
        assert_abs_diff_eq!(
            b.product_frobenius,
            3.0 * a.product_frobenius,
            epsilon = 1e-12 * (1.0 + a.product_frobenius)
        );
        assert_abs_diff_eq!(
            b.product_max_abs,
            3.0 * a.product_max_abs,
            epsilon = 1e-12 * (1.0 + a.product_max_abs)
        );
    }

    #[test]
    fn permuting_radial_flanks_leaves_the_product_unchanged() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(79);
        let middle = random_middle(&mut rng, 1, 2);
        let f1 = RadialProfile::PolyT2(vec![0.4, -0.2, 0.1]);
        let f2 = RadialProfile::PolyT2(vec![0.9, 0.3]);
        let mut config = base_config(1, middle);
        config.flanks_left = vec![f1.clone(), f2.clone()];
        let a = run_experiment(&config).unwrap();
        config.flanks_left = vec![f2, f1];
        let b = run_experiment(&config).unwrap();
        // diagonal factors commute entry by entry, so the permuted product
        // is bitwise identical
        assert_eq!(a.product_frobenius, b.product_frobenius);
        assert_eq!(a.product_max_abs, b.product_max_abs);
    }

    #[test]
    fn uncertifiable_flanks_are_refused() {
        let mut config = base_config(1, SymbolExpr::radial(1, RadialProfile::constant(1.0)).unwrap());
        config.flanks_left = vec![RadialProfile::PolyT2(vec![0.0])];
        let err = run_experiment(&config).unwrap_err();
        assert!(matches!(err, Error::NotCertified(_)));

        // an eigenvalue inside the ambiguity band surfaces verbatim
        let mut config = base_config(1, SymbolExpr::radial(1, RadialProfile::constant(1.0)).unwrap());
        config.flanks_left = vec![RadialProfile::PolyT2(vec![-0.5, 1.0])];
        config.eps_zero = 0.02;
        let err = run_experiment(&config).unwrap_err();
        assert!(matches!(err, Error::AmbiguousZero { .. }));
    }

    #[test]
    fn near_zero_search_is_positive_and_w_monotone() {
        let space = ball(1);
        let no_zeros = vec![RadialProfile::constant(1.0)];
        let one_zero = vec![profile_with_zeros(&[0], &space).unwrap()];
        let budget = 1_000_000;
        let free = near_zero_search(&no_zeros, &no_zeros, 2, &space, 5, budget).unwrap();
        assert!(free.sigma_min > 0.0, "no zeros: map must be injective");
        let pinned = near_zero_search(&one_zero, &no_zeros, 2, &space, 5, budget).unwrap();
        assert!(
            pinned.sigma_min <= free.sigma_min + 1e-12,
            "enlarging W cannot increase the minimum: {} vs {}",
            pinned.sigma_min,
            free.sigma_min
        );
        assert_eq!(free.pairs.len(), 9);
        assert_eq!(free.minimizer.len(), 9);
        let norm: f64 = free
            .minimizer
            .iter()
            .map(|(re, im)| re * re + im * im)
            .sum();
        assert_abs_diff_eq!(norm, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn near_zero_search_respects_its_budget() {
        let space = ball(1);
        let flanks = vec![RadialProfile::constant(1.0)];
        let err = near_zero_search(&flanks, &flanks, 2, &space, 5, 10).unwrap_err();
        assert!(matches!(err, Error::BudgetExhausted(_)));
    }

    #[test]
    fn configs_round_trip_as_json() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(83);
        let config = base_config(2, random_middle(&mut rng, 2, 1));
        let text = serde_json::to_string_pretty(&config).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back.space, config.space);
        assert_eq!(back.flanks_left, config.flanks_left);
        assert_eq!(back.flanks_right, config.flanks_right);
        assert_eq!(back.middle, config.middle);
        assert_eq!(back.cutoff, config.cutoff);
        assert_eq!(back.support_degree, config.support_degree);

        // malformed middles are rejected through the schema walker
        let bad = text.replace("\"dim\": 2", "\"dim\": 0");
        assert!(serde_json::from_str::<ExperimentConfig>(&bad).is_err());
    }
}
