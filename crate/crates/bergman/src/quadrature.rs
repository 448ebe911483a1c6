//! Certified integration on [0,1] and the ball.
//!
//! Everything here reduces to Gauss-Jacobi rules in the variable u = t^2,
//! where polynomial radial profiles become polynomials of known degree, so
//! "exact" is a statement about degrees rather than a tolerance. Profiles
//! outside that class fall back to an adaptive bisection integrator with an
//! explicit node budget.

use std::collections::BinaryHeap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::indexing::{ln_gamma, MultiIndex, SpaceParams};
use crate::symbols::{eval_radial, RadialProfile, SymbolExpr};

pub(crate) fn log_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// J(x, e) = integral over [0,1] of u^x (1-u)^e du.
pub(crate) fn u_moment(x: f64, e: f64) -> f64 {
    log_beta(x + 1.0, e + 1.0).exp()
}

/// Nodes and weights on [0,1].
#[derive(Clone, Debug)]
pub struct QuadRule01 {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadRule01 {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Gauss rule for the weight u^exp_u (1-u)^exp_one_minus_u on [0,1],
/// exact for polynomial integrands of degree <= 2*npoints - 1.
///
/// Built by the Golub-Welsch eigenvalue method from the Jacobi three-term
/// recurrence, then mapped from [-1,1].
pub fn gauss_jacobi_01(npoints: usize, exp_one_minus_u: f64, exp_u: f64) -> Result<QuadRule01> {
    let a = exp_one_minus_u;
    let b = exp_u;
    if npoints == 0 {
        return Err(Error::InvalidParam("quadrature rule needs >= 1 node".into()));
    }
    if !a.is_finite() || !b.is_finite() || a <= -1.0 || b <= -1.0 || a + b <= -1.0 {
        return Err(Error::InvalidParam(format!(
            "Jacobi exponents must be > -1 with sum > -1, got ({a}, {b})"
        )));
    }

    let n = npoints;
    let mut jac = DMatrix::<f64>::zeros(n, n);
    jac[(0, 0)] = (b - a) / (a + b + 2.0);
    for k in 1..n {
        let kf = k as f64;
        let s = 2.0 * kf + a + b;
        jac[(k, k)] = (b * b - a * a) / (s * (s + 2.0));
        let beta = 4.0 * kf * (kf + a) * (kf + b) * (kf + a + b) / (s * s * (s + 1.0) * (s - 1.0));
        let off = beta.sqrt();
        jac[(k, k - 1)] = off;
        jac[(k - 1, k)] = off;
    }

    let eig = nalgebra::linalg::SymmetricEigen::new(jac);
    let mass = log_beta(a + 1.0, b + 1.0).exp();
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|j| {
            let x = eig.eigenvalues[j];
            let v0 = eig.eigenvectors[(0, j)];
            ((x + 1.0) / 2.0, mass * v0 * v0)
        })
        .collect();
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
    Ok(QuadRule01 {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
    })
}

pub fn gauss_legendre_01(npoints: usize) -> Result<QuadRule01> {
    gauss_jacobi_01(npoints, 0.0, 0.0)
}

/// Rule in the variable t for the measure t^(2(n+s)-1) (1-t^2)^alpha dt on
/// [0,1]; polynomials in t^2 up to the declared degree integrate exactly.
#[derive(Clone, Debug)]
pub struct RadialRule {
    t_nodes: Vec<f64>,
    weights: Vec<f64>,
    exact_t2_degree: u32,
    shift: f64,
}

impl RadialRule {
    pub fn new(space: &SpaceParams, exact_t2_degree: u32) -> Result<Self> {
        RadialRule::shifted(space, 0.0, exact_t2_degree)
    }

    /// Same measure with the radial exponent raised by 2s, the weight seen by
    /// the degree-s shell.
    pub fn shifted(space: &SpaceParams, s: f64, exact_t2_degree: u32) -> Result<Self> {
        if !s.is_finite() || s < 0.0 {
            return Err(Error::InvalidParam(format!("shell parameter s = {s} must be >= 0")));
        }
        let x = space.dimension as f64 + s - 1.0;
        let npoints = exact_t2_degree as usize / 2 + 1;
        let rule = gauss_jacobi_01(npoints, space.weight_alpha, x)?;
        Ok(RadialRule {
            t_nodes: rule.nodes.iter().map(|u| u.sqrt()).collect(),
            weights: rule.weights.iter().map(|w| w / 2.0).collect(),
            exact_t2_degree,
            shift: s,
        })
    }

    pub fn t_nodes(&self) -> &[f64] {
        &self.t_nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn exact_t2_degree(&self) -> u32 {
        self.exact_t2_degree
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn integrate_profile(&self, rho: &RadialProfile) -> Result<f64> {
        let mut acc = 0.0;
        for (t, w) in self.t_nodes.iter().zip(&self.weights) {
            acc += w * eval_radial(rho, *t)?;
        }
        Ok(acc)
    }

    pub fn integrate_fn(&self, g: impl Fn(f64) -> f64) -> f64 {
        self.t_nodes
            .iter()
            .zip(&self.weights)
            .map(|(t, w)| w * g(*t))
            .sum()
    }

    /// Mass of the measure itself (integrand 1).
    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QuadPath {
    /// Gauss for polynomial profiles, adaptive otherwise.
    Auto,
    Gauss,
    Adaptive,
}

#[derive(Clone, Copy, Debug)]
pub struct QuadOptions {
    pub path: QuadPath,
    /// Absolute tolerance on the normalized (mean) value, adaptive path.
    pub tol: f64,
    /// Maximum profile evaluations before the adaptive path gives up.
    pub node_budget: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            path: QuadPath::Auto,
            tol: 1e-12,
            node_budget: 1_000_000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QuadPathUsed {
    Gauss,
    Adaptive,
}

#[derive(Clone, Copy, Debug)]
pub struct RadialEval {
    pub value: f64,
    pub err_est: f64,
    pub path: QuadPathUsed,
}

/// The normalized radial mean at shell parameter s:
///
///   integral t^(2(n+s)-1) (1-t^2)^alpha rho(t) dt
///   ------------------------------------------------
///   integral t^(2(n+s)-1) (1-t^2)^alpha dt
///
/// which at alpha = 0 equals 2(n+s) * integral t^(2(n+s)-1) rho(t) dt.
pub fn radial_integral(rho: &RadialProfile, s: f64, space: &SpaceParams) -> Result<f64> {
    Ok(radial_integral_with(rho, s, space, &QuadOptions::default())?.value)
}

pub fn radial_integral_with(
    rho: &RadialProfile,
    s: f64,
    space: &SpaceParams,
    opts: &QuadOptions,
) -> Result<RadialEval> {
    if !s.is_finite() || s < 0.0 {
        return Err(Error::InvalidParam(format!("shell parameter s = {s} must be >= 0")));
    }
    let path = match opts.path {
        QuadPath::Auto => {
            if rho.as_u_poly().is_some() || matches!(rho, RadialProfile::PowerT(_)) {
                QuadPath::Gauss
            } else {
                QuadPath::Adaptive
            }
        }
        p => p,
    };
    match path {
        QuadPath::Gauss => {
            let value = if let Some(poly) = rho.as_u_poly() {
                let rule = RadialRule::shifted(space, s, (poly.len() - 1) as u32)?;
                rule.integrate_profile(rho)? / rule.total_mass()
            } else if let RadialProfile::PowerT(a) = rho {
                // fold t^(2a) into the quadrature weight; the value is the
                // mass ratio of the shifted rules
                let num = RadialRule::shifted(space, s + a, 0)?;
                let den = RadialRule::shifted(space, s, 0)?;
                num.total_mass() / den.total_mass()
            } else {
                return Err(Error::UnsupportedProfile(
                    "the Gauss path requires poly_t2 or power_t profiles".into(),
                ));
            };
            Ok(RadialEval {
                value,
                err_est: 0.0,
                path: QuadPathUsed::Gauss,
            })
        }
        QuadPath::Adaptive => {
            let x = space.dimension as f64 + s - 1.0;
            let (value, err_est) =
                adaptive_mean(rho, x, space.weight_alpha, opts.tol, opts.node_budget)?;
            Ok(RadialEval {
                value,
                err_est,
                path: QuadPathUsed::Adaptive,
            })
        }
        QuadPath::Auto => unreachable!("Auto resolves to a concrete path above"),
    }
}

/// Quadrature-based ratio of weighted radial moments,
/// J(n+s-1, alpha) / J(n-1, alpha): the alpha != 0 monomial norm factor.
pub(crate) fn radial_moment_ratio(space: &SpaceParams, degree: u32) -> f64 {
    let n = space.dimension as f64;
    let rule = gauss_jacobi_01(degree as usize / 2 + 1, space.weight_alpha, n - 1.0)
        .expect("valid space parameters yield a valid rule");
    let num: f64 = rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .map(|(u, w)| w * u.powi(degree as i32))
        .sum();
    num / rule.total_weight()
}

// --- adaptive fallback ----------------------------------------------------

const GAUSS_LO: usize = 15;
const GAUSS_HI: usize = 25;

struct Segment {
    err: f64,
    a: f64,
    b: f64,
    touches_one: bool,
    value: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err && self.a == other.a
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // max-heap on error; ties broken by position for determinism
        self.err
            .total_cmp(&other.err)
            .then(self.a.total_cmp(&other.a))
    }
}

struct AdaptiveCtx {
    interior_lo: QuadRule01,
    interior_hi: QuadRule01,
    endpoint_lo: QuadRule01,
    endpoint_hi: QuadRule01,
    x: f64,
    alpha: f64,
}

impl AdaptiveCtx {
    fn eval_segment(&self, rho: &RadialProfile, a: f64, b: f64, touches_one: bool) -> Result<Segment> {
        let apply = |rule: &QuadRule01| -> Result<f64> {
            let mut acc = 0.0;
            if touches_one {
                // u = 1 - (1-a) w maps [0,1] onto [a,1]; the w^alpha factor
                // lives in the rule's weight
                let scale = (1.0 - a).powf(self.alpha + 1.0);
                for (w, wt) in rule.nodes.iter().zip(&rule.weights) {
                    let u = 1.0 - (1.0 - a) * w;
                    acc += wt * u.powf(self.x) * eval_radial(rho, u.sqrt())?;
                }
                acc *= scale;
            } else {
                let len = b - a;
                for (p, wt) in rule.nodes.iter().zip(&rule.weights) {
                    let u = a + len * p;
                    acc += wt * u.powf(self.x) * (1.0 - u).powf(self.alpha) * eval_radial(rho, u.sqrt())?;
                }
                acc *= len;
            }
            Ok(acc)
        };
        let (lo, hi) = if touches_one {
            (apply(&self.endpoint_lo)?, apply(&self.endpoint_hi)?)
        } else {
            (apply(&self.interior_lo)?, apply(&self.interior_hi)?)
        };
        Ok(Segment {
            err: (hi - lo).abs(),
            a,
            b,
            touches_one,
            value: hi,
        })
    }
}

fn adaptive_mean(
    rho: &RadialProfile,
    x: f64,
    alpha: f64,
    tol: f64,
    node_budget: usize,
) -> Result<(f64, f64)> {
    let jmass = u_moment(x, alpha);
    let target = tol * jmass;
    let ctx = AdaptiveCtx {
        interior_lo: gauss_legendre_01(GAUSS_LO)?,
        interior_hi: gauss_legendre_01(GAUSS_HI)?,
        endpoint_lo: gauss_jacobi_01(GAUSS_LO, 0.0, alpha)?,
        endpoint_hi: gauss_jacobi_01(GAUSS_HI, 0.0, alpha)?,
        x,
        alpha,
    };

    let mut cuts: Vec<f64> = rho.interior_breaks().iter().map(|t| t * t).collect();
    cuts.push(0.0);
    cuts.push(1.0);
    cuts.sort_by(|p, q| p.total_cmp(q));
    cuts.dedup();

    let mut heap = BinaryHeap::new();
    let mut total_err = 0.0;
    let mut evals = 0usize;
    for w in cuts.windows(2) {
        let touches_one = w[1] == 1.0;
        let seg = ctx.eval_segment(rho, w[0], w[1], touches_one)?;
        evals += GAUSS_LO + GAUSS_HI;
        total_err += seg.err;
        heap.push(seg);
    }

    while total_err > target {
        let worst = heap.pop().expect("heap holds at least one segment");
        if worst.b - worst.a < 1e-14 || evals + 2 * (GAUSS_LO + GAUSS_HI) > node_budget {
            return Err(Error::QuadratureBudget {
                estimate: total_err / jmass,
                tol,
                budget: node_budget,
            });
        }
        total_err -= worst.err;
        let mid = 0.5 * (worst.a + worst.b);
        let left = ctx.eval_segment(rho, worst.a, mid, false)?;
        let right = ctx.eval_segment(rho, mid, worst.b, worst.touches_one)?;
        evals += 2 * (GAUSS_LO + GAUSS_HI);
        total_err += left.err + right.err;
        heap.push(left);
        heap.push(right);
    }

    // deterministic left-to-right final summation
    let mut segs: Vec<Segment> = heap.into_vec();
    segs.sort_by(|p, q| p.a.total_cmp(&q.a));
    let value: f64 = segs.iter().map(|s| s.value).sum();
    Ok((value / jmass, total_err / jmass))
}

// --- ball cubature ----------------------------------------------------------

/// Tensor cubature for the normalized weighted measure on the ball in C^n,
/// in the layered coordinates z_l = sqrt(u_l) * prod_{i<l} sqrt(1-u_i) * e^(i
/// theta_l), where the measure is
///
///   prod_k (k+alpha) * prod_l (1-u_l)^(n-l+alpha) du_l dtheta_l/(2 pi).
///
/// Monomials z^p zbar^q with |p|,|q| <= the declared degree and polynomial
/// radial profiles up to the declared u-degree integrate exactly.
#[derive(Clone, Debug)]
pub struct BallRule {
    space: SpaceParams,
    max_monomial_degree: u32,
    max_profile_degree: u32,
    n_theta: usize,
    axes: Vec<QuadRule01>,
    measure_const: f64,
}

impl BallRule {
    pub fn new(
        space: &SpaceParams,
        max_monomial_degree: u32,
        max_profile_degree: u32,
    ) -> Result<Self> {
        let n_theta = 2 * max_monomial_degree as usize + 1;
        let n_radial = (max_monomial_degree + max_profile_degree) as usize / 2 + 1;
        BallRule::with_node_counts(space, max_monomial_degree, max_profile_degree, n_theta, n_radial)
    }

    /// Explicit node counts (for stability checks); they must still cover the
    /// declared degrees.
    pub fn with_node_counts(
        space: &SpaceParams,
        max_monomial_degree: u32,
        max_profile_degree: u32,
        n_theta: usize,
        n_radial: usize,
    ) -> Result<Self> {
        if n_theta < 2 * max_monomial_degree as usize + 1 {
            return Err(Error::InvalidParam(format!(
                "{n_theta} circle nodes cannot resolve monomial degree {max_monomial_degree}"
            )));
        }
        if 2 * n_radial < (max_monomial_degree + max_profile_degree) as usize + 1 {
            return Err(Error::InvalidParam(format!(
                "{n_radial} radial nodes cannot resolve u-degree {}",
                max_monomial_degree + max_profile_degree
            )));
        }
        let n = space.dimension;
        let alpha = space.weight_alpha;
        let mut axes = Vec::with_capacity(n);
        for l in 0..n {
            axes.push(gauss_jacobi_01(
                n_radial,
                (n - 1 - l) as f64 + alpha,
                0.0,
            )?);
        }
        let measure_const = (1..=n).map(|k| k as f64 + alpha).product();
        Ok(BallRule {
            space: space.clone(),
            max_monomial_degree,
            max_profile_degree,
            n_theta,
            axes,
            measure_const,
        })
    }

    pub fn space(&self) -> &SpaceParams {
        &self.space
    }

    pub fn max_monomial_degree(&self) -> u32 {
        self.max_monomial_degree
    }

    /// Discrete circle average of e^(i d theta); exactly the indicator of
    /// d = 0 up to roundoff when |d| < n_theta.
    fn circle_average(&self, d: i64) -> Complex64 {
        let n = self.n_theta as i64;
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..n {
            let angle = std::f64::consts::TAU * ((d * j).rem_euclid(n) as f64) / n as f64;
            acc += Complex64::new(angle.cos(), angle.sin());
        }
        acc / n as f64
    }

    /// integral of f(z) * z^m * zbar^k over the ball, computed term by term
    /// as (angular average) x (radial tensor sum).
    pub fn integrate(&self, f: &SymbolExpr, m: &MultiIndex, k: &MultiIndex) -> Result<Complex64> {
        let n = self.space.dimension;
        if f.dim() != n || m.dim() != n || k.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: f.dim().max(m.dim()).max(k.dim()),
            });
        }
        let mut total = Complex64::new(0.0, 0.0);
        for term in f.terms() {
            let big_p = term.p.plus(m);
            let big_q = term.q.plus(k);
            let needed = big_p.degree().max(big_q.degree());
            if needed > self.max_monomial_degree {
                return Err(Error::ExactnessExceeded {
                    needed,
                    declared: self.max_monomial_degree,
                });
            }
            let poly = term.rho.as_u_poly().ok_or_else(|| {
                Error::UnsupportedProfile(
                    "ball cubature requires poly_t2 or integer power_t profiles".into(),
                )
            })?;
            if (poly.len() - 1) as u32 > self.max_profile_degree {
                return Err(Error::ExactnessExceeded {
                    needed: (poly.len() - 1) as u32,
                    declared: self.max_profile_degree,
                });
            }

            let mut angular = Complex64::new(1.0, 0.0);
            for l in 0..n {
                let d = big_p.entries()[l] as i64 - big_q.entries()[l] as i64;
                angular *= self.circle_average(d);
            }
            // true angular factor is 0 or 1; residues of the honest sums stay
            // below ~1e-14, so this cut keeps the certified 1e-12 intact
            if angular.norm() <= 1e-13 {
                continue;
            }

            // angular factor ~1 forces p+m = q+k, so the exponents are whole
            let e: Vec<u32> = big_p.entries().to_vec();
            let tails: Vec<u32> = (0..n)
                .map(|l| e[l + 1..].iter().sum::<u32>())
                .collect();
            let mut radial = 0.0;
            let dims: Vec<usize> = self.axes.iter().map(|r| r.len()).collect();
            let mut idx = vec![0usize; n];
            'tensor: loop {
                let mut w = 1.0;
                let mut one_minus_prod = 1.0;
                for l in 0..n {
                    let u = self.axes[l].nodes[idx[l]];
                    w *= self.axes[l].weights[idx[l]]
                        * u.powi(e[l] as i32)
                        * (1.0 - u).powi(tails[l] as i32);
                    one_minus_prod *= 1.0 - u;
                }
                let t_sq = 1.0 - one_minus_prod;
                let rho_val = poly.iter().rev().fold(0.0, |acc, c| acc * t_sq + c);
                radial += w * rho_val;
                let mut l = 0;
                loop {
                    idx[l] += 1;
                    if idx[l] < dims[l] {
                        break;
                    }
                    idx[l] = 0;
                    l += 1;
                    if l == n {
                        break 'tensor;
                    }
                }
            }
            total += term.coeff * angular * (self.measure_const * radial);
        }
        Ok(total)
    }

    /// The full tensor grid as explicit points of the ball with weights,
    /// for pointwise (black-box) integration. Exact on the same class as
    /// `integrate`.
    pub fn dense_nodes(&self) -> Vec<(Vec<Complex64>, f64)> {
        let n = self.space.dimension;
        let mut out = Vec::new();
        let mut radial_idx = vec![0usize; n];
        let dims: Vec<usize> = self.axes.iter().map(|r| r.len()).collect();
        'radial: loop {
            let mut base_w = self.measure_const;
            let mut amp = Vec::with_capacity(n);
            let mut carry = 1.0;
            for l in 0..n {
                let u = self.axes[l].nodes[radial_idx[l]];
                base_w *= self.axes[l].weights[radial_idx[l]] / self.n_theta as f64;
                amp.push(carry * u.sqrt());
                carry *= (1.0 - u).sqrt();
            }
            let mut theta_idx = vec![0usize; n];
            'angular: loop {
                let z: Vec<Complex64> = (0..n)
                    .map(|l| {
                        let angle =
                            std::f64::consts::TAU * theta_idx[l] as f64 / self.n_theta as f64;
                        Complex64::new(angle.cos(), angle.sin()) * amp[l]
                    })
                    .collect();
                out.push((z, base_w));
                let mut l = 0;
                loop {
                    theta_idx[l] += 1;
                    if theta_idx[l] < self.n_theta {
                        break;
                    }
                    theta_idx[l] = 0;
                    l += 1;
                    if l == n {
                        break 'angular;
                    }
                }
            }
            let mut l = 0;
            loop {
                radial_idx[l] += 1;
                if radial_idx[l] < dims[l] {
                    break;
                }
                radial_idx[l] = 0;
                l += 1;
                if l == n {
                    break 'radial;
                }
            }
        }
        out
    }
}

/// integral of f(z) * z^m * zbar^k dnu over the ball, with a rule sized for
/// the declared monomial exactness degree.
pub fn ball_integral(
    f: &SymbolExpr,
    m: &MultiIndex,
    k: &MultiIndex,
    space: &SpaceParams,
    d_exactness: u32,
) -> Result<Complex64> {
    let mut profile_degree = 0u32;
    for term in f.terms() {
        let poly = term.rho.as_u_poly().ok_or_else(|| {
            Error::UnsupportedProfile(
                "ball cubature requires poly_t2 or integer power_t profiles".into(),
            )
        })?;
        profile_degree = profile_degree.max((poly.len() - 1) as u32);
    }
    let rule = BallRule::new(space, d_exactness, profile_degree)?;
    rule.integrate(f, m, k)
}

/// Both sides of the polar slicing identity
///
///   lhs = integral over B_n of g dnu_n
///   rhs = n * integral over B_1 of (1-|z1|^2)^(n-1)
///            [ integral over B_(n-1) of g(z1, sqrt(1-|z1|^2) w) dnu_(n-1) ] dnu_1
///
/// computed with independent rules (factored tensor vs pointwise nested).
#[derive(Clone, Copy, Debug)]
pub struct SlicingReport {
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub discrepancy: f64,
}

pub fn slicing_check(g: &SymbolExpr, space: &SpaceParams) -> Result<SlicingReport> {
    let n = space.dimension;
    if g.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: g.dim(),
        });
    }
    if n < 2 {
        return Err(Error::InvalidParam("slicing needs dimension >= 2".into()));
    }
    if !space.is_unweighted() {
        return Err(Error::InvalidParam(
            "the slicing identity is stated for the unweighted measure".into(),
        ));
    }
    let mut profile_degree = 0u32;
    for term in g.terms() {
        let poly = term.rho.as_u_poly().ok_or_else(|| {
            Error::UnsupportedProfile("slicing check requires polynomial radial profiles".into())
        })?;
        profile_degree = profile_degree.max((poly.len() - 1) as u32);
    }
    let deg = g.monomial_degree();

    let zero = MultiIndex::zero(n);
    let lhs = ball_integral(g, &zero, &zero, space, deg)?;

    // pointwise nested side, sized with margins and node counts different
    // from the factored side
    let inner_space = SpaceParams::unweighted(n - 1)?;
    let inner = BallRule::with_node_counts(
        &inner_space,
        deg,
        profile_degree,
        2 * deg as usize + 4,
        (deg + profile_degree) as usize + 2,
    )?;
    let inner_nodes = inner.dense_nodes();

    let outer_u = gauss_jacobi_01((deg + profile_degree) as usize + 2, (n - 1) as f64, 0.0)?;
    let n_theta_out = 2 * deg as usize + 2;

    let mut rhs = Complex64::new(0.0, 0.0);
    let mut z = vec![Complex64::new(0.0, 0.0); n];
    for (u, wu) in outer_u.nodes.iter().zip(&outer_u.weights) {
        let r = u.sqrt();
        let c = (1.0 - u).sqrt();
        for j in 0..n_theta_out {
            let angle = std::f64::consts::TAU * j as f64 / n_theta_out as f64;
            let z1 = Complex64::new(angle.cos(), angle.sin()) * r;
            let mut slice_sum = Complex64::new(0.0, 0.0);
            for (w_pt, wt) in &inner_nodes {
                z[0] = z1;
                for (dst, src) in z[1..].iter_mut().zip(w_pt) {
                    *dst = *src * c;
                }
                slice_sum += g.eval(&z)? * *wt;
            }
            rhs += slice_sum * (wu / n_theta_out as f64);
        }
    }
    rhs *= n as f64;

    Ok(SlicingReport {
        lhs,
        rhs,
        discrepancy: (lhs - rhs).norm(),
    })
}
