use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::indexing::MultiIndex;

/// Radial dependence of a symbol term, as a function of t = |z| on [0, 1).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum RadialProfile {
    /// sum_j a_j t^(2j); coefficients indexed by the power of t^2.
    #[serde(rename = "poly_t2")]
    PolyT2(Vec<f64>),
    /// t^(2a) for real a >= 0.
    #[serde(rename = "power_t")]
    PowerT(f64),
    /// Piecewise constant: value values[i] on [breaks[i], breaks[i+1]),
    /// with breaks running from 0 to 1.
    #[serde(rename = "step")]
    Step(StepProfile),
    /// Monotone-cubic interpolation through (grid[i], values[i]).
    #[serde(rename = "sampled")]
    Sampled(SampledProfile),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepProfile {
    pub breaks: Vec<f64>,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SampledProfile {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    #[serde(skip)]
    slopes: OnceLock<Vec<f64>>,
}

impl PartialEq for SampledProfile {
    fn eq(&self, other: &Self) -> bool {
        self.grid == other.grid && self.values == other.values
    }
}

impl SampledProfile {
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Self {
        SampledProfile {
            grid,
            values,
            slopes: OnceLock::new(),
        }
    }

    /// Fritsch-Carlson tangents: monotone on monotone data, zero slope at
    /// interior sign changes, secant-limited so the interpolant never leaves
    /// the local data range.
    fn tangents(&self) -> &[f64] {
        self.slopes.get_or_init(|| {
            let x = &self.grid;
            let y = &self.values;
            let k = x.len();
            if k == 1 {
                return vec![0.0];
            }
            let d: Vec<f64> = (0..k - 1)
                .map(|i| (y[i + 1] - y[i]) / (x[i + 1] - x[i]))
                .collect();
            let mut m = vec![0.0; k];
            m[0] = d[0];
            m[k - 1] = d[k - 2];
            for i in 1..k - 1 {
                m[i] = if d[i - 1] * d[i] <= 0.0 {
                    0.0
                } else {
                    0.5 * (d[i - 1] + d[i])
                };
            }
            for i in 0..k - 1 {
                if d[i] == 0.0 {
                    m[i] = 0.0;
                    m[i + 1] = 0.0;
                    continue;
                }
                let a = m[i] / d[i];
                let b = m[i + 1] / d[i];
                let r = a * a + b * b;
                if r > 9.0 {
                    let tau = 3.0 / r.sqrt();
                    m[i] = tau * a * d[i];
                    m[i + 1] = tau * b * d[i];
                }
            }
            m
        })
    }

    fn eval(&self, t: f64) -> f64 {
        let x = &self.grid;
        let y = &self.values;
        if t <= x[0] {
            return y[0];
        }
        if t >= x[x.len() - 1] {
            return y[y.len() - 1];
        }
        let m = self.tangents();
        let i = match x.binary_search_by(|v| v.partial_cmp(&t).unwrap()) {
            Ok(i) => return y[i],
            Err(i) => i - 1,
        };
        let h = x[i + 1] - x[i];
        let s = (t - x[i]) / h;
        let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
        let h10 = s * (1.0 - s) * (1.0 - s);
        let h01 = s * s * (3.0 - 2.0 * s);
        let h11 = s * s * (s - 1.0);
        h00 * y[i] + h10 * h * m[i] + h01 * y[i + 1] + h11 * h * m[i + 1]
    }
}

impl RadialProfile {
    /// Constant profile with value c.
    pub fn constant(c: f64) -> Self {
        RadialProfile::PolyT2(vec![c])
    }

    /// Structural validity; `path` prefixes schema diagnostics.
    pub fn validate(&self, path: &str) -> Result<()> {
        let fail = |msg: String| Error::Schema {
            path: path.to_string(),
            message: msg,
        };
        match self {
            RadialProfile::PolyT2(coeffs) => {
                if coeffs.is_empty() {
                    return Err(fail("poly_t2 needs at least one coefficient".into()));
                }
                if let Some(c) = coeffs.iter().find(|c| !c.is_finite()) {
                    return Err(fail(format!("poly_t2 coefficient {c} is not finite")));
                }
            }
            RadialProfile::PowerT(a) => {
                if !a.is_finite() || *a < 0.0 {
                    return Err(fail(format!("power_t exponent must be >= 0, got {a}")));
                }
            }
            RadialProfile::Step(sp) => {
                if sp.breaks.len() < 2 {
                    return Err(fail("step needs breaks from 0 to 1".into()));
                }
                if sp.values.len() + 1 != sp.breaks.len() {
                    return Err(fail(format!(
                        "step needs exactly breaks-1 = {} values, got {}",
                        sp.breaks.len() - 1,
                        sp.values.len()
                    )));
                }
                if sp.breaks[0] != 0.0 || *sp.breaks.last().unwrap() != 1.0 {
                    return Err(fail("step breaks must start at 0 and end at 1".into()));
                }
                if sp.breaks.windows(2).any(|w| !(w[0] < w[1])) {
                    return Err(fail("step breaks must be strictly increasing".into()));
                }
                if sp
                    .breaks
                    .iter()
                    .chain(&sp.values)
                    .any(|v| !v.is_finite())
                {
                    return Err(fail("step entries must be finite".into()));
                }
            }
            RadialProfile::Sampled(sp) => {
                if sp.grid.len() < 2 || sp.grid.len() != sp.values.len() {
                    return Err(fail(
                        "sampled needs matching grid/values with at least two points".into(),
                    ));
                }
                if sp.grid[0] < 0.0 || *sp.grid.last().unwrap() > 1.0 {
                    return Err(fail("sampled grid must lie in [0, 1]".into()));
                }
                if sp.grid.windows(2).any(|w| !(w[0] < w[1])) {
                    return Err(fail("sampled grid must be strictly increasing".into()));
                }
                if sp.grid.iter().chain(&sp.values).any(|v| !v.is_finite()) {
                    return Err(fail("sampled entries must be finite".into()));
                }
            }
        }
        Ok(())
    }

    /// Upper bound for sup |rho| on [0, 1); exact for PowerT, Step and
    /// Sampled, a coefficient-sum bound for PolyT2.
    pub fn sup_bound(&self) -> f64 {
        match self {
            RadialProfile::PolyT2(coeffs) => coeffs.iter().map(|c| c.abs()).sum(),
            RadialProfile::PowerT(_) => 1.0,
            RadialProfile::Step(sp) => sp.values.iter().fold(0.0, |m, v| v.abs().max(m)),
            RadialProfile::Sampled(sp) => sp.values.iter().fold(0.0, |m, v| v.abs().max(m)),
        }
    }

    /// The profile as a polynomial in u = t^2, when it is one.
    pub fn as_u_poly(&self) -> Option<Vec<f64>> {
        match self {
            RadialProfile::PolyT2(coeffs) => Some(trim_trailing_zeros(coeffs)),
            RadialProfile::PowerT(a) => {
                if a.fract() == 0.0 && *a <= 1e6 {
                    let k = *a as usize;
                    let mut v = vec![0.0; k + 1];
                    v[k] = 1.0;
                    Some(v)
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    /// Breakpoints in t where the profile is not smooth, endpoints excluded.
    pub fn interior_breaks(&self) -> Vec<f64> {
        match self {
            RadialProfile::Step(sp) => sp.breaks[1..sp.breaks.len() - 1].to_vec(),
            RadialProfile::Sampled(sp) => sp
                .grid
                .iter()
                .copied()
                .filter(|&t| t > 0.0 && t < 1.0)
                .collect(),
            _ => Vec::new(),
        }
    }
}

/// Pointwise value of a radial profile at t = |z|.
pub fn eval_radial(profile: &RadialProfile, t: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&t) {
        return Err(Error::Domain(format!(
            "radial argument must lie in [0, 1), got {t}"
        )));
    }
    Ok(match profile {
        RadialProfile::PolyT2(coeffs) => {
            let u = t * t;
            coeffs.iter().rev().fold(0.0, |acc, c| acc * u + c)
        }
        RadialProfile::PowerT(a) => (t * t).powf(*a),
        RadialProfile::Step(sp) => {
            let i = sp
                .breaks
                .windows(2)
                .position(|w| w[0] <= t && t < w[1])
                .expect("breaks cover [0,1)");
            sp.values[i]
        }
        RadialProfile::Sampled(sp) => sp.eval(t),
    })
}

fn trim_trailing_zeros(coeffs: &[f64]) -> Vec<f64> {
    let mut v = coeffs.to_vec();
    while v.len() > 1 && *v.last().unwrap() == 0.0 {
        v.pop();
    }
    v
}

/// One term coeff * z^p * zbar^q * rho(|z|).
#[derive(Clone, Debug, PartialEq)]
pub struct SymbolTerm {
    pub coeff: Complex64,
    pub p: MultiIndex,
    pub q: MultiIndex,
    pub rho: RadialProfile,
}

/// A finite sum of monomial-times-radial terms on the ball in C^dim.
#[derive(Clone, Debug, PartialEq)]
pub struct SymbolExpr {
    dim: usize,
    terms: Vec<SymbolTerm>,
}

impl SymbolExpr {
    pub fn new(dim: usize, terms: Vec<SymbolTerm>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParam("symbol dimension must be >= 1".into()));
        }
        for (i, t) in terms.iter().enumerate() {
            if t.p.dim() != dim || t.q.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: if t.p.dim() != dim { t.p.dim() } else { t.q.dim() },
                });
            }
            if !t.coeff.re.is_finite() || !t.coeff.im.is_finite() {
                return Err(Error::InvalidParam(format!(
                    "term {i} has a non-finite coefficient"
                )));
            }
            t.rho.validate(&format!("terms[{i}].rho"))?;
        }
        Ok(SymbolExpr { dim, terms })
    }

    /// Purely radial symbol rho(|z|) on the ball in C^dim.
    pub fn radial(dim: usize, rho: RadialProfile) -> Result<Self> {
        SymbolExpr::new(
            dim,
            vec![SymbolTerm {
                coeff: Complex64::new(1.0, 0.0),
                p: MultiIndex::zero(dim),
                q: MultiIndex::zero(dim),
                rho,
            }],
        )
    }

    /// Monomial symbol z^p zbar^q.
    pub fn monomial(dim: usize, p: MultiIndex, q: MultiIndex) -> Result<Self> {
        SymbolExpr::new(
            dim,
            vec![SymbolTerm {
                coeff: Complex64::new(1.0, 0.0),
                p,
                q,
                rho: RadialProfile::constant(1.0),
            }],
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[SymbolTerm] {
        &self.terms
    }

    /// Merge terms sharing (p, q, rho), trim PolyT2 tails, drop terms that
    /// are structurally zero. Evaluating the result equals evaluating the
    /// original term list.
    pub fn canonicalized(&self) -> SymbolExpr {
        let mut keyed: Vec<(String, SymbolTerm)> = self
            .terms
            .iter()
            .filter_map(|t| {
                let rho = match &t.rho {
                    RadialProfile::PolyT2(c) => {
                        let trimmed = trim_trailing_zeros(c);
                        if trimmed == [0.0] {
                            return None;
                        }
                        RadialProfile::PolyT2(trimmed)
                    }
                    other => other.clone(),
                };
                let mut t = t.clone();
                t.rho = rho;
                let key = format!("{:?}|{:?}|{:?}", t.p.entries(), t.q.entries(), t.rho);
                Some((key, t))
            })
            .collect();
        keyed.sort_by(|a, b| a.0.cmp(&b.0));
        let mut terms: Vec<SymbolTerm> = Vec::new();
        let mut last_key: Option<String> = None;
        for (key, t) in keyed {
            if last_key.as_deref() == Some(&key) {
                terms.last_mut().unwrap().coeff += t.coeff;
            } else {
                terms.push(t);
                last_key = Some(key);
            }
        }
        terms.retain(|t| t.coeff != Complex64::new(0.0, 0.0));
        SymbolExpr {
            dim: self.dim,
            terms,
        }
    }

    /// True when, after canonical merging, every term is purely radial.
    pub fn is_radial(&self) -> bool {
        self.canonicalized()
            .terms
            .iter()
            .all(|t| t.p.degree() == 0 && t.q.degree() == 0)
    }

    /// Computable upper bound for the sup norm on the ball:
    /// sum |coeff| * sup|rho| (monomials have modulus < 1).
    pub fn sup_norm_bound(&self) -> f64 {
        self.canonicalized()
            .terms
            .iter()
            .map(|t| t.coeff.norm() * t.rho.sup_bound())
            .sum()
    }

    /// Complex conjugate symbol: coefficients conjugated, p and q swapped.
    pub fn conjugate(&self) -> SymbolExpr {
        SymbolExpr {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .map(|t| SymbolTerm {
                    coeff: t.coeff.conj(),
                    p: t.q.clone(),
                    q: t.p.clone(),
                    rho: t.rho.clone(),
                })
                .collect(),
        }
    }

    /// Pointwise value at an interior point of the ball.
    pub fn eval(&self, z: &[Complex64]) -> Result<Complex64> {
        if z.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: z.len(),
            });
        }
        let norm_sq: f64 = z.iter().map(|w| w.norm_sqr()).sum();
        if norm_sq >= 1.0 {
            return Err(Error::Domain(format!(
                "evaluation point has |z| = {} >= 1",
                norm_sq.sqrt()
            )));
        }
        let t = norm_sq.sqrt();
        let mut acc = Complex64::new(0.0, 0.0);
        for term in &self.terms {
            let mut mono = Complex64::new(1.0, 0.0);
            for (j, w) in z.iter().enumerate() {
                mono *= w.powu(term.p.entries()[j]);
                mono *= w.conj().powu(term.q.entries()[j]);
            }
            acc += term.coeff * mono * eval_radial(&term.rho, t)?;
        }
        Ok(acc)
    }

    /// Largest total degree over the term monomials: max(|p|, |q|).
    pub fn monomial_degree(&self) -> u32 {
        self.terms
            .iter()
            .map(|t| t.p.degree().max(t.q.degree()))
            .max()
            .unwrap_or(0)
    }
}

/// Verdict of a zero test on a profile or symbol: either consistent with the
/// zero function at the stated tolerance, or a concrete witness where the
/// modulus exceeds it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SymbolZeroCertificate {
    pub verdict: ZeroVerdict,
    pub tolerance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroVerdict {
    ZeroFunction,
    NonzeroWitness { at: Witness, value: f64 },
}

/// Where a nonzero witness was found.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Witness {
    /// An eigenvalue omega(f, s) of modulus above tolerance.
    Degree(u32),
    /// A radial point t with |f(t)| above tolerance.
    RadialPoint(f64),
}

// ---------------------------------------------------------------------------
// JSON form
//
// {"dim": n, "terms": [{"c": [re, im], "p": [..], "q": [..], "rho": R}]}
// with R one of {"poly_t2": [..]}, {"power_t": a},
// {"step": {"breaks": [..], "values": [..]}},
// {"sampled": {"grid": [..], "values": [..]}}.
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct TermJson<'a> {
    c: [f64; 2],
    p: &'a [u32],
    q: &'a [u32],
    rho: &'a RadialProfile,
}

fn symbol_to_value(f: &SymbolExpr) -> Value {
    let terms: Vec<Value> = f
        .terms
        .iter()
        .map(|t| {
            serde_json::to_value(TermJson {
                c: [t.coeff.re, t.coeff.im],
                p: t.p.entries(),
                q: t.q.entries(),
                rho: &t.rho,
            })
            .expect("symbol terms serialize")
        })
        .collect();
    serde_json::json!({"dim": f.dim, "terms": terms})
}

/// Serialize to the canonical JSON schema (single line, stable field order).
pub fn serialize_symbol(f: &SymbolExpr) -> String {
    symbol_to_value(f).to_string()
}

impl Serialize for SymbolExpr {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        symbol_to_value(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SymbolExpr {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Value::deserialize(d)?;
        parse_symbol_value(&v).map_err(serde::de::Error::custom)
    }
}

fn schema_err(path: &str, message: impl Into<String>) -> Error {
    Error::Schema {
        path: path.to_string(),
        message: message.into(),
    }
}

fn as_object<'v>(
    v: &'v Value,
    path: &str,
    allowed: &[&str],
) -> Result<&'v serde_json::Map<String, Value>> {
    let obj = v
        .as_object()
        .ok_or_else(|| schema_err(path, "expected an object"))?;
    for key in obj.keys() {
        if !allowed.contains(&key.as_str()) {
            return Err(schema_err(
                &format!("{path}.{key}"),
                format!("unknown field (expected one of: {})", allowed.join(", ")),
            ));
        }
    }
    Ok(obj)
}

fn get_field<'v>(
    obj: &'v serde_json::Map<String, Value>,
    path: &str,
    key: &str,
) -> Result<&'v Value> {
    obj.get(key)
        .ok_or_else(|| schema_err(path, format!("missing field `{key}`")))
}

fn as_finite_f64(v: &Value, path: &str) -> Result<f64> {
    let x = v
        .as_f64()
        .ok_or_else(|| schema_err(path, "expected a number"))?;
    if !x.is_finite() {
        return Err(schema_err(path, "number must be finite"));
    }
    Ok(x)
}

fn as_exponent_vec(v: &Value, path: &str, dim: usize) -> Result<MultiIndex> {
    let arr = v
        .as_array()
        .ok_or_else(|| schema_err(path, "expected an array of exponents"))?;
    if arr.len() != dim {
        return Err(schema_err(
            path,
            format!("expected {dim} exponents, got {}", arr.len()),
        ));
    }
    let mut out = Vec::with_capacity(dim);
    for (i, e) in arr.iter().enumerate() {
        let n = e
            .as_u64()
            .ok_or_else(|| schema_err(&format!("{path}[{i}]"), "expected a nonnegative integer"))?;
        if n > u32::MAX as u64 {
            return Err(schema_err(&format!("{path}[{i}]"), "exponent too large"));
        }
        out.push(n as u32);
    }
    Ok(MultiIndex(out))
}

fn as_f64_vec(v: &Value, path: &str) -> Result<Vec<f64>> {
    let arr = v
        .as_array()
        .ok_or_else(|| schema_err(path, "expected an array of numbers"))?;
    arr.iter()
        .enumerate()
        .map(|(i, x)| as_finite_f64(x, &format!("{path}[{i}]")))
        .collect()
}

fn parse_profile(v: &Value, path: &str) -> Result<RadialProfile> {
    let obj = as_object(v, path, &["poly_t2", "power_t", "step", "sampled"])?;
    if obj.len() != 1 {
        return Err(schema_err(
            path,
            "expected exactly one of poly_t2, power_t, step, sampled",
        ));
    }
    let (key, body) = obj.iter().next().unwrap();
    let sub = format!("{path}.{key}");
    let profile = match key.as_str() {
        "poly_t2" => RadialProfile::PolyT2(as_f64_vec(body, &sub)?),
        "power_t" => RadialProfile::PowerT(as_finite_f64(body, &sub)?),
        "step" => {
            let o = as_object(body, &sub, &["breaks", "values"])?;
            RadialProfile::Step(StepProfile {
                breaks: as_f64_vec(get_field(o, &sub, "breaks")?, &format!("{sub}.breaks"))?,
                values: as_f64_vec(get_field(o, &sub, "values")?, &format!("{sub}.values"))?,
            })
        }
        "sampled" => {
            let o = as_object(body, &sub, &["grid", "values"])?;
            RadialProfile::Sampled(SampledProfile::new(
                as_f64_vec(get_field(o, &sub, "grid")?, &format!("{sub}.grid"))?,
                as_f64_vec(get_field(o, &sub, "values")?, &format!("{sub}.values"))?,
            ))
        }
        _ => unreachable!("allowed keys checked above"),
    };
    profile.validate(&sub)?;
    Ok(profile)
}

/// Parse the canonical JSON schema, reporting violations by field path.
pub fn parse_symbol(text: &str) -> Result<SymbolExpr> {
    let root: Value = serde_json::from_str(text)
        .map_err(|e| schema_err("$", format!("invalid JSON: {e}")))?;
    parse_symbol_value(&root)
}

fn parse_symbol_value(root: &Value) -> Result<SymbolExpr> {
    let obj = as_object(root, "$", &["dim", "terms"])?;
    let dim = get_field(obj, "$", "dim")?
        .as_u64()
        .filter(|&d| d >= 1 && d <= 64)
        .ok_or_else(|| schema_err("$.dim", "expected an integer in 1..=64"))? as usize;
    let terms_v = get_field(obj, "$", "terms")?
        .as_array()
        .ok_or_else(|| schema_err("$.terms", "expected an array of terms"))?;
    let mut terms = Vec::with_capacity(terms_v.len());
    for (i, tv) in terms_v.iter().enumerate() {
        let tpath = format!("$.terms[{i}]");
        let tobj = as_object(tv, &tpath, &["c", "p", "q", "rho"])?;
        let cpath = format!("{tpath}.c");
        let c = as_f64_vec(get_field(tobj, &tpath, "c")?, &cpath)?;
        if c.len() != 2 {
            return Err(schema_err(&cpath, "expected [re, im]"));
        }
        terms.push(SymbolTerm {
            coeff: Complex64::new(c[0], c[1]),
            p: as_exponent_vec(get_field(tobj, &tpath, "p")?, &format!("{tpath}.p"), dim)?,
            q: as_exponent_vec(get_field(tobj, &tpath, "q")?, &format!("{tpath}.q"), dim)?,
            rho: parse_profile(get_field(tobj, &tpath, "rho")?, &format!("{tpath}.rho"))?,
        });
    }
    SymbolExpr::new(dim, terms)
}
