//! Constructive Muntz-Szasz machinery.
//!
//! Density questions reduce to whether a reciprocal sum diverges. Partial
//! sums cannot certify divergence numerically, so sets of integers are kept
//! as symbolic descriptions closed under the operations the experiments need,
//! and the classifier works by rule. The quantitative side (distances to a
//! monomial span) is certified in L2 on [0,1], where the Gram matrix is a
//! Cauchy matrix with exactly representable rational entries.

use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

type Rational = Ratio<BigInt>;

/// Symbolic description of a decidable subset of the naturals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntegerSetDesc {
    Finite(Vec<u64>),
    Arithmetic {
        start: u64,
        step: u64,
    },
    /// { base^k : k >= start_exp }
    Geometric {
        base: u64,
        #[serde(default)]
        start_exp: u32,
    },
    Union(Vec<IntegerSetDesc>),
    ComplementInN(Box<IntegerSetDesc>),
    /// (S + offset) intersected with the naturals.
    ShiftedCopy {
        set: Box<IntegerSetDesc>,
        offset: i64,
    },
}

impl IntegerSetDesc {
    pub fn empty() -> Self {
        IntegerSetDesc::Finite(Vec::new())
    }

    pub fn all_naturals() -> Self {
        IntegerSetDesc::Arithmetic { start: 0, step: 1 }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            IntegerSetDesc::Finite(_) => Ok(()),
            IntegerSetDesc::Arithmetic { step, .. } => {
                if *step == 0 {
                    Err(Error::InvalidParam("arithmetic step must be >= 1".into()))
                } else {
                    Ok(())
                }
            }
            IntegerSetDesc::Geometric { base, .. } => {
                if *base < 2 {
                    Err(Error::InvalidParam("geometric base must be >= 2".into()))
                } else {
                    Ok(())
                }
            }
            IntegerSetDesc::Union(parts) => parts.iter().try_for_each(|p| p.validate()),
            IntegerSetDesc::ComplementInN(inner) => inner.validate(),
            IntegerSetDesc::ShiftedCopy { set, .. } => set.validate(),
        }
    }

    pub fn contains(&self, x: u64) -> bool {
        match self {
            IntegerSetDesc::Finite(list) => list.contains(&x),
            IntegerSetDesc::Arithmetic { start, step } => {
                x >= *start && (x - start) % step == 0
            }
            IntegerSetDesc::Geometric { base, start_exp } => {
                let mut v: u128 = (*base as u128).pow(*start_exp);
                let x = x as u128;
                while v < x {
                    v *= *base as u128;
                }
                v == x
            }
            IntegerSetDesc::Union(parts) => parts.iter().any(|p| p.contains(x)),
            IntegerSetDesc::ComplementInN(inner) => !inner.contains(x),
            IntegerSetDesc::ShiftedCopy { set, offset } => {
                let shifted = x as i128 - *offset as i128;
                shifted >= 0 && shifted <= u64::MAX as i128 && set.contains(shifted as u64)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SumClass {
    Converges,
    Diverges,
}

enum Class3 {
    Conv,
    Div,
    Unknown(String),
}

fn classify(desc: &IntegerSetDesc) -> Class3 {
    match desc {
        IntegerSetDesc::Finite(_) => Class3::Conv,
        IntegerSetDesc::Arithmetic { .. } => Class3::Div,
        IntegerSetDesc::Geometric { .. } => Class3::Conv,
        IntegerSetDesc::Union(parts) => {
            let mut all_conv = true;
            let mut unknown: Option<String> = None;
            for p in parts {
                match classify(p) {
                    Class3::Div => return Class3::Div,
                    Class3::Conv => {}
                    Class3::Unknown(why) => {
                        all_conv = false;
                        unknown.get_or_insert(why);
                    }
                }
            }
            if all_conv {
                Class3::Conv
            } else {
                Class3::Unknown(unknown.unwrap_or_else(|| "union member unclassified".into()))
            }
        }
        IntegerSetDesc::ComplementInN(inner) => match classify(inner) {
            // the complement of a convergent-sum set has density one
            Class3::Conv => Class3::Div,
            Class3::Div => Class3::Unknown(
                "complement of a divergent-sum set is not classifiable by these rules".into(),
            ),
            u @ Class3::Unknown(_) => u,
        },
        // a shift changes each reciprocal by a bounded factor and drops at
        // most finitely many elements
        IntegerSetDesc::ShiftedCopy { set, .. } => classify(set),
    }
}

/// Symbolic classification of sum over s in S, s != 0, of 1/s.
pub fn reciprocal_sum_class(desc: &IntegerSetDesc) -> Result<SumClass> {
    desc.validate()?;
    match classify(desc) {
        Class3::Conv => Ok(SumClass::Converges),
        Class3::Div => Ok(SumClass::Diverges),
        Class3::Unknown(why) => Err(Error::UnknownClass(why)),
    }
}

// --- L2 Muntz distances -----------------------------------------------------

fn validate_exponents(lambda: f64, exponents: &[f64]) -> Result<()> {
    for &e in exponents.iter().chain(std::iter::once(&lambda)) {
        if !e.is_finite() || e <= -0.5 {
            return Err(Error::Domain(format!(
                "exponent {e} is outside the L2 range (> -1/2)"
            )));
        }
    }
    for (i, &a) in exponents.iter().enumerate() {
        for &b in &exponents[i + 1..] {
            if (a - b).abs() < 1e-13 {
                return Err(Error::IllConditioned(format!(
                    "exponents {a} and {b} are too close to separate"
                )));
            }
        }
    }
    Ok(())
}

/// dist in L2[0,1] from t^lambda to span{ t^e : e in exponents }, by the
/// closed product formula (2 lambda + 1)^(-1/2) prod |lambda - e| / (lambda + e + 1).
pub fn muntz_distance(lambda: f64, exponents: &[f64]) -> Result<f64> {
    validate_exponents(lambda, exponents)?;
    if exponents.contains(&lambda) {
        return Ok(0.0);
    }
    let mut dist = 1.0 / (2.0 * lambda + 1.0).sqrt();
    for &e in exponents {
        dist *= (lambda - e).abs() / (lambda + e + 1.0);
    }
    Ok(dist)
}

/// The same distance through the normal equations: dist^2 = <t^l, t^l> -
/// b^T G^(-1) b with G the Cauchy-Gram matrix <t^a, t^b> = 1/(a+b+1).
///
/// Floating-point exponents are dyadic rationals, so every Gram entry is an
/// exact rational and the elimination is exact; the only rounding is the
/// final square root.
pub fn muntz_distance_gram(lambda: f64, exponents: &[f64]) -> Result<f64> {
    validate_exponents(lambda, exponents)?;
    if exponents.contains(&lambda) {
        return Ok(0.0);
    }
    let rat = |x: f64| Rational::from_float(x).expect("finite exponent");
    let one = Rational::from_integer(BigInt::from(1));
    let ip = |a: &Rational, b: &Rational| -> Rational { one.clone() / (a + b + &one) };

    let lam = rat(lambda);
    let exps: Vec<Rational> = exponents.iter().map(|&e| rat(e)).collect();
    let k = exps.len();
    let self_ip = ip(&lam, &lam);
    if k == 0 {
        return Ok(self_ip.to_f64().expect("rational fits f64").sqrt());
    }

    let mut g: Vec<Vec<Rational>> = (0..k)
        .map(|i| (0..k).map(|j| ip(&exps[i], &exps[j])).collect())
        .collect();
    let mut b: Vec<Rational> = (0..k).map(|i| ip(&lam, &exps[i])).collect();

    // exact Gaussian elimination with partial pivoting
    for col in 0..k {
        let pivot = (col..k)
            .max_by(|&r, &s| g[r][col].abs().cmp(&g[s][col].abs()))
            .expect("nonempty range");
        if g[pivot][col].is_zero() {
            return Err(Error::IllConditioned(
                "Gram matrix is exactly singular".into(),
            ));
        }
        g.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..k {
            if g[row][col].is_zero() {
                continue;
            }
            let factor = &g[row][col] / &g[col][col];
            for j in col..k {
                let t = &factor * &g[col][j];
                g[row][j] = &g[row][j] - t;
            }
            let t = &factor * &b[col];
            b[row] = &b[row] - t;
        }
    }
    let mut y = vec![Rational::from_integer(BigInt::from(0)); k];
    for row in (0..k).rev() {
        let mut acc = b[row].clone();
        for j in row + 1..k {
            let t = &g[row][j] * &y[j];
            acc = acc - t;
        }
        y[row] = acc / g[row][row].clone();
    }

    let mut dist_sq = self_ip;
    for i in 0..k {
        let t = ip(&lam, &exps[i]) * y[i].clone();
        dist_sq = dist_sq - t;
    }
    let v = dist_sq.to_f64().expect("rational fits f64");
    if v < 0.0 {
        // exact arithmetic keeps dist^2 >= 0; only f64 conversion remains
        return Ok(0.0);
    }
    Ok(v.sqrt())
}

// --- Trent M_j analysis -----------------------------------------------------

/// Symbolic description of a subset of N x N by its diagonals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairSetDesc {
    FullGrid,
    ExplicitList(Vec<(u64, u64)>),
    DiagonalBand {
        j_min: i64,
        j_max: i64,
        /// (j, M_j) for listed diagonals inside the band; unlisted in-band
        /// diagonals are empty.
        diagonals: Vec<(i64, IntegerSetDesc)>,
        tail: TailConvention,
    },
}

/// What the description claims about diagonals outside its band.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailConvention {
    Full,
    Empty,
}

impl PairSetDesc {
    pub fn validate(&self) -> Result<()> {
        match self {
            PairSetDesc::FullGrid | PairSetDesc::ExplicitList(_) => Ok(()),
            PairSetDesc::DiagonalBand {
                j_min,
                j_max,
                diagonals,
                ..
            } => {
                if j_min > j_max {
                    return Err(Error::InvalidParam(format!(
                        "diagonal band {j_min}..{j_max} is empty"
                    )));
                }
                for (j, d) in diagonals {
                    if j < j_min || j > j_max {
                        return Err(Error::InvalidParam(format!(
                            "diagonal {j} lies outside the band {j_min}..{j_max}"
                        )));
                    }
                    d.validate()?;
                }
                Ok(())
            }
        }
    }

    /// Every diagonal index the description distinguishes from its tail.
    fn band_js(&self) -> Vec<i64> {
        match self {
            PairSetDesc::FullGrid => Vec::new(),
            PairSetDesc::ExplicitList(pairs) => {
                let mut js: Vec<i64> = pairs
                    .iter()
                    .map(|(s, t)| *t as i64 - *s as i64)
                    .collect();
                js.sort_unstable();
                js.dedup();
                js
            }
            PairSetDesc::DiagonalBand { j_min, j_max, .. } => (*j_min..=*j_max).collect(),
        }
    }

    /// The first diagonal index beyond everything the description lists, on
    /// which the tail convention alone decides membership.
    fn first_tail_j(&self) -> i64 {
        self.band_js().iter().map(|j| j.abs()).max().unwrap_or(-1) + 1
    }
}

/// M_j = { s in N : (s, s+j) in M }.
pub fn trent_mj(m: &PairSetDesc, j: i64) -> IntegerSetDesc {
    let natural_diagonal = || IntegerSetDesc::Arithmetic {
        start: (-j).max(0) as u64,
        step: 1,
    };
    match m {
        PairSetDesc::FullGrid => natural_diagonal(),
        PairSetDesc::ExplicitList(pairs) => {
            let mut elems: Vec<u64> = pairs
                .iter()
                .filter(|(s, t)| *t as i64 - *s as i64 == j)
                .map(|(s, _)| *s)
                .collect();
            elems.sort_unstable();
            elems.dedup();
            IntegerSetDesc::Finite(elems)
        }
        PairSetDesc::DiagonalBand {
            j_min,
            j_max,
            diagonals,
            tail,
        } => {
            if j < *j_min || j > *j_max {
                return match tail {
                    TailConvention::Full => natural_diagonal(),
                    TailConvention::Empty => IntegerSetDesc::empty(),
                };
            }
            diagonals
                .iter()
                .find(|(jj, _)| *jj == j)
                .map(|(_, d)| d.clone())
                .unwrap_or_else(IntegerSetDesc::empty)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TrentVerdict {
    Dense,
    NotDense { witness_j: i64 },
}

#[derive(Clone, Debug, Serialize)]
pub struct TrentReport {
    pub verdict: TrentVerdict,
    /// (j, class) for every diagonal actually inspected, in scan order.
    pub per_diagonal: Vec<(i64, SumClass)>,
}

/// Density of span{ z^s zbar^t : (s,t) in M } (the constant adjoined) in the
/// continuous functions on the closed disk, by the per-diagonal criterion:
/// dense iff sum over s in M_j, s != 0, of 1/s diverges for every integer j.
///
/// Diagonals are scanned over the union of the requested range and the
/// description's own band (smallest |j| first, positive before negative);
/// diagonals beyond that are decided by the declared tail convention, so the
/// verdict does not depend on how far the range extends.
pub fn trent_density_verdict(m: &PairSetDesc, j_lo: i64, j_hi: i64) -> Result<TrentReport> {
    m.validate()?;
    if j_lo > j_hi {
        return Err(Error::InvalidParam(format!(
            "empty diagonal range {j_lo}..{j_hi}"
        )));
    }
    let mut js: Vec<i64> = (j_lo..=j_hi).chain(m.band_js()).collect();
    js.sort_unstable();
    js.dedup();
    js.sort_by_key(|j| (j.abs(), *j < 0));

    let mut per_diagonal = Vec::with_capacity(js.len());
    for j in js {
        let class = reciprocal_sum_class(&trent_mj(m, j))
            .map_err(|e| Error::UnknownClass(format!("diagonal j={j}: {e}")))?;
        per_diagonal.push((j, class));
        if class == SumClass::Converges {
            return Ok(TrentReport {
                verdict: TrentVerdict::NotDense { witness_j: j },
                per_diagonal,
            });
        }
    }

    let verdict = match m {
        PairSetDesc::FullGrid => TrentVerdict::Dense,
        PairSetDesc::ExplicitList(_) => TrentVerdict::NotDense {
            witness_j: m.first_tail_j(),
        },
        PairSetDesc::DiagonalBand { tail, .. } => match tail {
            TailConvention::Full => TrentVerdict::Dense,
            TailConvention::Empty => TrentVerdict::NotDense {
                witness_j: m.first_tail_j(),
            },
        },
    };
    Ok(TrentReport {
        verdict,
        per_diagonal,
    })
}
