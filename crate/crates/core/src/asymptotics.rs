//! Prediction assembly, Tauberian and product combinators, height zeta
//! partial sums, regression fits of count curves and comparison reports.

use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::densities::{
    assemble_constant, compute_delta, euler_product, tau_archimedean, tau_finite, AsymptoticPrediction,
    EulerProductResult, FactorEntry, RigidDivisorData, TailModel,
};
use crate::enumeration::{
    cubic_surface_height_counts, cumulative_at, enumerate_projective, enumerate_weighted_torus, torus_grid_enumerate,
    CountCurve, GridBox,
};
use crate::error::{Error, Result};
use crate::heights::HeightModel;
use crate::lattice::rational::{factorial, format_rational, int, to_f64, Rational};
use crate::toric::{
    anticanonical_pl, build_picard, compute_alpha, compute_beta, compute_gamma, compute_gamma_quotient, resolve_fan_2d,
    Fan, FanJson, PLFunction, PLJson, PicardModel,
};

pub const PREDICTION_SCHEMA: &str = "heightcount.prediction/v1";
pub const FIT_SCHEMA: &str = "heightcount.fit/v1";
pub const REPORT_SCHEMA: &str = "heightcount.report/v1";
pub const VARIETY_SCHEMA: &str = "heightcount.variety/v1";

pub const DEFAULT_TRUNCATION_PRIME: u64 = 10_000;

// ---------------------------------------------------------------------------
// Tauberian constant

fn check_tauberian(a: &Rational, b: u32) -> Result<()> {
    if b < 1 {
        return Err(Error::InvalidParameters("pole order b must be at least 1".into()));
    }
    if !a.is_positive() {
        return Err(Error::InvalidParameters(format!(
            "abscissa a = {} is not positive",
            format_rational(a)
        )));
    }
    Ok(())
}

/// theta / (a (b-1)!).
pub fn tauberian_constant(theta: f64, a: &Rational, b: u32) -> Result<f64> {
    check_tauberian(a, b)?;
    Ok(theta / (to_f64(a) * factorial(b - 1).to_f64().unwrap_or(f64::INFINITY)))
}

pub fn tauberian_constant_exact(theta: &Rational, a: &Rational, b: u32) -> Result<Rational> {
    check_tauberian(a, b)?;
    Ok(theta / (a * Rational::from_integer(factorial(b - 1))))
}

// ---------------------------------------------------------------------------
// Product rules

/// Case 2 output: the base variety has the smaller alpha, so the constant is
/// a sum over its points which we can only truncate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiberedPrediction {
    #[serde(with = "crate::lattice::rational::as_string")]
    pub alpha: Rational,
    pub beta: u32,
    /// Partial sum of H_base(x)^(-alpha) over the supplied base points.
    pub zeta_lower: f64,
    /// Lower bound for theta (monotone in the truncation height).
    pub theta_lower: f64,
    pub c_lower: f64,
    pub truncation_height: f64,
    pub base_points: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "case", rename_all = "kebab-case")]
pub enum ProductPrediction {
    EqualAlpha(AsymptoticPrediction),
    Fibered(FiberedPrediction),
}

fn multiply_euler(a: &EulerProductResult, b: &EulerProductResult) -> Result<EulerProductResult> {
    let p = a.truncation_prime.min(b.truncation_prime);
    let tb: std::collections::BTreeMap<u64, &Rational> = b.factor_table.iter().map(|f| (f.p, &f.value)).collect();
    let mut factors = Vec::new();
    for f in a.factor_table.iter().filter(|f| f.p <= p) {
        let other = tb
            .get(&f.p)
            .ok_or_else(|| Error::ProductCase(format!("factor tables disagree at p = {}", f.p)))?;
        factors.push(FactorEntry {
            p: f.p,
            value: &f.value * *other,
        });
    }
    // |(1+u)(1+v) - 1| <= |u| + |v| + |uv|
    let (c1, c2) = (&a.tail.constant, &b.tail.constant);
    let tail = TailModel {
        constant: c1 + c2 + c1 * c2,
        exponent: a.tail.exponent.min(b.tail.exponent),
    };
    euler_product(p, factors, tail)
}

/// Equal alpha: beta adds and every factor of theta multiplies. Otherwise the
/// variety with the smaller alpha is the base and `base_heights` (pairs of
/// height and multiplicity of its enumerated points) truncate the fiber sum.
pub fn product_prediction(
    p1: &AsymptoticPrediction,
    p2: &AsymptoticPrediction,
    base_heights: Option<&[(f64, u64)]>,
) -> Result<ProductPrediction> {
    for p in [p1, p2] {
        if !p.alpha.is_positive() || p.beta < 1 {
            return Err(Error::ProductCase("inputs must have alpha > 0 and beta >= 1".into()));
        }
    }
    if p1.alpha == p2.alpha {
        let alpha = p1.alpha.clone();
        let beta = p1.beta + p2.beta;
        let gamma = &p1.gamma * &p2.gamma;
        let delta = p1.delta * p2.delta;
        let tau_inf = &p1.tau_inf * &p2.tau_inf;
        let height_scale = &p1.height_scale * &p2.height_scale;
        let tau_f = multiply_euler(&p1.tau_finite, &p2.tau_finite)?;
        let c = assemble_constant(&alpha, beta, &gamma, delta, &tau_f.interval(), &tau_inf)?.scale(&height_scale);
        let mut provenance = vec!["product of equal-alpha predictions: beta adds, theta multiplies".to_string()];
        provenance.extend(p1.provenance.iter().map(|s| format!("left {s}")));
        provenance.extend(p2.provenance.iter().map(|s| format!("right {s}")));
        return Ok(ProductPrediction::EqualAlpha(AsymptoticPrediction {
            alpha,
            beta,
            gamma,
            delta,
            tau_finite: tau_f,
            tau_inf,
            height_scale,
            c,
            provenance,
        }));
    }
    let (_, fiber) = if p1.alpha < p2.alpha { (p1, p2) } else { (p2, p1) };
    let heights = base_heights.ok_or_else(|| {
        Error::ProductCase("alphas differ: heights of base points are needed for the fiber sum".into())
    })?;
    let a2 = to_f64(&fiber.alpha);
    let truncation_height = heights.iter().map(|h| h.0).fold(0.0, f64::max);
    let zeta = zeta_partial(heights, a2, truncation_height)?;
    let theta = fiber.theta();
    let c = tauberian_constant(theta.lo, &fiber.alpha, fiber.beta)? * to_f64(&fiber.height_scale);
    Ok(ProductPrediction::Fibered(FiberedPrediction {
        alpha: fiber.alpha.clone(),
        beta: fiber.beta,
        zeta_lower: zeta,
        theta_lower: zeta * theta.lo,
        c_lower: zeta * c,
        truncation_height,
        base_points: heights.iter().map(|h| h.1).sum(),
    }))
}

// ---------------------------------------------------------------------------
// Height zeta partial sums

/// sum of m * H^(-s) over the entries (H, m) with H <= B, added in increasing
/// height order so that the value is monotone in B and in s.
pub fn zeta_partial(heights: &[(f64, u64)], s: f64, bound: f64) -> Result<f64> {
    if s.is_nan() || s <= 0.0 {
        return Err(Error::InvalidParameters(format!("zeta_partial needs s > 0, got {s}")));
    }
    let mut hs: Vec<(f64, u64)> = heights.iter().copied().filter(|&(h, _)| h <= bound).collect();
    if hs.iter().any(|&(h, _)| h.is_nan() || h < 1.0) {
        return Err(Error::InvalidParameters("heights are at least 1".into()));
    }
    hs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(hs.iter().map(|&(h, m)| m as f64 * h.powf(-s)).sum())
}

/// Histogram indexed by integer height into (height, multiplicity) pairs.
pub fn integer_heights(counts: &[u64]) -> Vec<(f64, u64)> {
    counts
        .iter()
        .enumerate()
        .filter(|(_, &m)| m > 0)
        .map(|(h, &m)| (h as f64, m))
        .collect()
}

// ---------------------------------------------------------------------------
// Fitting

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FixedMask {
    pub a: bool,
    pub b: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub a: f64,
    pub b: f64,
    pub log_c: f64,
    /// Root mean square of the log residuals.
    pub residual: f64,
    pub residuals: Vec<f64>,
    pub fixed_mask: FixedMask,
    pub samples_used: usize,
}

impl FitResult {
    pub fn c(&self) -> f64 {
        self.log_c.exp()
    }
}

/// Least squares for log N = log c + a log B + (b-1) log log B over the
/// samples with B >= 3 and N > 0.
pub fn fit_asymptotic(curve: &CountCurve, fix_a: Option<f64>, fix_b: Option<f64>) -> Result<FitResult> {
    let points: Vec<(f64, f64)> = curve
        .samples
        .iter()
        .map(|s| (to_f64(&s.bound), s.count as f64))
        .collect();
    fit_samples(&points, fix_a, fix_b)
}

/// The same regression on real-valued (B, N) pairs.
pub fn fit_samples(points: &[(f64, f64)], fix_a: Option<f64>, fix_b: Option<f64>) -> Result<FitResult> {
    let rows: Vec<(f64, f64, f64)> = points
        .iter()
        .filter(|&&(b, n)| b >= 3.0 && n > 0.0)
        .map(|&(b, n)| {
            let lb = b.ln();
            (lb, lb.ln(), n.ln())
        })
        .collect();
    if rows.len() < 3 {
        return Err(Error::DegenerateFit(format!(
            "{} usable samples (B >= 3, N > 0); at least 3 are needed",
            rows.len()
        )));
    }
    // columns: log c, then a and b-1 unless fixed
    let mut cols: Vec<Vec<f64>> = vec![vec![1.0; rows.len()]];
    if fix_a.is_none() {
        cols.push(rows.iter().map(|r| r.0).collect());
    }
    if fix_b.is_none() {
        cols.push(rows.iter().map(|r| r.1).collect());
    }
    let y: Vec<f64> = rows
        .iter()
        .map(|&(lb, llb, ln)| ln - fix_a.map_or(0.0, |a| a * lb) - fix_b.map_or(0.0, |b| (b - 1.0) * llb))
        .collect();
    // column scaling keeps the conditioning honest
    let scales: Vec<f64> = cols
        .iter()
        .map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt().max(f64::MIN_POSITIVE))
        .collect();
    let x = DMatrix::from_fn(rows.len(), cols.len(), |i, j| cols[j][i] / scales[j]);
    let svd = x.clone().svd(true, true);
    let sv = &svd.singular_values;
    let (smax, smin) = (sv.max(), sv.min());
    if smin.is_nan() || smin <= 1e-10 * smax {
        return Err(Error::DegenerateFit(format!(
            "design matrix is rank deficient (singular values {smin:e} / {smax:e})"
        )));
    }
    let yv = DVector::from_vec(y.clone());
    let sol = svd.solve(&yv, 0.0).map_err(|e| Error::DegenerateFit(e.to_string()))?;
    let coef: Vec<f64> = sol.iter().zip(&scales).map(|(v, s)| v / s).collect();
    let mut it = coef.iter();
    let log_c = *it.next().expect("intercept");
    let a = fix_a.unwrap_or_else(|| *it.next().expect("slope"));
    let b = fix_b.unwrap_or_else(|| 1.0 + *it.next().expect("log power"));
    let residuals: Vec<f64> = rows
        .iter()
        .map(|&(lb, llb, ln)| ln - (log_c + a * lb + (b - 1.0) * llb))
        .collect();
    let residual = (residuals.iter().map(|r| r * r).sum::<f64>() / residuals.len() as f64).sqrt();
    Ok(FitResult {
        a,
        b,
        log_c,
        residual,
        residuals,
        fixed_mask: FixedMask {
            a: fix_a.is_some(),
            b: fix_b.is_some(),
        },
        samples_used: rows.len(),
    })
}

// ---------------------------------------------------------------------------
// Variety specifications

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum VarietySpec {
    /// A split toric variety; the polarization defaults to the anticanonical
    /// PL function. Rigid components of a non-anticanonical polarization must
    /// come with the projection of Pic onto Pic(V, L).
    Toric {
        #[serde(default)]
        name: Option<String>,
        fan: FanJson,
        #[serde(default)]
        polarization: Option<PLJson>,
        #[serde(default)]
        rigid: Option<RigidDivisorData>,
        #[serde(default)]
        quotient: Option<Vec<Vec<i64>>>,
    },
    /// P^n with the standard height (the polarization O(1)).
    Projective { n: usize },
    /// P(1,1,m) with the anticanonical weighted height.
    Weighted { weights: Vec<u32> },
}

/// Names accepted by [`VarietySpec::builtin`].
pub const BUILTINS: &[&str] = &["cubic", "p1", "p2", "p1xp1", "p112", "p113"];

impl VarietySpec {
    pub fn builtin(name: &str) -> Result<VarietySpec> {
        let toric = |name: &str, fan: Fan| VarietySpec::Toric {
            name: Some(name.into()),
            fan: fan.to_json(),
            polarization: None,
            rigid: None,
            quotient: None,
        };
        Ok(match name {
            "cubic" => toric("xyz=u^3", Fan::cubic_xyz_u3()?),
            "p1" => VarietySpec::Projective { n: 1 },
            "p2" => VarietySpec::Projective { n: 2 },
            "p1xp1" => toric("P1xP1", Fan::projective_space(1)?.product(&Fan::projective_space(1)?)?),
            "p112" => VarietySpec::Weighted { weights: vec![1, 1, 2] },
            "p113" => VarietySpec::Weighted { weights: vec![1, 1, 3] },
            _ => {
                return Err(Error::Spec(format!(
                    "unknown builtin variety {name:?}; known: {}",
                    BUILTINS.join(", ")
                )))
            }
        })
    }

    pub fn label(&self) -> String {
        match self {
            VarietySpec::Toric { name, fan, .. } => name.clone().unwrap_or_else(|| format!("toric-{}d", fan.dim)),
            VarietySpec::Projective { n } => format!("P{n}"),
            VarietySpec::Weighted { weights } => {
                format!(
                    "P({})",
                    weights.iter().map(|w| w.to_string()).collect::<Vec<_>>().join(",")
                )
            }
        }
    }

    /// Fan, polarization and rigid data on a smooth model.
    pub fn resolve(&self) -> Result<ResolvedVariety> {
        let (fan, phi, rigid, quotient, height_model) = match self {
            VarietySpec::Toric {
                fan,
                polarization,
                rigid,
                quotient,
                ..
            } => {
                let fan = Fan::from_json(fan)?;
                let phi = match polarization {
                    Some(p) => PLFunction::from_json(&fan, p)?,
                    None => anticanonical_pl(&fan)?,
                };
                let hm = HeightModel::toric(&phi)?;
                (fan, phi, rigid.clone().unwrap_or_default(), quotient.clone(), hm)
            }
            VarietySpec::Projective { n } => {
                if *n == 0 {
                    return Err(Error::Spec("projective dimension must be positive".into()));
                }
                let fan = Fan::projective_space(*n)?;
                let phi = anticanonical_pl(&fan)?.scaled(&Rational::new(1.into(), BigInt::from(*n + 1)))?;
                (
                    fan,
                    phi,
                    RigidDivisorData::none(),
                    None,
                    HeightModel::standard_projective(*n),
                )
            }
            VarietySpec::Weighted { weights } => {
                let m = weighted_11m_parameter(weights)?;
                let fan = Fan::weighted_11m(m as i64)?;
                let phi = anticanonical_pl(&fan)?;
                (
                    fan,
                    phi,
                    RigidDivisorData::none(),
                    None,
                    HeightModel::weighted_anticanonical(weights)?,
                )
            }
        };
        let input_smooth = fan.is_smooth();
        let (smooth, phi) = if input_smooth {
            (fan.clone(), phi)
        } else {
            let r = resolve_fan_2d(&fan)?;
            let phi = phi.pull_back(&r)?;
            (r, phi)
        };
        Ok(ResolvedVariety {
            label: self.label(),
            input_fan: fan,
            fan: smooth,
            polarization: phi,
            rigid,
            quotient,
            height_model,
            input_smooth,
        })
    }
}

fn weighted_11m_parameter(weights: &[u32]) -> Result<u32> {
    match weights {
        [1, 1, m] if *m >= 1 => Ok(*m),
        _ => Err(Error::Spec(format!(
            "weighted spaces are supported as P(1,1,m); got weights {weights:?}"
        ))),
    }
}

#[derive(Debug, Clone)]
pub struct ResolvedVariety {
    pub label: String,
    pub input_fan: Fan,
    /// Smooth model (the input fan when it was already smooth).
    pub fan: Fan,
    /// Polarization pulled back to the smooth model.
    pub polarization: PLFunction,
    pub rigid: RigidDivisorData,
    pub quotient: Option<Vec<Vec<i64>>>,
    /// Height on the input variety, for enumeration.
    pub height_model: HeightModel,
    pub input_smooth: bool,
}

// ---------------------------------------------------------------------------
// Prediction

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PredictOptions {
    pub truncation_prime: u64,
}

impl Default for PredictOptions {
    fn default() -> Self {
        PredictOptions {
            truncation_prime: DEFAULT_TRUNCATION_PRIME,
        }
    }
}

/// alpha together with the reason a full prediction is or is not available.
struct Adjoint {
    alpha: Rational,
    /// alpha [L] = -[K]
    proportional: bool,
}

fn adjoint(pm: &PicardModel, phi: &PLFunction) -> Result<Adjoint> {
    let l = pm.class_of_pl(phi);
    let alpha = compute_alpha(pm, &l).map_err(|e| e.at("alpha"))?;
    let scaled: Vec<Rational> = l.iter().map(|x| x * &alpha).collect();
    Ok(Adjoint {
        proportional: scaled == pm.anticanonical(),
        alpha,
    })
}

pub fn predict(spec: &VarietySpec) -> Result<AsymptoticPrediction> {
    predict_with(spec, PredictOptions::default())
}

pub fn predict_with(spec: &VarietySpec, opts: PredictOptions) -> Result<AsymptoticPrediction> {
    let v = spec.resolve().map_err(|e| e.at("resolve"))?;
    let mut provenance = Vec::new();
    if !v.input_smooth {
        provenance.push(format!(
            "resolve: 2-d resolution, {} -> {} rays, polarization pulled back",
            v.input_fan.rays().len(),
            v.fan.rays().len()
        ));
    }
    let pm = build_picard(&v.fan).map_err(|e| e.at("picard"))?;
    let adj = adjoint(&pm, &v.polarization)?;
    provenance.push("alpha: exact (least t with t[L] + [K] effective)".into());
    let l = v.rigid.len();
    let beta = compute_beta(&pm, l).map_err(|e| e.at("beta"))?;
    provenance.push(format!(
        "beta: exact (Picard rank {} minus {l} rigid components)",
        pm.rank
    ));
    let (gamma, height_scale) = if adj.proportional {
        if !v.rigid.is_empty() {
            return Err(Error::InvalidRigidData(
                "polarization is proportional to -K, so it has no rigid components".into(),
            )
            .at("gamma"));
        }
        let g = compute_gamma(&pm).map_err(|e| e.at("gamma"))?;
        provenance.push("gamma: exact (X-function of the effective cone at -K)".into());
        let hs = num_traits::pow(adj.alpha.clone(), beta);
        if !hs.is_one() {
            provenance.push(format!(
                "height_scale: alpha^beta = {} converts the anticanonical count to H_L = H_-K^(1/alpha)",
                format_rational(&hs)
            ));
        }
        (g, hs)
    } else {
        let Some(q) = &v.quotient else {
            return Err(Error::InvalidRigidData(format!(
                "alpha = {} but alpha[L] + [K] is nonzero; supply rigid components and the quotient projection",
                format_rational(&adj.alpha)
            ))
            .at("gamma"));
        };
        if v.rigid.is_empty() {
            return Err(Error::InvalidRigidData("quotient supplied without rigid components".into()).at("gamma"));
        }
        let proj: Vec<Vec<BigInt>> = q.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
        let g = compute_gamma_quotient(&pm, &proj).map_err(|e| e.at("gamma"))?;
        provenance.push("gamma: exact (X-function on the supplied quotient of Pic)".into());
        provenance.push("height_scale: 1 (literal formula for a polarization with rigid components)".into());
        (g, Rational::one())
    };
    let delta = compute_delta(true).map_err(|e| e.at("delta"))?;
    provenance.push("delta: exact (split torus, trivial Galois action)".into());
    let tf = tau_finite(&v.fan, &pm, &v.rigid, opts.truncation_prime).map_err(|e| e.at("tau_finite"))?;
    provenance.push(format!(
        "tau_finite: enclosed (exact factors for p <= {}, |log tail| <= {:.3e})",
        tf.truncation_prime, tf.tail_bound
    ));
    let phi_k = anticanonical_pl(&v.fan).map_err(|e| e.at("tau_inf"))?;
    let tau_inf = tau_archimedean(&v.fan, &phi_k).map_err(|e| e.at("tau_inf"))?;
    provenance.push(format!(
        "tau_inf: exact (sum over {} maximal cones of the anticanonical density)",
        v.fan.max_cones().len()
    ));
    let beta = beta as u32;
    let c = assemble_constant(&adj.alpha, beta, &gamma, delta, &tf.interval(), &tau_inf)
        .map_err(|e| e.at("assemble"))?
        .scale(&height_scale);
    provenance.push("c: enclosed (exact invariants times the tau_finite enclosure)".into());
    Ok(AsymptoticPrediction {
        alpha: adj.alpha,
        beta,
        gamma,
        delta,
        tau_finite: tf,
        tau_inf,
        height_scale,
        c,
        provenance,
    })
}

/// Rows of (quantity, value) describing a variety; invariants that cannot be
/// predicted are reported with the reason.
pub fn describe(spec: &VarietySpec, opts: PredictOptions) -> Result<Vec<(String, String)>> {
    let v = spec.resolve()?;
    let mut rows = vec![
        ("variety".to_string(), v.label.clone()),
        ("dimension".into(), v.fan.dim().to_string()),
        ("rays (input)".into(), v.input_fan.rays().len().to_string()),
        ("smooth".into(), v.input_smooth.to_string()),
    ];
    if !v.input_smooth {
        rows.push(("rays (resolved)".into(), v.fan.rays().len().to_string()));
    }
    let pm = build_picard(&v.fan)?;
    rows.push(("picard rank".into(), pm.rank.to_string()));
    let adj = adjoint(&pm, &v.polarization)?;
    rows.push(("alpha".into(), format_rational(&adj.alpha)));
    rows.push(("L proportional to -K".into(), adj.proportional.to_string()));
    match predict_with(spec, opts) {
        Ok(p) => {
            rows.push(("beta".into(), p.beta.to_string()));
            rows.push(("gamma".into(), format_rational(&p.gamma)));
            rows.push(("delta".into(), p.delta.to_string()));
            rows.push((
                "tau_finite".into(),
                format!(
                    "[{:.9e}, {:.9e}] (P = {})",
                    p.tau_finite.lower, p.tau_finite.upper, p.tau_finite.truncation_prime
                ),
            ));
            rows.push(("tau_inf".into(), format_rational(&p.tau_inf)));
            rows.push(("height scale".into(), format_rational(&p.height_scale)));
            rows.push(("c".into(), format!("[{:.9e}, {:.9e}]", p.c.lo, p.c.hi)));
            rows.push((
                "growth".into(),
                format!("B^{} (log B)^{}", format_rational(&p.alpha), p.beta - 1),
            ));
        }
        Err(e) => rows.push(("prediction".into(), format!("not available: {e}"))),
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// Enumeration tasks

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Engine {
    Projective,
    Weighted,
    CubicSurface,
    TorusGrid,
}

impl std::str::FromStr for Engine {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "projective" => Engine::Projective,
            "weighted" => Engine::Weighted,
            "cubic-surface" => Engine::CubicSurface,
            "torus-grid" => Engine::TorusGrid,
            _ => return Err(Error::Spec(format!("unknown engine {s:?}"))),
        })
    }
}

#[derive(Debug, Clone)]
pub struct EnumerationTask {
    pub spec: VarietySpec,
    pub height_model: HeightModel,
    pub bounds: Vec<u64>,
    pub engine: Engine,
    /// Numerator/denominator bound for the grid engine.
    pub grid_box: Option<u64>,
}

impl EnumerationTask {
    /// Chooses the specialized engine for the spec unless one is given.
    pub fn new(spec: VarietySpec, bounds: Vec<u64>, engine: Option<Engine>, grid_box: Option<u64>) -> Result<Self> {
        if bounds.is_empty() || bounds.windows(2).any(|w| w[0] >= w[1]) || bounds[0] == 0 {
            return Err(Error::InvalidParameters(
                "bound schedule must be non-empty, positive and increasing".into(),
            ));
        }
        let v = spec.resolve()?;
        let engine = match engine {
            Some(e) => e,
            None => match &spec {
                VarietySpec::Projective { .. } => Engine::Projective,
                VarietySpec::Weighted { .. } => Engine::Weighted,
                VarietySpec::Toric { .. } if v.input_fan == Fan::cubic_xyz_u3()? => Engine::CubicSurface,
                VarietySpec::Toric { .. } => Engine::TorusGrid,
            },
        };
        Ok(EnumerationTask {
            spec,
            height_model: v.height_model,
            bounds,
            engine,
            grid_box,
        })
    }

    pub fn run(&self) -> Result<CountCurve> {
        let id = self.spec.label();
        let counts: Vec<u64> = match (self.engine, &self.spec) {
            (Engine::Projective, VarietySpec::Projective { n }) => self
                .bounds
                .iter()
                .map(|&b| {
                    enumerate_projective(*n, b)?
                        .to_u64()
                        .ok_or_else(|| Error::InvalidParameters("count exceeds u64".into()))
                })
                .collect::<Result<_>>()?,
            (Engine::Weighted, VarietySpec::Weighted { weights }) => {
                enumerate_weighted_torus(weighted_11m_parameter(weights)?, &self.bounds)?
            }
            (Engine::CubicSurface, VarietySpec::Toric { fan, .. }) if Fan::from_json(fan)? == Fan::cubic_xyz_u3()? => {
                let hist = cubic_surface_height_counts(*self.bounds.last().expect("non-empty"));
                cumulative_at(&hist, &self.bounds)
            }
            (Engine::TorusGrid, _) => {
                let side = self
                    .grid_box
                    .ok_or_else(|| Error::InvalidParameters("the torus-grid engine needs an explicit box".into()))?;
                let dim = self.height_model.monomials.first().map_or(0, |m| m.len());
                if self.height_model.kind != crate::heights::HeightKind::ToricPl {
                    return Err(Error::InvalidParameters(
                        "the torus-grid engine needs a toric height model".into(),
                    ));
                }
                let bx = GridBox::uniform(dim, side, side);
                self.bounds
                    .iter()
                    .map(|&b| torus_grid_enumerate(&self.height_model, &int(b as i64), &bx))
                    .collect::<Result<_>>()?
            }
            (e, _) => {
                return Err(Error::InvalidParameters(format!(
                    "engine {e:?} does not apply to {}",
                    self.spec.label()
                )))
            }
        };
        CountCurve::from_u64(id, &self.bounds, &counts)
    }
}

// ---------------------------------------------------------------------------
// Comparison

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub quantity: String,
    pub status: Status,
    pub observed: Option<f64>,
    pub expected: String,
    pub tolerance: String,
    pub note: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// |free-fit exponent - alpha|
    pub exponent: f64,
    /// |fitted log power - beta|
    pub log_power: f64,
    /// Fitted c must lie in [c_lo / slack, c_hi * slack].
    pub constant_slack: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            exponent: 0.05,
            log_power: 0.5,
            constant_slack: 3.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendPoint {
    #[serde(with = "crate::lattice::rational::as_string")]
    pub bound: Rational,
    pub count: u64,
    /// N / (B^alpha (log B)^(beta-1))
    pub normalized: f64,
    /// normalized / predicted c (midpoint)
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub schema: String,
    pub prediction: AsymptoticPrediction,
    /// Fit with a and b held at the prediction.
    pub fit: Option<FitResult>,
    /// Fit with b held and a free.
    pub exponent_fit: Option<FitResult>,
    /// Fit with a held and b free.
    pub log_power_fit: Option<FitResult>,
    pub curve: CountCurve,
    pub trend: Vec<TrendPoint>,
    /// "decreasing", "increasing" or "mixed" along the schedule.
    pub trend_direction: String,
    pub tolerances: Tolerances,
    pub verdicts: Vec<Verdict>,
}

impl ComparisonReport {
    pub fn all_pass(&self) -> bool {
        self.verdicts.iter().all(|v| v.status == Status::Pass)
    }

    pub fn verdict(&self, quantity: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.quantity == quantity)
    }

    /// Plain-text table of the verdicts and the trend series.
    pub fn table(&self) -> String {
        let mut s = format!(
            "{:<10} {:<13} {:>14} {:>22} {:>14}\n",
            "quantity", "status", "observed", "expected", "tolerance"
        );
        for v in &self.verdicts {
            let status = format!("{:?}", v.status).to_lowercase();
            let obs = v.observed.map_or("-".to_string(), |x| format!("{x:.6}"));
            s += &format!(
                "{:<10} {:<13} {:>14} {:>22} {:>14}\n",
                v.quantity, status, obs, v.expected, v.tolerance
            );
        }
        s += &format!(
            "\n{:>12} {:>14} {:>16} {:>12}\n",
            "B", "N", "N/(B^a L^(b-1))", "ratio to c"
        );
        for t in &self.trend {
            s += &format!(
                "{:>12} {:>14} {:>16.6e} {:>12.4}\n",
                format_rational(&t.bound),
                t.count,
                t.normalized,
                t.ratio
            );
        }
        s += &format!("trend: {}\n", self.trend_direction);
        s
    }
}

fn inconclusive(quantity: &str, expected: String, tolerance: String, note: String) -> Verdict {
    Verdict {
        quantity: quantity.into(),
        status: Status::Inconclusive,
        observed: None,
        expected,
        tolerance,
        note,
    }
}

fn judge(ok: bool) -> Status {
    if ok {
        Status::Pass
    } else {
        Status::Fail
    }
}

pub fn compare(prediction: &AsymptoticPrediction, curve: &CountCurve, tol: Tolerances) -> ComparisonReport {
    let alpha = to_f64(&prediction.alpha);
    let beta = prediction.beta as f64;
    let c = prediction.c;
    let mut verdicts = Vec::new();

    let exponent_fit = fit_asymptotic(curve, None, Some(beta));
    verdicts.push(match &exponent_fit {
        Ok(f) => Verdict {
            quantity: "exponent".into(),
            status: judge((f.a - alpha).abs() <= tol.exponent),
            observed: Some(f.a),
            expected: format_rational(&prediction.alpha),
            tolerance: format!("abs {}", tol.exponent),
            note: format!("free-a fit with b = {beta}"),
        },
        Err(e) => inconclusive(
            "exponent",
            format_rational(&prediction.alpha),
            format!("abs {}", tol.exponent),
            e.to_string(),
        ),
    });

    let log_power_fit = fit_asymptotic(curve, Some(alpha), None);
    verdicts.push(match &log_power_fit {
        Ok(f) => Verdict {
            quantity: "log-power".into(),
            status: judge((f.b - beta).abs() <= tol.log_power),
            observed: Some(f.b - 1.0),
            expected: format!("{}", prediction.beta - 1),
            tolerance: format!("abs {}", tol.log_power),
            note: "N/B^alpha regressed on log log B".into(),
        },
        Err(e) => inconclusive(
            "log-power",
            format!("{}", prediction.beta - 1),
            format!("abs {}", tol.log_power),
            e.to_string(),
        ),
    });

    let fit = fit_asymptotic(curve, Some(alpha), Some(beta));
    let expected_c = format!("[{:.6e}, {:.6e}]", c.lo, c.hi);
    verdicts.push(match &fit {
        Ok(_) if !(c.lo > 0.0 && c.hi.is_finite()) => inconclusive(
            "constant",
            expected_c,
            format!("factor {}", tol.constant_slack),
            "predicted enclosure is not a finite positive interval".into(),
        ),
        Ok(f) => {
            let fc = f.c();
            Verdict {
                quantity: "constant".into(),
                status: judge(fc >= c.lo / tol.constant_slack && fc <= c.hi * tol.constant_slack),
                observed: Some(fc),
                expected: expected_c,
                tolerance: format!("factor {}", tol.constant_slack),
                note: format!("fit with a = {alpha}, b = {beta}; residual {:.3e}", f.residual),
            }
        }
        Err(e) => inconclusive(
            "constant",
            expected_c,
            format!("factor {}", tol.constant_slack),
            e.to_string(),
        ),
    });

    let cm = c.mid();
    let trend: Vec<TrendPoint> = curve
        .samples
        .iter()
        .filter(|s| s.bound > int(1))
        .map(|s| {
            let b = to_f64(&s.bound);
            let normalized = s.count as f64 / (b.powf(alpha) * b.ln().powi(prediction.beta as i32 - 1));
            TrendPoint {
                bound: s.bound.clone(),
                count: s.count,
                normalized,
                ratio: normalized / cm,
            }
        })
        .collect();
    let dec = trend.windows(2).all(|w| w[1].normalized <= w[0].normalized);
    let inc = trend.windows(2).all(|w| w[1].normalized >= w[0].normalized);
    let trend_direction = match (dec, inc) {
        (true, false) => "decreasing",
        (false, true) => "increasing",
        (true, true) => "constant",
        _ => "mixed",
    }
    .to_string();

    ComparisonReport {
        schema: REPORT_SCHEMA.into(),
        prediction: prediction.clone(),
        fit: fit.ok(),
        exponent_fit: exponent_fit.ok(),
        log_power_fit: log_power_fit.ok(),
        curve: curve.clone(),
        trend,
        trend_direction,
        tolerances: tol,
        verdicts,
    }
}

/// Synthetic curve c B^a (log B)^(b-1), rounded to integers.
pub fn synthetic_curve(c: f64, a: f64, b: f64, bounds: &[u64]) -> Result<CountCurve> {
    let counts: Vec<u64> = bounds
        .iter()
        .map(|&x| {
            let x = x as f64;
            (c * x.powf(a) * x.ln().powf(b - 1.0)).round() as u64
        })
        .collect();
    CountCurve::from_u64("synthetic", bounds, &counts)
}
