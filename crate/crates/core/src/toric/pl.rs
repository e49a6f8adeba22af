use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::fan::Fan;
use crate::error::{Error, Result};
use crate::lattice::linalg::solve;
use crate::lattice::rational::{dot_mixed, dot_rat, format_rational, parse_rational, LatticeVector, Rational};

/// Piecewise-linear function on a simplicial fan, linear on each maximal cone.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PLFunction {
    fan: Fan,
    ray_values: Vec<Rational>,
    /// One linear form m_sigma per maximal cone, in fan order.
    cone_forms: Vec<Vec<Rational>>,
}

/// Wire form: `{ "ray_values": ["1", "2/3", ...] }`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PLJson {
    pub ray_values: Vec<String>,
}

impl PLFunction {
    pub fn from_ray_values(fan: &Fan, ray_values: Vec<Rational>) -> Result<Self> {
        if ray_values.len() != fan.rays().len() {
            return Err(Error::DimensionMismatch {
                expected: fan.rays().len(),
                found: ray_values.len(),
            });
        }
        let mut cone_forms = Vec::with_capacity(fan.max_cones().len());
        for cone in fan.max_cones() {
            if cone.len() != fan.dim() {
                return Err(Error::NotComplete(format!(
                    "maximal cone {cone:?} is not full-dimensional"
                )));
            }
            let a: Vec<Vec<Rational>> = cone
                .iter()
                .map(|&r| fan.rays()[r].iter().cloned().map(Rational::from_integer).collect())
                .collect();
            let b: Vec<Rational> = cone.iter().map(|&r| ray_values[r].clone()).collect();
            let m = solve(&a, &b).ok_or_else(|| Error::InvalidFan(format!("cone {cone:?} is degenerate")))?;
            cone_forms.push(m);
        }
        Ok(PLFunction {
            fan: fan.clone(),
            ray_values,
            cone_forms,
        })
    }

    pub fn from_json(fan: &Fan, json: &PLJson) -> Result<Self> {
        let values = json
            .ray_values
            .iter()
            .map(|s| parse_rational(s).ok_or_else(|| Error::Spec(format!("bad rational `{s}`"))))
            .collect::<Result<Vec<_>>>()?;
        PLFunction::from_ray_values(fan, values)
    }

    pub fn to_json(&self) -> PLJson {
        PLJson {
            ray_values: self.ray_values.iter().map(format_rational).collect(),
        }
    }

    pub fn fan(&self) -> &Fan {
        &self.fan
    }

    pub fn ray_values(&self) -> &[Rational] {
        &self.ray_values
    }

    pub fn cone_forms(&self) -> &[Vec<Rational>] {
        &self.cone_forms
    }

    /// <m_sigma, e_rho> <= phi(e_rho) for every maximal cone and ray, so that
    /// phi is the maximum of its linear forms.
    pub fn is_convex(&self) -> bool {
        self.compare_all(|pairing, value, _| pairing <= value)
    }

    /// Convex, with equality only for rays inside the cone.
    pub fn is_strictly_convex(&self) -> bool {
        self.compare_all(|pairing, value, inside| if inside { pairing == value } else { pairing < value })
    }

    fn compare_all(&self, ok: impl Fn(&Rational, &Rational, bool) -> bool) -> bool {
        self.fan.max_cones().iter().zip(&self.cone_forms).all(|(cone, m)| {
            self.fan
                .rays()
                .iter()
                .enumerate()
                .all(|(i, ray)| ok(&dot_mixed(ray, m), &self.ray_values[i], cone.contains(&i)))
        })
    }

    pub fn is_integral(&self) -> bool {
        self.cone_forms.iter().all(|m| m.iter().all(|x| x.denom().is_one()))
    }

    /// Distinct linear forms as integer vectors; requires integrality.
    pub fn integral_forms(&self) -> Result<Vec<LatticeVector>> {
        if !self.is_integral() {
            return Err(Error::NonIntegralForms);
        }
        let mut out: Vec<LatticeVector> = Vec::new();
        for m in &self.cone_forms {
            let v: LatticeVector = m.iter().map(|x| x.to_integer()).collect();
            if !out.contains(&v) {
                out.push(v);
            }
        }
        Ok(out)
    }

    /// Value at a rational point, using the maximal cone that contains it.
    pub fn evaluate(&self, x: &[Rational]) -> Option<Rational> {
        self.fan.locate(x).map(|i| dot_rat(&self.cone_forms[i], x))
    }

    /// The same function viewed on a refinement of its fan: values on the new
    /// rays come from the linear form of the old cone containing them.
    pub fn pull_back(&self, refined: &Fan) -> Result<PLFunction> {
        let mut values = Vec::with_capacity(refined.rays().len());
        for ray in refined.rays() {
            let x: Vec<Rational> = ray.iter().cloned().map(Rational::from_integer).collect();
            values.push(
                self.evaluate(&x)
                    .ok_or_else(|| Error::NotComplete("refinement leaves the support".into()))?,
            );
        }
        PLFunction::from_ray_values(refined, values)
    }

    pub fn scaled(&self, k: &Rational) -> Result<PLFunction> {
        PLFunction::from_ray_values(&self.fan, self.ray_values.iter().map(|v| v * k).collect())
    }

    pub fn has_positive_values(&self) -> bool {
        self.ray_values.iter().all(|v| v > &Rational::zero())
    }
}

/// The piecewise-linear function with value 1 on every ray, whose class is -K.
pub fn anticanonical_pl(fan: &Fan) -> Result<PLFunction> {
    PLFunction::from_ray_values(fan, vec![Rational::one(); fan.rays().len()])
}
